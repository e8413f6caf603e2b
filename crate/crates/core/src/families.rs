//! Seeded test operators: Jordan structures with controlled bases, sectorial
//! matrices, normal and diagonal families.

use rand::Rng;

use crate::error::Result;
use crate::linalg::{self, C64, CMatrix};
use crate::operator::{JordanBlock, OperatorSpec};

/// Haar-like unitary from the QR factors of a complex Gaussian matrix.
pub fn random_unitary<R: Rng + ?Sized>(rng: &mut R, n: usize) -> CMatrix {
    let g = linalg::random_cmatrix(rng, n, n);
    let qr = g.qr();
    let (mut q, r) = (qr.q(), qr.r());
    for j in 0..n {
        let d = r[(j, j)];
        let phase = if d.norm() > 0.0 { d / d.norm() } else { C64::new(1.0, 0.0) };
        let mut col = q.column_mut(j);
        col *= phase;
    }
    q
}

/// `U (I + spread G / ||G||)`; the condition number is at most `(1 + spread)/(1 - spread)`.
pub fn well_conditioned_basis<R: Rng + ?Sized>(rng: &mut R, n: usize, spread: f64) -> CMatrix {
    let u = random_unitary(rng, n);
    let g = linalg::random_cmatrix(rng, n, n);
    let g = &g * C64::new(spread / linalg::op_norm(&g).max(f64::MIN_POSITIVE), 0.0);
    u * (CMatrix::identity(n, n) + g)
}

/// Block sizes in `1..=max_chain` summing to `dim`, with at least one block of the largest size
/// when `dim` allows it.
fn block_sizes<R: Rng + ?Sized>(rng: &mut R, dim: usize, max_chain: usize) -> Vec<usize> {
    let mut sizes = vec![max_chain.min(dim)];
    let mut left = dim - sizes[0];
    while left > 0 {
        let s = rng.gen_range(1..=max_chain.min(left));
        sizes.push(s);
        left -= s;
    }
    sizes
}

/// Characteristic numbers `rho_k e^{i phi_k}` with increasing, separated moduli and
/// `|phi_k| <= max_angle`.
pub fn separated_characteristic_numbers<R: Rng + ?Sized>(rng: &mut R, count: usize, max_angle: f64) -> Vec<C64> {
    (0..count)
        .map(|k| {
            let rho = 1.0 + 0.6 * k as f64 + rng.gen_range(0.0..0.2);
            let phi = rng.gen_range(-max_angle..=max_angle);
            C64::from_polar(rho, phi)
        })
        .collect()
}

/// Operator with a known Jordan form: blocks up to `max_chain`, eigenvalues `1/lambda_k` with
/// separated characteristic numbers in `|arg lambda| <= 0.6`, and a basis of condition below 2.
pub fn structured_operator(seed: u64, dim: usize, max_chain: usize) -> Result<OperatorSpec> {
    let mut rng = linalg::seeded_rng(seed);
    let sizes = block_sizes(&mut rng, dim, max_chain.max(1));
    let lambdas = separated_characteristic_numbers(&mut rng, sizes.len(), 0.6);
    let blocks = sizes
        .iter()
        .zip(&lambdas)
        .map(|(&size, l)| JordanBlock { eigenvalue: l.inv(), size })
        .collect();
    let basis = well_conditioned_basis(&mut rng, dim, 0.3);
    OperatorSpec::from_jordan(blocks, basis, format!("structured-{seed}"))
}

/// `B = H^{1/2} (I + i s S) H^{1/2}` with `H > 0` and Hermitian `||S|| = 1`, so the numerical
/// range lies in `|arg z| <= arctan s`.
pub fn sectorial_operator(seed: u64, dim: usize, s: f64) -> Result<OperatorSpec> {
    let mut rng = linalg::seeded_rng(seed);
    let u = random_unitary(&mut rng, dim);
    let mut root = CMatrix::zeros(dim, dim);
    for i in 0..dim {
        root[(i, i)] = C64::new(rng.gen_range(0.2f64..1.0).sqrt(), 0.0);
    }
    let h_half = &u * root * u.adjoint();
    let g = linalg::random_cmatrix(&mut rng, dim, dim);
    let herm = (&g + g.adjoint()) * C64::new(0.5, 0.0);
    let herm = &herm * C64::new(1.0 / linalg::op_norm(&herm).max(f64::MIN_POSITIVE), 0.0);
    let inner = CMatrix::identity(dim, dim) + herm * C64::new(0.0, s);
    OperatorSpec::from_dense(&h_half * inner * &h_half, format!("sectorial-{seed}"))
}

pub fn diagonal_operator(values: &[C64], label: impl Into<String>) -> Result<OperatorSpec> {
    let n = values.len();
    let mut m = CMatrix::zeros(n, n);
    for (i, v) in values.iter().enumerate() {
        m[(i, i)] = *v;
    }
    OperatorSpec::from_dense(m, label)
}

/// Diagonal operator whose entries have moduli in `[lo, hi]` and arguments in `[-max_angle, max_angle]`.
pub fn diagonal_family(seed: u64, dim: usize, lo: f64, hi: f64, max_angle: f64) -> Result<OperatorSpec> {
    let mut rng = linalg::seeded_rng(seed);
    let values: Vec<C64> = (0..dim)
        .map(|_| C64::from_polar(rng.gen_range(lo..=hi), rng.gen_range(-max_angle..=max_angle)))
        .collect();
    diagonal_operator(&values, format!("diagonal-{seed}"))
}

/// `U diag(values) U*` for a seeded unitary `U`.
pub fn normal_operator(seed: u64, values: &[C64]) -> Result<OperatorSpec> {
    let mut rng = linalg::seeded_rng(seed);
    let n = values.len();
    let u = random_unitary(&mut rng, n);
    let mut d = CMatrix::zeros(n, n);
    for (i, v) in values.iter().enumerate() {
        d[(i, i)] = *v;
    }
    OperatorSpec::from_dense(&u * d * u.adjoint(), format!("normal-{seed}"))
}

/// A single Jordan block `mu I + N` of the given size in a seeded well-conditioned basis.
pub fn jordan_block_operator(seed: u64, mu: C64, size: usize) -> Result<OperatorSpec> {
    let mut rng = linalg::seeded_rng(seed);
    let basis = well_conditioned_basis(&mut rng, size, 0.3);
    OperatorSpec::from_jordan(vec![JordanBlock { eigenvalue: mu, size }], basis, format!("jordan-{seed}"))
}
