//! Dense complex linear-algebra helpers shared across modules.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

pub type C64 = Complex64;
pub type CMatrix = DMatrix<C64>;
pub type CVector = DVector<C64>;

pub const I: C64 = C64::new(0.0, 1.0);

pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

/// Inner product `(f, g) = sum f_i conj(g_i)`, linear in the first slot.
pub fn inner(f: &CVector, g: &CVector) -> C64 {
    g.dotc(f)
}

pub fn norm(f: &CVector) -> f64 {
    f.norm()
}

fn to_faer(m: &CMatrix) -> faer::Mat<faer::c64> {
    faer::Mat::from_fn(m.nrows(), m.ncols(), |i, j| {
        let z = m[(i, j)];
        faer::c64::new(z.re, z.im)
    })
}

fn from_faer(m: faer::MatRef<'_, faer::c64>) -> CMatrix {
    CMatrix::from_fn(m.nrows(), m.ncols(), |i, j| {
        let z = m[(i, j)];
        C64::new(z.re, z.im)
    })
}

/// Full SVD `m = U diag(s) V*`, singular values in decreasing order.
///
/// Uses faer: the nalgebra complex SVD loses accuracy on some low-rank inputs
/// (Riesz projectors in particular).
pub fn svd(m: &CMatrix) -> (CMatrix, Vec<f64>, CMatrix) {
    let (r, c) = (m.nrows(), m.ncols());
    if r == 0 || c == 0 {
        return (CMatrix::identity(r, r), Vec::new(), CMatrix::identity(c, c));
    }
    let f = to_faer(m).svd().expect("SVD of a finite matrix converges");
    let s = f.S().column_vector().iter().map(|z| z.re).collect();
    (from_faer(f.U()), s, from_faer(f.V()))
}

/// Singular values sorted in decreasing order.
pub fn singular_values(m: &CMatrix) -> Vec<f64> {
    if m.nrows() == 0 || m.ncols() == 0 {
        return Vec::new();
    }
    let mut s: Vec<f64> = to_faer(m)
        .singular_values()
        .expect("SVD of a finite matrix converges")
        .into_iter()
        .collect();
    s.sort_by(|a, b| b.total_cmp(a));
    s
}

/// Spectral norm `||M||_2`.
pub fn op_norm(m: &CMatrix) -> f64 {
    singular_values(m).first().copied().unwrap_or(0.0)
}

/// 2-norm condition number; infinite when the matrix is numerically singular.
pub fn condition_number(m: &CMatrix) -> f64 {
    let s = singular_values(m);
    match (s.first(), s.last()) {
        (Some(&hi), Some(&lo)) if lo > 0.0 => hi / lo,
        _ => f64::INFINITY,
    }
}

/// Eigenvalues of a general complex matrix (complex Schur form).
pub fn eigenvalues(m: &CMatrix) -> Vec<C64> {
    if m.nrows() == 0 {
        return Vec::new();
    }
    let schur = m.clone().schur();
    let (_, t) = schur.unpack();
    (0..t.nrows()).map(|i| t[(i, i)]).collect()
}

/// Unitary Schur factorization `m = Q T Q*`.
pub fn schur(m: &CMatrix) -> (CMatrix, CMatrix) {
    m.clone().schur().unpack()
}

/// Smallest eigenvalue of a Hermitian matrix.
pub fn hermitian_min_eigenvalue(h: &CMatrix) -> f64 {
    if h.nrows() == 0 {
        return f64::INFINITY;
    }
    to_faer(h)
        .self_adjoint_eigenvalues(faer::Side::Lower)
        .expect("Hermitian eigenvalues converge")
        .into_iter()
        .fold(f64::INFINITY, f64::min)
}

/// Orthonormal basis (as columns) of the numerical null space of `m`.
pub fn null_space(m: &CMatrix, tol: f64) -> CMatrix {
    let n = m.ncols();
    if n == 0 {
        return CMatrix::zeros(0, 0);
    }
    let (_, s, v) = svd(m);
    let cols: Vec<CVector> = (0..n)
        .filter(|&i| s.get(i).is_none_or(|&x| x <= tol))
        .map(|i| v.column(i).into_owned())
        .collect();
    columns_to_matrix(n, &cols)
}

/// Leading `k` left singular vectors of `m` (orthonormal basis of its dominant range).
pub fn dominant_range(m: &CMatrix, k: usize) -> CMatrix {
    let (u, _, _) = svd(m);
    u.columns(0, k.min(u.ncols())).into_owned()
}

pub fn columns_to_matrix(nrows: usize, cols: &[CVector]) -> CMatrix {
    let mut m = CMatrix::zeros(nrows, cols.len());
    for (j, col) in cols.iter().enumerate() {
        m.set_column(j, col);
    }
    m
}

/// `z^a` on the principal branch, `arg z` in `(-pi, pi]`.
pub fn principal_pow(z: C64, a: f64) -> C64 {
    if z == C64::new(0.0, 0.0) {
        return if a == 0.0 { C64::new(1.0, 0.0) } else { C64::new(0.0, 0.0) };
    }
    let (r, theta) = z.to_polar();
    C64::from_polar(r.powf(a), theta * a)
}

pub fn seeded_rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Standard complex Gaussian vector (independent real and imaginary parts).
pub fn random_cvector<R: Rng + ?Sized>(rng: &mut R, n: usize) -> CVector {
    CVector::from_iterator(
        n,
        (0..n).map(|_| C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))),
    )
}

pub fn random_cmatrix<R: Rng + ?Sized>(rng: &mut R, rows: usize, cols: usize) -> CMatrix {
    let mut m = CMatrix::zeros(rows, cols);
    for j in 0..cols {
        for i in 0..rows {
            m[(i, j)] = C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal));
        }
    }
    m
}

/// `(re, im)` pair as stored in the JSON formats.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Pair(pub [f64; 2]);

impl From<C64> for Pair {
    fn from(z: C64) -> Self {
        Pair([z.re, z.im])
    }
}

impl From<Pair> for C64 {
    fn from(p: Pair) -> Self {
        C64::new(p.0[0], p.0[1])
    }
}

pub fn vector_to_pairs(v: &CVector) -> Vec<Pair> {
    v.iter().map(|&z| z.into()).collect()
}

pub fn pairs_to_vector(p: &[Pair]) -> CVector {
    CVector::from_iterator(p.len(), p.iter().map(|&q| q.into()))
}

pub fn matrix_to_rows(m: &CMatrix) -> Vec<Vec<Pair>> {
    (0..m.nrows())
        .map(|i| (0..m.ncols()).map(|j| m[(i, j)].into()).collect())
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn inner_is_linear_in_first_slot() {
        let f = CVector::from_vec(vec![c(1.0, 1.0), c(0.0, 2.0)]);
        let g = CVector::from_vec(vec![c(2.0, 0.0), c(0.0, 1.0)]);
        let a = c(0.5, -3.0);
        let lhs = inner(&(&f * a), &g);
        assert!((lhs - a * inner(&f, &g)).norm() < 1e-14);
        // (f, g) = conj((g, f))
        assert!((inner(&f, &g) - inner(&g, &f).conj()).norm() < 1e-14);
    }

    #[test]
    fn principal_branch_of_square_root() {
        let z = principal_pow(c(-4.0, 0.0), 0.5);
        assert!((z - c(0.0, 2.0)).norm() < 1e-14);
        let w = principal_pow(c(0.0, -1.0), 2.0);
        assert!((w - c(-1.0, 0.0)).norm() < 1e-14);
    }

    #[test]
    fn null_space_of_shift() {
        let m = CMatrix::from_row_slice(2, 2, &[c(0.0, 0.0), c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)]);
        let k = null_space(&m, 1e-12);
        assert_eq!(k.ncols(), 1);
        assert!((k[(0, 0)].norm() - 1.0).abs() < 1e-14);
    }
}
