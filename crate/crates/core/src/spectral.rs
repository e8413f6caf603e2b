//! Jordan chains, biorthogonal adjoint chains and Riesz projectors.
//!
//! Root vectors are numbered by flattening groups, then chains, then chain
//! positions (eigenvector first). All coefficient sequences use that numbering.

use std::f64::consts::PI;
use std::ops::Range;

use serde_json::json;

use crate::error::{Error, Result};
use crate::linalg::{self, C64, CMatrix, CVector, columns_to_matrix, vector_to_pairs};
use crate::operator::OperatorSpec;

pub const DEFAULT_RANK_TOLERANCE: f64 = 1e-8;
/// Eigenvalues closer than this (relative to `||B||`) form one cluster on the dense path.
pub const CLUSTER_TOLERANCE: f64 = 1e-5;
const DENSE_CHAIN_TOL: f64 = 1e-7;
const PAIRING_CONDITION_CAP: f64 = 1e12;

#[derive(Debug, Clone, PartialEq)]
pub struct JordanChain {
    pub index: usize,
    /// `e_0, ..., e_k` with `B e_0 = mu e_0` and `B e_j = mu e_j + e_{j-1}`.
    pub e: Vec<CVector>,
    /// Adjoint chain, empty until [`build_biorthogonal`] runs.
    pub g: Vec<CVector>,
}

impl JordanChain {
    pub fn len(&self) -> usize {
        self.e.len()
    }

    pub fn is_empty(&self) -> bool {
        self.e.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EigenGroup {
    pub mu: C64,
    pub lambda: C64,
    pub chains: Vec<JordanChain>,
}

impl EigenGroup {
    fn new(mu: C64, chains: Vec<JordanChain>) -> Self {
        Self { mu, lambda: mu.inv(), chains }
    }

    /// Algebraic multiplicity `n_q`.
    pub fn multiplicity(&self) -> usize {
        self.chains.iter().map(JordanChain::len).sum()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpectralDecomposition {
    pub dimension: usize,
    pub groups: Vec<EigenGroup>,
}

impl SpectralDecomposition {
    pub fn total_root_count(&self) -> usize {
        self.groups.iter().map(EigenGroup::multiplicity).sum()
    }

    pub fn has_adjoint_system(&self) -> bool {
        self.groups.iter().flat_map(|g| &g.chains).all(|c| c.g.len() == c.e.len())
    }

    /// Flat index range of each group.
    pub fn group_ranges(&self) -> Vec<Range<usize>> {
        let mut at = 0;
        self.groups
            .iter()
            .map(|g| {
                let r = at..at + g.multiplicity();
                at = r.end;
                r
            })
            .collect()
    }

    pub fn flat_e(&self) -> Vec<&CVector> {
        self.groups.iter().flat_map(|g| &g.chains).flat_map(|c| &c.e).collect()
    }

    pub fn flat_g(&self) -> Vec<&CVector> {
        self.groups.iter().flat_map(|g| &g.chains).flat_map(|c| &c.g).collect()
    }

    pub fn e_matrix(&self) -> CMatrix {
        let cols: Vec<CVector> = self.flat_e().into_iter().cloned().collect();
        columns_to_matrix(self.dimension, &cols)
    }

    pub fn g_matrix(&self) -> CMatrix {
        let cols: Vec<CVector> = self.flat_g().into_iter().cloned().collect();
        columns_to_matrix(self.dimension, &cols)
    }

    /// Pairing matrix `M[n][m] = (e_m, g_n)`; the identity for a biorthogonal system.
    pub fn pairing_matrix(&self) -> CMatrix {
        self.g_matrix().adjoint() * self.e_matrix()
    }

    /// `sum_n c_n e_n`.
    pub fn reconstruct(&self, coeffs: &[C64]) -> Result<CVector> {
        let e = self.flat_e();
        if coeffs.len() != e.len() {
            return Err(Error::Misaligned(format!("{} coefficients for {} root vectors", coeffs.len(), e.len())));
        }
        let mut out = CVector::zeros(self.dimension);
        for (v, &c) in e.into_iter().zip(coeffs) {
            out.axpy(c, v, C64::new(1.0, 0.0));
        }
        Ok(out)
    }

    /// Worst chain-relation residual, forward and adjoint, relative to `||B||`.
    pub fn chain_residual(&self, op: &OperatorSpec) -> f64 {
        let scale = op.norm().max(f64::MIN_POSITIVE);
        let mut worst: f64 = 0.0;
        for group in &self.groups {
            for chain in &group.chains {
                for (j, e) in chain.e.iter().enumerate() {
                    let mut r = op.apply(e) - e * group.mu;
                    if j > 0 {
                        r -= &chain.e[j - 1];
                    }
                    worst = worst.max(r.norm() / (scale * e.norm().max(f64::MIN_POSITIVE)));
                }
                let k = chain.g.len();
                for (j, g) in chain.g.iter().enumerate() {
                    let mut r = op.adjoint_apply(g) - g * group.mu.conj();
                    if j + 1 < k {
                        r -= &chain.g[j + 1];
                    }
                    worst = worst.max(r.norm() / (scale * g.norm().max(f64::MIN_POSITIVE)));
                }
            }
        }
        worst
    }

    pub fn to_json_value(&self) -> serde_json::Value {
        let groups: Vec<_> = self
            .groups
            .iter()
            .map(|g| {
                let chains: Vec<_> = g
                    .chains
                    .iter()
                    .map(|c| {
                        json!({
                            "e": c.e.iter().map(vector_to_pairs).collect::<Vec<_>>(),
                            "g": c.g.iter().map(vector_to_pairs).collect::<Vec<_>>(),
                        })
                    })
                    .collect();
                json!({
                    "mu": [g.mu.re, g.mu.im],
                    "lambda": [g.lambda.re, g.lambda.im],
                    "chains": chains,
                })
            })
            .collect();
        json!({ "dimension": self.dimension, "groups": groups })
    }
}

fn sort_groups(groups: &mut [EigenGroup]) {
    groups.sort_by(|a, b| {
        a.lambda
            .norm()
            .total_cmp(&b.lambda.norm())
            .then(a.lambda.arg().total_cmp(&b.lambda.arg()))
    });
    let mut index = 0;
    for g in groups.iter_mut() {
        for c in g.chains.iter_mut() {
            c.index = index;
            index += 1;
        }
    }
}

/// Jordan chains of `op`, without adjoint chains.
///
/// A structured form is used verbatim; otherwise chains are built from the
/// nilpotent part of `B` restricted to each cluster's Riesz projector range.
pub fn decompose(op: &OperatorSpec, rank_tolerance: f64) -> Result<SpectralDecomposition> {
    if !(rank_tolerance > 0.0) {
        return Err(Error::InvalidParameter("rank_tolerance must be positive".into()));
    }
    let mut groups = match &op.structured {
        Some(_) => structured_groups(op)?,
        None => dense_groups(op, rank_tolerance)?,
    };
    sort_groups(&mut groups);
    Ok(SpectralDecomposition { dimension: op.dimension, groups })
}

fn structured_groups(op: &OperatorSpec) -> Result<Vec<EigenGroup>> {
    let form = op.structured.as_ref().expect("structured path");
    let scale = form.blocks.iter().map(|b| b.eigenvalue.norm()).fold(0.0, f64::max);
    let mut groups: Vec<EigenGroup> = Vec::new();
    for (block, at) in form.blocks.iter().zip(form.offsets()) {
        if block.eigenvalue.norm() == 0.0 {
            return Err(Error::ZeroEigenvalue { mu: block.eigenvalue });
        }
        let e: Vec<CVector> = (0..block.size).map(|j| form.basis.column(at + j).into_owned()).collect();
        let chain = JordanChain { index: 0, e, g: Vec::new() };
        match groups.iter_mut().find(|g| (g.mu - block.eigenvalue).norm() <= 1e-14 * scale) {
            Some(g) => g.chains.push(chain),
            None => groups.push(EigenGroup::new(block.eigenvalue, vec![chain])),
        }
    }
    Ok(groups)
}

/// Single-linkage clusters of `values` at distance `tol`.
fn cluster(values: &[C64], tol: f64) -> Vec<Vec<usize>> {
    let n = values.len();
    let mut label: Vec<usize> = (0..n).collect();
    fn root(label: &mut [usize], mut i: usize) -> usize {
        while label[i] != i {
            label[i] = label[label[i]];
            i = label[i];
        }
        i
    }
    for i in 0..n {
        for j in i + 1..n {
            if (values[i] - values[j]).norm() <= tol {
                let (a, b) = (root(&mut label, i), root(&mut label, j));
                label[a.max(b)] = a.min(b);
            }
        }
    }
    let mut out: Vec<Vec<usize>> = Vec::new();
    let mut roots: Vec<usize> = Vec::new();
    for i in 0..n {
        let r = root(&mut label, i);
        match roots.iter().position(|&x| x == r) {
            Some(k) => out[k].push(i),
            None => {
                roots.push(r);
                out.push(vec![i]);
            }
        }
    }
    out
}

fn dense_groups(op: &OperatorSpec, rank_tolerance: f64) -> Result<Vec<EigenGroup>> {
    let n = op.dimension;
    let norm = op.norm().max(f64::MIN_POSITIVE);
    let eig = op.eigenvalues();
    if let Some(&mu) = eig.iter().find(|mu| mu.norm() <= 1e-13 * norm) {
        return Err(Error::ZeroEigenvalue { mu });
    }
    let clusters = cluster(&eig, CLUSTER_TOLERANCE * norm);
    let mut groups = Vec::with_capacity(clusters.len());
    let mut worst: f64 = 0.0;
    for (ci, members) in clusters.iter().enumerate() {
        let center = members.iter().map(|&i| eig[i]).sum::<C64>() / members.len() as f64;
        let spread = members.iter().map(|&i| (eig[i] - center).norm()).fold(0.0, f64::max);
        let gap = clusters
            .iter()
            .enumerate()
            .filter(|(cj, _)| *cj != ci)
            .flat_map(|(_, other)| other.iter().map(|&j| (eig[j] - center).norm()))
            .fold(f64::INFINITY, f64::min);
        let radius = if gap.is_finite() { 0.5 * gap } else { norm.max(2.0 * spread) };
        let proj = circle_projector(op, center, radius, 1e-13)?;
        let nq = members.len();
        let v = linalg::dominant_range(&proj, nq);
        let bq = v.adjoint() * &op.dense * &v;
        let mu = bq.trace() / nq as f64;
        let nil = &bq - CMatrix::identity(nq, nq) * mu;
        let chains = nilpotent_chains(&nil, rank_tolerance * norm.max(1.0))
            .into_iter()
            .map(|local| JordanChain { index: 0, e: local.iter().map(|x| &v * x).collect(), g: Vec::new() })
            .collect::<Vec<_>>();
        let group = EigenGroup::new(mu, chains);
        if group.multiplicity() != nq {
            return Err(Error::ChainResidual { residual: f64::INFINITY });
        }
        groups.push(group);
    }
    let decomp = SpectralDecomposition { dimension: n, groups };
    worst = worst.max(decomp.chain_residual(op));
    if !(worst <= DENSE_CHAIN_TOL) {
        return Err(Error::ChainResidual { residual: worst });
    }
    Ok(decomp.groups)
}

/// Jordan chains `[N^{j-1} v, ..., N v, v]` of a nilpotent matrix, longest first.
fn nilpotent_chains(nil: &CMatrix, tol: f64) -> Vec<Vec<CVector>> {
    let n = nil.nrows();
    // Kernels of N^j until they fill the space.
    let mut kernels: Vec<CMatrix> = vec![CMatrix::zeros(n, 0)];
    let mut power = CMatrix::identity(n, n);
    let mut scale = 1.0;
    while kernels.last().expect("nonempty").ncols() < n && kernels.len() <= n {
        power = &power * nil;
        scale *= nil.norm().max(1.0);
        kernels.push(linalg::null_space(&power, tol * scale));
    }
    if kernels.last().expect("nonempty").ncols() < n {
        // Not numerically nilpotent: treat the remainder as eigenvectors.
        kernels.push(CMatrix::identity(n, n));
    }
    let depth = kernels.len() - 1;
    let mut tops: Vec<(CVector, usize)> = Vec::new();
    for j in (1..=depth).rev() {
        let mut span: Vec<CVector> = kernels[j - 1].column_iter().map(|c| c.into_owned()).collect();
        for (v, len) in &tops {
            let mut w = v.clone();
            for _ in 0..(len - j) {
                w = nil * w;
            }
            span.push(w);
        }
        let have = span.len();
        let want = kernels[j].ncols().saturating_sub(have);
        if want == 0 {
            continue;
        }
        let complement = if span.is_empty() {
            kernels[j].clone()
        } else {
            let q = linalg::dominant_range(&columns_to_matrix(n, &span), have);
            let k = &kernels[j];
            k - &q * (q.adjoint() * k)
        };
        let fresh = linalg::dominant_range(&complement, want);
        for col in fresh.column_iter() {
            tops.push((col.into_owned(), j));
        }
    }
    tops.into_iter()
        .map(|(v, len)| {
            let mut chain = vec![v];
            for _ in 1..len {
                let next = nil * chain.last().expect("nonempty");
                chain.push(next);
            }
            chain.reverse();
            chain
        })
        .collect()
}

/// Fills the adjoint chains so that `(e_m, g_n) = delta_mn`.
pub fn build_biorthogonal(decomp: &SpectralDecomposition, op: &OperatorSpec) -> Result<SpectralDecomposition> {
    if decomp.dimension != op.dimension {
        return Err(Error::DimensionMismatch { expected: op.dimension, got: decomp.dimension });
    }
    let e = decomp.e_matrix();
    if e.ncols() != e.nrows() {
        return Err(Error::Misaligned(format!("{} root vectors in dimension {}", e.ncols(), e.nrows())));
    }
    let condition = linalg::condition_number(&e);
    if !(condition <= PAIRING_CONDITION_CAP) {
        return Err(Error::IllConditionedPairing { condition });
    }
    let e_inv = e.try_inverse().ok_or(Error::IllConditionedPairing { condition })?;
    let g = e_inv.adjoint();
    let mut out = decomp.clone();
    let mut col = 0;
    for group in out.groups.iter_mut() {
        for chain in group.chains.iter_mut() {
            chain.g = (0..chain.e.len()).map(|j| g.column(col + j).into_owned()).collect();
            col += chain.e.len();
        }
    }
    Ok(out)
}

/// `decompose` followed by `build_biorthogonal`.
pub fn full_decomposition(op: &OperatorSpec, rank_tolerance: f64) -> Result<SpectralDecomposition> {
    build_biorthogonal(&decompose(op, rank_tolerance)?, op)
}

/// Raw coefficients `c_n = (f, g_n)`; the pairing denominators are one.
pub fn raw_coefficients(decomp: &SpectralDecomposition, f: &CVector) -> Result<Vec<C64>> {
    if !decomp.has_adjoint_system() {
        return Err(Error::MissingAdjointSystem);
    }
    if f.len() != decomp.dimension {
        return Err(Error::DimensionMismatch { expected: decomp.dimension, got: f.len() });
    }
    Ok(decomp.flat_g().into_iter().map(|g| linalg::inner(f, g)).collect())
}

/// Trapezoidal `-(1/2 pi i) \oint (B - z)^{-1} dz` on `panels` nodes.
fn projector_sum(op: &OperatorSpec, center: C64, radius: f64, panels: usize) -> Result<CMatrix> {
    let n = op.dimension;
    let mut acc = CMatrix::zeros(n, n);
    for k in 0..panels {
        let w = C64::from_polar(radius, 2.0 * PI * (k as f64 + 0.5) / panels as f64);
        let z = center + w;
        let shifted = CMatrix::identity(n, n) * z - &op.dense;
        let inv = shifted.try_inverse().ok_or_else(|| Error::ForeignEigenvalue { center, radius, foreign: z })?;
        acc += inv * w;
    }
    Ok(acc / C64::new(panels as f64, 0.0))
}

fn check_circle(op: &OperatorSpec, center: C64, radius: f64, expected_inside: Option<usize>) -> Result<()> {
    let eig = op.eigenvalues();
    if let Some(&z) = eig.iter().find(|z| {
        let d = (*z - center).norm();
        (d - radius).abs() < 0.05 * radius
    }) {
        return Err(Error::ForeignEigenvalue { center, radius, foreign: z });
    }
    if let Some(count) = expected_inside {
        let mut inside: Vec<C64> = eig.iter().copied().filter(|z| (z - center).norm() < radius).collect();
        if inside.len() > count {
            inside.sort_by(|a, b| (b - center).norm().total_cmp(&(a - center).norm()));
            return Err(Error::ForeignEigenvalue { center, radius, foreign: inside[0] });
        }
    }
    Ok(())
}

/// Adaptive version: doubles the trapezoid count until the projector settles.
pub fn circle_projector(op: &OperatorSpec, center: C64, radius: f64, tol: f64) -> Result<CMatrix> {
    check_circle(op, center, radius, None)?;
    let mut panels = 32;
    let mut prev = projector_sum(op, center, radius, panels)?;
    while panels < 8192 {
        panels *= 2;
        let next = projector_sum(op, center, radius, panels)?;
        let change = (&next - &prev).norm() / next.norm().max(1.0);
        prev = next;
        if change <= tol {
            break;
        }
    }
    Ok(prev)
}

/// Riesz projector of `group` on a circle of the given radius around `mu_q`.
pub fn riesz_projector(
    op: &OperatorSpec,
    decomp: &SpectralDecomposition,
    group: usize,
    radius: f64,
    panels: usize,
) -> Result<CMatrix> {
    let g = decomp
        .groups
        .get(group)
        .ok_or_else(|| Error::InvalidParameter(format!("group {group} out of range")))?;
    if !(radius > 0.0) || panels == 0 {
        return Err(Error::InvalidParameter("radius and panels must be positive".into()));
    }
    check_circle(op, g.mu, radius, Some(g.multiplicity()))?;
    projector_sum(op, g.mu, radius, panels)
}

/// Half the distance from `mu_q` to the nearest other eigenvalue group.
pub fn isolating_radius(decomp: &SpectralDecomposition, group: usize) -> f64 {
    let mu = decomp.groups[group].mu;
    let gap = decomp
        .groups
        .iter()
        .enumerate()
        .filter(|(i, _)| *i != group)
        .map(|(_, g)| (g.mu - mu).norm())
        .fold(f64::INFINITY, f64::min);
    if gap.is_finite() { 0.5 * gap } else { 0.5 * mu.norm() }
}
