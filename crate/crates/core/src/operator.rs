//! Finite-dimensional operators: dense matrices with an optional exact Jordan form.

use std::f64::consts::PI;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{
    self, C64, CMatrix, CVector, Pair, columns_to_matrix, matrix_to_rows, random_cvector,
};

/// Reconstruction tolerance for `P J P^{-1}` against the dense matrix.
const STRUCTURE_TOL: f64 = 1e-12;
/// Change-of-basis matrices beyond this condition number are rejected.
const BASIS_CONDITION_CAP: f64 = 1e12;
/// Target normwise backward error of a resolvent solve.
const BACKWARD_TOL: f64 = 1e-12;
const ANGULAR_SLACK: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JordanBlock {
    pub eigenvalue: C64,
    pub size: usize,
}

/// Exact Jordan description `B = P J P^{-1}`.
#[derive(Debug, Clone, PartialEq)]
pub struct StructuredForm {
    pub blocks: Vec<JordanBlock>,
    pub basis: CMatrix,
}

impl StructuredForm {
    pub fn jordan_matrix(&self) -> CMatrix {
        jordan_matrix(&self.blocks)
    }

    /// Column offset of each block inside `P`.
    pub fn offsets(&self) -> Vec<usize> {
        let mut out = Vec::with_capacity(self.blocks.len());
        let mut at = 0;
        for b in &self.blocks {
            out.push(at);
            at += b.size;
        }
        out
    }
}

/// Block-diagonal Jordan matrix with ones on the superdiagonal of each block.
pub fn jordan_matrix(blocks: &[JordanBlock]) -> CMatrix {
    let n: usize = blocks.iter().map(|b| b.size).sum();
    let mut j = CMatrix::zeros(n, n);
    let mut at = 0;
    for b in blocks {
        for i in 0..b.size {
            j[(at + i, at + i)] = b.eigenvalue;
            if i + 1 < b.size {
                j[(at + i, at + i + 1)] = C64::new(1.0, 0.0);
            }
        }
        at += b.size;
    }
    j
}

#[derive(Debug, Clone, PartialEq)]
pub struct OperatorSpec {
    pub dimension: usize,
    pub dense: CMatrix,
    pub structured: Option<StructuredForm>,
    pub label: String,
}

/// Sector `L_iota(theta)` enclosing the sampled numerical range.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SectorEstimate {
    pub vertex: f64,
    /// Largest `|arg((Bf, f) - iota)|` over the probes.
    pub semi_angle: f64,
    pub samples: usize,
    /// Semi-angle proven from the Hermitian parts, when the range lies in a half-plane.
    pub certified_semi_angle: Option<f64>,
    /// Set when no sector narrower than a half-turn holds; `semi_angle` is then `pi`.
    pub wide: bool,
}

impl SectorEstimate {
    /// Angle that downstream contours should respect.
    pub fn bounding_angle(&self) -> f64 {
        match self.certified_semi_angle {
            Some(c) => c.max(self.semi_angle),
            None => self.semi_angle,
        }
    }
}

#[derive(Serialize, Deserialize)]
struct BlockJson {
    eigenvalue: Pair,
    size: usize,
}

#[derive(Serialize, Deserialize)]
struct StructuredJson {
    blocks: Vec<BlockJson>,
    basis: Vec<Vec<Pair>>,
}

#[derive(Serialize, Deserialize)]
struct OperatorJson {
    dimension: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    label: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    entries: Option<Vec<Vec<Pair>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    structured: Option<StructuredJson>,
}

fn rows_to_matrix(rows: &[Vec<Pair>], what: &str) -> Result<CMatrix> {
    let n = rows.len();
    let cols = rows.first().map_or(0, Vec::len);
    if rows.iter().any(|r| r.len() != cols) {
        return Err(Error::Malformed(format!("{what}: ragged rows")));
    }
    if n != cols {
        return Err(Error::NotSquare { rows: n, cols });
    }
    let mut m = CMatrix::zeros(n, n);
    for (i, row) in rows.iter().enumerate() {
        for (j, &z) in row.iter().enumerate() {
            let z: C64 = z.into();
            if !z.re.is_finite() || !z.im.is_finite() {
                return Err(Error::Malformed(format!("{what}: non-finite entry at ({i}, {j})")));
            }
            m[(i, j)] = z;
        }
    }
    Ok(m)
}

fn relative_frobenius(a: &CMatrix, b: &CMatrix) -> f64 {
    let scale = b.norm().max(f64::MIN_POSITIVE);
    (a - b).norm() / scale
}

impl OperatorSpec {
    pub fn from_dense(dense: CMatrix, label: impl Into<String>) -> Result<Self> {
        if dense.nrows() != dense.ncols() {
            return Err(Error::NotSquare { rows: dense.nrows(), cols: dense.ncols() });
        }
        if dense.nrows() == 0 {
            return Err(Error::InvalidParameter("dimension must be at least 1".into()));
        }
        Ok(Self { dimension: dense.nrows(), dense, structured: None, label: label.into() })
    }

    /// Builds `P J P^{-1}` from blocks and an invertible basis `P`.
    pub fn from_jordan(blocks: Vec<JordanBlock>, basis: CMatrix, label: impl Into<String>) -> Result<Self> {
        let n: usize = blocks.iter().map(|b| b.size).sum();
        if blocks.iter().any(|b| b.size == 0) {
            return Err(Error::InvalidParameter("Jordan block of size 0".into()));
        }
        if basis.nrows() != basis.ncols() {
            return Err(Error::NotSquare { rows: basis.nrows(), cols: basis.ncols() });
        }
        if basis.nrows() != n {
            return Err(Error::DimensionMismatch { expected: n, got: basis.nrows() });
        }
        let condition = linalg::condition_number(&basis);
        if !(condition <= BASIS_CONDITION_CAP) {
            return Err(Error::SingularBasis { condition });
        }
        let p_inv = basis.clone().try_inverse().ok_or(Error::SingularBasis { condition })?;
        let form = StructuredForm { blocks, basis };
        let dense = &form.basis * form.jordan_matrix() * p_inv;
        let mut op = Self::from_dense(dense, label)?;
        op.structured = Some(form);
        Ok(op)
    }

    /// Pairs a dense matrix with a structured form, checking the reconstruction.
    pub fn with_structure(dense: CMatrix, form: StructuredForm, label: impl Into<String>) -> Result<Self> {
        let rebuilt = Self::from_jordan(form.blocks.clone(), form.basis.clone(), "")?;
        let rel_error = relative_frobenius(&rebuilt.dense, &dense);
        if rel_error > STRUCTURE_TOL {
            return Err(Error::StructureMismatch { rel_error });
        }
        let mut op = Self::from_dense(dense, label)?;
        op.structured = Some(form);
        Ok(op)
    }

    pub fn from_json_str(text: &str) -> Result<Self> {
        let raw: OperatorJson = serde_json::from_str(text).map_err(|e| Error::Malformed(e.to_string()))?;
        let label = raw.label.unwrap_or_default();
        let structured = match raw.structured {
            Some(s) => {
                let basis = rows_to_matrix(&s.basis, "basis")?;
                let blocks = s
                    .blocks
                    .into_iter()
                    .map(|b| JordanBlock { eigenvalue: b.eigenvalue.into(), size: b.size })
                    .collect();
                Some(StructuredForm { blocks, basis })
            }
            None => None,
        };
        let op = match (raw.entries, structured) {
            (Some(rows), Some(form)) => {
                let dense = rows_to_matrix(&rows, "entries")?;
                Self::with_structure(dense, form, label)?
            }
            (Some(rows), None) => Self::from_dense(rows_to_matrix(&rows, "entries")?, label)?,
            (None, Some(form)) => Self::from_jordan(form.blocks, form.basis, label)?,
            (None, None) => return Err(Error::Malformed("neither entries nor structured given".into())),
        };
        if op.dimension != raw.dimension {
            return Err(Error::DimensionMismatch { expected: raw.dimension, got: op.dimension });
        }
        Ok(op)
    }

    pub fn to_json_value(&self) -> serde_json::Value {
        let raw = OperatorJson {
            dimension: self.dimension,
            label: (!self.label.is_empty()).then(|| self.label.clone()),
            entries: Some(matrix_to_rows(&self.dense)),
            structured: self.structured.as_ref().map(|s| StructuredJson {
                blocks: s
                    .blocks
                    .iter()
                    .map(|b| BlockJson { eigenvalue: b.eigenvalue.into(), size: b.size })
                    .collect(),
                basis: matrix_to_rows(&s.basis),
            }),
        };
        serde_json::to_value(raw).expect("operator JSON is always representable")
    }

    pub fn identity_check(&self, other: &CMatrix) -> f64 {
        relative_frobenius(other, &self.dense)
    }

    pub fn eigenvalues(&self) -> Vec<C64> {
        match &self.structured {
            Some(s) => s.blocks.iter().flat_map(|b| std::iter::repeat_n(b.eigenvalue, b.size)).collect(),
            None => linalg::eigenvalues(&self.dense),
        }
    }

    /// Characteristic numbers `1/mu` of the nonzero eigenvalues.
    pub fn characteristic_numbers(&self) -> Vec<C64> {
        self.eigenvalues()
            .into_iter()
            .filter(|mu| mu.norm() > 0.0)
            .map(|mu| mu.inv())
            .collect()
    }

    fn nearest_pole(&self, lambda: C64) -> C64 {
        self.characteristic_numbers()
            .into_iter()
            .min_by(|a, b| (a - lambda).norm().total_cmp(&(b - lambda).norm()))
            .unwrap_or(C64::new(f64::INFINITY, 0.0))
    }

    pub fn shifted_identity(&self, lambda: C64) -> CMatrix {
        CMatrix::identity(self.dimension, self.dimension) - &self.dense * lambda
    }

    /// Solves `(I - lambda B) x = f` by LU with iterative refinement.
    pub fn resolvent_apply(&self, lambda: C64, f: &CVector) -> Result<CVector> {
        if f.len() != self.dimension {
            return Err(Error::DimensionMismatch { expected: self.dimension, got: f.len() });
        }
        let m = self.shifted_identity(lambda);
        let singular = || Error::SingularResolvent { lambda, pole: self.nearest_pole(lambda) };
        let lu = m.clone().lu();
        let u = lu.u();
        let diag: Vec<f64> = (0..self.dimension).map(|i| u[(i, i)].norm()).collect();
        let dmax = diag.iter().copied().fold(0.0, f64::max);
        let dmin = diag.iter().copied().fold(f64::INFINITY, f64::min);
        if !(dmin > 1e-14 * dmax) {
            return Err(singular());
        }
        let mut x = lu.solve(f).ok_or_else(singular)?;
        let m_norm = m.norm();
        let backward = |x: &CVector| {
            let r = f - &m * x;
            (r.norm(), r.norm() / (m_norm * x.norm() + f.norm()).max(f64::MIN_POSITIVE))
        };
        let (mut rnorm, mut eta) = backward(&x);
        for _ in 0..3 {
            if eta <= BACKWARD_TOL * 1e-2 || rnorm == 0.0 {
                break;
            }
            let r = f - &m * &x;
            let dx = lu.solve(&r).ok_or_else(singular)?;
            let candidate = &x + dx;
            let (rn, en) = backward(&candidate);
            if en >= eta {
                break;
            }
            x = candidate;
            rnorm = rn;
            eta = en;
        }
        if !(eta <= BACKWARD_TOL) || x.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(singular());
        }
        Ok(x)
    }

    /// `||(I - lambda B)^{-1}||_2`, infinite at characteristic numbers.
    pub fn resolvent_norm(&self, lambda: C64) -> f64 {
        let s = linalg::singular_values(&self.shifted_identity(lambda));
        match s.last() {
            Some(&lo) if lo > 0.0 => 1.0 / lo,
            _ => f64::INFINITY,
        }
    }

    pub fn apply(&self, f: &CVector) -> CVector {
        &self.dense * f
    }

    /// `B* f`.
    pub fn adjoint_apply(&self, f: &CVector) -> CVector {
        self.dense.adjoint() * f
    }

    pub fn singular_values(&self) -> Vec<f64> {
        linalg::singular_values(&self.dense)
    }

    pub fn norm(&self) -> f64 {
        linalg::op_norm(&self.dense)
    }

    /// `det(I - lambda B)`.
    pub fn fredholm_determinant(&self, lambda: C64) -> C64 {
        self.shifted_identity(lambda).lu().determinant()
    }

    pub fn power(&self, k: u32) -> OperatorSpec {
        let mut p = CMatrix::identity(self.dimension, self.dimension);
        for _ in 0..k {
            p = &p * &self.dense;
        }
        OperatorSpec {
            dimension: self.dimension,
            dense: p,
            structured: None,
            label: format!("{}^{k}", self.label),
        }
    }

    /// The inverse operator; an exact Jordan form is carried over when present.
    pub fn inverse(&self) -> Result<OperatorSpec> {
        let label = format!("{}^-1", self.label);
        if let Some(form) = &self.structured {
            if let Some(b) = form.blocks.iter().find(|b| b.eigenvalue.norm() == 0.0) {
                return Err(Error::ZeroEigenvalue { mu: b.eigenvalue });
            }
            let n = self.dimension;
            let mut s = CMatrix::zeros(n, n);
            let mut blocks = Vec::with_capacity(form.blocks.len());
            for (b, at) in form.blocks.iter().zip(form.offsets()) {
                let chain = inverse_block_chain(b.eigenvalue, b.size);
                s.view_mut((at, at), (b.size, b.size)).copy_from(&chain);
                blocks.push(JordanBlock { eigenvalue: b.eigenvalue.inv(), size: b.size });
            }
            return OperatorSpec::from_jordan(blocks, &form.basis * s, label);
        }
        let condition = linalg::condition_number(&self.dense);
        if !(condition <= 1e14) {
            let mu = self
                .eigenvalues()
                .into_iter()
                .min_by(|a, b| a.norm().total_cmp(&b.norm()))
                .unwrap_or_default();
            return Err(Error::ZeroEigenvalue { mu });
        }
        let inv = self.dense.clone().try_inverse().ok_or(Error::ZeroEigenvalue { mu: C64::new(0.0, 0.0) })?;
        OperatorSpec::from_dense(inv, label)
    }

    /// Samples Rayleigh quotients `(Bf, f)/(f, f)` and reports the enclosing sector.
    ///
    /// Probes are the eigenvectors followed by `samples` seeded Gaussian vectors; the
    /// random stream is prefix-stable, so more samples never shrink the angle.
    pub fn estimate_sector(&self, samples: usize, vertex_hint: Option<f64>, seed: u64) -> Result<SectorEstimate> {
        if samples < self.dimension {
            return Err(Error::InvalidParameter(format!(
                "samples ({samples}) must be at least the dimension ({})",
                self.dimension
            )));
        }
        let vertex = vertex_hint.unwrap_or(0.0);
        let n = self.dimension;
        let mut probes: Vec<CVector> = self.eigenvectors();
        let mut rng = linalg::seeded_rng(seed);
        probes.extend((0..samples).map(|_| random_cvector(&mut rng, n)));

        let mut theta: f64 = 0.0;
        let mut wide = false;
        for f in &probes {
            let nf = f.norm_squared();
            if nf == 0.0 {
                continue;
            }
            let q = linalg::inner(&self.apply(f), f) / nf - vertex;
            if q.norm() <= 1e-14 * (1.0 + vertex.abs()) {
                // Vertex itself: lies in every sector.
                continue;
            }
            theta = theta.max(q.arg().abs());
        }
        if theta >= PI - ANGULAR_SLACK {
            wide = true;
            theta = PI;
        }
        let certified_semi_angle = self.certified_sector_angle(vertex);
        Ok(SectorEstimate { vertex, semi_angle: theta, samples, certified_semi_angle, wide })
    }

    /// Smallest `theta <= pi/2` with `sin(theta) H_R -+ cos(theta) H_I` positive semidefinite,
    /// where `H_R`, `H_I` are the Hermitian parts of `B - iota I`.
    pub fn certified_sector_angle(&self, vertex: f64) -> Option<f64> {
        let n = self.dimension;
        let c = &self.dense - CMatrix::identity(n, n) * C64::new(vertex, 0.0);
        let ca = c.adjoint();
        let hr = (&c + &ca) * C64::new(0.5, 0.0);
        let hi = (&c - &ca) * C64::new(0.0, -0.5);
        let slack = 4.0 * f64::EPSILON * linalg::op_norm(&c).max(f64::MIN_POSITIVE);
        let ok = |theta: f64| {
            let (s, co) = theta.sin_cos();
            let plus = &hr * C64::new(s, 0.0) + &hi * C64::new(co, 0.0);
            let minus = &hr * C64::new(s, 0.0) - &hi * C64::new(co, 0.0);
            linalg::hermitian_min_eigenvalue(&plus) >= -slack && linalg::hermitian_min_eigenvalue(&minus) >= -slack
        };
        if !ok(PI / 2.0) {
            return None;
        }
        if ok(0.0) {
            return Some(0.0);
        }
        let (mut lo, mut hi_t) = (0.0, PI / 2.0);
        for _ in 0..60 {
            let mid = 0.5 * (lo + hi_t);
            if ok(mid) {
                hi_t = mid;
            } else {
                lo = mid;
            }
        }
        Some(hi_t)
    }

    /// One unit eigenvector per eigenvalue (smallest right singular vector of `B - mu I`).
    pub fn eigenvectors(&self) -> Vec<CVector> {
        let n = self.dimension;
        self.eigenvalues()
            .into_iter()
            .map(|mu| {
                let shifted = &self.dense - CMatrix::identity(n, n) * mu;
                let (_, _, v) = linalg::svd(&shifted);
                v.column(n - 1).into_owned()
            })
            .collect()
    }
}

/// Similarity `S` with `J_mu^{-1} S = S J_{1/mu}` for a single Jordan block.
fn inverse_block_chain(mu: C64, size: usize) -> CMatrix {
    let j = jordan_matrix(&[JordanBlock { eigenvalue: mu, size }]);
    let j_inv = j.try_inverse().expect("nonzero eigenvalue");
    let nil = &j_inv - CMatrix::identity(size, size) * mu.inv();
    let mut v = CVector::zeros(size);
    v[size - 1] = C64::new(1.0, 0.0);
    // Columns [N^{k-1} v, ..., N v, v], eigenvector first.
    let mut chain = vec![v];
    for _ in 1..size {
        let next = &nil * chain.last().expect("nonempty");
        chain.push(next);
    }
    chain.reverse();
    columns_to_matrix(size, &chain)
}

pub fn load_operator(path: impl AsRef<Path>) -> Result<OperatorSpec> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|source| Error::Io { path: path.display().to_string(), source })?;
    let mut op = OperatorSpec::from_json_str(&text)?;
    if op.label.is_empty() {
        op.label = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    }
    Ok(op)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::c;

    fn diag(values: &[C64]) -> OperatorSpec {
        OperatorSpec::from_dense(CMatrix::from_diagonal(&CVector::from_column_slice(values)), "diag").unwrap()
    }

    fn block2() -> OperatorSpec {
        OperatorSpec::from_jordan(
            vec![JordanBlock { eigenvalue: c(0.5, 0.0), size: 2 }],
            CMatrix::identity(2, 2),
            "J2",
        )
        .unwrap()
    }

    #[test]
    fn json_scalar_round_trip() {
        let op = OperatorSpec::from_json_str(r#"{"dimension": 1, "entries": [[[2.0, 0.0]]]}"#).unwrap();
        assert_eq!(op.dimension, 1);
        assert_eq!(op.dense[(0, 0)], c(2.0, 0.0));
        let again = OperatorSpec::from_json_str(&op.to_json_value().to_string()).unwrap();
        assert_eq!(again.dense, op.dense);
    }

    #[test]
    fn structured_block_is_its_own_dense_form() {
        let op = OperatorSpec::from_json_str(
            r#"{"dimension": 2, "structured": {"blocks": [{"eigenvalue": [0.5, 0.0], "size": 2}],
                "basis": [[[1,0],[0,0]],[[0,0],[1,0]]]}}"#,
        )
        .unwrap();
        let expected = CMatrix::from_row_slice(2, 2, &[c(0.5, 0.0), c(1.0, 0.0), c(0.0, 0.0), c(0.5, 0.0)]);
        assert_eq!(op.dense, expected);
    }

    #[test]
    fn rejects_non_square_and_singular_basis() {
        let e = OperatorSpec::from_json_str(r#"{"dimension": 2, "entries": [[[1,0],[0,0]]]}"#).unwrap_err();
        assert!(matches!(e, Error::NotSquare { .. }));
        let e = OperatorSpec::from_jordan(
            vec![JordanBlock { eigenvalue: c(1.0, 0.0), size: 2 }],
            CMatrix::from_element(2, 2, c(1.0, 0.0)),
            "",
        )
        .unwrap_err();
        assert!(matches!(e, Error::SingularBasis { .. }));
        let e = OperatorSpec::from_json_str("{not json").unwrap_err();
        assert!(matches!(e, Error::Malformed(_)));
    }

    #[test]
    fn structure_mismatch_is_reported() {
        let form = StructuredForm {
            blocks: vec![JordanBlock { eigenvalue: c(1.0, 0.0), size: 1 }],
            basis: CMatrix::identity(1, 1),
        };
        let e = OperatorSpec::with_structure(CMatrix::from_element(1, 1, c(2.0, 0.0)), form, "").unwrap_err();
        assert!(matches!(e, Error::StructureMismatch { .. }));
    }

    #[test]
    fn resolvent_examples() {
        let scalar = diag(&[c(0.5, 0.0)]);
        let x = scalar.resolvent_apply(c(1.0, 0.0), &CVector::from_element(1, c(1.0, 0.0))).unwrap();
        assert!((x[0] - c(2.0, 0.0)).norm() < 1e-14);

        let op = block2();
        let f = CVector::from_vec(vec![c(0.0, 0.0), c(1.0, 0.0)]);
        let x = op.resolvent_apply(c(1.0, 0.0), &f).unwrap();
        assert!((x[0] - c(4.0, 0.0)).norm() < 1e-13 && (x[1] - c(2.0, 0.0)).norm() < 1e-13);

        let y = op.resolvent_apply(c(0.0, 0.0), &f).unwrap();
        assert_eq!(y, f);
    }

    #[test]
    fn resolvent_names_the_pole() {
        let op = diag(&[c(0.5, 0.0), c(0.25, 0.0)]);
        let f = CVector::from_element(2, c(1.0, 0.0));
        match op.resolvent_apply(c(2.0, 0.0), &f) {
            Err(Error::SingularResolvent { pole, .. }) => assert!((pole - c(2.0, 0.0)).norm() < 1e-12),
            other => panic!("expected singular resolvent, got {other:?}"),
        }
    }

    #[test]
    fn singular_value_examples() {
        assert_eq!(diag(&[c(3.0, 0.0), c(1.0, 0.0)]).singular_values(), vec![3.0, 1.0]);
        let shift = OperatorSpec::from_dense(
            CMatrix::from_row_slice(2, 2, &[c(0.0, 0.0), c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)]),
            "",
        )
        .unwrap();
        let s = shift.singular_values();
        assert!((s[0] - 1.0).abs() < 1e-15 && s[1].abs() < 1e-15);
    }

    #[test]
    fn sector_examples() {
        let s = diag(&[c(1.0, 0.0), c(2.0, 0.0)]).estimate_sector(16, None, 1).unwrap();
        assert!(s.semi_angle.abs() < 1e-12);
        assert_eq!(s.certified_semi_angle, Some(0.0));

        let s = diag(&[c(1.0, 1.0), c(1.0, -1.0)]).estimate_sector(64, None, 2).unwrap();
        assert!((s.semi_angle - PI / 4.0).abs() < 1e-12);
        assert!((s.certified_semi_angle.unwrap() - PI / 4.0).abs() < 1e-9);

        let s = diag(&[c(-1.0, 0.0), c(1.0, 0.0)]).estimate_sector(64, None, 3).unwrap();
        assert!(s.wide && s.semi_angle == PI && s.certified_semi_angle.is_none());

        assert!(diag(&[c(1.0, 0.0), c(2.0, 0.0)]).estimate_sector(1, None, 0).is_err());
    }

    #[test]
    fn fredholm_examples() {
        let op = diag(&[c(0.5, 0.0), c(1.0 / 3.0, 0.0)]);
        assert!((op.fredholm_determinant(c(0.0, 0.0)) - c(1.0, 0.0)).norm() < 1e-15);
        assert!((op.fredholm_determinant(c(1.0, 0.0)) - c(1.0 / 3.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn adjoint_of_shift() {
        let shift = OperatorSpec::from_dense(
            CMatrix::from_row_slice(2, 2, &[c(0.0, 0.0), c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)]),
            "",
        )
        .unwrap();
        let g = shift.adjoint_apply(&CVector::from_vec(vec![c(1.0, 0.0), c(0.0, 0.0)]));
        assert_eq!(g, CVector::from_vec(vec![c(0.0, 0.0), c(1.0, 0.0)]));
    }

    #[test]
    fn structured_inverse_keeps_jordan_form() {
        let op = OperatorSpec::from_jordan(
            vec![
                JordanBlock { eigenvalue: c(2.0, 0.5), size: 3 },
                JordanBlock { eigenvalue: c(4.0, 0.0), size: 1 },
            ],
            CMatrix::from_fn(4, 4, |i, j| if i == j { c(2.0, 0.0) } else { c(0.1 * (i + 2 * j) as f64, 0.05) }),
            "W",
        )
        .unwrap();
        let inv = op.inverse().unwrap();
        let product = &inv.dense * &op.dense;
        assert!((product - CMatrix::identity(4, 4)).norm() < 1e-12);
        let form = inv.structured.unwrap();
        assert!((form.blocks[0].eigenvalue - c(2.0, 0.5).inv()).norm() < 1e-15);
        assert_eq!(form.blocks[0].size, 3);
    }

    #[test]
    fn zero_eigenvalue_has_no_inverse() {
        let op = diag(&[c(0.0, 0.0), c(1.0, 0.0)]);
        assert!(matches!(op.inverse(), Err(Error::ZeroEigenvalue { .. })));
    }
}
