//! Abel regularization: the polynomials `P_m`, regularized coefficients and grouping.

use std::sync::OnceLock;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{self, C64, CVector};
use crate::spectral::SpectralDecomposition;

pub const DEFAULT_DEGREE_CAP: usize = 32;

/// `a_{m,p}(alpha)` as integer polynomials in `alpha`, for `m <= DEFAULT_DEGREE_CAP`.
///
/// With `w = t zeta^{-alpha}`, the `m`-th derivative of `exp(-t zeta^{-alpha})`
/// times `exp(t zeta^{-alpha})` is `zeta^{-m} sum_p a_{m,p}(alpha) w^p`, and
/// `a_{j+1,p} = -(p alpha + j) a_{j,p} + alpha a_{j,p-1}`.
type AlphaPoly = Vec<i128>;

fn coefficient_table() -> &'static Vec<Vec<AlphaPoly>> {
    static TABLE: OnceLock<Vec<Vec<AlphaPoly>>> = OnceLock::new();
    TABLE.get_or_init(|| {
        let mut table: Vec<Vec<AlphaPoly>> = vec![vec![vec![1]]];
        for j in 0..DEFAULT_DEGREE_CAP {
            let prev = &table[j];
            let mut next: Vec<AlphaPoly> = vec![vec![0; j + 2]; j + 2];
            for p in 0..=j + 1 {
                let out = &mut next[p];
                if p <= j {
                    // -(p alpha + j) a_{j,p}
                    for (k, &a) in prev[p].iter().enumerate() {
                        out[k] = checked(out[k], a.checked_mul(-(j as i128)));
                        out[k + 1] = checked(out[k + 1], a.checked_mul(-(p as i128)));
                    }
                }
                if p >= 1 {
                    // alpha a_{j,p-1}
                    for (k, &a) in prev[p - 1].iter().enumerate() {
                        out[k + 1] = checked(out[k + 1], Some(a));
                    }
                }
            }
            table.push(next);
        }
        table
    })
}

fn checked(acc: i128, term: Option<i128>) -> i128 {
    term.and_then(|t| acc.checked_add(t)).expect("Abel coefficient overflow below the degree cap")
}

fn eval_alpha_poly(poly: &[i128], alpha: f64) -> f64 {
    poly.iter().rev().fold(0.0, |acc, &c| acc * alpha + c as f64)
}

/// `P^alpha_m(zeta^{-1}, t) = (e^{t zeta^{-alpha}} / m!) d^m/d zeta^m e^{-t zeta^{-alpha}}`.
pub fn eval_abel_polynomial(m: usize, alpha: f64, zeta: C64, t: f64) -> Result<C64> {
    eval_abel_polynomial_capped(m, alpha, zeta, t, DEFAULT_DEGREE_CAP)
}

pub fn eval_abel_polynomial_capped(m: usize, alpha: f64, zeta: C64, t: f64, cap: usize) -> Result<C64> {
    if m > cap.min(DEFAULT_DEGREE_CAP) {
        return Err(Error::DegreeCap { m, cap: cap.min(DEFAULT_DEGREE_CAP) });
    }
    if zeta.norm() == 0.0 {
        return Err(Error::InvalidParameter("zeta must be nonzero".into()));
    }
    if !(alpha > 0.0) || !(t >= 0.0) {
        return Err(Error::InvalidParameter("need alpha > 0 and t >= 0".into()));
    }
    if m == 0 {
        return Ok(C64::new(1.0, 0.0));
    }
    let row = &coefficient_table()[m];
    let w = linalg::principal_pow(zeta, -alpha) * t;
    let mut sum = C64::new(0.0, 0.0);
    for p in (0..=m).rev() {
        sum = sum * w + eval_alpha_poly(&row[p], alpha);
    }
    let factorial: f64 = (1..=m).map(|k| k as f64).product();
    Ok(sum * zeta.powi(-(m as i32)) / factorial)
}

/// Independent check of `P_m`: the m-th Taylor coefficient of `exp(-t z^{-alpha})` at `zeta`
/// from `nodes` equispaced samples on the circle of radius `|zeta|/2`, divided by the value at `zeta`.
/// Spectrally accurate while the circle stays off the branch cut (`|arg zeta| < pi/3` suffices).
pub fn abel_polynomial_by_differences(m: usize, alpha: f64, zeta: C64, t: f64, nodes: usize) -> C64 {
    let g = |z: C64| (-linalg::principal_pow(z, -alpha) * t).exp();
    let r = 0.5 * zeta.norm();
    let mut acc = C64::new(0.0, 0.0);
    for k in 0..nodes {
        let w = C64::from_polar(r, 2.0 * std::f64::consts::PI * k as f64 / nodes as f64);
        acc += g(zeta + w) / w.powi(m as i32);
    }
    acc / nodes as f64 / g(zeta)
}

#[derive(Debug, Clone, PartialEq)]
pub struct RegularizedCoefficients {
    pub t: f64,
    pub alpha: f64,
    pub values: Vec<C64>,
}

/// `c_{q+i}(t) = e^{-lambda_q^alpha t} sum_{m=0}^{k-i} P_m c_{q+i+m}` chain by chain.
pub fn regularized_coefficients(
    decomp: &SpectralDecomposition,
    raw: &[C64],
    t: f64,
    alpha: f64,
) -> Result<RegularizedCoefficients> {
    let total = decomp.total_root_count();
    if raw.len() != total {
        return Err(Error::Misaligned(format!("{} coefficients for {} root vectors", raw.len(), total)));
    }
    if !(t > 0.0) || !(alpha > 0.0) {
        return Err(Error::InvalidParameter("need t > 0 and alpha > 0".into()));
    }
    let mut values = Vec::with_capacity(total);
    let mut at = 0;
    for group in &decomp.groups {
        let damping = (-linalg::principal_pow(group.lambda, alpha) * t).exp();
        for chain in &group.chains {
            let k = chain.len();
            let polys: Vec<C64> = (0..k)
                .map(|m| eval_abel_polynomial(m, alpha, group.mu, t))
                .collect::<Result<_>>()?;
            for i in 0..k {
                let s: C64 = (0..k - i).map(|m| polys[m] * raw[at + i + m]).sum();
                values.push(damping * s);
            }
            at += k;
        }
    }
    Ok(RegularizedCoefficients { t, alpha, values })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundaryGap {
    /// Boundary position `N_nu` (number of groups before it).
    pub index: usize,
    pub gap: f64,
    pub threshold: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SummationSchedule {
    /// `N_0 = 0 < N_1 < ... `, counted in eigenvalue groups.
    pub boundaries: Vec<usize>,
    pub tau: f64,
    pub k: f64,
    pub gaps: Vec<BoundaryGap>,
    /// No interior gap qualified; the whole spectrum is one group.
    pub single_group: bool,
    /// Largest in-group ratio `(|lambda_{j}| - |lambda_{j-1}|) / |lambda_j|^{1-1/tau}`.
    pub in_group_constant: f64,
}

impl SummationSchedule {
    pub fn group_count(&self) -> usize {
        self.boundaries.len().saturating_sub(1)
    }
}

/// Scans consecutive moduli and cuts wherever
/// `|lambda_{q+1}| - |lambda_q| >= K |lambda_{q+1}|^{1 - 1/tau}`.
pub fn schedule_from_moduli(moduli: &[f64], tau: f64, k: f64) -> Result<SummationSchedule> {
    if !(tau > 0.0) || !(k > 0.0) {
        return Err(Error::InvalidParameter("need tau > 0 and K > 0".into()));
    }
    let exponent = 1.0 - 1.0 / tau;
    let mut boundaries = vec![0];
    let mut gaps = Vec::new();
    let mut in_group_constant: f64 = 0.0;
    for q in 1..moduli.len() {
        let gap = moduli[q] - moduli[q - 1];
        let scale = moduli[q].powf(exponent);
        let threshold = k * scale;
        if gap >= threshold {
            boundaries.push(q);
            gaps.push(BoundaryGap { index: q, gap, threshold });
        } else {
            in_group_constant = in_group_constant.max(gap / scale);
        }
    }
    let single_group = moduli.len() > 1 && boundaries.len() == 1;
    if !moduli.is_empty() {
        boundaries.push(moduli.len());
    }
    Ok(SummationSchedule { boundaries, tau, k, gaps, single_group, in_group_constant })
}

pub fn group_schedule(decomp: &SpectralDecomposition, tau: f64, k: f64) -> Result<SummationSchedule> {
    let moduli: Vec<f64> = decomp.groups.iter().map(|g| g.lambda.norm()).collect();
    schedule_from_moduli(&moduli, tau, k)
}

/// Default `tau`: half the governing bound (`mu/2` or `1/(2 alpha)`).
pub fn default_tau(bound: f64) -> f64 {
    0.5 * bound
}

/// Default `K = 0.5 min(1, |lambda_2| - |lambda_1|)`, using the first positive gap.
pub fn default_k(moduli: &[f64]) -> f64 {
    let lead = moduli.windows(2).map(|w| w[1] - w[0]).find(|g| *g > 0.0);
    0.5 * lead.map_or(1.0, |g| g.min(1.0))
}

#[derive(Debug, Clone, PartialEq)]
pub struct GroupedSums {
    pub group_vectors: Vec<CVector>,
    pub group_norms: Vec<f64>,
    pub total: CVector,
}

/// `sum_xi sum_i e_{q_xi+i} c_{q_xi+i}(t)` for a single eigenvalue group.
pub fn eigen_group_sum(decomp: &SpectralDecomposition, coeffs: &[C64], group: usize) -> Result<CVector> {
    let ranges = decomp.group_ranges();
    let range = ranges
        .get(group)
        .ok_or_else(|| Error::InvalidParameter(format!("group {group} out of range")))?
        .clone();
    if coeffs.len() != decomp.total_root_count() {
        return Err(Error::Misaligned(format!("{} coefficients", coeffs.len())));
    }
    let e = decomp.flat_e();
    let mut out = CVector::zeros(decomp.dimension);
    for n in range {
        out.axpy(coeffs[n], e[n], C64::new(1.0, 0.0));
    }
    Ok(out)
}

pub fn grouped_partial_sums(
    decomp: &SpectralDecomposition,
    coeffs: &RegularizedCoefficients,
    schedule: &SummationSchedule,
) -> Result<GroupedSums> {
    let q = decomp.groups.len();
    if schedule.boundaries.last().copied().unwrap_or(0) > q
        || schedule.boundaries.windows(2).any(|w| w[0] >= w[1])
    {
        return Err(Error::Misaligned(format!("schedule {:?} for {q} groups", schedule.boundaries)));
    }
    let per_group: Vec<CVector> =
        (0..q).map(|g| eigen_group_sum(decomp, &coeffs.values, g)).collect::<Result<_>>()?;
    let mut group_vectors = Vec::with_capacity(schedule.group_count());
    for w in schedule.boundaries.windows(2) {
        let mut v = CVector::zeros(decomp.dimension);
        for g in &per_group[w[0]..w[1]] {
            v += g;
        }
        group_vectors.push(v);
    }
    let group_norms = group_vectors.iter().map(|v| v.norm()).collect();
    let mut total = CVector::zeros(decomp.dimension);
    for v in &group_vectors {
        total += v;
    }
    Ok(GroupedSums { group_vectors, group_norms, total })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::c;
    use crate::operator::{JordanBlock, OperatorSpec};
    use crate::spectral::{DEFAULT_RANK_TOLERANCE, full_decomposition, raw_coefficients};
    use nalgebra::DMatrix;

    #[test]
    fn degree_zero_and_zero_time() {
        let z = c(0.7, 0.3);
        assert_eq!(eval_abel_polynomial(0, 1.5, z, 2.0).unwrap(), c(1.0, 0.0));
        for m in 1..6 {
            assert_eq!(eval_abel_polynomial(m, 1.5, z, 0.0).unwrap(), c(0.0, 0.0));
        }
    }

    #[test]
    fn degree_one_closed_form() {
        let (alpha, z, t) = (1.7, c(0.4, -0.2), 0.9);
        let expected = linalg::principal_pow(z, -alpha - 1.0) * (t * alpha);
        assert!((eval_abel_polynomial(1, alpha, z, t).unwrap() - expected).norm() < 1e-13 * expected.norm());
    }

    #[test]
    fn degree_cap_and_zero_argument() {
        assert!(matches!(eval_abel_polynomial(33, 1.0, c(1.0, 0.0), 1.0), Err(Error::DegreeCap { .. })));
        assert!(matches!(eval_abel_polynomial_capped(5, 1.0, c(1.0, 0.0), 1.0, 4), Err(Error::DegreeCap { .. })));
        assert!(eval_abel_polynomial(1, 1.0, c(0.0, 0.0), 1.0).is_err());
        // Top of the table is representable.
        assert!(eval_abel_polynomial(32, 2.0, c(1.0, 0.0), 0.5).unwrap().norm().is_finite());
    }

    #[test]
    fn alpha_one_matches_closed_form_derivative() {
        // alpha = 1: e^{t/z} d^2/dz^2 e^{-t/z} = t^2/z^4 - 2t/z^3.
        let (z, t) = (c(0.8, 0.1), 0.6);
        let exact = (z.powi(-4) * t * t - z.powi(-3) * 2.0 * t) / 2.0;
        assert!((eval_abel_polynomial(2, 1.0, z, t).unwrap() - exact).norm() < 1e-13);
    }

    #[test]
    fn schedule_examples() {
        let s = schedule_from_moduli(&[], 0.5, 0.1).unwrap();
        assert_eq!(s.boundaries, vec![0]);
        let s = schedule_from_moduli(&[1.0, 2.0, 4.0, 8.0], 0.5, 0.1).unwrap();
        assert_eq!(s.boundaries, vec![0, 1, 2, 3, 4]);
        let s = schedule_from_moduli(&[1.0, 1.01, 5.0], 0.5, 0.5).unwrap();
        assert_eq!(s.boundaries, vec![0, 2, 3]);
        assert!(!s.single_group);
        for g in &s.gaps {
            assert!(g.gap >= g.threshold);
        }
        let s = schedule_from_moduli(&[1.0, 1.01], 0.5, 0.5).unwrap();
        assert!(s.single_group);
        assert_eq!(s.boundaries, vec![0, 2]);
    }

    #[test]
    fn diagonal_coefficients_are_damped() {
        let op = OperatorSpec::from_dense(
            DMatrix::from_diagonal(&CVector::from_vec(vec![c(0.5, 0.0), c(0.25, 0.1)])),
            "",
        )
        .unwrap();
        let d = full_decomposition(&op, DEFAULT_RANK_TOLERANCE).unwrap();
        let f = CVector::from_vec(vec![c(1.0, 2.0), c(-0.5, 0.3)]);
        let raw = raw_coefficients(&d, &f).unwrap();
        let reg = regularized_coefficients(&d, &raw, 0.3, 1.5).unwrap();
        for (q, g) in d.groups.iter().enumerate() {
            let expected = (-linalg::principal_pow(g.lambda, 1.5) * 0.3).exp() * raw[q];
            assert!((reg.values[q] - expected).norm() < 1e-14);
        }
    }

    #[test]
    fn two_chain_uses_first_polynomial() {
        let op = OperatorSpec::from_jordan(
            vec![JordanBlock { eigenvalue: c(0.5, 0.0), size: 2 }],
            DMatrix::identity(2, 2),
            "",
        )
        .unwrap();
        let d = full_decomposition(&op, DEFAULT_RANK_TOLERANCE).unwrap();
        let raw = vec![c(1.0, 0.0), c(2.0, 0.0)];
        let (t, alpha) = (0.4, 2.0);
        let reg = regularized_coefficients(&d, &raw, t, alpha).unwrap();
        let lambda: f64 = 2.0;
        let expected = (-lambda.powf(alpha) * t).exp() * (1.0 + t * alpha * lambda.powf(alpha + 1.0) * 2.0);
        assert!((reg.values[0] - c(expected, 0.0)).norm() < 1e-12 * expected.abs());
        assert!(matches!(regularized_coefficients(&d, &raw[..1], t, alpha), Err(Error::Misaligned(_))));
    }

    #[test]
    fn grouped_sums_rejects_oversized_schedule() {
        let op = OperatorSpec::from_dense(DMatrix::from_element(1, 1, c(0.5, 0.0)), "").unwrap();
        let d = full_decomposition(&op, DEFAULT_RANK_TOLERANCE).unwrap();
        let reg = regularized_coefficients(&d, &[c(1.0, 0.0)], 1.0, 1.0).unwrap();
        let bad = schedule_from_moduli(&[1.0, 2.0], 0.5, 0.1).unwrap();
        assert!(grouped_partial_sums(&d, &reg, &bad).is_err());
        let ok = group_schedule(&d, 0.5, 0.1).unwrap();
        let sums = grouped_partial_sums(&d, &reg, &ok).unwrap();
        assert!((sums.total[0] - c((-2.0f64).exp(), 0.0)).norm() < 1e-15);
    }
}
