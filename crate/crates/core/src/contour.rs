//! Contours around the spectrum and quadrature of the resolvent functional
//! `(1/2 pi i) \int e^{-lambda^alpha t} B (I - lambda B)^{-1} f d lambda`.
//!
//! Traversal: the lower ray inward, the arc `|lambda| = r` counterclockwise,
//! the upper ray outward. This runs clockwise around the characteristic numbers,
//! so the integral equals the sum of the group sums while a counterclockwise
//! residue circle returns the negative of a group sum.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{self, C64, CVector};
use crate::operator::{OperatorSpec, SectorEstimate};
use crate::quadrature::{self, QuadOptions};
use crate::spectral::SpectralDecomposition;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ContourKind {
    /// Sector contour around the characteristic numbers of `B`.
    GammaB,
    /// Power-type contour `Fr{(L_0(theta_0+eps) & L_iota(theta_iota+eps)) \ C_r}`.
    GammaA,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ContourSpec {
    pub kind: ContourKind,
    /// Arc radius.
    pub r: f64,
    /// Semi-angle `theta` (for `GammaA`, `theta_0` of the operator).
    pub theta: f64,
    pub epsilon: f64,
    /// Vertex `iota < 0` and its semi-angle (`GammaA` only).
    pub vertex: Option<f64>,
    pub theta_vertex: Option<f64>,
    /// Modulus of `lambda` where the rays are cut.
    pub r_max: f64,
    pub orientation: &'static str,
    /// Initial panels per segment.
    pub panels: usize,
    pub tolerance: f64,
    pub t: f64,
    pub alpha: f64,
    /// Bound on the neglected ray tails per unit `||f||`.
    pub tail_per_unit: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Segment {
    Line { from: C64, to: C64 },
    /// `radius * e^{i phi}` for `phi` from `from` to `to`.
    Arc { radius: f64, from: f64, to: f64 },
}

#[derive(Debug, Clone, Copy, Default)]
pub struct ContourOptions {
    pub epsilon: Option<f64>,
    pub r: Option<f64>,
    pub r_max: Option<f64>,
}

/// Upper bound of `int_x^inf e^{-a s^alpha} ds` through `Gamma(1/alpha, a x^alpha)`.
pub fn ray_tail_integral(a: f64, alpha: f64, x: f64) -> f64 {
    if !(a > 0.0) {
        return f64::INFINITY;
    }
    let s = 1.0 / alpha;
    let y = a * x.max(0.0).powf(alpha);
    let upper_gamma = if s <= 1.0 {
        if y <= 0.0 {
            return libm::tgamma(s) * s * a.powf(-s);
        }
        y.powf(s - 1.0) * (-y).exp()
    } else if y > 2.0 * (s - 1.0) {
        2.0 * y.powf(s - 1.0) * (-y).exp()
    } else {
        libm::tgamma(s)
    };
    s * a.powf(-s) * upper_gamma.min(libm::tgamma(s))
}

impl ContourSpec {
    fn phi0(&self) -> f64 {
        self.theta + self.epsilon
    }

    fn phi_vertex(&self) -> Option<f64> {
        self.theta_vertex.map(|t| t + self.epsilon)
    }

    /// Distance along the `L_0` ray where it meets the `L_iota` ray, if it does.
    fn corner(&self) -> Option<f64> {
        let (iota, phi_i) = (self.vertex?, self.phi_vertex()?);
        let phi0 = self.phi0();
        if phi_i >= phi0 {
            return None;
        }
        Some(iota.abs() * phi_i.sin() / (phi0 - phi_i).sin())
    }

    /// Parameter `v` on the `L_iota` ray with `|iota + v e^{i phi}| = radius`.
    fn vertex_ray_parameter(iota: f64, phi: f64, radius: f64) -> f64 {
        -iota * phi.cos() + (radius * radius - iota * iota * phi.sin().powi(2)).max(0.0).sqrt()
    }

    /// Segments in traversal order; corners are segment ends.
    pub fn segments(&self) -> Vec<Segment> {
        let phi0 = self.phi0();
        let up = |phi: f64, rho: f64| C64::from_polar(rho, phi);
        match (self.kind, self.corner()) {
            (ContourKind::GammaA, Some(u_star)) => {
                let iota = self.vertex.expect("vertex");
                let phi_i = self.phi_vertex().expect("vertex angle");
                let v_end = Self::vertex_ray_parameter(iota, phi_i, self.r_max);
                let on_vertex_ray = |v: f64, sign: f64| C64::new(iota, 0.0) + C64::from_polar(v, sign * phi_i);
                if self.r < u_star {
                    let v_star = Self::vertex_ray_parameter(iota, phi_i, u_star);
                    vec![
                        Segment::Line { from: on_vertex_ray(v_end, -1.0), to: on_vertex_ray(v_star, -1.0) },
                        Segment::Line { from: up(-phi0, u_star), to: up(-phi0, self.r) },
                        Segment::Arc { radius: self.r, from: -phi0, to: phi0 },
                        Segment::Line { from: up(phi0, self.r), to: up(phi0, u_star) },
                        Segment::Line { from: on_vertex_ray(v_star, 1.0), to: on_vertex_ray(v_end, 1.0) },
                    ]
                } else {
                    let v_r = Self::vertex_ray_parameter(iota, phi_i, self.r);
                    let psi = on_vertex_ray(v_r, 1.0).arg();
                    vec![
                        Segment::Line { from: on_vertex_ray(v_end, -1.0), to: on_vertex_ray(v_r, -1.0) },
                        Segment::Arc { radius: self.r, from: -psi, to: psi },
                        Segment::Line { from: on_vertex_ray(v_r, 1.0), to: on_vertex_ray(v_end, 1.0) },
                    ]
                }
            }
            _ => vec![
                Segment::Line { from: up(-phi0, self.r_max), to: up(-phi0, self.r) },
                Segment::Arc { radius: self.r, from: -phi0, to: phi0 },
                Segment::Line { from: up(phi0, self.r), to: up(phi0, self.r_max) },
            ],
        }
    }

    /// Bound on `(1/2 pi) int_{|lambda| > R} ||e^{-lambda^alpha t} B (I - lambda B)^{-1}|| |d lambda|`.
    fn tail_bound_at(&self, r_max: f64) -> f64 {
        let spec = ContourSpec { r_max, ..self.clone() };
        let m = 1.0 / self.epsilon.sin();
        match (self.kind, spec.corner()) {
            (ContourKind::GammaA, Some(_)) => {
                let iota = self.vertex.expect("vertex");
                let phi_i = spec.phi_vertex().expect("vertex angle");
                let v = Self::vertex_ray_parameter(iota, phi_i, r_max);
                let point = C64::new(iota, 0.0) + C64::from_polar(v, phi_i);
                let c = (self.alpha * point.arg()).cos();
                if v <= iota.abs() || c <= 0.0 {
                    return f64::INFINITY;
                }
                // ||A (I - lambda A)^{-1}|| = ||(W - lambda)^{-1}|| <= 1 / (|lambda - iota| sin eps).
                (1.0 / PI) * (m / v) * ray_tail_integral(self.t * c, self.alpha, v - iota.abs())
            }
            _ => {
                let c = (self.alpha * self.phi0()).cos();
                if c <= 0.0 {
                    return f64::INFINITY;
                }
                (1.0 / PI) * ((m + 1.0) / r_max) * ray_tail_integral(self.t * c, self.alpha, r_max)
            }
        }
    }

    pub fn tail_bound(&self) -> f64 {
        self.tail_bound_at(self.r_max)
    }

    pub fn to_json_value(&self) -> serde_json::Value {
        serde_json::to_value(self).expect("contour JSON is always representable")
    }
}

fn min_characteristic_modulus(op: &OperatorSpec) -> Option<(f64, f64)> {
    let moduli: Vec<f64> = op.characteristic_numbers().iter().map(|l| l.norm()).collect();
    if moduli.is_empty() {
        return None;
    }
    let lo = moduli.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = moduli.iter().copied().fold(0.0, f64::max);
    Some((lo, hi))
}

pub fn build_contour(
    kind: ContourKind,
    op: &OperatorSpec,
    sector: &SectorEstimate,
    t: f64,
    alpha: f64,
    tolerance: f64,
) -> Result<ContourSpec> {
    build_contour_with(kind, op, sector, t, alpha, tolerance, ContourOptions::default())
}

/// Builds `gamma(B)` (sector of `op` at vertex 0) or `Gamma(A)` (`sector` is the
/// numerical-range sector of `A^{-1}` at a negative vertex; `theta_0` is measured here).
pub fn build_contour_with(
    kind: ContourKind,
    op: &OperatorSpec,
    sector: &SectorEstimate,
    t: f64,
    alpha: f64,
    tolerance: f64,
    opts: ContourOptions,
) -> Result<ContourSpec> {
    if !(t > 0.0) || !(alpha > 0.0) || !(tolerance > 0.0) {
        return Err(Error::InvalidParameter("need t > 0, alpha > 0 and tolerance > 0".into()));
    }
    let limit = PI / (2.0 * alpha);
    let (lo, hi) = min_characteristic_modulus(op).unwrap_or((2.0, 2.0));
    if !(lo > 1e-12) {
        return Err(Error::Contour("no admissible arc radius: characteristic number at the origin".into()));
    }
    let r = opts.r.unwrap_or(0.5 * lo);
    if !(r > 0.0 && r < lo) {
        return Err(Error::Contour(format!("arc radius {r} must lie in (0, {lo})")));
    }
    let (theta, vertex, theta_vertex, decay_angle) = match kind {
        ContourKind::GammaB => {
            if sector.vertex != 0.0 {
                return Err(Error::Contour("gamma(B) needs a sector with vertex 0".into()));
            }
            let theta = sector
                .certified_semi_angle
                .map(|c| c.max(sector.semi_angle))
                .ok_or_else(|| Error::Contour("numerical range is not in a half-plane".into()))?;
            (theta, None, None, theta)
        }
        ContourKind::GammaA => {
            if !(sector.vertex < 0.0) {
                return Err(Error::Contour("Gamma(A) needs a negative vertex".into()));
            }
            let theta0 = op
                .certified_sector_angle(0.0)
                .ok_or_else(|| Error::Contour("operator is not accretive".into()))?;
            let theta_i = sector.bounding_angle();
            if sector.wide || theta_i >= PI / 2.0 {
                return Err(Error::Contour("vertex sector is not narrower than a half-plane".into()));
            }
            (theta0, Some(sector.vertex), Some(theta_i), theta_i.min(theta0))
        }
    };
    if decay_angle >= limit {
        return Err(Error::Contour(format!(
            "sector semi-angle {decay_angle:.6} is not below pi/(2 alpha) = {limit:.6}"
        )));
    }
    let epsilon = match opts.epsilon {
        Some(e) => e,
        None => {
            let mut e = 0.5 * (limit - decay_angle);
            e = e.min(0.5 * (PI - theta));
            if kind == ContourKind::GammaA {
                e = e.min(0.5 * (PI / 2.0 - theta));
            }
            e.min(PI / 4.0)
        }
    };
    if !(epsilon > 0.0) || decay_angle + epsilon >= limit || theta + epsilon >= PI {
        return Err(Error::Contour(format!("opening epsilon = {epsilon} leaves no decaying ray")));
    }
    let mut spec = ContourSpec {
        kind,
        r,
        theta,
        epsilon,
        vertex,
        theta_vertex,
        r_max: 0.0,
        orientation: "clockwise about the characteristic numbers (lower ray inward, arc counterclockwise, upper ray outward)",
        panels: 8,
        tolerance,
        t,
        alpha,
        tail_per_unit: 0.0,
    };
    let floor = (2.0 * hi).max(4.0 * r).max(vertex.map_or(0.0, |i| 4.0 * i.abs()));
    let r_max = match opts.r_max {
        Some(rm) => rm,
        None => {
            let mut hi_r = floor;
            let mut steps = 0;
            while spec.tail_bound_at(hi_r) > tolerance {
                hi_r *= 2.0;
                steps += 1;
                if steps > 200 {
                    return Err(Error::Contour("ray tail does not decay".into()));
                }
            }
            let mut lo_r = if hi_r > floor { 0.5 * hi_r } else { hi_r };
            for _ in 0..60 {
                if hi_r - lo_r <= 1e-6 * hi_r {
                    break;
                }
                let mid = 0.5 * (lo_r + hi_r);
                if mid >= floor && spec.tail_bound_at(mid) <= tolerance {
                    hi_r = mid;
                } else {
                    lo_r = mid;
                }
            }
            hi_r
        }
    };
    if r_max <= hi || (kind == ContourKind::GammaA && vertex.is_some_and(|i| r_max <= i.abs())) {
        return Err(Error::Contour(format!("r_max = {r_max} does not enclose the spectrum")));
    }
    spec.r_max = r_max;
    spec.tail_per_unit = spec.tail_bound();
    Ok(spec)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TracePoint {
    pub segment: usize,
    pub lambda: [f64; 2],
    pub integrand_norm: f64,
}

#[derive(Debug, Clone)]
pub struct QuadratureResult {
    pub value: CVector,
    pub panel_error_estimate: f64,
    pub panels_used: usize,
    pub truncation_bound: f64,
    pub trace: Vec<TracePoint>,
}

/// Panel edges along a line, geometric in the distance from its end nearer the origin.
fn line_breakpoints(from: C64, to: C64, panels: usize) -> Vec<f64> {
    let length = (to - from).norm();
    let inward = from.norm() > to.norm();
    let inner = if inward { to.norm() } else { from.norm() };
    let base = inner.max(length / 1024.0).max(1e-12);
    let mut d = vec![0.0];
    let mut step = base / panels as f64;
    while d.last().expect("nonempty") + step < length {
        let next = d.last().expect("nonempty") + step;
        d.push(next);
        if next >= base {
            step *= 2.0;
        }
    }
    d.push(length);
    if inward {
        d.iter().rev().map(|x| length - x).collect()
    } else {
        d
    }
}

/// `(1/2 pi i) \int_contour e^{-lambda^alpha t} B (I - lambda B)^{-1} f d lambda`.
pub fn integrate_resolvent_functional(
    op: &OperatorSpec,
    f: &CVector,
    t: f64,
    alpha: f64,
    contour: &ContourSpec,
) -> Result<QuadratureResult> {
    if f.len() != op.dimension {
        return Err(Error::DimensionMismatch { expected: op.dimension, got: f.len() });
    }
    if !(t > 0.0) {
        return Err(Error::InvalidParameter("t must be positive".into()));
    }
    let fnorm = f.norm();
    let n = op.dimension;
    if fnorm == 0.0 {
        return Ok(QuadratureResult {
            value: CVector::zeros(n),
            panel_error_estimate: 0.0,
            panels_used: 0,
            truncation_bound: 0.0,
            trace: Vec::new(),
        });
    }
    let kernel = |lambda: C64| -> Result<CVector> {
        let x = op.resolvent_apply(lambda, f)?;
        let damping = (-linalg::principal_pow(lambda, alpha) * t).exp();
        Ok(op.apply(&x) * damping)
    };
    let segments = contour.segments();
    let tol = contour.tolerance * fnorm / segments.len() as f64;
    let opts = QuadOptions { abs_tol: tol, rel_tol: 0.0, max_panels: 20_000 };
    let mut value = CVector::zeros(n);
    let mut error = 0.0;
    let mut panels_used = 0;
    let mut trace = Vec::new();
    for (si, seg) in segments.iter().enumerate() {
        let (outcome, point_at): (_, Box<dyn Fn(f64) -> C64>) = match *seg {
            Segment::Line { from, to } => {
                let length = (to - from).norm();
                let dir = (to - from) / length;
                let g = move |s: f64| kernel(from + dir * s).map(|v| v * dir);
                let bp = line_breakpoints(from, to, contour.panels);
                (quadrature::integrate(&g, &bp, n, opts)?, Box::new(move |s| from + dir * s))
            }
            Segment::Arc { radius, from, to } => {
                let g = move |phi: f64| {
                    let lambda = C64::from_polar(radius, phi);
                    kernel(lambda).map(|v| v * (lambda * C64::new(0.0, 1.0)))
                };
                let bp: Vec<f64> =
                    (0..=contour.panels).map(|k| from + (to - from) * k as f64 / contour.panels as f64).collect();
                (quadrature::integrate(&g, &bp, n, opts)?, Box::new(move |phi| C64::from_polar(radius, phi)))
            }
        };
        value += &outcome.value;
        error += outcome.error;
        panels_used += outcome.panels.len();
        for p in &outcome.panels {
            let mid = point_at(0.5 * (p.a + p.b));
            let speed = match *seg {
                Segment::Line { .. } => 1.0,
                Segment::Arc { radius, .. } => radius,
            };
            trace.push(TracePoint {
                segment: si,
                lambda: [mid.re, mid.im],
                integrand_norm: p.value.norm() / ((p.b - p.a).abs() * speed),
            });
        }
    }
    let scale = C64::new(0.0, -1.0 / (2.0 * PI));
    Ok(QuadratureResult {
        value: value * scale,
        panel_error_estimate: error / (2.0 * PI),
        panels_used,
        truncation_bound: contour.tail_per_unit * fnorm,
        trace,
    })
}

/// Counterclockwise circle integral of the resolvent functional around `lambda_q`;
/// equals minus the group sum of that eigenvalue group.
pub fn residue_at_pole(
    op: &OperatorSpec,
    f: &CVector,
    t: f64,
    alpha: f64,
    decomp: &SpectralDecomposition,
    group: usize,
    radius: f64,
) -> Result<CVector> {
    let g = decomp
        .groups
        .get(group)
        .ok_or_else(|| Error::InvalidParameter(format!("group {group} out of range")))?;
    let center = g.lambda;
    if !(radius > 0.0) {
        return Err(Error::InvalidParameter("radius must be positive".into()));
    }
    for (i, other) in decomp.groups.iter().enumerate() {
        if i != group && (other.lambda - center).norm() < 1.05 * radius {
            return Err(Error::ForeignEigenvalue { center, radius, foreign: other.lambda });
        }
    }
    if center.im.abs() < radius && center.re - (radius * radius - center.im * center.im).sqrt() <= 0.0 {
        return Err(Error::Contour("residue circle crosses the branch cut of lambda^alpha".into()));
    }
    let kernel = |lambda: C64| -> Result<CVector> {
        let x = op.resolvent_apply(lambda, f)?;
        let damping = (-linalg::principal_pow(lambda, alpha) * t).exp();
        Ok(op.apply(&x) * damping)
    };
    Ok(quadrature::circle_integral(&kernel, center, radius, op.dimension, 1e-13, 1 << 16)?.value)
}

/// Largest radius below which the circle around `lambda_q` is isolated and avoids the cut.
pub fn residue_radius(decomp: &SpectralDecomposition, group: usize) -> f64 {
    let center = decomp.groups[group].lambda;
    let gap = decomp
        .groups
        .iter()
        .enumerate()
        .filter(|(i, _)| *i != group)
        .map(|(_, g)| (g.lambda - center).norm())
        .fold(f64::INFINITY, f64::min);
    (0.4 * gap).min(0.5 * center.norm())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BoundKind {
    /// `||(I - lambda B)^{-1}|| <= 1/sin(psi)` on the ray `arg lambda = angle`,
    /// `psi` the angle between the ray and the sector `L_0(theta)`.
    RayL6 { angle: f64, theta: f64 },
    /// `||(I - lambda A)^{-1}||` on the frontier of `L_0(theta_0+eps) & L_iota(theta_iota+eps)`:
    /// `1/sin(eps)` on the `L_0` part, `1 + |lambda|/(|lambda - iota| sin eps)` on the `L_iota` part.
    SectorL9 { iota: f64, theta0: f64, theta_iota: f64, epsilon: f64, r_max: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BoundCheck {
    pub max_violation: f64,
    pub satisfied: bool,
    pub witness: [f64; 2],
    pub probes: usize,
}

const BOUND_SLACK: f64 = 1e-12;

fn log_space(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![lo];
    }
    (0..n).map(|k| lo * (hi / lo).powf(k as f64 / (n - 1) as f64)).collect()
}

/// Samples the locus, computes resolvent norms and compares them with the bound.
pub fn verify_resolvent_bound(op: &OperatorSpec, kind: BoundKind, probes: usize) -> Result<BoundCheck> {
    if probes == 0 {
        return Err(Error::InvalidParameter("probes must be positive".into()));
    }
    let (lo, hi) = min_characteristic_modulus(op).unwrap_or((1.0, 1.0));
    let points: Vec<(C64, f64)> = match kind {
        BoundKind::RayL6 { angle, theta } => {
            let psi = (angle.abs() - theta).min(PI);
            if !(psi > 0.0) {
                return Err(Error::InvalidParameter("ray lies inside the sector".into()));
            }
            let bound = 1.0 / psi.sin();
            log_space(1e-2 * lo, 1e2 * hi, probes)
                .into_iter()
                .map(|rho| (C64::from_polar(rho, angle), bound))
                .collect()
        }
        BoundKind::SectorL9 { iota, theta0, theta_iota, epsilon, r_max } => {
            let spec = ContourSpec {
                kind: ContourKind::GammaA,
                r: 0.0,
                theta: theta0,
                epsilon,
                vertex: Some(iota),
                theta_vertex: Some(theta_iota),
                r_max,
                orientation: "",
                panels: 1,
                tolerance: 0.0,
                t: 1.0,
                alpha: 1.0,
                tail_per_unit: 0.0,
            };
            let phi0 = theta0 + epsilon;
            let corner = spec.corner();
            let per_side = probes.div_ceil(2);
            let radii = log_space(1e-3 * lo.min(1.0), r_max, per_side);
            let mut pts = Vec::with_capacity(2 * per_side);
            for sign in [-1.0, 1.0] {
                for &rho in &radii {
                    let on_l0 = corner.is_none_or(|u| rho <= u);
                    if on_l0 {
                        pts.push((C64::from_polar(rho, sign * phi0), 1.0 / epsilon.sin()));
                    } else {
                        let phi_i = theta_iota + epsilon;
                        let v = ContourSpec::vertex_ray_parameter(iota, phi_i, rho);
                        let lambda = C64::new(iota, 0.0) + C64::from_polar(v, sign * phi_i);
                        let bound = 1.0 + lambda.norm() / ((lambda - iota).norm() * epsilon.sin());
                        pts.push((lambda, bound));
                    }
                }
            }
            pts.truncate(probes);
            pts
        }
    };
    let results: Vec<(f64, C64)> = points
        .par_iter()
        .map(|&(lambda, bound)| {
            let norm = op.resolvent_norm(lambda);
            if !norm.is_finite() {
                return Err(Error::SingularResolvent { lambda, pole: lambda });
            }
            Ok((norm - bound, lambda))
        })
        .collect::<Result<_>>()?;
    let (max_violation, witness) = results
        .iter()
        .copied()
        .fold((f64::NEG_INFINITY, C64::new(0.0, 0.0)), |acc, x| if x.0 > acc.0 { x } else { acc });
    Ok(BoundCheck {
        max_violation,
        satisfied: max_violation <= BOUND_SLACK,
        witness: [witness.re, witness.im],
        probes: points.len(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::c;
    use crate::spectral::{DEFAULT_RANK_TOLERANCE, full_decomposition};
    use nalgebra::DMatrix;

    fn scalar(b: f64) -> OperatorSpec {
        OperatorSpec::from_dense(DMatrix::from_element(1, 1, c(b, 0.0)), "").unwrap()
    }

    #[test]
    fn scalar_contour_geometry() {
        let op = scalar(0.5);
        let sector = op.estimate_sector(4, None, 0).unwrap();
        let spec = build_contour(ContourKind::GammaB, &op, &sector, 1.0, 2.0, 1e-12).unwrap();
        assert!((spec.r - 1.0).abs() < 1e-15);
        assert!(spec.theta.abs() < 1e-12);
        assert!(spec.r_max > 2.0);
        assert!(spec.tail_bound() <= 1e-12);
    }

    #[test]
    fn truncation_solves_the_decay_inequality() {
        let op = scalar(0.5);
        let sector = op.estimate_sector(4, None, 0).unwrap();
        let opts = ContourOptions { epsilon: Some(0.1), ..Default::default() };
        let spec = build_contour_with(ContourKind::GammaB, &op, &sector, 1.0, 2.0, 1e-12, opts).unwrap();
        // alpha = 2: Gamma(1/2, y) <= y^{-1/2} e^{-y}, so the bound is (M+1) e^{-aR^2} / (2 pi a R^2).
        let a = (0.2f64).cos();
        let m = 1.0 / (0.1f64).sin();
        let closed = (m + 1.0) * (-a * spec.r_max.powi(2)).exp() / (2.0 * PI * a * spec.r_max.powi(2));
        assert!(closed <= 1e-12);
        assert!((closed - spec.tail_bound()).abs() <= 1e-12 * closed);
        assert!(spec.tail_bound_at(0.9 * spec.r_max) > 1e-12);
    }

    #[test]
    fn scalar_integral_is_exponential() {
        let op = scalar(0.5);
        let sector = op.estimate_sector(4, None, 0).unwrap();
        let spec = build_contour(ContourKind::GammaB, &op, &sector, 1.0, 1.0, 1e-12).unwrap();
        let f = CVector::from_element(1, c(1.0, 0.0));
        let out = integrate_resolvent_functional(&op, &f, 1.0, 1.0, &spec).unwrap();
        assert!((out.value[0] - c((-2.0f64).exp(), 0.0)).norm() < 1e-10, "{}", out.value[0]);
        assert!(out.panel_error_estimate >= 0.0 && out.truncation_bound >= 0.0);
    }

    #[test]
    fn scalar_residue() {
        let op = scalar(0.5);
        let d = full_decomposition(&op, DEFAULT_RANK_TOLERANCE).unwrap();
        let f = CVector::from_element(1, c(1.0, 0.0));
        let res = residue_at_pole(&op, &f, 1.0, 1.5, &d, 0, 0.5).unwrap();
        let expected = -(-(2.0f64).powf(1.5)).exp();
        assert!((res[0] - c(expected, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn too_wide_sector_is_rejected() {
        let op = OperatorSpec::from_dense(
            DMatrix::from_diagonal(&CVector::from_vec(vec![c(1.0, 1.0), c(1.0, -1.0)])),
            "",
        )
        .unwrap();
        let sector = op.estimate_sector(8, None, 0).unwrap();
        assert!(build_contour(ContourKind::GammaB, &op, &sector, 1.0, 2.0, 1e-10).is_err());
        assert!(build_contour(ContourKind::GammaB, &op, &sector, 1.0, 1.5, 1e-10).is_ok());
    }

    #[test]
    fn gamma_a_rays_pass_through_the_vertex() {
        let w = OperatorSpec::from_dense(
            DMatrix::from_diagonal(&CVector::from_vec(vec![c(1.0, 0.6), c(3.0, -0.5)])),
            "",
        )
        .unwrap();
        let a = w.inverse().unwrap();
        let mut sector = w.estimate_sector(16, Some(-1.0), 0).unwrap();
        assert!(sector.bounding_angle() < 0.3);
        sector.semi_angle = 0.3;
        sector.certified_semi_angle = Some(0.3);
        let spec = build_contour(ContourKind::GammaA, &a, &sector, 1.0, 2.0, 1e-10).unwrap();
        let segs = spec.segments();
        assert_eq!(segs.len(), 5);
        if let Segment::Line { from, to } = segs[4] {
            let cross = ((from - c(-1.0, 0.0)) * (to - c(-1.0, 0.0)).conj()).im;
            assert!(cross.abs() < 1e-9 * to.norm() * from.norm());
        } else {
            panic!("last segment is a ray");
        }
    }

    #[test]
    fn ray_bound_scalar_and_diagonal() {
        let op = scalar(1.0);
        let chk = verify_resolvent_bound(&op, BoundKind::RayL6 { angle: PI / 2.0, theta: 0.0 }, 64).unwrap();
        assert!(chk.satisfied);
        let op = OperatorSpec::from_dense(
            DMatrix::from_diagonal(&CVector::from_vec(vec![c(1.0, 0.0), c(2.0, 0.0)])),
            "",
        )
        .unwrap();
        let chk = verify_resolvent_bound(&op, BoundKind::RayL6 { angle: 3.0 * PI / 4.0, theta: 0.0 }, 64).unwrap();
        assert!(chk.satisfied && chk.max_violation < 0.0);
        let chk = verify_resolvent_bound(&op, BoundKind::RayL6 { angle: PI, theta: 0.0 }, 64);
        // sin(pi) = 0 makes the bound infinite; negative axis: 1/(1 + |lambda| b) <= 1.
        assert!(chk.is_ok());
        for rho in [0.1, 1.0, 10.0] {
            assert!(op.resolvent_norm(c(-rho, 0.0)) <= 1.0);
        }
    }

    #[test]
    fn tail_integral_bound_dominates_quadrature() {
        // int_2^inf e^{-s^2} ds = sqrt(pi)/2 erfc(2)
        let exact = PI.sqrt() / 2.0 * libm::erfc(2.0);
        let b = ray_tail_integral(1.0, 2.0, 2.0);
        assert!(b >= exact && b < 2.0 * exact);
        let exact = (-3.0f64).exp();
        assert!((ray_tail_integral(1.0, 1.0, 3.0) - exact).abs() < 1e-15);
    }
}
