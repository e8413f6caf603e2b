//! Circle scan for the growth bound `||(I - lambda B)^{-1}|| <= e^{gamma(|lambda|) |lambda|^varrho} |lambda|^m`.

use std::f64::consts::{E, PI};

use rayon::prelude::*;
use serde::Serialize;

use super::beta::beta_profile;
use super::sequence::ModulusSequence;
use crate::error::{Error, Result};
use crate::linalg::C64;
use crate::operator::OperatorSpec;

pub const DEFAULT_RADII: usize = 64;
pub const DEFAULT_PROBES: usize = 256;
/// Circles closer than this (relative) to a characteristic number are skipped.
pub const POLE_CLEARANCE: f64 = 1e-6;

#[derive(Debug, Clone, Serialize)]
pub struct CircleBound {
    pub r_tilde: f64,
    pub max_norm: f64,
    pub bound: f64,
    pub gamma: f64,
    pub satisfied: bool,
    pub m: u32,
    pub worst_angle: f64,
    pub radii_scanned: usize,
    pub radii_skipped: usize,
}

/// `e^{gamma rho^varrho} rho^m`.
pub fn growth_bound(gamma: f64, rho: f64, varrho: f64, m: u32) -> f64 {
    (gamma * rho.powf(varrho)).exp() * rho.powi(m as i32)
}

/// Reciprocals of the nonzero singular values of `B^{m+1}`, ascending.
pub fn power_singular_sequence(op: &OperatorSpec, m: u32) -> ModulusSequence {
    let s = op.power(m + 1).singular_values();
    let top = s.first().copied().unwrap_or(0.0);
    let mut moduli: Vec<f64> = s.into_iter().filter(|&x| x > 1e-14 * top && x > 0.0).map(|x| 1.0 / x).collect();
    moduli.sort_by(f64::total_cmp);
    ModulusSequence::Finite(moduli)
}

/// Scans `radii` circles in `((1 - delta) R, R)` with `probes` angles each and reports the
/// circle with the smallest maximal resolvent norm, compared against the growth bound.
pub fn circle_bound_with(
    op: &OperatorSpec,
    big_r: f64,
    delta: f64,
    varrho: f64,
    probes: usize,
    radii: usize,
) -> Result<CircleBound> {
    if !(big_r > 0.0) || !(delta > 0.0 && delta < 1.0) || !(varrho >= 0.0) || probes == 0 || radii == 0 {
        return Err(Error::InvalidParameter("need R > 0, delta in (0,1), varrho >= 0 and positive counts".into()));
    }
    let m = varrho.floor() as u32;
    let k = m as f64 + 1.0;
    let seq = power_singular_sequence(op, m);
    let poles: Vec<f64> = op.characteristic_numbers().iter().map(|l| l.norm()).collect();

    let candidates: Vec<f64> = (0..radii)
        .map(|j| (1.0 - delta) * big_r + delta * big_r * (j + 1) as f64 / (radii + 1) as f64)
        .filter(|rt| poles.iter().all(|p| (p - rt).abs() > POLE_CLEARANCE * rt))
        .collect();
    let skipped = radii - candidates.len();

    let scans: Vec<(f64, f64, f64)> = candidates
        .par_iter()
        .map(|&rt| {
            let (mut worst, mut angle) = (0.0, 0.0);
            for i in 0..probes {
                let psi = 2.0 * PI * i as f64 / probes as f64;
                let n = op.resolvent_norm(C64::from_polar(rt, psi));
                if n > worst || n.is_nan() {
                    worst = n;
                    angle = psi;
                }
            }
            (rt, worst, angle)
        })
        .filter(|(_, w, _)| w.is_finite())
        .collect();
    let Some(&(rt, max_norm, worst_angle)) = scans.iter().min_by(|a, b| a.1.total_cmp(&b.1).then(a.0.total_cmp(&b.0)))
    else {
        return Err(Error::NoAdmissibleCircle);
    };

    let rho1 = varrho / k;
    let grid = [rt.powf(k), (2.0 * E * rt).powf(k)];
    let beta = beta_profile(&seq, 0, rho1, &grid)?;
    let gamma = beta.beta[0] + (2.0 + (12.0 * E / delta).ln()) * (2.0 * E).powf(varrho) * beta.beta[1];
    let bound = growth_bound(gamma, rt, varrho, m);
    Ok(CircleBound {
        r_tilde: rt,
        max_norm,
        bound,
        gamma,
        satisfied: max_norm <= bound,
        m,
        worst_angle,
        radii_scanned: candidates.len(),
        radii_skipped: skipped + candidates.len() - scans.len(),
    })
}

pub fn circle_bound(op: &OperatorSpec, big_r: f64, delta: f64, varrho: f64, probes: usize) -> Result<CircleBound> {
    circle_bound_with(op, big_r, delta, varrho, probes, DEFAULT_RADII)
}
