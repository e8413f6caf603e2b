//! The `beta(r)` profile and canonical products.

use rayon::prelude::*;
use serde::Serialize;

use super::sequence::{ModulusSequence, SequenceModel};
use crate::error::{Error, Result};
use crate::linalg::{C64, CVector};
use crate::quadrature::{self, QuadOptions};

#[derive(Debug, Clone, Serialize)]
pub struct BetaProfile {
    pub p: u32,
    pub rho1: f64,
    pub r: Vec<f64>,
    pub beta: Vec<f64>,
    pub beta_ln_r: Vec<f64>,
    /// Bound on the error from replacing the step count by a smooth tail law; zero when exact.
    pub truncation_bound: Vec<f64>,
    pub exact: bool,
}

impl BetaProfile {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("r,beta,beta_ln_r\n");
        for i in 0..self.r.len() {
            out.push_str(&format!("{:.16e},{:.16e},{:.16e}\n", self.r[i], self.beta[i], self.beta_ln_r[i]));
        }
        out
    }
}

/// Most moduli a model sequence may materialize for the exact step part.
pub const MAX_EXACT_TERMS: usize = 1 << 25;

/// Smooth tail law for `n(t)` beyond the materialized terms.
#[derive(Debug, Clone, Copy)]
enum Tail {
    None,
    Model(SequenceModel),
    /// `n(t) = count (t / at)^exponent`.
    Power { count: f64, at: f64, exponent: f64 },
}

/// `ln N(e^u)` for the models without a closed-form tail.
fn ln_smooth_count(model: &SequenceModel, u: f64) -> f64 {
    match *model {
        SequenceModel::E1 { rho } => {
            // u >= ln r0 > e, so both logarithms are positive.
            rho * u - u.ln() - u.ln().ln()
        }
        SequenceModel::E2 { kappa, q } => {
            // Solve kappa (x + ln ln(e^x + q) + ln ln ln(e^x + q)) = u for x = ln i.
            let ln_a = |x: f64| {
                // ln(e^x + q) without overflow.
                let l = if x > 0.0 { x + (q * (-x).exp()).ln_1p() } else { (x.exp() + q).ln() };
                kappa * (x + l.ln() + l.ln().ln())
            };
            let (mut lo, mut hi) = (-50.0, u / kappa + 1.0);
            for _ in 0..200 {
                let mid = 0.5 * (lo + hi);
                if ln_a(mid) < u {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            hi
        }
        SequenceModel::Power { exponent } => u / exponent,
        SequenceModel::Geometric { ratio } => (u / ratio.ln()).ln(),
    }
}

/// `int_L^inf N(t) t^{-p-2} dt`.
fn tail_integral(tail: Tail, p: u32, big_l: f64) -> Result<f64> {
    let e = p as f64 + 1.0;
    match tail {
        Tail::None => Ok(0.0),
        Tail::Power { count, at, exponent } => {
            if exponent >= e {
                return Err(Error::TailDivergence(format!("tail exponent {exponent} >= p + 1 = {e}")));
            }
            Ok(count * at.powf(-exponent) * big_l.powf(exponent - e) / (e - exponent))
        }
        Tail::Model(model) => {
            let rho = model.exponent();
            if rho >= e {
                return Err(Error::TailDivergence(format!("model exponent {rho} >= p + 1 = {e}; raise p")));
            }
            match model {
                SequenceModel::Power { exponent } => {
                    let a = 1.0 / exponent;
                    Ok(big_l.powf(a - e) / (e - a))
                }
                SequenceModel::Geometric { ratio } => {
                    let ll = big_l.ln();
                    Ok(big_l.powf(-e) * (ll / e + 1.0 / (e * e)) / ratio.ln())
                }
                _ => {
                    // u = ln L + w / g, w = s / (1 - s), with g the decay rate of the integrand in u.
                    let g = e - rho;
                    let u0 = big_l.ln();
                    let scale = u0 * (rho - e);
                    let f = |s: f64| -> Result<CVector> {
                        let w = s / (1.0 - s);
                        let u = u0 + w / g;
                        let v = (ln_smooth_count(&model, u) - e * u - scale).exp() / (g * (1.0 - s) * (1.0 - s));
                        Ok(CVector::from_element(1, C64::new(if v.is_finite() { v } else { 0.0 }, 0.0)))
                    };
                    let opts = QuadOptions { abs_tol: 0.0, rel_tol: 1e-11, max_panels: 2000 };
                    let out = quadrature::integrate(&f, &[0.0, 0.5, 0.75, 0.9, 0.97, 0.99, 0.999, 1.0], 1, opts)?;
                    Ok(out.value[0].re * scale.exp())
                }
            }
        }
    }
}

/// `beta(r) = r^{p - rho1} (int_0^r n(t) t^{-p-1} dt + r int_r^inf n(t) t^{-p-2} dt)`.
///
/// Step integrals are exact over the materialized terms. Model sequences
/// materialize every modulus below `4 max(r)` and continue with their smooth
/// counting law; a `Prefix` needs a tail exponent and a grid inside the prefix.
pub fn beta_profile(seq: &ModulusSequence, p: u32, rho1: f64, r_grid: &[f64]) -> Result<BetaProfile> {
    if !(rho1 > 0.0) {
        return Err(Error::InvalidParameter("rho1 must be positive".into()));
    }
    if r_grid.iter().any(|r| !(*r > 0.0) || !r.is_finite()) {
        return Err(Error::InvalidParameter("r grid must be positive and finite".into()));
    }
    let r_max = r_grid.iter().copied().fold(0.0, f64::max);
    let (moduli, tail, top) = match seq {
        ModulusSequence::Finite(m) => (m.clone(), Tail::None, f64::INFINITY),
        ModulusSequence::Prefix { moduli, tail_exponent } => {
            let Some(exponent) = tail_exponent else {
                return Err(Error::TailDivergence(
                    "prefix sequence without an asymptotic exponent; supply tail_exponent".into(),
                ));
            };
            let Some(&at) = moduli.last() else {
                return Err(Error::InvalidParameter("empty prefix".into()));
            };
            if r_max >= at {
                return Err(Error::InvalidParameter(format!("grid reaches {r_max}, beyond the prefix end {at}")));
            }
            let tail = Tail::Power { count: moduli.len() as f64, at, exponent: *exponent };
            (moduli.clone(), tail, at)
        }
        ModulusSequence::Model(model) => {
            if model.exponent() >= p as f64 + 1.0 {
                return Err(Error::TailDivergence(format!("model exponent {} >= p + 1; raise p", model.exponent())));
            }
            let h = seq.count_below(4.0 * r_max).saturating_add(1);
            if h > MAX_EXACT_TERMS {
                return Err(Error::InvalidParameter(format!(
                    "grid up to {r_max} needs {h} exact terms, above the limit {MAX_EXACT_TERMS}"
                )));
            }
            let moduli = seq.take(h);
            let top = *moduli.last().expect("at least one term");
            (moduli, Tail::Model(*model), top)
        }
    };
    let e = p as f64 + 1.0;
    let tail_from = |r: f64| -> Result<f64> { tail_integral(tail, p, top.max(r)) };
    // Validate the tail once up front so divergence is reported before any work.
    if !top.is_infinite() {
        tail_from(top)?;
    }

    let h = moduli.len();
    let mut head = vec![0.0; h + 1];
    for (i, a) in moduli.iter().enumerate() {
        head[i + 1] = head[i] + if p == 0 { a.ln() } else { a.powi(-(p as i32)) };
    }
    let mut suffix = vec![0.0; h + 1];
    for i in (0..h).rev() {
        suffix[i] = suffix[i + 1] + moduli[i].powf(-e);
    }
    let n_top = moduli.partition_point(|&a| a < top);

    let rows: Vec<(f64, f64)> = r_grid
        .par_iter()
        .map(|&r| -> Result<(f64, f64)> {
            let n = moduli.partition_point(|&a| a < r);
            let nf = n as f64;
            let i1 = if p == 0 { nf * r.ln() - head[n] } else { (head[n] - nf * r.powi(-(p as i32))) / p as f64 };
            let i2 = if top.is_infinite() {
                (nf * r.powf(-e) + suffix[n]) / e
            } else {
                let step = (nf * r.powf(-e) + suffix[n] - suffix[n_top] - n_top as f64 * top.powf(-e)) / e;
                step + tail_from(r)?
            };
            let scale = r.powf(p as f64 - rho1);
            let beta = scale * (i1 + r * i2);
            let bound = if top.is_infinite() { 0.0 } else { scale * r * top.max(r).powf(-e) / e };
            Ok((beta.max(0.0), bound))
        })
        .collect::<Result<_>>()?;
    let beta: Vec<f64> = rows.iter().map(|x| x.0).collect();
    Ok(BetaProfile {
        p,
        rho1,
        r: r_grid.to_vec(),
        beta_ln_r: beta.iter().zip(r_grid).map(|(b, r)| b * r.ln()).collect(),
        beta,
        truncation_bound: rows.iter().map(|x| x.1).collect(),
        exact: top.is_infinite(),
    })
}

/// Primary factor `G(u, p) = (1 - u) exp(u + u^2/2 + ... + u^p/p)`.
pub fn primary_factor(u: C64, p: u32) -> C64 {
    let mut s = C64::new(0.0, 0.0);
    let mut pow = C64::new(1.0, 0.0);
    for j in 1..=p {
        pow *= u;
        s += pow / j as f64;
    }
    (C64::new(1.0, 0.0) - u) * s.exp()
}

/// `prod_{n <= terms} G(z / a_n, p)`.
pub fn canonical_product(zeros: &[C64], p: u32, z: C64, terms: usize) -> Result<C64> {
    if terms > zeros.len() {
        return Err(Error::InvalidParameter(format!("{terms} terms requested, {} available", zeros.len())));
    }
    let mut acc = C64::new(1.0, 0.0);
    for (index, a) in zeros[..terms].iter().enumerate() {
        if a.norm() == 0.0 {
            return Err(Error::ZeroInSequence { index });
        }
        acc *= primary_factor(z / a, p);
    }
    Ok(acc)
}
