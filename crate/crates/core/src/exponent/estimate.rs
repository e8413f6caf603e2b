//! Convergence exponent, genus and upper density from a finite horizon.

use serde::Serialize;

use super::sequence::ModulusSequence;
use crate::error::{Error, Result};

pub const FIT_POINTS: usize = 200;
pub const MIN_FIT_POINTS: usize = 100;
/// Width of the fit window in decades of `r`.
pub const FIT_DECADES: f64 = 2.0;
pub const GENUS_TAIL_RATIO: f64 = 1e-6;
/// Term-decay exponent above which `sum a_n^{-(p+1)}` is taken as convergent.
pub const GENUS_DECAY_EXPONENT: f64 = 1.2;
pub const NEAR_INTEGER: f64 = 0.05;

#[derive(Debug, Clone, Serialize)]
pub struct ExponentReport {
    pub rho_hat: f64,
    pub genus: u32,
    pub density_hat: f64,
    pub near_integer: bool,
    pub horizon: usize,
    pub window: [f64; 2],
    pub fit_points: usize,
    pub fit_intercept: f64,
    pub residual_rms: f64,
    pub residual_max: f64,
    /// Local slopes over the window quarters; a drifting sequence signals a pre-asymptotic fit.
    pub local_slopes: Vec<f64>,
    pub genus_tests: Vec<GenusTest>,
}

#[derive(Debug, Clone, Serialize)]
pub struct GenusTest {
    pub p: u32,
    pub head: f64,
    pub tail: f64,
    pub decay_exponent: f64,
    pub convergent: bool,
}

fn count(moduli: &[f64], r: f64) -> usize {
    moduli.partition_point(|&a| a < r)
}

/// Least squares `y = a + b x`; returns `(a, b)`.
pub fn linear_fit(x: &[f64], y: &[f64]) -> (f64, f64) {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    let b = if sxx > 0.0 { sxy / sxx } else { 0.0 };
    (my - b * mx, b)
}

fn log_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    let (a, b) = (lo.ln(), hi.ln());
    (0..n).map(|i| (a + (b - a) * i as f64 / (n - 1) as f64).exp()).collect()
}

fn genus_test(moduli: &[f64], p: u32) -> GenusTest {
    let e = p as f64 + 1.0;
    let half = moduli.len() / 2;
    let head: f64 = moduli[..half].iter().map(|a| a.powf(-e)).sum();
    let tail: f64 = moduli[half..].iter().map(|a| a.powf(-e)).sum();
    // Decay of the terms k -> a_k^{-(p+1)} over the last decade of indices.
    let n = moduli.len();
    let start = (n / 10).max(1);
    let idx: Vec<usize> = log_grid(start as f64, n as f64, 64).into_iter().map(|x| (x.round() as usize).clamp(1, n)).collect();
    let xs: Vec<f64> = idx.iter().map(|&k| (k as f64).ln()).collect();
    let ys: Vec<f64> = idx.iter().map(|&k| -e * moduli[k - 1].ln()).collect();
    let decay_exponent = -linear_fit(&xs, &ys).1;
    let convergent = tail < GENUS_TAIL_RATIO * head || decay_exponent >= GENUS_DECAY_EXPONENT;
    GenusTest { p, head, tail, decay_exponent, convergent }
}

/// Estimates `rho`, the genus `p` and the upper density from the first `horizon` moduli.
///
/// The slope of `ln n(r)` against `ln r` is fitted over the last two decades of `r`
/// below `a_horizon`. Model sequences stop early if their terms overflow.
pub fn convergence_exponent(seq: &ModulusSequence, horizon: usize) -> Result<ExponentReport> {
    let moduli = seq.take(horizon);
    if moduli.len() < 2 {
        return Err(Error::HorizonTooSmall { points: 0, required: MIN_FIT_POINTS });
    }
    let big_r = *moduli.last().expect("nonempty");
    let lo = big_r / 10f64.powf(FIT_DECADES);
    let grid = log_grid(lo, big_r, FIT_POINTS);
    let pts: Vec<(f64, f64)> = grid
        .iter()
        .map(|&r| (r, count(&moduli, r)))
        .filter(|&(_, n)| n > 0)
        .map(|(r, n)| (r.ln(), (n as f64).ln()))
        .collect();
    if pts.len() < MIN_FIT_POINTS {
        return Err(Error::HorizonTooSmall { points: pts.len(), required: MIN_FIT_POINTS });
    }
    let xs: Vec<f64> = pts.iter().map(|p| p.0).collect();
    let ys: Vec<f64> = pts.iter().map(|p| p.1).collect();
    let (intercept, slope) = linear_fit(&xs, &ys);
    let residuals: Vec<f64> = xs.iter().zip(&ys).map(|(x, y)| y - intercept - slope * x).collect();
    let residual_rms = (residuals.iter().map(|r| r * r).sum::<f64>() / residuals.len() as f64).sqrt();
    let residual_max = residuals.iter().map(|r| r.abs()).fold(0.0, f64::max);
    let q = xs.len() / 4;
    let local_slopes = (0..4)
        .map(|i| {
            let end = if i == 3 { xs.len() } else { (i + 1) * q };
            linear_fit(&xs[i * q..end], &ys[i * q..end]).1
        })
        .collect();

    let rho_hat = slope.max(0.0);
    let mut genus_tests = Vec::new();
    let cap = rho_hat.ceil() as u32 + 2;
    let mut genus = cap;
    for p in 0..=cap {
        let t = genus_test(&moduli, p);
        let done = t.convergent;
        genus_tests.push(t);
        if done {
            genus = p;
            break;
        }
    }
    let density_hat = if rho_hat > 0.0 { density_over(&moduli, big_r, rho_hat) } else { 0.0 };
    Ok(ExponentReport {
        rho_hat,
        genus,
        density_hat,
        near_integer: (rho_hat - rho_hat.round()).abs() < NEAR_INTEGER,
        horizon: moduli.len(),
        window: [lo, big_r],
        fit_points: pts.len(),
        fit_intercept: intercept,
        residual_rms,
        residual_max,
        local_slopes,
        genus_tests,
    })
}

/// `sup n(r)/r^rho` over `[R/10, R]`. The supremum of each step is attained just above a modulus.
fn density_over(moduli: &[f64], big_r: f64, rho: f64) -> f64 {
    let lo = big_r / 10.0;
    let start = count(moduli, lo);
    let at_lo = start as f64 / lo.powf(rho);
    moduli
        .iter()
        .enumerate()
        .skip(start)
        .take_while(|&(_, &a)| a <= big_r)
        .map(|(i, &a)| (i + 1) as f64 / a.powf(rho))
        .fold(at_lo, f64::max)
}

/// Upper density over the last decade below the horizon radius.
///
/// For a finite sequence shorter than `horizon`, the radius is extrapolated to
/// `a_len * horizon / len`, so the estimate decays as the horizon grows.
pub fn upper_density(seq: &ModulusSequence, rho: f64, horizon: usize) -> Result<f64> {
    if !(rho > 0.0) {
        return Err(Error::InvalidParameter("rho must be positive".into()));
    }
    let moduli = seq.take(horizon);
    let Some(&last) = moduli.last() else {
        return Ok(0.0);
    };
    let big_r = match seq {
        ModulusSequence::Finite(_) if horizon > moduli.len() => last * horizon as f64 / moduli.len() as f64,
        _ => last,
    };
    Ok(density_over(&moduli, big_r, rho))
}

/// Decay exponent `mu` in `s_n <= C n^{-mu}`, fitted over the nonzero singular values.
pub fn singular_decay_exponent(singular_values: &[f64]) -> Option<f64> {
    let pts: Vec<(f64, f64)> = singular_values
        .iter()
        .enumerate()
        .filter(|&(_, &s)| s > 0.0)
        .map(|(i, &s)| (((i + 1) as f64).ln(), s.ln()))
        .collect();
    if pts.len() < 2 {
        return None;
    }
    let xs: Vec<f64> = pts.iter().map(|p| p.0).collect();
    let ys: Vec<f64> = pts.iter().map(|p| p.1).collect();
    Some(-linear_fit(&xs, &ys).1)
}
