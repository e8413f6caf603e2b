//! Adaptive Gauss-Kronrod (7/15) quadrature for vector-valued complex integrands,
//! and the periodic trapezoidal rule on circles.

use std::f64::consts::PI;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::linalg::{C64, CVector};

const XGK: [f64; 8] = [
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000,
];

const WGK: [f64; 8] = [
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
];

/// Gauss weights for the odd Kronrod nodes `XGK[1], XGK[3], XGK[5], XGK[7]`.
const WG: [f64; 4] = [
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
];

#[derive(Debug, Clone, Copy)]
pub struct QuadOptions {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_panels: usize,
}

impl Default for QuadOptions {
    fn default() -> Self {
        Self { abs_tol: 1e-12, rel_tol: 1e-12, max_panels: 4000 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Panel {
    pub a: f64,
    pub b: f64,
    pub value: CVector,
    pub error: f64,
}

#[derive(Debug, Clone)]
pub struct QuadOutcome {
    pub value: CVector,
    pub error: f64,
    pub panels: Vec<Panel>,
}

/// One 15-point Kronrod panel with the embedded 7-point Gauss estimate.
pub fn gk15<F>(f: &F, a: f64, b: f64) -> Result<Panel>
where
    F: Fn(f64) -> Result<CVector>,
{
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center)?;
    let mut kronrod = &fc * C64::new(WGK[7], 0.0);
    let mut gauss = &fc * C64::new(WG[3], 0.0);
    for j in 0..7 {
        let dx = half * XGK[j];
        let sum = f(center - dx)? + f(center + dx)?;
        kronrod.axpy(C64::new(WGK[j], 0.0), &sum, C64::new(1.0, 0.0));
        if j % 2 == 1 {
            gauss.axpy(C64::new(WG[j / 2], 0.0), &sum, C64::new(1.0, 0.0));
        }
    }
    let scale = C64::new(half, 0.0);
    let value = kronrod * scale;
    let error = (&value - gauss * scale).norm();
    if value.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::QuadratureNonConvergence { estimate: f64::INFINITY, tolerance: 0.0, panels: 1 });
    }
    Ok(Panel { a, b, value, error })
}

fn evaluate_panels<F>(f: &F, spans: &[(f64, f64)]) -> Result<Vec<Panel>>
where
    F: Fn(f64) -> Result<CVector> + Sync,
{
    spans.par_iter().map(|&(a, b)| gk15(f, a, b)).collect()
}

fn sum_panels(panels: &[Panel], dim: usize) -> (CVector, f64) {
    let mut value = CVector::zeros(dim);
    let mut error = 0.0;
    for p in panels {
        value += &p.value;
        error += p.error;
    }
    (value, error)
}

/// Integrates over consecutive breakpoints, bisecting the worst panels until the summed
/// error estimate is below `max(abs_tol, rel_tol ||value||)`.
///
/// Breakpoints are always panel edges. Panels are evaluated in parallel and summed
/// in positional order, so results do not depend on the thread count.
pub fn integrate<F>(f: &F, breakpoints: &[f64], dim: usize, opts: QuadOptions) -> Result<QuadOutcome>
where
    F: Fn(f64) -> Result<CVector> + Sync,
{
    if breakpoints.len() < 2 {
        return Err(Error::InvalidParameter("need at least two breakpoints".into()));
    }
    let spans: Vec<(f64, f64)> = breakpoints.windows(2).map(|w| (w[0], w[1])).collect();
    let mut panels = evaluate_panels(f, &spans)?;
    loop {
        let (value, error) = sum_panels(&panels, dim);
        let target = opts.abs_tol.max(opts.rel_tol * value.norm());
        if error <= target {
            return Ok(QuadOutcome { value, error, panels });
        }
        if panels.len() >= opts.max_panels {
            return Err(Error::QuadratureNonConvergence { estimate: error, tolerance: target, panels: panels.len() });
        }
        // Split every panel carrying at least a tenth of the worst error, bounded by the budget.
        let worst = panels.iter().map(|p| p.error).fold(0.0, f64::max);
        let room = opts.max_panels - panels.len();
        let mut chosen: Vec<usize> = (0..panels.len()).filter(|&i| panels[i].error >= 0.1 * worst).collect();
        chosen.sort_by(|&i, &j| panels[j].error.total_cmp(&panels[i].error).then(i.cmp(&j)));
        chosen.truncate(room.max(1));
        chosen.sort_unstable();
        let halves: Vec<(f64, f64)> = chosen
            .iter()
            .flat_map(|&i| {
                let p = &panels[i];
                let mid = 0.5 * (p.a + p.b);
                [(p.a, mid), (mid, p.b)]
            })
            .collect();
        let fresh = evaluate_panels(f, &halves)?;
        let mut next = Vec::with_capacity(panels.len() + chosen.len());
        let mut fresh_iter = fresh.into_iter();
        let mut pick = chosen.iter().peekable();
        for (i, p) in panels.into_iter().enumerate() {
            if pick.peek() == Some(&&i) {
                pick.next();
                next.push(fresh_iter.next().expect("left half"));
                next.push(fresh_iter.next().expect("right half"));
            } else {
                next.push(p);
            }
        }
        panels = next;
    }
}

#[derive(Debug, Clone)]
pub struct CircleOutcome {
    pub value: CVector,
    pub error: f64,
    pub nodes: usize,
}

/// `(1/2 pi i) \oint f(z) dz` counterclockwise on `|z - center| = radius`,
/// doubling the trapezoid count until consecutive values agree to `tol`.
pub fn circle_integral<F>(f: &F, center: C64, radius: f64, dim: usize, tol: f64, max_nodes: usize) -> Result<CircleOutcome>
where
    F: Fn(C64) -> Result<CVector> + Sync,
{
    let rule = |n: usize| -> Result<CVector> {
        let terms: Vec<CVector> = (0..n)
            .into_par_iter()
            .map(|k| {
                let w = C64::from_polar(radius, 2.0 * PI * (k as f64 + 0.5) / n as f64);
                f(center + w).map(|v| v * w)
            })
            .collect::<Result<_>>()?;
        let mut acc = CVector::zeros(dim);
        for v in &terms {
            acc += v;
        }
        Ok(acc / C64::new(n as f64, 0.0))
    };
    let mut nodes = 16;
    let mut prev = rule(nodes)?;
    loop {
        nodes *= 2;
        let next = rule(nodes)?;
        let error = (&next - &prev).norm();
        if error <= tol * next.norm().max(1e-300) || error == 0.0 {
            return Ok(CircleOutcome { value: next, error, nodes });
        }
        if nodes >= max_nodes {
            return Err(Error::QuadratureNonConvergence { estimate: error, tolerance: tol, panels: nodes });
        }
        prev = next;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn scalar<F: Fn(f64) -> C64 + Sync>(g: F) -> impl Fn(f64) -> Result<CVector> + Sync {
        move |x| Ok(CVector::from_element(1, g(x)))
    }

    #[test]
    fn kronrod_is_exact_for_polynomials() {
        let f = scalar(|x| C64::new(x.powi(20), -x.powi(3)));
        let p = gk15(&f, -1.0, 1.0).unwrap();
        assert!((p.value[0] - C64::new(2.0 / 21.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn adaptive_handles_peaks() {
        let f = scalar(|x| C64::new(1.0 / (1e-4 + x * x), 0.0));
        let out = integrate(&f, &[-1.0, 1.0], 1, QuadOptions { abs_tol: 1e-10, rel_tol: 1e-12, max_panels: 2000 }).unwrap();
        let exact = 2.0 * (1.0 / 1e-2) * (1.0f64 / 1e-2).atan();
        assert!((out.value[0].re - exact).abs() < 1e-8 * exact);
        assert!(out.panels.windows(2).all(|w| w[0].b == w[1].a));
    }

    #[test]
    fn budget_exhaustion_is_an_error() {
        let f = scalar(|x| C64::new((1.0 / (x + 1e-9)).sin(), 0.0));
        let e = integrate(&f, &[0.0, 1.0], 1, QuadOptions { abs_tol: 1e-14, rel_tol: 0.0, max_panels: 8 }).unwrap_err();
        assert!(matches!(e, Error::QuadratureNonConvergence { .. }));
    }

    #[test]
    fn circle_residue_of_simple_pole() {
        let f = |z: C64| Ok(CVector::from_element(1, (z * 2.0).exp() / (z - C64::new(0.3, 0.0))));
        let out = circle_integral(&f, C64::new(0.3, 0.0), 0.5, 1, 1e-14, 4096).unwrap();
        assert!((out.value[0] - C64::new(0.6f64.exp(), 0.0)).norm() < 1e-13);
    }
}
