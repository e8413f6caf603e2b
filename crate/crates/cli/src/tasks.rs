//! The task pipelines. Computation errors become failed gates; only input errors abort a run.

use std::f64::consts::PI;

use lidskii_core::contour::{self, BoundKind, ContourKind};
use lidskii_core::evolution::{
    self, Backend, CauchyProblem, CheckStatus, Checks, INITIAL_SCHEDULE, INITIAL_THRESHOLD, RESIDUAL_THRESHOLD,
};
use lidskii_core::exponent::{self, ModulusSequence, SequenceModel};
use lidskii_core::families;
use lidskii_core::linalg::{self, C64, CMatrix, CVector};
use lidskii_core::operator::OperatorSpec;
use lidskii_core::spectral::{self, DEFAULT_RANK_TOLERANCE, SpectralDecomposition};
use lidskii_core::summation;
use rand::Rng;
use serde_json::json;

use crate::config::{Resolved, Task};
use crate::report::{Artifact, CsvCell, Gate, GateStatus, csv_table};

pub const RESIDUE_THRESHOLD: f64 = 1e-8;
pub const CONTOUR_THRESHOLD: f64 = 1e-6;
pub const BACKEND_THRESHOLD: f64 = 1e-6;
pub const DECOMPOSITION_THRESHOLD: f64 = 1e-8;
pub const GROUPING_THRESHOLD: f64 = 1e-12;
pub const ABEL_THRESHOLD: f64 = 1e-6;
pub const GAMMA_THRESHOLD: f64 = 1e-8;
pub const BOUND_SLACK: f64 = 1e-12;
pub const EXPONENT_TOLERANCE: f64 = 0.05;

const DEFAULT_T_GRID: [f64; 6] = [0.05, 0.1, 0.2, 0.4, 0.7, 1.0];
const DEFAULT_R_GRID: [f64; 5] = [1e2, 1e3, 1e4, 1e5, 1e6];
const SECTOR_SAMPLES: usize = 256;
const RAY_PROBES: usize = 256;

#[derive(Debug, Default)]
pub struct TaskOutcome {
    pub gates: Vec<Gate>,
    pub artifacts: Vec<Artifact>,
}

pub fn run(res: &Resolved) -> TaskOutcome {
    match res.task {
        Task::ExponentAnalysis => exponent_analysis(res),
        Task::Decompose => decompose(res),
        Task::Sum => sum(res),
        Task::ContourVerify => contour_verify(res),
        Task::Evolve => evolve(res),
        Task::FullVerify => full_verify(res.seed.expect("validated")),
    }
}

fn pair(z: C64) -> [f64; 2] {
    [z.re, z.im]
}

fn pairs(v: &CVector) -> Vec<[f64; 2]> {
    v.iter().map(|z| pair(*z)).collect()
}

/// The configured vector, or a seeded Gaussian one; `stream` separates operators.
fn probe_vector(res: &Resolved, stream: u64, dim: usize) -> CVector {
    match &res.h {
        Some(h) => h.clone(),
        None => {
            let seed = res.seed.expect("validated").wrapping_mul(0x9e37_79b9).wrapping_add(stream);
            linalg::random_cvector(&mut linalg::seeded_rng(seed), dim)
        }
    }
}

fn rank_tolerance(res: &Resolved) -> f64 {
    res.params.rank_tolerance.unwrap_or(DEFAULT_RANK_TOLERANCE)
}

fn exponent_analysis(res: &Resolved) -> TaskOutcome {
    let mut out = TaskOutcome::default();
    let seq = res.sequence.as_ref().expect("validated");
    let horizon = res.params.horizon.unwrap_or_else(|| seq.len().unwrap_or(1_000_000));
    let report = match exponent::convergence_exponent(seq, horizon) {
        Ok(r) => r,
        Err(e) => {
            out.gates.push(Gate::failed("exponent-fit", e.to_string()));
            return out;
        }
    };
    out.gates.push(Gate::flag(
        "exponent-fit",
        true,
        format!("rho_hat {:.6}, genus {}, {} fit points", report.rho_hat, report.genus, report.fit_points),
    ));
    let p = res.params.p.unwrap_or(report.genus);
    let rho1 = res.params.rho1.unwrap_or(report.rho_hat);
    let grid = if res.params.r_grid.is_empty() { DEFAULT_R_GRID.to_vec() } else { res.params.r_grid.clone() };

    let counting: Vec<Vec<CsvCell>> =
        grid.iter().map(|&r| vec![r.into(), exponent::counting_function(seq, r).into()]).collect();
    out.artifacts.push(Artifact::csv("counting.csv", csv_table(&["r", "n"], &counting)));

    let beta = match exponent::beta_profile(seq, p, rho1, &grid) {
        Ok(b) => {
            out.gates.push(Gate::flag("beta-profile", true, format!("p {p}, rho1 {rho1}")));
            out.artifacts.push(Artifact::csv("beta.csv", b.to_csv()));
            Some(b)
        }
        Err(e) => {
            out.gates.push(Gate::failed("beta-profile", e.to_string()));
            None
        }
    };
    out.artifacts.push(Artifact::json("exponent.json", &json!({ "report": report, "beta": beta })));
    out
}

fn decompose(res: &Resolved) -> TaskOutcome {
    let mut out = TaskOutcome::default();
    for (i, op) in res.operators.iter().enumerate() {
        match spectral::full_decomposition(op, rank_tolerance(res)) {
            Ok(d) => {
                let chain = d.chain_residual(op);
                let n = d.total_root_count();
                let pairing = (d.pairing_matrix() - CMatrix::identity(n, n)).norm();
                out.gates.push(Gate::at_most(format!("chain-residual-{i}"), chain, DECOMPOSITION_THRESHOLD));
                out.gates.push(Gate::at_most(format!("pairing-{i}"), pairing, DECOMPOSITION_THRESHOLD));
                out.artifacts.push(Artifact::json(
                    format!("decomposition-{i}.json"),
                    &json!({
                        "label": op.label,
                        "decomposition": d.to_json_value(),
                        "chain_residual": chain,
                        "pairing_error": pairing,
                    }),
                ));
            }
            Err(e) => out.gates.push(Gate::failed(format!("decompose-{i}"), e.to_string())),
        }
    }
    out
}

fn group_norms_csv(norms: &[f64]) -> String {
    let rows: Vec<Vec<CsvCell>> = norms.iter().enumerate().map(|(nu, n)| vec![(nu + 1).into(), (*n).into()]).collect();
    csv_table(&["nu", "norm"], &rows)
}

fn sum(res: &Resolved) -> TaskOutcome {
    let mut out = TaskOutcome::default();
    let alpha = res.params.alpha.unwrap_or(2.0);
    let t_values = if res.params.t_values.is_empty() { vec![0.1] } else { res.params.t_values.clone() };
    for (i, op) in res.operators.iter().enumerate() {
        let f = probe_vector(res, i as u64, op.dimension);
        let mut run = || -> lidskii_core::Result<()> {
            let d = spectral::full_decomposition(op, rank_tolerance(res))?;
            let raw = spectral::raw_coefficients(&d, &f)?;
            let moduli: Vec<f64> = d.groups.iter().map(|g| g.lambda.norm()).collect();
            let tau = res.params.tau.unwrap_or_else(|| summation::default_tau(1.0 / alpha));
            let k = res.params.k.unwrap_or_else(|| summation::default_k(&moduli));
            let schedule = summation::group_schedule(&d, tau, k)?;
            let mut coeff_rows = Vec::new();
            let mut totals = Vec::new();
            for (j, &t) in t_values.iter().enumerate() {
                let c = summation::regularized_coefficients(&d, &raw, t, alpha)?;
                let sums = summation::grouped_partial_sums(&d, &c, &schedule)?;
                let all = d.reconstruct(&c.values)?;
                let rel = (&sums.total - &all).norm() / all.norm().max(f64::MIN_POSITIVE);
                out.gates.push(Gate::at_most(format!("grouping-{i}-{j}"), rel, GROUPING_THRESHOLD));
                for (n, z) in c.values.iter().enumerate() {
                    coeff_rows.push(vec![n.into(), t.into(), z.re.into(), z.im.into(), z.norm().into()]);
                }
                out.artifacts.push(Artifact::csv(format!("group-norms-{i}-{j}.csv"), group_norms_csv(&sums.group_norms)));
                totals.push(json!({ "t": t, "total": pairs(&sums.total) }));
            }
            out.artifacts
                .push(Artifact::csv(format!("coefficients-{i}.csv"), csv_table(&["index", "t", "re", "im", "norm"], &coeff_rows)));
            out.artifacts.push(Artifact::json(
                format!("sum-{i}.json"),
                &json!({
                    "label": op.label,
                    "alpha": alpha,
                    "f": pairs(&f),
                    "raw_coefficients": raw.iter().map(|z| pair(*z)).collect::<Vec<_>>(),
                    "schedule": schedule,
                    "totals": totals,
                }),
            ));
            Ok(())
        };
        if let Err(e) = run() {
            out.gates.push(Gate::failed(format!("sum-{i}"), e.to_string()));
        }
    }
    out
}

/// Worst relative gap between the residue circles and minus the group sums.
fn residue_gap(op: &OperatorSpec, d: &SpectralDecomposition, f: &CVector, t: f64, alpha: f64) -> lidskii_core::Result<f64> {
    let raw = spectral::raw_coefficients(d, f)?;
    let c = summation::regularized_coefficients(d, &raw, t, alpha)?;
    let mut worst: f64 = 0.0;
    for g in 0..d.groups.len() {
        let sum = summation::eigen_group_sum(d, &c.values, g)?;
        if sum.norm() == 0.0 {
            continue;
        }
        let radius = contour::residue_radius(d, g);
        let res = contour::residue_at_pole(op, f, t, alpha, d, g, radius)?;
        worst = worst.max((&res + &sum).norm() / sum.norm());
    }
    Ok(worst)
}

/// Relative gap between the sector-contour integral and the full regularized series.
fn contour_gap(
    op: &OperatorSpec,
    d: &SpectralDecomposition,
    f: &CVector,
    t: f64,
    alpha: f64,
    sector: &lidskii_core::operator::SectorEstimate,
) -> lidskii_core::Result<(f64, contour::ContourSpec, contour::QuadratureResult)> {
    let spec = contour::build_contour(ContourKind::GammaB, op, sector, t, alpha, 1e-12)?;
    let q = contour::integrate_resolvent_functional(op, f, t, alpha, &spec)?;
    let raw = spectral::raw_coefficients(d, f)?;
    let c = summation::regularized_coefficients(d, &raw, t, alpha)?;
    let series = d.reconstruct(&c.values)?;
    Ok(((&q.value - &series).norm() / series.norm().max(f64::MIN_POSITIVE), spec, q))
}

/// Both rays bisecting the gap between the certified sector and the negative axis.
fn ray_bound_check(op: &OperatorSpec, probes: usize) -> Option<lidskii_core::Result<f64>> {
    let theta = op.certified_sector_angle(0.0)?;
    let mut worst = f64::NEG_INFINITY;
    for angle in [0.5 * (theta + PI), -0.5 * (theta + PI)] {
        match contour::verify_resolvent_bound(op, BoundKind::RayL6 { angle, theta }, probes) {
            Ok(b) => worst = worst.max(b.max_violation),
            Err(e) => return Some(Err(e)),
        }
    }
    Some(Ok(worst))
}

fn contour_verify(res: &Resolved) -> TaskOutcome {
    let mut out = TaskOutcome::default();
    let alphas = if res.params.alphas.is_empty() { vec![1.5, 2.0] } else { res.params.alphas.clone() };
    let t_values = if res.params.t_values.is_empty() { vec![0.1, 1.0] } else { res.params.t_values.clone() };
    let seed = res.seed.unwrap_or(0);
    for (i, op) in res.operators.iter().enumerate() {
        let f = probe_vector(res, i as u64, op.dimension);
        let prep = spectral::full_decomposition(op, rank_tolerance(res))
            .and_then(|d| op.estimate_sector(SECTOR_SAMPLES.max(op.dimension), None, seed).map(|s| (d, s)));
        let (d, sector) = match prep {
            Ok(x) => x,
            Err(e) => {
                out.gates.push(Gate::failed(format!("prepare-{i}"), e.to_string()));
                continue;
            }
        };
        out.artifacts.push(Artifact::json(format!("sector-{i}.json"), &sector));
        for (ai, &alpha) in alphas.iter().enumerate() {
            for (ti, &t) in t_values.iter().enumerate() {
                let tag = format!("{i}-a{ai}-t{ti}");
                let where_ = format!("alpha {alpha}, t {t}");
                out.gates.push(match residue_gap(op, &d, &f, t, alpha) {
                    Ok(v) => Gate::at_most(format!("residue-{tag}"), v, RESIDUE_THRESHOLD).with_detail(&where_),
                    Err(e) => Gate::failed(format!("residue-{tag}"), format!("{where_}: {e}")),
                });
                match contour_gap(op, &d, &f, t, alpha, &sector) {
                    Ok((v, spec, q)) => {
                        out.gates.push(Gate::at_most(format!("contour-{tag}"), v, CONTOUR_THRESHOLD).with_detail(&where_));
                        let rows: Vec<Vec<CsvCell>> = q
                            .trace
                            .iter()
                            .map(|p| vec![p.segment.into(), p.lambda[0].into(), p.lambda[1].into(), p.integrand_norm.into()])
                            .collect();
                        out.artifacts.push(Artifact::csv(
                            format!("trace-{tag}.csv"),
                            csv_table(&["segment", "re", "im", "integrand_norm"], &rows),
                        ));
                        out.artifacts.push(Artifact::json(
                            format!("contour-{tag}.json"),
                            &json!({
                                "contour": spec.to_json_value(),
                                "panels_used": q.panels_used,
                                "panel_error_estimate": q.panel_error_estimate,
                                "truncation_bound": q.truncation_bound,
                                "relative_gap": v,
                            }),
                        ));
                    }
                    // No admissible contour: the identity's hypotheses fail for this alpha.
                    Err(lidskii_core::Error::Contour(m)) => {
                        out.gates.push(Gate::skipped(format!("contour-{tag}"), format!("{where_}: {m}")))
                    }
                    Err(e) => out.gates.push(Gate::failed(format!("contour-{tag}"), format!("{where_}: {e}"))),
                }
            }
        }
        let probes = res.params.probes.unwrap_or(RAY_PROBES);
        out.gates.push(match ray_bound_check(op, probes) {
            None => Gate::skipped(format!("ray-bound-{i}"), "numerical range not in a half-plane"),
            Some(Ok(v)) => Gate::at_most(format!("ray-bound-{i}"), v, BOUND_SLACK),
            Some(Err(e)) => Gate::failed(format!("ray-bound-{i}"), e.to_string()),
        });
    }
    out
}

fn check_gate(c: &evolution::CheckOutcome) -> Gate {
    let status = match c.status {
        CheckStatus::Pass => GateStatus::Pass,
        CheckStatus::Fail => GateStatus::Fail,
        CheckStatus::Skipped => GateStatus::Skipped,
    };
    let detail = match (&c.reason, c.label) {
        (Some(r), _) => Some(r.clone()),
        (None, Some(l)) => Some(l.to_string()),
        _ => None,
    };
    Gate { name: c.name.to_string(), status, value: c.value, threshold: c.threshold, detail }
}

fn series_csv(header: &[&str], series: &[[f64; 2]]) -> String {
    let rows: Vec<Vec<CsvCell>> = series.iter().map(|r| vec![r[0].into(), r[1].into()]).collect();
    csv_table(header, &rows)
}

fn evolve(res: &Resolved) -> TaskOutcome {
    let mut out = TaskOutcome::default();
    let w = &res.operators[0];
    let h = probe_vector(res, 0, w.dimension);
    let alpha = res.params.alpha.unwrap_or(2.0);
    let grid = if res.params.t_grid.is_empty() { DEFAULT_T_GRID.to_vec() } else { res.params.t_grid.clone() };
    let backend = res.params.backend.as_deref().map_or(Ok(Backend::Contour), Backend::parse).expect("validated");
    let tol = res.params.tolerance.unwrap_or(1e-10);
    let run = |out: &mut TaskOutcome| -> lidskii_core::Result<()> {
        let problem = CauchyProblem::new(w.clone(), h.clone(), alpha)?;
        let traj = evolution::solve_cauchy(&problem, &grid, backend, tol)?;
        out.artifacts.push(Artifact::csv("trajectory.csv", traj.to_csv()));
        let norms: Vec<[f64; 2]> = traj.t.iter().zip(traj.norms()).map(|(t, n)| [*t, n]).collect();
        out.artifacts.push(Artifact::csv("norms.csv", series_csv(&["t", "norm"], &norms)));
        for other in [Backend::Series, Backend::Eigen] {
            if other == backend {
                continue;
            }
            let name = format!("agreement-{}", other.name());
            match evolution::solve_cauchy(&problem, &grid, other, tol) {
                Ok(b) => out.gates.push(Gate::at_most(name, evolution::trajectory_difference(&traj, &b)?, BACKEND_THRESHOLD)),
                Err(e) if other == Backend::Eigen => out.gates.push(Gate::skipped(name, e.to_string())),
                Err(e) => return Err(e),
            }
        }
        let report = evolution::verify_solution(&problem, &traj, Checks::default())?;
        out.gates.extend(report.checks.iter().map(check_gate));
        if let Some(c) = report.get("initial") {
            out.artifacts.push(Artifact::csv("initial-schedule.csv", series_csv(&["t", "distance"], &c.series)));
        }
        if let Some(c) = report.get("residual") {
            out.artifacts.push(Artifact::csv("residual.csv", series_csv(&["t", "residual"], &c.series)));
        }
        out.artifacts.push(Artifact::json(
            "evolve.json",
            &json!({
                "label": w.label,
                "alpha": alpha,
                "backend": backend.name(),
                "h": pairs(&h),
                "condition": problem.condition,
                "sector_a": problem.sector_a,
                "verification": report,
            }),
        ));
        Ok(())
    };
    if let Err(e) = run(&mut out) {
        out.gates.push(Gate::failed("evolve", e.to_string()));
    }
    out
}

/// Runs `f`, turning an error into a failed gate.
fn guarded(name: &str, f: impl FnOnce() -> lidskii_core::Result<Gate>) -> Gate {
    f().unwrap_or_else(|e| Gate::failed(name, e.to_string()))
}

fn seeded_vector(seed: u64, dim: usize) -> CVector {
    linalg::random_cvector(&mut linalg::seeded_rng(seed), dim)
}

/// Fixed 6x6 suite covering every identity and bound, drawn from `seed`.
pub fn full_verify(seed: u64) -> TaskOutcome {
    let mut out = TaskOutcome::default();
    let dim = 6;
    let s = |k: u64| seed.wrapping_mul(1_000).wrapping_add(k);

    out.gates.push(guarded("residue-identity", || {
        let mut worst: f64 = 0.0;
        for k in 0..10 {
            let op = families::structured_operator(s(k), dim, 3)?;
            let d = spectral::full_decomposition(&op, DEFAULT_RANK_TOLERANCE)?;
            worst = worst.max(residue_gap(&op, &d, &seeded_vector(s(100 + k), dim), 0.7, 1.5)?);
        }
        Ok(Gate::at_most("residue-identity", worst, RESIDUE_THRESHOLD))
    }));

    out.gates.push(guarded("contour-series", || {
        let mut worst: f64 = 0.0;
        for k in 0..3 {
            let op = families::sectorial_operator(s(200 + k), dim, 0.5)?;
            let d = spectral::full_decomposition(&op, DEFAULT_RANK_TOLERANCE)?;
            let sector = op.estimate_sector(SECTOR_SAMPLES, None, s(200 + k))?;
            let f = seeded_vector(s(300 + k), dim);
            for alpha in [1.5, 2.0] {
                for t in [0.1, 1.0] {
                    worst = worst.max(contour_gap(&op, &d, &f, t, alpha, &sector)?.0);
                }
            }
        }
        Ok(Gate::at_most("contour-series", worst, CONTOUR_THRESHOLD))
    }));

    let mut schedule_rows = Vec::new();
    out.gates.push(guarded("initial-limit", || {
        let mut ok = true;
        let mut worst: f64 = 0.0;
        let ts: Vec<f64> = INITIAL_SCHEDULE.iter().rev().copied().collect();
        for k in 0..3 {
            let b = families::diagonal_family(s(400 + k), dim, 0.2, 1.0, 0.6)?;
            let problem = CauchyProblem::new(b.inverse()?, seeded_vector(s(500 + k), dim), 2.0)?;
            let traj = evolution::solve_cauchy(&problem, &ts, Backend::Series, 1e-12)?;
            let dist: Vec<f64> = traj.values.iter().map(|u| (u - &problem.h).norm() / problem.h.norm()).collect();
            ok &= dist.windows(2).all(|w| w[0] < w[1]);
            worst = worst.max(dist[0]);
            for (t, d) in ts.iter().zip(&dist) {
                schedule_rows.push(vec![(k as usize).into(), (*t).into(), (*d).into()]);
            }
        }
        let mut g = Gate::at_most("initial-limit", worst, INITIAL_THRESHOLD);
        if !ok {
            g.status = GateStatus::Fail;
            g.detail = Some("distance not monotone along the schedule".into());
        }
        Ok(g)
    }));
    out.artifacts.push(Artifact::csv("initial-schedule.csv", csv_table(&["problem", "t", "distance"], &schedule_rows)));

    out.gates.push(guarded("abel-polynomials", || {
        let mut rng = linalg::seeded_rng(s(600));
        let mut worst: f64 = 0.0;
        for _ in 0..20 {
            let alpha = rng.gen_range(1.1..3.0);
            let zeta = C64::from_polar(rng.gen_range(0.5..2.0), rng.gen_range(-0.4..0.4));
            let t = rng.gen_range(0.05..1.5);
            for m in 0..=5 {
                let p = summation::eval_abel_polynomial(m, alpha, zeta, t)?;
                let o = summation::abel_polynomial_by_differences(m, alpha, zeta, t, 256);
                worst = worst.max((p - o).norm() / o.norm());
            }
        }
        Ok(Gate::at_most("abel-polynomials", worst, ABEL_THRESHOLD))
    }));

    let mut norm_rows = String::new();
    out.gates.push(guarded("coefficient-limit", || {
        let op = families::structured_operator(s(700), dim, 3)?;
        let d = spectral::full_decomposition(&op, DEFAULT_RANK_TOLERANCE)?;
        let raw = spectral::raw_coefficients(&d, &seeded_vector(s(701), dim))?;
        let ratios: Vec<Vec<f64>> = [1e-2, 1e-3, 1e-4]
            .iter()
            .map(|&t| {
                let c = summation::regularized_coefficients(&d, &raw, t, 1.5)?;
                Ok(c.values.iter().zip(&raw).map(|(a, b)| (a - b).norm() / t).collect())
            })
            .collect::<lidskii_core::Result<_>>()?;
        let spread = (0..raw.len())
            .map(|n| {
                let col = ratios.iter().map(|r| r[n]);
                col.clone().fold(0.0, f64::max) / col.fold(f64::INFINITY, f64::min)
            })
            .fold(1.0, f64::max);
        let c = summation::regularized_coefficients(&d, &raw, 0.1, 1.5)?;
        let moduli: Vec<f64> = d.groups.iter().map(|g| g.lambda.norm()).collect();
        let sched = summation::group_schedule(&d, summation::default_tau(1.0 / 1.5), summation::default_k(&moduli))?;
        norm_rows = group_norms_csv(&summation::grouped_partial_sums(&d, &c, &sched)?.group_norms);
        Ok(Gate::at_most("coefficient-limit", spread, 2.0))
    }));
    out.artifacts.push(Artifact::csv("group-norms.csv", norm_rows));

    out.gates.push(guarded("ray-bounds", || {
        let mut worst = f64::NEG_INFINITY;
        for k in 0..20 {
            let op = families::sectorial_operator(s(800 + k), dim, 0.3 + 0.05 * (k % 10) as f64)?;
            match ray_bound_check(&op, RAY_PROBES) {
                Some(r) => worst = worst.max(r?),
                None => return Ok(Gate::failed("ray-bounds", "sectorial matrix without a half-plane range")),
            }
        }
        Ok(Gate::at_most("ray-bounds", worst, BOUND_SLACK))
    }));

    let mut circle_rows = Vec::new();
    out.gates.push(guarded("circle-bounds", || {
        let ops = [
            families::diagonal_family(s(900), dim, 0.2, 1.0, 0.5)?,
            families::structured_operator(s(901), dim, 3)?,
            families::sectorial_operator(s(902), dim, 0.5)?,
            families::normal_operator(s(903), &[C64::new(0.9, 0.1), C64::new(0.5, -0.2), C64::new(0.25, 0.0)])?,
            families::jordan_block_operator(s(904), C64::new(0.4, 0.1), 3)?,
        ];
        let mut unsatisfied = 0;
        for op in &ops {
            let top = op.characteristic_numbers().iter().map(|l| l.norm()).fold(0.0, f64::max);
            for big_r in [0.5 * top, 2.0 * top, 20.0 * top] {
                let b = exponent::circle_bound_with(op, big_r, 0.5, 1.0, 128, 32)?;
                unsatisfied += usize::from(!b.satisfied);
                circle_rows.push(json!({ "label": op.label, "R": big_r, "bound": b }));
            }
        }
        Ok(Gate::flag("circle-bounds", unsatisfied == 0, format!("{unsatisfied} of 15 rings without a certified circle")))
    }));
    out.artifacts.push(Artifact::json("circle-bounds.json", &circle_rows));

    out.gates.push(guarded("gamma-tail", || {
        let mut worst: f64 = 0.0;
        for alpha in [1.5, 2.0, 3.0] {
            let limit = 0.9 * PI / (2.0 * alpha);
            for m in [0.5, 1.0, 2.0, 4.0, 8.0] {
                for k in -4..=4 {
                    let g = evolution::gamma_tail_identity(C64::from_polar(m, limit * k as f64 / 4.0), alpha, 1e-10)?;
                    worst = worst.max(g.rel_err);
                }
            }
        }
        Ok(Gate::at_most("gamma-tail", worst, GAMMA_THRESHOLD))
    }));

    let problems = [
        ("diagonal", families::diagonal_family(s(1000), dim, 0.5, 3.0, 0.3)),
        ("jordan", families::jordan_block_operator(s(1001), C64::new(2.0, 0.3), 3)),
    ];
    for (name, w) in problems {
        let residual = format!("cauchy-residual-{name}");
        let agreement = format!("backend-agreement-{name}");
        let run = || -> lidskii_core::Result<(Gate, Gate)> {
            let w = w?;
            let h = seeded_vector(s(1100), w.dimension);
            let problem = CauchyProblem::new(w, h, 2.0)?;
            let series = evolution::solve_cauchy(&problem, &DEFAULT_T_GRID, Backend::Series, 1e-12)?;
            let mut gap = evolution::trajectory_difference(
                &evolution::solve_cauchy(&problem, &DEFAULT_T_GRID, Backend::ContourGammaA, 1e-12)?,
                &series,
            )?;
            if name == "diagonal" {
                for b in [Backend::Contour, Backend::Eigen] {
                    gap = gap.max(evolution::trajectory_difference(
                        &evolution::solve_cauchy(&problem, &DEFAULT_T_GRID, b, 1e-12)?,
                        &series,
                    )?);
                }
            }
            let checks = Checks { residual: true, initial: false, contraction: false };
            let report = evolution::verify_solution(&problem, &series, checks)?;
            let r = report.get("residual").and_then(|c| c.value).unwrap_or(f64::NAN);
            Ok((Gate::at_most(&residual, r, RESIDUAL_THRESHOLD), Gate::at_most(&agreement, gap, BACKEND_THRESHOLD)))
        };
        match run() {
            Ok((a, b)) => out.gates.extend([a, b]),
            Err(e) => out.gates.extend([Gate::failed(&residual, e.to_string()), Gate::failed(&agreement, e.to_string())]),
        }
    }

    out.gates.push(guarded("contraction", || {
        let mut ok = true;
        for k in 0..4 {
            let vals: Vec<C64> =
                (0..dim).map(|j| C64::from_polar(0.5 + 0.4 * j as f64, 0.7 * (j as f64 - 2.5) / 2.5)).collect();
            let problem = CauchyProblem::new(families::normal_operator(s(1200 + k), &vals)?, seeded_vector(s(1300 + k), dim), 2.0)?;
            let traj = evolution::solve_cauchy(&problem, &DEFAULT_T_GRID, Backend::Eigen, 1e-12)?;
            let n = traj.norms();
            ok &= n.windows(2).all(|w| w[1] <= w[0] * (1.0 + 1e-12));
        }
        Ok(Gate::flag("contraction", ok, "surrogate: spectra inside the decay sector"))
    }));

    out.gates.push(guarded("exponent-recovery", || {
        let mut worst: f64 = 0.0;
        let mut genus_ok = true;
        for rho in [0.5, 1.0, 2.0] {
            let seq = ModulusSequence::Model(SequenceModel::Power { exponent: 1.0 / rho });
            let r = exponent::convergence_exponent(&seq, 1_000_000)?;
            worst = worst.max((r.rho_hat - rho).abs());
            genus_ok &= r.genus == rho.floor() as u32;
        }
        let mut g = Gate::at_most("exponent-recovery", worst, EXPONENT_TOLERANCE);
        if !genus_ok {
            g.status = GateStatus::Fail;
            g.detail = Some("genus differs from the series oracle".into());
        }
        Ok(g)
    }));

    out
}
