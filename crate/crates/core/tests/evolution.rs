use lidskii_core::evolution::{
    Backend, CauchyProblem, CheckStatus, Checks, INITIAL_SCHEDULE, gamma_tail_identity, rl_fractional_derivative,
    solve_cauchy, trajectory_difference, verify_solution,
};
use lidskii_core::families;
use lidskii_core::linalg::{self, C64, CVector};
use proptest::prelude::*;
use std::f64::consts::PI;

const GRID: [f64; 6] = [0.05, 0.1, 0.2, 0.4, 0.7, 1.0];

fn probe(seed: u64, n: usize) -> CVector {
    let mut rng = linalg::seeded_rng(seed);
    linalg::random_cvector(&mut rng, n)
}

#[test]
fn diagonal_problem_verifies() {
    let w = families::diagonal_family(1, 5, 0.5, 3.0, 0.5).unwrap();
    let p = CauchyProblem::new(w, probe(1, 5), 2.0).unwrap();
    let eig = solve_cauchy(&p, &GRID, Backend::Eigen, 1e-12).unwrap();
    let ser = solve_cauchy(&p, &GRID, Backend::Series, 1e-12).unwrap();
    let con = solve_cauchy(&p, &GRID, Backend::Contour, 1e-12).unwrap();
    assert!(trajectory_difference(&ser, &eig).unwrap() <= 1e-6);
    assert!(trajectory_difference(&con, &eig).unwrap() <= 1e-6);
    let rep = verify_solution(&p, &con, Checks::default()).unwrap();
    for c in &rep.checks {
        assert_eq!(c.status, CheckStatus::Pass, "{c:?}");
    }
}

#[test]
fn jordan_block_problem_verifies() {
    let w = families::jordan_block_operator(2, C64::new(2.0, 0.3), 3).unwrap();
    let p = CauchyProblem::new(w, probe(2, 3), 2.0).unwrap();
    let ser = solve_cauchy(&p, &GRID, Backend::Series, 1e-12).unwrap();
    let con = solve_cauchy(&p, &GRID, Backend::ContourGammaA, 1e-12).unwrap();
    assert!(trajectory_difference(&con, &ser).unwrap() <= 1e-6);
    let rep = verify_solution(&p, &ser, Checks { residual: true, initial: true, contraction: false }).unwrap();
    assert!(rep.passed(), "{rep:?}");
    assert!(rep.get("residual").unwrap().value.unwrap() <= 1e-4);
}

#[test]
fn eigen_backend_rejects_non_normal() {
    let w = families::jordan_block_operator(2, C64::new(2.0, 0.3), 2).unwrap();
    let p = CauchyProblem::new(w, probe(2, 2), 2.0).unwrap();
    assert!(solve_cauchy(&p, &GRID, Backend::Eigen, 1e-12).is_err());
}

#[test]
fn initial_condition_schedule_on_diagonal_family() {
    for seed in 0..5 {
        let b = families::diagonal_family(seed, 6, 0.2, 1.0, 0.6).unwrap();
        let w = b.inverse().unwrap();
        let p = CauchyProblem::new(w, probe(seed, 6), 2.0).unwrap();
        let tr = solve_cauchy(&p, &INITIAL_SCHEDULE.iter().rev().copied().collect::<Vec<_>>(), Backend::Series, 1e-12).unwrap();
        let d: Vec<f64> = tr.values.iter().map(|u| (u - &p.h).norm()).collect();
        assert!(d.windows(2).all(|w| w[0] < w[1]), "{d:?}");
        assert!(d[0] <= 1e-3 * p.h.norm());
    }
}

#[test]
fn contraction_on_decay_sector_family() {
    for seed in 0..4 {
        let vals: Vec<C64> = (0..6).map(|k| C64::from_polar(0.5 + 0.4 * k as f64, 0.7 * (k as f64 - 2.5) / 2.5)).collect();
        let w = families::normal_operator(seed, &vals).unwrap();
        let p = CauchyProblem::new(w, probe(seed, 6), 2.0).unwrap();
        let tr = solve_cauchy(&p, &GRID, Backend::Eigen, 1e-12).unwrap();
        let n = tr.norms();
        assert!(n.windows(2).all(|w| w[1] <= w[0] + 1e-14), "{n:?}");
    }
}

#[test]
fn rejects_alpha_at_most_one() {
    let w = families::diagonal_family(1, 3, 0.5, 3.0, 0.2).unwrap();
    assert!(CauchyProblem::new(w, probe(0, 3), 1.0).is_err());
}

#[test]
fn rl_derivative_is_linear() {
    let (a, b) = (C64::new(0.7, -0.2), C64::new(-1.1, 0.4));
    let f = |t: f64| Ok(CVector::from_element(1, C64::new((-t).exp(), 0.0)));
    let g = |t: f64| Ok(CVector::from_element(1, (-C64::new(2.0, 0.5) * t).exp()));
    let h = |t: f64| Ok(f(t)? * a + g(t)? * b);
    let (df, dg, dh) = (
        rl_fractional_derivative(&f, 2.0, 0.4, 1.0, 1e-10).unwrap().value,
        rl_fractional_derivative(&g, 2.0, 0.4, 1.0, 1e-10).unwrap().value,
        rl_fractional_derivative(&h, 2.0, 0.4, 1.0, 1e-10).unwrap().value,
    );
    assert!((dh - (df * a + dg * b)).norm() < 1e-8);
}

#[test]
fn gamma_tail_probe_set() {
    for alpha in [1.5, 2.0, 3.0] {
        let limit = 0.9 * PI / (2.0 * alpha);
        for m in [0.5, 1.0, 2.0, 4.0, 8.0] {
            for k in -4..=4 {
                let lambda = C64::from_polar(m, limit * k as f64 / 4.0);
                let g = gamma_tail_identity(lambda, alpha, 1e-8).unwrap();
                assert!(g.rel_err <= 1e-8, "alpha {alpha} lambda {lambda}: {}", g.rel_err);
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]
    #[test]
    fn series_and_eigen_agree_on_diagonal(seed in 0u64..1000, alpha in 1.2f64..3.0, t in 0.01f64..2.0) {
        let w = families::diagonal_family(seed, 4, 0.3, 4.0, 0.9 * PI / (2.0 * alpha)).unwrap();
        let p = CauchyProblem::new(w, probe(seed, 4), alpha).unwrap();
        let a = solve_cauchy(&p, &[t], Backend::Series, 1e-12).unwrap();
        let b = solve_cauchy(&p, &[t], Backend::Eigen, 1e-12).unwrap();
        prop_assert!(trajectory_difference(&a, &b).unwrap() < 1e-10);
        // |e^{-w^alpha t}| <= 1 in the decay sector.
        prop_assert!(b.values[0].norm() <= p.h.norm() * (1.0 + 1e-12));
    }
}
