use lidskii_core::contour::{self, ContourKind};
use lidskii_core::families;
use lidskii_core::linalg::{self, C64, CVector};
use lidskii_core::spectral::{self, DEFAULT_RANK_TOLERANCE};
use lidskii_core::summation;

fn probe(seed: u64, n: usize) -> CVector {
    let mut rng = linalg::seeded_rng(seed);
    linalg::random_cvector(&mut rng, n)
}

#[test]
fn residues_match_group_sums() {
    let start = std::time::Instant::now();
    let mut worst: f64 = 0.0;
    for seed in 0..10u64 {
        let dim = 4 + (seed as usize % 5);
        let op = families::structured_operator(seed, dim, 3).unwrap();
        let d = spectral::full_decomposition(&op, DEFAULT_RANK_TOLERANCE).unwrap();
        let f = probe(100 + seed, dim);
        let raw = spectral::raw_coefficients(&d, &f).unwrap();
        let c = summation::regularized_coefficients(&d, &raw, 0.7, 1.5).unwrap();
        for g in 0..d.groups.len() {
            let radius = contour::residue_radius(&d, g);
            let res = contour::residue_at_pole(&op, &f, 0.7, 1.5, &d, g, radius).unwrap();
            let sum = summation::eigen_group_sum(&d, &c.values, g).unwrap();
            worst = worst.max((&res + &sum).norm() / sum.norm());
        }
    }
    assert!(worst <= 1e-8, "worst relative error {worst:.3e}");
    assert!(start.elapsed().as_secs_f64() < 10.0);
}

#[test]
fn contour_integral_equals_total_series() {
    for seed in 0..3u64 {
        let op = families::sectorial_operator(seed, 8, 0.5).unwrap();
        let sector = op.estimate_sector(256, None, seed).unwrap();
        let d = spectral::full_decomposition(&op, DEFAULT_RANK_TOLERANCE).unwrap();
        let f = probe(seed, 8);
        let raw = spectral::raw_coefficients(&d, &f).unwrap();
        for alpha in [1.5, 2.0] {
            for t in [0.1, 1.0] {
                let spec = contour::build_contour(ContourKind::GammaB, &op, &sector, t, alpha, 1e-12).unwrap();
                let q = contour::integrate_resolvent_functional(&op, &f, t, alpha, &spec).unwrap();
                let c = summation::regularized_coefficients(&d, &raw, t, alpha).unwrap();
                let series = d.reconstruct(&c.values).unwrap();
                let rel = (&q.value - &series).norm() / series.norm();
                assert!(rel <= 1e-6, "seed {seed} alpha {alpha} t {t}: {rel:.3e}");
            }
        }
    }
}

#[test]
fn two_chain_contour_matches_series() {
    let op = families::jordan_block_operator(5, C64::new(0.5, 0.1), 2).unwrap();
    let sector = op.estimate_sector(64, None, 0).unwrap();
    let d = spectral::full_decomposition(&op, DEFAULT_RANK_TOLERANCE).unwrap();
    let f = probe(9, 2);
    let raw = spectral::raw_coefficients(&d, &f).unwrap();
    let c = summation::regularized_coefficients(&d, &raw, 0.5, 2.0).unwrap();
    let series = d.reconstruct(&c.values).unwrap();
    let spec = contour::build_contour(ContourKind::GammaB, &op, &sector, 0.5, 2.0, 1e-12);
    // A Jordan block need not have a narrow numerical range; skip if the sector is too wide.
    if let Ok(spec) = spec {
        let q = contour::integrate_resolvent_functional(&op, &f, 0.5, 2.0, &spec).unwrap();
        assert!((&q.value - &series).norm() <= 1e-8 * series.norm());
    }
}
