mod common;

use common::*;
use koopman_spectra::cd_kernel::{build_evaluator, f_zeta, zeta};
use koopman_spectra::moments::estimate_moments;
use koopman_spectra::weak_approx::*;
use koopman_spectra::MomentSequence;
use proptest::prelude::*;
use rand::Rng;

fn indicator(m: &MomentSequence, bins: usize) -> SingularityIndicator {
    let n = m.order();
    let fz = f_zeta(&zeta(&build_evaluator(m).unwrap(), 10 * n + 1).unwrap());
    let cs = CesaroDensity::new(m).unwrap();
    singularity_indicator(|t| cs.cdf(t).unwrap(), &fz, bins).unwrap()
}

#[test]
fn fejer_density_is_nonnegative() {
    for (name, m) in corpus(200) {
        let g = cesaro_density(&m, 4001).unwrap();
        assert!(g.min() >= -1e-10 * m.mass(), "{name}: {}", g.min());
    }
}

#[test]
fn fejer_density_of_estimates() {
    // The 1/(M−k) estimator is not a positive-definite sequence; rescaling
    // by (M−k)/M gives the biased one, which is, so positivity holds there and
    // the raw estimate stays within the rescaling error.
    let (mm, n) = (5000, 200);
    let tr = rotation_mixture(&[(c(1.0, 0.0), 0.3), (c(0.5, 0.5), 0.71)], mm);
    let raw = estimate_moments(&tr, n).unwrap();
    let biased = MomentSequence::new(
        raw.values()
            .iter()
            .enumerate()
            .map(|(k, v)| v * ((mm - k) as f64 / mm as f64))
            .collect(),
    )
    .unwrap();
    let g = cesaro_density(&biased, 4001).unwrap();
    assert!(g.min() >= -1e-10 * biased.mass(), "{}", g.min());
    let bound: f64 = (1..=n)
        .map(|k| {
            2.0 * (1.0 - k as f64 / (n + 1) as f64) * k as f64 / mm as f64 * raw.values()[k].norm()
        })
        .sum();
    assert!(cesaro_density(&raw, 4001).unwrap().min() >= -bound);
}

#[test]
fn cdf_endpoints_over_corpus() {
    for n in [10, 100, 1000] {
        for (name, m) in corpus(n) {
            assert_eq!(cesaro_cdf(&m, 0.0).unwrap(), 0.0);
            assert!(
                (cesaro_cdf(&m, 1.0).unwrap() - m.mass()).abs() <= 1e-12,
                "{name}"
            );
        }
    }
}

#[test]
fn cesaro_cdf_converges_weakly() {
    let points = [0.1, 0.45, 0.5, 0.55, 0.9];
    let mut last = f64::INFINITY;
    for n in [100, 300, 1000] {
        let cs = CesaroDensity::new(&ac_at(n)).unwrap();
        let err = points
            .iter()
            .map(|&t| (cs.cdf(t).unwrap() - ac_at_cdf(t)).abs())
            .fold(0.0, f64::max);
        assert!(err < last, "N={n}: {err} !< {last}");
        last = err;
    }
}

#[test]
fn quadrature_matches_corpus_moments() {
    let n = 100;
    for (name, m) in corpus(n) {
        let q = quadrature(&m, 10 * n).unwrap();
        assert!(q.residual() <= 1e-8, "{name}: {}", q.residual());
        assert!(q.weights().iter().all(|&w| w >= 0.0));
        let back = q.moments(n);
        let tol = 1e-6 * m.mass().max(1.0);
        assert!(max_dev(back.values(), m.values()) <= tol, "{name}");
        assert!((q.cdf(1.0) - q.total_mass()).abs() <= 1e-12);
        assert_eq!(q.cdf(0.0), q.weights()[0]);
    }
}

#[test]
fn quadrature_cdf_tracks_reference_at_moderate_order() {
    let n = 200;
    let q = quadrature(&artif(n), 10 * n).unwrap();
    let sup = (1..1000)
        .map(|k| k as f64 / 1000.0)
        .map(|t| (q.cdf(t) - artif_cdf(t)).abs())
        .fold(0.0, f64::max);
    assert!(sup <= 0.05, "{sup}");
}

#[test]
fn indicator_is_flat_for_cat_map() {
    let d = indicator(&cat_f1(100), 1000);
    assert!(d.max_abs() <= 0.1, "{}", d.max_abs());
}

#[test]
fn indicator_flags_atoms() {
    let d = indicator(&ac_at(1000), 1000);
    assert!(
        d.values()[d.bin_of(0.2)] > 1.0,
        "{}",
        d.values()[d.bin_of(0.2)]
    );
    for (t, v) in d.theta().iter().zip(d.values()) {
        if *t > 0.35 && *t + 0.001 < 0.55 {
            assert!(v.abs() <= 0.2, "θ={t}: {v}");
        }
    }
}

#[test]
fn indicator_is_exactly_zero_for_lebesgue() {
    let d = indicator(&MomentSequence::lebesgue(50, 1.0), 1000);
    assert!(d.values().iter().all(|&v| v == 0.0));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]
    #[test]
    fn cesaro_cdf_is_monotone(seed in 0u64..1000, n in 1usize..120) {
        let mut r = rng(seed);
        let m = random_psd_moments(&mut r, n);
        let cs = CesaroDensity::new(&m).unwrap();
        for _ in 0..1000 {
            let a: f64 = r.gen_range(0.0..1.0);
            let b: f64 = r.gen_range(0.0..1.0);
            let (lo, hi) = if a < b { (a, b) } else { (b, a) };
            prop_assert!(cs.cdf(lo).unwrap() <= cs.cdf(hi).unwrap() + 1e-12);
        }
    }
}
