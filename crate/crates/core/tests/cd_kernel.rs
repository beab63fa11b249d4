mod common;

use common::*;
use koopman_spectra::cd_kernel::*;
use koopman_spectra::moments::modify;
use koopman_spectra::{Complex64, MomentSequence};
use nalgebra::DVector;
use proptest::prelude::*;
use rand::Rng;

fn quadratic_form(m: &MomentSequence, p: &[Complex64]) -> f64 {
    let mut s = c(0.0, 0.0);
    for (j, pj) in p.iter().enumerate() {
        for (l, pl) in p.iter().enumerate() {
            s += pj * pl.conj() * m.get(j as i64 - l as i64);
        }
    }
    s.re
}

#[test]
fn christoffel_function_is_a_minimum() {
    let n = 10;
    let mut r = rng(21);
    for (name, m) in corpus(n) {
        let e = build_evaluator(&m).unwrap();
        let mt = modify(&m).unwrap();
        for _ in 0..100 {
            let t0: f64 = r.gen_range(0.0..1.0);
            let mut p: Vec<Complex64> = (0..=n)
                .map(|_| c(r.gen_range(-1.0..1.0), r.gen_range(-1.0..1.0)))
                .collect();
            let at: Complex64 = p
                .iter()
                .enumerate()
                .map(|(j, pj)| pj * cis(j as f64 * t0))
                .sum();
            p.iter_mut().for_each(|pj| *pj /= at);
            assert!(
                1.0 / e.kernel(t0) <= quadratic_form(&mt, &p) + 1e-10,
                "{name}"
            );
        }
    }
}

#[test]
fn christoffel_function_decreases_with_order() {
    for (name, m) in corpus(31) {
        let mut prev: Option<Vec<f64>> = None;
        for n in 1..=30 {
            let e = build_evaluator(&m.truncate(n).unwrap()).unwrap();
            let cur: Vec<f64> = (0..=200)
                .map(|i| 1.0 / e.kernel(i as f64 / 200.0))
                .collect();
            if let Some(p) = &prev {
                for (a, b) in cur.iter().zip(p) {
                    assert!(*a <= b + 1e-12, "{name} n={n}");
                }
            }
            prev = Some(cur);
        }
    }
}

#[test]
fn density_estimate_is_nonnegative() {
    for (name, m) in corpus(60) {
        let z = zeta(&build_evaluator(&m).unwrap(), 601).unwrap();
        assert!(z.min() >= -1e-10, "{name}: {}", z.min());
    }
}

#[test]
fn kernel_matches_dense_quadratic_form() {
    for n in 1..=8 {
        for (name, m) in corpus(n) {
            let e = build_evaluator(&m).unwrap();
            let inv = dense_moment_matrix(&modify(&m).unwrap())
                .try_inverse()
                .unwrap();
            let c0 = e.diag_sums()[0];
            assert!(c0.im.abs() <= 1e-10 * c0.re);
            for i in 0..=20 {
                let t = i as f64 / 20.0;
                let psi = DVector::from_fn(n + 1, |j, _| cis(j as f64 * t));
                let k = (psi.adjoint() * &inv * &psi)[(0, 0)];
                assert!(k.im.abs() <= 1e-10 * c0.re, "{name}");
                assert!(
                    (e.kernel(t) - k.re).abs() <= 1e-10 * k.re,
                    "{name} n={n} t={t}"
                );
            }
        }
    }
}

#[test]
fn cat_map_density_is_recovered() {
    let m = cat_f1(100);
    let z = zeta(&build_evaluator(&m).unwrap(), 1001).unwrap();
    let dev = z
        .theta()
        .iter()
        .zip(z.values())
        .map(|(t, v)| (v - cat_f1_density(*t)).abs())
        .fold(0.0, f64::max);
    assert!(dev <= 0.1, "{dev}");
    let f = f_zeta(&z);
    assert!((f.values()[f.len() - 1] - 1.25).abs() <= 0.05);
}

#[test]
fn split_boundary_atom_rejoins() {
    let e = build_evaluator(&ac_at(1000)).unwrap();
    for t in [0.0, 0.2, 0.6, 0.8, 1.0] {
        assert!(
            (e.atom_at(t) - 0.1).abs() <= 0.02,
            "θ={t}: {}",
            e.atom_at(t)
        );
    }
    assert!(e.atom_at(0.45).abs() <= 0.01);
}

#[test]
fn lebesgue_atom_estimate_vanishes() {
    for n in [10, 100, 400] {
        let e = build_evaluator(&MomentSequence::lebesgue(n, 1.0)).unwrap();
        let a = atom_estimate(&e, 10 * n + 1).unwrap();
        let want = 1.0 / (n + 1) as f64;
        assert!(a.values().iter().all(|v| (v - want).abs() <= 1e-12));
        let z = zeta(&e, 10 * n + 1).unwrap();
        assert!(z.values().iter().all(|v| (v - 1.0).abs() <= 1e-12));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]
    #[test]
    fn single_atom_weight_is_exact(theta in 0.0..1.0f64, w in 0.01..5.0f64, n in 1usize..200) {
        let e = build_evaluator(&single_atom(theta, w, n)).unwrap();
        prop_assert!((e.atom_at(theta) - w).abs() <= 1e-8 * w.max(1.0));
    }
}
