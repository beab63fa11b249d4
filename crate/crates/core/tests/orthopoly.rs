mod common;

use common::*;
use koopman_spectra::dynamics::{cat_map_trajectory, CatMapState, CatObservable};
use koopman_spectra::moments::estimate_moments;
use koopman_spectra::orthopoly::*;
use koopman_spectra::{Complex64, Error, MomentSequence};
use nalgebra::DMatrix;
use proptest::prelude::*;

fn roots(m: &MomentSequence, n: usize) -> Vec<Complex64> {
    poly_roots(&monic_orthogonal(m, n).unwrap())
        .unwrap()
        .zeros()
        .to_vec()
}

/// Degeneracy must only be reported when the dense oracle agrees that the
/// moment matrix is not numerically positive definite.
fn assert_genuinely_degenerate(name: &str, m: &MomentSequence, n: usize) {
    let d = dense_moment_matrix(&m.truncate(n).unwrap());
    let ev = d.symmetric_eigenvalues();
    let hi = ev.iter().copied().fold(0.0, f64::max);
    let lo = ev.iter().copied().fold(f64::INFINITY, f64::min);
    assert!(
        lo <= 1e-12 * hi,
        "{name} n={n}: reported degenerate but λ_min = {lo:e}"
    );
}

#[test]
fn finite_section_determinant_vanishes_at_zeros() {
    for n in 1..=12 {
        for (name, m) in corpus(n) {
            let (u, p) = match (finite_section_matrix(&m, n), monic_orthogonal(&m, n)) {
                (Ok(u), Ok(p)) => (u, p),
                (_, Err(Error::BasisDegenerate { .. })) => {
                    assert_genuinely_degenerate(name, &m, n);
                    continue;
                }
                (Err(e), _) | (_, Err(e)) => panic!("{name}: {e}"),
            };
            let bound = 1e-6 * norm1(&u).powi(n as i32);
            for &z in poly_roots(&p).unwrap().zeros() {
                let a = DMatrix::from_diagonal_element(n, n, z) - &u;
                let det = a.lu().determinant().norm();
                assert!(det <= bound, "{name} n={n}: {det} > {bound}");
            }
        }
    }
}

#[test]
fn zeros_lie_inside_the_disk() {
    for n in [10, 50, 100] {
        for (name, m) in infinite_support(n) {
            match monic_orthogonal(&m, n) {
                Ok(p) => {
                    // The Cantor mixture has zeros within 1e-12 of its atoms at
                    // N = 100, so only strict containment is asserted there.
                    let margin = if name == "artif" { 0.0 } else { 1e-8 };
                    for z in poly_roots(&p).unwrap().zeros() {
                        assert!(z.norm() < 1.0 - margin, "{name} n={n}: |z| = {}", z.norm());
                    }
                }
                Err(Error::BasisDegenerate { .. }) => assert_genuinely_degenerate(name, &m, n),
                Err(e) => panic!("{name}: {e}"),
            }
        }
    }
}

fn arc_ratio(zeros: &[Complex64]) -> f64 {
    let mut counts = [0usize; 8];
    for z in zeros {
        let turns = z.arg() / (2.0 * std::f64::consts::PI);
        let t = turns - turns.floor();
        counts[((t * 8.0) as usize).min(7)] += 1;
    }
    let hi = *counts.iter().max().unwrap() as f64;
    let lo = *counts.iter().min().unwrap() as f64;
    hi / lo
}

#[test]
fn zeros_spread_toward_uniform() {
    let r20 = arc_ratio(&roots(&cat_f2(20), 20));
    let r100 = arc_ratio(&roots(&cat_f2(100), 100));
    assert!(r100 < r20, "{r100} !< {r20}");
}

#[test]
fn gram_identity_over_corpus() {
    for n in [1, 8, 32, 64] {
        for (name, m) in infinite_support(n) {
            let c = match orthonormal_basis(&m, n) {
                Ok(c) => c,
                Err(Error::BasisDegenerate { .. }) => {
                    assert_genuinely_degenerate(name, &m, n);
                    continue;
                }
                Err(e) => panic!("{name}: {e}"),
            };
            let t = dense_moment_matrix(&m);
            let ev = t.clone().symmetric_eigenvalues();
            let cond = ev.max() / ev.min();
            let g = c.matrix() * t * c.matrix().adjoint();
            let err = max_abs_diff(&g, &DMatrix::identity(n + 1, n + 1));
            assert!(
                err <= 1e-8f64.max(100.0 * f64::EPSILON * cond),
                "{name} n={n}: {err}"
            );
        }
    }
}

#[test]
fn monic_polynomial_is_orthogonal() {
    for (name, m) in infinite_support(16) {
        let p = monic_orthogonal(&m, 16).unwrap();
        let scale = dense_moment_matrix(&m).symmetric_eigenvalues().max();
        let mut full = p.coefficients().to_vec();
        full.push(c(1.0, 0.0));
        for j in 0..16 {
            // ⟨Φ, z^j⟩ = Σ_i φ_i m_{i−j}
            let s: Complex64 = full
                .iter()
                .enumerate()
                .map(|(i, a)| a * m.get(i as i64 - j as i64))
                .sum();
            assert!(s.norm() <= 1e-8 * scale, "{name} j={j}: {}", s.norm());
        }
    }
}

#[test]
fn finite_section_zeros_match_orthogonal_polynomial() {
    for n in [5, 20] {
        let exact = poly_roots(&char_poly(&finite_section_matrix(&cat_f2(n), n).unwrap())).unwrap();
        assert!(hausdorff_one_sided(exact.zeros(), &roots(&cat_f2(n), n)) <= 1e-6);
    }
}

#[test]
fn hankel_dmd_eigenvalues_track_estimated_zeros() {
    let n = 20;
    let tr = cat_map_trajectory(
        CatMapState::new(0.271, 0.828),
        100_000,
        &CatObservable::f2(),
    )
    .unwrap();
    let est = estimate_moments(&tr, n).unwrap();
    let dmd = poly_roots(&char_poly(&hankel_dmd(&tr, n).unwrap())).unwrap();
    let d = hausdorff_one_sided(dmd.zeros(), &roots(&est, n));
    assert!(d <= 0.05, "{d}");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]
    #[test]
    fn roots_are_recovered(parts in proptest::collection::vec((0.1..1.5f64, 0.0..1.0f64), 1..13)) {
        let want: Vec<Complex64> = parts.iter().map(|&(r, t)| cis(t) * r).collect();
        // Keep the instance well conditioned: distinct roots only.
        for i in 0..want.len() {
            for j in 0..i {
                prop_assume!((want[i] - want[j]).norm() > 0.05);
            }
        }
        let got = poly_roots(&MonicPolynomial::from_roots(&want)).unwrap();
        prop_assert!(hausdorff_one_sided(&want, got.zeros()) <= 1e-6);
        prop_assert!(hausdorff_one_sided(got.zeros(), &want) <= 1e-6);
    }
}
