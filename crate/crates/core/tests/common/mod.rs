#![allow(dead_code)]

use koopman_spectra::moments::{
    ac_moments, atomic_moments, cantor_moments, combine, AtomList, PiecewiseDensity,
};
use koopman_spectra::{Complex64, HermitianToeplitz, MomentSequence, Trajectory};
use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

pub fn cis(turns: f64) -> Complex64 {
    Complex64::from_polar(1.0, 2.0 * std::f64::consts::PI * turns)
}

pub fn moments_from(values: &[f64]) -> impl Fn(usize) -> MomentSequence + '_ {
    move |n| {
        let mut v = vec![c(0.0, 0.0); n + 1];
        for (k, x) in values.iter().enumerate().take(n + 1) {
            v[k] = c(*x, 0.0);
        }
        MomentSequence::new(v).unwrap()
    }
}

pub fn cat_f1(n: usize) -> MomentSequence {
    moments_from(&[1.25, 0.5])(n)
}

pub fn cat_f2(n: usize) -> MomentSequence {
    moments_from(&[21.0 / 16.0, 0.625, 0.25])(n)
}

pub fn cat_f1_density(t: f64) -> f64 {
    1.25 + (2.0 * std::f64::consts::PI * t).cos()
}

pub fn ex_atoms() -> AtomList {
    AtomList::new(vec![
        (0.0, 0.05),
        (1.0, 0.05),
        (0.2, 0.1),
        (0.6, 0.1),
        (0.8, 0.1),
    ])
    .unwrap()
}

pub fn ex_density() -> PiecewiseDensity {
    PiecewiseDensity::indicator(0.3, 0.7, 4.0).unwrap()
}

/// Atoms plus the box density.
pub fn ac_at(n: usize) -> MomentSequence {
    combine(
        &atomic_moments(&ex_atoms(), n),
        &ac_moments(&ex_density(), n),
        1,
    )
    .unwrap()
}

/// Atoms, box density and the Cantor measure.
pub fn artif(n: usize) -> MomentSequence {
    combine(&ac_at(n), &cantor_moments(n), 1).unwrap()
}

pub fn single_atom(theta: f64, w: f64, n: usize) -> MomentSequence {
    atomic_moments(&AtomList::new(vec![(theta, w)]).unwrap(), n)
}

/// CDF of the atoms plus box density at an interior point.
pub fn ac_at_cdf(t: f64) -> f64 {
    let mut f = 0.05 + 4.0 * (t - 0.3).clamp(0.0, 0.4);
    for a in [0.2, 0.6, 0.8] {
        if a <= t {
            f += 0.1;
        }
    }
    f
}

pub fn artif_cdf(t: f64) -> f64 {
    ac_at_cdf(t) + cantor_cdf(t)
}

/// Cantor function by ternary digit expansion.
pub fn cantor_cdf(t: f64) -> f64 {
    if t <= 0.0 {
        return 0.0;
    }
    if t >= 1.0 {
        return 1.0;
    }
    let (mut x, mut s, mut scale) = (t, 0.0, 0.5);
    for _ in 0..60 {
        x *= 3.0;
        if x < 1.0 {
        } else if x < 2.0 {
            return s + scale;
        } else {
            s += scale;
            x -= 2.0;
        }
        scale *= 0.5;
    }
    s
}

/// Labelled moment sequences used across the integration tests.
pub fn corpus(n: usize) -> Vec<(&'static str, MomentSequence)> {
    vec![
        ("lebesgue", MomentSequence::lebesgue(n, 1.0)),
        ("cat_f1", cat_f1(n)),
        ("cat_f2", cat_f2(n)),
        ("ac_at", ac_at(n)),
        ("artif", artif(n)),
        ("atom", single_atom(0.37, 0.8, n)),
    ]
}

/// Members whose measure has infinite support.
pub fn infinite_support(n: usize) -> Vec<(&'static str, MomentSequence)> {
    corpus(n)
        .into_iter()
        .filter(|(name, _)| *name != "atom")
        .collect()
}

/// Moments of a few random atoms plus a Lebesgue ridge, so the Toeplitz
/// matrix is positive definite with eigenvalues at least the ridge.
pub fn random_psd_moments(r: &mut impl Rng, n: usize) -> MomentSequence {
    let count = r.gen_range(1..=5);
    let atoms: Vec<(f64, f64)> = (0..count)
        .map(|_| (r.gen_range(0.0..1.0), r.gen_range(0.1..1.0)))
        .collect();
    let ridge = r.gen_range(0.05..1.0);
    combine(
        &atomic_moments(&AtomList::new(atoms).unwrap(), n),
        &MomentSequence::lebesgue(n, ridge),
        1,
    )
    .unwrap()
}

pub fn dense(t: &HermitianToeplitz) -> DMatrix<Complex64> {
    let n = t.dim();
    DMatrix::from_fn(n, n, |j, l| {
        let d = j as isize - l as isize;
        let v = t.first_column()[d.unsigned_abs()];
        if d >= 0 {
            v
        } else {
            v.conj()
        }
    })
}

pub fn dense_moment_matrix(m: &MomentSequence) -> DMatrix<Complex64> {
    dense(&HermitianToeplitz::from_moments(m))
}

pub fn min_eigenvalue(a: &DMatrix<Complex64>) -> f64 {
    a.clone()
        .symmetric_eigenvalues()
        .iter()
        .copied()
        .fold(f64::INFINITY, f64::min)
}

pub fn max_abs_diff(a: &DMatrix<Complex64>, b: &DMatrix<Complex64>) -> f64 {
    (a - b).iter().map(|z| z.norm()).fold(0.0, f64::max)
}

pub fn norm1(a: &DMatrix<Complex64>) -> f64 {
    a.column_iter()
        .map(|col| col.iter().map(|z| z.norm()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// `y_i = Σ_j c_j e^{i2πω_j i}`.
pub fn rotation_mixture(parts: &[(Complex64, f64)], m: usize) -> Trajectory {
    let samples = (0..m)
        .map(|i| parts.iter().map(|&(a, w)| a * cis(w * i as f64)).sum())
        .collect();
    Trajectory::new(samples, 1.0).unwrap()
}

pub fn rotation(omega: f64, m: usize) -> Trajectory {
    rotation_mixture(&[(c(1.0, 0.0), omega)], m)
}

pub fn max_dev(a: &[Complex64], b: &[Complex64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
}

pub fn rms(a: &[Complex64]) -> f64 {
    (a.iter().map(|z| z.norm_sqr()).sum::<f64>() / a.len() as f64).sqrt()
}
