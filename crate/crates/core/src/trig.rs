use std::f64::consts::TAU;

use num_complex::Complex64;

/// `exp(i 2π x)` with the argument reduced modulo one first, so integer
/// arguments give exactly `1`.
#[inline]
pub(crate) fn cis_turns(x: f64) -> Complex64 {
    let r = x - x.round();
    if r == 0.0 {
        return Complex64::new(1.0, 0.0);
    }
    let (s, c) = (TAU * r).sin_cos();
    Complex64::new(c, s)
}

/// `exp(i 2π θ k)` reduced as `frac(θ k)`.
#[inline]
pub(crate) fn cis_freq(theta: f64, k: i64) -> Complex64 {
    cis_turns(theta * k as f64)
}

/// Evaluates the real trigonometric sum `c_0 + 2 Re Σ_{k≥1} c_k e^{i2πθk}`
/// for a Hermitian coefficient family given by its nonnegative half.
pub(crate) fn hermitian_trig_sum(coeffs: &[Complex64], theta: f64) -> f64 {
    let mut acc = 0.0;
    for (k, c) in coeffs.iter().enumerate().skip(1) {
        let z = cis_freq(theta, k as i64);
        acc += c.re * z.re - c.im * z.im;
    }
    coeffs.first().map_or(0.0, |c| c.re) + 2.0 * acc
}
