//! Weakly convergent approximations of the spectral measure: the Cesàro
//! (Fejér-smoothed) density, a nonnegative quadrature on a uniform grid, and
//! the singularity indicator comparing CDF increments against `F_ζ`.

use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::GridFunction;
use crate::moments::MomentSequence;
use crate::nnls::{lawson_hanson_from, NnlsProblem, NnlsSolution};
use crate::trig::{cis_turns, hermitian_trig_sum};

/// Fejér-weighted Fourier coefficients `w_k = (1 − k/(N+1))·conj(m_k)`,
/// `k = 0..N`; negative indices are conjugates.
#[derive(Debug, Clone, PartialEq)]
pub struct CesaroDensity {
    coeffs: Vec<Complex64>,
}

impl CesaroDensity {
    pub fn new(m: &MomentSequence) -> Result<Self> {
        if m.is_modified() {
            return Err(Error::InvalidArgument(
                "Cesàro density expects unmodified moments".into(),
            ));
        }
        let np1 = (m.order() + 1) as f64;
        let coeffs = m
            .values()
            .iter()
            .enumerate()
            .map(|(k, v)| v.conj() * ((np1 - k as f64) / np1))
            .collect();
        Ok(Self { coeffs })
    }

    pub fn order(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coefficients(&self) -> &[Complex64] {
        &self.coeffs
    }

    /// `ρ_N^CS(θ)`.
    pub fn eval(&self, theta: f64) -> f64 {
        hermitian_trig_sum(&self.coeffs, theta)
    }

    /// Closed-form antiderivative `∫_0^t ρ_N^CS`.
    pub fn cdf(&self, t: f64) -> Result<f64> {
        if !(0.0..=1.0).contains(&t) {
            return Err(Error::InvalidArgument(format!("t = {t} outside [0, 1]")));
        }
        let mut acc = 0.0;
        for (k, w) in self.coeffs.iter().enumerate().skip(1) {
            let kf = k as f64;
            let z = (cis_turns(t * kf) - 1.0) / Complex64::new(0.0, 2.0 * PI * kf);
            acc += (w * z).re;
        }
        Ok(self.coeffs[0].re * t + 2.0 * acc)
    }
}

impl CesaroDensity {
    /// `∫_a^b θ ρ_N^CS(θ) dθ` in closed form, for `0 ≤ a ≤ b ≤ 1`.
    pub fn first_moment(&self, a: f64, b: f64) -> f64 {
        // ∫ θ e^{iωθ} dθ = e^{iωθ}(θ/(iω) + 1/ω²)
        let anti = |t: f64, k: usize| {
            let w = 2.0 * PI * k as f64;
            cis_turns(t * k as f64) * (Complex64::new(0.0, -t / w) + 1.0 / (w * w))
        };
        let mut acc = 0.0;
        for (k, c) in self.coeffs.iter().enumerate().skip(1) {
            acc += (c * (anti(b, k) - anti(a, k))).re;
        }
        self.coeffs[0].re * 0.5 * (b * b - a * a) + 2.0 * acc
    }
}

/// `ρ_N^CS` sampled on a uniform grid of `size` points.
pub fn cesaro_density(m: &MomentSequence, size: usize) -> Result<GridFunction> {
    let c = CesaroDensity::new(m)?;
    GridFunction::sample(size, |t| c.eval(t))
}

/// `F_N^CS(t)`.
pub fn cesaro_cdf(m: &MomentSequence, t: f64) -> Result<f64> {
    CesaroDensity::new(m)?.cdf(t)
}

/// Nonnegative weights on `η_j = j/n_q`, `j = 0..=n_q`, with `γ_0 = γ_{n_q}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuadratureMeasure {
    n_q: usize,
    weights: Vec<f64>,
    /// Optimal value of the least-squares moment mismatch.
    residual: f64,
}

impl QuadratureMeasure {
    pub fn n_q(&self) -> usize {
        self.n_q
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn residual(&self) -> f64 {
        self.residual
    }

    pub fn location(&self, j: usize) -> f64 {
        j as f64 / self.n_q as f64
    }

    pub fn total_mass(&self) -> f64 {
        self.weights.iter().sum()
    }

    /// `Σ_j γ_j e^{i2πkη_j}`, `k = 0..=order`.
    pub fn moments(&self, order: usize) -> MomentSequence {
        let vals = (0..=order)
            .map(|k| {
                let mut s = Complex64::new(0.0, 0.0);
                for (j, g) in self.weights.iter().enumerate() {
                    if *g != 0.0 {
                        s += cis_turns((k * j % self.n_q) as f64 / self.n_q as f64) * g;
                    }
                }
                s
            })
            .collect();
        MomentSequence::new(vals).expect("nonnegative weights give a valid sequence")
    }

    /// Largest `j` with `j/n_q ≤ t`.
    fn last_index_at_or_below(&self, t: f64) -> Option<usize> {
        if t < 0.0 {
            return None;
        }
        let nq = self.n_q as f64;
        let mut j = ((t * nq).floor() as usize).min(self.n_q);
        while j < self.n_q && ((j + 1) as f64) / nq <= t {
            j += 1;
        }
        while j > 0 && (j as f64) / nq > t {
            j -= 1;
        }
        Some(j)
    }

    /// `Σ_{η_j ≤ t} γ_j`.
    pub fn cdf(&self, t: f64) -> f64 {
        match self.last_index_at_or_below(t) {
            Some(j) => self.weights[..=j].iter().sum(),
            None => 0.0,
        }
    }
}

struct QuadratureDesign {
    order: usize,
    n_q: usize,
    fft: Arc<dyn Fft<f64>>,
}

impl NnlsProblem for QuadratureDesign {
    fn rows(&self) -> usize {
        2 * self.order + 1
    }

    fn cols(&self) -> usize {
        self.n_q
    }

    fn column(&self, j: usize, out: &mut [f64]) {
        let n = self.order;
        let scale = if j == 0 { 2.0 } else { 1.0 };
        for k in 0..=n {
            let z = cis_turns((k * j % self.n_q) as f64 / self.n_q as f64);
            out[k] = scale * z.re;
            if k > 0 {
                out[n + k] = scale * z.im;
            }
        }
    }

    fn gradient(&self, r: &[f64], out: &mut [f64]) {
        let n = self.order;
        let mut buf = vec![Complex64::new(0.0, 0.0); self.n_q];
        buf[0] = Complex64::new(r[0], 0.0);
        for k in 1..=n {
            buf[k] = Complex64::new(r[k], -r[n + k]);
        }
        self.fft.process(&mut buf);
        for (o, v) in out.iter_mut().zip(&buf) {
            *o = v.re;
        }
        out[0] *= 2.0;
    }
}

/// NNLS on the grid `j/n_q`, warm-started from at most 2N equispaced nodes
/// whose columns are nearly orthogonal.
fn fit_weights(values: &[Complex64], n_q: usize, min_gain: f64) -> Result<NnlsSolution> {
    let n = values.len() - 1;
    let fft = FftPlanner::new().plan_fft_inverse(n_q);
    let design = QuadratureDesign { order: n, n_q, fft };
    let mut b = vec![0.0; 2 * n + 1];
    for (k, v) in values.iter().enumerate() {
        b[k] = v.re;
        if k > 0 {
            b[n + k] = v.im;
        }
    }
    let stride = n_q.div_ceil(2 * n.max(1)).max(1);
    let initial: Vec<usize> = (0..n_q).step_by(stride).collect();
    lawson_hanson_from(&design, &b, &initial, 10 * n_q, min_gain)
}

/// Fits nonnegative weights on the uniform grid `j/n_q` to `m_0..m_N`.
pub fn quadrature(m: &MomentSequence, n_q: usize) -> Result<QuadratureMeasure> {
    quadrature_with_gain(m, n_q, 0.0)
}

/// As [`quadrature`], but stops once no single node could lower the squared
/// residual by more than `min_gain` times the squared norm of the moments.
/// Useful when `m` is only approximately a moment sequence and the slow tail
/// of the active-set iteration buys nothing.
pub fn quadrature_with_gain(
    m: &MomentSequence,
    n_q: usize,
    min_gain: f64,
) -> Result<QuadratureMeasure> {
    if !(min_gain >= 0.0) {
        return Err(Error::InvalidArgument(format!(
            "min_gain must be nonnegative, got {min_gain}"
        )));
    }
    if m.is_modified() {
        return Err(Error::InvalidArgument(
            "quadrature expects unmodified moments".into(),
        ));
    }
    let n = m.order();
    if n_q <= n {
        return Err(Error::InvalidArgument(format!(
            "n_q = {n_q} must exceed N = {n}"
        )));
    }
    let sol = fit_weights(m.values(), n_q, min_gain)?;
    log::debug!(
        "quadrature: {} NNLS iterations, residual {:e}",
        sol.iterations,
        sol.residual_sq
    );
    let mut weights = Vec::with_capacity(n_q + 1);
    weights.extend_from_slice(&sol.x);
    weights.push(sol.x[0]);
    Ok(QuadratureMeasure {
        n_q,
        weights,
        residual: sol.residual_sq,
    })
}

/// `F_N^Q(t)`.
pub fn quadrature_cdf(q: &QuadratureMeasure, t: f64) -> f64 {
    q.cdf(t)
}

/// `Δ_N` on the bins `[k/B, (k+1)/B)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SingularityIndicator {
    /// Left bin edges.
    theta: Vec<f64>,
    values: Vec<f64>,
    /// Bins whose `F_ζ` increment hit the floor.
    flagged_bins: Vec<usize>,
}

impl SingularityIndicator {
    pub fn theta(&self) -> &[f64] {
        &self.theta
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn flagged_bins(&self) -> &[usize] {
        &self.flagged_bins
    }

    /// Index of the bin `[k/B, (k+1)/B)` containing `t`.
    pub fn bin_of(&self, t: f64) -> usize {
        let b = self.values.len();
        ((t * b as f64).floor() as usize).min(b - 1)
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |a, v| a.max(v.abs()))
    }
}

/// Ratio of increments of a CDF estimate to those of `F_ζ`, minus one.
pub fn singularity_indicator(
    f_est: impl Fn(f64) -> f64,
    f_zeta: &GridFunction,
    bins: usize,
) -> Result<SingularityIndicator> {
    if bins < 2 {
        return Err(Error::InvalidArgument(format!(
            "need at least 2 bins, got {bins}"
        )));
    }
    let edges: Vec<f64> = (0..=bins).map(|k| k as f64 / bins as f64).collect();
    let est: Vec<f64> = edges.iter().map(|&t| f_est(t)).collect();
    let zeta: Vec<f64> = edges.iter().map(|&t| f_zeta.interpolate(t)).collect();
    let mass = est[bins].abs().max(zeta[bins].abs());
    let floor = 1e-12 * mass.max(f64::MIN_POSITIVE);
    let mut values = Vec::with_capacity(bins);
    let mut flagged_bins = Vec::new();
    for k in 0..bins {
        let num = est[k + 1] - est[k];
        let mut den = zeta[k + 1] - zeta[k];
        if den < floor {
            den = floor;
            flagged_bins.push(k);
        }
        values.push(num / den - 1.0);
    }
    Ok(SingularityIndicator {
        theta: edges[..bins].to_vec(),
        values,
        flagged_bins,
    })
}
