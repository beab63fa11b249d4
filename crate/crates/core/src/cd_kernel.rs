//! Christoffel–Darboux kernel of the modified measure `μ̃ = μ + dθ`.
//!
//! On the diagonal `z = e^{i2πθ}` the kernel `K̃_N(θ) = ψᴴ M̃⁻¹ ψ` is the
//! trigonometric polynomial `Σ_d c_d e^{i2πθd}` whose coefficients are the
//! diagonal sums `c_d = Σ_{l-j=d} (M̃⁻¹)_{jl}`. They are formed once from a
//! Trench inverse; afterwards each evaluation costs O(N).

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::grid::{uniform_grid, GridFunction};
use crate::moments::{modify, MomentSequence};
use crate::toeplitz::{trench_inverse, HermitianToeplitz};
use crate::trig::hermitian_trig_sum;

#[derive(Debug, Clone)]
pub struct CdEvaluator {
    /// `c_0..c_N`; negative offsets are the conjugates.
    diag_sums: Vec<Complex64>,
    base_mass: f64,
}

/// Modifies `m`, inverts `M̃_N` and collects the diagonal sums.
pub fn build_evaluator(m: &MomentSequence) -> Result<CdEvaluator> {
    if m.is_modified() {
        return Err(Error::InvalidArgument(
            "pass the unmodified moments; the +1 dθ modification is applied internally".into(),
        ));
    }
    let modified = modify(m)?;
    let inv = trench_inverse(&HermitianToeplitz::from_moments(&modified))?;
    let n = inv.nrows();
    let diag_sums = (0..n)
        .map(|d| (0..n - d).map(|j| inv[(j, j + d)]).sum())
        .collect();
    Ok(CdEvaluator {
        diag_sums,
        base_mass: m.mass(),
    })
}

impl CdEvaluator {
    pub fn order(&self) -> usize {
        self.diag_sums.len() - 1
    }

    pub fn diag_sums(&self) -> &[Complex64] {
        &self.diag_sums
    }

    /// `m_0` of the unmodified measure.
    pub fn base_mass(&self) -> f64 {
        self.base_mass
    }

    /// `K̃_N(e^{i2πθ}, e^{i2πθ})`.
    pub fn kernel(&self, theta: f64) -> f64 {
        hermitian_trig_sum(&self.diag_sums, theta)
    }

    /// `ζ_N(θ) = (N+1)/K̃_N(θ) − 1`, the density estimate.
    pub fn zeta_at(&self, theta: f64) -> f64 {
        (self.order() + 1) as f64 / self.kernel(theta) - 1.0
    }

    /// `1/K̃_N(θ) − 1/(N+1)`, the atom-weight estimate.
    pub fn atom_at(&self, theta: f64) -> f64 {
        1.0 / self.kernel(theta) - 1.0 / (self.order() + 1) as f64
    }

    fn on_grid(&self, size: usize, f: impl Fn(&Self, f64) -> f64 + Sync) -> Result<GridFunction> {
        uniform_grid(size)?;
        GridFunction::sample(size, |t| f(self, t))
    }
}

/// `ζ_N` on a uniform grid of `size` points.
pub fn zeta(e: &CdEvaluator, size: usize) -> Result<GridFunction> {
    e.on_grid(size, CdEvaluator::zeta_at)
}

/// Atom-weight estimate on a uniform grid of `size` points.
pub fn atom_estimate(e: &CdEvaluator, size: usize) -> Result<GridFunction> {
    e.on_grid(size, CdEvaluator::atom_at)
}

/// `F_ζ(t) = ∫_0^t ζ_N`, cumulative trapezoid on the grid of `zeta`.
pub fn f_zeta(zeta: &GridFunction) -> GridFunction {
    zeta.cumulative_integral()
}
