use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Real function sampled on a uniform grid of [0, 1] that includes both
/// endpoints.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridFunction {
    theta: Vec<f64>,
    values: Vec<f64>,
}

/// `size` equally spaced points `i / (size - 1)`.
pub fn uniform_grid(size: usize) -> Result<Vec<f64>> {
    if size < 2 {
        return Err(Error::InvalidArgument(format!(
            "grid needs at least 2 points, got {size}"
        )));
    }
    let last = (size - 1) as f64;
    Ok((0..size).map(|i| i as f64 / last).collect())
}

/// Default grid size `10 N + 1`.
pub fn default_grid_size(order: usize) -> usize {
    10 * order.max(1) + 1
}

impl GridFunction {
    pub fn new(theta: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if theta.len() != values.len() {
            return Err(Error::InvalidArgument(format!(
                "{} grid points but {} values",
                theta.len(),
                values.len()
            )));
        }
        if theta.len() < 2 || theta[0] != 0.0 || *theta.last().unwrap() != 1.0 {
            return Err(Error::InvalidArgument(
                "grid must start at 0 and end at 1".into(),
            ));
        }
        if theta.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::InvalidArgument(
                "grid must be strictly increasing".into(),
            ));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidData("grid values must be finite".into()));
        }
        Ok(Self { theta, values })
    }

    /// Samples `f` on a uniform grid of `size` points.
    pub fn sample(size: usize, f: impl Fn(f64) -> f64 + Sync) -> Result<Self> {
        use rayon::prelude::*;
        let theta = uniform_grid(size)?;
        let values = theta.par_iter().map(|&t| f(t)).collect();
        Self::new(theta, values)
    }

    pub fn theta(&self) -> &[f64] {
        &self.theta
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.theta.len()
    }

    pub fn is_empty(&self) -> bool {
        self.theta.is_empty()
    }

    pub fn max(&self) -> f64 {
        self.values
            .iter()
            .copied()
            .fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// Piecewise-linear interpolation, clamped to [0, 1].
    pub fn interpolate(&self, t: f64) -> f64 {
        let t = t.clamp(0.0, 1.0);
        let i = self.theta.partition_point(|&x| x <= t);
        if i == 0 {
            return self.values[0];
        }
        if i >= self.theta.len() {
            return *self.values.last().unwrap();
        }
        let (x0, x1) = (self.theta[i - 1], self.theta[i]);
        let (y0, y1) = (self.values[i - 1], self.values[i]);
        y0 + (y1 - y0) * (t - x0) / (x1 - x0)
    }

    /// Running trapezoidal integral `F(θ_i) = ∫_0^{θ_i} f`, with `F(0) = 0`.
    pub fn cumulative_integral(&self) -> GridFunction {
        let mut acc = 0.0;
        let mut out = Vec::with_capacity(self.len());
        out.push(0.0);
        for i in 1..self.len() {
            let h = self.theta[i] - self.theta[i - 1];
            acc += 0.5 * h * (self.values[i] + self.values[i - 1]);
            out.push(acc);
        }
        GridFunction {
            theta: self.theta.clone(),
            values: out,
        }
    }
}
