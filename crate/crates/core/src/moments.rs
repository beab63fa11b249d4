//! Truncated trigonometric moment sequences of positive measures on the
//! circle, parametrized by θ ∈ [0, 1] via z = e^{i2πθ}.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::trig::cis_freq;

/// Moments `m_0..m_N` of a positive measure, `m_k = ∫ e^{i2πθk} dμ(θ)`.
///
/// Negative indices are implied by `m_{-k} = conj(m_k)` and never stored.
/// `modified` marks a sequence whose `m_0` was incremented by one, i.e. the
/// moments of `μ + dθ`.
#[derive(Debug, Clone, PartialEq)]
pub struct MomentSequence {
    values: Vec<Complex64>,
    modified: bool,
}

impl MomentSequence {
    /// Builds a sequence from raw values. `m_0` must be real and nonnegative.
    pub fn new(values: Vec<Complex64>) -> Result<Self> {
        Self::with_flag(values, false)
    }

    fn with_flag(mut values: Vec<Complex64>, modified: bool) -> Result<Self> {
        let Some(m0) = values.first() else {
            return Err(Error::InvalidArgument(
                "moment sequence must contain m_0".into(),
            ));
        };
        if values
            .iter()
            .any(|v| !v.re.is_finite() || !v.im.is_finite())
        {
            return Err(Error::InvalidData("moments must be finite".into()));
        }
        if m0.re < 0.0 || m0.im.abs() > 1e-12 * m0.re.abs().max(1.0) {
            return Err(Error::InvalidData(format!(
                "m_0 must be real and nonnegative, got {m0}"
            )));
        }
        values[0].im = 0.0;
        Ok(Self { values, modified })
    }

    /// Sequence of all-zero moments (the zero measure).
    pub fn zeros(order: usize) -> Self {
        Self {
            values: vec![Complex64::new(0.0, 0.0); order + 1],
            modified: false,
        }
    }

    /// Moments of Lebesgue measure scaled to total mass `mass`.
    pub fn lebesgue(order: usize, mass: f64) -> Self {
        let mut m = Self::zeros(order);
        m.values[0] = Complex64::new(mass, 0.0);
        m
    }

    pub fn order(&self) -> usize {
        self.values.len() - 1
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn is_modified(&self) -> bool {
        self.modified
    }

    /// Total mass `m_0`.
    pub fn mass(&self) -> f64 {
        self.values[0].re
    }

    /// `m_k` for any integer `k` with `|k| ≤ N`, using Hermitian extension.
    pub fn get(&self, k: i64) -> Complex64 {
        let v = self.values[k.unsigned_abs() as usize];
        if k < 0 {
            v.conj()
        } else {
            v
        }
    }

    /// First `order + 1` moments.
    pub fn truncate(&self, order: usize) -> Result<Self> {
        if order > self.order() {
            return Err(Error::InvalidArgument(format!(
                "cannot truncate order {} sequence to order {order}",
                self.order()
            )));
        }
        Ok(Self {
            values: self.values[..=order].to_vec(),
            modified: self.modified,
        })
    }
}

#[derive(Serialize, Deserialize)]
struct MomentSequenceRepr {
    order: usize,
    modified: bool,
    values: Vec<[f64; 2]>,
}

impl Serialize for MomentSequence {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        MomentSequenceRepr {
            order: self.order(),
            modified: self.modified,
            values: self.values.iter().map(|v| [v.re, v.im]).collect(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for MomentSequence {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        let repr = MomentSequenceRepr::deserialize(d)?;
        if repr.values.len() != repr.order + 1 {
            return Err(D::Error::custom(format!(
                "order {} does not match {} values",
                repr.order,
                repr.values.len()
            )));
        }
        let values = repr
            .values
            .iter()
            .map(|&[re, im]| Complex64::new(re, im))
            .collect();
        MomentSequence::with_flag(values, repr.modified).map_err(D::Error::custom)
    }
}

/// Point masses `(θ_j, w_j)` on [0, 1].
///
/// An atom at the identity may be declared at θ = 0 or θ = 1; both have the
/// same moments.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AtomList {
    atoms: Vec<(f64, f64)>,
}

impl AtomList {
    pub fn new(atoms: Vec<(f64, f64)>) -> Result<Self> {
        for &(theta, w) in &atoms {
            if !(0.0..=1.0).contains(&theta) {
                return Err(Error::InvalidArgument(format!(
                    "atom location {theta} outside [0,1]"
                )));
            }
            if !(w > 0.0 && w.is_finite()) {
                return Err(Error::InvalidArgument(format!(
                    "atom weight {w} must be positive"
                )));
            }
        }
        Ok(Self { atoms })
    }

    pub fn atoms(&self) -> &[(f64, f64)] {
        &self.atoms
    }

    pub fn total_mass(&self) -> f64 {
        self.atoms.iter().map(|a| a.1).sum()
    }
}

/// One constant piece `level · I_[a,b)` of a density.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DensityPiece {
    pub a: f64,
    pub b: f64,
    pub level: f64,
}

/// Piecewise-constant density on [0, 1] with disjoint pieces.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PiecewiseDensity {
    pieces: Vec<DensityPiece>,
}

impl PiecewiseDensity {
    pub fn new(mut pieces: Vec<DensityPiece>) -> Result<Self> {
        for p in &pieces {
            if !(0.0 <= p.a && p.a < p.b && p.b <= 1.0) {
                return Err(Error::InvalidArgument(format!(
                    "density piece [{}, {}) is not a subinterval of [0,1]",
                    p.a, p.b
                )));
            }
            if !(p.level >= 0.0 && p.level.is_finite()) {
                return Err(Error::InvalidArgument(format!(
                    "density level {} must be >= 0",
                    p.level
                )));
            }
        }
        pieces.sort_by(|x, y| x.a.total_cmp(&y.a));
        if pieces.windows(2).any(|w| w[1].a < w[0].b) {
            return Err(Error::InvalidArgument("density pieces overlap".into()));
        }
        Ok(Self { pieces })
    }

    /// Single piece `level` on `[a, b)`.
    pub fn indicator(a: f64, b: f64, level: f64) -> Result<Self> {
        Self::new(vec![DensityPiece { a, b, level }])
    }

    pub fn pieces(&self) -> &[DensityPiece] {
        &self.pieces
    }

    pub fn eval(&self, theta: f64) -> f64 {
        self.pieces
            .iter()
            .find(|p| p.a <= theta && theta < p.b)
            .map_or(0.0, |p| p.level)
    }

    pub fn total_mass(&self) -> f64 {
        self.pieces.iter().map(|p| p.level * (p.b - p.a)).sum()
    }
}

/// Samples `y_1..y_M` of an observable along one orbit.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    samples: Vec<Complex64>,
    sample_period: f64,
}

impl Trajectory {
    pub fn new(samples: Vec<Complex64>, sample_period: f64) -> Result<Self> {
        if samples.is_empty() {
            return Err(Error::InvalidArgument(
                "trajectory needs at least one sample".into(),
            ));
        }
        if !(sample_period > 0.0 && sample_period.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "sample period must be positive, got {sample_period}"
            )));
        }
        if let Some(i) = samples
            .iter()
            .position(|y| !y.re.is_finite() || !y.im.is_finite())
        {
            return Err(Error::InvalidData(format!(
                "sample {} is not finite",
                i + 1
            )));
        }
        Ok(Self {
            samples,
            sample_period,
        })
    }

    /// Real-valued samples embedded with zero imaginary part.
    pub fn from_real(samples: &[f64], sample_period: f64) -> Result<Self> {
        Self::new(
            samples.iter().map(|&x| Complex64::new(x, 0.0)).collect(),
            sample_period,
        )
    }

    pub fn samples(&self) -> &[Complex64] {
        &self.samples
    }

    pub fn sample_period(&self) -> f64 {
        self.sample_period
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }
}

/// Ergodic-average moment estimates
/// `m̂_k = (1/(M−k)) Σ_{i=1}^{M−k} y_{i+k} conj(y_i)`, `k = 0..N`.
pub fn estimate_moments(traj: &Trajectory, order: usize) -> Result<MomentSequence> {
    let y = traj.samples();
    let m = y.len();
    if order >= m {
        return Err(Error::InvalidArgument(format!(
            "moment order {order} requires more than {m} samples"
        )));
    }
    if m < 10 * order {
        log::warn!(
            "only {m} samples for {order} moments; estimates will be noisy (recommend M >= 10 N)"
        );
    }
    let mut values = Vec::with_capacity(order + 1);
    values.push(Complex64::new(
        y.iter().map(|v| v.norm_sqr()).sum::<f64>() / m as f64,
        0.0,
    ));
    for k in 1..=order {
        let sum: Complex64 = y[k..].iter().zip(y).map(|(a, b)| a * b.conj()).sum();
        values.push(sum / (m - k) as f64);
    }
    MomentSequence::new(values)
}

/// `m_k = Σ_j w_j e^{i2πθ_j k}`.
pub fn atomic_moments(atoms: &AtomList, order: usize) -> MomentSequence {
    let values = (0..=order as i64)
        .map(|k| {
            atoms
                .atoms()
                .iter()
                .map(|&(theta, w)| w * cis_freq(theta, k))
                .sum()
        })
        .collect();
    MomentSequence {
        values,
        modified: false,
    }
}

/// Closed-form moments of a piecewise-constant density.
pub fn ac_moments(density: &PiecewiseDensity, order: usize) -> MomentSequence {
    let mut values = Vec::with_capacity(order + 1);
    values.push(Complex64::new(density.total_mass(), 0.0));
    for k in 1..=order as i64 {
        let denom = Complex64::new(0.0, std::f64::consts::TAU * k as f64);
        let v: Complex64 = density
            .pieces()
            .iter()
            .map(|p| p.level * (cis_freq(p.b, k) - cis_freq(p.a, k)) / denom)
            .sum();
        values.push(v);
    }
    MomentSequence {
        values,
        modified: false,
    }
}

/// Moments of the middle-thirds Cantor measure,
/// `m_k = e^{iπk} ∏_{n≥1} cos(2πk/3^n)`.
pub fn cantor_moments(order: usize) -> MomentSequence {
    let values = (0..=order)
        .map(|k| Complex64::new(cantor_moment(k), 0.0))
        .collect();
    MomentSequence {
        values,
        modified: false,
    }
}

fn cantor_moment(k: usize) -> f64 {
    let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
    let mut arg = std::f64::consts::TAU * k as f64 / 3.0;
    let mut prod = 1.0;
    while arg >= 1e-12 {
        prod *= arg.cos();
        arg /= 3.0;
    }
    sign * prod
}

/// Elementwise `a + sign·b`. `sign` must be `+1` or `-1`.
pub fn combine(a: &MomentSequence, b: &MomentSequence, sign: i32) -> Result<MomentSequence> {
    if sign != 1 && sign != -1 {
        return Err(Error::InvalidArgument(format!(
            "sign must be +1 or -1, got {sign}"
        )));
    }
    if a.order() != b.order() {
        return Err(Error::InvalidArgument(format!(
            "order mismatch: {} vs {}",
            a.order(),
            b.order()
        )));
    }
    if a.modified || b.modified {
        return Err(Error::InvalidArgument(
            "cannot combine modified moment sequences".into(),
        ));
    }
    let s = f64::from(sign);
    let values = a
        .values
        .iter()
        .zip(&b.values)
        .map(|(x, y)| x + s * y)
        .collect();
    // m_0 may dip slightly below zero when subtracting estimated atoms.
    let mut out = MomentSequence {
        values,
        modified: false,
    };
    out.values[0].im = 0.0;
    Ok(out)
}

/// Moments of `μ + dθ`: `m̃_0 = m_0 + 1`, all other moments unchanged.
pub fn modify(m: &MomentSequence) -> Result<MomentSequence> {
    if m.modified {
        return Err(Error::InvalidArgument(
            "moment sequence is already modified".into(),
        ));
    }
    let mut values = m.values.clone();
    values[0].re += 1.0;
    Ok(MomentSequence {
        values,
        modified: true,
    })
}
