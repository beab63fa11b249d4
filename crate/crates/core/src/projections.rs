//! Spectral projections evaluated along a trajectory, partitions of the
//! circle into singletons and arcs, and the partition-based approximation
//! `U_K = Σ_j e^{i2πθ_j} P_{A_j}` of the Koopman operator.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cd_kernel::CdEvaluator;
use crate::error::{Error, Result};
use crate::grid::GridFunction;
use crate::moments::{atomic_moments, combine, AtomList, MomentSequence, Trajectory};
use crate::trig::cis_turns;
use crate::weak_approx::{quadrature_with_gain, CesaroDensity, QuadratureMeasure};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum ProjectionTarget {
    Singleton {
        theta: f64,
    },
    /// Half-open arc `[a, b)`.
    Interval {
        a: f64,
        b: f64,
    },
    Union {
        parts: Vec<ProjectionTarget>,
    },
}

/// Taps for singleton targets.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SingletonStyle {
    /// `e^{−i2πkθ₀}/(N+1)` for `k = 0..N`.
    #[default]
    OneSided,
    /// `e^{−i2πkθ₀}/(2N+1)` for `k = −N..N`.
    DoubleSided,
}

/// Filter taps `α_{−N}..α_N`.
#[derive(Debug, Clone, PartialEq)]
pub struct ProjectionCoefficients {
    order: usize,
    taps: Vec<Complex64>,
    target: ProjectionTarget,
}

impl ProjectionCoefficients {
    pub fn order(&self) -> usize {
        self.order
    }

    /// `α_k` stored at index `k + N`.
    pub fn taps(&self) -> &[Complex64] {
        &self.taps
    }

    pub fn tap(&self, k: i64) -> Complex64 {
        let n = self.order as i64;
        if k.abs() > n {
            Complex64::new(0.0, 0.0)
        } else {
            self.taps[(k + n) as usize]
        }
    }

    pub fn target(&self) -> &ProjectionTarget {
        &self.target
    }

    fn zero(order: usize, target: ProjectionTarget) -> Self {
        Self {
            order,
            taps: vec![Complex64::new(0.0, 0.0); 2 * order + 1],
            target,
        }
    }

    fn add_scaled(&mut self, other: &Self, s: Complex64) {
        debug_assert_eq!(self.order, other.order);
        for (a, b) in self.taps.iter_mut().zip(&other.taps) {
            *a += b * s;
        }
    }
}

fn check_theta(theta: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&theta) {
        return Err(Error::InvalidArgument(format!(
            "θ = {theta} outside [0, 1]"
        )));
    }
    Ok(())
}

/// Singleton taps in the default one-sided form.
pub fn singleton_coeffs(theta0: f64, order: usize) -> Result<ProjectionCoefficients> {
    singleton_coeffs_with(theta0, order, SingletonStyle::OneSided)
}

pub fn singleton_coeffs_with(
    theta0: f64,
    order: usize,
    style: SingletonStyle,
) -> Result<ProjectionCoefficients> {
    check_theta(theta0)?;
    let mut c = ProjectionCoefficients::zero(order, ProjectionTarget::Singleton { theta: theta0 });
    let n = order as i64;
    let (lo, scale) = match style {
        SingletonStyle::OneSided => (0, 1.0 / (order + 1) as f64),
        SingletonStyle::DoubleSided => (-n, 1.0 / (2 * order + 1) as f64),
    };
    for k in lo..=n {
        c.taps[(k + n) as usize] = cis_turns(-(k as f64) * theta0) * scale;
    }
    Ok(c)
}

/// Fejér-smoothed indicator taps of `[a, b)` with half-weight singleton
/// corrections at both ends; the corrections are double-sided so that the
/// resulting indicator approximation is real.
pub fn interval_coeffs(a: f64, b: f64, order: usize) -> Result<ProjectionCoefficients> {
    check_theta(a)?;
    check_theta(b)?;
    if a >= b {
        return Err(Error::InvalidArgument(format!("empty interval [{a}, {b})")));
    }
    if order == 0 {
        return Err(Error::InvalidArgument("interval taps need N ≥ 1".into()));
    }
    let mut c = ProjectionCoefficients::zero(order, ProjectionTarget::Interval { a, b });
    let n = order as i64;
    let nf = order as f64;
    for k in -n..=n {
        let beta = if k == 0 {
            Complex64::new(b - a, 0.0)
        } else {
            let kf = k as f64;
            let w = (nf - kf.abs()) / nf;
            (cis_turns(-b * kf) - cis_turns(-a * kf))
                * Complex64::new(0.0, w / (2.0 * std::f64::consts::PI * kf))
        };
        c.taps[(k + n) as usize] = beta;
    }
    let half = Complex64::new(0.5, 0.0);
    c.add_scaled(
        &singleton_coeffs_with(a, order, SingletonStyle::DoubleSided)?,
        half,
    );
    c.add_scaled(
        &singleton_coeffs_with(b, order, SingletonStyle::DoubleSided)?,
        -half,
    );
    Ok(c)
}

/// Taps for any target; unions are tap-wise sums of their parts.
pub fn target_coeffs(target: &ProjectionTarget, order: usize) -> Result<ProjectionCoefficients> {
    match target {
        ProjectionTarget::Singleton { theta } => singleton_coeffs(*theta, order),
        ProjectionTarget::Interval { a, b } => interval_coeffs(*a, *b, order),
        ProjectionTarget::Union { parts } => {
            let mut c = ProjectionCoefficients::zero(order, target.clone());
            for p in parts {
                c.add_scaled(&target_coeffs(p, order)?, Complex64::new(1.0, 0.0));
            }
            Ok(c)
        }
    }
}

/// `p_N(θ) = Σ_k α_k e^{i2πθk}`.
pub fn indicator_approx(c: &ProjectionCoefficients, theta: f64) -> Complex64 {
    let n = c.order as i64;
    c.taps
        .iter()
        .enumerate()
        .filter(|(_, a)| a.re != 0.0 || a.im != 0.0)
        .map(|(i, a)| a * cis_turns(theta * (i as i64 - n) as f64))
        .sum()
}

fn filter(traj: &Trajectory, taps: &[Complex64], order: usize) -> Result<Trajectory> {
    let m = traj.len();
    if 2 * order >= m {
        return Err(Error::InvalidArgument(format!(
            "projection of order N = {order} needs more than 2N = {} samples, got {m}",
            2 * order
        )));
    }
    let y = traj.samples();
    let active: Vec<(usize, Complex64)> = taps
        .iter()
        .copied()
        .enumerate()
        .filter(|(_, a)| a.re != 0.0 || a.im != 0.0)
        .collect();
    // Sample j (0-based) sees y[j−N..=j+N]; tap index i maps to y[j−N+i].
    let out: Vec<Complex64> = (order..m - order)
        .into_par_iter()
        .map(|j| active.iter().map(|&(i, a)| a * y[j - order + i]).sum())
        .collect();
    Trajectory::new(out, traj.sample_period())
}

/// `z_j = Σ_k α_k y_{j+k}` over the window where all taps see data; the
/// output has `M − 2N` samples, the first aligned with input sample `N`.
pub fn apply_projection(traj: &Trajectory, c: &ProjectionCoefficients) -> Result<Trajectory> {
    filter(traj, &c.taps, c.order)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum PartitionElement {
    Singleton { theta: f64 },
    Interval { a: f64, b: f64 },
}

impl PartitionElement {
    fn contains(&self, theta: f64) -> bool {
        match *self {
            PartitionElement::Singleton { theta: t } => t == theta,
            PartitionElement::Interval { a, b } => a <= theta && theta < b,
        }
    }

    fn midpoint(&self) -> f64 {
        match *self {
            PartitionElement::Singleton { theta } => theta,
            PartitionElement::Interval { a, b } => 0.5 * (a + b),
        }
    }
}

/// Disjoint cover of the circle by singletons and arcs `[a, b)`, with one
/// representative frequency per element. Intervals exclude the singletons
/// they contain.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Partition {
    elements: Vec<PartitionElement>,
    representatives: Vec<f64>,
}

impl Partition {
    pub fn new(elements: Vec<PartitionElement>, representatives: Vec<f64>) -> Result<Self> {
        if elements.is_empty() || elements.len() != representatives.len() {
            return Err(Error::InvalidArgument(
                "partition needs one representative per element and at least one element".into(),
            ));
        }
        let mut intervals: Vec<(f64, f64)> = Vec::new();
        let mut singletons: Vec<f64> = Vec::new();
        for e in &elements {
            match *e {
                PartitionElement::Singleton { theta } => {
                    if !(0.0..1.0).contains(&theta) {
                        return Err(Error::InvalidArgument(format!(
                            "singleton θ = {theta} outside [0, 1)"
                        )));
                    }
                    singletons.push(theta);
                }
                PartitionElement::Interval { a, b } => intervals.push((a, b)),
            }
        }
        intervals.sort_by(|x, y| x.0.total_cmp(&y.0));
        let covers = !intervals.is_empty()
            && intervals[0].0 == 0.0
            && intervals.last().unwrap().1 == 1.0
            && intervals.windows(2).all(|w| w[0].1 == w[1].0)
            && intervals.iter().all(|&(a, b)| a < b);
        if !covers {
            return Err(Error::InvalidArgument(
                "intervals must tile [0, 1) with increasing endpoints".into(),
            ));
        }
        singletons.sort_by(f64::total_cmp);
        if singletons.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::InvalidArgument("duplicate singleton".into()));
        }
        for (e, r) in elements.iter().zip(&representatives) {
            let inside = match *e {
                PartitionElement::Singleton { theta } => *r == theta,
                PartitionElement::Interval { a, b } => a <= *r && *r <= b,
            };
            if !inside {
                return Err(Error::InvalidArgument(format!(
                    "representative {r} does not lie in {e:?}"
                )));
            }
        }
        Ok(Self {
            elements,
            representatives,
        })
    }

    /// `k` equal arcs with midpoint representatives.
    pub fn uniform(k: usize) -> Result<Self> {
        if k == 0 {
            return Err(Error::InvalidArgument("K must be at least 1".into()));
        }
        let edges: Vec<f64> = (0..=k).map(|j| j as f64 / k as f64).collect();
        let elements: Vec<_> = edges
            .windows(2)
            .map(|w| PartitionElement::Interval { a: w[0], b: w[1] })
            .collect();
        let reps = elements.iter().map(PartitionElement::midpoint).collect();
        Self::new(elements, reps)
    }

    pub fn elements(&self) -> &[PartitionElement] {
        &self.elements
    }

    pub fn representatives(&self) -> &[f64] {
        &self.representatives
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    fn singletons(&self) -> impl Iterator<Item = f64> + '_ {
        self.elements.iter().filter_map(|e| match *e {
            PartitionElement::Singleton { theta } => Some(theta),
            _ => None,
        })
    }

    /// Taps of each element; intervals have their contained singletons
    /// removed so that the taps sum to the identity filter.
    pub fn element_coeffs(&self, order: usize) -> Result<Vec<ProjectionCoefficients>> {
        self.elements
            .iter()
            .map(|e| match *e {
                PartitionElement::Singleton { theta } => singleton_coeffs(theta, order),
                PartitionElement::Interval { a, b } => {
                    let mut c = interval_coeffs(a, b, order)?;
                    for s in self.singletons().filter(|&s| e.contains(s)) {
                        c.add_scaled(&singleton_coeffs(s, order)?, Complex64::new(-1.0, 0.0));
                    }
                    Ok(c)
                }
            })
            .collect()
    }

    /// Taps of `U_K = Σ_j e^{i2πθ_j} P_{A_j}`.
    pub fn operator_coeffs(&self, order: usize) -> Result<ProjectionCoefficients> {
        let parts = self
            .elements
            .iter()
            .map(|e| match *e {
                PartitionElement::Singleton { theta } => ProjectionTarget::Singleton { theta },
                PartitionElement::Interval { a, b } => ProjectionTarget::Interval { a, b },
            })
            .collect();
        let mut total = ProjectionCoefficients::zero(order, ProjectionTarget::Union { parts });
        for (c, &theta) in self
            .element_coeffs(order)?
            .iter()
            .zip(&self.representatives)
        {
            total.add_scaled(c, cis_turns(theta));
        }
        Ok(total)
    }
}

/// Approximates `(U f)(x_j)` by `Σ_j e^{i2πθ_j} (P_{A_j} f)(x_j)` on the
/// valid window.
pub fn apply_operator_approx(traj: &Trajectory, p: &Partition, order: usize) -> Result<Trajectory> {
    let c = p.operator_coeffs(order)?;
    filter(traj, &c.taps, order)
}

/// Maximizes a unimodal `f` on `[lo, hi]`.
fn golden_max(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> f64 {
    let g = 0.5 * (5f64.sqrt() - 1.0);
    let mut x1 = hi - g * (hi - lo);
    let mut x2 = lo + g * (hi - lo);
    let (mut f1, mut f2) = (f(x1), f(x2));
    for _ in 0..80 {
        if hi - lo < 1e-13 {
            break;
        }
        if f1 < f2 {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + g * (hi - lo);
            f2 = f(x2);
        } else {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - g * (hi - lo);
            f1 = f(x1);
        }
    }
    0.5 * (lo + hi)
}

/// Local maxima of an atom-estimate grid exceeding `threshold`, refined
/// between neighbouring grid points when an evaluator is available. The grid
/// is treated as periodic, its last point coinciding with the first.
pub fn detect_atoms(
    atoms: &GridFunction,
    evaluator: Option<&CdEvaluator>,
    threshold: f64,
) -> Vec<(f64, f64)> {
    let theta = atoms.theta();
    let v = atoms.values();
    let n = v.len() - 1;
    if n < 2 {
        return Vec::new();
    }
    let mut found = Vec::new();
    for i in 0..n {
        let prev = v[(i + n - 1) % n];
        let next = v[(i + 1) % n];
        if !(v[i] >= threshold && v[i] >= prev && v[i] > next) {
            continue;
        }
        let (mut t, mut w) = (theta[i], v[i]);
        if let Some(e) = evaluator {
            let h = theta[1] - theta[0];
            let c = golden_max(|s| e.atom_at(s), t - h, t + h);
            let wc = e.atom_at(c);
            if wc >= w {
                t = c;
                w = wc;
            }
        }
        t -= t.floor();
        if t >= 1.0 - 1e-12 {
            t = 0.0;
        }
        if w >= threshold {
            found.push((t, w));
        }
    }
    found
}

/// Stopping gain for the quadrature behind the partition edges. Once the
/// detected atoms are subtracted the moments are rarely exactly feasible, and
/// edges only need the CDF to grid resolution.
const EDGE_GAIN: f64 = 1e-10;

/// Builds a partition of at most `k` elements adapted to the spectral
/// measure: singletons at atoms of weight at least `m_0/k`, arcs of equal
/// remaining mass, and conditional-mean representatives.
pub fn build_partition(
    m: &MomentSequence,
    atoms: &GridFunction,
    evaluator: Option<&CdEvaluator>,
    k: usize,
    n_q: usize,
) -> Result<Partition> {
    if k == 0 {
        return Err(Error::InvalidArgument("K must be at least 1".into()));
    }
    let m0 = m.mass();
    let mut found = detect_atoms(atoms, evaluator, m0 / k as f64);
    found.sort_by(|x, y| y.1.total_cmp(&x.1));
    if found.len() > k {
        log::warn!(
            "{} atoms pass the m0/K threshold; keeping the {k} heaviest",
            found.len()
        );
        found.truncate(k);
    }
    if found.len() == k {
        log::warn!(
            "all {k} elements are singletons; adding one arc to cover the rest of the circle"
        );
    }
    let k_int = k.saturating_sub(found.len()).max(1);

    let atom_mass: f64 = found.iter().map(|a| a.1).sum();
    let rest = if atom_mass < m0 {
        let am = atomic_moments(&AtomList::new(found.clone())?, m.order());
        combine(m, &am, -1).ok()
    } else {
        None
    };
    let (q, cesaro) = match rest {
        Some(r) if r.mass() > 0.0 => (
            Some(quadrature_with_gain(&r, n_q, EDGE_GAIN)?),
            Some(CesaroDensity::new(&r)?),
        ),
        _ => (None, None),
    };
    let floor = 1e-12 * m0.max(f64::MIN_POSITIVE);

    let edges = match &q {
        Some(q) => equal_mass_edges(q, k_int),
        None => (0..=k_int).map(|j| j as f64 / k_int as f64).collect(),
    };

    let mut elements: Vec<PartitionElement> = found
        .iter()
        .map(|&(theta, _)| PartitionElement::Singleton { theta })
        .collect();
    elements.extend(
        edges
            .windows(2)
            .map(|w| PartitionElement::Interval { a: w[0], b: w[1] }),
    );
    elements.sort_by(|x, y| {
        let key = |e: &PartitionElement| match *e {
            PartitionElement::Singleton { theta } => (theta, 0),
            PartitionElement::Interval { a, .. } => (a, 1),
        };
        let (a, b) = (key(x), key(y));
        a.0.total_cmp(&b.0).then(a.1.cmp(&b.1))
    });
    let reps = elements
        .iter()
        .map(|e| match (*e, &cesaro) {
            (PartitionElement::Interval { a, b }, Some(c)) => conditional_mean(c, a, b, floor),
            _ => e.midpoint(),
        })
        .collect();
    Partition::new(elements, reps)
}

/// Generalized inverse of the quadrature CDF at `k` uniform mass levels.
fn equal_mass_edges(q: &QuadratureMeasure, k: usize) -> Vec<f64> {
    let total = q.total_mass();
    let w = q.weights();
    let mut edges = vec![0.0];
    let mut acc = 0.0;
    let mut j = 0;
    for level in 1..k {
        let target = total * level as f64 / k as f64;
        while j < w.len() && acc + w[j] < target {
            acc += w[j];
            j += 1;
        }
        let e = q.location(j.min(q.n_q()));
        if e > *edges.last().unwrap() && e < 1.0 {
            edges.push(e);
        }
    }
    edges.push(1.0);
    edges
}

/// Mean of `θ` over `[a, b)` under the Fejér approximation of the measure,
/// or the midpoint when the arc carries (numerically) no mass.
fn conditional_mean(c: &CesaroDensity, a: f64, b: f64, floor: f64) -> f64 {
    let mass = c.cdf(b).unwrap_or(0.0) - c.cdf(a).unwrap_or(0.0);
    if mass > floor {
        (c.first_moment(a, b) / mass).clamp(a, b)
    } else {
        0.5 * (a + b)
    }
}
