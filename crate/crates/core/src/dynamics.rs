//! Test systems (Arnold's cat map, Lorenz) and trajectory file I/O.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::grid::GridFunction;
use crate::moments::Trajectory;
use crate::trig::cis_turns;

/// Point on the 2-torus, components in [0, 1).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CatMapState {
    pub x1: f64,
    pub x2: f64,
}

impl CatMapState {
    pub fn new(x1: f64, x2: f64) -> Self {
        Self {
            x1: x1 - x1.floor(),
            x2: x2 - x2.floor(),
        }
    }

    /// `(2x₁ + x₂, x₁ + x₂) mod 1`.
    pub fn step(self) -> Self {
        Self::new(2.0 * self.x1 + self.x2, self.x1 + self.x2)
    }
}

/// `coeff · e^{i2π(k1·x₁ + k2·x₂)}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FourierMode {
    pub coeff: Complex64,
    pub k1: i64,
    pub k2: i64,
}

impl FourierMode {
    pub fn new(coeff: f64, k1: i64, k2: i64) -> Self {
        Self {
            coeff: Complex64::new(coeff, 0.0),
            k1,
            k2,
        }
    }
}

/// Sum of Fourier modes on the torus.
#[derive(Debug, Clone, PartialEq)]
pub struct CatObservable {
    modes: Vec<FourierMode>,
}

impl CatObservable {
    pub fn new(modes: Vec<FourierMode>) -> Self {
        Self { modes }
    }

    /// `e^{i2π(2x₁+x₂)} + ½e^{i2π(5x₁+3x₂)}`, spectral density `5/4 + cos 2πθ`.
    pub fn f1() -> Self {
        Self::new(vec![
            FourierMode::new(1.0, 2, 1),
            FourierMode::new(0.5, 5, 3),
        ])
    }

    /// `f₁ + ¼e^{i2π(13x₁+8x₂)}`, density `21/16 + (5/4)cos 2πθ + ½cos 4πθ`.
    pub fn f2() -> Self {
        let mut o = Self::f1();
        o.modes.push(FourierMode::new(0.25, 13, 8));
        o
    }

    /// The single mode `e^{i2π(2x₁+x₂)}`.
    pub fn leading_mode() -> Self {
        Self::new(vec![FourierMode::new(1.0, 2, 1)])
    }

    pub fn modes(&self) -> &[FourierMode] {
        &self.modes
    }

    pub fn eval(&self, s: CatMapState) -> Complex64 {
        self.modes
            .iter()
            .map(|m| m.coeff * cis_turns(m.k1 as f64 * s.x1 + m.k2 as f64 * s.x2))
            .sum()
    }
}

/// `M` samples `f(x₀), f(T x₀), …` with unit sample period.
pub fn cat_map_trajectory(x0: CatMapState, m: usize, obs: &CatObservable) -> Result<Trajectory> {
    if m == 0 {
        return Err(Error::InvalidArgument("M must be at least 1".into()));
    }
    let mut s = CatMapState::new(x0.x1, x0.x2);
    let mut out = Vec::with_capacity(m);
    for _ in 0..m {
        out.push(obs.eval(s));
        s = s.step();
    }
    Trajectory::new(out, 1.0)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LorenzState {
    pub x1: f64,
    pub x2: f64,
    pub x3: f64,
}

impl LorenzState {
    pub fn new(x1: f64, x2: f64, x3: f64) -> Self {
        Self { x1, x2, x3 }
    }

    fn norm_inf(&self) -> f64 {
        self.x1.abs().max(self.x2.abs()).max(self.x3.abs())
    }

    fn axpy(self, h: f64, d: LorenzState) -> Self {
        Self::new(self.x1 + h * d.x1, self.x2 + h * d.x2, self.x3 + h * d.x3)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LorenzObservable {
    X1,
    X2,
    X3,
}

impl LorenzObservable {
    pub fn eval(self, s: LorenzState) -> f64 {
        match self {
            Self::X1 => s.x1,
            Self::X2 => s.x2,
            Self::X3 => s.x3,
        }
    }
}

/// Classical parameters σ = 10, ρ = 28, β = 8/3.
pub fn lorenz_field(s: LorenzState) -> LorenzState {
    LorenzState::new(
        10.0 * (s.x2 - s.x1),
        s.x1 * (28.0 - s.x3) - s.x2,
        s.x1 * s.x2 - 8.0 / 3.0 * s.x3,
    )
}

/// One classical RK4 step of length `h`.
pub fn rk4_step(s: LorenzState, h: f64) -> LorenzState {
    let k1 = lorenz_field(s);
    let k2 = lorenz_field(s.axpy(0.5 * h, k1));
    let k3 = lorenz_field(s.axpy(0.5 * h, k2));
    let k4 = lorenz_field(s.axpy(h, k3));
    LorenzState::new(
        s.x1 + h / 6.0 * (k1.x1 + 2.0 * k2.x1 + 2.0 * k3.x1 + k4.x1),
        s.x2 + h / 6.0 * (k1.x2 + 2.0 * k2.x2 + 2.0 * k3.x2 + k4.x2),
        s.x3 + h / 6.0 * (k1.x3 + 2.0 * k2.x3 + 2.0 * k3.x3 + k4.x3),
    )
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LorenzConfig {
    pub sample_period: f64,
    pub substeps: usize,
    /// Time discarded before the first sample.
    pub transient: f64,
}

impl Default for LorenzConfig {
    fn default() -> Self {
        Self {
            sample_period: 0.2,
            substeps: 20,
            transient: 100.0,
        }
    }
}

/// Samples `obs` every `sample_period` along a fixed-step RK4 solution,
/// after discarding `transient` time units.
pub fn lorenz_trajectory(
    x0: LorenzState,
    m: usize,
    cfg: LorenzConfig,
    obs: LorenzObservable,
) -> Result<Trajectory> {
    if m == 0 {
        return Err(Error::InvalidArgument("M must be at least 1".into()));
    }
    if !(cfg.sample_period > 0.0) || !cfg.sample_period.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "sample period must be positive, got {}",
            cfg.sample_period
        )));
    }
    if cfg.substeps == 0 {
        return Err(Error::InvalidArgument("substeps must be at least 1".into()));
    }
    if !(cfg.transient >= 0.0) {
        return Err(Error::InvalidArgument(
            "transient must be nonnegative".into(),
        ));
    }
    let h = cfg.sample_period / cfg.substeps as f64;
    let mut s = x0;
    let warmup = (cfg.transient / cfg.sample_period).round() as usize;
    let mut out = Vec::with_capacity(m);
    for i in 0..warmup + m {
        if i >= warmup {
            out.push(obs.eval(s));
        }
        for _ in 0..cfg.substeps {
            s = rk4_step(s, h);
        }
        let norm = s.norm_inf();
        if !(norm <= 1e6) {
            return Err(Error::Divergence { sample: i, norm });
        }
    }
    Trajectory::from_real(&out, cfg.sample_period)
}

fn parse_err(path: &Path, line: u64, message: impl Into<String>) -> Error {
    Error::Parse {
        path: path.to_path_buf(),
        line,
        message: message.into(),
    }
}

/// Reads a CSV with header `index,re[,im]`.
pub fn load_trajectory(path: &Path, sample_period: f64) -> Result<Trajectory> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| parse_err(path, 1, e.to_string()))?;
    let headers = rdr
        .headers()
        .map_err(|e| parse_err(path, 1, e.to_string()))?
        .clone();
    let expected = ["index", "re", "im"];
    if headers.len() < 2 || headers.len() > 3 {
        return Err(parse_err(
            path,
            1,
            format!(
                "expected header index,re[,im], found {} columns",
                headers.len()
            ),
        ));
    }
    for (got, want) in headers.iter().zip(expected) {
        if got != want {
            return Err(parse_err(
                path,
                1,
                format!("unexpected header '{got}', expected '{want}'"),
            ));
        }
    }
    let has_im = headers.len() == 3;
    let mut samples = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line());
            parse_err(path, line, e.to_string())
        })?;
        let line = rec.position().map_or(0, |p| p.line());
        let field = |i: usize, name: &str| -> Result<f64> {
            let raw = rec.get(i).unwrap_or("");
            raw.parse::<f64>().map_err(|_| {
                parse_err(path, line, format!("column '{name}': cannot parse '{raw}'"))
            })
        };
        rec.get(0).unwrap_or("").parse::<u64>().map_err(|_| {
            parse_err(
                path,
                line,
                format!("column 'index': cannot parse '{}'", &rec[0]),
            )
        })?;
        let re = field(1, "re")?;
        let im = if has_im { field(2, "im")? } else { 0.0 };
        samples.push(Complex64::new(re, im));
    }
    Trajectory::new(samples, sample_period)
}

/// Writes `index,re,im` rows with shortest round-trip float formatting.
pub fn save_trajectory(path: &Path, traj: &Trajectory) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    writeln!(w, "index,re,im")?;
    for (i, z) in traj.samples().iter().enumerate() {
        writeln!(w, "{i},{:?},{:?}", z.re, z.im)?;
    }
    w.flush()?;
    Ok(())
}

/// Writes a grid function as JSON `{"theta": [...], "values": [...]}`.
pub fn save_grid(path: &Path, g: &GridFunction) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    serde_json::to_writer(&mut w, g)?;
    w.flush()?;
    Ok(())
}
