//! `kspec`: spectral measure reconstruction from the command line.
//!
//! Every subcommand reads one input source (a built-in system, a trajectory
//! CSV or a moment JSON file) and writes plot-ready artifacts into `--out`.
//! Exit codes: 0 success, 2 invalid input or configuration, 3 numerical
//! failure.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use koopman_spectra::cd_kernel::{atom_estimate, f_zeta, zeta};
use koopman_spectra::dynamics::{
    cat_map_trajectory, load_trajectory, lorenz_trajectory, save_grid, save_trajectory,
    CatMapState, CatObservable, LorenzConfig, LorenzObservable, LorenzState,
};
use koopman_spectra::grid::default_grid_size;
use koopman_spectra::moments::estimate_moments;
use koopman_spectra::orthopoly::{
    char_poly, hankel_dmd, hausdorff_one_sided, monic_orthogonal, poly_roots,
};
use koopman_spectra::projections::{
    apply_projection, build_partition, detect_atoms, interval_coeffs, singleton_coeffs_with,
    SingletonStyle,
};
use koopman_spectra::weak_approx::{quadrature, singularity_indicator, SingularityIndicator};
use koopman_spectra::{
    build_evaluator, CesaroDensity, Error, GridFunction, MomentSequence, Partition,
    QuadratureMeasure, SpectrumEstimate, Trajectory,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

#[derive(Parser)]
#[command(
    name = "kspec",
    version,
    about = "Koopman spectral measures from trajectory data"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write the input trajectory as CSV.
    Simulate(Common),
    /// Estimate (or copy) moments m_0..m_N.
    Moments(Common),
    /// Christoffel–Darboux density and atom estimates.
    Cd(Common),
    /// Cesàro, quadrature and ζ_N CDFs plus the singularity indicator.
    Cdf(CdfArgs),
    /// Project the trajectory onto a singleton or an arc.
    Project(ProjectArgs),
    /// Build a partition adapted to the spectral measure.
    Partition(Common),
    /// Zeros of the monic orthogonal polynomial and Hankel DMD eigenvalues.
    Dmd(Common),
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum System {
    Catmap,
    Lorenz,
    /// Trajectory CSV given by `--input`.
    File,
    /// Moment JSON given by `--input`.
    Moments,
}

#[derive(Args)]
struct Common {
    #[arg(long, value_enum, default_value = "catmap")]
    system: System,
    /// catmap: f1 | f2; lorenz: x1 | x2 | x3.
    #[arg(long)]
    observable: Option<String>,
    /// Input file for `--system file` or `--system moments`.
    #[arg(long)]
    input: Option<PathBuf>,
    /// Number of samples.
    #[arg(short = 'M', default_value_t = 100_000)]
    samples: usize,
    /// Moment order.
    #[arg(short = 'N', default_value_t = 100)]
    order: usize,
    /// Grid size (default 10N + 1).
    #[arg(long)]
    grid: Option<usize>,
    /// Quadrature grid n_q (default 10N).
    #[arg(long)]
    nq: Option<usize>,
    /// Partition size; atoms lighter than m_0/K are ignored.
    #[arg(short = 'K', default_value_t = 10)]
    k: usize,
    /// Sample period (Lorenz default 0.2, otherwise 1).
    #[arg(long)]
    ts: Option<f64>,
    /// Lorenz RK4 steps per sample.
    #[arg(long, default_value_t = 20)]
    substeps: usize,
    /// Lorenz time discarded before sampling.
    #[arg(long, default_value_t = 100.0)]
    transient: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value = ".")]
    out: PathBuf,
    /// Re-read and validate every artifact after writing.
    #[arg(long)]
    check: bool,
    /// Worker threads for grid evaluation (default: all cores).
    #[arg(long)]
    threads: Option<usize>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Estimator {
    Cesaro,
    Quadrature,
}

#[derive(Args)]
struct CdfArgs {
    #[command(flatten)]
    common: Common,
    /// Number of bins B for the singularity indicator.
    #[arg(long, default_value_t = 1000)]
    bins: usize,
    /// CDF estimate compared with F_ζ in the indicator.
    #[arg(long, value_enum, default_value = "cesaro")]
    estimator: Estimator,
}

#[derive(Args)]
struct ProjectArgs {
    #[command(flatten)]
    common: Common,
    /// Project onto the singleton {θ}.
    #[arg(long, conflicts_with = "interval")]
    theta: Option<f64>,
    /// Project onto the arc [A, B).
    #[arg(long, num_args = 2, value_names = ["A", "B"])]
    interval: Option<Vec<f64>>,
    /// Use symmetric taps for singletons.
    #[arg(long)]
    double_sided: bool,
}

#[derive(Debug)]
enum Failure {
    Usage(String),
    Core(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Self::Core(e)
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Self::Core(Error::Io(e))
    }
}

impl From<serde_json::Error> for Failure {
    fn from(e: serde_json::Error) -> Self {
        Self::Core(Error::Json(e))
    }
}

impl Failure {
    fn exit_code(&self) -> u8 {
        match self {
            Self::Usage(_) => 2,
            Self::Core(e) => match e {
                Error::NotPositiveDefinite { .. }
                | Error::BasisDegenerate { .. }
                | Error::NumericalFailure(_)
                | Error::Divergence { .. } => 3,
                _ => 2,
            },
        }
    }
}

impl std::fmt::Display for Failure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Self::Usage(msg) => write!(f, "{msg}"),
            Self::Core(e) => write!(f, "{e}"),
        }
    }
}

type CliResult<T> = std::result::Result<T, Failure>;

fn usage<T>(msg: impl Into<String>) -> CliResult<T> {
    Err(Failure::Usage(msg.into()))
}

enum Source {
    Trajectory(Trajectory),
    Moments(MomentSequence, f64),
}

impl Source {
    fn sample_period(&self) -> f64 {
        match self {
            Self::Trajectory(t) => t.sample_period(),
            Self::Moments(_, ts) => *ts,
        }
    }

    fn trajectory(&self, what: &str) -> CliResult<&Trajectory> {
        match self {
            Self::Trajectory(t) => Ok(t),
            Self::Moments(..) => usage(format!("`{what}` needs a trajectory, not a moment file")),
        }
    }

    fn moments(&self, order: usize) -> CliResult<MomentSequence> {
        match self {
            Self::Trajectory(t) => {
                if order >= t.len() {
                    return usage(format!("N = {order} must be smaller than M = {}", t.len()));
                }
                Ok(estimate_moments(t, order)?)
            }
            Self::Moments(m, _) => Ok(m.truncate(order)?),
        }
    }
}

/// Artifact kinds understood by `--check`.
#[derive(Clone, Copy)]
enum Kind {
    Trajectory,
    Moments,
    Grid,
    Indicator,
    Quadrature,
    Partition,
    Spectrum,
    Peaks,
}

struct Writer {
    dir: PathBuf,
    written: Vec<(PathBuf, Kind)>,
}

impl Writer {
    fn new(dir: &Path) -> CliResult<Self> {
        fs::create_dir_all(dir)?;
        Ok(Self {
            dir: dir.to_path_buf(),
            written: Vec::new(),
        })
    }

    fn json(&mut self, name: &str, kind: Kind, value: &impl Serialize) -> CliResult<()> {
        let path = self.dir.join(name);
        let mut text = serde_json::to_string(value)?;
        text.push('\n');
        fs::write(&path, text)?;
        self.done(path, kind);
        Ok(())
    }

    fn grid(&mut self, name: &str, g: &GridFunction) -> CliResult<()> {
        let path = self.dir.join(name);
        save_grid(&path, g)?;
        self.done(path, Kind::Grid);
        Ok(())
    }

    fn trajectory(&mut self, name: &str, t: &Trajectory) -> CliResult<()> {
        let path = self.dir.join(name);
        save_trajectory(&path, t)?;
        self.done(path, Kind::Trajectory);
        Ok(())
    }

    fn done(&mut self, path: PathBuf, kind: Kind) {
        println!("wrote {}", path.display());
        self.written.push((path, kind));
    }

    fn check(&self) -> CliResult<()> {
        for (path, kind) in &self.written {
            check_artifact(path, *kind)
                .map_err(|e| Failure::Usage(format!("check failed for {}: {e}", path.display())))?;
        }
        println!("checked {} artifact(s)", self.written.len());
        Ok(())
    }
}

#[derive(Serialize, serde::Deserialize)]
struct Peak {
    theta: f64,
    omega: f64,
    weight: f64,
}

fn check_artifact(path: &Path, kind: Kind) -> CliResult<()> {
    if let Kind::Trajectory = kind {
        load_trajectory(path, 1.0)?;
        return Ok(());
    }
    let text = fs::read_to_string(path)?;
    match kind {
        Kind::Trajectory => unreachable!(),
        Kind::Moments => {
            let m: MomentSequence = serde_json::from_str(&text)?;
            MomentSequence::new(m.values().to_vec())?;
        }
        Kind::Grid => {
            let g: GridFunction = serde_json::from_str(&text)?;
            GridFunction::new(g.theta().to_vec(), g.values().to_vec())?;
        }
        Kind::Indicator => {
            let s: SingularityIndicator = serde_json::from_str(&text)?;
            if s.theta().len() != s.values().len()
                || s.flagged_bins().iter().any(|&b| b >= s.values().len())
                || s.values().iter().any(|v| !v.is_finite())
            {
                return usage("inconsistent indicator");
            }
        }
        Kind::Quadrature => {
            let q: QuadratureMeasure = serde_json::from_str(&text)?;
            let w = q.weights();
            if w.len() != q.n_q() + 1
                || w.iter().any(|&x| !(x >= 0.0))
                || w[0] != w[q.n_q()]
                || !(q.residual() >= 0.0)
            {
                return usage("inconsistent quadrature");
            }
        }
        Kind::Partition => {
            let p: Partition = serde_json::from_str(&text)?;
            Partition::new(p.elements().to_vec(), p.representatives().to_vec())?;
        }
        Kind::Spectrum => {
            let s: SpectrumEstimate = serde_json::from_str(&text)?;
            if s.zeros()
                .iter()
                .any(|z| !z.re.is_finite() || !z.im.is_finite())
            {
                return usage("non-finite zero");
            }
        }
        Kind::Peaks => {
            let peaks: Vec<Peak> = serde_json::from_str(&text)?;
            if peaks
                .iter()
                .any(|p| !(0.0..=1.0).contains(&p.theta) || !(p.weight > 0.0))
            {
                return usage("invalid peak");
            }
        }
    }
    Ok(())
}

fn load_source(c: &Common) -> CliResult<Source> {
    if let Some(ts) = c.ts {
        if !(ts > 0.0) || !ts.is_finite() {
            return usage(format!("--ts must be positive, got {ts}"));
        }
    }
    let needs_input = matches!(c.system, System::File | System::Moments);
    match (&c.input, needs_input) {
        (None, true) => return usage("--input is required for this --system"),
        (Some(_), false) => return usage("--input is only valid with --system file or moments"),
        _ => {}
    }
    if c.samples == 0 {
        return usage("-M must be at least 1");
    }
    let mut rng = ChaCha8Rng::seed_from_u64(c.seed);
    let source = match c.system {
        System::Catmap => {
            if c.ts.is_some_and(|ts| ts != 1.0) {
                return usage("the cat map is a discrete map; --ts must be 1");
            }
            let obs = match c.observable.as_deref().unwrap_or("f1") {
                "f1" => CatObservable::f1(),
                "f2" => CatObservable::f2(),
                other => return usage(format!("unknown cat-map observable `{other}` (f1, f2)")),
            };
            let x0 = CatMapState::new(rng.gen(), rng.gen());
            Source::Trajectory(cat_map_trajectory(x0, c.samples, &obs)?)
        }
        System::Lorenz => {
            let obs = match c.observable.as_deref().unwrap_or("x1") {
                "x1" => LorenzObservable::X1,
                "x2" => LorenzObservable::X2,
                "x3" => LorenzObservable::X3,
                other => return usage(format!("unknown Lorenz observable `{other}` (x1, x2, x3)")),
            };
            let x0 = LorenzState::new(
                rng.gen_range(-10.0..10.0),
                rng.gen_range(-10.0..10.0),
                rng.gen_range(10.0..40.0),
            );
            let cfg = LorenzConfig {
                sample_period: c.ts.unwrap_or(0.2),
                substeps: c.substeps,
                transient: c.transient,
            };
            Source::Trajectory(lorenz_trajectory(x0, c.samples, cfg, obs)?)
        }
        System::File => {
            if c.observable.is_some() {
                return usage("--observable does not apply to --system file");
            }
            let path = c.input.as_ref().expect("checked above");
            Source::Trajectory(load_trajectory(path, c.ts.unwrap_or(1.0))?)
        }
        System::Moments => {
            let path = c.input.as_ref().expect("checked above");
            let m: MomentSequence = serde_json::from_str(&fs::read_to_string(path)?)?;
            Source::Moments(
                MomentSequence::new(m.values().to_vec())?,
                c.ts.unwrap_or(1.0),
            )
        }
    };
    Ok(source)
}

fn grid_size(c: &Common) -> CliResult<usize> {
    let g = c.grid.unwrap_or_else(|| default_grid_size(c.order));
    if g < 2 {
        return usage("--grid must be at least 2");
    }
    Ok(g)
}

fn quadrature_size(c: &Common) -> usize {
    c.nq.unwrap_or(10 * c.order.max(1))
}

fn omega(theta: f64, ts: f64) -> f64 {
    2.0 * std::f64::consts::PI * theta / ts
}

fn run(cmd: Command) -> CliResult<()> {
    let common = match &cmd {
        Command::Simulate(c)
        | Command::Moments(c)
        | Command::Cd(c)
        | Command::Partition(c)
        | Command::Dmd(c) => c,
        Command::Cdf(a) => &a.common,
        Command::Project(a) => &a.common,
    };
    if let Some(n) = common.threads {
        if n == 0 {
            return usage("--threads must be at least 1");
        }
        // Fails only if a pool already exists, which cannot happen here.
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global();
    }
    let source = load_source(common)?;
    let ts = source.sample_period();
    let mut out = Writer::new(&common.out)?;

    match &cmd {
        Command::Simulate(_) => {
            let traj = source.trajectory("simulate")?;
            out.trajectory("trajectory.csv", traj)?;
        }
        Command::Moments(c) => {
            let m = source.moments(c.order)?;
            out.json("moments.json", Kind::Moments, &m)?;
        }
        Command::Cd(c) => {
            let m = source.moments(c.order)?;
            let g = grid_size(c)?;
            let e = build_evaluator(&m)?;
            let z = zeta(&e, g)?;
            let a = atom_estimate(&e, g)?;
            out.grid("zeta.json", &z)?;
            out.grid("atoms.json", &a)?;
            let peaks: Vec<Peak> = detect_atoms(&a, Some(&e), m.mass() / c.k.max(1) as f64)
                .into_iter()
                .map(|(theta, weight)| Peak {
                    theta,
                    omega: omega(theta, ts),
                    weight,
                })
                .collect();
            for p in &peaks {
                println!(
                    "atom theta={:.6} omega={:.6} weight={:.6e}",
                    p.theta, p.omega, p.weight
                );
            }
            out.json("peaks.json", Kind::Peaks, &peaks)?;
        }
        Command::Cdf(args) => {
            let c = &args.common;
            let m = source.moments(c.order)?;
            let g = grid_size(c)?;
            let e = build_evaluator(&m)?;
            let fz = f_zeta(&zeta(&e, g)?);
            let cs = CesaroDensity::new(&m)?;
            let f_cs = GridFunction::sample(g, |t| cs.cdf(t).expect("grid lies in [0, 1]"))?;
            let q = quadrature(&m, quadrature_size(c))?;
            let f_q = GridFunction::sample(g, |t| q.cdf(t))?;
            let ind = match args.estimator {
                Estimator::Cesaro => singularity_indicator(
                    |t| cs.cdf(t).expect("bin edges lie in [0, 1]"),
                    &fz,
                    args.bins,
                )?,
                Estimator::Quadrature => singularity_indicator(|t| q.cdf(t), &fz, args.bins)?,
            };
            println!("quadrature residual {:e}", q.residual());
            println!("max |Delta_N| {:.6e}", ind.max_abs());
            out.grid("cdf_cesaro.json", &f_cs)?;
            out.grid("cdf_quadrature.json", &f_q)?;
            out.grid("cdf_zeta.json", &fz)?;
            out.json("quadrature.json", Kind::Quadrature, &q)?;
            out.json("indicator.json", Kind::Indicator, &ind)?;
        }
        Command::Project(args) => {
            let c = &args.common;
            let traj = source.trajectory("project")?;
            let style = if args.double_sided {
                SingletonStyle::DoubleSided
            } else {
                SingletonStyle::OneSided
            };
            let coeffs = match (args.theta, args.interval.as_deref()) {
                (Some(t), None) => {
                    println!("singleton theta={t:.6} omega={:.6}", omega(t, ts));
                    singleton_coeffs_with(t, c.order, style)?
                }
                (None, Some(&[a, b])) => {
                    println!(
                        "interval [{a:.6}, {b:.6}) omega [{:.6}, {:.6})",
                        omega(a, ts),
                        omega(b, ts)
                    );
                    interval_coeffs(a, b, c.order)?
                }
                _ => return usage("give exactly one of --theta or --interval A B"),
            };
            let z = apply_projection(traj, &coeffs)?;
            println!(
                "output sample i corresponds to input sample i + {}",
                c.order
            );
            out.trajectory("projected.csv", &z)?;
        }
        Command::Partition(c) => {
            let m = source.moments(c.order)?;
            let e = build_evaluator(&m)?;
            let a = atom_estimate(&e, grid_size(c)?)?;
            let p = build_partition(&m, &a, Some(&e), c.k, quadrature_size(c))?;
            for (el, th) in p.elements().iter().zip(p.representatives()) {
                println!(
                    "{el:?} representative theta={th:.6} omega={:.6}",
                    omega(*th, ts)
                );
            }
            out.json("partition.json", Kind::Partition, &p)?;
        }
        Command::Dmd(c) => {
            let m = source.moments(c.order)?;
            let zeros = poly_roots(&monic_orthogonal(&m, c.order)?)?;
            out.json("zeros.json", Kind::Spectrum, &zeros)?;
            if let Source::Trajectory(traj) = &source {
                let a = hankel_dmd(traj, c.order)?;
                let eig = poly_roots(&char_poly(&a))?;
                println!(
                    "one-sided Hausdorff distance (DMD eigenvalues to zeros) {:.6e}",
                    hausdorff_one_sided(eig.zeros(), zeros.zeros())
                );
                out.json("dmd_eigenvalues.json", Kind::Spectrum, &eig)?;
            }
        }
    }
    if common.check {
        out.check()?;
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
