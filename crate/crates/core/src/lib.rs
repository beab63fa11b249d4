//! Reconstruction of Koopman spectral measures from a single trajectory.
//!
//! The pipeline starts from the autocorrelations of an observable sampled
//! along one orbit of a measure-preserving ergodic map. Those are the
//! trigonometric moments of the spectral measure of the observable, and
//! everything else in this crate consumes them:
//!
//! * [`moments`] estimates moments from data and generates them for
//!   reference measures (atoms, piecewise densities, the Cantor measure).
//! * [`toeplitz`] holds the O(N²) Hermitian Toeplitz kernels (Levinson,
//!   Trench, Schur) behind everything that inverts a moment matrix.
//! * [`cd_kernel`] evaluates the Christoffel–Darboux kernel of the measure
//!   plus Lebesgue measure and turns it into atom and density estimates.
//! * [`weak_approx`] builds weakly convergent approximations: the Fejér
//!   (Cesàro) density and a nonnegative quadrature on a uniform grid.
//! * [`projections`] approximates spectral projections along a trajectory
//!   and the partition-based approximation of the operator itself.
//! * [`orthopoly`] covers orthogonal polynomials on the unit circle, their
//!   zeros and the finite-section (Hankel DMD) matrix.
//! * [`dynamics`] provides the cat map and Lorenz test systems and the
//!   trajectory file format.

pub mod cd_kernel;
pub mod dynamics;
pub mod error;
pub mod grid;
pub mod moments;
mod nnls;
pub mod orthopoly;
pub mod projections;
pub mod toeplitz;
mod trig;
pub mod weak_approx;

pub use cd_kernel::{build_evaluator, CdEvaluator};
pub use error::{Error, Result};
pub use grid::GridFunction;
pub use moments::{AtomList, MomentSequence, PiecewiseDensity, Trajectory};
pub use num_complex::Complex64;
pub use orthopoly::{MonicPolynomial, PolynomialBasis, SpectrumEstimate};
pub use projections::{Partition, PartitionElement, ProjectionCoefficients, ProjectionTarget};
pub use toeplitz::{CholeskyFactor, HermitianToeplitz};
pub use weak_approx::{CesaroDensity, QuadratureMeasure};
