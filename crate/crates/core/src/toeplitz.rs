//! Hermitian positive-definite Toeplitz kernels, all O(N²).
//!
//! Entry `(j, l)` of a [`HermitianToeplitz`] is `t_{j-l}` with
//! `t_{-d} = conj(t_d)`, so the stored first column of a moment matrix is
//! `m_0..m_N`.
//!
//! Every routine here runs the same reflection recursion and fails with
//! [`Error::NotPositiveDefinite`] once a reflection coefficient reaches
//! `1 - 1e-12` in magnitude.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::moments::MomentSequence;

const BREAKDOWN: f64 = 1.0 - 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct HermitianToeplitz {
    col: Vec<Complex64>,
}

impl HermitianToeplitz {
    /// From the first column `t_0..t_N`; `t_0` must be real.
    pub fn new(first_column: Vec<Complex64>) -> Result<Self> {
        let Some(t0) = first_column.first() else {
            return Err(Error::InvalidArgument(
                "Toeplitz matrix needs at least one entry".into(),
            ));
        };
        if t0.im.abs() > 1e-12 * t0.re.abs().max(1.0) {
            return Err(Error::InvalidArgument(format!(
                "t_0 must be real, got {t0}"
            )));
        }
        let mut col = first_column;
        col[0].im = 0.0;
        Ok(Self { col })
    }

    /// Moment matrix `M_N` of a moment sequence.
    pub fn from_moments(m: &MomentSequence) -> Self {
        Self {
            col: m.values().to_vec(),
        }
    }

    pub fn dim(&self) -> usize {
        self.col.len()
    }

    pub fn first_column(&self) -> &[Complex64] {
        &self.col
    }

    /// `t_d` for signed `d`.
    #[inline]
    pub fn entry_at_offset(&self, d: isize) -> Complex64 {
        if d >= 0 {
            self.col[d as usize]
        } else {
            self.col[(-d) as usize].conj()
        }
    }

    pub fn get(&self, j: usize, l: usize) -> Complex64 {
        self.entry_at_offset(j as isize - l as isize)
    }

    pub fn to_dense(&self) -> DMatrix<Complex64> {
        let n = self.dim();
        DMatrix::from_fn(n, n, |j, l| self.get(j, l))
    }

    pub fn mul_vec(&self, x: &[Complex64]) -> Vec<Complex64> {
        let n = self.dim();
        (0..n)
            .map(|j| (0..n).map(|l| self.get(j, l) * x[l]).sum())
            .collect()
    }
}

/// Output of the Levinson–Durbin recursion on the full matrix.
///
/// `predictor` is `a` with `a_0 = 1` and `T a = error · e_0`. The reversed
/// conjugate `b = J conj(a)` satisfies `T b = error · e_N`.
#[derive(Debug, Clone)]
pub struct Predictor {
    pub predictor: Vec<Complex64>,
    pub error: f64,
    pub reflections: Vec<Complex64>,
}

fn check_t0(t: &HermitianToeplitz) -> Result<f64> {
    let t0 = t.col[0].re;
    if !(t0 > 0.0) {
        return Err(Error::NotPositiveDefinite {
            step: 0,
            reflection: f64::INFINITY,
        });
    }
    Ok(t0)
}

/// Runs the Levinson–Durbin recursion, calling `on_step(n, a_n, ε_n)` after
/// each order `n` is available (including `n = 0`).
pub(crate) fn levinson_recursion(
    t: &HermitianToeplitz,
    mut on_step: impl FnMut(usize, &[Complex64], f64),
) -> Result<Predictor> {
    let n = t.dim();
    let mut err = check_t0(t)?;
    let mut a = Vec::with_capacity(n);
    a.push(Complex64::new(1.0, 0.0));
    let mut reflections = Vec::with_capacity(n.saturating_sub(1));
    on_step(0, &a, err);
    let mut next = Vec::with_capacity(n);
    for k in 0..n - 1 {
        // δ = Σ_l t_{k+1-l} a_l
        let delta: Complex64 = a
            .iter()
            .enumerate()
            .map(|(l, al)| t.col[k + 1 - l] * al)
            .sum();
        let kappa = -delta / err;
        let mag = kappa.norm();
        if !(mag < BREAKDOWN) {
            return Err(Error::NotPositiveDefinite {
                step: k + 1,
                reflection: mag,
            });
        }
        next.clear();
        next.push(a[0]);
        for i in 1..=k {
            next.push(a[i] + kappa * a[k + 1 - i].conj());
        }
        next.push(kappa * a[0].conj());
        std::mem::swap(&mut a, &mut next);
        err *= 1.0 - mag * mag;
        reflections.push(kappa);
        on_step(k + 1, &a, err);
    }
    Ok(Predictor {
        predictor: a,
        error: err,
        reflections,
    })
}

/// Forward predictor of the full matrix.
pub fn levinson_predictor(t: &HermitianToeplitz) -> Result<Predictor> {
    levinson_recursion(t, |_, _, _| {})
}

/// Solves `T x = rhs` by the Levinson recursion.
pub fn levinson_solve(t: &HermitianToeplitz, rhs: &[Complex64]) -> Result<Vec<Complex64>> {
    let n = t.dim();
    if rhs.len() != n {
        return Err(Error::InvalidArgument(format!(
            "rhs has length {}, matrix has dimension {n}",
            rhs.len()
        )));
    }
    let mut x: Vec<Complex64> = Vec::with_capacity(n);
    levinson_recursion(t, |k, a, err| {
        // Row k of T applied to [x; 0].
        let gamma: Complex64 = x.iter().enumerate().map(|(l, xl)| t.col[k - l] * xl).sum();
        let mu = (rhs[k] - gamma) / err;
        x.push(Complex64::new(0.0, 0.0));
        // x += μ b_k, b_k = J conj(a_k)
        for (i, xi) in x.iter_mut().enumerate() {
            *xi += mu * a[k - i].conj();
        }
    })?;
    Ok(x)
}

/// Dense inverse by Trench's recursion, symmetrized to be exactly Hermitian.
///
/// Uses the Gohberg–Semencul structure
/// `G_{j+1,l+1} = G_{j,l} + (a_{j+1} conj(a_{l+1}) - b_j conj(b_l)) / ε`
/// seeded with the first column `a / ε`.
pub fn trench_inverse(t: &HermitianToeplitz) -> Result<DMatrix<Complex64>> {
    let n = t.dim();
    let Predictor {
        predictor: a,
        error: err,
        ..
    } = levinson_predictor(t)?;
    let b: Vec<Complex64> = (0..n).map(|i| a[n - 1 - i].conj()).collect();
    let mut g = DMatrix::<Complex64>::zeros(n, n);
    for j in 0..n {
        g[(j, 0)] = a[j] / err;
    }
    for l in 0..n - 1 {
        for j in l..n - 1 {
            g[(j + 1, l + 1)] = g[(j, l)] + (a[j + 1] * a[l + 1].conj() - b[j] * b[l].conj()) / err;
        }
    }
    for l in 0..n {
        g[(l, l)].im = 0.0;
        for j in l + 1..n {
            g[(l, j)] = g[(j, l)].conj();
        }
    }
    Ok(g)
}

/// Lower-triangular `L` with positive diagonal and `Lᴴ L = T`.
#[derive(Debug, Clone)]
pub struct CholeskyFactor {
    lower: DMatrix<Complex64>,
}

impl CholeskyFactor {
    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.lower
    }

    pub fn into_matrix(self) -> DMatrix<Complex64> {
        self.lower
    }

    pub fn dim(&self) -> usize {
        self.lower.nrows()
    }

    /// `Lᴴ L`.
    pub fn reconstruct(&self) -> DMatrix<Complex64> {
        self.lower.adjoint() * &self.lower
    }

    /// The conventional factor `R` (lower, `R Rᴴ = T`), obtained as `J Lᵀ J`.
    pub fn conventional(&self) -> DMatrix<Complex64> {
        let n = self.dim();
        DMatrix::from_fn(n, n, |i, j| self.lower[(n - 1 - j, n - 1 - i)])
    }
}

/// Factorization `T = Lᴴ L` via the Schur algorithm in O(N²).
///
/// The Schur generator recursion produces the conventional factor `R` with
/// `T = R Rᴴ` column by column. For Hermitian Toeplitz matrices
/// `J conj(T) J = T`, so `L = J Rᵀ J` is lower triangular with `Lᴴ L = T`.
pub fn toeplitz_cholesky(t: &HermitianToeplitz) -> Result<CholeskyFactor> {
    let r = schur_lower(t)?;
    let n = t.dim();
    let lower = DMatrix::from_fn(n, n, |i, j| r[(n - 1 - j, n - 1 - i)]);
    Ok(CholeskyFactor { lower })
}

/// Conventional lower factor `R` with `R Rᴴ = T`, from the displacement
/// generators `T - Z T Zᴴ = g gᴴ - h hᴴ`.
fn schur_lower(t: &HermitianToeplitz) -> Result<DMatrix<Complex64>> {
    let n = t.dim();
    let t0 = check_t0(t)?;
    let s = t0.sqrt();
    let mut g: Vec<Complex64> = t.col.iter().map(|v| v / s).collect();
    let mut h = g.clone();
    h[0] = Complex64::new(0.0, 0.0);
    let mut r = DMatrix::<Complex64>::zeros(n, n);
    for k in 0..n {
        for i in k..n {
            r[(i, k)] = g[i];
        }
        if k + 1 == n {
            break;
        }
        // shift g down by one
        for i in (k + 1..n).rev() {
            g[i] = g[i - 1];
        }
        g[k] = Complex64::new(0.0, 0.0);
        let rho = h[k + 1] / g[k + 1];
        let mag = rho.norm();
        if !(mag < BREAKDOWN) || !g[k + 1].re.is_finite() {
            return Err(Error::NotPositiveDefinite {
                step: k + 1,
                reflection: mag,
            });
        }
        let scale = 1.0 / (1.0 - mag * mag).sqrt();
        for i in k + 1..n {
            let (gi, hi) = (g[i], h[i]);
            g[i] = (gi - rho.conj() * hi) * scale;
            h[i] = (hi - rho * gi) * scale;
        }
        // Keep the diagonal real; it is up to rounding.
        g[k + 1].im = 0.0;
        h[k + 1] = Complex64::new(0.0, 0.0);
        if !(g[k + 1].re > 0.0) {
            return Err(Error::NotPositiveDefinite {
                step: k + 1,
                reflection: mag,
            });
        }
    }
    Ok(r)
}
