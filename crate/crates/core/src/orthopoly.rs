//! Orthogonal polynomials on the unit circle, their zeros, and the finite
//! section of the Koopman operator on `span(f, Uf, …, U^{N−1}f)`, whose
//! characteristic polynomial is the monic orthogonal polynomial `Φ_N`.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::moments::{MomentSequence, Trajectory};
use crate::toeplitz::{levinson_recursion, levinson_solve, toeplitz_cholesky, HermitianToeplitz};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Coefficients of `φ_0..φ_N` in the monomial basis: row `i` holds the
/// coefficients of `φ_i`, so the matrix is lower triangular.
#[derive(Debug, Clone)]
pub struct PolynomialBasis {
    coeffs: DMatrix<Complex64>,
}

impl PolynomialBasis {
    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.coeffs
    }

    pub fn degree(&self) -> usize {
        self.coeffs.nrows() - 1
    }

    /// `φ_i(z)`.
    pub fn eval(&self, i: usize, z: Complex64) -> Complex64 {
        (0..=i)
            .rev()
            .fold(ZERO, |acc, j| acc * z + self.coeffs[(i, j)])
    }
}

/// `Φ_N(z) = z^N + Σ_{j<N} a_j z^j`.
#[derive(Debug, Clone, PartialEq)]
pub struct MonicPolynomial {
    lower: Vec<Complex64>,
}

impl MonicPolynomial {
    /// From `a_0..a_{N−1}`.
    pub fn new(lower: Vec<Complex64>) -> Self {
        Self { lower }
    }

    /// `Π (z − r)`.
    pub fn from_roots(roots: &[Complex64]) -> Self {
        let mut c = vec![ONE];
        for r in roots {
            let mut next = vec![ZERO; c.len() + 1];
            for (j, cj) in c.iter().enumerate() {
                next[j + 1] += cj;
                next[j] -= cj * r;
            }
            c = next;
        }
        c.pop();
        Self { lower: c }
    }

    pub fn degree(&self) -> usize {
        self.lower.len()
    }

    /// `a_0..a_{N−1}`; the leading coefficient is 1.
    pub fn coefficients(&self) -> &[Complex64] {
        &self.lower
    }

    pub fn eval(&self, z: Complex64) -> Complex64 {
        self.lower.iter().rev().fold(ONE, |acc, a| acc * z + a)
    }

    fn eval_with_derivative(&self, z: Complex64) -> (Complex64, Complex64) {
        let (mut p, mut d) = (ONE, ZERO);
        for a in self.lower.iter().rev() {
            d = d * z + p;
            p = p * z + a;
        }
        (p, d)
    }
}

/// Zeros of `Φ_N` with multiplicity.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumEstimate {
    zeros: Vec<Complex64>,
}

impl SpectrumEstimate {
    pub fn new(zeros: Vec<Complex64>) -> Self {
        Self { zeros }
    }

    pub fn zeros(&self) -> &[Complex64] {
        &self.zeros
    }

    pub fn len(&self) -> usize {
        self.zeros.len()
    }

    pub fn is_empty(&self) -> bool {
        self.zeros.is_empty()
    }
}

#[derive(Serialize, Deserialize)]
struct SpectrumRepr {
    zeros: Vec<[f64; 2]>,
}

impl Serialize for SpectrumEstimate {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        SpectrumRepr {
            zeros: self.zeros.iter().map(|z| [z.re, z.im]).collect(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for SpectrumEstimate {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let r = SpectrumRepr::deserialize(d)?;
        Ok(Self {
            zeros: r
                .zeros
                .into_iter()
                .map(|[a, b]| Complex64::new(a, b))
                .collect(),
        })
    }
}

fn degenerate(e: Error) -> Error {
    match e {
        Error::NotPositiveDefinite { step, .. } => Error::BasisDegenerate {
            max_degree: step.saturating_sub(1),
        },
        other => other,
    }
}

fn moment_matrix(m: &MomentSequence, order: usize) -> Result<HermitianToeplitz> {
    if m.order() < order {
        return Err(Error::InvalidArgument(format!(
            "degree {order} needs moments up to m_{order}, have m_{}",
            m.order()
        )));
    }
    Ok(HermitianToeplitz::from_moments(&m.truncate(order)?))
}

/// Orthonormal `φ_0..φ_N` from the Cholesky factor of the moment matrix.
pub fn orthonormal_basis(m: &MomentSequence, order: usize) -> Result<PolynomialBasis> {
    let t = moment_matrix(m, order)?;
    let r = toeplitz_cholesky(&t).map_err(degenerate)?.conventional();
    let id = DMatrix::<Complex64>::identity(order + 1, order + 1);
    let coeffs = r
        .solve_lower_triangular(&id)
        .ok_or_else(|| Error::BasisDegenerate {
            max_degree: order.saturating_sub(1),
        })?;
    Ok(PolynomialBasis { coeffs })
}

/// `Φ_N`, read off the Levinson predictor: `Φ_N(z) = Σ_j a_{N−j} z^j`.
pub fn monic_orthogonal(m: &MomentSequence, order: usize) -> Result<MonicPolynomial> {
    let t = moment_matrix(m, order)?;
    let p = levinson_recursion(&t, |_, _, _| {}).map_err(degenerate)?;
    let a = p.predictor;
    Ok(MonicPolynomial {
        lower: (0..order).map(|j| a[order - j]).collect(),
    })
}

/// All zeros by Aberth–Ehrlich simultaneous iteration.
pub fn poly_roots(p: &MonicPolynomial) -> Result<SpectrumEstimate> {
    let n = p.degree();
    if n == 0 {
        return Err(Error::InvalidArgument("polynomial has degree 0".into()));
    }
    let amax = p.lower.iter().map(|a| a.norm()).fold(0.0, f64::max);
    let tol = 1e-8 * (1.0 + amax);
    let radius = (1.0 + amax).powf(1.0 / n as f64);
    let mut z: Vec<Complex64> = (0..n)
        .map(|k| {
            let ang = 2.0 * std::f64::consts::PI * (k as f64 + 0.25) / n as f64 + 0.4;
            Complex64::from_polar(radius * (1.0 + 0.01 * ((k % 7) as f64)), ang)
        })
        .collect();
    let mut worst = f64::INFINITY;
    for _ in 0..500 {
        let mut max_step = 0.0f64;
        for i in 0..n {
            let (pv, dv) = p.eval_with_derivative(z[i]);
            if pv == ZERO {
                continue;
            }
            let ratio = pv / dv;
            let s: Complex64 = (0..n)
                .filter(|&j| j != i)
                .map(|j| {
                    let d = z[i] - z[j];
                    if d == ZERO {
                        ZERO
                    } else {
                        d.inv()
                    }
                })
                .sum();
            let step = ratio / (ONE - ratio * s);
            if step.re.is_finite() && step.im.is_finite() {
                z[i] -= step;
                max_step = max_step.max(step.norm() / (1.0 + z[i].norm()));
            }
        }
        worst = z.iter().map(|&r| p.eval(r).norm()).fold(0.0, f64::max);
        if worst <= tol && max_step <= 1e-12 {
            break;
        }
    }
    if !(worst <= tol) {
        return Err(Error::NumericalFailure(format!(
            "Aberth iteration did not converge: max residual {worst:e} > {tol:e}"
        )));
    }
    Ok(SpectrumEstimate { zeros: z })
}

/// Matrix of `P_N U P_N` in the basis `(f, Uf, …, U^{N−1}f)`, computed from
/// `m_0..m_N`: column `j` solves `B c = (m_{j+1−i})_i` with the Gram matrix
/// `B_{il} = ⟨U^l f, U^i f⟩ = m_{l−i}`.
pub fn finite_section_matrix(m: &MomentSequence, order: usize) -> Result<DMatrix<Complex64>> {
    if order == 0 {
        return Err(Error::InvalidArgument("finite section needs N ≥ 1".into()));
    }
    if m.order() < order {
        return Err(Error::InvalidArgument(format!(
            "N = {order} needs moments up to m_{order}, have m_{}",
            m.order()
        )));
    }
    let gram = HermitianToeplitz::new((0..order).map(|d| m.get(d as i64).conj()).collect())?;
    let mut u = DMatrix::zeros(order, order);
    for j in 0..order {
        let rhs: Vec<Complex64> = (0..order).map(|i| m.get(j as i64 + 1 - i as i64)).collect();
        let col = levinson_solve(&gram, &rhs).map_err(degenerate)?;
        for (i, c) in col.into_iter().enumerate() {
            u[(i, j)] = c;
        }
    }
    Ok(u)
}

/// Hankel DMD from a trajectory: `Ĝ⁻¹Â` with `Ĝ_{il}` the time average of
/// `y_{t+l} conj(y_{t+i})` and `Â_{ij}` that of `y_{t+j+1} conj(y_{t+i})`.
pub fn hankel_dmd(traj: &Trajectory, order: usize) -> Result<DMatrix<Complex64>> {
    let m = traj.len();
    if order == 0 {
        return Err(Error::InvalidArgument("Hankel DMD needs N ≥ 1".into()));
    }
    if m < 2 * order + 2 {
        return Err(Error::InvalidArgument(format!(
            "Hankel DMD of order {order} needs at least {} samples, got {m}",
            2 * order + 2
        )));
    }
    let y = traj.samples();
    let window = m - order;
    // c[i][l] = Σ_t y_{t+l} conj(y_{t+i}) for l = 0..=N
    let sums: Vec<Vec<Complex64>> = (0..order)
        .map(|i| {
            (0..=order)
                .map(|l| {
                    (0..window)
                        .map(|t| y[t + l] * y[t + i].conj())
                        .sum::<Complex64>()
                })
                .collect()
        })
        .collect();
    let scale = 1.0 / window as f64;
    let g = DMatrix::from_fn(order, order, |i, l| sums[i][l] * scale);
    let a = DMatrix::from_fn(order, order, |i, j| sums[i][j + 1] * scale);
    let lu = g.lu();
    let det = lu.determinant().norm();
    if !(det > 0.0) || !det.is_finite() {
        return Err(Error::BasisDegenerate { max_degree: 0 });
    }
    lu.solve(&a).ok_or(Error::BasisDegenerate { max_degree: 0 })
}

/// Characteristic polynomial `det(zI − A)` via Hessenberg reduction and
/// Hyman's recurrence.
pub fn char_poly(a: &DMatrix<Complex64>) -> MonicPolynomial {
    let n = a.nrows();
    assert_eq!(n, a.ncols(), "square matrix required");
    let h = a.clone().hessenberg().h();
    // p[i] = characteristic polynomial of the leading i×i block, ascending.
    let mut p: Vec<Vec<Complex64>> = vec![vec![ONE]];
    for i in 0..n {
        let mut next = vec![ZERO; i + 2];
        for (j, c) in p[i].iter().enumerate() {
            next[j + 1] += c;
            next[j] -= c * h[(i, i)];
        }
        let mut prod = ONE;
        for k in (0..i).rev() {
            prod *= h[(k + 1, k)];
            let f = prod * h[(k, i)];
            for (j, c) in p[k].iter().enumerate() {
                next[j] -= c * f;
            }
        }
        p.push(next);
    }
    let mut c = p.pop().unwrap();
    c.pop();
    MonicPolynomial { lower: c }
}

/// `max_{x∈a} min_{y∈b} |x − y|`.
pub fn hausdorff_one_sided(a: &[Complex64], b: &[Complex64]) -> f64 {
    a.iter()
        .map(|x| {
            b.iter()
                .map(|y| (x - y).norm())
                .fold(f64::INFINITY, f64::min)
        })
        .fold(0.0, f64::max)
}
