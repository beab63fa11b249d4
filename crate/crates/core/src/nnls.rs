//! Lawson–Hanson active-set NNLS with an updated QR factorization of the
//! passive columns, for problems whose columns are cheap to generate and
//! whose gradient `Aᵀr` has a fast transform.

use crate::error::{Error, Result};

const BATCH_DIV: usize = 4;
const WARM_CHUNK: usize = 256;

pub(crate) trait NnlsProblem {
    fn rows(&self) -> usize;
    fn cols(&self) -> usize;
    fn column(&self, j: usize, out: &mut [f64]);
    /// `out = Aᵀ r`.
    fn gradient(&self, r: &[f64], out: &mut [f64]);
}

#[derive(Debug, Clone)]
pub(crate) struct NnlsSolution {
    pub x: Vec<f64>,
    /// `‖A x − b‖²`.
    pub residual_sq: f64,
    pub iterations: usize,
}

/// `I − β v vᵀ` acting on coordinates `offset..`.
struct Reflector {
    offset: usize,
    v: Vec<f64>,
    beta: f64,
}

impl Reflector {
    fn apply(&self, x: &mut [f64]) {
        let tail = &mut x[self.offset..];
        let s = dot(&self.v, tail);
        axpy(-self.beta * s, &self.v, tail);
    }
}

/// Orthogonal factorization `A_P = Q R` of the passive columns, with `Qᵀ`
/// stored row-major and `Qᵀ b` carried along.
struct UpdatedQr {
    m: usize,
    qt: Vec<f64>,
    r_cols: Vec<Vec<f64>>,
    qtb: Vec<f64>,
}

impl UpdatedQr {
    fn new(b: &[f64]) -> Self {
        let m = b.len();
        let mut qt = vec![0.0; m * m];
        for i in 0..m {
            qt[i * m + i] = 1.0;
        }
        Self {
            m,
            qt,
            r_cols: Vec::new(),
            qtb: b.to_vec(),
        }
    }

    fn rank(&self) -> usize {
        self.r_cols.len()
    }

    fn row(&self, i: usize) -> &[f64] {
        &self.qt[i * self.m..(i + 1) * self.m]
    }

    /// `Qᵀ a` for every column of `cols`, in one pass over `Qᵀ`.
    fn project_many(&self, cols: &[Vec<f64>]) -> Vec<Vec<f64>> {
        let mut out = vec![vec![0.0; self.m]; cols.len()];
        for i in 0..self.m {
            let row = self.row(i);
            for (a, o) in cols.iter().zip(out.iter_mut()) {
                o[i] = dot(row, a);
            }
        }
        out
    }

    /// Appends a column given `w = Qᵀ a`, reflecting `w[p..]` onto `e_p`.
    /// Returns the reflector so that pending projections can follow it.
    fn push(&mut self, mut w: Vec<f64>) -> Option<Reflector> {
        let (m, p) = (self.m, self.rank());
        let norm = dot(&w[p..], &w[p..]).sqrt();
        let mut reflector = None;
        if norm > 0.0 && p + 1 < m {
            let alpha = if w[p] > 0.0 { -norm } else { norm };
            let mut v = w[p..].to_vec();
            v[0] -= alpha;
            let vnorm_sq = dot(&v, &v);
            if vnorm_sq > 0.0 {
                let beta = 2.0 / vnorm_sq;
                let mut s = vec![0.0; m];
                for (i, vi) in v.iter().enumerate() {
                    axpy(*vi, &self.qt[(p + i) * m..(p + i + 1) * m], &mut s);
                }
                for (i, vi) in v.iter().enumerate() {
                    axpy(-beta * vi, &s, &mut self.qt[(p + i) * m..(p + i + 1) * m]);
                }
                let h = Reflector { offset: p, v, beta };
                h.apply(&mut self.qtb);
                reflector = Some(h);
                w[p] = alpha;
            }
        }
        w.truncate(p + 1);
        self.r_cols.push(w);
        reflector
    }

    /// Removes passive column `idx` and restores triangularity with Givens
    /// rotations.
    fn remove(&mut self, idx: usize) {
        self.r_cols.remove(idx);
        let m = self.m;
        for j in idx..self.rank() {
            let (a, b) = (self.r_cols[j][j], self.r_cols[j][j + 1]);
            let h = a.hypot(b);
            if h == 0.0 {
                self.r_cols[j].truncate(j + 1);
                continue;
            }
            let (c, s) = (a / h, b / h);
            for col in self.r_cols[j..].iter_mut() {
                let (x, y) = (col[j], col[j + 1]);
                col[j] = c * x + s * y;
                col[j + 1] = -s * x + c * y;
            }
            self.r_cols[j].truncate(j + 1);
            let (top, bottom) = self.qt.split_at_mut((j + 1) * m);
            let rj = &mut top[j * m..];
            let rj1 = &mut bottom[..m];
            rotate(c, s, rj, rj1);
            let (u, v) = (self.qtb[j], self.qtb[j + 1]);
            self.qtb[j] = c * u + s * v;
            self.qtb[j + 1] = -s * u + c * v;
        }
    }

    /// Least-squares coefficients of the passive columns.
    fn solve(&self) -> Vec<f64> {
        let p = self.rank();
        let mut z = self.qtb[..p].to_vec();
        for j in (0..p).rev() {
            let col = &self.r_cols[j];
            z[j] /= col[j];
            let zj = z[j];
            axpy(-zj, &col[..j], &mut z[..j]);
        }
        z
    }

    /// Residual `b − A_P z` of the least-squares solution.
    fn residual(&self) -> Vec<f64> {
        let mut r = vec![0.0; self.m];
        for i in self.rank()..self.m {
            axpy(self.qtb[i], self.row(i), &mut r);
        }
        r
    }
}

#[inline(always)]
fn dot_impl(a: &[f64], b: &[f64]) -> f64 {
    let n = a.len().min(b.len());
    let (a, b) = (&a[..n], &b[..n]);
    // Independent accumulators so the loop vectorizes.
    let mut acc = [0.0f64; 8];
    let (ca, cb) = (a.chunks_exact(8), b.chunks_exact(8));
    let tail: f64 = ca
        .remainder()
        .iter()
        .zip(cb.remainder())
        .map(|(x, y)| x * y)
        .sum();
    for (x, y) in ca.zip(cb) {
        for i in 0..8 {
            acc[i] += x[i] * y[i];
        }
    }
    acc.iter().sum::<f64>() + tail
}

#[inline(always)]
fn axpy_impl(a: f64, x: &[f64], y: &mut [f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += a * xi;
    }
}

#[inline(always)]
fn rotate_impl(c: f64, s: f64, x: &mut [f64], y: &mut [f64]) {
    for (xi, yi) in x.iter_mut().zip(y.iter_mut()) {
        let (u, v) = (*xi, *yi);
        *xi = c * u + s * v;
        *yi = c * v - s * u;
    }
}

#[cfg(target_arch = "x86_64")]
mod avx {
    #[target_feature(enable = "avx2")]
    pub unsafe fn dot(a: &[f64], b: &[f64]) -> f64 {
        super::dot_impl(a, b)
    }

    #[target_feature(enable = "avx2")]
    pub unsafe fn axpy(a: f64, x: &[f64], y: &mut [f64]) {
        super::axpy_impl(a, x, y)
    }

    #[target_feature(enable = "avx2")]
    pub unsafe fn rotate(c: f64, s: f64, x: &mut [f64], y: &mut [f64]) {
        super::rotate_impl(c, s, x, y)
    }
}

#[cfg(target_arch = "x86_64")]
fn has_avx2() -> bool {
    std::arch::is_x86_feature_detected!("avx2")
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    #[cfg(target_arch = "x86_64")]
    if has_avx2() {
        // SAFETY: the feature was detected at runtime.
        return unsafe { avx::dot(a, b) };
    }
    dot_impl(a, b)
}

fn axpy(a: f64, x: &[f64], y: &mut [f64]) {
    #[cfg(target_arch = "x86_64")]
    if has_avx2() {
        // SAFETY: the feature was detected at runtime.
        return unsafe { avx::axpy(a, x, y) };
    }
    axpy_impl(a, x, y)
}

/// Applies the plane rotation `[c s; −s c]` to the pair `(x, y)`.
fn rotate(c: f64, s: f64, x: &mut [f64], y: &mut [f64]) {
    #[cfg(target_arch = "x86_64")]
    if has_avx2() {
        // SAFETY: the feature was detected at runtime.
        return unsafe { avx::rotate(c, s, x, y) };
    }
    rotate_impl(c, s, x, y)
}

/// Appends those of the columns `cands` that are numerically independent of
/// the passive set, projecting them all in one pass; returns the rest.
fn push_columns(
    qr: &mut UpdatedQr,
    problem: &impl NnlsProblem,
    cands: &[usize],
    dep_tol: f64,
    passive: &mut Vec<usize>,
    in_passive: &mut [bool],
) -> Vec<usize> {
    let m = qr.m;
    let cols: Vec<Vec<f64>> = cands
        .iter()
        .map(|&j| {
            let mut c = vec![0.0; m];
            problem.column(j, &mut c);
            c
        })
        .collect();
    let mut projs = qr.project_many(&cols);
    let mut rejected = Vec::new();
    for (k, &j) in cands.iter().enumerate() {
        let p = qr.rank();
        let proj = std::mem::take(&mut projs[k]);
        if p >= m || dot(&proj[p..], &proj[p..]).sqrt() <= dep_tol * dot(&cols[k], &cols[k]).sqrt()
        {
            rejected.push(j);
            continue;
        }
        if let Some(h) = qr.push(proj) {
            for rest in &mut projs[k + 1..] {
                h.apply(rest);
            }
        }
        passive.push(j);
        in_passive[j] = true;
    }
    rejected
}

/// Minimizes `‖A x − b‖` subject to `x ≥ 0`.
#[cfg(test)]
pub(crate) fn lawson_hanson(
    problem: &impl NnlsProblem,
    b: &[f64],
    max_iter: usize,
) -> Result<NnlsSolution> {
    lawson_hanson_from(problem, b, &[], max_iter, 0.0)
}

/// Lawson–Hanson started from the passive set obtained by fitting the
/// columns `initial` without constraints and repeatedly discarding those
/// with nonpositive coefficients.
pub(crate) fn lawson_hanson_from(
    problem: &impl NnlsProblem,
    b: &[f64],
    initial: &[usize],
    max_iter: usize,
    min_gain: f64,
) -> Result<NnlsSolution> {
    let (m, n) = (problem.rows(), problem.cols());
    assert_eq!(b.len(), m);
    let mut qr = UpdatedQr::new(b);
    let mut passive: Vec<usize> = Vec::new();
    let mut in_passive = vec![false; n];
    let mut banned = vec![false; n];
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    let mut col = vec![0.0; m];
    let bnorm = dot(b, b).sqrt();
    let mut col_scale = 0.0f64;
    for j in [0, n / 2, n - 1] {
        problem.column(j, &mut col);
        col_scale = col_scale.max(dot(&col, &col).sqrt());
    }
    // A single column can lower ‖r‖² by at most w_j²/‖a_j‖², so the second
    // term stops once no column is worth more than `min_gain·‖b‖²`.
    let tol = (1e-15 * col_scale.max(1.0) * bnorm.max(1.0) * (m as f64).sqrt())
        .max(min_gain.sqrt() * col_scale * bnorm);

    let mut seen = vec![false; n];
    let initial: Vec<usize> = initial
        .iter()
        .copied()
        .filter(|&j| j < n && !std::mem::replace(&mut seen[j], true))
        .collect();
    for chunk in initial.chunks(WARM_CHUNK) {
        push_columns(&mut qr, problem, chunk, 1e-8, &mut passive, &mut in_passive);
    }
    loop {
        let z = qr.solve();
        if z.iter().all(|&v| v > 0.0) {
            for (&j, &zj) in passive.iter().zip(&z) {
                x[j] = zj;
            }
            break;
        }
        for k in (0..passive.len()).rev() {
            if z[k] <= 0.0 {
                qr.remove(k);
                in_passive[passive.remove(k)] = false;
            }
        }
    }
    let mut r = qr.residual();
    let mut iterations = 0;
    loop {
        if qr.rank() >= m {
            break;
        }
        problem.gradient(&r, &mut w);
        let pick = (0..n)
            .filter(|&j| !in_passive[j] && !banned[j])
            .max_by(|&i, &j| w[i].total_cmp(&w[j]));
        let Some(t) = pick else { break };
        if w[t] <= tol {
            break;
        }
        iterations += 1;
        if iterations > max_iter {
            return Err(Error::NumericalFailure(format!(
                "NNLS did not converge within {max_iter} iterations"
            )));
        }
        let batch = ((m - qr.rank()) / BATCH_DIV).max(1);
        let mut cands: Vec<usize> = if batch > 1 {
            (0..n)
                .filter(|&j| {
                    !in_passive[j]
                        && !banned[j]
                        && w[j] > tol
                        && w[j] >= w[(j + n - 1) % n]
                        && w[j] > w[(j + 1) % n]
                })
                .collect()
        } else {
            Vec::new()
        };
        cands.sort_by(|&i, &j| w[j].total_cmp(&w[i]));
        cands.truncate(batch);
        if !cands.contains(&t) {
            cands.insert(0, t);
            cands.truncate(batch);
        }
        let first_new = passive.len();
        if push_columns(
            &mut qr,
            problem,
            &cands,
            1e-10,
            &mut passive,
            &mut in_passive,
        )
        .contains(&t)
        {
            banned[t] = true;
        }
        let mut z = qr.solve();
        loop {
            let bad: Vec<usize> = (first_new..passive.len())
                .filter(|&k| z[k] <= 0.0)
                .collect();
            if bad.is_empty() {
                break;
            }
            for &k in bad.iter().rev() {
                qr.remove(k);
                in_passive[passive.remove(k)] = false;
            }
            z = qr.solve();
        }
        if passive.len() == first_new {
            banned[t] = true;
            continue;
        }
        banned.iter_mut().for_each(|v| *v = false);

        // Inner loop: step back toward feasibility.
        loop {
            if z.iter().all(|&v| v > 0.0) {
                for (&j, &zj) in passive.iter().zip(&z) {
                    x[j] = zj;
                }
                break;
            }
            let mut alpha = f64::INFINITY;
            for (&j, &zj) in passive.iter().zip(&z) {
                if zj <= 0.0 {
                    alpha = alpha.min(x[j] / (x[j] - zj));
                }
            }
            for (&j, &zj) in passive.iter().zip(&z) {
                x[j] += alpha * (zj - x[j]);
            }
            let mut k = 0;
            while k < passive.len() {
                let j = passive[k];
                if x[j] <= 1e-15 * col_scale.recip().max(1.0) || (z[k] <= 0.0 && x[j] <= 0.0) {
                    x[j] = 0.0;
                    qr.remove(k);
                    passive.remove(k);
                    z.remove(k);
                    in_passive[j] = false;
                } else {
                    k += 1;
                }
            }
            z = qr.solve();
        }
        r = qr.residual();
    }
    let mut ax = vec![0.0; m];
    for &j in &passive {
        problem.column(j, &mut col);
        axpy(x[j], &col, &mut ax);
    }
    let residual_sq = ax.iter().zip(b).map(|(a, bb)| (a - bb) * (a - bb)).sum();
    Ok(NnlsSolution {
        x,
        residual_sq,
        iterations,
    })
}
