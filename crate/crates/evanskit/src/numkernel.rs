//! Complex dense linear algebra and adaptive ODE propagation.
//!
//! Everything here operates on small dense matrices (a few hundred square at
//! most): LU with partial pivoting for determinants and linear solves,
//! Householder reduction to Hessenberg form followed by shifted QR iteration
//! for eigenvalues, and an embedded Dormand–Prince 5(4) integrator for
//! complex linear systems. All routines are pure functions of their inputs
//! and safe to call from multiple threads.

use crate::{Error, Result};
use num_complex::Complex64;

/// Maximum matrix dimension accepted by [`eig`].
pub const EIG_DIM_CAP: usize = 256;

/// Dense complex matrix, row-major storage.
#[derive(Debug, Clone, PartialEq)]
pub struct CMatrix {
    rows: usize,
    cols: usize,
    entries: Vec<Complex64>,
}

impl CMatrix {
    /// Build a matrix from row-major entries, rejecting shape mismatches and
    /// non-finite values.
    pub fn new(rows: usize, cols: usize, entries: Vec<Complex64>) -> Result<Self> {
        if entries.len() != rows * cols {
            return Err(Error::Dimension(format!(
                "{}x{} matrix needs {} entries, got {}",
                rows,
                cols,
                rows * cols,
                entries.len()
            )));
        }
        if entries.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::Domain("matrix entries must be finite".into()));
        }
        Ok(CMatrix { rows, cols, entries })
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        CMatrix { rows, cols, entries: vec![Complex64::new(0.0, 0.0); rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = CMatrix::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = Complex64::new(1.0, 0.0);
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> Complex64) -> Self {
        let mut entries = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                entries.push(f(i, j));
            }
        }
        CMatrix { rows, cols, entries }
    }

    /// Convenience constructor from real row slices.
    pub fn from_real_rows(rows: &[&[f64]]) -> Self {
        let r = rows.len();
        let c = if r > 0 { rows[0].len() } else { 0 };
        CMatrix::from_fn(r, c, |i, j| Complex64::new(rows[i][j], 0.0))
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn scale(&self, k: Complex64) -> CMatrix {
        CMatrix {
            rows: self.rows,
            cols: self.cols,
            entries: self.entries.iter().map(|z| z * k).collect(),
        }
    }

    pub fn add(&self, other: &CMatrix) -> CMatrix {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols), "shape mismatch in add");
        CMatrix {
            rows: self.rows,
            cols: self.cols,
            entries: self.entries.iter().zip(&other.entries).map(|(a, b)| a + b).collect(),
        }
    }

    pub fn sub(&self, other: &CMatrix) -> CMatrix {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols), "shape mismatch in sub");
        CMatrix {
            rows: self.rows,
            cols: self.cols,
            entries: self.entries.iter().zip(&other.entries).map(|(a, b)| a - b).collect(),
        }
    }

    pub fn matmul(&self, other: &CMatrix) -> CMatrix {
        assert_eq!(self.cols, other.rows, "inner dimension mismatch in matmul");
        let mut out = CMatrix::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a == Complex64::new(0.0, 0.0) {
                    continue;
                }
                for j in 0..other.cols {
                    out[(i, j)] += a * other[(k, j)];
                }
            }
        }
        out
    }

    pub fn matvec(&self, v: &[Complex64]) -> Vec<Complex64> {
        assert_eq!(self.cols, v.len(), "vector length mismatch in matvec");
        (0..self.rows)
            .map(|i| (0..self.cols).map(|j| self[(i, j)] * v[j]).sum())
            .collect()
    }

    /// Conjugate transpose.
    pub fn adjoint(&self) -> CMatrix {
        CMatrix::from_fn(self.cols, self.rows, |i, j| self[(j, i)].conj())
    }

    /// Plain transpose (no conjugation).
    pub fn transpose(&self) -> CMatrix {
        CMatrix::from_fn(self.cols, self.rows, |i, j| self[(j, i)])
    }

    pub fn trace(&self) -> Complex64 {
        assert!(self.is_square(), "trace of non-square matrix");
        (0..self.rows).map(|i| self[(i, i)]).sum()
    }

    /// Frobenius norm.
    pub fn norm(&self) -> f64 {
        self.entries.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.entries.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        if !self.is_square() {
            return false;
        }
        for i in 0..self.rows {
            for j in i..self.cols {
                if (self[(i, j)] - self[(j, i)].conj()).norm() > tol {
                    return false;
                }
            }
        }
        true
    }

    /// Copy `block` into this matrix with upper-left corner at `(i0, j0)`.
    pub fn set_block(&mut self, i0: usize, j0: usize, block: &CMatrix) {
        assert!(i0 + block.rows <= self.rows && j0 + block.cols <= self.cols, "block out of range");
        for i in 0..block.rows {
            for j in 0..block.cols {
                self[(i0 + i, j0 + j)] = block[(i, j)];
            }
        }
    }

    pub fn block(&self, i0: usize, j0: usize, rows: usize, cols: usize) -> CMatrix {
        assert!(i0 + rows <= self.rows && j0 + cols <= self.cols, "block out of range");
        CMatrix::from_fn(rows, cols, |i, j| self[(i0 + i, j0 + j)])
    }

    pub fn entries(&self) -> &[Complex64] {
        &self.entries
    }
}

impl std::ops::Index<(usize, usize)> for CMatrix {
    type Output = Complex64;
    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &Complex64 {
        &self.entries[i * self.cols + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for CMatrix {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Complex64 {
        &mut self.entries[i * self.cols + j]
    }
}

// ---- LU decomposition -------------------------------------------------

/// LU factorization with partial pivoting, kept around so determinant,
/// solves and the smallest pivot can be read off one elimination.
#[derive(Debug, Clone)]
pub struct Lu {
    lu: CMatrix,
    perm: Vec<usize>,
    sign: f64,
    min_pivot: f64,
    norm: f64,
}

impl Lu {
    pub fn decompose(m: &CMatrix) -> Result<Lu> {
        if !m.is_square() {
            return Err(Error::Dimension(format!("LU needs a square matrix, got {}x{}", m.rows, m.cols)));
        }
        let n = m.rows;
        let mut lu = m.clone();
        let mut perm: Vec<usize> = (0..n).collect();
        let mut sign = 1.0;
        let mut min_pivot = f64::INFINITY;
        for k in 0..n {
            let mut p = k;
            let mut best = lu[(k, k)].norm();
            for i in (k + 1)..n {
                let v = lu[(i, k)].norm();
                if v > best {
                    best = v;
                    p = i;
                }
            }
            if p != k {
                for j in 0..n {
                    let t = lu[(k, j)];
                    lu[(k, j)] = lu[(p, j)];
                    lu[(p, j)] = t;
                }
                perm.swap(k, p);
                sign = -sign;
            }
            min_pivot = min_pivot.min(best);
            if best == 0.0 {
                continue; // exactly singular; keep factoring the rest
            }
            let pivot = lu[(k, k)];
            for i in (k + 1)..n {
                let factor = lu[(i, k)] / pivot;
                lu[(i, k)] = factor;
                for j in (k + 1)..n {
                    let sub = factor * lu[(k, j)];
                    lu[(i, j)] -= sub;
                }
            }
        }
        if n == 0 {
            min_pivot = 0.0;
        }
        Ok(Lu { lu, perm, sign, min_pivot, norm: m.norm() })
    }

    pub fn det(&self) -> Complex64 {
        let n = self.lu.rows;
        let mut d = Complex64::new(self.sign, 0.0);
        for i in 0..n {
            d *= self.lu[(i, i)];
        }
        d
    }

    /// Smallest pivot magnitude seen during elimination.
    pub fn min_pivot(&self) -> f64 {
        self.min_pivot
    }

    /// Frobenius norm of the original matrix.
    pub fn matrix_norm(&self) -> f64 {
        self.norm
    }

    pub fn is_singular(&self, rel_tol: f64) -> bool {
        self.min_pivot <= rel_tol * self.norm.max(f64::MIN_POSITIVE)
    }

    /// Solve `m x = b` for each column of `b`. Fails when a pivot is below
    /// `1e-13 * ||m||`.
    pub fn solve(&self, b: &CMatrix) -> Result<CMatrix> {
        let n = self.lu.rows;
        if b.rows != n {
            return Err(Error::Dimension(format!("rhs has {} rows, expected {}", b.rows, n)));
        }
        if self.is_singular(1e-13) {
            return Err(Error::SingularMatrix { min_pivot: self.min_pivot });
        }
        let mut x = CMatrix::zeros(n, b.cols);
        for c in 0..b.cols {
            // forward substitution on P b
            let mut y = vec![Complex64::new(0.0, 0.0); n];
            for i in 0..n {
                let mut acc = b[(self.perm[i], c)];
                for j in 0..i {
                    acc -= self.lu[(i, j)] * y[j];
                }
                y[i] = acc;
            }
            // back substitution
            for i in (0..n).rev() {
                let mut acc = y[i];
                for j in (i + 1)..n {
                    acc -= self.lu[(i, j)] * x[(j, c)];
                }
                x[(i, c)] = acc / self.lu[(i, i)];
            }
        }
        Ok(x)
    }
}

/// Determinant via pivoted LU. Exact for 1x1.
pub fn det(m: &CMatrix) -> Result<Complex64> {
    Ok(Lu::decompose(m)?.det())
}

/// Solve `m x = b` with partial-pivoting LU.
pub fn solve(m: &CMatrix, b: &CMatrix) -> Result<CMatrix> {
    Lu::decompose(m)?.solve(b)
}

// ---- Eigenvalues -------------------------------------------------------

/// Eigenvalues of a square complex matrix, repeated according to algebraic
/// multiplicity, computed by Householder reduction to Hessenberg form
/// followed by shifted QR iteration. Order is unspecified.
pub fn eig(m: &CMatrix) -> Result<Vec<Complex64>> {
    if !m.is_square() {
        return Err(Error::Dimension(format!("eig needs a square matrix, got {}x{}", m.rows, m.cols)));
    }
    let n = m.rows;
    if n > EIG_DIM_CAP {
        return Err(Error::Domain(format!("eig dimension {n} exceeds cap {EIG_DIM_CAP}")));
    }
    if n == 0 {
        return Ok(Vec::new());
    }
    if n == 1 {
        return Ok(vec![m[(0, 0)]]);
    }
    let mut h = hessenberg(m);
    qr_eigenvalues(&mut h)
}

/// Householder reduction to upper Hessenberg form (eigenvalues only, no
/// transform accumulation).
fn hessenberg(m: &CMatrix) -> CMatrix {
    let n = m.rows;
    let mut h = m.clone();
    for k in 0..n.saturating_sub(2) {
        // Householder vector for column k below the subdiagonal.
        let mut xnorm_sqr = 0.0;
        for i in (k + 1)..n {
            xnorm_sqr += h[(i, k)].norm_sqr();
        }
        let xnorm = xnorm_sqr.sqrt();
        if xnorm == 0.0 {
            continue;
        }
        let x0 = h[(k + 1, k)];
        let phase = if x0.norm() > 0.0 { x0 / x0.norm() } else { Complex64::new(1.0, 0.0) };
        let alpha = -phase * xnorm;
        let mut v = vec![Complex64::new(0.0, 0.0); n];
        for i in (k + 1)..n {
            v[i] = h[(i, k)];
        }
        v[k + 1] -= alpha;
        let vnorm_sqr: f64 = v.iter().map(|z| z.norm_sqr()).sum();
        if vnorm_sqr == 0.0 {
            continue;
        }
        let beta = 2.0 / vnorm_sqr;
        // H <- P H with P = I - beta v v*
        for j in k..n {
            let mut dot = Complex64::new(0.0, 0.0);
            for i in (k + 1)..n {
                dot += v[i].conj() * h[(i, j)];
            }
            dot *= beta;
            for i in (k + 1)..n {
                let sub = v[i] * dot;
                h[(i, j)] -= sub;
            }
        }
        // H <- H P
        for i in 0..n {
            let mut dot = Complex64::new(0.0, 0.0);
            for j in (k + 1)..n {
                dot += h[(i, j)] * v[j];
            }
            dot *= beta;
            for j in (k + 1)..n {
                let sub = dot * v[j].conj();
                h[(i, j)] -= sub;
            }
        }
        // Entries below the subdiagonal are now zero up to roundoff.
        for i in (k + 2)..n {
            h[(i, k)] = Complex64::new(0.0, 0.0);
        }
    }
    h
}

/// Eigenvalues of the 2x2 matrix [[a, b], [c, d]], numerically stable root
/// ordering.
fn eig2x2(a: Complex64, b: Complex64, c: Complex64, d: Complex64) -> (Complex64, Complex64) {
    let tr = a + d;
    let det = a * d - b * c;
    let disc = (tr * tr - det.scale(4.0)).sqrt();
    // pick the sign that avoids cancellation in tr ± disc
    let s1 = (tr + disc).norm();
    let s2 = (tr - disc).norm();
    let mu1 = if s1 >= s2 { (tr + disc) * 0.5 } else { (tr - disc) * 0.5 };
    let mu2 = if mu1.norm() > 0.0 { det / mu1 } else { (tr - disc) * 0.5 };
    (mu1, mu2)
}

/// Shifted QR iteration (explicit shift, complex Givens rotations) on an
/// upper Hessenberg matrix.
fn qr_eigenvalues(h: &mut CMatrix) -> Result<Vec<Complex64>> {
    let n = h.rows;
    let mut eigs = Vec::with_capacity(n);
    let mut hi = n - 1;
    let mut iter_in_block = 0usize;
    let max_iter_per_eig = 120usize;
    let eps = f64::EPSILON;

    loop {
        // Deflate negligible subdiagonals.
        let mut lo = hi;
        while lo > 0 {
            let sub = h[(lo, lo - 1)].norm();
            let scale = h[(lo - 1, lo - 1)].norm() + h[(lo, lo)].norm();
            if sub <= eps * scale.max(f64::MIN_POSITIVE) {
                h[(lo, lo - 1)] = Complex64::new(0.0, 0.0);
                break;
            }
            lo -= 1;
        }

        if lo == hi {
            // 1x1 block converged.
            eigs.push(h[(hi, hi)]);
            if hi == 0 {
                break;
            }
            hi -= 1;
            iter_in_block = 0;
            continue;
        }
        if hi - lo == 1 {
            // 2x2 block: solve directly.
            let (m1, m2) = eig2x2(h[(lo, lo)], h[(lo, hi)], h[(hi, lo)], h[(hi, hi)]);
            eigs.push(m1);
            eigs.push(m2);
            if lo == 0 {
                break;
            }
            hi = lo - 1;
            iter_in_block = 0;
            continue;
        }

        iter_in_block += 1;
        if iter_in_block > max_iter_per_eig {
            return Err(Error::Convergence(format!(
                "QR iteration stalled on block [{lo}, {hi}] after {max_iter_per_eig} sweeps"
            )));
        }

        // Wilkinson shift from the trailing 2x2, exceptional shift when stalled.
        let shift = if iter_in_block % 16 == 0 {
            let mag = h[(hi, hi - 1)].norm() + h[(hi - 1, hi - 2)].norm();
            h[(hi, hi)] + Complex64::new(mag, 0.0)
        } else {
            let (m1, m2) = eig2x2(h[(hi - 1, hi - 1)], h[(hi - 1, hi)], h[(hi, hi - 1)], h[(hi, hi)]);
            if (m1 - h[(hi, hi)]).norm() <= (m2 - h[(hi, hi)]).norm() {
                m1
            } else {
                m2
            }
        };

        for i in lo..=hi {
            h[(i, i)] -= shift;
        }
        // QR factor by Givens on the subdiagonal, then form RQ.
        let mut rotations = Vec::with_capacity(hi - lo);
        for i in lo..hi {
            let f = h[(i, i)];
            let g = h[(i + 1, i)];
            let (c, s) = givens(f, g);
            rotations.push((c, s));
            // rows i, i+1 of columns i..=hi
            for j in i..=hi {
                let a = h[(i, j)];
                let b = h[(i + 1, j)];
                h[(i, j)] = a.scale(c) + s * b;
                h[(i + 1, j)] = -s.conj() * a + b.scale(c);
            }
        }
        for (i, (c, s)) in rotations.iter().enumerate() {
            let i = lo + i;
            // columns i, i+1 of rows lo..=min(i+1, hi)
            for r in lo..=(i + 1).min(hi) {
                let a = h[(r, i)];
                let b = h[(r, i + 1)];
                h[(r, i)] = a.scale(*c) + b * s.conj();
                h[(r, i + 1)] = -a * *s + b.scale(*c);
            }
        }
        for i in lo..=hi {
            h[(i, i)] += shift;
        }
    }
    Ok(eigs)
}

/// Complex Givens rotation: returns real `c` and complex `s` with
/// `[c, s; -conj(s), c] [f; g] = [r; 0]`.
fn givens(f: Complex64, g: Complex64) -> (f64, Complex64) {
    let gn = g.norm();
    if gn == 0.0 {
        return (1.0, Complex64::new(0.0, 0.0));
    }
    let fn_ = f.norm();
    if fn_ == 0.0 {
        return (0.0, g.conj() / gn);
    }
    let d = (fn_ * fn_ + gn * gn).sqrt();
    let c = fn_ / d;
    let s = (f / fn_) * g.conj() / d;
    (c, s)
}

// ---- ODE propagation ----------------------------------------------------

/// First-order ODE system with complex state.
///
/// The right-hand side writes the derivative into its output slice, whose
/// length equals `dim`, so the "output dimension equals `dim`" invariant is
/// enforced structurally.
pub struct OdeSystem {
    dim: usize,
    rhs: Box<dyn Fn(f64, &[Complex64], &mut [Complex64]) + Send + Sync>,
}

impl OdeSystem {
    pub fn new(
        dim: usize,
        rhs: impl Fn(f64, &[Complex64], &mut [Complex64]) + Send + Sync + 'static,
    ) -> Self {
        OdeSystem { dim, rhs: Box::new(rhs) }
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn eval(&self, x: f64, y: &[Complex64], out: &mut [Complex64]) {
        debug_assert_eq!(y.len(), self.dim);
        debug_assert_eq!(out.len(), self.dim);
        (self.rhs)(x, y, out)
    }
}

// Dormand-Prince 5(4) tableau.
const DP_C: [f64; 7] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
const DP_A: [[f64; 6]; 7] = [
    [0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
// 5th order weights (row 7 of A is the solution, FSAL) and the embedded
// 4th order weights.
const DP_B5: [f64; 7] = [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0, 0.0];
const DP_B4: [f64; 7] = [
    5179.0 / 57600.0,
    0.0,
    7571.0 / 16695.0,
    393.0 / 640.0,
    -92097.0 / 339200.0,
    187.0 / 2100.0,
    1.0 / 40.0,
];

/// Propagate `y0` from `x0` to `x1` with the adaptive embedded
/// Dormand–Prince 5(4) pair. Step acceptance uses the componentwise scale
/// `max(rtol * |y_i|, atol)`. Integration in either direction.
pub fn propagate(
    sys: &OdeSystem,
    x0: f64,
    x1: f64,
    y0: &[Complex64],
    rtol: f64,
    atol: f64,
) -> Result<Vec<Complex64>> {
    if x0 == x1 {
        return Err(Error::Domain("propagate needs x0 != x1".into()));
    }
    for (name, tol) in [("rtol", rtol), ("atol", atol)] {
        if !(tol > 1e-14 && tol < 1e-2) {
            return Err(Error::Domain(format!("{name} = {tol:e} outside (1e-14, 1e-2)")));
        }
    }
    if y0.len() != sys.dim() {
        return Err(Error::Dimension(format!(
            "initial state has length {}, system dimension is {}",
            y0.len(),
            sys.dim()
        )));
    }

    let n = sys.dim();
    let span = x1 - x0;
    let dir = span.signum();
    let min_step = 1e-14 * span.abs();

    let mut x = x0;
    let mut y = y0.to_vec();
    let mut k: Vec<Vec<Complex64>> = vec![vec![Complex64::new(0.0, 0.0); n]; 7];
    let mut ytmp = vec![Complex64::new(0.0, 0.0); n];
    let mut ynew = vec![Complex64::new(0.0, 0.0); n];

    sys.eval(x, &y, &mut k[0]);

    // Initial step from the magnitude of y and y'.
    let mut h = {
        let d0: f64 = y.iter().map(|z| z.norm()).fold(0.0, f64::max);
        let d1: f64 = k[0].iter().map(|z| z.norm()).fold(0.0, f64::max);
        let guess = if d1 > 1e-10 { 0.01 * (d0.max(atol) / d1) } else { 1e-3 * span.abs() };
        dir * guess.clamp(min_step.max(1e-10 * span.abs()), span.abs())
    };

    let max_steps = 50_000_000usize;
    let mut steps = 0usize;

    loop {
        steps += 1;
        if steps > max_steps {
            return Err(Error::Convergence("propagate exceeded step budget".into()));
        }
        if (x1 - x) * dir <= 0.0 {
            break;
        }
        if h.abs() < min_step {
            return Err(Error::Stiffness { x, step: h.abs() });
        }
        if (x + h - x1) * dir > 0.0 {
            h = x1 - x;
        }

        // k[0] always holds f(x, y): from the initial evaluation, the FSAL
        // copy after an accepted step, or unchanged after a rejection.
        for stage in 1..7 {
            for i in 0..n {
                let mut acc = Complex64::new(0.0, 0.0);
                for (j, kj) in k.iter().enumerate().take(stage) {
                    let a = DP_A[stage][j];
                    if a != 0.0 {
                        acc += kj[i].scale(a);
                    }
                }
                ytmp[i] = y[i] + acc.scale(h);
            }
            let (head, tail) = k.split_at_mut(stage);
            let _ = head;
            sys.eval(x + DP_C[stage] * h, &ytmp, &mut tail[0]);
        }
        let mut err_sqr = 0.0;
        for i in 0..n {
            let mut acc5 = Complex64::new(0.0, 0.0);
            let mut acc_err = Complex64::new(0.0, 0.0);
            for j in 0..7 {
                if DP_B5[j] != 0.0 {
                    acc5 += k[j][i].scale(DP_B5[j]);
                }
                let d = DP_B5[j] - DP_B4[j];
                if d != 0.0 {
                    acc_err += k[j][i].scale(d);
                }
            }
            ynew[i] = y[i] + acc5.scale(h);
            let sc = (rtol * y[i].norm().max(ynew[i].norm())).max(atol);
            err_sqr += (acc_err.scale(h).norm() / sc).powi(2);
        }
        let err = (err_sqr / n as f64).sqrt();

        if err <= 1.0 {
            x += h;
            std::mem::swap(&mut y, &mut ynew);
            // FSAL: k7 of the accepted step is k1 of the next.
            let (head, tail) = k.split_at_mut(6);
            head[0].copy_from_slice(&tail[0]);
        }
        let factor = if err > 0.0 { 0.9 * err.powf(-0.2) } else { 5.0 };
        h *= factor.clamp(0.2, 5.0);
    }
    Ok(y)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn approx(a: Complex64, b: Complex64, tol: f64) -> bool {
        (a - b).norm() <= tol
    }

    /// Deterministic generator for test matrices.
    pub(crate) struct SplitMix64(pub u64);

    impl SplitMix64 {
        pub fn next_u64(&mut self) -> u64 {
            self.0 = self.0.wrapping_add(0x9e3779b97f4a7c15);
            let mut z = self.0;
            z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
            z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
            z ^ (z >> 31)
        }

        pub fn uniform(&mut self) -> f64 {
            (self.next_u64() >> 11) as f64 / (1u64 << 53) as f64
        }

        pub fn complex(&mut self) -> Complex64 {
            c(2.0 * self.uniform() - 1.0, 2.0 * self.uniform() - 1.0)
        }

        pub fn matrix(&mut self, rows: usize, cols: usize) -> CMatrix {
            CMatrix::from_fn(rows, cols, |_, _| self.complex())
        }
    }

    #[test]
    fn det_identity_is_one() {
        assert_eq!(det(&CMatrix::identity(2)).unwrap(), c(1.0, 0.0));
    }

    #[test]
    fn det_transposition_is_minus_one() {
        let m = CMatrix::from_real_rows(&[&[0.0, 1.0], &[1.0, 0.0]]);
        assert!(approx(det(&m).unwrap(), c(-1.0, 0.0), 1e-15));
    }

    #[test]
    fn det_jordan_block_at_three() {
        // [[λ, 1], [0, λ]] at λ = 3 has determinant 9.
        let m = CMatrix::from_real_rows(&[&[3.0, 1.0], &[0.0, 3.0]]);
        assert!(approx(det(&m).unwrap(), c(9.0, 0.0), 1e-14));
    }

    #[test]
    fn det_rejects_non_square() {
        let m = CMatrix::zeros(2, 3);
        assert!(matches!(det(&m), Err(Error::Dimension(_))));
    }

    #[test]
    fn solve_identity_returns_rhs() {
        let b = SplitMix64(7).matrix(4, 2);
        let x = solve(&CMatrix::identity(4), &b).unwrap();
        assert!(x.sub(&b).norm() < 1e-15);
    }

    #[test]
    fn solve_diagonal_inverse() {
        let m = CMatrix::from_real_rows(&[&[2.0, 0.0], &[0.0, 4.0]]);
        let x = solve(&m, &CMatrix::identity(2)).unwrap();
        assert!(approx(x[(0, 0)], c(0.5, 0.0), 1e-15));
        assert!(approx(x[(1, 1)], c(0.25, 0.0), 1e-15));
    }

    #[test]
    fn solve_hilbert_first_column() {
        // Exact inverse column of the 3x3 Hilbert matrix: [9, -36, 30].
        let m = CMatrix::from_fn(3, 3, |i, j| c(1.0 / (i + j + 1) as f64, 0.0));
        let mut e1 = CMatrix::zeros(3, 1);
        e1[(0, 0)] = c(1.0, 0.0);
        let x = solve(&m, &e1).unwrap();
        assert!(approx(x[(0, 0)], c(9.0, 0.0), 1e-11));
        assert!(approx(x[(1, 0)], c(-36.0, 0.0), 1e-10));
        assert!(approx(x[(2, 0)], c(30.0, 0.0), 1e-10));
    }

    #[test]
    fn solve_singular_reports_min_pivot() {
        let m = CMatrix::from_real_rows(&[&[1.0, 2.0], &[2.0, 4.0]]);
        match solve(&m, &CMatrix::identity(2)) {
            Err(Error::SingularMatrix { min_pivot }) => assert!(min_pivot < 1e-12),
            other => panic!("expected SingularMatrix, got {other:?}"),
        }
    }

    #[test]
    fn eig_pencil_value_at_zero() {
        // diag(1, λ²) at λ = 0 has eigenvalues {1, 0}.
        let m = CMatrix::from_real_rows(&[&[1.0, 0.0], &[0.0, 0.0]]);
        let mut ev = eig(&m).unwrap();
        ev.sort_by(|a, b| a.re.partial_cmp(&b.re).unwrap());
        assert!(approx(ev[0], c(0.0, 0.0), 1e-14));
        assert!(approx(ev[1], c(1.0, 0.0), 1e-14));
    }

    #[test]
    fn eig_identity_three() {
        let ev = eig(&CMatrix::identity(3)).unwrap();
        assert_eq!(ev.len(), 3);
        for v in ev {
            assert!(approx(v, c(1.0, 0.0), 1e-14));
        }
    }

    #[test]
    fn eig_rotation_gives_plus_minus_i() {
        let m = CMatrix::from_real_rows(&[&[0.0, -1.0], &[1.0, 0.0]]);
        let mut ev = eig(&m).unwrap();
        ev.sort_by(|a, b| a.im.partial_cmp(&b.im).unwrap());
        assert!(approx(ev[0], c(0.0, -1.0), 1e-12));
        assert!(approx(ev[1], c(0.0, 1.0), 1e-12));
    }

    #[test]
    fn eig_sum_matches_trace() {
        let mut rng = SplitMix64(42);
        for n in [3usize, 5, 8, 13] {
            let m = rng.matrix(n, n);
            let ev = eig(&m).unwrap();
            let sum: Complex64 = ev.iter().sum();
            assert!(
                (sum - m.trace()).norm() <= 1e-9 * m.norm().max(1.0),
                "trace residual {} at n = {}",
                (sum - m.trace()).norm(),
                n
            );
        }
    }

    #[test]
    fn eig_defective_jordan_block() {
        let m = CMatrix::from_real_rows(&[&[2.0, 1.0, 0.0], &[0.0, 2.0, 1.0], &[0.0, 0.0, 2.0]]);
        let ev = eig(&m).unwrap();
        for v in ev {
            // Jordan blocks perturb eigenvalues at O(eps^{1/3}); stay loose.
            assert!((v - c(2.0, 0.0)).norm() < 1e-4);
        }
    }

    #[test]
    fn eig_respects_dimension_cap() {
        let m = CMatrix::zeros(EIG_DIM_CAP + 1, EIG_DIM_CAP + 1);
        assert!(matches!(eig(&m), Err(Error::Domain(_))));
    }

    fn sorted_by_angle(mut v: Vec<Complex64>) -> Vec<Complex64> {
        v.sort_by(|a, b| {
            (a.re, a.im)
                .partial_cmp(&(b.re, b.im))
                .unwrap_or(std::cmp::Ordering::Equal)
        });
        v
    }

    #[test]
    fn eig_similarity_invariance() {
        let mut rng = SplitMix64(99);
        for _ in 0..5 {
            let n = 4;
            let a = rng.matrix(n, n);
            // well-conditioned S: identity plus small random part
            let s = CMatrix::identity(n).add(&rng.matrix(n, n).scale(c(0.2, 0.0)));
            let s_inv_a = solve(&s, &a).unwrap();
            let similar = s_inv_a.matmul(&s);
            let ev_a = sorted_by_angle(eig(&a).unwrap());
            let ev_s = sorted_by_angle(eig(&similar).unwrap());
            for (x, y) in ev_a.iter().zip(&ev_s) {
                assert!((x - y).norm() < 1e-7, "eigenvalue drift {}", (x - y).norm());
            }
        }
    }

    #[test]
    fn propagate_constant_solution() {
        let sys = OdeSystem::new(2, |_x, _y, out| {
            out[0] = Complex64::new(0.0, 0.0);
            out[1] = Complex64::new(0.0, 0.0);
        });
        let y0 = [c(1.5, -0.5), c(0.0, 2.0)];
        let y1 = propagate(&sys, 0.0, 1.0, &y0, 1e-10, 1e-12).unwrap();
        assert!(approx(y1[0], y0[0], 1e-12));
        assert!(approx(y1[1], y0[1], 1e-12));
    }

    #[test]
    fn propagate_exponential() {
        let sys = OdeSystem::new(1, |_x, y, out| out[0] = y[0]);
        let y1 = propagate(&sys, 0.0, 1.0, &[c(1.0, 0.0)], 1e-10, 1e-12).unwrap();
        assert!((y1[0].re - std::f64::consts::E).abs() < 1e-8);
        assert!(y1[0].im.abs() < 1e-10);
    }

    #[test]
    fn propagate_sine_wave() {
        // u'' = -π² u, u(0) = 0, u'(0) = π has u(x) = sin(π x), so u(1) = 0.
        let pi2 = std::f64::consts::PI.powi(2);
        let sys = OdeSystem::new(2, move |_x, y, out| {
            out[0] = y[1];
            out[1] = -y[0].scale(pi2);
        });
        let y1 = propagate(&sys, 0.0, 1.0, &[c(0.0, 0.0), c(std::f64::consts::PI, 0.0)], 1e-10, 1e-12).unwrap();
        assert!(y1[0].norm() < 1e-8, "u(1) = {}", y1[0]);
    }

    #[test]
    fn propagate_rejects_bad_tolerances() {
        let sys = OdeSystem::new(1, |_x, y, out| out[0] = y[0]);
        assert!(matches!(propagate(&sys, 0.0, 1.0, &[c(1.0, 0.0)], 1e-1, 1e-12), Err(Error::Domain(_))));
        assert!(matches!(propagate(&sys, 0.0, 0.0, &[c(1.0, 0.0)], 1e-10, 1e-12), Err(Error::Domain(_))));
    }

    #[test]
    fn propagate_time_reversal_roundtrip() {
        let mut rng = SplitMix64(3);
        let om = c(0.7, 0.3);
        let sys = OdeSystem::new(2, move |x, y, out| {
            out[0] = y[1] * om;
            out[1] = -y[0] * om * c(x.cos(), 0.0);
        });
        let rtol = 1e-9;
        for _ in 0..4 {
            let y0 = [rng.complex(), rng.complex()];
            let fwd = propagate(&sys, 0.0, 2.0, &y0, rtol, 1e-12).unwrap();
            let back = propagate(&sys, 2.0, 0.0, &fwd, rtol, 1e-12).unwrap();
            let err = (back[0] - y0[0]).norm() + (back[1] - y0[1]).norm();
            assert!(err < 10.0 * rtol, "roundtrip error {err}");
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]

        #[test]
        fn det_is_multiplicative(seed in any::<u64>()) {
            let mut rng = SplitMix64(seed);
            let a = rng.matrix(4, 4);
            let b = rng.matrix(4, 4);
            let lhs = det(&a.matmul(&b)).unwrap();
            let rhs = det(&a).unwrap() * det(&b).unwrap();
            let scale = lhs.norm().max(rhs.norm()).max(1e-30);
            prop_assert!((lhs - rhs).norm() <= 1e-9 * scale);
        }

        #[test]
        fn lu_solve_residual_small(seed in any::<u64>()) {
            let mut rng = SplitMix64(seed);
            let a = rng.matrix(5, 5).add(&CMatrix::identity(5).scale(c(3.0, 0.0)));
            let b = rng.matrix(5, 1);
            let x = solve(&a, &b).unwrap();
            let resid = a.matmul(&x).sub(&b).norm();
            prop_assert!(resid <= 1e-10 * b.norm().max(1e-30));
        }
    }
}
