//! Algebraic multiplicity of eigenvalues of analytic matrix pencils.
//!
//! A Jordan chain of length k for a pencil `T(·)` at `λ0` is a tuple
//! `f_0, …, f_{k-1}` with `f_0 ≠ 0` solving the derivative-coupled system
//!
//! ```text
//! Σ_{l=0}^{j} T^{(l)}(λ0) f_{j-l} / l! = 0,    j = 0, …, k-1.
//! ```
//!
//! Chain tails are not unique (any kernel component may be added), so chain
//! extension works greedily by minimum-norm least squares with the kernel
//! component set to zero; every valid choice reaches the same length. The
//! algebraic multiplicity itself is computed as the winding number of
//! `det T(λ)` around a small circle, which is far more robust than
//! extracting a local canonical form.

use crate::contour;
use crate::numkernel::{self, CMatrix};
use crate::{Error, Result};
use num_complex::Complex64;
use std::sync::Arc;

/// Relative threshold on singular values of `T(λ0)` for kernel detection,
/// consistent with the chain residual tolerance.
const KERNEL_TOL: f64 = 1e-8;

/// Analytic matrix pencil, either polynomial (exact derivatives) or a
/// callable (derivatives by central finite differences with step
/// `1e-5 · max(1, |λ|)`).
#[derive(Clone)]
pub enum MatrixPencil {
    Polynomial {
        /// Expansion point: `T(λ) = Σ_j coeffs[j] (λ - base)^j`.
        base: Complex64,
        coeffs: Vec<CMatrix>,
        dim: usize,
    },
    Callable {
        dim: usize,
        f: Arc<dyn Fn(Complex64) -> CMatrix + Send + Sync>,
    },
}

impl MatrixPencil {
    pub fn polynomial(base: Complex64, coeffs: Vec<CMatrix>) -> Result<MatrixPencil> {
        if coeffs.is_empty() {
            return Err(Error::Domain("polynomial pencil needs at least one coefficient".into()));
        }
        let dim = coeffs[0].rows();
        for c in &coeffs {
            if c.rows() != dim || c.cols() != dim {
                return Err(Error::Dimension("all pencil coefficients must be square of equal size".into()));
            }
        }
        Ok(MatrixPencil::Polynomial { base, coeffs, dim })
    }

    pub fn from_fn(dim: usize, f: impl Fn(Complex64) -> CMatrix + Send + Sync + 'static) -> MatrixPencil {
        MatrixPencil::Callable { dim, f: Arc::new(f) }
    }

    /// Linear pencil `λ I - A`.
    pub fn linear(a: &CMatrix) -> Result<MatrixPencil> {
        if !a.is_square() {
            return Err(Error::Dimension("linear pencil needs a square matrix".into()));
        }
        MatrixPencil::polynomial(
            Complex64::new(0.0, 0.0),
            vec![a.scale(Complex64::new(-1.0, 0.0)), CMatrix::identity(a.rows())],
        )
    }

    pub fn dim(&self) -> usize {
        match self {
            MatrixPencil::Polynomial { dim, .. } => *dim,
            MatrixPencil::Callable { dim, .. } => *dim,
        }
    }

    pub fn eval(&self, lambda: Complex64) -> CMatrix {
        match self {
            MatrixPencil::Polynomial { base, coeffs, dim } => {
                let t = lambda - base;
                let mut acc = CMatrix::zeros(*dim, *dim);
                for c in coeffs.iter().rev() {
                    acc = acc.scale(t).add(c);
                }
                acc
            }
            MatrixPencil::Callable { f, .. } => f(lambda),
        }
    }

    /// `T^{(order)}(λ)`: exact for polynomial pencils, central finite
    /// differences otherwise.
    pub fn derivative(&self, order: usize, lambda: Complex64) -> CMatrix {
        if order == 0 {
            return self.eval(lambda);
        }
        match self {
            MatrixPencil::Polynomial { base, coeffs, dim } => {
                let t = lambda - base;
                let mut acc = CMatrix::zeros(*dim, *dim);
                for (j, c) in coeffs.iter().enumerate().rev() {
                    if j < order {
                        break;
                    }
                    // falling factorial j (j-1) ⋯ (j-order+1)
                    let mut w = 1.0;
                    for i in 0..order {
                        w *= (j - i) as f64;
                    }
                    acc = acc.scale(t).add(&c.scale(Complex64::new(w, 0.0)));
                }
                acc
            }
            MatrixPencil::Callable { dim, .. } => {
                let h = 1e-5 * lambda.norm().max(1.0);
                let stencil = central_stencil(order);
                let half = (stencil.len() - 1) / 2;
                let mut acc = CMatrix::zeros(*dim, *dim);
                for (i, &w) in stencil.iter().enumerate() {
                    if w == 0.0 {
                        continue;
                    }
                    let offset = i as f64 - half as f64;
                    let sample = self.eval(lambda + Complex64::new(offset * h, 0.0));
                    acc = acc.add(&sample.scale(Complex64::new(w / h.powi(order as i32), 0.0)));
                }
                acc
            }
        }
    }
}

/// Central finite-difference stencil for the m-th derivative, built by
/// convolving the first- and second-difference kernels.
fn central_stencil(order: usize) -> Vec<f64> {
    let conv = |a: &[f64], b: &[f64]| -> Vec<f64> {
        let mut out = vec![0.0; a.len() + b.len() - 1];
        for (i, &x) in a.iter().enumerate() {
            for (j, &y) in b.iter().enumerate() {
                out[i + j] += x * y;
            }
        }
        out
    };
    let mut s = vec![1.0];
    for _ in 0..(order / 2) {
        s = conv(&s, &[1.0, -2.0, 1.0]);
    }
    if order % 2 == 1 {
        s = conv(&s, &[-0.5, 0.0, 0.5]);
    }
    s
}

/// A candidate Jordan chain at a base point.
#[derive(Debug, Clone)]
pub struct JordanChain {
    pub base_point: Complex64,
    pub vectors: Vec<Vec<Complex64>>,
}

impl JordanChain {
    pub fn new(base_point: Complex64, vectors: Vec<Vec<Complex64>>) -> Result<JordanChain> {
        if vectors.is_empty() {
            return Err(Error::Domain("a Jordan chain needs at least one vector".into()));
        }
        let f0_norm: f64 = vectors[0].iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if f0_norm == 0.0 {
            return Err(Error::Domain("the chain head f_0 must be nonzero".into()));
        }
        Ok(JordanChain { base_point, vectors })
    }
}

/// Residual norms of the chain equations
/// `Σ_{l=0}^{j} T^{(l)}(λ0) f_{j-l} / l!` for `j = 0, …, k-1`.
///
/// The chain is valid iff all residuals are at most `1e-8 · ‖T(λ0)‖`.
pub fn chain_residuals(t: &MatrixPencil, chain: &JordanChain) -> Result<Vec<f64>> {
    let dim = t.dim();
    for v in &chain.vectors {
        if v.len() != dim {
            return Err(Error::Dimension(format!("chain vectors must have length {dim}")));
        }
    }
    let lam0 = chain.base_point;
    let k = chain.vectors.len();
    // Precompute T^{(l)}(λ0) / l!.
    let mut derivs = Vec::with_capacity(k);
    let mut fact = 1.0;
    for l in 0..k {
        if l > 0 {
            fact *= l as f64;
        }
        derivs.push(t.derivative(l, lam0).scale(Complex64::new(1.0 / fact, 0.0)));
    }
    let mut residuals = Vec::with_capacity(k);
    for j in 0..k {
        let mut acc = vec![Complex64::new(0.0, 0.0); dim];
        for l in 0..=j {
            let contrib = derivs[l].matvec(&chain.vectors[j - l]);
            for (a, b) in acc.iter_mut().zip(&contrib) {
                *a += b;
            }
        }
        residuals.push(acc.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt());
    }
    Ok(residuals)
}

/// Algebraic multiplicity of `λ0` as an eigenvalue of the pencil: the
/// winding number of `det T(λ)` around the circle of the given radius.
///
/// Fails with [`Error::OnSpectrum`] when the determinant (nearly) vanishes
/// on the circle itself.
pub fn multiplicity(t: &MatrixPencil, lambda0: Complex64, radius: f64) -> Result<i64> {
    contour::multiplicity_at(|z| numkernel::det(&t.eval(z)), lambda0, radius)
}

/// Singular values of a matrix via the eigenvalues of `A* A`.
fn singular_values(a: &CMatrix) -> Result<Vec<f64>> {
    let gram = a.adjoint().matmul(a);
    let eigs = numkernel::eig(&gram)?;
    let mut sv: Vec<f64> = eigs.iter().map(|e| e.norm().sqrt()).collect();
    sv.sort_by(|x, y| y.partial_cmp(x).unwrap());
    Ok(sv)
}

/// Orthonormal basis of the numerical kernel of `T(λ0)`: singular values
/// below `1e-8 · ‖T(λ0)‖` count as zero.
pub fn kernel_basis(t: &MatrixPencil, lambda0: Complex64) -> Result<Vec<Vec<Complex64>>> {
    let a = t.eval(lambda0);
    let scale = a.norm().max(f64::MIN_POSITIVE);
    let sv = singular_values(&a)?;
    let kernel_dim = sv.iter().filter(|&&s| s <= KERNEL_TOL * scale).count();
    if kernel_dim == 0 {
        return Ok(Vec::new());
    }
    let qr = QrPivot::decompose(&a);
    let basis = qr.null_space(kernel_dim);
    Ok(basis)
}

/// Rank of an eigenvector `f0 ∈ ker T(λ0)`: the longest Jordan chain that
/// starts at `f0`, found by greedy minimum-norm least-squares extension,
/// capped at `max_len` (a result of `max_len` means "at least `max_len`").
pub fn rank_of_eigenvector(
    t: &MatrixPencil,
    lambda0: Complex64,
    f0: &[Complex64],
    max_len: usize,
) -> Result<usize> {
    let dim = t.dim();
    if f0.len() != dim {
        return Err(Error::Dimension(format!("eigenvector must have length {dim}")));
    }
    if max_len == 0 {
        return Err(Error::Domain("max_len must be positive".into()));
    }
    let a0 = t.eval(lambda0);
    let scale = a0.norm().max(f64::MIN_POSITIVE);
    let f0_norm = vec_norm(f0);
    if f0_norm == 0.0 {
        return Err(Error::NotAnEigenvector { residual: f64::INFINITY });
    }
    let head_residual = vec_norm(&a0.matvec(f0));
    if head_residual > KERNEL_TOL * scale * f0_norm {
        return Err(Error::NotAnEigenvector { residual: head_residual });
    }

    let qr = QrPivot::decompose(&a0);
    let kernel = {
        let sv = singular_values(&a0)?;
        let kdim = sv.iter().filter(|&&s| s <= KERNEL_TOL * scale).count();
        qr.null_space(kdim)
    };

    let mut chain: Vec<Vec<Complex64>> = vec![f0.to_vec()];
    for j in 1..max_len {
        // rhs = -Σ_{l=1}^{j} T^{(l)}(λ0) f_{j-l} / l!
        let mut rhs = vec![Complex64::new(0.0, 0.0); dim];
        let mut fact = 1.0;
        for l in 1..=j {
            fact *= l as f64;
            let contrib = t.derivative(l, lambda0).matvec(&chain[j - l]);
            for (r, c) in rhs.iter_mut().zip(&contrib) {
                *r -= c / fact;
            }
        }
        let mut fj = qr.least_squares(&rhs);
        // zero out the kernel components: chain tails are free there
        for basis_vec in &kernel {
            let coef: Complex64 = basis_vec.iter().zip(&fj).map(|(b, x)| b.conj() * x).sum();
            for (x, b) in fj.iter_mut().zip(basis_vec) {
                *x -= coef * b;
            }
        }
        let achieved = a0.matvec(&fj);
        let residual: f64 = achieved.iter().zip(&rhs).map(|(a, r)| (a - r).norm_sqr()).sum::<f64>().sqrt();
        let chain_scale = chain.iter().map(|v| vec_norm(v)).fold(f0_norm, f64::max);
        if residual > KERNEL_TOL * scale * chain_scale.max(vec_norm(&rhs) / scale) {
            return Ok(j);
        }
        chain.push(fj);
    }
    Ok(max_len)
}

fn vec_norm(v: &[Complex64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

// ---- Householder QR with column pivoting --------------------------------

/// QR factorization with column pivoting, `A P = Q R`, used for rank-aware
/// least squares and null spaces of the small pencil values.
struct QrPivot {
    q: CMatrix,
    r: CMatrix,
    perm: Vec<usize>,
    rank: usize,
}

impl QrPivot {
    fn decompose(a: &CMatrix) -> QrPivot {
        let m = a.rows();
        let n = a.cols();
        let mut r = a.clone();
        let mut q = CMatrix::identity(m);
        let mut perm: Vec<usize> = (0..n).collect();

        let steps = m.min(n);
        for k in 0..steps {
            // pivot: column with largest remaining norm
            let mut best = k;
            let mut best_norm = 0.0;
            for j in k..n {
                let norm: f64 = (k..m).map(|i| r[(i, j)].norm_sqr()).sum();
                if norm > best_norm {
                    best_norm = norm;
                    best = j;
                }
            }
            if best != k {
                for i in 0..m {
                    let tmp = r[(i, k)];
                    r[(i, k)] = r[(i, best)];
                    r[(i, best)] = tmp;
                }
                perm.swap(k, best);
            }
            if best_norm == 0.0 {
                break;
            }
            // Householder vector annihilating column k below the diagonal
            let xnorm = best_norm.sqrt();
            let x0 = r[(k, k)];
            let phase = if x0.norm() > 0.0 { x0 / x0.norm() } else { Complex64::new(1.0, 0.0) };
            let alpha = -phase * xnorm;
            let mut v = vec![Complex64::new(0.0, 0.0); m];
            for i in k..m {
                v[i] = r[(i, k)];
            }
            v[k] -= alpha;
            let vnorm_sqr: f64 = v.iter().map(|z| z.norm_sqr()).sum();
            if vnorm_sqr == 0.0 {
                continue;
            }
            let beta = 2.0 / vnorm_sqr;
            // R <- P_v R
            for j in k..n {
                let mut dot = Complex64::new(0.0, 0.0);
                for i in k..m {
                    dot += v[i].conj() * r[(i, j)];
                }
                dot *= beta;
                for i in k..m {
                    let sub = v[i] * dot;
                    r[(i, j)] -= sub;
                }
            }
            // Q <- Q P_v
            for row in 0..m {
                let mut dot = Complex64::new(0.0, 0.0);
                for i in k..m {
                    dot += q[(row, i)] * v[i];
                }
                dot *= beta;
                for i in k..m {
                    let sub = dot * v[i].conj();
                    q[(row, i)] -= sub;
                }
            }
            for i in (k + 1)..m {
                r[(i, k)] = Complex64::new(0.0, 0.0);
            }
        }

        let r00 = r[(0, 0)].norm().max(f64::MIN_POSITIVE);
        let mut rank = 0;
        for k in 0..steps {
            if r[(k, k)].norm() > KERNEL_TOL * r00 {
                rank += 1;
            }
        }
        QrPivot { q, r, perm, rank }
    }

    /// Basic least-squares solution of `A x = b` (free variables zero).
    fn least_squares(&self, b: &[Complex64]) -> Vec<Complex64> {
        let m = self.q.rows();
        let n = self.r.cols();
        let rank = self.rank;
        // c = Q* b
        let mut c = vec![Complex64::new(0.0, 0.0); m];
        for i in 0..m {
            let mut acc = Complex64::new(0.0, 0.0);
            for row in 0..m {
                acc += self.q[(row, i)].conj() * b[row];
            }
            c[i] = acc;
        }
        // back-substitute the leading rank×rank triangle
        let mut y = vec![Complex64::new(0.0, 0.0); n];
        for i in (0..rank).rev() {
            let mut acc = c[i];
            for j in (i + 1)..rank {
                acc -= self.r[(i, j)] * y[j];
            }
            y[i] = acc / self.r[(i, i)];
        }
        // undo the permutation
        let mut x = vec![Complex64::new(0.0, 0.0); n];
        for (pos, &col) in self.perm.iter().enumerate() {
            x[col] = y[pos];
        }
        x
    }

    /// Orthonormal basis for the null space, taking the requested dimension
    /// from the trailing pivot columns.
    fn null_space(&self, kernel_dim: usize) -> Vec<Vec<Complex64>> {
        let n = self.r.cols();
        let rank = n - kernel_dim;
        let mut basis = Vec::with_capacity(kernel_dim);
        for free in rank..n {
            // solve R[0..rank,0..rank] w = -R[0..rank, free]
            let mut w = vec![Complex64::new(0.0, 0.0); n];
            w[free] = Complex64::new(1.0, 0.0);
            for i in (0..rank).rev() {
                let mut acc = -self.r[(i, free)];
                for j in (i + 1)..rank {
                    acc -= self.r[(i, j)] * w[j];
                }
                w[i] = acc / self.r[(i, i)];
            }
            let mut x = vec![Complex64::new(0.0, 0.0); n];
            for (pos, &col) in self.perm.iter().enumerate() {
                x[col] = w[pos];
            }
            basis.push(x);
        }
        // modified Gram-Schmidt
        let mut ortho: Vec<Vec<Complex64>> = Vec::with_capacity(basis.len());
        for mut v in basis {
            for u in &ortho {
                let coef: Complex64 = u.iter().zip(&v).map(|(a, b)| a.conj() * b).sum();
                for (x, a) in v.iter_mut().zip(u) {
                    *x -= coef * a;
                }
            }
            let norm = vec_norm(&v);
            if norm > 0.0 {
                for x in v.iter_mut() {
                    *x /= norm;
                }
                ortho.push(v);
            }
        }
        ortho
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    /// D(λ) = diag(1, λ²).
    fn pencil_diag_lambda_sq() -> MatrixPencil {
        let zero = CMatrix::zeros(2, 2);
        let mut c0 = zero.clone();
        c0[(0, 0)] = c(1.0, 0.0);
        let c1 = zero.clone();
        let mut c2 = zero;
        c2[(1, 1)] = c(1.0, 0.0);
        MatrixPencil::polynomial(c(0.0, 0.0), vec![c0, c1, c2]).unwrap()
    }

    /// T(λ) = [[λ, 1], [0, λ]].
    fn pencil_jordan() -> MatrixPencil {
        let mut c0 = CMatrix::zeros(2, 2);
        c0[(0, 1)] = c(1.0, 0.0);
        let c1 = CMatrix::identity(2);
        MatrixPencil::polynomial(c(0.0, 0.0), vec![c0, c1]).unwrap()
    }

    fn e(i: usize, n: usize) -> Vec<Complex64> {
        let mut v = vec![c(0.0, 0.0); n];
        v[i] = c(1.0, 0.0);
        v
    }

    #[test]
    fn polynomial_derivatives_are_exact() {
        let t = pencil_diag_lambda_sq();
        let lam = c(0.7, -0.3);
        assert!((t.derivative(1, lam)[(1, 1)] - lam * 2.0).norm() < 1e-15);
        assert!((t.derivative(2, lam)[(1, 1)] - c(2.0, 0.0)).norm() < 1e-15);
        assert_eq!(t.derivative(3, lam)[(1, 1)], c(0.0, 0.0));
    }

    #[test]
    fn callable_derivatives_match_polynomial() {
        let poly = pencil_diag_lambda_sq();
        let call = MatrixPencil::from_fn(2, |lam| {
            let mut m = CMatrix::identity(2);
            m[(1, 1)] = lam * lam;
            m
        });
        let lam = c(0.4, 0.1);
        // the spec-pinned step 1e-5 leaves ~eps/h^order roundoff
        for (order, tol) in [(1, 1e-9), (2, 1e-5)] {
            let d = poly.derivative(order, lam).sub(&call.derivative(order, lam)).max_abs();
            assert!(d < tol, "order {order}: difference {d}");
        }
    }

    #[test]
    fn chain_of_length_two_for_diag_pencil() {
        // Example pencil diag(1, λ²): (e2, 0) is a valid chain of length 2.
        let t = pencil_diag_lambda_sq();
        let chain = JordanChain::new(c(0.0, 0.0), vec![e(1, 2), vec![c(0.0, 0.0); 2]]).unwrap();
        let res = chain_residuals(&t, &chain).unwrap();
        assert!(res.iter().all(|&r| r < 1e-14), "{res:?}");
        // (e2, e2) is equally valid: tails are free in the kernel direction
        let chain2 = JordanChain::new(c(0.0, 0.0), vec![e(1, 2), e(1, 2)]).unwrap();
        assert!(chain_residuals(&t, &chain2).unwrap().iter().all(|&r| r < 1e-14));
    }

    #[test]
    fn chain_of_length_three_is_obstructed() {
        // The third equation needs D(0) f_2 = -f_0 with f_0 ∉ ran D(0).
        let t = pencil_diag_lambda_sq();
        for tail in [vec![c(0.0, 0.0); 2], e(0, 2), e(1, 2)] {
            let chain = JordanChain::new(c(0.0, 0.0), vec![e(1, 2), vec![c(0.0, 0.0); 2], tail]).unwrap();
            let res = chain_residuals(&t, &chain).unwrap();
            assert!(res[0] < 1e-14 && res[1] < 1e-14);
            assert!(res[2] >= 1.0 - 1e-12, "third residual should be blocked: {res:?}");
        }
    }

    #[test]
    fn classical_linear_chain() {
        // T(λ) = λI - A with A f1 = λ0 f1 + f0 gives residual-free chains.
        let mut a = CMatrix::zeros(2, 2);
        a[(0, 0)] = c(2.0, 0.0);
        a[(0, 1)] = c(1.0, 0.0);
        a[(1, 1)] = c(2.0, 0.0);
        let t = MatrixPencil::linear(&a).unwrap();
        // (A - 2) e1 = 0 and (A - 2) e2 = e1, so T(2) e2 + T'(2) e1 = -e1 + e1 = 0:
        // the classical chain (e1, e2) transfers to the pencil unchanged.
        let chain = JordanChain::new(c(2.0, 0.0), vec![e(0, 2), e(1, 2)]).unwrap();
        let res = chain_residuals(&t, &chain).unwrap();
        assert!(res.iter().all(|&r| r < 1e-14), "{res:?}");
    }

    #[test]
    fn multiplicity_of_paper_examples_is_two() {
        assert_eq!(multiplicity(&pencil_diag_lambda_sq(), c(0.0, 0.0), 0.5).unwrap(), 2);
        assert_eq!(multiplicity(&pencil_jordan(), c(0.0, 0.0), 0.5).unwrap(), 2);
    }

    #[test]
    fn multiplicity_semisimple_double() {
        let mut a = CMatrix::zeros(3, 3);
        a[(2, 2)] = c(3.0, 0.0);
        let t = MatrixPencil::linear(&a).unwrap();
        assert_eq!(multiplicity(&t, c(0.0, 0.0), 0.5).unwrap(), 2);
        assert_eq!(multiplicity(&t, c(3.0, 0.0), 0.5).unwrap(), 1);
    }

    #[test]
    fn multiplicity_detects_eigenvalue_on_circle() {
        let t = pencil_jordan();
        // radius passes exactly through the eigenvalue at 0
        let r = multiplicity(&t, c(0.5, 0.0), 0.5);
        assert!(matches!(r, Err(Error::OnSpectrum { .. }) | Err(Error::ContourResolution { .. })));
    }

    #[test]
    fn elementary_row_column_factorization() {
        // E4 E2 T(λ) E1 E3 = D(λ) links the two example pencils.
        let t = pencil_jordan();
        let d = pencil_diag_lambda_sq();
        for lam in [c(0.3, 0.0), c(-0.2, 0.7), c(1.5, -0.4)] {
            let e1 = CMatrix::from_real_rows(&[&[0.0, 1.0], &[1.0, 0.0]]);
            let mut e2 = CMatrix::identity(2);
            e2[(1, 0)] = -lam;
            let mut e3 = CMatrix::identity(2);
            e3[(0, 1)] = -lam;
            let e4 = CMatrix::from_real_rows(&[&[1.0, 0.0], &[0.0, -1.0]]);
            let lhs = e4.matmul(&e2).matmul(&t.eval(lam)).matmul(&e1).matmul(&e3);
            assert!(lhs.sub(&d.eval(lam)).max_abs() < 1e-14);
        }
    }

    #[test]
    fn equivalence_by_constant_factors_preserves_multiplicity() {
        let mut rng = crate::pencilmult::tests::Rng(7);
        let s1 = CMatrix::identity(2).add(&rng.matrix(2, 2).scale(c(0.3, 0.0)));
        let s2 = CMatrix::identity(2).add(&rng.matrix(2, 2).scale(c(0.3, 0.0)));
        for base in [pencil_diag_lambda_sq(), pencil_jordan()] {
            let trans = {
                let (s1, s2, base) = (s1.clone(), s2.clone(), base.clone());
                MatrixPencil::from_fn(2, move |lam| s1.matmul(&base.eval(lam)).matmul(&s2))
            };
            assert_eq!(
                multiplicity(&trans, c(0.0, 0.0), 0.5).unwrap(),
                multiplicity(&base, c(0.0, 0.0), 0.5).unwrap()
            );
        }
    }

    #[test]
    fn rank_of_eigenvector_examples() {
        // diag(1, λ²): r(e2) = 2
        assert_eq!(rank_of_eigenvector(&pencil_diag_lambda_sq(), c(0.0, 0.0), &e(1, 2), 6).unwrap(), 2);
        // [[λ, 1], [0, λ]]: r(e1) = 2
        assert_eq!(rank_of_eigenvector(&pencil_jordan(), c(0.0, 0.0), &e(0, 2), 6).unwrap(), 2);
    }

    #[test]
    fn rank_of_diagonalizable_eigenvector_is_one() {
        let mut a = CMatrix::zeros(2, 2);
        a[(0, 0)] = c(1.5, 0.0);
        a[(1, 1)] = c(-0.5, 0.0);
        let t = MatrixPencil::linear(&a).unwrap();
        assert_eq!(rank_of_eigenvector(&t, c(1.5, 0.0), &e(0, 2), 6).unwrap(), 1);
    }

    #[test]
    fn rank_rejects_non_kernel_vector() {
        let t = pencil_diag_lambda_sq();
        assert!(matches!(
            rank_of_eigenvector(&t, c(0.0, 0.0), &e(0, 2), 6),
            Err(Error::NotAnEigenvector { .. })
        ));
    }

    #[test]
    fn rank_caps_at_max_len() {
        // Constant singular pencil diag(0, 1): every chain equation after
        // the first reads T(0) f_j = 0, so chains extend forever and the
        // search must stop at the cap.
        let mut c0 = CMatrix::zeros(2, 2);
        c0[(1, 1)] = c(1.0, 0.0);
        let t = MatrixPencil::polynomial(c(0.0, 0.0), vec![c0]).unwrap();
        assert_eq!(rank_of_eigenvector(&t, c(0.0, 0.0), &e(0, 2), 5).unwrap(), 5);
    }

    #[test]
    fn kernel_basis_dimensions() {
        let t = pencil_diag_lambda_sq();
        let basis = kernel_basis(&t, c(0.0, 0.0)).unwrap();
        assert_eq!(basis.len(), 1);
        assert!((basis[0][1].norm() - 1.0).abs() < 1e-12);
        assert!(kernel_basis(&t, c(0.5, 0.0)).unwrap().is_empty());
    }

    #[test]
    fn sum_rule_on_paper_examples() {
        for t in [pencil_diag_lambda_sq(), pencil_jordan()] {
            let lam0 = c(0.0, 0.0);
            let total: usize = kernel_basis(&t, lam0)
                .unwrap()
                .iter()
                .map(|f0| rank_of_eigenvector(&t, lam0, f0, 8).unwrap())
                .sum();
            assert_eq!(total as i64, multiplicity(&t, lam0, 0.5).unwrap());
        }
    }

    #[test]
    fn linear_pencil_matches_eigenvalue_clustering() {
        let mut rng = Rng(99);
        for trial in 0..4 {
            let n = 3 + trial % 4;
            let a = rng.matrix(n, n);
            let t = MatrixPencil::linear(&a).unwrap();
            let mut eigs = numkernel::eig(&a).unwrap();
            eigs.sort_by(|x, y| (x.re, x.im).partial_cmp(&(y.re, y.im)).unwrap());
            // cluster eigenvalues, then compare winding against cluster size
            let mut idx = 0;
            while idx < eigs.len() {
                let center = eigs[idx];
                let mut size = 1;
                while idx + size < eigs.len() && (eigs[idx + size] - center).norm() < 1e-6 {
                    size += 1;
                }
                let gap = eigs
                    .iter()
                    .filter(|e| (*e - center).norm() > 1e-6)
                    .map(|e| (e - center).norm())
                    .fold(f64::INFINITY, f64::min);
                let radius = (0.45 * gap).min(0.3).max(1e-4);
                assert_eq!(
                    multiplicity(&t, center, radius).unwrap(),
                    size as i64,
                    "trial {trial}, eigenvalue {center}"
                );
                idx += size;
            }
        }
    }

    pub(crate) struct Rng(pub u64);
    impl Rng {
        fn next(&mut self) -> f64 {
            self.0 = self.0.wrapping_add(0x9e3779b97f4a7c15);
            let mut z = self.0;
            z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
            z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
            (((z ^ (z >> 31)) >> 11) as f64 / (1u64 << 53) as f64) * 2.0 - 1.0
        }
        pub fn matrix(&mut self, r: usize, co: usize) -> CMatrix {
            CMatrix::from_fn(r, co, |_, _| c(self.next(), self.next()))
        }
    }
}
