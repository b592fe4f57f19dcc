//! Boundary maps and Evans functions for `-u'' + Q(x) u = λ u` on `(-1, 1)`
//! with an n×n matrix potential.
//!
//! The trace space is `C^{2n}` with Dirichlet trace `γ_D u = [u(1); u(-1)]`
//! and Neumann trace `γ_N u = [u'(1); -u'(-1)]`. Solutions of the eigenvalue
//! equation are spanned by the matrix solutions `Y_-` (zero value, identity
//! derivative at `x = -1`) and `V_-` (identity value, zero derivative), and
//! their traces assemble into the frame
//!
//! ```text
//! X = [ Y_-(1)  V_-(1) ]      Z = [ Y_-'(1)  V_-'(1) ]
//!     [   0        I   ]          [   -I        0    ]
//! ```
//!
//! so that the Dirichlet-to-Neumann map is `M(λ) = Z X^{-1}` wherever `X` is
//! invertible, and the Robin-to-Dirichlet map is `N_Θ(λ) = X (Z + Θ X)^{-1}`,
//! which stays defined across Dirichlet eigenvalues. Determinants of the
//! frame blocks are the Dirichlet and Θ-Robin Evans functions.

use crate::numkernel::{self, CMatrix, Lu, OdeSystem};
use crate::{Error, Result};
use num_complex::Complex64;
use std::sync::Arc;

/// Relative pivot threshold below which a boundary-map matrix counts as
/// singular; matches the accuracy of the 1e-10 propagation tolerance.
const SINGULAR_TOL: f64 = 1e-10;

/// Largest |λ| the propagator accepts; beyond this the oscillation is too
/// fast for the default tolerances.
pub const LAMBDA_CAP: f64 = 1e4;

/// Matrix Schrödinger problem on `(-1, 1)` with Robin matrices `Θ±`.
#[derive(Clone)]
pub struct Schrodinger1DProblem {
    n: usize,
    q: Arc<dyn Fn(f64) -> CMatrix + Send + Sync>,
    theta_plus: CMatrix,
    theta_minus: CMatrix,
}

impl Schrodinger1DProblem {
    pub fn new(
        n: usize,
        q: Arc<dyn Fn(f64) -> CMatrix + Send + Sync>,
        theta_plus: CMatrix,
        theta_minus: CMatrix,
    ) -> Result<Self> {
        if n == 0 {
            return Err(Error::Domain("system size must be at least 1".into()));
        }
        if theta_plus.rows() != n || theta_plus.cols() != n || theta_minus.rows() != n || theta_minus.cols() != n {
            return Err(Error::Dimension(format!("Θ± must be {n}x{n}")));
        }
        let probe = q(0.0);
        if probe.rows() != n || probe.cols() != n {
            return Err(Error::Dimension(format!(
                "potential returns {}x{}, expected {n}x{n}",
                probe.rows(),
                probe.cols()
            )));
        }
        Ok(Schrodinger1DProblem { n, q, theta_plus, theta_minus })
    }

    /// Free problem `Q ≡ 0` with the given Robin matrices.
    pub fn free(n: usize, theta_plus: CMatrix, theta_minus: CMatrix) -> Result<Self> {
        Schrodinger1DProblem::new(n, Arc::new(move |_| CMatrix::zeros(n, n)), theta_plus, theta_minus)
    }

    /// Scalar polynomial potential `q(x) = Σ c_j x^j` times the identity.
    pub fn scalar_poly(n: usize, coeffs: &[f64], theta_plus: CMatrix, theta_minus: CMatrix) -> Result<Self> {
        let coeffs = coeffs.to_vec();
        let q = Arc::new(move |x: f64| {
            let mut v = 0.0;
            for &c in coeffs.iter().rev() {
                v = v * x + c;
            }
            CMatrix::identity(n).scale(Complex64::new(v, 0.0))
        });
        Schrodinger1DProblem::new(n, q, theta_plus, theta_minus)
    }

    /// Same potential with different Robin matrices.
    pub fn with_thetas(&self, theta_plus: CMatrix, theta_minus: CMatrix) -> Result<Schrodinger1DProblem> {
        Schrodinger1DProblem::new(self.n, self.q.clone(), theta_plus, theta_minus)
    }

    /// Same potential shifted by the real constant `gamma` (used for
    /// reference operators).
    pub fn shifted(&self, gamma: f64) -> Schrodinger1DProblem {
        let n = self.n;
        let q = self.q.clone();
        Schrodinger1DProblem {
            n,
            q: Arc::new(move |x| q(x).add(&CMatrix::identity(n).scale(Complex64::new(gamma, 0.0)))),
            theta_plus: self.theta_plus.clone(),
            theta_minus: self.theta_minus.clone(),
        }
    }

    #[inline]
    pub fn size(&self) -> usize {
        self.n
    }

    pub fn potential_at(&self, x: f64) -> CMatrix {
        (self.q)(x)
    }

    pub fn theta_plus(&self) -> &CMatrix {
        &self.theta_plus
    }

    pub fn theta_minus(&self) -> &CMatrix {
        &self.theta_minus
    }

    /// The 2n×2n boundary operator `Θ = diag{Θ+, Θ-}` on the trace space.
    pub fn big_theta(&self) -> CMatrix {
        let mut t = CMatrix::zeros(2 * self.n, 2 * self.n);
        t.set_block(0, 0, &self.theta_plus);
        t.set_block(self.n, self.n, &self.theta_minus);
        t
    }

    /// True when the problem is symmetric: `Q(x)` Hermitian on a sample grid
    /// and both Robin matrices Hermitian.
    pub fn is_symmetric(&self, tol: f64) -> bool {
        if !self.theta_plus.is_hermitian(tol) || !self.theta_minus.is_hermitian(tol) {
            return false;
        }
        let samples = 17;
        (0..samples).all(|i| {
            let x = -1.0 + 2.0 * i as f64 / (samples - 1) as f64;
            (self.q)(x).is_hermitian(tol)
        })
    }
}

/// Traces of the fundamental matrix solutions at `x = 1`.
#[derive(Debug, Clone)]
pub struct FundamentalSolutions {
    /// `Y_-(1, λ)`
    pub y1: CMatrix,
    /// `Y_-'(1, λ)`
    pub y1_prime: CMatrix,
    /// `V_-(1, λ)`
    pub v1: CMatrix,
    /// `V_-'(1, λ)`
    pub v1_prime: CMatrix,
}

/// Frame blocks spanning the trace space of solutions of `Lu = λu`.
#[derive(Debug, Clone)]
pub struct FrameMatrices {
    pub x: CMatrix,
    pub z: CMatrix,
    pub lambda: Complex64,
}

/// Propagate the fundamental solutions `Y_-` and `V_-` from `x = -1` to
/// `x = +1` with relative tolerance 1e-10.
///
/// Both matrix solutions ride in one first-order system so the potential is
/// evaluated once per step. State layout: `[Y, Y', V, V']`, each block n×n
/// row-major.
pub fn fundamental_solutions(p: &Schrodinger1DProblem, lambda: Complex64) -> Result<FundamentalSolutions> {
    if !lambda.re.is_finite() || !lambda.im.is_finite() {
        return Err(Error::Domain("lambda must be finite".into()));
    }
    if lambda.norm() > LAMBDA_CAP {
        return Err(Error::Domain(format!("|λ| = {} exceeds the propagation cap {LAMBDA_CAP}", lambda.norm())));
    }
    let n = p.n;
    let nn = n * n;
    let q = p.q.clone();
    let sys = OdeSystem::new(4 * nn, move |x, y, out| {
        let qx = q(x);
        // d/dx [Y, Y', V, V'] = [Y', (Q - λ) Y, V', (Q - λ) V]
        out[..nn].copy_from_slice(&y[nn..2 * nn]);
        out[2 * nn..3 * nn].copy_from_slice(&y[3 * nn..4 * nn]);
        for i in 0..n {
            for j in 0..n {
                let mut acc_y = Complex64::new(0.0, 0.0);
                let mut acc_v = Complex64::new(0.0, 0.0);
                for k in 0..n {
                    let qik = qx[(i, k)];
                    acc_y += qik * y[k * n + j];
                    acc_v += qik * y[2 * nn + k * n + j];
                }
                out[nn + i * n + j] = acc_y - lambda * y[i * n + j];
                out[3 * nn + i * n + j] = acc_v - lambda * y[2 * nn + i * n + j];
            }
        }
    });

    let mut y0 = vec![Complex64::new(0.0, 0.0); 4 * nn];
    for i in 0..n {
        y0[nn + i * n + i] = Complex64::new(1.0, 0.0); // Y'(-1) = I
        y0[2 * nn + i * n + i] = Complex64::new(1.0, 0.0); // V(-1) = I
    }
    let yt = numkernel::propagate(&sys, -1.0, 1.0, &y0, 1e-10, 1e-12)?;

    let unpack = |off: usize| CMatrix::from_fn(n, n, |i, j| yt[off + i * n + j]);
    Ok(FundamentalSolutions {
        y1: unpack(0),
        y1_prime: unpack(nn),
        v1: unpack(2 * nn),
        v1_prime: unpack(3 * nn),
    })
}

/// Assemble the 2n×2n frame blocks `X` and `Z` from the fundamental
/// solutions.
pub fn frame(p: &Schrodinger1DProblem, lambda: Complex64) -> Result<FrameMatrices> {
    let n = p.n;
    let f = fundamental_solutions(p, lambda)?;
    let mut x = CMatrix::zeros(2 * n, 2 * n);
    x.set_block(0, 0, &f.y1);
    x.set_block(0, n, &f.v1);
    x.set_block(n, n, &CMatrix::identity(n));
    let mut z = CMatrix::zeros(2 * n, 2 * n);
    z.set_block(0, 0, &f.y1_prime);
    z.set_block(0, n, &f.v1_prime);
    z.set_block(n, 0, &CMatrix::identity(n).scale(Complex64::new(-1.0, 0.0)));
    Ok(FrameMatrices { x, z, lambda })
}

/// Dirichlet-to-Neumann map `M(λ) = Z X^{-1}`.
///
/// Fails with [`Error::DirichletEigenvalue`] when `X` is singular to
/// tolerance, i.e. when λ is (numerically) in the Dirichlet spectrum.
pub fn dtn(fr: &FrameMatrices) -> Result<CMatrix> {
    let lu = Lu::decompose(&fr.x)?;
    if lu.is_singular(SINGULAR_TOL) {
        return Err(Error::DirichletEigenvalue { lambda: fr.lambda });
    }
    // M = Z X^{-1}  ⟺  M^T = (X^T)^{-1} Z^T
    let xt = fr.x.transpose();
    let zt = fr.z.transpose();
    let mt = numkernel::solve(&xt, &zt)?;
    Ok(mt.transpose())
}

/// Robin-to-Dirichlet map `N_Θ(λ) = X (Z + Θ X)^{-1}`.
///
/// Valid across Dirichlet eigenvalues; fails with
/// [`Error::RobinEigenvalue`] when `Z + Θ X` is singular to tolerance.
pub fn robin_to_dirichlet(fr: &FrameMatrices, theta_big: &CMatrix) -> Result<CMatrix> {
    let a = fr.z.add(&theta_big.matmul(&fr.x));
    let lu = Lu::decompose(&a)?;
    if lu.is_singular(SINGULAR_TOL) {
        return Err(Error::RobinEigenvalue { lambda: fr.lambda });
    }
    let nt = lu_transpose_solve(&a, &fr.x)?;
    Ok(nt)
}

/// Solve `U A = B` for `U`, i.e. `U = B A^{-1}`, via the transposed system.
pub(crate) fn lu_transpose_solve(a: &CMatrix, b: &CMatrix) -> Result<CMatrix> {
    let ut = numkernel::solve(&a.transpose(), &b.transpose())?;
    Ok(ut.transpose())
}

/// Dirichlet Evans function `E_D(λ) = det X = det Y_-(1, λ)`.
pub fn evans_dirichlet(fr: &FrameMatrices) -> Result<Complex64> {
    numkernel::det(&fr.x)
}

/// Θ-Robin Evans function `E_Θ(λ) = det(Z + Θ X)`.
pub fn evans_robin(fr: &FrameMatrices, theta_big: &CMatrix) -> Result<Complex64> {
    numkernel::det(&fr.z.add(&theta_big.matmul(&fr.x)))
}

/// The scalar Evans ratio `𝓔(λ) = det N_Θ(λ) · det M̂_Θ̂(λ)` for the pair
/// `(p, p̂)`.
///
/// Two independent routes are evaluated: determinants of the assembled
/// `N_Θ` and `M̂_Θ̂` matrices, and the four-Evans ratio
/// `E_D Ê_Θ̂ / (E_Θ Ê_D)`. They must agree to 1e-8 relative or the call
/// fails. Requires λ in the Robin resolvent set of `p` and the Dirichlet
/// resolvent set of `p̂`.
pub fn evans_ratio(p: &Schrodinger1DProblem, phat: &Schrodinger1DProblem, lambda: Complex64) -> Result<Complex64> {
    if p.n != phat.n {
        return Err(Error::Dimension("p and phat must have equal system size".into()));
    }
    let fr = frame(p, lambda)?;
    let fr_hat = frame(phat, lambda)?;
    let theta = p.big_theta();
    let theta_hat = phat.big_theta();

    // Route 1: determinants of the boundary-map matrices themselves.
    let n_theta = match robin_to_dirichlet(&fr, &theta) {
        Ok(m) => m,
        Err(Error::RobinEigenvalue { lambda }) => {
            return Err(Error::OnSpectrum { location: lambda, modulus: 0.0 })
        }
        Err(e) => return Err(e),
    };
    let m_hat = match dtn(&fr_hat) {
        Ok(m) => Ok(m.add(&theta_hat)),
        Err(Error::DirichletEigenvalue { lambda }) => {
            Err(Error::OnSpectrum { location: lambda, modulus: 0.0 })
        }
        Err(e) => Err(e),
    }?;
    let route1 = numkernel::det(&n_theta)? * numkernel::det(&m_hat)?;

    // Route 2: four Evans determinants.
    let e_d = evans_dirichlet(&fr)?;
    let e_theta = evans_robin(&fr, &theta)?;
    let e_d_hat = evans_dirichlet(&fr_hat)?;
    let e_theta_hat = evans_robin(&fr_hat, &theta_hat)?;
    let route2 = (e_d * e_theta_hat) / (e_theta * e_d_hat);

    // Near a zero of the ratio both routes vanish and only absolute
    // accuracy is meaningful; the floor carries the boundary-map scale.
    let scale = route1.norm().max(route2.norm());
    let floor = 1e-2 * (1.0 + numkernel::det(&m_hat)?.norm());
    if (route1 - route2).norm() > 1e-8 * scale.max(floor) {
        return Err(Error::Convergence(format!(
            "Evans ratio routes disagree: {route1} vs {route2} at λ = {lambda}"
        )));
    }
    Ok(route1)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::intervalmodel::{self, Theta2x2};
    use std::f64::consts::PI;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn free_problem(n: usize) -> Schrodinger1DProblem {
        Schrodinger1DProblem::free(n, CMatrix::zeros(n, n), CMatrix::zeros(n, n)).unwrap()
    }

    fn i_theta_problem(n: usize) -> Schrodinger1DProblem {
        let it = CMatrix::identity(n).scale(c(0.0, 1.0));
        Schrodinger1DProblem::free(n, it.clone(), it).unwrap()
    }

    #[test]
    fn fundamental_free_at_zero() {
        // u'' = 0: Y_-(x) = (x+1) I, V_-(x) = I.
        let f = fundamental_solutions(&free_problem(1), c(0.0, 0.0)).unwrap();
        assert!((f.y1[(0, 0)] - c(2.0, 0.0)).norm() < 1e-9);
        assert!((f.y1_prime[(0, 0)] - c(1.0, 0.0)).norm() < 1e-9);
        assert!((f.v1[(0, 0)] - c(1.0, 0.0)).norm() < 1e-9);
        assert!(f.v1_prime[(0, 0)].norm() < 1e-9);
    }

    #[test]
    fn fundamental_free_at_first_dirichlet_eigenvalue() {
        // Y_-(x, λ) = sin(√λ (x+1)) / √λ vanishes at x = 1 for λ = (π/2)².
        let f = fundamental_solutions(&free_problem(1), c(PI * PI / 4.0, 0.0)).unwrap();
        assert!(f.y1[(0, 0)].norm() < 1e-8);
    }

    #[test]
    fn fundamental_decoupled_diagonal_system() {
        let q = Arc::new(|_x: f64| {
            let mut m = CMatrix::zeros(2, 2);
            m[(0, 0)] = c(1.0, 0.0);
            m[(1, 1)] = c(-2.0, 0.0);
            m
        });
        let p2 = Schrodinger1DProblem::new(2, q, CMatrix::zeros(2, 2), CMatrix::zeros(2, 2)).unwrap();
        let lam = c(0.7, 0.0);
        let f2 = fundamental_solutions(&p2, lam).unwrap();
        // scalar oracles with shifted potential reproduce the diagonal blocks
        for (idx, shift) in [(0usize, 1.0), (1usize, -2.0)] {
            let p1 = Schrodinger1DProblem::scalar_poly(1, &[shift], CMatrix::zeros(1, 1), CMatrix::zeros(1, 1)).unwrap();
            let f1 = fundamental_solutions(&p1, lam).unwrap();
            assert!((f2.y1[(idx, idx)] - f1.y1[(0, 0)]).norm() < 1e-8);
            assert!((f2.v1[(idx, idx)] - f1.v1[(0, 0)]).norm() < 1e-8);
        }
        assert!(f2.y1[(0, 1)].norm() < 1e-10);
        assert!(f2.y1[(1, 0)].norm() < 1e-10);
    }

    #[test]
    fn frame_structure_at_zero() {
        let fr = frame(&free_problem(1), c(0.0, 0.0)).unwrap();
        assert!((fr.x[(0, 0)] - c(2.0, 0.0)).norm() < 1e-9);
        assert!((fr.x[(0, 1)] - c(1.0, 0.0)).norm() < 1e-9);
        assert!(fr.x[(1, 0)].norm() == 0.0); // structural zero block
        assert!((fr.x[(1, 1)] - c(1.0, 0.0)).norm() == 0.0);
        assert!((fr.z[(0, 0)] - c(1.0, 0.0)).norm() < 1e-9);
        assert!(fr.z[(0, 1)].norm() < 1e-9);
        assert!((fr.z[(1, 0)] + c(1.0, 0.0)).norm() == 0.0); // structural -I block
        assert!(fr.z[(1, 1)].norm() == 0.0);
    }

    #[test]
    fn dtn_matches_interval_oracle() {
        // Length-2 map at λ equals half the length-1 closed form at 4λ.
        let lam = c(1.0, 0.0);
        let m = dtn(&frame(&free_problem(1), lam).unwrap()).unwrap();
        let oracle = intervalmodel::m_closed(lam * 4.0).unwrap().scale(c(0.5, 0.0));
        assert!(m.sub(&oracle).max_abs() < 1e-8, "difference {}", m.sub(&oracle).max_abs());
        // Off-diagonal entries agree with each other (both equal -b).
        assert!((m[(0, 1)] - m[(1, 0)]).norm() < 1e-9);
    }

    #[test]
    fn dtn_fails_on_dirichlet_eigenvalue() {
        let fr = frame(&free_problem(1), c(PI * PI / 4.0, 0.0)).unwrap();
        assert!(matches!(dtn(&fr), Err(Error::DirichletEigenvalue { .. })));
    }

    #[test]
    fn dtn_b2_minus_a2_is_lambda() {
        for lam in [c(0.3, 0.0), c(1.7, 0.4), c(-2.0, 0.0)] {
            let m = dtn(&frame(&free_problem(1), lam).unwrap()).unwrap();
            let a = m[(0, 0)];
            let b = -m[(0, 1)];
            assert!((b * b - a * a - lam).norm() < 1e-8);
        }
    }

    #[test]
    fn robin_to_dirichlet_neumann_determinant() {
        // Θ = 0 on (-1,1): det N(λ) = -1/λ, so det N(2) = -0.5.
        let fr = frame(&free_problem(1), c(2.0, 0.0)).unwrap();
        let n = robin_to_dirichlet(&fr, &CMatrix::zeros(2, 2)).unwrap();
        let d = numkernel::det(&n).unwrap();
        assert!((d - c(-0.5, 0.0)).norm() < 1e-8, "det N(2) = {d}");
    }

    #[test]
    fn robin_to_dirichlet_inverts_dtn_plus_theta() {
        let p = i_theta_problem(1);
        let fr = frame(&p, c(3.3, 0.0)).unwrap();
        let theta = p.big_theta();
        let m_theta = dtn(&fr).unwrap().add(&theta);
        let n_theta = robin_to_dirichlet(&fr, &theta).unwrap();
        let prod = n_theta.matmul(&m_theta);
        assert!(prod.sub(&CMatrix::identity(2)).max_abs() < 1e-9);
    }

    #[test]
    fn robin_to_dirichlet_defined_at_dirichlet_eigenvalue() {
        // Θ = iI has non-real spectrum, so N_Θ exists at λ = (π/2)².
        let p = i_theta_problem(1);
        let fr = frame(&p, c(PI * PI / 4.0, 0.0)).unwrap();
        assert!(robin_to_dirichlet(&fr, &p.big_theta()).is_ok());
    }

    #[test]
    fn robin_to_dirichlet_analytic_across_dirichlet_spectrum() {
        // Finite differences of N_{iI} along a real segment through (π/2)²
        // stay bounded: the continuation has no singularity there.
        let p = i_theta_problem(1);
        let lam0 = PI * PI / 4.0;
        let h = 1e-3;
        let theta = p.big_theta();
        let at = |lam: f64| robin_to_dirichlet(&frame(&p, c(lam, 0.0)).unwrap(), &theta).unwrap();
        let mut max_fd: f64 = 0.0;
        for offset in [-2.0 * h, -h, 0.0, h, 2.0 * h] {
            let fd = at(lam0 + offset + h).sub(&at(lam0 + offset - h)).scale(c(1.0 / (2.0 * h), 0.0));
            max_fd = max_fd.max(fd.max_abs());
        }
        assert!(max_fd < 10.0, "finite-difference derivative blew up: {max_fd}");
    }

    #[test]
    fn evans_dirichlet_free_values() {
        // E_D(λ) = sin(2√λ)/√λ: equals 2 at λ = 0 and vanishes at (π/2)².
        let e0 = evans_dirichlet(&frame(&free_problem(1), c(0.0, 0.0)).unwrap()).unwrap();
        assert!((e0 - c(2.0, 0.0)).norm() < 1e-8);
        let e1 = evans_dirichlet(&frame(&free_problem(1), c(PI * PI / 4.0, 0.0)).unwrap()).unwrap();
        assert!(e1.norm() < 1e-8);
    }

    #[test]
    fn evans_dirichlet_zeros_match_closed_form_spectrum() {
        // |det X| is small iff λ is within tolerance of some (kπ/2)².
        let p = free_problem(1);
        let eigs: Vec<f64> = (1..=7).map(|k| (k as f64 * PI / 2.0).powi(2)).collect();
        let mut lam = 0.25;
        while lam < 30.0 {
            let e = evans_dirichlet(&frame(&p, c(lam, 0.0)).unwrap()).unwrap();
            let near = eigs.iter().any(|&mu| (lam - mu).abs() < 0.05);
            if e.norm() < 1e-3 {
                assert!(near, "spurious Evans zero at λ = {lam}");
            }
            lam += 0.125;
        }
        // and the Evans function does vanish on the spectrum itself
        for &mu in &eigs {
            let e = evans_dirichlet(&frame(&p, c(mu, 0.0)).unwrap()).unwrap();
            assert!(e.norm() < 1e-6, "missed zero at λ = {mu}");
        }
    }

    #[test]
    fn evans_dirichlet_decoupled_product() {
        let q = Arc::new(|_x: f64| {
            let mut m = CMatrix::zeros(2, 2);
            m[(0, 0)] = c(0.4, 0.0);
            m[(1, 1)] = c(-1.1, 0.0);
            m
        });
        let p2 = Schrodinger1DProblem::new(2, q, CMatrix::zeros(2, 2), CMatrix::zeros(2, 2)).unwrap();
        let lam = c(0.9, 0.0);
        let e2 = evans_dirichlet(&frame(&p2, lam).unwrap()).unwrap();
        let scalar = |shift: f64| {
            let p1 = Schrodinger1DProblem::scalar_poly(1, &[shift], CMatrix::zeros(1, 1), CMatrix::zeros(1, 1)).unwrap();
            evans_dirichlet(&frame(&p1, lam).unwrap()).unwrap()
        };
        let product = scalar(0.4) * scalar(-1.1);
        assert!((e2 - product).norm() < 1e-8 * product.norm().max(1.0));
    }

    #[test]
    fn evans_robin_neumann_zero_at_origin() {
        let fr = frame(&free_problem(1), c(0.0, 0.0)).unwrap();
        let e = evans_robin(&fr, &CMatrix::zeros(2, 2)).unwrap();
        assert!(e.norm() < 1e-9, "Neumann Evans at 0 = {e}");
    }

    #[test]
    fn evans_robin_itheta_nonzero_on_real_axis() {
        let p = i_theta_problem(1);
        let theta = p.big_theta();
        let mut lam = 0.0;
        while lam < 40.0 {
            let e = evans_robin(&frame(&p, c(lam, 0.0)).unwrap(), &theta).unwrap();
            assert!(e.norm() > 1e-6, "Robin Evans vanished at real λ = {lam}");
            lam += 0.61;
        }
    }

    #[test]
    fn det_n_times_evans_robin_equals_evans_dirichlet() {
        let p = i_theta_problem(1);
        let theta = p.big_theta();
        for lam in [c(0.5, 0.0), c(3.0, 0.2), c(11.0, -0.3)] {
            let fr = frame(&p, lam).unwrap();
            let n = robin_to_dirichlet(&fr, &theta).unwrap();
            let lhs = numkernel::det(&n).unwrap() * evans_robin(&fr, &theta).unwrap();
            let rhs = evans_dirichlet(&fr).unwrap();
            assert!((lhs - rhs).norm() <= 1e-8 * rhs.norm().max(1.0), "identity residual at {lam}");
        }
    }

    #[test]
    fn det_n_matches_interval_oracle_over_grid() {
        // det N_Θ on (-1,1) against the rescaled closed form, Θ = iI.
        let p = i_theta_problem(1);
        let theta = p.big_theta();
        let theta2 = Theta2x2::i_identity();
        let mut lam = 0.3;
        while lam < 12.0 {
            let fr = frame(&p, c(lam, 0.0)).unwrap();
            let ours = numkernel::det(&robin_to_dirichlet(&fr, &theta).unwrap()).unwrap();
            let oracle = intervalmodel::det_n_theta_length2(c(lam, 0.0), &theta2).unwrap();
            assert!(
                (ours - oracle).norm() <= 1e-8 * oracle.norm().max(1.0),
                "det N mismatch at λ = {lam}: {ours} vs {oracle}"
            );
            lam += 0.83;
        }
    }

    #[test]
    fn evans_ratio_equal_problems_is_one() {
        let p = i_theta_problem(1);
        for lam in [c(1.0, 0.0), c(6.5, 0.1)] {
            let r = evans_ratio(&p, &p, lam).unwrap();
            assert!((r - c(1.0, 0.0)).norm() < 1e-9);
        }
    }

    #[test]
    fn evans_ratio_swap_gives_reciprocal() {
        let it = CMatrix::identity(1).scale(c(0.0, 1.0));
        let p = Schrodinger1DProblem::free(1, it.clone(), it.clone()).unwrap();
        let phat = Schrodinger1DProblem::scalar_poly(1, &[2.5], it.clone(), it).unwrap();
        let lam = c(1.3, 0.0);
        let r = evans_ratio(&p, &phat, lam).unwrap();
        let r_swapped = evans_ratio(&phat, &p, lam).unwrap();
        assert!((r * r_swapped - c(1.0, 0.0)).norm() < 1e-8);
    }

    #[test]
    fn evans_ratio_on_dirichlet_spectrum_of_reference() {
        let p = i_theta_problem(1);
        let phat = free_problem(1); // Θ̂ = 0; λ = (π/2)² is in σ(L̂^D)
        let r = evans_ratio(&p, &phat, c(PI * PI / 4.0, 0.0));
        assert!(matches!(r, Err(Error::OnSpectrum { .. })));
    }

    #[test]
    fn lambda_cap_enforced() {
        let p = free_problem(1);
        assert!(matches!(fundamental_solutions(&p, c(2e4, 0.0)), Err(Error::Domain(_))));
    }

    #[test]
    fn symmetry_detection() {
        let p = free_problem(2);
        assert!(p.is_symmetric(1e-12));
        let q = Arc::new(|_x: f64| {
            let mut m = CMatrix::zeros(2, 2);
            m[(0, 1)] = c(0.0, 1.0); // not Hermitian
            m
        });
        let bad = Schrodinger1DProblem::new(2, q, CMatrix::zeros(2, 2), CMatrix::zeros(2, 2)).unwrap();
        assert!(!bad.is_symmetric(1e-12));
    }
}
