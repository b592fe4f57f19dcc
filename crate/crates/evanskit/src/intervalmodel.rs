//! Closed-form boundary maps for the Laplacian on the unit interval.
//!
//! With `L = -(d/dx)²` on `(0, 1)` the Dirichlet-to-Neumann map is the 2x2
//! matrix `[[a, -b], [-b, a]]` with `a = cos√λ / sinc√λ`, `b = 1 / sinc√λ`,
//! which satisfies `b² - a² = λ`. Both `cos√λ` and `sinc√λ` are entire
//! functions of λ (even power series), so nothing here depends on a branch
//! of the square root. This module is the exact oracle the propagated
//! boundary maps of [`crate::schrodinger1d`] are checked against.
//!
//! Convention note: this module lives on the length-1 interval `(0, 1)`
//! while `schrodinger1d` lives on the length-2 interval `(-1, 1)`. The maps
//! are related by the affine change of variables `x = 2s - 1`, under which
//! eigenvalues scale by 4 and boundary operators by 2:
//!
//! ```text
//! M_len2(λ) = (1/2) · M_len1(4λ),
//! det N_Θ^len2(λ) = 4 · det N_{2Θ}^len1(4λ).
//! ```
//!
//! [`det_n_theta_length2`] applies this rescaling.

use crate::numkernel::CMatrix;
use crate::{Error, Result};
use num_complex::Complex64;

/// 2x2 Robin boundary matrix for the interval.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Theta2x2 {
    pub t11: Complex64,
    pub t12: Complex64,
    pub t21: Complex64,
    pub t22: Complex64,
}

impl Theta2x2 {
    pub fn new(t11: Complex64, t12: Complex64, t21: Complex64, t22: Complex64) -> Result<Self> {
        for t in [t11, t12, t21, t22] {
            if !t.re.is_finite() || !t.im.is_finite() {
                return Err(Error::Domain("Theta entries must be finite".into()));
            }
        }
        Ok(Theta2x2 { t11, t12, t21, t22 })
    }

    pub fn zero() -> Self {
        let z = Complex64::new(0.0, 0.0);
        Theta2x2 { t11: z, t12: z, t21: z, t22: z }
    }

    /// `i·I`, the non-real boundary operator that pushes the Robin spectrum
    /// off the real axis.
    pub fn i_identity() -> Self {
        let i = Complex64::new(0.0, 1.0);
        let z = Complex64::new(0.0, 0.0);
        Theta2x2 { t11: i, t12: z, t21: z, t22: i }
    }

    pub fn scale(&self, k: Complex64) -> Theta2x2 {
        Theta2x2 { t11: self.t11 * k, t12: self.t12 * k, t21: self.t21 * k, t22: self.t22 * k }
    }

    pub fn det(&self) -> Complex64 {
        self.t11 * self.t22 - self.t12 * self.t21
    }

    pub fn trace(&self) -> Complex64 {
        self.t11 + self.t22
    }
}

/// Entire function `cos √λ`, evaluated branch-free.
pub fn cosqrt(lambda: Complex64) -> Complex64 {
    if lambda.norm() < 1e-6 {
        // cos √λ = Σ (-λ)^n / (2n)!
        let mut sum = Complex64::new(1.0, 0.0);
        let mut term = Complex64::new(1.0, 0.0);
        for n in 1..=6 {
            term *= -lambda / ((2 * n - 1) as f64 * (2 * n) as f64);
            sum += term;
        }
        return sum;
    }
    lambda.sqrt().cos()
}

/// Entire function `sinc √λ = sin √λ / √λ`, evaluated branch-free.
pub fn sincqrt(lambda: Complex64) -> Complex64 {
    if lambda.norm() < 1e-6 {
        // sinc √λ = Σ (-λ)^n / (2n+1)!
        let mut sum = Complex64::new(1.0, 0.0);
        let mut term = Complex64::new(1.0, 0.0);
        for n in 1..=6 {
            term *= -lambda / ((2 * n) as f64 * (2 * n + 1) as f64);
            sum += term;
        }
        return sum;
    }
    let w = lambda.sqrt();
    w.sin() / w
}

/// Closed-form Dirichlet-to-Neumann map `[[a, -b], [-b, a]]` on `(0, 1)`.
///
/// Fails at Dirichlet eigenvalues `(nπ)²`, where `sinc √λ = 0`.
pub fn m_closed(lambda: Complex64) -> Result<CMatrix> {
    let s = sincqrt(lambda);
    if s.norm() <= 1e-12 {
        return Err(Error::DirichletEigenvalue { lambda });
    }
    let a = cosqrt(lambda) / s;
    let b = Complex64::new(1.0, 0.0) / s;
    let mut m = CMatrix::zeros(2, 2);
    m[(0, 0)] = a;
    m[(0, 1)] = -b;
    m[(1, 0)] = -b;
    m[(1, 1)] = a;
    Ok(m)
}

/// Closed-form `det N_Θ(λ)` on `(0, 1)`:
///
/// ```text
/// sinc√λ / [ (det Θ - λ) sinc√λ + tr Θ · cos√λ + t12 + t21 ]
/// ```
///
/// Fails when the denominator vanishes, i.e. at eigenvalues of the Robin
/// realization.
pub fn det_n_theta(lambda: Complex64, theta: &Theta2x2) -> Result<Complex64> {
    let s = sincqrt(lambda);
    let c = cosqrt(lambda);
    let denom = (theta.det() - lambda) * s + theta.trace() * c + theta.t12 + theta.t21;
    if denom.norm() <= 1e-12 * (1.0 + lambda.norm()) {
        return Err(Error::RobinEigenvalue { lambda });
    }
    Ok(s / denom)
}

/// `det N_Θ(λ)` for the length-2 interval `(-1, 1)`, obtained from the
/// length-1 closed form by the documented rescaling
/// `det N_Θ^len2(λ) = 4 · det N_{2Θ}^len1(4λ)`.
pub fn det_n_theta_length2(lambda: Complex64, theta: &Theta2x2) -> Result<Complex64> {
    let two = Complex64::new(2.0, 0.0);
    Ok(det_n_theta(lambda * 4.0, &theta.scale(two))? * 4.0)
}
