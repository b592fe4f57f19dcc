use num_complex::Complex64;
use std::fmt;

/// Crate-wide error type.
///
/// Spectral locations are reported through dedicated variants so callers can
/// distinguish "the input sits on a spectrum" (often recoverable by moving
/// the evaluation point) from genuine numerical failures.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// Shape mismatch or non-square input.
    Dimension(String),
    /// An input value is outside the documented domain.
    Domain(String),
    /// Iterative linear algebra failed to converge.
    Convergence(String),
    /// Matrix singular to working tolerance; carries the smallest pivot
    /// magnitude found during elimination.
    SingularMatrix { min_pivot: f64 },
    /// Adaptive step size underflowed.
    Stiffness { x: f64, step: f64 },
    /// λ is (numerically) a Dirichlet eigenvalue, so the requested boundary
    /// map does not exist there.
    DirichletEigenvalue { lambda: Complex64 },
    /// λ is (numerically) an eigenvalue of the Robin realization.
    RobinEigenvalue { lambda: Complex64 },
    /// λ is a Dirichlet eigenvalue of the given disc mode.
    ModeDirichletEigenvalue { mode: i32, lambda: Complex64 },
    /// λ is a Robin eigenvalue of the given disc mode.
    ModeRobinEigenvalue { mode: i32, lambda: Complex64 },
    /// The function vanishes (to tolerance) on the contour trace.
    OnSpectrum { location: Complex64, modulus: f64 },
    /// Adaptive contour refinement exceeded its depth limit.
    ContourResolution { depth: usize },
    /// The certified truncation bound cannot meet the requested tolerance.
    Truncation { bound: f64, tol: f64, suggested_modes: usize },
    /// The supplied vector is not in the kernel to tolerance.
    NotAnEigenvector { residual: f64 },
    /// Eigenvalue clustering too ambiguous to resolve a kernel dimension,
    /// or a crossing could not be pinned down at the working resolution.
    Resolution(String),
    /// A unit-circle eigenvalue crossed -1 counterclockwise for a symmetric
    /// problem, contradicting flow monotonicity.
    MonotonicityViolation { lambda: f64 },
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::Dimension(msg) => write!(f, "dimension error: {msg}"),
            Error::Domain(msg) => write!(f, "domain error: {msg}"),
            Error::Convergence(msg) => write!(f, "convergence failure: {msg}"),
            Error::SingularMatrix { min_pivot } => {
                write!(f, "matrix singular to tolerance (smallest pivot {min_pivot:.3e})")
            }
            Error::Stiffness { x, step } => {
                write!(f, "step underflow at x = {x:.6e} (step {step:.3e}); system too stiff")
            }
            Error::DirichletEigenvalue { lambda } => {
                write!(f, "λ = {lambda} is a Dirichlet eigenvalue")
            }
            Error::RobinEigenvalue { lambda } => {
                write!(f, "λ = {lambda} is a Robin eigenvalue")
            }
            Error::ModeDirichletEigenvalue { mode, lambda } => {
                write!(f, "λ = {lambda} is a Dirichlet eigenvalue of mode k = {mode}")
            }
            Error::ModeRobinEigenvalue { mode, lambda } => {
                write!(f, "λ = {lambda} is a Robin eigenvalue of mode k = {mode}")
            }
            Error::OnSpectrum { location, modulus } => {
                write!(f, "function modulus {modulus:.3e} at {location} on contour; eigenvalue on contour")
            }
            Error::ContourResolution { depth } => {
                write!(f, "contour refinement exceeded depth {depth}")
            }
            Error::Truncation { bound, tol, suggested_modes } => {
                write!(
                    f,
                    "tail bound {bound:.3e} exceeds tolerance {tol:.3e}; try at least {suggested_modes} modes"
                )
            }
            Error::NotAnEigenvector { residual } => {
                write!(f, "vector is not in the kernel (residual {residual:.3e})")
            }
            Error::Resolution(msg) => write!(f, "resolution error: {msg}"),
            Error::MonotonicityViolation { lambda } => {
                write!(f, "counterclockwise crossing at λ = {lambda} for a symmetric problem")
            }
        }
    }
}

impl std::error::Error for Error {}

pub type Result<T> = std::result::Result<T, Error>;
