//! Numerical toolkit for boundary-map Evans functions on computable models.
//!
//! The crate evaluates spectral data of differential operators through their
//! boundary maps: Dirichlet-to-Neumann and Robin-to-Dirichlet matrices for
//! matrix Schrödinger operators on an interval, mode-diagonal boundary data
//! on the unit disc, p-modified Fredholm determinants, algebraic
//! multiplicities of analytic matrix pencils, argument-principle eigenvalue
//! counts, and Maslov indices computed as spectral flow of the Souriau map.
//! The three independent eigenvalue-counting routes (determinant winding,
//! pencil multiplicity, spectral flow) can be cross-validated against
//! closed-form spectra.
//!
//! Module map:
//!
//! - [`numkernel`]: complex dense linear algebra (LU, eigenvalues) and an
//!   adaptive Dormand–Prince integrator for complex linear systems.
//! - [`intervalmodel`]: closed-form interval Laplacian boundary maps, used
//!   as an exact oracle.
//! - [`schrodinger1d`]: frame matrices, boundary maps and Evans functions
//!   for `-u'' + Q(x) u = λ u` on `(-1, 1)` with matrix potential.
//! - [`discmodel`]: Bessel-series and Jost-solution boundary data on the
//!   unit disc, mode ratios and Schatten partial sums.
//! - [`detengine`]: p-modified Fredholm determinants for matrices and
//!   mode-truncated diagonal families.
//! - [`pencilmult`]: Jordan chains and algebraic multiplicity of analytic
//!   matrix pencils.
//! - [`contour`]: winding numbers by adaptive phase continuation and
//!   eigenvalue counting over rectangles and circles.
//! - [`maslov`]: the Souriau map, its analytic continuation, spectral flow
//!   through -1 and the Evans–Maslov comparison.

pub mod contour;
pub mod detengine;
pub mod discmodel;
pub mod intervalmodel;
pub mod maslov;
pub mod numkernel;
pub mod pencilmult;
pub mod schrodinger1d;

mod error;

pub use error::{Error, Result};
