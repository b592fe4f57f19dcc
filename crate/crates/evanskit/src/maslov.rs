//! Souriau map, spectral flow through -1, and the Evans–Maslov comparison
//! for symmetric problems on the interval.
//!
//! On the finite-dimensional trace space (Riesz map = identity) the Souriau
//! map is the Cayley transform of the Neumann-to-Dirichlet matrix,
//!
//! ```text
//! W(λ) = (N(λ) + i)(N(λ) - i)^{-1},
//! ```
//!
//! but it is always *built* from the continuation formula
//!
//! ```text
//! W(λ) = 2i N_{iI}(λ) - I,
//! ```
//!
//! which stays analytic across both the Neumann and the Dirichlet spectrum
//! because the `iI`-Robin spectrum is never real. For real λ and symmetric
//! problems `W` is unitary; its eigenvalues sit at -1 exactly at Dirichlet
//! eigenvalues, pass through -1 clockwise as λ increases, and move strictly
//! off the unit circle for nonreal λ (outside for `Im λ > 0`, inside for
//! `Im λ < 0`). Counting signed crossings over a window therefore counts
//! Dirichlet eigenvalues, which is the Maslov index of the problem, and
//! must agree with the winding of the Evans ratio around the same window.

use crate::numkernel::{self, CMatrix, Lu};
use crate::schrodinger1d::{self, frame, robin_to_dirichlet, Schrodinger1DProblem};
use crate::{contour, Error, Result};
use num_complex::Complex64;
use std::f64::consts::PI;

/// Eigenvalues of `W` within this distance of -1 belong to the kernel of
/// `I + W`.
const KERNEL_CLUSTER_TOL: f64 = 1e-6;

/// Distances in `(KERNEL_CLUSTER_TOL, AMBIGUOUS_TOL)` cannot be classified.
const AMBIGUOUS_TOL: f64 = 1e-4;

/// Radius of the verification circle for kernel dimensions.
const CHECK_RADIUS: f64 = 0.02;

/// Souriau map sample at one λ.
#[derive(Debug, Clone)]
pub struct SouriauSample {
    pub lambda: Complex64,
    pub w: CMatrix,
    /// Always true: the sample is computed from the continuation formula
    /// `2i N_{iI} - I` (the Cayley form serves as a cross-check only).
    pub via_continuation: bool,
}

/// One detected crossing of an eigenvalue of `W` through -1.
#[derive(Debug, Clone, Copy)]
pub struct Crossing {
    pub lambda: f64,
    pub kernel_dim: usize,
    /// -1 for clockwise (the only direction symmetric problems admit).
    pub direction: i32,
}

/// Sampled spectral flow over a real window.
#[derive(Debug, Clone)]
pub struct FlowTrace {
    pub grid: Vec<f64>,
    /// Sorted eigenvalue arguments of `W` at each grid point.
    pub phases: Vec<Vec<f64>>,
    pub crossings: Vec<Crossing>,
    /// Total signed flow through -1.
    pub flow: i64,
}

/// Both sides of the Evans–Maslov equality.
#[derive(Debug, Clone)]
pub struct EvansMaslovReport {
    /// Winding of the Evans ratio around the window rectangle.
    pub winding: i64,
    pub flow: i64,
    pub flow_hat: i64,
    pub matches: bool,
}

/// Souriau map `W(λ) = 2i N_{iI}(λ) - I`.
///
/// For λ in the Neumann resolvent set the Cayley form
/// `(N + i)(N - i)^{-1}` is evaluated as well and must agree to 1e-8
/// relative. Fails with [`Error::RobinEigenvalue`] only for nonreal λ in
/// the `iI`-Robin spectrum.
pub fn souriau(p: &Schrodinger1DProblem, lambda: Complex64) -> Result<SouriauSample> {
    let n2 = 2 * p.size();
    let fr = frame(p, lambda)?;
    let i_mat = CMatrix::identity(n2).scale(Complex64::new(0.0, 1.0));
    let n_robin = robin_to_dirichlet(&fr, &i_mat)?;
    let w = n_robin.scale(Complex64::new(0.0, 2.0)).sub(&CMatrix::identity(n2));

    // Cross-check against the Cayley transform of the Neumann-to-Dirichlet
    // map wherever the latter exists.
    let lu_z = Lu::decompose(&fr.z)?;
    if !lu_z.is_singular(1e-8) {
        let n0 = robin_to_dirichlet(&fr, &CMatrix::zeros(n2, n2))?;
        let plus = n0.add(&i_mat);
        let minus = n0.sub(&i_mat);
        let cayley = schrodinger1d::lu_transpose_solve(&minus, &plus)?;
        let err = w.sub(&cayley).norm();
        if err > 1e-8 * w.norm().max(1.0) {
            return Err(Error::Convergence(format!(
                "Souriau continuation and Cayley form disagree by {err:.3e} at λ = {lambda}"
            )));
        }
    }
    Ok(SouriauSample { lambda, w, via_continuation: true })
}

fn sorted_phases(w: &CMatrix) -> Result<Vec<f64>> {
    let mut phases: Vec<f64> = numkernel::eig(w)?.iter().map(|z| z.arg()).collect();
    phases.sort_by(|a, b| a.partial_cmp(b).unwrap());
    Ok(phases)
}

/// Distance from -1 to the nearest eigenvalue of `W`, and the count within
/// the kernel cluster.
fn minus_one_cluster(w: &CMatrix) -> Result<(f64, usize, Option<f64>)> {
    let eigs = numkernel::eig(w)?;
    let mut min_dist = f64::INFINITY;
    let mut count = 0;
    let mut ambiguous = None;
    for e in &eigs {
        let d = (e + Complex64::new(1.0, 0.0)).norm();
        min_dist = min_dist.min(d);
        if d <= KERNEL_CLUSTER_TOL {
            count += 1;
        } else if d < AMBIGUOUS_TOL {
            ambiguous = Some(d);
        }
    }
    Ok((min_dist, count, ambiguous))
}

/// Dimension of `ker(I + W(λ))` for real λ, i.e. the multiplicity of λ as a
/// Dirichlet eigenvalue.
///
/// Eigenvalues of `W` within 1e-6 of -1 count; any eigenvalue at a distance
/// in (1e-6, 1e-4) makes the clustering ambiguous and fails. A nonzero
/// count is verified against the winding of `λ' ↦ det(I + W(λ'))` on a
/// small circle, which computes the same multiplicity through the argument
/// principle.
pub fn kernel_dim_at(p: &Schrodinger1DProblem, lambda: f64) -> Result<usize> {
    let s = souriau(p, Complex64::new(lambda, 0.0))?;
    let (_, count, ambiguous) = minus_one_cluster(&s.w)?;
    if let Some(d) = ambiguous {
        return Err(Error::Resolution(format!(
            "eigenvalue of W at distance {d:.3e} from -1 cannot be classified at λ = {lambda}"
        )));
    }
    if count > 0 {
        let det_i_plus_w = |z: Complex64| -> Result<Complex64> {
            let s = souriau(p, z)?;
            numkernel::det(&s.w.add(&CMatrix::identity(s.w.rows())))
        };
        let m = contour::multiplicity_at(det_i_plus_w, Complex64::new(lambda, 0.0), CHECK_RADIUS)?;
        if m != count as i64 {
            return Err(Error::Resolution(format!(
                "cluster count {count} disagrees with contour multiplicity {m} at λ = {lambda}"
            )));
        }
    }
    Ok(count)
}

/// Signed spectral flow of `W` through -1 over `[λ1, λ2]`.
///
/// Crossings are located by bisection on the sign of the real function
/// `det(I + W)/√(det W)` (odd-dimensional kernels) combined with
/// golden-section minimization of the distance of `σ(W)` to -1
/// (even-dimensional kernels), both seeded on the grid. Each crossing
/// records its kernel dimension and direction; a counterclockwise crossing
/// for a symmetric problem is a [`Error::MonotonicityViolation`].
pub fn spectral_flow(
    p: &Schrodinger1DProblem,
    lambda1: f64,
    lambda2: f64,
    grid_step: f64,
) -> Result<FlowTrace> {
    if !(lambda1 < lambda2) {
        return Err(Error::Domain(format!("flow window needs λ1 < λ2, got [{lambda1}, {lambda2}]")));
    }
    if !(grid_step > 0.0) {
        return Err(Error::Domain("grid_step must be positive".into()));
    }
    if !p.is_symmetric(1e-10) {
        return Err(Error::Domain("spectral flow needs a symmetric problem (Hermitian Q and Θ±)".into()));
    }
    for end in [lambda1, lambda2] {
        if kernel_dim_at(p, end)? != 0 {
            return Err(Error::OnSpectrum { location: Complex64::new(end, 0.0), modulus: 0.0 });
        }
    }

    let cells = (((lambda2 - lambda1) / grid_step).ceil() as usize).max(8);
    let mut grid = Vec::with_capacity(cells + 1);
    let mut phases = Vec::with_capacity(cells + 1);
    let mut gvals = Vec::with_capacity(cells + 1);
    let mut dips = Vec::with_capacity(cells + 1);

    // continuous branch of sqrt(det W) along the grid
    let mut sqrt_ref: Option<Complex64> = None;
    for i in 0..=cells {
        let lam = lambda1 + (lambda2 - lambda1) * i as f64 / cells as f64;
        let s = souriau(p, Complex64::new(lam, 0.0))?;
        let (g, sq) = sign_function(&s.w, sqrt_ref)?;
        sqrt_ref = Some(sq);
        let (dip, _, _) = minus_one_cluster(&s.w)?;
        grid.push(lam);
        phases.push(sorted_phases(&s.w)?);
        gvals.push((g, sq));
        dips.push(dip);
    }

    // Empirical Lipschitz bound on the dip function gates which cells can
    // hide a touch of σ(W) at -1 without a sign change.
    let cell_width = (lambda2 - lambda1) / cells as f64;
    let l_max = dips
        .windows(2)
        .map(|w| (w[1] - w[0]).abs() / cell_width)
        .fold(0.0f64, f64::max);
    let dip_gate = 3.0 * l_max * cell_width + 1e-9;

    let mut candidates: Vec<f64> = Vec::new();
    for i in 0..cells {
        let (a, b) = (grid[i], grid[i + 1]);
        let (ga, sa) = gvals[i];
        let (gb, sb) = gvals[i + 1];
        if ga.signum() != gb.signum() {
            candidates.push(bisect_sign_change(p, a, ga, sa, b, gb, sb)?);
        } else if dips[i].min(dips[i + 1]).min(probe_dip(p, 0.5 * (a + b))?) < dip_gate {
            // possible touch without sign change (even kernel dimension)
            if let Some(lam_star) = golden_dip(p, a, b)? {
                candidates.push(lam_star);
            }
        }
    }

    candidates.sort_by(|x, y| x.partial_cmp(y).unwrap());
    candidates.dedup_by(|x, y| (*x - *y).abs() < 1e-7 * (lambda2 - lambda1));

    let h_dir = 1e-4 * (lambda2 - lambda1);
    let mut crossings = Vec::with_capacity(candidates.len());
    let mut flow = 0i64;
    for lam_star in candidates {
        let kernel_dim = kernel_dim_at(p, lam_star)?;
        if kernel_dim == 0 {
            continue;
        }
        let direction = crossing_direction(p, lam_star, h_dir)?;
        if direction > 0 {
            return Err(Error::MonotonicityViolation { lambda: lam_star });
        }
        flow += direction as i64 * kernel_dim as i64;
        crossings.push(Crossing { lambda: lam_star, kernel_dim, direction });
    }

    Ok(FlowTrace { grid, phases, crossings, flow })
}

/// Real sign function `Re(det(I + W)/√(det W))`, with the square-root
/// branch chosen by continuity against `reference`.
fn sign_function(w: &CMatrix, reference: Option<Complex64>) -> Result<(f64, Complex64)> {
    let n = w.rows();
    let det_w = numkernel::det(w)?;
    let det_i_plus_w = numkernel::det(&w.add(&CMatrix::identity(n)))?;
    let mut sq = det_w.sqrt();
    if let Some(r) = reference {
        if (sq + r).norm() < (sq - r).norm() {
            sq = -sq;
        }
    }
    Ok(((det_i_plus_w / sq).re, sq))
}

fn souriau_at(p: &Schrodinger1DProblem, lam: f64) -> Result<CMatrix> {
    Ok(souriau(p, Complex64::new(lam, 0.0))?.w)
}

fn probe_dip(p: &Schrodinger1DProblem, lam: f64) -> Result<f64> {
    let w = souriau_at(p, lam)?;
    Ok(minus_one_cluster(&w)?.0)
}

/// Bisection on the sign of the real function tracked with a continuous
/// square-root branch.
fn bisect_sign_change(
    p: &Schrodinger1DProblem,
    mut a: f64,
    mut ga: f64,
    mut sa: Complex64,
    mut b: f64,
    _gb: f64,
    mut sb: Complex64,
) -> Result<f64> {
    for _ in 0..200 {
        let mid = 0.5 * (a + b);
        if mid == a || mid == b {
            break;
        }
        let w = souriau_at(p, mid)?;
        let reference = if (mid - a) < (b - mid) { sa } else { sb };
        let (gm, sm) = sign_function(&w, Some(reference))?;
        if gm.signum() == ga.signum() {
            a = mid;
            ga = gm;
            sa = sm;
        } else {
            b = mid;
            sb = sm;
        }
    }
    Ok(0.5 * (a + b))
}

/// Golden-section minimization of the distance of `σ(W)` to -1; `Some`
/// only when the minimum is a genuine touch.
fn golden_dip(p: &Schrodinger1DProblem, mut a: f64, mut b: f64) -> Result<Option<f64>> {
    let (a0, b0) = (a, b);
    let inv_phi = 0.618_033_988_749_894_9;
    let mut x1 = b - inv_phi * (b - a);
    let mut x2 = a + inv_phi * (b - a);
    let mut f1 = probe_dip(p, x1)?;
    let mut f2 = probe_dip(p, x2)?;
    for _ in 0..120 {
        if f1 <= f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - inv_phi * (b - a);
            f1 = probe_dip(p, x1)?;
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + inv_phi * (b - a);
            f2 = probe_dip(p, x2)?;
        }
        if (b - a).abs() < 1e-14 * b.abs().max(1.0) {
            break;
        }
    }
    let lam = 0.5 * (a + b);
    let dip = probe_dip(p, lam)?.min(f1).min(f2);
    let at_boundary = (lam - a0).abs() < 1e-8 * (b0 - a0) || (b0 - lam).abs() < 1e-8 * (b0 - a0);
    if dip <= 1e-8 {
        Ok(Some(lam))
    } else if at_boundary {
        // the true crossing sits in the neighboring cell, where the
        // sign-change detector owns it
        Ok(None)
    } else if dip < AMBIGUOUS_TOL {
        Err(Error::Resolution(format!(
            "near-touch of σ(W) at -1 (distance {dip:.3e}) near λ = {lam} cannot be resolved"
        )))
    } else {
        Ok(None)
    }
}

/// Direction of the crossing at `lam_star`: sign of the wrapped phase
/// increment of the eigenvalue of `W` nearest -1, by central difference.
fn crossing_direction(p: &Schrodinger1DProblem, lam_star: f64, h: f64) -> Result<i32> {
    let near_minus_one = |lam: f64| -> Result<Complex64> {
        let w = souriau_at(p, lam)?;
        let eigs = numkernel::eig(&w)?;
        Ok(*eigs
            .iter()
            .min_by(|x, y| {
                let dx = (*x + Complex64::new(1.0, 0.0)).norm();
                let dy = (*y + Complex64::new(1.0, 0.0)).norm();
                dx.partial_cmp(&dy).unwrap()
            })
            .unwrap())
    };
    let w_minus = near_minus_one(lam_star - h)?;
    let w_plus = near_minus_one(lam_star + h)?;
    let dtheta = (w_plus / w_minus).arg();
    Ok(if dtheta < 0.0 { -1 } else { 1 })
}

/// Evaluate both sides of the Evans–Maslov equality over
/// `[λ1, λ2] × [-δ, δ]`: the winding of the Evans ratio of `(p, p̂)` and
/// the difference of spectral flows, computed by independent code paths.
///
/// The winding side replaces both problems' Robin matrices with the
/// non-real operator `iI`. A Hermitian Θ puts the Robin spectrum on the
/// real axis, where it would cancel the Dirichlet count inside the window;
/// with `iI` the Robin terms stay off the real axis and the winding reduces
/// to the difference of Dirichlet counts, which is what the spectral flows
/// measure.
pub fn evans_maslov_check(
    p: &Schrodinger1DProblem,
    phat: &Schrodinger1DProblem,
    lambda1: f64,
    lambda2: f64,
    delta: f64,
) -> Result<EvansMaslovReport> {
    let i_small = CMatrix::identity(p.size()).scale(Complex64::new(0.0, 1.0));
    let p_i = p.with_thetas(i_small.clone(), i_small.clone())?;
    let i_small_hat = CMatrix::identity(phat.size()).scale(Complex64::new(0.0, 1.0));
    let phat_i = phat.with_thetas(i_small_hat.clone(), i_small_hat)?;
    let winding = contour::count_eigs(
        |z| schrodinger1d::evans_ratio(&p_i, &phat_i, z),
        lambda1,
        lambda2,
        delta,
    )?;
    let grid_step = ((lambda2 - lambda1) / 64.0).min(0.1);
    let flow = spectral_flow(p, lambda1, lambda2, grid_step)?.flow;
    let flow_hat = spectral_flow(phat, lambda1, lambda2, grid_step)?.flow;
    let matches = winding == flow_hat - flow;
    Ok(EvansMaslovReport { winding, flow, flow_hat, matches })
}

/// Dirichlet eigenvalues of the free problem on `(-1, 1)`: `(kπ/2)²`.
pub fn free_dirichlet_eigenvalue(k: u32) -> f64 {
    (k as f64 * PI / 2.0).powi(2)
}
