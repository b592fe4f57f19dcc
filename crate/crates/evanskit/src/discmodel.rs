//! Mode-diagonal boundary maps on the unit disc.
//!
//! In the Fourier basis `e^{ikθ}` the Dirichlet-to-Neumann map of the disc
//! Laplacian acts diagonally with eigenvalues
//!
//! ```text
//! d_k(λ) = √λ · J'_{|k|}(√λ) / J_{|k|}(√λ),
//! ```
//!
//! which despite appearances is an unambiguous function of λ: writing the
//! Bessel series in powers of λ gives
//!
//! ```text
//! d_k(λ) = |k| - λ / (2(|k|+1)) · g_{|k|+1}(λ) / g_{|k|}(λ),
//! g_k(λ)  = Σ_m (-λ/4)^m / (m! (k+1)(k+2)⋯(k+m)),    g_k(0) = 1,
//! ```
//!
//! with entire numerator and denominator. For a radial potential `q(|x|)`
//! the same boundary data comes from the Jost solution of the half-line
//! equation obtained by the substitution `r = e^{-t}`:
//!
//! ```text
//! -v'' + e^{-2t}(q(e^{-t}) - λ) v + k² v = 0,    v(t) ~ e^{-|k|t},
//! d_k(λ) = -v'(0) / v(0).
//! ```
//!
//! Mode ratios `(d̂_k(λ) + μ̂) / (d_k(λ) + μ)` are the eigenvalues of the
//! operator ratio `E(λ)` built from the Robin boundary operators `μ𝒥` and
//! `μ̂𝒥`; their distance from 1 decays like `1/k`, which drives the
//! Schatten-class dichotomy diagnostics.

use crate::numkernel::{self, OdeSystem};
use crate::{Error, Result};
use num_complex::Complex64;
use std::sync::Arc;

/// Largest |λ| for the power-series evaluation; beyond this the alternating
/// series loses too many digits to cancellation.
pub const LAMBDA_SERIES_CAP: f64 = 400.0;

/// Structural cap on the mode index.
pub const MODE_CAP: i32 = 10_000;

/// Relative size of the denominator series below which λ counts as a
/// mode-k Dirichlet eigenvalue.
const MODE_SINGULAR_TOL: f64 = 1e-8;

/// Disc configuration: radial potential, reference shift and Robin
/// couplings.
#[derive(Clone)]
pub struct DiscConfig {
    q: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
    q_is_zero: bool,
    gamma: f64,
    mu: Complex64,
    mu_hat: Complex64,
    max_mode: usize,
}

impl DiscConfig {
    /// Laplacian configuration (`q ≡ 0`).
    pub fn laplacian(gamma: f64, mu: Complex64, mu_hat: Complex64, max_mode: usize) -> Result<Self> {
        Self::validate(gamma, mu, mu_hat, max_mode)?;
        Ok(DiscConfig { q: Arc::new(|_| 0.0), q_is_zero: true, gamma, mu, mu_hat, max_mode })
    }

    /// Configuration with a continuous radial potential on `[0, 1]`.
    pub fn with_potential(
        q: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
        gamma: f64,
        mu: Complex64,
        mu_hat: Complex64,
        max_mode: usize,
    ) -> Result<Self> {
        Self::validate(gamma, mu, mu_hat, max_mode)?;
        Ok(DiscConfig { q, q_is_zero: false, gamma, mu, mu_hat, max_mode })
    }

    fn validate(gamma: f64, mu: Complex64, mu_hat: Complex64, max_mode: usize) -> Result<()> {
        if !gamma.is_finite() || !mu.is_finite() || !mu_hat.is_finite() {
            return Err(Error::Domain("disc parameters must be finite".into()));
        }
        if max_mode < 8 {
            return Err(Error::Domain(format!("max_mode must be at least 8, got {max_mode}")));
        }
        Ok(())
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn mu(&self) -> Complex64 {
        self.mu
    }

    pub fn mu_hat(&self) -> Complex64 {
        self.mu_hat
    }

    pub fn max_mode(&self) -> usize {
        self.max_mode
    }

    fn q_sup(&self) -> f64 {
        if self.q_is_zero {
            return 0.0;
        }
        (0..=64).map(|i| (self.q)(i as f64 / 64.0).abs()).fold(0.0, f64::max)
    }
}

/// Per-mode values at a fixed λ; `value(k) = value(-k)` since everything
/// depends on `|k|` only.
#[derive(Debug, Clone)]
pub struct ModeSequence {
    pub lambda: Complex64,
    values: Vec<Complex64>,
}

impl ModeSequence {
    pub fn max_mode(&self) -> usize {
        self.values.len() - 1
    }

    pub fn value(&self, k: i32) -> Complex64 {
        self.values[k.unsigned_abs() as usize]
    }

    /// Values for `k = 0..=K` (each `k > 0` standing for the pair `±k`).
    pub fn values_nonneg(&self) -> &[Complex64] {
        &self.values
    }
}

/// Normalized denominator series `g_k(λ)` with `g_k(0) = 1`, plus the
/// magnitude of its largest term (the conditioning scale). Kahan-compensated
/// summation, truncated when a term falls below 1e-18 of the running sum.
fn bessel_series(k: u32, lambda: Complex64) -> Result<(Complex64, f64)> {
    if lambda.norm() > LAMBDA_SERIES_CAP {
        return Err(Error::Domain(format!(
            "|λ| = {} exceeds the series cap {LAMBDA_SERIES_CAP}",
            lambda.norm()
        )));
    }
    let ratio = -lambda * 0.25;
    let mut sum = Complex64::new(1.0, 0.0);
    let mut comp = Complex64::new(0.0, 0.0);
    let mut term = Complex64::new(1.0, 0.0);
    let mut max_term = 1.0f64;
    for m in 1..600u32 {
        term = term * ratio / (m as f64 * (k as f64 + m as f64));
        max_term = max_term.max(term.norm());
        // Kahan step
        let y = term - comp;
        let t = sum + y;
        comp = (t - sum) - y;
        sum = t;
        if term.norm() <= 1e-18 * sum.norm().max(f64::MIN_POSITIVE) {
            return Ok((sum, max_term));
        }
    }
    Err(Error::Convergence(format!("Bessel series for k = {k} did not converge at λ = {lambda}")))
}

/// Mode-k Dirichlet-to-Neumann value of the disc Laplacian, by the entire
/// λ-power series. Fails with [`Error::ModeDirichletEigenvalue`] when λ is a
/// squared zero of `J_{|k|}`.
pub fn d_k(k: i32, lambda: Complex64) -> Result<Complex64> {
    if k.abs() > MODE_CAP {
        return Err(Error::Domain(format!("mode index {k} exceeds cap {MODE_CAP}")));
    }
    let ka = k.unsigned_abs();
    let (g_k, scale) = bessel_series(ka, lambda)?;
    if g_k.norm() <= MODE_SINGULAR_TOL * scale {
        return Err(Error::ModeDirichletEigenvalue { mode: k, lambda });
    }
    let (g_k1, _) = bessel_series(ka + 1, lambda)?;
    Ok(Complex64::new(ka as f64, 0.0) - lambda / (2.0 * (ka as f64 + 1.0)) * (g_k1 / g_k))
}

/// Locate the mode-k Dirichlet eigenvalues (squared Bessel zeros) in
/// `(0, lambda_max]` by scanning the real denominator series for sign
/// changes and bisecting.
pub fn mode_dirichlet_eigenvalues(k: u32, lambda_max: f64) -> Result<Vec<f64>> {
    let g = |lam: f64| -> Result<f64> { Ok(bessel_series(k, Complex64::new(lam, 0.0))?.0.re) };
    let step = 0.2;
    let mut zeros = Vec::new();
    let mut lam = 1e-3;
    let mut prev = g(lam)?;
    while lam < lambda_max {
        let next_lam = (lam + step).min(lambda_max);
        let cur = g(next_lam)?;
        if prev == 0.0 {
            zeros.push(lam);
        } else if prev.signum() != cur.signum() && cur != 0.0 {
            let mut lo = lam;
            let mut hi = next_lam;
            let mut flo = prev;
            for _ in 0..80 {
                let mid = 0.5 * (lo + hi);
                let fm = g(mid)?;
                if fm == 0.0 {
                    lo = mid;
                    hi = mid;
                    break;
                }
                if fm.signum() == flo.signum() {
                    lo = mid;
                    flo = fm;
                } else {
                    hi = mid;
                }
            }
            zeros.push(0.5 * (lo + hi));
        }
        prev = cur;
        lam = next_lam;
    }
    Ok(zeros)
}

/// Boundary value of the mode-k Jost solution: integrate the half-line
/// equation backward from the truncation point `T` and return
/// `-v'(0) / v(0)`.
///
/// The truncation `T = max(8, ln((|λ| + ‖q‖∞)/atol) / 2)` keeps the
/// neglected potential tail `e^{-2T}(‖q‖∞ + |λ|)` below `atol`, so the
/// plane-wave data at `T` is accurate to the working tolerance.
pub fn jost_dtn(cfg: &DiscConfig, k: i32, lambda: Complex64) -> Result<Complex64> {
    jost_dtn_scaled(cfg, k, lambda, 1.0)
}

/// Same as [`jost_dtn`] with the Jost data at `T` rescaled by `scale`;
/// the logarithmic derivative is invariant under this.
pub(crate) fn jost_dtn_scaled(cfg: &DiscConfig, k: i32, lambda: Complex64, scale: f64) -> Result<Complex64> {
    if k.abs() > MODE_CAP {
        return Err(Error::Domain(format!("mode index {k} exceeds cap {MODE_CAP}")));
    }
    let atol = 1e-12;
    let ka = k.unsigned_abs() as f64;
    let lam_eff = lambda.norm() + cfg.q_sup();
    let t_end = (0.5 * (lam_eff / atol).ln()).max(8.0);

    let q = cfg.q.clone();
    let sys = OdeSystem::new(2, move |t: f64, y, out| {
        let r = (-t).exp();
        let coeff = Complex64::new(ka * ka, 0.0) + Complex64::new(r * r, 0.0) * (Complex64::new(q(r), 0.0) - lambda);
        out[0] = y[1];
        out[1] = coeff * y[0];
    });

    // Plane-wave data at T for the solution decaying like e^{-|k|t},
    // normalized to avoid underflow for large k.
    let y_end = [Complex64::new(scale, 0.0), Complex64::new(-ka * scale, 0.0)];
    let y0 = numkernel::propagate(&sys, t_end, 0.0, &y_end, 1e-11, 1e-13)?;
    let norm = y0[0].norm().max(y0[1].norm());
    if y0[0].norm() <= 1e-10 * norm.max(f64::MIN_POSITIVE) {
        return Err(Error::ModeDirichletEigenvalue { mode: k, lambda });
    }
    Ok(-y0[1] / y0[0])
}

/// Per-mode eigenvalues `(d̂_k(λ) + μ̂) / (d_k(λ) + μ)` of the operator
/// ratio `E(λ)` for `|k| ≤ K`.
///
/// The reference operator is the shifted Laplacian, so its boundary data is
/// the Bessel form evaluated at `λ - γ`; the perturbed side uses the Jost
/// solution when a potential is present.
pub fn mode_ratios(cfg: &DiscConfig, lambda: Complex64) -> Result<ModeSequence> {
    let kmax = cfg.max_mode;
    let mut values = Vec::with_capacity(kmax + 1);
    for k in 0..=kmax as i32 {
        let d = if cfg.q_is_zero { d_k(k, lambda)? } else { jost_dtn(cfg, k, lambda)? };
        let d_hat = d_k(k, lambda - Complex64::new(cfg.gamma, 0.0))?;
        let denom = d + cfg.mu;
        if denom.norm() <= MODE_SINGULAR_TOL * (d.norm() + cfg.mu.norm()).max(1.0) {
            return Err(Error::ModeRobinEigenvalue { mode: k, lambda });
        }
        values.push((d_hat + cfg.mu_hat) / denom);
    }
    Ok(ModeSequence { lambda, values })
}

/// Schatten partial-sum table `S_p(K') = Σ_{k=0}^{K'} |ratio_k - 1|^p`
/// over distinct modes (each `k > 0` stands for the pair `±k`, whose values
/// coincide; summing one representative keeps the table comparable with the
/// per-mode sandwich bounds).
#[derive(Debug, Clone)]
pub struct SchattenTable {
    pub p: f64,
    /// `partial_sums[k] = S_p(k)`.
    pub partial_sums: Vec<f64>,
    /// Fitted exponent of the increments `|ratio_k - 1|^p ~ k^e` over the
    /// last quartile of modes; `None` when increments are negligible.
    pub increment_exponent: Option<f64>,
    /// Fitted slope of `S_p` against `ln k` over the last quartile; for
    /// `p = 1` this is the logarithmic divergence rate.
    pub log_slope: Option<f64>,
}

impl SchattenTable {
    /// Increment `S_p(k) - S_p(k-1)`.
    pub fn increment(&self, k: usize) -> f64 {
        if k == 0 {
            self.partial_sums[0]
        } else {
            self.partial_sums[k] - self.partial_sums[k - 1]
        }
    }

    /// Whether the fitted increment exponent is within `tol` of `-p`.
    pub fn increments_match_power_law(&self, tol: f64) -> bool {
        match self.increment_exponent {
            Some(e) => (e + self.p).abs() <= tol,
            None => false,
        }
    }
}

/// Build the Schatten partial-sum table of order `p` at λ.
pub fn schatten_diag(cfg: &DiscConfig, lambda: Complex64, p: f64) -> Result<SchattenTable> {
    if !(p >= 0.5) || !p.is_finite() {
        return Err(Error::Domain(format!("Schatten order p = {p} out of range")));
    }
    let ratios = mode_ratios(cfg, lambda)?;
    let kmax = ratios.max_mode();
    let mut partial_sums = Vec::with_capacity(kmax + 1);
    let mut acc = 0.0;
    let mut increments = Vec::with_capacity(kmax + 1);
    for k in 0..=kmax as i32 {
        let inc = (ratios.value(k) - Complex64::new(1.0, 0.0)).norm().powf(p);
        acc += inc;
        increments.push(inc);
        partial_sums.push(acc);
    }

    // Fit over the last quartile of modes.
    let start = (3 * kmax) / 4;
    let mut xs = Vec::new();
    let mut ys_inc = Vec::new();
    let mut ys_sum = Vec::new();
    for k in start.max(1)..=kmax {
        if increments[k] > 0.0 {
            xs.push((k as f64).ln());
            ys_inc.push(increments[k].ln());
            ys_sum.push(partial_sums[k]);
        }
    }
    let increment_exponent = linear_slope(&xs, &ys_inc);
    let log_slope = linear_slope(&xs, &ys_sum);

    Ok(SchattenTable { p, partial_sums, increment_exponent, log_slope })
}

fn linear_slope(xs: &[f64], ys: &[f64]) -> Option<f64> {
    if xs.len() < 4 {
        return None;
    }
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let mut num = 0.0;
    let mut den = 0.0;
    for (x, y) in xs.iter().zip(ys) {
        num += (x - mx) * (y - my);
        den += (x - mx) * (x - mx);
    }
    if den == 0.0 {
        None
    } else {
        Some(num / den)
    }
}
