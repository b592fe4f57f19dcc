//! Scenario execution and artifact emission.
//!
//! Every scenario writes `result.csv` (comma-separated, one `#` comment
//! line naming the scenario and the config hash, floats with 17 significant
//! digits) and `summary.txt` with the headline integers and residuals.
//! Runs are deterministic: identical configs produce byte-identical output.

use crate::config::{PotentialSpec, RunConfig, Scenario};
use evanskit::contour::{self, Contour};
use evanskit::detengine::{det_p_modes, DetOrder};
use evanskit::discmodel::{self, DiscConfig};
use evanskit::intervalmodel;
use evanskit::maslov;
use evanskit::numkernel::{self, CMatrix};
use evanskit::pencilmult::{multiplicity, MatrixPencil};
use evanskit::schrodinger1d::{self, frame};
use evanskit::Error as EvansError;
use num_complex::Complex64;

pub struct RunOutcome {
    pub csv: String,
    pub summary: String,
    /// Short line for stdout.
    pub headline: String,
}

/// Process exit code for an error, per the documented mapping:
/// 1 config/precondition, 2 on-spectrum, 3 numerical.
pub fn exit_code_for(err: &EvansError) -> i32 {
    match err {
        EvansError::OnSpectrum { .. }
        | EvansError::DirichletEigenvalue { .. }
        | EvansError::RobinEigenvalue { .. }
        | EvansError::ModeDirichletEigenvalue { .. }
        | EvansError::ModeRobinEigenvalue { .. } => 2,
        EvansError::Stiffness { .. }
        | EvansError::Convergence(_)
        | EvansError::SingularMatrix { .. }
        | EvansError::ContourResolution { .. }
        | EvansError::Truncation { .. }
        | EvansError::Resolution(_)
        | EvansError::MonotonicityViolation { .. } => 3,
        EvansError::Dimension(_) | EvansError::Domain(_) | EvansError::NotAnEigenvector { .. } => 1,
    }
}

/// 17 significant digits: lossless round-trip of f64.
fn fmt_f(x: f64) -> String {
    format!("{:.16e}", x)
}

fn csv_header(scenario: Scenario, hash: u64, columns: &str) -> String {
    format!("# evanskit scenario={} config={hash:016x}\n{columns}\n", scenario.name())
}

/// Chunked deterministic parallel map: results are ordered by index no
/// matter how many worker threads run.
fn parallel_map<T, F>(n: usize, threads: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync,
{
    let threads = threads.max(1).min(n.max(1));
    if threads == 1 {
        return (0..n).map(f).collect();
    }
    let mut results: Vec<Option<T>> = (0..n).map(|_| None).collect();
    let chunk = n.div_ceil(threads);
    std::thread::scope(|scope| {
        for (t, slice) in results.chunks_mut(chunk).enumerate() {
            let f = &f;
            scope.spawn(move || {
                for (i, slot) in slice.iter_mut().enumerate() {
                    *slot = Some(f(t * chunk + i));
                }
            });
        }
    });
    results.into_iter().map(|r| r.unwrap()).collect()
}

/// Winding over the window rectangle with the configured sampling controls
/// and the documented δ-halving retry on spectrum hits.
fn windowed_count<F>(cfg: &RunConfig, mut evans: F) -> Result<(i64, f64, usize), EvansError>
where
    F: FnMut(Complex64) -> Result<Complex64, EvansError>,
{
    let mut delta = cfg.delta;
    let mut last_err = None;
    for _ in 0..=6 {
        let c = Contour::rectangle(cfg.lambda1, cfg.lambda2, delta)?
            .with_samples(cfg.initial_samples)
            .with_max_depth(cfg.max_refine_depth);
        match contour::winding(&mut evans, &c) {
            Ok(w) => return Ok((w.winding, w.min_modulus_on_contour, w.samples_used)),
            Err(EvansError::OnSpectrum { location, modulus }) => {
                last_err = Some(EvansError::OnSpectrum { location, modulus });
                delta *= 0.5;
            }
            Err(e) => return Err(e),
        }
    }
    Err(last_err.unwrap())
}

pub fn execute(cfg: &RunConfig, hash: u64, threads: usize) -> Result<RunOutcome, EvansError> {
    match cfg.scenario {
        Scenario::Interval => run_interval(cfg, hash, threads),
        Scenario::Count => run_count(cfg, hash, threads),
        Scenario::Schrod1d => run_schrod1d(cfg, hash, threads),
        Scenario::Disc => run_disc(cfg, hash),
        Scenario::Maslov => run_maslov(cfg, hash),
        Scenario::Pencil => run_pencil(cfg, hash),
    }
}

fn run_interval(cfg: &RunConfig, hash: u64, threads: usize) -> Result<RunOutcome, EvansError> {
    let theta = cfg.theta;
    let evans = move |z: Complex64| intervalmodel::det_n_theta(z, &theta);
    let (count, min_mod, samples) = windowed_count(cfg, evans)?;

    // plot trace of det N_Θ along the real window
    let n = cfg.grid_samples;
    let rows = parallel_map(n, threads, |i| {
        let lam = cfg.lambda1 + (cfg.lambda2 - cfg.lambda1) * i as f64 / (n - 1) as f64;
        intervalmodel::det_n_theta(Complex64::new(lam, 0.0), &theta).map(|v| (lam, v))
    });
    let mut csv = csv_header(cfg.scenario, hash, "lambda,re_det_n,im_det_n");
    for row in rows {
        let (lam, v) = row?;
        csv.push_str(&format!("{},{},{}\n", fmt_f(lam), fmt_f(v.re), fmt_f(v.im)));
    }

    let summary = format!(
        "scenario = interval\ncount = {count}\nwindow = [{}, {}] x [-{}, {}]\nmin_modulus_on_contour = {}\ncontour_samples = {samples}\n",
        fmt_f(cfg.lambda1),
        fmt_f(cfg.lambda2),
        fmt_f(cfg.delta),
        fmt_f(cfg.delta),
        fmt_f(min_mod),
    );
    Ok(RunOutcome { csv, summary, headline: format!("count = {count}") })
}

fn run_count(cfg: &RunConfig, hash: u64, threads: usize) -> Result<RunOutcome, EvansError> {
    let p = cfg.problem.as_ref().unwrap().build()?;
    let phat = cfg.reference.as_ref().unwrap().build()?;
    let (count, min_mod, samples) =
        windowed_count(cfg, |z| schrodinger1d::evans_ratio(&p, &phat, z))?;

    let n = cfg.grid_samples;
    let rows = parallel_map(n, threads, |i| {
        let lam = cfg.lambda1 + (cfg.lambda2 - cfg.lambda1) * i as f64 / (n - 1) as f64;
        schrodinger1d::evans_ratio(&p, &phat, Complex64::new(lam, 0.0)).map(|v| (lam, v))
    });
    let mut csv = csv_header(cfg.scenario, hash, "lambda,re_evans,im_evans");
    for row in rows {
        let (lam, v) = row?;
        csv.push_str(&format!("{},{},{}\n", fmt_f(lam), fmt_f(v.re), fmt_f(v.im)));
    }

    let summary = format!(
        "scenario = count\ncount = {count}\nwindow = [{}, {}] x [-{}, {}]\nmin_modulus_on_contour = {}\ncontour_samples = {samples}\n",
        fmt_f(cfg.lambda1),
        fmt_f(cfg.lambda2),
        fmt_f(cfg.delta),
        fmt_f(cfg.delta),
        fmt_f(min_mod),
    );
    Ok(RunOutcome { csv, summary, headline: format!("count = {count}") })
}

fn run_schrod1d(cfg: &RunConfig, hash: u64, threads: usize) -> Result<RunOutcome, EvansError> {
    let pc = cfg.problem.as_ref().unwrap();
    let p = pc.build()?;
    let theta = p.big_theta();
    let n = cfg.grid_samples;

    struct Row {
        lam: f64,
        e_d: Complex64,
        e_theta: Complex64,
        det_n: Complex64,
        residual: f64,
    }
    let rows = parallel_map(n, threads, |i| -> Result<Row, EvansError> {
        let lam = cfg.grid_min + (cfg.grid_max - cfg.grid_min) * i as f64 / (n - 1) as f64;
        let fr = frame(&p, Complex64::new(lam, 0.0))?;
        let e_d = schrodinger1d::evans_dirichlet(&fr)?;
        let e_theta = schrodinger1d::evans_robin(&fr, &theta)?;
        let n_theta = schrodinger1d::robin_to_dirichlet(&fr, &theta)?;
        let det_n = numkernel::det(&n_theta)?;
        let residual = (det_n * e_theta - e_d).norm() / (e_d.norm() + (det_n * e_theta).norm()).max(1e-300);
        Ok(Row { lam, e_d, e_theta, det_n, residual })
    });

    let mut csv = csv_header(
        cfg.scenario,
        hash,
        "lambda,re_evans_dirichlet,im_evans_dirichlet,re_evans_robin,im_evans_robin,re_det_n,im_det_n",
    );
    let mut max_residual = 0.0f64;
    for row in rows {
        let r = row?;
        max_residual = max_residual.max(r.residual);
        csv.push_str(&format!(
            "{},{},{},{},{},{},{}\n",
            fmt_f(r.lam),
            fmt_f(r.e_d.re),
            fmt_f(r.e_d.im),
            fmt_f(r.e_theta.re),
            fmt_f(r.e_theta.im),
            fmt_f(r.det_n.re),
            fmt_f(r.det_n.im),
        ));
    }

    let summary = format!(
        "scenario = schrod1d\nn = {}\ngrid = [{}, {}] ({} samples)\nmax_identity_residual = {}\n",
        pc.n,
        fmt_f(cfg.grid_min),
        fmt_f(cfg.grid_max),
        n,
        fmt_f(max_residual),
    );
    Ok(RunOutcome { csv, summary, headline: format!("max identity residual = {max_residual:.3e}") })
}

fn run_disc(cfg: &RunConfig, hash: u64) -> Result<RunOutcome, EvansError> {
    let disc = match &cfg.disc_potential {
        PotentialSpec::Zero => {
            DiscConfig::laplacian(cfg.disc_gamma, cfg.disc_mu, cfg.disc_mu_hat, cfg.disc_max_mode)?
        }
        spec => DiscConfig::with_potential(
            spec.scalar_fn(),
            cfg.disc_gamma,
            cfg.disc_mu,
            cfg.disc_mu_hat,
            cfg.disc_max_mode,
        )?,
    };
    let lam = cfg.disc_lambda;
    let ratios = discmodel::mode_ratios(&disc, lam)?;
    let table = discmodel::schatten_diag(&disc, lam, cfg.disc_p as f64)?;

    let mut csv = csv_header(cfg.scenario, hash, "k,re_d_k,im_d_k,re_ratio,im_ratio,schatten_partial_sum");
    for k in 0..=cfg.disc_max_mode {
        let d = if cfg.disc_potential.is_zero() {
            discmodel::d_k(k as i32, lam)?
        } else {
            discmodel::jost_dtn(&disc, k as i32, lam)?
        };
        let r = ratios.value(k as i32);
        csv.push_str(&format!(
            "{},{},{},{},{},{}\n",
            k,
            fmt_f(d.re),
            fmt_f(d.im),
            fmt_f(r.re),
            fmt_f(r.im),
            fmt_f(table.partial_sums[k]),
        ));
    }

    let det_line = if cfg.disc_p >= 2 {
        let p = DetOrder::new(cfg.disc_p).unwrap();
        let d = det_p_modes(&ratios, p, cfg.disc_tail_tol)?;
        format!(
            "det_p = {} + {}i\ntail_bound = {}\nfitted_decay = {}\n",
            fmt_f(d.value.re),
            fmt_f(d.value.im),
            fmt_f(d.tail_bound),
            fmt_f(d.fitted_decay),
        )
    } else {
        "det_p = undefined (p = 1 diverges for the disc mode family)\n".to_string()
    };
    let summary = format!(
        "scenario = disc\nlambda = {} + {}i\np = {}\nmodes = {}\n{}increment_exponent = {}\nlog_slope = {}\n",
        fmt_f(lam.re),
        fmt_f(lam.im),
        cfg.disc_p,
        cfg.disc_max_mode,
        det_line,
        table.increment_exponent.map(fmt_f).unwrap_or_else(|| "n/a".into()),
        table.log_slope.map(fmt_f).unwrap_or_else(|| "n/a".into()),
    );
    let headline = format!("S_p({}) = {:.6e}", cfg.disc_max_mode, table.partial_sums[cfg.disc_max_mode]);
    Ok(RunOutcome { csv, summary, headline })
}

fn run_maslov(cfg: &RunConfig, hash: u64) -> Result<RunOutcome, EvansError> {
    let pc = cfg.problem.as_ref().unwrap();
    let p = pc.build()?;
    let trace = maslov::spectral_flow(&p, cfg.lambda1, cfg.lambda2, cfg.maslov_grid_step)?;

    let width = 2 * pc.n;
    let phase_cols: Vec<String> = (1..=width).map(|i| format!("phase_{i}")).collect();
    let mut csv = csv_header(
        cfg.scenario,
        hash,
        &format!("kind,lambda,{}", phase_cols.join(",")),
    );
    for (lam, phases) in trace.grid.iter().zip(&trace.phases) {
        let cells: Vec<String> = phases.iter().map(|&ph| fmt_f(ph)).collect();
        csv.push_str(&format!("sample,{},{}\n", fmt_f(*lam), cells.join(",")));
    }
    for cr in &trace.crossings {
        let mut cells = vec![cr.kernel_dim.to_string(), cr.direction.to_string()];
        while cells.len() < width {
            cells.push(String::new());
        }
        csv.push_str(&format!("crossing,{},{}\n", fmt_f(cr.lambda), cells.join(",")));
    }

    let mut summary = format!(
        "scenario = maslov\nflow = {}\nwindow = [{}, {}]\ncrossings = {}\n",
        trace.flow,
        fmt_f(cfg.lambda1),
        fmt_f(cfg.lambda2),
        trace.crossings.len(),
    );
    for cr in &trace.crossings {
        summary.push_str(&format!(
            "crossing: lambda = {}, kernel_dim = {}, direction = {}\n",
            fmt_f(cr.lambda),
            cr.kernel_dim,
            cr.direction,
        ));
    }
    let headline = format!("flow = {}", trace.flow);
    Ok(RunOutcome { csv, summary, headline })
}

fn builtin_pencil(name: &str) -> MatrixPencil {
    let c = |re: f64| Complex64::new(re, 0.0);
    match name {
        "diag1-lambda2" => {
            // diag(1, λ²)
            let mut c0 = CMatrix::zeros(2, 2);
            c0[(0, 0)] = c(1.0);
            let mut c2 = CMatrix::zeros(2, 2);
            c2[(1, 1)] = c(1.0);
            MatrixPencil::polynomial(c(0.0), vec![c0, CMatrix::zeros(2, 2), c2]).unwrap()
        }
        "jordan-lambda" => {
            // [[λ, 1], [0, λ]]
            let mut c0 = CMatrix::zeros(2, 2);
            c0[(0, 1)] = c(1.0);
            MatrixPencil::polynomial(c(0.0), vec![c0, CMatrix::identity(2)]).unwrap()
        }
        other => unreachable!("config validation admits only builtin pencils, got {other}"),
    }
}

fn run_pencil(cfg: &RunConfig, hash: u64) -> Result<RunOutcome, EvansError> {
    let t = builtin_pencil(&cfg.pencil_builtin);
    let m = multiplicity(&t, cfg.pencil_lambda0, cfg.pencil_radius)?;

    let mut csv = csv_header(cfg.scenario, hash, "theta,re_det,im_det");
    for i in 0..cfg.pencil_samples {
        let ang = 2.0 * std::f64::consts::PI * i as f64 / cfg.pencil_samples as f64;
        let z = cfg.pencil_lambda0 + Complex64::new(cfg.pencil_radius * ang.cos(), cfg.pencil_radius * ang.sin());
        let d = numkernel::det(&t.eval(z))?;
        csv.push_str(&format!("{},{},{}\n", fmt_f(ang), fmt_f(d.re), fmt_f(d.im)));
    }

    let summary = format!(
        "scenario = pencil\nbuiltin = {}\nmultiplicity = {m}\nlambda0 = {} + {}i\nradius = {}\n",
        cfg.pencil_builtin,
        fmt_f(cfg.pencil_lambda0.re),
        fmt_f(cfg.pencil_lambda0.im),
        fmt_f(cfg.pencil_radius),
    );
    Ok(RunOutcome { csv, summary, headline: format!("multiplicity = {m}") })
}
