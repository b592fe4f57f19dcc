//! Line-oriented configuration: `[section]` headers and `key = value`
//! pairs, `#` comments, complex scalars written `a+bi`, matrices with rows
//! separated by `;` and entries by `,`. Unknown sections and keys are
//! rejected with line numbers.

use evanskit::intervalmodel::Theta2x2;
use evanskit::numkernel::CMatrix;
use evanskit::schrodinger1d::Schrodinger1DProblem;
use num_complex::Complex64;
use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

#[derive(Debug, Clone, PartialEq)]
pub struct ConfigError {
    pub line: Option<usize>,
    pub message: String,
}

impl ConfigError {
    fn at(line: usize, message: impl Into<String>) -> Self {
        ConfigError { line: Some(line), message: message.into() }
    }

    fn plain(message: impl Into<String>) -> Self {
        ConfigError { line: None, message: message.into() }
    }
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.line {
            Some(line) => write!(f, "config error (line {line}): {}", self.message),
            None => write!(f, "config error: {}", self.message),
        }
    }
}

impl std::error::Error for ConfigError {}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scenario {
    Interval,
    Schrod1d,
    Disc,
    Maslov,
    Pencil,
    Count,
}

impl Scenario {
    pub fn parse(s: &str) -> Option<Scenario> {
        match s {
            "interval" => Some(Scenario::Interval),
            "schrod1d" => Some(Scenario::Schrod1d),
            "disc" => Some(Scenario::Disc),
            "maslov" => Some(Scenario::Maslov),
            "pencil" => Some(Scenario::Pencil),
            "count" => Some(Scenario::Count),
            _ => None,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Scenario::Interval => "interval",
            Scenario::Schrod1d => "schrod1d",
            Scenario::Disc => "disc",
            Scenario::Maslov => "maslov",
            Scenario::Pencil => "pencil",
            Scenario::Count => "count",
        }
    }
}

/// Potential specification: polynomial coefficients or tabulated values
/// with natural cubic interpolation.
#[derive(Debug, Clone, PartialEq)]
pub enum PotentialSpec {
    Zero,
    Poly(Vec<f64>),
    Table(Vec<(f64, f64)>),
}

impl PotentialSpec {
    /// Scalar callable for the potential.
    pub fn scalar_fn(&self) -> Arc<dyn Fn(f64) -> f64 + Send + Sync> {
        match self {
            PotentialSpec::Zero => Arc::new(|_| 0.0),
            PotentialSpec::Poly(coeffs) => {
                let coeffs = coeffs.clone();
                Arc::new(move |x| {
                    let mut v = 0.0;
                    for &c in coeffs.iter().rev() {
                        v = v * x + c;
                    }
                    v
                })
            }
            PotentialSpec::Table(nodes) => {
                let spline = CubicSpline::natural(nodes);
                Arc::new(move |x| spline.eval(x))
            }
        }
    }

    pub fn is_zero(&self) -> bool {
        matches!(self, PotentialSpec::Zero)
    }
}

/// Natural cubic spline through sorted nodes, clamped to the end values
/// outside the node range.
#[derive(Debug, Clone)]
pub struct CubicSpline {
    xs: Vec<f64>,
    ys: Vec<f64>,
    second: Vec<f64>,
}

impl CubicSpline {
    pub fn natural(nodes: &[(f64, f64)]) -> CubicSpline {
        let mut nodes = nodes.to_vec();
        nodes.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
        let n = nodes.len();
        let xs: Vec<f64> = nodes.iter().map(|p| p.0).collect();
        let ys: Vec<f64> = nodes.iter().map(|p| p.1).collect();
        let mut second = vec![0.0; n];
        if n > 2 {
            // tridiagonal solve for the interior second derivatives
            let mut sub = vec![0.0; n];
            let mut diag = vec![0.0; n];
            let mut sup = vec![0.0; n];
            let mut rhs = vec![0.0; n];
            for i in 1..n - 1 {
                let h0 = xs[i] - xs[i - 1];
                let h1 = xs[i + 1] - xs[i];
                sub[i] = h0;
                diag[i] = 2.0 * (h0 + h1);
                sup[i] = h1;
                rhs[i] = 6.0 * ((ys[i + 1] - ys[i]) / h1 - (ys[i] - ys[i - 1]) / h0);
            }
            for i in 2..n - 1 {
                let w = sub[i] / diag[i - 1];
                diag[i] -= w * sup[i - 1];
                rhs[i] -= w * rhs[i - 1];
            }
            for i in (1..n - 1).rev() {
                second[i] = (rhs[i] - sup[i] * second[i + 1]) / diag[i];
            }
        }
        CubicSpline { xs, ys, second }
    }

    pub fn eval(&self, x: f64) -> f64 {
        let n = self.xs.len();
        if n == 1 {
            return self.ys[0];
        }
        if x <= self.xs[0] {
            return self.ys[0];
        }
        if x >= self.xs[n - 1] {
            return self.ys[n - 1];
        }
        let mut i = match self.xs.binary_search_by(|p| p.partial_cmp(&x).unwrap()) {
            Ok(i) => i,
            Err(i) => i - 1,
        };
        i = i.min(n - 2);
        let h = self.xs[i + 1] - self.xs[i];
        let a = (self.xs[i + 1] - x) / h;
        let b = (x - self.xs[i]) / h;
        a * self.ys[i]
            + b * self.ys[i + 1]
            + ((a * a * a - a) * self.second[i] + (b * b * b - b) * self.second[i + 1]) * h * h / 6.0
    }
}

/// One interval-problem block (`[problem]` or `[reference]`).
#[derive(Debug, Clone)]
pub struct ProblemConfig {
    pub n: usize,
    pub potential: PotentialSpec,
    pub theta_plus: CMatrix,
    pub theta_minus: CMatrix,
}

impl ProblemConfig {
    pub fn build(&self) -> Result<Schrodinger1DProblem, evanskit::Error> {
        let n = self.n;
        let scalar = self.potential.scalar_fn();
        let q = Arc::new(move |x: f64| {
            CMatrix::identity(n).scale(Complex64::new(scalar(x), 0.0))
        });
        Schrodinger1DProblem::new(n, q, self.theta_plus.clone(), self.theta_minus.clone())
    }
}

/// Fully parsed and validated run configuration.
#[derive(Debug)]
pub struct RunConfig {
    pub scenario: Scenario,
    pub problem: Option<ProblemConfig>,
    pub reference: Option<ProblemConfig>,
    // window
    pub lambda1: f64,
    pub lambda2: f64,
    pub delta: f64,
    // contour controls
    pub initial_samples: usize,
    pub max_refine_depth: usize,
    // real-axis sampling
    pub grid_min: f64,
    pub grid_max: f64,
    pub grid_samples: usize,
    // disc block
    pub disc_mu: Complex64,
    pub disc_mu_hat: Complex64,
    pub disc_gamma: f64,
    pub disc_max_mode: usize,
    pub disc_lambda: Complex64,
    pub disc_p: u32,
    pub disc_tail_tol: f64,
    pub disc_potential: PotentialSpec,
    // maslov block
    pub maslov_grid_step: f64,
    // pencil block
    pub pencil_builtin: String,
    pub pencil_lambda0: Complex64,
    pub pencil_radius: f64,
    pub pencil_samples: usize,
    // interval theta
    pub theta: Theta2x2,
    pub output_dir: Option<String>,
}

pub fn parse_complex(s: &str) -> Option<Complex64> {
    let t = s.trim();
    if t.is_empty() {
        return None;
    }
    if let Some(stripped) = t.strip_suffix(['i', 'I']) {
        // forms: "bi", "a+bi", "a-bi"
        let body = stripped.trim();
        if body.is_empty() {
            return Some(Complex64::new(0.0, 1.0));
        }
        // split at the last +/- that is not the leading sign or an exponent sign
        let bytes = body.as_bytes();
        let mut split = None;
        for idx in (1..bytes.len()).rev() {
            let ch = bytes[idx] as char;
            if (ch == '+' || ch == '-') && !matches!(bytes[idx - 1] as char, 'e' | 'E') {
                split = Some(idx);
                break;
            }
        }
        match split {
            Some(idx) => {
                let re: f64 = body[..idx].trim().parse().ok()?;
                let imag_str = body[idx..].trim();
                let im: f64 = if imag_str == "+" {
                    1.0
                } else if imag_str == "-" {
                    -1.0
                } else {
                    imag_str.parse().ok()?
                };
                Some(Complex64::new(re, im))
            }
            None => {
                let im: f64 = body.trim().parse().ok()?;
                Some(Complex64::new(0.0, im))
            }
        }
    } else {
        let re: f64 = t.parse().ok()?;
        Some(Complex64::new(re, 0.0))
    }
}

fn parse_matrix(s: &str, n: usize) -> Option<CMatrix> {
    let rows: Vec<&str> = s.split(';').collect();
    if rows.len() != n {
        return None;
    }
    let mut entries = Vec::with_capacity(n * n);
    for row in rows {
        let cells: Vec<&str> = row.split(',').collect();
        if cells.len() != n {
            return None;
        }
        for cell in cells {
            entries.push(parse_complex(cell)?);
        }
    }
    CMatrix::new(n, n, entries).ok()
}

struct Section {
    line: usize,
    entries: BTreeMap<String, (String, usize)>,
    consumed: std::cell::RefCell<Vec<String>>,
}

impl Section {
    fn get(&self, key: &str) -> Option<(&str, usize)> {
        self.consumed.borrow_mut().push(key.to_string());
        self.entries.get(key).map(|(v, l)| (v.as_str(), *l))
    }

    fn unknown_keys(&self) -> Option<(String, usize)> {
        let consumed = self.consumed.borrow();
        for (key, (_, line)) in &self.entries {
            if !consumed.iter().any(|c| c == key) {
                return Some((key.clone(), *line));
            }
        }
        None
    }
}

fn tokenize(text: &str) -> Result<BTreeMap<String, Section>, ConfigError> {
    let mut sections: BTreeMap<String, Section> = BTreeMap::new();
    let mut current: Option<String> = None;
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        if let Some(name) = line.strip_prefix('[') {
            let name = name
                .strip_suffix(']')
                .ok_or_else(|| ConfigError::at(line_no, "unterminated section header"))?
                .trim()
                .to_string();
            if name.is_empty() {
                return Err(ConfigError::at(line_no, "empty section name"));
            }
            if sections.contains_key(&name) {
                return Err(ConfigError::at(line_no, format!("duplicate section [{name}]")));
            }
            sections.insert(
                name.clone(),
                Section { line: line_no, entries: BTreeMap::new(), consumed: Default::default() },
            );
            current = Some(name);
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| ConfigError::at(line_no, "expected 'key = value'"))?;
        let key = key.trim().to_string();
        let value = value.trim().to_string();
        if key.is_empty() {
            return Err(ConfigError::at(line_no, "empty key"));
        }
        let section_name = current
            .clone()
            .ok_or_else(|| ConfigError::at(line_no, "key outside of any [section]"))?;
        let section = sections.get_mut(&section_name).unwrap();
        if section.entries.contains_key(&key) {
            return Err(ConfigError::at(line_no, format!("duplicate key '{key}'")));
        }
        section.entries.insert(key, (value, line_no));
    }
    Ok(sections)
}

fn req<'a>(section: &'a Section, section_name: &str, key: &str) -> Result<(&'a str, usize), ConfigError> {
    section
        .get(key)
        .ok_or_else(|| ConfigError::at(section.line, format!("missing required key '{key}' in [{section_name}]")))
}

fn parse_f64(value: &str, line: usize, key: &str) -> Result<f64, ConfigError> {
    let v: f64 = value
        .parse()
        .map_err(|_| ConfigError::at(line, format!("'{key}' is not a number: '{value}'")))?;
    if !v.is_finite() {
        return Err(ConfigError::at(line, format!("'{key}' must be finite")));
    }
    Ok(v)
}

fn parse_usize(value: &str, line: usize, key: &str) -> Result<usize, ConfigError> {
    value
        .parse()
        .map_err(|_| ConfigError::at(line, format!("'{key}' is not a non-negative integer: '{value}'")))
}

fn parse_complex_key(value: &str, line: usize, key: &str) -> Result<Complex64, ConfigError> {
    parse_complex(value)
        .ok_or_else(|| ConfigError::at(line, format!("'{key}' is not a complex scalar (a+bi): '{value}'")))
}

fn parse_potential(section: &Section, section_name: &str) -> Result<PotentialSpec, ConfigError> {
    let poly = section.get("q_poly");
    let table = section.get("q_table");
    match (poly, table) {
        (Some(_), Some((_, line))) => Err(ConfigError::at(
            line,
            format!("[{section_name}] may set only one of q_poly / q_table"),
        )),
        (Some((value, line)), None) => {
            let coeffs: Result<Vec<f64>, _> = value
                .split(',')
                .map(|s| parse_f64(s.trim(), line, "q_poly"))
                .collect();
            Ok(PotentialSpec::Poly(coeffs?))
        }
        (None, Some((value, line))) => {
            let mut nodes = Vec::new();
            for pair in value.split(',') {
                let (x, v) = pair
                    .split_once(':')
                    .ok_or_else(|| ConfigError::at(line, "q_table entries must be 'x:value'"))?;
                nodes.push((parse_f64(x.trim(), line, "q_table")?, parse_f64(v.trim(), line, "q_table")?));
            }
            if nodes.len() < 2 {
                return Err(ConfigError::at(line, "q_table needs at least two nodes"));
            }
            Ok(PotentialSpec::Table(nodes))
        }
        (None, None) => Ok(PotentialSpec::Zero),
    }
}

fn parse_problem(section: &Section, section_name: &str) -> Result<ProblemConfig, ConfigError> {
    let (n_str, n_line) = req(section, section_name, "n")?;
    let n = parse_usize(n_str, n_line, "n")?;
    if n == 0 || n > 8 {
        return Err(ConfigError::at(n_line, "n must be in 1..=8"));
    }
    let potential = parse_potential(section, section_name)?;
    let theta = |key: &str| -> Result<CMatrix, ConfigError> {
        match section.get(key) {
            None => Ok(CMatrix::zeros(n, n)),
            Some((value, line)) => parse_matrix(value, n).ok_or_else(|| {
                ConfigError::at(line, format!("'{key}' must be an {n}x{n} complex matrix (rows ';', entries ',')"))
            }),
        }
    };
    Ok(ProblemConfig { n, potential, theta_plus: theta("theta_plus")?, theta_minus: theta("theta_minus")? })
}

/// Parse and validate a configuration for the given scenario (the CLI
/// argument; a `[run] scenario` key, when present, must agree).
pub fn parse_config(text: &str, cli_scenario: Scenario) -> Result<RunConfig, ConfigError> {
    let sections = tokenize(text)?;

    let mut cfg = RunConfig {
        scenario: cli_scenario,
        problem: None,
        reference: None,
        lambda1: 0.0,
        lambda2: 0.0,
        delta: 0.5,
        initial_samples: 64,
        max_refine_depth: 20,
        grid_min: 0.5,
        grid_max: 12.0,
        grid_samples: 200,
        disc_mu: Complex64::new(1.0, 0.0),
        disc_mu_hat: Complex64::new(2.0, 0.0),
        disc_gamma: 0.0,
        disc_max_mode: 64,
        disc_lambda: Complex64::new(7.0, 0.0),
        disc_p: 2,
        disc_tail_tol: 0.1,
        disc_potential: PotentialSpec::Zero,
        maslov_grid_step: 0.1,
        pencil_builtin: "diag1-lambda2".into(),
        pencil_lambda0: Complex64::new(0.0, 0.0),
        pencil_radius: 0.5,
        pencil_samples: 64,
        theta: Theta2x2::i_identity(),
        output_dir: None,
    };

    let allowed: &[&str] = match cli_scenario {
        Scenario::Interval => &["run", "window", "theta", "contour", "grid", "output"],
        Scenario::Count => &["run", "window", "problem", "reference", "contour", "grid", "output"],
        Scenario::Schrod1d => &["run", "problem", "grid", "output"],
        Scenario::Disc => &["run", "disc", "output"],
        Scenario::Maslov => &["run", "problem", "window", "maslov", "output"],
        Scenario::Pencil => &["run", "pencil", "output"],
    };
    for (name, section) in &sections {
        if !allowed.contains(&name.as_str()) {
            return Err(ConfigError::at(
                section.line,
                format!("section [{name}] is not used by scenario '{}'", cli_scenario.name()),
            ));
        }
    }

    if let Some(run) = sections.get("run") {
        if let Some((value, line)) = run.get("scenario") {
            let parsed = Scenario::parse(value)
                .ok_or_else(|| ConfigError::at(line, format!("unknown scenario '{value}'")))?;
            if parsed != cli_scenario {
                return Err(ConfigError::at(
                    line,
                    format!("config scenario '{value}' disagrees with command-line scenario '{}'", cli_scenario.name()),
                ));
            }
        }
    }

    if let Some(window) = sections.get("window") {
        let (l1, l1_line) = req(window, "window", "lambda1")?;
        let (l2, l2_line) = req(window, "window", "lambda2")?;
        cfg.lambda1 = parse_f64(l1, l1_line, "lambda1")?;
        cfg.lambda2 = parse_f64(l2, l2_line, "lambda2")?;
        if cfg.lambda1 >= cfg.lambda2 {
            return Err(ConfigError::at(l2_line, "window needs lambda1 < lambda2"));
        }
        if let Some((d, line)) = window.get("delta") {
            cfg.delta = parse_f64(d, line, "delta")?;
            if cfg.delta <= 0.0 {
                return Err(ConfigError::at(line, "delta must be positive"));
            }
        }
    } else if matches!(cli_scenario, Scenario::Interval | Scenario::Count | Scenario::Maslov) {
        return Err(ConfigError::plain(format!(
            "scenario '{}' requires a [window] section",
            cli_scenario.name()
        )));
    }

    if let Some(contour) = sections.get("contour") {
        if let Some((v, line)) = contour.get("initial_samples") {
            cfg.initial_samples = parse_usize(v, line, "initial_samples")?;
            if cfg.initial_samples < 8 {
                return Err(ConfigError::at(line, "initial_samples must be at least 8"));
            }
        }
        if let Some((v, line)) = contour.get("max_refine_depth") {
            cfg.max_refine_depth = parse_usize(v, line, "max_refine_depth")?;
        }
    }

    if let Some(grid) = sections.get("grid") {
        if let Some((v, line)) = grid.get("lambda_min") {
            cfg.grid_min = parse_f64(v, line, "lambda_min")?;
        }
        if let Some((v, line)) = grid.get("lambda_max") {
            cfg.grid_max = parse_f64(v, line, "lambda_max")?;
        }
        if let Some((v, line)) = grid.get("samples") {
            cfg.grid_samples = parse_usize(v, line, "samples")?;
            if cfg.grid_samples < 2 {
                return Err(ConfigError::at(line, "samples must be at least 2"));
            }
        }
        if cfg.grid_min >= cfg.grid_max {
            return Err(ConfigError::at(grid.line, "grid needs lambda_min < lambda_max"));
        }
    }

    if let Some(problem) = sections.get("problem") {
        cfg.problem = Some(parse_problem(problem, "problem")?);
    } else if matches!(cli_scenario, Scenario::Schrod1d | Scenario::Maslov | Scenario::Count) {
        return Err(ConfigError::plain(format!(
            "scenario '{}' requires a [problem] section",
            cli_scenario.name()
        )));
    }

    if let Some(reference) = sections.get("reference") {
        cfg.reference = Some(parse_problem(reference, "reference")?);
    } else if cli_scenario == Scenario::Count {
        return Err(ConfigError::plain("scenario 'count' requires a [reference] section"));
    }
    if cli_scenario == Scenario::Count {
        let (p, r) = (cfg.problem.as_ref().unwrap(), cfg.reference.as_ref().unwrap());
        if p.n != r.n {
            return Err(ConfigError::plain("[problem] and [reference] must have equal n"));
        }
    }

    if let Some(disc) = sections.get("disc") {
        if let Some((v, line)) = disc.get("mu") {
            cfg.disc_mu = parse_complex_key(v, line, "mu")?;
        }
        if let Some((v, line)) = disc.get("mu_hat") {
            cfg.disc_mu_hat = parse_complex_key(v, line, "mu_hat")?;
        }
        if let Some((v, line)) = disc.get("gamma") {
            cfg.disc_gamma = parse_f64(v, line, "gamma")?;
        }
        if let Some((v, line)) = disc.get("max_mode") {
            cfg.disc_max_mode = parse_usize(v, line, "max_mode")?;
            if cfg.disc_max_mode < 8 {
                return Err(ConfigError::at(line, "max_mode must be at least 8"));
            }
        }
        if let Some((v, line)) = disc.get("lambda") {
            cfg.disc_lambda = parse_complex_key(v, line, "lambda")?;
        }
        if let Some((v, line)) = disc.get("p") {
            let p = parse_usize(v, line, "p")?;
            if !(1..=8).contains(&p) {
                return Err(ConfigError::at(line, "p must be in 1..=8"));
            }
            cfg.disc_p = p as u32;
        }
        if let Some((v, line)) = disc.get("tail_tol") {
            cfg.disc_tail_tol = parse_f64(v, line, "tail_tol")?;
            if cfg.disc_tail_tol <= 0.0 {
                return Err(ConfigError::at(line, "tail_tol must be positive"));
            }
        }
        cfg.disc_potential = parse_potential(disc, "disc")?;
    } else if cli_scenario == Scenario::Disc {
        return Err(ConfigError::plain("scenario 'disc' requires a [disc] section"));
    }

    if let Some(maslov) = sections.get("maslov") {
        if let Some((v, line)) = maslov.get("grid_step") {
            cfg.maslov_grid_step = parse_f64(v, line, "grid_step")?;
            if cfg.maslov_grid_step <= 0.0 {
                return Err(ConfigError::at(line, "grid_step must be positive"));
            }
        }
    }

    if let Some(pencil) = sections.get("pencil") {
        if let Some((v, _)) = pencil.get("builtin") {
            cfg.pencil_builtin = v.to_string();
        }
        if let Some((v, line)) = pencil.get("lambda0") {
            cfg.pencil_lambda0 = parse_complex_key(v, line, "lambda0")?;
        }
        if let Some((v, line)) = pencil.get("radius") {
            cfg.pencil_radius = parse_f64(v, line, "radius")?;
            if cfg.pencil_radius <= 0.0 {
                return Err(ConfigError::at(line, "radius must be positive"));
            }
        }
        if let Some((v, line)) = pencil.get("samples") {
            cfg.pencil_samples = parse_usize(v, line, "samples")?;
            if cfg.pencil_samples < 8 {
                return Err(ConfigError::at(line, "samples must be at least 8"));
            }
        }
        if !matches!(cfg.pencil_builtin.as_str(), "diag1-lambda2" | "jordan-lambda") {
            return Err(ConfigError::at(
                pencil.line,
                format!("unknown builtin pencil '{}' (expected diag1-lambda2 or jordan-lambda)", cfg.pencil_builtin),
            ));
        }
    } else if cli_scenario == Scenario::Pencil {
        return Err(ConfigError::plain("scenario 'pencil' requires a [pencil] section"));
    }

    if let Some(theta) = sections.get("theta") {
        let entry = |key: &str| -> Result<Complex64, ConfigError> {
            match theta.get(key) {
                Some((v, line)) => parse_complex_key(v, line, key),
                None => Ok(Complex64::new(0.0, 0.0)),
            }
        };
        let t = Theta2x2::new(entry("t11")?, entry("t12")?, entry("t21")?, entry("t22")?)
            .map_err(|e| ConfigError::at(theta.line, e.to_string()))?;
        cfg.theta = t;
    }

    if let Some(output) = sections.get("output") {
        if let Some((v, _)) = output.get("dir") {
            cfg.output_dir = Some(v.to_string());
        }
    }

    for (name, section) in &sections {
        if let Some((key, line)) = section.unknown_keys() {
            return Err(ConfigError::at(line, format!("unknown key '{key}' in [{name}]")));
        }
    }

    Ok(cfg)
}

/// FNV-1a hash of the raw config text, printed in the CSV header so runs
/// can be traced back to their inputs.
pub fn config_hash(text: &str) -> u64 {
    let mut h: u64 = 0xcbf29ce484222325;
    for b in text.as_bytes() {
        h ^= *b as u64;
        h = h.wrapping_mul(0x100000001b3);
    }
    h
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn complex_forms() {
        assert_eq!(parse_complex("1"), Some(Complex64::new(1.0, 0.0)));
        assert_eq!(parse_complex("-2.5"), Some(Complex64::new(-2.5, 0.0)));
        assert_eq!(parse_complex("1+2i"), Some(Complex64::new(1.0, 2.0)));
        assert_eq!(parse_complex("1-2i"), Some(Complex64::new(1.0, -2.0)));
        assert_eq!(parse_complex("-1.5+0.5i"), Some(Complex64::new(-1.5, 0.5)));
        assert_eq!(parse_complex("2i"), Some(Complex64::new(0.0, 2.0)));
        assert_eq!(parse_complex("1e-3+2e-4i"), Some(Complex64::new(1e-3, 2e-4)));
        assert_eq!(parse_complex("abc"), None);
    }

    #[test]
    fn minimal_interval_roundtrip() {
        let text = "[window]\nlambda1 = 5\nlambda2 = 45\ndelta = 0.5\n";
        let cfg = parse_config(text, Scenario::Interval).unwrap();
        assert_eq!(cfg.lambda1, 5.0);
        assert_eq!(cfg.lambda2, 45.0);
        assert_eq!(cfg.delta, 0.5);
    }

    #[test]
    fn disc_complex_value() {
        let text = "[disc]\nmu = 1+0i\n";
        let cfg = parse_config(text, Scenario::Disc).unwrap();
        assert_eq!(cfg.disc_mu, Complex64::new(1.0, 0.0));
    }

    #[test]
    fn p_zero_is_range_error() {
        let text = "[disc]\np = 0\n";
        let err = parse_config(text, Scenario::Disc).unwrap_err();
        assert!(err.message.contains("p must be in 1..=8"), "{err}");
    }

    #[test]
    fn unknown_key_rejected_with_line() {
        let text = "[window]\nlambda1 = 1\nlambda2 = 2\nwat = 3\n";
        let err = parse_config(text, Scenario::Interval).unwrap_err();
        assert_eq!(err.line, Some(4));
        assert!(err.message.contains("unknown key 'wat'"));
    }

    #[test]
    fn missing_required_key() {
        let text = "[window]\nlambda1 = 1\n";
        let err = parse_config(text, Scenario::Interval).unwrap_err();
        assert!(err.message.contains("lambda2"), "{err}");
    }

    #[test]
    fn scenario_mismatch_rejected() {
        let text = "[run]\nscenario = disc\n[window]\nlambda1 = 1\nlambda2 = 2\n";
        let err = parse_config(text, Scenario::Interval).unwrap_err();
        assert!(err.message.contains("disagrees"), "{err}");
    }

    #[test]
    fn output_dir_key_is_parsed() {
        let text = "[window]\nlambda1 = 1\nlambda2 = 2\n\n[output]\ndir = results/run1\n";
        let cfg = parse_config(text, Scenario::Interval).unwrap();
        assert_eq!(cfg.output_dir.as_deref(), Some("results/run1"));
    }

    #[test]
    fn spline_interpolates_nodes() {
        let spline = CubicSpline::natural(&[(0.0, 1.0), (0.5, 2.0), (1.0, 0.5)]);
        assert!((spline.eval(0.0) - 1.0).abs() < 1e-12);
        assert!((spline.eval(0.5) - 2.0).abs() < 1e-12);
        assert!((spline.eval(1.0) - 0.5).abs() < 1e-12);
        // smooth in between, clamped outside
        assert!(spline.eval(0.25) > 1.0);
        assert_eq!(spline.eval(2.0), 0.5);
    }
}
