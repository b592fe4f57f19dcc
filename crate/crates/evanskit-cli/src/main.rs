use evanskit_cli::config::{self, Scenario};
use evanskit_cli::run;
use std::path::PathBuf;
use std::process::ExitCode;

const USAGE: &str = "usage: evanskit <scenario> --config <path> --out <dir> [--seed <u64>] [--threads <n>]
scenarios: interval, schrod1d, disc, maslov, pencil, count
environment: EVANSKIT_THREADS as fallback for --threads";

fn fail(msg: &str) -> ExitCode {
    eprintln!("evanskit: {msg}");
    ExitCode::from(1)
}

fn main() -> ExitCode {
    let args: Vec<String> = std::env::args().skip(1).collect();
    if args.is_empty() || args[0] == "--help" || args[0] == "-h" {
        println!("{USAGE}");
        return ExitCode::SUCCESS;
    }

    let scenario = match Scenario::parse(&args[0]) {
        Some(s) => s,
        None => return fail(&format!("unknown scenario '{}'\n{USAGE}", args[0])),
    };

    let mut config_path: Option<PathBuf> = None;
    let mut out_dir: Option<PathBuf> = None;
    let mut threads: Option<usize> = None;
    let mut i = 1;
    while i < args.len() {
        match args[i].as_str() {
            "--config" => {
                i += 1;
                config_path = args.get(i).map(PathBuf::from);
                if config_path.is_none() {
                    return fail("--config needs a path");
                }
            }
            "--out" => {
                i += 1;
                out_dir = args.get(i).map(PathBuf::from);
                if out_dir.is_none() {
                    return fail("--out needs a directory");
                }
            }
            "--seed" => {
                i += 1;
                // accepted for interface stability; all scenarios are
                // deterministic and ignore it
                let Some(v) = args.get(i) else { return fail("--seed needs a value") };
                if v.parse::<u64>().is_err() {
                    return fail(&format!("--seed must be a u64, got '{v}'"));
                }
            }
            "--threads" => {
                i += 1;
                let Some(v) = args.get(i) else { return fail("--threads needs a value") };
                match v.parse::<usize>() {
                    Ok(n) if n >= 1 => threads = Some(n),
                    _ => return fail(&format!("--threads must be a positive integer, got '{v}'")),
                }
            }
            other => return fail(&format!("unknown argument '{other}'\n{USAGE}")),
        }
        i += 1;
    }

    let Some(config_path) = config_path else { return fail("missing --config") };
    let text = match std::fs::read_to_string(&config_path) {
        Ok(t) => t,
        Err(e) => return fail(&format!("cannot read {}: {e}", config_path.display())),
    };

    let cfg = match config::parse_config(&text, scenario) {
        Ok(c) => c,
        Err(e) => return fail(&e.to_string()),
    };

    let out_dir = match out_dir.or_else(|| cfg.output_dir.clone().map(PathBuf::from)) {
        Some(d) => d,
        None => return fail("missing --out (or [output] dir in the config)"),
    };

    let threads = threads
        .or_else(|| std::env::var("EVANSKIT_THREADS").ok().and_then(|v| v.parse().ok()))
        .unwrap_or(1)
        .max(1);

    let hash = config::config_hash(&text);
    let outcome = match run::execute(&cfg, hash, threads) {
        Ok(o) => o,
        Err(e) => {
            eprintln!("evanskit: {e}");
            return ExitCode::from(run::exit_code_for(&e) as u8);
        }
    };

    if let Err(e) = std::fs::create_dir_all(&out_dir) {
        return fail(&format!("cannot create {}: {e}", out_dir.display()));
    }
    if let Err(e) = std::fs::write(out_dir.join("result.csv"), &outcome.csv) {
        return fail(&format!("cannot write result.csv: {e}"));
    }
    if let Err(e) = std::fs::write(out_dir.join("summary.txt"), &outcome.summary) {
        return fail(&format!("cannot write summary.txt: {e}"));
    }
    println!("{}", outcome.headline);
    ExitCode::SUCCESS
}
