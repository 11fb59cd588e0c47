mod config;

use std::fs;
use std::io::Write;
use std::process::ExitCode;

use clap::Parser;
use multirate_core::analysis::to_csv;
use multirate_core::experiments::{mandel_slab_check, sweep, Experiment};

use config::{slab_check_cells, parse_file, Args, RunConfig};

/// Relative bound on the entrywise difference in the hand-derived slab self-test.
const SLAB_CHECK_TOL: f64 = 1e-12;
const SLAB_CHECK_STEP: f64 = 4000.0;

fn usage_error(msg: &str) -> ExitCode {
    eprintln!("error: {msg}");
    eprintln!("run `multirate --help` for usage");
    ExitCode::from(2)
}

fn run(cfg: &RunConfig) -> Result<String, multirate_core::Error> {
    if cfg.spec.experiment == Experiment::MandelSlabCheck {
        let (diff, scale) = mandel_slab_check(slab_check_cells(&cfg.spec), SLAB_CHECK_STEP)?;
        let verdict = if diff <= SLAB_CHECK_TOL * scale { "PASS" } else { "FAIL" };
        return Ok(format!("{verdict} max_abs_diff={diff:.6e} relative={:.6e}\n", diff / scale));
    }
    let rows: Vec<_> = sweep(&cfg.spec, cfg.refinements)?.into_iter().map(|o| o.row).collect();
    Ok(to_csv(&rows))
}

fn main() -> ExitCode {
    let args = Args::parse();
    let file = match &args.config {
        Some(path) => match fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display())).and_then(|t| parse_file(&t)) {
            Ok(f) => f,
            Err(e) => return usage_error(&e),
        },
        None => Default::default(),
    };
    let cfg = match args.resolve(&file) {
        Ok(c) => c,
        Err(e) => return usage_error(&e),
    };
    let out = match run(&cfg) {
        Ok(o) => o,
        Err(e) => {
            match e.slab_index() {
                Some(s) => eprintln!("solver failure on slab {s}: {e}"),
                None => eprintln!("solver failure: {e}"),
            }
            return ExitCode::FAILURE;
        }
    };
    let written = match &cfg.output {
        Some(path) => fs::write(path, &out).map_err(|e| format!("{}: {e}", path.display())),
        None => std::io::stdout().write_all(out.as_bytes()).map_err(|e| e.to_string()),
    };
    if let Err(e) = written {
        eprintln!("error: {e}");
        return ExitCode::FAILURE;
    }
    if out.starts_with("FAIL") {
        return ExitCode::FAILURE;
    }
    ExitCode::SUCCESS
}
