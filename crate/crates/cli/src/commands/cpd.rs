use std::fs::File;
use std::io::{BufWriter, Write};

use serde::{Deserialize, Serialize};
use tenkit::balance::SplitConfig;
use tenkit::cpd::{cp_als, CpdConfig, IterRecord};
use tenkit::{Format, ModeReps};

use crate::{load_tensor, tensor_id, CmdResult, CpdArgs, Failure};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CpdReport {
    pub tensor: String,
    pub format: Format,
    pub rank: usize,
    pub iterations: usize,
    pub converged: bool,
    pub final_fit: f64,
    pub lambda: Vec<f64>,
    pub warnings: Vec<String>,
    pub history: Vec<IterRecord>,
}

pub fn run(args: &CpdArgs, json: bool) -> CmdResult {
    if args.tol.is_nan() || args.tol < 0.0 {
        return Err(Failure::usage("--tol must be nonnegative"));
    }
    let exec = args.exec.setup()?;
    let t = load_tensor(&args.path)?;
    let cfg = SplitConfig {
        fiber_threshold: args.fiber_threshold,
        ..SplitConfig::default()
    };
    let reps = ModeReps::build(&t, args.format.0, &cfg)?;
    let out = cp_als(
        &reps,
        &CpdConfig {
            rank: args.rank,
            max_iters: args.iters,
            fit_tol: args.tol,
            seed: args.exec.seed,
            exec,
        },
    )?;
    for w in &out.warnings {
        eprintln!("warning: {w}");
    }

    let mut csv = Vec::new();
    writeln!(csv, "{}", IterRecord::csv_header(reps.order()))?;
    for r in &out.history {
        writeln!(csv, "{}", r.to_csv())?;
    }
    let report = CpdReport {
        tensor: tensor_id(&args.path),
        format: reps.format(),
        rank: args.rank,
        iterations: out.history.len() - 1,
        converged: out.converged,
        final_fit: out.final_fit(),
        lambda: out.model.lambda.clone(),
        warnings: out.warnings.clone(),
        history: out.history,
    };

    if let Some(path) = &args.out {
        let mut w = BufWriter::new(File::create(path)?);
        w.write_all(&csv)?;
        w.flush()?;
    } else if !json {
        std::io::stdout().lock().write_all(&csv)?;
    }
    if json {
        return super::print_json(&report);
    }
    eprintln!(
        "final fit {:.8} after {} iterations ({})",
        report.final_fit,
        report.iterations,
        if report.converged { "converged" } else { "iteration limit" }
    );
    let lambda: Vec<String> = report.lambda.iter().map(|l| format!("{l:.6e}")).collect();
    eprintln!("lambda {}", lambda.join(" "));
    Ok(())
}
