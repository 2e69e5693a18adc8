use std::fs::File;
use std::io::{BufWriter, Write};

use serde::{Deserialize, Serialize};
use tenkit::gen::{generate, GenConfig};
use tenkit::write_frostt;

use crate::{CmdResult, Failure, GenArgs};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenSummary {
    pub shape: Vec<usize>,
    pub nnz: usize,
    pub skew: f64,
    pub seed: u64,
    pub max_slice_nnz: usize,
}

pub fn parse_shape(s: &str) -> Result<Vec<usize>, Failure> {
    s.split(['x', 'X', ','])
        .map(|d| {
            d.trim()
                .parse::<usize>()
                .map_err(|_| Failure::usage(format!("bad dimension `{d}` in shape `{s}`")))
        })
        .collect()
}

pub fn run(args: &GenArgs, json: bool) -> CmdResult {
    if json && args.out.is_none() {
        return Err(Failure::usage("--json needs --out, since the tensor itself goes to standard output"));
    }
    let cfg = GenConfig {
        shape: parse_shape(&args.shape)?,
        nnz: args.nnz,
        skew: args.skew,
        seed: args.seed,
    };
    let t = generate(&cfg)?;
    match &args.out {
        None => {
            let mut w = BufWriter::new(std::io::stdout().lock());
            write_frostt(&mut w, &t)?;
            w.flush()?;
            Ok(())
        }
        Some(path) => {
            let mut w = BufWriter::new(File::create(path)?);
            write_frostt(&mut w, &t)?;
            w.flush()?;
            let mut per_slice = vec![0usize; cfg.shape[0]];
            for (idx, _) in t.entries() {
                per_slice[idx[0] as usize] += 1;
            }
            let summary = GenSummary {
                max_slice_nnz: per_slice.into_iter().max().unwrap_or(0),
                shape: cfg.shape,
                nnz: t.nnz(),
                skew: cfg.skew,
                seed: cfg.seed,
            };
            if json {
                super::print_json(&summary)
            } else {
                println!(
                    "wrote {} nonzeros of shape {:?} to {} (largest slice {})",
                    summary.nnz,
                    summary.shape,
                    path.display(),
                    summary.max_slice_nnz
                );
                Ok(())
            }
        }
    }
}
