use std::fs::File;
use std::io::{BufWriter, Write};

use serde::{Deserialize, Serialize};
use tenkit::{write_frostt, ModeOrder};

use crate::{load_tensor, CmdResult, ConvertArgs, Failure};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvertSummary {
    pub input_entries: usize,
    pub output_nnz: usize,
    pub dims: Vec<usize>,
    pub mode_order: Vec<usize>,
}

pub fn run(args: &ConvertArgs, json: bool) -> CmdResult {
    if json && args.out.is_none() {
        return Err(Failure::usage("--json needs --out, since the tensor itself goes to standard output"));
    }
    let raw = load_tensor(&args.input)?;
    let order = match &args.mode_order {
        Some(o) => ModeOrder::new(o.clone())?,
        None => ModeOrder::identity(raw.order()),
    };
    let t = raw.canonicalize().sort_by_mode_order(&order)?;
    match &args.out {
        Some(path) => {
            let mut w = BufWriter::new(File::create(path)?);
            write_frostt(&mut w, &t)?;
            w.flush()?;
        }
        None => {
            let mut w = BufWriter::new(std::io::stdout().lock());
            write_frostt(&mut w, &t)?;
            w.flush()?;
            return Ok(());
        }
    }
    let summary = ConvertSummary {
        input_entries: raw.nnz(),
        output_nnz: t.nnz(),
        dims: t.dims().to_vec(),
        mode_order: order.as_slice().to_vec(),
    };
    if json {
        super::print_json(&summary)
    } else {
        println!(
            "{} entries in, {} nonzeros out, dims {:?}, sorted by {}",
            summary.input_entries, summary.output_nnz, summary.dims, order
        );
        Ok(())
    }
}
