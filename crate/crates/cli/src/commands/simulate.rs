use serde::{Deserialize, Serialize};
use tenkit::balance::SplitConfig;
use tenkit::sim::{sweep_split, MachineModel, SweepRow};
use tenkit::{CsfTensor, ModeOrder};

use crate::{load_tensor, tensor_id, CmdResult, Failure, SimulateArgs};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulateReport {
    pub tensor: String,
    pub mode: usize,
    pub machine: MachineModel,
    pub rows: Vec<SweepRow>,
}

/// Parses `inf,1024,128`; `inf` (or `none`) means no splitting.
pub fn parse_thresholds(s: &str) -> Result<Vec<Option<usize>>, Failure> {
    s.split(',')
        .map(str::trim)
        .filter(|x| !x.is_empty())
        .map(|x| match x.to_ascii_lowercase().as_str() {
            "inf" | "none" | "∞" => Ok(None),
            v => match v.parse::<usize>() {
                Ok(0) | Err(_) => Err(Failure::usage(format!("bad threshold `{x}`"))),
                Ok(n) => Ok(Some(n)),
            },
        })
        .collect()
}

pub fn run(args: &SimulateArgs, json: bool) -> CmdResult {
    let thresholds = parse_thresholds(&args.thresholds)?;
    if args.warp_size == 0 || !args.block_size.is_multiple_of(args.warp_size) {
        return Err(Failure::usage(format!(
            "--warp-size {} must divide --block-size {}",
            args.warp_size, args.block_size
        )));
    }
    let machine = MachineModel {
        num_sms: args.sms,
        warps_per_block: args.block_size / args.warp_size,
        warp_size: args.warp_size,
        blocks_per_sm: args.blocks_per_sm,
    };
    let t = load_tensor(&args.path)?.canonicalize();
    if args.mode >= t.order() {
        return Err(Failure::usage(format!("--mode {} out of range", args.mode)));
    }
    let csf = CsfTensor::build(&t, &ModeOrder::for_mode(t.dims(), args.mode)?)?;
    let cfg = SplitConfig {
        block_size: args.block_size,
        warp_size: args.warp_size,
        ..SplitConfig::default()
    };
    let rows = sweep_split(&csf, &thresholds, &machine, &cfg)?;
    if json {
        return super::print_json(&SimulateReport {
            tensor: tensor_id(&args.path),
            mode: args.mode,
            machine,
            rows,
        });
    }
    println!("{}", SweepRow::CSV_HEADER);
    for r in &rows {
        println!("{}", r.to_csv());
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn threshold_lists() {
        assert_eq!(parse_thresholds("inf,1024, 32").unwrap(), vec![None, Some(1024), Some(32)]);
        assert!(parse_thresholds("0").is_err());
        assert!(parse_thresholds("abc").is_err());
    }
}
