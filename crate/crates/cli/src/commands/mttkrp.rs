use std::sync::Arc;
use std::time::Instant;

use tenkit::balance::SplitConfig;
use tenkit::cpd::random_factors;
use tenkit::kernels::{max_relative_row_deviation, mttkrp_coo, FactorMatrix, OpCount};
use tenkit::{Exec, Format, ModeRep};

use crate::report::{gflops, iterations_to_amortize, median, BaselineTiming, BenchRecord, GFLOPS_BASIS};
use crate::{load_tensor, tensor_id, CmdResult, Failure, MttkrpArgs};

/// Deviation above which `--check` fails.
const CHECK_TOL: f64 = 1e-8;

struct Timed {
    rep: ModeRep,
    preprocessing_seconds: f64,
    wall_seconds: f64,
    output: FactorMatrix,
    ops: OpCount,
}

fn time_format(
    t: &Arc<tenkit::CooTensor>,
    format: Format,
    factors: &[FactorMatrix],
    args: &MttkrpArgs,
    cfg: &SplitConfig,
    exec: Exec,
) -> Result<Timed, Failure> {
    let start = Instant::now();
    let rep = ModeRep::build(t, args.mode, format, cfg)?;
    let preprocessing_seconds = start.elapsed().as_secs_f64();

    let (mut output, mut ops) = rep.mttkrp(factors, args.mode, exec)?;
    let mut samples = Vec::with_capacity(args.reps);
    for _ in 0..args.reps {
        let start = Instant::now();
        let (out, o) = rep.mttkrp(factors, args.mode, exec)?;
        samples.push(start.elapsed().as_secs_f64());
        output = out;
        ops = o;
    }
    Ok(Timed {
        rep,
        preprocessing_seconds,
        wall_seconds: median(&mut samples),
        output,
        ops,
    })
}

pub fn run(args: &MttkrpArgs, json: bool) -> CmdResult {
    if args.rank == 0 {
        return Err(Failure::usage("--rank must be at least 1"));
    }
    if args.reps == 0 {
        return Err(Failure::usage("--reps must be at least 1"));
    }
    let exec = args.exec.setup()?;
    let t = Arc::new(load_tensor(&args.path)?.canonicalize());
    if args.mode >= t.order() {
        return Err(Failure::usage(format!(
            "--mode {} out of range for an order-{} tensor",
            args.mode,
            t.order()
        )));
    }
    let cfg = SplitConfig {
        fiber_threshold: args.fiber_threshold,
        block_size: args.block_size,
        ..SplitConfig::default()
    };
    let factors = random_factors(t.dims(), args.rank, args.exec.seed);
    let format = args.format.0;
    let main = time_format(&t, format, &factors, args, &cfg, exec)?;

    let baseline = match args.baseline {
        Some(b) => {
            let timed = time_format(&t, b.0, &factors, args, &cfg, exec)?;
            Some(BaselineTiming {
                format: b.0,
                wall_seconds: timed.wall_seconds,
                preprocessing_seconds: timed.preprocessing_seconds,
            })
        }
        None => None,
    };

    let csf_closed_form_ops = match &main.rep {
        ModeRep::Csf(c) | ModeRep::Bcsf { csf: c, .. } => {
            Some(2 * (c.slice_count() + c.nnz()) as u64 * args.rank as u64)
        }
        _ => None,
    };

    let check_deviation = if args.check {
        let (reference, _) = mttkrp_coo(&t, &factors, args.mode, Exec::Sequential)?;
        Some(max_relative_row_deviation(&main.output, &reference))
    } else {
        None
    };

    let record = BenchRecord {
        tensor: tensor_id(&args.path),
        format,
        mode: args.mode,
        rank: args.rank,
        nnz: t.nnz(),
        exec,
        threads: if exec.is_parallel() { tenkit::num_threads() } else { 1 },
        wall_seconds: main.wall_seconds,
        op_count: main.ops.total(),
        muls: main.ops.muls,
        adds: main.ops.adds,
        gflops: gflops(main.ops.total(), main.wall_seconds),
        gflops_basis: GFLOPS_BASIS.to_string(),
        preprocessing_seconds: main.preprocessing_seconds,
        iterations_to_amortize: baseline.as_ref().and_then(|b| {
            iterations_to_amortize(
                main.preprocessing_seconds,
                main.wall_seconds,
                b.preprocessing_seconds,
                b.wall_seconds,
            )
        }),
        baseline,
        csf_closed_form_ops,
        index_words: main.rep.storage().index_words,
        checksum: main.output.checksum(),
        check_deviation,
    };

    if json {
        super::print_json(&record)?;
    } else {
        print_text(&record);
    }
    match record.check_deviation {
        Some(dev) if dev.is_nan() || dev > CHECK_TOL => Err(Failure::Check(format!(
            "{} deviates from the COO kernel by {dev:e} (limit {CHECK_TOL:e})",
            record.format
        ))),
        _ => Ok(()),
    }
}

fn print_text(r: &BenchRecord) {
    println!("tensor                 {}", r.tensor);
    println!("format                 {}", r.format);
    println!("mode                   {}", r.mode);
    println!("rank                   {}", r.rank);
    println!("nnz                    {}", r.nnz);
    println!("exec                   {} ({} threads)", r.exec, r.threads);
    println!("preprocessing_seconds  {:.6}", r.preprocessing_seconds);
    println!("wall_seconds           {:.6}", r.wall_seconds);
    println!("op_count               {} ({} mul, {} add)", r.op_count, r.muls, r.adds);
    if let Some(c) = r.csf_closed_form_ops {
        println!("2(S+M)R                {c}");
    }
    println!("gflops                 {:.4}", r.gflops);
    println!("index_words            {}", r.index_words);
    println!("checksum               {:.12e}", r.checksum);
    if let Some(b) = &r.baseline {
        println!(
            "baseline               {} wall {:.6} s, preprocessing {:.6} s",
            b.format, b.wall_seconds, b.preprocessing_seconds
        );
        match r.iterations_to_amortize {
            Some(n) => println!("iterations_to_amortize {n}"),
            None => println!("iterations_to_amortize never"),
        }
    }
    if let Some(d) = r.check_deviation {
        println!("check_deviation        {d:e}");
    }
}
