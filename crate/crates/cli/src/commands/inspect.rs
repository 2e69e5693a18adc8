use serde::{Deserialize, Serialize};
use tenkit::balance::{imbalance_metrics, MetricsRow};
use tenkit::formats::{CsfTensor, HbCsfTensor, IndexStorage, StorageReport};
use tenkit::stats::{compute_stats, TensorStats};
use tenkit::ModeOrder;

use crate::{load_tensor, tensor_id, CmdResult, InspectArgs};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Census {
    pub coo: usize,
    pub csl: usize,
    pub csf: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModeSection {
    pub mode_order: Vec<usize>,
    pub stats: TensorStats,
    pub storage: Vec<StorageReport>,
    pub census: Census,
    pub imbalance: MetricsRow,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InspectReport {
    pub tensor: String,
    pub order: usize,
    pub dims: Vec<usize>,
    pub nnz: usize,
    pub density: f64,
    pub sections: Vec<ModeSection>,
}

pub fn run(args: &InspectArgs, json: bool) -> CmdResult {
    let t = load_tensor(&args.path)?.canonicalize();
    let id = tensor_id(&args.path);
    let orders = match &args.mode_order {
        Some(o) => vec![ModeOrder::new(o.clone())?],
        None => (0..t.order())
            .map(|m| ModeOrder::for_mode(t.dims(), m))
            .collect::<tenkit::Result<Vec<_>>>()?,
    };
    let mut sections = Vec::with_capacity(orders.len());
    for order in orders {
        let stats = compute_stats(&t, &order)?;
        let csf = CsfTensor::build(&t, &order)?;
        let hb = HbCsfTensor::build(&t, &order)?;
        let (coo, csl, csf_slices) = hb.census();
        sections.push(ModeSection {
            mode_order: order.as_slice().to_vec(),
            stats,
            storage: vec![t.storage_words(), csf.storage_words(), hb.storage_words()],
            census: Census {
                coo,
                csl,
                csf: csf_slices,
            },
            imbalance: imbalance_metrics(&csf).row(&id, order.slice_mode()),
        });
    }
    let report = InspectReport {
        tensor: id,
        order: t.order(),
        dims: t.dims().to_vec(),
        nnz: t.nnz(),
        density: t.nnz() as f64 / t.dims().iter().map(|&d| d as f64).product::<f64>(),
        sections,
    };
    if json {
        return super::print_json(&report);
    }
    println!("tensor   {}", report.tensor);
    println!("order    {}", report.order);
    println!("dims     {:?}", report.dims);
    println!("nnz      {}", report.nnz);
    println!("density  {:.3e}", report.density);
    for s in &report.sections {
        let st = &s.stats;
        println!();
        println!("mode order {}", st.mode_order);
        println!("  S={} F={} M={}", st.slice_count, st.fiber_count, st.nnz);
        println!(
            "  nnz/slice mean {:.3} stddev {:.3} max {}",
            st.mean_nnz_per_slice, st.stddev_nnz_per_slice, st.max_nnz_per_slice
        );
        println!(
            "  nnz/fiber mean {:.3} stddev {:.3} max {}",
            st.mean_nnz_per_fiber, st.stddev_nnz_per_fiber, st.max_nnz_per_fiber
        );
        for r in &s.storage {
            println!("  {:<7} {:>12} words {:>14} bytes", r.format.to_string(), r.index_words, r.bytes);
        }
        println!(
            "  slices: {} coo, {} csl, {} csf",
            s.census.coo, s.census.csl, s.census.csf
        );
    }
    Ok(())
}
