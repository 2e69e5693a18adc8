//! Population statistics of nonzeros per slice and per fiber.

use serde::{Deserialize, Serialize};

use crate::coo::{CooTensor, ModeOrder};
use crate::error::Result;

/// Count / mean / population standard deviation / max of a set of group sizes.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Spread {
    pub groups: usize,
    pub mean: f64,
    pub stddev: f64,
    pub max: usize,
}

impl Spread {
    pub fn of<I: IntoIterator<Item = usize>>(sizes: I) -> Spread {
        // Welford
        let mut n = 0usize;
        let mut mean = 0.0;
        let mut m2 = 0.0;
        let mut max = 0usize;
        for s in sizes {
            n += 1;
            max = max.max(s);
            let x = s as f64;
            let delta = x - mean;
            mean += delta / n as f64;
            m2 += delta * (x - mean);
        }
        if n == 0 {
            return Spread::default();
        }
        Spread {
            groups: n,
            mean,
            stddev: (m2 / n as f64).max(0.0).sqrt(),
            max,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TensorStats {
    pub order: usize,
    pub dims: Vec<usize>,
    pub nnz: usize,
    pub mode_order: ModeOrder,
    pub slice_count: usize,
    pub fiber_count: usize,
    pub mean_nnz_per_slice: f64,
    pub stddev_nnz_per_slice: f64,
    pub max_nnz_per_slice: usize,
    pub mean_nnz_per_fiber: f64,
    pub stddev_nnz_per_fiber: f64,
    pub max_nnz_per_fiber: usize,
    pub density: f64,
}

/// Group sizes of consecutive runs sharing the first `depth` permuted indices
/// of a tensor sorted under `order`.
pub(crate) fn run_lengths(sorted: &CooTensor, order: &[usize], depth: usize) -> Vec<usize> {
    let mut runs = Vec::new();
    let same = |a: &[u32], b: &[u32]| order[..depth].iter().all(|&m| a[m] == b[m]);
    let mut len = 0usize;
    for e in 0..sorted.nnz() {
        if e > 0 && !same(sorted.index(e - 1), sorted.index(e)) {
            runs.push(len);
            len = 0;
        }
        len += 1;
    }
    if len > 0 {
        runs.push(len);
    }
    runs
}

/// Slice and fiber statistics under a mode order. Slices share
/// `mode_order[0]`; fibers share the first `N-1` permuted indices.
pub fn compute_stats(t: &CooTensor, mode_order: &ModeOrder) -> Result<TensorStats> {
    let sorted = t.sort_by_mode_order(mode_order)?;
    let order = mode_order.as_slice();
    let n = t.order();
    let slices = Spread::of(run_lengths(&sorted, order, 1));
    let fibers = Spread::of(run_lengths(&sorted, order, n - 1));
    let cells: f64 = t.dims().iter().map(|&d| d as f64).product();
    Ok(TensorStats {
        order: n,
        dims: t.dims().to_vec(),
        nnz: t.nnz(),
        mode_order: mode_order.clone(),
        slice_count: slices.groups,
        fiber_count: fibers.groups,
        mean_nnz_per_slice: slices.mean,
        stddev_nnz_per_slice: slices.stddev,
        max_nnz_per_slice: slices.max,
        mean_nnz_per_fiber: fibers.mean,
        stddev_nnz_per_fiber: fibers.stddev,
        max_nnz_per_fiber: fibers.max,
        density: t.nnz() as f64 / cells,
    })
}
