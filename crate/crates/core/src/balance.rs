//! Load balancing for CSF trees: heavy fibers are cut into bounded
//! segments, and heavy slices are spread over several thread blocks.

use std::ops::Range;

use serde::{Deserialize, Serialize};

use crate::error::{Result, TensorError};
use crate::formats::{CsfTensor, HbCsfTensor};
use crate::stats::Spread;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SplitConfig {
    /// Maximum nonzeros per fiber segment.
    pub fiber_threshold: usize,
    /// Threads per block; also the nonzero capacity used to bin slices.
    pub block_size: usize,
    pub warp_size: usize,
}

impl Default for SplitConfig {
    fn default() -> Self {
        SplitConfig {
            fiber_threshold: 128,
            block_size: 512,
            warp_size: 32,
        }
    }
}

impl SplitConfig {
    pub fn validate(&self) -> Result<()> {
        if self.fiber_threshold == 0 {
            return Err(TensorError::arg("fiber threshold must be positive"));
        }
        if self.warp_size == 0 || self.block_size == 0 || !self.block_size.is_multiple_of(self.warp_size) {
            return Err(TensorError::arg(format!(
                "warp size {} must divide block size {}",
                self.warp_size, self.block_size
            )));
        }
        Ok(())
    }
}

/// Cut every fiber with more than `threshold` nonzeros into
/// `ceil(n / threshold)` consecutive segments of `threshold` nonzeros (the
/// last one shorter). Segments keep the fiber's index.
pub fn split_fibers(t: &CsfTensor, threshold: usize) -> Result<CsfTensor> {
    if threshold == 0 {
        return Err(TensorError::arg("fiber threshold must be positive"));
    }
    let n = t.order();
    let f = n - 2;
    let fibers = t.fiber_count();
    if (0..fibers).all(|p| t.fiber_nnz(p) <= threshold) {
        return Ok(t.clone());
    }

    let mut seg_offset = Vec::with_capacity(fibers + 1);
    let mut fiber_idx = Vec::new();
    let mut fiber_ptr = Vec::new();
    seg_offset.push(0);
    for p in 0..fibers {
        let kids = t.children(f, p);
        let mut start = kids.start;
        while start < kids.end {
            fiber_idx.push(t.idx(f)[p]);
            fiber_ptr.push(start);
            start = (start + threshold).min(kids.end);
        }
        seg_offset.push(fiber_idx.len());
    }
    fiber_ptr.push(t.nnz());

    let mut ptr: Vec<Vec<usize>> = (0..n - 1).map(|d| t.ptr(d).to_vec()).collect();
    let mut idx: Vec<Vec<u32>> = (0..n - 1).map(|d| t.idx(d).to_vec()).collect();
    ptr[f - 1] = t.ptr(f - 1).iter().map(|&o| seg_offset[o]).collect();
    ptr[f] = fiber_ptr;
    idx[f] = fiber_idx;
    Ok(CsfTensor::from_raw_parts(
        t.dims().to_vec(),
        t.mode_order().clone(),
        ptr,
        idx,
        t.leaf_idx().to_vec(),
        t.values().to_vec(),
        true,
    ))
}

/// Build a CSF tree with fibers split as it is constructed.
pub fn build_bcsf(
    t: &crate::coo::CooTensor,
    mode_order: &crate::coo::ModeOrder,
    threshold: usize,
) -> Result<CsfTensor> {
    split_fibers(&CsfTensor::build(t, mode_order)?, threshold)
}

/// Split the fibers of a hybrid tensor's CSF part. COO and CSL slices have
/// no fiber with more than one nonzero, so they are unaffected.
pub fn split_hbcsf(h: &HbCsfTensor, threshold: usize) -> Result<HbCsfTensor> {
    let mut out = h.clone();
    out.csf = split_fibers(&h.csf, threshold)?;
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScheduleUnit {
    pub block_id: usize,
    /// Slice position in the tree.
    pub slice: usize,
    /// Fiber positions (level `N-2`) processed by this block.
    pub fibers: Range<usize>,
}

/// Assignment of fiber groups to thread blocks.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BlockSchedule {
    units: Vec<ScheduleUnit>,
    multiplicity: Vec<usize>,
    slice_count: usize,
    fiber_count: usize,
}

impl BlockSchedule {
    /// One block per slice.
    pub fn per_slice(t: &CsfTensor) -> BlockSchedule {
        let units = (0..t.slice_count())
            .map(|s| ScheduleUnit {
                block_id: s,
                slice: s,
                fibers: t.fiber_span(0, s),
            })
            .collect();
        BlockSchedule {
            units,
            multiplicity: vec![1; t.slice_count()],
            slice_count: t.slice_count(),
            fiber_count: t.fiber_count(),
        }
    }

    pub fn units(&self) -> &[ScheduleUnit] {
        &self.units
    }

    /// Blocks requested per slice by the binning rule.
    pub fn multiplicity(&self) -> &[usize] {
        &self.multiplicity
    }

    pub fn block_count(&self) -> usize {
        self.units.len()
    }

    /// Every fiber of `t` is assigned to exactly one unit, within its slice.
    pub fn check_covers(&self, t: &CsfTensor) -> Result<()> {
        if self.slice_count != t.slice_count() || self.fiber_count != t.fiber_count() {
            return Err(TensorError::arg(format!(
                "schedule built for {} slices / {} fibers, tensor has {} / {}",
                self.slice_count,
                self.fiber_count,
                t.slice_count(),
                t.fiber_count()
            )));
        }
        let mut seen = vec![false; t.fiber_count()];
        for u in &self.units {
            if u.slice >= t.slice_count() {
                return Err(TensorError::arg(format!("unit refers to slice {}", u.slice)));
            }
            let span = t.fiber_span(0, u.slice);
            if u.fibers.start < span.start || u.fibers.end > span.end {
                return Err(TensorError::arg(format!(
                    "block {} covers fibers outside slice {}",
                    u.block_id, u.slice
                )));
            }
            for f in u.fibers.clone() {
                if std::mem::replace(&mut seen[f], true) {
                    return Err(TensorError::arg(format!("fiber {f} scheduled twice")));
                }
            }
        }
        if let Some(f) = seen.iter().position(|&s| !s) {
            return Err(TensorError::arg(format!("fiber {f} not scheduled")));
        }
        Ok(())
    }
}

/// Give a slice with `m` nonzeros `max(1, ceil(m / block_size))` blocks and
/// partition its fibers into at most that many contiguous groups, closing a
/// group once it holds `ceil(m / multiplicity)` nonzeros.
pub fn assign_slice_blocks(t: &CsfTensor, cfg: &SplitConfig) -> Result<BlockSchedule> {
    cfg.validate()?;
    let mut units = Vec::new();
    let mut multiplicity = Vec::with_capacity(t.slice_count());
    for s in 0..t.slice_count() {
        let m = t.slice_nnz(s);
        let mult = m.div_ceil(cfg.block_size).max(1);
        let target = m.div_ceil(mult);
        multiplicity.push(mult);

        let span = t.fiber_span(0, s);
        let mut start = span.start;
        let mut acc = 0usize;
        let mut groups = 0usize;
        for f in span.clone() {
            acc += t.fiber_nnz(f);
            if acc >= target && groups + 1 < mult {
                units.push(ScheduleUnit {
                    block_id: units.len(),
                    slice: s,
                    fibers: start..f + 1,
                });
                groups += 1;
                start = f + 1;
                acc = 0;
            }
        }
        if start < span.end {
            units.push(ScheduleUnit {
                block_id: units.len(),
                slice: s,
                fibers: start..span.end,
            });
        }
    }
    Ok(BlockSchedule {
        units,
        multiplicity,
        slice_count: t.slice_count(),
        fiber_count: t.fiber_count(),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ImbalanceMetrics {
    pub slices: usize,
    pub fibers: usize,
    pub nnz: usize,
    pub per_slice: Spread,
    pub per_fiber: Spread,
}

impl ImbalanceMetrics {
    pub fn row(&self, tensor: &str, mode: usize) -> MetricsRow {
        MetricsRow {
            tensor: tensor.to_string(),
            mode,
            s: self.slices,
            f: self.fibers,
            m: self.nnz,
            stddev_slc: self.per_slice.stddev,
            stddev_fbr: self.per_fiber.stddev,
            max_slc: self.per_slice.max,
            max_fbr: self.per_fiber.max,
        }
    }
}

/// Flat record for CSV/JSON output.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsRow {
    pub tensor: String,
    pub mode: usize,
    #[serde(rename = "S")]
    pub s: usize,
    #[serde(rename = "F")]
    pub f: usize,
    #[serde(rename = "M")]
    pub m: usize,
    pub stddev_slc: f64,
    pub stddev_fbr: f64,
    pub max_slc: usize,
    pub max_fbr: usize,
}

impl MetricsRow {
    pub const CSV_HEADER: &'static str = "tensor,mode,S,F,M,stddev_slc,stddev_fbr,max_slc,max_fbr";

    pub fn to_csv(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{},{}",
            self.tensor,
            self.mode,
            self.s,
            self.f,
            self.m,
            self.stddev_slc,
            self.stddev_fbr,
            self.max_slc,
            self.max_fbr
        )
    }
}

/// Nonzeros per slice and per fiber (segment, when split).
pub fn imbalance_metrics(t: &CsfTensor) -> ImbalanceMetrics {
    ImbalanceMetrics {
        slices: t.slice_count(),
        fibers: t.fiber_count(),
        nnz: t.nnz(),
        per_slice: Spread::of((0..t.slice_count()).map(|s| t.slice_nnz(s))),
        per_fiber: Spread::of((0..t.fiber_count()).map(|f| t.fiber_nnz(f))),
    }
}
