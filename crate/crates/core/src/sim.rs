//! Cycle-level cost model of thread-block / warp execution of a CSF MTTKRP.
//!
//! A warp processes a fiber segment of `n` nonzeros in `ceil(n / warp_size)`
//! cycles. Inside a block, idle warps take the block's segments in order;
//! the block finishes when its last warp does. Blocks are dispatched in
//! schedule order to the earliest free slot (`num_sms * blocks_per_sm`
//! slots). Fiber combines and slice writes cost nothing.
//!
//! The efficiency and occupancy figures are model quantities, not hardware
//! counter readings.

use std::cmp::Reverse;
use std::collections::BinaryHeap;

use serde::{Deserialize, Serialize};

use crate::balance::{assign_slice_blocks, imbalance_metrics, split_fibers, BlockSchedule, ImbalanceMetrics, SplitConfig};
use crate::error::{Result, TensorError};
use crate::formats::CsfTensor;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct MachineModel {
    pub num_sms: usize,
    pub warps_per_block: usize,
    pub warp_size: usize,
    pub blocks_per_sm: usize,
}

impl Default for MachineModel {
    fn default() -> Self {
        MachineModel {
            num_sms: 56,
            warps_per_block: 512 / 32,
            warp_size: 32,
            blocks_per_sm: 1,
        }
    }
}

impl MachineModel {
    pub fn validate(&self) -> Result<()> {
        if self.num_sms == 0 || self.warps_per_block == 0 || self.warp_size == 0 || self.blocks_per_sm == 0 {
            return Err(TensorError::arg(format!("machine parameters must be positive: {self:?}")));
        }
        Ok(())
    }

    pub fn slots(&self) -> usize {
        self.num_sms * self.blocks_per_sm
    }

    /// Warps an SM can hold at once.
    pub fn warps_per_sm(&self) -> usize {
        self.warps_per_block * self.blocks_per_sm
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimReport {
    pub makespan_cycles: u64,
    pub per_block_cycles: Vec<u64>,
    /// Fraction of SM-cycles with at least one active warp.
    pub sm_efficiency_proxy: f64,
    /// Mean active warps per active SM-cycle over the SM's warp capacity.
    pub occupancy_proxy: f64,
    pub total_work_cycles: u64,
}

fn segment_cycles(nnz: usize, warp_size: usize) -> u64 {
    nnz.div_ceil(warp_size) as u64
}

/// Greedy warp assignment inside one block; returns the block's duration.
fn block_cycles(segments: impl Iterator<Item = u64>, warps: usize) -> u64 {
    let mut heap: BinaryHeap<Reverse<(u64, usize)>> = (0..warps).map(|w| Reverse((0, w))).collect();
    for c in segments {
        let Reverse((t, w)) = heap.pop().expect("at least one warp");
        heap.push(Reverse((t + c, w)));
    }
    heap.into_iter().map(|Reverse((t, _))| t).max().unwrap_or(0)
}

pub fn simulate(schedule: &BlockSchedule, t: &CsfTensor, m: &MachineModel) -> Result<SimReport> {
    m.validate()?;
    schedule.check_covers(t).map_err(|e| TensorError::arg(format!("schedule does not match tensor: {e}")))?;

    let per_block_cycles: Vec<u64> = schedule
        .units()
        .iter()
        .map(|u| {
            block_cycles(
                u.fibers.clone().map(|f| segment_cycles(t.fiber_nnz(f), m.warp_size)),
                m.warps_per_block,
            )
        })
        .collect();
    let total_work_cycles: u64 = (0..t.fiber_count())
        .map(|f| segment_cycles(t.fiber_nnz(f), m.warp_size))
        .sum();

    let slots = m.slots();
    let mut free: BinaryHeap<Reverse<(u64, usize)>> = (0..slots).map(|s| Reverse((0, s))).collect();
    let mut busy: Vec<Vec<(u64, u64)>> = vec![Vec::new(); m.num_sms];
    let mut makespan = 0u64;
    for &c in &per_block_cycles {
        let Reverse((start, slot)) = free.pop().expect("at least one slot");
        let end = start + c;
        free.push(Reverse((end, slot)));
        if c > 0 {
            busy[slot / m.blocks_per_sm].push((start, end));
        }
        makespan = makespan.max(end);
    }

    let active_sm_cycles: u64 = busy.iter_mut().map(|iv| union_length(iv)).sum();
    let (sm_eff, occupancy) = if makespan == 0 {
        (0.0, 0.0)
    } else {
        (
            active_sm_cycles as f64 / (m.num_sms as f64 * makespan as f64),
            total_work_cycles as f64 / active_sm_cycles as f64 / m.warps_per_sm() as f64,
        )
    };
    Ok(SimReport {
        makespan_cycles: makespan,
        per_block_cycles,
        sm_efficiency_proxy: sm_eff,
        occupancy_proxy: occupancy,
        total_work_cycles,
    })
}

fn union_length(intervals: &mut [(u64, u64)]) -> u64 {
    intervals.sort_unstable();
    let mut total = 0;
    let mut cur: Option<(u64, u64)> = None;
    for &(s, e) in intervals.iter() {
        cur = match cur {
            Some((cs, ce)) if s <= ce => Some((cs, ce.max(e))),
            Some((cs, ce)) => {
                total += ce - cs;
                Some((s, e))
            }
            None => Some((s, e)),
        };
    }
    if let Some((cs, ce)) = cur {
        total += ce - cs;
    }
    total
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    /// `None` means no fiber splitting.
    pub threshold: Option<usize>,
    pub report: SimReport,
    pub metrics: ImbalanceMetrics,
}

impl SweepRow {
    pub const CSV_HEADER: &'static str =
        "threshold,makespan,sm_efficiency_proxy,occupancy_proxy,stddev_fbr,stddev_slc";

    pub fn to_csv(&self) -> String {
        format!(
            "{},{},{},{},{},{}",
            self.threshold.map_or_else(|| "inf".to_string(), |t| t.to_string()),
            self.report.makespan_cycles,
            self.report.sm_efficiency_proxy,
            self.report.occupancy_proxy,
            self.metrics.per_fiber.stddev,
            self.metrics.per_slice.stddev
        )
    }
}

/// For each threshold: split fibers, bin slices into blocks with
/// `cfg.block_size`, simulate.
pub fn sweep_split(
    t: &CsfTensor,
    thresholds: &[Option<usize>],
    m: &MachineModel,
    cfg: &SplitConfig,
) -> Result<Vec<SweepRow>> {
    if thresholds.is_empty() {
        return Err(TensorError::arg("no thresholds given"));
    }
    thresholds
        .iter()
        .map(|&th| {
            let split = match th {
                Some(tau) => split_fibers(t, tau)?,
                None => t.clone(),
            };
            let schedule = assign_slice_blocks(&split, cfg)?;
            Ok(SweepRow {
                threshold: th,
                report: simulate(&schedule, &split, m)?,
                metrics: imbalance_metrics(&split),
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coo::{CooTensor, ModeOrder};
    use crate::formats::build_csf;

    fn fibers_tensor(fiber_sizes: &[&[usize]]) -> CsfTensor {
        let mut entries = Vec::new();
        let kmax = fiber_sizes.iter().flat_map(|s| s.iter()).copied().max().unwrap();
        let jmax = fiber_sizes.iter().map(|s| s.len()).max().unwrap();
        for (i, slice) in fiber_sizes.iter().enumerate() {
            for (j, &n) in slice.iter().enumerate() {
                for k in 0..n {
                    entries.push((vec![i as u32, j as u32, k as u32], 1.0));
                }
            }
        }
        let t = CooTensor::from_entries(vec![fiber_sizes.len(), jmax, kmax], entries).unwrap();
        build_csf(&t, &ModeOrder::identity(3)).unwrap()
    }

    #[test]
    fn single_fiber_single_warp() {
        let t = fibers_tensor(&[&[3]]);
        let m = MachineModel { num_sms: 1, warps_per_block: 1, warp_size: 32, blocks_per_sm: 1 };
        let r = simulate(&BlockSchedule::per_slice(&t), &t, &m).unwrap();
        assert_eq!(r.makespan_cycles, 1);
        assert_eq!(r.total_work_cycles, 1);
    }

    #[test]
    fn serialization_with_one_warp() {
        let t = fibers_tensor(&[&[3, 40, 7], &[65, 1]]);
        let m = MachineModel { num_sms: 1, warps_per_block: 1, warp_size: 4, blocks_per_sm: 1 };
        let r = simulate(&BlockSchedule::per_slice(&t), &t, &m).unwrap();
        assert_eq!(r.makespan_cycles, r.total_work_cycles);
        assert_eq!(r.total_work_cycles, 1 + 10 + 2 + 17 + 1);
    }

    #[test]
    fn uniform_with_enough_slots_is_fully_efficient() {
        let t = fibers_tensor(&[&[32, 32], &[32, 32], &[32, 32]]);
        let m = MachineModel { num_sms: 3, warps_per_block: 2, warp_size: 32, blocks_per_sm: 1 };
        let r = simulate(&BlockSchedule::per_slice(&t), &t, &m).unwrap();
        assert_eq!(r.makespan_cycles, 1);
        assert_eq!(r.sm_efficiency_proxy, 1.0);
        assert_eq!(r.occupancy_proxy, 1.0);
    }

    #[test]
    fn mismatched_schedule_is_rejected() {
        let a = fibers_tensor(&[&[3, 4]]);
        let b = fibers_tensor(&[&[3], &[4]]);
        assert!(simulate(&BlockSchedule::per_slice(&a), &b, &MachineModel::default()).is_err());
    }

    #[test]
    fn infinite_threshold_reproduces_plain_run() {
        let t = fibers_tensor(&[&[300, 2, 2], &[5]]);
        let m = MachineModel::default();
        let cfg = SplitConfig::default();
        let rows = sweep_split(&t, &[None], &m, &cfg).unwrap();
        let direct = simulate(&assign_slice_blocks(&t, &cfg).unwrap(), &t, &m).unwrap();
        assert_eq!(rows[0].report, direct);
        assert!(sweep_split(&t, &[], &m, &cfg).is_err());
    }

    #[test]
    fn uniform_sweep_is_flat() {
        let t = fibers_tensor(&[&[16, 16], &[16, 16]]);
        let rows = sweep_split(
            &t,
            &[None, Some(64), Some(16)],
            &MachineModel::default(),
            &SplitConfig::default(),
        )
        .unwrap();
        assert!(rows.iter().all(|r| r.report.makespan_cycles == rows[0].report.makespan_cycles));
    }

    #[test]
    fn union_of_overlapping_intervals() {
        let mut iv = vec![(0, 3), (2, 5), (7, 8)];
        assert_eq!(union_length(&mut iv), 6);
    }
}
