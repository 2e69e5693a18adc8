//! Benchmark records for the `mttkrp` command.

use serde::{Deserialize, Serialize};
use tenkit::{Exec, Format};

/// Operation basis stated in every record.
pub const GFLOPS_BASIS: &str = "instrumented multiply and add count (OpCount::total)";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BaselineTiming {
    pub format: Format,
    pub wall_seconds: f64,
    pub preprocessing_seconds: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchRecord {
    pub tensor: String,
    pub format: Format,
    pub mode: usize,
    pub rank: usize,
    pub nnz: usize,
    pub exec: Exec,
    pub threads: usize,
    /// Median kernel time.
    pub wall_seconds: f64,
    pub op_count: u64,
    pub muls: u64,
    pub adds: u64,
    pub gflops: f64,
    pub gflops_basis: String,
    pub preprocessing_seconds: f64,
    pub iterations_to_amortize: Option<u64>,
    pub baseline: Option<BaselineTiming>,
    /// `2(S+M)R` for CSF-based formats, alongside the traversal count.
    pub csf_closed_form_ops: Option<u64>,
    pub index_words: usize,
    /// Sum of all output entries.
    pub checksum: f64,
    /// Largest row deviation from the COO kernel when `--check` was given.
    pub check_deviation: Option<f64>,
}

pub fn gflops(op_count: u64, wall_seconds: f64) -> f64 {
    if wall_seconds > 0.0 {
        op_count as f64 / wall_seconds / 1e9
    } else {
        0.0
    }
}

/// Kernel runs needed before extra preprocessing pays for itself against a
/// baseline. `Some(0)` if preprocessing is not more expensive, `None` if the
/// kernel is not faster.
pub fn iterations_to_amortize(pre: f64, wall: f64, base_pre: f64, base_wall: f64) -> Option<u64> {
    let extra = pre - base_pre;
    if extra <= 0.0 {
        return Some(0);
    }
    let gain = base_wall - wall;
    if gain <= 0.0 {
        return None;
    }
    Some((extra / gain).ceil() as u64)
}

pub fn median(samples: &mut [f64]) -> f64 {
    samples.sort_by(f64::total_cmp);
    let n = samples.len();
    match n {
        0 => f64::NAN,
        _ if n % 2 == 1 => samples[n / 2],
        _ => 0.5 * (samples[n / 2 - 1] + samples[n / 2]),
    }
}
