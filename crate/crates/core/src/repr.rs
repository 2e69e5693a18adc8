//! One MTTKRP-ready representation per mode.
//!
//! Mode-general MTTKRP stores `N` trees, each rooted at its own mode with the
//! remaining modes ordered by ascending dimension.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::balance::{assign_slice_blocks, split_fibers, split_hbcsf, BlockSchedule, SplitConfig};
use crate::coo::{CooTensor, ModeOrder};
use crate::error::{Result, TensorError};
use crate::formats::{CsfTensor, HbCsfTensor, IndexStorage, StorageReport};
use crate::kernels::{mttkrp_coo, mttkrp_csf, mttkrp_csf_scheduled, mttkrp_hbcsf, FactorMatrix, OpCount};
use crate::par::Exec;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Coo,
    Csf,
    Bcsf,
    Hbcsf,
}

impl Format {
    pub const ALL: [Format; 4] = [Format::Coo, Format::Csf, Format::Bcsf, Format::Hbcsf];
}

impl fmt::Display for Format {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Format::Coo => "coo",
            Format::Csf => "csf",
            Format::Bcsf => "bcsf",
            Format::Hbcsf => "hbcsf",
        })
    }
}

impl FromStr for Format {
    type Err = TensorError;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "coo" => Ok(Format::Coo),
            "csf" => Ok(Format::Csf),
            "bcsf" | "b-csf" => Ok(Format::Bcsf),
            "hbcsf" | "hb-csf" => Ok(Format::Hbcsf),
            other => Err(TensorError::arg(format!(
                "unknown format `{other}` (expected coo, csf, bcsf or hbcsf)"
            ))),
        }
    }
}

/// A representation prepared for MTTKRP in one mode.
#[derive(Debug, Clone)]
#[allow(clippy::large_enum_variant)]
pub enum ModeRep {
    Coo(Arc<CooTensor>),
    Csf(CsfTensor),
    /// Fiber-split tree plus its slice-to-block schedule.
    Bcsf { csf: CsfTensor, schedule: BlockSchedule },
    Hbcsf(HbCsfTensor),
}

impl ModeRep {
    pub fn build(t: &Arc<CooTensor>, mode: usize, format: Format, cfg: &SplitConfig) -> Result<ModeRep> {
        let order = ModeOrder::for_mode(t.dims(), mode)?;
        Ok(match format {
            Format::Coo => ModeRep::Coo(Arc::clone(t)),
            Format::Csf => ModeRep::Csf(CsfTensor::build(t, &order)?),
            Format::Bcsf => {
                cfg.validate()?;
                let csf = split_fibers(&CsfTensor::build(t, &order)?, cfg.fiber_threshold)?;
                let schedule = assign_slice_blocks(&csf, cfg)?;
                ModeRep::Bcsf { csf, schedule }
            }
            Format::Hbcsf => {
                cfg.validate()?;
                ModeRep::Hbcsf(split_hbcsf(&HbCsfTensor::build(t, &order)?, cfg.fiber_threshold)?)
            }
        })
    }

    pub fn format(&self) -> Format {
        match self {
            ModeRep::Coo(_) => Format::Coo,
            ModeRep::Csf(_) => Format::Csf,
            ModeRep::Bcsf { .. } => Format::Bcsf,
            ModeRep::Hbcsf(_) => Format::Hbcsf,
        }
    }

    pub fn mttkrp(&self, factors: &[FactorMatrix], mode: usize, exec: Exec) -> Result<(FactorMatrix, OpCount)> {
        match self {
            ModeRep::Coo(t) => mttkrp_coo(t, factors, mode, exec),
            ModeRep::Csf(t) => mttkrp_csf(t, factors, mode, exec),
            ModeRep::Bcsf { csf, schedule } => {
                if exec.is_parallel() {
                    mttkrp_csf_scheduled(csf, schedule, factors, mode, exec)
                } else {
                    mttkrp_csf(csf, factors, mode, exec)
                }
            }
            ModeRep::Hbcsf(h) => mttkrp_hbcsf(h, factors, mode, exec),
        }
    }

    pub fn storage(&self) -> StorageReport {
        match self {
            ModeRep::Coo(t) => t.storage_words(),
            ModeRep::Csf(t) => t.storage_words(),
            ModeRep::Bcsf { csf, .. } => csf.storage_words(),
            ModeRep::Hbcsf(h) => h.storage_words(),
        }
    }
}

/// `N` representations of one tensor, one per mode.
#[derive(Debug, Clone)]
pub struct ModeReps {
    dims: Vec<usize>,
    nnz: usize,
    norm_sq: f64,
    reps: Vec<ModeRep>,
}

impl ModeReps {
    pub fn build(t: &CooTensor, format: Format, cfg: &SplitConfig) -> Result<ModeReps> {
        let shared = Arc::new(t.canonicalize());
        let reps = (0..t.order())
            .map(|mode| ModeRep::build(&shared, mode, format, cfg))
            .collect::<Result<Vec<_>>>()?;
        Ok(ModeReps {
            dims: t.dims().to_vec(),
            nnz: shared.nnz(),
            norm_sq: shared.norm_sq(),
            reps,
        })
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn order(&self) -> usize {
        self.dims.len()
    }

    pub fn nnz(&self) -> usize {
        self.nnz
    }

    /// Squared Frobenius norm of the tensor.
    pub fn norm_sq(&self) -> f64 {
        self.norm_sq
    }

    pub fn mode(&self, mode: usize) -> &ModeRep {
        &self.reps[mode]
    }

    pub fn format(&self) -> Format {
        self.reps[0].format()
    }
}
