//! MTTKRP kernels for every storage format, a dense Khatri-Rao reference,
//! and instrumented operation counts.

mod coo;
mod csf;
mod csl;
mod factor;
mod hybrid;
mod ops;
mod oracle;

pub use coo::mttkrp_coo;
pub use csf::{csf_op_formula, mttkrp_csf, mttkrp_csf_scheduled};
pub use csl::mttkrp_csl;
pub use factor::{max_relative_row_deviation, FactorMatrix};
pub use hybrid::mttkrp_hbcsf;
pub use ops::OpCount;
pub use oracle::{mttkrp_dense_oracle, mttkrp_dense_oracle_with_limit, DENSE_ORACLE_LIMIT};

use crate::coo::CooTensor;
use crate::error::{Result, TensorError};
use crate::formats::{CslSlices, CsfTensor, HbCsfTensor};
use crate::par::Exec;

/// Validates factor shapes for a mode-`mode` MTTKRP and returns the rank.
/// `factors[mode]` is not read.
pub(crate) fn check_factors(dims: &[usize], factors: &[FactorMatrix], mode: usize) -> Result<usize> {
    if mode >= dims.len() {
        return Err(TensorError::arg(format!(
            "mode {mode} out of range for order {}",
            dims.len()
        )));
    }
    if factors.len() != dims.len() {
        return Err(TensorError::dims(format!(
            "{} factors for an order-{} tensor",
            factors.len(),
            dims.len()
        )));
    }
    let mut rank = None;
    for (d, f) in factors.iter().enumerate() {
        if d == mode {
            continue;
        }
        if f.rows() != dims[d] {
            return Err(TensorError::dims(format!(
                "factor {d} has {} rows, mode {d} has dimension {}",
                f.rows(),
                dims[d]
            )));
        }
        match rank {
            None => rank = Some(f.cols()),
            Some(r) if r != f.cols() => {
                return Err(TensorError::dims(format!(
                    "factor {d} has rank {}, expected {r}",
                    f.cols()
                )))
            }
            _ => {}
        }
    }
    let rank = rank.unwrap_or(0);
    if rank == 0 {
        return Err(TensorError::arg("rank must be at least 1"));
    }
    Ok(rank)
}

/// A representation that can run a mode-`mode` MTTKRP.
pub trait Mttkrp: Send + Sync {
    fn dims(&self) -> &[usize];
    fn nnz(&self) -> usize;
    fn mttkrp(&self, factors: &[FactorMatrix], mode: usize, exec: Exec)
        -> Result<(FactorMatrix, OpCount)>;
}

impl Mttkrp for CooTensor {
    fn dims(&self) -> &[usize] {
        CooTensor::dims(self)
    }
    fn nnz(&self) -> usize {
        CooTensor::nnz(self)
    }
    fn mttkrp(&self, f: &[FactorMatrix], mode: usize, exec: Exec) -> Result<(FactorMatrix, OpCount)> {
        mttkrp_coo(self, f, mode, exec)
    }
}

impl Mttkrp for CsfTensor {
    fn dims(&self) -> &[usize] {
        CsfTensor::dims(self)
    }
    fn nnz(&self) -> usize {
        CsfTensor::nnz(self)
    }
    fn mttkrp(&self, f: &[FactorMatrix], mode: usize, exec: Exec) -> Result<(FactorMatrix, OpCount)> {
        mttkrp_csf(self, f, mode, exec)
    }
}

impl Mttkrp for CslSlices {
    fn dims(&self) -> &[usize] {
        CslSlices::dims(self)
    }
    fn nnz(&self) -> usize {
        CslSlices::nnz(self)
    }
    fn mttkrp(&self, f: &[FactorMatrix], mode: usize, exec: Exec) -> Result<(FactorMatrix, OpCount)> {
        mttkrp_csl(self, f, mode, exec)
    }
}

impl Mttkrp for HbCsfTensor {
    fn dims(&self) -> &[usize] {
        HbCsfTensor::dims(self)
    }
    fn nnz(&self) -> usize {
        HbCsfTensor::nnz(self)
    }
    fn mttkrp(&self, f: &[FactorMatrix], mode: usize, exec: Exec) -> Result<(FactorMatrix, OpCount)> {
        mttkrp_hbcsf(self, f, mode, exec)
    }
}
