use super::coo::mttkrp_coo;
use super::csf::mttkrp_csf;
use super::csl::accumulate_csl;
use super::{check_factors, FactorMatrix, OpCount};
use crate::error::Result;
use crate::formats::HbCsfTensor;
use crate::par::Exec;

/// Runs the COO, CSL and CSF kernels on their parts and sums them into one
/// output. The parts own disjoint slices, so their output rows are disjoint.
pub fn mttkrp_hbcsf(
    h: &HbCsfTensor,
    factors: &[FactorMatrix],
    mode: usize,
    exec: Exec,
) -> Result<(FactorMatrix, OpCount)> {
    let rank = check_factors(h.dims(), factors, mode)?;
    h.csf_part().expect_slice_mode(mode)?;
    let (mut out, mut ops) = mttkrp_coo(h.coo_part(), factors, mode, exec)?;
    ops += accumulate_csl(h.csl_part(), factors, mode, rank, exec, &mut out)?;
    if h.csf_part().nnz() > 0 {
        let (y, o) = mttkrp_csf(h.csf_part(), factors, mode, exec)?;
        for (a, b) in out.data_mut().iter_mut().zip(y.data()) {
            *a += b;
        }
        ops += o;
    }
    Ok((out, ops))
}
