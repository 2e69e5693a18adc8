use std::ops::Range;

use super::{check_factors, FactorMatrix, OpCount};
use crate::coo::CooTensor;
use crate::error::Result;
use crate::par::{self, Exec};

/// Entries per privatized chunk in parallel mode.
const CHUNK: usize = 4096;

/// Each nonzero scales the product of the other modes' factor rows and adds
/// it into output row `index[mode]`: `(N-1)R` multiplies and `R` adds per
/// nonzero.
///
/// In parallel mode nonzero chunks accumulate into private output buffers
/// that are summed afterwards in chunk order.
pub fn mttkrp_coo(
    t: &CooTensor,
    factors: &[FactorMatrix],
    mode: usize,
    exec: Exec,
) -> Result<(FactorMatrix, OpCount)> {
    let rank = check_factors(t.dims(), factors, mode)?;
    let rows = t.dims()[mode];
    let mut out = FactorMatrix::zeros(rows, rank);
    let mut ops = OpCount::default();
    if exec.is_parallel() && t.nnz() > CHUNK {
        let chunks = t.nnz().div_ceil(CHUNK);
        let partials = par::map_range(exec, chunks, |c| {
            let lo = c * CHUNK;
            let hi = (lo + CHUNK).min(t.nnz());
            let mut buf = vec![0.0; rows * rank];
            let mut ops = OpCount::default();
            accumulate(t, factors, mode, rank, lo..hi, &mut buf, &mut ops);
            (buf, ops)
        });
        for (buf, o) in partials {
            for (y, b) in out.data_mut().iter_mut().zip(&buf) {
                *y += b;
            }
            ops += o;
        }
    } else {
        accumulate(t, factors, mode, rank, 0..t.nnz(), out.data_mut(), &mut ops);
    }
    Ok((out, ops))
}

pub(crate) fn accumulate(
    t: &CooTensor,
    factors: &[FactorMatrix],
    mode: usize,
    rank: usize,
    entries: Range<usize>,
    out: &mut [f64],
    ops: &mut OpCount,
) {
    let n = t.order();
    let mut tmp = vec![0.0; rank];
    for e in entries {
        let idx = t.index(e);
        let v = t.value(e);
        let mut first = true;
        for d in (0..n).filter(|&d| d != mode) {
            let row = factors[d].row(idx[d] as usize);
            if first {
                tmp.iter_mut().zip(row).for_each(|(x, &b)| *x = v * b);
                first = false;
            } else {
                tmp.iter_mut().zip(row).for_each(|(x, &b)| *x *= b);
            }
            ops.mul(rank);
        }
        let i = idx[mode] as usize;
        out[i * rank..(i + 1) * rank]
            .iter_mut()
            .zip(&tmp)
            .for_each(|(y, x)| *y += x);
        ops.add(rank);
    }
}
