use super::{check_factors, FactorMatrix, OpCount};
use crate::error::Result;
use crate::formats::CslSlices;
use crate::par::{self, Exec};

/// MTTKRP over compressed slices. Each nonzero is read straight from the
/// slice pointer and contributes `value * (product of its factor rows)` to
/// the slice's output row; there is no per-fiber buffer. Counts `(N-1)R`
/// multiplies and `R` adds per nonzero. Slice rows are disjoint from every
/// other part of a hybrid tensor, so the final store is not counted.
pub fn mttkrp_csl(
    s: &CslSlices,
    factors: &[FactorMatrix],
    mode: usize,
    exec: Exec,
) -> Result<(FactorMatrix, OpCount)> {
    let rank = check_factors(s.dims(), factors, mode)?;
    let mut out = FactorMatrix::zeros(s.dims()[mode], rank);
    let ops = accumulate_csl(s, factors, mode, rank, exec, &mut out)?;
    Ok((out, ops))
}

pub(crate) fn accumulate_csl(
    s: &CslSlices,
    factors: &[FactorMatrix],
    mode: usize,
    rank: usize,
    exec: Exec,
    out: &mut FactorMatrix,
) -> Result<OpCount> {
    if s.slice_count() > 0 && s.mode_order().slice_mode() != mode {
        return Err(crate::error::TensorError::arg(format!(
            "CSL slices are rooted at mode {}, requested mode {mode}",
            s.mode_order().slice_mode()
        )));
    }
    let lower: Vec<&FactorMatrix> = s.mode_order().as_slice()[1..]
        .iter()
        .map(|&m| &factors[m])
        .collect();
    let ptr = s.slice_ptr();
    let vals = s.values();
    let parts = par::map_range(exec, s.slice_count(), |sl| {
        let mut acc = vec![0.0; rank];
        let mut tmp = vec![0.0; rank];
        let mut ops = OpCount::default();
        for (k, &v) in vals.iter().enumerate().take(ptr[sl + 1]).skip(ptr[sl]) {
            let sub = s.sub_idx(k);
            for (d, (&i, f)) in sub.iter().zip(&lower).enumerate() {
                let row = f.row(i as usize);
                if d == 0 {
                    tmp.iter_mut().zip(row).for_each(|(x, &b)| *x = v * b);
                } else {
                    tmp.iter_mut().zip(row).for_each(|(x, &b)| *x *= b);
                }
                ops.mul(rank);
            }
            acc.iter_mut().zip(&tmp).for_each(|(a, x)| *a += x);
            ops.add(rank);
        }
        (acc, ops)
    });
    let mut ops = OpCount::default();
    for (sl, (acc, o)) in parts.into_iter().enumerate() {
        let i = s.slice_idx()[sl] as usize;
        out.row_mut(i).iter_mut().zip(&acc).for_each(|(y, a)| *y += a);
        ops += o;
    }
    Ok(ops)
}
