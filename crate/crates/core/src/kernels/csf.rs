use std::ops::Range;

use super::{check_factors, FactorMatrix, OpCount};
use crate::balance::BlockSchedule;
use crate::error::{Result, TensorError};
use crate::formats::CsfTensor;
use crate::par::{self, Exec};

/// Tree-structured MTTKRP over a CSF (or fiber-split B-CSF) tensor rooted
/// at `mode`.
///
/// Nonzeros of a fiber are scaled by their leaf-mode factor rows and summed
/// into a fiber buffer; the buffer is multiplied by the fiber's factor row
/// once and folded into the parent accumulator; intermediate levels (order
/// 4+) scale their own buffer and add it upward; each slice adds its
/// accumulator into the output row.
///
/// Counting convention: leaf `mul+add`, fiber fold `mul`, intermediate
/// `mul+add`, slice write `add`. For order 3 that is `(M + F)R` multiplies
/// and `(M + S)R` adds.
pub fn mttkrp_csf(
    t: &CsfTensor,
    factors: &[FactorMatrix],
    mode: usize,
    exec: Exec,
) -> Result<(FactorMatrix, OpCount)> {
    t.expect_slice_mode(mode)?;
    let rank = check_factors(t.dims(), factors, mode)?;
    let walker = Walker::new(t, factors, rank);
    let mut out = FactorMatrix::zeros(t.dims()[mode], rank);
    let mut ops = OpCount::default();
    if exec.is_parallel() {
        let parts = par::map_range(exec, t.slice_count(), |s| {
            let mut ops = OpCount::default();
            let acc = walker.slice(s, t.fiber_span(0, s), &mut ops);
            (acc, ops)
        });
        for (s, (acc, o)) in parts.into_iter().enumerate() {
            add_row(&mut out, t.idx(0)[s] as usize, &acc);
            ops += o;
        }
    } else {
        for s in 0..t.slice_count() {
            let acc = walker.slice(s, t.fiber_span(0, s), &mut ops);
            add_row(&mut out, t.idx(0)[s] as usize, &acc);
        }
    }
    Ok((out, ops))
}

/// MTTKRP driven by a block schedule: each scheduled unit covers a range of
/// fibers of one slice. Units of the same slice produce separate partial
/// rows that are reduced into the output afterwards, in unit order.
pub fn mttkrp_csf_scheduled(
    t: &CsfTensor,
    schedule: &BlockSchedule,
    factors: &[FactorMatrix],
    mode: usize,
    exec: Exec,
) -> Result<(FactorMatrix, OpCount)> {
    t.expect_slice_mode(mode)?;
    schedule.check_covers(t)?;
    let rank = check_factors(t.dims(), factors, mode)?;
    let walker = Walker::new(t, factors, rank);
    let units = schedule.units();
    let parts = par::map_range(exec, units.len(), |u| {
        let unit = &units[u];
        let mut ops = OpCount::default();
        let acc = walker.slice(unit.slice, unit.fibers.clone(), &mut ops);
        (unit.slice, acc, ops)
    });
    let mut out = FactorMatrix::zeros(t.dims()[mode], rank);
    let mut ops = OpCount::default();
    for (s, acc, o) in parts {
        add_row(&mut out, t.idx(0)[s] as usize, &acc);
        ops += o;
    }
    Ok((out, ops))
}

fn add_row(out: &mut FactorMatrix, i: usize, acc: &[f64]) {
    out.row_mut(i).iter_mut().zip(acc).for_each(|(y, a)| *y += a);
}

struct Walker<'a> {
    t: &'a CsfTensor,
    level_factor: Vec<&'a FactorMatrix>,
    rank: usize,
}

impl<'a> Walker<'a> {
    fn new(t: &'a CsfTensor, factors: &'a [FactorMatrix], rank: usize) -> Self {
        let level_factor = t
            .mode_order()
            .as_slice()
            .iter()
            .map(|&m| &factors[m])
            .collect();
        Walker {
            t,
            level_factor,
            rank,
        }
    }

    /// Accumulator of slice `s` restricted to the fibers in `fibers`,
    /// including the slice-write add.
    fn slice(&self, s: usize, fibers: Range<usize>, ops: &mut OpCount) -> Vec<f64> {
        let n = self.t.order();
        let mut bufs = vec![vec![0.0; self.rank]; n - 1];
        let (acc, rest) = bufs.split_first_mut().expect("order >= 3");
        for c in self.t.children(0, s) {
            self.node(1, c, &fibers, acc, rest, ops);
        }
        ops.add(self.rank);
        std::mem::take(&mut bufs[0])
    }

    /// Adds the contribution of node `p` at level `d >= 1` into `parent`.
    fn node(
        &self,
        d: usize,
        p: usize,
        fibers: &Range<usize>,
        parent: &mut [f64],
        scratch: &mut [Vec<f64>],
        ops: &mut OpCount,
    ) {
        let t = self.t;
        let n = t.order();
        let r = self.rank;
        let row = self.level_factor[d].row(t.idx(d)[p] as usize);
        if d == n - 2 {
            if !fibers.contains(&p) {
                return;
            }
            let tmp = &mut scratch[0];
            tmp.iter_mut().for_each(|x| *x = 0.0);
            let leaf = self.level_factor[n - 1];
            let vals = t.values();
            let leaf_idx = t.leaf_idx();
            for k in t.children(d, p) {
                let v = vals[k];
                let c = leaf.row(leaf_idx[k] as usize);
                tmp.iter_mut().zip(c).for_each(|(x, &cv)| *x += v * cv);
                ops.mul(r);
                ops.add(r);
            }
            parent
                .iter_mut()
                .zip(tmp.iter().zip(row))
                .for_each(|(y, (x, &b))| *y += x * b);
            ops.mul(r);
        } else {
            let span = t.fiber_span(d, p);
            if span.end <= fibers.start || span.start >= fibers.end {
                return;
            }
            let (tmp, rest) = scratch.split_first_mut().expect("scratch per level");
            tmp.iter_mut().for_each(|x| *x = 0.0);
            for c in t.children(d, p) {
                self.node(d + 1, c, fibers, tmp, rest, ops);
            }
            tmp.iter_mut().zip(row).for_each(|(x, &b)| *x *= b);
            ops.mul(r);
            parent.iter_mut().zip(tmp.iter()).for_each(|(y, x)| *y += x);
            ops.add(r);
        }
    }
}

/// Operation count a plain CSF traversal reports, from the level sizes.
pub fn csf_op_formula(t: &CsfTensor, rank: usize) -> Result<OpCount> {
    let n = t.order();
    if n < 3 {
        return Err(TensorError::arg("order must be at least 3"));
    }
    let m = t.nnz();
    let muls: usize = m + (1..=n - 2).map(|d| t.level_len(d)).sum::<usize>();
    let adds: usize = m + (0..=n - 3).map(|d| t.level_len(d)).sum::<usize>();
    Ok(OpCount::new((muls * rank) as u64, (adds * rank) as u64))
}
