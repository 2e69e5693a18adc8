use std::collections::BTreeMap;

use super::{check_factors, FactorMatrix};
use crate::coo::CooTensor;
use crate::error::{Result, TensorError};

/// Default ceiling on the materialized Khatri-Rao product, in scalars.
pub const DENSE_ORACLE_LIMIT: u128 = 10_000_000;

/// Reference MTTKRP: materializes the Khatri-Rao product of every factor
/// except `mode` and multiplies the mode-`mode` unfolding by it.
///
/// Unfolding column `z` enumerates the other modes in ascending order with
/// the first one varying fastest (`z = j + k*J` for order 3, mode 0).
pub fn mttkrp_dense_oracle(
    t: &CooTensor,
    factors: &[FactorMatrix],
    mode: usize,
) -> Result<FactorMatrix> {
    mttkrp_dense_oracle_with_limit(t, factors, mode, DENSE_ORACLE_LIMIT)
}

pub fn mttkrp_dense_oracle_with_limit(
    t: &CooTensor,
    factors: &[FactorMatrix],
    mode: usize,
    limit: u128,
) -> Result<FactorMatrix> {
    let rank = check_factors(t.dims(), factors, mode)?;
    let others: Vec<usize> = (0..t.order()).filter(|&d| d != mode).collect();
    let cols: u128 = others.iter().map(|&d| t.dims()[d] as u128).product();
    let needed = cols * rank as u128;
    if needed > limit {
        return Err(TensorError::Capacity { needed, limit });
    }
    let cols = cols as usize;

    // Khatri-Rao product, one row per unfolding column.
    let mut krp = vec![1.0; cols * rank];
    for z in 0..cols {
        let mut rem = z;
        let row = &mut krp[z * rank..(z + 1) * rank];
        for &d in &others {
            let dim = t.dims()[d];
            let i = rem % dim;
            rem /= dim;
            for (x, &f) in row.iter_mut().zip(factors[d].row(i)) {
                *x *= f;
            }
        }
    }

    // Mode-`mode` unfolding, keyed by (row, column).
    let mut unfolded: BTreeMap<(usize, usize), f64> = BTreeMap::new();
    for (idx, v) in t.entries() {
        let mut z = 0usize;
        let mut stride = 1usize;
        for &d in &others {
            z += idx[d] as usize * stride;
            stride *= t.dims()[d];
        }
        *unfolded.entry((idx[mode] as usize, z)).or_insert(0.0) += v;
    }

    let mut out = FactorMatrix::zeros(t.dims()[mode], rank);
    for ((i, z), v) in unfolded {
        let k = &krp[z * rank..(z + 1) * rank];
        for (y, &kz) in out.row_mut(i).iter_mut().zip(k) {
            *y += v * kz;
        }
    }
    Ok(out)
}
