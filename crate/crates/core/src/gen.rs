//! Synthetic sparse tensors with power-law slice and fiber lengths.

use std::collections::HashSet;

use rand::distributions::{Distribution, WeightedIndex};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::coo::CooTensor;
use crate::error::{Result, TensorError};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenConfig {
    pub shape: Vec<usize>,
    pub nnz: usize,
    /// Zipf exponent for slice and fiber popularity; 0 is uniform.
    pub skew: f64,
    pub seed: u64,
}

/// Rejection attempts before a sample falls back to a uniform coordinate.
const SKEWED_TRIES: usize = 64;

fn zipf_sampler(n: usize, skew: f64, rng: &mut ChaCha8Rng) -> Result<(Vec<u32>, WeightedIndex<f64>)> {
    let mut ids: Vec<u32> = (0..n as u32).collect();
    ids.shuffle(rng);
    let weights = (0..n).map(|rank| 1.0 / ((rank + 1) as f64).powf(skew));
    let dist = WeightedIndex::new(weights).map_err(|e| TensorError::arg(format!("zipf weights: {e}")))?;
    Ok((ids, dist))
}

/// Draws `nnz` distinct coordinates. Mode 0 (slices) and mode 1 (fibers)
/// follow Zipf laws over a random permutation of their ids; the other modes
/// are uniform. Values are uniform in `(0, 1]`.
pub fn generate(cfg: &GenConfig) -> Result<CooTensor> {
    if cfg.shape.len() < 3 {
        return Err(TensorError::arg(format!(
            "shape needs at least 3 modes, got {}",
            cfg.shape.len()
        )));
    }
    if cfg.shape.iter().any(|&d| d == 0 || d > u32::MAX as usize) {
        return Err(TensorError::arg(format!("invalid shape {:?}", cfg.shape)));
    }
    if !(cfg.skew >= 0.0 && cfg.skew.is_finite()) {
        return Err(TensorError::arg(format!("skew must be finite and nonnegative, got {}", cfg.skew)));
    }
    let capacity = cfg
        .shape
        .iter()
        .try_fold(1u128, |acc, &d| acc.checked_mul(d as u128))
        .unwrap_or(u128::MAX);
    if cfg.nnz as u128 > capacity {
        return Err(TensorError::arg(format!(
            "{} nonzeros do not fit in shape {:?}",
            cfg.nnz, cfg.shape
        )));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let (slice_ids, slice_dist) = zipf_sampler(cfg.shape[0], cfg.skew, &mut rng)?;
    let (fiber_ids, fiber_dist) = zipf_sampler(cfg.shape[1], cfg.skew, &mut rng)?;
    let n = cfg.shape.len();
    let mut seen: HashSet<Vec<u32>> = HashSet::with_capacity(cfg.nnz);
    let mut entries = Vec::with_capacity(cfg.nnz);
    let mut idx = vec![0u32; n];
    while entries.len() < cfg.nnz {
        let mut placed = false;
        for attempt in 0.. {
            let skewed = attempt < SKEWED_TRIES;
            idx[0] = if skewed {
                slice_ids[slice_dist.sample(&mut rng)]
            } else {
                rng.gen_range(0..cfg.shape[0] as u32)
            };
            idx[1] = if skewed {
                fiber_ids[fiber_dist.sample(&mut rng)]
            } else {
                rng.gen_range(0..cfg.shape[1] as u32)
            };
            for (slot, &dim) in idx.iter_mut().zip(&cfg.shape).skip(2) {
                *slot = rng.gen_range(0..dim as u32);
            }
            if seen.insert(idx.clone()) {
                placed = true;
                break;
            }
        }
        debug_assert!(placed);
        let v = 1.0 - rng.gen::<f64>();
        entries.push((idx.clone(), v));
    }
    Ok(CooTensor::from_entries(cfg.shape.clone(), entries)?.canonicalize())
}
