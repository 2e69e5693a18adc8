//! Coordinate-format tensors and mode orders.

use std::cmp::Ordering;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Result, TensorError};

/// A permutation of `0..N` naming the order in which modes are nested:
/// `order[0]` is the slice mode, `order[N-1]` the leaf mode.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ModeOrder(Vec<usize>);

impl ModeOrder {
    pub fn new(order: Vec<usize>) -> Result<Self> {
        let n = order.len();
        let mut seen = vec![false; n];
        for &m in &order {
            if m >= n || seen[m] {
                return Err(TensorError::arg(format!(
                    "{order:?} is not a permutation of 0..{n}"
                )));
            }
            seen[m] = true;
        }
        Ok(ModeOrder(order))
    }

    pub fn identity(order: usize) -> Self {
        ModeOrder((0..order).collect())
    }

    /// The per-mode ordering used when one representation is stored per mode:
    /// `mode` first, the remaining modes by ascending dimension (ties by mode id).
    pub fn for_mode(dims: &[usize], mode: usize) -> Result<Self> {
        if mode >= dims.len() {
            return Err(TensorError::arg(format!(
                "mode {mode} out of range for order {}",
                dims.len()
            )));
        }
        let mut rest: Vec<usize> = (0..dims.len()).filter(|&d| d != mode).collect();
        rest.sort_by_key(|&d| (dims[d], d));
        let mut order = Vec::with_capacity(dims.len());
        order.push(mode);
        order.extend(rest);
        Ok(ModeOrder(order))
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.0
    }

    pub fn slice_mode(&self) -> usize {
        self.0[0]
    }

    pub fn leaf_mode(&self) -> usize {
        self.0[self.0.len() - 1]
    }

    fn check_order(&self, order: usize) -> Result<()> {
        if self.0.len() != order {
            return Err(TensorError::arg(format!(
                "mode order {:?} has length {}, tensor has order {order}",
                self.0,
                self.0.len()
            )));
        }
        Ok(())
    }
}

impl fmt::Display for ModeOrder {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(|m| m.to_string()).collect();
        write!(f, "{}", parts.join(","))
    }
}

/// A sparse tensor stored as a list of `(indices, value)` tuples.
///
/// Indices are 0-based and stored as `u32`, flattened with stride `order()`.
#[derive(Debug, Clone, PartialEq)]
pub struct CooTensor {
    dims: Vec<usize>,
    indices: Vec<u32>,
    values: Vec<f64>,
    sorted_under: Option<ModeOrder>,
}

impl CooTensor {
    /// Build from flattened indices (`values.len() * dims.len()` of them).
    pub fn from_parts(dims: Vec<usize>, indices: Vec<u32>, values: Vec<f64>) -> Result<Self> {
        let n = dims.len();
        if n < 3 {
            return Err(TensorError::arg(format!(
                "tensor order must be at least 3, got {n}"
            )));
        }
        if dims.iter().any(|&d| d == 0 || d > u32::MAX as usize) {
            return Err(TensorError::arg(format!("invalid dimensions {dims:?}")));
        }
        if indices.len() != values.len() * n {
            return Err(TensorError::dims(format!(
                "{} indices for {} values of an order-{n} tensor",
                indices.len(),
                values.len()
            )));
        }
        for (e, idx) in indices.chunks_exact(n).enumerate() {
            for (d, (&i, &dim)) in idx.iter().zip(&dims).enumerate() {
                if i as usize >= dim {
                    return Err(TensorError::arg(format!(
                        "entry {e}: index {i} out of range for mode {d} (dim {dim})"
                    )));
                }
            }
        }
        Ok(CooTensor {
            dims,
            indices,
            values,
            sorted_under: None,
        })
    }

    pub fn from_entries<I>(dims: Vec<usize>, entries: I) -> Result<Self>
    where
        I: IntoIterator<Item = (Vec<u32>, f64)>,
    {
        let n = dims.len();
        let mut indices = Vec::new();
        let mut values = Vec::new();
        for (idx, v) in entries {
            if idx.len() != n {
                return Err(TensorError::dims(format!(
                    "entry with {} indices in an order-{n} tensor",
                    idx.len()
                )));
            }
            indices.extend_from_slice(&idx);
            values.push(v);
        }
        Self::from_parts(dims, indices, values)
    }

    pub fn empty(dims: Vec<usize>) -> Result<Self> {
        Self::from_parts(dims, Vec::new(), Vec::new())
    }

    pub fn order(&self) -> usize {
        self.dims.len()
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Coordinates of nonzero `e`.
    #[allow(clippy::should_implement_trait)]
    pub fn index(&self, e: usize) -> &[u32] {
        let n = self.order();
        &self.indices[e * n..(e + 1) * n]
    }

    pub fn value(&self, e: usize) -> f64 {
        self.values[e]
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn raw_indices(&self) -> &[u32] {
        &self.indices
    }

    pub fn sorted_under(&self) -> Option<&ModeOrder> {
        self.sorted_under.as_ref()
    }

    pub fn entries(&self) -> impl Iterator<Item = (&[u32], f64)> + '_ {
        self.indices
            .chunks_exact(self.order())
            .zip(self.values.iter().copied())
    }

    /// Squared Frobenius norm.
    pub fn norm_sq(&self) -> f64 {
        self.values.iter().map(|v| v * v).sum()
    }

    /// The tensor with every value multiplied by `alpha`.
    pub fn scaled(&self, alpha: f64) -> CooTensor {
        let mut out = self.clone();
        out.values.iter_mut().for_each(|v| *v *= alpha);
        out
    }

    /// Keep the entries at the given positions, in that order.
    pub fn select(&self, positions: &[usize]) -> CooTensor {
        let n = self.order();
        let mut indices = Vec::with_capacity(positions.len() * n);
        let mut values = Vec::with_capacity(positions.len());
        for &e in positions {
            indices.extend_from_slice(self.index(e));
            values.push(self.values[e]);
        }
        CooTensor {
            dims: self.dims.clone(),
            indices,
            values,
            sorted_under: None,
        }
    }

    /// Same entries, different (larger or equal) dimensions.
    pub fn with_dims(mut self, dims: Vec<usize>) -> Result<Self> {
        if dims.len() != self.order() {
            return Err(TensorError::dims(format!(
                "{} dims given for an order-{} tensor",
                dims.len(),
                self.order()
            )));
        }
        self = Self::from_parts(dims, self.indices, self.values)?;
        Ok(self)
    }

    /// Merge duplicate coordinates by summing, drop exact zeros, sort under
    /// the identity mode order.
    pub fn canonicalize(&self) -> CooTensor {
        let n = self.order();
        let identity = ModeOrder::identity(n);
        let perm = self.sorted_permutation(&identity);
        let mut indices: Vec<u32> = Vec::with_capacity(self.indices.len());
        let mut values: Vec<f64> = Vec::with_capacity(self.values.len());
        let mut pending: Option<(usize, f64)> = None;
        let flush = |pending: Option<(usize, f64)>, indices: &mut Vec<u32>, values: &mut Vec<f64>| {
            if let Some((e, v)) = pending {
                if v != 0.0 {
                    indices.extend_from_slice(self.index(e));
                    values.push(v);
                }
            }
        };
        for e in perm {
            match pending {
                Some((p, acc)) if self.index(p) == self.index(e) => {
                    pending = Some((p, acc + self.values[e]));
                }
                _ => {
                    flush(pending, &mut indices, &mut values);
                    pending = Some((e, self.values[e]));
                }
            }
        }
        flush(pending, &mut indices, &mut values);
        CooTensor {
            dims: self.dims.clone(),
            indices,
            values,
            sorted_under: Some(identity),
        }
    }

    /// Stable lexicographic sort under `mode_order`.
    pub fn sort_by_mode_order(&self, mode_order: &ModeOrder) -> Result<CooTensor> {
        mode_order.check_order(self.order())?;
        let perm = self.sorted_permutation(mode_order);
        let mut out = self.select(&perm);
        out.sorted_under = Some(mode_order.clone());
        Ok(out)
    }

    /// Whether entries are lexicographically nondecreasing under `mode_order`.
    pub fn is_sorted_by(&self, mode_order: &ModeOrder) -> bool {
        (1..self.nnz()).all(|e| {
            compare_under(self.index(e - 1), self.index(e), mode_order.as_slice())
                != Ordering::Greater
        })
    }

    fn sorted_permutation(&self, mode_order: &ModeOrder) -> Vec<usize> {
        let order = mode_order.as_slice();
        let mut perm: Vec<usize> = (0..self.nnz()).collect();
        let cmp = |a: &usize, b: &usize| compare_under(self.index(*a), self.index(*b), order);
        #[cfg(feature = "parallel")]
        if perm.len() > 1 << 16 {
            use rayon::slice::ParallelSliceMut;
            perm.par_sort_by(cmp);
            return perm;
        }
        perm.sort_by(cmp);
        perm
    }
}

/// Lexicographic comparison of two index tuples under a mode order.
pub fn compare_under(a: &[u32], b: &[u32], order: &[usize]) -> Ordering {
    for &m in order {
        match a[m].cmp(&b[m]) {
            Ordering::Equal => continue,
            other => return other,
        }
    }
    Ordering::Equal
}
