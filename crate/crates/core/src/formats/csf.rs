use std::ops::Range;

use crate::coo::{CooTensor, ModeOrder};
use crate::error::{Result, TensorError};

/// Compressed sparse fiber tree.
///
/// Level `d` (for `d < N-1`) holds `n_d` nodes: `idx[d][p]` is the node's
/// index in mode `mode_order[d]` and `ptr[d][p]..ptr[d][p+1]` its children at
/// level `d+1`. The leaf level is `leaf_idx`/`values` (length `M`). Only
/// nonempty nodes are stored. Level 0 nodes are slices and level `N-2`
/// nodes are fibers.
///
/// After fiber splitting, a fiber may appear as several consecutive segments
/// sharing the same index; `is_fiber_split` records that the strict ordering
/// of sibling indices at level `N-2` has been relaxed.
#[derive(Debug, Clone, PartialEq)]
pub struct CsfTensor {
    dims: Vec<usize>,
    mode_order: ModeOrder,
    ptr: Vec<Vec<usize>>,
    idx: Vec<Vec<u32>>,
    leaf_idx: Vec<u32>,
    values: Vec<f64>,
    fiber_split: bool,
}

impl CsfTensor {
    pub fn build(t: &CooTensor, mode_order: &ModeOrder) -> Result<CsfTensor> {
        let sorted = if t.sorted_under() == Some(mode_order) {
            t.clone()
        } else {
            t.sort_by_mode_order(mode_order)?
        };
        let order = mode_order.as_slice();
        let n = t.order();
        let mut ptr: Vec<Vec<usize>> = vec![Vec::new(); n - 1];
        let mut idx: Vec<Vec<u32>> = vec![Vec::new(); n - 1];
        let mut leaf_idx = Vec::with_capacity(t.nnz());
        let mut values = Vec::with_capacity(t.nnz());

        for e in 0..sorted.nnz() {
            let cur = sorted.index(e);
            // First level at which this entry leaves the previous entry's path.
            let start = if e == 0 {
                0
            } else {
                let prev = sorted.index(e - 1);
                (0..n - 1)
                    .find(|&d| prev[order[d]] != cur[order[d]])
                    .unwrap_or(n - 1)
            };
            for d in start..n - 1 {
                let child_len = if d + 1 < n - 1 {
                    idx[d + 1].len()
                } else {
                    leaf_idx.len()
                };
                ptr[d].push(child_len);
                idx[d].push(cur[order[d]]);
            }
            leaf_idx.push(cur[order[n - 1]]);
            values.push(sorted.value(e));
        }
        for d in 0..n - 1 {
            let total = if d + 1 < n - 1 {
                idx[d + 1].len()
            } else {
                leaf_idx.len()
            };
            ptr[d].push(total);
        }
        Ok(CsfTensor {
            dims: t.dims().to_vec(),
            mode_order: mode_order.clone(),
            ptr,
            idx,
            leaf_idx,
            values,
            fiber_split: false,
        })
    }

    pub(crate) fn from_raw_parts(
        dims: Vec<usize>,
        mode_order: ModeOrder,
        ptr: Vec<Vec<usize>>,
        idx: Vec<Vec<u32>>,
        leaf_idx: Vec<u32>,
        values: Vec<f64>,
        fiber_split: bool,
    ) -> CsfTensor {
        CsfTensor {
            dims,
            mode_order,
            ptr,
            idx,
            leaf_idx,
            values,
            fiber_split,
        }
    }

    pub fn order(&self) -> usize {
        self.dims.len()
    }

    /// Dimensions in original mode numbering.
    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    /// Dimensions listed in tree-level order.
    pub fn permuted_dims(&self) -> Vec<usize> {
        self.mode_order
            .as_slice()
            .iter()
            .map(|&m| self.dims[m])
            .collect()
    }

    pub fn mode_order(&self) -> &ModeOrder {
        &self.mode_order
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    /// Number of nodes at level `d`; level `N-1` is the nonzeros.
    pub fn level_len(&self, d: usize) -> usize {
        if d + 1 < self.order() {
            self.idx[d].len()
        } else {
            self.values.len()
        }
    }

    pub fn slice_count(&self) -> usize {
        self.level_len(0)
    }

    /// Level `N-2` node count (fiber segments when split).
    pub fn fiber_count(&self) -> usize {
        self.level_len(self.order() - 2)
    }

    pub fn ptr(&self, d: usize) -> &[usize] {
        &self.ptr[d]
    }

    pub fn idx(&self, d: usize) -> &[u32] {
        &self.idx[d]
    }

    pub fn leaf_idx(&self) -> &[u32] {
        &self.leaf_idx
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn is_fiber_split(&self) -> bool {
        self.fiber_split
    }

    pub fn children(&self, d: usize, node: usize) -> Range<usize> {
        self.ptr[d][node]..self.ptr[d][node + 1]
    }

    /// Positions of the level-`N-2` nodes under node `node` of level `d`.
    pub fn fiber_span(&self, d: usize, node: usize) -> Range<usize> {
        let fiber_level = self.order() - 2;
        let (mut lo, mut hi) = (node, node + 1);
        for l in d..fiber_level {
            lo = self.ptr[l][lo];
            hi = self.ptr[l][hi];
        }
        lo..hi
    }

    /// Positions of the nonzeros under node `node` of level `d`.
    pub fn leaf_span(&self, d: usize, node: usize) -> Range<usize> {
        let (mut lo, mut hi) = (node, node + 1);
        for l in d..self.order() - 1 {
            lo = self.ptr[l][lo];
            hi = self.ptr[l][hi];
        }
        lo..hi
    }

    pub fn slice_nnz(&self, s: usize) -> usize {
        self.leaf_span(0, s).len()
    }

    pub fn fiber_nnz(&self, f: usize) -> usize {
        self.children(self.order() - 2, f).len()
    }

    /// Per-nonzero index tuples in original mode numbering, in tree order.
    pub fn flatten(&self) -> CooTensor {
        let n = self.order();
        let order = self.mode_order.as_slice();
        let mut indices = Vec::with_capacity(self.nnz() * n);
        let mut path = vec![0u32; n];
        self.walk(0, 0..self.level_len(0), &mut path, &mut |path: &[u32]| {
            let mut full = vec![0u32; n];
            for (d, &m) in order.iter().enumerate() {
                full[m] = path[d];
            }
            indices.extend_from_slice(&full);
        });
        CooTensor::from_parts(self.dims.clone(), indices, self.values.clone())
            .expect("tree indices lie within dims")
    }

    fn walk(&self, d: usize, nodes: Range<usize>, path: &mut [u32], emit: &mut impl FnMut(&[u32])) {
        let n = self.order();
        if d == n - 1 {
            for p in nodes {
                path[d] = self.leaf_idx[p];
                emit(path);
            }
            return;
        }
        for p in nodes {
            path[d] = self.idx[d][p];
            self.walk(d + 1, self.children(d, p), path, emit);
        }
    }

    /// Require the tree's slice mode to be `mode`.
    pub fn expect_slice_mode(&self, mode: usize) -> Result<()> {
        if self.mode_order.slice_mode() != mode {
            return Err(TensorError::arg(format!(
                "representation is rooted at mode {}, requested mode {mode}",
                self.mode_order.slice_mode()
            )));
        }
        Ok(())
    }

    /// Check the structural invariants; used by tests and after transforms.
    pub fn validate(&self) -> Result<()> {
        let n = self.order();
        for d in 0..n - 1 {
            let p = &self.ptr[d];
            if p.len() != self.idx[d].len() + 1 || p[0] != 0 || *p.last().unwrap() != self.level_len(d + 1) {
                return Err(TensorError::arg(format!("level {d}: malformed pointer array")));
            }
            for node in 0..self.idx[d].len() {
                let ch = self.children(d, node);
                if ch.is_empty() {
                    return Err(TensorError::arg(format!("level {d}: empty node {node}")));
                }
                let relaxed = self.fiber_split && d + 1 == n - 2;
                let child_idx: &[u32] = if d + 1 < n - 1 { &self.idx[d + 1] } else { &self.leaf_idx };
                for c in ch.start + 1..ch.end {
                    let ok = if relaxed {
                        child_idx[c - 1] <= child_idx[c]
                    } else {
                        child_idx[c - 1] < child_idx[c]
                    };
                    if !ok {
                        return Err(TensorError::arg(format!(
                            "level {}: children of node {node} out of order",
                            d + 1
                        )));
                    }
                }
            }
            if d == 0 {
                for s in 1..self.idx[0].len() {
                    if self.idx[0][s - 1] >= self.idx[0][s] {
                        return Err(TensorError::arg("slices out of order"));
                    }
                }
            }
        }
        Ok(())
    }
}

pub fn build_csf(t: &CooTensor, mode_order: &ModeOrder) -> Result<CsfTensor> {
    CsfTensor::build(t, mode_order)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn singleton() {
        let t = CooTensor::from_entries(vec![2, 2, 2], vec![(vec![1, 0, 1], 3.0)]).unwrap();
        let c = build_csf(&t, &ModeOrder::identity(3)).unwrap();
        assert_eq!(c.slice_count(), 1);
        assert_eq!(c.fiber_count(), 1);
        assert_eq!(c.ptr(0), &[0, 1]);
        assert_eq!(c.ptr(1), &[0, 1]);
        assert_eq!(c.idx(0), &[1]);
        assert_eq!(c.idx(1), &[0]);
        assert_eq!(c.leaf_idx(), &[1]);
        c.validate().unwrap();
    }

    #[test]
    fn empty_tensor_has_sentinel_only_pointers() {
        let t = CooTensor::empty(vec![2, 2, 2]).unwrap();
        let c = build_csf(&t, &ModeOrder::identity(3)).unwrap();
        assert_eq!(c.ptr(0), &[0]);
        assert_eq!(c.ptr(1), &[0]);
        assert!(c.idx(0).is_empty() && c.leaf_idx().is_empty());
        assert!(c.flatten().is_empty());
    }

    #[test]
    fn flatten_matches_sorted_coo() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for order in [3usize, 4] {
            let dims: Vec<usize> = (0..order).map(|_| rng.gen_range(2..9)).collect();
            let entries: Vec<(Vec<u32>, f64)> = (0..100)
                .map(|_| {
                    (
                        dims.iter().map(|&d| rng.gen_range(0..d as u32)).collect(),
                        rng.gen_range(0.1..1.0),
                    )
                })
                .collect();
            let t = CooTensor::from_entries(dims.clone(), entries).unwrap().canonicalize();
            let mut perm: Vec<usize> = (0..order).collect();
            perm.reverse();
            let mo = ModeOrder::new(perm).unwrap();
            let c = build_csf(&t, &mo).unwrap();
            c.validate().unwrap();
            let sorted = t.sort_by_mode_order(&mo).unwrap();
            let flat = c.flatten();
            assert_eq!(flat.raw_indices(), sorted.raw_indices());
            assert_eq!(flat.values(), sorted.values());
        }
    }
}
