use serde::{Deserialize, Serialize};

use super::csf::CsfTensor;
use crate::coo::{CooTensor, ModeOrder};
use crate::error::Result;

/// Which encoding a slice receives in the hybrid format.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SliceClass {
    /// Exactly one nonzero.
    Coo,
    /// At least two nonzeros, one per level-1 node.
    Csl,
    /// Everything else.
    Csf,
}

/// Label every slice of an (unsplit) CSF tree.
///
/// For order `N > 3` the test is applied to level-1 nodes, which are the
/// fibers of an order-3 tree.
pub fn classify_slices(csf: &CsfTensor) -> Vec<SliceClass> {
    (0..csf.slice_count())
        .map(|s| {
            if csf.slice_nnz(s) == 1 {
                SliceClass::Coo
            } else if csf
                .children(0, s)
                .all(|c| csf.leaf_span(1, c).len() == 1)
            {
                SliceClass::Csl
            } else {
                SliceClass::Csf
            }
        })
        .collect()
}

/// Compressed slices: slice pointers address nonzeros directly. Each
/// nonzero stores its `N-1` indices below the slice level, in tree order.
#[derive(Debug, Clone, PartialEq)]
pub struct CslSlices {
    dims: Vec<usize>,
    mode_order: ModeOrder,
    slice_ptr: Vec<usize>,
    slice_idx: Vec<u32>,
    sub_idx: Vec<u32>,
    values: Vec<f64>,
}

impl CslSlices {
    fn empty(dims: Vec<usize>, mode_order: ModeOrder) -> Self {
        CslSlices {
            dims,
            mode_order,
            slice_ptr: vec![0],
            slice_idx: Vec::new(),
            sub_idx: Vec::new(),
            values: Vec::new(),
        }
    }

    pub fn order(&self) -> usize {
        self.dims.len()
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn mode_order(&self) -> &ModeOrder {
        &self.mode_order
    }

    pub fn slice_count(&self) -> usize {
        self.slice_idx.len()
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn slice_ptr(&self) -> &[usize] {
        &self.slice_ptr
    }

    pub fn slice_idx(&self) -> &[u32] {
        &self.slice_idx
    }

    /// Indices below the slice level of nonzero `k` (`mode_order[1..]`).
    pub fn sub_idx(&self, k: usize) -> &[u32] {
        let w = self.order() - 1;
        &self.sub_idx[k * w..(k + 1) * w]
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn flatten(&self) -> CooTensor {
        let n = self.order();
        let order = self.mode_order.as_slice();
        let mut indices = Vec::with_capacity(self.nnz() * n);
        for s in 0..self.slice_count() {
            for k in self.slice_ptr[s]..self.slice_ptr[s + 1] {
                let mut full = vec![0u32; n];
                full[order[0]] = self.slice_idx[s];
                for (d, &i) in self.sub_idx(k).iter().enumerate() {
                    full[order[d + 1]] = i;
                }
                indices.extend_from_slice(&full);
            }
        }
        CooTensor::from_parts(self.dims.clone(), indices, self.values.clone())
            .expect("indices lie within dims")
    }
}

/// Hybrid format: single-nonzero slices in COO, all-singleton slices in CSL,
/// the rest in CSF. The three parts cover disjoint slice sets.
#[derive(Debug, Clone, PartialEq)]
pub struct HbCsfTensor {
    pub(crate) dims: Vec<usize>,
    pub(crate) mode_order: ModeOrder,
    pub(crate) coo: CooTensor,
    pub(crate) csl: CslSlices,
    pub(crate) csf: CsfTensor,
}

impl HbCsfTensor {
    pub fn build(t: &CooTensor, mode_order: &ModeOrder) -> Result<HbCsfTensor> {
        let full = CsfTensor::build(t, mode_order)?;
        let classes = classify_slices(&full);
        let flat = full.flatten();
        let order = mode_order.as_slice();
        let n = t.order();

        let mut coo_pos = Vec::new();
        let mut csf_pos = Vec::new();
        let mut csl = CslSlices::empty(t.dims().to_vec(), mode_order.clone());
        for (s, class) in classes.iter().enumerate() {
            let span = full.leaf_span(0, s);
            match class {
                SliceClass::Coo => coo_pos.extend(span),
                SliceClass::Csf => csf_pos.extend(span),
                SliceClass::Csl => {
                    csl.slice_idx.push(full.idx(0)[s]);
                    for e in span {
                        let idx = flat.index(e);
                        csl.sub_idx.extend(order[1..n].iter().map(|&m| idx[m]));
                        csl.values.push(flat.value(e));
                    }
                    csl.slice_ptr.push(csl.values.len());
                }
            }
        }
        let coo = flat.select(&coo_pos).sort_by_mode_order(mode_order)?;
        let csf = CsfTensor::build(&flat.select(&csf_pos), mode_order)?;
        Ok(HbCsfTensor {
            dims: t.dims().to_vec(),
            mode_order: mode_order.clone(),
            coo,
            csl,
            csf,
        })
    }

    pub fn order(&self) -> usize {
        self.dims.len()
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn mode_order(&self) -> &ModeOrder {
        &self.mode_order
    }

    pub fn coo_part(&self) -> &CooTensor {
        &self.coo
    }

    pub fn csl_part(&self) -> &CslSlices {
        &self.csl
    }

    pub fn csf_part(&self) -> &CsfTensor {
        &self.csf
    }

    pub fn nnz(&self) -> usize {
        self.coo.nnz() + self.csl.nnz() + self.csf.nnz()
    }

    /// Slice counts of the (COO, CSL, CSF) parts.
    pub fn census(&self) -> (usize, usize, usize) {
        (self.coo.nnz(), self.csl.slice_count(), self.csf.slice_count())
    }

    /// All nonzeros, sorted under the mode order.
    pub fn flatten(&self) -> CooTensor {
        let parts = [self.coo.clone(), self.csl.flatten(), self.csf.flatten()];
        let mut indices = Vec::with_capacity(self.nnz() * self.order());
        let mut values = Vec::with_capacity(self.nnz());
        for p in &parts {
            indices.extend_from_slice(p.raw_indices());
            values.extend_from_slice(p.values());
        }
        CooTensor::from_parts(self.dims.clone(), indices, values)
            .and_then(|t| t.sort_by_mode_order(&self.mode_order))
            .expect("parts share dims")
    }
}

pub fn build_hbcsf(t: &CooTensor, mode_order: &ModeOrder) -> Result<HbCsfTensor> {
    HbCsfTensor::build(t, mode_order)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn coo(dims: Vec<usize>, es: &[(&[u32], f64)]) -> CooTensor {
        CooTensor::from_entries(dims, es.iter().map(|(i, v)| (i.to_vec(), *v))).unwrap()
    }

    #[test]
    fn classification_rules() {
        let t = coo(
            vec![3, 4, 5],
            &[
                (&[0, 0, 0], 1.0),
                (&[1, 0, 1], 1.0),
                (&[1, 1, 2], 1.0),
                (&[1, 3, 0], 1.0),
                (&[2, 2, 0], 1.0),
                (&[2, 2, 1], 1.0),
                (&[2, 2, 3], 1.0),
                (&[2, 2, 4], 1.0),
            ],
        );
        let csf = CsfTensor::build(&t, &ModeOrder::identity(3)).unwrap();
        assert_eq!(
            classify_slices(&csf),
            vec![SliceClass::Coo, SliceClass::Csl, SliceClass::Csf]
        );
    }

    #[test]
    fn all_single_nonzero_slices_go_to_coo() {
        let t = coo(vec![3, 3, 3], &[(&[0, 1, 2], 1.0), (&[1, 1, 1], 2.0), (&[2, 0, 0], 3.0)]);
        let h = build_hbcsf(&t, &ModeOrder::identity(3)).unwrap();
        assert_eq!(h.coo_part().nnz(), 3);
        assert_eq!(h.csl_part().nnz(), 0);
        assert_eq!(h.csf_part().nnz(), 0);
    }

    #[test]
    fn all_singleton_fibers_go_to_csl() {
        let t = coo(
            vec![2, 3, 3],
            &[(&[0, 0, 1], 1.0), (&[0, 2, 0], 2.0), (&[1, 1, 1], 3.0), (&[1, 2, 2], 4.0)],
        );
        let h = build_hbcsf(&t, &ModeOrder::identity(3)).unwrap();
        assert_eq!(h.csl_part().nnz(), 4);
        assert_eq!(h.csl_part().slice_count(), 2);
        assert_eq!(h.csl_part().sub_idx(1), &[2, 0]);
        assert_eq!(h.coo_part().nnz() + h.csf_part().nnz(), 0);
        assert_eq!(h.flatten(), t.sort_by_mode_order(&ModeOrder::identity(3)).unwrap());
    }

    #[test]
    fn order4_uses_level1_nodes() {
        // slice 0: two level-1 nodes with one nonzero each -> CSL
        // slice 1: one level-1 node holding two nonzeros -> CSF
        let t = coo(
            vec![2, 2, 2, 2],
            &[
                (&[0, 0, 0, 1], 1.0),
                (&[0, 1, 1, 0], 1.0),
                (&[1, 0, 0, 0], 1.0),
                (&[1, 0, 1, 1], 1.0),
            ],
        );
        let csf = CsfTensor::build(&t, &ModeOrder::identity(4)).unwrap();
        assert_eq!(classify_slices(&csf), vec![SliceClass::Csl, SliceClass::Csf]);
        let h = build_hbcsf(&t, &ModeOrder::identity(4)).unwrap();
        assert_eq!(h.csl_part().sub_idx(1), &[1, 1, 0]);
    }
}
