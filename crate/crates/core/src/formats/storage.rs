//! Index-storage accounting in 4-byte words. Values are excluded.
//!
//! Pointer arrays are counted as `n` words for `n` nodes; the trailing
//! sentinel offset is not counted.

use serde::{Deserialize, Serialize};

use super::csf::CsfTensor;
use super::hybrid::{CslSlices, HbCsfTensor};
use crate::coo::{CooTensor, ModeOrder};
use crate::stats::run_lengths;

pub const WORD_BYTES: usize = 4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FormatTag {
    Coo,
    Csf,
    Bcsf,
    Csl,
    Hbcsf,
}

impl std::fmt::Display for FormatTag {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            FormatTag::Coo => "coo",
            FormatTag::Csf => "csf",
            FormatTag::Bcsf => "bcsf",
            FormatTag::Csl => "csl",
            FormatTag::Hbcsf => "hbcsf",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PartReport {
    pub label: FormatTag,
    pub slices: usize,
    pub fibers: usize,
    pub nnz: usize,
    pub words: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StorageReport {
    pub format: FormatTag,
    pub index_words: usize,
    pub bytes: usize,
    pub parts: Vec<PartReport>,
}

impl StorageReport {
    fn from_parts(format: FormatTag, parts: Vec<PartReport>) -> Self {
        let index_words = parts.iter().map(|p| p.words).sum();
        StorageReport {
            format,
            index_words,
            bytes: index_words * WORD_BYTES,
            parts,
        }
    }
}

/// Precision assumed for value storage in reports.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ValuePrecision {
    F32,
    F64,
}

impl ValuePrecision {
    pub fn value_bytes(self, nnz: usize) -> usize {
        nnz * match self {
            ValuePrecision::F32 => 4,
            ValuePrecision::F64 => 8,
        }
    }
}

pub trait IndexStorage {
    fn storage_words(&self) -> StorageReport;
}

fn coo_part(t: &CooTensor) -> PartReport {
    let identity;
    let order = match t.sorted_under() {
        Some(o) => o,
        None => {
            identity = ModeOrder::identity(t.order());
            &identity
        }
    };
    let sorted;
    let src = if t.is_sorted_by(order) {
        t
    } else {
        sorted = t.sort_by_mode_order(order).expect("order matches");
        &sorted
    };
    PartReport {
        label: FormatTag::Coo,
        slices: run_lengths(src, order.as_slice(), 1).len(),
        fibers: run_lengths(src, order.as_slice(), t.order() - 1).len(),
        nnz: t.nnz(),
        words: t.order() * t.nnz(),
    }
}

fn csf_part(t: &CsfTensor) -> PartReport {
    let n = t.order();
    let internal: usize = (0..n - 1).map(|d| 2 * t.level_len(d)).sum();
    PartReport {
        label: if t.is_fiber_split() {
            FormatTag::Bcsf
        } else {
            FormatTag::Csf
        },
        slices: t.slice_count(),
        fibers: t.fiber_count(),
        nnz: t.nnz(),
        words: internal + t.nnz(),
    }
}

fn csl_part(s: &CslSlices) -> PartReport {
    PartReport {
        label: FormatTag::Csl,
        slices: s.slice_count(),
        fibers: s.nnz(),
        nnz: s.nnz(),
        words: 2 * s.slice_count() + (s.order() - 1) * s.nnz(),
    }
}

impl IndexStorage for CooTensor {
    fn storage_words(&self) -> StorageReport {
        StorageReport::from_parts(FormatTag::Coo, vec![coo_part(self)])
    }
}

impl IndexStorage for CsfTensor {
    fn storage_words(&self) -> StorageReport {
        let part = csf_part(self);
        StorageReport::from_parts(part.label, vec![part])
    }
}

impl IndexStorage for CslSlices {
    fn storage_words(&self) -> StorageReport {
        StorageReport::from_parts(FormatTag::Csl, vec![csl_part(self)])
    }
}

impl IndexStorage for HbCsfTensor {
    fn storage_words(&self) -> StorageReport {
        let mut coo = coo_part(&self.coo);
        // each COO-part slice holds one nonzero
        coo.slices = self.coo.nnz();
        StorageReport::from_parts(
            FormatTag::Hbcsf,
            vec![coo, csl_part(&self.csl), csf_part(&self.csf)],
        )
    }
}

pub fn storage_words<T: IndexStorage + ?Sized>(x: &T) -> StorageReport {
    x.storage_words()
}
