//! Compressed representations built from a [`CooTensor`](crate::CooTensor):
//! CSF trees, CSL slices and the hybrid HB-CSF layout, with exact
//! index-storage accounting.

mod csf;
mod hybrid;
mod storage;

pub use csf::{build_csf, CsfTensor};
pub use hybrid::{build_hbcsf, classify_slices, CslSlices, HbCsfTensor, SliceClass};
pub use storage::{
    storage_words, FormatTag, IndexStorage, PartReport, StorageReport, ValuePrecision, WORD_BYTES,
};
