//! Sparse tensor storage formats, MTTKRP kernels, load balancing and CP-ALS.
//!
//! Tensors enter as a [`CooTensor`] (usually parsed from a FROSTT `.tns`
//! file) and are compressed into [`CsfTensor`], [`CslSlices`] or the hybrid
//! [`HbCsfTensor`]. Every format implements [`Mttkrp`] and reports its index
//! storage through [`IndexStorage`].
//!
//! The `parallel` feature (on by default) runs kernels on rayon; without it,
//! [`Exec::Parallel`] falls back to the sequential path.

pub mod balance;
pub mod coo;
pub mod cpd;
mod error;
pub mod formats;
pub mod frostt;
pub mod gen;
pub mod kernels;
mod par;
pub mod repr;
pub mod sim;
pub mod stats;

pub use balance::{assign_slice_blocks, build_bcsf, split_fibers, split_hbcsf, BlockSchedule, SplitConfig};
pub use coo::{CooTensor, ModeOrder};
pub use cpd::{cp_als, CpdConfig, CpdOutput, KruskalModel};
pub use error::{Result, TensorError};
pub use formats::{CslSlices, CsfTensor, HbCsfTensor, IndexStorage, StorageReport};
pub use frostt::{parse_frostt, write_frostt};
pub use kernels::{FactorMatrix, Mttkrp, OpCount};
pub use par::{num_threads, set_num_threads, Exec};
pub use repr::{Format, ModeRep, ModeReps};
pub use sim::{simulate, MachineModel, SimReport};
