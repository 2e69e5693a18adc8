use std::iter::Sum;
use std::ops::{Add, AddAssign};

use serde::{Deserialize, Serialize};

/// Scalar multiply/add tally for one kernel invocation.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct OpCount {
    pub muls: u64,
    pub adds: u64,
}

impl OpCount {
    pub fn new(muls: u64, adds: u64) -> Self {
        OpCount { muls, adds }
    }

    pub fn total(&self) -> u64 {
        self.muls + self.adds
    }

    #[inline]
    pub(crate) fn mul(&mut self, n: usize) {
        self.muls += n as u64;
    }

    #[inline]
    pub(crate) fn add(&mut self, n: usize) {
        self.adds += n as u64;
    }
}

impl Add for OpCount {
    type Output = OpCount;
    fn add(self, o: OpCount) -> OpCount {
        OpCount {
            muls: self.muls + o.muls,
            adds: self.adds + o.adds,
        }
    }
}

impl AddAssign for OpCount {
    fn add_assign(&mut self, o: OpCount) {
        self.muls += o.muls;
        self.adds += o.adds;
    }
}

impl Sum for OpCount {
    fn sum<I: Iterator<Item = OpCount>>(iter: I) -> OpCount {
        iter.fold(OpCount::default(), |a, b| a + b)
    }
}
