//! Software floating-point operation tallies.
//!
//! Kernels add the number of scalar additions and multiplications they
//! perform to a [`FlopTally`]. Counting happens on the caller's tally so the
//! result does not depend on how element work is spread over threads. With
//! the `flop-count` feature disabled every increment compiles to nothing.

/// Accumulator for counted floating-point operations.
#[derive(Debug, Default, Clone, Copy, PartialEq, Eq)]
pub struct FlopTally(u64);

impl FlopTally {
    pub const fn new() -> Self {
        FlopTally(0)
    }

    #[inline(always)]
    pub fn add(&mut self, n: u64) {
        if cfg!(feature = "flop-count") {
            self.0 += n;
        }
    }

    pub fn merge(&mut self, other: FlopTally) {
        self.0 += other.0;
    }

    pub fn get(&self) -> u64 {
        self.0
    }
}
