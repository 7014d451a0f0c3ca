use std::ops::AddAssign;

use serde::Serialize;

/// Floating-point operation tally.
///
/// A fused multiply-add is booked as one multiply plus one add. Divisions and
/// square roots share a bucket.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
pub struct FlopCounter {
    pub adds: u64,
    pub muls: u64,
    pub divs_sqrts: u64,
}

impl FlopCounter {
    pub fn new() -> Self {
        Self::default()
    }

    #[inline]
    pub fn add(&mut self, n: u64) {
        self.adds += n;
    }

    #[inline]
    pub fn mul(&mut self, n: u64) {
        self.muls += n;
    }

    #[inline]
    pub fn fma(&mut self, n: u64) {
        self.adds += n;
        self.muls += n;
    }

    #[inline]
    pub fn div_sqrt(&mut self, n: u64) {
        self.divs_sqrts += n;
    }

    pub fn total(&self) -> u64 {
        self.adds + self.muls + self.divs_sqrts
    }

    pub fn reset(&mut self) {
        *self = Self::default();
    }

    /// Counts accrued since `earlier`.
    pub fn since(&self, earlier: &FlopCounter) -> FlopCounter {
        FlopCounter {
            adds: self.adds - earlier.adds,
            muls: self.muls - earlier.muls,
            divs_sqrts: self.divs_sqrts - earlier.divs_sqrts,
        }
    }
}

impl AddAssign for FlopCounter {
    fn add_assign(&mut self, rhs: Self) {
        self.adds += rhs.adds;
        self.muls += rhs.muls;
        self.divs_sqrts += rhs.divs_sqrts;
    }
}
