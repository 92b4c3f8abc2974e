//! Real-multiplication tallies.
//!
//! Detector kernels take a `&mut impl Tally` and report the real-valued
//! multiplications they perform. Counting rules: complex x complex = 4,
//! |z|^2 = 2, real x complex = 2, real x real = 1, and a division counts as
//! one multiplication. Square roots are not counted.

pub trait Tally {
    fn add(&mut self, _n: u64) {}
}

/// Tally that discards everything; compiles away in the hot paths.
#[derive(Debug, Default, Clone, Copy)]
pub struct NoTally;

impl Tally for NoTally {}

/// Accumulating tally.
#[derive(Debug, Default, Clone, Copy, PartialEq, Eq)]
pub struct MulTally(pub u64);

impl Tally for MulTally {
    fn add(&mut self, n: u64) {
        self.0 += n;
    }
}

pub(crate) const CMUL: u64 = 4;
pub(crate) const ABS2: u64 = 2;
pub(crate) const RCMUL: u64 = 2;
