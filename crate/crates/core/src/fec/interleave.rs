use rand::seq::SliceRandom;

use crate::error::{Error, Result};
use crate::rng::stream;

const INTERLEAVER_STREAM: u64 = 0x1E7E;

/// Seeded random permutation: `out[i] = in[perm[i]]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Interleaver {
    perm: Vec<usize>,
}

impl Interleaver {
    pub fn new(len: usize, seed: u64) -> Self {
        let mut perm: Vec<usize> = (0..len).collect();
        perm.shuffle(&mut stream(seed, &[INTERLEAVER_STREAM, len as u64]));
        Self { perm }
    }

    pub fn permutation(&self) -> &[usize] {
        &self.perm
    }

    pub fn len(&self) -> usize {
        self.perm.len()
    }

    pub fn is_empty(&self) -> bool {
        self.perm.is_empty()
    }

    fn check(&self, n: usize) -> Result<()> {
        if n == self.perm.len() {
            Ok(())
        } else {
            Err(Error::LengthMismatch {
                expected: self.perm.len(),
                actual: n,
            })
        }
    }

    pub fn interleave<T: Copy>(&self, x: &[T]) -> Result<Vec<T>> {
        self.check(x.len())?;
        Ok(self.perm.iter().map(|&p| x[p]).collect())
    }

    pub fn deinterleave<T: Copy + Default>(&self, x: &[T]) -> Result<Vec<T>> {
        self.check(x.len())?;
        let mut out = vec![T::default(); x.len()];
        for (i, &p) in self.perm.iter().enumerate() {
            out[p] = x[i];
        }
        Ok(out)
    }
}
