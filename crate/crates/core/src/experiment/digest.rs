use num_complex::Complex64;

/// FNV-1a over the bit patterns of consumed random values.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Digest(pub u64);

impl Default for Digest {
    fn default() -> Self {
        Self(0xcbf2_9ce4_8422_2325)
    }
}

impl Digest {
    pub fn u64(&mut self, x: u64) {
        for byte in x.to_le_bytes() {
            self.0 ^= u64::from(byte);
            self.0 = self.0.wrapping_mul(0x0100_0000_01b3);
        }
    }

    pub fn complex<'a>(&mut self, xs: impl IntoIterator<Item = &'a Complex64>) {
        for x in xs {
            self.u64(x.re.to_bits());
            self.u64(x.im.to_bits());
        }
    }

    pub fn bytes(&mut self, xs: &[u8]) {
        for &x in xs {
            self.u64(u64::from(x));
        }
    }
}
