//! Stable seed derivation.
//!
//! A sweep cell is identified by (strategy, environment, ε index, rep
//! index). Each field is fed to 64-bit FNV-1a as its UTF-8 name or its
//! little-endian `u64`, separated by a zero byte, the digest is passed
//! through the splitmix64 finalizer and XORed with the base seed. The
//! environment seed leaves the strategy out, so every strategy in a cell
//! faces the same value path; the strategy seed includes it.

const FNV_OFFSET: u64 = 0xcbf2_9ce4_8422_2325;
const FNV_PRIME: u64 = 0x0000_0100_0000_01b3;

/// 64-bit FNV-1a.
#[derive(Debug, Clone, Copy)]
pub struct Fnv64(u64);

impl Fnv64 {
    pub fn new() -> Self {
        Fnv64(FNV_OFFSET)
    }

    pub fn write(&mut self, bytes: &[u8]) {
        for &b in bytes {
            self.0 ^= u64::from(b);
            self.0 = self.0.wrapping_mul(FNV_PRIME);
        }
    }

    pub fn write_str(&mut self, s: &str) {
        self.write(s.as_bytes());
        self.write(&[0]);
    }

    pub fn write_u64(&mut self, x: u64) {
        self.write(&x.to_le_bytes());
        self.write(&[0]);
    }

    pub fn finish(&self) -> u64 {
        self.0
    }
}

impl Default for Fnv64 {
    fn default() -> Self {
        Self::new()
    }
}

/// The splitmix64 output function.
pub fn mix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Environment seed of a cell repetition.
pub fn env_seed(base: u64, environment: &str, eps_index: usize, rep: usize) -> u64 {
    let mut h = Fnv64::new();
    h.write_str("env");
    h.write_str(environment);
    h.write_u64(eps_index as u64);
    h.write_u64(rep as u64);
    base ^ mix64(h.finish())
}

/// Strategy seed of a cell repetition.
pub fn strategy_seed(base: u64, strategy: &str, environment: &str, eps_index: usize, rep: usize) -> u64 {
    let mut h = Fnv64::new();
    h.write_str("strategy");
    h.write_str(strategy);
    h.write_str(environment);
    h.write_u64(eps_index as u64);
    h.write_u64(rep as u64);
    base ^ mix64(h.finish())
}
