//! MT19937 pseudorandom generator.
//!
//! Seeds that fit in 32 bits use the classic `init_genrand` routine, so
//! `make_prng(5489)` reproduces the reference stream of `std::mt19937`.
//! Wider seeds go through `init_by_array` with the seed split into
//! little-endian 32-bit words.

use crate::error::{Error, Result};
use rand_core::{impls, RngCore};

const N: usize = 624;
const M: usize = 397;
const MATRIX_A: u32 = 0x9908_b0df;
const UPPER_MASK: u32 = 0x8000_0000;
const LOWER_MASK: u32 = 0x7fff_ffff;

/// 32-bit Mersenne Twister.
#[derive(Clone)]
pub struct Mt19937 {
    state: Box<[u32; N]>,
    index: usize,
}

impl std::fmt::Debug for Mt19937 {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Mt19937").field("index", &self.index).finish()
    }
}

impl Mt19937 {
    pub fn new(seed: u32) -> Self {
        let mut state = Box::new([0u32; N]);
        state[0] = seed;
        for i in 1..N {
            let prev = state[i - 1];
            state[i] = 1_812_433_253u32
                .wrapping_mul(prev ^ (prev >> 30))
                .wrapping_add(i as u32);
        }
        Mt19937 { state, index: N }
    }

    pub fn from_key(key: &[u32]) -> Self {
        let mut mt = Mt19937::new(19_650_218);
        let s = &mut mt.state;
        let (mut i, mut j) = (1usize, 0usize);
        let len = key.len().max(1);
        for _ in 0..N.max(len) {
            let prev = s[i - 1];
            s[i] = (s[i] ^ (prev ^ (prev >> 30)).wrapping_mul(1_664_525))
                .wrapping_add(key.get(j).copied().unwrap_or(0))
                .wrapping_add(j as u32);
            i += 1;
            j += 1;
            if i >= N {
                s[0] = s[N - 1];
                i = 1;
            }
            if j >= len {
                j = 0;
            }
        }
        for _ in 0..N - 1 {
            let prev = s[i - 1];
            s[i] = (s[i] ^ (prev ^ (prev >> 30)).wrapping_mul(1_566_083_941))
                .wrapping_sub(i as u32);
            i += 1;
            if i >= N {
                s[0] = s[N - 1];
                i = 1;
            }
        }
        s[0] = UPPER_MASK;
        mt
    }

    fn twist(&mut self) {
        let s = &mut self.state;
        for k in 0..N {
            let y = (s[k] & UPPER_MASK) | (s[(k + 1) % N] & LOWER_MASK);
            let mut next = s[(k + M) % N] ^ (y >> 1);
            if y & 1 != 0 {
                next ^= MATRIX_A;
            }
            s[k] = next;
        }
        self.index = 0;
    }

    pub fn next_word(&mut self) -> u32 {
        if self.index >= N {
            self.twist();
        }
        let mut y = self.state[self.index];
        self.index += 1;
        y ^= y >> 11;
        y ^= (y << 7) & 0x9d2c_5680;
        y ^= (y << 15) & 0xefc6_0000;
        y ^ (y >> 18)
    }
}

impl RngCore for Mt19937 {
    fn next_u32(&mut self) -> u32 {
        self.next_word()
    }

    fn next_u64(&mut self) -> u64 {
        impls::next_u64_via_u32(self)
    }

    fn fill_bytes(&mut self, dst: &mut [u8]) {
        impls::fill_bytes_via_next(self, dst)
    }
}

/// Deterministic generator for a 64-bit seed.
pub fn make_prng(seed: u64) -> Mt19937 {
    match u32::try_from(seed) {
        Ok(s) => Mt19937::new(s),
        Err(_) => Mt19937::from_key(&[seed as u32, (seed >> 32) as u32]),
    }
}

/// `n` uniformly distributed bits (most significant bit of each draw).
pub fn generate_bits(prng: &mut Mt19937, n: usize) -> Result<Vec<u8>> {
    if n == 0 {
        return Err(Error::EmptyRequest("bit count must be at least 1"));
    }
    Ok((0..n).map(|_| (prng.next_word() >> 31) as u8).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reference_stream_matches_standard_mt19937() {
        // numpy.random.RandomState(5489) raw draws
        let mut rng = make_prng(5489);
        assert_eq!(rng.next_word(), 3_499_211_612);
        assert_eq!(rng.next_word(), 581_869_302);
        assert_eq!(rng.next_word(), 3_890_346_734);
    }

    #[test]
    fn array_seeding_matches_python_random() {
        // random.Random(7).getrandbits(32)
        let mut rng = Mt19937::from_key(&[7]);
        assert_eq!(rng.next_word(), 1_390_851_128);
        assert_eq!(rng.next_word(), 4_071_050_724);
        // random.Random(2**40 + 12345)
        let mut rng = make_prng((1u64 << 40) + 12345);
        assert_eq!(rng.next_word(), 1_332_995_613);
        assert_eq!(rng.next_word(), 1_500_173_691);
        assert_eq!(rng.next_word(), 493_462_063);
    }

    #[test]
    fn identical_seeds_identical_streams() {
        let mut a = make_prng(1);
        let mut b = make_prng(1);
        for _ in 0..1_000_000 {
            assert_eq!(a.next_word(), b.next_word());
        }
    }

    #[test]
    fn distinct_seeds_diverge_early() {
        let mut a = make_prng(1);
        let mut b = make_prng(2);
        let same = (0..64).filter(|_| a.next_word() == b.next_word()).count();
        assert!(same < 64);
    }

    #[test]
    fn bits_length_and_balance() {
        let mut rng = make_prng(11);
        assert_eq!(generate_bits(&mut rng, 1 << 21).unwrap().len(), 2_097_152);
        let bits = generate_bits(&mut make_prng(3), 100_000).unwrap();
        assert!(bits.iter().all(|&b| b <= 1));
        let mean = bits.iter().map(|&b| b as f64).sum::<f64>() / bits.len() as f64;
        // 0.01 is > 6 standard deviations of a fair binomial mean at n = 1e5
        assert!((mean - 0.5).abs() < 0.01, "mean {mean}");
    }

    #[test]
    fn short_pattern_is_reproducible() {
        let a = generate_bits(&mut make_prng(42), 8).unwrap();
        let b = generate_bits(&mut make_prng(42), 8).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn zero_bits_is_an_error() {
        assert!(matches!(
            generate_bits(&mut make_prng(0), 0),
            Err(Error::EmptyRequest(_))
        ));
    }
}
