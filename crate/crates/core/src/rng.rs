//! Counter-based random numbers.
//!
//! Every random draw in the simulator is a pure function of a key tuple
//! (seed, stream, counters...). No generator state is shared between
//! cells, agents, or threads, so evaluation order never changes results.

const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;

/// SplitMix64 finalizer.
#[inline]
pub fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Hashes an ordered list of words into one 64-bit value.
#[inline]
pub fn hash_words(words: &[u64]) -> u64 {
    let mut h = GOLDEN;
    for &w in words {
        h = mix64(h ^ w.wrapping_add(GOLDEN)).wrapping_add(h.rotate_left(17));
    }
    mix64(h)
}

/// Maps 64 random bits to a uniform double in `[0, 1)` using the top 53 bits.
#[inline]
pub fn unit_f64(bits: u64) -> f64 {
    (bits >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

/// Uniform draw in `[0, 1)` keyed by `words`.
#[inline]
pub fn keyed_unit(words: &[u64]) -> f64 {
    unit_f64(hash_words(words))
}

/// A keyed stream: the n-th draw is `hash(key, n)`.
///
/// Cloning or splitting never aliases another stream because children get
/// a fresh key derived from the parent key and a label.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct KeyedStream {
    key: u64,
    counter: u64,
}

impl KeyedStream {
    pub fn new(seed: u64, label: u64) -> Self {
        Self {
            key: hash_words(&[seed, label]),
            counter: 0,
        }
    }

    pub fn split(&self, label: u64) -> Self {
        Self {
            key: hash_words(&[self.key, label, 0x5EED]),
            counter: 0,
        }
    }

    pub fn next_u64(&mut self) -> u64 {
        let v = hash_words(&[self.key, self.counter]);
        self.counter += 1;
        v
    }

    pub fn next_f64(&mut self) -> f64 {
        unit_f64(self.next_u64())
    }

    /// Uniform integer in `[0, n)`. Uses rejection to avoid modulo bias.
    pub fn below(&mut self, n: u64) -> u64 {
        assert!(n > 0, "below(0)");
        let zone = u64::MAX - (u64::MAX % n);
        loop {
            let v = self.next_u64();
            if v < zone {
                return v % n;
            }
        }
    }

    pub fn range_usize(&mut self, lo: usize, hi_exclusive: usize) -> usize {
        lo + self.below((hi_exclusive - lo) as u64) as usize
    }

    pub fn shuffle<T>(&mut self, items: &mut [T]) {
        for i in (1..items.len()).rev() {
            let j = self.below(i as u64 + 1) as usize;
            items.swap(i, j);
        }
    }
}
