use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

/// QPP coefficients `(K, f1, f2)` for `π(i) = (f1·i + f2·i²) mod K`.
const QPP_TABLE: &[(usize, usize, usize)] = &[
    (40, 3, 10),
    (48, 7, 12),
    (56, 19, 42),
    (64, 7, 16),
    (72, 7, 18),
    (80, 11, 20),
    (88, 5, 22),
    (96, 11, 24),
    (104, 7, 26),
    (112, 41, 84),
    (120, 103, 90),
    (128, 15, 32),
    (136, 9, 34),
    (144, 17, 108),
    (152, 9, 38),
    (160, 21, 120),
    (168, 101, 84),
    (176, 21, 44),
    (184, 57, 46),
    (192, 23, 48),
    (200, 13, 50),
    (208, 27, 52),
    (216, 11, 36),
    (224, 27, 56),
    (232, 85, 58),
    (240, 29, 60),
    (248, 33, 62),
    (256, 15, 32),
];

const FALLBACK_SEED: u64 = 0x7475_7262_6f5f_7069;

/// Permutation `π` with `interleave(x)[i] = x[π(i)]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Interleaver {
    perm: Vec<usize>,
    inverse: Vec<usize>,
}

impl Interleaver {
    pub fn new(perm: Vec<usize>) -> Result<Self> {
        let mut inverse = vec![usize::MAX; perm.len()];
        for (i, &p) in perm.iter().enumerate() {
            if p >= perm.len() || inverse[p] != usize::MAX {
                return Err(Error::Config("interleaver is not a permutation".into()));
            }
            inverse[p] = i;
        }
        Ok(Self { perm, inverse })
    }

    pub fn qpp(k: usize) -> Option<Self> {
        QPP_TABLE.iter().find(|e| e.0 == k).map(|&(k, f1, f2)| {
            let perm = (0..k).map(|i| (f1 * i + f2 * i * i) % k).collect();
            Self::new(perm).expect("QPP table entries are permutations")
        })
    }

    /// QPP when tabulated for `k`, otherwise a fixed seeded shuffle.
    pub fn for_length(k: usize) -> Self {
        Self::qpp(k).unwrap_or_else(|| {
            let mut perm: Vec<usize> = (0..k).collect();
            perm.shuffle(&mut ChaCha8Rng::seed_from_u64(FALLBACK_SEED ^ k as u64));
            Self::new(perm).expect("shuffle is a permutation")
        })
    }

    pub fn len(&self) -> usize {
        self.perm.len()
    }

    pub fn is_empty(&self) -> bool {
        self.perm.is_empty()
    }

    pub fn permutation(&self) -> &[usize] {
        &self.perm
    }

    pub fn interleave<T: Copy>(&self, x: &[T]) -> Vec<T> {
        self.perm.iter().map(|&p| x[p]).collect()
    }

    pub fn deinterleave<T: Copy>(&self, x: &[T]) -> Vec<T> {
        self.inverse.iter().map(|&i| x[i]).collect()
    }

    #[cfg(test)]
    pub(crate) fn tabulated_lengths() -> impl Iterator<Item = usize> {
        QPP_TABLE.iter().map(|e| e.0)
    }
}
