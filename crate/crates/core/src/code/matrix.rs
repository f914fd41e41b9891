//! Small systematic codes given by a generator matrix.

/// Systematic generator-matrix code; row `i` is the codeword of the `i`-th
/// message bit (leftmost first), stored with bit `n-1` as the leftmost position.
#[derive(Debug, Clone)]
pub(crate) struct MatrixCode {
    radius: usize,
    codewords: Vec<u64>,
}

/// Decoding enumerates all `2^k` codewords, so `k` stays small.
pub(crate) const MAX_MATRIX_K: usize = 16;

impl MatrixCode {
    pub(crate) fn new(n: usize, rows: Vec<u64>, radius: usize) -> Self {
        let k = rows.len();
        assert!(n <= 64 && k <= MAX_MATRIX_K && k <= n);
        let codewords = (0..1u64 << k)
            .map(|m| {
                (0..k)
                    .filter(|&i| m >> (k - 1 - i) & 1 == 1)
                    .fold(0u64, |acc, i| acc ^ rows[i])
            })
            .collect();
        Self { radius, codewords }
    }

    /// Hamming(7,4,3) as `[I_4 | P]`.
    pub(crate) fn hamming_7_4() -> Self {
        #[allow(clippy::unusual_byte_groupings)] // grouped as I_4 | P
        let rows = [0b1000_110, 0b0100_101, 0b0010_011, 0b0001_111];
        Self::new(7, rows.to_vec(), 1)
    }

    pub(crate) fn repetition(n: usize) -> Self {
        assert!((1..=64).contains(&n));
        let all = if n == 64 { u64::MAX } else { (1u64 << n) - 1 };
        Self::new(n, vec![all], (n - 1) / 2)
    }

    pub(crate) fn encode(&self, message: u64) -> u64 {
        self.codewords[message as usize]
    }

    pub(crate) fn codewords(&self) -> &[u64] {
        &self.codewords
    }

    /// Unique message whose codeword lies within the correction radius.
    pub(crate) fn correct(&self, word: u64) -> Option<(u64, usize)> {
        let mut hit = None;
        for (m, &c) in self.codewords.iter().enumerate() {
            let dist = (c ^ word).count_ones() as usize;
            if dist <= self.radius {
                if hit.is_some() {
                    return None;
                }
                hit = Some((m as u64, dist));
            }
        }
        hit.map(|(m, dist)| (self.codewords[m as usize], dist))
    }
}
