//! Binary linear block codes with bounded-distance decoding.

mod bch;
mod matrix;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::bits::BitString;
use crate::rng::SimRng;

use bch::Bch;
use matrix::MatrixCode;

/// Default cap on the number of strings [`hamming_ball`] will materialize.
pub const DEFAULT_BALL_CAP: u128 = 1_000_000;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum CodeError {
    #[error("expected {expected} bits, got {actual}")]
    LengthMismatch { expected: usize, actual: usize },
    #[error("ball of radius {radius} in {n} bits has {size} strings, cap is {cap}")]
    BallTooLarge {
        n: usize,
        radius: usize,
        size: u128,
        cap: u128,
    },
    #[error("unknown code {0:?} (expected bch-31-16-7, hamming-7-4-3 or repetition-N)")]
    UnknownCode(String),
}

/// Code identifiers as used in files and on the command line.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(into = "String", try_from = "String")]
pub enum CodeId {
    Bch31_16_7,
    Hamming7_4_3,
    /// Repetition code of the given odd-or-even length, `k = 1`.
    Repetition(usize),
}

impl fmt::Display for CodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CodeId::Bch31_16_7 => f.write_str("bch-31-16-7"),
            CodeId::Hamming7_4_3 => f.write_str("hamming-7-4-3"),
            CodeId::Repetition(n) => write!(f, "repetition-{n}"),
        }
    }
}

impl FromStr for CodeId {
    type Err = CodeError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "bch-31-16-7" => Ok(CodeId::Bch31_16_7),
            "hamming-7-4-3" => Ok(CodeId::Hamming7_4_3),
            other => other
                .strip_prefix("repetition-")
                .and_then(|n| n.parse::<usize>().ok())
                .filter(|n| (1..=64).contains(n))
                .map(CodeId::Repetition)
                .ok_or_else(|| CodeError::UnknownCode(s.to_string())),
        }
    }
}

impl TryFrom<String> for CodeId {
    type Error = CodeError;
    fn try_from(s: String) -> Result<Self, Self::Error> {
        s.parse()
    }
}

impl From<CodeId> for String {
    fn from(c: CodeId) -> String {
        c.to_string()
    }
}

#[derive(Debug, Clone)]
enum Backend {
    Bch(Bch),
    Matrix(MatrixCode),
}

/// An `(n, k, d)` binary linear code with correction radius `e = (d-1)/2`.
#[derive(Debug, Clone)]
pub struct CodeSpec {
    id: CodeId,
    n: usize,
    k: usize,
    d: usize,
    backend: Backend,
}

/// Result of bounded-distance decoding.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum DecodeOutcome {
    Decoded {
        message: BitString,
        corrected: usize,
    },
    Failure,
}

impl DecodeOutcome {
    pub fn message(&self) -> Option<&BitString> {
        match self {
            DecodeOutcome::Decoded { message, .. } => Some(message),
            DecodeOutcome::Failure => None,
        }
    }
}

impl CodeSpec {
    pub fn from_id(id: CodeId) -> Self {
        match id {
            CodeId::Bch31_16_7 => Self::bch_31_16_7(),
            CodeId::Hamming7_4_3 => Self::hamming_7_4_3(),
            CodeId::Repetition(n) => Self::repetition(n),
        }
    }

    pub fn by_name(name: &str) -> Result<Self, CodeError> {
        Ok(Self::from_id(name.parse()?))
    }

    pub fn bch_31_16_7() -> Self {
        let bch = Bch::bch_31_16();
        Self {
            id: CodeId::Bch31_16_7,
            n: bch.n(),
            k: bch.k(),
            d: 7,
            backend: Backend::Bch(bch),
        }
    }

    pub fn hamming_7_4_3() -> Self {
        Self {
            id: CodeId::Hamming7_4_3,
            n: 7,
            k: 4,
            d: 3,
            backend: Backend::Matrix(MatrixCode::hamming_7_4()),
        }
    }

    pub fn repetition(n: usize) -> Self {
        Self {
            id: CodeId::Repetition(n),
            n,
            k: 1,
            d: n,
            backend: Backend::Matrix(MatrixCode::repetition(n)),
        }
    }

    pub fn id(&self) -> CodeId {
        self.id
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn d(&self) -> usize {
        self.d
    }

    /// Correction radius.
    pub fn e(&self) -> usize {
        (self.d - 1) / 2
    }

    fn check_len(&self, bits: &BitString, expected: usize) -> Result<(), CodeError> {
        if bits.len() != expected {
            return Err(CodeError::LengthMismatch {
                expected,
                actual: bits.len(),
            });
        }
        Ok(())
    }

    pub(crate) fn encode_word(&self, message: u64) -> u64 {
        match &self.backend {
            Backend::Bch(b) => b.encode(message),
            Backend::Matrix(m) => m.encode(message),
        }
    }

    fn correct_word(&self, word: u64) -> Option<(u64, usize)> {
        match &self.backend {
            Backend::Bch(b) => b.correct(word),
            Backend::Matrix(m) => m.correct(word),
        }
    }

    /// Message carried by a codeword (its systematic prefix).
    pub(crate) fn message_of_word(&self, codeword: u64) -> u64 {
        codeword >> (self.n - self.k)
    }

    /// Systematic encoding: the message is the first `k` bits of the codeword.
    pub fn encode(&self, message: &BitString) -> Result<BitString, CodeError> {
        self.check_len(message, self.k)?;
        Ok(BitString::from_u64(
            self.encode_word(message.to_u64()),
            self.n,
        ))
    }

    pub fn decode(&self, word: &BitString) -> Result<DecodeOutcome, CodeError> {
        self.check_len(word, self.n)?;
        Ok(match self.correct_word(word.to_u64()) {
            Some((codeword, corrected)) => DecodeOutcome::Decoded {
                message: BitString::from_u64(self.message_of_word(codeword), self.k),
                corrected,
            },
            None => DecodeOutcome::Failure,
        })
    }

    /// All codewords in message order; only for codes with small `k`.
    pub fn codewords(&self) -> Vec<BitString> {
        assert!(self.k <= 20, "refusing to enumerate 2^{} codewords", self.k);
        match &self.backend {
            Backend::Matrix(m) => m
                .codewords()
                .iter()
                .map(|&c| BitString::from_u64(c, self.n))
                .collect(),
            Backend::Bch(b) => (0..1u64 << self.k)
                .map(|m| BitString::from_u64(b.encode(m), self.n))
                .collect(),
        }
    }
}

fn binomial(n: usize, r: usize) -> u128 {
    if r > n {
        return 0;
    }
    let r = r.min(n - r);
    (0..r).fold(1u128, |acc, i| acc * (n - i) as u128 / (i + 1) as u128)
}

/// Number of strings within distance `radius` of a point in `{0,1}^n`.
pub fn ball_size(n: usize, radius: usize) -> u128 {
    (0..=radius.min(n)).map(|i| binomial(n, i)).sum()
}

/// The Hamming ball of `radius` around `center`.
pub fn hamming_ball(
    center: &BitString,
    radius: usize,
    cap: u128,
) -> Result<Vec<BitString>, CodeError> {
    let n = center.len();
    let size = ball_size(n, radius);
    if size > cap {
        return Err(CodeError::BallTooLarge {
            n,
            radius,
            size,
            cap,
        });
    }
    let mut out = Vec::with_capacity(size as usize);
    let mut positions = Vec::new();
    fn walk(
        center: &BitString,
        positions: &mut Vec<usize>,
        start: usize,
        left: usize,
        out: &mut Vec<BitString>,
    ) {
        if left == 0 {
            let mut s = center.clone();
            for &p in positions.iter() {
                s.flip(p);
            }
            out.push(s);
            return;
        }
        for p in start..center.len() {
            positions.push(p);
            walk(center, positions, p + 1, left - 1, out);
            positions.pop();
        }
    }
    for w in 0..=radius.min(n) {
        walk(center, &mut positions, 0, w, &mut out);
    }
    Ok(out)
}

/// Structural self-test of a code construction.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CodeReport {
    pub code: CodeId,
    /// Minimum distance found (exact when `exhaustive`).
    pub measured_d: usize,
    pub exhaustive: bool,
    /// `2^k * |ball(e)| == 2^n`; `None` when not evaluated exactly.
    pub perfect: Option<bool>,
    pub systematic: bool,
    pub linear: bool,
}

/// Measures minimum distance (exhaustively for `n <= 20`, else over
/// `samples` random codeword pairs) and checks systematic and linear structure.
pub fn verify_code(code: &CodeSpec, samples: usize, rng: &mut SimRng) -> CodeReport {
    let (n, k) = (code.n(), code.k());
    let random_msg = |rng: &mut SimRng| rng.next_u64() & ((1u64 << k) - 1);
    let exhaustive = n <= 20;
    let measured_d = if exhaustive {
        // Linear code: minimum distance is the minimum nonzero weight.
        (1..1u64 << k)
            .map(|m| code.encode_word(m).count_ones() as usize)
            .min()
            .unwrap_or(n)
    } else {
        (0..samples)
            .filter_map(|_| {
                let (a, b) = (random_msg(rng), random_msg(rng));
                (a != b).then(|| (code.encode_word(a) ^ code.encode_word(b)).count_ones() as usize)
            })
            .min()
            .unwrap_or(n)
    };
    let trials = 256.min(1usize << k.min(20));
    let mut systematic = true;
    let mut linear = true;
    for _ in 0..trials {
        let (a, b) = (random_msg(rng), random_msg(rng));
        systematic &= code.message_of_word(code.encode_word(a)) == a;
        linear &= code.encode_word(a ^ b) == code.encode_word(a) ^ code.encode_word(b);
    }
    let perfect = exhaustive.then(|| (ball_size(n, code.e()) << k) == 1u128 << n);
    CodeReport {
        code: code.id(),
        measured_d,
        exhaustive,
        perfect,
        systematic,
        linear,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Nearest-codeword search over every codeword; the independent decoder oracle.
    fn brute_force_decode(code: &CodeSpec, word: &BitString) -> Option<BitString> {
        let within: Vec<(usize, BitString)> = code
            .codewords()
            .into_iter()
            .enumerate()
            .filter(|(_, c)| c.distance(word) <= code.e())
            .map(|(m, _)| (m, BitString::from_u64(m as u64, code.k())))
            .collect();
        match within.as_slice() {
            [(_, m)] => Some(m.clone()),
            [] => None,
            _ => panic!("two codewords within radius: distance below d"),
        }
    }

    #[test]
    fn names_roundtrip() {
        for name in ["bch-31-16-7", "hamming-7-4-3", "repetition-5"] {
            assert_eq!(name.parse::<CodeId>().unwrap().to_string(), name);
        }
        assert!("repetition-0".parse::<CodeId>().is_err());
        assert!("golay".parse::<CodeId>().is_err());
    }

    #[test]
    fn parameters() {
        let bch = CodeSpec::bch_31_16_7();
        assert_eq!((bch.n(), bch.k(), bch.d(), bch.e()), (31, 16, 7, 3));
        let h = CodeSpec::hamming_7_4_3();
        assert_eq!((h.n(), h.k(), h.d(), h.e()), (7, 4, 3, 1));
        let r = CodeSpec::repetition(5);
        assert_eq!((r.n(), r.k(), r.d(), r.e()), (5, 1, 5, 2));
    }

    #[test]
    fn zero_message_encodes_to_zero() {
        for code in [
            CodeSpec::bch_31_16_7(),
            CodeSpec::hamming_7_4_3(),
            CodeSpec::repetition(4),
        ] {
            let c = code.encode(&BitString::zeros(code.k())).unwrap();
            assert_eq!(c, BitString::zeros(code.n()));
        }
    }

    #[test]
    fn bch_toy_ciphertext_is_systematic_prefix() {
        let code = CodeSpec::bch_31_16_7();
        let c: BitString = "1000 1001 1010 1011".parse().unwrap();
        let d = code.encode(&c).unwrap();
        assert_eq!(d.slice(0, 16), c);
        assert_eq!(d.len(), 31);
        assert_eq!(code.decode(&d).unwrap().message(), Some(&c));
    }

    #[test]
    fn length_mismatch() {
        let code = CodeSpec::hamming_7_4_3();
        assert_eq!(
            code.encode(&BitString::zeros(5)),
            Err(CodeError::LengthMismatch {
                expected: 4,
                actual: 5
            })
        );
        assert!(code.decode(&BitString::zeros(6)).is_err());
    }

    #[test]
    fn hamming_pairwise_distance_brute_force() {
        let code = CodeSpec::hamming_7_4_3();
        let words = code.codewords();
        let mut min = usize::MAX;
        let mut pairs = 0;
        for i in 0..words.len() {
            for j in i + 1..words.len() {
                min = min.min(words[i].distance(&words[j]));
                pairs += 1;
            }
        }
        assert_eq!(pairs, 120);
        assert_eq!(min, 3);
    }

    #[test]
    fn hamming_corrects_every_single_error() {
        let code = CodeSpec::hamming_7_4_3();
        let mut cases = 0;
        for m in 0..16u64 {
            let msg = BitString::from_u64(m, 4);
            let c = code.encode(&msg).unwrap();
            for p in 0..7 {
                let mut w = c.clone();
                w.flip(p);
                assert_eq!(code.decode(&w).unwrap().message(), Some(&msg));
                cases += 1;
            }
        }
        assert_eq!(cases, 112);
    }

    #[test]
    fn bch_roundtrip_and_weight_three() {
        let code = CodeSpec::bch_31_16_7();
        let mut rng = SimRng::from_seed(31);
        for _ in 0..1000 {
            let m = BitString::random(16, &mut rng);
            assert_eq!(
                code.decode(&code.encode(&m).unwrap()).unwrap().message(),
                Some(&m)
            );
        }
        for _ in 0..10_000 {
            let m = BitString::random(16, &mut rng);
            let mut w = code.encode(&m).unwrap();
            let weight = 1 + rng.below(3);
            for p in rng.distinct_indices(31, weight) {
                w.flip(p);
            }
            match code.decode(&w).unwrap() {
                DecodeOutcome::Decoded { message, corrected } => {
                    assert_eq!(message, m);
                    assert_eq!(corrected, weight);
                }
                DecodeOutcome::Failure => panic!("weight-{weight} pattern not corrected"),
            }
        }
    }

    #[test]
    fn bch_weight_four_never_silently_wrong() {
        let code = CodeSpec::bch_31_16_7();
        let mut rng = SimRng::from_seed(32);
        for _ in 0..2000 {
            let m = BitString::random(16, &mut rng);
            let mut w = code.encode(&m).unwrap();
            for p in rng.distinct_indices(31, 4) {
                w.flip(p);
            }
            if let DecodeOutcome::Decoded { message, .. } = code.decode(&w).unwrap() {
                assert_ne!(message, m);
                let re = code.encode(&message).unwrap();
                assert!(re.distance(&w) <= 3);
            }
        }
    }

    #[test]
    fn bch_decoder_matches_brute_force_on_random_words() {
        let code = CodeSpec::bch_31_16_7();
        let mut rng = SimRng::from_seed(33);
        let mut decoded = 0;
        for i in 0..300 {
            // Mix of near-codeword and uniform words so both branches are hit.
            let w = if i % 2 == 0 {
                let mut w = code.encode(&BitString::random(16, &mut rng)).unwrap();
                let weight = rng.below(6);
                for p in rng.distinct_indices(31, weight) {
                    w.flip(p);
                }
                w
            } else {
                BitString::random(31, &mut rng)
            };
            let expected = brute_force_decode(&code, &w);
            decoded += expected.is_some() as usize;
            assert_eq!(
                code.decode(&w).unwrap().message().cloned(),
                expected,
                "word {w}"
            );
        }
        assert!(decoded > 50);
    }

    #[test]
    fn bch_exhaustive_minimum_weight_is_seven() {
        let code = CodeSpec::bch_31_16_7();
        let min = (1..1u64 << 16)
            .map(|m| code.encode_word(m).count_ones())
            .min()
            .unwrap();
        assert_eq!(min, 7);
    }

    #[test]
    fn ball_sizes() {
        let zero = BitString::zeros(7);
        assert_eq!(
            hamming_ball(&zero, 0, DEFAULT_BALL_CAP).unwrap(),
            vec![zero.clone()]
        );
        let mut rng = SimRng::from_seed(1);
        for _ in 0..10 {
            let c = BitString::random(7, &mut rng);
            let ball = hamming_ball(&c, 1, DEFAULT_BALL_CAP).unwrap();
            assert_eq!(ball.len(), 8);
            assert!(ball.iter().all(|s| s.distance(&c) <= 1));
        }
        assert_eq!(ball_size(31, 3), 1 + 31 + 465 + 4495);
        assert!(matches!(
            hamming_ball(&BitString::zeros(40), 10, DEFAULT_BALL_CAP),
            Err(CodeError::BallTooLarge { .. })
        ));
    }

    #[test]
    fn hamming_balls_partition_the_space() {
        let code = CodeSpec::hamming_7_4_3();
        let mut seen = vec![0u32; 128];
        for c in code.codewords() {
            for s in hamming_ball(&c, 1, DEFAULT_BALL_CAP).unwrap() {
                seen[s.to_u64() as usize] += 1;
            }
        }
        assert!(seen.iter().all(|&c| c == 1));
    }

    #[test]
    fn verify_code_reports() {
        let mut rng = SimRng::from_seed(2);
        let h = verify_code(&CodeSpec::hamming_7_4_3(), 0, &mut rng);
        assert_eq!(h.measured_d, 3);
        assert_eq!(h.perfect, Some(true));
        assert!(h.systematic && h.linear && h.exhaustive);
        let r = verify_code(&CodeSpec::repetition(5), 0, &mut rng);
        assert_eq!(r.measured_d, 5);
        assert_eq!(r.perfect, Some(true));
        let r4 = verify_code(&CodeSpec::repetition(4), 0, &mut rng);
        assert_eq!(r4.perfect, Some(false));
    }

    #[test]
    fn verify_bch_sampled_distance() {
        let mut rng = SimRng::from_seed(3);
        let report = verify_code(&CodeSpec::bch_31_16_7(), 100_000, &mut rng);
        assert!(!report.exhaustive);
        assert!(report.measured_d >= 7);
        assert!(report.systematic && report.linear);
    }
}
