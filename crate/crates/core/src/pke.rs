//! Pluggable classical public-key encryption.
//!
//! The only instantiation is `toy-K`: a keyed bijective bit-mixing
//! permutation of a `K`-bit block. It has **no security whatsoever**; public
//! and secret key carry the same permutation key. It exists so the deletion
//! layer has a fixed-length ciphertext to encode, nothing more.

use std::fmt;
use std::str::FromStr;

use rand::RngCore;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::bits::BitString;
use crate::rng::{mix64, SimRng};

const ROUNDS: usize = 8;
pub const KEY_BYTES: usize = 16;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum PkeError {
    #[error("unsupported PKE scheme {0:?}")]
    UnsupportedScheme(String),
    #[error("plaintext has {actual} bits, scheme expects {expected}")]
    LengthMismatch { expected: usize, actual: usize },
    #[error("ciphertext has {actual} bits, scheme produces {expected}")]
    MalformedCiphertext { expected: usize, actual: usize },
    #[error("key material has {0} bytes, expected {KEY_BYTES}")]
    InvalidKey(usize),
}

/// Scheme parameters: ciphertext block length `k` and plaintext length `m <= k`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(into = "String", try_from = "String")]
pub struct PkeScheme {
    block_bits: usize,
    plaintext_bits: usize,
}

impl PkeScheme {
    /// `toy-K` with `m = k`.
    pub fn toy(block_bits: usize) -> Result<Self, PkeError> {
        Self::toy_with_plaintext(block_bits, block_bits)
    }

    pub fn toy_with_plaintext(block_bits: usize, plaintext_bits: usize) -> Result<Self, PkeError> {
        if !(1..=64).contains(&block_bits) || !(1..=block_bits).contains(&plaintext_bits) {
            return Err(PkeError::UnsupportedScheme(format!(
                "toy-{block_bits}/{plaintext_bits}"
            )));
        }
        Ok(Self {
            block_bits,
            plaintext_bits,
        })
    }

    /// Same block length, different plaintext length.
    pub fn with_plaintext_bits(self, plaintext_bits: usize) -> Result<Self, PkeError> {
        Self::toy_with_plaintext(self.block_bits, plaintext_bits)
    }

    /// Ciphertext length `k`.
    pub fn ciphertext_bits(&self) -> usize {
        self.block_bits
    }

    /// Plaintext length `m`.
    pub fn plaintext_bits(&self) -> usize {
        self.plaintext_bits
    }
}

impl fmt::Display for PkeScheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.plaintext_bits == self.block_bits {
            write!(f, "toy-{}", self.block_bits)
        } else {
            write!(f, "toy-{}/{}", self.block_bits, self.plaintext_bits)
        }
    }
}

impl FromStr for PkeScheme {
    type Err = PkeError;

    /// `toy-K` or `toy-K/M`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let unsupported = || PkeError::UnsupportedScheme(s.to_string());
        let rest = s.strip_prefix("toy-").ok_or_else(unsupported)?;
        let (k, m) = match rest.split_once('/') {
            Some((k, m)) => (k, Some(m)),
            None => (rest, None),
        };
        let k: usize = k.parse().map_err(|_| unsupported())?;
        let m: usize = match m {
            Some(m) => m.parse().map_err(|_| unsupported())?,
            None => k,
        };
        Self::toy_with_plaintext(k, m).map_err(|_| unsupported())
    }
}

impl TryFrom<String> for PkeScheme {
    type Error = PkeError;
    fn try_from(s: String) -> Result<Self, Self::Error> {
        s.parse()
    }
}

impl From<PkeScheme> for String {
    fn from(s: PkeScheme) -> String {
        s.to_string()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PublicKey {
    pub scheme: PkeScheme,
    pub bytes: Vec<u8>,
}

#[derive(Clone, PartialEq, Eq)]
pub struct SecretKey {
    pub scheme: PkeScheme,
    pub bytes: Vec<u8>,
}

impl fmt::Debug for SecretKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SecretKey")
            .field("scheme", &self.scheme)
            .field("bytes", &"<redacted>")
            .finish()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct KeyPair {
    pub scheme: PkeScheme,
    /// Carried as metadata only.
    pub lambda: u32,
    pub pk: PublicKey,
    pub sk: SecretKey,
}

/// Fixed-length classical ciphertext.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PkeCiphertext {
    pub bits: BitString,
}

pub fn keygen(scheme: PkeScheme, lambda: u32, rng: &mut SimRng) -> KeyPair {
    let mut bytes = vec![0u8; KEY_BYTES];
    rng.fill_bytes(&mut bytes);
    KeyPair {
        scheme,
        lambda,
        pk: PublicKey {
            scheme,
            bytes: bytes.clone(),
        },
        sk: SecretKey { scheme, bytes },
    }
}

/// The keyed block permutation shared by both key halves.
struct BlockPermutation {
    bits: usize,
    mask: u64,
    xor: [u64; ROUNDS],
    mult: [u64; ROUNDS],
    rot: [u32; ROUNDS],
}

impl BlockPermutation {
    fn new(bits: usize, key: &[u8]) -> Result<Self, PkeError> {
        if key.len() != KEY_BYTES {
            return Err(PkeError::InvalidKey(key.len()));
        }
        let mask = if bits == 64 {
            u64::MAX
        } else {
            (1u64 << bits) - 1
        };
        let lo = u64::from_le_bytes(key[..8].try_into().unwrap());
        let hi = u64::from_le_bytes(key[8..].try_into().unwrap());
        let mut state = mix64(lo ^ mix64(hi ^ bits as u64));
        let mut next = || {
            state = mix64(state);
            state
        };
        let mut xor = [0; ROUNDS];
        let mut mult = [0; ROUNDS];
        let mut rot = [0; ROUNDS];
        for r in 0..ROUNDS {
            xor[r] = next() & mask;
            mult[r] = (next() | 1) & mask;
            rot[r] = (next() % bits as u64) as u32;
        }
        Ok(Self {
            bits,
            mask,
            xor,
            mult,
            rot,
        })
    }

    fn rotl(&self, x: u64, r: u32) -> u64 {
        if r == 0 {
            return x;
        }
        ((x << r) | (x >> (self.bits as u32 - r))) & self.mask
    }

    fn rotr(&self, x: u64, r: u32) -> u64 {
        if r == 0 {
            return x;
        }
        ((x >> r) | (x << (self.bits as u32 - r))) & self.mask
    }

    fn forward(&self, mut x: u64) -> u64 {
        for r in 0..ROUNDS {
            x ^= self.xor[r];
            x = x.wrapping_mul(self.mult[r]) & self.mask;
            x = self.rotl(x, self.rot[r]);
        }
        x
    }

    fn inverse(&self, mut x: u64) -> u64 {
        for r in (0..ROUNDS).rev() {
            x = self.rotr(x, self.rot[r]);
            x = x.wrapping_mul(inverse_mod_pow2(self.mult[r])) & self.mask;
            x ^= self.xor[r];
        }
        x
    }
}

/// Inverse of an odd number modulo 2^64 (Newton iteration).
fn inverse_mod_pow2(a: u64) -> u64 {
    let mut inv = a;
    for _ in 0..6 {
        inv = inv.wrapping_mul(2u64.wrapping_sub(a.wrapping_mul(inv)));
    }
    inv
}

/// Encrypts `m` plaintext bits into a `k`-bit ciphertext; the `k - m` low
/// block bits are random padding.
pub fn pke_encrypt(
    pk: &PublicKey,
    plaintext: &BitString,
    rng: &mut SimRng,
) -> Result<PkeCiphertext, PkeError> {
    let scheme = pk.scheme;
    let (k, m) = (scheme.ciphertext_bits(), scheme.plaintext_bits());
    if plaintext.len() != m {
        return Err(PkeError::LengthMismatch {
            expected: m,
            actual: plaintext.len(),
        });
    }
    let perm = BlockPermutation::new(k, &pk.bytes)?;
    let pad_bits = k - m;
    let pad = if pad_bits == 0 {
        0
    } else {
        rng.next_u64() & ((1u64 << pad_bits) - 1)
    };
    let block = (plaintext.to_u64() << pad_bits) | pad;
    Ok(PkeCiphertext {
        bits: BitString::from_u64(perm.forward(block), k),
    })
}

pub fn pke_decrypt(sk: &SecretKey, ct: &PkeCiphertext) -> Result<BitString, PkeError> {
    let scheme = sk.scheme;
    let (k, m) = (scheme.ciphertext_bits(), scheme.plaintext_bits());
    if ct.bits.len() != k {
        return Err(PkeError::MalformedCiphertext {
            expected: k,
            actual: ct.bits.len(),
        });
    }
    let perm = BlockPermutation::new(k, &sk.bytes)?;
    let block = perm.inverse(ct.bits.to_u64());
    Ok(BitString::from_u64(block >> (k - m), m))
}
