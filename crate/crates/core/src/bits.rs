use std::fmt;
use std::ops::BitXor;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::rng::SimRng;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum BitsError {
    #[error("invalid bit character {0:?}")]
    InvalidChar(char),
    #[error("invalid hex string {0:?}")]
    InvalidHex(String),
    #[error("hex value {hex:?} does not fit in {len} bits")]
    HexOverflow { hex: String, len: usize },
    #[error("bit strings differ in length ({0} vs {1})")]
    LengthMismatch(usize, usize),
}

/// Ordered bit string with explicit length. Bit 0 is the leftmost bit.
#[derive(Clone, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(into = "String", try_from = "String")]
pub struct BitString {
    bits: Vec<u8>,
}

impl BitString {
    pub fn zeros(len: usize) -> Self {
        Self { bits: vec![0; len] }
    }

    pub fn from_bits<I, B>(bits: I) -> Self
    where
        I: IntoIterator<Item = B>,
        B: Into<u8>,
    {
        Self {
            bits: bits.into_iter().map(|b| b.into() & 1).collect(),
        }
    }

    pub fn random(len: usize, rng: &mut SimRng) -> Self {
        Self {
            bits: (0..len).map(|_| rng.bit()).collect(),
        }
    }

    /// Low `len` bits of `value`, most significant first.
    pub fn from_u64(value: u64, len: usize) -> Self {
        assert!(len <= 64);
        Self {
            bits: (0..len)
                .map(|i| ((value >> (len - 1 - i)) & 1) as u8)
                .collect(),
        }
    }

    /// Big-endian integer value; panics above 64 bits.
    pub fn to_u64(&self) -> u64 {
        assert!(self.len() <= 64, "bit string too long for u64");
        self.bits.iter().fold(0u64, |acc, &b| (acc << 1) | b as u64)
    }

    /// Parses `len` bits from hex, most significant bit first.
    pub fn from_hex(hex: &str, len: usize) -> Result<Self, BitsError> {
        let trimmed = hex.trim().trim_start_matches("0x");
        let mut bits = Vec::with_capacity(trimmed.len() * 4);
        for c in trimmed.chars() {
            let v = c
                .to_digit(16)
                .ok_or_else(|| BitsError::InvalidHex(hex.to_string()))?;
            for shift in (0..4).rev() {
                bits.push(((v >> shift) & 1) as u8);
            }
        }
        if bits.len() < len {
            let mut padded = vec![0; len - bits.len()];
            padded.extend(bits);
            bits = padded;
        }
        let excess = bits.len() - len;
        if bits[..excess].contains(&1) {
            return Err(BitsError::HexOverflow {
                hex: hex.to_string(),
                len,
            });
        }
        Ok(Self {
            bits: bits[excess..].to_vec(),
        })
    }

    /// Hex rendering with `ceil(len / 4)` digits.
    pub fn to_hex(&self) -> String {
        let digits = self.len().div_ceil(4);
        let pad = digits * 4 - self.len();
        let padded: Vec<u8> = std::iter::repeat_n(0, pad)
            .chain(self.bits.iter().copied())
            .collect();
        padded
            .chunks(4)
            .map(|c| {
                let v = c.iter().fold(0u32, |acc, &b| (acc << 1) | b as u32);
                char::from_digit(v, 16).unwrap()
            })
            .collect()
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    pub fn get(&self, i: usize) -> u8 {
        self.bits[i]
    }

    pub fn set(&mut self, i: usize, bit: u8) {
        self.bits[i] = bit & 1;
    }

    pub fn flip(&mut self, i: usize) {
        self.bits[i] ^= 1;
    }

    pub fn as_slice(&self) -> &[u8] {
        &self.bits
    }

    pub fn iter(&self) -> impl Iterator<Item = u8> + '_ {
        self.bits.iter().copied()
    }

    pub fn weight(&self) -> usize {
        self.bits.iter().filter(|&&b| b == 1).count()
    }

    pub fn distance(&self, other: &BitString) -> usize {
        assert_eq!(self.len(), other.len(), "distance between unequal lengths");
        self.bits
            .iter()
            .zip(&other.bits)
            .filter(|(a, b)| a != b)
            .count()
    }

    pub fn parity(&self) -> u8 {
        self.bits.iter().fold(0, |acc, &b| acc ^ b)
    }

    pub fn slice(&self, start: usize, end: usize) -> BitString {
        Self {
            bits: self.bits[start..end].to_vec(),
        }
    }

    pub fn concat(&self, other: &BitString) -> BitString {
        let mut bits = self.bits.clone();
        bits.extend_from_slice(&other.bits);
        Self { bits }
    }

    pub fn try_xor(&self, other: &BitString) -> Result<BitString, BitsError> {
        if self.len() != other.len() {
            return Err(BitsError::LengthMismatch(self.len(), other.len()));
        }
        Ok(Self {
            bits: self
                .bits
                .iter()
                .zip(&other.bits)
                .map(|(a, b)| a ^ b)
                .collect(),
        })
    }
}

impl BitXor for &BitString {
    type Output = BitString;

    fn bitxor(self, rhs: &BitString) -> BitString {
        self.try_xor(rhs)
            .expect("xor of unequal-length bit strings")
    }
}

impl FromStr for BitString {
    type Err = BitsError;

    /// Parses `0`/`1` characters; spaces and underscores are ignored.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let mut bits = Vec::with_capacity(s.len());
        for c in s.chars() {
            match c {
                '0' => bits.push(0),
                '1' => bits.push(1),
                ' ' | '_' => {}
                other => return Err(BitsError::InvalidChar(other)),
            }
        }
        Ok(Self { bits })
    }
}

impl TryFrom<String> for BitString {
    type Error = BitsError;

    fn try_from(s: String) -> Result<Self, Self::Error> {
        s.parse()
    }
}

impl From<BitString> for String {
    fn from(b: BitString) -> String {
        b.to_string()
    }
}

impl fmt::Display for BitString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for &b in &self.bits {
            f.write_str(if b == 1 { "1" } else { "0" })?;
        }
        Ok(())
    }
}

impl fmt::Debug for BitString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "BitString({self})")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_and_display() {
        let b: BitString = "1011 0110".parse().unwrap();
        assert_eq!(b.len(), 8);
        assert_eq!(b.to_string(), "10110110");
        assert_eq!(b.weight(), 5);
        assert!("10x".parse::<BitString>().is_err());
    }

    #[test]
    fn hex_is_msb_first() {
        let b = BitString::from_hex("89ab", 16).unwrap();
        assert_eq!(b.to_string(), "1000100110101011");
        assert_eq!(b.to_hex(), "89ab");
        let short = BitString::from_hex("5", 3).unwrap();
        assert_eq!(short.to_string(), "101");
        assert!(BitString::from_hex("f", 3).is_err());
        assert!(BitString::from_hex("zz", 8).is_err());
    }

    #[test]
    fn u64_roundtrip_and_xor() {
        let a = BitString::from_u64(0b1100, 4);
        let b = BitString::from_u64(0b1010, 4);
        assert_eq!((&a ^ &b).to_u64(), 0b0110);
        assert_eq!(a.distance(&b), 2);
        assert!(a.try_xor(&BitString::zeros(5)).is_err());
    }
}
