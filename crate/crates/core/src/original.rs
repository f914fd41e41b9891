//! The conjugate-coding certified-deletion scheme and the key-holder attack
//! against it.
//!
//! A bit `b` is hidden as `PKE(theta, b ^ parity_{theta_i = 0}(x))` plus the
//! register `|x>_theta`, where position `i` is prepared in the computational
//! basis when `theta_i = 0` and in the Hadamard basis otherwise. A deletion
//! certificate is the Hadamard-basis measurement record of the register;
//! only positions with `theta_i = 1` are checked.
//!
//! Anyone holding the secret key learns `theta`, reads the computational
//! positions without disturbing them, and can still produce a certificate
//! that verifies: see [`attack_original`].

use serde::{Deserialize, Serialize};

use crate::bits::BitString;
use crate::error::ProtocolError;
use crate::pke::{pke_decrypt, pke_encrypt, PkeCiphertext, PublicKey, SecretKey};
use crate::qubit::Basis;
use crate::register::ProductRegister;
use crate::rng::SimRng;

pub const DEFAULT_N: usize = 8;

fn position_basis(theta_bit: u8) -> Basis {
    if theta_bit == 0 {
        Basis::Computational
    } else {
        Basis::Hadamard
    }
}

/// Alice-side record: the hidden bit and both strings.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct OriginalSecret {
    pub b: u8,
    pub x: BitString,
    pub theta: BitString,
}

impl OriginalSecret {
    /// `b ^ XOR of x_i over theta_i = 0`.
    pub fn masked_bit(&self) -> u8 {
        self.b ^ computational_parity(&self.x, &self.theta)
    }
}

/// Parity of `x` over the computational positions (`theta_i = 0`).
pub fn computational_parity(x: &BitString, theta: &BitString) -> u8 {
    x.iter()
        .zip(theta.iter())
        .filter(|&(_, t)| t == 0)
        .fold(0, |acc, (xi, _)| acc ^ xi)
}

/// PKE part plus the quantum register. The register is single-owner and
/// taken out by deletion.
#[derive(Debug)]
pub struct OriginalCiphertext {
    pub classical: PkeCiphertext,
    register: Option<ProductRegister>,
}

impl OriginalCiphertext {
    pub fn register(&self) -> Option<&ProductRegister> {
        self.register.as_ref()
    }

    /// Renders each qubit as `0`, `1`, `+` or `-`.
    pub fn render(&self) -> Option<String> {
        self.register
            .as_ref()
            .map(|r| r.qubits().iter().map(|q| q.symbol()).collect())
    }
}

/// Hadamard-basis measurement record of the register.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DeletionCertificateOriginal {
    pub bits: BitString,
}

/// Encrypts with explicit `x` and `theta`. The public key must take `n + 1`
/// plaintext bits: `theta` first, the masked bit last.
pub fn enc_original_with(
    pk: &PublicKey,
    b: u8,
    x: BitString,
    theta: BitString,
    rng: &mut SimRng,
) -> Result<(OriginalCiphertext, OriginalSecret), ProtocolError> {
    let n = x.len();
    if theta.len() != n {
        return Err(ProtocolError::LengthMismatch {
            what: "theta",
            expected: n,
            actual: theta.len(),
        });
    }
    let secret = OriginalSecret { b: b & 1, x, theta };
    let plaintext = secret
        .theta
        .concat(&BitString::from_bits([secret.masked_bit()]));
    let classical = pke_encrypt(pk, &plaintext, rng)?;
    let bases: Vec<Basis> = secret.theta.iter().map(position_basis).collect();
    let register = ProductRegister::prepare(&bases, secret.x.as_slice());
    Ok((
        OriginalCiphertext {
            classical,
            register: Some(register),
        },
        secret,
    ))
}

/// Encrypts `b` with fresh random `x` and `theta`; `theta` is resampled until
/// both bases occur.
pub fn enc_original(
    pk: &PublicKey,
    b: u8,
    n: usize,
    rng: &mut SimRng,
) -> Result<(OriginalCiphertext, OriginalSecret), ProtocolError> {
    if n < 2 {
        return Err(ProtocolError::InvalidParameter(format!(
            "n = {n}, need at least 2"
        )));
    }
    let x = BitString::random(n, rng);
    let theta = loop {
        let t = BitString::random(n, rng);
        if t.weight() != 0 && t.weight() != n {
            break t;
        }
    };
    enc_original_with(pk, b, x, theta, rng)
}

fn open_classical(
    sk: &SecretKey,
    ct: &OriginalCiphertext,
    n: usize,
) -> Result<(BitString, u8), ProtocolError> {
    let plain = pke_decrypt(sk, &ct.classical)?;
    if plain.len() != n + 1 {
        return Err(ProtocolError::LengthMismatch {
            what: "decrypted classical part",
            expected: n + 1,
            actual: plain.len(),
        });
    }
    Ok((plain.slice(0, n), plain.get(n)))
}

/// Decrypts `theta`, reads the computational positions and unmasks `b`.
/// Those positions are eigenstates of the measurement, so the register is
/// physically unchanged.
pub fn honest_decrypt_original(
    sk: &SecretKey,
    ct: &mut OriginalCiphertext,
    rng: &mut SimRng,
) -> Result<u8, ProtocolError> {
    let register = ct.register.as_mut().ok_or(ProtocolError::AlreadyConsumed)?;
    let n = register.len();
    let (theta, masked) = open_classical(sk, ct, n)?;
    let register = ct.register.as_mut().expect("checked above");
    let mut parity = 0;
    for i in (0..n).filter(|&i| theta.get(i) == 0) {
        parity ^= register.measure(i, Basis::Computational, rng)?;
    }
    Ok(masked ^ parity)
}

/// Measures every qubit in the Hadamard basis and hands back the record.
pub fn honest_delete_original(
    ct: &mut OriginalCiphertext,
    rng: &mut SimRng,
) -> Result<DeletionCertificateOriginal, ProtocolError> {
    let mut register = ct.register.take().ok_or(ProtocolError::AlreadyConsumed)?;
    let bits = register.measure_all_in(Basis::Hadamard, rng);
    Ok(DeletionCertificateOriginal {
        bits: BitString::from_bits(bits),
    })
}

/// Accepts iff the certificate matches `x` at every Hadamard position.
pub fn verify_delete_original(
    secret: &OriginalSecret,
    cert: &DeletionCertificateOriginal,
) -> Result<bool, ProtocolError> {
    let n = secret.x.len();
    if cert.bits.len() != n {
        return Err(ProtocolError::LengthMismatch {
            what: "certificate",
            expected: n,
            actual: cert.bits.len(),
        });
    }
    Ok((0..n)
        .filter(|&i| secret.theta.get(i) == 1)
        .all(|i| cert.bits.get(i) == secret.x.get(i)))
}

/// Key-holder attack: read `b` from the computational positions, build the
/// certificate from the Hadamard positions, fill the rest with coin flips.
pub fn attack_original(
    sk: &SecretKey,
    ct: &mut OriginalCiphertext,
    rng: &mut SimRng,
) -> Result<(u8, DeletionCertificateOriginal), ProtocolError> {
    let register = ct.register.as_ref().ok_or(ProtocolError::AlreadyConsumed)?;
    let n = register.len();
    let (theta, masked) = open_classical(sk, ct, n)?;
    let register = ct.register.as_mut().expect("checked above");
    let mut parity = 0;
    let mut cert = BitString::zeros(n);
    for i in 0..n {
        if theta.get(i) == 0 {
            parity ^= register.measure(i, Basis::Computational, rng)?;
            cert.set(i, rng.bit());
        } else {
            cert.set(i, register.measure(i, Basis::Hadamard, rng)?);
        }
    }
    Ok((masked ^ parity, DeletionCertificateOriginal { bits: cert }))
}
