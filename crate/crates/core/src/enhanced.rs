//! Error-correcting-code certified deletion.
//!
//! Alice encrypts `B` to `C`, encodes `C` into a codeword `D`, prepares every
//! bit of `D` in one global basis (computational or Hadamard, chosen once),
//! then overwrites `e` random positions with random bits prepared in random
//! bases. Bob can either guess the global basis, measure, decode and decrypt,
//! or return the untouched register (or a measurement record on Alice's
//! challenge bases) as a deletion certificate. He cannot do both: every
//! Bob-side operation takes the register out of the bundle.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use statrs::distribution::{ChiSquared, ContinuousCDF};

use crate::bits::BitString;
use crate::code::{hamming_ball, CodeId, CodeSpec, DecodeOutcome, DEFAULT_BALL_CAP};
use crate::dense::{
    dense_measure_qubit, dense_project_onto_strings, to_dense, DenseState, StringPartition,
    DEFAULT_DENSE_CAP,
};
use crate::error::ProtocolError;
use crate::pke::{pke_decrypt, pke_encrypt, PkeCiphertext, PublicKey, SecretKey};
use crate::qubit::Basis;
use crate::register::ProductRegister;
use crate::rng::SimRng;

/// The single encoding basis for all non-error positions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GlobalBasis {
    Computational,
    Hadamard,
}

impl GlobalBasis {
    pub fn basis(self) -> Basis {
        match self {
            GlobalBasis::Computational => Basis::Computational,
            GlobalBasis::Hadamard => Basis::Hadamard,
        }
    }

    pub fn other(self) -> Self {
        match self {
            GlobalBasis::Computational => GlobalBasis::Hadamard,
            GlobalBasis::Hadamard => GlobalBasis::Computational,
        }
    }

    pub fn random(rng: &mut SimRng) -> Self {
        if rng.coin() {
            GlobalBasis::Hadamard
        } else {
            GlobalBasis::Computational
        }
    }
}

/// How error qubits pick their preparation basis.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ErrorMode {
    /// Random Bloch-sphere basis: polar angle in (0, pi), azimuth in (0, 2pi).
    #[default]
    Bloch,
    /// Computational or Hadamard, each with probability 1/2.
    Conjugate,
}

impl ErrorMode {
    fn sample(self, rng: &mut SimRng) -> Basis {
        match self {
            ErrorMode::Bloch => Basis::random_general(rng),
            ErrorMode::Conjugate => Basis::random_conjugate(rng),
        }
    }
}

impl fmt::Display for ErrorMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ErrorMode::Bloch => "bloch",
            ErrorMode::Conjugate => "conjugate",
        })
    }
}

impl FromStr for ErrorMode {
    type Err = ProtocolError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "bloch" => Ok(ErrorMode::Bloch),
            "conjugate" => Ok(ErrorMode::Conjugate),
            other => Err(ProtocolError::InvalidParameter(format!(
                "unknown error mode {other:?}"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ErrorEntry {
    pub position: usize,
    pub value: u8,
    pub basis: Basis,
}

/// Alice's secret verification data for one ciphertext.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AliceRecord {
    pub code: CodeId,
    pub error_mode: ErrorMode,
    pub global_basis: GlobalBasis,
    pub ciphertext: PkeCiphertext,
    pub codeword: BitString,
    pub errors: Vec<ErrorEntry>,
}

impl AliceRecord {
    pub fn n(&self) -> usize {
        self.codeword.len()
    }

    fn error_at(&self, i: usize) -> Option<&ErrorEntry> {
        self.errors.iter().find(|e| e.position == i)
    }

    /// Preparation basis of position `i`.
    pub fn basis_at(&self, i: usize) -> Basis {
        self.error_at(i)
            .map_or(self.global_basis.basis(), |e| e.basis)
    }

    /// Prepared bit of position `i` (the string `D'`).
    pub fn bit_at(&self, i: usize) -> u8 {
        self.error_at(i).map_or(self.codeword.get(i), |e| e.value)
    }

    /// `|D'>` rebuilt from the record.
    pub fn prepared_register(&self) -> ProductRegister {
        let n = self.n();
        let bases: Vec<Basis> = (0..n).map(|i| self.basis_at(i)).collect();
        let bits: Vec<u8> = (0..n).map(|i| self.bit_at(i)).collect();
        ProductRegister::prepare(&bases, &bits)
    }

    /// Checks the structural invariants against `code`.
    pub fn validate(&self, code: &CodeSpec) -> Result<(), ProtocolError> {
        if code.id() != self.code {
            return Err(ProtocolError::CodeMismatch {
                bundle: self.code.to_string(),
                given: code.id().to_string(),
            });
        }
        if self.ciphertext.bits.len() != code.k() {
            return Err(ProtocolError::LengthMismatch {
                what: "record ciphertext",
                expected: code.k(),
                actual: self.ciphertext.bits.len(),
            });
        }
        if code.encode(&self.ciphertext.bits)? != self.codeword {
            return Err(ProtocolError::InvalidParameter(
                "codeword is not the encoding of the ciphertext".into(),
            ));
        }
        if self.errors.len() > code.e() {
            return Err(ProtocolError::InvalidParameter(format!(
                "{} error entries exceed correction radius {}",
                self.errors.len(),
                code.e()
            )));
        }
        let mut seen = vec![false; code.n()];
        for entry in &self.errors {
            if entry.position >= code.n() {
                return Err(ProtocolError::InvalidParameter(format!(
                    "error position {} out of range",
                    entry.position
                )));
            }
            if std::mem::replace(&mut seen[entry.position], true) {
                return Err(ProtocolError::InvalidParameter(format!(
                    "duplicate error position {}",
                    entry.position
                )));
            }
            if entry.value > 1 {
                return Err(ProtocolError::InvalidParameter(format!(
                    "error value {} is not a bit",
                    entry.value
                )));
            }
            entry.basis.validate()?;
        }
        Ok(())
    }
}

/// Knobs for preparing a bundle. Forced fields exist for replaying fixed
/// examples and for conditioning experiments.
#[derive(Debug, Clone, Default)]
pub struct EncryptOptions {
    pub error_mode: ErrorMode,
    /// Number of error qubits; defaults to the code's correction radius.
    pub error_count: Option<usize>,
    pub forced_basis: Option<GlobalBasis>,
    /// Explicit `(position, value)` pairs (0-indexed); bases still follow `error_mode`.
    pub forced_errors: Option<Vec<(usize, u8)>>,
}

impl EncryptOptions {
    pub fn with_mode(error_mode: ErrorMode) -> Self {
        Self {
            error_mode,
            ..Self::default()
        }
    }
}

/// What Bob receives: the register `|D'>`. Only measurement-style operations
/// are exposed, and each of them consumes the register.
#[derive(Debug)]
pub struct CiphertextBundle {
    code: CodeId,
    register: Option<ProductRegister>,
}

impl CiphertextBundle {
    /// Wraps a register loaded from a file; any consumed slot makes the bundle consumed.
    pub(crate) fn from_register(code: CodeId, register: ProductRegister) -> Self {
        let register = (!register.any_consumed()).then_some(register);
        Self { code, register }
    }

    pub(crate) fn register(&self) -> Option<&ProductRegister> {
        self.register.as_ref()
    }

    pub fn code(&self) -> CodeId {
        self.code
    }

    pub fn is_consumed(&self) -> bool {
        self.register.is_none()
    }

    fn take(&mut self, code: &CodeSpec) -> Result<ProductRegister, ProtocolError> {
        self.check_code(code)?;
        self.register.take().ok_or(ProtocolError::AlreadyConsumed)
    }

    fn check_code(&self, code: &CodeSpec) -> Result<(), ProtocolError> {
        if code.id() != self.code {
            return Err(ProtocolError::CodeMismatch {
                bundle: self.code.to_string(),
                given: code.id().to_string(),
            });
        }
        Ok(())
    }
}

/// State handed back to Alice as a quantum deletion certificate.
#[derive(Debug, Clone, PartialEq)]
pub enum ReturnedState {
    Product(ProductRegister),
    Dense(DenseState),
}

impl ReturnedState {
    pub fn num_qubits(&self) -> usize {
        match self {
            ReturnedState::Product(r) => r.len(),
            ReturnedState::Dense(d) => d.num_qubits(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ReadOutcome {
    Plaintext(BitString),
    DecryptFailed,
}

impl ReadOutcome {
    pub fn plaintext(&self) -> Option<&BitString> {
        match self {
            ReadOutcome::Plaintext(p) => Some(p),
            ReadOutcome::DecryptFailed => None,
        }
    }
}

/// Bob's reading attempt: the basis he guessed and what came out.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BobReading {
    pub guess: GlobalBasis,
    pub outcome: ReadOutcome,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassicalChallenge {
    pub bases: Vec<Basis>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClassicalCertificate {
    pub bits: BitString,
}

/// Prepares `|D'>` for a given PKE ciphertext.
pub fn prepare_bundle(
    code: &CodeSpec,
    ciphertext: PkeCiphertext,
    opts: &EncryptOptions,
    rng: &mut SimRng,
) -> Result<(CiphertextBundle, AliceRecord), ProtocolError> {
    let n = code.n();
    if ciphertext.bits.len() != code.k() {
        return Err(ProtocolError::LengthMismatch {
            what: "PKE ciphertext vs code dimension",
            expected: code.k(),
            actual: ciphertext.bits.len(),
        });
    }
    let codeword = code.encode(&ciphertext.bits)?;
    let global_basis = match opts.forced_basis {
        Some(b) => b,
        None => GlobalBasis::random(rng),
    };
    let slots: Vec<(usize, u8)> = match &opts.forced_errors {
        Some(forced) => forced.clone(),
        None => {
            let count = opts.error_count.unwrap_or(code.e());
            if count > code.e() {
                return Err(ProtocolError::InvalidParameter(format!(
                    "{count} error qubits exceed correction radius {}",
                    code.e()
                )));
            }
            rng.distinct_indices(n, count)
                .into_iter()
                .map(|p| (p, rng.bit()))
                .collect()
        }
    };
    let errors: Vec<ErrorEntry> = slots
        .into_iter()
        .map(|(position, value)| ErrorEntry {
            position,
            value: value & 1,
            basis: opts.error_mode.sample(rng),
        })
        .collect();
    let record = AliceRecord {
        code: code.id(),
        error_mode: opts.error_mode,
        global_basis,
        ciphertext,
        codeword,
        errors,
    };
    record.validate(code)?;
    let bundle = CiphertextBundle {
        code: code.id(),
        register: Some(record.prepared_register()),
    };
    Ok((bundle, record))
}

/// Encrypts `message` with the PKE, then prepares the quantum ciphertext.
pub fn encrypt_enhanced(
    pk: &PublicKey,
    message: &BitString,
    code: &CodeSpec,
    opts: &EncryptOptions,
    rng: &mut SimRng,
) -> Result<(CiphertextBundle, AliceRecord), ProtocolError> {
    if pk.scheme.ciphertext_bits() != code.k() {
        return Err(ProtocolError::LengthMismatch {
            what: "PKE ciphertext vs code dimension",
            expected: code.k(),
            actual: pk.scheme.ciphertext_bits(),
        });
    }
    let ciphertext = pke_encrypt(pk, message, rng)?;
    prepare_bundle(code, ciphertext, opts, rng)
}

fn decode_and_decrypt(
    sk: &SecretKey,
    code: &CodeSpec,
    word: &BitString,
) -> Result<ReadOutcome, ProtocolError> {
    Ok(match code.decode(word)? {
        DecodeOutcome::Decoded { message, .. } => {
            ReadOutcome::Plaintext(pke_decrypt(sk, &PkeCiphertext { bits: message })?)
        }
        DecodeOutcome::Failure => ReadOutcome::DecryptFailed,
    })
}

fn measure_and_read(
    sk: &SecretKey,
    code: &CodeSpec,
    register: &mut ProductRegister,
    guess: GlobalBasis,
    rng: &mut SimRng,
) -> Result<BobReading, ProtocolError> {
    let word = BitString::from_bits(register.measure_all_in(guess.basis(), rng));
    Ok(BobReading {
        guess,
        outcome: decode_and_decrypt(sk, code, &word)?,
    })
}

/// Honest reading: guess the global basis, measure everything, decode, decrypt.
pub fn bob_decrypt(
    sk: &SecretKey,
    bundle: &mut CiphertextBundle,
    code: &CodeSpec,
    rng: &mut SimRng,
) -> Result<BobReading, ProtocolError> {
    let guess = GlobalBasis::random(rng);
    bob_decrypt_with_guess(sk, bundle, code, guess, rng)
}

/// [`bob_decrypt`] with the basis guess supplied by the caller.
pub fn bob_decrypt_with_guess(
    sk: &SecretKey,
    bundle: &mut CiphertextBundle,
    code: &CodeSpec,
    guess: GlobalBasis,
    rng: &mut SimRng,
) -> Result<BobReading, ProtocolError> {
    let mut register = bundle.take(code)?;
    measure_and_read(sk, code, &mut register, guess, rng)
}

/// Returns the register untouched.
pub fn bob_delete_quantum(bundle: &mut CiphertextBundle) -> Result<ReturnedState, ProtocolError> {
    bundle
        .register
        .take()
        .map(ReturnedState::Product)
        .ok_or(ProtocolError::AlreadyConsumed)
}

/// Measures the returned state qubit by qubit in the preparation bases;
/// accepts iff every outcome matches `D'`.
pub fn alice_verify_quantum(
    record: &AliceRecord,
    returned: &ReturnedState,
    rng: &mut SimRng,
) -> Result<bool, ProtocolError> {
    let n = record.n();
    if returned.num_qubits() != n {
        return Err(ProtocolError::LengthMismatch {
            what: "returned state",
            expected: n,
            actual: returned.num_qubits(),
        });
    }
    match returned {
        ReturnedState::Product(r) => {
            let mut r = r.clone();
            for i in 0..n {
                if r.measure(i, record.basis_at(i), rng)? != record.bit_at(i) {
                    return Ok(false);
                }
            }
        }
        ReturnedState::Dense(d) => {
            let mut state = d.clone();
            for i in 0..n {
                let (bit, next) = dense_measure_qubit(&state, i, record.basis_at(i), rng)?;
                if bit != record.bit_at(i) {
                    return Ok(false);
                }
                state = next;
            }
        }
    }
    Ok(true)
}

/// Fresh random bases at non-error positions, the recorded bases at error positions.
pub fn make_classical_challenge(record: &AliceRecord, rng: &mut SimRng) -> ClassicalChallenge {
    ClassicalChallenge {
        bases: (0..record.n())
            .map(|i| match record.error_at(i) {
                Some(entry) => entry.basis,
                None => Basis::random_general(rng),
            })
            .collect(),
    }
}

/// Honest classical deletion: measure qubit `i` in challenge basis `i`.
pub fn bob_answer_challenge(
    bundle: &mut CiphertextBundle,
    challenge: &ClassicalChallenge,
    rng: &mut SimRng,
) -> Result<ClassicalCertificate, ProtocolError> {
    let register = bundle
        .register
        .as_ref()
        .ok_or(ProtocolError::AlreadyConsumed)?;
    if challenge.bases.len() != register.len() {
        return Err(ProtocolError::LengthMismatch {
            what: "challenge",
            expected: register.len(),
            actual: challenge.bases.len(),
        });
    }
    let mut register = bundle.register.take().expect("checked above");
    let bits = register.measure_all(&challenge.bases, rng)?;
    Ok(ClassicalCertificate {
        bits: BitString::from_bits(bits),
    })
}

/// Accepts iff the certificate reproduces every recorded error value.
pub fn alice_verify_classical(
    record: &AliceRecord,
    cert: &ClassicalCertificate,
) -> Result<bool, ProtocolError> {
    if cert.bits.len() != record.n() {
        return Err(ProtocolError::LengthMismatch {
            what: "certificate",
            expected: record.n(),
            actual: cert.bits.len(),
        });
    }
    Ok(record
        .errors
        .iter()
        .all(|e| cert.bits.get(e.position) == e.value))
}

/// Balance of ones and zeros over the non-error positions of a classical
/// certificate. Diagnostic only; never part of accept/reject.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct UniformityDiagnostic {
    pub ones: usize,
    pub zeros: usize,
    pub chi_square: f64,
    pub p_value: f64,
}

pub fn classical_uniformity_diagnostic(
    record: &AliceRecord,
    cert: &ClassicalCertificate,
) -> UniformityDiagnostic {
    let (mut ones, mut zeros) = (0usize, 0usize);
    for i in (0..cert.bits.len()).filter(|&i| record.error_at(i).is_none()) {
        if cert.bits.get(i) == 1 {
            ones += 1;
        } else {
            zeros += 1;
        }
    }
    let total = (ones + zeros) as f64;
    let expected = total / 2.0;
    let chi_square = if total == 0.0 {
        0.0
    } else {
        ((ones as f64 - expected).powi(2) + (zeros as f64 - expected).powi(2)) / expected
    };
    let p_value = ChiSquared::new(1.0).map_or(1.0, |d| 1.0 - d.cdf(chi_square));
    UniformityDiagnostic {
        ones,
        zeros,
        chi_square,
        p_value,
    }
}

/// Measure-and-forge: read as [`bob_decrypt`] would, then return the
/// collapsed register as the certificate.
pub fn cheat_measure_forge(
    sk: &SecretKey,
    bundle: &mut CiphertextBundle,
    code: &CodeSpec,
    rng: &mut SimRng,
) -> Result<(BobReading, ReturnedState), ProtocolError> {
    let guess = GlobalBasis::random(rng);
    cheat_measure_forge_with_guess(sk, bundle, code, guess, rng)
}

pub fn cheat_measure_forge_with_guess(
    sk: &SecretKey,
    bundle: &mut CiphertextBundle,
    code: &CodeSpec,
    guess: GlobalBasis,
    rng: &mut SimRng,
) -> Result<(BobReading, ReturnedState), ProtocolError> {
    let mut register = bundle.take(code)?;
    let reading = measure_and_read(sk, code, &mut register, guess, rng)?;
    Ok((reading, ReturnedState::Product(register)))
}

/// Partition of `{0,1}^n` into the radius-`e` balls around each codeword
/// (label = message index) plus a remainder (label `2^k`).
pub fn ball_partition(code: &CodeSpec, ball_cap: u128) -> Result<StringPartition, ProtocolError> {
    let (n, k) = (code.n(), code.k());
    let remainder = 1u32 << k;
    let mut labels = vec![remainder; 1usize << n];
    for (message, codeword) in code.codewords().iter().enumerate() {
        for s in hamming_ball(codeword, code.e(), ball_cap)? {
            labels[s.to_u64() as usize] = message as u32;
        }
    }
    Ok(StringPartition::from_labels(n, labels, (1usize << k) + 1)?)
}

/// Coherent attack: one projective measurement onto the codeword balls in
/// the guessed basis, then decode the ball's codeword and decrypt. The
/// post-measurement state goes back to Alice.
pub fn cheat_ball_povm(
    sk: &SecretKey,
    bundle: &mut CiphertextBundle,
    code: &CodeSpec,
    guess: GlobalBasis,
    rng: &mut SimRng,
) -> Result<(BobReading, ReturnedState), ProtocolError> {
    cheat_ball_povm_with_caps(
        sk,
        bundle,
        code,
        guess,
        DEFAULT_DENSE_CAP,
        DEFAULT_BALL_CAP,
        rng,
    )
}

pub fn cheat_ball_povm_with_caps(
    sk: &SecretKey,
    bundle: &mut CiphertextBundle,
    code: &CodeSpec,
    guess: GlobalBasis,
    dense_cap: usize,
    ball_cap: u128,
    rng: &mut SimRng,
) -> Result<(BobReading, ReturnedState), ProtocolError> {
    bundle.check_code(code)?;
    let register = bundle
        .register
        .as_ref()
        .ok_or(ProtocolError::AlreadyConsumed)?;
    let dense = to_dense(register, dense_cap)?;
    let partition = ball_partition(code, ball_cap)?;
    bundle.register = None;

    let in_guess = dense.into_basis_coordinates(guess.basis());
    let (label, post) = dense_project_onto_strings(&in_guess, &partition, rng)?;
    let outcome = if label < 1usize << code.k() {
        let ciphertext = BitString::from_u64(label as u64, code.k());
        ReadOutcome::Plaintext(pke_decrypt(sk, &PkeCiphertext { bits: ciphertext })?)
    } else {
        ReadOutcome::DecryptFailed
    };
    Ok((
        BobReading { guess, outcome },
        ReturnedState::Dense(post.from_basis_coordinates(guess.basis())),
    ))
}
