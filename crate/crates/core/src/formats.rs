//! On-disk artifacts.
//!
//! Registers use a small little-endian binary container (`.qreg`); keys,
//! records, challenges and certificates are JSON. Every file carries the
//! tool version and, where one was used, the seed.
//!
//! `.qreg` layout:
//!
//! ```text
//! magic      4   b"PKQR"
//! version    2   u16, currently 1
//! flags      1   bit 0: simulation artifact (always set)
//! kind       1   0 = product register, 1 = dense state
//! tool       1+  u8 length, utf-8 tool version
//! code       1+  u8 length, utf-8 code id (empty if none)
//! seed       9   u8 present flag, u64
//! n          4   u32 qubit count
//! product:   n * 32 bytes of (re0, im0, re1, im1) f64, then n consumed bytes
//! dense:     2^n * 16 bytes of (re, im) f64
//! ```

use std::fs;
use std::path::Path;

use num_complex::Complex64;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::code::{CodeId, CodeSpec};
use crate::dense::DenseState;
use crate::enhanced::{
    AliceRecord, CiphertextBundle, ClassicalCertificate, ClassicalChallenge, ReturnedState,
};
use crate::pke::{KeyPair, PkeScheme, PublicKey, SecretKey};
use crate::qubit::Qubit;
use crate::register::ProductRegister;

pub const QREG_MAGIC: &[u8; 4] = b"PKQR";
pub const QREG_VERSION: u16 = 1;
const FLAG_SIM_ARTIFACT: u8 = 1;
const KIND_PRODUCT: u8 = 0;
const KIND_DENSE: u8 = 1;
/// Dense payloads above this many qubits are refused on read.
pub const MAX_DENSE_QUBITS: u32 = 24;

#[derive(Debug, Error)]
pub enum FormatError {
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("not a qreg file (bad magic)")]
    BadMagic,
    #[error("unsupported qreg version {0}")]
    UnsupportedVersion(u16),
    #[error("truncated qreg: needed {needed} bytes at offset {offset}, file has {len}")]
    Truncated {
        offset: usize,
        needed: usize,
        len: usize,
    },
    #[error("unknown register kind {kind} at offset {offset}")]
    UnknownKind { kind: u8, offset: usize },
    #[error("invalid utf-8 string at offset {offset}")]
    InvalidUtf8 { offset: usize },
    #[error("{extra} trailing bytes at offset {offset}")]
    TrailingBytes { offset: usize, extra: usize },
    #[error("dense payload of {n} qubits exceeds {max}")]
    DenseTooLarge { n: u32, max: u32 },
    #[error("invalid amplitudes: {0}")]
    InvalidAmplitudes(String),
    #[error("{0}")]
    Code(#[from] crate::code::CodeError),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
    #[error("expected a {expected} file, found {found:?}")]
    WrongKind {
        expected: &'static str,
        found: String,
    },
    #[error("invalid key material: {0}")]
    InvalidKey(String),
    #[error("{0}")]
    Invalid(String),
}

/// A register file: the state plus provenance.
#[derive(Debug, Clone, PartialEq)]
pub struct QregFile {
    pub tool_version: String,
    pub code: Option<CodeId>,
    pub seed: Option<u64>,
    pub state: ReturnedState,
}

impl QregFile {
    pub fn new(state: ReturnedState, code: Option<CodeId>, seed: Option<u64>) -> Self {
        Self {
            tool_version: crate::VERSION.to_string(),
            code,
            seed,
            state,
        }
    }

    /// The unconsumed register of a bundle, or `None` if it was used up.
    pub fn from_bundle(bundle: &CiphertextBundle, seed: Option<u64>) -> Option<Self> {
        bundle
            .register()
            .map(|r| Self::new(ReturnedState::Product(r.clone()), Some(bundle.code()), seed))
    }

    /// A bundle for Bob. Files holding measured slots load as consumed.
    pub fn into_bundle(self) -> Result<CiphertextBundle, FormatError> {
        let code = self
            .code
            .ok_or_else(|| FormatError::Invalid("register file names no code".into()))?;
        match self.state {
            ReturnedState::Product(r) => {
                let n = CodeSpec::from_id(code).n();
                if r.len() != n {
                    return Err(FormatError::Invalid(format!(
                        "{code} needs {n} qubits, file has {}",
                        r.len()
                    )));
                }
                Ok(CiphertextBundle::from_register(code, r))
            }
            ReturnedState::Dense(_) => Err(FormatError::Invalid(
                "a ciphertext bundle must be a product register".into(),
            )),
        }
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::new();
        out.extend_from_slice(QREG_MAGIC);
        out.extend_from_slice(&QREG_VERSION.to_le_bytes());
        out.push(FLAG_SIM_ARTIFACT);
        out.push(match self.state {
            ReturnedState::Product(_) => KIND_PRODUCT,
            ReturnedState::Dense(_) => KIND_DENSE,
        });
        put_str(&mut out, &self.tool_version);
        put_str(
            &mut out,
            &self.code.map(|c| c.to_string()).unwrap_or_default(),
        );
        out.push(self.seed.is_some() as u8);
        out.extend_from_slice(&self.seed.unwrap_or(0).to_le_bytes());
        match &self.state {
            ReturnedState::Product(r) => {
                out.extend_from_slice(&(r.len() as u32).to_le_bytes());
                for q in r.qubits() {
                    for a in [q.amp0(), q.amp1()] {
                        put_complex(&mut out, a);
                    }
                }
                out.extend(r.consumed().iter().map(|&c| c as u8));
            }
            ReturnedState::Dense(d) => {
                out.extend_from_slice(&(d.num_qubits() as u32).to_le_bytes());
                for &a in d.amplitudes() {
                    put_complex(&mut out, a);
                }
            }
        }
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self, FormatError> {
        let mut r = Reader { bytes, pos: 0 };
        if r.take(4)? != QREG_MAGIC {
            return Err(FormatError::BadMagic);
        }
        let version = r.u16()?;
        if version != QREG_VERSION {
            return Err(FormatError::UnsupportedVersion(version));
        }
        let _flags = r.u8()?;
        let kind_offset = r.pos;
        let kind = r.u8()?;
        if kind != KIND_PRODUCT && kind != KIND_DENSE {
            return Err(FormatError::UnknownKind {
                kind,
                offset: kind_offset,
            });
        }
        let tool_version = r.string()?;
        let code_name = r.string()?;
        let code = if code_name.is_empty() {
            None
        } else {
            Some(code_name.parse::<CodeId>()?)
        };
        let has_seed = r.u8()? != 0;
        let seed = r.u64()?;
        let n = r.u32()?;
        let state = if kind == KIND_PRODUCT {
            let mut qubits = Vec::with_capacity(n.min(1 << 16) as usize);
            for i in 0..n {
                let (a0, a1) = (r.complex()?, r.complex()?);
                qubits.push(
                    Qubit::new(a0, a1)
                        .map_err(|e| FormatError::InvalidAmplitudes(format!("qubit {i}: {e}")))?,
                );
            }
            let consumed = r.take(n as usize)?.iter().map(|&b| b != 0).collect();
            ReturnedState::Product(ProductRegister::from_parts(qubits, consumed))
        } else {
            if n > MAX_DENSE_QUBITS {
                return Err(FormatError::DenseTooLarge {
                    n,
                    max: MAX_DENSE_QUBITS,
                });
            }
            let amps = (0..1usize << n)
                .map(|_| r.complex())
                .collect::<Result<Vec<_>, _>>()?;
            ReturnedState::Dense(
                DenseState::from_amplitudes(n as usize, amps)
                    .map_err(|e| FormatError::InvalidAmplitudes(e.to_string()))?,
            )
        };
        if r.pos != bytes.len() {
            return Err(FormatError::TrailingBytes {
                offset: r.pos,
                extra: bytes.len() - r.pos,
            });
        }
        Ok(Self {
            tool_version,
            code,
            seed: has_seed.then_some(seed),
            state,
        })
    }

    pub fn write(&self, path: &Path) -> Result<(), FormatError> {
        fs::write(path, self.to_bytes()).map_err(|e| io_err(path, e))
    }

    pub fn read(path: &Path) -> Result<Self, FormatError> {
        Self::from_bytes(&fs::read(path).map_err(|e| io_err(path, e))?)
    }
}

fn put_str(out: &mut Vec<u8>, s: &str) {
    let bytes = s.as_bytes();
    let len = bytes.len().min(u8::MAX as usize);
    out.push(len as u8);
    out.extend_from_slice(&bytes[..len]);
}

fn put_complex(out: &mut Vec<u8>, a: Complex64) {
    out.extend_from_slice(&a.re.to_le_bytes());
    out.extend_from_slice(&a.im.to_le_bytes());
}

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, needed: usize) -> Result<&'a [u8], FormatError> {
        let end = self
            .pos
            .checked_add(needed)
            .filter(|&end| end <= self.bytes.len());
        let Some(end) = end else {
            return Err(FormatError::Truncated {
                offset: self.pos,
                needed,
                len: self.bytes.len(),
            });
        };
        let out = &self.bytes[self.pos..end];
        self.pos = end;
        Ok(out)
    }

    fn array<const N: usize>(&mut self) -> Result<[u8; N], FormatError> {
        Ok(self.take(N)?.try_into().expect("length checked"))
    }

    fn u8(&mut self) -> Result<u8, FormatError> {
        Ok(self.take(1)?[0])
    }

    fn u16(&mut self) -> Result<u16, FormatError> {
        Ok(u16::from_le_bytes(self.array()?))
    }

    fn u32(&mut self) -> Result<u32, FormatError> {
        Ok(u32::from_le_bytes(self.array()?))
    }

    fn u64(&mut self) -> Result<u64, FormatError> {
        Ok(u64::from_le_bytes(self.array()?))
    }

    fn complex(&mut self) -> Result<Complex64, FormatError> {
        let re = f64::from_le_bytes(self.array()?);
        let im = f64::from_le_bytes(self.array()?);
        Ok(Complex64::new(re, im))
    }

    fn string(&mut self) -> Result<String, FormatError> {
        let len = self.u8()? as usize;
        let offset = self.pos;
        let raw = self.take(len)?;
        String::from_utf8(raw.to_vec()).map_err(|_| FormatError::InvalidUtf8 { offset })
    }
}

fn io_err(path: &Path, source: std::io::Error) -> FormatError {
    FormatError::Io {
        path: path.display().to_string(),
        source,
    }
}

/// JSON envelope shared by all text artifacts.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JsonFile<T> {
    pub kind: String,
    pub tool_version: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(flatten)]
    pub body: T,
}

/// Body types that know their envelope `kind`.
pub trait Artifact: Serialize + DeserializeOwned {
    const KIND: &'static str;
}

impl<T: Artifact> JsonFile<T> {
    pub fn new(body: T, seed: Option<u64>) -> Self {
        Self {
            kind: T::KIND.to_string(),
            tool_version: crate::VERSION.to_string(),
            seed,
            body,
        }
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("artifact serializes");
        s.push('\n');
        s
    }

    pub fn from_json(text: &str) -> Result<Self, FormatError> {
        let probe: serde_json::Value = serde_json::from_str(text)?;
        let found = probe.get("kind").and_then(|k| k.as_str()).unwrap_or("");
        if found != T::KIND {
            return Err(FormatError::WrongKind {
                expected: T::KIND,
                found: found.to_string(),
            });
        }
        Ok(serde_json::from_value(probe)?)
    }

    pub fn write(&self, path: &Path) -> Result<(), FormatError> {
        fs::write(path, self.to_json()).map_err(|e| io_err(path, e))
    }

    pub fn read(path: &Path) -> Result<Self, FormatError> {
        Self::from_json(&fs::read_to_string(path).map_err(|e| io_err(path, e))?)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PublicKeyBody {
    pub scheme: PkeScheme,
    pub lambda: u32,
    pub pk_hex: String,
}

impl Artifact for PublicKeyBody {
    const KIND: &'static str = "pkecd-public-key";
}

#[derive(Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SecretKeyBody {
    pub scheme: PkeScheme,
    pub lambda: u32,
    pub sk_hex: String,
}

impl std::fmt::Debug for SecretKeyBody {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("SecretKeyBody")
            .field("scheme", &self.scheme)
            .field("lambda", &self.lambda)
            .finish_non_exhaustive()
    }
}

impl Artifact for SecretKeyBody {
    const KIND: &'static str = "pkecd-secret-key";
}

fn key_bytes(hex_str: &str) -> Result<Vec<u8>, FormatError> {
    let bytes = hex::decode(hex_str).map_err(|e| FormatError::InvalidKey(e.to_string()))?;
    if bytes.len() != crate::pke::KEY_BYTES {
        return Err(FormatError::InvalidKey(format!(
            "expected {} key bytes, found {}",
            crate::pke::KEY_BYTES,
            bytes.len()
        )));
    }
    Ok(bytes)
}

impl PublicKeyBody {
    pub fn from_key(kp: &KeyPair) -> Self {
        Self {
            scheme: kp.scheme,
            lambda: kp.lambda,
            pk_hex: hex::encode(&kp.pk.bytes),
        }
    }

    pub fn key(&self) -> Result<PublicKey, FormatError> {
        Ok(PublicKey {
            scheme: self.scheme,
            bytes: key_bytes(&self.pk_hex)?,
        })
    }
}

impl SecretKeyBody {
    pub fn from_key(kp: &KeyPair) -> Self {
        Self {
            scheme: kp.scheme,
            lambda: kp.lambda,
            sk_hex: hex::encode(&kp.sk.bytes),
        }
    }

    pub fn key(&self) -> Result<SecretKey, FormatError> {
        Ok(SecretKey {
            scheme: self.scheme,
            bytes: key_bytes(&self.sk_hex)?,
        })
    }
}

impl Artifact for AliceRecord {
    const KIND: &'static str = "pkecd-record";
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChallengeBody {
    pub code: CodeId,
    #[serde(flatten)]
    pub challenge: ClassicalChallenge,
}

impl Artifact for ChallengeBody {
    const KIND: &'static str = "pkecd-challenge";
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CertificateBody {
    pub code: CodeId,
    #[serde(flatten)]
    pub certificate: ClassicalCertificate,
}

impl Artifact for CertificateBody {
    const KIND: &'static str = "pkecd-certificate";
}

/// Result of checking one file.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct FileDiagnostic {
    pub path: String,
    pub kind: Option<String>,
    pub problems: Vec<String>,
}

impl FileDiagnostic {
    pub fn ok(&self) -> bool {
        self.problems.is_empty()
    }
}

/// Schema, version and invariant checks. Never modifies the files.
pub fn validate_files<P: AsRef<Path>>(paths: &[P]) -> Vec<FileDiagnostic> {
    paths.iter().map(|p| validate_file(p.as_ref())).collect()
}

fn validate_file(path: &Path) -> FileDiagnostic {
    let mut diag = FileDiagnostic {
        path: path.display().to_string(),
        kind: None,
        problems: Vec::new(),
    };
    let bytes = match fs::read(path) {
        Ok(b) => b,
        Err(e) => {
            diag.problems.push(io_err(path, e).to_string());
            return diag;
        }
    };
    if bytes.starts_with(QREG_MAGIC) {
        diag.kind = Some("qreg".into());
        match QregFile::from_bytes(&bytes) {
            Ok(file) => {
                check_tool_version(&file.tool_version, &mut diag);
                if let (Some(code), ReturnedState::Product(r)) = (file.code, &file.state) {
                    let n = CodeSpec::from_id(code).n();
                    if r.len() != n {
                        diag.problems
                            .push(format!("{code} needs {n} qubits, register has {}", r.len()));
                    }
                }
            }
            Err(e) => diag.problems.push(e.to_string()),
        }
        return diag;
    }
    let value: serde_json::Value = match serde_json::from_slice(&bytes) {
        Ok(v) => v,
        Err(e) => {
            diag.problems.push(format!("neither qreg nor json: {e}"));
            return diag;
        }
    };
    let kind = value
        .get("kind")
        .and_then(|k| k.as_str())
        .unwrap_or("")
        .to_string();
    diag.kind = Some(kind.clone());
    if let Some(v) = value.get("tool_version").and_then(|v| v.as_str()) {
        check_tool_version(v, &mut diag);
    } else {
        diag.problems.push("missing tool_version".into());
    }
    let text = String::from_utf8_lossy(&bytes);
    let result = match kind.as_str() {
        PublicKeyBody::KIND => {
            JsonFile::<PublicKeyBody>::from_json(&text).and_then(|f| f.body.key().map(drop))
        }
        SecretKeyBody::KIND => {
            JsonFile::<SecretKeyBody>::from_json(&text).and_then(|f| f.body.key().map(drop))
        }
        AliceRecord::KIND => JsonFile::<AliceRecord>::from_json(&text).and_then(|f| {
            f.body
                .validate(&CodeSpec::from_id(f.body.code))
                .map_err(|e| FormatError::Invalid(format!("record invariant violated: {e}")))
        }),
        ChallengeBody::KIND => JsonFile::<ChallengeBody>::from_json(&text).and_then(|f| {
            let n = CodeSpec::from_id(f.body.code).n();
            check_len("challenge", n, f.body.challenge.bases.len())?;
            f.body.challenge.bases.iter().try_for_each(|b| {
                b.validate()
                    .map_err(|e| FormatError::Invalid(e.to_string()))
            })
        }),
        CertificateBody::KIND => JsonFile::<CertificateBody>::from_json(&text).and_then(|f| {
            check_len(
                "certificate",
                CodeSpec::from_id(f.body.code).n(),
                f.body.certificate.bits.len(),
            )
        }),
        other => Err(FormatError::Invalid(format!(
            "unknown artifact kind {other:?}"
        ))),
    };
    if let Err(e) = result {
        diag.problems.push(e.to_string());
    }
    diag
}

fn check_len(what: &str, expected: usize, actual: usize) -> Result<(), FormatError> {
    if expected != actual {
        return Err(FormatError::Invalid(format!(
            "{what} has {actual} positions, code needs {expected}"
        )));
    }
    Ok(())
}

fn check_tool_version(version: &str, diag: &mut FileDiagnostic) {
    let major = |v: &str| v.split('.').next().unwrap_or("").to_string();
    if version.is_empty() {
        diag.problems.push("empty tool version".into());
    } else if major(version) != major(crate::VERSION) {
        diag.problems.push(format!(
            "written by tool version {version}, this is {}",
            crate::VERSION
        ));
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::enhanced::{encrypt_enhanced, EncryptOptions};
    use crate::pke::keygen;
    use crate::rng::SimRng;

    fn bundle() -> (CiphertextBundle, AliceRecord, KeyPair) {
        let mut rng = SimRng::from_seed(1);
        let kp = keygen(PkeScheme::toy(16).unwrap(), 128, &mut rng);
        let code = CodeSpec::bch_31_16_7();
        let msg = crate::bits::BitString::random(16, &mut rng);
        let (b, r) =
            encrypt_enhanced(&kp.pk, &msg, &code, &EncryptOptions::default(), &mut rng).unwrap();
        (b, r, kp)
    }

    #[test]
    fn qreg_roundtrip_is_exact() {
        let (b, _, _) = bundle();
        let file = QregFile::from_bundle(&b, Some(42)).unwrap();
        let back = QregFile::from_bytes(&file.to_bytes()).unwrap();
        assert_eq!(back, file);
        assert_eq!(back.seed, Some(42));
        assert!(!back.into_bundle().unwrap().is_consumed());
    }

    #[test]
    fn truncation_reports_offset() {
        let (b, _, _) = bundle();
        let bytes = QregFile::from_bundle(&b, None).unwrap().to_bytes();
        let cut = &bytes[..bytes.len() - 5];
        match QregFile::from_bytes(cut) {
            Err(FormatError::Truncated { offset, needed, .. }) => {
                assert_eq!(offset, bytes.len() - 31);
                assert_eq!(needed, 31);
            }
            other => panic!("{other:?}"),
        }
        assert!(matches!(
            QregFile::from_bytes(&bytes[..3]),
            Err(FormatError::Truncated { offset: 0, .. })
        ));
        assert!(matches!(
            QregFile::from_bytes(b"NOPE...."),
            Err(FormatError::BadMagic)
        ));
        let mut extra = bytes.clone();
        extra.push(0);
        assert!(matches!(
            QregFile::from_bytes(&extra),
            Err(FormatError::TrailingBytes { extra: 1, .. })
        ));
    }

    #[test]
    fn consumed_flags_survive() {
        let (mut b, _, _) = bundle();
        let mut r = b.register().unwrap().clone();
        r.measure(
            0,
            crate::qubit::Basis::Computational,
            &mut SimRng::from_seed(2),
        )
        .unwrap();
        let file = QregFile::new(ReturnedState::Product(r), Some(b.code()), None);
        let back = QregFile::from_bytes(&file.to_bytes()).unwrap();
        assert!(back.into_bundle().unwrap().is_consumed());
        crate::enhanced::bob_delete_quantum(&mut b).unwrap();
        assert!(QregFile::from_bundle(&b, None).is_none());
    }

    #[test]
    fn json_artifacts_roundtrip() {
        let (_, record, kp) = bundle();
        let f = JsonFile::new(record.clone(), Some(7));
        let back = JsonFile::<AliceRecord>::from_json(&f.to_json()).unwrap();
        assert_eq!(back.body, record);
        let pk = JsonFile::new(PublicKeyBody::from_key(&kp), None);
        let text = pk.to_json();
        assert!(!text.contains("sk_hex"));
        assert_eq!(
            JsonFile::<PublicKeyBody>::from_json(&text)
                .unwrap()
                .body
                .key()
                .unwrap(),
            kp.pk
        );
        assert!(matches!(
            JsonFile::<SecretKeyBody>::from_json(&text),
            Err(FormatError::WrongKind { .. })
        ));
        let sk = JsonFile::new(SecretKeyBody::from_key(&kp), None);
        assert_eq!(
            JsonFile::<SecretKeyBody>::from_json(&sk.to_json())
                .unwrap()
                .body
                .key()
                .unwrap(),
            kp.sk
        );
        assert!(!format!("{:?}", sk.body).contains(&sk.body.sk_hex));
    }

    #[test]
    fn validate_flags_duplicate_positions() {
        let dir = tempfile::tempdir().unwrap();
        let (b, record, _) = bundle();
        let good = dir.path().join("record.json");
        JsonFile::new(record.clone(), None).write(&good).unwrap();
        let mut bad_record = record.clone();
        bad_record.errors[1].position = bad_record.errors[0].position;
        let bad = dir.path().join("bad.json");
        JsonFile::new(bad_record, None).write(&bad).unwrap();
        let reg = dir.path().join("bundle.qreg");
        QregFile::from_bundle(&b, None)
            .unwrap()
            .write(&reg)
            .unwrap();
        let short = dir.path().join("short.qreg");
        let bytes = fs::read(&reg).unwrap();
        fs::write(&short, &bytes[..100]).unwrap();

        let diags = validate_files(&[&good, &bad, &reg, &short]);
        assert!(diags[0].ok(), "{:?}", diags[0]);
        assert!(
            diags[1].problems[0].contains("duplicate error position"),
            "{:?}",
            diags[1]
        );
        assert!(diags[2].ok(), "{:?}", diags[2]);
        assert!(diags[3].problems[0].contains("offset"), "{:?}", diags[3]);
        assert_eq!(fs::read(&reg).unwrap(), bytes);
    }
}
