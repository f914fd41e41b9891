//! C ABI over `pkecd`.
//!
//! Objects are opaque heap handles created by `pkecd_*_new`/`generate`/`read`
//! functions and released with the matching `pkecd_*_free`. Every fallible
//! call returns a [`PkecdStatus`]; on failure a message is available from
//! [`pkecd_last_error_message`] on the same thread.
//!
//! Bit strings cross the boundary as arrays of bytes holding 0 or 1, most
//! significant bit first.
//!
//! Pointer arguments must be null or valid for the duration of the call;
//! handles must come from this library and be freed exactly once.

// Entry points check for null; the remaining contract is stated above.
#![allow(clippy::not_unsafe_ptr_arg_deref)]

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::ptr;

use pkecd::bits::BitString;
use pkecd::code::CodeSpec;
use pkecd::enhanced::{
    alice_verify_quantum, bob_decrypt, bob_delete_quantum, cheat_measure_forge, encrypt_enhanced,
    AliceRecord, BobReading, CiphertextBundle, EncryptOptions, ErrorMode, GlobalBasis, ReadOutcome,
    ReturnedState,
};
use pkecd::error::ProtocolError;
use pkecd::experiments::seal_bounds;
use pkecd::formats::{FormatError, JsonFile, QregFile};
use pkecd::pke::{keygen, KeyPair, PkeScheme};
use pkecd::rng::SimRng;

/// Result codes.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PkecdStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    AlreadyConsumed = 3,
    LengthMismatch = 4,
    /// Decoding or decryption produced no plaintext. Not an API error.
    DecryptFailed = 5,
    BufferTooSmall = 6,
    Io = 7,
    Format = 8,
    Panic = 99,
}

/// Which error-qubit basis distribution to use.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PkecdErrorMode {
    Bloch = 0,
    Conjugate = 1,
}

/// Bob's basis guess as reported by the reading calls.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PkecdBasis {
    Computational = 0,
    Hadamard = 1,
}

pub struct PkecdRng(SimRng);
pub struct PkecdKeyPair(KeyPair);
pub struct PkecdBundle(CiphertextBundle);
pub struct PkecdRecord(AliceRecord);
pub struct PkecdReturned(ReturnedState);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

struct Failure {
    status: PkecdStatus,
    message: String,
}

impl Failure {
    fn new(status: PkecdStatus, message: impl Into<String>) -> Self {
        Self {
            status,
            message: message.into(),
        }
    }
}

impl From<ProtocolError> for Failure {
    fn from(e: ProtocolError) -> Self {
        let status = match &e {
            ProtocolError::AlreadyConsumed => PkecdStatus::AlreadyConsumed,
            ProtocolError::LengthMismatch { .. } => PkecdStatus::LengthMismatch,
            _ => PkecdStatus::InvalidArgument,
        };
        Failure::new(status, e.to_string())
    }
}

impl From<FormatError> for Failure {
    fn from(e: FormatError) -> Self {
        let status = match e {
            FormatError::Io { .. } => PkecdStatus::Io,
            _ => PkecdStatus::Format,
        };
        Failure::new(status, e.to_string())
    }
}

fn set_last_error(message: &str) {
    let c = CString::new(message.replace('\0', " ")).expect("interior nul removed");
    LAST_ERROR.with(|slot| *slot.borrow_mut() = Some(c));
}

/// Runs `f`, records any failure message, and never lets a panic cross the boundary.
fn guard(f: impl FnOnce() -> Result<PkecdStatus, Failure>) -> PkecdStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(status)) => status,
        Ok(Err(failure)) => {
            set_last_error(&failure.message);
            failure.status
        }
        Err(_) => {
            set_last_error("internal panic");
            PkecdStatus::Panic
        }
    }
}

fn non_null<'a, T>(p: *const T, what: &str) -> Result<&'a T, Failure> {
    // SAFETY: callers pass either null or a pointer obtained from this library.
    unsafe { p.as_ref() }
        .ok_or_else(|| Failure::new(PkecdStatus::NullPointer, format!("{what} is null")))
}

fn non_null_mut<'a, T>(p: *mut T, what: &str) -> Result<&'a mut T, Failure> {
    // SAFETY: as in `non_null`, plus exclusive access for the call duration.
    unsafe { p.as_mut() }
        .ok_or_else(|| Failure::new(PkecdStatus::NullPointer, format!("{what} is null")))
}

fn c_str<'a>(p: *const c_char, what: &str) -> Result<&'a str, Failure> {
    if p.is_null() {
        return Err(Failure::new(
            PkecdStatus::NullPointer,
            format!("{what} is null"),
        ));
    }
    // SAFETY: non-null, and the caller promises a nul-terminated string.
    unsafe { CStr::from_ptr(p) }
        .to_str()
        .map_err(|_| Failure::new(PkecdStatus::InvalidArgument, format!("{what} is not utf-8")))
}

fn put<T>(out: *mut *mut T, value: T, what: &str) -> Result<(), Failure> {
    let slot = non_null_mut(out, what)?;
    *slot = Box::into_raw(Box::new(value));
    Ok(())
}

fn free<T>(p: *mut T) {
    if !p.is_null() {
        // SAFETY: `p` came from `Box::into_raw` in this library and is freed once.
        drop(unsafe { Box::from_raw(p) });
    }
}

/// Copies `bits` into the caller's buffer and reports the length.
fn write_bits(
    bits: &BitString,
    out: *mut u8,
    capacity: usize,
    written: *mut usize,
) -> Result<(), Failure> {
    let written = non_null_mut(written, "out_len")?;
    *written = bits.len();
    if bits.len() > capacity {
        return Err(Failure::new(
            PkecdStatus::BufferTooSmall,
            format!("need {} bytes, buffer holds {capacity}", bits.len()),
        ));
    }
    if out.is_null() {
        return Err(Failure::new(PkecdStatus::NullPointer, "out_bits is null"));
    }
    // SAFETY: `out` is non-null and the caller guarantees `capacity` writable bytes.
    unsafe { ptr::copy_nonoverlapping(bits.as_slice().as_ptr(), out, bits.len()) };
    Ok(())
}

fn reading_status(
    reading: &BobReading,
    out_bits: *mut u8,
    capacity: usize,
    out_len: *mut usize,
    out_guess: *mut PkecdBasis,
) -> Result<PkecdStatus, Failure> {
    if let Some(g) = unsafe { out_guess.as_mut() } {
        *g = match reading.guess {
            GlobalBasis::Computational => PkecdBasis::Computational,
            GlobalBasis::Hadamard => PkecdBasis::Hadamard,
        };
    }
    match &reading.outcome {
        ReadOutcome::Plaintext(p) => {
            write_bits(p, out_bits, capacity, out_len)?;
            Ok(PkecdStatus::Ok)
        }
        ReadOutcome::DecryptFailed => {
            *non_null_mut(out_len, "out_len")? = 0;
            Ok(PkecdStatus::DecryptFailed)
        }
    }
}

/// Library version as a static nul-terminated string.
#[no_mangle]
pub extern "C" fn pkecd_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Message for the last failed call on this thread, or null. Valid until the
/// next failing call on the same thread.
#[no_mangle]
pub extern "C" fn pkecd_last_error_message() -> *const c_char {
    LAST_ERROR.with(|slot| slot.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

#[no_mangle]
pub extern "C" fn pkecd_rng_new(seed: u64) -> *mut PkecdRng {
    Box::into_raw(Box::new(PkecdRng(SimRng::from_seed(seed))))
}

#[no_mangle]
pub extern "C" fn pkecd_rng_free(rng: *mut PkecdRng) {
    free(rng);
}

/// Toy PKE key pair with `block_bits`-bit ciphertexts and `plaintext_bits`-bit messages.
#[no_mangle]
pub extern "C" fn pkecd_keypair_generate(
    block_bits: u32,
    plaintext_bits: u32,
    rng: *mut PkecdRng,
    out: *mut *mut PkecdKeyPair,
) -> PkecdStatus {
    guard(|| {
        let rng = non_null_mut(rng, "rng")?;
        let scheme = PkeScheme::toy_with_plaintext(block_bits as usize, plaintext_bits as usize)
            .map_err(|e| Failure::new(PkecdStatus::InvalidArgument, e.to_string()))?;
        put(out, PkecdKeyPair(keygen(scheme, 128, &mut rng.0)), "out")?;
        Ok(PkecdStatus::Ok)
    })
}

#[no_mangle]
pub extern "C" fn pkecd_keypair_free(kp: *mut PkecdKeyPair) {
    free(kp);
}

/// Encrypts `msg` (`msg_len` bytes of 0/1) under `code_name`, e.g. `"bch-31-16-7"`.
/// `error_count < 0` means the code's correction radius.
#[no_mangle]
pub extern "C" fn pkecd_encrypt(
    kp: *const PkecdKeyPair,
    code_name: *const c_char,
    msg: *const u8,
    msg_len: usize,
    error_mode: PkecdErrorMode,
    error_count: i32,
    rng: *mut PkecdRng,
    out_bundle: *mut *mut PkecdBundle,
    out_record: *mut *mut PkecdRecord,
) -> PkecdStatus {
    guard(|| {
        let kp = non_null(kp, "keypair")?;
        let rng = non_null_mut(rng, "rng")?;
        let code = CodeSpec::by_name(c_str(code_name, "code_name")?)
            .map_err(|e| Failure::new(PkecdStatus::InvalidArgument, e.to_string()))?;
        if msg.is_null() && msg_len > 0 {
            return Err(Failure::new(PkecdStatus::NullPointer, "msg is null"));
        }
        let raw: &[u8] = if msg_len == 0 {
            &[]
        } else {
            // SAFETY: non-null and the caller guarantees `msg_len` readable bytes.
            unsafe { std::slice::from_raw_parts(msg, msg_len) }
        };
        if raw.iter().any(|&b| b > 1) {
            return Err(Failure::new(
                PkecdStatus::InvalidArgument,
                "message bytes must be 0 or 1",
            ));
        }
        if raw.len() != kp.0.scheme.plaintext_bits() {
            return Err(Failure::new(
                PkecdStatus::LengthMismatch,
                format!(
                    "message has {} bits, key takes {}",
                    raw.len(),
                    kp.0.scheme.plaintext_bits()
                ),
            ));
        }
        let opts = EncryptOptions {
            error_mode: match error_mode {
                PkecdErrorMode::Bloch => ErrorMode::Bloch,
                PkecdErrorMode::Conjugate => ErrorMode::Conjugate,
            },
            error_count: usize::try_from(error_count).ok(),
            ..EncryptOptions::default()
        };
        let message = BitString::from_bits(raw.iter().copied());
        let (bundle, record) = encrypt_enhanced(&kp.0.pk, &message, &code, &opts, &mut rng.0)?;
        if out_bundle.is_null() || out_record.is_null() {
            return Err(Failure::new(
                PkecdStatus::NullPointer,
                "output pointer is null",
            ));
        }
        put(out_bundle, PkecdBundle(bundle), "out_bundle")?;
        put(out_record, PkecdRecord(record), "out_record")?;
        Ok(PkecdStatus::Ok)
    })
}

#[no_mangle]
pub extern "C" fn pkecd_bundle_free(bundle: *mut PkecdBundle) {
    free(bundle);
}

/// 1 if the bundle's register has been used up, 0 if not, -1 for null.
#[no_mangle]
pub extern "C" fn pkecd_bundle_is_consumed(bundle: *const PkecdBundle) -> i32 {
    // SAFETY: null or a live handle.
    unsafe { bundle.as_ref() }.map_or(-1, |b| b.0.is_consumed() as i32)
}

/// Honest reading with a random basis guess. Consumes the bundle. Returns
/// `DECRYPT_FAILED` (with `*out_len = 0`) when nothing decodes.
#[no_mangle]
pub extern "C" fn pkecd_bob_decrypt(
    kp: *const PkecdKeyPair,
    bundle: *mut PkecdBundle,
    rng: *mut PkecdRng,
    out_bits: *mut u8,
    capacity: usize,
    out_len: *mut usize,
    out_guess: *mut PkecdBasis,
) -> PkecdStatus {
    guard(|| {
        let kp = non_null(kp, "keypair")?;
        let bundle = non_null_mut(bundle, "bundle")?;
        let rng = non_null_mut(rng, "rng")?;
        let code = CodeSpec::from_id(bundle.0.code());
        let reading = bob_decrypt(&kp.0.sk, &mut bundle.0, &code, &mut rng.0)?;
        reading_status(&reading, out_bits, capacity, out_len, out_guess)
    })
}

/// Hands the untouched register back. Consumes the bundle.
#[no_mangle]
pub extern "C" fn pkecd_bob_delete(
    bundle: *mut PkecdBundle,
    out: *mut *mut PkecdReturned,
) -> PkecdStatus {
    guard(|| {
        let bundle = non_null_mut(bundle, "bundle")?;
        if out.is_null() {
            return Err(Failure::new(PkecdStatus::NullPointer, "out is null"));
        }
        put(
            out,
            PkecdReturned(bob_delete_quantum(&mut bundle.0)?),
            "out",
        )?;
        Ok(PkecdStatus::Ok)
    })
}

/// Reads like [`pkecd_bob_decrypt`], then returns the collapsed register as a
/// forged certificate in `*out_returned`.
#[no_mangle]
pub extern "C" fn pkecd_cheat_measure_forge(
    kp: *const PkecdKeyPair,
    bundle: *mut PkecdBundle,
    rng: *mut PkecdRng,
    out_bits: *mut u8,
    capacity: usize,
    out_len: *mut usize,
    out_guess: *mut PkecdBasis,
    out_returned: *mut *mut PkecdReturned,
) -> PkecdStatus {
    guard(|| {
        let kp = non_null(kp, "keypair")?;
        let bundle = non_null_mut(bundle, "bundle")?;
        let rng = non_null_mut(rng, "rng")?;
        if out_returned.is_null() {
            return Err(Failure::new(
                PkecdStatus::NullPointer,
                "out_returned is null",
            ));
        }
        let code = CodeSpec::from_id(bundle.0.code());
        let (reading, returned) = cheat_measure_forge(&kp.0.sk, &mut bundle.0, &code, &mut rng.0)?;
        put(out_returned, PkecdReturned(returned), "out_returned")?;
        reading_status(&reading, out_bits, capacity, out_len, out_guess)
    })
}

#[no_mangle]
pub extern "C" fn pkecd_returned_free(returned: *mut PkecdReturned) {
    free(returned);
}

/// Alice's check of a returned register; `*out_accepted` is 1 or 0.
#[no_mangle]
pub extern "C" fn pkecd_alice_verify(
    record: *const PkecdRecord,
    returned: *const PkecdReturned,
    rng: *mut PkecdRng,
    out_accepted: *mut i32,
) -> PkecdStatus {
    guard(|| {
        let record = non_null(record, "record")?;
        let returned = non_null(returned, "returned")?;
        let rng = non_null_mut(rng, "rng")?;
        let out = non_null_mut(out_accepted, "out_accepted")?;
        *out = alice_verify_quantum(&record.0, &returned.0, &mut rng.0)? as i32;
        Ok(PkecdStatus::Ok)
    })
}

#[no_mangle]
pub extern "C" fn pkecd_record_free(record: *mut PkecdRecord) {
    free(record);
}

/// Record as JSON; release with [`pkecd_string_free`].
#[no_mangle]
pub extern "C" fn pkecd_record_to_json(
    record: *const PkecdRecord,
    out: *mut *mut c_char,
) -> PkecdStatus {
    guard(|| {
        let record = non_null(record, "record")?;
        let out = non_null_mut(out, "out")?;
        let json = JsonFile::new(record.0.clone(), None).to_json();
        *out = CString::new(json).expect("json has no nul").into_raw();
        Ok(PkecdStatus::Ok)
    })
}

#[no_mangle]
pub extern "C" fn pkecd_record_from_json(
    json: *const c_char,
    out: *mut *mut PkecdRecord,
) -> PkecdStatus {
    guard(|| {
        let text = c_str(json, "json")?;
        let record = JsonFile::<AliceRecord>::from_json(text)?.body;
        record.validate(&CodeSpec::from_id(record.code))?;
        put(out, PkecdRecord(record), "out")?;
        Ok(PkecdStatus::Ok)
    })
}

#[no_mangle]
pub extern "C" fn pkecd_string_free(s: *mut c_char) {
    if !s.is_null() {
        // SAFETY: produced by `CString::into_raw` in this library.
        drop(unsafe { CString::from_raw(s) });
    }
}

/// Writes an unconsumed bundle to a `.qreg` file.
#[no_mangle]
pub extern "C" fn pkecd_bundle_write(
    bundle: *const PkecdBundle,
    path: *const c_char,
) -> PkecdStatus {
    guard(|| {
        let bundle = non_null(bundle, "bundle")?;
        let path = c_str(path, "path")?;
        let file = QregFile::from_bundle(&bundle.0, None).ok_or(ProtocolError::AlreadyConsumed)?;
        file.write(Path::new(path))?;
        Ok(PkecdStatus::Ok)
    })
}

#[no_mangle]
pub extern "C" fn pkecd_bundle_read(
    path: *const c_char,
    out: *mut *mut PkecdBundle,
) -> PkecdStatus {
    guard(|| {
        let path = c_str(path, "path")?;
        let bundle = QregFile::read(Path::new(path))?.into_bundle()?;
        put(out, PkecdBundle(bundle), "out")?;
        Ok(PkecdStatus::Ok)
    })
}

#[no_mangle]
pub extern "C" fn pkecd_returned_write(
    returned: *const PkecdReturned,
    path: *const c_char,
) -> PkecdStatus {
    guard(|| {
        let returned = non_null(returned, "returned")?;
        let path = c_str(path, "path")?;
        QregFile::new(returned.0.clone(), None, None).write(Path::new(path))?;
        Ok(PkecdStatus::Ok)
    })
}

#[no_mangle]
pub extern "C" fn pkecd_returned_read(
    path: *const c_char,
    out: *mut *mut PkecdReturned,
) -> PkecdStatus {
    guard(|| {
        let path = c_str(path, "path")?;
        let state = QregFile::read(Path::new(path))?.state;
        put(out, PkecdReturned(state), "out")?;
        Ok(PkecdStatus::Ok)
    })
}

/// Seal tradeoff bounds for reading probability `p` and `m` message bits.
#[no_mangle]
pub extern "C" fn pkecd_seal_bounds(
    p: f64,
    m: u64,
    out_p_dist: *mut f64,
    out_p_nfp: *mut f64,
) -> PkecdStatus {
    guard(|| {
        let b = seal_bounds(p, m)
            .map_err(|e| Failure::new(PkecdStatus::InvalidArgument, e.to_string()))?;
        *non_null_mut(out_p_dist, "out_p_dist")? = b.p_dist;
        *non_null_mut(out_p_nfp, "out_p_nfp")? = b.p_nfp;
        Ok(PkecdStatus::Ok)
    })
}
