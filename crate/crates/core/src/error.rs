use thiserror::Error;

use crate::bits::BitsError;
use crate::code::CodeError;
use crate::dense::DenseError;
use crate::pke::PkeError;
use crate::qubit::QubitError;
use crate::register::RegisterError;

/// Errors raised by the protocol layers.
#[derive(Debug, Error, PartialEq)]
pub enum ProtocolError {
    #[error("quantum register already consumed")]
    AlreadyConsumed,
    #[error("{what}: expected {expected}, got {actual}")]
    LengthMismatch {
        what: &'static str,
        expected: usize,
        actual: usize,
    },
    #[error("bundle was prepared for code {bundle}, not {given}")]
    CodeMismatch { bundle: String, given: String },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error(transparent)]
    Pke(#[from] PkeError),
    #[error(transparent)]
    Code(#[from] CodeError),
    #[error(transparent)]
    Dense(#[from] DenseError),
    #[error(transparent)]
    Register(#[from] RegisterError),
    #[error(transparent)]
    Qubit(#[from] QubitError),
    #[error(transparent)]
    Bits(#[from] BitsError),
}
