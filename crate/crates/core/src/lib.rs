//! Simulation toolkit for public-key encryption with certified deletion.
//!
//! Two schemes are modeled on top of a small quantum simulator:
//!
//! * [`original`]: a conjugate-coding scheme where the receiver, holding the
//!   secret key, can read the hidden bit without disturbing the state and
//!   still produce a valid deletion certificate ([`original::attack_original`]).
//! * [`enhanced`]: an error-correcting-code scheme in which one global basis
//!   hides the codeword and a few randomly prepared error qubits make any
//!   reading detectable.
//!
//! [`experiments`] estimates reading, detection and honest-acceptance
//! probabilities by Monte Carlo.

pub mod bits;
pub mod code;
pub mod dense;
pub mod enhanced;
pub mod error;
pub mod experiments;
pub mod original;
pub mod pke;
pub mod qubit;
pub mod register;
pub mod rng;

/// Tool version embedded in every written artifact.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
pub mod cli;
pub mod formats;
