//! Single-qubit pure states and measurement in arbitrary bases.
//!
//! Basis convention: under [`Basis::Hadamard`], bit 1 is `|+>` and bit 0 is
//! `|->`. Under [`Basis::General`] the two states are
//! `cos(t/2)|0> + e^{ip} sin(t/2)|1>` (bit 0) and
//! `sin(t/2)|0> - e^{ip} cos(t/2)|1>` (bit 1).

use std::f64::consts::{FRAC_1_SQRT_2, PI};
use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::rng::SimRng;

pub const SINGLE_QUBIT_TOL: f64 = 1e-12;

#[derive(Debug, Error, PartialEq)]
pub enum QubitError {
    #[error("polar angle {0} outside (0, pi)")]
    PolarOutOfRange(f64),
    #[error("azimuthal angle {0} outside (0, 2pi)")]
    AzimuthOutOfRange(f64),
    #[error("amplitudes not normalized (norm^2 = {0})")]
    NotNormalized(f64),
}

/// Preparation / measurement basis.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Basis {
    Computational,
    Hadamard,
    General { theta: f64, psi: f64 },
}

impl Basis {
    pub fn general(theta: f64, psi: f64) -> Result<Self, QubitError> {
        if !(theta > 0.0 && theta < PI) {
            return Err(QubitError::PolarOutOfRange(theta));
        }
        if !(psi > 0.0 && psi < 2.0 * PI) {
            return Err(QubitError::AzimuthOutOfRange(psi));
        }
        Ok(Basis::General { theta, psi })
    }

    /// Polar angle uniform in (0, pi), azimuth uniform in (0, 2pi).
    pub fn random_general(rng: &mut SimRng) -> Self {
        Basis::General {
            theta: PI * rng.open_unit(),
            psi: 2.0 * PI * rng.open_unit(),
        }
    }

    /// Computational or Hadamard with equal probability.
    pub fn random_conjugate(rng: &mut SimRng) -> Self {
        if rng.coin() {
            Basis::Hadamard
        } else {
            Basis::Computational
        }
    }

    pub fn validate(&self) -> Result<(), QubitError> {
        match *self {
            Basis::General { theta, psi } => Basis::general(theta, psi).map(|_| ()),
            _ => Ok(()),
        }
    }

    /// The two basis vectors `[state(0), state(1)]`.
    pub fn vectors(&self) -> [Qubit; 2] {
        [basis_state(*self, 0), basis_state(*self, 1)]
    }
}

impl fmt::Display for Basis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Basis::Computational => f.write_str("computational"),
            Basis::Hadamard => f.write_str("hadamard"),
            Basis::General { theta, psi } => write!(f, "general(theta={theta:.6}, psi={psi:.6})"),
        }
    }
}

/// Normalized single-qubit pure state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Qubit {
    amp0: Complex64,
    amp1: Complex64,
}

impl Qubit {
    pub const ZERO: Qubit = Qubit {
        amp0: Complex64::new(1.0, 0.0),
        amp1: Complex64::new(0.0, 0.0),
    };
    pub const ONE: Qubit = Qubit {
        amp0: Complex64::new(0.0, 0.0),
        amp1: Complex64::new(1.0, 0.0),
    };
    pub const PLUS: Qubit = Qubit {
        amp0: Complex64::new(FRAC_1_SQRT_2, 0.0),
        amp1: Complex64::new(FRAC_1_SQRT_2, 0.0),
    };
    pub const MINUS: Qubit = Qubit {
        amp0: Complex64::new(FRAC_1_SQRT_2, 0.0),
        amp1: Complex64::new(-FRAC_1_SQRT_2, 0.0),
    };

    /// Builds a state, rejecting amplitudes whose norm is off by more than 1e-12.
    pub fn new(amp0: Complex64, amp1: Complex64) -> Result<Self, QubitError> {
        let norm = amp0.norm_sqr() + amp1.norm_sqr();
        if (norm - 1.0).abs() > SINGLE_QUBIT_TOL {
            return Err(QubitError::NotNormalized(norm));
        }
        Ok(Self { amp0, amp1 })
    }

    /// Builds a state after rescaling to unit norm.
    pub fn normalized(amp0: Complex64, amp1: Complex64) -> Result<Self, QubitError> {
        let norm = (amp0.norm_sqr() + amp1.norm_sqr()).sqrt();
        if !(norm.is_finite() && norm > 0.0) {
            return Err(QubitError::NotNormalized(norm * norm));
        }
        Ok(Self {
            amp0: amp0 / norm,
            amp1: amp1 / norm,
        })
    }

    pub fn amp0(&self) -> Complex64 {
        self.amp0
    }

    pub fn amp1(&self) -> Complex64 {
        self.amp1
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amp0.norm_sqr() + self.amp1.norm_sqr()
    }

    /// `<self|other>`.
    pub fn inner(&self, other: &Qubit) -> Complex64 {
        self.amp0.conj() * other.amp0 + self.amp1.conj() * other.amp1
    }

    /// `0`, `1`, `+` or `-` when the state is one of the four conjugate
    /// coding states (up to global phase), `?` otherwise.
    pub fn symbol(&self) -> char {
        [
            (Qubit::ZERO, '0'),
            (Qubit::ONE, '1'),
            (Qubit::PLUS, '+'),
            (Qubit::MINUS, '-'),
        ]
        .into_iter()
        .find(|(q, _)| (q.inner(self).norm_sqr() - 1.0).abs() < 1e-9)
        .map_or('?', |(_, c)| c)
    }

    /// Coordinates of this state in `basis`: `[<b0|q>, <b1|q>]`.
    pub fn coordinates_in(&self, basis: Basis) -> [Complex64; 2] {
        let [b0, b1] = basis.vectors();
        [b0.inner(self), b1.inner(self)]
    }
}

/// The state encoding `bit` in `basis`.
pub fn basis_state(basis: Basis, bit: u8) -> Qubit {
    let bit = bit & 1;
    match basis {
        Basis::Computational => {
            if bit == 0 {
                Qubit::ZERO
            } else {
                Qubit::ONE
            }
        }
        Basis::Hadamard => {
            if bit == 1 {
                Qubit::PLUS
            } else {
                Qubit::MINUS
            }
        }
        Basis::General { theta, psi } => {
            let (s, c) = (theta / 2.0).sin_cos();
            let phase = Complex64::from_polar(1.0, psi);
            if bit == 0 {
                Qubit {
                    amp0: Complex64::new(c, 0.0),
                    amp1: phase * s,
                }
            } else {
                Qubit {
                    amp0: Complex64::new(s, 0.0),
                    amp1: -phase * c,
                }
            }
        }
    }
}

/// Born-rule probability of reading `bit` when measuring `q` in `basis`.
pub fn outcome_probability(q: &Qubit, basis: Basis, bit: u8) -> f64 {
    basis_state(basis, bit).inner(q).norm_sqr().clamp(0.0, 1.0)
}

/// Projective measurement; returns the outcome and the collapsed state.
pub fn measure_qubit(q: &Qubit, basis: Basis, rng: &mut SimRng) -> (u8, Qubit) {
    let p0 = outcome_probability(q, basis, 0);
    let bit = if rng.unit() < p0 { 0 } else { 1 };
    (bit, basis_state(basis, bit))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn close(a: Complex64, b: Complex64) -> bool {
        (a - b).norm() < 1e-12
    }

    #[test]
    fn computational_identity_case() {
        let q = basis_state(Basis::Computational, 0);
        assert_eq!(q.amp0(), Complex64::new(1.0, 0.0));
        assert_eq!(q.amp1(), Complex64::new(0.0, 0.0));
    }

    #[test]
    fn general_at_equator_is_plus() {
        // psi = 0 is outside the open interval, so build the variant directly.
        let q = basis_state(
            Basis::General {
                theta: PI / 2.0,
                psi: 0.0,
            },
            0,
        );
        let h = (PI / 4.0).cos();
        assert!(close(q.amp0(), Complex64::new(h, 0.0)));
        assert!(close(q.amp1(), Complex64::new((PI / 4.0).sin(), 0.0)));
        assert!(close(q.inner(&Qubit::PLUS), Complex64::new(1.0, 0.0)));
    }

    #[test]
    fn hadamard_one_is_plus() {
        let q = basis_state(Basis::Hadamard, 1);
        assert!(close(q.amp0(), Complex64::new(FRAC_1_SQRT_2, 0.0)));
        assert!(close(q.amp1(), Complex64::new(FRAC_1_SQRT_2, 0.0)));
        assert_eq!(basis_state(Basis::Hadamard, 0), Qubit::MINUS);
    }

    #[test]
    fn plus_in_computational_is_fair() {
        assert!((outcome_probability(&Qubit::PLUS, Basis::Computational, 0) - 0.5).abs() < 1e-12);
    }

    #[test]
    fn general_angles_validated() {
        assert!(Basis::general(0.0, 1.0).is_err());
        assert!(Basis::general(PI, 1.0).is_err());
        assert!(Basis::general(1.0, 0.0).is_err());
        assert!(Basis::general(1.0, 2.0 * PI).is_err());
        assert!(Basis::general(1.0, 1.0).is_ok());
        assert_ne!(Basis::Computational, Basis::Hadamard);
    }

    #[test]
    fn eigenstate_measurement_is_deterministic() {
        let mut rng = SimRng::from_seed(3);
        for _ in 0..1000 {
            let (bit, post) =
                measure_qubit(&basis_state(Basis::Hadamard, 1), Basis::Hadamard, &mut rng);
            assert_eq!(bit, 1);
            assert_eq!(post, Qubit::PLUS);
        }
    }

    #[test]
    fn born_rule_frequency_for_plus() {
        let mut rng = SimRng::from_seed(11);
        let trials = 100_000;
        let zeros = (0..trials)
            .filter(|_| measure_qubit(&Qubit::PLUS, Basis::Computational, &mut rng).0 == 0)
            .count();
        let freq = zeros as f64 / trials as f64;
        assert!((freq - 0.5).abs() < 0.01, "freq {freq}");
    }

    #[test]
    fn born_rule_frequency_for_general_state() {
        let mut rng = SimRng::from_seed(12);
        let basis = Basis::general(1.1, 4.0).unwrap();
        let q = basis_state(basis, 0);
        // Closed form read off the state definition.
        let expected = (1.1f64 / 2.0).cos().powi(2);
        assert!((outcome_probability(&q, Basis::Computational, 0) - expected).abs() < 1e-12);
        let trials = 100_000;
        let zeros = (0..trials)
            .filter(|_| measure_qubit(&q, Basis::Computational, &mut rng).0 == 0)
            .count();
        let freq = zeros as f64 / trials as f64;
        let sigma = (expected * (1.0 - expected) / trials as f64).sqrt();
        assert!(
            (freq - expected).abs() < 3.0 * sigma,
            "freq {freq} expected {expected}"
        );
    }

    #[test]
    fn conjugate_bases_are_mutually_unbiased() {
        for (b1, b2) in [
            (Basis::Computational, Basis::Hadamard),
            (Basis::Hadamard, Basis::Computational),
        ] {
            for bit in 0..2 {
                for other in 0..2 {
                    let p = outcome_probability(&basis_state(b1, bit), b2, other);
                    assert!((p - 0.5).abs() < 1e-15, "{b1} {bit} in {b2} {other}: {p}");
                }
            }
        }
    }

    fn any_basis() -> impl Strategy<Value = Basis> {
        prop_oneof![
            Just(Basis::Computational),
            Just(Basis::Hadamard),
            (1e-6..PI - 1e-6, 1e-6..2.0 * PI - 1e-6)
                .prop_map(|(t, p)| Basis::General { theta: t, psi: p }),
        ]
    }

    proptest! {
        #[test]
        fn basis_states_orthonormal(basis in any_basis()) {
            let [b0, b1] = basis.vectors();
            prop_assert!((b0.norm_sqr() - 1.0).abs() < 1e-12);
            prop_assert!((b1.norm_sqr() - 1.0).abs() < 1e-12);
            prop_assert!(b0.inner(&b1).norm() < 1e-12);
            for bit in 0..2u8 {
                prop_assert!((outcome_probability(&basis_state(basis, bit), basis, bit) - 1.0).abs() < 1e-12);
            }
        }

        #[test]
        fn outcome_probabilities_sum_to_one(prep in any_basis(), meas in any_basis(), bit in 0u8..2) {
            let q = basis_state(prep, bit);
            let total = outcome_probability(&q, meas, 0) + outcome_probability(&q, meas, 1);
            prop_assert!((total - 1.0).abs() < 1e-12);
        }

        #[test]
        fn remeasurement_repeats(prep in any_basis(), meas in any_basis(), seed in any::<u64>()) {
            let mut rng = SimRng::from_seed(seed);
            let (bit, post) = measure_qubit(&basis_state(prep, 0), meas, &mut rng);
            prop_assert!((post.norm_sqr() - 1.0).abs() < 1e-12);
            let (again, post2) = measure_qubit(&post, meas, &mut rng);
            prop_assert_eq!(bit, again);
            prop_assert_eq!(post, post2);
        }
    }
}
