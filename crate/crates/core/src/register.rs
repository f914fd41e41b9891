use thiserror::Error;

use crate::qubit::{basis_state, measure_qubit, Basis, Qubit};
use crate::rng::SimRng;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum RegisterError {
    #[error("qubit index {index} out of range for register of {len}")]
    IndexOutOfRange { index: usize, len: usize },
    #[error("expected {expected} bases, got {actual}")]
    LengthMismatch { expected: usize, actual: usize },
}

/// Ordered product of single-qubit states. Length is fixed at construction.
///
/// Measuring a slot replaces its state with the collapsed eigenstate and sets
/// the slot's consumed flag; the pre-measurement amplitudes are gone.
#[derive(Debug, Clone, PartialEq)]
pub struct ProductRegister {
    qubits: Vec<Qubit>,
    consumed: Vec<bool>,
}

impl ProductRegister {
    pub fn new(qubits: Vec<Qubit>) -> Self {
        let consumed = vec![false; qubits.len()];
        Self { qubits, consumed }
    }

    /// Each `bits[i]` prepared in `bases[i]`.
    pub fn prepare(bases: &[Basis], bits: &[u8]) -> Self {
        assert_eq!(bases.len(), bits.len());
        Self::new(
            bases
                .iter()
                .zip(bits)
                .map(|(&b, &bit)| basis_state(b, bit))
                .collect(),
        )
    }

    pub(crate) fn from_parts(qubits: Vec<Qubit>, consumed: Vec<bool>) -> Self {
        assert_eq!(qubits.len(), consumed.len());
        Self { qubits, consumed }
    }

    pub fn len(&self) -> usize {
        self.qubits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.qubits.is_empty()
    }

    pub fn qubits(&self) -> &[Qubit] {
        &self.qubits
    }

    pub fn consumed(&self) -> &[bool] {
        &self.consumed
    }

    pub fn is_consumed(&self, index: usize) -> bool {
        self.consumed[index]
    }

    pub fn any_consumed(&self) -> bool {
        self.consumed.iter().any(|&c| c)
    }

    pub fn measure(
        &mut self,
        index: usize,
        basis: Basis,
        rng: &mut SimRng,
    ) -> Result<u8, RegisterError> {
        let len = self.len();
        let q = self
            .qubits
            .get(index)
            .ok_or(RegisterError::IndexOutOfRange { index, len })?;
        let (bit, collapsed) = measure_qubit(q, basis, rng);
        self.qubits[index] = collapsed;
        self.consumed[index] = true;
        Ok(bit)
    }

    /// Measures qubit `i` in `bases[i]` for every `i`, in index order.
    pub fn measure_all(
        &mut self,
        bases: &[Basis],
        rng: &mut SimRng,
    ) -> Result<Vec<u8>, RegisterError> {
        if bases.len() != self.len() {
            return Err(RegisterError::LengthMismatch {
                expected: self.len(),
                actual: bases.len(),
            });
        }
        (0..self.len())
            .map(|i| self.measure(i, bases[i], rng))
            .collect()
    }

    pub fn measure_all_in(&mut self, basis: Basis, rng: &mut SimRng) -> Vec<u8> {
        (0..self.len())
            .map(|i| self.measure(i, basis, rng).expect("index in range"))
            .collect()
    }
}
