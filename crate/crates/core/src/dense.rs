//! Dense state-vector engine for coherent multi-qubit measurements.
//!
//! Qubit 0 is the most significant bit of the amplitude index, so the string
//! `s_0 s_1 ... s_{n-1}` read as a binary number is its index.

use num_complex::Complex64;
use thiserror::Error;

use crate::qubit::{Basis, Qubit};
use crate::register::ProductRegister;
use crate::rng::SimRng;

pub const DEFAULT_DENSE_CAP: usize = 20;
pub const DENSE_TOL: f64 = 1e-9;

#[derive(Debug, Error, PartialEq)]
pub enum DenseError {
    #[error("register of {n} qubits exceeds dense cap {cap}")]
    RegisterTooLarge { n: usize, cap: usize },
    #[error("qubit {0} was already measured")]
    ConsumedQubit(usize),
    #[error("qubit index {index} out of range for {n} qubits")]
    IndexOutOfRange { index: usize, n: usize },
    #[error("sampled outcome {0} has zero probability mass")]
    EmptyOutcome(usize),
    #[error("invalid partition: {0}")]
    InvalidPartition(String),
    #[error("state not normalized (norm^2 = {0})")]
    NotNormalized(f64),
}

/// Pure state on `n` qubits as `2^n` amplitudes.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseState {
    n: usize,
    amps: Vec<Complex64>,
}

type Matrix2 = [[Complex64; 2]; 2];

impl DenseState {
    pub fn from_amplitudes(n: usize, amps: Vec<Complex64>) -> Result<Self, DenseError> {
        if amps.len() != 1usize << n {
            return Err(DenseError::InvalidPartition(format!(
                "expected {} amplitudes, got {}",
                1usize << n,
                amps.len()
            )));
        }
        let norm: f64 = amps.iter().map(|a| a.norm_sqr()).sum();
        if (norm - 1.0).abs() > DENSE_TOL {
            return Err(DenseError::NotNormalized(norm));
        }
        Ok(Self { n, amps })
    }

    pub fn num_qubits(&self) -> usize {
        self.n
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    /// Largest amplitude-wise difference to `other`.
    pub fn max_abs_diff(&self, other: &DenseState) -> f64 {
        assert_eq!(self.n, other.n);
        self.amps
            .iter()
            .zip(&other.amps)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    fn bit_mask(&self, index: usize) -> usize {
        1usize << (self.n - 1 - index)
    }

    /// Applies a 2x2 matrix to qubit `index`.
    fn apply_single(&mut self, index: usize, m: &Matrix2) {
        let mask = self.bit_mask(index);
        for i0 in 0..self.amps.len() {
            if i0 & mask != 0 {
                continue;
            }
            let i1 = i0 | mask;
            let (a0, a1) = (self.amps[i0], self.amps[i1]);
            self.amps[i0] = m[0][0] * a0 + m[0][1] * a1;
            self.amps[i1] = m[1][0] * a0 + m[1][1] * a1;
        }
    }

    /// Re-expresses every qubit in `basis` coordinates: afterwards index `s`
    /// holds the amplitude of the product basis state labeled `s`.
    pub fn into_basis_coordinates(mut self, basis: Basis) -> Self {
        let m = to_basis_matrix(basis);
        for i in 0..self.n {
            self.apply_single(i, &m);
        }
        self
    }

    /// Inverse of [`DenseState::into_basis_coordinates`].
    pub fn from_basis_coordinates(mut self, basis: Basis) -> Self {
        let m = adjoint(&to_basis_matrix(basis));
        for i in 0..self.n {
            self.apply_single(i, &m);
        }
        self
    }
}

fn to_basis_matrix(basis: Basis) -> Matrix2 {
    let [b0, b1] = basis.vectors();
    [
        [b0.amp0().conj(), b0.amp1().conj()],
        [b1.amp0().conj(), b1.amp1().conj()],
    ]
}

fn adjoint(m: &Matrix2) -> Matrix2 {
    [
        [m[0][0].conj(), m[1][0].conj()],
        [m[0][1].conj(), m[1][1].conj()],
    ]
}

/// Tensor product of a product register. Fails on consumed slots or above `cap`.
pub fn to_dense(r: &ProductRegister, cap: usize) -> Result<DenseState, DenseError> {
    let n = r.len();
    if n > cap {
        return Err(DenseError::RegisterTooLarge { n, cap });
    }
    if let Some(i) = r.consumed().iter().position(|&c| c) {
        return Err(DenseError::ConsumedQubit(i));
    }
    Ok(product_state(r.qubits()))
}

pub(crate) fn product_state(qubits: &[Qubit]) -> DenseState {
    let mut amps = vec![Complex64::new(1.0, 0.0)];
    for q in qubits {
        let mut next = Vec::with_capacity(amps.len() * 2);
        for a in &amps {
            next.push(a * q.amp0());
            next.push(a * q.amp1());
        }
        amps = next;
    }
    DenseState {
        n: qubits.len(),
        amps,
    }
}

/// A labeling of every `n`-bit string with one of `num_labels` outcomes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StringPartition {
    n: usize,
    labels: Vec<u32>,
    num_labels: usize,
}

impl StringPartition {
    /// Validates that `subsets` are disjoint and cover `{0,1}^n`; subset `j` gets label `j`.
    pub fn from_subsets(n: usize, subsets: &[Vec<usize>]) -> Result<Self, DenseError> {
        let size = 1usize << n;
        let mut labels = vec![u32::MAX; size];
        for (label, subset) in subsets.iter().enumerate() {
            for &s in subset {
                if s >= size {
                    return Err(DenseError::InvalidPartition(format!(
                        "string {s} out of range"
                    )));
                }
                if labels[s] != u32::MAX {
                    return Err(DenseError::InvalidPartition(format!(
                        "string {s} in subsets {} and {label}",
                        labels[s]
                    )));
                }
                labels[s] = label as u32;
            }
        }
        if let Some(s) = labels.iter().position(|&l| l == u32::MAX) {
            return Err(DenseError::InvalidPartition(format!(
                "string {s} not covered"
            )));
        }
        Ok(Self {
            n,
            labels,
            num_labels: subsets.len(),
        })
    }

    /// Trusted construction from a per-string label table.
    pub fn from_labels(n: usize, labels: Vec<u32>, num_labels: usize) -> Result<Self, DenseError> {
        if labels.len() != 1usize << n {
            return Err(DenseError::InvalidPartition(format!(
                "label table has {} entries, expected {}",
                labels.len(),
                1usize << n
            )));
        }
        if let Some(&bad) = labels.iter().find(|&&l| l as usize >= num_labels) {
            return Err(DenseError::InvalidPartition(format!(
                "label {bad} >= {num_labels}"
            )));
        }
        Ok(Self {
            n,
            labels,
            num_labels,
        })
    }

    pub fn num_labels(&self) -> usize {
        self.num_labels
    }

    pub fn label_of(&self, string: usize) -> usize {
        self.labels[string] as usize
    }

    /// Probability mass of each label under `d`.
    pub fn masses(&self, d: &DenseState) -> Vec<f64> {
        let mut mass = vec![0.0; self.num_labels];
        for (s, a) in d.amps.iter().enumerate() {
            mass[self.labels[s] as usize] += a.norm_sqr();
        }
        mass
    }
}

fn sample_index(weights: &[f64], rng: &mut SimRng) -> usize {
    let total: f64 = weights.iter().sum();
    let mut target = rng.unit() * total;
    for (i, &w) in weights.iter().enumerate() {
        if target < w {
            return i;
        }
        target -= w;
    }
    // Rounding fallthrough: last label with nonzero weight.
    weights
        .iter()
        .rposition(|&w| w > 0.0)
        .unwrap_or(weights.len() - 1)
}

/// Projective measurement onto the string subsets of `partition`.
pub fn dense_project_onto_strings(
    d: &DenseState,
    partition: &StringPartition,
    rng: &mut SimRng,
) -> Result<(usize, DenseState), DenseError> {
    if partition.n != d.n {
        return Err(DenseError::InvalidPartition(format!(
            "partition over {} qubits applied to {}-qubit state",
            partition.n, d.n
        )));
    }
    let mass = partition.masses(d);
    let label = sample_index(&mass, rng);
    if mass[label] <= 0.0 {
        return Err(DenseError::EmptyOutcome(label));
    }
    let scale = 1.0 / mass[label].sqrt();
    let amps = d
        .amps
        .iter()
        .enumerate()
        .map(|(s, &a)| {
            if partition.labels[s] as usize == label {
                a * scale
            } else {
                Complex64::new(0.0, 0.0)
            }
        })
        .collect();
    Ok((label, DenseState { n: d.n, amps }))
}

/// Two-outcome projective measurement of one qubit of a dense state.
pub fn dense_measure_qubit(
    d: &DenseState,
    index: usize,
    basis: Basis,
    rng: &mut SimRng,
) -> Result<(u8, DenseState), DenseError> {
    if index >= d.n {
        return Err(DenseError::IndexOutOfRange { index, n: d.n });
    }
    let vectors = basis.vectors();
    let mask = d.bit_mask(index);
    // Component of each index pair along the two basis vectors.
    let mut prob = [0.0f64; 2];
    for i0 in (0..d.amps.len()).filter(|i| i & mask == 0) {
        let (a0, a1) = (d.amps[i0], d.amps[i0 | mask]);
        for (b, v) in vectors.iter().enumerate() {
            prob[b] += (v.amp0().conj() * a0 + v.amp1().conj() * a1).norm_sqr();
        }
    }
    let bit = sample_index(&prob, rng);
    if prob[bit] <= 0.0 {
        return Err(DenseError::EmptyOutcome(bit));
    }
    let v = vectors[bit];
    let scale = 1.0 / prob[bit].sqrt();
    let mut amps = vec![Complex64::new(0.0, 0.0); d.amps.len()];
    for i0 in (0..d.amps.len()).filter(|i| i & mask == 0) {
        let (a0, a1) = (d.amps[i0], d.amps[i0 | mask]);
        let c = (v.amp0().conj() * a0 + v.amp1().conj() * a1) * scale;
        amps[i0] = v.amp0() * c;
        amps[i0 | mask] = v.amp1() * c;
    }
    Ok((bit as u8, DenseState { n: d.n, amps }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qubit::{basis_state, outcome_probability};

    fn random_qubit(rng: &mut SimRng) -> Qubit {
        basis_state(Basis::random_general(rng), rng.bit())
    }

    #[test]
    fn basis_string_amplitude() {
        let r = ProductRegister::new(vec![Qubit::ZERO, Qubit::ONE]);
        let d = to_dense(&r, DEFAULT_DENSE_CAP).unwrap();
        let expect = [0.0, 1.0, 0.0, 0.0];
        for (a, e) in d.amplitudes().iter().zip(expect) {
            assert!((a - Complex64::new(e, 0.0)).norm() < 1e-12);
        }
    }

    #[test]
    fn plus_plus_is_uniform() {
        let r = ProductRegister::new(vec![Qubit::PLUS, Qubit::PLUS]);
        let d = to_dense(&r, DEFAULT_DENSE_CAP).unwrap();
        assert!(d
            .amplitudes()
            .iter()
            .all(|a| (a - Complex64::new(0.5, 0.0)).norm() < 1e-12));
    }

    #[test]
    fn dense_norm_random_registers() {
        let mut rng = SimRng::from_seed(5);
        for _ in 0..100 {
            let n = 1 + rng.below(10);
            let r = ProductRegister::new((0..n).map(|_| random_qubit(&mut rng)).collect());
            let d = to_dense(&r, DEFAULT_DENSE_CAP).unwrap();
            assert!((d.norm_sqr() - 1.0).abs() < DENSE_TOL);
        }
    }

    #[test]
    fn cap_and_consumed_rejected() {
        let r = ProductRegister::new(vec![Qubit::ZERO; 5]);
        assert_eq!(
            to_dense(&r, 4),
            Err(DenseError::RegisterTooLarge { n: 5, cap: 4 })
        );
        let mut r = ProductRegister::new(vec![Qubit::ZERO; 2]);
        r.measure(1, Basis::Computational, &mut SimRng::from_seed(0))
            .unwrap();
        assert_eq!(to_dense(&r, 4), Err(DenseError::ConsumedQubit(1)));
    }

    #[test]
    fn trivial_partition_leaves_state_unchanged() {
        let mut rng = SimRng::from_seed(9);
        let r = ProductRegister::new((0..3).map(|_| random_qubit(&mut rng)).collect());
        let d = to_dense(&r, DEFAULT_DENSE_CAP).unwrap();
        let p = StringPartition::from_subsets(3, &[(0..8).collect()]).unwrap();
        let (label, post) = dense_project_onto_strings(&d, &p, &mut rng).unwrap();
        assert_eq!(label, 0);
        assert!(post.max_abs_diff(&d) < 1e-12);
    }

    #[test]
    fn single_string_support_selects_its_subset() {
        let mut rng = SimRng::from_seed(10);
        // |1 0 1> is string index 5.
        let r = ProductRegister::new(vec![Qubit::ONE, Qubit::ZERO, Qubit::ONE]);
        let d = to_dense(&r, DEFAULT_DENSE_CAP).unwrap();
        let p =
            StringPartition::from_subsets(3, &[vec![0, 1, 2], vec![3, 4, 5], vec![6, 7]]).unwrap();
        for _ in 0..50 {
            let (label, post) = dense_project_onto_strings(&d, &p, &mut rng).unwrap();
            assert_eq!(label, 1);
            assert!(post.max_abs_diff(&d) < 1e-12);
        }
    }

    #[test]
    fn invalid_partitions_rejected() {
        assert!(StringPartition::from_subsets(2, &[vec![0, 1], vec![1, 2, 3]]).is_err());
        assert!(StringPartition::from_subsets(2, &[vec![0, 1], vec![2]]).is_err());
        assert!(StringPartition::from_subsets(2, &[vec![0, 1, 2, 9]]).is_err());
        assert!(StringPartition::from_labels(2, vec![0, 1, 0], 2).is_err());
        assert!(StringPartition::from_labels(2, vec![0, 1, 0, 2], 2).is_err());
    }

    #[test]
    fn projection_distribution_matches_brute_force() {
        let mut rng = SimRng::from_seed(21);
        let r = ProductRegister::new((0..3).map(|_| random_qubit(&mut rng)).collect());
        let d = to_dense(&r, DEFAULT_DENSE_CAP).unwrap();
        // Random 2-set partition.
        let mut first = Vec::new();
        let mut second = Vec::new();
        for s in 0..8 {
            if rng.coin() {
                first.push(s)
            } else {
                second.push(s)
            }
        }
        let p = StringPartition::from_subsets(3, &[first.clone(), second]).unwrap();
        // Oracle: per-string probability straight from the product of single-qubit amplitudes.
        let oracle: f64 = first
            .iter()
            .map(|&s| {
                (0..3)
                    .map(|i| {
                        let q = r.qubits()[i];
                        let bit = (s >> (2 - i)) & 1;
                        if bit == 0 {
                            q.amp0().norm_sqr()
                        } else {
                            q.amp1().norm_sqr()
                        }
                    })
                    .product::<f64>()
            })
            .sum();
        let trials = 100_000;
        let hits = (0..trials)
            .filter(|_| dense_project_onto_strings(&d, &p, &mut rng).unwrap().0 == 0)
            .count();
        let freq = hits as f64 / trials as f64;
        let sigma = (oracle * (1.0 - oracle) / trials as f64).sqrt().max(1e-9);
        assert!(
            (freq - oracle).abs() <= 3.0 * sigma + 1e-12,
            "freq {freq} oracle {oracle}"
        );
    }

    #[test]
    fn measuring_first_qubit_of_zero_plus() {
        let mut rng = SimRng::from_seed(2);
        let d = to_dense(&ProductRegister::new(vec![Qubit::ZERO, Qubit::PLUS]), 20).unwrap();
        for _ in 0..100 {
            let (bit, post) = dense_measure_qubit(&d, 0, Basis::Computational, &mut rng).unwrap();
            assert_eq!(bit, 0);
            assert!(post.max_abs_diff(&d) < 1e-12);
        }
    }

    #[test]
    fn dense_remeasurement_is_idempotent() {
        let mut rng = SimRng::from_seed(4);
        for _ in 0..200 {
            let r = ProductRegister::new((0..4).map(|_| random_qubit(&mut rng)).collect());
            let d = to_dense(&r, 20).unwrap();
            let basis = Basis::random_general(&mut rng);
            let i = rng.below(4);
            let (bit, post) = dense_measure_qubit(&d, i, basis, &mut rng).unwrap();
            assert!((post.norm_sqr() - 1.0).abs() < DENSE_TOL);
            let (again, post2) = dense_measure_qubit(&post, i, basis, &mut rng).unwrap();
            assert_eq!(bit, again);
            assert!(post.max_abs_diff(&post2) < 1e-9);
        }
    }

    #[test]
    fn dense_marginal_matches_product_form() {
        let mut rng = SimRng::from_seed(8);
        for _ in 0..50 {
            let qubits: Vec<Qubit> = (0..5).map(|_| random_qubit(&mut rng)).collect();
            let d = to_dense(&ProductRegister::new(qubits.clone()), 20).unwrap();
            let basis = Basis::random_general(&mut rng);
            let i = rng.below(5);
            // Single-shot probabilities: compare via the collapse normalization.
            let p0 = outcome_probability(&qubits[i], basis, 0);
            let [v0, _] = basis.vectors();
            let mask = 1usize << (4 - i);
            let dense_p0: f64 = (0..32)
                .filter(|s| s & mask == 0)
                .map(|s| {
                    (v0.amp0().conj() * d.amplitudes()[s]
                        + v0.amp1().conj() * d.amplitudes()[s | mask])
                        .norm_sqr()
                })
                .sum();
            assert!((p0 - dense_p0).abs() < 1e-12);
        }
    }

    #[test]
    fn basis_coordinates_roundtrip() {
        let mut rng = SimRng::from_seed(6);
        let r = ProductRegister::new((0..4).map(|_| random_qubit(&mut rng)).collect());
        let d = to_dense(&r, 20).unwrap();
        for basis in [
            Basis::Hadamard,
            Basis::Computational,
            Basis::random_general(&mut rng),
        ] {
            let back = d
                .clone()
                .into_basis_coordinates(basis)
                .from_basis_coordinates(basis);
            assert!(back.max_abs_diff(&d) < 1e-12);
        }
        // |+>|-> in Hadamard coordinates is the string 10.
        let pm = to_dense(&ProductRegister::new(vec![Qubit::PLUS, Qubit::MINUS]), 20)
            .unwrap()
            .into_basis_coordinates(Basis::Hadamard);
        assert!((pm.amplitudes()[0b10].norm() - 1.0).abs() < 1e-12);
    }
}
