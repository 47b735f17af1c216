//! States, channels, measurement and distance metrics.
//!
//! Basis ordering is big-endian: qubit 0 is the most significant bit of a
//! basis index, so `|10⟩` on two qubits is index 2.

use rand::distributions::{Distribution, WeightedIndex};

use super::matrix::{hermitian_eigenvalues, ComplexMatrix, C64, ONE, ZERO};
use crate::error::{Error, Result};
use crate::seed;

pub const STATE_TOL: f64 = 1e-9;

/// Density-matrix simulation is limited to this many qubits.
pub const DENSITY_QUBIT_CAP: usize = 8;
/// Unitary and state-vector simulation cap.
pub const SIMULATION_QUBIT_CAP: usize = 12;

pub(crate) fn check_qubits(qubits: &[usize], num_qubits: usize) -> Result<()> {
    for (i, &q) in qubits.iter().enumerate() {
        if q >= num_qubits {
            return Err(Error::QubitOutOfRange { qubit: q, num_qubits });
        }
        if qubits[..i].contains(&q) {
            return Err(Error::DuplicateQubit(q));
        }
    }
    Ok(())
}

/// Apply `m` (acting on `targets`, first target most significant) to an
/// amplitude vector over `n` qubits. No validation.
pub(crate) fn apply_matrix(amps: &mut [C64], n: usize, targets: &[usize], m: &ComplexMatrix) {
    let k = targets.len();
    let dim = 1usize << k;
    debug_assert_eq!(m.rows(), dim);
    let bits: Vec<usize> = targets.iter().map(|&q| 1usize << (n - 1 - q)).collect();
    let mask: usize = bits.iter().sum();
    let mut offsets = vec![0usize; dim];
    for (s, off) in offsets.iter_mut().enumerate() {
        for (j, &b) in bits.iter().enumerate() {
            if s & (1 << (k - 1 - j)) != 0 {
                *off |= b;
            }
        }
    }
    let mut buf = vec![ZERO; dim];
    let md = m.data();
    for base in 0..amps.len() {
        if base & mask != 0 {
            continue;
        }
        for (s, &off) in offsets.iter().enumerate() {
            buf[s] = amps[base | off];
        }
        for (r, &off) in offsets.iter().enumerate() {
            let row = &md[r * dim..(r + 1) * dim];
            amps[base | off] = row.iter().zip(&buf).map(|(a, b)| a * b).sum();
        }
    }
}

/// Pure state over `num_qubits` qubits.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    num_qubits: usize,
    amps: Vec<C64>,
}

impl StateVector {
    pub fn zero_state(num_qubits: usize) -> Self {
        let mut amps = vec![ZERO; 1 << num_qubits];
        amps[0] = ONE;
        Self { num_qubits, amps }
    }

    pub fn basis(num_qubits: usize, index: usize) -> Result<Self> {
        if index >= 1 << num_qubits {
            return Err(Error::invalid(format!("basis index {index} out of range")));
        }
        let mut amps = vec![ZERO; 1 << num_qubits];
        amps[index] = ONE;
        Ok(Self { num_qubits, amps })
    }

    pub fn from_amplitudes(amps: Vec<C64>) -> Result<Self> {
        let len = amps.len();
        if len == 0 || !len.is_power_of_two() {
            return Err(Error::InvalidState(format!("amplitude count {len} is not a power of two")));
        }
        let norm: f64 = amps.iter().map(|a| a.norm_sqr()).sum();
        if (norm - 1.0).abs() > STATE_TOL {
            return Err(Error::InvalidState(format!("squared norm {norm} is not 1")));
        }
        Ok(Self {
            num_qubits: len.trailing_zeros() as usize,
            amps,
        })
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amps
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    pub fn inner(&self, other: &Self) -> Result<C64> {
        if self.amps.len() != other.amps.len() {
            return Err(Error::DimensionMismatch {
                expected: self.amps.len(),
                actual: other.amps.len(),
            });
        }
        Ok(self.amps.iter().zip(&other.amps).map(|(a, b)| a.conj() * b).sum())
    }

    pub fn to_density(&self) -> DensityMatrix {
        let d = self.amps.len();
        let mut m = ComplexMatrix::zeros(d, d);
        for r in 0..d {
            for c in 0..d {
                m[(r, c)] = self.amps[r] * self.amps[c].conj();
            }
        }
        DensityMatrix {
            num_qubits: self.num_qubits,
            m,
        }
    }

    pub(crate) fn amps_mut(&mut self) -> &mut [C64] {
        &mut self.amps
    }

    /// Born-rule probabilities over the full basis.
    pub fn probabilities(&self) -> Vec<f64> {
        self.amps.iter().map(|a| a.norm_sqr()).collect()
    }
}

/// Square unitary on `num_qubits` qubits.
#[derive(Debug, Clone, PartialEq)]
pub struct UnitaryMatrix {
    num_qubits: usize,
    m: ComplexMatrix,
}

impl UnitaryMatrix {
    pub fn identity(num_qubits: usize) -> Self {
        Self {
            num_qubits,
            m: ComplexMatrix::identity(1 << num_qubits),
        }
    }

    pub fn new(m: ComplexMatrix) -> Result<Self> {
        if !m.is_square() || !m.rows().is_power_of_two() {
            return Err(Error::InvalidState("unitary must be square with power-of-two dimension".into()));
        }
        let err = m.unitarity_error();
        if err > STATE_TOL {
            return Err(Error::InvalidState(format!("matrix is not unitary (deviation {err:e})")));
        }
        Ok(Self::new_unchecked(m))
    }

    pub(crate) fn new_unchecked(m: ComplexMatrix) -> Self {
        Self {
            num_qubits: m.rows().trailing_zeros() as usize,
            m,
        }
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn dim(&self) -> usize {
        self.m.rows()
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.m
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.m
    }

    pub fn adjoint(&self) -> Self {
        Self::new_unchecked(self.m.adjoint())
    }

    /// `self · rhs` (apply `rhs` first).
    pub fn compose(&self, rhs: &Self) -> Result<Self> {
        Ok(Self::new_unchecked(self.m.matmul(&rhs.m)?))
    }

    pub fn apply(&self, state: &StateVector) -> Result<StateVector> {
        let d = self.dim();
        if state.amps.len() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                actual: state.amps.len(),
            });
        }
        let data = self.m.data();
        let amps = (0..d)
            .map(|r| data[r * d..(r + 1) * d].iter().zip(&state.amps).map(|(a, b)| a * b).sum())
            .collect();
        Ok(StateVector {
            num_qubits: self.num_qubits,
            amps,
        })
    }

    /// Left-multiply by a gate acting on `targets`. No validation.
    pub(crate) fn apply_gate_left(&mut self, targets: &[usize], g: &ComplexMatrix) {
        // Row-major storage: row bits are the high `n` bits of the flat index.
        let n = self.num_qubits;
        apply_matrix(self.m.data_mut(), 2 * n, targets, g);
    }
}

/// Density operator on `num_qubits` qubits.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    num_qubits: usize,
    m: ComplexMatrix,
}

impl DensityMatrix {
    pub fn zero_state(num_qubits: usize) -> Self {
        StateVector::zero_state(num_qubits).to_density()
    }

    pub fn maximally_mixed(num_qubits: usize) -> Self {
        let d = 1usize << num_qubits;
        Self {
            num_qubits,
            m: ComplexMatrix::identity(d).scale(C64::new(1.0 / d as f64, 0.0)),
        }
    }

    /// Validating constructor: Hermitian, unit trace, positive semidefinite.
    pub fn new(m: ComplexMatrix) -> Result<Self> {
        if !m.is_square() || !m.rows().is_power_of_two() {
            return Err(Error::InvalidState("density matrix must be square with power-of-two dimension".into()));
        }
        if m.hermiticity_error() > STATE_TOL {
            return Err(Error::InvalidState("density matrix is not Hermitian".into()));
        }
        let tr = m.trace();
        if (tr.re - 1.0).abs() > STATE_TOL || tr.im.abs() > STATE_TOL {
            return Err(Error::InvalidState(format!("trace {tr} is not 1")));
        }
        let min_eig = hermitian_eigenvalues(&m)?[0];
        if min_eig < -STATE_TOL {
            return Err(Error::InvalidState(format!("negative eigenvalue {min_eig:e}")));
        }
        Ok(Self::new_unchecked(m))
    }

    pub(crate) fn new_unchecked(m: ComplexMatrix) -> Self {
        Self {
            num_qubits: m.rows().trailing_zeros() as usize,
            m,
        }
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.m
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.m.rows()).map(|i| self.m[(i, i)].re).collect()
    }

    pub fn eigenvalues(&self) -> Result<Vec<f64>> {
        hermitian_eigenvalues(&self.m)
    }

    /// ρ → GρG† for a gate on `targets`. No validation.
    pub(crate) fn apply_gate(&mut self, targets: &[usize], g: &ComplexMatrix) {
        let n = self.num_qubits;
        let conj_g = ComplexMatrix::from_vec(
            g.rows(),
            g.cols(),
            g.data().iter().map(|z| z.conj()).collect(),
        )
        .expect("same shape");
        let col_targets: Vec<usize> = targets.iter().map(|&q| q + n).collect();
        let data = self.m.data_mut();
        apply_matrix(data, 2 * n, targets, g);
        apply_matrix(data, 2 * n, &col_targets, &conj_g);
    }

    pub(crate) fn depolarize_in_place(&mut self, p: f64) {
        let d = self.m.rows();
        let keep = 1.0 - p;
        let mix = p / d as f64;
        for (idx, z) in self.m.data_mut().iter_mut().enumerate() {
            *z *= keep;
            if idx / d == idx % d {
                *z += mix;
            }
        }
    }
}

/// Err(ρ) = (1 − p)ρ + p·I/2ⁿ.
pub fn depolarize(rho: &DensityMatrix, p: f64) -> Result<DensityMatrix> {
    if !(0.0..=1.0).contains(&p) || p.is_nan() {
        return Err(Error::invalid(format!("depolarizing rate {p} outside [0, 1]")));
    }
    let mut out = rho.clone();
    out.depolarize_in_place(p);
    Ok(out)
}

/// ½ Σ |λᵢ(a − b)|.
pub fn trace_distance(a: &DensityMatrix, b: &DensityMatrix) -> Result<f64> {
    if a.m.rows() != b.m.rows() {
        return Err(Error::DimensionMismatch {
            expected: a.m.rows(),
            actual: b.m.rows(),
        });
    }
    let diff = a.m.sub(&b.m)?;
    let ev = hermitian_eigenvalues(&diff)?;
    Ok((0.5 * ev.iter().map(|l| l.abs()).sum::<f64>()).clamp(0.0, 1.0))
}

/// Trace distance between pure states, √(1 − |⟨ψ|φ⟩|²).
pub fn trace_distance_pure(a: &StateVector, b: &StateVector) -> Result<f64> {
    let ov = a.inner(b)?.norm_sqr();
    Ok((1.0 - ov).max(0.0).sqrt().min(1.0))
}

/// Probability vector over the outcomes of a set of measured qubits.
#[derive(Debug, Clone, PartialEq)]
pub struct OutcomeDistribution {
    num_bits: usize,
    probs: Vec<f64>,
}

impl OutcomeDistribution {
    pub fn new(probs: Vec<f64>) -> Result<Self> {
        let len = probs.len();
        if len == 0 || !len.is_power_of_two() {
            return Err(Error::InvalidState(format!("outcome count {len} is not a power of two")));
        }
        if probs.iter().any(|&p| !(-STATE_TOL..=1.0 + STATE_TOL).contains(&p)) {
            return Err(Error::InvalidState("probability outside [0, 1]".into()));
        }
        let total: f64 = probs.iter().sum();
        if (total - 1.0).abs() > STATE_TOL {
            return Err(Error::InvalidState(format!("probabilities sum to {total}")));
        }
        Ok(Self::new_unchecked(probs))
    }

    pub(crate) fn new_unchecked(probs: Vec<f64>) -> Self {
        Self {
            num_bits: probs.len().trailing_zeros() as usize,
            probs,
        }
    }

    pub fn num_bits(&self) -> usize {
        self.num_bits
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn prob(&self, outcome: usize) -> f64 {
        self.probs[outcome]
    }

    /// Marginal over a subset of this distribution's bits (first listed is MSB).
    pub fn marginal(&self, bits: &[usize]) -> Result<Self> {
        check_qubits(bits, self.num_bits)?;
        Ok(Self::new_unchecked(marginalize(&self.probs, self.num_bits, bits)))
    }
}

pub(crate) fn marginalize(full: &[f64], n: usize, qubits: &[usize]) -> Vec<f64> {
    let k = qubits.len();
    let mut out = vec![0.0; 1 << k];
    for (idx, &p) in full.iter().enumerate() {
        let mut o = 0usize;
        for &q in qubits {
            o = (o << 1) | ((idx >> (n - 1 - q)) & 1);
        }
        out[o] += p;
    }
    out
}

/// Exact Born-rule probabilities or seeded shot sampling.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Shots {
    #[default]
    Exact,
    Sampled { shots: usize, seed: u64 },
}

/// Anything with a computational-basis probability vector.
pub trait Measurable {
    fn num_qubits(&self) -> usize;
    fn basis_probabilities(&self) -> Vec<f64>;
}

impl Measurable for StateVector {
    fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    fn basis_probabilities(&self) -> Vec<f64> {
        self.probabilities()
    }
}

impl Measurable for DensityMatrix {
    fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    fn basis_probabilities(&self) -> Vec<f64> {
        self.diagonal().into_iter().map(|p| p.max(0.0)).collect()
    }
}

pub fn measure<S: Measurable + ?Sized>(state: &S, qubits: &[usize], shots: Shots) -> Result<OutcomeDistribution> {
    let n = state.num_qubits();
    if qubits.is_empty() {
        return Err(Error::invalid("no qubits to measure"));
    }
    check_qubits(qubits, n)?;
    let exact = marginalize(&state.basis_probabilities(), n, qubits);
    sample_or_exact(exact, shots)
}

pub(crate) fn sample_or_exact(exact: Vec<f64>, shots: Shots) -> Result<OutcomeDistribution> {
    match shots {
        Shots::Exact => {
            let total: f64 = exact.iter().sum();
            Ok(OutcomeDistribution::new_unchecked(exact.into_iter().map(|p| p / total).collect()))
        }
        Shots::Sampled { shots, seed } => {
            if shots == 0 {
                return Err(Error::invalid("shot count must be at least 1"));
            }
            let dist = WeightedIndex::new(&exact).map_err(|e| Error::InvalidState(e.to_string()))?;
            let mut rng = seed::rng(seed);
            let mut counts = vec![0usize; exact.len()];
            for _ in 0..shots {
                counts[dist.sample(&mut rng)] += 1;
            }
            Ok(OutcomeDistribution::new_unchecked(
                counts.into_iter().map(|c| c as f64 / shots as f64).collect(),
            ))
        }
    }
}

/// ½ Σ |d1ₖ − d2ₖ|.
pub fn total_variation(d1: &OutcomeDistribution, d2: &OutcomeDistribution) -> Result<f64> {
    if d1.probs.len() != d2.probs.len() {
        return Err(Error::DimensionMismatch {
            expected: d1.probs.len(),
            actual: d2.probs.len(),
        });
    }
    Ok(0.5 * d1.probs.iter().zip(&d2.probs).map(|(a, b)| (a - b).abs()).sum::<f64>())
}
