//! Dense pure-state simulation.
//!
//! Amplitude ordering convention: basis states are indexed row-major with
//! **qubit 0 as the most significant bit**. A state over qubits (q0, q1)
//! stores the amplitude of |q0 q1⟩ at index `q0 * 2 + q1`. This convention
//! is used everywhere in the crate.
//!
//! Global phase is never canonicalized; use [`StateVector::fidelity`] for
//! phase-insensitive comparisons.

use ndarray::Array2;
use num_complex::Complex64;
use std::f64::consts::TAU;

use crate::{Error, Result, ALGEBRA_TOL, NORM_TOL, PROB_FLOOR};

pub type C64 = Complex64;

/// Largest supported register; tensor products beyond this are rejected.
pub const MAX_QUBITS: usize = 24;

/// A normalized complex amplitude vector over a labeled computational basis.
#[derive(Debug, Clone)]
pub struct StateVector {
    amplitudes: Vec<C64>,
    qubit_count: Option<usize>,
}

impl StateVector {
    /// Builds a state from raw amplitudes, normalizing them.
    ///
    /// `qubit_count` is inferred when the dimension is a power of two.
    pub fn new(amplitudes: Vec<C64>) -> Result<Self> {
        if amplitudes.is_empty() {
            return Err(Error::EmptyDistribution);
        }
        let mut state = StateVector {
            qubit_count: exact_log2(amplitudes.len()),
            amplitudes,
        };
        state.normalize()?;
        Ok(state)
    }

    /// Builds a state from amplitudes that are already normalized.
    pub fn from_normalized(amplitudes: Vec<C64>) -> Result<Self> {
        let norm_sq: f64 = amplitudes.iter().map(|a| a.norm_sqr()).sum();
        if (norm_sq - 1.0).abs() > NORM_TOL {
            return Err(Error::NotNormalized(norm_sq));
        }
        Ok(StateVector {
            qubit_count: exact_log2(amplitudes.len()),
            amplitudes,
        })
    }

    /// Computational basis state |index⟩ on `qubits` qubits.
    pub fn computational(qubits: usize, index: usize) -> Self {
        let dim = 1usize << qubits;
        assert!(index < dim, "basis index out of range");
        let mut amplitudes = vec![C64::ZERO; dim];
        amplitudes[index] = C64::ONE;
        StateVector { amplitudes, qubit_count: Some(qubits) }
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn qubit_count(&self) -> Option<usize> {
        self.qubit_count
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amplitudes
    }

    pub fn amplitude(&self, index: usize) -> C64 {
        self.amplitudes[index]
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum()
    }

    /// Rescales amplitudes to unit norm.
    pub fn normalize(&mut self) -> Result<()> {
        let norm = self.norm_sqr().sqrt();
        if norm < PROB_FLOOR {
            return Err(Error::NotNormalized(norm * norm));
        }
        for a in &mut self.amplitudes {
            *a /= norm;
        }
        Ok(())
    }

    /// ⟨self|other⟩.
    pub fn inner(&self, other: &StateVector) -> C64 {
        self.amplitudes
            .iter()
            .zip(&other.amplitudes)
            .map(|(a, b)| a.conj() * b)
            .sum()
    }

    /// |⟨self|other⟩|² — global-phase-insensitive overlap.
    pub fn fidelity(&self, other: &StateVector) -> f64 {
        self.inner(other).norm_sqr()
    }
}

/// Phase of an equatorial qubit, stored canonically in [0, 2π).
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(transparent)]
pub struct EquatorialPhase(f64);

impl EquatorialPhase {
    pub fn new(theta: f64) -> Self {
        EquatorialPhase(theta.rem_euclid(TAU))
    }

    pub fn radians(self) -> f64 {
        self.0
    }

    /// Circular distance to `other`, in [0, π].
    pub fn distance(self, other: EquatorialPhase) -> f64 {
        let d = (self.0 - other.0).rem_euclid(TAU);
        d.min(TAU - d)
    }
}

impl std::ops::Add for EquatorialPhase {
    type Output = EquatorialPhase;
    fn add(self, rhs: EquatorialPhase) -> EquatorialPhase {
        EquatorialPhase::new(self.0 + rhs.0)
    }
}

impl std::ops::Sub for EquatorialPhase {
    type Output = EquatorialPhase;
    fn sub(self, rhs: EquatorialPhase) -> EquatorialPhase {
        EquatorialPhase::new(self.0 - rhs.0)
    }
}

impl std::ops::Neg for EquatorialPhase {
    type Output = EquatorialPhase;
    fn neg(self) -> EquatorialPhase {
        EquatorialPhase::new(-self.0)
    }
}

/// One branch of a (generalized) measurement.
///
/// Outcomes with probability below [`PROB_FLOOR`] are retained with
/// `valid = false` and a zero post-state so discarded branches stay
/// countable.
#[derive(Debug, Clone)]
pub struct MeasurementOutcome {
    pub label: usize,
    pub probability: f64,
    pub post_state: StateVector,
    pub valid: bool,
}

/// (|0⟩ + e^{iθ}|1⟩)/√2.
pub fn equatorial_state(phase: EquatorialPhase) -> StateVector {
    let r = std::f64::consts::FRAC_1_SQRT_2;
    StateVector {
        amplitudes: vec![C64::new(r, 0.0), C64::from_polar(r, phase.radians())],
        qubit_count: Some(1),
    }
}

/// Tensor product a ⊗ b, a-index major.
pub fn tensor(a: &StateVector, b: &StateVector) -> Result<StateVector> {
    let qubits = match (a.qubit_count, b.qubit_count) {
        (Some(na), Some(nb)) => {
            let total = na + nb;
            if total > MAX_QUBITS {
                return Err(Error::DimensionOverflow { requested: total, max: MAX_QUBITS });
            }
            Some(total)
        }
        _ => None,
    };
    if qubits.is_none() && a.dim().saturating_mul(b.dim()) > (1 << MAX_QUBITS) {
        return Err(Error::DimensionOverflow { requested: a.dim() * b.dim(), max: MAX_QUBITS });
    }
    let mut amplitudes = Vec::with_capacity(a.dim() * b.dim());
    for &x in &a.amplitudes {
        for &y in &b.amplitudes {
            amplitudes.push(x * y);
        }
    }
    Ok(StateVector { amplitudes, qubit_count: qubits })
}

/// Tensor product of many factors, left to right.
pub fn tensor_all(states: &[StateVector]) -> Result<StateVector> {
    let mut iter = states.iter();
    let first = iter.next().ok_or(Error::EmptyDistribution)?.clone();
    iter.try_fold(first, |acc, s| tensor(&acc, s))
}

fn exact_log2(dim: usize) -> Option<usize> {
    if dim.is_power_of_two() {
        Some(dim.trailing_zeros() as usize)
    } else {
        None
    }
}

/// Residual ‖u†u − 1‖_max.
fn unitarity_residual(u: &Array2<C64>) -> f64 {
    let d = u.nrows();
    let mut worst = 0.0f64;
    for i in 0..d {
        for j in 0..d {
            let mut s = C64::ZERO;
            for k in 0..d {
                s += u[(k, i)].conj() * u[(k, j)];
            }
            let expected = if i == j { C64::ONE } else { C64::ZERO };
            worst = worst.max((s - expected).norm());
        }
    }
    worst
}

/// Applies a unitary to the given target qubits (qubit 0 = MSB).
///
/// The matrix dimension must be 2^k for k targets; its row/column index is
/// formed from the target bits in the order given, first target most
/// significant.
pub fn apply_unitary(
    state: &StateVector,
    u: &Array2<C64>,
    target_qubits: &[usize],
) -> Result<StateVector> {
    let n = state
        .qubit_count
        .ok_or_else(|| Error::DimensionMismatch(state.dim(), 0))?;
    let k = target_qubits.len();
    let m = 1usize << k;
    if u.nrows() != m || u.ncols() != m {
        return Err(Error::DimensionMismatch(u.nrows(), m));
    }
    for (i, &t) in target_qubits.iter().enumerate() {
        if t >= n {
            return Err(Error::QubitOutOfRange { index: t, count: n });
        }
        if target_qubits[..i].contains(&t) {
            return Err(Error::DuplicateTarget(t));
        }
    }
    let residual = unitarity_residual(u);
    if residual > ALGEBRA_TOL {
        return Err(Error::NotUnitary(residual));
    }

    // Bit position of each target within the flat index (qubit 0 = MSB).
    let shifts: Vec<usize> = target_qubits.iter().map(|&t| n - 1 - t).collect();
    let target_mask: usize = shifts.iter().map(|&s| 1usize << s).sum();

    let dim = state.dim();
    let mut out = state.amplitudes.clone();
    let mut gathered = vec![C64::ZERO; m];
    for base in 0..dim {
        if base & target_mask != 0 {
            continue;
        }
        for sub in 0..m {
            let mut idx = base;
            for (bit, &shift) in shifts.iter().enumerate() {
                if sub >> (k - 1 - bit) & 1 == 1 {
                    idx |= 1 << shift;
                }
            }
            gathered[sub] = state.amplitudes[idx];
        }
        for row in 0..m {
            let mut acc = C64::ZERO;
            for (col, &g) in gathered.iter().enumerate() {
                acc += u[(row, col)] * g;
            }
            let mut idx = base;
            for (bit, &shift) in shifts.iter().enumerate() {
                if row >> (k - 1 - bit) & 1 == 1 {
                    idx |= 1 << shift;
                }
            }
            out[idx] = acc;
        }
    }
    Ok(StateVector { amplitudes: out, qubit_count: Some(n) })
}

/// Computational-basis measurement of one qubit; returns both outcomes.
pub fn measure_projective(state: &StateVector, target_qubit: usize) -> Result<Vec<MeasurementOutcome>> {
    let n = state
        .qubit_count
        .ok_or_else(|| Error::DimensionMismatch(state.dim(), 0))?;
    if target_qubit >= n {
        return Err(Error::QubitOutOfRange { index: target_qubit, count: n });
    }
    let shift = n - 1 - target_qubit;
    let dim = state.dim();
    let mut outcomes = Vec::with_capacity(2);
    for label in 0..2usize {
        let mut post = vec![C64::ZERO; dim];
        let mut prob = 0.0;
        for idx in 0..dim {
            if idx >> shift & 1 == label {
                post[idx] = state.amplitudes[idx];
                prob += state.amplitudes[idx].norm_sqr();
            }
        }
        let valid = prob >= PROB_FLOOR;
        if valid {
            let norm = prob.sqrt();
            for a in &mut post {
                *a /= norm;
            }
        } else {
            post.fill(C64::ZERO);
        }
        outcomes.push(MeasurementOutcome {
            label,
            probability: prob,
            post_state: StateVector { amplitudes: post, qubit_count: Some(n) },
            valid,
        });
    }
    Ok(outcomes)
}

/// Generalized measurement with operators {M_k}.
///
/// Completeness Σ M_k†M_k = 1 is required on the *support* of the operator
/// set: diagonal entries of the sum must be ≈1 or ≈0, off-diagonals ≈0, and
/// the input state must carry no amplitude where the sum vanishes.
pub fn apply_kraus(state: &StateVector, operators: &[Array2<C64>]) -> Result<Vec<MeasurementOutcome>> {
    let dim = state.dim();
    if operators.is_empty() {
        return Err(Error::EmptyDistribution);
    }
    for m in operators {
        if m.nrows() != dim || m.ncols() != dim {
            return Err(Error::DimensionMismatch(m.nrows(), dim));
        }
    }

    // S = Σ M†M
    let mut sum = Array2::<C64>::zeros((dim, dim));
    for m in operators {
        for i in 0..dim {
            for j in 0..dim {
                let mut acc = C64::ZERO;
                for k in 0..dim {
                    acc += m[(k, i)].conj() * m[(k, j)];
                }
                sum[(i, j)] += acc;
            }
        }
    }
    let mut residual = 0.0f64;
    let mut in_support = vec![false; dim];
    for i in 0..dim {
        let d = sum[(i, i)].re;
        if d > 0.5 {
            in_support[i] = true;
            residual = residual.max((sum[(i, i)] - C64::ONE).norm());
        } else {
            residual = residual.max(sum[(i, i)].norm());
        }
        for j in 0..dim {
            if j != i {
                residual = residual.max(sum[(i, j)].norm());
            }
        }
    }
    if residual > ALGEBRA_TOL {
        return Err(Error::IncompleteKraus(residual));
    }
    let leakage: f64 = state
        .amplitudes
        .iter()
        .enumerate()
        .filter(|(i, _)| !in_support[*i])
        .map(|(_, a)| a.norm_sqr())
        .sum();
    if leakage > ALGEBRA_TOL {
        return Err(Error::SupportLeakage(leakage));
    }

    let mut outcomes = Vec::with_capacity(operators.len());
    for (label, m) in operators.iter().enumerate() {
        let mut post = vec![C64::ZERO; dim];
        for (i, p) in post.iter_mut().enumerate() {
            let mut acc = C64::ZERO;
            for j in 0..dim {
                acc += m[(i, j)] * state.amplitudes[j];
            }
            *p = acc;
        }
        let prob: f64 = post.iter().map(|a| a.norm_sqr()).sum();
        let valid = prob >= PROB_FLOOR;
        if valid {
            let norm = prob.sqrt();
            for a in &mut post {
                *a /= norm;
            }
        } else {
            post.fill(C64::ZERO);
        }
        outcomes.push(MeasurementOutcome {
            label,
            probability: prob,
            post_state: StateVector { amplitudes: post, qubit_count: state.qubit_count },
            valid,
        });
    }
    Ok(outcomes)
}

/// 2×2 identity.
pub fn identity(dim: usize) -> Array2<C64> {
    Array2::from_diag_elem(dim, C64::ONE)
}

/// CNOT on (control, target) = (first, second) index bit.
pub fn cnot() -> Array2<C64> {
    let mut m = Array2::<C64>::zeros((4, 4));
    m[(0, 0)] = C64::ONE;
    m[(1, 1)] = C64::ONE;
    m[(2, 3)] = C64::ONE;
    m[(3, 2)] = C64::ONE;
    m
}
