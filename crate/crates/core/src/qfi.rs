//! Quantum Fisher information for one-parameter pure-state families.
//!
//! Two routes are provided and kept in agreement: the derivative definition
//! F = 4(⟨∂Ψ|∂Ψ⟩ − |⟨Ψ|∂Ψ⟩|²) evaluated by finite differences, and the
//! energy-distribution form F = 4·Var(E) for states written in the
//! eigenbasis of the generator. The factor-4 convention is applied
//! uniformly, so a single equatorial qubit carries 1 rad⁻² of QFI.

use ndarray::Array2;
use num_complex::Complex64 as C64;

use crate::quantum::StateVector;
use crate::{Error, Result, NORM_TOL, PROB_FLOOR};

/// Default finite-difference step for [`qfi_derivative`].
pub const DEFAULT_FD_STEP: f64 = 1e-5;

/// A self-adjoint generator given by its spectral data.
///
/// `eigenvectors = None` marks a generator diagonal in the computational
/// basis, with `eigenvalues[i]` attached to basis index i.
#[derive(Debug, Clone)]
pub struct Generator {
    eigenvalues: Vec<f64>,
    eigenvectors: Option<Array2<C64>>,
}

impl Generator {
    /// Generator diagonal in the computational basis.
    pub fn diagonal(eigenvalues: Vec<f64>) -> Self {
        Generator { eigenvalues, eigenvectors: None }
    }

    /// Generator with an explicit orthonormal eigenbasis (columns).
    pub fn with_eigenbasis(eigenvalues: Vec<f64>, eigenvectors: Array2<C64>) -> Result<Self> {
        let d = eigenvalues.len();
        if eigenvectors.nrows() != d || eigenvectors.ncols() != d {
            return Err(Error::DimensionMismatch(eigenvectors.nrows(), d));
        }
        let mut worst = 0.0f64;
        for i in 0..d {
            for j in 0..d {
                let mut s = C64::ZERO;
                for k in 0..d {
                    s += eigenvectors[(k, i)].conj() * eigenvectors[(k, j)];
                }
                let expected = if i == j { C64::ONE } else { C64::ZERO };
                worst = worst.max((s - expected).norm());
            }
        }
        if worst > crate::ALGEBRA_TOL {
            return Err(Error::NotUnitary(worst));
        }
        Ok(Generator { eigenvalues, eigenvectors: Some(eigenvectors) })
    }

    /// Sum-of-number-operators generator Σ_j |1⟩⟨1|_j on `qubits` qubits:
    /// eigenvalue of basis index i is its popcount.
    pub fn qubit_number_operator(qubits: usize) -> Self {
        let dim = 1usize << qubits;
        Generator::diagonal((0..dim).map(|i| i.count_ones() as f64).collect())
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    /// Energy distribution p(E) of a state in this generator's eigenbasis,
    /// grouping degenerate eigenvalues.
    pub fn energy_distribution(&self, state: &StateVector) -> Result<EnergyDistribution> {
        let d = self.eigenvalues.len();
        if state.dim() != d {
            return Err(Error::DimensionMismatch(state.dim(), d));
        }
        let weights: Vec<f64> = match &self.eigenvectors {
            None => state.amplitudes().iter().map(|a| a.norm_sqr()).collect(),
            Some(basis) => (0..d)
                .map(|i| {
                    let mut overlap = C64::ZERO;
                    for k in 0..d {
                        overlap += basis[(k, i)].conj() * state.amplitude(k);
                    }
                    overlap.norm_sqr()
                })
                .collect(),
        };
        EnergyDistribution::new(
            self.eigenvalues.iter().copied().zip(weights).collect(),
        )
    }
}

/// Probability distribution over generator eigenvalues.
///
/// Entries are kept sorted by E with duplicates merged; the mean ε is cached.
#[derive(Debug, Clone, serde::Serialize, serde::Deserialize)]
pub struct EnergyDistribution {
    entries: Vec<(f64, f64)>,
    epsilon: f64,
}

impl EnergyDistribution {
    /// Builds a distribution from (E, p) pairs.
    ///
    /// Entries below [`PROB_FLOOR`] are pruned, duplicate energies merged,
    /// and the total probability must be 1 within 1e-12.
    pub fn new(entries: Vec<(f64, f64)>) -> Result<Self> {
        let mut entries = entries;
        for &(_, p) in &entries {
            if p < -PROB_FLOOR {
                return Err(Error::NegativeProbability(p));
            }
        }
        entries.retain(|&(_, p)| p >= PROB_FLOOR);
        if entries.is_empty() {
            return Err(Error::EmptyDistribution);
        }
        entries.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
        let mut merged: Vec<(f64, f64)> = Vec::with_capacity(entries.len());
        for (e, p) in entries {
            match merged.last_mut() {
                Some(last) if (last.0 - e).abs() < 1e-12 => last.1 += p,
                _ => merged.push((e, p)),
            }
        }
        let total: f64 = merged.iter().map(|&(_, p)| p).sum();
        if (total - 1.0).abs() > NORM_TOL {
            return Err(Error::ProbabilityNotNormalized(total));
        }
        let epsilon = merged.iter().map(|&(e, p)| e * p).sum();
        Ok(EnergyDistribution { entries: merged, epsilon })
    }

    pub fn entries(&self) -> &[(f64, f64)] {
        &self.entries
    }

    /// Mean energy ε = Σ p(E)·E.
    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    /// Support size d.
    pub fn support_size(&self) -> usize {
        self.entries.len()
    }

    /// Σ p(E)·E².
    pub fn second_moment(&self) -> f64 {
        self.entries.iter().map(|&(e, p)| p * e * e).sum()
    }

    /// The state Σ_E √p(E) e^{−iθE} |E⟩ realizing this distribution.
    pub fn phase_encoded_state(&self, theta: f64) -> StateVector {
        let amplitudes = self
            .entries
            .iter()
            .map(|&(e, p)| C64::from_polar(p.sqrt(), -theta * e))
            .collect();
        StateVector::new(amplitudes).expect("valid distribution yields a normalizable state")
    }
}

/// QFI from the derivative definition, by central finite differences.
///
/// `step` must lie in (0, 1e-3]; the truncation error is O(step²).
pub fn qfi_derivative(
    family: impl Fn(f64) -> StateVector,
    theta: f64,
    step: f64,
) -> Result<f64> {
    if !(step > 0.0 && step <= 1e-3) {
        return Err(Error::InvalidParameter(format!(
            "finite-difference step {step} outside (0, 1e-3]"
        )));
    }
    let center = checked(family(theta))?;
    let plus = checked(family(theta + step))?;
    let minus = checked(family(theta - step))?;
    if plus.dim() != center.dim() || minus.dim() != center.dim() {
        return Err(Error::DimensionMismatch(plus.dim(), center.dim()));
    }
    let inv = 0.5 / step;
    let derivative: Vec<C64> = plus
        .amplitudes()
        .iter()
        .zip(minus.amplitudes())
        .map(|(p, m)| (p - m) * inv)
        .collect();
    let dd: f64 = derivative.iter().map(|a| a.norm_sqr()).sum();
    let overlap: C64 = center
        .amplitudes()
        .iter()
        .zip(&derivative)
        .map(|(c, d)| c.conj() * d)
        .sum();
    Ok(4.0 * (dd - overlap.norm_sqr()))
}

/// [`qfi_derivative`] with one Richardson extrapolation step, cancelling the
/// O(step²) truncation term.
pub fn qfi_derivative_richardson(
    family: impl Fn(f64) -> StateVector + Copy,
    theta: f64,
    step: f64,
) -> Result<f64> {
    let coarse = qfi_derivative(family, theta, step)?;
    let fine = qfi_derivative(family, theta, step / 2.0)?;
    Ok((4.0 * fine - coarse) / 3.0)
}

fn checked(state: StateVector) -> Result<StateVector> {
    let n = state.norm_sqr();
    if (n - 1.0).abs() > 1e-9 {
        return Err(Error::NotNormalized(n));
    }
    Ok(state)
}

/// QFI from the energy distribution: 4·(Σ p(E)E² − ε²).
pub fn qfi_variance(dist: &EnergyDistribution) -> f64 {
    4.0 * (dist.second_moment() - dist.epsilon() * dist.epsilon())
}

/// Average QFI over a measurement ensemble: Σ_k p_k · F(dist_k).
pub fn average_qfi(outcomes: &[(f64, EnergyDistribution)]) -> Result<f64> {
    let total: f64 = outcomes.iter().map(|(p, _)| p).sum();
    if (total - 1.0).abs() > crate::ALGEBRA_TOL {
        return Err(Error::ProbabilityNotNormalized(total));
    }
    Ok(outcomes.iter().map(|(p, d)| p * qfi_variance(d)).sum())
}

/// Cramér-Rao variance bound 1/(F·trials).
pub fn qcrb_variance(qfi: f64, trials: u64) -> Result<f64> {
    if qfi <= 0.0 {
        return Err(Error::NonPositiveQfi(qfi));
    }
    if trials == 0 {
        return Err(Error::NoTrials);
    }
    Ok(1.0 / (qfi * trials as f64))
}
