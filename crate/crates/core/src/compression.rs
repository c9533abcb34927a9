//! QFI compression protocols.
//!
//! Two families of protocols live here:
//!
//! - The CNOT sum/difference block and its cascade for multi-copy
//!   equatorial qubits: each block maps (θ₁, θ₂) to θ₁ ± θ₂ heralded by a
//!   measurement bit, and iterating over N qubits yields all ±1 linear
//!   combinations of the phases.
//! - The general single-qubit compression: a mean-preserving convex
//!   decomposition of the energy distribution into at most d−1 two-point
//!   components, the diagonal measurement operators it induces, and the
//!   re-encoding of each post-measurement state into one qubit.

use ndarray::Array2;
use num_complex::Complex64 as C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::qfi::EnergyDistribution;
use crate::quantum::{EquatorialPhase, StateVector};
use crate::{Error, Result, ALGEBRA_TOL, PROB_FLOOR};

/// One branch of the CNOT cascade.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CascadeResult {
    /// Measurement outcomes m_2..m_N on the target qubits.
    pub outcome_bits: Vec<u8>,
    /// θ₁ + Σ_{j≥2} (−1)^{m_j} θ_j, mod 2π.
    pub final_phase: EquatorialPhase,
    /// Branch probability (2^{−(N−1)} for equatorial inputs).
    pub probability: f64,
    /// Number of 0 outcomes, the classical record k.
    pub k_zero_count: usize,
}

/// The sum/difference block: CNOT + computational measurement of the target.
///
/// Returns [(0, ½, θ₁+θ₂), (1, ½, θ₁−θ₂)].
pub fn two_qubit_block(
    theta1: EquatorialPhase,
    theta2: EquatorialPhase,
) -> [(u8, f64, EquatorialPhase); 2] {
    [
        (0, 0.5, theta1 + theta2),
        (1, 0.5, theta1 - theta2),
    ]
}

/// Enumerates all 2^{N−1} branches of the CNOT cascade on the given phases.
pub fn cascade_enumerate(phases: &[EquatorialPhase]) -> Result<Vec<CascadeResult>> {
    let n = phases.len();
    if !(2..=20).contains(&n) {
        return Err(Error::CascadeSizeOutOfRange(n));
    }
    let branches = 1usize << (n - 1);
    let probability = 1.0 / branches as f64;
    let mut results = Vec::with_capacity(branches);
    for index in 0..branches {
        let mut bits = Vec::with_capacity(n - 1);
        let mut phase = phases[0];
        let mut k = 0usize;
        for j in 0..n - 1 {
            let bit = (index >> (n - 2 - j) & 1) as u8;
            bits.push(bit);
            if bit == 0 {
                phase = phase + phases[j + 1];
                k += 1;
            } else {
                phase = phase - phases[j + 1];
            }
        }
        results.push(CascadeResult {
            outcome_bits: bits,
            final_phase: phase,
            probability,
            k_zero_count: k,
        });
    }
    Ok(results)
}

/// QFI of an equal-phase cascade branch with k zero outcomes: (2k+2−N)².
pub fn branch_qfi_equal_phases(n: usize, k: usize) -> f64 {
    let scale = 2.0 * k as f64 + 2.0 - n as f64;
    scale * scale
}

/// Monte Carlo counterpart of [`cascade_enumerate`]: empirical branch counts
/// aligned with the enumeration order. Deterministic for a fixed seed.
pub fn cascade_sample(
    phases: &[EquatorialPhase],
    rng_seed: u64,
    trials: u64,
) -> Result<Vec<(CascadeResult, u64)>> {
    if trials == 0 {
        return Err(Error::NoTrials);
    }
    let branches = cascade_enumerate(phases)?;
    let n = phases.len();
    let mut counts = vec![0u64; branches.len()];
    let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
    for _ in 0..trials {
        let mut index = 0usize;
        for _ in 0..n - 1 {
            index = index << 1 | usize::from(rng.random::<bool>());
        }
        counts[index] += 1;
    }
    Ok(branches.into_iter().zip(counts).collect())
}

/// Classical record size for the cascade: ⌈log₂ n⌉ bits (k takes n values).
pub fn classical_register_size(n: u64) -> Result<u32> {
    if n < 2 {
        return Err(Error::InvalidParameter(format!("cascade size {n} must be ≥ 2")));
    }
    Ok((n as f64).log2().ceil() as u32)
}

/// A two-point (or point-mass) component of the convex decomposition.
///
/// `support` lists the one or two energies carrying nonzero conditional
/// probability, `conditionals` the matching p(E|k); the component mean
/// always equals the parent's ε.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TwoPointComponent {
    pub weight: f64,
    pub support: Vec<f64>,
    pub conditionals: Vec<f64>,
    pub mean: f64,
}

impl TwoPointComponent {
    /// Σ p(E|k)·(E − mean)² — variance of the component.
    pub fn variance(&self) -> f64 {
        self.support
            .iter()
            .zip(&self.conditionals)
            .map(|(&e, &p)| p * (e - self.mean) * (e - self.mean))
            .sum()
    }

    /// QFI of the encoded qubit: 4·variance.
    pub fn qfi(&self) -> f64 {
        4.0 * self.variance()
    }
}

/// The full output of the decomposition: components plus the parent they
/// reconstruct.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CompressionEnsemble {
    pub components: Vec<TwoPointComponent>,
    pub parent: EnergyDistribution,
}

impl CompressionEnsemble {
    /// max_E |Σ_k p_k·p(E|k) − p(E)| — the mixture-identity residual.
    pub fn mixture_residual(&self) -> f64 {
        let mut worst = 0.0f64;
        for &(e, p) in self.parent.entries() {
            let reconstructed: f64 = self
                .components
                .iter()
                .map(|c| {
                    c.support
                        .iter()
                        .zip(&c.conditionals)
                        .filter(|(&s, _)| (s - e).abs() < 1e-12)
                        .map(|(_, &q)| c.weight * q)
                        .sum::<f64>()
                })
                .sum();
            worst = worst.max((reconstructed - p).abs());
        }
        worst
    }

    /// Σ_k p_k · F(p(·|k)) — equals the parent QFI by construction.
    pub fn average_qfi(&self) -> f64 {
        self.components.iter().map(|c| c.weight * c.qfi()).sum()
    }
}

/// Decomposes `parent` into at most max(d−1, 1) mean-preserving components
/// with support on at most two energies each.
///
/// Greedy pairing: mass sitting exactly at the mean ε is peeled off as a
/// point-mass component; then, while mass remains, the largest-probability
/// energies below and above ε are paired into the unique two-point
/// distribution on them with mean ε, extracting the maximal weight that
/// keeps the residual nonnegative. Every extraction zeroes at least one
/// support point, so K ≤ d−1. Ties pick the smaller energy.
pub fn decompose_two_point(parent: &EnergyDistribution) -> CompressionEnsemble {
    let eps = parent.epsilon();
    let entries = parent.entries();
    let span: f64 = entries
        .iter()
        .map(|&(e, _)| (e - eps).abs())
        .fold(0.0, f64::max)
        .max(1.0);
    let at_tol = 1e-12 * span;

    let mut residual: Vec<f64> = entries.iter().map(|&(_, p)| p).collect();
    let mut components = Vec::new();

    // Point mass at the mean is itself an extreme point.
    for (i, &(e, _)) in entries.iter().enumerate() {
        if (e - eps).abs() <= at_tol && residual[i] > 0.0 {
            components.push(TwoPointComponent {
                weight: residual[i],
                support: vec![e],
                conditionals: vec![1.0],
                mean: e,
            });
            residual[i] = 0.0;
        }
    }

    loop {
        let pick = |side: &dyn Fn(f64) -> bool| -> Option<usize> {
            let mut best: Option<usize> = None;
            for (i, &(e, _)) in entries.iter().enumerate() {
                if residual[i] > 0.0 && side(e) {
                    best = match best {
                        None => Some(i),
                        Some(j) if residual[i] > residual[j] => Some(i),
                        other => other,
                    };
                }
            }
            best
        };
        let below = pick(&|e| e < eps - at_tol);
        let above = pick(&|e| e > eps + at_tol);
        let (a, b) = match (below, above) {
            (Some(a), Some(b)) => (a, b),
            // One-sided dust can only be rounding residue; fold it into
            // point masses so nothing is silently dropped.
            (Some(i), None) | (None, Some(i)) => {
                if residual[i] > PROB_FLOOR {
                    components.push(TwoPointComponent {
                        weight: residual[i],
                        support: vec![entries[i].0],
                        conditionals: vec![1.0],
                        mean: entries[i].0,
                    });
                }
                residual[i] = 0.0;
                continue;
            }
            (None, None) => break,
        };
        let (ea, eb) = (entries[a].0, entries[b].0);
        let wa = (eb - eps) / (eb - ea);
        let wb = 1.0 - wa;
        let last_pair = entries
            .iter()
            .enumerate()
            .filter(|&(i, _)| residual[i] > 0.0)
            .count()
            == 2;
        let weight = if last_pair {
            residual[a] + residual[b]
        } else {
            (residual[a] / wa).min(residual[b] / wb)
        };
        components.push(TwoPointComponent {
            weight,
            support: vec![ea, eb],
            conditionals: vec![wa, wb],
            mean: eps,
        });
        if last_pair {
            residual[a] = 0.0;
            residual[b] = 0.0;
        } else {
            let ca = residual[a] / wa;
            let cb = residual[b] / wb;
            residual[a] = if ca <= cb { 0.0 } else { (residual[a] - weight * wa).max(0.0) };
            residual[b] = if cb <= ca { 0.0 } else { (residual[b] - weight * wb).max(0.0) };
        }
    }

    CompressionEnsemble { components, parent: parent.clone() }
}

/// Builds the diagonal measurement operators M_k = Σ_E √p(k|E) |E⟩⟨E| in
/// the parent-support basis (index i ↔ i-th support energy), with
/// p(k|E) = p(E|k)·p_k/p(E).
pub fn build_measurement(ensemble: &CompressionEnsemble) -> Result<Vec<Array2<C64>>> {
    let entries = ensemble.parent.entries();
    let d = entries.len();
    for &(e, p) in entries {
        if p < PROB_FLOOR {
            return Err(Error::ZeroParentProbability(e));
        }
    }
    let index_of = |energy: f64| -> Result<usize> {
        entries
            .iter()
            .position(|&(e, _)| (e - energy).abs() < 1e-12)
            .ok_or_else(|| Error::InvalidParameter(format!("energy {energy} not in parent support")))
    };
    let mut ops = Vec::with_capacity(ensemble.components.len());
    for component in &ensemble.components {
        let mut m = Array2::<C64>::zeros((d, d));
        for (&e, &cond) in component.support.iter().zip(&component.conditionals) {
            let i = index_of(e)?;
            let p_k_given_e = cond * component.weight / entries[i].1;
            m[(i, i)] = C64::new(p_k_given_e.sqrt(), 0.0);
        }
        ops.push(m);
    }
    Ok(ops)
}

/// Re-encodes a post-measurement state supported on a component's (at most
/// two) energies into a single qubit via W_k = |0⟩⟨E₀| + |1⟩⟨E₁|.
///
/// Returns the qubit state and the effective energies (E₀, E₁) that act as
/// its generator; for a point-mass component both equal the single energy.
pub fn encode_to_qubit(
    post_state: &StateVector,
    energies: &[f64],
    component: &TwoPointComponent,
) -> Result<(StateVector, (f64, f64))> {
    if post_state.dim() != energies.len() {
        return Err(Error::DimensionMismatch(post_state.dim(), energies.len()));
    }
    let mut indices = Vec::with_capacity(2);
    for &e in &component.support {
        let i = energies
            .iter()
            .position(|&x| (x - e).abs() < 1e-12)
            .ok_or_else(|| Error::InvalidParameter(format!("energy {e} not in basis")))?;
        indices.push(i);
    }
    let leakage: f64 = post_state
        .amplitudes()
        .iter()
        .enumerate()
        .filter(|(i, _)| !indices.contains(i))
        .map(|(_, a)| a.norm_sqr())
        .sum();
    if leakage > ALGEBRA_TOL {
        return Err(Error::SupportLeakage(leakage));
    }
    let mut amps = [C64::ZERO; 2];
    for (slot, &i) in indices.iter().enumerate() {
        amps[slot] = post_state.amplitude(i);
    }
    let qubit = StateVector::new(vec![amps[0], amps[1]])?;
    let e0 = component.support[0];
    let e1 = *component.support.get(1).unwrap_or(&e0);
    Ok((qubit, (e0, e1)))
}
