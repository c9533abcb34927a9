//! Dual-rail two-photon linear optics.
//!
//! Photons live in modes labeled (path, polarization). The Type-I fusion
//! gate is a polarizing beam splitter (transmits H, reflects V) followed by
//! a 22.5° half-wave plate and an H/V measurement on one output path;
//! post-selecting one photon per path adds the two input phases, with the
//! V herald recording an extra π shift.
//!
//! Imperfect two-photon interference visibility is not modeled here; it
//! enters downstream through the fringe amplitude of
//! [`crate::estimation::FringeModel`].

use ndarray::Array2;
use num_complex::Complex64 as C64;
use rand::Rng;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::f64::consts::SQRT_2;

use crate::quantum::{EquatorialPhase, StateVector};
use crate::{Error, Result, PROB_FLOOR};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Polarization {
    H,
    V,
}

/// A single optical mode: path port plus polarization.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct OpticalMode {
    pub path: u8,
    pub polarization: Polarization,
}

impl OpticalMode {
    pub fn new(path: u8, polarization: Polarization) -> Self {
        OpticalMode { path, polarization }
    }
}

fn canonical(a: OpticalMode, b: OpticalMode) -> (OpticalMode, OpticalMode) {
    if a <= b {
        (a, b)
    } else {
        (b, a)
    }
}

/// Bosonic two-photon state: amplitudes over unordered mode pairs.
///
/// A doubly occupied mode {m, m} denotes |2_m⟩ with the usual √2
/// normalization of (a†)²|0⟩.
#[derive(Debug, Clone)]
pub struct TwoPhotonState {
    terms: BTreeMap<(OpticalMode, OpticalMode), C64>,
}

impl TwoPhotonState {
    /// Product state of one photon per path with the given polarization
    /// amplitudes (aH|H⟩ + aV|V⟩ on each path).
    pub fn product(path1: u8, amps1: [C64; 2], path2: u8, amps2: [C64; 2]) -> Result<Self> {
        let mut terms = BTreeMap::new();
        for (p1, a1) in [(Polarization::H, amps1[0]), (Polarization::V, amps1[1])] {
            for (p2, a2) in [(Polarization::H, amps2[0]), (Polarization::V, amps2[1])] {
                let coeff = a1 * a2;
                if coeff.norm_sqr() > 0.0 {
                    let key = canonical(OpticalMode::new(path1, p1), OpticalMode::new(path2, p2));
                    *terms.entry(key).or_insert(C64::ZERO) += coeff;
                }
            }
        }
        let state = TwoPhotonState { terms };
        let n = state.norm_sqr();
        if (n - 1.0).abs() > crate::NORM_TOL {
            return Err(Error::NotNormalized(n));
        }
        Ok(state)
    }

    /// Two equatorial polarization qubits entering the given paths.
    pub fn equatorial_pair(
        path1: u8,
        theta1: EquatorialPhase,
        path2: u8,
        theta2: EquatorialPhase,
    ) -> Self {
        let r = std::f64::consts::FRAC_1_SQRT_2;
        let a1 = [C64::new(r, 0.0), C64::from_polar(r, theta1.radians())];
        let a2 = [C64::new(r, 0.0), C64::from_polar(r, theta2.radians())];
        Self::product(path1, a1, path2, a2).expect("equatorial product state is normalized")
    }

    pub fn amplitude(&self, a: OpticalMode, b: OpticalMode) -> C64 {
        self.terms.get(&canonical(a, b)).copied().unwrap_or(C64::ZERO)
    }

    pub fn terms(&self) -> impl Iterator<Item = (&(OpticalMode, OpticalMode), &C64)> {
        self.terms.iter()
    }

    pub fn norm_sqr(&self) -> f64 {
        self.terms.values().map(|c| c.norm_sqr()).sum()
    }

    /// Applies a single-photon mode transformation a†_m → Σ U_{m'm} a†_{m'}
    /// to both photons, resymmetrizing the result.
    pub fn apply_mode_map(&self, map: impl Fn(OpticalMode) -> Vec<(OpticalMode, C64)>) -> Self {
        // Work with creation-operator monomials: |1_a 1_b⟩ = a†_a a†_b |0⟩,
        // |2_a⟩ = (a†_a)²/√2 |0⟩.
        let mut monomials: BTreeMap<(OpticalMode, OpticalMode), C64> = BTreeMap::new();
        for (&(a, b), &coeff) in &self.terms {
            let base = if a == b { coeff / SQRT_2 } else { coeff };
            for (x, cx) in map(a) {
                for (y, cy) in map(b) {
                    let key = canonical(x, y);
                    *monomials.entry(key).or_insert(C64::ZERO) += base * cx * cy;
                }
            }
        }
        let terms = monomials
            .into_iter()
            .filter(|(_, c)| c.norm_sqr() > PROB_FLOOR * PROB_FLOOR)
            .map(|((x, y), c)| {
                let amp = if x == y { c * SQRT_2 } else { c };
                ((x, y), amp)
            })
            .collect();
        TwoPhotonState { terms }
    }

    /// Probability mass on terms where both photons share a path versus
    /// terms with one photon per path.
    pub fn port_masses(&self) -> (f64, f64) {
        let mut same = 0.0;
        let mut different = 0.0;
        for (&(a, b), c) in &self.terms {
            if a.path == b.path {
                same += c.norm_sqr();
            } else {
                different += c.norm_sqr();
            }
        }
        (same, different)
    }

    /// Post-selects on one photon in `keep_path` and one in `herald_path`
    /// with the herald photon measured in polarization `herald_pol`.
    ///
    /// Returns the joint probability and the normalized (H, V) amplitudes
    /// of the kept photon; probability below the floor yields `None`.
    pub fn heralded_path_qubit(
        &self,
        keep_path: u8,
        herald_path: u8,
        herald_pol: Polarization,
    ) -> (f64, Option<StateVector>) {
        let herald = OpticalMode::new(herald_path, herald_pol);
        let mut amps = [C64::ZERO; 2];
        for (pol, slot) in [(Polarization::H, 0), (Polarization::V, 1)] {
            amps[slot] = self.amplitude(OpticalMode::new(keep_path, pol), herald);
        }
        let prob: f64 = amps.iter().map(|a| a.norm_sqr()).sum();
        if prob < PROB_FLOOR {
            return (prob, None);
        }
        let norm = prob.sqrt();
        let state = StateVector::from_normalized(vec![amps[0] / norm, amps[1] / norm])
            .expect("renormalized herald amplitudes");
        (prob, Some(state))
    }
}

/// Half-wave-plate Jones matrix at fast-axis angle θ (global phase dropped):
/// R(θ)·diag(1, −1)·R(−θ).
pub fn jones_hwp(angle: f64) -> Array2<C64> {
    let (s, c) = (2.0 * angle).sin_cos();
    let mut m = Array2::<C64>::zeros((2, 2));
    m[(0, 0)] = C64::new(c, 0.0);
    m[(0, 1)] = C64::new(s, 0.0);
    m[(1, 0)] = C64::new(s, 0.0);
    m[(1, 1)] = C64::new(-c, 0.0);
    m
}

/// Quarter-wave-plate Jones matrix at fast-axis angle θ:
/// R(θ)·diag(1, i)·R(−θ).
pub fn jones_qwp(angle: f64) -> Array2<C64> {
    let (s, c) = angle.sin_cos();
    let i = C64::I;
    let mut m = Array2::<C64>::zeros((2, 2));
    m[(0, 0)] = C64::new(c * c, 0.0) + i * s * s;
    m[(0, 1)] = (C64::ONE - i) * s * c;
    m[(1, 0)] = (C64::ONE - i) * s * c;
    m[(1, 1)] = C64::new(s * s, 0.0) + i * c * c;
    m
}

/// PBS mode map for input ports 1 and 2 (outputs 3 and 4): transmits H,
/// reflects V.
pub fn pbs_transform(state: &TwoPhotonState) -> Result<TwoPhotonState> {
    for (&(a, b), _) in state.terms() {
        for m in [a, b] {
            if m.path != 1 && m.path != 2 {
                return Err(Error::UnknownPort(m.path));
            }
        }
    }
    Ok(state.apply_mode_map(|m| {
        let out = match (m.path, m.polarization) {
            (1, Polarization::H) => OpticalMode::new(3, Polarization::H),
            (1, Polarization::V) => OpticalMode::new(4, Polarization::V),
            (2, Polarization::H) => OpticalMode::new(4, Polarization::H),
            (2, Polarization::V) => OpticalMode::new(3, Polarization::V),
            _ => unreachable!("ports validated above"),
        };
        vec![(out, C64::ONE)]
    }))
}

/// Applies a polarization Jones matrix to every photon on one path.
pub fn apply_waveplate(state: &TwoPhotonState, path: u8, jones: &Array2<C64>) -> TwoPhotonState {
    let j = jones.clone();
    state.apply_mode_map(move |m| {
        if m.path != path {
            return vec![(m, C64::ONE)];
        }
        let col = match m.polarization {
            Polarization::H => 0,
            Polarization::V => 1,
        };
        vec![
            (OpticalMode::new(path, Polarization::H), j[(0, col)]),
            (OpticalMode::new(path, Polarization::V), j[(1, col)]),
        ]
    })
}

/// Outcome of one Type-I fusion attempt.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub enum FusionOutcome {
    /// Both photons left through the same port; the branch is dropped.
    Discard,
    Success {
        /// Herald measurement on the ancillary path: 0 = H, 1 = V.
        herald_bit: u8,
        /// θ₁ + θ₂ + herald·π.
        output_phase: EquatorialPhase,
        /// Classical record of the π shift (equal to the herald bit).
        pi_shift_bit: u8,
    },
}

/// Samples one fusion attempt on two equatorial qubits.
///
/// Success probability is 1/2; given success the herald bits are
/// equiprobable and the output phase is θ₁+θ₂ (+π when the herald is V).
pub fn fusion_gate(
    theta1: EquatorialPhase,
    theta2: EquatorialPhase,
    rng: &mut impl Rng,
) -> FusionOutcome {
    if rng.random::<bool>() {
        return FusionOutcome::Discard;
    }
    let herald_bit = u8::from(rng.random::<bool>());
    let shift = if herald_bit == 1 { std::f64::consts::PI } else { 0.0 };
    FusionOutcome::Success {
        herald_bit,
        output_phase: EquatorialPhase::new(theta1.radians() + theta2.radians() + shift),
        pi_shift_bit: herald_bit,
    }
}

/// A qubit surviving the fusion tree.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct Survivor {
    /// Tree level the qubit reached (it aggregates 2^level inputs).
    pub level: u32,
    pub phase: EquatorialPhase,
    /// Accumulated π-shift record for this qubit.
    pub pi_shift_bit: u8,
}

impl Survivor {
    /// QFI carried: (2^level)².
    pub fn qfi(&self) -> f64 {
        let w = (1u64 << self.level) as f64;
        w * w
    }
}

/// One simulated pass of the iterative fusion tree.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FusionTrial {
    pub depth: u32,
    pub survivors: Vec<Survivor>,
}

impl FusionTrial {
    pub fn total_qfi(&self) -> f64 {
        self.survivors.iter().map(Survivor::qfi).sum()
    }

    /// One stored classical bit per surviving qubit.
    pub fn classical_bits(&self) -> usize {
        self.survivors.len()
    }
}

/// Runs one fusion-tree trial on n equal-phase qubits.
///
/// At each level same-phase qubits are paired and fused; an odd one out is
/// set aside as a survivor. `buffer_survival` is the probability that a
/// qubit survives buffering between levels (1 = ideal memories).
pub fn run_fusion_trial(
    n: usize,
    theta: EquatorialPhase,
    rng: &mut impl Rng,
    buffer_survival: f64,
) -> FusionTrial {
    let mut current: Vec<(EquatorialPhase, u8)> = vec![(theta, 0); n];
    let mut survivors = Vec::new();
    let mut depth = 0u32;
    while current.len() >= 2 {
        if current.len() % 2 == 1 {
            let (phase, bit) = current.pop().expect("odd element");
            survivors.push(Survivor { level: depth, phase, pi_shift_bit: bit });
        }
        let mut next = Vec::with_capacity(current.len() / 2);
        for pair in current.chunks_exact(2) {
            let ((p1, b1), (p2, b2)) = (pair[0], pair[1]);
            match fusion_gate(p1, p2, rng) {
                FusionOutcome::Discard => {}
                FusionOutcome::Success { output_phase, pi_shift_bit, .. } => {
                    let survives =
                        buffer_survival >= 1.0 || rng.random::<f64>() < buffer_survival;
                    if survives {
                        next.push((output_phase, b1 ^ b2 ^ pi_shift_bit));
                    }
                }
            }
        }
        depth += 1;
        current = next;
    }
    if let Some(&(phase, bit)) = current.first() {
        survivors.push(Survivor {
            level: depth,
            phase,
            pi_shift_bit: bit,
        });
    }
    FusionTrial { depth, survivors }
}

/// Aggregate statistics over fusion-tree trials.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FusionTreeStats {
    pub n: usize,
    pub trials: u64,
    /// depth_histogram[d] = trials that executed exactly d levels.
    pub depth_histogram: Vec<u64>,
    /// survivor_histogram[s] = trials that ended with s surviving qubits.
    pub survivor_histogram: Vec<u64>,
    pub mean_survivors: f64,
    pub mean_total_qfi: f64,
    pub mean_classical_bits: f64,
    pub max_depth: u32,
    pub max_survivors: usize,
}

/// Runs `trials` fusion-tree passes and aggregates the statistics.
pub fn fusion_tree(
    n: usize,
    theta: EquatorialPhase,
    rng: &mut impl Rng,
    trials: u64,
    buffer_survival: f64,
) -> Result<FusionTreeStats> {
    if n == 0 {
        return Err(Error::InvalidParameter("fusion tree needs n ≥ 1".into()));
    }
    if trials == 0 {
        return Err(Error::NoTrials);
    }
    let mut depth_histogram = Vec::new();
    let mut survivor_histogram = Vec::new();
    let mut qfi_sum = 0.0;
    let mut survivor_sum = 0u64;
    let mut max_depth = 0u32;
    let mut max_survivors = 0usize;
    for _ in 0..trials {
        let trial = run_fusion_trial(n, theta, rng, buffer_survival);
        let d = trial.depth as usize;
        if depth_histogram.len() <= d {
            depth_histogram.resize(d + 1, 0);
        }
        depth_histogram[d] += 1;
        let s = trial.survivors.len();
        if survivor_histogram.len() <= s {
            survivor_histogram.resize(s + 1, 0);
        }
        survivor_histogram[s] += 1;
        qfi_sum += trial.total_qfi();
        survivor_sum += s as u64;
        max_depth = max_depth.max(trial.depth);
        max_survivors = max_survivors.max(s);
    }
    let t = trials as f64;
    Ok(FusionTreeStats {
        n,
        trials,
        depth_histogram,
        survivor_histogram,
        mean_survivors: survivor_sum as f64 / t,
        mean_total_qfi: qfi_sum / t,
        mean_classical_bits: survivor_sum as f64 / t,
        max_depth,
        max_survivors,
    })
}

/// Post-selection throughput accounting for the two cascade platforms.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CnotResourceModel {
    pub n: usize,
    pub gate_success_prob: f64,
    /// success_prob^{N−1}: all N−1 cascade gates must post-select.
    pub cascade_throughput: f64,
    /// Type-I fusion succeeds with probability 1/2 per pairing.
    pub fusion_throughput_per_pairing: f64,
}

/// Throughput of an N-qubit CNOT cascade built from post-selected gates
/// with the given per-gate success probability (1/9 for the PPBS gate).
pub fn cnot_resource_model(n: usize, success_prob: f64) -> Result<CnotResourceModel> {
    if !(success_prob > 0.0 && success_prob <= 1.0) {
        return Err(Error::InvalidSuccessProbability(success_prob));
    }
    if n < 2 {
        return Err(Error::InvalidParameter(format!("cascade size {n} must be ≥ 2")));
    }
    Ok(CnotResourceModel {
        n,
        gate_success_prob: success_prob,
        cascade_throughput: success_prob.powi(n as i32 - 1),
        fusion_throughput_per_pairing: 0.5,
    })
}

/// Default PPBS CNOT success probability.
pub const PPBS_CNOT_SUCCESS: f64 = 1.0 / 9.0;
