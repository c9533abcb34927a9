//! Acceptance gate: one test per criterion, each printing a single
//! pass/fail line (run with `cargo test --test acceptance -- --nocapture`
//! to see the lines for passing criteria too).

use num_complex::Complex64 as C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::f64::consts::PI;
use std::time::Instant;

use qfi_compress::compression::{
    branch_qfi_equal_phases, build_measurement, cascade_enumerate, decompose_two_point,
    two_qubit_block,
};
use qfi_compress::estimation::{
    estimate_arccos, estimate_optimal_basis, fit_fringe, fringe_probability,
    fringe_probability_uncompressed, simulate_counts, simulate_counts_optimal, CountRecord,
    FringeModel, Sign,
};
use qfi_compress::photonic::{
    apply_waveplate, fusion_gate, fusion_tree, jones_hwp, pbs_transform, FusionOutcome,
    OpticalMode, Polarization, TwoPhotonState,
};
use qfi_compress::qfi::{qfi_derivative_richardson, qfi_variance, EnergyDistribution};
use qfi_compress::quantum::{
    apply_unitary, cnot, equatorial_state, measure_projective, tensor_all, EquatorialPhase,
    StateVector,
};

fn report(id: u32, pass: bool, detail: &str) {
    println!("acceptance {id}: {} — {detail}", if pass { "PASS" } else { "FAIL" });
    assert!(pass, "acceptance {id} failed: {detail}");
}

fn ph(theta: f64) -> EquatorialPhase {
    EquatorialPhase::new(theta)
}

/// Random distribution with support size d, energies in [0, 4].
fn random_distribution(rng: &mut impl Rng, d: usize) -> EnergyDistribution {
    loop {
        let mut entries: Vec<(f64, f64)> = (0..d)
            .map(|_| (rng.random::<f64>() * 4.0, rng.random::<f64>() + 1e-3))
            .collect();
        let total: f64 = entries.iter().map(|&(_, p)| p).sum();
        for e in &mut entries {
            e.1 /= total;
        }
        let dist = EnergyDistribution::new(entries).unwrap();
        // Reject accidental energy collisions so d is as requested.
        if dist.support_size() == d {
            return dist;
        }
    }
}

// 1. Two-qubit block: CNOT on |e_θ⟩⊗|e_θ⟩ + target measurement gives
//    phases {2θ, 0} with probabilities {½, ½}; < 1 ms.
#[test]
fn criterion_1_two_qubit_block() {
    let theta = 0.8;
    let start = Instant::now();
    let input = tensor_all(&[equatorial_state(ph(theta)), equatorial_state(ph(theta))]).unwrap();
    let after = apply_unitary(&input, &cnot(), &[0, 1]).unwrap();
    let outcomes = measure_projective(&after, 1).unwrap();
    let elapsed = start.elapsed();

    let block = two_qubit_block(ph(theta), ph(theta));
    let mut max_err = 0.0f64;
    for (outcome, &(bit, prob, phase)) in outcomes.iter().zip(&block) {
        assert_eq!(outcome.label, bit as usize);
        max_err = max_err.max((outcome.probability - prob).abs());
        let expected =
            tensor_all(&[equatorial_state(phase), StateVector::computational(1, outcome.label)])
                .unwrap();
        // Amplitude error up to global phase.
        let fid = outcome.post_state.fidelity(&expected);
        max_err = max_err.max((1.0 - fid).sqrt());
    }
    max_err = max_err.max(block[0].2.distance(ph(2.0 * theta)));
    max_err = max_err.max(block[1].2.distance(ph(0.0)));
    let pass = max_err < 1e-12 && elapsed.as_micros() < 1000;
    report(1, pass, &format!("max error {max_err:.2e}, runtime {elapsed:?}"));
}

// 2. Cascade QFI conservation: Σ_k B_{N−1,k}(2k+2−N)² = N within 1e-9 for
//    N in 2..12; N=12 enumeration < 1 s.
#[test]
fn criterion_2_cascade_qfi_conservation() {
    let mut worst = 0.0f64;
    let mut n12_time = None;
    for n in 2..=12usize {
        let start = Instant::now();
        let branches = cascade_enumerate(&vec![ph(0.3); n]).unwrap();
        if n == 12 {
            n12_time = Some(start.elapsed());
        }
        let average: f64 = branches
            .iter()
            .map(|b| b.probability * branch_qfi_equal_phases(n, b.k_zero_count))
            .sum();
        worst = worst.max((average - n as f64).abs());
    }
    let n12_time = n12_time.unwrap();
    let pass = worst < 1e-9 && n12_time.as_secs_f64() < 1.0;
    report(2, pass, &format!("max |avg QFI − N| = {worst:.2e}, N=12 in {n12_time:?}"));
}

// 3. General compression: 1000 random distributions, d ∈ 2..16 — K ≤ d−1,
//    mixture within 1e-10, completeness within 1e-10, supports ≤ 2 with
//    mean ε within 1e-10, average QFI matches parent within 1e-9; < 10 s.
#[test]
fn criterion_3_general_compression() {
    let mut rng = ChaCha8Rng::seed_from_u64(33);
    let start = Instant::now();
    let mut worst_mixture = 0.0f64;
    let mut worst_completeness = 0.0f64;
    let mut worst_mean = 0.0f64;
    let mut worst_qfi = 0.0f64;
    let mut structure_ok = true;
    for trial in 0..1000 {
        let d = 2 + trial % 15; // cycles d through 2..=16
        let parent = random_distribution(&mut rng, d);
        let ensemble = decompose_two_point(&parent);
        structure_ok &= ensemble.components.len() <= (d - 1).max(1);
        worst_mixture = worst_mixture.max(ensemble.mixture_residual());
        let eps = parent.epsilon();
        for c in &ensemble.components {
            structure_ok &= c.support.len() <= 2;
            let mean: f64 = c.support.iter().zip(&c.conditionals).map(|(&e, &p)| e * p).sum();
            worst_mean = worst_mean.max((mean - eps).abs());
        }
        let ops = build_measurement(&ensemble).unwrap();
        for i in 0..parent.support_size() {
            let total: f64 = ops.iter().map(|m| m[(i, i)].norm_sqr()).sum();
            worst_completeness = worst_completeness.max((total - 1.0).abs());
        }
        worst_qfi = worst_qfi.max((ensemble.average_qfi() - qfi_variance(&parent)).abs());
    }
    let elapsed = start.elapsed();
    let pass = structure_ok
        && worst_mixture < 1e-10
        && worst_completeness < 1e-10
        && worst_mean < 1e-10
        && worst_qfi < 1e-9
        && elapsed.as_secs_f64() < 10.0;
    report(
        3,
        pass,
        &format!(
            "mixture {worst_mixture:.2e}, completeness {worst_completeness:.2e}, \
             mean {worst_mean:.2e}, QFI {worst_qfi:.2e}, runtime {elapsed:?}"
        ),
    );
}

// 4. Fusion gate: Eq.-style four-term amplitudes exact; conditioned success
//    probability 1/2 and steered states verified by statevector oracle;
//    10⁶-trial Monte Carlo within 5σ.
#[test]
fn criterion_4_fusion_gate() {
    let (t1, t2) = (0.8, 1.7);
    let input = TwoPhotonState::equatorial_pair(1, ph(t1), 2, ph(t2));
    let after_pbs = pbs_transform(&input).unwrap();
    let mut amp_err = 0.0f64;
    let cases = [
        ((3, Polarization::H), (4, Polarization::H), 0.0),
        ((3, Polarization::V), (4, Polarization::V), t1 + t2),
        ((3, Polarization::H), (3, Polarization::V), t2),
        ((4, Polarization::H), (4, Polarization::V), t1),
    ];
    for ((pa, qa), (pb, qb), phase) in cases {
        let amp = after_pbs.amplitude(OpticalMode::new(pa, qa), OpticalMode::new(pb, qb));
        amp_err = amp_err.max((amp - C64::from_polar(0.5, phase)).norm());
    }

    // Statevector oracle: herald on path 4 after HWP(22.5°), keep path 3.
    let after_hwp = apply_waveplate(&after_pbs, 4, &jones_hwp(PI / 8.0));
    let mut success_prob = 0.0;
    let mut steer_err = 0.0f64;
    for (pol, bit) in [(Polarization::H, 0.0), (Polarization::V, 1.0)] {
        let (prob, qubit) = after_hwp.heralded_path_qubit(3, 4, pol);
        success_prob += prob;
        let expected = equatorial_state(ph(t1 + t2 + bit * PI));
        steer_err = steer_err.max(1.0 - qubit.unwrap().fidelity(&expected));
    }

    let trials = 1_000_000u64;
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut successes = 0u64;
    let mut phase_err = 0.0f64;
    for _ in 0..trials {
        if let FusionOutcome::Success { herald_bit, output_phase, .. } =
            fusion_gate(ph(t1), ph(t2), &mut rng)
        {
            successes += 1;
            phase_err = phase_err
                .max(output_phase.distance(ph(t1 + t2 + herald_bit as f64 * PI)));
        }
    }
    let sigma = (0.25 / trials as f64).sqrt();
    let mc_dev = (successes as f64 / trials as f64 - 0.5).abs();

    let pass = amp_err < 1e-12
        && (success_prob - 0.5).abs() < 1e-12
        && steer_err < 1e-12
        && phase_err < 1e-12
        && mc_dev < 5.0 * sigma;
    report(
        4,
        pass,
        &format!(
            "amplitude error {amp_err:.2e}, success {success_prob:.12}, \
             steering error {steer_err:.2e}, MC deviation {mc_dev:.2e} (5σ = {:.2e})",
            5.0 * sigma
        ),
    );
}

// 5. Fusion tree bound: n ∈ {2,3,4,8,16}, 10⁵ trials — depth ≤ ⌊log₂ n⌋,
//    survivors ≤ ⌊log₂ n⌋, mean total QFI = n within 2%.
//
// The survivor bound is provably unattainable exactly as stated for n = 3:
// with probability 1/2 the first fusion succeeds and the trial ends with
// survivors {2θ (level 1), θ (level 0)} — two qubits against ⌊log₂ 3⌋ = 1.
// Pairing them instead would break mean-QFI conservation ((a+b)²/2 ≠ a²+b²
// for a ≠ b), so non-powers-of-two carry up to one parity remainder per
// level and the strict bound is applied to the power-of-two cases only.
#[test]
fn criterion_5_fusion_tree_bound() {
    let trials = 100_000u64;
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut pass = true;
    let mut detail = String::new();
    for n in [2usize, 3, 4, 8, 16] {
        let stats = fusion_tree(n, ph(0.4), &mut rng, trials, 1.0).unwrap();
        let log2 = n.ilog2();
        let survivor_cap = if n.is_power_of_two() { log2 } else { log2 + 1 };
        let qfi_rel = (stats.mean_total_qfi - n as f64).abs() / n as f64;
        let ok = stats.max_depth <= log2
            && stats.max_survivors as u32 <= survivor_cap
            && qfi_rel < 0.02;
        pass &= ok;
        detail.push_str(&format!(
            "n={n}: depth {} (≤{log2}), survivors {} (≤{survivor_cap}{}), QFI dev {:.3}%; ",
            stats.max_depth,
            stats.max_survivors,
            if n.is_power_of_two() { "" } else { ", +1 parity remainder" },
            100.0 * qfi_rel
        ));
    }
    report(5, pass, detail.trim_end_matches("; "));
}

// 6. QCRB saturation: optimal-basis Monte Carlo at N̄ ∈ {277, 522},
//    10⁴ trials — √N̄·Std within 5% of 0.5 (compressed) / 1.0
//    (uncompressed); < 30 s.
#[test]
fn criterion_6_qcrb_saturation() {
    let start = Instant::now();
    let model = FringeModel::ideal();
    let theta = 0.7;
    let trials = 10_000u64;
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut pass = true;
    let mut detail = String::new();
    for mean_photons in [277.0, 522.0] {
        for (freq, target) in [(2.0, 0.5), (1.0, 1.0)] {
            let mut estimates = Vec::with_capacity(trials as usize);
            for _ in 0..trials {
                let rec =
                    simulate_counts_optimal(theta, theta, freq, &model, mean_photons, &mut rng)
                        .unwrap();
                estimates.push(estimate_optimal_basis(&rec, &model, theta, freq).unwrap().value);
            }
            let n = estimates.len() as f64;
            let mean = estimates.iter().sum::<f64>() / n;
            let std =
                (estimates.iter().map(|e| (e - mean) * (e - mean)).sum::<f64>() / (n - 1.0)).sqrt();
            let scaled = std * mean_photons.sqrt();
            let ok = (scaled - target).abs() / target < 0.05;
            pass &= ok;
            detail.push_str(&format!("N̄={mean_photons}, f={freq}: √N̄·Std={scaled:.4} (target {target}); "));
        }
    }
    let elapsed = start.elapsed();
    pass &= elapsed.as_secs_f64() < 30.0;
    report(6, pass, &format!("{}runtime {elapsed:?}", detail));
}

// 7. Fringe doubling: ideal synthetic sweep fits to frequency 2+δ with
//    |δ| < 0.01 and A > 0.999; uncompressed sweep fits frequency 1.
#[test]
fn criterion_7_fringe_doubling() {
    let model = FringeModel::ideal();
    let grid: Vec<f64> = (0..145).map(|i| (-90.0 + 2.5 * i as f64).to_radians()).collect();
    let photons = 1_000_000.0;
    let make = |p: fn(f64, &FringeModel, Sign) -> f64| -> Vec<CountRecord> {
        grid.iter()
            .map(|&t| {
                let n_plus = (photons * p(t, &model, Sign::Plus)).round() as u64;
                CountRecord {
                    theta_set: t,
                    n_plus,
                    n_minus: photons as u64 - n_plus,
                    duration: 30.0,
                }
            })
            .collect()
    };
    let doubled = fit_fringe(&make(fringe_probability)).unwrap();
    let single = fit_fringe(&make(fringe_probability_uncompressed)).unwrap();
    let delta = doubled.model.frequency_offset;
    let amp = doubled.model.amplitude;
    let single_freq = single.model.frequency();
    let pass = delta.abs() < 0.01 && amp > 0.999 && (single_freq - 1.0).abs() < 0.01;
    report(
        7,
        pass,
        &format!("doubled: δ={delta:.2e}, A={amp:.6}; uncompressed frequency {single_freq:.6}"),
    );
}

// 8. Bias reproduction: 2% end-of-run visibility drift produces an
//    oscillating bias with amplitude in [0.01, 0.05] rad. The bias is a
//    systematic (N-independent) offset, so the raw bias in radians is what
//    brackets the 0.02–0.03 rad scale; the magnitude is qualitative.
#[test]
fn criterion_8_drift_bias() {
    let model = FringeModel::ideal();
    let eta = 0.02;
    let mean_photons = 277.0;
    let trials = 40_000u64;
    let grid_deg: Vec<f64> = (0..15).map(|i| 10.0 + 5.0 * i as f64).collect();
    let last = (grid_deg.len() - 1) as f64;
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mut biases = Vec::new();
    for (i, &deg) in grid_deg.iter().enumerate() {
        let theta = deg.to_radians();
        let drifted = model.with_visibility_scale(1.0 - eta * i as f64 / last);
        let mut sum = 0.0;
        for _ in 0..trials {
            let rec = simulate_counts(theta, &drifted, mean_photons, 30.0, &mut rng).unwrap();
            sum += estimate_arccos(&rec, &model).unwrap().value;
        }
        biases.push(sum / trials as f64 - theta);
    }
    let amplitude = biases.iter().fold(0.0f64, |m, b| m.max(b.abs()));
    // The positive lobe (θ < 45°, early in the sweep when drift is still
    // small) is an order of magnitude weaker than the negative one, so the
    // sign check uses a threshold well above the 40k-trial noise floor
    // (~1.5e-4 rad) but below the ~1e-3 rad lobe.
    let has_positive = biases.iter().any(|&b| b > 5e-4);
    let has_negative = biases.iter().any(|&b| b < -5e-4);
    let pass = (0.01..=0.05).contains(&amplitude) && has_positive && has_negative;
    report(
        8,
        pass,
        &format!(
            "bias amplitude {amplitude:.4} rad, sign change: +{has_positive}/−{has_negative}"
        ),
    );
}

// 9. Convention audit: derivative-route QFI agrees with 4·Var across 100
//    random families within 1e-6, pinning the factor-4 convention.
#[test]
fn criterion_9_convention_audit() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let mut worst = 0.0f64;
    for _ in 0..100 {
        let d = rng.random_range(2..=6);
        let dist = random_distribution(&mut rng, d);
        let theta = rng.random::<f64>() * 2.0 * PI;
        let numeric =
            qfi_derivative_richardson(|t| dist.phase_encoded_state(t), theta, 1e-4).unwrap();
        worst = worst.max((numeric - qfi_variance(&dist)).abs());
    }
    let pass = worst < 1e-6;
    report(9, pass, &format!("max |derivative − 4·Var| = {worst:.2e}"));
}
