//! Python bindings for the qfi-compress library.
//!
//! Thin wrappers over the Rust API: inputs are plain floats/lists, outputs
//! are dicts and lists, angles are in radians. Build with the
//! `extension-module` feature to produce an importable module.

use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use pyo3::types::PyDict;

use qfi_compress::compression;
use qfi_compress::estimation;
use qfi_compress::photonic;
use qfi_compress::qfi;
use qfi_compress::quantum::EquatorialPhase;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn err(e: qfi_compress::Error) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn branch_dict<'py>(
    py: Python<'py>,
    b: &compression::CascadeResult,
) -> PyResult<Bound<'py, PyDict>> {
    let d = PyDict::new(py);
    d.set_item("bits", b.outcome_bits.clone())?;
    d.set_item("phase", b.final_phase.radians())?;
    d.set_item("probability", b.probability)?;
    d.set_item("k", b.k_zero_count)?;
    Ok(d)
}

/// Enumerate all CNOT-cascade branches for the given input phases (radians).
#[pyfunction]
fn cascade_enumerate(py: Python<'_>, phases: Vec<f64>) -> PyResult<Vec<Bound<'_, PyDict>>> {
    let phases: Vec<EquatorialPhase> = phases.into_iter().map(EquatorialPhase::new).collect();
    let branches = compression::cascade_enumerate(&phases).map_err(err)?;
    branches.iter().map(|b| branch_dict(py, b)).collect()
}

/// Branch QFI (2k + 2 − n)² for equal input phases.
#[pyfunction]
fn branch_qfi_equal_phases(n: usize, k: usize) -> f64 {
    compression::branch_qfi_equal_phases(n, k)
}

/// Monte Carlo branch counts for the cascade; deterministic per seed.
#[pyfunction]
fn cascade_sample(
    py: Python<'_>,
    phases: Vec<f64>,
    seed: u64,
    trials: u64,
) -> PyResult<Vec<Bound<'_, PyDict>>> {
    let phases: Vec<EquatorialPhase> = phases.into_iter().map(EquatorialPhase::new).collect();
    let sampled = compression::cascade_sample(&phases, seed, trials).map_err(err)?;
    sampled
        .iter()
        .map(|(b, count)| {
            let d = branch_dict(py, b)?;
            d.set_item("count", count)?;
            Ok(d)
        })
        .collect()
}

/// Classical record size in bits for an n-qubit cascade.
#[pyfunction]
fn classical_register_size(n: u64) -> PyResult<u32> {
    compression::classical_register_size(n).map_err(err)
}

/// QFI 4·Var(E) of a phase-encoded energy distribution [(E, p), ...].
#[pyfunction]
fn qfi_variance(entries: Vec<(f64, f64)>) -> PyResult<f64> {
    Ok(qfi::qfi_variance(&qfi::EnergyDistribution::new(entries).map_err(err)?))
}

/// Cramér-Rao variance bound 1/(ν·F).
#[pyfunction]
fn qcrb_variance(qfi_value: f64, trials: u64) -> PyResult<f64> {
    qfi::qcrb_variance(qfi_value, trials).map_err(err)
}

/// Mean-preserving two-point decomposition of a distribution [(E, p), ...].
///
/// Returns {"components": [{weight, support, conditionals, mean, qfi}, ...],
/// "mixture_residual", "average_qfi", "parent_qfi"}.
#[pyfunction]
fn decompose_two_point(py: Python<'_>, entries: Vec<(f64, f64)>) -> PyResult<Bound<'_, PyDict>> {
    let parent = qfi::EnergyDistribution::new(entries).map_err(err)?;
    let ensemble = compression::decompose_two_point(&parent);
    let components: Vec<Bound<'_, PyDict>> = ensemble
        .components
        .iter()
        .map(|c| {
            let d = PyDict::new(py);
            d.set_item("weight", c.weight)?;
            d.set_item("support", c.support.clone())?;
            d.set_item("conditionals", c.conditionals.clone())?;
            d.set_item("mean", c.mean)?;
            d.set_item("qfi", c.qfi())?;
            Ok(d)
        })
        .collect::<PyResult<_>>()?;
    let out = PyDict::new(py);
    out.set_item("components", components)?;
    out.set_item("mixture_residual", ensemble.mixture_residual())?;
    out.set_item("average_qfi", ensemble.average_qfi())?;
    out.set_item("parent_qfi", qfi::qfi_variance(&parent))?;
    Ok(out)
}

/// Run the fusion tree on n equal-phase qubits for `trials` passes.
#[pyfunction]
#[pyo3(signature = (n, theta, seed, trials, buffer_survival = 1.0))]
fn fusion_tree(
    py: Python<'_>,
    n: usize,
    theta: f64,
    seed: u64,
    trials: u64,
    buffer_survival: f64,
) -> PyResult<Bound<'_, PyDict>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let stats =
        photonic::fusion_tree(n, EquatorialPhase::new(theta), &mut rng, trials, buffer_survival)
            .map_err(err)?;
    let d = PyDict::new(py);
    d.set_item("n", stats.n)?;
    d.set_item("trials", stats.trials)?;
    d.set_item("depth_histogram", stats.depth_histogram)?;
    d.set_item("survivor_histogram", stats.survivor_histogram)?;
    d.set_item("mean_survivors", stats.mean_survivors)?;
    d.set_item("mean_total_qfi", stats.mean_total_qfi)?;
    d.set_item("mean_classical_bits", stats.mean_classical_bits)?;
    d.set_item("max_depth", stats.max_depth)?;
    d.set_item("max_survivors", stats.max_survivors)?;
    Ok(d)
}

/// Sample one Type-I fusion of two phases; returns None on discard, else
/// {"herald_bit", "phase"}.
#[pyfunction]
fn fusion_gate(
    py: Python<'_>,
    theta1: f64,
    theta2: f64,
    seed: u64,
) -> PyResult<Option<Bound<'_, PyDict>>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    match photonic::fusion_gate(
        EquatorialPhase::new(theta1),
        EquatorialPhase::new(theta2),
        &mut rng,
    ) {
        photonic::FusionOutcome::Discard => Ok(None),
        photonic::FusionOutcome::Success { herald_bit, output_phase, .. } => {
            let d = PyDict::new(py);
            d.set_item("herald_bit", herald_bit)?;
            d.set_item("phase", output_phase.radians())?;
            Ok(Some(d))
        }
    }
}

/// Poisson-sample (n_plus, n_minus) from the doubled fringe at θ.
#[pyfunction]
#[pyo3(signature = (theta, amplitude, delta, phi, mean_photons, seed))]
fn simulate_counts(
    theta: f64,
    amplitude: f64,
    delta: f64,
    phi: f64,
    mean_photons: f64,
    seed: u64,
) -> PyResult<(u64, u64)> {
    let model = estimation::FringeModel::new(amplitude, delta, phi).map_err(err)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let rec = estimation::simulate_counts(theta, &model, mean_photons, 30.0, &mut rng)
        .map_err(err)?;
    Ok((rec.n_plus, rec.n_minus))
}

/// arccos phase estimate from a count pair under the given fringe model.
#[pyfunction]
#[pyo3(signature = (n_plus, n_minus, amplitude = 1.0, delta = 0.0, phi = 0.0))]
fn estimate_arccos(
    n_plus: u64,
    n_minus: u64,
    amplitude: f64,
    delta: f64,
    phi: f64,
) -> PyResult<f64> {
    let model = estimation::FringeModel::new(amplitude, delta, phi).map_err(err)?;
    let record = estimation::CountRecord { theta_set: 0.0, n_plus, n_minus, duration: 0.0 };
    Ok(estimation::estimate_arccos(&record, &model).map_err(err)?.value)
}

/// Fit (A, δ, φ) to sweep records [(theta_rad, n_plus, n_minus), ...].
#[pyfunction]
fn fit_fringe(py: Python<'_>, records: Vec<(f64, u64, u64)>) -> PyResult<Bound<'_, PyDict>> {
    let records: Vec<estimation::CountRecord> = records
        .into_iter()
        .map(|(theta_set, n_plus, n_minus)| estimation::CountRecord {
            theta_set,
            n_plus,
            n_minus,
            duration: 0.0,
        })
        .collect();
    let fit = estimation::fit_fringe(&records).map_err(err)?;
    let d = PyDict::new(py);
    d.set_item("amplitude", fit.model.amplitude)?;
    d.set_item("delta", fit.model.frequency_offset)?;
    d.set_item("phi", fit.model.phase_offset)?;
    d.set_item("residual", fit.residual)?;
    d.set_item("identifiable", fit.identifiable)?;
    Ok(d)
}

#[pymodule]
fn qfi_compress_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_function(wrap_pyfunction!(cascade_enumerate, m)?)?;
    m.add_function(wrap_pyfunction!(branch_qfi_equal_phases, m)?)?;
    m.add_function(wrap_pyfunction!(cascade_sample, m)?)?;
    m.add_function(wrap_pyfunction!(classical_register_size, m)?)?;
    m.add_function(wrap_pyfunction!(qfi_variance, m)?)?;
    m.add_function(wrap_pyfunction!(qcrb_variance, m)?)?;
    m.add_function(wrap_pyfunction!(decompose_two_point, m)?)?;
    m.add_function(wrap_pyfunction!(fusion_tree, m)?)?;
    m.add_function(wrap_pyfunction!(fusion_gate, m)?)?;
    m.add_function(wrap_pyfunction!(simulate_counts, m)?)?;
    m.add_function(wrap_pyfunction!(estimate_arccos, m)?)?;
    m.add_function(wrap_pyfunction!(fit_fringe, m)?)?;
    Ok(())
}
