//! Fringe models, phase estimators, and error statistics.
//!
//! Successful compression shows up as a doubled fringe: the compressed
//! qubit projects onto |±⟩ with probability ½(1 ± A·cos((2+δ)θ + φ)),
//! where (A, δ, φ) absorb visibility, frequency, and offset imperfections
//! (the ideal case is (1, 0, 0)). Counts are Poissonian, estimators invert
//! the fringe, and the RMSE decomposes into statistical noise plus
//! systematic bias.

use rand::Rng;
use rand_distr::{Distribution, Poisson};
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Fringe parameters of Pr_±(θ) = ½(1 ± A·cos((2+δ)θ + φ)).
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct FringeModel {
    pub amplitude: f64,
    pub frequency_offset: f64,
    pub phase_offset: f64,
}

impl FringeModel {
    pub fn new(amplitude: f64, frequency_offset: f64, phase_offset: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&amplitude) {
            return Err(Error::InvalidParameter(format!(
                "fringe amplitude {amplitude} outside [0, 1]"
            )));
        }
        Ok(FringeModel { amplitude, frequency_offset, phase_offset })
    }

    /// The ideal doubled fringe (A=1, δ=0, φ=0).
    pub fn ideal() -> Self {
        FringeModel { amplitude: 1.0, frequency_offset: 0.0, phase_offset: 0.0 }
    }

    /// Fringe frequency 2+δ.
    pub fn frequency(&self) -> f64 {
        2.0 + self.frequency_offset
    }

    /// Same fringe with the amplitude scaled by a drift factor.
    pub fn with_visibility_scale(&self, scale: f64) -> Self {
        FringeModel {
            amplitude: (self.amplitude * scale).clamp(0.0, 1.0),
            ..*self
        }
    }
}

/// Sign of the ± projector.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sign {
    Plus,
    Minus,
}

/// Photon counts collected at one phase setting.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct CountRecord {
    /// Phase setting, radians.
    pub theta_set: f64,
    pub n_plus: u64,
    pub n_minus: u64,
    /// Acquisition time, seconds (metadata only).
    pub duration: f64,
}

impl CountRecord {
    pub fn total(&self) -> u64 {
        self.n_plus + self.n_minus
    }
}

/// ½(1 ± A·cos((2+δ)θ + φ)), clamped to [0, 1].
pub fn fringe_probability(theta: f64, model: &FringeModel, sign: Sign) -> f64 {
    let osc = model.amplitude * (model.frequency() * theta + model.phase_offset).cos();
    let p = match sign {
        Sign::Plus => 0.5 * (1.0 + osc),
        Sign::Minus => 0.5 * (1.0 - osc),
    };
    p.clamp(0.0, 1.0)
}

/// Single-qubit (uncompressed) fringe ½(1 ± A·cos(θ + φ)).
pub fn fringe_probability_uncompressed(theta: f64, model: &FringeModel, sign: Sign) -> f64 {
    let osc = model.amplitude * (theta + model.phase_offset).cos();
    let p = match sign {
        Sign::Plus => 0.5 * (1.0 + osc),
        Sign::Minus => 0.5 * (1.0 - osc),
    };
    p.clamp(0.0, 1.0)
}

fn poisson_draw(mean: f64, rng: &mut impl Rng) -> u64 {
    if mean <= 0.0 {
        return 0;
    }
    Poisson::new(mean).expect("positive mean").sample(rng) as u64
}

/// Draws Poissonian ± counts with means mean_photons·Pr_±(θ).
pub fn simulate_counts(
    theta: f64,
    model: &FringeModel,
    mean_photons: f64,
    duration: f64,
    rng: &mut impl Rng,
) -> Result<CountRecord> {
    if mean_photons <= 0.0 {
        return Err(Error::InvalidParameter(format!(
            "mean photon number {mean_photons} must be positive"
        )));
    }
    Ok(CountRecord {
        theta_set: theta,
        n_plus: poisson_draw(mean_photons * fringe_probability(theta, model, Sign::Plus), rng),
        n_minus: poisson_draw(mean_photons * fringe_probability(theta, model, Sign::Minus), rng),
        duration,
    })
}

/// Counts in the optimal basis centered on θ₀: Pr_± = ½(1 ± A·sin(f·(θ−θ₀)))
/// with fringe frequency f (2+δ compressed, 1 uncompressed).
pub fn simulate_counts_optimal(
    theta: f64,
    theta0: f64,
    frequency: f64,
    model: &FringeModel,
    mean_photons: f64,
    rng: &mut impl Rng,
) -> Result<CountRecord> {
    if mean_photons <= 0.0 {
        return Err(Error::InvalidParameter(format!(
            "mean photon number {mean_photons} must be positive"
        )));
    }
    let osc = model.amplitude * (frequency * (theta - theta0)).sin();
    let p_plus = (0.5 * (1.0 + osc)).clamp(0.0, 1.0);
    let p_minus = (0.5 * (1.0 - osc)).clamp(0.0, 1.0);
    Ok(CountRecord {
        theta_set: theta,
        n_plus: poisson_draw(mean_photons * p_plus, rng),
        n_minus: poisson_draw(mean_photons * p_minus, rng),
        duration: 0.0,
    })
}

/// A phase estimate; `clamped` marks count ratios that fell outside [−1, 1]
/// from Poisson noise and were mapped to the boundary.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct PhaseEstimate {
    pub value: f64,
    pub clamped: bool,
}

fn count_ratio(record: &CountRecord, amplitude: f64) -> Result<(f64, bool)> {
    let total = record.total();
    if total == 0 {
        return Err(Error::NoCounts);
    }
    let raw = (record.n_plus as f64 - record.n_minus as f64) / (amplitude * total as f64);
    if raw.abs() > 1.0 {
        Ok((raw.clamp(-1.0, 1.0), true))
    } else {
        Ok((raw, false))
    }
}

/// arccos estimator: θ̂ = arccos((N₊−N₋)/(A(N₊+N₋)))/(2+δ) − φ.
///
/// Principal branch only; unambiguous for θ ∈ [−φ, π/(2+δ) − φ].
pub fn estimate_arccos(record: &CountRecord, model: &FringeModel) -> Result<PhaseEstimate> {
    let (ratio, clamped) = count_ratio(record, model.amplitude)?;
    Ok(PhaseEstimate {
        value: ratio.acos() / model.frequency() - model.phase_offset,
        clamped,
    })
}

/// Local optimal-basis estimator around θ₀:
/// θ̂ = θ₀ + arcsin((N₊−N₋)/(A(N₊+N₋)))/f.
///
/// Saturates the Cramér-Rao bound at θ = θ₀, the maximal-Fisher-information
/// point of the fringe. Use f = 2+δ for compressed qubits and f = 1 for
/// uncompressed.
pub fn estimate_optimal_basis(
    record: &CountRecord,
    model: &FringeModel,
    theta0: f64,
    frequency: f64,
) -> Result<PhaseEstimate> {
    let (ratio, clamped) = count_ratio(record, model.amplitude)?;
    Ok(PhaseEstimate { value: theta0 + ratio.asin() / frequency, clamped })
}

/// Result of a least-squares fringe fit.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FringeFit {
    pub model: FringeModel,
    /// Residual sum of squares on the fitted fractions.
    pub residual: f64,
    /// False when the amplitude is too small to pin down δ and φ.
    pub identifiable: bool,
}

/// Fits (A, δ, φ) to the fractions n₊/(n₊+n₋) of the records.
///
/// Separable least squares: for a trial frequency ω the model
/// y − ½ = a·cos(ωθ) + b·sin(ωθ) is linear in (a, b); a grid over ω is
/// refined by golden-section search until the frequency step is below 1e-9.
pub fn fit_fringe(records: &[CountRecord]) -> Result<FringeFit> {
    if records.len() < 8 {
        return Err(Error::InsufficientRecords { needed: 8, got: records.len() });
    }
    let mut points = Vec::with_capacity(records.len());
    for r in records {
        if r.total() == 0 {
            return Err(Error::NoCounts);
        }
        points.push((r.theta_set, r.n_plus as f64 / r.total() as f64 - 0.5));
    }
    let span = points
        .iter()
        .map(|&(t, _)| t)
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), t| (lo.min(t), hi.max(t)));
    if span.1 - span.0 < std::f64::consts::PI {
        return Err(Error::InsufficientRecords { needed: 8, got: records.len() });
    }

    let rss = |omega: f64| -> (f64, f64, f64) {
        // Normal equations for y = a·cosωθ + b·sinωθ.
        let (mut cc, mut cs, mut ss, mut cy, mut sy) = (0.0, 0.0, 0.0, 0.0, 0.0);
        for &(t, y) in &points {
            let (s, c) = (omega * t).sin_cos();
            cc += c * c;
            cs += c * s;
            ss += s * s;
            cy += c * y;
            sy += s * y;
        }
        let det = cc * ss - cs * cs;
        if det.abs() < 1e-12 {
            let r: f64 = points.iter().map(|&(_, y)| y * y).sum();
            return (r, 0.0, 0.0);
        }
        let a = (cy * ss - sy * cs) / det;
        let b = (sy * cc - cy * cs) / det;
        let r: f64 = points
            .iter()
            .map(|&(t, y)| {
                let (s, c) = (omega * t).sin_cos();
                let e = y - a * c - b * s;
                e * e
            })
            .sum();
        (r, a, b)
    };

    // Coarse grid over plausible fringe frequencies.
    let grid_step = 0.02;
    let mut best_omega = 0.25;
    let mut best_rss = f64::INFINITY;
    let mut omega = 0.25;
    while omega <= 4.0 {
        let (r, _, _) = rss(omega);
        if r < best_rss {
            best_rss = r;
            best_omega = omega;
        }
        omega += grid_step;
    }

    // Golden-section refinement.
    let golden = 0.5 * (5.0f64.sqrt() - 1.0);
    let (mut lo, mut hi) = (best_omega - grid_step, best_omega + grid_step);
    while hi - lo > 1e-9 {
        let x1 = hi - golden * (hi - lo);
        let x2 = lo + golden * (hi - lo);
        if rss(x1).0 < rss(x2).0 {
            hi = x2;
        } else {
            lo = x1;
        }
    }
    let omega = 0.5 * (lo + hi);
    let (residual, a, b) = rss(omega);
    let amplitude = 2.0 * a.hypot(b);
    let identifiable = amplitude > 0.02;
    let model = FringeModel {
        amplitude: amplitude.min(1.0),
        frequency_offset: omega - 2.0,
        phase_offset: (-b).atan2(a),
    };
    if !residual.is_finite() {
        return Err(Error::FitDiverged(residual));
    }
    Ok(FringeFit { model, residual, identifiable })
}

/// Error statistics of a batch of estimates against the true phase.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EstimationRecord {
    pub theta_true: f64,
    /// Raw estimates; kept in memory, omitted from serialized batches.
    #[serde(skip)]
    pub estimates: Vec<f64>,
    pub mean_photons: f64,
    pub std: f64,
    pub rmse: f64,
    /// √max(RMSE² − σ², 0).
    pub bias: f64,
    pub sqrt_n_std: f64,
    pub sqrt_n_rmse: f64,
    pub sqrt_n_bias: f64,
}

/// Sample std, RMSE against θ_true, and the bias decomposition, together
/// with the √N̄-scaled versions used for Cramér-Rao comparisons.
pub fn error_statistics(
    estimates: &[f64],
    theta_true: f64,
    mean_photons: f64,
) -> Result<EstimationRecord> {
    if estimates.len() < 2 {
        return Err(Error::TooFewEstimates);
    }
    let n = estimates.len() as f64;
    let mean = estimates.iter().sum::<f64>() / n;
    let var = estimates.iter().map(|e| (e - mean) * (e - mean)).sum::<f64>() / (n - 1.0);
    let std = var.sqrt();
    let mse = estimates
        .iter()
        .map(|e| (e - theta_true) * (e - theta_true))
        .sum::<f64>()
        / n;
    let rmse = mse.sqrt();
    let bias = (mse - var).max(0.0).sqrt();
    let scale = mean_photons.sqrt();
    Ok(EstimationRecord {
        theta_true,
        estimates: estimates.to_vec(),
        mean_photons,
        std,
        rmse,
        bias,
        sqrt_n_std: scale * std,
        sqrt_n_rmse: scale * rmse,
        sqrt_n_bias: scale * bias,
    })
}
