//! Reproducible command-line experiments.
//!
//! Every run is fully determined by its [`RunConfig`] (including the seed):
//! identical configs produce byte-identical output files. Angles are given
//! in degrees on the command line and converted to radians internally.
//! Outputs embed a metadata header (config echo, artifact version, seed)
//! and are written atomically via temp-and-rename.

use clap::{Parser, ValueEnum};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use crate::compression::{
    branch_qfi_equal_phases, build_measurement, cascade_enumerate, decompose_two_point,
};
use crate::estimation::{
    error_statistics, estimate_arccos, estimate_optimal_basis, simulate_counts,
    simulate_counts_optimal, CountRecord, EstimationRecord, FringeModel,
};
use crate::photonic::{fusion_gate, fusion_tree, FusionOutcome};
use crate::qfi::{qfi_variance, EnergyDistribution};
use crate::quantum::EquatorialPhase;
use crate::{Error, Result};

pub const ARTIFACT_VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum CommandKind {
    Cascade,
    Fusion,
    Decompose,
    Fringe,
    Estimate,
}

impl CommandKind {
    fn name(self) -> &'static str {
        match self {
            CommandKind::Cascade => "cascade",
            CommandKind::Fusion => "fusion",
            CommandKind::Decompose => "decompose",
            CommandKind::Fringe => "fringe",
            CommandKind::Estimate => "estimate",
        }
    }
}

/// Seeded, scriptable experiment configuration.
#[derive(Debug, Clone, Parser)]
#[command(name = "qfi-compress", version, about = "QFI compression experiments")]
pub struct RunConfig {
    /// Experiment to run.
    #[arg(long, value_enum)]
    pub command: CommandKind,
    /// Number of input qubits (cascade, fusion).
    #[arg(long)]
    pub n: Option<usize>,
    /// Equatorial phase θ, degrees.
    #[arg(long, default_value_t = 20.0)]
    pub theta_deg: f64,
    /// Second phase θ₂, degrees; enables the fusion pair mode.
    #[arg(long)]
    pub theta2_deg: Option<f64>,
    /// Monte Carlo trials.
    #[arg(long, default_value_t = 100_000)]
    pub trials: u64,
    /// Mean detected photons per estimate.
    #[arg(long, default_value_t = 277.0)]
    pub mean_photons: f64,
    /// RNG seed; always echoed in output metadata.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Input (E, p) distribution file for decompose.
    #[arg(long)]
    pub dist_file: Option<PathBuf>,
    /// Fringe amplitude A.
    #[arg(long, default_value_t = 1.0)]
    pub model_a: f64,
    /// Fringe frequency offset δ.
    #[arg(long, default_value_t = 0.0)]
    pub model_delta: f64,
    /// Fringe phase offset φ, radians.
    #[arg(long, default_value_t = 0.0)]
    pub model_phi: f64,
    /// Linear visibility drift: A(t) = A·(1 − η·t) over the acquisition.
    #[arg(long, default_value_t = 0.0)]
    pub drift_eta: f64,
    /// Output file path.
    #[arg(long)]
    pub out: PathBuf,
}

impl RunConfig {
    fn model(&self) -> Result<FringeModel> {
        FringeModel::new(self.model_a, self.model_delta, self.model_phi)
    }

    fn metadata_lines(&self) -> Vec<String> {
        let mut lines = vec![
            format!("command = {}", self.command.name()),
            format!("artifact_version = {ARTIFACT_VERSION}"),
            format!("seed = {}", self.seed),
            format!("theta_deg = {}", self.theta_deg),
        ];
        if let Some(n) = self.n {
            lines.push(format!("n = {n}"));
        }
        if let Some(t2) = self.theta2_deg {
            lines.push(format!("theta2_deg = {t2}"));
        }
        match self.command {
            CommandKind::Fusion => lines.push(format!("trials = {}", self.trials)),
            CommandKind::Fringe | CommandKind::Estimate => {
                lines.push(format!("trials = {}", self.trials));
                lines.push(format!("mean_photons = {}", self.mean_photons));
                lines.push(format!("model_a = {}", self.model_a));
                lines.push(format!("model_delta = {}", self.model_delta));
                lines.push(format!("model_phi = {}", self.model_phi));
                lines.push(format!("drift_eta = {}", self.drift_eta));
            }
            _ => {}
        }
        if let Some(f) = &self.dist_file {
            lines.push(format!("dist_file = {}", f.display()));
        }
        lines
    }

    fn metadata_json(&self) -> serde_json::Value {
        serde_json::json!({
            "command": self.command.name(),
            "artifact_version": ARTIFACT_VERSION,
            "seed": self.seed,
            "n": self.n,
            "theta_deg": self.theta_deg,
            "theta2_deg": self.theta2_deg,
            "trials": self.trials,
            "mean_photons": self.mean_photons,
            "model_a": self.model_a,
            "model_delta": self.model_delta,
            "model_phi": self.model_phi,
            "drift_eta": self.drift_eta,
        })
    }
}

/// Maps an error to the process exit code: 2 for configuration problems,
/// 3 for numerical-validation failures.
pub fn exit_code_for(err: &Error) -> i32 {
    match err {
        Error::ProbabilityNotNormalized(_)
        | Error::NegativeProbability(_)
        | Error::IncompleteKraus(_)
        | Error::SupportLeakage(_)
        | Error::NotNormalized(_)
        | Error::NotUnitary(_)
        | Error::FitDiverged(_)
        | Error::NonPositiveQfi(_) => 3,
        _ => 2,
    }
}

fn write_atomic(path: &Path, contents: &str) -> Result<()> {
    let parent = path.parent().filter(|p| !p.as_os_str().is_empty());
    if let Some(dir) = parent {
        if !dir.exists() {
            return Err(Error::Io(std::io::Error::new(
                std::io::ErrorKind::NotFound,
                format!("output directory {} does not exist", dir.display()),
            )));
        }
    }
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(".tmp");
    let tmp = PathBuf::from(tmp);
    std::fs::write(&tmp, contents)?;
    std::fs::rename(&tmp, path)?;
    Ok(())
}

fn csv_header(config: &RunConfig, extra: &[String]) -> String {
    let mut out = String::new();
    for line in config.metadata_lines() {
        let _ = writeln!(out, "# {line}");
    }
    for line in extra {
        let _ = writeln!(out, "# {line}");
    }
    out
}

/// Dispatches the configured command.
pub fn run(config: &RunConfig) -> Result<()> {
    match config.command {
        CommandKind::Cascade => cmd_cascade(config),
        CommandKind::Fusion => cmd_fusion(config),
        CommandKind::Decompose => cmd_decompose(config),
        CommandKind::Fringe => cmd_fringe(config),
        CommandKind::Estimate => cmd_estimate(config),
    }
}

/// Enumerates the CNOT cascade branch table with per-branch QFI and the
/// average-QFI summary.
pub fn cmd_cascade(config: &RunConfig) -> Result<()> {
    let n = config
        .n
        .ok_or_else(|| Error::InvalidParameter("cascade requires --n".into()))?;
    let theta = EquatorialPhase::new(config.theta_deg.to_radians());
    let phases = vec![theta; n];
    let branches = cascade_enumerate(&phases)?;
    let average_qfi: f64 = branches
        .iter()
        .map(|b| b.probability * branch_qfi_equal_phases(n, b.k_zero_count))
        .sum();
    let mut out = csv_header(config, &[format!("average_qfi = {average_qfi}")]);
    out.push_str("bits,k,phase_rad,probability,branch_qfi\n");
    for b in &branches {
        let bits: String = b.outcome_bits.iter().map(|&m| char::from(b'0' + m)).collect();
        let _ = writeln!(
            out,
            "{bits},{},{},{},{}",
            b.k_zero_count,
            b.final_phase.radians(),
            b.probability,
            branch_qfi_equal_phases(n, b.k_zero_count)
        );
    }
    write_atomic(&config.out, &out)
}

/// Fusion-tree statistics, or pair-mode phase-addition counts when a second
/// phase is given.
pub fn cmd_fusion(config: &RunConfig) -> Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let theta = EquatorialPhase::new(config.theta_deg.to_radians());
    if config.trials == 0 {
        return Err(Error::NoTrials);
    }
    if let Some(theta2_deg) = config.theta2_deg {
        // Pair mode: single fusion of two distinct phases.
        let theta2 = EquatorialPhase::new(theta2_deg.to_radians());
        let mut discard = 0u64;
        let mut success = [0u64; 2];
        let mut phases = [0.0f64; 2];
        for _ in 0..config.trials {
            match fusion_gate(theta, theta2, &mut rng) {
                FusionOutcome::Discard => discard += 1,
                FusionOutcome::Success { herald_bit, output_phase, .. } => {
                    success[herald_bit as usize] += 1;
                    phases[herald_bit as usize] = output_phase.radians().to_degrees();
                }
            }
        }
        let mut out = csv_header(config, &[]);
        out.push_str("status,herald_bit,phase_deg,count\n");
        let _ = writeln!(out, "discard,,,{discard}");
        for bit in 0..2 {
            let _ = writeln!(out, "success,{bit},{},{}", phases[bit], success[bit]);
        }
        return write_atomic(&config.out, &out);
    }
    let n = config
        .n
        .ok_or_else(|| Error::InvalidParameter("fusion requires --n".into()))?;
    let stats = fusion_tree(n, theta, &mut rng, config.trials, 1.0)?;
    let doc = serde_json::json!({
        "metadata": config.metadata_json(),
        "stats": stats,
    });
    write_atomic(&config.out, &(serde_json::to_string_pretty(&doc)? + "\n"))
}

fn read_distribution(path: &Path) -> Result<EnergyDistribution> {
    let text = std::fs::read_to_string(path)?;
    let mut entries = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let mut fields = line.split(',');
        let parse = |field: Option<&str>| -> Result<f64> {
            field
                .map(str::trim)
                .and_then(|s| s.parse::<f64>().ok())
                .ok_or_else(|| {
                    Error::InvalidParameter(format!(
                        "malformed distribution row at line {}",
                        lineno + 1
                    ))
                })
        };
        let e = parse(fields.next())?;
        let p = parse(fields.next())?;
        if p < 0.0 {
            return Err(Error::NegativeProbability(p));
        }
        entries.push((e, p));
    }
    let total: f64 = entries.iter().map(|&(_, p)| p).sum();
    if (total - 1.0).abs() > 1e-9 {
        return Err(Error::ProbabilityNotNormalized(total));
    }
    // Renormalize residual rounding so downstream invariants hold exactly.
    for entry in &mut entries {
        entry.1 /= total;
    }
    EnergyDistribution::new(entries)
}

/// Runs the two-point decomposition on a distribution file and reports the
/// ensemble together with its validity checks.
pub fn cmd_decompose(config: &RunConfig) -> Result<()> {
    let path = config
        .dist_file
        .as_ref()
        .ok_or_else(|| Error::InvalidParameter("decompose requires --dist-file".into()))?;
    let parent = read_distribution(path)?;
    let ensemble = decompose_two_point(&parent);
    let ops = build_measurement(&ensemble)?;
    // Completeness residual: max_E |Σ_k p(k|E) − 1|.
    let d = parent.support_size();
    let mut completeness_residual = 0.0f64;
    for i in 0..d {
        let total: f64 = ops.iter().map(|m| m[(i, i)].norm_sqr()).sum();
        completeness_residual = completeness_residual.max((total - 1.0).abs());
    }
    let parent_qfi = qfi_variance(&parent);
    let average_qfi = ensemble.average_qfi();
    if (average_qfi - parent_qfi).abs() > 1e-9 * (1.0 + parent_qfi) {
        return Err(Error::ProbabilityNotNormalized(average_qfi));
    }
    // The M_k are diagonal with nonnegative entries; serialize the diagonals.
    let measurement_ops: Vec<Vec<f64>> = ops
        .iter()
        .map(|m| (0..d).map(|i| m[(i, i)].re).collect())
        .collect();
    let doc = serde_json::json!({
        "metadata": config.metadata_json(),
        "ensemble": ensemble,
        "measurement_ops": measurement_ops,
        "completeness_residual": completeness_residual,
        "mixture_residual": ensemble.mixture_residual(),
        "parent_qfi": parent_qfi,
        "average_qfi": average_qfi,
    });
    write_atomic(&config.out, &(serde_json::to_string_pretty(&doc)? + "\n"))
}

/// Sweep bounds used by the fringe command: −90° to 270° in 2.5° steps.
pub const SWEEP_START_DEG: f64 = -90.0;
pub const SWEEP_STOP_DEG: f64 = 270.0;
pub const SWEEP_STEP_DEG: f64 = 2.5;

/// Phase grid of the sweep, degrees.
pub fn sweep_grid_deg() -> Vec<f64> {
    let steps = ((SWEEP_STOP_DEG - SWEEP_START_DEG) / SWEEP_STEP_DEG).round() as usize;
    (0..=steps).map(|i| SWEEP_START_DEG + i as f64 * SWEEP_STEP_DEG).collect()
}

/// Simulates the doubled-fringe sweep and writes the count records as CSV
/// (columns theta_deg, n_plus, n_minus, duration_s).
pub fn cmd_fringe(config: &RunConfig) -> Result<()> {
    let model = config.model()?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let grid = sweep_grid_deg();
    let mut out = csv_header(config, &[format!("rows = {}", grid.len())]);
    out.push_str("theta_deg,n_plus,n_minus,duration_s\n");
    let last = (grid.len() - 1) as f64;
    for (i, &deg) in grid.iter().enumerate() {
        // Sequential acquisition: visibility drifts linearly over the sweep.
        let drift_scale = 1.0 - config.drift_eta * i as f64 / last;
        let drifted = model.with_visibility_scale(drift_scale);
        let rec = simulate_counts(deg.to_radians(), &drifted, config.mean_photons, 30.0, &mut rng)?;
        let _ = writeln!(out, "{deg},{},{},{}", rec.n_plus, rec.n_minus, rec.duration);
    }
    write_atomic(&config.out, &out)
}

/// Parses count records back from the fringe CSV format.
pub fn read_count_records(path: &Path) -> Result<Vec<CountRecord>> {
    let text = std::fs::read_to_string(path)?;
    let mut records = Vec::new();
    for line in text.lines() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') || line.starts_with("theta_deg") {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 4 {
            return Err(Error::InvalidParameter(format!("malformed count row: {line}")));
        }
        records.push(CountRecord {
            theta_set: fields[0]
                .parse::<f64>()
                .map_err(|_| Error::InvalidParameter(format!("bad theta: {}", fields[0])))?
                .to_radians(),
            n_plus: fields[1]
                .parse()
                .map_err(|_| Error::InvalidParameter(format!("bad n_plus: {}", fields[1])))?,
            n_minus: fields[2]
                .parse()
                .map_err(|_| Error::InvalidParameter(format!("bad n_minus: {}", fields[2])))?,
            duration: fields[3]
                .parse()
                .map_err(|_| Error::InvalidParameter(format!("bad duration: {}", fields[3])))?,
        });
    }
    Ok(records)
}

#[derive(Serialize)]
struct EstimatePoint {
    theta_deg: f64,
    /// Optimal-basis estimation of the compressed (doubled) fringe.
    compressed: EstimationRecord,
    /// Optimal-basis estimation of the uncompressed fringe.
    uncompressed: EstimationRecord,
    /// arccos estimation of the compressed fringe (drift-sensitive).
    arccos: EstimationRecord,
}

/// Monte Carlo phase estimation across a θ grid, with the √N̄-scaled
/// std/RMSE/bias reported against the Cramér-Rao lines 0.5 (compressed)
/// and 1.0 (uncompressed).
pub fn cmd_estimate(config: &RunConfig) -> Result<()> {
    let model = config.model()?;
    if config.trials < 2 {
        return Err(Error::NoTrials);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    // A non-default --theta-deg selects a single point; otherwise sweep a
    // grid inside the unambiguous branch of the estimator.
    let grid_deg: Vec<f64> = if config.theta_deg != 20.0 {
        vec![config.theta_deg]
    } else {
        (0..15).map(|i| 10.0 + 5.0 * i as f64).collect()
    };
    let last = (grid_deg.len() - 1).max(1) as f64;
    let mut points = Vec::with_capacity(grid_deg.len());
    for (i, &deg) in grid_deg.iter().enumerate() {
        let theta = deg.to_radians();
        let drift_scale = 1.0 - config.drift_eta * i as f64 / last;
        let drifted = model.with_visibility_scale(drift_scale);
        let freq = model.frequency();
        let mut opt_compressed = Vec::with_capacity(config.trials as usize);
        let mut opt_uncompressed = Vec::with_capacity(config.trials as usize);
        let mut arccos = Vec::with_capacity(config.trials as usize);
        for _ in 0..config.trials {
            let rc = simulate_counts_optimal(theta, theta, freq, &drifted, config.mean_photons, &mut rng)?;
            opt_compressed.push(estimate_optimal_basis(&rc, &model, theta, freq)?.value);
            let ru = simulate_counts_optimal(theta, theta, 1.0, &drifted, config.mean_photons, &mut rng)?;
            opt_uncompressed.push(estimate_optimal_basis(&ru, &model, theta, 1.0)?.value);
            let ra = simulate_counts(theta, &drifted, config.mean_photons, 30.0, &mut rng)?;
            arccos.push(estimate_arccos(&ra, &model)?.value);
        }
        points.push(EstimatePoint {
            theta_deg: deg,
            compressed: error_statistics(&opt_compressed, theta, config.mean_photons)?,
            uncompressed: error_statistics(&opt_uncompressed, theta, config.mean_photons)?,
            arccos: error_statistics(&arccos, theta, config.mean_photons)?,
        });
    }
    let doc = serde_json::json!({
        "metadata": config.metadata_json(),
        "qcrb_sqrt_n_std": { "compressed": 0.5, "uncompressed": 1.0 },
        "points": points,
    });
    write_atomic(&config.out, &(serde_json::to_string_pretty(&doc)? + "\n"))
}
