//! Quantum Fisher information (QFI) compression toolkit.
//!
//! Implements the protocols that squeeze the phase sensitivity of a
//! multi-qubit (or general finite-dimensional) pure state into a single
//! qubit plus a logarithmic classical record:
//!
//! - [`quantum`]: dense pure-state simulation (tensor products, unitaries,
//!   projective and generalized measurements with post-selection).
//! - [`qfi`]: QFI via the derivative definition, via the energy-distribution
//!   variance, and averaged over measurement ensembles; Cramér-Rao bounds.
//! - [`compression`]: the CNOT sum/difference cascade for equatorial qubits
//!   and the general mean-preserving two-point convex decomposition with its
//!   induced measurement and qubit re-encoding.
//! - [`photonic`]: dual-rail two-photon linear optics — waveplates, the
//!   polarizing-beam-splitter mode map, the Type-I fusion gate, and the
//!   iterative fusion tree.
//! - [`estimation`]: fringe models, arccos/optimal-basis phase estimators,
//!   Poissonian count simulation, least-squares fringe fitting, and
//!   RMSE/bias decomposition.
//! - [`cli`]: the reproducible command-line experiments emitting CSV/JSON.

pub mod cli;
pub mod compression;
pub mod estimation;
pub mod photonic;
pub mod qfi;
pub mod quantum;

pub use quantum::{EquatorialPhase, MeasurementOutcome, StateVector};

/// Numerical tolerances used across the crate.
///
/// Algebraic identities (unitarity, measurement completeness) are checked at
/// `algebra`; state norms at `norm`. Both leave headroom for double
/// precision at dimensions up to 2^24.
#[derive(Debug, Clone, Copy)]
pub struct Tolerances {
    pub norm: f64,
    pub algebra: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances { norm: NORM_TOL, algebra: ALGEBRA_TOL }
    }
}

/// Default tolerance for norm checks.
pub const NORM_TOL: f64 = 1e-12;
/// Default tolerance for algebraic identities.
pub const ALGEBRA_TOL: f64 = 1e-10;
/// Probabilities below this are treated as exactly zero.
pub const PROB_FLOOR: f64 = 1e-14;

/// Errors reported by the library.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("state vector dimension {0} does not match expected {1}")]
    DimensionMismatch(usize, usize),
    #[error("state is not normalized (norm² = {0})")]
    NotNormalized(f64),
    #[error("tensor product would exceed {max} qubits (requested {requested})")]
    DimensionOverflow { requested: usize, max: usize },
    #[error("matrix is not unitary (residual {0:.3e})")]
    NotUnitary(f64),
    #[error("qubit index {index} out of range for {count} qubits")]
    QubitOutOfRange { index: usize, count: usize },
    #[error("duplicate target qubit {0}")]
    DuplicateTarget(usize),
    #[error("Kraus completeness violated (residual {0:.3e})")]
    IncompleteKraus(f64),
    #[error("state has support outside the measurement subspace (leakage {0:.3e})")]
    SupportLeakage(f64),
    #[error("probabilities sum to {0}, expected 1")]
    ProbabilityNotNormalized(f64),
    #[error("negative probability {0}")]
    NegativeProbability(f64),
    #[error("empty distribution")]
    EmptyDistribution,
    #[error("QFI must be positive (got {0})")]
    NonPositiveQfi(f64),
    #[error("trial count must be at least 1")]
    NoTrials,
    #[error("cascade size {0} out of supported range 2..=20")]
    CascadeSizeOutOfRange(usize),
    #[error("zero-probability parent entry at E = {0}")]
    ZeroParentProbability(f64),
    #[error("optical mode on unexpected port {0}")]
    UnknownPort(u8),
    #[error("success probability {0} must lie in (0, 1]")]
    InvalidSuccessProbability(f64),
    #[error("no counts recorded")]
    NoCounts,
    #[error("fringe fit needs at least {needed} records spanning a period (got {got})")]
    InsufficientRecords { needed: usize, got: usize },
    #[error("fringe fit did not converge (residual {0:.3e})")]
    FitDiverged(f64),
    #[error("need at least two estimates for error statistics")]
    TooFewEstimates,
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
