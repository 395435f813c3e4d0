//! Simulation and numerical-optimization library for predictive work
//! extraction from quantum stochastic processes.
//!
//! The library is organized around a small set of building blocks:
//!
//! - [`qmath`] — small-dimension Hermitian linear algebra and
//!   information-theoretic functionals (relative entropy, von Neumann
//!   entropy, pinching, depolarizing, Bloch parametrization).
//! - [`processes`] — hidden Markov models that emit quantum states,
//!   including the perturbed-coin and 2-1 golden-mean processes, and
//!   exact multi-time joint states.
//! - [`extraction`] — tailored work-extraction protocols: exact work
//!   tables and distributions, finite-repetition Monte-Carlo realization,
//!   benchmark strategy variants, and energy accounting.
//! - [`belief`] — the agent's memory: Bayesian belief updates driven by
//!   work observations, belief-graph construction, and return-map
//!   analysis of the belief meta-dynamics.
//! - [`policy`] — decision making: the local-optimizing policy,
//!   backward-induction dynamic programming over a discretized belief
//!   space, induced Markov chains, and asymptotic work rates.
//! - [`bounds`] — reference quantities: Helstrom measurements, a
//!   free-energy-rate lower bound from block discrimination, causal
//!   dissipation of multi-time states, and the rate-hierarchy check.
//! - [`bandit`] — extract-while-learning: a linear-bandit pure-state
//!   learner with vanishing-variance weighting, dissipation accounting,
//!   a tomography-first baseline, a Jaynes-Cummings alternative, and
//!   Landauer costs.
//!
//! All energies are expressed in units of the inverse temperature
//! `1/beta`, with `beta` a runtime parameter defaulting to 1; work values
//! are reported in nats per `beta`.

/// Library version, stamped into exported artifacts.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

pub mod bandit;
pub mod belief;
pub mod bounds;
pub mod extraction;
pub mod policy;
pub mod processes;
pub mod qmath;
pub mod rng;

/// Library-wide error type.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// A matrix expected to be Hermitian deviates beyond tolerance.
    #[error("matrix is not Hermitian within tolerance: max asymmetry {0:.3e}")]
    NotHermitian(f64),
    /// A matrix fails the density-matrix invariants.
    #[error("not a valid density matrix: {0}")]
    NotDensityMatrix(String),
    /// A scalar argument is out of its documented range.
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    /// A set of vectors expected to be orthonormal is not.
    #[error("basis is not orthonormal within tolerance: max deviation {0:.3e}")]
    NotOrthonormal(f64),
    /// Matrix or vector dimensions do not match.
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    /// A Bayesian update was asked to condition on an outcome of
    /// (numerically) zero probability.
    #[error("impossible outcome {outcome}: normalizer {normalizer:.3e} below floor")]
    ImpossibleOutcome { outcome: usize, normalizer: f64 },
    /// The summed transition matrix is reducible; the payload lists the
    /// communicating classes found.
    #[error("transition matrix is reducible; communicating classes: {0:?}")]
    ReducibleChain(Vec<Vec<usize>>),
    /// A request would exceed a documented resource guard.
    #[error("resource limit exceeded: {0}")]
    ResourceLimit(String),
    /// Dynamic-programming actions did not stabilize at mid-horizon.
    #[error("policy actions not stabilized at mid-horizon; try a larger horizon (T = {0})")]
    NotStabilized(usize),
}

/// Convenience alias for results carrying [`Error`].
pub type Result<T> = std::result::Result<T, Error>;
