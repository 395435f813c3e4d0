//! Experiment configuration: JSON file plus command-line overrides.

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

/// All tunables of the experiment runner.  Every field has a
/// desk-scale default, so an empty config file (or none at all) is
/// valid; a JSON config may set any subset and the command-line flags
/// override the file.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    /// Inverse temperature for all work accounting.
    pub beta: f64,
    /// Seed list; the first entry is the global seed from which all
    /// per-point seeds are derived.
    pub seeds: Vec<u64>,
    /// Worker-pool size for sweeps; 0 uses all cores.
    pub threads: usize,
    /// Output directory for CSV/JSON artifacts.
    pub out_dir: String,

    /// Phase-diagram grid resolution in `p` (at most 200).
    pub grid_p: usize,
    /// Phase-diagram grid resolution in `r` (at most 200).
    pub grid_r: usize,
    /// Long-run simulation steps for the sampled strategy variants.
    pub sim_steps: usize,
    /// Burn-in steps discarded before averaging.
    pub sim_burn_in: usize,
    /// Thermal-swap count bounding the bath purity in the simulated
    /// variants.
    pub m_interactions: usize,

    /// Rate-comparison grid resolution per axis.
    pub tofe_grid: usize,
    /// Belief-grid resolution for the backward induction.
    pub belief_resolution: usize,
    /// Action-grid resolution for the backward induction.
    pub action_resolution: usize,
    /// Backward-induction horizon.
    pub horizon: usize,
    /// History length of the block-discrimination lower bound.
    pub history_length: usize,
    /// Ordering tolerance absorbing the combined grid error.
    pub tolerance: f64,

    /// Learning trials (independent hidden states).
    pub trials: usize,
    /// Rounds per learning trial (at most 100000).
    pub rounds: usize,
    /// Failure probability of the accuracy schedule.
    pub delta: f64,
    /// Constant `C` of the accuracy schedule.
    pub c: f64,
    /// Sub-blocks per bandit block.
    pub bandit_t: usize,
    /// Variance-proxy constant (the desk-scale default 1 is far below
    /// the theoretical floor).
    pub zeta: f64,
    /// Protocol repetitions per learning round; absent samples the
    /// quasi-static limit exactly.
    pub bandit_m: Option<usize>,

    /// Coin flip probabilities swept by the dissipation experiment.
    pub causal_p: Vec<f64>,
    /// Output overlap parameter of the swept processes.
    pub causal_r: f64,
    /// Horizon of the multi-time states (at most 4).
    pub causal_horizon: usize,
    /// Measurement-angle grid resolution.
    pub theta_resolution: usize,

    /// Coin flip probability for the belief-graph dump.
    pub msp_p: f64,
    /// Output overlap parameter for the belief-graph dump.
    pub msp_r: f64,
    /// Belief deduplication tolerance (L1).
    pub msp_dedup_tol: f64,
    /// Node budget of the belief-graph exploration.
    pub msp_max_nodes: usize,

    /// Random state pairs checked by the protocol self-test.
    pub check_pairs: usize,
    /// Monte-Carlo runs per pair.
    pub check_runs: usize,
    /// Thermal-swap count per simulated protocol.
    pub check_m: usize,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            beta: 1.0,
            seeds: vec![1],
            threads: 0,
            out_dir: "out".into(),
            grid_p: 25,
            grid_r: 25,
            sim_steps: 20_000,
            sim_burn_in: 1_000,
            m_interactions: 10_000,
            tofe_grid: 11,
            belief_resolution: 101,
            action_resolution: 180,
            horizon: 30,
            history_length: 8,
            tolerance: 5e-3,
            trials: 50,
            rounds: 3_000,
            delta: 0.1,
            c: 1.0,
            bandit_t: 5,
            zeta: 1.0,
            bandit_m: None,
            causal_p: vec![0.0, 0.5, 0.8],
            causal_r: 0.2,
            causal_horizon: 3,
            theta_resolution: 32,
            msp_p: 0.9,
            msp_r: 0.2,
            msp_dedup_tol: 5e-3,
            msp_max_nodes: 4096,
            check_pairs: 20,
            check_runs: 20_000,
            check_m: 1_000,
        }
    }
}

impl ExperimentConfig {
    /// Loads a config from a JSON file, or the defaults when `path` is
    /// `None`.
    pub fn load(path: Option<&str>) -> Result<Self, String> {
        match path {
            None => Ok(Self::default()),
            Some(p) => {
                let text = std::fs::read_to_string(p)
                    .map_err(|e| format!("cannot read config {p}: {e}"))?;
                serde_json::from_str(&text).map_err(|e| format!("invalid config {p}: {e}"))
            }
        }
    }

    /// Checks the invariants shared by all experiments.
    pub fn validate(&self) -> Result<(), String> {
        if self.seeds.is_empty() {
            return Err("seed list must be nonempty".into());
        }
        if !(self.beta > 0.0) {
            return Err(format!("beta must be positive, got {}", self.beta));
        }
        if self.grid_p < 2 || self.grid_p > 200 || self.grid_r < 2 || self.grid_r > 200 {
            return Err(format!(
                "phase-diagram grid {}x{} outside [2, 200] per axis",
                self.grid_p, self.grid_r
            ));
        }
        if self.tofe_grid < 2 || self.tofe_grid > 200 {
            return Err(format!("rate-comparison grid {} outside [2, 200]", self.tofe_grid));
        }
        if self.rounds > 100_000 {
            return Err(format!("learning horizon {} exceeds the 100000 guard", self.rounds));
        }
        if !(self.delta > 0.0 && self.delta < 1.0) {
            return Err(format!("delta must lie in (0, 1), got {}", self.delta));
        }
        Ok(())
    }

    /// Hex SHA-256 of the effective config's canonical JSON encoding;
    /// stamped into every artifact so outputs are traceable to their
    /// exact inputs.  The output directory and pool size are normalized
    /// out: they do not influence the computed numbers, so the same
    /// scientific config hashes identically wherever it is written.
    pub fn hash(&self) -> String {
        let mut canonical = self.clone();
        canonical.out_dir = String::new();
        canonical.threads = 0;
        let bytes = serde_json::to_vec(&canonical).expect("config serializes");
        let digest = Sha256::digest(&bytes);
        let mut hex = String::with_capacity(64);
        for b in digest {
            hex.push_str(&format!("{b:02x}"));
        }
        hex
    }
}
