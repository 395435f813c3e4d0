//! Extract-while-learning: a linear-bandit pure-state learner with
//! vanishing-variance weighting, dissipation accounting, a
//! tomography-first baseline, a Jaynes-Cummings battery alternative, and
//! Landauer erasure costs.
//!
//! The agent receives sequential copies of an unknown pure qubit `psi`
//! and must extract work from each copy while simultaneously learning
//! the state.  In round `k` it picks a Bloch direction `psi_k`, runs a
//! tailored quasi-static protocol for the smoothed estimate
//! `rho_k = Delta_{2 eps_k}(psi_k)` (depolarizing smoothing keeps the
//! tailored eigenvalues bounded away from zero), and observes the
//! extracted work.  Because the two-point work distribution
//! `w_0 = beta^{-1}(ln 2 + ln(1 - eps_k))` versus
//! `w_1 = beta^{-1}(ln 2 + ln eps_k)` resolves the measurement of `psi`
//! in the `{psi_k, psi_k^perp}` basis, thresholding the work at the
//! midpoint `(w_0 + w_1)/2` yields a Bernoulli reward with success
//! probability `|<psi_k|psi>|^2` (exactly in the quasi-static limit, up
//! to an exponentially small error at finite repetition number).  The
//! per-round dissipation relative to the omniscient protocol is
//! `W_diss^(k) = beta^{-1} D(psi || rho_k)`.
//!
//! The learner is a phased linear bandit on the Bloch sphere: rewards
//! are linear in the unknown Bloch vector, `E[2r - 1] = a . theta`, and
//! the algorithm maintains a ridge design matrix whose per-block weights
//! shrink as confidence grows (vanishing-variance weighting), together
//! with a weighted median-of-means estimator that is robust to the
//! heteroscedastic rewards.

use crate::extraction::ProtocolSchedule;
use crate::qmath::{depolarize, state_from_bloch, DensityMatrix, Hamiltonian};
use crate::{Error, Result};
use nalgebra::{Matrix3, Vector3};
use rand::Rng;
use rand_distr::StandardNormal;
use std::f64::consts::LN_2;

/// Smallest admissible variance-proxy constant `zeta` for which the
/// concentration analysis of the weighted median-of-means estimator
/// holds: `334812 sqrt(2) + 1296 sqrt(6)`.
pub fn zeta_floor() -> f64 {
    334812.0 * std::f64::consts::SQRT_2 + 1296.0 * 6.0_f64.sqrt()
}

// ---------------------------------------------------------------------------
// Design matrix
// ---------------------------------------------------------------------------

/// Ridge-regularized design matrix `V_l` accumulating the measurement
/// directions, each block weighted by the inverse variance proxy.
///
/// `V_0 = lambda_0 * I` and
/// `V_l = V_{l-1} + sigma_l^{-2} sum_i a_{l,i} a_{l,i}^T`; the matrix is
/// symmetric positive definite by construction.
#[derive(Clone, Debug)]
pub struct DesignMatrix {
    v: Matrix3<f64>,
    /// Ridge parameter `lambda_0 > 0`.
    pub lambda0: f64,
}

impl DesignMatrix {
    /// Fresh design matrix `lambda_0 * I`.
    ///
    /// # Errors
    /// Returns [`Error::InvalidParameter`] unless `lambda_0 > 0`.
    pub fn new(lambda0: f64) -> Result<Self> {
        if !(lambda0 > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "ridge parameter must be positive, got {lambda0}"
            )));
        }
        Ok(Self { v: Matrix3::identity() * lambda0, lambda0 })
    }

    /// The accumulated matrix.
    pub fn matrix(&self) -> &Matrix3<f64> {
        &self.v
    }

    /// Adds one block of four directions with weight `1/sigma2`.
    fn accumulate(&mut self, sigma2: f64, actions: &[[f64; 3]; 4]) {
        for a in actions {
            let v = Vector3::new(a[0], a[1], a[2]);
            self.v += (v * v.transpose()) / sigma2;
        }
        // Positive definiteness is preserved by adding PSD rank-one
        // terms to a PD matrix; trap numerical degradation early.
        assert!(
            self.eigen().0[0] > 0.0,
            "design matrix lost positive definiteness"
        );
    }

    /// Eigenvalues (ascending) and matching unit eigenvectors.
    pub fn eigen(&self) -> ([f64; 3], [Vector3<f64>; 3]) {
        let se = self.v.symmetric_eigen();
        let mut idx = [0usize, 1, 2];
        idx.sort_by(|&a, &b| se.eigenvalues[a].total_cmp(&se.eigenvalues[b]));
        let vals = [
            se.eigenvalues[idx[0]],
            se.eigenvalues[idx[1]],
            se.eigenvalues[idx[2]],
        ];
        let vecs = [
            se.eigenvectors.column(idx[0]).into_owned(),
            se.eigenvectors.column(idx[1]).into_owned(),
            se.eigenvectors.column(idx[2]).into_owned(),
        ];
        (vals, vecs)
    }

    /// Weighted norm `||x||_V = sqrt(<x, V x>)`.
    pub fn weighted_norm(&self, x: &Vector3<f64>) -> f64 {
        x.dot(&(self.v * x)).max(0.0).sqrt()
    }
}

// ---------------------------------------------------------------------------
// Bandit state
// ---------------------------------------------------------------------------

/// State of the phased Bloch-sphere bandit.
///
/// Block `l` plays four unit directions `a_{l,i}`; each direction is
/// measured once per sub-block `j = 1..t`, so a block spends `4t`
/// rounds.  After the block the design matrix, the `t` per-sub-block
/// ridge estimators, the median-of-means direction estimate, the next
/// four actions, and the variance proxy are updated in that order.
#[derive(Clone, Debug)]
pub struct BanditState {
    /// Index `l` of the block whose actions are currently scheduled
    /// (1-based).
    pub block: usize,
    /// Current unit measurement directions `a_{l,1..4}`.
    pub actions: [[f64; 3]; 4],
    /// The same directions before normalization (the raw perturbed
    /// vectors); equal to `actions` for the initial block.
    pub raw_actions: [[f64; 3]; 4],
    /// Variance proxy `sigma_l^2` weighting the current block.
    pub sigma2: f64,
    /// Current normalized direction estimate (median-of-means).
    pub estimate: [f64; 3],
    /// Ridge estimators `theta_{l,j}` from the last completed block.
    pub last_estimators: Vec<[f64; 3]>,
    /// Sub-blocks per block.
    pub t: usize,
    /// Variance-proxy constant; the default is the smallest value
    /// covered by the concentration analysis (see [`zeta_floor`]).
    pub zeta: f64,
    design: DesignMatrix,
    /// Per-sub-block reward accumulators `b_j`.
    b: Vec<Vector3<f64>>,
}

/// Initializes the bandit: `V_0 = lambda_0 * I`, `sigma_1^2 = 1`, and
/// the four starting directions
/// `(±1/sqrt(2), 0, 1/sqrt(2))`, `(0, ±1/sqrt(2), 1/sqrt(2))`.
///
/// # Errors
/// Returns [`Error::InvalidParameter`] unless `lambda_0 > 0` and
/// `t >= 1`.
pub fn linucb_init(lambda0: f64, t: usize) -> Result<BanditState> {
    if t < 1 {
        return Err(Error::InvalidParameter("need at least one sub-block".into()));
    }
    let design = DesignMatrix::new(lambda0)?;
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let actions = [[s, 0.0, s], [-s, 0.0, s], [0.0, s, s], [0.0, -s, s]];
    Ok(BanditState {
        block: 1,
        actions,
        raw_actions: actions,
        sigma2: 1.0,
        estimate: [0.0, 0.0, 1.0],
        last_estimators: Vec::new(),
        t,
        zeta: zeta_floor(),
        design,
        b: vec![Vector3::zeros(); t],
    })
}

impl BanditState {
    /// Switches to the desk-scale variance constant `zeta = 1`.
    ///
    /// This is far below the smallest constant covered by the
    /// concentration analysis, so the high-probability guarantees do
    /// not apply; empirically the scaling is unchanged.
    pub fn with_practical_zeta(mut self) -> Self {
        self.zeta = 1.0;
        self
    }

    /// The accumulated design matrix.
    pub fn design(&self) -> &DesignMatrix {
        &self.design
    }
}

/// Consumes the `4t` rewards of one block (`rewards[j][i]` for
/// sub-block `j` and direction `i`, each 0 or 1) and advances the
/// bandit by one block.
///
/// The five updates run in order: design matrix, per-sub-block ridge
/// estimators, median-of-means selection, action update, variance
/// proxy.  The new raw actions are
/// `theta - (-1)^i lambda_min(V_l)^{-1/2} v_{ceil(i/2)}` with `v_1,
/// v_2` the eigenvectors of the two smallest eigenvalues of `V_l`:
/// the estimate is perturbed along the least-explored directions.
///
/// # Errors
/// Returns [`Error::InvalidParameter`] if the reward block does not
/// have `t` rows of four binary entries.
pub fn linucb_block(state: &mut BanditState, rewards: &[[u8; 4]]) -> Result<()> {
    if rewards.len() != state.t {
        return Err(Error::InvalidParameter(format!(
            "expected {} reward rows, got {}",
            state.t,
            rewards.len()
        )));
    }
    if rewards.iter().flatten().any(|&r| r > 1) {
        return Err(Error::InvalidParameter("rewards must be 0 or 1".into()));
    }

    // 1. Design update with the current block's weight and directions.
    state.design.accumulate(state.sigma2, &state.actions);

    // 2. Reward accumulators and ridge estimators.
    for (j, row) in rewards.iter().enumerate() {
        for (i, &r) in row.iter().enumerate() {
            let a = state.actions[i];
            let signed = 2.0 * f64::from(r) - 1.0;
            state.b[j] += Vector3::new(a[0], a[1], a[2]) * (signed / state.sigma2);
        }
    }
    let vinv = state
        .design
        .matrix()
        .try_inverse()
        .expect("positive definite design matrix is invertible");
    let estimators: Vec<Vector3<f64>> = state.b.iter().map(|b| vinv * b).collect();
    state.last_estimators = estimators.iter().map(|e| [e[0], e[1], e[2]]).collect();

    // 3. Median-of-means selection in the V_l-weighted norm: pick the
    //    estimator with the smallest median distance to its peers.
    let j_star = select_median_of_means(&state.design, &estimators);
    let chosen = estimators[j_star];
    let norm = chosen.norm();
    if norm > 1e-15 {
        // A zero estimator carries no direction; keep the previous
        // estimate in that (measure-zero) case.
        let u = chosen / norm;
        state.estimate = [u[0], u[1], u[2]];
    }

    // 4. Action update from the spectrum of V_l.
    let (vals, vecs) = state.design.eigen();
    let scale = vals[0].sqrt().recip();
    let theta = Vector3::new(state.estimate[0], state.estimate[1], state.estimate[2]);
    for i in 1..=4usize {
        let pert = vecs[(i + 1) / 2 - 1] * scale;
        let sign = if i % 2 == 1 { 1.0 } else { -1.0 };
        let raw = theta + pert * sign;
        state.raw_actions[i - 1] = [raw[0], raw[1], raw[2]];
        let n = raw.norm();
        let unit = if n > 1e-12 { raw / n } else { vecs[(i + 1) / 2 - 1] * sign };
        state.actions[i - 1] = [unit[0], unit[1], unit[2]];
    }

    // 5. Variance proxy for the next block.
    state.sigma2 = 2.0 * state.zeta / vals[2].sqrt();
    state.block += 1;
    Ok(())
}

/// Index of the estimator with the smallest (lower) median
/// `V`-weighted distance to the other estimators.  With a single
/// estimator the median is over an empty set and the estimator is
/// returned unchanged.  Ties in the median are broken by the
/// lexicographically smallest estimator so the selected *value* depends
/// only on the multiset of estimators, not on their order.
fn select_median_of_means(design: &DesignMatrix, estimators: &[Vector3<f64>]) -> usize {
    let t = estimators.len();
    if t == 1 {
        return 0;
    }
    let medians: Vec<f64> = estimators
        .iter()
        .enumerate()
        .map(|(j, th)| {
            let mut dists: Vec<f64> = estimators
                .iter()
                .enumerate()
                .filter(|&(jp, _)| jp != j)
                .map(|(_, other)| design.weighted_norm(&(th - other)))
                .collect();
            dists.sort_by(f64::total_cmp);
            dists[(dists.len() - 1) / 2]
        })
        .collect();
    let min = medians.iter().copied().fold(f64::INFINITY, f64::min);
    let tol = 1e-12 * (1.0 + min.abs());
    (0..t)
        .filter(|&j| medians[j] - min <= tol)
        .min_by(|&a, &b| {
            let (x, y) = (estimators[a], estimators[b]);
            (x[0], x[1], x[2]).partial_cmp(&(y[0], y[1], y[2])).expect("finite estimators")
        })
        .expect("at least one estimator attains the minimum")
}

// ---------------------------------------------------------------------------
// The hidden state, behind an oracle boundary
// ---------------------------------------------------------------------------

/// The unknown pure qubit, held behind an oracle boundary: learner code
/// can request reward samples and extraction rounds but never read the
/// state, enforcing the learning contract structurally.  Infidelity and
/// dissipation in the returned [`RoundOutcome`] are environment-side
/// bookkeeping for the trace, not learner inputs.
#[derive(Clone, Debug)]
pub struct StateOracle {
    bloch: [f64; 3],
}

/// Environment-side record of one extraction round.
#[derive(Clone, Copy, Debug)]
pub struct RoundOutcome {
    /// Thresholded reward bit.
    pub reward: u8,
    /// Extracted work in nats per `beta`.
    pub work: f64,
    /// Infidelity `1 - |<psi_k|psi>|^2` of the requested direction.
    pub infidelity: f64,
    /// Dissipation `beta^{-1} D(psi || Delta_{2 eps}(psi_k))`.
    pub w_diss: f64,
}

impl StateOracle {
    /// Wraps a pure state given by a unit Bloch vector.
    ///
    /// # Errors
    /// Returns [`Error::InvalidParameter`] if the vector is not unit
    /// length within `1e-6` (it is renormalized exactly).
    pub fn new_pure(bloch: [f64; 3]) -> Result<Self> {
        let n = (bloch[0] * bloch[0] + bloch[1] * bloch[1] + bloch[2] * bloch[2]).sqrt();
        if (n - 1.0).abs() > 1e-6 {
            return Err(Error::InvalidParameter(format!(
                "pure-state Bloch vector must be unit length, got norm {n:.6}"
            )));
        }
        Ok(Self { bloch: [bloch[0] / n, bloch[1] / n, bloch[2] / n] })
    }

    /// Haar-random pure qubit: two standard complex Gaussian amplitudes
    /// normalized to a unit vector.
    pub fn haar(rng: &mut impl Rng) -> Self {
        Self { bloch: haar_bloch(rng) }
    }

    /// Squared overlap of the hidden state with the pure state in
    /// Bloch direction `dir`.
    fn fidelity_direction(&self, dir: &[f64; 3]) -> f64 {
        let dot =
            self.bloch[0] * dir[0] + self.bloch[1] * dir[1] + self.bloch[2] * dir[2];
        (0.5 * (1.0 + dot)).clamp(0.0, 1.0)
    }

    /// One projective measurement of the hidden state along `dir`
    /// (Born rule); returns 1 for the `+dir` outcome.
    pub fn measure(&self, dir: &[f64; 3], rng: &mut impl Rng) -> u8 {
        u8::from(rng.gen::<f64>() < self.fidelity_direction(dir))
    }

    /// One extraction round tailored to `Delta_{2 eps}` of the pure
    /// state in direction `dir`.
    ///
    /// With `m = None` the quasi-static two-point limit is sampled
    /// exactly: work `w_0 = beta^{-1}(ln 2 + ln(1 - eps))` with
    /// probability `|<psi_k|psi>|^2`, else `w_1 = beta^{-1}(ln 2 +
    /// ln eps)`.  With `m = Some(reps)` the finite-repetition protocol
    /// is simulated and the reward is the midpoint threshold
    /// `work >= (w_0 + w_1)/2`, wrong with probability exponentially
    /// small in `reps`.
    ///
    /// # Errors
    /// Returns [`Error::InvalidParameter`] for `eps` outside `(0, 1/2]`
    /// or non-positive `beta`, and propagates protocol-construction
    /// errors in the finite-repetition branch.
    pub fn extraction_round(
        &self,
        dir: &[f64; 3],
        eps: f64,
        m: Option<usize>,
        beta: f64,
        rng: &mut impl Rng,
    ) -> Result<RoundOutcome> {
        if !(eps > 0.0 && eps <= 0.5) {
            return Err(Error::InvalidParameter(format!(
                "smoothing accuracy must lie in (0, 1/2], got {eps}"
            )));
        }
        if !(beta > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "inverse temperature must be positive, got {beta}"
            )));
        }
        let fid = self.fidelity_direction(dir);
        let w0 = (LN_2 + (1.0 - eps).ln()) / beta;
        let w1 = (LN_2 + eps.ln()) / beta;
        let w_diss = -(fid * (1.0 - eps).ln() + (1.0 - fid) * eps.ln()) / beta;
        let (work, reward) = match m {
            None => {
                if rng.gen::<f64>() < fid {
                    (w0, 1)
                } else {
                    (w1, 0)
                }
            }
            Some(reps) => {
                let target = depolarize(&pure_from_bloch(dir)?, 2.0 * eps)?;
                let schedule =
                    ProtocolSchedule::new(&target, &Hamiltonian::degenerate(2, 0.0), beta, reps)?;
                let sigma = pure_from_bloch(&self.bloch)?;
                let p0 = schedule.start_probability(&sigma);
                let w = schedule.sample_work(p0, rng);
                (w, u8::from(w >= 0.5 * (w0 + w1)))
            }
        };
        Ok(RoundOutcome { reward, work, infidelity: 1.0 - fid, w_diss })
    }
}

/// Bloch vector of a Haar-random pure qubit: two standard complex
/// Gaussian amplitudes normalized to a unit vector.
pub fn haar_bloch(rng: &mut impl Rng) -> [f64; 3] {
    loop {
        let g: [f64; 4] = [
            rng.sample(StandardNormal),
            rng.sample(StandardNormal),
            rng.sample(StandardNormal),
            rng.sample(StandardNormal),
        ];
        let n2: f64 = g.iter().map(|x| x * x).sum();
        if n2 < 1e-12 {
            continue;
        }
        // |psi> = (a, b) with a = g0 + i g1, b = g2 + i g3.
        let x = 2.0 * (g[0] * g[2] + g[1] * g[3]) / n2;
        let y = 2.0 * (g[0] * g[3] - g[1] * g[2]) / n2;
        let z = (g[0] * g[0] + g[1] * g[1] - g[2] * g[2] - g[3] * g[3]) / n2;
        return [x, y, z];
    }
}

/// Pure density matrix from a unit Bloch vector (clipping rounding
/// overshoot).
fn pure_from_bloch(v: &[f64; 3]) -> Result<DensityMatrix> {
    let n = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt().max(1.0);
    state_from_bloch([v[0] / n, v[1] / n, v[2] / n])
}

// ---------------------------------------------------------------------------
// Dissipation traces
// ---------------------------------------------------------------------------

/// One row of a dissipation trace.
#[derive(Clone, Copy, Debug)]
pub struct TraceRow {
    /// Round index `k` (1-based).
    pub k: usize,
    /// Smoothing accuracy `eps_k` used in this round.
    pub epsilon: f64,
    /// Infidelity of the direction played in this round.
    pub infidelity: f64,
    /// Reward bit fed back to the learner.
    pub reward: u8,
    /// Per-round dissipation in nats per `beta`.
    pub w_diss: f64,
    /// Running cumulative dissipation.
    pub w_diss_cum: f64,
}

/// Per-round record of an extract-while-learning run.
#[derive(Clone, Debug)]
pub struct DissipationTrace {
    /// One row per round, in play order.
    pub rows: Vec<TraceRow>,
    /// Inverse temperature used for the work accounting.
    pub beta: f64,
}

impl DissipationTrace {
    /// Total dissipation over the trace.
    pub fn cumulative(&self) -> f64 {
        self.rows.last().map_or(0.0, |r| r.w_diss_cum)
    }

    /// Running cumulative regret: per-round regret is the infidelity of
    /// the direction played (the shortfall of the Born success
    /// probability from 1), so each increment lies in `[0, 1]`.
    pub fn cumulative_regret(&self) -> Vec<f64> {
        let mut acc = 0.0;
        self.rows
            .iter()
            .map(|r| {
                acc += r.infidelity;
                acc
            })
            .collect()
    }
}

// ---------------------------------------------------------------------------
// Extract while learning
// ---------------------------------------------------------------------------

/// Tunables for [`extract_while_learning`].
#[derive(Clone, Debug)]
pub struct ExtractOptions {
    /// Failure probability `delta` in the accuracy schedule and the
    /// theoretical sub-block count.
    pub delta: f64,
    /// Constant `C` in the accuracy schedule
    /// `eps_k = min(C ln(N/delta)/k, 1/2)`.
    pub c: f64,
    /// Protocol repetitions per round; `None` samples the quasi-static
    /// two-point limit exactly.
    pub m: Option<usize>,
    /// Sub-blocks per bandit block; `None` uses the theoretical
    /// `ceil(24 ln(L/delta))` (self-consistently in `L = N/(4t)`),
    /// `Some(t)` the desk-scale override (the guarantees assume the
    /// theoretical value; empirically `t = 5` shows the same scaling).
    pub t: Option<usize>,
    /// Variance-proxy constant; `None` uses the theoretical floor
    /// [`zeta_floor`], `Some(z)` overrides it (values below the floor
    /// void the concentration guarantee).
    pub zeta: Option<f64>,
    /// Ridge parameter of the design matrix.
    pub lambda0: f64,
    /// Inverse temperature.
    pub beta: f64,
}

impl Default for ExtractOptions {
    /// Desk-scale defaults: exact quasi-static sampling, `t = 5`,
    /// `zeta = 1` (both trade the formal guarantee constants for
    /// speed), `C = 1`, `delta = 0.1`, `beta = 1`.
    fn default() -> Self {
        Self { delta: 0.1, c: 1.0, m: None, t: Some(5), zeta: Some(1.0), lambda0: 1.0, beta: 1.0 }
    }
}

/// Theoretical sub-block count: the smallest `t` with
/// `t >= 24 ln(N/(4t)/delta)` (the fixpoint of `t = ceil(24 ln(L/delta))`
/// under `N = 4 t L`).
///
/// # Errors
/// Returns [`Error::InvalidParameter`] if no valid `t` with at least
/// one block exists.
pub fn theoretical_t(n: usize, delta: f64) -> Result<usize> {
    let mut t = 1usize;
    for _ in 0..64 {
        let l = n as f64 / (4.0 * t as f64);
        if l < 1.0 {
            return Err(Error::InvalidParameter(format!(
                "horizon {n} too short for the theoretical sub-block count"
            )));
        }
        let next = (24.0 * (l / delta).ln()).ceil().max(1.0) as usize;
        if next == t {
            return Ok(t);
        }
        t = next;
    }
    Ok(t)
}

/// Runs the extract-while-learning loop for `n` rounds against the
/// hidden state and returns the dissipation trace.
///
/// Round `k = 4t(l-1) + 4(j-1) + i` plays bandit direction `a_{l,i}`
/// with accuracy `eps_k = min(C ln(N/delta)/k, 1/2)`; the thresholded
/// work reward is fed back to the bandit after each block of `4t`
/// rounds.
///
/// # Errors
/// Returns [`Error::InvalidParameter`] unless `delta` lies in `(0,1)`,
/// `C > 0`, and `n` is a positive multiple of `4t`.
pub fn extract_while_learning(
    oracle: &StateOracle,
    n: usize,
    opts: &ExtractOptions,
    rng: &mut impl Rng,
) -> Result<DissipationTrace> {
    if !(opts.delta > 0.0 && opts.delta < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "failure probability must lie in (0, 1), got {}",
            opts.delta
        )));
    }
    if !(opts.c > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "accuracy constant must be positive, got {}",
            opts.c
        )));
    }
    let t = match opts.t {
        Some(t) if t >= 1 => t,
        Some(_) => return Err(Error::InvalidParameter("need at least one sub-block".into())),
        None => theoretical_t(n, opts.delta)?,
    };
    if n == 0 || n % (4 * t) != 0 {
        return Err(Error::InvalidParameter(format!(
            "horizon {n} must be a positive multiple of the block length {}",
            4 * t
        )));
    }
    let blocks = n / (4 * t);
    let mut state = linucb_init(opts.lambda0, t)?;
    if let Some(z) = opts.zeta {
        if !(z > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "variance constant must be positive, got {z}"
            )));
        }
        state.zeta = z;
    }
    let log_term = (n as f64 / opts.delta).ln();
    let mut rows = Vec::with_capacity(n);
    let mut cum = 0.0;
    for l in 0..blocks {
        let mut rewards = vec![[0u8; 4]; t];
        for j in 0..t {
            for i in 0..4 {
                let k = 4 * t * l + 4 * j + i + 1;
                let eps = (opts.c * log_term / k as f64).min(0.5);
                let out = state.actions[i];
                let round = oracle.extraction_round(&out, eps, opts.m, opts.beta, rng)?;
                rewards[j][i] = round.reward;
                cum += round.w_diss;
                rows.push(TraceRow {
                    k,
                    epsilon: eps,
                    infidelity: round.infidelity,
                    reward: round.reward,
                    w_diss: round.w_diss,
                    w_diss_cum: cum,
                });
            }
        }
        linucb_block(&mut state, &rewards)?;
    }
    Ok(DissipationTrace { rows, beta: opts.beta })
}

// ---------------------------------------------------------------------------
// Tomography-first baseline
// ---------------------------------------------------------------------------

/// Learn-then-extract baseline: spends `ceil(sqrt(n))` rounds on fixed
/// Pauli (mutually unbiased) measurements, builds a linear-inversion
/// Bloch estimate clipped to the unit ball, then extracts from the
/// remaining rounds with the frozen estimate.
///
/// Every measured copy is fully dissipated (`beta^{-1} D(psi || I/2) =
/// beta^{-1} ln 2`); the extraction rounds use the smoothing accuracy
/// implied by the estimate's statistical error, so the total
/// dissipation scales as `Theta(sqrt(n))` — the floor this baseline
/// cannot beat for any split fraction.
///
/// # Errors
/// Returns [`Error::InvalidParameter`] for `n < 4` or `beta <= 0`.
pub fn tomography_first(
    oracle: &StateOracle,
    n: usize,
    beta: f64,
    rng: &mut impl Rng,
) -> Result<DissipationTrace> {
    if n < 4 {
        return Err(Error::InvalidParameter(format!(
            "tomography baseline needs at least 4 rounds, got {n}"
        )));
    }
    tomography_first_with_split(oracle, n, (n as f64).sqrt().ceil() as usize, beta, rng)
}

/// [`tomography_first`] with an explicit number of tomography rounds
/// (at most `n`); exposed for split-fraction studies.  With
/// `tomo_rounds = n` everything is measured and the dissipation is
/// exactly `n * beta^{-1} ln 2`.
///
/// # Errors
/// Returns [`Error::InvalidParameter`] for `tomo_rounds` outside
/// `[1, n]` or `beta <= 0`.
pub fn tomography_first_with_split(
    oracle: &StateOracle,
    n: usize,
    tomo_rounds: usize,
    beta: f64,
    rng: &mut impl Rng,
) -> Result<DissipationTrace> {
    if !(beta > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "inverse temperature must be positive, got {beta}"
        )));
    }
    if tomo_rounds == 0 || tomo_rounds > n {
        return Err(Error::InvalidParameter(format!(
            "tomography rounds {tomo_rounds} must lie in [1, {n}]"
        )));
    }
    let axes = [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]];
    let mut sums = [0.0f64; 3];
    let mut counts = [0usize; 3];
    let mut rows = Vec::with_capacity(n);
    let mut cum = 0.0;
    for k in 1..=tomo_rounds {
        let axis = (k - 1) % 3;
        let r = oracle.measure(&axes[axis], rng);
        sums[axis] += 2.0 * f64::from(r) - 1.0;
        counts[axis] += 1;
        // A measured copy is discarded into the bath: full dissipation
        // relative to the omniscient protocol.
        cum += LN_2 / beta;
        rows.push(TraceRow {
            k,
            epsilon: 0.5,
            infidelity: 1.0 - oracle.fidelity_direction(&axes[axis]),
            reward: r,
            w_diss: LN_2 / beta,
            w_diss_cum: cum,
        });
    }
    // Linear inversion with clipping to the Bloch ball.
    let mut est = [0.0f64; 3];
    for a in 0..3 {
        if counts[a] > 0 {
            est[a] = sums[a] / counts[a] as f64;
        }
    }
    let norm = (est[0] * est[0] + est[1] * est[1] + est[2] * est[2]).sqrt();
    let dir = if norm > 1e-12 {
        [est[0] / norm, est[1] / norm, est[2] / norm]
    } else {
        [0.0, 0.0, 1.0]
    };
    // Statistical error of the Bloch estimate: each component is a mean
    // of ~tomo/3 signs with variance <= 1, so the squared direction
    // error — and hence the infidelity — is of order 3/tomo.
    let eps_hat = (3.0 / tomo_rounds as f64).min(0.5);
    for k in tomo_rounds + 1..=n {
        let round = oracle.extraction_round(&dir, eps_hat, None, beta, rng)?;
        cum += round.w_diss;
        rows.push(TraceRow {
            k,
            epsilon: eps_hat,
            infidelity: round.infidelity,
            reward: round.reward,
            w_diss: round.w_diss,
            w_diss_cum: cum,
        });
    }
    Ok(DissipationTrace { rows, beta })
}

// ---------------------------------------------------------------------------
// Jaynes-Cummings battery
// ---------------------------------------------------------------------------

/// Outcome of one Jaynes-Cummings battery round.
#[derive(Clone, Copy, Debug)]
pub struct JcOutcome {
    /// Battery quanta after the round.
    pub n_next: u64,
    /// 1 iff the battery gained a quantum.
    pub reward: u8,
    /// Energy change `omega * (n_next - n_k)` of the battery.
    pub work: f64,
    /// Infidelity of the played direction (environment-side
    /// bookkeeping).
    pub infidelity: f64,
}

/// One round of the resonant Jaynes-Cummings extraction protocol: the
/// hidden state is coupled to a bosonic battery at `n_k` quanta through
/// the direction `psi_k`.
///
/// The battery moves to `n_k + 1` with probability `F = |<psi_k|psi>|^2`,
/// stays with probability `(1-F) cos^2(theta_k)`, and drops to
/// `n_k - 1` with probability `(1-F) sin^2(theta_k)`, where
/// `theta_k = (pi/2) sqrt(n_k/(n_k+1))` is the residual Rabi angle of
/// the orthogonal component (at `n_k = 0` the downward branch has
/// exactly zero weight).  The expected work is
/// `omega (F (1 + sin^2 theta_k) - sin^2 theta_k)`, so the per-round
/// dissipation relative to the aligned protocol is
/// `omega (1 - F)(1 + sin^2 theta_k) <= 2 omega (1 - F)` — the
/// cumulative dissipation is bounded by `2 omega` times the regret.
///
/// # Errors
/// Returns [`Error::InvalidParameter`] for `omega <= 0`.
pub fn jc_round(
    oracle: &StateOracle,
    psi_k: &[f64; 3],
    n_k: u64,
    omega: f64,
    rng: &mut impl Rng,
) -> Result<JcOutcome> {
    if !(omega > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "battery quantum must be positive, got {omega}"
        )));
    }
    let fid = oracle.fidelity_direction(psi_k);
    let theta = std::f64::consts::FRAC_PI_2 * (n_k as f64 / (n_k as f64 + 1.0)).sqrt();
    let p_up = fid;
    let p_stay = (1.0 - fid) * theta.cos().powi(2);
    let p_down = (1.0 - fid) * theta.sin().powi(2);
    debug_assert!((p_up + p_stay + p_down - 1.0).abs() < 1e-12);
    let u = rng.gen::<f64>();
    let (n_next, reward) = if u < p_up {
        (n_k + 1, 1)
    } else if u < p_up + p_stay {
        (n_k, 0)
    } else {
        debug_assert!(n_k > 0, "downward branch has zero weight at n_k = 0");
        (n_k - 1, 0)
    };
    Ok(JcOutcome {
        n_next,
        reward,
        work: omega * (n_next as f64 - n_k as f64),
        infidelity: 1.0 - fid,
    })
}

// ---------------------------------------------------------------------------
// Landauer erasure costs
// ---------------------------------------------------------------------------

/// Which battery model's register-entropy bound to charge.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BatteryModel {
    /// Semi-classical (quasi-static thermal) battery:
    /// `Delta S_k <= eps_k - eps_k ln eps_k`.
    SemiClassical,
    /// Jaynes-Cummings battery, whose three-outcome register carries an
    /// extra binary entropy: `Delta S_k <= 2 eps_k - eps_k ln eps_k`.
    JaynesCummings,
}

/// Cumulative Landauer bound (in nats) on the entropy accumulated in
/// the reward register over a trace; erasing the register to recycle it
/// costs at least `beta^{-1}` times this on top of the recorded
/// dissipation.
///
/// Rows with `eps_k <= 0` contribute nothing.  Under the schedule
/// `eps_k = min(C ln(N/delta)/k, 1/2)` the sum grows as `O((ln N)^3)`.
pub fn landauer_cost(trace: &DissipationTrace, model: BatteryModel) -> f64 {
    trace
        .rows
        .iter()
        .map(|r| {
            let e = r.epsilon;
            if e <= 0.0 {
                return 0.0;
            }
            let base = match model {
                BatteryModel::SemiClassical => e,
                BatteryModel::JaynesCummings => 2.0 * e,
            };
            base - e * e.ln()
        })
        .sum()
}

/// Bound `D(rho || Delta_{2 eps}(rho_hat)) <= 16 eps (2 + ln(d/(2 eps)))`
/// for states at infidelity at most `eps <= 1/2`; exposed so sweeps can
/// assert it against the exact relative entropy.
pub fn smoothed_relative_entropy_bound(eps: f64, dim: usize) -> f64 {
    16.0 * eps * (2.0 + (dim as f64 / (2.0 * eps)).ln())
}

// ---------------------------------------------------------------------------
