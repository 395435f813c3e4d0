//! Decision making over the belief space.
//!
//! An action is the choice of eigenbasis for the tailored state; the
//! optimal spectrum on a fixed basis is the pinched expected state, so
//! the per-step reward of an action `a` at belief `eta` is
//!
//! ```text
//! r(eta, a) = [D(xi_eta || gamma) - D(xi_eta || rho^(a))] / beta
//! ```
//!
//! The search space reduces to a single angle `theta` in the plane `P`
//! spanned by the Bloch vectors of the two output states. The module
//! provides the local-optimizing (LO) policy, finite-horizon backward
//! induction over a discretized belief space, the induced Markov chain
//! of a stationary policy over recurrent beliefs, and asymptotic work
//! rates (the time-ordered optimal rate being the one under the
//! stabilized mid-horizon rows of the dynamic program).

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;

use crate::belief::{belief_update_work, expected_state, BeliefGraph, BeliefState, MspOptions};
use crate::extraction::{ideal_work_table, WorkTable};
use crate::processes::QuantumHmm;
use crate::qmath::{
    bloch_vector, bloch_vector_state, gibbs_state, pinch, relative_entropy, DensityMatrix,
    Hamiltonian,
};
use crate::{Error, Result};

/// Outcome probabilities below this are dropped from DP expectations.
const PROB_FLOOR: f64 = 1e-12;

/// Orthonormal frame of the plane `P` containing the output Bloch
/// vectors.
#[derive(Debug, Clone, Copy)]
pub struct PlaneBasis {
    /// First frame vector (direction of the first output).
    pub u: [f64; 3],
    /// Second frame vector, orthogonal to `u` in `P`.
    pub v: [f64; 3],
}

fn norm3(a: [f64; 3]) -> f64 {
    (a[0] * a[0] + a[1] * a[1] + a[2] * a[2]).sqrt()
}

fn dot3(a: [f64; 3], b: [f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

impl PlaneBasis {
    /// Bloch direction at angle `theta` measured from `u` toward `v`.
    pub fn direction(&self, theta: f64) -> [f64; 3] {
        let (s, c) = theta.sin_cos();
        [
            c * self.u[0] + s * self.v[0],
            c * self.u[1] + s * self.v[1],
            c * self.u[2] + s * self.v[2],
        ]
    }

    /// Orthonormal qubit basis `{|psi_theta>, |psi_theta + pi>}`.
    pub fn basis_states(&self, theta: f64) -> [Vec<C64>; 2] {
        let state = |n: [f64; 3]| {
            let polar = n[2].clamp(-1.0, 1.0).acos();
            let azimuth = n[1].atan2(n[0]);
            bloch_vector_state(polar, azimuth)
        };
        let n = self.direction(theta);
        [state(n), state([-n[0], -n[1], -n[2]])]
    }

    /// Angle of an in-plane Bloch direction.
    pub fn angle_of(&self, n: [f64; 3]) -> f64 {
        dot3(n, self.v).atan2(dot3(n, self.u))
    }
}

/// Computes the plane frame from the two output states of a process.
///
/// When the outputs are (anti)collinear on the Bloch sphere the plane is
/// underdetermined and the XZ plane is chosen canonically.
pub fn plane_basis(hmm: &QuantumHmm) -> Result<PlaneBasis> {
    if hmm.output_dim() != 2 {
        return Err(Error::DimensionMismatch("plane-P actions require qubit outputs".into()));
    }
    let b0 = bloch_vector(hmm.output(0))?;
    let b1 = bloch_vector(hmm.output(1))?;
    let (first, second) = if norm3(b0) > 1e-9 { (b0, b1) } else { (b1, b0) };
    let u = if norm3(first) > 1e-9 {
        let n = norm3(first);
        [first[0] / n, first[1] / n, first[2] / n]
    } else {
        [0.0, 0.0, 1.0]
    };
    let mut w = [
        second[0] - dot3(second, u) * u[0],
        second[1] - dot3(second, u) * u[1],
        second[2] - dot3(second, u) * u[2],
    ];
    if norm3(w) < 1e-9 {
        // Collinear outputs: complete within the XZ plane.
        let seed = if u[0].abs() < 0.9 { [1.0, 0.0, 0.0] } else { [0.0, 0.0, 1.0] };
        w = [
            seed[0] - dot3(seed, u) * u[0],
            seed[1] - dot3(seed, u) * u[1],
            seed[2] - dot3(seed, u) * u[2],
        ];
    }
    let n = norm3(w);
    Ok(PlaneBasis { u, v: [w[0] / n, w[1] / n, w[2] / n] })
}

/// Uniform grid of basis angles in `[0, 2 pi)`.
#[derive(Debug, Clone)]
pub struct ActionGrid {
    /// The angles.
    pub thetas: Vec<f64>,
}

impl ActionGrid {
    /// `resolution` uniformly spaced angles.
    pub fn uniform(resolution: usize) -> Self {
        let thetas = (0..resolution)
            .map(|k| std::f64::consts::TAU * k as f64 / resolution as f64)
            .collect();
        Self { thetas }
    }
}

/// Uniform two-state belief grid `(1/2 + eps, 1/2 - eps)` over
/// `eps in [-1/2, 1/2]`.
pub fn belief_grid_coin(resolution: usize) -> Vec<BeliefState> {
    (0..resolution)
        .map(|k| {
            let eps = -0.5 + k as f64 / (resolution - 1) as f64;
            BeliefState::from_epsilon(eps)
        })
        .collect()
}

/// The local-optimizing action: tailor to the expected state itself,
/// zeroing the immediate dissipation term.
pub fn lo_action(eta: &BeliefState, hmm: &QuantumHmm) -> DensityMatrix {
    expected_state(eta, hmm).state
}

/// Angle of the local-optimizing eigenbasis in the plane frame (0 when
/// the expected state is maximally mixed and every basis is optimal).
pub fn lo_theta(eta: &BeliefState, hmm: &QuantumHmm, plane: &PlaneBasis) -> Result<f64> {
    let xi = expected_state(eta, hmm).state;
    let b = bloch_vector(&xi)?;
    if norm3(b) < 1e-12 {
        return Ok(0.0);
    }
    Ok(plane.angle_of(b))
}

/// The optimal spectrum on a fixed eigenbasis: `rho* = sum_i
/// <psi_i|xi|psi_i> |psi_i><psi_i|`, which minimizes `D(xi || rho)` over
/// all states diagonal in that basis.
pub fn optimal_eigenvalues(basis: &[Vec<C64>], xi: &DensityMatrix) -> Result<DensityMatrix> {
    pinch(xi, basis)
}

/// Per-step reward of action `theta` at belief `eta`:
/// `[D(xi_eta || gamma) - D(xi_eta || rho^(theta))] / beta` with the
/// optimal spectrum on the chosen basis.
pub fn reward(eta: &BeliefState, theta: f64, hmm: &QuantumHmm, beta: f64) -> Result<f64> {
    let plane = plane_basis(hmm)?;
    reward_in_plane(eta, theta, hmm, &plane, beta)
}

/// [`reward`] with a precomputed plane frame.
pub fn reward_in_plane(
    eta: &BeliefState,
    theta: f64,
    hmm: &QuantumHmm,
    plane: &PlaneBasis,
    beta: f64,
) -> Result<f64> {
    let xi = expected_state(eta, hmm).state;
    let basis = plane.basis_states(theta);
    let rho = optimal_eigenvalues(&basis, &xi)?;
    let h = Hamiltonian::degenerate(hmm.output_dim(), 0.0);
    let gamma = gibbs_state(&h, beta)?.state;
    Ok((relative_entropy(&xi, &gamma) - relative_entropy(&xi, &rho)) / beta)
}

/// Result of finite-horizon backward induction over a belief grid.
#[derive(Debug, Clone)]
pub struct PolicyTable {
    /// Horizon `T`.
    pub horizon: usize,
    /// The belief grid.
    pub belief_grid: Vec<BeliefState>,
    /// The action angles.
    pub thetas: Vec<f64>,
    /// `actions[t - 1][i]` is the optimal action index at time `t` for
    /// grid belief `i`.
    pub actions: Vec<Vec<usize>>,
    /// `values[t - 1][i] = V_t(eta_i)`; an extra all-zero row encodes
    /// `V_{T+1} = 0`.
    pub values: Vec<Vec<f64>>,
    /// Number of successor beliefs whose snap distance exceeded the grid
    /// spacing (the dominant discretization error).
    pub snap_warnings: usize,
    /// Largest successor snap distance observed (L1).
    pub max_snap_distance: f64,
}

impl PolicyTable {
    /// Optimal angle at time `t` (1-based) for grid belief `i`.
    pub fn action_theta(&self, t: usize, i: usize) -> f64 {
        self.thetas[self.actions[t - 1][i]]
    }

    /// The stabilized action row of the stationary phase.
    ///
    /// Backward induction converges in steps-to-go, so the rows far from
    /// the horizon settle first; the rows within a parameter-dependent
    /// depth of the terminal step keep a transient imprint of `V_{T+1} = 0`
    /// at any horizon. The stationary row is the plateau of identical
    /// consecutive rows starting at `t = 5`; it must extend either
    /// through `t = T - 5` or for at least 10 rows, otherwise the horizon
    /// is too short and the call errors (retry with larger `T`).
    pub fn stationary_actions(&self) -> Result<&[usize]> {
        if self.horizon < 11 {
            return Err(Error::NotStabilized(self.horizon));
        }
        let reference = &self.actions[4]; // t = 5
        let mut plateau = 1usize;
        for t in 6..=(self.horizon - 5) {
            if &self.actions[t - 1] != reference {
                break;
            }
            plateau += 1;
        }
        if plateau < (self.horizon - 9).min(10) {
            return Err(Error::NotStabilized(self.horizon));
        }
        Ok(reference)
    }

    /// Nearest grid belief in L1 distance.
    pub fn nearest_belief(&self, eta: &BeliefState) -> usize {
        nearest_in(&self.belief_grid, eta).0
    }
}

fn nearest_in(grid: &[BeliefState], eta: &BeliefState) -> (usize, f64) {
    let mut best = (0, f64::INFINITY);
    for (i, g) in grid.iter().enumerate() {
        let d = g.l1_distance(eta);
        if d < best.1 {
            best = (i, d);
        }
    }
    best
}

/// Per-(belief, action) data reused across DP time steps: the immediate
/// reward and the snapped successor distribution.
struct StageModel {
    rewards: Vec<f64>,
    successors: Vec<Vec<(f64, usize)>>,
    snap_warnings: usize,
    max_snap_distance: f64,
}

fn build_stage_model(
    hmm: &QuantumHmm,
    belief_grid: &[BeliefState],
    action_grid: &ActionGrid,
    beta: f64,
) -> Result<StageModel> {
    let plane = plane_basis(hmm)?;
    let h = Hamiltonian::degenerate(hmm.output_dim(), 0.0);
    let gamma = gibbs_state(&h, beta)?.state;
    // Grid spacing: the largest nearest-neighbor L1 distance.
    let spacing = belief_grid
        .iter()
        .map(|b| {
            belief_grid
                .iter()
                .filter(|o| !std::ptr::eq(*o, b))
                .map(|o| o.l1_distance(b))
                .fold(f64::INFINITY, f64::min)
        })
        .fold(0.0, f64::max);

    let nb = belief_grid.len();
    let na = action_grid.thetas.len();
    let mut rewards = vec![0.0; nb * na];
    let mut successors = vec![Vec::new(); nb * na];
    let mut snap_warnings = 0usize;
    let mut max_snap = 0.0f64;
    for (i, eta) in belief_grid.iter().enumerate() {
        let xi = expected_state(eta, hmm).state;
        let d_gamma = relative_entropy(&xi, &gamma);
        for (a, &theta) in action_grid.thetas.iter().enumerate() {
            let basis = plane.basis_states(theta);
            let rho = optimal_eigenvalues(&basis, &xi)?;
            rewards[i * na + a] = (d_gamma - relative_entropy(&xi, &rho)) / beta;
            let table: WorkTable = ideal_work_table(&rho, &h, beta)?;
            let probs = table.outcome_probabilities(&xi);
            let mut succ = Vec::with_capacity(probs.len());
            for (o, &p) in probs.iter().enumerate() {
                if p < PROB_FLOOR {
                    continue;
                }
                let next = belief_update_work(eta, hmm, &table, o)?;
                let (j, dist) = nearest_in(belief_grid, &next);
                if dist > spacing {
                    snap_warnings += 1;
                }
                max_snap = max_snap.max(dist);
                succ.push((p, j));
            }
            successors[i * na + a] = succ;
        }
    }
    Ok(StageModel { rewards, successors, snap_warnings, max_snap_distance: max_snap })
}

/// Finite-horizon backward induction: `V_{T+1} = 0`,
/// `V_t(eta) = max_a [r(eta, a) + sum_o Pr(o | eta, a) V_{t+1}(snap(eta'))]`,
/// with successor beliefs snapped to the nearest grid point and ties
/// broken toward the smallest angle.
pub fn dp_backward(
    hmm: &QuantumHmm,
    belief_grid: &[BeliefState],
    action_grid: &ActionGrid,
    t_horizon: usize,
    beta: f64,
) -> Result<PolicyTable> {
    if belief_grid.is_empty() || action_grid.thetas.is_empty() {
        return Err(Error::InvalidParameter("empty belief or action grid".into()));
    }
    if t_horizon < 1 {
        return Err(Error::InvalidParameter("horizon must be at least 1".into()));
    }
    let model = build_stage_model(hmm, belief_grid, action_grid, beta)?;
    let nb = belief_grid.len();
    let na = action_grid.thetas.len();

    let mut values = vec![vec![0.0f64; nb]; t_horizon + 1];
    let mut actions = vec![vec![0usize; nb]; t_horizon];
    for t in (1..=t_horizon).rev() {
        for i in 0..nb {
            let mut best = f64::NEG_INFINITY;
            let mut best_a = 0;
            let mut best_a_val = f64::NEG_INFINITY;
            for a in 0..na {
                let mut j_val = model.rewards[i * na + a];
                for &(p, succ) in &model.successors[i * na + a] {
                    j_val += p * values[t][succ];
                }
                // The value is the strict maximum; the recorded action
                // treats values within rounding noise of the incumbent
                // action as ties so the smallest angle wins
                // deterministically (theta and theta + pi label the same
                // basis up to last-ulp differences).
                if j_val > best {
                    best = j_val;
                }
                if best_a_val == f64::NEG_INFINITY
                    || j_val > best_a_val + 1e-9 * (1.0 + best_a_val.abs())
                {
                    best_a = a;
                    best_a_val = j_val;
                }
            }
            values[t - 1][i] = best;
            actions[t - 1][i] = best_a;
        }
    }
    Ok(PolicyTable {
        horizon: t_horizon,
        belief_grid: belief_grid.to_vec(),
        thetas: action_grid.thetas.clone(),
        actions,
        values,
        snap_warnings: model.snap_warnings,
        max_snap_distance: model.max_snap_distance,
    })
}

// ---------------------------------------------------------------------------
// Induced chains and asymptotic rates
// ---------------------------------------------------------------------------

/// One closed class of the induced belief chain.
#[derive(Debug, Clone)]
pub struct InducedClass {
    /// Node indices into the originating belief graph.
    pub nodes: Vec<usize>,
    /// The beliefs of those nodes.
    pub beliefs: Vec<BeliefState>,
    /// Row-stochastic transition matrix over the class.
    pub transition: DMatrix<f64>,
    /// Limiting distribution of the class.
    pub pi_lim: Vec<f64>,
    /// Expected work rate within the class, `E_pi[r(eta, policy(eta))]`.
    pub rate: f64,
}

/// The induced Markov chain of a stationary policy over the recurrent
/// beliefs of a belief graph, one entry per closed class.
#[derive(Debug, Clone)]
pub struct InducedChain {
    /// Closed classes, largest first.
    pub classes: Vec<InducedClass>,
}

impl InducedChain {
    /// Rate of the largest class (classes related by a symmetry of the
    /// process have equal rates).
    pub fn rate(&self) -> f64 {
        self.classes[0].rate
    }
}

/// Builds the induced chain of the stationary policy `policy` (mapping a
/// belief to an action angle) over the recurrent nodes of `graph`.
///
/// Transition rows are reassembled from the outcome distribution under
/// the policy's tailored states; the limiting distribution of each
/// closed class comes from an exact linear solve.
pub fn induced_chain(
    hmm: &QuantumHmm,
    policy: &dyn Fn(&BeliefState) -> Result<f64>,
    graph: &BeliefGraph,
    beta: f64,
) -> Result<InducedChain> {
    let recurrent = graph.recurrent_nodes();
    if recurrent.is_empty() {
        return Err(Error::InvalidParameter("belief graph has no recurrent nodes".into()));
    }
    let plane = plane_basis(hmm)?;
    let h = Hamiltonian::degenerate(hmm.output_dim(), 0.0);
    let gamma = gibbs_state(&h, beta)?.state;
    let beliefs: Vec<BeliefState> =
        recurrent.iter().map(|&i| graph.nodes[i].belief.clone()).collect();

    // Transitions over the full recurrent set.
    let n = beliefs.len();
    let mut p_full = DMatrix::<f64>::zeros(n, n);
    let mut rates = vec![0.0f64; n];
    for (row, eta) in beliefs.iter().enumerate() {
        let theta = policy(eta)?;
        let xi = expected_state(eta, hmm).state;
        let basis = plane.basis_states(theta);
        let rho = optimal_eigenvalues(&basis, &xi)?;
        rates[row] = (relative_entropy(&xi, &gamma) - relative_entropy(&xi, &rho)) / beta;
        let table = ideal_work_table(&rho, &h, beta)?;
        let probs = table.outcome_probabilities(&xi);
        for (o, &p) in probs.iter().enumerate() {
            if p < PROB_FLOOR {
                continue;
            }
            let next = belief_update_work(eta, hmm, &table, o)?;
            let (col, _) = nearest_in(&beliefs, &next);
            p_full[(row, col)] += p;
        }
    }

    // Closed classes of the induced transition structure.
    let mut digraph = petgraph::graph::DiGraph::<(), ()>::new();
    let idx: Vec<_> = (0..n).map(|_| digraph.add_node(())).collect();
    for r in 0..n {
        for c in 0..n {
            if p_full[(r, c)] > 0.0 {
                digraph.add_edge(idx[r], idx[c], ());
            }
        }
    }
    let sccs = petgraph::algo::tarjan_scc(&digraph);
    let mut component = vec![0usize; n];
    for (c, scc) in sccs.iter().enumerate() {
        for &node in scc {
            component[node.index()] = c;
        }
    }
    let mut closed = vec![true; sccs.len()];
    for r in 0..n {
        for c in 0..n {
            if p_full[(r, c)] > 0.0 && component[r] != component[c] {
                closed[component[r]] = false;
            }
        }
    }

    let mut classes = Vec::new();
    for (ci, scc) in sccs.iter().enumerate() {
        if !closed[ci] {
            continue;
        }
        let members: Vec<usize> = scc.iter().map(|nd| nd.index()).collect();
        let m = members.len();
        let mut p = DMatrix::<f64>::zeros(m, m);
        for (a, &ra) in members.iter().enumerate() {
            let mut row_sum = 0.0;
            for (b, &rb) in members.iter().enumerate() {
                p[(a, b)] = p_full[(ra, rb)];
                row_sum += p[(a, b)];
            }
            // Renormalize mass lost to dropped sub-floor outcomes.
            if row_sum > 0.0 {
                for b in 0..m {
                    p[(a, b)] /= row_sum;
                }
            }
        }
        let pi = stationary_of_matrix(&p)?;
        let rate = members
            .iter()
            .zip(&pi)
            .map(|(&node, &w)| w * rates[node])
            .sum();
        classes.push(InducedClass {
            nodes: members.iter().map(|&i| recurrent[i]).collect(),
            beliefs: members.iter().map(|&i| beliefs[i].clone()).collect(),
            transition: p,
            pi_lim: pi,
            rate,
        });
    }
    classes.sort_by(|a, b| b.nodes.len().cmp(&a.nodes.len()));
    if classes.is_empty() {
        return Err(Error::InvalidParameter("no closed class in induced chain".into()));
    }
    Ok(InducedChain { classes })
}

/// Stationary distribution of a row-stochastic matrix via a linear
/// solve of `(P^T - I) pi = 0` with normalization.
fn stationary_of_matrix(p: &DMatrix<f64>) -> Result<Vec<f64>> {
    let n = p.nrows();
    let mut a = p.transpose() - DMatrix::<f64>::identity(n, n);
    for c in 0..n {
        a[(n - 1, c)] = 1.0;
    }
    let mut b = DMatrix::<f64>::zeros(n, 1);
    b[(n - 1, 0)] = 1.0;
    let sol = a
        .lu()
        .solve(&b)
        .ok_or_else(|| Error::InvalidParameter("singular induced chain".into()))?;
    Ok(sol.iter().map(|&x| x.max(0.0)).collect())
}

/// Asymptotic work rate of a stationary policy: the belief graph under
/// the policy's tailoring rule is built, its induced chain solved, and
/// the expected reward under the limiting distribution returned.
pub fn asymptotic_rate(
    hmm: &QuantumHmm,
    policy: &dyn Fn(&BeliefState) -> Result<f64>,
    beta: f64,
) -> Result<f64> {
    let plane = plane_basis(hmm)?;
    // Attractor-seeded exploration: policies with snapped actions can
    // have long transients, so ride the meta-dynamics onto the
    // recurrent set before building the graph. A grid-snapped policy can
    // also drive the beliefs onto a noisy attractor that never revisits
    // itself at the default merge tolerance; escalate the tolerance until
    // the recurrent set closes.
    for &dedup_tol in &[MspOptions::default().dedup_tol, 1e-4, 1e-3, 5e-3] {
        let opts = MspOptions { burn_in: 1000, dedup_tol, ..MspOptions::default() };
        let graph = build_policy_graph(hmm, policy, &plane, beta, &opts)?;
        if graph.truncated || graph.recurrent_nodes().is_empty() {
            continue;
        }
        return Ok(induced_chain(hmm, policy, &graph, beta)?.rate());
    }
    Err(Error::InvalidParameter(
        "policy-induced belief dynamics did not close onto a recurrent set".into(),
    ))
}

/// Belief-graph exploration for a belief-to-angle policy. The generic
/// builder tailors from the expected state alone, so the belief is
/// recovered from the expected state (an affine, invertible map for
/// two-state processes) before the policy is consulted.
fn build_policy_graph(
    hmm: &QuantumHmm,
    policy: &dyn Fn(&BeliefState) -> Result<f64>,
    plane: &PlaneBasis,
    beta: f64,
    opts: &MspOptions,
) -> Result<BeliefGraph> {
    crate::belief::build_msp(
        hmm,
        beta,
        &|xi: &DensityMatrix| {
            let eta = invert_expected_state(hmm, xi)?;
            let theta = policy(&eta)?;
            let basis = plane.basis_states(theta);
            optimal_eigenvalues(&basis, xi)
        },
        opts,
    )
}

/// Recovers the belief with the given expected state (two-state
/// processes; the map `eta -> xi_eta` is affine in the belief).
fn invert_expected_state(hmm: &QuantumHmm, xi: &DensityMatrix) -> Result<BeliefState> {
    if hmm.n_states() != 2 {
        return Err(Error::DimensionMismatch(
            "expected-state inversion implemented for two-state processes".into(),
        ));
    }
    let xi_at = |eps: f64| expected_state(&BeliefState::from_epsilon(eps), hmm).state;
    let x0 = xi_at(0.0);
    let x1 = xi_at(0.5);
    // Solve xi = x0 + 2 eps (x1 - x0) entrywise in least squares.
    let mut num = 0.0;
    let mut den = 0.0;
    for k in 0..x0.mat().data().len() {
        let d = x1.mat().data()[k] - x0.mat().data()[k];
        let y = xi.mat().data()[k] - x0.mat().data()[k];
        num += (d.conj() * y).re;
        den += d.norm_sqr();
    }
    let eps = if den < 1e-15 { 0.0 } else { (num / den / 2.0).clamp(-0.5, 0.5) };
    Ok(BeliefState::from_epsilon(eps))
}

/// The asymptotic rate of the local-optimizing policy.
///
/// The LO tailoring depends on the belief only through the expected
/// state, so the generic graph builder applies for any state count.
pub fn lo_rate(hmm: &QuantumHmm, beta: f64) -> Result<f64> {
    let plane = plane_basis(hmm)?;
    let opts = MspOptions { burn_in: 1000, ..MspOptions::default() };
    let graph = crate::belief::build_msp_lo(hmm, beta, &opts)?;
    Ok(induced_chain(hmm, &|eta| lo_theta(eta, hmm, &plane), &graph, beta)?.rate())
}

/// The time-ordered optimal asymptotic rate: backward induction at
/// horizon `t_horizon`, stabilized mid-horizon action row extracted
/// (erroring with a suggestion to enlarge `T` otherwise), and the
/// induced-chain rate of that stationary policy.
pub fn tofe_rate(
    hmm: &QuantumHmm,
    belief_grid: &[BeliefState],
    action_grid: &ActionGrid,
    t_horizon: usize,
    beta: f64,
) -> Result<f64> {
    let table = dp_backward(hmm, belief_grid, action_grid, t_horizon, beta)?;
    let stationary = table.stationary_actions()?.to_vec();
    let policy = move |eta: &BeliefState| -> Result<f64> {
        let i = table.nearest_belief(eta);
        Ok(table.thetas[stationary[i]])
    };
    asymptotic_rate(hmm, &policy, beta)
}
