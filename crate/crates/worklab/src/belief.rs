//! Belief dynamics of a work-extracting agent.
//!
//! The agent never sees the latent state of the process; it tracks a
//! belief `eta` (a distribution over latent states), tailors its
//! protocol to the expected output state
//! `xi_eta = sum_x Pr(x | eta) sigma^(x)`, observes the extracted work
//! value, and updates by Bayes' rule:
//!
//! ```text
//! eta' = z^{-1} sum_x Pr(o | x) eta T^(x)
//! ```
//!
//! where for work observations `Pr(o | x)` is the Born-rule weight of
//! the observed work value under the emitted state `sigma^(x)` in the
//! tailored eigenbasis. The update depends on the tailored state only
//! through its eigenvectors.
//!
//! The reachable beliefs under a tailoring rule form a directed graph
//! (built here with deduplication and recurrence classification), and
//! for two-state processes the meta-dynamics reduce to a one-dimensional
//! return map whose fixed-point structure decides whether memory pays.

use petgraph::graph::DiGraph;
use std::collections::VecDeque;

use crate::extraction::{ideal_work_table, WorkTable};
use crate::processes::QuantumHmm;
use crate::qmath::{DensityMatrix, Hamiltonian};
use crate::{Error, Result};

/// Beliefs closer than this in L1 distance are merged into one graph
/// node.
pub const BELIEF_DEDUP_TOL: f64 = 1e-6;

/// Normalizers below this floor mark an outcome as impossible under the
/// current belief.
pub const UPDATE_FLOOR: f64 = 1e-12;

/// A distribution over the latent states of a process.
#[derive(Debug, Clone, PartialEq)]
pub struct BeliefState {
    probs: Vec<f64>,
}

impl BeliefState {
    /// Validates and wraps a probability vector.
    pub fn new(probs: Vec<f64>) -> Result<Self> {
        if probs.iter().any(|&p| !(0.0..=1.0 + 1e-12).contains(&p)) {
            return Err(Error::InvalidParameter("belief entries must lie in [0, 1]".into()));
        }
        let total: f64 = probs.iter().sum();
        if (total - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidParameter(format!(
                "belief must be normalized; sum = {total}"
            )));
        }
        Ok(Self { probs })
    }

    /// Two-state belief `(1/2 + eps, 1/2 - eps)`.
    pub fn from_epsilon(eps: f64) -> Self {
        Self { probs: vec![0.5 + eps, 0.5 - eps] }
    }

    /// Bias `eps = (eta_0 - eta_1) / 2` of a two-state belief.
    pub fn epsilon(&self) -> f64 {
        assert_eq!(self.probs.len(), 2, "epsilon is defined for two-state beliefs");
        (self.probs[0] - self.probs[1]) / 2.0
    }

    /// The probability vector.
    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    /// Moves mass `delta` from the last to the first component,
    /// breaking a symmetric belief off an unstable fixed point.
    pub fn perturbed(&self, delta: f64) -> Self {
        let mut probs = self.probs.clone();
        let n = probs.len();
        let d = delta.min(probs[n - 1]).max(-probs[0]);
        probs[0] += d;
        probs[n - 1] -= d;
        Self { probs }
    }

    /// L1 distance to another belief.
    pub fn l1_distance(&self, other: &Self) -> f64 {
        self.probs.iter().zip(&other.probs).map(|(a, b)| (a - b).abs()).sum()
    }
}

/// Expected output state and symbol priors under a belief.
#[derive(Debug, Clone)]
pub struct ExpectedState {
    /// `xi_eta = sum_x Pr(x | eta) sigma^(x)`.
    pub state: DensityMatrix,
    /// Symbol priors `Pr(x | eta) = eta T^(x) 1`.
    pub priors: Vec<f64>,
}

/// Computes the expected output state and the symbol priors for belief
/// `eta`.
pub fn expected_state(eta: &BeliefState, hmm: &QuantumHmm) -> ExpectedState {
    let n = hmm.n_states();
    let priors: Vec<f64> = (0..hmm.n_symbols())
        .map(|x| {
            (0..n)
                .map(|s| eta.probs()[s] * (0..n).map(|sp| hmm.transition(x)[(s, sp)]).sum::<f64>())
                .sum()
        })
        .collect();
    let parts: Vec<(f64, &DensityMatrix)> =
        priors.iter().enumerate().map(|(x, &p)| (p, hmm.output(x))).collect();
    ExpectedState { state: DensityMatrix::mixture(&parts), priors }
}

/// Bayes update of `eta` given per-symbol outcome likelihoods
/// `likelihoods[x][o] = Pr(o | x)` and the observed outcome index.
pub fn belief_update_general(
    eta: &BeliefState,
    hmm: &QuantumHmm,
    likelihoods: &[Vec<f64>],
    observed: usize,
) -> Result<BeliefState> {
    let n = hmm.n_states();
    if likelihoods.len() != hmm.n_symbols() {
        return Err(Error::DimensionMismatch(format!(
            "{} likelihood rows for {} symbols",
            likelihoods.len(),
            hmm.n_symbols()
        )));
    }
    let mut post = vec![0.0f64; n];
    for (x, lk) in likelihoods.iter().enumerate() {
        let weight = *lk.get(observed).ok_or_else(|| {
            Error::DimensionMismatch(format!("outcome {observed} out of likelihood range"))
        })?;
        if weight <= 0.0 {
            continue;
        }
        for s in 0..n {
            let mass = eta.probs()[s];
            if mass == 0.0 {
                continue;
            }
            for (sp, slot) in post.iter_mut().enumerate() {
                *slot += weight * mass * hmm.transition(x)[(s, sp)];
            }
        }
    }
    let z: f64 = post.iter().sum();
    if z <= UPDATE_FLOOR {
        return Err(Error::ImpossibleOutcome { outcome: observed, normalizer: z });
    }
    BeliefState::new(post.into_iter().map(|p| p / z).collect())
}

/// Bayes update of `eta` after observing the merged work value with
/// index `observed` in `table`.
///
/// The likelihood of a work value under emitted symbol `x` is the
/// Born-rule weight `sum_{n in group} <lam_n| sigma^(x) |lam_n>`; it
/// depends on the tailored state only through its eigenvectors.
pub fn belief_update_work(
    eta: &BeliefState,
    hmm: &QuantumHmm,
    table: &WorkTable,
    observed: usize,
) -> Result<BeliefState> {
    let likelihoods: Vec<Vec<f64>> = (0..hmm.n_symbols())
        .map(|x| {
            table
                .merged
                .iter()
                .map(|m| {
                    m.members
                        .iter()
                        .map(|&n| hmm.output(x).mat().expectation(&table.entries[n].eigenvector))
                        .sum()
                })
                .collect()
        })
        .collect();
    belief_update_general(eta, hmm, &likelihoods, observed)
}

/// Work table tailored to the expected state of `eta` (the
/// local-optimizing choice) together with the outcome distribution
/// `Pr(W = w_o | eta)` under the belief.
pub fn outcome_distribution(
    eta: &BeliefState,
    hmm: &QuantumHmm,
    beta: f64,
) -> Result<(WorkTable, Vec<f64>)> {
    let xi = expected_state(eta, hmm);
    let h = Hamiltonian::degenerate(hmm.output_dim(), 0.0);
    let table = ideal_work_table(&xi.state, &h, beta)?;
    let probs = table.outcome_probabilities(&xi.state);
    Ok((table, probs))
}

// ---------------------------------------------------------------------------
// Belief graph
// ---------------------------------------------------------------------------

/// A node of the reachable-belief graph.
#[derive(Debug, Clone)]
pub struct BeliefNode {
    /// The belief of this node.
    pub belief: BeliefState,
    /// Whether the node lies in a closed communicating class.
    pub recurrent: bool,
}

/// A labeled transition of the belief graph.
#[derive(Debug, Clone, Copy)]
pub struct BeliefEdge {
    /// Source node index.
    pub from: usize,
    /// Merged-outcome index at the source.
    pub outcome: usize,
    /// Work value of the outcome.
    pub work: f64,
    /// Probability of the outcome under the source belief.
    pub probability: f64,
    /// Target node index.
    pub to: usize,
}

/// The reachable-belief graph under a tailoring rule.
#[derive(Debug, Clone)]
pub struct BeliefGraph {
    /// Discovered beliefs (node 0 is the stationary belief).
    pub nodes: Vec<BeliefNode>,
    /// Outcome-labeled transitions.
    pub edges: Vec<BeliefEdge>,
    /// True when exploration stopped at the node budget; recurrence
    /// flags are then best-effort on the truncated graph.
    pub truncated: bool,
}

impl BeliefGraph {
    /// Indices of the recurrent nodes.
    pub fn recurrent_nodes(&self) -> Vec<usize> {
        self.nodes
            .iter()
            .enumerate()
            .filter_map(|(i, n)| n.recurrent.then_some(i))
            .collect()
    }

    /// Outgoing edges of a node.
    pub fn edges_from(&self, node: usize) -> Vec<&BeliefEdge> {
        self.edges.iter().filter(|e| e.from == node).collect()
    }
}

/// Options controlling belief-graph exploration.
#[derive(Debug, Clone, Copy)]
pub struct MspOptions {
    /// L1 deduplication tolerance for merging beliefs.
    pub dedup_tol: f64,
    /// Node budget; exceeding it sets the truncation flag.
    pub max_nodes: usize,
    /// Symmetry-breaking mass moved off the stationary belief for the
    /// extra seed node.
    pub symmetry_break: f64,
    /// Outcomes with probability below this are not expanded.
    pub prob_floor: f64,
    /// Number of dominant-outcome update steps applied to the seed
    /// before exploration. Zero explores from the stationary belief;
    /// a positive value first rides the meta-dynamics onto its
    /// attractor, which keeps the node budget for the recurrent set
    /// when the transient tree is large.
    pub burn_in: usize,
}

impl Default for MspOptions {
    fn default() -> Self {
        Self {
            dedup_tol: BELIEF_DEDUP_TOL,
            max_nodes: 4096,
            symmetry_break: 1e-3,
            prob_floor: 1e-12,
            burn_in: 0,
        }
    }
}

/// Builds the reachable-belief graph under a tailoring rule.
///
/// `tailor` maps the expected state of a belief to the state the
/// protocol is tailored to (the identity for the local-optimizing
/// agent). Exploration starts from the stationary belief and a
/// symmetry-broken copy of it, breadth-first, merging beliefs within
/// the L1 tolerance. A node is recurrent when its strongly connected
/// component has no outgoing edge to another component and is reachable
/// from the symmetry-broken seed; the exactly symmetric belief is a
/// fixed point of the update but unstable, so reachability from the
/// seed is what distinguishes physical attractors from it.
pub fn build_msp(
    hmm: &QuantumHmm,
    beta: f64,
    tailor: &dyn Fn(&DensityMatrix) -> Result<DensityMatrix>,
    opts: &MspOptions,
) -> Result<BeliefGraph> {
    let h = Hamiltonian::degenerate(hmm.output_dim(), 0.0);
    let stationary = BeliefState::new(hmm.stationary().to_vec())?;
    let mut seed = stationary.perturbed(opts.symmetry_break);
    for _ in 0..opts.burn_in {
        seed = dominant_outcome_step(&seed, hmm, beta, tailor, &h)?;
    }
    let mut nodes: Vec<BeliefState> = Vec::new();
    let mut queue: VecDeque<usize> = VecDeque::new();
    if opts.burn_in == 0 {
        // Keep the stationary belief as node 0 so transient structure
        // around it is visible; recurrence is judged from the seed.
        nodes.push(stationary.clone());
        queue.push_back(0);
    }
    if nodes.is_empty() || seed.l1_distance(&stationary) > opts.dedup_tol {
        nodes.push(seed);
        queue.push_back(nodes.len() - 1);
    }
    let seed_node = nodes.len() - 1;
    let mut expanded = vec![false; nodes.len()];
    let mut edges: Vec<BeliefEdge> = Vec::new();
    let mut truncated = false;

    let mut incomplete: Vec<usize> = Vec::new();
    while let Some(i) = queue.pop_front() {
        expanded[i] = true;
        let eta = nodes[i].clone();
        let xi = expected_state(&eta, hmm);
        let rho_star = tailor(&xi.state)?;
        let table = ideal_work_table(&rho_star, &h, beta)?;
        let probs = table.outcome_probabilities(&xi.state);
        for (o, &p) in probs.iter().enumerate() {
            if p < opts.prob_floor {
                continue;
            }
            let next = belief_update_work(&eta, hmm, &table, o)?;
            let j = match nodes.iter().position(|n| n.l1_distance(&next) <= opts.dedup_tol) {
                Some(j) => j,
                None if nodes.len() >= opts.max_nodes => {
                    truncated = true;
                    incomplete.push(i);
                    continue;
                }
                None => {
                    nodes.push(next);
                    expanded.push(false);
                    queue.push_back(nodes.len() - 1);
                    nodes.len() - 1
                }
            };
            edges.push(BeliefEdge {
                from: i,
                outcome: o,
                work: table.merged[o].work,
                probability: p,
                to: j,
            });
        }
    }

    // Recurrence: strongly connected components with no outgoing edge.
    let mut graph: DiGraph<(), ()> = DiGraph::new();
    let idx: Vec<_> = (0..nodes.len()).map(|_| graph.add_node(())).collect();
    for e in &edges {
        graph.add_edge(idx[e.from], idx[e.to], ());
    }
    let sccs = petgraph::algo::tarjan_scc(&graph);
    let mut component = vec![usize::MAX; nodes.len()];
    for (c, scc) in sccs.iter().enumerate() {
        for &n in scc {
            component[n.index()] = c;
        }
    }
    let mut closed = vec![true; sccs.len()];
    for e in &edges {
        if component[e.from] != component[e.to] {
            closed[component[e.from]] = false;
        }
    }
    // A class containing an unexpanded node, or one whose successors
    // were dropped when the budget ran out, cannot be certified closed.
    for (i, &exp) in expanded.iter().enumerate() {
        if !exp {
            closed[component[i]] = false;
        }
    }
    for &i in &incomplete {
        closed[component[i]] = false;
    }
    // Reachability from the symmetry-broken seed.
    let mut reachable = vec![false; nodes.len()];
    let mut stack = vec![seed_node];
    reachable[seed_node] = true;
    while let Some(i) = stack.pop() {
        for e in edges.iter().filter(|e| e.from == i) {
            if !reachable[e.to] {
                reachable[e.to] = true;
                stack.push(e.to);
            }
        }
    }
    let nodes = nodes
        .into_iter()
        .enumerate()
        .map(|(i, belief)| BeliefNode {
            belief,
            recurrent: closed[component[i]] && reachable[i],
        })
        .collect();
    Ok(BeliefGraph { nodes, edges, truncated })
}

/// One belief update following the most likely outcome under the given
/// tailoring rule.
fn dominant_outcome_step(
    eta: &BeliefState,
    hmm: &QuantumHmm,
    beta: f64,
    tailor: &dyn Fn(&DensityMatrix) -> Result<DensityMatrix>,
    h: &Hamiltonian,
) -> Result<BeliefState> {
    let xi = expected_state(eta, hmm);
    let rho_star = tailor(&xi.state)?;
    let table = ideal_work_table(&rho_star, h, beta)?;
    let probs = table.outcome_probabilities(&xi.state);
    let best = probs
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.partial_cmp(b.1).unwrap())
        .map(|(o, _)| o)
        .unwrap_or(0);
    belief_update_work(eta, hmm, &table, best)
}

/// Belief graph under the local-optimizing tailoring rule.
pub fn build_msp_lo(hmm: &QuantumHmm, beta: f64, opts: &MspOptions) -> Result<BeliefGraph> {
    build_msp(hmm, beta, &|xi| Ok(xi.clone()), opts)
}

// ---------------------------------------------------------------------------
// Return-map analysis
// ---------------------------------------------------------------------------

/// A fixed point of the belief return map.
#[derive(Debug, Clone, Copy)]
pub struct FixedPoint {
    /// Belief bias at the fixed point.
    pub epsilon: f64,
    /// Numerical derivative of the return map at the fixed point.
    pub derivative: f64,
    /// Stable iff `|derivative| < 1`.
    pub stable: bool,
}

/// Whether tracking a belief beats the memoryless strategy.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Regime {
    /// The symmetric belief is the only attractor; memory gains nothing.
    MemoryApathetic,
    /// The symmetric belief is unstable; broken-symmetry attractors
    /// yield a strictly higher work rate.
    MemoryAdvantageous,
}

/// Result of the return-map analysis.
#[derive(Debug, Clone)]
pub struct ReturnMapAnalysis {
    /// Fixed points found on the grid, in increasing `epsilon`.
    pub fixed_points: Vec<FixedPoint>,
    /// Regime classification.
    pub regime: Regime,
}

/// Number of grid points used to bracket fixed points.
pub const RETURN_MAP_GRID: usize = 4001;

/// Step for central-difference derivatives of the return map.
pub const RETURN_MAP_DIFF_STEP: f64 = 1e-5;

/// One application of the dominant-outcome update map: the belief update
/// conditioned on observing the work value carried by the largest
/// eigenvalue of the locally tailored state.
fn dominant_update(eps: f64, hmm: &QuantumHmm, beta: f64) -> Result<f64> {
    let eta = BeliefState::from_epsilon(eps.clamp(-0.5, 0.5));
    let (table, _) = outcome_distribution(&eta, hmm, beta)?;
    // Merged groups are sorted by descending work; the largest eigenvalue
    // carries the largest work value, so the dominant branch is group 0.
    let next = belief_update_work(&eta, hmm, &table, 0)?;
    Ok(next.epsilon())
}

/// Return map of the belief meta-dynamics: two steps of the
/// dominant-outcome update map.
///
/// Along the most likely trajectory the belief alternates sign each
/// step, so the two-step composition is the map whose fixed points are
/// the attractors of the meta-dynamics.
pub fn return_map(eps: f64, hmm: &QuantumHmm, beta: f64) -> Result<f64> {
    dominant_update(dominant_update(eps, hmm, beta)?, hmm, beta)
}

/// Locates the fixed points of the belief return map of a two-state
/// process and classifies the memory regime.
///
/// Fixed points are bracketed by sign changes of `return_map(eps) - eps`
/// on a uniform grid over `eps in [-1/2, 1/2]`, refined by bisection;
/// derivatives use a central difference. The regime is
/// memory-advantageous iff a stable fixed point with nonzero bias
/// exists.
pub fn classify_return_map(hmm: &QuantumHmm, beta: f64) -> Result<ReturnMapAnalysis> {
    if hmm.n_states() != 2 {
        return Err(Error::DimensionMismatch(
            "return-map analysis requires a two-state process".into(),
        ));
    }
    let lo = -0.5 + 1e-9;
    let hi = 0.5 - 1e-9;
    let g = |eps: f64| -> Result<f64> { Ok(return_map(eps, hmm, beta)? - eps) };

    let mut fixed_points = Vec::new();
    let mut prev_eps = lo;
    let mut prev_val = g(lo)?;
    for k in 1..RETURN_MAP_GRID {
        let eps = lo + (hi - lo) * k as f64 / (RETURN_MAP_GRID - 1) as f64;
        let val = g(eps)?;
        if prev_val == 0.0 || prev_val.signum() != val.signum() {
            // Refine the bracket by bisection.
            let (mut a, mut b, mut fa) = (prev_eps, eps, prev_val);
            for _ in 0..60 {
                let m = 0.5 * (a + b);
                let fm = g(m)?;
                if fm == 0.0 {
                    a = m;
                    b = m;
                    break;
                }
                if fa.signum() == fm.signum() {
                    a = m;
                    fa = fm;
                } else {
                    b = m;
                }
            }
            let root = 0.5 * (a + b);
            let h = RETURN_MAP_DIFF_STEP;
            let derivative =
                (return_map(root + h, hmm, beta)? - return_map(root - h, hmm, beta)?) / (2.0 * h);
            // Skip duplicates from adjacent brackets.
            if fixed_points
                .last()
                .is_none_or(|fp: &FixedPoint| (fp.epsilon - root).abs() > 1e-7)
            {
                fixed_points.push(FixedPoint { epsilon: root, derivative, stable: derivative.abs() < 1.0 });
            }
        }
        prev_eps = eps;
        prev_val = val;
    }

    let advantageous = fixed_points.iter().any(|fp| fp.stable && fp.epsilon.abs() > 1e-4);
    Ok(ReturnMapAnalysis {
        fixed_points,
        regime: if advantageous { Regime::MemoryAdvantageous } else { Regime::MemoryApathetic },
    })
}
