//! Hidden Markov models that emit quantum states.
//!
//! A process is described by labeled substochastic matrices `T^(x)` over a
//! finite latent-state set — entry `(s, s')` of `T^(x)` is the joint
//! probability of emitting symbol `x` and moving from `s` to `s'` — plus
//! an output map `x -> sigma^(x)` assigning a quantum state to each
//! symbol. The summed matrix `sum_x T^(x)` is row-stochastic and its
//! stationary distribution `pi` closes the description.
//!
//! Processes are time-homogeneous: the same labeled matrices apply at
//! every step.

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;
use serde::Deserialize;

use crate::qmath::{bloch_state, depolarize, CMatrix, DensityMatrix};
use crate::{Error, Result};

/// Guard on the joint dimension `d^T` of multi-time states.
pub const MULTI_TIME_DIM_GUARD: usize = 4096;

/// A hidden Markov model emitting quantum states.
#[derive(Debug, Clone)]
pub struct QuantumHmm {
    labeled: Vec<DMatrix<f64>>,
    outputs: Vec<DensityMatrix>,
    stationary: Vec<f64>,
}

impl QuantumHmm {
    /// Validates and assembles a process from labeled matrices and
    /// symbol outputs.
    ///
    /// # Errors
    /// - [`Error::DimensionMismatch`] on inconsistent shapes;
    /// - [`Error::InvalidParameter`] on negative entries or non-stochastic
    ///   row sums (tolerance `1e-10`);
    /// - [`Error::ReducibleChain`] when the summed matrix is reducible.
    pub fn new(labeled: Vec<DMatrix<f64>>, outputs: Vec<DensityMatrix>) -> Result<Self> {
        if labeled.is_empty() || labeled.len() != outputs.len() {
            return Err(Error::DimensionMismatch(format!(
                "need one labeled matrix per output symbol: {} matrices, {} outputs",
                labeled.len(),
                outputs.len()
            )));
        }
        let n = labeled[0].nrows();
        for (x, t) in labeled.iter().enumerate() {
            if t.nrows() != n || t.ncols() != n {
                return Err(Error::DimensionMismatch(format!(
                    "labeled matrix {x} is {}x{}, expected {n}x{n}",
                    t.nrows(),
                    t.ncols()
                )));
            }
            if let Some(neg) = t.iter().find(|&&v| v < -1e-12) {
                return Err(Error::InvalidParameter(format!(
                    "labeled matrix {x} has negative entry {neg}"
                )));
            }
        }
        let summed = Self::summed_of(&labeled);
        for s in 0..n {
            let row: f64 = summed.row(s).sum();
            if (row - 1.0).abs() > 1e-10 {
                return Err(Error::InvalidParameter(format!(
                    "row {s} of the summed transition matrix sums to {row}, expected 1"
                )));
            }
        }
        let d = outputs[0].dim();
        if outputs.iter().any(|o| o.dim() != d) {
            return Err(Error::DimensionMismatch(
                "output states must share one dimension".into(),
            ));
        }
        let stationary = stationary_of(&summed)?;
        Ok(Self { labeled, outputs, stationary })
    }

    /// Like [`QuantumHmm::new`] but with an explicitly supplied stationary
    /// distribution, bypassing the irreducibility check. Intended for
    /// boundary parameter values where the chain decouples but a
    /// distinguished symmetric stationary distribution still exists.
    ///
    /// # Errors
    /// Shape/positivity validation as in [`QuantumHmm::new`], plus
    /// [`Error::InvalidParameter`] if `pi sum_x T^(x) != pi` within `1e-10`.
    pub fn with_stationary(
        labeled: Vec<DMatrix<f64>>,
        outputs: Vec<DensityMatrix>,
        stationary: Vec<f64>,
    ) -> Result<Self> {
        // Validate shapes by building against a proxy that skips the
        // stationary solve.
        if labeled.is_empty() || labeled.len() != outputs.len() {
            return Err(Error::DimensionMismatch(
                "need one labeled matrix per output symbol".into(),
            ));
        }
        let n = labeled[0].nrows();
        let summed = Self::summed_of(&labeled);
        for s in 0..n {
            let row: f64 = summed.row(s).sum();
            if (row - 1.0).abs() > 1e-10 {
                return Err(Error::InvalidParameter(format!(
                    "row {s} of the summed transition matrix sums to {row}, expected 1"
                )));
            }
        }
        if stationary.len() != n {
            return Err(Error::DimensionMismatch("stationary length".into()));
        }
        for sp in 0..n {
            let prop: f64 = (0..n).map(|s| stationary[s] * summed[(s, sp)]).sum();
            if (prop - stationary[sp]).abs() > 1e-10 {
                return Err(Error::InvalidParameter(format!(
                    "supplied distribution is not stationary at state {sp}"
                )));
            }
        }
        Ok(Self { labeled, outputs, stationary })
    }

    fn summed_of(labeled: &[DMatrix<f64>]) -> DMatrix<f64> {
        let mut acc = labeled[0].clone();
        for t in &labeled[1..] {
            acc += t;
        }
        acc
    }

    /// Number of latent states.
    pub fn n_states(&self) -> usize {
        self.labeled[0].nrows()
    }

    /// Number of output symbols.
    pub fn n_symbols(&self) -> usize {
        self.labeled.len()
    }

    /// Output-state dimension `d`.
    pub fn output_dim(&self) -> usize {
        self.outputs[0].dim()
    }

    /// Labeled matrix `T^(x)`.
    pub fn transition(&self, x: usize) -> &DMatrix<f64> {
        &self.labeled[x]
    }

    /// Row-stochastic summed matrix `sum_x T^(x)`.
    pub fn summed_transition(&self) -> DMatrix<f64> {
        Self::summed_of(&self.labeled)
    }

    /// Output state `sigma^(x)`.
    pub fn output(&self, x: usize) -> &DensityMatrix {
        &self.outputs[x]
    }

    /// Stationary distribution `pi` over latent states.
    pub fn stationary(&self) -> &[f64] {
        &self.stationary
    }

    /// Probability of the word `x_{1:T}` starting from the belief `eta`
    /// (defaults to `pi` when `eta` is `None`).
    pub fn word_probability(&self, word: &[usize], eta: Option<&[f64]>) -> f64 {
        let mut v: Vec<f64> = eta.map(|e| e.to_vec()).unwrap_or_else(|| self.stationary.clone());
        for &x in word {
            let t = &self.labeled[x];
            let mut next = vec![0.0; self.n_states()];
            for (s, vs) in v.iter().enumerate() {
                if *vs == 0.0 {
                    continue;
                }
                for sp in 0..self.n_states() {
                    next[sp] += vs * t[(s, sp)];
                }
            }
            v = next;
        }
        v.iter().sum()
    }

    /// The stationary single-slot state `xi_0 = sum_x Pr(x) sigma^(x)`.
    pub fn stationary_output(&self) -> DensityMatrix {
        let parts: Vec<(f64, &DensityMatrix)> = (0..self.n_symbols())
            .map(|x| (self.word_probability(&[x], None), &self.outputs[x]))
            .collect();
        DensityMatrix::mixture(&parts)
    }

    /// Loads a process from a JSON description (see [`ProcessSpec`]).
    pub fn from_json(json: &str) -> Result<Self> {
        let spec: ProcessSpec = serde_json::from_str(json)
            .map_err(|e| Error::InvalidParameter(format!("process JSON: {e}")))?;
        spec.build()
    }
}

/// JSON-loadable process description.
///
/// `labeled[x]` is the row-major matrix `T^(x)`; `outputs[x]` gives the
/// Bloch parametrization of `sigma^(x)` (pure unless `radius < 1`).
#[derive(Debug, Deserialize)]
pub struct ProcessSpec {
    /// Per-symbol transition matrices, each as rows of probabilities.
    pub labeled: Vec<Vec<Vec<f64>>>,
    /// Per-symbol output Bloch parameters.
    pub outputs: Vec<BlochSpec>,
}

/// Bloch parametrization of an output state.
#[derive(Debug, Deserialize)]
pub struct BlochSpec {
    /// Polar angle in `[0, pi]`.
    pub theta: f64,
    /// Azimuthal angle in `[0, 2 pi)`.
    #[serde(default)]
    pub phi: f64,
    /// Bloch radius in `[0, 1]`; defaults to 1 (pure).
    #[serde(default = "default_radius")]
    pub radius: f64,
}

fn default_radius() -> f64 {
    1.0
}

impl ProcessSpec {
    fn build(&self) -> Result<QuantumHmm> {
        let labeled = self
            .labeled
            .iter()
            .map(|rows| {
                let n = rows.len();
                let flat: Vec<f64> = rows.iter().flatten().copied().collect();
                DMatrix::from_row_slice(n, flat.len() / n.max(1), &flat)
            })
            .collect();
        let outputs = self
            .outputs
            .iter()
            .map(|b| {
                let pure = bloch_state(b.theta, b.phi)?;
                depolarize(&pure, 1.0 - b.radius)
            })
            .collect::<Result<Vec<_>>>()?;
        QuantumHmm::new(labeled, outputs)
    }
}

/// Builds the perturbed-coin process.
///
/// Two latent states with `T^(0) = [[1-p, 0], [p, 0]]`,
/// `T^(1) = [[0, p], [0, 1-p]]` and stationary distribution `(1/2, 1/2)`;
/// outputs `sigma^(0) = |0><0|` and `sigma^(1) = |psi><psi|` with
/// `|psi> = sqrt(r)|0> + sqrt(1-r)|1>`, so the output fidelity is `r`.
///
/// The symmetric stationary distribution `(1/2, 1/2)` is valid for every
/// `p`, including the decoupled boundary `p = 0`, and is always used.
///
/// # Errors
/// Returns [`Error::InvalidParameter`] for `p` or `r` outside `[0, 1]`.
pub fn make_perturbed_coin(p: f64, r: f64) -> Result<QuantumHmm> {
    for (name, v) in [("p", p), ("r", r)] {
        if !(0.0..=1.0).contains(&v) {
            return Err(Error::InvalidParameter(format!("{name} must lie in [0, 1], got {v}")));
        }
    }
    let t0 = DMatrix::from_row_slice(2, 2, &[1.0 - p, 0.0, p, 0.0]);
    let t1 = DMatrix::from_row_slice(2, 2, &[0.0, p, 0.0, 1.0 - p]);
    let sigma0 = DensityMatrix::pure(&[C64::new(1.0, 0.0), C64::new(0.0, 0.0)]);
    let sigma1 = DensityMatrix::pure(&[C64::new(r.sqrt(), 0.0), C64::new((1.0 - r).sqrt(), 0.0)]);
    QuantumHmm::with_stationary(vec![t0, t1], vec![sigma0, sigma1], vec![0.5, 0.5])
}

/// Builds the 2-1 golden-mean process.
///
/// Topology assumption (the source description is pictorial): three
/// latent states `A, B, C`; from `A` the process emits symbol 1 with
/// probability `p` and moves to `B`, or emits 0 with probability `1 - p`
/// and stays on `A`; `B` and `C` deterministically emit 0, stepping
/// `B -> C -> A`. Every 1 is therefore followed by at least two 0s, and
/// `p = 1` yields a deterministic period-3 cycle. Outputs are as in
/// [`make_perturbed_coin`].
///
/// # Errors
/// Parameter validation as in [`make_perturbed_coin`]; `p = 0`
/// additionally yields [`Error::ReducibleChain`] because states `B, C`
/// become unreachable.
pub fn make_golden_mean_21(p: f64, r: f64) -> Result<QuantumHmm> {
    for (name, v) in [("p", p), ("r", r)] {
        if !(0.0..=1.0).contains(&v) {
            return Err(Error::InvalidParameter(format!("{name} must lie in [0, 1], got {v}")));
        }
    }
    #[rustfmt::skip]
    let t0 = DMatrix::from_row_slice(3, 3, &[
        1.0 - p, 0.0, 0.0,
        0.0,     0.0, 1.0,
        1.0,     0.0, 0.0,
    ]);
    #[rustfmt::skip]
    let t1 = DMatrix::from_row_slice(3, 3, &[
        0.0, p,   0.0,
        0.0, 0.0, 0.0,
        0.0, 0.0, 0.0,
    ]);
    let sigma0 = DensityMatrix::pure(&[C64::new(1.0, 0.0), C64::new(0.0, 0.0)]);
    let sigma1 = DensityMatrix::pure(&[C64::new(r.sqrt(), 0.0), C64::new((1.0 - r).sqrt(), 0.0)]);
    QuantumHmm::new(vec![t0, t1], vec![sigma0, sigma1])
}

/// Stationary distribution of a row-stochastic matrix: the left
/// eigenvector for eigenvalue 1, normalized and nonnegative.
///
/// # Errors
/// Returns [`Error::ReducibleChain`] naming the communicating classes if
/// the support graph is not strongly connected.
pub fn stationary_distribution(hmm: &QuantumHmm) -> Result<Vec<f64>> {
    stationary_of(&hmm.summed_transition())
}

fn stationary_of(t: &DMatrix<f64>) -> Result<Vec<f64>> {
    let n = t.nrows();
    if n == 1 {
        return Ok(vec![1.0]);
    }
    // Irreducibility check on the support graph.
    let mut graph = petgraph::graph::DiGraph::<(), ()>::new();
    let nodes: Vec<_> = (0..n).map(|_| graph.add_node(())).collect();
    for i in 0..n {
        for j in 0..n {
            if t[(i, j)] > 1e-14 {
                graph.add_edge(nodes[i], nodes[j], ());
            }
        }
    }
    let sccs = petgraph::algo::tarjan_scc(&graph);
    if sccs.len() > 1 {
        let classes = sccs
            .iter()
            .map(|c| c.iter().map(|ix| ix.index()).collect::<Vec<_>>())
            .collect();
        return Err(Error::ReducibleChain(classes));
    }
    // Solve pi (T - I) = 0 with sum(pi) = 1: rows of A are the columns of
    // T - I, with the last equation replaced by the normalization.
    let mut a = t.transpose() - DMatrix::<f64>::identity(n, n);
    for j in 0..n {
        a[(n - 1, j)] = 1.0;
    }
    let mut b = DMatrix::<f64>::zeros(n, 1);
    b[(n - 1, 0)] = 1.0;
    let sol = a
        .lu()
        .solve(&b)
        .ok_or_else(|| Error::InvalidParameter("singular stationary system".into()))?;
    let mut pi: Vec<f64> = sol.iter().map(|&x| x.max(0.0)).collect();
    let total: f64 = pi.iter().sum();
    for x in &mut pi {
        *x /= total;
    }
    Ok(pi)
}

/// Exact joint state of `T` consecutive outputs.
#[derive(Debug, Clone)]
pub struct MultiTimeState {
    /// Number of time slots.
    pub horizon: usize,
    /// Single-slot dimension.
    pub slot_dim: usize,
    /// The joint state on dimension `slot_dim^horizon`; slot 1 is the
    /// leftmost (most significant) tensor factor.
    pub state: DensityMatrix,
}

impl MultiTimeState {
    /// Reduced state of a single slot (0-based index), tracing out the
    /// rest.
    pub fn reduced_slot(&self, slot: usize) -> DensityMatrix {
        let d = self.slot_dim;
        let t = self.horizon;
        assert!(slot < t);
        let full = self.state.mat();
        let mut out = CMatrix::zeros(d);
        let stride = d.pow((t - 1 - slot) as u32);
        let outer = d.pow(slot as u32);
        let inner = d.pow((t - 1 - slot) as u32);
        for a in 0..d {
            for b in 0..d {
                let mut acc = C64::new(0.0, 0.0);
                for hi in 0..outer {
                    for lo in 0..inner {
                        let i = (hi * d + a) * stride + lo;
                        let j = (hi * d + b) * stride + lo;
                        acc += full[(i, j)];
                    }
                }
                out[(a, b)] = acc;
            }
        }
        DensityMatrix::from_convex_construction(out)
    }

    /// The same multi-time correlations with the slot order reversed.
    pub fn reversed(&self) -> MultiTimeState {
        let d = self.slot_dim;
        let t = self.horizon;
        let full = self.state.mat();
        let dim = full.dim();
        // Digit k of the input index becomes digit t-1-k of the output.
        let rev_full = |idx: usize| -> usize {
            let mut v = idx;
            let mut digits = vec![0usize; t];
            for k in (0..t).rev() {
                digits[k] = v % d;
                v /= d;
            }
            digits.iter().rev().fold(0, |acc, &dg| acc * d + dg)
        };
        let mut out = CMatrix::zeros(dim);
        for i in 0..dim {
            for j in 0..dim {
                out[(rev_full(i), rev_full(j))] = full[(i, j)];
            }
        }
        MultiTimeState {
            horizon: t,
            slot_dim: d,
            state: DensityMatrix::from_convex_construction(out),
        }
    }
}

/// Builds the exact multi-time joint state
/// `rho^(1:T) = sum_{x_{1:T}} Pr(x_{1:T}) sigma^(x_1) (x) ... (x) sigma^(x_T)`
/// by enumerating all words of length `T` from the stationary start.
///
/// # Errors
/// Returns [`Error::ResourceLimit`] when `d^T` exceeds 4096.
pub fn multi_time_state(hmm: &QuantumHmm, t_horizon: usize) -> Result<MultiTimeState> {
    let d = hmm.output_dim();
    let dim = d.checked_pow(t_horizon as u32).unwrap_or(usize::MAX);
    if t_horizon == 0 || dim > MULTI_TIME_DIM_GUARD {
        return Err(Error::ResourceLimit(format!(
            "multi-time dimension {d}^{t_horizon} exceeds the {MULTI_TIME_DIM_GUARD} guard"
        )));
    }
    let n_sym = hmm.n_symbols();
    let mut acc = CMatrix::zeros(dim);
    let mut word = vec![0usize; t_horizon];
    loop {
        let prob = hmm.word_probability(&word, None);
        if prob > 0.0 {
            let mut prod = hmm.output(word[0]).mat().clone();
            for &x in &word[1..] {
                prod = prod.kron(hmm.output(x).mat());
            }
            acc.add_scaled(&prod, prob);
        }
        // Next word in lexicographic order.
        let mut k = t_horizon;
        loop {
            if k == 0 {
                return Ok(MultiTimeState {
                    horizon: t_horizon,
                    slot_dim: d,
                    state: DensityMatrix::from_convex_construction(acc),
                });
            }
            k -= 1;
            word[k] += 1;
            if word[k] < n_sym {
                break;
            }
            word[k] = 0;
        }
    }
}
