//! Tailored work-extraction protocols.
//!
//! A protocol tailored to a state `rho*` thermalizes any input and
//! produces at most `d` distinct work values, one per eigenvector of
//! `rho*`:
//!
//! ```text
//! w^(n) = <lam_n| H |lam_n> + ln(lam_n)/beta - F_eq
//! ```
//!
//! with outcome probabilities given by the Born rule in the eigenbasis of
//! `rho*`. This module provides the exact work table and outcome
//! distribution, a finite-repetition Monte-Carlo realization of the
//! protocol (as the classical bit chain it is equivalent to in
//! distribution), benchmark strategy variants, and the energy accounting
//! needed for non-degenerate Hamiltonians.

use num_complex::Complex64 as C64;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::belief::{belief_update_work, BeliefState};
use crate::processes::QuantumHmm;
use crate::qmath::{
    eig_hermitian, gibbs_state, pinch, relative_entropy, DensityMatrix, Hamiltonian, EIG_FLOOR,
};
use crate::{Error, Result};

/// Work values closer than this (in nats per `beta`) are merged into one
/// observable outcome.
pub const WORK_MERGE_TOL: f64 = 1e-9;

/// One spectral line of a work table.
#[derive(Debug, Clone)]
pub struct WorkEntry {
    /// Ideal work value in nats per `beta`; `-inf` marks a zero
    /// eigenvalue of the tailored state.
    pub work: f64,
    /// Eigenvalue `lam_n` of the tailored state.
    pub eigenvalue: f64,
    /// Eigenvector `|lam_n>`.
    pub eigenvector: Vec<C64>,
}

/// A group of entries sharing one observable work value.
#[derive(Debug, Clone)]
pub struct MergedWork {
    /// The common work value (entries within [`WORK_MERGE_TOL`] merged).
    pub work: f64,
    /// Indices into [`WorkTable::entries`].
    pub members: Vec<usize>,
}

/// Ideal work values with the spectral data of the tailored state.
#[derive(Debug, Clone)]
pub struct WorkTable {
    /// Per-eigenvector entries, in descending eigenvalue order.
    pub entries: Vec<WorkEntry>,
    /// Distinct observable work values after degeneracy merging, sorted
    /// descending by work value.
    pub merged: Vec<MergedWork>,
    /// Inverse temperature used.
    pub beta: f64,
    /// Equilibrium free energy of the Hamiltonian at `beta`.
    pub f_eq: f64,
}

impl WorkTable {
    /// Born-rule probability of each merged work value for input `sigma`.
    pub fn outcome_probabilities(&self, sigma: &DensityMatrix) -> Vec<f64> {
        self.merged
            .iter()
            .map(|m| {
                m.members
                    .iter()
                    .map(|&n| sigma.mat().expectation(&self.entries[n].eigenvector))
                    .sum()
            })
            .collect()
    }

    /// Expected work `sum_n Pr(n | sigma) w^(n)`; `-inf` if a zero
    /// eigenvalue of the tailored state carries probability mass.
    pub fn expected_work_for(&self, sigma: &DensityMatrix) -> f64 {
        let mut acc = 0.0;
        for e in &self.entries {
            let p = sigma.mat().expectation(&e.eigenvector);
            if e.work.is_infinite() {
                if p > 1e-12 {
                    return f64::NEG_INFINITY;
                }
            } else if p > 0.0 {
                acc += p * e.work;
            }
        }
        acc
    }
}

/// Builds the ideal work table for a protocol tailored to `rho_star`
/// under Hamiltonian `h` at inverse temperature `beta`.
///
/// Eigenvalues of `rho_star` below the spectral floor yield `-inf` work
/// sentinels (kept in the table; the finite-repetition simulation caps
/// them physically).
pub fn ideal_work_table(rho_star: &DensityMatrix, h: &Hamiltonian, beta: f64) -> Result<WorkTable> {
    if rho_star.dim() != h.dim() {
        return Err(Error::DimensionMismatch(format!(
            "state dimension {} vs Hamiltonian dimension {}",
            rho_star.dim(),
            h.dim()
        )));
    }
    let gibbs = gibbs_state(h, beta)?;
    let spec = rho_star.spectral();
    let entries: Vec<WorkEntry> = spec
        .eigenvalues
        .iter()
        .zip(&spec.eigenvectors)
        .map(|(&lam, v)| {
            let energy = h.mat().expectation(v);
            let work = if lam > EIG_FLOOR {
                energy + lam.ln() / beta - gibbs.f_eq
            } else {
                f64::NEG_INFINITY
            };
            WorkEntry { work, eigenvalue: lam.max(0.0), eigenvector: v.clone() }
        })
        .collect();

    // Merge work values within tolerance (scaled by 1/beta).
    let tol = WORK_MERGE_TOL / beta;
    let mut order: Vec<usize> = (0..entries.len()).collect();
    order.sort_by(|&a, &b| entries[b].work.partial_cmp(&entries[a].work).unwrap());
    let mut merged: Vec<MergedWork> = Vec::new();
    for n in order {
        let w = entries[n].work;
        match merged.last_mut() {
            Some(group)
                if (group.work - w).abs() <= tol
                    || (group.work.is_infinite() && w.is_infinite()) =>
            {
                group.members.push(n);
            }
            _ => merged.push(MergedWork { work: w, members: vec![n] }),
        }
    }
    Ok(WorkTable { entries, merged, beta, f_eq: gibbs.f_eq })
}

/// Outcome distribution over merged work values when the protocol
/// tailored to `rho_star` is applied to `sigma`.
///
/// Returns `(work value, probability)` pairs aligned with the merged
/// table.
pub fn work_outcome_distribution(
    rho_star: &DensityMatrix,
    sigma: &DensityMatrix,
    h: &Hamiltonian,
    beta: f64,
) -> Result<Vec<(f64, f64)>> {
    let table = ideal_work_table(rho_star, h, beta)?;
    let probs = table.outcome_probabilities(sigma);
    Ok(table.merged.iter().map(|m| m.work).zip(probs).collect())
}

/// Expected extracted work when a protocol tailored to `rho_star` is
/// applied to `sigma`, in nats per `beta`.
///
/// Equals `sum_n Pr(n) w^(n)`, and also the identity
/// `[D(pinch(sigma) || gamma) - D(sigma || rho*) + D(sigma || pinch(sigma))] / beta`
/// with pinching into the eigenbasis of `rho_star`. Returns `-inf` when
/// `rho_star` has a zero eigenvalue with nonzero overlap with `sigma`.
pub fn expected_work(
    rho_star: &DensityMatrix,
    sigma: &DensityMatrix,
    h: &Hamiltonian,
    beta: f64,
) -> Result<f64> {
    Ok(ideal_work_table(rho_star, h, beta)?.expected_work_for(sigma))
}

// ---------------------------------------------------------------------------
// Finite-repetition protocol simulation
// ---------------------------------------------------------------------------

/// Precomputed gap schedule for the finite-repetition qubit protocol.
///
/// The two-stage protocol (basis rotation, then `M` thermal swaps with a
/// tuned reservoir qubit) is simulated as the classical bit chain it is
/// equal to in distribution: after swap `l` the system is a fresh
/// thermal bit with excited probability `p_1(l) = lam_1 + l dp`, and the
/// battery gains `(x_l - x_{l-1}) (nu(l) - dE)` where
/// `nu(l) = ln(p_0(l)/p_1(l)) / beta` and `dE` is the system's energy
/// gap. The population increment is `dp = (lam_0 - g_0) / M` with `g_0`
/// the thermal ground population, so the final system distribution is
/// thermal.
#[derive(Debug, Clone)]
pub struct ProtocolSchedule {
    /// Descending eigenvalues of the tailored state.
    pub eigenvalues: [f64; 2],
    /// Eigenvectors of the tailored state.
    pub eigenvectors: [Vec<C64>; 2],
    /// Stage-1 battery gain per initial eigenvector index.
    pub stage1: [f64; 2],
    /// Excited-bit probability after each swap (length `M`).
    pub p1: Vec<f64>,
    /// Effective per-swap work coefficient `nu(l) - dE` (length `M`).
    pub nu_eff: Vec<f64>,
    /// Number of swaps whose gap hit the finite-bath cap.
    pub clamp_warnings: usize,
    /// Inverse temperature.
    pub beta: f64,
}

impl ProtocolSchedule {
    /// Builds the schedule for a protocol tailored to `rho_star` under
    /// `h` with `m` thermal swaps.
    ///
    /// A tailored eigenvalue below the spectral floor does not abort the
    /// protocol; the diverging gap is clamped at
    /// `nu_max = ln(M Z e^{beta E_1}) / beta` (a finite-purity bath) and
    /// counted in `clamp_warnings`.
    pub fn new(rho_star: &DensityMatrix, h: &Hamiltonian, beta: f64, m: usize) -> Result<Self> {
        if rho_star.dim() != 2 || h.dim() != 2 {
            return Err(Error::DimensionMismatch(
                "protocol simulation is implemented for qubits".into(),
            ));
        }
        if m < 1 {
            return Err(Error::InvalidParameter("need at least one repetition".into()));
        }
        let spec = rho_star.spectral();
        let (lam0, lam1) = (spec.eigenvalues[0], spec.eigenvalues[1].max(0.0));
        // Energy eigensystem of H, ascending energies.
        let hspec = eig_hermitian(h.mat())?;
        let (e0, e1) = (hspec.eigenvalues[1], hspec.eigenvalues[0]); // descending -> swap
        let de = e1 - e0;
        let z = (-beta * e0).exp() + (-beta * e1).exp();
        let g0 = (-beta * e0).exp() / z;
        let dp = (lam0 - g0) / m as f64;
        let nu_max = (m as f64 * z * (beta * e1).exp()).ln() / beta;

        let mut p1 = Vec::with_capacity(m);
        let mut nu_eff = Vec::with_capacity(m);
        let mut clamps = 0usize;
        for l in 1..=m {
            let p0l = (lam0 - l as f64 * dp).clamp(0.0, 1.0);
            let p1l = 1.0 - p0l;
            let nu = if p1l <= 0.0 || p0l <= 0.0 {
                clamps += 1;
                if p1l <= 0.0 { nu_max } else { -nu_max }
            } else {
                let raw = (p0l / p1l).ln() / beta;
                if raw.abs() > nu_max {
                    clamps += 1;
                    nu_max * raw.signum()
                } else {
                    raw
                }
            };
            p1.push(p1l);
            nu_eff.push(nu - de);
        }

        let stage1 = [
            h.mat().expectation(&spec.eigenvectors[0]) - e0,
            h.mat().expectation(&spec.eigenvectors[1]) - e1,
        ];
        Ok(Self {
            eigenvalues: [lam0, lam1],
            eigenvectors: [spec.eigenvectors[0].clone(), spec.eigenvectors[1].clone()],
            stage1,
            p1,
            nu_eff,
            clamp_warnings: clamps,
            beta,
        })
    }

    /// Born-rule probability that the input starts in eigenvector 0 of
    /// the tailored state.
    pub fn start_probability(&self, sigma: &DensityMatrix) -> f64 {
        sigma.mat().expectation(&self.eigenvectors[0])
    }

    /// Samples one protocol run given the probability `p_start0` of the
    /// initial bit being 0; returns the extracted work only.
    pub fn sample_work(&self, p_start0: f64, rng: &mut impl Rng) -> f64 {
        let mut x_prev = usize::from(rng.gen::<f64>() >= p_start0);
        let mut w = self.stage1[x_prev];
        for (p1l, nu) in self.p1.iter().zip(&self.nu_eff) {
            let x = usize::from(rng.gen::<f64>() < *p1l);
            if x != x_prev {
                w += (x as f64 - x_prev as f64) * nu;
                x_prev = x;
            }
        }
        w
    }

    /// Samples a full run with the swap trajectory recorded.
    fn sample_run(&self, sigma: &DensityMatrix, seed: u64, stream: u64) -> ProtocolRun {
        let mut rng = crate::rng::seeded(seed, stream);
        let p0 = self.start_probability(sigma);
        let initial = usize::from(rng.gen::<f64>() >= p0);
        let mut x_prev = initial;
        let mut w = self.stage1[initial];
        let mut trajectory = Vec::with_capacity(self.p1.len());
        for (p1l, nu) in self.p1.iter().zip(&self.nu_eff) {
            let x = usize::from(rng.gen::<f64>() < *p1l);
            w += (x as f64 - x_prev as f64) * nu;
            x_prev = x;
            trajectory.push(x as u8);
        }
        let pf1 = *self.p1.last().unwrap();
        let final_system_state = DensityMatrix::mixture(&[
            (1.0 - pf1, &DensityMatrix::pure(&[C64::new(1.0, 0.0), C64::new(0.0, 0.0)])),
            (pf1, &DensityMatrix::pure(&[C64::new(0.0, 0.0), C64::new(1.0, 0.0)])),
        ]);
        ProtocolRun {
            sampled_work: w,
            initial_index: initial,
            trajectory,
            final_system_state,
            seed,
            stream,
            clamp_warnings: self.clamp_warnings,
        }
    }
}

/// One sampled realization of the finite-repetition protocol.
#[derive(Debug, Clone)]
pub struct ProtocolRun {
    /// Extracted work in nats per `beta`.
    pub sampled_work: f64,
    /// Initial eigenvector index drawn from the Born rule.
    pub initial_index: usize,
    /// Per-swap system bit after each repetition.
    pub trajectory: Vec<u8>,
    /// Final system distribution in the energy eigenbasis (thermal by
    /// construction of the gap schedule).
    pub final_system_state: DensityMatrix,
    /// RNG seed of this run, for bit-exact replay.
    pub seed: u64,
    /// RNG stream of this run.
    pub stream: u64,
    /// Number of clamped (finite-bath-capped) swap gaps in the schedule.
    pub clamp_warnings: usize,
}

/// Simulates one run of the protocol tailored to `rho_star` applied to
/// `sigma`, with `m` thermal swaps. Bit-exact replayable from the seed.
pub fn simulate_protocol(
    sigma: &DensityMatrix,
    rho_star: &DensityMatrix,
    h: &Hamiltonian,
    m: usize,
    beta: f64,
    seed: u64,
) -> Result<ProtocolRun> {
    let schedule = ProtocolSchedule::new(rho_star, h, beta, m)?;
    Ok(schedule.sample_run(sigma, seed, 0))
}

// ---------------------------------------------------------------------------
// Energy accounting for non-degenerate Hamiltonians
// ---------------------------------------------------------------------------

/// External-energy account of the basis-rotation stage.
#[derive(Debug, Clone, Copy)]
pub struct EnergyAccount {
    /// External energy drawn by the rotation:
    /// `tr(pinch(sigma) H) - tr(sigma H)`.
    pub delta_u: f64,
    /// Net work after paying back `delta_u`; equals
    /// `[D(sigma || gamma) - D(sigma || rho*)] / beta`.
    pub net_work: f64,
}

/// Energy accounting when the tailored protocol runs under a
/// non-degenerate Hamiltonian: the rotation into the eigenbasis of
/// `rho_star` costs `delta_u` of external energy, and the net work
/// recovers the two-relative-entropy form.
pub fn nondegenerate_energy_account(
    sigma: &DensityMatrix,
    rho_star: &DensityMatrix,
    h: &Hamiltonian,
    beta: f64,
) -> Result<EnergyAccount> {
    let spec = rho_star.spectral();
    let pinched = pinch(sigma, &spec.eigenvectors)?;
    let delta_u = (pinched.mat().mul(h.mat()).trace() - sigma.mat().mul(h.mat()).trace()).re;
    let gross = expected_work(rho_star, sigma, h, beta)?;
    Ok(EnergyAccount { delta_u, net_work: gross - delta_u })
}

// ---------------------------------------------------------------------------
// Benchmark strategy variants
// ---------------------------------------------------------------------------

/// Strategy variants whose asymptotic work rates are compared.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ApproachVariant {
    /// Belief-tracking agent tailoring to the expected state.
    Quantum,
    /// Belief-tracking agent tailoring to the dephased (classical)
    /// expected state.
    Classical,
    /// Memoryless agent tailoring to the stationary output state.
    Memoryless,
    /// Agent betting on the most likely output state alone.
    Overcommitment,
}

/// Parameters for the rate computations.
#[derive(Debug, Clone, Copy)]
pub struct ApproachParams {
    /// Steps of the long-run simulation (classical / overcommitment
    /// variants).
    pub steps: usize,
    /// Burn-in steps discarded before averaging.
    pub burn_in: usize,
    /// RNG seed.
    pub seed: u64,
    /// Thermal-swap count per extraction; bounds the bath purity and
    /// caps the overcommitment penalty at `-ln(M Z e^{beta E_1}) / beta`.
    pub m_interactions: usize,
}

impl Default for ApproachParams {
    fn default() -> Self {
        Self { steps: 200_000, burn_in: 2_000, seed: 7, m_interactions: 10_000 }
    }
}

/// Asymptotic work rate (nats per `beta` per step) of a strategy variant
/// on the perturbed coin.
///
/// - `Memoryless` and the memory-apathetic `Quantum` regime use the
///   closed form `D(xi_0 || gamma) / beta` (identical arithmetic, so the
///   memory advantage is exactly zero in the apathetic regime).
/// - The memory-advantageous `Quantum` regime averages the attractor
///   rates under the two-state recurrent belief structure.
/// - `Classical` and `Overcommitment` have no finite recurrent structure
///   and are estimated by a seeded long-run simulation of the joint
///   (latent, belief) chain, averaging the conditional expected work.
pub fn approach_rates(
    hmm: &QuantumHmm,
    variant: ApproachVariant,
    beta: f64,
    params: &ApproachParams,
) -> Result<f64> {
    let h = Hamiltonian::degenerate(hmm.output_dim(), 0.0);
    let gamma = gibbs_state(&h, beta)?.state;
    match variant {
        ApproachVariant::Memoryless => {
            Ok(relative_entropy(&hmm.stationary_output(), &gamma) / beta)
        }
        ApproachVariant::Quantum => {
            let analysis = crate::belief::classify_return_map(hmm, beta)?;
            if analysis.regime == crate::belief::Regime::MemoryApathetic {
                return Ok(relative_entropy(&hmm.stationary_output(), &gamma) / beta);
            }
            // Average D(xi_eta || gamma) over the recurrent two-point
            // structure; the stationary weights follow from the largest
            // eigenvalues of the two attractor expected states.
            let attractors: Vec<f64> = analysis
                .fixed_points
                .iter()
                .filter(|fp| fp.stable)
                .map(|fp| fp.epsilon)
                .collect();
            if attractors.is_empty() {
                return Ok(relative_entropy(&hmm.stationary_output(), &gamma) / beta);
            }
            let states: Vec<(f64, DensityMatrix)> = attractors
                .iter()
                .map(|&eps| {
                    let eta = BeliefState::from_epsilon(eps);
                    let xi = crate::belief::expected_state(&eta, hmm).state;
                    let lam_plus = xi.spectral().eigenvalues[0];
                    (lam_plus, xi)
                })
                .collect();
            if states.len() == 1 {
                return Ok(relative_entropy(&states[0].1, &gamma) / beta);
            }
            // Two attractors: the chain leaves state xi with probability
            // lam_plus(xi), so the stationary weight of xi is
            // proportional to the other state's largest eigenvalue.
            let (l0, l1) = (states[0].0, states[1].0);
            let rate = (l1 * relative_entropy(&states[0].1, &gamma)
                + l0 * relative_entropy(&states[1].1, &gamma))
                / (l0 + l1)
                / beta;
            Ok(rate)
        }
        ApproachVariant::Classical => simulate_rate(
            hmm,
            beta,
            params,
            |xi| {
                // Dephase the expected state in the computational basis.
                let basis = vec![
                    vec![C64::new(1.0, 0.0), C64::new(0.0, 0.0)],
                    vec![C64::new(0.0, 0.0), C64::new(1.0, 0.0)],
                ];
                pinch(xi, &basis)
            },
            false,
        ),
        ApproachVariant::Overcommitment => simulate_rate(
            hmm,
            beta,
            params,
            |xi| {
                // Bet on the dominant eigenvector alone.
                let spec = xi.spectral();
                Ok(DensityMatrix::pure(&spec.eigenvectors[0]))
            },
            true,
        ),
    }
}

/// Long-run simulation of the joint (latent state, belief) chain under a
/// tailoring rule, averaging the conditional expected work per step.
fn simulate_rate(
    hmm: &QuantumHmm,
    beta: f64,
    params: &ApproachParams,
    tailor: impl Fn(&DensityMatrix) -> Result<DensityMatrix>,
    cap_infinite: bool,
) -> Result<f64> {
    let h = Hamiltonian::degenerate(hmm.output_dim(), 0.0);
    let z = hmm.output_dim() as f64;
    // Finite-bath cap on the work value of a zero tailored eigenvalue.
    let w_floor = -((params.m_interactions as f64) * z).ln() / beta;
    let mut rng: ChaCha8Rng = crate::rng::seeded(params.seed, 0);

    // Latent state from the stationary distribution.
    let mut latent = sample_index(hmm.stationary(), &mut rng);
    let mut eta = BeliefState::new(hmm.stationary().to_vec())?;
    // Break the symmetric start so regimes with unstable symmetric fixed
    // points leave them.
    eta = eta.perturbed(1e-3);

    let mut acc = 0.0;
    let mut counted = 0usize;
    for step in 0..params.steps {
        let xi = crate::belief::expected_state(&eta, hmm).state;
        let rho_star = tailor(&xi)?;
        let table = ideal_work_table(&rho_star, &h, beta)?;
        // Conditional expected work given the belief, with the
        // finite-bath cap replacing -inf sentinels.
        if step >= params.burn_in {
            let probs = table.outcome_probabilities(&xi);
            let mut w = 0.0;
            for (mw, p) in table.merged.iter().zip(&probs) {
                let val = if mw.work.is_infinite() {
                    if cap_infinite {
                        w_floor
                    } else {
                        mw.work
                    }
                } else {
                    mw.work
                };
                if *p > 0.0 {
                    w += p * val;
                }
            }
            acc += w;
            counted += 1;
        }
        // True emission from the latent chain.
        let t_row: Vec<f64> = (0..hmm.n_symbols())
            .map(|x| (0..hmm.n_states()).map(|sp| hmm.transition(x)[(latent, sp)]).sum())
            .collect();
        let x = sample_index(&t_row, &mut rng);
        let next_probs: Vec<f64> =
            (0..hmm.n_states()).map(|sp| hmm.transition(x)[(latent, sp)]).collect();
        latent = sample_index(&normalized(&next_probs), &mut rng);
        // Work outcome from the emitted state in the tailored eigenbasis.
        let outcome_probs: Vec<f64> = table
            .merged
            .iter()
            .map(|mw| {
                mw.members
                    .iter()
                    .map(|&n| hmm.output(x).mat().expectation(&table.entries[n].eigenvector))
                    .sum()
            })
            .collect();
        let o = sample_index(&outcome_probs, &mut rng);
        eta = match belief_update_work(&eta, hmm, &table, o) {
            Ok(next) => next,
            // Numerically impossible outcome under the belief: restart
            // from the broken-symmetry stationary belief.
            Err(_) => BeliefState::new(hmm.stationary().to_vec())?.perturbed(1e-3),
        };
    }
    Ok(acc / counted.max(1) as f64)
}

fn sample_index(probs: &[f64], rng: &mut impl Rng) -> usize {
    let u: f64 = rng.gen::<f64>() * probs.iter().sum::<f64>();
    let mut acc = 0.0;
    for (i, p) in probs.iter().enumerate() {
        acc += p;
        if u < acc {
            return i;
        }
    }
    probs.len() - 1
}

fn normalized(v: &[f64]) -> Vec<f64> {
    let s: f64 = v.iter().sum();
    if s <= 0.0 {
        return vec![1.0 / v.len() as f64; v.len()];
    }
    v.iter().map(|x| x / s).collect()
}
