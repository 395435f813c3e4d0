//! Small-dimension Hermitian linear algebra and information-theoretic
//! functionals.
//!
//! Everything here operates on dense complex matrices of modest dimension
//! (qubits and small tensor powers of qubits). Eigendecomposition uses a
//! closed form for 2x2 matrices and cyclic Jacobi sweeps otherwise, with a
//! deterministic eigenvector phase convention (largest-magnitude component
//! made real positive) so that downstream belief updates are reproducible
//! across runs.
//!
//! Conventions:
//! - energies are in units of `1/beta`; entropic quantities are in nats;
//! - eigenvalues below [`EIG_FLOOR`] are treated as zero inside
//!   logarithms: they contribute nothing to entropy and count as support
//!   violations in relative entropy (which then returns `+inf`).

use num_complex::Complex64 as C64;

use crate::{Error, Result};

/// Eigenvalue floor below which a spectral weight is treated as zero in
/// logarithms.
pub const EIG_FLOOR: f64 = 1e-12;

/// Entrywise tolerance for Hermiticity and trace checks.
pub const HERM_TOL: f64 = 1e-12;

/// Tolerance for orthonormality checks on measurement bases.
pub const ORTHO_TOL: f64 = 1e-10;

// ---------------------------------------------------------------------------
// Dense complex matrices
// ---------------------------------------------------------------------------

/// Dense square complex matrix in row-major order.
#[derive(Debug, Clone, PartialEq)]
pub struct CMatrix {
    dim: usize,
    data: Vec<C64>,
}

impl CMatrix {
    /// Zero matrix of dimension `dim`.
    pub fn zeros(dim: usize) -> Self {
        Self { dim, data: vec![C64::new(0.0, 0.0); dim * dim] }
    }

    /// Identity matrix of dimension `dim`.
    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            m[(i, i)] = C64::new(1.0, 0.0);
        }
        m
    }

    /// Builds a matrix from a row-major vector of entries.
    pub fn from_vec(dim: usize, data: Vec<C64>) -> Result<Self> {
        if data.len() != dim * dim {
            return Err(Error::DimensionMismatch(format!(
                "expected {} entries for a {dim}x{dim} matrix, got {}",
                dim * dim,
                data.len()
            )));
        }
        Ok(Self { dim, data })
    }

    /// Builds a matrix from real row-major entries.
    pub fn from_real(dim: usize, data: &[f64]) -> Result<Self> {
        Self::from_vec(dim, data.iter().map(|&x| C64::new(x, 0.0)).collect())
    }

    /// Diagonal matrix from real entries.
    pub fn diag(entries: &[f64]) -> Self {
        let mut m = Self::zeros(entries.len());
        for (i, &x) in entries.iter().enumerate() {
            m[(i, i)] = C64::new(x, 0.0);
        }
        m
    }

    /// Rank-1 projector `|v><v|` (the vector need not be normalized;
    /// callers that want a projector should pass a unit vector).
    pub fn outer(v: &[C64]) -> Self {
        let dim = v.len();
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            for j in 0..dim {
                m[(i, j)] = v[i] * v[j].conj();
            }
        }
        m
    }

    /// Matrix dimension.
    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Flat row-major entries.
    pub fn data(&self) -> &[C64] {
        &self.data
    }

    /// Matrix product `self * other`.
    pub fn mul(&self, other: &CMatrix) -> CMatrix {
        assert_eq!(self.dim, other.dim, "matrix dimension mismatch");
        let d = self.dim;
        let mut out = CMatrix::zeros(d);
        for i in 0..d {
            for k in 0..d {
                let a = self[(i, k)];
                if a.norm_sqr() == 0.0 {
                    continue;
                }
                for j in 0..d {
                    out[(i, j)] += a * other[(k, j)];
                }
            }
        }
        out
    }

    /// Matrix-vector product.
    pub fn mul_vec(&self, v: &[C64]) -> Vec<C64> {
        let d = self.dim;
        let mut out = vec![C64::new(0.0, 0.0); d];
        for i in 0..d {
            let mut acc = C64::new(0.0, 0.0);
            for j in 0..d {
                acc += self[(i, j)] * v[j];
            }
            out[i] = acc;
        }
        out
    }

    /// Conjugate transpose.
    pub fn dagger(&self) -> CMatrix {
        let d = self.dim;
        let mut out = CMatrix::zeros(d);
        for i in 0..d {
            for j in 0..d {
                out[(j, i)] = self[(i, j)].conj();
            }
        }
        out
    }

    /// Trace.
    pub fn trace(&self) -> C64 {
        (0..self.dim).map(|i| self[(i, i)]).sum()
    }

    /// Entrywise sum `self + other`.
    pub fn add(&self, other: &CMatrix) -> CMatrix {
        assert_eq!(self.dim, other.dim);
        let data = self.data.iter().zip(&other.data).map(|(a, b)| a + b).collect();
        CMatrix { dim: self.dim, data }
    }

    /// Entrywise difference `self - other`.
    pub fn sub(&self, other: &CMatrix) -> CMatrix {
        assert_eq!(self.dim, other.dim);
        let data = self.data.iter().zip(&other.data).map(|(a, b)| a - b).collect();
        CMatrix { dim: self.dim, data }
    }

    /// Scalar multiple.
    pub fn scale(&self, s: f64) -> CMatrix {
        CMatrix { dim: self.dim, data: self.data.iter().map(|a| a * s).collect() }
    }

    /// Adds `s * other` in place.
    pub fn add_scaled(&mut self, other: &CMatrix, s: f64) {
        assert_eq!(self.dim, other.dim);
        for (a, b) in self.data.iter_mut().zip(&other.data) {
            *a += b * s;
        }
    }

    /// Kronecker product `self (x) other`.
    pub fn kron(&self, other: &CMatrix) -> CMatrix {
        let (da, db) = (self.dim, other.dim);
        let d = da * db;
        let mut out = CMatrix::zeros(d);
        for i in 0..da {
            for j in 0..da {
                let a = self[(i, j)];
                if a.norm_sqr() == 0.0 {
                    continue;
                }
                for k in 0..db {
                    for l in 0..db {
                        out[(i * db + k, j * db + l)] = a * other[(k, l)];
                    }
                }
            }
        }
        out
    }

    /// Largest absolute entry of `self - self^dagger`.
    pub fn hermiticity_defect(&self) -> f64 {
        let d = self.dim;
        let mut worst: f64 = 0.0;
        for i in 0..d {
            for j in i..d {
                let diff = self[(i, j)] - self[(j, i)].conj();
                worst = worst.max(diff.norm());
            }
        }
        worst
    }

    /// Largest absolute entry of `self - other`.
    pub fn max_abs_diff(&self, other: &CMatrix) -> f64 {
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    /// `<u| self |v>`.
    pub fn sandwich(&self, u: &[C64], v: &[C64]) -> C64 {
        let av = self.mul_vec(v);
        u.iter().zip(av).map(|(ui, avi)| ui.conj() * avi).sum()
    }

    /// Real part of the expectation `<v| self |v>`.
    pub fn expectation(&self, v: &[C64]) -> f64 {
        self.sandwich(v, v).re
    }
}

impl std::ops::Index<(usize, usize)> for CMatrix {
    type Output = C64;
    fn index(&self, (i, j): (usize, usize)) -> &C64 {
        &self.data[i * self.dim + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for CMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut C64 {
        &mut self.data[i * self.dim + j]
    }
}

/// Inner product `<u|v>` of complex vectors.
pub fn inner(u: &[C64], v: &[C64]) -> C64 {
    u.iter().zip(v).map(|(a, b)| a.conj() * b).sum()
}

/// Normalizes a complex vector in place; returns its original norm.
pub fn normalize(v: &mut [C64]) -> f64 {
    let n = v.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt();
    if n > 0.0 {
        for x in v.iter_mut() {
            *x /= n;
        }
    }
    n
}

// ---------------------------------------------------------------------------
// Domain types
// ---------------------------------------------------------------------------

/// A density matrix: Hermitian, positive semidefinite, unit trace.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    mat: CMatrix,
}

impl DensityMatrix {
    /// Validates and wraps a matrix as a quantum state.
    ///
    /// Requires Hermiticity within `1e-12` entrywise, unit trace within
    /// `1e-12`, and eigenvalues at or above `-1e-12`.
    pub fn new(mat: CMatrix) -> Result<Self> {
        let defect = mat.hermiticity_defect();
        if defect > HERM_TOL {
            return Err(Error::NotDensityMatrix(format!(
                "Hermiticity defect {defect:.3e} exceeds {HERM_TOL:.0e}"
            )));
        }
        let tr = mat.trace();
        if (tr.re - 1.0).abs() > 1e-10 || tr.im.abs() > 1e-10 {
            return Err(Error::NotDensityMatrix(format!(
                "trace {tr} differs from 1 beyond tolerance"
            )));
        }
        let spec = eig_hermitian(&mat)?;
        if let Some(&min) = spec.eigenvalues.last() {
            if min < -1e-9 {
                return Err(Error::NotDensityMatrix(format!(
                    "negative eigenvalue {min:.3e}"
                )));
            }
        }
        Ok(Self { mat })
    }

    /// Wraps a matrix that is valid by construction (e.g. a convex
    /// mixture of already-validated states). Hermitizes and renormalizes
    /// the trace to absorb floating-point drift.
    pub fn from_convex_construction(mat: CMatrix) -> Self {
        let herm = mat.add(&mat.dagger()).scale(0.5);
        let tr = herm.trace().re;
        Self { mat: herm.scale(1.0 / tr) }
    }

    /// Pure state `|v><v|` from a (normalized) state vector.
    pub fn pure(v: &[C64]) -> Self {
        let mut v = v.to_vec();
        normalize(&mut v);
        Self { mat: CMatrix::outer(&v) }
    }

    /// The maximally mixed state of dimension `dim`.
    pub fn maximally_mixed(dim: usize) -> Self {
        Self { mat: CMatrix::identity(dim).scale(1.0 / dim as f64) }
    }

    /// Underlying matrix.
    pub fn mat(&self) -> &CMatrix {
        &self.mat
    }

    /// Dimension.
    pub fn dim(&self) -> usize {
        self.mat.dim()
    }

    /// Spectral decomposition with descending eigenvalues.
    pub fn spectral(&self) -> SpectralDecomp {
        eig_hermitian(&self.mat).expect("density matrix is Hermitian by construction")
    }

    /// Convex mixture `sum_i w_i rho_i`; weights must sum to 1.
    pub fn mixture(parts: &[(f64, &DensityMatrix)]) -> Self {
        let dim = parts[0].1.dim();
        let mut acc = CMatrix::zeros(dim);
        for (w, rho) in parts {
            acc.add_scaled(rho.mat(), *w);
        }
        Self::from_convex_construction(acc)
    }
}

/// A Hamiltonian: Hermitian matrix with entries in units of `1/beta`.
#[derive(Debug, Clone, PartialEq)]
pub struct Hamiltonian {
    mat: CMatrix,
}

impl Hamiltonian {
    /// Validates Hermiticity within `1e-12` entrywise.
    pub fn new(mat: CMatrix) -> Result<Self> {
        let defect = mat.hermiticity_defect();
        if defect > HERM_TOL {
            return Err(Error::NotHermitian(defect));
        }
        Ok(Self { mat })
    }

    /// Fully degenerate Hamiltonian `omega * I` of dimension `dim`.
    pub fn degenerate(dim: usize, omega: f64) -> Self {
        Self { mat: CMatrix::identity(dim).scale(omega) }
    }

    /// Diagonal Hamiltonian with the given energies.
    pub fn diagonal(energies: &[f64]) -> Self {
        Self { mat: CMatrix::diag(energies) }
    }

    /// Underlying matrix.
    pub fn mat(&self) -> &CMatrix {
        &self.mat
    }

    /// Dimension.
    pub fn dim(&self) -> usize {
        self.mat.dim()
    }
}

/// Spectral decomposition of a Hermitian matrix.
#[derive(Debug, Clone)]
pub struct SpectralDecomp {
    /// Eigenvalues in descending order.
    pub eigenvalues: Vec<f64>,
    /// Orthonormal eigenvectors; `eigenvectors[k]` pairs with
    /// `eigenvalues[k]`. Phase convention: the largest-magnitude
    /// component of each vector is real and positive.
    pub eigenvectors: Vec<Vec<C64>>,
}

impl SpectralDecomp {
    /// Reconstructs `sum_k lambda_k |v_k><v_k|`.
    pub fn reconstruct(&self) -> CMatrix {
        let dim = self.eigenvectors[0].len();
        let mut acc = CMatrix::zeros(dim);
        for (l, v) in self.eigenvalues.iter().zip(&self.eigenvectors) {
            acc.add_scaled(&CMatrix::outer(v), *l);
        }
        acc
    }
}

// ---------------------------------------------------------------------------
// Eigendecomposition
// ---------------------------------------------------------------------------

/// Applies the deterministic phase convention in place: the
/// largest-magnitude component becomes real positive.
fn fix_phase(v: &mut [C64]) {
    let mut best = 0usize;
    let mut best_mag = -1.0;
    for (i, x) in v.iter().enumerate() {
        let m = x.norm();
        if m > best_mag + 1e-12 {
            best_mag = m;
            best = i;
        }
    }
    let pivot = v[best];
    let mag = pivot.norm();
    if mag > 0.0 {
        let phase = pivot.conj() / mag;
        for x in v.iter_mut() {
            *x *= phase;
        }
    }
}

/// Closed-form eigendecomposition of a 2x2 Hermitian matrix.
fn eig2(m: &CMatrix) -> SpectralDecomp {
    let a = m[(0, 0)].re;
    let d = m[(1, 1)].re;
    let b = m[(0, 1)];
    let half_sum = 0.5 * (a + d);
    let half_diff = 0.5 * (a - d);
    let disc = (half_diff * half_diff + b.norm_sqr()).sqrt();
    let lam_hi = half_sum + disc;
    let lam_lo = half_sum - disc;

    let vec_for = |lam: f64| -> Vec<C64> {
        // Two algebraically equivalent null-space expressions; pick the
        // better-conditioned one.
        let c1 = [b, C64::new(lam - a, 0.0)];
        let c2 = [C64::new(lam - d, 0.0), b.conj()];
        let n1 = c1[0].norm_sqr() + c1[1].norm_sqr();
        let n2 = c2[0].norm_sqr() + c2[1].norm_sqr();
        let mut v = if n1 >= n2 { c1.to_vec() } else { c2.to_vec() };
        if normalize(&mut v) < 1e-300 {
            // Degenerate (diagonal) case: fall back to computational basis.
            v = if lam == lam_hi && a >= d || lam == lam_lo && a < d {
                vec![C64::new(1.0, 0.0), C64::new(0.0, 0.0)]
            } else {
                vec![C64::new(0.0, 0.0), C64::new(1.0, 0.0)]
            };
        }
        fix_phase(&mut v);
        v
    };

    if disc < 1e-15 {
        // Fully degenerate: return the computational basis.
        return SpectralDecomp {
            eigenvalues: vec![lam_hi, lam_lo],
            eigenvectors: vec![
                vec![C64::new(1.0, 0.0), C64::new(0.0, 0.0)],
                vec![C64::new(0.0, 0.0), C64::new(1.0, 0.0)],
            ],
        };
    }

    SpectralDecomp {
        eigenvalues: vec![lam_hi, lam_lo],
        eigenvectors: vec![vec_for(lam_hi), vec_for(lam_lo)],
    }
}

/// Eigendecomposition of a Hermitian matrix.
///
/// Uses the closed form for dimension 2 and cyclic Jacobi sweeps with
/// complex rotations for larger dimensions (intended for `dim <= 64`;
/// larger inputs are accepted but slow). Eigenvalues are returned in
/// descending order with orthonormal eigenvectors under the deterministic
/// phase convention.
///
/// # Errors
/// Returns [`Error::NotHermitian`] if the input deviates from Hermiticity
/// beyond tolerance.
pub fn eig_hermitian(m: &CMatrix) -> Result<SpectralDecomp> {
    let defect = m.hermiticity_defect();
    let scale = m.data().iter().map(|x| x.norm()).fold(0.0, f64::max).max(1.0);
    if defect > HERM_TOL * scale.max(1.0) * 10.0 {
        return Err(Error::NotHermitian(defect));
    }
    if m.dim() == 1 {
        return Ok(SpectralDecomp {
            eigenvalues: vec![m[(0, 0)].re],
            eigenvectors: vec![vec![C64::new(1.0, 0.0)]],
        });
    }
    if m.dim() == 2 {
        return Ok(eig2(m));
    }
    Ok(jacobi_hermitian(m))
}

/// Cyclic Jacobi diagonalization for Hermitian matrices.
fn jacobi_hermitian(m: &CMatrix) -> SpectralDecomp {
    let d = m.dim();
    // Work on a Hermitized copy to keep the iteration self-consistent.
    let mut a = m.add(&m.dagger()).scale(0.5);
    let mut q = CMatrix::identity(d);
    let scale = a.data().iter().map(|x| x.norm()).fold(0.0, f64::max).max(1e-300);
    let target = 1e-14 * scale;

    for _sweep in 0..100 {
        let mut off: f64 = 0.0;
        for p in 0..d {
            for r in (p + 1)..d {
                off = off.max(a[(p, r)].norm());
            }
        }
        if off < target {
            break;
        }
        for p in 0..d {
            for r in (p + 1)..d {
                let apr = a[(p, r)];
                if apr.norm() < target * 1e-2 {
                    continue;
                }
                // Diagonalize the 2x2 block via the closed form; its
                // eigenvector matrix is the rotation.
                let mut blk = CMatrix::zeros(2);
                blk[(0, 0)] = a[(p, p)];
                blk[(0, 1)] = apr;
                blk[(1, 0)] = apr.conj();
                blk[(1, 1)] = a[(r, r)];
                let sd = eig2(&blk);
                let (u0, u1) = (&sd.eigenvectors[0], &sd.eigenvectors[1]);
                // Columns of the 2x2 unitary V: V = [u0 u1].
                let (v00, v10, v01, v11) = (u0[0], u0[1], u1[0], u1[1]);
                // A <- V^dag A V restricted to rows/cols p, r.
                for j in 0..d {
                    let (x, y) = (a[(p, j)], a[(r, j)]);
                    a[(p, j)] = v00.conj() * x + v10.conj() * y;
                    a[(r, j)] = v01.conj() * x + v11.conj() * y;
                }
                for i in 0..d {
                    let (x, y) = (a[(i, p)], a[(i, r)]);
                    a[(i, p)] = x * v00 + y * v10;
                    a[(i, r)] = x * v01 + y * v11;
                }
                for i in 0..d {
                    let (x, y) = (q[(i, p)], q[(i, r)]);
                    q[(i, p)] = x * v00 + y * v10;
                    q[(i, r)] = x * v01 + y * v11;
                }
            }
        }
    }

    let mut pairs: Vec<(f64, Vec<C64>)> = (0..d)
        .map(|k| {
            let mut v: Vec<C64> = (0..d).map(|i| q[(i, k)]).collect();
            normalize(&mut v);
            fix_phase(&mut v);
            (a[(k, k)].re, v)
        })
        .collect();
    pairs.sort_by(|x, y| y.0.partial_cmp(&x.0).unwrap());
    SpectralDecomp {
        eigenvalues: pairs.iter().map(|p| p.0).collect(),
        eigenvectors: pairs.into_iter().map(|p| p.1).collect(),
    }
}

// ---------------------------------------------------------------------------
// Thermodynamic functionals
// ---------------------------------------------------------------------------

/// A Gibbs state together with its equilibrium free energy.
#[derive(Debug, Clone)]
pub struct GibbsState {
    /// The thermal state `exp(-beta H) / Z`.
    pub state: DensityMatrix,
    /// Equilibrium free energy `-ln(Z) / beta` (units of `1/beta`).
    pub f_eq: f64,
}

/// Computes the Gibbs state `exp(-beta H) / Z` and the equilibrium free
/// energy `F_eq = -ln(Z)/beta`.
///
/// # Errors
/// Returns [`Error::InvalidParameter`] for `beta <= 0`.
pub fn gibbs_state(h: &Hamiltonian, beta: f64) -> Result<GibbsState> {
    if !(beta > 0.0) {
        return Err(Error::InvalidParameter(format!("beta must be positive, got {beta}")));
    }
    let spec = eig_hermitian(h.mat())?;
    // Shift by the ground energy for numerical stability; undo in F_eq.
    let e_min = spec.eigenvalues.iter().cloned().fold(f64::INFINITY, f64::min);
    let weights: Vec<f64> = spec.eigenvalues.iter().map(|&e| (-beta * (e - e_min)).exp()).collect();
    let z_shifted: f64 = weights.iter().sum();
    let mut acc = CMatrix::zeros(h.dim());
    for (w, v) in weights.iter().zip(&spec.eigenvectors) {
        acc.add_scaled(&CMatrix::outer(v), w / z_shifted);
    }
    let f_eq = e_min - z_shifted.ln() / beta;
    Ok(GibbsState { state: DensityMatrix::from_convex_construction(acc), f_eq })
}

/// Quantum relative entropy `D(rho || sigma) = tr(rho ln rho) - tr(rho ln sigma)`
/// in nats.
///
/// Returns `+inf` when the support of `rho` is not contained in the
/// support of `sigma` (within the eigenvalue floor); this is a sentinel,
/// not an error.
pub fn relative_entropy(rho: &DensityMatrix, sigma: &DensityMatrix) -> f64 {
    assert_eq!(rho.dim(), sigma.dim(), "state dimension mismatch");
    let sr = rho.spectral();
    let ss = sigma.spectral();

    let mut d = 0.0;
    for (i, &li) in sr.eigenvalues.iter().enumerate() {
        if li <= EIG_FLOOR {
            continue;
        }
        d += li * li.ln();
        let vi = &sr.eigenvectors[i];
        let mut lost = li; // support mass of |v_i> falling outside supp(sigma)
        for (j, &mj) in ss.eigenvalues.iter().enumerate() {
            let overlap = inner(&ss.eigenvectors[j], vi).norm_sqr();
            if mj > EIG_FLOOR {
                d -= li * overlap * mj.ln();
                lost -= li * overlap;
            }
        }
        if lost > 1e-9 {
            return f64::INFINITY;
        }
    }
    // Clamp tiny negative round-off; D >= 0 for states.
    if d < 0.0 && d > -1e-9 {
        0.0
    } else {
        d
    }
}

/// Von Neumann entropy `-sum_i lambda_i ln lambda_i` in nats, with
/// `0 ln 0 = 0`.
pub fn von_neumann_entropy(rho: &DensityMatrix) -> f64 {
    rho.spectral()
        .eigenvalues
        .iter()
        .filter(|&&l| l > EIG_FLOOR)
        .map(|&l| -l * l.ln())
        .sum()
}

/// Pinches (dephases) `rho` into the given orthonormal basis:
/// `sum_i |b_i><b_i| rho |b_i><b_i|`.
///
/// # Errors
/// Returns [`Error::NotOrthonormal`] if the basis vectors are not
/// orthonormal within `1e-10`.
pub fn pinch(rho: &DensityMatrix, basis: &[Vec<C64>]) -> Result<DensityMatrix> {
    check_orthonormal(basis, rho.dim())?;
    let mut acc = CMatrix::zeros(rho.dim());
    for b in basis {
        let p = rho.mat().expectation(b);
        acc.add_scaled(&CMatrix::outer(b), p);
    }
    Ok(DensityMatrix::from_convex_construction(acc))
}

/// Checks that `basis` is a complete orthonormal set for dimension `dim`.
pub fn check_orthonormal(basis: &[Vec<C64>], dim: usize) -> Result<()> {
    if basis.len() != dim {
        return Err(Error::DimensionMismatch(format!(
            "basis has {} vectors for dimension {dim}",
            basis.len()
        )));
    }
    let mut worst: f64 = 0.0;
    for (i, u) in basis.iter().enumerate() {
        if u.len() != dim {
            return Err(Error::DimensionMismatch(format!(
                "basis vector {i} has length {} for dimension {dim}",
                u.len()
            )));
        }
        for (j, v) in basis.iter().enumerate() {
            let g = inner(u, v);
            let target = if i == j { 1.0 } else { 0.0 };
            worst = worst.max((g - C64::new(target, 0.0)).norm());
        }
    }
    if worst > ORTHO_TOL {
        return Err(Error::NotOrthonormal(worst));
    }
    Ok(())
}

/// Depolarizing channel `(1 - eps) rho + eps I/d`.
///
/// # Errors
/// Returns [`Error::InvalidParameter`] for `eps` outside `[0, 1]`.
pub fn depolarize(rho: &DensityMatrix, eps: f64) -> Result<DensityMatrix> {
    if !(0.0..=1.0).contains(&eps) {
        return Err(Error::InvalidParameter(format!(
            "depolarizing strength must lie in [0, 1], got {eps}"
        )));
    }
    let d = rho.dim();
    let mut acc = rho.mat().scale(1.0 - eps);
    acc.add_scaled(&CMatrix::identity(d), eps / d as f64);
    Ok(DensityMatrix::from_convex_construction(acc))
}

// ---------------------------------------------------------------------------
// Bloch parametrization (qubits)
// ---------------------------------------------------------------------------

/// Pure qubit state `cos(theta/2)|0> + e^{i phi} sin(theta/2)|1>`.
///
/// # Errors
/// Returns [`Error::InvalidParameter`] for angles outside
/// `theta in [0, pi]`, `phi in [0, 2 pi)`.
pub fn bloch_state(theta: f64, phi: f64) -> Result<DensityMatrix> {
    if !(0.0..=std::f64::consts::PI).contains(&theta) {
        return Err(Error::InvalidParameter(format!("theta must lie in [0, pi], got {theta}")));
    }
    if !(0.0..std::f64::consts::TAU).contains(&phi) {
        return Err(Error::InvalidParameter(format!("phi must lie in [0, 2 pi), got {phi}")));
    }
    Ok(DensityMatrix::pure(&bloch_vector_state(theta, phi)))
}

/// State vector for [`bloch_state`] (not wrapped in a density matrix).
pub fn bloch_vector_state(theta: f64, phi: f64) -> Vec<C64> {
    vec![
        C64::new((theta / 2.0).cos(), 0.0),
        C64::from_polar((theta / 2.0).sin(), phi),
    ]
}

/// Bloch vector `(tr(X rho), tr(Y rho), tr(Z rho))` of a qubit state.
///
/// # Errors
/// Returns [`Error::DimensionMismatch`] for non-qubit input.
pub fn bloch_vector(rho: &DensityMatrix) -> Result<[f64; 3]> {
    if rho.dim() != 2 {
        return Err(Error::DimensionMismatch(format!(
            "Bloch vector requires a qubit, got dimension {}",
            rho.dim()
        )));
    }
    let m = rho.mat();
    let x = 2.0 * m[(0, 1)].re;
    let y = -2.0 * m[(0, 1)].im;
    let z = m[(0, 0)].re - m[(1, 1)].re;
    Ok([x, y, z])
}

/// Qubit state `(I + v . sigma) / 2` from a Bloch vector with `|v| <= 1`.
///
/// # Errors
/// Returns [`Error::InvalidParameter`] if `|v| > 1 + 1e-9`.
pub fn state_from_bloch(v: [f64; 3]) -> Result<DensityMatrix> {
    let n = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
    if n > 1.0 + 1e-9 {
        return Err(Error::InvalidParameter(format!(
            "Bloch vector has norm {n:.6} > 1"
        )));
    }
    let mut m = CMatrix::zeros(2);
    m[(0, 0)] = C64::new(0.5 * (1.0 + v[2]), 0.0);
    m[(1, 1)] = C64::new(0.5 * (1.0 - v[2]), 0.0);
    m[(0, 1)] = C64::new(0.5 * v[0], -0.5 * v[1]);
    m[(1, 0)] = C64::new(0.5 * v[0], 0.5 * v[1]);
    DensityMatrix::new(m)
}

/// Uhlmann fidelity between qubit states, via the closed form
/// `F = tr(rho sigma) + 2 sqrt(det rho det sigma)`.
///
/// For pure states this reduces to the squared overlap `|<a|b>|^2`.
pub fn fidelity_qubit(rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<f64> {
    if rho.dim() != 2 || sigma.dim() != 2 {
        return Err(Error::DimensionMismatch("qubit fidelity requires dimension 2".into()));
    }
    let det = |m: &CMatrix| (m[(0, 0)] * m[(1, 1)] - m[(0, 1)] * m[(1, 0)]).re.max(0.0);
    let overlap = rho.mat().mul(sigma.mat()).trace().re;
    Ok((overlap + 2.0 * (det(rho.mat()) * det(sigma.mat())).sqrt()).clamp(0.0, 1.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use rand::Rng;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn random_hermitian(dim: usize, rng: &mut impl Rng) -> CMatrix {
        let mut m = CMatrix::zeros(dim);
        for i in 0..dim {
            m[(i, i)] = c(rng.gen_range(-1.0..1.0), 0.0);
            for j in (i + 1)..dim {
                let v = c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
                m[(i, j)] = v;
                m[(j, i)] = v.conj();
            }
        }
        m
    }

    fn random_qubit_state(rng: &mut impl Rng) -> DensityMatrix {
        let r: f64 = rng.gen_range(0.0..1.0);
        let theta = rng.gen_range(0.0..std::f64::consts::PI);
        let phi = rng.gen_range(0.0..std::f64::consts::TAU);
        let pure = bloch_state(theta, phi).unwrap();
        depolarize(&pure, 1.0 - r).unwrap()
    }

    #[test]
    fn eig_identity_2x2() {
        let spec = eig_hermitian(&CMatrix::identity(2)).unwrap();
        assert_abs_diff_eq!(spec.eigenvalues[0], 1.0, epsilon = 1e-14);
        assert_abs_diff_eq!(spec.eigenvalues[1], 1.0, epsilon = 1e-14);
    }

    #[test]
    fn eig_diagonal_2x2() {
        let spec = eig_hermitian(&CMatrix::diag(&[0.75, 0.25])).unwrap();
        assert_abs_diff_eq!(spec.eigenvalues[0], 0.75, epsilon = 1e-14);
        assert_abs_diff_eq!(spec.eigenvalues[1], 0.25, epsilon = 1e-14);
        // Computational eigenvectors.
        assert_abs_diff_eq!(spec.eigenvectors[0][0].re, 1.0, epsilon = 1e-14);
        assert_abs_diff_eq!(spec.eigenvectors[1][1].re, 1.0, epsilon = 1e-14);
    }

    /// Independent 2x2 oracle: roots of the characteristic polynomial.
    fn char_poly_eigs(m: &CMatrix) -> (f64, f64) {
        let tr = m.trace().re;
        let det = (m[(0, 0)] * m[(1, 1)] - m[(0, 1)] * m[(1, 0)]).re;
        let disc = (tr * tr / 4.0 - det).max(0.0).sqrt();
        (tr / 2.0 + disc, tr / 2.0 - disc)
    }

    #[test]
    fn eig_matches_characteristic_polynomial_oracle() {
        // Expected-state matrix of the perturbed coin at p = 0.9, r = 0.2,
        // eps = 0.1: closed form lambda_+ = 1/2 + sqrt(r + eps'^2)/2 with
        // eps' = 2 eps (1 - 2p) sqrt(1 - r).
        let (p, r, eps): (f64, f64, f64) = (0.9, 0.2, 0.1);
        let epsp = 2.0 * eps * (1.0 - 2.0 * p) * (1.0 - r).sqrt();
        let m = CMatrix::from_real(
            2,
            &[
                0.5 * (1.0 + r + epsp * (1.0 - r).sqrt()),
                0.5 * ((r * (1.0 - r)).sqrt() - epsp * r.sqrt()),
                0.5 * ((r * (1.0 - r)).sqrt() - epsp * r.sqrt()),
                0.5 * (1.0 - r - epsp * (1.0 - r).sqrt()),
            ],
        )
        .unwrap();
        let closed_form = 0.5 + 0.5 * (r + epsp * epsp).sqrt();
        let spec = eig_hermitian(&m).unwrap();
        let (hi, lo) = char_poly_eigs(&m);
        assert_abs_diff_eq!(spec.eigenvalues[0], hi, epsilon = 1e-12);
        assert_abs_diff_eq!(spec.eigenvalues[1], lo, epsilon = 1e-12);
        assert_abs_diff_eq!(spec.eigenvalues[0], closed_form, epsilon = 1e-12);
    }

    #[test]
    fn eig_reconstruction_random() {
        let mut rng = crate::rng::seeded(11, 0);
        for &dim in &[2usize, 4, 8] {
            for _ in 0..20 {
                let m = random_hermitian(dim, &mut rng);
                let spec = eig_hermitian(&m).unwrap();
                assert!(spec.reconstruct().max_abs_diff(&m) < 1e-10, "dim {dim}");
                // Orthonormality.
                for i in 0..dim {
                    for j in 0..dim {
                        let g = inner(&spec.eigenvectors[i], &spec.eigenvectors[j]);
                        let t = if i == j { 1.0 } else { 0.0 };
                        assert!((g - c(t, 0.0)).norm() < 1e-10);
                    }
                }
            }
        }
    }

    #[test]
    fn eig_phase_convention_deterministic() {
        let mut rng = crate::rng::seeded(12, 0);
        let m = random_hermitian(4, &mut rng);
        let s1 = eig_hermitian(&m).unwrap();
        let s2 = eig_hermitian(&m.clone()).unwrap();
        for (u, v) in s1.eigenvectors.iter().zip(&s2.eigenvectors) {
            for (a, b) in u.iter().zip(v) {
                assert_eq!(a, b);
            }
        }
        // Largest component is real positive.
        for v in &s1.eigenvectors {
            let best = v.iter().map(|x| x.norm()).fold(0.0f64, f64::max);
            let found = v.iter().find(|x| (x.norm() - best).abs() < 1e-12).unwrap();
            assert!(found.im.abs() < 1e-12 && found.re > 0.0);
        }
    }

    #[test]
    fn eig_rejects_non_hermitian() {
        let mut m = CMatrix::zeros(2);
        m[(0, 1)] = c(1.0, 0.0);
        m[(1, 0)] = c(0.5, 0.0);
        assert!(matches!(eig_hermitian(&m), Err(Error::NotHermitian(_))));
    }

    #[test]
    fn gibbs_degenerate_hamiltonian() {
        let h = Hamiltonian::degenerate(2, 0.7);
        let g = gibbs_state(&h, 2.0).unwrap();
        assert!(g.state.mat().max_abs_diff(DensityMatrix::maximally_mixed(2).mat()) < 1e-14);
        assert_abs_diff_eq!(g.f_eq, 0.7 - 2.0f64.ln() / 2.0, epsilon = 1e-14);
    }

    #[test]
    fn gibbs_two_level() {
        // H = diag(0, 1), beta = 1: direct exponentiation oracle.
        let h = Hamiltonian::diagonal(&[0.0, 1.0]);
        let g = gibbs_state(&h, 1.0).unwrap();
        let z = 1.0 + (-1.0f64).exp();
        assert_abs_diff_eq!(g.state.mat()[(0, 0)].re, 1.0 / z, epsilon = 1e-14);
        assert_abs_diff_eq!(g.state.mat()[(1, 1)].re, (-1.0f64).exp() / z, epsilon = 1e-14);
        assert_abs_diff_eq!(g.f_eq, -z.ln(), epsilon = 1e-14);
    }

    #[test]
    fn gibbs_rejects_nonpositive_beta() {
        let h = Hamiltonian::degenerate(2, 0.0);
        assert!(gibbs_state(&h, 0.0).is_err());
        assert!(gibbs_state(&h, -1.0).is_err());
    }

    #[test]
    fn relative_entropy_self_is_zero() {
        let mut rng = crate::rng::seeded(13, 0);
        for _ in 0..10 {
            let rho = random_qubit_state(&mut rng);
            assert_abs_diff_eq!(relative_entropy(&rho, &rho), 0.0, epsilon = 1e-10);
        }
    }

    #[test]
    fn relative_entropy_pure_vs_mixed() {
        let zero = DensityMatrix::pure(&[c(1.0, 0.0), c(0.0, 0.0)]);
        let mixed = DensityMatrix::maximally_mixed(2);
        assert_abs_diff_eq!(relative_entropy(&zero, &mixed), 2.0f64.ln(), epsilon = 1e-12);
    }

    #[test]
    fn relative_entropy_depolarized_oracle() {
        // D(depolarize(|0><0|, 0.2) || I/2): spectral oracle with
        // eigenvalues (0.9, 0.1): sum lam ln lam + ln 2.
        let zero = DensityMatrix::pure(&[c(1.0, 0.0), c(0.0, 0.0)]);
        let rho = depolarize(&zero, 0.2).unwrap();
        let expected = 0.9 * 0.9f64.ln() + 0.1 * 0.1f64.ln() + 2.0f64.ln();
        assert_abs_diff_eq!(
            relative_entropy(&rho, &DensityMatrix::maximally_mixed(2)),
            expected,
            epsilon = 1e-12
        );
    }

    #[test]
    fn relative_entropy_support_violation_is_infinite() {
        let zero = DensityMatrix::pure(&[c(1.0, 0.0), c(0.0, 0.0)]);
        let one = DensityMatrix::pure(&[c(0.0, 0.0), c(1.0, 0.0)]);
        assert!(relative_entropy(&zero, &one).is_infinite());
    }

    #[test]
    fn relative_entropy_nonnegative_random() {
        let mut rng = crate::rng::seeded(14, 0);
        for _ in 0..1000 {
            let a = random_qubit_state(&mut rng);
            let b = random_qubit_state(&mut rng);
            let d = relative_entropy(&a, &b);
            assert!(d >= 0.0 || d.is_infinite());
            if d < 1e-12 && d.is_finite() {
                assert!(a.mat().max_abs_diff(b.mat()) < 1e-5);
            }
        }
    }

    #[test]
    fn joint_convexity_spot_check() {
        let mut rng = crate::rng::seeded(15, 0);
        for _ in 0..200 {
            let (a1, a2) = (random_qubit_state(&mut rng), random_qubit_state(&mut rng));
            let (b1, b2) = (random_qubit_state(&mut rng), random_qubit_state(&mut rng));
            let w: f64 = rng.gen_range(0.0..1.0);
            let am = DensityMatrix::mixture(&[(w, &a1), (1.0 - w, &a2)]);
            let bm = DensityMatrix::mixture(&[(w, &b1), (1.0 - w, &b2)]);
            let lhs = relative_entropy(&am, &bm);
            let rhs = w * relative_entropy(&a1, &b1) + (1.0 - w) * relative_entropy(&a2, &b2);
            assert!(lhs <= rhs + 1e-9, "joint convexity violated: {lhs} > {rhs}");
        }
    }

    #[test]
    fn entropy_pure_and_mixed() {
        let pure = bloch_state(1.0, 2.0).unwrap();
        assert_abs_diff_eq!(von_neumann_entropy(&pure), 0.0, epsilon = 1e-10);
        assert_abs_diff_eq!(
            von_neumann_entropy(&DensityMatrix::maximally_mixed(2)),
            2.0f64.ln(),
            epsilon = 1e-12
        );
        // Binary-entropy oracle for diag(0.9, 0.1).
        let rho = DensityMatrix::new(CMatrix::diag(&[0.9, 0.1])).unwrap();
        let h2 = -(0.9f64 * 0.9f64.ln() + 0.1 * 0.1f64.ln());
        assert_abs_diff_eq!(von_neumann_entropy(&rho), h2, epsilon = 1e-12);
    }

    fn computational_basis() -> Vec<Vec<C64>> {
        vec![vec![c(1.0, 0.0), c(0.0, 0.0)], vec![c(0.0, 0.0), c(1.0, 0.0)]]
    }

    #[test]
    fn pinch_properties() {
        let plus = DensityMatrix::pure(&[c(std::f64::consts::FRAC_1_SQRT_2, 0.0); 2]);
        let pinched = pinch(&plus, &computational_basis()).unwrap();
        assert!(pinched.mat().max_abs_diff(DensityMatrix::maximally_mixed(2).mat()) < 1e-12);

        // Idempotence and entropy monotonicity on random states.
        let mut rng = crate::rng::seeded(16, 0);
        for _ in 0..50 {
            let rho = random_qubit_state(&mut rng);
            let once = pinch(&rho, &computational_basis()).unwrap();
            let twice = pinch(&once, &computational_basis()).unwrap();
            assert!(once.mat().max_abs_diff(twice.mat()) < 1e-12);
            assert!(von_neumann_entropy(&once) >= von_neumann_entropy(&rho) - 1e-10);
        }

        // Diagonal state is a fixed point.
        let diag = DensityMatrix::new(CMatrix::diag(&[0.3, 0.7])).unwrap();
        let p = pinch(&diag, &computational_basis()).unwrap();
        assert!(p.mat().max_abs_diff(diag.mat()) < 1e-13);
    }

    #[test]
    fn pinch_born_rule_oracle() {
        // |psi> = sqrt(0.36)|0> + sqrt(0.64)|1> pinched in the
        // computational basis gives diag(0.36, 0.64).
        let psi = DensityMatrix::pure(&[c(0.6, 0.0), c(0.8, 0.0)]);
        let pinched = pinch(&psi, &computational_basis()).unwrap();
        assert_abs_diff_eq!(pinched.mat()[(0, 0)].re, 0.36, epsilon = 1e-12);
        assert_abs_diff_eq!(pinched.mat()[(1, 1)].re, 0.64, epsilon = 1e-12);
    }

    #[test]
    fn pinch_rejects_bad_basis() {
        let rho = DensityMatrix::maximally_mixed(2);
        let bad = vec![vec![c(1.0, 0.0), c(0.0, 0.0)], vec![c(1.0, 0.0), c(0.0, 0.0)]];
        assert!(pinch(&rho, &bad).is_err());
    }

    #[test]
    fn depolarize_endpoints_and_midpoint() {
        let zero = DensityMatrix::pure(&[c(1.0, 0.0), c(0.0, 0.0)]);
        assert!(depolarize(&zero, 0.0).unwrap().mat().max_abs_diff(zero.mat()) < 1e-14);
        assert!(
            depolarize(&zero, 1.0)
                .unwrap()
                .mat()
                .max_abs_diff(DensityMatrix::maximally_mixed(2).mat())
                < 1e-14
        );
        let d = depolarize(&zero, 0.4).unwrap();
        assert_abs_diff_eq!(d.mat()[(0, 0)].re, 0.8, epsilon = 1e-14);
        assert_abs_diff_eq!(d.mat()[(1, 1)].re, 0.2, epsilon = 1e-14);
        assert!(depolarize(&zero, 1.5).is_err());
        assert!(depolarize(&zero, -0.1).is_err());
    }

    #[test]
    fn bloch_poles_and_equator() {
        let north = bloch_state(0.0, 0.0).unwrap();
        assert_eq!(bloch_vector(&north).unwrap(), [0.0, 0.0, 1.0]);
        let plus = bloch_state(std::f64::consts::FRAC_PI_2, 0.0).unwrap();
        let v = bloch_vector(&plus).unwrap();
        assert_abs_diff_eq!(v[0], 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(v[1], 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(v[2], 0.0, epsilon = 1e-12);
    }

    #[test]
    fn bloch_roundtrip_random() {
        let mut rng = crate::rng::seeded(17, 0);
        for _ in 0..200 {
            let theta = rng.gen_range(0.0..std::f64::consts::PI);
            let phi = rng.gen_range(0.0..std::f64::consts::TAU);
            let rho = bloch_state(theta, phi).unwrap();
            let v = bloch_vector(&rho).unwrap();
            let theta_back = v[2].clamp(-1.0, 1.0).acos();
            let phi_back = v[1].atan2(v[0]).rem_euclid(std::f64::consts::TAU);
            assert_abs_diff_eq!(theta_back, theta, epsilon = 1e-10);
            // phi undefined at the poles.
            if theta > 1e-6 && theta < std::f64::consts::PI - 1e-6 {
                let dphi = (phi_back - phi).abs();
                assert!(dphi < 1e-9 || (dphi - std::f64::consts::TAU).abs() < 1e-9);
            }
            let back = state_from_bloch(v).unwrap();
            assert!(back.mat().max_abs_diff(rho.mat()) < 1e-12);
        }
    }

    #[test]
    fn bloch_vector_rejects_non_qubit() {
        let rho = DensityMatrix::maximally_mixed(4);
        assert!(bloch_vector(&rho).is_err());
    }

    #[test]
    fn qubit_fidelity_pure_overlap() {
        let a = bloch_state(0.3, 0.0).unwrap();
        let b = bloch_state(1.1, 0.5).unwrap();
        // Oracle: |<a|b>|^2 from the state vectors.
        let va = bloch_vector_state(0.3, 0.0);
        let vb = bloch_vector_state(1.1, 0.5);
        let expect = inner(&va, &vb).norm_sqr();
        assert_abs_diff_eq!(fidelity_qubit(&a, &b).unwrap(), expect, epsilon = 1e-12);
    }

    #[test]
    fn kron_dimensions_and_values() {
        let x = CMatrix::from_real(2, &[0.0, 1.0, 1.0, 0.0]).unwrap();
        let i = CMatrix::identity(2);
        let xi = x.kron(&i);
        assert_eq!(xi.dim(), 4);
        assert_abs_diff_eq!(xi[(0, 2)].re, 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(xi[(1, 3)].re, 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(xi[(0, 1)].re, 0.0, epsilon = 1e-15);
    }
}
