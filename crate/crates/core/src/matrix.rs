//! Dense complex Hermitian matrices and density matrices.
//!
//! Composite systems use the index convention `i = i1 * d2 + i2`
//! (subsystem one is the outer index), which is what
//! [`nalgebra::Matrix::kronecker`] produces.

use crate::rng::SeededRng;
use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::fmt;
use thiserror::Error;

pub type C64 = Complex64;
pub type CMatrix = DMatrix<C64>;

/// Largest elementwise `|m_ij - conj(m_ji)|` absorbed by symmetrization.
pub const HERMITIAN_TOLERANCE: f64 = 1e-12;
/// Most negative eigenvalue a density matrix may carry.
pub const POSITIVITY_TOLERANCE: f64 = 1e-10;
/// Eigenvalues below this magnitude are treated as exact zeros by powers.
pub const SUPPORT_THRESHOLD: f64 = 1e-12;
/// Default central-difference step for functional gradients.
pub const DEFAULT_FD_STEP: f64 = 1e-5;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MatrixError {
    #[error("matrix is {rows}x{cols}, expected square")]
    NotSquare { rows: usize, cols: usize },
    #[error("matrix has zero dimension")]
    Empty,
    #[error("matrix is not Hermitian: |m[{row}][{col}] - conj(m[{col}][{row}])| = {defect:e}")]
    NotHermitian { row: usize, col: usize, defect: f64 },
    #[error("matrix has non-finite entry at [{row}][{col}]")]
    NonFinite { row: usize, col: usize },
    #[error("eigenvalue {value:e} is below the positivity tolerance")]
    NotPositive { value: f64 },
    #[error("density matrix trace {0:e} is not positive")]
    NonPositiveTrace(f64),
    #[error("power {power} of a matrix with eigenvalue {eigenvalue:e} is singular")]
    SingularPower { power: f64, eigenvalue: f64 },
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("rank {rank} must be between 1 and dimension {dim}")]
    InvalidRank { rank: usize, dim: usize },
    #[error("subsystem dimensions must be positive, got {d1}x{d2}")]
    InvalidShape { d1: usize, d2: usize },
    #[error("finite-difference step must be positive and finite, got {0}")]
    InvalidStep(f64),
    #[error("functional evaluation failed while probing: {0}")]
    Evaluation(String),
    #[error("matrix literal row {row} has {found} entries, expected {expected}")]
    RaggedLiteral { row: usize, expected: usize, found: usize },
    #[error("state vector has zero norm")]
    ZeroVector,
}

pub type Result<T> = std::result::Result<T, MatrixError>;

/// Complex square matrix equal to its conjugate transpose.
#[derive(Clone, PartialEq)]
pub struct HermitianMatrix {
    m: CMatrix,
}

impl fmt::Debug for HermitianMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "HermitianMatrix{}", self.m)
    }
}

impl HermitianMatrix {
    /// Validates Hermiticity and returns the symmetrized `(M + M†)/2`.
    pub fn new(m: CMatrix) -> Result<Self> {
        let (rows, cols) = m.shape();
        if rows != cols {
            return Err(MatrixError::NotSquare { rows, cols });
        }
        if rows == 0 {
            return Err(MatrixError::Empty);
        }
        let scale = m.iter().map(|z| z.norm()).fold(1.0, f64::max);
        for i in 0..rows {
            for j in 0..=i {
                let (a, b) = (m[(i, j)], m[(j, i)]);
                if !(a.re.is_finite() && a.im.is_finite()) {
                    return Err(MatrixError::NonFinite { row: i, col: j });
                }
                let defect = (a - b.conj()).norm();
                if defect > HERMITIAN_TOLERANCE * scale {
                    return Err(MatrixError::NotHermitian {
                        row: i,
                        col: j,
                        defect,
                    });
                }
            }
        }
        Ok(Self::symmetrized(m))
    }

    /// `(M + M†)/2` without validation; for results that are Hermitian
    /// up to roundoff by construction.
    pub(crate) fn symmetrized(m: CMatrix) -> Self {
        let m = (&m + m.adjoint()) * C64::new(0.5, 0.0);
        Self { m }
    }

    #[cfg(test)]
    pub(crate) fn raw_for_tests(m: CMatrix) -> Self {
        Self { m }
    }

    pub fn zeros(dim: usize) -> Self {
        Self {
            m: CMatrix::zeros(dim, dim),
        }
    }

    pub fn identity(dim: usize) -> Self {
        Self {
            m: CMatrix::identity(dim, dim),
        }
    }

    pub fn from_real_diagonal(diag: &[f64]) -> Self {
        let n = diag.len();
        Self {
            m: CMatrix::from_fn(n, n, |i, j| {
                if i == j {
                    C64::new(diag[i], 0.0)
                } else {
                    C64::new(0.0, 0.0)
                }
            }),
        }
    }

    /// Real symmetric matrix from row-major entries.
    pub fn from_real(dim: usize, rows: &[f64]) -> Result<Self> {
        if rows.len() != dim * dim {
            return Err(MatrixError::DimensionMismatch {
                expected: dim * dim,
                found: rows.len(),
            });
        }
        Self::new(CMatrix::from_fn(dim, dim, |i, j| {
            C64::new(rows[i * dim + j], 0.0)
        }))
    }

    pub fn dim(&self) -> usize {
        self.m.nrows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.m
    }

    pub fn into_matrix(self) -> CMatrix {
        self.m
    }

    pub fn trace(&self) -> f64 {
        self.m.diagonal().iter().map(|z| z.re).sum()
    }

    pub fn scale(&self, factor: f64) -> Self {
        Self {
            m: &self.m * C64::new(factor, 0.0),
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        Self {
            m: &self.m + &other.m,
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        Self {
            m: &self.m - &other.m,
        }
    }

    /// `self + c·I`.
    pub fn shift(&self, c: f64) -> Self {
        let mut m = self.m.clone();
        for i in 0..m.nrows() {
            m[(i, i)] += C64::new(c, 0.0);
        }
        Self { m }
    }

    /// `Tr(self · other)`; real for Hermitian arguments.
    pub fn trace_product(&self, other: &Self) -> f64 {
        trace_of_product(&self.m, &other.m).re
    }

    /// `-i [self, other]`, which is again Hermitian.
    pub fn commutator_times_minus_i(&self, other: &Self) -> Self {
        let c = commutator(&self.m, &other.m);
        Self::symmetrized(c * C64::new(0.0, -1.0))
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.m.norm()
    }

    pub fn eigenvalues(&self) -> Vec<f64> {
        spectral_decompose(self).eigenvalues
    }

    /// Integer power by repeated multiplication.
    pub fn powi(&self, k: u32) -> Self {
        let mut out = CMatrix::identity(self.dim(), self.dim());
        for _ in 0..k {
            out = &out * &self.m;
        }
        Self::symmetrized(out)
    }
}

/// `AB - BA`.
pub fn commutator(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a * b - b * a
}

/// `Tr(AB)` without forming the product.
pub fn trace_of_product(a: &CMatrix, b: &CMatrix) -> C64 {
    let n = a.nrows();
    let mut acc = C64::new(0.0, 0.0);
    for i in 0..n {
        for k in 0..n {
            acc += a[(i, k)] * b[(k, i)];
        }
    }
    acc
}

/// Eigenvalues ascending with matching orthonormal eigenvector columns.
#[derive(Debug, Clone)]
pub struct SpectralDecomposition {
    pub eigenvalues: Vec<f64>,
    pub eigenvectors: CMatrix,
}

impl SpectralDecomposition {
    /// `V f(Λ) V†`.
    pub fn map<F: Fn(f64) -> f64>(&self, f: F) -> HermitianMatrix {
        let n = self.eigenvalues.len();
        let v = &self.eigenvectors;
        let mut scaled = v.clone();
        for (j, &lam) in self.eigenvalues.iter().enumerate() {
            let fl = C64::new(f(lam), 0.0);
            for i in 0..n {
                scaled[(i, j)] *= fl;
            }
        }
        HermitianMatrix::symmetrized(scaled * v.adjoint())
    }

    pub fn reconstruct(&self) -> HermitianMatrix {
        self.map(|x| x)
    }
}

pub fn spectral_decompose(m: &HermitianMatrix) -> SpectralDecomposition {
    let eig = SymmetricEigen::new(m.m.clone());
    let mut order: Vec<usize> = (0..m.dim()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let eigenvalues = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let eigenvectors = CMatrix::from_fn(m.dim(), m.dim(), |i, j| eig.eigenvectors[(i, order[j])]);
    SpectralDecomposition {
        eigenvalues,
        eigenvectors,
    }
}

/// Positive-semidefinite Hermitian matrix with positive trace.
#[derive(Clone, PartialEq)]
pub struct DensityMatrix {
    h: HermitianMatrix,
    trace: f64,
}

impl fmt::Debug for DensityMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "DensityMatrix(tr={}){}", self.trace, self.h.m)
    }
}

impl DensityMatrix {
    pub fn new(h: HermitianMatrix) -> Result<Self> {
        Self::with_tolerance(h, POSITIVITY_TOLERANCE)
    }

    /// Like [`DensityMatrix::new`] with a caller-chosen positivity tolerance.
    pub fn with_tolerance(h: HermitianMatrix, tolerance: f64) -> Result<Self> {
        let trace = h.trace();
        if trace <= 0.0 || !trace.is_finite() {
            return Err(MatrixError::NonPositiveTrace(trace));
        }
        let min = spectral_decompose(&h).eigenvalues[0];
        if min < -tolerance {
            return Err(MatrixError::NotPositive { value: min });
        }
        Ok(Self { h, trace })
    }

    /// Skips the eigenvalue check; used for integrator stages and
    /// finite-difference probes that may leave the cone by roundoff.
    pub(crate) fn unchecked(h: HermitianMatrix) -> Self {
        let trace = h.trace();
        Self { h, trace }
    }

    pub fn from_matrix(m: CMatrix) -> Result<Self> {
        Self::new(HermitianMatrix::new(m)?)
    }

    pub fn from_diagonal(diag: &[f64]) -> Result<Self> {
        Self::new(HermitianMatrix::from_real_diagonal(diag))
    }

    /// `|ψ⟩⟨ψ|` with the vector taken as given (trace `⟨ψ|ψ⟩`).
    pub fn pure(psi: &[C64]) -> Result<Self> {
        let n = psi.len();
        if n == 0 {
            return Err(MatrixError::Empty);
        }
        if psi.iter().all(|z| z.norm() == 0.0) {
            return Err(MatrixError::ZeroVector);
        }
        let m = CMatrix::from_fn(n, n, |i, j| psi[i] * psi[j].conj());
        let h = HermitianMatrix::symmetrized(m);
        let trace = h.trace();
        Ok(Self { h, trace })
    }

    pub fn maximally_mixed(dim: usize) -> Self {
        let h = HermitianMatrix::identity(dim).scale(1.0 / dim as f64);
        Self { h, trace: 1.0 }
    }

    pub fn dim(&self) -> usize {
        self.h.dim()
    }

    pub fn trace(&self) -> f64 {
        self.trace
    }

    pub fn as_hermitian(&self) -> &HermitianMatrix {
        &self.h
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.h.m
    }

    pub fn into_hermitian(self) -> HermitianMatrix {
        self.h
    }

    pub fn eigenvalues(&self) -> Vec<f64> {
        self.h.eigenvalues()
    }

    pub fn normalized(&self) -> Self {
        Self {
            h: self.h.scale(1.0 / self.trace),
            trace: 1.0,
        }
    }

    /// `λρ` for `λ > 0`.
    pub fn scaled(&self, lambda: f64) -> Result<Self> {
        if !(lambda > 0.0) || !lambda.is_finite() {
            return Err(MatrixError::NonPositiveTrace(lambda * self.trace));
        }
        Ok(Self {
            h: self.h.scale(lambda),
            trace: self.trace * lambda,
        })
    }
}

/// Splits a composite dimension into two subsystems.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct BipartiteShape {
    pub d1: usize,
    pub d2: usize,
}

impl BipartiteShape {
    pub fn new(d1: usize, d2: usize) -> Result<Self> {
        if d1 == 0 || d2 == 0 {
            return Err(MatrixError::InvalidShape { d1, d2 });
        }
        Ok(Self { d1, d2 })
    }

    pub fn total(&self) -> usize {
        self.d1 * self.d2
    }

    pub fn kept_dim(&self, keep: Subsystem) -> usize {
        match keep {
            Subsystem::First => self.d1,
            Subsystem::Second => self.d2,
        }
    }
}

/// Which factor of a bipartite system is kept.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Subsystem {
    First,
    Second,
}

/// Tr(ρ^s) and friends use the support-restricted power below.
///
/// Eigenvalues in `[-1e-10, 0)` are clamped to zero; for `s > 0`, eigenvalues
/// with magnitude below [`SUPPORT_THRESHOLD`] map to zero. Non-positive `s`
/// requires every eigenvalue above the threshold.
pub fn matrix_power(rho: &DensityMatrix, s: f64) -> Result<HermitianMatrix> {
    hermitian_power(rho.as_hermitian(), s)
}

pub(crate) fn hermitian_power(h: &HermitianMatrix, s: f64) -> Result<HermitianMatrix> {
    if s == 1.0 {
        return Ok(h.clone());
    }
    let spec = spectral_decompose(h);
    power_from_spectrum(&spec, s)
}

pub(crate) fn power_from_spectrum(spec: &SpectralDecomposition, s: f64) -> Result<HermitianMatrix> {
    for &lam in &spec.eigenvalues {
        if lam < -POSITIVITY_TOLERANCE {
            return Err(MatrixError::NotPositive { value: lam });
        }
        if s <= 0.0 && lam <= SUPPORT_THRESHOLD {
            return Err(MatrixError::SingularPower {
                power: s,
                eigenvalue: lam,
            });
        }
    }
    Ok(spec.map(|lam| support_power(lam, s)))
}

pub(crate) fn support_power(lam: f64, s: f64) -> f64 {
    if lam <= SUPPORT_THRESHOLD {
        0.0
    } else {
        lam.powf(s)
    }
}

/// `f_k = Tr(ρ^k)` from the spectrum; `f_0` is the dimension.
pub fn moment(rho: &DensityMatrix, k: u32) -> f64 {
    rho.eigenvalues().iter().map(|&l| l.powi(k as i32)).sum()
}

/// `[f_1, ..., f_kmax]`.
pub fn moments(rho: &DensityMatrix, kmax: u32) -> Vec<f64> {
    moments_from_eigenvalues(&rho.eigenvalues(), kmax)
}

pub fn moments_from_eigenvalues(eigenvalues: &[f64], kmax: u32) -> Vec<f64> {
    (1..=kmax)
        .map(|k| eigenvalues.iter().map(|&l| l.powi(k as i32)).sum())
        .collect()
}

/// Kronecker product `a ⊗ b`.
pub fn tensor_product(a: &DensityMatrix, b: &DensityMatrix) -> DensityMatrix {
    let h = HermitianMatrix::symmetrized(a.matrix().kronecker(b.matrix()));
    DensityMatrix {
        h,
        trace: a.trace * b.trace,
    }
}

/// Hermitian Kronecker product.
pub fn kron(a: &HermitianMatrix, b: &HermitianMatrix) -> HermitianMatrix {
    HermitianMatrix::symmetrized(a.matrix().kronecker(b.matrix()))
}

/// Reduced density matrix of one factor.
pub fn partial_trace(rho: &DensityMatrix, shape: BipartiteShape, keep: Subsystem) -> Result<DensityMatrix> {
    let h = partial_trace_hermitian(rho.as_hermitian(), shape, keep)?;
    Ok(DensityMatrix::unchecked(h))
}

pub fn partial_trace_hermitian(
    m: &HermitianMatrix,
    shape: BipartiteShape,
    keep: Subsystem,
) -> Result<HermitianMatrix> {
    if m.dim() != shape.total() {
        return Err(MatrixError::DimensionMismatch {
            expected: shape.total(),
            found: m.dim(),
        });
    }
    let BipartiteShape { d1, d2 } = shape;
    let a = m.matrix();
    let out = match keep {
        Subsystem::First => CMatrix::from_fn(d1, d1, |i, j| {
            (0..d2).map(|k| a[(i * d2 + k, j * d2 + k)]).sum()
        }),
        Subsystem::Second => CMatrix::from_fn(d2, d2, |i, j| {
            (0..d1).map(|k| a[(k * d2 + i, k * d2 + j)]).sum()
        }),
    };
    Ok(HermitianMatrix::symmetrized(out))
}

/// Adjoint of the partial trace: `g ⊗ I` or `I ⊗ g`.
pub fn embed(g: &HermitianMatrix, shape: BipartiteShape, keep: Subsystem) -> Result<HermitianMatrix> {
    let expected = shape.kept_dim(keep);
    if g.dim() != expected {
        return Err(MatrixError::DimensionMismatch {
            expected,
            found: g.dim(),
        });
    }
    Ok(match keep {
        Subsystem::First => kron(g, &HermitianMatrix::identity(shape.d2)),
        Subsystem::Second => kron(&HermitianMatrix::identity(shape.d1), g),
    })
}

/// Step for [`functional_gradient_fd`] that keeps every probe well inside
/// the positive cone: `DEFAULT_FD_STEP`, shrunk to 1% of the smallest
/// eigenvalue for nearly singular states.
pub fn fd_step_for(rho: &DensityMatrix) -> f64 {
    let lmin = rho.eigenvalues()[0] / rho.trace().abs().max(f64::MIN_POSITIVE);
    if lmin > 1e-10 {
        DEFAULT_FD_STEP.min(1e-2 * lmin * rho.trace().abs())
    } else {
        DEFAULT_FD_STEP
    }
}

/// Orthonormal basis of Hermitian directions: diagonal units, symmetric
/// pairs `E_jk + E_kj` and imaginary antisymmetric pairs `i(E_jk - E_kj)`.
fn hermitian_direction(dim: usize, j: usize, k: usize, imaginary: bool) -> CMatrix {
    let mut d = CMatrix::zeros(dim, dim);
    if j == k {
        d[(j, j)] = C64::new(1.0, 0.0);
    } else if imaginary {
        d[(j, k)] = C64::new(0.0, 1.0);
        d[(k, j)] = C64::new(0.0, -1.0);
    } else {
        d[(j, k)] = C64::new(1.0, 0.0);
        d[(k, j)] = C64::new(1.0, 0.0);
    }
    d
}

/// Fourth-order central-difference gradient `G` with
/// `f(ρ + εΔ) - f(ρ) ≈ ε Tr(ΔG)`. Probes reach `ρ ± 2·step·Δ`.
pub fn functional_gradient_fd<F, E>(f: F, rho: &DensityMatrix, step: f64) -> Result<HermitianMatrix>
where
    F: Fn(&DensityMatrix) -> std::result::Result<f64, E>,
    E: fmt::Display,
{
    if !(step > 0.0) || !step.is_finite() {
        return Err(MatrixError::InvalidStep(step));
    }
    let dim = rho.dim();
    let probe = |dir: &CMatrix| -> Result<f64> {
        let eval = |sign: f64| -> Result<f64> {
            let m = rho.matrix() + dir * C64::new(sign * step, 0.0);
            let state = DensityMatrix::unchecked(HermitianMatrix::symmetrized(m));
            let v = f(&state).map_err(|e| MatrixError::Evaluation(e.to_string()))?;
            if !v.is_finite() {
                return Err(MatrixError::Evaluation(format!("non-finite value {v}")));
            }
            Ok(v)
        };
        Ok((8.0 * (eval(1.0)? - eval(-1.0)?) - (eval(2.0)? - eval(-2.0)?)) / (12.0 * step))
    };
    let mut g = CMatrix::zeros(dim, dim);
    for j in 0..dim {
        g[(j, j)] = C64::new(probe(&hermitian_direction(dim, j, j, false))?, 0.0);
        for k in (j + 1)..dim {
            let re = probe(&hermitian_direction(dim, j, k, false))? / 2.0;
            let im = probe(&hermitian_direction(dim, j, k, true))? / 2.0;
            g[(j, k)] = C64::new(re, im);
            g[(k, j)] = C64::new(re, -im);
        }
    }
    Ok(HermitianMatrix { m: g })
}

/// Haar-like random unitary from the QR decomposition of a Ginibre matrix.
pub fn random_unitary(dim: usize, rng: &mut SeededRng) -> CMatrix {
    let z = CMatrix::from_fn(dim, dim, |_, _| C64::new(rng.normal(), rng.normal()));
    let qr = z.qr();
    let mut q = qr.q();
    let r = qr.r();
    for j in 0..dim {
        let d = r[(j, j)];
        let phase = if d.norm() > 0.0 { d / d.norm() } else { C64::new(1.0, 0.0) };
        for i in 0..dim {
            q[(i, j)] *= phase;
        }
    }
    q
}

/// Random Hermitian matrix with Gaussian entries, rescaled so that its
/// largest eigenvalue magnitude equals `spectral_radius`.
pub fn random_hermitian(dim: usize, spectral_radius: f64, rng: &mut SeededRng) -> HermitianMatrix {
    let z = CMatrix::from_fn(dim, dim, |_, _| C64::new(rng.normal(), rng.normal()));
    let h = HermitianMatrix::symmetrized(z);
    let eig = h.eigenvalues();
    let radius = eig.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    if radius == 0.0 {
        return h;
    }
    h.scale(spectral_radius / radius)
}

/// Unit-trace state `VΛV†` with exactly `rank` eigenvalues, each ≥ 1e-6.
pub fn random_density(dim: usize, rank: usize, seed: u64) -> Result<DensityMatrix> {
    random_density_with(dim, rank, &mut SeededRng::new(seed))
}

pub fn random_density_with(dim: usize, rank: usize, rng: &mut SeededRng) -> Result<DensityMatrix> {
    if dim == 0 {
        return Err(MatrixError::Empty);
    }
    if rank == 0 || rank > dim {
        return Err(MatrixError::InvalidRank { rank, dim });
    }
    let floor = 1e-6;
    let weights = rng.simplex(rank);
    let mut diag = vec![0.0; dim];
    for (d, w) in diag.iter_mut().zip(weights) {
        *d = floor + (1.0 - rank as f64 * floor) * w;
    }
    let u = random_unitary(dim, rng);
    let lam = CMatrix::from_fn(dim, dim, |i, j| {
        if i == j {
            C64::new(diag[i], 0.0)
        } else {
            C64::new(0.0, 0.0)
        }
    });
    let h = HermitianMatrix::symmetrized(&u * lam * u.adjoint());
    let trace = h.trace();
    Ok(DensityMatrix { h, trace })
}

/// Pure normalized state from a random unit vector.
pub fn random_pure(dim: usize, rng: &mut SeededRng) -> Result<DensityMatrix> {
    let psi: Vec<C64> = (0..dim).map(|_| C64::new(rng.normal(), rng.normal())).collect();
    let norm = psi.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    let psi: Vec<C64> = psi.iter().map(|z| z / norm).collect();
    DensityMatrix::pure(&psi)
}

/// `½ Σ |eig(A - B)|`.
pub fn trace_distance(a: &HermitianMatrix, b: &HermitianMatrix) -> f64 {
    0.5 * a.sub(b).eigenvalues().iter().map(|x| x.abs()).sum::<f64>()
}

/// Row-major matrix literal of `[re, im]` pairs.
pub type MatrixLiteral = Vec<Vec<[f64; 2]>>;

pub fn from_literal(lit: &MatrixLiteral) -> Result<CMatrix> {
    let n = lit.len();
    if n == 0 {
        return Err(MatrixError::Empty);
    }
    for (row, r) in lit.iter().enumerate() {
        if r.len() != n {
            return Err(MatrixError::RaggedLiteral {
                row,
                expected: n,
                found: r.len(),
            });
        }
    }
    Ok(CMatrix::from_fn(n, n, |i, j| C64::new(lit[i][j][0], lit[i][j][1])))
}

pub fn to_literal(m: &CMatrix) -> MatrixLiteral {
    (0..m.nrows())
        .map(|i| (0..m.ncols()).map(|j| [m[(i, j)].re, m[(i, j)].im]).collect())
        .collect()
}

/// Pauli matrices and a few fixed states used by examples and tests.
pub mod pauli {
    use super::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    pub fn x() -> HermitianMatrix {
        HermitianMatrix::symmetrized(CMatrix::from_row_slice(
            2,
            2,
            &[c(0., 0.), c(1., 0.), c(1., 0.), c(0., 0.)],
        ))
    }

    pub fn y() -> HermitianMatrix {
        HermitianMatrix::symmetrized(CMatrix::from_row_slice(
            2,
            2,
            &[c(0., 0.), c(0., -1.), c(0., 1.), c(0., 0.)],
        ))
    }

    pub fn z() -> HermitianMatrix {
        HermitianMatrix::from_real_diagonal(&[1.0, -1.0])
    }

    /// `|+⟩⟨+|`.
    pub fn plus() -> DensityMatrix {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        DensityMatrix::pure(&[c(s, 0.), c(s, 0.)]).expect("nonzero vector")
    }

    /// `|-⟩⟨-|`.
    pub fn minus() -> DensityMatrix {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        DensityMatrix::pure(&[c(s, 0.), c(-s, 0.)]).expect("nonzero vector")
    }

    /// `|Φ+⟩⟨Φ+|` on two qubits.
    pub fn bell() -> DensityMatrix {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        DensityMatrix::pure(&[c(s, 0.), c(0., 0.), c(0., 0.), c(s, 0.)]).expect("nonzero vector")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn max_abs_diff(a: &HermitianMatrix, b: &HermitianMatrix) -> f64 {
        a.sub(b).matrix().iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    #[test]
    fn rejects_non_hermitian() {
        let m = CMatrix::from_row_slice(2, 2, &[C64::new(1., 0.), C64::new(1., 0.), C64::new(0., 0.), C64::new(1., 0.)]);
        assert!(matches!(HermitianMatrix::new(m), Err(MatrixError::NotHermitian { .. })));
        let m = CMatrix::zeros(2, 3);
        assert!(matches!(HermitianMatrix::new(m), Err(MatrixError::NotSquare { .. })));
    }

    #[test]
    fn symmetrizes_roundoff() {
        let m = CMatrix::from_row_slice(
            2,
            2,
            &[C64::new(1., 0.), C64::new(0.5, 1e-13), C64::new(0.5, 0.0), C64::new(1., 1e-14)],
        );
        let h = HermitianMatrix::new(m).unwrap();
        assert_eq!(h.matrix()[(1, 1)].im, 0.0);
        assert_eq!(h.matrix()[(0, 1)], h.matrix()[(1, 0)].conj());
    }

    #[test]
    fn spectra_of_small_examples() {
        let e = spectral_decompose(&HermitianMatrix::from_real_diagonal(&[0.75, 0.25])).eigenvalues;
        assert_abs_diff_eq!(e[0], 0.25, epsilon = 1e-15);
        assert_abs_diff_eq!(e[1], 0.75, epsilon = 1e-15);
        let e = spectral_decompose(&HermitianMatrix::identity(2).scale(0.5)).eigenvalues;
        assert_abs_diff_eq!(e[0], 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(e[1], 0.5, epsilon = 1e-15);
        let e = spectral_decompose(&pauli::x().scale(0.5)).eigenvalues;
        assert_abs_diff_eq!(e[0], -0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(e[1], 0.5, epsilon = 1e-15);
    }

    #[test]
    fn reconstruction_and_orthonormality() {
        let mut rng = SeededRng::new(11);
        for dim in 1..=8 {
            let h = random_hermitian(dim, 3.0, &mut rng);
            let s = spectral_decompose(&h);
            assert!(s.eigenvalues.windows(2).all(|w| w[0] <= w[1]));
            let err = s.reconstruct().sub(&h).frobenius_norm();
            assert!(err <= 1e-10 * h.frobenius_norm());
            let gram = s.eigenvectors.adjoint() * &s.eigenvectors;
            let id = CMatrix::identity(dim, dim);
            assert!((gram - id).norm() < 1e-10);
        }
    }

    #[test]
    fn power_examples() {
        let rho = DensityMatrix::from_diagonal(&[0.25, 0.75]).unwrap();
        let p = matrix_power(&rho, 0.5).unwrap();
        assert_abs_diff_eq!(p.matrix()[(0, 0)].re, 0.5, epsilon = 1e-14);
        assert_abs_diff_eq!(p.matrix()[(1, 1)].re, 0.75f64.sqrt(), epsilon = 1e-14);
        assert_abs_diff_eq!(p.matrix()[(1, 1)].re, 0.866_025_403_784_438_6, epsilon = 1e-14);

        let r = random_density(3, 3, 5).unwrap();
        assert!(max_abs_diff(&matrix_power(&r, 1.0).unwrap(), r.as_hermitian()) < 1e-15);

        let proj = DensityMatrix::from_diagonal(&[1.0, 0.0]).unwrap();
        let p = matrix_power(&proj, 0.7).unwrap();
        assert!(max_abs_diff(&p, proj.as_hermitian()) < 1e-14);
    }

    #[test]
    fn singular_power_is_rejected() {
        let proj = DensityMatrix::from_diagonal(&[1.0, 0.0]).unwrap();
        assert!(matches!(matrix_power(&proj, -0.5), Err(MatrixError::SingularPower { .. })));
        assert!(matches!(matrix_power(&proj, 0.0), Err(MatrixError::SingularPower { .. })));
        let full = DensityMatrix::from_diagonal(&[0.5, 0.5]).unwrap();
        let inv = matrix_power(&full, -1.0).unwrap();
        assert_abs_diff_eq!(inv.matrix()[(0, 0)].re, 2.0, epsilon = 1e-14);
    }

    #[test]
    fn moment_examples() {
        let rho = DensityMatrix::from_diagonal(&[0.5, 0.5]).unwrap();
        assert_abs_diff_eq!(moment(&rho, 2), 0.5, epsilon = 1e-15);
        let pure = pauli::plus();
        for k in 1..6 {
            assert_abs_diff_eq!(moment(&pure, k), 1.0, epsilon = 1e-14);
        }
        let rho = DensityMatrix::from_diagonal(&[0.5, 0.3, 0.2]).unwrap();
        assert_abs_diff_eq!(moment(&rho, 3), 0.160, epsilon = 1e-15);
    }

    #[test]
    fn tensor_and_partial_trace_examples() {
        let e0 = DensityMatrix::from_diagonal(&[1.0, 0.0]).unwrap();
        let t = tensor_product(&e0, &e0);
        assert!(max_abs_diff(t.as_hermitian(), &HermitianMatrix::from_real_diagonal(&[1., 0., 0., 0.])) < 1e-15);
        let mixed = DensityMatrix::maximally_mixed(2);
        let t = tensor_product(&mixed, &mixed);
        assert!(max_abs_diff(t.as_hermitian(), &HermitianMatrix::identity(4).scale(0.25)) < 1e-15);

        let shape = BipartiteShape::new(2, 2).unwrap();
        let reduced = partial_trace(&pauli::bell(), shape, Subsystem::First).unwrap();
        assert!(max_abs_diff(reduced.as_hermitian(), &HermitianMatrix::identity(2).scale(0.5)) < 1e-15);
        let reduced = partial_trace(&pauli::bell(), shape, Subsystem::Second).unwrap();
        assert!(max_abs_diff(reduced.as_hermitian(), &HermitianMatrix::identity(2).scale(0.5)) < 1e-15);

        let bad = BipartiteShape::new(2, 3).unwrap();
        assert!(matches!(
            partial_trace(&pauli::bell(), bad, Subsystem::First),
            Err(MatrixError::DimensionMismatch { .. })
        ));
        assert!(BipartiteShape::new(0, 2).is_err());
    }

    #[test]
    fn partial_trace_of_unnormalized_product() {
        let a = random_density(2, 2, 1).unwrap();
        let b = random_density(3, 2, 2).unwrap().scaled(2.5).unwrap();
        let shape = BipartiteShape::new(2, 3).unwrap();
        let t = tensor_product(&a, &b);
        assert_abs_diff_eq!(t.trace(), 2.5, epsilon = 1e-13);
        let r1 = partial_trace(&t, shape, Subsystem::First).unwrap();
        assert!(max_abs_diff(r1.as_hermitian(), &a.as_hermitian().scale(2.5)) < 1e-13);
        let r2 = partial_trace(&t, shape, Subsystem::Second).unwrap();
        assert!(max_abs_diff(r2.as_hermitian(), b.as_hermitian()) < 1e-13);
    }

    #[test]
    fn embed_is_adjoint_of_partial_trace() {
        let shape = BipartiteShape::new(2, 3).unwrap();
        let mut rng = SeededRng::new(4);
        let rho = random_density_with(6, 6, &mut rng).unwrap();
        for keep in [Subsystem::First, Subsystem::Second] {
            let g = random_hermitian(shape.kept_dim(keep), 1.0, &mut rng);
            let lhs = rho.as_hermitian().trace_product(&embed(&g, shape, keep).unwrap());
            let rhs = partial_trace_hermitian(rho.as_hermitian(), shape, keep).unwrap().trace_product(&g);
            assert_abs_diff_eq!(lhs, rhs, epsilon = 1e-13);
        }
    }

    #[test]
    fn fd_gradient_examples() {
        let mut rng = SeededRng::new(8);
        let a = random_hermitian(3, 1.0, &mut rng);
        let rho = random_density_with(3, 3, &mut rng).unwrap();
        let g = functional_gradient_fd(
            |r: &DensityMatrix| Ok::<_, MatrixError>(r.as_hermitian().trace_product(&a)),
            &rho,
            DEFAULT_FD_STEP,
        )
        .unwrap();
        assert!(max_abs_diff(&g, &a) < 1e-8);

        let half = DensityMatrix::from_diagonal(&[0.5, 0.5]).unwrap();
        let g = functional_gradient_fd(|r: &DensityMatrix| Ok::<_, MatrixError>(r.as_hermitian().powi(2).trace()), &half, DEFAULT_FD_STEP)
            .unwrap();
        assert!(max_abs_diff(&g, &HermitianMatrix::identity(2)) < 1e-8);

        let g = functional_gradient_fd(|_: &DensityMatrix| Ok::<_, MatrixError>(3.0), &rho, DEFAULT_FD_STEP).unwrap();
        assert!(g.frobenius_norm() == 0.0);

        let err = functional_gradient_fd(|_: &DensityMatrix| Ok::<_, MatrixError>(f64::NAN), &rho, DEFAULT_FD_STEP);
        assert!(matches!(err, Err(MatrixError::Evaluation(_))));
        assert!(matches!(
            functional_gradient_fd(|_: &DensityMatrix| Ok::<_, MatrixError>(1.0), &rho, 0.0),
            Err(MatrixError::InvalidStep(_))
        ));
    }

    #[test]
    fn random_density_contract() {
        let p = random_density(2, 1, 3).unwrap();
        assert_abs_diff_eq!(moment(&p, 2), 1.0, epsilon = 1e-12);
        let r = random_density(3, 3, 3).unwrap();
        assert_abs_diff_eq!(r.trace(), 1.0, epsilon = 1e-14);
        assert!(r.eigenvalues().iter().all(|&x| x > 0.0));
        assert_eq!(random_density(4, 2, 99).unwrap(), random_density(4, 2, 99).unwrap());
        assert!(matches!(random_density(2, 3, 1), Err(MatrixError::InvalidRank { .. })));
        let r = random_density(5, 3, 12).unwrap();
        let e = r.eigenvalues();
        assert!(e[..2].iter().all(|x| x.abs() < 1e-12));
        assert!(e[2..].iter().all(|&x| x >= 1e-6 - 1e-12));
    }

    #[test]
    fn literal_round_trip() {
        let lit: MatrixLiteral = vec![vec![[1.0, 0.0], [0.0, -1.0]], vec![[0.0, 1.0], [2.0, 0.0]]];
        let m = from_literal(&lit).unwrap();
        assert_eq!(to_literal(&m), lit);
        assert!(HermitianMatrix::new(m).is_ok());
        let ragged: MatrixLiteral = vec![vec![[1.0, 0.0]], vec![[0.0, 1.0], [2.0, 0.0]]];
        assert!(matches!(from_literal(&ragged), Err(MatrixError::RaggedLiteral { row: 0, .. })));
    }

    #[test]
    fn trace_distance_of_orthogonal_pure_states() {
        assert_abs_diff_eq!(
            trace_distance(pauli::plus().as_hermitian(), pauli::minus().as_hermitian()),
            1.0,
            epsilon = 1e-14
        );
    }
}
