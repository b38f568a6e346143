//! Triple brackets of scalar functionals of a density matrix,
//! `[F, G, H] = -i Tr([∇F, ∇G] ∇H)`, built on operator gradients.

use crate::generators::{EntropyGenerator, GeneratorError};
use crate::matrix::{
    commutator, embed, fd_step_for, functional_gradient_fd, partial_trace, random_density, trace_of_product,
    BipartiteShape, DensityMatrix, HermitianMatrix, MatrixError, Subsystem, DEFAULT_FD_STEP,
};
use std::fmt;
use std::sync::Arc;
use thiserror::Error;

/// Imaginary parts up to this size are discarded silently.
pub const IMAGINARY_DISCARD: f64 = 1e-10;
/// Imaginary parts above this size signal a non-Hermitian gradient.
pub const IMAGINARY_LIMIT: f64 = 1e-8;
/// Closed-form gradients must agree with finite differences to this
/// relative Frobenius error on the construction probe.
pub const GRADIENT_CHECK_TOLERANCE: f64 = 1e-6;
const PROBE_SEED: u64 = 0x5eed_0f9a_d1e7;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum BracketError {
    #[error(transparent)]
    Matrix(#[from] MatrixError),
    #[error(transparent)]
    Generator(#[from] GeneratorError),
    #[error("bracket has imaginary residue {0:e}; a gradient is not Hermitian")]
    ImaginaryResidue(f64),
    #[error("closed-form gradient differs from finite differences by {0:e} (relative)")]
    GradientMismatch(f64),
}

pub type Result<T> = std::result::Result<T, BracketError>;

type ValueFn = Arc<dyn Fn(&DensityMatrix) -> Result<f64> + Send + Sync>;
type GradientFn = Arc<dyn Fn(&DensityMatrix) -> Result<HermitianMatrix> + Send + Sync>;

#[derive(Clone)]
enum GradientMode {
    ClosedForm(GradientFn),
    FiniteDifference { step: f64 },
}

/// Scalar functional `F[ρ]` together with a way to obtain `δF/δρ`.
#[derive(Clone)]
pub struct Functional {
    value: ValueFn,
    gradient: GradientMode,
}

impl fmt::Debug for Functional {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mode = match self.gradient {
            GradientMode::ClosedForm(_) => "closed_form".to_string(),
            GradientMode::FiniteDifference { step } => format!("finite_difference({step:e})"),
        };
        f.debug_struct("Functional").field("gradient", &mode).finish()
    }
}

fn rel_frobenius(a: &HermitianMatrix, b: &HermitianMatrix) -> f64 {
    let scale = b.frobenius_norm().max(a.frobenius_norm()).max(1e-12);
    a.sub(b).frobenius_norm() / scale
}

impl Functional {
    /// Gradient by central differences with the default step.
    pub fn finite_difference<V>(value: V) -> Self
    where
        V: Fn(&DensityMatrix) -> Result<f64> + Send + Sync + 'static,
    {
        Self::finite_difference_with_step(value, DEFAULT_FD_STEP)
    }

    pub fn finite_difference_with_step<V>(value: V, step: f64) -> Self
    where
        V: Fn(&DensityMatrix) -> Result<f64> + Send + Sync + 'static,
    {
        Self {
            value: Arc::new(value),
            gradient: GradientMode::FiniteDifference { step },
        }
    }

    /// Closed-form gradient, verified against finite differences at `probe`.
    pub fn closed_form<V, G>(value: V, gradient: G, probe: &DensityMatrix) -> Result<Self>
    where
        V: Fn(&DensityMatrix) -> Result<f64> + Send + Sync + 'static,
        G: Fn(&DensityMatrix) -> Result<HermitianMatrix> + Send + Sync + 'static,
    {
        let f = Self {
            value: Arc::new(value),
            gradient: GradientMode::ClosedForm(Arc::new(gradient)),
        };
        let closed = f.gradient(probe)?;
        let fd = functional_gradient_fd(|r: &DensityMatrix| f.value(r), probe, fd_step_for(probe))?;
        let err = rel_frobenius(&closed, &fd);
        if err > GRADIENT_CHECK_TOLERANCE {
            return Err(BracketError::GradientMismatch(err));
        }
        Ok(f)
    }

    fn probe(dim: usize) -> DensityMatrix {
        random_density(dim, dim, PROBE_SEED).expect("rank equals dimension")
    }

    /// Linear observable `Tr(ρA)`.
    pub fn linear(a: HermitianMatrix) -> Result<Self> {
        let probe = Self::probe(a.dim());
        let grad = a.clone();
        Self::closed_form(
            move |r| Ok(r.as_hermitian().trace_product(&a)),
            move |_| Ok(grad.clone()),
            &probe,
        )
    }

    /// `Tr ρ`.
    pub fn trace(dim: usize) -> Result<Self> {
        Self::linear(HermitianMatrix::identity(dim))
    }

    /// `f_k = Tr(ρ^k)` with gradient `k ρ^{k-1}`.
    pub fn moment(k: u32, dim: usize) -> Result<Self> {
        Self::closed_form(
            move |r| Ok(r.as_hermitian().powi(k).trace()),
            move |r| match k {
                0 => Ok(HermitianMatrix::zeros(r.dim())),
                _ => Ok(r.as_hermitian().powi(k - 1).scale(k as f64)),
            },
            &Self::probe(dim),
        )
    }

    /// The entropy generator as a functional.
    pub fn generator(s: EntropyGenerator, dim: usize) -> Result<Self> {
        let g = s.clone();
        Self::closed_form(
            move |r| Ok(s.value(r)?),
            move |r| Ok(g.gradient(r)?),
            &Self::probe(dim),
        )
    }

    /// `ρ ↦ inner(Tr_other ρ)`; closed-form gradients lift as `∇inner ⊗ I`.
    pub fn on_subsystem(inner: Functional, shape: BipartiteShape, keep: Subsystem) -> Self {
        let value = {
            let inner = inner.clone();
            Arc::new(move |r: &DensityMatrix| inner.value(&partial_trace(r, shape, keep)?))
                as ValueFn
        };
        let gradient = match inner.gradient.clone() {
            GradientMode::ClosedForm(g) => GradientMode::ClosedForm(Arc::new(move |r: &DensityMatrix| {
                let local = g(&partial_trace(r, shape, keep)?)?;
                Ok(embed(&local, shape, keep)?)
            })),
            fd @ GradientMode::FiniteDifference { .. } => fd,
        };
        Self { value, gradient }
    }

    pub fn value(&self, rho: &DensityMatrix) -> Result<f64> {
        (self.value)(rho)
    }

    pub fn gradient(&self, rho: &DensityMatrix) -> Result<HermitianMatrix> {
        match &self.gradient {
            GradientMode::ClosedForm(g) => g(rho),
            GradientMode::FiniteDifference { step } => {
                Ok(functional_gradient_fd(|r: &DensityMatrix| self.value(r), rho, *step)?)
            }
        }
    }

    pub fn has_closed_form(&self) -> bool {
        matches!(self.gradient, GradientMode::ClosedForm(_))
    }
}

/// `-i Tr([A, B] C)` with the imaginary-residue guard.
pub fn bracket_of_gradients(a: &HermitianMatrix, b: &HermitianMatrix, c: &HermitianMatrix) -> Result<f64> {
    let z = trace_of_product(&commutator(a.matrix(), b.matrix()), c.matrix());
    // -i z = z.im - i z.re
    let residue = z.re.abs();
    if residue > IMAGINARY_LIMIT {
        return Err(BracketError::ImaginaryResidue(residue));
    }
    Ok(z.im)
}

pub fn triple_bracket(f: &Functional, g: &Functional, h: &Functional, rho: &DensityMatrix) -> Result<f64> {
    bracket_of_gradients(&f.gradient(rho)?, &g.gradient(rho)?, &h.gradient(rho)?)
}

/// `{F, G}_S = [F, G, S]`.
pub fn s_bracket(f: &Functional, g: &Functional, s: &EntropyGenerator, rho: &DensityMatrix) -> Result<f64> {
    bracket_of_gradients(&f.gradient(rho)?, &g.gradient(rho)?, &s.gradient(rho)?)
}

/// The bilinear bracket `[F, G, S₂] = -i Tr(ρ [∇F, ∇G])`.
pub fn bbmj_bracket(f: &Functional, g: &Functional, rho: &DensityMatrix) -> Result<f64> {
    s_bracket(f, g, &EntropyGenerator::Quadratic, rho)
}

fn inner_bracket(f: &Functional, g: &Functional, s: &EntropyGenerator) -> Functional {
    let (f, g, s) = (f.clone(), g.clone(), s.clone());
    Functional::finite_difference(move |r| s_bracket(&f, &g, &s, r))
}

/// `{{F,G}_S,H}_S + {{H,F}_S,G}_S + {{G,H}_S,F}_S`, with the inner
/// brackets differentiated by finite differences.
pub fn jacobi_defect(
    f: &Functional,
    g: &Functional,
    h: &Functional,
    s: &EntropyGenerator,
    rho: &DensityMatrix,
) -> Result<f64> {
    let fg = inner_bracket(f, g, s);
    let hf = inner_bracket(h, f, s);
    let gh = inner_bracket(g, h, s);
    Ok(s_bracket(&fg, h, s, rho)? + s_bracket(&hf, g, s, rho)? + s_bracket(&gh, f, s, rho)?)
}

/// `|{F∘Tr₂, G∘Tr₁}_S|` for functionals of the two reduced states.
pub fn local_bracket_check(
    shape: BipartiteShape,
    f_first: &Functional,
    g_second: &Functional,
    s: &EntropyGenerator,
    rho: &DensityMatrix,
) -> Result<f64> {
    if rho.dim() != shape.total() {
        return Err(MatrixError::DimensionMismatch {
            expected: shape.total(),
            found: rho.dim(),
        }
        .into());
    }
    let f = Functional::on_subsystem(f_first.clone(), shape, Subsystem::First);
    let g = Functional::on_subsystem(g_second.clone(), shape, Subsystem::Second);
    Ok(s_bracket(&f, &g, s, rho)?.abs())
}

/// `|[f_m, G, S]|`, which vanishes for every moment-built `S`.
pub fn moment_casimir_check(m: u32, g: &Functional, s: &EntropyGenerator, rho: &DensityMatrix) -> Result<f64> {
    let fm = Functional::moment(m, rho.dim())?;
    Ok(s_bracket(&fm, g, s, rho)?.abs())
}
