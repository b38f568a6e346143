//! Integration of the generalized Liouville–von Neumann equation
//! `i dρ/dτ = [Ĥ, ∇S(ρ)]` with fixed-step classical Runge–Kutta.

use crate::generators::{EntropyGenerator, F2Profile, GeneratorError};
use crate::matrix::{
    moments_from_eigenvalues, spectral_decompose, trace_distance, CMatrix, DensityMatrix,
    HermitianMatrix, MatrixError, SpectralDecomposition, C64, SUPPORT_THRESHOLD,
};
use thiserror::Error;

/// Number of moments `f_1..f_K` tracked per recorded state.
pub const TRACKED_MOMENTS: u32 = 5;
/// Trace of a normalized initial state must be 1 within this tolerance.
pub const NORMALIZATION_TOLERANCE: f64 = 1e-10;

#[derive(Debug, Error)]
pub enum DynamicsError {
    #[error("invalid evolution spec: {0}")]
    InvalidSpec(String),
    #[error(transparent)]
    Matrix(#[from] MatrixError),
    #[error("generator failed at t = {time}: {source}")]
    Generator {
        time: f64,
        #[source]
        source: GeneratorError,
    },
    #[error("{quantity} drifted by {drift:e} at t = {time} (tolerance {tolerance:e})")]
    Drift {
        time: f64,
        quantity: String,
        drift: f64,
        tolerance: f64,
        partial: Box<Trajectory>,
    },
}

pub type Result<T> = std::result::Result<T, DynamicsError>;

/// Everything needed to integrate one trajectory.
#[derive(Debug, Clone)]
pub struct EvolutionSpec {
    pub hamiltonian: HermitianMatrix,
    pub generator: EntropyGenerator,
    pub rho0: DensityMatrix,
    pub t_final: f64,
    pub dt: f64,
    pub record_every: usize,
    /// Relative drift of the conserved quantities that aborts a run.
    pub tolerance: f64,
    pub allow_unnormalized: bool,
}

impl EvolutionSpec {
    /// Spec with `record_every = 1`, drift tolerance `1e-6` and a normalized state.
    pub fn new(
        hamiltonian: HermitianMatrix,
        generator: EntropyGenerator,
        rho0: DensityMatrix,
        t_final: f64,
        dt: f64,
    ) -> Result<Self> {
        let spec = Self {
            hamiltonian,
            generator,
            rho0,
            t_final,
            dt,
            record_every: 1,
            tolerance: 1e-6,
            allow_unnormalized: false,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn record_every(mut self, n: usize) -> Self {
        self.record_every = n;
        self
    }

    pub fn tolerance(mut self, tol: f64) -> Self {
        self.tolerance = tol;
        self
    }

    pub fn allow_unnormalized(mut self, allow: bool) -> Self {
        self.allow_unnormalized = allow;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(DynamicsError::InvalidSpec(m));
        if self.hamiltonian.dim() != self.rho0.dim() {
            return bad(format!(
                "hamiltonian is {0}x{0} but rho0 is {1}x{1}",
                self.hamiltonian.dim(),
                self.rho0.dim()
            ));
        }
        if !(self.t_final >= 0.0) || !self.t_final.is_finite() {
            return bad(format!("t_final must be finite and >= 0, got {}", self.t_final));
        }
        if !(self.dt > 0.0) || !self.dt.is_finite() {
            return bad(format!("dt must be finite and > 0, got {}", self.dt));
        }
        if self.t_final > 0.0 && self.dt > self.t_final {
            return bad(format!("dt = {} exceeds t_final = {}", self.dt, self.t_final));
        }
        if self.record_every == 0 {
            return bad("record_every must be at least 1".into());
        }
        if !(self.tolerance > 0.0) {
            return bad(format!("tolerance must be positive, got {}", self.tolerance));
        }
        if !self.allow_unnormalized && (self.rho0.trace() - 1.0).abs() > NORMALIZATION_TOLERANCE {
            return bad(format!(
                "rho0 has trace {} but normalized states are required",
                self.rho0.trace()
            ));
        }
        self.generator
            .validate()
            .map_err(|source| DynamicsError::Generator { time: 0.0, source })
    }

    /// Number of integration steps and the step actually used.
    pub fn steps(&self) -> (usize, f64) {
        if self.t_final == 0.0 {
            return (0, self.dt);
        }
        let n = (self.t_final / self.dt - 1e-9).ceil().max(1.0) as usize;
        (n, self.t_final / n as f64)
    }
}

/// Per-state diagnostics.
#[derive(Debug, Clone, PartialEq)]
pub struct Diagnostics {
    /// `f_1..f_5`.
    pub moments: Vec<f64>,
    /// Ascending.
    pub eigenvalues: Vec<f64>,
    pub generator_value: f64,
    /// Composite part values; a single entry equal to `generator_value` otherwise.
    pub part_values: Vec<f64>,
    /// `Tr(ρĤ)`.
    pub energy: f64,
}

impl Diagnostics {
    fn of(rho: &DensityMatrix, spec: &EvolutionSpec, time: f64, null_dim: usize) -> Result<Self> {
        let eigenvalues = rho.eigenvalues();
        let moments = moments_from_eigenvalues(&eigenvalues, TRACKED_MOMENTS);
        let gen_err = |source| DynamicsError::Generator { time, source };
        let tracked = restrict_support(rho, null_dim);
        let part_values = spec.generator.part_values(&tracked).map_err(gen_err)?;
        let generator_value = spec.generator.value(&tracked).map_err(gen_err)?;
        Ok(Self {
            moments,
            eigenvalues,
            generator_value,
            part_values,
            energy: rho.as_hermitian().trace_product(&spec.hamiltonian),
        })
    }
}

#[derive(Debug, Clone, Default)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<DensityMatrix>,
    pub diagnostics: Vec<Diagnostics>,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    fn push(&mut self, t: f64, rho: DensityMatrix, d: Diagnostics) {
        self.times.push(t);
        self.states.push(rho);
        self.diagnostics.push(d);
    }

    /// Largest elementwise change of the sorted spectrum from the first state.
    pub fn max_eigenvalue_drift(&self) -> f64 {
        let Some(first) = self.diagnostics.first() else {
            return 0.0;
        };
        self.diagnostics
            .iter()
            .flat_map(|d| d.eigenvalues.iter().zip(&first.eigenvalues).map(|(a, b)| (a - b).abs()))
            .fold(0.0, f64::max)
    }

    /// Largest relative change of each moment `f_k` from the first state.
    pub fn max_moment_drift(&self) -> Vec<f64> {
        let Some(first) = self.diagnostics.first() else {
            return Vec::new();
        };
        (0..first.moments.len())
            .map(|k| {
                self.diagnostics
                    .iter()
                    .map(|d| relative_change(d.moments[k], first.moments[k]))
                    .fold(0.0, f64::max)
            })
            .collect()
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.diagnostics
            .iter()
            .map(|d| d.eigenvalues[0])
            .fold(f64::INFINITY, f64::min)
    }

    pub fn max_generator_drift(&self) -> f64 {
        let Some(first) = self.diagnostics.first() else {
            return 0.0;
        };
        self.diagnostics
            .iter()
            .map(|d| relative_change(d.generator_value, first.generator_value))
            .fold(0.0, f64::max)
    }

    pub fn last_state(&self) -> Option<&DensityMatrix> {
        self.states.last()
    }
}

fn relative_change(value: f64, reference: f64) -> f64 {
    (value - reference).abs() / reference.abs().max(f64::MIN_POSITIVE)
}

/// Dimension of the null space of `rho0` that the flow carries along.
///
/// Moment-built generators conserve the spectrum, so a rank-deficient
/// initial state stays rank-deficient; subsystem composites do not.
fn conserved_null_dim(spec: &EvolutionSpec) -> usize {
    if !spec.generator.is_moment_function() {
        return 0;
    }
    spec.rho0
        .eigenvalues()
        .iter()
        .take_while(|&&l| l <= SUPPORT_THRESHOLD)
        .count()
}

/// `rho` with its `null_dim` smallest eigenvalues set to zero.
///
/// RK4 stages of a rank-deficient state leave the conserved null space by
/// O(h²), and `λ^{α-1}` is not smooth at 0. The restricted state agrees with
/// `rho` on the invariant manifold and depends smoothly on it nearby.
fn restrict_support(rho: &DensityMatrix, null_dim: usize) -> DensityMatrix {
    if null_dim == 0 {
        return rho.clone();
    }
    let mut sd = spectral_decompose(rho.as_hermitian());
    for l in sd.eigenvalues.iter_mut().take(null_dim) {
        *l = 0.0;
    }
    DensityMatrix::unchecked(sd.reconstruct())
}

fn rhs_at(
    rho: &DensityMatrix,
    spec: &EvolutionSpec,
    null_dim: usize,
) -> std::result::Result<HermitianMatrix, GeneratorError> {
    let grad = spec.generator.gradient(&restrict_support(rho, null_dim))?;
    Ok(spec.hamiltonian.commutator_times_minus_i(&grad))
}

/// `dρ/dτ = -i [Ĥ, ∇S(ρ)]`.
pub fn rhs(rho: &DensityMatrix, spec: &EvolutionSpec) -> Result<HermitianMatrix> {
    rhs_at(rho, spec, 0).map_err(|source| DynamicsError::Generator { time: 0.0, source })
}

fn rk4_step(
    rho: &HermitianMatrix,
    h: f64,
    spec: &EvolutionSpec,
    null_dim: usize,
) -> std::result::Result<HermitianMatrix, GeneratorError> {
    let eval = |m: HermitianMatrix| rhs_at(&DensityMatrix::unchecked(m), spec, null_dim);
    let k1 = eval(rho.clone())?;
    let k2 = eval(rho.add(&k1.scale(0.5 * h)))?;
    let k3 = eval(rho.add(&k2.scale(0.5 * h)))?;
    let k4 = eval(rho.add(&k3.scale(h)))?;
    let incr = k1.add(&k2.scale(2.0)).add(&k3.scale(2.0)).add(&k4).scale(h / 6.0);
    Ok(HermitianMatrix::symmetrized(rho.add(&incr).into_matrix()))
}

/// Quantities watched by the drift alarm: the moments for moment-built
/// generators, the composite part values otherwise.
fn watched(spec: &EvolutionSpec, d: &Diagnostics) -> Vec<(String, f64)> {
    if spec.generator.is_moment_function() {
        d.moments
            .iter()
            .enumerate()
            .map(|(k, &v)| (format!("f{}", k + 1), v))
            .collect()
    } else {
        d.part_values
            .iter()
            .enumerate()
            .map(|(k, &v)| (format!("part {k} entropy"), v))
            .collect()
    }
}

pub fn evolve(spec: &EvolutionSpec) -> Result<Trajectory> {
    spec.validate()?;
    let (n_steps, h) = spec.steps();
    let mut traj = Trajectory::default();
    let null_dim = conserved_null_dim(spec);
    let d0 = Diagnostics::of(&spec.rho0, spec, 0.0, null_dim)?;
    let reference = watched(spec, &d0);
    traj.push(0.0, spec.rho0.clone(), d0);

    let mut rho = spec.rho0.as_hermitian().clone();
    for step in 1..=n_steps {
        let t = step as f64 * h;
        rho = rk4_step(&rho, h, spec, null_dim).map_err(|source| DynamicsError::Generator {
            time: t - h,
            source,
        })?;
        if step % spec.record_every != 0 && step != n_steps {
            continue;
        }
        let state = DensityMatrix::unchecked(rho.clone());
        let d = Diagnostics::of(&state, spec, t, null_dim)?;
        let alarm = watched(spec, &d)
            .into_iter()
            .zip(&reference)
            .map(|((name, v), (_, v0))| (name, relative_change(v, *v0)))
            .find(|(_, drift)| *drift > spec.tolerance);
        traj.push(t, state, d);
        if let Some((quantity, drift)) = alarm {
            return Err(DynamicsError::Drift {
                time: t,
                quantity,
                drift,
                tolerance: spec.tolerance,
                partial: Box::new(traj),
            });
        }
    }
    Ok(traj)
}

/// Exact solution `U(t) ρ U(t)†`, `U(t) = exp(-iĤt)`, of the linear equation.
#[derive(Debug, Clone)]
pub struct LinearPropagator {
    spectrum: SpectralDecomposition,
}

impl LinearPropagator {
    pub fn new(hamiltonian: &HermitianMatrix) -> Self {
        Self {
            spectrum: spectral_decompose(hamiltonian),
        }
    }

    pub fn unitary(&self, t: f64) -> CMatrix {
        let v = &self.spectrum.eigenvectors;
        let n = v.nrows();
        let mut scaled = v.clone();
        for (j, &e) in self.spectrum.eigenvalues.iter().enumerate() {
            let phase = C64::from_polar(1.0, -e * t);
            for i in 0..n {
                scaled[(i, j)] *= phase;
            }
        }
        scaled * v.adjoint()
    }

    pub fn evolve(&self, rho0: &DensityMatrix, t: f64) -> DensityMatrix {
        let u = self.unitary(t);
        let m = &u * rho0.matrix() * u.adjoint();
        DensityMatrix::unchecked(HermitianMatrix::symmetrized(m))
    }
}

pub fn exact_linear(hamiltonian: &HermitianMatrix, rho0: &DensityMatrix, t: f64) -> DensityMatrix {
    LinearPropagator::new(hamiltonian).evolve(rho0, t)
}

/// Largest trace distance between `traj` and the linear flow at `speed · t`.
pub fn max_deviation_from_linear(traj: &Trajectory, hamiltonian: &HermitianMatrix, speed: f64) -> f64 {
    let Some(rho0) = traj.states.first() else {
        return 0.0;
    };
    let prop = LinearPropagator::new(hamiltonian);
    traj.times
        .iter()
        .zip(&traj.states)
        .map(|(&t, rho)| trace_distance(rho.as_hermitian(), prop.evolve(rho0, speed * t).as_hermitian()))
        .fold(0.0, f64::max)
}

#[derive(Debug, Clone, PartialEq)]
pub struct RescalingReport {
    /// `C₀ = 2 g'(f₂[ρ₀])`.
    pub speed: f64,
    pub max_deviation: f64,
}

/// Compares the `S = g(f₂)` flow against the linear flow run at speed `C₀`.
pub fn time_rescaling_check(
    profile: F2Profile,
    hamiltonian: &HermitianMatrix,
    rho0: &DensityMatrix,
    t_final: f64,
    dt: f64,
) -> Result<RescalingReport> {
    let f2 = rho0.as_hermitian().trace_product(rho0.as_hermitian());
    let speed = 2.0 * profile.d1(f2);
    let spec = EvolutionSpec::new(
        hamiltonian.clone(),
        EntropyGenerator::SmoothF2(profile),
        rho0.clone(),
        t_final,
        dt,
    )?
    .allow_unnormalized(true);
    let traj = evolve(&spec)?;
    Ok(RescalingReport {
        speed,
        max_deviation: max_deviation_from_linear(&traj, hamiltonian, speed),
    })
}

/// `Tr(ρ_t F̂) / Tr ρ_t` at each recorded time.
pub fn observable_average(traj: &Trajectory, obs: &HermitianMatrix) -> Result<Vec<f64>> {
    traj.states
        .iter()
        .map(|rho| {
            if rho.dim() != obs.dim() {
                return Err(MatrixError::DimensionMismatch {
                    expected: rho.dim(),
                    found: obs.dim(),
                }
                .into());
            }
            Ok(rho.as_hermitian().trace_product(obs) / rho.trace())
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct SubentropyReport {
    /// Largest relative drift of each part value `S_k[ρ_k(t)]`.
    pub part_drifts: Vec<f64>,
    /// Largest relative drift of `S / S_k` for each part.
    pub ratio_drifts: Vec<f64>,
}

/// Evolves a composite spec and measures the drift of every sub-entropy.
pub fn subentropy_conservation_check(spec: &EvolutionSpec) -> Result<SubentropyReport> {
    let EntropyGenerator::Composite(parts) = &spec.generator else {
        return Err(DynamicsError::InvalidSpec("generator is not composite".into()));
    };
    if parts.iter().all(|p| p.subsystem.is_none()) {
        return Err(DynamicsError::InvalidSpec(
            "no composite part acts on a subsystem".into(),
        ));
    }
    for p in parts {
        if let Some(m) = p.subsystem {
            if m.shape.total() != spec.rho0.dim() {
                return Err(MatrixError::DimensionMismatch {
                    expected: spec.rho0.dim(),
                    found: m.shape.total(),
                }
                .into());
            }
        }
    }
    let traj = evolve(spec)?;
    let first = &traj.diagnostics[0];
    let part_drifts = (0..parts.len())
        .map(|k| {
            traj.diagnostics
                .iter()
                .map(|d| relative_change(d.part_values[k], first.part_values[k]))
                .fold(0.0, f64::max)
        })
        .collect();
    let ratio = |d: &Diagnostics, k: usize| d.generator_value / d.part_values[k];
    let ratio_drifts = (0..parts.len())
        .map(|k| {
            traj.diagnostics
                .iter()
                .map(|d| relative_change(ratio(d, k), ratio(first, k)))
                .fold(0.0, f64::max)
        })
        .collect();
    Ok(SubentropyReport {
        part_drifts,
        ratio_drifts,
    })
}
