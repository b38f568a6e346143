//! Entropy Casimir functionals `S[ρ]` and their operator gradients `δS/δρ`.

use crate::matrix::{
    embed, partial_trace, power_from_spectrum, spectral_decompose, support_power, BipartiteShape,
    DensityMatrix, HermitianMatrix, MatrixError, Subsystem, SUPPORT_THRESHOLD,
};
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Composite weights must sum to one within this tolerance.
pub const WEIGHT_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GeneratorError {
    #[error(transparent)]
    Matrix(#[from] MatrixError),
    #[error("alpha must be finite, positive and different from 1, got {0}")]
    InvalidAlpha(f64),
    #[error("alpha = {alpha} < 1 needs a full-rank state, found eigenvalue {eigenvalue:e}")]
    NotFullRank { alpha: f64, eigenvalue: f64 },
    #[error("composite part {index} has non-positive value {value:e}")]
    NonPositivePart { index: usize, value: f64 },
    #[error("composite weight {index} = {weight} is not positive")]
    NonPositiveWeight { index: usize, weight: f64 },
    #[error("composite weights sum to {0}, expected 1")]
    WeightSum(f64),
    #[error("composite generator has no parts")]
    EmptyComposite,
    #[error("composite part {0} is itself composite; flatten the weights first")]
    NestedComposite(usize),
    #[error("invalid f2 profile: {0}")]
    InvalidProfile(String),
    #[error("generator spec: {0}")]
    Spec(String),
}

pub type Result<T> = std::result::Result<T, GeneratorError>;

/// Smooth scalar profile `g(f₂)` with `g(x) = ½ x^p`.
///
/// `p = 1` reproduces `S₂ = ½ Tr ρ²`; `p = 2` is the half square `½ f₂²`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct F2Profile {
    exponent: f64,
}

impl F2Profile {
    pub const HALF_SQUARE: F2Profile = F2Profile { exponent: 2.0 };
    pub const LINEAR: F2Profile = F2Profile { exponent: 1.0 };

    pub fn half_power(exponent: f64) -> Result<Self> {
        if !exponent.is_finite() || exponent <= 0.0 {
            return Err(GeneratorError::InvalidProfile(format!(
                "exponent must be positive, got {exponent}"
            )));
        }
        Ok(Self { exponent })
    }

    pub fn exponent(&self) -> f64 {
        self.exponent
    }

    pub fn value(&self, x: f64) -> f64 {
        0.5 * x.powf(self.exponent)
    }

    pub fn d1(&self, x: f64) -> f64 {
        0.5 * self.exponent * x.powf(self.exponent - 1.0)
    }

    pub fn d2(&self, x: f64) -> f64 {
        0.5 * self.exponent * (self.exponent - 1.0) * x.powf(self.exponent - 2.0)
    }
}

/// Restricts a composite part to a reduced density matrix.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SubsystemMap {
    pub shape: BipartiteShape,
    pub keep: Subsystem,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CompositePart {
    pub generator: EntropyGenerator,
    pub weight: f64,
    pub subsystem: Option<SubsystemMap>,
}

impl CompositePart {
    pub fn global(generator: EntropyGenerator, weight: f64) -> Self {
        Self {
            generator,
            weight,
            subsystem: None,
        }
    }

    pub fn on_subsystem(
        generator: EntropyGenerator,
        weight: f64,
        shape: BipartiteShape,
        keep: Subsystem,
    ) -> Self {
        Self {
            generator,
            weight,
            subsystem: Some(SubsystemMap { shape, keep }),
        }
    }

    /// State the part acts on: `ρ` itself or a reduced density matrix.
    fn local_state(&self, rho: &DensityMatrix) -> Result<DensityMatrix> {
        match self.subsystem {
            None => Ok(rho.clone()),
            Some(m) => Ok(partial_trace(rho, m.shape, m.keep)?),
        }
    }

    pub fn value(&self, rho: &DensityMatrix) -> Result<f64> {
        self.generator.value(&self.local_state(rho)?)
    }

    fn gradient(&self, rho: &DensityMatrix) -> Result<HermitianMatrix> {
        let local = self.generator.gradient(&self.local_state(rho)?)?;
        match self.subsystem {
            None => Ok(local),
            Some(m) => Ok(embed(&local, m.shape, m.keep)?),
        }
    }
}

/// Family of generalized entropies.
#[derive(Debug, Clone, PartialEq)]
pub enum EntropyGenerator {
    /// `½ Tr ρ²`.
    Quadratic,
    /// `(1 - 1/α) (Tr ρ^α)^{1/(α-1)} / (Tr ρ)^{1/(α-1) - 1}`.
    RenyiHomogeneous { alpha: f64 },
    /// `½ (Tr ρ^α)^{1/(α-1)} / (Tr ρ)^{1/(α-1) - 1}`.
    RenyiPure { alpha: f64 },
    /// `g(Tr ρ²)`.
    SmoothF2(F2Profile),
    /// `Π_k S_k^{p_k}`.
    Composite(Vec<CompositePart>),
}

fn check_alpha(alpha: f64) -> Result<()> {
    if !alpha.is_finite() || alpha <= 0.0 || alpha == 1.0 {
        return Err(GeneratorError::InvalidAlpha(alpha));
    }
    Ok(())
}

/// Ingredients of both Rényi-type generators at a given state.
struct RenyiParts {
    /// `Tr ρ^α`
    power_trace: f64,
    /// `ρ^{α-1}`
    power: HermitianMatrix,
    trace: f64,
}

fn is_small_integer(x: f64) -> bool {
    x.fract() == 0.0 && (1.0..=8.0).contains(&x)
}

fn renyi_parts(rho: &DensityMatrix, alpha: f64) -> Result<RenyiParts> {
    let h = rho.as_hermitian();
    let trace = rho.trace();
    if is_small_integer(alpha) {
        let power = h.powi(alpha as u32 - 1);
        let power_trace = power.trace_product(h);
        return Ok(RenyiParts {
            power_trace,
            power,
            trace,
        });
    }
    let spec = spectral_decompose(h);
    if alpha < 1.0 && spec.eigenvalues[0] <= SUPPORT_THRESHOLD {
        return Err(GeneratorError::NotFullRank {
            alpha,
            eigenvalue: spec.eigenvalues[0],
        });
    }
    let power = power_from_spectrum(&spec, alpha - 1.0)?;
    let power_trace = spec.eigenvalues.iter().map(|&l| support_power(l, alpha)).sum();
    Ok(RenyiParts {
        power_trace,
        power,
        trace,
    })
}

impl EntropyGenerator {
    pub fn renyi_homogeneous(alpha: f64) -> Result<Self> {
        check_alpha(alpha)?;
        Ok(Self::RenyiHomogeneous { alpha })
    }

    pub fn renyi_pure(alpha: f64) -> Result<Self> {
        check_alpha(alpha)?;
        Ok(Self::RenyiPure { alpha })
    }

    pub fn smooth_f2(profile: F2Profile) -> Self {
        Self::SmoothF2(profile)
    }

    pub fn composite(parts: Vec<CompositePart>) -> Result<Self> {
        let g = Self::Composite(parts);
        g.validate()?;
        Ok(g)
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            Self::Quadratic | Self::SmoothF2(_) => Ok(()),
            Self::RenyiHomogeneous { alpha } | Self::RenyiPure { alpha } => check_alpha(*alpha),
            Self::Composite(parts) => {
                if parts.is_empty() {
                    return Err(GeneratorError::EmptyComposite);
                }
                let mut sum = 0.0;
                for (index, part) in parts.iter().enumerate() {
                    if matches!(part.generator, Self::Composite(_)) {
                        return Err(GeneratorError::NestedComposite(index));
                    }
                    if !(part.weight > 0.0) || !part.weight.is_finite() {
                        return Err(GeneratorError::NonPositiveWeight {
                            index,
                            weight: part.weight,
                        });
                    }
                    part.generator.validate()?;
                    sum += part.weight;
                }
                if (sum - 1.0).abs() > WEIGHT_TOLERANCE {
                    return Err(GeneratorError::WeightSum(sum));
                }
                Ok(())
            }
        }
    }

    /// The Rényi index, for the variants that carry one.
    pub fn alpha(&self) -> Option<f64> {
        match self {
            Self::RenyiHomogeneous { alpha } | Self::RenyiPure { alpha } => Some(*alpha),
            _ => None,
        }
    }

    /// Copy with the Rényi index replaced; `None` for variants without one.
    pub fn with_alpha(&self, alpha: f64) -> Option<Result<Self>> {
        match self {
            Self::RenyiHomogeneous { .. } => Some(Self::renyi_homogeneous(alpha)),
            Self::RenyiPure { .. } => Some(Self::renyi_pure(alpha)),
            _ => None,
        }
    }

    /// True when `S` depends on `ρ` only through the moments `Tr ρ^k`.
    pub fn is_moment_function(&self) -> bool {
        match self {
            Self::Composite(parts) => parts.iter().all(|p| p.subsystem.is_none()),
            _ => true,
        }
    }

    fn renyi_prefactor(&self, alpha: f64) -> f64 {
        match self {
            Self::RenyiPure { .. } => 0.5,
            _ => 1.0 - 1.0 / alpha,
        }
    }

    pub fn value(&self, rho: &DensityMatrix) -> Result<f64> {
        self.validate()?;
        match self {
            Self::Quadratic => Ok(0.5 * f2(rho)),
            Self::RenyiHomogeneous { alpha } | Self::RenyiPure { alpha } => {
                let alpha = *alpha;
                let parts = renyi_parts(rho, alpha)?;
                let u = 1.0 / (alpha - 1.0);
                let c = self.renyi_prefactor(alpha);
                Ok(c * parts.power_trace.powf(u) * parts.trace.powf(1.0 - u))
            }
            Self::SmoothF2(g) => Ok(g.value(f2(rho))),
            Self::Composite(parts) => {
                let values = self.part_values(rho)?;
                Ok(composite_value(parts, &values))
            }
        }
    }

    /// Values of each composite part (a single entry for other variants).
    pub fn part_values(&self, rho: &DensityMatrix) -> Result<Vec<f64>> {
        match self {
            Self::Composite(parts) => parts
                .iter()
                .enumerate()
                .map(|(index, p)| {
                    let value = p.value(rho)?;
                    if !(value > 0.0) {
                        return Err(GeneratorError::NonPositivePart { index, value });
                    }
                    Ok(value)
                })
                .collect(),
            _ => Ok(vec![self.value(rho)?]),
        }
    }

    /// True functional derivative `δS/δρ`, identity component included.
    pub fn gradient(&self, rho: &DensityMatrix) -> Result<HermitianMatrix> {
        self.validate()?;
        match self {
            Self::Quadratic => Ok(rho.as_hermitian().clone()),
            Self::RenyiHomogeneous { alpha } | Self::RenyiPure { alpha } => {
                let alpha = *alpha;
                let RenyiParts {
                    power_trace,
                    power,
                    trace,
                } = renyi_parts(rho, alpha)?;
                let u = 1.0 / (alpha - 1.0);
                let c = self.renyi_prefactor(alpha);
                let coeff = c * alpha * u * power_trace.powf(u - 1.0) * trace.powf(1.0 - u);
                let shift = c * (1.0 - u) * power_trace.powf(u) * trace.powf(-u);
                Ok(power.scale(coeff).shift(shift))
            }
            Self::SmoothF2(g) => Ok(rho.as_hermitian().scale(2.0 * g.d1(f2(rho)))),
            Self::Composite(parts) => {
                let values = self.part_values(rho)?;
                let total = composite_value(parts, &values);
                let mut acc = HermitianMatrix::zeros(rho.dim());
                for (part, v) in parts.iter().zip(&values) {
                    acc = acc.add(&part.gradient(rho)?.scale(part.weight * total / v));
                }
                Ok(acc)
            }
        }
    }
}

fn f2(rho: &DensityMatrix) -> f64 {
    let h = rho.as_hermitian();
    h.trace_product(h)
}

fn composite_value(parts: &[CompositePart], values: &[f64]) -> f64 {
    parts
        .iter()
        .zip(values)
        .map(|(p, v)| v.powf(p.weight))
        .product()
}

/// Relative defect `|S(λρ) - λ² S(ρ)| / |λ² S(ρ)|` of 2-homogeneity.
pub fn check_homogeneity(s: &EntropyGenerator, rho: &DensityMatrix, lambda: f64) -> Result<f64> {
    let scaled = rho.scaled(lambda)?;
    let expected = lambda * lambda * s.value(rho)?;
    Ok((s.value(&scaled)? - expected).abs() / expected.abs())
}

/// Configuration form of a generator.
///
/// ```json
/// {"kind": "composite", "parts": [
///     {"kind": "renyi_pure", "alpha": 1.5, "weight": 0.5, "subsystem": "first"},
///     {"kind": "quadratic", "weight": 0.5, "subsystem": "second"}]}
/// ```
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeneratorSpec {
    pub kind: GeneratorKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub g: Option<ProfileSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub parts: Option<Vec<PartSpec>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GeneratorKind {
    Quadratic,
    RenyiHom,
    RenyiPure,
    SmoothF2,
    Composite,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProfileForm {
    HalfSquare,
    Power,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProfileSpec {
    pub form: ProfileForm,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub exponent: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PartSpec {
    #[serde(flatten)]
    pub generator: GeneratorSpec,
    pub weight: f64,
    #[serde(default)]
    pub subsystem: Option<Subsystem>,
}

impl GeneratorSpec {
    /// Builds the generator; `shape` is required when any part names a subsystem.
    pub fn build(&self, shape: Option<BipartiteShape>) -> Result<EntropyGenerator> {
        let need_alpha = || {
            self.alpha
                .ok_or_else(|| GeneratorError::Spec(format!("{:?} requires \"alpha\"", self.kind)))
        };
        match self.kind {
            GeneratorKind::Quadratic => Ok(EntropyGenerator::Quadratic),
            GeneratorKind::RenyiHom => EntropyGenerator::renyi_homogeneous(need_alpha()?),
            GeneratorKind::RenyiPure => EntropyGenerator::renyi_pure(need_alpha()?),
            GeneratorKind::SmoothF2 => {
                let g = self
                    .g
                    .as_ref()
                    .ok_or_else(|| GeneratorError::Spec("smooth_f2 requires \"g\"".into()))?;
                let profile = match g.form {
                    ProfileForm::HalfSquare => F2Profile::HALF_SQUARE,
                    ProfileForm::Power => F2Profile::half_power(g.exponent.ok_or_else(|| {
                        GeneratorError::Spec("g.form \"power\" requires \"exponent\"".into())
                    })?)?,
                };
                Ok(EntropyGenerator::SmoothF2(profile))
            }
            GeneratorKind::Composite => {
                let specs = self
                    .parts
                    .as_ref()
                    .ok_or_else(|| GeneratorError::Spec("composite requires \"parts\"".into()))?;
                let mut parts = Vec::with_capacity(specs.len());
                for (i, p) in specs.iter().enumerate() {
                    let generator = p.generator.build(shape)?;
                    let subsystem = match p.subsystem {
                        None => None,
                        Some(keep) => {
                            let shape = shape.ok_or_else(|| {
                                GeneratorError::Spec(format!(
                                    "parts[{i}] names a subsystem but no \"bipartite\" shape is configured"
                                ))
                            })?;
                            Some(SubsystemMap { shape, keep })
                        }
                    };
                    parts.push(CompositePart {
                        generator,
                        weight: p.weight,
                        subsystem,
                    });
                }
                EntropyGenerator::composite(parts)
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::{functional_gradient_fd, pauli, random_density, DEFAULT_FD_STEP};
    use approx::assert_abs_diff_eq;

    fn rel_err(a: &HermitianMatrix, b: &HermitianMatrix) -> f64 {
        a.sub(b).frobenius_norm() / b.frobenius_norm().max(1e-300)
    }

    #[test]
    fn value_examples() {
        let pure = pauli::plus();
        assert_abs_diff_eq!(EntropyGenerator::Quadratic.value(&pure).unwrap(), 0.5, epsilon = 1e-14);
        let rho = random_density(3, 3, 1).unwrap();
        let q = EntropyGenerator::Quadratic.value(&rho).unwrap();
        let r2 = EntropyGenerator::renyi_homogeneous(2.0).unwrap().value(&rho).unwrap();
        assert_abs_diff_eq!(q, r2, epsilon = 1e-15);
        let c = 1.7;
        let pure_c = pure.scaled(c).unwrap();
        let rp = EntropyGenerator::renyi_pure(1.5).unwrap().value(&pure_c).unwrap();
        assert_abs_diff_eq!(rp, 0.5 * c * c, epsilon = 1e-12);
    }

    #[test]
    fn smooth_f2_gradient_example() {
        let rho = DensityMatrix::from_diagonal(&[0.7, 0.3]).unwrap();
        let g = EntropyGenerator::SmoothF2(F2Profile::HALF_SQUARE).gradient(&rho).unwrap();
        assert_abs_diff_eq!(g.matrix()[(0, 0)].re, 0.812, epsilon = 1e-14);
        assert_abs_diff_eq!(g.matrix()[(1, 1)].re, 0.348, epsilon = 1e-14);
        assert_eq!(g.matrix()[(0, 1)].norm(), 0.0);
    }

    #[test]
    fn quadratic_gradient_is_rho() {
        let rho = random_density(4, 2, 3).unwrap();
        let g = EntropyGenerator::Quadratic.gradient(&rho).unwrap();
        assert_eq!(&g, rho.as_hermitian());
    }

    #[test]
    fn gradients_match_finite_differences() {
        let gens = [
            EntropyGenerator::Quadratic,
            EntropyGenerator::renyi_homogeneous(1.5).unwrap(),
            EntropyGenerator::renyi_homogeneous(0.6).unwrap(),
            EntropyGenerator::renyi_pure(2.5).unwrap(),
            EntropyGenerator::SmoothF2(F2Profile::HALF_SQUARE),
        ];
        for (i, s) in gens.iter().enumerate() {
            let rho = random_density(3, 3, 40 + i as u64).unwrap();
            let closed = s.gradient(&rho).unwrap();
            let fd = functional_gradient_fd(|r: &DensityMatrix| s.value(r), &rho, DEFAULT_FD_STEP).unwrap();
            assert!(rel_err(&closed, &fd) < 1e-6, "{s:?}: {}", rel_err(&closed, &fd));
        }
    }

    #[test]
    fn homogeneity_examples() {
        let rho = random_density(3, 3, 2).unwrap();
        let d = check_homogeneity(&EntropyGenerator::Quadratic, &rho, 3.0).unwrap();
        assert!(d < 1e-12);
        let s = EntropyGenerator::renyi_homogeneous(1.5).unwrap();
        assert!(check_homogeneity(&s, &rho, 2.0).unwrap() < 1e-10);
        let s = EntropyGenerator::SmoothF2(F2Profile::HALF_SQUARE);
        assert_abs_diff_eq!(check_homogeneity(&s, &rho, 2.0).unwrap(), 3.0, epsilon = 1e-12);
    }

    #[test]
    fn sub_unit_alpha_needs_full_rank() {
        let rho = random_density(3, 2, 5).unwrap();
        let s = EntropyGenerator::renyi_homogeneous(0.5).unwrap();
        assert!(matches!(s.value(&rho), Err(GeneratorError::NotFullRank { .. })));
        assert!(matches!(s.gradient(&rho), Err(GeneratorError::NotFullRank { .. })));
    }

    #[test]
    fn invalid_generators_are_rejected() {
        assert!(EntropyGenerator::renyi_homogeneous(1.0).is_err());
        assert!(EntropyGenerator::renyi_pure(-2.0).is_err());
        let q = || EntropyGenerator::Quadratic;
        assert!(matches!(
            EntropyGenerator::composite(vec![CompositePart::global(q(), 1.0), CompositePart::global(q(), 0.0)]),
            Err(GeneratorError::NonPositiveWeight { index: 1, .. })
        ));
        assert!(matches!(
            EntropyGenerator::composite(vec![CompositePart::global(q(), 0.4), CompositePart::global(q(), 0.4)]),
            Err(GeneratorError::WeightSum(_))
        ));
        let inner = EntropyGenerator::composite(vec![CompositePart::global(q(), 1.0)]).unwrap();
        assert!(matches!(
            EntropyGenerator::composite(vec![CompositePart::global(inner, 1.0)]),
            Err(GeneratorError::NestedComposite(0))
        ));
        assert_eq!(EntropyGenerator::composite(vec![]), Err(GeneratorError::EmptyComposite));
    }

    #[test]
    fn single_part_composite_is_transparent() {
        let rho = random_density(3, 3, 9).unwrap();
        let part = EntropyGenerator::renyi_homogeneous(1.7).unwrap();
        let c = EntropyGenerator::composite(vec![CompositePart::global(part.clone(), 1.0)]).unwrap();
        assert_eq!(c.value(&rho).unwrap(), part.value(&rho).unwrap());
        assert_eq!(c.gradient(&rho).unwrap(), part.gradient(&rho).unwrap());
    }

    #[test]
    fn identical_parts_compose_trivially() {
        let rho = random_density(3, 3, 10).unwrap();
        let part = EntropyGenerator::renyi_pure(2.5).unwrap();
        let c = EntropyGenerator::composite(vec![
            CompositePart::global(part.clone(), 0.25),
            CompositePart::global(part.clone(), 0.75),
        ])
        .unwrap();
        assert_abs_diff_eq!(c.value(&rho).unwrap(), part.value(&rho).unwrap(), epsilon = 1e-14);
        assert!(rel_err(&c.gradient(&rho).unwrap(), &part.gradient(&rho).unwrap()) < 1e-13);
    }

    #[test]
    fn spec_grammar_builds_generators() {
        let json = r#"{"kind": "composite", "parts": [
            {"kind": "renyi_pure", "alpha": 1.5, "weight": 0.5, "subsystem": "first"},
            {"kind": "smooth_f2", "g": {"form": "power", "exponent": 1}, "weight": 0.5, "subsystem": null}]}"#;
        let spec: GeneratorSpec = serde_json::from_str(json).unwrap();
        let shape = BipartiteShape::new(2, 2).unwrap();
        let g = spec.build(Some(shape)).unwrap();
        let EntropyGenerator::Composite(parts) = &g else { panic!() };
        assert_eq!(parts[0].subsystem.unwrap().keep, Subsystem::First);
        assert_eq!(parts[1].generator, EntropyGenerator::SmoothF2(F2Profile::LINEAR));
        assert!(!g.is_moment_function());
        assert!(matches!(spec.build(None), Err(GeneratorError::Spec(_))));

        let spec: GeneratorSpec = serde_json::from_str(r#"{"kind": "renyi_hom"}"#).unwrap();
        assert!(matches!(spec.build(None), Err(GeneratorError::Spec(_))));
        let spec: GeneratorSpec = serde_json::from_str(r#"{"kind": "renyi_hom", "alpha": 1.0}"#).unwrap();
        assert!(matches!(spec.build(None), Err(GeneratorError::InvalidAlpha(_))));
    }
}
