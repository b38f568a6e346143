//! Seeded property suites behind `nambuq verify`.

use super::fixtures::{mixed_system, uniform_in, uniform_int, variant, VARIANTS};
use super::CliError;
use crate::brackets::{
    bbmj_bracket, jacobi_defect, local_bracket_check, moment_casimir_check, s_bracket,
    triple_bracket, Functional,
};
use crate::dynamics::{evolve, EvolutionSpec};
use crate::generators::{EntropyGenerator, F2Profile};
use crate::infotheory::{
    gain_vanishing_scan, info_gain, info_loss, renyi, shannon, ConditionalUpdate, LogBase, ProbDist,
};
use crate::matrix::{
    commutator, fd_step_for, functional_gradient_fd, pauli, random_density_with, random_hermitian,
    trace_of_product, BipartiteShape, DensityMatrix,
};
use crate::rng::SeededRng;
use rayon::prelude::*;
use std::fmt;
use std::str::FromStr;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Suite {
    Brackets,
    Conservation,
    Nosignal,
    Jacobi,
    Entropy,
    All,
}

impl Suite {
    pub const EACH: [Suite; 5] = [
        Suite::Entropy,
        Suite::Brackets,
        Suite::Nosignal,
        Suite::Jacobi,
        Suite::Conservation,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Suite::Brackets => "brackets",
            Suite::Conservation => "conservation",
            Suite::Nosignal => "nosignal",
            Suite::Jacobi => "jacobi",
            Suite::Entropy => "entropy",
            Suite::All => "all",
        }
    }

    pub fn default_trials(self) -> usize {
        match self {
            Suite::Entropy => 1000,
            Suite::Brackets | Suite::Nosignal => 100,
            Suite::Jacobi | Suite::Conservation => 20,
            Suite::All => 0,
        }
    }
}

impl FromStr for Suite {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "brackets" => Ok(Suite::Brackets),
            "conservation" => Ok(Suite::Conservation),
            "nosignal" => Ok(Suite::Nosignal),
            "jacobi" => Ok(Suite::Jacobi),
            "entropy" => Ok(Suite::Entropy),
            "all" => Ok(Suite::All),
            other => Err(format!(
                "unknown suite `{other}` (expected brackets, conservation, nosignal, jacobi, entropy or all)"
            )),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Bound {
    AtMost,
    AtLeast,
    ReportOnly,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CheckRow {
    pub suite: &'static str,
    pub property: String,
    pub value: f64,
    pub tolerance: f64,
    pub bound: Bound,
}

impl CheckRow {
    pub fn passes(&self) -> bool {
        match self.bound {
            Bound::AtMost => self.value <= self.tolerance,
            Bound::AtLeast => self.value >= self.tolerance,
            Bound::ReportOnly => true,
        }
    }
}

impl fmt::Display for CheckRow {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let (op, status) = match self.bound {
            Bound::AtMost => ("<=", if self.passes() { "PASS" } else { "FAIL" }),
            Bound::AtLeast => (">=", if self.passes() { "PASS" } else { "FAIL" }),
            Bound::ReportOnly => ("  ", "REPORT"),
        };
        write!(
            f,
            "{:<13} {:<52} {:>12.4e} {op} {:<10.1e} {status}",
            self.suite, self.property, self.value, self.tolerance
        )
    }
}

#[derive(Debug, Clone, Default)]
pub struct VerifyReport {
    pub rows: Vec<CheckRow>,
}

impl VerifyReport {
    pub fn all_pass(&self) -> bool {
        self.rows.iter().all(CheckRow::passes)
    }

    pub fn table(&self) -> String {
        let mut s = format!(
            "{:<13} {:<52} {:>12} {:<13} status\n",
            "suite", "property", "value", "   bound"
        );
        for r in &self.rows {
            s.push_str(&r.to_string());
            s.push('\n');
        }
        s
    }
}

struct Rows {
    suite: &'static str,
    rows: Vec<CheckRow>,
}

impl Rows {
    fn new(suite: Suite) -> Self {
        Self {
            suite: suite.name(),
            rows: Vec::new(),
        }
    }

    fn push(&mut self, property: impl Into<String>, value: f64, tolerance: f64, bound: Bound) {
        // NaN never passes an AtMost bound
        let value = if value.is_nan() { f64::INFINITY } else { value };
        self.rows.push(CheckRow {
            suite: self.suite,
            property: property.into(),
            value,
            tolerance,
            bound,
        });
    }
}

type SuiteResult = Result<Vec<CheckRow>, CliError>;

fn fail<E: fmt::Display>(context: &str) -> impl FnOnce(E) -> CliError + '_ {
    move |e| CliError::Input(format!("{context}: {e}"))
}

/// Runs `suite` (or every suite for [`Suite::All`]) with the given seed.
pub fn run_suite(suite: Suite, seed: u64, trials: Option<usize>) -> Result<VerifyReport, CliError> {
    if trials == Some(0) {
        return Err(CliError::Input("--trials must be at least 1".into()));
    }
    let suites: Vec<Suite> = match suite {
        Suite::All => Suite::EACH.to_vec(),
        s => vec![s],
    };
    let mut report = VerifyReport::default();
    for s in suites {
        let n = trials.unwrap_or(s.default_trials());
        let rows = match s {
            Suite::Entropy => entropy_suite(seed, n)?,
            Suite::Brackets => brackets_suite(seed, n)?,
            Suite::Nosignal => nosignal_suite(seed, n)?,
            Suite::Jacobi => jacobi_suite(seed, n)?,
            Suite::Conservation => conservation_suite(seed, n)?,
            Suite::All => unreachable!(),
        };
        report.rows.extend(rows);
    }
    Ok(report)
}

fn random_positive_dist(rng: &mut SeededRng) -> ProbDist {
    let n = uniform_int(rng, 2, 10);
    ProbDist::random(n, rng).expect("n >= 2")
}

pub fn entropy_suite(seed: u64, trials: usize) -> SuiteResult {
    let mut out = Rows::new(Suite::Entropy);
    let alphas = [2.0, 0.5, 1.5, 3.0];
    let scan = gain_vanishing_scan(trials, &alphas, seed).map_err(fail("gain scan"))?;
    for row in &scan.rows {
        if row.alpha == 2.0 {
            out.push("gain(alpha=2) max |gain| (vanishes)", row.max_abs_gain, 1e-12, Bound::AtMost);
        } else {
            out.push(
                format!("gain(alpha={}) max |gain| (nonzero)", row.alpha),
                row.max_abs_gain,
                1e-3,
                Bound::AtLeast,
            );
        }
    }

    let mut uniform_err = 0.0f64;
    for n in 1..=64u64 {
        let p = ProbDist::uniform(n as usize).expect("n >= 1");
        for alpha in [0.0, 0.5, 2.0, 3.0, 7.5] {
            let r = renyi(&p, alpha, LogBase::BITS).map_err(fail("renyi"))?;
            uniform_err = uniform_err.max((r - (n as f64).log2()).abs());
        }
    }
    out.push("uniform renyi = log2 N, N <= 64", uniform_err, 1e-10, Bound::AtMost);

    let mut rng = SeededRng::new(seed ^ 0xe17);
    let (mut limit, mut mono, mut duality, mut base_change) = (0.0f64, 0.0f64, 0.0f64, 0.0f64);
    let ten = LogBase::new(10.0).expect("10 > 1");
    for _ in 0..trials {
        let p = random_positive_dist(&mut rng);
        let h = shannon(&p, LogBase::BITS);
        for eps in [1e-4, -1e-4] {
            let r = renyi(&p, 1.0 + eps, LogBase::BITS).map_err(fail("renyi"))?;
            limit = limit.max((r - h).abs());
        }
        let grid: Vec<f64> = (1..=40).map(|k| k as f64 * 0.1).filter(|a| *a != 1.0).collect();
        let values: Vec<f64> = grid
            .iter()
            .map(|&a| renyi(&p, a, LogBase::BITS))
            .collect::<Result<_, _>>()
            .map_err(fail("renyi"))?;
        for w in values.windows(2) {
            mono = mono.max(w[1] - w[0]);
        }
        let a = uniform_in(&mut rng, 0.1, 3.5);
        if a != 1.0 {
            let r2 = renyi(&p, a, LogBase::BITS).map_err(fail("renyi"))?;
            let r10 = renyi(&p, a, ten).map_err(fail("renyi"))?;
            base_change = base_change.max((r2 * 2f64.log10() - r10).abs());
        }
        let q = ProbDist::random(p.len(), &mut rng).expect("nonempty");
        let u = ConditionalUpdate::new(p, q).map_err(fail("update"))?;
        let g = info_gain(&u, 1.0, LogBase::NATS).map_err(fail("gain"))?.value;
        let l = info_loss(&u, 1.0, LogBase::NATS).map_err(fail("loss"))?;
        duality = duality.max((g + l).abs());
    }
    out.push("|renyi(1 +- 1e-4) - shannon|", limit, 1e-3, Bound::AtMost);
    out.push("renyi increase along alpha grid (monotone)", mono, 1e-12, Bound::AtMost);
    out.push("base change renyi_2 * log10(2) = renyi_10", base_change, 1e-12, Bound::AtMost);
    out.push("gain(alpha=1) + loss(alpha=1)", duality, 1e-12, Bound::AtMost);
    Ok(out.rows)
}

fn rel_frobenius(a: &crate::matrix::HermitianMatrix, b: &crate::matrix::HermitianMatrix) -> f64 {
    a.sub(b).frobenius_norm() / b.frobenius_norm().max(1e-12)
}

pub fn brackets_suite(seed: u64, trials: usize) -> SuiteResult {
    let mut out = Rows::new(Suite::Brackets);
    let mut rng = SeededRng::new(seed ^ 0xb7a);
    let (mut anti, mut bbmj, mut casimir, mut thm3, mut grad) = (0.0f64, 0.0f64, 0.0f64, 0.0f64, 0.0f64);
    let e = |e| CliError::Input(format!("bracket evaluation: {e}"));
    for trial in 0..trials {
        let dim = uniform_int(&mut rng, 2, 4);
        let rho = random_density_with(dim, dim, &mut rng).map_err(fail("state"))?;
        let a = random_hermitian(dim, 1.0, &mut rng);
        let b = random_hermitian(dim, 1.0, &mut rng);
        let s = variant(trial, &mut rng, 0.5);
        let fa = Functional::linear(a.clone()).map_err(e)?;
        let fb = Functional::linear(b.clone()).map_err(e)?;
        let f3 = Functional::moment(3, dim).map_err(e)?;
        let fs = Functional::generator(s.clone(), dim).map_err(e)?;

        let x = triple_bracket(&fa, &f3, &fs, &rho).map_err(e)?;
        for y in [
            triple_bracket(&f3, &fa, &fs, &rho),
            triple_bracket(&fs, &f3, &fa, &rho),
            triple_bracket(&fa, &fs, &f3, &rho),
        ] {
            anti = anti.max((x + y.map_err(e)?).abs());
        }

        let direct = trace_of_product(rho.matrix(), &commutator(a.matrix(), b.matrix())).im;
        bbmj = bbmj.max((bbmj_bracket(&fa, &fb, &rho).map_err(e)? - direct).abs());

        let tr = Functional::trace(dim).map_err(e)?;
        casimir = casimir.max(s_bracket(&tr, &f3, &s, &rho).map_err(e)?.abs());

        for m in 1..=4 {
            thm3 = thm3.max(moment_casimir_check(m, &fa, &s, &rho).map_err(e)?);
            thm3 = thm3.max(moment_casimir_check(m, &f3, &s, &rho).map_err(e)?);
        }

        let closed = s.gradient(&rho).map_err(fail("gradient"))?;
        let fd = functional_gradient_fd(|r: &DensityMatrix| s.value(r), &rho, fd_step_for(&rho))
            .map_err(fail("finite-difference gradient"))?;
        grad = grad.max(rel_frobenius(&closed, &fd));
    }
    out.push("total antisymmetry of [F,G,H]", anti, 1e-10, Bound::AtMost);
    out.push("bbmj(linear) = -i Tr(rho [A,B])", bbmj, 1e-12, Bound::AtMost);
    out.push("{Tr rho, f3}_S = 0", casimir, 1e-12, Bound::AtMost);
    out.push("[f_m, G, S] = 0, m <= 4", thm3, 1e-8, Bound::AtMost);
    out.push("closed-form vs finite-difference gradient (rel)", grad, 1e-6, Bound::AtMost);
    Ok(out.rows)
}

pub fn nosignal_suite(seed: u64, trials: usize) -> SuiteResult {
    let mut out = Rows::new(Suite::Nosignal);
    let mut rng = SeededRng::new(seed ^ 0x5160);
    let e = |e| CliError::Input(format!("bracket evaluation: {e}"));
    let mut worst = [0.0f64; VARIANTS.len()];
    for trial in 0..trials {
        let shape = if trial % 2 == 0 {
            BipartiteShape::new(2, 2)
        } else {
            BipartiteShape::new(2, 3)
        }
        .expect("positive");
        let rho = random_density_with(shape.total(), shape.total(), &mut rng).map_err(fail("state"))?;
        let which = trial % VARIANTS.len();
        let s = variant(which, &mut rng, 0.5);
        let (f, g) = if (trial / 2) % 2 == 0 {
            (
                Functional::linear(random_hermitian(shape.d1, 1.0, &mut rng)).map_err(e)?,
                Functional::linear(random_hermitian(shape.d2, 1.0, &mut rng)).map_err(e)?,
            )
        } else {
            (
                Functional::moment(2, shape.d1).map_err(e)?,
                Functional::moment(2, shape.d2).map_err(e)?,
            )
        };
        let v = local_bracket_check(shape, &f, &g, &s, &rho).map_err(e)?;
        worst[which] = worst[which].max(v);
    }
    for (name, v) in VARIANTS.iter().zip(worst) {
        out.push(format!("|{{F[rho_I], G[rho_II]}}_S|, S = {name}"), v, 1e-8, Bound::AtMost);
    }
    Ok(out.rows)
}

pub fn jacobi_suite(seed: u64, trials: usize) -> SuiteResult {
    let mut out = Rows::new(Suite::Jacobi);
    let mut rng = SeededRng::new(seed ^ 0x7ac0b1);
    let e = |e| CliError::Input(format!("jacobi evaluation: {e}"));
    let gens = [
        ("S2", EntropyGenerator::Quadratic, Bound::AtMost),
        ("smooth_f2 g = x^2/2", EntropyGenerator::SmoothF2(F2Profile::HALF_SQUARE), Bound::AtMost),
        ("renyi_hom alpha = 1.5", EntropyGenerator::renyi_homogeneous(1.5).expect("alpha"), Bound::ReportOnly),
        ("renyi_pure alpha = 2.5", EntropyGenerator::renyi_pure(2.5).expect("alpha"), Bound::ReportOnly),
    ];
    let mut worst = [0.0f64; 4];
    for _ in 0..trials {
        let dim = uniform_int(&mut rng, 2, 3);
        let rho = random_density_with(dim, dim, &mut rng).map_err(fail("state"))?;
        let f = Functional::linear(random_hermitian(dim, 1.0, &mut rng)).map_err(e)?;
        let g = Functional::linear(random_hermitian(dim, 1.0, &mut rng)).map_err(e)?;
        let h = Functional::linear(random_hermitian(dim, 1.0, &mut rng)).map_err(e)?;
        for (w, (_, s, _)) in worst.iter_mut().zip(&gens) {
            *w = w.max(jacobi_defect(&f, &g, &h, s, &rho).map_err(e)?.abs());
        }
    }
    for ((name, _, bound), w) in gens.iter().zip(worst) {
        out.push(format!("Jacobi defect, S = {name}"), w, 1e-5, *bound);
    }
    Ok(out.rows)
}

#[derive(Debug, Clone, Copy, Default)]
struct ConservationStats {
    moments: f64,
    eigenvalues: f64,
    min_eigenvalue: f64,
    generator: f64,
}

pub fn conservation_suite(seed: u64, trials: usize) -> SuiteResult {
    let mut out = Rows::new(Suite::Conservation);
    let mut rng = SeededRng::new(seed ^ 0xc025);
    let specs: Vec<EvolutionSpec> = (0..trials)
        .map(|trial| {
            let sys = mixed_system(&mut rng, (2, 4));
            let s = variant(trial, &mut rng, 1.2);
            EvolutionSpec::new(sys.hamiltonian, s, sys.rho0, 5.0, 1e-3)
                .map(|sp| sp.record_every(10).tolerance(1e-3))
        })
        .collect::<Result<_, _>>()
        .map_err(fail("spec"))?;
    let stats: Vec<ConservationStats> = specs
        .par_iter()
        .map(|sp| {
            let traj = evolve(sp).map_err(fail("evolve"))?;
            Ok(ConservationStats {
                moments: traj.max_moment_drift().into_iter().fold(0.0, f64::max),
                eigenvalues: traj.max_eigenvalue_drift(),
                min_eigenvalue: traj.min_eigenvalue(),
                generator: traj.max_generator_drift(),
            })
        })
        .collect::<Result<_, CliError>>()?;
    let max = |f: fn(&ConservationStats) -> f64| stats.iter().map(f).fold(0.0, f64::max);
    out.push("relative drift of f1..f5", max(|s| s.moments), 1e-7, Bound::AtMost);
    out.push("sorted eigenvalue drift", max(|s| s.eigenvalues), 1e-6, Bound::AtMost);
    out.push(
        "negativity (-min eigenvalue)",
        stats.iter().map(|s| -s.min_eigenvalue).fold(f64::NEG_INFINITY, f64::max),
        1e-8,
        Bound::AtMost,
    );
    out.push("relative drift of S", max(|s| s.generator), 1e-7, Bound::AtMost);
    Ok(out.rows)
}

/// Pauli bracket used as a quick smoke check by the CLI tests.
pub fn pauli_bracket() -> f64 {
    let rho = DensityMatrix::from_diagonal(&[1.0, 0.0]).expect("diagonal state");
    let fx = Functional::linear(pauli::x()).expect("linear");
    let fy = Functional::linear(pauli::y()).expect("linear");
    bbmj_bracket(&fx, &fy, &rho).expect("finite")
}
