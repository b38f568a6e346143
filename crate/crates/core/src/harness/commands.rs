//! Subcommand implementations. Each returns a report whose `exit_code`
//! the binary passes to the OS; hard failures come back as [`CliError`].

use super::config::{LoadedConfig, SimConfig};
use super::output::{fmt_num, trajectory_csv};
use super::verify::{run_suite, Suite, VerifyReport};
use super::{exit, CliError};
use crate::dynamics::{evolve, max_deviation_from_linear, observable_average, DynamicsError, Trajectory};
use crate::generators::EntropyGenerator;
use crate::infotheory::{daroczy, renyi, renyi_star, shannon, LogBase, ProbDist};
use crate::matrix::{DensityMatrix, HermitianMatrix};
use rayon::prelude::*;
use serde::Serialize;
use std::fmt::Write as _;
use std::path::Path;
use std::time::Instant;

fn write_file(path: &Path, text: &str) -> Result<(), CliError> {
    std::fs::write(path, text).map_err(|source| CliError::Io {
        path: path.display().to_string(),
        source,
    })
}

fn load(config_path: &Path) -> Result<LoadedConfig, CliError> {
    Ok(SimConfig::from_path(config_path)?.load()?)
}

#[derive(Debug, Clone, Serialize)]
pub struct InvariantRow {
    pub name: String,
    pub max_drift: f64,
    pub tolerance: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct RunReport {
    pub csv_path: String,
    pub steps_recorded: usize,
    pub invariants: Vec<InvariantRow>,
    /// Message of the drift alarm that stopped the run early.
    pub alarm: Option<String>,
    pub wall_clock_seconds: f64,
}

impl RunReport {
    pub fn exit_code(&self) -> i32 {
        if self.alarm.is_some() {
            exit::DRIFT_ALARM
        } else {
            exit::SUCCESS
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

fn invariant_rows(traj: &Trajectory, tolerance: f64, moment_built: bool) -> Vec<InvariantRow> {
    let row = |name: &str, max_drift: f64| InvariantRow {
        name: name.into(),
        max_drift,
        tolerance,
        pass: max_drift <= tolerance,
    };
    let drifts = traj.max_moment_drift();
    let mut rows = vec![row("trace", drifts.first().copied().unwrap_or(0.0))];
    if moment_built {
        for (k, d) in drifts.iter().enumerate().skip(1) {
            rows.push(row(&format!("f{}", k + 1), *d));
        }
        rows.push(row("eigenvalues", traj.max_eigenvalue_drift()));
    }
    rows.push(row("S_value", traj.max_generator_drift()));
    rows
}

/// Integrates the config, writes the trajectory CSV and summarizes drift.
///
/// A drift alarm still writes the trajectory up to the failing step.
pub fn cmd_run(config_path: &Path, out_path: &Path) -> Result<RunReport, CliError> {
    let start = Instant::now();
    let loaded = load(config_path)?;
    let spec = &loaded.spec;
    let (traj, alarm) = match evolve(spec) {
        Ok(t) => (t, None),
        Err(e @ DynamicsError::Drift { .. }) => {
            let msg = e.to_string();
            let DynamicsError::Drift { partial, .. } = e else { unreachable!() };
            (*partial, Some(msg))
        }
        Err(e) => return Err(CliError::Input(e.to_string())),
    };
    let csv = trajectory_csv(&traj, &loaded.observables).map_err(|e| CliError::Input(e.to_string()))?;
    write_file(out_path, &csv)?;
    Ok(RunReport {
        csv_path: out_path.display().to_string(),
        steps_recorded: traj.len(),
        invariants: invariant_rows(&traj, spec.tolerance, spec.generator.is_moment_function()),
        alarm,
        wall_clock_seconds: start.elapsed().as_secs_f64(),
    })
}

pub struct VerifyOutcome {
    pub report: VerifyReport,
}

impl VerifyOutcome {
    pub fn exit_code(&self) -> i32 {
        if self.report.all_pass() {
            exit::SUCCESS
        } else {
            exit::DRIFT_ALARM
        }
    }
}

pub fn cmd_verify(suite: &str, seed: u64, trials: Option<usize>) -> Result<VerifyOutcome, CliError> {
    let suite: Suite = suite.parse().map_err(CliError::Input)?;
    Ok(VerifyOutcome {
        report: run_suite(suite, seed, trials)?,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepStatus {
    Ok,
    Drift,
    Error,
}

impl SweepStatus {
    fn as_str(self) -> &'static str {
        match self {
            SweepStatus::Ok => "ok",
            SweepStatus::Drift => "drift",
            SweepStatus::Error => "error",
        }
    }
}

#[derive(Debug, Clone)]
pub struct SweepRow {
    pub alpha: f64,
    pub status: SweepStatus,
    pub message: String,
    pub max_eigenvalue_drift: f64,
    /// Distance from the rescaled linear flow; NaN when no oracle applies.
    pub max_oracle_deviation: f64,
    pub final_averages: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct SweepReport {
    pub labels: Vec<String>,
    pub rows: Vec<SweepRow>,
}

impl SweepReport {
    pub fn exit_code(&self) -> i32 {
        if self.rows.iter().any(|r| r.status == SweepStatus::Drift) {
            exit::DRIFT_ALARM
        } else if self.rows.iter().any(|r| r.status == SweepStatus::Error) {
            exit::INPUT_ERROR
        } else {
            exit::SUCCESS
        }
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("alpha,status,max_eigenvalue_drift,max_oracle_deviation");
        for l in &self.labels {
            write!(out, ",final_{l}").expect("writing to a String");
        }
        out.push_str(",message\n");
        for r in &self.rows {
            let mut cells = vec![
                fmt_num(r.alpha),
                r.status.as_str().to_string(),
                fmt_num(r.max_eigenvalue_drift),
                fmt_num(r.max_oracle_deviation),
            ];
            cells.extend(r.final_averages.iter().map(|&x| fmt_num(x)));
            cells.extend(std::iter::repeat_n(fmt_num(f64::NAN), self.labels.len() - r.final_averages.len()));
            cells.push(r.message.replace([',', '\n', '"'], " "));
            out.push_str(&cells.join(","));
            out.push('\n');
        }
        out
    }
}

fn is_pure(rho: &DensityMatrix) -> bool {
    let h = rho.as_hermitian();
    let tr = rho.trace();
    (h.trace_product(h) / (tr * tr) - 1.0).abs() < 1e-9
}

/// Speed of the linear flow that the generator reproduces from `rho0`, if any.
pub fn linear_oracle_speed(generator: &EntropyGenerator, rho0: &DensityMatrix) -> Option<f64> {
    let alpha = generator.alpha()?;
    if (alpha - 2.0).abs() < 1e-15 {
        return Some(1.0);
    }
    if !is_pure(rho0) {
        return None;
    }
    match generator {
        EntropyGenerator::RenyiHomogeneous { .. } => Some(1.0),
        EntropyGenerator::RenyiPure { alpha } => Some(alpha / (2.0 * (alpha - 1.0))),
        _ => None,
    }
}

fn sweep_one(
    loaded: &LoadedConfig,
    alpha: f64,
) -> SweepRow {
    let mut row = SweepRow {
        alpha,
        status: SweepStatus::Error,
        message: String::new(),
        max_eigenvalue_drift: f64::NAN,
        max_oracle_deviation: f64::NAN,
        final_averages: Vec::new(),
    };
    let generator = match loaded.spec.generator.with_alpha(alpha) {
        Some(Ok(g)) => g,
        Some(Err(e)) => {
            row.message = e.to_string();
            return row;
        }
        None => unreachable!("checked before the sweep"),
    };
    let mut spec = loaded.spec.clone();
    spec.generator = generator;
    let traj = match evolve(&spec) {
        Ok(t) => {
            row.status = SweepStatus::Ok;
            t
        }
        Err(e @ DynamicsError::Drift { .. }) => {
            row.status = SweepStatus::Drift;
            row.message = e.to_string();
            let DynamicsError::Drift { partial, .. } = e else { unreachable!() };
            *partial
        }
        Err(e) => {
            row.message = e.to_string();
            return row;
        }
    };
    row.max_eigenvalue_drift = traj.max_eigenvalue_drift();
    if let Some(speed) = linear_oracle_speed(&spec.generator, &spec.rho0) {
        row.max_oracle_deviation = max_deviation_from_linear(&traj, &spec.hamiltonian, speed);
    }
    row.final_averages = loaded
        .observables
        .iter()
        .map(|(_, m): &(String, HermitianMatrix)| {
            observable_average(&traj, m).map(|v| v.last().copied().unwrap_or(f64::NAN))
        })
        .collect::<Result<_, _>>()
        .unwrap_or_default();
    row
}

/// One run per α, in parallel, aggregated in input order.
pub fn cmd_sweep(config_path: &Path, alphas: &[f64], out_path: &Path) -> Result<SweepReport, CliError> {
    if alphas.is_empty() {
        return Err(CliError::Input("--alphas must list at least one value".into()));
    }
    if let Some(a) = alphas.iter().find(|a| !a.is_finite()) {
        return Err(CliError::Input(format!("alpha {a} is not finite")));
    }
    let loaded = load(config_path)?;
    if loaded.spec.generator.alpha().is_none() {
        return Err(CliError::Input(
            "sweep needs a generator with an alpha (renyi_hom or renyi_pure)".into(),
        ));
    }
    let rows: Vec<SweepRow> = alphas.par_iter().map(|&a| sweep_one(&loaded, a)).collect();
    let report = SweepReport {
        labels: loaded.observables.iter().map(|(l, _)| l.clone()).collect(),
        rows,
    };
    write_file(out_path, &report.to_csv())?;
    Ok(report)
}

#[derive(Debug, Clone, PartialEq)]
pub struct EntropyReport {
    pub shannon: f64,
    pub renyi: f64,
    pub renyi_star: f64,
    pub daroczy: f64,
}

impl EntropyReport {
    pub fn lines(&self) -> String {
        format!(
            "shannon = {}\nrenyi = {}\nrenyi_star = {}\ndaroczy = {}\n",
            self.shannon, self.renyi, self.renyi_star, self.daroczy
        )
    }
}

pub fn parse_list(text: &str, what: &str) -> Result<Vec<f64>, CliError> {
    text.split(',')
        .map(|s| {
            s.trim()
                .parse::<f64>()
                .map_err(|_| CliError::Input(format!("{what}: `{}` is not a number", s.trim())))
        })
        .collect()
}

/// Entropies of `dist`. At α = 1 the Rényi-family columns report their limits.
pub fn cmd_entropy(dist: &str, alpha: f64, base: f64) -> Result<EntropyReport, CliError> {
    let input = |e: crate::infotheory::InfoError| CliError::Input(e.to_string());
    let p = ProbDist::new(parse_list(dist, "--dist")?).map_err(input)?;
    let base = LogBase::new(base).map_err(input)?;
    let h = shannon(&p, base);
    if alpha == 1.0 {
        return Ok(EntropyReport {
            shannon: h,
            renyi: h,
            renyi_star: shannon(&p, LogBase::NATS).exp(),
            daroczy: shannon(&p, LogBase::BITS),
        });
    }
    Ok(EntropyReport {
        shannon: h,
        renyi: renyi(&p, alpha, base).map_err(input)?,
        renyi_star: renyi_star(&p, alpha).map_err(input)?,
        daroczy: daroczy(&p, alpha).map_err(input)?,
    })
}
