//! Trajectory CSV: `t, f1..f5, eig_1..eig_d, S_value, energy, <observables>`.
//! Every number is written with 12 significant digits in scientific form.

use crate::dynamics::{observable_average, DynamicsError, Trajectory, TRACKED_MOMENTS};
use crate::matrix::HermitianMatrix;
use std::fmt::Write;

pub fn fmt_num(x: f64) -> String {
    format!("{x:.11e}")
}

pub fn trajectory_header(dim: usize, labels: &[&str]) -> String {
    let mut cols = vec!["t".to_string()];
    cols.extend((1..=TRACKED_MOMENTS).map(|k| format!("f{k}")));
    cols.extend((1..=dim).map(|k| format!("eig_{k}")));
    cols.push("S_value".into());
    cols.push("energy".into());
    cols.extend(labels.iter().map(|l| l.to_string()));
    cols.join(",")
}

pub fn trajectory_csv(
    traj: &Trajectory,
    observables: &[(String, HermitianMatrix)],
) -> Result<String, DynamicsError> {
    let dim = traj.states.first().map_or(0, |s| s.dim());
    let labels: Vec<&str> = observables.iter().map(|(l, _)| l.as_str()).collect();
    let averages = observables
        .iter()
        .map(|(_, m)| observable_average(traj, m))
        .collect::<Result<Vec<_>, _>>()?;
    let mut out = trajectory_header(dim, &labels);
    out.push('\n');
    for (i, (t, d)) in traj.times.iter().zip(&traj.diagnostics).enumerate() {
        let mut row = vec![fmt_num(*t)];
        row.extend(d.moments.iter().map(|&x| fmt_num(x)));
        row.extend(d.eigenvalues.iter().map(|&x| fmt_num(x)));
        row.push(fmt_num(d.generator_value));
        row.push(fmt_num(d.energy));
        row.extend(averages.iter().map(|a| fmt_num(a[i])));
        writeln!(out, "{}", row.join(",")).expect("writing to a String");
    }
    Ok(out)
}
