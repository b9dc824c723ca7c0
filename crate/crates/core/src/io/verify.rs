//! Re-checks invariants on results stored by the other commands.

use std::path::Path;

use ndarray::Array2;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use super::commands::build_problem;
use super::config::SolverConfig;
use super::table::{read_json, write_json, Table};
use crate::error::{Error, Result};
use crate::gas::FlowState;
use crate::state::{ExitPerturbation, PerturbationState};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub value: f64,
    pub bound: f64,
    pub detail: String,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct VerifyReport {
    pub kind: String,
    pub passed: bool,
    pub checks: Vec<Check>,
}

impl VerifyReport {
    fn bound(&mut self, name: &str, value: f64, bound: f64, detail: impl Into<String>) {
        self.checks.push(Check { name: name.into(), passed: value <= bound, value, bound, detail: detail.into() });
    }

    fn flag(&mut self, name: &str, ok: bool, detail: impl Into<String>) {
        self.checks.push(Check {
            name: name.into(),
            passed: ok,
            value: if ok { 0.0 } else { 1.0 },
            bound: 0.0,
            detail: detail.into(),
        });
    }

    pub fn failures(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.passed)
    }
}

fn rel_spread(v: &[f64]) -> f64 {
    let (lo, hi) = v.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), x| (a.min(*x), b.max(*x)));
    (hi - lo) / hi.abs().max(lo.abs()).max(f64::MIN_POSITIVE)
}

/// First row of `t` whose `column` is not strictly positive, named by the given coordinate columns.
fn positivity(report: &mut VerifyReport, t: &Table, column: &str, coords: &[&str]) -> Result<()> {
    let v = t.column(column)?;
    let cs: Vec<Vec<f64>> = coords.iter().map(|c| t.column(c)).collect::<Result<_>>()?;
    let bad = v.iter().position(|x| !(*x > 0.0));
    let detail = match bad {
        Some(k) => {
            let at: Vec<String> = coords.iter().zip(&cs).map(|(n, c)| format!("{n} = {}", c[k])).collect();
            format!("{}.{column} = {} at {} (row {k})", t.name, v[k], at.join(", "))
        }
        None => format!("{} rows", v.len()),
    };
    report.flag(&format!("{}.{column} > 0", t.name), bad.is_none(), detail);
    Ok(())
}

/// Verifies the result directory written by `background`, `window`, `perturb`, `sweep` or `coeffs`.
pub fn cmd_verify(dir: &Path) -> Result<VerifyReport> {
    let summary: Value = read_json(&dir.join("summary.json"))?;
    let kind = summary.get("kind").and_then(Value::as_str).unwrap_or("").to_string();
    let mut report = VerifyReport { kind: kind.clone(), ..Default::default() };
    match kind.as_str() {
        "background" => verify_background(dir, &mut report)?,
        "perturb" => verify_perturb(dir, &summary, &mut report)?,
        "window" => verify_decreasing(&Table::read(dir, "window")?, "pe", None, &mut report)?,
        "sweep" => verify_decreasing(&Table::read(dir, "sweep_ls")?, "pe", Some("status"), &mut report)?,
        "coeffs" => verify_coeffs(dir, &mut report)?,
        other => {
            return Err(Error::Parse {
                path: dir.join("summary.json"),
                offset: 0,
                message: format!("unknown result kind {other:?}"),
            })
        }
    }
    report.passed = report.checks.iter().all(|c| c.passed);
    write_json(&dir.join("verify.json"), &report)?;
    Ok(report)
}

fn verify_background(dir: &Path, report: &mut VerifyReport) -> Result<()> {
    let cfg = SolverConfig::load(&dir.join("config.toml"))?;
    let setup = cfg.setup()?;
    let g = setup.gas;
    let mut ends = Vec::new();
    for name in ["supersonic", "subsonic"] {
        let t = Table::read(dir, name)?;
        positivity(report, &t, "rho", &["x1"])?;
        positivity(report, &t, "u", &["x1"])?;
        if !report.checks.iter().all(|c| c.passed) {
            return Ok(());
        }
        let (x, rho, u) = (t.column("x1")?, t.column("rho")?, t.column("u")?);
        let flux: Vec<f64> = rho.iter().zip(&u).map(|(r, u)| r * u).collect();
        report.bound(&format!("{name} mass flux spread"), rel_spread(&flux), 1e-10, "relative max - min");
        let b: Vec<f64> = (0..x.len())
            .map(|k| g.bernoulli(&FlowState { rho: rho[k], u1: u[k], u2: 0.0 }, setup.force.potential(x[k])))
            .collect();
        report.bound(&format!("{name} Bernoulli spread"), rel_spread(&b), 1e-10, "relative max - min");
        let mut worst = None;
        for k in 1..x.len() {
            let m = |k: usize| u[k] * u[k] / g.sound_speed_sq_unchecked(rho[k]);
            let xm = 0.5 * (x[k] + x[k - 1]);
            let expected = setup.force.value(xm) * (m(k) - 1.0).signum();
            let dm = m(k) - m(k - 1);
            if expected != 0.0 && dm != 0.0 && dm.signum() != expected.signum() {
                worst.get_or_insert(x[k]);
            }
        }
        report.flag(
            &format!("{name} Mach monotone"),
            worst.is_none(),
            worst.map_or("sign of dM matches f (M^2 - 1)".into(), |x| format!("wrong sign at x1 = {x}")),
        );
        ends.push((x, rho, u));
    }
    let (xs, rs, us) = (&ends[0].0, &ends[0].1, &ends[0].2);
    let (xp, rp, up) = (&ends[1].0, &ends[1].1, &ends[1].2);
    let n = xs.len() - 1;
    report.bound("shock location agreement", (xs[n] - xp[0]).abs(), 0.0, format!("Ls = {}", xs[n]));
    let (pm, pp) = (g.pressure_unchecked(rs[n]), g.pressure_unchecked(rp[0]));
    let mass = (rp[0] * up[0] - rs[n] * us[n]).abs();
    let mom = (rp[0] * up[0] * up[0] + pp - rs[n] * us[n] * us[n] - pm).abs();
    report.bound("RH residual", mass.max(mom), 1e-10, format!("[rho u] = {mass:e}, [rho u^2 + P] = {mom:e}"));
    report.flag("entropy P+ > P-", pp > pm, format!("P+ - P- = {:e}", pp - pm));
    Ok(())
}

fn verify_decreasing(t: &Table, column: &str, status: Option<&str>, report: &mut VerifyReport) -> Result<()> {
    let v = t.column(column)?;
    let keep: Vec<f64> = match status {
        Some(s) => v.iter().zip(t.column(s)?).filter(|(_, s)| *s == 0.0).map(|(v, _)| *v).collect(),
        None => v.into_iter().filter(|x| x.is_finite()).collect(),
    };
    let bad = keep.windows(2).position(|w| !(w[1] < w[0]));
    report.flag(
        &format!("{}.{column} strictly decreasing", t.name),
        bad.is_none(),
        bad.map_or(format!("{} samples", keep.len()), |k| format!("increase between samples {k} and {}", k + 1)),
    );
    Ok(())
}

fn verify_coeffs(dir: &Path, report: &mut VerifyReport) -> Result<()> {
    let t = Table::read(dir, "coeffs")?;
    positivity(report, &t, "a0", &["y1"])?;
    positivity(report, &t, "a1", &["y1"])?;
    let a2 = t.column("a2")?;
    let min = a2.iter().copied().fold(f64::INFINITY, f64::min);
    report.flag("a2 > 1", min > 1.0, format!("min a2 = {min}"));
    Ok(())
}

fn grid_field(t: &Table, column: &str, n1: usize, n2: usize) -> Result<Array2<f64>> {
    let v = t.column(column)?;
    if v.len() != n1 * n2 {
        return Err(Error::Domain(format!("{}.{column} has {} values, expected {}", t.name, v.len(), n1 * n2)));
    }
    Ok(Array2::from_shape_vec((n1, n2), v).expect("length checked"))
}

fn verify_perturb(dir: &Path, summary: &Value, report: &mut VerifyReport) -> Result<()> {
    let cfg = SolverConfig::load(&dir.join("config.toml"))?;
    let physical = Table::read(dir, "physical")?;
    positivity(report, &physical, "rho", &["i", "j", "x1", "x2"])?;
    positivity(report, &physical, "pressure", &["i", "j", "x1", "x2"])?;
    if !report.checks.iter().all(|c| c.passed) {
        return Ok(());
    }
    let fields = Table::read(dir, "fields")?;
    let shock = Table::read(dir, "shock")?;
    let get = |k: &str| summary.get(k).and_then(Value::as_u64).map(|v| v as usize);
    let (n1, n2) = match (get("n1"), get("n2")) {
        (Some(a), Some(b)) => (a, b),
        _ => {
            return Err(Error::Parse { path: dir.join("summary.json"), offset: 0, message: "missing n1/n2".into() })
        }
    };
    let mut cfg = cfg;
    cfg.grid.n1 = n1;
    cfg.grid.n2 = n2;
    let problem = build_problem(&cfg)?;
    let state = PerturbationState {
        v1: grid_field(&fields, "v1", n1, n2)?,
        v2: grid_field(&fields, "v2", n1, n2)?,
        v3: grid_field(&fields, "v3", n1, n2)?,
        v4: shock.column("v4")?,
    };
    if !state.matches(&problem.grid) {
        return Err(Error::Domain("stored fields do not match the configured grid".into()));
    }
    let epsilon = summary.get("epsilon").and_then(Value::as_f64).unwrap_or(cfg.exit.epsilon);
    let exit = ExitPerturbation { epsilon, pex_hat: shock.column("pex_hat")? };
    let r = problem.nonlinear_residual(&state, &exit)?;
    let g = &problem.grid;
    let h2 = g.h1.max(g.h2).powi(2);
    let tol = cfg.iteration.tol_fp;
    let (field_bound, label) =
        if epsilon == 0.0 { (1e-10, "epsilon = 0".to_string()) } else { (h2 + tol, format!("h^2 + tol_fp, h^2 = {h2:e}")) };
    report.bound("interior residual", r.interior, field_bound, label.clone());
    report.bound("exit pressure residual", r.exit_pressure, field_bound, label.clone());
    report.bound("shock slope residual", r.shock_slope, field_bound, label);
    report.bound("exact RH residual", r.rh_exact, 1e-10, "oblique jump at every foot node");
    report.bound("wall residual", r.wall, 1e-10, "v2 at y2 = +-1");
    report.flag("entropy P+ > P-", r.entropy_ok, format!("min P+ - P- = {:e}", r.min_pressure_jump));
    let compat = state.compatibility(g);
    report.flag("compatibility suite", compat.passed, compat.failures.join("; "));
    let recomputed = problem.to_physical(&state)?;
    let stored = grid_field(&physical, "rho", n1, n2)?;
    let drift = (&recomputed.rho - &stored).iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    report.bound("stored density consistency", drift, 1e-12, "physical.rho against fields");
    Ok(())
}
