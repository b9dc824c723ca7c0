//! The operations behind each CLI subcommand.

use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::config::SolverConfig;
use super::table::{write_json, Table};
use crate::background::{BackgroundSolution, NozzleSetup, SolutionBranch};
use crate::coefficients::LinearCoefficients;
use crate::error::{Error, Result};
use crate::field::GridQ;
use crate::iteration::{IterationReport, PhysicalFields, ShockProblem};
use crate::state::{ExitPerturbation, PerturbationState};

pub const THREADS_ENV: &str = "SHOCKNOZZLE_THREADS";

/// Files written by one command plus its human-readable summary lines.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ResultBundle {
    pub dir: PathBuf,
    pub files: Vec<PathBuf>,
    pub summary: Vec<String>,
}

impl ResultBundle {
    fn new(dir: &Path) -> Result<Self> {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        Ok(ResultBundle { dir: dir.to_path_buf(), ..Default::default() })
    }

    fn table(&mut self, t: &Table) -> Result<()> {
        self.files.push(t.write(&self.dir)?);
        Ok(())
    }

    fn json(&mut self, name: &str, value: &impl Serialize) -> Result<()> {
        let path = self.dir.join(name);
        write_json(&path, value)?;
        self.files.push(path);
        Ok(())
    }

    fn config(&mut self, cfg: &SolverConfig) -> Result<()> {
        let path = self.dir.join("config.toml");
        cfg.save(&path)?;
        self.files.push(path);
        Ok(())
    }

    fn line(&mut self, s: String) {
        self.summary.push(s);
    }
}

/// Solves the 1D problem for the configured `ls` or `pe`.
pub fn solve_background(cfg: &SolverConfig) -> Result<BackgroundSolution> {
    let setup = cfg.setup()?;
    match (cfg.exit.ls, cfg.exit.pe) {
        (Some(ls), _) => BackgroundSolution::with_shock_at(&setup, ls),
        (None, Some(pe)) => setup.solve_shock_position(pe),
        (None, None) => Err(Error::Config("exit: give either pe or ls".into())),
    }
}

pub(crate) fn branch_table(name: &str, setup: &NozzleSetup, branch: &SolutionBranch) -> Table {
    let g = &setup.gas;
    let mut t = Table::new(name, &["x1", "rho", "u", "pressure", "c2", "mach", "mass_flux", "bernoulli"])
        .with_header(format!("{:?} branch, {} nodes on [{}, {}]", branch.regime, branch.len(), branch.start(), branch.end()))
        .with_meta("regime", branch.regime)
        .with_meta("gamma", g.gamma)
        .with_meta("entropy_const", g.entropy_const);
    for k in 0..branch.len() {
        let (x, rho, u) = (branch.grid[k], branch.rho[k], branch.u[k]);
        let c2 = g.sound_speed_sq_unchecked(rho);
        let state = crate::gas::FlowState { rho, u1: u, u2: 0.0 };
        let b = g.bernoulli(&state, setup.force.potential(x));
        t.push(vec![x, rho, u, g.pressure_unchecked(rho), c2, u / c2.sqrt(), rho * u, b]);
    }
    t
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BackgroundSummary {
    pub kind: String,
    pub ls: f64,
    pub exit_pressure: f64,
    pub mass_flux: f64,
    pub window: Option<(f64, f64)>,
    pub window_note: Option<String>,
    pub drho_exit_dls: f64,
    pub rh_mass: f64,
    pub rh_momentum: f64,
    pub pressure_jump: f64,
    pub delta0: f64,
}

pub fn cmd_background(cfg: &SolverConfig) -> Result<ResultBundle> {
    let bg = solve_background(cfg)?;
    let setup = &bg.setup;
    let mut out = ResultBundle::new(&cfg.output.dir)?;
    let (window, window_note) = match setup.pressure_window() {
        Ok(w) => (Some((w.p1, w.p0)), None),
        Err(e @ (Error::DegenerateWindow { .. } | Error::MonotonicityViolated { .. })) => (None, Some(e.to_string())),
        Err(e) => return Err(e),
    };
    let (rh_mass, rh_momentum) = bg.rh_residuals();
    let g = &setup.gas;
    let summary = BackgroundSummary {
        kind: "background".into(),
        ls: bg.ls,
        exit_pressure: bg.exit_pressure,
        mass_flux: bg.mass_flux,
        window,
        window_note: window_note.clone(),
        drho_exit_dls: setup.monotonicity_derivative(bg.ls)?,
        rh_mass,
        rh_momentum,
        pressure_jump: g.pressure_unchecked(bg.post_shock().rho) - g.pressure_unchecked(bg.pre_shock().rho),
        delta0: bg.delta0,
    };
    out.table(&branch_table("supersonic", setup, &bg.supersonic))?;
    out.table(&branch_table("subsonic", setup, &bg.subsonic))?;
    out.table(&branch_table("extension", setup, &bg.extension))?;
    out.json("summary.json", &summary)?;
    out.config(cfg)?;
    out.line(format!("shock position Ls = {:.12}", bg.ls));
    out.line(format!("exit pressure Pe = {:.12e}", bg.exit_pressure));
    match (window, window_note) {
        (Some((p1, p0)), _) => out.line(format!("pressure window (P1, P0) = ({p1:.12e}, {p0:.12e})")),
        (None, Some(note)) => out.line(note),
        _ => {}
    }
    out.line(format!("RH residual = {:.3e}", rh_mass.abs().max(rh_momentum.abs())));
    out.line(format!("pressure jump P+ - P- = {:.6e}", summary.pressure_jump));
    Ok(out)
}

pub fn cmd_window(cfg: &SolverConfig, samples: usize) -> Result<ResultBundle> {
    let setup = cfg.setup()?;
    let mut out = ResultBundle::new(&cfg.output.dir)?;
    let window = setup.pressure_window();
    let (l0, l1) = (setup.l0, setup.l1);
    let ls: Vec<f64> = (1..=samples).map(|k| l0 + (l1 - l0) * k as f64 / (samples + 1) as f64).collect();
    let rows: Vec<Vec<f64>> = ls
        .par_iter()
        .map(|&x| {
            let row = || -> Result<Vec<f64>> {
                let (_, sub) = setup.shock_profile(x)?;
                let rho = sub.last_state().rho;
                let drho = setup.monotonicity_derivative(x)?;
                Ok(vec![x, setup.gas.pressure(rho)?, setup.gas.sound_speed_sq(rho)? * drho])
            };
            row().unwrap_or_else(|e| {
                log::warn!("window sample Ls = {x}: {e}");
                vec![x, f64::NAN, f64::NAN]
            })
        })
        .collect();
    let mut t = Table::new("window", &["ls", "pe", "dpe_dls"]).with_header(format!("{samples} shock positions in ({l0}, {l1})"));
    for r in rows {
        t.push(r);
    }
    let pe = t.column("pe")?;
    let decreasing = pe.windows(2).all(|w| w[1] < w[0]);
    match &window {
        Ok(w) => {
            t = t.with_meta("p1", w.p1).with_meta("p0", w.p0);
            out.line(format!("pressure window (P1, P0) = ({:.12e}, {:.12e})", w.p1, w.p0));
        }
        Err(e @ (Error::DegenerateWindow { .. } | Error::MonotonicityViolated { .. })) => {
            t = t.with_meta("note", e.to_string());
            out.line(e.to_string());
        }
        Err(e) => return Err(Error::Domain(e.to_string())),
    }
    t = t.with_meta("kind", "window").with_meta("strictly_decreasing", decreasing);
    out.line(format!("Pe strictly decreasing over {samples} samples: {decreasing}"));
    out.table(&t)?;
    out.json("summary.json", &serde_json::json!({ "kind": "window", "strictly_decreasing": decreasing, "samples": samples }))?;
    out.config(cfg)?;
    Ok(out)
}

/// Outcome of one fixed-point run.
#[derive(Debug)]
pub struct PerturbOutcome {
    pub problem: ShockProblem,
    pub exit: ExitPerturbation,
    pub state: PerturbationState,
    pub report: IterationReport,
}

impl PerturbOutcome {
    pub fn norm_v(&self) -> f64 {
        self.state.norm(self.problem.grid.h2)
    }

    pub fn shock_deviation(&self) -> f64 {
        self.state.v4.iter().fold(0.0, |m, v| m.max(v.abs()))
    }
}

pub fn build_problem(cfg: &SolverConfig) -> Result<ShockProblem> {
    let bg = solve_background(cfg)?;
    ShockProblem::new(bg, cfg.grid.n1, cfg.grid.n2, cfg.iteration)
}

pub fn run_perturbation(cfg: &SolverConfig) -> Result<PerturbOutcome> {
    let problem = build_problem(cfg)?;
    let exit = cfg.exit_perturbation(&problem.grid)?;
    let (state, report) = problem.iterate(&exit)?;
    Ok(PerturbOutcome { problem, exit, state, report })
}

pub(crate) fn state_tables(grid: &GridQ, state: &PerturbationState, exit: &ExitPerturbation) -> (Table, Table) {
    let mut fields = Table::new("fields", &["i", "j", "y1", "y2", "v1", "v2", "v3"])
        .with_header(format!("computational grid n1 = {}, n2 = {}, y1 in [{}, {}], y2 in [-1, 1]", grid.n1, grid.n2, grid.ls, grid.l1))
        .with_meta("n1", grid.n1)
        .with_meta("n2", grid.n2);
    for i in 0..grid.n1 {
        for j in 0..grid.n2 {
            fields.push(vec![i as f64, j as f64, grid.y1[i], grid.y2[j], state.v1[[i, j]], state.v2[[i, j]], state.v3[[i, j]]]);
        }
    }
    let mut shock = Table::new("shock", &["j", "y2", "v4", "xi", "pex_hat"])
        .with_header(format!("shock curve xi = Ls + v4, Ls = {}", grid.ls))
        .with_meta("ls", grid.ls)
        .with_meta("epsilon", exit.epsilon);
    for j in 0..grid.n2 {
        shock.push(vec![j as f64, grid.y2[j], state.v4[j], grid.ls + state.v4[j], exit.pex_hat[j]]);
    }
    (fields, shock)
}

pub(crate) fn physical_table(grid: &GridQ, f: &PhysicalFields) -> Table {
    let mut t = Table::new("physical", &["i", "j", "x1", "x2", "u1", "u2", "rho", "pressure", "bernoulli"])
        .with_header(format!("physical fields behind the shock on the mapped {} x {} grid", grid.n1, grid.n2));
    for i in 0..grid.n1 {
        for j in 0..grid.n2 {
            t.push(vec![
                i as f64,
                j as f64,
                f.x1[[i, j]],
                f.x2[j],
                f.u1[[i, j]],
                f.u2[[i, j]],
                f.rho[[i, j]],
                f.pressure[[i, j]],
                f.bernoulli[[i, j]],
            ]);
        }
    }
    t
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PerturbSummary {
    pub kind: String,
    pub epsilon: f64,
    pub n1: usize,
    pub n2: usize,
    pub ls: f64,
    pub iterations: usize,
    pub converged: bool,
    pub norm_v: f64,
    pub norm_v_over_eps: Option<f64>,
    pub shock_deviation: f64,
    pub shock_deviation_over_eps: Option<f64>,
}

pub fn cmd_perturb(cfg: &SolverConfig) -> Result<ResultBundle> {
    let run = run_perturbation(cfg)?;
    let p = &run.problem;
    let mut out = ResultBundle::new(&cfg.output.dir)?;
    let physical = p.to_physical(&run.state)?;
    let (fields, shock) = state_tables(&p.grid, &run.state, &run.exit);
    out.table(&fields)?;
    out.table(&shock)?;
    out.table(&physical_table(&p.grid, &physical))?;
    let eps = run.exit.epsilon;
    let per_eps = |v: f64| (eps > 0.0).then(|| v / eps);
    let summary = PerturbSummary {
        kind: "perturb".into(),
        epsilon: eps,
        n1: p.grid.n1,
        n2: p.grid.n2,
        ls: p.grid.ls,
        iterations: run.report.iterations,
        converged: run.report.converged,
        norm_v: run.norm_v(),
        norm_v_over_eps: per_eps(run.norm_v()),
        shock_deviation: run.shock_deviation(),
        shock_deviation_over_eps: per_eps(run.shock_deviation()),
    };
    out.json("report.json", &run.report)?;
    out.json("summary.json", &summary)?;
    out.config(cfg)?;
    out.line(format!("converged in {} iterations", run.report.iterations));
    if let Some(r) = run.report.contraction_ratios.iter().copied().reduce(f64::max) {
        out.line(format!("max contraction ratio = {r:.4}"));
    }
    match summary.norm_v_over_eps {
        Some(v) => out.line(format!("|V|/eps = {v:.6e}, |xi - Ls|/eps = {:.6e}", summary.shock_deviation_over_eps.unwrap_or(0.0))),
        None => out.line(format!("|V| = {:.3e}", summary.norm_v)),
    }
    if let Some(r) = &run.report.final_residuals {
        out.line(format!("interior residual = {:.3e}, exact RH residual = {:.3e}", r.interior, r.rh_exact));
    }
    Ok(out)
}

/// Runs `f` in a pool sized by `SHOCKNOZZLE_THREADS` when set.
pub fn with_thread_cap<T: Send>(f: impl FnOnce() -> T + Send) -> Result<T> {
    match std::env::var(THREADS_ENV) {
        Ok(s) => {
            let n: usize = s
                .trim()
                .parse()
                .ok()
                .filter(|n| *n >= 1)
                .ok_or_else(|| Error::Config(format!("{THREADS_ENV} must be a positive integer, got {s:?}")))?;
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| Error::Internal(format!("thread pool: {e}")))?;
            Ok(pool.install(f))
        }
        Err(_) => Ok(f()),
    }
}

fn status(r: &Result<()>) -> f64 {
    match r {
        Ok(()) => 0.0,
        Err(e) => e.exit_code() as f64,
    }
}

pub fn cmd_sweep(cfg: &SolverConfig) -> Result<ResultBundle> {
    let mut out = ResultBundle::new(&cfg.output.dir)?;
    let setup = cfg.setup()?;
    let ls_values = cfg.sweep.ls.as_ref().map(|r| r.values()).unwrap_or_default();
    let eps_values = cfg.sweep.epsilon.as_ref().map(|r| r.values()).unwrap_or_default();

    let ls_rows: Vec<Vec<f64>> = with_thread_cap(|| {
        ls_values
            .par_iter()
            .map(|&ls| {
                let mut row = vec![ls, f64::NAN, f64::NAN];
                let r = (|| {
                    let (_, sub) = setup.shock_profile(ls)?;
                    let rho = sub.last_state().rho;
                    row[1] = setup.gas.pressure(rho)?;
                    row[2] = setup.gas.sound_speed_sq(rho)? * setup.monotonicity_derivative(ls)?;
                    Ok(())
                })();
                if let Err(e) = &r {
                    log::warn!("sweep run Ls = {ls} failed: {e}");
                }
                row.push(status(&r));
                row
            })
            .collect()
    })?;
    let mut t = Table::new("sweep_ls", &["ls", "pe", "dpe_dls", "status"]).with_header("exit pressure against shock position; status 0 = ok, else the exit code of the failure");
    ls_rows.into_iter().for_each(|r| t.push(r));
    let ok: Vec<f64> = t.rows.iter().filter(|r| r[3] == 0.0).map(|r| r[1]).collect();
    let decreasing = ok.windows(2).all(|w| w[1] < w[0]);
    let ls_failed = t.rows.iter().filter(|r| r[3] != 0.0).count();
    out.table(&t.with_meta("strictly_decreasing", decreasing))?;
    out.line(format!("Ls sweep: {} runs, {} failed, Pe strictly decreasing: {decreasing}", ls_values.len(), ls_failed));

    let mut t = Table::new("sweep_epsilon", &["epsilon", "norm_v", "norm_v_over_eps", "shock_dev_over_eps", "iterations", "status"])
        .with_header("fixed-point runs against exit perturbation size");
    let mut eps_failed = 0;
    if !eps_values.is_empty() {
        let problem = build_problem(cfg)?;
        let rows: Vec<Vec<f64>> = with_thread_cap(|| {
            eps_values
                .par_iter()
                .map(|&eps| {
                    let r = ExitPerturbation::new(eps, &cfg.exit.profile, &problem.grid).and_then(|e| problem.iterate(&e));
                    match r {
                        Ok((v, rep)) => {
                            let n = v.norm(problem.grid.h2);
                            let dev = v.v4.iter().fold(0.0_f64, |m, x| m.max(x.abs()));
                            vec![eps, n, n / eps, dev / eps, rep.iterations as f64, 0.0]
                        }
                        Err(e) => {
                            log::warn!("sweep run epsilon = {eps} failed: {e}");
                            vec![eps, f64::NAN, f64::NAN, f64::NAN, f64::NAN, e.exit_code() as f64]
                        }
                    }
                })
                .collect()
        })?;
        eps_failed = rows.iter().filter(|r| r[5] != 0.0).count();
        rows.into_iter().for_each(|r| t.push(r));
    }
    out.table(&t)?;
    out.line(format!("epsilon sweep: {} runs, {} failed", eps_values.len(), eps_failed));
    out.json(
        "summary.json",
        &serde_json::json!({
            "kind": "sweep",
            "ls_runs": ls_values.len(),
            "ls_failed": ls_failed,
            "epsilon_runs": eps_values.len(),
            "epsilon_failed": eps_failed,
        }),
    )?;
    out.config(cfg)?;
    Ok(out)
}

pub fn coefficient_table(c: &LinearCoefficients) -> Table {
    let cols = [
        "y1", "u_bar", "rho_bar", "c2", "u_prime", "u_second", "force", "B1", "B3", "B4", "lambda", "lambda_prime", "lambda0",
        "lambda1", "lambda2", "a0", "a1", "a2",
    ];
    let mut t = Table::new("coeffs", &cols)
        .with_header(format!("linear coefficients on {} y1 nodes in [{}, {}]", c.y1.len(), c.ls, c.l1))
        .with_meta("b0", c.b0)
        .with_meta("b2", c.b2)
        .with_meta("b3", c.b3)
        .with_meta("a3", c.a3)
        .with_meta("h1_partials", c.h1_partials)
        .with_meta("h2_partials", c.h2_partials);
    for i in 0..c.y1.len() {
        t.push(vec![
            c.y1[i],
            c.u_bar[i],
            c.rho_bar[i],
            c.c2[i],
            c.u_prime[i],
            c.u_second[i],
            c.force[i],
            c.big_b1[i],
            c.big_b3[i],
            c.big_b4[i],
            c.lambda[i],
            c.lambda_prime[i],
            c.lambda0[i],
            c.lambda1[i],
            c.lambda2[i],
            c.a0[i],
            c.a1[i],
            c.a2[i],
        ]);
    }
    t
}

pub fn cmd_coeffs(cfg: &SolverConfig) -> Result<ResultBundle> {
    let bg = solve_background(cfg)?;
    let grid = GridQ::new(bg.ls, bg.setup.l1, cfg.grid.n1, cfg.grid.n2)?;
    let c = LinearCoefficients::compute(&bg, &grid.y1)?;
    let mut out = ResultBundle::new(&cfg.output.dir)?;
    out.table(&coefficient_table(&c))?;
    out.json("summary.json", &serde_json::json!({ "kind": "coeffs", "b0": c.b0, "b2": c.b2, "b3": c.b3, "a3": c.a3 }))?;
    out.config(cfg)?;
    out.line(format!("b0 = {:.12e}, b2 = {:.12e}, b3 = {:.12e}, a3 = {:.12e}", c.b0, c.b2, c.b3, c.a3));
    let min = |v: &[f64]| v.iter().copied().fold(f64::INFINITY, f64::min);
    out.line(format!("min a0 = {:.6e}, min a1 = {:.6e}, min a2 = {:.6e}", min(&c.a0), min(&c.a1), min(&c.a2)));
    Ok(out)
}
