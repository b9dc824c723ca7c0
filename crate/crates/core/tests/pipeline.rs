mod common;

use std::path::Path;

use shocknozzle::io::{self, SolverConfig};
use shocknozzle::*;

fn config(text: &str) -> SolverConfig {
    SolverConfig::from_toml_str(text, Path::new("inline.toml")).unwrap()
}

#[test]
fn shooting_then_perturbation() {
    let mut cfg = config(common::CONFIG);
    let setup = cfg.setup().unwrap();
    let pe = setup.exit_pressure_of_shock(0.4).unwrap();
    cfg.exit.ls = None;
    cfg.exit.pe = Some(pe);
    let run = io::run_perturbation(&cfg).unwrap();
    assert!((run.problem.background.ls - 0.4).abs() < 1e-9);
    assert!(run.report.converged);
    let phys = run.problem.to_physical(&run.state).unwrap();
    assert!(phys.inverse_error <= 1e-12);
    // the shock is displaced by O(epsilon) and stays inside the nozzle
    let dev = run.shock_deviation();
    assert!(dev > 0.0 && dev < 10.0 * cfg.exit.epsilon);
    assert!(phys.shock.iter().all(|x| *x > 0.0 && *x < 1.0));
}

#[test]
fn higher_mode_profile_and_symmetry() {
    let mut cfg = config(common::CONFIG);
    cfg.exit.profile = ExitProfile::Cosine { k: 2 };
    let run = io::run_perturbation(&cfg).unwrap();
    // cos(2 pi (y2 + 1)) is even in y2, so v4 is even and v2 is odd
    let n = run.problem.grid.n2;
    for j in 0..n / 2 {
        assert!((run.state.v4[j] - run.state.v4[n - 1 - j]).abs() < 1e-12);
        let i = run.problem.grid.n1 / 2;
        assert!((run.state.v2[[i, j]] + run.state.v2[[i, n - 1 - j]]).abs() < 1e-12);
    }
}

#[test]
fn samples_profile_equals_builtin() {
    let cfg = config(common::CONFIG);
    let a = io::run_perturbation(&cfg).unwrap();
    let mut cfg2 = cfg.clone();
    cfg2.exit.profile = ExitProfile::Samples { values: a.exit.pex_hat.clone() };
    let b = io::run_perturbation(&cfg2).unwrap();
    assert_eq!(a.state, b.state);
}

#[test]
fn written_fields_reload_bit_identically() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = config(common::CONFIG);
    cfg.output.dir = dir.path().to_path_buf();
    io::cmd_perturb(&cfg).unwrap();
    let run = io::run_perturbation(&cfg).unwrap();
    let fields = io::Table::read(dir.path(), "fields").unwrap();
    let v1 = fields.column("v1").unwrap();
    for (a, b) in v1.iter().zip(run.state.v1.iter()) {
        assert_eq!(a.to_bits(), b.to_bits());
    }
    let shock = io::Table::read(dir.path(), "shock").unwrap();
    for (a, b) in shock.column("v4").unwrap().iter().zip(&run.state.v4) {
        assert_eq!(a.to_bits(), b.to_bits());
    }
    let saved = SolverConfig::load(&dir.path().join("config.toml")).unwrap();
    assert_eq!(saved, cfg);
}

#[test]
fn gamma_two_converges() {
    let cfg = config(&common::CONFIG.replace("gamma = 1.4", "gamma = 2.0"));
    let run = io::run_perturbation(&cfg).unwrap();
    assert!(run.report.iterations <= 15);
    assert!(run.report.contraction_ratios.iter().all(|r| *r <= 0.5));
    let r = run.report.final_residuals.unwrap();
    assert!(r.entropy_ok && r.rh_exact <= 1e-12);
}

#[test]
fn coefficients_are_certified_for_the_config() {
    let cfg = config(common::CONFIG);
    let bg = io::solve_background(&cfg).unwrap();
    let grid = GridQ::new(bg.ls, bg.setup.l1, 33, 33).unwrap();
    let c = LinearCoefficients::compute(&bg, &grid.y1).unwrap();
    assert!(c.b0 > 0.0 && c.b2 < 0.0 && c.a3 > 0.0);
    assert!(c.a2.iter().all(|a| *a > 1.0));
}
