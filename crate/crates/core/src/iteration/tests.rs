use super::*;
use crate::background::NozzleSetup;
use crate::gas::{ForceField, GasModel};
use crate::state::ExitProfile;

fn problem(n: usize) -> ShockProblem {
    let s = NozzleSetup::new(0.0, 1.0, 1.0, 2.0, GasModel::with_gamma(1.4).unwrap(), ForceField::constant(0.1, 0.0))
        .unwrap();
    let bg = BackgroundSolution::with_shock_at(&s, 0.5).unwrap();
    ShockProblem::new(bg, n, n, IterationOptions::default()).unwrap()
}

fn exit(p: &ShockProblem, eps: f64) -> ExitPerturbation {
    ExitPerturbation::new(eps, &ExitProfile::default(), &p.grid).unwrap()
}

#[test]
fn zero_epsilon_is_a_fixed_point() {
    let p = problem(17);
    let (v, report) = p.iterate(&ExitPerturbation::zero(&p.grid)).unwrap();
    assert_eq!(report.iterations, 1);
    assert!(v.norm(p.grid.h2) <= 1e-12);
    assert!(report.converged);
}

#[test]
fn update_shock_matches_closed_form() {
    let n = 33;
    let h = 2.0 / (n - 1) as f64;
    let y: Vec<f64> = (0..n).map(|j| -1.0 + j as f64 * h).collect();
    let v2: Vec<f64> = y.iter().map(|t| 1.0 - t * t).collect();
    let b0 = 0.7;
    let v4 = update_shock(&v2, &vec![0.0; n], 0.0, b0, h);
    for (j, t) in y.iter().enumerate() {
        let exact = b0 * (t - t * t * t / 3.0 + 2.0 / 3.0);
        assert!((v4[j] - exact).abs() < 1e-13, "{} vs {}", v4[j], exact);
    }
}

#[test]
fn remainders_vanish_at_zero_state() {
    let p = problem(17);
    let b = p.assemble_remainders(&PerturbationState::zeros(&p.grid), &ExitPerturbation::zero(&p.grid)).unwrap();
    for (name, v) in b.norms() {
        assert!(v <= 1e-12, "{name} = {v:e}");
    }
}

#[test]
fn response_is_linear_in_epsilon() {
    let p = problem(33);
    let (a, _) = p.iterate(&exit(&p, 1e-4)).unwrap();
    let (b, _) = p.iterate(&exit(&p, 5e-5)).unwrap();
    let h2 = p.grid.h2;
    let ratio = a.norm(h2) / b.norm(h2);
    assert!((ratio - 2.0).abs() < 0.02, "ratio {ratio}");
}

#[test]
fn remainders_are_quadratic() {
    let p = problem(33);
    let g = &p.grid;
    let zero = ExitPerturbation::zero(g);
    let shape = |d: f64| PerturbationState {
        v1: g.from_fn(|y1, y2| d * (y1 - 0.3) * (std::f64::consts::PI * y2).cos()),
        v2: g.from_fn(|y1, y2| d * 0.5 * y1 * (std::f64::consts::PI * y2).sin()),
        v3: g.from_fn(|_, y2| d * 0.2 * (std::f64::consts::PI * y2).cos()),
        v4: g.y2.iter().map(|y2| d * 0.1 * (std::f64::consts::PI * y2).cos()).collect(),
    };
    let size = |d: f64| {
        let b = p.assemble_remainders(&shape(d), &zero).unwrap();
        b.norms().iter().map(|(_, v)| *v).fold(0.0, f64::max)
    };
    let (r1, r2) = (size(1e-2), size(5e-3));
    let order = (r1 / r2).log2();
    assert!((order - 2.0).abs() < 0.2, "order {order}");
}

#[test]
fn iterates_stay_compatible() {
    let p = problem(33);
    let (_, report) = p.iterate(&exit(&p, 1e-4)).unwrap();
    assert!(report.compatibility.passed, "{:?}", report.compatibility.failures);
    assert!(report.contraction_ratios.iter().all(|r| *r < 0.5));
}

#[test]
fn zero_state_residual() {
    let p = problem(17);
    let r = p.nonlinear_residual(&PerturbationState::zeros(&p.grid), &ExitPerturbation::zero(&p.grid)).unwrap();
    assert!(r.rh_exact <= 1e-10);
    assert!(r.wall == 0.0 && r.entropy_ok);
    assert!(r.exit_pressure <= 1e-10, "{}", r.exit_pressure);
}

#[test]
fn epsilon_bound_is_enforced() {
    let p = problem(17);
    assert!(matches!(p.iterate(&exit(&p, 0.5)), Err(Error::Config(_))));
}

#[test]
fn physical_fields_follow_the_shock() {
    let p = problem(17);
    let (v, _) = p.iterate(&exit(&p, 1e-3)).unwrap();
    let f = p.to_physical(&v).unwrap();
    assert!(f.inverse_error <= 1e-12);
    for j in 0..p.grid.n2 {
        assert!((f.x1[[0, j]] - f.shock[j]).abs() < 1e-14);
        assert!((f.x1[[p.grid.n1 - 1, j]] - p.grid.l1).abs() < 1e-14);
    }
    assert!(f.rho.iter().all(|r| *r > 0.0));
}
