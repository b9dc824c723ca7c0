//! Fixed-point iteration for the perturbed transonic shock.
//!
//! Each sweep freezes a state `V^`, evaluates the nonlinear defects of the
//! linearized problem there, solves the non-local elliptic problem for the
//! velocity potential, integrates the shock ODE and transports the
//! Bernoulli perturbation. The fixed point solves the full nonlinear
//! problem up to discretization error.

mod operator;
pub mod physical;
pub mod remainders;
pub mod residual;

use ndarray::Array2;
use serde::{Deserialize, Serialize};

use crate::background::BackgroundSolution;
use crate::coefficients::LinearCoefficients;
use crate::error::{Error, Result};
use crate::field::diff::{cumulative_integral, dy1, dy1_4th, dy2_4th, integral_y2, Parity};
use crate::field::elliptic::{EllipticSolver, PotentialSolution};
use crate::field::grid::GridQ;
use crate::field::interp::Interpolation;
use crate::state::{CompatibilityReport, ExitPerturbation, PerturbationState};

pub use physical::PhysicalFields;
pub use remainders::{FootJump, RemainderBundle};
pub use residual::ResidualReport;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct IterationOptions {
    pub tol_fp: f64,
    pub max_iter: usize,
    pub epsilon_max: f64,
    pub interpolation: Interpolation,
}

impl Default for IterationOptions {
    fn default() -> Self {
        IterationOptions { tol_fp: 1e-10, max_iter: 50, epsilon_max: 1e-2, interpolation: Interpolation::Bilinear }
    }
}

/// Diagnostic record of one fixed-point run.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct IterationReport {
    pub iterations: usize,
    pub converged: bool,
    /// `|V^n|` after each sweep.
    pub iterates: Vec<f64>,
    /// `|V^(n+1) - V^n|` for each sweep.
    pub steps: Vec<f64>,
    pub contraction_ratios: Vec<f64>,
    pub kappa_history: Vec<f64>,
    pub clamped_feet: usize,
    pub compatibility: CompatibilityReport,
    pub final_residuals: Option<ResidualReport>,
}

/// Velocity fields, free constant and potential from one elliptic solve.
#[derive(Debug, Clone, PartialEq)]
pub struct VelocitySolution {
    pub v1: Array2<f64>,
    pub v2: Array2<f64>,
    pub v4_at_minus1: f64,
    pub potential: PotentialSolution,
    /// Data handed to the elliptic solver.
    pub source: Array2<f64>,
    pub g1: Vec<f64>,
    pub g2: Vec<f64>,
}

/// Everything fixed during an iteration: background, grid, coefficients and
/// the factorized elliptic operator.
#[derive(Debug)]
pub struct ShockProblem {
    pub background: BackgroundSolution,
    pub grid: GridQ,
    pub coeffs: LinearCoefficients,
    pub solver: EllipticSolver,
    pub options: IterationOptions,
    n_zero: (Array2<f64>, Array2<f64>),
}

impl ShockProblem {
    pub fn new(background: BackgroundSolution, n1: usize, n2: usize, options: IterationOptions) -> Result<Self> {
        background.setup.force.validate_positive(background.setup.l0, background.setup.l1)?;
        let grid = GridQ::new(background.ls, background.setup.l1, n1, n2)?;
        let coeffs = LinearCoefficients::compute(&background, &grid.y1)?;
        let solver = EllipticSolver::from_linear(&grid, &coeffs)?;
        let mut p = ShockProblem {
            background,
            grid: grid.clone(),
            coeffs,
            solver,
            options,
            n_zero: (grid.zeros(), grid.zeros()),
        };
        let zero = PerturbationState::zeros(&grid);
        let d = operator::Derivatives::of(&zero, &p);
        let (a, b, _) = p.nonlinear_operator(&zero, &d)?;
        p.n_zero = (a, b);
        Ok(p)
    }

    /// Builds the elliptic data from a bundle, solves it and reconstructs `(v1, v2)`.
    pub fn solve_velocity(&self, bundle: &RemainderBundle, exit: &ExitPerturbation) -> Result<VelocitySolution> {
        let g = &self.grid;
        let c = &self.coeffs;
        let (n1, n2) = (g.n1, g.n2);
        let ig2 = integral_y2(&bundle.g2, g.h2);
        let d1ig2 = dy1(&ig2, g.h1);
        let source = Array2::from_shape_fn((n1, n2), |(i, j)| bundle.g1[[i, j]] + c.lambda1[i] * ig2[[i, j]] + d1ig2[[i, j]]);
        let u_exit = c.u_bar[n1 - 1];
        let g1: Vec<f64> = (0..n2).map(|j| bundle.r6[j] + ig2[[0, j]]).collect();
        let g2: Vec<f64> =
            (0..n2).map(|j| -exit.epsilon * exit.pex_hat[j] / u_exit + bundle.r7[j] + ig2[[n1 - 1, j]]).collect();
        let potential = self.solver.solve_unchecked(&source, &g1, &g2)?;
        let phi = &potential.phi;
        let kappa = potential.kappa;
        let v2 = dy2_4th(phi, g.h2, Parity::Even);
        let d1phi = dy1_4th(phi, g.h1);
        let v1 = Array2::from_shape_fn((n1, n2), |(i, j)| {
            d1phi[[i, j]] + c.lambda[i] * c.b0 * (kappa + phi[[0, j]]) - ig2[[i, j]]
        });
        Ok(VelocitySolution { v1, v2, v4_at_minus1: c.b0 * kappa, potential, source, g1, g2 })
    }

    /// One application of the fixed-point map.
    pub fn sweep(&self, hat: &PerturbationState, exit: &ExitPerturbation) -> Result<(PerturbationState, SweepInfo)> {
        let bundle = self.assemble_remainders(hat, exit)?;
        let vel = self.solve_velocity(&bundle, exit)?;
        let v2_ls: Vec<f64> = vel.v2.row(0).to_vec();
        let v4 = update_shock(&v2_ls, &bundle.f5, vel.v4_at_minus1, self.coeffs.b0, self.grid.h2);
        let v3 = Array2::from_shape_fn(vel.v1.raw_dim(), |(i, j)| self.coeffs.b3 * v4[j] + bundle.f6[[i, j]]);
        let mut compat = self.solver_data_compatibility(&vel);
        let next = PerturbationState { v1: vel.v1, v2: vel.v2, v3, v4 };
        compat.merge(&next.compatibility(&self.grid));
        Ok((next, SweepInfo { kappa: vel.potential.kappa, clamped: bundle.foot.clamped, compatibility: compat }))
    }

    fn solver_data_compatibility(&self, vel: &VelocitySolution) -> CompatibilityReport {
        let mut r = CompatibilityReport::default();
        match self.solver.check_compatibility(&vel.source, &vel.g1, &vel.g2) {
            Ok(()) => r.record_value("elliptic data", 0.0, 1.0),
            Err(e) => r.record_value(&format!("elliptic data ({e})"), 1.0, 0.0),
        }
        r
    }

    /// Fixed-point loop from `V = 0`.
    pub fn iterate(&self, exit: &ExitPerturbation) -> Result<(PerturbationState, IterationReport)> {
        let opts = &self.options;
        if exit.epsilon > opts.epsilon_max {
            return Err(Error::Config(format!(
                "epsilon = {} exceeds the configured bound epsilon_max = {}",
                exit.epsilon, opts.epsilon_max
            )));
        }
        if exit.epsilon > 1e-3 {
            log::warn!("epsilon = {} is above 1e-3; the linear regime may not apply", exit.epsilon);
        }
        exit.validate(&self.grid)?;
        let h2 = self.grid.h2;
        let mut report = IterationReport::default();
        let mut current = PerturbationState::zeros(&self.grid);
        for n in 1..=opts.max_iter {
            let (next, info) = self.sweep(&current, exit)?;
            let step = next.difference(&current).norm(h2);
            if !step.is_finite() {
                return Err(Error::Divergence { iterations: n, ratios: report.contraction_ratios });
            }
            if let Some(&prev) = report.steps.last() {
                report.contraction_ratios.push(if prev > 0.0 { step / prev } else { 0.0 });
            }
            report.steps.push(step);
            report.iterates.push(next.norm(h2));
            report.kappa_history.push(info.kappa);
            report.clamped_feet = report.clamped_feet.max(info.clamped);
            report.compatibility.merge(&info.compatibility);
            report.iterations = n;
            current = next;
            log::debug!("sweep {n}: |dV| = {step:e}");
            if step <= opts.tol_fp {
                report.converged = true;
                report.final_residuals = Some(self.nonlinear_residual(&current, exit)?);
                return Ok((current, report));
            }
        }
        Err(Error::Divergence { iterations: opts.max_iter, ratios: report.contraction_ratios })
    }
}

/// Per-sweep diagnostics.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepInfo {
    pub kappa: f64,
    pub clamped: usize,
    pub compatibility: CompatibilityReport,
}

/// `v4(y2) = v4(-1) + int_{-1}^{y2} (b0 v2(Ls, t) + F5(t)) dt`.
pub fn update_shock(v2_at_ls: &[f64], f5: &[f64], v4_at_minus1: f64, b0: f64, h2: f64) -> Vec<f64> {
    let integrand: Vec<f64> = v2_at_ls.iter().zip(f5).map(|(v, f)| b0 * v + f).collect();
    cumulative_integral(&integrand, h2).into_iter().map(|s| v4_at_minus1 + s).collect()
}

#[cfg(test)]
mod tests;
