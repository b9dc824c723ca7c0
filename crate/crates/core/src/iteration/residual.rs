//! Residuals of the full nonlinear problem at a given state.

use serde::{Deserialize, Serialize};

use super::operator::Derivatives;
use super::ShockProblem;
use crate::error::Result;
use crate::state::{ExitPerturbation, PerturbationState};

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ResidualReport {
    /// Max over interior nodes of the density, curl and Bernoulli equations.
    pub interior_density: f64,
    pub interior_curl: f64,
    pub interior_bernoulli: f64,
    pub interior: f64,
    /// Flux jumps across the shock, using the fields on the shock side of `Q`.
    pub rh_fields: f64,
    /// Flux jumps of the exact jump solves at the converged foot.
    pub rh_exact: f64,
    /// `|v4' - xi'_RH|` along the foot.
    pub shock_slope: f64,
    pub exit_pressure: f64,
    pub wall: f64,
    pub entropy_ok: bool,
    /// Smallest `P+ - P-` along the foot.
    pub min_pressure_jump: f64,
}

/// Max flux jump for downstream `(rho, u1, u2, P)` and axial upstream `(rho, u, P)`.
fn flux_jump(down: (f64, f64, f64, f64), up: (f64, f64, f64), slope: f64) -> f64 {
    let (rho_p, u1, u2, p_p) = down;
    let (rho_m, um, p_m) = up;
    let un_p = u1 - slope * u2;
    let mass = rho_p * un_p - rho_m * um;
    let mom1 = rho_p * u1 * un_p + p_p - (rho_m * um * um + p_m);
    let mom2 = rho_p * u2 * un_p - slope * p_p + slope * p_m;
    mass.abs().max(mom1.abs()).max(mom2.abs())
}

impl ShockProblem {
    fn density_from_c2(&self, c2: f64) -> f64 {
        let gas = &self.background.setup.gas;
        (c2 / (gas.gamma * gas.entropy_const)).powf(1.0 / (gas.gamma - 1.0))
    }

    pub fn nonlinear_residual(&self, state: &PerturbationState, exit: &ExitPerturbation) -> Result<ResidualReport> {
        let g = &self.grid;
        let gas = &self.background.setup.gas;
        let d = Derivatives::of(state, self);
        let (n1, n2, n3) = self.nonlinear_operator(state, &d)?;
        let mut r = ResidualReport { entropy_ok: true, min_pressure_jump: f64::INFINITY, ..Default::default() };
        for i in 1..g.n1 - 1 {
            for j in 0..g.n2 {
                r.interior_density = r.interior_density.max(n1[[i, j]].abs());
                r.interior_curl = r.interior_curl.max(n2[[i, j]].abs());
                r.interior_bernoulli = r.interior_bernoulli.max(n3[[i, j]].abs());
            }
        }
        r.interior = r.interior_density.max(r.interior_curl).max(r.interior_bernoulli);

        let jumps = self.foot_jumps(state)?;
        for (j, jump) in jumps.iter().enumerate() {
            let up = jump.upstream;
            let p_m = gas.pressure(up.rho)?;
            let node = self.node_state(state, 0, j)?;
            let rho_p = self.density_from_c2(node.c2);
            let p_p = gas.pressure(rho_p)?;
            let slope = d.v4p[j];
            r.rh_fields = r.rh_fields.max(flux_jump((rho_p, node.u1, node.u2, p_p), (up.rho, up.u1, p_m), slope));
            let dn = jump.downstream;
            let p_exact = gas.pressure(dn.rho)?;
            r.rh_exact = r.rh_exact.max(flux_jump((dn.rho, dn.u1, dn.u2, p_exact), (up.rho, up.u1, p_m), jump.slope));
            r.shock_slope = r.shock_slope.max((slope - jump.slope).abs());
            let jump_p = p_p.min(p_exact) - p_m;
            r.min_pressure_jump = r.min_pressure_jump.min(jump_p);
            if !(jump_p > 0.0) {
                r.entropy_ok = false;
            }
        }

        let last = g.n1 - 1;
        for j in 0..g.n2 {
            let node = self.node_state(state, last, j)?;
            let p = gas.pressure(self.density_from_c2(node.c2))?;
            r.exit_pressure = r.exit_pressure.max((p - self.exit_pressure_at(exit, j)).abs());
        }
        for i in 0..g.n1 {
            r.wall = r.wall.max(state.v2[[i, 0]].abs()).max(state.v2[[i, g.n2 - 1]].abs());
        }
        Ok(r)
    }
}
