//! Nonlinear defects of the linearized problem at a frozen state.

use ndarray::Array2;
use serde::{Deserialize, Serialize};

use super::operator::Derivatives;
use super::ShockProblem;
use crate::background::oblique_jump;
use crate::error::{Error, Result};
use crate::field::diff::{cumulative_integral, dy2, Parity};
use crate::field::transport::{solve_bernoulli_transport, trace_characteristics, CharacteristicFoot};
use crate::gas::FlowState;
use crate::state::{ExitPerturbation, PerturbationState};

/// Exact shock data at one foot node `(Ls, y2)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FootJump {
    pub xi: f64,
    pub upstream: FlowState,
    pub downstream: FlowState,
    /// `xi'` implied by the Rankine-Hugoniot conditions.
    pub slope: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RemainderBundle {
    pub f3: Array2<f64>,
    pub f4: Array2<f64>,
    pub f5: Vec<f64>,
    pub f6: Array2<f64>,
    pub g1: Array2<f64>,
    pub g2: Array2<f64>,
    pub r2: Vec<f64>,
    pub r3: Vec<f64>,
    pub r4: Vec<f64>,
    pub r5: Vec<f64>,
    pub r6: Vec<f64>,
    pub r7: Vec<f64>,
    pub foot: CharacteristicFoot,
    pub jumps: Vec<FootJump>,
}

fn max_abs<'a>(it: impl IntoIterator<Item = &'a f64>) -> f64 {
    it.into_iter().fold(0.0_f64, |m, v| m.max(v.abs()))
}

impl RemainderBundle {
    /// Max norms of every component, in a fixed order.
    pub fn norms(&self) -> Vec<(&'static str, f64)> {
        vec![
            ("F3", max_abs(&self.f3)),
            ("F4", max_abs(&self.f4)),
            ("F5", max_abs(&self.f5)),
            ("F6", max_abs(&self.f6)),
            ("G1", max_abs(&self.g1)),
            ("G2", max_abs(&self.g2)),
            ("R2", max_abs(&self.r2)),
            ("R3", max_abs(&self.r3)),
            ("R4", max_abs(&self.r4)),
            ("R5", max_abs(&self.r5)),
            ("R6", max_abs(&self.r6)),
            ("R7", max_abs(&self.r7)),
        ]
    }
}

impl ShockProblem {
    /// Exact oblique jump at the foot of every `y2` node for the given state.
    pub fn foot_jumps(&self, state: &PerturbationState) -> Result<Vec<FootJump>> {
        let g = &self.grid;
        let gas = &self.background.setup.gas;
        let (l0, l1) = (self.background.setup.l0, g.l1);
        (0..g.n2)
            .map(|j| {
                let xi = g.ls + state.v4[j];
                if !(xi > l0 && xi < l1) {
                    return Err(Error::ShockOutOfNozzle { xi, y2: g.y2[j] });
                }
                let upstream = self.background.supersonic_state_at(xi).map_err(|e| match e {
                    Error::SonicDegeneracy { .. } => {
                        Error::HatTooLarge(format!("upstream flow turns sonic before the shock foot xi = {xi}"))
                    }
                    other => other,
                })?;
                let t = state.v2[[0, j]];
                let downstream = oblique_jump(&upstream, t, gas)?;
                let p_minus = gas.pressure_unchecked(upstream.rho);
                let p_plus = gas.pressure_unchecked(downstream.rho);
                let slope = downstream.rho * downstream.u1 * t / (p_plus - p_minus + downstream.rho * t * t);
                Ok(FootJump { xi, upstream, downstream, slope })
            })
            .collect()
    }

    /// Exit axial velocity solving Bernoulli with the prescribed exit pressure.
    fn exit_velocity(&self, bernoulli: f64, u2: f64, pressure: f64) -> Result<f64> {
        let gas = &self.background.setup.gas;
        let rho = (pressure / gas.entropy_const).powf(1.0 / gas.gamma);
        let phi = self.background.setup.force.potential(self.grid.l1);
        let sq = 2.0 * (bernoulli + phi - gas.enthalpy(rho)) - u2 * u2;
        if !(sq > 0.0) {
            return Err(Error::HatTooLarge(format!("exit state has no real axial velocity (u1^2 = {sq})")));
        }
        Ok(sq.sqrt())
    }

    /// Exit pressure perturbation `epsilon * rho(L1) * Pex_hat(y2)`.
    pub(crate) fn exit_pressure_at(&self, exit: &ExitPerturbation, j: usize) -> f64 {
        let rho_exit = self.coeffs.rho_bar[self.grid.n1 - 1];
        self.background.exit_pressure + exit.epsilon * rho_exit * exit.pex_hat[j]
    }

    pub fn assemble_remainders(&self, hat: &PerturbationState, exit: &ExitPerturbation) -> Result<RemainderBundle> {
        let g = &self.grid;
        let c = &self.coeffs;
        if !hat.matches(g) {
            return Err(Error::Domain("hat state does not match the grid".into()));
        }
        let (n1, n2) = (g.n1, g.n2);

        let d = Derivatives::of(hat, self);
        let (nl1, nl2, _) = self.nonlinear_operator(hat, &d)?;
        let (lin1, lin2) = self.linear_operator(hat, &d);
        let f3 = &lin1 - &(&nl1 - &self.n_zero.0);
        let f4 = &lin2 - &(&nl2 - &self.n_zero.1);

        let jumps = self.foot_jumps(hat)?;
        let phi_ls = |xi: f64| self.background.setup.force.potential(xi);
        let gas = &self.background.setup.gas;
        let mut f5 = vec![0.0; n2];
        let mut r2 = vec![0.0; n2];
        let mut r3 = vec![0.0; n2];
        for (j, jump) in jumps.iter().enumerate() {
            let t = hat.v2[[0, j]];
            f5[j] = jump.slope - c.b0 * t;
            r2[j] = jump.downstream.u1 - c.post.u1 - c.b2 * hat.v4[j];
            let b_plus = gas.bernoulli(&jump.downstream, phi_ls(jump.xi));
            r3[j] = b_plus - c.bernoulli_plus - c.b3 * hat.v4[j];
        }
        let r5 = cumulative_integral(&f5, g.h2);

        let u_exit = c.u_bar[n1 - 1];
        let pe = self.background.exit_pressure;
        let u_ref = self.exit_velocity(c.bernoulli_plus, 0.0, pe)?;
        let mut r4 = vec![0.0; n2];
        for j in 0..n2 {
            let (v2, v3) = (hat.v2[[n1 - 1, j]], hat.v3[[n1 - 1, j]]);
            let u = self.exit_velocity(c.bernoulli_plus + v3, v2, self.exit_pressure_at(exit, j))?;
            r4[j] = (u - u_ref) - (v3 - exit.epsilon * exit.pex_hat[j]) / u_exit;
        }

        let foot = trace_characteristics(hat, c, g, self.options.interpolation)?;
        let transported = solve_bernoulli_transport(&hat.v4, &foot, c.b3, &r3, g);
        let f6 = Array2::from_shape_fn((n1, n2), |(i, j)| transported[[i, j]] - c.b3 * hat.v4[j]);

        let r6: Vec<f64> = (0..n2).map(|j| c.b2 * r5[j] + r2[j]).collect();
        let r7: Vec<f64> = (0..n2).map(|j| (c.b3 * r5[j] + f6[[n1 - 1, j]]) / u_exit + r4[j]).collect();

        let d2f6 = dy2(&f6, g.h2, Parity::Even);
        let mut g1 = g.zeros();
        let mut g2 = g.zeros();
        for i in 0..n1 {
            let sub = c.c2[i] - c.u_bar[i] * c.u_bar[i];
            let k = c.big_b3[i] * c.b3 + c.big_b4[i];
            for j in 0..n2 {
                g1[[i, j]] = (f3[[i, j]] - k * r5[j] - c.big_b3[i] * f6[[i, j]]) / sub;
                g2[[i, j]] = f4[[i, j]] - d2f6[[i, j]] / c.u_bar[i] - c.lambda[i] * f5[j];
            }
        }
        Ok(RemainderBundle { f3, f4, f5, f6, g1, g2, r2, r3, r4, r5, r6, r7, foot, jumps })
    }
}
