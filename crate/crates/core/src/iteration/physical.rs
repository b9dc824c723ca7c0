//! Mapping computational fields back to the physical domain behind the shock.

use ndarray::Array2;
use serde::{Deserialize, Serialize};

use super::ShockProblem;
use crate::error::{Error, Result};
use crate::state::PerturbationState;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhysicalFields {
    /// Physical abscissa of every computational node.
    pub x1: Array2<f64>,
    pub x2: Vec<f64>,
    pub u1: Array2<f64>,
    pub u2: Array2<f64>,
    pub rho: Array2<f64>,
    pub pressure: Array2<f64>,
    pub bernoulli: Array2<f64>,
    /// Shock curve `xi(x2)`.
    pub shock: Vec<f64>,
    /// Largest `|y1(x1(y)) - y1|` over the grid.
    pub inverse_error: f64,
}

/// `x1 = y1 + (L1 - y1)/(L1 - Ls) (xi - Ls)`.
pub fn to_physical_x1(y1: f64, xi: f64, ls: f64, l1: f64) -> f64 {
    y1 + (l1 - y1) / (l1 - ls) * (xi - ls)
}

/// `y1 = (x1 - xi)/(L1 - xi) (L1 - Ls) + Ls`.
pub fn to_computational_y1(x1: f64, xi: f64, ls: f64, l1: f64) -> f64 {
    (x1 - xi) / (l1 - xi) * (l1 - ls) + ls
}

impl ShockProblem {
    pub fn to_physical(&self, state: &PerturbationState) -> Result<PhysicalFields> {
        let g = &self.grid;
        let gas = &self.background.setup.gas;
        let l0 = self.background.setup.l0;
        let shock: Vec<f64> = state.v4.iter().map(|v| g.ls + v).collect();
        for (j, &xi) in shock.iter().enumerate() {
            if !(xi > l0 && xi < g.l1) {
                return Err(Error::ShockOutOfNozzle { xi, y2: g.y2[j] });
            }
        }
        let dim = (g.n1, g.n2);
        let mut f = PhysicalFields {
            x1: Array2::zeros(dim),
            x2: g.y2.clone(),
            u1: Array2::zeros(dim),
            u2: Array2::zeros(dim),
            rho: Array2::zeros(dim),
            pressure: Array2::zeros(dim),
            bernoulli: Array2::zeros(dim),
            shock,
            inverse_error: 0.0,
        };
        for i in 0..g.n1 {
            for j in 0..g.n2 {
                let s = self.node_state(state, i, j)?;
                let x1 = to_physical_x1(g.y1[i], f.shock[j], g.ls, g.l1);
                let back = to_computational_y1(x1, f.shock[j], g.ls, g.l1);
                f.inverse_error = f.inverse_error.max((back - g.y1[i]).abs());
                let rho = gas.density_from_bernoulli(s.bernoulli, self.background.setup.force.potential(x1), s.u1 * s.u1 + s.u2 * s.u2)?;
                f.x1[[i, j]] = x1;
                f.u1[[i, j]] = s.u1;
                f.u2[[i, j]] = s.u2;
                f.rho[[i, j]] = rho;
                f.pressure[[i, j]] = gas.pressure(rho)?;
                f.bernoulli[[i, j]] = s.bernoulli;
            }
        }
        Ok(f)
    }
}
