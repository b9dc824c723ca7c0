//! The transformed Euler operator on `Q` and its linearization at the background.
//!
//! Both use the same difference stencils so that their difference at a state
//! is purely quadratic in that state.

use ndarray::Array2;

use super::ShockProblem;
use crate::error::{Error, Result};
use crate::field::diff::{dy1, dy2, Parity};
use crate::state::PerturbationState;

pub(crate) struct Derivatives {
    pub d1v1: Array2<f64>,
    pub d2v1: Array2<f64>,
    pub d1v2: Array2<f64>,
    pub d2v2: Array2<f64>,
    pub d1v3: Array2<f64>,
    pub d2v3: Array2<f64>,
    pub v4p: Vec<f64>,
}

impl Derivatives {
    pub fn of(state: &PerturbationState, p: &ShockProblem) -> Self {
        let (h1, h2) = (p.grid.h1, p.grid.h2);
        Derivatives {
            d1v1: dy1(&state.v1, h1),
            d2v1: dy2(&state.v1, h2, Parity::Even),
            d1v2: dy1(&state.v2, h1),
            d2v2: dy2(&state.v2, h2, Parity::Odd),
            d1v3: dy1(&state.v3, h1),
            d2v3: dy2(&state.v3, h2, Parity::Even),
            v4p: state.v4_prime(h2),
        }
    }
}

/// Physical quantities reconstructed at one node.
#[derive(Debug, Clone, Copy)]
pub(crate) struct NodeState {
    pub u1: f64,
    pub u2: f64,
    pub bernoulli: f64,
    pub x1: f64,
    pub c2: f64,
}

impl ShockProblem {
    pub(crate) fn node_state(&self, state: &PerturbationState, i: usize, j: usize) -> Result<NodeState> {
        let g = &self.grid;
        let y1 = g.y1[i];
        let u1 = self.coeffs.u_bar[i] + state.v1[[i, j]];
        let u2 = state.v2[[i, j]];
        let bernoulli = self.coeffs.bernoulli_plus + state.v3[[i, j]];
        let x1 = y1 + (g.l1 - y1) / (g.l1 - g.ls) * state.v4[j];
        let phi = self.background.setup.force.potential(x1);
        let radicand = bernoulli + phi - 0.5 * (u1 * u1 + u2 * u2);
        if !(radicand > 0.0) {
            return Err(Error::Vacuum { radicand });
        }
        let c2 = (self.coeffs.gamma - 1.0) * radicand;
        Ok(NodeState { u1, u2, bernoulli, x1, c2 })
    }

    /// `(N1, N2, N3)`: density, curl and Bernoulli equations in `y` coordinates.
    pub(crate) fn nonlinear_operator(
        &self,
        state: &PerturbationState,
        d: &Derivatives,
    ) -> Result<(Array2<f64>, Array2<f64>, Array2<f64>)> {
        let g = &self.grid;
        let width = g.l1 - g.ls;
        let force = &self.background.setup.force;
        let (mut n1, mut n2, mut n3) = (g.zeros(), g.zeros(), g.zeros());
        for i in 0..g.n1 {
            let up = self.coeffs.u_prime[i];
            for j in 0..g.n2 {
                let s = self.node_state(state, i, j)?;
                let v4 = state.v4[j];
                let dd = width / (width - v4);
                let e = (g.y1[i] - g.l1) / (width - v4) * d.v4p[j];
                let du1_dy1 = up + d.d1v1[[i, j]];
                let d1u1 = dd * du1_dy1;
                let d2u1 = d.d2v1[[i, j]] + e * du1_dy1;
                let d1u2 = dd * d.d1v2[[i, j]];
                let d2u2 = d.d2v2[[i, j]] + e * d.d1v2[[i, j]];
                let d1b = dd * d.d1v3[[i, j]];
                let d2b = d.d2v3[[i, j]] + e * d.d1v3[[i, j]];
                let (u1, u2, c2) = (s.u1, s.u2, s.c2);
                n1[[i, j]] = (c2 - u1 * u1) * d1u1 - u1 * u2 * (d1u2 + d2u1) + (c2 - u2 * u2) * d2u2 + u1 * force.value(s.x1);
                n2[[i, j]] = d1u2 - d2u1 + d2b / u1;
                n3[[i, j]] = u1 * d1b + u2 * d2b;
            }
        }
        Ok((n1, n2, n3))
    }

    /// `(L1, L2)`: linearization of `(N1, N2)` at the background.
    pub(crate) fn linear_operator(&self, state: &PerturbationState, d: &Derivatives) -> (Array2<f64>, Array2<f64>) {
        let g = &self.grid;
        let c = &self.coeffs;
        let width = g.l1 - g.ls;
        let (mut l1, mut l2) = (g.zeros(), g.zeros());
        for i in 0..g.n1 {
            let (u, c2) = (c.u_bar[i], c.c2[i]);
            let s = (g.l1 - g.y1[i]) / width;
            for j in 0..g.n2 {
                l1[[i, j]] = (c2 - u * u) * d.d1v1[[i, j]]
                    + c2 * d.d2v2[[i, j]]
                    + c.big_b1[i] * state.v1[[i, j]]
                    + c.big_b3[i] * state.v3[[i, j]]
                    + c.big_b4[i] * state.v4[j];
                l2[[i, j]] = d.d1v2[[i, j]] - d.d2v1[[i, j]] + s * c.u_prime[i] * d.v4p[j] + d.d2v3[[i, j]] / u;
            }
        }
        (l1, l2)
    }
}
