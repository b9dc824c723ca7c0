//! Bernoulli transport along the characteristics of the frozen hat state.

use ndarray::Array2;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::diff::Parity;
use super::grid::GridQ;
use super::interp::{cubic_bounded, cubic_y2, sample, Interpolation};
use crate::coefficients::LinearCoefficients;
use crate::error::{Error, Result};
use crate::state::PerturbationState;

/// Relative floor for the characteristic denominator.
pub const DENOMINATOR_GUARD: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CharacteristicFoot {
    /// Ordinate at `y1 = Ls` of the characteristic through each node.
    pub beta: Array2<f64>,
    /// Interior nodes whose foot had to be clamped into `[-1, 1]`.
    pub clamped: usize,
}

struct Tracer<'a> {
    grid: &'a GridQ,
    coeffs: &'a LinearCoefficients,
    hat: &'a PerturbationState,
    v4_prime: Vec<f64>,
    method: Interpolation,
    guard: f64,
}

impl Tracer<'_> {
    fn slope(&self, s: f64, y2: f64) -> Result<f64> {
        let g = self.grid;
        let y2c = y2.clamp(-1.0, 1.0);
        let v1 = sample(&self.hat.v1, g, s, y2c, Parity::Even, self.method);
        let v2 = sample(&self.hat.v2, g, s, y2c, Parity::Odd, self.method);
        let v4 = cubic_y2(&self.hat.v4, g.h2, y2c, Parity::Even);
        let v4p = cubic_y2(&self.v4_prime, g.h2, y2c, Parity::Odd);
        let u = self.coeffs.interpolate(&self.coeffs.u_bar, s);
        let width = g.l1 - g.ls;
        let den = (u + v1) * width + v2 * (s - g.l1) * v4p;
        if !(den.abs() >= self.guard) {
            return Err(Error::CharacteristicDegeneracy { y1: s, y2, denominator: den });
        }
        Ok(v2 * (width - v4) / den)
    }

    /// Two RK4 steps of `h1 / 2` from `(y1_i, y2)` back to `y1_(i-1)`.
    fn step_back(&self, i: usize, y2: f64) -> Result<f64> {
        let h = -0.5 * self.grid.h1;
        let mut s = self.grid.y1[i];
        let mut y = y2;
        for _ in 0..2 {
            let k1 = self.slope(s, y)?;
            let k2 = self.slope(s + 0.5 * h, y + 0.5 * h * k1)?;
            let k3 = self.slope(s + 0.5 * h, y + 0.5 * h * k2)?;
            let k4 = self.slope(s + h, y + h * k3)?;
            y += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
            s += h;
        }
        Ok(y)
    }
}

/// Traces the characteristic through every node back to the shock line,
/// marching one column at a time and interpolating the previous feet.
pub fn trace_characteristics(
    hat: &PerturbationState,
    coeffs: &LinearCoefficients,
    grid: &GridQ,
    method: Interpolation,
) -> Result<CharacteristicFoot> {
    if !hat.matches(grid) {
        return Err(Error::Domain("hat state does not match the grid".into()));
    }
    let u_min = coeffs.u_bar.iter().copied().fold(f64::INFINITY, f64::min);
    let tracer = Tracer {
        grid,
        coeffs,
        hat,
        v4_prime: hat.v4_prime(grid.h2),
        method,
        guard: DENOMINATOR_GUARD * u_min * (grid.l1 - grid.ls),
    };
    let (n1, n2) = (grid.n1, grid.n2);
    let mut beta = grid.zeros();
    beta.row_mut(0).assign(&ndarray::ArrayView1::from(&grid.y2));
    let mut clamped = 0;
    for i in 1..n1 {
        let prev = beta.row(i - 1).to_vec();
        let row: Vec<(f64, bool)> = (0..n2)
            .into_par_iter()
            .map(|j| {
                let y = tracer.step_back(i, grid.y2[j])?;
                let out = !(-1.0..=1.0).contains(&y) && j != 0 && j != n2 - 1;
                Ok((cubic_bounded(&prev, grid.h2, y.clamp(-1.0, 1.0)).clamp(-1.0, 1.0), out))
            })
            .collect::<Result<_>>()?;
        for (j, (b, out)) in row.into_iter().enumerate() {
            beta[[i, j]] = b;
            clamped += usize::from(out);
        }
    }
    if clamped > 0 {
        log::warn!("{clamped} interior characteristic feet clamped into [-1, 1]");
    }
    Ok(CharacteristicFoot { beta, clamped })
}

/// `v3(y) = b3 v4(beta(y)) + R3(beta(y))`, both traces interpolated by even cubics.
pub fn solve_bernoulli_transport(v4: &[f64], foot: &CharacteristicFoot, b3: f64, r3: &[f64], grid: &GridQ) -> Array2<f64> {
    foot.beta.mapv(|b| b3 * cubic_y2(v4, grid.h2, b, Parity::Even) + cubic_y2(r3, grid.h2, b, Parity::Even))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::background::{BackgroundSolution, NozzleSetup};
    use crate::gas::{ForceField, GasModel};

    fn setup(n: usize) -> (GridQ, LinearCoefficients) {
        let s = NozzleSetup::new(0.0, 1.0, 1.0, 2.0, GasModel::with_gamma(1.4).unwrap(), ForceField::constant(0.1, 0.0))
            .unwrap();
        let bg = BackgroundSolution::with_shock_at(&s, 0.5).unwrap();
        let g = GridQ::new(0.5, 1.0, n, n).unwrap();
        let c = LinearCoefficients::compute(&bg, &g.y1).unwrap();
        (g, c)
    }

    #[test]
    fn horizontal_characteristics() {
        let (g, c) = setup(17);
        let hat = PerturbationState::zeros(&g);
        let foot = trace_characteristics(&hat, &c, &g, Interpolation::Bilinear).unwrap();
        for i in 0..17 {
            for j in 0..17 {
                assert_eq!(foot.beta[[i, j]], g.y2[j]);
            }
        }
        let v4: Vec<f64> = g.y2.iter().map(|y| (std::f64::consts::PI * (y + 1.0)).cos()).collect();
        let v3 = solve_bernoulli_transport(&v4, &foot, -0.2, &vec![0.0; 17], &g);
        for i in 0..17 {
            for j in 0..17 {
                assert!((v3[[i, j]] + 0.2 * v4[j]).abs() < 1e-15);
            }
        }
        let v3 = solve_bernoulli_transport(&vec![0.5; 17], &foot, -0.2, &vec![0.0; 17], &g);
        assert!(v3.iter().all(|v| (v + 0.1).abs() < 1e-15));
    }

    #[test]
    fn walls_are_characteristics_and_match_oracle() {
        let (g, c) = setup(33);
        let mut hat = PerturbationState::zeros(&g);
        hat.v2 = g.from_fn(|_, y2| 1e-3 * (1.0 - y2 * y2));
        let foot = trace_characteristics(&hat, &c, &g, Interpolation::Bicubic).unwrap();
        for i in 0..33 {
            assert_eq!(foot.beta[[i, 0]], -1.0);
            assert_eq!(foot.beta[[i, 32]], 1.0);
            assert_eq!(foot.beta[[0, i]], g.y2[i]);
        }
        assert_eq!(foot.clamped, 0);
        // oracle: the same ODE with the exact v2 and many more steps
        let tracer = Tracer { grid: &g, coeffs: &c, hat: &hat, v4_prime: vec![0.0; 33], method: Interpolation::Bicubic, guard: 0.0 };
        let (i, j) = (32, 10);
        let mut y = g.y2[j];
        let steps = 4096;
        let h = -(g.y1[i] - g.ls) / steps as f64;
        let mut s = g.y1[i];
        for _ in 0..steps {
            let k1 = tracer.slope(s, y).unwrap();
            let k2 = tracer.slope(s + 0.5 * h, y + 0.5 * h * k1).unwrap();
            let k3 = tracer.slope(s + 0.5 * h, y + 0.5 * h * k2).unwrap();
            let k4 = tracer.slope(s + h, y + h * k3).unwrap();
            y += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
            s += h;
        }
        assert!((foot.beta[[i, j]] - y).abs() < 1e-8, "{} {}", foot.beta[[i, j]], y);
        assert!(foot.beta[[i, j]] < g.y2[j]);
    }
}
