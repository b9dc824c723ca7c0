//! Perturbation fields on `Q` and the exit-pressure perturbation.

use ndarray::Array2;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::diff::{d1_4th_reflect, dy2, dy2y2, wall_check, Parity};
use crate::field::grid::GridQ;

/// `(v1, v2, v3)` on the grid and the shock displacement `v4(y2)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PerturbationState {
    pub v1: Array2<f64>,
    pub v2: Array2<f64>,
    pub v3: Array2<f64>,
    pub v4: Vec<f64>,
}

fn max_abs<'a>(it: impl IntoIterator<Item = &'a f64>) -> f64 {
    it.into_iter().fold(0.0_f64, |m, v| m.max(v.abs()))
}

impl PerturbationState {
    pub fn zeros(grid: &GridQ) -> Self {
        PerturbationState { v1: grid.zeros(), v2: grid.zeros(), v3: grid.zeros(), v4: vec![0.0; grid.n2] }
    }

    pub fn v4_at_minus1(&self) -> f64 {
        self.v4[0]
    }

    /// `v4'` by fourth-order differences with even reflection at the walls.
    pub fn v4_prime(&self, h2: f64) -> Vec<f64> {
        d1_4th_reflect(&self.v4, h2, Parity::Even)
    }

    /// Iteration norm: max of the field sup norms, `|v4|` and `|v4'|`.
    pub fn norm(&self, h2: f64) -> f64 {
        max_abs(self.v1.iter())
            .max(max_abs(self.v2.iter()))
            .max(max_abs(self.v3.iter()))
            .max(max_abs(self.v4.iter()))
            .max(max_abs(self.v4_prime(h2).iter()))
    }

    pub fn difference(&self, other: &Self) -> Self {
        PerturbationState {
            v1: &self.v1 - &other.v1,
            v2: &self.v2 - &other.v2,
            v3: &self.v3 - &other.v3,
            v4: self.v4.iter().zip(&other.v4).map(|(a, b)| a - b).collect(),
        }
    }

    pub fn scaled(&self, s: f64) -> Self {
        PerturbationState {
            v1: &self.v1 * s,
            v2: &self.v2 * s,
            v3: &self.v3 * s,
            v4: self.v4.iter().map(|v| v * s).collect(),
        }
    }

    pub fn matches(&self, grid: &GridQ) -> bool {
        let d = (grid.n1, grid.n2);
        self.v1.dim() == d && self.v2.dim() == d && self.v3.dim() == d && self.v4.len() == grid.n2
    }

    /// Discrete membership test for the iteration space: wall conditions
    /// hold to truncation error.
    pub fn compatibility(&self, grid: &GridQ) -> CompatibilityReport {
        let h2 = grid.h2;
        let mut report = CompatibilityReport::default();
        for i in 0..grid.n1 {
            let row = |f: &Array2<f64>| f.row(i).to_vec();
            report.record("d_y2 v1", wall_check(&row(&self.v1), h2, 1));
            report.record("d_y2 v3", wall_check(&row(&self.v3), h2, 1));
            report.record("d_y2^2 v2", wall_check(&row(&self.v2), h2, 2));
            let v2 = row(&self.v2);
            let scale = 1e-12 * (1.0 + max_abs(v2.iter()));
            report.record_value("v2 on walls", v2[0].abs().max(v2[grid.n2 - 1].abs()), scale);
        }
        report.record("v4'", wall_check(&self.v4, h2, 1));
        report.record("v4'''", wall_check(&self.v4, h2, 3));
        report
    }

    /// Wall residuals of the discrete fields using the stencils of the solver.
    pub fn wall_derivatives(&self, grid: &GridQ) -> (f64, f64) {
        let d1 = dy2(&self.v1, grid.h2, Parity::Even);
        let d2 = dy2y2(&self.v2, grid.h2, Parity::Odd);
        let n2 = grid.n2;
        let a = (0..grid.n1).map(|i| d1[[i, 0]].abs().max(d1[[i, n2 - 1]].abs())).fold(0.0, f64::max);
        let b = (0..grid.n1).map(|i| d2[[i, 0]].abs().max(d2[[i, n2 - 1]].abs())).fold(0.0, f64::max);
        (a, b)
    }
}

/// Outcome of a batch of wall-compatibility checks.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct CompatibilityReport {
    pub passed: bool,
    pub checks: usize,
    pub failures: Vec<String>,
    /// Largest observed ratio `|value| / bound`.
    pub worst_ratio: f64,
}

impl CompatibilityReport {
    fn record(&mut self, name: &str, c: crate::field::diff::WallCheck) {
        self.record_value(name, c.worst(), c.bound);
    }

    pub(crate) fn record_value(&mut self, name: &str, value: f64, bound: f64) {
        if self.checks == 0 {
            self.passed = true;
        }
        self.checks += 1;
        let ratio = if bound > 0.0 { value / bound } else if value == 0.0 { 0.0 } else { f64::INFINITY };
        self.worst_ratio = self.worst_ratio.max(ratio);
        if !(value <= bound) {
            self.passed = false;
            if self.failures.len() < 16 {
                self.failures.push(format!("{name}: {value:e} > {bound:e}"));
            }
        }
    }

    pub fn merge(&mut self, other: &CompatibilityReport) {
        if self.checks == 0 {
            *self = other.clone();
            return;
        }
        self.passed &= other.passed || other.checks == 0;
        self.checks += other.checks;
        self.worst_ratio = self.worst_ratio.max(other.worst_ratio);
        self.failures.extend(other.failures.iter().take(16usize.saturating_sub(self.failures.len())).cloned());
    }
}

/// Shape of the exit-pressure perturbation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum ExitProfile {
    /// `cos(k pi (y2 + 1))`.
    Cosine { k: u32 },
    /// Values on the `y2` nodes.
    Samples { values: Vec<f64> },
}

impl Default for ExitProfile {
    fn default() -> Self {
        ExitProfile::Cosine { k: 1 }
    }
}

/// Exit pressure `Pe + epsilon * rho(L1) * Pex_hat(y2)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExitPerturbation {
    pub epsilon: f64,
    pub pex_hat: Vec<f64>,
}

impl ExitPerturbation {
    pub fn new(epsilon: f64, profile: &ExitProfile, grid: &GridQ) -> Result<Self> {
        if !epsilon.is_finite() || epsilon < 0.0 {
            return Err(Error::Config(format!("epsilon must be finite and non-negative, got {epsilon}")));
        }
        let pex_hat = match profile {
            ExitProfile::Cosine { k } => {
                grid.y2.iter().map(|y| (*k as f64 * std::f64::consts::PI * (y + 1.0)).cos()).collect()
            }
            ExitProfile::Samples { values } => {
                if values.len() != grid.n2 {
                    return Err(Error::Config(format!(
                        "exit samples have {} values but the grid has {} y2 nodes",
                        values.len(),
                        grid.n2
                    )));
                }
                values.clone()
            }
        };
        let p = ExitPerturbation { epsilon, pex_hat };
        p.validate(grid)?;
        Ok(p)
    }

    pub fn zero(grid: &GridQ) -> Self {
        ExitPerturbation { epsilon: 0.0, pex_hat: vec![0.0; grid.n2] }
    }

    /// `Pex_hat'(+-1) = 0` to truncation error, and finite bounded second differences.
    pub fn validate(&self, grid: &GridQ) -> Result<()> {
        if self.pex_hat.iter().any(|v| !v.is_finite()) {
            return Err(Error::Config("exit profile contains non-finite values".into()));
        }
        let c = wall_check(&self.pex_hat, grid.h2, 1);
        if !c.holds() {
            return Err(Error::Compatibility(format!(
                "exit profile violates Pex_hat'(+-1) = 0: one-sided slopes ({:e}, {:e}), bound {:e}",
                c.left, c.right, c.bound
            )));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_state_is_compatible() {
        let g = GridQ::new(0.5, 1.0, 9, 9).unwrap();
        let s = PerturbationState::zeros(&g);
        assert_eq!(s.norm(g.h2), 0.0);
        let r = s.compatibility(&g);
        assert!(r.passed && r.checks > 0);
    }

    #[test]
    fn exit_profile_validation() {
        let g = GridQ::new(0.5, 1.0, 33, 33).unwrap();
        assert!(ExitPerturbation::new(1e-3, &ExitProfile::Cosine { k: 2 }, &g).is_ok());
        let bad = ExitProfile::Samples { values: g.y2.iter().map(|y| y.sin()).collect() };
        assert!(matches!(ExitPerturbation::new(1e-3, &bad, &g), Err(Error::Compatibility(_))));
        assert!(ExitPerturbation::new(-1.0, &ExitProfile::default(), &g).is_err());
    }

    #[test]
    fn incompatible_state_detected() {
        let g = GridQ::new(0.5, 1.0, 33, 33).unwrap();
        let mut s = PerturbationState::zeros(&g);
        s.v1 = g.from_fn(|_, y2| 1e-3 * y2);
        assert!(!s.compatibility(&g).passed);
        s.v1 = g.from_fn(|_, y2| 1e-3 * (std::f64::consts::PI * (y2 + 1.0)).cos());
        assert!(s.compatibility(&g).passed);
    }
}
