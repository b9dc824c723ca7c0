//! Polytropic isentropic gas closures and the Bernoulli/density algebra.
//!
//! The pressure law is `P(rho) = A rho^gamma`. The enthalpy is
//! `h(rho) = gamma A / (gamma - 1) rho^(gamma - 1)`, so that `c^2 = (gamma - 1) h`
//! independently of `A`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Number of uniform samples used to certify positivity of a force polynomial.
pub const FORCE_POSITIVITY_SAMPLES: usize = 1001;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GasModel {
    pub gamma: f64,
    #[serde(default = "default_entropy_const")]
    pub entropy_const: f64,
}

fn default_entropy_const() -> f64 {
    1.0
}

impl GasModel {
    pub fn new(gamma: f64, entropy_const: f64) -> Result<Self> {
        let gas = GasModel { gamma, entropy_const };
        gas.validate()?;
        Ok(gas)
    }

    /// Gas with `A = 1`.
    pub fn with_gamma(gamma: f64) -> Result<Self> {
        Self::new(gamma, 1.0)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.gamma > 1.0 && self.gamma < 3.0) {
            return Err(Error::Domain(format!(
                "adiabatic exponent gamma = {} must satisfy 1 < gamma < 3",
                self.gamma
            )));
        }
        if !(self.entropy_const > 0.0 && self.entropy_const.is_finite()) {
            return Err(Error::Domain(format!(
                "entropy constant A = {} must be positive",
                self.entropy_const
            )));
        }
        Ok(())
    }

    fn check_density(rho: f64) -> Result<()> {
        if rho > 0.0 && rho.is_finite() {
            Ok(())
        } else {
            Err(Error::Domain(format!("density {rho} must be positive")))
        }
    }

    pub fn pressure(&self, rho: f64) -> Result<f64> {
        Self::check_density(rho)?;
        Ok(self.pressure_unchecked(rho))
    }

    pub fn sound_speed_sq(&self, rho: f64) -> Result<f64> {
        Self::check_density(rho)?;
        Ok(self.sound_speed_sq_unchecked(rho))
    }

    #[inline]
    pub(crate) fn pressure_unchecked(&self, rho: f64) -> f64 {
        self.entropy_const * rho.powf(self.gamma)
    }

    #[inline]
    pub(crate) fn sound_speed_sq_unchecked(&self, rho: f64) -> f64 {
        self.gamma * self.entropy_const * rho.powf(self.gamma - 1.0)
    }

    /// Specific enthalpy `h(rho)`.
    #[inline]
    pub fn enthalpy(&self, rho: f64) -> f64 {
        self.sound_speed_sq_unchecked(rho) / (self.gamma - 1.0)
    }

    /// `B = |u|^2 / 2 + h(rho) - Phi`.
    pub fn bernoulli(&self, state: &FlowState, phi: f64) -> f64 {
        0.5 * state.speed_sq() + self.enthalpy(state.rho) - phi
    }

    /// Inverts [`GasModel::bernoulli`] for the density.
    pub fn density_from_bernoulli(&self, b: f64, phi: f64, speed_sq: f64) -> Result<f64> {
        let radicand = b + phi - 0.5 * speed_sq;
        if !(radicand > 0.0) {
            return Err(Error::Vacuum { radicand });
        }
        let base = (self.gamma - 1.0) / (self.gamma * self.entropy_const) * radicand;
        Ok(base.powf(1.0 / (self.gamma - 1.0)))
    }

    /// Sound speed squared straight from the Bernoulli closure,
    /// `c^2 = (gamma - 1)(B + Phi - |u|^2 / 2)`.
    pub fn sound_speed_sq_from_bernoulli(&self, b: f64, phi: f64, speed_sq: f64) -> Result<f64> {
        let radicand = b + phi - 0.5 * speed_sq;
        if !(radicand > 0.0) {
            return Err(Error::Vacuum { radicand });
        }
        Ok((self.gamma - 1.0) * radicand)
    }

    pub fn mach_sq(&self, state: &FlowState) -> f64 {
        state.speed_sq() / self.sound_speed_sq_unchecked(state.rho)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FlowState {
    pub rho: f64,
    pub u1: f64,
    pub u2: f64,
}

impl FlowState {
    pub fn new(rho: f64, u1: f64, u2: f64) -> Result<Self> {
        GasModel::check_density(rho)?;
        Ok(FlowState { rho, u1, u2 })
    }

    /// Purely axial state.
    pub fn axial(rho: f64, u1: f64) -> Result<Self> {
        Self::new(rho, u1, 0.0)
    }

    #[inline]
    pub fn speed_sq(&self) -> f64 {
        self.u1 * self.u1 + self.u2 * self.u2
    }

    #[inline]
    pub fn mass_flux(&self) -> f64 {
        self.rho * self.u1
    }
}

/// External force `f(x1)` given as power-basis polynomial coefficients,
/// `f(x1) = sum_k coeffs[k] x1^k`, with potential `Phi(x1) = int_{L0}^{x1} f`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ForceField {
    pub coeffs: Vec<f64>,
    /// Gauge point: `Phi(potential_ref) = 0`.
    pub potential_ref: f64,
}

impl ForceField {
    pub fn new(coeffs: Vec<f64>, potential_ref: f64) -> Self {
        ForceField { coeffs, potential_ref }
    }

    pub fn constant(value: f64, potential_ref: f64) -> Self {
        ForceField { coeffs: vec![value], potential_ref }
    }

    pub fn value(&self, x: f64) -> f64 {
        self.coeffs.iter().rev().fold(0.0, |acc, &c| acc * x + c)
    }

    pub fn derivative(&self, x: f64) -> f64 {
        self.coeffs
            .iter()
            .enumerate()
            .skip(1)
            .rev()
            .fold(0.0, |acc, (k, &c)| acc * x + k as f64 * c)
    }

    fn antiderivative(&self, x: f64) -> f64 {
        self.coeffs
            .iter()
            .enumerate()
            .rev()
            .fold(0.0, |acc, (k, &c)| acc * x + c / (k as f64 + 1.0))
            * x
    }

    pub fn potential(&self, x: f64) -> f64 {
        self.antiderivative(x) - self.antiderivative(self.potential_ref)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|&c| c == 0.0)
    }

    /// Checks `f > 0` on [`FORCE_POSITIVITY_SAMPLES`] uniform samples of `[l0, l1]`.
    pub fn validate_positive(&self, l0: f64, l1: f64) -> Result<()> {
        let n = FORCE_POSITIVITY_SAMPLES - 1;
        for k in 0..=n {
            let x = l0 + (l1 - l0) * k as f64 / n as f64;
            let f = self.value(x);
            if !(f > 0.0) {
                return Err(Error::Domain(format!(
                    "external force must be positive on [{l0}, {l1}]: f({x}) = {f}"
                )));
            }
        }
        Ok(())
    }
}
