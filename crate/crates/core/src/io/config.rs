//! TOML run configuration.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::background::{NozzleSetup, ShootingOptions};
use crate::error::{Error, Result};
use crate::field::GridQ;
use crate::gas::{ForceField, GasModel};
use crate::iteration::IterationOptions;
use crate::state::{ExitPerturbation, ExitProfile};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GasSection {
    pub gamma: f64,
    #[serde(default = "one")]
    pub entropy_const: f64,
}

fn one() -> f64 {
    1.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NozzleSection {
    pub l0: f64,
    pub l1: f64,
    pub rho0: f64,
    pub u0: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ForceSection {
    /// Polynomial coefficients of `f(x1)` in increasing degree.
    pub coeffs: Vec<f64>,
    #[serde(default)]
    pub potential_ref: f64,
}

/// Exit condition: either a pressure `pe` or a shock position `ls`, plus the perturbation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExitSection {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pe: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ls: Option<f64>,
    #[serde(default)]
    pub epsilon: f64,
    #[serde(default)]
    pub profile: ExitProfile,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSection {
    pub n1: usize,
    pub n2: usize,
}

impl Default for GridSection {
    fn default() -> Self {
        GridSection { n1: 65, n2: 65 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    pub dir: PathBuf,
}

impl Default for OutputSection {
    fn default() -> Self {
        OutputSection { dir: PathBuf::from("out") }
    }
}

/// A sweep parameter: explicit values or `count` evenly spaced points.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ParamRange {
    Values(Vec<f64>),
    Linspace { from: f64, to: f64, count: usize },
}

impl ParamRange {
    pub fn values(&self) -> Vec<f64> {
        match self {
            ParamRange::Values(v) => v.clone(),
            ParamRange::Linspace { count: 0, .. } => Vec::new(),
            ParamRange::Linspace { from, count: 1, .. } => vec![*from],
            ParamRange::Linspace { from, to, count } => {
                (0..*count).map(|k| from + (to - from) * k as f64 / (*count - 1) as f64).collect()
            }
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSection {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ls: Option<ParamRange>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub epsilon: Option<ParamRange>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverConfig {
    pub gas: GasSection,
    pub nozzle: NozzleSection,
    pub force: ForceSection,
    pub exit: ExitSection,
    #[serde(default)]
    pub grid: GridSection,
    #[serde(default)]
    pub shooting: ShootingOptions,
    #[serde(default)]
    pub iteration: IterationOptions,
    #[serde(default)]
    pub output: OutputSection,
    #[serde(default)]
    pub sweep: SweepSection,
}

/// 1-based line and column of a byte offset.
fn line_col(text: &str, offset: usize) -> (usize, usize) {
    let before = &text[..offset.min(text.len())];
    let line = before.matches('\n').count() + 1;
    let col = before.len() - before.rfind('\n').map_or(0, |p| p + 1) + 1;
    (line, col)
}

fn check(ok: bool, key: &str, msg: impl std::fmt::Display) -> Result<()> {
    if ok {
        Ok(())
    } else {
        Err(Error::Config(format!("{key}: {msg}")))
    }
}

impl SolverConfig {
    pub fn from_toml_str(text: &str, origin: &Path) -> Result<Self> {
        let cfg: SolverConfig = toml::from_str(text).map_err(|e| {
            let offset = e.span().map_or(0, |s| s.start);
            let (line, col) = line_col(text, offset);
            Error::Config(format!(
                "{}:{line}:{col} (byte {offset}): {}",
                origin.display(),
                e.message().trim_end()
            ))
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml_str(&text, path)
    }

    pub fn to_toml_string(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Internal(format!("config serialization failed: {e}")))
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_toml_string()?).map_err(|e| Error::io(path, e))
    }

    pub fn gas(&self) -> Result<GasModel> {
        GasModel::new(self.gas.gamma, self.gas.entropy_const)
    }

    pub fn setup(&self) -> Result<NozzleSetup> {
        let n = &self.nozzle;
        let force = ForceField::new(self.force.coeffs.clone(), self.force.potential_ref);
        Ok(NozzleSetup::new(n.l0, n.l1, n.rho0, n.u0, self.gas()?, force)?.with_options(self.shooting))
    }

    pub fn exit_perturbation(&self, grid: &GridQ) -> Result<ExitPerturbation> {
        ExitPerturbation::new(self.exit.epsilon, &self.exit.profile, grid)
    }

    /// Checks every precondition that does not need a solve.
    pub fn validate(&self) -> Result<()> {
        let finite = |v: f64| v.is_finite();
        check(finite(self.gas.gamma) && self.gas.gamma > 1.0, "gas.gamma", "must be finite and > 1")?;
        check(finite(self.gas.entropy_const) && self.gas.entropy_const > 0.0, "gas.entropy_const", "must be > 0")?;
        let n = &self.nozzle;
        check(finite(n.l0) && finite(n.l1) && n.l0 < n.l1, "nozzle", "need finite l0 < l1")?;
        check(finite(n.rho0) && n.rho0 > 0.0, "nozzle.rho0", "must be > 0")?;
        check(finite(n.u0) && n.u0 > 0.0, "nozzle.u0", "must be > 0")?;
        check(!self.force.coeffs.is_empty(), "force.coeffs", "needs at least one coefficient")?;
        check(self.force.coeffs.iter().all(|c| c.is_finite()), "force.coeffs", "must be finite")?;
        check(finite(self.force.potential_ref), "force.potential_ref", "must be finite")?;
        let e = &self.exit;
        check(e.pe.is_none() || e.ls.is_none(), "exit", "give either pe or ls, not both")?;
        if let Some(pe) = e.pe {
            check(finite(pe) && pe > 0.0, "exit.pe", "must be > 0")?;
        }
        if let Some(ls) = e.ls {
            check(finite(ls) && ls > n.l0 && ls < n.l1, "exit.ls", format!("must lie in ({}, {})", n.l0, n.l1))?;
        }
        check(finite(e.epsilon) && e.epsilon >= 0.0, "exit.epsilon", "must be finite and >= 0")?;
        if let ExitProfile::Samples { values } = &e.profile {
            check(values.len() == self.grid.n2, "exit.profile.values", format!("needs n2 = {} samples", self.grid.n2))?;
            check(values.iter().all(|v| v.is_finite()), "exit.profile.values", "must be finite")?;
        }
        check(self.grid.n1 >= 9 && self.grid.n2 >= 9, "grid", "n1 and n2 must be >= 9")?;
        let s = &self.shooting;
        check(s.steps >= 2, "shooting.steps", "must be >= 2")?;
        check(finite(s.tol_shoot) && s.tol_shoot > 0.0, "shooting.tol_shoot", "must be > 0")?;
        check(finite(s.sonic_guard) && s.sonic_guard > 0.0, "shooting.sonic_guard", "must be > 0")?;
        if let Some(d) = s.delta0 {
            check(finite(d) && d > 0.0, "shooting.delta0", "must be > 0")?;
        }
        let it = &self.iteration;
        check(finite(it.tol_fp) && it.tol_fp > 0.0, "iteration.tol_fp", "must be > 0")?;
        check(it.max_iter >= 1, "iteration.max_iter", "must be >= 1")?;
        check(finite(it.epsilon_max) && it.epsilon_max > 0.0, "iteration.epsilon_max", "must be > 0")?;
        check(e.epsilon <= it.epsilon_max, "exit.epsilon", format!("exceeds iteration.epsilon_max = {}", it.epsilon_max))?;
        for (key, r) in [("sweep.ls", &self.sweep.ls), ("sweep.epsilon", &self.sweep.epsilon)] {
            if let Some(r) = r {
                check(r.values().iter().all(|v| v.is_finite()), key, "values must be finite")?;
            }
        }
        self.setup()?;
        Ok(())
    }
}
