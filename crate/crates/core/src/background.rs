//! One-dimensional transonic shock background.
//!
//! Along each smooth branch the mass flux `J = rho u` is constant and the
//! velocity obeys `u' = u f / (u^2 - c^2(J/u))`. A normal shock at `x1 = Ls`
//! jumps from the supersonic to the subsonic root of the momentum flux
//! `m(rho) = J^2/rho + A rho^gamma`. With `f > 0` the exit pressure is a
//! strictly decreasing function of `Ls`, which makes the shooting problem a
//! plain bisection.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gas::{FlowState, ForceField, GasModel};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ShootingOptions {
    /// Fixed RK4 step count per branch.
    pub steps: usize,
    /// Abort when `|u^2 - c^2| < sonic_guard * c^2(rho0)`.
    pub sonic_guard: f64,
    /// Pressure tolerance of the shock-position bisection.
    pub tol_shoot: f64,
    pub max_bisection: usize,
    /// Width of the backward subsonic extension; `None` selects the default.
    pub delta0: Option<f64>,
}

impl Default for ShootingOptions {
    fn default() -> Self {
        ShootingOptions { steps: 2000, sonic_guard: 1e-8, tol_shoot: 1e-10, max_bisection: 200, delta0: None }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NozzleSetup {
    pub l0: f64,
    pub l1: f64,
    pub rho0: f64,
    pub u0: f64,
    pub gas: GasModel,
    pub force: ForceField,
    #[serde(default)]
    pub options: ShootingOptions,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Regime {
    Supersonic,
    Subsonic,
}

/// Samples of one smooth branch, stored on an ascending grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolutionBranch {
    pub grid: Vec<f64>,
    pub u: Vec<f64>,
    pub rho: Vec<f64>,
    pub regime: Regime,
}

impl SolutionBranch {
    pub fn len(&self) -> usize {
        self.grid.len()
    }

    pub fn is_empty(&self) -> bool {
        self.grid.is_empty()
    }

    pub fn first_state(&self) -> FlowState {
        FlowState { rho: self.rho[0], u1: self.u[0], u2: 0.0 }
    }

    pub fn last_state(&self) -> FlowState {
        let n = self.len() - 1;
        FlowState { rho: self.rho[n], u1: self.u[n], u2: 0.0 }
    }

    pub fn mass_flux(&self) -> f64 {
        self.rho[0] * self.u[0]
    }

    pub fn start(&self) -> f64 {
        self.grid[0]
    }

    pub fn end(&self) -> f64 {
        self.grid[self.len() - 1]
    }

    /// Index of the stored node nearest to `x`.
    fn nearest_node(&self, x: f64) -> usize {
        let idx = self.grid.partition_point(|&g| g < x);
        if idx == 0 {
            0
        } else if idx >= self.len() {
            self.len() - 1
        } else if (x - self.grid[idx - 1]) <= (self.grid[idx] - x) {
            idx - 1
        } else {
            idx
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PressureWindow {
    /// Exit pressure with the shock at the exit, `Ls -> L1`.
    pub p1: f64,
    /// Exit pressure with the shock at the inlet, `Ls -> L0`.
    pub p0: f64,
}

impl PressureWindow {
    pub fn contains(&self, pe: f64) -> bool {
        pe > self.p1 && pe < self.p0
    }
}

/// The assembled 1D transonic shock solution.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BackgroundSolution {
    pub setup: NozzleSetup,
    pub supersonic: SolutionBranch,
    pub subsonic: SolutionBranch,
    pub ls: f64,
    pub mass_flux: f64,
    /// Exit pressure realised by this shock position.
    pub exit_pressure: f64,
    /// Subsonic branch continued backward to `Ls - delta0`.
    pub extension: SolutionBranch,
    pub delta0: f64,
}

impl NozzleSetup {
    pub fn new(l0: f64, l1: f64, rho0: f64, u0: f64, gas: GasModel, force: ForceField) -> Result<Self> {
        let setup = NozzleSetup { l0, l1, rho0, u0, gas, force, options: ShootingOptions::default() };
        setup.validate()?;
        Ok(setup)
    }

    pub fn with_options(mut self, options: ShootingOptions) -> Self {
        self.options = options;
        self
    }

    pub fn validate(&self) -> Result<()> {
        self.gas.validate()?;
        if !(self.l0 < self.l1) {
            return Err(Error::Domain(format!("nozzle requires L0 < L1, got [{}, {}]", self.l0, self.l1)));
        }
        if !(self.rho0 > 0.0 && self.u0 > 0.0) {
            return Err(Error::Domain(format!(
                "inlet state must have rho0 > 0 and u0 > 0, got ({}, {})",
                self.rho0, self.u0
            )));
        }
        let c2 = self.gas.sound_speed_sq_unchecked(self.rho0);
        if !(self.u0 * self.u0 > c2) {
            return Err(Error::Domain(format!(
                "inlet must be supersonic: u0^2 = {} <= c^2(rho0) = {}",
                self.u0 * self.u0,
                c2
            )));
        }
        if self.options.steps == 0 {
            return Err(Error::Domain("branch step count must be positive".into()));
        }
        Ok(())
    }

    pub fn mass_flux(&self) -> f64 {
        self.rho0 * self.u0
    }

    pub fn inlet_state(&self) -> FlowState {
        FlowState { rho: self.rho0, u1: self.u0, u2: 0.0 }
    }

    fn guard(&self) -> f64 {
        self.options.sonic_guard * self.gas.sound_speed_sq_unchecked(self.rho0)
    }

    /// Right-hand side `u' = u f / (u^2 - c^2(J/u))` with the sonic guard.
    pub fn velocity_slope(&self, x: f64, u: f64, mass_flux: f64) -> Result<f64> {
        let c2 = self.gas.sound_speed_sq_unchecked(mass_flux / u);
        let gap = u * u - c2;
        let guard = self.guard();
        if !(gap.abs() >= guard) {
            return Err(Error::SonicDegeneracy { x, gap: gap.abs(), guard });
        }
        Ok(u * self.force.value(x) / gap)
    }

    fn rk4_step(&self, x: f64, u: f64, h: f64, j: f64) -> Result<f64> {
        let k1 = self.velocity_slope(x, u, j)?;
        let k2 = self.velocity_slope(x + 0.5 * h, u + 0.5 * h * k1, j)?;
        let k3 = self.velocity_slope(x + 0.5 * h, u + 0.5 * h * k2, j)?;
        let k4 = self.velocity_slope(x + h, u + h * k3, j)?;
        Ok(u + h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4))
    }

    /// Integrates `u` from `from` to `to` (either direction) with `steps` RK4 steps.
    pub fn integrate_branch_with_steps(
        &self,
        start: FlowState,
        from: f64,
        to: f64,
        steps: usize,
    ) -> Result<SolutionBranch> {
        let j = start.mass_flux();
        let regime = if self.gas.mach_sq(&start) > 1.0 { Regime::Supersonic } else { Regime::Subsonic };
        let n = if from == to { 0 } else { steps.max(1) };
        let mut grid = Vec::with_capacity(n + 1);
        let mut u = Vec::with_capacity(n + 1);
        grid.push(from);
        u.push(start.u1);
        // a single evaluation screens a sonic start even when the interval is empty
        self.velocity_slope(from, start.u1, j)?;
        let h = if n == 0 { 0.0 } else { (to - from) / n as f64 };
        let mut uk = start.u1;
        for k in 0..n {
            let xk = from + h * k as f64;
            uk = self.rk4_step(xk, uk, h, j)?;
            let xn = if k + 1 == n { to } else { from + h * (k + 1) as f64 };
            grid.push(xn);
            u.push(uk);
        }
        if to < from {
            grid.reverse();
            u.reverse();
        }
        let rho: Vec<f64> = u.iter().map(|&v| j / v).collect();
        Ok(SolutionBranch { grid, u, rho, regime })
    }

    pub fn integrate_branch(&self, start: FlowState, from: f64, to: f64) -> Result<SolutionBranch> {
        self.integrate_branch_with_steps(start, from, to, self.options.steps)
    }

    /// Dense evaluation of a branch: RK4 restarted from the nearest stored node.
    /// Points outside the branch are reached by continuing the ODE.
    pub fn branch_velocity_at(&self, branch: &SolutionBranch, x: f64) -> Result<f64> {
        let k = branch.nearest_node(x);
        let x0 = branch.grid[k];
        let dx = x - x0;
        if dx == 0.0 {
            return Ok(branch.u[k]);
        }
        let j = branch.mass_flux();
        let nominal = if branch.len() > 1 {
            (branch.end() - branch.start()) / (branch.len() - 1) as f64
        } else {
            (self.l1 - self.l0) / self.options.steps as f64
        };
        let sub = ((dx.abs() / nominal).ceil() as usize).max(1);
        let h = dx / sub as f64;
        let mut u = branch.u[k];
        for s in 0..sub {
            u = self.rk4_step(x0 + h * s as f64, u, h, j)?;
        }
        Ok(u)
    }

    /// Both branches of a shock placed at `ls`.
    pub fn shock_profile(&self, ls: f64) -> Result<(SolutionBranch, SolutionBranch)> {
        if !(ls >= self.l0 && ls <= self.l1) {
            return Err(Error::Domain(format!("shock position {ls} outside [{}, {}]", self.l0, self.l1)));
        }
        let sup = self.integrate_branch(self.inlet_state(), self.l0, ls)?;
        let post = rh_jump(&sup.last_state(), &self.gas)?;
        let sub = self.integrate_branch(post, ls, self.l1)?;
        Ok((sup, sub))
    }

    pub fn exit_pressure_of_shock(&self, ls: f64) -> Result<f64> {
        let (_, sub) = self.shock_profile(ls)?;
        self.gas.pressure(sub.last_state().rho)
    }

    pub fn pressure_window(&self) -> Result<PressureWindow> {
        let p1 = self.exit_pressure_of_shock(self.l1)?;
        let p0 = self.exit_pressure_of_shock(self.l0)?;
        if (p0 - p1).abs() <= 1e-12 * p0.abs().max(p1.abs()) {
            return Err(Error::DegenerateWindow { pressure: p0 });
        }
        if p0 <= p1 {
            return Err(Error::MonotonicityViolated { p0, p1 });
        }
        Ok(PressureWindow { p1, p0 })
    }

    /// Shooting inversion of the exit-pressure map by bisection on `Ls`.
    pub fn solve_shock_position(&self, pe: f64) -> Result<BackgroundSolution> {
        let window = self.pressure_window()?;
        if !window.contains(pe) {
            return Err(Error::NoTransonicShock { pe, p1: window.p1, p0: window.p0 });
        }
        // exit pressure decreases with Ls: P(lo) > pe > P(hi)
        let (mut lo, mut hi) = (self.l0, self.l1);
        let mut best = (f64::INFINITY, 0.5 * (lo + hi));
        for _ in 0..self.options.max_bisection {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            let p = self.exit_pressure_of_shock(mid)?;
            let r = (p - pe).abs();
            if r < best.0 {
                best = (r, mid);
            }
            if r == 0.0 {
                break;
            }
            if p > pe {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        if best.0 > self.options.tol_shoot {
            return Err(Error::Internal(format!(
                "shooting stalled: |Pe(Ls) - Pe| = {:e} > tol {:e}",
                best.0, self.options.tol_shoot
            )));
        }
        BackgroundSolution::with_shock_at(self, best.1)
    }

    /// `d rho+(L1) / d Ls` from the closed form of the Bernoulli balance.
    pub fn monotonicity_derivative(&self, ls: f64) -> Result<f64> {
        let (sup, sub) = self.shock_profile(ls)?;
        let j = self.mass_flux();
        let u_minus = sup.last_state().u1;
        let u_plus = sub.first_state().u1;
        let rho_exit = sub.last_state().rho;
        let integrand = self.force.value(ls) * (u_plus - u_minus) / u_minus;
        let g = &self.gas;
        let coeff = g.gamma * g.entropy_const * rho_exit.powf(g.gamma - 2.0) - j * j / rho_exit.powi(3);
        Ok(integrand / coeff)
    }

    /// Default extension width: a tenth of the nozzle, capped at half the supersonic length.
    pub fn default_delta0(&self, ls: f64) -> f64 {
        (0.1 * (self.l1 - self.l0)).min(0.5 * (ls - self.l0))
    }
}

/// Normal-shock jump of a supersonic upstream state.
///
/// Returns the subsonic root `rho+ > rho-` of `J^2/rho + A rho^gamma = m(rho-)`.
/// A sonic upstream state is returned unchanged.
pub fn rh_jump(upstream: &FlowState, gas: &GasModel) -> Result<FlowState> {
    if !(upstream.rho > 0.0 && upstream.u1 > 0.0) {
        return Err(Error::Domain(format!("rh_jump needs rho > 0 and u1 > 0, got {upstream:?}")));
    }
    let m2 = gas.mach_sq(&FlowState { u2: 0.0, ..*upstream });
    if (m2 - 1.0).abs() <= 1e-12 {
        return Ok(FlowState { u2: 0.0, ..*upstream });
    }
    if m2 < 1.0 {
        return Err(Error::Domain(format!("rh_jump needs a supersonic upstream state, M^2 = {m2}")));
    }
    let j = upstream.mass_flux();
    let a = gas.entropy_const;
    let momentum = |rho: f64| j * j / rho + a * rho.powf(gas.gamma);
    let target = momentum(upstream.rho);
    // m is convex with its minimum at the sonic density
    let rho_sonic = (j * j / (gas.gamma * a)).powf(1.0 / (gas.gamma + 1.0));
    let mut lo = rho_sonic.max(upstream.rho);
    let mut hi = 2.0 * lo;
    let mut expansions = 0;
    while momentum(hi) <= target {
        hi *= 2.0;
        expansions += 1;
        if expansions > 200 {
            return Err(Error::Internal("rh_jump: failed to bracket the subsonic root".into()));
        }
    }
    if momentum(lo) >= target {
        return Err(Error::Internal("rh_jump: sonic density does not bracket the root".into()));
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi || (hi - lo) <= 1e-15 * hi {
            break;
        }
        if momentum(mid) < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let rho = if (momentum(lo) - target).abs() <= (momentum(hi) - target).abs() { lo } else { hi };
    Ok(FlowState { rho, u1: j / rho, u2: 0.0 })
}

/// Oblique jump: downstream `(rho, u1)` behind a shock whose upstream state is
/// axial and whose downstream tangential velocity is `t`.
///
/// Solves `[rho u1] = [rho u2][rho u1 u2]/[rho u2^2 + P]` and
/// `[rho u1^2 + P] = [rho u1 u2]^2/[rho u2^2 + P]` by Newton's method started
/// from the normal jump. `t == 0` reduces to [`rh_jump`] exactly.
pub fn oblique_jump(upstream: &FlowState, t: f64, gas: &GasModel) -> Result<FlowState> {
    let normal = rh_jump(upstream, gas)?;
    if t == 0.0 {
        return Ok(normal);
    }
    let j = upstream.rho * upstream.u1;
    let p_minus = gas.pressure_unchecked(upstream.rho);
    let m_minus = j * upstream.u1 + p_minus;
    let t2 = t * t;
    let residual = |rho: f64, u1: f64| {
        let p = gas.pressure_unchecked(rho);
        let dp = p - p_minus;
        let tang = rho * t2 + dp;
        (rho * u1 * dp - j * tang, rho * u1 * u1 * dp + (p - m_minus) * tang)
    };
    let (mut rho, mut u1) = (normal.rho, normal.u1);
    let scale = m_minus * (gas.pressure_unchecked(normal.rho) - p_minus);
    for _ in 0..50 {
        let p = gas.pressure_unchecked(rho);
        let dp_drho = gas.sound_speed_sq_unchecked(rho);
        let dp = p - p_minus;
        let tang = rho * t2 + dp;
        let (fa, fb) = residual(rho, u1);
        let a11 = u1 * dp + rho * u1 * dp_drho - j * (t2 + dp_drho);
        let a12 = rho * dp;
        let a21 = u1 * u1 * dp + rho * u1 * u1 * dp_drho + dp_drho * tang + (p - m_minus) * (t2 + dp_drho);
        let a22 = 2.0 * rho * u1 * dp;
        let det = a11 * a22 - a12 * a21;
        if !(det.abs() > 0.0) || !det.is_finite() {
            return Err(Error::HatTooLarge(format!("singular oblique jump Jacobian at t = {t}")));
        }
        let drho = (fa * a22 - fb * a12) / det;
        let du = (a11 * fb - a21 * fa) / det;
        rho -= drho;
        u1 -= du;
        if !(rho > 0.0 && u1 > 0.0) {
            return Err(Error::HatTooLarge(format!("oblique jump left the admissible range at t = {t}")));
        }
        if drho.abs() <= 1e-15 * rho && du.abs() <= 1e-15 * u1.abs() {
            break;
        }
    }
    let (fa, fb) = residual(rho, u1);
    if !(fa.abs().max(fb.abs()) <= 1e-10 * scale.abs().max(1.0)) {
        return Err(Error::HatTooLarge(format!("oblique jump did not converge at t = {t}")));
    }
    if !(gas.pressure_unchecked(rho) > p_minus) {
        return Err(Error::HatTooLarge(format!("oblique jump violates P+ > P- at t = {t}")));
    }
    Ok(FlowState { rho, u1, u2: t })
}

impl BackgroundSolution {
    /// Background with the shock placed at `ls` (no shooting).
    pub fn with_shock_at(setup: &NozzleSetup, ls: f64) -> Result<Self> {
        Self::with_shock_and_delta(setup, ls, setup.options.delta0)
    }

    pub fn with_shock_and_delta(setup: &NozzleSetup, ls: f64, delta0: Option<f64>) -> Result<Self> {
        let (supersonic, subsonic) = setup.shock_profile(ls)?;
        let exit_pressure = setup.gas.pressure(subsonic.last_state().rho)?;
        let delta0 = delta0.unwrap_or_else(|| setup.default_delta0(ls));
        let mut bg = BackgroundSolution {
            setup: setup.clone(),
            extension: subsonic.clone(),
            supersonic,
            subsonic,
            ls,
            mass_flux: setup.mass_flux(),
            exit_pressure,
            delta0,
        };
        bg.extension = bg.extend_subsonic(delta0)?;
        Ok(bg)
    }

    pub fn pre_shock(&self) -> FlowState {
        self.supersonic.last_state()
    }

    pub fn post_shock(&self) -> FlowState {
        self.subsonic.first_state()
    }

    /// Bernoulli constant of the subsonic branch.
    pub fn subsonic_bernoulli(&self) -> f64 {
        let s = self.post_shock();
        self.setup.gas.bernoulli(&s, self.setup.force.potential(self.ls))
    }

    /// Backward continuation of the subsonic branch to `Ls - delta0`.
    pub fn extend_subsonic(&self, delta0: f64) -> Result<SolutionBranch> {
        if delta0 == 0.0 {
            return Ok(self.subsonic.clone());
        }
        let start = self.ls - delta0;
        if !(delta0 > 0.0 && start > self.setup.l0) {
            return Err(Error::Domain(format!(
                "extension width delta0 = {delta0} must satisfy 0 < delta0 < Ls - L0 = {}",
                self.ls - self.setup.l0
            )));
        }
        let h = (self.setup.l1 - self.ls) / self.setup.options.steps as f64;
        let steps = ((delta0 / h).ceil() as usize).max(1);
        let back = self
            .setup
            .integrate_branch_with_steps(self.post_shock(), self.ls, start, steps)
            .map_err(|e| match e {
                Error::SonicDegeneracy { x, .. } => Error::Domain(format!(
                    "subsonic extension reached the sonic line at x1 = {x}; shrink delta0 (currently {delta0})"
                )),
                other => other,
            })?;
        let mut ext = back;
        ext.grid.pop();
        ext.u.pop();
        ext.rho.pop();
        ext.grid.extend_from_slice(&self.subsonic.grid);
        ext.u.extend_from_slice(&self.subsonic.u);
        ext.rho.extend_from_slice(&self.subsonic.rho);
        ext.regime = Regime::Subsonic;
        Ok(ext)
    }

    /// Upstream supersonic state at any `x` in the nozzle; beyond `Ls` the
    /// supersonic ODE is simply continued.
    pub fn supersonic_state_at(&self, x: f64) -> Result<FlowState> {
        let u = self.setup.branch_velocity_at(&self.supersonic, x)?;
        Ok(FlowState { rho: self.mass_flux / u, u1: u, u2: 0.0 })
    }

    /// Subsonic background state at `x`, using the extension below `Ls`.
    pub fn subsonic_state_at(&self, x: f64) -> Result<FlowState> {
        let branch = if x < self.ls { &self.extension } else { &self.subsonic };
        let u = self.setup.branch_velocity_at(branch, x)?;
        Ok(FlowState { rho: self.mass_flux / u, u1: u, u2: 0.0 })
    }

    /// Residuals `([rho u], [rho u^2 + P])` of the jump at `Ls`.
    pub fn rh_residuals(&self) -> (f64, f64) {
        let g = &self.setup.gas;
        let (m, p) = (self.pre_shock(), self.post_shock());
        let mass = p.rho * p.u1 - m.rho * m.u1;
        let mom = p.rho * p.u1 * p.u1 + g.pressure_unchecked(p.rho) - m.rho * m.u1 * m.u1 - g.pressure_unchecked(m.rho);
        (mass, mom)
    }
}
