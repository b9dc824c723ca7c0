//! Coefficients of the linearized shock problem, sampled on the `y1` grid.

use serde::{Deserialize, Serialize};

use crate::background::BackgroundSolution;
use crate::error::{Error, Result};
use crate::gas::FlowState;

/// Derivatives of the downstream state `(rho+, u1+)` at the shock with
/// respect to `(rho-, u-, (u2+)^2)`, taken at the background jump.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct JumpPartials {
    pub d_rho_minus: f64,
    pub d_u_minus: f64,
    pub d_tangential_sq: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearCoefficients {
    pub y1: Vec<f64>,
    pub ls: f64,
    pub l1: f64,
    pub gamma: f64,
    pub mass_flux: f64,
    pub pre: FlowState,
    pub post: FlowState,
    /// Bernoulli constant of the subsonic background.
    pub bernoulli_plus: f64,
    pub b0: f64,
    pub b2: f64,
    pub b3: f64,
    pub u_bar: Vec<f64>,
    pub rho_bar: Vec<f64>,
    pub c2: Vec<f64>,
    pub u_prime: Vec<f64>,
    pub u_second: Vec<f64>,
    pub force: Vec<f64>,
    pub force_prime: Vec<f64>,
    pub big_b1: Vec<f64>,
    pub big_b3: Vec<f64>,
    pub big_b4: Vec<f64>,
    pub lambda: Vec<f64>,
    pub lambda_prime: Vec<f64>,
    pub lambda0: Vec<f64>,
    pub lambda1: Vec<f64>,
    pub lambda2: Vec<f64>,
    pub a0: Vec<f64>,
    pub a1: Vec<f64>,
    pub a2: Vec<f64>,
    pub a3: f64,
    /// Partials of `rho+`.
    pub h1_partials: JumpPartials,
    /// Partials of `u1+`.
    pub h2_partials: JumpPartials,
}

fn certify(name: &'static str, values: &[f64], y1: &[f64], lower: f64) -> Result<()> {
    for (&v, &y) in values.iter().zip(y1) {
        if !(v > lower && v.is_finite()) {
            return Err(Error::CoefficientDegeneracy { name, value: v, y1: y });
        }
    }
    Ok(())
}

impl LinearCoefficients {
    pub fn compute(background: &BackgroundSolution, y1: &[f64]) -> Result<Self> {
        let setup = &background.setup;
        let gas = &setup.gas;
        let force = &setup.force;
        let (ls, l1) = (background.ls, setup.l1);
        let j = background.mass_flux;
        let pre = background.pre_shock();
        let post = background.post_shock();
        let width = l1 - ls;
        if !(width > 0.0) {
            return Err(Error::Domain(format!("shock at the exit (Ls = {ls}) leaves no subsonic region")));
        }
        let p_plus = gas.pressure(post.rho)?;
        let p_minus = gas.pressure(pre.rho)?;
        let c2_plus = gas.sound_speed_sq(post.rho)?;
        let f_ls = force.value(ls);

        let b0 = j / (p_plus - p_minus);
        let b2 = pre.rho * post.u1 * f_ls / (post.rho * (post.u1 * post.u1 - c2_plus));
        let b3 = (pre.rho - post.rho) * f_ls / post.rho;
        if !(b0 > 0.0 && b0.is_finite()) {
            return Err(Error::CoefficientDegeneracy { name: "b0", value: b0, y1: ls });
        }
        if !(b2 < 0.0) {
            return Err(Error::CoefficientDegeneracy { name: "b2", value: b2, y1: ls });
        }

        let n = y1.len();
        let mut c = LinearCoefficients {
            y1: y1.to_vec(),
            ls,
            l1,
            gamma: gas.gamma,
            mass_flux: j,
            pre,
            post,
            bernoulli_plus: background.subsonic_bernoulli(),
            b0,
            b2,
            b3,
            u_bar: Vec::with_capacity(n),
            rho_bar: Vec::with_capacity(n),
            c2: Vec::with_capacity(n),
            u_prime: Vec::with_capacity(n),
            u_second: Vec::with_capacity(n),
            force: Vec::with_capacity(n),
            force_prime: Vec::with_capacity(n),
            big_b1: Vec::with_capacity(n),
            big_b3: Vec::with_capacity(n),
            big_b4: Vec::with_capacity(n),
            lambda: Vec::with_capacity(n),
            lambda_prime: Vec::with_capacity(n),
            lambda0: Vec::with_capacity(n),
            lambda1: Vec::with_capacity(n),
            lambda2: Vec::with_capacity(n),
            a0: Vec::with_capacity(n),
            a1: Vec::with_capacity(n),
            a2: Vec::with_capacity(n),
            a3: 0.0,
            h1_partials: JumpPartials { d_rho_minus: 0.0, d_u_minus: 0.0, d_tangential_sq: 0.0 },
            h2_partials: JumpPartials { d_rho_minus: 0.0, d_u_minus: 0.0, d_tangential_sq: 0.0 },
        };
        let gamma = gas.gamma;
        for &y in y1 {
            let u = if y == ls { post.u1 } else { setup.branch_velocity_at(&background.subsonic, y)? };
            let rho = j / u;
            let c2 = gas.sound_speed_sq(rho)?;
            let f = force.value(y);
            let fp = force.derivative(y);
            let gap = u * u - c2;
            let up = u * f / gap;
            let upp = -(u * u + gamma * c2) / (gap * gap) * up * f + u * fp / gap;
            let s = (l1 - y) / width;
            let b1 = (gamma * u * u + c2) * f / (c2 - u * u);
            let b3c = (gamma - 1.0) * up;
            let b4 = ((gamma - 1.0) * f * (l1 - y) * up - u * f + u * fp * (l1 - y)) / width;
            let lam = s * up + b3 / u;
            let lam_p = -up / width + s * upp - b3 * up / (u * u);
            let lam1 = b1 / (c2 - u * u);
            let lam2 = (b3c * b3 + b4) / (c2 - u * u);
            let lam0 = lam_p + lam1 * lam + lam2;
            c.u_bar.push(u);
            c.rho_bar.push(rho);
            c.c2.push(c2);
            c.u_prime.push(up);
            c.u_second.push(upp);
            c.force.push(f);
            c.force_prime.push(fp);
            c.big_b1.push(b1);
            c.big_b3.push(b3c);
            c.big_b4.push(b4);
            c.lambda.push(lam);
            c.lambda_prime.push(lam_p);
            c.lambda0.push(lam0);
            c.lambda1.push(lam1);
            c.lambda2.push(lam2);
            c.a0.push(-b0 * lam0);
            c.a1.push(lam1);
            c.a2.push(c2 / (c2 - u * u));
        }
        let lambda_ls = post.u1 * f_ls / (post.u1 * post.u1 - c2_plus) + b3 / post.u1;
        c.a3 = b0 * (b2 - lambda_ls);
        certify("a0", &c.a0, y1, 0.0)?;
        certify("a1", &c.a1, y1, 0.0)?;
        certify("a2", &c.a2, y1, 1.0)?;
        if !(c.a3 > 0.0 && c.a3.is_finite()) {
            return Err(Error::CoefficientDegeneracy { name: "a3", value: c.a3, y1: ls });
        }
        let (h1, h2) = rh_boundary_partials(background)?;
        c.h1_partials = h1;
        c.h2_partials = h2;
        Ok(c)
    }

    pub fn len(&self) -> usize {
        self.y1.len()
    }

    pub fn is_empty(&self) -> bool {
        self.y1.is_empty()
    }

    /// Linear interpolation of a sampled profile at an arbitrary `y1`.
    pub fn interpolate(&self, profile: &[f64], y: f64) -> f64 {
        let n = self.y1.len();
        let h = (self.y1[n - 1] - self.y1[0]) / (n - 1) as f64;
        let t = ((y - self.y1[0]) / h).clamp(0.0, (n - 1) as f64);
        let k = (t.floor() as usize).min(n - 2);
        let w = t - k as f64;
        (1.0 - w) * profile[k] + w * profile[k + 1]
    }

    /// Named profiles for tabular output.
    pub fn profiles(&self) -> Vec<(&'static str, &[f64])> {
        vec![
            ("y1", &self.y1),
            ("u_bar", &self.u_bar),
            ("rho_bar", &self.rho_bar),
            ("c2", &self.c2),
            ("B1", &self.big_b1),
            ("B3", &self.big_b3),
            ("B4", &self.big_b4),
            ("lambda", &self.lambda),
            ("lambda0", &self.lambda0),
            ("lambda1", &self.lambda1),
            ("lambda2", &self.lambda2),
            ("a0", &self.a0),
            ("a1", &self.a1),
            ("a2", &self.a2),
        ]
    }
}

/// Partials of `(rho+, u1+)` with respect to the upstream state and the
/// squared downstream tangential velocity at the background shock.
pub fn rh_boundary_partials(background: &BackgroundSolution) -> Result<(JumpPartials, JumpPartials)> {
    let gas = &background.setup.gas;
    let pre = background.pre_shock();
    let post = background.post_shock();
    let dp = gas.pressure(post.rho)? - gas.pressure(pre.rho)?;
    if !(dp > 0.0) {
        return Err(Error::Domain(format!("jump partials need P+ > P-, got P+ - P- = {dp}")));
    }
    let c2m = gas.sound_speed_sq(pre.rho)?;
    let c2p = gas.sound_speed_sq(post.rho)?;
    let (um, up, rm, rp) = (pre.u1, post.u1, pre.rho, post.rho);
    let d = up * up - c2p;
    let h1 = JumpPartials {
        d_rho_minus: (2.0 * um * up - um * um - c2m) / d,
        d_u_minus: 2.0 * rm * (up - um) / d,
        d_tangential_sq: (rp * up).powi(2) / (dp * d),
    };
    let h2 = JumpPartials {
        d_rho_minus: (um - up * h1.d_rho_minus) / rp,
        d_u_minus: (rm - up * h1.d_u_minus) / rp,
        d_tangential_sq: -rp * up * c2p / (dp * d),
    };
    Ok((h1, h2))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::background::{oblique_jump, rh_jump, NozzleSetup};
    use crate::gas::{ForceField, GasModel};

    fn background(gamma: f64, f: f64, ls: f64) -> BackgroundSolution {
        let s = NozzleSetup::new(0.0, 1.0, 1.0, 2.0, GasModel::with_gamma(gamma).unwrap(), ForceField::constant(f, 0.0))
            .unwrap();
        BackgroundSolution::with_shock_at(&s, ls).unwrap()
    }

    fn grid(ls: f64, n: usize) -> Vec<f64> {
        (0..n).map(|i| ls + (1.0 - ls) * i as f64 / (n - 1) as f64).collect()
    }

    #[test]
    fn zero_force_is_degenerate() {
        let bg = background(2.0, 0.0, 0.5);
        assert!(matches!(LinearCoefficients::compute(&bg, &grid(0.5, 17)), Err(Error::CoefficientDegeneracy { .. })));
    }

    #[test]
    fn signs_and_closed_forms() {
        for gamma in [1.4, 2.0] {
            let bg = background(gamma, 0.1, 0.5);
            let c = LinearCoefficients::compute(&bg, &grid(0.5, 33)).unwrap();
            assert!(c.b0 > 0.0 && c.b2 < 0.0 && c.b3 < 0.0);
            for i in 0..c.len() {
                let (u, c2, f) = (c.u_bar[i], c.c2[i], c.force[i]);
                let sub = c2 - u * u;
                let b1_alt = f - (gamma + 1.0) * u * c.u_prime[i];
                assert!((c.big_b1[i] - b1_alt).abs() <= 1e-9 * c.big_b1[i].abs());
                let a0 = -2.0 * c2 * f * c.b0 * c.b3 / (u * sub * sub);
                assert!((c.a0[i] - a0).abs() <= 1e-10 * a0.abs(), "{} {}", c.a0[i], a0);
                let a1 = (gamma * u * u + c2) * f / (sub * sub);
                assert!((c.a1[i] - a1).abs() <= 1e-12 * a1.abs());
                assert!(c.a2[i] > 1.0);
                assert!((c.a0[i] + c.b0 * c.lambda0[i]).abs() == 0.0);
            }
            let (u, c2) = (c.post.u1, c.c2[0]);
            let a3 = c.b0 * c2 * (c.post.rho - c.pre.rho) * 0.1 / (c.post.rho * u * (c2 - u * u));
            assert!((c.a3 - a3).abs() <= 1e-12 * a3);
        }
    }

    #[test]
    fn u_second_matches_differences() {
        let bg = background(1.4, 0.1, 0.3);
        let c = LinearCoefficients::compute(&bg, &grid(0.3, 701)).unwrap();
        let h = c.y1[1] - c.y1[0];
        for i in [100, 350, 600] {
            let fd = (c.u_prime[i + 1] - c.u_prime[i - 1]) / (2.0 * h);
            assert!((fd - c.u_second[i]).abs() <= 1e-6 * c.u_second[i].abs());
            let fd_l = (c.lambda[i + 1] - c.lambda[i - 1]) / (2.0 * h);
            assert!((fd_l - c.lambda_prime[i]).abs() <= 1e-6 * c.lambda_prime[i].abs());
        }
    }

    #[test]
    fn partials_match_exact_jump() {
        let bg = background(1.4, 0.1, 0.5);
        let (h1, h2) = rh_boundary_partials(&bg).unwrap();
        let gas = &bg.setup.gas;
        let pre = bg.pre_shock();
        let e = 1e-6;
        let central = |drho: f64, du: f64| {
            let a = rh_jump(&FlowState { rho: pre.rho + drho, u1: pre.u1 + du, u2: 0.0 }, gas).unwrap();
            let b = rh_jump(&FlowState { rho: pre.rho - drho, u1: pre.u1 - du, u2: 0.0 }, gas).unwrap();
            ((a.rho - b.rho) / (2.0 * e), (a.u1 - b.u1) / (2.0 * e))
        };
        let close = |a: f64, b: f64| (a - b).abs() <= 1e-5 * b.abs();
        let (r, u) = central(e, 0.0);
        assert!(close(r, h1.d_rho_minus) && close(u, h2.d_rho_minus));
        let (r, u) = central(0.0, e);
        assert!(close(r, h1.d_u_minus) && close(u, h2.d_u_minus));
        // (u2+)^2 enters only through t^2, so a forward difference in t^2 is second order in t
        let t2: f64 = 1e-8;
        let a = oblique_jump(&pre, t2.sqrt(), gas).unwrap();
        let post = bg.post_shock();
        assert!(close((a.rho - post.rho) / t2, h1.d_tangential_sq));
        assert!(close((a.u1 - post.u1) / t2, h2.d_tangential_sq));
        assert!(post.u1 * post.u1 < gas.sound_speed_sq(post.rho).unwrap());
    }

    #[test]
    fn interpolation_is_exact_at_nodes() {
        let bg = background(2.0, 0.1, 0.5);
        let c = LinearCoefficients::compute(&bg, &grid(0.5, 17)).unwrap();
        for i in 0..c.len() {
            assert_eq!(c.interpolate(&c.u_bar, c.y1[i]), c.u_bar[i]);
        }
    }
}
