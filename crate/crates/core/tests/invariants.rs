use proptest::prelude::*;
use shocknozzle::*;

fn flux(s: &FlowState, g: &GasModel) -> (f64, f64) {
    let p = g.pressure(s.rho).unwrap();
    (s.rho * s.u1, s.rho * s.u1 * s.u1 + p)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn normal_jump_conserves_and_compresses(gamma in 1.1..3.0f64, rho in 0.2..5.0f64, mach in 1.05..4.0f64) {
        let g = GasModel::with_gamma(gamma).unwrap();
        let c = g.sound_speed_sq(rho).unwrap().sqrt();
        let up = FlowState::axial(rho, mach * c).unwrap();
        let down = rh_jump(&up, &g).unwrap();
        let (m0, p0) = flux(&up, &g);
        let (m1, p1) = flux(&down, &g);
        prop_assert!((m1 - m0).abs() <= 1e-12 * m0.abs());
        prop_assert!((p1 - p0).abs() <= 1e-12 * p0.abs());
        prop_assert!(down.rho > up.rho);
        prop_assert!(g.mach_sq(&down) < 1.0);
    }

    #[test]
    fn oblique_jump_reduces_to_normal(gamma in 1.1..3.0f64, mach in 1.2..3.0f64, t in -0.05..0.05f64) {
        let g = GasModel::with_gamma(gamma).unwrap();
        let c = g.sound_speed_sq(1.0).unwrap().sqrt();
        let up = FlowState::axial(1.0, mach * c).unwrap();
        let normal = rh_jump(&up, &g).unwrap();
        prop_assert_eq!(oblique_jump(&up, 0.0, &g).unwrap(), normal);
        let ob = oblique_jump(&up, t, &g).unwrap();
        prop_assert_eq!(ob.u2, t);
        prop_assert!((ob.rho - normal.rho).abs() <= 10.0 * t * t * normal.rho + 1e-12);
        prop_assert!(g.pressure(ob.rho).unwrap() > g.pressure(up.rho).unwrap());
    }

    #[test]
    fn exit_pressure_decreases_with_shock_position(f in 0.02..0.3f64, a in 0.05..0.45f64, b in 0.55..0.95f64) {
        let s = NozzleSetup::new(0.0, 1.0, 1.0, 2.0, GasModel::with_gamma(1.4).unwrap(), ForceField::constant(f, 0.0)).unwrap();
        prop_assert!(s.exit_pressure_of_shock(a).unwrap() > s.exit_pressure_of_shock(b).unwrap());
    }

    #[test]
    fn update_shock_is_linear(c1 in -1.0..1.0f64, c2 in -1.0..1.0f64, base in -0.1..0.1f64) {
        let n = 17;
        let h = 2.0 / (n - 1) as f64;
        let y: Vec<f64> = (0..n).map(|j| -1.0 + h * j as f64).collect();
        let a: Vec<f64> = y.iter().map(|t| (std::f64::consts::PI * t).sin()).collect();
        let b: Vec<f64> = y.iter().map(|t| t * t).collect();
        let zero = vec![0.0; n];
        let mix: Vec<f64> = a.iter().zip(&b).map(|(x, z)| c1 * x + c2 * z).collect();
        let lhs = update_shock(&mix, &zero, base, 0.8, h);
        let ua = update_shock(&a, &zero, 0.0, 0.8, h);
        let ub = update_shock(&b, &zero, 0.0, 0.8, h);
        for j in 0..n {
            prop_assert!((lhs[j] - (base + c1 * ua[j] + c2 * ub[j])).abs() < 1e-13);
        }
    }
}
