use num_complex::Complex64;
use proptest::prelude::*;
use semsans_core::beamline::{entanglement_length_semsans, fringe_period, wavelength_to_speed};
use semsans_core::interferometry::{
    divergence_coefficient, fringe_visibility, pair_unitary, uniform_divergence, unitarity_check, Screen,
};
use semsans_core::raytrace::trace_exact;
use semsans_core::refraction::{deflection_first_order, refract_exact};
use semsans_core::spin::{bloch_spinor, bloch_vector};
use semsans_core::textures::{
    bloch_texture, momentum_kicks, oam_lattice_expansion, solve_checkerboard_fields, u_pair, KappaSpec, LatticeFamily,
};
use semsans_core::textures::kicks::resum;
use semsans_core::{BeamlineConfig, Constants, Geometry, NeutronState, PrismPairSpec, Spin};
use std::f64::consts::PI;

fn geometry() -> impl Strategy<Value = Geometry> {
    prop_oneof![Just(Geometry::Parallelogram), Just(Geometry::Triangular)]
}

fn spin() -> impl Strategy<Value = Spin> {
    prop_oneof![Just(Spin::Up), Just(Spin::Down)]
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(f64::MIN_POSITIVE)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn refraction_conserves_tangential_velocity_and_energy(
        theta in -1.4f64..1.4, speed in 100.0f64..3000.0, jump in -2.0f64..2.0, s in spin()
    ) {
        let c = Constants::default();
        let moment = s.moment(&c);
        if let Ok(r) = refract_exact(theta, speed, moment, jump, &c) {
            prop_assert!(rel(speed * theta.sin(), r.speed_out * r.theta_out.sin()) <= 1e-12);
            let before = 0.5 * c.neutron_mass * speed * speed;
            let after = 0.5 * c.neutron_mass * r.speed_out * r.speed_out - moment * jump;
            prop_assert!(rel(before, after) <= 1e-12);
        }
    }

    #[test]
    fn deflection_is_spin_antisymmetric(theta in -1.2f64..1.2, speed in 200.0f64..3000.0, jump in -1.0f64..1.0) {
        prop_assume!(theta.abs() > 1e-3 && jump.abs() > 1e-2);
        let c = Constants::default();
        let (up, down) = (Spin::Up.moment(&c), Spin::Down.moment(&c));
        let first = deflection_first_order(theta, speed, up, jump, &c);
        prop_assert_eq!(first, -deflection_first_order(theta, speed, down, jump, &c));
        let a_up = refract_exact(theta, speed, up, jump, &c).unwrap().deflection(theta);
        let a_down = refract_exact(theta, speed, down, jump, &c).unwrap().deflection(theta);
        // The symmetric remainder is (3 / tan + tan) alpha^2 at second order.
        let t = theta.tan();
        let expected = (3.0 / t + t) * first * first;
        let eps = 2.0 * c.moment_abs() * jump.abs() / (c.neutron_mass * speed * speed);
        prop_assert!((a_up + a_down - expected).abs() <= 10.0 * eps * expected.abs() + 1e-15, "{} {}", a_up + a_down, expected);
    }

    #[test]
    fn exact_traces_are_continuous_and_conserve_energy(
        g in geometry(), y0 in -0.012f64..0.012, phi in -3e-3f64..3e-3, b1 in 0.02f64..0.3, b2 in 0.02f64..0.3
    ) {
        prop_assume!((b1 - b2).abs() > 1e-3);
        let c = Constants::default();
        let spec = PrismPairSpec::new(0.04, 0.2, b1, b2, g);
        let state = NeutronState::from_wavelength(1e-9, &c).unwrap().with_entry(0.0, y0).with_divergence(phi);
        let r = trace_exact(&BeamlineConfig { constants: c, ..BeamlineConfig::single(spec, 1.5) }, &state).unwrap();
        for t in [&r.up, &r.down] {
            let moment = t.spin.moment(&c);
            let energy = |u: f64, b: f64| 0.5 * c.neutron_mass * u * u - moment * b;
            let e0 = energy(state.speed, 0.0);
            for w in t.segments.windows(2) {
                let gap = (0..3).map(|i| (w[0].end[i] - w[1].start[i]).abs()).fold(0.0, f64::max);
                prop_assert!(gap <= 1e-12);
            }
            let mut omega_t = 0.0;
            for s in &t.segments {
                prop_assert!(rel(energy(s.speed(), s.field), e0) <= 1e-12);
                // omega t with omega = hbar k^2 / 2m along each straight piece.
                let k = c.neutron_mass * s.speed() / c.hbar;
                omega_t += c.hbar * k * k / (2.0 * c.neutron_mass) * s.length() / s.speed();
            }
            prop_assert!(rel(omega_t, t.kinetic_phase) <= 1e-12);
        }
    }

    #[test]
    fn pair_operators_are_unitary(
        g in geometry(), b1 in -0.5f64..0.5, b2 in -0.5f64..0.5, y in -0.05f64..0.05, z in -2.0f64..2.0,
        phi in -0.02f64..0.02, lambda in 0.2e-9f64..2e-9
    ) {
        let c = Constants::default();
        let spec = PrismPairSpec::new(0.04, 0.3, b1, b2, g);
        let state = NeutronState::from_wavelength(lambda, &c).unwrap();
        prop_assert!(unitarity_check(pair_unitary(&spec, y, z, phi, &state, &c)) <= 1e-12);
    }

    #[test]
    fn texture_operator_is_unitary_and_periodic(
        kx in 1e3f64..1e5, ky in 1e3f64..1e5, x in -1e-3f64..1e-3, y in -1e-3f64..1e-3,
        theta in 0.0f64..PI, phase in 0.0f64..(2.0 * PI)
    ) {
        prop_assert!(unitarity_check(u_pair(kx, ky, x, y)) <= 1e-12);
        let k = KappaSpec { kappa_y: ky, ..KappaSpec::uniform(kx) };
        let s = bloch_texture(&k, theta, phase, x, y);
        let sx = bloch_texture(&k, theta, phase, x + PI / kx, y);
        let sy = bloch_texture(&k, theta, phase, x, y + PI / ky);
        let n = (s[0] * s[0] + s[1] * s[1] + s[2] * s[2]).sqrt();
        prop_assert!((n - 1.0).abs() <= 1e-9);
        for i in 0..3 {
            prop_assert!((s[i] - sx[i]).abs() <= 1e-9 && (s[i] - sy[i]).abs() <= 1e-9);
        }
    }

    #[test]
    fn polarisation_ignores_global_phase(
        kx in 1e3f64..1e5, x in -1e-3f64..1e-3, y in -1e-3f64..1e-3, theta in 0.0f64..PI, zeta in -10.0f64..10.0
    ) {
        let u = u_pair(kx, 0.7 * kx, x, y);
        let psi = bloch_spinor(theta, 0.3);
        let a = bloch_vector(u.apply(psi));
        let b = bloch_vector(u.scale(Complex64::from_polar(1.0, zeta)).apply(psi));
        for i in 0..3 {
            prop_assert!((a[i] - b[i]).abs() <= 1e-14);
        }
    }

    #[test]
    fn momentum_kicks_resum_to_the_operator(
        kx in 0.0f64..5e4, ky in 0.0f64..5e4, theta in 0.0f64..PI, phase in 0.0f64..(2.0 * PI)
    ) {
        let psi = bloch_spinor(theta, phase);
        let kicks = momentum_kicks(kx, ky, psi);
        for i in 0..6 {
            for j in 0..6 {
                let (x, y) = (i as f64 * 2.1e-5 - 5e-5, j as f64 * 1.7e-5 - 4e-5);
                let a = resum(&kicks, x, y);
                let b = u_pair(kx, ky, x, y).apply(psi);
                prop_assert!((a[0] - b[0]).norm() <= 1e-9 && (a[1] - b[1]).norm() <= 1e-9);
            }
        }
    }

    #[test]
    fn checkerboard_fields_focus_both_pairs(b1 in 0.01f64..0.3, l4 in 0.1f64..0.3, d3 in 0.2f64..0.5, d2 in 0.2f64..0.5, d1 in 0.2f64..0.5) {
        let l = [l4 + d3 + d2 + d1, l4 + d3 + d2, l4 + d3, l4];
        let [b2, b3, b4] = solve_checkerboard_fields(b1, l).unwrap();
        prop_assert!(rel(b1 * l[0], b2 * l[1]) <= 1e-12);
        prop_assert!(rel(b3 * l[2], b4 * l[3]) <= 1e-12);
        prop_assert!(rel((b1 - b2).abs(), (b3 - b4).abs()) <= 1e-12);
    }

    #[test]
    fn fringe_period_matches_gradient(lambda in 0.2e-9f64..2e-9, b1 in -0.3f64..0.3, b2 in -0.3f64..0.3, ls in 0.5f64..10.0) {
        prop_assume!((b1 - b2).abs() > 1e-4);
        let c = Constants::default();
        let speed = wavelength_to_speed(lambda, &c).unwrap();
        let k = KappaSpec::from_fields([b1, b2, b1, b2], Geometry::Parallelogram, 0.0, speed, &c);
        let p = fringe_period(lambda, b1, b2, &c).unwrap();
        prop_assert!(rel(p * k.kappa_y, PI) <= 1e-10);
        prop_assert!(rel(entanglement_length_semsans(lambda, b1, b2, ls, &c), lambda * ls / p) <= 1e-12);
    }
}

#[test]
fn integer_lattice_points_pair_orbital_and_spin_ladders() {
    for m in -2..=2 {
        for n in -2..=2 {
            let e = oam_lattice_expansion(m as f64, n as f64).unwrap();
            assert_eq!(e.family, LatticeFamily::Integer);
            let (p, q) = (e.plus_ladder(), e.minus_ladder());
            for z in [p.identity, p.sigma_z, p.raising, q.identity, q.sigma_z, q.lowering] {
                assert!(z.norm() < 1e-15);
            }
            assert!(p.lowering.norm() > 0.5 && q.raising.norm() > 0.5);
        }
    }
}

#[test]
fn full_visibility_exactly_where_divergence_drops_out() {
    let c = Constants::default();
    let state = NeutronState::from_wavelength(1e-9, &c).unwrap();
    let dist = uniform_divergence(5e-3, 101);
    for g in [Geometry::Parallelogram, Geometry::Triangular] {
        for (b1, b2) in [(0.1, 0.15), (0.2, 0.05), (-0.1, 0.12)] {
            let spec = PrismPairSpec::new(0.04, 0.36, b1, b2, g);
            let screen = Screen::FocusingPlane { offset: 0.0 };
            for y in [-3e-3, 0.0, 4e-3] {
                let z = screen.z_at(&spec, y).unwrap();
                assert!(divergence_coefficient(&spec, y, z, &state, &c).abs() < 1e-6);
            }
            let v = fringe_visibility(&spec, screen, &dist, &state, &c).unwrap().visibility;
            assert!((v - 1.0).abs() <= 1e-9, "{g:?} {b1} {b2}: {v}");
            let z_off = spec.focal_distance().unwrap() + 0.05;
            let v_off = fringe_visibility(&spec, Screen::Vertical { z: z_off }, &dist, &state, &c).unwrap().visibility;
            assert!(divergence_coefficient(&spec, 0.0, z_off, &state, &c).abs() > 1.0);
            assert!(v_off < 1.0 - 1e-6, "{v_off}");
        }
    }
}
