//! Seeded invariant checks behind `semsans validate`.

use crate::config::RunConfig;
use crate::output::{Column, Table};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use semsans_core::interferometry::{fringe_visibility, pair_unitary, uniform_divergence, unitarity_check, Screen};
use semsans_core::raytrace::trace_exact;
use semsans_core::refraction::{deflection_first_order, refract_exact};
use semsans_core::spin::bloch_spinor;
use semsans_core::textures::kicks::resum;
use semsans_core::textures::{bloch_texture, momentum_kicks, solve_checkerboard_fields, u_pair, KappaSpec};
use semsans_core::{BeamlineConfig, Constants, Geometry, NeutronState, PrismPairSpec, Spin};
use std::collections::BTreeMap;
use std::f64::consts::PI;

const SAMPLES: usize = 200;

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: &'static str,
    pub samples: usize,
    /// Largest deviation seen; infinite when a sample errored.
    pub max_error: f64,
    pub tolerance: f64,
}

impl Check {
    pub fn passed(&self) -> bool {
        self.max_error <= self.tolerance
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub checks: Vec<Check>,
}

impl Outcome {
    pub fn failures(&self) -> usize {
        self.checks.iter().filter(|c| !c.passed()).count()
    }

    pub fn report(&self) -> (Table, BTreeMap<String, String>) {
        let mut table = Table::new(vec![
            Column::new("check", "1"),
            Column::new("samples", "1"),
            Column::new("max_error", "1"),
            Column::new("tolerance", "1"),
            Column::new("passed", "1"),
        ]);
        let mut summary = BTreeMap::new();
        for (i, c) in self.checks.iter().enumerate() {
            table.push(vec![(i + 1) as f64, c.samples as f64, c.max_error, c.tolerance, f64::from(u8::from(c.passed()))]);
            let verdict = if c.passed() { "PASS" } else { "FAIL" };
            summary.insert(format!("{:02}_{}", i + 1, c.name), format!("{verdict} {:.3e} <= {:.1e}", c.max_error, c.tolerance));
        }
        summary.insert("failed".into(), self.failures().to_string());
        (table, summary)
    }
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(f64::MIN_POSITIVE)
}

fn check(name: &'static str, tolerance: f64, samples: usize, mut f: impl FnMut(usize) -> Option<f64>) -> Check {
    let mut max_error: f64 = 0.0;
    for i in 0..samples {
        let e = f(i).unwrap_or(f64::INFINITY);
        max_error = if e.is_nan() { f64::INFINITY } else { max_error.max(e) };
    }
    Check { name, samples, max_error, tolerance }
}

fn reference_pair(cfg: &RunConfig) -> PrismPairSpec {
    cfg.pairs
        .first()
        .filter(|p| p.b1 != p.b2)
        .map(|p| p.at(0.0))
        .unwrap_or_else(|| PrismPairSpec::new(0.04, 0.36, 0.10385, 0.15, Geometry::Parallelogram))
}

/// Run every check with a generator seeded by `seed`.
pub fn run(cfg: &RunConfig, seed: u64) -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let c: Constants = cfg.constants;
    let spin = |r: &mut ChaCha8Rng| if r.gen_bool(0.5) { Spin::Up } else { Spin::Down };
    let geometry = |r: &mut ChaCha8Rng| if r.gen_bool(0.5) { Geometry::Parallelogram } else { Geometry::Triangular };
    let mut checks = Vec::new();

    checks.push(check("refraction_conserves_energy", 1e-12, SAMPLES, |_| {
        let (theta, v, jump) = (rng.gen_range(-1.4..1.4), rng.gen_range(100.0..3000.0), rng.gen_range(-2.0..2.0));
        let moment = spin(&mut rng).moment(&c);
        let Ok(r) = refract_exact(theta, v, moment, jump, &c) else { return Some(0.0) };
        let before = 0.5 * c.neutron_mass * v * v;
        let after = 0.5 * c.neutron_mass * r.speed_out * r.speed_out - moment * jump;
        Some(rel(v * f64::sin(theta), r.speed_out * r.theta_out.sin()).max(rel(before, after)))
    }));

    checks.push(check("first_order_deflection_is_spin_antisymmetric", 1e-15, SAMPLES, |_| {
        let (theta, v, jump) = (rng.gen_range(-1.2..1.2), rng.gen_range(200.0..3000.0), rng.gen_range(-1.0..1.0));
        let up = deflection_first_order(theta, v, Spin::Up.moment(&c), jump, &c);
        let down = deflection_first_order(theta, v, Spin::Down.moment(&c), jump, &c);
        Some((up + down).abs() / up.abs().max(f64::MIN_POSITIVE))
    }));

    checks.push(check("pair_operator_is_unitary", 1e-12, SAMPLES, |_| {
        let spec = PrismPairSpec::new(0.04, 0.3, rng.gen_range(0.0..0.5), rng.gen_range(0.0..0.5), geometry(&mut rng));
        let state = NeutronState::from_wavelength(rng.gen_range(0.2e-9..2e-9), &c).ok()?;
        let (y, z, phi) = (rng.gen_range(-0.05..0.05), rng.gen_range(-2.0..2.0), rng.gen_range(-0.02..0.02));
        Some(unitarity_check(pair_unitary(&spec, y, z, phi, &state, &c)))
    }));

    checks.push(check("texture_operator_is_unitary", 1e-12, SAMPLES, |_| {
        let (kx, ky) = (rng.gen_range(1e3..1e5), rng.gen_range(1e3..1e5));
        Some(unitarity_check(u_pair(kx, ky, rng.gen_range(-1e-3..1e-3), rng.gen_range(-1e-3..1e-3))))
    }));

    checks.push(check("texture_is_periodic", 1e-9, SAMPLES, |_| {
        let (kx, ky) = (rng.gen_range(1e3..1e5), rng.gen_range(1e3..1e5));
        let (x, y) = (rng.gen_range(-1e-3..1e-3), rng.gen_range(-1e-3..1e-3));
        let (theta, phase) = (rng.gen_range(0.0..PI), rng.gen_range(0.0..2.0 * PI));
        let k = KappaSpec { kappa_y: ky, ..KappaSpec::uniform(kx) };
        let s = bloch_texture(&k, theta, phase, x, y);
        let sx = bloch_texture(&k, theta, phase, x + PI / kx, y);
        let sy = bloch_texture(&k, theta, phase, x, y + PI / ky);
        let norm = (s[0] * s[0] + s[1] * s[1] + s[2] * s[2]).sqrt();
        Some((0..3).map(|i| (s[i] - sx[i]).abs().max((s[i] - sy[i]).abs())).fold((norm - 1.0).abs(), f64::max))
    }));

    checks.push(check("momentum_kicks_resum_to_operator", 1e-9, SAMPLES, |_| {
        let (kx, ky) = (rng.gen_range(0.0..5e4), rng.gen_range(0.0..5e4));
        let psi = bloch_spinor(rng.gen_range(0.0..PI), rng.gen_range(0.0..2.0 * PI));
        let (x, y) = (rng.gen_range(-5e-5..5e-5), rng.gen_range(-5e-5..5e-5));
        let a = resum(&momentum_kicks(kx, ky, psi), x, y);
        let b = u_pair(kx, ky, x, y).apply(psi);
        Some((a[0] - b[0]).norm().max((a[1] - b[1]).norm()))
    }));

    checks.push(check("checkerboard_fields_focus_both_pairs", 1e-12, SAMPLES, |_| {
        let l4 = rng.gen_range(0.1..0.3);
        let l3 = l4 + rng.gen_range(0.2..0.5);
        let l2 = l3 + rng.gen_range(0.2..0.5);
        let l1 = l2 + rng.gen_range(0.2..0.5);
        let b1 = rng.gen_range(0.01..0.3);
        let [b2, b3, b4] = solve_checkerboard_fields(b1, [l1, l2, l3, l4]).ok()?;
        Some(rel(b1 * l1, b2 * l2).max(rel(b3 * l3, b4 * l4)).max(rel((b1 - b2).abs(), (b3 - b4).abs())))
    }));

    let pair = reference_pair(cfg);
    let state = cfg.neutron;
    checks.push(check("exact_trace_is_continuous_and_conserves_energy", 1e-12, SAMPLES / 10, |_| {
        let y0 = rng.gen_range(-0.3..0.3) * pair.edge;
        let phi = rng.gen_range(-2e-3..2e-3);
        let s = state.with_entry(0.0, y0).with_divergence(phi);
        let z = pair.separation() + pair.edge;
        let r = trace_exact(&BeamlineConfig { constants: c, ..BeamlineConfig::single(pair, z) }, &s).ok()?;
        let mut worst: f64 = 0.0;
        for t in [&r.up, &r.down] {
            let moment = t.spin.moment(&c);
            let e0 = 0.5 * c.neutron_mass * s.speed * s.speed;
            for w in t.segments.windows(2) {
                worst = worst.max((0..3).map(|i| (w[0].end[i] - w[1].start[i]).abs()).fold(0.0, f64::max));
            }
            for seg in &t.segments {
                let v = seg.speed();
                worst = worst.max(rel(0.5 * c.neutron_mass * v * v - moment * seg.field, e0));
            }
        }
        Some(worst)
    }));

    checks.push(check("focusing_plane_gives_full_visibility", 1e-9, 1, |_| {
        let f = fringe_visibility(&pair, Screen::FocusingPlane { offset: 0.0 }, &uniform_divergence(5e-3, 101), &state, &c);
        Some((f.ok()?.visibility - 1.0).abs())
    }));

    Outcome { checks }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::parse_config;

    #[test]
    fn suite_passes_and_is_reproducible() {
        let cfg = parse_config("[neutron]\nwavelength = 1 nm\n").unwrap();
        let a = run(&cfg, 7);
        assert_eq!(a.failures(), 0, "{a:?}");
        assert_eq!(a, run(&cfg, 7));
    }

    #[test]
    fn failed_checks_are_counted() {
        let o = Outcome {
            checks: vec![
                Check { name: "ok", samples: 1, max_error: 0.0, tolerance: 1.0 },
                Check { name: "bad", samples: 1, max_error: f64::INFINITY, tolerance: 1.0 },
            ],
        };
        assert_eq!(o.failures(), 1);
        let (table, summary) = o.report();
        assert_eq!(table.rows[1][4], 0.0);
        assert!(summary["02_bad"].starts_with("FAIL"));
    }
}
