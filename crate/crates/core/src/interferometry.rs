//! Spin-dependent phases of a prism pair, the resulting two-path operator,
//! interference fringes and the exact-trace phase oracle.
//!
//! Phases are reported as the operator half-angle `phi` in
//! `U = cos(phi) + i sin(phi) n.sigma`; the observable precession angle between
//! the two spin states is `2 phi`.

use crate::beamline::{DetectorOrientation, Geometry, NeutronState, PrismPairSpec};
use crate::constants::Constants;
use crate::error::{Error, Result};
use crate::raytrace::closed::{deflection_magnitudes, focal_locus_slope};
use crate::raytrace::exact::path_to_target;
use crate::real::{DoubleDouble, Real};
use crate::refraction::Spin;
use crate::spin::SpinOperator;
use rayon::prelude::*;

pub use crate::spin::unitarity_check;

/// Truncation order of a phase value.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Order {
    First,
    Second,
    Exact,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhaseResult {
    /// Operator half-angle, rad.
    pub phase: f64,
    pub larmor: f64,
    pub kinetic: f64,
    pub global: f64,
    pub order: Order,
}

impl PhaseResult {
    fn first_order(phase: f64) -> Self {
        PhaseResult {
            phase,
            larmor: phase,
            kinetic: 0.0,
            global: 0.0,
            order: Order::First,
        }
    }

    /// Precession angle between the two spin states, `2 phi`.
    pub fn relative(&self) -> f64 {
        2.0 * self.phase
    }
}

/// `2 |mu| / (v0 hbar)`, rad per metre per tesla.
pub fn phase_gradient_scale(speed: f64, c: &Constants) -> f64 {
    2.0 * c.moment_abs() / (speed * c.hbar)
}

fn field_difference(spec: &PrismPairSpec) -> Result<f64> {
    let d = spec.b1 - spec.b2;
    if d == 0.0 {
        return Err(Error::DegenerateFocusing);
    }
    Ok(d)
}

/// Phase at the focus `y_f`; identical for both geometries.
pub fn phase_on_focus(spec: &PrismPairSpec, y_f: f64, state: &NeutronState, c: &Constants) -> Result<PhaseResult> {
    let d = field_difference(spec)?;
    Ok(PhaseResult::first_order(phase_gradient_scale(state.speed, c) * d * y_f))
}

/// Phase of a focused neutron expressed through its entry height `y0` and divergence.
pub fn phase_at_entry(spec: &PrismPairSpec, y0: f64, divergence: f64, state: &NeutronState, c: &Constants) -> Result<PhaseResult> {
    let d = field_difference(spec)?;
    let k = phase_gradient_scale(state.speed, c);
    let (a, gap, b1, b2, phi) = (spec.edge, spec.gap, spec.b1, spec.b2, divergence);
    let offset = k / 2.0 * (b1 * a - b2 * (3.0 * a + 2.0 * gap)) * phi;
    let phase = match spec.geometry {
        Geometry::Parallelogram => k * d * (1.0 + phi) * y0 + offset,
        Geometry::Triangular => k * d * y0 + k * (b1 + b2) * y0 * phi + offset,
    };
    Ok(PhaseResult::first_order(phase))
}

/// Phase at an arbitrary detector point `(y, z)` in the pair's local frame.
pub fn phase_off_focus(spec: &PrismPairSpec, y: f64, z: f64, divergence: f64, state: &NeutronState, c: &Constants) -> PhaseResult {
    let k = phase_gradient_scale(state.speed, c);
    let (b1, b2, phi) = (spec.b1, spec.b2, divergence);
    let d = b1 - b2;
    let defocus = phi * spec.focusing_mismatch(z);
    let phase = match spec.geometry {
        Geometry::Parallelogram => k * (d * (1.0 + phi) * y - defocus),
        Geometry::Triangular => k * (d * y + (b1 + b2) * y * phi - defocus),
    };
    PhaseResult::first_order(phase)
}

/// Coefficient of the divergence in [`phase_off_focus`] at fixed `(y, z)`.
pub fn divergence_coefficient(spec: &PrismPairSpec, y: f64, z: f64, state: &NeutronState, c: &Constants) -> f64 {
    let k = phase_gradient_scale(state.speed, c);
    let (b1, b2) = (spec.b1, spec.b2);
    let lateral = match spec.geometry {
        Geometry::Parallelogram => (b1 - b2) * y,
        Geometry::Triangular => (b1 + b2) * y,
    };
    k * (lateral - spec.focusing_mismatch(z))
}

/// First-order relative Larmor phase `Phi_L` written as a single-path precession.
pub fn larmor_phase_first_order(spec: &PrismPairSpec, y: f64, z: f64, divergence: f64, state: &NeutronState, c: &Constants) -> f64 {
    let k = 4.0 * c.moment_abs() / (state.speed * c.hbar);
    let (b1, b2, phi, sep) = (spec.b1, spec.b2, divergence, spec.separation());
    match spec.geometry {
        Geometry::Parallelogram => k * ((b1 - b2) * (1.0 + phi) * y - phi * (z * (b1 - b2) + sep * b2)),
        Geometry::Triangular => k * ((b1 - b2) * y + (b1 + b2) * y * phi - phi * (z * (b1 - b2) + sep * b2)),
    }
}

/// Two-path operator `cos(phi) + i sin(phi) n.sigma` at a detector point.
pub fn pair_unitary(spec: &PrismPairSpec, y: f64, z: f64, divergence: f64, state: &NeutronState, c: &Constants) -> SpinOperator {
    let phase = phase_off_focus(spec, y, z, divergence, state, c).phase;
    SpinOperator::rotation(spec.field_axis, phase)
}

/// Initial separations the wave packet must span for the two paths to recombine.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoherenceRequirements {
    /// Longitudinal separation `Delta z0`, m.
    pub longitudinal: f64,
    /// Transverse separation `Delta y0`, m.
    pub transverse: f64,
}

/// Required initial separations for the paths meeting at `(y, z)`.
pub fn coherence_requirements(spec: &PrismPairSpec, y: f64, z: f64, state: &NeutronState, c: &Constants) -> CoherenceRequirements {
    let (a1, a2) = deflection_magnitudes(spec, state.speed, c);
    let sep = spec.separation();
    let transverse = match spec.geometry {
        Geometry::Parallelogram => 2.0 * ((y - z) * (a1 - a2) - sep * a2),
        Geometry::Triangular => 2.0 * ((a1 + a2) * y - (a1 - a2) * z - sep * a2),
    };
    CoherenceRequirements {
        longitudinal: 2.0 * y * (a2 - a1),
        transverse,
    }
}

/// Second-order relative phase correction `Phi_L^(2)` at `(y, z)`.
pub fn phase_second_order(spec: &PrismPairSpec, y: f64, z: f64, divergence: f64, state: &NeutronState, c: &Constants) -> f64 {
    let (a, gap, b1, b2, phi) = (spec.edge, spec.gap, spec.b1, spec.b2, divergence);
    let v0 = state.speed;
    let mv = c.neutron_mass * v0;
    let (al1, al2) = deflection_magnitudes(spec, v0, c);
    let (c1, c12, c2, cp, c1p, c2p) = match spec.geometry {
        Geometry::Parallelogram => (
            b1 / 2.0 * (5.0 * y + 4.0 * z - 3.0 * a) - 2.0 * b2 * (a + gap - z),
            4.0 * b1 * (3.0 * z - 4.0 * y - 3.0 * a - 3.0 * gap) + 2.0 * b2 * (5.0 * a + 6.0 * gap + 8.0 * y - 6.0 * z),
            b1 * (2.0 * z - 3.0 * a - 2.0 * gap) - b2 / 2.0 * (7.0 * a + 4.0 * gap - 5.0 * y - 4.0 * z),
            2.0 * b1 * (3.0 * y - 2.0 * z) + 2.0 * b2 * (2.0 * z - 2.0 * a - 2.0 * gap - 3.0 * y),
            2.0 * mv * (z - y),
            2.0 * mv * (a + gap + y - z),
        ),
        Geometry::Triangular => (
            b1 / 2.0 * (5.0 * y + 4.0 * z - 3.0 * a) + 2.0 * b2 * (5.0 * a + 5.0 * gap - 6.0 * y - 5.0 * z),
            4.0 * b1 * (a + gap - 2.0 * y - z) + 2.0 * b2 * (8.0 * y + 6.0 * z - 5.0 * a + 6.0 * gap),
            b1 * (3.0 * a + 2.0 * gap - 2.0 * z) - b2 / 2.0 * (4.0 * z - 5.0 * y - 7.0 * a - 4.0 * gap),
            2.0 * b1 * (3.0 * y - 2.0 * z) + 2.0 * b2 * (2.0 * a + 2.0 * gap - 3.0 * y - 2.0 * z),
            2.0 * mv * (z - y),
            2.0 * mv * (a + gap - y - z),
        ),
    };
    let sum = c1 * al1 * al1 + c12 * al1 * al2 + c2 * al2 * al2 + cp * phi * phi + c1p * al1 * phi + c2p * al2 * phi;
    c.moment_abs() / (v0 * c.hbar) * sum
}

/// Relative phase from exact traces of both spins landing on the same detector point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExactPhase {
    /// `(W_up - W_down) / hbar`, the observable precession angle.
    pub relative: f64,
    /// Spin-symmetric part `(W_up + W_down) / (2 hbar)`.
    pub global: f64,
    /// Difference of accumulated Zeeman phases.
    pub larmor: f64,
    /// Difference of accumulated kinetic phases.
    pub kinetic: f64,
    /// Entry-height difference `y0_up - y0_down`, m.
    pub entry_separation: f64,
    /// Arrival-time difference `t_up - t_down`, s.
    pub time_difference: f64,
}

/// Oracle phase at local `(y, z)` for a plane wave entering at angle `divergence`.
pub fn exact_phase(spec: &PrismPairSpec, y: f64, z: f64, divergence: f64, state: &NeutronState, c: &Constants) -> Result<ExactPhase> {
    type D = DoubleDouble;
    let pair = spec.at(0.0);
    let speed = D::from(c.planck).quot(D::from(c.neutron_mass) * D::from(state.wavelength));
    let paths: Vec<_> = Spin::BOTH
        .iter()
        .map(|&s| path_to_target::<D>(&[pair], c, s, speed, D::from(state.x0), D::from(divergence), D::from(y), D::from(z)))
        .collect::<Result<_>>()?;
    let (up, down) = (&paths[0], &paths[1]);
    let hbar_free = |x: D| x.to_f64_lossy();
    let e = pair.phase_axis();
    let entry = |p: &crate::raytrace::exact::RawPath<D>| {
        let s = p.segments[0].start;
        s[0] * e[0] + s[1] * e[1]
    };
    Ok(ExactPhase {
        relative: hbar_free(up.eikonal - down.eikonal),
        global: hbar_free((up.eikonal + down.eikonal) / 2.0),
        larmor: hbar_free(up.larmor - down.larmor),
        kinetic: hbar_free(up.kinetic - down.kinetic),
        entry_separation: hbar_free(entry(up) - entry(down)),
        time_difference: hbar_free(up.time - down.time),
    })
}

/// Detector surface for fringe calculations, in the pair's local frame.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Screen {
    /// Plane perpendicular to the beam at local `z`.
    Vertical { z: f64 },
    /// Plane along the focusing locus, shifted by `offset` along the beam.
    FocusingPlane { offset: f64 },
}

impl Screen {
    pub fn from_orientation(orientation: DetectorOrientation, spec: &PrismPairSpec, detector_z: f64) -> Self {
        match orientation {
            DetectorOrientation::Vertical => Screen::Vertical { z: detector_z - spec.position },
            DetectorOrientation::FocusingPlane { offset } => Screen::FocusingPlane { offset },
        }
    }

    /// Local `z` of the screen at transverse position `y`.
    pub fn z_at(&self, spec: &PrismPairSpec, y: f64) -> Result<f64> {
        match *self {
            Screen::Vertical { z } => Ok(z),
            Screen::FocusingPlane { offset } => Ok(spec.focal_distance()? + focal_locus_slope(spec)? * y + offset),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Fringe {
    pub visibility: f64,
    pub i_max: f64,
    pub i_min: f64,
    pub period: f64,
    /// `(y, I(y))` samples over one period centred on the axis.
    pub profile: Vec<(f64, f64)>,
}

/// Sum in a balanced tree so the result does not depend on thread scheduling.
pub fn pairwise_sum(values: &[f64]) -> f64 {
    match values.len() {
        0 => 0.0,
        1 => values[0],
        n => {
            let (l, r) = values.split_at(n / 2);
            pairwise_sum(l) + pairwise_sum(r)
        }
    }
}

const PROFILE_SAMPLES: usize = 512;

/// Ensemble intensity `sum w (1 + cos 2 phi) / 2` behind an analyser along the pair's field axis.
pub fn fringe_visibility(
    spec: &PrismPairSpec,
    screen: Screen,
    distribution: &[(f64, f64)],
    state: &NeutronState,
    c: &Constants,
) -> Result<Fringe> {
    if distribution.iter().any(|&(phi, w)| !(w >= 0.0 && w.is_finite() && phi.is_finite())) {
        return Err(Error::invalid("distribution", "weights must be finite and non-negative"));
    }
    let total = pairwise_sum(&distribution.iter().map(|d| d.1).collect::<Vec<_>>());
    if distribution.is_empty() || !(total > 0.0) {
        return Err(Error::EmptyDistribution);
    }
    let d = field_difference(spec)?;
    let period = std::f64::consts::PI / (phase_gradient_scale(state.speed, c) * d).abs();
    screen.z_at(spec, 0.0)?;

    let intensity = |y: f64| -> f64 {
        let z = screen.z_at(spec, y).expect("checked above");
        let terms: Vec<f64> = distribution
            .par_iter()
            .map(|&(phi, w)| w * (1.0 + (2.0 * phase_off_focus(spec, y, z, phi, state, c).phase).cos()) / 2.0)
            .collect();
        pairwise_sum(&terms) / total
    };

    let step = period / PROFILE_SAMPLES as f64;
    let profile: Vec<(f64, f64)> = (0..=PROFILE_SAMPLES)
        .into_par_iter()
        .map(|i| {
            let y = -period / 2.0 + step * i as f64;
            (y, intensity(y))
        })
        .collect();
    let refine = |sign: f64| -> f64 {
        let idx = (0..profile.len())
            .max_by(|&i, &j| (sign * profile[i].1).total_cmp(&(sign * profile[j].1)))
            .expect("non-empty profile");
        let y = profile[idx].0;
        let best = golden_section(|t| sign * intensity(t), y - step, y + step);
        sign * (sign * intensity(best)).max(sign * profile[idx].1)
    };
    let i_max = refine(1.0);
    let i_min = refine(-1.0);
    let visibility = if i_max + i_min > 0.0 { ((i_max - i_min) / (i_max + i_min)).clamp(0.0, 1.0) } else { 0.0 };
    Ok(Fringe {
        visibility,
        i_max,
        i_min,
        period,
        profile,
    })
}

/// Maximise `f` on `[lo, hi]`.
fn golden_section(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> f64 {
    let r = (5f64.sqrt() - 1.0) / 2.0;
    let mut x1 = hi - r * (hi - lo);
    let mut x2 = lo + r * (hi - lo);
    let (mut f1, mut f2) = (f(x1), f(x2));
    for _ in 0..80 {
        if f1 < f2 {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + r * (hi - lo);
            f2 = f(x2);
        } else {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - r * (hi - lo);
            f1 = f(x1);
        }
        if hi - lo < 1e-15 * (1.0 + lo.abs()) {
            break;
        }
    }
    (lo + hi) / 2.0
}

/// Uniform divergence distribution on `[-half_width, half_width]` with `n` points.
pub fn uniform_divergence(half_width: f64, n: usize) -> Vec<(f64, f64)> {
    if n == 1 {
        return vec![(0.0, 1.0)];
    }
    (0..n)
        .map(|i| (-half_width + 2.0 * half_width * i as f64 / (n - 1) as f64, 1.0))
        .collect()
}
