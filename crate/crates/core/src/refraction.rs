//! Refraction of a neutron at a sharp magnetic-field boundary.
//!
//! Field values are signed projections on the prism's field axis. A positive
//! deflection means the ray bends away from the boundary normal.

use crate::constants::Constants;
use crate::error::{Error, Result};
use crate::real::Real;
use std::f64::consts::FRAC_PI_2;

/// Largest incidence angle accepted before tan(theta) blows up.
pub const GRAZING_LIMIT: f64 = FRAC_PI_2 - 1e-6;

/// Spin eigenstate along the local field axis.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Spin {
    Up,
    Down,
}

impl Spin {
    pub const BOTH: [Spin; 2] = [Spin::Up, Spin::Down];

    /// Projected moment: `-|mu|` for up, `+|mu|` for down.
    pub fn moment(self, c: &Constants) -> f64 {
        match self {
            Spin::Up => -c.moment_abs(),
            Spin::Down => c.moment_abs(),
        }
    }

    /// +1 for up, -1 for down.
    pub fn sign(self) -> f64 {
        match self {
            Spin::Up => 1.0,
            Spin::Down => -1.0,
        }
    }

    pub fn flip(self) -> Spin {
        match self {
            Spin::Up => Spin::Down,
            Spin::Down => Spin::Up,
        }
    }
}

/// A planar boundary in the deflection plane `(y, z)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Interface {
    pub normal: [f64; 2],
    pub b_in: f64,
    pub b_out: f64,
    pub spin: Spin,
}

impl Interface {
    pub fn new(normal: [f64; 2], b_in: f64, b_out: f64, spin: Spin) -> Result<Self> {
        let n = (normal[0] * normal[0] + normal[1] * normal[1]).sqrt();
        if (n - 1.0).abs() > 1e-12 {
            return Err(Error::invalid("normal", format!("not a unit vector (|n| = {n})")));
        }
        Ok(Interface { normal, b_in, b_out, spin })
    }

    pub fn field_jump(&self) -> f64 {
        self.b_out - self.b_in
    }

    /// Velocity after crossing, keeping the tangential component.
    pub fn refract(&self, velocity: [f64; 2], c: &Constants) -> Result<[f64; 2]> {
        let v_in = velocity[0].hypot(velocity[1]);
        let v_out = speed_after(v_in, self.spin.moment(c), self.field_jump(), c)?;
        let u = [velocity[0], velocity[1], 0.0];
        let n = [self.normal[0], self.normal[1], 0.0];
        let w = refract_velocity(u, n, v_out)?;
        Ok([w[0], w[1]])
    }
}

/// Result of an exact refraction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Refracted {
    pub theta_out: f64,
    pub speed_out: f64,
}

impl Refracted {
    pub fn deflection(&self, theta_in: f64) -> f64 {
        self.theta_out - theta_in
    }
}

/// Speed after entering a region whose field differs by `field_step` from the current one.
pub fn speed_after(v_in: f64, moment: f64, field_step: f64, c: &Constants) -> Result<f64> {
    let radicand = v_in * v_in + 2.0 * moment * field_step / c.neutron_mass;
    if !(radicand > 0.0) {
        return Err(Error::ClassicallyForbidden { radicand });
    }
    Ok(radicand.sqrt())
}

/// Exact magnetic Snell's law; `field_jump` is the signed discontinuity `B_out - B_in`.
pub fn refract_exact(theta_in: f64, v_in: f64, moment: f64, field_jump: f64, c: &Constants) -> Result<Refracted> {
    if theta_in.abs() > GRAZING_LIMIT {
        return Err(Error::GrazingIncidence(theta_in));
    }
    let factor = 1.0 + 2.0 * moment * field_jump / (c.neutron_mass * v_in * v_in);
    if !(factor > 0.0) {
        return Err(Error::ClassicallyForbidden { radicand: factor * v_in * v_in });
    }
    let speed_out = v_in * factor.sqrt();
    let sin_out = theta_in.sin() / factor.sqrt();
    if sin_out.abs() > 1.0 {
        return Err(Error::TotalInternalReflection { sin_out });
    }
    Ok(Refracted { theta_out: sin_out.asin(), speed_out })
}

/// Leading-order deflection `theta_out - theta_in`.
pub fn deflection_first_order(theta_in: f64, v_in: f64, moment: f64, field_jump: f64, c: &Constants) -> f64 {
    -moment * field_jump / (c.neutron_mass * v_in * v_in) * theta_in.tan()
}

/// Canonical momentum `sqrt((E - V)^2 - m^2 c^4) / c` in a medium with light speed `c`.
pub fn canonical_momentum<R: Real>(energy: R, potential: R, mass: R, light_speed: R) -> Result<R> {
    let e = energy - potential;
    let rest = mass * light_speed * light_speed;
    let radicand = (e - rest) * (e + rest);
    if !(radicand > R::zero()) {
        return Err(Error::ClassicallyForbidden { radicand: radicand.to_f64_lossy() });
    }
    Ok(radicand.sqrt().quot(light_speed))
}

/// Refraction from the stationary-action principle, valid for massive and massless particles.
///
/// Energies are totals including rest energy; use a double-double scalar for slow
/// massive particles, where `E - V - mc^2` is tiny compared with `E`.
#[allow(clippy::too_many_arguments)]
pub fn refract_relativistic<R: Real>(
    theta_in: R,
    energy: R,
    potential_in: R,
    potential_out: R,
    mass: R,
    light_in: R,
    light_out: R,
) -> Result<R> {
    if theta_in.abs() > R::lit(GRAZING_LIMIT) {
        return Err(Error::GrazingIncidence(theta_in.to_f64_lossy()));
    }
    let p_in = canonical_momentum(energy, potential_in, mass, light_in)?;
    let p_out = canonical_momentum(energy, potential_out, mass, light_out)?;
    let (s, _) = theta_in.sin_cos_acc();
    let sin_out = (s * p_in).quot(p_out);
    if sin_out.abs() > R::one() {
        return Err(Error::TotalInternalReflection { sin_out: sin_out.to_f64_lossy() });
    }
    Ok(sin_out.asin_acc())
}

/// Vector refraction: keep the component tangent to `normal`, rescale the normal part.
pub(crate) fn refract_velocity<R: Real>(u: [R; 3], normal: [R; 3], v_out: R) -> Result<[R; 3]> {
    let un = u[0] * normal[0] + u[1] * normal[1] + u[2] * normal[2];
    let t = [u[0] - un * normal[0], u[1] - un * normal[1], u[2] - un * normal[2]];
    let t2 = t[0] * t[0] + t[1] * t[1] + t[2] * t[2];
    let radicand = v_out * v_out - t2;
    if !(radicand >= R::zero()) {
        let sin_out = (t2.sqrt() / v_out).to_f64_lossy();
        return Err(Error::TotalInternalReflection { sin_out });
    }
    let vn = if un >= R::zero() { radicand.sqrt() } else { -radicand.sqrt() };
    Ok([t[0] + vn * normal[0], t[1] + vn * normal[1], t[2] + vn * normal[2]])
}
