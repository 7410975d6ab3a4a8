//! Truncated closed forms for a single prism pair (first order in the
//! deflection angles and the divergence).

use crate::beamline::{Geometry, NeutronState, PrismPairSpec};
use crate::constants::Constants;
use crate::error::{Error, Result};
use crate::refraction::Spin;
use std::f64::consts::FRAC_PI_4;

/// Magnitudes `2|mu|B_i / (m v0^2)` of the hypotenuse deflections.
pub fn deflection_magnitudes(spec: &PrismPairSpec, speed: f64, c: &Constants) -> (f64, f64) {
    let k = 2.0 * c.moment_abs() / (c.neutron_mass * speed * speed);
    (k * spec.b1, k * spec.b2)
}

/// Entry, first-hypotenuse and second-hypotenuse angles for one spin.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DeflectionAngles {
    pub entry: f64,
    pub first: f64,
    pub second: f64,
}

impl DeflectionAngles {
    /// Angle of the outgoing ray with the beam axis.
    ///
    /// The second deflection is measured from the normal of the second
    /// hypotenuse, which is mirrored in the triangular geometry.
    pub fn final_angle(&self, geometry: Geometry) -> f64 {
        match geometry {
            Geometry::Parallelogram => self.entry + self.first + self.second,
            Geometry::Triangular => self.entry + self.first - self.second,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DeflectionChain {
    pub up: DeflectionAngles,
    pub down: DeflectionAngles,
}

impl DeflectionChain {
    pub fn get(&self, spin: Spin) -> DeflectionAngles {
        match spin {
            Spin::Up => self.up,
            Spin::Down => self.down,
        }
    }
}

fn region_speed_sq(v0: f64, moment: f64, field: f64, c: &Constants) -> Result<f64> {
    let r = v0 * v0 + 2.0 * moment * field / c.neutron_mass;
    if r > 0.0 {
        Ok(r)
    } else {
        Err(Error::ClassicallyForbidden { radicand: r })
    }
}

/// Deflection angles at the entry face and the two hypotenuses.
pub fn deflection_chain(spec: &PrismPairSpec, state: &NeutronState, c: &Constants) -> Result<DeflectionChain> {
    let v0 = state.speed;
    let phi = state.divergence;
    let angles = |spin: Spin| -> Result<DeflectionAngles> {
        let mu = spin.moment(c);
        let m = c.neutron_mass;
        let entry = (1.0 + mu * spec.b1 / (m * v0 * v0)) * phi;
        let v1_sq = region_speed_sq(v0, mu, -spec.b1, c)?;
        let first = -mu * 2.0 * spec.b1 / (m * v1_sq) * (FRAC_PI_4 + entry).tan();
        let second = match spec.geometry {
            Geometry::Parallelogram => {
                let v2_sq = region_speed_sq(v0, mu, spec.b2, c)?;
                mu * 2.0 * spec.b2 / (m * v2_sq) * (FRAC_PI_4 + entry + first).tan()
            }
            Geometry::Triangular => {
                let v2_sq = region_speed_sq(v0, mu, -spec.b2, c)?;
                -mu * 2.0 * spec.b2 / (m * v2_sq) * (FRAC_PI_4 - (entry + first)).tan()
            }
        };
        Ok(DeflectionAngles { entry, first, second })
    };
    Ok(DeflectionChain {
        up: angles(Spin::Up)?,
        down: angles(Spin::Down)?,
    })
}

/// Point where the two spin rays of one neutron meet.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Focus {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

fn ratio(a1: f64, a2: f64) -> Result<f64> {
    if a1 == a2 {
        return Err(Error::DegenerateFocusing);
    }
    Ok(a2 / (a1 - a2))
}

pub fn focus_parallelogram(spec: &PrismPairSpec, state: &NeutronState, c: &Constants) -> Result<Focus> {
    let (a1, a2) = deflection_magnitudes(spec, state.speed, c);
    let r = ratio(a1, a2)?;
    let (a, sep, y0, phi) = (spec.edge, spec.separation(), state.y0, state.divergence);
    Ok(Focus {
        x: state.x0,
        y: y0 + phi * (y0 + a / 2.0 - sep * r),
        z: y0 - sep * r + phi * (a / 2.0 + 2.0 * y0 - sep * r),
    })
}

pub fn focus_triangular(spec: &PrismPairSpec, state: &NeutronState, c: &Constants) -> Result<Focus> {
    let (a1, a2) = deflection_magnitudes(spec, state.speed, c);
    ratio(a1, a2)?;
    let (a, gap, sep, y0, phi) = (spec.edge, spec.gap, spec.separation(), state.y0, state.divergence);
    let d = a1 - a2;
    let slope = (a1 + a2) / d;
    let y = y0 + phi * (a * (a1 - 3.0 * a2) / (2.0 * d) - gap * a2 / d + y0 * slope);
    let z = y0 * slope - sep * a2 / d
        + phi
            * (a * (a1 * a1 + 6.0 * a1 * a2 - 3.0 * a2 * a2) / (2.0 * d * d)
                + gap * a2 * (3.0 * a1 - a2) / (d * d)
                + 2.0 * y0 * (a1 * a1 - 4.0 * a1 * a2 + a2 * a2) / (d * d));
    Ok(Focus { x: state.x0, y, z })
}

/// Closed-form focus for the pair's own geometry.
pub fn focus_closed_form(spec: &PrismPairSpec, state: &NeutronState, c: &Constants) -> Result<Focus> {
    match spec.geometry {
        Geometry::Parallelogram => focus_parallelogram(spec, state, c),
        Geometry::Triangular => focus_triangular(spec, state, c),
    }
}

/// Slope `dz_f / dy_0` of the geometric focusing locus at zero divergence.
pub fn focal_locus_slope(spec: &PrismPairSpec) -> Result<f64> {
    let d = spec.b1 - spec.b2;
    if d == 0.0 {
        return Err(Error::DegenerateFocusing);
    }
    Ok(match spec.geometry {
        Geometry::Parallelogram => 1.0,
        Geometry::Triangular => (spec.b1 + spec.b2) / d,
    })
}

/// First-order inversion of the focus map: entry height that focuses at `y_f`.
pub fn entry_from_focus(spec: &PrismPairSpec, y_f: f64, divergence: f64) -> Result<f64> {
    let (b1, b2) = (spec.b1, spec.b2);
    let d = b1 - b2;
    if d == 0.0 {
        return Err(Error::DegenerateFocusing);
    }
    let a = spec.edge;
    let bracket = match spec.geometry {
        Geometry::Parallelogram => y_f + a / 2.0 - spec.separation() * b2 / d,
        // The bracket's own y0 is replaced by y_f; the difference is second order.
        Geometry::Triangular => a * (b1 - 3.0 * b2) / (2.0 * d) - spec.gap * b2 / d + y_f * (b1 + b2) / d,
    };
    Ok(y_f - divergence * bracket)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ArrivalTimes {
    pub up: f64,
    pub down: f64,
}

impl ArrivalTimes {
    /// Initial longitudinal separation `v0 (t_up - t_down)`.
    pub fn longitudinal_separation(&self, speed: f64) -> f64 {
        speed * (self.up - self.down)
    }
}

/// Time from the entry face to the focus for each spin.
///
/// The spin-labelled angles carry the spin sign on both hypotenuses
/// (`alpha_i,sigma = s_sigma alpha_i`), which is the convention under which the
/// arrival-time difference reproduces the longitudinal separation `2 y_f (alpha_2 - alpha_1)`.
pub fn arrival_times(spec: &PrismPairSpec, state: &NeutronState, c: &Constants) -> Result<ArrivalTimes> {
    let (a1, a2) = deflection_magnitudes(spec, state.speed, c);
    ratio(a1, a2)?;
    let (a, gap, y0, phi, v0) = (spec.edge, spec.gap, state.y0, state.divergence, state.speed);
    let time = |s: f64| {
        let (p, q) = (s * a1, s * a2);
        let d = p - q;
        match spec.geometry {
            Geometry::Parallelogram => {
                (1.0 + phi) * (a * (p - 3.0 * q) - 2.0 * q * gap) / (2.0 * v0 * d)
                    - y0 * (d - 2.0 * phi - 1.0) / v0
            }
            Geometry::Triangular => {
                a * (p - 3.0 * q) / (2.0 * v0 * d) + q * gap / (v0 * (q - p)) + y0 * (p + q - d * d) / (v0 * d)
                    + phi
                        * (a * (4.0 * p * p / (d * d) - 3.0) / (2.0 * v0)
                            + q * gap * (3.0 * p - q) / (v0 * d * d)
                            + 2.0 * y0 * (p * p - 4.0 * p * q + q * q) / (v0 * d * d))
            }
        }
    };
    Ok(ArrivalTimes {
        up: time(Spin::Up.sign()),
        down: time(Spin::Down.sign()),
    })
}

/// Hypotenuse crossings `(y, z)` for each spin at zero divergence.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Crossings {
    pub first: [(f64, f64); 2],
    pub second: [(f64, f64); 2],
}

/// Crossing points, ignoring the face refractions between the prisms.
pub fn hypotenuse_crossings(spec: &PrismPairSpec, state: &NeutronState, c: &Constants) -> Crossings {
    let (a1, _) = deflection_magnitudes(spec, state.speed, c);
    let (y0, sep) = (state.y0, spec.separation());
    let second = |s: f64| {
        let t = (s * a1).tan();
        match spec.geometry {
            Geometry::Parallelogram => ((y0 + (sep - y0) * t) / (1.0 - t), (y0 * (1.0 - t) + sep) / (1.0 - t)),
            Geometry::Triangular => {
                let z = (sep - y0 + t * y0) / (1.0 + t);
                (sep - z, z)
            }
        }
    };
    Crossings {
        first: [(y0, y0), (y0, y0)],
        second: [second(1.0), second(-1.0)],
    }
}
