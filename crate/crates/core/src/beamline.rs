//! Neutron state, prism-pair geometry and the single-pair scaling laws.

use crate::constants::Constants;
use crate::error::{Error, Result};
use std::f64::consts::PI;

/// Incident neutron: kinematics, spin direction and entry ray.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NeutronState {
    pub wavelength: f64,
    pub speed: f64,
    /// Polar Bloch angle of the incident spinor.
    pub theta_in: f64,
    /// Azimuthal Bloch angle of the incident spinor.
    pub phi_in: f64,
    pub x0: f64,
    pub y0: f64,
    /// In-plane angle between the incoming ray and the beam axis.
    pub divergence: f64,
}

impl NeutronState {
    pub fn from_wavelength(wavelength: f64, c: &Constants) -> Result<Self> {
        let speed = wavelength_to_speed(wavelength, c)?;
        Ok(NeutronState {
            wavelength,
            speed,
            theta_in: PI / 2.0,
            phi_in: 0.0,
            x0: 0.0,
            y0: 0.0,
            divergence: 0.0,
        })
    }

    pub fn from_speed(speed: f64, c: &Constants) -> Result<Self> {
        if !(speed.is_finite() && speed > 0.0) {
            return Err(Error::invalid("speed", format!("must be positive, got {speed}")));
        }
        let mut s = Self::from_wavelength(c.planck / (c.neutron_mass * speed), c)?;
        s.speed = speed;
        Ok(s)
    }

    pub fn with_entry(mut self, x0: f64, y0: f64) -> Self {
        self.x0 = x0;
        self.y0 = y0;
        self
    }

    pub fn with_divergence(mut self, divergence: f64) -> Self {
        self.divergence = divergence;
        self
    }

    pub fn with_spin(mut self, theta_in: f64, phi_in: f64) -> Self {
        self.theta_in = theta_in;
        self.phi_in = phi_in;
        self
    }

    /// Wavenumber along the beam, 1/m.
    pub fn wavenumber(&self, c: &Constants) -> f64 {
        c.neutron_mass * self.speed / c.hbar
    }

    pub fn validate(&self, c: &Constants) -> Result<()> {
        if !(self.wavelength > 0.0) {
            return Err(Error::NonPositiveWavelength(self.wavelength));
        }
        if !(self.speed > 0.0) {
            return Err(Error::invalid("speed", "must be positive"));
        }
        let ratio = self.speed * self.wavelength * c.neutron_mass / c.planck;
        if (ratio - 1.0).abs() > 1e-12 {
            return Err(Error::invalid("speed", "speed and wavelength disagree"));
        }
        if !(0.0..=PI).contains(&self.theta_in) {
            return Err(Error::invalid("theta_in", "must lie in [0, pi]"));
        }
        for (name, v) in [
            ("phi_in", self.phi_in),
            ("x0", self.x0),
            ("y0", self.y0),
            ("divergence", self.divergence),
        ] {
            if !v.is_finite() {
                return Err(Error::invalid(name, "must be finite"));
            }
        }
        if self.divergence.abs() >= PI / 2.0 {
            return Err(Error::invalid("divergence", "must be below pi/2"));
        }
        Ok(())
    }
}

/// Orientation of the second prism's hypotenuse relative to the first.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Geometry {
    /// Hypotenuses parallel.
    Parallelogram,
    /// Second hypotenuse mirrored.
    Triangular,
}

impl Geometry {
    pub fn name(self) -> &'static str {
        match self {
            Geometry::Parallelogram => "parallelogram",
            Geometry::Triangular => "triangular",
        }
    }
}

impl std::str::FromStr for Geometry {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "parallelogram" | "P" => Ok(Geometry::Parallelogram),
            "triangular" | "T" => Ok(Geometry::Triangular),
            other => Err(Error::invalid("geometry", format!("unknown geometry {other:?}"))),
        }
    }
}

/// Two magnetic Wollaston prisms operated as a focusing pair.
///
/// Local frame: origin at the centre of the first prism, `z` along the beam.
/// The second prism's centre sits `edge + gap` downstream.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PrismPairSpec {
    pub edge: f64,
    /// Gap between the facing outer faces of the two prisms.
    pub gap: f64,
    pub b1: f64,
    pub b2: f64,
    /// Unit field direction; must be transverse to the beam.
    pub field_axis: [f64; 3],
    pub geometry: Geometry,
    /// Beamline position of the first prism's centre.
    pub position: f64,
}

impl PrismPairSpec {
    pub fn new(edge: f64, gap: f64, b1: f64, b2: f64, geometry: Geometry) -> Self {
        PrismPairSpec {
            edge,
            gap,
            b1,
            b2,
            field_axis: [1.0, 0.0, 0.0],
            geometry,
            position: 0.0,
        }
    }

    pub fn with_axis(mut self, axis: [f64; 3]) -> Self {
        self.field_axis = axis;
        self
    }

    pub fn at(mut self, position: f64) -> Self {
        self.position = position;
        self
    }

    /// Centre-to-centre distance `a + gap`.
    pub fn separation(&self) -> f64 {
        self.edge + self.gap
    }

    /// Distances from the two prism centres to a plane at beamline `z`.
    pub fn lever_arms(&self, detector_z: f64) -> (f64, f64) {
        let l1 = detector_z - self.position;
        (l1, l1 - self.separation())
    }

    /// Signed mismatch `B1 L1 - B2 L2` at a plane at local `z`.
    pub fn focusing_mismatch(&self, z_local: f64) -> f64 {
        z_local * (self.b1 - self.b2) + self.separation() * self.b2
    }

    /// Local `z` where the on-axis focusing condition holds.
    pub fn focal_distance(&self) -> Result<f64> {
        let db = self.b1 - self.b2;
        if db == 0.0 {
            return Err(Error::DegenerateFocusing);
        }
        Ok(-self.separation() * self.b2 / db)
    }

    /// Transverse direction `z x n` along which the pair imprints its phase.
    pub fn phase_axis(&self) -> [f64; 3] {
        let n = self.field_axis;
        [-n[1], n[0], 0.0]
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.edge > 0.0) {
            return Err(Error::invalid("edge", "prism edge must be positive"));
        }
        if !(self.gap >= 0.0) {
            return Err(Error::invalid("gap", "gap must be non-negative"));
        }
        if !(self.b1 >= 0.0) || !(self.b2 >= 0.0) {
            return Err(Error::invalid("field", "field magnitudes must be non-negative"));
        }
        let n = self.field_axis;
        let norm = (n[0] * n[0] + n[1] * n[1] + n[2] * n[2]).sqrt();
        if (norm - 1.0).abs() > 1e-9 {
            return Err(Error::invalid("field_axis", format!("not a unit vector (|n| = {norm})")));
        }
        if n[2].abs() > 1e-9 {
            return Err(Error::invalid("field_axis", "must be orthogonal to the beam axis"));
        }
        if !self.position.is_finite() {
            return Err(Error::invalid("position", "must be finite"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DetectorOrientation {
    /// Plane perpendicular to the beam at `detector_z`.
    Vertical,
    /// Tilted along the first pair's phase-focusing locus, shifted by `offset` along `z`.
    FocusingPlane { offset: f64 },
}

/// Ordered prism pairs plus a detector.
#[derive(Debug, Clone, PartialEq)]
pub struct BeamlineConfig {
    pub pairs: Vec<PrismPairSpec>,
    pub detector_z: f64,
    pub orientation: DetectorOrientation,
    pub constants: Constants,
}

impl BeamlineConfig {
    pub fn single(pair: PrismPairSpec, detector_z: f64) -> Self {
        BeamlineConfig {
            pairs: vec![pair],
            detector_z,
            orientation: DetectorOrientation::Vertical,
            constants: Constants::default(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.constants.validate()?;
        if self.pairs.is_empty() {
            return Err(Error::invalid("pairs", "at least one prism pair is required"));
        }
        for p in &self.pairs {
            p.validate()?;
        }
        for w in self.pairs.windows(2) {
            let end = w[0].position + w[0].separation() + w[0].edge / 2.0;
            if w[1].position - w[1].edge / 2.0 < end {
                return Err(Error::invalid("position", "prism pairs overlap"));
            }
        }
        if self.pairs.len() == 2 {
            let (a, b) = (self.pairs[0].field_axis, self.pairs[1].field_axis);
            let dot = a[0] * b[0] + a[1] * b[1] + a[2] * b[2];
            if dot.abs() > 1e-9 {
                return Err(Error::invalid(
                    "field_axis",
                    "the two pairs need orthogonal transverse field axes",
                ));
            }
        }
        let last = self.pairs.last().expect("non-empty");
        if self.detector_z <= last.position + last.separation() + last.edge / 2.0 {
            return Err(Error::invalid("detector_z", "detector must sit downstream of the last prism"));
        }
        Ok(())
    }
}

/// De Broglie speed `h / (m lambda)`.
pub fn wavelength_to_speed(wavelength: f64, c: &Constants) -> Result<f64> {
    if !(wavelength > 0.0) {
        return Err(Error::NonPositiveWavelength(wavelength));
    }
    Ok(c.planck / (c.neutron_mass * wavelength))
}

fn length_scale(wavelength: f64, c: &Constants) -> f64 {
    c.neutron_mass * c.moment_abs() * wavelength * wavelength / (PI * PI * c.hbar * c.hbar)
}

/// Spin-echo entanglement length with equal field magnitudes.
pub fn entanglement_length_sesans(wavelength: f64, field: f64, l1: f64, l2: f64, c: &Constants) -> f64 {
    length_scale(wavelength, c) * field * (l1 - l2).abs()
}

/// Entanglement length of a focused pair with unequal fields.
pub fn entanglement_length_semsans(wavelength: f64, b1: f64, b2: f64, sample_distance: f64, c: &Constants) -> f64 {
    length_scale(wavelength, c) * (b1 - b2).abs() * sample_distance
}

/// Spatial period of the intensity fringes.
pub fn fringe_period(wavelength: f64, b1: f64, b2: f64, c: &Constants) -> Result<f64> {
    if !(wavelength > 0.0) {
        return Err(Error::NonPositiveWavelength(wavelength));
    }
    let db = (b1 - b2).abs();
    if db == 0.0 {
        return Err(Error::EqualFields(b1));
    }
    Ok(PI * PI * c.hbar * c.hbar / (c.neutron_mass * c.moment_abs() * wavelength * db))
}

/// Texture length unit `v0 hbar / (2 |mu| |dB|)`.
pub fn texture_length(speed: f64, field_difference: f64, c: &Constants) -> f64 {
    speed * c.hbar / (2.0 * c.moment_abs() * field_difference.abs())
}
