//! Spin textures from two prism pairs with orthogonal field axes.
//!
//! The first pair (field along x) imprints a phase gradient `kappa_y` along y,
//! the second (field along y) a gradient `kappa_x` along x.

pub mod kicks;
pub mod oam;

use crate::beamline::Geometry;
use crate::constants::Constants;
use crate::error::{Error, Result};
use crate::spin::{bloch_spinor, bloch_vector, SpinOperator};
use num_complex::Complex64;
use rayon::prelude::*;
use std::f64::consts::PI;

pub use kicks::{momentum_kicks, Kick};
pub use oam::{azimuthal_current, oam_lattice_expansion, LadderCoefficients, LatticeExpansion, LatticeFamily};

/// Transverse phase gradients of the two pairs.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KappaSpec {
    pub kappa_x: f64,
    pub kappa_y: f64,
    pub geometry: Geometry,
    /// Fields `B1..B4`; the first two belong to the x-field pair.
    pub fields: [f64; 4],
    pub divergence: f64,
}

fn kappa(geometry: Geometry, b_a: f64, b_b: f64, divergence: f64, scale: f64) -> f64 {
    let d = (b_a - b_b).abs();
    match geometry {
        Geometry::Parallelogram => scale * d * (1.0 + divergence),
        Geometry::Triangular => scale * d + scale * (b_a + b_b) * divergence,
    }
}

impl KappaSpec {
    pub fn from_fields(fields: [f64; 4], geometry: Geometry, divergence: f64, speed: f64, c: &Constants) -> Self {
        let scale = 2.0 * c.moment_abs() / (speed * c.hbar);
        KappaSpec {
            kappa_x: kappa(geometry, fields[2], fields[3], divergence, scale),
            kappa_y: kappa(geometry, fields[0], fields[1], divergence, scale),
            geometry,
            fields,
            divergence,
        }
    }

    /// Equal gradients on both axes.
    pub fn uniform(kappa: f64) -> Self {
        KappaSpec {
            kappa_x: kappa,
            kappa_y: kappa,
            geometry: Geometry::Parallelogram,
            fields: [0.0; 4],
            divergence: 0.0,
        }
    }

    /// Texture period `pi / kappa` along x and y.
    pub fn periods(&self) -> (f64, f64) {
        (PI / self.kappa_x, PI / self.kappa_y)
    }
}

/// Fields `B2, B3, B4` that focus both pairs on one plane with equal `|dB|`.
///
/// `distances` are the prism-centre to detector distances `L1 > L2 > L3 > L4 > 0`.
pub fn solve_checkerboard_fields(b1: f64, distances: [f64; 4]) -> Result<[f64; 3]> {
    let [l1, l2, l3, l4] = distances;
    if l1 == l2 {
        return Err(Error::DegenerateDistances(l1, l2));
    }
    if l3 == l4 {
        return Err(Error::DegenerateDistances(l3, l4));
    }
    if !(b1 > 0.0 && b1.is_finite()) {
        return Err(Error::invalid("b1", "must be positive"));
    }
    if !(l1 > l2 && l2 > l3 && l3 > l4 && l4 > 0.0) {
        return Err(Error::invalid("distances", "expected L1 > L2 > L3 > L4 > 0"));
    }
    let ratio = b1 * (l1 - l2) / (l2 * (l3 - l4));
    Ok([b1 * l1 / l2, ratio * l4, ratio * l3])
}

/// All four fields, scaled so the largest equals `b_max`.
pub fn checkerboard_fields_with_cap(b_max: f64, distances: [f64; 4]) -> Result<[f64; 4]> {
    let [b2, b3, b4] = solve_checkerboard_fields(1.0, distances)?;
    let largest = 1f64.max(b2).max(b3).max(b4);
    let b1 = b_max / largest;
    Ok([b1, b2 * b1, b3 * b1, b4 * b1])
}

/// Operator of both pairs as a function of the detector position.
pub fn u_pair(kappa_x: f64, kappa_y: f64, x: f64, y: f64) -> SpinOperator {
    let (sx, cx) = (kappa_x * x).sin_cos();
    let (sy, cy) = (kappa_y * y).sin_cos();
    u_pair_from(cx.into(), sx.into(), cy.into(), sy.into())
}

/// The matrix is bilinear in `(cos, sin)` of each axis; reused for derivatives and Fourier coefficients.
pub(crate) fn u_pair_from(cx: Complex64, sx: Complex64, cy: Complex64, sy: Complex64) -> SpinOperator {
    let i = Complex64::i();
    SpinOperator([
        [cx * cy - i * sx * sy, -sx * cy + i * cx * sy],
        [sx * cy + i * cx * sy, cx * cy + i * sx * sy],
    ])
}

/// Rectangular sampling grid, row-major with `x` varying fastest.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    pub nx: usize,
    pub ny: usize,
    pub x_range: (f64, f64),
    pub y_range: (f64, f64),
}

pub const DEFAULT_GRID_POINTS: usize = 256;

impl GridSpec {
    /// `n x n` samples over `[-pi/kappa, pi/kappa]` on both axes.
    pub fn unit_cell(kappa: &KappaSpec, n: usize) -> Self {
        let (px, py) = kappa.periods();
        GridSpec {
            nx: n,
            ny: n,
            x_range: (-px, px),
            y_range: (-py, py),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.nx < 2 || self.ny < 2 {
            return Err(Error::invalid("grid", "need at least two samples per axis"));
        }
        let ok = |r: (f64, f64)| r.0.is_finite() && r.1.is_finite() && r.1 > r.0;
        if !ok(self.x_range) || !ok(self.y_range) {
            return Err(Error::invalid("grid", "ranges must be finite and increasing"));
        }
        Ok(())
    }

    fn axis(n: usize, r: (f64, f64)) -> Vec<f64> {
        (0..n).map(|i| r.0 + (r.1 - r.0) * i as f64 / (n - 1) as f64).collect()
    }

    pub fn xs(&self) -> Vec<f64> {
        Self::axis(self.nx, self.x_range)
    }

    pub fn ys(&self) -> Vec<f64> {
        Self::axis(self.ny, self.y_range)
    }

    fn map<T: Send>(&self, f: impl Fn(f64, f64) -> T + Sync) -> Vec<T> {
        let xs = self.xs();
        let ys = self.ys();
        ys.par_iter().flat_map_iter(|&y| xs.iter().map(move |&x| (x, y)).collect::<Vec<_>>()).map(|(x, y)| f(x, y)).collect()
    }
}

/// Sampled detector-plane map.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldGrid {
    pub spec: GridSpec,
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    /// Polarisation `<sigma>` per point.
    pub bloch: Vec<[f64; 3]>,
    /// OAM density per point, in units of hbar.
    pub oam: Option<Vec<[f64; 3]>>,
    /// Azimuth of the transverse polarisation, rad.
    pub phase: Vec<f64>,
}

impl FieldGrid {
    pub fn len(&self) -> usize {
        self.bloch.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bloch.is_empty()
    }

    /// Coordinates of sample `k`.
    pub fn point(&self, k: usize) -> (f64, f64) {
        (self.x[k % self.spec.nx], self.y[k / self.spec.nx])
    }
}

/// Polarisation after both pairs for the incident Bloch angles.
pub fn bloch_texture(kappa: &KappaSpec, theta_in: f64, phi_in: f64, x: f64, y: f64) -> [f64; 3] {
    let (s2x, c2x) = (2.0 * kappa.kappa_x * x).sin_cos();
    let (s2y, c2y) = (2.0 * kappa.kappa_y * y).sin_cos();
    let (st, ct) = theta_in.sin_cos();
    let (sp, cp) = phi_in.sin_cos();
    let common = ct * c2y - st * sp * s2y;
    [
        st * cp * c2x + s2x * common,
        st * sp * c2y + ct * s2y,
        -st * cp * s2x + c2x * common,
    ]
}

fn validate_angles(theta_in: f64, phi_in: f64) -> Result<()> {
    if !(0.0..=PI).contains(&theta_in) || !phi_in.is_finite() {
        return Err(Error::invalid("theta_in", "Bloch angles must satisfy 0 <= theta <= pi"));
    }
    Ok(())
}

pub fn spin_texture(kappa: &KappaSpec, theta_in: f64, phi_in: f64, grid: &GridSpec) -> Result<FieldGrid> {
    validate_angles(theta_in, phi_in)?;
    grid.validate()?;
    let bloch = grid.map(|x, y| bloch_texture(kappa, theta_in, phi_in, x, y));
    let phase = bloch.iter().map(|b| b[1].atan2(b[0])).collect();
    Ok(FieldGrid {
        spec: *grid,
        x: grid.xs(),
        y: grid.ys(),
        bloch,
        oam: None,
        phase,
    })
}

/// Polarisation from applying [`u_pair`] to the incident spinor.
pub fn bloch_from_operator(kappa: &KappaSpec, theta_in: f64, phi_in: f64, x: f64, y: f64) -> [f64; 3] {
    bloch_vector(u_pair(kappa.kappa_x, kappa.kappa_y, x, y).apply(bloch_spinor(theta_in, phi_in)))
}

/// OAM density at `(x, y)` for equal gradients `kappa`; `carrier` toggles the `k0z` terms.
#[allow(clippy::too_many_arguments)]
pub fn oam_point(kappa: f64, k0z: f64, theta_in: f64, phi_in: f64, divergence: f64, carrier: bool, x: f64, y: f64) -> [f64; 3] {
    let (s2y, c2y) = (2.0 * kappa * y).sin_cos();
    let (st, ct) = theta_in.sin_cos();
    let (sp, cp) = phi_in.sin_cos();
    let bracket = ct * s2y + st * (cp + sp * c2y);
    let k0 = if carrier { k0z } else { 0.0 };
    [
        k0 * y + kappa * y / (1.0 + divergence) * bracket,
        -k0 * x - kappa * x / (1.0 + divergence) * bracket,
        kappa * (y * ct * s2y + st * (y * sp * c2y + x * cp)),
    ]
}

/// Polarisation and OAM density over the grid. Requires equal gradients on both axes.
pub fn oam_density(
    kappa: &KappaSpec,
    k0z: f64,
    theta_in: f64,
    phi_in: f64,
    grid: &GridSpec,
    subtract_carrier: bool,
) -> Result<FieldGrid> {
    if ((kappa.kappa_x - kappa.kappa_y) / kappa.kappa_x).abs() > 1e-9 {
        return Err(Error::invalid("kappa", "OAM density needs equal gradients on both axes"));
    }
    let mut out = spin_texture(kappa, theta_in, phi_in, grid)?;
    let k = kappa.kappa_x;
    out.oam = Some(grid.map(|x, y| oam_point(k, k0z, theta_in, phi_in, kappa.divergence, !subtract_carrier, x, y)));
    Ok(out)
}
