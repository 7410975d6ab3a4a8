//! Local expansions of the two-pair operator around the lattice points
//! `(m pi / kappa, n pi / kappa)` and the azimuthal probability current.

use super::u_pair_from;
use crate::constants::Constants;
use crate::error::{Error, Result};
use crate::spin::{SpinOperator, Spinor};
use num_complex::Complex64;
use std::f64::consts::PI;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LatticeFamily {
    /// Both indices integer.
    Integer,
    /// Both indices half-odd.
    HalfOdd,
    /// `m` half-odd, `n` integer.
    MixedX,
    /// `m` integer, `n` half-odd.
    MixedY,
}

/// Components of an operator on `1, sigma_z, sigma_+, sigma_-`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LadderCoefficients {
    pub identity: Complex64,
    pub sigma_z: Complex64,
    pub raising: Complex64,
    pub lowering: Complex64,
}

impl LadderCoefficients {
    pub fn of(op: SpinOperator) -> Self {
        let m = op.0;
        LadderCoefficients {
            identity: (m[0][0] + m[1][1]) / 2.0,
            sigma_z: (m[0][0] - m[1][1]) / 2.0,
            raising: m[0][1],
            lowering: m[1][0],
        }
    }
}

/// `U ~ zeroth + kappa r (l_+ plus + l_- minus)` with the global phase removed.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LatticeExpansion {
    pub family: LatticeFamily,
    /// Global phase divided out of the exact operator.
    pub global_phase: Complex64,
    pub zeroth: SpinOperator,
    /// Coefficient of `kappa r e^{+i phi}`.
    pub plus: SpinOperator,
    /// Coefficient of `kappa r e^{-i phi}`.
    pub minus: SpinOperator,
}

impl LatticeExpansion {
    /// Evaluate the truncated expansion at polar offset `(r, phi)` including the global phase.
    pub fn evaluate(&self, kappa: f64, r: f64, phi: f64) -> SpinOperator {
        let lp = Complex64::from_polar(kappa * r, phi);
        let lm = lp.conj();
        (self.zeroth + self.plus.scale(lp) + self.minus.scale(lm)).scale(self.global_phase)
    }

    pub fn plus_ladder(&self) -> LadderCoefficients {
        LadderCoefficients::of(self.plus)
    }

    pub fn minus_ladder(&self) -> LadderCoefficients {
        LadderCoefficients::of(self.minus)
    }
}

fn half_units(v: f64) -> Result<i64> {
    let twice = 2.0 * v;
    let r = twice.round();
    if !v.is_finite() || (twice - r).abs() > 1e-9 {
        return Err(Error::InvalidLatticeIndex(v));
    }
    Ok(r as i64)
}

/// Expansion of the equal-gradient operator around lattice point `(m, n)` to first order in `kappa r`.
pub fn oam_lattice_expansion(m: f64, n: f64) -> Result<LatticeExpansion> {
    let (hm, hn) = (half_units(m)?, half_units(n)?);
    let family = match (hm.rem_euclid(2), hn.rem_euclid(2)) {
        (0, 0) => LatticeFamily::Integer,
        (1, 1) => LatticeFamily::HalfOdd,
        (1, 0) => LatticeFamily::MixedX,
        _ => LatticeFamily::MixedY,
    };
    let trig = |h: i64| {
        let (s, c) = (h as f64 * PI / 2.0).sin_cos();
        (Complex64::from(c.round()), Complex64::from(s.round()))
    };
    let (cx, sx) = trig(hm);
    let (cy, sy) = trig(hn);
    let u0 = u_pair_from(cx, sx, cy, sy);
    let d_x = u_pair_from(-sx, cx, cy, sy);
    let d_y = u_pair_from(cx, sx, -sy, cy);
    let i = Complex64::i();
    let canonical = match family {
        LatticeFamily::Integer => SpinOperator::identity(),
        LatticeFamily::HalfOdd => SpinOperator::sigma_z(),
        LatticeFamily::MixedX => SpinOperator::sigma_y().scale(i),
        LatticeFamily::MixedY => SpinOperator::sigma_x().scale(i),
    };
    let (r, c) = (0..4)
        .map(|k| (k / 2, k % 2))
        .find(|&(r, c)| canonical.0[r][c].norm() > 0.5)
        .expect("canonical forms are non-zero");
    let global_phase = u0.0[r][c] / canonical.0[r][c];
    let inv = global_phase.inv();
    Ok(LatticeExpansion {
        family,
        global_phase,
        zeroth: u0.scale(inv),
        plus: (d_x - d_y.scale(i)).scale(inv * 0.5),
        minus: (d_x + d_y.scale(i)).scale(inv * 0.5),
    })
}

/// Azimuthal probability current on a circle of radius `r` around the axis.
///
/// `samples` holds the envelope `f` at equally spaced azimuths over a full turn;
/// the wave is `f e^{i ell phi}`. Returns `J_phi` at each sample, in units of
/// `|f|^2` times m/s.
pub fn azimuthal_current(samples: &[Spinor], r: f64, ell: f64, c: &Constants) -> Result<Vec<f64>> {
    if !(r > 0.0) {
        return Err(Error::SingularAxis(r));
    }
    let n = samples.len();
    if n < 3 {
        return Err(Error::invalid("samples", "need at least three azimuthal samples"));
    }
    let step = 2.0 * PI / n as f64;
    let pre = c.hbar / (c.neutron_mass * r);
    Ok((0..n)
        .map(|k| {
            let f = samples[k];
            let next = samples[(k + 1) % n];
            let prev = samples[(k + n - 1) % n];
            let mut flow = 0.0;
            let mut density = 0.0;
            for s in 0..2 {
                let d = (next[s] - prev[s]) / (2.0 * step);
                flow += (f[s].conj() * d).im;
                density += f[s].norm_sqr();
            }
            pre * (flow + ell * density)
        })
        .collect())
}
