//! Plane-wave decomposition of the two-pair operator.

use super::u_pair_from;
use crate::spin::{SpinOperator, Spinor};
use num_complex::Complex64;

/// One outgoing plane-wave component.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Kick {
    /// Transverse wavevector transfer `(dk_x, dk_y)`, 1/m.
    pub dk: [f64; 2],
    /// Operator coefficient of `exp(i dk . r)`.
    pub operator: SpinOperator,
    pub amplitude: Spinor,
}

/// Split `U(x, y) psi` into plane waves `exp(i (s_x kappa_x x + s_y kappa_y y))`.
///
/// Components with coinciding transfers (zero gradients) are merged.
pub fn momentum_kicks(kappa_x: f64, kappa_y: f64, psi: Spinor) -> Vec<Kick> {
    let half = Complex64::from(0.5);
    let mut out: Vec<Kick> = Vec::with_capacity(4);
    for sx in [1.0, -1.0] {
        for sy in [1.0, -1.0] {
            // cos a -> 1/2 and sin a -> s / (2i) for the e^{i s a} harmonic.
            let sin_x = Complex64::new(0.0, -sx / 2.0);
            let sin_y = Complex64::new(0.0, -sy / 2.0);
            let op = u_pair_from(half, sin_x, half, sin_y);
            let dk = [sx * kappa_x, sy * kappa_y];
            match out.iter_mut().find(|k| k.dk == dk) {
                Some(k) => k.operator = k.operator + op,
                None => out.push(Kick { dk, operator: op, amplitude: [0.0.into(); 2] }),
            }
        }
    }
    for k in &mut out {
        k.amplitude = k.operator.apply(psi);
    }
    out
}

/// Recombine the components at `(x, y)`.
pub fn resum(kicks: &[Kick], x: f64, y: f64) -> Spinor {
    let mut acc = [Complex64::from(0.0); 2];
    for k in kicks {
        let w = Complex64::from_polar(1.0, k.dk[0] * x + k.dk[1] * y);
        acc[0] += k.amplitude[0] * w;
        acc[1] += k.amplitude[1] * w;
    }
    acc
}
