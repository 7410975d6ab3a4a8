//! Two-component spinors and 2x2 complex operators.

use num_complex::Complex64;
use std::ops::{Add, Mul, Neg, Sub};

pub type Spinor = [Complex64; 2];

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);
const I: Complex64 = Complex64::new(0.0, 1.0);

/// Complex 2x2 matrix acting on the spin subspace, row-major.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpinOperator(pub [[Complex64; 2]; 2]);

impl SpinOperator {
    pub fn identity() -> Self {
        SpinOperator([[ONE, ZERO], [ZERO, ONE]])
    }
    pub fn zero() -> Self {
        SpinOperator([[ZERO, ZERO], [ZERO, ZERO]])
    }
    pub fn sigma_x() -> Self {
        SpinOperator([[ZERO, ONE], [ONE, ZERO]])
    }
    pub fn sigma_y() -> Self {
        SpinOperator([[ZERO, -I], [I, ZERO]])
    }
    pub fn sigma_z() -> Self {
        SpinOperator([[ONE, ZERO], [ZERO, -ONE]])
    }
    /// Raising operator `(sigma_x + i sigma_y) / 2`.
    pub fn raising() -> Self {
        SpinOperator([[ZERO, ONE], [ZERO, ZERO]])
    }
    /// Lowering operator `(sigma_x - i sigma_y) / 2`.
    pub fn lowering() -> Self {
        SpinOperator([[ZERO, ZERO], [ONE, ZERO]])
    }

    /// `n . sigma` for a real 3-vector `n`.
    pub fn pauli_along(n: [f64; 3]) -> Self {
        Self::sigma_x().scale(n[0].into()) + Self::sigma_y().scale(n[1].into()) + Self::sigma_z().scale(n[2].into())
    }

    /// `cos(angle) + i sin(angle) n . sigma`.
    pub fn rotation(axis: [f64; 3], angle: f64) -> Self {
        let (s, c) = angle.sin_cos();
        Self::identity().scale(c.into()) + Self::pauli_along(axis).scale(I * s)
    }

    pub fn from_rows(rows: [[Complex64; 2]; 2]) -> Self {
        SpinOperator(rows)
    }

    pub fn scale(self, k: Complex64) -> Self {
        let m = self.0;
        SpinOperator([[m[0][0] * k, m[0][1] * k], [m[1][0] * k, m[1][1] * k]])
    }

    pub fn adjoint(self) -> Self {
        let m = self.0;
        SpinOperator([[m[0][0].conj(), m[1][0].conj()], [m[0][1].conj(), m[1][1].conj()]])
    }

    pub fn trace(self) -> Complex64 {
        self.0[0][0] + self.0[1][1]
    }

    pub fn det(self) -> Complex64 {
        let m = self.0;
        m[0][0] * m[1][1] - m[0][1] * m[1][0]
    }

    pub fn apply(self, v: Spinor) -> Spinor {
        let m = self.0;
        [m[0][0] * v[0] + m[0][1] * v[1], m[1][0] * v[0] + m[1][1] * v[1]]
    }

    /// Largest entrywise modulus.
    pub fn max_abs(self) -> f64 {
        self.0.iter().flatten().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Largest entrywise distance to `other`.
    pub fn distance(self, other: Self) -> f64 {
        (self - other).max_abs()
    }

    /// Distance after removing the best-matching global phase of `other`.
    pub fn distance_up_to_phase(self, other: Self) -> f64 {
        let overlap = (other.adjoint() * self).trace();
        if overlap.norm() == 0.0 {
            return self.distance(other);
        }
        let phase = overlap / overlap.norm();
        self.distance(other.scale(phase))
    }
}

impl Mul for SpinOperator {
    type Output = SpinOperator;
    fn mul(self, rhs: SpinOperator) -> SpinOperator {
        let (a, b) = (self.0, rhs.0);
        let mut out = [[ZERO; 2]; 2];
        for (i, row) in out.iter_mut().enumerate() {
            for (j, cell) in row.iter_mut().enumerate() {
                *cell = a[i][0] * b[0][j] + a[i][1] * b[1][j];
            }
        }
        SpinOperator(out)
    }
}

impl Add for SpinOperator {
    type Output = SpinOperator;
    fn add(self, rhs: SpinOperator) -> SpinOperator {
        let (a, b) = (self.0, rhs.0);
        SpinOperator([[a[0][0] + b[0][0], a[0][1] + b[0][1]], [a[1][0] + b[1][0], a[1][1] + b[1][1]]])
    }
}

impl Sub for SpinOperator {
    type Output = SpinOperator;
    fn sub(self, rhs: SpinOperator) -> SpinOperator {
        self + (-rhs)
    }
}

impl Neg for SpinOperator {
    type Output = SpinOperator;
    fn neg(self) -> SpinOperator {
        self.scale(-ONE)
    }
}

/// Spinor `cos(theta/2)|up_z> + e^{i phi} sin(theta/2)|down_z>`.
pub fn bloch_spinor(theta: f64, phi: f64) -> Spinor {
    let (s, c) = (theta / 2.0).sin_cos();
    [Complex64::new(c, 0.0), Complex64::from_polar(s, phi)]
}

/// Expectation values of the three Pauli matrices.
pub fn bloch_vector(v: Spinor) -> [f64; 3] {
    let cross = v[0].conj() * v[1];
    [
        2.0 * cross.re,
        2.0 * cross.im,
        v[0].norm_sqr() - v[1].norm_sqr(),
    ]
}

pub fn norm_sqr(v: Spinor) -> f64 {
    v[0].norm_sqr() + v[1].norm_sqr()
}

/// Largest entrywise deviation of `U^dagger U` from the identity.
pub fn unitarity_check(u: SpinOperator) -> f64 {
    (u.adjoint() * u).distance(SpinOperator::identity())
}
