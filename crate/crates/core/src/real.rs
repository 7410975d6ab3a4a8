//! Scalar abstraction so the exact tracer can run in `f64` or double-double.
//!
//! Phase differences between the two spin paths are ~1e-10 of the eikonal
//! itself, so the oracle needs roughly 30 significant digits.

use num_traits::Float;
pub use twofloat::TwoFloat;

/// Double-double scalar (about 32 significant digits).
pub type DoubleDouble = TwoFloat;

pub trait Real: Float + From<f64> + std::fmt::Debug + Send + Sync {
    fn lit(x: f64) -> Self {
        <Self as From<f64>>::from(x)
    }
    fn to_f64_lossy(self) -> f64;
    fn pi() -> Self;
    /// Sine and cosine accurate to the working precision.
    fn sin_cos_acc(self) -> (Self, Self);
    fn asin_acc(self) -> Self;
    /// Division correct to the working precision.
    fn quot(self, rhs: Self) -> Self;
}

impl Real for f64 {
    fn to_f64_lossy(self) -> f64 {
        self
    }
    fn pi() -> Self {
        std::f64::consts::PI
    }
    fn sin_cos_acc(self) -> (Self, Self) {
        self.sin_cos()
    }
    fn asin_acc(self) -> Self {
        self.asin()
    }
    fn quot(self, rhs: Self) -> Self {
        self / rhs
    }
}

impl Real for TwoFloat {
    fn to_f64_lossy(self) -> f64 {
        self.hi() + self.lo()
    }
    fn pi() -> Self {
        twofloat::consts::PI
    }
    fn sin_cos_acc(self) -> (Self, Self) {
        dd_sin_cos(self)
    }
    fn asin_acc(self) -> Self {
        dd_asin(self)
    }
    fn quot(self, rhs: Self) -> Self {
        dd_div(self, rhs)
    }
}

// `TwoFloat / TwoFloat` in twofloat 0.8 only keeps f64 precision, so divide longhand.
fn dd_div(a: TwoFloat, b: TwoFloat) -> TwoFloat {
    let q1 = a.hi() / b.hi();
    let r = a - b * q1;
    let q2 = r.hi() / b.hi();
    let r = r - b * q2;
    let q3 = r.hi() / b.hi();
    TwoFloat::from(q1) + q2 + q3
}

fn dd_sin_cos(x: TwoFloat) -> (TwoFloat, TwoFloat) {
    let pi = twofloat::consts::PI;
    let half_pi = pi / 2.0;
    let q = (x / half_pi).hi().round();
    let r = x - half_pi * q;
    // |r| <= pi/4; halve until the series converges fast, then double back.
    let mut halvings = 0;
    let mut t = r;
    while t.hi().abs() > 0.1 {
        t /= 2.0;
        halvings += 1;
    }
    let t2 = t * t;
    let mut s = TwoFloat::from(0.0);
    let mut term = t;
    let mut n = 1.0;
    while term.hi().abs() > 1e-40 {
        s += term;
        term = -term * t2 / ((n + 1.0) * (n + 2.0));
        n += 2.0;
    }
    let mut c = (TwoFloat::from(1.0) - s * s).sqrt();
    let mut sn = s;
    for _ in 0..halvings {
        let s2 = TwoFloat::from(2.0) * sn * c;
        let c2 = c * c - sn * sn;
        sn = s2;
        c = c2;
    }
    match (q as i64).rem_euclid(4) {
        0 => (sn, c),
        1 => (c, -sn),
        2 => (-sn, -c),
        _ => (-c, sn),
    }
}

fn dd_asin(s: TwoFloat) -> TwoFloat {
    let mut theta = TwoFloat::from(s.hi().asin());
    for _ in 0..3 {
        let (sn, cs) = dd_sin_cos(theta);
        if cs.hi() == 0.0 {
            break;
        }
        theta -= dd_div(sn - s, cs);
    }
    theta
}
