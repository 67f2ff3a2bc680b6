//! Minimal scalar abstraction so the per-face curvature kernel can be evaluated
//! either on plain `f64` or on forward-mode duals carrying the derivative with
//! respect to the nine coordinates of one triangle.

use std::ops::{Add, Div, Mul, Neg, Sub};

pub trait Scalar:
    Copy
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
{
    fn cst(v: f64) -> Self;
    fn val(self) -> f64;
    fn sqrt(self) -> Self;
}

impl Scalar for f64 {
    #[inline]
    fn cst(v: f64) -> Self {
        v
    }
    #[inline]
    fn val(self) -> f64 {
        self
    }
    #[inline]
    fn sqrt(self) -> Self {
        f64::sqrt(self)
    }
}

/// Value plus gradient with respect to 9 independent inputs.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Dual9 {
    pub v: f64,
    pub d: [f64; 9],
}

impl Dual9 {
    /// The `k`-th independent variable with value `v`.
    pub fn var(v: f64, k: usize) -> Self {
        let mut d = [0.0; 9];
        d[k] = 1.0;
        Dual9 { v, d }
    }

    #[inline]
    fn scale_add(a: &[f64; 9], sa: f64, b: &[f64; 9], sb: f64) -> [f64; 9] {
        let mut d = [0.0; 9];
        for k in 0..9 {
            d[k] = a[k] * sa + b[k] * sb;
        }
        d
    }
}

impl Add for Dual9 {
    type Output = Self;
    #[inline]
    fn add(self, o: Self) -> Self {
        Dual9 {
            v: self.v + o.v,
            d: Self::scale_add(&self.d, 1.0, &o.d, 1.0),
        }
    }
}

impl Sub for Dual9 {
    type Output = Self;
    #[inline]
    fn sub(self, o: Self) -> Self {
        Dual9 {
            v: self.v - o.v,
            d: Self::scale_add(&self.d, 1.0, &o.d, -1.0),
        }
    }
}

impl Mul for Dual9 {
    type Output = Self;
    #[inline]
    fn mul(self, o: Self) -> Self {
        Dual9 {
            v: self.v * o.v,
            d: Self::scale_add(&self.d, o.v, &o.d, self.v),
        }
    }
}

impl Div for Dual9 {
    type Output = Self;
    #[inline]
    fn div(self, o: Self) -> Self {
        let inv = 1.0 / o.v;
        let q = self.v * inv;
        Dual9 {
            v: q,
            d: Self::scale_add(&self.d, inv, &o.d, -q * inv),
        }
    }
}

impl Neg for Dual9 {
    type Output = Self;
    #[inline]
    fn neg(self) -> Self {
        let mut d = self.d;
        d.iter_mut().for_each(|x| *x = -*x);
        Dual9 { v: -self.v, d }
    }
}

impl Scalar for Dual9 {
    #[inline]
    fn cst(v: f64) -> Self {
        Dual9 { v, d: [0.0; 9] }
    }
    #[inline]
    fn val(self) -> f64 {
        self.v
    }
    #[inline]
    fn sqrt(self) -> Self {
        let s = self.v.sqrt();
        let k = 0.5 / s;
        let mut d = self.d;
        d.iter_mut().for_each(|x| *x *= k);
        Dual9 { v: s, d }
    }
}

pub type V3<T> = [T; 3];

#[inline]
pub fn sub<T: Scalar>(a: &V3<T>, b: &V3<T>) -> V3<T> {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

#[inline]
pub fn dot<T: Scalar>(a: &V3<T>, b: &V3<T>) -> T {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

#[inline]
pub fn cross<T: Scalar>(a: &V3<T>, b: &V3<T>) -> V3<T> {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

#[inline]
pub fn scale<T: Scalar>(a: &V3<T>, s: T) -> V3<T> {
    [a[0] * s, a[1] * s, a[2] * s]
}
