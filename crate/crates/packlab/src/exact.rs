//! Checked exact arithmetic for the packing engine: 128-bit integers and
//! Gaussian integers over a fixed common denominator.
//!
//! Reflections act by integer-linear combinations, so a quadruple whose
//! curvature-centers share a denominator keeps that denominator forever.
//! Storing scaled Gaussian integers keeps equality exact and cheap.

use num_rational::Ratio;
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq, Clone, Copy)]
#[error("integer overflow in exact arithmetic (128-bit width exceeded)")]
pub struct Overflow;

/// A Gaussian integer with checked arithmetic.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct GaussInt {
    pub re: i128,
    pub im: i128,
}

impl GaussInt {
    pub const ZERO: GaussInt = GaussInt { re: 0, im: 0 };

    pub fn new(re: i128, im: i128) -> Self {
        GaussInt { re, im }
    }

    pub fn checked_add(self, other: GaussInt) -> Result<GaussInt, Overflow> {
        Ok(GaussInt {
            re: self.re.checked_add(other.re).ok_or(Overflow)?,
            im: self.im.checked_add(other.im).ok_or(Overflow)?,
        })
    }

    pub fn checked_sub(self, other: GaussInt) -> Result<GaussInt, Overflow> {
        Ok(GaussInt {
            re: self.re.checked_sub(other.re).ok_or(Overflow)?,
            im: self.im.checked_sub(other.im).ok_or(Overflow)?,
        })
    }

    pub fn checked_mul_scalar(self, k: i128) -> Result<GaussInt, Overflow> {
        Ok(GaussInt {
            re: self.re.checked_mul(k).ok_or(Overflow)?,
            im: self.im.checked_mul(k).ok_or(Overflow)?,
        })
    }

    pub fn checked_mul(self, other: GaussInt) -> Result<GaussInt, Overflow> {
        let rr = self.re.checked_mul(other.re).ok_or(Overflow)?;
        let ii = self.im.checked_mul(other.im).ok_or(Overflow)?;
        let ri = self.re.checked_mul(other.im).ok_or(Overflow)?;
        let ir = self.im.checked_mul(other.re).ok_or(Overflow)?;
        Ok(GaussInt {
            re: rr.checked_sub(ii).ok_or(Overflow)?,
            im: ri.checked_add(ir).ok_or(Overflow)?,
        })
    }

    pub fn checked_sq(self) -> Result<GaussInt, Overflow> {
        self.checked_mul(self)
    }
}

/// A complex rational: exact value of a curvature-center.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct ComplexRational {
    pub re: Ratio<i128>,
    pub im: Ratio<i128>,
}

impl ComplexRational {
    pub fn new(re: Ratio<i128>, im: Ratio<i128>) -> Self {
        ComplexRational { re, im }
    }

    pub fn from_scaled(v: GaussInt, den: i128) -> Self {
        ComplexRational {
            re: Ratio::new(v.re, den),
            im: Ratio::new(v.im, den),
        }
    }

    pub fn to_f64(&self) -> (f64, f64) {
        (ratio_to_f64(self.re), ratio_to_f64(self.im))
    }
}

pub fn ratio_to_f64(r: Ratio<i128>) -> f64 {
    (*r.numer() as f64) / (*r.denom() as f64)
}

/// Integer square root of a non-negative value; None when not a perfect square.
pub fn perfect_sqrt(n: i128) -> Option<i128> {
    if n < 0 {
        return None;
    }
    if n == 0 {
        return Some(0);
    }
    let mut r = (n as f64).sqrt() as i128;
    while r > 0 && r.checked_mul(r).map_or(true, |sq| sq > n) {
        r -= 1;
    }
    while (r + 1).checked_mul(r + 1).map_or(false, |sq| sq <= n) {
        r += 1;
    }
    if r.checked_mul(r) == Some(n) {
        Some(r)
    } else {
        None
    }
}
