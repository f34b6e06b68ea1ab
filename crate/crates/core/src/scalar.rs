//! Number types the closed-form evaluators are generic over.
//!
//! Every closed form in this crate is written once against [`Scalar`]. Plain
//! `f64` gives the fast path, [`Tracked`] carries a first-order rounding-error
//! bound alongside the value, and exact rational types (implemented in tests)
//! let the same formula code be checked without any rounding at all.

use std::ops::{Add, Div, Mul, Neg, Sub};

/// Field operations plus the two power primitives the annuity formulas need.
pub trait Scalar:
    Clone + Add<Output = Self> + Sub<Output = Self> + Mul<Output = Self> + Div<Output = Self> + Neg<Output = Self>
{
    /// Converts an input value, treated as exact.
    fn from_f64(x: f64) -> Self;

    fn to_f64(&self) -> f64;

    /// `self^k`.
    fn powi(&self, k: u32) -> Self;

    /// `(1 + self)^k - 1`, the accumulation factor minus one.
    fn compound_minus_one(&self, k: u32) -> Self {
        (Self::one() + self.clone()).powi(k) - Self::one()
    }

    fn one() -> Self {
        Self::from_f64(1.0)
    }

    fn from_u32(n: u32) -> Self {
        Self::from_f64(f64::from(n))
    }
}

impl Scalar for f64 {
    fn from_f64(x: f64) -> Self {
        x
    }

    fn to_f64(&self) -> f64 {
        *self
    }

    fn powi(&self, k: u32) -> Self {
        f64::powi(*self, k as i32)
    }

    fn compound_minus_one(&self, k: u32) -> Self {
        (f64::from(k) * self.ln_1p()).exp_m1()
    }
}

const UNIT_ROUNDOFF: f64 = f64::EPSILON / 2.0;

/// A binary64 value with a running bound on its absolute rounding error.
///
/// The bound is the standard first-order running error estimate: each
/// operation adds the propagated input errors and half an ulp of its own
/// result. Inputs built with [`Scalar::from_f64`] carry zero error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tracked {
    pub value: f64,
    pub error: f64,
}

impl Tracked {
    pub fn exact(value: f64) -> Self {
        Tracked { value, error: 0.0 }
    }

    fn rounded(value: f64, propagated: f64) -> Self {
        Tracked { value, error: propagated + UNIT_ROUNDOFF * value.abs() }
    }

    /// Error bound relative to `max(1, |value|)`.
    pub fn relative_error(&self) -> f64 {
        self.error / self.value.abs().max(1.0)
    }

    /// Finite, with a bound within `tol` of the value's own magnitude.
    pub fn certified(&self, tol: f64) -> bool {
        self.value.is_finite() && self.error <= tol * self.value.abs()
    }
}

impl Add for Tracked {
    type Output = Tracked;
    fn add(self, rhs: Tracked) -> Tracked {
        Tracked::rounded(self.value + rhs.value, self.error + rhs.error)
    }
}

impl Sub for Tracked {
    type Output = Tracked;
    fn sub(self, rhs: Tracked) -> Tracked {
        Tracked::rounded(self.value - rhs.value, self.error + rhs.error)
    }
}

impl Mul for Tracked {
    type Output = Tracked;
    fn mul(self, rhs: Tracked) -> Tracked {
        let propagated = self.value.abs() * rhs.error + rhs.value.abs() * self.error + self.error * rhs.error;
        Tracked::rounded(self.value * rhs.value, propagated)
    }
}

impl Div for Tracked {
    type Output = Tracked;
    fn div(self, rhs: Tracked) -> Tracked {
        let value = self.value / rhs.value;
        let margin = rhs.value.abs() - rhs.error;
        if margin <= 0.0 {
            return Tracked { value, error: f64::INFINITY };
        }
        Tracked::rounded(value, (self.error + value.abs() * rhs.error) / margin)
    }
}

impl Neg for Tracked {
    type Output = Tracked;
    fn neg(self) -> Tracked {
        Tracked { value: -self.value, error: self.error }
    }
}

impl Scalar for Tracked {
    fn from_f64(x: f64) -> Self {
        Tracked::exact(x)
    }

    fn to_f64(&self) -> f64 {
        self.value
    }

    fn powi(&self, k: u32) -> Self {
        let value = f64::powi(self.value, k as i32);
        if k == 0 {
            return Tracked::exact(1.0);
        }
        let propagated = f64::from(k) * self.value.abs().powi(k as i32 - 1) * self.error;
        // Repeated squaring rounds about twice per bit of the exponent.
        let steps = f64::from(2 * (32 - k.leading_zeros()) + 1);
        Tracked { value, error: propagated + steps * UNIT_ROUNDOFF * value.abs() }
    }

    fn compound_minus_one(&self, k: u32) -> Self {
        let log_growth = self.value.ln_1p();
        let value = (f64::from(k) * log_growth).exp_m1();
        let growth = value + 1.0;
        let kf = f64::from(k);
        let propagated = kf * growth / (1.0 + self.value) * self.error;
        let exponent_rounding = growth * 2.0 * UNIT_ROUNDOFF * (kf * log_growth).abs();
        Tracked { value, error: propagated + exponent_rounding + 2.0 * UNIT_ROUNDOFF * value.abs() }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn compound_minus_one_matches_powi() {
        for &x in &[-0.05, 0.0, 1e-12, 0.01, 0.25] {
            for k in 0..50 {
                let a = <f64 as Scalar>::compound_minus_one(&x, k);
                let b = (1.0 + x).powi(k as i32) - 1.0;
                assert!((a - b).abs() <= 1e-13 * b.abs().max(1.0), "x={x} k={k}");
            }
        }
    }

    #[test]
    fn tracked_value_follows_plain_arithmetic() {
        let a = Tracked::exact(0.1);
        let b = Tracked::exact(3.0);
        let c = (a + b) * b / (b - a);
        assert_eq!(c.value, (0.1 + 3.0) * 3.0 / (3.0 - 0.1));
        assert!(c.error > 0.0 && c.error < 1e-14);
    }

    #[test]
    fn cancellation_inflates_relative_bound() {
        let big = Tracked::exact(1e8) * Tracked::exact(1.000_000_1);
        let diff = big - Tracked::exact(1e8);
        assert!(diff.error / diff.value.abs() > 1e-10);
    }

    #[test]
    fn division_by_uncertain_zero_is_unbounded() {
        let tiny = Tracked { value: 1e-20, error: 1e-18 };
        assert!((Tracked::exact(1.0) / tiny).error.is_infinite());
    }
}
