//! Interest-rate records and the deterministic transformations among them.
//!
//! All derived quantities are computed once at construction, so a value of
//! any of these types is always internally consistent.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

fn check_rate(name: &str, rate: f64) -> Result<()> {
    if !rate.is_finite() || 1.0 + rate <= 0.0 {
        return Err(Error::domain(format!("{name} = {rate} requires 1 + {name} > 0")));
    }
    Ok(())
}

/// A fixed annual effective rate `j` with its discount rate and factor.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FixedRate {
    pub j: f64,
    /// `d = j / (1 + j)`
    pub d: f64,
    /// `v = 1 / (1 + j)`
    pub v: f64,
}

impl FixedRate {
    pub fn new(j: f64) -> Result<Self> {
        check_rate("j", j)?;
        Ok(FixedRate { j, d: j / (1.0 + j), v: 1.0 / (1.0 + j) })
    }

    /// Annual accumulation factor `1 + j`.
    pub fn growth(&self) -> f64 {
        1.0 + self.j
    }
}

/// Convenience alias for [`FixedRate::new`].
pub fn derive_fixed(j: f64) -> Result<FixedRate> {
    FixedRate::new(j)
}

/// First two moments of an i.i.d. annual rate and the rates derived from them.
///
/// `mu = E(1 + i)`, `m = E((1 + i)^2)`, `1 + f = m`, `1 + r = (1 + f) / (1 + j)`
/// and `ell = s2 / (1 + j)^2`. Only the variance `s2` is stored, never `s`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StochasticRateSpec {
    pub j: f64,
    pub s2: f64,
    pub mu: f64,
    pub m: f64,
    pub f: f64,
    pub r: f64,
    pub ell: f64,
}

impl StochasticRateSpec {
    pub fn new(j: f64, s2: f64) -> Result<Self> {
        check_rate("j", j)?;
        if !s2.is_finite() || s2 < 0.0 {
            return Err(Error::domain(format!("rate variance s2 = {s2} must be >= 0")));
        }
        let mu = 1.0 + j;
        Ok(StochasticRateSpec {
            j,
            s2,
            mu,
            m: mu * mu + s2,
            f: 2.0 * j + j * j + s2,
            r: j + s2 / mu,
            ell: s2 / (mu * mu),
        })
    }

    /// The rate with deterministic behaviour of the mean, `FixedRate(j)`.
    pub fn mean_rate(&self) -> FixedRate {
        FixedRate::new(self.j).expect("validated at construction")
    }

    /// `FixedRate(f)`; `1 + f = m > 0` always holds.
    pub fn second_moment_rate(&self) -> FixedRate {
        FixedRate::new(self.f).expect("1 + f = m > 0")
    }

    /// `FixedRate(r)`; `r >= j > -1`.
    pub fn cross_rate(&self) -> FixedRate {
        FixedRate::new(self.r).expect("r >= j")
    }

    /// Standard deviation of the annual rate.
    pub fn sd(&self) -> f64 {
        self.s2.sqrt()
    }
}

pub fn derive_stochastic(j: f64, s2: f64) -> Result<StochasticRateSpec> {
    StochasticRateSpec::new(j, s2)
}

/// Auxiliary rates for payments growing at rate `u` (ratio `q = 1 + u`).
///
/// `1 + u = (1 + j)(1 + t)`, `1 + f = (1 + u)^2 (1 + h)` and
/// `1 + f = (1 + j)^2 (1 + t)(1 + w)`. `h` and `w` are often negative.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GeometricAux {
    pub u: f64,
    pub t: f64,
    pub h: f64,
    pub w: f64,
}

impl GeometricAux {
    pub fn new(spec: &StochasticRateSpec, u: f64) -> Result<Self> {
        check_rate("u", u)?;
        let growth = 1.0 + u;
        let t = growth / spec.mu - 1.0;
        let h = spec.m / (growth * growth) - 1.0;
        let w = spec.m / (spec.mu * spec.mu * (1.0 + t)) - 1.0;
        Ok(GeometricAux { u, t, h, w })
    }
}

pub fn derive_geometric_aux(spec: &StochasticRateSpec, u: f64) -> Result<GeometricAux> {
    GeometricAux::new(spec, u)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol * b.abs().max(1e-300)
    }

    #[test]
    fn fixed_examples() {
        let zero = FixedRate::new(0.0).unwrap();
        assert_eq!((zero.d, zero.v), (0.0, 1.0));

        let ten = FixedRate::new(0.1).unwrap();
        assert!(close(ten.d, 1.0 / 11.0, 1e-15));
        assert!(close(ten.v, 1.0 / 1.1, 1e-15));

        let half = FixedRate::new(-0.5).unwrap();
        assert_eq!((half.d, half.v), (-1.0, 2.0));
    }

    #[test]
    fn fixed_rejects_rates_at_or_below_minus_one() {
        assert!(matches!(FixedRate::new(-1.0), Err(Error::Domain(_))));
        assert!(FixedRate::new(-1.5).is_err());
        assert!(FixedRate::new(f64::NAN).is_err());
    }

    #[test]
    fn stochastic_examples() {
        let s = StochasticRateSpec::new(0.1, 0.0).unwrap();
        assert!(close(s.f, 0.21, 1e-15));
        assert_eq!(s.r, 0.1);
        assert_eq!(s.ell, 0.0);

        let s = StochasticRateSpec::new(0.1, 0.04).unwrap();
        assert!(close(s.mu, 1.1, 1e-15));
        assert!(close(s.m, 1.25, 1e-15));
        assert!(close(s.f, 0.25, 1e-15));
        assert!(close(s.r, 3.0 / 22.0, 1e-15));
        assert!(close(s.ell, 4.0 / 121.0, 1e-15));

        let s = StochasticRateSpec::new(0.0, 0.01).unwrap();
        assert!(close(s.f, 0.01, 1e-15));
        assert!(close(s.r, 0.01, 1e-15));
        assert!(close(s.ell, 0.01, 1e-15));
    }

    #[test]
    fn stochastic_rejects_negative_variance() {
        assert!(StochasticRateSpec::new(0.1, -1e-6).is_err());
        assert!(StochasticRateSpec::new(-1.0, 0.0).is_err());
    }

    #[test]
    fn geometric_aux_examples() {
        let s = StochasticRateSpec::new(0.1, 0.0).unwrap();
        let a = GeometricAux::new(&s, 0.1).unwrap();
        assert!(a.t.abs() < 1e-15 && a.h.abs() < 1e-15 && a.w.abs() < 1e-15);

        let s = StochasticRateSpec::new(0.1, 0.04).unwrap();
        let a = GeometricAux::new(&s, 0.2).unwrap();
        assert!(close(a.t, 1.0 / 11.0, 1e-14));
        assert!(close(a.h, -19.0 / 144.0, 1e-14));
        assert!(close(a.w, -7.0 / 132.0, 1e-14));

        let s = StochasticRateSpec::new(0.0, 0.0).unwrap();
        let a = GeometricAux::new(&s, 0.05).unwrap();
        assert!(close(a.t, 0.05, 1e-14));
        // f = 0 here, so h and w are not zero: 1 = 1.05^2 (1 + h) = 1.05 (1 + w).
        assert!(close(a.h, 1.0 / 1.1025 - 1.0, 1e-14));
        assert!(close(a.w, 1.0 / 1.05 - 1.0, 1e-14));
    }

    #[test]
    fn geometric_aux_rejects_bad_growth() {
        let s = StochasticRateSpec::new(0.1, 0.0).unwrap();
        assert!(GeometricAux::new(&s, -1.0).is_err());
    }
}
