//! Payment schedules: arithmetic `p, p+q, ...` and geometric `p, pq, ...`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fixed::{check_arithmetic, check_geometric, PaymentCheck};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Family {
    /// Payments `p, p + q, p + 2q, ...`
    Arithmetic,
    /// Payments `p, pq, pq^2, ...`
    Geometric,
}

impl std::str::FromStr for Family {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "arithmetic" => Ok(Family::Arithmetic),
            "geometric" => Ok(Family::Geometric),
            other => Err(Error::domain(format!("unknown payment family {other:?}"))),
        }
    }
}

/// A schedule of `n` annual payments in arithmetic or geometric progression.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PaymentPlan {
    pub family: Family,
    pub p: f64,
    /// Common difference (arithmetic) or ratio (geometric).
    pub q: f64,
    pub n: u32,
    pub check: PaymentCheck,
}

impl PaymentPlan {
    pub fn new(family: Family, p: f64, q: f64, n: u32, check: PaymentCheck) -> Result<Self> {
        if n == 0 {
            return Err(Error::domain("horizon n must be at least 1"));
        }
        if !p.is_finite() || !q.is_finite() {
            return Err(Error::domain("payment parameters must be finite"));
        }
        if check == PaymentCheck::Strict {
            match family {
                Family::Arithmetic => check_arithmetic(p, q, n)?,
                Family::Geometric => check_geometric(p, q)?,
            }
        }
        Ok(PaymentPlan { family, p, q, n, check })
    }

    pub fn arithmetic(p: f64, q: f64, n: u32) -> Result<Self> {
        Self::new(Family::Arithmetic, p, q, n, PaymentCheck::Strict)
    }

    pub fn geometric(p: f64, q: f64, n: u32) -> Result<Self> {
        Self::new(Family::Geometric, p, q, n, PaymentCheck::Strict)
    }

    /// The classic unit patterns: `level` (1, 1, ...), `increasing`
    /// (1, 2, ..., n) and `decreasing` (n, n - 1, ..., 1). `None` for any
    /// other name.
    pub fn named(name: &str, n: u32) -> Option<Result<Self>> {
        let (p, q) = match name {
            "level" => (1.0, 0.0),
            "increasing" => (1.0, 1.0),
            "decreasing" => (f64::from(n), -1.0),
            _ => return None,
        };
        Some(Self::arithmetic(p, q, n))
    }

    /// The `i`-th payment, `i >= 1`.
    pub fn payment(&self, i: u32) -> f64 {
        match self.family {
            Family::Arithmetic => self.p + f64::from(i - 1) * self.q,
            Family::Geometric => self.p * self.q.powi(i as i32 - 1),
        }
    }

    /// Same schedule over a different horizon.
    pub fn with_horizon(&self, n: u32) -> Result<Self> {
        Self::new(self.family, self.p, self.q, n, self.check)
    }

    pub(crate) fn check_k(&self, k: u32) -> Result<()> {
        if k == 0 || k > self.n {
            return Err(Error::domain(format!("k = {k} must lie in 1..={}", self.n)));
        }
        Ok(())
    }
}
