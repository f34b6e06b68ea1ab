//! Closed-form expressions, generic over [`Scalar`].
//!
//! These are the raw formulas with no singularity handling: dividing by a
//! zero discount rate or by `1 + j - q = 0` is the caller's problem. The
//! public evaluators in [`crate::fixed`], [`crate::moments`] and
//! [`crate::corollary`] decide when a formula may be used.
//!
//! Notation in comments: `s(k, x)` is the accumulated value of a level
//! annuity-due at rate `x`, `Is` and `I2s` the increasing and
//! squared-increasing ones, `sg(p, q; k, x)` the geometric one.

use crate::scalar::Scalar;

fn k_of<S: Scalar>(k: u32) -> S {
    S::from_u32(k)
}

/// `d = x / (1 + x)`.
pub fn discount<S: Scalar>(x: &S) -> S {
    x.clone() / (S::one() + x.clone())
}

/// `s(k, x) = ((1 + x)^k - 1) / d`.
pub fn level<S: Scalar>(x: &S, k: u32) -> S {
    x.compound_minus_one(k) / discount(x)
}

/// `Is(k, x) = (s(k, x) - k) / d`.
pub fn increasing<S: Scalar>(x: &S, k: u32) -> S {
    (level(x, k) - k_of(k)) / discount(x)
}

/// `I2s(k, x) = (2 Is - s - k^2) / d`.
pub fn increasing_squared<S: Scalar>(x: &S, k: u32) -> S {
    let kk: S = k_of(k);
    let two = S::from_f64(2.0);
    (two * increasing(x, k) - level(x, k) - kk.clone() * kk) / discount(x)
}

/// `I2s` through its relation to the level annuity alone:
/// `((1 + v)(s + k^2) - 2k - 2k^2) / d^2`.
pub fn increasing_squared_from_level<S: Scalar>(x: &S, k: u32) -> S {
    let kk: S = k_of(k);
    let two = S::from_f64(2.0);
    let d = discount(x);
    let v = S::one() / (S::one() + x.clone());
    let k2 = kk.clone() * kk.clone();
    ((S::one() + v) * (level(x, k) + k2.clone()) - two.clone() * kk - two * k2) / (d.clone() * d)
}

/// `Ds(n, k, x) = (n + 1) s - Is`.
pub fn decreasing<S: Scalar>(n: u32, x: &S, k: u32) -> S {
    (k_of::<S>(n) + S::one()) * level(x, k) - increasing(x, k)
}

/// Payments `p, p + q, ...`: `(p - q) s + q Is`.
pub fn arithmetic<S: Scalar>(p: &S, q: &S, x: &S, k: u32) -> S {
    (p.clone() - q.clone()) * level(x, k) + q.clone() * increasing(x, k)
}

/// Payments `p, pq, pq^2, ...`: `p (1 + x) ((1 + x)^k - q^k) / (1 + x - q)`.
pub fn geometric<S: Scalar>(p: &S, q: &S, x: &S, k: u32) -> S {
    let g = S::one() + x.clone();
    p.clone() * g.clone() * (g.powi(k) - q.powi(k)) / (g - q.clone())
}

/// Payments `1, 1 + u, ...` with `1 + u = (1 + x)(1 + t)`:
/// `(1 + x)^k s(k, t) / (1 + t)`.
pub fn growth<S: Scalar>(x: &S, t: &S, k: u32) -> S {
    (S::one() + x.clone()).powi(k) * level(t, k) / (S::one() + t.clone())
}

/// `s(k, x)^2 = (s(2k, x) - 2 s(k, x)) / d`.
pub fn level_squared<S: Scalar>(x: &S, k: u32) -> S {
    (level(x, 2 * k) - S::from_f64(2.0) * level(x, k)) / discount(x)
}

/// `Is(k, x)^2 = (Is(2k, x) - 2 (1 + k d) Is(k, x) - k^2) / d^2`.
pub fn increasing_squared_value<S: Scalar>(x: &S, k: u32) -> S {
    let kk: S = k_of(k);
    let d = discount(x);
    let two = S::from_f64(2.0);
    (increasing(x, 2 * k) - two * (S::one() + kk.clone() * d.clone()) * increasing(x, k) - kk.clone() * kk)
        / (d.clone() * d)
}

/// Moment-side inputs shared by the stochastic closed forms.
#[derive(Debug, Clone)]
pub struct RateTerms<S> {
    /// Mean rate `j`.
    pub j: S,
    /// Second-moment rate, `1 + f = E((1 + i)^2)`.
    pub f: S,
    /// Cross rate, `1 + r = (1 + f) / (1 + j)`.
    pub r: S,
}

impl<S: Scalar> RateTerms<S> {
    pub fn new(j: f64, s2: f64) -> Self {
        let j = S::from_f64(j);
        let s2 = S::from_f64(s2);
        let two = S::from_f64(2.0);
        let f = two * j.clone() + j.clone() * j.clone() + s2.clone();
        let r = j.clone() + s2 / (S::one() + j.clone());
        RateTerms { j, f, r }
    }
}

/// Arithmetic plan, `M1_k` as `p^2 s(k, f) + 2pq Is(k - 1, f) + q^2 I2s(k - 1, f)`.
pub fn m1_arithmetic_shifted<S: Scalar>(p: &S, q: &S, rates: &RateTerms<S>, k: u32) -> S {
    let f = &rates.f;
    let two = S::from_f64(2.0);
    p.clone() * p.clone() * level(f, k)
        + two * p.clone() * q.clone() * increasing(f, k - 1)
        + q.clone() * q.clone() * increasing_squared(f, k - 1)
}

/// Arithmetic plan, `M1_k` as `(p-q)^2 s + 2q(p-q) Is + q^2 I2s`, all at `(k, f)`.
pub fn m1_arithmetic<S: Scalar>(p: &S, q: &S, rates: &RateTerms<S>, k: u32) -> S {
    let f = &rates.f;
    let two = S::from_f64(2.0);
    let pq = p.clone() - q.clone();
    pq.clone() * pq.clone() * level(f, k)
        + two * q.clone() * pq * increasing(f, k)
        + q.clone() * q.clone() * increasing_squared(f, k)
}

/// Arithmetic plan, cross term `M2_k` in terms of annuities at rates `r` and `f`.
pub fn m2_arithmetic<S: Scalar>(p: &S, q: &S, rates: &RateTerms<S>, k: u32) -> S {
    let RateTerms { j, f, r } = rates;
    let d = discount(j);
    let v = S::one() / (S::one() + j.clone());
    let two = S::from_f64(2.0);
    let pq = p.clone() - q.clone();
    let growth = (S::one() + j.clone()).powi(k);
    let lead = d.clone() * pq.clone() + q.clone();

    let sum = pq.clone() * lead.clone() * growth.clone() * level(r, k) + q.clone() * lead * growth * increasing(r, k)
        - pq.clone() * (d.clone() * pq.clone() + q.clone() * v.clone()) * level(f, k)
        - q.clone() * (two * d.clone() * pq + q.clone() * v) * increasing(f, k)
        - q.clone() * q.clone() * d.clone() * increasing_squared(f, k);
    sum / (d.clone() * d)
}

/// Arithmetic plan, second moment `m_k = E(C_k^2)`.
pub fn second_moment_arithmetic<S: Scalar>(p: &S, q: &S, rates: &RateTerms<S>, k: u32) -> S {
    let RateTerms { j, f, r } = rates;
    let d = discount(j);
    let v = S::one() / (S::one() + j.clone());
    let two = S::from_f64(2.0);
    let pq = p.clone() - q.clone();
    let one_v = S::one() + v.clone();
    let growth = (S::one() + j.clone()).powi(k);
    let lead = d.clone() * pq.clone() + q.clone();

    let sum =
        -pq.clone() * (d.clone() * pq.clone() * one_v.clone() + two.clone() * q.clone() * v.clone()) * level(f, k)
            - two.clone() * q.clone() * (d.clone() * pq.clone() * one_v.clone() + q.clone() * v) * increasing(f, k)
            - d.clone() * q.clone() * q.clone() * one_v * increasing_squared(f, k)
            + two.clone() * pq * lead.clone() * growth.clone() * level(r, k)
            + two * q.clone() * lead * growth * increasing(r, k);
    sum / (d.clone() * d)
}

/// Arithmetic plan, squared mean `mu_k^2` written through `s(2k, j)` and `Is(2k, j)`.
pub fn mean_squared_arithmetic<S: Scalar>(p: &S, q: &S, j: &S, k: u32) -> S {
    let d = discount(j);
    let kk: S = k_of(k);
    let two = S::from_f64(2.0);
    let pq = p.clone() - q.clone();
    let qd = q.clone() / d.clone();

    pq.clone() / d.clone()
        * (pq.clone() + two.clone() * q.clone() / d.clone())
        * (level(j, 2 * k) - two.clone() * level(j, k))
        - two.clone() * q.clone() * pq * kk.clone() / d.clone() * level(j, k)
        + qd.clone()
            * qd
            * (increasing(j, 2 * k) - two * (S::one() + kk.clone() * d) * increasing(j, k) - kk.clone() * kk)
}

/// Geometric plan, `M1_k = sg(p^2, q^2; k, f)`.
pub fn m1_geometric<S: Scalar>(p: &S, q: &S, rates: &RateTerms<S>, k: u32) -> S {
    geometric(&(p.clone() * p.clone()), &(q.clone() * q.clone()), &rates.f, k)
}

/// Geometric plan, `M2_k = [p (1+j)^(k+1) sg(p, q; k, r) - (1+j) sg(p^2, q^2; k, f)] / (1 + j - q)`.
pub fn m2_geometric<S: Scalar>(p: &S, q: &S, rates: &RateTerms<S>, k: u32) -> S {
    let g = S::one() + rates.j.clone();
    (p.clone() * g.powi(k + 1) * geometric(p, q, &rates.r, k) - g.clone() * m1_geometric(p, q, rates, k))
        / (g - q.clone())
}

/// Geometric plan, `m_k = [2p (1+j)^(k+1) sg(p, q; k, r) - (q + 1 + j) sg(p^2, q^2; k, f)] / (1 + j - q)`.
pub fn second_moment_geometric<S: Scalar>(p: &S, q: &S, rates: &RateTerms<S>, k: u32) -> S {
    let g = S::one() + rates.j.clone();
    let two = S::from_f64(2.0);
    (two * p.clone() * g.powi(k + 1) * geometric(p, q, &rates.r, k)
        - (q.clone() + g.clone()) * m1_geometric(p, q, rates, k))
        / (g - q.clone())
}

/// Geometric plan, `mu_k^2 = p (1+j) / (1+j-q) [sg(p, q; 2k, j) - 2 q^k sg(p, q; k, j)]`.
pub fn mean_squared_geometric<S: Scalar>(p: &S, q: &S, j: &S, k: u32) -> S {
    let g = S::one() + j.clone();
    let two = S::from_f64(2.0);
    p.clone() * g.clone() / (g - q.clone()) * (geometric(p, q, j, 2 * k) - two * q.powi(k) * geometric(p, q, j, k))
}

/// Level payments: `Var(C_k) = [2(1+j)^(k+1) s(k, r) - (2+j) s(k, f) - (1+j) s(2k, j) + 2(1+j) s(k, j)] / j`.
pub fn level_variance<S: Scalar>(rates: &RateTerms<S>, k: u32) -> S {
    let RateTerms { j, f, r } = rates;
    let g = S::one() + j.clone();
    let two = S::from_f64(2.0);
    (two.clone() * g.powi(k + 1) * level(r, k) - (two.clone() + j.clone()) * level(f, k) - g.clone() * level(j, 2 * k)
        + two * g * level(j, k))
        / j.clone()
}

/// Payments `1, 2, ..., k`: the cross term
/// `M2_k = [(1+j)^(k+2) Is(k, r) - (1+j) Is(k, f) - j(1+j) I2s(k, f)] / j^2`.
pub fn increasing_m2<S: Scalar>(rates: &RateTerms<S>, k: u32) -> S {
    let RateTerms { j, f, r } = rates;
    let g = S::one() + j.clone();
    (g.powi(k + 2) * increasing(r, k) - g.clone() * increasing(f, k) - j.clone() * g * increasing_squared(f, k))
        / (j.clone() * j.clone())
}

/// Payments `1, 2, ..., k`: `m_k = [2(1+j)^(k+2) Is(k, r) - 2(1+j) Is(k, f) - j(2+j) I2s(k, f)] / j^2`.
pub fn increasing_second_moment<S: Scalar>(rates: &RateTerms<S>, k: u32) -> S {
    let RateTerms { j, f, r } = rates;
    let g = S::one() + j.clone();
    let two = S::from_f64(2.0);
    (two.clone() * g.powi(k + 2) * increasing(r, k)
        - two.clone() * g * increasing(f, k)
        - j.clone() * (two + j.clone()) * increasing_squared(f, k))
        / (j.clone() * j.clone())
}

/// Payments `1, 2, ..., k`: variance, the second moment less `Is(k, j)^2`.
pub fn increasing_variance<S: Scalar>(rates: &RateTerms<S>, k: u32) -> S {
    increasing_second_moment(rates, k) - increasing_squared_value(&rates.j, k)
}

/// Payments `n, n-1, ..., n-k+1`: variance in terms of `ell = s^2 / (1+j)^2`.
pub fn decreasing_variance<S: Scalar>(n: u32, rates: &RateTerms<S>, ell: &S, k: u32) -> S {
    let RateTerms { j, f, r } = rates;
    let d = discount(j);
    let g = S::one() + j.clone();
    let two = S::from_f64(2.0);
    let a = k_of::<S>(n) - S::one() / j.clone();
    let aa = a.clone() * a.clone();
    let gk = g.powi(k);
    let one_l = S::one() + ell.clone();
    let one_r = S::one() + r.clone();
    let one_f = S::one() + f.clone();

    let bracket = aa.clone() * gk.clone() * gk.clone() * level(ell, k) / one_l
        - two.clone() * aa.clone() * gk.clone() * level(r, k) / one_r.clone()
        + aa * level(f, k) / one_f.clone()
        + two.clone() * a.clone() * gk * increasing(r, k) / one_r
        - two * a * increasing(f, k) / one_f.clone()
        + increasing_squared(f, k) / one_f;
    ell.clone() / (d.clone() * d) * bracket
}

/// Payments `1, 1+u, (1+u)^2, ...`: variance through the auxiliary rates
/// `t`, `h`, `w` (see [`crate::rates::GeometricAux`]).
pub fn growth_variance<S: Scalar>(j: &S, u: &S, t: &S, h: &S, w: &S, k: u32) -> S {
    let g = S::one() + j.clone();
    let two = S::from_f64(2.0);
    let g2k = g.powi(2 * k);
    let first = ((S::one() + u.clone()).powi(2 * k) * (two.clone() + t.clone()) * level(h, k)
        - two.clone() * g2k.clone() * (S::one() + t.clone()).powi(k) * level(w, k))
        / t.clone();
    let second = g2k * (level(t, 2 * k) - two * level(t, k)) / (t.clone() * (S::one() + t.clone()));
    first - second
}
