//! Rational approximation of the inverse risk parameter.
//!
//! The polynomial substitution needs the exponent `1/gamma` as a reduced
//! fraction `m/n`. We pick the fraction with the smallest denominator inside
//! the tolerance window, which is always a convergent or an intermediate
//! convergent of the continued fraction of `1/gamma`.

use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const DEFAULT_TOL: f64 = 1e-6;
pub const DEFAULT_MAX_DENOMINATOR: u64 = 1_000_000;

/// Reduced fraction `m/n` with `n > 2m`, standing in for `1/gamma`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "RawEpsilon", into = "RawEpsilon")]
pub struct RationalEpsilon {
    m: u64,
    n: u64,
}

#[derive(Serialize, Deserialize)]
struct RawEpsilon {
    m: u64,
    n: u64,
}

impl TryFrom<RawEpsilon> for RationalEpsilon {
    type Error = Error;

    fn try_from(raw: RawEpsilon) -> Result<Self> {
        RationalEpsilon::new(raw.m, raw.n)
    }
}

impl From<RationalEpsilon> for RawEpsilon {
    fn from(eps: RationalEpsilon) -> Self {
        RawEpsilon { m: eps.m, n: eps.n }
    }
}

impl RationalEpsilon {
    pub fn new(m: u64, n: u64) -> Result<Self> {
        if m == 0 || n == 0 {
            return Err(Error::Input(format!(
                "epsilon {m}/{n} must have positive parts"
            )));
        }
        if m.gcd(&n) != 1 {
            return Err(Error::Input(format!("epsilon {m}/{n} is not reduced")));
        }
        if n <= m.saturating_mul(2) {
            return Err(Error::Input(format!("epsilon {m}/{n} violates n > 2m")));
        }
        Ok(RationalEpsilon { m, n })
    }

    pub fn m(&self) -> u64 {
        self.m
    }

    pub fn n(&self) -> u64 {
        self.n
    }

    /// `m/n` as a double.
    pub fn value(&self) -> f64 {
        self.m as f64 / self.n as f64
    }

    pub fn to_rational(&self) -> BigRational {
        BigRational::new(BigInt::from(self.m), BigInt::from(self.n))
    }

    /// Absolute distance to `1/gamma`, computed exactly then rounded.
    pub fn error_against(&self, gamma: f64) -> f64 {
        match inverse_exact(gamma) {
            Some(target) => (self.to_rational() - target)
                .abs()
                .to_f64()
                .unwrap_or(f64::INFINITY),
            None => f64::INFINITY,
        }
    }
}

/// Same as [`RationalEpsilon::value`].
pub fn epsilon_value(eps: &RationalEpsilon) -> f64 {
    eps.value()
}

impl fmt::Display for RationalEpsilon {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.m, self.n)
    }
}

impl FromStr for RationalEpsilon {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let (m, n) = s
            .split_once('/')
            .ok_or_else(|| Error::Input(format!("expected m/n, got {s:?}")))?;
        let parse = |t: &str| {
            t.trim()
                .parse::<u64>()
                .map_err(|e| Error::Input(format!("bad integer {t:?} in epsilon: {e}")))
        };
        RationalEpsilon::new(parse(m)?, parse(n)?)
    }
}

fn inverse_exact(gamma: f64) -> Option<BigRational> {
    let g = BigRational::from_float(gamma)?;
    if g.is_zero() {
        return None;
    }
    Some(g.recip())
}

fn to_epsilon(r: &BigRational) -> Option<RationalEpsilon> {
    let m = r.numer().to_u64()?;
    let n = r.denom().to_u64()?;
    RationalEpsilon::new(m, n).ok()
}

/// Picks `m/n` close to `1/gamma`.
///
/// When `1/gamma` is exactly a fraction with denominator at most
/// `max_denominator` it is returned unchanged. Otherwise the result is the
/// fraction with the smallest denominator in
/// `[1/gamma - tol, 1/gamma + tol] ∩ (0, 1/2)`.
pub fn approximate_inverse_gamma(
    gamma: f64,
    tol: f64,
    max_denominator: u64,
) -> Result<RationalEpsilon> {
    if !(gamma.is_finite() && gamma > 2.0) {
        return Err(Error::Input(format!(
            "gamma must be finite and > 2, got {gamma}"
        )));
    }
    if !(tol.is_finite() && tol > 0.0) {
        return Err(Error::Input(format!("tol must be positive, got {tol}")));
    }
    if max_denominator < 3 {
        return Err(Error::Input(format!(
            "max_denominator must be >= 3, got {max_denominator}"
        )));
    }

    let target = inverse_exact(gamma).expect("finite nonzero gamma");
    if *target.denom() <= BigInt::from(max_denominator) {
        if let Some(eps) = to_epsilon(&target) {
            return Ok(eps);
        }
    }

    let tol_r = BigRational::from_float(tol).expect("finite tol");
    let half = BigRational::new(BigInt::one(), BigInt::from(2));
    let lo = &target - &tol_r;
    let hi = &target + &tol_r;
    let (lo, lo_closed) = if lo.is_positive() {
        (lo, true)
    } else {
        (BigRational::zero(), false)
    };
    let (hi, hi_closed) = if hi < half { (hi, true) } else { (half, false) };

    let simplest = simplest_in(
        Bound {
            value: lo,
            closed: lo_closed,
        },
        Some(Bound {
            value: hi,
            closed: hi_closed,
        }),
    );
    if let Some(s) = simplest {
        if *s.denom() <= BigInt::from(max_denominator) {
            if let Some(eps) = to_epsilon(&s) {
                return Ok(eps);
            }
        }
    }

    let best = best_convergent(&target, max_denominator).ok_or_else(|| {
        Error::Input(format!(
            "no admissible fraction below 1/2 for gamma {gamma}"
        ))
    })?;
    Err(Error::Approximation {
        tol,
        max_denominator,
        best,
        best_error: best.error_against(gamma),
    })
}

#[derive(Clone, Debug)]
struct Bound {
    value: BigRational,
    closed: bool,
}

impl Bound {
    fn admits_above(&self, x: &BigRational) -> bool {
        if self.closed {
            *x >= self.value
        } else {
            *x > self.value
        }
    }

    fn admits_below(&self, x: &BigRational) -> bool {
        if self.closed {
            *x <= self.value
        } else {
            *x < self.value
        }
    }
}

/// Fraction of least denominator in the interval between `lo` and `hi`
/// (`None` = +∞), for `lo >= 0`. Returns `None` if the interval is empty.
fn simplest_in(lo: Bound, hi: Option<Bound>) -> Option<BigRational> {
    if let Some(h) = &hi {
        if h.value < lo.value || (h.value == lo.value && !(h.closed && lo.closed)) {
            return None;
        }
    }
    let fl = lo.value.floor();
    let k = if lo.admits_above(&fl) {
        fl.clone()
    } else {
        &fl + BigRational::one()
    };
    if hi.as_ref().is_none_or(|h| h.admits_below(&k)) {
        return Some(k);
    }
    // The interval sits strictly inside (fl, fl + 1]; recurse on reciprocals.
    let h = hi.expect("finite upper bound here");
    let frac_lo = &lo.value - &fl;
    let frac_hi = &h.value - &fl;
    let inv_lo = Bound {
        value: frac_hi.recip(),
        closed: h.closed,
    };
    let inv_hi = if frac_lo.is_zero() {
        None
    } else {
        Some(Bound {
            value: frac_lo.recip(),
            closed: lo.closed,
        })
    };
    let inner = simplest_in(inv_lo, inv_hi)?;
    Some(fl + inner.recip())
}

/// Continued-fraction convergents `h/k` of a positive rational.
pub fn convergents(x: &BigRational) -> Vec<BigRational> {
    let mut out = Vec::new();
    let (mut h0, mut h1) = (BigInt::zero(), BigInt::one());
    let (mut k0, mut k1) = (BigInt::one(), BigInt::zero());
    let mut r = x.clone();
    loop {
        let a = r.floor().to_integer();
        let h2 = &a * &h1 + &h0;
        let k2 = &a * &k1 + &k0;
        out.push(BigRational::new(h2.clone(), k2.clone()));
        (h0, h1) = (h1, h2);
        (k0, k1) = (k1, k2);
        let frac = &r - BigRational::from_integer(a);
        if frac.is_zero() {
            break;
        }
        r = frac.recip();
    }
    out
}

fn best_convergent(target: &BigRational, max_denominator: u64) -> Option<RationalEpsilon> {
    let cap = BigInt::from(max_denominator);
    convergents(target)
        .iter()
        .take_while(|c| *c.denom() <= cap)
        .filter_map(to_epsilon)
        .last()
}
