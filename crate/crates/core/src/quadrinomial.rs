//! The four-term polynomial `A x^n + B x^(n-m) + C x^m + D` whose positive
//! roots are the equilibrium prices under `x = p^(1/n)`.
//!
//! Clearing denominators in the aggregate excess demand and dividing by
//! `a eps p^eps` gives, with `k = b / (a eps)`,
//!
//! ```text
//! A = -(e1 s1 + e2 s2) - k (s1 + s2)
//! B =  (f1 + f2) + 2k
//! C = -(e1 + e2) s1 s2 - 2k s1 s2
//! D =  (f1 s2 + f2 s1) + k (s1 + s2)
//! ```
//!
//! where `s_i = beta_i^eps`. The positive factor dropped along the way is not
//! tracked; only signs and root sets matter.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::economy::Economy;
use crate::error::{Error, Result};
use crate::rational::RationalEpsilon;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawQuadrinomial")]
pub struct Quadrinomial {
    #[serde(rename = "A")]
    pub a: f64,
    #[serde(rename = "B")]
    pub b: f64,
    #[serde(rename = "C")]
    pub c: f64,
    #[serde(rename = "D")]
    pub d: f64,
    pub n: u64,
    pub m: u64,
}

#[derive(Deserialize)]
struct RawQuadrinomial {
    #[serde(rename = "A")]
    a: f64,
    #[serde(rename = "B")]
    b: f64,
    #[serde(rename = "C")]
    c: f64,
    #[serde(rename = "D")]
    d: f64,
    n: u64,
    m: u64,
}

impl TryFrom<RawQuadrinomial> for Quadrinomial {
    type Error = Error;

    fn try_from(r: RawQuadrinomial) -> Result<Self> {
        Quadrinomial::new(r.a, r.b, r.c, r.d, r.n, r.m)
    }
}

fn check_exponents(n: u64, m: u64) -> Result<()> {
    if m == 0 || n <= m.saturating_mul(2) {
        return Err(Error::Input(format!(
            "exponents must satisfy n > 2m >= 2, got n={n}, m={m}"
        )));
    }
    if n > i32::MAX as u64 {
        return Err(Error::Input(format!("degree {n} too large")));
    }
    Ok(())
}

/// Whether each coefficient has the sign `A < 0, B > 0, C < 0, D > 0`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SignPattern {
    pub a_negative: bool,
    pub b_positive: bool,
    pub c_negative: bool,
    pub d_positive: bool,
}

impl SignPattern {
    pub fn holds(&self) -> bool {
        self.a_negative && self.b_positive && self.c_negative && self.d_positive
    }
}

impl Quadrinomial {
    pub fn new(a: f64, b: f64, c: f64, d: f64, n: u64, m: u64) -> Result<Self> {
        check_exponents(n, m)?;
        for (name, v) in [("A", a), ("B", b), ("C", c), ("D", d)] {
            if !v.is_finite() {
                return Err(Error::Input(format!("coefficient {name} is not finite")));
            }
            if v == 0.0 {
                return Err(Error::Degenerate(format!("coefficient {name} is zero")));
            }
        }
        Ok(Quadrinomial { a, b, c, d, n, m })
    }

    /// Coefficients from the economy at exponent `eps = m/n`. When every
    /// `beta^eps` is rational the exact coefficients are rounded once.
    pub fn from_economy(econ: &Economy, eps: &RationalEpsilon) -> Result<Self> {
        if let Some(exact) = ExactQuadrinomial::from_economy(econ, eps) {
            return exact?.to_f64();
        }
        let [a1, a2] = &econ.agents;
        let s1 = a1.sigma(eps);
        let s2 = a2.sigma(eps);
        let k = econ.hara.b / (econ.hara.a * eps.value());
        let a = -(a1.e * s1 + a2.e * s2) - k * (s1 + s2);
        let b = (a1.f + a2.f) + 2.0 * k;
        let c = -(a1.e + a2.e) * s1 * s2 - 2.0 * k * s1 * s2;
        let d = (a1.f * s2 + a2.f * s1) + k * (s1 + s2);
        Quadrinomial::new(a, b, c, d, eps.n(), eps.m())
    }

    pub fn sign_pattern(&self) -> SignPattern {
        SignPattern {
            a_negative: self.a < 0.0,
            b_positive: self.b > 0.0,
            c_negative: self.c < 0.0,
            d_positive: self.d > 0.0,
        }
    }

    pub fn evaluate(&self, x: f64) -> f64 {
        let n = self.n as f64;
        let m = self.m as f64;
        self.a * x.powf(n) + self.b * x.powf(n - m) + self.c * x.powf(m) + self.d
    }

    /// Value at `x = p^(1/n)`, written in terms of `s = ln p` so that large
    /// degrees neither overflow nor lose the price scale.
    pub fn evaluate_at_log_price(&self, s: f64) -> f64 {
        let eps = self.epsilon();
        self.a * s.exp() + self.b * (s * (1.0 - eps)).exp() + self.c * (s * eps).exp() + self.d
    }

    /// Sum of absolute term values at `s = ln p`, used as a rounding scale.
    pub fn magnitude_at_log_price(&self, s: f64) -> f64 {
        let eps = self.epsilon();
        self.a.abs() * s.exp()
            + self.b.abs() * (s * (1.0 - eps)).exp()
            + self.c.abs() * (s * eps).exp()
            + self.d.abs()
    }

    /// `m/n` as a double.
    pub fn epsilon(&self) -> f64 {
        self.m as f64 / self.n as f64
    }

    pub fn ad_minus_bc(&self) -> f64 {
        self.a * self.d - self.b * self.c
    }

    pub fn price_from_root(&self, x: f64) -> Result<f64> {
        if !(x.is_finite() && x > 0.0) {
            return Err(Error::Input(format!("root must be positive, got {x}")));
        }
        Ok(x.powf(self.n as f64))
    }

    pub fn root_from_price(&self, p: f64) -> Result<f64> {
        if !(p.is_finite() && p > 0.0) {
            return Err(Error::Input(format!("price must be positive, got {p}")));
        }
        Ok(p.powf(1.0 / self.n as f64))
    }

    /// Exact image of the double-precision coefficients.
    pub fn to_exact(&self) -> ExactQuadrinomial {
        let conv = |v: f64| BigRational::from_float(v).expect("finite coefficient");
        ExactQuadrinomial {
            a: conv(self.a),
            b: conv(self.b),
            c: conv(self.c),
            d: conv(self.d),
            n: self.n,
            m: self.m,
        }
    }
}

/// Same polynomial with exact rational coefficients.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExactQuadrinomial {
    pub a: BigRational,
    pub b: BigRational,
    pub c: BigRational,
    pub d: BigRational,
    pub n: u64,
    pub m: u64,
}

impl ExactQuadrinomial {
    pub fn new(
        a: BigRational,
        b: BigRational,
        c: BigRational,
        d: BigRational,
        n: u64,
        m: u64,
    ) -> Result<Self> {
        check_exponents(n, m)?;
        for (name, v) in [("A", &a), ("B", &b), ("C", &c), ("D", &d)] {
            if v.is_zero() {
                return Err(Error::Degenerate(format!("coefficient {name} is zero")));
            }
        }
        Ok(ExactQuadrinomial { a, b, c, d, n, m })
    }

    /// Exact coefficients when every input is a double (hence dyadic) and
    /// each `beta^(m/n)` is rational. Returns `None` when some sigma is
    /// irrational.
    pub fn from_economy(econ: &Economy, eps: &RationalEpsilon) -> Option<Result<Self>> {
        let r = |v: f64| BigRational::from_float(v).expect("validated finite input");
        let [a1, a2] = &econ.agents;
        let s1 = rational_power(&r(a1.beta), eps)?;
        let s2 = rational_power(&r(a2.beta), eps)?;
        let k = r(econ.hara.b) / (r(econ.hara.a) * eps.to_rational());
        let two = BigRational::from_integer(BigInt::from(2));
        let (e1, e2, f1, f2) = (r(a1.e), r(a2.e), r(a1.f), r(a2.f));
        let a = -(&e1 * &s1 + &e2 * &s2) - &k * (&s1 + &s2);
        let b = (&f1 + &f2) + &two * &k;
        let c = -(&e1 + &e2) * &s1 * &s2 - &two * &k * &s1 * &s2;
        let d = (&f1 * &s2 + &f2 * &s1) + &k * (&s1 + &s2);
        Some(ExactQuadrinomial::new(a, b, c, d, eps.n(), eps.m()))
    }

    pub fn ad_minus_bc(&self) -> BigRational {
        &self.a * &self.d - &self.b * &self.c
    }

    pub fn evaluate(&self, x: &BigRational) -> BigRational {
        let pow = |k: u64| pow_rational(x, k);
        &self.a * pow(self.n) + &self.b * pow(self.n - self.m) + &self.c * pow(self.m) + &self.d
    }

    pub fn derivative_at(&self, x: &BigRational) -> BigRational {
        let (n, m) = (self.n, self.m);
        let int = |k: u64| BigRational::from_integer(BigInt::from(k));
        int(n) * &self.a * pow_rational(x, n - 1)
            + int(n - m) * &self.b * pow_rational(x, n - m - 1)
            + int(m) * &self.c * pow_rational(x, m - 1)
    }

    /// Dense coefficients, lowest degree first.
    pub fn dense(&self) -> Vec<BigRational> {
        let mut out = vec![BigRational::zero(); self.n as usize + 1];
        out[0] = self.d.clone();
        out[self.m as usize] = self.c.clone();
        out[(self.n - self.m) as usize] = self.b.clone();
        out[self.n as usize] = self.a.clone();
        out
    }

    pub fn to_f64(&self) -> Result<Quadrinomial> {
        let conv = |v: &BigRational| v.to_f64().unwrap_or(f64::NAN);
        Quadrinomial::new(
            conv(&self.a),
            conv(&self.b),
            conv(&self.c),
            conv(&self.d),
            self.n,
            self.m,
        )
    }
}

pub(crate) fn pow_rational(x: &BigRational, k: u64) -> BigRational {
    let mut result = BigRational::one();
    let mut base = x.clone();
    let mut e = k;
    while e > 0 {
        if e & 1 == 1 {
            result *= &base;
        }
        e >>= 1;
        if e > 0 {
            base = &base * &base;
        }
    }
    result
}

/// `beta^(m/n)` if it is rational.
pub fn rational_power(beta: &BigRational, eps: &RationalEpsilon) -> Option<BigRational> {
    if !beta.is_positive() {
        return None;
    }
    let n = u32::try_from(eps.n()).ok()?;
    let root = |v: &BigInt| -> Option<BigInt> {
        let r = v.nth_root(n);
        (r.pow(n) == *v).then_some(r)
    };
    let num = root(beta.numer())?;
    let den = root(beta.denom())?;
    Some(pow_rational(&BigRational::new(num, den), eps.m()))
}
