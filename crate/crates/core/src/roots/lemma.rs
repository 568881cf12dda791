//! Double positive roots of `A x^n + B x^(n-m) + C x^m + D`.
//!
//! If `(x - alpha)^2` divides `P`, the linear remainder of `P` by
//! `(x - alpha)^2` vanishes, which pins `C` and `D` given `A`, `B`:
//!
//! ```text
//! m alpha^(m-1) C = -(n-m) alpha^(n-m-1) B - n alpha^(n-1) A
//! D = (m-1) alpha^m C + (n-m-1) alpha^(n-m) B + (n-1) alpha^n A
//! ```
//!
//! and then `AD - BC = ((n-m)/m) alpha^(n-2m) (alpha^m A + B)^2 >= 0`.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, Zero};
use serde::Serialize;

use super::poly::RatPoly;
use crate::error::{Error, Result};
use crate::quadrinomial::{pow_rational, ExactQuadrinomial};

fn int(k: u64) -> BigRational {
    BigRational::from_integer(BigInt::from(k))
}

/// `slope * x + intercept`, the remainder of `P` modulo `(x - alpha)^2`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LinearRemainder {
    pub slope: BigRational,
    pub intercept: BigRational,
}

impl LinearRemainder {
    pub fn is_zero(&self) -> bool {
        self.slope.is_zero() && self.intercept.is_zero()
    }
}

impl Serialize for LinearRemainder {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        use serde::ser::SerializeStruct;
        let mut st = s.serialize_struct("LinearRemainder", 2)?;
        st.serialize_field("slope", &self.slope.to_string())?;
        st.serialize_field("intercept", &self.intercept.to_string())?;
        st.end()
    }
}

fn check_alpha(alpha: &BigRational) -> Result<()> {
    if alpha.is_positive() {
        Ok(())
    } else {
        Err(Error::Input(format!("alpha must be positive, got {alpha}")))
    }
}

/// Two rounds of synthetic division by `(x - alpha)`: the first leaves
/// `P(alpha)`, the second `P'(alpha)`, and
/// `P = (x - alpha)^2 Q + P'(alpha)(x - alpha) + P(alpha)`.
pub fn remainder_after_double_division(
    q: &ExactQuadrinomial,
    alpha: &BigRational,
) -> Result<LinearRemainder> {
    check_alpha(alpha)?;
    let p = RatPoly::new(q.dense());
    let (q1, value) = p.divide_by_linear(alpha);
    let (_, slope) = q1.divide_by_linear(alpha);
    let intercept = &value - alpha * &slope;
    let rem = LinearRemainder { slope, intercept };
    debug_assert_eq!(rem, analytic_remainder(q, alpha));
    Ok(rem)
}

/// `P'(alpha) x + (P(alpha) - alpha P'(alpha))` from the sparse form.
pub fn analytic_remainder(q: &ExactQuadrinomial, alpha: &BigRational) -> LinearRemainder {
    let value = q.evaluate(alpha);
    let slope = q.derivative_at(alpha);
    let intercept = value - alpha * &slope;
    LinearRemainder { slope, intercept }
}

/// Remainders of schoolbook long division by `x^2 - 2 alpha x + alpha^2`,
/// one entry per step (the last entry is linear).
pub fn long_division_steps(q: &ExactQuadrinomial, alpha: &BigRational) -> Vec<RatPoly> {
    let mut rem: Vec<BigRational> = q.dense();
    let two_alpha = alpha * int(2);
    let alpha_sq = alpha * alpha;
    let mut steps = Vec::new();
    for deg in (2..rem.len()).rev() {
        let lead = rem[deg].clone();
        rem[deg] = BigRational::zero();
        rem[deg - 1] += &lead * &two_alpha;
        rem[deg - 2] -= &lead * &alpha_sq;
        steps.push(RatPoly::new(rem.clone()));
    }
    steps
}

/// `((n-m)/m) alpha^(n-2m) (alpha^m A + B)^2`.
pub fn closed_form_ad_bc(
    n: u64,
    m: u64,
    alpha: &BigRational,
    a: &BigRational,
    b: &BigRational,
) -> BigRational {
    let s = pow_rational(alpha, m) * a + b;
    int(n - m) / int(m) * pow_rational(alpha, n - 2 * m) * &s * &s
}

/// Exact `AD - BC` for a quadrinomial with a double root at `alpha`, after
/// checking the sign claim and the closed form.
pub fn lemma_divpol_check(q: &ExactQuadrinomial, alpha: &BigRational) -> Result<BigRational> {
    let rem = remainder_after_double_division(q, alpha)?;
    if !rem.is_zero() {
        return Err(Error::NotDoubleRoot {
            slope: rem.slope.to_string(),
            intercept: rem.intercept.to_string(),
        });
    }
    let ad_bc = q.ad_minus_bc();
    let s = pow_rational(alpha, q.m) * &q.a + &q.b;
    if ad_bc.is_negative() {
        return Err(Error::LemmaViolation(format!(
            "AD - BC = {ad_bc} < 0 at double root {alpha}"
        )));
    }
    if ad_bc.is_zero() != s.is_zero() {
        return Err(Error::LemmaViolation(format!(
            "AD - BC = {ad_bc} but alpha^m A + B = {s} at double root {alpha}"
        )));
    }
    let closed = closed_form_ad_bc(q.n, q.m, alpha, &q.a, &q.b);
    if closed != ad_bc {
        return Err(Error::LemmaViolation(format!(
            "AD - BC = {ad_bc}, closed form gives {closed}"
        )));
    }
    Ok(ad_bc)
}

/// The unique `(C, D)` making `alpha` a double root for the given `A`, `B`.
pub fn solve_double_root_family(
    n: u64,
    m: u64,
    alpha: &BigRational,
    a: &BigRational,
    b: &BigRational,
) -> Result<ExactQuadrinomial> {
    if m == 0 || n <= 2 * m {
        return Err(Error::Input(format!("need n > 2m >= 2, got n={n}, m={m}")));
    }
    check_alpha(alpha)?;
    if a.is_zero() || b.is_zero() {
        return Err(Error::Degenerate("A and B must be nonzero".into()));
    }
    let pw = |k: u64| pow_rational(alpha, k);
    let c = (-(int(n - m) * pw(n - m - 1) * b) - int(n) * pw(n - 1) * a) / (int(m) * pw(m - 1));
    let d = int(m - 1) * pw(m) * &c + int(n - m - 1) * pw(n - m) * b + int(n - 1) * pw(n) * a;
    ExactQuadrinomial::new(a.clone(), b.clone(), c, d, n, m)
}
