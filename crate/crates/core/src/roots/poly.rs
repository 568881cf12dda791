//! Dense univariate polynomials over the rationals.

use std::cmp::Ordering;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

/// Coefficients lowest degree first; no trailing zeros.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RatPoly {
    coeffs: Vec<BigRational>,
}

impl RatPoly {
    pub fn new(mut coeffs: Vec<BigRational>) -> Self {
        while coeffs.last().is_some_and(Zero::is_zero) {
            coeffs.pop();
        }
        RatPoly { coeffs }
    }

    pub fn from_integers(coeffs: &[i64]) -> Self {
        RatPoly::new(
            coeffs
                .iter()
                .map(|&c| BigRational::from_integer(BigInt::from(c)))
                .collect(),
        )
    }

    pub fn coeffs(&self) -> &[BigRational] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Degree; `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn leading(&self) -> Option<&BigRational> {
        self.coeffs.last()
    }

    /// Sign as `x -> 0+`: the sign of the lowest nonzero coefficient.
    pub fn sign_at_zero_plus(&self) -> Ordering {
        self.coeffs
            .iter()
            .find(|c| !c.is_zero())
            .map_or(Ordering::Equal, sign_of)
    }

    /// Sign as `x -> +inf`.
    pub fn sign_at_infinity(&self) -> Ordering {
        self.leading().map_or(Ordering::Equal, sign_of)
    }

    pub fn eval(&self, x: &BigRational) -> BigRational {
        let mut acc = BigRational::zero();
        for c in self.coeffs.iter().rev() {
            acc = acc * x + c;
        }
        acc
    }

    pub fn sign_at(&self, x: &BigRational) -> Ordering {
        match self.integer_coeffs() {
            Some(ints) => {
                // v^deg p(u/v) by Horner over the integers; v > 0.
                let (u, v) = (x.numer(), x.denom());
                let mut acc = BigInt::zero();
                let mut vpow = BigInt::one();
                for c in ints.iter().rev() {
                    acc = acc * u + c * &vpow;
                    vpow *= v;
                }
                if acc.is_positive() {
                    Ordering::Greater
                } else if acc.is_negative() {
                    Ordering::Less
                } else {
                    Ordering::Equal
                }
            }
            None => sign_of(&self.eval(x)),
        }
    }

    fn integer_coeffs(&self) -> Option<Vec<BigInt>> {
        self.coeffs
            .iter()
            .map(|c| c.is_integer().then(|| c.numer().clone()))
            .collect()
    }

    /// Positive multiple of `-rem(self, divisor)`, primitive. Pseudo-division
    /// over the integers when both inputs have integer coefficients.
    pub fn neg_rem_primitive(&self, divisor: &RatPoly) -> RatPoly {
        let (Some(a), Some(b)) = (self.integer_coeffs(), divisor.integer_coeffs()) else {
            return self.div_rem(divisor).1.neg().primitive();
        };
        let db = b.len().checked_sub(1).expect("division by zero polynomial");
        let lead = &b[db];
        let mut rem = a;
        let mut scalings = 0usize;
        while rem.len() > db {
            let top = rem.pop().unwrap();
            if top.is_zero() {
                continue;
            }
            let shift = rem.len() - db;
            for c in rem.iter_mut() {
                *c *= lead;
            }
            for (j, bc) in b[..db].iter().enumerate() {
                rem[shift + j] -= &top * bc;
            }
            scalings += 1;
        }
        // rem = lead^scalings * rem(self, divisor)
        let flip = !(lead.is_negative() && scalings % 2 == 1);
        let g = rem.iter().fold(BigInt::zero(), |acc, c| acc.gcd(c));
        if g.is_zero() {
            return RatPoly::new(Vec::new());
        }
        let g = if flip { -g } else { g };
        RatPoly::new(
            rem.into_iter()
                .map(|c| BigRational::from_integer(c / &g))
                .collect(),
        )
    }

    pub fn derivative(&self) -> RatPoly {
        RatPoly::new(
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(i, c)| c * BigRational::from_integer(BigInt::from(i)))
                .collect(),
        )
    }

    pub fn neg(&self) -> RatPoly {
        RatPoly {
            coeffs: self.coeffs.iter().map(|c| -c).collect(),
        }
    }

    /// Quotient and remainder. Panics on a zero divisor.
    pub fn div_rem(&self, divisor: &RatPoly) -> (RatPoly, RatPoly) {
        let dd = divisor.degree().expect("division by zero polynomial");
        let lead = divisor.leading().unwrap();
        let mut rem = self.coeffs.clone();
        if rem.len() <= dd {
            return (RatPoly::new(Vec::new()), self.clone());
        }
        let mut quot = vec![BigRational::zero(); rem.len() - dd];
        for i in (dd..rem.len()).rev() {
            if rem[i].is_zero() {
                continue;
            }
            let factor = &rem[i] / lead;
            for (j, dc) in divisor.coeffs.iter().enumerate() {
                rem[i - dd + j] -= &factor * dc;
            }
            quot[i - dd] = factor;
        }
        rem.truncate(dd);
        (RatPoly::new(quot), RatPoly::new(rem))
    }

    /// Positive rescaling to a primitive integer polynomial. Signs are kept,
    /// so Sturm variations are unchanged.
    pub fn primitive(&self) -> RatPoly {
        if self.is_zero() {
            return self.clone();
        }
        let lcm = self
            .coeffs
            .iter()
            .fold(BigInt::one(), |acc, c| acc.lcm(c.denom()));
        let ints: Vec<BigInt> = self
            .coeffs
            .iter()
            .map(|c| (c * BigRational::from_integer(lcm.clone())).to_integer())
            .collect();
        let g = ints.iter().fold(BigInt::zero(), |acc, c| acc.gcd(c));
        RatPoly::new(
            ints.into_iter()
                .map(|c| BigRational::from_integer(c / &g))
                .collect(),
        )
    }

    pub fn monic(&self) -> RatPoly {
        match self.leading() {
            Some(l) => {
                let l = l.clone();
                RatPoly::new(self.coeffs.iter().map(|c| c / &l).collect())
            }
            None => self.clone(),
        }
    }

    /// Monic greatest common divisor.
    pub fn gcd(&self, other: &RatPoly) -> RatPoly {
        let (mut a, mut b) = (self.clone(), other.clone());
        while !b.is_zero() {
            let r = a.neg_rem_primitive(&b);
            a = b;
            b = r;
        }
        a.monic()
    }

    /// Yun's square-free decomposition: `self = c * prod factors[i]^(i+1)`
    /// with each factor square-free and pairwise coprime.
    pub fn square_free_decomposition(&self) -> Vec<RatPoly> {
        let mut out = Vec::new();
        if self.degree().is_none_or(|d| d == 0) {
            return out;
        }
        let f = self.monic();
        let df = f.derivative();
        let a = f.gcd(&df);
        let mut b = f.div_rem(&a).0;
        let c = df.div_rem(&a).0;
        let mut d = c.sub(&b.derivative());
        loop {
            let g = b.gcd(&d);
            out.push(g.clone());
            b = b.div_rem(&g).0;
            if b.degree().is_none_or(|deg| deg == 0) {
                break;
            }
            let c = d.div_rem(&g).0;
            d = c.sub(&b.derivative());
        }
        while out.last().is_some_and(|p| p.degree() == Some(0)) {
            out.pop();
        }
        out
    }

    pub fn sub(&self, other: &RatPoly) -> RatPoly {
        let len = self.coeffs.len().max(other.coeffs.len());
        let zero = BigRational::zero();
        RatPoly::new(
            (0..len)
                .map(|i| self.coeffs.get(i).unwrap_or(&zero) - other.coeffs.get(i).unwrap_or(&zero))
                .collect(),
        )
    }

    /// Synthetic division by `(x - alpha)`: quotient and the value at `alpha`.
    pub fn divide_by_linear(&self, alpha: &BigRational) -> (RatPoly, BigRational) {
        if self.coeffs.is_empty() {
            return (self.clone(), BigRational::zero());
        }
        let mut quot = vec![BigRational::zero(); self.coeffs.len() - 1];
        let mut acc = BigRational::zero();
        for (i, c) in self.coeffs.iter().enumerate().rev() {
            acc = acc * alpha + c;
            if i > 0 {
                quot[i - 1] = acc.clone();
            }
        }
        (RatPoly::new(quot), acc)
    }
}

pub fn sign_of(x: &BigRational) -> Ordering {
    if x.is_positive() {
        Ordering::Greater
    } else if x.is_negative() {
        Ordering::Less
    } else {
        Ordering::Equal
    }
}
