//! Sturm chains over the rationals.

use std::cmp::Ordering;

use num_rational::BigRational;
use num_traits::Zero;

use super::poly::RatPoly;

/// One side of a half-open interval `(lo, hi]`.
#[derive(Debug, Clone, PartialEq)]
pub enum Endpoint {
    ZeroPlus,
    At(BigRational),
    Infinity,
}

#[derive(Debug, Clone)]
pub struct SturmChain {
    polys: Vec<RatPoly>,
}

impl SturmChain {
    /// `p, p', -rem(p, p'), ...`, each scaled to a primitive integer
    /// polynomial by a positive factor.
    pub fn new(p: &RatPoly) -> Self {
        let mut polys = Vec::new();
        if p.is_zero() {
            return SturmChain { polys };
        }
        polys.push(p.primitive());
        let d = p.derivative();
        if d.is_zero() {
            return SturmChain { polys };
        }
        polys.push(d.primitive());
        loop {
            let k = polys.len();
            let r = polys[k - 2].neg_rem_primitive(&polys[k - 1]);
            if r.is_zero() {
                break;
            }
            polys.push(r);
        }
        SturmChain { polys }
    }

    pub fn len(&self) -> usize {
        self.polys.len()
    }

    pub fn is_empty(&self) -> bool {
        self.polys.is_empty()
    }

    pub fn polys(&self) -> &[RatPoly] {
        &self.polys
    }

    fn variations(signs: impl Iterator<Item = Ordering>) -> usize {
        let mut last = Ordering::Equal;
        let mut count = 0;
        for s in signs.filter(|s| *s != Ordering::Equal) {
            if last != Ordering::Equal && s != last {
                count += 1;
            }
            last = s;
        }
        count
    }

    pub fn variations_at(&self, at: &Endpoint) -> usize {
        match at {
            Endpoint::ZeroPlus => {
                Self::variations(self.polys.iter().map(RatPoly::sign_at_zero_plus))
            }
            Endpoint::Infinity => {
                Self::variations(self.polys.iter().map(RatPoly::sign_at_infinity))
            }
            Endpoint::At(x) => Self::variations(self.polys.iter().map(|p| p.sign_at(x))),
        }
    }

    /// Distinct roots in `(lo, hi]`. Finite endpoints must not be roots.
    pub fn count_between(&self, lo: &Endpoint, hi: &Endpoint) -> usize {
        self.variations_at(lo)
            .saturating_sub(self.variations_at(hi))
    }

    /// Distinct positive roots.
    pub fn count_positive(&self) -> usize {
        self.count_between(&Endpoint::ZeroPlus, &Endpoint::Infinity)
    }
}

/// Smallest power of two strictly above the Cauchy bound
/// `1 + max |c_i / c_lead|`.
pub fn root_upper_bound(p: &RatPoly) -> BigRational {
    let one = BigRational::from_integer(1.into());
    let Some(lead) = p.leading() else {
        return one;
    };
    let mut bound = BigRational::zero();
    for c in &p.coeffs()[..p.coeffs().len() - 1] {
        let r = num_traits::Signed::abs(&(c / lead));
        if r > bound {
            bound = r;
        }
    }
    bound += &one;
    let two = BigRational::from_integer(2.into());
    let mut pow = one;
    while pow <= bound {
        pow *= &two;
    }
    pow
}
