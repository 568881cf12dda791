//! Counting, isolating and refining the positive roots of quadrinomials, and
//! the exact double-root machinery behind the `AD - BC >= 0` lemma.
//!
//! Degrees up to [`STURM_MAX_DEGREE`] go through an exact Sturm chain (every
//! double is a dyadic rational, so no precision is lost on the way in).
//! Higher degrees use the derivative cascade in [`cascade`].

pub mod cascade;
pub mod lemma;
pub mod poly;
pub mod sturm;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quadrinomial::{ExactQuadrinomial, Quadrinomial};

pub use lemma::{
    closed_form_ad_bc, lemma_divpol_check, remainder_after_double_division,
    solve_double_root_family, LinearRemainder,
};
use poly::RatPoly;
use sturm::{Endpoint, SturmChain};

pub const STURM_MAX_DEGREE: u64 = 64;
pub const DEFAULT_ROOT_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RootMethod {
    Sturm,
    DerivativeCascade,
}

/// Positive roots of `P(x)`. Intervals, multiplicities and refined roots
/// are parallel lists in increasing order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RootReport {
    pub distinct_positive_roots: usize,
    pub isolating_intervals: Vec<(f64, f64)>,
    pub multiplicities: Vec<u32>,
    pub refined_roots: Vec<f64>,
    pub method: RootMethod,
}

impl RootReport {
    /// One distinct positive root of multiplicity one.
    pub fn is_unique_simple(&self) -> bool {
        self.distinct_positive_roots == 1 && self.multiplicities == [1]
    }
}

pub fn dense_poly(q: &ExactQuadrinomial) -> RatPoly {
    RatPoly::new(q.dense())
}

/// Distinct roots in `(0, inf)`.
pub fn count_positive_roots(q: &Quadrinomial) -> usize {
    if q.n <= STURM_MAX_DEGREE {
        count_positive_roots_sturm(&q.to_exact())
    } else {
        cascade::count_positive_roots(q)
    }
}

/// Sturm count at any degree. Cost grows quickly past a few dozen.
pub fn count_positive_roots_sturm(q: &ExactQuadrinomial) -> usize {
    SturmChain::new(&dense_poly(q)).count_positive()
}

pub fn isolate_positive_roots(q: &Quadrinomial, tol: f64) -> Result<RootReport> {
    if !(tol.is_finite() && tol > 0.0) {
        return Err(Error::Input(format!(
            "root tolerance must be positive, got {tol}"
        )));
    }
    if q.n <= STURM_MAX_DEGREE {
        Ok(isolate_sturm(&q.to_exact(), tol))
    } else {
        Ok(isolate_cascade(q, tol))
    }
}

fn isolate_cascade(q: &Quadrinomial, tol: f64) -> RootReport {
    let n = q.n as f64;
    let roots = cascade::positive_roots(q);
    let mut report = RootReport {
        distinct_positive_roots: roots.len(),
        isolating_intervals: Vec::with_capacity(roots.len()),
        multiplicities: Vec::with_capacity(roots.len()),
        refined_roots: Vec::with_capacity(roots.len()),
        method: RootMethod::DerivativeCascade,
    };
    for r in roots {
        let lo = (r.s_lo / n).exp();
        let hi = (r.s_hi / n).exp();
        let x = (r.s() / n).exp();
        // Bisection already ran to adjacent doubles; widen only if the
        // conversion produced an empty interval.
        let (lo, hi) = if hi - lo > tol {
            (x - 0.5 * tol, x + 0.5 * tol)
        } else {
            (lo.min(x), hi.max(x))
        };
        report.isolating_intervals.push((lo, hi));
        report.multiplicities.push(r.multiplicity);
        report.refined_roots.push(x);
    }
    report
}

fn to_f64(x: &BigRational) -> f64 {
    x.to_f64().unwrap_or(f64::NAN)
}

fn half(x: &BigRational) -> BigRational {
    x / BigRational::from_integer(BigInt::from(2))
}

/// Exact Sturm-guided isolation followed by bisection on the square-free
/// factor that carries each root.
pub fn isolate_sturm(q: &ExactQuadrinomial, tol: f64) -> RootReport {
    let p = dense_poly(q).primitive();
    let chain = SturmChain::new(&p);
    let upper = sturm::root_upper_bound(&p);

    // (lo, hi] intervals holding exactly one distinct root; lo = 0 means 0+.
    let mut isolated: Vec<(BigRational, BigRational)> = Vec::new();
    let mut stack = vec![(BigRational::zero(), upper)];
    while let Some((lo, hi)) = stack.pop() {
        let lo_end = if lo.is_zero() {
            Endpoint::ZeroPlus
        } else {
            Endpoint::At(lo.clone())
        };
        let count = chain.count_between(&lo_end, &Endpoint::At(hi.clone()));
        match count {
            0 => {}
            1 => isolated.push((lo, hi)),
            _ => {
                let mut mid = half(&(&lo + &hi));
                while p.sign_at(&mid).is_eq() {
                    mid = half(&(&mid + &hi));
                }
                stack.push((mid.clone(), hi));
                stack.push((lo, mid));
            }
        }
    }
    isolated.sort_by(|a, b| a.0.cmp(&b.0));

    let factors: Vec<RatPoly> = p
        .square_free_decomposition()
        .iter()
        .map(RatPoly::primitive)
        .collect();
    let factor_chains: Vec<SturmChain> = factors.iter().map(SturmChain::new).collect();
    let tol_r = BigRational::from_float(tol).unwrap_or_else(BigRational::one);

    let mut report = RootReport {
        distinct_positive_roots: isolated.len(),
        isolating_intervals: Vec::new(),
        multiplicities: Vec::new(),
        refined_roots: Vec::new(),
        method: RootMethod::Sturm,
    };
    for (lo, hi) in isolated {
        let lo_end = if lo.is_zero() {
            Endpoint::ZeroPlus
        } else {
            Endpoint::At(lo.clone())
        };
        let hi_end = Endpoint::At(hi.clone());
        let idx = factor_chains
            .iter()
            .position(|c| !c.is_empty() && c.count_between(&lo_end, &hi_end) > 0)
            .expect("every root of p is a root of one square-free factor");
        let factor = &factors[idx];

        let (ilo, ihi) = refine(factor, lo, hi, &tol_r);
        report
            .isolating_intervals
            .push((to_f64(&ilo), to_f64(&ihi)));
        // Keep going for the reported root value.
        let fine = BigRational::new(BigInt::one(), BigInt::one() << 52u32) * &ihi;
        let (rlo, rhi) = refine(factor, ilo, ihi, &fine);
        report.refined_roots.push(to_f64(&half(&(rlo + rhi))));
        report.multiplicities.push(idx as u32 + 1);
    }
    report
}

/// Bisection of a simple root of the square-free `factor` in `(lo, hi]`.
fn refine(
    factor: &RatPoly,
    mut lo: BigRational,
    mut hi: BigRational,
    width: &BigRational,
) -> (BigRational, BigRational) {
    let sign_lo = if lo.is_zero() {
        factor.sign_at_zero_plus()
    } else {
        factor.sign_at(&lo)
    };
    if factor.sign_at(&hi).is_eq() {
        return (hi.clone(), hi);
    }
    while &hi - &lo > *width {
        let mid = half(&(&lo + &hi));
        let s = factor.sign_at(&mid);
        if s.is_eq() {
            return (mid.clone(), mid);
        }
        if s == sign_lo {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    (lo, hi)
}
