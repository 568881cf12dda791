//! Positive roots of a quadrinomial through its derivative chain, for
//! degrees where a dense Sturm chain is impractical.
//!
//! In `s = ln p` (so `x = e^(s/n)`, `eps = m/n`):
//!
//! ```text
//! P(s)  = A e^s + B e^((1-eps)s) + C e^(eps s) + D
//! P'(s) = e^(eps s) T(s),  T(s) = A e^((1-eps)s) + (1-eps) B e^((1-2eps)s) + eps C
//! T'(s) = (1-eps) e^((1-2eps)s) (A e^(eps s) + (1-2eps) B)
//! ```
//!
//! `T'` has at most one zero, so `T` has at most two, and `P` is monotone
//! between consecutive zeros of `T`.

use std::cmp::Ordering;

use crate::quadrinomial::Quadrinomial;

/// A sum `sum c_i e^(r_i s)`.
#[derive(Debug, Clone, Copy)]
pub(crate) struct ExpSum<const K: usize> {
    terms: [(f64, f64); K],
}

impl<const K: usize> ExpSum<K> {
    /// Value scaled by `e^(-max r_i s)` together with the scaled absolute sum.
    fn scaled(&self, s: f64) -> (f64, f64) {
        let top = self
            .terms
            .iter()
            .map(|&(_, r)| r * s)
            .fold(f64::NEG_INFINITY, f64::max);
        let mut value = 0.0;
        let mut magnitude = 0.0;
        for &(c, r) in &self.terms {
            let w = (r * s - top).exp();
            value += c * w;
            magnitude += c.abs() * w;
        }
        (value, magnitude)
    }

    /// Sign with values within a few ulps of the term magnitude taken as zero.
    pub(crate) fn sign(&self, s: f64) -> Ordering {
        let (v, mag) = self.scaled(s);
        if v.abs() <= 64.0 * f64::EPSILON * mag {
            Ordering::Equal
        } else if v > 0.0 {
            Ordering::Greater
        } else {
            Ordering::Less
        }
    }

    /// Raw sign of the scaled value, no dead band.
    fn raw_sign(&self, s: f64) -> Ordering {
        self.scaled(s)
            .0
            .partial_cmp(&0.0)
            .unwrap_or(Ordering::Equal)
    }
}

fn sign_of(v: f64) -> Ordering {
    v.partial_cmp(&0.0).unwrap_or(Ordering::Equal)
}

pub(crate) fn p_sum(q: &Quadrinomial) -> ExpSum<4> {
    let eps = q.epsilon();
    ExpSum {
        terms: [(q.a, 1.0), (q.b, 1.0 - eps), (q.c, eps), (q.d, 0.0)],
    }
}

fn t_sum(q: &Quadrinomial) -> ExpSum<3> {
    let eps = q.epsilon();
    ExpSum {
        terms: [
            (q.a, 1.0 - eps),
            ((1.0 - eps) * q.b, 1.0 - 2.0 * eps),
            (eps * q.c, 0.0),
        ],
    }
}

/// End of a monotone piece.
#[derive(Debug, Clone, Copy)]
enum End {
    Finite(f64),
    NegInf,
    PosInf,
}

/// Point beyond `from` (in the direction of the infinite end) where `f` has
/// the sign it has in the limit.
fn reach_limit<const K: usize>(
    f: &ExpSum<K>,
    from: f64,
    towards_positive: bool,
    limit: Ordering,
) -> Option<f64> {
    let mut step = 1.0_f64;
    for _ in 0..1100 {
        let s = if towards_positive {
            from + step
        } else {
            from - step
        };
        if !s.is_finite() {
            return None;
        }
        if f.raw_sign(s) == limit {
            return Some(s);
        }
        step *= 2.0;
    }
    None
}

/// Bisects a sign change of `f` on `[lo, hi]` down to adjacent doubles.
fn bisect<const K: usize>(f: &ExpSum<K>, mut lo: f64, mut hi: f64) -> (f64, f64) {
    let s_lo = f.raw_sign(lo);
    for _ in 0..2000 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        match f.raw_sign(mid) {
            Ordering::Equal => return (mid, mid),
            s if s == s_lo => lo = mid,
            _ => hi = mid,
        }
    }
    (lo, hi)
}

/// Root of a function monotone on `(lo, hi)` whose one-sided signs at the
/// ends are `sign_lo` and `sign_hi` (both nonzero and different).
fn root_on_piece<const K: usize>(
    f: &ExpSum<K>,
    lo: End,
    hi: End,
    sign_lo: Ordering,
    sign_hi: Ordering,
) -> Option<(f64, f64)> {
    let anchor = match (lo, hi) {
        (End::Finite(a), _) => a,
        (_, End::Finite(b)) => b,
        _ => 0.0,
    };
    let a = match lo {
        End::Finite(a) => a,
        _ => {
            let start = if let End::Finite(b) = hi { b } else { anchor };
            reach_limit(f, start, false, sign_lo)?
        }
    };
    let b = match hi {
        End::Finite(b) => b,
        _ => {
            let start = if let End::Finite(a) = lo {
                a
            } else {
                anchor.max(a)
            };
            reach_limit(f, start, true, sign_hi)?
        }
    };
    Some(bisect(f, a, b))
}

/// A positive root located in log-price coordinates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogRoot {
    pub s_lo: f64,
    pub s_hi: f64,
    pub multiplicity: u32,
}

impl LogRoot {
    pub fn s(&self) -> f64 {
        0.5 * (self.s_lo + self.s_hi)
    }
}

/// Zeros of `T`, each tagged with whether `T` touches zero without
/// crossing (which happens only at the zero of `T'`).
fn critical_points(q: &Quadrinomial) -> Vec<(f64, f64, bool)> {
    let eps = q.epsilon();
    let t = t_sum(q);
    let at_neg = sign_of(q.c);
    let at_pos = sign_of(q.a);
    let ratio = -(1.0 - 2.0 * eps) * q.b / q.a;
    if ratio <= 0.0 {
        return root_on_piece(&t, End::NegInf, End::PosInf, at_neg, at_pos)
            .filter(|_| at_neg != at_pos)
            .map(|(lo, hi)| vec![(lo, hi, false)])
            .unwrap_or_default();
    }
    let s_star = ratio.ln() / eps;
    let mid_sign = t.sign(s_star);
    if mid_sign == Ordering::Equal {
        return vec![(s_star, s_star, true)];
    }
    let mut out = Vec::new();
    if at_neg != mid_sign {
        if let Some((lo, hi)) =
            root_on_piece(&t, End::NegInf, End::Finite(s_star), at_neg, mid_sign)
        {
            out.push((lo, hi, false));
        }
    }
    if mid_sign != at_pos {
        if let Some((lo, hi)) =
            root_on_piece(&t, End::Finite(s_star), End::PosInf, mid_sign, at_pos)
        {
            out.push((lo, hi, false));
        }
    }
    out
}

/// Distinct positive roots with multiplicities, in increasing order.
pub fn positive_roots(q: &Quadrinomial) -> Vec<LogRoot> {
    let p = p_sum(q);
    let crit = critical_points(q);

    // Boundaries of the monotone pieces and the sign of P at each.
    let mut ends = vec![(End::NegInf, sign_of(q.d), None)];
    for &(lo, hi, touching) in &crit {
        let c = 0.5 * (lo + hi);
        ends.push((End::Finite(c), p.sign(c), Some((lo, hi, touching))));
    }
    ends.push((End::PosInf, sign_of(q.a), None));

    let mut roots = Vec::new();
    for w in ends.windows(2) {
        let (lo, s_lo, _) = w[0];
        let (hi, s_hi, crit_hi) = w[1];
        if s_lo != Ordering::Equal && s_hi != Ordering::Equal && s_lo != s_hi {
            if let Some((a, b)) = root_on_piece(&p, lo, hi, s_lo, s_hi) {
                roots.push(LogRoot {
                    s_lo: a,
                    s_hi: b,
                    multiplicity: 1,
                });
            }
        }
        if s_hi == Ordering::Equal {
            if let Some((a, b, touching)) = crit_hi {
                roots.push(LogRoot {
                    s_lo: a,
                    s_hi: b,
                    multiplicity: if touching { 3 } else { 2 },
                });
            }
        }
    }
    roots
}

pub fn count_positive_roots(q: &Quadrinomial) -> usize {
    positive_roots(q).len()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(a: f64, b: f64, c: f64, d: f64, n: u64, m: u64) -> Quadrinomial {
        Quadrinomial::new(a, b, c, d, n, m).unwrap()
    }

    #[test]
    fn three_simple_roots() {
        let roots = positive_roots(&q(1.0, -6.0, 11.0, -6.0, 3, 1));
        assert_eq!(roots.len(), 3);
        for (r, want) in roots.iter().zip([1.0f64, 2.0, 3.0]) {
            assert!((r.s() / 3.0).exp() - want < 1e-12 && want - (r.s() / 3.0).exp() < 1e-12);
            assert_eq!(r.multiplicity, 1);
        }
    }

    #[test]
    fn tangential_root() {
        let roots = positive_roots(&q(1.0, -1.0, -1.0, 1.0, 3, 1));
        assert_eq!(roots.len(), 1);
        assert_eq!(roots[0].multiplicity, 2);
        assert!(roots[0].s().abs() < 1e-7);
    }

    #[test]
    fn e_star_single_root() {
        let roots = positive_roots(&q(-24.0, 32.0, -16.0, 24.0, 3, 1));
        assert_eq!(roots.len(), 1);
        let x = (roots[0].s() / 3.0).exp();
        assert!(x > 1.3 && x < 1.4);
    }

    #[test]
    fn high_degree_does_not_overflow() {
        // Economy sign pattern with AD - BC = -1 at degree 2001.
        let poly = q(-3.0, 4.0, -2.0, 3.0, 2001, 667);
        let r = positive_roots(&poly);
        assert_eq!(r.len(), 1);
        let s = r[0].s();
        assert!(s.is_finite());
        assert!(poly.evaluate_at_log_price(s).abs() < 1e-12 * poly.magnitude_at_log_price(s));
    }
}
