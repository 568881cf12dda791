//! Brute-force and randomized cross-checks of the analytic pipeline.
//!
//! Every randomized routine takes an explicit seed; trials run in parallel,
//! each on its own ChaCha stream, so results depend only on the seed.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::certifier::{c2_threshold, canonicalize};
use crate::economy::{
    demand_x_with_exponent, excess_demand, excess_demand_with_exponent, utility, AgentType,
    Economy, EconomyFile, HaraParams,
};
use crate::error::{Error, Result};
use crate::quadrinomial::{pow_rational, ExactQuadrinomial, Quadrinomial};
use crate::rational::{approximate_inverse_gamma, RationalEpsilon, DEFAULT_MAX_DENOMINATOR};
use crate::roots::lemma::{analytic_remainder, long_division_steps};
use crate::roots::{
    closed_form_ad_bc, count_positive_roots, remainder_after_double_division,
    solve_double_root_family,
};

pub const DEFAULT_BRACKET: (f64, f64) = (1e-6, 1e6);
pub const DEFAULT_GRID_POINTS: usize = 10_000;
pub const DEFAULT_SEED: u64 = 0;
pub const MIN_GRID_POINTS: usize = 1000;

fn stream(seed: u64, i: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(i);
    rng
}

/// How the HARA shift `b` is drawn.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum BPolicy {
    /// `b` = factor times the uniqueness threshold of the drawn economy.
    AtThresholdTimes(f64),
    Fixed(f64),
    /// Uniform on `[lo, hi]`.
    Free(f64, f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EconomySampler {
    pub seed: u64,
    pub gamma_range: (f64, f64),
    pub endowment_range: (f64, f64),
    pub beta_ratio_range: (f64, f64),
    /// Range of `beta1`, drawn log-uniformly; `beta2 = beta1 * ratio`.
    pub beta1_range: (f64, f64),
    pub b_policy: BPolicy,
    /// Sort endowments so that `e1 <= e2` and `f1 >= f2`.
    pub enforce_c1: bool,
}

impl Default for EconomySampler {
    fn default() -> Self {
        EconomySampler {
            seed: DEFAULT_SEED,
            gamma_range: (2.0, 12.0),
            endowment_range: (0.0, 10.0),
            beta_ratio_range: (1.1, 100.0),
            beta1_range: (0.01, 1.0),
            b_policy: BPolicy::AtThresholdTimes(1.01),
            enforce_c1: true,
        }
    }
}

/// Uniform on `(lo, hi]`.
fn open_closed(rng: &mut ChaCha8Rng, (lo, hi): (f64, f64)) -> f64 {
    let u: f64 = rng.gen();
    hi - u * (hi - lo)
}

impl EconomySampler {
    pub fn sample_one(&self, rng: &mut ChaCha8Rng) -> Economy {
        let gamma = open_closed(rng, self.gamma_range);
        let (blo, bhi) = self.beta1_range;
        let beta1 = (rng.gen_range(blo.ln()..=bhi.ln())).exp();
        let ratio = rng.gen_range(self.beta_ratio_range.0..=self.beta_ratio_range.1);
        let mut e = [
            open_closed(rng, self.endowment_range),
            open_closed(rng, self.endowment_range),
        ];
        let mut f = [
            open_closed(rng, self.endowment_range),
            open_closed(rng, self.endowment_range),
        ];
        if self.enforce_c1 {
            e.sort_by(f64::total_cmp);
            f.sort_by(|x, y| y.total_cmp(x));
        }
        let a1 = AgentType {
            beta: beta1,
            e: e[0],
            f: f[0],
        };
        let a2 = AgentType {
            beta: beta1 * ratio,
            e: e[1],
            f: f[1],
        };
        let mut econ = Economy {
            hara: HaraParams {
                gamma,
                a: 1.0,
                b: 0.0,
            },
            agents: [a1, a2],
        };
        econ.hara.b = match self.b_policy {
            BPolicy::AtThresholdTimes(lambda) => lambda * c2_threshold(&econ),
            BPolicy::Fixed(b) => b,
            BPolicy::Free(lo, hi) => rng.gen_range(lo..=hi),
        };
        econ
    }

    /// `count` economies; economy `i` depends only on `(seed, i)`.
    pub fn sample(&self, count: usize) -> Vec<Economy> {
        (0..count as u64)
            .map(|i| self.sample_one(&mut stream(self.seed, i)))
            .collect()
    }

    /// Like [`EconomySampler::sample`] but with agents ordered by `beta`.
    pub fn sample_canonical(&self, count: usize) -> Vec<Economy> {
        self.sample(count)
            .into_iter()
            .map(|e| canonicalize(&e).map(|c| c.economy).unwrap_or(e))
            .collect()
    }
}

fn check_scan(grid_points: usize, p_lo: f64, p_hi: f64) -> Result<()> {
    if grid_points < MIN_GRID_POINTS {
        return Err(Error::Input(format!(
            "grid needs at least {MIN_GRID_POINTS} points, got {grid_points}"
        )));
    }
    if !(p_lo > 0.0 && p_lo < p_hi && p_hi.is_finite()) {
        return Err(Error::Input(format!(
            "bracket must satisfy 0 < lo < hi, got [{p_lo}, {p_hi}]"
        )));
    }
    Ok(())
}

/// Sign of `v` against the rounding scale `mag`.
fn banded_sign(v: f64, mag: f64) -> i8 {
    if !v.is_finite() || v.abs() <= 1e-13 * mag {
        0
    } else if v > 0.0 {
        1
    } else {
        -1
    }
}

/// Sign changes of `f` over a log-spaced grid on `[p_lo, p_hi]`.
///
/// `f` returns a value and a rounding scale. Values inside the scale's
/// dead band are skipped. Each change is bisected to a crossing, and
/// adjacent crossings closer than rounding can resolve are dropped as a
/// pair.
pub fn sign_changes_of<F>(f: F, grid_points: usize, p_lo: f64, p_hi: f64) -> Result<Vec<f64>>
where
    F: Fn(f64) -> (f64, f64),
{
    check_scan(grid_points, p_lo, p_hi)?;
    let (llo, lhi) = (p_lo.ln(), p_hi.ln());
    let step = (lhi - llo) / (grid_points - 1) as f64;
    let mut crossings = Vec::new();
    let mut last: Option<(f64, i8)> = None;
    for i in 0..grid_points {
        let p = if i + 1 == grid_points {
            p_hi
        } else {
            (llo + step * i as f64).exp()
        };
        let (v, mag) = f(p);
        let s = banded_sign(v, mag);
        if s == 0 {
            continue;
        }
        if let Some((q, sq)) = last {
            if sq != s {
                crossings.push(bisect_crossing(&f, q, p, sq));
            }
        }
        last = Some((p, s));
    }
    let mut kept: Vec<f64> = Vec::with_capacity(crossings.len());
    for r in crossings {
        match kept.last() {
            Some(&prev) if r - prev <= (1e-10 * prev).min(1e-7) => {
                kept.pop();
            }
            _ => kept.push(r),
        }
    }
    Ok(kept)
}

fn bisect_crossing<F: Fn(f64) -> (f64, f64)>(f: &F, mut lo: f64, mut hi: f64, sign_lo: i8) -> f64 {
    for _ in 0..200 {
        let mid = (lo * hi).sqrt();
        if mid <= lo || mid >= hi {
            break;
        }
        let v = f(mid).0;
        if v == 0.0 {
            return mid;
        }
        if (v > 0.0) == (sign_lo > 0) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

fn excess_with_scale(econ: &Economy, exponent: f64, p: f64) -> (f64, f64) {
    let mut total = -econ.total_x();
    let mut mag = econ.total_x();
    for agent in &econ.agents {
        match demand_x_with_exponent(&econ.hara, agent, exponent, p) {
            Ok(x) => {
                total += x;
                mag += x.abs();
            }
            Err(_) => return (f64::NAN, 0.0),
        }
    }
    (total, mag)
}

/// Sign changes of the excess demand at exponent `eps`.
pub fn sign_change_count(
    econ: &Economy,
    eps: &RationalEpsilon,
    grid_points: usize,
    p_lo: f64,
    p_hi: f64,
) -> Result<usize> {
    sign_change_count_with_exponent(econ, eps.value(), grid_points, p_lo, p_hi)
}

/// Sign changes of the excess demand with an arbitrary real exponent,
/// typically the true `1/gamma`.
pub fn sign_change_count_with_exponent(
    econ: &Economy,
    exponent: f64,
    grid_points: usize,
    p_lo: f64,
    p_hi: f64,
) -> Result<usize> {
    Ok(sign_changes_of(
        |p| excess_with_scale(econ, exponent, p),
        grid_points,
        p_lo,
        p_hi,
    )?
    .len())
}

/// Crossings of `P(p^(1/n))` in price space.
pub fn quadrinomial_crossings(
    q: &Quadrinomial,
    grid_points: usize,
    p_lo: f64,
    p_hi: f64,
) -> Result<Vec<f64>> {
    sign_changes_of(
        |p| {
            let s = p.ln();
            (q.evaluate_at_log_price(s), q.magnitude_at_log_price(s))
        },
        grid_points,
        p_lo,
        p_hi,
    )
}

const INV_PHI: f64 = 0.618_033_988_749_894_9;

/// Utility-maximizing `x` on the budget segment, at the true `gamma`.
///
/// A grid over `[0, wealth/p]` locates the best cell; golden-section search
/// then refines inside the neighbouring cells.
pub fn demand_oracle(
    hara: &HaraParams,
    agent: &AgentType,
    p: f64,
    grid_points: usize,
) -> Result<f64> {
    if !(p.is_finite() && p > 0.0) {
        return Err(Error::Input(format!(
            "price must be positive and finite, got {p}"
        )));
    }
    if grid_points < 2 {
        return Err(Error::Input(
            "demand oracle needs at least 2 grid points".into(),
        ));
    }
    let w = agent.wealth(p);
    let x_max = w / p;
    let u = |x: f64| {
        utility(hara, agent, x, w - p * x)
            .ok()
            .filter(|v| v.is_finite())
    };
    if x_max <= 0.0 {
        return u(0.0).map(|_| 0.0).ok_or(Error::EmptyBudgetDomain);
    }

    let h = x_max / grid_points as f64;
    let mut best: Option<(usize, f64)> = None;
    for i in 0..=grid_points {
        let x = if i == grid_points {
            x_max
        } else {
            h * i as f64
        };
        if let Some(v) = u(x) {
            if best.is_none_or(|(_, b)| v > b) {
                best = Some((i, v));
            }
        }
    }
    let (i, _) = best.ok_or(Error::EmptyBudgetDomain)?;

    let mut lo = h * i.saturating_sub(1) as f64;
    let mut hi = (h * (i + 1) as f64).min(x_max);
    // Undefined points rank below any defined one.
    let g = |x: f64| u(x).unwrap_or(f64::NEG_INFINITY);
    let mut c = hi - INV_PHI * (hi - lo);
    let mut d = lo + INV_PHI * (hi - lo);
    let (mut gc, mut gd) = (g(c), g(d));
    for _ in 0..300 {
        if hi - lo <= 1e-12 * hi.max(f64::MIN_POSITIVE) {
            break;
        }
        if gc >= gd {
            hi = d;
            d = c;
            gd = gc;
            c = hi - INV_PHI * (hi - lo);
            gc = g(c);
        } else {
            lo = c;
            c = d;
            gc = gd;
            d = lo + INV_PHI * (hi - lo);
            gd = g(d);
        }
    }
    Ok(0.5 * (lo + hi))
}

/// One recorded failure of the double-root inequality or its closed form.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LemmaFailure {
    pub trial: u64,
    pub n: u64,
    pub m: u64,
    pub alpha: String,
    pub a: String,
    pub b: String,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LemmaFuzzReport {
    pub seed: u64,
    pub trials: u64,
    pub max_n: u64,
    /// Draws rejected because `C` or `D` came out zero.
    pub discarded: u64,
    pub violations: Vec<LemmaFailure>,
    /// Trials on the `alpha^m A = -B` family.
    pub equality_family: u64,
    /// Trials with `AD - BC = 0`.
    pub zero_ad_bc: u64,
    /// Trials where `AD - BC = 0` and membership in the family disagree.
    pub equality_mismatches: u64,
    pub closed_form_mismatches: u64,
}

impl LemmaFuzzReport {
    pub fn clean(&self) -> bool {
        self.violations.is_empty()
            && self.equality_mismatches == 0
            && self.closed_form_mismatches == 0
    }
}

fn small_rational(rng: &mut ChaCha8Rng, nonzero_sign: bool) -> BigRational {
    let num: i64 = rng.gen_range(1..=12);
    let den: i64 = rng.gen_range(1..=12);
    let sign = if nonzero_sign && rng.gen_bool(0.5) {
        -1
    } else {
        1
    };
    BigRational::new(BigInt::from(sign * num), BigInt::from(den))
}

fn draw_exponents(rng: &mut ChaCha8Rng, max_n: u64) -> (u64, u64) {
    let n = rng.gen_range(3..=max_n);
    let m = rng.gen_range(1..=(n - 1) / 2);
    (n, m)
}

struct TrialOutcome {
    discarded: u64,
    family: bool,
    zero: bool,
    equality_mismatch: bool,
    closed_form_mismatch: bool,
    violation: Option<LemmaFailure>,
}

fn lemma_trial(seed: u64, trial: u64, max_n: u64) -> TrialOutcome {
    let mut rng = stream(seed, trial);
    let family = trial % 10 == 9;
    let mut discarded = 0;
    loop {
        let (n, m) = draw_exponents(&mut rng, max_n);
        let alpha = small_rational(&mut rng, false);
        let a = small_rational(&mut rng, true);
        let b = if family {
            -(pow_rational(&alpha, m) * &a)
        } else {
            small_rational(&mut rng, true)
        };
        let q = match solve_double_root_family(n, m, &alpha, &a, &b) {
            Ok(q) => q,
            Err(Error::Degenerate(_)) => {
                discarded += 1;
                continue;
            }
            Err(e) => unreachable!("draws respect the preconditions: {e}"),
        };
        let ad_bc = q.ad_minus_bc();
        let s = pow_rational(&alpha, m) * &a + &b;
        let closed = closed_form_ad_bc(n, m, &alpha, &a, &b);
        let failure = |message: String| LemmaFailure {
            trial,
            n,
            m,
            alpha: alpha.to_string(),
            a: a.to_string(),
            b: b.to_string(),
            message,
        };
        let violation = if ad_bc.is_negative() {
            Some(failure(format!("AD - BC = {ad_bc} < 0")))
        } else if !remainder_after_double_division(&q, &alpha)
            .map(|r| r.is_zero())
            .unwrap_or(false)
        {
            Some(failure(
                "alpha is not a double root of the constructed quadrinomial".into(),
            ))
        } else {
            None
        };
        return TrialOutcome {
            discarded,
            family,
            zero: ad_bc.is_zero(),
            equality_mismatch: ad_bc.is_zero() != s.is_zero(),
            closed_form_mismatch: closed != ad_bc,
            violation,
        };
    }
}

/// Exact-arithmetic fuzzing of the double-root inequality. Every tenth trial
/// lies on the equality family `B = -alpha^m A`.
pub fn lemma_fuzzer(trials: u64, max_n: u64, seed: u64) -> Result<LemmaFuzzReport> {
    if max_n < 5 {
        return Err(Error::Input(format!(
            "max_n must be at least 5, got {max_n}"
        )));
    }
    let outcomes: Vec<TrialOutcome> = (0..trials)
        .into_par_iter()
        .map(|t| lemma_trial(seed, t, max_n))
        .collect();
    let mut report = LemmaFuzzReport {
        seed,
        trials,
        max_n,
        discarded: 0,
        violations: Vec::new(),
        equality_family: 0,
        zero_ad_bc: 0,
        equality_mismatches: 0,
        closed_form_mismatches: 0,
    };
    for o in outcomes {
        report.discarded += o.discarded;
        report.equality_family += o.family as u64;
        report.zero_ad_bc += o.zero as u64;
        report.equality_mismatches += o.equality_mismatch as u64;
        report.closed_form_mismatches += o.closed_form_mismatch as u64;
        report.violations.extend(o.violation);
    }
    Ok(report)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RemainderReport {
    pub seed: u64,
    pub trials: u64,
    /// Trials where double synthetic division, the derivative formula and
    /// the last long-division step disagree.
    pub mismatches: Vec<u64>,
}

/// Random `(P, alpha)` pairs: the remainder of `P` by `(x - alpha)^2` must be
/// `P'(alpha) x + P(alpha) - alpha P'(alpha)` by every route.
pub fn remainder_identity_check(trials: u64, max_n: u64, seed: u64) -> Result<RemainderReport> {
    if max_n < 3 {
        return Err(Error::Input(format!(
            "max_n must be at least 3, got {max_n}"
        )));
    }
    let mismatches: Vec<u64> = (0..trials)
        .into_par_iter()
        .filter(|&t| {
            let mut rng = stream(seed, t);
            let (n, m) = draw_exponents(&mut rng, max_n);
            let coeffs: Vec<BigRational> = (0..4).map(|_| small_rational(&mut rng, true)).collect();
            let alpha = small_rational(&mut rng, false);
            let [a, b, c, d]: [BigRational; 4] = coeffs.try_into().expect("four coefficients");
            let q =
                ExactQuadrinomial::new(a, b, c, d, n, m).expect("nonzero coefficients and n > 2m");
            let Ok(synthetic) = remainder_after_double_division(&q, &alpha) else {
                return true;
            };
            let analytic = analytic_remainder(&q, &alpha);
            let steps = long_division_steps(&q, &alpha);
            let last = steps.last().expect("degree at least 3");
            let coef = |i: usize| {
                last.coeffs()
                    .get(i)
                    .cloned()
                    .unwrap_or_else(BigRational::zero)
            };
            synthetic != analytic || coef(0) != synthetic.intercept || coef(1) != synthetic.slope
        })
        .collect();
    Ok(RemainderReport {
        seed,
        trials,
        mismatches,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PerturbationEntry {
    pub tol: f64,
    pub epsilon: Option<RationalEpsilon>,
    pub sign_changes_true_gamma: usize,
    pub polynomial_roots: Option<usize>,
    pub agree: bool,
    pub note: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PerturbationReport {
    pub entries: Vec<PerturbationEntry>,
    /// Tolerances where the two counts differ.
    pub mismatched_tols: Vec<f64>,
}

/// For each tolerance, compares the sign changes of the excess demand at the
/// true `gamma` with the positive root count at the approximating `m/n`.
pub fn perturbation_consistency(
    econ: &Economy,
    tols: &[f64],
    grid_points: usize,
    bracket: (f64, f64),
) -> Result<PerturbationReport> {
    econ.hara.validate()?;
    let exponent = 1.0 / econ.hara.gamma;
    let true_count =
        sign_change_count_with_exponent(econ, exponent, grid_points, bracket.0, bracket.1)?;
    let mut entries = Vec::with_capacity(tols.len());
    for &tol in tols {
        let entry = match approximate_inverse_gamma(econ.hara.gamma, tol, DEFAULT_MAX_DENOMINATOR) {
            Ok(eps) => match Quadrinomial::from_economy(econ, &eps) {
                Ok(q) => {
                    let roots = count_positive_roots(&q);
                    PerturbationEntry {
                        tol,
                        epsilon: Some(eps),
                        sign_changes_true_gamma: true_count,
                        polynomial_roots: Some(roots),
                        agree: roots == true_count,
                        note: None,
                    }
                }
                Err(e) => PerturbationEntry {
                    tol,
                    epsilon: Some(eps),
                    sign_changes_true_gamma: true_count,
                    polynomial_roots: None,
                    agree: false,
                    note: Some(e.to_string()),
                },
            },
            Err(e) => PerturbationEntry {
                tol,
                epsilon: None,
                sign_changes_true_gamma: true_count,
                polynomial_roots: None,
                agree: false,
                note: Some(e.to_string()),
            },
        };
        entries.push(entry);
    }
    let mismatched_tols = entries.iter().filter(|e| !e.agree).map(|e| e.tol).collect();
    Ok(PerturbationReport {
        entries,
        mismatched_tols,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MultiEquilibriumSample {
    pub index: u64,
    pub economy: EconomyFile,
    pub sign_changes_true_gamma: usize,
    pub perturbation: PerturbationReport,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MultiEquilibriumSearch {
    pub seed: u64,
    pub searched: u64,
    pub found: Vec<MultiEquilibriumSample>,
    pub summary: String,
}

pub const PERTURBATION_TOLS: [f64; 3] = [1e-2, 1e-4, 1e-6];

/// Random search for economies with several equilibria at the true `gamma`.
/// Finding none is a valid outcome and is reported as such.
pub fn search_multiple_equilibria(
    sampler: &EconomySampler,
    samples: u64,
    grid_points: usize,
    bracket: (f64, f64),
) -> Result<MultiEquilibriumSearch> {
    check_scan(grid_points, bracket.0, bracket.1)?;
    let found: Vec<MultiEquilibriumSample> = (0..samples)
        .into_par_iter()
        .filter_map(|i| {
            let econ = sampler.sample_one(&mut stream(sampler.seed, i));
            let count = sign_change_count_with_exponent(
                &econ,
                1.0 / econ.hara.gamma,
                grid_points,
                bracket.0,
                bracket.1,
            )
            .ok()?;
            if count < 2 {
                return None;
            }
            let perturbation =
                perturbation_consistency(&econ, &PERTURBATION_TOLS, grid_points, bracket).ok()?;
            Some(MultiEquilibriumSample {
                index: i,
                economy: econ.to_file(),
                sign_changes_true_gamma: count,
                perturbation,
            })
        })
        .collect();
    let summary = if found.is_empty() {
        format!("none found in {samples} samples")
    } else {
        format!(
            "{} of {samples} samples have several equilibria",
            found.len()
        )
    };
    Ok(MultiEquilibriumSearch {
        seed: sampler.seed,
        searched: samples,
        found,
        summary,
    })
}

/// Sampler for the multiplicity search: CRRA or near-CRRA economies with
/// lopsided endowments and no ordering constraint.
pub fn multiplicity_sampler(seed: u64) -> EconomySampler {
    EconomySampler {
        seed,
        gamma_range: (2.0, 30.0),
        endowment_range: (0.0, 10.0),
        beta_ratio_range: (1.1, 100.0),
        beta1_range: (0.01, 1.0),
        b_policy: BPolicy::Free(0.0, 0.5),
        enforce_c1: false,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DemandCheck {
    pub agent: usize,
    pub price: f64,
    pub closed_form: f64,
    pub oracle: f64,
    pub relative_gap: f64,
    /// Whether the closed form lies on the budget segment. Only interior
    /// points are expected to match the constrained oracle.
    pub interior: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EconomyOracleReport {
    pub epsilon: RationalEpsilon,
    pub polynomial_roots: usize,
    pub sign_changes_at_epsilon: usize,
    pub sign_changes_true_gamma: usize,
    pub demand_checks: Vec<DemandCheck>,
    pub perturbation: PerturbationReport,
}

/// Oracle cross-checks for one economy. Demand is compared at the
/// crossings of the excess demand at the true `gamma`, or at `p = 1` when
/// there are none in the bracket.
pub fn check_economy(
    econ: &Economy,
    eps: &RationalEpsilon,
    grid_points: usize,
    bracket: (f64, f64),
) -> Result<EconomyOracleReport> {
    let q = Quadrinomial::from_economy(econ, eps)?;
    let polynomial_roots = count_positive_roots(&q);
    let sign_changes_at_epsilon = sign_change_count(econ, eps, grid_points, bracket.0, bracket.1)?;
    let exponent = 1.0 / econ.hara.gamma;
    let crossings = sign_changes_of(
        |p| excess_with_scale(econ, exponent, p),
        grid_points,
        bracket.0,
        bracket.1,
    )?;
    let prices = if crossings.is_empty() {
        vec![1.0]
    } else {
        crossings.clone()
    };
    let mut demand_checks = Vec::new();
    for &price in &prices {
        for (i, agent) in econ.agents.iter().enumerate() {
            let closed_form = demand_x_with_exponent(&econ.hara, agent, exponent, price)?;
            let oracle = demand_oracle(&econ.hara, agent, price, grid_points)?;
            let x_max = agent.wealth(price) / price;
            demand_checks.push(DemandCheck {
                agent: i + 1,
                price,
                closed_form,
                oracle,
                relative_gap: (closed_form - oracle).abs() / closed_form.abs().max(1e-300),
                interior: (0.0..=x_max).contains(&closed_form),
            });
        }
    }
    let perturbation = perturbation_consistency(econ, &PERTURBATION_TOLS, grid_points, bracket)?;
    Ok(EconomyOracleReport {
        epsilon: *eps,
        polynomial_roots,
        sign_changes_at_epsilon,
        sign_changes_true_gamma: crossings.len(),
        demand_checks,
        perturbation,
    })
}

/// Residual of the excess demand at `p`, scaled by total supply of `x`.
pub fn relative_residual(econ: &Economy, eps: &RationalEpsilon, p: f64) -> Result<f64> {
    Ok(excess_demand(econ, eps, p)?.abs() / econ.total_x().max(1.0))
}

/// Excess demand at the true `gamma`.
pub fn excess_demand_true_gamma(econ: &Economy, p: f64) -> Result<f64> {
    excess_demand_with_exponent(econ, 1.0 / econ.hara.gamma, p)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn econ(gamma: f64, b: f64, a1: (f64, f64, f64), a2: (f64, f64, f64)) -> Economy {
        Economy::new(
            HaraParams { gamma, a: 1.0, b },
            AgentType {
                beta: a1.0,
                e: a1.1,
                f: a1.2,
            },
            AgentType {
                beta: a2.0,
                e: a2.1,
                f: a2.2,
            },
        )
        .unwrap()
    }

    fn e_star() -> Economy {
        econ(3.0, 5.0, (0.125, 1.0, 1.0), (1.0, 1.0, 1.0))
    }

    fn third() -> RationalEpsilon {
        RationalEpsilon::new(1, 3).unwrap()
    }

    #[test]
    fn sampler_is_deterministic_and_valid() {
        let s = EconomySampler::default();
        let a = s.sample(50);
        assert_eq!(a, s.sample(50));
        for e in &a {
            assert!(Economy::new(e.hara, e.agents[0], e.agents[1]).is_ok());
            assert!(e.hara.gamma > 2.0 && e.hara.gamma <= 12.0);
            assert!(e.agents[0].e <= e.agents[1].e && e.agents[0].f >= e.agents[1].f);
            let ratio = e.agents[1].beta / e.agents[0].beta;
            assert!((1.1 - 1e-12..=100.0 + 1e-9).contains(&ratio));
            assert!((e.hara.b / c2_threshold(e) - 1.01).abs() < 1e-12);
        }
        let other = EconomySampler { seed: 1, ..s }.sample(50);
        assert_ne!(a, other);
    }

    #[test]
    fn sign_changes_e_star() {
        assert_eq!(
            sign_change_count(&e_star(), &third(), 10_000, 1e-3, 1e3).unwrap(),
            1
        );
    }

    #[test]
    fn sign_changes_symmetric() {
        let e = econ(3.0, 0.0, (1.0, 1.0, 1.0), (1.0, 1.0, 1.0));
        assert_eq!(
            sign_change_count(&e, &third(), 10_000, 1e-3, 1e3).unwrap(),
            1
        );
    }

    #[test]
    fn crossings_of_three_root_family() {
        let q = Quadrinomial::new(1.0, -6.0, 11.0, -6.0, 3, 1).unwrap();
        let r = quadrinomial_crossings(&q, 10_000, 1e-3, 1e3).unwrap();
        assert_eq!(r.len(), 3);
        for (x, want) in r.iter().zip([1.0, 8.0, 27.0]) {
            assert!((x - want).abs() < 1e-9 * want, "{x} vs {want}");
        }
    }

    #[test]
    fn scan_rejects_bad_inputs() {
        assert!(sign_change_count(&e_star(), &third(), 999, 1e-3, 1e3).is_err());
        assert!(sign_change_count(&e_star(), &third(), 1000, 1.0, 1.0).is_err());
        assert!(sign_change_count(&e_star(), &third(), 1000, 0.0, 1.0).is_err());
    }

    #[test]
    fn oracle_symmetric_crra() {
        let h = HaraParams {
            gamma: 3.0,
            a: 1.0,
            b: 0.0,
        };
        let agent = AgentType {
            beta: 1.0,
            e: 1.0,
            f: 1.0,
        };
        let x = demand_oracle(&h, &agent, 1.0, 10_000).unwrap();
        assert!((x - 1.0).abs() < 1e-8);
    }

    #[test]
    fn oracle_closed_form_case() {
        let h = HaraParams {
            gamma: 3.0,
            a: 1.0,
            b: 0.0,
        };
        let agent = AgentType {
            beta: 1.0,
            e: 1.0,
            f: 2.0,
        };
        let x = demand_oracle(&h, &agent, 8.0, 10_000).unwrap();
        assert!((x - 1.0).abs() < 1e-8, "{x}");
        let closed = demand_x_with_exponent(&h, &agent, 1.0 / 3.0, 8.0).unwrap();
        assert!((closed - 1.0).abs() < 1e-12);
    }

    #[test]
    fn oracle_rejects_bad_price() {
        let h = HaraParams {
            gamma: 3.0,
            a: 1.0,
            b: 0.0,
        };
        let agent = AgentType {
            beta: 1.0,
            e: 1.0,
            f: 2.0,
        };
        assert!(demand_oracle(&h, &agent, 0.0, 100).is_err());
    }

    #[test]
    fn fuzzer_small_run() {
        let r = lemma_fuzzer(200, 15, 0).unwrap();
        assert!(r.clean(), "{r:?}");
        assert_eq!(r.equality_family, 20);
        assert!(r.zero_ad_bc >= 20);
        assert_eq!(r, lemma_fuzzer(200, 15, 0).unwrap());
        assert!(lemma_fuzzer(10, 4, 0).is_err());
    }

    #[test]
    fn remainder_check_small_run() {
        let r = remainder_identity_check(100, 12, 3).unwrap();
        assert!(r.mismatches.is_empty());
    }

    #[test]
    fn perturbation_e_star() {
        let r = perturbation_consistency(&e_star(), &PERTURBATION_TOLS, 10_000, DEFAULT_BRACKET)
            .unwrap();
        assert!(r.mismatched_tols.is_empty(), "{r:?}");
        for e in &r.entries {
            assert_eq!(e.sign_changes_true_gamma, 1);
            assert_eq!(e.polynomial_roots, Some(1));
        }
    }

    #[test]
    fn perturbation_symmetric() {
        let e = econ(3.5, 0.0, (1.0, 1.0, 1.0), (1.0, 1.0, 1.0));
        let r = perturbation_consistency(&e, &PERTURBATION_TOLS, 10_000, DEFAULT_BRACKET).unwrap();
        assert!(r.mismatched_tols.is_empty(), "{r:?}");
    }

    #[test]
    fn check_economy_e_star() {
        let r = check_economy(&e_star(), &third(), 10_000, DEFAULT_BRACKET).unwrap();
        assert_eq!(r.polynomial_roots, 1);
        assert_eq!(r.sign_changes_at_epsilon, 1);
        assert_eq!(r.sign_changes_true_gamma, 1);
        // Agent 2's closed-form demand is negative at the equilibrium.
        assert_eq!(r.demand_checks.iter().filter(|c| c.interior).count(), 0);
        let x_max = 1.0 + 1.0 / r.demand_checks[0].price;
        assert!((r.demand_checks[0].oracle - x_max).abs() < 1e-9);
    }

    #[test]
    fn oracle_matches_interior_closed_form() {
        let e = econ(3.0, 0.5, (0.5, 1.0, 2.0), (1.0, 2.0, 1.0));
        let mut checked = 0;
        for p in [0.5, 1.0, 1.5, 2.0] {
            for agent in &e.agents {
                let closed = demand_x_with_exponent(&e.hara, agent, 1.0 / 3.0, p).unwrap();
                if !(closed > 0.0 && closed < agent.wealth(p) / p) {
                    continue;
                }
                checked += 1;
                let x = demand_oracle(&e.hara, agent, p, 10_000).unwrap();
                assert!((x - closed).abs() < 1e-7 * closed, "{p}: {x} vs {closed}");
            }
        }
        assert!(checked >= 6);
    }
}
