//! Acceptance suite: one PASS/FAIL line per criterion.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use hara_equilibrium::cli::solve_with_epsilon;
use hara_equilibrium::economy::excess_demand;
use hara_equilibrium::oracle::{
    lemma_fuzzer, remainder_identity_check, sign_change_count, EconomySampler, DEFAULT_BRACKET,
    DEFAULT_GRID_POINTS,
};
use hara_equilibrium::rational::{DEFAULT_MAX_DENOMINATOR, DEFAULT_TOL};
use hara_equilibrium::roots::isolate_sturm;
use hara_equilibrium::{
    approximate_inverse_gamma, certify, AgentType, Economy, HaraParams, Quadrinomial,
    RationalEpsilon, Verdict,
};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

const SEED: u64 = 0;

struct Outcome {
    ok: bool,
    detail: String,
}

fn outcome(ok: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        ok,
        detail: detail.into(),
    }
}

fn timed(limit: Option<Duration>, f: impl FnOnce() -> Outcome) -> Outcome {
    let start = Instant::now();
    let mut o = f();
    let elapsed = start.elapsed();
    o.detail = format!("{} [{:.2}s]", o.detail, elapsed.as_secs_f64());
    if let Some(limit) = limit {
        if elapsed > limit {
            o.ok = false;
            o.detail = format!("{} exceeds {}s", o.detail, limit.as_secs());
        }
    }
    o
}

fn economies() -> Vec<Economy> {
    EconomySampler {
        seed: SEED,
        ..EconomySampler::default()
    }
    .sample_canonical(1000)
}

fn default_epsilon(gamma: f64) -> RationalEpsilon {
    approximate_inverse_gamma(gamma, DEFAULT_TOL, DEFAULT_MAX_DENOMINATOR).unwrap()
}

fn criterion_1(econs: &[Economy]) -> Outcome {
    let negative = econs
        .par_iter()
        .filter(|e| {
            let eps = default_epsilon(e.hara.gamma);
            Quadrinomial::from_economy(e, &eps).is_ok_and(|q| q.ad_minus_bc() < 0.0)
        })
        .count();
    outcome(
        negative == econs.len(),
        format!("AD - BC < 0 in {negative}/{}", econs.len()),
    )
}

fn criterion_2(econs: &[Economy]) -> Outcome {
    let failures: Vec<String> = econs
        .par_iter()
        .enumerate()
        .filter_map(|(i, e)| {
            let eps = default_epsilon(e.hara.gamma);
            let report = match solve_with_epsilon(e, &eps, 1e-10) {
                Ok(r) => r,
                Err(err) => return Some(format!("#{i}: {err}")),
            };
            let mults: Vec<u32> = report.equilibria.iter().map(|q| q.multiplicity).collect();
            if mults != [1] {
                return Some(format!("#{i}: multiplicities {mults:?}"));
            }
            let coarse =
                approximate_inverse_gamma(e.hara.gamma, 1e-2, DEFAULT_MAX_DENOMINATOR).unwrap();
            let q = Quadrinomial::from_economy(e, &coarse).ok()?;
            let sturm = isolate_sturm(&q.to_exact(), 1e-10);
            if sturm.multiplicities != [1] {
                return Some(format!(
                    "#{i}: Sturm at {}/{} gives {:?}",
                    coarse.m(),
                    coarse.n(),
                    sturm.multiplicities
                ));
            }
            let (lo, hi) = DEFAULT_BRACKET;
            match sign_change_count(e, &eps, DEFAULT_GRID_POINTS, lo, hi) {
                Ok(1) => {}
                Ok(k) => return Some(format!("#{i}: {k} sign changes")),
                Err(err) => return Some(format!("#{i}: {err}")),
            }
            let p = report.equilibria[0].price;
            let z = excess_demand(e, &eps, p).unwrap().abs();
            (z >= 1e-8).then(|| format!("#{i}: |Z(p*)| = {z:e}"))
        })
        .collect();
    let detail = match failures.first() {
        None => format!(
            "{} economies: one simple root, one sign change, |Z(p*)| < 1e-8",
            econs.len()
        ),
        Some(first) => format!("{} failures, first {first}", failures.len()),
    };
    outcome(failures.is_empty(), detail)
}

fn criterion_3() -> Outcome {
    match lemma_fuzzer(1000, 15, SEED) {
        Ok(r) => outcome(
            r.clean(),
            format!(
                "{} trials, {} violations, {} equality-family trials, {} equality mismatches, {} closed-form mismatches",
                r.trials,
                r.violations.len(),
                r.equality_family,
                r.equality_mismatches,
                r.closed_form_mismatches
            ),
        ),
        Err(e) => outcome(false, e.to_string()),
    }
}

fn criterion_4() -> Outcome {
    match remainder_identity_check(500, 15, SEED) {
        Ok(r) => outcome(
            r.mismatches.is_empty(),
            format!("{} pairs, {} mismatches", r.trials, r.mismatches.len()),
        ),
        Err(e) => outcome(false, e.to_string()),
    }
}

fn reference_economy() -> Economy {
    Economy::new(
        HaraParams {
            gamma: 3.0,
            a: 1.0,
            b: 5.0,
        },
        AgentType {
            beta: 0.125,
            e: 1.0,
            f: 1.0,
        },
        AgentType {
            beta: 1.0,
            e: 1.0,
            f: 1.0,
        },
    )
    .unwrap()
}

fn criterion_5() -> Outcome {
    let econ = reference_economy();
    let eps = RationalEpsilon::new(1, 3).unwrap();
    let q = Quadrinomial::from_economy(&econ, &eps).unwrap();
    let mut misses = Vec::new();
    let want = (-24.0, 32.0, -14.0, 24.0);
    if (q.a, q.b, q.c, q.d) != want || (q.n, q.m) != (3, 1) {
        misses.push(format!(
            "quadrinomial ({}, {}, {}, {}, n={}, m={}) != {want:?}",
            q.a, q.b, q.c, q.d, q.n, q.m
        ));
    }
    if q.ad_minus_bc() != -128.0 {
        misses.push(format!("AD - BC = {} != -128", q.ad_minus_bc()));
    }
    match certify(&econ, &eps, true) {
        Ok(c) if c.verdict == Verdict::CertifiedUnique => {}
        Ok(c) => misses.push(format!("verdict {}", c.verdict)),
        Err(e) => misses.push(e.to_string()),
    }
    let report = solve_with_epsilon(&econ, &eps, 1e-12).unwrap();
    let prices: Vec<f64> = report.equilibria.iter().map(|e| e.price).collect();
    if prices.len() != 1 {
        misses.push(format!("{} equilibria", prices.len()));
    } else {
        let p = prices[0];
        if !(2.744 < p && p < 3.375) {
            misses.push(format!("p* = {p} outside (2.744, 3.375)"));
        }
        if report.equilibria[0].residual >= 1e-10 {
            misses.push(format!("residual {:e}", report.equilibria[0].residual));
        }
    }
    if misses.is_empty() {
        outcome(true, format!("p* = {}", prices[0]))
    } else {
        outcome(false, misses.join("; "))
    }
}

fn single_price(econ: &Economy) -> Result<f64, String> {
    let eps = default_epsilon(econ.hara.gamma);
    let r = solve_with_epsilon(econ, &eps, 1e-12).map_err(|e| e.to_string())?;
    match r.equilibria.as_slice() {
        [e] => Ok(e.price),
        other => Err(format!("{} equilibria", other.len())),
    }
}

fn criterion_6() -> Outcome {
    let symmetric = Economy::new(
        HaraParams {
            gamma: 2.5,
            a: 1.0,
            b: 0.0,
        },
        AgentType {
            beta: 1.0,
            e: 2.0,
            f: 2.0,
        },
        AgentType {
            beta: 1.0,
            e: 0.5,
            f: 0.5,
        },
    )
    .unwrap();
    let cube = Economy::new(
        HaraParams {
            gamma: 3.0,
            a: 1.0,
            b: 0.0,
        },
        AgentType {
            beta: 1.0,
            e: 1.0,
            f: 2.0,
        },
        AgentType {
            beta: 1.0,
            e: 1.5,
            f: 3.0,
        },
    )
    .unwrap();
    let mut details = Vec::new();
    let mut ok = true;
    for (name, econ, want, tol) in [
        ("symmetric", symmetric, 1.0, 1e-12),
        ("f = 2e", cube, 8.0, 1e-10),
    ] {
        match single_price(&econ) {
            Ok(p) => {
                ok &= (p - want).abs() < tol;
                details.push(format!("{name}: p = {p}"));
            }
            Err(e) => {
                ok = false;
                details.push(format!("{name}: {e}"));
            }
        }
    }
    outcome(ok, details.join(", "))
}

fn criterion_7() -> Outcome {
    let sampler = EconomySampler {
        seed: SEED + 7,
        ..EconomySampler::default()
    };
    let mut rng = ChaCha8Rng::seed_from_u64(SEED + 7);
    let (lo, hi) = DEFAULT_BRACKET;
    let mut mismatches = 0;
    let mut compared = 0;
    for _ in 0..100 {
        let econ = sampler.sample_one(&mut rng);
        let p = (rng.gen_range(lo.ln()..hi.ln())).exp();
        let eps = default_epsilon(econ.hara.gamma);
        let q = Quadrinomial::from_economy(&econ, &eps).unwrap();
        let z = excess_demand(&econ, &eps, p).unwrap();
        if z.abs() < 1e-12 {
            continue;
        }
        compared += 1;
        let v = q.evaluate_at_log_price(p.ln());
        if (v > 0.0) != (z > 0.0) {
            mismatches += 1;
        }
    }
    outcome(
        mismatches == 0,
        format!("{compared} pairs compared, {mismatches} mismatches"),
    )
}

/// Smallest `n`, then `m`, with `|m/n - 1/gamma| <= tol` and `n > 2m`.
fn minimal_denominator(gamma: f64, tol: f64, max_n: u64) -> Option<(u64, u64)> {
    let g = BigRational::from_float(gamma).unwrap();
    let (gn, gd) = (g.numer().clone(), g.denom().clone());
    let t = BigRational::from_float(tol).unwrap();
    let (tn, td) = (t.numer().clone(), t.denom().clone());
    for n in 1..=max_n {
        let nb = BigInt::from(n);
        let c = (&gd * &nb / &gn).to_u64().unwrap();
        let bound = &tn * &gn * &nb;
        for m in [c, c + 1] {
            if m == 0 || n <= 2 * m {
                continue;
            }
            if (BigInt::from(m) * &gn - &nb * &gd).abs() * &td <= bound {
                return Some((m, n));
            }
        }
    }
    None
}

fn criterion_8() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED + 8);
    let mut mismatches = Vec::new();
    for _ in 0..100 {
        let gamma = loop {
            let g = rng.gen_range(2.0..=50.0);
            if g > 2.0 {
                break g;
            }
        };
        let eps = approximate_inverse_gamma(gamma, DEFAULT_TOL, DEFAULT_MAX_DENOMINATOR).unwrap();
        let scan = minimal_denominator(gamma, DEFAULT_TOL, eps.n());
        if scan != Some((eps.m(), eps.n())) {
            mismatches.push(format!(
                "gamma {gamma}: {}/{} vs {scan:?}",
                eps.m(),
                eps.n()
            ));
        }
    }
    let pi =
        approximate_inverse_gamma(std::f64::consts::PI, 1e-3, DEFAULT_MAX_DENOMINATOR).unwrap();
    let pi_ok = (pi.m(), pi.n()) == (7, 22);
    let detail = format!(
        "{} scan mismatches, pi -> {}/{}",
        mismatches.len(),
        pi.m(),
        pi.n()
    );
    outcome(mismatches.is_empty() && pi_ok, detail)
}

fn main() -> ExitCode {
    let econs = economies();
    let secs = |s| Some(Duration::from_secs(s));
    let results = [
        (1, timed(secs(5), || criterion_1(&econs))),
        (2, timed(secs(60), || criterion_2(&econs))),
        (3, timed(secs(10), criterion_3)),
        (4, timed(secs(5), criterion_4)),
        (5, timed(None, criterion_5)),
        (6, timed(None, criterion_6)),
        (7, timed(None, criterion_7)),
        (8, timed(None, criterion_8)),
    ];
    let mut all = true;
    for (k, o) in &results {
        println!(
            "{} criterion {k}: {}",
            if o.ok { "PASS" } else { "FAIL" },
            o.detail
        );
        all &= o.ok;
    }
    if all {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
