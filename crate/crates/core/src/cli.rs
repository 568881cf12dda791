//! Command-line front end: JSON economies in, JSON reports and CSV out.
//!
//! Exit codes: 0 on success or a certified-unique verdict, 1 when a
//! certificate or consistency check does not come out positive, 2 on
//! malformed input or domain errors.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::certifier::{canonicalize, certify, check_c1, check_c2, Verdict};
use crate::economy::{demand_x, demand_y, excess_demand, Economy, EconomyFile};
use crate::error::{Error, Result};
use crate::oracle::{
    check_economy, lemma_fuzzer, multiplicity_sampler, remainder_identity_check,
    search_multiple_equilibria, DEFAULT_BRACKET, DEFAULT_GRID_POINTS, DEFAULT_SEED,
};
use crate::quadrinomial::Quadrinomial;
use crate::rational::{
    approximate_inverse_gamma, RationalEpsilon, DEFAULT_MAX_DENOMINATOR, DEFAULT_TOL,
};
use crate::roots::{isolate_positive_roots, RootMethod, DEFAULT_ROOT_TOL};

pub const EXIT_OK: i32 = 0;
pub const EXIT_NOT_CERTIFIED: i32 = 1;
pub const EXIT_ERROR: i32 = 2;

#[derive(Debug, Parser)]
#[command(
    name = "hara-eq",
    version,
    about = "Equilibria and uniqueness certificates for two-type HARA exchange economies"
)]
pub struct Cli {
    #[command(flatten)]
    pub flags: Flags,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Args)]
pub struct Flags {
    /// Tolerance for approximating 1/gamma by m/n.
    #[arg(long, global = true, default_value_t = DEFAULT_TOL)]
    pub epsilon_tol: f64,
    /// Use this m/n instead of approximating 1/gamma.
    #[arg(long, global = true)]
    pub epsilon: Option<RationalEpsilon>,
    #[arg(long, global = true, default_value_t = DEFAULT_MAX_DENOMINATOR)]
    pub max_denominator: u64,
    /// Width of the reported root-isolating intervals.
    #[arg(long, global = true, default_value_t = DEFAULT_ROOT_TOL)]
    pub root_tol: f64,
    #[arg(long, global = true, default_value_t = DEFAULT_SEED)]
    pub seed: u64,
    #[arg(long, global = true, default_value_t = DEFAULT_GRID_POINTS)]
    pub grid_points: usize,
    /// Price bracket for oracle scans, as lo,hi.
    #[arg(long, global = true, value_parser = parse_bracket, default_value = "1e-6,1e6")]
    pub bracket: (f64, f64),
}

impl Default for Flags {
    fn default() -> Self {
        Flags {
            epsilon_tol: DEFAULT_TOL,
            epsilon: None,
            max_denominator: DEFAULT_MAX_DENOMINATOR,
            root_tol: DEFAULT_ROOT_TOL,
            seed: DEFAULT_SEED,
            grid_points: DEFAULT_GRID_POINTS,
            bracket: DEFAULT_BRACKET,
        }
    }
}

fn parse_bracket(s: &str) -> std::result::Result<(f64, f64), String> {
    let (lo, hi) = s
        .split_once(',')
        .ok_or_else(|| format!("expected lo,hi, got {s:?}"))?;
    let lo: f64 = lo
        .trim()
        .parse()
        .map_err(|e| format!("bad lower bound: {e}"))?;
    let hi: f64 = hi
        .trim()
        .parse()
        .map_err(|e| format!("bad upper bound: {e}"))?;
    if !(lo > 0.0 && lo < hi && hi.is_finite()) {
        return Err(format!("bracket must satisfy 0 < lo < hi, got {lo},{hi}"));
    }
    Ok((lo, hi))
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Equilibrium prices, residuals and allocations.
    Solve { economy: PathBuf },
    /// Uniqueness certificate.
    Certify {
        economy: PathBuf,
        /// Also count roots of the quadrinomial.
        #[arg(long)]
        verify_roots: bool,
    },
    /// CSV of certificates and prices along a one-parameter path.
    Sweep { spec: PathBuf },
    /// Positive roots of a quadrinomial given as JSON.
    Roots { quadrinomial: PathBuf },
    /// Oracle cross-checks for an economy plus a randomized search for
    /// several equilibria.
    OracleCheck {
        economy: Option<PathBuf>,
        #[arg(long, default_value_t = 200)]
        samples: u64,
    },
    /// Exact-arithmetic checks of the double-root inequality and the
    /// division remainder.
    LemmaCheck {
        #[arg(long, default_value_t = 1000)]
        trials: u64,
        #[arg(long, default_value_t = 15)]
        max_n: u64,
    },
}

/// Runs the CLI on `args` (including the program name).
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_ERROR } else { EXIT_OK };
            let text = e.render().to_string();
            let _ = if e.use_stderr() {
                err.write_all(text.as_bytes())
            } else {
                out.write_all(text.as_bytes())
            };
            return code;
        }
    };
    match dispatch(&cli, out, err) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            EXIT_ERROR
        }
    }
}

fn dispatch(cli: &Cli, out: &mut dyn Write, err: &mut dyn Write) -> Result<i32> {
    let flags = &cli.flags;
    match &cli.command {
        Command::Solve { economy } => {
            let econ = read_economy(economy)?;
            let report = solve(&econ, flags)?;
            write_json(out, &report)?;
            for w in report.equilibria.iter().flat_map(|e| &e.warnings) {
                let _ = writeln!(err, "warning: {w}");
            }
            Ok(EXIT_OK)
        }
        Command::Certify {
            economy,
            verify_roots,
        } => {
            let econ = read_economy(economy)?;
            let eps = choose_epsilon(econ.hara.gamma, flags)?;
            let cert = certify(&econ, &eps, *verify_roots)?;
            write_json(out, &cert)?;
            let _ = writeln!(err, "verdict: {}", cert.verdict);
            Ok(match cert.verdict {
                Verdict::CertifiedUnique => EXIT_OK,
                Verdict::NotCertified => EXIT_NOT_CERTIFIED,
            })
        }
        Command::Sweep { spec } => {
            let text = read_text(spec)?;
            let spec: SweepSpec = serde_json::from_str(&text)
                .map_err(|e| Error::Input(format!("sweep JSON: {e}")))?;
            let rows = sweep(&spec, flags)?;
            write_sweep_csv(out, &rows)?;
            Ok(EXIT_OK)
        }
        Command::Roots { quadrinomial } => {
            let text = read_text(quadrinomial)?;
            let q: Quadrinomial = serde_json::from_str(&text)
                .map_err(|e| Error::Input(format!("quadrinomial JSON: {e}")))?;
            let report = isolate_positive_roots(&q, flags.root_tol)?;
            write_json(out, &report)?;
            Ok(EXIT_OK)
        }
        Command::OracleCheck { economy, samples } => {
            let economy_report = match economy {
                Some(path) => {
                    let econ = read_economy(path)?;
                    let eps = choose_epsilon(econ.hara.gamma, flags)?;
                    Some(check_economy(
                        &econ,
                        &eps,
                        flags.grid_points,
                        flags.bracket,
                    )?)
                }
                None => None,
            };
            let search = search_multiple_equilibria(
                &multiplicity_sampler(flags.seed),
                *samples,
                flags.grid_points,
                flags.bracket,
            )?;
            let consistent = economy_report.as_ref().is_none_or(|r| {
                r.perturbation.mismatched_tols.is_empty()
                    && r.polynomial_roots == r.sign_changes_at_epsilon
            }) && search
                .found
                .iter()
                .all(|s| s.perturbation.entries.last().is_some_and(|e| e.agree));
            write_json(
                out,
                &OracleCheckReport {
                    economy: economy_report,
                    search,
                },
            )?;
            Ok(if consistent {
                EXIT_OK
            } else {
                EXIT_NOT_CERTIFIED
            })
        }
        Command::LemmaCheck { trials, max_n } => {
            let lemma = lemma_fuzzer(*trials, *max_n, flags.seed)?;
            let remainder = remainder_identity_check(*trials, *max_n, flags.seed)?;
            let clean = lemma.clean() && remainder.mismatches.is_empty();
            write_json(out, &LemmaCheckReport { lemma, remainder })?;
            Ok(if clean { EXIT_OK } else { EXIT_NOT_CERTIFIED })
        }
    }
}

#[derive(Debug, Serialize)]
struct OracleCheckReport {
    economy: Option<crate::oracle::EconomyOracleReport>,
    search: crate::oracle::MultiEquilibriumSearch,
}

#[derive(Debug, Serialize)]
struct LemmaCheckReport {
    lemma: crate::oracle::LemmaFuzzReport,
    remainder: crate::oracle::RemainderReport,
}

fn read_text(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| Error::Input(format!("{}: {e}", path.display())))
}

fn read_economy(path: &Path) -> Result<Economy> {
    Economy::from_json(&read_text(path)?)
}

fn write_json<T: Serialize>(out: &mut dyn Write, value: &T) -> Result<()> {
    let text = serde_json::to_string_pretty(value)
        .map_err(|e| Error::Input(format!("serializing report: {e}")))?;
    writeln!(out, "{text}").map_err(|e| Error::Input(format!("writing output: {e}")))
}

/// `--epsilon` if given, otherwise the approximation of `1/gamma`.
pub fn choose_epsilon(gamma: f64, flags: &Flags) -> Result<RationalEpsilon> {
    match flags.epsilon {
        Some(eps) => Ok(eps),
        None => approximate_inverse_gamma(gamma, flags.epsilon_tol, flags.max_denominator),
    }
}

/// Formats with 17 significant digits.
pub fn fmt17(x: f64) -> String {
    if x == 0.0 || !x.is_finite() {
        return format!("{x}");
    }
    let exp = x.abs().log10().floor() as i32;
    if (-5..15).contains(&exp) {
        format!("{:.*}", (16 - exp).max(0) as usize, x)
    } else {
        format!("{x:.16e}")
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Allocation {
    pub agent: usize,
    pub x: f64,
    pub y: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Equilibrium {
    pub price: f64,
    pub multiplicity: u32,
    pub residual: f64,
    pub allocations: Vec<Allocation>,
    pub warnings: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SolveReport {
    pub epsilon: RationalEpsilon,
    /// `|m/n - 1/gamma|`.
    pub epsilon_error: f64,
    pub quadrinomial: Quadrinomial,
    pub method: RootMethod,
    pub equilibria: Vec<Equilibrium>,
}

/// Bisects the excess demand in a few-ulp neighbourhood of `p` when it
/// brackets a sign change there.
fn polish_price(econ: &Economy, eps: &RationalEpsilon, p: f64) -> f64 {
    let delta = 8.0 * eps.n() as f64 * f64::EPSILON;
    let z = |q: f64| excess_demand(econ, eps, q).unwrap_or(f64::NAN);
    let (mut lo, mut hi) = (p * (1.0 - delta), p * (1.0 + delta));
    let (zlo, zhi) = (z(lo), z(hi));
    if zlo * zhi >= 0.0 || zlo.is_nan() || zhi.is_nan() {
        return p;
    }
    let lo_positive = zlo > 0.0;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let v = z(mid);
        if v == 0.0 {
            return mid;
        }
        if (v > 0.0) == lo_positive {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    if z(lo).abs() <= z(hi).abs() {
        lo
    } else {
        hi
    }
}

pub fn solve(econ: &Economy, flags: &Flags) -> Result<SolveReport> {
    let eps = choose_epsilon(econ.hara.gamma, flags)?;
    solve_with_epsilon(econ, &eps, flags.root_tol)
}

pub fn solve_with_epsilon(
    econ: &Economy,
    eps: &RationalEpsilon,
    root_tol: f64,
) -> Result<SolveReport> {
    let q = Quadrinomial::from_economy(econ, eps)?;
    let report = isolate_positive_roots(&q, root_tol)?;
    let mut equilibria = Vec::with_capacity(report.refined_roots.len());
    for (&x, &multiplicity) in report.refined_roots.iter().zip(&report.multiplicities) {
        let price = polish_price(econ, eps, q.price_from_root(x)?);
        let residual = excess_demand(econ, eps, price)?.abs();
        let mut allocations = Vec::with_capacity(2);
        for (i, agent) in econ.agents.iter().enumerate() {
            allocations.push(Allocation {
                agent: i + 1,
                x: demand_x(&econ.hara, agent, eps, price)?,
                y: demand_y(&econ.hara, agent, eps, price)?,
            });
        }
        let warnings = econ
            .demand_warnings(eps, price)?
            .into_iter()
            .map(|w| {
                format!(
                    "agent {} demand ({}, {}) at price {} leaves the nonnegative orthant",
                    w.agent,
                    fmt17(w.x),
                    fmt17(w.y),
                    fmt17(price)
                )
            })
            .collect();
        equilibria.push(Equilibrium {
            price,
            multiplicity,
            residual,
            allocations,
            warnings,
        });
    }
    Ok(SolveReport {
        epsilon: *eps,
        epsilon_error: eps.error_against(econ.hara.gamma),
        quadrinomial: q,
        method: report.method,
        equilibria,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum SweepParameter {
    Gamma,
    B,
    Beta2,
    E2,
    F1,
}

impl SweepParameter {
    pub fn name(&self) -> &'static str {
        match self {
            SweepParameter::Gamma => "gamma",
            SweepParameter::B => "b",
            SweepParameter::Beta2 => "beta2",
            SweepParameter::E2 => "e2",
            SweepParameter::F1 => "f1",
        }
    }

    fn apply(&self, econ: &mut Economy, value: f64) {
        match self {
            SweepParameter::Gamma => econ.hara.gamma = value,
            SweepParameter::B => econ.hara.b = value,
            SweepParameter::Beta2 => econ.agents[1].beta = value,
            SweepParameter::E2 => econ.agents[1].e = value,
            SweepParameter::F1 => econ.agents[0].f = value,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepSpec {
    pub parameter: SweepParameter,
    pub lo: f64,
    pub hi: f64,
    pub steps: usize,
    pub economy: EconomyFile,
}

impl SweepSpec {
    pub fn values(&self) -> Vec<f64> {
        let last = (self.steps - 1) as f64;
        (0..self.steps)
            .map(|i| {
                if i + 1 == self.steps {
                    self.hi
                } else {
                    self.lo + (self.hi - self.lo) * i as f64 / last
                }
            })
            .collect()
    }

    fn validate(&self) -> Result<Economy> {
        if self.steps < 2 {
            return Err(Error::Input(format!(
                "sweep needs at least 2 steps, got {}",
                self.steps
            )));
        }
        if !(self.lo.is_finite() && self.hi.is_finite() && self.lo < self.hi) {
            return Err(Error::Input(format!(
                "sweep range must satisfy lo < hi, got [{}, {}]",
                self.lo, self.hi
            )));
        }
        self.economy.clone().try_into()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub step: usize,
    pub parameter: &'static str,
    pub value: f64,
    pub epsilon: RationalEpsilon,
    pub c1: bool,
    pub c2: bool,
    pub c2_threshold: f64,
    pub ad_bc: f64,
    pub root_count: usize,
    pub verdict: Verdict,
    pub prices: Vec<f64>,
}

pub const SWEEP_HEADER: [&str; 12] = [
    "step",
    "parameter",
    "value",
    "epsilon_m",
    "epsilon_n",
    "c1",
    "c2",
    "c2_threshold",
    "ad_bc",
    "root_count",
    "verdict",
    "prices",
];

fn sweep_step(
    base: &Economy,
    spec: &SweepSpec,
    step: usize,
    value: f64,
    flags: &Flags,
) -> Result<SweepRow> {
    let mut econ = *base;
    spec.parameter.apply(&mut econ, value);
    let econ = Economy::new(econ.hara, econ.agents[0], econ.agents[1]).map_err(|e| {
        Error::Input(format!(
            "step {step} ({} = {value}): {e}",
            spec.parameter.name()
        ))
    })?;
    let eps = choose_epsilon(econ.hara.gamma, flags)?;
    let canonical = canonicalize(&econ).map(|c| c.economy).unwrap_or(econ);
    let c1 = check_c1(&canonical);
    let c2 = check_c2(&canonical);
    let verdict = match certify(&econ, &eps, false) {
        Ok(cert) => cert.verdict,
        Err(Error::CannotCertify(_)) => Verdict::NotCertified,
        Err(e) => return Err(e),
    };
    let solved = solve_with_epsilon(&econ, &eps, flags.root_tol)?;
    Ok(SweepRow {
        step,
        parameter: spec.parameter.name(),
        value,
        epsilon: eps,
        c1: c1.holds(),
        c2: c2.holds,
        c2_threshold: c2.threshold,
        ad_bc: solved.quadrinomial.ad_minus_bc(),
        root_count: solved.equilibria.len(),
        verdict,
        prices: solved.equilibria.iter().map(|e| e.price).collect(),
    })
}

/// One row per step, in step order.
pub fn sweep(spec: &SweepSpec, flags: &Flags) -> Result<Vec<SweepRow>> {
    let base = spec.validate()?;
    spec.values()
        .into_par_iter()
        .enumerate()
        .map(|(i, v)| sweep_step(&base, spec, i, v, flags))
        .collect()
}

/// Writes the fixed header and one record per row. Prices share one field,
/// separated by `;`.
pub fn write_sweep_csv(out: &mut dyn Write, rows: &[SweepRow]) -> Result<()> {
    let io = |e: csv::Error| Error::Input(format!("writing CSV: {e}"));
    let mut w = csv::Writer::from_writer(out);
    w.write_record(SWEEP_HEADER).map_err(io)?;
    for r in rows {
        let prices: Vec<String> = r.prices.iter().map(|&p| fmt17(p)).collect();
        w.write_record([
            r.step.to_string(),
            r.parameter.to_string(),
            fmt17(r.value),
            r.epsilon.m().to_string(),
            r.epsilon.n().to_string(),
            r.c1.to_string(),
            r.c2.to_string(),
            fmt17(r.c2_threshold),
            fmt17(r.ad_bc),
            r.root_count.to_string(),
            r.verdict.to_string(),
            prices.join(";"),
        ])
        .map_err(io)?;
    }
    w.flush()
        .map_err(|e| Error::Input(format!("writing CSV: {e}")))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fmt17_digits() {
        assert_eq!(fmt17(1.0), "1.0000000000000000");
        assert_eq!(fmt17(2.5e-7), "2.4999999999999999e-7");
        assert_eq!(fmt17(-64.0), "-64.000000000000000");
        assert_eq!(fmt17(0.0), "0");
    }

    #[test]
    fn bracket_parsing() {
        assert_eq!(parse_bracket("1e-3,1e3").unwrap(), (1e-3, 1e3));
        assert!(parse_bracket("1,1").is_err());
        assert!(parse_bracket("0,1").is_err());
        assert!(parse_bracket("1").is_err());
    }

    #[test]
    fn sweep_values_hit_endpoints() {
        let spec = SweepSpec {
            parameter: SweepParameter::B,
            lo: 0.0,
            hi: 6.0,
            steps: 61,
            economy: EconomyFile {
                gamma: 3.0,
                a: 1.0,
                b: 5.0,
                agents: vec![],
            },
        };
        let v = spec.values();
        assert_eq!(v.len(), 61);
        assert_eq!(v[0], 0.0);
        assert_eq!(v[60], 6.0);
        assert!((v[27] - 2.7).abs() < 1e-15);
    }
}
