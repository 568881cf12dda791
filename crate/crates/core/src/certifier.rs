//! Sufficient conditions for a unique equilibrium and the certificate that
//! records them.
//!
//! With agents labelled so that `beta1 < beta2`, the conditions are
//!
//! ```text
//! (c1)  beta1 < beta2,  e1 <= e2,  f1 >= f2
//! (c2)  b >= (a/gamma) (beta2/beta1)^(2/gamma) (e2 + f1)
//! ```
//!
//! Together they force `AD - BC < 0` on the quadrinomial, and a quadrinomial
//! with the economy's sign pattern and `AD - BC < 0` has exactly one positive
//! root.

use std::fmt;

use serde::Serialize;

use crate::economy::{Economy, EconomyFile};
use crate::error::{Error, Result};
use crate::quadrinomial::{ExactQuadrinomial, Quadrinomial, SignPattern};
use crate::rational::RationalEpsilon;
use crate::roots::{isolate_positive_roots, DEFAULT_ROOT_TOL};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Canonical {
    pub economy: Economy,
    /// Whether the input listed the more patient agent first.
    pub relabeled: bool,
}

/// Orders agents by ascending `beta`.
pub fn canonicalize(econ: &Economy) -> Result<Canonical> {
    let [a1, a2] = econ.agents;
    if a1.beta == a2.beta {
        return Err(Error::CannotCertify(format!(
            "both agents have beta = {}; the conditions need beta1 < beta2",
            a1.beta
        )));
    }
    if a1.beta < a2.beta {
        Ok(Canonical {
            economy: *econ,
            relabeled: false,
        })
    } else {
        Ok(Canonical {
            economy: Economy {
                hara: econ.hara,
                agents: [a2, a1],
            },
            relabeled: true,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct C1Check {
    pub beta_ordered: bool,
    pub e_ordered: bool,
    pub f_ordered: bool,
}

impl C1Check {
    pub fn holds(&self) -> bool {
        self.beta_ordered && self.e_ordered && self.f_ordered
    }
}

pub fn check_c1(econ: &Economy) -> C1Check {
    let [a1, a2] = &econ.agents;
    C1Check {
        beta_ordered: a1.beta < a2.beta,
        e_ordered: a1.e <= a2.e,
        f_ordered: a1.f >= a2.f,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct C2Check {
    pub holds: bool,
    pub threshold: f64,
}

/// Lower bound on `b`. Uses `gamma` itself, not the rational exponent.
pub fn c2_threshold(econ: &Economy) -> f64 {
    let [a1, a2] = &econ.agents;
    let h = &econ.hara;
    h.a / h.gamma * (a2.beta / a1.beta).powf(2.0 / h.gamma) * (a2.e + a1.f)
}

pub fn check_c2(econ: &Economy) -> C2Check {
    let threshold = c2_threshold(econ);
    C2Check {
        holds: econ.hara.b >= threshold,
        threshold,
    }
}

/// `AD - BC = (s2 - s1)(e1 f2 s1 - e2 f1 s2) + E`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Decomposition {
    pub first_term: f64,
    pub e_term: f64,
}

impl Decomposition {
    pub fn total(&self) -> f64 {
        self.first_term + self.e_term
    }
}

pub fn decompose_ad_bc(econ: &Economy, eps: &RationalEpsilon) -> Decomposition {
    let [a1, a2] = &econ.agents;
    let (s1, s2) = (a1.sigma(eps), a2.sigma(eps));
    let k = econ.hara.b / (econ.hara.a * eps.value());
    let first_term = (s2 - s1) * (a1.e * a2.f * s1 - a2.e * a1.f * s2);
    let bracket =
        (a1.e + a2.e + a1.f + a2.f) * s1 * s2 - (a1.e + a2.f) * s1 * s1 - (a2.e + a1.f) * s2 * s2;
    let e_term = -k * k * (s1 - s2) * (s1 - s2) + k * bracket;
    Decomposition { first_term, e_term }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    CertifiedUnique,
    NotCertified,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Verdict::CertifiedUnique => f.write_str("certified unique"),
            // The conditions are sufficient only.
            Verdict::NotCertified => f.write_str("not certified"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct UniquenessCertificate {
    pub economy: EconomyFile,
    pub relabeled: bool,
    pub epsilon: RationalEpsilon,
    pub c1_holds: C1Check,
    pub c2_holds: C2Check,
    pub quadrinomial: Quadrinomial,
    pub sign_pattern: SignPattern,
    pub sign_pattern_ok: bool,
    pub ad_bc: f64,
    /// Exact `AD - BC` when every `beta^eps` is rational.
    pub ad_bc_exact: Option<String>,
    pub decomposition: Decomposition,
    pub root_count: Option<usize>,
    pub multiplicities: Option<Vec<u32>>,
    pub verdict: Verdict,
    pub notes: Vec<String>,
}

pub fn certify(
    econ: &Economy,
    eps: &RationalEpsilon,
    verify_roots: bool,
) -> Result<UniquenessCertificate> {
    let Canonical { economy, relabeled } = canonicalize(econ)?;
    let c1 = check_c1(&economy);
    let c2 = check_c2(&economy);
    let q = Quadrinomial::from_economy(&economy, eps)?;
    let sign_pattern = q.sign_pattern();
    let ad_bc = q.ad_minus_bc();
    let ad_bc_exact = match ExactQuadrinomial::from_economy(&economy, eps) {
        Some(exact) => Some(exact?.ad_minus_bc().to_string()),
        None => None,
    };
    let decomposition = decompose_ad_bc(&economy, eps);

    let mut notes = Vec::new();
    let (root_count, multiplicities) = if verify_roots {
        let report = isolate_positive_roots(&q, DEFAULT_ROOT_TOL)?;
        (
            Some(report.distinct_positive_roots),
            Some(report.multiplicities),
        )
    } else {
        (None, None)
    };

    let mut certified = c1.holds() && c2.holds;
    if certified && ad_bc >= 0.0 {
        notes.push(format!(
            "conditions hold but AD - BC = {ad_bc:e} is not negative"
        ));
        certified = false;
    }
    if certified {
        if let (Some(count), Some(mult)) = (root_count, &multiplicities) {
            if count != 1 || mult.as_slice() != [1] {
                notes.push(format!("conditions hold but root check found {count} roots with multiplicities {mult:?}"));
                certified = false;
            }
        }
    }
    if !c1.holds() {
        notes.push("ordering condition on patience and endowments fails".into());
    }
    if !c2.holds {
        notes.push(format!(
            "b = {} is below the threshold {}",
            economy.hara.b, c2.threshold
        ));
    }

    Ok(UniquenessCertificate {
        economy: economy.to_file(),
        relabeled,
        epsilon: *eps,
        c1_holds: c1,
        c2_holds: c2,
        quadrinomial: q,
        sign_pattern,
        sign_pattern_ok: sign_pattern.holds(),
        ad_bc,
        ad_bc_exact,
        decomposition,
        root_count,
        multiplicities,
        verdict: if certified {
            Verdict::CertifiedUnique
        } else {
            Verdict::NotCertified
        },
        notes,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::economy::{AgentType, HaraParams};

    fn e_star(b: f64) -> Economy {
        Economy::new(
            HaraParams {
                gamma: 3.0,
                a: 1.0,
                b,
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

    fn third() -> RationalEpsilon {
        RationalEpsilon::new(1, 3).unwrap()
    }

    #[test]
    fn canonical_order() {
        let econ = e_star(5.0);
        let c = canonicalize(&econ).unwrap();
        assert!(!c.relabeled);
        assert_eq!(c.economy, econ);
        let swapped = Economy {
            agents: [econ.agents[1], econ.agents[0]],
            ..econ
        };
        let c = canonicalize(&swapped).unwrap();
        assert!(c.relabeled);
        assert_eq!(c.economy, econ);
        let same = Economy {
            agents: [econ.agents[1], econ.agents[1]],
            ..econ
        };
        assert!(matches!(canonicalize(&same), Err(Error::CannotCertify(_))));
    }

    #[test]
    fn c1_cases() {
        let econ = e_star(5.0);
        assert_eq!(
            check_c1(&econ),
            C1Check {
                beta_ordered: true,
                e_ordered: true,
                f_ordered: true
            }
        );
        let mut e = econ;
        e.agents[0].e = 2.0;
        assert_eq!(
            check_c1(&e),
            C1Check {
                beta_ordered: true,
                e_ordered: false,
                f_ordered: true
            }
        );
        let mut e = econ;
        e.agents[1].f = 2.0;
        assert_eq!(
            check_c1(&e),
            C1Check {
                beta_ordered: true,
                e_ordered: true,
                f_ordered: false
            }
        );
    }

    #[test]
    fn c2_threshold_e_star() {
        let c = check_c2(&e_star(5.0));
        assert!(c.holds);
        assert!((c.threshold - 8.0 / 3.0).abs() < 1e-14);
        let c = check_c2(&e_star(2.0));
        assert!(!c.holds);
        assert!((c.threshold - 8.0 / 3.0).abs() < 1e-14);
        assert!(!check_c2(&e_star(0.0)).holds);
    }

    #[test]
    fn decomposition_e_star() {
        let d = decompose_ad_bc(&e_star(5.0), &third());
        assert!((d.first_term + 0.25).abs() < 1e-14);
        assert!((d.e_term + 63.75).abs() < 1e-12);
        let q = Quadrinomial::from_economy(&e_star(5.0), &third()).unwrap();
        assert!((d.total() - q.ad_minus_bc()).abs() < 1e-12);
    }

    #[test]
    fn decomposition_degenerate_terms() {
        let mut econ = e_star(5.0);
        econ.agents[0].beta = 1.0;
        let d = decompose_ad_bc(&econ, &third());
        assert_eq!(d.first_term, 0.0);
        let mut econ = e_star(5.0);
        econ.agents[0].e = 0.0;
        econ.agents[1].e = 0.0;
        assert_eq!(decompose_ad_bc(&econ, &third()).first_term, 0.0);
    }

    #[test]
    fn certify_e_star() {
        let cert = certify(&e_star(5.0), &third(), true).unwrap();
        assert_eq!(cert.verdict, Verdict::CertifiedUnique);
        assert!((cert.ad_bc + 64.0).abs() < 1e-10);
        assert_eq!(cert.ad_bc_exact.as_deref(), Some("-64"));
        assert_eq!(cert.root_count, Some(1));
        assert_eq!(cert.multiplicities, Some(vec![1]));
        assert!(cert.sign_pattern_ok);
    }

    #[test]
    fn certify_low_b() {
        let cert = certify(&e_star(2.0), &third(), true).unwrap();
        assert_eq!(cert.verdict, Verdict::NotCertified);
        assert!(!cert.c2_holds.holds);
        assert_eq!(cert.root_count, Some(1));
        assert_eq!(cert.verdict.to_string(), "not certified");
    }

    #[test]
    fn certify_equal_betas() {
        let mut econ = e_star(5.0);
        econ.agents[0].beta = 1.0;
        assert!(matches!(
            certify(&econ, &third(), false),
            Err(Error::CannotCertify(_))
        ));
    }

    #[test]
    fn certify_is_label_invariant() {
        let econ = e_star(5.0);
        let swapped = Economy {
            agents: [econ.agents[1], econ.agents[0]],
            ..econ
        };
        let a = certify(&econ, &third(), true).unwrap();
        let b = certify(&swapped, &third(), true).unwrap();
        assert_eq!(a.verdict, b.verdict);
        assert_eq!(a.quadrinomial, b.quadrinomial);
        assert!(b.relabeled && !a.relabeled);
    }
}
