use thiserror::Error;

use crate::rational::RationalEpsilon;

/// Which argument of a utility evaluation left the HARA domain.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Argument {
    X,
    Y,
}

impl std::fmt::Display for Argument {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Argument::X => f.write_str("x"),
            Argument::Y => f.write_str("y"),
        }
    }
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("utility argument {arg} = {value} is outside the HARA domain (b + (a/gamma)t must be positive)")]
    Domain { arg: Argument, value: f64 },

    #[error("utility is undefined on the whole budget segment")]
    EmptyBudgetDomain,

    #[error("invalid input: {0}")]
    Input(String),

    #[error("no convergent within tol {tol:e} under max denominator {max_denominator}; best candidate {best} (error {best_error:e})")]
    Approximation {
        tol: f64,
        max_denominator: u64,
        best: RationalEpsilon,
        best_error: f64,
    },

    #[error("degenerate quadrinomial: {0}")]
    Degenerate(String),

    #[error("alpha is not a double root: remainder slope {slope}, intercept {intercept}")]
    NotDoubleRoot { slope: String, intercept: String },

    #[error("double-root inequality violated: {0}")]
    LemmaViolation(String),

    #[error("cannot certify: {0}")]
    CannotCertify(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
