//! Equilibrium prices and uniqueness certificates for two-good, two-type
//! exchange economies with HARA preferences.

pub mod certifier;
pub mod cli;
pub mod economy;
pub mod error;
pub mod oracle;
pub mod quadrinomial;
pub mod rational;
pub mod roots;

pub use certifier::{certify, UniquenessCertificate, Verdict};
pub use economy::{AgentType, Economy, HaraParams};
pub use error::{Error, Result};
pub use quadrinomial::{ExactQuadrinomial, Quadrinomial};
pub use rational::{approximate_inverse_gamma, RationalEpsilon};
pub use roots::{count_positive_roots, isolate_positive_roots, RootReport};
