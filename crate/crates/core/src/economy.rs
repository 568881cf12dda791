//! Two-good, two-type exchange economies with a common HARA Bernoulli
//! utility, and their demand and excess-demand functions.
//!
//! Good `y` is the numéraire throughout; `p` is the price of good `x`.

use serde::{Deserialize, Serialize};

use crate::error::{Argument, Error, Result};
use crate::rational::RationalEpsilon;

/// `(gamma, a, b)` of `u(t) = gamma/(1 - gamma) * (b + (a/gamma) t)^(1 - gamma)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HaraParams {
    pub gamma: f64,
    pub a: f64,
    pub b: f64,
}

impl HaraParams {
    /// Economy-scope constructor: requires `gamma > 2`, `a > 0`, `b >= 0`.
    pub fn new(gamma: f64, a: f64, b: f64) -> Result<Self> {
        let h = HaraParams { gamma, a, b };
        h.validate()?;
        Ok(h)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.gamma.is_finite() && self.gamma > 2.0) {
            return Err(Error::Input(format!(
                "gamma must be > 2, got {}",
                self.gamma
            )));
        }
        if !(self.a.is_finite() && self.a > 0.0) {
            return Err(Error::Input(format!("a must be > 0, got {}", self.a)));
        }
        if !(self.b.is_finite() && self.b >= 0.0) {
            return Err(Error::Input(format!("b must be >= 0, got {}", self.b)));
        }
        Ok(())
    }

    fn base(&self, t: f64) -> f64 {
        self.b + self.a / self.gamma * t
    }

    /// Bernoulli utility `u_H(t)`. Only needs `gamma > 1`.
    pub fn bernoulli(&self, t: f64) -> Option<f64> {
        let base = self.base(t);
        if base > 0.0 {
            Some(self.gamma / (1.0 - self.gamma) * base.powf(1.0 - self.gamma))
        } else {
            None
        }
    }

    /// `u_H'(t) = a (b + (a/gamma) t)^(-gamma)`.
    pub fn marginal(&self, t: f64) -> Option<f64> {
        let base = self.base(t);
        (base > 0.0).then(|| self.a * base.powf(-self.gamma))
    }
}

/// One impatience type: discount factor and endowment of each good.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AgentType {
    pub beta: f64,
    pub e: f64,
    pub f: f64,
}

impl AgentType {
    pub fn new(beta: f64, e: f64, f: f64) -> Result<Self> {
        let a = AgentType { beta, e, f };
        a.validate()?;
        Ok(a)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.beta.is_finite() && self.beta > 0.0) {
            return Err(Error::Input(format!("beta must be > 0, got {}", self.beta)));
        }
        if !(self.e.is_finite() && self.e >= 0.0 && self.f.is_finite() && self.f >= 0.0) {
            return Err(Error::Input(format!(
                "endowments must be >= 0, got ({}, {})",
                self.e, self.f
            )));
        }
        if self.e + self.f <= 0.0 {
            return Err(Error::Input("endowment (e, f) must not be zero".into()));
        }
        Ok(())
    }

    /// Wealth `p e + f` at price `p`.
    pub fn wealth(&self, p: f64) -> f64 {
        p * self.e + self.f
    }

    /// `sigma = beta^(m/n)`.
    pub fn sigma(&self, eps: &RationalEpsilon) -> f64 {
        self.sigma_with_exponent(eps.value())
    }

    pub fn sigma_with_exponent(&self, exponent: f64) -> f64 {
        self.beta.powf(exponent)
    }
}

/// Two agent types sharing one HARA utility.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Economy {
    pub hara: HaraParams,
    pub agents: [AgentType; 2],
}

/// On-disk economy layout.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EconomyFile {
    pub gamma: f64,
    pub a: f64,
    pub b: f64,
    pub agents: Vec<AgentType>,
}

impl Economy {
    pub fn new(hara: HaraParams, agent1: AgentType, agent2: AgentType) -> Result<Self> {
        hara.validate()?;
        agent1.validate()?;
        agent2.validate()?;
        Ok(Economy {
            hara,
            agents: [agent1, agent2],
        })
    }

    pub fn agent1(&self) -> &AgentType {
        &self.agents[0]
    }

    pub fn agent2(&self) -> &AgentType {
        &self.agents[1]
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let file: EconomyFile =
            serde_json::from_str(s).map_err(|e| Error::Input(format!("economy JSON: {e}")))?;
        file.try_into()
    }

    pub fn to_file(&self) -> EconomyFile {
        EconomyFile {
            gamma: self.hara.gamma,
            a: self.hara.a,
            b: self.hara.b,
            agents: self.agents.to_vec(),
        }
    }

    pub fn total_x(&self) -> f64 {
        self.agents[0].e + self.agents[1].e
    }

    /// Flags agents whose demand leaves the nonnegative orthant at `p`.
    pub fn demand_warnings(&self, eps: &RationalEpsilon, p: f64) -> Result<Vec<DemandWarning>> {
        let mut out = Vec::new();
        for (i, agent) in self.agents.iter().enumerate() {
            let x = demand_x(&self.hara, agent, eps, p)?;
            let y = demand_y(&self.hara, agent, eps, p)?;
            if x < 0.0 || y < 0.0 {
                out.push(DemandWarning { agent: i + 1, x, y });
            }
        }
        Ok(out)
    }
}

impl TryFrom<EconomyFile> for Economy {
    type Error = Error;

    fn try_from(file: EconomyFile) -> Result<Self> {
        if file.agents.len() != 2 {
            return Err(Error::Input(format!(
                "exactly two agents required, got {}",
                file.agents.len()
            )));
        }
        Economy::new(
            HaraParams {
                gamma: file.gamma,
                a: file.a,
                b: file.b,
            },
            file.agents[0],
            file.agents[1],
        )
    }
}

/// Demand outside the nonnegative orthant. The closed form stays evaluable
/// there, so this is reported rather than raised.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DemandWarning {
    pub agent: usize,
    pub x: f64,
    pub y: f64,
}

/// `u_H(x) + beta u_H(y)`.
pub fn utility(hara: &HaraParams, agent: &AgentType, x: f64, y: f64) -> Result<f64> {
    let ux = hara.bernoulli(x).ok_or(Error::Domain {
        arg: Argument::X,
        value: x,
    })?;
    let uy = hara.bernoulli(y).ok_or(Error::Domain {
        arg: Argument::Y,
        value: y,
    })?;
    Ok(ux + agent.beta * uy)
}

fn check_price(p: f64) -> Result<()> {
    if p.is_finite() && p > 0.0 {
        Ok(())
    } else {
        Err(Error::Input(format!(
            "price must be positive and finite, got {p}"
        )))
    }
}

/// Demand for good `x` at price `p`:
/// `[b - b p^eps sigma + a eps (p e + f)] / [a eps (p + sigma p^eps)]`.
pub fn demand_x(
    hara: &HaraParams,
    agent: &AgentType,
    eps: &RationalEpsilon,
    p: f64,
) -> Result<f64> {
    demand_x_with_exponent(hara, agent, eps.value(), p)
}

/// [`demand_x`] with an arbitrary real exponent in place of `m/n`.
pub fn demand_x_with_exponent(
    hara: &HaraParams,
    agent: &AgentType,
    exponent: f64,
    p: f64,
) -> Result<f64> {
    check_price(p)?;
    let sigma = agent.sigma_with_exponent(exponent);
    let pe = p.powf(exponent);
    let ae = hara.a * exponent;
    Ok((hara.b - hara.b * pe * sigma + ae * agent.wealth(p)) / (ae * (p + sigma * pe)))
}

/// Demand for the numéraire from the budget identity.
pub fn demand_y(
    hara: &HaraParams,
    agent: &AgentType,
    eps: &RationalEpsilon,
    p: f64,
) -> Result<f64> {
    demand_y_with_exponent(hara, agent, eps.value(), p)
}

pub fn demand_y_with_exponent(
    hara: &HaraParams,
    agent: &AgentType,
    exponent: f64,
    p: f64,
) -> Result<f64> {
    let x = demand_x_with_exponent(hara, agent, exponent, p)?;
    Ok(agent.wealth(p) - p * x)
}

/// Aggregate excess demand for good `x`.
pub fn excess_demand(econ: &Economy, eps: &RationalEpsilon, p: f64) -> Result<f64> {
    excess_demand_with_exponent(econ, eps.value(), p)
}

pub fn excess_demand_with_exponent(econ: &Economy, exponent: f64, p: f64) -> Result<f64> {
    let mut total = 0.0;
    for agent in &econ.agents {
        total += demand_x_with_exponent(&econ.hara, agent, exponent, p)?;
    }
    Ok(total - econ.total_x())
}

/// Aggregate excess demand for the numéraire.
pub fn excess_demand_y(econ: &Economy, eps: &RationalEpsilon, p: f64) -> Result<f64> {
    let mut total = 0.0;
    for agent in &econ.agents {
        total += demand_y(&econ.hara, agent, eps, p)? - agent.f;
    }
    Ok(total)
}
