//! Implementer decision rules.
//!
//! The implementer acts only when the published bound satisfies `L > p0`,
//! then picks the largest scale whose worst-case expected value stays at or
//! above the loss limit `u̲`. The worst case is `p = 0`: every
//! implementation fails and costs `c_m`.

use serde::{Deserialize, Serialize};

use crate::contracts::InsuranceContract;
use crate::economics::PolicyEconomics;
use crate::error::{check_probability, domain};
use crate::{Error, Result};

/// Implementer belief about `α(k)`, the false-positive probability among
/// researchers who insure losses beyond `k`.
///
/// `α(−c_m)` is the population value (no insurance). Raising `k` toward 0
/// buys more insurance, which unreliable researchers pay more for, so `α`
/// is nonincreasing in `k`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AlphaSchedule {
    /// `(k, α)` pairs with `k ≤ 0`.
    pub knots: Vec<(f64, f64)>,
    /// `α` over the whole researcher population, attained at `k = anchor_k`.
    pub population_alpha: f64,
    /// `−c_m` for the scale the schedule was elicited at.
    pub anchor_k: f64,
}

impl AlphaSchedule {
    pub fn new(mut knots: Vec<(f64, f64)>, population_alpha: f64, anchor_k: f64) -> Result<Self> {
        check_probability("population_alpha", population_alpha)?;
        if !(anchor_k < 0.0) {
            return domain("schedule anchor -c_m must be negative");
        }
        for &(k, a) in &knots {
            check_probability("schedule alpha", a)?;
            if !(k <= 0.0 && k >= anchor_k) {
                return domain(format!("schedule knot k = {k} outside [{anchor_k}, 0]"));
            }
        }
        knots.sort_by(|a, b| a.0.total_cmp(&b.0));
        if knots.windows(2).any(|w| w[1].1 > w[0].1) || knots.first().is_some_and(|f| f.1 > population_alpha) {
            return domain("alpha schedule must be nonincreasing in k");
        }
        Ok(Self { knots, population_alpha, anchor_k })
    }

    pub fn constant(alpha: f64, anchor_k: f64) -> Result<Self> {
        Self::new(Vec::new(), alpha, anchor_k)
    }

    /// `α(k)`, piecewise linear between knots and flat outside them.
    pub fn alpha(&self, k: f64) -> f64 {
        let mut pts = Vec::with_capacity(self.knots.len() + 1);
        pts.push((self.anchor_k, self.population_alpha));
        pts.extend(self.knots.iter().copied());
        if k <= pts[0].0 {
            return pts[0].1;
        }
        for w in pts.windows(2) {
            let ((k0, a0), (k1, a1)) = (w[0], w[1]);
            if k <= k1 {
                if k1 == k0 {
                    return a1;
                }
                return a0 + (a1 - a0) * (k - k0) / (k1 - k0);
            }
        }
        pts.last().expect("non-empty").1
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum AlphaBelief {
    /// No information: the worst case `sup Pr(L > p0) = 1`.
    Unknown,
    Scalar { alpha: f64 },
    Schedule { schedule: AlphaSchedule },
}

impl AlphaBelief {
    /// The population-wide `α`.
    pub fn population_alpha(&self) -> f64 {
        match self {
            AlphaBelief::Unknown => 1.0,
            AlphaBelief::Scalar { alpha } => *alpha,
            AlphaBelief::Schedule { schedule } => schedule.population_alpha,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ImplementerPolicy {
    pub u_bar: f64,
    pub alpha_belief: AlphaBelief,
    pub p0: f64,
}

impl ImplementerPolicy {
    pub fn new(u_bar: f64, alpha_belief: AlphaBelief, p0: f64) -> Result<Self> {
        let policy = Self { u_bar, alpha_belief, p0 };
        policy.validate()?;
        Ok(policy)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.u_bar < 0.0 && self.u_bar.is_finite()) {
            return domain(format!("loss limit u_bar = {} must be negative", self.u_bar));
        }
        check_probability("p0", self.p0)?;
        if let AlphaBelief::Scalar { alpha } = self.alpha_belief {
            check_probability("alpha", alpha)?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Decision {
    pub implement: bool,
    pub scale: usize,
    /// Worst-case expected value at the chosen scale (0 when not implementing).
    pub bound: f64,
}

impl Decision {
    pub fn none() -> Self {
        Self { implement: false, scale: 0, bound: 0.0 }
    }

    fn at(scale: usize, bound: f64) -> Self {
        if scale == 0 {
            Self::none()
        } else {
            Self { implement: true, scale, bound }
        }
    }
}

/// `−c_m·α`, the worst-case expected value of implementing at scale `m`.
pub fn worst_case_bound(m: usize, alpha: f64, econ: &PolicyEconomics) -> Result<f64> {
    check_probability("alpha", alpha)?;
    Ok(-econ.cost(m)? * alpha)
}

pub fn decide_no_guarantee(l: f64, policy: &ImplementerPolicy, econ: &PolicyEconomics) -> Result<Decision> {
    policy.validate()?;
    if !(l > policy.p0) {
        return Ok(Decision::none());
    }
    let alpha = policy.alpha_belief.population_alpha();
    scaled(alpha, 1.0, policy.u_bar, econ)
}

/// Largest `m` with `−retained·α·c_m ≥ u̲`.
fn scaled(alpha: f64, retained: f64, u_bar: f64, econ: &PolicyEconomics) -> Result<Decision> {
    let a = (alpha * retained).clamp(0.0, 1.0);
    let m = econ.max_scale_under_bound(a, u_bar)?;
    Ok(if m == 0 {
        Decision::none()
    } else {
        Decision::at(m, worst_case_bound(m, a, econ)?)
    })
}

pub fn decide_with_contract(
    l: f64,
    contract: &InsuranceContract,
    policy: &ImplementerPolicy,
    econ: &PolicyEconomics,
) -> Result<Decision> {
    policy.validate()?;
    contract.validate(None)?;
    if !(l > policy.p0) {
        return Ok(Decision::none());
    }
    let big_m = econ.population();
    match *contract {
        InsuranceContract::Full => Ok(Decision::at(big_m, 0.0)),
        InsuranceContract::Tail { k } => {
            if k >= policy.u_bar {
                // Worst case k · sup Pr(L > p0) with sup Pr taken as 1.
                Ok(Decision::at(big_m, k.max(-econ.cost(big_m)?)))
            } else {
                let AlphaBelief::Schedule { schedule } = &policy.alpha_belief else {
                    return Err(Error::ScheduleRequired { k, u_bar: policy.u_bar });
                };
                scaled(schedule.alpha(k), 1.0, policy.u_bar, econ)
            }
        }
        InsuranceContract::Proportional { s } => {
            let alpha = match &policy.alpha_belief {
                AlphaBelief::Unknown => 1.0,
                other => other.population_alpha(),
            };
            scaled(alpha, 1.0 - s, policy.u_bar, econ)
        }
    }
}
