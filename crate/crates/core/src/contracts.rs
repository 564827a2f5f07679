//! Performance-guarantee payoff algebra.
//!
//! `Y` is the implementer's realised net benefit `b(x) − c_m`; `Y⁺` and `Y⁻`
//! are its positive and negative parts, so `Y = Y⁺ + Y⁻`.
//!
//! | contract          | implementer keeps     | researcher pays    |
//! |-------------------|-----------------------|--------------------|
//! | `Full`            | `Y⁺`                  | `−Y⁻`              |
//! | `Tail(k)`         | `max(Y, k)`           | `−(Y − k)⁻`        |
//! | `Proportional(s)` | `Y⁺ + (1−s)·Y⁻`       | `−s·Y⁻`            |

use serde::{Deserialize, Serialize};

use crate::error::domain;
use crate::Result;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum InsuranceContract {
    Full,
    /// Losses beyond `k < 0` are covered.
    Tail { k: f64 },
    /// A share `s ∈ (0, 1)` of every loss is covered.
    Proportional { s: f64 },
}

impl InsuranceContract {
    /// Checks the contract parameters; for `Tail`, `k` must also exceed
    /// `−c_m` at the scale it is written for.
    pub fn validate(&self, c_m: Option<f64>) -> Result<()> {
        match *self {
            InsuranceContract::Full => Ok(()),
            InsuranceContract::Tail { k } => {
                if !(k < 0.0 && k.is_finite()) {
                    return domain(format!("tail threshold k = {k} must be negative"));
                }
                match c_m {
                    Some(c) if k <= -c => domain(format!("tail threshold k = {k} must exceed -c_m = {}", -c)),
                    _ => Ok(()),
                }
            }
            InsuranceContract::Proportional { s } => {
                if s > 0.0 && s < 1.0 {
                    Ok(())
                } else {
                    domain(format!("proportional share s = {s} must lie in (0, 1)"))
                }
            }
        }
    }

    pub fn label(&self) -> String {
        match self {
            InsuranceContract::Full => "full".into(),
            InsuranceContract::Tail { k } => format!("tail(k={k})"),
            InsuranceContract::Proportional { s } => format!("proportional(s={s})"),
        }
    }
}

/// `Y` split into parts.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OutcomeLedger {
    pub y: f64,
    pub y_plus: f64,
    pub y_minus: f64,
}

impl OutcomeLedger {
    pub fn new(y: f64) -> Self {
        Self { y, y_plus: y.max(0.0), y_minus: y.min(0.0) }
    }
}

/// `(z)⁻ = min(z, 0)`.
pub fn neg_part(z: f64) -> f64 {
    z.min(0.0)
}

pub fn implementer_payoff(y: f64, contract: &InsuranceContract) -> f64 {
    let ledger = OutcomeLedger::new(y);
    match *contract {
        InsuranceContract::Full => ledger.y_plus,
        InsuranceContract::Tail { k } => y - neg_part(y - k),
        InsuranceContract::Proportional { s } => ledger.y_plus + (1.0 - s) * ledger.y_minus,
    }
}

/// Transfer from researcher to implementer; never negative.
pub fn researcher_payment(y: f64, contract: &InsuranceContract) -> f64 {
    implementer_payoff(y, contract) - y
}

/// Least insurance that still guarantees implementation at a scale with
/// cost `c_m`, given the implementer's loss limit `u̲`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MinimalInsurance {
    /// Tail threshold `k = u̲`.
    pub k: f64,
    /// Share of every loss covered by the researcher, `1 + u̲/c_m`.
    pub s: f64,
    /// Share of every loss the implementer keeps, `−u̲/c_m`.
    pub retained_share: f64,
}

impl MinimalInsurance {
    pub fn tail(&self) -> InsuranceContract {
        InsuranceContract::Tail { k: self.k }
    }

    pub fn proportional(&self) -> InsuranceContract {
        InsuranceContract::Proportional { s: self.s }
    }
}

pub fn minimal_insurance(u_bar: f64, c_m: f64) -> Result<MinimalInsurance> {
    if !(c_m > 0.0) {
        return domain(format!("cost c_m = {c_m} must be positive"));
    }
    if !(u_bar < 0.0) {
        return domain(format!("loss limit {u_bar} must be negative"));
    }
    if u_bar <= -c_m {
        return domain(format!(
            "loss limit {u_bar} already tolerates the full cost {c_m}; no insurance is needed"
        ));
    }
    let retained_share = -u_bar / c_m;
    Ok(MinimalInsurance { k: u_bar, s: 1.0 - retained_share, retained_share })
}
