//! Policy costs and benefits.
//!
//! `X_m ~ Binomial(m, p·q)` is the number of successes when the policy is
//! applied to `m` individuals; `q` is the dilution between study and
//! implementation populations (1 when they match).

use serde::{Deserialize, Serialize};

use crate::binom::{binom_pmf_vec, MAX_ENUMERATION};
use crate::error::{check_probability, domain};
use crate::grid::ProbGrid;
use crate::{Error, Result};

/// Form of `c_m` for `m = 1..=M`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum CostForm {
    Linear { unit_cost: f64 },
    AffineFixed { fixed: f64, unit_cost: f64 },
    /// `c_1, …, c_M`.
    Table { costs: Vec<f64> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CostSchedule {
    pub population: usize,
    pub form: CostForm,
}

impl CostSchedule {
    pub fn linear(population: usize, unit_cost: f64) -> Self {
        Self { population, form: CostForm::Linear { unit_cost } }
    }

    pub fn affine(population: usize, fixed: f64, unit_cost: f64) -> Self {
        Self { population, form: CostForm::AffineFixed { fixed, unit_cost } }
    }

    pub fn table(costs: Vec<f64>) -> Self {
        Self { population: costs.len(), form: CostForm::Table { costs } }
    }

    /// `c_m`; the caller guarantees `1 ≤ m ≤ M`.
    fn raw(&self, m: usize) -> f64 {
        match &self.form {
            CostForm::Linear { unit_cost } => unit_cost * m as f64,
            CostForm::AffineFixed { fixed, unit_cost } => fixed + unit_cost * m as f64,
            CostForm::Table { costs } => costs[m - 1],
        }
    }

    pub fn cost(&self, m: usize) -> Result<f64> {
        if m == 0 || m > self.population {
            return Err(Error::ScaleOutOfRange { m, max: self.population });
        }
        Ok(self.raw(m))
    }

    pub fn full_cost(&self) -> f64 {
        self.raw(self.population)
    }

    pub fn validate(&self) -> Result<()> {
        if self.population == 0 {
            return domain("population size must be positive");
        }
        if self.population as u64 > MAX_ENUMERATION {
            return Err(Error::EnumerationLimit {
                size: self.population,
                limit: MAX_ENUMERATION as usize,
            });
        }
        if let CostForm::Table { costs } = &self.form {
            if costs.len() != self.population {
                return domain(format!(
                    "cost table has {} entries for population {}",
                    costs.len(),
                    self.population
                ));
            }
        }
        let mut prev = 0.0;
        for m in 1..=self.population {
            let c = self.raw(m);
            if !(c.is_finite() && c > 0.0) {
                return domain(format!("cost c_{m} = {c} must be positive"));
            }
            if c <= prev {
                return domain(format!("costs must be strictly increasing: c_{m} = {c} after {prev}"));
            }
            prev = c;
        }
        Ok(())
    }
}

/// `b(x)` for `x = 0..=M`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum BenefitFunction {
    Linear { beta: f64 },
    /// `b(0), …, b(M)`.
    Table { benefits: Vec<f64> },
}

impl BenefitFunction {
    pub fn value(&self, x: usize) -> f64 {
        match self {
            BenefitFunction::Linear { beta } => beta * x as f64,
            BenefitFunction::Table { benefits } => benefits[x],
        }
    }

    fn validate(&self, population: usize) -> Result<()> {
        match self {
            BenefitFunction::Linear { beta } => {
                if !(beta.is_finite() && *beta > 0.0) {
                    return domain(format!("benefit slope {beta} must be positive"));
                }
            }
            BenefitFunction::Table { benefits } => {
                if benefits.len() != population + 1 {
                    return domain(format!(
                        "benefit table needs M + 1 = {} entries, got {}",
                        population + 1,
                        benefits.len()
                    ));
                }
                if benefits[0] != 0.0 {
                    return domain("b(0) must be 0");
                }
                if benefits.windows(2).any(|w| !(w[1] > w[0]) || !w[1].is_finite()) {
                    return domain("benefit table must be strictly increasing");
                }
            }
        }
        Ok(())
    }
}

fn default_dilution() -> f64 {
    1.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PolicyEconomics {
    pub costs: CostSchedule,
    pub benefit: BenefitFunction,
    #[serde(default = "default_dilution")]
    pub dilution_q: f64,
}

impl PolicyEconomics {
    pub fn new(costs: CostSchedule, benefit: BenefitFunction, dilution_q: f64) -> Result<Self> {
        let econ = Self { costs, benefit, dilution_q };
        econ.validate()?;
        Ok(econ)
    }

    pub fn validate(&self) -> Result<()> {
        self.costs.validate()?;
        self.benefit.validate(self.costs.population)?;
        check_probability("dilution_q", self.dilution_q)
    }

    pub fn population(&self) -> usize {
        self.costs.population
    }

    pub fn cost(&self, m: usize) -> Result<f64> {
        self.costs.cost(m)
    }

    /// Net benefit `b(x) − c_m` for a realised count.
    pub fn net(&self, m: usize, x: usize) -> Result<f64> {
        Ok(self.benefit.value(x) - self.cost(m)?)
    }

    /// Law of `Y_m = b(X_m) − c_m` as `(value, probability)` pairs over
    /// `x = 0..=m`.
    pub fn net_outcomes(&self, m: usize, p: f64) -> Result<Vec<(f64, f64)>> {
        check_probability("p", p)?;
        let c = self.cost(m)?;
        let pmf = binom_pmf_vec(m as u64, p * self.dilution_q)?;
        Ok(pmf
            .into_iter()
            .enumerate()
            .map(|(x, w)| (self.benefit.value(x) - c, w))
            .collect())
    }

    /// `E[b(X_m)]`.
    pub fn expected_benefit(&self, m: usize, p: f64) -> Result<f64> {
        check_probability("p", p)?;
        self.cost(m)?;
        Ok(self.expected_benefit_at(m, p * self.dilution_q))
    }

    /// `E[b(X_m)]` at an already-diluted success probability.
    fn expected_benefit_at(&self, m: usize, pq: f64) -> f64 {
        match &self.benefit {
            BenefitFunction::Linear { beta } => beta * m as f64 * pq,
            BenefitFunction::Table { benefits } => binom_pmf_vec(m as u64, pq)
                .expect("probability checked")
                .iter()
                .zip(benefits)
                .map(|(w, b)| w * b)
                .sum(),
        }
    }

    /// `E[b(X_m)] − c_m`.
    pub fn expected_net(&self, m: usize, p: f64) -> Result<f64> {
        Ok(self.expected_benefit(m, p)? - self.cost(m)?)
    }

    /// Break-even success rate `p0` with `E[b(X_M)] = c_M`, by bisection on
    /// the undiluted `p`.
    pub fn break_even_p0(&self, tol: f64) -> Result<f64> {
        let big_m = self.population();
        let c = self.costs.full_cost();
        let f = |p: f64| self.expected_benefit_at(big_m, p * self.dilution_q) - c;
        let top = f(1.0);
        if top < 0.0 {
            return Err(Error::NoBreakEven { benefit: top + c, cost: c });
        }
        let (mut lo, mut hi) = (0.0_f64, 1.0_f64);
        while hi - lo > tol.min(1e-12) {
            let mid = 0.5 * (lo + hi);
            if f(mid) < 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        Ok(0.5 * (lo + hi))
    }

    /// Checks the single-crossing shape at every grid `p`.
    pub fn validate_single_crossing(&self, grid: &ProbGrid) -> Result<SingleCrossingReport> {
        let mut rows = Vec::with_capacity(grid.len());
        let mut first_violation = None;
        for &p in grid.points() {
            let nets = (1..=self.population())
                .map(|m| self.expected_net(m, p))
                .collect::<Result<Vec<_>>>()?;
            // Smallest m* such that the net is strictly increasing on [m*, M].
            let m_star = nets
                .windows(2)
                .rposition(|w| w[1] <= w[0])
                .map_or(1, |i| i + 2);
            let bad = nets[..m_star - 1].iter().position(|&v| v >= 0.0).map(|i| i + 1);
            if let (Some(m), None) = (bad, first_violation) {
                first_violation = Some(CrossingViolation { p, m });
            }
            rows.push(CrossingRow { p, m_star, holds: bad.is_none() });
        }
        Ok(SingleCrossingReport {
            holds: first_violation.is_none(),
            first_violation,
            rows,
        })
    }

    /// Largest `m` with `−α·c_m ≥ u̲`, or 0 when even `m = 1` breaks the limit.
    pub fn max_scale_under_bound(&self, alpha: f64, u_bar: f64) -> Result<usize> {
        check_probability("alpha", alpha)?;
        if !(u_bar < 0.0) {
            return domain(format!("loss limit {u_bar} must be negative"));
        }
        let slack = 1e-12 * u_bar.abs();
        let ok = |m: usize| -alpha * self.costs.raw(m) >= u_bar - slack;
        // Costs increase, so the admissible scales form a prefix.
        let (mut lo, mut hi) = (0usize, self.population());
        if ok(hi) {
            return Ok(hi);
        }
        while hi - lo > 1 {
            let mid = (lo + hi) / 2;
            if ok(mid) {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        Ok(lo)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CrossingRow {
    pub p: f64,
    pub m_star: usize,
    pub holds: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CrossingViolation {
    pub p: f64,
    pub m: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SingleCrossingReport {
    pub holds: bool,
    pub first_violation: Option<CrossingViolation>,
    pub rows: Vec<CrossingRow>,
}
