//! Researcher-side expected utility: payoff laws, participation and the
//! false-positive / power conditions, risk management and pooling.
//!
//! The researcher's payoff after publishing and seeing the policy applied to
//! `m` individuals is
//!
//! ```text
//! V⁰_m = base_pub + impl_value(m) + λ·Y⁻ + noise
//! ```
//!
//! and with a full guarantee `V¹_m = V⁰_m + Y⁻`. Without implementation the
//! payoff is `V⁰_0 = base_pub + noise`. Risk management replaces the
//! guaranteed loss term `Y⁻` by what the researcher actually retains.
//!
//! Within one evaluation `L` and `Y_m` are independent given `p`: the
//! implementation population is disjoint from the study sample, so the
//! conditional laws given `L > p0` equal the unconditional ones.

use rand::Rng;
use rand_distr::{Binomial, Distribution};
use serde::{Deserialize, Serialize};

use crate::contracts::neg_part;
use crate::economics::PolicyEconomics;
use crate::error::{check_probability, domain};
use crate::grid::ProbGrid;
use crate::law::{DiscreteLaw, MAX_ATOMS};
use crate::researchers::ResearcherStrategy;
use crate::sim::{mc_estimate, McEstimate, SeededStream};
use crate::{Error, Result};

/// Largest exponent fed to `exp` before CARA utility saturates.
const EXP_LIMIT: f64 = 700.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum UtilityForm {
    Linear,
    /// `v(w) = (1 − e^(−a·w))/a`.
    Cara { a: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct UtilitySpec {
    pub form: UtilityForm,
    /// Participation floor `v̲`, in utility units.
    pub v_bar: f64,
}

impl UtilitySpec {
    pub fn linear(v_bar: f64) -> Self {
        Self { form: UtilityForm::Linear, v_bar }
    }

    pub fn cara(a: f64, v_bar: f64) -> Result<Self> {
        let u = Self { form: UtilityForm::Cara { a }, v_bar };
        u.validate()?;
        Ok(u)
    }

    pub fn validate(&self) -> Result<()> {
        if let UtilityForm::Cara { a } = self.form {
            if !(a > 0.0 && a.is_finite()) {
                return domain(format!("CARA coefficient {a} must be positive"));
            }
        }
        if self.v_bar.is_nan() {
            return domain("v_bar must be a number");
        }
        Ok(())
    }

    pub fn v(&self, w: f64) -> f64 {
        match self.form {
            UtilityForm::Linear => w,
            UtilityForm::Cara { a } => {
                let mut e = -a * w;
                if e > EXP_LIMIT {
                    log::warn!("CARA utility saturated at a·w = {}", -e);
                    e = EXP_LIMIT;
                }
                -(e.exp_m1()) / a
            }
        }
    }

    /// `v⁻¹(u)`; infinite when `u` lies above the CARA ceiling `1/a`.
    pub fn v_inv(&self, u: f64) -> f64 {
        match self.form {
            UtilityForm::Linear => u,
            UtilityForm::Cara { a } => {
                let inner = -a * u;
                if inner <= -1.0 {
                    f64::INFINITY
                } else {
                    -inner.ln_1p() / a
                }
            }
        }
    }

    pub fn certainty_equivalent(&self, law: &DiscreteLaw) -> f64 {
        self.v_inv(expected_utility(law, self))
    }
}

/// `E[v(W)]`.
pub fn expected_utility(law: &DiscreteLaw, u: &UtilitySpec) -> f64 {
    law.expect(|w| u.v(w))
}

/// `E[v(W)]` from a sample.
pub fn expected_utility_sample(sample: &[f64], u: &UtilitySpec) -> Result<f64> {
    if sample.is_empty() {
        return domain("empty sample");
    }
    Ok(sample.iter().map(|&w| u.v(w)).sum::<f64>() / sample.len() as f64)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ImplValue {
    /// `value · m`.
    PerUnit { value: f64 },
    /// `impl_value(0), …, impl_value(M)`.
    Table { values: Vec<f64> },
}

impl ImplValue {
    pub fn at(&self, m: usize) -> Result<f64> {
        match self {
            ImplValue::PerUnit { value } => Ok(value * m as f64),
            ImplValue::Table { values } => values
                .get(m)
                .copied()
                .ok_or(Error::ScaleOutOfRange { m, max: values.len().saturating_sub(1) }),
        }
    }
}

/// Zero-mean `±spread` with equal probability.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NoiseSpec {
    pub spread: f64,
}

impl NoiseSpec {
    fn law(&self) -> DiscreteLaw {
        DiscreteLaw::two_point(-self.spread, self.spread, 0.5).expect("valid weights")
    }
}

fn zero_impl() -> ImplValue {
    ImplValue::PerUnit { value: 0.0 }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ResearcherPayoffModel {
    pub base_pub: f64,
    #[serde(default = "zero_impl")]
    pub impl_value: ImplValue,
    /// Share `λ` of the implementer's loss borne even without a guarantee.
    #[serde(default)]
    pub failure_exposure: f64,
    #[serde(default)]
    pub noise: Option<NoiseSpec>,
}

impl ResearcherPayoffModel {
    pub fn new(base_pub: f64, impl_value: ImplValue) -> Self {
        Self { base_pub, impl_value, failure_exposure: 0.0, noise: None }
    }

    pub fn validate(&self) -> Result<()> {
        check_probability("failure_exposure", self.failure_exposure)?;
        if self.impl_value.at(0)? != 0.0 {
            return domain("impl_value(0) must be 0");
        }
        if let Some(n) = self.noise {
            if !(n.spread >= 0.0 && n.spread.is_finite()) {
                return domain("noise spread must be non-negative");
            }
        }
        Ok(())
    }

    fn with_noise(&self, law: DiscreteLaw) -> Result<DiscreteLaw> {
        match self.noise {
            Some(n) if n.spread > 0.0 => law.add_independent(&n.law()),
            _ => Ok(law),
        }
    }

    /// Law of `V⁰_0`, the payoff when the policy is not implemented.
    pub fn unimplemented_law(&self) -> Result<DiscreteLaw> {
        self.with_noise(DiscreteLaw::point(self.base_pub))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum RiskStrategy {
    /// Full guarantee, all of `Y⁻` retained.
    None,
    /// Pay `premium` to pass `(1−γ)` of `Y⁻` to a third party.
    Transfer { gamma: f64, premium: f64 },
    /// Keep `γ₁` of `Y⁻` and take on `γ₂` of a partner's loss `Z⁻`.
    Exchange { gamma1: f64, gamma2: f64, partner_loss: DiscreteLaw },
    /// Insure only losses beyond `k`.
    TailOnly { k: f64 },
    /// Insure only a share `s` of losses.
    ProportionalOnly { s: f64 },
}

impl RiskStrategy {
    pub fn validate(&self) -> Result<()> {
        match self {
            RiskStrategy::None => Ok(()),
            RiskStrategy::Transfer { gamma, premium } => {
                check_probability("gamma", *gamma)?;
                if !(*premium >= 0.0) {
                    return domain("premium must be non-negative");
                }
                Ok(())
            }
            RiskStrategy::Exchange { gamma1, gamma2, partner_loss } => {
                check_probability("gamma1", *gamma1)?;
                check_probability("gamma2", *gamma2)?;
                if partner_loss.atoms().iter().any(|(z, _)| *z > 0.0) {
                    return domain("partner loss law must be non-positive");
                }
                Ok(())
            }
            RiskStrategy::TailOnly { k } => {
                if !(*k < 0.0) {
                    return domain("tail threshold must be negative");
                }
                Ok(())
            }
            RiskStrategy::ProportionalOnly { s } => check_probability("s", *s),
        }
    }

    /// Loss the researcher keeps for one realised `Y` (partner and premium
    /// terms excluded).
    pub fn retained(&self, y: f64) -> f64 {
        match *self {
            RiskStrategy::None => neg_part(y),
            RiskStrategy::Transfer { gamma, .. } => gamma * neg_part(y),
            RiskStrategy::Exchange { gamma1, .. } => gamma1 * neg_part(y),
            RiskStrategy::TailOnly { k } => neg_part(y - k),
            RiskStrategy::ProportionalOnly { s } => s * neg_part(y),
        }
    }

    fn offset(&self) -> f64 {
        match *self {
            RiskStrategy::Transfer { premium, .. } => -premium,
            _ => 0.0,
        }
    }
}

/// Exact law of the researcher's payoff `W` at scale `m ≥ 1`.
pub fn researcher_world(
    risk: &RiskStrategy,
    payoff: &ResearcherPayoffModel,
    m: usize,
    econ: &PolicyEconomics,
    p: f64,
) -> Result<DiscreteLaw> {
    risk.validate()?;
    payoff.validate()?;
    let fixed = payoff.base_pub + payoff.impl_value.at(m)? + risk.offset();
    let lambda = payoff.failure_exposure;
    let atoms = econ
        .net_outcomes(m, p)?
        .into_iter()
        .map(|(y, w)| (fixed + lambda * neg_part(y) + risk.retained(y), w))
        .collect();
    let mut law = DiscreteLaw::new(atoms)?;
    if let RiskStrategy::Exchange { gamma2, partner_loss, .. } = risk {
        law = law.add_independent(&partner_loss.map(|z| gamma2 * z))?;
    }
    payoff.with_noise(law)
}

/// One Monte-Carlo draw of `W`, matching [`researcher_world`] in law.
pub fn sample_world<R: Rng + ?Sized>(
    risk: &RiskStrategy,
    payoff: &ResearcherPayoffModel,
    m: usize,
    econ: &PolicyEconomics,
    p: f64,
    rng: &mut R,
) -> Result<f64> {
    let dist = Binomial::new(m as u64, p * econ.dilution_q).map_err(|e| Error::Domain(e.to_string()))?;
    let x = dist.sample(rng) as usize;
    let y = econ.net(m, x)?;
    let mut w = payoff.base_pub + payoff.impl_value.at(m)? + risk.offset() + payoff.failure_exposure * neg_part(y) + risk.retained(y);
    if let RiskStrategy::Exchange { gamma2, partner_loss, .. } = risk {
        w += gamma2 * partner_loss.quantile_draw(rng.random());
    }
    if let Some(n) = payoff.noise {
        w += if rng.random::<bool>() { n.spread } else { -n.spread };
    }
    Ok(w)
}

/// A researcher's full configuration for the participation checks.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ResearcherProfile {
    pub publication: ResearcherStrategy,
    pub risk: RiskStrategy,
    pub payoff: ResearcherPayoffModel,
    pub utility: UtilitySpec,
    /// Scale `m` at which the implementer would apply the policy.
    pub scale: usize,
}

impl ResearcherProfile {
    pub fn validate(&self) -> Result<()> {
        self.publication.validate()?;
        self.risk.validate()?;
        self.payoff.validate()?;
        self.utility.validate()?;
        if self.scale == 0 {
            return domain("scale must be at least 1");
        }
        Ok(())
    }

    /// `(Pr(L > p0), E[v(V⁰_0)], E[v(W)])` at one `p`.
    fn pieces(&self, econ: &PolicyEconomics, p: f64, p0: f64) -> Result<(f64, f64, f64)> {
        let pr = self.publication.pr_positive(p, p0)?;
        let eu_not = expected_utility(&self.payoff.unimplemented_law()?, &self.utility);
        let world = researcher_world(&self.risk, &self.payoff, self.scale, econ, p)?;
        Ok((pr, eu_not, expected_utility(&world, &self.utility)))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ParticipationRow {
    pub p: f64,
    pub pr_positive: f64,
    pub eu_unimplemented: f64,
    pub eu_implemented: f64,
    pub lhs: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ParticipationReport {
    pub rows: Vec<ParticipationRow>,
    pub min_lhs: f64,
    pub argmin_p: f64,
    pub v_bar: f64,
    pub pass: bool,
}

/// Left-hand side of the participation condition at each grid `p`, and
/// whether its minimum clears `v̲`.
pub fn participation_check(
    profile: &ResearcherProfile,
    econ: &PolicyEconomics,
    grid: &ProbGrid,
    p0: f64,
) -> Result<ParticipationReport> {
    profile.validate()?;
    if grid.is_empty() {
        return Err(Error::EmptyGrid);
    }
    let rows = grid
        .points()
        .iter()
        .map(|&p| {
            let (pr, a, b) = profile.pieces(econ, p, p0)?;
            Ok(ParticipationRow {
                p,
                pr_positive: pr,
                eu_unimplemented: a,
                eu_implemented: b,
                lhs: (1.0 - pr) * a + pr * b,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let worst = rows
        .iter()
        .min_by(|x, y| x.lhs.total_cmp(&y.lhs))
        .expect("non-empty grid");
    let v_bar = profile.utility.v_bar;
    Ok(ParticipationReport {
        min_lhs: worst.lhs,
        argmin_p: worst.p,
        v_bar,
        pass: worst.lhs >= v_bar,
        rows,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundType {
    /// Both conditional utilities clear `v̲`.
    None,
    /// Implementation falls short: `Pr(L > p0)` is capped.
    Upper,
    /// Non-implementation falls short: `Pr(L > p0)` needs a floor.
    Lower,
    /// Neither outcome clears `v̲`; no probability satisfies the condition.
    Infeasible,
    /// The two conditional utilities coincide.
    Vacuous,
}

impl BoundType {
    pub fn name(&self) -> &'static str {
        match self {
            BoundType::None => "none",
            BoundType::Upper => "upper",
            BoundType::Lower => "lower",
            BoundType::Infeasible => "infeasible",
            BoundType::Vacuous => "vacuous",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ConditionRow {
    pub p: f64,
    pub lhs: f64,
    pub bound_type: BoundType,
    pub bound: Option<f64>,
    pub actual: f64,
    pub violated: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConditionReport {
    pub rows: Vec<ConditionRow>,
    pub any_violation: bool,
}

/// Classifies each grid `p` into the false-positive-control or power regime
/// and checks the strategy's `Pr(L > p0)` against the implied bound.
pub fn fp_and_power_conditions(
    profile: &ResearcherProfile,
    econ: &PolicyEconomics,
    grid: &ProbGrid,
    p0: f64,
) -> Result<ConditionReport> {
    let part = participation_check(profile, econ, grid, p0)?;
    let v_bar = profile.utility.v_bar;
    let rows: Vec<ConditionRow> = part
        .rows
        .iter()
        .map(|r| {
            let (a, b, pr) = (r.eu_unimplemented, r.eu_implemented, r.pr_positive);
            let ratio = || (a - v_bar) / (a - b);
            let (bound_type, bound, violated) = if a >= v_bar && b >= v_bar {
                (BoundType::None, None, false)
            } else if a < v_bar && b < v_bar {
                (BoundType::Infeasible, None, true)
            } else if (a - b).abs() <= f64::EPSILON * a.abs().max(b.abs()).max(1.0) {
                (BoundType::Vacuous, None, false)
            } else if b < v_bar {
                let t = ratio();
                (BoundType::Upper, Some(t), pr > t)
            } else {
                let t = ratio();
                (BoundType::Lower, Some(t), pr < t)
            };
            ConditionRow { p: r.p, lhs: r.lhs, bound_type, bound, actual: pr, violated }
        })
        .collect();
    Ok(ConditionReport {
        any_violation: rows.iter().any(|r| r.violated),
        rows,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PoolMember {
    /// Deterministic part of the payoff.
    pub base: f64,
    /// Law of this member's own loss (non-positive values).
    pub loss: DiscreteLaw,
    pub utility: UtilitySpec,
}

/// `shares[i][j]` is member `i`'s share of member `j`'s loss.
fn validate_shares(n: usize, shares: &[Vec<f64>]) -> Result<()> {
    if shares.len() != n || shares.iter().any(|r| r.len() != n) {
        return Err(Error::InvalidShares(format!("share matrix must be {n}×{n}")));
    }
    for (i, row) in shares.iter().enumerate() {
        if row.iter().any(|s| !(0.0..=1.0).contains(s)) {
            return Err(Error::InvalidShares(format!("row {i} has a share outside [0, 1]")));
        }
        let total: f64 = row.iter().sum();
        if (total - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidShares(format!("row {i} sums to {total}, not 1")));
        }
    }
    Ok(())
}

/// Each member's `E[v(base_i + Σ_j shares[i][j]·Z_j)]` with independent
/// `Z_j`, by enumerating every joint outcome.
pub fn pool_expected_utility(members: &[PoolMember], shares: &[Vec<f64>]) -> Result<Vec<f64>> {
    validate_shares(members.len(), shares)?;
    for m in members {
        m.utility.validate()?;
    }
    let mut size = 1usize;
    for m in members {
        size = size.saturating_mul(m.loss.len());
    }
    if size > MAX_ATOMS {
        return Err(Error::EnumerationLimit { size, limit: MAX_ATOMS });
    }
    let mut out = vec![0.0; members.len()];
    let mut idx = vec![0usize; members.len()];
    loop {
        let mut weight = 1.0;
        for (j, m) in members.iter().enumerate() {
            weight *= m.loss.atoms()[idx[j]].1;
        }
        for (i, mi) in members.iter().enumerate() {
            let w: f64 = mi.base
                + members
                    .iter()
                    .enumerate()
                    .map(|(j, mj)| shares[i][j] * mj.loss.atoms()[idx[j]].0)
                    .sum::<f64>();
            out[i] += weight * mi.utility.v(w);
        }
        // Odometer over the joint support.
        let mut j = 0;
        loop {
            if j == members.len() {
                return Ok(out);
            }
            idx[j] += 1;
            if idx[j] < members[j].loss.len() {
                break;
            }
            idx[j] = 0;
            j += 1;
        }
    }
}

/// Monte-Carlo counterpart of [`pool_expected_utility`], one stream per
/// member.
pub fn pool_expected_utility_mc(
    members: &[PoolMember],
    shares: &[Vec<f64>],
    n_draws: u64,
    stream: SeededStream,
) -> Result<Vec<McEstimate>> {
    validate_shares(members.len(), shares)?;
    (0..members.len())
        .map(|i| {
            mc_estimate(
                |rng| {
                    let w = members[i].base
                        + members
                            .iter()
                            .enumerate()
                            .map(|(j, mj)| shares[i][j] * mj.loss.quantile_draw(rng.random()))
                            .sum::<f64>();
                    members[i].utility.v(w)
                },
                n_draws,
                stream.substream(stream.stream_id + i as u64),
            )
        })
        .collect()
}

/// Equal-share matrix for `n` members.
pub fn equal_shares(n: usize) -> Vec<Vec<f64>> {
    vec![vec![1.0 / n as f64; n]; n]
}

pub fn identity_shares(n: usize) -> Vec<Vec<f64>> {
    (0..n)
        .map(|i| (0..n).map(|j| if i == j { 1.0 } else { 0.0 }).collect())
        .collect()
}
