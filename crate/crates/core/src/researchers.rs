//! Publication strategies and the false-positive probability of the
//! published-bound mixture.
//!
//! Three researcher types publish a lower bound `L` or nothing:
//!
//! - **Truthful** always publishes a bound from a fixed procedure.
//! - **Fraudulent** guesses the threshold as `p0 ± δ` (each with probability
//!   ½) and publishes `max(L(x), guess)`.
//! - **Selective** runs a pooled two-sample z-test of treatment against
//!   control and, only on rejection, publishes the Wald bound for the
//!   treatment arm.

use rand::Rng;
use rand_distr::{Binomial, Distribution};
use serde::{Deserialize, Serialize};

use crate::binom::{binom_pmf_vec, normal_quantile, wald_with_z, BoundKind, BoundTable, LowerBoundProcedure};
use crate::config::GridConfig;
use crate::error::{check_open_unit, check_probability, domain};
use crate::grid::{grid_max, refined_sup, GridMax, ProbGrid};
use crate::{Error, Result};

/// Largest per-arm size for the two-arm enumeration.
pub const MAX_ARM_SIZE: u64 = 2000;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum Publication {
    Published(f64),
    NoPublication,
}

impl Publication {
    /// Whether the implementer's rule `L > p0` fires.
    pub fn exceeds(&self, p0: f64) -> bool {
        matches!(*self, Publication::Published(l) if l > p0)
    }
}

/// A finite law over publication events.
#[derive(Debug, Clone, PartialEq)]
pub struct PublicationLaw {
    pub atoms: Vec<(Publication, f64)>,
}

impl PublicationLaw {
    pub fn pr_exceeds(&self, p0: f64) -> f64 {
        self.atoms.iter().filter(|(e, _)| e.exceeds(p0)).map(|(_, w)| w).sum()
    }

    pub fn total_mass(&self) -> f64 {
        self.atoms.iter().map(|(_, w)| w).sum()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum ResearcherStrategy {
    Truthful {
        procedure: LowerBoundProcedure,
    },
    Ex1Fraud {
        procedure: LowerBoundProcedure,
        #[serde(default = "default_delta")]
        delta: f64,
    },
    Ex2Selective {
        n: u64,
        alpha_prime: f64,
        p_control: f64,
    },
}

fn default_delta() -> f64 {
    0.05
}

impl ResearcherStrategy {
    pub fn validate(&self) -> Result<()> {
        match self {
            ResearcherStrategy::Truthful { procedure } => procedure.validate(),
            ResearcherStrategy::Ex1Fraud { procedure, delta } => {
                procedure.validate()?;
                if !(*delta > 0.0 && *delta < 1.0) {
                    return domain(format!("guess spread {delta} must lie in (0, 1)"));
                }
                Ok(())
            }
            ResearcherStrategy::Ex2Selective { n, alpha_prime, p_control } => {
                Ex2Design::new(*n, *alpha_prime)?;
                check_probability("p_control", *p_control)
            }
        }
    }

    /// Exact law of the published bound when the true success rate is `p`
    /// and the implementer's threshold is `p0`.
    pub fn publication_law(&self, p: f64, p0: f64) -> Result<PublicationLaw> {
        check_probability("p", p)?;
        match self {
            ResearcherStrategy::Truthful { procedure } => {
                let table = procedure.table()?;
                let pmf = binom_pmf_vec(procedure.n, p)?;
                Ok(PublicationLaw {
                    atoms: table
                        .bounds()
                        .iter()
                        .zip(pmf)
                        .map(|(&l, w)| (Publication::Published(l), w))
                        .collect(),
                })
            }
            ResearcherStrategy::Ex1Fraud { procedure, delta } => {
                let table = procedure.table()?;
                let pmf = binom_pmf_vec(procedure.n, p)?;
                let mut atoms = Vec::with_capacity(2 * pmf.len());
                for guess in guesses(p0, *delta) {
                    for (&l, &w) in table.bounds().iter().zip(&pmf) {
                        atoms.push((Publication::Published(l.max(guess)), 0.5 * w));
                    }
                }
                Ok(PublicationLaw { atoms })
            }
            ResearcherStrategy::Ex2Selective { n, alpha_prime, p_control } => {
                let eval = Ex2Evaluator::new(Ex2Design::new(*n, *alpha_prime)?, *p_control)?;
                let pmf = binom_pmf_vec(*n, p)?;
                let mut published = 0.0;
                let mut atoms: Vec<_> = pmf
                    .iter()
                    .zip(&eval.reject_weight)
                    .zip(&eval.design.wald)
                    .map(|((&wt, &rw), &l)| {
                        published += wt * rw;
                        (Publication::Published(l), wt * rw)
                    })
                    .collect();
                atoms.push((Publication::NoPublication, (1.0 - published).max(0.0)));
                Ok(PublicationLaw { atoms })
            }
        }
    }

    /// `Pr(L > p0)` under `p`.
    pub fn pr_positive(&self, p: f64, p0: f64) -> Result<f64> {
        Ok(self.publication_law(p, p0)?.pr_exceeds(p0))
    }

    /// One draw of the publication event.
    pub fn sample<R: Rng + ?Sized>(&self, p: f64, p0: f64, rng: &mut R) -> Result<Publication> {
        match self {
            ResearcherStrategy::Truthful { procedure } => {
                let x = draw_binomial(procedure.n, p, rng)?;
                Ok(Publication::Published(procedure.bound(x)?))
            }
            ResearcherStrategy::Ex1Fraud { .. } => ex1_sample_published(self, p, p0, rng),
            ResearcherStrategy::Ex2Selective { n, alpha_prime, p_control } => {
                let design = Ex2Design::new(*n, *alpha_prime)?;
                let (reject, l) = design.sample(p, *p_control, rng)?;
                Ok(if reject { Publication::Published(l) } else { Publication::NoPublication })
            }
        }
    }
}

fn guesses(p0: f64, delta: f64) -> [f64; 2] {
    [(p0 - delta).clamp(0.0, 1.0), (p0 + delta).clamp(0.0, 1.0)]
}

fn draw_binomial<R: Rng + ?Sized>(n: u64, p: f64, rng: &mut R) -> Result<u64> {
    let dist = Binomial::new(n, p).map_err(|e| Error::Domain(e.to_string()))?;
    Ok(dist.sample(rng))
}

/// Implementer-facing false-positive probability when a share `π` of
/// researchers are fraudulent: `(1−π)α′ + π(½ + ½α′)`.
pub fn ex1_mixture_alpha(alpha_prime: f64, pi: f64) -> Result<f64> {
    check_open_unit("alpha_prime", alpha_prime)?;
    check_probability("pi", pi)?;
    Ok((1.0 - pi) * alpha_prime + pi * (0.5 + 0.5 * alpha_prime))
}

/// Draws a guess `p0 ± δ` and an outcome `x ~ Binomial(n, p)`, and reports
/// `max(L(x), guess)`.
pub fn ex1_sample_published<R: Rng + ?Sized>(
    strategy: &ResearcherStrategy,
    p: f64,
    p0: f64,
    rng: &mut R,
) -> Result<Publication> {
    let ResearcherStrategy::Ex1Fraud { procedure, delta } = strategy else {
        return domain("ex1_sample_published needs a fraudulent strategy");
    };
    let [low, high] = guesses(p0, *delta);
    let guess = if rng.random::<bool>() { high } else { low };
    let x = draw_binomial(procedure.n, p, rng)?;
    Ok(Publication::Published(procedure.bound(x)?.max(guess)))
}

/// The selective researcher's test and reporting rule for one `(n, α′)`.
#[derive(Debug, Clone)]
pub struct Ex2Design {
    pub n: u64,
    pub alpha_prime: f64,
    z: f64,
    /// Wald bound for each treatment count.
    wald: Vec<f64>,
}

impl Ex2Design {
    pub fn new(n: u64, alpha_prime: f64) -> Result<Self> {
        check_open_unit("alpha_prime", alpha_prime)?;
        if n < 2 {
            return domain("per-arm size must be at least 2");
        }
        if n > MAX_ARM_SIZE {
            return Err(Error::EnumerationLimit {
                size: ((n + 1) * (n + 1)) as usize,
                limit: ((MAX_ARM_SIZE + 1) * (MAX_ARM_SIZE + 1)) as usize,
            });
        }
        let z = normal_quantile(1.0 - alpha_prime)?;
        let wald = (0..=n).map(|x| wald_with_z(x, n, z)).collect();
        Ok(Self { n, alpha_prime, z, wald })
    }

    /// Pooled z-test; a zero pooled variance never rejects.
    pub fn rejects(&self, x_t: u64, x_c: u64) -> bool {
        let nf = self.n as f64;
        let (pt, pc) = (x_t as f64 / nf, x_c as f64 / nf);
        let pz = 0.5 * (pt + pc);
        let var = 2.0 * pz * (1.0 - pz) / nf;
        if var <= 0.0 {
            return false;
        }
        (pt - pc) / var.sqrt() >= self.z
    }

    pub fn wald_bound(&self, x_t: u64) -> f64 {
        self.wald[x_t as usize]
    }

    pub fn sample<R: Rng + ?Sized>(&self, p: f64, p_c: f64, rng: &mut R) -> Result<(bool, f64)> {
        let x_c = draw_binomial(self.n, p_c, rng)?;
        let x_t = draw_binomial(self.n, p, rng)?;
        Ok((self.rejects(x_t, x_c), self.wald_bound(x_t)))
    }
}

/// An [`Ex2Design`] with the control arm's law folded in: for every
/// treatment count, the probability over the control arm that the test
/// rejects.
#[derive(Debug, Clone)]
pub struct Ex2Evaluator {
    pub design: Ex2Design,
    pub p_control: f64,
    reject_weight: Vec<f64>,
}

impl Ex2Evaluator {
    pub fn new(design: Ex2Design, p_control: f64) -> Result<Self> {
        check_probability("p_control", p_control)?;
        let pmf_c = binom_pmf_vec(design.n, p_control)?;
        let reject_weight = (0..=design.n)
            .map(|x_t| {
                pmf_c
                    .iter()
                    .enumerate()
                    .filter(|(x_c, _)| design.rejects(x_t, *x_c as u64))
                    .map(|(_, w)| w)
                    .sum()
            })
            .collect();
        Ok(Self { design, p_control, reject_weight })
    }

    pub fn reject_prob(&self, p: f64) -> Result<f64> {
        let pmf = binom_pmf_vec(self.design.n, p)?;
        Ok(pmf.iter().zip(&self.reject_weight).map(|(a, b)| a * b).sum())
    }

    /// `Pr(reject ∧ L_W > threshold)`.
    pub fn joint_exceed(&self, p: f64, threshold: f64) -> Result<f64> {
        let pmf = binom_pmf_vec(self.design.n, p)?;
        Ok(pmf
            .iter()
            .zip(&self.reject_weight)
            .zip(&self.design.wald)
            .filter(|(_, &l)| l > threshold)
            .map(|((a, b), _)| a * b)
            .sum())
    }
}

/// Exact probability that the selective researcher's test rejects.
pub fn ex2_reject_prob(p: f64, p_c: f64, n: u64, alpha_prime: f64) -> Result<f64> {
    Ex2Evaluator::new(Ex2Design::new(n, alpha_prime)?, p_c)?.reject_prob(p)
}

/// Exact `Pr(reject ∧ L_W > p_C)`.
pub fn ex2_joint_fp(p: f64, p_c: f64, n: u64, alpha_prime: f64) -> Result<f64> {
    Ex2Evaluator::new(Ex2Design::new(n, alpha_prime)?, p_c)?.joint_exceed(p, p_c)
}

/// How the implementer's weight on the untruthful type interacts with
/// publication.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Conditioning {
    /// `π·Pr(L_W > p_C | reject) + (1−π)·Pr(L_T > p_C)`.
    FixedWeightGivenPublished,
    /// `π·Pr(reject ∧ L_W > p_C) + (1−π)·Pr(L_T > p_C)`.
    JointUnconditional,
    /// `Pr(L > p_C | published)` with the prior `π` updated by each type's
    /// publication probability.
    BayesReweighted,
}

impl Conditioning {
    pub const ALL: [Conditioning; 3] = [
        Conditioning::FixedWeightGivenPublished,
        Conditioning::JointUnconditional,
        Conditioning::BayesReweighted,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Conditioning::FixedWeightGivenPublished => "fixed_weight_given_published",
            Conditioning::JointUnconditional => "joint_unconditional",
            Conditioning::BayesReweighted => "bayes_reweighted",
        }
    }

    /// Mixture false-positive probability from its ingredients at one `p`.
    pub fn combine(&self, pi: f64, reject: f64, joint: f64, truthful: f64) -> f64 {
        match self {
            Conditioning::FixedWeightGivenPublished => {
                if reject > 0.0 {
                    pi * (joint / reject) + (1.0 - pi) * truthful
                } else {
                    (1.0 - pi) * truthful
                }
            }
            Conditioning::JointUnconditional => pi * joint + (1.0 - pi) * truthful,
            Conditioning::BayesReweighted => {
                let published = pi * reject + (1.0 - pi);
                if published > 0.0 {
                    (pi * joint + (1.0 - pi) * truthful) / published
                } else {
                    0.0
                }
            }
        }
    }
}

impl std::fmt::Display for Conditioning {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MixtureBelief {
    pub untruthful_weight: f64,
    pub conditioning: Conditioning,
}

impl MixtureBelief {
    pub fn new(untruthful_weight: f64, conditioning: Conditioning) -> Result<Self> {
        check_probability("untruthful_weight", untruthful_weight)?;
        Ok(Self { untruthful_weight, conditioning })
    }
}

/// Everything needed to evaluate the selective-vs-truthful mixture at any
/// `p` for one `(n, α′, p_C)`.
pub struct Ex2Mixture {
    eval: Ex2Evaluator,
    truthful: BoundTable,
    belief: MixtureBelief,
}

impl Ex2Mixture {
    pub fn new(
        alpha_prime: f64,
        p_c: f64,
        n: u64,
        belief: MixtureBelief,
        truthful: BoundKind,
    ) -> Result<Self> {
        check_open_unit("p_C", p_c)?;
        let eval = Ex2Evaluator::new(Ex2Design::new(n, alpha_prime)?, p_c)?;
        let truthful = LowerBoundProcedure::new(truthful, alpha_prime, n)?.table()?;
        Ok(Self { eval, truthful, belief })
    }

    pub fn components(&self, p: f64) -> Result<MixtureComponents> {
        let p_c = self.eval.p_control;
        let reject = self.eval.reject_prob(p)?;
        let joint = self.eval.joint_exceed(p, p_c)?;
        let truthful = self.truthful.exceed_prob(p_c, p)?;
        Ok(MixtureComponents { p, reject, joint, truthful })
    }

    pub fn alpha_at(&self, p: f64) -> Result<f64> {
        let c = self.components(p)?;
        Ok(self
            .belief
            .conditioning
            .combine(self.belief.untruthful_weight, c.reject, c.joint, c.truthful))
    }

    fn sup<F>(&self, f: F) -> Result<GridMax>
    where
        F: FnOnce(&(dyn Fn(f64) -> f64 + Sync)) -> Result<GridMax>,
    {
        let eval = |p: f64| self.alpha_at(p).unwrap_or(f64::NAN);
        let m = f(&eval)?;
        if m.value.is_nan() {
            return domain("mixture evaluation failed on the grid");
        }
        Ok(m)
    }

    /// Supremum over an explicit grid; every point must be below `p_C`.
    pub fn sup_on_grid(&self, grid: &ProbGrid) -> Result<GridMax> {
        if grid.is_empty() {
            return Err(Error::EmptyGrid);
        }
        if grid.points().iter().any(|&p| p >= self.eval.p_control || p < 0.0) {
            return domain("grid must lie in [0, p_C)");
        }
        self.sup(|f| grid_max(grid, f))
    }

    /// Supremum over `(0, p_C)` on the coarse grid plus local refinement.
    pub fn sup_refined(&self, grids: &GridConfig) -> Result<GridMax> {
        let p_c = self.eval.p_control;
        self.sup(|f| refined_sup(0.0, p_c, grids.sup_step, grids.refine_step, f))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MixtureComponents {
    pub p: f64,
    pub reject: f64,
    pub joint: f64,
    pub truthful: f64,
}

/// The implementer's actual false-positive probability
/// `sup_{p < p_C} Pr(L > p_C)` under the mixture, on the default refined grid.
pub fn ex2_actual_alpha(
    alpha_prime: f64,
    p_c: f64,
    n: u64,
    belief: MixtureBelief,
    truthful: BoundKind,
    grids: &GridConfig,
) -> Result<GridMax> {
    Ex2Mixture::new(alpha_prime, p_c, n, belief, truthful)?.sup_refined(grids)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Calibration {
    pub chosen: Conditioning,
    pub value: f64,
    pub target: f64,
    pub residual: f64,
    pub candidates: Vec<(Conditioning, f64)>,
    pub alpha_prime: f64,
    pub p_c: f64,
    pub n: u64,
    pub pi: f64,
}

/// Picks the conditioning variant whose actual α at the reference settings
/// is nearest the target.
pub fn calibrate_conditioning(
    alpha_prime: f64,
    p_c: f64,
    n: u64,
    pi: f64,
    target: f64,
    truthful: BoundKind,
    grids: &GridConfig,
) -> Result<Calibration> {
    let candidates = Conditioning::ALL
        .iter()
        .map(|&c| {
            let belief = MixtureBelief::new(pi, c)?;
            Ok((c, ex2_actual_alpha(alpha_prime, p_c, n, belief, truthful, grids)?.value))
        })
        .collect::<Result<Vec<_>>>()?;
    let &(chosen, value) = candidates
        .iter()
        .min_by(|a, b| (a.1 - target).abs().total_cmp(&(b.1 - target).abs()))
        .expect("three candidates");
    Ok(Calibration {
        chosen,
        value,
        target,
        residual: value - target,
        candidates,
        alpha_prime,
        p_c,
        n,
        pi,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Fig1Row {
    pub alpha_nominal: f64,
    pub alpha_actual: f64,
    pub p_c: f64,
    /// Conditioning name, or `identity` for the reference line.
    pub variant: String,
    pub n: u64,
    pub pi: f64,
    pub argmax_p: f64,
}

/// Actual versus nominal false-positive probability for one `p_C`, followed
/// by the identity reference line.
pub fn fig1_curve(
    p_c: f64,
    variant: Conditioning,
    alpha_grid: &[f64],
    n: u64,
    pi: f64,
    truthful: BoundKind,
    grids: &GridConfig,
) -> Result<Vec<Fig1Row>> {
    let belief = MixtureBelief::new(pi, variant)?;
    let mut rows = Vec::with_capacity(2 * alpha_grid.len());
    for &a in alpha_grid {
        let m = ex2_actual_alpha(a, p_c, n, belief, truthful, grids)?;
        rows.push(Fig1Row {
            alpha_nominal: a,
            alpha_actual: m.value,
            p_c,
            variant: variant.name().into(),
            n,
            pi,
            argmax_p: m.argmax,
        });
    }
    for &a in alpha_grid {
        rows.push(Fig1Row {
            alpha_nominal: a,
            alpha_actual: a,
            p_c,
            variant: "identity".into(),
            n,
            pi,
            argmax_p: f64::NAN,
        });
    }
    Ok(rows)
}
