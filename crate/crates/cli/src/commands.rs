//! Subcommand bodies. Each writes its files through [`OutDir`] and prints a
//! short summary to stdout.

use anyhow::{bail, Result};
use serde::Serialize;

use guarantee_core::binom::{coverage_report, BoundKind, LowerBoundProcedure};
use guarantee_core::contracts::{implementer_payoff, minimal_insurance, researcher_payment, InsuranceContract};
use guarantee_core::grid::ProbGrid;
use guarantee_core::implementer::{decide_no_guarantee, decide_with_contract, AlphaBelief, Decision, ImplementerPolicy};
use guarantee_core::researcher::{
    equal_shares, expected_utility, fp_and_power_conditions, participation_check, pool_expected_utility,
    pool_expected_utility_mc, researcher_world, sample_world, PoolMember, ResearcherProfile,
};
use guarantee_core::researchers::{
    calibrate_conditioning, ex1_mixture_alpha, fig1_curve, Calibration, Conditioning, Ex2Mixture, MixtureBelief,
};
use guarantee_core::sim::{mc_estimate, McEstimate, SeededStream};

use crate::output::{trim, Meta, OutDir};
use crate::scenario::Scenario;

/// Everything a subcommand needs: the scenario, the Figure-1 variant and
/// the output directory.
pub struct Ctx {
    pub scenario: Scenario,
    pub variant: Conditioning,
    pub calibration: Option<Calibration>,
    pub out: OutDir,
}

impl Ctx {
    pub fn new(scenario: Scenario, out_dir: &std::path::Path) -> Result<Self> {
        let f = &scenario.figure;
        let (variant, calibration, source) = match f.variant {
            Some(v) => (v, None, "configured"),
            None => {
                let cal = calibrate_conditioning(
                    f.calibration_alpha,
                    f.calibration_p_c,
                    f.n,
                    f.pi,
                    f.target_alpha,
                    f.truthful,
                    &scenario.grids,
                )?;
                (cal.chosen, Some(cal), "calibrated")
            }
        };
        let g = &scenario.grids;
        let meta = Meta {
            tool: "guarantee",
            version: env!("CARGO_PKG_VERSION"),
            seed: scenario.seed,
            mc_draws: scenario.mc_draws,
            coverage_step: g.coverage_step,
            sup_step: g.sup_step,
            refine_step: g.refine_step,
            variant: variant.name().into(),
            variant_source: source,
        };
        let out = OutDir::create(out_dir, meta)?;
        Ok(Self { scenario, variant, calibration, out })
    }

    fn stream(&self, id: u64) -> SeededStream {
        SeededStream::new(self.scenario.seed, id)
    }
}

pub fn coverage(ctx: &Ctx, kind: BoundKind, n: u64, alpha_prime: f64) -> Result<()> {
    let table = LowerBoundProcedure::new(kind, alpha_prime, n)?.table()?;
    let grid = ProbGrid::open(0.0, 1.0, ctx.scenario.grids.coverage_step);
    let report = coverage_report(&table, &grid, None)?;
    let path = ctx.out.csv("coverage.csv", &report.rows)?;
    let worst = report.min_coverage().expect("non-empty grid");
    let below = report.rows.iter().filter(|r| r.coverage < 1.0 - alpha_prime).count();
    println!(
        "min coverage {:.6} at p = {} ({below} of {} grid points below {})",
        worst.coverage,
        worst.p,
        report.rows.len(),
        trim(1.0 - alpha_prime)
    );
    println!("wrote {}", path.display());
    Ok(())
}

#[derive(Serialize)]
struct AlphaRow {
    alpha_nominal: f64,
    alpha_actual: f64,
    pi: f64,
}

#[derive(Serialize)]
struct ScaleRow {
    alpha_nominal: f64,
    alpha_actual: f64,
    u_bar: f64,
    max_scale: usize,
    cost_ratio: f64,
}

pub fn example1(ctx: &Ctx, alpha_prime: f64, pi: f64) -> Result<()> {
    let alpha = ex1_mixture_alpha(alpha_prime, pi)?;
    println!("{}", trim(alpha));
    let s = &ctx.scenario;
    let mut levels = s.figure.alpha_grid.clone();
    if !levels.contains(&alpha_prime) {
        levels.push(alpha_prime);
        levels.sort_by(f64::total_cmp);
    }
    let econ = &s.economics;
    let u_bar = s.belief.implementer.u_bar;
    let c_big = econ.costs.full_cost();
    let mut line = Vec::new();
    let mut scale = Vec::new();
    for &a in &levels {
        let actual = ex1_mixture_alpha(a, pi)?;
        line.push(AlphaRow { alpha_nominal: a, alpha_actual: actual, pi });
        let m = econ.max_scale_under_bound(actual, u_bar)?;
        let cost_ratio = if m == 0 { 0.0 } else { econ.cost(m)? / c_big };
        scale.push(ScaleRow { alpha_nominal: a, alpha_actual: actual, u_bar, max_scale: m, cost_ratio });
    }
    ctx.out.csv("example1_alpha.csv", &line)?;
    ctx.out.csv("example1_scale.csv", &scale)?;
    let m = econ.max_scale_under_bound(alpha, u_bar)?;
    println!("max scale {m} of {} under u_bar = {}", econ.population(), trim(u_bar));
    Ok(())
}

#[derive(Serialize)]
struct SurfaceRow {
    alpha_prime: f64,
    p: f64,
    reject: f64,
    joint: f64,
    truthful: f64,
    fixed_weight_given_published: f64,
    joint_unconditional: f64,
    bayes_reweighted: f64,
}

#[derive(Serialize)]
struct SupRow {
    alpha_prime: f64,
    variant: &'static str,
    alpha_actual: f64,
    argmax_p: f64,
}

pub fn example2(ctx: &Ctx, n: u64, pi: f64, p_c: f64, levels: &[f64]) -> Result<()> {
    let s = &ctx.scenario;
    let grid = ProbGrid::open(0.0, p_c, s.grids.sup_step);
    let mut surface = Vec::new();
    let mut sups = Vec::new();
    for &a in levels {
        let mixtures = Conditioning::ALL
            .iter()
            .map(|&c| Ex2Mixture::new(a, p_c, n, MixtureBelief::new(pi, c)?, s.figure.truthful))
            .collect::<Result<Vec<_>, _>>()?;
        for &p in grid.points() {
            let c = mixtures[0].components(p)?;
            let alphas = mixtures.iter().map(|m| m.alpha_at(p)).collect::<Result<Vec<_>, _>>()?;
            surface.push(SurfaceRow {
                alpha_prime: a,
                p,
                reject: c.reject,
                joint: c.joint,
                truthful: c.truthful,
                fixed_weight_given_published: alphas[0],
                joint_unconditional: alphas[1],
                bayes_reweighted: alphas[2],
            });
        }
        for (m, c) in mixtures.iter().zip(Conditioning::ALL) {
            let sup = m.sup_refined(&s.grids)?;
            sups.push(SupRow { alpha_prime: a, variant: c.name(), alpha_actual: sup.value, argmax_p: sup.argmax });
        }
    }
    ctx.out.csv("example2_surface.csv", &surface)?;
    ctx.out.csv("example2_sup.csv", &sups)?;
    for r in &sups {
        println!("alpha' = {} {:<30} actual {:.4} at p = {:.4}", trim(r.alpha_prime), r.variant, r.alpha_actual, r.argmax_p);
    }
    Ok(())
}

#[derive(Serialize)]
struct Fig1Csv {
    alpha_nominal: f64,
    alpha_actual: f64,
    #[serde(rename = "p_C")]
    p_c: f64,
    variant: String,
    n: u64,
    pi: f64,
}

#[derive(Serialize)]
struct Fig1Sidecar<'a> {
    variant: &'static str,
    calibration: Option<&'a Calibration>,
    argmax: Vec<(f64, f64, f64)>,
}

pub fn fig1(ctx: &Ctx, p_cs: &[f64], n: u64, pi: f64) -> Result<()> {
    let s = &ctx.scenario;
    let mut rows = Vec::new();
    let mut argmax = Vec::new();
    for &p_c in p_cs {
        for r in fig1_curve(p_c, ctx.variant, &s.figure.alpha_grid, n, pi, s.figure.truthful, &s.grids)? {
            if r.variant != "identity" {
                argmax.push((r.p_c, r.alpha_nominal, r.argmax_p));
            }
            rows.push(Fig1Csv {
                alpha_nominal: r.alpha_nominal,
                alpha_actual: r.alpha_actual,
                p_c: r.p_c,
                variant: r.variant,
                n: r.n,
                pi: r.pi,
            });
        }
    }
    let path = ctx.out.csv("fig1.csv", &rows)?;
    ctx.out.json(
        "fig1_calibration.json",
        &Fig1Sidecar { variant: ctx.variant.name(), calibration: ctx.calibration.as_ref(), argmax },
    )?;
    if let Some(c) = &ctx.calibration {
        println!("calibrated variant {} (actual {:.4} vs target {}, residual {:+.4})", c.chosen, c.value, trim(c.target), c.residual);
    }
    for r in rows.iter().filter(|r| r.variant != "identity" && (r.alpha_nominal - 0.05).abs() < 1e-12) {
        println!("p_C = {}: actual {:.4} at nominal 0.05", trim(r.p_c), r.alpha_actual);
    }
    println!("wrote {}", path.display());
    Ok(())
}

#[derive(Serialize)]
struct DecisionReport {
    published_l: f64,
    policy: ImplementerPolicy,
    break_even_p0: Option<f64>,
    no_guarantee: Decision,
    contract: Option<InsuranceContract>,
    with_contract: Option<Decision>,
}

pub fn decide(ctx: &Ctx) -> Result<()> {
    let s = &ctx.scenario;
    let policy = &s.belief.implementer;
    let l = s.belief.published_l;
    let no_guarantee = decide_no_guarantee(l, policy, &s.economics)?;
    let with_contract = s
        .contract
        .as_ref()
        .map(|c| decide_with_contract(l, c, policy, &s.economics))
        .transpose()?;
    let report = DecisionReport {
        published_l: l,
        policy: policy.clone(),
        break_even_p0: s.economics.break_even_p0(s.grids.root_tol).ok(),
        no_guarantee,
        contract: s.contract,
        with_contract,
    };
    ctx.out.json("decision.json", &report)?;
    print_decision("no guarantee", &no_guarantee);
    if let (Some(c), Some(d)) = (&s.contract, &with_contract) {
        print_decision(&c.label(), d);
    }
    Ok(())
}

fn print_decision(label: &str, d: &Decision) {
    if d.implement {
        println!("{label}: implement at m = {} (worst-case value {})", d.scale, trim(d.bound));
    } else {
        println!("{label}: do not implement");
    }
}

#[derive(Serialize)]
struct PayoffRow {
    contract: String,
    x: usize,
    y: f64,
    implementer_payoff: f64,
    researcher_payment: f64,
}

#[derive(Serialize)]
struct MinimalReport {
    u_bar: f64,
    c_m: f64,
    k: f64,
    s: f64,
    retained_share: f64,
    tail_decision: Decision,
    proportional_decision: Decision,
}

pub fn contract(ctx: &Ctx) -> Result<()> {
    let s = &ctx.scenario;
    let econ = &s.economics;
    let big_m = econ.population();
    let c_big = econ.costs.full_cost();
    let u_bar = s.belief.implementer.u_bar;
    let mi = minimal_insurance(u_bar, c_big)?;
    let mut contracts = vec![InsuranceContract::Full, mi.tail(), mi.proportional()];
    if let Some(c) = s.contract {
        if !contracts.contains(&c) {
            contracts.push(c);
        }
    }
    let mut rows = Vec::new();
    for c in &contracts {
        for x in 0..=big_m {
            let y = econ.net(big_m, x)?;
            rows.push(PayoffRow {
                contract: c.label(),
                x,
                y,
                implementer_payoff: implementer_payoff(y, c),
                researcher_payment: researcher_payment(y, c),
            });
        }
    }
    ctx.out.csv("contract_payoffs.csv", &rows)?;
    // Acceptance is judged with no information about α.
    let blind = ImplementerPolicy { alpha_belief: AlphaBelief::Unknown, ..s.belief.implementer.clone() };
    let l = 1.0;
    let report = MinimalReport {
        u_bar,
        c_m: c_big,
        k: mi.k,
        s: mi.s,
        retained_share: mi.retained_share,
        tail_decision: decide_with_contract(l, &mi.tail(), &blind, econ)?,
        proportional_decision: decide_with_contract(l, &mi.proportional(), &blind, econ)?,
    };
    ctx.out.json("minimal_insurance.json", &report)?;
    println!("minimal tail k = {}, minimal proportional s = {} (implementer keeps {})", trim(mi.k), trim(mi.s), trim(mi.retained_share));
    print_decision(&mi.tail().label(), &report.tail_decision);
    print_decision(&mi.proportional().label(), &report.proportional_decision);
    Ok(())
}

#[derive(Serialize)]
struct ResearcherCsv {
    p: f64,
    lhs: f64,
    bound_type: &'static str,
    bound: Option<f64>,
    actual: f64,
}

#[derive(Serialize)]
struct McCheck {
    p: f64,
    exact: f64,
    mc: McEstimate,
    z: f64,
}

#[derive(Serialize)]
struct ResearcherSummary {
    min_lhs: f64,
    argmin_p: f64,
    v_bar: f64,
    participation: bool,
    any_violation: bool,
    mc_check: McCheck,
}

pub fn researcher(ctx: &Ctx) -> Result<()> {
    let s = &ctx.scenario;
    let r = &s.researcher;
    let profile = ResearcherProfile {
        publication: s.strategy.clone(),
        risk: r.risk.clone(),
        payoff: r.payoff.clone(),
        utility: s.utility,
        scale: r.scale,
    };
    let econ = &s.economics;
    let p0 = s.belief.implementer.p0;
    let grid = ProbGrid::closed(0.0, 1.0, r.p_step);
    let part = participation_check(&profile, econ, &grid, p0)?;
    let cond = fp_and_power_conditions(&profile, econ, &grid, p0)?;
    let rows: Vec<_> = cond
        .rows
        .iter()
        .map(|c| ResearcherCsv { p: c.p, lhs: c.lhs, bound_type: c.bound_type.name(), bound: c.bound, actual: c.actual })
        .collect();
    ctx.out.csv("researcher.csv", &rows)?;

    let p = r.mc_check_p;
    let world = researcher_world(&r.risk, &r.payoff, r.scale, econ, p)?;
    let exact = expected_utility(&world, &s.utility);
    let mut failure = None;
    let mc = mc_estimate(
        |rng| match sample_world(&r.risk, &r.payoff, r.scale, econ, p, rng) {
            Ok(w) => s.utility.v(w),
            Err(e) => {
                failure.get_or_insert(e);
                f64::NAN
            }
        },
        s.mc_draws,
        ctx.stream(1),
    )?;
    if let Some(e) = failure {
        bail!(e);
    }
    let summary = ResearcherSummary {
        min_lhs: part.min_lhs,
        argmin_p: part.argmin_p,
        v_bar: part.v_bar,
        participation: part.pass,
        any_violation: cond.any_violation,
        mc_check: McCheck { p, exact, z: mc.z_score(exact), mc },
    };
    ctx.out.json("researcher.json", &summary)?;
    println!(
        "participation {}: min {:.6} at p = {} vs v_bar = {}",
        if part.pass { "holds" } else { "fails" },
        part.min_lhs,
        trim(part.argmin_p),
        trim(part.v_bar)
    );
    println!(
        "E v(W) at p = {}: exact {:.6}, simulated {:.6} (se {:.2e}, {} draws)",
        trim(p),
        exact,
        mc.mean,
        mc.std_error,
        mc.n_draws
    );
    Ok(())
}

#[derive(Serialize)]
struct PoolRow {
    size: usize,
    expected_utility: f64,
    certainty_equivalent: f64,
    standalone_utility: f64,
    mc_mean: f64,
    mc_std_error: f64,
    n_draws: u64,
}

pub fn pool(ctx: &Ctx) -> Result<()> {
    let s = &ctx.scenario;
    let member = PoolMember { base: s.pool.base, loss: s.pool.loss.clone(), utility: s.utility };
    let standalone = expected_utility(&member.loss.map(|z| member.base + z), &s.utility);
    let mut rows = Vec::new();
    for (i, &j) in s.pool.sizes.iter().enumerate() {
        let members = vec![member.clone(); j];
        let shares = equal_shares(j);
        let eu = pool_expected_utility(&members, &shares)?[0];
        let mc = pool_expected_utility_mc(&members, &shares, s.mc_draws, ctx.stream(100 * (i as u64 + 1)))?[0];
        rows.push(PoolRow {
            size: j,
            expected_utility: eu,
            certainty_equivalent: s.utility.v_inv(eu),
            standalone_utility: standalone,
            mc_mean: mc.mean,
            mc_std_error: mc.std_error,
            n_draws: mc.n_draws,
        });
    }
    ctx.out.csv("pool.csv", &rows)?;
    for r in &rows {
        println!(
            "J = {}: E v = {:.6} (simulated {:.6}, se {:.2e}), certainty equivalent {:.6}",
            r.size, r.expected_utility, r.mc_mean, r.mc_std_error, r.certainty_equivalent
        );
    }
    Ok(())
}
