use proptest::prelude::*;

use guarantee_core::binom::BoundKind;
use guarantee_core::config::GridConfig;
use guarantee_core::grid::ProbGrid;
use guarantee_core::researchers::{
    ex1_mixture_alpha, ex2_actual_alpha, ex2_joint_fp, ex2_reject_prob, Conditioning, Ex2Design,
    Ex2Mixture, MixtureBelief,
};
use guarantee_core::sim::{mc_estimate, SeededStream};

fn coarse() -> GridConfig {
    GridConfig { sup_step: 1.0 / 128.0, refine_step: 1.0 / 2048.0, ..GridConfig::default() }
}

#[test]
fn joint_below_reject_exhaustive() {
    for n in [2, 5, 17, 50] {
        let design = Ex2Design::new(n, 0.05).unwrap();
        // Direct double enumeration over both arms.
        for &p in &[0.05, 0.3, 0.5, 0.8] {
            let p_c = 0.5;
            let (mut reject, mut joint) = (0.0, 0.0);
            let pt = guarantee_core::binom::binom_pmf_vec(n, p).unwrap();
            let pc = guarantee_core::binom::binom_pmf_vec(n, p_c).unwrap();
            for (xt, wt) in pt.iter().enumerate() {
                for (xc, wc) in pc.iter().enumerate() {
                    if design.rejects(xt as u64, xc as u64) {
                        reject += wt * wc;
                        if design.wald_bound(xt as u64) > p_c {
                            joint += wt * wc;
                        }
                    }
                }
            }
            assert!((ex2_reject_prob(p, p_c, n, 0.05).unwrap() - reject).abs() < 1e-12);
            assert!((ex2_joint_fp(p, p_c, n, 0.05).unwrap() - joint).abs() < 1e-12);
            assert!(joint <= reject + 1e-15);
        }
    }
    for &p in ProbGrid::open(0.0, 1.0, 1.0 / 32.0).points() {
        assert!(ex2_joint_fp(p, 0.5, 300, 0.05).unwrap() <= ex2_reject_prob(p, 0.5, 300, 0.05).unwrap() + 1e-15);
    }
}

#[test]
fn reject_prob_matches_simulation() {
    let design = Ex2Design::new(100, 0.05).unwrap();
    let (p, p_c) = (0.55, 0.5);
    let exact = ex2_reject_prob(p, p_c, 100, 0.05).unwrap();
    let est = mc_estimate(
        |r| if design.sample(p, p_c, r).unwrap().0 { 1.0 } else { 0.0 },
        1_000_000,
        SeededStream::new(77, 1),
    )
    .unwrap();
    assert!(est.agrees_with(exact, 4.0), "{est:?} vs {exact}");
}

#[test]
fn actual_alpha_nondecreasing_in_level() {
    let grids = coarse();
    for c in Conditioning::ALL {
        let belief = MixtureBelief::new(0.5, c).unwrap();
        let mut prev = 0.0;
        for a in [0.01, 0.025, 0.05, 0.1, 0.2] {
            let v = ex2_actual_alpha(a, 0.5, 300, belief, BoundKind::ClopperPearson, &grids).unwrap().value;
            assert!(v >= prev - 1e-12, "{c}: {a} gave {v} < {prev}");
            prev = v;
        }
    }
}

fn honest_and_mixed(c: Conditioning, a: f64) -> (f64, f64) {
    let grids = coarse();
    let run = |pi| {
        let belief = MixtureBelief::new(pi, c).unwrap();
        ex2_actual_alpha(a, 0.5, 300, belief, BoundKind::ClopperPearson, &grids).unwrap().value
    };
    (run(0.0), run(0.5))
}

#[test]
fn untruthful_weight_raises_conditional_alpha() {
    for c in [Conditioning::FixedWeightGivenPublished, Conditioning::BayesReweighted] {
        for a in [0.025, 0.05, 0.1] {
            let (v0, v1) = honest_and_mixed(c, a);
            assert!(v0 <= a, "{c}: honest population exceeds the nominal level");
            assert!(v1 >= v0, "{c} at {a}: {v1} < {v0}");
        }
    }
}

#[test]
fn joint_weighting_can_fall_below_honest() {
    // Unpublished selective studies count as non-implementations, so mixing
    // them in lowers the unconditional false-positive rate.
    let (v0, v1) = honest_and_mixed(Conditioning::JointUnconditional, 0.025);
    assert!(v0 <= 0.025);
    assert!(v1 < v0, "{v1} >= {v0}");
}

#[test]
fn sup_grid_must_stay_below_control() {
    let belief = MixtureBelief::new(0.5, Conditioning::JointUnconditional).unwrap();
    let mix = Ex2Mixture::new(0.05, 0.5, 50, belief, BoundKind::ClopperPearson).unwrap();
    assert!(mix.sup_on_grid(&ProbGrid::from_points(vec![0.2, 0.5])).is_err());
    assert!(mix.sup_on_grid(&ProbGrid::from_points(vec![0.2, 0.4])).is_ok());
}

proptest! {
    #[test]
    fn ex1_alpha_affine_and_increasing(a in 0.001..0.999f64, da in 0.0..0.3f64, pi in 0.0..1.0f64, dpi in 0.0..0.3f64) {
        let a2 = (a + da).min(0.999);
        let pi2 = (pi + dpi).min(1.0);
        let f = |a, pi| ex1_mixture_alpha(a, pi).unwrap();
        prop_assert!(f(a2, pi) >= f(a, pi) - 1e-15);
        prop_assert!(f(a, pi2) >= f(a, pi) - 1e-15);
        // Affine in a: the midpoint value is the average.
        let mid = 0.5 * (a + a2);
        prop_assert!((f(mid, pi) - 0.5 * (f(a, pi) + f(a2, pi))).abs() < 1e-13);
        prop_assert!((f(a, 1.0) - (0.5 + 0.5 * a)).abs() < 1e-15);
    }
}
