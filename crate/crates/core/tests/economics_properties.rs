use proptest::prelude::*;

use guarantee_core::economics::{BenefitFunction, CostSchedule, PolicyEconomics};

fn affine(m: usize, fixed: f64, unit: f64, beta: f64, q: f64) -> PolicyEconomics {
    PolicyEconomics::new(CostSchedule::affine(m, fixed, unit), BenefitFunction::Linear { beta }, q).unwrap()
}

#[test]
fn linear_break_even_scales_with_dilution() {
    let base = affine(50, 0.0, 1.0, 4.0, 1.0).break_even_p0(1e-12).unwrap();
    for q in [0.9, 0.5, 0.25] {
        let diluted = affine(50, 0.0, 1.0, 4.0, q).break_even_p0(1e-12).unwrap();
        if base <= q {
            assert!((diluted - base / q).abs() < 1e-9, "q={q}");
        }
    }
}

#[test]
fn table_benefit_break_even_residual() {
    let benefits: Vec<f64> = (0..=12).map(|x| (x as f64).powf(1.3)).collect();
    let e = PolicyEconomics::new(CostSchedule::linear(12, 1.5), BenefitFunction::Table { benefits }, 1.0).unwrap();
    let p0 = e.break_even_p0(1e-12).unwrap();
    assert!(e.expected_net(12, p0).unwrap().abs() <= 1e-6 * e.costs.full_cost());
}

proptest! {
    #[test]
    fn break_even_residual(m in 1usize..500, fixed in 0.0..20.0f64, unit in 0.1..5.0f64, beta_mult in 1.05..10.0f64) {
        let c_big = fixed + unit * m as f64;
        let beta = beta_mult * c_big / m as f64;
        let e = affine(m, fixed, unit, beta, 1.0);
        let p0 = e.break_even_p0(1e-12).unwrap();
        prop_assert!(e.expected_net(m, p0).unwrap().abs() <= 1e-6 * c_big);
    }

    #[test]
    fn expected_net_increasing_in_p(m in 1usize..300, beta in 0.1..10.0f64, lo in 0.0..0.99f64, gap in 0.001..0.5f64) {
        let e = affine(m, 1.0, 1.0, beta, 1.0);
        let hi = (lo + gap).min(1.0);
        let k = 1 + m / 2;
        prop_assert!(e.expected_net(k, hi).unwrap() > e.expected_net(k, lo).unwrap());
    }

    #[test]
    fn max_scale_monotone(m in 1usize..2000, a1 in 0.0..1.0f64, a2 in 0.0..1.0f64, u1 in 0.001..0.9f64, u2 in 0.001..0.9f64) {
        let e = affine(m, 0.0, 1.0, 3.0, 1.0);
        let c = e.costs.full_cost();
        let (alo, ahi) = if a1 <= a2 { (a1, a2) } else { (a2, a1) };
        let (ulo, uhi) = if u1 <= u2 { (-u2 * c, -u1 * c) } else { (-u1 * c, -u2 * c) };
        prop_assert!(e.max_scale_under_bound(ahi, ulo).unwrap() <= e.max_scale_under_bound(alo, ulo).unwrap());
        prop_assert!(e.max_scale_under_bound(alo, uhi).unwrap() <= e.max_scale_under_bound(alo, ulo).unwrap());
    }
}
