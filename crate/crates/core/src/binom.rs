//! Exact binomial machinery and lower confidence bounds.
//!
//! Probabilities are evaluated with Loader's saddle-point form of the
//! binomial pmf, which works in log space through the Stirling error of
//! `ln Γ` and the deviance term `bd0`. Relative accuracy is close to machine
//! precision for every `n` this crate enumerates, with no underflow at
//! `n = 10⁴`.

use serde::{Deserialize, Serialize};

use crate::error::{check_open_unit, check_probability, domain};
use crate::grid::{grid_max, GridMax, ProbGrid};
use crate::{Error, Result};

/// Largest trial count accepted for exact enumeration.
pub const MAX_ENUMERATION: u64 = 10_000;

const LN_SQRT_2PI: f64 = 0.918_938_533_204_672_8;
const LN_2PI: f64 = 1.837_877_066_409_345_5;

/// `ln Γ(n+1) − (n+½)ln n + n − ln√(2π)` for n = 0..=15.
const STIRLERR_SMALL: [f64; 16] = [
    0.0,
    0.081_061_466_795_327_26,
    0.041_340_695_955_409_29,
    0.027_677_925_684_998_34,
    0.020_790_672_103_765_093,
    0.016_644_691_189_821_19,
    0.013_876_128_823_070_748,
    0.011_896_709_945_891_77,
    0.010_411_265_261_972_096,
    0.009_255_462_182_712_733,
    0.008_330_563_433_362_871,
    0.007_573_675_487_951_841,
    0.006_942_840_107_209_53,
    0.006_408_994_188_004_207,
    0.005_951_370_112_758_848,
    0.005_554_733_551_962_801,
];

/// Stirling error of `ln n!` for integer `n`.
fn stirlerr(n: f64) -> f64 {
    const S0: f64 = 1.0 / 12.0;
    const S1: f64 = 1.0 / 360.0;
    const S2: f64 = 1.0 / 1260.0;
    const S3: f64 = 1.0 / 1680.0;
    const S4: f64 = 1.0 / 1188.0;
    if n <= 15.0 {
        return STIRLERR_SMALL[n as usize];
    }
    let nn = n * n;
    if n > 500.0 {
        (S0 - S1 / nn) / n
    } else if n > 80.0 {
        (S0 - (S1 - S2 / nn) / nn) / n
    } else if n > 35.0 {
        (S0 - (S1 - (S2 - S3 / nn) / nn) / nn) / n
    } else {
        (S0 - (S1 - (S2 - (S3 - S4 / nn) / nn) / nn) / nn) / n
    }
}

/// Deviance term `x ln(x/np) + np − x`, summed as a series near `x = np`.
fn bd0(x: f64, np: f64) -> f64 {
    if (x - np).abs() < 0.1 * (x + np) {
        let mut v = (x - np) / (x + np);
        let mut s = (x - np) * v;
        let mut ej = 2.0 * x * v;
        v *= v;
        for j in 1..1000 {
            ej *= v;
            let s1 = s + ej / (2 * j + 1) as f64;
            if s1 == s {
                return s1;
            }
            s = s1;
        }
        s
    } else {
        x * (x / np).ln() + np - x
    }
}

fn pmf_raw(x: u64, n: u64, p: f64) -> f64 {
    let q = 1.0 - p;
    if p == 0.0 {
        return if x == 0 { 1.0 } else { 0.0 };
    }
    if q == 0.0 {
        return if x == n { 1.0 } else { 0.0 };
    }
    let nf = n as f64;
    if x == 0 {
        let lc = if p < 0.1 { -bd0(nf, nf * q) - nf * p } else { nf * q.ln() };
        return lc.exp();
    }
    if x == n {
        let lc = if q < 0.1 { -bd0(nf, nf * p) - nf * q } else { nf * p.ln() };
        return lc.exp();
    }
    let xf = x as f64;
    let lc = stirlerr(nf) - stirlerr(xf) - stirlerr(nf - xf) - bd0(xf, nf * p) - bd0(nf - xf, nf * q);
    let lf = LN_2PI + xf.ln() + (-xf / nf).ln_1p();
    (lc - 0.5 * lf).exp()
}

/// `C(n,x) p^x (1−p)^(n−x)`.
pub fn binom_pmf(n: u64, p: f64, x: u64) -> Result<f64> {
    check_probability("p", p)?;
    if x > n {
        return domain(format!("count {x} exceeds trial count {n}"));
    }
    Ok(pmf_raw(x, n, p))
}

/// The whole pmf `x = 0..=n` at once.
pub fn binom_pmf_vec(n: u64, p: f64) -> Result<Vec<f64>> {
    check_probability("p", p)?;
    Ok((0..=n).map(|x| pmf_raw(x, n, p)).collect())
}

/// `Pr(X ≥ x)` for `X ~ Binomial(n, p)`, summed from the upper tail.
pub fn binom_survival(n: u64, p: f64, x: u64) -> Result<f64> {
    check_probability("p", p)?;
    if x > n {
        return Ok(0.0);
    }
    Ok((x..=n).map(|k| pmf_raw(k, n, p)).sum::<f64>().min(1.0))
}

/// A binomial law with validated parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BinomialLaw {
    n: u64,
    p: f64,
}

impl BinomialLaw {
    pub fn new(n: u64, p: f64) -> Result<Self> {
        if n == 0 {
            return domain("binomial trial count must be positive");
        }
        check_probability("p", p)?;
        Ok(Self { n, p })
    }

    pub fn n(&self) -> u64 {
        self.n
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn pmf(&self, x: u64) -> f64 {
        if x > self.n {
            0.0
        } else {
            pmf_raw(x, self.n, self.p)
        }
    }

    pub fn pmf_vec(&self) -> Vec<f64> {
        (0..=self.n).map(|x| pmf_raw(x, self.n, self.p)).collect()
    }

    pub fn mean(&self) -> f64 {
        self.n as f64 * self.p
    }
}

/// Standard normal CDF (Hart's double-precision rational form, absolute
/// error below 1e-14).
pub fn normal_cdf(z: f64) -> f64 {
    let upper = normal_tail(z.abs());
    if z > 0.0 {
        1.0 - upper
    } else {
        upper
    }
}

/// `Pr(Z > x)` for `x ≥ 0`.
fn normal_tail(x: f64) -> f64 {
    if x > 37.0 {
        return 0.0;
    }
    let e = (-0.5 * x * x).exp();
    if x < 7.071_067_811_865_47 {
        let mut num = 3.526_249_659_989_11e-2 * x + 0.700_383_064_443_688;
        num = num * x + 6.373_962_203_531_65;
        num = num * x + 33.912_866_078_383;
        num = num * x + 112.079_291_497_871;
        num = num * x + 221.213_596_169_931;
        num = num * x + 220.206_867_912_376;
        let mut den = 8.838_834_764_831_84e-2 * x + 1.755_667_163_182_64;
        den = den * x + 16.064_177_579_207;
        den = den * x + 86.780_732_202_946_1;
        den = den * x + 296.564_248_779_674;
        den = den * x + 637.333_633_378_831;
        den = den * x + 793.826_512_519_948;
        den = den * x + 440.413_735_824_752;
        e * num / den
    } else {
        let mut b = x + 0.65;
        b = x + 4.0 / b;
        b = x + 3.0 / b;
        b = x + 2.0 / b;
        b = x + 1.0 / b;
        e / b / 2.506_628_274_631
    }
}

pub fn normal_pdf(z: f64) -> f64 {
    (-0.5 * z * z - LN_SQRT_2PI).exp()
}

/// Acklam's rational approximation to `Φ⁻¹`, relative error about 1e-9.
fn acklam(q: f64) -> f64 {
    const A: [f64; 6] = [
        -3.969_683_028_665_376e1,
        2.209_460_984_245_205e2,
        -2.759_285_104_469_687e2,
        1.383_577_518_672_69e2,
        -3.066_479_806_614_716e1,
        2.506_628_277_459_239,
    ];
    const B: [f64; 5] = [
        -5.447_609_879_822_406e1,
        1.615_858_368_580_409e2,
        -1.556_989_798_598_866e2,
        6.680_131_188_771_972e1,
        -1.328_068_155_288_572e1,
    ];
    const C: [f64; 6] = [
        -7.784_894_002_430_293e-3,
        -3.223_964_580_411_365e-1,
        -2.400_758_277_161_838,
        -2.549_732_539_343_734,
        4.374_664_141_464_968,
        2.938_163_982_698_783,
    ];
    const D: [f64; 4] = [
        7.784_695_709_041_462e-3,
        3.224_671_290_700_398e-1,
        2.445_134_137_142_996,
        3.754_408_661_907_416,
    ];
    const LOW: f64 = 0.02425;

    let tail = |r: f64| {
        let t = (-2.0 * r.ln()).sqrt();
        (((((C[0] * t + C[1]) * t + C[2]) * t + C[3]) * t + C[4]) * t + C[5])
            / ((((D[0] * t + D[1]) * t + D[2]) * t + D[3]) * t + 1.0)
    };
    if q < LOW {
        tail(q)
    } else if q > 1.0 - LOW {
        -tail(1.0 - q)
    } else {
        let t = q - 0.5;
        let r = t * t;
        (((((A[0] * r + A[1]) * r + A[2]) * r + A[3]) * r + A[4]) * r + A[5]) * t
            / (((((B[0] * r + B[1]) * r + B[2]) * r + B[3]) * r + B[4]) * r + 1.0)
    }
}

/// `Φ⁻¹(q)`: Acklam's approximation polished by one Halley step against
/// [`normal_cdf`], giving `|Φ(z) − q| ≤ 1e-9` across `(0, 1)`.
pub fn normal_quantile(q: f64) -> Result<f64> {
    check_open_unit("q", q)?;
    if q == 0.5 {
        return Ok(0.0);
    }
    let z = acklam(q);
    // Work in whichever tail is small to keep the residual exact.
    let e = if q < 0.5 {
        normal_tail(-z) - q
    } else {
        (1.0 - q) - normal_tail(z)
    };
    let u = e * (2.0 * std::f64::consts::PI).sqrt() * (0.5 * z * z).exp();
    Ok(z - u / (1.0 + z * u / 2.0))
}

/// Clopper–Pearson lower bound: 0 at `x = 0`, otherwise the `p` solving
/// `Pr(X ≥ x | n, p) = α′`, found by bisection.
pub fn cp_lower(x: u64, n: u64, alpha_prime: f64) -> Result<f64> {
    check_open_unit("alpha_prime", alpha_prime)?;
    if n == 0 || x > n {
        return domain(format!("count {x} with trial count {n}"));
    }
    if x == 0 {
        return Ok(0.0);
    }
    let (mut lo, mut hi) = (0.0_f64, 1.0_f64);
    while hi - lo > 1e-13 {
        let mid = 0.5 * (lo + hi);
        let s: f64 = (x..=n).map(|k| pmf_raw(k, n, mid)).sum();
        if s < alpha_prime {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Wald lower bound `p̂ − Φ⁻¹(1−α′)·√(p̂(1−p̂)/n)`, clamped to `[0, 1]`.
pub fn wald_lower(x: u64, n: u64, alpha_prime: f64) -> Result<f64> {
    check_open_unit("alpha_prime", alpha_prime)?;
    if n == 0 || x > n {
        return domain(format!("count {x} with trial count {n}"));
    }
    let z = normal_quantile(1.0 - alpha_prime)?;
    Ok(wald_with_z(x, n, z))
}

pub(crate) fn wald_with_z(x: u64, n: u64, z: f64) -> f64 {
    let nf = n as f64;
    let ph = x as f64 / nf;
    (ph - z * (ph * (1.0 - ph) / nf).sqrt()).clamp(0.0, 1.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundKind {
    ClopperPearson,
    Wald,
}

/// A rule mapping `(x, n, α′)` to a lower confidence bound.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LowerBoundProcedure {
    pub kind: BoundKind,
    pub nominal_alpha: f64,
    pub n: u64,
}

impl LowerBoundProcedure {
    pub fn new(kind: BoundKind, nominal_alpha: f64, n: u64) -> Result<Self> {
        let proc = Self { kind, nominal_alpha, n };
        proc.validate()?;
        Ok(proc)
    }

    pub fn clopper_pearson(nominal_alpha: f64, n: u64) -> Result<Self> {
        Self::new(BoundKind::ClopperPearson, nominal_alpha, n)
    }

    pub fn wald(nominal_alpha: f64, n: u64) -> Result<Self> {
        Self::new(BoundKind::Wald, nominal_alpha, n)
    }

    pub fn validate(&self) -> Result<()> {
        check_open_unit("nominal_alpha", self.nominal_alpha)?;
        if self.n == 0 || self.n > MAX_ENUMERATION {
            return domain(format!("sample size {} outside 1..={MAX_ENUMERATION}", self.n));
        }
        Ok(())
    }

    pub fn bound(&self, x: u64) -> Result<f64> {
        match self.kind {
            BoundKind::ClopperPearson => cp_lower(x, self.n, self.nominal_alpha),
            BoundKind::Wald => wald_lower(x, self.n, self.nominal_alpha),
        }
    }

    /// Bounds for every outcome `x = 0..=n`.
    pub fn table(&self) -> Result<BoundTable> {
        self.validate()?;
        let bounds = match self.kind {
            BoundKind::ClopperPearson => (0..=self.n)
                .map(|x| cp_lower(x, self.n, self.nominal_alpha))
                .collect::<Result<Vec<_>>>()?,
            BoundKind::Wald => {
                let z = normal_quantile(1.0 - self.nominal_alpha)?;
                (0..=self.n).map(|x| wald_with_z(x, self.n, z)).collect()
            }
        };
        Ok(BoundTable { n: self.n, bounds })
    }
}

/// Precomputed lower bounds `L(0), …, L(n)` for any procedure, including
/// ad-hoc ones.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundTable {
    n: u64,
    bounds: Vec<f64>,
}

impl BoundTable {
    pub fn from_fn(n: u64, f: impl Fn(u64) -> f64) -> Result<Self> {
        if n == 0 || n > MAX_ENUMERATION {
            return domain(format!("sample size {n} outside 1..={MAX_ENUMERATION}"));
        }
        let bounds: Vec<f64> = (0..=n).map(f).collect();
        if bounds.iter().any(|b| !(0.0..=1.0).contains(b)) {
            return domain("lower bounds must lie in [0, 1]");
        }
        Ok(Self { n, bounds })
    }

    pub fn constant(n: u64, value: f64) -> Result<Self> {
        Self::from_fn(n, |_| value)
    }

    pub fn n(&self) -> u64 {
        self.n
    }

    pub fn bounds(&self) -> &[f64] {
        &self.bounds
    }

    /// `Pr(L > threshold)` when the success probability is `p`. Ties count
    /// as not exceeding.
    pub fn exceed_prob(&self, threshold: f64, p: f64) -> Result<f64> {
        let pmf = binom_pmf_vec(self.n, p)?;
        Ok(self
            .bounds
            .iter()
            .zip(&pmf)
            .filter(|(&l, _)| l > threshold)
            .map(|(_, &w)| w)
            .sum())
    }
}

/// `Pr(L ≤ p)` under `p`, by exact enumeration over `x = 0..=n`.
pub fn exact_lower_coverage(table: &BoundTable, p: f64) -> Result<f64> {
    let pmf = binom_pmf_vec(table.n, p)?;
    Ok(table
        .bounds
        .iter()
        .zip(&pmf)
        .filter(|(&l, _)| l <= p)
        .map(|(_, &w)| w)
        .sum())
}

/// `max` over the grid of `Pr(L > p0)`. Every grid point must be below `p0`.
pub fn sup_false_positive(table: &BoundTable, p0: f64, grid: &ProbGrid) -> Result<GridMax> {
    check_open_unit("p0", p0)?;
    if grid.is_empty() {
        return Err(Error::EmptyGrid);
    }
    if grid.points().iter().any(|&p| p >= p0) {
        return domain("false-positive grid must lie strictly below p0");
    }
    grid_max(grid, |p| table.exceed_prob(p0, p).unwrap_or(f64::NAN))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CoverageRow {
    pub p: f64,
    /// `Pr(L ≤ p)`.
    pub coverage: f64,
    /// `Pr(L > t)` where `t` is the threshold, or `p` itself when none is given.
    pub violation: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CoverageReport {
    pub threshold: Option<f64>,
    pub rows: Vec<CoverageRow>,
}

impl CoverageReport {
    pub fn min_coverage(&self) -> Option<CoverageRow> {
        self.rows
            .iter()
            .copied()
            .min_by(|a, b| a.coverage.total_cmp(&b.coverage))
    }
}

/// Coverage and violation curves from one enumeration per grid point.
pub fn coverage_report(
    table: &BoundTable,
    grid: &ProbGrid,
    threshold: Option<f64>,
) -> Result<CoverageReport> {
    use rayon::prelude::*;
    let rows = grid
        .points()
        .par_iter()
        .map(|&p| {
            let pmf = binom_pmf_vec(table.n, p)?;
            let t = threshold.unwrap_or(p);
            let (mut coverage, mut violation) = (0.0, 0.0);
            for (&l, &w) in table.bounds.iter().zip(&pmf) {
                if l <= p {
                    coverage += w;
                }
                if l > t {
                    violation += w;
                }
            }
            Ok(CoverageRow { p, coverage, violation })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(CoverageReport { threshold, rows })
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_bigint::BigUint;

    fn rel(a: f64, b: f64) -> f64 {
        ((a - b) / b).abs()
    }

    #[test]
    fn pmf_trivial_cases() {
        assert_eq!(binom_pmf(1, 0.5, 1).unwrap(), 0.5);
        assert_eq!(binom_pmf(300, 0.0, 0).unwrap(), 1.0);
        assert_eq!(binom_pmf(300, 1.0, 300).unwrap(), 1.0);
        assert_eq!(binom_pmf(300, 1.0, 3).unwrap(), 0.0);
    }

    #[test]
    fn pmf_domain_errors() {
        assert!(binom_pmf(3, 0.5, 4).is_err());
        assert!(binom_pmf(3, 1.5, 1).is_err());
        assert!(binom_pmf(3, -0.1, 1).is_err());
    }

    /// `C(n, k) / 2^n` from exact integer arithmetic.
    fn bignum_half_pmf(n: u64, k: u64) -> f64 {
        let mut c = BigUint::from(1u32);
        for i in 0..k {
            c = c * BigUint::from(n - i) / BigUint::from(i + 1);
        }
        // Keep 60 significant bits, then rescale.
        let bits = c.bits();
        let shift = bits.saturating_sub(60);
        let top: u64 = (c >> shift).try_into().unwrap();
        top as f64 * 2f64.powi(shift as i32 - n as i32)
    }

    #[test]
    fn pmf_matches_bignum_oracle() {
        let oracle = bignum_half_pmf(300, 150);
        let got = binom_pmf(300, 0.5, 150).unwrap();
        assert!(rel(got, oracle) < 1e-12, "{got} vs {oracle}");
        for k in [0, 1, 7, 90, 151, 299] {
            let oracle = bignum_half_pmf(300, k);
            let got = binom_pmf(300, 0.5, k).unwrap();
            assert!(rel(got, oracle) < 1e-12, "k={k}: {got} vs {oracle}");
        }
    }

    #[test]
    fn pmf_sums_to_one() {
        for n in [1u64, 10, 300, 1000] {
            for p in [0.0, 0.001, 0.5, 0.999, 1.0] {
                let s: f64 = binom_pmf_vec(n, p).unwrap().iter().sum();
                assert!((s - 1.0).abs() < 1e-12, "n={n} p={p} sum={s}");
            }
        }
    }

    #[test]
    fn pmf_no_underflow_at_ten_thousand() {
        let v = binom_pmf(10_000, 0.3, 3000).unwrap();
        assert!(v > 0.0 && v.is_finite());
        let s: f64 = binom_pmf_vec(10_000, 0.3).unwrap().iter().sum();
        assert!((s - 1.0).abs() < 1e-11);
    }

    #[test]
    fn quantile_known_values() {
        assert_eq!(normal_quantile(0.5).unwrap(), 0.0);
        // 40-digit inverse-error-function values.
        assert!((normal_quantile(0.95).unwrap() - 1.644_853_626_951_472_7).abs() < 1e-9);
        assert!((normal_quantile(0.975).unwrap() - 1.959_963_984_540_054_2).abs() < 1e-9);
        assert!((normal_quantile(0.999).unwrap() - 3.090_232_306_167_813_5).abs() < 1e-9);
        assert!((normal_quantile(1e-10).unwrap() + 6.361_340_902_404_056).abs() < 1e-8);
    }

    #[test]
    fn quantile_domain() {
        assert!(normal_quantile(0.0).is_err());
        assert!(normal_quantile(1.0).is_err());
    }

    #[test]
    fn quantile_inverts_cdf() {
        let mut q = 1e-8;
        while q < 1.0 {
            let z = normal_quantile(q).unwrap();
            assert!((normal_cdf(z) - q).abs() <= 1e-9, "q={q}");
            q += 0.000_731;
        }
    }

    #[test]
    fn cp_edges() {
        assert_eq!(cp_lower(0, 300, 0.05).unwrap(), 0.0);
        let top = cp_lower(300, 300, 0.05).unwrap();
        assert!((top - 0.05f64.powf(1.0 / 300.0)).abs() < 1e-10);
    }

    /// Independent bisection against a survival function built from
    /// bignum binomial coefficients at the solved point.
    #[test]
    fn cp_middle_matches_bisection_oracle() {
        fn survival(n: u64, x: u64, p: f64) -> f64 {
            // Direct product form with running binomial coefficient in f64 logs.
            let mut total = 0.0;
            for k in x..=n {
                let mut lc = 0.0;
                for i in 0..k {
                    lc += ((n - i) as f64).ln() - ((i + 1) as f64).ln();
                }
                total += (lc + k as f64 * p.ln() + (n - k) as f64 * (1.0 - p).ln()).exp();
            }
            total
        }
        let (mut lo, mut hi) = (0.0, 1.0);
        for _ in 0..60 {
            let mid = 0.5 * (lo + hi);
            if survival(300, 150, mid) < 0.05 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let got = cp_lower(150, 300, 0.05).unwrap();
        assert!((got - 0.5 * (lo + hi)).abs() < 1e-10, "{got} vs {lo}");
    }

    #[test]
    fn wald_examples() {
        assert_eq!(wald_lower(0, 300, 0.05).unwrap(), 0.0);
        assert_eq!(wald_lower(300, 300, 0.05).unwrap(), 1.0);
        let expect = 0.55 - 1.644_853_626_951_472_7 * (0.55f64 * 0.45 / 300.0).sqrt();
        assert!((wald_lower(165, 300, 0.05).unwrap() - expect).abs() < 1e-12);
        assert!((expect - 0.50276).abs() < 1e-5);
    }

    #[test]
    fn clopper_pearson_covers() {
        let table = LowerBoundProcedure::clopper_pearson(0.05, 300).unwrap().table().unwrap();
        for p in ProbGrid::closed(0.0, 1.0, 1.0 / 64.0).points() {
            assert!(exact_lower_coverage(&table, *p).unwrap() >= 0.95);
        }
    }

    #[test]
    fn wald_has_coverage_witness() {
        let table = LowerBoundProcedure::wald(0.05, 300).unwrap().table().unwrap();
        let grid = ProbGrid::open(0.0, 1.0, 1.0 / 1024.0);
        let worst = coverage_report(&table, &grid, None).unwrap().min_coverage().unwrap();
        assert!(worst.coverage < 0.95, "{worst:?}");
    }

    #[test]
    fn vacuous_and_always_positive_bounds() {
        let zero = BoundTable::constant(50, 0.0).unwrap();
        for p in [0.0, 0.2, 0.7, 1.0] {
            assert!((exact_lower_coverage(&zero, p).unwrap() - 1.0).abs() < 1e-12);
        }
        let one = BoundTable::constant(50, 1.0).unwrap();
        let sup = sup_false_positive(&one, 0.5, &ProbGrid::open(0.0, 0.5, 0.01)).unwrap();
        assert!((sup.value - 1.0).abs() < 1e-12);
    }

    #[test]
    fn sup_false_positive_checks_grid() {
        let t = BoundTable::constant(10, 0.0).unwrap();
        assert_eq!(
            sup_false_positive(&t, 0.5, &ProbGrid::from_points(vec![])),
            Err(Error::EmptyGrid)
        );
        assert!(sup_false_positive(&t, 0.5, &ProbGrid::from_points(vec![0.6])).is_err());
    }

    #[test]
    fn cp_sup_respects_nominal() {
        let t = LowerBoundProcedure::clopper_pearson(0.05, 300).unwrap().table().unwrap();
        for p0 in [0.1, 0.5, 0.8] {
            let s = sup_false_positive(&t, p0, &ProbGrid::open(0.0, p0, 1.0 / 256.0)).unwrap();
            assert!(s.value <= 0.05, "p0={p0} {s:?}");
        }
    }

    #[test]
    fn coverage_and_miss_partition_mass() {
        let t = LowerBoundProcedure::wald(0.1, 40).unwrap().table().unwrap();
        let r = coverage_report(&t, &ProbGrid::closed(0.0, 1.0, 0.05), None).unwrap();
        for row in r.rows {
            assert!((row.coverage + row.violation - 1.0).abs() < 1e-12);
        }
    }
}
