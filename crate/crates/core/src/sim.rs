//! Seeded randomness, Monte-Carlo estimates and exact enumeration.
//!
//! Streams are ChaCha8 generators keyed by `(seed, stream_id)`: the seed sets
//! the key and the stream id selects one of 2⁶⁴ independent counter-based
//! substreams. A grid point, a worker or a test can own its own stream and
//! results never depend on scheduling.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::binom::{binom_pmf_vec, MAX_ENUMERATION};
use crate::error::domain;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SeededStream {
    pub seed: u64,
    pub stream_id: u64,
}

impl SeededStream {
    pub fn new(seed: u64, stream_id: u64) -> Self {
        Self { seed, stream_id }
    }

    /// A sibling stream with a different id.
    pub fn substream(&self, stream_id: u64) -> Self {
        Self { seed: self.seed, stream_id }
    }

    /// A fresh generator positioned at the start of this stream.
    pub fn rng(&self) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(self.stream_id);
        rng
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct McEstimate {
    pub mean: f64,
    pub std_error: f64,
    pub n_draws: u64,
}

impl McEstimate {
    /// `|mean − exact|` in standard-error units. A zero standard error
    /// gives 0 on exact agreement and infinity otherwise.
    pub fn z_score(&self, exact: f64) -> f64 {
        let d = (self.mean - exact).abs();
        if self.std_error > 0.0 {
            d / self.std_error
        } else if d == 0.0 {
            0.0
        } else {
            f64::INFINITY
        }
    }

    pub fn agrees_with(&self, exact: f64, n_se: f64) -> bool {
        self.z_score(exact) <= n_se
    }
}

/// Sample mean and standard error of `n_draws` outcomes.
pub fn mc_estimate<F>(mut sampler: F, n_draws: u64, stream: SeededStream) -> Result<McEstimate>
where
    F: FnMut(&mut ChaCha8Rng) -> f64,
{
    if n_draws < 2 {
        return domain("a Monte-Carlo estimate needs at least two draws");
    }
    let mut rng = stream.rng();
    // Welford accumulation.
    let (mut mean, mut m2) = (0.0_f64, 0.0_f64);
    for i in 1..=n_draws {
        let v = sampler(&mut rng);
        let delta = v - mean;
        mean += delta / i as f64;
        m2 += delta * (v - mean);
    }
    let var = m2 / (n_draws - 1) as f64;
    Ok(McEstimate {
        mean,
        std_error: (var / n_draws as f64).sqrt(),
        n_draws,
    })
}

/// `Σ_x f(x)·pmf(x; m, p)`.
pub fn enumerate_outcomes<F>(m: u64, p: f64, f: F) -> Result<f64>
where
    F: Fn(u64) -> f64,
{
    if m > MAX_ENUMERATION {
        return Err(Error::EnumerationLimit {
            size: m as usize,
            limit: MAX_ENUMERATION as usize,
        });
    }
    let pmf = binom_pmf_vec(m, p)?;
    Ok(pmf.iter().enumerate().map(|(x, w)| w * f(x as u64)).sum())
}
