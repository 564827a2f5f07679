//! Finite-support distributions over real outcomes.

use serde::{Deserialize, Serialize};

use crate::error::domain;
use crate::{Error, Result};

/// Atoms beyond this count are refused rather than built.
pub const MAX_ATOMS: usize = 1 << 22;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<(f64, f64)>", into = "Vec<(f64, f64)>")]
pub struct DiscreteLaw {
    atoms: Vec<(f64, f64)>,
}

impl TryFrom<Vec<(f64, f64)>> for DiscreteLaw {
    type Error = Error;

    fn try_from(atoms: Vec<(f64, f64)>) -> Result<Self> {
        Self::new(atoms)
    }
}

impl From<DiscreteLaw> for Vec<(f64, f64)> {
    fn from(law: DiscreteLaw) -> Self {
        law.atoms
    }
}

impl DiscreteLaw {
    /// `(value, probability)` pairs; probabilities must be non-negative and
    /// sum to 1 within 1e-9.
    pub fn new(atoms: Vec<(f64, f64)>) -> Result<Self> {
        if atoms.is_empty() {
            return domain("a law needs at least one atom");
        }
        if atoms.iter().any(|(v, w)| !v.is_finite() || !(*w >= 0.0)) {
            return domain("atoms need finite values and non-negative weights");
        }
        let total: f64 = atoms.iter().map(|(_, w)| w).sum();
        if (total - 1.0).abs() > 1e-9 {
            return domain(format!("atom weights sum to {total}, not 1"));
        }
        Ok(Self { atoms }.coalesced())
    }

    pub fn point(value: f64) -> Self {
        Self { atoms: vec![(value, 1.0)] }
    }

    pub fn two_point(a: f64, b: f64, pr_a: f64) -> Result<Self> {
        Self::new(vec![(a, pr_a), (b, 1.0 - pr_a)])
    }

    pub fn atoms(&self) -> &[(f64, f64)] {
        &self.atoms
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    /// Sorted by value with equal values merged and null atoms dropped.
    fn coalesced(mut self) -> Self {
        self.atoms.retain(|(_, w)| *w > 0.0);
        if self.atoms.is_empty() {
            self.atoms.push((0.0, 1.0));
        }
        self.atoms.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut out: Vec<(f64, f64)> = Vec::with_capacity(self.atoms.len());
        for (v, w) in self.atoms {
            match out.last_mut() {
                Some(last) if last.0 == v => last.1 += w,
                _ => out.push((v, w)),
            }
        }
        Self { atoms: out }
    }

    pub fn expect(&self, f: impl Fn(f64) -> f64) -> f64 {
        self.atoms.iter().map(|&(v, w)| w * f(v)).sum()
    }

    pub fn mean(&self) -> f64 {
        self.expect(|v| v)
    }

    pub fn variance(&self) -> f64 {
        let m = self.mean();
        self.expect(|v| (v - m) * (v - m))
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        Self { atoms: self.atoms.iter().map(|&(v, w)| (f(v), w)).collect() }.coalesced()
    }

    /// Law of `X + Y` for independent `X ~ self`, `Y ~ other`.
    pub fn add_independent(&self, other: &DiscreteLaw) -> Result<Self> {
        let size = self.len() * other.len();
        if size > MAX_ATOMS {
            return Err(Error::EnumerationLimit { size, limit: MAX_ATOMS });
        }
        let mut atoms = Vec::with_capacity(size);
        for &(a, wa) in &self.atoms {
            for &(b, wb) in &other.atoms {
                atoms.push((a + b, wa * wb));
            }
        }
        Ok(Self { atoms }.coalesced())
    }

    /// Inverse-CDF draw from a uniform `u ∈ [0, 1)`.
    pub fn quantile_draw(&self, u: f64) -> f64 {
        let mut acc = 0.0;
        for &(v, w) in &self.atoms {
            acc += w;
            if u < acc {
                return v;
            }
        }
        self.atoms.last().expect("non-empty").0
    }
}
