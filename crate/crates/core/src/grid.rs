//! Probability grids and grid suprema.

use rayon::prelude::*;

use crate::{Error, Result};

/// An ordered list of probabilities.
#[derive(Debug, Clone, PartialEq)]
pub struct ProbGrid {
    points: Vec<f64>,
}

impl ProbGrid {
    /// Points `lo + k*step` lying strictly inside `(lo, hi)`.
    pub fn open(lo: f64, hi: f64, step: f64) -> Self {
        Self::build(lo, hi, step, false)
    }

    /// Points `lo + k*step` in `[lo, hi]`, with `hi` appended if the step
    /// does not land on it.
    pub fn closed(lo: f64, hi: f64, step: f64) -> Self {
        Self::build(lo, hi, step, true)
    }

    fn build(lo: f64, hi: f64, step: f64, closed: bool) -> Self {
        assert!(step > 0.0, "grid step must be positive");
        let mut points = Vec::new();
        if closed {
            points.push(lo);
        }
        let span = hi - lo;
        let slack = 1e-12 * step;
        let mut k = 1u64;
        loop {
            let offset = k as f64 * step;
            if offset >= span - slack {
                break;
            }
            points.push(lo + offset);
            k += 1;
        }
        if closed && hi > lo {
            points.push(hi);
        }
        Self { points }
    }

    pub fn from_points(mut points: Vec<f64>) -> Self {
        points.sort_by(f64::total_cmp);
        points.dedup();
        Self { points }
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn max_point(&self) -> Option<f64> {
        self.points.last().copied()
    }
}

/// Location and value of a grid maximum.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct GridMax {
    pub argmax: f64,
    pub value: f64,
}

/// Maximum of `f` over the grid. Evaluation is parallel; the first maximal
/// point wins ties, so the result does not depend on scheduling.
pub fn grid_max<F>(grid: &ProbGrid, f: F) -> Result<GridMax>
where
    F: Fn(f64) -> f64 + Sync,
{
    if grid.is_empty() {
        return Err(Error::EmptyGrid);
    }
    let values: Vec<f64> = grid.points().par_iter().map(|&p| f(p)).collect();
    let mut best = GridMax {
        argmax: grid.points()[0],
        value: values[0],
    };
    for (&p, &v) in grid.points().iter().zip(&values).skip(1) {
        if v > best.value {
            best = GridMax { argmax: p, value: v };
        }
    }
    Ok(best)
}

/// Supremum of `f` over `(lo, hi)`: a coarse open grid, then a fine grid
/// within one coarse step of the coarse argmax.
pub fn refined_sup<F>(lo: f64, hi: f64, coarse: f64, fine: f64, f: F) -> Result<GridMax>
where
    F: Fn(f64) -> f64 + Sync,
{
    let grid = ProbGrid::open(lo, hi, coarse);
    let first = grid_max(&grid, &f)?;
    let a = (first.argmax - coarse).max(lo);
    let b = (first.argmax + coarse).min(hi);
    let local = ProbGrid::open(a, b, fine);
    if local.is_empty() {
        return Ok(first);
    }
    let second = grid_max(&local, &f)?;
    Ok(if second.value > first.value { second } else { first })
}
