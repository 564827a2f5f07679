//! Numerical settings shared by every module.

use serde::{Deserialize, Serialize};

/// Grid steps and tolerances. Read from the `grids` block of a scenario file.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GridConfig {
    /// Step of the probability grid for coverage curves.
    pub coverage_step: f64,
    /// Coarse step for suprema over `p < p0`.
    pub sup_step: f64,
    /// Fine step used around the coarse argmax.
    pub refine_step: f64,
    /// Absolute tolerance on root-finding in `p`.
    pub root_tol: f64,
}

impl Default for GridConfig {
    fn default() -> Self {
        Self {
            coverage_step: 1.0 / 1024.0,
            sup_step: 1.0 / 512.0,
            refine_step: 1.0 / 8192.0,
            root_tol: 1e-10,
        }
    }
}

impl GridConfig {
    pub fn validate(&self) -> crate::Result<()> {
        for (name, v) in [
            ("coverage_step", self.coverage_step),
            ("sup_step", self.sup_step),
            ("refine_step", self.refine_step),
        ] {
            if !(v > 0.0 && v < 1.0) {
                return Err(crate::Error::Config(format!("{name} = {v} must lie in (0, 1)")));
            }
        }
        if self.refine_step > self.sup_step {
            return Err(crate::Error::Config(
                "refine_step must not exceed sup_step".into(),
            ));
        }
        if !(self.root_tol > 0.0 && self.root_tol < 1e-3) {
            return Err(crate::Error::Config(format!(
                "root_tol = {} must lie in (0, 1e-3)",
                self.root_tol
            )));
        }
        Ok(())
    }
}
