//! CSV and JSON emitters. Every file starts with the run metadata.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use serde::Serialize;

#[derive(Debug, Clone, Serialize)]
pub struct Meta {
    pub tool: &'static str,
    pub version: &'static str,
    pub seed: u64,
    pub mc_draws: u64,
    pub coverage_step: f64,
    pub sup_step: f64,
    pub refine_step: f64,
    pub variant: String,
    /// `calibrated` or `configured`.
    pub variant_source: &'static str,
}

impl Meta {
    fn comment(&self) -> String {
        format!(
            "# {} {} seed={} mc_draws={} coverage_step={} sup_step={} refine_step={} variant={} ({})\n",
            self.tool,
            self.version,
            self.seed,
            self.mc_draws,
            self.coverage_step,
            self.sup_step,
            self.refine_step,
            self.variant,
            self.variant_source
        )
    }
}

pub struct OutDir {
    dir: PathBuf,
    meta: Meta,
}

impl OutDir {
    pub fn create(dir: &Path, meta: Meta) -> Result<Self> {
        fs::create_dir_all(dir).with_context(|| format!("cannot create output directory {}", dir.display()))?;
        Ok(Self { dir: dir.to_path_buf(), meta })
    }

    /// Writes `rows` under a `#` metadata line and a column header.
    pub fn csv<T: Serialize>(&self, name: &str, rows: &[T]) -> Result<PathBuf> {
        let path = self.dir.join(name);
        let mut buf = self.meta.comment().into_bytes();
        {
            let mut w = csv::Writer::from_writer(&mut buf);
            for row in rows {
                w.serialize(row)?;
            }
            w.flush()?;
        }
        write_file(&path, &buf)?;
        Ok(path)
    }

    /// Writes `{"meta": …, "data": …}`.
    pub fn json<T: Serialize>(&self, name: &str, data: &T) -> Result<PathBuf> {
        #[derive(Serialize)]
        struct Doc<'a, T> {
            meta: &'a Meta,
            data: &'a T,
        }
        let path = self.dir.join(name);
        let mut buf = serde_json::to_vec_pretty(&Doc { meta: &self.meta, data })?;
        buf.push(b'\n');
        write_file(&path, &buf)?;
        Ok(path)
    }
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<()> {
    let mut f = fs::File::create(path).with_context(|| format!("cannot write {}", path.display()))?;
    f.write_all(bytes)?;
    log::info!("wrote {}", path.display());
    Ok(())
}

/// Shortest decimal without trailing zeros, rounded to 12 places.
pub fn trim(x: f64) -> String {
    let s = format!("{x:.12}");
    let s = s.trim_end_matches('0').trim_end_matches('.');
    if s == "-0" { "0".into() } else { s.into() }
}
