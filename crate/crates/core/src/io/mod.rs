//! Configuration files, stored datasets and report writers. This layer is
//! concrete in `f64`.

pub mod config;
pub mod dataset;
pub mod modeshape;
pub mod validate;

pub use config::RunConfig;
pub use dataset::Dataset;

use std::path::{Path, PathBuf};

use crate::error::Result;
use crate::modes::sweep_with_progress;

/// Runs the sweep described by `cfg`. Failed `(ω, case)` points end up in
/// the dataset rather than aborting the run.
pub fn run_sweep(cfg: &RunConfig, progress: impl Fn(usize, usize) + Sync) -> Result<Dataset> {
    cfg.check()?;
    let sys = cfg.build_system()?;
    let freqs = cfg.frequency.grid()?;
    let omegas: Vec<f64> = freqs.iter().map(|f| 2.0 * std::f64::consts::PI * f).collect();
    let started = dataset::unix_now();
    let result = sweep_with_progress(&sys, &omegas, &cfg.zeta, &cfg.solve_options(), progress)?;
    Ok(Dataset::from_sweep(cfg, freqs, &result, started, dataset::unix_now()))
}

/// Writes the files enabled in `ds.config.outputs` into `dir`, creating it.
pub fn write_outputs(ds: &Dataset, dir: &Path) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(dir)?;
    let mut written = Vec::new();
    let out = ds.config.outputs;
    if out.csv {
        written.push(ds.write_csv(dir)?);
    }
    if out.json {
        written.push(ds.write_json(dir)?);
    }
    if out.plots {
        written.extend(ds.write_plot_scripts(dir)?);
    }
    Ok(written)
}
