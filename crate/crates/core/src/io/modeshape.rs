//! Selecting a stored mode and rebuilding its shape.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use super::dataset::{Dataset, ModeRecord};
use crate::assembly::{assemble_with, enumerate_cases, Discretization};
use crate::error::{Error, Result};
use crate::pep::eigenvector_at;
use crate::shape::{mode_shape, ModeShape};

/// How a mode is picked at a frequency.
#[derive(Debug, Clone, PartialEq)]
pub enum ModeSelector {
    /// Lowest attenuation, then lowest phase velocity.
    LeastAttenuated,
    /// Mode id as stored in the dataset.
    Id(usize),
    /// Curve id, written `c<N>`.
    Curve(usize),
    /// Least attenuated mode of the named radiation case.
    Case(String),
}

impl std::str::FromStr for ModeSelector {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if let Ok(id) = s.parse() {
            return Ok(Self::Id(id));
        }
        if let Some(c) = s.strip_prefix('c').and_then(|r| r.parse().ok()) {
            return Ok(Self::Curve(c));
        }
        if s.is_empty() {
            return Err(Error::Config("empty mode selector".into()));
        }
        Ok(Self::Case(s.to_string()))
    }
}

/// Finds the mode at the stored frequency closest to `freq_mhz`. The
/// frequency must be within half a grid step (or 1e-6 MHz for one-point
/// grids) of a swept frequency.
pub fn select_mode<'a>(ds: &'a Dataset, freq_mhz: f64, selector: &ModeSelector) -> Result<&'a ModeRecord> {
    let grid = &ds.frequencies_mhz;
    let nearest = grid
        .iter()
        .copied()
        .min_by(|a, b| (a - freq_mhz).abs().total_cmp(&(b - freq_mhz).abs()))
        .ok_or_else(|| Error::NotFound("dataset has no frequencies".into()))?;
    let step = if grid.len() > 1 {
        (grid[grid.len() - 1] - grid[0]) / (grid.len() - 1) as f64
    } else {
        0.0
    };
    let tol = (0.5 * step).max(1e-6);
    if (nearest - freq_mhz).abs() > tol {
        return Err(Error::NotFound(format!(
            "{freq_mhz} MHz is outside the swept range; nearest swept frequency is {nearest:.6} MHz"
        )));
    }
    let at: Vec<&ModeRecord> = ds.modes.iter().filter(|m| m.frequency_mhz == nearest).collect();
    let least = |it: &mut dyn Iterator<Item = &'a ModeRecord>| {
        it.min_by(|a, b| {
            a.attenuation
                .total_cmp(&b.attenuation)
                .then(a.phase_velocity.total_cmp(&b.phase_velocity))
        })
    };
    let found = match selector {
        ModeSelector::LeastAttenuated => least(&mut at.iter().copied()),
        ModeSelector::Id(id) => at.iter().copied().find(|m| m.id == *id),
        ModeSelector::Curve(c) => at.iter().copied().find(|m| m.curve == *c),
        ModeSelector::Case(label) => least(&mut at.iter().copied().filter(|m| &m.case_label == label)),
    };
    found.ok_or_else(|| {
        let mut msg = format!("no mode matching {selector:?} at {nearest:.6} MHz");
        if at.is_empty() {
            msg.push_str("; no modes at this frequency");
        } else {
            msg.push_str("; candidates:");
            for m in at.iter().take(12) {
                let _ = write!(
                    msg,
                    "\n  id {} curve c{} {} c = {:.4} km/s, att = {:.3e} Np/mm",
                    m.id, m.curve, m.case_label, m.phase_velocity, m.attenuation
                );
            }
        }
        Error::NotFound(msg)
    })
}

/// Re-solves the eigenvector of a stored mode and builds its shape.
pub fn reconstruct(ds: &Dataset, mode: &ModeRecord, y_extent: f64, samples: usize) -> Result<ModeShape<f64>> {
    let sys = ds.config.build_system()?;
    let case = enumerate_cases(&sys, &ds.config.zeta)
        .into_iter()
        .find(|c| c.index == mode.case_index)
        .ok_or_else(|| Error::NotFound(format!("case {} is not part of this system", mode.case_index)))?;
    let n = ds.config.n_points;
    let disc = Discretization::new(&sys, &case, n)?;
    let mut pep = assemble_with(&sys, mode.omega, &disc, &case.label())?;
    if ds.config.equilibrate {
        pep.equilibrate();
    }
    let (vector, _) = eigenvector_at(&pep, mode.k_x)?;
    mode_shape(&vector, mode.k_x, mode.omega, &sys, &case, n, y_extent, samples)
}

/// Writes `modeshape_<id>.csv` (one row per sample from deep in side a to
/// deep in side b) and a matching gnuplot script.
pub fn write_mode_shape(shape: &ModeShape<f64>, mode: &ModeRecord, dir: &Path) -> Result<Vec<PathBuf>> {
    let stem = format!("modeshape_{}", mode.id);
    let mut w = csv::Writer::from_writer(Vec::new());
    let err = |e: csv::Error| Error::Io(std::io::Error::other(e.to_string()));
    w.write_record(["y_mm", "region", "re_ux", "im_ux", "re_uy", "im_uy", "abs_ux", "abs_uy"])
        .map_err(err)?;
    let mut rows: Vec<(f64, &str, num_complex::Complex<f64>, num_complex::Complex<f64>)> = Vec::new();
    let a = &shape.side_a;
    for i in (0..a.y.len()).rev() {
        rows.push((a.y[i], "a", a.u_x[i], a.u_y[i]));
    }
    for i in 0..shape.y_guide.len() {
        rows.push((shape.y_guide[i], "guide", shape.u_x[i], shape.u_y[i]));
    }
    let b = &shape.side_b;
    for i in 0..b.y.len() {
        rows.push((b.y[i], "b", b.u_x[i], b.u_y[i]));
    }
    for (y, region, ux, uy) in rows {
        w.write_record([
            format!("{y:.6}"),
            region.to_string(),
            format!("{:.8e}", ux.re),
            format!("{:.8e}", ux.im),
            format!("{:.8e}", uy.re),
            format!("{:.8e}", uy.im),
            format!("{:.8e}", ux.norm()),
            format!("{:.8e}", uy.norm()),
        ])
        .map_err(err)?;
    }
    let bytes = w
        .into_inner()
        .map_err(|e| Error::Io(std::io::Error::other(e.to_string())))?;
    let csv_path = dir.join(format!("{stem}.csv"));
    std::fs::write(&csv_path, bytes)?;

    let d = shape.y_guide.last().copied().unwrap_or(0.0);
    let script = format!(
        "# mode {id}: f = {f:.6} MHz, k_x = {kr:.8} {ki:+.8}i rad/mm, case {case}\n\
         set datafile separator ','\n\
         set terminal pngcairo size 700,900\n\
         set output '{stem}.png'\n\
         set xlabel 'Displacement (normalised)'\n\
         set ylabel 'y (mm)'\n\
         set arrow from graph 0, first {d} to graph 1, first {d} nohead dt 2\n\
         set arrow from graph 0, first -{d} to graph 1, first -{d} nohead dt 2\n\
         plot '{stem}.csv' skip 1 using 7:1 with lines title '|u_x|', \\\n\
         \x20    '{stem}.csv' skip 1 using 8:1 with lines title '|u_y|'\n",
        id = mode.id,
        f = mode.frequency_mhz,
        kr = mode.k_x.re,
        ki = mode.k_x.im,
        case = mode.case_label,
    );
    let gp_path = dir.join(format!("plot_{stem}.gp"));
    std::fs::write(&gp_path, script)?;
    Ok(vec![csv_path, gp_path])
}
