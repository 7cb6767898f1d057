//! Sweep results on disk: `modes.json`, `dispersion.csv` and gnuplot scripts.

use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};

use super::config::RunConfig;
use crate::assembly::{RadiationCase, ZetaPair};
use crate::error::{Error, Result};
use crate::modes::{trace_curves, FailedPoint, ModeSolution, SweepResult};
use crate::scalar::Cx;

pub const DATASET_FILE: &str = "modes.json";
pub const CSV_FILE: &str = "dispersion.csv";
pub const FORMAT_VERSION: u32 = 1;

/// CSV header, in column order.
pub const CSV_COLUMNS: [&str; 8] = [
    "frequency_MHz",
    "omega_rad_per_us",
    "re_kx_rad_per_mm",
    "im_kx_np_per_mm",
    "phase_velocity_km_per_s",
    "case_id",
    "interface_residual",
    "backward_error",
];

/// Phase-velocity step (mm/µs, Np/mm) above which curve tracing breaks a curve.
pub const CURVE_JUMP: f64 = 0.25;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CaseRecord {
    pub index: usize,
    pub label: String,
    pub c_min: f64,
    /// `None` for the unbounded last interval.
    pub c_max: Option<f64>,
    pub zeta_a: ZetaPair<f64>,
    pub zeta_b: ZetaPair<f64>,
}

impl From<&RadiationCase<f64>> for CaseRecord {
    fn from(c: &RadiationCase<f64>) -> Self {
        Self {
            index: c.index,
            label: c.label(),
            c_min: c.c_min,
            c_max: c.c_max.is_finite().then_some(c.c_max),
            zeta_a: c.zeta_a,
            zeta_b: c.zeta_b,
        }
    }
}

/// One retained mode as stored on disk.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModeRecord {
    pub id: usize,
    /// Curve assigned by nearest-neighbour continuation.
    pub curve: usize,
    pub frequency_mhz: f64,
    pub omega: f64,
    pub k_x: Cx<f64>,
    pub phase_velocity: f64,
    pub attenuation: f64,
    pub case_index: usize,
    pub case_label: String,
    pub interface_residual: f64,
    pub backward_error: f64,
    pub branch_point: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dataset {
    pub format_version: u32,
    pub config: RunConfig,
    pub config_hash: String,
    /// Unix time in seconds.
    pub started_at: f64,
    pub finished_at: f64,
    pub frequencies_mhz: Vec<f64>,
    pub cases: Vec<CaseRecord>,
    pub failed_points: Vec<FailedPoint>,
    pub modes: Vec<ModeRecord>,
}

pub fn unix_now() -> f64 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs_f64())
        .unwrap_or(0.0)
}

impl Dataset {
    /// Wraps a finished sweep. `frequencies_mhz` must be the grid the sweep ran on.
    pub fn from_sweep(
        config: &RunConfig,
        frequencies_mhz: Vec<f64>,
        result: &SweepResult<f64>,
        started_at: f64,
        finished_at: f64,
    ) -> Self {
        let curves = trace_curves(&result.modes, CURVE_JUMP);
        let modes = result
            .modes
            .iter()
            .zip(curves)
            .enumerate()
            .map(|(id, (m, curve))| ModeRecord::new(id, curve, m, &frequencies_mhz, &result.omegas))
            .collect();
        Self {
            format_version: FORMAT_VERSION,
            config: config.clone(),
            config_hash: config.hash(),
            started_at,
            finished_at,
            frequencies_mhz,
            cases: result.cases.iter().map(CaseRecord::from).collect(),
            failed_points: result.failures.clone(),
            modes,
        }
    }

    pub fn load(dir: &Path) -> Result<Self> {
        let path = dir.join(DATASET_FILE);
        let text = std::fs::read_to_string(&path).map_err(|e| Error::NotFound(format!("{}: {e}", path.display())))?;
        let ds: Self = serde_json::from_str(&text)?;
        if ds.format_version != FORMAT_VERSION {
            return Err(Error::Config(format!(
                "{} has format version {}, expected {FORMAT_VERSION}",
                path.display(),
                ds.format_version
            )));
        }
        Ok(ds)
    }

    pub fn write_json(&self, dir: &Path) -> Result<PathBuf> {
        let path = dir.join(DATASET_FILE);
        std::fs::write(&path, serde_json::to_string_pretty(self)? + "\n")?;
        Ok(path)
    }

    pub fn write_csv(&self, dir: &Path) -> Result<PathBuf> {
        let path = dir.join(CSV_FILE);
        std::fs::write(&path, self.csv_string()?)?;
        Ok(path)
    }

    /// The CSV text. Numbers use fixed formats so reruns are byte-identical.
    pub fn csv_string(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(CSV_COLUMNS).map_err(csv_err)?;
        for m in &self.modes {
            w.write_record([
                format!("{:.9}", m.frequency_mhz),
                format!("{:.9}", m.omega),
                format!("{:.10e}", m.k_x.re),
                format!("{:.10e}", m.attenuation),
                format!("{:.9}", m.phase_velocity),
                m.case_label.clone(),
                format!("{:.3e}", m.interface_residual),
                format!("{:.3e}", m.backward_error),
            ])
            .map_err(csv_err)?;
        }
        let bytes = w
            .into_inner()
            .map_err(|e| Error::Io(std::io::Error::other(e.to_string())))?;
        Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
    }

    /// Writes `plot_dispersion.gp` and `plot_attenuation.gp`.
    pub fn write_plot_scripts(&self, dir: &Path) -> Result<Vec<PathBuf>> {
        let cap = self.config.outputs.attenuation_display_cap;
        let fmax = self.frequencies_mhz.last().copied().unwrap_or(1.0);
        let labels: Vec<&str> = self.cases.iter().map(|c| c.label.as_str()).collect();
        let mut out = Vec::new();
        for (name, script) in [
            ("plot_dispersion.gp", dispersion_script(&labels, fmax)),
            ("plot_attenuation.gp", attenuation_script(&labels, fmax, cap)),
        ] {
            let path = dir.join(name);
            std::fs::write(&path, script)?;
            out.push(path);
        }
        Ok(out)
    }

    /// Radiation case record by index.
    pub fn case(&self, index: usize) -> Option<&CaseRecord> {
        self.cases.iter().find(|c| c.index == index)
    }
}

impl ModeRecord {
    fn new(id: usize, curve: usize, m: &ModeSolution<f64>, freqs: &[f64], omegas: &[f64]) -> Self {
        // report the configured frequency exactly rather than ω/2π
        let frequency_mhz = omegas
            .iter()
            .position(|&w| w == m.omega)
            .and_then(|i| freqs.get(i).copied())
            .unwrap_or(m.frequency);
        Self {
            id,
            curve,
            frequency_mhz,
            omega: m.omega,
            k_x: m.k_x,
            phase_velocity: m.phase_velocity,
            attenuation: m.attenuation,
            case_index: m.case_index,
            case_label: m.case_label.clone(),
            interface_residual: m.interface_residual,
            backward_error: m.backward_error,
            branch_point: m.branch_point,
        }
    }
}

fn csv_err(e: csv::Error) -> Error {
    Error::Io(std::io::Error::other(e.to_string()))
}

fn plot_lines(labels: &[&str], ycol: &str) -> String {
    labels
        .iter()
        .map(|l| {
            format!("    '{CSV_FILE}' using 1:(strcol(6) eq '{l}' ? {ycol} : 1/0) with points pt 7 ps 0.4 title '{l}'")
        })
        .collect::<Vec<_>>()
        .join(", \\\n")
}

fn dispersion_script(labels: &[&str], fmax: f64) -> String {
    format!(
        "# phase velocity against frequency\n\
         set datafile separator ','\n\
         set key autotitle columnhead\n\
         set terminal pngcairo size 900,650\n\
         set output 'dispersion.png'\n\
         set xlabel 'Frequency (MHz)'\n\
         set ylabel 'Phase velocity (km/s)'\n\
         set xrange [0:{fmax:.6}]\n\
         set yrange [0:*]\n\
         plot \\\n{}\n",
        plot_lines(labels, "$5")
    )
}

fn attenuation_script(labels: &[&str], fmax: f64, cap: f64) -> String {
    format!(
        "# attenuation against frequency; rows above the cap are hidden, not removed\n\
         cap = {cap}\n\
         set datafile separator ','\n\
         set key autotitle columnhead\n\
         set terminal pngcairo size 900,650\n\
         set output 'attenuation.png'\n\
         set xlabel 'Frequency (MHz)'\n\
         set ylabel 'Attenuation (Np/mm)'\n\
         set xrange [0:{fmax:.6}]\n\
         set yrange [0:cap]\n\
         plot \\\n{}\n",
        plot_lines(labels, "($4 <= cap ? $4 : 1/0)")
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tiny() -> Dataset {
        let cfg = RunConfig::default();
        Dataset {
            format_version: FORMAT_VERSION,
            config_hash: cfg.hash(),
            config: cfg,
            started_at: 0.0,
            finished_at: 1.0,
            frequencies_mhz: vec![1.0],
            cases: vec![],
            failed_points: vec![],
            modes: vec![ModeRecord {
                id: 0,
                curve: 0,
                frequency_mhz: 1.0,
                omega: 2.0 * std::f64::consts::PI,
                k_x: Cx::new(1.5, 0.25),
                phase_velocity: 4.1887902047863905,
                attenuation: 0.25,
                case_index: 1,
                case_label: "shear-leaky".into(),
                interface_residual: 1.234e-7,
                backward_error: 5e-15,
                branch_point: false,
            }],
        }
    }

    #[test]
    fn csv_layout() {
        let text = tiny().csv_string().unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next().unwrap(), CSV_COLUMNS.join(","));
        assert_eq!(
            lines.next().unwrap(),
            "1.000000000,6.283185307,1.5000000000e0,2.5000000000e-1,4.188790205,shear-leaky,1.234e-7,5.000e-15"
        );
        assert!(lines.next().is_none());
    }

    #[test]
    fn json_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let ds = tiny();
        ds.write_json(dir.path()).unwrap();
        assert_eq!(Dataset::load(dir.path()).unwrap(), ds);
        assert!(matches!(
            Dataset::load(&dir.path().join("missing")),
            Err(Error::NotFound(_))
        ));
    }

    #[test]
    fn attenuation_script_caps_display() {
        let s = attenuation_script(&["shear-leaky"], 4.77, 10.0);
        assert!(s.contains("cap = 10"));
        assert!(s.contains("set yrange [0:cap]"));
        assert!(s.contains("strcol(6) eq 'shear-leaky'"));
    }
}
