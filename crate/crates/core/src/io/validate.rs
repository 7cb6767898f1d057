//! Cross-checks a stored dataset against the partial-wave determinant.

use std::fmt::Write as _;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::dataset::Dataset;
use crate::assembly::enumerate_cases;
use crate::error::Result;
use crate::oracle::{characteristic_determinant, refine_root, RefineOptions};
use crate::scalar::Cx;

/// Default pass threshold on `|k_refined - k_scm| / |k_scm|`.
pub const DEFAULT_THRESHOLD: f64 = 1e-4;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValidationRow {
    pub id: usize,
    pub frequency_mhz: f64,
    pub case_label: String,
    pub k_scm: Cx<f64>,
    /// Scaled determinant at the collocation value.
    pub determinant: f64,
    pub k_refined: Option<Cx<f64>>,
    pub relative_deviation: Option<f64>,
    pub passed: bool,
    pub note: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub threshold: f64,
    pub rows: Vec<ValidationRow>,
}

impl ValidationReport {
    pub fn n_passed(&self) -> usize {
        self.rows.iter().filter(|r| r.passed).count()
    }

    pub fn all_passed(&self) -> bool {
        self.n_passed() == self.rows.len()
    }

    /// Fraction of rows that passed; 1 for an empty report.
    pub fn pass_fraction(&self) -> f64 {
        if self.rows.is_empty() {
            1.0
        } else {
            self.n_passed() as f64 / self.rows.len() as f64
        }
    }

    /// Fixed-width text table followed by a summary line.
    pub fn to_table(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(
            s,
            "{:>6} {:>12} {:<16} {:>26} {:>10} {:>26} {:>10}  status",
            "id", "f_MHz", "case", "k_scm", "|D|", "k_refined", "rel_dev"
        );
        for r in &self.rows {
            let refined = r
                .k_refined
                .map(|k| format!("{:.10}{:+.10}i", k.re, k.im))
                .unwrap_or_else(|| "-".into());
            let dev = r
                .relative_deviation
                .map(|d| format!("{d:.2e}"))
                .unwrap_or_else(|| "-".into());
            let status = if r.passed {
                "ok".to_string()
            } else {
                format!("FAIL {}", r.note.as_deref().unwrap_or(""))
            };
            let _ = writeln!(
                s,
                "{:>6} {:>12.6} {:<16} {:>26} {:>10.2e} {:>26} {:>10}  {}",
                r.id,
                r.frequency_mhz,
                r.case_label,
                format!("{:.10}{:+.10}i", r.k_scm.re, r.k_scm.im),
                r.determinant,
                refined,
                dev,
                status.trim_end()
            );
        }
        let _ = writeln!(
            s,
            "{} of {} modes within {:.0e} of a determinant root ({:.2}%)",
            self.n_passed(),
            self.rows.len(),
            self.threshold,
            100.0 * self.pass_fraction()
        );
        s
    }
}

/// Refines every stored mode on the determinant of its radiation case.
pub fn validate_dataset(ds: &Dataset, threshold: f64) -> Result<ValidationReport> {
    let sys = ds.config.build_system()?;
    let cases = enumerate_cases(&sys, &ds.config.zeta);
    let opts = RefineOptions::default();
    let rows = ds
        .modes
        .par_iter()
        .map(|m| {
            let Some(case) = cases.iter().find(|c| c.index == m.case_index) else {
                return ValidationRow {
                    id: m.id,
                    frequency_mhz: m.frequency_mhz,
                    case_label: m.case_label.clone(),
                    k_scm: m.k_x,
                    determinant: f64::NAN,
                    k_refined: None,
                    relative_deviation: None,
                    passed: false,
                    note: Some(format!("unknown case index {}", m.case_index)),
                };
            };
            let kinds = case.branch_kinds();
            let determinant = characteristic_determinant(&sys, m.omega, m.k_x, kinds)
                .map(|d| d.value.norm())
                .unwrap_or(f64::NAN);
            let (k_refined, relative_deviation, note) = match refine_root(&sys, m.omega, m.k_x, kinds, &opts) {
                Ok(r) => {
                    let dev = (r.k_x - m.k_x).norm() / m.k_x.norm();
                    let note = r.branch_point.then(|| "branch point".to_string());
                    (Some(r.k_x), Some(dev), note)
                }
                Err(e) => (None, None, Some(e.to_string())),
            };
            let passed = relative_deviation.is_some_and(|d| d < threshold);
            ValidationRow {
                id: m.id,
                frequency_mhz: m.frequency_mhz,
                case_label: m.case_label.clone(),
                k_scm: m.k_x,
                determinant,
                k_refined,
                relative_deviation,
                passed,
                note: if passed {
                    note
                } else {
                    note.or_else(|| Some("deviation above threshold".into()))
                },
            }
        })
        .collect();
    Ok(ValidationReport { threshold, rows })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::io::config::RunConfig;
    use crate::io::dataset::{ModeRecord, FORMAT_VERSION};

    fn dataset(modes: Vec<ModeRecord>) -> Dataset {
        let cfg = RunConfig::default();
        Dataset {
            format_version: FORMAT_VERSION,
            config_hash: cfg.hash(),
            config: cfg,
            started_at: 0.0,
            finished_at: 0.0,
            frequencies_mhz: vec![],
            cases: vec![],
            failed_points: vec![],
            modes,
        }
    }

    fn record(k: Cx<f64>) -> ModeRecord {
        let w = 2.0 * std::f64::consts::PI * 1.03;
        ModeRecord {
            id: 0,
            curve: 0,
            frequency_mhz: 1.03,
            omega: w,
            k_x: k,
            phase_velocity: w / k.re,
            attenuation: k.im,
            case_index: 1,
            case_label: "shear-leaky".into(),
            interface_residual: 0.0,
            backward_error: 0.0,
            branch_point: false,
        }
    }

    #[test]
    fn empty_dataset_passes() {
        let r = validate_dataset(&dataset(vec![]), DEFAULT_THRESHOLD).unwrap();
        assert!(r.rows.is_empty() && r.all_passed());
        assert!(r.to_table().contains("0 of 0"));
    }

    #[test]
    fn healthy_and_perturbed_modes() {
        let k = Cx::new(1.082409495, 0.158357418);
        let r = validate_dataset(&dataset(vec![record(k), record(k * 1.01)]), DEFAULT_THRESHOLD).unwrap();
        assert!(r.rows[0].passed, "{:?}", r.rows[0]);
        assert!(r.rows[0].determinant < 1e-5);
        assert!(!r.rows[1].passed);
        assert_eq!(r.n_passed(), 1);
        assert!(r.to_table().contains("FAIL"));
    }
}
