//! Run configuration: the JSON file consumed by `sweep`.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::assembly::{ZetaPair, ZetaTable};
use crate::error::{Error, Result};
use crate::modes::{FilterConfig, SolveOptions};
use crate::{Material, TriLayerSystem};

/// A material given by density and bulk wavespeeds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MaterialSpec {
    /// g/cm³
    pub rho: f64,
    /// mm/µs
    pub c_l: f64,
    /// mm/µs
    pub c_t: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemSpec {
    pub side_a: String,
    pub guide: String,
    pub side_b: String,
    pub half_thickness_mm: f64,
}

impl Default for SystemSpec {
    fn default() -> Self {
        Self {
            side_a: "aluminium".into(),
            guide: "epoxy".into(),
            side_b: "aluminium".into(),
            half_thickness_mm: 0.5,
        }
    }
}

/// Uniform frequency grid `min, …, max` with `steps` points.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FrequencySpec {
    /// Defaults to `max_mhz / steps`, so the grid is `i · max / steps`.
    pub min_mhz: Option<f64>,
    pub max_mhz: f64,
    pub steps: usize,
}

/// Angular frequency 30 rad/µs expressed in MHz.
pub const DEFAULT_MAX_MHZ: f64 = 30.0 / (2.0 * std::f64::consts::PI);

impl Default for FrequencySpec {
    fn default() -> Self {
        Self {
            min_mhz: None,
            max_mhz: DEFAULT_MAX_MHZ,
            steps: 150,
        }
    }
}

impl FrequencySpec {
    /// Frequencies in MHz.
    pub fn grid(&self) -> Result<Vec<f64>> {
        if self.steps == 0 {
            return Err(Error::Config("frequency.steps must be at least 1".into()));
        }
        if !(self.max_mhz > 0.0) || !self.max_mhz.is_finite() {
            return Err(Error::Config(format!(
                "frequency.max_mhz must be positive, got {}",
                self.max_mhz
            )));
        }
        let min = self.min_mhz.unwrap_or(self.max_mhz / self.steps as f64);
        if !(min > 0.0) || min > self.max_mhz {
            return Err(Error::Config(format!(
                "frequency.min_mhz must lie in (0, max_mhz], got {min}"
            )));
        }
        if self.steps == 1 {
            return Ok(vec![min]);
        }
        if min == self.max_mhz {
            return Err(Error::Config("frequency range is empty but steps > 1".into()));
        }
        let span = self.max_mhz - min;
        let last = (self.steps - 1) as f64;
        Ok((0..self.steps)
            .map(|i| {
                if i == self.steps - 1 {
                    self.max_mhz
                } else {
                    min + span * i as f64 / last
                }
            })
            .collect())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputSpec {
    pub csv: bool,
    pub json: bool,
    pub plots: bool,
    /// Attenuation axis limit of the attenuation plot in Np/mm.
    pub attenuation_display_cap: f64,
}

impl Default for OutputSpec {
    fn default() -> Self {
        Self {
            csv: true,
            json: true,
            plots: true,
            attenuation_display_cap: 10.0,
        }
    }
}

/// Everything a sweep needs. Omitted fields take the defaults of the
/// reference setup: epoxy between aluminium, d = 0.5 mm, N = 50,
/// 150 steps up to 30 rad/µs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    /// Extra or overriding materials, by name.
    pub materials: BTreeMap<String, MaterialSpec>,
    pub system: SystemSpec,
    pub frequency: FrequencySpec,
    pub n_points: usize,
    pub zeta: ZetaTable<f64>,
    pub filters: FilterConfig,
    pub equilibrate: bool,
    /// Worker threads; 0 uses every core.
    pub jobs: usize,
    pub outputs: OutputSpec,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            materials: BTreeMap::new(),
            system: SystemSpec::default(),
            frequency: FrequencySpec::default(),
            n_points: 50,
            zeta: ZetaTable::default(),
            filters: FilterConfig::default(),
            equilibrate: false,
            jobs: 0,
            outputs: OutputSpec::default(),
        }
    }
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: Self = serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.check()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text =
            std::fs::read_to_string(path).map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    /// Pretty JSON with every default written out.
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    /// SHA-256 of the canonical JSON form.
    pub fn hash(&self) -> String {
        let canonical = serde_json::to_string(self).expect("config serializes");
        hex::encode(Sha256::digest(canonical.as_bytes()))
    }

    /// Checks everything except material names.
    pub fn check(&self) -> Result<()> {
        self.frequency.grid()?;
        if self.n_points < crate::assembly::MIN_ASSEMBLY_POINTS {
            return Err(Error::Config(format!(
                "n_points must be at least {}, got {}",
                crate::assembly::MIN_ASSEMBLY_POINTS,
                self.n_points
            )));
        }
        if !(self.system.half_thickness_mm > 0.0) || !self.system.half_thickness_mm.is_finite() {
            return Err(Error::Config(format!(
                "system.half_thickness_mm must be positive, got {}",
                self.system.half_thickness_mm
            )));
        }
        for (name, pair) in [
            ("non_radiating", self.zeta.non_radiating),
            ("shear_leaky", self.zeta.shear_leaky),
            ("fully_leaky", self.zeta.fully_leaky),
        ] {
            check_zeta(name, pair)?;
        }
        let f = &self.filters;
        for (name, v) in [
            ("max_attenuation_np_mm", f.max_attenuation_np_mm),
            ("interface_residual_tol", f.interface_residual_tol),
            ("dedup_tol", f.dedup_tol),
            ("amplification_tol", f.amplification_tol),
            ("infinity_guard", f.infinity_guard),
        ] {
            if !(v > 0.0) {
                return Err(Error::Config(format!("filters.{name} must be positive, got {v}")));
            }
        }
        Ok(())
    }

    /// Resolves a material name: config entries first, then presets.
    pub fn material(&self, name: &str) -> Result<Material> {
        if let Some(spec) = self.materials.get(name) {
            return Material::from_speeds(name, spec.rho, spec.c_l, spec.c_t).map_err(|e| match e {
                Error::InvalidMaterial(m) => Error::InvalidMaterial(format!("material '{name}': {m}")),
                other => other,
            });
        }
        Material::preset(name).ok_or_else(|| Error::UnknownMaterial(name.to_string()))
    }

    pub fn build_system(&self) -> Result<TriLayerSystem> {
        let s = &self.system;
        TriLayerSystem::new(
            self.material(&s.side_a)?,
            self.material(&s.guide)?,
            self.material(&s.side_b)?,
            s.half_thickness_mm,
        )
        .map_err(|e| Error::Config(e.to_string()))
    }

    pub fn solve_options(&self) -> SolveOptions {
        SolveOptions {
            n_points: self.n_points,
            filters: self.filters,
            equilibrate: self.equilibrate,
            jobs: self.jobs,
            only_cases: None,
        }
    }
}

fn check_zeta(name: &str, pair: ZetaPair<f64>) -> Result<()> {
    for z in [pair.phi, pair.psi] {
        if z.norm() == 0.0 || z.re < 0.0 || !z.re.is_finite() || !z.im.is_finite() {
            return Err(Error::Config(format!(
                "zeta.{name} must be nonzero, finite, with Re >= 0; got {z}"
            )));
        }
    }
    Ok(())
}
