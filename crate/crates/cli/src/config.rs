//! TOML scenario configuration.
//!
//! ```toml
//! r0_ohm = 0.001
//! bounds_ohm = [-10000.0, 10000.0]
//! z_g = [50.0, 50.0]
//! z_l = [50.0, 50.0]
//! coupling_aware = true
//! include_direct_link = false
//! # impedance_file = "impedances.json"
//!
//! [geometry]
//! frequency_hz = 3.5e9
//! ris = { rows = 14, cols = 14, spacing_wavelengths = 0.25 }
//! element = { length_wavelengths = 0.03125, radius_wavelengths = 0.002 }
//! tx = { position_m = [10.0, -1.0, 0.0], length_wavelengths = 0.03125 }
//! rx = { position_m = [10.0, 99.0, 0.0], length_wavelengths = 0.03125 }
//!
//! [optimizer]
//! max_outer_iters = 10000
//!
//! [sweep]
//! spacings_wavelengths = [0.5, 0.25, 0.125]
//! element_length_equals_spacing = false
//! ```
//!
//! `ris` is either `{ rows, cols, spacing_wavelengths }` or
//! `{ aperture_m, spacing_wavelengths }`. Every table except `geometry` may
//! be omitted.

use std::path::{Path, PathBuf};

use num_complex::Complex64;
use risopt::em::{GeometryConfig, RisLayout};
use risopt::{Bounds, OptimizerConfig};
use serde::{Deserialize, Serialize};

use crate::error::CliError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    #[serde(default = "default_r0")]
    pub r0_ohm: f64,
    #[serde(default = "default_bounds")]
    pub bounds_ohm: [f64; 2],
    #[serde(default = "default_termination")]
    pub z_g: [f64; 2],
    #[serde(default = "default_termination")]
    pub z_l: [f64; 2],
    /// Optimize with RIS mutual coupling. Turning off either this or
    /// `optimizer.coupling_aware` gives a coupling-unaware run.
    #[serde(default = "default_true")]
    pub coupling_aware: bool,
    #[serde(default)]
    pub include_direct_link: bool,
    /// Precomputed impedances to use instead of synthesizing them.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub impedance_file: Option<PathBuf>,
    pub geometry: GeometryConfig,
    #[serde(default)]
    pub optimizer: OptimizerConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepConfig>,
    /// Settings of the approximation-based benchmark method. Recorded for
    /// completeness; no command uses them.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub benchmark: Option<BenchmarkConfig>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub spacings_wavelengths: Vec<f64>,
    /// Set each element's length to the spacing instead of the
    /// configured element length.
    #[serde(default)]
    pub element_length_equals_spacing: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BenchmarkConfig {
    #[serde(default = "default_m")]
    pub m: usize,
    #[serde(default = "default_delta")]
    pub delta: f64,
}

impl Default for BenchmarkConfig {
    fn default() -> Self {
        Self {
            m: default_m(),
            delta: default_delta(),
        }
    }
}

fn default_r0() -> f64 {
    1e-3
}

fn default_bounds() -> [f64; 2] {
    [-1e4, 1e4]
}

fn default_termination() -> [f64; 2] {
    [50.0, 50.0]
}

fn default_true() -> bool {
    true
}

fn default_m() -> usize {
    50
}

fn default_delta() -> f64 {
    0.0039
}

impl ScenarioConfig {
    /// The 196-element reference setup at R0 = 1 mΩ.
    pub fn reference() -> Self {
        Self {
            r0_ohm: default_r0(),
            bounds_ohm: default_bounds(),
            z_g: default_termination(),
            z_l: default_termination(),
            coupling_aware: true,
            include_direct_link: false,
            impedance_file: None,
            geometry: GeometryConfig::reference(),
            optimizer: OptimizerConfig::default(),
            sweep: None,
            benchmark: None,
        }
    }

    /// The reference setup on a 15 cm square aperture, swept over
    /// λ/2, λ/4 and λ/8.
    pub fn spacing_sweep(element_length_equals_spacing: bool) -> Self {
        let mut cfg = Self::reference();
        cfg.geometry.ris = RisLayout::Aperture {
            aperture_m: 0.15,
            spacing_wavelengths: 0.25,
        };
        cfg.sweep = Some(SweepConfig {
            spacings_wavelengths: vec![0.5, 0.25, 0.125],
            element_length_equals_spacing,
        });
        cfg
    }

    pub fn from_toml(text: &str) -> Result<Self, CliError> {
        let cfg: Self = toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_toml(&self) -> Result<String, CliError> {
        toml::to_string(self).map_err(|e| CliError::Config(e.to_string()))
    }

    /// Reads and validates a config file. A relative `impedance_file` is
    /// resolved against the config file's directory.
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        let mut cfg = Self::from_toml(&text)?;
        if let (Some(file), Some(dir)) = (&cfg.impedance_file, path.parent()) {
            if file.is_relative() {
                cfg.impedance_file = Some(dir.join(file));
            }
        }
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), CliError> {
        if !(self.r0_ohm >= 0.0 && self.r0_ohm.is_finite()) {
            return Err(CliError::Config(format!("r0_ohm must be >= 0, got {}", self.r0_ohm)));
        }
        self.bounds()?;
        for (name, z) in [("z_g", self.z_g), ("z_l", self.z_l)] {
            if !z.iter().all(|v| v.is_finite()) {
                return Err(CliError::Config(format!("{name} must be finite")));
            }
        }
        let g = &self.geometry;
        let dims = [
            ("geometry.frequency_hz", g.frequency_hz),
            ("geometry.ris spacing_wavelengths", g.ris.spacing_wavelengths()),
            ("geometry.element.length_wavelengths", g.element.length_wavelengths),
            ("geometry.element.radius_wavelengths", g.element.radius_wavelengths),
            ("geometry.tx.length_wavelengths", g.tx.length_wavelengths),
            ("geometry.tx.radius_wavelengths", g.tx.radius_wavelengths),
            ("geometry.rx.length_wavelengths", g.rx.length_wavelengths),
            ("geometry.rx.radius_wavelengths", g.rx.radius_wavelengths),
        ];
        for (name, v) in dims {
            if !(v > 0.0 && v.is_finite()) {
                return Err(CliError::Config(format!("{name} must be positive, got {v}")));
            }
        }
        if let Some(sweep) = &self.sweep {
            if sweep.spacings_wavelengths.is_empty() {
                return Err(CliError::Config("sweep.spacings_wavelengths is empty".into()));
            }
            if let Some(bad) = sweep.spacings_wavelengths.iter().find(|s| !(**s > 0.0)) {
                return Err(CliError::Config(format!("sweep spacing must be positive, got {bad}")));
            }
        }
        self.optimizer.validate().map_err(CliError::from_config)
    }

    pub fn bounds(&self) -> Result<Bounds, CliError> {
        Bounds::new(self.bounds_ohm[0], self.bounds_ohm[1]).map_err(CliError::from_config)
    }

    pub fn z_g(&self) -> Complex64 {
        Complex64::new(self.z_g[0], self.z_g[1])
    }

    pub fn z_l(&self) -> Complex64 {
        Complex64::new(self.z_l[0], self.z_l[1])
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trips_through_toml() {
        let mut cfg = ScenarioConfig::spacing_sweep(true);
        cfg.impedance_file = Some("z.json".into());
        cfg.benchmark = Some(BenchmarkConfig::default());
        cfg.optimizer.mu_init = 1e25;
        cfg.r0_ohm = 1e-4;
        let text = cfg.to_toml().unwrap();
        assert_eq!(ScenarioConfig::from_toml(&text).unwrap(), cfg);
        let reference = ScenarioConfig::reference();
        assert_eq!(
            ScenarioConfig::from_toml(&reference.to_toml().unwrap()).unwrap(),
            reference
        );
    }

    #[test]
    fn minimal_file_takes_defaults() {
        let cfg = ScenarioConfig::from_toml(
            r#"
            [geometry]
            frequency_hz = 3.5e9
            ris = { aperture_m = 0.15, spacing_wavelengths = 0.25 }
            element = { length_wavelengths = 0.03125 }
            tx = { position_m = [10.0, -1.0, 0.0], length_wavelengths = 0.03125 }
            rx = { position_m = [10.0, 99.0, 0.0], length_wavelengths = 0.03125 }
            "#,
        )
        .unwrap();
        assert_eq!(cfg.r0_ohm, 1e-3);
        assert_eq!(cfg.bounds_ohm, [-1e4, 1e4]);
        assert_eq!(cfg.optimizer, OptimizerConfig::default());
        assert_eq!(cfg.geometry.element.radius_wavelengths, 1.0 / 500.0);
        assert!(cfg.coupling_aware && !cfg.include_direct_link);
    }

    #[test]
    fn rejects_bad_values() {
        let base = ScenarioConfig::reference();
        let cases: Vec<Box<dyn Fn(&mut ScenarioConfig)>> = vec![
            Box::new(|c| c.bounds_ohm = [1.0, -1.0]),
            Box::new(|c| c.r0_ohm = -1.0),
            Box::new(|c| c.geometry.frequency_hz = 0.0),
            Box::new(|c| c.geometry.element.length_wavelengths = -0.1),
            Box::new(|c| c.optimizer.kappa = 1.5),
            Box::new(|c| {
                c.sweep = Some(SweepConfig {
                    spacings_wavelengths: vec![],
                    element_length_equals_spacing: false,
                })
            }),
        ];
        for mutate in cases {
            let mut cfg = base.clone();
            mutate(&mut cfg);
            assert!(matches!(cfg.validate(), Err(CliError::Config(_))), "{cfg:?}");
        }
    }

    #[test]
    fn unknown_keys_are_config_errors() {
        let mut text = ScenarioConfig::reference().to_toml().unwrap();
        text.insert_str(0, "r0 = 1.0\n");
        assert!(matches!(ScenarioConfig::from_toml(&text), Err(CliError::Config(_))));
    }
}
