//! On-disk cache of synthesized impedances.
//!
//! Files are named by the SHA-256 of the geometry block (serialized as JSON)
//! plus the direct-link flag; terminations, R0 and optimizer settings do not
//! affect the impedances and are not part of the key.

use std::path::{Path, PathBuf};

use risopt::em::{assemble_impedances, build_grid_scenario, GeometryConfig};
use risopt::ImpedanceSet;
use sha2::{Digest, Sha256};

use crate::config::ScenarioConfig;
use crate::error::CliError;

pub const CACHE_DIR_ENV: &str = "RIS_OPT_CACHE_DIR";

/// `$RIS_OPT_CACHE_DIR`, or `ris-opt-cache` under the system temp directory.
pub fn cache_dir() -> PathBuf {
    std::env::var_os(CACHE_DIR_ENV)
        .map(PathBuf::from)
        .unwrap_or_else(|| std::env::temp_dir().join("ris-opt-cache"))
}

pub fn cache_key(geometry: &GeometryConfig, include_direct_link: bool) -> String {
    let mut hasher = Sha256::new();
    hasher.update(serde_json::to_vec(geometry).expect("geometry serializes"));
    hasher.update(if include_direct_link { b"\x01" } else { b"\x00" });
    hex::encode(hasher.finalize())
}

/// Impedances for `geometry`, from `dir` when present, otherwise
/// synthesized and stored there.
pub fn cached_impedances(
    dir: &Path,
    geometry: &GeometryConfig,
    cfg: &ScenarioConfig,
) -> Result<ImpedanceSet, CliError> {
    let path = dir.join(format!(
        "{}.json",
        cache_key(geometry, cfg.include_direct_link)
    ));
    if path.exists() {
        match ImpedanceSet::load(&path) {
            Ok(set) => {
                log::info!("impedances from cache {}", path.display());
                return Ok(set);
            }
            Err(e) => log::warn!("ignoring unreadable cache file {}: {e}", path.display()),
        }
    }
    let scenario = build_grid_scenario(geometry, cfg.z_g(), cfg.z_l())?;
    log::info!("synthesizing impedances for {} RIS elements", scenario.n_ris());
    let set = assemble_impedances(&scenario, cfg.include_direct_link)?;
    std::fs::create_dir_all(dir).map_err(CliError::io(format!("creating {}", dir.display())))?;
    // write then rename, so concurrent runs never see a partial file
    let tmp = path.with_extension(format!("json.{}.tmp", std::process::id()));
    set.save(&tmp)?;
    std::fs::rename(&tmp, &path).map_err(CliError::io(format!("writing {}", path.display())))?;
    Ok(set)
}

/// Impedances for the configured scenario: the configured impedance file if
/// any, otherwise the cache.
pub fn scenario_impedances(cfg: &ScenarioConfig) -> Result<ImpedanceSet, CliError> {
    match &cfg.impedance_file {
        Some(path) => Ok(ImpedanceSet::load(path)?),
        None => cached_impedances(&cache_dir(), &cfg.geometry, cfg),
    }
}
