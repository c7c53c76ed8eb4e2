//! Spectrum files: CSV `t,d` plus a JSON sidecar with the generation knobs.

use super::SyntheticSpectrum;
use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Sidecar {
    pub kappa: f64,
    #[serde(rename = "A")]
    pub a: f64,
    pub seed: u64,
    #[serde(rename = "T_max")]
    pub t_max: f64,
}

#[derive(Serialize, Deserialize)]
struct Row {
    t: f64,
    d: f64,
}

fn io_err(e: impl std::fmt::Display) -> Error {
    Error::Io(e.to_string())
}

/// `spectrum.csv` → `spectrum.json`.
pub fn sidecar_path(csv_path: &Path) -> PathBuf {
    csv_path.with_extension("json")
}

/// Writes the CSV and its sidecar. Values use Rust's shortest round-trip
/// formatting, so a read-back is exact.
pub fn write_spectrum(spec: &SyntheticSpectrum, csv_path: &Path) -> Result<()> {
    let mut w = csv::Writer::from_path(csv_path).map_err(io_err)?;
    for &(t, d) in &spec.points {
        w.serialize(Row { t, d }).map_err(io_err)?;
    }
    w.flush().map_err(io_err)?;
    let side = Sidecar { kappa: spec.weyl_const, a: spec.mv_const, seed: spec.seed, t_max: spec.t_max };
    let json = serde_json::to_string_pretty(&side).map_err(io_err)?;
    std::fs::write(sidecar_path(csv_path), json).map_err(io_err)
}

/// Reads a CSV and its sidecar; points must be sorted by t with d ≥ 0.
pub fn read_spectrum(csv_path: &Path) -> Result<SyntheticSpectrum> {
    let side: Sidecar = serde_json::from_str(&std::fs::read_to_string(sidecar_path(csv_path)).map_err(io_err)?).map_err(io_err)?;
    let mut r = csv::Reader::from_path(csv_path).map_err(io_err)?;
    let mut points = Vec::new();
    for row in r.deserialize::<Row>() {
        let row = row.map_err(io_err)?;
        if !(row.t >= 0.0 && row.d >= 0.0) || points.last().is_some_and(|&(t, _)| row.t < t) {
            return Err(Error::Io(format!("bad spectrum row t={}, d={}", row.t, row.d)));
        }
        points.push((row.t, row.d));
    }
    Ok(SyntheticSpectrum { points, weyl_const: side.kappa, mv_const: side.a, seed: side.seed, t_max: side.t_max })
}
