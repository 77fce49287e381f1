//! Steady-state export: a JSON header and a radial CSV table.

use std::fs::File;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::Serialize;

use super::state::{RadialTable, SteadyState};
use crate::error::{Error, Result};

pub const TABLE_HEADER: [&str; 4] = ["r", "U0", "dU0", "rho0"];

#[derive(Debug, Clone, Serialize)]
pub struct SteadyHeader {
    pub k: Option<f64>,
    #[serde(rename = "M")]
    pub mass: f64,
    #[serde(rename = "E0")]
    pub e0: f64,
    #[serde(rename = "R")]
    pub radius: f64,
    #[serde(rename = "h_M")]
    pub h_m: f64,
    pub casimir: serde_json::Value,
    pub e_kin: f64,
    pub e_pot: f64,
    pub casimir_value: f64,
    pub virial_residual: f64,
    pub t_dyn: f64,
}

impl SteadyHeader {
    pub fn new(steady: &SteadyState) -> Self {
        SteadyHeader {
            k: steady.exponent(),
            mass: steady.mass,
            e0: steady.e0,
            radius: steady.radius,
            h_m: steady.h_m,
            casimir: steady.casimir.params(),
            e_kin: steady.energies.e_kin,
            e_pot: steady.energies.e_pot,
            casimir_value: steady.energies.casimir,
            virial_residual: steady.virial_residual(),
            t_dyn: steady.t_dyn(),
        }
    }
}

pub fn write_table<W: Write>(out: W, table: &RadialTable) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(TABLE_HEADER)?;
    for i in 0..table.r.len() {
        w.write_record([table.r[i], table.u0[i], table.du0[i], table.rho0[i]].iter().map(|v| format!("{v:e}")))?;
    }
    w.flush().map_err(|e| Error::io("steady table", e))
}

/// Writes `<stem>.json` and `<stem>.csv` into `dir`.
pub fn export_steady(steady: &SteadyState, dir: &Path, stem: &str) -> Result<(PathBuf, PathBuf)> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let json_path = dir.join(format!("{stem}.json"));
    let csv_path = dir.join(format!("{stem}.csv"));
    let text = serde_json::to_string_pretty(&SteadyHeader::new(steady))?;
    std::fs::write(&json_path, text + "\n").map_err(|e| Error::io(&json_path, e))?;
    let f = File::create(&csv_path).map_err(|e| Error::io(&csv_path, e))?;
    write_table(f, &steady.table)?;
    Ok((json_path, csv_path))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::steady::{build_steady, BuildOptions, CasimirFunction};

    #[test]
    fn header_and_table() {
        let s = build_steady(&CasimirFunction::polytropic(1.0).unwrap(), 1.0, &BuildOptions::default()).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let (j, c) = export_steady(&s, dir.path(), "steady").unwrap();
        let v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(j).unwrap()).unwrap();
        for key in ["k", "M", "E0", "R", "h_M"] {
            assert!(v[key].is_number(), "{key}");
        }
        let text = std::fs::read_to_string(&c).unwrap();
        assert!(text.starts_with("r,U0,dU0,rho0\n"));
        assert_eq!(text.lines().count(), s.table.r.len() + 1);
        let (_, c2) = export_steady(&s, dir.path(), "again").unwrap();
        assert_eq!(std::fs::read(c).unwrap(), std::fs::read(c2).unwrap());
    }
}
