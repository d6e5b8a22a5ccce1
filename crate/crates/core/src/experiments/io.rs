//! On-disk artifacts: diagnostics CSV, field snapshots with JSON sidecars, JSON reports.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::diagnostics::{DiagnosticsRecord, CSV_COLUMNS, SCHEMA_VERSION};
use crate::error::Result;
use crate::galerkin::GalerkinRecord;
use crate::grid::Grid;
use crate::params::ModelParams;
use crate::state::StateBundle;

pub const DIAGNOSTICS_FILE: &str = "diagnostics.csv";
pub const SUMMARY_FILE: &str = "summary.json";
pub const REPORT_FILE: &str = "report.json";
pub const SNAPSHOT_DIR: &str = "snapshots";

pub fn ensure_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir)?;
    Ok(())
}

/// Writes records under the fixed [`CSV_COLUMNS`] header.
pub fn write_diagnostics(path: &Path, records: &[DiagnosticsRecord]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(CSV_COLUMNS)?;
    for rec in records {
        w.write_record(rec.csv_values().iter().map(|v| v.to_string()))?;
    }
    w.flush()?;
    Ok(())
}

/// Reads a diagnostics CSV back into rows of numbers, checking the header.
pub fn read_diagnostics(path: &Path) -> Result<Vec<Vec<f64>>> {
    let mut r = csv::Reader::from_path(path)?;
    let header: Vec<String> = r.headers()?.iter().map(str::to_string).collect();
    if header != CSV_COLUMNS {
        return Err(crate::Error::Config(format!(
            "{} does not match diagnostics schema {SCHEMA_VERSION}",
            path.display()
        )));
    }
    let mut rows = Vec::new();
    for row in r.records() {
        let row = row?;
        let vals = row
            .iter()
            .map(|s| s.parse::<f64>().map_err(|e| crate::Error::Config(format!("bad value `{s}`: {e}"))))
            .collect::<Result<Vec<f64>>>()?;
        rows.push(vals);
    }
    Ok(rows)
}

pub fn write_galerkin_records(path: &Path, records: &[GalerkinRecord]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    for rec in records {
        w.serialize(rec)?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Serialize)]
struct SnapshotMeta<'a> {
    schema_version: u32,
    index: usize,
    t: f64,
    grid: &'a Grid,
    params: &'a ModelParams,
    columns: Vec<&'static str>,
    elliptic_residual: f64,
}

/// Writes `snapshot_{index:04}.csv` with columns `x[, y], n, w, mu, p` and a JSON
/// sidecar of the same stem.
pub fn write_snapshot(dir: &Path, index: usize, state: &StateBundle, params: &ModelParams) -> Result<PathBuf> {
    ensure_dir(dir)?;
    let stem = format!("snapshot_{index:04}");
    let csv_path = dir.join(format!("{stem}.csv"));
    let grid = *state.n.grid();
    let mut columns = vec!["x"];
    if grid.dim() == 2 {
        columns.push("y");
    }
    columns.extend(["n", "w", "mu", "p"]);
    let mut w = csv::Writer::from_path(&csv_path)?;
    w.write_record(&columns)?;
    for idx in 0..grid.len() {
        let c = grid.center(idx);
        let mut row = vec![c[0]];
        if grid.dim() == 2 {
            row.push(c[1]);
        }
        row.extend([state.n[idx], state.w[idx], state.mu[idx], state.p[idx]]);
        w.write_record(row.iter().map(|v| v.to_string()))?;
    }
    w.flush()?;
    let meta = SnapshotMeta {
        schema_version: SCHEMA_VERSION,
        index,
        t: state.t,
        grid: &grid,
        params,
        columns,
        elliptic_residual: state.elliptic_residual,
    };
    write_json(&dir.join(format!("{stem}.json")), &meta)?;
    Ok(csv_path)
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut f = fs::File::create(path)?;
    serde_json::to_writer_pretty(&mut f, value)?;
    f.write_all(b"\n")?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::diagnostics::DiagnosticsRecord;
    use crate::stepper::{assemble_state, FaceMobility};
    use crate::{elliptic::EllipticConfig, Field};

    #[test]
    fn diagnostics_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let g = Grid::new_1d(1.0, 16).unwrap();
        let p = ModelParams::default();
        let st = assemble_state(Field::from_fn(g, |x| 0.5 + 0.1 * x[0]), None, 0.0, &p, &EllipticConfig::default()).unwrap();
        let rec = DiagnosticsRecord::from_state(&st, &p, FaceMobility::Upwind);
        let path = dir.path().join(DIAGNOSTICS_FILE);
        write_diagnostics(&path, &[rec.clone(), rec.clone()]).unwrap();
        let rows = read_diagnostics(&path).unwrap();
        assert_eq!(rows.len(), 2);
        assert_eq!(rows[0], rec.csv_values().to_vec());
    }

    #[test]
    fn snapshot_columns_follow_dimension() {
        let dir = tempfile::tempdir().unwrap();
        let p = ModelParams::default();
        let g = Grid::new_2d(1.0, 1.0, 4, 5).unwrap();
        let st = assemble_state(Field::constant(g, 0.5), None, 0.0, &p, &EllipticConfig::default()).unwrap();
        let path = write_snapshot(dir.path(), 3, &st, &p).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        assert_eq!(text.lines().next().unwrap(), "x,y,n,w,mu,p");
        assert_eq!(text.lines().count(), 21);
        let meta: serde_json::Value =
            serde_json::from_str(&std::fs::read_to_string(dir.path().join("snapshot_0003.json")).unwrap()).unwrap();
        assert_eq!(meta["index"], 3);
    }
}
