//! Result files: CSV with a header row, or a JSON array mirror.

use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;

use cholcov::io::{emit_matrix, MatrixHeader};

use crate::config::OutputFormat;
use crate::error::{CliError, Result};
use crate::simulation::ReplicateOutput;

/// Writes `rows` to `<dir>/<stem>.csv` or `<dir>/<stem>.json` and returns
/// the path.
pub fn write_rows<T: Serialize>(
    rows: &[T],
    dir: &Path,
    stem: &str,
    format: OutputFormat,
) -> Result<PathBuf> {
    fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    let path = match format {
        OutputFormat::Csv => dir.join(format!("{stem}.csv")),
        OutputFormat::Json => dir.join(format!("{stem}.json")),
    };
    match format {
        OutputFormat::Csv => {
            let mut w = csv::Writer::from_path(&path)?;
            for row in rows {
                w.serialize(row)?;
            }
            w.flush().map_err(|e| CliError::io(&path, e))?;
        }
        OutputFormat::Json => {
            let mut text = serde_json::to_string_pretty(rows)?;
            text.push('\n');
            fs::write(&path, text).map_err(|e| CliError::io(&path, e))?;
        }
    }
    Ok(path)
}

/// Renders rows as CSV text (header included).
pub fn rows_to_csv<T: Serialize>(rows: &[T]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for row in rows {
        w.serialize(row)?;
    }
    let bytes = w
        .into_inner()
        .map_err(|e| CliError::Config(e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("csv output is UTF-8"))
}

/// Writes `truth_r<k>.csv` and `<method>_r<k>.csv` under `<dir>/matrices`.
pub fn write_factors(outputs: &[ReplicateOutput], scenario: &str, dir: &Path) -> Result<()> {
    let dir = dir.join("matrices");
    fs::create_dir_all(&dir).map_err(|e| CliError::io(&dir, e))?;
    for out in outputs {
        let p = out.truth.dim();
        emit_matrix(
            out.truth.as_dense(),
            &MatrixHeader::new(p, "factor", "truth", scenario),
            dir.join(format!("truth_r{}.csv", out.replicate)),
        )?;
        for (method, fit) in &out.fits {
            if let Some(t) = fit {
                emit_matrix(
                    t.as_dense(),
                    &MatrixHeader::new(p, "factor", method.name(), scenario),
                    dir.join(format!("{}_r{}.csv", method.name(), out.replicate)),
                )?;
            }
        }
    }
    Ok(())
}
