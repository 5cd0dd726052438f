use std::fs;
use std::path::{Path, PathBuf};

use crate::run::{ResultRow, RunOutput};
use crate::BenchError;

/// Writes rows as CSV with a header and LF line endings.
pub fn write_csv(path: &Path, rows: &[ResultRow]) -> Result<(), BenchError> {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_path(path)
        .map_err(|e| BenchError::Io(format!("{}: {e}", path.display())))?;
    if rows.is_empty() {
        w.write_record([
            "round",
            "algorithm",
            "instantaneous_loss",
            "cumulative_loss",
            "cumulative_regret",
            "grad_norm",
            "wall_micros",
        ])
        .map_err(|e| BenchError::Io(e.to_string()))?;
    }
    for r in rows {
        w.serialize(r).map_err(|e| BenchError::Io(e.to_string()))?;
    }
    w.flush().map_err(|e| BenchError::Io(e.to_string()))
}

pub fn write_json(path: &Path, value: &serde_json::Value) -> Result<(), BenchError> {
    let mut text =
        serde_json::to_string_pretty(value).map_err(|e| BenchError::Io(e.to_string()))?;
    text.push('\n');
    fs::write(path, text).map_err(|e| BenchError::Io(format!("{}: {e}", path.display())))
}

/// Writes `<name>.csv` (unless there are no rows) and `<name>.summary.json`
/// into `dir` and returns the paths written.
pub fn write_outputs(dir: &Path, name: &str, out: &RunOutput) -> Result<Vec<PathBuf>, BenchError> {
    fs::create_dir_all(dir).map_err(|e| BenchError::Io(format!("{}: {e}", dir.display())))?;
    let mut written = Vec::new();
    if !out.rows.is_empty() {
        let p = dir.join(format!("{name}.csv"));
        write_csv(&p, &out.rows)?;
        written.push(p);
    }
    let p = dir.join(format!("{name}.summary.json"));
    write_json(&p, &out.summary)?;
    written.push(p);
    Ok(written)
}
