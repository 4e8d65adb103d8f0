//! On-disk layout of experiment results.
//!
//! ```text
//! <out>/summary.txt
//! <out>/<experiment>/manifest.json
//! <out>/<experiment>/<series>.csv
//! <out>/<experiment>/<snapshot>.msk
//! <out>/<experiment>/plot.py
//! ```

use std::path::{Path, PathBuf};

use muskat_core::io::encode_snapshot;

use crate::error::{HarnessError, Result};
use crate::plots::experiment_script;
use crate::result::RunResult;

fn write(path: &Path, bytes: impl AsRef<[u8]>) -> Result<()> {
    std::fs::write(path, bytes).map_err(|e| HarnessError::Io {
        path: path.to_path_buf(),
        source: e,
    })
}

fn create_dir(path: &Path) -> Result<()> {
    std::fs::create_dir_all(path).map_err(|e| HarnessError::Io {
        path: path.to_path_buf(),
        source: e,
    })
}

/// Write one experiment below `out`; returns its directory.
pub fn write_result(out: &Path, result: &RunResult) -> Result<PathBuf> {
    let dir = out.join(&result.manifest.name);
    create_dir(&dir)?;
    let mut manifest = result.manifest.clone();
    manifest.series_files.clear();
    manifest.snapshot_files.clear();
    for (name, series) in &result.series {
        let file = format!("{name}.csv");
        write(&dir.join(&file), series.to_csv())?;
        manifest.series_files.push(file);
    }
    for (name, field) in &result.snapshots {
        let file = format!("{name}.msk");
        write(&dir.join(&file), encode_snapshot(field))?;
        manifest.snapshot_files.push(file);
    }
    let doc = serde_json::json!({
        "manifest": manifest,
        "verdicts": result.verdicts,
    });
    write(&dir.join("manifest.json"), serde_json::to_string_pretty(&doc)? + "\n")?;
    write(&dir.join("plot.py"), experiment_script(&manifest))?;
    Ok(dir)
}

/// Write every result plus `summary.txt`.
pub fn write_battery(out: &Path, results: &[RunResult], summary: &str) -> Result<()> {
    create_dir(out)?;
    for r in results {
        write_result(out, r)?;
    }
    write(&out.join("summary.txt"), summary)
}
