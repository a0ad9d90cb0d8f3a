pub mod cluster;
pub mod compare;
pub mod fixtures;
pub mod score;
pub mod smooth;
pub mod stats;

use std::path::{Path, PathBuf};

use anyhow::{Context, Result};

/// Write data to `--output` if given, else stdout.
pub fn emit(output: Option<&PathBuf>, data: &str) -> Result<()> {
    match output {
        Some(path) => {
            std::fs::write(path, data).with_context(|| format!("writing {}", path.display()))?
        }
        None => {
            use std::io::Write;
            std::io::stdout().write_all(data.as_bytes())?;
        }
    }
    Ok(())
}

pub fn read_rttm_file(
    path: &Path,
) -> Result<std::collections::BTreeMap<String, diarkit::rttm::Timeline>> {
    let text =
        std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    diarkit::rttm::parse_rttm(&text).with_context(|| format!("parsing {}", path.display()))
}
