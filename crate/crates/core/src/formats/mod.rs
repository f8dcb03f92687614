//! File formats: tensor CSV, segments CSV, election config JSON, plus the
//! training-clip extraction utility.
//!
//! Every writer produces a canonical byte stream and replaces its target
//! atomically, so a failed write never leaves a partial file behind.

mod clips;
pub(crate) mod config;
mod segments;
mod tensor;

use std::fs;
use std::io::{self, BufWriter, Write};
use std::path::Path;

pub use clips::{extract_clips, ClipSample};
pub use config::{read_config, write_config, ElectionConfig, Fallback, ViewWeights};
pub use config::{parse_config_str, render_config, DEFAULT_MERGE_GAP_S, DEFAULT_THRESHOLD};
pub use segments::{parse_segments, read_segments_csv, render_segments, write_segments_csv};
pub use tensor::{parse_tensor, read_tensor_csv, render_tensor, write_tensor_csv};

use crate::error::Result;

/// Writes `path` through a temporary sibling file that is renamed into place
/// only after `fill` succeeds.
pub(crate) fn write_atomic<F>(path: &Path, fill: F) -> Result<()>
where
    F: FnOnce(&mut dyn Write) -> Result<()>,
{
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    {
        let mut w = BufWriter::new(tmp.as_file_mut());
        fill(&mut w)?;
        w.flush()?;
    }
    tmp.persist(path).map_err(|e| e.error)?;
    Ok(())
}

pub(crate) fn read_to_string(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| {
        io::Error::new(e.kind(), format!("{}: {e}", path.display())).into()
    })
}
