//! On-disk formats: PPM color frames, PFM depth frames, TUM trajectories,
//! dataset manifests and flat `key = value` run configuration.
//!
//! All three image/trajectory formats are implemented from their public
//! specs with no codec dependencies; byte-level layouts are documented in
//! `docs/FORMATS.md`.

mod config;
mod dataset;
mod pfm;
mod ppm;
mod tum;

pub use config::{parse_key_values, RunConfig};
pub use dataset::{load_dataset, write_dataset, Dataset, DatasetManifest};
pub use pfm::{read_pfm, write_pfm};
pub use ppm::{read_ppm, write_ppm};
pub use tum::{read_tum, write_tum};

use std::fmt;
use std::path::{Path, PathBuf};

#[derive(Debug)]
pub enum DataError {
    Io { path: PathBuf, source: std::io::Error },
    /// Malformed content; `detail` carries the line or byte offset.
    Format { path: PathBuf, detail: String },
}

impl DataError {
    pub fn io(path: &Path, source: std::io::Error) -> Self {
        DataError::Io { path: path.to_path_buf(), source }
    }

    pub fn format(path: &Path, detail: impl Into<String>) -> Self {
        DataError::Format { path: path.to_path_buf(), detail: detail.into() }
    }
}

impl fmt::Display for DataError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DataError::Io { path, source } => write!(f, "{}: {source}", path.display()),
            DataError::Format { path, detail } => write!(f, "{}: {detail}", path.display()),
        }
    }
}

impl std::error::Error for DataError {}
