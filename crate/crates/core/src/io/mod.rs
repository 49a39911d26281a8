//! OBJ files, generated initial surfaces, the config format and run
//! directories.

mod config;
mod generate;
mod obj;
mod rundir;

pub use config::{parse_config, parse_config_str, to_config_string};
pub use generate::{generate, GeneratorSpec, SurfaceKind};
pub use obj::{load_obj, parse_obj, save_obj, to_obj_string};
pub use rundir::{metrics_row, RunDirectory, METRICS_HEADER};

use std::path::{Path, PathBuf};

use thiserror::Error;

use crate::mesh::BuildError;

#[derive(Debug, Error)]
pub enum IoError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error(transparent)]
    Build(#[from] BuildError),
    #[error("unknown config key {0:?}")]
    UnknownKey(String),
    #[error("bad value for {key}: {value:?}")]
    TypeError { key: String, value: String },
    #[error("invalid generator spec: {0}")]
    InvalidSpec(String),
}

impl IoError {
    pub(crate) fn io(path: &Path, source: std::io::Error) -> Self {
        IoError::Io {
            path: path.to_path_buf(),
            source,
        }
    }
}
