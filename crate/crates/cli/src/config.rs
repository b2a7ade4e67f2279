//! Optional TOML config file, one table per command.
//!
//! ```toml
//! [remesh]
//! weights = "blob.shw"
//! stages = "30:25,50:7"
//! refine = 5
//! ```

use std::path::{Path, PathBuf};

use serde::Deserialize;

use harmonic_remesh::diffusion::Stage;
use harmonic_remesh::Error;

#[derive(Debug, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FileConfig {
    pub decompose: DecomposeFile,
    pub remesh: RemeshFile,
    pub remesh2d: Remesh2dFile,
    pub metrics: MetricsFile,
}

#[derive(Debug, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DecomposeFile {
    pub input: Option<PathBuf>,
    pub out: Option<PathBuf>,
    pub nmax: Option<usize>,
    pub hemispheroid: Option<bool>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RemeshFile {
    pub weights: Option<PathBuf>,
    pub mesh: Option<PathBuf>,
    pub out: Option<PathBuf>,
    pub trace: Option<PathBuf>,
    pub refine: Option<usize>,
    pub stages: Option<String>,
    pub gamma: Option<f64>,
    pub dt_scale: Option<f64>,
    pub eps_eta: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Remesh2dFile {
    pub input: Option<PathBuf>,
    pub out: Option<PathBuf>,
    pub report: Option<PathBuf>,
    pub max_segments: Option<usize>,
    pub nmax: Option<usize>,
    pub imax: Option<usize>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MetricsFile {
    pub input: Option<PathBuf>,
    pub compare: Option<PathBuf>,
    pub faces: Option<PathBuf>,
    pub vertices: Option<PathBuf>,
}

impl FileConfig {
    pub fn load(path: &Path) -> Result<Self, Error> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Io {
            path: path.to_path_buf(),
            source: e,
        })?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self, Error> {
        toml::from_str(text).map_err(|e| Error::Parse {
            line: None,
            message: e.to_string(),
        })
    }
}

/// Parses `nmax:imax[,nmax:imax...]`.
pub fn parse_stages(text: &str) -> Result<Vec<Stage>, String> {
    text.split(',')
        .map(|item| {
            let (n, i) = item
                .trim()
                .split_once(':')
                .ok_or_else(|| format!("stage {item:?} is not of the form nmax:imax"))?;
            let parse = |s: &str| s.trim().parse::<usize>().map_err(|e| format!("stage {item:?}: {e}"));
            Ok(Stage::new(parse(n)?, parse(i)?))
        })
        .collect()
}
