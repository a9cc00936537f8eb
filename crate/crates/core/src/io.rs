//! JSON file formats: matrix set inputs and verification witnesses.
//!
//! Floats travel through serde_json's shortest-round-trip formatting, so
//! every value read back compares bitwise equal to the value written.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::NonNegMatrix;
use crate::sets::OperatorSet;

pub const FORMAT_VERSION: u32 = 1;

/// On-disk form of an operator set: a list of named members sharing one
/// dimension, entries row-major.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatrixSetFile {
    pub format_version: u32,
    pub dim: usize,
    pub members: Vec<NamedMatrix>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NamedMatrix {
    pub name: String,
    pub entries: Vec<f64>,
}

impl MatrixSetFile {
    pub fn from_set(set: &OperatorSet) -> Self {
        MatrixSetFile {
            format_version: FORMAT_VERSION,
            dim: set.dim(),
            members: set
                .members()
                .iter()
                .enumerate()
                .map(|(i, m)| NamedMatrix {
                    name: format!("m{i}"),
                    entries: m.entries().to_vec(),
                })
                .collect(),
        }
    }

    /// Validates and converts the parsed file; `origin` names the source
    /// in error messages.
    pub fn into_set(self, origin: &str) -> Result<OperatorSet> {
        if self.format_version != FORMAT_VERSION {
            return Err(Error::Parse {
                path: origin.to_string(),
                message: format!(
                    "unsupported format_version {}, expected {FORMAT_VERSION}",
                    self.format_version
                ),
            });
        }
        if self.members.is_empty() {
            return Err(Error::Parse {
                path: origin.to_string(),
                message: "matrix set file has no members".to_string(),
            });
        }
        let mut mats = Vec::with_capacity(self.members.len());
        for member in &self.members {
            let mat = NonNegMatrix::new(self.dim, self.dim, member.entries.clone()).map_err(
                |e| Error::Parse {
                    path: origin.to_string(),
                    message: format!("member '{}': {e}", member.name),
                },
            )?;
            mats.push(mat);
        }
        OperatorSet::new(mats).map_err(|e| Error::Parse {
            path: origin.to_string(),
            message: e.to_string(),
        })
    }
}

pub fn load_matrix_set(path: &Path) -> Result<OperatorSet> {
    let origin = path.display().to_string();
    let text = fs::read_to_string(path).map_err(|e| Error::Io {
        path: origin.clone(),
        message: e.to_string(),
    })?;
    let file: MatrixSetFile = serde_json::from_str(&text).map_err(|e| Error::Parse {
        path: origin.clone(),
        message: e.to_string(),
    })?;
    file.into_set(&origin)
}

pub fn save_matrix_set(set: &OperatorSet, path: &Path) -> Result<()> {
    let file = MatrixSetFile::from_set(set);
    let text = serde_json::to_string_pretty(&file).map_err(|e| Error::Parse {
        path: path.display().to_string(),
        message: e.to_string(),
    })?;
    fs::write(path, text).map_err(|e| Error::Io {
        path: path.display().to_string(),
        message: e.to_string(),
    })
}

/// Serialized verification instance: everything needed to replay a check
/// deterministically, with matrices stored verbatim rather than re-drawn.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WitnessFile {
    pub format_version: u32,
    pub family: String,
    pub seed: u64,
    pub trial: u64,
    pub dim: usize,
    pub k: usize,
    pub m: usize,
    pub depth: usize,
    pub rtol: f64,
    pub weight_mode: String,
    pub weights: Vec<f64>,
    pub sets: Vec<WitnessSet>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WitnessSet {
    pub dim: usize,
    pub members: Vec<Vec<f64>>,
}
