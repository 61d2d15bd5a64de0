//! Report envelopes and frame files.
//!
//! Reports carry the tool version and a SHA-256 fingerprint of every input
//! frame. Nothing time- or host-dependent is recorded, so identical inputs
//! give byte-identical output.

use std::collections::BTreeMap;
use std::path::Path;

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::duality::{VectorFrame, VECTOR_ROLE};
use crate::error::{Error, Result};
use crate::frames::AnalysisFrame;

pub const TOOL_NAME: &str = "pframe";
pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

/// Hex SHA-256 of the compact JSON serialisation.
pub fn fingerprint<T: Serialize>(value: &T) -> Result<String> {
    let bytes = serde_json::to_vec(value)?;
    Ok(hex::encode(Sha256::digest(&bytes)))
}

#[derive(Clone, Debug, Serialize)]
pub struct Report<T: Serialize> {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: String,
    /// Input name to frame fingerprint.
    pub inputs: BTreeMap<String, String>,
    pub config: serde_json::Value,
    pub result: T,
}

impl<T: Serialize> Report<T> {
    pub fn new(command: &str, config: serde_json::Value, result: T) -> Self {
        Self {
            tool: TOOL_NAME,
            version: TOOL_VERSION,
            command: command.to_string(),
            inputs: BTreeMap::new(),
            config,
            result,
        }
    }

    pub fn with_input<F: Serialize>(mut self, name: &str, frame: &F) -> Result<Self> {
        self.inputs.insert(name.to_string(), fingerprint(frame)?);
        Ok(self)
    }

    pub fn to_json(&self) -> Result<String> {
        let mut text = serde_json::to_string_pretty(self)?;
        text.push('\n');
        Ok(text)
    }
}

/// Either role of the frame file schema.
#[derive(Clone, Debug, PartialEq)]
pub enum FrameFile {
    Analysis(AnalysisFrame),
    Vector(VectorFrame),
}

impl FrameFile {
    pub fn from_json(text: &str) -> Result<Self> {
        let value: serde_json::Value = serde_json::from_str(text)?;
        let role = value.get("role").and_then(|r| r.as_str());
        if role == Some(VECTOR_ROLE) {
            Ok(FrameFile::Vector(serde_json::from_value(value)?))
        } else {
            Ok(FrameFile::Analysis(serde_json::from_value(value)?))
        }
    }

    pub fn to_json(&self) -> Result<String> {
        let mut text = match self {
            FrameFile::Analysis(f) => serde_json::to_string_pretty(f)?,
            FrameFile::Vector(f) => serde_json::to_string_pretty(f)?,
        };
        text.push('\n');
        Ok(text)
    }

    pub fn fingerprint(&self) -> Result<String> {
        match self {
            FrameFile::Analysis(f) => fingerprint(f),
            FrameFile::Vector(f) => fingerprint(f),
        }
    }

    pub fn read(path: &Path) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json()?)?;
        Ok(())
    }

    pub fn into_analysis(self) -> Result<AnalysisFrame> {
        match self {
            FrameFile::Analysis(f) => Ok(f),
            FrameFile::Vector(_) => Err(Error::Schema(
                "expected an analysis_frame, found a vector_frame".into(),
            )),
        }
    }

    pub fn into_vector(self) -> Result<VectorFrame> {
        match self {
            FrameFile::Vector(f) => Ok(f),
            FrameFile::Analysis(_) => Err(Error::Schema(
                "expected a vector_frame, found an analysis_frame".into(),
            )),
        }
    }
}
