//! Versioned JSON envelopes for written artifacts.

use std::path::Path;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const REPORT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Envelope<T> {
    pub ads_report_version: u32,
    #[serde(flatten)]
    pub body: T,
}

/// Pretty JSON of `body` inside the envelope, newline-terminated.
pub fn to_json<T: Serialize>(body: &T) -> Result<String> {
    let mut s = serde_json::to_string_pretty(&Envelope {
        ads_report_version: REPORT_VERSION,
        body,
    })?;
    s.push('\n');
    Ok(s)
}

pub fn write_json<T: Serialize>(path: &Path, body: &T) -> Result<()> {
    std::fs::write(path, to_json(body)?)?;
    Ok(())
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let text = std::fs::read_to_string(path).map_err(|e| match e.kind() {
        std::io::ErrorKind::NotFound => Error::FileNotFound(path.to_path_buf()),
        _ => e.into(),
    })?;
    let artifact = |message: String| Error::Artifact {
        path: path.display().to_string(),
        message,
    };
    let env: Envelope<T> = serde_json::from_str(&text).map_err(|e| artifact(e.to_string()))?;
    if env.ads_report_version != REPORT_VERSION {
        return Err(artifact(format!("unsupported report version {}", env.ads_report_version)));
    }
    Ok(env.body)
}
