//! Input resolution: space references (file paths or generator strings),
//! parse errors with positions, and input digests for the report envelope.

use std::path::Path;

use sha2::{Digest, Sha256};

use gh_core::io::{ProductSpecFile, SpaceFile};
use gh_core::space::GeneratorSpec;
use gh_core::{GhError, Space64};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Core(#[from] GhError),
    #[error("file not found: {path}")]
    FileNotFound { path: String },
    #[error("cannot read {path}: {message}")]
    Io { path: String, message: String },
    #[error("parse error in {path} at line {line}, column {column}: {message}")]
    Parse {
        path: String,
        line: usize,
        column: usize,
        message: String,
    },
    #[error("{0}")]
    Usage(String),
}

impl CliError {
    /// 3 for cap exhaustion (a partial report was still emitted), 2 for
    /// everything else.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Core(e) if e.is_cap_exhaustion() => 3,
            _ => 2,
        }
    }

    pub fn usage(msg: impl Into<String>) -> Self {
        CliError::Usage(msg.into())
    }
}

pub type CliResult<T> = Result<T, CliError>;

/// One resolved input with the digest recorded in reports: generator strings
/// hash their spelling, files hash their bytes.
#[derive(Clone, Debug)]
pub struct Input {
    pub source: String,
    pub sha256: String,
}

fn digest(bytes: &[u8]) -> String {
    let mut h = Sha256::new();
    h.update(bytes);
    format!("{:x}", h.finalize())
}

fn read_file(path: &str) -> CliResult<String> {
    if !Path::new(path).exists() {
        return Err(CliError::FileNotFound {
            path: path.to_string(),
        });
    }
    std::fs::read_to_string(path).map_err(|e| CliError::Io {
        path: path.to_string(),
        message: e.to_string(),
    })
}

fn parse_json<T: serde::de::DeserializeOwned>(path: &str, text: &str) -> CliResult<T> {
    serde_json::from_str(text).map_err(|e| CliError::Parse {
        path: path.to_string(),
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })
}

/// True when the reference names a generator family (`point`, or a known
/// kind before a colon), even with a bad size. Classifying by shape instead
/// of by a successful parse keeps mistakes like `cycle:5` reporting the
/// generator error rather than a file lookup failure.
fn is_generator(s: &str) -> bool {
    let t = s.trim();
    if t == "point" {
        return true;
    }
    matches!(
        t.split_once(':').map(|(kind, _)| kind),
        Some("simplex" | "cycle" | "path" | "point")
    )
}

/// Resolves a space reference: a generator string (`simplex:4`, `cycle:8`,
/// `path:5`, `point`) or a path to a space file. Generator names shadow
/// files of the same name.
pub fn load_space(reference: &str, tolerance: f64) -> CliResult<(Space64, Input)> {
    if is_generator(reference) {
        let spec: GeneratorSpec = reference.parse()?;
        let space = spec.generate::<f64>();
        let input = Input {
            source: reference.to_string(),
            sha256: digest(reference.as_bytes()),
        };
        return Ok((space, input));
    }
    let text = read_file(reference)?;
    let file: SpaceFile = parse_json(reference, &text)?;
    let space = file.to_space::<f64>(tolerance)?;
    let input = Input {
        source: reference.to_string(),
        sha256: digest(text.as_bytes()),
    };
    Ok((space, input))
}

/// Reads and parses a JSON file of any report-input shape, returning the
/// digest alongside.
pub fn load_json<T: serde::de::DeserializeOwned>(path: &str) -> CliResult<(T, Input)> {
    let text = read_file(path)?;
    let value = parse_json(path, &text)?;
    let input = Input {
        source: path.to_string(),
        sha256: digest(text.as_bytes()),
    };
    Ok((value, input))
}

pub fn load_product_spec(path: &str) -> CliResult<(ProductSpecFile, Input)> {
    load_json(path)
}

/// Parses a comma-separated list of nonnegative reals, as in `--a 1,3`.
pub fn parse_weight_list(flag: &str, s: &str) -> CliResult<Vec<f64>> {
    let mut out = Vec::new();
    for part in s.split(',') {
        let trimmed = part.trim();
        let v: f64 = trimmed
            .parse()
            .map_err(|_| CliError::usage(format!("--{flag}: `{trimmed}` is not a number")))?;
        out.push(v);
    }
    if out.is_empty() {
        return Err(CliError::usage(format!("--{flag}: empty list")));
    }
    Ok(out)
}
