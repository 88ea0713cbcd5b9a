//! Resolution of a command's input: a connection file, a square file or a catalog name.

use std::path::Path;

use anyhow::Context;
use commsq::catalog;
use commsq::connection::{BiUnitaryConnection, CONNECTION_SCHEMA};
use commsq::flatness::sequence_for;
use commsq::paths::{Direction, StartVertexSet};
use commsq::square::{iterate, CommutingSquare, DoubleSequence, SQUARE_SCHEMA};

use crate::RunConfig;

/// Malformed or missing input; exits with the input-error code.
#[derive(Debug)]
pub struct InputError(pub String);

impl std::fmt::Display for InputError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for InputError {}

pub struct Input {
    pub name: String,
    pub connection: BiUnitaryConnection,
    pub start: StartVertexSet,
}

impl Input {
    pub fn resolve(arg: &str, start: Option<Vec<usize>>, run: &RunConfig) -> anyhow::Result<Self> {
        let path = Path::new(arg);
        if path.is_file() {
            return Self::from_file(path, start);
        }
        if arg.ends_with(".json") || arg.contains(std::path::MAIN_SEPARATOR) {
            return Err(InputError(format!("no such file: {arg}")).into());
        }
        let f = catalog::build_named(arg, &run.solver())?;
        let start = match start {
            Some(m) => StartVertexSet::new(f.connection.system(), m)?,
            None => f.start,
        };
        Ok(Input { name: f.name, connection: f.connection, start })
    }

    fn from_file(path: &Path, start: Option<Vec<usize>>) -> anyhow::Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        let value: serde_json::Value = serde_json::from_str(&text)?;
        let name = path.file_stem().map_or_else(|| "input".into(), |s| s.to_string_lossy().into_owned());
        match value.get("schema").and_then(|s| s.as_str()) {
            Some(CONNECTION_SCHEMA) => {
                let connection = BiUnitaryConnection::from_json(&value)?;
                let start = match start {
                    Some(m) => StartVertexSet::new(connection.system(), m)?,
                    None => StartVertexSet::star(connection.system()),
                };
                Ok(Input { name, connection, start })
            }
            Some(SQUARE_SCHEMA) => {
                if start.is_some() {
                    return Err(InputError("--start applies to connection files only".into()).into());
                }
                let ds = iterate(&CommutingSquare::from_json(&value)?)?;
                Ok(Input { name, connection: ds.connection().clone(), start: ds.start().clone() })
            }
            other => Err(InputError(format!("{}: unrecognised schema {other:?}", path.display())).into()),
        }
    }

    pub fn sequence(&self, dir: Direction) -> anyhow::Result<DoubleSequence> {
        log::info!("{}: {:?} subfactor", self.name, dir);
        Ok(sequence_for(&self.connection, &self.start, dir)?)
    }
}
