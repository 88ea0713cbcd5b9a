//! Named fixtures with their expected results, read from `catalog.json` in the data directory.

use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use crate::connection::{solve_connection, BiUnitaryConnection, SolverOptions};
use crate::error::{Error, Result};
use crate::flatness::sequence_for;
use crate::paths::{BipartiteGraph, Direction, StartVertexSet};
use crate::square::{cut_by_projection, iterate, CommutingSquare, DoubleSequence};

use super::{dynkin, fourier_matrix, ghj_system, hadamard_square, self_system};

pub const CATALOG_SCHEMA: &str = "commsq/catalog/v1";

/// Environment variable naming the data directory.
pub const DATA_DIR_VAR: &str = "COMMSQ_DATA_DIR";

const BUILTIN: &str = include_str!("../../../../data/catalog.json");

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Provenance {
    /// Stated in the literature the fixture reproduces.
    Published,
    /// Follows from a short independent computation.
    Derived,
    Trivial,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Tagged<T> {
    pub value: T,
    pub provenance: Provenance,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

/// Expected results; absent fields are not asserted.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Expected {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub horizontal_index: Option<Tagged<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub vertical_index: Option<Tagged<f64>>,
    /// Dynkin name of the principal graph of the horizontal subfactor.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub horizontal_graph: Option<Tagged<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub vertical_graph: Option<Tagged<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub flat: Option<Tagged<bool>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub global_index: Option<Tagged<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub depth: Option<Tagged<usize>>,
}

/// How a fixture is built.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Source {
    /// Solved connection on the system with all four graphs equal to a Dynkin diagram.
    SelfSystem { graph: String },
    /// Solved connection on the `A₁₁`–`E₆` system.
    Ghj,
    /// Spin-model square of the `n × n` Fourier matrix.
    Hadamard { n: usize },
    /// Canonical sequence of a self-system cut by a minimal projection of `B_{2m,2n}`.
    Cut { graph: String, m: usize, n: usize, p_index: Option<usize> },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CatalogEntry {
    pub name: String,
    pub description: String,
    pub source: Source,
    pub expected: Expected,
}

#[derive(Serialize, Deserialize)]
struct CatalogFile {
    schema: String,
    entries: Vec<CatalogEntry>,
}

/// A built fixture: a connection with a start set, and the square it came from if any.
#[derive(Clone, Debug)]
pub struct Fixture {
    pub name: String,
    pub connection: BiUnitaryConnection,
    pub start: StartVertexSet,
    pub square: Option<CommutingSquare>,
}

impl Fixture {
    pub fn sequence(&self, dir: Direction) -> Result<DoubleSequence> {
        sequence_for(&self.connection, &self.start, dir)
    }
}

/// Data directory: `$COMMSQ_DATA_DIR` if set, else the one shipped with the sources.
pub fn data_dir() -> PathBuf {
    match std::env::var_os(DATA_DIR_VAR) {
        Some(d) => PathBuf::from(d),
        None => PathBuf::from(concat!(env!("CARGO_MANIFEST_DIR"), "/../../data")),
    }
}

fn parse(text: &str) -> Result<Vec<CatalogEntry>> {
    let file: CatalogFile = serde_json::from_str(text)?;
    if file.schema != CATALOG_SCHEMA {
        return Err(Error::Invalid(format!("unsupported catalog schema {:?}", file.schema)));
    }
    Ok(file.entries)
}

/// All entries, from the data directory when it holds a catalog and the built-in copy otherwise.
pub fn entries() -> Result<Vec<CatalogEntry>> {
    let path = data_dir().join("catalog.json");
    if path.exists() {
        parse(&std::fs::read_to_string(&path)?)
    } else {
        parse(BUILTIN)
    }
}

pub fn entry(name: &str) -> Result<CatalogEntry> {
    entries()?
        .into_iter()
        .find(|e| e.name.eq_ignore_ascii_case(name))
        .ok_or_else(|| Error::Invalid(format!("no catalog entry named {name:?}")))
}

/// Solved connection on the `A₁₁`–`E₆` system, in the canonical gauge.
pub fn ghj_connection(opts: &SolverOptions) -> Result<BiUnitaryConnection> {
    solve_connection(ghj_system()?, opts)
}

/// The commuting square `A_{00} ⊂ A_{01}, A_{10} ⊂ A_{11}` of the GHJ connection with every
/// top-left vertex taken once.
pub fn ghj_square(opts: &SolverOptions) -> Result<CommutingSquare> {
    let conn = ghj_connection(opts)?;
    let start = StartVertexSet::new(conn.system(), vec![1; conn.system().corner_size(0)])?;
    DoubleSequence::new(conn, start).window(0, 0)
}

/// `A_{k,l} = p B_{2m+k, 2n+l} p` for the canonical sequence `B` of the connection on the
/// self-system of `g`, with `p` the `p_index`-th diagonal matrix unit of `B_{2m,2n}` (blocks in
/// order), or `p = 1` when `p_index` is `None`.
pub fn canonical_cut_example(
    g: &BipartiteGraph,
    m: usize,
    n: usize,
    p_index: Option<usize>,
    opts: &SolverOptions,
) -> Result<DoubleSequence> {
    let conn = solve_connection(self_system(g)?, opts)?;
    let start = StartVertexSet::star(conn.system());
    let ds = DoubleSequence::new(conn, start);
    let alg = ds.algebra(2 * m, 2 * n)?;
    let p = match p_index {
        None => crate::algebra::AlgebraElement::identity(&alg),
        Some(i) => {
            let (b, j) = alg
                .sizes()
                .iter()
                .enumerate()
                .flat_map(|(b, &s)| (0..s).map(move |j| (b, j)))
                .nth(i)
                .ok_or_else(|| Error::Invalid(format!("B_({},{}) has no minimal projection number {i}", 2 * m, 2 * n)))?;
            alg.matrix_unit(b, j, j)
        }
    };
    cut_by_projection(&ds, 2 * m, 2 * n, &p)
}

pub fn build(entry: &CatalogEntry, opts: &SolverOptions) -> Result<Fixture> {
    let name = entry.name.clone();
    match &entry.source {
        Source::SelfSystem { graph } => {
            let conn = solve_connection(self_system(&dynkin(graph)?)?, opts)?;
            let start = StartVertexSet::star(conn.system());
            Ok(Fixture { name, connection: conn, start, square: None })
        }
        Source::Ghj => {
            let conn = ghj_connection(opts)?;
            let start = StartVertexSet::star(conn.system());
            Ok(Fixture { name, connection: conn, start, square: None })
        }
        Source::Hadamard { n } => {
            let sq = hadamard_square(&fourier_matrix(*n))?;
            let ds = iterate(&sq)?;
            Ok(Fixture { name, connection: ds.connection().clone(), start: ds.start().clone(), square: Some(sq) })
        }
        Source::Cut { graph, m, n, p_index } => {
            let ds = canonical_cut_example(&dynkin(graph)?, *m, *n, *p_index, opts)?;
            Ok(Fixture { name, connection: ds.connection().clone(), start: ds.start().clone(), square: None })
        }
    }
}

pub fn build_named(name: &str, opts: &SolverOptions) -> Result<Fixture> {
    build(&entry(name)?, opts)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn builtin_catalog_parses_and_names_are_unique() {
        let es = parse(BUILTIN).unwrap();
        let mut names: Vec<String> = es.iter().map(|e| e.name.to_ascii_lowercase()).collect();
        names.sort();
        let n = names.len();
        names.dedup();
        assert_eq!(names.len(), n);
        for e in &es {
            for g in [&e.expected.horizontal_graph, &e.expected.vertical_graph].into_iter().flatten() {
                dynkin(&g.value).unwrap();
            }
        }
    }

    #[test]
    fn unknown_schema_is_rejected() {
        assert!(parse(r#"{"schema":"other","entries":[]}"#).is_err());
    }

    #[test]
    fn cut_with_identity_keeps_the_start_support() {
        let g = dynkin("A3").unwrap();
        let ds = canonical_cut_example(&g, 1, 1, None, &SolverOptions::default()).unwrap();
        // four steps on A3 from an end reach each even vertex along two paths
        assert_eq!(ds.start().multiplicities(), &[2, 2]);
        let cut = canonical_cut_example(&g, 1, 1, Some(0), &SolverOptions::default()).unwrap();
        assert_eq!(cut.start().multiplicities(), &[1, 0]);
        assert!(canonical_cut_example(&g, 1, 1, Some(7), &SolverOptions::default()).is_err());
    }
}
