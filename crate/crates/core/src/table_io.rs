//! Versioned JSON persistence of value tables.

use std::fs;
use std::io::{BufReader, BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::dag_solver::{default_x, solve_game, DagError, SolveOptions, Table, ValueTable};
use crate::game_graph::GameGraph;
use crate::scalar::Scalar;

pub const FORMAT_VERSION: u32 = 1;

#[derive(Serialize, Deserialize)]
struct Header<T> {
    format_version: u32,
    graph_hash: String,
    #[serde(rename = "N")]
    total: u32,
    x: T,
}

#[derive(Serialize, Deserialize)]
struct TableFile<T> {
    header: Header<T>,
    table: ValueTable<T>,
}

pub fn save_table<T: Scalar + Serialize>(table: &ValueTable<T>, path: &Path) -> Result<(), DagError> {
    let file = TableFile {
        header: Header {
            format_version: FORMAT_VERSION,
            graph_hash: table.graph_hash.clone(),
            total: table.total,
            x: table.x.clone(),
        },
        table: table.clone(),
    };
    let io = |e: std::io::Error| DagError::Io(format!("{}: {e}", path.display()));
    let mut out = BufWriter::new(fs::File::create(path).map_err(io)?);
    serde_json::to_writer(&mut out, &file).map_err(|e| DagError::Io(e.to_string()))?;
    out.flush().map_err(io)
}

/// Loads a table; with `expected_hash`, rejects tables of another graph.
pub fn load_table<T: Scalar + for<'de> Deserialize<'de>>(
    path: &Path,
    expected_hash: Option<&str>,
) -> Result<ValueTable<T>, DagError> {
    let f = fs::File::open(path).map_err(|e| DagError::Io(format!("{}: {e}", path.display())))?;
    let file: TableFile<T> =
        serde_json::from_reader(BufReader::new(f)).map_err(|e| DagError::FormatMismatch(e.to_string()))?;
    let TableFile { header, table } = file;
    if header.format_version != FORMAT_VERSION {
        return Err(DagError::FormatMismatch(format!(
            "format version {} (expected {FORMAT_VERSION})",
            header.format_version
        )));
    }
    if header.graph_hash != table.graph_hash || header.total != table.total || header.x != table.x {
        return Err(DagError::FormatMismatch("header disagrees with body".into()));
    }
    let entries = table.vertices * (table.total as usize + 1);
    let strategies_ok = table.strategies.as_ref().is_none_or(|s| s.len() == entries);
    if table.values.len() != entries || table.lengths.len() != entries || !strategies_ok {
        return Err(DagError::FormatMismatch("entry count does not match dimensions".into()));
    }
    if let Some(expected) = expected_hash {
        if expected != table.graph_hash {
            return Err(DagError::GraphHashMismatch {
                expected: expected.to_string(),
                found: table.graph_hash,
            });
        }
    }
    Ok(table)
}

/// File name of the cached table for `g` at `total` chips.
pub fn cache_file_name(g: &GameGraph, total: u32, x: f64, strategies: bool) -> String {
    let kind = if strategies { "full" } else { "values" };
    format!("{}-n{total}-x{x:e}-{kind}.json", &g.hash()[..16])
}

/// Like [`solve_game`], but reuses (and fills) a table cache in `dir`.
/// Unreadable cache entries are recomputed and overwritten.
pub fn solve_cached(g: &GameGraph, total: u32, opts: &SolveOptions, dir: &Path) -> Result<Table, DagError> {
    let x = opts.x.unwrap_or_else(|| default_x(g, total));
    let path = dir.join(cache_file_name(g, total, x, opts.store_strategies));
    if let Ok(t) = load_table::<f64>(&path, Some(g.hash())) {
        if t.total == total && t.x == x {
            return Ok(t);
        }
    }
    let opts = SolveOptions {
        x: Some(x),
        ..opts.clone()
    };
    let t = solve_game(g, total, &opts)?;
    fs::create_dir_all(dir).map_err(|e| DagError::Io(format!("{}: {e}", dir.display())))?;
    save_table(&t, &path)?;
    Ok(t)
}
