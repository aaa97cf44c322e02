//! Result file schemas and lossless number formatting.
//!
//! Every floating-point value is written with 17 significant digits, which is
//! enough to round-trip an `f64` exactly. Non-finite values become `null`.

use std::collections::BTreeMap;
use std::io;
use std::path::Path;

use anyhow::{Context, Result};
use csh_core::{DiagnosticReport, NonlinearityKind, Status, WeightedGraph};
use serde::ser::{SerializeMap, Serializer};
use serde::{Deserialize, Serialize};
use serde_json::ser::{Formatter, PrettyFormatter};
use sha2::{Digest, Sha256};

/// Pretty JSON with `f64` written as `{:.16e}`.
pub struct PreciseFormatter(PrettyFormatter<'static>);

impl Default for PreciseFormatter {
    fn default() -> Self {
        Self(PrettyFormatter::new())
    }
}

impl Formatter for PreciseFormatter {
    fn write_f64<W: ?Sized + io::Write>(&mut self, w: &mut W, value: f64) -> io::Result<()> {
        w.write_all(format_f64(value).as_bytes())
    }

    fn write_f32<W: ?Sized + io::Write>(&mut self, w: &mut W, value: f32) -> io::Result<()> {
        self.write_f64(w, value as f64)
    }

    fn begin_array<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_array(w)
    }

    fn end_array<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_array(w)
    }

    fn begin_array_value<W: ?Sized + io::Write>(
        &mut self,
        w: &mut W,
        first: bool,
    ) -> io::Result<()> {
        self.0.begin_array_value(w, first)
    }

    fn end_array_value<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_array_value(w)
    }

    fn begin_object<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_object(w)
    }

    fn end_object<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_object(w)
    }

    fn begin_object_key<W: ?Sized + io::Write>(
        &mut self,
        w: &mut W,
        first: bool,
    ) -> io::Result<()> {
        self.0.begin_object_key(w, first)
    }

    fn begin_object_value<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_object_value(w)
    }

    fn end_object_value<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_object_value(w)
    }
}

/// 17 significant digits; empty string would be ambiguous, so non-finite
/// values are spelled out for CSV and mapped to `null` by the JSON writer.
pub fn format_f64(value: f64) -> String {
    if value.is_finite() {
        format!("{value:.16e}")
    } else {
        "null".to_string()
    }
}

pub fn to_json<T: Serialize>(value: &T) -> Result<Vec<u8>> {
    let mut buf = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, PreciseFormatter::default());
    value.serialize(&mut ser)?;
    buf.push(b'\n');
    Ok(buf)
}

/// Writes to `path`, or to stdout when `None`.
pub fn emit(path: Option<&Path>, bytes: &[u8]) -> Result<()> {
    match path {
        Some(p) => std::fs::write(p, bytes).with_context(|| format!("writing {}", p.display())),
        None => {
            use std::io::Write;
            io::stdout().write_all(bytes).context("writing to stdout")
        }
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// A graph together with the hash of the file it was read from.
pub struct LoadedGraph {
    pub graph: WeightedGraph,
    pub sha256: String,
}

pub fn load_graph(path: &Path) -> Result<LoadedGraph> {
    let bytes =
        std::fs::read(path).with_context(|| format!("reading graph file {}", path.display()))?;
    let text = std::str::from_utf8(&bytes)
        .with_context(|| format!("graph file {} is not UTF-8", path.display()))?;
    let graph = WeightedGraph::from_json_str(text)
        .with_context(|| format!("invalid graph file {}", path.display()))?;
    Ok(LoadedGraph {
        graph,
        sha256: sha256_hex(&bytes),
    })
}

/// Vertex values as a JSON object keyed by id, in graph order.
pub struct VertexValues<'a> {
    pub ids: &'a [String],
    pub values: &'a [f64],
}

impl Serialize for VertexValues<'_> {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let mut map = s.serialize_map(Some(self.ids.len()))?;
        for (id, v) in self.ids.iter().zip(self.values) {
            map.serialize_entry(id, v)?;
        }
        map.end()
    }
}

#[derive(Serialize)]
pub struct SolveReport<'a> {
    pub status: Status,
    pub equation: NonlinearityKind,
    pub lambda: f64,
    pub vortices: &'a [String],
    pub graph_sha256: &'a str,
    pub reason: &'a str,
    pub u: Option<VertexValues<'a>>,
    pub iterations: usize,
    /// Full-equation residual of `u` when solved, else of the last iterate.
    pub residual_inf: f64,
    pub shift: f64,
    /// `[n, delta, min]` rows.
    pub trace: Vec<(usize, f64, f64)>,
    pub diagnostics: Option<DiagnosticReport>,
}

/// The parts of a solve result that `verify` reads back.
#[derive(Debug, Deserialize)]
pub struct StoredSolve {
    pub status: Status,
    pub equation: NonlinearityKind,
    pub lambda: f64,
    pub vortices: Vec<String>,
    pub graph_sha256: String,
    pub u: Option<BTreeMap<String, f64>>,
    pub residual_inf: Option<f64>,
}
