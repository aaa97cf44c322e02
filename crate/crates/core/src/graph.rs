//! Finite connected weighted graphs with a vertex measure.
//!
//! A [`WeightedGraph`] is immutable once built. Construction validates the
//! edge weights, the measure and connectivity, and materializes the
//! combinatorial Laplacian `L` (with `(Lu)(x) = Σ_y ω_xy (u(x) − u(y))`) that
//! every downstream operator reuses. The μ-Laplacian is `Δ = −M⁻¹ L` with
//! `M = diag(μ)`.

use std::collections::{HashMap, HashSet, VecDeque};
use std::ops::{Index, IndexMut};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sparse::CsrMatrix;

/// An undirected weighted edge between two dense vertex indices.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Edge {
    pub a: usize,
    pub b: usize,
    pub weight: f64,
}

/// Total measure `Σ_x μ(x)` of the vertex set.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct Volume(pub f64);

impl Volume {
    pub fn total(self) -> f64 {
        self.0
    }
}

#[derive(Debug, Clone)]
pub struct WeightedGraph {
    ids: Vec<String>,
    index: HashMap<String, usize>,
    measure: Vec<f64>,
    edges: Vec<Edge>,
    laplacian: CsrMatrix,
    volume: Volume,
}

impl WeightedGraph {
    /// Builds a graph from `(id, μ)` vertices and `(u, v, ω)` edges.
    ///
    /// Vertices keep their insertion order as dense indices.
    pub fn new<S: AsRef<str>>(vertices: &[(S, f64)], edges: &[(S, S, f64)]) -> Result<Self> {
        if vertices.is_empty() {
            return Err(Error::EmptyGraph);
        }
        let mut ids = Vec::with_capacity(vertices.len());
        let mut index = HashMap::with_capacity(vertices.len());
        let mut measure = Vec::with_capacity(vertices.len());
        for (id, mu) in vertices {
            let id = id.as_ref().to_string();
            if !(mu.is_finite() && *mu > 0.0) {
                return Err(Error::InvalidMeasure { id, mu: *mu });
            }
            if index.insert(id.clone(), ids.len()).is_some() {
                return Err(Error::DuplicateVertex(id));
            }
            ids.push(id);
            measure.push(*mu);
        }

        let mut seen = HashSet::with_capacity(edges.len());
        let mut out = Vec::with_capacity(edges.len());
        for (i, (u, v, w)) in edges.iter().enumerate() {
            let (u, v) = (u.as_ref(), v.as_ref());
            let lookup = |name: &str| {
                index
                    .get(name)
                    .copied()
                    .ok_or_else(|| Error::UnknownEdgeVertex {
                        index: i,
                        u: u.to_string(),
                        v: v.to_string(),
                        missing: name.to_string(),
                    })
            };
            let (a, b) = (lookup(u)?, lookup(v)?);
            if a == b {
                return Err(Error::SelfLoop {
                    index: i,
                    u: u.to_string(),
                    v: v.to_string(),
                });
            }
            if !(w.is_finite() && *w > 0.0) {
                return Err(Error::InvalidWeight {
                    index: i,
                    u: u.to_string(),
                    v: v.to_string(),
                    w: *w,
                });
            }
            if !seen.insert((a.min(b), a.max(b))) {
                return Err(Error::DuplicateEdge {
                    index: i,
                    u: u.to_string(),
                    v: v.to_string(),
                });
            }
            out.push(Edge { a, b, weight: *w });
        }

        let n = ids.len();
        let mut triplets = Vec::with_capacity(n + 2 * out.len());
        for e in &out {
            triplets.push((e.a, e.a, e.weight));
            triplets.push((e.b, e.b, e.weight));
            triplets.push((e.a, e.b, -e.weight));
            triplets.push((e.b, e.a, -e.weight));
        }
        for i in 0..n {
            triplets.push((i, i, 0.0));
        }
        let laplacian = CsrMatrix::from_triplets(n, &triplets);
        let volume = Volume(measure.iter().sum());

        let graph = Self {
            ids,
            index,
            measure,
            edges: out,
            laplacian,
            volume,
        };
        graph.check_connected()?;
        Ok(graph)
    }

    fn check_connected(&self) -> Result<()> {
        let n = self.len();
        let mut visited = vec![false; n];
        let mut queue = VecDeque::from([0usize]);
        visited[0] = true;
        while let Some(x) = queue.pop_front() {
            for (y, _) in self.laplacian.row(x) {
                if !visited[y] {
                    visited[y] = true;
                    queue.push_back(y);
                }
            }
        }
        match visited.iter().position(|v| !v) {
            None => Ok(()),
            Some(i) => Err(Error::Disconnected {
                root: self.ids[0].clone(),
                unreachable: self.ids[i].clone(),
            }),
        }
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    pub fn ids(&self) -> &[String] {
        &self.ids
    }

    pub fn id(&self, i: usize) -> &str {
        &self.ids[i]
    }

    pub fn vertex_index(&self, id: &str) -> Result<usize> {
        self.index
            .get(id)
            .copied()
            .ok_or_else(|| Error::UnknownVertex(id.to_string()))
    }

    pub fn measure(&self) -> &[f64] {
        &self.measure
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn volume(&self) -> Volume {
        self.volume
    }

    /// The combinatorial Laplacian `L = M(−Δ)`, symmetric positive semi-definite.
    pub fn laplacian_matrix(&self) -> &CsrMatrix {
        &self.laplacian
    }

    /// Neighbors of `x` with their edge weights.
    pub fn neighbors(&self, x: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.laplacian
            .row(x)
            .filter(move |&(y, _)| y != x)
            .map(|(y, v)| (y, -v))
    }

    pub fn degree(&self, x: usize) -> f64 {
        self.neighbors(x).map(|(_, w)| w).sum()
    }

    /// Builds a vertex function from a closure over dense indices.
    pub fn function<F: FnMut(usize) -> f64>(&self, f: F) -> VertexFunction {
        VertexFunction((0..self.len()).map(f).collect())
    }

    pub fn constant(&self, c: f64) -> VertexFunction {
        VertexFunction(vec![c; self.len()])
    }

    pub fn check_domain(&self, u: &VertexFunction) -> Result<()> {
        if u.len() != self.len() {
            return Err(Error::DomainMismatch {
                expected: self.len(),
                got: u.len(),
            });
        }
        Ok(())
    }

    pub fn from_json_str(s: &str) -> Result<Self> {
        let file: GraphFile = serde_json::from_str(s).map_err(|e| Error::Format(e.to_string()))?;
        file.into_graph()
    }

    pub fn to_file(&self) -> GraphFile {
        GraphFile {
            vertices: self
                .ids
                .iter()
                .zip(&self.measure)
                .map(|(id, &mu)| VertexEntry { id: id.clone(), mu })
                .collect(),
            edges: self
                .edges
                .iter()
                .map(|e| EdgeEntry {
                    u: self.ids[e.a].clone(),
                    v: self.ids[e.b].clone(),
                    w: e.weight,
                })
                .collect(),
        }
    }
}

/// On-disk graph description:
/// `{"vertices":[{"id":..,"mu":..}], "edges":[{"u":..,"v":..,"w":..}]}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GraphFile {
    pub vertices: Vec<VertexEntry>,
    pub edges: Vec<EdgeEntry>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VertexEntry {
    pub id: String,
    pub mu: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EdgeEntry {
    pub u: String,
    pub v: String,
    pub w: f64,
}

impl GraphFile {
    pub fn into_graph(self) -> Result<WeightedGraph> {
        let vertices: Vec<(&str, f64)> = self
            .vertices
            .iter()
            .map(|v| (v.id.as_str(), v.mu))
            .collect();
        let edges: Vec<(&str, &str, f64)> = self
            .edges
            .iter()
            .map(|e| (e.u.as_str(), e.v.as_str(), e.w))
            .collect();
        WeightedGraph::new(&vertices, &edges)
    }
}

/// A real value per vertex, indexed densely in the graph's insertion order.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct VertexFunction(pub Vec<f64>);

impl VertexFunction {
    pub fn new(values: Vec<f64>) -> Self {
        Self(values)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn iter(&self) -> std::slice::Iter<'_, f64> {
        self.0.iter()
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }

    /// Checks that every value is finite.
    pub fn check_finite(&self) -> Result<()> {
        match self.0.iter().position(|v| !v.is_finite()) {
            Some(i) => Err(Error::NonFinite(i)),
            None => Ok(()),
        }
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        Self(self.0.iter().map(|&v| f(v)).collect())
    }

    pub fn zip_map(&self, other: &Self, f: impl Fn(f64, f64) -> f64) -> Self {
        debug_assert_eq!(self.len(), other.len());
        Self(
            self.0
                .iter()
                .zip(&other.0)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        )
    }

    pub fn add(&self, other: &Self) -> Self {
        self.zip_map(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.zip_map(other, |a, b| a - b)
    }

    pub fn scale(&self, c: f64) -> Self {
        self.map(|v| c * v)
    }

    pub fn max(&self) -> f64 {
        self.0.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn min(&self) -> f64 {
        self.0.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn norm_inf(&self) -> f64 {
        self.0.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Index of the entry with the largest absolute value.
    pub fn argmax_abs(&self) -> Option<usize> {
        self.0
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.abs().total_cmp(&b.1.abs()))
            .map(|(i, _)| i)
    }
}

impl Index<usize> for VertexFunction {
    type Output = f64;

    fn index(&self, i: usize) -> &f64 {
        &self.0[i]
    }
}

impl IndexMut<usize> for VertexFunction {
    fn index_mut(&mut self, i: usize) -> &mut f64 {
        &mut self.0[i]
    }
}

impl From<Vec<f64>> for VertexFunction {
    fn from(v: Vec<f64>) -> Self {
        Self(v)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit(n: usize) -> Vec<(String, f64)> {
        (0..n).map(|i| (format!("v{i}"), 1.0)).collect()
    }

    #[test]
    fn rejects_self_loop() {
        let v = unit(2);
        let err = WeightedGraph::new(&v, &[("v0".into(), "v0".into(), 1.0)]).unwrap_err();
        assert!(matches!(err, Error::SelfLoop { index: 0, .. }));
    }

    #[test]
    fn rejects_duplicate_edge_in_either_orientation() {
        let v = unit(2);
        let e = vec![
            ("v0".to_string(), "v1".to_string(), 1.0),
            ("v1".to_string(), "v0".to_string(), 1.0),
        ];
        let err = WeightedGraph::new(&v, &e).unwrap_err();
        assert!(matches!(err, Error::DuplicateEdge { index: 1, .. }));
        assert!(err.to_string().contains("#1"));
    }

    #[test]
    fn rejects_bad_weight_and_measure() {
        let v = unit(2);
        let err = WeightedGraph::new(&v, &[("v0".into(), "v1".into(), 0.0)]).unwrap_err();
        assert!(matches!(err, Error::InvalidWeight { .. }));
        let err = WeightedGraph::new(&[("a", 1.0), ("b", -2.0)], &[("a", "b", 1.0)]).unwrap_err();
        assert_eq!(
            err,
            Error::InvalidMeasure {
                id: "b".into(),
                mu: -2.0
            }
        );
    }

    #[test]
    fn rejects_disconnected() {
        let err = WeightedGraph::new(&unit(3), &[("v0".into(), "v1".into(), 1.0)]).unwrap_err();
        assert_eq!(
            err,
            Error::Disconnected {
                root: "v0".into(),
                unreachable: "v2".into()
            }
        );
    }

    #[test]
    fn rejects_unknown_edge_vertex() {
        let err = WeightedGraph::new(&[("a", 1.0)], &[("a", "z", 1.0)]).unwrap_err();
        assert!(err.to_string().contains("\"z\""));
    }

    #[test]
    fn single_vertex_is_connected() {
        let g = WeightedGraph::new::<&str>(&[("a", 2.5)], &[]).unwrap();
        assert_eq!(g.volume().total(), 2.5);
    }

    #[test]
    fn json_round_trip() {
        let s = r#"{"vertices":[{"id":"a","mu":1},{"id":"b","mu":2}],"edges":[{"u":"a","v":"b","w":0.5}]}"#;
        let g = WeightedGraph::from_json_str(s).unwrap();
        assert_eq!(g.len(), 2);
        assert_eq!(g.volume(), Volume(3.0));
        assert_eq!(g.neighbors(0).collect::<Vec<_>>(), vec![(1, 0.5)]);
        let back = serde_json::to_string(&g.to_file()).unwrap();
        let g2 = WeightedGraph::from_json_str(&back).unwrap();
        assert_eq!(g2.to_file(), g.to_file());
    }

    #[test]
    fn malformed_json_names_position() {
        let err = WeightedGraph::from_json_str("{\"vertices\":[{\"id\":\"a\"}],\"edges\":[]}")
            .unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("mu"), "{msg}");
        assert!(msg.contains("line"), "{msg}");
    }
}
