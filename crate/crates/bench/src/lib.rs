//! Fixtures shared by the benchmarks under `benches/`.

use csh_core::families::{generate, Family, GenerateOptions};
use csh_core::WeightedGraph;

/// Unit-weight member of `family`.
pub fn graph(family: Family) -> WeightedGraph {
    generate(family, &GenerateOptions::default()).expect("benchmark family parameters are valid")
}

/// Right-hand side with mixed signs, deterministic in the vertex index.
pub fn rhs(n: usize) -> Vec<f64> {
    (0..n).map(|x| ((x * 37) % 11) as f64 - 5.0).collect()
}
