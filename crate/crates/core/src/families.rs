//! Named graph families used by the CLI, tests and benchmarks.
//!
//! Vertex ids are spreadsheet-style letters in index order (`a`, `b`, ...,
//! `z`, `aa`, `ab`, ...). Unit weights and measure unless randomized, in
//! which case values are drawn uniformly from `[0.5, 2]` by seed.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::graph::WeightedGraph;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Family {
    Path(usize),
    Cycle(usize),
    Complete(usize),
    /// 4-neighbor lattice with wraparound, `rows × cols`.
    Torus(usize, usize),
    /// Erdős–Rényi `G(n, p)`, redrawn until connected.
    Random {
        n: usize,
        p: f64,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct GenerateOptions {
    pub seed: u64,
    pub random_weights: bool,
    pub random_measure: bool,
}

/// `0 → a`, `25 → z`, `26 → aa`.
pub fn vertex_name(mut i: usize) -> String {
    let mut out = Vec::new();
    loop {
        out.push(b'a' + (i % 26) as u8);
        if i < 26 {
            break;
        }
        i = i / 26 - 1;
    }
    out.reverse();
    String::from_utf8(out).expect("ascii")
}

fn edge_list(family: Family, rng: &mut ChaCha8Rng) -> Result<(usize, Vec<(usize, usize)>)> {
    let bad = |msg: String| Err(Error::InvalidParameter(msg));
    match family {
        Family::Path(n) => {
            if n == 0 {
                return bad("path needs n >= 1".into());
            }
            Ok((n, (1..n).map(|i| (i - 1, i)).collect()))
        }
        Family::Cycle(n) => {
            if n < 3 {
                return bad(format!("cycle needs n >= 3, got {n}"));
            }
            Ok((n, (0..n).map(|i| (i, (i + 1) % n)).collect()))
        }
        Family::Complete(n) => {
            if n == 0 {
                return bad("complete graph needs n >= 1".into());
            }
            let e = (0..n)
                .flat_map(|i| (i + 1..n).map(move |j| (i, j)))
                .collect();
            Ok((n, e))
        }
        Family::Torus(a, b) => {
            if a < 3 || b < 3 {
                return bad(format!("torus needs both sides >= 3, got {a}x{b}"));
            }
            let id = |r: usize, c: usize| r * b + c;
            let mut e = Vec::with_capacity(2 * a * b);
            for r in 0..a {
                for c in 0..b {
                    e.push((id(r, c), id(r, (c + 1) % b)));
                    e.push((id(r, c), id((r + 1) % a, c)));
                }
            }
            Ok((a * b, e))
        }
        Family::Random { n, p } => {
            if n == 0 {
                return bad("random graph needs n >= 1".into());
            }
            if !(p > 0.0 && p <= 1.0) {
                return bad(format!("edge probability must lie in (0, 1], got {p}"));
            }
            for _ in 0..100_000 {
                let e: Vec<(usize, usize)> = (0..n)
                    .flat_map(|i| (i + 1..n).map(move |j| (i, j)))
                    .filter(|_| rng.gen::<f64>() < p)
                    .collect();
                if connected(n, &e) {
                    return Ok((n, e));
                }
            }
            bad(format!("no connected G({n}, {p}) drawn in 100000 attempts"))
        }
    }
}

fn connected(n: usize, edges: &[(usize, usize)]) -> bool {
    let mut parent: Vec<usize> = (0..n).collect();
    fn root(p: &mut [usize], mut x: usize) -> usize {
        while p[x] != x {
            p[x] = p[p[x]];
            x = p[x];
        }
        x
    }
    let mut components = n;
    for &(a, b) in edges {
        let (ra, rb) = (root(&mut parent, a), root(&mut parent, b));
        if ra != rb {
            parent[ra] = rb;
            components -= 1;
        }
    }
    components == 1
}

pub fn generate(family: Family, opts: &GenerateOptions) -> Result<WeightedGraph> {
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let (n, edges) = edge_list(family, &mut rng)?;
    let mut draw = |on: bool| if on { rng.gen_range(0.5..=2.0) } else { 1.0 };
    let vertices: Vec<(String, f64)> = (0..n)
        .map(|i| (vertex_name(i), draw(opts.random_measure)))
        .collect();
    let edges: Vec<(String, String, f64)> = edges
        .into_iter()
        .map(|(a, b)| (vertex_name(a), vertex_name(b), draw(opts.random_weights)))
        .collect();
    WeightedGraph::new(&vertices, &edges)
}
