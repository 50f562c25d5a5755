//! Weighted undirected graphs: GSet text I/O, synthetic families, statistics
//! and zero-padding to a qubit-register dimension.
//!
//! GSet files are whitespace separated. The first non-blank line holds the
//! vertex and edge counts `N E`, followed by `E` lines `i j w` with 1-based
//! vertex indices. Internally every index is 0-based.

use std::collections::HashSet;
use std::fmt::Write as _;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal, Uniform};
use serde::{Deserialize, Serialize};

use crate::dense::WeightMatrix;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Edge {
    pub i: usize,
    pub j: usize,
    pub w: f64,
}

/// A MaxCut instance. Edges are undirected; at most one per unordered pair.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Graph {
    n_vertices: usize,
    edges: Vec<Edge>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GraphStats {
    /// Number of non-zero edges.
    pub e: usize,
    /// Edge density `e / (N(N-1)/2)`.
    pub d: f64,
    /// Mean edges per vertex, `e / N`.
    pub xi: f64,
    /// `xi` restricted to the top decile of vertices by degree
    /// (half their mean degree, so that `xi_max >= xi`).
    pub xi_max: f64,
    /// Sum of edge weights over `j < i`.
    pub w_sum: f64,
    /// Largest absolute weighted degree.
    pub p_max: f64,
}

impl Graph {
    /// Builds a graph, rejecting self-loops, out-of-range indices and
    /// duplicate unordered pairs.
    pub fn new(n_vertices: usize, edges: Vec<Edge>) -> Result<Self> {
        if n_vertices == 0 {
            return Err(Error::invalid("graph must have at least one vertex"));
        }
        let mut seen = HashSet::with_capacity(edges.len());
        for (k, e) in edges.iter().enumerate() {
            if e.i >= n_vertices || e.j >= n_vertices {
                return Err(Error::invalid(format!(
                    "edge {k} ({}, {}) has an index outside 0..{n_vertices}",
                    e.i, e.j
                )));
            }
            if e.i == e.j {
                return Err(Error::invalid(format!("edge {k} is a self-loop on vertex {}", e.i)));
            }
            if !e.w.is_finite() {
                return Err(Error::invalid(format!("edge {k} has non-finite weight")));
            }
            if !seen.insert((e.i.min(e.j), e.i.max(e.j))) {
                return Err(Error::invalid(format!(
                    "duplicate edge between vertices {} and {}",
                    e.i, e.j
                )));
            }
        }
        Ok(Graph { n_vertices, edges })
    }

    pub fn from_triples(n_vertices: usize, triples: &[(usize, usize, f64)]) -> Result<Self> {
        let edges = triples.iter().map(|&(i, j, w)| Edge { i, j, w }).collect();
        Graph::new(n_vertices, edges)
    }

    pub fn n_vertices(&self) -> usize {
        self.n_vertices
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    /// Qubits needed to index every vertex, `ceil(log2 N)`, at least one.
    pub fn n_qubits(&self) -> usize {
        qubits_for(self.n_vertices)
    }

    /// Absolute weighted degree `sum_j |W_ij|` per vertex.
    pub fn abs_degrees(&self) -> Vec<f64> {
        let mut deg = vec![0.0; self.n_vertices];
        for e in &self.edges {
            deg[e.i] += e.w.abs();
            deg[e.j] += e.w.abs();
        }
        deg
    }

    /// Unweighted edge counts per vertex.
    pub fn degrees(&self) -> Vec<usize> {
        let mut deg = vec![0; self.n_vertices];
        for e in &self.edges {
            deg[e.i] += 1;
            deg[e.j] += 1;
        }
        deg
    }

    /// Returns the same graph with vertex `v` renamed to `perm[v]`.
    pub fn relabeled(&self, perm: &[usize]) -> Result<Graph> {
        if perm.len() != self.n_vertices {
            return Err(Error::Dimension {
                expected: self.n_vertices,
                got: perm.len(),
            });
        }
        let edges = self
            .edges
            .iter()
            .map(|e| Edge {
                i: perm[e.i],
                j: perm[e.j],
                w: e.w,
            })
            .collect();
        Graph::new(self.n_vertices, edges)
    }
}

pub(crate) fn qubits_for(n: usize) -> usize {
    let mut q = 1;
    while (1usize << q) < n {
        q += 1;
    }
    q
}

/// Parses a GSet-format graph.
pub fn parse_gset(text: &str) -> Result<Graph> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(k, l)| (k + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty());

    let (hline, header) = lines.next().ok_or(Error::Parse {
        line: 0,
        msg: "empty input".into(),
    })?;
    let fields: Vec<&str> = header.split_whitespace().collect();
    if fields.len() != 2 {
        return Err(Error::Parse {
            line: hline,
            msg: format!("expected header `N E`, found `{header}`"),
        });
    }
    let n: usize = parse_field(fields[0], hline, "vertex count")?;
    let m: usize = parse_field(fields[1], hline, "edge count")?;

    let mut edges = Vec::with_capacity(m);
    for (line, l) in lines {
        let f: Vec<&str> = l.split_whitespace().collect();
        if f.len() != 3 {
            return Err(Error::Parse {
                line,
                msg: format!("expected `i j w`, found `{l}`"),
            });
        }
        let i: usize = parse_field(f[0], line, "vertex index")?;
        let j: usize = parse_field(f[1], line, "vertex index")?;
        let w: f64 = parse_field(f[2], line, "weight")?;
        if i == 0 || j == 0 || i > n || j > n {
            return Err(Error::invalid(format!(
                "line {line}: vertex index out of range 1..={n}"
            )));
        }
        if edges.len() == m {
            return Err(Error::Parse {
                line,
                msg: format!("more than the {m} declared edges"),
            });
        }
        edges.push(Edge { i: i - 1, j: j - 1, w });
    }
    if edges.len() != m {
        return Err(Error::Parse {
            line: hline,
            msg: format!("header declares {m} edges but {} were read", edges.len()),
        });
    }
    Graph::new(n, edges)
}

fn parse_field<T: std::str::FromStr>(s: &str, line: usize, what: &str) -> Result<T> {
    s.parse().map_err(|_| Error::Parse {
        line,
        msg: format!("invalid {what} `{s}`"),
    })
}

/// Writes a graph in GSet format with 1-based indices.
pub fn emit_gset(g: &Graph) -> String {
    let mut out = String::with_capacity(16 * (g.edges.len() + 1));
    let _ = writeln!(out, "{} {}", g.n_vertices, g.edges.len());
    for e in &g.edges {
        let _ = writeln!(out, "{} {} {}", e.i + 1, e.j + 1, e.w);
    }
    out
}

pub fn graph_stats(g: &Graph) -> GraphStats {
    let n = g.n_vertices;
    let e = g.edges.len();
    let pairs = n * n.saturating_sub(1) / 2;
    let d = if pairs == 0 { 0.0 } else { e as f64 / pairs as f64 };
    let xi = e as f64 / n as f64;

    let mut deg = g.degrees();
    deg.sort_unstable_by(|a, b| b.cmp(a));
    let top = n.div_ceil(10);
    let xi_max = deg[..top].iter().sum::<usize>() as f64 / top as f64 / 2.0;

    let w_sum = g.edges.iter().map(|e| e.w).sum();
    let p_max = g.abs_degrees().into_iter().fold(0.0, f64::max);
    GraphStats {
        e,
        d,
        xi,
        xi_max,
        w_sum,
        p_max,
    }
}

/// Edge-weight distribution for synthetic graphs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum WeightLaw {
    /// `U[0, b]`
    UniformPositive { b: f64 },
    /// `U[-b, b]`
    UniformSigned { b: f64 },
    /// `N(mu, sigma^2)`
    Normal { mu: f64, sigma: f64 },
    /// Every weight equal to `w`.
    Constant { w: f64 },
}

impl WeightLaw {
    fn validate(&self) -> Result<()> {
        let ok = match *self {
            WeightLaw::UniformPositive { b } | WeightLaw::UniformSigned { b } => {
                b > 0.0 && b.is_finite()
            }
            WeightLaw::Normal { mu, sigma } => sigma > 0.0 && sigma.is_finite() && mu.is_finite(),
            WeightLaw::Constant { w } => w != 0.0 && w.is_finite(),
        };
        if ok {
            Ok(())
        } else {
            Err(Error::invalid(format!("invalid weight law parameters {self:?}")))
        }
    }

    fn sample<R: Rng>(&self, rng: &mut R) -> f64 {
        match *self {
            WeightLaw::UniformPositive { b } => Uniform::new_inclusive(0.0, b).sample(rng),
            WeightLaw::UniformSigned { b } => Uniform::new_inclusive(-b, b).sample(rng),
            WeightLaw::Normal { mu, sigma } => Normal::new(mu, sigma).unwrap().sample(rng),
            WeightLaw::Constant { w } => w,
        }
    }
}

/// G(N, d): every unordered pair is an edge independently with probability `d`.
pub fn gen_erdos_renyi(n: usize, density: f64, law: WeightLaw, seed: u64) -> Result<Graph> {
    if n < 2 {
        return Err(Error::invalid("Erdos-Renyi graphs need at least two vertices"));
    }
    if !(0.0..=1.0).contains(&density) {
        return Err(Error::invalid(format!("density {density} outside [0, 1]")));
    }
    law.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut edges = Vec::new();
    for i in 0..n {
        for j in (i + 1)..n {
            if rng.gen::<f64>() < density {
                edges.push(Edge { i, j, w: law.sample(&mut rng) });
            }
        }
    }
    Graph::new(n, edges)
}

/// G(N, M): exactly `m` distinct pairs chosen uniformly at random.
pub fn gen_erdos_renyi_fixed(n: usize, m: usize, law: WeightLaw, seed: u64) -> Result<Graph> {
    let pairs = n * n.saturating_sub(1) / 2;
    if n < 2 || m > pairs {
        return Err(Error::invalid(format!(
            "cannot place {m} edges on {n} vertices"
        )));
    }
    law.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let chosen = rand::seq::index::sample(&mut rng, pairs, m).into_vec();
    let mut keys: Vec<usize> = chosen;
    keys.sort_unstable();
    let mut edges = Vec::with_capacity(m);
    for key in keys {
        let (i, j) = pair_from_index(n, key);
        edges.push(Edge { i, j, w: law.sample(&mut rng) });
    }
    Graph::new(n, edges)
}

// Row-major enumeration of the strict upper triangle.
fn pair_from_index(n: usize, mut key: usize) -> (usize, usize) {
    let mut i = 0;
    loop {
        let row = n - 1 - i;
        if key < row {
            return (i, i + 1 + key);
        }
        key -= row;
        i += 1;
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SignLaw {
    RandomPm1,
    AllPositive,
}

/// `rows x cols` torus with nearest-neighbour couplings. Vertex `(r, c)` is
/// index `r * cols + c`; wraparound duplicates (a side of length 2) are merged.
pub fn gen_toroid(rows: usize, cols: usize, signs: SignLaw, seed: u64) -> Result<Graph> {
    if rows < 2 || cols < 2 {
        return Err(Error::invalid("toroid sides must be at least 2"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut seen = HashSet::new();
    let mut edges = Vec::with_capacity(2 * rows * cols);
    let idx = |r: usize, c: usize| r * cols + c;
    for r in 0..rows {
        for c in 0..cols {
            let v = idx(r, c);
            for u in [idx(r, (c + 1) % cols), idx((r + 1) % rows, c)] {
                if seen.insert((v.min(u), v.max(u))) {
                    let w = match signs {
                        SignLaw::AllPositive => 1.0,
                        SignLaw::RandomPm1 => {
                            if rng.gen::<bool>() {
                                1.0
                            } else {
                                -1.0
                            }
                        }
                    };
                    edges.push(Edge { i: v, j: u, w });
                }
            }
        }
    }
    Graph::new(rows * cols, edges)
}

/// Dense `2^n x 2^n` weight matrix with `n = ceil(log2 N)`; rows and columns
/// `N..2^n` are zero.
pub fn pad_to_qubits(g: &Graph) -> WeightMatrix {
    let dim = 1usize << g.n_qubits();
    let mut m = nalgebra::DMatrix::zeros(dim, dim);
    for e in &g.edges {
        m[(e.i, e.j)] = e.w;
        m[(e.j, e.i)] = e.w;
    }
    WeightMatrix::from_symmetric_unchecked(m)
}
