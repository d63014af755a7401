//! Graph representation, edge-list I/O, and canonicalization of a seeded
//! matching problem into the block form the solver consumes.
//!
//! Graphs are dense: a label list plus a square weighted adjacency matrix.
//! Vertex identity is the label; the row/column index of a vertex is an
//! artifact of load order and carries no meaning outside this process.

use std::collections::{HashMap, HashSet};
use std::io::{self, BufRead, Write};

use ndarray::{s, Array2, ArrayView2};
use thiserror::Error;

/// Errors from graph construction, parsing, and canonicalization.
#[derive(Debug, Error)]
pub enum GraphError {
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("graph has no vertices")]
    Empty,
    #[error("invalid vertex label {0:?}: labels must be nonempty and contain no whitespace or '#'")]
    InvalidLabel(String),
    #[error("duplicate vertex label {0:?}")]
    DuplicateLabel(String),
    #[error("adjacency matrix is {rows}x{cols} but the graph has {labels} labels")]
    ShapeMismatch {
        rows: usize,
        cols: usize,
        labels: usize,
    },
    #[error("non-finite weight at ({row}, {col})")]
    NonFiniteWeight { row: usize, col: usize },
    #[error("graphs have different vertex counts: {left} vs {right}")]
    SizeMismatch { left: usize, right: usize },
    #[error("duplicate seed entry {0:?}")]
    DuplicateSeed(String),
    #[error("seed label {label:?} does not name a vertex of the {side} graph")]
    UnknownSeed { label: String, side: &'static str },
    #[error("all {0} vertices are seeded; nothing is left to match")]
    NothingToMatch(usize),
    #[error("invalid vertex mapping: {0}")]
    InvalidMapping(String),
    #[error(transparent)]
    Io(#[from] io::Error),
}

/// An undirected or directed weighted graph on labeled vertices.
///
/// Invariants, enforced at construction: at least one vertex, distinct
/// well-formed labels, a square adjacency matrix of matching size with
/// finite entries. A zero weight means "no edge".
#[derive(Debug, Clone, PartialEq)]
pub struct Graph {
    labels: Vec<String>,
    adj: Array2<f64>,
}

fn label_ok(label: &str) -> bool {
    !label.is_empty() && !label.contains('#') && !label.chars().any(char::is_whitespace)
}

impl Graph {
    pub fn new(labels: Vec<String>, adj: Array2<f64>) -> Result<Self, GraphError> {
        if labels.is_empty() {
            return Err(GraphError::Empty);
        }
        let mut seen = HashSet::new();
        for label in &labels {
            if !label_ok(label) {
                return Err(GraphError::InvalidLabel(label.clone()));
            }
            if !seen.insert(label.as_str()) {
                return Err(GraphError::DuplicateLabel(label.clone()));
            }
        }
        if adj.nrows() != labels.len() || adj.ncols() != labels.len() {
            return Err(GraphError::ShapeMismatch {
                rows: adj.nrows(),
                cols: adj.ncols(),
                labels: labels.len(),
            });
        }
        for ((row, col), &w) in adj.indexed_iter() {
            if !w.is_finite() {
                return Err(GraphError::NonFiniteWeight { row, col });
            }
        }
        Ok(Graph { labels, adj })
    }

    /// Number of vertices.
    pub fn order(&self) -> usize {
        self.labels.len()
    }

    /// Vertex labels in index order.
    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn adj(&self) -> &Array2<f64> {
        &self.adj
    }

    /// Entrywise symmetrization: each weight becomes the max of the weight
    /// and its transpose, so an arc in either direction yields an edge.
    pub fn symmetrized(&self) -> Graph {
        let n = self.order();
        let mut adj = self.adj.clone();
        for i in 0..n {
            for j in (i + 1)..n {
                let w = adj[[i, j]].max(adj[[j, i]]);
                adj[[i, j]] = w;
                adj[[j, i]] = w;
            }
        }
        Graph {
            labels: self.labels.clone(),
            adj,
        }
    }

    /// Collapse weights to {0, 1}: nonzero becomes 1, and the diagonal is
    /// cleared so the result is a simple unweighted graph.
    pub fn binarized(&self) -> Graph {
        let mut adj = self.adj.mapv(|w| if w != 0.0 { 1.0 } else { 0.0 });
        adj.diag_mut().fill(0.0);
        Graph {
            labels: self.labels.clone(),
            adj,
        }
    }

    fn index_map(&self) -> HashMap<&str, usize> {
        self.labels
            .iter()
            .enumerate()
            .map(|(i, label)| (label.as_str(), i))
            .collect()
    }
}

/// Parse a whitespace-separated edge list.
///
/// Each nonempty line is `u v` (weight 1) or `u v w`. `#` starts a comment
/// that runs to the end of the line; blank lines are skipped. Vertices are
/// registered in first-appearance order, and a repeated `(u, v)` pair keeps
/// the last weight. A self-loop line `u u 0` registers a vertex without
/// adding an edge.
pub fn load_edge_list<R: BufRead>(reader: R) -> Result<Graph, GraphError> {
    let mut labels: Vec<String> = Vec::new();
    let mut index: HashMap<String, usize> = HashMap::new();
    let mut edges: Vec<(usize, usize, f64)> = Vec::new();
    let intern = |token: &str, labels: &mut Vec<String>, index: &mut HashMap<String, usize>| {
        *index.entry(token.to_string()).or_insert_with(|| {
            labels.push(token.to_string());
            labels.len() - 1
        })
    };
    for (lineno, line) in reader.lines().enumerate() {
        let line = line?;
        let lineno = lineno + 1;
        let text = line.split('#').next().unwrap_or("");
        let tokens: Vec<&str> = text.split_whitespace().collect();
        let (u, v, w) = match tokens.len() {
            0 => continue,
            2 => (tokens[0], tokens[1], 1.0),
            3 => {
                let w: f64 = tokens[2].parse().map_err(|_| GraphError::Parse {
                    line: lineno,
                    msg: format!("weight {:?} is not a number", tokens[2]),
                })?;
                if !w.is_finite() {
                    return Err(GraphError::Parse {
                        line: lineno,
                        msg: format!("weight {:?} is not finite", tokens[2]),
                    });
                }
                (tokens[0], tokens[1], w)
            }
            k => {
                return Err(GraphError::Parse {
                    line: lineno,
                    msg: format!("expected 'u v' or 'u v w', found {k} fields"),
                })
            }
        };
        let ui = intern(u, &mut labels, &mut index);
        let vi = intern(v, &mut labels, &mut index);
        edges.push((ui, vi, w));
    }
    if labels.is_empty() {
        return Err(GraphError::Empty);
    }
    let n = labels.len();
    let mut adj = Array2::zeros((n, n));
    for (u, v, w) in edges {
        adj[[u, v]] = w;
    }
    Graph::new(labels, adj)
}

/// Write `g` in the edge-list dialect `load_edge_list` reads, such that
/// reloading reproduces the graph exactly, including vertex order.
pub fn write_edge_list<W: Write>(g: &Graph, mut out: W) -> io::Result<()> {
    // One self-loop line per vertex pins the vertex order and keeps
    // isolated vertices; weight 0 adds no edge.
    for (i, label) in g.labels().iter().enumerate() {
        writeln!(out, "{label} {label} {}", g.adj()[[i, i]])?;
    }
    for i in 0..g.order() {
        for j in 0..g.order() {
            let w = g.adj()[[i, j]];
            if i != j && w != 0.0 {
                writeln!(out, "{} {} {w}", g.labels()[i], g.labels()[j])?;
            }
        }
    }
    Ok(())
}

/// A partial correspondence `psi`: ordered pairs of (first-graph label,
/// second-graph label), distinct on each side.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct SeedSpec {
    pairs: Vec<(String, String)>,
}

impl SeedSpec {
    pub fn new(pairs: Vec<(String, String)>) -> Result<Self, GraphError> {
        let mut left = HashSet::new();
        let mut right = HashSet::new();
        for (u, v) in &pairs {
            if !left.insert(u.as_str()) {
                return Err(GraphError::DuplicateSeed(u.clone()));
            }
            if !right.insert(v.as_str()) {
                return Err(GraphError::DuplicateSeed(v.clone()));
            }
        }
        Ok(SeedSpec { pairs })
    }

    pub fn empty() -> Self {
        SeedSpec::default()
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn pairs(&self) -> &[(String, String)] {
        &self.pairs
    }
}

/// Parse a seed file: one `u v` pair per line, with the same comment and
/// blank-line rules as edge lists. An empty file is a valid empty spec.
pub fn load_seed_spec<R: BufRead>(reader: R) -> Result<SeedSpec, GraphError> {
    let mut pairs = Vec::new();
    for (lineno, line) in reader.lines().enumerate() {
        let line = line?;
        let text = line.split('#').next().unwrap_or("");
        let tokens: Vec<&str> = text.split_whitespace().collect();
        match tokens.len() {
            0 => continue,
            2 => pairs.push((tokens[0].to_string(), tokens[1].to_string())),
            k => {
                return Err(GraphError::Parse {
                    line: lineno + 1,
                    msg: format!("expected 'u v', found {k} fields"),
                })
            }
        }
    }
    SeedSpec::new(pairs)
}

/// A matching problem in solver form: adjacency matrices of both graphs
/// reordered so the `m` seeded vertices occupy the leading rows/columns, in
/// seed order, followed by the `n` nonseeds in original order.
///
/// Row/column `i < m` of `a` and of `b` refer to the two endpoints of seed
/// pair `i`, so the identity on the first block is the seed correspondence.
#[derive(Debug, Clone)]
pub struct SeededInstance {
    a: Array2<f64>,
    b: Array2<f64>,
    m: usize,
    n: usize,
    labels1: Vec<String>,
    labels2: Vec<String>,
}

impl SeededInstance {
    /// First graph's adjacency in canonical order, `(m + n)` square.
    pub fn a(&self) -> &Array2<f64> {
        &self.a
    }

    /// Second graph's adjacency in canonical order.
    pub fn b(&self) -> &Array2<f64> {
        &self.b
    }

    /// Seed count.
    pub fn m(&self) -> usize {
        self.m
    }

    /// Nonseed count; the solver works over `n x n` assignment matrices.
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn total(&self) -> usize {
        self.m + self.n
    }

    /// First-graph labels in canonical order (seeds first).
    pub fn labels1(&self) -> &[String] {
        &self.labels1
    }

    /// Second-graph labels in canonical order (seeds first).
    pub fn labels2(&self) -> &[String] {
        &self.labels2
    }

    pub fn a11(&self) -> ArrayView2<'_, f64> {
        self.a.slice(s![..self.m, ..self.m])
    }

    pub fn a12(&self) -> ArrayView2<'_, f64> {
        self.a.slice(s![..self.m, self.m..])
    }

    pub fn a21(&self) -> ArrayView2<'_, f64> {
        self.a.slice(s![self.m.., ..self.m])
    }

    pub fn a22(&self) -> ArrayView2<'_, f64> {
        self.a.slice(s![self.m.., self.m..])
    }

    pub fn b11(&self) -> ArrayView2<'_, f64> {
        self.b.slice(s![..self.m, ..self.m])
    }

    pub fn b12(&self) -> ArrayView2<'_, f64> {
        self.b.slice(s![..self.m, self.m..])
    }

    pub fn b21(&self) -> ArrayView2<'_, f64> {
        self.b.slice(s![self.m.., ..self.m])
    }

    pub fn b22(&self) -> ArrayView2<'_, f64> {
        self.b.slice(s![self.m.., self.m..])
    }
}

/// Reorder both graphs into a [`SeededInstance`].
///
/// Fails if the graphs differ in order, a seed label is unknown on either
/// side, or every vertex is seeded.
pub fn canonicalize(
    g1: &Graph,
    g2: &Graph,
    seeds: &SeedSpec,
) -> Result<SeededInstance, GraphError> {
    let c = g1.order();
    if g2.order() != c {
        return Err(GraphError::SizeMismatch {
            left: c,
            right: g2.order(),
        });
    }
    let m = seeds.len();
    if m >= c {
        return Err(GraphError::NothingToMatch(c));
    }
    let order1 = seeded_order(g1, seeds.pairs().iter().map(|(u, _)| u.as_str()), "first")?;
    let order2 = seeded_order(g2, seeds.pairs().iter().map(|(_, v)| v.as_str()), "second")?;
    let reorder = |g: &Graph, order: &[usize]| {
        let t = g.order();
        Array2::from_shape_fn((t, t), |(i, j)| g.adj()[[order[i], order[j]]])
    };
    let relabel = |g: &Graph, order: &[usize]| -> Vec<String> {
        order.iter().map(|&i| g.labels()[i].clone()).collect()
    };
    Ok(SeededInstance {
        a: reorder(g1, &order1),
        b: reorder(g2, &order2),
        m,
        n: c - m,
        labels1: relabel(g1, &order1),
        labels2: relabel(g2, &order2),
    })
}

fn seeded_order<'a>(
    g: &Graph,
    seed_labels: impl Iterator<Item = &'a str>,
    side: &'static str,
) -> Result<Vec<usize>, GraphError> {
    let index = g.index_map();
    let mut order = Vec::with_capacity(g.order());
    let mut seeded = vec![false; g.order()];
    for label in seed_labels {
        let &i = index.get(label).ok_or_else(|| GraphError::UnknownSeed {
            label: label.to_string(),
            side,
        })?;
        // SeedSpec guarantees distinct labels per side.
        seeded[i] = true;
        order.push(i);
    }
    order.extend((0..g.order()).filter(|&i| !seeded[i]));
    Ok(order)
}

/// Count ordered vertex pairs `(u, v)`, including `u = v`, where exactly
/// one of `(u, v)` in `g1` and `(phi(u), phi(v))` in `g2` is an edge. A
/// pair is an edge when its weight is nonzero. `mapping` must be a
/// bijection from all of `g1`'s vertices onto `g2`'s.
pub fn count_disagreements(
    g1: &Graph,
    g2: &Graph,
    mapping: &[(String, String)],
) -> Result<usize, GraphError> {
    let c = g1.order();
    if g2.order() != c {
        return Err(GraphError::SizeMismatch {
            left: c,
            right: g2.order(),
        });
    }
    if mapping.len() != c {
        return Err(GraphError::InvalidMapping(format!(
            "mapping has {} pairs but the graphs have {c} vertices",
            mapping.len()
        )));
    }
    let index1 = g1.index_map();
    let index2 = g2.index_map();
    let mut phi = vec![usize::MAX; c];
    let mut hit = vec![false; c];
    for (u, v) in mapping {
        let &ui = index1
            .get(u.as_str())
            .ok_or_else(|| GraphError::InvalidMapping(format!("unknown vertex {u:?}")))?;
        let &vi = index2
            .get(v.as_str())
            .ok_or_else(|| GraphError::InvalidMapping(format!("unknown image vertex {v:?}")))?;
        if phi[ui] != usize::MAX {
            return Err(GraphError::InvalidMapping(format!(
                "vertex {u:?} is mapped twice"
            )));
        }
        if hit[vi] {
            return Err(GraphError::InvalidMapping(format!(
                "image vertex {v:?} is used twice"
            )));
        }
        phi[ui] = vi;
        hit[vi] = true;
    }
    let a = g1.adj();
    let b = g2.adj();
    let mut count = 0;
    for u in 0..c {
        for v in 0..c {
            let e1 = a[[u, v]] != 0.0;
            let e2 = b[[phi[u], phi[v]]] != 0.0;
            if e1 != e2 {
                count += 1;
            }
        }
    }
    Ok(count)
}
