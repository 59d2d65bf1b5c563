//! Weighted graphs, partial distance matrices and graph-derived matrices.

use std::collections::HashSet;
use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::Matrix;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Edge {
    pub u: usize,
    pub v: usize,
    pub w: f64,
}

/// Simple undirected graph with nonnegative finite edge weights.
///
/// Edges are stored with `u < v` in insertion order.
#[derive(Clone, Debug, PartialEq)]
pub struct WeightedGraph {
    n: usize,
    edges: Vec<Edge>,
}

#[derive(Serialize, Deserialize)]
struct GraphJson {
    n: usize,
    edges: Vec<(usize, usize, f64)>,
}

impl WeightedGraph {
    /// Validates and normalizes the edge list. Endpoint order within an edge
    /// is not significant.
    pub fn new(n: usize, edges: impl IntoIterator<Item = (usize, usize, f64)>) -> Result<Self> {
        let mut seen = HashSet::new();
        let mut out = Vec::new();
        for (a, b, w) in edges {
            if a >= n || b >= n {
                return Err(Error::InvalidGraph(format!(
                    "edge ({a}, {b}) out of range for n = {n}"
                )));
            }
            if a == b {
                return Err(Error::InvalidGraph(format!("loop at vertex {a}")));
            }
            if !w.is_finite() || w < 0.0 {
                return Err(Error::InvalidGraph(format!(
                    "edge ({a}, {b}) has invalid weight {w}"
                )));
            }
            let (u, v) = if a < b { (a, b) } else { (b, a) };
            if !seen.insert((u, v)) {
                return Err(Error::InvalidGraph(format!("duplicate edge ({u}, {v})")));
            }
            out.push(Edge { u, v, w });
        }
        Ok(Self { n, edges: out })
    }

    pub fn empty(n: usize) -> Self {
        Self {
            n,
            edges: Vec::new(),
        }
    }

    pub fn complete_from_matrix(d: &Matrix) -> Result<Self> {
        let n = d.rows();
        let edges = (0..n).flat_map(|i| ((i + 1)..n).map(move |j| (i, j)));
        Self::new(n, edges.map(|(i, j)| (i, j, d[(i, j)])).collect::<Vec<_>>())
    }

    pub fn path(n: usize, w: f64) -> Self {
        Self::new(n, (1..n).map(|i| (i - 1, i, w))).expect("valid path")
    }

    pub fn cycle(n: usize, w: f64) -> Self {
        let mut e: Vec<_> = (1..n).map(|i| (i - 1, i, w)).collect();
        if n > 2 {
            e.push((n - 1, 0, w));
        }
        Self::new(n, e).expect("valid cycle")
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn max_weight(&self) -> f64 {
        self.edges.iter().fold(0.0, |m, e| m.max(e.w))
    }

    pub fn total_weight(&self) -> f64 {
        self.edges.iter().map(|e| e.w).sum()
    }

    /// Neighbour lists with weights.
    pub fn neighbors(&self) -> Vec<Vec<(usize, f64)>> {
        let mut adj = vec![Vec::new(); self.n];
        for e in &self.edges {
            adj[e.u].push((e.v, e.w));
            adj[e.v].push((e.u, e.w));
        }
        adj
    }

    /// Component label of every vertex, labels numbered by first vertex.
    pub fn components(&self) -> Vec<usize> {
        let adj = self.neighbors();
        let mut label = vec![usize::MAX; self.n];
        let mut next = 0;
        for s in 0..self.n {
            if label[s] != usize::MAX {
                continue;
            }
            label[s] = next;
            let mut stack = vec![s];
            while let Some(u) = stack.pop() {
                for &(v, _) in &adj[u] {
                    if label[v] == usize::MAX {
                        label[v] = next;
                        stack.push(v);
                    }
                }
            }
            next += 1;
        }
        label
    }

    pub fn is_connected(&self) -> bool {
        self.components().iter().all(|&c| c == 0)
    }

    pub fn to_json(&self) -> String {
        let j = GraphJson {
            n: self.n,
            edges: self.edges.iter().map(|e| (e.u, e.v, e.w)).collect(),
        };
        serde_json::to_string(&j).expect("serializable")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let j: GraphJson = serde_json::from_str(text)?;
        Self::new(j.n, j.edges)
    }

    /// Edge-list text: a header line `n m`, then one `u v w` line per edge.
    pub fn to_edge_list(&self) -> String {
        let mut buf = Vec::new();
        self.write_edge_list(&mut buf).expect("write to Vec");
        String::from_utf8(buf).expect("ascii")
    }

    pub fn write_edge_list<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "{} {}", self.n, self.m())?;
        for e in &self.edges {
            writeln!(w, "{} {} {}", e.u, e.v, e.w)?;
        }
        Ok(())
    }

    pub fn from_edge_list(text: &str) -> Result<Self> {
        Self::read_edge_list(text.as_bytes())
    }

    pub fn read_edge_list<R: BufRead>(reader: R) -> Result<Self> {
        let mut lines = reader
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l))
            .filter(|(_, l)| l.as_ref().map_or(true, |s| !s.trim().is_empty()));
        let (ln, header) = lines.next().ok_or(Error::EmptyInput)?;
        let header = header?;
        let head: Vec<&str> = header.split_whitespace().collect();
        if head.len() != 2 {
            return Err(Error::parse(ln, "header must be `n m`"));
        }
        let n: usize = head[0]
            .parse()
            .map_err(|_| Error::parse(ln, format!("bad vertex count {:?}", head[0])))?;
        let m: usize = head[1]
            .parse()
            .map_err(|_| Error::parse(ln, format!("bad edge count {:?}", head[1])))?;
        let mut edges = Vec::new();
        for (ln, line) in lines {
            let line = line?;
            let f: Vec<&str> = line.split_whitespace().collect();
            if f.len() != 3 {
                return Err(Error::parse(ln, "edge line must be `u v w`"));
            }
            let u: usize = f[0]
                .parse()
                .map_err(|_| Error::parse(ln, format!("bad vertex {:?}", f[0])))?;
            let v: usize = f[1]
                .parse()
                .map_err(|_| Error::parse(ln, format!("bad vertex {:?}", f[1])))?;
            let w: f64 = f[2]
                .parse()
                .map_err(|_| Error::parse(ln, format!("bad weight {:?}", f[2])))?;
            edges.push((u, v, w));
        }
        if edges.len() != m {
            return Err(Error::parse(
                0,
                format!("header announces {m} edges, found {}", edges.len()),
            ));
        }
        Self::new(n, edges)
    }
}

/// Symmetric n x n matrix in which only some entries are specified.
#[derive(Clone, Debug, PartialEq)]
pub struct PartialDistanceMatrix {
    value: Matrix,
    known: Vec<bool>,
}

impl PartialDistanceMatrix {
    /// Builds from values and a mask. Unknown values are ignored and stored
    /// as 0.
    pub fn new(value: Matrix, known: Vec<bool>) -> Result<Self> {
        let n = value.rows();
        if !value.is_square() {
            return Err(Error::NotSquare {
                rows: n,
                cols: value.cols(),
            });
        }
        if known.len() != n * n {
            return Err(Error::DimensionMismatch {
                expected: n * n,
                found: known.len(),
            });
        }
        let mut value = value;
        let mut known = known;
        for i in 0..n {
            known[i * n + i] = true;
            if value[(i, i)] != 0.0 {
                return Err(Error::BadDiagonal {
                    index: i,
                    value: value[(i, i)],
                });
            }
            for j in (i + 1)..n {
                if known[i * n + j] != known[j * n + i] {
                    return Err(Error::InvalidGraph(format!(
                        "mask not symmetric at ({i}, {j})"
                    )));
                }
                if known[i * n + j] {
                    let gap = (value[(i, j)] - value[(j, i)]).abs();
                    if gap > crate::linalg::SYMMETRY_TOL * value[(i, j)].abs().max(1.0) {
                        return Err(Error::NotSymmetric { i, j, gap });
                    }
                    if value[(i, j)] < 0.0 {
                        return Err(Error::InvalidGraph(format!(
                            "negative distance at ({i}, {j})"
                        )));
                    }
                    value[(j, i)] = value[(i, j)];
                } else {
                    value[(i, j)] = 0.0;
                    value[(j, i)] = 0.0;
                }
            }
        }
        Ok(Self { value, known })
    }

    /// Every entry known.
    pub fn full(d: Matrix) -> Result<Self> {
        let n = d.rows();
        Self::new(d, vec![true; n * n])
    }

    pub fn n(&self) -> usize {
        self.value.rows()
    }

    pub fn value(&self) -> &Matrix {
        &self.value
    }

    pub fn is_known(&self, i: usize, j: usize) -> bool {
        self.known[i * self.n() + j]
    }

    pub fn known_mask(&self) -> &[bool] {
        &self.known
    }

    /// Off-diagonal known pairs with `i < j`.
    pub fn known_pairs(&self) -> Vec<(usize, usize)> {
        let n = self.n();
        (0..n)
            .flat_map(|i| ((i + 1)..n).map(move |j| (i, j)))
            .filter(|&(i, j)| self.is_known(i, j))
            .collect()
    }

    pub fn unknown_pairs(&self) -> Vec<(usize, usize)> {
        let n = self.n();
        (0..n)
            .flat_map(|i| ((i + 1)..n).map(move |j| (i, j)))
            .filter(|&(i, j)| !self.is_known(i, j))
            .collect()
    }

    /// Graph on the known off-diagonal entries.
    pub fn known_graph(&self) -> WeightedGraph {
        let pairs = self.known_pairs();
        WeightedGraph::new(
            self.n(),
            pairs.into_iter().map(|(i, j)| (i, j, self.value[(i, j)])),
        )
        .expect("validated on construction")
    }
}

/// Mask true exactly on edges and the diagonal.
pub fn partial_from_graph(g: &WeightedGraph) -> PartialDistanceMatrix {
    let n = g.n();
    let mut value = Matrix::zeros(n, n);
    let mut known = vec![false; n * n];
    for i in 0..n {
        known[i * n + i] = true;
    }
    for e in g.edges() {
        value[(e.u, e.v)] = e.w;
        value[(e.v, e.u)] = e.w;
        known[e.u * n + e.v] = true;
        known[e.v * n + e.u] = true;
    }
    PartialDistanceMatrix { value, known }
}

/// All-pairs shortest path lengths.
///
/// Relaxation passes repeat until nothing changes, so the triangle
/// inequality holds in floating point, not only in exact arithmetic.
pub fn floyd_warshall_complete(g: &WeightedGraph) -> Result<Matrix> {
    let n = g.n();
    let mut d = vec![f64::INFINITY; n * n];
    for i in 0..n {
        d[i * n + i] = 0.0;
    }
    for e in g.edges() {
        let w = d[e.u * n + e.v].min(e.w);
        d[e.u * n + e.v] = w;
        d[e.v * n + e.u] = w;
    }
    for pass in 0..=n {
        let mut changed = false;
        for k in 0..n {
            for i in 0..n {
                let dik = d[i * n + k];
                if dik == f64::INFINITY {
                    continue;
                }
                for j in 0..n {
                    let cand = dik + d[k * n + j];
                    if cand < d[i * n + j] {
                        d[i * n + j] = cand;
                        changed = true;
                    }
                }
            }
        }
        if pass == 0 && d.iter().any(|v| v.is_infinite()) {
            return Err(Error::Disconnected);
        }
        if !changed {
            break;
        }
    }
    // Rounding can leave d[i][j] and d[j][i] a few ulps apart.
    for i in 0..n {
        for j in (i + 1)..n {
            let v = d[i * n + j].min(d[j * n + i]);
            d[i * n + j] = v;
            d[j * n + i] = v;
        }
    }
    Matrix::new(n, n, d)
}

pub fn adjacency(g: &WeightedGraph) -> Matrix {
    let mut a = Matrix::zeros(g.n(), g.n());
    for e in g.edges() {
        a[(e.u, e.v)] = e.w;
        a[(e.v, e.u)] = e.w;
    }
    a
}

pub fn degrees(g: &WeightedGraph) -> Vec<f64> {
    let mut d = vec![0.0; g.n()];
    for e in g.edges() {
        d[e.u] += e.w;
        d[e.v] += e.w;
    }
    d
}

/// `L = diag(degrees) - A`.
pub fn laplacian(g: &WeightedGraph) -> Matrix {
    let mut l = adjacency(g).scale(-1.0);
    for (i, d) in degrees(g).into_iter().enumerate() {
        l[(i, i)] = d;
    }
    l
}

/// Per-feature distance function used by [`table_to_distance_graph`].
pub type FeatureDistance<'a, T> = &'a dyn Fn(&T, &T) -> f64;

/// Database distance graph: records are vertices, and two records are joined
/// when every feature is defined on both, with weight the sum of feature
/// distances.
pub fn table_to_distance_graph<T>(
    records: &[Vec<Option<T>>],
    features: &[FeatureDistance<'_, T>],
) -> Result<WeightedGraph> {
    for (r, rec) in records.iter().enumerate() {
        if rec.len() != features.len() {
            return Err(Error::parse(
                r + 1,
                format!(
                    "record has {} cells, expected {}",
                    rec.len(),
                    features.len()
                ),
            ));
        }
    }
    let mut edges = Vec::new();
    for r in 0..records.len() {
        for s in (r + 1)..records.len() {
            let mut total = 0.0;
            let mut defined = true;
            for (f, dist) in features.iter().enumerate() {
                match (&records[r][f], &records[s][f]) {
                    (Some(a), Some(b)) => total += dist(a, b),
                    _ => {
                        defined = false;
                        break;
                    }
                }
            }
            if defined {
                edges.push((r, s, total));
            }
        }
    }
    WeightedGraph::new(records.len(), edges)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::jacobi_eig;
    use crate::rng::SeededRng;
    use proptest::prelude::*;

    fn random_connected(n: usize, extra: usize, seed: u64) -> WeightedGraph {
        let mut r = SeededRng::new(seed);
        let mut pairs = HashSet::new();
        let mut edges = Vec::new();
        for v in 1..n {
            let u = r.below(v);
            pairs.insert((u, v));
            edges.push((u, v, r.uniform_in(0.1, 5.0)));
        }
        for _ in 0..extra {
            let a = r.below(n);
            let b = r.below(n);
            let (u, v) = (a.min(b), a.max(b));
            if u != v && pairs.insert((u, v)) {
                edges.push((u, v, r.uniform_in(0.1, 5.0)));
            }
        }
        WeightedGraph::new(n, edges).unwrap()
    }

    #[test]
    fn completion_examples() {
        let d = floyd_warshall_complete(&WeightedGraph::path(3, 1.0)).unwrap();
        assert_eq!(d[(0, 2)], 2.0);

        let tri = WeightedGraph::new(3, [(0, 1, 1.0), (1, 2, 1.0), (0, 2, 3.0)]).unwrap();
        let d = floyd_warshall_complete(&tri).unwrap();
        assert_eq!(d[(0, 2)], 2.0);

        let pts = [[0.0, 0.0], [3.0, 0.0], [0.0, 4.0], [1.0, 1.0]];
        let m = Matrix::from_fn(4, 4, |i, j| crate::linalg::sq_dist(&pts[i], &pts[j]).sqrt());
        let g = WeightedGraph::complete_from_matrix(&m).unwrap();
        assert_eq!(floyd_warshall_complete(&g).unwrap(), m);
    }

    #[test]
    fn completion_rejects_disconnected() {
        let g = WeightedGraph::new(4, [(0, 1, 1.0), (2, 3, 1.0)]).unwrap();
        assert!(matches!(
            floyd_warshall_complete(&g),
            Err(Error::Disconnected)
        ));
    }

    #[test]
    fn laplacian_examples() {
        let g = WeightedGraph::new(2, [(0, 1, 1.0)]).unwrap();
        assert_eq!(
            laplacian(&g),
            Matrix::from_rows(&[[1.0, -1.0], [-1.0, 1.0]]).unwrap()
        );
        let tri = WeightedGraph::cycle(3, 1.0);
        let expect = Matrix::from_fn(3, 3, |i, j| if i == j { 2.0 } else { -1.0 });
        assert_eq!(laplacian(&tri), expect);
        assert_eq!(laplacian(&WeightedGraph::empty(3)), Matrix::zeros(3, 3));
    }

    #[test]
    fn adjacency_and_degrees() {
        let star = WeightedGraph::new(4, [(0, 1, 1.0), (0, 2, 1.0), (0, 3, 1.0)]).unwrap();
        assert_eq!(degrees(&star)[0], 3.0);
        let l = laplacian(&star);
        let a = adjacency(&star);
        let recon = Matrix::from_diag(&degrees(&star)).sub(&a).unwrap();
        assert_eq!(l, recon);
        let g = WeightedGraph::new(2, [(1, 0, 2.5)]).unwrap();
        assert_eq!(adjacency(&g)[(0, 1)], 2.5);
    }

    #[test]
    fn partial_examples() {
        let p = partial_from_graph(&WeightedGraph::path(3, 1.0));
        assert_eq!(p.known_pairs(), vec![(0, 1), (1, 2)]);
        let k3 = partial_from_graph(&WeightedGraph::cycle(3, 1.0));
        assert!(k3.known_mask().iter().all(|&b| b));
        let e = partial_from_graph(&WeightedGraph::empty(3));
        assert!(e.known_pairs().is_empty());
        assert!((0..3).all(|i| e.is_known(i, i)));
    }

    #[test]
    fn database_graph() {
        let abs = |a: &f64, b: &f64| (a - b).abs();
        let feats: Vec<FeatureDistance<f64>> = vec![&abs, &abs];
        let g = table_to_distance_graph(
            &[vec![Some(1.0), Some(2.0)], vec![Some(4.0), Some(0.0)]],
            &feats,
        )
        .unwrap();
        assert_eq!(g.edges(), &[Edge { u: 0, v: 1, w: 5.0 }]);

        let g = table_to_distance_graph(
            &[
                vec![Some(1.0), Some(2.0)],
                vec![Some(4.0), None],
                vec![Some(0.0), Some(0.0)],
            ],
            &feats,
        )
        .unwrap();
        assert_eq!(g.m(), 1);
        assert!(g.edges().iter().all(|e| e.u != 1 && e.v != 1));

        let g = table_to_distance_graph(&vec![vec![Some(3.0), Some(3.0)]; 2], &feats).unwrap();
        assert_eq!(g.edges()[0].w, 0.0);
    }

    #[test]
    fn graph_validation() {
        assert!(WeightedGraph::new(2, [(0, 1, 1.0), (1, 0, 2.0)]).is_err());
        assert!(WeightedGraph::new(2, [(0, 0, 1.0)]).is_err());
        assert!(WeightedGraph::new(2, [(0, 2, 1.0)]).is_err());
        assert!(WeightedGraph::new(2, [(0, 1, -1.0)]).is_err());
        assert!(WeightedGraph::new(2, [(0, 1, 0.0)]).is_ok());
    }

    #[test]
    fn edge_list_parsing() {
        let g = WeightedGraph::from_edge_list("3 2\n0 1 1.5\n1 2 2\n").unwrap();
        assert_eq!(g.m(), 2);
        assert!(WeightedGraph::from_edge_list("3 3\n0 1 1\n").is_err());
        assert!(WeightedGraph::from_edge_list("3\n").is_err());
        assert!(WeightedGraph::from_edge_list("2 1\n0 1 x\n").is_err());
        assert!(WeightedGraph::from_edge_list("").is_err());
        assert!(WeightedGraph::from_json(r#"{"n":2,"edges":[[0,1,1.0],[0,1,2.0]]}"#).is_err());
    }

    fn arb_graph() -> impl Strategy<Value = WeightedGraph> {
        (1usize..12, any::<u64>(), 0usize..20).prop_map(|(n, seed, extra)| {
            let mut r = SeededRng::new(seed);
            let mut g = random_connected(n, extra, seed);
            // exercise awkward weights: tiny, huge, zero
            let edges: Vec<_> = g
                .edges()
                .iter()
                .map(|e| {
                    let w = match r.below(4) {
                        0 => 0.0,
                        1 => e.w * 1e-300,
                        2 => e.w * 1e200,
                        _ => e.w,
                    };
                    (e.u, e.v, w)
                })
                .collect();
            g = WeightedGraph::new(n, edges).unwrap();
            g
        })
    }

    proptest! {
        #[test]
        fn formats_round_trip_bit_exactly(g in arb_graph()) {
            let text = g.to_edge_list();
            let back = WeightedGraph::from_edge_list(&text).unwrap();
            prop_assert_eq!(&back, &g);
            prop_assert_eq!(back.to_edge_list(), text);
            let js = g.to_json();
            let back = WeightedGraph::from_json(&js).unwrap();
            prop_assert_eq!(&back, &g);
            prop_assert_eq!(back.to_json(), js);
        }

        #[test]
        fn completion_is_a_metric(seed in any::<u64>(), n in 2usize..30, extra in 0usize..60) {
            let g = random_connected(n, extra, seed);
            let d = floyd_warshall_complete(&g).unwrap();
            for i in 0..n {
                prop_assert_eq!(d[(i, i)], 0.0);
                for j in 0..n {
                    prop_assert_eq!(d[(i, j)], d[(j, i)]);
                    for k in 0..n {
                        prop_assert!(d[(i, k)] <= d[(i, j)] + d[(j, k)]);
                    }
                }
            }
            for e in g.edges() {
                prop_assert!(d[(e.u, e.v)] <= e.w);
            }
        }

        #[test]
        fn laplacian_spectrum(seed in any::<u64>(), n in 2usize..40, extra in 0usize..40) {
            let g = random_connected(n, extra, seed);
            let l = laplacian(&g);
            for i in 0..n {
                prop_assert!(l.row(i).iter().sum::<f64>().abs() < 1e-9);
                let off: f64 = (0..n).filter(|&j| j != i).map(|j| l[(i, j)].abs()).sum();
                prop_assert!((l[(i, i)] - off).abs() < 1e-9);
            }
            let e = jacobi_eig(&l).unwrap();
            prop_assert!(e.eigenvalues[0] >= -1e-9);
            prop_assert!(e.eigenvalues[0].abs() < 1e-9);
            let u0 = e.eigenvector(0);
            let c = 1.0 / (n as f64).sqrt();
            prop_assert!(u0.iter().all(|x| (x - c).abs() < 1e-7));
            prop_assert!(e.eigenvalues[1] > 1e-9);
        }
    }
}
