//! k-means, spectral bisection and modularity clustering.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graphs::{degrees, laplacian, WeightedGraph};
use crate::linalg::{jacobi_eig, sq_dist, Matrix};
use crate::rng::SeededRng;

/// Cluster ids per element, each id in `0..k` used at least once.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "RawClustering")]
pub struct Clustering {
    pub k: usize,
    pub assignment: Vec<usize>,
}

#[derive(Deserialize)]
struct RawClustering {
    k: usize,
    assignment: Vec<usize>,
}

impl TryFrom<RawClustering> for Clustering {
    type Error = Error;
    fn try_from(raw: RawClustering) -> Result<Self> {
        Clustering::new(raw.k, raw.assignment)
    }
}

impl Clustering {
    pub fn new(k: usize, assignment: Vec<usize>) -> Result<Self> {
        if k > assignment.len() {
            return Err(Error::InvalidParameter(format!(
                "{k} clusters over {} elements leaves one empty",
                assignment.len()
            )));
        }
        let mut used = vec![false; k];
        for (i, &c) in assignment.iter().enumerate() {
            if c >= k {
                return Err(Error::InvalidParameter(format!(
                    "element {i} has cluster id {c}, expected < {k}"
                )));
            }
            used[c] = true;
        }
        if let Some(c) = used.iter().position(|u| !u) {
            return Err(Error::InvalidParameter(format!("cluster {c} is empty")));
        }
        Ok(Self { k, assignment })
    }

    /// Relabels arbitrary ids densely, in order of first appearance.
    pub fn from_labels(labels: &[usize]) -> Self {
        let mut map = std::collections::HashMap::new();
        let assignment = labels
            .iter()
            .map(|l| {
                let next = map.len();
                *map.entry(*l).or_insert(next)
            })
            .collect();
        Self {
            k: map.len(),
            assignment,
        }
    }

    pub fn singletons(n: usize) -> Self {
        Self {
            k: n,
            assignment: (0..n).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.assignment.len()
    }

    pub fn is_empty(&self) -> bool {
        self.assignment.is_empty()
    }

    pub fn sizes(&self) -> Vec<usize> {
        let mut s = vec![0; self.k];
        for &c in &self.assignment {
            s[c] += 1;
        }
        s
    }

    /// Same partition regardless of id names.
    pub fn same_partition(&self, other: &Clustering) -> bool {
        Clustering::from_labels(&self.assignment) == Clustering::from_labels(&other.assignment)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("serializable")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct KmeansResult {
    pub clustering: Clustering,
    pub objective: f64,
    /// Objective after each centroid update.
    pub history: Vec<f64>,
    pub iterations: usize,
}

fn centroids(x: &Matrix, assign: &[usize], k: usize) -> (Matrix, Vec<usize>) {
    let mut c = Matrix::zeros(k, x.cols());
    let mut count = vec![0usize; k];
    for (i, &a) in assign.iter().enumerate() {
        count[a] += 1;
        for (cj, &xj) in c.row_mut(a).iter_mut().zip(x.row(i)) {
            *cj += xj;
        }
    }
    for (a, &cnt) in count.iter().enumerate() {
        if cnt > 0 {
            c.row_mut(a).iter_mut().for_each(|v| *v /= cnt as f64);
        }
    }
    (c, count)
}

fn nearest(c: &Matrix, p: &[f64]) -> (usize, f64) {
    let mut best = (0, f64::INFINITY);
    for j in 0..c.rows() {
        let d = sq_dist(c.row(j), p);
        if d < best.1 {
            best = (j, d);
        }
    }
    best
}

/// Sum of squared distances to cluster centroids.
pub fn mssc_objective(x: &Matrix, c: &Clustering) -> f64 {
    let (cent, _) = centroids(x, &c.assignment, c.k);
    c.assignment
        .iter()
        .enumerate()
        .map(|(i, &a)| sq_dist(x.row(i), cent.row(a)))
        .sum()
}

/// Lloyd iteration from farthest-point seeding. Empty clusters are re-seeded
/// with the point farthest from its centroid.
pub fn kmeans(x: &Matrix, k: usize, seed: u64, max_iter: usize) -> Result<KmeansResult> {
    let n = x.rows();
    if n == 0 {
        return Err(Error::EmptyInput);
    }
    if k == 0 || k > n {
        return Err(Error::InvalidParameter(format!(
            "k = {k} must lie in 1..={n}"
        )));
    }
    let mut rng = SeededRng::new(seed);
    let mut seeds = vec![rng.below(n)];
    let mut mind: Vec<f64> = (0..n).map(|i| sq_dist(x.row(i), x.row(seeds[0]))).collect();
    while seeds.len() < k {
        let far = (0..n).fold(0, |b, i| if mind[i] > mind[b] { i } else { b });
        seeds.push(far);
        for (i, m) in mind.iter_mut().enumerate() {
            *m = m.min(sq_dist(x.row(i), x.row(far)));
        }
    }
    let mut cent = x.select_rows(&seeds);
    let mut assign = vec![usize::MAX; n];
    let mut history = Vec::new();
    let mut iterations = 0;
    while iterations < max_iter {
        iterations += 1;
        let mut changed = false;
        for (i, slot) in assign.iter_mut().enumerate() {
            let (a, _) = nearest(&cent, x.row(i));
            if *slot != a {
                *slot = a;
                changed = true;
            }
        }
        let (c, count) = centroids(x, &assign, k);
        cent = c;
        let cost: Vec<f64> = (0..n)
            .map(|i| sq_dist(x.row(i), cent.row(assign[i])))
            .collect();
        history.push(cost.iter().sum());
        if !changed {
            break;
        }
        for a in (0..k).filter(|&a| count[a] == 0) {
            let far = (0..n).fold(0, |b, i| if cost[i] > cost[b] { i } else { b });
            if cost[far] == 0.0 {
                break;
            }
            cent.row_mut(a).copy_from_slice(x.row(far));
        }
    }
    let clustering = Clustering::from_labels(&assign);
    let objective = mssc_objective(x, &clustering);
    Ok(KmeansResult {
        clustering,
        objective,
        history,
        iterations,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Bisection {
    pub clustering: Clustering,
    /// Second smallest Laplacian eigenvalue.
    pub fiedler_value: f64,
    /// Its eigenvector scaled to squared norm n.
    pub fiedler_vector: Vec<f64>,
}

/// Sign rounding of the Fiedler vector. Zero entries go to the smaller
/// side; if the sides still differ by more than one, the entries of the
/// larger side with smallest `|u_i|` move across.
pub fn spectral_bisect(g: &WeightedGraph) -> Result<Bisection> {
    let n = g.n();
    if n < 2 {
        return Err(Error::InvalidParameter(
            "bisection needs at least 2 vertices".into(),
        ));
    }
    if !g.is_connected() {
        return Err(Error::Disconnected);
    }
    let eig = jacobi_eig(&laplacian(g))?;
    let scale = (n as f64).sqrt();
    let u: Vec<f64> = eig.eigenvector(1).iter().map(|v| v * scale).collect();

    let mut side: Vec<Option<bool>> = u
        .iter()
        .map(|&v| {
            if v > 0.0 {
                Some(true)
            } else if v < 0.0 {
                Some(false)
            } else {
                None
            }
        })
        .collect();
    for i in 0..n {
        if side[i].is_none() {
            let pos = side.iter().filter(|s| **s == Some(true)).count();
            let neg = side.iter().filter(|s| **s == Some(false)).count();
            side[i] = Some(pos < neg);
        }
    }
    let mut side: Vec<bool> = side.into_iter().map(|s| s.unwrap_or(false)).collect();
    loop {
        let pos = side.iter().filter(|&&s| s).count();
        let neg = n - pos;
        if pos.abs_diff(neg) <= 1 {
            break;
        }
        let big = pos > neg;
        let mv = (0..n)
            .filter(|&i| side[i] == big)
            .min_by(|&a, &b| u[a].abs().total_cmp(&u[b].abs()).then(a.cmp(&b)))
            .expect("larger side is nonempty");
        side[mv] = !big;
    }
    let labels: Vec<usize> = side.iter().map(|&s| usize::from(s)).collect();
    Ok(Bisection {
        clustering: Clustering::from_labels(&labels),
        fiedler_value: eig.eigenvalues[1],
        fiedler_vector: u,
    })
}

/// Total weight of edges crossing the partition.
pub fn cut_weight(g: &WeightedGraph, c: &Clustering) -> f64 {
    g.edges()
        .iter()
        .filter(|e| c.assignment[e.u] != c.assignment[e.v])
        .map(|e| e.w)
        .sum()
}

/// Newman modularity `sum_c [W_c / W - (S_c / 2W)^2]` with `W` the total
/// edge weight, `W_c` the weight inside cluster `c` and `S_c` its total
/// weighted degree.
pub fn modularity_value(g: &WeightedGraph, c: &Clustering) -> Result<f64> {
    if c.len() != g.n() {
        return Err(Error::DimensionMismatch {
            expected: g.n(),
            found: c.len(),
        });
    }
    let w = g.total_weight();
    if w <= 0.0 {
        return Err(Error::EmptyGraph);
    }
    let mut inside = vec![0.0; c.k];
    for e in g.edges() {
        if c.assignment[e.u] == c.assignment[e.v] {
            inside[c.assignment[e.u]] += e.w;
        }
    }
    let mut strength = vec![0.0; c.k];
    for (v, d) in degrees(g).into_iter().enumerate() {
        strength[c.assignment[v]] += d;
    }
    Ok(inside
        .iter()
        .zip(&strength)
        .map(|(wc, sc)| wc / w - (sc / (2.0 * w)).powi(2))
        .sum())
}

/// Agglomerative modularity maximization: from singletons, merge the pair
/// with the largest positive gain until none is left. Ties go to the
/// lexicographically smallest pair of cluster ids, where a merged cluster
/// keeps the smaller id. A graph without edge weight stays as singletons.
pub fn greedy_modularity(g: &WeightedGraph) -> Clustering {
    let n = g.n();
    let w = g.total_weight();
    if w <= 0.0 {
        return Clustering::singletons(n);
    }
    let mut between = vec![vec![0.0; n]; n];
    for e in g.edges() {
        between[e.u][e.v] += e.w;
        between[e.v][e.u] += e.w;
    }
    let mut strength = degrees(g);
    let mut alive = vec![true; n];
    let mut label: Vec<usize> = (0..n).collect();
    let two_w2 = 2.0 * w * w;
    loop {
        let mut best: Option<(usize, usize, f64)> = None;
        for a in (0..n).filter(|&a| alive[a]) {
            for b in ((a + 1)..n).filter(|&b| alive[b]) {
                if between[a][b] <= 0.0 {
                    continue;
                }
                let gain = between[a][b] / w - strength[a] * strength[b] / two_w2;
                if gain > 0.0 && best.is_none_or(|(_, _, bg)| gain > bg) {
                    best = Some((a, b, gain));
                }
            }
        }
        let Some((a, b, _)) = best else { break };
        alive[b] = false;
        strength[a] += strength[b];
        let row_b = between[b].clone();
        for (c, v) in row_b.into_iter().enumerate() {
            between[a][c] += v;
            between[c][a] += v;
        }
        between[a][a] = 0.0;
        for l in label.iter_mut() {
            if *l == b {
                *l = a;
            }
        }
    }
    Clustering::from_labels(&label)
}

/// Largest instance accepted by [`modularity_exact_tiny`].
pub const EXACT_MAX_N: usize = 10;

/// Exhaustive search over set partitions. Returns the first maximizer in
/// restricted-growth order and its modularity (0 for a graph without edge
/// weight, which yields singletons).
pub fn modularity_exact_tiny(g: &WeightedGraph) -> Result<(Clustering, f64)> {
    let n = g.n();
    if n > EXACT_MAX_N {
        return Err(Error::TooLarge {
            n,
            max: EXACT_MAX_N,
        });
    }
    if g.total_weight() <= 0.0 {
        return Ok((Clustering::singletons(n), 0.0));
    }
    let mut rgs = vec![0usize; n];
    let mut best: Option<(Vec<usize>, f64)> = None;
    loop {
        let c = Clustering::from_labels(&rgs);
        let q = modularity_value(g, &c)?;
        if best.as_ref().is_none_or(|(_, bq)| q > *bq + 1e-12) {
            best = Some((rgs.clone(), q));
        }
        if !next_partition(&mut rgs) {
            let (a, q) = best.expect("at least one partition");
            return Ok((Clustering::from_labels(&a), q));
        }
    }
}

/// Advances a restricted growth string (`a[i] <= 1 + max(a[..i])`) in
/// lexicographic order; false after the last one.
fn next_partition(rgs: &mut [usize]) -> bool {
    for i in (1..rgs.len()).rev() {
        let m = rgs[..i].iter().copied().max().unwrap_or(0);
        if rgs[i] <= m {
            rgs[i] += 1;
            rgs.iter_mut().skip(i + 1).for_each(|v| *v = 0);
            return true;
        }
    }
    false
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn two_triangles_bridge() -> WeightedGraph {
        WeightedGraph::new(
            6,
            [
                (0, 1, 1.0),
                (1, 2, 1.0),
                (0, 2, 1.0),
                (3, 4, 1.0),
                (4, 5, 1.0),
                (3, 5, 1.0),
                (2, 3, 1.0),
            ],
        )
        .unwrap()
    }

    fn two_cliques_bridge() -> WeightedGraph {
        let mut e = Vec::new();
        for base in [0, 4] {
            for i in 0..4 {
                for j in (i + 1)..4 {
                    e.push((base + i, base + j, 1.0));
                }
            }
        }
        e.push((3, 4, 1.0));
        WeightedGraph::new(8, e).unwrap()
    }

    /// Oracle: every split of `0..n` into two nonempty sides, by bitmask.
    fn two_partitions(n: usize) -> Vec<Clustering> {
        (1..(1u32 << n) - 1)
            .filter(|m| m & 1 == 0)
            .map(|m| {
                Clustering::from_labels(
                    &(0..n).map(|i| ((m >> i) & 1) as usize).collect::<Vec<_>>(),
                )
            })
            .collect()
    }

    /// Oracle: count set partitions by canonicalizing every label vector.
    fn count_partitions(n: usize) -> usize {
        let mut seen = std::collections::HashSet::new();
        for code in 0..n.pow(n as u32) {
            let mut c = code;
            let labels: Vec<usize> = (0..n)
                .map(|_| {
                    let l = c % n;
                    c /= n;
                    l
                })
                .collect();
            seen.insert(Clustering::from_labels(&labels).assignment);
        }
        seen.len()
    }

    #[test]
    fn clustering_json_and_validation() {
        let c = Clustering::new(2, vec![0, 1, 1]).unwrap();
        assert_eq!(c.to_json(), r#"{"k":2,"assignment":[0,1,1]}"#);
        assert_eq!(Clustering::from_json(&c.to_json()).unwrap(), c);
        assert!(Clustering::new(3, vec![0, 1]).is_err());
        assert!(Clustering::new(1, vec![0, 1]).is_err());
        assert!(Clustering::from_json(r#"{"k":1,"assignment":[2]}"#).is_err());
        assert!(Clustering::from_json(r#"{"k":1000000000000000,"assignment":[0]}"#).is_err());
    }

    #[test]
    fn kmeans_two_pairs_matches_bruteforce() {
        let d = 0.1;
        let x =
            Matrix::from_rows(&[[0.0, d], [0.0, -d], [10.0, 10.0 + d], [10.0, 10.0 - d]]).unwrap();
        let r = kmeans(&x, 2, 3, 100).unwrap();
        let best = two_partitions(4)
            .iter()
            .map(|p| mssc_objective(&x, p))
            .fold(f64::INFINITY, f64::min);
        assert!((r.objective - best).abs() < 1e-12);
        assert!((r.objective - 4.0 * d * d).abs() < 1e-12);
        assert_eq!(r.clustering.assignment[0], r.clustering.assignment[1]);
        assert_ne!(r.clustering.assignment[0], r.clustering.assignment[2]);
    }

    #[test]
    fn kmeans_extremes() {
        let x = Matrix::from_rows(&[[0.0], [1.0], [5.0], [6.0]]).unwrap();
        assert_eq!(kmeans(&x, 4, 1, 50).unwrap().objective, 0.0);
        let one = kmeans(&x, 1, 1, 50).unwrap();
        assert!((one.objective - (9.0 + 4.0 + 4.0 + 9.0)).abs() < 1e-12);
        assert!(matches!(
            kmeans(&Matrix::zeros(0, 2), 1, 0, 10),
            Err(Error::EmptyInput)
        ));
        assert!(kmeans(&x, 5, 0, 10).is_err());
    }

    #[test]
    fn spectral_two_cliques_matches_min_balanced_cut() {
        let g = two_cliques_bridge();
        let b = spectral_bisect(&g).unwrap();
        let best = two_partitions(8)
            .iter()
            .filter(|p| p.sizes() == [4, 4])
            .map(|p| cut_weight(&g, p))
            .fold(f64::INFINITY, f64::min);
        assert_eq!(cut_weight(&g, &b.clustering), best);
        assert!(b
            .clustering
            .same_partition(&Clustering::from_labels(&[0, 0, 0, 0, 1, 1, 1, 1])));
    }

    #[test]
    fn spectral_k2_and_relaxation_value() {
        let b = spectral_bisect(&WeightedGraph::path(2, 1.0)).unwrap();
        assert_eq!(b.clustering.sizes(), vec![1, 1]);
        assert_eq!(cut_weight(&WeightedGraph::path(2, 1.0), &b.clustering), 1.0);

        let g = two_triangles_bridge();
        let b = spectral_bisect(&g).unwrap();
        let l = laplacian(&g);
        let lu = l.mul_vec(&b.fiedler_vector).unwrap();
        let quad: f64 = crate::linalg::dot(&b.fiedler_vector, &lu) / 4.0;
        assert!((quad - 6.0 * b.fiedler_value / 4.0).abs() < 1e-8);
        let sum: f64 = b.fiedler_vector.iter().sum();
        let sq: f64 = b.fiedler_vector.iter().map(|v| v * v).sum();
        assert!(sum.abs() < 1e-8);
        assert!((sq - 6.0).abs() < 1e-8);
        assert!(matches!(
            spectral_bisect(&WeightedGraph::empty(3)),
            Err(Error::Disconnected)
        ));
    }

    #[test]
    fn spectral_balances_ties() {
        // star: the Fiedler space is degenerate, rounding must stay balanced
        let g =
            WeightedGraph::new(5, [(0, 1, 1.0), (0, 2, 1.0), (0, 3, 1.0), (0, 4, 1.0)]).unwrap();
        let b = spectral_bisect(&g).unwrap();
        let s = b.clustering.sizes();
        assert!(s[0].abs_diff(s[1]) <= 1, "{s:?}");
    }

    #[test]
    fn modularity_values() {
        let tri2 = WeightedGraph::new(
            6,
            [
                (0, 1, 1.0),
                (1, 2, 1.0),
                (0, 2, 1.0),
                (3, 4, 1.0),
                (4, 5, 1.0),
                (3, 5, 1.0),
            ],
        )
        .unwrap();
        let c = Clustering::from_labels(&[0, 0, 0, 1, 1, 1]);
        assert_eq!(modularity_value(&tri2, &c).unwrap(), 0.5);
        // singletons: only the degree terms remain, -6 * (2/12)^2
        let s = modularity_value(&tri2, &Clustering::singletons(6)).unwrap();
        assert!((s + 1.0 / 6.0).abs() < 1e-15);
        let k4 = WeightedGraph::new(
            4,
            (0..4).flat_map(|i| ((i + 1)..4).map(move |j| (i, j, 1.0))),
        )
        .unwrap();
        assert!(
            modularity_value(&k4, &Clustering::from_labels(&[0; 4]))
                .unwrap()
                .abs()
                < 1e-15
        );
        assert!(matches!(
            modularity_value(&WeightedGraph::empty(2), &Clustering::singletons(2)),
            Err(Error::EmptyGraph)
        ));
    }

    #[test]
    fn greedy_matches_exact_on_fixtures() {
        for g in [two_triangles_bridge(), two_cliques_bridge()] {
            let greedy = greedy_modularity(&g);
            let (exact, q) = modularity_exact_tiny(&g).unwrap();
            assert!(greedy.same_partition(&exact));
            assert!((modularity_value(&g, &greedy).unwrap() - q).abs() < 1e-12);
        }
        let (t, _) = modularity_exact_tiny(&two_triangles_bridge()).unwrap();
        assert!(t.same_partition(&Clustering::from_labels(&[0, 0, 0, 1, 1, 1])));
    }

    #[test]
    fn greedy_edge_cases() {
        assert_eq!(
            greedy_modularity(&WeightedGraph::empty(3)),
            Clustering::singletons(3)
        );
        let k4 = WeightedGraph::new(
            4,
            (0..4).flat_map(|i| ((i + 1)..4).map(move |j| (i, j, 1.0))),
        )
        .unwrap();
        let (_, q) = modularity_exact_tiny(&k4).unwrap();
        assert!((modularity_value(&k4, &greedy_modularity(&k4)).unwrap() - q).abs() < 1e-12);
        let p3 = WeightedGraph::path(3, 1.0);
        let (_, q) = modularity_exact_tiny(&p3).unwrap();
        assert!(modularity_value(&p3, &greedy_modularity(&p3)).unwrap() <= q + 1e-12);
        assert_eq!(
            modularity_exact_tiny(&WeightedGraph::empty(1)).unwrap().0.k,
            1
        );
        assert!(matches!(
            modularity_exact_tiny(&WeightedGraph::empty(11)),
            Err(Error::TooLarge { .. })
        ));
    }

    #[test]
    fn exact_enumerates_bell_numbers() {
        assert_eq!(count_partitions(5), 52);
        let mut rgs = vec![0usize; 5];
        let mut count = 1;
        while next_partition(&mut rgs) {
            count += 1;
        }
        assert_eq!(count, 52);
    }

    fn small_graph() -> impl Strategy<Value = WeightedGraph> {
        (2usize..=7).prop_flat_map(|n| {
            proptest::collection::vec((0..n, 0..n, 0.5f64..3.0), 1..12).prop_map(move |es| {
                let mut seen = std::collections::HashSet::new();
                let e: Vec<_> = es
                    .into_iter()
                    .filter(|&(u, v, _)| u != v && seen.insert((u.min(v), u.max(v))))
                    .collect();
                WeightedGraph::new(n, e).unwrap()
            })
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn greedy_never_beats_exact(g in small_graph()) {
            let (_, q) = modularity_exact_tiny(&g).unwrap();
            if g.total_weight() > 0.0 {
                let greedy = modularity_value(&g, &greedy_modularity(&g)).unwrap();
                prop_assert!(greedy <= q + 1e-12);
            }
        }

        #[test]
        fn kmeans_history_non_increasing(seed in 0u64..1000, k in 1usize..5) {
            let mut rng = SeededRng::new(seed);
            let x = Matrix::from_fn(12, 2, |_, _| rng.normal());
            let r = kmeans(&x, k, seed, 100).unwrap();
            for w in r.history.windows(2) {
                prop_assert!(w[1] <= w[0] + 1e-12);
            }
            // fixpoint: every point sits at its nearest centroid
            let cent = Matrix::from_fn(r.clustering.k, 2, |c, j| {
                let members: Vec<usize> = (0..12).filter(|&i| r.clustering.assignment[i] == c).collect();
                members.iter().map(|&i| x[(i, j)]).sum::<f64>() / members.len() as f64
            });
            for i in 0..12 {
                let own = sq_dist(x.row(i), cent.row(r.clustering.assignment[i]));
                prop_assert!(own <= nearest(&cent, x.row(i)).1 + 1e-12);
            }
        }

        #[test]
        fn fiedler_vector_normalized(g in small_graph()) {
            prop_assume!(g.is_connected());
            let b = spectral_bisect(&g).unwrap();
            let n = g.n() as f64;
            let sum: f64 = b.fiedler_vector.iter().sum();
            let sq: f64 = b.fiedler_vector.iter().map(|v| v * v).sum();
            prop_assert!(sum.abs() < 1e-8);
            prop_assert!((sq - n).abs() < 1e-8);
            let s = b.clustering.sizes();
            prop_assert!(s.len() == 2 && s[0].abs_diff(s[1]) <= 1);
        }
    }
}
