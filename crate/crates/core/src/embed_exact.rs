//! Non-iterative embedders: Fréchet (universal isometric) embedding, classic
//! MDS, PCA and Isomap.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graphs::{floyd_warshall_complete, PartialDistanceMatrix, WeightedGraph};
use crate::linalg::{
    factor_from_spectrum, gram_from_edm, jacobi_eig, sq_dist, Matrix, Realization,
    SpectralDecomposition, RANK_TOL,
};

/// Exact ℓ∞ embedding: row i is column i of the shortest-path completion.
pub fn frechet_embed(g: &WeightedGraph) -> Result<Realization> {
    // The completion is symmetric, so its rows are its columns.
    floyd_warshall_complete(g)
}

pub fn linf_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).fold(0.0, |m, (x, y)| m.max((x - y).abs()))
}

/// Eigenvalues of the Gram matrix (ascending) and the ones left out of the
/// realization, either because they were negative or beyond the target
/// dimension.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpectrumReport {
    pub eigenvalues: Vec<f64>,
    pub clipped: Vec<f64>,
}

impl SpectrumReport {
    fn new(eig: &SpectralDecomposition, kept: usize) -> Self {
        let n = eig.dim();
        let clipped = eig.eigenvalues[..n - kept.min(n)].to_vec();
        let mut clipped = clipped;
        // kept columns with a negative eigenvalue contribute nothing either
        clipped.extend(
            eig.eigenvalues[n - kept.min(n)..]
                .iter()
                .filter(|&&l| l < 0.0),
        );
        Self {
            eigenvalues: eig.eigenvalues.clone(),
            clipped,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("serializable")
    }
}

#[derive(Clone, Debug)]
pub struct MdsOutput {
    pub realization: Realization,
    pub spectrum: SpectrumReport,
}

fn squared(d: &Matrix) -> Matrix {
    d.map(|v| v * v)
}

fn numeric_rank(eig: &SpectralDecomposition) -> usize {
    let top = eig.eigenvalues.last().copied().unwrap_or(0.0).max(1.0);
    eig.eigenvalues
        .iter()
        .filter(|&&l| l > RANK_TOL * top)
        .count()
        .max(1)
}

fn mds_from_distances(d: &Matrix, k: Option<usize>) -> Result<MdsOutput> {
    let g = gram_from_edm(&squared(d))?;
    let eig = jacobi_eig(&g)?;
    let k = k.unwrap_or_else(|| numeric_rank(&eig));
    Ok(MdsOutput {
        realization: factor_from_spectrum(&eig, Some(k)),
        spectrum: SpectrumReport::new(&eig, k),
    })
}

/// Classic multidimensional scaling. Unknown entries are filled with
/// shortest-path distances first. With `k = None` the numerical rank of the
/// Gram matrix is used.
pub fn classic_mds(pdm: &PartialDistanceMatrix, k: Option<usize>) -> Result<MdsOutput> {
    let d = floyd_warshall_complete(&pdm.known_graph())?;
    mds_from_distances(&d, k)
}

/// Spectral decomposition of `X X^T`, computed on the smaller of `X X^T`
/// and `X^T X`.
fn data_gram_spectrum(x: &Matrix) -> Result<SpectralDecomposition> {
    let (n, m) = (x.rows(), x.cols());
    if m >= n {
        return jacobi_eig(&x.gram());
    }
    // X X^T = U S^2 U^T and X^T X = V S^2 V^T with U = X V / S.
    let small = jacobi_eig(&x.transpose().gram())?;
    let top = small.eigenvalues.last().copied().unwrap_or(0.0).max(0.0);
    let mut vectors = Matrix::zeros(n, n);
    let mut values = vec![0.0; n];
    for c in 0..m {
        let lam = small.eigenvalues[c];
        let slot = n - m + c;
        values[slot] = lam;
        if lam <= RANK_TOL * top.max(f64::MIN_POSITIVE) || lam <= 0.0 {
            continue;
        }
        let s = lam.sqrt();
        let v = small.eigenvector(c);
        let mut u: Vec<f64> = (0..n)
            .map(|i| crate::linalg::dot(x.row(i), &v) / s)
            .collect();
        let lead = u.iter().enumerate().fold(
            0,
            |b, (i, x)| if x.abs() > u[b].abs() + 1e-12 { i } else { b },
        );
        if u[lead] < 0.0 {
            u.iter_mut().for_each(|x| *x = -*x);
        }
        for i in 0..n {
            vectors[(i, slot)] = u[i];
        }
    }
    Ok(SpectralDecomposition {
        eigenvalues: values,
        eigenvectors: vectors,
    })
}

/// PCA as a modified MDS on the data Gram matrix `X X^T`: keeps the K
/// largest eigenvalues, clipped at zero. Columns come out in descending
/// eigenvalue order.
pub fn pca_reduce(x: &Matrix, k: usize) -> Result<Realization> {
    if k == 0 || k > x.rows().min(x.cols()) {
        return Err(Error::InvalidParameter(format!(
            "PCA target dimension {k} must lie in 1..={}",
            x.rows().min(x.cols())
        )));
    }
    let eig = data_gram_spectrum(x)?;
    Ok(factor_from_spectrum(&eig, Some(k)))
}

/// Smallest K whose leading eigenvalues carry at least `fraction` of the
/// positive spectrum of `X X^T`.
pub fn pca_residual_dimension(x: &Matrix, fraction: f64) -> Result<usize> {
    if !(0.0..=1.0).contains(&fraction) {
        return Err(Error::InvalidParameter(format!(
            "variance fraction {fraction} outside [0, 1]"
        )));
    }
    let eig = data_gram_spectrum(x)?;
    let desc: Vec<f64> = eig.eigenvalues.iter().rev().map(|l| l.max(0.0)).collect();
    let total: f64 = desc.iter().sum();
    if total == 0.0 {
        return Ok(1);
    }
    let mut acc = 0.0;
    for (i, l) in desc.iter().enumerate() {
        acc += l;
        if acc >= fraction * total * (1.0 - 1e-12) {
            return Ok(i + 1);
        }
    }
    Ok(desc.len().max(1))
}

/// Euclidean distances between all rows.
pub fn pairwise_distances(x: &Matrix) -> Matrix {
    let n = x.rows();
    let mut d = Matrix::zeros(n, n);
    for i in 0..n {
        for j in (i + 1)..n {
            let v = sq_dist(x.row(i), x.row(j)).sqrt();
            d[(i, j)] = v;
            d[(j, i)] = v;
        }
    }
    d
}

/// Neighbourhood graph joining points at distance at most `tau`.
pub fn threshold_graph(d: &Matrix, tau: f64) -> WeightedGraph {
    let n = d.rows();
    let mut edges = Vec::new();
    for i in 0..n {
        for j in (i + 1)..n {
            if d[(i, j)] <= tau {
                edges.push((i, j, d[(i, j)]));
            }
        }
    }
    WeightedGraph::new(n, edges).expect("distances are valid weights")
}

/// Smallest pairwise distance whose threshold graph is connected.
pub fn connectivity_threshold(d: &Matrix) -> f64 {
    let n = d.rows();
    let mut cand: Vec<f64> = (0..n)
        .flat_map(|i| ((i + 1)..n).map(move |j| (i, j)))
        .map(|(i, j)| d[(i, j)])
        .collect();
    if cand.is_empty() {
        return 0.0;
    }
    cand.sort_by(f64::total_cmp);
    cand.dedup();
    let (mut lo, mut hi) = (0, cand.len() - 1);
    while lo < hi {
        let mid = (lo + hi) / 2;
        if threshold_graph(d, cand[mid]).is_connected() {
            hi = mid;
        } else {
            lo = mid + 1;
        }
    }
    cand[lo]
}

/// Isomap: sparsest connected threshold graph, shortest-path completion,
/// then PCA in its MDS reading.
pub fn isomap(x: &Matrix, k: usize) -> Result<Realization> {
    if x.rows() < 2 {
        return Err(Error::InvalidParameter(
            "isomap needs at least 2 points".into(),
        ));
    }
    if k == 0 {
        return Err(Error::InvalidParameter(
            "target dimension must be >= 1".into(),
        ));
    }
    let d = pairwise_distances(x);
    let tau = connectivity_threshold(&d);
    let h = threshold_graph(&d, tau);
    let completed = floyd_warshall_complete(&h)?;
    Ok(mds_from_distances(&completed, Some(k))?.realization)
}
