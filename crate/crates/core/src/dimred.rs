//! Random projections and Barvinok's naive rounding.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::conic::{admm_sdp_solve, dgp_sdp, AdmmSettings, SdpObjective};
use crate::error::{Error, Result};
use crate::graphs::WeightedGraph;
use crate::linalg::{factor_from_spectrum, jacobi_eig, norm2, Matrix, Realization};
use crate::realize_opt::{solve_quartic, DescentConfig, Solution};
use crate::rng::SeededRng;

/// A `k x n` projection matrix with entries `N(0, 1/k)`, kept with
/// probability `density` and then scaled by `1/sqrt(density)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RandomProjection {
    pub k: usize,
    pub n: usize,
    pub density: f64,
    pub seed: u64,
    pub matrix: Matrix,
}

pub fn make_rp(n: usize, k: usize, density: f64, seed: u64) -> Result<RandomProjection> {
    if !(density > 0.0 && density <= 1.0) {
        return Err(Error::BadDensity(density));
    }
    if k == 0 {
        return Err(Error::InvalidParameter(
            "projection dimension k must be >= 1".into(),
        ));
    }
    let mut rng = SeededRng::new(seed);
    let sd = 1.0 / (k as f64 * density).sqrt();
    let dense = density == 1.0;
    let matrix = Matrix::from_fn(k, n, |_, _| {
        if dense || rng.bernoulli(density) {
            sd * rng.normal()
        } else {
            0.0
        }
    });
    Ok(RandomProjection {
        k,
        n,
        density,
        seed,
        matrix,
    })
}

/// Maps every row of `x` (an `l x n` matrix) to `T x_i`.
pub fn apply_rp(t: &RandomProjection, x: &Matrix) -> Result<Matrix> {
    if x.cols() != t.n {
        return Err(Error::DimensionMismatch {
            expected: t.n,
            found: x.cols(),
        });
    }
    x.matmul_t(&t.matrix)
}

/// Target dimension rule `k = ceil(C ln(l) / eps^2)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct JllConfig {
    pub epsilon: f64,
    pub constant: f64,
}

pub const DEFAULT_JLL_CONSTANT: f64 = 1.8;

impl JllConfig {
    pub fn new(epsilon: f64) -> Result<Self> {
        Self::with_constant(epsilon, DEFAULT_JLL_CONSTANT)
    }

    pub fn with_constant(epsilon: f64, constant: f64) -> Result<Self> {
        if !(epsilon > 0.0 && epsilon < 1.0) {
            return Err(Error::InvalidParameter(format!(
                "epsilon {epsilon} must lie in (0, 1)"
            )));
        }
        if !(constant > 0.0 && constant.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "JLL constant {constant} must be positive"
            )));
        }
        Ok(Self { epsilon, constant })
    }

    /// Target dimension for `points` vectors, at least 1.
    pub fn target_dim(&self, points: usize) -> usize {
        let l = (points.max(1)) as f64;
        ((self.constant * l.ln() / (self.epsilon * self.epsilon)).ceil() as usize).max(1)
    }
}

/// Which pairs a distortion audit looks at.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Pairs {
    All,
    Sample { count: usize, seed: u64 },
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Distortion {
    /// Pairs with a nonzero source distance.
    pub pairs: usize,
    pub max_stretch: f64,
    pub min_stretch: f64,
    /// Pairs whose stretch falls outside `[1 - eps, 1 + eps]`.
    pub violations: usize,
}

impl Distortion {
    pub fn violation_fraction(&self) -> f64 {
        if self.pairs == 0 {
            0.0
        } else {
            self.violations as f64 / self.pairs as f64
        }
    }
}

/// Stretch `||Tx_i - Tx_j|| / ||x_i - x_j||` over the selected pairs.
pub fn jll_distortion(x: &Matrix, tx: &Matrix, pairs: Pairs, epsilon: f64) -> Result<Distortion> {
    let l = x.rows();
    if tx.rows() != l {
        return Err(Error::DimensionMismatch {
            expected: l,
            found: tx.rows(),
        });
    }
    let selected: Vec<(usize, usize)> = match pairs {
        Pairs::All => (0..l)
            .flat_map(|i| ((i + 1)..l).map(move |j| (i, j)))
            .collect(),
        Pairs::Sample { count, seed } => {
            let mut rng = SeededRng::new(seed);
            if l < 2 {
                Vec::new()
            } else {
                (0..count)
                    .map(|_| {
                        let i = rng.below(l);
                        let mut j = rng.below(l - 1);
                        if j >= i {
                            j += 1;
                        }
                        (i.min(j), i.max(j))
                    })
                    .collect()
            }
        }
    };
    let mut out = Distortion {
        pairs: 0,
        max_stretch: f64::NEG_INFINITY,
        min_stretch: f64::INFINITY,
        violations: 0,
    };
    for (i, j) in selected {
        let d = crate::linalg::sq_dist(x.row(i), x.row(j)).sqrt();
        if d == 0.0 {
            continue;
        }
        let s = crate::linalg::sq_dist(tx.row(i), tx.row(j)).sqrt() / d;
        out.pairs += 1;
        out.max_stretch = out.max_stretch.max(s);
        out.min_stretch = out.min_stretch.min(s);
        if s < 1.0 - epsilon || s > 1.0 + epsilon {
            out.violations += 1;
        }
    }
    if out.pairs == 0 {
        out.max_stretch = 1.0;
        out.min_stretch = 1.0;
    }
    Ok(out)
}

/// Sample mean of `||T u||^2` for a fixed random unit `u` and a fresh dense
/// `k x n` projection per sample.
pub fn norm_preservation_stat(n: usize, k: usize, samples: usize, seed: u64) -> Result<f64> {
    if n == 0 || k == 0 || samples == 0 {
        return Err(Error::InvalidParameter(
            "n, k and samples must be >= 1".into(),
        ));
    }
    let mut rng = SeededRng::substream(seed, 0);
    let mut u: Vec<f64> = (0..n).map(|_| rng.normal()).collect();
    let nu = norm2(&u);
    u.iter_mut().for_each(|v| *v /= nu);
    Ok(mean_sq_image(&u, k, samples, seed))
}

/// Mean of `||T u||^2` over fresh projections, without normalizing `u`.
pub fn mean_sq_image(u: &[f64], k: usize, samples: usize, seed: u64) -> f64 {
    let sd = 1.0 / (k as f64).sqrt();
    let vals: Vec<f64> = (0..samples)
        .into_par_iter()
        .map(|s| {
            let mut rng = SeededRng::substream(seed, s as u64 + 1);
            (0..k)
                .map(|_| {
                    let v: f64 = u.iter().map(|&uj| sd * rng.normal() * uj).sum();
                    v * v
                })
                .sum()
        })
        .collect();
    vals.iter().sum::<f64>() / samples as f64
}

/// Dimension `d = ceil(ln(n) / eps^2)` used by [`identity_stats`].
pub fn identity_dim(n: usize, epsilon: f64) -> usize {
    (((n.max(2)) as f64).ln() / (epsilon * epsilon)).ceil() as usize
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct IdentityStats {
    pub n: usize,
    pub d: usize,
    pub seed: u64,
    /// `||T T^T / n - I_d||_2`
    pub norm_ttt_over_n: f64,
    /// `||T T^T / d - I_d||_2`
    pub norm_ttt_over_d: f64,
    /// `||T T^T - I_d||_2`
    pub norm_ttt_raw: f64,
    /// Mean diagonal entry of `T^T T`.
    pub diag_mean: f64,
    /// Mean off-diagonal entry of `T^T T`.
    pub offdiag_mean: f64,
}

/// How close `T T^T` and `T^T T` come to identities for a dense `d x n`
/// projection with `d = ceil(ln n / eps^2)`.
pub fn identity_stats(n: usize, epsilon: f64, seed: u64) -> Result<IdentityStats> {
    if n < 2 {
        return Err(Error::InvalidParameter(
            "identity_stats needs n >= 2".into(),
        ));
    }
    let d = identity_dim(n, epsilon);
    let t = make_rp(n, d, 1.0, seed)?.matrix;
    let ttt = t.gram();
    let eig = jacobi_eig(&ttt)?;
    let dist = |s: f64| {
        eig.eigenvalues
            .iter()
            .fold(0.0_f64, |m, &l| m.max((s * l - 1.0).abs()))
    };

    // sum of all entries of T^T T is ||T 1||^2, its trace is ||T||_F^2
    let frob2: f64 = t.data().iter().map(|v| v * v).sum();
    let total: f64 = (0..d)
        .map(|r| {
            let s: f64 = t.row(r).iter().sum();
            s * s
        })
        .sum();
    let nf = n as f64;
    Ok(IdentityStats {
        n,
        d,
        seed,
        norm_ttt_over_n: dist(1.0 / nf),
        norm_ttt_over_d: dist(1.0 / d as f64),
        norm_ttt_raw: dist(1.0),
        diag_mean: frob2 / nf,
        offdiag_mean: (total - frob2) / (nf * (nf - 1.0)),
    })
}

/// `||T^T T x - x||_inf` for a fresh dense `d x n` projection, with
/// `d = ceil(ln n / eps^2)`.
pub fn identity_action_error(x: &[f64], epsilon: f64, seed: u64) -> Result<f64> {
    let n = x.len();
    let d = identity_dim(n, epsilon);
    let t = make_rp(n, d, 1.0, seed)?.matrix;
    let tx = t.mul_vec(x)?;
    let mut worst = 0.0_f64;
    for (i, &xi) in x.iter().enumerate() {
        let v: f64 = (0..d).map(|r| t[(r, i)] * tx[r]).sum();
        worst = worst.max((v - xi).abs());
    }
    Ok(worst)
}

/// Tolerance on the smallest eigenvalue accepted as PSD.
pub const PSD_TOL: f64 = 1e-7;

/// Barvinok's naive rounding, rank-K variant: `x' = T y` with
/// `X = T T^T` and `y` an `n x K` standard normal sample.
pub fn barvinok_naive(xbar: &Matrix, k: usize, seed: u64) -> Result<Realization> {
    if k == 0 {
        return Err(Error::InvalidParameter("dimension K must be >= 1".into()));
    }
    let eig = jacobi_eig(xbar)?;
    let n = eig.dim();
    let min = eig.min_eigenvalue();
    if n > 0 && min < -PSD_TOL {
        return Err(Error::NotPsd(min));
    }
    let t = factor_from_spectrum(&eig, Some(n));
    let mut rng = SeededRng::new(seed);
    let y = Matrix::from_fn(n, k, |_, _| rng.normal());
    t.matmul(&y)
}

/// Trace-objective SDP, naive rounding to K dimensions, then a quartic
/// refinement run from the rounded point.
pub fn barvinok_realize(
    g: &WeightedGraph,
    k: usize,
    cfg: &DescentConfig,
    sdp: &AdmmSettings,
) -> Result<Solution> {
    let p = dgp_sdp(g, SdpObjective::Trace)?;
    let xbar = admm_sdp_solve(&p, sdp)?.x;
    let x0 = barvinok_naive(&xbar, k, cfg.seed)?;
    let mut sol = solve_quartic(g, k, cfg, Some(&x0))?;
    sol.report.method = "barvinok".into();
    Ok(sol)
}
