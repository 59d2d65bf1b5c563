//! Monte Carlo study of nearest/farthest distance ratios in growing
//! dimension.

use std::fmt;
use std::io::Write;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{sq_dist, Matrix};
use crate::rng::SeededRng;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Distribution {
    Uniform01,
    StandardNormal,
    Exponential1,
}

impl Distribution {
    pub const ALL: [Distribution; 3] = [
        Distribution::Uniform01,
        Distribution::StandardNormal,
        Distribution::Exponential1,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Distribution::Uniform01 => "uniform01",
            Distribution::StandardNormal => "standard_normal",
            Distribution::Exponential1 => "exponential1",
        }
    }

    pub fn sample(self, rng: &mut SeededRng) -> f64 {
        match self {
            Distribution::Uniform01 => rng.uniform(),
            Distribution::StandardNormal => rng.normal(),
            Distribution::Exponential1 => rng.exponential(),
        }
    }
}

impl fmt::Display for Distribution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Distribution {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Distribution::ALL
            .into_iter()
            .find(|d| d.name() == s)
            .ok_or_else(|| Error::InvalidParameter(format!("unknown distribution '{s}'")))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InstabilityConfig {
    pub dims: Vec<usize>,
    /// Number of points `X_i` per trial.
    pub points: usize,
    pub trials: usize,
    pub distribution: Distribution,
    /// Exponent applied to the Euclidean distance.
    pub p: f64,
    pub seed: u64,
}

impl InstabilityConfig {
    fn validate(&self) -> Result<()> {
        if self.points < 2 {
            return Err(Error::InvalidParameter(
                "need at least 2 points per trial".into(),
            ));
        }
        if self.trials == 0 {
            return Err(Error::InvalidParameter("need at least 1 trial".into()));
        }
        if !(self.p > 0.0 && self.p.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "exponent p = {} must be > 0",
                self.p
            )));
        }
        if self.dims.contains(&0) {
            return Err(Error::InvalidParameter("dimensions must be >= 1".into()));
        }
        Ok(())
    }
}

/// Summary of one dimension; the CSV columns are the fields up to `seed`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InstabilityRow {
    pub n: usize,
    pub distribution: Distribution,
    pub p: f64,
    pub trials: usize,
    pub median_eps: f64,
    pub mean_eps: f64,
    pub q25: f64,
    pub q75: f64,
    pub seed: u64,
    /// Trials redrawn because the nearest distance was zero.
    pub resampled: usize,
}

/// `D_max / D_min - 1` for the distances `||z - x_i||^p`, or `None` when
/// `D_min = 0`.
pub fn extreme_ratio(z: &[f64], xs: &Matrix, p: f64) -> Option<f64> {
    let (mut lo, mut hi) = (f64::INFINITY, 0.0_f64);
    for i in 0..xs.rows() {
        let d = sq_dist(z, xs.row(i)).powf(p / 2.0);
        lo = lo.min(d);
        hi = hi.max(d);
    }
    (lo > 0.0).then(|| hi / lo - 1.0)
}

/// Redraws allowed per trial before giving up on a degenerate sampler.
const MAX_REDRAWS: usize = 1000;

fn trial(n: usize, cfg: &InstabilityConfig, rng: &mut SeededRng) -> Result<(f64, usize)> {
    for redraw in 0..MAX_REDRAWS {
        let z: Vec<f64> = (0..n).map(|_| cfg.distribution.sample(rng)).collect();
        let xs = Matrix::from_fn(cfg.points, n, |_, _| cfg.distribution.sample(rng));
        if let Some(eps) = extreme_ratio(&z, &xs, cfg.p) {
            return Ok((eps, redraw));
        }
    }
    Err(Error::InvalidParameter(format!(
        "{MAX_REDRAWS} consecutive degenerate samples at n = {n}"
    )))
}

fn substream(cfg: &InstabilityConfig, dim_index: usize, t: usize) -> SeededRng {
    SeededRng::substream(cfg.seed, ((dim_index as u64) << 32) | t as u64)
}

/// Linear-interpolation quantile of sorted data.
pub fn quantile(sorted: &[f64], q: f64) -> f64 {
    if sorted.is_empty() {
        return f64::NAN;
    }
    let pos = q.clamp(0.0, 1.0) * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    sorted[lo] + (sorted[hi] - sorted[lo]) * (pos - lo as f64)
}

pub fn run_instability(cfg: &InstabilityConfig) -> Result<Vec<InstabilityRow>> {
    cfg.validate()?;
    cfg.dims
        .iter()
        .enumerate()
        .map(|(di, &n)| {
            let draws: Vec<(f64, usize)> = (0..cfg.trials)
                .into_par_iter()
                .map(|t| trial(n, cfg, &mut substream(cfg, di, t)))
                .collect::<Result<_>>()?;
            let mut eps: Vec<f64> = draws.iter().map(|d| d.0).collect();
            eps.sort_by(f64::total_cmp);
            Ok(InstabilityRow {
                n,
                distribution: cfg.distribution,
                p: cfg.p,
                trials: cfg.trials,
                median_eps: quantile(&eps, 0.5),
                mean_eps: eps.iter().sum::<f64>() / eps.len() as f64,
                q25: quantile(&eps, 0.25),
                q75: quantile(&eps, 0.75),
                seed: cfg.seed,
                resampled: draws.iter().map(|d| d.1).sum(),
            })
        })
        .collect()
}

/// Sample variance of `v / mean(v)` for `v = ||Z - X_1||^p`, one pair per
/// trial, at dimension `n`.
pub fn relative_variance(cfg: &InstabilityConfig, n: usize) -> Result<f64> {
    cfg.validate()?;
    let v: Vec<f64> = (0..cfg.trials)
        .into_par_iter()
        .map(|t| {
            let mut rng = SeededRng::substream(cfg.seed, t as u64);
            let z: Vec<f64> = (0..n).map(|_| cfg.distribution.sample(&mut rng)).collect();
            let x: Vec<f64> = (0..n).map(|_| cfg.distribution.sample(&mut rng)).collect();
            sq_dist(&z, &x).powf(cfg.p / 2.0)
        })
        .collect();
    Ok(relative_variance_of(&v))
}

/// `Var(v / mean(v))` with the unbiased estimator; 0 for constant samples.
pub fn relative_variance_of(v: &[f64]) -> f64 {
    if v.len() < 2 {
        return 0.0;
    }
    let mean = v.iter().sum::<f64>() / v.len() as f64;
    if mean == 0.0 {
        return 0.0;
    }
    let var = v.iter().map(|x| (x / mean - 1.0).powi(2)).sum::<f64>() / (v.len() - 1) as f64;
    var
}

pub fn write_instability_csv<W: Write>(rows: &[InstabilityRow], w: W) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    let io = |e: csv::Error| Error::Io(e.into());
    out.write_record([
        "n",
        "distribution",
        "p",
        "trials",
        "median_eps",
        "mean_eps",
        "q25",
        "q75",
        "seed",
    ])
    .map_err(io)?;
    for r in rows {
        out.write_record([
            r.n.to_string(),
            r.distribution.to_string(),
            r.p.to_string(),
            r.trials.to_string(),
            r.median_eps.to_string(),
            r.mean_eps.to_string(),
            r.q25.to_string(),
            r.q75.to_string(),
            r.seed.to_string(),
        ])
        .map_err(io)?;
    }
    out.flush()?;
    Ok(())
}
