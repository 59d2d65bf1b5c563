//! Local-descent realizers for the distance geometry problem.
//!
//! All methods minimize a smooth (or piecewise smooth) function of the
//! flattened realization with gradient descent. Multi-start runs draw each
//! restart from its own substream of the seed and keep the best result,
//! lowest restart index on ties.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graphs::WeightedGraph;
use crate::linalg::{sq_dist, Matrix, Realization};
use crate::rng::SeededRng;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum StepRule {
    Fixed(f64),
    Backtracking,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DescentConfig {
    pub max_iterations: usize,
    pub gradient_tolerance: f64,
    pub restarts: usize,
    pub step_rule: StepRule,
    pub seed: u64,
}

impl DescentConfig {
    pub fn new(seed: u64) -> Self {
        Self {
            max_iterations: 10_000,
            gradient_tolerance: 1e-9,
            restarts: 10,
            step_rule: StepRule::Backtracking,
            seed,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.gradient_tolerance.is_nan() || self.gradient_tolerance <= 0.0 {
            return Err(Error::InvalidParameter(
                "gradient tolerance must be > 0".into(),
            ));
        }
        if self.restarts == 0 {
            return Err(Error::InvalidParameter("restarts must be >= 1".into()));
        }
        if let StepRule::Fixed(a) = self.step_rule {
            if a.is_nan() || a <= 0.0 {
                return Err(Error::InvalidParameter("fixed step must be > 0".into()));
            }
        }
        Ok(())
    }
}

/// Summary written next to a realization.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub method: String,
    #[serde(rename = "K")]
    pub k: usize,
    pub final_objective: f64,
    pub max_violation: f64,
    pub iterations: usize,
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sum_slack_squared: Option<f64>,
}

impl Report {
    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("serializable")
    }
}

#[derive(Clone, Debug)]
pub struct Solution {
    pub realization: Realization,
    pub report: Report,
    /// Final objective of every restart, in restart order.
    pub restart_objectives: Vec<f64>,
}

/// Per-edge distance bounds `d_L <= ||x_u - x_v|| <= d_U`.
#[derive(Clone, Debug, PartialEq)]
pub struct IntervalWeights(Vec<(f64, f64)>);

impl IntervalWeights {
    pub fn new(bounds: Vec<(f64, f64)>) -> Result<Self> {
        for (i, &(lo, hi)) in bounds.iter().enumerate() {
            if !(lo >= 0.0 && hi >= lo && hi.is_finite()) {
                return Err(Error::InvalidParameter(format!(
                    "interval {i} = [{lo}, {hi}] is not a valid distance range"
                )));
            }
        }
        Ok(Self(bounds))
    }

    /// Degenerate intervals `[d, d]` from edge weights.
    pub fn exact(g: &WeightedGraph) -> Self {
        Self(g.edges().iter().map(|e| (e.w, e.w)).collect())
    }

    pub fn bounds(&self) -> &[(f64, f64)] {
        &self.0
    }
}

fn check_shape(g: &WeightedGraph, x: &Matrix) -> Result<()> {
    if x.rows() != g.n() {
        return Err(Error::DimensionMismatch {
            expected: g.n(),
            found: x.rows(),
        });
    }
    Ok(())
}

fn quartic_eval(g: &WeightedGraph, x: &[f64], k: usize, grad: Option<&mut [f64]>) -> f64 {
    let mut f = 0.0;
    let mut grad = grad;
    if let Some(gr) = grad.as_deref_mut() {
        gr.iter_mut().for_each(|v| *v = 0.0);
    }
    for e in g.edges() {
        let (xu, xv) = (&x[e.u * k..(e.u + 1) * k], &x[e.v * k..(e.v + 1) * k]);
        let r = sq_dist(xu, xv) - e.w * e.w;
        f += r * r;
        if let Some(gr) = grad.as_deref_mut() {
            for c in 0..k {
                let t = 4.0 * r * (xu[c] - xv[c]);
                gr[e.u * k + c] += t;
                gr[e.v * k + c] -= t;
            }
        }
    }
    f
}

/// `f(x) = sum over edges of (||x_u - x_v||^2 - d_uv^2)^2`.
pub fn quartic_objective(g: &WeightedGraph, x: &Realization) -> Result<f64> {
    check_shape(g, x)?;
    Ok(quartic_eval(g, x.data(), x.cols(), None))
}

pub fn quartic_gradient(g: &WeightedGraph, x: &Realization) -> Result<Matrix> {
    check_shape(g, x)?;
    let mut grad = vec![0.0; x.data().len()];
    quartic_eval(g, x.data(), x.cols(), Some(&mut grad));
    Matrix::new(x.rows(), x.cols(), grad)
}

fn interval_eval(
    g: &WeightedGraph,
    iv: &IntervalWeights,
    x: &[f64],
    k: usize,
    grad: Option<&mut [f64]>,
) -> f64 {
    let mut f = 0.0;
    let mut grad = grad;
    if let Some(gr) = grad.as_deref_mut() {
        gr.iter_mut().for_each(|v| *v = 0.0);
    }
    for (e, &(lo, hi)) in g.edges().iter().zip(iv.bounds()) {
        let (xu, xv) = (&x[e.u * k..(e.u + 1) * k], &x[e.v * k..(e.v + 1) * k]);
        let s = sq_dist(xu, xv);
        // d f / d s on the active piece
        let slope = if s < lo * lo {
            f += lo * lo - s;
            -1.0
        } else if s > hi * hi {
            f += s - hi * hi;
            1.0
        } else {
            0.0
        };
        if slope != 0.0 {
            if let Some(gr) = grad.as_deref_mut() {
                for c in 0..k {
                    let t = 2.0 * slope * (xu[c] - xv[c]);
                    gr[e.u * k + c] += t;
                    gr[e.v * k + c] -= t;
                }
            }
        }
    }
    f
}

fn check_intervals(g: &WeightedGraph, iv: &IntervalWeights) -> Result<()> {
    if iv.bounds().len() != g.m() {
        return Err(Error::DimensionMismatch {
            expected: g.m(),
            found: iv.bounds().len(),
        });
    }
    Ok(())
}

/// `sum of max(0, d_L^2 - s) + max(0, s - d_U^2)` with `s = ||x_u - x_v||^2`.
pub fn interval_objective(g: &WeightedGraph, iv: &IntervalWeights, x: &Realization) -> Result<f64> {
    check_shape(g, x)?;
    check_intervals(g, iv)?;
    Ok(interval_eval(g, iv, x.data(), x.cols(), None))
}

/// A subgradient of [`interval_objective`]; the gradient wherever it exists.
pub fn interval_subgradient(
    g: &WeightedGraph,
    iv: &IntervalWeights,
    x: &Realization,
) -> Result<Matrix> {
    check_shape(g, x)?;
    check_intervals(g, iv)?;
    let mut grad = vec![0.0; x.data().len()];
    interval_eval(g, iv, x.data(), x.cols(), Some(&mut grad));
    Matrix::new(x.rows(), x.cols(), grad)
}

/// Largest `| ||x_u - x_v|| - d_uv |` over edges.
pub fn max_violation(g: &WeightedGraph, x: &Realization) -> f64 {
    g.edges()
        .iter()
        .map(|e| (sq_dist(x.row(e.u), x.row(e.v)).sqrt() - e.w).abs())
        .fold(0.0, f64::max)
}

/// Armijo sufficient-decrease constant.
const ARMIJO_C: f64 = 1e-4;

struct Descent {
    x: Vec<f64>,
    f: f64,
    iterations: usize,
}

type Objective<'a> = dyn Fn(&[f64], Option<&mut [f64]>) -> f64 + 'a;

/// Gradient descent on `eval`, which returns the value and fills the
/// gradient when asked.
fn descend(eval: &Objective<'_>, x0: Vec<f64>, cfg: &DescentConfig) -> Descent {
    let mut x = x0;
    let mut g = vec![0.0; x.len()];
    let mut f = eval(&x, Some(&mut g));
    let mut step: f64 = 1.0;
    let mut trial = vec![0.0; x.len()];
    let mut iterations = 0;
    while iterations < cfg.max_iterations {
        let gn2: f64 = g.iter().map(|v| v * v).sum();
        if gn2.sqrt() <= cfg.gradient_tolerance || f == 0.0 {
            break;
        }
        match cfg.step_rule {
            StepRule::Fixed(a) => {
                for (xi, gi) in x.iter_mut().zip(&g) {
                    *xi -= a * gi;
                }
                f = eval(&x, Some(&mut g));
                if !f.is_finite() {
                    break;
                }
            }
            StepRule::Backtracking => {
                let mut a = (2.0 * step).min(1e12);
                let mut accepted = false;
                while a > 1e-30 {
                    for ((t, xi), gi) in trial.iter_mut().zip(&x).zip(&g) {
                        *t = xi - a * gi;
                    }
                    let ft = eval(&trial, None);
                    if ft.is_finite() && ft <= f - ARMIJO_C * a * gn2 {
                        accepted = true;
                        break;
                    }
                    a *= 0.5;
                }
                if !accepted {
                    break;
                }
                step = a;
                std::mem::swap(&mut x, &mut trial);
                f = eval(&x, Some(&mut g));
            }
        }
        iterations += 1;
    }
    Descent { x, f, iterations }
}

fn random_start(n: usize, k: usize, r: f64, rng: &mut SeededRng) -> Vec<f64> {
    (0..n * k).map(|_| rng.uniform_in(-r, r)).collect()
}

fn start_radius(g: &WeightedGraph) -> f64 {
    let r = g.max_weight();
    if r > 0.0 {
        r
    } else {
        1.0
    }
}

/// Runs `run` from `x0` if given, otherwise from `cfg.restarts` random
/// starts in parallel, and returns the best.
fn multistart(
    g: &WeightedGraph,
    k: usize,
    cfg: &DescentConfig,
    x0: Option<&Realization>,
    run: &(dyn Fn(Vec<f64>) -> Descent + Sync),
) -> Result<(Descent, Vec<f64>)> {
    cfg.validate()?;
    if k == 0 {
        return Err(Error::InvalidParameter("dimension K must be >= 1".into()));
    }
    if let Some(x0) = x0 {
        check_shape(g, x0)?;
        if x0.cols() != k {
            return Err(Error::DimensionMismatch {
                expected: k,
                found: x0.cols(),
            });
        }
        let d = run(x0.data().to_vec());
        let f = d.f;
        return Ok((d, vec![f]));
    }
    let r = start_radius(g);
    let runs: Vec<Descent> = (0..cfg.restarts)
        .into_par_iter()
        .map(|i| {
            let mut rng = SeededRng::substream(cfg.seed, i as u64);
            run(random_start(g.n(), k, r, &mut rng))
        })
        .collect();
    let objectives: Vec<f64> = runs.iter().map(|d| d.f).collect();
    let best = runs
        .into_iter()
        .enumerate()
        .min_by(|(i, a), (j, b)| a.f.total_cmp(&b.f).then(i.cmp(j)))
        .map(|(_, d)| d)
        .expect("at least one restart");
    Ok((best, objectives))
}

fn finish(
    g: &WeightedGraph,
    k: usize,
    cfg: &DescentConfig,
    method: &str,
    best: Descent,
    objectives: Vec<f64>,
) -> Solution {
    let x = Matrix::new(g.n(), k, best.x).expect("finite iterate");
    Solution {
        report: Report {
            method: method.into(),
            k,
            final_objective: best.f,
            max_violation: max_violation(g, &x),
            iterations: best.iterations,
            seed: cfg.seed,
            sum_slack_squared: None,
        },
        realization: x,
        restart_objectives: objectives,
    }
}

/// Minimizes the quartic objective. With `x0` a single refinement run is
/// made from it; otherwise `cfg.restarts` random starts are tried.
pub fn solve_quartic(
    g: &WeightedGraph,
    k: usize,
    cfg: &DescentConfig,
    x0: Option<&Realization>,
) -> Result<Solution> {
    let eval = |x: &[f64], gr: Option<&mut [f64]>| quartic_eval(g, x, k, gr);
    let (best, obj) = multistart(g, k, cfg, x0, &|x| descend(&eval, x, cfg))?;
    Ok(finish(g, k, cfg, "qrt", best, obj))
}

/// Penalty QCQP: slack variables `s_uv = ||x_u - x_v||^2 - d_uv^2` are
/// eliminated, leaving the quartic objective. The report carries the slack
/// sum of squares.
pub fn penalty_qcqp_solve(g: &WeightedGraph, k: usize, cfg: &DescentConfig) -> Result<Solution> {
    let mut sol = solve_quartic(g, k, cfg, None)?;
    sol.report.method = "penalty-qcqp".into();
    let slack: f64 = g
        .edges()
        .iter()
        .map(|e| {
            let s = sq_dist(sol.realization.row(e.u), sol.realization.row(e.v)) - e.w * e.w;
            s * s
        })
        .sum();
    sol.report.sum_slack_squared = Some(slack);
    Ok(sol)
}

/// Minimizes the interval objective by subgradient-based descent.
pub fn solve_interval(
    g: &WeightedGraph,
    iv: &IntervalWeights,
    k: usize,
    cfg: &DescentConfig,
) -> Result<Solution> {
    check_intervals(g, iv)?;
    let eval = |x: &[f64], gr: Option<&mut [f64]>| interval_eval(g, iv, x, k, gr);
    let (best, obj) = multistart(g, k, cfg, None, &|x| descend(&eval, x, cfg))?;
    let mut sol = finish(g, k, cfg, "interval", best, obj);
    sol.report.max_violation = g
        .edges()
        .iter()
        .zip(iv.bounds())
        .map(|(e, &(lo, hi))| {
            let d = sq_dist(sol.realization.row(e.u), sol.realization.row(e.v)).sqrt();
            (lo - d).max(d - hi).max(0.0)
        })
        .fold(0.0, f64::max);
    Ok(sol)
}

/// Edge whose distance exceeds its bound.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Violation {
    pub u: usize,
    pub v: usize,
    pub excess: f64,
}

#[derive(Clone, Debug)]
pub struct PushPullSolution {
    pub solution: Solution,
    /// Edges with `||x_u - x_v|| - d_uv > 1e-6`.
    pub violations: Vec<Violation>,
    /// Sum of squared edge lengths at the returned point.
    pub spread: f64,
}

/// Penalty rounds and growth factor of the push-and-pull schedule.
pub const PUSHPULL_ROUNDS: usize = 5;
pub const PUSHPULL_GROWTH: f64 = 10.0;

fn pushpull_eval(g: &WeightedGraph, mu: f64, x: &[f64], k: usize, grad: Option<&mut [f64]>) -> f64 {
    let mut f = 0.0;
    let mut grad = grad;
    if let Some(gr) = grad.as_deref_mut() {
        gr.iter_mut().for_each(|v| *v = 0.0);
    }
    for e in g.edges() {
        let (xu, xv) = (&x[e.u * k..(e.u + 1) * k], &x[e.v * k..(e.v + 1) * k]);
        let s = sq_dist(xu, xv);
        let over = (s - e.w * e.w).max(0.0);
        f += -s + mu * over * over;
        if let Some(gr) = grad.as_deref_mut() {
            let slope = -1.0 + 2.0 * mu * over;
            for c in 0..k {
                let t = 2.0 * slope * (xu[c] - xv[c]);
                gr[e.u * k + c] += t;
                gr[e.v * k + c] -= t;
            }
        }
    }
    f
}

/// Push-and-pull: maximize the total squared edge length subject to
/// `||x_u - x_v|| <= d_uv`, through a quadratic penalty whose weight starts
/// at `mu` and grows tenfold over five rounds.
pub fn pushpull_solve(
    g: &WeightedGraph,
    k: usize,
    cfg: &DescentConfig,
    mu: f64,
    x0: Option<&Realization>,
) -> Result<PushPullSolution> {
    if !(mu > 0.0 && mu.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "penalty weight {mu} must be > 0"
        )));
    }
    let run = |x: Vec<f64>| {
        let mut d = Descent {
            x,
            f: 0.0,
            iterations: 0,
        };
        let mut m = mu;
        for _ in 0..PUSHPULL_ROUNDS {
            let eval = |x: &[f64], gr: Option<&mut [f64]>| pushpull_eval(g, m, x, k, gr);
            let next = descend(&eval, d.x, cfg);
            d = Descent {
                x: next.x,
                f: next.f,
                iterations: d.iterations + next.iterations,
            };
            m *= PUSHPULL_GROWTH;
        }
        d
    };
    let (best, obj) = multistart(g, k, cfg, x0, &run)?;
    let mut sol = finish(g, k, cfg, "pushpull", best, obj);
    let x = &sol.realization;
    let mut violations = Vec::new();
    let mut spread = 0.0;
    let mut worst: f64 = 0.0;
    for e in g.edges() {
        let s = sq_dist(x.row(e.u), x.row(e.v));
        spread += s;
        let excess = s.sqrt() - e.w;
        worst = worst.max(excess);
        if excess > 1e-6 {
            violations.push(Violation {
                u: e.u,
                v: e.v,
                excess,
            });
        }
    }
    sol.report.max_violation = worst;
    Ok(PushPullSolution {
        solution: sol,
        violations,
        spread,
    })
}
