//! Small conic solvers and the distance geometry relaxations built on them.
//!
//! - [`admm`]: operator-splitting SDP solver
//! - [`simplex`]: dense two-phase simplex with Bland's rule
//! - [`ddp`]: inner and outer diagonally dominant LP approximations
//! - [`edmcp`]: distance matrix completion by alternating projections

pub mod admm;
pub mod ddp;
pub mod edmcp;
pub mod simplex;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graphs::WeightedGraph;
use crate::linalg::Matrix;

pub use admm::{admm_sdp_solve, AdmmResult, AdmmSettings};
pub use ddp::{ddp_dual, ddp_primal, solve_ddp, DdpSolution};
pub use edmcp::{edmcp_sdp_solve, EdmcpResult};
pub use simplex::{simplex_solve, LpConstraint, LpProblem, LpSolution, LpStatus};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Sense {
    #[serde(rename = "=")]
    Eq,
    #[serde(rename = "<=")]
    Le,
    #[serde(rename = ">=")]
    Ge,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SdpConstraint {
    pub a: Matrix,
    pub sense: Sense,
    pub rhs: f64,
}

/// `min <C, X>` subject to `<A_i, X> (= | <=) b_i` and `X` PSD.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SdpProblem {
    pub n: usize,
    pub objective: Matrix,
    pub constraints: Vec<SdpConstraint>,
}

impl SdpProblem {
    pub fn new(objective: Matrix, constraints: Vec<SdpConstraint>) -> Result<Self> {
        objective.check_symmetric()?;
        let n = objective.rows();
        for c in &constraints {
            if c.a.rows() != n || !c.a.is_square() {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    found: c.a.rows(),
                });
            }
            c.a.check_symmetric()?;
            if c.sense == Sense::Ge {
                return Err(Error::InvalidParameter(
                    "write >= rows as <= rows with negated data".into(),
                ));
            }
        }
        Ok(Self {
            n,
            objective,
            constraints,
        })
    }

    /// Largest constraint violation at `x`.
    pub fn violation(&self, x: &Matrix) -> f64 {
        self.constraints
            .iter()
            .map(|c| {
                let v = c.a.dot(x) - c.rhs;
                match c.sense {
                    Sense::Eq => v.abs(),
                    Sense::Le => v.max(0.0),
                    Sense::Ge => (-v).max(0.0),
                }
            })
            .fold(0.0, f64::max)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("serializable")
    }
}

/// Objective choices for the DGP relaxation.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum SdpObjective {
    Trace,
    PushPull,
    Mixed(f64),
}

/// Default weight of the trace term in [`SdpObjective::Mixed`].
pub const DEFAULT_GAMMA: f64 = 0.01;

/// `E_uv` with `<E_uv, X> = X_uu + X_vv - 2 X_uv`.
pub fn edge_matrix(n: usize, u: usize, v: usize) -> Matrix {
    let mut e = Matrix::zeros(n, n);
    e[(u, u)] = 1.0;
    e[(v, v)] = 1.0;
    e[(u, v)] = -1.0;
    e[(v, u)] = -1.0;
    e
}

fn pushpull_matrix(g: &WeightedGraph) -> Matrix {
    let mut c = Matrix::zeros(g.n(), g.n());
    for e in g.edges() {
        c[(e.u, e.u)] += 1.0;
        c[(e.v, e.v)] += 1.0;
        c[(e.u, e.v)] -= 1.0;
        c[(e.v, e.u)] -= 1.0;
    }
    c
}

/// SDP relaxation of the DGP with one equality per edge.
pub fn dgp_sdp(g: &WeightedGraph, objective: SdpObjective) -> Result<SdpProblem> {
    let n = g.n();
    let c = match objective {
        SdpObjective::Trace => Matrix::identity(n),
        SdpObjective::PushPull => pushpull_matrix(g),
        SdpObjective::Mixed(gamma) => {
            if gamma.is_nan() || gamma < 0.0 {
                return Err(Error::InvalidParameter(format!(
                    "gamma {gamma} must be >= 0"
                )));
            }
            pushpull_matrix(g).add(&Matrix::identity(n).scale(gamma))?
        }
    };
    let cons = g
        .edges()
        .iter()
        .map(|e| SdpConstraint {
            a: edge_matrix(n, e.u, e.v),
            sense: Sense::Eq,
            rhs: e.w * e.w,
        })
        .collect();
    SdpProblem::new(c, cons)
}

/// Push-and-pull SDP: maximize the total squared edge length subject to
/// `X_uu + X_vv - 2 X_uv <= d_uv^2` (stated as minimizing its negation).
pub fn pushpull_sdp(g: &WeightedGraph) -> Result<SdpProblem> {
    let n = g.n();
    let cons = g
        .edges()
        .iter()
        .map(|e| SdpConstraint {
            a: edge_matrix(n, e.u, e.v),
            sense: Sense::Le,
            rhs: e.w * e.w,
        })
        .collect();
    SdpProblem::new(pushpull_matrix(g).scale(-1.0), cons)
}

/// Upper-triangle flattening with off-diagonal entries doubled, so that
/// `<A, X> = sum over i <= j of flat(A)_ij * X_ij`.
pub fn flatten_objective(a: &Matrix) -> Vec<f64> {
    let n = a.rows();
    let mut out = Vec::with_capacity(n * (n + 1) / 2);
    for i in 0..n {
        for j in i..n {
            out.push(if i == j { a[(i, i)] } else { 2.0 * a[(i, j)] });
        }
    }
    out
}

/// Index of `(i, j)`, `i <= j`, in the upper-triangle flattening.
pub fn triu_index(n: usize, i: usize, j: usize) -> usize {
    let (i, j) = if i <= j { (i, j) } else { (j, i) };
    i * n - i * (i + 1) / 2 + j
}
