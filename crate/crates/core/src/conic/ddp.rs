//! Diagonally dominant LP approximations of the push-and-pull SDP.
//!
//! The matrix variable `X` is flattened to its upper triangle (see
//! [`triu_index`]). The primal program adds one `T_ij >= |X_ij|` variable
//! per off-diagonal pair and is an inner approximation of the PSD cone; the
//! dual program uses the generators `e_i` and `e_i +- e_j` of the dd cone and
//! is an outer approximation.

use serde::{Deserialize, Serialize};

use super::simplex::{simplex_solve, LpProblem, LpStatus};
use super::{triu_index, Sense};
use crate::error::Result;
use crate::graphs::WeightedGraph;
use crate::linalg::{jacobi_eig, Matrix};

fn edge_terms(n: usize, u: usize, v: usize) -> [(usize, f64); 3] {
    [
        (triu_index(n, u, u), 1.0),
        (triu_index(n, v, v), 1.0),
        (triu_index(n, u, v), -2.0),
    ]
}

fn edge_objective(g: &WeightedGraph, nvars: usize) -> Vec<f64> {
    let n = g.n();
    let mut c = vec![0.0; nvars];
    for e in g.edges() {
        for (j, a) in edge_terms(n, e.u, e.v) {
            c[j] += a;
        }
    }
    c
}

fn free_offdiagonal(p: &mut LpProblem, n: usize) {
    for i in 0..n {
        for j in (i + 1)..n {
            p.bounds[triu_index(n, i, j)] = (f64::NEG_INFINITY, f64::INFINITY);
        }
    }
}

/// Inner approximation: `max sum_E (X_uu + X_vv - 2 X_uv)` with
/// `X_uu + X_vv - 2 X_uv <= d_uv^2`, `sum_{j != i} T_ij <= X_ii` and
/// `-T <= X <= T`.
pub fn ddp_primal(g: &WeightedGraph) -> LpProblem {
    let n = g.n();
    let nx = n * (n + 1) / 2;
    let nt = n * n.saturating_sub(1) / 2;
    let t_index = |i: usize, j: usize| {
        let (i, j) = if i < j { (i, j) } else { (j, i) };
        nx + i * n - i * (i + 1) / 2 + (j - i - 1)
    };
    let mut p = LpProblem::new(edge_objective(g, nx + nt), true);
    free_offdiagonal(&mut p, n);
    for e in g.edges() {
        p.add_sparse(&edge_terms(n, e.u, e.v), Sense::Le, e.w * e.w);
    }
    for i in 0..n {
        let mut terms: Vec<(usize, f64)> = (0..n)
            .filter(|&j| j != i)
            .map(|j| (t_index(i, j), 1.0))
            .collect();
        terms.push((triu_index(n, i, i), -1.0));
        p.add_sparse(&terms, Sense::Le, 0.0);
    }
    for i in 0..n {
        for j in (i + 1)..n {
            let (x, t) = (triu_index(n, i, j), t_index(i, j));
            p.add_sparse(&[(x, 1.0), (t, -1.0)], Sense::Le, 0.0);
            p.add_sparse(&[(x, -1.0), (t, -1.0)], Sense::Le, 0.0);
        }
    }
    p
}

/// Outer approximation: edge equalities and `v^T X v >= 0` for every
/// generator `v` of the dd cone, with the same objective.
pub fn ddp_dual(g: &WeightedGraph) -> LpProblem {
    let n = g.n();
    let nx = n * (n + 1) / 2;
    let mut p = LpProblem::new(edge_objective(g, nx), true);
    p.bounds = vec![(f64::NEG_INFINITY, f64::INFINITY); nx];
    for e in g.edges() {
        p.add_sparse(&edge_terms(n, e.u, e.v), Sense::Eq, e.w * e.w);
    }
    for i in 0..n {
        p.add_sparse(&[(triu_index(n, i, i), 1.0)], Sense::Ge, 0.0);
    }
    for i in 0..n {
        for j in (i + 1)..n {
            for s in [1.0, -1.0] {
                p.add_sparse(
                    &[
                        (triu_index(n, i, i), 1.0),
                        (triu_index(n, j, j), 1.0),
                        (triu_index(n, i, j), 2.0 * s),
                    ],
                    Sense::Ge,
                    0.0,
                );
            }
        }
    }
    p
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DdpSolution {
    pub status: LpStatus,
    pub objective: f64,
    pub x: Matrix,
    pub eigenvalues: Vec<f64>,
    pub negative_eigenvalues: usize,
}

/// Solves a program from [`ddp_primal`] or [`ddp_dual`] on `n` vertices and
/// reports the spectrum of the resulting `X`.
pub fn solve_ddp(n: usize, p: &LpProblem) -> Result<DdpSolution> {
    let s = simplex_solve(p)?;
    let x = if s.status == LpStatus::Optimal {
        Matrix::from_fn(n, n, |i, j| s.x[triu_index(n, i, j)])
    } else {
        Matrix::zeros(n, n)
    };
    let eigenvalues = jacobi_eig(&x)?.eigenvalues;
    let scale = eigenvalues.iter().fold(1.0_f64, |m, l| m.max(l.abs()));
    let negative_eigenvalues = eigenvalues.iter().filter(|&&l| l < -1e-9 * scale).count();
    Ok(DdpSolution {
        status: s.status,
        objective: s.objective,
        x,
        eigenvalues,
        negative_eigenvalues,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn is_dd(x: &Matrix) -> bool {
        (0..x.rows()).all(|i| {
            let off: f64 = (0..x.cols())
                .filter(|&j| j != i)
                .map(|j| x[(i, j)].abs())
                .sum();
            off <= x[(i, i)] + 1e-9
        })
    }

    #[test]
    fn primal_k2() {
        let g = WeightedGraph::path(2, 1.0);
        let s = solve_ddp(2, &ddp_primal(&g)).unwrap();
        assert_eq!(s.status, LpStatus::Optimal);
        assert!((s.objective - 1.0).abs() < 1e-9);
        assert!(is_dd(&s.x));
        assert!(s.eigenvalues[0] >= -1e-9);
    }

    #[test]
    fn primal_empty_graph() {
        let s = solve_ddp(3, &ddp_primal(&WeightedGraph::empty(3))).unwrap();
        assert_eq!(s.status, LpStatus::Optimal);
        assert_eq!(s.objective, 0.0);
    }

    #[test]
    fn primal_solutions_are_psd() {
        let g = WeightedGraph::new(
            5,
            [
                (0, 1, 1.0),
                (1, 2, 2.0),
                (2, 3, 1.5),
                (3, 4, 1.0),
                (0, 4, 2.5),
                (1, 3, 0.7),
            ],
        )
        .unwrap();
        let s = solve_ddp(5, &ddp_primal(&g)).unwrap();
        assert!(is_dd(&s.x));
        assert!(s.eigenvalues[0] >= -1e-9);
        assert_eq!(s.negative_eigenvalues, 0);
    }

    #[test]
    fn dual_k2_is_forced() {
        let s = solve_ddp(2, &ddp_dual(&WeightedGraph::path(2, 1.0))).unwrap();
        assert_eq!(s.status, LpStatus::Optimal);
        assert!((s.objective - 1.0).abs() < 1e-9);
    }

    #[test]
    fn dual_triangle_reports_spectrum() {
        let s = solve_ddp(3, &ddp_dual(&WeightedGraph::cycle(3, 1.0))).unwrap();
        assert_eq!(s.status, LpStatus::Optimal);
        assert!((s.objective - 3.0).abs() < 1e-9);
        let neg = s.eigenvalues.iter().filter(|&&l| l < -1e-9).count();
        assert_eq!(neg, s.negative_eigenvalues);
        // generator rows hold at the solution
        for i in 0..3 {
            assert!(s.x[(i, i)] >= -1e-9);
            for j in (i + 1)..3 {
                assert!(s.x[(i, i)] + s.x[(j, j)] - 2.0 * s.x[(i, j)].abs() >= -1e-9);
            }
        }
    }
}
