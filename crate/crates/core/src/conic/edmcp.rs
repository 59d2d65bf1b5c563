//! Euclidean distance matrix completion.
//!
//! Minimizes the ℓ₁ mismatch between a PSD matrix `G` and `-1/2 J Δ J`,
//! where `Δ` holds the known squared distances and free unknown entries.
//! The two blocks are updated in turn: `G` by PSD projection, the unknown
//! entries by least squares against `G`. A zero objective certifies that
//! the partial matrix is completable.

use serde::{Deserialize, Serialize};

use super::admm::AdmmSettings;
use crate::error::Result;
use crate::graphs::PartialDistanceMatrix;
use crate::linalg::{
    gram_from_edm, jacobi_eig, psd_project, realization_from_gram, Matrix, Realization,
};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EdmcpResult {
    pub gram: Matrix,
    /// Completed squared distance matrix.
    pub completed: Matrix,
    pub objective: f64,
    pub iterations: usize,
    pub converged: bool,
}

impl EdmcpResult {
    /// Realization of the Gram matrix in its numerical rank.
    pub fn realization(&self) -> Result<Realization> {
        realization_from_gram(&self.gram, None)
    }
}

fn centering(n: usize) -> Matrix {
    let c = 1.0 / n as f64;
    Matrix::from_fn(n, n, |i, j| if i == j { 1.0 - c } else { -c })
}

fn l1_gap(a: &Matrix, b: &Matrix) -> f64 {
    a.data()
        .iter()
        .zip(b.data())
        .map(|(x, y)| (x - y).abs())
        .sum()
}

/// Alternating minimization; `settings.tol` bounds the ℓ₁ objective and
/// `settings.max_iter` the number of rounds.
pub fn edmcp_sdp_solve(
    pdm: &PartialDistanceMatrix,
    settings: &AdmmSettings,
) -> Result<EdmcpResult> {
    let n = pdm.n();
    let mut delta = pdm.value().map(|v| v * v);
    let unknown = pdm.unknown_pairs();
    if n <= 1 {
        return Ok(EdmcpResult {
            gram: Matrix::zeros(n, n),
            completed: Matrix::zeros(n, n),
            objective: 0.0,
            iterations: 0,
            converged: true,
        });
    }

    // Normal equations of the least-squares step. With E_a = e_i e_j^T +
    // e_j e_i^T for unknown pair a = (i, j):
    // <J E_a J, J E_b J> = 2 (J_ik J_jl + J_il J_jk).
    let j = centering(n);
    let p = unknown.len();
    let normal = Matrix::from_fn(p, p, |a, b| {
        let ((i, jj), (k, l)) = (unknown[a], unknown[b]);
        2.0 * (j[(i, k)] * j[(jj, l)] + j[(i, l)] * j[(jj, k)])
    });
    let normal_pinv = if p > 0 {
        let eig = jacobi_eig(&normal)?;
        let top = eig.eigenvalues.last().copied().unwrap_or(0.0).max(1e-300);
        eig.reconstruct_with(|l| if l > 1e-12 * top { 1.0 / l } else { 0.0 })
    } else {
        Matrix::zeros(0, 0)
    };

    let mut iterations = 0;
    loop {
        let b = gram_from_edm(&delta)?;
        let g = psd_project(&b)?;
        let objective = l1_gap(&g, &b);
        if objective <= settings.tol || iterations >= settings.max_iter || p == 0 {
            return Ok(EdmcpResult {
                converged: objective <= settings.tol,
                gram: g,
                completed: delta,
                objective,
                iterations,
            });
        }
        iterations += 1;

        // Fit -1/2 J (Δ0 + sum δ_a E_a) J to G where Δ0 has the unknowns
        // zeroed: (1/4) N δ = (J R J)_a with R = -1/2 J Δ0 J - G.
        let mut d0 = delta.clone();
        for &(a, b) in &unknown {
            d0[(a, b)] = 0.0;
            d0[(b, a)] = 0.0;
        }
        let r = gram_from_edm(&d0)?.sub(&g)?;
        let jrj = j.matmul(&r)?.matmul(&j)?;
        let rhs: Vec<f64> = unknown.iter().map(|&(a, b)| 4.0 * jrj[(a, b)]).collect();
        let sol = normal_pinv.mul_vec(&rhs)?;
        for (&(a, b), &v) in unknown.iter().zip(&sol) {
            let v = v.max(0.0);
            delta[(a, b)] = v;
            delta[(b, a)] = v;
        }
    }
}
