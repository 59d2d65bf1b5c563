//! ADMM for small SDPs.
//!
//! The variable is `y = (svec X, s)` with one nonnegative slack per `<=` row.
//! Iterates alternate between the affine set `M y = b` and the cone
//! `PSD x R+`:
//!
//! ```text
//! w = P_aff(z - u - c / rho)
//! z = P_cone(w + u)
//! u = u + w - z
//! ```
//!
//! `svec` scales off-diagonal entries by sqrt(2) so that Euclidean
//! projection in `y` space is Frobenius projection in matrix space.

use serde::{Deserialize, Serialize};

use super::{SdpProblem, Sense};
use crate::error::Result;
use crate::linalg::{jacobi_eig, psd_project, Matrix};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AdmmSettings {
    pub tol: f64,
    pub max_iter: usize,
    pub rho: f64,
}

impl Default for AdmmSettings {
    fn default() -> Self {
        Self {
            tol: 1e-7,
            max_iter: 50_000,
            rho: 1.0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AdmmResult {
    /// PSD iterate (the cone side of the splitting).
    pub x: Matrix,
    pub objective: f64,
    /// Largest constraint violation at `x`.
    pub primal_residual: f64,
    pub dual_residual: f64,
    pub iterations: usize,
    pub converged: bool,
}

const SQRT2: f64 = std::f64::consts::SQRT_2;

fn svec(a: &Matrix, out: &mut [f64]) {
    let n = a.rows();
    let mut k = 0;
    for i in 0..n {
        for j in i..n {
            out[k] = if i == j { a[(i, i)] } else { SQRT2 * a[(i, j)] };
            k += 1;
        }
    }
}

fn smat(n: usize, v: &[f64]) -> Matrix {
    let mut a = Matrix::zeros(n, n);
    let mut k = 0;
    for i in 0..n {
        for j in i..n {
            if i == j {
                a[(i, i)] = v[k];
            } else {
                let x = v[k] / SQRT2;
                a[(i, j)] = x;
                a[(j, i)] = x;
            }
            k += 1;
        }
    }
    a
}

/// Pseudo-inverse of a symmetric PSD matrix from its spectrum.
fn pinv_symmetric(a: &Matrix) -> Result<Matrix> {
    let eig = jacobi_eig(a)?;
    let top = eig.eigenvalues.iter().fold(0.0_f64, |m, l| m.max(l.abs()));
    let cut = 1e-12 * top.max(1e-300);
    Ok(eig.reconstruct_with(|l| if l.abs() > cut { 1.0 / l } else { 0.0 }))
}

struct Affine {
    m: Matrix,
    w: Matrix,
    b: Vec<f64>,
}

impl Affine {
    /// `y - M^T W (M y - b)`, in place.
    fn project(&self, y: &mut [f64]) {
        let r: Vec<f64> = (0..self.m.rows())
            .map(|i| crate::linalg::dot(self.m.row(i), y) - self.b[i])
            .collect();
        let t = self.w.mul_vec(&r).expect("shape");
        for (i, ti) in t.iter().enumerate() {
            if *ti == 0.0 {
                continue;
            }
            for (yj, mij) in y.iter_mut().zip(self.m.row(i)) {
                *yj -= mij * ti;
            }
        }
    }
}

pub fn admm_sdp_solve(p: &SdpProblem, settings: &AdmmSettings) -> Result<AdmmResult> {
    let n = p.n;
    let nx = n * (n + 1) / 2;
    let slack_rows: Vec<usize> = p
        .constraints
        .iter()
        .enumerate()
        .filter(|(_, c)| c.sense == Sense::Le)
        .map(|(i, _)| i)
        .collect();
    let dim = nx + slack_rows.len();
    let rows = p.constraints.len();

    let mut m = Matrix::zeros(rows, dim);
    let mut b = vec![0.0; rows];
    for (i, c) in p.constraints.iter().enumerate() {
        svec(&c.a, &mut m.row_mut(i)[..nx]);
        b[i] = c.rhs;
    }
    for (s, &i) in slack_rows.iter().enumerate() {
        m[(i, nx + s)] = 1.0;
    }
    let w = pinv_symmetric(&m.gram())?;
    let aff = Affine { m, w, b };

    let mut c = vec![0.0; dim];
    svec(&p.objective, &mut c[..nx]);

    let mut rho = settings.rho;
    let mut z = vec![0.0; dim];
    let mut u = vec![0.0; dim];
    let mut wv = vec![0.0; dim];
    let mut iterations = 0;
    let mut dual_res = f64::INFINITY;
    let mut x = Matrix::zeros(n, n);
    let mut converged = false;

    while iterations < settings.max_iter {
        iterations += 1;
        for k in 0..dim {
            wv[k] = z[k] - u[k] - c[k] / rho;
        }
        aff.project(&mut wv);

        let mut zn: Vec<f64> = wv.iter().zip(&u).map(|(a, b)| a + b).collect();
        x = psd_project(&smat(n, &zn[..nx]))?;
        svec(&x, &mut zn[..nx]);
        for v in &mut zn[nx..] {
            *v = v.max(0.0);
        }

        let mut r2 = 0.0;
        let mut s2 = 0.0;
        for k in 0..dim {
            let r = wv[k] - zn[k];
            u[k] += r;
            r2 += r * r;
            let s = zn[k] - z[k];
            s2 += s * s;
        }
        z = zn;
        let prim = r2.sqrt();
        dual_res = rho * s2.sqrt();

        if prim <= settings.tol && dual_res <= settings.tol && p.violation(&x) <= settings.tol {
            converged = true;
            break;
        }
        // residual balancing; the scaled dual rescales with rho
        if iterations % 10 == 0 {
            if prim > 10.0 * dual_res {
                rho *= 2.0;
                u.iter_mut().for_each(|v| *v *= 0.5);
            } else if dual_res > 10.0 * prim {
                rho *= 0.5;
                u.iter_mut().for_each(|v| *v *= 2.0);
            }
        }
    }

    Ok(AdmmResult {
        objective: p.objective.dot(&x),
        primal_residual: p.violation(&x),
        dual_residual: dual_res,
        iterations,
        converged,
        x,
    })
}
