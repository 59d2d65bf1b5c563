//! Dense real linear algebra.
//!
//! Everything here works on a small row-major [`Matrix`]. The symmetric
//! eigensolver is a cyclic Jacobi iteration with threshold sweeps; it is slow
//! next to LAPACK but unconditionally robust for symmetric input, which is all
//! the distance-geometry routines need.
//!
//! Conversions between realizations, Gram matrices and squared Euclidean
//! distance matrices (EDMs) live here as well:
//!
//! ```text
//! realization x (n x K) --edm_from_realization--> D2 (n x n)
//! D2 --gram_from_edm--> G = -1/2 J D2 J,  J = I - (1/n) 11^T
//! G --realization_from_gram--> P sqrt(max(L, 0))
//! ```

use std::io::{Read, Write};
use std::ops::{Index, IndexMut};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Relative tolerance for the symmetry precondition.
pub const SYMMETRY_TOL: f64 = 1e-10;

/// Jacobi sweep cap.
pub const MAX_SWEEPS: usize = 100;

/// Row-major dense matrix with finite entries.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

/// An n x K matrix of vertex positions, one row per vertex.
pub type Realization = Matrix;

impl Matrix {
    pub fn new(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::DimensionMismatch {
                expected: rows * cols,
                found: data.len(),
            });
        }
        if let Some(k) = data.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite(k / cols.max(1), k % cols.max(1)));
        }
        Ok(Self { rows, cols, data })
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = 1.0;
        }
        m
    }

    pub fn from_diag(diag: &[f64]) -> Self {
        let mut m = Self::zeros(diag.len(), diag.len());
        for (i, &v) in diag.iter().enumerate() {
            m[(i, i)] = v;
        }
        m
    }

    /// Builds a matrix from equal-length rows.
    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self> {
        let cols = rows.first().map_or(0, |r| r.as_ref().len());
        let mut data = Vec::with_capacity(rows.len() * cols);
        for r in rows {
            let r = r.as_ref();
            if r.len() != cols {
                return Err(Error::DimensionMismatch {
                    expected: cols,
                    found: r.len(),
                });
            }
            data.extend_from_slice(r);
        }
        Self::new(rows.len(), cols, data)
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn into_data(self) -> Vec<f64> {
        self.data
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn row_mut(&mut self, i: usize) -> &mut [f64] {
        &mut self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn col(&self, j: usize) -> Vec<f64> {
        (0..self.rows).map(|i| self[(i, j)]).collect()
    }

    pub fn diag(&self) -> Vec<f64> {
        (0..self.rows.min(self.cols))
            .map(|i| self[(i, i)])
            .collect()
    }

    pub fn trace(&self) -> f64 {
        self.diag().iter().sum()
    }

    pub fn transpose(&self) -> Matrix {
        Matrix::from_fn(self.cols, self.rows, |i, j| self[(j, i)])
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Matrix {
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|&v| f(v)).collect(),
        }
    }

    pub fn scale(&self, s: f64) -> Matrix {
        self.map(|v| v * s)
    }

    fn zip_with(&self, other: &Matrix, f: impl Fn(f64, f64) -> f64) -> Result<Matrix> {
        if self.rows != other.rows || self.cols != other.cols {
            return Err(Error::DimensionMismatch {
                expected: self.rows * self.cols,
                found: other.rows * other.cols,
            });
        }
        Ok(Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        })
    }

    pub fn add(&self, other: &Matrix) -> Result<Matrix> {
        self.zip_with(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &Matrix) -> Result<Matrix> {
        self.zip_with(other, |a, b| a - b)
    }

    /// Frobenius inner product.
    pub fn dot(&self, other: &Matrix) -> f64 {
        self.data.iter().zip(&other.data).map(|(a, b)| a * b).sum()
    }

    pub fn matmul(&self, other: &Matrix) -> Result<Matrix> {
        if self.cols != other.rows {
            return Err(Error::DimensionMismatch {
                expected: self.cols,
                found: other.rows,
            });
        }
        let mut out = Matrix::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            let orow = &mut out.data[i * other.cols..(i + 1) * other.cols];
            for k in 0..self.cols {
                let a = self.data[i * self.cols + k];
                if a == 0.0 {
                    continue;
                }
                let brow = other.row(k);
                for (o, &b) in orow.iter_mut().zip(brow) {
                    *o += a * b;
                }
            }
        }
        Ok(out)
    }

    /// `self * other^T`, computed row against row.
    pub fn matmul_t(&self, other: &Matrix) -> Result<Matrix> {
        if self.cols != other.cols {
            return Err(Error::DimensionMismatch {
                expected: self.cols,
                found: other.cols,
            });
        }
        Ok(Matrix::from_fn(self.rows, other.rows, |i, j| {
            dot(self.row(i), other.row(j))
        }))
    }

    /// `self * self^T`, exploiting symmetry.
    pub fn gram(&self) -> Matrix {
        let n = self.rows;
        let mut g = Matrix::zeros(n, n);
        for i in 0..n {
            for j in i..n {
                let v = dot(self.row(i), self.row(j));
                g[(i, j)] = v;
                g[(j, i)] = v;
            }
        }
        g
    }

    pub fn mul_vec(&self, v: &[f64]) -> Result<Vec<f64>> {
        if v.len() != self.cols {
            return Err(Error::DimensionMismatch {
                expected: self.cols,
                found: v.len(),
            });
        }
        Ok((0..self.rows).map(|i| dot(self.row(i), v)).collect())
    }

    pub fn frobenius(&self) -> f64 {
        self.data.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Checks squareness and symmetry within [`SYMMETRY_TOL`] relative to the
    /// largest entry.
    pub fn check_symmetric(&self) -> Result<()> {
        if !self.is_square() {
            return Err(Error::NotSquare {
                rows: self.rows,
                cols: self.cols,
            });
        }
        let tol = SYMMETRY_TOL * self.max_abs().max(1.0);
        for i in 0..self.rows {
            for j in (i + 1)..self.cols {
                let gap = (self[(i, j)] - self[(j, i)]).abs();
                if gap > tol {
                    return Err(Error::NotSymmetric { i, j, gap });
                }
            }
        }
        Ok(())
    }

    /// `(A + A^T) / 2`.
    pub fn symmetrized(&self) -> Matrix {
        Matrix::from_fn(self.rows, self.cols, |i, j| {
            0.5 * (self[(i, j)] + self[(j, i)])
        })
    }

    /// Keeps the first `k` columns, padding with zero columns when `k`
    /// exceeds the column count.
    pub fn with_cols(&self, k: usize) -> Matrix {
        Matrix::from_fn(
            self.rows,
            k,
            |i, j| {
                if j < self.cols {
                    self[(i, j)]
                } else {
                    0.0
                }
            },
        )
    }

    /// Selects rows in the given order.
    pub fn select_rows(&self, idx: &[usize]) -> Matrix {
        let mut data = Vec::with_capacity(idx.len() * self.cols);
        for &i in idx {
            data.extend_from_slice(self.row(i));
        }
        Matrix {
            rows: idx.len(),
            cols: self.cols,
            data,
        }
    }
}

impl Index<(usize, usize)> for Matrix {
    type Output = f64;
    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for Matrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        &mut self.data[i * self.cols + j]
    }
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm2(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

pub fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// Eigenpairs of a symmetric matrix, eigenvalues ascending.
#[derive(Clone, Debug)]
pub struct SpectralDecomposition {
    pub eigenvalues: Vec<f64>,
    /// Orthonormal eigenvectors stored as columns.
    pub eigenvectors: Matrix,
}

impl SpectralDecomposition {
    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    /// `P diag(f(lambda)) P^T`.
    pub fn reconstruct_with(&self, f: impl Fn(f64) -> f64) -> Matrix {
        let n = self.dim();
        let p = &self.eigenvectors;
        let w: Vec<f64> = self.eigenvalues.iter().map(|&l| f(l)).collect();
        let mut out = Matrix::zeros(n, n);
        for i in 0..n {
            for j in i..n {
                let v: f64 = (0..n).map(|k| p[(i, k)] * w[k] * p[(j, k)]).sum();
                out[(i, j)] = v;
                out[(j, i)] = v;
            }
        }
        out
    }

    pub fn reconstruct(&self) -> Matrix {
        self.reconstruct_with(|l| l)
    }

    pub fn eigenvector(&self, k: usize) -> Vec<f64> {
        self.eigenvectors.col(k)
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.eigenvalues.first().copied().unwrap_or(0.0)
    }
}

/// Symmetric eigendecomposition by cyclic Jacobi rotations.
///
/// The input is symmetrized after the tolerance check. Each eigenvector is
/// signed so that its largest-magnitude component (first one on ties) is
/// positive, which makes the output deterministic.
pub fn jacobi_eig(a: &Matrix) -> Result<SpectralDecomposition> {
    a.check_symmetric()?;
    let n = a.rows();
    let mut m = a.symmetrized().into_data();
    let mut v = Matrix::identity(n).into_data();
    let mut d: Vec<f64> = (0..n).map(|i| m[i * n + i]).collect();
    let mut b = d.clone();
    let mut z = vec![0.0; n];

    let mut converged = n <= 1;
    for sweep in 1..=MAX_SWEEPS {
        if converged {
            break;
        }
        let mut off = 0.0;
        for p in 0..n {
            for q in (p + 1)..n {
                off += m[p * n + q].abs();
            }
        }
        if off == 0.0 {
            converged = true;
            break;
        }
        let thresh = if sweep < 4 {
            0.2 * off / (n * n) as f64
        } else {
            0.0
        };
        for p in 0..n.saturating_sub(1) {
            for q in (p + 1)..n {
                let apq = m[p * n + q];
                let g = 100.0 * apq.abs();
                if sweep > 4 && d[p].abs() + g == d[p].abs() && d[q].abs() + g == d[q].abs() {
                    m[p * n + q] = 0.0;
                } else if apq.abs() > thresh {
                    let h = d[q] - d[p];
                    let t = if h.abs() + g == h.abs() {
                        apq / h
                    } else {
                        let theta = 0.5 * h / apq;
                        let t = 1.0 / (theta.abs() + (1.0 + theta * theta).sqrt());
                        if theta < 0.0 {
                            -t
                        } else {
                            t
                        }
                    };
                    let c = 1.0 / (1.0 + t * t).sqrt();
                    let s = t * c;
                    let tau = s / (1.0 + c);
                    let h = t * apq;
                    z[p] -= h;
                    z[q] += h;
                    d[p] -= h;
                    d[q] += h;
                    m[p * n + q] = 0.0;
                    let rot = |x: &mut Vec<f64>, i: usize, j: usize| {
                        let g = x[i];
                        let h = x[j];
                        x[i] = g - s * (h + g * tau);
                        x[j] = h + s * (g - h * tau);
                    };
                    for j in 0..p {
                        rot(&mut m, j * n + p, j * n + q);
                    }
                    for j in (p + 1)..q {
                        rot(&mut m, p * n + j, j * n + q);
                    }
                    for j in (q + 1)..n {
                        rot(&mut m, p * n + j, q * n + j);
                    }
                    for j in 0..n {
                        rot(&mut v, j * n + p, j * n + q);
                    }
                }
            }
        }
        for i in 0..n {
            b[i] += z[i];
            d[i] = b[i];
            z[i] = 0.0;
        }
    }
    if !converged {
        return Err(Error::NoConvergence { sweeps: MAX_SWEEPS });
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| d[i].total_cmp(&d[j]).then(i.cmp(&j)));
    let eigenvalues: Vec<f64> = order.iter().map(|&k| d[k]).collect();
    let mut vectors = Matrix::zeros(n, n);
    for (col, &k) in order.iter().enumerate() {
        let mut lead = 0;
        for i in 0..n {
            if v[i * n + k].abs() > v[lead * n + k].abs() + 1e-12 {
                lead = i;
            }
        }
        let sign = if v[lead * n + k] < 0.0 { -1.0 } else { 1.0 };
        for i in 0..n {
            vectors[(i, col)] = sign * v[i * n + k];
        }
    }
    Ok(SpectralDecomposition {
        eigenvalues,
        eigenvectors: vectors,
    })
}

/// Nearest PSD matrix in Frobenius norm: negative eigenvalues clipped to 0.
pub fn psd_project(a: &Matrix) -> Result<Matrix> {
    let eig = jacobi_eig(a)?;
    Ok(eig.reconstruct_with(|l| l.max(0.0)))
}

/// Squared Euclidean distance matrix of the rows of `x`.
pub fn edm_from_realization(x: &Matrix) -> Matrix {
    let n = x.rows();
    let mut d = Matrix::zeros(n, n);
    for i in 0..n {
        for j in (i + 1)..n {
            let v = sq_dist(x.row(i), x.row(j));
            d[(i, j)] = v;
            d[(j, i)] = v;
        }
    }
    d
}

/// Double centering `G = -1/2 J D2 J`.
pub fn gram_from_edm(d2: &Matrix) -> Result<Matrix> {
    d2.check_symmetric()?;
    let n = d2.rows();
    for i in 0..n {
        let v = d2[(i, i)];
        if v.abs() > SYMMETRY_TOL * d2.max_abs().max(1.0) {
            return Err(Error::BadDiagonal { index: i, value: v });
        }
    }
    if n == 0 {
        return Ok(Matrix::zeros(0, 0));
    }
    let d2 = d2.symmetrized();
    let nf = n as f64;
    let row_mean: Vec<f64> = (0..n).map(|i| d2.row(i).iter().sum::<f64>() / nf).collect();
    let grand = row_mean.iter().sum::<f64>() / nf;
    let mut g = Matrix::from_fn(n, n, |i, j| {
        -0.5 * (d2[(i, j)] - row_mean[i] - row_mean[j] + grand)
    });
    g = g.symmetrized();
    Ok(g)
}

/// Eigenvalues below this fraction of the largest count as zero when the
/// target dimension is left open.
pub const RANK_TOL: f64 = 1e-9;

/// Factor `G ~ Y Y^T` with `Y = P sqrt(max(L, 0))`, columns ordered by
/// descending eigenvalue.
///
/// With `k = Some(K)` the result has exactly K columns (zero-padded if
/// `K > n`); with `None` the numerical rank decides.
pub fn realization_from_gram(g: &Matrix, k: Option<usize>) -> Result<Realization> {
    let eig = jacobi_eig(g)?;
    Ok(factor_from_spectrum(&eig, k))
}

pub(crate) fn factor_from_spectrum(eig: &SpectralDecomposition, k: Option<usize>) -> Realization {
    let n = eig.dim();
    let top = eig.eigenvalues.last().copied().unwrap_or(0.0).max(0.0);
    let cols = k.unwrap_or_else(|| {
        eig.eigenvalues
            .iter()
            .filter(|&&l| l > RANK_TOL * top.max(1.0))
            .count()
            .max(1)
            .min(n.max(1))
    });
    Matrix::from_fn(n, cols, |i, c| {
        if c >= n {
            return 0.0;
        }
        let src = n - 1 - c;
        eig.eigenvectors[(i, src)] * eig.eigenvalues[src].max(0.0).sqrt()
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Norms {
    pub frobenius: f64,
    pub spectral: f64,
    pub max_abs: f64,
}

/// Frobenius, spectral and max-abs norms. The spectral norm comes from power
/// iteration on `A^T A` to relative tolerance 1e-8.
pub fn norms(a: &Matrix) -> Norms {
    Norms {
        frobenius: a.frobenius(),
        spectral: spectral_norm(a),
        max_abs: a.max_abs(),
    }
}

pub fn spectral_norm(a: &Matrix) -> f64 {
    let n = a.cols();
    if n == 0 || a.rows() == 0 || a.max_abs() == 0.0 {
        return 0.0;
    }
    // Deterministic start vector, non-degenerate for typical input.
    let mut v: Vec<f64> = (0..n)
        .map(|i| 1.0 + 0.1 * ((i * 7919) % 13) as f64)
        .collect();
    let nv = norm2(&v);
    v.iter_mut().for_each(|x| *x /= nv);
    let mut sigma2 = 0.0;
    for _ in 0..20_000 {
        let av = a.mul_vec(&v).expect("shape");
        let mut w = vec![0.0; n];
        for (i, &avi) in av.iter().enumerate() {
            for (wj, &rij) in w.iter_mut().zip(a.row(i)) {
                *wj += rij * avi;
            }
        }
        let next = norm2(&w);
        if next == 0.0 {
            return 0.0;
        }
        w.iter_mut().for_each(|x| *x /= next);
        let done = (next - sigma2).abs() <= 1e-8 * next * 1e-2;
        sigma2 = next;
        v = w;
        if done {
            break;
        }
    }
    sigma2.sqrt()
}

/// Spectral norm of a symmetric matrix from its full spectrum.
pub fn symmetric_spectral_norm(a: &Matrix) -> Result<f64> {
    let eig = jacobi_eig(a)?;
    Ok(eig.eigenvalues.iter().fold(0.0_f64, |m, l| m.max(l.abs())))
}

/// Reads a headerless CSV matrix. Ragged rows and non-finite values are
/// rejected.
pub fn read_matrix_csv<R: Read>(reader: R) -> Result<Matrix> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(false)
        .trim(csv::Trim::All)
        .from_reader(reader);
    let mut data = Vec::new();
    let mut cols = None;
    let mut rows = 0;
    for (line, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| Error::parse(line + 1, e.to_string()))?;
        if rec.len() == 1 && rec[0].is_empty() {
            return Err(Error::parse(line + 1, "empty row"));
        }
        match cols {
            None => cols = Some(rec.len()),
            Some(c) if c != rec.len() => {
                return Err(Error::parse(line + 1, "ragged row"));
            }
            _ => {}
        }
        for field in rec.iter() {
            let v: f64 = field
                .parse()
                .map_err(|_| Error::parse(line + 1, format!("not a number: {field:?}")))?;
            if !v.is_finite() {
                return Err(Error::parse(
                    line + 1,
                    format!("non-finite value {field:?}"),
                ));
            }
            data.push(v);
        }
        rows += 1;
    }
    let cols = cols.ok_or(Error::EmptyInput)?;
    Matrix::new(rows, cols, data)
}

pub fn parse_matrix_csv(text: &str) -> Result<Matrix> {
    read_matrix_csv(text.as_bytes())
}

/// Writes one row per line using the shortest round-trip decimal form.
pub fn write_matrix_csv<W: Write>(m: &Matrix, mut w: W) -> Result<()> {
    for i in 0..m.rows() {
        let line: Vec<String> = m.row(i).iter().map(|v| format!("{v}")).collect();
        writeln!(w, "{}", line.join(","))?;
    }
    Ok(())
}

pub fn matrix_to_csv(m: &Matrix) -> String {
    let mut buf = Vec::new();
    write_matrix_csv(m, &mut buf).expect("write to Vec");
    String::from_utf8(buf).expect("ascii")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::SeededRng;
    use proptest::prelude::*;

    fn random_symmetric(n: usize, seed: u64) -> Matrix {
        let mut r = SeededRng::new(seed);
        let a = Matrix::from_fn(n, n, |_, _| r.normal());
        a.add(&a.transpose()).unwrap()
    }

    fn orthonormality_gap(p: &Matrix) -> f64 {
        let ptp = p.transpose().matmul(p).unwrap();
        ptp.sub(&Matrix::identity(p.cols())).unwrap().max_abs()
    }

    #[test]
    fn diagonal_input() {
        let a = Matrix::from_diag(&[3.0, 1.0, 2.0]);
        let e = jacobi_eig(&a).unwrap();
        assert_eq!(e.eigenvalues, vec![1.0, 2.0, 3.0]);
        // columns are unit vectors e1, e2, e0
        assert_eq!(e.eigenvector(0), vec![0.0, 1.0, 0.0]);
        assert_eq!(e.eigenvector(1), vec![0.0, 0.0, 1.0]);
        assert_eq!(e.eigenvector(2), vec![1.0, 0.0, 0.0]);
    }

    #[test]
    fn two_by_two_closed_form() {
        // Characteristic polynomial (2 - l)^2 - 1 = 0 gives l = 1, 3.
        let a = Matrix::from_rows(&[[2.0, 1.0], [1.0, 2.0]]).unwrap();
        let e = jacobi_eig(&a).unwrap();
        assert!((e.eigenvalues[0] - 1.0).abs() < 1e-14);
        assert!((e.eigenvalues[1] - 3.0).abs() < 1e-14);
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let u0 = e.eigenvector(0);
        let u1 = e.eigenvector(1);
        // (1,-1)/sqrt2 up to sign; the tie in magnitude keeps the first positive.
        assert!(
            (u0[0] - s).abs() < 1e-12 && (u0[1] + s).abs() < 1e-12,
            "{u0:?}"
        );
        assert!(
            (u1[0] - s).abs() < 1e-12 && (u1[1] - s).abs() < 1e-12,
            "{u1:?}"
        );
    }

    #[test]
    fn random_six_by_six_reconstructs() {
        let a = random_symmetric(6, 42);
        let e = jacobi_eig(&a).unwrap();
        let resid = a.sub(&e.reconstruct()).unwrap().frobenius();
        assert!(resid <= 1e-8 * a.frobenius().max(1.0), "{resid}");
        assert!(orthonormality_gap(&e.eigenvectors) <= 1e-9);
        assert!(e.eigenvalues.windows(2).all(|w| w[0] <= w[1]));
    }

    #[test]
    fn rejects_bad_shapes() {
        let a = Matrix::zeros(2, 3);
        assert!(matches!(jacobi_eig(&a), Err(Error::NotSquare { .. })));
        let b = Matrix::from_rows(&[[1.0, 2.0], [2.1, 1.0]]).unwrap();
        assert!(matches!(jacobi_eig(&b), Err(Error::NotSymmetric { .. })));
        // within tolerance is accepted and symmetrized
        let c = Matrix::from_rows(&[[1.0, 2.0], [2.0 + 1e-12, 1.0]]).unwrap();
        assert!(jacobi_eig(&c).is_ok());
    }

    #[test]
    fn psd_projection_examples() {
        let psd = Matrix::from_rows(&[[2.0, 1.0], [1.0, 2.0]]).unwrap();
        let p = psd_project(&psd).unwrap();
        assert!(p.sub(&psd).unwrap().frobenius() <= 1e-9);

        // eigenpairs of [[0,1],[1,0]]: (-1, (1,-1)/sqrt2), (1, (1,1)/sqrt2)
        let a = Matrix::from_rows(&[[0.0, 1.0], [1.0, 0.0]]).unwrap();
        let p = psd_project(&a).unwrap();
        for v in p.data() {
            assert!((v - 0.5).abs() < 1e-12);
        }

        let neg = Matrix::identity(3).scale(-1.0);
        assert!(psd_project(&neg).unwrap().max_abs() < 1e-15);
    }

    #[test]
    fn edm_examples() {
        let x = Matrix::from_rows(&[[0.0], [1.0], [2.0]]).unwrap();
        let d = edm_from_realization(&x);
        let expected =
            Matrix::from_rows(&[[0.0, 1.0, 4.0], [1.0, 0.0, 1.0], [4.0, 1.0, 0.0]]).unwrap();
        assert_eq!(d, expected);

        let one = Matrix::from_rows(&[[3.0, 4.0]]).unwrap();
        assert_eq!(edm_from_realization(&one), Matrix::zeros(1, 1));

        let sq = Matrix::from_rows(&[[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]]).unwrap();
        let d = edm_from_realization(&sq);
        for i in 0..4 {
            for j in 0..4 {
                if i != j {
                    assert!(d[(i, j)] == 1.0 || d[(i, j)] == 2.0);
                }
            }
        }
    }

    #[test]
    fn gram_of_collinear_points() {
        let x = Matrix::from_rows(&[[0.0], [1.0], [2.0]]).unwrap();
        let g = gram_from_edm(&edm_from_realization(&x)).unwrap();
        // centered x = (-1, 0, 1), G = x x^T with spectrum (0, 0, 2)
        let e = jacobi_eig(&g).unwrap();
        assert!(e.eigenvalues[0].abs() < 1e-12);
        assert!(e.eigenvalues[1].abs() < 1e-12);
        assert!((e.eigenvalues[2] - 2.0).abs() < 1e-12);
        for i in 0..3 {
            assert!(g.row(i).iter().sum::<f64>().abs() < 1e-12);
        }
        assert_eq!(
            gram_from_edm(&Matrix::zeros(1, 1)).unwrap(),
            Matrix::zeros(1, 1)
        );
    }

    #[test]
    fn gram_rejects_nonzero_diagonal() {
        let d = Matrix::from_rows(&[[1.0, 1.0], [1.0, 0.0]]).unwrap();
        assert!(matches!(
            gram_from_edm(&d),
            Err(Error::BadDiagonal { index: 0, .. })
        ));
    }

    #[test]
    fn realization_from_gram_examples() {
        let y = realization_from_gram(&Matrix::identity(2), Some(2)).unwrap();
        for i in 0..2 {
            assert!((norm2(y.row(i)) - 1.0).abs() < 1e-12);
        }
        assert!((sq_dist(y.row(0), y.row(1)) - 2.0).abs() < 1e-12);

        let v = [1.0, -2.0, 0.5];
        let g = Matrix::from_fn(3, 3, |i, j| v[i] * v[j]);
        let y = realization_from_gram(&g, Some(1)).unwrap();
        let sign = -y[(1, 0)].signum();
        for i in 0..3 {
            assert!((y[(i, 0)] - sign * v[i]).abs() < 1e-12);
        }

        // diag(1, -0.1): the negative direction is dropped
        let g = Matrix::from_diag(&[1.0, -0.1]);
        let y = realization_from_gram(&g, None).unwrap();
        assert_eq!(y.cols(), 1);
        let yy = y.gram();
        assert!(yy.sub(&psd_project(&g).unwrap()).unwrap().frobenius() < 1e-12);

        // K larger than n pads with zeros
        let y = realization_from_gram(&Matrix::identity(2), Some(4)).unwrap();
        assert_eq!((y.rows(), y.cols()), (2, 4));
        assert_eq!(y[(0, 3)], 0.0);
    }

    #[test]
    fn norm_examples() {
        let n = norms(&Matrix::identity(3));
        assert!((n.frobenius - 3f64.sqrt()).abs() < 1e-12);
        assert!((n.spectral - 1.0).abs() < 1e-8);
        assert_eq!(n.max_abs, 1.0);

        let z = norms(&Matrix::zeros(3, 2));
        assert_eq!((z.frobenius, z.spectral, z.max_abs), (0.0, 0.0, 0.0));

        let d = norms(&Matrix::from_diag(&[3.0, 4.0]));
        assert!((d.frobenius - 5.0).abs() < 1e-12);
        assert!((d.spectral - 4.0).abs() < 4e-8);
        assert_eq!(d.max_abs, 4.0);
    }

    #[test]
    fn spectral_norm_matches_eigen_route() {
        let a = random_symmetric(7, 3);
        let by_power = spectral_norm(&a);
        let by_eig = symmetric_spectral_norm(&a).unwrap();
        assert!(
            (by_power - by_eig).abs() <= 1e-8 * by_eig,
            "{by_power} {by_eig}"
        );
    }

    #[test]
    fn csv_rejects_ragged_and_garbage() {
        assert!(parse_matrix_csv("1,2\n3\n").is_err());
        assert!(parse_matrix_csv("1,x\n").is_err());
        assert!(parse_matrix_csv("1,NaN\n").is_err());
        assert!(parse_matrix_csv("").is_err());
        let m = parse_matrix_csv("1, 2.5\n-3,4e-3\n").unwrap();
        assert_eq!(m, Matrix::from_rows(&[[1.0, 2.5], [-3.0, 0.004]]).unwrap());
    }

    fn arb_points() -> impl Strategy<Value = Matrix> {
        (1usize..9, 1usize..4).prop_flat_map(|(n, k)| {
            proptest::collection::vec(-10.0f64..10.0, n * k)
                .prop_map(move |d| Matrix::new(n, k, d).unwrap())
        })
    }

    proptest! {
        #[test]
        fn csv_round_trip_is_exact(m in arb_points()) {
            let text = matrix_to_csv(&m);
            let back = parse_matrix_csv(&text).unwrap();
            prop_assert_eq!(&back, &m);
            prop_assert_eq!(matrix_to_csv(&back), text);
        }

        #[test]
        fn eig_invariants(seed in 0u64..500, n in 1usize..12) {
            let a = random_symmetric(n, seed);
            let e = jacobi_eig(&a).unwrap();
            let resid = a.sub(&e.reconstruct()).unwrap().frobenius();
            prop_assert!(resid <= 1e-8 * a.frobenius().max(1.0));
            prop_assert!(orthonormality_gap(&e.eigenvectors) <= 1e-9);
        }

        #[test]
        fn psd_project_idempotent(seed in 0u64..500, n in 1usize..10) {
            let a = random_symmetric(n, seed);
            let p = psd_project(&a).unwrap();
            prop_assert!(jacobi_eig(&p).unwrap().min_eigenvalue() >= -1e-9);
            let pp = psd_project(&p).unwrap();
            prop_assert!(pp.sub(&p).unwrap().frobenius() <= 1e-8);
        }

        #[test]
        fn double_centering_matches_explicit_centering(x in arb_points()) {
            // Oracle: subtract the centroid, then form x0 x0^T.
            let n = x.rows();
            let k = x.cols();
            let mut c = vec![0.0; k];
            for i in 0..n {
                for j in 0..k {
                    c[j] += x[(i, j)] / n as f64;
                }
            }
            let x0 = Matrix::from_fn(n, k, |i, j| x[(i, j)] - c[j]);
            let oracle = x0.gram();
            let g = gram_from_edm(&edm_from_realization(&x)).unwrap();
            let scale = oracle.max_abs().max(1.0);
            prop_assert!(g.sub(&oracle).unwrap().max_abs() <= 1e-9 * scale);
        }
    }
}
