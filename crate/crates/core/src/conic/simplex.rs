//! Dense two-phase simplex with Bland's rule.

use serde::{Deserialize, Serialize};

use super::Sense;
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LpConstraint {
    pub coeffs: Vec<f64>,
    pub sense: Sense,
    pub rhs: f64,
}

/// Maximize or minimize `c^T x` over linear rows and per-variable bounds.
/// Bounds may be infinite.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LpProblem {
    pub objective: Vec<f64>,
    pub maximize: bool,
    pub constraints: Vec<LpConstraint>,
    pub bounds: Vec<(f64, f64)>,
}

impl LpProblem {
    /// Variables default to `x >= 0`.
    pub fn new(objective: Vec<f64>, maximize: bool) -> Self {
        let n = objective.len();
        Self {
            objective,
            maximize,
            constraints: Vec::new(),
            bounds: vec![(0.0, f64::INFINITY); n],
        }
    }

    pub fn n_vars(&self) -> usize {
        self.objective.len()
    }

    pub fn add(&mut self, coeffs: Vec<f64>, sense: Sense, rhs: f64) {
        self.constraints.push(LpConstraint { coeffs, sense, rhs });
    }

    /// Adds a row given as sparse `(index, coefficient)` pairs.
    pub fn add_sparse(&mut self, terms: &[(usize, f64)], sense: Sense, rhs: f64) {
        let mut coeffs = vec![0.0; self.n_vars()];
        for &(j, a) in terms {
            coeffs[j] += a;
        }
        self.add(coeffs, sense, rhs);
    }

    fn validate(&self) -> Result<()> {
        let n = self.n_vars();
        if self.bounds.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: self.bounds.len(),
            });
        }
        for c in &self.constraints {
            if c.coeffs.len() != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    found: c.coeffs.len(),
                });
            }
            if !c.rhs.is_finite() || c.coeffs.iter().any(|v| !v.is_finite()) {
                return Err(Error::InvalidParameter("non-finite LP data".into()));
            }
        }
        if self.objective.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter("non-finite LP objective".into()));
        }
        for (j, &(lo, hi)) in self.bounds.iter().enumerate() {
            if lo.is_nan()
                || hi.is_nan()
                || lo > hi
                || lo == f64::INFINITY
                || hi == f64::NEG_INFINITY
            {
                return Err(Error::InvalidParameter(format!(
                    "bad bounds on variable {j}"
                )));
            }
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LpSolution {
    pub status: LpStatus,
    pub x: Vec<f64>,
    pub objective: f64,
    pub pivots: usize,
}

const EPS: f64 = 1e-9;

/// How an original variable is expressed through standard-form columns.
struct VarMap {
    offset: f64,
    terms: Vec<(usize, f64)>,
}

struct Tableau {
    /// m rows of `cols + 1` entries, last entry the right-hand side.
    t: Vec<Vec<f64>>,
    basis: Vec<usize>,
    cols: usize,
    pivots: usize,
}

enum Outcome {
    Optimal,
    Unbounded,
}

impl Tableau {
    fn pivot(&mut self, r: usize, c: usize) {
        let p = self.t[r][c];
        for v in self.t[r].iter_mut() {
            *v /= p;
        }
        let prow = self.t[r].clone();
        for (i, row) in self.t.iter_mut().enumerate() {
            if i == r {
                continue;
            }
            let f = row[c];
            if f == 0.0 {
                continue;
            }
            for (v, pv) in row.iter_mut().zip(&prow) {
                *v -= f * pv;
            }
            row[c] = 0.0;
        }
        self.basis[r] = c;
        self.pivots += 1;
    }

    /// Maximizes `cost . x` over columns with `allowed[j]`, Bland's rule.
    fn optimize(&mut self, cost: &[f64], allowed: &[bool]) -> Outcome {
        loop {
            let mut enter = None;
            for j in 0..self.cols {
                if !allowed[j] || self.basis.contains(&j) {
                    continue;
                }
                let reduced = cost[j]
                    - self
                        .t
                        .iter()
                        .zip(&self.basis)
                        .map(|(row, &b)| cost[b] * row[j])
                        .sum::<f64>();
                if reduced > EPS {
                    enter = Some(j);
                    break;
                }
            }
            let Some(c) = enter else {
                return Outcome::Optimal;
            };
            let mut leave: Option<(usize, f64)> = None;
            for (i, row) in self.t.iter().enumerate() {
                if row[c] > EPS {
                    let ratio = row[self.cols] / row[c];
                    leave = match leave {
                        None => Some((i, ratio)),
                        Some((li, lr)) => {
                            if ratio < lr - EPS
                                || ((ratio - lr).abs() <= EPS && self.basis[i] < self.basis[li])
                            {
                                Some((i, ratio))
                            } else {
                                Some((li, lr))
                            }
                        }
                    };
                }
            }
            let Some((r, _)) = leave else {
                return Outcome::Unbounded;
            };
            self.pivot(r, c);
        }
    }
}

pub fn simplex_solve(p: &LpProblem) -> Result<LpSolution> {
    p.validate()?;
    let n = p.n_vars();

    // Substitute bounded/free variables by nonnegative columns.
    let mut maps = Vec::with_capacity(n);
    let mut ncols = 0;
    let mut bound_rows: Vec<(usize, f64)> = Vec::new();
    for &(lo, hi) in &p.bounds {
        if lo.is_finite() {
            maps.push(VarMap {
                offset: lo,
                terms: vec![(ncols, 1.0)],
            });
            if hi.is_finite() {
                bound_rows.push((ncols, hi - lo));
            }
            ncols += 1;
        } else if hi.is_finite() {
            maps.push(VarMap {
                offset: hi,
                terms: vec![(ncols, -1.0)],
            });
            ncols += 1;
        } else {
            maps.push(VarMap {
                offset: 0.0,
                terms: vec![(ncols, 1.0), (ncols + 1, -1.0)],
            });
            ncols += 2;
        }
    }
    let structural = ncols;

    // Rows over the structural columns, right-hand side made nonnegative.
    let mut rows: Vec<(Vec<f64>, Sense, f64)> = Vec::new();
    for c in &p.constraints {
        let mut a = vec![0.0; structural];
        let mut rhs = c.rhs;
        for (j, &coef) in c.coeffs.iter().enumerate() {
            if coef == 0.0 {
                continue;
            }
            rhs -= coef * maps[j].offset;
            for &(col, s) in &maps[j].terms {
                a[col] += coef * s;
            }
        }
        rows.push((a, c.sense, rhs));
    }
    for &(col, ub) in &bound_rows {
        let mut a = vec![0.0; structural];
        a[col] = 1.0;
        rows.push((a, Sense::Le, ub));
    }
    for row in &mut rows {
        if row.2 < 0.0 {
            row.0.iter_mut().for_each(|v| *v = -*v);
            row.2 = -row.2;
            row.1 = match row.1 {
                Sense::Le => Sense::Ge,
                Sense::Ge => Sense::Le,
                Sense::Eq => Sense::Eq,
            };
        }
    }

    let m = rows.len();
    let n_slack = rows.iter().filter(|r| r.1 != Sense::Eq).count();
    let n_art = rows.iter().filter(|r| r.1 != Sense::Le).count();
    let cols = structural + n_slack + n_art;
    let mut t = vec![vec![0.0; cols + 1]; m];
    let mut basis = vec![0; m];
    let mut is_art = vec![false; cols];
    let (mut s, mut a) = (structural, structural + n_slack);
    for (i, (coeffs, sense, rhs)) in rows.into_iter().enumerate() {
        t[i][..structural].copy_from_slice(&coeffs);
        t[i][cols] = rhs;
        match sense {
            Sense::Le => {
                t[i][s] = 1.0;
                basis[i] = s;
                s += 1;
            }
            Sense::Ge => {
                t[i][s] = -1.0;
                s += 1;
                t[i][a] = 1.0;
                basis[i] = a;
                is_art[a] = true;
                a += 1;
            }
            Sense::Eq => {
                t[i][a] = 1.0;
                basis[i] = a;
                is_art[a] = true;
                a += 1;
            }
        }
    }
    let mut tab = Tableau {
        t,
        basis,
        cols,
        pivots: 0,
    };

    let scale = 1.0 + tab.t.iter().map(|r| r[cols].abs()).fold(0.0, f64::max);
    if n_art > 0 {
        let cost1: Vec<f64> = (0..cols)
            .map(|j| if is_art[j] { -1.0 } else { 0.0 })
            .collect();
        let all = vec![true; cols];
        tab.optimize(&cost1, &all);
        let infeas: f64 = tab
            .t
            .iter()
            .zip(&tab.basis)
            .filter(|(_, &b)| is_art[b])
            .map(|(r, _)| r[cols])
            .sum();
        if infeas > 1e-7 * scale {
            return Ok(LpSolution {
                status: LpStatus::Infeasible,
                x: vec![],
                objective: f64::NAN,
                pivots: tab.pivots,
            });
        }
        // Drive zero-level artificials out; drop rows that are redundant.
        let mut i = 0;
        while i < tab.t.len() {
            if is_art[tab.basis[i]] {
                let col = (0..cols).find(|&j| !is_art[j] && tab.t[i][j].abs() > EPS);
                match col {
                    Some(j) => tab.pivot(i, j),
                    None => {
                        tab.t.remove(i);
                        tab.basis.remove(i);
                        continue;
                    }
                }
            }
            i += 1;
        }
    }

    let sign = if p.maximize { 1.0 } else { -1.0 };
    let mut cost2 = vec![0.0; cols];
    for (j, map) in maps.iter().enumerate() {
        for &(col, s) in &map.terms {
            cost2[col] += sign * p.objective[j] * s;
        }
    }
    let allowed: Vec<bool> = is_art.iter().map(|a| !a).collect();
    let outcome = tab.optimize(&cost2, &allowed);

    let mut col_val = vec![0.0; cols];
    for (row, &b) in tab.t.iter().zip(&tab.basis) {
        col_val[b] = row[cols];
    }
    let x: Vec<f64> = maps
        .iter()
        .map(|m| m.offset + m.terms.iter().map(|&(c, s)| s * col_val[c]).sum::<f64>())
        .collect();
    let objective = crate::linalg::dot(&p.objective, &x);
    Ok(match outcome {
        Outcome::Optimal => LpSolution {
            status: LpStatus::Optimal,
            x,
            objective,
            pivots: tab.pivots,
        },
        Outcome::Unbounded => LpSolution {
            status: LpStatus::Unbounded,
            x,
            objective: if p.maximize {
                f64::INFINITY
            } else {
                f64::NEG_INFINITY
            },
            pivots: tab.pivots,
        },
    })
}
