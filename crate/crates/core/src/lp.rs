//! Dense two-phase simplex for the small linear programs in this crate
//! (tens of variables). Returns both the primal solution and the dual
//! multipliers of the constraints so callers can build certificates.

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Relation {
    Eq,
    Le,
    Ge,
}

/// A linear program: minimize c.x subject to rows (a, rel, b) and x >= 0.
#[derive(Debug, Clone)]
pub struct Problem {
    pub n_vars: usize,
    pub objective: Vec<f64>,
    rows: Vec<(Vec<f64>, Relation, f64)>,
}

#[derive(Debug, Clone)]
pub struct Solution {
    /// Optimal values of the original variables.
    pub x: Vec<f64>,
    /// Dual multiplier per constraint row, in the sign convention of
    /// "min c.x s.t. Ax = b": the dual maximizes b.y with A^T y <= c.
    pub y: Vec<f64>,
    pub value: f64,
    /// |primal - dual| objective gap.
    pub gap: f64,
}

const PIVOT_EPS: f64 = 1e-11;
const FEAS_EPS: f64 = 1e-8;
const MAX_ITERS: usize = 50_000;

impl Problem {
    pub fn minimize(objective: Vec<f64>) -> Self {
        Problem { n_vars: objective.len(), objective, rows: Vec::new() }
    }

    pub fn constrain(&mut self, coeffs: Vec<f64>, rel: Relation, rhs: f64) {
        assert_eq!(coeffs.len(), self.n_vars);
        self.rows.push((coeffs, rel, rhs));
    }

    /// Solves the program. Errors with `LpInfeasible` when phase 1 cannot
    /// reach feasibility and `NumericalFailure` on iteration blow-up or an
    /// unbounded objective.
    pub fn solve(&self) -> Result<Solution> {
        let m = self.rows.len();
        let n_slack = self.rows.iter().filter(|(_, r, _)| *r != Relation::Eq).count();
        let n = self.n_vars + n_slack;

        // Standard form: A x = b with b >= 0, slack columns for inequalities.
        let mut a = vec![vec![0.0; n]; m];
        let mut b = vec![0.0; m];
        let mut flipped = vec![false; m];
        let mut slack_col = self.n_vars;
        for (i, (coeffs, rel, rhs)) in self.rows.iter().enumerate() {
            a[i][..self.n_vars].copy_from_slice(coeffs);
            b[i] = *rhs;
            match rel {
                Relation::Eq => {}
                Relation::Le => {
                    a[i][slack_col] = 1.0;
                    slack_col += 1;
                }
                Relation::Ge => {
                    a[i][slack_col] = -1.0;
                    slack_col += 1;
                }
            }
            if b[i] < 0.0 {
                flipped[i] = true;
                b[i] = -b[i];
                for v in a[i].iter_mut() {
                    *v = -*v;
                }
            }
        }

        // Tableau with one artificial per row; artificials form the initial basis.
        let total = n + m;
        let mut t = vec![vec![0.0; total + 1]; m];
        for i in 0..m {
            t[i][..n].copy_from_slice(&a[i]);
            t[i][n + i] = 1.0;
            t[i][total] = b[i];
        }
        let mut basis: Vec<usize> = (n..total).collect();

        // Phase 1: minimize the sum of artificials.
        let phase1_cost: Vec<f64> = (0..total).map(|j| if j >= n { 1.0 } else { 0.0 }).collect();
        run_simplex(&mut t, &mut basis, &phase1_cost, total)?;
        let phase1_val: f64 = basis
            .iter()
            .enumerate()
            .filter(|(_, &j)| j >= n)
            .map(|(i, _)| t[i][total])
            .sum();
        if phase1_val > FEAS_EPS {
            return Err(Error::LpInfeasible(phase1_val));
        }
        // Drive any artificial still basic (at zero) out of the basis.
        for i in 0..m {
            if basis[i] >= n {
                if let Some(j) = (0..n).find(|&j| t[i][j].abs() > PIVOT_EPS) {
                    pivot(&mut t, &mut basis, i, j, total);
                }
                // A fully zero row is redundant; the artificial stays at zero.
            }
        }

        // Phase 2 on the original objective, artificial columns frozen.
        let mut phase2_cost = vec![0.0; total];
        phase2_cost[..self.n_vars].copy_from_slice(&self.objective);
        for row in t.iter_mut() {
            for j in n..total {
                row[j] = 0.0;
            }
        }
        for (i, bj) in basis.iter().enumerate() {
            if *bj >= n {
                // Redundant row: keep its artificial as a formal basis member.
                t[i][*bj] = 1.0;
            }
        }
        run_simplex(&mut t, &mut basis, &phase2_cost, total)?;

        let mut x = vec![0.0; n];
        for (i, &j) in basis.iter().enumerate() {
            if j < n {
                x[j] = t[i][total];
            }
        }
        let value: f64 = x[..self.n_vars]
            .iter()
            .zip(&self.objective)
            .map(|(xi, ci)| xi * ci)
            .sum();

        let y = self.dual_from_basis(&a, &basis, n)?;
        let mut y_out = vec![0.0; m];
        for i in 0..m {
            y_out[i] = if flipped[i] { -y[i] } else { y[i] };
        }
        let dual_value: f64 = self
            .rows
            .iter()
            .zip(&y_out)
            .map(|((_, _, rhs), yi)| rhs * yi)
            .sum();
        Ok(Solution {
            x: x[..self.n_vars].to_vec(),
            y: y_out,
            value,
            gap: (value - dual_value).abs(),
        })
    }

    /// Solves B^T y = c_B for the basis columns of the standard-form matrix.
    /// Redundant rows carry an artificial basis member, treated as a zero-cost
    /// unit column.
    fn dual_from_basis(&self, a: &[Vec<f64>], basis: &[usize], n: usize) -> Result<Vec<f64>> {
        let m = a.len();
        let mut mat = vec![vec![0.0; m]; m];
        let mut rhs = vec![0.0; m];
        for (k, &j) in basis.iter().enumerate() {
            // Column j of A becomes row k of B^T.
            if j < n {
                for i in 0..m {
                    mat[k][i] = a[i][j];
                }
                rhs[k] = if j < self.n_vars { self.objective[j] } else { 0.0 };
            } else {
                mat[k][j - n] = 1.0;
                rhs[k] = 0.0;
            }
        }
        gauss_solve(mat, rhs)
            .ok_or_else(|| Error::NumericalFailure("singular basis in dual extraction".into()))
    }
}

fn run_simplex(
    t: &mut [Vec<f64>],
    basis: &mut [usize],
    cost: &[f64],
    total: usize,
) -> Result<()> {
    let m = t.len();
    for _ in 0..MAX_ITERS {
        // Reduced costs via the current basis: r_j = c_j - sum_i c_{B(i)} t[i][j].
        let mut entering = None;
        for j in 0..total {
            if basis.contains(&j) {
                continue;
            }
            let mut r = cost[j];
            for i in 0..m {
                r -= cost[basis[i]] * t[i][j];
            }
            if r < -1e-9 {
                entering = Some(j); // Bland: first improving index.
                break;
            }
        }
        let Some(j) = entering else { return Ok(()) };
        let mut leaving: Option<usize> = None;
        let mut best = f64::INFINITY;
        for i in 0..m {
            if t[i][j] > PIVOT_EPS {
                let ratio = t[i][total] / t[i][j];
                // Bland tie-break: smallest basis index.
                if ratio < best - 1e-12
                    || (ratio < best + 1e-12
                        && leaving.map_or(true, |l| basis[i] < basis[l]))
                {
                    best = ratio;
                    leaving = Some(i);
                }
            }
        }
        let Some(i) = leaving else {
            return Err(Error::NumericalFailure("objective unbounded below".into()));
        };
        pivot(t, basis, i, j, total);
    }
    Err(Error::NumericalFailure(format!("simplex exceeded {MAX_ITERS} pivots")))
}

fn pivot(t: &mut [Vec<f64>], basis: &mut [usize], row: usize, col: usize, total: usize) {
    let p = t[row][col];
    for v in t[row].iter_mut() {
        *v /= p;
    }
    for i in 0..t.len() {
        if i != row && t[i][col].abs() > 0.0 {
            let f = t[i][col];
            for j in 0..=total {
                t[i][j] -= f * t[row][j];
            }
        }
    }
    basis[row] = col;
}

/// Gaussian elimination with partial pivoting; None if singular.
fn gauss_solve(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Option<Vec<f64>> {
    let n = b.len();
    for col in 0..n {
        let piv = (col..n).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))?;
        if a[piv][col].abs() < 1e-12 {
            return None;
        }
        a.swap(col, piv);
        b.swap(col, piv);
        for i in col + 1..n {
            let f = a[i][col] / a[col][col];
            if f != 0.0 {
                for j in col..n {
                    a[i][j] -= f * a[col][j];
                }
                b[i] -= f * b[col];
            }
        }
    }
    let mut x = vec![0.0; n];
    for i in (0..n).rev() {
        let mut v = b[i];
        for j in i + 1..n {
            v -= a[i][j] * x[j];
        }
        x[i] = v / a[i][i];
    }
    Some(x)
}
