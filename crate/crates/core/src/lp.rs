//! Dense two-phase simplex for small linear programs in standard form.

use crate::error::{Error, Result};

const TOL: f64 = 1e-9;

/// An optimal vertex of `min c^T x` subject to `A x = b`, `x >= 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct LpSolution {
    pub x: Vec<f64>,
    pub objective: f64,
    pub pivots: usize,
}

struct Tableau {
    /// Constraint rows, each of length `cols + 1` with the right-hand side last.
    rows: Vec<Vec<f64>>,
    basis: Vec<usize>,
    cols: usize,
    pivots: usize,
}

impl Tableau {
    fn pivot(&mut self, r: usize, c: usize) {
        let p = self.rows[r][c];
        self.rows[r].iter_mut().for_each(|v| *v /= p);
        let pivot_row = self.rows[r].clone();
        for (i, row) in self.rows.iter_mut().enumerate() {
            if i != r && row[c] != 0.0 {
                let k = row[c];
                row.iter_mut().zip(&pivot_row).for_each(|(v, p)| *v -= k * p);
                row[c] = 0.0;
            }
        }
        self.basis[r] = c;
        self.pivots += 1;
    }

    /// Runs Bland's rule on the costs over columns `allowed`. Returns `false` if unbounded.
    fn optimize(&mut self, cost: &[f64], allowed: usize) -> bool {
        loop {
            let reduced = |j: usize| -> f64 {
                cost[j] - self.rows.iter().zip(&self.basis).map(|(row, &b)| cost[b] * row[j]).sum::<f64>()
            };
            let Some(enter) = (0..allowed).find(|&j| !self.basis.contains(&j) && reduced(j) < -TOL) else {
                return true;
            };
            let leave = self
                .rows
                .iter()
                .enumerate()
                .filter(|(_, row)| row[enter] > TOL)
                .map(|(i, row)| (row[self.cols] / row[enter], self.basis[i], i))
                .min_by(|a, b| a.0.partial_cmp(&b.0).unwrap().then(a.1.cmp(&b.1)));
            match leave {
                Some((_, _, r)) => self.pivot(r, enter),
                None => return false,
            }
        }
    }
}

/// Solves `min c^T x` subject to `A x = b`, `x >= 0` with Bland's anti-cycling rule.
///
/// Redundant equality rows are detected after phase one and dropped.
pub fn solve_standard_form(c: &[f64], a: &[Vec<f64>], b: &[f64]) -> Result<LpSolution> {
    let n = c.len();
    let m = a.len();
    if b.len() != m || a.iter().any(|row| row.len() != n) {
        return Err(Error::LpFailure("constraint dimensions do not match".into()));
    }
    let cols = n + m;
    let rows = a
        .iter()
        .zip(b)
        .enumerate()
        .map(|(i, (row, &rhs))| {
            let sign = if rhs < 0.0 { -1.0 } else { 1.0 };
            let mut t: Vec<f64> = row.iter().map(|v| sign * v).collect();
            t.extend((0..m).map(|k| if k == i { 1.0 } else { 0.0 }));
            t.push(sign * rhs);
            t
        })
        .collect();
    let mut tab = Tableau { rows, basis: (n..cols).collect(), cols, pivots: 0 };

    let phase1: Vec<f64> = (0..cols).map(|j| if j >= n { 1.0 } else { 0.0 }).collect();
    tab.optimize(&phase1, cols);
    let infeasibility: f64 = tab.rows.iter().zip(&tab.basis).filter(|(_, &bv)| bv >= n).map(|(r, _)| r[cols]).sum();
    if infeasibility > TOL * (1.0 + b.iter().map(|v| v.abs()).sum::<f64>()) {
        return Err(Error::LpFailure(format!("infeasible (phase-one residual {infeasibility:e})")));
    }
    let mut r = 0;
    while r < tab.rows.len() {
        if tab.basis[r] >= n {
            match (0..n).find(|&j| tab.rows[r][j].abs() > TOL) {
                Some(j) => tab.pivot(r, j),
                None => {
                    tab.rows.remove(r);
                    tab.basis.remove(r);
                    continue;
                }
            }
        }
        r += 1;
    }

    let mut phase2 = c.to_vec();
    phase2.resize(cols, 0.0);
    if !tab.optimize(&phase2, n) {
        return Err(Error::LpFailure("objective is unbounded below".into()));
    }
    let mut x = vec![0.0; n];
    for (row, &bv) in tab.rows.iter().zip(&tab.basis) {
        x[bv] = row[cols].max(0.0);
    }
    let objective = c.iter().zip(&x).map(|(ci, xi)| ci * xi).sum();
    Ok(LpSolution { x, objective, pivots: tab.pivots })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_program() {
        // min -x - y, x + y + s = 1, x - y = 0
        let sol = solve_standard_form(&[-1.0, -1.0, 0.0], &[vec![1.0, 1.0, 1.0], vec![1.0, -1.0, 0.0]], &[1.0, 0.0]).unwrap();
        assert!((sol.objective + 1.0).abs() < 1e-12);
        assert!((sol.x[0] - 0.5).abs() < 1e-12 && (sol.x[1] - 0.5).abs() < 1e-12);
    }

    #[test]
    fn redundant_rows_are_dropped() {
        let a = vec![vec![1.0, 1.0], vec![2.0, 2.0]];
        let sol = solve_standard_form(&[1.0, 2.0], &a, &[1.0, 2.0]).unwrap();
        assert!((sol.objective - 1.0).abs() < 1e-12);
    }

    #[test]
    fn infeasible_and_unbounded() {
        assert!(matches!(solve_standard_form(&[0.0], &[vec![1.0]], &[-1.0]), Err(Error::LpFailure(_))));
        let a = vec![vec![1.0, -1.0]];
        assert!(matches!(solve_standard_form(&[-1.0, 0.0], &a, &[0.0]), Err(Error::LpFailure(_))));
    }

    #[test]
    fn negative_rhs_rows_are_flipped() {
        let sol = solve_standard_form(&[1.0, 0.0], &[vec![-1.0, -1.0]], &[-2.0]).unwrap();
        assert!(sol.objective.abs() < 1e-12);
        assert!((sol.x[1] - 2.0).abs() < 1e-12);
    }
}
