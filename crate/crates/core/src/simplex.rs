//! Dense two-phase simplex for `min c.x  s.t.  A x = b, x >= 0`.
//!
//! Entering columns are priced by most negative reduced cost. During a run of
//! degenerate pivots the solver falls back to Bland's rule (lowest-index
//! entering column, ratio ties to the lowest basic index), which rules out
//! cycling. Phase 1 adds one
//! artificial variable per row; rows whose artificial cannot be pivoted out
//! are linearly dependent and get dropped before phase 2.

use crate::error::{Error, Result};

/// Consecutive degenerate pivots before switching to Bland's rule.
const BLAND_AFTER: usize = 20;
/// Relative width of the near-minimal ratio window.
const RATIO_SLACK: f64 = 1e-9;
/// Rows whose artificial cannot be replaced by a pivot larger than this are
/// treated as linearly dependent.
const DEPENDENCY_TOL: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq)]
pub struct LpProblem {
    pub objective: Vec<f64>,
    /// Row-major equality constraints, each of length `objective.len()`.
    pub constraints: Vec<Vec<f64>>,
    pub rhs: Vec<f64>,
}

impl LpProblem {
    pub fn new(objective: Vec<f64>) -> Self {
        LpProblem {
            objective,
            constraints: Vec::new(),
            rhs: Vec::new(),
        }
    }

    pub fn add_equality(&mut self, row: Vec<f64>, rhs: f64) {
        self.constraints.push(row);
        self.rhs.push(rhs);
    }

    pub fn num_vars(&self) -> usize {
        self.objective.len()
    }

    pub fn num_rows(&self) -> usize {
        self.constraints.len()
    }

    fn check(&self) -> Result<()> {
        let n = self.num_vars();
        if n == 0 {
            return Err(Error::MalformedProblem("no variables".into()));
        }
        if self.rhs.len() != self.constraints.len() {
            return Err(Error::MalformedProblem("rhs length differs from row count".into()));
        }
        if let Some(i) = self.constraints.iter().position(|r| r.len() != n) {
            return Err(Error::MalformedProblem(format!("row {i} has wrong length")));
        }
        let finite = self
            .objective
            .iter()
            .chain(self.rhs.iter())
            .chain(self.constraints.iter().flatten());
        if !finite.into_iter().all(|v| v.is_finite()) {
            return Err(Error::MalformedProblem("non-finite entry".into()));
        }
        Ok(())
    }

    /// Largest `|A x - b|` over all rows.
    pub fn residual(&self, x: &[f64]) -> f64 {
        self.constraints
            .iter()
            .zip(&self.rhs)
            .map(|(row, b)| (row.iter().zip(x).map(|(a, v)| a * v).sum::<f64>() - b).abs())
            .fold(0.0, f64::max)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimplexOptions {
    pub pivot_tol: f64,
    /// Phase-1 optimum above this declares the problem infeasible.
    pub feasibility_tol: f64,
    /// Defaults to `10 * (rows + cols)` when `None`.
    pub max_iterations: Option<usize>,
}

impl Default for SimplexOptions {
    fn default() -> Self {
        SimplexOptions {
            pivot_tol: 1e-10,
            feasibility_tol: 1e-9,
            max_iterations: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum LpSolution {
    Optimal {
        x: Vec<f64>,
        objective: f64,
        iterations: usize,
    },
    Infeasible {
        infeasibility: f64,
        iterations: usize,
    },
}

impl LpSolution {
    pub fn iterations(&self) -> usize {
        match self {
            LpSolution::Optimal { iterations, .. } | LpSolution::Infeasible { iterations, .. } => *iterations,
        }
    }
}

struct Tableau {
    /// `rows x (cols + 1)`; the last column is the right-hand side.
    a: Vec<Vec<f64>>,
    basis: Vec<usize>,
    cols: usize,
    iterations: usize,
    cap: usize,
    pivot_tol: f64,
}

impl Tableau {
    fn rhs(&self, row: usize) -> f64 {
        self.a[row][self.cols]
    }

    fn pivot(&mut self, row: usize, col: usize, reduced: &mut [f64]) {
        let inv = 1.0 / self.a[row][col];
        for v in self.a[row].iter_mut() {
            *v *= inv;
        }
        self.a[row][col] = 1.0;
        let pivot_row = self.a[row].clone();
        for (i, r) in self.a.iter_mut().enumerate() {
            if i == row {
                continue;
            }
            let factor = r[col];
            if factor != 0.0 {
                for (v, p) in r.iter_mut().zip(&pivot_row) {
                    *v -= factor * p;
                }
                r[col] = 0.0;
            }
        }
        let factor = reduced[col];
        if factor != 0.0 {
            for (v, p) in reduced.iter_mut().zip(&pivot_row) {
                *v -= factor * p;
            }
            reduced[col] = 0.0;
        }
        self.basis[row] = col;
    }

    /// Reduced costs for `cost` given the current basis, with the negated
    /// objective value in the last slot.
    fn reduced_costs(&self, cost: &[f64]) -> Vec<f64> {
        let mut d: Vec<f64> = cost.iter().copied().chain(std::iter::once(0.0)).collect();
        for (row, &b) in self.a.iter().zip(&self.basis) {
            let cb = cost[b];
            if cb != 0.0 {
                for (v, a) in d.iter_mut().zip(row) {
                    *v -= cb * a;
                }
            }
        }
        d
    }

    /// Runs simplex iterations; only columns `< enter_limit` may enter.
    ///
    /// Pricing is Dantzig's (most negative reduced cost) until
    /// [`BLAND_AFTER`] consecutive degenerate pivots, then Bland's rule until
    /// the objective moves again.
    fn optimize(&mut self, cost: &[f64], enter_limit: usize) -> Result<Vec<f64>> {
        let mut d = self.reduced_costs(cost);
        let mut degenerate_run = 0;
        loop {
            let bland = degenerate_run >= BLAND_AFTER;
            let candidates = (0..enter_limit).filter(|&j| d[j] < -self.pivot_tol);
            let entering = if bland {
                candidates.min()
            } else {
                candidates.min_by(|&x, &y| d[x].total_cmp(&d[y]))
            };
            let Some(col) = entering else {
                return Ok(d);
            };
            let Some((row, step)) = self.ratio_test(col, bland) else {
                return Err(Error::Unbounded);
            };
            if self.iterations >= self.cap {
                return Err(Error::Numerical(format!("simplex iteration cap {} exceeded", self.cap)));
            }
            self.iterations += 1;
            if step <= self.pivot_tol {
                degenerate_run += 1;
            } else {
                degenerate_run = 0;
            }
            self.pivot(row, col, &mut d);
        }
    }

    /// Two-pass ratio test for entering column `col`: find the minimum ratio,
    /// then among rows within [`RATIO_SLACK`] of it take the lowest basic
    /// index under Bland's rule, otherwise the largest pivot element.
    fn ratio_test(&self, col: usize, bland: bool) -> Option<(usize, f64)> {
        let ratios: Vec<(usize, f64, f64)> = (0..self.a.len())
            .filter_map(|i| {
                let aij = self.a[i][col];
                (aij > self.pivot_tol).then(|| (i, self.rhs(i).max(0.0) / aij, aij))
            })
            .collect();
        let min = ratios.iter().map(|r| r.1).fold(f64::INFINITY, f64::min);
        let window = ratios.into_iter().filter(|r| r.1 <= min + RATIO_SLACK * (1.0 + min));
        let chosen = if bland {
            window.min_by_key(|r| self.basis[r.0])
        } else {
            window.max_by(|x, y| x.2.total_cmp(&y.2))
        };
        chosen.map(|(i, ratio, _)| (i, ratio))
    }
}

pub fn simplex_solve(problem: &LpProblem) -> Result<LpSolution> {
    simplex_solve_with(problem, &SimplexOptions::default())
}

pub fn simplex_solve_with(problem: &LpProblem, opts: &SimplexOptions) -> Result<LpSolution> {
    problem.check()?;
    let n = problem.num_vars();
    let m = problem.num_rows();
    let cols = n + m;

    let mut a = Vec::with_capacity(m);
    for (i, (row, &b)) in problem.constraints.iter().zip(&problem.rhs).enumerate() {
        let sign = if b < 0.0 { -1.0 } else { 1.0 };
        let mut r = vec![0.0; cols + 1];
        for (dst, &src) in r.iter_mut().zip(row) {
            *dst = sign * src;
        }
        r[n + i] = 1.0;
        r[cols] = sign * b;
        a.push(r);
    }
    let mut tab = Tableau {
        a,
        basis: (n..n + m).collect(),
        cols,
        iterations: 0,
        cap: opts.max_iterations.unwrap_or(10 * (m + n)),
        pivot_tol: opts.pivot_tol,
    };

    // phase 1: minimise the sum of artificials
    let phase1_cost: Vec<f64> = (0..cols).map(|j| if j < n { 0.0 } else { 1.0 }).collect();
    let d = tab.optimize(&phase1_cost, cols)?;
    let infeasibility = -d[cols];
    if infeasibility > opts.feasibility_tol {
        return Ok(LpSolution::Infeasible {
            infeasibility,
            iterations: tab.iterations,
        });
    }

    // drive remaining artificials out of the basis; drop dependent rows
    let mut scratch = vec![0.0; cols + 1];
    let mut row = 0;
    while row < tab.a.len() {
        if tab.basis[row] < n {
            row += 1;
            continue;
        }
        let replacement = (0..n)
            .filter(|j| !tab.basis.contains(j))
            .max_by(|&x, &y| tab.a[row][x].abs().total_cmp(&tab.a[row][y].abs()))
            .filter(|&j| tab.a[row][j].abs() > DEPENDENCY_TOL.max(opts.pivot_tol));
        match replacement {
            Some(col) => {
                tab.pivot(row, col, &mut scratch);
                row += 1;
            }
            None => {
                tab.a.swap_remove(row);
                tab.basis.swap_remove(row);
            }
        }
    }

    // phase 2: artificials may not re-enter
    let mut cost = problem.objective.clone();
    cost.resize(cols, 0.0);
    let d = tab.optimize(&cost, n)?;

    let mut x = vec![0.0; n];
    for (i, &b) in tab.basis.iter().enumerate() {
        if b < n {
            x[b] = tab.rhs(i).max(0.0);
        }
    }
    Ok(LpSolution::Optimal {
        x,
        objective: -d[cols],
        iterations: tab.iterations,
    })
}
