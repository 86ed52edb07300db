//! Bounded-variable primal simplex on a dense tableau.
//!
//! Problems have the form `min c.x  s.t.  A x = b,  lo <= x <= hi` where
//! bounds may be infinite. Phase one drives one artificial variable per row
//! to zero; phase two optimizes the real objective. Nonbasic variables sit
//! at one of their bounds (or at zero when free). Pricing is Dantzig's rule,
//! falling back to Bland's rule permanently once a run of degenerate pivots
//! is observed.

use super::OptimError;

const FEASIBILITY_TOL: f64 = 1e-9;
const PIVOT_TOL: f64 = 1e-11;
const REDUCED_COST_TOL: f64 = 1e-11;
const DEGENERATE_STEP: f64 = 1e-12;
const DEGENERATE_RUN_BEFORE_BLAND: usize = 50;

/// `min c.x` subject to equality constraints and variable bounds.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearProgram {
    objective: Vec<f64>,
    constraints: Vec<Vec<f64>>,
    rhs: Vec<f64>,
    lower: Vec<f64>,
    upper: Vec<f64>,
}

impl LinearProgram {
    pub fn new(
        objective: Vec<f64>,
        constraints: Vec<Vec<f64>>,
        rhs: Vec<f64>,
        lower: Vec<f64>,
        upper: Vec<f64>,
    ) -> Result<Self, OptimError> {
        let n = objective.len();
        if n == 0 {
            return Err(OptimError::Malformed("no variables".into()));
        }
        if constraints.len() != rhs.len() {
            return Err(OptimError::Malformed(format!(
                "{} constraint rows but {} right-hand sides",
                constraints.len(),
                rhs.len()
            )));
        }
        if let Some(row) = constraints.iter().position(|r| r.len() != n) {
            return Err(OptimError::Malformed(format!(
                "constraint row {row} has the wrong length"
            )));
        }
        if lower.len() != n || upper.len() != n {
            return Err(OptimError::Malformed("bounds length differs from objective".into()));
        }
        for j in 0..n {
            if lower[j].is_nan() || upper[j].is_nan() || lower[j] > upper[j] {
                return Err(OptimError::Malformed(format!(
                    "variable {j} has bounds [{}, {}]",
                    lower[j], upper[j]
                )));
            }
            if lower[j] == f64::INFINITY || upper[j] == f64::NEG_INFINITY {
                return Err(OptimError::Malformed(format!("variable {j} has an empty domain")));
            }
        }
        let finite = objective
            .iter()
            .chain(rhs.iter())
            .chain(constraints.iter().flatten())
            .all(|v| v.is_finite());
        if !finite {
            return Err(OptimError::Malformed("non-finite coefficient".into()));
        }
        Ok(Self {
            objective,
            constraints,
            rhs,
            lower,
            upper,
        })
    }

    pub fn n_vars(&self) -> usize {
        self.objective.len()
    }

    pub fn n_constraints(&self) -> usize {
        self.constraints.len()
    }

    pub fn objective(&self) -> &[f64] {
        &self.objective
    }

    pub fn constraints(&self) -> &[Vec<f64>] {
        &self.constraints
    }

    pub fn rhs(&self) -> &[f64] {
        &self.rhs
    }

    pub fn lower(&self) -> &[f64] {
        &self.lower
    }

    pub fn upper(&self) -> &[f64] {
        &self.upper
    }

    pub fn evaluate(&self, x: &[f64]) -> f64 {
        dot(&self.objective, x)
    }

    /// Largest violation of any constraint or bound at `x`.
    pub fn max_violation(&self, x: &[f64]) -> f64 {
        let rows = self
            .constraints
            .iter()
            .zip(&self.rhs)
            .map(|(row, b)| (dot(row, x) - b).abs());
        let bounds = x
            .iter()
            .zip(self.lower.iter().zip(&self.upper))
            .map(|(&v, (&lo, &hi))| (lo - v).max(v - hi).max(0.0));
        rows.chain(bounds).fold(0.0, f64::max)
    }
}

/// Optimal basic solution.
#[derive(Debug, Clone, PartialEq)]
pub struct LpSolution {
    pub value: f64,
    pub x: Vec<f64>,
    /// Structural variables that are basic at the optimum. Rows whose basic
    /// variable is a leftover zero-valued artificial are not listed.
    pub basis: Vec<usize>,
    pub iterations: usize,
}

impl LpSolution {
    /// Whether every nonbasic structural variable sits at a finite bound
    /// (or at zero when free), within `tol`.
    pub fn nonbasic_at_bounds(&self, lp: &LinearProgram, tol: f64) -> bool {
        (0..lp.n_vars())
            .filter(|j| !self.basis.contains(j))
            .all(|j| {
                let (lo, hi, v) = (lp.lower[j], lp.upper[j], self.x[j]);
                (lo.is_finite() && (v - lo).abs() <= tol)
                    || (hi.is_finite() && (v - hi).abs() <= tol)
                    || (lo.is_infinite() && hi.is_infinite() && v.abs() <= tol)
            })
    }
}

/// Solves `lp` to optimality. Deterministic for a given input.
pub fn solve_lp(lp: &LinearProgram) -> Result<LpSolution, OptimError> {
    let mut tableau = Tableau::new(lp);
    let n = lp.n_vars();
    let m = lp.n_constraints();

    let phase_one: Vec<f64> = (0..n + m).map(|j| if j < n { 0.0 } else { 1.0 }).collect();
    tableau.optimize(&phase_one)?;
    let residual: f64 = tableau.x[n..].iter().sum();
    let scale = 1.0 + lp.rhs.iter().fold(0.0f64, |a, b| a.max(b.abs()));
    if residual > FEASIBILITY_TOL * scale {
        return Err(OptimError::Infeasible { residual });
    }
    tableau.retire_artificials();

    let mut phase_two = lp.objective.clone();
    phase_two.resize(n + m, 0.0);
    tableau.optimize(&phase_two)?;

    let x = tableau.x[..n].to_vec();
    let basis = tableau.basis.iter().copied().filter(|&j| j < n).collect();
    Ok(LpSolution {
        value: lp.evaluate(&x),
        x,
        basis,
        iterations: tableau.iterations,
    })
}

struct Tableau {
    n_structural: usize,
    /// Original columns `[A | D]`, row-major.
    columns: Vec<Vec<f64>>,
    rhs: Vec<f64>,
    art_sign: Vec<f64>,
    /// `B^{-1} [A | D]`, row-major.
    body: Vec<Vec<f64>>,
    basis: Vec<usize>,
    is_basic: Vec<bool>,
    x: Vec<f64>,
    lower: Vec<f64>,
    upper: Vec<f64>,
    iterations: usize,
    bland: bool,
}

impl Tableau {
    fn new(lp: &LinearProgram) -> Self {
        let n = lp.n_vars();
        let m = lp.n_constraints();
        let mut x = vec![0.0; n + m];
        for j in 0..n {
            x[j] = if lp.lower[j].is_finite() {
                lp.lower[j]
            } else if lp.upper[j].is_finite() {
                lp.upper[j]
            } else {
                0.0
            };
        }
        let mut art_sign = vec![1.0; m];
        let mut columns = vec![vec![0.0; n + m]; m];
        for i in 0..m {
            let residual = lp.rhs[i] - dot(&lp.constraints[i], &x[..n]);
            art_sign[i] = if residual >= 0.0 { 1.0 } else { -1.0 };
            columns[i][..n].copy_from_slice(&lp.constraints[i]);
            columns[i][n + i] = art_sign[i];
            x[n + i] = residual.abs();
        }
        let body = columns
            .iter()
            .zip(&art_sign)
            .map(|(row, s)| row.iter().map(|v| v * s).collect())
            .collect();
        let mut lower = lp.lower.clone();
        let mut upper = lp.upper.clone();
        lower.resize(n + m, 0.0);
        upper.resize(n + m, f64::INFINITY);
        let mut is_basic = vec![false; n + m];
        is_basic[n..].iter_mut().for_each(|b| *b = true);
        Self {
            n_structural: n,
            columns,
            rhs: lp.rhs.clone(),
            art_sign,
            body,
            basis: (n..n + m).collect(),
            is_basic,
            x,
            lower,
            upper,
            iterations: 0,
            bland: false,
        }
    }

    fn n_total(&self) -> usize {
        self.x.len()
    }

    fn max_iterations(&self) -> usize {
        50_000 + 100 * self.n_total() * self.basis.len().max(1)
    }

    /// Fixes artificials at zero and pivots basic ones out where possible.
    fn retire_artificials(&mut self) {
        let n = self.n_structural;
        for j in n..self.n_total() {
            self.upper[j] = 0.0;
            if !self.is_basic[j] {
                self.x[j] = 0.0;
            }
        }
        for row in 0..self.basis.len() {
            if self.basis[row] < n {
                continue;
            }
            let entering = (0..n)
                .filter(|&j| !self.is_basic[j])
                .max_by(|&a, &b| {
                    self.body[row][a]
                        .abs()
                        .partial_cmp(&self.body[row][b].abs())
                        .unwrap()
                        .then(b.cmp(&a))
                });
            if let Some(j) = entering {
                if self.body[row][j].abs() > 1e-7 {
                    let leaving = self.basis[row];
                    self.pivot(row, j);
                    self.x[leaving] = 0.0;
                    self.refresh_basic_values();
                }
            }
        }
    }

    fn optimize(&mut self, cost: &[f64]) -> Result<(), OptimError> {
        let mut degenerate_run = 0usize;
        loop {
            self.iterations += 1;
            if self.iterations > self.max_iterations() {
                return Err(OptimError::CycleDetected {
                    iterations: self.iterations,
                });
            }
            let Some((entering, direction)) = self.price(cost) else {
                return Ok(());
            };
            let step = self.ratio_test(entering, direction)?;
            if step.length <= DEGENERATE_STEP {
                degenerate_run += 1;
                if degenerate_run >= DEGENERATE_RUN_BEFORE_BLAND {
                    self.bland = true;
                }
            } else {
                degenerate_run = 0;
            }
            self.apply(entering, direction, step);
        }
    }

    /// Picks an entering variable and its direction of motion.
    fn price(&self, cost: &[f64]) -> Option<(usize, f64)> {
        let mut best: Option<(usize, f64, f64)> = None;
        for j in 0..self.n_total() {
            if self.is_basic[j] || self.upper[j] - self.lower[j] <= 0.0 {
                continue;
            }
            let reduced = cost[j]
                - self
                    .basis
                    .iter()
                    .zip(&self.body)
                    .map(|(&b, row)| cost[b] * row[j])
                    .sum::<f64>();
            let at_lower = self.lower[j].is_finite() && self.x[j] <= self.lower[j];
            let at_upper = self.upper[j].is_finite() && self.x[j] >= self.upper[j];
            let direction = if reduced < -REDUCED_COST_TOL && !at_upper {
                1.0
            } else if reduced > REDUCED_COST_TOL && !at_lower {
                -1.0
            } else {
                continue;
            };
            if self.bland {
                return Some((j, direction));
            }
            if best.is_none_or(|(_, _, r)| reduced.abs() > r) {
                best = Some((j, direction, reduced.abs()));
            }
        }
        best.map(|(j, d, _)| (j, d))
    }

    fn ratio_test(&self, entering: usize, direction: f64) -> Result<Step, OptimError> {
        let mut step = Step {
            length: self.upper[entering] - self.lower[entering],
            leaving_row: None,
        };
        for (row, &basic) in self.basis.iter().enumerate() {
            // d x_basic / d theta
            let rate = -direction * self.body[row][entering];
            let limit = if rate < -PIVOT_TOL && self.lower[basic].is_finite() {
                (self.x[basic] - self.lower[basic]) / -rate
            } else if rate > PIVOT_TOL && self.upper[basic].is_finite() {
                (self.upper[basic] - self.x[basic]) / rate
            } else {
                continue;
            };
            let limit = limit.max(0.0);
            let better = match step.leaving_row {
                _ if limit < step.length - DEGENERATE_STEP => true,
                Some(current) if limit <= step.length + DEGENERATE_STEP => {
                    if self.bland {
                        basic < self.basis[current]
                    } else {
                        self.body[row][entering].abs() > self.body[current][entering].abs()
                    }
                }
                _ => false,
            };
            if better {
                step = Step {
                    length: limit,
                    leaving_row: Some(row),
                };
            }
        }
        if step.length.is_infinite() {
            return Err(OptimError::Unbounded);
        }
        Ok(step)
    }

    fn apply(&mut self, entering: usize, direction: f64, step: Step) {
        match step.leaving_row {
            None => {
                self.x[entering] = if direction > 0.0 {
                    self.upper[entering]
                } else {
                    self.lower[entering]
                };
            }
            Some(row) => {
                let leaving = self.basis[row];
                let rate = -direction * self.body[row][entering];
                self.x[entering] += direction * step.length;
                self.pivot(row, entering);
                self.x[leaving] = if rate < 0.0 {
                    self.lower[leaving]
                } else {
                    self.upper[leaving]
                };
            }
        }
        self.refresh_basic_values();
    }

    fn pivot(&mut self, row: usize, entering: usize) {
        let leaving = self.basis[row];
        let pivot = self.body[row][entering];
        self.body[row].iter_mut().for_each(|v| *v /= pivot);
        let pivot_row = self.body[row].clone();
        for (i, r) in self.body.iter_mut().enumerate() {
            if i == row {
                continue;
            }
            let factor = r[entering];
            if factor != 0.0 {
                r.iter_mut().zip(&pivot_row).for_each(|(v, p)| *v -= factor * p);
            }
        }
        self.basis[row] = entering;
        self.is_basic[leaving] = false;
        self.is_basic[entering] = true;
    }

    /// Recomputes `x_B = B^{-1} (b - N x_N)` from the original data.
    fn refresh_basic_values(&mut self) {
        let n = self.n_structural;
        let m = self.basis.len();
        let residual: Vec<f64> = (0..m)
            .map(|i| {
                self.rhs[i]
                    - (0..self.n_total())
                        .filter(|&j| !self.is_basic[j])
                        .map(|j| self.columns[i][j] * self.x[j])
                        .sum::<f64>()
            })
            .collect();
        // B^{-1} column i is body[:, n + i] * sign_i.
        for row in 0..m {
            let value = (0..m)
                .map(|i| self.body[row][n + i] * self.art_sign[i] * residual[i])
                .sum();
            let basic = self.basis[row];
            self.x[basic] = value;
        }
    }
}

struct Step {
    length: f64,
    leaving_row: Option<usize>,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    const INF: f64 = f64::INFINITY;

    #[test]
    fn bound_attained_optimum() {
        let lp = LinearProgram::new(vec![1.0], vec![], vec![], vec![2.0], vec![5.0]).unwrap();
        let sol = solve_lp(&lp).unwrap();
        assert_eq!(sol.value, 2.0);
        assert_eq!(sol.x, vec![2.0]);
    }

    #[test]
    fn constraint_forces_objective() {
        let lp = LinearProgram::new(
            vec![1.0, 1.0],
            vec![vec![1.0, 1.0]],
            vec![1.0],
            vec![0.0, 0.0],
            vec![1.0, 1.0],
        )
        .unwrap();
        let sol = solve_lp(&lp).unwrap();
        assert!((sol.value - 1.0).abs() < 1e-12);
        assert!(lp.max_violation(&sol.x) < 1e-9);
    }

    #[test]
    fn textbook_problem() {
        // max 3x + 5y s.t. x <= 4, 2y <= 12, 3x + 2y <= 18  => (2, 6), 36
        let lp = LinearProgram::new(
            vec![-3.0, -5.0, 0.0, 0.0, 0.0],
            vec![
                vec![1.0, 0.0, 1.0, 0.0, 0.0],
                vec![0.0, 2.0, 0.0, 1.0, 0.0],
                vec![3.0, 2.0, 0.0, 0.0, 1.0],
            ],
            vec![4.0, 12.0, 18.0],
            vec![0.0; 5],
            vec![INF; 5],
        )
        .unwrap();
        let sol = solve_lp(&lp).unwrap();
        assert!((sol.value + 36.0).abs() < 1e-9);
        assert!((sol.x[0] - 2.0).abs() < 1e-9 && (sol.x[1] - 6.0).abs() < 1e-9);
        assert!(sol.nonbasic_at_bounds(&lp, 1e-9));
    }

    #[test]
    fn free_variables_and_negative_rhs() {
        // min x - y s.t. x + y = -3, x - y = 1, free => x = -1, y = -2, value 1
        let lp = LinearProgram::new(
            vec![1.0, -1.0],
            vec![vec![1.0, 1.0], vec![1.0, -1.0]],
            vec![-3.0, 1.0],
            vec![-INF, -INF],
            vec![INF, INF],
        )
        .unwrap();
        let sol = solve_lp(&lp).unwrap();
        assert!((sol.x[0] + 1.0).abs() < 1e-9 && (sol.x[1] + 2.0).abs() < 1e-9);
        assert!((sol.value - 1.0).abs() < 1e-9);
    }

    #[test]
    fn detects_infeasibility() {
        let lp = LinearProgram::new(
            vec![1.0, 1.0],
            vec![vec![1.0, 1.0]],
            vec![3.0],
            vec![0.0, 0.0],
            vec![1.0, 1.0],
        )
        .unwrap();
        assert!(matches!(solve_lp(&lp), Err(OptimError::Infeasible { .. })));
    }

    #[test]
    fn detects_unboundedness() {
        let lp = LinearProgram::new(
            vec![-1.0, 0.0],
            vec![vec![1.0, -1.0]],
            vec![0.0],
            vec![0.0, 0.0],
            vec![INF, INF],
        )
        .unwrap();
        assert_eq!(solve_lp(&lp), Err(OptimError::Unbounded));
    }

    #[test]
    fn redundant_rows_are_tolerated() {
        let lp = LinearProgram::new(
            vec![1.0, 2.0, 3.0],
            vec![vec![1.0, 1.0, 1.0], vec![2.0, 2.0, 2.0]],
            vec![1.0, 2.0],
            vec![0.0; 3],
            vec![1.0; 3],
        )
        .unwrap();
        let sol = solve_lp(&lp).unwrap();
        assert!((sol.value - 1.0).abs() < 1e-9);
        assert!(lp.max_violation(&sol.x) < 1e-9);
    }

    #[test]
    fn rejects_malformed_input() {
        assert!(LinearProgram::new(vec![1.0], vec![], vec![], vec![2.0], vec![1.0]).is_err());
        assert!(LinearProgram::new(vec![1.0], vec![vec![1.0, 2.0]], vec![1.0], vec![0.0], vec![1.0]).is_err());
        assert!(LinearProgram::new(vec![], vec![], vec![], vec![], vec![]).is_err());
    }

    #[test]
    fn deterministic() {
        let lp = LinearProgram::new(
            vec![0.3, -0.2, 0.5, -0.1],
            vec![vec![1.0, 1.0, 1.0, 1.0], vec![0.5, -1.0, 2.0, 0.0]],
            vec![1.0, 0.25],
            vec![0.0, 0.0, 0.0, 0.0],
            vec![0.6, 0.6, 0.6, 0.6],
        )
        .unwrap();
        assert_eq!(solve_lp(&lp).unwrap(), solve_lp(&lp).unwrap());
    }
}
