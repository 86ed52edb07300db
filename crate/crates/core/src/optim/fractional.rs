//! Linear-fractional programs over the box-constrained simplex
//! `S = {s : 1/(delta M) <= s_m <= delta/M, sum s_m = 1}`.

use super::{solve_lp, LinearProgram, OptimError};

/// Lower bound imposed on the Charnes-Cooper scale variable.
pub const MIN_SCALE: f64 = 1e-12;

/// `min (c.s) / (d.s)` over the box-constrained simplex.
#[derive(Debug, Clone, PartialEq)]
pub struct FractionalProgram {
    numerator: Vec<f64>,
    denominator: Vec<f64>,
    delta: f64,
}

impl FractionalProgram {
    /// The denominator must be strictly positive coefficient-wise, which
    /// makes `d.s > 0` on the whole domain.
    pub fn new(numerator: Vec<f64>, denominator: Vec<f64>, delta: f64) -> Result<Self, OptimError> {
        if numerator.is_empty() || numerator.len() != denominator.len() {
            return Err(OptimError::Malformed(format!(
                "numerator has {} entries, denominator {}",
                numerator.len(),
                denominator.len()
            )));
        }
        if !(delta.is_finite() && delta >= 1.0) {
            return Err(OptimError::Malformed(format!("delta {delta} is not >= 1")));
        }
        if let Some(index) = numerator.iter().position(|v| !v.is_finite()) {
            return Err(OptimError::Malformed(format!("numerator entry {index} is not finite")));
        }
        if let Some(index) = denominator.iter().position(|&v| !(v.is_finite() && v > 0.0)) {
            return Err(OptimError::DegenerateDenominator {
                index,
                value: denominator[index],
            });
        }
        Ok(Self {
            numerator,
            denominator,
            delta,
        })
    }

    pub fn n_members(&self) -> usize {
        self.numerator.len()
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    /// Box bounds `(1/(delta M), delta/M)` of the domain.
    pub fn bounds(&self) -> (f64, f64) {
        let m = self.n_members() as f64;
        (1.0 / (self.delta * m), self.delta / m)
    }

    /// The objective ratio at `s`.
    pub fn evaluate(&self, s: &[f64]) -> f64 {
        let num: f64 = self.numerator.iter().zip(s).map(|(c, v)| c * v).sum();
        let den: f64 = self.denominator.iter().zip(s).map(|(d, v)| d * v).sum();
        num / den
    }

    /// Minimizes the ratio through its Charnes-Cooper linear program.
    pub fn solve(&self) -> Result<FractionalSolution, OptimError> {
        let reduced = charnes_cooper(self)?;
        let lp_solution = solve_lp(&reduced.lp)?;
        let weights = reduced.recover(&lp_solution.x);
        Ok(FractionalSolution {
            value: lp_solution.value,
            weights,
            lp_iterations: lp_solution.iterations,
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FractionalSolution {
    /// Optimal value of the reduced linear program.
    pub value: f64,
    /// Minimizing point `s` of the fractional program.
    pub weights: Vec<f64>,
    pub lp_iterations: usize,
}

/// The linear program produced by [`charnes_cooper`], with the variable
/// layout needed to map its solution back.
#[derive(Debug, Clone, PartialEq)]
pub struct CharnesCooperLp {
    pub lp: LinearProgram,
    members: usize,
}

impl CharnesCooperLp {
    /// Index of the scale variable `t`; `w_m` occupies index `m`.
    pub fn scale_index(&self) -> usize {
        self.members
    }

    /// Recovers `s = w / t` from an LP point.
    pub fn recover(&self, x: &[f64]) -> Vec<f64> {
        let t = x[self.members];
        x[..self.members].iter().map(|w| w / t).collect()
    }
}

/// Charnes-Cooper substitution `t = 1/(d.s)`, `w = t s`.
///
/// The result is `min c.w` subject to `d.w = 1`, `sum w - t = 0` and
/// `t/(delta M) <= w_m <= t delta/M`, with the two-sided coupling written as
/// equalities with nonnegative slacks. Variables are laid out as
/// `[w_1..w_M, t, lower slacks, upper slacks]`.
pub fn charnes_cooper(fp: &FractionalProgram) -> Result<CharnesCooperLp, OptimError> {
    let m = fp.n_members();
    let (lo, hi) = fp.bounds();
    let n = 3 * m + 1;
    let t = m;
    let mut rows = Vec::with_capacity(2 * m + 2);
    let mut rhs = Vec::with_capacity(2 * m + 2);

    let mut normalization = vec![0.0; n];
    normalization[..m].copy_from_slice(&fp.denominator);
    rows.push(normalization);
    rhs.push(1.0);

    let mut total = vec![0.0; n];
    total[..m].iter_mut().for_each(|v| *v = 1.0);
    total[t] = -1.0;
    rows.push(total);
    rhs.push(0.0);

    for k in 0..m {
        let mut floor = vec![0.0; n];
        floor[k] = 1.0;
        floor[t] = -lo;
        floor[m + 1 + k] = -1.0;
        rows.push(floor);
        rhs.push(0.0);

        let mut ceiling = vec![0.0; n];
        ceiling[k] = -1.0;
        ceiling[t] = hi;
        ceiling[2 * m + 1 + k] = -1.0;
        rows.push(ceiling);
        rhs.push(0.0);
    }

    let mut objective = vec![0.0; n];
    objective[..m].copy_from_slice(&fp.numerator);
    let mut lower = vec![0.0; n];
    lower[t] = MIN_SCALE;
    let upper = vec![f64::INFINITY; n];

    Ok(CharnesCooperLp {
        lp: LinearProgram::new(objective, rows, rhs, lower, upper)?,
        members: m,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::optim::box_simplex_vertices;

    #[test]
    fn constant_ratio() {
        let d = vec![0.3, 1.0, 0.7];
        let c: Vec<f64> = d.iter().map(|v| 0.4 * v).collect();
        let sol = FractionalProgram::new(c, d, 2.0).unwrap().solve().unwrap();
        assert!((sol.value - 0.4).abs() < 1e-12);
    }

    #[test]
    fn single_member_domain_is_a_point() {
        let sol = FractionalProgram::new(vec![0.3], vec![0.6], 3.0)
            .unwrap()
            .solve()
            .unwrap();
        assert!((sol.value - 0.5).abs() < 1e-12);
        assert!((sol.weights[0] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn rejects_nonpositive_denominator() {
        assert!(matches!(
            FractionalProgram::new(vec![1.0, 1.0], vec![1.0, 0.0], 2.0),
            Err(OptimError::DegenerateDenominator { index: 1, .. })
        ));
    }

    #[test]
    fn value_matches_recovered_point_and_vertex_minimum() {
        let c = vec![0.2, 0.05, 0.9, 0.4];
        let d = vec![0.5, 0.1, 1.0, 0.8];
        let fp = FractionalProgram::new(c, d, 2.0).unwrap();
        let sol = fp.solve().unwrap();
        assert!((sol.value - fp.evaluate(&sol.weights)).abs() < 1e-9);
        let (lo, hi) = fp.bounds();
        let best = box_simplex_vertices(4, lo, hi)
            .unwrap()
            .iter()
            .map(|s| fp.evaluate(s))
            .fold(f64::INFINITY, f64::min);
        assert!((sol.value - best).abs() < 1e-9);
    }

    #[test]
    fn delta_one_pins_the_uniform_prior() {
        let fp = FractionalProgram::new(vec![0.1, 0.9], vec![1.0, 0.5], 1.0).unwrap();
        let sol = fp.solve().unwrap();
        assert!((sol.value - fp.evaluate(&[0.5, 0.5])).abs() < 1e-12);
    }
}
