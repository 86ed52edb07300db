//! Frank-Wolfe maximization of a concave function over the convex hull of a
//! finite point set.
//!
//! The linear oracle scores every generating point against the gradient.
//! Away steps are taken when moving away from the worst active point makes
//! more progress than moving toward the best one; plain Frank-Wolfe zig-zags
//! when the optimum lies on a face of the hull and never reaches a tight gap.
//! Step sizes come from an exact line search: bisection on the directional
//! derivative, which is monotone along a segment for a concave objective.
//!
//! Even away steps crawl when several nearly collinear points are active, as
//! happens with the dense point clouds of credal sets. For objectives with a
//! diagonal Hessian every step is therefore followed by a correction: a few
//! projected Newton steps on the weights of the active points.

use nalgebra::{DMatrix, DVector};

use super::OptimError;

/// A concave objective with a (super)gradient.
pub trait ConcaveObjective {
    fn value(&self, x: &[f64]) -> f64;
    fn gradient(&self, x: &[f64], out: &mut [f64]);

    /// Writes the Hessian diagonal when the Hessian is diagonal and returns
    /// `true`; the default disables the Newton correction.
    fn diagonal_hessian(&self, _x: &[f64], _out: &mut [f64]) -> bool {
        false
    }
}

const NEWTON_STEPS: usize = 20;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FwOptions {
    pub gap_tolerance: f64,
    pub max_iterations: usize,
    pub line_search_tolerance: f64,
}

impl Default for FwOptions {
    fn default() -> Self {
        Self {
            gap_tolerance: 1e-8,
            max_iterations: 5000,
            line_search_tolerance: 1e-12,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FwSolution {
    pub value: f64,
    pub point: Vec<f64>,
    /// Convex-combination weights over the input points.
    pub weights: Vec<f64>,
    pub gap: f64,
    pub iterations: usize,
}

/// Maximizes `objective` over the convex hull of `vertices`.
pub fn frank_wolfe_max<V, O>(
    vertices: &[V],
    objective: &O,
    options: FwOptions,
) -> Result<FwSolution, OptimError>
where
    V: AsRef<[f64]>,
    O: ConcaveObjective + ?Sized,
{
    if vertices.is_empty() {
        return Err(OptimError::Malformed("no vertices".into()));
    }
    let dim = vertices[0].as_ref().len();
    if vertices.iter().any(|v| v.as_ref().len() != dim) {
        return Err(OptimError::Malformed("vertices differ in dimension".into()));
    }

    let start = vertices
        .iter()
        .map(|v| objective.value(v.as_ref()))
        .enumerate()
        .fold((0, f64::NEG_INFINITY), |best, (i, f)| if f > best.1 { (i, f) } else { best })
        .0;
    let mut weights = vec![0.0; vertices.len()];
    weights[start] = 1.0;
    let mut x = vertices[start].as_ref().to_vec();
    let mut grad = vec![0.0; dim];
    let mut direction = vec![0.0; dim];
    let mut scratch = LineSearch::new(dim);
    let mut gap = f64::INFINITY;

    for iteration in 0..options.max_iterations {
        objective.gradient(&x, &mut grad);
        let scores: Vec<f64> = vertices.iter().map(|v| dot(&grad, v.as_ref())).collect();
        let at_x = dot(&grad, &x);

        let toward = argmax(&scores);
        gap = scores[toward] - at_x;
        if gap <= options.gap_tolerance {
            return Ok(FwSolution {
                value: objective.value(&x),
                point: x,
                weights,
                gap,
                iterations: iteration,
            });
        }

        let away = (0..vertices.len())
            .filter(|&i| weights[i] > 0.0)
            .min_by(|&a, &b| scores[a].partial_cmp(&scores[b]).unwrap().then(a.cmp(&b)))
            .expect("active set is never empty");
        let away_gap = at_x - scores[away];

        let forward = gap >= away_gap || weights[away] >= 1.0;
        let max_step = if forward {
            for (d, (v, xi)) in direction.iter_mut().zip(vertices[toward].as_ref().iter().zip(&x)) {
                *d = v - xi;
            }
            1.0
        } else {
            for (d, (xi, v)) in direction.iter_mut().zip(x.iter().zip(vertices[away].as_ref())) {
                *d = xi - v;
            }
            weights[away] / (1.0 - weights[away])
        };

        let step = scratch.run(objective, &x, &direction, max_step, options.line_search_tolerance);
        if step <= 0.0 {
            // No ascent along the chosen direction at machine precision.
            break;
        }
        for (xi, d) in x.iter_mut().zip(&direction) {
            *xi += step * d;
        }
        if forward {
            if step >= 1.0 {
                weights.iter_mut().for_each(|w| *w = 0.0);
                weights[toward] = 1.0;
                x.copy_from_slice(vertices[toward].as_ref());
            } else {
                weights.iter_mut().for_each(|w| *w *= 1.0 - step);
                weights[toward] += step;
            }
        } else {
            weights.iter_mut().for_each(|w| *w *= 1.0 + step);
            if step >= max_step {
                weights[away] = 0.0;
            } else {
                weights[away] -= step;
            }
        }
        correct_active_set(vertices, objective, &mut weights, &mut x, &mut scratch, options);
    }

    if gap <= options.gap_tolerance {
        return Ok(FwSolution {
            value: objective.value(&x),
            point: x,
            weights,
            gap,
            iterations: options.max_iterations,
        });
    }
    Err(OptimError::ConvergenceFailure {
        iterations: options.max_iterations,
        gap,
    })
}

/// Projected Newton steps on the weights of the active points, dropping a
/// point when its weight reaches zero. Leaves `x` equal to the weighted sum.
fn correct_active_set<V, O>(
    vertices: &[V],
    objective: &O,
    weights: &mut [f64],
    x: &mut [f64],
    search: &mut LineSearch,
    options: FwOptions,
) where
    V: AsRef<[f64]>,
    O: ConcaveObjective + ?Sized,
{
    let dim = x.len();
    let mut grad = vec![0.0; dim];
    let mut hess = vec![0.0; dim];
    let mut direction = vec![0.0; dim];
    for _ in 0..NEWTON_STEPS {
        let active: Vec<usize> = (0..weights.len()).filter(|&i| weights[i] > 0.0).collect();
        let a = active.len();
        if a < 2 || !objective.diagonal_hessian(x, &mut hess) {
            return;
        }
        objective.gradient(x, &mut grad);

        // KKT system of the quadratic model restricted to sum(dw) = 0:
        // [-H  1] [dw]   [g]
        // [1^T 0] [l ] = [0]
        let mut kkt = DMatrix::<f64>::zeros(a + 1, a + 1);
        let mut rhs = DVector::<f64>::zeros(a + 1);
        for (r, &i) in active.iter().enumerate() {
            let vi = vertices[i].as_ref();
            rhs[r] = dot(&grad, vi);
            for (c, &j) in active.iter().enumerate().skip(r) {
                let vj = vertices[j].as_ref();
                let h: f64 = (0..dim).map(|k| -vi[k] * hess[k] * vj[k]).sum();
                kkt[(r, c)] = h;
                kkt[(c, r)] = h;
            }
            kkt[(r, a)] = 1.0;
            kkt[(a, r)] = 1.0;
        }
        let scale = (0..a).map(|r| kkt[(r, r)]).fold(0.0, f64::max);
        for r in 0..a {
            kkt[(r, r)] += 1e-12 * scale + f64::MIN_POSITIVE;
        }
        let Some(solution) = kkt.lu().solve(&rhs) else {
            return;
        };
        let dw: Vec<f64> = solution.iter().take(a).copied().collect();
        if dw.iter().any(|v| !v.is_finite()) {
            return;
        }

        direction.iter_mut().for_each(|d| *d = 0.0);
        for (&i, &step) in active.iter().zip(&dw) {
            for (d, v) in direction.iter_mut().zip(vertices[i].as_ref()) {
                *d += step * v;
            }
        }
        let mut max_step = f64::INFINITY;
        let mut blocking = None;
        for (&i, &step) in active.iter().zip(&dw) {
            if step < 0.0 && weights[i] / -step < max_step {
                max_step = weights[i] / -step;
                blocking = Some(i);
            }
        }
        // Newton's full step is 1; allow some overshoot for a poor model.
        let cap = max_step.min(2.0);
        let before = objective.value(x);
        let t = search.run(objective, x, &direction, cap, options.line_search_tolerance);
        if t <= 0.0 {
            return;
        }
        for (&i, &step) in active.iter().zip(&dw) {
            weights[i] = (weights[i] + t * step).max(0.0);
        }
        if t >= max_step {
            if let Some(i) = blocking {
                weights[i] = 0.0;
            }
        }
        let total: f64 = weights.iter().sum();
        weights.iter_mut().for_each(|w| *w /= total);
        x.iter_mut().for_each(|xi| *xi = 0.0);
        for (i, &w) in weights.iter().enumerate() {
            if w > 0.0 {
                for (xi, v) in x.iter_mut().zip(vertices[i].as_ref()) {
                    *xi += w * v;
                }
            }
        }
        if objective.value(x) - before <= 1e-15 * before.abs().max(1.0) {
            return;
        }
    }
}

struct LineSearch {
    probe: Vec<f64>,
    grad: Vec<f64>,
}

impl LineSearch {
    fn new(dim: usize) -> Self {
        Self {
            probe: vec![0.0; dim],
            grad: vec![0.0; dim],
        }
    }

    fn slope<O: ConcaveObjective + ?Sized>(&mut self, objective: &O, x: &[f64], d: &[f64], step: f64) -> f64 {
        for (p, (xi, di)) in self.probe.iter_mut().zip(x.iter().zip(d)) {
            *p = xi + step * di;
        }
        objective.gradient(&self.probe, &mut self.grad);
        dot(&self.grad, d)
    }

    /// Maximizer of the objective on `x + [0, max_step] d`.
    fn run<O: ConcaveObjective + ?Sized>(
        &mut self,
        objective: &O,
        x: &[f64],
        d: &[f64],
        max_step: f64,
        tolerance: f64,
    ) -> f64 {
        if self.slope(objective, x, d, 0.0) <= 0.0 {
            return 0.0;
        }
        if self.slope(objective, x, d, max_step) >= 0.0 {
            return max_step;
        }
        let (mut lo, mut hi) = (0.0, max_step);
        while hi - lo > tolerance * max_step.max(1.0) {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if self.slope(objective, x, d, mid) > 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    }
}

fn argmax(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in values.iter().enumerate() {
        if v > values[best] {
            best = i;
        }
    }
    best
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    /// `-|x - target|^2`.
    struct Quadratic(Vec<f64>);

    impl ConcaveObjective for Quadratic {
        fn value(&self, x: &[f64]) -> f64 {
            -x.iter().zip(&self.0).map(|(a, b)| (a - b).powi(2)).sum::<f64>()
        }
        fn gradient(&self, x: &[f64], out: &mut [f64]) {
            for (o, (a, b)) in out.iter_mut().zip(x.iter().zip(&self.0)) {
                *o = -2.0 * (a - b);
            }
        }
        fn diagonal_hessian(&self, _x: &[f64], out: &mut [f64]) -> bool {
            out.iter_mut().for_each(|h| *h = -2.0);
            true
        }
    }

    #[test]
    fn single_vertex() {
        let sol = frank_wolfe_max(&[vec![0.3, 0.7]], &Quadratic(vec![0.0, 0.0]), FwOptions::default()).unwrap();
        assert_eq!(sol.point, vec![0.3, 0.7]);
        assert_eq!(sol.weights, vec![1.0]);
    }

    #[test]
    fn projection_onto_a_face() {
        // Triangle with target outside; the optimum is the projection onto
        // the edge between (1,0) and (0,1): (0.5, 0.5).
        let vertices = [vec![0.0, 0.0], vec![1.0, 0.0], vec![0.0, 1.0]];
        let sol = frank_wolfe_max(&vertices, &Quadratic(vec![1.0, 1.0]), FwOptions::default()).unwrap();
        assert!((sol.point[0] - 0.5).abs() < 1e-6 && (sol.point[1] - 0.5).abs() < 1e-6);
        assert!(sol.gap <= 1e-8);
        let s: f64 = sol.weights.iter().sum();
        assert!((s - 1.0).abs() < 1e-12);
        assert!(sol.weights.iter().all(|&w| w >= 0.0));
    }

    #[test]
    fn reports_nonconvergence() {
        let vertices = [vec![0.0, 0.0], vec![1.0, 0.0], vec![0.0, 1.0]];
        let options = FwOptions {
            max_iterations: 1,
            ..FwOptions::default()
        };
        let result = frank_wolfe_max(&vertices, &Quadratic(vec![0.3, 0.3]), options);
        assert!(matches!(result, Err(OptimError::ConvergenceFailure { .. })));
    }
}
