//! Levi agent: a credal set of predictive distributions generated by the
//! family of priors within a factor `delta` of uniform, and the uncertainty
//! measures defined on it.
//!
//! For priors `s` in `S_delta = {s : 1/(delta M) <= s_m <= delta/M, sum s = 1}`
//! the posterior-averaged prediction is
//!
//! ```text
//! q(s) = sum_m s_m l_m p_{.,m} / sum_m s_m l_m
//! ```
//!
//! which is a fractional-linear map of `s`. The credal set `Q` is the image
//! of `S_delta`, a polytope spanned by the images of the vertices of
//! `S_delta`. Lower probabilities `nu_Q(A)` are linear-fractional programs
//! over `S_delta`; upper entropy is a concave maximization over `Q`, lower
//! entropy a minimum over its generating points.
//!
//! All measures are in bits.

use crate::bayes::entropy_bits;
use crate::error::{Error, Result};
use crate::optim::{
    box_simplex_vertices, frank_wolfe_max, ConcaveObjective, FractionalProgram, FwOptions,
    FwSolution,
};
use crate::types::{CredalPolytope, EnsembleOutput, Method, ProbVector, UncertaintyReport};

/// Subsets are bitmasks; the Möbius transform costs `O(3^K)`.
pub const MAX_CLASSES: usize = 16;
/// Möbius masses down to this negative value count as rounding noise.
pub const NEGATIVE_MASS_TOL: f64 = 1e-7;
/// Tolerance for capacity boundary values and monotonicity.
pub const CAPACITY_TOL: f64 = 1e-9;
/// Generating points closer than this (max-norm) are merged.
pub const VERTEX_DEDUP_TOL: f64 = 1e-9;
/// A negative disaggregated component above this is clamped to zero.
pub const NEGATIVE_COMPONENT_TOL: f64 = 1e-9;

fn check_delta(delta: f64) -> Result<()> {
    if delta.is_finite() && delta >= 1.0 {
        Ok(())
    } else {
        Err(Error::InvalidDelta(delta))
    }
}

fn check_classes(classes: usize) -> Result<()> {
    if classes > MAX_CLASSES {
        return Err(Error::TooManyClasses(classes));
    }
    Ok(())
}

/// Vertices of `S_delta` for an ensemble of `members` hypotheses.
pub fn sdelta_vertices(members: usize, delta: f64) -> Result<Vec<Vec<f64>>> {
    check_delta(delta)?;
    let m = members as f64;
    Ok(box_simplex_vertices(members, 1.0 / (delta * m), delta / m)?)
}

/// Likelihoods relative to the best member, floored so that every member
/// keeps a strictly positive (if negligible) weight.
fn relative_likelihoods(ens: &EnsembleOutput) -> Vec<f64> {
    ens.relative_likelihoods()
        .into_iter()
        .map(|l| l.max(f64::MIN_POSITIVE))
        .collect()
}

/// Image of the prior `s` under the posterior-averaging map.
fn push_forward(ens: &EnsembleOutput, likelihoods: &[f64], prior: &[f64]) -> Result<ProbVector> {
    let scaled: Vec<f64> = prior.iter().zip(likelihoods).map(|(s, l)| s * l).collect();
    let total: f64 = scaled.iter().sum();
    let mut q = vec![0.0; ens.n_classes()];
    for (member, w) in ens.members().iter().zip(&scaled) {
        let w = w / total;
        for (qk, p) in q.iter_mut().zip(member.as_slice()) {
            *qk += w * p;
        }
    }
    ProbVector::new(q)
}

/// The credal set generated by `S_delta`, with precomputed prior vertices.
///
/// Construct once per ensemble size and reuse across queries.
#[derive(Debug, Clone)]
pub struct LeviAgent {
    delta: f64,
    members: usize,
    prior_vertices: Vec<Vec<f64>>,
}

impl LeviAgent {
    pub fn new(members: usize, delta: f64) -> Result<Self> {
        Ok(Self {
            delta,
            members,
            prior_vertices: sdelta_vertices(members, delta)?,
        })
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn prior_vertices(&self) -> &[Vec<f64>] {
        &self.prior_vertices
    }

    fn check_members(&self, ens: &EnsembleOutput) -> Result<()> {
        if ens.n_members() != self.members {
            return Err(Error::DimensionMismatch {
                what: "ensemble members",
                expected: self.members,
                found: ens.n_members(),
            });
        }
        Ok(())
    }

    /// Images of the prior vertices, merged within [`VERTEX_DEDUP_TOL`].
    /// Non-extreme images are kept.
    pub fn credal_set(&self, ens: &EnsembleOutput) -> Result<CredalPolytope> {
        self.check_members(ens)?;
        let likelihoods = relative_likelihoods(ens);
        let mut vertices: Vec<ProbVector> = Vec::new();
        let mut sources = Vec::new();
        for prior in &self.prior_vertices {
            let q = push_forward(ens, &likelihoods, prior)?;
            let duplicate = vertices.iter().any(|v| {
                v.as_slice()
                    .iter()
                    .zip(q.as_slice())
                    .all(|(a, b)| (a - b).abs() <= VERTEX_DEDUP_TOL)
            });
            if !duplicate {
                vertices.push(q);
                sources.push(prior.clone());
            }
        }
        CredalPolytope::new(vertices, self.delta, sources)
    }

    /// Every measure needed by both disaggregations.
    pub fn measures(&self, ens: &EnsembleOutput) -> Result<CredalMeasures> {
        let polytope = self.credal_set(ens)?;
        let capacity = capacity_from_lfp(ens, self.delta)?;
        let masses = mobius_inverse(&capacity)?;
        let generalized_hartley = generalized_hartley(&masses);
        let upper_entropy = upper_entropy(&polytope)?;
        let lower_entropy = lower_entropy(&polytope);
        Ok(CredalMeasures {
            polytope,
            capacity,
            masses,
            upper_entropy,
            lower_entropy,
            generalized_hartley,
        })
    }
}

/// Credal set of `ens` for the prior family `S_delta`.
pub fn credal_set(ens: &EnsembleOutput, delta: f64) -> Result<CredalPolytope> {
    LeviAgent::new(ens.n_members(), delta)?.credal_set(ens)
}

/// Lower probability `nu(A)` of each event `A`, indexed by class bitmask.
#[derive(Debug, Clone, PartialEq)]
pub struct Capacity {
    classes: usize,
    values: Vec<f64>,
}

impl Capacity {
    /// Validates boundary conditions and monotonicity within
    /// [`CAPACITY_TOL`]; `nu(empty)` and `nu(Y)` are then set exactly.
    pub fn new(classes: usize, mut values: Vec<f64>) -> Result<Self> {
        check_classes(classes)?;
        let full = (1usize << classes) - 1;
        if values.len() != full + 1 {
            return Err(Error::DimensionMismatch {
                what: "capacity values (2^K)",
                expected: full + 1,
                found: values.len(),
            });
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidCapacity("non-finite value".into()));
        }
        if values[0].abs() > CAPACITY_TOL || (values[full] - 1.0).abs() > CAPACITY_TOL {
            return Err(Error::InvalidCapacity(format!(
                "nu(empty) = {}, nu(Y) = {}",
                values[0], values[full]
            )));
        }
        values[0] = 0.0;
        values[full] = 1.0;
        for subset in 0..=full {
            for k in 0..classes {
                let superset = subset | 1 << k;
                if superset != subset && values[subset] > values[superset] + CAPACITY_TOL {
                    return Err(Error::InvalidCapacity(format!(
                        "not monotone: nu({subset:#b}) = {} > nu({superset:#b}) = {}",
                        values[subset], values[superset]
                    )));
                }
            }
        }
        Ok(Self { classes, values })
    }

    pub fn classes(&self) -> usize {
        self.classes
    }

    pub fn get(&self, subset: u64) -> f64 {
        self.values[subset as usize]
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }
}

fn check_subset(subset: u64, classes: usize) -> Result<()> {
    if subset >> classes != 0 {
        return Err(Error::InvalidSubset { subset, classes });
    }
    Ok(())
}

/// `nu_Q(A)` as a linear-fractional program over `S_delta`, solved through
/// its Charnes-Cooper linear program.
pub fn capacity_lfp(ens: &EnsembleOutput, delta: f64, subset: u64) -> Result<f64> {
    check_delta(delta)?;
    let classes = ens.n_classes();
    check_classes(classes)?;
    check_subset(subset, classes)?;
    let full = (1u64 << classes) - 1;
    if subset == 0 {
        return Ok(0.0);
    }
    if subset == full {
        return Ok(1.0);
    }
    let likelihoods = relative_likelihoods(ens);
    let numerator: Vec<f64> = ens
        .members()
        .iter()
        .zip(&likelihoods)
        .map(|(member, l)| l * member.event_prob(subset))
        .collect();
    let solution = FractionalProgram::new(numerator, likelihoods, delta)?.solve()?;
    Ok(solution.value.clamp(0.0, 1.0))
}

/// The full capacity of the credal set, one linear program per event.
pub fn capacity_from_lfp(ens: &EnsembleOutput, delta: f64) -> Result<Capacity> {
    let classes = ens.n_classes();
    check_classes(classes)?;
    let values = (0..1u64 << classes)
        .map(|subset| capacity_lfp(ens, delta, subset))
        .collect::<Result<Vec<_>>>()?;
    Capacity::new(classes, values)
}

/// The capacity obtained by minimizing `q(A)` over the generating points.
///
/// `q(A)` is linear in `q`, so its minimum over the hull is attained at one
/// of them.
pub fn capacity_from_vertices(polytope: &CredalPolytope) -> Result<Capacity> {
    let classes = polytope.n_classes();
    check_classes(classes)?;
    let values = (0..1u64 << classes)
        .map(|subset| {
            polytope
                .vertices()
                .iter()
                .map(|q| q.event_prob(subset))
                .fold(f64::INFINITY, f64::min)
        })
        .collect();
    Capacity::new(classes, values)
}

/// Möbius masses of a capacity, indexed by class bitmask.
#[derive(Debug, Clone, PartialEq)]
pub struct MassAssignment {
    classes: usize,
    mass: Vec<f64>,
}

impl MassAssignment {
    pub fn classes(&self) -> usize {
        self.classes
    }

    pub fn get(&self, subset: u64) -> f64 {
        self.mass[subset as usize]
    }

    pub fn masses(&self) -> &[f64] {
        &self.mass
    }

    /// Smallest mass, or 0 when all masses are nonnegative.
    pub fn most_negative(&self) -> f64 {
        self.mass.iter().copied().fold(0.0, f64::min)
    }

    /// Number of masses below `-NEGATIVE_MASS_TOL`. The capacity of a general
    /// credal set need not be a belief function, so these are reported
    /// rather than treated as errors.
    pub fn significant_negative_count(&self) -> usize {
        self.mass.iter().filter(|&&m| m < -NEGATIVE_MASS_TOL).count()
    }

    /// `sum_{B subset of A} m(B)`, which recovers the capacity.
    pub fn belief(&self, subset: u64) -> f64 {
        subsets_of(subset).map(|b| self.mass[b as usize]).sum()
    }
}

/// Iterates over all subsets of `set`, including `set` and the empty set.
fn subsets_of(set: u64) -> impl Iterator<Item = u64> {
    let mut next = Some(set);
    std::iter::from_fn(move || {
        let current = next?;
        next = if current == 0 { None } else { Some((current - 1) & set) };
        Some(current)
    })
}

/// `m(A) = sum_{B subset of A} (-1)^{|A \ B|} nu(B)`.
pub fn mobius_inverse(capacity: &Capacity) -> Result<MassAssignment> {
    let classes = capacity.classes();
    let mass: Vec<f64> = (0..1u64 << classes)
        .map(|a| {
            subsets_of(a)
                .map(|b| {
                    let sign = if (a & !b).count_ones() % 2 == 0 { 1.0 } else { -1.0 };
                    sign * capacity.get(b)
                })
                .sum()
        })
        .collect();
    let sum: f64 = mass.iter().sum();
    if (sum - 1.0).abs() > CAPACITY_TOL {
        return Err(Error::NormalizationFailure { sum });
    }
    Ok(MassAssignment { classes, mass })
}

/// `GH = sum_A m(A) log2 |A|`.
pub fn generalized_hartley(masses: &MassAssignment) -> f64 {
    masses
        .masses()
        .iter()
        .enumerate()
        .filter(|(a, _)| a.count_ones() > 1)
        .map(|(a, m)| m * f64::from(a.count_ones()).log2())
        .sum()
}

/// Shannon entropy in bits as a concave objective on the simplex.
///
/// The gradient floors probabilities at `1e-300` so that it stays finite on
/// the boundary; the linear oracle still prefers points with more mass there.
#[derive(Debug, Clone, Copy, Default)]
pub struct EntropyObjective;

impl ConcaveObjective for EntropyObjective {
    fn value(&self, x: &[f64]) -> f64 {
        entropy_bits(x)
    }

    fn gradient(&self, x: &[f64], out: &mut [f64]) {
        for (g, &p) in out.iter_mut().zip(x) {
            *g = -p.max(1e-300).log2() - std::f64::consts::LOG2_E;
        }
    }

    fn diagonal_hessian(&self, x: &[f64], out: &mut [f64]) -> bool {
        for (h, &p) in out.iter_mut().zip(x) {
            *h = -std::f64::consts::LOG2_E / p.max(1e-300);
        }
        true
    }
}

/// Maximum-entropy point of the credal set.
pub fn upper_entropy_solution(polytope: &CredalPolytope) -> Result<FwSolution> {
    Ok(frank_wolfe_max(
        polytope.vertices(),
        &EntropyObjective,
        FwOptions::default(),
    )?)
}

/// `S*(Q) = max_{q in Q} S(q)`.
pub fn upper_entropy(polytope: &CredalPolytope) -> Result<f64> {
    Ok(upper_entropy_solution(polytope)?.value)
}

/// `S_*(Q) = min_{q in Q} S(q)`, attained at a generating point because
/// entropy is concave.
pub fn lower_entropy(polytope: &CredalPolytope) -> f64 {
    polytope
        .vertices()
        .iter()
        .map(|q| entropy_bits(q.as_slice()))
        .fold(f64::INFINITY, f64::min)
}

/// Measures of one credal set.
#[derive(Debug, Clone)]
pub struct CredalMeasures {
    pub polytope: CredalPolytope,
    pub capacity: Capacity,
    pub masses: MassAssignment,
    pub upper_entropy: f64,
    pub lower_entropy: f64,
    pub generalized_hartley: f64,
}

impl CredalMeasures {
    /// Measures computed from a given polytope, with the capacity taken from
    /// its generating points.
    pub fn from_polytope(polytope: CredalPolytope) -> Result<Self> {
        let capacity = capacity_from_vertices(&polytope)?;
        let masses = mobius_inverse(&capacity)?;
        Ok(Self {
            generalized_hartley: generalized_hartley(&masses),
            upper_entropy: upper_entropy(&polytope)?,
            lower_entropy: lower_entropy(&polytope),
            polytope,
            capacity,
            masses,
        })
    }

    /// Total = upper entropy, epistemic = generalized Hartley, aleatoric the
    /// difference.
    pub fn gh_report(&self) -> Result<UncertaintyReport> {
        let total = self.upper_entropy;
        let (aleatoric, epistemic) = split_clamped(total, self.generalized_hartley, "S* - GH")?;
        UncertaintyReport::new(total, aleatoric, epistemic, Method::LeviGh)
    }

    /// Total = upper entropy, aleatoric = lower entropy, epistemic the
    /// difference.
    pub fn ent_report(&self) -> Result<UncertaintyReport> {
        let total = self.upper_entropy;
        let (epistemic, aleatoric) = split_clamped(total, self.lower_entropy, "S* - S_*")?;
        UncertaintyReport::new(total, aleatoric, epistemic, Method::LeviEnt)
    }
}

/// Returns `(total - part, part)`, clamping a slightly negative difference.
fn split_clamped(total: f64, part: f64, what: &str) -> Result<(f64, f64)> {
    let rest = total - part;
    if rest >= 0.0 {
        Ok((rest, part))
    } else if rest >= -NEGATIVE_COMPONENT_TOL {
        Ok((0.0, total))
    } else {
        Err(Error::InternalConsistency(format!("{what} = {rest} is negative")))
    }
}

/// Upper-entropy disaggregation with the generalized Hartley measure.
pub fn levi_gh_decomposition(ens: &EnsembleOutput, delta: f64) -> Result<UncertaintyReport> {
    LeviAgent::new(ens.n_members(), delta)?.measures(ens)?.gh_report()
}

/// Upper/lower-entropy disaggregation.
pub fn levi_ent_decomposition(ens: &EnsembleOutput, delta: f64) -> Result<UncertaintyReport> {
    LeviAgent::new(ens.n_members(), delta)?.measures(ens)?.ent_report()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bayes::{bayes_decomposition, posterior_weights, shannon_entropy};

    fn pv(v: &[f64]) -> ProbVector {
        ProbVector::new(v.to_vec()).unwrap()
    }

    fn interval(a: f64, b: f64) -> CredalPolytope {
        CredalPolytope::from_points(vec![pv(&[a, 1.0 - a]), pv(&[b, 1.0 - b])]).unwrap()
    }

    fn contains(points: &[Vec<f64>], target: &[f64]) -> bool {
        points
            .iter()
            .any(|p| p.iter().zip(target).all(|(a, b)| (a - b).abs() < 1e-12))
    }

    /// 1-D grid over `q_1` in `[a, b]`, step `1e-5`: (max, min) entropy.
    fn grid_entropy(a: f64, b: f64) -> (f64, f64) {
        let steps = ((b - a) / 1e-5).round() as usize;
        (0..=steps)
            .map(|i| {
                let q = a + (b - a) * i as f64 / steps as f64;
                entropy_bits(&[q, 1.0 - q])
            })
            .fold((f64::NEG_INFINITY, f64::INFINITY), |(hi, lo), s| (hi.max(s), lo.min(s)))
    }

    #[test]
    fn sdelta_examples() {
        assert_eq!(sdelta_vertices(2, 1.0).unwrap(), vec![vec![0.5, 0.5]]);
        let v = sdelta_vertices(2, 2.0).unwrap();
        assert_eq!(v.len(), 2);
        assert!(contains(&v, &[0.25, 0.75]) && contains(&v, &[0.75, 0.25]));
        let v = sdelta_vertices(3, 2.0).unwrap();
        assert_eq!(v.len(), 3);
        for target in [[1.0 / 6.0, 1.0 / 6.0, 2.0 / 3.0], [1.0 / 6.0, 2.0 / 3.0, 1.0 / 6.0], [2.0 / 3.0, 1.0 / 6.0, 1.0 / 6.0]] {
            assert!(contains(&v, &target));
        }
        assert!(matches!(sdelta_vertices(3, 0.5), Err(Error::InvalidDelta(_))));
    }

    #[test]
    fn credal_set_of_two_members() {
        let ens = EnsembleOutput::with_equal_likelihoods(vec![pv(&[0.8, 0.2]), pv(&[0.4, 0.6])]).unwrap();
        let q = credal_set(&ens, 2.0).unwrap();
        let pts: Vec<Vec<f64>> = q.vertices().iter().map(|v| v.as_slice().to_vec()).collect();
        assert_eq!(pts.len(), 2);
        assert!(contains(&pts, &[0.7, 0.3]) && contains(&pts, &[0.5, 0.5]));
        // Dense sampling of S_delta stays inside [0.5, 0.7].
        let likelihoods = relative_likelihoods(&ens);
        for i in 0..=1000 {
            let s0 = 0.25 + 0.5 * i as f64 / 1000.0;
            let image = push_forward(&ens, &likelihoods, &[s0, 1.0 - s0]).unwrap();
            assert!(image.as_slice()[0] >= 0.5 - 1e-12 && image.as_slice()[0] <= 0.7 + 1e-12);
        }
    }

    #[test]
    fn degenerate_credal_sets() {
        let members = vec![pv(&[0.8, 0.1, 0.1]), pv(&[0.2, 0.3, 0.5]), pv(&[0.1, 0.1, 0.8])];
        let ens = EnsembleOutput::new(members, vec![-3.0, -2.5, -4.0]).unwrap();
        let q = credal_set(&ens, 1.0).unwrap();
        assert_eq!(q.vertices().len(), 1);
        let bma = crate::bayes::bma_prediction(&ens, &posterior_weights(&ens).unwrap()).unwrap();
        for (a, b) in q.vertices()[0].as_slice().iter().zip(bma.as_slice()) {
            assert!((a - b).abs() < 1e-12);
        }
        let single = EnsembleOutput::new(vec![pv(&[0.3, 0.7])], vec![-9.0]).unwrap();
        let q = credal_set(&single, 5.0).unwrap();
        assert_eq!(q.vertices().len(), 1);
        assert!((q.vertices()[0].as_slice()[0] - 0.3).abs() < 1e-15);
    }

    #[test]
    fn capacity_boundaries_and_interval() {
        let ens = EnsembleOutput::with_equal_likelihoods(vec![pv(&[0.8, 0.2]), pv(&[0.4, 0.6])]).unwrap();
        assert_eq!(capacity_lfp(&ens, 2.0, 0).unwrap(), 0.0);
        assert_eq!(capacity_lfp(&ens, 2.0, 0b11).unwrap(), 1.0);
        assert!((capacity_lfp(&ens, 2.0, 0b01).unwrap() - 0.5).abs() < 1e-9);
        assert!((capacity_lfp(&ens, 2.0, 0b10).unwrap() - 0.3).abs() < 1e-9);
        assert!(matches!(capacity_lfp(&ens, 2.0, 0b100), Err(Error::InvalidSubset { .. })));
        // delta = 1: the capacity is the model average itself.
        let bma = crate::bayes::bma_prediction(&ens, &posterior_weights(&ens).unwrap()).unwrap();
        assert!((capacity_lfp(&ens, 1.0, 0b01).unwrap() - bma.as_slice()[0]).abs() < 1e-12);
    }

    #[test]
    fn mobius_of_precise_and_vacuous_sets() {
        let q = pv(&[0.2, 0.3, 0.5]);
        let cap = capacity_from_vertices(&CredalPolytope::from_points(vec![q.clone()]).unwrap()).unwrap();
        let m = mobius_inverse(&cap).unwrap();
        for a in 0..8u64 {
            let expected = if a.count_ones() == 1 { q.as_slice()[a.trailing_zeros() as usize] } else { 0.0 };
            assert!((m.get(a) - expected).abs() < 1e-12);
        }
        assert!(generalized_hartley(&m).abs() < 1e-12);

        let vacuous = Capacity::new(2, vec![0.0, 0.0, 0.0, 1.0]).unwrap();
        let m = mobius_inverse(&vacuous).unwrap();
        assert_eq!(m.masses(), &[0.0, 0.0, 0.0, 1.0]);
        let mut four = vec![0.0; 16];
        four[15] = 1.0;
        let m = mobius_inverse(&Capacity::new(4, four).unwrap()).unwrap();
        assert_eq!(generalized_hartley(&m), 2.0);
    }

    #[test]
    fn binary_interval_masses() {
        // m({y1}) = a, m({y2}) = 1 - b, m(Y) = b - a
        let cap = capacity_from_vertices(&interval(0.6, 0.9)).unwrap();
        let m = mobius_inverse(&cap).unwrap();
        assert!((m.get(0b01) - 0.6).abs() < 1e-12);
        assert!((m.get(0b10) - 0.1).abs() < 1e-12);
        assert!((m.get(0b11) - 0.3).abs() < 1e-12);
        for a in 0..4 {
            assert!((m.belief(a) - cap.get(a)).abs() < 1e-12);
        }
        assert!((generalized_hartley(&m) - 0.3).abs() < 1e-12);
    }

    #[test]
    fn capacity_validation() {
        assert!(Capacity::new(2, vec![0.0, 0.6, 0.5, 0.9]).is_err());
        assert!(Capacity::new(2, vec![0.0, 0.6, 0.1]).is_err());
        assert!(Capacity::new(2, vec![0.0, 0.7, 0.2, 0.6]).is_err());
        assert!(matches!(Capacity::new(17, vec![]), Err(Error::TooManyClasses(17))));
    }

    #[test]
    fn entropy_extremes_on_intervals() {
        let (grid_max, grid_min) = grid_entropy(0.6, 0.9);
        let q = interval(0.6, 0.9);
        assert!((upper_entropy(&q).unwrap() - grid_max).abs() < 1e-9);
        assert!((lower_entropy(&q) - grid_min).abs() < 1e-12);
        assert!((grid_max - 0.970_950_594_454_668_6).abs() < 1e-12);
        assert!((grid_min - 0.468_995_593_589_281).abs() < 1e-9);

        let wide = interval(0.4, 0.8);
        assert!((upper_entropy(&wide).unwrap() - 1.0).abs() < 1e-12);

        let point = CredalPolytope::from_points(vec![pv(&[0.2, 0.8])]).unwrap();
        let s = shannon_entropy(&pv(&[0.2, 0.8]));
        assert_eq!(upper_entropy(&point).unwrap(), s);
        assert_eq!(lower_entropy(&point), s);
    }

    #[test]
    fn disaggregations_of_the_binary_interval() {
        let m = CredalMeasures::from_polytope(interval(0.6, 0.9)).unwrap();
        let gh = m.gh_report().unwrap();
        assert!((gh.total - 0.970_950_594_454_668_6).abs() < 1e-9);
        assert!((gh.epistemic - 0.3).abs() < 1e-12);
        assert!((gh.aleatoric - 0.670_950_594_454_668_6).abs() < 1e-9);
        let ent = m.ent_report().unwrap();
        assert!((ent.aleatoric - 0.468_995_593_589_281).abs() < 1e-9);
        assert!((ent.epistemic - 0.501_955_000_865_387_4).abs() < 1e-9);
    }

    #[test]
    fn vacuous_set_is_purely_epistemic() {
        let simplex = CredalPolytope::from_points(vec![pv(&[1.0, 0.0, 0.0]), pv(&[0.0, 1.0, 0.0]), pv(&[0.0, 0.0, 1.0])]).unwrap();
        let r = CredalMeasures::from_polytope(simplex).unwrap().gh_report().unwrap();
        assert!((r.total - 3f64.log2()).abs() < 1e-9);
        assert!((r.epistemic - 3f64.log2()).abs() < 1e-12);
        assert!(r.aleatoric.abs() < 1e-9);
    }

    #[test]
    fn confident_disagreement_under_delta_two() {
        let ens = EnsembleOutput::with_equal_likelihoods(vec![pv(&[1.0, 0.0]), pv(&[0.0, 1.0])]).unwrap();
        let r = levi_ent_decomposition(&ens, 2.0).unwrap();
        assert!((r.total - 1.0).abs() < 1e-12);
        assert!((r.aleatoric - 0.811_278_124_459_132_8).abs() < 1e-12);
        assert!((r.epistemic - 0.188_721_875_540_867_2).abs() < 1e-12);
    }

    #[test]
    fn delta_one_matches_bayes() {
        let members = vec![pv(&[0.7, 0.2, 0.1]), pv(&[0.1, 0.6, 0.3]), pv(&[0.3, 0.3, 0.4])];
        let ens = EnsembleOutput::new(members, vec![-10.0, -9.2, -11.0]).unwrap();
        let bayes = bayes_decomposition(&ens, &posterior_weights(&ens).unwrap()).unwrap();
        let gh = levi_gh_decomposition(&ens, 1.0).unwrap();
        let ent = levi_ent_decomposition(&ens, 1.0).unwrap();
        assert!((gh.total - bayes.total).abs() < 1e-12);
        assert!(gh.epistemic.abs() < 1e-8);
        assert_eq!(ent.epistemic, 0.0);
        assert_eq!(ent.aleatoric, ent.total);
    }

    #[test]
    fn rejects_too_many_classes() {
        let k = 17;
        let ens = EnsembleOutput::with_equal_likelihoods(vec![ProbVector::uniform(k).unwrap()]).unwrap();
        assert!(matches!(capacity_lfp(&ens, 2.0, 1), Err(Error::TooManyClasses(17))));
    }

    #[test]
    fn subsets_iterator_enumerates_all() {
        let mut subs: Vec<u64> = subsets_of(0b1011).collect();
        subs.sort();
        assert_eq!(subs, vec![0, 1, 2, 3, 8, 9, 10, 11]);
        assert_eq!(subsets_of(0).collect::<Vec<_>>(), vec![0]);
    }
}
