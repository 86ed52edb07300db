use std::collections::HashSet;

use itertools::Itertools;

use super::OptimError;

/// Enumeration cost grows like `M 2^(M-1)`; beyond this use the
/// linear-programming route instead.
pub const MAX_ENUMERATED_MEMBERS: usize = 20;

const BOUND_TOL: f64 = 1e-12;

/// All vertices of `{s : lo <= s_m <= hi, sum s_m = 1}`.
///
/// A vertex has at most one coordinate strictly inside `(lo, hi)`, so every
/// vertex arises from choosing a free index and the set of remaining
/// coordinates sitting at `hi`; the free coordinate is then fixed by the sum.
/// Points whose free coordinate lands on a bound are generated once per free
/// index and deduplicated by their bound pattern.
pub fn box_simplex_vertices(members: usize, lo: f64, hi: f64) -> Result<Vec<Vec<f64>>, OptimError> {
    if members == 0 {
        return Err(OptimError::Malformed("at least one member is required".into()));
    }
    if members > MAX_ENUMERATED_MEMBERS {
        return Err(OptimError::TooManyMembers {
            members,
            max: MAX_ENUMERATED_MEMBERS,
        });
    }
    let m = members as f64;
    let infeasible = OptimError::InfeasibleBox { members, lo, hi };
    if !(lo.is_finite() && hi.is_finite()) || lo < 0.0 || lo > hi {
        return Err(infeasible);
    }
    if m * lo > 1.0 + BOUND_TOL || m * hi < 1.0 - BOUND_TOL {
        return Err(infeasible);
    }
    if hi - lo <= BOUND_TOL {
        return Ok(vec![vec![1.0 / m; members]]);
    }

    let mut vertices = Vec::new();
    let mut seen_patterns: HashSet<Vec<bool>> = HashSet::new();
    for free in 0..members {
        let others: Vec<usize> = (0..members).filter(|&i| i != free).collect();
        for n_high in 0..members {
            let value = 1.0 - n_high as f64 * hi - (members - 1 - n_high) as f64 * lo;
            if value < lo - BOUND_TOL || value > hi + BOUND_TOL {
                continue;
            }
            let snapped = if (value - lo).abs() <= BOUND_TOL {
                Some(false)
            } else if (value - hi).abs() <= BOUND_TOL {
                Some(true)
            } else {
                None
            };
            for high in others.iter().copied().combinations(n_high) {
                let mut point = vec![lo; members];
                for &i in &high {
                    point[i] = hi;
                }
                match snapped {
                    Some(free_high) => {
                        point[free] = if free_high { hi } else { lo };
                        let pattern: Vec<bool> = point.iter().map(|&v| v == hi).collect();
                        if seen_patterns.insert(pattern) {
                            vertices.push(point);
                        }
                    }
                    None => {
                        point[free] = value;
                        vertices.push(point);
                    }
                }
            }
        }
    }
    Ok(vertices)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn contains(points: &[Vec<f64>], target: &[f64]) -> bool {
        points
            .iter()
            .any(|p| p.iter().zip(target).all(|(a, b)| (a - b).abs() < 1e-12))
    }

    #[test]
    fn collapsed_box_is_uniform() {
        let v = box_simplex_vertices(4, 0.25, 0.25).unwrap();
        assert_eq!(v, vec![vec![0.25; 4]]);
    }

    #[test]
    fn two_members() {
        let v = box_simplex_vertices(2, 0.25, 1.0).unwrap();
        assert_eq!(v.len(), 2);
        assert!(contains(&v, &[0.25, 0.75]) && contains(&v, &[0.75, 0.25]));
    }

    #[test]
    fn single_member() {
        assert_eq!(box_simplex_vertices(1, 0.5, 2.0).unwrap(), vec![vec![1.0]]);
    }

    #[test]
    fn snapped_vertices_are_not_duplicated() {
        // lo = 0, hi = 0.5, M = 4: the vertices are the 6 points with two
        // coordinates at 0.5, each reachable from four free indices.
        let v = box_simplex_vertices(4, 0.0, 0.5).unwrap();
        assert_eq!(v.len(), 6);
    }

    /// Exhaustive oracle: every assignment of each coordinate to
    /// {lo, hi, free} with at most one free coordinate, solved for the free
    /// value and feasibility-checked, deduplicated by value.
    fn exhaustive(members: usize, lo: f64, hi: f64) -> Vec<Vec<f64>> {
        let mut out: Vec<Vec<f64>> = Vec::new();
        for code in 0..3usize.pow(members as u32) {
            let digits: Vec<usize> = (0..members).map(|i| code / 3usize.pow(i as u32) % 3).collect();
            let free: Vec<usize> = (0..members).filter(|&i| digits[i] == 2).collect();
            if free.len() > 1 {
                continue;
            }
            let mut point: Vec<f64> = digits.iter().map(|&d| if d == 1 { hi } else { lo }).collect();
            let fixed: f64 = (0..members).filter(|&i| digits[i] != 2).map(|i| point[i]).sum();
            if let Some(&f) = free.first() {
                point[f] = 1.0 - fixed;
                if point[f] < lo - 1e-12 || point[f] > hi + 1e-12 {
                    continue;
                }
            } else if (fixed - 1.0).abs() > 1e-12 {
                continue;
            }
            if !contains(&out, &point) {
                out.push(point);
            }
        }
        out
    }

    #[test]
    fn matches_exhaustive_enumeration() {
        for &(members, lo, hi) in &[(4, 1.0 / 8.0, 0.5), (3, 1.0 / 6.0, 2.0 / 3.0), (5, 0.1, 0.4), (4, 0.0, 0.5)] {
            let fast = box_simplex_vertices(members, lo, hi).unwrap();
            let slow = exhaustive(members, lo, hi);
            assert_eq!(fast.len(), slow.len(), "M={members}");
            for p in &fast {
                assert!(contains(&slow, p));
                assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn no_vertex_is_a_midpoint_of_two_others() {
        let v = box_simplex_vertices(4, 1.0 / 8.0, 0.5).unwrap();
        for (i, p) in v.iter().enumerate() {
            for a in 0..v.len() {
                for b in a + 1..v.len() {
                    if a == i || b == i {
                        continue;
                    }
                    let mid: Vec<f64> = v[a].iter().zip(&v[b]).map(|(x, y)| 0.5 * (x + y)).collect();
                    assert!(!p.iter().zip(&mid).all(|(x, y)| (x - y).abs() < 1e-12));
                }
            }
        }
    }

    #[test]
    fn rejects_infeasible_boxes() {
        assert!(matches!(
            box_simplex_vertices(3, 0.5, 0.9),
            Err(OptimError::InfeasibleBox { .. })
        ));
        assert!(matches!(
            box_simplex_vertices(21, 0.0, 1.0),
            Err(OptimError::TooManyMembers { .. })
        ));
    }
}
