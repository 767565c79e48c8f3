//! Exact maximum-weight fractional matching via simplex over the rationals.
//!
//! The LP is `max Σ w(e)·x(e)` subject to `Σ_{e ∋ v} x(e) ≤ 1` per vertex,
//! `x(e) ≤ 1` per edge, and `x ≥ 0`, solved on a dense tableau with Bland's
//! anti-cycling pivot rule starting from the all-slack basis.  Solutions are
//! always *basic*: the active constraints at the returned point have full
//! rank over the edge coordinates.
//!
//! Arithmetic is exact end to end.  A machine-word rational fast path is
//! tried first and the solve transparently restarts with arbitrary precision
//! if any intermediate value overflows; both paths follow the identical
//! pivot sequence, so the result does not depend on which one completes.

use crate::hypergraph::{Hypergraph, HypergraphError, WeightedInstance};
use crate::linalg::{rank_rat, Overflow, Scalar, Q128};
use crate::rational::Rat;
use num_traits::{One, Zero};
use std::cmp::Ordering;
use std::collections::BTreeSet;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LpError {
    #[error("point violates the fractional matching constraints")]
    InfeasiblePoint,
    #[error("point is not reduced (some coordinate is 0 or 1)")]
    NotReduced,
    #[error("point is not basic (active constraints do not have full rank)")]
    NotBasic,
    #[error(transparent)]
    Hypergraph(#[from] HypergraphError),
}

/// A constraint of the fractional matching polytope that holds with equality
/// at a given point.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum ActiveConstraint {
    /// `Σ_{e ∋ v} x(e) = 1` at vertex `v`.
    Vertex(usize),
    /// `x(e) = 0`.
    LowerBound(usize),
    /// `x(e) = 1`.
    UpperBound(usize),
}

/// An optimal basic solution of the fractional matching LP.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BasicSolution {
    /// One value per edge; a fractional matching.
    pub x: Vec<Rat>,
    /// `Σ w(e)·x(e)` at the optimum (the instance's `w*` when weights are
    /// the instance weights).
    pub objective: Rat,
    /// All constraints tight at `x`, vertices first, then bounds by edge.
    pub active: Vec<ActiveConstraint>,
}

/// Solves `max w·x` over the fractional matching polytope of `h` and returns
/// an optimal basic solution.  Weights may be arbitrary rationals (the
/// rounding loop feeds peeled weights through here, and those can be
/// negative).  Deterministic: fixed pivot rule, no randomness.
pub fn max_weight_basic_fractional_matching(h: &Hypergraph, w: &[Rat]) -> BasicSolution {
    assert_eq!(w.len(), h.edge_count(), "one weight per edge");
    let x = if h.edge_count() == 0 {
        Vec::new()
    } else {
        match simplex_as::<Q128>(h, w) {
            Ok(x) => x,
            Err(Overflow) => simplex_as::<Rat>(h, w).expect("arbitrary precision cannot overflow"),
        }
    };
    let objective = dot(w, &x);
    let active = active_constraints(h, &x);
    debug_assert!(h.is_fractional_matching(&x));
    BasicSolution {
        x,
        objective,
        active,
    }
}

/// Convenience wrapper solving an instance with its own weights.
pub fn solve_instance(inst: &WeightedInstance) -> BasicSolution {
    max_weight_basic_fractional_matching(inst.hypergraph(), inst.weights())
}

pub fn dot(w: &[Rat], x: &[Rat]) -> Rat {
    w.iter()
        .zip(x)
        .filter(|(_, xv)| !xv.is_zero())
        .map(|(wv, xv)| wv * xv)
        .sum()
}

fn active_constraints(h: &Hypergraph, x: &[Rat]) -> Vec<ActiveConstraint> {
    let one = Rat::one();
    let mut active = Vec::new();
    for v in 0..h.vertex_count() {
        let mut sum = Rat::zero();
        for &e in h.incident_edges(v) {
            sum += &x[e];
        }
        if sum == one {
            active.push(ActiveConstraint::Vertex(v));
        }
    }
    for (e, xv) in x.iter().enumerate() {
        if xv.is_zero() {
            active.push(ActiveConstraint::LowerBound(e));
        } else if *xv == one {
            active.push(ActiveConstraint::UpperBound(e));
        }
    }
    active
}

fn simplex_as<S: Scalar>(h: &Hypergraph, w: &[Rat]) -> Result<Vec<Rat>, Overflow> {
    let ws: Vec<S> = w.iter().map(S::from_rat).collect::<Result<_, _>>()?;
    let xs = simplex(h, &ws)?;
    Ok(xs.into_iter().map(|v| v.to_rat()).collect())
}

/// Primal simplex with Bland's rule on the tableau
/// `[vertex rows | bound rows]`, slack basis start.
fn simplex<S: Scalar>(h: &Hypergraph, w: &[S]) -> Result<Vec<S>, Overflow> {
    let m = h.edge_count();
    let n = h.vertex_count();
    let nrows = n + m;
    let ncols = m + nrows;

    let mut t: Vec<Vec<S>> = vec![vec![S::zero(); ncols]; nrows];
    let mut rhs: Vec<S> = vec![S::one(); nrows];
    for v in 0..n {
        for &e in h.incident_edges(v) {
            t[v][e] = S::one();
        }
        t[v][m + v] = S::one();
    }
    for e in 0..m {
        t[n + e][e] = S::one();
        t[n + e][m + n + e] = S::one();
    }
    let mut obj: Vec<S> = Vec::with_capacity(ncols);
    obj.extend(w.iter().cloned());
    obj.resize(ncols, S::zero());
    let mut basis: Vec<usize> = (m..m + nrows).collect();

    // Bland: entering column = lowest-index variable with positive reduced
    // cost (basic columns are exactly zero, so never re-picked)
    while let Some(p) = (0..ncols).find(|&j| obj[j].sign() > 0) {
        // leaving row = tightest ratio, ties by lowest basic variable index
        let mut best: Option<(S, usize)> = None;
        for i in 0..nrows {
            if t[i][p].sign() > 0 {
                let ratio = rhs[i].try_div(&t[i][p])?;
                let replace = match &best {
                    None => true,
                    Some((br, bi)) => match ratio.cmp_exact(br)? {
                        Ordering::Less => true,
                        Ordering::Equal => basis[i] < basis[*bi],
                        Ordering::Greater => false,
                    },
                };
                if replace {
                    best = Some((ratio, i));
                }
            }
        }
        let (_, r) =
            best.expect("the polytope is bounded, an improving column has a positive entry");

        // pivot on (r, p): normalize, then eliminate from all other rows
        let piv = t[r][p].clone();
        let one = S::one();
        if piv != one {
            for val in t[r].iter_mut() {
                if !val.is_zero() {
                    *val = val.try_div(&piv)?;
                }
            }
            rhs[r] = rhs[r].try_div(&piv)?;
        }
        let nz: Vec<usize> = (0..ncols).filter(|&j| !t[r][j].is_zero()).collect();
        let pivot_rhs_zero = rhs[r].is_zero();
        for i in 0..nrows {
            if i == r || t[i][p].is_zero() {
                continue;
            }
            let f = t[i][p].clone();
            for &j in &nz {
                let d = f.try_mul(&t[r][j])?;
                t[i][j] = t[i][j].try_sub(&d)?;
            }
            if !pivot_rhs_zero {
                let d = f.try_mul(&rhs[r])?;
                rhs[i] = rhs[i].try_sub(&d)?;
            }
        }
        if obj[p].sign() != 0 {
            let f = obj[p].clone();
            for &j in &nz {
                let d = f.try_mul(&t[r][j])?;
                obj[j] = obj[j].try_sub(&d)?;
            }
        }
        basis[r] = p;
    }

    let mut x = vec![S::zero(); m];
    for (i, &b) in basis.iter().enumerate() {
        if b < m {
            x[b] = rhs[i].clone();
        }
    }
    Ok(x)
}

/// Checks that `x` is a *basic* point of the fractional matching polytope:
/// feasible, and the normals of its active constraints span all edge
/// coordinates (rank equal to the number of edges).
pub fn verify_basic(h: &Hypergraph, x: &[Rat]) -> Result<bool, LpError> {
    if !h.is_fractional_matching(x) {
        return Err(LpError::InfeasiblePoint);
    }
    let m = h.edge_count();
    if m == 0 {
        return Ok(true);
    }
    let mut rows: Vec<Vec<Rat>> = Vec::new();
    for active in active_constraints(h, x) {
        let mut row = vec![Rat::zero(); m];
        match active {
            ActiveConstraint::Vertex(v) => {
                for &e in h.incident_edges(v) {
                    row[e] = Rat::one();
                }
            }
            ActiveConstraint::LowerBound(e) | ActiveConstraint::UpperBound(e) => {
                row[e] = Rat::one();
            }
        }
        rows.push(row);
    }
    Ok(rank_rat(&rows) == m)
}

/// For a reduced basic fractional matching `x`, checks `|L| ≤ |B(L)|` where
/// `B(L)` is the set of tight vertices covered by the edge set `L`.
pub fn tight_cover_inequality(
    h: &Hypergraph,
    x: &[Rat],
    l: &BTreeSet<usize>,
) -> Result<bool, LpError> {
    if !h.is_reduced(x) {
        if !h.is_fractional_matching(x) {
            return Err(LpError::InfeasiblePoint);
        }
        return Err(LpError::NotReduced);
    }
    if !verify_basic(h, x)? {
        return Err(LpError::NotBasic);
    }
    let tight: BTreeSet<usize> = h.tight_vertices(x)?.into_iter().collect();
    let mut covered: BTreeSet<usize> = BTreeSet::new();
    for &e in l {
        if e >= h.edge_count() {
            return Err(HypergraphError::EdgeIndexOutOfRange {
                index: e,
                edge_count: h.edge_count(),
            }
            .into());
        }
        for &v in h.edge(e) {
            if tight.contains(&v) {
                covered.insert(v);
            }
        }
    }
    Ok(l.len() <= covered.len())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{rat, rat_int};

    fn triangle() -> Hypergraph {
        Hypergraph::build(3, vec![vec![0, 1], vec![1, 2], vec![0, 2]]).unwrap()
    }

    fn fano() -> Hypergraph {
        Hypergraph::build(
            7,
            vec![
                vec![0, 1, 2],
                vec![0, 3, 4],
                vec![0, 5, 6],
                vec![1, 3, 5],
                vec![1, 4, 6],
                vec![2, 3, 6],
                vec![2, 4, 5],
            ],
        )
        .unwrap()
    }

    #[test]
    fn triangle_optimum_is_all_halves() {
        let h = triangle();
        let sol = max_weight_basic_fractional_matching(&h, &vec![Rat::one(); 3]);
        assert_eq!(sol.x, vec![rat(1, 2), rat(1, 2), rat(1, 2)]);
        assert_eq!(sol.objective, rat(3, 2));
        assert!(verify_basic(&h, &sol.x).unwrap());
        assert_eq!(
            sol.active,
            vec![
                ActiveConstraint::Vertex(0),
                ActiveConstraint::Vertex(1),
                ActiveConstraint::Vertex(2),
            ]
        );
    }

    #[test]
    fn fano_optimum_is_all_thirds() {
        let h = fano();
        let sol = max_weight_basic_fractional_matching(&h, &vec![Rat::one(); 7]);
        assert_eq!(sol.x, vec![rat(1, 3); 7]);
        assert_eq!(sol.objective, rat(7, 3));
        assert!(verify_basic(&h, &sol.x).unwrap());
    }

    #[test]
    fn nonpositive_weights_give_zero_solution() {
        let h = triangle();
        let sol = max_weight_basic_fractional_matching(&h, &vec![rat_int(-1); 3]);
        assert_eq!(sol.x, vec![Rat::zero(); 3]);
        assert_eq!(sol.objective, Rat::zero());
        assert!(verify_basic(&h, &sol.x).unwrap());

        let sol0 = max_weight_basic_fractional_matching(&h, &vec![Rat::zero(); 3]);
        assert_eq!(sol0.objective, Rat::zero());
    }

    #[test]
    fn two_edge_path_picks_first_edge() {
        let h = Hypergraph::build(3, vec![vec![0, 1], vec![1, 2]]).unwrap();
        let sol = max_weight_basic_fractional_matching(&h, &vec![Rat::one(); 2]);
        assert_eq!(sol.objective, rat_int(1));
        assert_eq!(sol.x, vec![rat_int(1), rat_int(0)]);
        assert!(verify_basic(&h, &sol.x).unwrap());
    }

    #[test]
    fn weighted_instance_favours_heavy_edge() {
        let h = Hypergraph::build(3, vec![vec![0, 1], vec![1, 2]]).unwrap();
        let sol = max_weight_basic_fractional_matching(&h, &[rat_int(1), rat_int(5)]);
        assert_eq!(sol.x, vec![rat_int(0), rat_int(1)]);
        assert_eq!(sol.objective, rat_int(5));
    }

    #[test]
    fn single_edge_active_set() {
        let h = Hypergraph::build(2, vec![vec![0, 1]]).unwrap();
        let sol = max_weight_basic_fractional_matching(&h, &[Rat::one()]);
        assert_eq!(sol.x, vec![Rat::one()]);
        assert_eq!(
            sol.active,
            vec![
                ActiveConstraint::Vertex(0),
                ActiveConstraint::Vertex(1),
                ActiveConstraint::UpperBound(0),
            ]
        );
        assert!(verify_basic(&h, &sol.x).unwrap());
    }

    #[test]
    fn edgeless_instance() {
        let h = Hypergraph::build(4, vec![]).unwrap();
        let sol = max_weight_basic_fractional_matching(&h, &[]);
        assert!(sol.x.is_empty());
        assert_eq!(sol.objective, Rat::zero());
        assert!(verify_basic(&h, &sol.x).unwrap());
    }

    #[test]
    fn verify_basic_rejects_interior_points() {
        let h = triangle();
        // strictly inside the polytope: nothing is tight
        let interior = vec![rat(1, 4), rat(1, 4), rat(1, 4)];
        assert!(!verify_basic(&h, &interior).unwrap());
        // tight at every vertex: basic
        assert!(verify_basic(&h, &[rat(1, 2), rat(1, 2), rat(1, 2)]).unwrap());
        // infeasible
        assert_eq!(
            verify_basic(&h, &[rat_int(1), rat_int(1), rat_int(0)]),
            Err(LpError::InfeasiblePoint)
        );
    }

    #[test]
    fn verify_basic_mixed_bounds() {
        let h = Hypergraph::build(5, vec![vec![0, 1], vec![2, 3], vec![1, 2], vec![4]]).unwrap();
        // x = (1, 1, 0, 0): actives include both bound kinds
        let x = vec![rat_int(1), rat_int(1), rat_int(0), rat_int(0)];
        assert!(verify_basic(&h, &x).unwrap());
    }

    #[test]
    fn tight_cover_inequality_on_triangle() {
        let h = triangle();
        let x = vec![rat(1, 2), rat(1, 2), rat(1, 2)];
        for l in [
            BTreeSet::from([0]),
            BTreeSet::from([0, 1]),
            BTreeSet::from([0, 1, 2]),
        ] {
            assert!(tight_cover_inequality(&h, &x, &l).unwrap());
        }
        // non-reduced input is rejected
        let unit = vec![rat_int(1), rat_int(0), rat_int(0)];
        assert_eq!(
            tight_cover_inequality(&h, &unit, &BTreeSet::from([0])),
            Err(LpError::NotReduced)
        );
    }

    #[test]
    fn solver_matches_across_scalar_widths() {
        // weights with denominators large enough to exercise reductions
        let h = fano();
        let w: Vec<Rat> = (0..7).map(|i| rat(1000003 + i, 999983)).collect();
        let sol = max_weight_basic_fractional_matching(&h, &w);
        assert!(verify_basic(&h, &sol.x).unwrap());
        assert_eq!(sol.objective, dot(&w, &sol.x));
        // forcing the slow path must give the identical point
        let slow = simplex_as::<Rat>(&h, &w).unwrap();
        assert_eq!(slow, sol.x);
    }
}
