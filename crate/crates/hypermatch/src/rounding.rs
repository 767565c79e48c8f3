//! Iterated rounding of fractional matchings with per-edge discounts.
//!
//! The loop repeatedly drops non-positive-weight edges, solves the exact LP,
//! picks the lowest-index *unstuck* edge `e` — one with
//! `Σ_{f ∈ N(e)} g(f)·x(f) ≤ 1 − g(e)·x(e)` — and peels its weight into its
//! neighbors (`w'(f) = w(f) − w(e)·g(f)/g(e)`).  Unwinding adds each peeled
//! edge back whenever the deeper matching left its neighborhood empty.  The
//! returned matching `M` satisfies `Σ_{f ∈ M} w(f)/g(f) ≥ w*` with the
//! original weights, where `w*` is the LP optimum.
//!
//! If at some state *every* live edge is stuck, the loop stops and returns a
//! certificate: the support of the current LP solution, which is a reduced
//! basic fractional matching of the live sub-hypergraph violating the
//! unstuck condition strictly on every edge.  Certificates are independently
//! checkable with [`verify_certificate`].

use crate::discounts::DiscountProfile;
use crate::hypergraph::{Hypergraph, HypergraphError, Matching, WeightedInstance};
use crate::lp::{self, LpError};
use crate::rational::Rat;
use num_traits::{One, Signed, Zero};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RoundingError {
    #[error(transparent)]
    Hypergraph(#[from] HypergraphError),
    #[error("discount profile has {discounts} values for {edges} edges")]
    ProfileMismatch { discounts: usize, edges: usize },
    #[error("value vector has {values} entries for {edges} edges")]
    ValueMismatch { values: usize, edges: usize },
}

/// Why [`verify_outcome`] rejected a claimed outcome.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum VerifyFailure {
    #[error("claimed matching is not a matching: {0}")]
    MatchingInvalid(HypergraphError),
    #[error("claimed guarantee {claimed} differs from recomputed {actual}")]
    GuaranteeMismatch { claimed: String, actual: String },
    #[error("claimed LP optimum {claimed} differs from recomputed {actual}")]
    OptimumMismatch { claimed: String, actual: String },
    #[error("guarantee {guarantee} falls below the LP optimum {optimum}")]
    GuaranteeBelowOptimum { guarantee: String, optimum: String },
    #[error("stuck certificate invalid: {0}")]
    Certificate(#[from] CertificateFailure),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CertificateFailure {
    #[error("certificate has no edges")]
    Empty,
    #[error("certificate edge list is not strictly increasing or out of range")]
    MalformedEdges,
    #[error("certificate has {xs} values and {slacks} slacks for {edges} edges")]
    LengthMismatch {
        edges: usize,
        xs: usize,
        slacks: usize,
    },
    #[error("certificate contains singleton edge {edge}")]
    SingletonEdge { edge: usize },
    #[error("certificate point is not a reduced fractional matching of the sub-hypergraph")]
    NotReduced,
    #[error("certificate point is not basic on the sub-hypergraph")]
    NotBasic,
    #[error("edge {edge} is not strictly stuck (slack {slack})")]
    NotStuck { edge: usize, slack: String },
    #[error("stored slack for edge {edge} is {stored}, recomputed {actual}")]
    SlackMismatch {
        edge: usize,
        stored: String,
        actual: String,
    },
}

/// Proof that the rounding loop cannot proceed: a reduced basic fractional
/// matching of the sub-hypergraph on `edges` (original indices) on which the
/// strict stuck inequality holds at every edge.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StuckCertificate {
    /// Strictly increasing original edge indices.
    pub edges: Vec<usize>,
    /// `x(e)` per certificate edge, each strictly inside `(0, 1)`.
    pub x: Vec<Rat>,
    /// Per-edge `Σ_{f ∈ N(e)} g(f)x(f) − (1 − g(e)x(e))`, each positive.
    pub slacks: Vec<Rat>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TraceAction {
    /// Edge removed because its current weight was ≤ 0.
    DropNonpositive,
    /// Edge peeled; `weight` is its peeled weight at that moment and `kept`
    /// tells whether the unwind added it to the matching.
    Peel { weight: Rat, kept: bool },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TraceStep {
    pub edge: usize,
    pub action: TraceAction,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SuccessReport {
    pub matching: Matching,
    /// `Σ_{f ∈ M} w(f)/g(f)` in the original weights.
    pub guarantee: Rat,
    /// `w*`, the fractional matching LP optimum of the instance.
    pub lp_optimum: Rat,
    pub trace: Vec<TraceStep>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StuckReport {
    pub certificate: StuckCertificate,
    pub trace: Vec<TraceStep>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum RoundingOutcome {
    Success(SuccessReport),
    Stuck(StuckReport),
}

fn check_profile(h: &Hypergraph, g: &DiscountProfile) -> Result<(), RoundingError> {
    if g.values().len() != h.edge_count() {
        return Err(RoundingError::ProfileMismatch {
            discounts: g.values().len(),
            edges: h.edge_count(),
        });
    }
    Ok(())
}

fn check_values(h: &Hypergraph, x: &[Rat]) -> Result<(), RoundingError> {
    if x.len() != h.edge_count() {
        return Err(RoundingError::ValueMismatch {
            values: x.len(),
            edges: h.edge_count(),
        });
    }
    Ok(())
}

/// `Σ_{f ∈ N(e)} g(f)·x(f)` minus `1 − g(e)·x(e)`; positive iff `e` is
/// strictly stuck.
fn stuck_slack(h: &Hypergraph, g: &DiscountProfile, x: &[Rat], e: usize) -> Rat {
    let mut lhs = Rat::zero();
    for &f in h.nbrs(e) {
        if !x[f].is_zero() {
            lhs += g.value(f) * &x[f];
        }
    }
    lhs - Rat::one() + g.value(e) * &x[e]
}

/// Whether `Σ_{f ∈ N(e)} g(f)·x(f) > 1 − g(e)·x(e)` holds at edge `e`.
pub fn is_stuck_edge(
    h: &Hypergraph,
    g: &DiscountProfile,
    x: &[Rat],
    e: usize,
) -> Result<bool, RoundingError> {
    check_profile(h, g)?;
    check_values(h, x)?;
    h.neighborhood(e)?; // index validation
    Ok(stuck_slack(h, g, x, e).is_positive())
}

/// The lowest-index edge that is *not* stuck, or `None` when every edge is.
pub fn find_unstuck_edge(
    h: &Hypergraph,
    g: &DiscountProfile,
    x: &[Rat],
) -> Result<Option<usize>, RoundingError> {
    check_profile(h, g)?;
    check_values(h, x)?;
    Ok((0..h.edge_count()).find(|&e| !stuck_slack(h, g, x, e).is_positive()))
}

/// The weight vector after peeling edge `e`:
/// `w'(f) = w(f) − w(e)·g(f)/g(e)` for `f ∈ N(e)`, other entries unchanged.
pub fn peel_weights(
    w: &[Rat],
    h: &Hypergraph,
    e: usize,
    g: &DiscountProfile,
) -> Result<Vec<Rat>, RoundingError> {
    check_profile(h, g)?;
    check_values(h, w)?;
    let neighbors = h.neighborhood(e)?;
    let ratio = &w[e] / g.value(e);
    let mut out = w.to_vec();
    for &f in neighbors {
        out[f] -= &ratio * g.value(f);
    }
    Ok(out)
}

/// Runs the full rounding loop on an instance.
pub fn find_matching(
    inst: &WeightedInstance,
    g: &DiscountProfile,
) -> Result<RoundingOutcome, RoundingError> {
    let h = inst.hypergraph();
    check_profile(h, g)?;
    let m = h.edge_count();
    let lp_optimum = lp::solve_instance(inst).objective;

    let mut alive = vec![true; m];
    let mut alive_count = m;
    let mut w: Vec<Rat> = inst.weights().to_vec();
    let mut trace: Vec<TraceStep> = Vec::new();

    while alive_count > 0 {
        // drop the lowest-index live edge whose current weight is ≤ 0
        if let Some(e) = (0..m).find(|&e| alive[e] && !w[e].is_positive()) {
            alive[e] = false;
            alive_count -= 1;
            trace.push(TraceStep {
                edge: e,
                action: TraceAction::DropNonpositive,
            });
            continue;
        }
        // solve the LP restricted to the live edges
        let live: Vec<usize> = (0..m).filter(|&e| alive[e]).collect();
        let sub = h
            .subgraph(&live)
            .expect("live edge indices are valid by construction");
        let sub_w: Vec<Rat> = live.iter().map(|&e| w[e].clone()).collect();
        let sol = lp::max_weight_basic_fractional_matching(&sub, &sub_w);
        let mut x = vec![Rat::zero(); m];
        for (i, &e) in live.iter().enumerate() {
            x[e] = sol.x[i].clone();
        }
        // the unstuck scan only looks at live edges; dead ones carry x = 0,
        // so full-graph neighborhood sums equal the sub-hypergraph sums
        match live
            .iter()
            .copied()
            .find(|&e| !stuck_slack(h, g, &x, e).is_positive())
        {
            Some(e) => {
                let weight = w[e].clone();
                w = peel_weights(&w, h, e, g)?;
                alive[e] = false;
                alive_count -= 1;
                trace.push(TraceStep {
                    edge: e,
                    action: TraceAction::Peel {
                        weight,
                        kept: false,
                    },
                });
            }
            None => {
                let certificate = build_certificate(h, g, &x, &live);
                debug_assert_eq!(verify_certificate(h, g, &certificate), Ok(()));
                return Ok(RoundingOutcome::Stuck(StuckReport { certificate, trace }));
            }
        }
    }

    // unwind: walk the removals backwards, re-adding peeled edges whose
    // neighborhood stayed empty in the deeper matching
    let mut used = vec![false; h.vertex_count()];
    let mut picked: Vec<usize> = Vec::new();
    for step in trace.iter_mut().rev() {
        if let TraceAction::Peel { kept, .. } = &mut step.action {
            let e = step.edge;
            if h.edge(e).iter().all(|&v| !used[v]) {
                for &v in h.edge(e) {
                    used[v] = true;
                }
                picked.push(e);
                *kept = true;
            }
        }
    }
    let matching = Matching::new(h, picked).expect("unwind maintains pairwise disjointness");
    let guarantee: Rat = matching
        .edge_indices()
        .map(|f| inst.weight(f) / g.value(f))
        .sum();
    debug_assert!(guarantee >= lp_optimum);
    Ok(RoundingOutcome::Success(SuccessReport {
        matching,
        guarantee,
        lp_optimum,
        trace,
    }))
}

/// The certificate for an all-stuck state: the support of the live LP
/// solution, with its strict stuck slacks.
fn build_certificate(
    h: &Hypergraph,
    g: &DiscountProfile,
    x: &[Rat],
    live: &[usize],
) -> StuckCertificate {
    let edges: Vec<usize> = live
        .iter()
        .copied()
        .filter(|&e| x[e].is_positive())
        .collect();
    let xs: Vec<Rat> = edges.iter().map(|&e| x[e].clone()).collect();
    let slacks: Vec<Rat> = edges.iter().map(|&e| stuck_slack(h, g, x, e)).collect();
    StuckCertificate {
        edges,
        x: xs,
        slacks,
    }
}

/// Independently re-checks a stuck certificate against the hypergraph and
/// discounts: well-formed edge list without singletons, reduced basic
/// fractional matching of the sub-hypergraph, and strictly positive stuck
/// slack on every edge, matching the stored slacks.
pub fn verify_certificate(
    h: &Hypergraph,
    g: &DiscountProfile,
    cert: &StuckCertificate,
) -> Result<(), CertificateFailure> {
    if cert.edges.is_empty() {
        return Err(CertificateFailure::Empty);
    }
    let increasing = cert.edges.windows(2).all(|p| p[0] < p[1]);
    if !increasing || *cert.edges.last().unwrap() >= h.edge_count() {
        return Err(CertificateFailure::MalformedEdges);
    }
    if cert.x.len() != cert.edges.len() || cert.slacks.len() != cert.edges.len() {
        return Err(CertificateFailure::LengthMismatch {
            edges: cert.edges.len(),
            xs: cert.x.len(),
            slacks: cert.slacks.len(),
        });
    }
    if let Some(&e) = cert.edges.iter().find(|&&e| h.edge(e).len() == 1) {
        return Err(CertificateFailure::SingletonEdge { edge: e });
    }
    let sub = h
        .subgraph(&cert.edges)
        .map_err(|_| CertificateFailure::MalformedEdges)?;
    if !sub.is_reduced(&cert.x) {
        return Err(CertificateFailure::NotReduced);
    }
    match lp::verify_basic(&sub, &cert.x) {
        Ok(true) => {}
        Ok(false) | Err(LpError::InfeasiblePoint) => return Err(CertificateFailure::NotBasic),
        Err(_) => return Err(CertificateFailure::NotBasic),
    }
    // strict stuck slack per edge, evaluated inside the sub-hypergraph
    for (i, &orig) in cert.edges.iter().enumerate() {
        let mut lhs = Rat::zero();
        for &j in sub.nbrs(i) {
            lhs += g.value(cert.edges[j]) * &cert.x[j];
        }
        let slack = lhs - Rat::one() + g.value(orig) * &cert.x[i];
        if !slack.is_positive() {
            return Err(CertificateFailure::NotStuck {
                edge: orig,
                slack: crate::rational::format_rat(&slack),
            });
        }
        if slack != cert.slacks[i] {
            return Err(CertificateFailure::SlackMismatch {
                edge: orig,
                stored: crate::rational::format_rat(&cert.slacks[i]),
                actual: crate::rational::format_rat(&slack),
            });
        }
    }
    Ok(())
}

/// Re-derives everything checkable about a claimed outcome: matchings must
/// be matchings with the exact claimed guarantee and LP optimum, guarantee
/// at least the optimum; stuck outcomes must carry a valid certificate.
pub fn verify_outcome(
    inst: &WeightedInstance,
    g: &DiscountProfile,
    outcome: &RoundingOutcome,
) -> Result<(), VerifyFailure> {
    match outcome {
        RoundingOutcome::Success(report) => {
            let matching = Matching::new(inst.hypergraph(), report.matching.edge_indices())
                .map_err(VerifyFailure::MatchingInvalid)?;
            let actual: Rat = matching
                .edge_indices()
                .map(|f| inst.weight(f) / g.value(f))
                .sum();
            if actual != report.guarantee {
                return Err(VerifyFailure::GuaranteeMismatch {
                    claimed: crate::rational::format_rat(&report.guarantee),
                    actual: crate::rational::format_rat(&actual),
                });
            }
            let optimum = lp::solve_instance(inst).objective;
            if optimum != report.lp_optimum {
                return Err(VerifyFailure::OptimumMismatch {
                    claimed: crate::rational::format_rat(&report.lp_optimum),
                    actual: crate::rational::format_rat(&optimum),
                });
            }
            if report.guarantee < optimum {
                return Err(VerifyFailure::GuaranteeBelowOptimum {
                    guarantee: crate::rational::format_rat(&report.guarantee),
                    optimum: crate::rational::format_rat(&optimum),
                });
            }
            Ok(())
        }
        RoundingOutcome::Stuck(report) => {
            verify_certificate(inst.hypergraph(), g, &report.certificate)?;
            Ok(())
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::discounts::Schedule;
    use crate::rational::{rat, rat_int};

    fn triangle_instance() -> WeightedInstance {
        let h = Hypergraph::build(3, vec![vec![0, 1], vec![1, 2], vec![0, 2]]).unwrap();
        WeightedInstance::unit(h)
    }

    fn fano_instance() -> WeightedInstance {
        let h = Hypergraph::build(
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
        .unwrap();
        WeightedInstance::unit(h)
    }

    fn profile(inst: &WeightedInstance, s: &Schedule) -> DiscountProfile {
        DiscountProfile::from_schedule(inst.hypergraph(), s).unwrap()
    }

    fn constant_profile(inst: &WeightedInstance, value: Rat) -> DiscountProfile {
        DiscountProfile::from_schedule(inst.hypergraph(), &Schedule::Constant(value)).unwrap()
    }

    #[test]
    fn stuck_edge_detection_on_fano() {
        let inst = fano_instance();
        let h = inst.hypergraph();
        let x = vec![rat(1, 3); 7];
        let all_one = constant_profile(&inst, Rat::one());
        // Σ over 6 neighbors of 1·(1/3) = 2 > 1 − 1/3
        assert!(is_stuck_edge(h, &all_one, &x, 0).unwrap());
        assert_eq!(find_unstuck_edge(h, &all_one, &x).unwrap(), None);

        // with g = 3/7 both sides are exactly 6/7: unstuck
        let g_star = profile(&inst, &Schedule::HStar);
        assert!(!is_stuck_edge(h, &g_star, &x, 0).unwrap());
        assert_eq!(find_unstuck_edge(h, &g_star, &x).unwrap(), Some(0));
    }

    #[test]
    fn peel_spreads_discounted_weight() {
        let inst = triangle_instance();
        let g = constant_profile(&inst, rat(2, 3));
        let w = vec![Rat::one(); 3];
        let peeled = peel_weights(&w, inst.hypergraph(), 0, &g).unwrap();
        // w'(f) = 1 − 1·(2/3)/(2/3) = 0 for both neighbors, e untouched
        assert_eq!(peeled, vec![rat_int(1), rat_int(0), rat_int(0)]);
    }

    #[test]
    fn triangle_with_pair_discount_matches_guarantee_exactly() {
        let inst = triangle_instance();
        let g = constant_profile(&inst, rat(2, 3));
        let RoundingOutcome::Success(report) = find_matching(&inst, &g).unwrap() else {
            panic!("triangle with g = 2/3 must succeed");
        };
        assert_eq!(report.matching.edge_indices().collect::<Vec<_>>(), vec![0]);
        assert_eq!(report.guarantee, rat(3, 2));
        assert_eq!(report.lp_optimum, rat(3, 2));
        assert_eq!(report.trace.len(), 3);
        assert_eq!(
            report.trace[0].action,
            TraceAction::Peel {
                weight: Rat::one(),
                kept: true
            }
        );
        assert_eq!(report.trace[1].action, TraceAction::DropNonpositive);
        verify_outcome(&inst, &g, &RoundingOutcome::Success(report)).unwrap();
    }

    #[test]
    fn fano_with_h_star_meets_fks_value() {
        let inst = fano_instance();
        let g = profile(&inst, &Schedule::HStar);
        let RoundingOutcome::Success(report) = find_matching(&inst, &g).unwrap() else {
            panic!("Fano with h* must succeed");
        };
        assert_eq!(report.matching.len(), 1);
        assert_eq!(report.guarantee, rat(7, 3));
        assert_eq!(report.lp_optimum, rat(7, 3));
        verify_outcome(&inst, &g, &RoundingOutcome::Success(report)).unwrap();
    }

    #[test]
    fn fano_with_unit_discounts_gets_stuck() {
        let inst = fano_instance();
        let g = constant_profile(&inst, Rat::one());
        let RoundingOutcome::Stuck(report) = find_matching(&inst, &g).unwrap() else {
            panic!("Fano with g ≡ 1 must get stuck");
        };
        let cert = &report.certificate;
        assert_eq!(cert.edges, (0..7).collect::<Vec<_>>());
        assert_eq!(cert.x, vec![rat(1, 3); 7]);
        assert_eq!(cert.slacks, vec![rat(4, 3); 7]);
        assert!(report.trace.is_empty());
        assert_eq!(verify_certificate(inst.hypergraph(), &g, cert), Ok(()));
    }

    #[test]
    fn zero_weights_give_empty_matching() {
        let h = Hypergraph::build(3, vec![vec![0, 1], vec![1, 2]]).unwrap();
        let inst = WeightedInstance::new(h, vec![Rat::zero(), Rat::zero()]).unwrap();
        let g = constant_profile(&inst, rat(1, 2));
        let RoundingOutcome::Success(report) = find_matching(&inst, &g).unwrap() else {
            panic!("all-zero weights must succeed trivially");
        };
        assert!(report.matching.is_empty());
        assert_eq!(report.guarantee, Rat::zero());
        assert_eq!(report.lp_optimum, Rat::zero());
        assert!(report
            .trace
            .iter()
            .all(|s| s.action == TraceAction::DropNonpositive));
    }

    #[test]
    fn disjoint_edges_all_kept() {
        let h = Hypergraph::build(6, vec![vec![0, 1], vec![2, 3], vec![4, 5]]).unwrap();
        let inst = WeightedInstance::unit(h);
        let g = constant_profile(&inst, rat(2, 3));
        let RoundingOutcome::Success(report) = find_matching(&inst, &g).unwrap() else {
            panic!("disjoint edges must succeed");
        };
        assert_eq!(report.matching.len(), 3);
        assert_eq!(report.guarantee, rat(9, 2)); // 3 · (1 / (2/3))
        assert_eq!(report.lp_optimum, rat_int(3));
    }

    #[test]
    fn verify_rejects_tampering() {
        let inst = fano_instance();
        let g = profile(&inst, &Schedule::HStar);
        let RoundingOutcome::Success(mut report) = find_matching(&inst, &g).unwrap() else {
            panic!();
        };
        report.guarantee += Rat::one();
        assert!(matches!(
            verify_outcome(&inst, &g, &RoundingOutcome::Success(report)),
            Err(VerifyFailure::GuaranteeMismatch { .. })
        ));

        let g1 = constant_profile(&inst, Rat::one());
        let RoundingOutcome::Stuck(report) = find_matching(&inst, &g1).unwrap() else {
            panic!();
        };
        let mut dropped_edge = report.certificate.clone();
        dropped_edge.edges.pop();
        dropped_edge.x.pop();
        dropped_edge.slacks.pop();
        assert!(verify_certificate(inst.hypergraph(), &g1, &dropped_edge).is_err());

        let mut bad_slack = report.certificate.clone();
        bad_slack.slacks[0] += Rat::one();
        assert_eq!(
            verify_certificate(inst.hypergraph(), &g1, &bad_slack),
            Err(CertificateFailure::SlackMismatch {
                edge: 0,
                stored: "7/3".to_string(),
                actual: "4/3".to_string(),
            })
        );

        let mut bad_x = report.certificate.clone();
        bad_x.x[0] = rat(1, 2);
        assert!(verify_certificate(inst.hypergraph(), &g1, &bad_x).is_err());
    }

    #[test]
    fn profile_mismatch_is_reported() {
        let inst = triangle_instance();
        let other = Hypergraph::build(2, vec![vec![0, 1]]).unwrap();
        let g = DiscountProfile::from_schedule(&other, &Schedule::Baseline).unwrap();
        assert!(matches!(
            find_matching(&inst, &g),
            Err(RoundingError::ProfileMismatch { .. })
        ));
    }
}
