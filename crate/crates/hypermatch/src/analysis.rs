//! Analytical tools: bi-uniform schedule certification, maximal-discount
//! search, and exhaustive oracles for small instances.
//!
//! The bi-uniform setting has edges of two sizes `k < ℓ` with discounts
//! `p = h(k)` and `q = h(ℓ)`.  A stuck state is impossible whenever a
//! per-overlap-count inequality holds for every admissible count `n` of
//! small edges meeting a large one; `n` ranges below the overlap limit
//! `T = p(k−1)ℓ / ((p−q)k)`.  Checking the inequality at the integer counts
//! (optionally on a rational grid) certifies the discount pair.
//!
//! The oracles — exhaustive matching search, polytope vertex enumeration,
//! and stuck-point search — exist to cross-check the LP and the rounding
//! loop on small instances, so they favor transparency over speed and
//! refuse inputs beyond hard caps.

use crate::discounts::{fks_factor, h_star, DiscountError, DiscountProfile};
use crate::hypergraph::{Hypergraph, HypergraphError, Matching, WeightedInstance};
use crate::linalg::{self, Overflow, Scalar, Q128};
use crate::lp;
use crate::rational::{format_rat, rat, rat_int, Rat};
use crate::rounding::StuckCertificate;
use num_traits::{One, Signed, Zero};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AnalysisError {
    #[error("discounts p and q are equal; the overlap limit is undefined")]
    DegenerateEqualDiscounts,
    #[error("overlap count {n} outside the admissible range [0, T)")]
    OutOfRangeN { n: String },
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error("instance has {edges} edges, above the exhaustive-search cap {cap}")]
    TooLarge { edges: usize, cap: usize },
    #[error("no feasible discount q found above the tolerance")]
    NoFeasibleQ,
    #[error(transparent)]
    Hypergraph(#[from] HypergraphError),
    #[error(transparent)]
    Discounts(#[from] DiscountError),
}

/// Bi-uniform setting: edge sizes `k < ℓ` with discounts `p` on size-k and
/// `q` on size-ℓ edges, `0 < q ≤ p ≤ 1`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BiUniformParams {
    pub k: u32,
    pub l: u32,
    pub p: Rat,
    pub q: Rat,
}

impl BiUniformParams {
    pub fn new(k: u32, l: u32, p: Rat, q: Rat) -> Result<Self, AnalysisError> {
        if k < 2 || l <= k {
            return Err(AnalysisError::InvalidParams(format!(
                "need 2 ≤ k < ℓ, got k = {k}, ℓ = {l}"
            )));
        }
        if !q.is_positive() || q > p || p > Rat::one() {
            return Err(AnalysisError::InvalidParams(
                "discounts must satisfy 0 < q ≤ p ≤ 1".to_string(),
            ));
        }
        Ok(Self { k, l, p, q })
    }
}

/// The overlap limit `T = p(k−1)ℓ / ((p−q)k)`: the number of small edges
/// meeting a large one never reaches `T` in a stuck state.
pub fn overlap_limit(params: &BiUniformParams) -> Result<Rat, AnalysisError> {
    if params.p == params.q {
        return Err(AnalysisError::DegenerateEqualDiscounts);
    }
    let k = rat_int(i64::from(params.k));
    let l = rat_int(i64::from(params.l));
    let num = &params.p * (&k - Rat::one()) * &l;
    let den = (&params.p - &params.q) * &k;
    Ok(num / den)
}

/// The per-count inequality certifying that no stuck state exists with `n`
/// small edges meeting a large edge:
///
/// `[pq(k−1)(ℓ−1) + n(p−q)²] / [p(k−1)ℓ − kn(p−q)]`
/// `≥ [p(k−1)(qℓ−1) + n(p−q)(pk−1)] / [p(k−1)]`.
///
/// Defined for rational `n` with `0 ≤ n < T` (the left denominator must be
/// positive).
pub fn overlap_inequality_holds(params: &BiUniformParams, n: &Rat) -> Result<bool, AnalysisError> {
    if params.p == params.q {
        return Err(AnalysisError::DegenerateEqualDiscounts);
    }
    let k = rat_int(i64::from(params.k));
    let l = rat_int(i64::from(params.l));
    let one = Rat::one();
    let p = &params.p;
    let q = &params.q;
    let d = p - q;

    let lhs_num = p * q * (&k - &one) * (&l - &one) + n * &d * &d;
    let lhs_den = p * (&k - &one) * &l - &k * n * &d;
    if n.is_negative() || !lhs_den.is_positive() {
        return Err(AnalysisError::OutOfRangeN { n: format_rat(n) });
    }
    let rhs_num = p * (&k - &one) * (q * &l - &one) + n * &d * (p * &k - &one);
    let rhs_den = p * (&k - &one);
    // cross-multiply; both denominators are positive
    Ok(&lhs_num * &rhs_den >= &rhs_num * &lhs_den)
}

/// How to sweep the overlap counts when certifying a discount pair.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CheckMode {
    /// All integer counts `0..=⌊T⌋` (skipping a degenerate `n = T`, which is
    /// reported in the `excluded` field).  Integer counts are what actual
    /// hypergraphs realize, and the inequality at the integers certifies the
    /// pair.
    Integer,
    /// The integer counts plus all multiples of `step` in `[0, T)`: a denser
    /// numeric surrogate for checking the inequality over the whole real
    /// range.
    Grid { step: Rat },
}

/// The default grid spacing: one thousandth of the overlap limit.
pub fn default_grid_step(params: &BiUniformParams) -> Result<Rat, AnalysisError> {
    Ok(overlap_limit(params)? / rat_int(1000))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OverlapPoint {
    pub n: Rat,
    pub holds: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BiUniformReport {
    pub overlap_limit: Rat,
    /// `p ≤ h*(k)`, required alongside the per-count inequality.
    pub p_within_fks: bool,
    pub points: Vec<OverlapPoint>,
    /// An integral `n = T` is outside the inequality's domain and is skipped.
    pub excluded: Option<Rat>,
    /// True iff `p_within_fks` and every checked point holds.
    pub certified: bool,
}

/// Certifies a bi-uniform discount pair by sweeping the overlap counts.
pub fn biuniform_check(
    params: &BiUniformParams,
    mode: &CheckMode,
) -> Result<BiUniformReport, AnalysisError> {
    let t = overlap_limit(params)?;
    let p_within_fks = params.p <= h_star(params.k)?;
    let mut excluded = None;

    // integer counts are checked in both modes
    let mut ns: std::collections::BTreeSet<Rat> = std::collections::BTreeSet::new();
    let max_n = t.floor().to_integer();
    let mut n = num_bigint::BigInt::zero();
    while n <= max_n {
        let nr = Rat::from_integer(n.clone());
        if nr < t {
            ns.insert(nr);
        } else {
            excluded = Some(nr); // an integral n = T is outside the domain
        }
        n += 1;
    }
    if let CheckMode::Grid { step } = mode {
        if !step.is_positive() {
            return Err(AnalysisError::InvalidParams(
                "grid step must be positive".to_string(),
            ));
        }
        let mut g = Rat::zero();
        while g < t {
            ns.insert(g.clone());
            g += step;
        }
        if (&t / step).is_integer() {
            excluded = Some(t.clone());
        }
    }

    let mut points = Vec::with_capacity(ns.len());
    for n in ns {
        let holds = overlap_inequality_holds(params, &n)?;
        points.push(OverlapPoint { n, holds });
    }

    let certified = p_within_fks && points.iter().all(|pt| pt.holds);
    Ok(BiUniformReport {
        overlap_limit: t,
        p_within_fks,
        points,
        excluded,
        certified,
    })
}

/// Which certification sweep [`max_q`] runs at each candidate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QMode {
    /// Integer overlap counts only.
    Integer,
    /// Integer counts plus the default grid ([`default_grid_step`] per
    /// candidate).
    Grid,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MaxQResult {
    /// The largest certified `q` found (feasible at return, within `tol` of
    /// the feasibility boundary when the verdicts were monotone).
    pub q: Rat,
    /// Whether every probed verdict was consistent with a single threshold
    /// (certified below, not certified above).  When false, the bisection
    /// answer is untrustworthy and `q` comes from a descending linear scan
    /// at resolution `tol` instead.
    pub verdict_monotone: bool,
    pub evaluations: usize,
}

/// Finds the (approximately) largest `q` certified by [`biuniform_check`]
/// at fixed `k`, `ℓ`, `p`, by bisection on `q ∈ (0, p)` down to an interval
/// of width `tol`.
///
/// Monotonicity of the verdict in `q` is an assumption, not a theorem, so
/// the search re-probes a spread of candidates afterwards; if any verdict
/// is out of order it falls back to a linear scan from `p` downwards at
/// resolution `tol` and reports the violation via `verdict_monotone`.
pub fn max_q(k: u32, l: u32, p: &Rat, mode: QMode, tol: &Rat) -> Result<MaxQResult, AnalysisError> {
    if !tol.is_positive() {
        return Err(AnalysisError::InvalidParams(
            "tolerance must be positive".to_string(),
        ));
    }
    let mut probes: Vec<(Rat, bool)> = Vec::new();
    let feasible = |q: &Rat, probes: &mut Vec<(Rat, bool)>| -> Result<bool, AnalysisError> {
        let ok = match BiUniformParams::new(k, l, p.clone(), q.clone()) {
            Ok(params) => {
                let check_mode = match mode {
                    QMode::Integer => Some(CheckMode::Integer),
                    QMode::Grid => match default_grid_step(&params) {
                        Ok(step) => Some(CheckMode::Grid { step }),
                        Err(AnalysisError::DegenerateEqualDiscounts) => None,
                        Err(e) => return Err(e),
                    },
                };
                match check_mode {
                    Some(m) => match biuniform_check(&params, &m) {
                        Ok(report) => report.certified,
                        Err(AnalysisError::DegenerateEqualDiscounts) => false,
                        Err(e) => return Err(e),
                    },
                    None => false,
                }
            }
            Err(_) => false,
        };
        probes.push((q.clone(), ok));
        Ok(ok)
    };

    // find a feasible lower anchor by halving down from p (q = p itself is
    // degenerate and never certifies)
    let mut lo = p.clone();
    loop {
        lo /= rat_int(2);
        if &lo < tol {
            return Err(AnalysisError::NoFeasibleQ);
        }
        if feasible(&lo, &mut probes)? {
            break;
        }
    }
    let mut hi = &lo * rat_int(2);
    while &hi - &lo > *tol {
        let mid = (&lo + &hi) / rat_int(2);
        if feasible(&mid, &mut probes)? {
            lo = mid;
        } else {
            hi = mid;
        }
    }

    // re-probe a spread of candidates across (0, p); skip candidates whose
    // integer sweep would be enormous (q too close to p)
    for i in 1..64i64 {
        let q = p * rat(i, 64);
        let sweep_size = match BiUniformParams::new(k, l, p.clone(), q.clone()) {
            Ok(params) => match overlap_limit(&params) {
                Ok(t) => t.floor().to_integer(),
                Err(_) => continue,
            },
            Err(_) => continue,
        };
        if sweep_size > num_bigint::BigInt::from(100_000) {
            continue;
        }
        feasible(&q, &mut probes)?;
    }

    // monotone iff no certified probe sits above an uncertified one
    let mut sorted = probes.clone();
    sorted.sort_by(|a, b| a.0.cmp(&b.0));
    let verdict_monotone = sorted.windows(2).all(|w| w[0].1 || !w[1].1);

    if verdict_monotone {
        return Ok(MaxQResult {
            q: lo,
            verdict_monotone: true,
            evaluations: probes.len(),
        });
    }
    // fall back to a descending linear scan at resolution tol
    let mut q = p.clone();
    loop {
        q -= tol;
        if !q.is_positive() {
            return Err(AnalysisError::NoFeasibleQ);
        }
        if feasible(&q, &mut probes)? {
            let evaluations = probes.len();
            return Ok(MaxQResult {
                q,
                verdict_monotone: false,
                evaluations,
            });
        }
    }
}

/// The provably safe large-edge discount for adjacent sizes `(k, k+1)` with
/// `p = h*(k)`: `q = k/(k² + 1)`.  The corresponding overlap limit is
/// `(k⁴ − 1)/k²`.
pub fn adjacent_sizes_q(k: u32) -> Result<Rat, AnalysisError> {
    if k < 2 {
        return Err(AnalysisError::InvalidParams(format!("need k ≥ 2, got {k}")));
    }
    let k = i64::from(k);
    Ok(Rat::new(k.into(), (k * k + 1).into()))
}

/// Hard cap for the exhaustive matching search.
pub const BRUTE_FORCE_EDGE_CAP: usize = 22;
/// Hard cap for vertex enumeration and stuck search.
pub const ENUMERATION_EDGE_CAP: usize = 10;

/// Exhaustive maximum-weight matching by depth-first search over edge
/// indices with suffix-sum pruning.  Deterministic: returns the first
/// maximum encountered in index order.
pub fn brute_force_max_matching(inst: &WeightedInstance) -> Result<(Matching, Rat), AnalysisError> {
    brute_force_max_matching_with_cap(inst, BRUTE_FORCE_EDGE_CAP)
}

/// [`brute_force_max_matching`] with an explicit edge-count cap for callers
/// that accept longer runtimes.
pub fn brute_force_max_matching_with_cap(
    inst: &WeightedInstance,
    cap: usize,
) -> Result<(Matching, Rat), AnalysisError> {
    let h = inst.hypergraph();
    let m = h.edge_count();
    if m > cap {
        return Err(AnalysisError::TooLarge { edges: m, cap });
    }
    // suffix[i] = Σ_{e ≥ i} w(e): an upper bound on what's still collectable
    let mut suffix = vec![Rat::zero(); m + 1];
    for e in (0..m).rev() {
        suffix[e] = &suffix[e + 1] + inst.weight(e);
    }
    struct Search<'a> {
        h: &'a Hypergraph,
        inst: &'a WeightedInstance,
        suffix: &'a [Rat],
        used: Vec<bool>,
        current: Vec<usize>,
        current_value: Rat,
        best: Vec<usize>,
        best_value: Rat,
    }

    impl Search<'_> {
        fn dfs(&mut self, e: usize) {
            if self.current_value > self.best_value {
                self.best_value = self.current_value.clone();
                self.best.clone_from(&self.current);
            }
            if e == self.h.edge_count() {
                return;
            }
            if &self.current_value + &self.suffix[e] <= self.best_value {
                return; // even taking everything left cannot beat the best
            }
            // include e if it fits
            if self.h.edge(e).iter().all(|&v| !self.used[v]) {
                for &v in self.h.edge(e) {
                    self.used[v] = true;
                }
                self.current.push(e);
                self.current_value += self.inst.weight(e);
                self.dfs(e + 1);
                self.current_value -= self.inst.weight(e);
                self.current.pop();
                for &v in self.h.edge(e) {
                    self.used[v] = false;
                }
            }
            // skip e
            self.dfs(e + 1);
        }
    }

    let mut search = Search {
        h,
        inst,
        suffix: &suffix,
        used: vec![false; h.vertex_count()],
        current: Vec::new(),
        current_value: Rat::zero(),
        best: Vec::new(),
        best_value: Rat::zero(),
    };
    search.dfs(0);
    let matching = Matching::new(h, search.best)?;
    Ok((matching, search.best_value))
}

/// Result of comparing the LP optimum against the best FKS-weighted
/// matching value `max_M Σ_{e ∈ M} (|e| − 1 + 1/|e|)·w(e)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FksCheck {
    pub lp_optimum: Rat,
    pub best_matching: Matching,
    pub fks_value: Rat,
    /// `fks_value ≥ lp_optimum`.
    pub holds: bool,
}

/// Checks the FKS-style bound exhaustively on a small instance.
pub fn fks_bound_holds(inst: &WeightedInstance) -> Result<FksCheck, AnalysisError> {
    let h = inst.hypergraph();
    let scaled: Vec<Rat> = (0..h.edge_count())
        .map(|e| Ok(fks_factor(h.edge(e).len() as u32)? * inst.weight(e)))
        .collect::<Result<_, DiscountError>>()?;
    let scaled_inst = WeightedInstance::new(h.clone(), scaled)?;
    let (best_matching, fks_value) = brute_force_max_matching(&scaled_inst)?;
    let lp_optimum = lp::solve_instance(inst).objective;
    let holds = fks_value >= lp_optimum;
    Ok(FksCheck {
        lp_optimum,
        best_matching,
        fks_value,
        holds,
    })
}

/// All vertices of the fractional matching polytope, by enumerating active
/// sets: an integral part (a matching), a fractional support, and a square
/// tight-vertex system.  Deduplicated, sorted lexicographically.
pub fn enumerate_polytope_vertices(h: &Hypergraph) -> Result<Vec<Vec<Rat>>, AnalysisError> {
    let m = h.edge_count();
    if m > ENUMERATION_EDGE_CAP {
        return Err(AnalysisError::TooLarge {
            edges: m,
            cap: ENUMERATION_EDGE_CAP,
        });
    }
    let mut out: std::collections::BTreeSet<Vec<Rat>> = std::collections::BTreeSet::new();

    // enumerate every matching as the integral part
    let mut matchings: Vec<Vec<usize>> = Vec::new();
    {
        let mut used = vec![false; h.vertex_count()];
        let mut cur: Vec<usize> = Vec::new();
        fn walk(
            h: &Hypergraph,
            e: usize,
            used: &mut Vec<bool>,
            cur: &mut Vec<usize>,
            acc: &mut Vec<Vec<usize>>,
        ) {
            if e == h.edge_count() {
                acc.push(cur.clone());
                return;
            }
            walk(h, e + 1, used, cur, acc);
            if h.edge(e).iter().all(|&v| !used[v]) {
                for &v in h.edge(e) {
                    used[v] = true;
                }
                cur.push(e);
                walk(h, e + 1, used, cur, acc);
                cur.pop();
                for &v in h.edge(e) {
                    used[v] = false;
                }
            }
        }
        walk(h, 0, &mut used, &mut cur, &mut matchings);
    }

    for ones in &matchings {
        // fractional support candidates: edges disjoint from the integral part
        let mut blocked = vec![false; m];
        for &e in ones {
            blocked[e] = true;
            for &f in h.nbrs(e) {
                blocked[f] = true;
            }
        }
        let free: Vec<usize> = (0..m).filter(|&e| !blocked[e]).collect();

        let mut base = vec![Rat::zero(); m];
        for &e in ones {
            base[e] = Rat::one();
        }
        if h.is_fractional_matching(&base) {
            out.insert(base.clone());
        }

        // all non-empty subsets of the free edges as fractional support
        for mask in 1u64..(1u64 << free.len()) {
            let support: Vec<usize> = (0..free.len())
                .filter(|&i| mask & (1 << i) != 0)
                .map(|i| free[i])
                .collect();
            collect_fractional_vertices(h, &base, &support, &mut out);
        }
    }

    Ok(out.into_iter().collect())
}

/// For a fixed integral part (`base`) and fractional support, finds every
/// solution of a square tight-vertex system that lands strictly inside
/// `(0, 1)` on the support and is feasible; inserts the full vectors.
fn collect_fractional_vertices(
    h: &Hypergraph,
    base: &[Rat],
    support: &[usize],
    out: &mut std::collections::BTreeSet<Vec<Rat>>,
) {
    let f = support.len();
    // vertices touched by the support, in increasing order
    let mut verts: Vec<usize> = support
        .iter()
        .flat_map(|&e| h.edge(e).iter().copied())
        .collect();
    verts.sort_unstable();
    verts.dedup();
    if verts.len() < f {
        return;
    }
    // rows of the incidence matrix restricted to the support
    let rows: Vec<Vec<Q128>> = verts
        .iter()
        .map(|&v| {
            support
                .iter()
                .map(|&e| {
                    if h.edge(e).binary_search(&v).is_ok() {
                        Q128::new(1, 1)
                    } else {
                        Q128::new(0, 1)
                    }
                })
                .collect()
        })
        .collect();
    // the whole incidence must have rank f for any square subsystem to
    if let Ok(r) = linalg::rank(rows.clone()) {
        if r < f {
            return;
        }
    }
    // choose f independent vertex rows; solve; keep strict fractional
    // solutions
    let mut choice: Vec<usize> = Vec::with_capacity(f);
    let mut echelon: Vec<(usize, Vec<Q128>)> = Vec::with_capacity(f);
    choose_rows(
        h,
        base,
        support,
        &rows,
        &verts,
        0,
        &mut choice,
        &mut echelon,
        out,
    );
}

/// Reduces `row` against the echelon built from already-chosen rows.
/// `Ok(None)` means the row is linearly dependent on them; `Ok(Some(_))`
/// carries the normalized reduced row and its pivot column.  An `Overflow`
/// merely disables this pruning for the row.
fn echelon_reduce(
    echelon: &[(usize, Vec<Q128>)],
    row: &[Q128],
) -> Result<Option<(usize, Vec<Q128>)>, Overflow> {
    let zero = Q128::new(0, 1);
    let mut r = row.to_vec();
    for (pivot, prow) in echelon {
        if r[*pivot] != zero {
            let factor = r[*pivot];
            for (j, pv) in prow.iter().enumerate() {
                let t = Scalar::try_mul(pv, &factor)?;
                r[j] = Scalar::try_sub(&r[j], &t)?;
            }
        }
    }
    match r.iter().position(|v| *v != zero) {
        None => Ok(None),
        Some(p) => {
            let inv = r[p];
            for v in r.iter_mut() {
                *v = Scalar::try_div(v, &inv)?;
            }
            Ok(Some((p, r)))
        }
    }
}

/// Solves the chosen square system exactly (with an arbitrary-precision
/// retry) and returns the solution when it is nonsingular.
fn solve_chosen(rows: &[Vec<Q128>], choice: &[usize]) -> Option<Vec<Rat>> {
    let n = choice.len();
    let a: Vec<Vec<Q128>> = choice.iter().map(|&i| rows[i].clone()).collect();
    let b = vec![Q128::new(1, 1); n];
    match linalg::solve_square(a, b) {
        Ok(opt) => opt.map(|x| x.iter().map(|v| v.to_rat()).collect()),
        Err(Overflow) => {
            let a: Vec<Vec<Rat>> = choice
                .iter()
                .map(|&i| rows[i].iter().map(|v| v.to_rat()).collect())
                .collect();
            let b = vec![Rat::one(); n];
            linalg::solve_square(a, b).expect("exact arithmetic does not overflow")
        }
    }
}

fn strictly_fractional(x: &[Rat]) -> bool {
    x.iter().all(|v| v.is_positive() && *v < Rat::one())
}

#[allow(clippy::too_many_arguments)]
fn choose_rows(
    h: &Hypergraph,
    base: &[Rat],
    support: &[usize],
    rows: &[Vec<Q128>],
    verts: &[usize],
    from: usize,
    choice: &mut Vec<usize>,
    echelon: &mut Vec<(usize, Vec<Q128>)>,
    out: &mut std::collections::BTreeSet<Vec<Rat>>,
) {
    let f = support.len();
    if choice.len() == f {
        if let Some(x) = solve_chosen(rows, choice) {
            if strictly_fractional(&x) {
                let mut full = base.to_vec();
                for (i, &e) in support.iter().enumerate() {
                    full[e] = x[i].clone();
                }
                if h.is_fractional_matching(&full) {
                    out.insert(full);
                }
            }
        }
        return;
    }
    if verts.len() - from < f - choice.len() {
        return;
    }
    for i in from..verts.len() {
        match echelon_reduce(echelon, &rows[i]) {
            Ok(None) => continue, // dependent row: the system would be singular
            Ok(Some(reduced)) => {
                echelon.push(reduced);
                choice.push(i);
                choose_rows(h, base, support, rows, verts, i + 1, choice, echelon, out);
                choice.pop();
                echelon.pop();
            }
            Err(Overflow) => {
                choice.push(i);
                choose_rows(h, base, support, rows, verts, i + 1, choice, echelon, out);
                choice.pop();
            }
        }
    }
}

/// Searches for a stuck reduced basic fractional matching on some edge
/// subset: subsets by increasing cardinality then lexicographic order, and
/// within each, square tight-vertex systems in lexicographic order.  Returns
/// the first certificate found.
pub fn search_stuck(
    h: &Hypergraph,
    g: &DiscountProfile,
) -> Result<Option<StuckCertificate>, AnalysisError> {
    let m = h.edge_count();
    if m > ENUMERATION_EDGE_CAP {
        return Err(AnalysisError::TooLarge {
            edges: m,
            cap: ENUMERATION_EDGE_CAP,
        });
    }
    if g.values().len() != m {
        return Err(AnalysisError::InvalidParams(format!(
            "discount profile has {} values for {m} edges",
            g.values().len()
        )));
    }
    let mut subset: Vec<usize> = Vec::new();
    for size in 2..=m {
        if let Some(cert) = subsets_of_size(h, g, 0, size, &mut subset)? {
            return Ok(Some(cert));
        }
    }
    Ok(None)
}

fn subsets_of_size(
    h: &Hypergraph,
    g: &DiscountProfile,
    from: usize,
    remaining: usize,
    subset: &mut Vec<usize>,
) -> Result<Option<StuckCertificate>, AnalysisError> {
    if remaining == 0 {
        return check_subset_for_stuck(h, g, subset);
    }
    let m = h.edge_count();
    if m - from < remaining {
        return Ok(None);
    }
    for e in from..m {
        // singleton edges can never be stuck
        if h.edge(e).len() == 1 {
            continue;
        }
        subset.push(e);
        if let Some(cert) = subsets_of_size(h, g, e + 1, remaining - 1, subset)? {
            subset.pop();
            return Ok(Some(cert));
        }
        subset.pop();
    }
    Ok(None)
}

/// Tests one edge subset: necessary conditions, then all square
/// tight-vertex systems, looking for a strictly stuck reduced basic point.
fn check_subset_for_stuck(
    h: &Hypergraph,
    g: &DiscountProfile,
    subset: &[usize],
) -> Result<Option<StuckCertificate>, AnalysisError> {
    // necessary for stuckness: Σ_{f ∈ N(e) ∩ E'} g(f) > 1 − g(e) for all e,
    // since every x value is strictly below 1
    for (i, &e) in subset.iter().enumerate() {
        let mut bound = Rat::zero();
        for (j, &f) in subset.iter().enumerate() {
            if i != j && h.nbrs(e).binary_search(&f).is_ok() {
                bound += g.value(f);
            }
        }
        if bound <= Rat::one() - g.value(e) {
            return Ok(None);
        }
    }

    let f = subset.len();
    let mut verts: Vec<usize> = subset
        .iter()
        .flat_map(|&e| h.edge(e).iter().copied())
        .collect();
    verts.sort_unstable();
    verts.dedup();
    if verts.len() < f {
        return Ok(None);
    }
    let rows: Vec<Vec<Q128>> = verts
        .iter()
        .map(|&v| {
            subset
                .iter()
                .map(|&e| {
                    if h.edge(e).binary_search(&v).is_ok() {
                        Q128::new(1, 1)
                    } else {
                        Q128::new(0, 1)
                    }
                })
                .collect()
        })
        .collect();
    if let Ok(r) = linalg::rank(rows.clone()) {
        if r < f {
            return Ok(None);
        }
    }

    let mut choice: Vec<usize> = Vec::with_capacity(f);
    let mut echelon: Vec<(usize, Vec<Q128>)> = Vec::with_capacity(f);
    Ok(stuck_in_systems(
        h,
        g,
        subset,
        &rows,
        &verts,
        0,
        &mut choice,
        &mut echelon,
    ))
}

#[allow(clippy::too_many_arguments)]
fn stuck_in_systems(
    h: &Hypergraph,
    g: &DiscountProfile,
    subset: &[usize],
    rows: &[Vec<Q128>],
    verts: &[usize],
    from: usize,
    choice: &mut Vec<usize>,
    echelon: &mut Vec<(usize, Vec<Q128>)>,
) -> Option<StuckCertificate> {
    let f = subset.len();
    if choice.len() == f {
        return try_stuck_system(h, g, subset, rows, choice);
    }
    if verts.len() - from < f - choice.len() {
        return None;
    }
    for i in from..verts.len() {
        let hit = match echelon_reduce(echelon, &rows[i]) {
            Ok(None) => continue, // dependent row: the system would be singular
            Ok(Some(reduced)) => {
                echelon.push(reduced);
                choice.push(i);
                let hit = stuck_in_systems(h, g, subset, rows, verts, i + 1, choice, echelon);
                choice.pop();
                echelon.pop();
                hit
            }
            Err(Overflow) => {
                choice.push(i);
                let hit = stuck_in_systems(h, g, subset, rows, verts, i + 1, choice, echelon);
                choice.pop();
                hit
            }
        };
        if hit.is_some() {
            return hit;
        }
    }
    None
}

fn try_stuck_system(
    h: &Hypergraph,
    g: &DiscountProfile,
    subset: &[usize],
    rows: &[Vec<Q128>],
    choice: &[usize],
) -> Option<StuckCertificate> {
    let f = subset.len();
    let xr = solve_chosen(rows, choice)?;
    if !strictly_fractional(&xr) {
        return None;
    }
    // feasibility with zeros outside the subset
    let mut full = vec![Rat::zero(); h.edge_count()];
    for (i, &e) in subset.iter().enumerate() {
        full[e] = xr[i].clone();
    }
    if !h.is_fractional_matching(&full) {
        return None;
    }
    // strict stuckness on every subset edge
    let mut slacks = Vec::with_capacity(f);
    for (i, &e) in subset.iter().enumerate() {
        let mut lhs = Rat::zero();
        for (j, &fe) in subset.iter().enumerate() {
            if i != j && h.nbrs(e).binary_search(&fe).is_ok() {
                lhs += g.value(fe) * &xr[j];
            }
        }
        let slack = lhs - Rat::one() + g.value(e) * &xr[i];
        if !slack.is_positive() {
            return None;
        }
        slacks.push(slack);
    }
    Some(StuckCertificate {
        edges: subset.to_vec(),
        x: xr,
        slacks,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::discounts::Schedule;
    use crate::rational::{parse_rat, rat, to_f64};
    use crate::rounding;

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

    fn params(k: u32, l: u32, p: Rat, q: Rat) -> BiUniformParams {
        BiUniformParams::new(k, l, p, q).unwrap()
    }

    #[test]
    fn overlap_limit_example() {
        // k = 2, ℓ = 3, p = 2/3, q = 3/7: T = (2/3)(1)(3) / ((2/3 − 3/7)·2)
        let pr = params(2, 3, rat(2, 3), rat(3, 7));
        assert_eq!(overlap_limit(&pr).unwrap(), rat(21, 5));
        let degenerate = params(2, 3, rat(1, 2), rat(1, 2));
        assert_eq!(
            overlap_limit(&degenerate),
            Err(AnalysisError::DegenerateEqualDiscounts)
        );
    }

    #[test]
    fn overlap_inequality_integer_points() {
        let pr = params(2, 3, rat(2, 3), rat(3, 7));
        for n in 0..=4 {
            assert!(
                overlap_inequality_holds(&pr, &rat_int(n)).unwrap(),
                "n = {n}"
            );
        }
        // fractional counterexample inside the range
        assert!(!overlap_inequality_holds(&pr, &rat(2, 5)).unwrap());
        // and out-of-range counts are rejected
        assert!(matches!(
            overlap_inequality_holds(&pr, &rat_int(5)),
            Err(AnalysisError::OutOfRangeN { .. })
        ));
        assert!(matches!(
            overlap_inequality_holds(&pr, &rat_int(-1)),
            Err(AnalysisError::OutOfRangeN { .. })
        ));
    }

    #[test]
    fn integer_mode_certifies_known_pair() {
        let pr = params(2, 3, rat(2, 3), rat(3, 7));
        let report = biuniform_check(&pr, &CheckMode::Integer).unwrap();
        assert!(report.p_within_fks);
        assert!(report.certified);
        assert_eq!(report.points.len(), 5); // n = 0..4, T = 21/5
        assert_eq!(report.excluded, None);

        // grid mode at step 1/100 hits the fractional counterexamples
        let grid = biuniform_check(&pr, &CheckMode::Grid { step: rat(1, 100) }).unwrap();
        assert!(!grid.certified);
    }

    #[test]
    fn adjacent_sizes_certification() {
        for k in [2u32, 3, 4] {
            let p = h_star(k).unwrap();
            let q = adjacent_sizes_q(k).unwrap();
            let pr = params(k, k + 1, p, q.clone());
            let t = overlap_limit(&pr).unwrap();
            let k64 = i64::from(k);
            assert_eq!(
                t,
                rat(k64.pow(4) - 1, k64 * k64),
                "T = (k⁴−1)/k² at k = {k}"
            );
            let report = biuniform_check(&pr, &CheckMode::Integer).unwrap();
            assert!(report.certified, "k = {k}");
            let step = default_grid_step(&pr).unwrap();
            assert_eq!(step, &t / rat_int(1000));
            let grid = biuniform_check(&pr, &CheckMode::Grid { step }).unwrap();
            assert!(grid.certified, "k = {k} grid");
            // the grid lands exactly on T after 1000 steps; that endpoint is
            // outside the inequality's domain and must be reported skipped
            assert_eq!(grid.excluded, Some(t));
        }
        assert_eq!(adjacent_sizes_q(2).unwrap(), rat(2, 5));
        assert_eq!(adjacent_sizes_q(3).unwrap(), rat(3, 10));
        assert_eq!(adjacent_sizes_q(4).unwrap(), rat(4, 17));
    }

    #[test]
    fn max_q_bisection_matches_known_transitions() {
        let tol = parse_rat("1/10000000").unwrap();
        let res = max_q(3, 4, &h_star(3).unwrap(), QMode::Integer, &tol).unwrap();
        assert!(res.verdict_monotone);
        assert!(
            (to_f64(&res.q) - 0.30509).abs() < 1e-4,
            "q = {}",
            to_f64(&res.q)
        );

        let res45 = max_q(4, 5, &h_star(4).unwrap(), QMode::Integer, &tol).unwrap();
        assert!(res45.verdict_monotone);
        assert!(
            (to_f64(&res45.q) - 0.23656).abs() < 1e-4,
            "q = {}",
            to_f64(&res45.q)
        );
    }

    #[test]
    fn max_q_grid_mode_keeps_safe_value_feasible() {
        // the provably safe adjacent-size value stays below the grid-mode
        // maximum, which in turn cannot exceed the integer-mode maximum
        let tol = rat(1, 100_000);
        let grid = max_q(4, 5, &h_star(4).unwrap(), QMode::Grid, &tol).unwrap();
        assert!(grid.q >= rat(4, 17), "q = {}", to_f64(&grid.q));
        let integer = max_q(4, 5, &h_star(4).unwrap(), QMode::Integer, &tol).unwrap();
        assert!(grid.q <= integer.q);
    }

    #[test]
    fn zero_overlap_agrees_with_dropped_terms() {
        // at n = 0 the inequality must match the version with every n-term
        // removed: pq(k−1)(ℓ−1)/(p(k−1)ℓ) ≥ (p(k−1)(qℓ−1))/(p(k−1))
        let cases = [
            (2, 3, rat(2, 3), rat(3, 7)),
            (3, 4, rat(3, 7), rat(3, 10)),
            (3, 4, rat(3, 7), rat(2, 5)),
            (4, 5, rat(4, 13), rat(4, 17)),
            (2, 4, rat(1, 2), rat(1, 8)),
        ];
        for (k, l, p, q) in cases {
            let pr = params(k, l, p.clone(), q.clone());
            let kr = rat_int(i64::from(k));
            let lr = rat_int(i64::from(l));
            let one = Rat::one();
            let lhs_num = &p * &q * (&kr - &one) * (&lr - &one);
            let lhs_den = &p * (&kr - &one) * &lr;
            let rhs_num = &p * (&kr - &one) * (&q * &lr - &one);
            let rhs_den = &p * (&kr - &one);
            let dropped = &lhs_num * &rhs_den >= &rhs_num * &lhs_den;
            assert_eq!(
                overlap_inequality_holds(&pr, &Rat::zero()).unwrap(),
                dropped,
                "k={k} l={l}"
            );
        }
    }

    #[test]
    fn adjacent_gap_shrinks_like_inverse_fourth_power() {
        // h*(k+1) − q(k) stays positive and k⁴·gap climbs toward 1
        let mut prev_ratio = Rat::zero();
        for k in 2u32..=100 {
            let gap = h_star(k + 1).unwrap() - adjacent_sizes_q(k).unwrap();
            assert!(gap.is_positive(), "k = {k}");
            let ratio = &gap * rat_int(i64::from(k).pow(4));
            assert!(ratio < Rat::one(), "k = {k}");
            assert!(ratio > prev_ratio, "k = {k}");
            prev_ratio = ratio;
        }
        assert!(prev_ratio > rat(24, 25));
    }

    #[test]
    fn brute_force_on_fano() {
        let inst = WeightedInstance::unit(fano());
        let (matching, value) = brute_force_max_matching(&inst).unwrap();
        assert_eq!(matching.len(), 1);
        assert_eq!(value, Rat::one());
    }

    #[test]
    fn brute_force_weighted() {
        let h = Hypergraph::build(4, vec![vec![0, 1], vec![1, 2], vec![2, 3]]).unwrap();
        // middle edge is heavy enough to beat the two outer ones combined
        let inst = WeightedInstance::new(h, vec![rat_int(1), rat_int(3), rat_int(1)]).unwrap();
        let (matching, value) = brute_force_max_matching(&inst).unwrap();
        assert_eq!(matching.edge_indices().collect::<Vec<_>>(), vec![1]);
        assert_eq!(value, rat_int(3));
    }

    #[test]
    fn fks_bound_on_projective_examples() {
        let fano_check = fks_bound_holds(&WeightedInstance::unit(fano())).unwrap();
        assert_eq!(fano_check.lp_optimum, rat(7, 3));
        assert_eq!(fano_check.fks_value, rat(7, 3)); // (3−1+1/3)·1, tight
        assert!(fano_check.holds);
    }

    #[test]
    fn polytope_vertices_of_triangle() {
        let h = Hypergraph::build(3, vec![vec![0, 1], vec![1, 2], vec![0, 2]]).unwrap();
        let verts = enumerate_polytope_vertices(&h).unwrap();
        let expected: Vec<Vec<Rat>> = vec![
            vec![Rat::zero(), Rat::zero(), Rat::zero()],
            vec![Rat::zero(), Rat::zero(), Rat::one()],
            vec![Rat::zero(), Rat::one(), Rat::zero()],
            vec![rat(1, 2), rat(1, 2), rat(1, 2)],
            vec![Rat::one(), Rat::zero(), Rat::zero()],
        ];
        assert_eq!(verts, expected);
        // every enumerated vertex is basic, and the LP optimum is attained
        // at one of them
        for v in &verts {
            assert!(lp::verify_basic(&h, v).unwrap());
        }
        let sol = lp::max_weight_basic_fractional_matching(&h, &vec![Rat::one(); 3]);
        let best = verts
            .iter()
            .map(|v| lp::dot(&vec![Rat::one(); 3], v))
            .max()
            .unwrap();
        assert_eq!(sol.objective, best);
    }

    #[test]
    fn polytope_vertices_of_fano_include_all_thirds() {
        let h = fano();
        let verts = enumerate_polytope_vertices(&h).unwrap();
        assert!(verts.contains(&vec![rat(1, 3); 7]));
        for v in &verts {
            assert!(lp::verify_basic(&h, v).unwrap());
        }
    }

    #[test]
    fn search_stuck_finds_triangle_of_lines_in_fano() {
        let h = fano();
        let g = DiscountProfile::from_schedule(&h, &Schedule::Constant(Rat::one())).unwrap();
        let cert = search_stuck(&h, &g)
            .unwrap()
            .expect("unit discounts get stuck");
        assert_eq!(cert.edges, vec![0, 1, 3]);
        assert_eq!(cert.x, vec![rat(1, 2); 3]);
        assert_eq!(cert.slacks, vec![rat(1, 2); 3]);
        assert_eq!(rounding::verify_certificate(&h, &g, &cert), Ok(()));
        // determinism
        assert_eq!(search_stuck(&h, &g).unwrap().unwrap(), cert);
    }

    #[test]
    fn search_stuck_absent_with_h_star_on_fano() {
        let h = fano();
        let g = DiscountProfile::from_schedule(&h, &Schedule::HStar).unwrap();
        assert_eq!(search_stuck(&h, &g).unwrap(), None);
    }

    #[test]
    fn search_stuck_respects_cap() {
        let h = Hypergraph::build(12, (0..11).map(|i| vec![i, i + 1]).collect()).unwrap();
        let g = DiscountProfile::from_schedule(&h, &Schedule::Baseline).unwrap();
        assert!(matches!(
            search_stuck(&h, &g),
            Err(AnalysisError::TooLarge { .. })
        ));
    }
}
