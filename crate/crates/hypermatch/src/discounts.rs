//! Discount schedules: per-size factors `g(e) = h(|e|) ∈ (0, 1]` that drive
//! the peeling step of the rounding loop.
//!
//! The h-family implemented here:
//! * `h_star(k) = k/(k² − k + 1)`, the discount matching the FKS factor
//!   `k − 1 + 1/k` (its reciprocal), conjectured optimal;
//! * `h_r`, the finite-horizon schedule defined by the closed alternating
//!   sum, equal to `h_star(r)` at `k = r` and vanishing for `k > r`;
//! * `h_inf_truncated`, the limiting alternating series cut after a fixed
//!   number of terms; its full limit `h_inf` relates to derangement counts;
//! * `h_tilde_inf(k) = (k² + k − 1)/((k−1)k(k+2))`, a rational lower proxy
//!   for `h_inf` (it equals the series truncated after four terms);
//! * `baseline(k) = 1/k`.

use crate::hypergraph::Hypergraph;
use crate::rational::{rat_int, Rat};
use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use std::collections::BTreeMap;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DiscountError {
    #[error("schedule value undefined for size {k}")]
    InvalidK { k: u32 },
    #[error("schedule parameter must be at least 2, got {param}")]
    InvalidParameter { param: u32 },
    #[error("schedule gives no usable discount for edge size {size} (must lie in (0, 1])")]
    ScheduleUndefinedForSize { size: u32 },
    #[error("discount for edge {edge} is {value}, outside (0, 1]")]
    InvalidDiscount { edge: usize, value: String },
    #[error("hypergraph has {values} discount values for {edges} edges")]
    CountMismatch { values: usize, edges: usize },
}

fn factorial(n: u32) -> BigInt {
    (1..=n).fold(BigInt::one(), |acc, i| acc * i)
}

/// Number of derangements (fixed-point-free permutations) of `n` items.
pub fn derangement(n: u32) -> BigInt {
    let (mut prev, mut cur) = (BigInt::one(), BigInt::zero()); // D_0, D_1
    if n == 0 {
        return prev;
    }
    for i in 2..=n {
        let next = BigInt::from(i - 1) * (&cur + &prev);
        prev = cur;
        cur = next;
    }
    cur
}

/// The FKS factor `k − 1 + 1/k` of an edge of size `k ≥ 1`.
pub fn fks_factor(k: u32) -> Result<Rat, DiscountError> {
    if k == 0 {
        return Err(DiscountError::InvalidK { k });
    }
    let k = i64::from(k);
    Ok(rat_int(k - 1) + Rat::new(BigInt::one(), BigInt::from(k)))
}

/// `h*(k) = k/(k² − k + 1)`, the reciprocal of the FKS factor; `k ≥ 1`.
pub fn h_star(k: u32) -> Result<Rat, DiscountError> {
    if k == 0 {
        return Err(DiscountError::InvalidK { k });
    }
    let k = i64::from(k);
    Ok(Rat::new(BigInt::from(k), BigInt::from(k * k - k + 1)))
}

/// `1/k`; `k ≥ 1`.
pub fn baseline(k: u32) -> Result<Rat, DiscountError> {
    if k == 0 {
        return Err(DiscountError::InvalidK { k });
    }
    Ok(Rat::new(BigInt::one(), BigInt::from(k)))
}

/// The alternating tail sum `Σ_{i=1}^{terms} (−1)^{i+1} (k−2)!/(k−2+i)!`;
/// requires `k ≥ 2` and `terms ≥ 1`.
pub fn h_inf_truncated(k: u32, terms: u32) -> Result<Rat, DiscountError> {
    if k < 2 {
        return Err(DiscountError::InvalidK { k });
    }
    if terms == 0 {
        return Err(DiscountError::InvalidParameter { param: terms });
    }
    let base = factorial(k - 2);
    let mut sum = Rat::zero();
    for i in 1..=terms {
        let term = Rat::new(base.clone(), factorial(k - 2 + i));
        if i % 2 == 1 {
            sum += term;
        } else {
            sum -= term;
        }
    }
    Ok(sum)
}

/// High-precision rational approximation of the full series limit `h_inf(k)`,
/// with absolute error below `10^-45`.  For exact reasoning prefer
/// [`h_inf_brackets`].
pub fn h_inf_approx(k: u32) -> Result<Rat, DiscountError> {
    // terms decay factorially; 50 of them are far more than enough
    h_inf_truncated(k, 50)
}

/// Exact two-sided bracket `(lo, hi)` with `lo < h_inf(k) < hi`, from
/// consecutive partial sums of the alternating series.
pub fn h_inf_brackets(k: u32) -> Result<(Rat, Rat), DiscountError> {
    // terms are positive and strictly decreasing, so even-length partial sums
    // sit below the limit and odd-length ones above
    Ok((h_inf_truncated(k, 46)?, h_inf_truncated(k, 45)?))
}

/// Decimal expansion of `h_inf(k)` to the given number of places (half-away
/// rounding).  The 46-term partial sum is accurate to far below `10⁻⁵⁰`, so
/// any requested precision up to 45 places is exact.
pub fn h_inf_decimal(k: u32, places: usize) -> Result<String, DiscountError> {
    assert!(
        places <= 45,
        "beyond the precision of the internal truncation"
    );
    Ok(crate::rational::decimal_str(
        &h_inf_truncated(k, 46)?,
        places,
    ))
}

/// `h̃∞(k) = (k² + k − 1)/((k−1)·k·(k+2))`; `k ≥ 2`.
pub fn h_tilde_inf(k: u32) -> Result<Rat, DiscountError> {
    if k < 2 {
        return Err(DiscountError::InvalidK { k });
    }
    let k = i64::from(k);
    Ok(Rat::new(
        BigInt::from(k * k + k - 1),
        BigInt::from((k - 1) * k * (k + 2)),
    ))
}

/// `h_r(k)` for horizon `r ≥ 2`: the closed alternating form for
/// `2 ≤ k ≤ r`, and 0 for `k > r`.  Satisfies `h_r(r) = h_star(r)` and the
/// recurrence `h_r(k+1) = 1 − (k−1)·h_r(k)` for `2 ≤ k < r`.
pub fn h_r(r: u32, k: u32) -> Result<Rat, DiscountError> {
    if r < 2 {
        return Err(DiscountError::InvalidParameter { param: r });
    }
    if k < 2 {
        return Err(DiscountError::InvalidK { k });
    }
    if k > r {
        return Ok(Rat::zero());
    }
    let r64 = i64::from(r);
    let lead_num = factorial(k - 2) * BigInt::from(r64);
    let lead_den = factorial(r - 2) * BigInt::from(r64 * r64 - r64 + 1);
    let mut value = Rat::new(lead_num, lead_den);
    if (r - k) % 2 == 1 {
        value = -value;
    }
    if r > k {
        value += h_inf_truncated(k, r - k)?;
    }
    Ok(value)
}

/// A rule mapping edge sizes to discount values.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Schedule {
    HStar,
    Hr { r: u32 },
    HInfTruncated { terms: u32 },
    HTildeInf,
    Baseline,
    Constant(Rat),
    Table(BTreeMap<u32, Rat>),
}

impl Schedule {
    /// The mathematical value of the schedule at size `k`; may be outside
    /// `(0, 1]` (e.g. `h_r` at `k > r` is 0), which [`DiscountProfile`]
    /// rejects when building per-edge discounts.
    pub fn value(&self, k: u32) -> Result<Rat, DiscountError> {
        match self {
            Schedule::HStar => h_star(k),
            Schedule::Hr { r } => h_r(*r, k),
            Schedule::HInfTruncated { terms } => h_inf_truncated(k, *terms),
            Schedule::HTildeInf => h_tilde_inf(k),
            Schedule::Baseline => baseline(k),
            Schedule::Constant(c) => Ok(c.clone()),
            Schedule::Table(map) => map
                .get(&k)
                .cloned()
                .ok_or(DiscountError::ScheduleUndefinedForSize { size: k }),
        }
    }

    /// Canonical label, matching the CLI `--schedule` grammar where possible.
    pub fn label(&self) -> String {
        match self {
            Schedule::HStar => "hstar".to_string(),
            Schedule::Hr { r } => format!("hr:{r}"),
            Schedule::HInfTruncated { terms } => format!("hinf:{terms}"),
            Schedule::HTildeInf => "htilde".to_string(),
            Schedule::Baseline => "baseline".to_string(),
            Schedule::Constant(c) => format!("constant:{}", crate::rational::format_rat(c)),
            Schedule::Table(_) => "table".to_string(),
        }
    }
}

/// Per-edge discounts `g(e) ∈ (0, 1]` on a fixed hypergraph.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DiscountProfile {
    values: Vec<Rat>,
}

impl DiscountProfile {
    /// Evaluates the schedule at each edge's size; fails if any size maps
    /// outside `(0, 1]` or the schedule is undefined there.
    pub fn from_schedule(h: &Hypergraph, schedule: &Schedule) -> Result<Self, DiscountError> {
        let mut values = Vec::with_capacity(h.edge_count());
        for e in h.edges() {
            let k = e.len() as u32;
            let v = match schedule.value(k) {
                Ok(v) => v,
                Err(DiscountError::InvalidK { .. }) => {
                    return Err(DiscountError::ScheduleUndefinedForSize { size: k })
                }
                Err(other) => return Err(other),
            };
            if !v.is_positive() || v > Rat::one() {
                return Err(DiscountError::ScheduleUndefinedForSize { size: k });
            }
            values.push(v);
        }
        Ok(Self { values })
    }

    /// Wraps explicit per-edge values, validating each lies in `(0, 1]`.
    pub fn from_values(h: &Hypergraph, values: Vec<Rat>) -> Result<Self, DiscountError> {
        if values.len() != h.edge_count() {
            return Err(DiscountError::CountMismatch {
                values: values.len(),
                edges: h.edge_count(),
            });
        }
        for (e, v) in values.iter().enumerate() {
            if !v.is_positive() || *v > Rat::one() {
                return Err(DiscountError::InvalidDiscount {
                    edge: e,
                    value: crate::rational::format_rat(v),
                });
            }
        }
        Ok(Self { values })
    }

    pub fn value(&self, e: usize) -> &Rat {
        &self.values[e]
    }

    pub fn values(&self) -> &[Rat] {
        &self.values
    }
}

/// Per-size report of the three usability conditions of a schedule:
/// monotonicity, the FKS upper bound, and the peeling step bound
/// `h(k+1) ≤ 1 − (k−1)·h(k)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConditionReport {
    pub k: u32,
    pub monotone: bool,
    pub within_fks: bool,
    pub step_ok: bool,
    pub monotone_slack: Rat,
    pub fks_slack: Rat,
    pub step_slack: Rat,
}

/// Checks the schedule conditions for every `k` in `2..=k_max`; the schedule
/// must be defined on `2..=k_max+1`.
pub fn validate_schedule(
    schedule: &Schedule,
    k_max: u32,
) -> Result<Vec<ConditionReport>, DiscountError> {
    let mut reports = Vec::new();
    for k in 2..=k_max {
        let hk = schedule.value(k)?;
        let hk1 = schedule.value(k + 1)?;
        let monotone_slack = &hk - &hk1;
        let fks_slack = h_star(k)? - &hk;
        let step_slack = Rat::one() - rat_int(i64::from(k) - 1) * &hk - &hk1;
        reports.push(ConditionReport {
            k,
            monotone: !monotone_slack.is_negative(),
            within_fks: !fks_slack.is_negative() && !hk.is_negative(),
            step_ok: !step_slack.is_negative(),
            monotone_slack,
            fks_slack,
            step_slack,
        });
    }
    Ok(reports)
}

/// One row of the schedule comparison table.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ComparisonRow {
    pub k: u32,
    pub baseline: Rat,
    pub h_star: Rat,
    /// High-precision approximation of the series limit.
    pub h_inf: Rat,
    pub h_tilde_inf: Rat,
}

/// Side-by-side values of the principal schedules at the given sizes.
pub fn comparison_table(k_values: &[u32]) -> Result<Vec<ComparisonRow>, DiscountError> {
    k_values
        .iter()
        .map(|&k| {
            Ok(ComparisonRow {
                k,
                baseline: baseline(k)?,
                h_star: h_star(k)?,
                h_inf: h_inf_approx(k)?,
                h_tilde_inf: h_tilde_inf(k)?,
            })
        })
        .collect()
}
