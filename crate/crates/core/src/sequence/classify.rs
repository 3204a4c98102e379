//! Window-qualified classifiers.
//!
//! Verdicts are always "up to order N on window K". A witnessed excess of
//! sign flips is definitive because it only involves stored terms; every
//! other verdict is evidence about the window and nothing more.

use serde::Serialize;

use super::signs::{sign_changes_bounded, SignChangeReport, SignPolicy};
use super::{DifferenceTable, FiniteSeq, IndexedRow};
use crate::error::{Error, Result};
use crate::scalar::{Scalar, Sign};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CmReport {
    pub passed: bool,
    pub max_order_checked: usize,
    /// First `(n, k)` with `(-1)^n Δⁿa(k) < -eps`.
    pub violation: Option<(usize, i64)>,
    pub violation_value: Option<f64>,
}

/// Checks `(-1)^n Δⁿa(k) >= -eps` for `n <= N` and `k ∈ [0, K - n]`.
pub fn is_completely_monotone_up_to<T: Scalar>(
    seq: &FiniteSeq<T>,
    max_order: usize,
    policy: &SignPolicy,
) -> Result<CmReport> {
    let table = DifferenceTable::new(seq, max_order)?;
    for n in 0..=max_order {
        let row = table.row(n).from_index(0);
        let bounds = table.bound(n).map(|b| b.from_index(0));
        let threshold = policy.eps.threshold(&row);
        let expected = Sign::alternating(n);
        for (offset, value) in row.values.iter().enumerate() {
            let local = bounds.as_ref().map_or(threshold, |b| threshold.max(b.values[offset]));
            let sign = value.snapped_sign(local);
            if sign != Sign::Zero && sign != expected {
                return Ok(CmReport {
                    passed: false,
                    max_order_checked: max_order,
                    violation: Some((n, offset as i64)),
                    violation_value: Some(value.approx()),
                });
            }
        }
    }
    Ok(CmReport {
        passed: true,
        max_order_checked: max_order,
        violation: None,
        violation_value: None,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum OrderVerdict {
    /// Exactly the expected number of flips, tail of the expected sign, not saturated.
    #[serde(rename = "exact-n")]
    ExactN,
    /// More flips than allowed are witnessed inside the window.
    #[serde(rename = "too-many")]
    TooMany,
    #[serde(rename = "tail-uncertain")]
    TailUncertain,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OrderEvidence {
    pub n: usize,
    pub expected_changes: usize,
    pub sign_changes: SignChangeReport,
    pub verdict: OrderVerdict,
}

fn judge_row<T: Scalar>(
    row: &IndexedRow<T>,
    bounds: Option<&IndexedRow<f64>>,
    n: usize,
    expected_changes: usize,
    policy: &SignPolicy,
) -> Result<OrderEvidence> {
    let report = sign_changes_bounded(row, bounds, policy)?;
    let tail_ok = matches!(report.final_sign, s if s == Sign::alternating(n) || s == Sign::Zero);
    let verdict = if report.count > expected_changes {
        OrderVerdict::TooMany
    } else if report.count == expected_changes && tail_ok && !report.saturated {
        OrderVerdict::ExactN
    } else {
        OrderVerdict::TailUncertain
    };
    Ok(OrderEvidence {
        n,
        expected_changes,
        sign_changes: report,
        verdict,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum BellVerdict {
    ConsistentWithBell,
    RefutedAtOrder { order: usize },
    /// A term is negative after snapping.
    NotNonnegative { index: usize },
    Inconclusive,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BellReport {
    pub max_order_checked: usize,
    pub window_last_index: usize,
    pub per_order: Vec<OrderEvidence>,
    pub overall: BellVerdict,
}

impl BellReport {
    pub fn is_refuted(&self) -> bool {
        matches!(
            self.overall,
            BellVerdict::RefutedAtOrder { .. } | BellVerdict::NotNonnegative { .. }
        )
    }

    pub fn is_consistent(&self) -> bool {
        self.overall == BellVerdict::ConsistentWithBell
    }
}

fn first_negative<T: Scalar>(seq: &FiniteSeq<T>, policy: &SignPolicy) -> Option<usize> {
    let row = seq.as_row();
    let threshold = policy.eps.threshold(&row);
    row.values
        .iter()
        .position(|v| v.snapped_sign(threshold) == Sign::Negative)
}

/// Sign changes of `Δⁿa` on `[-n, K - n]` for every `n <= N`.
pub fn is_bell_shaped_up_to<T: Scalar>(
    seq: &FiniteSeq<T>,
    max_order: usize,
    policy: &SignPolicy,
) -> Result<BellReport> {
    let table = DifferenceTable::new(seq, max_order)?;
    let per_order = (0..=max_order)
        .map(|n| judge_row(table.row(n), table.bound(n), n, n, policy))
        .collect::<Result<Vec<_>>>()?;
    let overall = if let Some(index) = first_negative(seq, policy) {
        BellVerdict::NotNonnegative { index }
    } else {
        summarize(&per_order).into_bell()
    };
    Ok(BellReport {
        max_order_checked: max_order,
        window_last_index: seq.last_index(),
        per_order,
        overall,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum CandidateVerdict {
    Consistent,
    RefutedAtOrder { order: usize },
    Inconclusive,
}

impl CandidateVerdict {
    fn into_bell(self) -> BellVerdict {
        match self {
            CandidateVerdict::Consistent => BellVerdict::ConsistentWithBell,
            CandidateVerdict::RefutedAtOrder { order } => BellVerdict::RefutedAtOrder { order },
            CandidateVerdict::Inconclusive => BellVerdict::Inconclusive,
        }
    }
}

fn summarize(per_order: &[OrderEvidence]) -> CandidateVerdict {
    if let Some(e) = per_order.iter().find(|e| e.verdict == OrderVerdict::TooMany) {
        CandidateVerdict::RefutedAtOrder { order: e.n }
    } else if per_order.iter().all(|e| e.verdict == OrderVerdict::ExactN) {
        CandidateVerdict::Consistent
    } else {
        CandidateVerdict::Inconclusive
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WhaleCandidate {
    pub d: usize,
    pub per_order: Vec<OrderEvidence>,
    pub verdict: CandidateVerdict,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum WhaleOrder {
    Order { d: usize },
    ExceedsDmax,
    /// Whale shape needs strictly positive terms.
    NotPositive { index: usize },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WhaleReport {
    pub max_order_checked: usize,
    pub dmax: usize,
    pub order_estimate: WhaleOrder,
    /// Some smaller candidate was neither refuted nor consistent.
    pub lower_orders_inconclusive: bool,
    pub candidates: Vec<WhaleCandidate>,
}

/// Smallest `d <= dmax` for which `Δⁿa`, restricted to `k >= -d`, shows
/// exactly `min(n, d)` sign changes for every `n <= N`.
pub fn whale_order_up_to<T: Scalar>(
    seq: &FiniteSeq<T>,
    max_order: usize,
    dmax: usize,
    policy: &SignPolicy,
) -> Result<WhaleReport> {
    let row = seq.as_row();
    let threshold = policy.eps.threshold(&row);
    if let Some(index) = row
        .values
        .iter()
        .position(|v| v.snapped_sign(threshold) != Sign::Positive)
    {
        return Ok(WhaleReport {
            max_order_checked: max_order,
            dmax,
            order_estimate: WhaleOrder::NotPositive { index },
            lower_orders_inconclusive: false,
            candidates: Vec::new(),
        });
    }
    let table = DifferenceTable::new(seq, max_order)?;
    let mut candidates = Vec::with_capacity(dmax + 1);
    let mut estimate = WhaleOrder::ExceedsDmax;
    let mut inconclusive_below = false;
    for d in 0..=dmax {
        let per_order = (0..=max_order)
            .map(|n| {
                let from = -(d as i64);
                let restricted = table.row(n).from_index(from);
                let bounds = table.bound(n).map(|b| b.from_index(from));
                judge_row(&restricted, bounds.as_ref(), n, n.min(d), policy)
            })
            .collect::<Result<Vec<_>>>()?;
        let verdict = summarize(&per_order);
        candidates.push(WhaleCandidate {
            d,
            per_order,
            verdict,
        });
        match verdict {
            CandidateVerdict::Consistent => {
                estimate = WhaleOrder::Order { d };
                break;
            }
            CandidateVerdict::Inconclusive => inconclusive_below = true,
            CandidateVerdict::RefutedAtOrder { .. } => {}
        }
    }
    Ok(WhaleReport {
        max_order_checked: max_order,
        dmax,
        order_estimate: estimate,
        lower_orders_inconclusive: inconclusive_below && estimate != WhaleOrder::ExceedsDmax,
        candidates,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DecayReport {
    pub n: usize,
    /// Always `"heuristic"`: a finite window cannot prove a limit.
    pub evidence: &'static str,
    /// `(k, k^n Δⁿa(k))` over the last third of the window.
    pub samples: Vec<(i64, f64)>,
    pub max_magnitude: f64,
    pub nonincreasing: bool,
}

/// Tail behaviour of `kⁿ Δⁿa(k)` over the last third of `[0, K - n]`.
pub fn decay_diagnostic<T: Scalar>(seq: &FiniteSeq<T>, n: usize) -> Result<DecayReport> {
    let last = seq.last_index();
    if 2 * n > last {
        return Err(Error::WindowTooShort {
            needed: 2 * n,
            last,
        });
    }
    let row = super::delta_n(seq, n)?;
    let end = row.end();
    let begin = (end - end / 3).max(1);
    let samples: Vec<(i64, f64)> = (begin..=end)
        .map(|k| {
            let v = row.get(k).expect("index inside row").approx();
            (k, (k as f64).powi(n as i32) * v)
        })
        .collect();
    let magnitudes: Vec<f64> = samples.iter().map(|(_, v)| v.abs()).collect();
    Ok(DecayReport {
        n,
        evidence: "heuristic",
        max_magnitude: magnitudes.iter().copied().fold(0.0, f64::max),
        nonincreasing: magnitudes.windows(2).all(|w| w[1] <= w[0]),
        samples,
    })
}
