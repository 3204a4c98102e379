//! Finite windows of one-sided sequences and the difference calculus on them.
//!
//! A [`FiniteSeq`] stores `a(0), ..., a(K)`. Indices below zero read as zero;
//! indices above `K` are unknown, so every derived quantity is only computed
//! where it depends on stored terms alone.

mod classify;
mod positivity;
mod signs;

pub use classify::{
    decay_diagnostic, is_bell_shaped_up_to, is_completely_monotone_up_to, whale_order_up_to,
    BellReport, BellVerdict, CandidateVerdict, CmReport, DecayReport, OrderEvidence,
    OrderVerdict, WhaleCandidate, WhaleOrder, WhaleReport,
};
pub use positivity::{
    is_totally_positive_up_to, MinorWitness, TpBudget, TpReport, TpVerdict,
};
pub use signs::{sign_changes, sign_changes_bounded, EpsPolicy, SignChangeReport, SignPolicy};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::scalar::{Rational, Scalar};

/// Prefix `a(0), ..., a(K)` of a one-sided sequence.
#[derive(Debug, Clone, PartialEq)]
pub struct FiniteSeq<T = f64> {
    terms: Vec<T>,
}

impl<T: Scalar> FiniteSeq<T> {
    pub fn new(terms: Vec<T>) -> Result<Self> {
        if terms.is_empty() {
            return Err(Error::EmptySequence);
        }
        if let Some(index) = terms.iter().position(|t| !t.is_finite_value()) {
            return Err(Error::NonFinite { index });
        }
        Ok(FiniteSeq { terms })
    }

    /// Unit sequence `(1, 0, 0, ...)` on `[0, K]`, the neutral element of convolution.
    pub fn unit(last: usize) -> Self {
        let mut terms = vec![T::zero(); last + 1];
        terms[0] = T::one();
        FiniteSeq { terms }
    }

    pub fn terms(&self) -> &[T] {
        &self.terms
    }

    pub fn into_terms(self) -> Vec<T> {
        self.terms
    }

    /// Index `K` of the last stored term.
    pub fn last_index(&self) -> usize {
        self.terms.len() - 1
    }

    /// Zero-padded read: `Some(0)` for negative `k`, `None` past the window.
    pub fn get(&self, k: i64) -> Option<T> {
        if k < 0 {
            Some(T::zero())
        } else {
            self.terms.get(k as usize).cloned()
        }
    }

    /// Keeps `a(0), ..., a(last)`.
    pub fn truncated(&self, last: usize) -> Self {
        let end = (last + 1).min(self.terms.len());
        FiniteSeq {
            terms: self.terms[..end].to_vec(),
        }
    }

    pub fn as_row(&self) -> IndexedRow<T> {
        IndexedRow {
            start: 0,
            values: self.terms.clone(),
        }
    }

    pub fn to_f64(&self) -> FiniteSeq<f64> {
        FiniteSeq {
            terms: self.terms.iter().map(Scalar::approx).collect(),
        }
    }

    /// Exact rational image of the stored terms.
    pub fn to_rational(&self) -> Result<FiniteSeq<Rational>> {
        let terms = self
            .terms
            .iter()
            .map(|t| Rational::from_f64_value(t.approx()))
            .collect::<Result<Vec<_>>>()?;
        Ok(FiniteSeq { terms })
    }
}

impl FiniteSeq<Rational> {
    /// Same terms, without the float round trip of [`FiniteSeq::to_rational`].
    pub fn exact(&self) -> FiniteSeq<Rational> {
        self.clone()
    }
}

/// Values `v(start), v(start + 1), ...` of a sequence on a shifted window.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IndexedRow<T> {
    pub start: i64,
    pub values: Vec<T>,
}

impl<T: Scalar> IndexedRow<T> {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Index of the last value.
    pub fn end(&self) -> i64 {
        self.start + self.values.len() as i64 - 1
    }

    pub fn get(&self, k: i64) -> Option<&T> {
        if k < self.start {
            return None;
        }
        self.values.get((k - self.start) as usize)
    }

    /// Restriction to indices `>= from`.
    pub fn from_index(&self, from: i64) -> IndexedRow<T> {
        if from <= self.start {
            return self.clone();
        }
        let skip = ((from - self.start) as usize).min(self.values.len());
        IndexedRow {
            start: from,
            values: self.values[skip..].to_vec(),
        }
    }

    pub fn max_abs(&self) -> f64 {
        self.values
            .iter()
            .map(|v| v.approx().abs())
            .fold(0.0, f64::max)
    }
}

/// `Δⁿa(k)` for `k ∈ [-n, K - n]`, computed on the zero-padded extension.
///
/// Every returned value depends only on stored terms.
pub fn delta_n<T: Scalar>(seq: &FiniteSeq<T>, n: usize) -> Result<IndexedRow<T>> {
    let last = seq.last_index();
    if n > last {
        return Err(Error::WindowTooShort { needed: n, last });
    }
    let mut row = seq.as_row();
    for _ in 0..n {
        row = difference_step(&row);
    }
    Ok(row)
}

/// One application of `Δ` to a row whose entries left of `start` vanish.
fn difference_step<T: Scalar>(row: &IndexedRow<T>) -> IndexedRow<T> {
    let mut values = Vec::with_capacity(row.values.len());
    let mut previous = T::zero();
    for v in &row.values {
        values.push(v.clone() - previous);
        previous = v.clone();
    }
    IndexedRow {
        start: row.start - 1,
        values,
    }
}

/// Relative accuracy assumed for floating-point input terms, in units of `f64::EPSILON`.
pub const TERM_ERROR_ULPS: f64 = 8.0;

/// Rows `Δ⁰a, Δ¹a, ..., Δᴺa`, each on its window `[-n, K - n]`.
///
/// In floating mode every row carries a running forward-error bound: an
/// entry whose magnitude stays below it has no reliable sign.
#[derive(Debug, Clone)]
pub struct DifferenceTable<T> {
    rows: Vec<IndexedRow<T>>,
    bounds: Vec<IndexedRow<f64>>,
}

impl<T: Scalar> DifferenceTable<T> {
    pub fn new(seq: &FiniteSeq<T>, max_order: usize) -> Result<Self> {
        let last = seq.last_index();
        if max_order > last {
            return Err(Error::WindowTooShort {
                needed: max_order,
                last,
            });
        }
        let mut rows = Vec::with_capacity(max_order + 1);
        rows.push(seq.as_row());
        for n in 0..max_order {
            let next = difference_step(&rows[n]);
            rows.push(next);
        }
        let bounds = if T::EXACT { Vec::new() } else { error_bounds(&rows) };
        Ok(DifferenceTable { rows, bounds })
    }

    pub fn row(&self, n: usize) -> &IndexedRow<T> {
        &self.rows[n]
    }

    /// Forward-error bound for row `n`; `None` in exact mode.
    pub fn bound(&self, n: usize) -> Option<&IndexedRow<f64>> {
        self.bounds.get(n)
    }

    pub fn max_order(&self) -> usize {
        self.rows.len() - 1
    }
}

/// `e_0(k) = c u |a(k)|`, `e_{n+1}(k) = e_n(k + 1) + e_n(k) + u |Δⁿ⁺¹a(k)|`.
fn error_bounds<T: Scalar>(rows: &[IndexedRow<T>]) -> Vec<IndexedRow<f64>> {
    let u = f64::EPSILON / 2.0;
    let mut out: Vec<IndexedRow<f64>> = Vec::with_capacity(rows.len());
    for (n, row) in rows.iter().enumerate() {
        let values = if n == 0 {
            row.values.iter().map(|v| TERM_ERROR_ULPS * f64::EPSILON * v.approx().abs()).collect()
        } else {
            let prev = &out[n - 1].values;
            row.values
                .iter()
                .enumerate()
                .map(|(i, v)| {
                    let right = prev.get(i).copied().unwrap_or(0.0);
                    let left = if i > 0 { prev[i - 1] } else { 0.0 };
                    right + left + u * v.approx().abs()
                })
                .collect()
        };
        out.push(IndexedRow {
            start: row.start,
            values,
        });
    }
    out
}

/// `(a * b)(k) = Σ_{j=0}^{k} a(j) b(k - j)` on `[0, min(Ka, Kb)]`.
pub fn convolve<T: Scalar>(a: &FiniteSeq<T>, b: &FiniteSeq<T>) -> FiniteSeq<T> {
    let last = a.last_index().min(b.last_index());
    let terms = (0..=last)
        .map(|k| {
            (0..=k).fold(T::zero(), |acc, j| {
                acc + a.terms[j].clone() * b.terms[k - j].clone()
            })
        })
        .collect();
    FiniteSeq { terms }
}

/// Convolution of several factors on their common window.
pub fn convolve_all<T: Scalar>(factors: &[FiniteSeq<T>]) -> Option<FiniteSeq<T>> {
    let (first, rest) = factors.split_first()?;
    Some(rest.iter().fold(first.clone(), |acc, f| convolve(&acc, f)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::ratio;

    fn rationals(values: &[(i64, i64)]) -> FiniteSeq<Rational> {
        FiniteSeq::new(values.iter().map(|&(n, d)| ratio(n, d)).collect()).unwrap()
    }

    #[test]
    fn rejects_empty_and_non_finite() {
        assert_eq!(FiniteSeq::<f64>::new(vec![]), Err(Error::EmptySequence));
        assert_eq!(
            FiniteSeq::new(vec![1.0, f64::NAN]),
            Err(Error::NonFinite { index: 1 })
        );
    }

    #[test]
    fn first_difference_with_zero_padding() {
        let seq = FiniteSeq::new(vec![1.0, 2.0, 4.0]).unwrap();
        let row = delta_n(&seq, 1).unwrap();
        assert_eq!(row.start, -1);
        assert_eq!(row.values, vec![1.0, 1.0, 2.0]);
    }

    #[test]
    fn zeroth_difference_is_identity() {
        let seq = FiniteSeq::new(vec![0.3, 0.2, 0.1]).unwrap();
        let row = delta_n(&seq, 0).unwrap();
        assert_eq!(row.start, 0);
        assert_eq!(row.values, seq.terms());
    }

    #[test]
    fn window_too_short() {
        let seq = FiniteSeq::new(vec![1.0, 2.0]).unwrap();
        assert_eq!(
            delta_n(&seq, 2),
            Err(Error::WindowTooShort { needed: 2, last: 1 })
        );
    }

    #[test]
    fn geometric_third_difference() {
        let seq = FiniteSeq::new((0..=10).map(|k| ratio(1, 1 << k)).collect()).unwrap();
        let row = delta_n(&seq, 3).unwrap();
        for k in 0..=7 {
            assert_eq!(
                row.get(k).unwrap(),
                &(ratio(-1, 8) * ratio(1, 1 << k)),
                "k = {k}"
            );
        }
    }

    #[test]
    fn table_matches_delta_n() {
        let seq = rationals(&[(1, 3), (1, 3), (1, 3), (0, 1), (0, 1), (0, 1), (0, 1)]);
        let table = DifferenceTable::new(&seq, 5).unwrap();
        for n in 0..=5 {
            assert_eq!(table.row(n), &delta_n(&seq, n).unwrap());
        }
    }

    #[test]
    fn convolution_examples() {
        let unit = FiniteSeq::<f64>::unit(4);
        let b = FiniteSeq::new(vec![0.5, 0.25, 0.125, 0.0625, 0.03125]).unwrap();
        assert_eq!(convolve(&unit, &b), b);

        let ones = FiniteSeq::new(vec![1.0, 1.0, 0.0]).unwrap();
        assert_eq!(convolve(&ones, &ones).terms(), &[1.0, 2.0, 1.0]);

        let g2 = FiniteSeq::new((0..=2).map(|k| ratio(1, 1 << k)).collect()).unwrap();
        let g3 = FiniteSeq::new((0..=2).map(|k| ratio(1, 3_i64.pow(k))).collect()).unwrap();
        assert_eq!(convolve(&g2, &g3).terms()[2], ratio(19, 36));
    }

    #[test]
    fn convolution_truncates_to_common_window() {
        let a = FiniteSeq::new(vec![1.0, 1.0, 1.0, 1.0]).unwrap();
        let b = FiniteSeq::new(vec![1.0, 1.0]).unwrap();
        assert_eq!(convolve(&a, &b).last_index(), 1);
    }

    #[test]
    fn restriction_and_lookup() {
        let row = IndexedRow {
            start: -2,
            values: vec![1.0, 2.0, 3.0, 4.0],
        };
        assert_eq!(row.end(), 1);
        assert_eq!(row.get(0), Some(&3.0));
        assert_eq!(row.get(-3), None);
        let tail = row.from_index(0);
        assert_eq!(tail.start, 0);
        assert_eq!(tail.values, vec![3.0, 4.0]);
    }
}
