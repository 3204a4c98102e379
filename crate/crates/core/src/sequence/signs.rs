use serde::{Deserialize, Serialize};

use super::IndexedRow;
use crate::error::{Error, Result};
use crate::scalar::{Scalar, Sign};

/// Relative snap factor used by [`EpsPolicy::Auto`] in floating mode.
pub const DEFAULT_ROW_RELATIVE_EPS: f64 = 1e-12;

/// Fraction of a row, counted from its right end, in which a flip marks the
/// count as a lower bound.
pub const DEFAULT_TAIL_GUARD: f64 = 0.25;

/// How small a value must be to count as zero.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
#[serde(tag = "kind", content = "value", rename_all = "snake_case")]
pub enum EpsPolicy {
    /// Row-relative `1e-12` in floating mode, exact zero for rationals.
    #[default]
    Auto,
    /// `factor * max |row|`.
    RowRelative(f64),
    Absolute(f64),
}

impl EpsPolicy {
    pub fn threshold<T: Scalar>(&self, row: &IndexedRow<T>) -> f64 {
        match *self {
            EpsPolicy::Auto if T::EXACT => 0.0,
            EpsPolicy::Auto => DEFAULT_ROW_RELATIVE_EPS * row.max_abs(),
            EpsPolicy::RowRelative(factor) => factor * row.max_abs(),
            EpsPolicy::Absolute(eps) => eps,
        }
    }

    /// Threshold for a bare value scale (used where there is no row).
    pub fn threshold_for_scale<T: Scalar>(&self, scale: f64) -> f64 {
        match *self {
            EpsPolicy::Auto if T::EXACT => 0.0,
            EpsPolicy::Auto => DEFAULT_ROW_RELATIVE_EPS * scale,
            EpsPolicy::RowRelative(factor) => factor * scale,
            EpsPolicy::Absolute(eps) => eps,
        }
    }
}

/// Zero-snapping together with the tail guard.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SignPolicy {
    pub eps: EpsPolicy,
    pub tail_guard: f64,
}

impl Default for SignPolicy {
    fn default() -> Self {
        SignPolicy {
            eps: EpsPolicy::Auto,
            tail_guard: DEFAULT_TAIL_GUARD,
        }
    }
}

impl SignPolicy {
    pub fn with_eps(eps: EpsPolicy) -> Self {
        SignPolicy {
            eps,
            ..SignPolicy::default()
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SignChangeReport {
    /// Length of the maximal alternating witness chain.
    pub count: usize,
    /// Consecutive witness pairs `(i, j)` with `v(i) v(j) < 0`.
    pub flip_positions: Vec<(i64, i64)>,
    /// The last flip falls inside the trailing guard zone, so flips may
    /// continue past the window and `count` is only a lower bound.
    pub saturated: bool,
    pub first_sign: Sign,
    /// Sign of the last nonzero value, `zero` if every value snapped to zero.
    pub final_sign: Sign,
    pub threshold: f64,
}

/// Counts sign changes of `row` after snapping `|v| <= eps` to zero.
///
/// Zeros are skipped, so the count is the longest chain
/// `k_0 < k_1 < ... < k_N` with `v(k_{j-1}) v(k_j) < 0`.
pub fn sign_changes<T: Scalar>(row: &IndexedRow<T>, policy: &SignPolicy) -> Result<SignChangeReport> {
    sign_changes_bounded(row, None, policy)
}

/// As [`sign_changes`], but an entry is also snapped when it does not exceed
/// its error bound. `bounds` must cover the same indices as `row`.
pub fn sign_changes_bounded<T: Scalar>(
    row: &IndexedRow<T>,
    bounds: Option<&IndexedRow<f64>>,
    policy: &SignPolicy,
) -> Result<SignChangeReport> {
    if row.is_empty() {
        return Err(Error::Domain("sign changes of an empty row".into()));
    }
    if let Some(b) = bounds {
        if b.start != row.start || b.len() != row.len() {
            return Err(Error::Domain("error bounds do not match the row".into()));
        }
    }
    let threshold = policy.eps.threshold(row);
    let mut flips = Vec::new();
    let mut first_sign = Sign::Zero;
    let mut last: Option<(i64, Sign)> = None;
    for (offset, value) in row.values.iter().enumerate() {
        let local = bounds.map_or(threshold, |b| threshold.max(b.values[offset]));
        let sign = value.snapped_sign(local);
        if sign == Sign::Zero {
            continue;
        }
        let k = row.start + offset as i64;
        match last {
            None => first_sign = sign,
            Some((prev_k, prev_sign)) if prev_sign != sign => flips.push((prev_k, k)),
            Some(_) => {}
        }
        last = Some((k, sign));
    }
    let guard = ((row.len() as f64 * policy.tail_guard).ceil() as i64).max(1);
    let saturated = flips
        .last()
        .map(|&(_, j)| j > row.end() - guard)
        .unwrap_or(false);
    Ok(SignChangeReport {
        count: flips.len(),
        flip_positions: flips,
        saturated,
        first_sign,
        final_sign: last.map(|(_, s)| s).unwrap_or(Sign::Zero),
        threshold,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{ratio, Rational};

    fn row(values: &[f64]) -> IndexedRow<f64> {
        IndexedRow {
            start: 0,
            values: values.to_vec(),
        }
    }

    #[test]
    fn counts_alternations() {
        let report = sign_changes(&row(&[1.0, -1.0, 1.0]), &SignPolicy::default()).unwrap();
        assert_eq!(report.count, 2);
        assert_eq!(report.flip_positions, vec![(0, 1), (1, 2)]);
    }

    #[test]
    fn zeros_are_transparent() {
        let report = sign_changes(&row(&[1.0, 0.0, -1.0]), &SignPolicy::default()).unwrap();
        assert_eq!(report.count, 1);
        assert_eq!(report.flip_positions, vec![(0, 2)]);
    }

    #[test]
    fn second_difference_of_uniform_three() {
        let third = ratio(1, 3);
        let zero = Rational::from_integer(0.into());
        let values = vec![
            third.clone(),
            -third.clone(),
            zero,
            -third.clone(),
            third,
        ];
        let report = sign_changes(&IndexedRow { start: -2, values }, &SignPolicy::default()).unwrap();
        assert_eq!(report.count, 2);
        assert_eq!(report.flip_positions, vec![(-2, -1), (1, 2)]);
    }

    #[test]
    fn empty_row_is_an_error() {
        assert!(sign_changes(&row(&[]), &SignPolicy::default()).is_err());
    }

    #[test]
    fn snapping_hides_noise() {
        let values = [1.0, 1e-15, -1e-15, 1e-15, 0.5];
        assert_eq!(sign_changes(&row(&values), &SignPolicy::default()).unwrap().count, 0);
        let raw = SignPolicy::with_eps(EpsPolicy::Absolute(0.0));
        assert_eq!(sign_changes(&row(&values), &raw).unwrap().count, 2);
    }

    #[test]
    fn saturation_reflects_late_flips() {
        let mut values = vec![1.0; 12];
        values[11] = -1.0;
        assert!(sign_changes(&row(&values), &SignPolicy::default()).unwrap().saturated);
        values[11] = 1.0;
        values[2] = -1.0;
        values[3] = 1.0;
        let report = sign_changes(&row(&values), &SignPolicy::default()).unwrap();
        assert_eq!(report.count, 2);
        assert!(!report.saturated);
    }
}
