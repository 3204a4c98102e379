//! Minors of the Toeplitz matrix `(a(k - l))_{k, l ∈ [0, K]}`.

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::signs::EpsPolicy;
use super::FiniteSeq;
use crate::error::{Error, Result};
use crate::scalar::{Scalar, Sign};

/// Limits for minor enumeration.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TpBudget {
    /// Largest minor size enumerated exhaustively.
    pub exhaustive_order: usize,
    /// Largest index `K` enumerated exhaustively.
    pub exhaustive_last_index: usize,
    /// Random minors drawn when the exhaustive budget is exceeded; zero
    /// turns sampling off.
    pub samples: usize,
    pub seed: u64,
}

impl Default for TpBudget {
    fn default() -> Self {
        TpBudget {
            exhaustive_order: 4,
            exhaustive_last_index: 12,
            samples: 200_000,
            seed: 0x5eed,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum TpVerdict {
    Pass,
    Fail,
    BudgetExceeded,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MinorWitness {
    pub rows: Vec<usize>,
    pub cols: Vec<usize>,
    pub det: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TpReport {
    pub order: usize,
    pub verdict: TpVerdict,
    pub exhaustive: bool,
    pub minors_evaluated: u64,
    /// Number of square minors of size `<= order` (as a float: it overflows quickly).
    pub total_minors: f64,
    /// `minors_evaluated / total_minors`; 1 for exhaustive runs.
    pub coverage: f64,
    pub seed: Option<u64>,
    pub witness: Option<MinorWitness>,
}

fn binomial(n: usize, k: usize) -> f64 {
    if k > n {
        return 0.0;
    }
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// Determinant by Gaussian elimination, pivoting on the largest magnitude.
pub(crate) fn determinant<T: Scalar>(mut m: Vec<Vec<T>>) -> T {
    let size = m.len();
    let mut det = T::one();
    for col in 0..size {
        let pivot = (col..size)
            .filter(|&r| !m[r][col].is_zero())
            .max_by(|&a, &b| {
                m[a][col]
                    .approx()
                    .abs()
                    .partial_cmp(&m[b][col].approx().abs())
                    .unwrap_or(std::cmp::Ordering::Equal)
            });
        let Some(pivot) = pivot else {
            return T::zero();
        };
        if pivot != col {
            m.swap(pivot, col);
            det = -det;
        }
        let p = m[col][col].clone();
        det = det * p.clone();
        for r in col + 1..size {
            if m[r][col].is_zero() {
                continue;
            }
            let factor = m[r][col].clone() / p.clone();
            for c in col..size {
                let delta = factor.clone() * m[col][c].clone();
                m[r][c] = m[r][c].clone() - delta;
            }
        }
    }
    det
}

struct MinorChecker<'a, T> {
    terms: &'a [T],
    eps: EpsPolicy,
    scale: f64,
}

impl<T: Scalar> MinorChecker<'_, T> {
    fn entry(&self, row: usize, col: usize) -> T {
        if row >= col {
            self.terms[row - col].clone()
        } else {
            T::zero()
        }
    }

    /// `Some(det)` when the minor is negative beyond tolerance.
    fn violation(&self, rows: &[usize], cols: &[usize]) -> Option<f64> {
        let matrix = rows
            .iter()
            .map(|&r| cols.iter().map(|&c| self.entry(r, c)).collect())
            .collect();
        let det = determinant(matrix);
        let eps = self
            .eps
            .threshold_for_scale::<T>(self.scale.powi(rows.len() as i32));
        (det.snapped_sign(eps) == Sign::Negative).then(|| det.approx())
    }
}

/// Advances `combo` to the next `k`-subset of `0..n` in lexicographic order.
fn next_combination(combo: &mut [usize], n: usize) -> bool {
    let k = combo.len();
    for i in (0..k).rev() {
        if combo[i] < n - k + i {
            combo[i] += 1;
            for j in i + 1..k {
                combo[j] = combo[j - 1] + 1;
            }
            return true;
        }
    }
    false
}

/// Checks that all minors of size `<= order` of `(a(k - l))` are `>= -eps`.
pub fn is_totally_positive_up_to<T: Scalar>(
    seq: &FiniteSeq<T>,
    order: usize,
    eps: EpsPolicy,
    budget: &TpBudget,
) -> Result<TpReport> {
    if order == 0 {
        return Err(Error::Domain("minor order must be at least 1".into()));
    }
    let n = seq.terms().len();
    if order > n {
        return Err(Error::WindowTooShort {
            needed: order,
            last: seq.last_index(),
        });
    }
    let total: f64 = (1..=order).map(|m| binomial(n, m).powi(2)).sum();
    let checker = MinorChecker {
        terms: seq.terms(),
        eps,
        scale: seq.as_row().max_abs().max(f64::MIN_POSITIVE),
    };
    let exhaustive =
        order <= budget.exhaustive_order && seq.last_index() <= budget.exhaustive_last_index;

    let mut evaluated = 0u64;
    let report = |verdict, evaluated: u64, witness, exhaustive: bool| TpReport {
        order,
        verdict,
        exhaustive,
        minors_evaluated: evaluated,
        total_minors: total,
        coverage: if exhaustive { 1.0 } else { evaluated as f64 / total },
        seed: (!exhaustive).then_some(budget.seed),
        witness,
    };

    if exhaustive {
        for m in 1..=order {
            let mut rows: Vec<usize> = (0..m).collect();
            loop {
                let mut cols: Vec<usize> = (0..m).collect();
                loop {
                    evaluated += 1;
                    if let Some(det) = checker.violation(&rows, &cols) {
                        let witness = MinorWitness {
                            rows: rows.clone(),
                            cols: cols.clone(),
                            det,
                        };
                        return Ok(report(TpVerdict::Fail, evaluated, Some(witness), true));
                    }
                    if !next_combination(&mut cols, n) {
                        break;
                    }
                }
                if !next_combination(&mut rows, n) {
                    break;
                }
            }
        }
        return Ok(report(TpVerdict::Pass, evaluated, None, true));
    }

    if budget.samples == 0 {
        return Ok(report(TpVerdict::BudgetExceeded, 0, None, false));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(budget.seed);
    for _ in 0..budget.samples {
        let m = rng.gen_range(1..=order);
        let mut rows = sample(&mut rng, n, m).into_vec();
        let mut cols = sample(&mut rng, n, m).into_vec();
        rows.sort_unstable();
        cols.sort_unstable();
        evaluated += 1;
        if let Some(det) = checker.violation(&rows, &cols) {
            let witness = MinorWitness { rows, cols, det };
            return Ok(report(TpVerdict::Fail, evaluated, Some(witness), false));
        }
    }
    Ok(report(TpVerdict::Pass, evaluated, None, false))
}
