//! Moments `A(k) = ∫_0^1 x^k F(x) dx` and the discrete Post inversion.

use num_bigint::BigInt;
use num_integer::binomial;
use serde::Serialize;

use super::TailMeta;
use crate::error::{Error, Result};
use crate::quadrature::{integrate_real, Tolerance};
use crate::scalar::{Rational, Scalar};
use crate::sequence::FiniteSeq;
use crate::series::ln_binomial;

/// Largest `n` accepted by [`PostMode::ExactDelta`] unless configured otherwise.
pub const DEFAULT_EXACT_DELTA_BOUND: usize = 30;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MomentValue {
    pub value: f64,
    /// Bound on `Σ_{j > K} a(j)/(j + k + 1)` under the tail model; infinite without one.
    pub tail_bound: f64,
}

/// `A(k) = Σ_j a(j)/(j + k + 1)` from the window, with a tail bound.
pub fn moment(seq: &FiniteSeq, k: usize, tail: &TailMeta) -> MomentValue {
    let value = seq
        .terms()
        .iter()
        .enumerate()
        .map(|(j, a)| a / (j + k + 1) as f64)
        .sum();
    let last = seq.last_index();
    let tail_bound = if tail.valid {
        seq.terms()[last].abs() * tail.rho / (1.0 - tail.rho) / (last + k + 2) as f64
    } else {
        f64::INFINITY
    };
    MomentValue { value, tail_bound }
}

/// Window moments `A(from), ..., A(from + count - 1)` in the backend type.
pub fn moments<T: Scalar>(seq: &FiniteSeq<T>, from: usize, count: usize) -> Vec<T> {
    (from..from + count)
        .map(|k| {
            seq.terms()
                .iter()
                .enumerate()
                .fold(T::zero(), |acc, (j, a)| acc + a.clone() / T::from_count(j + k + 1))
        })
        .collect()
}

/// `∫_0^1 (x^k - 1) F(x) dx = -Σ_j a(j) k / ((j + 1)(j + k + 1))`.
///
/// Finite whenever `a(j)/j` is summable; shares every difference of order
/// `n >= 1` with the plain moments.
pub fn shifted_moments<T: Scalar>(seq: &FiniteSeq<T>, from: usize, count: usize) -> Vec<T> {
    (from..from + count)
        .map(|k| {
            seq.terms().iter().enumerate().fold(T::zero(), |acc, (j, a)| {
                let w = T::from_count(k) / (T::from_count(j + 1) * T::from_count(j + k + 1));
                acc - a.clone() * w
            })
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum PostMode {
    /// `(k + 1) C(k, j) ∫ x^j (1 - x)^{k-j} F(x) dx` by quadrature.
    Integral,
    /// `(n + j + 1) C(n + j, n) (-1)^n Δⁿ A(j)` in exact rationals.
    ExactDelta { bound: usize },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PostEstimate {
    pub x: f64,
    pub n: usize,
    /// `j_n = floor(n x / (1 - x))`.
    pub j: usize,
    pub value: f64,
    pub mode: PostMode,
    /// Quadrature error estimate (integral mode only).
    pub quadrature_error: Option<f64>,
}

fn horner(terms: &[f64], t: f64) -> f64 {
    terms.iter().rev().fold(0.0, |acc, &a| acc * t + a)
}

/// Discrete Post inversion of the window polynomial `F_K` at `x ∈ (0, 1)`.
pub fn post_inversion(seq: &FiniteSeq, x: f64, n: usize, mode: PostMode) -> Result<PostEstimate> {
    if !(x > 0.0 && x < 1.0) {
        return Err(Error::Domain(format!("x = {x} is not in (0, 1)")));
    }
    if n == 0 {
        return Err(Error::Domain("n must be at least 1".into()));
    }
    let j = (n as f64 * x / (1.0 - x)).floor() as usize;
    let k = n + j;
    let (value, quadrature_error) = match mode {
        PostMode::ExactDelta { bound } => {
            if n > bound {
                return Err(Error::ModeBoundExceeded { n, bound });
            }
            let exact = seq.to_rational()?;
            let a = moments(&exact, j, n + 1);
            // (-1)^n Δⁿ A(j) = Σ_i C(n, i) (-1)^i A(j + i)
            let mut delta = Rational::from_integer(BigInt::from(0));
            for (i, ai) in a.iter().enumerate() {
                let c = Rational::from_integer(binomial(BigInt::from(n), BigInt::from(i)));
                let term = c * ai;
                delta = if i % 2 == 0 { delta + term } else { delta - term };
            }
            let factor = BigInt::from(k + 1) * binomial(BigInt::from(k), BigInt::from(n));
            ((Rational::from_integer(factor) * delta).approx(), None)
        }
        PostMode::Integral => {
            let (jf, kf) = (j as f64, k as f64);
            let log_scale = (kf + 1.0).ln() + ln_binomial(kf, jf);
            let terms = seq.terms();
            let weight = |t: f64| {
                if t <= 0.0 || t >= 1.0 {
                    return 0.0;
                }
                let lw = log_scale + jf * t.ln() + (kf - jf) * (1.0 - t).ln();
                lw.exp() * horner(terms, t)
            };
            let mode_at = jf / kf;
            let width = (mode_at * (1.0 - mode_at) / (kf + 2.0)).sqrt() + 1.0 / (kf + 2.0);
            let mut knots = vec![0.0, mode_at - 8.0 * width, mode_at, mode_at + 8.0 * width, 1.0];
            knots.iter_mut().for_each(|t| *t = t.clamp(0.0, 1.0));
            knots.dedup();
            let tol = Tolerance {
                abs: 1e-14,
                rel: 1e-13,
                ..Tolerance::default()
            };
            let (v, err) = integrate_real(weight, &knots, &tol)?;
            (v, Some(err))
        }
    };
    Ok(PostEstimate {
        x,
        n,
        j,
        value,
        mode,
        quadrature_error,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::ratio;
    use approx::assert_relative_eq;

    fn geometric(last: usize) -> FiniteSeq {
        FiniteSeq::new((0..=last).map(|k| 0.5_f64.powi(k as i32)).collect()).unwrap()
    }

    #[test]
    fn moment_examples() {
        let unit = FiniteSeq::<f64>::unit(5);
        for k in 0..5 {
            assert_eq!(moment(&unit, k, &TailMeta::estimate(&unit)).value, 1.0 / (k + 1) as f64);
        }
        let g = geometric(80);
        let m = moment(&g, 0, &TailMeta::estimate(&g));
        assert_relative_eq!(m.value, 2.0 * 2.0_f64.ln(), max_relative = 1e-15);
        assert!(m.tail_bound < 1e-20);
        let a: Vec<f64> = moments(&g, 0, 10);
        assert!(a.windows(2).all(|w| w[1] < w[0]));
    }

    #[test]
    fn shifted_moments_share_differences() {
        let seq = FiniteSeq::new(vec![ratio(1, 1), ratio(3, 2), ratio(3, 4), ratio(1, 5)]).unwrap();
        let plain = moments(&seq, 2, 6);
        let shifted = shifted_moments(&seq, 2, 6);
        let first = |v: &[Rational]| v.windows(2).map(|w| &w[1] - &w[0]).collect::<Vec<_>>();
        assert_eq!(first(&plain), first(&shifted));
        assert_eq!(shifted_moments(&seq, 0, 1)[0], ratio(0, 1));
    }

    #[test]
    fn constant_function() {
        let unit = FiniteSeq::<f64>::unit(0);
        let e = post_inversion(&unit, 0.4, 5, PostMode::ExactDelta { bound: 30 }).unwrap();
        assert!((e.value - 1.0).abs() < 0.2);
        let i = post_inversion(&unit, 0.4, 5, PostMode::Integral).unwrap();
        assert_relative_eq!(i.value, e.value, max_relative = 1e-12);
    }

    #[test]
    fn geometric_converges() {
        let g = geometric(200);
        let err = |n| (post_inversion(&g, 0.5, n, PostMode::Integral).unwrap().value - 4.0 / 3.0).abs();
        let (e16, e64, e256) = (err(16), err(64), err(256));
        assert!(e16 > e64 && e64 > e256, "{e16} {e64} {e256}");
        assert!(e256 <= 0.02);
    }

    #[test]
    fn modes_agree() {
        let g = geometric(60);
        for n in 1..=20 {
            let a = post_inversion(&g, 0.3, n, PostMode::Integral).unwrap().value;
            let b = post_inversion(&g, 0.3, n, PostMode::ExactDelta { bound: 30 }).unwrap().value;
            assert!((a - b).abs() <= 1e-9, "n = {n}: {a} vs {b}");
        }
    }

    #[test]
    fn bounds_and_domain() {
        let g = geometric(10);
        assert_eq!(
            post_inversion(&g, 0.5, 31, PostMode::ExactDelta { bound: 30 }),
            Err(Error::ModeBoundExceeded { n: 31, bound: 30 })
        );
        assert!(post_inversion(&g, 1.0, 3, PostMode::Integral).is_err());
        assert!(post_inversion(&g, 0.5, 0, PostMode::Integral).is_err());
    }
}
