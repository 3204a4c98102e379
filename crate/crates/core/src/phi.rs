//! The density φ of the exponential representation, its validation and its
//! split into a PF part and a `[0, 1]`-valued part.
//!
//! φ is integer-valued and nonincreasing on `(-∞, 0)`, vanishes on `[0, 1]`
//! and is increasing-after-rounding on `(1, ∞)`.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::constructors::PFParams;
use crate::error::{Error, Result};
use crate::quadrature::{integrate_real, Tolerance};
use crate::scalar::Scalar;

/// φ restricted to `(1, ∞)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PosPart<T = f64> {
    /// `#{m : s > w_m}`.
    Steps { w: Vec<T> },
    /// `(λ/π) sin(νπ) (s - 1)^ν`, `0 < ν < 1`.
    PowerLaw { lambda: T, nu: T },
    /// `levels[0]` on `(1, breaks[0])`, `levels[i]` on `(breaks[i-1], breaks[i])`,
    /// the last level on `(breaks[last], ∞)`.
    Piecewise { breaks: Vec<T>, levels: Vec<T> },
    /// `base(s) - #{m : s > minus_m}`; what is left after removing integer steps.
    Residual { base: Box<PosPart<T>>, minus: Vec<T> },
}

fn count_below<T: Scalar>(thresholds: &[T], s: f64) -> usize {
    thresholds.iter().filter(|w| w.approx() < s).count()
}

fn sorted<T: Scalar>(values: &[T]) -> Vec<T> {
    let mut v = values.to_vec();
    v.sort_by(|a, b| a.partial_cmp(b).expect("finite thresholds"));
    v
}

impl<T: Scalar> PosPart<T> {
    /// Zero function.
    pub fn zero() -> Self {
        PosPart::Steps { w: Vec::new() }
    }

    /// Value at `s`; zero for `s <= 1`.
    pub fn value(&self, s: f64) -> f64 {
        if s <= 1.0 {
            return 0.0;
        }
        match self {
            PosPart::Steps { w } => count_below(w, s) as f64,
            PosPart::PowerLaw { lambda, nu } => {
                let (lambda, nu) = (lambda.approx(), nu.approx());
                lambda / PI * (nu * PI).sin() * (s - 1.0).powf(nu)
            }
            PosPart::Piecewise { breaks, levels } => {
                let idx = breaks.iter().take_while(|b| b.approx() < s).count();
                levels[idx].approx()
            }
            PosPart::Residual { base, minus } => base.value(s) - count_below(minus, s) as f64,
        }
    }

    /// Jump locations.
    pub fn breakpoints(&self) -> Vec<f64> {
        let mut out: Vec<f64> = match self {
            PosPart::Steps { w } => w.iter().map(Scalar::approx).collect(),
            PosPart::PowerLaw { .. } => Vec::new(),
            PosPart::Piecewise { breaks, .. } => breaks.iter().map(Scalar::approx).collect(),
            PosPart::Residual { base, minus } => {
                let mut b = base.breakpoints();
                b.extend(minus.iter().map(Scalar::approx));
                b
            }
        };
        out.sort_by(f64::total_cmp);
        out.dedup();
        out
    }

    /// Exponent `e` with `φ(s) = O(s^e)` as `s → ∞`.
    pub fn tail_exponent(&self) -> f64 {
        match self {
            PosPart::PowerLaw { nu, .. } => nu.approx(),
            PosPart::Residual { base, .. } => base.tail_exponent(),
            _ => 0.0,
        }
    }

    /// A constant `C` with `φ(s) <= C s^e` on `(1, ∞)`, `e` the tail exponent.
    pub fn tail_constant(&self) -> f64 {
        match self {
            PosPart::Steps { w } => w.len() as f64,
            PosPart::PowerLaw { lambda, nu } => lambda.approx() / PI * (nu.approx() * PI).sin(),
            PosPart::Piecewise { levels, .. } => levels.iter().map(Scalar::approx).fold(0.0, f64::max),
            PosPart::Residual { base, .. } => base.tail_constant(),
        }
    }

    /// `lim sup φ(s)` as `s ↓ 1`, read off the closed form.
    pub fn limit_at_one(&self) -> f64 {
        match self {
            PosPart::Steps { w } => w.iter().filter(|w| w.approx() <= 1.0).count() as f64,
            PosPart::PowerLaw { .. } => 0.0,
            PosPart::Piecewise { breaks, levels } => {
                let skipped = breaks.iter().take_while(|b| b.approx() <= 1.0).count();
                levels[skipped].approx()
            }
            PosPart::Residual { base, minus } => {
                base.limit_at_one() - minus.iter().filter(|m| m.approx() <= 1.0).count() as f64
            }
        }
    }

    fn check_shape(&self) -> Result<()> {
        let finite = |v: &[T]| v.iter().all(Scalar::is_finite_value);
        match self {
            PosPart::Steps { w } => {
                if !finite(w) {
                    return Err(Error::MalformedPhi("non-finite step threshold".into()));
                }
            }
            PosPart::PowerLaw { lambda, nu } => {
                if !lambda.is_positive() || !lambda.is_finite_value() {
                    return Err(Error::MalformedPhi("power law needs lambda > 0".into()));
                }
                if !nu.is_positive() || !nu.is_finite_value() {
                    return Err(Error::MalformedPhi("power law needs nu > 0".into()));
                }
            }
            PosPart::Piecewise { breaks, levels } => {
                if levels.len() != breaks.len() + 1 {
                    return Err(Error::MalformedPhi(format!(
                        "piecewise part has {} breaks and {} levels; expected one more level than breaks",
                        breaks.len(),
                        levels.len()
                    )));
                }
                if !finite(breaks) || !finite(levels) {
                    return Err(Error::MalformedPhi("non-finite piecewise data".into()));
                }
                if breaks.windows(2).any(|w| w[0] >= w[1]) {
                    return Err(Error::MalformedPhi("piecewise breaks must increase".into()));
                }
                if breaks.first().is_some_and(|b| b.approx() <= 1.0) {
                    return Err(Error::MalformedPhi("piecewise breaks must exceed 1".into()));
                }
                if levels.iter().any(|l| l.is_negative()) {
                    return Err(Error::MalformedPhi("piecewise levels must be nonnegative".into()));
                }
            }
            PosPart::Residual { base, minus } => {
                base.check_shape()?;
                if !finite(minus) {
                    return Err(Error::MalformedPhi("non-finite residual threshold".into()));
                }
            }
        }
        Ok(())
    }
}

/// φ together with the constants `b` and `c`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound(deserialize = "T: Deserialize<'de> + Default"), deny_unknown_fields)]
pub struct PhiSpec<T = f64> {
    #[serde(default)]
    pub b: T,
    #[serde(default)]
    pub c: T,
    /// `φ(s) = #{m : s < v_m}` on `(-∞, 0)`.
    #[serde(default)]
    pub neg_thresholds: Vec<T>,
    pub pos_part: PosPart<T>,
    /// Optional choice of the points where the integer part of φ steps up.
    #[serde(skip_serializing_if = "Vec::is_empty", default)]
    pub declared_points_of_increase: Vec<T>,
}

impl<T: Scalar> PhiSpec<T> {
    /// φ ≡ 0, `F ≡ e^c`.
    pub fn zero() -> Self {
        PhiSpec {
            b: T::zero(),
            c: T::zero(),
            neg_thresholds: Vec::new(),
            pos_part: PosPart::zero(),
            declared_points_of_increase: Vec::new(),
        }
    }

    pub fn value(&self, s: f64) -> f64 {
        if s < 0.0 {
            self.neg_thresholds.iter().filter(|v| s < v.approx()).count() as f64
        } else if s <= 1.0 {
            // Thresholds sitting at 0 or positive are reported by the validator;
            // here only the representation is evaluated.
            self.neg_thresholds.iter().filter(|v| s < v.approx()).count() as f64
        } else {
            self.neg_thresholds.iter().filter(|v| s < v.approx()).count() as f64
                + self.pos_part.value(s)
        }
    }

    pub fn check_shape(&self) -> Result<()> {
        if !self.b.is_finite_value() || !self.c.is_finite_value() {
            return Err(Error::MalformedPhi("b and c must be finite".into()));
        }
        if self.b.is_negative() {
            return Err(Error::MalformedPhi("b must be nonnegative".into()));
        }
        if !self.neg_thresholds.iter().all(Scalar::is_finite_value) {
            return Err(Error::MalformedPhi("non-finite negative threshold".into()));
        }
        if !self.declared_points_of_increase.iter().all(Scalar::is_finite_value) {
            return Err(Error::MalformedPhi("non-finite point of increase".into()));
        }
        self.pos_part.check_shape()
    }
}

impl PhiSpec<f64> {
    /// `φ = λ 1_{(1/p, ∞)}` with `c` chosen so that `F(x) = ((1 - p)/(1 - px))^λ`.
    pub fn negative_binomial(p: f64, lambda: f64) -> Result<Self> {
        if !(p > 0.0 && p < 1.0 && lambda > 0.0 && lambda.is_finite()) {
            return Err(Error::Domain(format!("negative binomial needs 0 < p < 1 and lambda > 0, got p = {p}, lambda = {lambda}")));
        }
        Ok(PhiSpec {
            b: 0.0,
            c: lambda * (1.0 - p).ln() - 0.5 * lambda * (1.0 + p * p).ln(),
            neg_thresholds: Vec::new(),
            pos_part: PosPart::Piecewise {
                breaks: vec![1.0 / p],
                levels: vec![0.0, lambda],
            },
            declared_points_of_increase: Vec::new(),
        })
    }

    /// φ of `exp(-λ(1 - x)^ν)`.
    ///
    /// For `ν < 1` the constant `c` has no convenient closed form and is left
    /// at zero; fix it with [`crate::genfun::normalize_c`]. For `ν = 1` the
    /// function is `e^{λ(x - 1)}`, i.e. `b = λ`, `c = -λ`, φ ≡ 0.
    pub fn discrete_stable(lambda: f64, nu: f64) -> Result<Self> {
        if !(lambda > 0.0 && lambda.is_finite() && nu > 0.0 && nu <= 1.0) {
            return Err(Error::Domain(format!("discrete stable needs lambda > 0 and nu in (0, 1], got lambda = {lambda}, nu = {nu}")));
        }
        if nu == 1.0 {
            return Ok(PhiSpec {
                b: lambda,
                c: -lambda,
                ..PhiSpec::zero()
            });
        }
        Ok(PhiSpec {
            pos_part: PosPart::PowerLaw { lambda, nu },
            ..PhiSpec::zero()
        })
    }
}

/// Outcome of one validation condition.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConditionCheck {
    pub passed: bool,
    pub detail: String,
}

impl ConditionCheck {
    fn new(passed: bool, detail: impl Into<String>) -> Self {
        ConditionCheck {
            passed,
            detail: detail.into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PhiValidation {
    pub integer_steps_on_negative_axis: ConditionCheck,
    pub zero_on_unit_interval: ConditionCheck,
    pub increasing_after_rounding: ConditionCheck,
    pub tail_integrable: ConditionCheck,
    pub nonintegrable_near_one: ConditionCheck,
    /// Upper end `S` of the sampling grid on `(1, S]`.
    pub grid_upper: f64,
    pub grid_points: usize,
}

impl PhiValidation {
    pub fn passed(&self) -> bool {
        [
            &self.integer_steps_on_negative_axis,
            &self.zero_on_unit_interval,
            &self.increasing_after_rounding,
            &self.tail_integrable,
            &self.nonintegrable_near_one,
        ]
        .iter()
        .all(|c| c.passed)
    }
}

/// Contribution of `∫_S^∞ φ(s)/s² ds` allowed by the grid policy.
pub const GRID_TAIL_BUDGET: f64 = 1e-10;
const GRID_START_POINTS: usize = 64;
const GRID_MAX_POINTS: usize = 16_384;
const GRID_NEAR_ONE: f64 = 1e-8;
/// Unit steps kept by [`decompose_phi`] before an unbounded φ is truncated.
pub const MAX_DECOMPOSITION_STEPS: usize = 4096;

/// Upper end `S` of the sampling grid, chosen so that the declared tail
/// bound `C s^e` contributes less than [`GRID_TAIL_BUDGET`] to `∫ φ/s²`.
pub fn grid_upper<T: Scalar>(part: &PosPart<T>) -> f64 {
    let e = part.tail_exponent();
    let c = part.tail_constant().max(1e-300);
    let from_tail = if e < 1.0 {
        (c / ((1.0 - e) * GRID_TAIL_BUDGET)).powf(1.0 / (1.0 - e))
    } else {
        // No finite S satisfies the budget; the tail check fails anyway.
        1e6
    };
    let last_break = part.breakpoints().last().copied().unwrap_or(1.0);
    from_tail.max(2.0 * last_break).clamp(4.0, 1e300)
}

/// Geometric grid in `s - 1` on `(1, S]` with `points` nodes, plus both
/// sides of every breakpoint.
fn sample_grid(extra: &[f64], upper: f64, points: usize) -> Vec<f64> {
    let lo = GRID_NEAR_ONE.ln();
    let hi = (upper - 1.0).ln();
    let mut grid: Vec<f64> = (0..points)
        .map(|i| 1.0 + (lo + (hi - lo) * i as f64 / (points - 1) as f64).exp())
        .collect();
    for &b in extra {
        if b > 1.0 && b < upper {
            let h = 1e-9 * b;
            grid.push((b - h).max(1.0 + GRID_NEAR_ONE / 2.0));
            grid.push(b + h);
        }
    }
    grid.sort_by(f64::total_cmp);
    grid.dedup();
    grid.retain(|&s| s > 1.0);
    grid
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RoundingViolation {
    /// Integer `n` such that `φ - n` goes from positive to negative.
    pub n: i64,
    /// Sample indices `(i, j)`, `i < j`, with `φ(s_i) > n > φ(s_j)`.
    pub indices: (usize, usize),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RoundingReport {
    pub passed: bool,
    pub violation: Option<RoundingViolation>,
}

/// Checks that for every integer `n`, the samples of `φ - n` change sign at
/// most once, and only from negative to positive.
///
/// That fails exactly when some later sample sits below an integer that an
/// earlier sample exceeds, so one pass with a running maximum suffices.
pub fn increasing_after_rounding(samples: &[(f64, f64)]) -> Result<RoundingReport> {
    if samples.len() < 2 {
        return Err(Error::Domain("need at least two samples".into()));
    }
    if let Some(index) = samples.iter().position(|(s, v)| !(*s > 1.0) || !v.is_finite()) {
        return Err(Error::Domain(format!(
            "sample {index} is not a finite value at some s > 1"
        )));
    }
    if let Some(index) = samples.windows(2).position(|w| !(w[0].0 < w[1].0)) {
        return Err(Error::Unsorted { index: index + 1 });
    }
    let mut best = 0;
    for j in 1..samples.len() {
        let n = samples[j].1.floor() + 1.0;
        if samples[best].1 > n {
            return Ok(RoundingReport {
                passed: false,
                violation: Some(RoundingViolation {
                    n: n as i64,
                    indices: (best, j),
                }),
            });
        }
        if samples[j].1 > samples[best].1 {
            best = j;
        }
    }
    Ok(RoundingReport {
        passed: true,
        violation: None,
    })
}

fn rounding_on_grid<T: Scalar>(spec: &PhiSpec<T>, upper: f64, points: usize) -> Result<RoundingReport> {
    let mut extra = spec.pos_part.breakpoints();
    extra.extend(spec.declared_points_of_increase.iter().map(Scalar::approx));
    let samples: Vec<(f64, f64)> = sample_grid(&extra, upper, points)
        .into_iter()
        .map(|s| (s, spec.pos_part.value(s)))
        .collect();
    increasing_after_rounding(&samples)
}

fn check_rounding<T: Scalar>(spec: &PhiSpec<T>, upper: f64) -> Result<(ConditionCheck, usize)> {
    let mut points = GRID_START_POINTS;
    let mut history: Vec<bool> = Vec::new();
    let mut last = rounding_on_grid(spec, upper, points)?;
    history.push(last.passed);
    while points < GRID_MAX_POINTS {
        let n = history.len();
        if n >= 3 && history[n - 1] == history[n - 2] && history[n - 2] == history[n - 3] {
            break;
        }
        points *= 2;
        last = rounding_on_grid(spec, upper, points)?;
        history.push(last.passed);
    }
    let detail = match &last.violation {
        None => format!("no violation on {points}-point grid up to s = {upper:.3e}"),
        Some(v) => format!(
            "phi - {} changes sign from + to - between samples {} and {}",
            v.n, v.indices.0, v.indices.1
        ),
    };
    // Declared points of increase must sit where the integer part may step.
    if last.passed {
        for (k, s) in sorted(&spec.declared_points_of_increase).iter().enumerate() {
            let (lo, hi) = admissible_interval(&spec.pos_part, k + 1, upper)?;
            let s = s.approx();
            if s < lo || s > hi {
                return Ok((
                    ConditionCheck::new(
                        false,
                        format!("declared point {s} is outside the admissible interval [{lo}, {hi}] for step {}", k + 1),
                    ),
                    points,
                ));
            }
        }
    }
    Ok((ConditionCheck::new(last.passed, detail), points))
}

/// `[s_k^-, s_k^+]`: where the `k`-th unit step of the integer part may sit.
///
/// `s_k^- = sup{s : φ(s) < k}`, `s_k^+ = inf{s : φ(s) > k}` (both in `[1, ∞]`).
fn admissible_interval<T: Scalar>(part: &PosPart<T>, k: usize, upper: f64) -> Result<(f64, f64)> {
    let kf = k as f64;
    Ok(match part {
        PosPart::Steps { w } => {
            let w = sorted(w);
            let at = |i: usize| w.get(i).map(Scalar::approx).unwrap_or(f64::INFINITY);
            (at(k - 1).max(1.0), at(k).max(1.0))
        }
        PosPart::PowerLaw { .. } => {
            let s = power_law_crossing(part, kf);
            (s, s)
        }
        PosPart::Piecewise { breaks, levels } => {
            let left_end = |i: usize| if i == 0 { 1.0 } else { breaks[i - 1].approx() };
            let right_end = |i: usize| breaks.get(i).map(Scalar::approx).unwrap_or(f64::INFINITY);
            let lo = levels
                .iter()
                .rposition(|l| l.approx() < kf)
                .map(right_end)
                .unwrap_or(1.0);
            let hi = levels
                .iter()
                .position(|l| l.approx() > kf)
                .map(left_end)
                .unwrap_or(f64::INFINITY);
            (lo, hi)
        }
        PosPart::Residual { .. } => {
            // Only reached through the grid: bracket on samples.
            let grid = sample_grid(&part.breakpoints(), upper, GRID_MAX_POINTS);
            let lo = grid
                .iter()
                .rev()
                .find(|&&s| part.value(s) < kf)
                .copied()
                .unwrap_or(1.0);
            let hi = grid
                .iter()
                .find(|&&s| part.value(s) > kf)
                .copied()
                .unwrap_or(f64::INFINITY);
            (lo, hi)
        }
    })
}

/// Solves `(λ/π) sin(νπ)(s - 1)^ν = level`.
fn power_law_crossing<T: Scalar>(part: &PosPart<T>, level: f64) -> f64 {
    match part {
        PosPart::PowerLaw { lambda, nu } => {
            let (lambda, nu) = (lambda.approx(), nu.approx());
            1.0 + (level * PI / (lambda * (nu * PI).sin())).powf(1.0 / nu)
        }
        _ => unreachable!("power_law_crossing on a non power-law part"),
    }
}

fn check_tail<T: Scalar>(spec: &PhiSpec<T>, upper: f64) -> ConditionCheck {
    let e = spec.pos_part.tail_exponent();
    let c = spec.pos_part.tail_constant();
    if e >= 1.0 {
        return ConditionCheck::new(
            false,
            format!("phi grows like s^{e}; the integral of phi/s^2 diverges"),
        );
    }
    // Samples must respect the declared envelope C s^e.
    let grid = sample_grid(&spec.pos_part.breakpoints(), upper, 512);
    if let Some(&s) = grid
        .iter()
        .find(|&&s| spec.pos_part.value(s) > c * s.powf(e) * (1.0 + 1e-12) + 1e-12)
    {
        return ConditionCheck::new(false, format!("phi({s}) exceeds the declared envelope {c} s^{e}"));
    }
    let bound = c * upper.powf(e - 1.0) / (1.0 - e);
    ConditionCheck::new(
        true,
        format!("phi <= {c} s^{e}; integral of phi/s^2 beyond s = {upper:.3e} is at most {bound:.3e}"),
    )
}

fn check_near_one<T: Scalar>(spec: &PhiSpec<T>) -> Result<ConditionCheck> {
    let limit = spec.pos_part.limit_at_one();
    if limit >= 1.0 {
        return Ok(ConditionCheck::new(
            false,
            format!("phi tends to {limit} at 1+, so (1 - phi)/(s - 1) is integrable there"),
        ));
    }
    let first_step = spec
        .pos_part
        .breakpoints()
        .into_iter()
        .find(|&b| b > 1.0)
        .unwrap_or(2.0);
    let mut delta0 = 0.5 * (first_step - 1.0).min(1.0);
    if let PosPart::PowerLaw { .. } = spec.pos_part {
        delta0 = delta0.min(0.5 * (power_law_crossing(&spec.pos_part, 0.5) - 1.0));
    }
    // J(δ) = ∫_{1+δ}^{1+δ0} (1 - φ)/(s - 1) ds in the variable u = ln(s - 1).
    let integrand = |u: f64| 1.0 - spec.pos_part.value(1.0 + u.exp());
    let deltas: Vec<f64> = (1..=6).map(|i| delta0 * 1e-2_f64.powi(i)).collect();
    let mut partial = Vec::with_capacity(deltas.len());
    let mut prev = delta0.ln();
    for d in &deltas {
        let (v, _) = integrate_real(integrand, &[d.ln(), prev], &Tolerance::default())?;
        partial.push(v);
        prev = d.ln();
    }
    let growing = partial.iter().all(|&v| v > 0.0) && partial[partial.len() - 1] >= 0.5 * partial[0];
    let detail = format!(
        "phi -> {limit} at 1+; truncated integral grows by {:.3} per factor 100 in delta",
        partial[partial.len() - 1]
    );
    Ok(ConditionCheck::new(growing, detail))
}

/// Checks every condition on φ; see [`PhiValidation`].
pub fn validate_phi<T: Scalar>(spec: &PhiSpec<T>) -> Result<PhiValidation> {
    spec.check_shape()?;

    let integer_steps = if spec.neg_thresholds.iter().all(|v| v.is_negative()) {
        ConditionCheck::new(
            true,
            format!("{} unit steps on the negative axis", spec.neg_thresholds.len()),
        )
    } else {
        ConditionCheck::new(false, "negative-axis thresholds must be < 0")
    };

    let neg_ok = spec.neg_thresholds.iter().all(|v| !v.is_positive());
    // A unit step at w < 1 would make phi = 1 on (w, 1].
    let pos_ok = match &spec.pos_part {
        PosPart::Steps { w } => w.iter().all(|w| w.approx() >= 1.0),
        _ => true,
    };
    let zero_on_unit = ConditionCheck::new(
        neg_ok && pos_ok,
        if !neg_ok {
            "a negative-axis threshold is positive, so phi > 0 somewhere in [0, 1]"
        } else if !pos_ok {
            "a step threshold below 1 makes phi positive inside [0, 1]"
        } else {
            "phi vanishes on [0, 1]"
        },
    );

    let upper = grid_upper(&spec.pos_part);
    let (rounding, points) = check_rounding(spec, upper)?;
    let tail = check_tail(spec, upper);
    let near_one = check_near_one(spec)?;
    Ok(PhiValidation {
        integer_steps_on_negative_axis: integer_steps,
        zero_on_unit_interval: zero_on_unit,
        increasing_after_rounding: rounding,
        tail_integrable: tail,
        nonintegrable_near_one: near_one,
        grid_upper: upper,
        grid_points: points,
    })
}

/// `φ = φ₁ + φ₂` with `φ₁` stepwise increasing (a PF factor) and `φ₂ ∈ [0, 1]`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PhiDecomposition<T = f64> {
    pub pf: PFParams<T>,
    /// Points of increase of `φ₁` on `(1, ∞)`, with multiplicity.
    pub steps: Vec<T>,
    pub phi2: PosPart<T>,
    /// The first step was moved from `s_1^-` to `s_1^+` to keep `φ₁ = 0` near 1.
    pub shifted: bool,
    /// Steps beyond this point were dropped (φ unbounded); `φ₂` exceeds 1 there.
    pub truncated_at: Option<f64>,
}

fn reciprocal<T: Scalar>(v: &T) -> T {
    T::one() / v.clone()
}

fn residual_of<T: Scalar>(part: &PosPart<T>, steps: &[T]) -> PosPart<T> {
    match part {
        PosPart::Steps { w } => {
            let mut rest = sorted(w);
            for s in steps {
                if let Some(i) = rest.iter().position(|x| x == s) {
                    rest.remove(i);
                } else {
                    return PosPart::Residual {
                        base: Box::new(part.clone()),
                        minus: steps.to_vec(),
                    };
                }
            }
            PosPart::Steps { w: rest }
        }
        PosPart::Piecewise { breaks, levels } => {
            let mut all = breaks.clone();
            for s in steps {
                if !all.contains(s) {
                    all.push(s.clone());
                }
            }
            let all = sorted(&all);
            let new_levels = (0..=all.len())
                .map(|i| {
                    // Interval (all[i-1], all[i]); everything at or left of its start has fired.
                    let lo = if i == 0 { 1.0 } else { all[i - 1].approx() };
                    let fired = breaks.iter().filter(|b| b.approx() <= lo).count();
                    let stepped = steps.iter().filter(|s| s.approx() <= lo).count();
                    levels[fired].clone() - T::from_count(stepped)
                })
                .collect();
            PosPart::Piecewise {
                breaks: all,
                levels: new_levels,
            }
        }
        _ => PosPart::Residual {
            base: Box::new(part.clone()),
            minus: steps.to_vec(),
        },
    }
}

/// Splits φ into a PF part and a `[0, 1]`-valued remainder.
///
/// Each unit step of `φ₁` is placed at the leftmost admissible point
/// `s_k^- = sup{s : φ(s) < k}` unless points of increase are declared.
pub fn decompose_phi<T: Scalar>(spec: &PhiSpec<T>) -> Result<PhiDecomposition<T>> {
    spec.check_shape()?;
    if let PosPart::Residual { .. } = spec.pos_part {
        return Err(Error::Decomposition("a residual part cannot be decomposed again".into()));
    }
    let upper = grid_upper(&spec.pos_part);
    let mut steps: Vec<T> = Vec::new();
    let mut shifted = false;
    let mut truncated_at = None;

    if !spec.declared_points_of_increase.is_empty() {
        steps = sorted(&spec.declared_points_of_increase);
        for (k, s) in steps.iter().enumerate() {
            let (lo, hi) = admissible_interval(&spec.pos_part, k + 1, upper)?;
            if s.approx() < lo || s.approx() > hi {
                return Err(Error::Decomposition(format!(
                    "declared point {} is outside [{lo}, {hi}]",
                    s.approx()
                )));
            }
        }
    } else {
        for k in 1.. {
            let (lo, hi) = admissible_interval(&spec.pos_part, k, upper)?;
            if lo.is_infinite() {
                break;
            }
            if lo > upper || k > MAX_DECOMPOSITION_STEPS {
                truncated_at = Some(lo.min(upper));
                break;
            }
            let mut at = lo;
            if k == 1 && at <= 1.0 {
                if hi > 1.0 && hi.is_finite() {
                    at = hi;
                    shifted = true;
                } else {
                    return Err(Error::Decomposition(
                        "phi >= 1 on every right neighbourhood of 1".into(),
                    ));
                }
            }
            steps.push(exact_point(&spec.pos_part, at)?);
        }
    }
    if steps.first().is_some_and(|s| s.approx() <= 1.0) {
        return Err(Error::Decomposition("first point of increase must exceed 1".into()));
    }

    let pf = PFParams {
        b: spec.b.clone(),
        c: spec.c.clone(),
        p: steps.iter().map(reciprocal).collect(),
        q: spec
            .neg_thresholds
            .iter()
            .map(|v| -reciprocal(v))
            .collect(),
    };
    let phi2 = residual_of(&spec.pos_part, &steps);
    Ok(PhiDecomposition {
        pf,
        steps,
        phi2,
        shifted,
        truncated_at,
    })
}

/// The `k`-th point of increase in the backend type, exact for step and
/// piecewise data.
fn exact_point<T: Scalar>(part: &PosPart<T>, at: f64) -> Result<T> {
    let candidates: Vec<T> = match part {
        PosPart::Steps { w } => w.clone(),
        PosPart::Piecewise { breaks, .. } => breaks.clone(),
        _ => Vec::new(),
    };
    match candidates.into_iter().find(|c| c.approx() == at) {
        Some(c) => Ok(c),
        None => T::from_f64_value(at),
    }
}

/// φ of `e^{bx + c} Π(1 + q x) / Π(1 - p x)`: unit steps at `-1/q` and `1/p`.
pub fn phi_from_pf<T: Scalar>(params: &PFParams<T>) -> Result<PhiSpec<T>> {
    params.validate()?;
    let w = sorted(
        &params
            .p
            .iter()
            .filter(|p| !p.is_zero())
            .map(reciprocal)
            .collect::<Vec<_>>(),
    );
    let v = sorted(
        &params
            .q
            .iter()
            .filter(|q| !q.is_zero())
            .map(|q| -reciprocal(q))
            .collect::<Vec<_>>(),
    );
    Ok(PhiSpec {
        b: params.b.clone(),
        c: params.c.clone(),
        neg_thresholds: v,
        declared_points_of_increase: w.clone(),
        pos_part: PosPart::Steps { w },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{ratio, Rational};

    fn bump() -> PhiSpec {
        PhiSpec {
            pos_part: PosPart::Piecewise {
                breaks: vec![2.0, 3.0, 4.0],
                levels: vec![0.0, 2.5, 1.0, 2.5],
            },
            ..PhiSpec::zero()
        }
    }

    #[test]
    fn rounding_examples() {
        let linear: Vec<_> = (1..50).map(|i| (1.0 + i as f64 * 0.1, 0.03 * i as f64)).collect();
        assert!(increasing_after_rounding(&linear).unwrap().passed);

        let bad = increasing_after_rounding(&[(1.5, 0.4), (2.0, 1.2), (3.0, 0.9)]).unwrap();
        assert!(!bad.passed);
        assert_eq!(
            bad.violation,
            Some(RoundingViolation {
                n: 1,
                indices: (1, 2)
            })
        );

        // Dips that stay within one integer band are allowed.
        let wiggle = [(1.5, 0.2), (2.0, 0.9), (2.5, 0.3), (3.0, 1.4), (3.5, 1.1)];
        assert!(increasing_after_rounding(&wiggle).unwrap().passed);

        assert!(matches!(
            increasing_after_rounding(&[(2.0, 0.0), (1.5, 1.0)]),
            Err(Error::Unsorted { index: 1 })
        ));
        assert!(increasing_after_rounding(&[(2.0, 0.0)]).is_err());
    }

    #[test]
    fn stable_power_law_samples() {
        let part = PosPart::<f64>::PowerLaw { lambda: 1.0, nu: 0.5 };
        let samples: Vec<_> = (0..=489)
            .map(|i| 1.1 + i as f64 * 0.1)
            .map(|s| (s, part.value(s)))
            .collect();
        assert!(increasing_after_rounding(&samples).unwrap().passed);
    }

    #[test]
    fn families_validate() {
        for spec in [
            PhiSpec::negative_binomial(0.5, 2.5).unwrap(),
            PhiSpec::negative_binomial(0.3, 0.5).unwrap(),
            PhiSpec::discrete_stable(1.0, 0.5).unwrap(),
            PhiSpec::discrete_stable(3.0, 0.9).unwrap(),
            PhiSpec::discrete_stable(2.0, 1.0).unwrap(),
        ] {
            let report = validate_phi(&spec).unwrap();
            assert!(report.passed(), "{report:#?}");
        }
    }

    #[test]
    fn bump_fails_rounding_only() {
        let report = validate_phi(&bump()).unwrap();
        assert!(!report.increasing_after_rounding.passed);
        assert!(report.zero_on_unit_interval.passed);
        assert!(report.tail_integrable.passed);
        assert!(report.nonintegrable_near_one.passed);
    }

    #[test]
    fn other_failures() {
        let steep = PhiSpec {
            pos_part: PosPart::PowerLaw { lambda: 1.0, nu: 1.2 },
            ..PhiSpec::zero()
        };
        assert!(!validate_phi(&steep).unwrap().tail_integrable.passed);

        let at_one = PhiSpec {
            pos_part: PosPart::Piecewise {
                breaks: vec![3.0],
                levels: vec![1.0, 2.0],
            },
            ..PhiSpec::zero()
        };
        let report = validate_phi(&at_one).unwrap();
        assert!(!report.nonintegrable_near_one.passed);
        assert!(report.zero_on_unit_interval.passed);

        let positive_v = PhiSpec {
            neg_thresholds: vec![0.5],
            ..PhiSpec::zero()
        };
        let report = validate_phi(&positive_v).unwrap();
        assert!(!report.integer_steps_on_negative_axis.passed);
        assert!(!report.zero_on_unit_interval.passed);

        let malformed = PhiSpec {
            pos_part: PosPart::Piecewise {
                breaks: vec![2.0],
                levels: vec![1.0],
            },
            ..PhiSpec::zero()
        };
        assert!(matches!(validate_phi(&malformed), Err(Error::MalformedPhi(_))));
    }

    #[test]
    fn pure_step_of_height_two() {
        let spec = PhiSpec {
            pos_part: PosPart::Piecewise {
                breaks: vec![3.0],
                levels: vec![0.0, 2.0],
            },
            ..PhiSpec::zero()
        };
        let d = decompose_phi(&spec).unwrap();
        assert_eq!(d.pf.p, vec![1.0 / 3.0, 1.0 / 3.0]);
        for s in [1.5, 2.9, 3.1, 100.0] {
            assert_eq!(d.phi2.value(s), 0.0);
        }
    }

    #[test]
    fn fractional_step_splits_into_floor_and_fraction() {
        let spec = PhiSpec::negative_binomial(0.5, 2.5).unwrap();
        let d = decompose_phi(&spec).unwrap();
        assert_eq!(d.pf.p, vec![0.5, 0.5]);
        assert_eq!(d.pf.c, spec.c);
        assert_eq!(
            d.phi2,
            PosPart::Piecewise {
                breaks: vec![2.0],
                levels: vec![0.0, 0.5]
            }
        );
        let phi1 = PosPart::Steps { w: d.steps.clone() };
        for i in 1..400 {
            let s = 1.0 + i as f64 * 0.05;
            if (s - 2.0).abs() < 1e-9 {
                continue;
            }
            assert_eq!(phi1.value(s) + d.phi2.value(s), spec.pos_part.value(s), "s = {s}");
            assert!((0.0..=1.0).contains(&d.phi2.value(s)));
        }
    }

    #[test]
    fn zero_phi_is_identity() {
        let d = decompose_phi(&PhiSpec::<f64>::zero()).unwrap();
        assert_eq!(d.pf, PFParams::identity());
        assert_eq!(d.phi2.value(5.0), 0.0);
    }

    #[test]
    fn power_law_is_truncated() {
        let spec = PhiSpec::discrete_stable(1.0, 0.5).unwrap();
        let d = decompose_phi(&spec).unwrap();
        assert!(d.truncated_at.is_some());
        assert!(!d.steps.is_empty());
        let cut = d.truncated_at.unwrap();
        let phi1 = PosPart::Steps { w: d.steps.clone() };
        for i in 1..2000 {
            let s = 1.0 + (i as f64 * 0.02).exp();
            if s > cut {
                break;
            }
            let r = d.phi2.value(s);
            assert!((-1e-9..=1.0 + 1e-9).contains(&r), "phi2({s}) = {r}");
            assert!((phi1.value(s) + r - spec.pos_part.value(s)).abs() < 1e-9);
        }
    }

    #[test]
    fn step_at_one_is_shifted_or_rejected() {
        // phi = 1 on (1, 3), 2 beyond: s_1^- = 1, so the step moves to s_1^+ = 3.
        let spec = PhiSpec {
            pos_part: PosPart::Piecewise {
                breaks: vec![3.0],
                levels: vec![1.0, 2.0],
            },
            ..PhiSpec::zero()
        };
        let d = decompose_phi(&spec).unwrap();
        assert!(d.shifted);
        assert_eq!(d.steps, vec![3.0, 3.0]);
        assert_eq!(d.phi2.value(2.0), 1.0);
        assert_eq!(d.phi2.value(4.0), 0.0);

        let hopeless = PhiSpec {
            pos_part: PosPart::Piecewise {
                breaks: vec![],
                levels: vec![1.5],
            },
            ..PhiSpec::zero()
        };
        assert!(matches!(decompose_phi(&hopeless), Err(Error::Decomposition(_))));
    }

    #[test]
    fn pf_examples() {
        let phi = phi_from_pf(&PFParams {
            b: 0.0,
            c: 0.0,
            p: vec![0.5],
            q: vec![],
        })
        .unwrap();
        assert_eq!(phi.pos_part, PosPart::Steps { w: vec![2.0] });
        assert_eq!(phi.value(1.9), 0.0);
        assert_eq!(phi.value(2.1), 1.0);

        let phi = phi_from_pf(&PFParams {
            b: 0.0,
            c: 0.0,
            p: vec![],
            q: vec![1.0],
        })
        .unwrap();
        assert_eq!(phi.neg_thresholds, vec![-1.0]);
        assert_eq!(phi.value(-1.5), 1.0);
        assert_eq!(phi.value(-0.5), 0.0);

        let phi = phi_from_pf(&PFParams {
            b: 0.0,
            c: 0.0,
            p: vec![0.5, 1.0 / 3.0],
            q: vec![],
        })
        .unwrap();
        assert_eq!(phi.value(2.5), 1.0);
        assert_eq!(phi.value(3.5), 2.0);
        assert!(validate_phi(&phi).unwrap().passed());
    }

    #[test]
    fn exact_round_trip() {
        let params = PFParams {
            b: ratio(1, 2),
            c: ratio(-1, 3),
            p: vec![ratio(2, 7), ratio(1, 2), ratio(2, 7), ratio(0, 1)],
            q: vec![ratio(3, 1), ratio(5, 11)],
        };
        let phi: PhiSpec<Rational> = phi_from_pf(&params).unwrap();
        assert!(validate_phi(&phi).unwrap().passed());
        let d = decompose_phi(&phi).unwrap();
        let mut want_p = vec![ratio(2, 7), ratio(1, 2), ratio(2, 7)];
        want_p.sort();
        let mut got_p = d.pf.p.clone();
        got_p.sort();
        assert_eq!(got_p, want_p);
        let mut got_q = d.pf.q.clone();
        got_q.sort();
        assert_eq!(got_q, vec![ratio(5, 11), ratio(3, 1)]);
        assert_eq!(d.pf.b, params.b);
        assert_eq!(d.pf.c, params.c);
    }
}
