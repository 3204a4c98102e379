//! Generating functions, evaluated either from stored coefficients or from
//! the exponential representation `exp(bx + c + ∫ (1/(s - x) - s/(1 + s²)) φ(s) ds)`.

mod moments;
mod recover;

pub use moments::{
    moment, moments, post_inversion, shifted_moments, MomentValue, PostEstimate, PostMode,
    DEFAULT_EXACT_DELTA_BOUND,
};
pub use recover::{default_ladder, phi_recover, PhiRecovery, Rung};

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::phi::{PhiSpec, PosPart};
use crate::quadrature::{integrate, Tolerance};
use crate::scalar::Scalar;
use crate::sequence::FiniteSeq;

/// Geometric tail model `a(K + j) <= a(K) ρ^j` for the unseen coefficients.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TailMeta {
    pub rho: f64,
    /// The estimate is backed by the window (or was declared by the caller).
    pub valid: bool,
    pub declared: bool,
}

impl TailMeta {
    /// Ratio estimate from the last quarter of the window.
    ///
    /// Valid when the terms there are positive, the ratios `a(k+1)/a(k)` are
    /// nonincreasing and their maximum is below 1; `ρ` is that maximum.
    pub fn estimate(seq: &FiniteSeq) -> TailMeta {
        let a = seq.terms();
        let last = seq.last_index();
        let from = last - last / 4;
        if last < 4 || a[from..].iter().any(|&v| !(v > 0.0)) {
            return TailMeta {
                rho: f64::NAN,
                valid: false,
                declared: false,
            };
        }
        let ratios: Vec<f64> = a[from..].windows(2).map(|w| w[1] / w[0]).collect();
        let rho = ratios.iter().copied().fold(0.0, f64::max);
        let nonincreasing = ratios.windows(2).all(|r| r[1] <= r[0] * (1.0 + 1e-12));
        TailMeta {
            rho,
            valid: nonincreasing && rho < 1.0,
            declared: false,
        }
    }

    pub fn declared(rho: f64) -> TailMeta {
        TailMeta {
            rho,
            valid: rho > 0.0 && rho < 1.0,
            declared: true,
        }
    }

    /// Radius inside which the tail bound is finite.
    pub fn radius(&self) -> f64 {
        if self.valid {
            1.0 / self.rho
        } else {
            1.0
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CoeffValue {
    pub value: Complex64,
    /// Bound on the contribution of the unseen tail; infinite without a valid tail model.
    pub error_bound: f64,
}

/// Horner evaluation of the window polynomial with a tail bound
/// `a(K)|x|^K ρ|x| / (1 - ρ|x|)`.
pub fn eval_from_coeffs(seq: &FiniteSeq, x: Complex64, tail: &TailMeta) -> Result<CoeffValue> {
    let modulus = x.norm();
    let radius = tail.radius();
    if modulus >= radius {
        return Err(Error::OutsideRadius { modulus, radius });
    }
    let value = seq
        .terms()
        .iter()
        .rev()
        .fold(Complex64::new(0.0, 0.0), |acc, &a| acc * x + a);
    let error_bound = if tail.valid {
        let a_last = seq.terms()[seq.last_index()].abs();
        let rx = tail.rho * modulus;
        a_last * modulus.powi(seq.last_index() as i32) * rx / (1.0 - rx)
    } else {
        f64::INFINITY
    };
    Ok(CoeffValue { value, error_bound })
}

fn on_cut<T: Scalar>(spec: &PhiSpec<T>, x: Complex64) -> bool {
    if x.im != 0.0 {
        return false;
    }
    let neg_cut = spec.neg_thresholds.iter().any(|v| x.re <= v.approx()) || x.re <= 0.0;
    neg_cut || x.re >= 1.0
}

/// `Log(s - x) - ½ ln(1 + s²)`, an antiderivative of the kernel in `s` for
/// `s` to the right of `x`.
fn right_primitive(s: f64, x: Complex64) -> Complex64 {
    (Complex64::new(s, 0.0) - x).ln() - 0.5 * (1.0 + s * s).ln()
}

/// `∫_w^∞ (1/(s - x) - s/(1 + s²)) ds = ½ ln(1 + w²) - Log(w - x)`.
fn unit_step_right(w: f64, x: Complex64) -> Complex64 {
    -right_primitive(w, x)
}

/// `∫_{-∞}^v (1/(s - x) - s/(1 + s²)) ds = Log(x - v) - ½ ln(1 + v²)`.
fn unit_step_left(v: f64, x: Complex64) -> Complex64 {
    (x - v).ln() - 0.5 * (1.0 + v * v).ln()
}

/// `∫_a^b` of the kernel, `b` possibly infinite.
fn constant_piece(a: f64, b: f64, x: Complex64) -> Complex64 {
    if b.is_infinite() {
        unit_step_right(a, x)
    } else {
        right_primitive(b, x) - right_primitive(a, x)
    }
}

/// `(1 + s x) / ((s - x)(1 + s²))`, the kernel without the cancellation at large `s`.
fn kernel(s: f64, x: Complex64) -> Complex64 {
    (1.0 + s * x) / ((s - x) * (1.0 + s * s))
}

/// `∫_1^∞ kernel(s, x) (s - 1)^ν ds`.
///
/// `[1, S0]` is mapped by `s = 1 + (S0 - 1) τ^{1/ν}` and `[S0, ∞)` by
/// `s = S0 u^{-1/(1-ν)}`; both integrands are bounded after the change.
fn power_law_integral(nu: f64, x: Complex64, tol: &Tolerance) -> Result<Complex64> {
    let s0 = 2.0 + x.re.max(0.0);
    let len = s0 - 1.0;
    let head = |tau: f64| {
        let s = 1.0 + len * tau.powf(1.0 / nu);
        let jac = len / nu * tau.powf(1.0 / nu - 1.0);
        kernel(s, x) * len.powf(nu) * tau * jac
    };
    let mut knots = vec![0.0, 1.0];
    if x.re > 1.0 && x.re < s0 {
        knots.insert(1, ((x.re - 1.0) / len).powf(nu));
    }
    let near = integrate(head, &knots, tol)?;

    let alpha = 1.0 / (1.0 - nu);
    let tail = |u: f64| {
        let s = s0 * u.powf(-alpha);
        if !s.is_finite() || s > 1e150 {
            return Complex64::new(0.0, 0.0);
        }
        let jac = alpha * s0 * u.powf(-alpha - 1.0);
        kernel(s, x) * (s - 1.0).powf(nu) * jac
    };
    let mut knots = vec![0.0, 1.0];
    if x.re > s0 {
        knots.insert(1, (s0 / x.re).powf(1.0 / alpha));
    }
    let far = integrate(tail, &knots, tol)?;
    Ok(near.value + far.value)
}

fn pos_integral<T: Scalar>(part: &PosPart<T>, x: Complex64, tol: &Tolerance) -> Result<Complex64> {
    Ok(match part {
        PosPart::Steps { w } => w.iter().map(|w| unit_step_right(w.approx(), x)).sum(),
        PosPart::PowerLaw { lambda, nu } => {
            let (lambda, nu) = (lambda.approx(), nu.approx());
            lambda / PI * (nu * PI).sin() * power_law_integral(nu, x, tol)?
        }
        PosPart::Piecewise { breaks, levels } => {
            let mut total = Complex64::new(0.0, 0.0);
            for (i, level) in levels.iter().enumerate() {
                let level = level.approx();
                if level == 0.0 {
                    continue;
                }
                let a = if i == 0 { 1.0 } else { breaks[i - 1].approx() };
                let b = breaks.get(i).map(Scalar::approx).unwrap_or(f64::INFINITY);
                total += level * constant_piece(a, b, x);
            }
            total
        }
        PosPart::Residual { base, minus } => {
            pos_integral(base, x, tol)?
                - minus
                    .iter()
                    .map(|w| unit_step_right(w.approx(), x))
                    .sum::<Complex64>()
        }
    })
}

/// The exponent `bx + c + ∫ (1/(s - x) - s/(1 + s²)) φ(s) ds`, i.e. the
/// continuous logarithm of `F(x)`.
pub fn log_from_phi<T: Scalar>(spec: &PhiSpec<T>, x: Complex64) -> Result<Complex64> {
    if on_cut(spec, x) {
        return Err(Error::OnCut { re: x.re, im: x.im });
    }
    let tol = Tolerance::default();
    let neg: Complex64 = spec
        .neg_thresholds
        .iter()
        .map(|v| unit_step_left(v.approx(), x))
        .sum();
    Ok(spec.b.approx() * x + spec.c.approx() + neg + pos_integral(&spec.pos_part, x, &tol)?)
}

/// `F(x)` from the exponential representation.
pub fn eval_from_phi<T: Scalar>(spec: &PhiSpec<T>, x: Complex64) -> Result<Complex64> {
    Ok(log_from_phi(spec, x)?.exp())
}

/// Replaces `c` so that `log F(1/2)` equals `log_target`.
pub fn normalize_c(spec: &PhiSpec<f64>, log_target: f64) -> Result<PhiSpec<f64>> {
    let current = log_from_phi(spec, Complex64::new(0.5, 0.0))?.re;
    Ok(PhiSpec {
        c: spec.c + (log_target - current),
        ..spec.clone()
    })
}

/// Anchor of the c-normalization convention.
pub const NORMALIZATION_POINT: f64 = 0.5;

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Backing {
    Coefficients { seq: Vec<f64>, tail: TailMeta },
    Phi { spec: PhiSpec<f64> },
}

/// An evaluable generating function.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GenFunModel {
    backing: Backing,
    #[serde(skip)]
    seq: Option<FiniteSeq>,
}

impl GenFunModel {
    /// Coefficient model with an estimated tail.
    pub fn from_coeffs(seq: FiniteSeq) -> Self {
        let tail = TailMeta::estimate(&seq);
        Self::with_tail(seq, tail)
    }

    pub fn with_tail(seq: FiniteSeq, tail: TailMeta) -> Self {
        GenFunModel {
            backing: Backing::Coefficients {
                seq: seq.terms().to_vec(),
                tail,
            },
            seq: Some(seq),
        }
    }

    pub fn from_phi(spec: PhiSpec<f64>) -> Self {
        GenFunModel {
            backing: Backing::Phi { spec },
            seq: None,
        }
    }

    pub fn backing(&self) -> &Backing {
        &self.backing
    }

    pub fn eval(&self, x: Complex64) -> Result<Complex64> {
        match (&self.backing, &self.seq) {
            (Backing::Coefficients { tail, .. }, Some(seq)) => Ok(eval_from_coeffs(seq, x, tail)?.value),
            (Backing::Phi { spec }, _) => eval_from_phi(spec, x),
            (Backing::Coefficients { .. }, None) => unreachable!("coefficient model keeps its sequence"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constructors::{cm_from_measure, negative_binomial, pf_from_params, HausdorffMeasure, PFParams};
    use crate::phi::phi_from_pf;
    use approx::assert_relative_eq;

    fn geometric(p: f64, last: usize) -> FiniteSeq {
        FiniteSeq::new((0..=last).map(|k| p.powi(k as i32)).collect()).unwrap()
    }

    fn re(x: f64) -> Complex64 {
        Complex64::new(x, 0.0)
    }

    #[test]
    fn coefficient_examples() {
        let g = geometric(0.5, 60);
        let tail = TailMeta::estimate(&g);
        assert!(tail.valid);
        assert_relative_eq!(tail.rho, 0.5, max_relative = 1e-14);
        let v = eval_from_coeffs(&g, re(0.5), &tail).unwrap();
        assert!((v.value.re - 4.0 / 3.0).abs() <= v.error_bound + 1e-15);
        assert!(v.error_bound < 1e-30);

        let unit = FiniteSeq::unit(10);
        let v = eval_from_coeffs(&unit, Complex64::new(0.3, 0.4), &TailMeta::estimate(&unit)).unwrap();
        assert_eq!(v.value, re(1.0));

        let nb = negative_binomial(0.5, 2.0, 200).unwrap();
        let v = eval_from_coeffs(&nb, re(0.9), &TailMeta::estimate(&nb)).unwrap();
        assert_relative_eq!(v.value.re, (0.5_f64 / 0.55).powi(2), max_relative = 1e-12);
    }

    #[test]
    fn outside_radius_is_an_error() {
        let unit = FiniteSeq::unit(3);
        assert!(matches!(
            eval_from_coeffs(&unit, re(1.0), &TailMeta::estimate(&unit)),
            Err(Error::OutsideRadius { .. })
        ));
        let g = geometric(0.5, 60);
        assert!(eval_from_coeffs(&g, re(1.9), &TailMeta::estimate(&g)).is_ok());
    }

    #[test]
    fn closed_form_steps() {
        let spec = phi_from_pf(&PFParams {
            b: 0.0,
            c: 0.0,
            p: vec![0.5],
            q: vec![],
        })
        .unwrap();
        let spec = normalize_c(&spec, 0.0).unwrap();
        // F = C / (1 - x/2) with F(1/2) = 1.
        for x in [0.1, 0.3, 0.7, 0.9] {
            let f = eval_from_phi(&spec, re(x)).unwrap();
            assert_relative_eq!(f.re, 0.75 / (1.0 - x / 2.0), max_relative = 1e-13);
            assert!(f.im.abs() < 1e-15);
        }
        assert_eq!(eval_from_phi(&PhiSpec::<f64>::zero(), re(0.4)).unwrap(), re(1.0));
        assert!(matches!(eval_from_phi(&spec, re(2.5)), Err(Error::OnCut { .. })));
        assert!(matches!(eval_from_phi(&spec, re(-0.5)), Err(Error::OnCut { .. })));
    }

    #[test]
    fn negative_binomial_constant_has_a_half() {
        let (p, lambda) = (0.5, 2.0);
        let spec = PhiSpec::negative_binomial(p, lambda).unwrap();
        let paper_c = lambda * (1.0 - p).ln() - lambda * (1.0 + p * p).ln();
        let wrong = PhiSpec { c: paper_c, ..spec.clone() };
        for x in [0.1, 0.5, 0.9] {
            let want = ((1.0 - p) / (1.0 - p * x)).powf(lambda);
            assert_relative_eq!(eval_from_phi(&spec, re(x)).unwrap().re, want, max_relative = 1e-13);
            let off = eval_from_phi(&wrong, re(x)).unwrap().re / want;
            assert_relative_eq!(off, (1.0 + p * p).powf(-lambda / 2.0), max_relative = 1e-13);
        }
    }

    #[test]
    fn bernoulli_factor_and_drift() {
        let params = PFParams {
            b: 1.0,
            c: 0.0,
            p: vec![0.5],
            q: vec![1.0],
        };
        let spec = phi_from_pf(&params).unwrap();
        let seq = pf_from_params(&params, 200).unwrap();
        let model = GenFunModel::from_coeffs(seq);
        let target = model.eval(re(0.5)).unwrap().re.ln();
        let spec = normalize_c(&spec, target).unwrap();
        for i in 1..=9 {
            let x = i as f64 / 10.0;
            let want = x.exp() * (1.0 + x) / (1.0 - x / 2.0);
            assert_relative_eq!(eval_from_phi(&spec, re(x)).unwrap().re, want, max_relative = 1e-12);
            assert_relative_eq!(model.eval(re(x)).unwrap().re, want, max_relative = 1e-12);
        }
    }

    #[test]
    fn stable_power_law_matches_closed_form() {
        let (lambda, nu) = (1.0, 0.5);
        let spec = PhiSpec::discrete_stable(lambda, nu).unwrap();
        let log_f = |x: f64| -lambda * (1.0 - x).powf(nu);
        let spec = normalize_c(&spec, log_f(0.5)).unwrap();
        for x in [0.1, 0.3, 0.6, 0.9] {
            let got = log_from_phi(&spec, re(x)).unwrap();
            assert!((got.re - log_f(x)).abs() < 1e-10, "x = {x}: {got}");
            assert!(got.im.abs() < 1e-12);
        }
        // Off the axis as well: log F = -λ (1 - z)^ν.
        let z = Complex64::new(3.0, 0.2);
        let got = log_from_phi(&spec, z).unwrap();
        let want = -lambda * (Complex64::new(1.0, 0.0) - z).powf(nu);
        assert!((got - want).norm() < 1e-9, "{got} vs {want}");
    }

    #[test]
    fn increasing_on_unit_interval_and_mass_at_one() {
        let mu = HausdorffMeasure {
            atoms: vec![(0.3, 1.0), (1.0, 0.25)],
            density: None,
        };
        let a = cm_from_measure(&mu, 20_000).unwrap();
        let tail = TailMeta::estimate(&a);
        assert!(!tail.valid);
        let with_atom = |x: f64| (1.0 - x) * eval_from_coeffs(&a, re(x), &tail).unwrap().value.re;
        assert!((with_atom(0.999) - 0.25).abs() < 2e-3);

        let mu = HausdorffMeasure::dirac(0.3);
        let b = cm_from_measure(&mu, 200).unwrap();
        let model = GenFunModel::from_coeffs(b);
        let mut prev = 0.0;
        for i in 1..100 {
            let x = i as f64 / 100.0;
            let f = model.eval(re(x)).unwrap().re;
            assert!(f > prev);
            prev = f;
        }
        assert!((1.0 - 0.99) * prev < 0.02);
    }
}
