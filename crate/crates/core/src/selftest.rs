//! The acceptance suite: ten checks with oracles that do not depend on the
//! code under test, each with a runtime budget.

use std::time::{Duration, Instant};

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::constructors::{
    bell_from_factors, cm_from_measure, discrete_stable, negative_binomial, BellCaseSampler, HausdorffMeasure,
    PFParams,
};
use crate::genfun::{post_inversion, PostMode};
use crate::genfun::{default_ladder, phi_recover};
use crate::genfun::{eval_from_coeffs, eval_from_phi, normalize_c, GenFunModel, TailMeta, NORMALIZATION_POINT};
use crate::phi::{phi_from_pf, PhiSpec};
use crate::scalar::{ratio, Rational};
use crate::sequence::{
    convolve, is_bell_shaped_up_to, is_totally_positive_up_to, sign_changes, whale_order_up_to, BellVerdict,
    EpsPolicy, FiniteSeq, SignPolicy, TpBudget, TpVerdict, WhaleOrder,
};

/// Row-relative snap factor for the float-mode checks. Rounding noise is
/// handled separately by the per-entry error bounds of the difference table.
pub const ROW_EPS: f64 = f64::EPSILON;

/// Seed used when none is given.
pub const DEFAULT_SEED: u64 = 20_240_601;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CriterionResult {
    pub id: usize,
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
    pub elapsed_ms: f64,
    pub limit_ms: u64,
}

type Check = fn(u64) -> Result<String, String>;

pub struct Criterion {
    pub id: usize,
    pub name: &'static str,
    pub limit: Duration,
    check: Check,
}

impl Criterion {
    /// Runs the check; it passes only if it also finishes within its budget.
    pub fn run(&self, seed: u64) -> CriterionResult {
        let start = Instant::now();
        let outcome = (self.check)(seed);
        let elapsed = start.elapsed();
        let (mut passed, mut detail) = match outcome {
            Ok(d) => (true, d),
            Err(d) => (false, d),
        };
        if elapsed > self.limit {
            passed = false;
            detail = format!("{detail}; over the {} ms budget", self.limit.as_millis());
        }
        CriterionResult {
            id: self.id,
            name: self.name,
            passed,
            detail,
            elapsed_ms: elapsed.as_secs_f64() * 1e3,
            limit_ms: self.limit.as_millis() as u64,
        }
    }
}

impl CriterionResult {
    /// One table line: `PASS  3 negative-binomial  (12.3 ms / 5000 ms)  detail`.
    pub fn line(&self) -> String {
        format!(
            "{} {:>2} {:<24} ({:.1} ms / {} ms)  {}",
            if self.passed { "PASS" } else { "FAIL" },
            self.id,
            self.name,
            self.elapsed_ms,
            self.limit_ms,
            self.detail
        )
    }
}

pub fn criteria() -> Vec<Criterion> {
    let c = |id, name, ms, check| Criterion {
        id,
        name,
        limit: Duration::from_millis(ms),
        check,
    };
    vec![
        c(1, "uniform-counterexample", 1_000, uniform_counterexample as Check),
        c(2, "random-bell-factors", 30_000, random_bell_factors),
        c(3, "negative-binomial", 5_000, negative_binomial_family),
        c(4, "discrete-stable", 5_000, discrete_stable_family),
        c(5, "post-inversion", 10_000, post_convergence),
        c(6, "representation", 5_000, representation_consistency),
        c(7, "phi-recovery", 10_000, phi_recovery),
        c(8, "whale-order", 10_000, whale_orders),
        c(9, "total-positivity", 1_000, total_positivity),
        c(10, "interlacing", 10_000, interlacing),
    ]
}

pub fn run_all(seed: u64) -> Vec<CriterionResult> {
    criteria().iter().map(|c| c.run(seed)).collect()
}

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn fail<E: std::fmt::Display>(e: E) -> String {
    e.to_string()
}

fn exact_padded(values: &[(i64, i64)], last: usize) -> FiniteSeq<Rational> {
    let mut terms: Vec<Rational> = values.iter().map(|&(n, d)| ratio(n, d)).collect();
    terms.resize(last + 1, ratio(0, 1));
    FiniteSeq::new(terms).expect("finite terms")
}

fn exact_geometric(last: usize) -> FiniteSeq<Rational> {
    let mut terms = Vec::with_capacity(last + 1);
    let mut t = ratio(1, 1);
    for _ in 0..=last {
        terms.push(t.clone());
        t /= ratio(2, 1);
    }
    FiniteSeq::new(terms).expect("finite terms")
}

fn uniform_counterexample(_seed: u64) -> Result<String, String> {
    let policy = SignPolicy::default();
    let three = exact_padded(&[(1, 3), (1, 3), (1, 3)], 12);
    let report = is_bell_shaped_up_to(&three, 3, &policy).map_err(fail)?;
    let flips = report.per_order[3].sign_changes.count;
    ensure(report.overall == BellVerdict::RefutedAtOrder { order: 3 }, || {
        format!("uniform on 3 points: {:?}", report.overall)
    })?;
    ensure(flips == 5, || format!("uniform on 3 points: {flips} flips at order 3"))?;
    let two = exact_padded(&[(1, 2), (1, 2)], 40);
    let report = is_bell_shaped_up_to(&two, 6, &policy).map_err(fail)?;
    ensure(report.is_consistent(), || format!("uniform on 2 points: {:?}", report.overall))?;
    Ok(format!("3 points refuted at order 3 with {flips} flips; 2 points consistent to N=6, K=40"))
}

fn random_bell_factors(seed: u64) -> Result<String, String> {
    let policy = SignPolicy::with_eps(EpsPolicy::RowRelative(ROW_EPS));
    let mut refuted = Vec::new();
    let mut inconclusive = Vec::new();
    for case in BellCaseSampler::new(seed).take(100) {
        let seq = bell_from_factors(&case.pf, &case.mu, 300).map_err(fail)?;
        let report = is_bell_shaped_up_to(&seq, 10, &policy).map_err(fail)?;
        if report.is_refuted() {
            refuted.push(case.index);
        } else if !report.is_consistent() {
            inconclusive.push(case.index);
        }
    }
    ensure(refuted.is_empty() && inconclusive.is_empty(), || {
        format!("seed {seed}: refuted {refuted:?}, inconclusive {inconclusive:?}")
    })?;
    Ok(format!("seed {seed}: 100 of 100 consistent to N=10, K=300"))
}

fn unit_grid() -> impl Iterator<Item = f64> {
    (1..=9).map(|i| i as f64 / 10.0)
}

fn negative_binomial_family(_seed: u64) -> Result<String, String> {
    let policy = SignPolicy::with_eps(EpsPolicy::RowRelative(ROW_EPS));
    let mut worst = 0.0_f64;
    for p in [0.3, 0.5, 0.8] {
        for lambda in [0.5, 2.0, 2.5] {
            let seq = negative_binomial(p, lambda, 400).map_err(fail)?;
            let tail = TailMeta::estimate(&seq);
            for x in unit_grid() {
                let got = eval_from_coeffs(&seq, Complex64::new(x, 0.0), &tail).map_err(fail)?.value.re;
                let want = ((1.0 - p) / (1.0 - p * x)).powf(lambda);
                let rel = (got / want - 1.0).abs();
                worst = worst.max(rel);
                ensure(rel <= 1e-10, || format!("p={p}, lambda={lambda}, x={x}: relative error {rel:e}"))?;
            }
            let report = is_bell_shaped_up_to(&seq, 12, &policy).map_err(fail)?;
            ensure(report.is_consistent(), || {
                format!("p={p}, lambda={lambda}: {:?}", report.overall)
            })?;
        }
    }
    Ok(format!("9 parameter pairs consistent to N=12, K=400; worst relative error {worst:.1e}"))
}

fn discrete_stable_family(_seed: u64) -> Result<String, String> {
    let mut worst = 0.0_f64;
    for lambda in [0.5, 1.0, 3.0] {
        let seq = discrete_stable(lambda, 1.0, 50).map_err(fail)?;
        let mut pmf = (-lambda).exp();
        for (k, a) in seq.terms().iter().enumerate() {
            if k > 0 {
                pmf *= lambda / k as f64;
            }
            let err = (a - pmf).abs();
            worst = worst.max(err);
            ensure(err <= 1e-12, || format!("lambda={lambda}, k={k}: |a - pmf| = {err:e}"))?;
        }
    }
    let seq = discrete_stable(1.0, 0.5, 400).map_err(fail)?;
    let policy = SignPolicy::with_eps(EpsPolicy::RowRelative(ROW_EPS));
    let report = is_bell_shaped_up_to(&seq, 10, &policy).map_err(fail)?;
    ensure(report.is_consistent(), || format!("(1, 0.5): {:?}", report.overall))?;
    Ok(format!("nu=1 matches Poisson to {worst:.1e}; (1, 0.5) consistent to N=10, K=400"))
}

fn float_geometric(last: usize) -> FiniteSeq {
    FiniteSeq::new((0..=last).map(|k| 0.5_f64.powi(k as i32)).collect()).expect("finite terms")
}

fn post_convergence(_seed: u64) -> Result<String, String> {
    let seq = float_geometric(200);
    let reference = 4.0 / 3.0;
    let mut errors = Vec::new();
    for n in [16, 64, 256] {
        let e = post_inversion(&seq, 0.5, n, PostMode::Integral).map_err(fail)?;
        errors.push((e.value - reference).abs());
    }
    ensure(errors.windows(2).all(|w| w[1] < w[0]), || format!("errors not decreasing: {errors:?}"))?;
    ensure(errors[2] <= 0.02, || format!("error at n=256 is {}", errors[2]))?;
    let short = float_geometric(60);
    let mut gap = 0.0_f64;
    for n in 1..=20 {
        let a = post_inversion(&short, 0.5, n, PostMode::Integral).map_err(fail)?.value;
        let b = post_inversion(&short, 0.5, n, PostMode::ExactDelta { bound: 20 }).map_err(fail)?.value;
        gap = gap.max((a - b).abs());
    }
    ensure(gap <= 1e-9, || format!("modes differ by {gap:e}"))?;
    Ok(format!(
        "errors {:.2e} > {:.2e} > {:.2e}; modes agree to {gap:.1e}",
        errors[0], errors[1], errors[2]
    ))
}

fn compare_models(spec: &PhiSpec, coeffs: &FiniteSeq, label: &str) -> Result<f64, String> {
    let model = GenFunModel::from_coeffs(coeffs.clone());
    let x0 = Complex64::new(NORMALIZATION_POINT, 0.0);
    let target = model.eval(x0).map_err(fail)?.re.ln();
    let spec = normalize_c(spec, target).map_err(fail)?;
    let mut worst = 0.0_f64;
    for x in unit_grid() {
        let z = Complex64::new(x, 0.0);
        let a = eval_from_phi(&spec, z).map_err(fail)?;
        let b = model.eval(z).map_err(fail)?;
        let rel = (a - b).norm() / b.norm();
        worst = worst.max(rel);
        ensure(rel <= 1e-8, || format!("{label}, x={x}: relative gap {rel:e}"))?;
    }
    Ok(worst)
}

fn representation_consistency(_seed: u64) -> Result<String, String> {
    let params = PFParams {
        b: 1.0,
        c: 0.0,
        p: vec![0.5],
        q: vec![1.0],
    };
    let spec = phi_from_pf(&params).map_err(fail)?;
    let coeffs = crate::constructors::pf_from_params(&params, 200).map_err(fail)?;
    let pf = compare_models(&spec, &coeffs, "PF")?;
    let spec = PhiSpec::negative_binomial(0.5, 2.5).map_err(fail)?;
    let coeffs = negative_binomial(0.5, 2.5, 300).map_err(fail)?;
    let nb = compare_models(&spec, &coeffs, "negative binomial")?;
    Ok(format!("worst relative gap {pf:.1e} (PF), {nb:.1e} (negative binomial)"))
}

fn phi_recovery(_seed: u64) -> Result<String, String> {
    let ladder = default_ladder();
    let geometric = phi_from_pf(&PFParams {
        b: 0.0,
        c: 0.0,
        p: vec![0.5],
        q: vec![],
    })
    .map_err(fail)?;
    let model = GenFunModel::from_phi(geometric);
    let mut found = Vec::new();
    for (s, want) in [(1.5, 0.0), (3.0, 1.0), (5.0, 1.0)] {
        let r = phi_recover(&model, s, &ladder).map_err(fail)?;
        ensure((r.estimate - want).abs() <= 0.05, || format!("geometric, s={s}: {}", r.estimate))?;
        found.push(r.estimate);
    }
    let model = GenFunModel::from_phi(PhiSpec::negative_binomial(0.5, 2.5).map_err(fail)?);
    let r = phi_recover(&model, 3.0, &ladder).map_err(fail)?;
    ensure((r.estimate - 2.5).abs() <= 0.1, || format!("negative binomial, s=3: {}", r.estimate))?;
    Ok(format!(
        "geometric {:.3}, {:.3}, {:.3}; negative binomial {:.3} at s=3",
        found[0], found[1], found[2], r.estimate
    ))
}

fn whale_orders(_seed: u64) -> Result<String, String> {
    const LAST: usize = 40;
    let cm = cm_from_measure(&HausdorffMeasure::dirac(ratio(1, 3)), LAST).map_err(fail)?;
    let geometric = exact_geometric(LAST);
    let policy = SignPolicy::default();
    let mut seq = cm;
    for d in 0..=3 {
        if d > 0 {
            seq = convolve(&seq, &geometric).truncated(LAST);
        }
        let report = whale_order_up_to(&seq, 8, 5, &policy).map_err(fail)?;
        ensure(report.order_estimate == WhaleOrder::Order { d }, || {
            format!("{d} factors: {:?}", report.order_estimate)
        })?;
    }
    Ok("orders 0, 1, 2, 3 recovered exactly (N=8, K=40)".into())
}

fn total_positivity(_seed: u64) -> Result<String, String> {
    let budget = TpBudget::default();
    let geometric = exact_geometric(8);
    let report = is_totally_positive_up_to(&geometric, 3, EpsPolicy::Auto, &budget).map_err(fail)?;
    ensure(report.verdict == TpVerdict::Pass && report.exhaustive, || {
        format!("geometric: {:?}", report.verdict)
    })?;
    let gap = FiniteSeq::new(vec![ratio(1, 1), ratio(0, 1), ratio(1, 1)]).map_err(fail)?;
    let bad = is_totally_positive_up_to(&gap, 3, EpsPolicy::Auto, &budget).map_err(fail)?;
    let det = bad.witness.as_ref().map(|w| w.det);
    ensure(bad.verdict == TpVerdict::Fail && det == Some(-1.0), || {
        format!("(1, 0, 1): {:?} with witness {det:?}", bad.verdict)
    })?;
    Ok(format!(
        "geometric passes all {} minors; (1, 0, 1) fails with det -1",
        report.minors_evaluated
    ))
}

/// A random rational sequence with entries `n/d`, `|n| <= 9`, `1 <= d <= 6`.
pub fn random_rational_sequence(rng: &mut ChaCha8Rng) -> FiniteSeq<Rational> {
    let len = rng.gen_range(6..=14);
    let terms = (0..len)
        .map(|_| ratio(rng.gen_range(-9..=9), rng.gen_range(1..=6)))
        .collect();
    FiniteSeq::new(terms).expect("finite terms")
}

/// Right witness index of every sign change (zeros skipped).
pub fn change_positions(seq: &FiniteSeq<Rational>) -> Vec<i64> {
    sign_changes(&seq.as_row(), &SignPolicy::default())
        .expect("nonempty row")
        .flip_positions
        .iter()
        .map(|&(_, j)| j)
        .collect()
}

/// `α₁ <= β₁ < α₂ <= β₂ < ...` for equal counts.
pub fn interlaces(alpha: &[i64], beta: &[i64]) -> bool {
    alpha.len() == beta.len()
        && alpha.iter().zip(beta).all(|(a, b)| a <= b)
        && beta.iter().zip(alpha.iter().skip(1)).all(|(b, a)| b < a)
}

fn interlacing(seed: u64) -> Result<String, String> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut equal = 0;
    for case in 0..50 {
        let c = random_rational_sequence(&mut rng);
        // Past the support of c, (b * c)(k) = q^k Σ q^{-j} c(j) keeps its sign.
        let bc = convolve(&c, &exact_geometric(c.last_index())).truncated(c.last_index());
        let (alpha, beta) = (change_positions(&c), change_positions(&bc));
        ensure(beta.len() <= alpha.len(), || {
            format!("case {case}: {} changes after convolution, {} before", beta.len(), alpha.len())
        })?;
        if alpha.len() == beta.len() {
            equal += 1;
            ensure(interlaces(&alpha, &beta), || {
                format!("case {case}: alpha {alpha:?}, beta {beta:?}")
            })?;
        }
    }
    Ok(format!("seed {seed}: 50 cases variation diminishing, {equal} with equal counts all interlace"))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn interlacing_predicate() {
        assert!(interlaces(&[1, 4], &[2, 4]));
        assert!(interlaces(&[], &[]));
        assert!(!interlaces(&[1, 4], &[4, 5]));
        assert!(!interlaces(&[2], &[1]));
        assert!(!interlaces(&[1], &[1, 2]));
    }

    #[test]
    fn ids_are_one_to_ten() {
        let ids: Vec<usize> = criteria().iter().map(|c| c.id).collect();
        assert_eq!(ids, (1..=10).collect::<Vec<_>>());
    }
}
