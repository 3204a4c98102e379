//! Builds one sequence from each family and prints its first terms.

use bellseq::constructors::{
    bell_from_factors, cm_from_measure, discrete_stable, negative_binomial, pf_from_params, HausdorffMeasure, PFParams,
};
use bellseq::scalar::ratio;

fn show(name: &str, terms: &[f64]) {
    let head: Vec<String> = terms.iter().take(6).map(|t| format!("{t:.6}")).collect();
    println!("{name:<22} {}", head.join("  "));
}

fn main() -> bellseq::Result<()> {
    show("negbin(0.5, 2)", negative_binomial(0.5, 2.0, 40)?.terms());
    show("stable(1, 1/2)", discrete_stable(1.0, 0.5, 40)?.terms());

    // (1 + x) / (1 - x/2)
    let pf = PFParams { p: vec![0.5], q: vec![1.0], ..PFParams::identity() };
    show("pf", pf_from_params(&pf, 40)?.terms());

    // Moments of Lebesgue measure: 1/(k + 1).
    let lebesgue = HausdorffMeasure::uniform(1.0);
    show("cm(lebesgue)", cm_from_measure(&lebesgue, 40)?.terms());

    show("bell = pf * cm", bell_from_factors(&pf, &lebesgue, 40)?.terms());

    // Same thing in exact arithmetic.
    let pf = PFParams { p: vec![ratio(1, 2)], q: vec![ratio(1, 1)], ..PFParams::identity() };
    let exact = bell_from_factors(&pf, &HausdorffMeasure::dirac(ratio(1, 3)), 5)?;
    let terms: Vec<String> = exact.terms().iter().map(|t| t.to_string()).collect();
    println!("{:<22} {}", "exact bell", terms.join("  "));
    Ok(())
}
