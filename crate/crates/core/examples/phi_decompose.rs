//! Validates φ specifications and splits a valid one into a PF factor and
//! a part bounded by 1.

use bellseq::phi::{decompose_phi, validate_phi, PhiSpec, PosPart};
use bellseq::scalar::ratio;

fn main() -> bellseq::Result<()> {
    // 0 on (1, 2), then 5/2.
    let spec = PhiSpec {
        pos_part: PosPart::Piecewise { breaks: vec![ratio(2, 1)], levels: vec![ratio(0, 1), ratio(5, 2)] },
        ..PhiSpec::zero()
    };
    let report = validate_phi(&spec)?;
    println!("step spec valid: {}", report.passed());
    let d = decompose_phi(&spec)?;
    println!("  pf.p = {:?}", d.pf.p.iter().map(|v| v.to_string()).collect::<Vec<_>>());
    println!("  steps = {:?}", d.steps.iter().map(|v| v.to_string()).collect::<Vec<_>>());
    for s in [1.5, 2.5, 10.0] {
        println!("  phi2({s}) = {}", d.phi2.value(s));
    }

    // Dips from 5/2 to 1: after rounding down it decreases.
    let bump = PhiSpec {
        pos_part: PosPart::Piecewise { breaks: vec![2.0, 3.0, 4.0], levels: vec![0.0, 2.5, 1.0, 2.5] },
        ..PhiSpec::zero()
    };
    let report = validate_phi(&bump)?;
    println!("bump spec valid: {}", report.passed());
    println!("  {}", report.increasing_after_rounding.detail);

    let stable = PhiSpec::discrete_stable(1.0, 0.5)?;
    let report = validate_phi(&stable)?;
    println!("stable(1, 1/2) valid: {}", report.passed());
    Ok(())
}
