//! Samples random PF and measure factors and classifies their convolution.

use bellseq::constructors::{bell_from_factors, BellCaseSampler};
use bellseq::sequence::{is_bell_shaped_up_to, EpsPolicy, SignPolicy};

fn main() -> bellseq::Result<()> {
    let policy = SignPolicy::with_eps(EpsPolicy::RowRelative(f64::EPSILON));
    for case in BellCaseSampler::new(42).take(8) {
        let seq = bell_from_factors(&case.pf, &case.mu, 300)?;
        let report = is_bell_shaped_up_to(&seq, 10, &policy)?;
        println!(
            "case {}: {} p, {} q, {} atoms -> {:?}",
            case.index,
            case.pf.p.len(),
            case.pf.q.len(),
            case.mu.atoms.len(),
            report.overall
        );
    }
    Ok(())
}
