//! Sign changes of Δⁿa and the bell-shape verdict, for a bell sequence and
//! for the uniform distribution on {0, 1, 2}, which is log-concave but not bell.

use bellseq::constructors::negative_binomial;
use bellseq::scalar::ratio;
use bellseq::sequence::{delta_n, is_bell_shaped_up_to, is_completely_monotone_up_to, sign_changes, SignPolicy};
use bellseq::FiniteSeq;

fn main() -> bellseq::Result<()> {
    let policy = SignPolicy::default();

    let negbin = negative_binomial(0.5, 2.5, 400)?;
    let report = is_bell_shaped_up_to(&negbin, 10, &policy)?;
    println!("negbin(0.5, 2.5): {:?}", report.overall);
    for e in &report.per_order {
        println!("  n={:<2} changes={} expected={} {:?}", e.n, e.sign_changes.count, e.expected_changes, e.verdict);
    }

    let mut terms = vec![ratio(1, 3); 3];
    terms.resize(13, ratio(0, 1));
    let uniform = FiniteSeq::new(terms)?;
    let row = delta_n(&uniform, 3)?;
    let flips = sign_changes(&row, &policy)?;
    println!("uniform{{0,1,2}}: Δ³ has {} sign changes at {:?}", flips.count, flips.flip_positions);
    println!("  verdict {:?}", is_bell_shaped_up_to(&uniform, 4, &policy)?.overall);

    let geometric = FiniteSeq::new((0..=60).map(|k| 0.8_f64.powi(k)).collect())?;
    let cm = is_completely_monotone_up_to(&geometric, 12, &policy)?;
    println!("0.8^k completely monotone up to 12: {}", cm.passed);
    Ok(())
}
