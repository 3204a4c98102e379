//! Whale order of CM sequences convolved with geometric factors.

use bellseq::constructors::{cm_from_measure, HausdorffMeasure};
use bellseq::scalar::ratio;
use bellseq::sequence::{whale_order_up_to, SignPolicy};
use bellseq::{convolve, FiniteSeq, Rational};

fn main() -> bellseq::Result<()> {
    let last = 40;
    let mut seq = cm_from_measure(&HausdorffMeasure::dirac(ratio(1, 3)), last)?;
    let half: FiniteSeq<Rational> = FiniteSeq::new((0..=last).map(|k| ratio(1, 1 << k)).collect())?;
    for factors in 0..=3 {
        let report = whale_order_up_to(&seq, 8, 5, &SignPolicy::default())?;
        println!("{factors} geometric factor(s): {:?}", report.order_estimate);
        seq = convolve(&seq, &half).truncated(last);
    }
    Ok(())
}
