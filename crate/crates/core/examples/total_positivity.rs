//! Toeplitz minors of a PF sequence and of a sequence that is not PF.

use bellseq::constructors::{pf_from_params, PFParams};
use bellseq::scalar::ratio;
use bellseq::sequence::{is_totally_positive_up_to, EpsPolicy, TpBudget};
use bellseq::FiniteSeq;

fn main() -> bellseq::Result<()> {
    let budget = TpBudget::default();
    let params = PFParams {
        p: vec![ratio(1, 3), ratio(1, 2)],
        q: vec![ratio(2, 1)],
        ..PFParams::identity()
    };
    let pf = pf_from_params(&params, 10)?;
    let report = is_totally_positive_up_to(&pf, 4, EpsPolicy::Auto, &budget)?;
    println!("pf: {:?} after {} minors (exhaustive: {})", report.verdict, report.minors_evaluated, report.exhaustive);

    // 1 + x + x² has complex roots; every 2x2 minor is fine but a 3x3 one is negative.
    let flat = FiniteSeq::new(vec![ratio(1, 1), ratio(1, 1), ratio(1, 1), ratio(0, 1), ratio(0, 1)])?;
    let report = is_totally_positive_up_to(&flat, 3, EpsPolicy::Auto, &budget)?;
    println!("1 + x + x²: {:?}", report.verdict);
    if let Some(w) = report.witness {
        println!("  rows {:?} cols {:?} det {}", w.rows, w.cols, w.det);
    }

    let float = pf.to_f64();
    let big = TpBudget { exhaustive_last_index: 6, samples: 5_000, ..budget };
    let report = is_totally_positive_up_to(&float, 3, EpsPolicy::Auto, &big)?;
    println!("sampled: {:?}, coverage {:.3}, seed {:?}", report.verdict, report.coverage, report.seed);
    Ok(())
}
