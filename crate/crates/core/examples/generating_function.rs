//! Evaluates F(x) two ways: from coefficients with a tail bound, and from
//! the exponential representation.

use bellseq::constructors::negative_binomial;
use bellseq::genfun::{eval_from_coeffs, GenFunModel, TailMeta};
use bellseq::phi::PhiSpec;
use num_complex::Complex64;

fn main() -> bellseq::Result<()> {
    let (p, lambda) = (0.5, 2.5);
    let seq = negative_binomial(p, lambda, 200)?;
    let tail = TailMeta::estimate(&seq);
    println!("estimated radius {:.4}", tail.radius());

    let model = GenFunModel::from_phi(PhiSpec::negative_binomial(p, lambda)?);
    for x in [Complex64::new(0.3, 0.0), Complex64::new(0.5, 0.4), Complex64::new(-1.5, 0.2)] {
        let closed = ((1.0 - p) / (1.0 - p * x)).powf(lambda);
        let from_phi = model.eval(x)?;
        match eval_from_coeffs(&seq, x, &tail) {
            Ok(c) => println!("x={x:.2}: coeffs {:.10} (±{:.1e}) phi {:.10} closed {:.10}", c.value, c.error_bound, from_phi, closed),
            Err(e) => println!("x={x:.2}: coeffs unavailable ({e}); phi {:.10} closed {:.10}", from_phi, closed),
        }
    }
    Ok(())
}
