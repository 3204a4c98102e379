//! Recovers F(x) from the moments A(k) = Σ a(j)/(j + k + 1) by discrete
//! Post inversion and prints the convergence in n.

use bellseq::genfun::{post_inversion, PostMode};
use bellseq::FiniteSeq;

fn main() -> bellseq::Result<()> {
    let seq = FiniteSeq::new((0..=200).map(|k| 0.5_f64.powi(k)).collect())?;
    let x = 0.5;
    let truth = 1.0 / (1.0 - 0.5 * x);
    println!("{:>5} {:>5} {:>14} {:>10}", "n", "j", "estimate", "error");
    for n in [10, 20, 40, 80, 160] {
        let e = post_inversion(&seq, x, n, PostMode::Integral)?;
        println!("{:>5} {:>5} {:>14.10} {:>10.2e}", n, e.j, e.value, (e.value - truth).abs());
    }

    // Exact rational differences agree while n stays small.
    let short = seq.truncated(60);
    for n in [5, 10, 20] {
        let a = post_inversion(&short, x, n, PostMode::Integral)?.value;
        let b = post_inversion(&short, x, n, PostMode::ExactDelta { bound: 30 })?.value;
        println!("n={n}: integral {a:.12} exact {b:.12}");
    }
    Ok(())
}
