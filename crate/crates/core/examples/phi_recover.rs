//! Reads φ(s) back off the phase of F(s + it) as t shrinks.

use bellseq::genfun::{default_ladder, phi_recover, GenFunModel};
use bellseq::phi::PhiSpec;

fn main() -> bellseq::Result<()> {
    let spec = PhiSpec::negative_binomial(0.5, 2.5)?;
    let model = GenFunModel::from_phi(spec.clone());
    let ladder = default_ladder();
    for s in [-3.0, -0.5, 1.5, 3.0, 10.0] {
        let r = phi_recover(&model, s, &ladder)?;
        println!("s={s:>5}: φ={:.4} recovered {:.4} ({} evaluations)", spec.value(s), r.estimate, r.evaluations);
        for rung in &r.rungs {
            println!("    t={:<7} phase/π={:.5}", rung.t, rung.phi);
        }
    }
    Ok(())
}
