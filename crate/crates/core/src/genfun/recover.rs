//! φ from the boundary behaviour of `Arg F(s + it) / π`.

use std::f64::consts::{FRAC_PI_2, PI};

use num_complex::Complex64;
use serde::Serialize;

use super::GenFunModel;
use crate::error::{Error, Result};

/// Real anchor where `F > 0`, so the continuous argument starts at zero.
const ANCHOR: f64 = 0.5;
const MIN_STEP: f64 = 1e-10;

pub fn default_ladder() -> Vec<f64> {
    vec![0.2, 0.1, 0.05, 0.025, 0.0125]
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Rung {
    pub t: f64,
    /// Continuous argument of `F(s + it)`.
    pub phase: f64,
    /// `phase / π`.
    pub phi: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PhiRecovery {
    pub s: f64,
    /// First-order Richardson extrapolation of the last two rungs to `t = 0`.
    pub estimate: f64,
    pub rungs: Vec<Rung>,
    pub evaluations: usize,
}

struct PhaseTracker<'a> {
    model: &'a GenFunModel,
    z: Complex64,
    f: Complex64,
    phase: f64,
    evaluations: usize,
}

impl PhaseTracker<'_> {
    /// Walks in a straight line to `target`, summing principal increments of
    /// `Arg F`. A step is halved whenever the increment reaches π/2.
    fn walk_to(&mut self, target: Complex64) -> Result<()> {
        let total = (target - self.z).norm();
        if total == 0.0 {
            return Ok(());
        }
        let max_step = (total / 8.0).min(0.05);
        let mut step = max_step;
        loop {
            let remaining = (target - self.z).norm();
            if remaining <= 1e-15 * total.max(1.0) {
                self.z = target;
                return Ok(());
            }
            let h = step.min(remaining);
            let next = if h == remaining {
                target
            } else {
                self.z + (target - self.z) * (h / remaining)
            };
            let f_next = self.model.eval(next)?;
            self.evaluations += 1;
            let d = (f_next / self.f).arg();
            if d.abs() >= FRAC_PI_2 {
                step = h / 2.0;
                if step < MIN_STEP {
                    return Err(Error::PhaseUnwrap {
                        re: next.re,
                        im: next.im,
                    });
                }
                continue;
            }
            self.phase += d;
            self.z = next;
            self.f = f_next;
            step = (step * 1.5).min(max_step);
        }
    }
}

/// Estimates `φ(s)` for `s ∉ [0, 1]` from `Arg F(s + it) / π` along a
/// decreasing ladder of heights `t`.
///
/// The argument is tracked continuously from the anchor `1/2` (up to height
/// `t_0`, across to `s`, then down the ladder), so values beyond `π` survive.
pub fn phi_recover(model: &GenFunModel, s: f64, ladder: &[f64]) -> Result<PhiRecovery> {
    if (0.0..=1.0).contains(&s) || !s.is_finite() {
        return Err(Error::Domain(format!("s = {s} must lie outside [0, 1]")));
    }
    if ladder.is_empty() || ladder.iter().any(|t| !(*t > 0.0)) {
        return Err(Error::Domain("ladder heights must be positive".into()));
    }
    if ladder.windows(2).any(|w| !(w[1] < w[0])) {
        return Err(Error::Domain("ladder heights must decrease".into()));
    }
    let anchor = Complex64::new(ANCHOR, 0.0);
    let f0 = model.eval(anchor)?;
    let mut tracker = PhaseTracker {
        model,
        z: anchor,
        f: f0,
        phase: f0.arg(),
        evaluations: 1,
    };
    tracker.walk_to(Complex64::new(ANCHOR, ladder[0]))?;
    tracker.walk_to(Complex64::new(s, ladder[0]))?;
    let mut rungs = Vec::with_capacity(ladder.len());
    for &t in ladder {
        tracker.walk_to(Complex64::new(s, t))?;
        rungs.push(Rung {
            t,
            phase: tracker.phase,
            phi: tracker.phase / PI,
        });
    }
    let estimate = match rungs.as_slice() {
        [.., a, b] => {
            let slope = (b.phi - a.phi) / (b.t - a.t);
            b.phi - slope * b.t
        }
        [only] => only.phi,
        [] => unreachable!("ladder is nonempty"),
    };
    Ok(PhiRecovery {
        s,
        estimate,
        rungs,
        evaluations: tracker.evaluations,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constructors::PFParams;
    use crate::phi::{phi_from_pf, PhiSpec};
    use crate::sequence::FiniteSeq;

    fn geometric_phi() -> GenFunModel {
        let spec = phi_from_pf(&PFParams {
            b: 0.0,
            c: 0.0,
            p: vec![0.5],
            q: vec![],
        })
        .unwrap();
        GenFunModel::from_phi(spec)
    }

    #[test]
    fn geometric_step() {
        let model = geometric_phi();
        for (s, want) in [(1.5, 0.0), (3.0, 1.0), (5.0, 1.0)] {
            let r = phi_recover(&model, s, &default_ladder()).unwrap();
            assert!((r.estimate - want).abs() < 0.05, "s = {s}: {r:?}");
        }
    }

    #[test]
    fn coefficient_model_inside_radius() {
        let seq = FiniteSeq::new((0..=200).map(|k| 0.5_f64.powi(k)).collect()).unwrap();
        let model = GenFunModel::from_coeffs(seq);
        let r = phi_recover(&model, 1.5, &default_ladder()).unwrap();
        assert!(r.estimate.abs() < 0.05);
        assert!(phi_recover(&model, 3.0, &default_ladder()).is_err());
    }

    #[test]
    fn unwraps_past_pi() {
        let model = GenFunModel::from_phi(PhiSpec::negative_binomial(0.5, 2.5).unwrap());
        let r = phi_recover(&model, 3.0, &default_ladder()).unwrap();
        assert!((r.estimate - 2.5).abs() < 0.1, "{r:?}");
        assert!(r.rungs.iter().all(|g| g.phase > PI));
    }

    #[test]
    fn negative_axis_step() {
        let spec = phi_from_pf(&PFParams {
            b: 0.0,
            c: 0.0,
            p: vec![],
            q: vec![1.0],
        })
        .unwrap();
        let model = GenFunModel::from_phi(spec);
        let left = phi_recover(&model, -2.0, &default_ladder()).unwrap();
        let right = phi_recover(&model, -0.5, &default_ladder()).unwrap();
        assert!((left.estimate - 1.0).abs() < 0.05, "{left:?}");
        assert!(right.estimate.abs() < 0.05, "{right:?}");
    }

    #[test]
    fn rejects_bad_inputs() {
        let model = geometric_phi();
        assert!(phi_recover(&model, 0.5, &default_ladder()).is_err());
        assert!(phi_recover(&model, 3.0, &[0.1, 0.2]).is_err());
        assert!(phi_recover(&model, 3.0, &[]).is_err());
    }
}
