//! Adaptive 7/15-point Gauss–Kronrod quadrature on finite intervals.

use num_complex::Complex64;

use crate::error::{Error, Result};

const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_845_693_013,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.0,
];

const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];

/// Gauss weights for the odd Kronrod nodes `XGK[1], XGK[3], XGK[5], XGK[7]`.
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerance {
    pub abs: f64,
    pub rel: f64,
    pub max_intervals: usize,
}

impl Default for Tolerance {
    fn default() -> Self {
        Tolerance {
            abs: 1e-13,
            rel: 1e-12,
            max_intervals: 4000,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub value: Complex64,
    pub error: f64,
    pub intervals: usize,
}

#[derive(Debug, Clone, Copy)]
struct Panel {
    a: f64,
    b: f64,
    value: Complex64,
    error: f64,
}

fn gk15<F: FnMut(f64) -> Complex64>(f: &mut F, a: f64, b: f64) -> Panel {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut kronrod = fc * WGK[7];
    let mut gauss = fc * WG[3];
    for i in 0..7 {
        let dx = half * XGK[i];
        let sum = f(center - dx) + f(center + dx);
        kronrod += sum * WGK[i];
        if i % 2 == 1 {
            gauss += sum * WG[i / 2];
        }
    }
    Panel {
        a,
        b,
        value: kronrod * half,
        error: ((kronrod - gauss) * half).norm(),
    }
}

/// `∫ f` over `[knots[0], knots[last]]`, splitting at every knot first.
///
/// Panels with the largest error estimate are bisected until the total
/// estimate drops below `max(abs, rel |I|)`.
pub fn integrate<F: FnMut(f64) -> Complex64>(
    mut f: F,
    knots: &[f64],
    tol: &Tolerance,
) -> Result<Estimate> {
    if knots.len() < 2 || knots.windows(2).any(|w| !(w[0] < w[1])) {
        return Err(Error::Domain("quadrature knots must increase".into()));
    }
    let mut panels: Vec<Panel> = knots.windows(2).map(|w| gk15(&mut f, w[0], w[1])).collect();
    loop {
        let value: Complex64 = panels.iter().map(|p| p.value).sum();
        let error: f64 = panels.iter().map(|p| p.error).sum();
        let target = tol.abs.max(tol.rel * value.norm());
        if error <= target {
            return Ok(Estimate {
                value,
                error,
                intervals: panels.len(),
            });
        }
        let worst = panels
            .iter()
            .enumerate()
            .max_by(|x, y| x.1.error.total_cmp(&y.1.error))
            .map(|(i, _)| i)
            .expect("at least one panel");
        let Panel { a, b, .. } = panels[worst];
        let mid = 0.5 * (a + b);
        if panels.len() >= tol.max_intervals || !(a < mid && mid < b) {
            return Err(Error::Quadrature {
                achieved: error,
                requested: target,
            });
        }
        panels[worst] = gk15(&mut f, a, mid);
        panels.push(gk15(&mut f, mid, b));
    }
}

/// Real-valued convenience wrapper around [`integrate`].
pub fn integrate_real<F: FnMut(f64) -> f64>(mut f: F, knots: &[f64], tol: &Tolerance) -> Result<(f64, f64)> {
    let est = integrate(|x| Complex64::new(f(x), 0.0), knots, tol)?;
    Ok((est.value.re, est.error))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn polynomials_are_exact() {
        let (v, _) = integrate_real(|x| x.powi(10), &[0.0, 1.0], &Tolerance::default()).unwrap();
        assert_relative_eq!(v, 1.0 / 11.0, max_relative = 1e-14);
    }

    #[test]
    fn complex_integrand() {
        // ∫_0^1 1/(2 - x + i) dx = Log(2 + i) - Log(1 + i)
        let est = integrate(
            |x| 1.0 / Complex64::new(2.0 - x, 1.0),
            &[0.0, 1.0],
            &Tolerance::default(),
        )
        .unwrap();
        let want = Complex64::new(2.0, 1.0).ln() - Complex64::new(1.0, 1.0).ln();
        assert!((est.value - want).norm() < 1e-13);
    }

    #[test]
    fn endpoint_singularity_needs_subdivision() {
        let (v, err) = integrate_real(|x| x.sqrt().ln(), &[0.0, 1.0], &Tolerance::default()).unwrap();
        assert_relative_eq!(v, -0.5, max_relative = 1e-10);
        assert!(err < 1e-11);
    }

    #[test]
    fn failure_is_reported() {
        let tol = Tolerance {
            max_intervals: 3,
            ..Tolerance::default()
        };
        let res = integrate_real(|x| (1.0 / x).sin(), &[1e-9, 1.0], &tol);
        assert!(matches!(res, Err(Error::Quadrature { .. })));
        assert!(integrate_real(|x| x, &[1.0, 0.0], &tol).is_err());
    }
}
