//! Sequences built from their generative models.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::sequence::{convolve, FiniteSeq};
use crate::series;

/// Piecewise-constant density on `[0, 1]`: `levels[i]` on `(breaks[i], breaks[i + 1])`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PiecewiseDensity<T = f64> {
    pub breaks: Vec<T>,
    pub levels: Vec<T>,
}

/// Finite measure on `[0, 1]`: point masses plus a piecewise-constant density.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HausdorffMeasure<T = f64> {
    /// `(location, weight)` pairs.
    pub atoms: Vec<(T, T)>,
    #[serde(default = "Option::default")]
    pub density: Option<PiecewiseDensity<T>>,
}

impl<T: Scalar> HausdorffMeasure<T> {
    pub fn dirac(at: T) -> Self {
        HausdorffMeasure {
            atoms: vec![(at, T::one())],
            density: None,
        }
    }

    /// Lebesgue measure on `[0, 1]` times `level`.
    pub fn uniform(level: T) -> Self {
        HausdorffMeasure {
            atoms: Vec::new(),
            density: Some(PiecewiseDensity {
                breaks: vec![T::zero(), T::one()],
                levels: vec![level],
            }),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let unit = |v: &T| *v >= T::zero() && *v <= T::one();
        for (i, (s, w)) in self.atoms.iter().enumerate() {
            if !unit(s) {
                return Err(Error::InvalidMeasure(format!(
                    "atom {i} at {} lies outside [0, 1]",
                    s.approx()
                )));
            }
            if !w.is_positive() || !w.is_finite_value() {
                return Err(Error::InvalidMeasure(format!("atom {i} has weight {}", w.approx())));
            }
        }
        let mut density_mass = false;
        if let Some(d) = &self.density {
            if d.breaks.len() != d.levels.len() + 1 || d.levels.is_empty() {
                return Err(Error::InvalidMeasure(
                    "density needs one more break than levels".into(),
                ));
            }
            if !d.breaks.iter().all(unit) {
                return Err(Error::InvalidMeasure("density break outside [0, 1]".into()));
            }
            if d.breaks.windows(2).any(|w| w[0] >= w[1]) {
                return Err(Error::InvalidMeasure("density breaks must increase".into()));
            }
            if d.levels.iter().any(|l| l.is_negative() || !l.is_finite_value()) {
                return Err(Error::InvalidMeasure("density levels must be nonnegative".into()));
            }
            density_mass = d.levels.iter().any(|l| l.is_positive());
        }
        if self.atoms.is_empty() && !density_mass {
            return Err(Error::InvalidMeasure("total mass is zero".into()));
        }
        Ok(())
    }

    /// True iff an atom sits at `s = 1`.
    pub fn atom_at_one(&self) -> bool {
        self.atoms.iter().any(|(s, _)| s.is_one())
    }

    /// Weight of the atom at 1, zero if there is none.
    pub fn mass_at_one(&self) -> T {
        self.atoms
            .iter()
            .filter(|(s, _)| s.is_one())
            .fold(T::zero(), |acc, (_, w)| acc + w.clone())
    }
}

/// Data `(b, c, {p_m}, {q_m})` of `e^{bx + c} Π(1 + q_m x) / Π(1 - p_m x)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound(deserialize = "T: Deserialize<'de> + Default"), deny_unknown_fields)]
pub struct PFParams<T = f64> {
    #[serde(default)]
    pub b: T,
    #[serde(default)]
    pub c: T,
    #[serde(default)]
    pub p: Vec<T>,
    #[serde(default)]
    pub q: Vec<T>,
}

impl<T: Scalar> PFParams<T> {
    /// `F ≡ 1`.
    pub fn identity() -> Self {
        PFParams {
            b: T::zero(),
            c: T::zero(),
            p: Vec::new(),
            q: Vec::new(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.b.is_negative() {
            return Err(Error::Domain(format!("b = {} is negative", self.b.approx())));
        }
        if let Some((index, p)) = self
            .p
            .iter()
            .enumerate()
            .find(|(_, p)| p.is_negative() || **p >= T::one())
        {
            return Err(Error::NotSummable {
                index,
                value: p.approx(),
            });
        }
        if let Some(q) = self.q.iter().find(|q| q.is_negative()) {
            return Err(Error::Domain(format!("q = {} is negative", q.approx())));
        }
        Ok(())
    }
}

/// `a(k) = Σ w s^k + ∫ density(s) s^k ds` on `[0, K]`, with `0^0 = 1`.
pub fn cm_from_measure<T: Scalar>(mu: &HausdorffMeasure<T>, last: usize) -> Result<FiniteSeq<T>> {
    mu.validate()?;
    let mut terms = vec![T::zero(); last + 1];
    for (s, w) in &mu.atoms {
        let mut power = T::one();
        for term in terms.iter_mut() {
            *term = term.clone() + w.clone() * power.clone();
            power = power * s.clone();
        }
    }
    if let Some(d) = &mu.density {
        for (i, level) in d.levels.iter().enumerate() {
            let (lo, hi) = (&d.breaks[i], &d.breaks[i + 1]);
            // ∫_lo^hi s^k ds = (hi^{k+1} - lo^{k+1}) / (k + 1)
            let (mut plo, mut phi) = (lo.clone(), hi.clone());
            for (k, term) in terms.iter_mut().enumerate() {
                let piece = level.clone() * (phi.clone() - plo.clone()) / T::from_count(k + 1);
                *term = term.clone() + piece;
                plo = plo * lo.clone();
                phi = phi * hi.clone();
            }
        }
    }
    FiniteSeq::new(terms)
}

/// Coefficients of `e^{bx + c} Π(1 + q_m x) / Π(1 - p_m x)` through `x^K`.
///
/// Exact backends need `b = c = 0`, since otherwise the exponential factor is irrational.
pub fn pf_from_params<T: Scalar>(params: &PFParams<T>, last: usize) -> Result<FiniteSeq<T>> {
    params.validate()?;
    let mut a: Vec<T> = if params.b.is_zero() {
        let mut a = vec![T::zero(); last + 1];
        a[0] = params.c.exp_value()?;
        a
    } else if T::EXACT {
        return Err(Error::Inexact(format!(
            "e^(bx) with b = {} has irrational coefficients",
            params.b.approx()
        )));
    } else {
        series::poisson_series(params.b.approx(), params.c.approx(), last)
            .into_iter()
            .map(T::from_f64_value)
            .collect::<Result<_>>()?
    };
    for q in &params.q {
        series::mul_linear(&mut a, q);
    }
    for p in &params.p {
        series::div_linear(&mut a, p);
    }
    FiniteSeq::new(a)
}

/// Probabilities of the negative binomial law with generating function `((1 - p)/(1 - px))^λ`.
pub fn negative_binomial(p: f64, lambda: f64, last: usize) -> Result<FiniteSeq> {
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::Domain(format!("p = {p} is not in (0, 1)")));
    }
    if !(lambda > 0.0 && lambda.is_finite()) {
        return Err(Error::Domain(format!("lambda = {lambda} is not positive")));
    }
    let mut a = Vec::with_capacity(last + 1);
    a.push((1.0 - p).powf(lambda));
    for k in 0..last {
        let prev = a[k];
        a.push(prev * p * (k as f64 + lambda) / (k as f64 + 1.0));
    }
    FiniteSeq::new(a)
}

/// Coefficients of `exp(-λ (1 - x)^ν)`.
pub fn discrete_stable(lambda: f64, nu: f64, last: usize) -> Result<FiniteSeq> {
    if !(lambda > 0.0 && lambda.is_finite()) {
        return Err(Error::Domain(format!("lambda = {lambda} is not positive")));
    }
    let g: Vec<f64> = series::one_minus_x_pow(nu, last)?
        .into_iter()
        .map(|c| -lambda * c)
        .collect();
    FiniteSeq::new(series::exp_series(&g))
}

/// Convolution of a PF sequence with the moment sequence of `mu`.
///
/// `mu` may not charge `{1}`: the moments would not tend to zero.
pub fn bell_from_factors<T: Scalar>(
    pf: &PFParams<T>,
    mu: &HausdorffMeasure<T>,
    last: usize,
) -> Result<FiniteSeq<T>> {
    mu.validate()?;
    if mu.atom_at_one() {
        return Err(Error::AtomAtOne);
    }
    let a = pf_from_params(pf, last)?;
    let b = cm_from_measure(mu, last)?;
    Ok(convolve(&a, &b))
}

/// One random `(PF, measure)` pair from [`BellCaseSampler`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BellCase {
    pub index: usize,
    pub pf: PFParams,
    pub mu: HausdorffMeasure,
}

/// Reproducible stream of random factor pairs for the bell property suite.
///
/// `p ~ U(0.1, 0.9)` and `q ~ U(0, 2)`, up to three of each; `b ~ U(0, 3)`;
/// one to three atoms in `[0, 0.95]` and, half the time, a uniform density on
/// `[0, 0.95]`. `c` is zero.
#[derive(Debug, Clone)]
pub struct BellCaseSampler {
    rng: ChaCha8Rng,
    seed: u64,
    next: usize,
}

impl BellCaseSampler {
    pub fn new(seed: u64) -> Self {
        BellCaseSampler {
            rng: ChaCha8Rng::seed_from_u64(seed),
            seed,
            next: 0,
        }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }
}

impl Iterator for BellCaseSampler {
    type Item = BellCase;

    fn next(&mut self) -> Option<BellCase> {
        let rng = &mut self.rng;
        let np = rng.gen_range(0..=3);
        let nq = rng.gen_range(0..=3);
        let pf = PFParams {
            b: rng.gen_range(0.0..3.0),
            c: 0.0,
            p: (0..np).map(|_| rng.gen_range(0.1..0.9)).collect(),
            q: (0..nq).map(|_| rng.gen_range(0.0..2.0)).collect(),
        };
        let natoms = rng.gen_range(1..=3);
        let atoms = (0..natoms)
            .map(|_| (rng.gen_range(0.0..=0.95), rng.gen_range(0.1..1.0)))
            .collect();
        let density = rng.gen_bool(0.5).then(|| PiecewiseDensity {
            breaks: vec![0.0, 0.95],
            levels: vec![rng.gen_range(0.1..1.0)],
        });
        let case = BellCase {
            index: self.next,
            pf,
            mu: HausdorffMeasure { atoms, density },
        };
        self.next += 1;
        Some(case)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{ratio, Rational};
    use crate::sequence::{is_completely_monotone_up_to, SignPolicy};
    use approx::assert_relative_eq;

    #[test]
    fn point_masses_and_lebesgue() {
        let half = cm_from_measure(&HausdorffMeasure::dirac(ratio(1, 2)), 6).unwrap();
        assert_eq!(half.terms()[6], ratio(1, 64));
        let zero = cm_from_measure(&HausdorffMeasure::dirac(ratio(0, 1)), 3).unwrap();
        assert_eq!(zero.terms(), &[ratio(1, 1), ratio(0, 1), ratio(0, 1), ratio(0, 1)]);
        let leb = cm_from_measure(&HausdorffMeasure::uniform(ratio(1, 1)), 5).unwrap();
        for k in 0..=5 {
            assert_eq!(leb.terms()[k], ratio(1, k as i64 + 1));
        }
    }

    #[test]
    fn invalid_measures() {
        let outside = HausdorffMeasure::dirac(1.5);
        assert!(matches!(outside.validate(), Err(Error::InvalidMeasure(_))));
        let empty = HausdorffMeasure::<f64> {
            atoms: vec![],
            density: None,
        };
        assert!(empty.validate().is_err());
        let one = HausdorffMeasure::dirac(1.0);
        assert!(one.atom_at_one());
        assert_eq!(
            bell_from_factors(&PFParams::identity(), &one, 5),
            Err(Error::AtomAtOne)
        );
    }

    #[test]
    fn rational_moment_sequence_is_cm() {
        let mu = HausdorffMeasure {
            atoms: vec![(ratio(1, 3), ratio(2, 1)), (ratio(3, 4), ratio(1, 5))],
            density: Some(PiecewiseDensity {
                breaks: vec![ratio(0, 1), ratio(1, 2), ratio(1, 1)],
                levels: vec![ratio(1, 1), ratio(3, 1)],
            }),
        };
        let a = cm_from_measure(&mu, 14).unwrap();
        assert!(is_completely_monotone_up_to(&a, 10, &SignPolicy::default()).unwrap().passed);
    }

    #[test]
    fn pf_examples() {
        let geo = pf_from_params(
            &PFParams {
                b: ratio(0, 1),
                c: ratio(0, 1),
                p: vec![ratio(1, 2)],
                q: vec![],
            },
            5,
        )
        .unwrap();
        assert_eq!(geo.terms()[5], ratio(1, 32));

        let linear = pf_from_params(
            &PFParams {
                b: 0.0,
                c: 0.0,
                p: vec![],
                q: vec![1.0],
            },
            3,
        )
        .unwrap();
        assert_eq!(linear.terms(), &[1.0, 1.0, 0.0, 0.0]);

        let poisson = pf_from_params(
            &PFParams {
                b: 3.0,
                c: -3.0,
                p: vec![],
                q: vec![],
            },
            10,
        )
        .unwrap();
        assert_relative_eq!(poisson.terms()[4], (-3.0_f64).exp() * 81.0 / 24.0, max_relative = 1e-14);
    }

    #[test]
    fn pf_rejects_bad_parameters() {
        let bad = PFParams {
            b: 0.0,
            c: 0.0,
            p: vec![0.5, 1.0],
            q: vec![],
        };
        assert_eq!(
            pf_from_params(&bad, 4),
            Err(Error::NotSummable { index: 1, value: 1.0 })
        );
        let exact_poisson = PFParams {
            b: ratio(1, 1),
            c: ratio(0, 1),
            p: vec![],
            q: vec![],
        };
        assert!(matches!(pf_from_params::<Rational>(&exact_poisson, 4), Err(Error::Inexact(_))));
    }

    #[test]
    fn negative_binomial_examples() {
        let a = negative_binomial(0.5, 2.0, 3).unwrap();
        assert_eq!(a.terms(), &[0.25, 0.25, 0.1875, 0.125]);
        let g = negative_binomial(0.3, 1.0, 6).unwrap();
        for k in 0..=6 {
            assert_relative_eq!(g.terms()[k], 0.7 * 0.3_f64.powi(k as i32), max_relative = 1e-14);
        }
        assert!(negative_binomial(1.0, 2.0, 3).is_err());
        assert!(negative_binomial(0.5, 0.0, 3).is_err());
    }

    #[test]
    fn discrete_stable_examples() {
        let a = discrete_stable(1.0, 0.5, 5).unwrap();
        assert_relative_eq!(a.terms()[0], (-1.0_f64).exp(), max_relative = 1e-15);
        assert_relative_eq!(a.terms()[1], 0.5 * (-1.0_f64).exp(), max_relative = 1e-14);
        assert!(discrete_stable(1.0, 1.5, 5).is_err());
        assert!(discrete_stable(1.0, 0.0, 5).is_err());
    }

    #[test]
    fn bernoulli_times_geometric() {
        let pf = PFParams {
            b: ratio(0, 1),
            c: ratio(0, 1),
            p: vec![],
            q: vec![ratio(1, 1)],
        };
        let a = bell_from_factors(&pf, &HausdorffMeasure::dirac(ratio(1, 2)), 4).unwrap();
        assert_eq!(
            a.terms(),
            &[ratio(1, 1), ratio(3, 2), ratio(3, 4), ratio(3, 8), ratio(3, 16)]
        );
    }

    #[test]
    fn sampler_is_reproducible() {
        let a: Vec<_> = BellCaseSampler::new(7).take(5).collect();
        let b: Vec<_> = BellCaseSampler::new(7).take(5).collect();
        assert_eq!(a, b);
        for case in &a {
            case.pf.validate().unwrap();
            case.mu.validate().unwrap();
            assert!(!case.mu.atom_at_one());
        }
    }
}
