use bellseq::constructors::{cm_from_measure, discrete_stable, negative_binomial, pf_from_params, HausdorffMeasure, PFParams};
use bellseq::json::{read_seq, to_pretty, SeqDocument};
use bellseq::scalar::{ratio, Rational};
use bellseq::sequence::{
    is_bell_shaped_up_to, is_totally_positive_up_to, sign_changes, EpsPolicy, SignPolicy, TpBudget, TpVerdict,
};
use bellseq::{convolve, FiniteSeq, IndexedRow};
use proptest::prelude::*;

fn rational() -> impl Strategy<Value = Rational> {
    (-12i64..=12, 1i64..=8).prop_map(|(n, d)| ratio(n, d))
}

fn exact_seq(len: std::ops::Range<usize>) -> impl Strategy<Value = FiniteSeq<Rational>> {
    prop::collection::vec(rational(), len).prop_map(|t| FiniteSeq::new(t).unwrap())
}

fn unit_fraction() -> impl Strategy<Value = Rational> {
    // Values in [0, 0.95] with small denominators.
    (0i64..=19, 20i64..=20).prop_map(|(n, d)| ratio(n, d))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn convolution_commutes(a in exact_seq(1..12), b in exact_seq(1..12)) {
        prop_assert_eq!(convolve(&a, &b), convolve(&b, &a));
    }

    #[test]
    fn convolution_associates(a in exact_seq(1..9), b in exact_seq(1..9), c in exact_seq(1..9)) {
        prop_assert_eq!(convolve(&convolve(&a, &b), &c), convolve(&a, &convolve(&b, &c)));
    }

    #[test]
    fn larger_eps_never_adds_flips(values in prop::collection::vec(-1.0f64..1.0, 1..40), e1 in 0.0f64..0.5, e2 in 0.0f64..0.5) {
        let row = IndexedRow { start: -3, values };
        let (lo, hi) = (e1.min(e2), e1.max(e2));
        let count = |eps| sign_changes(&row, &SignPolicy::with_eps(EpsPolicy::Absolute(eps))).unwrap().count;
        prop_assert!(count(hi) <= count(lo));
    }

    #[test]
    fn completely_monotone_is_bell(atoms in prop::collection::vec((unit_fraction(), 1i64..=5), 1..4)) {
        let mu = HausdorffMeasure {
            atoms: atoms.into_iter().map(|(s, w)| (s, ratio(w, 1))).collect(),
            density: None,
        };
        let seq = cm_from_measure(&mu, 30).unwrap();
        let report = is_bell_shaped_up_to(&seq, 5, &SignPolicy::default()).unwrap();
        prop_assert!(!report.is_refuted(), "{:?}", report.overall);
    }

    #[test]
    fn negative_binomial_is_additive_in_lambda(p in 0.05f64..0.9, l1 in 0.1f64..4.0, l2 in 0.1f64..4.0) {
        let a = negative_binomial(p, l1, 60).unwrap();
        let b = negative_binomial(p, l2, 60).unwrap();
        let sum = negative_binomial(p, l1 + l2, 60).unwrap();
        for (x, y) in convolve(&a, &b).terms().iter().zip(sum.terms()) {
            prop_assert!((x - y).abs() <= 1e-13 * y.abs().max(1e-300) + 1e-300, "{} vs {}", x, y);
        }
    }

    #[test]
    fn stable_with_nu_one_is_poisson(lambda in 0.05f64..8.0) {
        let seq = discrete_stable(lambda, 1.0, 40).unwrap();
        let mut pmf = (-lambda).exp();
        for (k, a) in seq.terms().iter().enumerate() {
            if k > 0 {
                pmf *= lambda / k as f64;
            }
            prop_assert!((a - pmf).abs() <= 1e-14 * pmf.max(1e-300) + 1e-300);
        }
    }

    #[test]
    fn sequence_documents_round_trip(seq in exact_seq(1..20), seed in any::<u64>()) {
        let doc = SeqDocument::from_exact(&seq, seed, None);
        let back = read_seq(&to_pretty(&doc)).unwrap();
        prop_assert_eq!(back.to_exact().unwrap(), seq);
        prop_assert_eq!(back.seed, seed);
    }

    #[test]
    fn geometric_convolution_is_variation_diminishing(c in exact_seq(2..14)) {
        let last = c.last_index();
        let g = FiniteSeq::new((0..=last).map(|k| ratio(1, 1 << k)).collect()).unwrap();
        let bc = convolve(&c, &g);
        let policy = SignPolicy::default();
        let before = sign_changes(&c.as_row(), &policy).unwrap().count;
        let after = sign_changes(&bc.as_row(), &policy).unwrap().count;
        prop_assert!(after <= before);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn pf_sequences_have_nonnegative_minors(
        p in prop::collection::vec(unit_fraction(), 0..3),
        q in prop::collection::vec((0i64..=6, 1i64..=3).prop_map(|(n, d)| ratio(n, d)), 0..3),
    ) {
        let params = PFParams { b: ratio(0, 1), c: ratio(0, 1), p, q };
        let seq = pf_from_params(&params, 8).unwrap();
        let report = is_totally_positive_up_to(&seq, 3, EpsPolicy::Auto, &TpBudget::default()).unwrap();
        prop_assert_eq!(report.verdict, TpVerdict::Pass, "{:?}", report.witness);
    }
}
