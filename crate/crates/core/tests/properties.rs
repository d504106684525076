use bellfowler::combinatorics::{format_rational, integer, parse_rational, rational};
use bellfowler::ensemble::{constant_closed_form_distribution, gibbs_limit};
use bellfowler::saddlepoint::{exact_zero_based, sup_distance_to_asymptotic};
use bellfowler::*;
use num_rational::BigRational;
use num_traits::{One, Pow, Zero};
use proptest::prelude::*;

fn small_rational() -> impl Strategy<Value = ExactRational> {
    (-20i64..=20, 1i64..=12).prop_map(|(n, d)| rational(n, d))
}

fn positive_rational() -> impl Strategy<Value = ExactRational> {
    (1i64..=20, 1i64..=12).prop_map(|(n, d)| rational(n, d))
}

fn ensemble_size() -> impl Strategy<Value = (usize, usize)> {
    (1usize..=24).prop_flat_map(|n| (1..=n).prop_map(move |k| (k, n)))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn homogeneity(n in 1usize..=9, a in positive_rational(), b in small_rational(),
                   x in prop::collection::vec(small_rational(), 9)) {
        for k in 1..=n {
            let scaled: Vec<ExactRational> =
                x.iter().enumerate().map(|(i, xj)| &a * Pow::pow(&b, i + 1) * xj).collect();
            let lhs = bell_eval(n, k, &scaled).unwrap();
            let rhs = Pow::pow(&a, k) * Pow::pow(&b, n) * bell_eval(n, k, &x).unwrap();
            prop_assert_eq!(lhs, rhs);
        }
    }

    #[test]
    fn symbolic_and_recurrence_agree(n in 1usize..=10, x in prop::collection::vec(small_rational(), 10)) {
        for k in 1..=n {
            let sym = bell_enumerate(n, k).unwrap();
            prop_assert_eq!(sym.evaluate(&x).unwrap(), bell_eval(n, k, &x).unwrap());
        }
    }

    #[test]
    fn distributions_are_normalised((k, n) in ensemble_size(), d in 1u32..=3, w in positive_rational()) {
        for deg in [DegeneracySpec::Oscillator(d), DegeneracySpec::Constant(w)] {
            let dist = distribution(&EnsembleParams::new(k, n).unwrap(), &deg).unwrap();
            prop_assert!(dist.total().is_one());
            prop_assert_eq!(dist.mean_level(), rational(n as i64, k as i64));
            prop_assert!(dist.probs.values().all(|p| *p >= BigRational::zero()));
        }
    }

    #[test]
    fn constant_weight_cancels((k, n) in ensemble_size(), w in positive_rational()) {
        let params = EnsembleParams::new(k, n).unwrap();
        let unit = distribution(&params, &DegeneracySpec::constant_one()).unwrap();
        let scaled = distribution(&params, &DegeneracySpec::Constant(w.clone())).unwrap();
        prop_assert_eq!(&unit.probs, &scaled.probs);
        let g1 = gamma_bell(&params, &DegeneracySpec::constant_one()).unwrap();
        let gw = gamma_bell(&params, &DegeneracySpec::Constant(w.clone())).unwrap();
        prop_assert_eq!(gw, Pow::pow(&w, k) * g1);
    }

    #[test]
    fn explicit_degeneracy_scaling((k, n) in ensemble_size(), c in positive_rational(), r in positive_rational(),
                                   omega in prop::collection::vec(positive_rational(), 24)) {
        // w_l -> c r^l w_l multiplies Gamma by c^K r^N and leaves P unchanged
        let params = EnsembleParams::new(k, n).unwrap();
        let base = DegeneracySpec::Explicit(omega.clone());
        let twisted = DegeneracySpec::Explicit(
            omega.iter().enumerate().map(|(i, w)| &c * Pow::pow(&r, i + 1) * w).collect(),
        );
        let g = gamma_bell(&params, &base).unwrap();
        let gt = gamma_bell(&params, &twisted).unwrap();
        prop_assert_eq!(gt, Pow::pow(&c, k) * Pow::pow(&r, n) * g);
        prop_assert_eq!(
            distribution(&params, &base).unwrap().probs,
            distribution(&params, &twisted).unwrap().probs
        );
    }

    #[test]
    fn rational_strings_round_trip(x in small_rational()) {
        prop_assert_eq!(parse_rational(&format_rational(&x)).unwrap(), x);
    }
}

#[test]
fn unit_gamma_is_binomial() {
    for n in 1..=30 {
        for k in 1..=n {
            let params = EnsembleParams::new(k, n).unwrap();
            let g = gamma_bell(&params, &DegeneracySpec::constant_one()).unwrap();
            assert_eq!(g, integer(binomial(n - 1, k as i64 - 1)));
        }
    }
}

#[test]
fn closed_form_levels_decrease() {
    let params = EnsembleParams::new(40, 130).unwrap();
    let dist = constant_closed_form_distribution(&params).unwrap();
    let probs: Vec<_> = dist.probs.values().collect();
    assert!(probs.windows(2).all(|w| w[0] > w[1]));
}

#[test]
fn saddle_law_matches_exact_for_growing_k() {
    let one = DegeneracySpec::constant_one();
    for u in [rational(3, 2), integer(2), integer(3)] {
        let mut previous = f64::INFINITY;
        for k in [50usize, 100, 500] {
            let d = sup_distance_to_asymptotic(k, &u, &one, 60).unwrap();
            assert!(d < previous, "U={u} K={k}: {d} >= {previous}");
            previous = d;
        }
        assert!(previous < 5e-3, "U={u}: {previous}");
    }
}

#[test]
fn oscillator_saddle_law_converges() {
    let osc = DegeneracySpec::Oscillator(2);
    let u = integer(2);
    let d_small = sup_distance_to_asymptotic(20, &u, &osc, 30).unwrap();
    let d_large = sup_distance_to_asymptotic(80, &u, &osc, 30).unwrap();
    assert!(d_large < d_small, "{d_large} >= {d_small}");
    assert!(d_large < 2e-2, "{d_large}");
}

#[test]
fn asymptotic_law_is_gibbs_for_constant_degeneracy() {
    // zero-based mean U0 corresponds to one-based mean U0 + 1
    for u0 in [0.5f64, 1.0, 2.0, 4.0] {
        let law = occupation_asymptotic(u0, &DegeneracySpec::constant_one(), 400).unwrap();
        for (l0, p) in law.iter().enumerate().take(20) {
            let g = gibbs_limit(u0 + 1.0, l0 + 1, 1.0).unwrap().probability;
            assert!((p - g).abs() < 1e-12, "U0={u0} l0={l0}: {p} vs {g}");
        }
    }
}

#[test]
fn exact_zero_based_is_shifted_distribution() {
    let osc = DegeneracySpec::Oscillator(1);
    let shifted = exact_zero_based(3, 5, &osc, 8).unwrap();
    let dist = distribution(&EnsembleParams::new(3, 8).unwrap(), &osc).unwrap();
    assert_eq!(shifted.len(), 9);
    for (l0, p) in shifted.iter().enumerate() {
        assert_eq!(*p, dist.prob(l0 + 1));
    }
}
