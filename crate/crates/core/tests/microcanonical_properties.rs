use macroacc::microcanonical::{downward_dimension, microcanonical_state, shell_dimension};
use macroacc::spectra::{build_model, ModelSpec, ModelSystem, ScaleCounter};
use macroacc::{Macrostate, Rational, ShellConvention};
use num_bigint::BigUint;
use num_traits::{One, Zero};
use proptest::prelude::*;

fn ratio(n: i64, d: i64) -> Rational {
    Rational::new(n.into(), d.into())
}

fn models() -> Vec<ModelSystem> {
    ["paramagnet", "lattice-gas", "oscillator-chain"]
        .iter()
        .map(|f| build_model(&ModelSpec::family(f)).unwrap())
        .collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(96))]

    #[test]
    fn downward_dimension_is_monotone_in_each_threshold(
        which in 0usize..3, x in 1u64..=40,
        base in prop::collection::vec(-200i64..=3200, 2),
        l in 0usize..2, bump in 1i64..=400,
    ) {
        let model = &models()[which];
        let n = model.num_observables();
        let a = Macrostate::new(base[..n].iter().map(|&v| ratio(v, 1000)).collect()).unwrap();
        let b = a.bumped(l % n, &ratio(bump, 1000));
        let counter = ScaleCounter::new(model, x);
        let da = downward_dimension(&counter, &a, x).unwrap().value;
        let db = downward_dimension(&counter, &b, x).unwrap().value;
        prop_assert!(da <= db);
    }

    #[test]
    fn shell_dimension_is_monotone_in_delta(
        which in 0usize..3, x in 1u64..=40,
        base in prop::collection::vec(1i64..=2500, 2),
        d1 in 1i64..=999, extra in 0i64..=999, additive in any::<bool>(),
    ) {
        let model = &models()[which];
        let n = model.num_observables();
        let a = Macrostate::new(base[..n].iter().map(|&v| ratio(v, 1000)).collect()).unwrap();
        let conv = if additive { ShellConvention::Additive } else { ShellConvention::Multiplicative };
        let counter = ScaleCounter::new(model, x);
        let small = shell_dimension(&counter, &a, &ratio(d1, 1000), x, conv).unwrap().value;
        let large = shell_dimension(&counter, &a, &ratio(d1 + extra, 1000), x, conv).unwrap().value;
        prop_assert!(small <= large);
    }

    #[test]
    fn single_observable_shell_is_a_difference(
        which in prop::sample::select(vec![0usize, 2]), x in 1u64..=120,
        a in 1i64..=2999, d in 1i64..=1500,
    ) {
        let model = &models()[which];
        let (a, delta) = (ratio(a, 1000), ratio(d, 1001));
        let xs = Rational::from_integer(x.into());
        let one = Rational::one();
        prop_assume!(!(&xs * &a * (&one - &delta)).is_integer() && !(&xs * &a * (&one + &delta)).is_integer());
        let m = Macrostate::new(vec![a]).unwrap();
        let counter = ScaleCounter::new(model, x);
        let shell = shell_dimension(&counter, &m, &delta, x, ShellConvention::Multiplicative).unwrap();
        prop_assert!(!shell.boundary_hit);
        let up = downward_dimension(&counter, &m.scaled(&(&one + &delta)), x).unwrap().value;
        let down = downward_dimension(&counter, &m.scaled(&(&one - &delta)), x).unwrap().value;
        prop_assert_eq!(shell.value, up - down);
    }

    #[test]
    fn flat_states_are_normalized(x in 1u64..=60, a in 1i64..=999, d in 1i64..=999) {
        let model = &models()[0];
        let m = Macrostate::new(vec![ratio(a, 1000)]).unwrap();
        let counter = ScaleCounter::new(model, x);
        match microcanonical_state(&counter, &m, &ratio(d, 1000), x, ShellConvention::Multiplicative) {
            Ok(state) => {
                let total: Rational = state
                    .spectrum_runs()
                    .iter()
                    .map(|(v, c)| v * Rational::from_integer(c.clone().into()))
                    .sum();
                prop_assert_eq!(total, Rational::one());
                let entries: BigUint = state.spectrum_runs().iter().map(|(_, c)| c).sum();
                prop_assert_eq!(&entries, state.ambient_dimension());
            }
            Err(e) => {
                let count = shell_dimension(&counter, &m, &ratio(d, 1000), x, ShellConvention::Multiplicative).unwrap();
                prop_assert!(count.value.is_zero(), "unexpected error {}", e);
            }
        }
    }
}
