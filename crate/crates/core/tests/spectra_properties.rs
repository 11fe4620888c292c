mod common;

use macroacc::spectra::{
    build_model, joint_spectrum, DimensionCounter, IntBox, ModelSpec, ModelSystem, MultiplicityTable, ScaleCounter,
    SiteEntry,
};
use num_bigint::BigUint;
use num_traits::{Pow, Zero};
use proptest::prelude::*;

fn raw_model() -> impl Strategy<Value = ModelSystem> {
    (1usize..=2, 2usize..=4)
        .prop_flat_map(|(arity, k)| {
            prop::collection::vec((prop::collection::vec(-2i64..=3, arity), 1u64..=3), k)
        })
        .prop_filter_map("needs two distinct tuples", |sites| {
            let spec = ModelSpec::raw(sites.into_iter().map(|(values, multiplicity)| SiteEntry { values, multiplicity }).collect());
            build_model(&spec).ok()
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn multiplicities_sum_to_full_dimension(model in raw_model(), x in 1u64..=12) {
        let spectrum = joint_spectrum(&model, x).unwrap();
        let total: BigUint = spectrum.entries().iter().map(|(_, m)| m).sum();
        let expected = Pow::pow(model.site_dimension(), x as u32);
        prop_assert_eq!(&total, &expected);
        prop_assert_eq!(spectrum.total_dimension(), &expected);
    }

    #[test]
    fn split_convolution_matches_direct(model in raw_model(), a in 0u64..=6, b in 0u64..=6) {
        let split = MultiplicityTable::power(&model, a).convolve(&MultiplicityTable::power(&model, b));
        let mut direct = MultiplicityTable::single_site(&model);
        direct = (1..a + b).fold(direct, |acc, _| acc.convolve(&MultiplicityTable::single_site(&model)));
        if a + b == 0 {
            direct = MultiplicityTable::unit(model.num_observables());
        }
        prop_assert_eq!(split.entries(), direct.entries());
    }

    #[test]
    fn streaming_boxes_match_table(model in raw_model(), x in 1u64..=10, lo in prop::collection::vec(-8i64..=8, 2), hi in prop::collection::vec(-8i64..=30, 2)) {
        let l = model.num_observables();
        let spectrum = joint_spectrum(&model, x).unwrap();
        let b = IntBox::window(&lo[..l], &hi[..l]);
        let expected: BigUint = spectrum.entries().iter().filter(|(t, _)| b.contains(t)).map(|(_, m)| m).sum();
        prop_assert_eq!(ScaleCounter::new(&model, x).count_box(&b), expected);
    }
}

#[test]
fn paramagnet_multiplicities_are_binomial() {
    let model = build_model(&ModelSpec::family("paramagnet")).unwrap();
    for x in 1..=64u64 {
        let row = common::binomial_row(x);
        let spectrum = joint_spectrum(&model, x).unwrap();
        for k in 0..=x {
            assert_eq!(spectrum.multiplicity(&[k as i64]), row[k as usize], "X = {x}, k = {k}");
        }
        assert!(spectrum.multiplicity(&[x as i64 + 1]).is_zero());
    }
    assert!(joint_spectrum(&model, 0).is_err());
}
