use macroacc::regularization::{
    delta0_schedule, entropy_density_sequence, estimate_limit, geometric_scales, upper_lower_entropy,
    upper_lower_from_sequences, EstimateMethod, Quantity,
};
use macroacc::spectra::{build_model, ModelSpec, ModelSystem};
use macroacc::{parse_rational, DeltaSchedule, Macrostate, Rational, ShellConvention};
use proptest::prelude::*;

fn paramagnet() -> ModelSystem {
    build_model(&ModelSpec::family("paramagnet")).unwrap()
}

fn ratio(n: i64, d: i64) -> Rational {
    Rational::new(n.into(), d.into())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn wider_schedules_give_larger_shell_entropies(
        lattice in any::<bool>(), e in 100i64..=1800, n in 100i64..=900,
        c in 1i64..=500, extra in 0i64..=500, alpha in 0.1f64..0.9,
    ) {
        let family = if lattice { "lattice-gas" } else { "paramagnet" };
        let model = build_model(&ModelSpec::family(family)).unwrap();
        let densities = if lattice { vec![ratio(e, 1000), ratio(n, 1000)] } else { vec![ratio(n, 1000)] };
        let a = Macrostate::new(densities).unwrap();
        let narrow = DeltaSchedule::power(c as f64 / 1000.0, alpha).unwrap();
        let wide = DeltaSchedule::power((c + extra) as f64 / 1000.0, alpha).unwrap();
        let scales = [8u64, 16, 32, 64];
        let conv = ShellConvention::Multiplicative;
        let s1 = entropy_density_sequence(&model, &a, &Quantity::shell(narrow), &scales, conv);
        prop_assume!(s1.is_ok());
        let s1 = s1.unwrap();
        let s2 = entropy_density_sequence(&model, &a, &Quantity::shell(wide), &scales, conv).unwrap();
        for x in scales {
            let d1 = s1.points.iter().find(|p| p.scale == x);
            let d2 = s2.points.iter().find(|p| p.scale == x);
            match (d1, d2) {
                (Some(p1), Some(p2)) => prop_assert!(p1.dimension <= p2.dimension && p1.density <= p2.density),
                (Some(_), None) => prop_assert!(false, "wider shell empty at X = {}", x),
                _ => {}
            }
        }
    }

    #[test]
    fn lower_never_exceeds_upper(
        u in 50i64..=950, cs in prop::collection::vec((1i64..=800, 0.1f64..0.9), 1..=3),
        frac in 0.2f64..=1.0, fit in any::<bool>(),
    ) {
        let model = paramagnet();
        let a = Macrostate::new(vec![ratio(u, 1000)]).unwrap();
        let family: Vec<DeltaSchedule> =
            cs.iter().map(|&(c, alpha)| DeltaSchedule::power(c as f64 / 1000.0, alpha).unwrap()).collect();
        let extrapolate = fit.then_some(EstimateMethod::AffineFit);
        let scales = geometric_scales(16, 6);
        if let Ok(ul) = upper_lower_entropy(&model, &a, &family, &scales, frac, ShellConvention::Multiplicative, extrapolate) {
            prop_assert!(ul.lower.value <= ul.upper.value);
            for s in &ul.per_schedule {
                prop_assert!(s.liminf.value <= ul.lower.value && s.limsup.value <= ul.upper.value);
            }
        }
    }
}

#[test]
fn upper_lower_of_a_single_sequence() {
    let model = paramagnet();
    let a = Macrostate::parse("0.3").unwrap();
    let schedule = DeltaSchedule::power(1.0, 0.5).unwrap();
    let seq = entropy_density_sequence(&model, &a, &Quantity::shell(schedule), &geometric_scales(32, 5), ShellConvention::Multiplicative).unwrap();
    let ul = upper_lower_from_sequences(&[seq.clone()], 1.0, None).unwrap();
    let max = seq.densities().into_iter().fold(f64::NEG_INFINITY, f64::max);
    let min = seq.densities().into_iter().fold(f64::INFINITY, f64::min);
    assert_eq!((ul.upper.value, ul.lower.value), (max, min));
}

/// Downward sequences at `a` and at `a(1+δ_X)` share their extrapolated limit.
#[test]
fn inflated_downward_shares_the_limit() {
    let model = paramagnet();
    let scales = geometric_scales(512, 7);
    for u in ["0.1", "0.25", "0.4"] {
        let a = Macrostate::parse(u).unwrap();
        let plain = entropy_density_sequence(&model, &a, &Quantity::Downward, &scales, ShellConvention::Multiplicative).unwrap();
        let schedule = DeltaSchedule::power(1.0, 0.5).unwrap();
        let inflated = entropy_density_sequence(
            &model,
            &a,
            &Quantity::InflatedDownward { schedule },
            &scales,
            ShellConvention::Multiplicative,
        )
        .unwrap();
        let e1 = estimate_limit(&plain, EstimateMethod::AffineFit).unwrap();
        let e2 = estimate_limit(&inflated, EstimateMethod::ScheduleFit).unwrap();
        let tolerance = e1.error_bar + e2.error_bar + 1e-3;
        assert!((e1.value - e2.value).abs() <= tolerance, "u = {u}: {} vs {} (tolerance {tolerance:.2e})", e1.value, e2.value);
        for (p, q) in plain.points.iter().zip(&inflated.points) {
            assert!(p.dimension <= q.dimension);
        }
    }
}

/// Shell entropies under a schedule above `δ⁽⁰⁾` extrapolate to the
/// downward limit.
#[test]
fn shells_above_delta0_match_the_downward_limit() {
    let model = paramagnet();
    let a = Macrostate::parse("0.25").unwrap();
    let eps: Vec<Rational> = ["0.2", "0.1", "0.05"].iter().map(|e| parse_rational(e).unwrap()).collect();
    let d0 = delta0_schedule(&model, &a, &eps, &geometric_scales(16, 9)).unwrap();
    let scales = geometric_scales(512, 7);
    let above = DeltaSchedule::power(1.0, 0.25).unwrap();
    for &x in &scales {
        assert!(above.delta_at(x) >= d0.schedule.delta_at(x), "schedule dips below δ⁽⁰⁾ at X = {x}");
    }
    let down = entropy_density_sequence(&model, &a, &Quantity::Downward, &scales, ShellConvention::Multiplicative).unwrap();
    let shell = entropy_density_sequence(&model, &a, &Quantity::shell(above), &scales, ShellConvention::Multiplicative).unwrap();
    let e1 = estimate_limit(&down, EstimateMethod::AffineFit).unwrap();
    let e2 = estimate_limit(&shell, EstimateMethod::ScheduleFit).unwrap();
    let tolerance = e1.error_bar + e2.error_bar + 1e-3;
    assert!((e1.value - e2.value).abs() <= tolerance, "{} vs {} (tolerance {tolerance:.2e})", e1.value, e2.value);
}
