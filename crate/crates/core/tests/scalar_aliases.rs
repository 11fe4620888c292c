use macroacc::channels::{apply_map, t_transform_chain};
use macroacc::{parse_rational, ExactMap, ExactRuns, MapF32, RunsF64};
use num_bigint::BigUint;

#[test]
fn single_precision_witness() {
    let p = [0.5f32, 0.3, 0.2];
    let q = [0.4f32, 0.35, 0.25];
    let w = t_transform_chain(&p, &q).unwrap();
    let map: MapF32 = w.full_map();
    map.validate().unwrap();
    let image = apply_map(&map, &p).unwrap();
    let err: f32 = image.iter().zip(&q).map(|(a, b)| (a - b).abs()).sum();
    assert!(err < 1e-5, "{err}");
}

#[test]
fn exact_and_double_run_spectra_agree() {
    let exact = ExactRuns::flat(&BigUint::from(3u32), &BigUint::from(8u32)).unwrap();
    let approx = RunsF64::flat(&BigUint::from(3u32), &BigUint::from(8u32)).unwrap();
    assert_eq!(exact.partial_sum(&BigUint::from(2u32)), parse_rational("2/3").unwrap());
    assert!((approx.partial_sum(&BigUint::from(2u32)) - 2.0 / 3.0).abs() < 1e-15);
    let half = parse_rational("1/2").unwrap();
    let id = ExactMap::identity(2);
    assert_eq!(apply_map(&id, &[half.clone(), half.clone()]).unwrap(), vec![half.clone(), half]);
}
