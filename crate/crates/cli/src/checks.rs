//! Seeded witness oracle: random majorized pairs must yield a T-transform
//! chain that reproduces the target; non-majorized pairs must be refused.

use macroacc::accessibility::majorizes;
use macroacc::channels::{t_transform_chain, TTransform};
use macroacc::{Error, MapF64};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub const L1_TOLERANCE: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq)]
pub struct CheckRow {
    pub index: usize,
    pub kind: &'static str,
    pub size: usize,
    pub passed: bool,
    pub l1_error: Option<f64>,
}

fn random_distribution(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    let raw: Vec<f64> = (0..n).map(|_| rng.gen::<f64>() + 1e-3).collect();
    let total: f64 = raw.iter().sum();
    raw.into_iter().map(|v| v / total).collect()
}

fn random_map(rng: &mut ChaCha8Rng, n: usize) -> MapF64 {
    let steps = rng.gen_range(1..=2 * n);
    let transforms = (0..steps)
        .map(|_| {
            let i = rng.gen_range(0..n);
            let j = (i + rng.gen_range(1..n)) % n;
            TTransform { i, j, t: rng.gen::<f64>() }
        })
        .collect();
    MapF64::from_transforms(n, transforms).expect("indices and weights are in range")
}

/// Even samples draw `q = T·p` and expect a witness; odd samples swap the
/// roles and expect a refusal unless the pair happens to majorize both ways.
pub fn witness_oracle(seed: u64, samples: usize) -> Vec<CheckRow> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..samples)
        .map(|index| {
            let n = rng.gen_range(2..=8);
            let p = random_distribution(&mut rng, n);
            let q = random_map(&mut rng, n).apply_vector(&p).expect("sizes match");
            if index % 2 == 0 {
                let (passed, l1_error) = match t_transform_chain(&p, &q) {
                    Ok(w) => {
                        let err = w.l1_error(&p, &q).unwrap_or(f64::INFINITY);
                        (err <= L1_TOLERANCE, Some(err))
                    }
                    Err(_) => (false, None),
                };
                CheckRow { index, kind: "majorized", size: n, passed, l1_error }
            } else {
                let reverse = majorizes(&q, &p).unwrap_or(false);
                let passed = match t_transform_chain(&q, &p) {
                    Ok(w) => reverse && w.l1_error(&q, &p).is_ok_and(|e| e <= L1_TOLERANCE),
                    Err(Error::NotMajorized(_)) => !reverse,
                    Err(_) => false,
                };
                CheckRow { index, kind: "reversed", size: n, passed, l1_error: None }
            }
        })
        .collect()
}
