//! Oracles written without the crate's counting code: plain binomial sums
//! and direct enumeration.
#![allow(dead_code)]

use num_bigint::BigUint;
use num_traits::{One, Zero};

/// Row `C(n, 0..=n)` by the multiplicative recurrence.
pub fn binomial_row(n: u64) -> Vec<BigUint> {
    let mut row = Vec::with_capacity(n as usize + 1);
    let mut c = BigUint::one();
    row.push(c.clone());
    for k in 1..=n {
        c = c * BigUint::from(n - k + 1) / BigUint::from(k);
        row.push(c.clone());
    }
    row
}

/// `Σ_{k ≤ m} C(n, k)`, zero for negative `m`.
pub fn binomial_prefix(n: u64, m: i64) -> BigUint {
    if m < 0 {
        return BigUint::zero();
    }
    binomial_row(n).into_iter().take(m as usize + 1).sum()
}

/// Spin-flip counts with energy `k ≤ e`, for the two-level paramagnet.
pub fn paramagnet_downward(x: u64, e: i64) -> BigUint {
    binomial_prefix(x, e.min(x as i64))
}

/// Lattice-gas states (`0`, `(1, 1)`, `(e2, 1)` per site) with total energy
/// `≤ e` and particle number `≤ n`, by summing over the species-2 count.
pub fn lattice_gas_downward(x: u64, e2: i64, e: i64, n: i64) -> BigUint {
    let mut total = BigUint::zero();
    let row = binomial_row(x);
    for n2 in 0..=x as i64 {
        let m = (e - e2 * n2).min(n - n2);
        if m < 0 {
            continue;
        }
        let rest = (x as i64 - n2) as u64;
        total += &row[n2 as usize] * binomial_prefix(rest, m.min(rest as i64));
    }
    total
}

/// Binary entropy in nats.
pub fn binary_entropy(u: f64) -> f64 {
    -u * u.ln() - (1.0 - u) * (1.0 - u).ln()
}

/// `ln` of a big integer through its leading bits.
pub fn ln_big(n: &BigUint) -> f64 {
    let bits = n.bits();
    if bits <= 1000 {
        return num_traits::ToPrimitive::to_f64(n).unwrap().ln();
    }
    let shift = bits - 64;
    let top: BigUint = n >> shift;
    num_traits::ToPrimitive::to_f64(&top).unwrap().ln() + shift as f64 * std::f64::consts::LN_2
}
