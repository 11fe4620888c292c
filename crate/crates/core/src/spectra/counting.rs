//! Streaming box counts over site compositions.
//!
//! For `S` identical sites with `K` alternatives `v_j` of degeneracy `m_j`,
//! the number of basis states whose joint eigenvalue lies in a box is
//!
//! ```text
//! Σ_r C(S, r) · Σ_c multinomial(S - r; c) Π m_j^{c_j} · Σ_{n ∈ I(c, r)} C(r, n) m_p^n m_q^(r-n)
//! ```
//!
//! where the last two alternatives `p, q` share the `r` remaining sites and
//! `c` distributes the other `S - r` sites over the first `K - 2`
//! alternatives. For fixed `(c, r)` the joint value is affine in `n`, so the
//! box constraint cuts out an interval `I(c, r)` and the inner sum is a
//! prefix-sum difference over one Pascal-like row. No multiplicity table is
//! ever materialised.

use num_bigint::BigUint;
use num_integer::Integer;
use num_traits::{One, Zero};

use super::model::ModelSystem;
use super::table::binomial;
use crate::scalar::Rational;

/// Integer box with optional inclusive bounds per observable.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IntBox {
    pub lo: Vec<Option<i64>>,
    pub hi: Vec<Option<i64>>,
}

impl IntBox {
    /// All tuples with `λ^[l] ≤ thresholds[l]`.
    pub fn downward(thresholds: &[i64]) -> Self {
        IntBox { lo: vec![None; thresholds.len()], hi: thresholds.iter().map(|&t| Some(t)).collect() }
    }

    /// All tuples with `lo[l] ≤ λ^[l] ≤ hi[l]`.
    pub fn window(lo: &[i64], hi: &[i64]) -> Self {
        IntBox {
            lo: lo.iter().map(|&t| Some(t)).collect(),
            hi: hi.iter().map(|&t| Some(t)).collect(),
        }
    }

    pub fn contains(&self, tuple: &[i64]) -> bool {
        tuple.iter().enumerate().all(|(l, &v)| {
            self.lo[l].map_or(true, |lo| v >= lo) && self.hi[l].map_or(true, |hi| v <= hi)
        })
    }

    fn is_trivially_empty(&self) -> bool {
        self.lo.iter().zip(&self.hi).any(|(lo, hi)| matches!((lo, hi), (Some(a), Some(b)) if a > b))
    }
}

/// Anything that can count basis states in integer boxes at one scale.
pub trait DimensionCounter: Sync {
    fn scale(&self) -> u64;
    fn num_observables(&self) -> usize;
    fn value_unit(&self) -> &[Rational];
    /// Smallest and largest achievable value of observable `l`.
    fn value_range(&self, l: usize) -> (i64, i64);
    fn total_dimension(&self) -> BigUint;
    fn count_boxes(&self, boxes: &[IntBox]) -> Vec<BigUint>;

    fn count_box(&self, b: &IntBox) -> BigUint {
        self.count_boxes(std::slice::from_ref(b)).pop().unwrap_or_default()
    }
}

/// Streaming counter for one model at one scale.
#[derive(Clone, Debug)]
pub struct ScaleCounter<'a> {
    model: &'a ModelSystem,
    scale: u64,
    sites: u64,
}

impl<'a> ScaleCounter<'a> {
    pub fn new(model: &'a ModelSystem, scale: u64) -> Self {
        ScaleCounter { model, scale, sites: model.sites(scale) }
    }

    pub fn model(&self) -> &ModelSystem {
        self.model
    }
}

/// One way of spreading `S - r` sites over the first `K - 2` alternatives.
struct OuterTerm {
    base: Vec<i64>,
    weight: BigUint,
}

impl DimensionCounter for ScaleCounter<'_> {
    fn scale(&self) -> u64 {
        self.scale
    }

    fn num_observables(&self) -> usize {
        self.model.num_observables()
    }

    fn value_unit(&self) -> &[Rational] {
        self.model.value_unit()
    }

    fn value_range(&self, l: usize) -> (i64, i64) {
        self.model.value_range(l, self.scale)
    }

    fn total_dimension(&self) -> BigUint {
        self.model.total_dimension(self.scale)
    }

    fn count_boxes(&self, boxes: &[IntBox]) -> Vec<BigUint> {
        let mut totals = vec![BigUint::zero(); boxes.len()];
        let live: Vec<usize> = (0..boxes.len()).filter(|&i| !boxes[i].is_trivially_empty()).collect();
        if live.is_empty() {
            return totals;
        }
        let table = self.model.site_table();
        let k = table.len();
        let s = self.sites;
        let (p, q) = (&table[k - 2], &table[k - 1]);
        let step: Vec<i64> = p.values.iter().zip(&q.values).map(|(a, b)| a - b).collect();
        let unit_row = p.multiplicity.is_one() && q.multiplicity.is_one();

        let accumulate = |r: u64, row: &[BigUint], c_sr: &BigUint, totals: &mut [BigUint]| {
            let outer = outer_terms(self.model, s - r);
            let mut prefix: Option<Vec<BigUint>> = None;
            for &bi in &live {
                let mut inner = BigUint::zero();
                for term in &outer {
                    let base: Vec<i64> =
                        term.base.iter().zip(&q.values).map(|(b, v)| b + r as i64 * v).collect();
                    let Some((lo, hi)) = interval(&base, &step, r, &boxes[bi]) else { continue };
                    let sum = if hi - lo < 8 {
                        row[lo as usize..=hi as usize].iter().sum::<BigUint>()
                    } else {
                        let pre = prefix.get_or_insert_with(|| prefix_sums(row));
                        &pre[hi as usize + 1] - &pre[lo as usize]
                    };
                    inner += sum * &term.weight;
                }
                if !inner.is_zero() {
                    totals[bi] += inner * c_sr;
                }
            }
        };

        if k == 2 {
            let zero_base: Vec<i64> = q.values.iter().map(|v| s as i64 * v).collect();
            let ranges: Vec<Option<(u64, u64)>> =
                boxes.iter().map(|b| interval(&zero_base, &step, s, b)).collect();
            stream_row_sums(s, &p.multiplicity, &q.multiplicity, &ranges, &mut totals);
            return totals;
        }

        let mut row = vec![BigUint::one()];
        let mut c_sr = BigUint::one();
        for r in 0..=s {
            if r > 0 {
                advance_row(&mut row, &p.multiplicity, &q.multiplicity, unit_row);
                c_sr = c_sr * (s - r + 1) / r;
            }
            accumulate(r, &row, &c_sr, &mut totals);
        }
        totals
    }
}

/// Outer terms for `remaining` sites over alternatives `0..K-2`.
fn outer_terms(model: &ModelSystem, remaining: u64) -> Vec<OuterTerm> {
    let table = model.site_table();
    let outer = table.len() - 2;
    let arity = model.num_observables();
    if outer == 0 {
        return if remaining == 0 {
            vec![OuterTerm { base: vec![0; arity], weight: BigUint::one() }]
        } else {
            Vec::new()
        };
    }
    let mut out = Vec::new();
    let mut base = vec![0i64; arity];
    fill_outer(table, 0, outer, remaining, &mut base, BigUint::one(), &mut out);
    out
}

fn fill_outer(
    table: &[super::model::SiteTuple],
    j: usize,
    outer: usize,
    remaining: u64,
    base: &mut Vec<i64>,
    weight: BigUint,
    out: &mut Vec<OuterTerm>,
) {
    let tuple = &table[j];
    let pow = |n: u64| -> BigUint {
        if tuple.multiplicity.is_one() {
            BigUint::one()
        } else {
            num_traits::pow(tuple.multiplicity.clone(), n as usize)
        }
    };
    if j + 1 == outer {
        let shifted: Vec<i64> =
            base.iter().zip(&tuple.values).map(|(b, v)| b + remaining as i64 * v).collect();
        out.push(OuterTerm { base: shifted, weight: weight * pow(remaining) });
        return;
    }
    for c in 0..=remaining {
        let w = &weight * binomial(remaining, c) * pow(c);
        for (b, v) in base.iter_mut().zip(&tuple.values) {
            *b += c as i64 * v;
        }
        fill_outer(table, j + 1, outer, remaining - c, base, w, out);
        for (b, v) in base.iter_mut().zip(&tuple.values) {
            *b -= c as i64 * v;
        }
    }
}

/// Range of `n ∈ [0, r]` with `base + n·step` inside the box.
fn interval(base: &[i64], step: &[i64], r: u64, b: &IntBox) -> Option<(u64, u64)> {
    let mut lo: i128 = 0;
    let mut hi: i128 = r as i128;
    for l in 0..base.len() {
        let (x, d) = (base[l] as i128, step[l] as i128);
        let bound_lo = b.lo[l].map(i128::from);
        let bound_hi = b.hi[l].map(i128::from);
        if d == 0 {
            if bound_lo.is_some_and(|t| x < t) || bound_hi.is_some_and(|t| x > t) {
                return None;
            }
        } else if d > 0 {
            if let Some(t) = bound_lo {
                lo = lo.max(Integer::div_ceil(&(t - x), &d));
            }
            if let Some(t) = bound_hi {
                hi = hi.min(Integer::div_floor(&(t - x), &d));
            }
        } else {
            let nd = -d;
            if let Some(t) = bound_lo {
                hi = hi.min(Integer::div_floor(&(x - t), &nd));
            }
            if let Some(t) = bound_hi {
                lo = lo.max(Integer::div_ceil(&(x - t), &nd));
            }
        }
        if lo > hi {
            return None;
        }
    }
    Some((lo as u64, hi as u64))
}

/// Adds `Σ_{n ∈ range} C(s, n)·m_p^n·m_q^(s-n)` to each total, walking the
/// row once without storing it.
fn stream_row_sums(
    s: u64,
    mp: &BigUint,
    mq: &BigUint,
    ranges: &[Option<(u64, u64)>],
    totals: &mut [BigUint],
) {
    let Some(last) = ranges.iter().flatten().map(|&(_, hi)| hi).max() else { return };
    let unit = mp.is_one() && mq.is_one();
    let mut binom = BigUint::one();
    let mut pow_p = BigUint::one();
    let mut pow_q = if unit { BigUint::one() } else { num_traits::pow(mq.clone(), s as usize) };
    for n in 0..=last {
        if n > 0 {
            binom = binom * (s - n + 1) / n;
            if !unit {
                pow_p *= mp;
                pow_q /= mq;
            }
        }
        let term = if unit { binom.clone() } else { &binom * &pow_p * &pow_q };
        for (total, range) in totals.iter_mut().zip(ranges) {
            if range.is_some_and(|(lo, hi)| lo <= n && n <= hi) {
                *total += &term;
            }
        }
    }
}

/// `row_{r+1}[n] = m_q·row_r[n] + m_p·row_r[n-1]`, in place.
fn advance_row(row: &mut Vec<BigUint>, mp: &BigUint, mq: &BigUint, unit: bool) {
    row.push(BigUint::zero());
    for n in (1..row.len()).rev() {
        let (left, right) = row.split_at_mut(n);
        if unit {
            right[0] += &left[n - 1];
        } else {
            right[0] = &right[0] * mq + &left[n - 1] * mp;
        }
    }
    if !unit {
        row[0] *= mq;
    }
}

fn prefix_sums(row: &[BigUint]) -> Vec<BigUint> {
    let mut out = Vec::with_capacity(row.len() + 1);
    let mut acc = BigUint::zero();
    out.push(acc.clone());
    for v in row {
        acc += v;
        out.push(acc.clone());
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectra::model::{build_model, ModelSpec, SiteEntry};
    use crate::spectra::table::joint_spectrum;

    fn check_against_table(model: &ModelSystem, scale: u64, boxes: &[IntBox]) {
        let table = joint_spectrum(model, scale).unwrap();
        let counter = ScaleCounter::new(model, scale);
        assert_eq!(counter.count_boxes(boxes), table.count_boxes(boxes));
    }

    fn all_boxes(arity: usize, range: std::ops::RangeInclusive<i64>) -> Vec<IntBox> {
        let mut out = Vec::new();
        let values: Vec<i64> = range.collect();
        for &a in &values {
            for &b in &values {
                let lo = vec![a.min(b); arity];
                let hi: Vec<i64> = (0..arity).map(|l| a.max(b) + l as i64).collect();
                out.push(IntBox::window(&lo, &hi));
                out.push(IntBox::downward(&hi));
            }
        }
        out
    }

    #[test]
    fn paramagnet_downward_counts() {
        let model = build_model(&ModelSpec::family("paramagnet")).unwrap();
        let counter = ScaleCounter::new(&model, 4);
        let counts = counter.count_boxes(&[
            IntBox::downward(&[2]),
            IntBox::downward(&[4]),
            IntBox::downward(&[-1]),
            IntBox::window(&[2], &[2]),
        ]);
        let expected: Vec<BigUint> = [11u32, 16, 0, 6].iter().map(|&v| BigUint::from(v)).collect();
        assert_eq!(counts, expected);
    }

    #[test]
    fn streaming_matches_tables() {
        let gas = build_model(&ModelSpec::family("lattice-gas")).unwrap();
        check_against_table(&gas, 7, &all_boxes(2, -1..=15));
        let osc = build_model(&ModelSpec::family("oscillator-chain")).unwrap();
        check_against_table(&osc, 6, &all_boxes(1, -1..=19));
        let weighted = build_model(&ModelSpec::raw(vec![
            SiteEntry { values: vec![0, 2], multiplicity: 2 },
            SiteEntry { values: vec![1, -1], multiplicity: 1 },
            SiteEntry { values: vec![2, 0], multiplicity: 3 },
            SiteEntry { values: vec![3, 1], multiplicity: 1 },
        ]))
        .unwrap();
        check_against_table(&weighted, 5, &all_boxes(2, -6..=16));
        let two = build_model(&ModelSpec::raw(vec![
            SiteEntry { values: vec![0], multiplicity: 2 },
            SiteEntry { values: vec![3], multiplicity: 5 },
        ]))
        .unwrap();
        check_against_table(&two, 9, &all_boxes(1, -1..=28));
    }

    #[test]
    fn unbounded_box_is_total_dimension() {
        let gas = build_model(&ModelSpec::family("lattice-gas")).unwrap();
        let counter = ScaleCounter::new(&gas, 40);
        let open = IntBox { lo: vec![None, None], hi: vec![None, None] };
        assert_eq!(counter.count_box(&open), BigUint::from(3u32).pow(40));
    }
}
