use std::collections::BTreeMap;

use num_bigint::BigUint;
use num_traits::{One, Zero};

use super::counting::{DimensionCounter, IntBox};
use super::model::ModelSystem;
use crate::error::{Error, Result};
use crate::scalar::Rational;

/// Largest number of distinct tuples [`joint_spectrum`] materialises.
pub const DEFAULT_TABLE_CAP: usize = 1 << 20;

/// Multiplicity table for a fixed number of sites, keyed by joint
/// eigenvalue tuple.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MultiplicityTable {
    sites: u64,
    entries: BTreeMap<Vec<i64>, BigUint>,
}

impl MultiplicityTable {
    /// The empty product: zero sites, one state with all values zero.
    pub fn unit(arity: usize) -> Self {
        let mut entries = BTreeMap::new();
        entries.insert(vec![0; arity], BigUint::one());
        MultiplicityTable { sites: 0, entries }
    }

    pub fn single_site(model: &ModelSystem) -> Self {
        MultiplicityTable {
            sites: 1,
            entries: model
                .site_table()
                .iter()
                .map(|t| (t.values.clone(), t.multiplicity.clone()))
                .collect(),
        }
    }

    pub fn sites(&self) -> u64 {
        self.sites
    }

    pub fn entries(&self) -> &BTreeMap<Vec<i64>, BigUint> {
        &self.entries
    }

    /// Table of the union of two independent site groups.
    pub fn convolve(&self, other: &MultiplicityTable) -> MultiplicityTable {
        let mut entries: BTreeMap<Vec<i64>, BigUint> = BTreeMap::new();
        for (a, ma) in &self.entries {
            for (b, mb) in &other.entries {
                let key: Vec<i64> = a.iter().zip(b).map(|(x, y)| x + y).collect();
                *entries.entry(key).or_default() += ma * mb;
            }
        }
        MultiplicityTable { sites: self.sites + other.sites, entries }
    }

    /// Table for `sites` independent copies of the model's site, built by
    /// repeated squaring.
    pub fn power(model: &ModelSystem, sites: u64) -> MultiplicityTable {
        let mut result = MultiplicityTable::unit(model.num_observables());
        let mut base = MultiplicityTable::single_site(model);
        let mut k = sites;
        while k > 0 {
            if k & 1 == 1 {
                result = result.convolve(&base);
            }
            k >>= 1;
            if k > 0 {
                base = base.convolve(&base);
            }
        }
        result
    }
}

/// Joint eigenvalue multiplicities of the observable family at scale `X`.
#[derive(Clone, Debug, PartialEq)]
pub struct JointSpectrum {
    scale: u64,
    entries: Vec<(Vec<i64>, BigUint)>,
    total_dimension: BigUint,
    value_unit: Vec<Rational>,
    value_ranges: Vec<(i64, i64)>,
}

impl JointSpectrum {
    pub fn scale(&self) -> u64 {
        self.scale
    }

    /// Sorted lexicographically, no duplicate tuples.
    pub fn entries(&self) -> &[(Vec<i64>, BigUint)] {
        &self.entries
    }

    pub fn total_dimension(&self) -> &BigUint {
        &self.total_dimension
    }

    pub fn value_unit(&self) -> &[Rational] {
        &self.value_unit
    }

    pub fn multiplicity(&self, tuple: &[i64]) -> BigUint {
        self.entries
            .binary_search_by(|(t, _)| t.as_slice().cmp(tuple))
            .map(|i| self.entries[i].1.clone())
            .unwrap_or_default()
    }

    fn from_table(model: &ModelSystem, scale: u64, table: MultiplicityTable) -> Self {
        let entries: Vec<_> = table.entries.into_iter().collect();
        let total_dimension = entries.iter().map(|(_, m)| m).sum();
        let value_ranges =
            (0..model.num_observables()).map(|l| model.value_range(l, scale)).collect();
        JointSpectrum {
            scale,
            entries,
            total_dimension,
            value_unit: model.value_unit().to_vec(),
            value_ranges,
        }
    }
}

impl DimensionCounter for JointSpectrum {
    fn scale(&self) -> u64 {
        self.scale
    }

    fn num_observables(&self) -> usize {
        self.value_unit.len()
    }

    fn value_unit(&self) -> &[Rational] {
        &self.value_unit
    }

    fn value_range(&self, l: usize) -> (i64, i64) {
        self.value_ranges[l]
    }

    fn total_dimension(&self) -> BigUint {
        self.total_dimension.clone()
    }

    fn count_boxes(&self, boxes: &[IntBox]) -> Vec<BigUint> {
        boxes
            .iter()
            .map(|b| {
                self.entries
                    .iter()
                    .filter(|(t, _)| b.contains(t))
                    .map(|(_, m)| m)
                    .sum()
            })
            .collect()
    }
}

/// Upper bound on the number of distinct tuples at scale `X`: the smaller
/// of the composition count and the product of value ranges.
pub fn predicted_distinct_tuples(model: &ModelSystem, scale: u64) -> BigUint {
    let sites = model.sites(scale);
    let k = model.site_table().len() as u64;
    let compositions = binomial(sites + k - 1, k - 1);
    let ranges = (0..model.num_observables())
        .map(|l| {
            let (lo, hi) = model.value_range(l, scale);
            BigUint::from((hi - lo) as u64 + 1)
        })
        .fold(BigUint::one(), |acc, r| acc * r);
    compositions.min(ranges)
}

/// Exact multiplicity table at scale `X`, refusing to materialise more than
/// [`DEFAULT_TABLE_CAP`] tuples.
pub fn joint_spectrum(model: &ModelSystem, scale: u64) -> Result<JointSpectrum> {
    joint_spectrum_with_cap(model, scale, DEFAULT_TABLE_CAP)
}

pub fn joint_spectrum_with_cap(
    model: &ModelSystem,
    scale: u64,
    cap: usize,
) -> Result<JointSpectrum> {
    if scale == 0 {
        return Err(Error::InvalidScales("scale must be at least 1".into()));
    }
    let predicted = predicted_distinct_tuples(model, scale);
    if predicted > BigUint::from(cap) {
        return Err(Error::MemoryCapExceeded { scale, predicted: predicted.to_string(), cap });
    }
    let table = MultiplicityTable::power(model, model.sites(scale));
    Ok(JointSpectrum::from_table(model, scale, table))
}

/// `C(n, k)` by the multiplicative formula.
pub fn binomial(n: u64, k: u64) -> BigUint {
    if k > n {
        return BigUint::zero();
    }
    let k = k.min(n - k);
    let mut acc = BigUint::one();
    for i in 0..k {
        acc *= n - i;
        acc /= i + 1;
    }
    acc
}
