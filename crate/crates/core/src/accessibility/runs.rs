use std::collections::BTreeSet;

use num_bigint::BigUint;
use num_traits::{ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// A spectrum stored as `(value, multiplicity)` runs in strictly decreasing
/// value order. Flat states of astronomically large dimension fit in two runs.
#[derive(Clone, Debug, PartialEq)]
pub struct RunSpectrum<S> {
    runs: Vec<(S, BigUint)>,
}

impl<S: Scalar> RunSpectrum<S> {
    /// Sorts, merges equal values and drops empty runs. Rejects negative values.
    pub fn from_runs(runs: Vec<(S, BigUint)>) -> Result<Self> {
        for (index, (v, _)) in runs.iter().enumerate() {
            if v.is_negative() {
                return Err(Error::NegativeEntry { index, value: v.to_string() });
            }
        }
        let mut runs: Vec<(S, BigUint)> = runs.into_iter().filter(|(_, c)| !c.is_zero()).collect();
        runs.sort_by(|a, b| b.0.partial_cmp(&a.0).expect("comparable weights"));
        let mut merged: Vec<(S, BigUint)> = Vec::with_capacity(runs.len());
        for (v, c) in runs {
            match merged.last_mut() {
                Some((last, count)) if *last == v => *count += c,
                _ => merged.push((v, c)),
            }
        }
        Ok(RunSpectrum { runs: merged })
    }

    pub fn from_dense(p: &[S]) -> Result<Self> {
        for (index, v) in p.iter().enumerate() {
            if v.is_negative() {
                return Err(Error::NegativeEntry { index, value: v.to_string() });
            }
        }
        RunSpectrum::from_runs(p.iter().map(|v| (v.clone(), BigUint::from(1u32))).collect())
    }

    /// `dimension` copies of `1/dimension`, padded with zeros to `ambient`.
    pub fn flat(dimension: &BigUint, ambient: &BigUint) -> Result<Self> {
        if dimension.is_zero() {
            return Err(Error::InvalidArgument("flat spectrum needs a positive dimension".into()));
        }
        if dimension > ambient {
            return Err(Error::DimensionMismatch {
                expected: ambient.to_usize().unwrap_or(usize::MAX),
                found: dimension.to_usize().unwrap_or(usize::MAX),
            });
        }
        let value = S::one() / S::from_count(dimension);
        RunSpectrum::from_runs(vec![(value, dimension.clone()), (S::zero(), ambient - dimension)])
    }

    pub fn runs(&self) -> &[(S, BigUint)] {
        &self.runs
    }

    /// Number of entries, zeros included.
    pub fn dimension(&self) -> BigUint {
        self.runs.iter().map(|(_, c)| c).sum()
    }

    pub fn total_weight(&self) -> S {
        self.runs.iter().fold(S::zero(), |acc, (v, c)| acc + v.clone() * S::from_count(c))
    }

    pub fn max_value(&self) -> S {
        self.runs.first().map_or_else(S::zero, |(v, _)| v.clone())
    }

    /// Sum of the `m` largest entries.
    pub fn partial_sum(&self, m: &BigUint) -> S {
        let mut acc = S::zero();
        let mut left = m.clone();
        for (v, c) in &self.runs {
            if left.is_zero() {
                break;
            }
            let take = if *c < left { c.clone() } else { left.clone() };
            acc = acc + v.clone() * S::from_count(&take);
            left -= take;
        }
        acc
    }

    /// Cumulative run ends: the only places the partial-sum curve bends.
    pub fn breakpoints(&self) -> Vec<BigUint> {
        let mut acc = BigUint::zero();
        self.runs
            .iter()
            .map(|(_, c)| {
                acc += c;
                acc.clone()
            })
            .collect()
    }

    /// Dense vector in decreasing order, refusing more than `cap` entries.
    pub fn to_dense(&self, cap: usize) -> Result<Vec<S>> {
        let dim = self.dimension();
        let size = dim.to_usize().filter(|&n| n <= cap).ok_or(Error::CapExceeded {
            size: dim.to_usize().unwrap_or(usize::MAX),
            cap,
        })?;
        let mut out = Vec::with_capacity(size);
        for (v, c) in &self.runs {
            out.extend(std::iter::repeat_n(v.clone(), c.to_usize().expect("bounded by cap")));
        }
        Ok(out)
    }

    pub fn check_normalized(&self) -> Result<()> {
        let total = self.total_weight();
        if (total.clone() - S::one()).abs() > S::tolerance() {
            return Err(Error::NotNormalized { sum: total.to_string() });
        }
        Ok(())
    }
}

/// Nonnegativity and unit sum within the scalar tolerance.
pub fn check_probability<S: Scalar>(p: &[S]) -> Result<()> {
    let mut total = S::zero();
    for (index, v) in p.iter().enumerate() {
        if v.is_negative() {
            return Err(Error::NegativeEntry { index, value: v.to_string() });
        }
        total = total + v.clone();
    }
    if (total.clone() - S::one()).abs() > S::tolerance() {
        return Err(Error::NotNormalized { sum: total.to_string() });
    }
    Ok(())
}

/// Decreasing copy of `p` padded with zeros to length `n`.
pub fn sorted_padded<S: Scalar>(p: &[S], n: usize) -> Vec<S> {
    let mut out = p.to_vec();
    out.resize(n.max(p.len()), S::zero());
    out.sort_by(|a, b| b.partial_cmp(a).expect("comparable weights"));
    out
}

/// Whether the `m` largest entries of `p` outweigh those of `q` for every `m`.
/// The shorter vector is padded with zeros.
pub fn majorizes<S: Scalar>(p: &[S], q: &[S]) -> Result<bool> {
    check_probability(p)?;
    check_probability(q)?;
    let n = p.len().max(q.len());
    let (ps, qs) = (sorted_padded(p, n), sorted_padded(q, n));
    let tol = S::tolerance();
    let (mut sp, mut sq) = (S::zero(), S::zero());
    for (a, b) in ps.into_iter().zip(qs) {
        sp = sp + a;
        sq = sq + b;
        if sp.clone() + tol.clone() < sq {
            return Ok(false);
        }
    }
    Ok(true)
}

/// [`majorizes`] on run-length spectra, comparing partial sums at the union
/// of both breakpoint sets. Between breakpoints both curves are linear.
pub fn majorizes_runs<S: Scalar>(p: &RunSpectrum<S>, q: &RunSpectrum<S>) -> Result<bool> {
    p.check_normalized()?;
    q.check_normalized()?;
    let points: BTreeSet<BigUint> = p.breakpoints().into_iter().chain(q.breakpoints()).collect();
    let tol = S::tolerance();
    Ok(points.iter().all(|m| p.partial_sum(m) + tol.clone() >= q.partial_sum(m)))
}

/// Flat `1/D` on `D` states can be carried to flat `1/D′` on `D′` states by a
/// doubly stochastic map exactly when `D ≤ D′`.
pub fn flat_convertible_at_scale(d: &BigUint, d_prime: &BigUint) -> Result<bool> {
    if d.is_zero() || d_prime.is_zero() {
        return Err(Error::InvalidArgument("flat dimensions must be at least 1".into()));
    }
    Ok(d <= d_prime)
}
