use std::collections::BTreeSet;

use num_bigint::BigUint;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::accessibility::{check_probability, majorizes_runs, RunSpectrum};
use crate::error::{Error, Result};
use crate::scalar::{rational_to_f64, Rational, Scalar};

/// Projection onto a subset of basis states, applied to diagonal states.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PinchingMap {
    dimension: usize,
    support: BTreeSet<usize>,
}

/// Diagonal state after pinching: entries tagged with support membership.
#[derive(Clone, Debug, PartialEq)]
pub struct PinchedSpectrum<S> {
    pub weights: Vec<(S, bool)>,
    pub in_support: S,
}

impl PinchingMap {
    pub fn new(dimension: usize, support: impl IntoIterator<Item = usize>) -> Result<Self> {
        let support: BTreeSet<usize> = support.into_iter().collect();
        if let Some(&bad) = support.iter().find(|&&i| i >= dimension) {
            return Err(Error::InvalidArgument(format!("support index {bad} outside dimension {dimension}")));
        }
        Ok(PinchingMap { dimension, support })
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn support(&self) -> &BTreeSet<usize> {
        &self.support
    }

    pub fn contains(&self, i: usize) -> bool {
        self.support.contains(&i)
    }
}

/// Tags each entry of `p` with support membership and reports the weight
/// landing inside the support.
pub fn pinch_spectrum<S: Scalar>(map: &PinchingMap, p: &[S]) -> Result<PinchedSpectrum<S>> {
    if p.len() != map.dimension {
        return Err(Error::DimensionMismatch { expected: map.dimension, found: p.len() });
    }
    check_probability(p)?;
    let weights: Vec<(S, bool)> = p.iter().enumerate().map(|(i, v)| (v.clone(), map.contains(i))).collect();
    let in_support = weights.iter().filter(|(_, inside)| *inside).fold(S::zero(), |a, (v, _)| a + v.clone());
    Ok(PinchedSpectrum { weights, in_support })
}

/// `½‖p - q‖₁` for states diagonal in a shared basis, zero-padding the shorter.
pub fn trace_distance_commuting<S: Scalar>(p: &[S], q: &[S]) -> Result<S> {
    check_probability(p)?;
    check_probability(q)?;
    let n = p.len().max(q.len());
    let at = |v: &[S], i: usize| if i < v.len() { v[i].clone() } else { S::zero() };
    let total = (0..n).fold(S::zero(), |acc, i| acc + (at(p, i) - at(q, i)).abs());
    let two = S::one() + S::one();
    Ok(total / two)
}

/// Whether every entry is at most `cap`, within the scalar tolerance.
pub fn eigenvalue_cap_check<S: Scalar>(p: &[S], cap: &S) -> Result<bool> {
    if *cap <= S::zero() {
        return Err(Error::InvalidArgument(format!("eigenvalue cap must be positive, got {cap}")));
    }
    let limit = cap.clone() + S::tolerance();
    Ok(p.iter().all(|v| *v <= limit))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ImpossibilityBound {
    /// `½(1 - exp(-X·Δs/2))`.
    pub value: f64,
    /// `value > 1/3`.
    pub exceeds_third: bool,
}

/// Lower bound on how far any pinched image of the source flat state stays
/// from the target, given the entropy-density gap `delta_s` at scale `scale`.
pub fn impossibility_bound(delta_s: f64, scale: u64) -> Result<ImpossibilityBound> {
    if !delta_s.is_finite() || delta_s <= 0.0 {
        return Err(Error::NonPositiveGap(delta_s.to_string()));
    }
    if scale == 0 {
        return Err(Error::InvalidArgument("scale must be at least 1".into()));
    }
    let value = -0.5 * (-(scale as f64) * delta_s / 2.0).exp_m1();
    Ok(ImpossibilityBound { value, exceeds_third: value > 1.0 / 3.0 })
}

/// Best pinched image of flat `1/D` onto the support of flat `1/D′`, as shared
/// blocks `(image value, target value, count)`.
#[derive(Clone, Debug, PartialEq)]
pub struct FlatImage {
    pub blocks: Vec<(Rational, Rational, BigUint)>,
}

impl FlatImage {
    pub fn trace_distance(&self) -> Rational {
        let total = self.blocks.iter().fold(Rational::zero(), |acc, (a, b, c)| {
            let diff = if a > b { a - b } else { b - a };
            acc + diff * Rational::from_integer(c.clone().into())
        });
        total / Rational::from_integer(2.into())
    }

    pub fn image_spectrum(&self) -> Result<RunSpectrum<Rational>> {
        RunSpectrum::from_runs(self.blocks.iter().map(|(a, _, c)| (a.clone(), c.clone())).collect())
    }
}

/// When `D ≤ D′` the target itself is reachable. Otherwise the image saturates
/// every target state at `1/D` and spills the rest outside the support.
pub fn best_flat_image(d: &BigUint, d_prime: &BigUint) -> Result<FlatImage> {
    if d.is_zero() || d_prime.is_zero() {
        return Err(Error::InvalidArgument("flat dimensions must be at least 1".into()));
    }
    let inv = |n: &BigUint| Rational::new(1.into(), n.clone().into());
    let blocks = if d <= d_prime {
        vec![(inv(d_prime), inv(d_prime), d_prime.clone())]
    } else {
        vec![(inv(d), inv(d_prime), d_prime.clone()), (inv(d), Rational::zero(), d - d_prime)]
    };
    let image = FlatImage { blocks };
    let source = RunSpectrum::from_runs(vec![(inv(d), d.clone())])?;
    if !majorizes_runs(&source, &image.image_spectrum()?)? {
        return Err(Error::InvariantViolation("best image is not majorized by the source".into()));
    }
    if image.blocks.iter().any(|(a, _, _)| *a > inv(d)) {
        return Err(Error::InvariantViolation("best image exceeds the 1/D eigenvalue cap".into()));
    }
    Ok(image)
}

/// `max(0, 1 - D′/D)`.
pub fn best_flat_image_distance(d: &BigUint, d_prime: &BigUint) -> Result<f64> {
    let image = best_flat_image(d, d_prime)?;
    let dist = image.trace_distance();
    debug_assert!(dist <= Rational::one());
    Ok(rational_to_f64(&dist))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::parse_rational;

    #[test]
    fn pinch_in_support_weight() {
        let map = PinchingMap::new(3, [0, 2]).unwrap();
        let out = pinch_spectrum(&map, &[0.5f64, 0.3, 0.2]).unwrap();
        assert!((out.in_support - 0.7).abs() < 1e-15);
        assert_eq!(out.weights[1], (0.3, false));
        assert!(PinchingMap::new(2, [2]).is_err());
        assert!(pinch_spectrum(&map, &[0.5, 0.5]).is_err());
    }

    #[test]
    fn trace_distances() {
        assert!((trace_distance_commuting(&[1.0f64, 0.0], &[0.0, 1.0]).unwrap() - 1.0).abs() < 1e-15);
        assert_eq!(trace_distance_commuting(&[0.5, 0.5], &[0.5, 0.5]).unwrap(), 0.0);
        let half = parse_rational("1/2").unwrap();
        let q = parse_rational("1/4").unwrap();
        assert_eq!(trace_distance_commuting(&[half.clone(), half], &[q.clone(), q.clone(), q.clone(), q]).unwrap(), parse_rational("1/2").unwrap());
    }

    #[test]
    fn impossibility_values() {
        let b = impossibility_bound(0.1, 100).unwrap();
        assert!((b.value - 0.496631).abs() < 1e-6);
        assert!(b.exceeds_third);
        let c = impossibility_bound(0.1, 20).unwrap();
        assert!((c.value - 0.316060).abs() < 1e-6);
        assert!(!c.exceeds_third);
        assert!(impossibility_bound(1e-12, 1).unwrap().value < 1e-11);
        assert!(matches!(impossibility_bound(0.0, 10), Err(Error::NonPositiveGap(_))));
        assert!(matches!(impossibility_bound(-0.1, 10), Err(Error::NonPositiveGap(_))));
    }

    #[test]
    fn cap_check() {
        assert!(eigenvalue_cap_check(&[0.25; 4], &0.25).unwrap());
        assert!(!eigenvalue_cap_check(&[0.25 + 1e-6, 0.25 - 1e-6], &0.25).unwrap());
        assert!(eigenvalue_cap_check(&[0.1], &0.0).is_err());
    }

    #[test]
    fn flat_image_distance() {
        let d = |n: u32| BigUint::from(n);
        assert_eq!(best_flat_image_distance(&d(6), &d(11)).unwrap(), 0.0);
        assert!((best_flat_image_distance(&d(16), &d(4)).unwrap() - 0.75).abs() < 1e-15);
        let image = best_flat_image(&d(16), &d(4)).unwrap();
        assert_eq!(image.trace_distance(), parse_rational("3/4").unwrap());
        assert!(best_flat_image(&d(0), &d(4)).is_err());
    }
}
