use num_bigint::BigUint;
use num_traits::{One, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::schedule::DeltaSchedule;
use crate::error::{Error, Result};
use crate::microcanonical::{downward_dimension, shell_dimension, DimensionCount, Macrostate, ShellConvention};
use crate::scalar::{ln_biguint, Rational};
use crate::serde_util;
use crate::spectra::{ModelSystem, ScaleCounter};

/// Which dimension a sequence tracks.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "tag", rename_all = "kebab-case")]
pub enum Quantity {
    /// `D↓_a`.
    Downward,
    /// `D_{a,δ_X}`.
    Shell { schedule: DeltaSchedule },
    /// `D↓_{a(1+δ_X)}`.
    InflatedDownward { schedule: DeltaSchedule },
}

impl Quantity {
    pub fn shell(schedule: DeltaSchedule) -> Self {
        Quantity::Shell { schedule }
    }

    pub fn tag(&self) -> &'static str {
        match self {
            Quantity::Downward => "downward",
            Quantity::Shell { .. } => "shell",
            Quantity::InflatedDownward { .. } => "inflated-downward",
        }
    }

    pub fn schedule(&self) -> Option<&DeltaSchedule> {
        match self {
            Quantity::Downward => None,
            Quantity::Shell { schedule } | Quantity::InflatedDownward { schedule } => Some(schedule),
        }
    }

    /// Schedule identifier, or the tag for unscheduled quantities.
    pub fn schedule_id(&self) -> String {
        self.schedule().map_or_else(|| self.tag().to_string(), DeltaSchedule::id)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EntropyPoint {
    pub scale: u64,
    #[serde(with = "serde_util::count")]
    pub dimension: BigUint,
    /// `(1/X)·ln D`.
    pub density: f64,
    #[serde(with = "serde_util::opt_rational")]
    pub delta: Option<Rational>,
    pub boundary_hit: bool,
}

/// `s_X` over a grid of scales for one macrostate and quantity.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EntropySequence {
    pub macrostate: Macrostate,
    pub quantity: Quantity,
    pub convention: ShellConvention,
    pub points: Vec<EntropyPoint>,
    /// Scales dropped because the counted subspace was empty.
    pub empty_scales: Vec<u64>,
}

impl EntropySequence {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn scales(&self) -> Vec<u64> {
        self.points.iter().map(|p| p.scale).collect()
    }

    pub fn densities(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.density).collect()
    }

    pub fn last(&self) -> Option<&EntropyPoint> {
        self.points.last()
    }
}

/// Scales must be nonempty, positive and strictly increasing.
pub fn check_scales(scales: &[u64]) -> Result<()> {
    if scales.is_empty() {
        return Err(Error::InvalidScales("no scales given".into()));
    }
    if scales[0] == 0 {
        return Err(Error::InvalidScales("scales must be positive".into()));
    }
    if scales.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidScales("scales must be strictly increasing".into()));
    }
    Ok(())
}

/// Geometric grid `x0·2^k` for `k = 0..count`.
pub fn geometric_scales(x0: u64, count: u32) -> Vec<u64> {
    (0..count).map(|k| x0 << k).collect()
}

pub(crate) fn count_at(
    model: &ModelSystem,
    a: &Macrostate,
    quantity: &Quantity,
    scale: u64,
    conv: ShellConvention,
) -> Result<(DimensionCount, Option<Rational>)> {
    let counter = ScaleCounter::new(model, scale);
    match quantity {
        Quantity::Downward => Ok((downward_dimension(&counter, a, scale)?, None)),
        Quantity::Shell { schedule } => {
            let delta = schedule.delta_at(scale);
            Ok((shell_dimension(&counter, a, &delta, scale, conv)?, Some(delta)))
        }
        Quantity::InflatedDownward { schedule } => {
            let delta = schedule.delta_at(scale);
            let inflated = a.scaled(&(Rational::one() + &delta));
            Ok((downward_dimension(&counter, &inflated, scale)?, Some(delta)))
        }
    }
}

/// `s_X = (1/X)·ln D` at every scale, in parallel over scales. Scales whose
/// subspace is empty are recorded in `empty_scales` and skipped.
pub fn entropy_density_sequence(
    model: &ModelSystem,
    a: &Macrostate,
    quantity: &Quantity,
    scales: &[u64],
    conv: ShellConvention,
) -> Result<EntropySequence> {
    check_scales(scales)?;
    a.check_arity(model.num_observables())?;
    if let Some(schedule) = quantity.schedule() {
        schedule.check()?;
    }
    let counted: Vec<(u64, DimensionCount, Option<Rational>)> = scales
        .par_iter()
        .map(|&x| count_at(model, a, quantity, x, conv).map(|(c, d)| (x, c, d)))
        .collect::<Result<_>>()?;
    let mut points = Vec::with_capacity(counted.len());
    let mut empty_scales = Vec::new();
    for (scale, count, delta) in counted {
        if count.value.is_zero() {
            empty_scales.push(scale);
            continue;
        }
        points.push(EntropyPoint {
            scale,
            density: ln_biguint(&count.value) / scale as f64,
            dimension: count.value,
            delta,
            boundary_hit: count.boundary_hit,
        });
    }
    if points.is_empty() {
        return Err(Error::AllShellsEmpty);
    }
    Ok(EntropySequence { macrostate: a.clone(), quantity: quantity.clone(), convention: conv, points, empty_scales })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::parse_rational;
    use crate::spectra::{build_model, ModelSpec};

    fn paramagnet() -> ModelSystem {
        build_model(&ModelSpec::family("paramagnet")).unwrap()
    }

    #[test]
    fn downward_at_four() {
        let a = Macrostate::parse("0.25").unwrap();
        let seq = entropy_density_sequence(&paramagnet(), &a, &Quantity::Downward, &[4], ShellConvention::default())
            .unwrap();
        assert_eq!(seq.len(), 1);
        assert_eq!(seq.points[0].dimension, BigUint::from(5u32));
        assert!((seq.points[0].density - 5f64.ln() / 4.0).abs() < 1e-15);
    }

    #[test]
    fn empty_scales_are_flagged() {
        // a = 0.3, δ = 0.05: window [0.285X, 0.315X) misses every integer at X = 3.
        let a = Macrostate::parse("0.3").unwrap();
        let q = Quantity::shell(DeltaSchedule::constant(parse_rational("0.05").unwrap()).unwrap());
        let seq = entropy_density_sequence(&paramagnet(), &a, &q, &[3, 10, 20], ShellConvention::default()).unwrap();
        assert_eq!(seq.empty_scales, vec![3]);
        assert_eq!(seq.scales(), vec![10, 20]);
        let none = entropy_density_sequence(&paramagnet(), &a, &q, &[3], ShellConvention::default());
        assert_eq!(none.unwrap_err(), Error::AllShellsEmpty);
    }

    #[test]
    fn scale_grid_checks() {
        assert!(check_scales(&[]).is_err());
        assert!(check_scales(&[4, 4]).is_err());
        assert!(check_scales(&[0, 4]).is_err());
        assert_eq!(geometric_scales(256, 5), vec![256, 512, 1024, 2048, 4096]);
    }
}
