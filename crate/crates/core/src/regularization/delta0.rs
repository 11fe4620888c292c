use num_traits::{One, Signed};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::schedule::{DeltaSchedule, ScheduleStep};
use super::sequence::check_scales;
use crate::error::{Error, Result};
use crate::microcanonical::{downward_dimension, Macrostate};
use crate::scalar::{ln_biguint, Rational};
use crate::serde_util;
use crate::spectra::{ModelSystem, ScaleCounter};

/// `s⁻(X) - s⁺(X)` against the threshold `-1/√X` at one scale, where
/// `s±(X) = (1/X)·ln D↓_{a(1±ε)}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GapCheck {
    pub scale: u64,
    /// `None` when both downward sets are empty.
    pub gap: Option<f64>,
    pub threshold: f64,
    pub holds: bool,
}

/// Evaluates the gap inequality for `ε` at scale `X`. An empty lower set
/// gives `s⁻ = -∞`, which satisfies the inequality.
pub fn gap_check(model: &ModelSystem, a: &Macrostate, epsilon: &Rational, scale: u64) -> Result<GapCheck> {
    let counter = ScaleCounter::new(model, scale);
    let one = Rational::one();
    let lower = downward_dimension(&counter, &a.scaled(&(&one - epsilon)), scale)?.value;
    let upper = downward_dimension(&counter, &a.scaled(&(&one + epsilon)), scale)?.value;
    let x = scale as f64;
    let threshold = -1.0 / x.sqrt();
    let gap = match (lower.bits(), upper.bits()) {
        (_, 0) => None,
        (0, _) => Some(f64::NEG_INFINITY),
        _ => Some((ln_biguint(&lower) - ln_biguint(&upper)) / x),
    };
    Ok(GapCheck { scale, gap, threshold, holds: gap.is_some_and(|g| g <= threshold) })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Delta0Step {
    #[serde(with = "serde_util::rational")]
    pub epsilon: Rational,
    /// Smallest tested scale from which the gap holds at every tested scale.
    pub x_epsilon: u64,
    /// `X_m = max(X_ε, X_{m-1} + 1)`.
    pub start: u64,
    /// The gap inequality re-evaluated at `start`.
    pub boundary_check: GapCheck,
    pub checks: Vec<GapCheck>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Delta0Schedule {
    pub schedule: DeltaSchedule,
    pub steps: Vec<Delta0Step>,
}

impl Delta0Schedule {
    pub fn boundaries_hold(&self) -> bool {
        self.steps.iter().all(|s| s.boundary_check.holds)
    }
}

/// Builds the stepwise schedule `δ⁽⁰⁾_X = ε_m` for `X_m ≤ X < X_{m+1}`.
pub fn delta0_schedule(
    model: &ModelSystem,
    a: &Macrostate,
    epsilons: &[Rational],
    scales: &[u64],
) -> Result<Delta0Schedule> {
    check_scales(scales)?;
    a.check_arity(model.num_observables())?;
    if epsilons.is_empty() {
        return Err(Error::InvalidArgument("at least one ε is required".into()));
    }
    if epsilons.iter().any(|e| !e.is_positive() || *e >= Rational::one()) {
        return Err(Error::InvalidArgument("every ε must lie in (0, 1)".into()));
    }
    if epsilons.windows(2).any(|w| w[0] <= w[1]) {
        return Err(Error::InvalidArgument("ε values must be strictly decreasing".into()));
    }
    let mut steps: Vec<Delta0Step> = Vec::with_capacity(epsilons.len());
    for epsilon in epsilons {
        let checks: Vec<GapCheck> =
            scales.par_iter().map(|&x| gap_check(model, a, epsilon, x)).collect::<Result<_>>()?;
        let first_good = checks.iter().rposition(|c| !c.holds).map_or(0, |i| i + 1);
        if first_good == checks.len() {
            return Err(Error::GapConditionNeverMet { epsilon: epsilon.to_string() });
        }
        let x_epsilon = scales[first_good];
        let start = steps.last().map_or(x_epsilon, |prev| x_epsilon.max(prev.start + 1));
        let boundary_check = match checks.iter().find(|c| c.scale == start) {
            Some(c) => c.clone(),
            None => gap_check(model, a, epsilon, start)?,
        };
        steps.push(Delta0Step { epsilon: epsilon.clone(), x_epsilon, start, boundary_check, checks });
    }
    let schedule = DeltaSchedule::table(
        steps.iter().map(|s| ScheduleStep { from: s.start, delta: s.epsilon.clone() }).collect(),
    )?;
    Ok(Delta0Schedule { schedule, steps })
}
