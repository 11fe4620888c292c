use std::fmt;

use num_traits::{Signed, ToPrimitive};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::{rational_from_f64, Rational};
use crate::serde_util;

/// One step of a tabulated schedule: `delta` applies from scale `from` up to
/// the next step.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScheduleStep {
    pub from: u64,
    #[serde(with = "serde_util::rational")]
    pub delta: Rational,
}

/// A scale-indexed family of shell half-widths `δ_X`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "form", rename_all = "kebab-case", deny_unknown_fields)]
pub enum DeltaSchedule {
    /// `δ_X = c·X^(-α)`, rounded to the nearest `f64` and then taken exactly.
    Power { c: f64, alpha: f64 },
    /// `δ_X = value` at every scale. Does not vanish; useful for finite-scale
    /// constructions only.
    Constant {
        #[serde(with = "serde_util::rational")]
        value: Rational,
    },
    /// `value` up to scale `until`, then `value·(X/until)^(-α)`.
    ConstantThenDecay {
        #[serde(with = "serde_util::rational")]
        value: Rational,
        until: u64,
        alpha: f64,
    },
    /// Step function through explicit `(X, δ)` pairs. Scales below the first
    /// step use the first value.
    Table { steps: Vec<ScheduleStep> },
}

fn check_exponent(name: &str, value: f64) -> Result<()> {
    if !(value.is_finite() && value > 0.0) {
        return Err(Error::InvalidSchedule(format!("{name} must be finite and positive, got {value}")));
    }
    Ok(())
}

fn check_delta(value: &Rational) -> Result<()> {
    if !value.is_positive() {
        return Err(Error::InvalidSchedule(format!("δ values must be positive, got {value}")));
    }
    Ok(())
}

impl DeltaSchedule {
    pub fn power(c: f64, alpha: f64) -> Result<Self> {
        let s = DeltaSchedule::Power { c, alpha };
        s.check()?;
        Ok(s)
    }

    pub fn constant(value: Rational) -> Result<Self> {
        let s = DeltaSchedule::Constant { value };
        s.check()?;
        Ok(s)
    }

    pub fn constant_then_decay(value: Rational, until: u64, alpha: f64) -> Result<Self> {
        let s = DeltaSchedule::ConstantThenDecay { value, until, alpha };
        s.check()?;
        Ok(s)
    }

    pub fn table(steps: Vec<ScheduleStep>) -> Result<Self> {
        let s = DeltaSchedule::Table { steps };
        s.check()?;
        Ok(s)
    }

    /// Structural checks: positive parameters, strictly increasing table scales.
    pub fn check(&self) -> Result<()> {
        match self {
            DeltaSchedule::Power { c, alpha } => {
                check_exponent("c", *c)?;
                check_exponent("alpha", *alpha)
            }
            DeltaSchedule::Constant { value } => check_delta(value),
            DeltaSchedule::ConstantThenDecay { value, until, alpha } => {
                check_delta(value)?;
                check_exponent("alpha", *alpha)?;
                if *until == 0 {
                    return Err(Error::InvalidSchedule("`until` must be at least 1".into()));
                }
                Ok(())
            }
            DeltaSchedule::Table { steps } => {
                if steps.is_empty() {
                    return Err(Error::InvalidSchedule("table schedule has no steps".into()));
                }
                for step in steps {
                    check_delta(&step.delta)?;
                }
                if steps.windows(2).any(|w| w[0].from >= w[1].from) {
                    return Err(Error::InvalidSchedule("table scales must be strictly increasing".into()));
                }
                Ok(())
            }
        }
    }

    /// [`check`](Self::check) plus the shape a vanishing schedule needs:
    /// tables must be nonincreasing.
    pub fn validate(&self) -> Result<()> {
        self.check()?;
        if let DeltaSchedule::Table { steps } = self {
            if steps.windows(2).any(|w| w[1].delta > w[0].delta) {
                return Err(Error::InvalidSchedule("table schedule must be nonincreasing".into()));
            }
        }
        Ok(())
    }

    /// `δ_X` as an exact rational.
    pub fn delta_at(&self, scale: u64) -> Rational {
        let x = scale as f64;
        match self {
            DeltaSchedule::Power { c, alpha } => exact(c * x.powf(-alpha)),
            DeltaSchedule::Constant { value } => value.clone(),
            DeltaSchedule::ConstantThenDecay { value, until, alpha } => {
                if scale <= *until {
                    value.clone()
                } else {
                    value * exact((x / *until as f64).powf(-alpha))
                }
            }
            DeltaSchedule::Table { steps } => steps
                .iter()
                .rev()
                .find(|s| s.from <= scale)
                .unwrap_or(&steps[0])
                .delta
                .clone(),
        }
    }

    pub fn delta_f64(&self, scale: u64) -> f64 {
        self.delta_at(scale).to_f64().unwrap_or(f64::NAN)
    }

    /// Whether `δ_X` takes the same value at every scale.
    pub fn is_constant(&self) -> bool {
        match self {
            DeltaSchedule::Constant { .. } => true,
            DeltaSchedule::Table { steps } => steps.iter().all(|s| s.delta == steps[0].delta),
            _ => false,
        }
    }

    /// Short stable identifier used in file names and CSV columns.
    pub fn id(&self) -> String {
        match self {
            DeltaSchedule::Power { c, alpha } => format!("power(c={c},alpha={alpha})"),
            DeltaSchedule::Constant { value } => format!("constant({value})"),
            DeltaSchedule::ConstantThenDecay { value, until, alpha } => {
                format!("constant-then-decay({value},until={until},alpha={alpha})")
            }
            DeltaSchedule::Table { steps } => {
                let parts: Vec<String> = steps.iter().map(|s| format!("{}:{}", s.from, s.delta)).collect();
                format!("table[{}]", parts.join(","))
            }
        }
    }
}

fn exact(value: f64) -> Rational {
    rational_from_f64(value).expect("finite schedule value")
}

impl fmt::Display for DeltaSchedule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.id())
    }
}
