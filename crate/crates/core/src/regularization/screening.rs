use num_traits::{Signed, ToPrimitive};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::estimate::{estimate_limit, EstimateMethod, LimitEstimate};
use super::sequence::{entropy_density_sequence, Quantity};
use crate::error::Result;
use crate::microcanonical::{Macrostate, ShellConvention};
use crate::scalar::{rational_from_u64, Rational};
use crate::serde_util;
use crate::spectra::ModelSystem;

/// Minimum estimated slope, in nats per unit density, for a bump to count as
/// a strict increase.
pub const SLOPE_THRESHOLD: f64 = 1e-6;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BumpCheck {
    pub component: usize,
    #[serde(with = "serde_util::rational")]
    pub step: Rational,
    pub estimate: LimitEstimate,
    pub slope: f64,
    pub passed: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScreeningReport {
    pub base: LimitEstimate,
    pub bumps: Vec<BumpCheck>,
    pub passed: bool,
    /// Convexity is not examined by any check.
    pub convexity_checked: bool,
}

/// Bump size for component `l`: 2% of `|a_l|`, at least `10⁻³`.
pub fn bump_step(value: &Rational) -> Rational {
    let relative = value.abs() / rational_from_u64(50);
    let floor = Rational::new(1.into(), 1000.into());
    if relative > floor {
        relative
    } else {
        floor
    }
}

/// Checks that the downward-based entropy estimate grows under a small
/// positive bump of each component of `a`.
pub fn strict_increase_screening(
    model: &ModelSystem,
    a: &Macrostate,
    scales: &[u64],
    method: EstimateMethod,
) -> Result<ScreeningReport> {
    let estimate = |m: &Macrostate| -> Result<LimitEstimate> {
        let seq = entropy_density_sequence(model, m, &Quantity::Downward, scales, ShellConvention::default())?;
        estimate_limit(&seq, method)
    };
    let base = estimate(a)?;
    let bumps: Vec<BumpCheck> = (0..a.len())
        .into_par_iter()
        .map(|l| {
            let step = bump_step(&a.densities()[l]);
            let bumped = estimate(&a.bumped(l, &step))?;
            let slope = (bumped.value - base.value) / step.to_f64().unwrap_or(f64::NAN);
            Ok(BumpCheck { component: l, step, estimate: bumped, slope, passed: slope > SLOPE_THRESHOLD })
        })
        .collect::<Result<_>>()?;
    let passed = bumps.iter().all(|b| b.passed);
    Ok(ScreeningReport { base, bumps, passed, convexity_checked: false })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectra::{build_model, ModelSpec};

    #[test]
    fn paramagnet_below_and_above_half() {
        let model = build_model(&ModelSpec::family("paramagnet")).unwrap();
        let scales = [256, 512, 1024, 2048];
        let low = strict_increase_screening(&model, &Macrostate::parse("0.3").unwrap(), &scales, EstimateMethod::AffineFit)
            .unwrap();
        assert!(low.passed);
        assert!(!low.convexity_checked);
        let high =
            strict_increase_screening(&model, &Macrostate::parse("0.8").unwrap(), &scales, EstimateMethod::AffineFit)
                .unwrap();
        assert!(!high.passed, "slope {}", high.bumps[0].slope);
    }

    #[test]
    fn bump_sizes() {
        assert_eq!(bump_step(&Rational::new(1.into(), 2.into())), Rational::new(1.into(), 100.into()));
        assert_eq!(bump_step(&Rational::from_integer(0.into())), Rational::new(1.into(), 1000.into()));
    }
}
