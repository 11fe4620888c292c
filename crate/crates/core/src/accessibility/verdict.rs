use std::fmt;

use num_bigint::BigUint;
use num_traits::Zero;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::eta::{construct_delta_prime, DeltaPrimeConstruction};
use super::runs::flat_convertible_at_scale;
use crate::channels::{best_flat_image_distance, impossibility_bound};
use crate::error::Result;
use crate::microcanonical::{shell_dimension, Macrostate, ShellConvention};
use crate::regularization::{
    check_scales, entropy_density_sequence, estimate_limit, geometric_scales, strict_increase_screening,
    tail_proxies, upper_lower_entropy, DeltaSchedule, EstimateMethod, LimitEstimate, Quantity, ScreeningReport,
    UpperLowerEntropy,
};
use crate::scalar::ln_biguint;
use crate::serde_util;
use crate::spectra::{ModelSystem, ScaleCounter};

/// Absolute floor added to every margin, in nats per unit scale.
pub const MARGIN_FLOOR: f64 = 1e-4;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Decision {
    Possible,
    Impossible,
    Indeterminate,
}

impl fmt::Display for Decision {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Decision::Possible => "possible",
            Decision::Impossible => "impossible",
            Decision::Indeterminate => "indeterminate",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Basis {
    Theorem1,
    Theorem2,
    Lemma4,
    FiniteScale,
}

impl Basis {
    pub fn as_str(self) -> &'static str {
        match self {
            Basis::Theorem1 => "theorem1",
            Basis::Theorem2 => "theorem2",
            Basis::Lemma4 => "lemma4",
            Basis::FiniteScale => "finite-scale",
        }
    }
}

impl fmt::Display for Basis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Settings shared by every verdict rule.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct VerdictConfig {
    /// Scales for downward estimates, shell sequences and per-scale evidence.
    pub scales: Vec<u64>,
    pub convention: ShellConvention,
    /// Declared family standing in for all vanishing schedules.
    pub schedules: Vec<DeltaSchedule>,
    /// Schedule `δ_X` used by the equal-entropy branch and per-scale evidence.
    pub equal_schedule: DeltaSchedule,
    /// Fraction of the scale grid used as tail window.
    pub tail_fraction: f64,
    pub margin_floor: f64,
    /// Limit estimator for downward sequences.
    pub method: EstimateMethod,
    /// Extrapolation applied to tail proxies; `None` uses raw tail extremes.
    pub extrapolate: Option<EstimateMethod>,
    /// Scales below `x0` are not required to pass finite-scale checks.
    pub x0: u64,
}

impl Default for VerdictConfig {
    fn default() -> Self {
        VerdictConfig {
            scales: geometric_scales(512, 7),
            convention: ShellConvention::Multiplicative,
            schedules: vec![
                DeltaSchedule::Power { c: 1.0, alpha: 0.25 },
                DeltaSchedule::Power { c: 1.0, alpha: 0.5 },
                DeltaSchedule::Power { c: 0.1, alpha: 1.0 / 3.0 },
            ],
            equal_schedule: DeltaSchedule::Power { c: 1.0, alpha: 1.0 / 3.0 },
            tail_fraction: 0.5,
            margin_floor: MARGIN_FLOOR,
            method: EstimateMethod::AffineFit,
            extrapolate: Some(EstimateMethod::ScheduleFit),
            x0: 0,
        }
    }
}

/// A labelled limit estimate in a verdict's evidence.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NamedEstimate {
    pub name: String,
    pub estimate: LimitEstimate,
}

/// Flat-state comparison at one scale: shells of `a` and `a′` under the
/// evidence schedule, plus the trace-distance bound when `D > D′`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScaleEvidence {
    pub scale: u64,
    #[serde(with = "serde_util::count")]
    pub d: BigUint,
    #[serde(with = "serde_util::count")]
    pub d_prime: BigUint,
    pub flat_convertible: bool,
    /// `(1/X)·(ln D - ln D′)`.
    pub entropy_gap: f64,
    /// `1 - D′/D`, the distance from the best image of `π_a` to `π_{a′}`.
    pub best_image_distance: f64,
    /// `½(1 - e^{-X·gap/2})` when the gap is positive.
    pub impossibility_bound: Option<f64>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Evidence {
    pub margin: f64,
    pub estimates: Vec<NamedEstimate>,
    pub scales: Vec<ScaleEvidence>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub screening: Vec<ScreeningReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub delta_prime: Option<DeltaPrimeConstruction>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub upper_lower: Vec<UpperLowerEntropy>,
    pub schedule_family: Vec<String>,
}

/// An accessibility decision for `a → a′` with the evidence behind it.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Verdict {
    pub decision: Decision,
    pub basis: Basis,
    /// `strict-gap`, `equal-entropy`, `screening` or `margin`.
    pub branch: String,
    pub reason: String,
    pub source: Macrostate,
    pub target: Macrostate,
    pub evidence: Evidence,
}

fn named(name: &str, estimate: LimitEstimate) -> NamedEstimate {
    NamedEstimate { name: name.to_string(), estimate }
}

/// Decision from `gain = (target side) - (source side)` against a margin.
fn compare(forward: f64, backward: f64, margin: f64) -> Decision {
    if forward > margin {
        Decision::Possible
    } else if backward > margin {
        Decision::Impossible
    } else {
        Decision::Indeterminate
    }
}

/// Per-scale flat comparison of the shells of `a` and `a′` under `schedule`.
pub fn scale_evidence(
    model: &ModelSystem,
    a: &Macrostate,
    schedule: &DeltaSchedule,
    a_prime: &Macrostate,
    schedule_prime: &DeltaSchedule,
    scales: &[u64],
    conv: ShellConvention,
) -> Result<Vec<ScaleEvidence>> {
    check_scales(scales)?;
    scales
        .par_iter()
        .map(|&x| {
            let counter = ScaleCounter::new(model, x);
            let d = shell_dimension(&counter, a, &schedule.delta_at(x), x, conv)?.value;
            let d_prime = shell_dimension(&counter, a_prime, &schedule_prime.delta_at(x), x, conv)?.value;
            let nonempty = !d.is_zero() && !d_prime.is_zero();
            let flat_convertible = nonempty && flat_convertible_at_scale(&d, &d_prime)?;
            let entropy_gap =
                if nonempty { (ln_biguint(&d) - ln_biguint(&d_prime)) / x as f64 } else { f64::NAN };
            let best_image_distance = if nonempty { best_flat_image_distance(&d, &d_prime)? } else { f64::NAN };
            let impossibility_bound = (entropy_gap > 0.0)
                .then(|| impossibility_bound(entropy_gap, x).map(|b| b.value))
                .transpose()?;
            Ok(ScaleEvidence { scale: x, d, d_prime, flat_convertible, entropy_gap, best_image_distance, impossibility_bound })
        })
        .collect()
}

fn downward_estimate(model: &ModelSystem, a: &Macrostate, config: &VerdictConfig) -> Result<LimitEstimate> {
    let seq = entropy_density_sequence(model, a, &Quantity::Downward, &config.scales, config.convention)?;
    estimate_limit(&seq, config.method)
}

/// Theorem-1 rule: screening for strict increase, then a strict entropy gap
/// in either direction, else the equal-entropy branch through `δ′`.
pub fn verdict_theorem1(
    model: &ModelSystem,
    a: &Macrostate,
    a_prime: &Macrostate,
    config: &VerdictConfig,
) -> Result<Verdict> {
    let mut evidence = Evidence {
        schedule_family: vec![config.equal_schedule.id()],
        ..Default::default()
    };
    evidence.scales = scale_evidence(
        model,
        a,
        &config.equal_schedule,
        a_prime,
        &config.equal_schedule,
        &config.scales,
        config.convention,
    )?;
    let verdict = |decision, branch: &str, reason: String, evidence| Verdict {
        decision,
        basis: Basis::Theorem1,
        branch: branch.to_string(),
        reason,
        source: a.clone(),
        target: a_prime.clone(),
        evidence,
    };
    let screens = [a, a_prime]
        .par_iter()
        .map(|m| strict_increase_screening(model, m, &config.scales, config.method))
        .collect::<Result<Vec<_>>>()?;
    let screened = screens.iter().all(|s| s.passed);
    evidence.screening = screens;
    if !screened {
        return Ok(verdict(
            Decision::Indeterminate,
            "screening",
            "entropy estimate is not strictly increasing under positive bumps".into(),
            evidence,
        ));
    }
    let s_a = downward_estimate(model, a, config)?;
    let s_b = downward_estimate(model, a_prime, config)?;
    let margin = s_a.error_bar + s_b.error_bar + config.margin_floor;
    evidence.margin = margin;
    let gain = s_b.value - s_a.value;
    evidence.estimates = vec![named("source", s_a), named("target", s_b)];
    match compare(gain, -gain, margin) {
        Decision::Possible => {
            let reason = format!("target entropy exceeds source by {gain:.6e} > margin {margin:.3e}");
            return Ok(verdict(Decision::Possible, "strict-gap", reason, evidence));
        }
        Decision::Impossible => {
            let reason = format!("source entropy exceeds target by {:.6e} > margin {margin:.3e}", -gain);
            return Ok(verdict(Decision::Impossible, "strict-gap", reason, evidence));
        }
        Decision::Indeterminate => {}
    }
    let construction = construct_delta_prime(model, a, a_prime, &config.equal_schedule, &config.scales)?;
    let ok = construction.verified_from(config.x0);
    evidence.delta_prime = Some(construction);
    let (decision, reason) = if ok {
        (Decision::Possible, format!("entropies agree within {margin:.3e}; δ′ sandwich holds at every scale ≥ {}", config.x0))
    } else {
        (Decision::Indeterminate, format!("entropies agree within {margin:.3e}; δ′ sandwich fails at some scale ≥ {}", config.x0))
    };
    Ok(verdict(decision, "equal-entropy", reason, evidence))
}

/// Theorem-2 rule: possible when `upper(a) < lower(a′)` and impossible when
/// `lower(a) > upper(a′)`, each beyond the combined error bars.
pub fn verdict_theorem2(
    model: &ModelSystem,
    a: &Macrostate,
    a_prime: &Macrostate,
    config: &VerdictConfig,
) -> Result<Verdict> {
    let ul = |m: &Macrostate| {
        upper_lower_entropy(
            model,
            m,
            &config.schedules,
            &config.scales,
            config.tail_fraction,
            config.convention,
            config.extrapolate,
        )
    };
    let (src, dst) = (ul(a)?, ul(a_prime)?);
    let forward = dst.lower.value - src.upper.value;
    let backward = src.lower.value - dst.upper.value;
    let margin_fwd = src.upper.error_bar + dst.lower.error_bar + config.margin_floor;
    let margin_bwd = src.lower.error_bar + dst.upper.error_bar + config.margin_floor;
    let (decision, margin, reason) = if forward > margin_fwd {
        (Decision::Possible, margin_fwd, format!("lower(a′) - upper(a) = {forward:.6e} > margin {margin_fwd:.3e}"))
    } else if backward > margin_bwd {
        (Decision::Impossible, margin_bwd, format!("lower(a) - upper(a′) = {backward:.6e} > margin {margin_bwd:.3e}"))
    } else {
        (Decision::Indeterminate, margin_fwd.max(margin_bwd), "upper/lower entropies overlap within margins".into())
    };
    let evidence = Evidence {
        margin,
        estimates: vec![
            named("source-upper", src.upper.clone()),
            named("source-lower", src.lower.clone()),
            named("target-upper", dst.upper.clone()),
            named("target-lower", dst.lower.clone()),
        ],
        upper_lower: vec![src, dst],
        schedule_family: config.schedules.iter().map(DeltaSchedule::id).collect(),
        ..Default::default()
    };
    Ok(Verdict {
        decision,
        basis: Basis::Theorem2,
        branch: "margin".into(),
        reason,
        source: a.clone(),
        target: a_prime.clone(),
        evidence,
    })
}

/// Lemma-4 rule for one explicit schedule on each side.
pub fn verdict_lemma4(
    model: &ModelSystem,
    a: &Macrostate,
    schedule: &DeltaSchedule,
    a_prime: &Macrostate,
    schedule_prime: &DeltaSchedule,
    config: &VerdictConfig,
) -> Result<Verdict> {
    let proxies = |m: &Macrostate, s: &DeltaSchedule| {
        let seq = entropy_density_sequence(model, m, &Quantity::shell(s.clone()), &config.scales, config.convention)?;
        tail_proxies(&seq, config.tail_fraction, config.extrapolate)
    };
    let (src_sup, src_inf) = proxies(a, schedule)?;
    let (dst_sup, dst_inf) = proxies(a_prime, schedule_prime)?;
    let forward = dst_inf.value - src_sup.value;
    let backward = src_inf.value - dst_sup.value;
    let margin_fwd = src_sup.error_bar + dst_inf.error_bar + config.margin_floor;
    let margin_bwd = src_inf.error_bar + dst_sup.error_bar + config.margin_floor;
    let (decision, margin, reason) = if forward > margin_fwd {
        (Decision::Possible, margin_fwd, format!("s̲(a′) - s̄(a) = {forward:.6e} > margin {margin_fwd:.3e}"))
    } else if backward > margin_bwd {
        (Decision::Impossible, margin_bwd, format!("s̲(a) - s̄(a′) = {backward:.6e} > margin {margin_bwd:.3e}"))
    } else {
        (Decision::Indeterminate, margin_fwd.max(margin_bwd), "schedule proxies overlap within margins".into())
    };
    let evidence = Evidence {
        margin,
        estimates: vec![
            named("source-limsup", src_sup),
            named("source-liminf", src_inf),
            named("target-limsup", dst_sup),
            named("target-liminf", dst_inf),
        ],
        scales: scale_evidence(model, a, schedule, a_prime, schedule_prime, &config.scales, config.convention)?,
        schedule_family: vec![schedule.id(), schedule_prime.id()],
        ..Default::default()
    };
    Ok(Verdict {
        decision,
        basis: Basis::Lemma4,
        branch: "margin".into(),
        reason,
        source: a.clone(),
        target: a_prime.clone(),
        evidence,
    })
}

/// Finite-scale proxy: possible when `D ≤ D′` at every tested scale `≥ x0`,
/// impossible when `D > D′` at every such scale.
pub fn verdict_finite_scale(
    model: &ModelSystem,
    a: &Macrostate,
    schedule: &DeltaSchedule,
    a_prime: &Macrostate,
    schedule_prime: &DeltaSchedule,
    config: &VerdictConfig,
) -> Result<Verdict> {
    let scales = scale_evidence(model, a, schedule, a_prime, schedule_prime, &config.scales, config.convention)?;
    let tail: Vec<&ScaleEvidence> = scales.iter().filter(|s| s.scale >= config.x0).collect();
    let comparable = !tail.is_empty() && tail.iter().all(|s| !s.d.is_zero() && !s.d_prime.is_zero());
    let (decision, reason) = if comparable && tail.iter().all(|s| s.flat_convertible) {
        (Decision::Possible, format!("D ≤ D′ at every tested scale ≥ {}", config.x0))
    } else if comparable && tail.iter().all(|s| !s.flat_convertible) {
        (Decision::Impossible, format!("D > D′ at every tested scale ≥ {}", config.x0))
    } else {
        (Decision::Indeterminate, "flat comparison changes sign or a shell is empty".into())
    };
    Ok(Verdict {
        decision,
        basis: Basis::FiniteScale,
        branch: "per-scale".into(),
        reason,
        source: a.clone(),
        target: a_prime.clone(),
        evidence: Evidence {
            scales,
            schedule_family: vec![schedule.id(), schedule_prime.id()],
            ..Default::default()
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectra::{build_model, ModelSpec};

    fn single(text: &str) -> Macrostate {
        Macrostate::parse(text).unwrap()
    }

    fn quick_config() -> VerdictConfig {
        VerdictConfig { scales: geometric_scales(256, 4), ..Default::default() }
    }

    #[test]
    fn paramagnet_theorem1() {
        let model = build_model(&ModelSpec::family("paramagnet")).unwrap();
        let config = quick_config();
        let up = verdict_theorem1(&model, &single("0.2"), &single("0.4"), &config).unwrap();
        assert_eq!((up.decision, up.branch.as_str()), (Decision::Possible, "strict-gap"));
        let down = verdict_theorem1(&model, &single("0.4"), &single("0.2"), &config).unwrap();
        assert_eq!(down.decision, Decision::Impossible);
        assert!(down.evidence.scales.iter().all(|s| s.impossibility_bound.is_some()));
        let same = verdict_theorem1(&model, &single("0.3"), &single("0.3"), &config).unwrap();
        assert_eq!((same.decision, same.branch.as_str()), (Decision::Possible, "equal-entropy"));
        let high = verdict_theorem1(&model, &single("0.7"), &single("0.8"), &config).unwrap();
        assert_eq!((high.decision, high.branch.as_str()), (Decision::Indeterminate, "screening"));
    }

    #[test]
    fn lemma4_identical_pairs_are_indeterminate() {
        let model = build_model(&ModelSpec::family("paramagnet")).unwrap();
        let config = VerdictConfig { extrapolate: None, ..quick_config() };
        let s = DeltaSchedule::power(1.0, 1.0 / 3.0).unwrap();
        let v = verdict_lemma4(&model, &single("0.3"), &s, &single("0.3"), &s, &config).unwrap();
        assert_eq!(v.decision, Decision::Indeterminate);
    }

    #[test]
    fn finite_scale_rule() {
        let model = build_model(&ModelSpec::family("paramagnet")).unwrap();
        let config = quick_config();
        let s = DeltaSchedule::power(1.0, 1.0 / 3.0).unwrap();
        let v = verdict_finite_scale(&model, &single("0.2"), &s, &single("0.4"), &s, &config).unwrap();
        assert_eq!(v.decision, Decision::Possible);
        let w = verdict_finite_scale(&model, &single("0.4"), &s, &single("0.2"), &s, &config).unwrap();
        assert_eq!(w.decision, Decision::Impossible);
    }
}
