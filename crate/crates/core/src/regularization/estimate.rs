use std::fmt;
use std::str::FromStr;

use nalgebra::{DMatrix, DVector};
use num_traits::ToPrimitive;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::schedule::DeltaSchedule;
use super::sequence::{count_at, entropy_density_sequence, EntropySequence, Quantity};
use crate::error::{Error, Result};
use crate::microcanonical::{boltzmann_entropy, Macrostate, ShellConvention};
use crate::spectra::ModelSystem;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EstimateMethod {
    LastPoint,
    /// `(X₂s₂ - X₁s₁)/(X₂ - X₁)` on the last two points, cancelling a `1/X` term.
    Richardson,
    /// Least squares on `{1, ln X/X, 1/X}`.
    AffineFit,
    /// Least squares on `{1, δ, δ², ln X/X, 1/X}`; falls back to
    /// [`AffineFit`](Self::AffineFit) columns when the sequence has no `δ`.
    ScheduleFit,
    /// Maximum over a tail window.
    TailMax,
    /// Minimum over a tail window.
    TailMin,
}

impl EstimateMethod {
    pub fn as_str(self) -> &'static str {
        match self {
            EstimateMethod::LastPoint => "last-point",
            EstimateMethod::Richardson => "richardson",
            EstimateMethod::AffineFit => "affine-fit",
            EstimateMethod::ScheduleFit => "schedule-fit",
            EstimateMethod::TailMax => "tail-max",
            EstimateMethod::TailMin => "tail-min",
        }
    }
}

impl fmt::Display for EstimateMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for EstimateMethod {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "last-point" | "last" => Ok(EstimateMethod::LastPoint),
            "richardson" => Ok(EstimateMethod::Richardson),
            "affine-fit" | "affine" => Ok(EstimateMethod::AffineFit),
            "schedule-fit" => Ok(EstimateMethod::ScheduleFit),
            "tail-max" => Ok(EstimateMethod::TailMax),
            "tail-min" => Ok(EstimateMethod::TailMin),
            other => Err(Error::InvalidArgument(format!("unknown estimate method `{other}`"))),
        }
    }
}

/// Finite-size proxy for a limit, with the method's own residual as error bar.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LimitEstimate {
    pub value: f64,
    pub error_bar: f64,
    pub method: EstimateMethod,
    pub tail_window: Vec<u64>,
}

struct Fit {
    coef: Vec<f64>,
    intercept_se: f64,
    fitted: Vec<f64>,
}

/// Ordinary least squares through an SVD of the column-normalised design.
/// The intercept standard error is `σ̂·sqrt((AᵀA)⁻¹₀₀)`, or zero when the
/// system is square.
fn least_squares(design: &[Vec<f64>], y: &[f64]) -> Fit {
    let n = y.len();
    let p = design[0].len();
    let norms: Vec<f64> = (0..p)
        .map(|j| design.iter().map(|r| r[j] * r[j]).sum::<f64>().sqrt().max(f64::MIN_POSITIVE))
        .collect();
    let a = DMatrix::from_fn(n, p, |i, j| design[i][j] / norms[j]);
    let b = DVector::from_column_slice(y);
    let svd = a.clone().svd(true, true);
    let scaled = svd.solve(&b, 1e-13).expect("SVD computed with both factors");
    let coef: Vec<f64> = (0..p).map(|j| scaled[j] / norms[j]).collect();
    let fitted: Vec<f64> = (0..n).map(|i| (0..p).map(|j| design[i][j] * coef[j]).sum()).collect();
    let intercept_se = if n > p {
        let rss: f64 = fitted.iter().zip(y).map(|(f, v)| (v - f) * (v - f)).sum();
        let sigma2 = rss / (n - p) as f64;
        let v_t = svd.v_t.as_ref().expect("requested");
        let var0: f64 = svd
            .singular_values
            .iter()
            .enumerate()
            .filter(|(_, s)| **s > 1e-13 * svd.singular_values[0])
            .map(|(k, s)| (v_t[(k, 0)] / s).powi(2))
            .sum();
        (sigma2 * var0).sqrt() / norms[0]
    } else {
        0.0
    };
    Fit { coef, intercept_se, fitted }
}

fn design_row(method: EstimateMethod, scale: u64, delta: Option<f64>, columns: usize) -> Vec<f64> {
    let x = scale as f64;
    let mut row = vec![1.0];
    if method == EstimateMethod::ScheduleFit {
        if let Some(d) = delta {
            row.extend([d, d * d]);
        }
    }
    row.extend([x.ln() / x, 1.0 / x]);
    row.truncate(columns);
    row
}

/// Number of fit columns: all basis functions when the data allow, fewer
/// otherwise. Constant `δ` columns are dropped as collinear with the intercept.
fn fit_columns(seq: &EntropySequence, method: EstimateMethod) -> (usize, bool) {
    let use_delta = method == EstimateMethod::ScheduleFit
        && seq.points.iter().all(|p| p.delta.is_some())
        && !seq.points.windows(2).all(|w| w[0].delta == w[1].delta);
    let full = if use_delta { 5 } else { 3 };
    (full.min(seq.len()), use_delta)
}

struct FittedSequence {
    fit: Fit,
    residuals: Vec<f64>,
}

fn fit_sequence(seq: &EntropySequence, method: EstimateMethod) -> Result<FittedSequence> {
    if seq.len() < 2 {
        return Err(Error::InsufficientPoints { method: method.as_str(), needed: 2, got: seq.len() });
    }
    let (columns, use_delta) = fit_columns(seq, method);
    let design: Vec<Vec<f64>> = seq
        .points
        .iter()
        .map(|p| {
            let delta = use_delta.then(|| p.delta.as_ref().and_then(ToPrimitive::to_f64)).flatten();
            design_row(method, p.scale, delta, columns)
        })
        .collect();
    let y = seq.densities();
    let fit = least_squares(&design, &y);
    let residuals = y.iter().zip(&fit.fitted).map(|(v, f)| v - f).collect();
    Ok(FittedSequence { fit, residuals })
}

/// Finite-size estimate of `lim s_X` by the chosen method.
pub fn estimate_limit(seq: &EntropySequence, method: EstimateMethod) -> Result<LimitEstimate> {
    let n = seq.len();
    let s = seq.densities();
    let scales = seq.scales();
    match method {
        EstimateMethod::LastPoint => {
            let last = *s.last().ok_or(Error::InsufficientPoints { method: method.as_str(), needed: 1, got: 0 })?;
            let error_bar = if n >= 2 { (last - s[n - 2]).abs() } else { 0.0 };
            Ok(LimitEstimate { value: last, error_bar, method, tail_window: vec![scales[n - 1]] })
        }
        EstimateMethod::Richardson => {
            if n < 2 {
                return Err(Error::InsufficientPoints { method: method.as_str(), needed: 2, got: n });
            }
            let rich = |i: usize| {
                let (x1, x2) = (scales[i] as f64, scales[i + 1] as f64);
                (x2 * s[i + 1] - x1 * s[i]) / (x2 - x1)
            };
            let value = rich(n - 2);
            let error_bar = if n >= 3 { (value - rich(n - 3)).abs() } else { (value - s[n - 1]).abs() };
            Ok(LimitEstimate { value, error_bar, method, tail_window: scales[n - 2..].to_vec() })
        }
        EstimateMethod::AffineFit | EstimateMethod::ScheduleFit => {
            let fitted = fit_sequence(seq, method)?;
            let value = fitted.fit.coef[0];
            let error_bar = if n > fitted.fit.coef.len() {
                fitted.fit.intercept_se
            } else {
                (value - s[n - 1]).abs()
            };
            Ok(LimitEstimate { value, error_bar, method, tail_window: scales })
        }
        EstimateMethod::TailMax | EstimateMethod::TailMin => {
            let (upper, lower) = tail_proxies(seq, 1.0, None)?;
            Ok(if method == EstimateMethod::TailMax { upper } else { lower })
        }
    }
}

fn tail_start(n: usize, tail_fraction: f64) -> Result<usize> {
    if !(tail_fraction > 0.0 && tail_fraction <= 1.0) {
        return Err(Error::InvalidArgument(format!("tail fraction must lie in (0, 1], got {tail_fraction}")));
    }
    let len = ((tail_fraction * n as f64).ceil() as usize).min(n);
    if len == 0 {
        return Err(Error::EmptyTail);
    }
    Ok(n - len)
}

/// `(limsup proxy, liminf proxy)` of one sequence over its tail window.
///
/// Without `extrapolate` the proxies are the raw tail max and min, each with
/// the tail spread as error bar. With a fit method, the sequence is fitted
/// over all points and the proxies are the intercept plus the largest and
/// smallest tail residuals; the error bar is the intercept error plus the
/// residual spread.
pub fn tail_proxies(
    seq: &EntropySequence,
    tail_fraction: f64,
    extrapolate: Option<EstimateMethod>,
) -> Result<(LimitEstimate, LimitEstimate)> {
    let n = seq.len();
    if n == 0 {
        return Err(Error::EmptyTail);
    }
    let start = tail_start(n, tail_fraction)?;
    let tail_window = seq.scales()[start..].to_vec();
    let (base, values, method_hi, method_lo, base_error) = match extrapolate {
        None | Some(EstimateMethod::TailMax) | Some(EstimateMethod::TailMin) => {
            (0.0, seq.densities()[start..].to_vec(), EstimateMethod::TailMax, EstimateMethod::TailMin, 0.0)
        }
        Some(method @ (EstimateMethod::AffineFit | EstimateMethod::ScheduleFit)) => {
            let fitted = fit_sequence(seq, method)?;
            let estimate = estimate_limit(seq, method)?;
            (fitted.fit.coef[0], fitted.residuals[start..].to_vec(), method, method, estimate.error_bar)
        }
        Some(method) => {
            return Err(Error::InvalidArgument(format!("`{method}` cannot extrapolate tail proxies")));
        }
    };
    let hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
    let spread = hi - lo;
    let make = |v: f64, method| LimitEstimate {
        value: base + v,
        error_bar: base_error + spread,
        method,
        tail_window: tail_window.clone(),
    };
    Ok((make(hi, method_hi), make(lo, method_lo)))
}

/// Per-schedule proxies behind an upper/lower entropy pair.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScheduleProxies {
    pub schedule_id: String,
    pub limsup: LimitEstimate,
    pub liminf: LimitEstimate,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct UpperLowerEntropy {
    pub upper: LimitEstimate,
    pub lower: LimitEstimate,
    pub per_schedule: Vec<ScheduleProxies>,
}

/// Upper and lower entropy from precomputed shell sequences: the maximum over
/// the family of limsup proxies and the maximum of liminf proxies.
pub fn upper_lower_from_sequences(
    sequences: &[EntropySequence],
    tail_fraction: f64,
    extrapolate: Option<EstimateMethod>,
) -> Result<UpperLowerEntropy> {
    if sequences.is_empty() {
        return Err(Error::EmptyFamily);
    }
    let mut per_schedule = Vec::with_capacity(sequences.len());
    for seq in sequences {
        let (limsup, liminf) = tail_proxies(seq, tail_fraction, extrapolate)?;
        per_schedule.push(ScheduleProxies { schedule_id: seq.quantity.schedule_id(), limsup, liminf });
    }
    let pick = |get: fn(&ScheduleProxies) -> &LimitEstimate| {
        per_schedule
            .iter()
            .map(get)
            .fold(None::<&LimitEstimate>, |best, e| match best {
                Some(b) if b.value >= e.value => Some(b),
                _ => Some(e),
            })
            .expect("nonempty family")
            .clone()
    };
    let upper = pick(|p| &p.limsup);
    let lower = pick(|p| &p.liminf);
    Ok(UpperLowerEntropy { upper, lower, per_schedule })
}

/// Upper and lower regularized entropy of `a` over a declared schedule family.
pub fn upper_lower_entropy(
    model: &ModelSystem,
    a: &Macrostate,
    family: &[DeltaSchedule],
    scales: &[u64],
    tail_fraction: f64,
    conv: ShellConvention,
    extrapolate: Option<EstimateMethod>,
) -> Result<UpperLowerEntropy> {
    if family.is_empty() {
        return Err(Error::EmptyFamily);
    }
    let sequences: Vec<EntropySequence> = family
        .par_iter()
        .map(|s| entropy_density_sequence(model, a, &Quantity::shell(s.clone()), scales, conv))
        .collect::<Result<_>>()?;
    upper_lower_from_sequences(&sequences, tail_fraction, extrapolate)
}

/// `f = s_X - reference`, a convergence diagnostic against an estimated limit.
pub fn residual_f(
    model: &ModelSystem,
    a: &Macrostate,
    schedule: &DeltaSchedule,
    scale: u64,
    conv: ShellConvention,
    reference: &LimitEstimate,
) -> Result<f64> {
    let (count, _) = count_at(model, a, &Quantity::shell(schedule.clone()), scale, conv)?;
    Ok(boltzmann_entropy(&count.value)? / scale as f64 - reference.value)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::regularization::sequence::EntropyPoint;
    use num_bigint::BigUint;

    fn synthetic(points: &[(u64, f64)]) -> EntropySequence {
        EntropySequence {
            macrostate: Macrostate::parse("0.5").unwrap(),
            quantity: Quantity::Downward,
            convention: ShellConvention::default(),
            points: points
                .iter()
                .map(|&(scale, density)| EntropyPoint {
                    scale,
                    dimension: BigUint::from(1u32),
                    density,
                    delta: None,
                    boundary_hit: false,
                })
                .collect(),
            empty_scales: vec![],
        }
    }

    #[test]
    fn constant_sequences_are_exact() {
        let seq = synthetic(&[(8, 0.3), (16, 0.3), (32, 0.3), (64, 0.3), (128, 0.3)]);
        for method in [EstimateMethod::LastPoint, EstimateMethod::Richardson, EstimateMethod::AffineFit] {
            let e = estimate_limit(&seq, method).unwrap();
            assert!((e.value - 0.3).abs() < 1e-12, "{method}: {}", e.value);
            assert!(e.error_bar < 1e-12, "{method}: {}", e.error_bar);
        }
    }

    #[test]
    fn richardson_on_doubling() {
        let seq = synthetic(&[(100, 0.5), (200, 0.6)]);
        let e = estimate_limit(&seq, EstimateMethod::Richardson).unwrap();
        assert!((e.value - (2.0 * 0.6 - 0.5)).abs() < 1e-15);
        assert_eq!(e.tail_window, vec![100, 200]);
    }

    #[test]
    fn affine_fit_recovers_intercept() {
        let f = |x: f64| 0.7 - 0.5 * x.ln() / x + 0.3 / x;
        let pts: Vec<(u64, f64)> = [16u64, 32, 64, 128, 256].iter().map(|&x| (x, f(x as f64))).collect();
        let e = estimate_limit(&synthetic(&pts), EstimateMethod::AffineFit).unwrap();
        assert!((e.value - 0.7).abs() < 1e-10);
        assert!(e.error_bar < 1e-10);
    }

    #[test]
    fn insufficient_points() {
        let one = synthetic(&[(8, 0.3)]);
        assert!(estimate_limit(&one, EstimateMethod::LastPoint).is_ok());
        assert_eq!(
            estimate_limit(&one, EstimateMethod::AffineFit).unwrap_err(),
            Error::InsufficientPoints { method: "affine-fit", needed: 2, got: 1 }
        );
        assert!(estimate_limit(&one, EstimateMethod::Richardson).is_err());
    }

    #[test]
    fn tail_proxies_of_monotone_sequence() {
        let seq = synthetic(&[(8, 0.1), (16, 0.2), (32, 0.3), (64, 0.4)]);
        let (hi, lo) = tail_proxies(&seq, 0.5, None).unwrap();
        assert_eq!((hi.value, lo.value), (0.4, 0.3));
        assert_eq!(hi.tail_window, vec![32, 64]);
        let (hi, lo) = tail_proxies(&seq, 0.25, None).unwrap();
        assert_eq!(hi.value, lo.value);
        assert!(tail_proxies(&seq, 0.0, None).is_err());
    }
}
