use num_bigint::BigUint;
use num_traits::{One, Signed, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::runs::flat_convertible_at_scale;
use crate::error::{Error, Result};
use crate::microcanonical::{downward_box, shell_box, Macrostate, ShellConvention};
use crate::regularization::{check_scales, DeltaSchedule, ScheduleStep};
use crate::scalar::{rational_from_u64, ExtReal, Rational};
use crate::serde_util;
use crate::spectra::{DimensionCounter, IntBox, ModelSystem, ScaleCounter};

/// The set `A_X` of `η` with `D↓_{a(1-δ)} ≤ D↓_{a′(1+η)} ≤ D↓_{a(1+δ)}`,
/// stored as the half-open interval `[lo, hi)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EtaWindow {
    pub scale: u64,
    pub lo: ExtReal,
    pub hi: ExtReal,
    pub empty: bool,
    /// For an empty window, the jump point `η_X` where `D↓_{a′(1+η)}` first
    /// reaches the lower bound.
    #[serde(with = "serde_util::opt_rational")]
    pub eta_boundary: Option<Rational>,
    /// `hi` was cut at the last jump point because the upper bound is never
    /// exceeded.
    pub hi_clamped: bool,
    #[serde(with = "serde_util::count")]
    pub lower_bound: BigUint,
    #[serde(with = "serde_util::count")]
    pub upper_bound: BigUint,
}

impl EtaWindow {
    pub fn lo_rational(&self) -> Option<&Rational> {
        self.lo.finite()
    }

    pub fn hi_rational(&self) -> Option<&Rational> {
        self.hi.finite()
    }
}

fn third() -> Rational {
    Rational::new(1.into(), 3.into())
}

/// Jump points `η = k·u_l/(X·a′_l) - 1` of `D↓_{a′(1+η)}` over every
/// achievable integer value `k`, sorted and deduplicated.
fn jump_points<C: DimensionCounter + ?Sized>(counter: &C, a_prime: &Macrostate) -> Vec<Rational> {
    let x = rational_from_u64(counter.scale());
    let mut out = Vec::new();
    for (l, (density, unit)) in a_prime.densities().iter().zip(counter.value_unit()).enumerate() {
        if !density.is_positive() {
            continue;
        }
        let step = unit / (&x * density);
        let (lo, hi) = counter.value_range(l);
        out.extend((lo..=hi).map(|k| Rational::from_integer(k.into()) * &step - Rational::one()));
    }
    out.sort();
    out.dedup();
    out
}

/// First indices `i` with `f(cands[i]) ≥ lower` and with `f(cands[i]) > upper`,
/// for the nondecreasing `f(η) = D↓_{a′(1+η)}`. Both searches share batched
/// counter passes of up to 32 probes each.
fn locate_crossings<C: DimensionCounter + ?Sized>(
    counter: &C,
    a_prime: &Macrostate,
    cands: &[Rational],
    lower: &BigUint,
    upper: &BigUint,
) -> Result<(usize, usize)> {
    const PROBES: usize = 31;
    let n = cands.len();
    // Invariant per search: answer lies in [lo, hi], with hi = n meaning "none".
    let mut ranges = [(0usize, n), (0usize, n)];
    while ranges.iter().any(|(lo, hi)| lo < hi) {
        let mut probes: Vec<(usize, usize)> = Vec::new();
        for (which, &(lo, hi)) in ranges.iter().enumerate() {
            if lo >= hi {
                continue;
            }
            let width = hi - lo;
            let count = width.min(PROBES);
            for j in 0..count {
                probes.push((which, lo + (width * j) / count));
            }
        }
        let boxes: Vec<IntBox> = probes
            .iter()
            .map(|&(_, i)| downward_box(counter, &a_prime.scaled(&(Rational::one() + &cands[i]))).map(|b| b.0))
            .collect::<Result<_>>()?;
        let values = counter.count_boxes(&boxes);
        for (which, range) in ranges.iter_mut().enumerate() {
            let (lo, hi) = *range;
            if lo >= hi {
                continue;
            }
            let mut new_lo = lo;
            let mut new_hi = hi;
            for (&(w, i), v) in probes.iter().zip(&values) {
                if w != which {
                    continue;
                }
                let hit = if which == 0 { v >= lower } else { v > upper };
                if hit {
                    new_hi = new_hi.min(i);
                } else {
                    new_lo = new_lo.max(i + 1);
                }
            }
            *range = (new_lo, new_hi);
        }
    }
    Ok((ranges[0].0, ranges[1].0))
}

/// Exact `A_X` for `a`, `a′` and multiplicative half-width `δ` at the
/// counter's scale. Requires `a′ ≥ 0` with some positive component so that
/// `D↓_{a′(1+η)}` is nondecreasing in `η`.
pub fn eta_window<C: DimensionCounter + ?Sized>(
    counter: &C,
    a: &Macrostate,
    a_prime: &Macrostate,
    delta: &Rational,
) -> Result<EtaWindow> {
    if !delta.is_positive() {
        return Err(Error::NonPositiveDelta);
    }
    a.check_arity(counter.num_observables())?;
    a_prime.check_arity(counter.num_observables())?;
    if a_prime.densities().iter().any(|d| d.is_negative()) || a_prime.densities().iter().all(|d| d.is_zero()) {
        return Err(Error::InvalidMacrostate(
            "the η-window needs a′ ≥ 0 with at least one positive component".into(),
        ));
    }
    let scale = counter.scale();
    let one = Rational::one();
    let bounds = counter.count_boxes(&[
        downward_box(counter, &a.scaled(&(&one - delta)))?.0,
        downward_box(counter, &a.scaled(&(&one + delta)))?.0,
    ]);
    let (lower_bound, upper_bound) = (bounds[0].clone(), bounds[1].clone());
    if lower_bound.is_zero() {
        return Err(Error::DegenerateLowerBound { scale });
    }
    let cands = jump_points(counter, a_prime);
    let (first_ge, first_gt) = locate_crossings(counter, a_prime, &cands, &lower_bound, &upper_bound)?;
    let empty_window = |eta_boundary: Rational| EtaWindow {
        scale,
        lo: ExtReal::PosInf,
        hi: ExtReal::NegInf,
        empty: true,
        eta_boundary: Some(eta_boundary),
        hi_clamped: false,
        lower_bound: lower_bound.clone(),
        upper_bound: upper_bound.clone(),
    };
    if first_ge == cands.len() {
        // Never reaches the lower bound inside the scan range.
        return Ok(empty_window(cands.last().expect("some positive component").clone()));
    }
    if first_gt <= first_ge {
        return Ok(empty_window(cands[first_ge].clone()));
    }
    let lo = cands[first_ge].clone();
    let (hi, hi_clamped) = match cands.get(first_gt) {
        Some(h) => (h.clone(), false),
        None => (cands.last().expect("nonempty").clone(), true),
    };
    Ok(EtaWindow {
        scale,
        lo: ExtReal::Finite(lo),
        hi: ExtReal::Finite(hi),
        empty: false,
        eta_boundary: None,
        hi_clamped,
        lower_bound,
        upper_bound,
    })
}

/// `(η⁺, η⁻)`: `(lo/3 + 2hi/3, 2lo/3 + hi/3)` on a nonempty window and
/// `η_X ± 1/X` on an empty one.
pub fn eta_plus_minus(w: &EtaWindow) -> (Rational, Rational) {
    match (&w.lo, &w.hi, &w.eta_boundary) {
        (ExtReal::Finite(lo), ExtReal::Finite(hi), _) if !w.empty => {
            let t = third();
            let plus = &t * lo + &t * hi * Rational::from_integer(2.into());
            let minus = &t * lo * Rational::from_integer(2.into()) + &t * hi;
            (plus, minus)
        }
        (_, _, Some(eta)) => {
            let inv = Rational::new(1.into(), w.scale.into());
            (eta + &inv, eta - &inv)
        }
        _ => unreachable!("windows are built either nonempty with finite ends or empty with a boundary"),
    }
}

/// One scale of a `δ′` construction.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DeltaPrimeScale {
    pub scale: u64,
    #[serde(with = "serde_util::rational")]
    pub delta: Rational,
    pub window: EtaWindow,
    #[serde(with = "serde_util::rational")]
    pub eta_plus: Rational,
    #[serde(with = "serde_util::rational")]
    pub eta_minus: Rational,
    #[serde(with = "serde_util::rational")]
    pub delta_prime: Rational,
    /// `D↓_{a(1+δ)}`.
    #[serde(with = "serde_util::count")]
    pub down_a_plus: BigUint,
    /// `D↓_{a′(1+δ′)}`.
    #[serde(with = "serde_util::count")]
    pub down_a_prime_plus: BigUint,
    /// `D↓_{a′(1-δ′)}`.
    #[serde(with = "serde_util::count")]
    pub down_a_prime_minus: BigUint,
    /// `D↓_{a(1-δ)}`.
    #[serde(with = "serde_util::count")]
    pub down_a_minus: BigUint,
    /// `D↓_{a(1+δ)} < D↓_{a′(1+δ′)}`.
    pub upper_ok: bool,
    /// `D↓_{a′(1-δ′)} < D↓_{a(1-δ)}`.
    pub lower_ok: bool,
    /// Shell dimensions `D_{a,δ}` and `D_{a′,δ′}` counted as boxes.
    #[serde(with = "serde_util::count")]
    pub shell_a: BigUint,
    #[serde(with = "serde_util::count")]
    pub shell_a_prime: BigUint,
    /// `D_{a,δ} ≤ D_{a′,δ′}`.
    pub flat_convertible: bool,
}

impl DeltaPrimeScale {
    pub fn verified(&self) -> bool {
        self.upper_ok && self.lower_ok
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DeltaPrimeConstruction {
    /// Table schedule through the per-scale `δ′_X`.
    pub schedule: DeltaSchedule,
    pub per_scale: Vec<DeltaPrimeScale>,
}

impl DeltaPrimeConstruction {
    pub fn all_verified(&self) -> bool {
        self.per_scale.iter().all(DeltaPrimeScale::verified)
    }

    /// Verified at every scale `≥ x0`, with at least one such scale.
    pub fn verified_from(&self, x0: u64) -> bool {
        let tail: Vec<_> = self.per_scale.iter().filter(|s| s.scale >= x0).collect();
        !tail.is_empty() && tail.iter().all(|s| s.verified())
    }
}

/// `δ′` at one scale, with the two sandwich inequalities re-counted.
pub fn delta_prime_at<C: DimensionCounter + ?Sized>(
    counter: &C,
    a: &Macrostate,
    a_prime: &Macrostate,
    delta: &Rational,
) -> Result<DeltaPrimeScale> {
    let window = eta_window(counter, a, a_prime, delta)?;
    let (eta_plus, eta_minus) = eta_plus_minus(&window);
    let four = Rational::from_integer(4.into());
    let delta_prime = four * std::cmp::max(eta_plus.abs(), eta_minus.abs());
    let one = Rational::one();
    let conv = ShellConvention::Multiplicative;
    let mut boxes = vec![
        downward_box(counter, &a.scaled(&(&one + delta)))?.0,
        downward_box(counter, &a_prime.scaled(&(&one + &delta_prime)))?.0,
        downward_box(counter, &a_prime.scaled(&(&one - &delta_prime)))?.0,
        downward_box(counter, &a.scaled(&(&one - delta)))?.0,
        shell_box(counter, a, delta, conv)?.0,
    ];
    if delta_prime.is_positive() {
        boxes.push(shell_box(counter, a_prime, &delta_prime, conv)?.0);
    }
    let mut counts = counter.count_boxes(&boxes).into_iter();
    let mut next = || counts.next().unwrap_or_default();
    let (down_a_plus, down_a_prime_plus, down_a_prime_minus, down_a_minus, shell_a, shell_a_prime) =
        (next(), next(), next(), next(), next(), next());
    let flat_convertible = !shell_a.is_zero()
        && !shell_a_prime.is_zero()
        && flat_convertible_at_scale(&shell_a, &shell_a_prime)?;
    Ok(DeltaPrimeScale {
        scale: counter.scale(),
        delta: delta.clone(),
        upper_ok: down_a_plus < down_a_prime_plus,
        lower_ok: down_a_prime_minus < down_a_minus,
        window,
        eta_plus,
        eta_minus,
        delta_prime,
        down_a_plus,
        down_a_prime_plus,
        down_a_prime_minus,
        down_a_minus,
        shell_a,
        shell_a_prime,
        flat_convertible,
    })
}

/// Builds `δ′_X = 4·max(|η⁺_X|, |η⁻_X|)` over a scale grid. Scales where a
/// sandwich inequality fails are reported in `per_scale`, not as errors.
pub fn construct_delta_prime(
    model: &ModelSystem,
    a: &Macrostate,
    a_prime: &Macrostate,
    schedule: &DeltaSchedule,
    scales: &[u64],
) -> Result<DeltaPrimeConstruction> {
    check_scales(scales)?;
    schedule.check()?;
    let per_scale: Vec<DeltaPrimeScale> = scales
        .par_iter()
        .map(|&x| delta_prime_at(&ScaleCounter::new(model, x), a, a_prime, &schedule.delta_at(x)))
        .collect::<Result<_>>()?;
    if let Some(bad) = per_scale.iter().find(|s| !s.delta_prime.is_positive()) {
        return Err(Error::InvariantViolation(format!("δ′ vanished at X = {}", bad.scale)));
    }
    let schedule = DeltaSchedule::table(
        per_scale.iter().map(|s| ScheduleStep { from: s.scale, delta: s.delta_prime.clone() }).collect(),
    )?;
    Ok(DeltaPrimeConstruction { schedule, per_scale })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::parse_rational;
    use crate::spectra::{build_model, joint_spectrum, ModelSpec};

    fn q(s: &str) -> Rational {
        parse_rational(s).unwrap()
    }

    fn paramagnet() -> ModelSystem {
        build_model(&ModelSpec::family("paramagnet")).unwrap()
    }

    #[test]
    fn hand_counted_window() {
        let model = paramagnet();
        let a = Macrostate::parse("0.3").unwrap();
        let counter = ScaleCounter::new(&model, 10);
        let w = eta_window(&counter, &a, &a, &q("0.1")).unwrap();
        assert_eq!(w.lower_bound, BigUint::from(56u32));
        assert_eq!(w.upper_bound, BigUint::from(176u32));
        assert_eq!(w.lo, ExtReal::Finite(q("-1/3")));
        assert_eq!(w.hi, ExtReal::Finite(q("1/3")));
        assert!(!w.empty && !w.hi_clamped);
        let (plus, minus) = eta_plus_minus(&w);
        assert_eq!((plus, minus), (q("1/9"), q("-1/9")));
        let table = joint_spectrum(&model, 10).unwrap();
        assert_eq!(eta_window(&table, &a, &a, &q("0.1")).unwrap(), w);
    }

    #[test]
    fn empty_window_formula() {
        let w = EtaWindow {
            scale: 10,
            lo: ExtReal::PosInf,
            hi: ExtReal::NegInf,
            empty: true,
            eta_boundary: Some(q("0.2")),
            hi_clamped: false,
            lower_bound: BigUint::one(),
            upper_bound: BigUint::one(),
        };
        assert_eq!(eta_plus_minus(&w), (q("0.3"), q("0.1")));
    }

    #[test]
    fn empty_windows_on_the_lattice_gas() {
        // Two thresholds move together, so D↓_{a′(1+η)} can jump straight over
        // both bounds. Scan a grid of pairs and check every empty window found.
        let model = build_model(&ModelSpec::family("lattice-gas")).unwrap();
        let table = joint_spectrum(&model, 6).unwrap();
        let f = |a: &Macrostate, t: &Rational| {
            crate::microcanonical::downward_dimension(&table, &a.scaled(&(Rational::one() + t)), 6).unwrap().value
        };
        let mut empties = 0;
        for (a0, a1, b0, b1) in [(5, 3, 3, 6), (7, 2, 2, 7), (4, 4, 9, 1), (6, 5, 1, 8), (3, 2, 8, 3)] {
            let a = Macrostate::new(vec![q(&format!("0.{a0}")), q(&format!("0.{a1}"))]).unwrap();
            let b = Macrostate::new(vec![q(&format!("0.{b0}")), q(&format!("0.{b1}"))]).unwrap();
            let w = eta_window(&table, &a, &b, &q("0.01")).unwrap();
            if w.empty {
                empties += 1;
                let eta = w.eta_boundary.clone().unwrap();
                assert!(f(&b, &eta) > w.upper_bound);
                assert!(f(&b, &(eta - q("1/1000000"))) < w.lower_bound);
            } else {
                let (lo, hi) = (w.lo_rational().unwrap().clone(), w.hi_rational().unwrap().clone());
                assert!(f(&b, &lo) >= w.lower_bound && f(&b, &lo) <= w.upper_bound);
                assert!(f(&b, &(lo - q("1/1000000"))) < w.lower_bound);
                if !w.hi_clamped {
                    assert!(f(&b, &hi) > w.upper_bound);
                }
            }
        }
        assert!(empties > 0, "no empty window among the probes");
    }

    #[test]
    fn saturated_window() {
        let model = paramagnet();
        let counter = ScaleCounter::new(&model, 10);
        let a = Macrostate::parse("0.5").unwrap();
        let w = eta_window(&counter, &a, &a, &q("1")).unwrap();
        assert!(w.hi_clamped);
        assert_eq!(w.lo, ExtReal::Finite(q("-1")));
    }

    #[test]
    fn delta_prime_at_ten() {
        let model = paramagnet();
        let a = Macrostate::parse("0.3").unwrap();
        let c = construct_delta_prime(&model, &a, &a, &DeltaSchedule::constant(q("0.1")).unwrap(), &[10]).unwrap();
        assert_eq!(c.per_scale[0].delta_prime, q("4/9"));
        assert_eq!(c.schedule.delta_at(10), q("4/9"));
    }

    #[test]
    fn degenerate_lower_bound() {
        let model = paramagnet();
        let counter = ScaleCounter::new(&model, 10);
        let a = Macrostate::parse("-0.5").unwrap();
        let err = eta_window(&counter, &a, &Macrostate::parse("0.3").unwrap(), &q("0.1")).unwrap_err();
        assert_eq!(err, Error::DegenerateLowerBound { scale: 10 });
    }
}
