//! Downward-closed dimensions, microcanonical shells, Boltzmann entropies
//! and flat microcanonical states.

use std::fmt;
use std::str::FromStr;

use num_bigint::{BigInt, BigUint};
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::{ln_biguint, parse_rational, rational_from_f64, rational_from_u64, Rational};
use crate::serde_util;
use crate::spectra::{DimensionCounter, IntBox};

/// Equilibrium macrostate `a = (a⁰, …, a^L)`, energy density first.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Macrostate {
    #[serde(with = "serde_util::rational_vec")]
    densities: Vec<Rational>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    label: Option<String>,
}

impl Macrostate {
    pub fn new(densities: Vec<Rational>) -> Result<Self> {
        if densities.is_empty() {
            return Err(Error::InvalidMacrostate("at least one density is required".into()));
        }
        Ok(Macrostate { densities, label: None })
    }

    /// Exact binary value of each `f64`.
    pub fn from_f64(densities: &[f64]) -> Result<Self> {
        if let Some(bad) = densities.iter().find(|d| !d.is_finite()) {
            return Err(Error::InvalidMacrostate(format!("non-finite density {bad}")));
        }
        Macrostate::new(densities.iter().map(|&d| rational_from_f64(d)).collect::<Result<_>>()?)
    }

    /// Parses a comma-separated list of decimals or fractions, e.g. `"0.4, 0.3"`.
    pub fn parse(text: &str) -> Result<Self> {
        Macrostate::new(
            text.split(',')
                .map(|t| parse_rational(t).map_err(|_| Error::InvalidMacrostate(text.into())))
                .collect::<Result<_>>()?,
        )
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = Some(label.into());
        self
    }

    pub fn densities(&self) -> &[Rational] {
        &self.densities
    }

    pub fn label(&self) -> Option<&str> {
        self.label.as_deref()
    }

    pub fn len(&self) -> usize {
        self.densities.len()
    }

    pub fn is_empty(&self) -> bool {
        self.densities.is_empty()
    }

    pub fn to_f64(&self) -> Vec<f64> {
        self.densities.iter().map(|d| d.to_f64().unwrap_or(f64::NAN)).collect()
    }

    /// Every component multiplied by `factor`; the label is dropped.
    pub fn scaled(&self, factor: &Rational) -> Macrostate {
        Macrostate { densities: self.densities.iter().map(|d| d * factor).collect(), label: None }
    }

    /// Component `l` shifted by `amount`; the label is dropped.
    pub fn bumped(&self, l: usize, amount: &Rational) -> Macrostate {
        let mut densities = self.densities.clone();
        densities[l] += amount;
        Macrostate { densities, label: None }
    }

    pub fn check_arity(&self, expected: usize) -> Result<()> {
        if self.densities.len() != expected {
            return Err(Error::MacrostateArity { expected, found: self.densities.len() });
        }
        Ok(())
    }
}

impl fmt::Display for Macrostate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if let Some(label) = &self.label {
            return f.write_str(label);
        }
        let parts: Vec<String> = self.densities.iter().map(format_density).collect();
        write!(f, "({})", parts.join(", "))
    }
}

fn format_density(d: &Rational) -> String {
    let f = d.to_f64().unwrap_or(f64::NAN);
    if rational_from_f64(f).is_ok_and(|r| &r == d) || d.denom() <= &BigInt::from(1_000_000u32) {
        let short = format!("{f}");
        if parse_rational(&short).is_ok_and(|r| &r == d) {
            return short;
        }
    }
    d.to_string()
}

/// How shell windows scale with `δ`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ShellConvention {
    /// `[X·a(1-δ), X·a(1+δ))`.
    #[default]
    #[serde(rename = "mult", alias = "multiplicative")]
    Multiplicative,
    /// `[X(a-δ), X(a+δ))`.
    #[serde(rename = "add", alias = "additive")]
    Additive,
}

impl ShellConvention {
    pub fn as_str(self) -> &'static str {
        match self {
            ShellConvention::Multiplicative => "mult",
            ShellConvention::Additive => "add",
        }
    }
}

impl fmt::Display for ShellConvention {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ShellConvention {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "mult" | "multiplicative" => Ok(ShellConvention::Multiplicative),
            "add" | "additive" => Ok(ShellConvention::Additive),
            other => Err(Error::InvalidArgument(format!("unknown convention `{other}`"))),
        }
    }
}

/// An exact count plus whether some threshold landed exactly on an
/// achievable eigenvalue.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DimensionCount {
    #[serde(with = "serde_util::count")]
    pub value: BigUint,
    pub boundary_hit: bool,
}

/// Shell the flat state lives on.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ShellDescriptor {
    pub macrostate: Macrostate,
    #[serde(with = "serde_util::rational")]
    pub delta: Rational,
    pub scale: u64,
    pub convention: ShellConvention,
}

/// Maximally mixed state on a shell: `D` eigenvalues `1/D`, the rest zero.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FlatState {
    #[serde(with = "serde_util::count")]
    dimension: BigUint,
    support: ShellDescriptor,
    #[serde(with = "serde_util::count")]
    ambient_dimension: BigUint,
}

impl FlatState {
    pub fn new(dimension: BigUint, support: ShellDescriptor, ambient_dimension: BigUint) -> Result<Self> {
        if dimension.is_zero() {
            return Err(Error::EmptyShell);
        }
        if dimension > ambient_dimension {
            return Err(Error::InvariantViolation(format!(
                "flat state dimension {dimension} exceeds ambient dimension {ambient_dimension}"
            )));
        }
        Ok(FlatState { dimension, support, ambient_dimension })
    }

    pub fn dimension(&self) -> &BigUint {
        &self.dimension
    }

    pub fn support(&self) -> &ShellDescriptor {
        &self.support
    }

    pub fn ambient_dimension(&self) -> &BigUint {
        &self.ambient_dimension
    }

    /// The common nonzero eigenvalue `1/D`.
    pub fn eigenvalue(&self) -> Rational {
        Rational::new(BigInt::one(), BigInt::from(self.dimension.clone()))
    }

    /// `(value, multiplicity)` runs in decreasing order, zeros included.
    pub fn spectrum_runs(&self) -> Vec<(Rational, BigUint)> {
        let mut runs = vec![(self.eigenvalue(), self.dimension.clone())];
        let zeros = &self.ambient_dimension - &self.dimension;
        if !zeros.is_zero() {
            runs.push((Rational::zero(), zeros));
        }
        runs
    }
}

fn check_scale<C: DimensionCounter + ?Sized>(counter: &C, scale: u64) -> Result<()> {
    if counter.scale() != scale {
        return Err(Error::ScaleMismatch { spectrum: counter.scale(), requested: scale });
    }
    Ok(())
}

fn to_i64_clamped(value: &BigInt, range: (i64, i64)) -> i64 {
    let (lo, hi) = (range.0.saturating_sub(1), range.1.saturating_add(1));
    match value.to_i64() {
        Some(v) => v.clamp(lo, hi),
        None if value.is_negative() => lo,
        None => hi,
    }
}

fn hits_eigenvalue(value: &Rational, range: (i64, i64)) -> bool {
    value.is_integer()
        && value.to_integer() >= BigInt::from(range.0)
        && value.to_integer() <= BigInt::from(range.1)
}

/// Box `λ^[l] ≤ X·a^[l]` in integer eigenvalue units.
pub fn downward_box<C: DimensionCounter + ?Sized>(counter: &C, a: &Macrostate) -> Result<(IntBox, bool)> {
    a.check_arity(counter.num_observables())?;
    let x = rational_from_u64(counter.scale());
    let mut hit = false;
    let mut thresholds = Vec::with_capacity(a.len());
    for (l, (density, unit)) in a.densities().iter().zip(counter.value_unit()).enumerate() {
        let t = &x * density / unit;
        let range = counter.value_range(l);
        hit |= hits_eigenvalue(&t, range);
        thresholds.push(to_i64_clamped(&t.floor().to_integer(), range));
    }
    Ok((IntBox::downward(&thresholds), hit))
}

/// Box for the half-open shell window around `X·a`.
pub fn shell_box<C: DimensionCounter + ?Sized>(
    counter: &C,
    a: &Macrostate,
    delta: &Rational,
    conv: ShellConvention,
) -> Result<(IntBox, bool)> {
    if !delta.is_positive() {
        return Err(Error::NonPositiveDelta);
    }
    a.check_arity(counter.num_observables())?;
    let x = rational_from_u64(counter.scale());
    let one = Rational::one();
    let mut hit = false;
    let (mut lo, mut hi) = (Vec::with_capacity(a.len()), Vec::with_capacity(a.len()));
    for (l, (density, unit)) in a.densities().iter().zip(counter.value_unit()).enumerate() {
        let (p, q) = match conv {
            ShellConvention::Multiplicative => {
                (&x * density * (&one - delta), &x * density * (&one + delta))
            }
            ShellConvention::Additive => (&x * (density - delta), &x * (density + delta)),
        };
        let (p, q) = if p <= q { (p / unit, q / unit) } else { (q / unit, p / unit) };
        let range = counter.value_range(l);
        hit |= hits_eigenvalue(&p, range) || hits_eigenvalue(&q, range);
        lo.push(to_i64_clamped(&p.ceil().to_integer(), range));
        hi.push(to_i64_clamped(&(q.ceil().to_integer() - BigInt::one()), range));
    }
    Ok((IntBox::window(&lo, &hi), hit))
}

/// `D↓⁽ˣ⁾_a`: basis states with every `λ^[l] ≤ X·a^[l]`.
pub fn downward_dimension<C: DimensionCounter + ?Sized>(
    counter: &C,
    a: &Macrostate,
    scale: u64,
) -> Result<DimensionCount> {
    check_scale(counter, scale)?;
    let (b, boundary_hit) = downward_box(counter, a)?;
    Ok(DimensionCount { value: counter.count_box(&b), boundary_hit })
}

/// `D⁽ˣ⁾_{a,δ}`: basis states inside the shell window for every observable.
pub fn shell_dimension<C: DimensionCounter + ?Sized>(
    counter: &C,
    a: &Macrostate,
    delta: &Rational,
    scale: u64,
    conv: ShellConvention,
) -> Result<DimensionCount> {
    check_scale(counter, scale)?;
    let (b, boundary_hit) = shell_box(counter, a, delta, conv)?;
    Ok(DimensionCount { value: counter.count_box(&b), boundary_hit })
}

/// `log D` in nats.
pub fn boltzmann_entropy(dimension: &BigUint) -> Result<f64> {
    if dimension.is_zero() {
        return Err(Error::EmptyShell);
    }
    Ok(ln_biguint(dimension))
}

pub fn microcanonical_state<C: DimensionCounter + ?Sized>(
    counter: &C,
    a: &Macrostate,
    delta: &Rational,
    scale: u64,
    conv: ShellConvention,
) -> Result<FlatState> {
    let count = shell_dimension(counter, a, delta, scale, conv)?;
    FlatState::new(
        count.value,
        ShellDescriptor { macrostate: a.clone(), delta: delta.clone(), scale, convention: conv },
        counter.total_dimension(),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectra::{build_model, joint_spectrum, ModelSpec, ScaleCounter};

    fn q(s: &str) -> Rational {
        parse_rational(s).unwrap()
    }

    fn paramagnet_spectrum(x: u64) -> crate::spectra::JointSpectrum {
        joint_spectrum(&build_model(&ModelSpec::family("paramagnet")).unwrap(), x).unwrap()
    }

    #[test]
    fn downward_examples() {
        let spectrum = paramagnet_spectrum(4);
        let half = Macrostate::parse("0.5").unwrap();
        let d = downward_dimension(&spectrum, &half, 4).unwrap();
        assert_eq!(d.value, BigUint::from(11u32));
        assert!(d.boundary_hit, "threshold 2 is an eigenvalue");
        let full = downward_dimension(&spectrum, &Macrostate::parse("1.0").unwrap(), 4).unwrap();
        assert_eq!(full.value, BigUint::from(16u32));
        let none = downward_dimension(&spectrum, &Macrostate::parse("-0.1").unwrap(), 4).unwrap();
        assert_eq!(none.value, BigUint::zero());
        assert!(matches!(
            downward_dimension(&spectrum, &half, 5),
            Err(Error::ScaleMismatch { spectrum: 4, requested: 5 })
        ));
    }

    #[test]
    fn shell_examples() {
        let spectrum = paramagnet_spectrum(4);
        let half = Macrostate::parse("0.5").unwrap();
        let mult = ShellConvention::Multiplicative;
        let d = shell_dimension(&spectrum, &half, &q("0.25"), 4, mult).unwrap();
        assert_eq!(d.value, BigUint::from(6u32));
        assert!(!d.boundary_hit);
        let wide = shell_dimension(&spectrum, &half, &q("10"), 4, ShellConvention::Additive).unwrap();
        assert_eq!(wide.value, BigUint::from(16u32));
        let empty = shell_dimension(&spectrum, &Macrostate::parse("0.6").unwrap(), &q("0.01"), 4, mult)
            .unwrap();
        assert_eq!(empty.value, BigUint::zero());
        assert_eq!(
            microcanonical_state(&spectrum, &Macrostate::parse("0.6").unwrap(), &q("0.01"), 4, mult)
                .unwrap_err(),
            Error::EmptyShell
        );
        assert_eq!(shell_dimension(&spectrum, &half, &q("0"), 4, mult).unwrap_err(), Error::NonPositiveDelta);
    }

    #[test]
    fn additive_window_is_literal() {
        // [4(0.5 - 0.25), 4(0.5 + 0.25)) = [1, 3) -> k in {1, 2}
        let spectrum = paramagnet_spectrum(4);
        let d = shell_dimension(
            &spectrum,
            &Macrostate::parse("0.5").unwrap(),
            &q("0.25"),
            4,
            ShellConvention::Additive,
        )
        .unwrap();
        assert_eq!(d.value, BigUint::from(10u32));
        assert!(d.boundary_hit);
    }

    #[test]
    fn entropy_examples() {
        assert_eq!(boltzmann_entropy(&BigUint::one()).unwrap(), 0.0);
        assert!((boltzmann_entropy(&BigUint::from(11u32)).unwrap() - 2.397_895_272_798_371).abs() < 1e-12);
        assert_eq!(boltzmann_entropy(&BigUint::zero()).unwrap_err(), Error::EmptyShell);
    }

    #[test]
    fn flat_states() {
        let spectrum = paramagnet_spectrum(4);
        let half = Macrostate::parse("0.5").unwrap();
        let mult = ShellConvention::Multiplicative;
        let state = microcanonical_state(&spectrum, &half, &q("0.25"), 4, mult).unwrap();
        assert_eq!(*state.dimension(), BigUint::from(6u32));
        assert_eq!(*state.ambient_dimension(), BigUint::from(16u32));
        let total: Rational = state
            .spectrum_runs()
            .iter()
            .map(|(v, m)| v * Rational::from_integer(BigInt::from(m.clone())))
            .sum();
        assert_eq!(total, Rational::one());
        let full = microcanonical_state(&spectrum, &half, &q("5"), 4, ShellConvention::Additive).unwrap();
        assert_eq!(full.dimension(), full.ambient_dimension());
        assert_eq!(full.spectrum_runs().len(), 1);
    }

    #[test]
    fn streaming_and_table_agree() {
        let model = build_model(&ModelSpec::family("lattice-gas")).unwrap();
        let spectrum = joint_spectrum(&model, 12).unwrap();
        let counter = ScaleCounter::new(&model, 12);
        for text in ["0.5,0.3", "1.2,0.7", "0.25,0.25", "2,1"] {
            let a = Macrostate::parse(text).unwrap();
            assert_eq!(
                downward_dimension(&spectrum, &a, 12).unwrap(),
                downward_dimension(&counter, &a, 12).unwrap()
            );
            for conv in [ShellConvention::Multiplicative, ShellConvention::Additive] {
                assert_eq!(
                    shell_dimension(&spectrum, &a, &q("0.3"), 12, conv).unwrap(),
                    shell_dimension(&counter, &a, &q("0.3"), 12, conv).unwrap()
                );
            }
        }
    }

    #[test]
    fn arity_is_checked() {
        let spectrum = paramagnet_spectrum(4);
        let two = Macrostate::parse("0.1,0.2").unwrap();
        assert_eq!(
            downward_dimension(&spectrum, &two, 4).unwrap_err(),
            Error::MacrostateArity { expected: 1, found: 2 }
        );
    }

    #[test]
    fn macrostate_display() {
        assert_eq!(Macrostate::parse("0.2, 1/3").unwrap().to_string(), "(0.2, 1/3)");
        assert_eq!(Macrostate::parse("0.4").unwrap().with_label("hot").to_string(), "hot");
    }
}
