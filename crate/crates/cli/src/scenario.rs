//! Scenario files: a versioned TOML document describing one model, a set of
//! labelled macrostates, a schedule family, a scale grid and verdict settings.

use std::collections::BTreeSet;
use std::path::Path;

use macroacc::accessibility::{Basis, VerdictConfig};
use macroacc::regularization::{check_scales, geometric_scales, EstimateMethod};
use macroacc::spectra::{build_model, ModelSpec, ModelSystem};
use macroacc::{parse_rational, DeltaSchedule, Macrostate, ShellConvention};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};

pub const SCENARIO_VERSION: u32 = 1;

/// Scenarios shipped inside the binary, addressable by name.
pub const BUNDLED: &[(&str, &str)] = &[("paramagnet-demo", include_str!("../scenarios/paramagnet-demo.toml"))];

#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub version: u32,
    pub name: String,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub convention: ShellConvention,
    /// Default output directory, relative to the working directory.
    #[serde(default)]
    pub output: Option<String>,
    pub model: ModelSpec,
    #[serde(rename = "macrostate")]
    pub macrostates: Vec<MacrostateEntry>,
    pub scales: ScaleGrid,
    #[serde(default)]
    pub schedules: ScheduleSection,
    #[serde(default)]
    pub verdict: VerdictSection,
    #[serde(default)]
    pub checks: ChecksSection,
}

#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(untagged)]
pub enum Density {
    Text(String),
    Number(f64),
}

impl Density {
    /// Floats go through their shortest decimal form, so `0.2` means `1/5`.
    fn text(&self) -> String {
        match self {
            Density::Text(s) => s.clone(),
            Density::Number(v) => v.to_string(),
        }
    }
}

#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct MacrostateEntry {
    pub label: String,
    pub densities: Vec<Density>,
}

#[derive(Clone, Debug, Default, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct ScaleGrid {
    #[serde(default)]
    pub grid: Option<Vec<u64>>,
    #[serde(default)]
    pub geometric: Option<Geometric>,
}

#[derive(Clone, Copy, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct Geometric {
    pub start: u64,
    pub count: u32,
}

#[derive(Clone, Debug, Default, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct ScheduleSection {
    /// Family for upper/lower entropies; the library default when empty.
    #[serde(default)]
    pub family: Vec<DeltaSchedule>,
    /// Schedule for the equal-entropy branch, `lemma4` and per-scale evidence.
    #[serde(default)]
    pub equal: Option<DeltaSchedule>,
}

#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct VerdictSection {
    #[serde(default = "default_bases")]
    pub bases: Vec<Basis>,
    /// Ordered label pairs; every ordered pair (self pairs included) when absent.
    #[serde(default)]
    pub pairs: Option<Vec<[String; 2]>>,
    #[serde(default = "default_tail")]
    pub tail_fraction: f64,
    #[serde(default = "default_margin")]
    pub margin_floor: f64,
    #[serde(default = "default_method")]
    pub method: EstimateMethod,
    /// An estimate method, or `"none"` for raw tail extremes.
    #[serde(default = "default_extrapolate")]
    pub extrapolate: String,
    #[serde(default)]
    pub x0: u64,
}

fn default_bases() -> Vec<Basis> {
    vec![Basis::Theorem1, Basis::Theorem2, Basis::Lemma4]
}

fn default_tail() -> f64 {
    VerdictConfig::default().tail_fraction
}

fn default_margin() -> f64 {
    VerdictConfig::default().margin_floor
}

fn default_method() -> EstimateMethod {
    VerdictConfig::default().method
}

fn default_extrapolate() -> String {
    VerdictConfig::default().extrapolate.map_or("none".into(), |m| m.as_str().into())
}

impl Default for VerdictSection {
    fn default() -> Self {
        VerdictSection {
            bases: default_bases(),
            pairs: None,
            tail_fraction: default_tail(),
            margin_floor: default_margin(),
            method: default_method(),
            extrapolate: default_extrapolate(),
            x0: 0,
        }
    }
}

#[derive(Clone, Debug, Default, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct ChecksSection {
    /// Seeded random witness-oracle samples recorded in `checks.csv`.
    #[serde(default)]
    pub witness_samples: usize,
}

/// A validated scenario with everything resolved.
#[derive(Clone, Debug)]
pub struct Plan {
    pub scenario: Scenario,
    pub model: ModelSystem,
    pub macrostates: Vec<Macrostate>,
    pub config: VerdictConfig,
    pub pairs: Vec<(usize, usize)>,
}

impl Plan {
    pub fn label(&self, i: usize) -> &str {
        self.macrostates[i].label().expect("scenario macrostates are labelled")
    }
}

fn line_of(text: &str, offset: usize) -> usize {
    text[..offset.min(text.len())].matches('\n').count() + 1
}

pub fn parse(text: &str, origin: &str) -> CliResult<Scenario> {
    toml::from_str::<Scenario>(text).map_err(|e| {
        let line = e.span().map(|s| format!("line {}: ", line_of(text, s.start))).unwrap_or_default();
        CliError::validation(format!("{origin}: {line}{}", e.message()))
    })
}

/// Reads a scenario from a path, or from the bundled set when no such file
/// exists and the name matches.
pub fn load(spec: &str) -> CliResult<Scenario> {
    let path = Path::new(spec);
    if path.exists() {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::validation(format!("{spec}: {e}")))?;
        return parse(&text, spec);
    }
    match BUNDLED.iter().find(|(name, _)| *name == spec) {
        Some((name, text)) => parse(text, name),
        None => Err(CliError::validation(format!(
            "{spec}: no such file or bundled scenario (bundled: {})",
            BUNDLED.iter().map(|(n, _)| *n).collect::<Vec<_>>().join(", ")
        ))),
    }
}

fn check_label(label: &str) -> CliResult<()> {
    let ok = !label.is_empty() && label.chars().all(|c| c.is_ascii_alphanumeric() || matches!(c, '-' | '_' | '.'));
    if ok {
        Ok(())
    } else {
        Err(CliError::validation(format!("label `{label}` must be nonempty ASCII letters, digits, `-`, `_` or `.`")))
    }
}

impl Scenario {
    pub fn resolve_scales(&self) -> CliResult<Vec<u64>> {
        let scales = match (&self.scales.grid, &self.scales.geometric) {
            (Some(grid), None) => grid.clone(),
            (None, Some(g)) => geometric_scales(g.start, g.count),
            _ => return Err(CliError::validation("[scales] needs exactly one of `grid` or `geometric`")),
        };
        check_scales(&scales)?;
        Ok(scales)
    }

    pub fn validate(self) -> CliResult<Plan> {
        if self.version != SCENARIO_VERSION {
            return Err(CliError::validation(format!(
                "unsupported scenario version {} (expected {SCENARIO_VERSION})",
                self.version
            )));
        }
        check_label(&self.name)?;
        let model = build_model(&self.model)?;
        if self.macrostates.is_empty() {
            return Err(CliError::validation("at least one [[macrostate]] is required"));
        }
        let mut seen = BTreeSet::new();
        let mut macrostates = Vec::with_capacity(self.macrostates.len());
        for entry in &self.macrostates {
            check_label(&entry.label)?;
            if !seen.insert(entry.label.clone()) {
                return Err(CliError::validation(format!("duplicate macrostate label `{}`", entry.label)));
            }
            let densities = entry
                .densities
                .iter()
                .map(|d| parse_rational(&d.text()))
                .collect::<Result<Vec<_>, _>>()?;
            let m = Macrostate::new(densities)?.with_label(entry.label.clone());
            m.check_arity(model.num_observables())?;
            macrostates.push(m);
        }
        let scales = self.resolve_scales()?;
        let defaults = VerdictConfig::default();
        let schedules = if self.schedules.family.is_empty() { defaults.schedules.clone() } else { self.schedules.family.clone() };
        let equal_schedule = self.schedules.equal.clone().unwrap_or(defaults.equal_schedule.clone());
        for s in schedules.iter().chain(std::iter::once(&equal_schedule)) {
            s.validate()?;
        }
        let v = &self.verdict;
        if !(v.tail_fraction > 0.0 && v.tail_fraction <= 1.0) {
            return Err(CliError::validation(format!("tail_fraction must lie in (0, 1], got {}", v.tail_fraction)));
        }
        if !(v.margin_floor.is_finite() && v.margin_floor >= 0.0) {
            return Err(CliError::validation(format!("margin_floor must be finite and nonnegative, got {}", v.margin_floor)));
        }
        let extrapolate = match v.extrapolate.as_str() {
            "none" => None,
            other => Some(other.parse::<EstimateMethod>()?),
        };
        if v.bases.is_empty() {
            return Err(CliError::validation("[verdict] bases must not be empty"));
        }
        let index = |label: &str| {
            macrostates
                .iter()
                .position(|m| m.label() == Some(label))
                .ok_or_else(|| CliError::validation(format!("pair refers to unknown macrostate label `{label}`")))
        };
        let pairs = match &v.pairs {
            Some(list) => list.iter().map(|[a, b]| Ok((index(a)?, index(b)?))).collect::<CliResult<Vec<_>>>()?,
            None => (0..macrostates.len()).flat_map(|i| (0..macrostates.len()).map(move |j| (i, j))).collect(),
        };
        let config = VerdictConfig {
            scales,
            convention: self.convention,
            schedules,
            equal_schedule,
            tail_fraction: v.tail_fraction,
            margin_floor: v.margin_floor,
            method: v.method,
            extrapolate,
            x0: v.x0,
        };
        Ok(Plan { scenario: self, model, macrostates, config, pairs })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bundled_demo_validates() {
        let plan = load("paramagnet-demo").unwrap().validate().unwrap();
        assert_eq!(plan.macrostates.len(), 2);
        assert_eq!(plan.pairs.len(), 4);
        assert_eq!(plan.macrostates[0].densities()[0], parse_rational("0.2").unwrap());
    }

    #[test]
    fn parse_errors_carry_line_numbers() {
        let text = "version = 1\nname = \"x\"\n\n[model]\nfamily = \"paramagnet\"\ncolour = 3\n";
        let err = parse(text, "bad.toml").unwrap_err();
        assert!(err.to_string().contains("line 6"), "{err}");
    }

    #[test]
    fn float_densities_are_read_as_decimals() {
        assert_eq!(Density::Number(0.2).text(), "0.2");
    }
}
