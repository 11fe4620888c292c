use std::collections::BTreeMap;

use num_bigint::BigUint;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::{parse_rational, Rational};

/// Declarative model description, as found in a scenario's `[model]` section.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSpec {
    /// `paramagnet`, `lattice-gas`, `oscillator-chain` or `raw`.
    pub family: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    /// Energy of the second particle species (lattice gas only, default 2).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub e2: Option<i64>,
    /// Highest occupation per oscillator (oscillator chain only, default 3).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_quanta: Option<u32>,
    /// Per-site joint values for the `raw` family.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub sites: Vec<SiteEntry>,
    /// Sites per unit of scale; `k` means `k·X` sites at scale `X`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sites_per_scale: Option<u64>,
    /// Physical unit of each observable's integer eigenvalues, e.g. `"1/2"`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub value_unit: Option<Vec<String>>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SiteEntry {
    pub values: Vec<i64>,
    #[serde(default = "one_u64")]
    pub multiplicity: u64,
}

fn one_u64() -> u64 {
    1
}

impl ModelSpec {
    pub fn family(family: &str) -> Self {
        ModelSpec { family: family.to_string(), ..Default::default() }
    }

    pub fn raw(sites: Vec<SiteEntry>) -> Self {
        ModelSpec { family: "raw".to_string(), sites, ..Default::default() }
    }
}

/// One per-site alternative: a joint eigenvalue tuple and its degeneracy.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct SiteTuple {
    pub values: Vec<i64>,
    pub multiplicity: BigUint,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SitesPerScale {
    Identity,
    Multiple(u64),
}

impl SitesPerScale {
    pub fn sites(self, scale: u64) -> u64 {
        match self {
            SitesPerScale::Identity => scale,
            SitesPerScale::Multiple(k) => k * scale,
        }
    }
}

/// A scale-indexed family of commuting integer-valued observables on
/// independent, identical sites. Index 0 is the energy.
#[derive(Clone, Debug, PartialEq)]
pub struct ModelSystem {
    name: String,
    num_observables: usize,
    site_table: Vec<SiteTuple>,
    sites_per_scale: SitesPerScale,
    value_unit: Vec<Rational>,
}

impl ModelSystem {
    /// Validates and normalises a site table. Duplicate tuples are merged by
    /// adding their multiplicities; the table is kept sorted.
    pub fn new(
        name: impl Into<String>,
        site_table: Vec<SiteTuple>,
        sites_per_scale: SitesPerScale,
        value_unit: Option<Vec<Rational>>,
    ) -> Result<Self> {
        let first = site_table.first().ok_or(Error::EmptySiteTable)?;
        let arity = first.values.len();
        if arity == 0 {
            return Err(Error::InvalidModel("site tuples must have at least one entry".into()));
        }
        let mut merged: BTreeMap<Vec<i64>, BigUint> = BTreeMap::new();
        for tuple in &site_table {
            if tuple.values.len() != arity {
                return Err(Error::ArityMismatch { expected: arity, found: tuple.values.len() });
            }
            if tuple.multiplicity.is_zero() {
                return Err(Error::InvalidModel("site multiplicities must be positive".into()));
            }
            *merged.entry(tuple.values.clone()).or_default() += &tuple.multiplicity;
        }
        if merged.len() < 2 {
            return Err(Error::InvalidModel(
                "at least two distinct per-site tuples are required".into(),
            ));
        }
        if let SitesPerScale::Multiple(0) = sites_per_scale {
            return Err(Error::InvalidModel("sites_per_scale must be positive".into()));
        }
        let value_unit =
            value_unit.unwrap_or_else(|| vec![Rational::one(); arity]);
        if value_unit.len() != arity {
            return Err(Error::ArityMismatch { expected: arity, found: value_unit.len() });
        }
        if value_unit.iter().any(|u| !u.is_positive()) {
            return Err(Error::InvalidModel("value units must be positive".into()));
        }
        Ok(ModelSystem {
            name: name.into(),
            num_observables: arity,
            site_table: merged
                .into_iter()
                .map(|(values, multiplicity)| SiteTuple { values, multiplicity })
                .collect(),
            sites_per_scale,
            value_unit,
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    /// `L + 1`.
    pub fn num_observables(&self) -> usize {
        self.num_observables
    }

    pub fn site_table(&self) -> &[SiteTuple] {
        &self.site_table
    }

    pub fn sites_per_scale(&self) -> SitesPerScale {
        self.sites_per_scale
    }

    pub fn value_unit(&self) -> &[Rational] {
        &self.value_unit
    }

    pub fn sites(&self, scale: u64) -> u64 {
        self.sites_per_scale.sites(scale)
    }

    /// Per-site degeneracy summed over alternatives.
    pub fn site_dimension(&self) -> BigUint {
        self.site_table.iter().map(|t| &t.multiplicity).sum()
    }

    /// Dimension of the full Hilbert space at scale `X`.
    pub fn total_dimension(&self, scale: u64) -> BigUint {
        let sites = usize::try_from(self.sites(scale)).expect("site count fits in usize");
        num_traits::pow(self.site_dimension(), sites)
    }

    /// Smallest and largest integer value of observable `l` at scale `X`.
    pub fn value_range(&self, l: usize, scale: u64) -> (i64, i64) {
        let sites = self.sites(scale) as i64;
        let lo = self.site_table.iter().map(|t| t.values[l]).min().expect("nonempty");
        let hi = self.site_table.iter().map(|t| t.values[l]).max().expect("nonempty");
        (sites * lo, sites * hi)
    }
}

/// Builds a validated model from a declarative description.
pub fn build_model(spec: &ModelSpec) -> Result<ModelSystem> {
    let family = spec.family.trim().to_ascii_lowercase();
    let unit_tuple = |values: Vec<i64>| SiteTuple { values, multiplicity: BigUint::one() };
    let (default_name, table) = match family.as_str() {
        "paramagnet" => ("paramagnet".to_string(), vec![unit_tuple(vec![0]), unit_tuple(vec![1])]),
        "lattice-gas" | "lattice_gas" => {
            let e2 = spec.e2.unwrap_or(2);
            (
                format!("lattice-gas(e2={e2})"),
                vec![unit_tuple(vec![0, 0]), unit_tuple(vec![1, 1]), unit_tuple(vec![e2, 1])],
            )
        }
        "oscillator-chain" | "oscillator" => {
            let max = spec.max_quanta.unwrap_or(3);
            if max == 0 {
                return Err(Error::InvalidModel("max_quanta must be at least 1".into()));
            }
            (
                format!("oscillator-chain(max_quanta={max})"),
                (0..=i64::from(max)).map(|n| unit_tuple(vec![n])).collect(),
            )
        }
        "raw" => {
            if spec.sites.is_empty() {
                return Err(Error::EmptySiteTable);
            }
            (
                "raw".to_string(),
                spec.sites
                    .iter()
                    .map(|s| SiteTuple {
                        values: s.values.clone(),
                        multiplicity: BigUint::from(s.multiplicity),
                    })
                    .collect(),
            )
        }
        _ => return Err(Error::UnknownFamily(spec.family.clone())),
    };
    let sites_per_scale = match spec.sites_per_scale {
        None | Some(1) => SitesPerScale::Identity,
        Some(k) => SitesPerScale::Multiple(k),
    };
    let units = spec
        .value_unit
        .as_ref()
        .map(|units| units.iter().map(|u| parse_rational(u)).collect::<Result<Vec<_>>>())
        .transpose()?;
    ModelSystem::new(spec.name.clone().unwrap_or(default_name), table, sites_per_scale, units)
}


#[cfg(test)]
mod tests {
    use super::*;

    fn values(model: &ModelSystem) -> Vec<Vec<i64>> {
        model.site_table().iter().map(|t| t.values.clone()).collect()
    }

    #[test]
    fn builtin_families() {
        let para = build_model(&ModelSpec::family("paramagnet")).unwrap();
        assert_eq!(values(&para), vec![vec![0], vec![1]]);
        assert_eq!(para.num_observables(), 1);

        let mut spec = ModelSpec::family("lattice-gas");
        spec.e2 = Some(2);
        let gas = build_model(&spec).unwrap();
        assert_eq!(values(&gas), vec![vec![0, 0], vec![1, 1], vec![2, 1]]);
        assert_eq!(gas.num_observables(), 2);

        let osc = build_model(&ModelSpec::family("oscillator-chain")).unwrap();
        assert_eq!(osc.site_table().len(), 4);
    }

    #[test]
    fn rejects_bad_specs() {
        assert_eq!(
            build_model(&ModelSpec::family("ising")).unwrap_err(),
            Error::UnknownFamily("ising".into())
        );
        assert_eq!(build_model(&ModelSpec::raw(vec![])).unwrap_err(), Error::EmptySiteTable);
        let ragged = ModelSpec::raw(vec![
            SiteEntry { values: vec![0, 0], multiplicity: 1 },
            SiteEntry { values: vec![1], multiplicity: 1 },
        ]);
        assert_eq!(
            build_model(&ragged).unwrap_err(),
            Error::ArityMismatch { expected: 2, found: 1 }
        );
        let single = ModelSpec::raw(vec![
            SiteEntry { values: vec![1], multiplicity: 1 },
            SiteEntry { values: vec![1], multiplicity: 2 },
        ]);
        assert!(matches!(build_model(&single), Err(Error::InvalidModel(_))));
    }

    #[test]
    fn duplicates_merge_and_units_parse() {
        let mut spec = ModelSpec::raw(vec![
            SiteEntry { values: vec![1], multiplicity: 1 },
            SiteEntry { values: vec![0], multiplicity: 2 },
            SiteEntry { values: vec![1], multiplicity: 3 },
        ]);
        spec.value_unit = Some(vec!["1/2".into()]);
        let model = build_model(&spec).unwrap();
        assert_eq!(model.site_table().len(), 2);
        assert_eq!(model.site_table()[1].multiplicity, BigUint::from(4u32));
        assert_eq!(model.site_dimension(), BigUint::from(6u32));
        assert_eq!(model.value_unit()[0], parse_rational("0.5").unwrap());
    }

    #[test]
    fn sites_and_dimensions() {
        let mut spec = ModelSpec::family("paramagnet");
        spec.sites_per_scale = Some(3);
        let model = build_model(&spec).unwrap();
        assert_eq!(model.sites(4), 12);
        assert_eq!(model.total_dimension(4), BigUint::from(4096u32));
        assert_eq!(model.value_range(0, 4), (0, 12));
    }
}
