//! Exactly solvable model families and their joint eigenvalue counts.

mod counting;
mod model;
mod table;

pub use counting::{DimensionCounter, IntBox, ScaleCounter};
pub use model::{build_model, ModelSpec, ModelSystem, SiteEntry, SiteTuple, SitesPerScale};
pub use table::{
    binomial, joint_spectrum, joint_spectrum_with_cap, predicted_distinct_tuples, JointSpectrum,
    MultiplicityTable, DEFAULT_TABLE_CAP,
};
