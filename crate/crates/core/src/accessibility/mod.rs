//! Convertibility between macrostates: majorization at a fixed scale, the
//! η-window and `δ′` constructions, and the asymptotic verdict rules.

mod eta;
mod runs;
mod verdict;

pub use eta::{
    construct_delta_prime, delta_prime_at, eta_plus_minus, eta_window, DeltaPrimeConstruction, DeltaPrimeScale,
    EtaWindow,
};
pub use runs::{
    check_probability, flat_convertible_at_scale, majorizes, majorizes_runs, sorted_padded, RunSpectrum,
};
pub use verdict::{
    scale_evidence, verdict_finite_scale, verdict_lemma4, verdict_theorem1, verdict_theorem2, Basis, Decision,
    Evidence, NamedEstimate, ScaleEvidence, Verdict, VerdictConfig, MARGIN_FLOOR,
};
