use macroacc::accessibility::{
    verdict_finite_scale, verdict_lemma4, verdict_theorem1, verdict_theorem2, Basis, Verdict, VerdictConfig,
};
use macroacc::{Macrostate, ModelSystem, Result};

/// Runs one verdict rule. The `lemma4` and `finite-scale` rules use the equal
/// schedule on both sides.
pub fn decide(
    model: &ModelSystem,
    a: &Macrostate,
    b: &Macrostate,
    basis: Basis,
    config: &VerdictConfig,
) -> Result<Verdict> {
    let s = &config.equal_schedule;
    match basis {
        Basis::Theorem1 => verdict_theorem1(model, a, b, config),
        Basis::Theorem2 => verdict_theorem2(model, a, b, config),
        Basis::Lemma4 => verdict_lemma4(model, a, s, b, s, config),
        Basis::FiniteScale => verdict_finite_scale(model, a, s, b, s, config),
    }
}

pub fn parse_bases(text: &str) -> std::result::Result<Vec<Basis>, String> {
    let all = [Basis::Theorem1, Basis::Theorem2, Basis::Lemma4, Basis::FiniteScale];
    if text.trim() == "all" {
        return Ok(all.to_vec());
    }
    text.split(',')
        .map(|t| {
            let t = t.trim();
            all.iter().copied().find(|b| b.as_str() == t).ok_or_else(|| {
                format!("unknown basis `{t}` (expected all, theorem1, theorem2, lemma4 or finite-scale)")
            })
        })
        .collect()
}

/// One human-readable line per verdict.
pub fn summary_line(src: &str, dst: &str, v: &Verdict) -> String {
    format!(
        "{:<16} {:<12} {:<13} {:<13} margin {:.3e}  {}",
        format!("{src} -> {dst}"),
        v.basis.as_str(),
        v.decision.to_string(),
        v.branch,
        v.evidence.margin,
        v.reason
    )
}
