use std::collections::BTreeSet;
use std::path::Path;

use macroacc::accessibility::{Decision, Verdict};
use macroacc::regularization::{entropy_density_sequence, EntropySequence, Quantity};
use serde::Serialize;
use serde_json::json;

use crate::checks::witness_oracle;
use crate::decide::{decide, summary_line};
use crate::error::{CliError, CliResult};
use crate::output::{csv_text, json_text, sig12, slug, write_file};
use crate::scenario::{Plan, SCENARIO_VERSION};

#[derive(Debug, Serialize)]
pub struct RunSummary {
    pub files: Vec<String>,
    pub verdicts: Vec<(String, String, Verdict)>,
}

fn context(what: String) -> impl FnOnce(macroacc::Error) -> CliError {
    move |e| match CliError::from(e) {
        CliError::Validation(m) => CliError::Validation(format!("{what}: {m}")),
        CliError::Computation(m) => CliError::Computation(format!("{what}: {m}")),
    }
}

fn header(plan: &Plan) -> String {
    let s = &plan.scenario;
    format!("scenario={} version={SCENARIO_VERSION} seed={} convention={}", s.name, s.seed, plan.config.convention)
}

fn sequence_rows(seq: &EntropySequence) -> Vec<Vec<String>> {
    seq.points
        .iter()
        .map(|p| {
            vec![
                p.scale.to_string(),
                p.dimension.to_string(),
                sig12(p.density),
                p.delta.as_ref().map_or(String::new(), |d| d.to_string()),
                p.boundary_hit.to_string(),
            ]
        })
        .collect()
}

/// Executes a validated scenario and writes every artifact under `out`.
pub fn run(plan: &Plan, out: &Path) -> CliResult<RunSummary> {
    let cfg = &plan.config;
    let head = header(plan);
    let mut files: BTreeSet<String> = BTreeSet::new();
    let put = |files: &mut BTreeSet<String>, rel: String, text: &str| -> CliResult<()> {
        write_file(&out.join(&rel), text)?;
        files.insert(rel);
        Ok(())
    };

    let mut quantities = vec![Quantity::Downward];
    quantities.extend(cfg.schedules.iter().cloned().map(Quantity::shell));
    if !cfg.schedules.contains(&cfg.equal_schedule) {
        quantities.push(Quantity::shell(cfg.equal_schedule.clone()));
    }
    let mut sequence_index = Vec::new();
    for (i, m) in plan.macrostates.iter().enumerate() {
        for q in &quantities {
            let label = plan.label(i);
            let seq = entropy_density_sequence(&plan.model, m, q, &cfg.scales, cfg.convention)
                .map_err(context(format!("sequence {label}/{}", q.schedule_id())))?;
            let name = match q {
                Quantity::Downward => "downward".to_string(),
                other => slug(&other.schedule_id()),
            };
            let rel = format!("sequences/{label}__{name}.csv");
            put(&mut files, rel.clone(), &csv_text(&head, &["X", "D", "s_X", "delta", "boundary_hit"], &sequence_rows(&seq))?)?;
            sequence_index.push(json!({
                "macrostate": label,
                "quantity": q.schedule_id(),
                "file": rel,
                "empty_scales": seq.empty_scales,
            }));
        }
    }

    let mut verdicts = Vec::new();
    let mut rows = Vec::new();
    let mut tail_windows: BTreeSet<Vec<u64>> = BTreeSet::new();
    for &(i, j) in &plan.pairs {
        let (src, dst) = (plan.label(i), plan.label(j));
        for &basis in &plan.scenario.verdict.bases {
            let v = decide(&plan.model, &plan.macrostates[i], &plan.macrostates[j], basis, cfg)
                .map_err(context(format!("verdict {src} -> {dst} ({basis})")))?;
            for e in &v.evidence.estimates {
                tail_windows.insert(e.estimate.tail_window.clone());
            }
            let rel = format!("verdicts/{src}__{dst}__{}.json", basis.as_str());
            let doc = json!({
                "scenario": plan.scenario.name,
                "seed": plan.scenario.seed,
                "source": src,
                "target": dst,
                "verdict": v,
            });
            put(&mut files, rel, &json_text(&doc)?)?;
            rows.push(vec![
                src.to_string(),
                dst.to_string(),
                basis.as_str().to_string(),
                v.decision.to_string(),
                v.branch.clone(),
                sig12(v.evidence.margin),
                v.reason.clone(),
            ]);
            verdicts.push((src.to_string(), dst.to_string(), v));
        }
    }
    put(&mut files, 
        "verdicts.csv".into(),
        &csv_text(&head, &["source", "target", "basis", "decision", "branch", "margin", "reason"], &rows)?,
    )?;

    let samples = plan.scenario.checks.witness_samples;
    let mut check_failures = 0;
    if samples > 0 {
        let checks = witness_oracle(plan.scenario.seed, samples);
        check_failures = checks.iter().filter(|c| !c.passed).count();
        let rows: Vec<Vec<String>> = checks
            .iter()
            .map(|c| {
                vec![
                    c.index.to_string(),
                    c.kind.to_string(),
                    c.size.to_string(),
                    if c.passed { "pass" } else { "fail" }.to_string(),
                    c.l1_error.map_or(String::new(), |e| format!("{e:.3e}")),
                ]
            })
            .collect();
        put(&mut files, "checks.csv".into(), &csv_text(&head, &["index", "kind", "n", "result", "l1_error"], &rows)?)?;
    }

    put(&mut files, "report.txt".into(), &report(plan, &verdicts, samples, check_failures))?;

    let mut listed: Vec<String> = files.iter().cloned().collect();
    listed.push("manifest.json".into());
    listed.sort();
    let v = &plan.scenario.verdict;
    let manifest = json!({
        "tool": "macroacc",
        "tool_version": env!("CARGO_PKG_VERSION"),
        "scenario": plan.scenario.name,
        "scenario_version": SCENARIO_VERSION,
        "seed": plan.scenario.seed,
        "convention": cfg.convention,
        "model": plan.scenario.model,
        "macrostates": plan.macrostates,
        "scales": cfg.scales,
        "schedule_family": cfg.schedules.iter().map(|s| s.id()).collect::<Vec<_>>(),
        "equal_schedule": cfg.equal_schedule.id(),
        "margin_floor": cfg.margin_floor,
        "margins": verdicts.iter().map(|(s, d, v)| json!({
            "source": s, "target": d, "basis": v.basis, "decision": v.decision,
            "branch": v.branch, "margin": v.evidence.margin,
        })).collect::<Vec<_>>(),
        "tail_fraction": cfg.tail_fraction,
        "tail_windows": tail_windows,
        "method": cfg.method,
        "extrapolate": v.extrapolate,
        "x0": cfg.x0,
        "sequences": sequence_index,
        "witness_samples": samples,
        "witness_failures": check_failures,
        "files": listed,
    });
    put(&mut files, "manifest.json".into(), &json_text(&manifest)?)?;
    if check_failures > 0 {
        return Err(CliError::Computation(format!("{check_failures} of {samples} witness checks failed")));
    }
    Ok(RunSummary { files: listed, verdicts })
}

fn report(plan: &Plan, verdicts: &[(String, String, Verdict)], samples: usize, failures: usize) -> String {
    let cfg = &plan.config;
    let s = &plan.scenario;
    let mut out = String::new();
    out.push_str(&format!("scenario {} (version {SCENARIO_VERSION}, seed {})\n", s.name, s.seed));
    out.push_str(&format!("model {} with {} observable(s), convention {}\n", plan.model.name(), plan.model.num_observables(), cfg.convention));
    out.push_str(&format!("scales {}\n", cfg.scales.iter().map(u64::to_string).collect::<Vec<_>>().join(" ")));
    out.push_str("macrostates\n");
    for (i, m) in plan.macrostates.iter().enumerate() {
        let d: Vec<String> = m.densities().iter().map(ToString::to_string).collect();
        out.push_str(&format!("  {} = ({})\n", plan.label(i), d.join(", ")));
    }
    out.push_str("verdicts\n");
    for (src, dst, v) in verdicts {
        out.push_str(&format!("  {}\n", summary_line(src, dst, v)));
    }
    let count = |d: Decision| verdicts.iter().filter(|(_, _, v)| v.decision == d).count();
    out.push_str(&format!(
        "totals: {} possible, {} impossible, {} indeterminate\n",
        count(Decision::Possible),
        count(Decision::Impossible),
        count(Decision::Indeterminate)
    ));
    if samples > 0 {
        out.push_str(&format!("witness checks: {} of {samples} passed\n", samples - failures));
    }
    out
}
