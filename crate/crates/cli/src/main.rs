//! `macroacc`: scenario runs, entropy sweeps, accessibility verdicts and
//! majorization witnesses from the command line.

mod checks;
mod decide;
mod error;
mod output;
mod run;
mod scenario;

use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use macroacc::accessibility::VerdictConfig;
use macroacc::channels::{t_transform_chain, TransformWitness};
use macroacc::regularization::{entropy_density_sequence, geometric_scales, Quantity};
use macroacc::spectra::{build_model, ModelSpec, ModelSystem};
use macroacc::{parse_rational, DeltaSchedule, Macrostate, Rational, Scalar, ShellConvention};
use num_traits::ToPrimitive;
use serde_json::json;

use crate::error::{CliError, CliResult};
use crate::output::{csv_text, json_text, sig12, write_file};

#[derive(Debug, Parser)]
#[command(name = "macroacc", version, about = "Exact microcanonical counting and macroscopic accessibility verdicts")]
struct Cli {
    /// Shell convention: `mult` for [Xa(1-δ), Xa(1+δ)), `add` for [X(a-δ), X(a+δ)).
    #[arg(long, global = true, value_parser = parse_convention)]
    convention: Option<ShellConvention>,
    /// Comma-separated scales, or `a..b` for the doubling grid a, 2a, ... up to b.
    #[arg(long, global = true, value_parser = parse_scales)]
    scales: Option<ScaleList>,
    /// Output directory (run) or JSON file (verdict, witness).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Seed for the random witness checks; overrides the scenario seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Execute a scenario file, or a bundled scenario by name.
    Run { scenario: String },
    /// Entropy density sequence of one macrostate as CSV on stdout.
    Sweep {
        /// Model family name, or a TOML file holding a model description.
        #[arg(long)]
        model: String,
        /// Comma-separated densities, decimals or fractions.
        #[arg(long)]
        macrostate: String,
        /// `downward`, `power:c,alpha`, `constant:v` or `decay:v,until,alpha`.
        #[arg(long, default_value = "downward")]
        schedule: String,
    },
    /// Accessibility verdicts for one ordered pair of macrostates.
    Verdict {
        #[arg(long)]
        model: String,
        #[arg(long)]
        from: String,
        #[arg(long)]
        to: String,
        /// `all` or a comma list of theorem1, theorem2, lemma4, finite-scale.
        #[arg(long, default_value = "all")]
        basis: String,
        /// Shell schedule for the equal-entropy branch and the `lemma4` and `finite-scale` rules.
        #[arg(long)]
        schedule: Option<String>,
        /// Print full JSON evidence instead of the summary.
        #[arg(long)]
        json: bool,
    },
    /// T-transform witness that `p` majorizes `q`, or seeded random checks.
    Witness {
        #[arg(long, required_unless_present = "random")]
        p: Option<String>,
        #[arg(long, required_unless_present = "random")]
        q: Option<String>,
        /// Use exact rational arithmetic.
        #[arg(long)]
        exact: bool,
        /// Run this many random witness checks instead.
        #[arg(long, conflicts_with_all = ["p", "q"])]
        random: Option<usize>,
        #[arg(long)]
        json: bool,
    },
}

fn parse_convention(s: &str) -> Result<ShellConvention, String> {
    s.parse().map_err(|e: macroacc::Error| e.to_string())
}

/// A parsed `--scales` value.
#[derive(Clone, Debug)]
struct ScaleList(Vec<u64>);

fn parse_scales(s: &str) -> Result<ScaleList, String> {
    let int = |t: &str| t.trim().parse::<u64>().map_err(|_| format!("`{t}` is not a positive integer"));
    let scales = if let Some((a, b)) = s.split_once("..") {
        let (a, b) = (int(a)?, int(b)?);
        if a == 0 || b < a {
            return Err(format!("range `{s}` needs 1 <= start <= end"));
        }
        let count = (b / a).ilog2() + 1;
        geometric_scales(a, count)
    } else {
        s.split(',').map(int).collect::<Result<Vec<_>, _>>()?
    };
    macroacc::regularization::check_scales(&scales).map_err(|e| e.to_string())?;
    Ok(ScaleList(scales))
}

fn parse_schedule(s: &str) -> CliResult<Option<DeltaSchedule>> {
    let bad = || CliError::validation(format!("schedule `{s}`: expected downward, power:c,alpha, constant:v or decay:v,until,alpha"));
    if s == "downward" {
        return Ok(None);
    }
    let (form, args) = s.split_once(':').ok_or_else(bad)?;
    let args: Vec<&str> = args.split(',').map(str::trim).collect();
    let float = |t: &str| t.parse::<f64>().map_err(|_| CliError::validation(format!("`{t}` is not a number")));
    let schedule = match (form, args.as_slice()) {
        ("power", [c, alpha]) => DeltaSchedule::power(float(c)?, float(alpha)?)?,
        ("constant", [v]) => DeltaSchedule::constant(parse_rational(v)?)?,
        ("decay", [v, until, alpha]) => {
            let until = until.parse::<u64>().map_err(|_| bad())?;
            DeltaSchedule::constant_then_decay(parse_rational(v)?, until, float(alpha)?)?
        }
        _ => return Err(bad()),
    };
    Ok(Some(schedule))
}

fn load_model(spec: &str) -> CliResult<ModelSystem> {
    let path = Path::new(spec);
    let model_spec = if path.is_file() {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::validation(format!("{spec}: {e}")))?;
        toml::from_str::<ModelSpec>(&text).map_err(|e| CliError::validation(format!("{spec}: {}", e.message())))?
    } else {
        ModelSpec::family(spec)
    };
    Ok(build_model(&model_spec)?)
}

fn macrostate(text: &str, model: &ModelSystem) -> CliResult<Macrostate> {
    let m = Macrostate::parse(text)?;
    m.check_arity(model.num_observables())?;
    Ok(m)
}

fn cmd_run(cli: &Cli, name: &str) -> CliResult<()> {
    let mut scenario = scenario::load(name)?;
    if let Some(seed) = cli.seed {
        scenario.seed = seed;
    }
    if let Some(c) = cli.convention {
        scenario.convention = c;
    }
    if let Some(scales) = &cli.scales {
        scenario.scales = scenario::ScaleGrid { grid: Some(scales.0.clone()), geometric: None };
    }
    let out = cli
        .out
        .clone()
        .or_else(|| scenario.output.clone().map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("macroacc-out").join(&scenario.name));
    let plan = scenario.validate()?;
    let summary = run::run(&plan, &out)?;
    for (src, dst, v) in &summary.verdicts {
        println!("{}", decide::summary_line(src, dst, v));
    }
    println!("wrote {} files to {}", summary.files.len(), out.display());
    Ok(())
}

fn cmd_sweep(cli: &Cli, model: &str, state: &str, schedule: &str) -> CliResult<()> {
    let model = load_model(model)?;
    let a = macrostate(state, &model)?;
    let quantity = parse_schedule(schedule)?.map_or(Quantity::Downward, Quantity::shell);
    let scales = cli.scales.clone().map(|s| s.0).unwrap_or_else(|| VerdictConfig::default().scales);
    let conv = cli.convention.unwrap_or_default();
    let seq = entropy_density_sequence(&model, &a, &quantity, &scales, conv)?;
    let rows: Vec<Vec<String>> =
        seq.points.iter().map(|p| vec![p.scale.to_string(), p.dimension.to_string(), sig12(p.density)]).collect();
    let head = format!("model={} macrostate={state} quantity={} convention={conv}", model.name(), quantity.schedule_id());
    let text = csv_text(&head, &["X", "D", "s_X"], &rows)?;
    if let Some(path) = &cli.out {
        write_file(path, &text)?;
    }
    print!("{text}");
    if !seq.empty_scales.is_empty() {
        eprintln!("empty at scales {:?}", seq.empty_scales);
    }
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn cmd_verdict(cli: &Cli, model: &str, from: &str, to: &str, basis: &str, schedule: Option<&str>, as_json: bool) -> CliResult<()> {
    let model = load_model(model)?;
    let (a, b) = (macrostate(from, &model)?, macrostate(to, &model)?);
    let bases = decide::parse_bases(basis).map_err(CliError::Validation)?;
    let mut config = VerdictConfig::default();
    if let Some(scales) = &cli.scales {
        config.scales = scales.0.clone();
    }
    if let Some(c) = cli.convention {
        config.convention = c;
    }
    if let Some(s) = schedule {
        config.equal_schedule = parse_schedule(s)?
            .ok_or_else(|| CliError::validation("the verdict schedule must be a shell schedule, not `downward`"))?;
    }
    let verdicts = bases
        .iter()
        .map(|&basis| decide::decide(&model, &a, &b, basis, &config))
        .collect::<Result<Vec<_>, _>>()?;
    let doc = json!({ "model": model.name(), "convention": config.convention, "scales": config.scales, "verdicts": verdicts });
    if let Some(path) = &cli.out {
        write_file(path, &json_text(&doc)?)?;
    }
    if as_json {
        print!("{}", json_text(&doc)?);
    } else {
        for v in &verdicts {
            println!("{}", decide::summary_line(from, to, v));
        }
    }
    Ok(())
}

fn parse_vector(text: &str) -> CliResult<Vec<Rational>> {
    text.split(',').map(|t| parse_rational(t).map_err(CliError::from)).collect()
}

fn describe<S: Scalar>(w: &TransformWitness<S>, p: &[S], q: &[S]) -> CliResult<(serde_json::Value, String)>
where
    S: serde::Serialize,
{
    let err = w.l1_error(p, q)?;
    let full = w.full_map();
    let steps = w.chain.transforms().unwrap_or(&[]);
    let mut text = format!("p majorizes q: witness with {} T-transform step(s) on sorted vectors\n", steps.len());
    for (k, s) in steps.iter().enumerate() {
        text.push_str(&format!("  step {}: mix ({}, {}) with t = {}\n", k + 1, s.i, s.j, s.t));
    }
    let matrix = full.to_matrix();
    if matrix.len() <= 8 {
        text.push_str("doubly stochastic map on original coordinates:\n");
        for row in &matrix {
            let cells: Vec<String> = row.iter().map(ToString::to_string).collect();
            text.push_str(&format!("  [{}]\n", cells.join(", ")));
        }
    }
    text.push_str(&format!("l1 error {err}\n"));
    let doc = json!({
        "steps": steps,
        "p_order": w.p_order,
        "q_order": w.q_order,
        "matrix": matrix,
        "l1_error": err.to_string(),
    });
    Ok((doc, text))
}

fn cmd_witness(cli: &Cli, p: Option<&str>, q: Option<&str>, exact: bool, random: Option<usize>, as_json: bool) -> CliResult<()> {
    let (doc, text) = if let Some(samples) = random {
        let seed = cli.seed.unwrap_or(0);
        let rows = checks::witness_oracle(seed, samples);
        let failed = rows.iter().filter(|r| !r.passed).count();
        let worst = rows.iter().filter_map(|r| r.l1_error).fold(0.0, f64::max);
        let doc = json!({ "seed": seed, "samples": samples, "failed": failed, "worst_l1_error": worst });
        let text = format!("{} of {samples} witness checks passed (seed {seed}, worst l1 error {worst:.3e})\n", samples - failed);
        if failed > 0 {
            eprint!("{text}");
            return Err(CliError::Computation(format!("{failed} witness checks failed")));
        }
        (doc, text)
    } else {
        let (p, q) = (parse_vector(p.expect("required by clap"))?, parse_vector(q.expect("required by clap"))?);
        if exact {
            let w = t_transform_chain(&p, &q)?;
            describe(&w, &p, &q)?
        } else {
            let to_f = |v: &[Rational]| v.iter().map(|x| x.to_f64().unwrap_or(f64::NAN)).collect::<Vec<f64>>();
            let (pf, qf) = (to_f(&p), to_f(&q));
            let w = t_transform_chain(&pf, &qf)?;
            describe(&w, &pf, &qf)?
        }
    };
    if let Some(path) = &cli.out {
        write_file(path, &json_text(&doc)?)?;
    }
    if as_json {
        print!("{}", json_text(&doc)?);
    } else {
        print!("{text}");
    }
    Ok(())
}

fn dispatch(cli: &Cli) -> CliResult<()> {
    match &cli.command {
        Command::Run { scenario } => cmd_run(cli, scenario),
        Command::Sweep { model, macrostate, schedule } => cmd_sweep(cli, model, macrostate, schedule),
        Command::Verdict { model, from, to, basis, schedule, json } => {
            cmd_verdict(cli, model, from, to, basis, schedule.as_deref(), *json)
        }
        Command::Witness { p, q, exact, random, json } => {
            cmd_witness(cli, p.as_deref(), q.as_deref(), *exact, *random, *json)
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let result = dispatch(&cli);
    let _ = std::io::stdout().flush();
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("macroacc: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
