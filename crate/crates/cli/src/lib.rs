//! `selfmod` command line: named scenarios, ecosystem runs and parameter sweeps.
//!
//! Exit codes: 0 on success (an extinct population is a reported outcome),
//! 1 on a configuration error, 2 on a runtime failure such as an unwritable
//! output path.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use serde::Serialize;
use serde_json::Value;

use selfmod::ecosystem::{
    run_cartel, run_sim, voldemort_contest, AdaptationMode, EcosystemConfig, RunSummary, SimRun, VoldemortConfig,
    VoldemortOutcome,
};
use selfmod::output::{records_csv, scenario_csv, scenario_csv_labeled, to_json, trajectory_csv, write_file};
use selfmod::scenarios::{run_named, validate_named, ScenarioReport, SCENARIOS};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Config(String),
    #[error("{0}")]
    Runtime(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 1,
            CliError::Runtime(_) => 2,
        }
    }
}

fn config_err(e: impl std::fmt::Display) -> CliError {
    CliError::Config(e.to_string())
}

/// Configuration problems found while running still count as config errors.
fn run_err(e: selfmod::Error) -> CliError {
    match e {
        selfmod::Error::Config(_) | selfmod::Error::InvalidScenario { .. } | selfmod::Error::UnknownScenario(_) => {
            CliError::Config(e.to_string())
        }
        other => CliError::Runtime(other.to_string()),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

impl Format {
    fn extension(self) -> &'static str {
        match self {
            Format::Json => "json",
            Format::Csv => "csv",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Mode {
    Guarded,
    Selection,
    Cartel,
}

impl From<Mode> for AdaptationMode {
    fn from(m: Mode) -> Self {
        match m {
            Mode::Guarded => AdaptationMode::Guarded,
            Mode::Selection => AdaptationMode::Selection,
            Mode::Cartel => AdaptationMode::Cartel,
        }
    }
}

fn scenario_help() -> String {
    format!("Scenarios:\n  {}", SCENARIOS.join("\n  "))
}

#[derive(Debug, Clone, Parser)]
#[command(name = "selfmod", version, about = "Utility self-modification games and ecosystems", after_help = scenario_help())]
pub struct RunConfig {
    #[command(subcommand)]
    pub command: Command,
    /// TOML file with [scenario.<name>], [ecosystem] and [voldemort] sections.
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Option<PathBuf>,
    /// Master seed; overrides `ecosystem.seed` (default 0).
    #[arg(long, global = true, value_name = "U64")]
    pub seed: Option<u64>,
    /// Report destination; the report goes to stdout when absent.
    #[arg(long, global = true, value_name = "PATH")]
    pub out: Option<PathBuf>,
    /// Defaults to csv for an `--out` path ending in `.csv`, json otherwise.
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
    /// Overrides `ecosystem.rounds`.
    #[arg(long, global = true, value_name = "N")]
    pub rounds: Option<usize>,
    /// Overrides `ecosystem.mode`.
    #[arg(long, global = true, value_enum)]
    pub mode: Option<Mode>,
}

#[derive(Debug, Clone, Subcommand)]
pub enum Command {
    /// Run one named scenario.
    Scenario {
        #[arg(value_parser = clap::builder::PossibleValuesParser::new(SCENARIOS))]
        name: String,
    },
    /// Run the population simulation and the mutilation contest.
    Ecosystem,
    /// Run once per value of one config field.
    Sweep {
        /// `ecosystem.<field>` or `scenario.<name>.<field>`; nested fields use dots.
        #[arg(long, value_name = "KEY")]
        param: String,
        /// Comma-separated values, each parsed as JSON or else taken as a string.
        #[arg(long, value_name = "CSV-LIST", value_delimiter = ',', allow_hyphen_values = true, required = true)]
        values: Vec<String>,
    },
}

/// Every section of a config file with all defaults filled.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LoadedConfig {
    /// Scenario name to its defaulted, validated configuration.
    pub scenarios: BTreeMap<String, Value>,
    pub ecosystem: EcosystemConfig,
    pub voldemort: VoldemortConfig,
}

/// Reads and validates a TOML config; `None` gives the full defaults.
pub fn load_config(path: Option<&Path>) -> Result<LoadedConfig, CliError> {
    let root = match path {
        None => Value::Object(Default::default()),
        Some(p) => {
            let text =
                std::fs::read_to_string(p).map_err(|e| CliError::Config(format!("{}: {e}", p.display())))?;
            let parsed: toml::Table = toml::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", p.display())))?;
            serde_json::to_value(parsed).map_err(config_err)?
        }
    };
    parse_sections(&root)
}

fn parse_sections(root: &Value) -> Result<LoadedConfig, CliError> {
    let table = root.as_object().ok_or_else(|| config_err("config must be a table"))?;
    if let Some(k) = table.keys().find(|k| !["scenario", "ecosystem", "voldemort"].contains(&k.as_str())) {
        return Err(CliError::Config(format!("unknown config section [{k}]")));
    }
    let given = match table.get("scenario") {
        None => serde_json::Map::new(),
        Some(Value::Object(m)) => m.clone(),
        Some(_) => return Err(config_err("[scenario] must hold one table per scenario")),
    };
    if let Some(k) = given.keys().find(|k| !SCENARIOS.contains(&k.as_str())) {
        return Err(CliError::Config(format!(
            "unknown scenario [scenario.{k}]; expected one of {}",
            SCENARIOS.join(", ")
        )));
    }
    let mut scenarios = BTreeMap::new();
    for name in SCENARIOS {
        let v = validate_named(name, given.get(name)).map_err(config_err)?;
        scenarios.insert(name.to_string(), v);
    }
    let ecosystem: EcosystemConfig = match table.get("ecosystem") {
        None => EcosystemConfig::default(),
        Some(v) => serde_json::from_value(v.clone()).map_err(|e| CliError::Config(format!("[ecosystem]: {e}")))?,
    };
    ecosystem.validate().map_err(config_err)?;
    let voldemort: VoldemortConfig = match table.get("voldemort") {
        None => VoldemortConfig::default(),
        Some(v) => serde_json::from_value(v.clone()).map_err(|e| CliError::Config(format!("[voldemort]: {e}")))?,
    };
    voldemort.validate().map_err(config_err)?;
    Ok(LoadedConfig {
        scenarios,
        ecosystem,
        voldemort,
    })
}

/// Parses `args` (program name first) and runs; returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let rc = match RunConfig::try_parse_from(args) {
        Ok(rc) => rc,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 1 } else { 0 };
        }
    };
    run_command(&rc)
}

pub fn run_command(rc: &RunConfig) -> i32 {
    match execute(rc) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

impl RunConfig {
    pub fn output_format(&self) -> Format {
        self.format.unwrap_or_else(|| {
            let csv = self
                .out
                .as_deref()
                .and_then(Path::extension)
                .is_some_and(|e| e.eq_ignore_ascii_case("csv"));
            if csv {
                Format::Csv
            } else {
                Format::Json
            }
        })
    }
}

fn execute(rc: &RunConfig) -> Result<(), CliError> {
    let mut loaded = load_config(rc.config.as_deref())?;
    apply_overrides(&mut loaded.ecosystem, rc);
    loaded.ecosystem.validate().map_err(config_err)?;
    match &rc.command {
        Command::Scenario { name } => scenario_command(rc, &loaded, name),
        Command::Ecosystem => ecosystem_command(rc, &loaded),
        Command::Sweep { param, values } => sweep_command(rc, &loaded, param, values),
    }
}

fn apply_overrides(cfg: &mut EcosystemConfig, rc: &RunConfig) {
    if let Some(s) = rc.seed {
        cfg.seed = s;
    }
    if let Some(t) = rc.rounds {
        cfg.rounds = t;
    }
    if let Some(m) = rc.mode {
        cfg.mode = m.into();
    }
}

/// Writes the report to `--out` and the summary to stdout, or the report to
/// stdout and the summary to stderr.
fn emit(out: Option<&Path>, report: &str, summary: &str) -> Result<(), CliError> {
    match out {
        Some(p) => {
            write_file(p, report).map_err(|e| CliError::Runtime(e.to_string()))?;
            println!("{summary}");
        }
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout
                .write_all(report.as_bytes())
                .and_then(|_| stdout.flush())
                .map_err(|e| CliError::Runtime(format!("stdout: {e}")))?;
            eprintln!("{summary}");
        }
    }
    Ok(())
}

fn scenario_command(rc: &RunConfig, loaded: &LoadedConfig, name: &str) -> Result<(), CliError> {
    let report = run_named(name, loaded.scenarios.get(name)).map_err(run_err)?;
    let text = match rc.output_format() {
        Format::Json => to_json(&report),
        Format::Csv => scenario_csv(std::slice::from_ref(&report)),
    }
    .map_err(run_err)?;
    emit(rc.out.as_deref(), &text, &scenario_summary(&report))
}

fn outcome_text(r: &selfmod::scenarios::Regime) -> String {
    let parts: Vec<String> = r.outcome.iter().map(|(k, v)| format!("{k}={v}")).collect();
    format!("`{}` ({})", r.name, parts.join(", "))
}

pub fn scenario_summary(report: &ScenarioReport) -> String {
    let mut s = format!(
        "Scenario {}: baseline {} versus modified {}",
        report.scenario,
        outcome_text(&report.baseline),
        outcome_text(&report.modified)
    );
    for extra in &report.additional {
        s.push_str(&format!(", additional {}", outcome_text(extra)));
    }
    s.push_str(&format!("; gain under the original utility {:.6}", report.original_utility_gain));
    if !report.flags.is_empty() {
        let flags: Vec<String> = report.flags.iter().map(|(k, v)| format!("{k}={v}")).collect();
        s.push_str(&format!("; flags {}", flags.join(", ")));
    }
    s.push('.');
    s
}

fn simulate(cfg: &EcosystemConfig) -> Result<SimRun, CliError> {
    match cfg.mode {
        AdaptationMode::Cartel => run_cartel(cfg),
        _ => run_sim(cfg),
    }
    .map_err(run_err)
}

#[derive(Serialize)]
struct EcosystemReport<'a> {
    config: &'a EcosystemConfig,
    summary: &'a RunSummary,
    trajectory: &'a [selfmod::ecosystem::Metrics],
    voldemort: &'a VoldemortOutcome,
}

/// CSV rows cover completed rounds; round 0 is the initial state.
fn trajectory_text(run: &SimRun) -> Result<String, CliError> {
    trajectory_csv(&run.trajectory[1..]).map_err(run_err)
}

fn ecosystem_command(rc: &RunConfig, loaded: &LoadedConfig) -> Result<(), CliError> {
    let run = simulate(&loaded.ecosystem)?;
    let contest = voldemort_contest(&loaded.voldemort).map_err(run_err)?;
    let text = match rc.output_format() {
        Format::Csv => trajectory_text(&run)?,
        Format::Json => to_json(&EcosystemReport {
            config: &loaded.ecosystem,
            summary: &run.summary,
            trajectory: &run.trajectory,
            voldemort: &contest,
        })
        .map_err(run_err)?,
    };
    let summary = format!("{} {}", ecosystem_summary(&run.summary), voldemort_summary(&contest));
    emit(rc.out.as_deref(), &text, &summary)
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map(|x| format!("{x:.4}")).unwrap_or_else(|| "n/a".into())
}

pub fn ecosystem_summary(s: &RunSummary) -> String {
    let mode = serde_json::to_value(s.mode).ok().and_then(|v| v.as_str().map(String::from)).unwrap_or_default();
    let mut text = format!(
        "Ecosystem ({mode}, seed {}): {} of {} rounds completed",
        s.seed, s.rounds_completed, s.rounds_requested
    );
    match s.extinct_at {
        Some(t) => text.push_str(&format!(", population extinct at round {t}")),
        None => text.push_str(&format!(
            ", {} agents alive with mean influence weight {}",
            s.final_alive,
            fmt_opt(s.final_mean_p)
        )),
    }
    text.push_str(&format!(
        "; utility dispersion {:.4} to {:.4}; smallest goal weight {:.4}; {} deaths",
        s.initial_dispersion, s.final_dispersion, s.min_goal_weight, s.total_deaths
    ));
    if let Some(f) = s.cap_held_fraction {
        text.push_str(&format!("; {} cheats, cap held in {:.1}% of rounds", s.total_cheats, 100.0 * f));
    }
    text.push('.');
    text
}

fn voldemort_summary(v: &VoldemortOutcome) -> String {
    format!(
        "Mutilation contest: mean level {:.3} with {} of {} surviving ({}converged after {} iterations).",
        v.mean_level,
        v.survivors.iter().filter(|s| **s).count(),
        v.levels.len(),
        if v.converged { "" } else { "not " },
        v.iterations
    )
}

enum Target {
    Ecosystem(String),
    Scenario(String, String),
}

/// Splits a dotted sweep key into its section and a JSON pointer.
fn sweep_target(key: &str) -> Result<Target, CliError> {
    let pointer = |rest: &[&str]| format!("/{}", rest.join("/"));
    let parts: Vec<&str> = key.split('.').collect();
    match parts.as_slice() {
        ["ecosystem", rest @ ..] if !rest.is_empty() => Ok(Target::Ecosystem(pointer(rest))),
        ["scenario", name, rest @ ..] if !rest.is_empty() => Ok(Target::Scenario(name.to_string(), pointer(rest))),
        _ => Err(CliError::Config(format!(
            "sweep key `{key}` must be ecosystem.<field> or scenario.<name>.<field>"
        ))),
    }
}

fn with_value(base: &Value, pointer: &str, key: &str, value: &Value) -> Result<Value, CliError> {
    let mut v = base.clone();
    let slot = v
        .pointer_mut(pointer)
        .ok_or_else(|| CliError::Config(format!("sweep key `{key}` does not name a config field")))?;
    *slot = value.clone();
    Ok(v)
}

fn parse_value(raw: &str) -> Value {
    let raw = raw.trim();
    serde_json::from_str(raw).unwrap_or_else(|_| Value::String(raw.to_string()))
}

/// `foo/bar.csv`, run 2 → `foo/bar.run2.csv`.
fn run_path(out: &Path, i: usize, format: Format) -> PathBuf {
    let stem = out.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_else(|| "sweep".into());
    out.with_file_name(format!("{stem}.run{i}.{}", format.extension()))
}

#[derive(Serialize)]
struct SweepRow {
    param: String,
    value: String,
    seed: u64,
    rounds_completed: usize,
    extinct_at: Option<usize>,
    final_alive: usize,
    final_mean_p: Option<f64>,
    final_dispersion: f64,
    min_goal_weight: f64,
    total_deaths: usize,
    total_cheats: usize,
}

#[derive(Serialize)]
struct SweepEntry<'a, R: Serialize> {
    param: &'a str,
    value: &'a Value,
    result: &'a R,
}

fn sweep_command(rc: &RunConfig, loaded: &LoadedConfig, key: &str, raw: &[String]) -> Result<(), CliError> {
    let values: Vec<Value> = raw.iter().map(|r| parse_value(r)).collect();
    match sweep_target(key)? {
        Target::Ecosystem(ptr) => {
            let base = serde_json::to_value(&loaded.ecosystem).map_err(config_err)?;
            // Every configuration is checked before any run starts.
            let configs = values
                .iter()
                .map(|v| {
                    let cfg: EcosystemConfig = serde_json::from_value(with_value(&base, &ptr, key, v)?)
                        .map_err(|e| CliError::Config(format!("{key}={v}: {e}")))?;
                    cfg.validate().map_err(|e| CliError::Config(format!("{key}={v}: {e}")))?;
                    Ok(cfg)
                })
                .collect::<Result<Vec<_>, CliError>>()?;
            let runs = configs.par_iter().map(simulate).collect::<Result<Vec<_>, _>>()?;
            if let Some(out) = rc.out.as_deref() {
                for (i, run) in runs.iter().enumerate() {
                    let text = match rc.output_format() {
                        Format::Csv => trajectory_text(run)?,
                        Format::Json => to_json(run).map_err(run_err)?,
                    };
                    write_file(&run_path(out, i, rc.output_format()), &text).map_err(|e| CliError::Runtime(e.to_string()))?;
                }
            }
            let text = match rc.output_format() {
                Format::Csv => {
                    let rows: Vec<SweepRow> = runs
                        .iter()
                        .zip(raw)
                        .map(|(run, value)| {
                            let s = &run.summary;
                            SweepRow {
                                param: key.to_string(),
                                value: value.trim().to_string(),
                                seed: s.seed,
                                rounds_completed: s.rounds_completed,
                                extinct_at: s.extinct_at,
                                final_alive: s.final_alive,
                                final_mean_p: s.final_mean_p,
                                final_dispersion: s.final_dispersion,
                                min_goal_weight: s.min_goal_weight,
                                total_deaths: s.total_deaths,
                                total_cheats: s.total_cheats,
                            }
                        })
                        .collect();
                    records_csv(&rows).map_err(run_err)?
                }
                Format::Json => {
                    let entries: Vec<SweepEntry<RunSummary>> = runs
                        .iter()
                        .zip(&values)
                        .map(|(run, value)| SweepEntry {
                            param: key,
                            value,
                            result: &run.summary,
                        })
                        .collect();
                    to_json(&entries).map_err(run_err)?
                }
            };
            let lines: Vec<String> = runs
                .iter()
                .zip(raw)
                .map(|(run, v)| format!("{key}={}: {}", v.trim(), ecosystem_summary(&run.summary)))
                .collect();
            emit(rc.out.as_deref(), &text, &lines.join(" "))
        }
        Target::Scenario(name, ptr) => {
            let base = loaded
                .scenarios
                .get(&name)
                .ok_or_else(|| CliError::Config(format!("unknown scenario `{name}` in sweep key `{key}`")))?;
            let configs = values
                .iter()
                .map(|v| {
                    let cfg = with_value(base, &ptr, key, v)?;
                    validate_named(&name, Some(&cfg)).map_err(|e| CliError::Config(format!("{key}={v}: {e}")))
                })
                .collect::<Result<Vec<_>, CliError>>()?;
            let reports = configs
                .par_iter()
                .map(|cfg| run_named(&name, Some(cfg)).map_err(run_err))
                .collect::<Result<Vec<_>, _>>()?;
            if let Some(out) = rc.out.as_deref() {
                for (i, report) in reports.iter().enumerate() {
                    let text = match rc.output_format() {
                        Format::Csv => scenario_csv(std::slice::from_ref(report)),
                        Format::Json => to_json(report),
                    }
                    .map_err(run_err)?;
                    write_file(&run_path(out, i, rc.output_format()), &text).map_err(|e| CliError::Runtime(e.to_string()))?;
                }
            }
            let labels: Vec<String> = raw.iter().map(|r| r.trim().to_string()).collect();
            let text = match rc.output_format() {
                Format::Csv => scenario_csv_labeled(Some((key, &labels)), &reports),
                Format::Json => {
                    let entries: Vec<SweepEntry<ScenarioReport>> = reports
                        .iter()
                        .zip(&values)
                        .map(|(report, value)| SweepEntry {
                            param: key,
                            value,
                            result: report,
                        })
                        .collect();
                    to_json(&entries)
                }
            }
            .map_err(run_err)?;
            let lines: Vec<String> = reports
                .iter()
                .zip(&labels)
                .map(|(r, v)| format!("{key}={v}: {}", scenario_summary(r)))
                .collect();
            emit(rc.out.as_deref(), &text, &lines.join(" "))
        }
    }
}
