//! Evaluation protocol: hide known cells of a complete table at random,
//! complete them, and compare against the original.

use std::fmt;
use std::path::Path;
use std::str::FromStr;
use std::time::{Duration, Instant};

use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::baseline::{apriori, complete_armvc, derive_rules};
use crate::basis::{build_basis, max_premise_len, project};
use crate::completion::{complete, Completion, CompletionOptions};
use crate::context::{IncompleteContext, RelationalTable};
use crate::error::{Error, Result};
use crate::miner::{mine_generators, Minsup};

/// Which attributes receive missing values.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum AttributeSelection {
    All,
    /// The first `k` attributes of the schema.
    First(usize),
    /// `k` attributes drawn with the injection seed.
    Random(usize),
    Named(Vec<String>),
}

impl fmt::Display for AttributeSelection {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AttributeSelection::All => write!(f, "all"),
            AttributeSelection::First(k) => write!(f, "{k}"),
            AttributeSelection::Random(k) => write!(f, "random:{k}"),
            AttributeSelection::Named(names) => write!(f, "{}", names.join("+")),
        }
    }
}

impl FromStr for AttributeSelection {
    type Err = Error;

    /// `all`, `k`, `random:k`, or `name+name+...`.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s == "all" {
            return Ok(AttributeSelection::All);
        }
        if let Some(k) = s.strip_prefix("random:") {
            return k
                .parse()
                .map(AttributeSelection::Random)
                .map_err(|_| Error::Config(format!("bad attribute count `{s}`")));
        }
        if let Ok(k) = s.parse() {
            return Ok(AttributeSelection::First(k));
        }
        Ok(AttributeSelection::Named(s.split('+').map(|n| n.trim().to_string()).collect()))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct InjectionSpec {
    pub targets: AttributeSelection,
    /// Fraction of rows hidden per target attribute, in `(0, 1)`.
    pub rate: f64,
    pub seed: u64,
}

fn resolve_targets(table: &RelationalTable, targets: &AttributeSelection, rng: &mut ChaCha8Rng) -> Result<Vec<usize>> {
    let n = table.n_attributes();
    let check = |k: usize| {
        if k == 0 || k > n {
            Err(Error::Injection(format!("attribute count {k} outside 1..={n}")))
        } else {
            Ok(k)
        }
    };
    let mut out = match targets {
        AttributeSelection::All => (0..n).collect(),
        AttributeSelection::First(k) => (0..check(*k)?).collect(),
        AttributeSelection::Random(k) => sample(rng, n, check(*k)?).into_vec(),
        AttributeSelection::Named(names) => names
            .iter()
            .map(|name| {
                table
                    .attribute_index(name)
                    .ok_or_else(|| Error::Injection(format!("unknown attribute `{name}`")))
            })
            .collect::<Result<Vec<_>>>()?,
    };
    out.sort_unstable();
    out.dedup();
    if out.is_empty() {
        return Err(Error::Injection("no target attribute".into()));
    }
    Ok(out)
}

/// Cells hidden per attribute: `rate × rows`, rounded half up.
pub fn cells_per_attribute(rate: f64, n_rows: usize) -> usize {
    (rate * n_rows as f64 + 0.5 + 1e-9).floor() as usize
}

/// Hides `round(rate × rows)` cells in each target column, uniformly at random.
pub fn inject(table: &RelationalTable, spec: &InjectionSpec) -> Result<RelationalTable> {
    if !table.is_complete() {
        return Err(Error::Injection("reference table already has missing cells".into()));
    }
    if !(spec.rate > 0.0 && spec.rate < 1.0) {
        return Err(Error::Injection(format!("rate must be in (0, 1), got {}", spec.rate)));
    }
    let count = cells_per_attribute(spec.rate, table.n_rows());
    if count == 0 {
        return Err(Error::Injection(format!(
            "rate {} of {} rows hides no cell",
            spec.rate,
            table.n_rows()
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let targets = resolve_targets(table, &spec.targets, &mut rng)?;
    let mut out = table.clone();
    for attr in targets {
        for row in sample(&mut rng, table.n_rows(), count).into_vec() {
            out.set_cell(row, attr, None);
        }
    }
    Ok(out)
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct EvalReport {
    /// Percentage of missing cells that were filled.
    pub completion_rate: Option<f64>,
    /// Percentage of filled cells equal to the reference; `None` if nothing was filled.
    pub precision: Option<f64>,
    pub n_missing: usize,
    pub n_completed: usize,
    pub n_correct: usize,
    pub n_conflicts: usize,
    pub rule_count: usize,
    pub max_premise: usize,
    pub mine_ms: f64,
    pub complete_ms: f64,
}

/// Scores a completed table against the reference it was derived from.
pub fn evaluate(
    reference: &RelationalTable,
    completed: &RelationalTable,
    injected: &RelationalTable,
    n_conflicts: usize,
) -> Result<EvalReport> {
    let names = |t: &RelationalTable| t.schema().iter().map(|a| a.name.clone()).collect::<Vec<_>>();
    for (label, other) in [("completed", completed), ("injected", injected)] {
        if other.n_rows() != reference.n_rows() || names(other) != names(reference) {
            return Err(Error::Mismatch(format!(
                "{label} table has shape {}x{}, reference {}x{} (or different attribute names)",
                other.n_rows(),
                other.n_attributes(),
                reference.n_rows(),
                reference.n_attributes()
            )));
        }
    }
    let mut report = EvalReport {
        n_conflicts,
        ..EvalReport::default()
    };
    for row in 0..reference.n_rows() {
        for attr in 0..reference.n_attributes() {
            match injected.label(row, attr) {
                Some(known) => {
                    if completed.label(row, attr) != Some(known) {
                        return Err(Error::Mismatch(format!(
                            "row {} attribute `{}`: known value changed",
                            row + 1,
                            reference.schema()[attr].name
                        )));
                    }
                }
                None => {
                    report.n_missing += 1;
                    if let Some(filled) = completed.label(row, attr) {
                        report.n_completed += 1;
                        if reference.label(row, attr) == Some(filled) {
                            report.n_correct += 1;
                        }
                    }
                }
            }
        }
    }
    report.completion_rate =
        (report.n_missing > 0).then(|| report.n_completed as f64 / report.n_missing as f64 * 100.0);
    report.precision =
        (report.n_completed > 0).then(|| report.n_correct as f64 / report.n_completed as f64 * 100.0);
    Ok(report)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Engine {
    Gbar,
    Armvc,
}

impl fmt::Display for Engine {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Engine::Gbar => "gbar",
            Engine::Armvc => "armvc",
        })
    }
}

impl FromStr for Engine {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "gbar" => Ok(Engine::Gbar),
            "armvc" => Ok(Engine::Armvc),
            other => Err(Error::Config(format!("unknown engine `{other}` (expected gbar or armvc)"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EngineConfig {
    pub minsup: Minsup,
    /// Only used by the Apriori engine.
    pub minconf: f64,
    pub cascade: bool,
}

#[derive(Clone, Debug)]
pub struct EngineRun {
    pub completion: Completion,
    pub rule_count: usize,
    pub max_premise: usize,
    pub mine_time: Duration,
}

/// Mines rules on the incomplete table and completes it with one engine.
pub fn run_engine(engine: Engine, ctx: &IncompleteContext, config: &EngineConfig) -> Result<EngineRun> {
    let minsup = config.minsup.to_absolute(ctx.n_transactions())?;
    let start = Instant::now();
    match engine {
        Engine::Gbar => {
            let entries = mine_generators(ctx, minsup)?;
            let rules = project(&build_basis(&entries, ctx), ctx);
            let mine_time = start.elapsed();
            let completion = complete(ctx, &rules, CompletionOptions { cascade: config.cascade });
            Ok(EngineRun {
                rule_count: rules.len(),
                max_premise: max_premise_len(rules.iter().map(|r| &r.premise)),
                completion,
                mine_time,
            })
        }
        Engine::Armvc => {
            let rules = derive_rules(&apriori(ctx, minsup)?, ctx, config.minconf);
            let mine_time = start.elapsed();
            let completion = complete_armvc(ctx, &rules);
            Ok(EngineRun {
                rule_count: rules.len(),
                max_premise: max_premise_len(rules.iter().map(|r| &r.premise)),
                completion,
                mine_time,
            })
        }
    }
}

/// Evaluates one engine run against the reference.
pub fn report_run(reference: &RelationalTable, injected: &RelationalTable, run: &EngineRun) -> Result<EvalReport> {
    let mut report = evaluate(reference, &run.completion.table, injected, run.completion.conflicts())?;
    report.rule_count = run.rule_count;
    report.max_premise = run.max_premise;
    report.mine_ms = run.mine_time.as_secs_f64() * 1e3;
    report.complete_ms = run.completion.elapsed.as_secs_f64() * 1e3;
    Ok(report)
}

#[derive(Clone, Debug, PartialEq)]
pub struct BenchConfig {
    pub dataset: String,
    pub delimiter: u8,
    pub minsups: Vec<Minsup>,
    pub rates: Vec<f64>,
    pub attributes: Vec<AttributeSelection>,
    pub engines: Vec<Engine>,
    pub seeds: Vec<u64>,
    pub minconf: f64,
    pub cascade: bool,
}

impl Default for BenchConfig {
    fn default() -> Self {
        BenchConfig {
            dataset: String::new(),
            delimiter: b',',
            minsups: vec![Minsup::Percent(10.0)],
            rates: vec![0.05, 0.10, 0.15, 0.20],
            attributes: vec![AttributeSelection::All],
            engines: vec![Engine::Gbar, Engine::Armvc],
            seeds: vec![0],
            minconf: 1.0,
            cascade: false,
        }
    }
}

fn split_list(value: &str) -> impl Iterator<Item = &str> {
    value.split(',').map(str::trim).filter(|s| !s.is_empty())
}

impl BenchConfig {
    /// Parses a flat `key = value` file. Lists are comma-separated; `#` starts a comment.
    ///
    /// Keys: `dataset`, `delimiter`, `minsup`, `rate`, `attributes`, `engine`,
    /// `seed`, `minconf`, `cascade`. A relative `dataset` path is resolved
    /// against `base_dir`.
    pub fn parse(text: &str, base_dir: Option<&Path>) -> Result<Self> {
        let mut config = BenchConfig::default();
        for (n, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let err = |msg: String| Error::Config(format!("line {}: {msg}", n + 1));
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| err(format!("expected key = value, got `{line}`")))?;
            let (key, value) = (key.trim(), value.trim());
            match key {
                "dataset" => {
                    config.dataset = match base_dir {
                        Some(dir) if Path::new(value).is_relative() => dir.join(value).to_string_lossy().into_owned(),
                        _ => value.to_string(),
                    }
                }
                "delimiter" => {
                    let bytes = value.as_bytes();
                    config.delimiter = match value {
                        "tab" | "\\t" => b'\t',
                        _ if bytes.len() == 1 => bytes[0],
                        _ => return Err(err(format!("delimiter must be one byte, got `{value}`"))),
                    }
                }
                "minsup" => config.minsups = split_list(value).map(str::parse).collect::<Result<_>>().map_err(|e| err(e.to_string()))?,
                "rate" => {
                    config.rates = split_list(value)
                        .map(|v| v.parse::<f64>().map_err(|_| err(format!("bad rate `{v}`"))))
                        .collect::<Result<_>>()?
                }
                "attributes" => config.attributes = split_list(value).map(str::parse).collect::<Result<_>>()?,
                "engine" => config.engines = split_list(value).map(str::parse).collect::<Result<_>>()?,
                "seed" => {
                    config.seeds = split_list(value)
                        .map(|v| v.parse::<u64>().map_err(|_| err(format!("bad seed `{v}`"))))
                        .collect::<Result<_>>()?
                }
                "minconf" => config.minconf = value.parse().map_err(|_| err(format!("bad minconf `{value}`")))?,
                "cascade" => config.cascade = value.parse().map_err(|_| err(format!("bad cascade `{value}`")))?,
                other => return Err(err(format!("unknown key `{other}`"))),
            }
        }
        if config.dataset.is_empty() {
            return Err(Error::Config("missing `dataset`".into()));
        }
        for (name, empty) in [
            ("minsup", config.minsups.is_empty()),
            ("rate", config.rates.is_empty()),
            ("attributes", config.attributes.is_empty()),
            ("engine", config.engines.is_empty()),
            ("seed", config.seeds.is_empty()),
        ] {
            if empty {
                return Err(Error::Config(format!("`{name}` needs at least one value")));
            }
        }
        Ok(config)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BenchRow {
    pub engine: Engine,
    pub minsup: String,
    pub rate: f64,
    pub attributes: String,
    pub seed: u64,
    #[serde(flatten)]
    pub report: EvalReport,
}

pub const BENCH_HEADER: &str = "engine;minsup;rate;attributes;seed;n_missing;n_completed;n_correct;n_conflicts;completion;precision;rule_count;max_premise;mine_ms;complete_ms";

fn opt_decimal(v: Option<f64>) -> String {
    v.map_or_else(|| "null".to_string(), crate::basis::format_decimal)
}

impl BenchRow {
    pub fn to_csv_line(&self) -> String {
        let r = &self.report;
        format!(
            "{};{};{};{};{};{};{};{};{};{};{};{};{};{:.3};{:.3}",
            self.engine,
            self.minsup,
            self.rate,
            self.attributes,
            self.seed,
            r.n_missing,
            r.n_completed,
            r.n_correct,
            r.n_conflicts,
            opt_decimal(r.completion_rate),
            opt_decimal(r.precision),
            r.rule_count,
            r.max_premise,
            r.mine_ms,
            r.complete_ms
        )
    }
}

pub fn format_minsup(m: Minsup) -> String {
    match m {
        Minsup::Absolute(n) => n.to_string(),
        Minsup::Percent(p) => format!("{p}%"),
    }
}

/// Runs the grid in order minsup → attributes → rate → seed → engine. Every
/// engine of a cell completes the same injected table.
pub fn bench(reference: &RelationalTable, config: &BenchConfig) -> Result<Vec<BenchRow>> {
    let mut rows = Vec::new();
    for &minsup in &config.minsups {
        for attributes in &config.attributes {
            for &rate in &config.rates {
                for &seed in &config.seeds {
                    let spec = InjectionSpec {
                        targets: attributes.clone(),
                        rate,
                        seed,
                    };
                    let injected = inject(reference, &spec)?;
                    let ctx = IncompleteContext::encode(&injected);
                    let engine_config = EngineConfig {
                        minsup,
                        minconf: config.minconf,
                        cascade: config.cascade,
                    };
                    for &engine in &config.engines {
                        let run = run_engine(engine, &ctx, &engine_config)?;
                        rows.push(BenchRow {
                            engine,
                            minsup: format_minsup(minsup),
                            rate,
                            attributes: attributes.to_string(),
                            seed,
                            report: report_run(reference, &injected, &run)?,
                        });
                    }
                }
            }
        }
    }
    Ok(rows)
}
