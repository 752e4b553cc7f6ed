use std::fs::{self, File};
use std::io::{self, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use mvc_core::basis::{build_basis, project, read_rules_csv, write_rules_csv};
use mvc_core::completion::{complete, count_conflicts_in_csv, write_decisions_csv, CompletionOptions};
use mvc_core::evaluation::{
    bench, evaluate, inject, run_engine, AttributeSelection, BenchConfig, Engine, EngineConfig, EvalReport,
    InjectionSpec, BENCH_HEADER,
};
use mvc_core::miner::write_generators_csv;
use mvc_core::{mine_generators, IncompleteContext, Minsup, RelationalTable};

#[derive(Parser)]
#[command(name = "mvc", version, about = "Missing-value completion with generic association rules")]
struct Cli {
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Field delimiter of input and output tables: a single character or `tab`.
    #[arg(long, global = true, default_value = ",", value_parser = parse_delimiter)]
    delimiter: u8,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Hide cells of a complete table at random.
    Inject {
        input: PathBuf,
        /// Fraction of rows hidden in each target attribute.
        #[arg(long)]
        rate: f64,
        /// `all`, a count k (first k attributes), `random:k`, or `name+name`.
        #[arg(long, default_value = "all")]
        attributes: AttributeSelection,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Mine frequent minimal generators and their pseudo-closures.
    Mine {
        input: PathBuf,
        #[command(flatten)]
        minsup: MinsupArg,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Write the generic basis of pseudo-exact rules.
    Rules {
        input: PathBuf,
        #[command(flatten)]
        minsup: MinsupArg,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Fill missing cells of a table.
    Complete {
        input: PathBuf,
        #[arg(long, default_value = "gbar")]
        engine: Engine,
        #[command(flatten)]
        minsup: MinsupArg,
        /// Confidence threshold of the Apriori engine.
        #[arg(long, default_value_t = 1.0)]
        minconf: f64,
        /// Use a rules file written by `rules` instead of mining.
        #[arg(long)]
        rules_file: Option<PathBuf>,
        /// Let filled cells count as known for later cells of the same row.
        #[arg(long)]
        cascade: bool,
        /// Where to write the per-cell decisions.
        #[arg(long)]
        decisions: Option<PathBuf>,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Compare a completed table with the reference.
    Evaluate {
        #[arg(long)]
        reference: PathBuf,
        #[arg(long)]
        injected: PathBuf,
        #[arg(long)]
        completed: PathBuf,
        /// Decisions file, used to count conflicts.
        #[arg(long)]
        decisions: Option<PathBuf>,
        #[arg(long)]
        json: bool,
    },
    /// Run an injection/completion grid described by a config file.
    Bench {
        config: PathBuf,
        #[arg(long)]
        json: bool,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
}

#[derive(Args)]
struct MinsupArg {
    /// Absolute count, or a percentage such as `10%`.
    #[arg(long, default_value = "1")]
    minsup: Minsup,
}

enum Failure {
    Usage(String),
    Data(String),
}

impl From<mvc_core::Error> for Failure {
    fn from(e: mvc_core::Error) -> Self {
        Failure::Data(e.to_string())
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Data(e.to_string())
    }
}

fn parse_delimiter(s: &str) -> Result<u8, String> {
    match s {
        "tab" | "\\t" | "\t" => Ok(b'\t'),
        _ if s.len() == 1 => Ok(s.as_bytes()[0]),
        _ => Err(format!("delimiter must be one byte or `tab`, got `{s}`")),
    }
}

fn open(path: &Path) -> Result<File, Failure> {
    File::open(path).map_err(|e| Failure::Data(format!("{}: {e}", path.display())))
}

fn read_table(path: &Path, delimiter: u8) -> Result<RelationalTable, Failure> {
    RelationalTable::read_csv(open(path)?, delimiter).map_err(|e| Failure::Data(format!("{}: {e}", path.display())))
}

fn sink(output: &Option<PathBuf>) -> Result<Box<dyn Write>, Failure> {
    Ok(match output {
        Some(path) => Box::new(BufWriter::new(
            File::create(path).map_err(|e| Failure::Data(format!("{}: {e}", path.display())))?,
        )),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn print_report(report: &EvalReport, json: bool) -> Result<(), Failure> {
    let mut out = io::stdout().lock();
    if json {
        let text = serde_json::to_string_pretty(report).map_err(|e| Failure::Data(e.to_string()))?;
        writeln!(out, "{text}")?;
    } else {
        let pct = |v: Option<f64>| v.map_or("null".to_string(), |v| format!("{v:.2}"));
        writeln!(out, "completion_rate: {}", pct(report.completion_rate))?;
        writeln!(out, "precision: {}", pct(report.precision))?;
        writeln!(out, "n_missing: {}", report.n_missing)?;
        writeln!(out, "n_completed: {}", report.n_completed)?;
        writeln!(out, "n_correct: {}", report.n_correct)?;
        writeln!(out, "n_conflicts: {}", report.n_conflicts)?;
    }
    Ok(())
}

fn run(cli: Cli) -> Result<(), Failure> {
    if let Some(n) = cli.threads {
        if n == 0 {
            return Err(Failure::Usage("--threads must be at least 1".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Failure::Usage(e.to_string()))?;
    }
    let delimiter = cli.delimiter;
    match cli.command {
        Command::Inject {
            input,
            rate,
            attributes,
            seed,
            output,
        } => {
            let table = read_table(&input, delimiter)?;
            let spec = InjectionSpec {
                targets: attributes,
                rate,
                seed,
            };
            inject(&table, &spec)?.write_csv(sink(&output)?, delimiter)?;
        }
        Command::Mine { input, minsup, output } => {
            let ctx = IncompleteContext::encode(&read_table(&input, delimiter)?);
            let entries = mine_generators(&ctx, minsup.minsup.to_absolute(ctx.n_transactions())?)?;
            write_generators_csv(&ctx, &entries, sink(&output)?)?;
        }
        Command::Rules { input, minsup, output } => {
            let ctx = IncompleteContext::encode(&read_table(&input, delimiter)?);
            let entries = mine_generators(&ctx, minsup.minsup.to_absolute(ctx.n_transactions())?)?;
            write_rules_csv(&ctx, &build_basis(&entries, &ctx), sink(&output)?)?;
        }
        Command::Complete {
            input,
            engine,
            minsup,
            minconf,
            rules_file,
            cascade,
            decisions,
            output,
        } => {
            if !(0.0..=1.0).contains(&minconf) {
                return Err(Failure::Usage(format!("--minconf must be in [0, 1], got {minconf}")));
            }
            let ctx = IncompleteContext::encode(&read_table(&input, delimiter)?);
            let completion = match (engine, rules_file) {
                (Engine::Gbar, Some(path)) => {
                    let rules = read_rules_csv(&ctx, BufReader::new(open(&path)?))
                        .map_err(|e| Failure::Data(format!("{}: {e}", path.display())))?;
                    complete(&ctx, &project(&rules, &ctx), CompletionOptions { cascade })
                }
                (Engine::Armvc, Some(_)) => {
                    return Err(Failure::Usage("--rules-file only applies to --engine gbar".into()))
                }
                (engine, None) => {
                    let config = EngineConfig {
                        minsup: minsup.minsup,
                        minconf,
                        cascade,
                    };
                    run_engine(engine, &ctx, &config)?.completion
                }
            };
            if let Some(path) = decisions {
                write_decisions_csv(&ctx, &completion.decisions, sink(&Some(path))?)?;
            }
            completion.table.write_csv(sink(&output)?, delimiter)?;
        }
        Command::Evaluate {
            reference,
            injected,
            completed,
            decisions,
            json,
        } => {
            let reference = read_table(&reference, delimiter)?;
            let injected = read_table(&injected, delimiter)?;
            let completed = read_table(&completed, delimiter)?;
            let conflicts = match decisions {
                Some(path) => count_conflicts_in_csv(&fs::read_to_string(&path)?)
                    .map_err(|e| Failure::Data(format!("{}: {e}", path.display())))?,
                None => 0,
            };
            print_report(&evaluate(&reference, &completed, &injected, conflicts)?, json)?;
        }
        Command::Bench { config, json, output } => {
            let text = fs::read_to_string(&config).map_err(|e| Failure::Data(format!("{}: {e}", config.display())))?;
            let config = BenchConfig::parse(&text, config.parent())
                .map_err(|e| Failure::Data(format!("{}: {e}", config.display())))?;
            let table = read_table(Path::new(&config.dataset), config.delimiter)?;
            let rows = bench(&table, &config)?;
            let mut out = sink(&output)?;
            if json {
                let text = serde_json::to_string_pretty(&rows).map_err(|e| Failure::Data(e.to_string()))?;
                writeln!(out, "{text}")?;
            } else {
                writeln!(out, "{BENCH_HEADER}")?;
                for row in &rows {
                    writeln!(out, "{}", row.to_csv_line())?;
                }
            }
            out.flush()?;
        }
    }
    Ok(())
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
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(msg)) => {
            eprintln!("mvc: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Data(msg)) => {
            eprintln!("mvc: {}", msg.lines().next().unwrap_or_default());
            ExitCode::from(2)
        }
    }
}
