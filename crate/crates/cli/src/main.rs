//! `hplab`: exact complete-mapping counts, staged asymptotic predictions and
//! verification suites from the command line.

mod render;

use std::fs;
use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use hplab::counting::{
    count_complete_mappings_limited, count_triple_solutions_search, DEFAULT_CM_LIMIT,
    DEFAULT_TRIPLE_LIMIT,
};
use hplab::expansion::singular_series_prediction;
use hplab::report::prediction_report;
use hplab::verify::{run_suites, Suite, VerifyOptions, CORPUS};
use hplab::{FiniteGroup, GroupSpec, TargetFunction};

use crate::render::{CorpusRow, CountReport, InfoReport, TripleReport};

const THREADS_ENV: &str = "HPLAB_THREADS";
const MAX_ORDER: usize = 3;

#[derive(Debug, Parser)]
#[command(name = "hplab", version, about = "Complete mappings of finite groups")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[arg(long, value_enum, global = true, default_value_t = Format::Text)]
    format: Format,
    /// Write the report here instead of standard output.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Worker threads; the HPLAB_THREADS environment variable takes
    /// precedence when set.
    #[arg(long, global = true)]
    threads: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Text,
    Json,
    Csv,
}

#[derive(Debug, Args)]
struct GroupArg {
    /// `name:params` (e.g. `cyclic:7`, `dihedral:8`, `cyclic:3*cyclic:3`)
    /// or `file:path` for a Cayley table.
    #[arg(long)]
    group: String,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Group invariants and both forms of the Hall-Paige condition.
    Info(GroupArg),
    /// Exact number of complete mappings, or of triple solutions for `--f`.
    Count {
        #[command(flatten)]
        group: GroupArg,
        /// File with one line of 0-based element indices, the target f.
        #[arg(long)]
        f: Option<PathBuf>,
        /// Largest group order for the exhaustive search.
        #[arg(long)]
        limit: Option<usize>,
    },
    /// Staged predictions for orders 0..=ORDER, with the exact count when
    /// the group is small enough.
    Predict {
        #[command(flatten)]
        group: GroupArg,
        #[arg(long, default_value_t = 1)]
        order: usize,
        /// Largest group order for which the exact count is included.
        #[arg(long, default_value_t = DEFAULT_CM_LIMIT)]
        limit: usize,
    },
    /// Run named verification suites (comma-separated, or `all`).
    Verify {
        #[arg(long, default_value = "all")]
        suite: String,
        /// Largest group order used by the exhaustive physical-side checks.
        #[arg(long, default_value_t = 5)]
        max_n: usize,
    },
    /// Predictions and exact counts over the built-in corpus.
    Corpus {
        #[arg(long, default_value_t = 1)]
        order: usize,
        /// Skip corpus groups larger than this.
        #[arg(long)]
        max_n: Option<usize>,
        #[arg(long, default_value_t = DEFAULT_CM_LIMIT)]
        limit: usize,
    },
}

#[derive(Debug)]
enum Failure {
    /// Bad input or a computation refused by its limits.
    Usage(String),
    /// A verification suite ran and some identity failed.
    Verification(usize),
}

impl From<hplab::Error> for Failure {
    fn from(e: hplab::Error) -> Self {
        Failure::Usage(e.to_string())
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Usage(e.to_string())
    }
}

fn load_group(source: &str) -> Result<FiniteGroup, Failure> {
    match source.strip_prefix("file:") {
        Some(path) => {
            let text = fs::read_to_string(path)
                .map_err(|e| Failure::Usage(format!("cannot read {path}: {e}")))?;
            let name = PathBuf::from(path)
                .file_stem()
                .map(|s| s.to_string_lossy().into_owned())
                .unwrap_or_else(|| path.to_string());
            Ok(FiniteGroup::from_cayley_text(&text)?.with_name(name))
        }
        None => Ok(source.parse::<GroupSpec>()?.build()?),
    }
}

fn configure_threads(flag: Option<usize>) -> Result<(), Failure> {
    let from_env = match std::env::var(THREADS_ENV) {
        Ok(v) => Some(
            v.trim()
                .parse::<usize>()
                .map_err(|_| Failure::Usage(format!("{THREADS_ENV}=`{v}` is not a count")))?,
        ),
        Err(_) => None,
    };
    if let Some(k) = from_env.or(flag) {
        if k == 0 {
            return Err(Failure::Usage("thread count must be positive".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(k)
            .build_global()
            .map_err(|e| Failure::Usage(e.to_string()))?;
    }
    Ok(())
}

fn check_order(order: usize) -> Result<(), Failure> {
    if order > MAX_ORDER {
        return Err(hplab::Error::LimitExceeded {
            what: "expansion order",
            value: order as u64,
            limit: MAX_ORDER as u64,
        }
        .into());
    }
    Ok(())
}

fn run(cli: &Cli) -> Result<String, Failure> {
    configure_threads(cli.threads)?;
    let fmt = cli.format;
    match &cli.command {
        Command::Info(arg) => {
            let g = load_group(&arg.group)?;
            render::info(&InfoReport::new(&g), fmt)
        }
        Command::Count { group, f, limit } => {
            let g = load_group(&group.group)?;
            let t = Instant::now();
            let cm = count_complete_mappings_limited(&g, limit.unwrap_or(DEFAULT_CM_LIMIT))?;
            let millis = t.elapsed().as_secs_f64() * 1e3;
            let triple = match f {
                Some(path) => {
                    let text = fs::read_to_string(path)?;
                    let f = TargetFunction::from_text(&g, &text)?;
                    let count = count_triple_solutions_search(
                        &g,
                        &f,
                        limit.unwrap_or(DEFAULT_TRIPLE_LIMIT),
                    )?;
                    let pred = singular_series_prediction(&g, &f, g.order())?;
                    Some(TripleReport {
                        target: f.to_text().trim().to_string(),
                        count: count.to_string(),
                        singular_series: pred.singular_series,
                        prediction: pred.value,
                        product_condition: pred.condition_holds,
                    })
                }
                None => None,
            };
            render::count(
                &CountReport {
                    group: g.name().to_string(),
                    n: g.order(),
                    complete_mappings: cm.to_string(),
                    millis,
                    triple,
                },
                fmt,
            )
        }
        Command::Predict {
            group,
            order,
            limit,
        } => {
            check_order(*order)?;
            let g = load_group(&group.group)?;
            let report = prediction_report(&g, *order, Some(*limit))?;
            render::prediction(&report, fmt)
        }
        Command::Verify { suite, max_n } => {
            let suites = Suite::parse_selection(suite)?;
            let checks = run_suites(&suites, VerifyOptions { max_n: *max_n });
            let failed = checks.iter().filter(|c| !c.passed).count();
            let text = render::checks(&checks, fmt)?;
            if failed > 0 {
                emit(cli, &text)?;
                return Err(Failure::Verification(failed));
            }
            Ok(text)
        }
        Command::Corpus {
            order,
            max_n,
            limit,
        } => {
            check_order(*order)?;
            let mut rows = Vec::new();
            for entry in CORPUS {
                let g = entry.build();
                if max_n.is_some_and(|m| g.order() > m) {
                    continue;
                }
                let count_limit = entry.exact.then_some(*limit);
                rows.push(CorpusRow::new(prediction_report(&g, *order, count_limit)?));
            }
            render::mark_maxima(&mut rows);
            render::corpus(&rows, *order, fmt)
        }
    }
}

fn emit(cli: &Cli, text: &str) -> Result<(), Failure> {
    match &cli.out {
        Some(path) => fs::write(path, text)?,
        None => io::stdout().write_all(text.as_bytes())?,
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli).and_then(|text| emit(&cli, &text)) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Verification(k)) => {
            eprintln!("hplab: {k} verification check(s) failed");
            ExitCode::from(1)
        }
        Err(Failure::Usage(msg)) => {
            eprintln!("hplab: {msg}");
            ExitCode::from(2)
        }
    }
}
