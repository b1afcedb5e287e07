//! `eigenlab`: orders, sampling, spectra and distribution tables for the
//! generalized symplectic groups, from the command line.
//!
//! All randomness is seeded; identical invocations (including seed and
//! worker count) produce identical bytes.

use std::fs;
use std::io::{self, Write as _};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use eigenlab::heuristics::{self, default_max_weight, u_step, DistTable, DEFAULT_EPS};
use eigenlab::spectrum::{exhaustive_spectrum, mc_spectrum, SpectrumReport};
use eigenlab::verify::{run_suite, Suite};
use eigenlab::{GroupSpec, RMatrix};

type DynResult<T> = Result<T, Box<dyn std::error::Error>>;

#[derive(Parser)]
#[command(
    name = "eigenlab",
    version,
    about = "1-eigenspace distributions of generalized symplectic groups",
    after_help = "JSON is the canonical output format; CSV is a lossy convenience view \
                  (group,value,err rows without the table header fields).  \
                  EIGENLAB_WORKERS overrides the default worker count."
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print the exact group order of Sp^(m)_{2n}(Z/p^f).
    Order {
        #[arg(long)]
        p: u64,
        #[arg(long)]
        f: u32,
        #[arg(long)]
        m: u32,
        #[arg(long)]
        n: u32,
    },
    /// Stream every group element, one row-major matrix per line.
    Enumerate {
        #[arg(long)]
        p: u64,
        #[arg(long)]
        f: u32,
        #[arg(long)]
        m: u32,
        #[arg(long)]
        n: u32,
        /// Stop after this many elements (warns on stderr).
        #[arg(long)]
        limit: Option<u64>,
    },
    /// Sample (or exhaust) the kernel-type distribution of a group.
    Spectrum {
        #[arg(long)]
        p: u64,
        #[arg(long)]
        f: u32,
        #[arg(long)]
        m: u32,
        #[arg(long)]
        n: u32,
        #[arg(long, default_value_t = 100_000)]
        samples: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Worker threads; defaults to EIGENLAB_WORKERS or the CPU count.
        #[arg(long)]
        workers: Option<u32>,
        /// Enumerate the whole group instead of sampling.
        #[arg(long)]
        exhaustive: bool,
        #[arg(long, value_enum, default_value = "json")]
        format: Format,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Predict the limiting u-probability distribution as a table.
    Predict {
        #[arg(long)]
        p: u64,
        #[arg(long)]
        m: u32,
        #[arg(long)]
        u: u32,
        /// Weight cutoff; defaults to 10 for p = 2, else 7.
        #[arg(long)]
        max_weight: Option<u32>,
        /// Spectrum report (JSON) serving as the base distribution; required
        /// for m >= 3.
        #[arg(long)]
        base: Option<PathBuf>,
        #[arg(long, default_value_t = DEFAULT_EPS)]
        eps: f64,
        #[arg(long, value_enum, default_value = "json")]
        format: Format,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Apply the u-probability step to a saved table.
    Uprob {
        /// Distribution table (JSON) to start from.
        #[arg(long)]
        base: PathBuf,
        #[arg(long)]
        steps: u32,
        /// Weight cutoff; defaults to the table's own.
        #[arg(long)]
        max_weight: Option<u32>,
        #[arg(long, value_enum, default_value = "json")]
        format: Format,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Run the release-gate check suites and print pass/fail per check.
    Verify {
        /// One of: orders, sampler, spectrum, hall, lemma, level0, level1,
        /// m2-examples, weights.  Omit to run all.
        #[arg(long, value_parser = parse_suite)]
        suite: Option<Suite>,
        #[arg(long)]
        workers: Option<u32>,
        #[arg(long)]
        output: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

fn parse_suite(s: &str) -> Result<Suite, String> {
    s.parse::<Suite>().map_err(|e| e.to_string())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}

fn run(command: Command) -> DynResult<ExitCode> {
    match command {
        Command::Order { p, f, m, n } => {
            let spec = GroupSpec::new(p, f, m, n)?;
            println!("{}", spec.order());
            Ok(ExitCode::SUCCESS)
        }
        Command::Enumerate { p, f, m, n, limit } => {
            let spec = GroupSpec::new(p, f, m, n)?;
            enumerate(spec, limit)?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Spectrum { p, f, m, n, samples, seed, workers, exhaustive, format, output } => {
            let spec = GroupSpec::new(p, f, m, n)?;
            let report = if exhaustive {
                exhaustive_spectrum(spec)?
            } else {
                mc_spectrum(spec, samples, seed, resolve_workers(workers)?)?
            };
            let text = match format {
                Format::Json => serde_json::to_string(&report)?,
                Format::Csv => report_csv(&report),
            };
            emit(&text, output.as_deref())?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Predict { p, m, u, max_weight, base, eps, format, output } => {
            let w = max_weight.unwrap_or_else(|| default_max_weight(p));
            let base = match base {
                Some(path) => Some(read_report(&path)?),
                None => None,
            };
            let table = heuristics::predict(p, m, u, w, base.as_ref(), eps)?;
            emit(&render_table(&table, format), output.as_deref())?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Uprob { base, steps, max_weight, format, output } => {
            let text = fs::read_to_string(&base)
                .map_err(|e| format!("{}: {e}", base.display()))?;
            let mut table = DistTable::from_json(&text)?;
            let w = max_weight.unwrap_or_else(|| table.max_weight());
            for _ in 0..steps {
                table = u_step(&table, w, table.q())?;
            }
            emit(&render_table(&table, format), output.as_deref())?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Verify { suite, workers, output } => {
            let workers = resolve_workers(workers)?;
            let suites: Vec<Suite> = match suite {
                Some(s) => vec![s],
                None => Suite::ALL.to_vec(),
            };
            let mut text = String::new();
            let mut total = 0usize;
            let mut failures = 0usize;
            for s in suites {
                for c in run_suite(s, workers)? {
                    total += 1;
                    if !c.pass {
                        failures += 1;
                    }
                    let verdict = if c.pass { "pass" } else { "FAIL" };
                    text.push_str(&format!("{verdict} {s}/{}: {}\n", c.name, c.detail));
                }
            }
            text.push_str(&format!("{total} checks, {failures} failures\n"));
            emit(text.trim_end_matches('\n'), output.as_deref())?;
            Ok(if failures == 0 { ExitCode::SUCCESS } else { ExitCode::from(1) })
        }
    }
}

/// Worker-count default: EIGENLAB_WORKERS if set, else the CPU count.
fn resolve_workers(flag: Option<u32>) -> DynResult<u32> {
    if let Some(w) = flag {
        if w == 0 {
            return Err("workers must be positive".into());
        }
        return Ok(w);
    }
    match std::env::var("EIGENLAB_WORKERS") {
        Ok(v) => {
            let n: u32 = v
                .trim()
                .parse()
                .map_err(|_| format!("EIGENLAB_WORKERS must be a positive integer, got {v:?}"))?;
            if n == 0 {
                return Err("EIGENLAB_WORKERS must be positive".into());
            }
            Ok(n)
        }
        Err(std::env::VarError::NotPresent) => Ok(std::thread::available_parallelism()
            .map(|n| n.get() as u32)
            .unwrap_or(1)),
        Err(e) => Err(e.into()),
    }
}

fn enumerate(spec: GroupSpec, limit: Option<u64>) -> DynResult<()> {
    let stdout = io::stdout();
    let mut out = io::BufWriter::new(stdout.lock());
    let mut emitted = 0u64;
    for h in spec.enumerate()? {
        if limit.is_some_and(|l| emitted >= l) {
            eprintln!("warning: stopped after {emitted} of {} elements", spec.order());
            break;
        }
        writeln!(out, "{}", matrix_line(&h))?;
        emitted += 1;
    }
    out.flush()?;
    Ok(())
}

/// One matrix as nested row arrays, e.g. `[[1,0],[0,1]]`.
fn matrix_line(h: &RMatrix) -> String {
    let d = h.dim();
    let rows: Vec<String> = (0..d)
        .map(|i| {
            let row: Vec<String> = (0..d).map(|j| h.get(i, j).to_string()).collect();
            format!("[{}]", row.join(","))
        })
        .collect();
    format!("[{}]", rows.join(","))
}

fn read_report(path: &Path) -> DynResult<SpectrumReport> {
    let text = fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
    let report: SpectrumReport =
        serde_json::from_str(&text).map_err(|e| format!("{}: {e}", path.display()))?;
    report.validate()?;
    Ok(report)
}

fn render_table(table: &DistTable, format: Format) -> String {
    match format {
        Format::Json => table.to_json(),
        Format::Csv => table.to_csv().trim_end_matches('\n').to_string(),
    }
}

fn report_csv(report: &SpectrumReport) -> String {
    let mut out = String::from("group,count");
    for (g, c) in &report.counts {
        out.push_str(&format!("\n\"{g}\",{c}"));
    }
    out
}

fn emit(text: &str, output: Option<&Path>) -> DynResult<()> {
    match output {
        Some(path) => {
            fs::write(path, format!("{text}\n")).map_err(|e| format!("{}: {e}", path.display()))?
        }
        None => println!("{text}"),
    }
    Ok(())
}
