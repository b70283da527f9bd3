//! Command-line driver: `laws`, `demo` and `scenario`.
//!
//! Exit status is 0 when everything passes, 1 on a law failure and 2 on a
//! usage or configuration error.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use num_traits::Signed;
use serde::Serialize;

use crate::laws::{demo_divergent_sum, demo_half_cauchy, demo_open_interval, registry, run_suites, select, LawConfig};
use crate::numerics::{format_rational, integer, parse_rational, Budget, Rational};
use crate::scenario::{all_pass, Scenario};

pub const EXIT_PASS: i32 = 0;
pub const EXIT_FAIL: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "supercvx", version, about = "Law checks for super convex spaces and the Giry monad")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct RunArgs {
    /// Base seed for every suite.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Seeded cases per suite.
    #[arg(long, default_value_t = 200)]
    cases: usize,
    /// Sequence length for sampled combinations.
    #[arg(long, default_value_t = 8)]
    depth: usize,
    /// Enclosure width at which countable sums stop early.
    #[arg(long, default_value = "1e-12")]
    tolerance: String,
    /// Largest truncation depth for countable sums.
    #[arg(long = "n-max", default_value_t = 1_000_000)]
    n_max: usize,
    /// Partial sums beyond this are treated as divergent.
    #[arg(long = "divergence-threshold", default_value = "1e12")]
    divergence_threshold: String,
    /// Write the JSON report here (`-` for stdout).
    #[arg(long)]
    json: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run the law suites.
    Laws {
        #[command(flatten)]
        run: RunArgs,
        /// Only suites whose name matches this glob, e.g. `axiom*`.
        #[arg(long)]
        suite: Option<String>,
        /// Include the mutant instances, which are expected to fail.
        #[arg(long)]
        mutants: bool,
        /// List suite names and exit.
        #[arg(long)]
        list: bool,
    },
    /// Run a demo: half-cauchy, divergent-sum or open-interval.
    Demo {
        name: String,
        /// N values (comma separated for half-cauchy).
        #[arg(long, value_delimiter = ',')]
        n: Vec<String>,
        /// Truncation depth for open-interval.
        #[arg(long, default_value_t = 50)]
        depth: usize,
        /// Bound the divergent sum is compared against.
        #[arg(long = "divergence-threshold", default_value = "1e12")]
        divergence_threshold: String,
        /// Write the JSON result here (`-` for stdout).
        #[arg(long)]
        json: Option<PathBuf>,
    },
    /// Run the suites declared in a JSON scenario file.
    Scenario {
        path: PathBuf,
        #[command(flatten)]
        run: RunArgs,
    },
}

struct Usage(String);

fn positive_rational(flag: &str, text: &str) -> Result<Rational, Usage> {
    let value = parse_rational(text).map_err(|e| Usage(format!("--{flag}: {e}")))?;
    if !value.is_positive() {
        return Err(Usage(format!("--{flag} must be positive (got {text})")));
    }
    Ok(value)
}

impl RunArgs {
    fn config(&self) -> Result<LawConfig, Usage> {
        if self.cases == 0 {
            return Err(Usage("--cases must be positive".into()));
        }
        if self.depth == 0 {
            return Err(Usage("--depth must be positive".into()));
        }
        if self.n_max == 0 {
            return Err(Usage("--n-max must be positive".into()));
        }
        let budget = Budget {
            max_depth: self.n_max,
            tolerance: positive_rational("tolerance", &self.tolerance)?,
            divergence_threshold: positive_rational("divergence-threshold", &self.divergence_threshold)?,
        };
        Ok(LawConfig { seed: self.seed, cases: self.cases, depth: self.depth, budget })
    }
}

fn write_json(path: &Path, value: &impl Serialize, out: &mut dyn Write) -> Result<(), Usage> {
    let text = serde_json::to_string_pretty(value).expect("reports serialize") + "\n";
    if path == Path::new("-") {
        out.write_all(text.as_bytes()).map_err(|e| Usage(e.to_string()))
    } else {
        std::fs::write(path, text).map_err(|e| Usage(format!("{}: {e}", path.display())))
    }
}

/// Parses `args` (including the program name) and runs the command.
pub fn run(args: impl IntoIterator<Item = impl Into<OsString> + Clone>, out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_PASS };
            let text = e.render().to_string();
            let _ = if e.use_stderr() { err.write_all(text.as_bytes()) } else { out.write_all(text.as_bytes()) };
            return code;
        }
    };
    match dispatch(cli.command, out) {
        Ok(code) => code,
        Err(Usage(message)) => {
            let _ = writeln!(err, "error: {message}");
            EXIT_USAGE
        }
    }
}

fn dispatch(command: Command, out: &mut dyn Write) -> Result<i32, Usage> {
    match command {
        Command::Laws { run, suite, mutants, list } => cmd_laws(&run, suite.as_deref(), mutants, list, out),
        Command::Demo { name, n, depth, divergence_threshold, json } => {
            cmd_demo(&name, &n, depth, &divergence_threshold, json.as_deref(), out)
        }
        Command::Scenario { path, run } => cmd_scenario(&path, &run, out),
    }
}

fn cmd_laws(run: &RunArgs, suite: Option<&str>, mutants: bool, list: bool, out: &mut dyn Write) -> Result<i32, Usage> {
    let config = run.config()?;
    let pattern = suite
        .map(|s| glob::Pattern::new(s).map_err(|e| Usage(format!("--suite {s:?}: {e}"))))
        .transpose()?;
    if list {
        for s in registry().into_iter().filter(|s| mutants || !s.mutant) {
            let _ = writeln!(out, "{}{}", s.name, if s.mutant { "  (mutant)" } else { "" });
        }
        return Ok(EXIT_PASS);
    }
    let suites = select(pattern.as_ref(), mutants);
    if suites.is_empty() {
        return Err(Usage(format!("--suite {:?} matches no suite", suite.unwrap_or("*"))));
    }
    let started = Instant::now();
    let reports = run_suites(&suites, &config);
    let failed = reports.iter().filter(|r| !r.pass).count();
    let to_stdout = run.json.as_deref() == Some(Path::new("-"));
    if !to_stdout {
        for r in &reports {
            let status = if r.pass { "PASS" } else { "FAIL" };
            let _ = writeln!(out, "{status}  {:<44} {:>6}/{:<6} cases", r.suite_name(), r.passed, r.cases);
            if let Some(note) = &r.note {
                let _ = writeln!(out, "      note: {note}");
            }
            if let Some(witness) = &r.counterexample {
                let _ = writeln!(out, "      counterexample: {witness}");
            }
        }
        let _ = writeln!(
            out,
            "{} suites, {} failed, seed {}, {:.2}s",
            reports.len(),
            failed,
            config.seed,
            started.elapsed().as_secs_f64()
        );
    }
    if let Some(path) = &run.json {
        write_json(path, &reports, out)?;
    }
    Ok(if failed == 0 { EXIT_PASS } else { EXIT_FAIL })
}

fn parse_count(text: &str) -> Result<usize, Usage> {
    let value = parse_rational(text).map_err(|e| Usage(format!("--n: {e}")))?;
    if !value.is_integer() || !value.is_positive() {
        return Err(Usage(format!("--n must be a positive integer (got {text})")));
    }
    value.to_integer().try_into().map_err(|_| Usage(format!("--n {text} is too large")))
}

fn cmd_demo(
    name: &str,
    n: &[String],
    depth: usize,
    threshold: &str,
    json: Option<&Path>,
    out: &mut dyn Write,
) -> Result<i32, Usage> {
    let to_stdout = json == Some(Path::new("-"));
    match name {
        "half-cauchy" => {
            let ns: Vec<f64> = if n.is_empty() {
                vec![1.0, 10.0, 100.0, 1e4, 1e7]
            } else {
                n.iter()
                    .map(|t| t.trim().parse::<f64>().map_err(|e| Usage(format!("--n {t:?}: {e}"))))
                    .collect::<Result<_, _>>()?
            };
            let demo = demo_half_cauchy(&ns).map_err(|e| Usage(e.to_string()))?;
            if !to_stdout {
                let _ = writeln!(out, "{:>12}  {:>18}  {:>18}  {:>10}", "N", "ln(1+N²)/π", "quadrature", "|diff|");
                for row in &demo.rows {
                    let _ = writeln!(
                        out,
                        "{:>12}  {:>18.10}  {:>18.10}  {:>10.2e}",
                        row.n, row.closed_form, row.quadrature, row.difference
                    );
                }
                let _ = writeln!(out, "E_N increasing: {}", demo.strictly_increasing);
                let _ = writeln!(
                    out,
                    "E_N → ∞, and ∞ ∈ [0, ∞): {} (no barycenter in R₊)",
                    demo.limit_in_image
                );
            }
            if let Some(path) = json {
                write_json(path, &demo, out)?;
            }
            let ok = demo.strictly_increasing && demo.rows.iter().all(|r| r.difference < 1e-6);
            Ok(if ok { EXIT_PASS } else { EXIT_FAIL })
        }
        "divergent-sum" => {
            let count = match n {
                [] => 100,
                [one] => parse_count(one)?,
                _ => return Err(Usage("divergent-sum takes a single --n".into())),
            };
            let threshold = positive_rational("divergence-threshold", threshold)?;
            let sum = demo_divergent_sum(count).map_err(|e| Usage(e.to_string()))?;
            let closed = integer(count as i64) * integer(count as i64 + 1) / integer(2);
            #[derive(Serialize)]
            struct DivergentSum {
                n: usize,
                sum: String,
                closed_form: String,
                exceeds_threshold: bool,
            }
            let result = DivergentSum {
                n: count,
                sum: format_rational(&sum),
                closed_form: format_rational(&closed),
                exceeds_threshold: sum > threshold,
            };
            if !to_stdout {
                let _ = writeln!(out, "N = {count}: Σ_{{i≤N}} 2^-i · i·2^i = {}", sum.to_integer());
                let _ = writeln!(out, "N(N+1)/2 = {}", closed.to_integer());
                let _ = writeln!(out, "exceeds {threshold}: {}", result.exceeds_threshold);
            }
            if let Some(path) = json {
                write_json(path, &result, out)?;
            }
            Ok(if sum == closed { EXIT_PASS } else { EXIT_FAIL })
        }
        "open-interval" => {
            let demo = demo_open_interval(depth).map_err(|e| Usage(e.to_string()))?;
            if !to_stdout {
                let _ = writeln!(out, "barycenter of Σ 2^-i δ_(1/(i+1)) in (0, 1), depth {depth}");
                let _ = writeln!(out, "enclosure [{:.12}, {:.12}]", demo.lower, demo.upper);
                let _ = writeln!(out, "width {:.3e}, estimate {:.10}", demo.width, demo.estimate);
                let _ = writeln!(out, "inside (0, 1): {}", demo.inside_open_unit);
            }
            if let Some(path) = json {
                write_json(path, &demo, out)?;
            }
            Ok(if demo.inside_open_unit { EXIT_PASS } else { EXIT_FAIL })
        }
        other => Err(Usage(format!("unknown demo {other:?} (expected half-cauchy, divergent-sum or open-interval)"))),
    }
}

fn cmd_scenario(path: &Path, run: &RunArgs, out: &mut dyn Write) -> Result<i32, Usage> {
    let config = run.config()?;
    let text = std::fs::read_to_string(path).map_err(|e| Usage(format!("{}: {e}", path.display())))?;
    let scenario = Scenario::parse(&text, &path.display().to_string()).map_err(|e| Usage(e.to_string()))?;
    let results = scenario.run(&config);
    if run.json.as_deref() != Some(Path::new("-")) {
        for r in &results {
            let status = if r.report.pass { "PASS" } else { "FAIL" };
            let _ = writeln!(out, "{status}  {:<12} {:<20} {:>6}/{:<6} cases", r.suite, r.object, r.report.passed, r.report.cases);
            if let Some(witness) = &r.report.counterexample {
                let _ = writeln!(out, "      counterexample: {witness}");
            }
        }
    }
    if let Some(p) = &run.json {
        write_json(p, &results, out)?;
    }
    Ok(if all_pass(&results) { EXIT_PASS } else { EXIT_FAIL })
}
