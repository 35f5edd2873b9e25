//! The `tempsec` command-line front end.
//!
//! Exit status: 0 on success, 1 when the oracle self-check finds a mismatch,
//! 2 for configuration, schema, variant or I/O problems, 3 when a solver
//! fails.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::config::{load_config, LoadedConfig};
use crate::error::{Error, Result};
use crate::experiments::{
    block_feasibility_diagnostic, coupled_walk_diagnostic, packing_violation_diagnostic, theorem_bound,
    theoretical_bound, Experiment, Summary, Theorem,
};
use crate::online::Variant;
use crate::oracles::check::{self, Solvers};

pub const EXIT_OK: i32 = 0;
pub const EXIT_MISMATCH: i32 = 1;
pub const EXIT_INPUT: i32 = 2;
pub const EXIT_SOLVER: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "tempsec", version, about = "Temp secretary experiments")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, clap::Args)]
pub struct RunArgs {
    /// Experiment configuration (JSON).
    #[arg(long)]
    pub config: PathBuf,
    /// Output directory; defaults to `output.dir` in the config, else `out`.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Worker threads; defaults to the available cores.
    #[arg(long)]
    pub threads: Option<usize>,
    /// Dotted-path override, e.g. `--set trials=10`.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    pub overrides: Vec<String>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Which {
    Block,
    Walk,
    Violation,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Estimate the competitive ratio.
    Run {
        #[command(flatten)]
        args: RunArgs,
        /// Also dump the per-arrival trace of trial 0.
        #[arg(long)]
        trace: bool,
    },
    /// Run a lemma-level diagnostic.
    Diagnose {
        #[command(flatten)]
        args: RunArgs,
        #[arg(long, value_enum)]
        which: Which,
    },
    /// Cross-check the offline oracles against brute force.
    OracleCheck {
        #[arg(long, default_value_t = 12)]
        n_max: usize,
        #[arg(long, default_value_t = 200)]
        count: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Where a mismatch repro is written.
        #[arg(long, default_value = ".")]
        out: PathBuf,
    },
    /// Print the closed-form guarantee.
    Bounds {
        #[arg(long, value_enum)]
        variant: Option<VariantArg>,
        #[arg(long, value_enum)]
        theorem: Option<TheoremArg>,
        #[arg(long)]
        gamma: f64,
        #[arg(long)]
        capacity: f64,
        #[arg(long, default_value_t = 1)]
        d: usize,
    },
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum VariantArg {
    Cardinality,
    Packing,
    Lengths,
}

impl From<VariantArg> for Variant {
    fn from(v: VariantArg) -> Self {
        match v {
            VariantArg::Cardinality => Variant::Cardinality,
            VariantArg::Packing => Variant::Packing,
            VariantArg::Lengths => Variant::Lengths,
        }
    }
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum TheoremArg {
    SmallCapacity,
    LargeCapacity,
    Packing,
    Lengths,
}

impl From<TheoremArg> for Theorem {
    fn from(t: TheoremArg) -> Self {
        match t {
            TheoremArg::SmallCapacity => Theorem::SmallCapacity,
            TheoremArg::LargeCapacity => Theorem::LargeCapacity,
            TheoremArg::Packing => Theorem::Packing,
            TheoremArg::Lengths => Theorem::Lengths,
        }
    }
}

/// Exit status for an error.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Solver(_) | Error::OutOfOrder { .. } => EXIT_SOLVER,
        _ => EXIT_INPUT,
    }
}

pub fn main() -> i32 {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INPUT } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    match dispatch(cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

pub fn dispatch(command: Command) -> Result<i32> {
    match command {
        Command::Run { args, trace } => cmd_run(&args, trace).map(|_| EXIT_OK),
        Command::Diagnose { args, which } => cmd_diagnose(&args, which).map(|_| EXIT_OK),
        Command::OracleCheck {
            n_max,
            count,
            seed,
            out,
        } => cmd_oracle_check(n_max, count, seed, &out, &Solvers::default()),
        Command::Bounds {
            variant,
            theorem,
            gamma,
            capacity,
            d,
        } => {
            let bound = match (variant, theorem) {
                (_, Some(t)) => theorem_bound(t.into(), gamma, capacity, d)?,
                (Some(v), None) => theoretical_bound(v.into(), gamma, capacity, d)?,
                (None, None) => {
                    return Err(Error::Config("bounds needs --variant or --theorem".into()));
                }
            };
            println!("{}", serde_json::to_string_pretty(&bound)?);
            Ok(EXIT_OK)
        }
    }
}

fn threads(args: &RunArgs) -> usize {
    args.threads
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()))
}

fn out_dir(args: &RunArgs, loaded: &LoadedConfig) -> PathBuf {
    args.out
        .clone()
        .or_else(|| loaded.config.output.as_ref().and_then(|o| o.dir.clone()))
        .unwrap_or_else(|| PathBuf::from("out"))
}

fn prepare(args: &RunArgs) -> Result<(Experiment, PathBuf)> {
    let loaded = load_config(&args.config, &args.overrides)?;
    let instance = loaded.config.instance.load(&loaded.base_dir)?;
    let out = out_dir(args, &loaded);
    Ok((Experiment::new(loaded.config, instance)?, out))
}

/// Writes `bytes` to `dir/name` through a temporary file, so a reader never
/// sees a partial artifact.
fn write_artifact(dir: &Path, name: &str, bytes: &[u8]) -> Result<PathBuf> {
    fs::create_dir_all(dir)?;
    let path = dir.join(name);
    let tmp = dir.join(format!(".{name}.tmp"));
    fs::File::create(&tmp)?.write_all(bytes)?;
    fs::rename(&tmp, &path)?;
    Ok(path)
}

fn to_json<T: Serialize>(value: &T) -> Result<Vec<u8>> {
    let mut s = serde_json::to_string_pretty(value)?;
    s.push('\n');
    Ok(s.into_bytes())
}

/// Rejects a CSV whose rows do not all have the header's field count.
fn validate_csv(text: &[u8], rows: usize) -> Result<()> {
    let text = std::str::from_utf8(text).map_err(|e| Error::Config(format!("non-UTF-8 CSV: {e}")))?;
    let mut lines = text.lines();
    let width = lines.next().map_or(0, |h| h.split(',').count());
    let mut count = 0;
    for line in lines {
        if line.split(',').count() != width {
            return Err(Error::Config(format!("malformed CSV row {line:?}")));
        }
        count += 1;
    }
    if count != rows {
        return Err(Error::Config(format!("CSV has {count} rows, expected {rows}")));
    }
    Ok(())
}

pub fn cmd_run(args: &RunArgs, trace: bool) -> Result<Summary> {
    let (exp, out) = prepare(args)?;
    let agg = exp.run(threads(args))?;
    let mut csv = Vec::new();
    exp.write_trials_csv(&agg, &mut csv)?;
    validate_csv(&csv, agg.trials)?;
    let summary = exp.summary(&agg)?;
    let json = to_json(&summary)?;
    let back: Summary =
        serde_json::from_slice(&json).map_err(|e| Error::Config(format!("summary failed validation: {e}")))?;
    if !(back.ratio.is_finite() && back.ci_low.is_finite() && back.ci_high.is_finite()) {
        return Err(Error::Config("ratio is undefined (mean denominator is zero)".into()));
    }
    write_artifact(&out, "trials.csv", &csv)?;
    write_artifact(&out, "summary.json", &json)?;
    if trace {
        let (_, tr) = exp.trace(0)?;
        let mut buf = Vec::new();
        tr.write_csv(&mut buf)?;
        write_artifact(&out, "trace.csv", &buf)?;
    }
    let flags: Vec<String> = summary
        .bound_flags
        .iter()
        .map(|f| serde_json::to_value(f).map(|v| v.as_str().unwrap_or_default().to_owned()))
        .collect::<std::result::Result<_, _>>()?;
    println!(
        "ratio {:.5}  95% CI [{:.5}, {:.5}]  bound {:.5} ({:?}{}{})  trials {}",
        summary.ratio,
        summary.ci_low,
        summary.ci_high,
        summary.bound,
        summary.bound_theorem,
        if flags.is_empty() { "" } else { "; " },
        flags.join(", "),
        summary.trials
    );
    if summary.invariant_failures > 0 {
        eprintln!("warning: {} trials broke a trace invariant", summary.invariant_failures);
    }
    Ok(summary)
}

fn diagnostic_params(exp: &Experiment) -> (usize, f64) {
    let cfg = exp.config();
    let d = cfg.diagnostics.clone().unwrap_or_default();
    let trials = d.trials.unwrap_or(cfg.trials);
    let rounds = d.rounds.map_or(100.0 * exp.instance().len() as f64, |r| r as f64);
    (trials, rounds)
}

fn require_variant(exp: &Experiment, variant: Variant, which: &str) -> Result<()> {
    let got = exp.config().algorithm.variant;
    if got != variant {
        return Err(Error::Config(format!(
            "{which} diagnostic needs the {variant} variant, got {got}"
        )));
    }
    Ok(())
}

pub fn cmd_diagnose(args: &RunArgs, which: Which) -> Result<PathBuf> {
    let (exp, out) = prepare(args)?;
    let (trials, rounds) = diagnostic_params(&exp);
    let cfg = exp.config();
    let inst = exp.instance();
    match which {
        Which::Block => {
            require_variant(&exp, Variant::Cardinality, "block")?;
            let rows = block_feasibility_diagnostic(inst, &cfg.arrivals, trials, cfg.seed, rounds, threads(args))?;
            let mut csv = String::from("block,start,end,tentative,tentative_feasible,ratio,bound,excluded\n");
            for r in &rows {
                csv.push_str(&format!(
                    "{},{},{},{},{},{},{},{}\n",
                    r.block, r.start, r.end, r.tentative, r.tentative_feasible, r.ratio, r.bound, r.excluded
                ));
            }
            validate_csv(csv.as_bytes(), rows.len())?;
            write_artifact(&out, "block.csv", csv.as_bytes())
        }
        Which::Walk => {
            let b = inst.cardinality_capacity()? as u64;
            let stats = coupled_walk_diagnostic(b, inst.gamma(), rounds, trials, cfg.seed)?;
            let mut csv = String::from("trial,q,bound\n");
            for (t, q) in stats.q.iter().enumerate() {
                csv.push_str(&format!("{t},{q},{}\n", stats.bound));
            }
            validate_csv(csv.as_bytes(), stats.q.len())?;
            write_artifact(&out, "walk_summary.json", &to_json(&stats)?)?;
            println!(
                "mean Q {:.4} ± {:.4}  (4√B = {:.1})",
                stats.mean_q, stats.stderr_q, stats.bound
            );
            write_artifact(&out, "walk.csv", csv.as_bytes())
        }
        Which::Violation => {
            require_variant(&exp, Variant::Packing, "violation")?;
            let report = packing_violation_diagnostic(
                inst,
                cfg.algorithm.epsilon,
                &cfg.arrivals,
                trials,
                cfg.seed,
                threads(args),
            )?;
            let mut csv = String::from("row,pairs,violations,rate,stderr,bound\n");
            for r in &report.rows {
                csv.push_str(&format!(
                    "{},{},{},{},{},{}\n",
                    r.row, r.pairs, r.violations, r.rate, r.stderr, report.bound
                ));
            }
            validate_csv(csv.as_bytes(), report.rows.len())?;
            write_artifact(&out, "violation_summary.json", &to_json(&report)?)?;
            println!(
                "max violation rate {:.6} ± {:.6}  (1/(dB) = {:.6}), commit ratio {:.4}",
                report.max_rate, report.max_rate_stderr, report.bound, report.commit_ratio
            );
            write_artifact(&out, "violation.csv", csv.as_bytes())
        }
    }
}

/// Runs the oracle self-check with the given implementations. On a mismatch
/// the failing cases are written to `out/oracle_mismatch.json` and the
/// status is [`EXIT_MISMATCH`].
pub fn cmd_oracle_check(n_max: usize, count: usize, seed: u64, out: &Path, solvers: &Solvers<'_>) -> Result<i32> {
    if n_max > check::MAX_N || n_max == 0 {
        return Err(Error::Config(format!("n_max must lie in 1..={}", check::MAX_N)));
    }
    let report = check::run(n_max, count, seed, solvers)?;
    if report.passed() {
        println!(
            "oracle check passed: {} exact cases, {} LP cases",
            report.exact_cases, report.lp_cases
        );
        return Ok(EXIT_OK);
    }
    let path = write_artifact(out, "oracle_mismatch.json", &to_json(&report)?)?;
    eprintln!(
        "oracle check failed: {} mismatches, repro written to {}",
        report.mismatches.len(),
        path.display()
    );
    Ok(EXIT_MISMATCH)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cli_parses_subcommands() {
        let c = Cli::try_parse_from([
            "tempsec",
            "run",
            "--config",
            "c.json",
            "--set",
            "trials=1",
            "--set",
            "seed=7",
            "--threads",
            "2",
        ])
        .unwrap();
        match c.command {
            Command::Run { args, trace } => {
                assert_eq!(args.overrides, vec!["trials=1", "seed=7"]);
                assert_eq!(args.threads, Some(2));
                assert!(!trace);
            }
            other => panic!("{other:?}"),
        }
        let c = Cli::try_parse_from(["tempsec", "diagnose", "--config", "c", "--which", "walk"]).unwrap();
        assert!(matches!(c.command, Command::Diagnose { which: Which::Walk, .. }));
        assert!(Cli::try_parse_from(["tempsec", "diagnose", "--config", "c", "--which", "x"]).is_err());
    }

    #[test]
    fn error_codes() {
        assert_eq!(exit_code(&Error::Solver("x".into())), EXIT_SOLVER);
        assert_eq!(exit_code(&Error::Config("x".into())), EXIT_INPUT);
        assert_eq!(exit_code(&Error::InvalidInstance("x".into())), EXIT_INPUT);
    }

    #[test]
    fn csv_validation() {
        assert!(validate_csv(b"a,b\n1,2\n", 1).is_ok());
        assert!(validate_csv(b"a,b\n1\n", 1).is_err());
        assert!(validate_csv(b"a,b\n1,2\n", 2).is_err());
    }

    #[test]
    fn oracle_check_rejects_large_n() {
        let dir = tempfile::tempdir().unwrap();
        assert!(cmd_oracle_check(21, 1, 0, dir.path(), &Solvers::default()).is_err());
        assert_eq!(
            cmd_oracle_check(1, 5, 0, dir.path(), &Solvers::default()).unwrap(),
            EXIT_OK
        );
    }
}
