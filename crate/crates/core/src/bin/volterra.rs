//! Command-line front end for the experiments. Every subcommand writes CSV
//! to stdout or `--out FILE`.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use volterra_core::forward::{Mesh, ReferenceSolution};
use volterra_core::kernel::{critical_lag, max_step, CriticalLag, KernelSpec, StepBound};
use volterra_core::lab::{self, ExperimentConfig, ExperimentKind, LabError};
use volterra_core::solver::{solve, Scheme};

#[derive(Parser)]
#[command(
    name = "volterra",
    version,
    about = "Truncated-kernel Volterra equation experiments"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Output {
    /// Write CSV here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Kernel evaluation, roots and decimal traces.
    Kernel {
        #[command(subcommand)]
        action: KernelCmd,
    },
    /// Valid-digit tables for the split kernel sums at λ = 1e-3, N = 50.
    Sigdec {
        #[command(subcommand)]
        action: SigdecCmd,
    },
    /// Solve once and print the midpoint errors.
    Solve {
        #[arg(long, default_value = "product")]
        scheme: Scheme,
        /// Truncation order N.
        #[arg(long, default_value_t = 2)]
        n: u32,
        #[arg(long, default_value = "0.1", value_parser = parse_real)]
        alpha: f64,
        /// Node count n, or the step as `1/n`.
        #[arg(long, default_value = "256", value_parser = parse_nodes)]
        steps: usize,
        #[command(flatten)]
        output: Output,
    },
    /// Error norms and convergence orders over a halving ladder.
    Table {
        #[arg(long, default_value = "0.1,0.01", value_delimiter = ',', value_parser = parse_real)]
        alphas: Vec<f64>,
        #[arg(
            long = "n-list",
            default_value = "2,3,4,5,10,15",
            value_delimiter = ','
        )]
        n_list: Vec<u32>,
        /// Coarsest and finest node counts, `lo:hi`, doubled in between.
        #[arg(long, default_value = "256:2048")]
        ladder: String,
        /// Run cells on one thread.
        #[arg(long)]
        sequential: bool,
        #[command(flatten)]
        output: Output,
    },
    /// Both schemes on exact and saw-tooth perturbed data.
    Perturb {
        #[arg(long, default_value = "1e-3", value_parser = parse_real)]
        delta: f64,
        #[arg(long, default_value = "27", value_parser = parse_nodes)]
        nodes: usize,
        #[arg(long, default_value_t = 2)]
        n: u32,
        #[arg(long, default_value = "0.1", value_parser = parse_real)]
        alpha: f64,
        /// Print the norm summary instead of per-node errors.
        #[arg(long)]
        summary: bool,
        #[command(flatten)]
        output: Output,
    },
    /// Fibonacci search (10 trials) for the step minimising the error on
    /// perturbed data.
    SearchStep {
        #[arg(long, default_value = "1e-3", value_parser = parse_real)]
        delta: f64,
        /// Node-count range `lo:hi`.
        #[arg(long, default_value = "8:256")]
        range: String,
        #[arg(long, default_value_t = 2)]
        n: u32,
        #[arg(long, default_value = "0.1", value_parser = parse_real)]
        alpha: f64,
        #[arg(long, default_value = "product")]
        scheme: Scheme,
        #[command(flatten)]
        output: Output,
    },
}

#[derive(Subcommand)]
enum KernelCmd {
    /// K_N(λ) in double precision.
    Eval {
        #[arg(long)]
        n: u32,
        #[arg(long, value_parser = parse_real)]
        lambda: f64,
        #[command(flatten)]
        output: Output,
    },
    /// Smallest positive root λ* and the step bound 2λ*.
    Root {
        #[arg(long)]
        n: u32,
        #[command(flatten)]
        output: Output,
    },
    /// Partial sums in L-digit decimal arithmetic with valid digits.
    Trace {
        #[arg(long, default_value_t = 12)]
        n: u32,
        #[arg(long, default_value = "1e-3", value_parser = parse_real)]
        lambda: f64,
        #[arg(long, default_value_t = 8)]
        digits: u32,
        #[command(flatten)]
        output: Output,
    },
}

#[derive(Subcommand)]
enum SigdecCmd {
    /// Sum and difference tables for each digit count.
    Tables {
        /// Digit counts `lo..hi` (inclusive) or a single `L`.
        #[arg(long, default_value = "8..14")]
        digits: String,
        /// `sum`, `diff` or `both` (separated by a blank line).
        #[arg(long, default_value = "both")]
        table: String,
        #[command(flatten)]
        output: Output,
    },
}

/// Reals, also written as fractions `a/b`.
fn parse_real(s: &str) -> Result<f64, String> {
    let s = s.trim();
    let v = match s.split_once('/') {
        Some((a, b)) => {
            let a: f64 = a.trim().parse().map_err(|e| format!("'{s}': {e}"))?;
            let b: f64 = b.trim().parse().map_err(|e| format!("'{s}': {e}"))?;
            a / b
        }
        None => s.parse().map_err(|e| format!("'{s}': {e}"))?,
    };
    if v.is_finite() {
        Ok(v)
    } else {
        Err(format!("'{s}' is not a finite number"))
    }
}

/// Node count `n`, or a step `1/n`.
fn parse_nodes(s: &str) -> Result<usize, String> {
    let s = s.trim();
    let n = match s.strip_prefix("1/") {
        Some(rest) => rest.trim().parse::<usize>(),
        None => s.parse::<usize>(),
    }
    .map_err(|e| format!("'{s}': {e}"))?;
    if n == 0 {
        return Err("node count must be positive".into());
    }
    Ok(n)
}

fn parse_pair(s: &str, sep: &str) -> Result<(usize, usize), String> {
    let (a, b) = s
        .split_once(sep)
        .ok_or_else(|| format!("expected lo{sep}hi, got '{s}'"))?;
    let lo = parse_nodes(a)?;
    let hi = parse_nodes(b)?;
    if lo > hi {
        return Err(format!("empty range '{s}'"));
    }
    Ok((lo, hi))
}

fn ladder(s: &str) -> Result<Vec<usize>, String> {
    let (lo, hi) = parse_pair(s, ":")?;
    let mut out = vec![lo];
    while *out.last().unwrap() < hi {
        out.push(out.last().unwrap() * 2);
    }
    if *out.last().unwrap() != hi {
        return Err(format!("{hi} is not {lo} times a power of two"));
    }
    Ok(out)
}

fn digit_range(s: &str) -> Result<std::ops::RangeInclusive<u32>, String> {
    let parse = |x: &str| x.trim().parse::<u32>().map_err(|e| format!("'{x}': {e}"));
    let (lo, hi) = match s.split_once("..") {
        Some((a, b)) => (parse(a)?, parse(b.trim_start_matches('='))?),
        None => {
            let l = parse(s)?;
            (l, l)
        }
    };
    if lo == 0 || lo > hi {
        return Err(format!("invalid digit range '{s}'"));
    }
    Ok(lo..=hi)
}

enum Failure {
    Config(String),
    Run(String),
    /// The reader of stdout went away; not worth reporting.
    Closed,
}

fn broken_pipe(e: &io::Error) -> bool {
    e.kind() == io::ErrorKind::BrokenPipe
}

fn csv_broken_pipe(e: &csv::Error) -> bool {
    matches!(e.kind(), csv::ErrorKind::Io(io) if broken_pipe(io))
}

impl From<LabError> for Failure {
    fn from(e: LabError) -> Self {
        match e {
            LabError::Io(ref io) if broken_pipe(io) => Failure::Closed,
            LabError::Csv(ref c) if csv_broken_pipe(c) => Failure::Closed,
            LabError::Io(_) | LabError::Csv(_) => Failure::Run(e.to_string()),
            other => Failure::Config(other.to_string()),
        }
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        if broken_pipe(&e) {
            return Failure::Closed;
        }
        Failure::Run(e.to_string())
    }
}

impl From<csv::Error> for Failure {
    fn from(e: csv::Error) -> Self {
        if csv_broken_pipe(&e) {
            return Failure::Closed;
        }
        Failure::Run(e.to_string())
    }
}

fn config<E: ToString>(e: E) -> Failure {
    Failure::Config(e.to_string())
}

fn sink(output: &Output) -> Result<Box<dyn Write>, Failure> {
    Ok(match &output.out {
        Some(path) => Box::new(BufWriter::new(File::create(path)?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn run(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Kernel { action } => match action {
            KernelCmd::Eval { n, lambda, output } => {
                let spec = KernelSpec::new(n).map_err(config)?;
                let value = spec.try_eval(lambda).map_err(config)?;
                let mut w = csv::Writer::from_writer(sink(&output)?);
                w.write_record(["N", "lambda", "K"])?;
                w.write_record([n.to_string(), lambda.to_string(), format!("{value:.17e}")])?;
                w.flush()?;
            }
            KernelCmd::Root { n, output } => {
                let spec = KernelSpec::new(n).map_err(config)?;
                let mut w = csv::Writer::from_writer(sink(&output)?);
                w.write_record(["N", "kind", "lambda_star", "h_max"])?;
                let h_max = match max_step(&spec) {
                    StepBound::Below(h) => format!("{h:.15e}"),
                    StepBound::Unbounded => "inf".to_string(),
                };
                let (kind, lag) = match critical_lag(&spec) {
                    Ok(CriticalLag::Root(l)) => ("root", format!("{l:.15e}")),
                    Ok(CriticalLag::Touch { lag, .. }) => ("minimum", format!("{lag:.15e}")),
                    Err(_) => ("none", "inf".to_string()),
                };
                w.write_record([n.to_string(), kind.to_string(), lag, h_max])?;
                w.flush()?;
            }
            KernelCmd::Trace {
                n,
                lambda,
                digits,
                output,
            } => {
                let cfg = ExperimentConfig {
                    orders: vec![n],
                    lambda,
                    digits: digits..=digits,
                    ..ExperimentConfig::new(ExperimentKind::KernelTrace)
                };
                let trace = lab::run_sig_trace(&cfg)?;
                lab::write_trace(&trace, sink(&output)?)?;
            }
        },
        Command::Sigdec {
            action:
                SigdecCmd::Tables {
                    digits,
                    table,
                    output,
                },
        } => {
            let cfg = ExperimentConfig {
                digits: digit_range(&digits).map_err(config)?,
                ..ExperimentConfig::new(ExperimentKind::SigTables)
            };
            let tables = lab::run_sig_tables(&cfg)?;
            let mut out = sink(&output)?;
            match table.as_str() {
                "sum" => tables.write_sums(&mut out)?,
                "diff" => tables.write_diffs(&mut out)?,
                "both" => {
                    tables.write_sums(&mut out)?;
                    writeln!(out)?;
                    tables.write_diffs(&mut out)?;
                }
                other => return Err(config(format!("unknown table '{other}'"))),
            }
            out.flush()?;
        }
        Command::Solve {
            scheme,
            n,
            alpha,
            steps,
            output,
        } => {
            let spec = KernelSpec::new(n).map_err(config)?;
            let problem = ReferenceSolution::new(alpha).map_err(config)?;
            let mesh = Mesh::unit(steps).map_err(config)?;
            let sol = solve(&spec, scheme, alpha, &mesh).map_err(config)?;
            let mut out = sink(&output)?;
            sol.write_csv(&mut out, &problem)?;
            out.flush()?;
        }
        Command::Table {
            alphas,
            n_list,
            ladder: spec,
            sequential,
            output,
        } => {
            let cfg = ExperimentConfig {
                orders: n_list,
                alphas,
                nodes: ladder(&spec).map_err(config)?,
                parallel: !sequential,
                ..ExperimentConfig::new(ExperimentKind::Convergence)
            };
            lab::run_convergence_table(&cfg)?.write_csv(sink(&output)?)?;
        }
        Command::Perturb {
            delta,
            nodes,
            n,
            alpha,
            summary,
            output,
        } => {
            let cfg = ExperimentConfig {
                orders: vec![n],
                alphas: vec![alpha],
                nodes: vec![nodes],
                delta,
                ..ExperimentConfig::new(ExperimentKind::Perturbed)
            };
            let report = lab::run_perturbed_experiment(&cfg)?;
            if summary {
                report.write_summary(sink(&output)?)?;
            } else {
                report.write_nodes(sink(&output)?)?;
            }
        }
        Command::SearchStep {
            delta,
            range,
            n,
            alpha,
            scheme,
            output,
        } => {
            let cfg = ExperimentConfig {
                orders: vec![n],
                alphas: vec![alpha],
                delta,
                scheme,
                search_range: parse_pair(&range, ":").map_err(config)?,
                ..ExperimentConfig::new(ExperimentKind::StepSearch)
            };
            lab::run_step_search(&cfg)?.write_csv(sink(&output)?)?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) | Err(Failure::Closed) => ExitCode::SUCCESS,
        Err(Failure::Config(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Run(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::FAILURE
        }
    }
}
