//! `cosetlab`: proposition checks, rate optimizers, bound sweeps and coset
//! code simulation from the command line.
//!
//! Exit status is 0 whenever the computation finishes, whatever the
//! verdicts; 64 for usage errors and 65 for bad data.

use std::fmt::Write as _;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use cosetlab::coset_sim::{
    independent_sum_support_count, simulate_ex1_sum_decode, sum_support_count, CosetCodebook, SimParams, SimReport,
};
use cosetlab::macdstx::{sweep_csv, sweep_tau_with, OptimizerConfig, SweepRow};
use cosetlab::region_analysis::{
    check_ex3_simultaneity, check_prop1_with, check_prop2, check_prop3, check_prop4_with, check_prop5, compute_c1,
    CheckOptions, SimultaneityReport,
};
use cosetlab::report::{csv_row, sig9, to_structured, CSV_HEADER};
use cosetlab::{load_channel, make_ex2, make_ex5, C1Result, IcParams, MacTable, Prob, PropositionReport};
use serde::Serialize;

const EXIT_USAGE: u8 = 64;
const EXIT_DATA: u8 = 65;
const THREADS_VAR: &str = "COSETLAB_THREADS";

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Csv,
    Structured,
}

#[derive(Debug, Parser)]
#[command(name = "cosetlab", version, about = "Coset-code advantage checks for non-additive multi-terminal channels")]
struct Cli {
    /// Output format; `sweep` defaults to csv, everything else to text.
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
    /// Write the output to this file instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Iid infeasibility and coset achievability on the OR interference channel.
    Props {
        #[arg(long, default_value = "1/90")]
        tau1: String,
        #[arg(long, default_value = "0.15")]
        tau: String,
        #[arg(long, default_value = "0.01")]
        delta1: String,
        #[arg(long, default_value = "0.067")]
        delta: String,
        /// Strict inequalities hold only with a margin above this.
        #[arg(long, default_value = "0")]
        epsilon: String,
    },
    /// User 1's best rate on the coupled-MAC channel.
    C1 {
        #[arg(long, default_value = "0.01")]
        tau1: String,
        #[arg(long, default_value = "0.1525")]
        tau: String,
        #[arg(long, default_value = "0.067")]
        delta: String,
    },
    /// Iid gap and coset slack on the coupled-MAC channel.
    Prop3 {
        #[arg(long, default_value = "0.01")]
        tau1: String,
        #[arg(long, default_value = "0.1525")]
        tau: String,
        #[arg(long, default_value = "0.067")]
        delta: String,
    },
    /// Sum decodability at all three receivers of the symmetric OR channel.
    Ex3 {
        #[arg(long, default_value = "0.2210")]
        beta: String,
        #[arg(long, default_value = "0.1")]
        delta: String,
        #[arg(long, default_value = "0.1284")]
        tau: String,
    },
    /// Iid and coset sum-rate bounds over a uniform budget grid on [0, 1/2].
    Sweep {
        #[arg(long, default_value_t = 50)]
        grid: usize,
        /// Channel file; the built-in MAC with distributed states otherwise.
        #[arg(long)]
        channel: Option<PathBuf>,
        #[arg(long, default_value_t = 20)]
        restarts: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Distinct sums of two cosets of a random linear code, against two
    /// independent random codebooks of the same size.
    Closure {
        #[arg(long, default_value_t = 20)]
        n: usize,
        #[arg(long, default_value_t = 4)]
        k: usize,
        #[arg(long, default_value_t = 3)]
        q: u8,
        #[arg(long, default_value_t = 7)]
        seed: u64,
    },
    /// Monte Carlo sum decoding at receiver 1 of the OR channel.
    Sim {
        #[arg(long, default_value_t = 12)]
        n: usize,
        #[arg(long, default_value_t = 1)]
        k: usize,
        /// Shaping dimension; the largest the decoder allows by default.
        #[arg(long)]
        shaping_k: Option<usize>,
        #[arg(long, default_value_t = 3)]
        q: u8,
        #[arg(long, default_value = "0.01")]
        delta1: String,
        #[arg(long, default_value = "1/90")]
        tau1: String,
        #[arg(long, default_value = "0.15")]
        tau: String,
        #[arg(long, default_value_t = 2000)]
        trials: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

enum Failure {
    Usage(String),
    Data(String),
}

impl From<cosetlab::Error> for Failure {
    fn from(e: cosetlab::Error) -> Self {
        Failure::Data(e.to_string())
    }
}

fn prob(name: &str, text: &str) -> Result<f64, Failure> {
    Prob::parse(text)
        .map(Prob::value)
        .map_err(|e| Failure::Data(format!("--{name}: {e}")))
}

fn reports_text(reports: &[PropositionReport]) -> String {
    let mut out = format!("{:<14} {:>14} {:>14} {:>14}  verdict\n", "name", "lhs", "rhs", "margin");
    for r in reports {
        let _ = writeln!(
            out,
            "{:<14} {:>14} {:>14} {:>14}  {}",
            r.name,
            sig9(r.lhs),
            sig9(r.rhs),
            sig9(r.margin),
            r.verdict
        );
    }
    out
}

fn reports_csv(reports: &[PropositionReport]) -> String {
    let mut out = format!("{CSV_HEADER}\n");
    for r in reports {
        out.push_str(&csv_row(r));
        out.push('\n');
    }
    out
}

fn reports_output(reports: &[PropositionReport], format: Format) -> Result<String, Failure> {
    Ok(match format {
        Format::Text => reports_text(reports),
        Format::Csv => reports_csv(reports),
        Format::Structured => to_structured(&reports)? + "\n",
    })
}

fn records_csv<T: Serialize>(records: &[T]) -> Result<String, Failure> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in records {
        w.serialize(r).map_err(|e| Failure::Data(e.to_string()))?;
    }
    let bytes = w.into_inner().map_err(|e| Failure::Data(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| Failure::Data(e.to_string()))
}

fn props(tau1: &str, tau: &str, delta1: &str, delta: &str, epsilon: &str, format: Format) -> Result<String, Failure> {
    let p = IcParams::new(prob("tau1", tau1)?, prob("tau", tau)?, prob("delta1", delta1)?, prob("delta", delta)?)?;
    let opts = CheckOptions { strict_epsilon: prob("epsilon", epsilon)? };
    let reports = [
        check_prop1_with(&p, opts)?,
        check_prop2(&p)?,
        check_prop4_with(&p, opts)?,
        check_prop5(&p)?,
    ];
    reports_output(&reports, format)
}

fn coupled_mac(delta: f64) -> Result<cosetlab::ChannelModel, Failure> {
    Ok(make_ex2(&MacTable::default(), Prob::new(delta)?)?)
}

fn c1(tau1: &str, tau: &str, delta: &str, format: Format) -> Result<String, Failure> {
    let ch = coupled_mac(prob("delta", delta)?)?;
    let r: C1Result = compute_c1(&ch, prob("tau1", tau1)?, prob("tau", tau)?)?;
    Ok(match format {
        Format::Text => format!(
            "C1 = {} bits at P(X1 = 1) = {} (P(X1 = 0) = {}), {} golden-section iterations\n",
            sig9(r.c1),
            sig9(r.p_star_x1_1),
            sig9(1.0 - r.p_star_x1_1),
            r.iterations
        ),
        Format::Csv => format!(
            "c1,p_star_x1_1,p_star_x1_0,iterations\n{},{},{},{}\n",
            sig9(r.c1),
            sig9(r.p_star_x1_1),
            sig9(1.0 - r.p_star_x1_1),
            r.iterations
        ),
        Format::Structured => to_structured(&r)? + "\n",
    })
}

fn prop3(tau1: &str, tau: &str, delta: &str, format: Format) -> Result<String, Failure> {
    let d = prob("delta", delta)?;
    let (a, b) = check_prop3(&coupled_mac(d)?, prob("tau1", tau1)?, prob("tau", tau)?, d)?;
    if format == Format::Text {
        return Ok(format!(
            "{}G_A = {}\nG_B = {}\n",
            reports_text(&[a.clone(), b.clone()]),
            sig9(a.margin),
            sig9(b.margin)
        ));
    }
    reports_output(&[a, b], format)
}

fn ex3(beta: &str, delta: &str, tau: &str, format: Format) -> Result<String, Failure> {
    let r: SimultaneityReport = check_ex3_simultaneity(prob("beta", beta)?, prob("delta", delta)?, prob("tau", tau)?)?;
    Ok(match format {
        Format::Text => format!("{}all receivers: {}\n", reports_text(&r.receivers), r.verdict),
        Format::Csv => reports_csv(&r.receivers),
        Format::Structured => to_structured(&r)? + "\n",
    })
}

fn sweep(grid: usize, channel: Option<&PathBuf>, restarts: usize, seed: u64, format: Format) -> Result<String, Failure> {
    let ch = match channel {
        Some(path) => load_channel(path)?,
        None => make_ex5(),
    };
    let cfg = OptimizerConfig { restarts, seed, ..OptimizerConfig::default() };
    let rows: Vec<SweepRow> = sweep_tau_with(&ch, grid, &cfg)?;
    Ok(match format {
        Format::Csv => sweep_csv(&rows),
        Format::Text => {
            let mut out = format!("{:>12} {:>12} {:>12}\n", "tau", "iid_upper", "coset_lower");
            for r in &rows {
                let _ = writeln!(out, "{:>12} {:>12} {:>12}", sig9(r.tau.value()), sig9(r.iid_upper), sig9(r.coset_lower));
            }
            out
        }
        Format::Structured => to_structured(&rows)? + "\n",
    })
}

#[derive(Debug, Serialize)]
struct ClosureReport {
    n: usize,
    k: usize,
    q: u8,
    seed: u64,
    rank: usize,
    sum_support_count: usize,
    independent_sum_count: usize,
}

fn closure(n: usize, k: usize, q: u8, seed: u64, format: Format) -> Result<String, Failure> {
    let code = cosetlab::coset_sim::sample_code(n, k, q, seed)?;
    let a = CosetCodebook::with_random_shift(code.clone(), seed.wrapping_add(1));
    let b = CosetCodebook::with_random_shift(code.clone(), seed.wrapping_add(2));
    let size = a.code().k();
    let r = ClosureReport {
        n,
        k,
        q,
        seed,
        rank: code.rank(),
        sum_support_count: sum_support_count(&a, &b)?,
        independent_sum_count: independent_sum_support_count(n, (q as usize).pow(size as u32), q, seed)?,
    };
    Ok(match format {
        Format::Text => format!(
            "rank = {}\nsum_support_count = {}\nindependent_sum_count = {}\n",
            r.rank, r.sum_support_count, r.independent_sum_count
        ),
        Format::Csv => records_csv(&[&r])?,
        Format::Structured => to_structured(&r)? + "\n",
    })
}

#[allow(clippy::too_many_arguments)]
fn sim(
    n: usize,
    k: usize,
    shaping_k: Option<usize>,
    q: u8,
    delta1: &str,
    tau1: &str,
    tau: &str,
    trials: usize,
    seed: u64,
    format: Format,
) -> Result<String, Failure> {
    let params = SimParams {
        n,
        k,
        shaping_k,
        q,
        delta1: prob("delta1", delta1)?,
        tau1: prob("tau1", tau1)?,
        tau: prob("tau", tau)?,
        trials,
        seed,
    };
    let r: SimReport = simulate_ex1_sum_decode(&params)?;
    Ok(match format {
        Format::Text => format!(
            "n = {}, k = {}, shaping_k = {}, q = {}, rate = {} bits/symbol\n{} errors in {} trials: decode_error_rate = {}\n",
            r.n,
            r.k,
            r.shaping_k,
            r.q,
            sig9(r.rate),
            r.errors,
            r.trials,
            sig9(r.decode_error_rate)
        ),
        Format::Csv => records_csv(&[&r])?,
        Format::Structured => to_structured(&r)? + "\n",
    })
}

fn configure_threads() -> Result<(), Failure> {
    let Ok(value) = std::env::var(THREADS_VAR) else {
        return Ok(());
    };
    let threads: usize = value
        .trim()
        .parse()
        .ok()
        .filter(|&t| t > 0)
        .ok_or_else(|| Failure::Usage(format!("{THREADS_VAR} must be a positive integer, got {value:?}")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .map_err(|e| Failure::Usage(e.to_string()))
}

fn run(cli: Cli) -> Result<(), Failure> {
    configure_threads()?;
    let default = match cli.command {
        Command::Sweep { .. } => Format::Csv,
        _ => Format::Text,
    };
    let format = cli.format.unwrap_or(default);
    let output = match &cli.command {
        Command::Props { tau1, tau, delta1, delta, epsilon } => props(tau1, tau, delta1, delta, epsilon, format)?,
        Command::C1 { tau1, tau, delta } => c1(tau1, tau, delta, format)?,
        Command::Prop3 { tau1, tau, delta } => prop3(tau1, tau, delta, format)?,
        Command::Ex3 { beta, delta, tau } => ex3(beta, delta, tau, format)?,
        Command::Sweep { grid, channel, restarts, seed } => sweep(*grid, channel.as_ref(), *restarts, *seed, format)?,
        Command::Closure { n, k, q, seed } => closure(*n, *k, *q, *seed, format)?,
        Command::Sim { n, k, shaping_k, q, delta1, tau1, tau, trials, seed } => {
            sim(*n, *k, *shaping_k, *q, delta1, tau1, tau, *trials, *seed, format)?
        }
    };
    match &cli.out {
        Some(path) => std::fs::write(path, output)
            .map_err(|e| Failure::Data(format!("cannot write {}: {e}", path.display()))),
        None => {
            print!("{output}");
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(EXIT_USAGE) } else { ExitCode::SUCCESS };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(EXIT_USAGE)
        }
        Err(Failure::Data(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(EXIT_DATA)
        }
    }
}
