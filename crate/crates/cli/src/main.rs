use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand};
use slackcrn::{parse_network, ReactionNetwork, SlackMode};
use slackcrn_cli::report::{check_report, parse_report, slack_report};
use slackcrn_cli::{run, ExperimentConfig, Method, Task};

#[derive(Parser)]
#[command(name = "slackcrn", version, about = "Slack-reactant truncation of stochastic reaction networks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Parse a network file and print its species, complexes and matrices.
    Parse { file: PathBuf },
    /// Build a slack network.
    Slack {
        file: PathBuf,
        /// Conservation vector, comma separated; repeat for several rows.
        /// Suggested automatically when omitted.
        #[arg(long, value_parser = parse_ints)]
        w: Vec<Ints>,
        #[arg(long = "N", default_value_t = 10)]
        n: i64,
        #[arg(long, value_parser = parse_ints)]
        u: Option<Ints>,
        #[arg(long, default_value = "regular", value_parser = parse_mode)]
        mode: SlackMode,
        #[arg(long, value_parser = parse_counts)]
        x0: Option<Counts>,
    },
    /// Structural report: weak reversibility, deficiency, certificates.
    Check {
        file: PathBuf,
        #[arg(long, value_parser = parse_ints)]
        w: Option<Ints>,
        #[arg(long, value_parser = parse_counts)]
        x0: Option<Counts>,
    },
    /// Run an experiment from a JSON config.
    Run {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        network: Option<PathBuf>,
        #[arg(long)]
        task: Option<String>,
        /// N sweep, comma separated.
        #[arg(long = "N", value_parser = parse_ints)]
        n: Option<Ints>,
        /// Method; repeat for several (`slack-regular`, `sfsp:0,0`, ...).
        #[arg(long)]
        method: Vec<String>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

// Newtypes so clap treats a comma list as one value rather than many.
#[derive(Debug, Clone)]
struct Ints(Vec<i64>);

#[derive(Debug, Clone)]
struct Counts(Vec<u32>);

fn parse_ints(s: &str) -> Result<Ints, String> {
    s.split(',').map(|v| v.trim().parse::<i64>().map_err(|e| format!("`{v}`: {e}"))).collect::<Result<_, _>>().map(Ints)
}

fn parse_counts(s: &str) -> Result<Counts, String> {
    s.split(',').map(|v| v.trim().parse::<u32>().map_err(|e| format!("`{v}`: {e}"))).collect::<Result<_, _>>().map(Counts)
}

fn parse_mode(s: &str) -> Result<SlackMode, String> {
    match s {
        "regular" => Ok(SlackMode::Regular),
        "optimized" => Ok(SlackMode::Optimized),
        _ => Err(format!("unknown mode `{s}`")),
    }
}

fn load(file: &PathBuf) -> Result<ReactionNetwork> {
    let text = std::fs::read_to_string(file).with_context(|| format!("reading {}", file.display()))?;
    parse_network(&text).with_context(|| format!("parsing {}", file.display()))
}

fn print_json<T: serde::Serialize>(v: &T) -> Result<()> {
    let text = serde_json::to_string_pretty(v)?;
    match writeln!(std::io::stdout().lock(), "{text}") {
        // a closed pipe (`| head`) is not an error
        Err(e) if e.kind() == std::io::ErrorKind::BrokenPipe => Ok(()),
        r => Ok(r?),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match real_main() {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

fn real_main() -> Result<ExitCode> {
    match Cli::parse().command {
        Command::Parse { file } => print_json(&parse_report(&load(&file)?))?,
        Command::Slack { file, w, n, u, mode, x0 } => {
            let net = load(&file)?;
            let w = (!w.is_empty()).then(|| w.into_iter().map(|r| r.0).collect());
            let x0 = x0.map(|c| c.0);
            print_json(&slack_report(&net, w, n, u.map(|u| u.0), mode, x0.as_deref())?)?;
        }
        Command::Check { file, w, x0 } => {
            let x0 = x0.map(|c| c.0);
            print_json(&check_report(&load(&file)?, w.map(|w| w.0), x0.as_deref())?)?;
        }
        Command::Run { config, network, task, n, method, seed, out } => {
            let mut cfg = ExperimentConfig::load(&config)?;
            if let Some(p) = network {
                cfg.network = p;
            }
            if let Some(t) = task {
                cfg.task = Task::parse(&t)?;
            }
            if let Some(n) = n {
                cfg.n_sweep = n.0;
            }
            if !method.is_empty() {
                cfg.methods = method.iter().map(|m| Method::parse(m)).collect::<Result<_>>()?;
            }
            if let (Some(seed), Some(ssa)) = (seed, cfg.ssa.as_mut()) {
                ssa.seed = seed;
            }
            if let Some(o) = out {
                cfg.out = o;
            }
            let summary = run(&cfg)?;
            for r in &summary.results {
                let detail = r.mean.map(|m| format!("mean={m:.6e}")).or(r.error.clone()).unwrap_or_default();
                println!("{:<18} N={:<5} {:<10} {:?} {} {}", r.method, r.n, r.task, r.status, detail, r.flag.as_deref().unwrap_or(""));
            }
            if let Some(s) = &summary.ssa {
                println!("ssa mean={:.6e} stderr={:.3e} hits={} censored={}", s.mean, s.stderr, s.n_hit, s.n_censored);
            }
            println!("wrote {}", cfg.out.join("summary.json").display());
            if summary.failed() {
                return Ok(ExitCode::from(2));
            }
        }
    }
    Ok(ExitCode::SUCCESS)
}
