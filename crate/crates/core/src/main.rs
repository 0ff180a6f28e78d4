use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};

use pifilter_bocs::encoding::DesignVector;
use pifilter_bocs::harness::report::{
    load_trial_logs, write_histogram_csv, write_rank_table_csv, write_summary_csv, write_trial_group,
};
use pifilter_bocs::harness::{enumerate_and_rank, run_trials, RunConfig, RunKind};
use pifilter_bocs::objective::{BlackBox, Branch};
use pifilter_bocs::solvers::{MockBehavior, MockSampler, SolverKind};

#[derive(Parser)]
#[command(name = "pifilter", version, about = "Black-box design of pi-type noise filters")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run surrogate-based optimization trials.
    Optimize(RunArgs),
    /// Run random-search trials with the same budget.
    Baseline(RunArgs),
    /// Evaluate and rank every canonical design.
    Enumerate {
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long, default_value = "out")]
        out: PathBuf,
        /// Histogram bin width in dB.
        #[arg(long, default_value_t = 1.0)]
        bin_width: f64,
    },
    /// Evaluate one design.
    Evaluate {
        #[arg(long)]
        bits: String,
        #[arg(long)]
        config: Option<PathBuf>,
    },
    /// Turn trial logs into CSV series.
    Report {
        /// Directory holding `<kind>_trial_NN.jsonl` logs.
        #[arg(long, default_value = "out")]
        logs: PathBuf,
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long, default_value = "report")]
        out: PathBuf,
        #[arg(long, default_value_t = 1.0)]
        bin_width: f64,
    },
    /// Serve the exhaustive mock sampler over HTTP.
    MockSampler {
        #[arg(long, default_value_t = 8765)]
        port: u16,
    },
}

#[derive(Args)]
struct RunArgs {
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, value_enum)]
    solver: Option<SolverKind>,
    #[arg(long)]
    endpoint: Option<String>,
    #[arg(long)]
    trials: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, default_value = "out")]
    out: PathBuf,
}

fn load_config(path: Option<&Path>) -> Result<RunConfig> {
    match path {
        Some(p) => RunConfig::load(p).with_context(|| format!("loading config {}", p.display())),
        None => Ok(RunConfig::default()),
    }
}

fn run(args: RunArgs, kind: RunKind) -> Result<()> {
    let mut cfg = load_config(args.config.as_deref())?;
    if let Some(s) = args.solver {
        cfg.solver = s;
    }
    if args.endpoint.is_some() {
        cfg.endpoint = args.endpoint;
    }
    if let Some(t) = args.trials {
        cfg.n_trials = t;
    }
    if let Some(s) = args.seed {
        cfg.seed = s;
    }
    cfg.validate()?;

    std::fs::create_dir_all(&args.out)?;
    std::fs::write(args.out.join(format!("{}_config.json", kind.label())), cfg.to_json())?;
    let histories = run_trials(&cfg, kind, Some(&args.out))?;
    write_trial_group(&args.out, kind.label(), &histories)?;
    for (t, h) in histories.iter().enumerate() {
        let best = h.best().expect("non-empty history");
        println!("trial {t:02}: best y = {:.4} at {} (seq {})", best.y, best.x, best.seq);
    }
    Ok(())
}

fn main() -> Result<()> {
    match Cli::parse().command {
        Command::Optimize(args) => run(args, RunKind::Bocs),
        Command::Baseline(args) => run(args, RunKind::Random),
        Command::Enumerate { config, out, bin_width } => {
            let cfg = load_config(config.as_deref())?;
            cfg.validate()?;
            let table = enumerate_and_rank(&cfg.objective())?;
            std::fs::create_dir_all(&out)?;
            write_rank_table_csv(&out.join("rank_table.csv"), &table)?;
            write_histogram_csv(&out.join("histogram.csv"), &table.histogram(bin_width))?;
            let best = table.best().expect("non-empty table");
            let worst = table.rows.last().expect("non-empty table");
            println!("{} designs; best {} at {:.4} dB, worst {:.4} dB", table.len(), best.bits, best.s21_db, worst.s21_db);
            Ok(())
        }
        Command::Evaluate { bits, config } => {
            let cfg = load_config(config.as_deref())?;
            cfg.validate()?;
            let x: DesignVector = bits.trim().parse()?;
            let obs = cfg.objective().evaluate(&x, 0)?;
            let branch = match obs.branch {
                Branch::S21 => "s21",
                Branch::Penalty => "penalty",
            };
            println!("branch={branch} z={} y={}", obs.z, obs.y);
            Ok(())
        }
        Command::Report { logs, config, out, bin_width } => {
            let cfg = load_config(config.as_deref())?;
            let groups = load_trial_logs(&logs, &cfg)?;
            anyhow::ensure!(!groups.is_empty(), "no trial logs in {}", logs.display());
            std::fs::create_dir_all(&out)?;
            let table = enumerate_and_rank(&cfg.objective())?;
            write_histogram_csv(&out.join("histogram.csv"), &table.histogram(bin_width))?;
            for (label, histories) in &groups {
                write_trial_group(&out, label, histories)?;
                write_summary_csv(&out.join(format!("{label}_summary.csv")), histories, &table)?;
                println!("{label}: {} trial(s)", histories.len());
            }
            Ok(())
        }
        Command::MockSampler { port } => {
            let mock = MockSampler::bind(&format!("127.0.0.1:{port}"), MockBehavior::Exhaustive { keep: 1 })?;
            println!("mock sampler listening on {}", mock.url());
            mock.join();
            Ok(())
        }
    }
}
