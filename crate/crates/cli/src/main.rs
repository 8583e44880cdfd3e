//! Command-line front end: simulate runs, extract coalescent trees, evaluate
//! the limit law, and run experiments and diagnostics.

use std::fs;
use std::io::{self, BufReader, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use coaltree::coalescent::{coalescence_matrix, sample_by_marks, sample_without_replacement, MarkedSample};
use coaltree::genealogy::to_newick;
use coaltree::harness::{self, ExperimentConfig};
use coaltree::limits::{ctimes_survival, sample_limit_tree_with, LimitTree};
use coaltree::simulator::rng::rng_from_seed;
use coaltree::simulator::{self, Simulator};
use coaltree::{BinaryBDParamsF64, EventLogF64, RateScheduleF64, StoppingRuleF64};
use rand::Rng;

#[derive(Parser)]
#[command(name = "coaltree", version, about = "Density-dependent branching processes and their coalescent trees")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate one run and write its event log.
    Simulate {
        /// Schedule JSON, inline or as a file path.
        #[arg(long)]
        schedule: String,
        #[arg(long)]
        kappa: u64,
        /// `time:T`, `size:X`, `logsize:X` or `events:K`.
        #[arg(long)]
        stop: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = simulator::DEFAULT_MAX_EVENTS)]
        max_events: usize,
        /// Event log CSV; stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Sample a run and extract the coalescent tree of the sample.
    Coalesce {
        /// Event log CSV.
        #[arg(long)]
        run: PathBuf,
        #[arg(long)]
        m: usize,
        #[arg(long, value_enum, default_value_t = Mode::Simple)]
        mode: Mode,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Sampling time; defaults to the last event time.
        #[arg(long)]
        time: Option<f64>,
        #[arg(long)]
        newick: Option<PathBuf>,
        #[arg(long)]
        tau_out: Option<PathBuf>,
    },
    /// Evaluate or sample the limiting coalescence times.
    Limit {
        /// Growth rate.
        #[arg(long)]
        r: f64,
        #[arg(long)]
        m: usize,
        /// Comma-separated times `t1,..,t_{m-1}`; prints the joint survival function.
        #[arg(long)]
        eval: Option<String>,
        /// Number of trees to draw.
        #[arg(long)]
        sample: Option<usize>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run a Monte Carlo experiment across carrying capacities.
    Experiment {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out_dir: Option<PathBuf>,
    },
    /// Drift or coupling diagnostics for a config.
    Diagnose {
        #[arg(long, value_enum)]
        mode: DiagnoseMode,
        #[arg(long)]
        config: PathBuf,
        /// JSON report; stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Mode {
    /// Uniform sample without replacement.
    Simple,
    /// Uniform marks mapped through the descendant-fraction intervals.
    Marks,
}

#[derive(Clone, Copy, ValueEnum)]
enum DiagnoseMode {
    Drift,
    Coupling,
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

/// Returns whether every configured threshold was met.
fn run(cli: Cli) -> Result<bool> {
    match cli.command {
        Command::Simulate { schedule, kappa, stop, seed, max_events, out } => {
            let text = if schedule.trim_start().starts_with('{') {
                schedule
            } else {
                fs::read_to_string(&schedule).with_context(|| format!("reading schedule {schedule}"))?
            };
            let schedule = RateScheduleF64::from_json(&text)?;
            let stop: StoppingRuleF64 = stop.parse()?;
            let run = Simulator::new(&schedule, kappa).with_max_events(max_events).simulate(stop, seed)?;
            write_output(out.as_deref(), |w| run.log.write_csv(w))?;
            eprintln!(
                "outcome {:?}, stop time {}, final size {}, events {}",
                run.outcome,
                run.stop_time,
                run.final_size(),
                run.log.events().len()
            );
            Ok(true)
        }
        Command::Coalesce { run, m, mode, seed, time, newick, tau_out } => {
            let file = fs::File::open(&run).with_context(|| format!("opening {}", run.display()))?;
            let log = EventLogF64::read_csv(BufReader::new(file))?;
            let t = time.unwrap_or_else(|| log.last_time());
            let sample = match mode {
                Mode::Simple => sample_without_replacement(&log, t, m, seed)?,
                Mode::Marks => {
                    let mut rng = rng_from_seed(seed);
                    let marks: Vec<f64> = (0..m).map(|_| rng.random::<f64>()).collect();
                    match sample_by_marks(&log, t, &marks)? {
                        MarkedSample::Sample(s) => s,
                        MarkedSample::Ghost => bail!("population is extinct at time {t}"),
                    }
                }
            };
            let mat = coalescence_matrix(&log, &sample)?;
            let tree = to_newick(&mat.to_tree()?)?;
            match newick {
                Some(path) => fs::write(&path, format!("{tree}\n"))?,
                None => println!("{tree}"),
            }
            if let Some(path) = tau_out {
                mat.write_tau_csv(io::BufWriter::new(fs::File::create(path)?))?;
            }
            for (k, label) in sample.labels.iter().enumerate() {
                eprintln!("sample {}: {}", k + 1, if label.is_root() { "(root)".to_string() } else { label.to_string() });
            }
            Ok(true)
        }
        Command::Limit { r, m, eval, sample, seed, out } => {
            let params = BinaryBDParamsF64::yule(r)?;
            if eval.is_none() && sample.is_none() {
                bail!("pass --eval and/or --sample");
            }
            if let Some(list) = eval {
                let times = list
                    .split(',')
                    .map(|s| s.trim().parse::<f64>().with_context(|| format!("bad time `{s}`")))
                    .collect::<Result<Vec<_>>>()?;
                println!("{}", ctimes_survival(r, m, &times)?);
            }
            if let Some(count) = sample {
                let mut rng = rng_from_seed(seed);
                write_output(out.as_deref(), |w| {
                    writeln!(w, "{}", LimitTree::<f64>::csv_header(m))?;
                    for _ in 0..count {
                        let tree = sample_limit_tree_with(&params, m, &mut rng).map_err(io::Error::other)?;
                        writeln!(w, "{}", tree.csv_row())?;
                    }
                    Ok(())
                })?;
            }
            Ok(true)
        }
        Command::Experiment { config, out_dir } => {
            let cfg = read_config(&config)?;
            let dir = out_dir.or_else(|| cfg.out_dir.clone()).context("no output directory (--out-dir or out_dir)")?;
            let result = harness::run_experiment(&cfg)?;
            harness::write_experiment(&result, &cfg, &dir)?;
            println!("kappa\tretained\textinct\tsmall\tks\tthreshold\tpass");
            for k in &result.kappas {
                let fmt = |x: Option<f64>| x.map_or("-".to_string(), |v| format!("{v:.4}"));
                println!(
                    "{}\t{}\t{}\t{}\t{}\t{}\t{}",
                    k.kappa,
                    k.retained,
                    k.extinct,
                    k.too_small,
                    fmt(k.ks),
                    fmt(k.ks_threshold),
                    k.pass()
                );
            }
            println!("overall: {}", if result.pass { "pass" } else { "fail" });
            Ok(result.pass)
        }
        Command::Diagnose { mode, config, out } => {
            let cfg = read_config(&config)?;
            let (json, pass) = match mode {
                DiagnoseMode::Drift => {
                    let tables = harness::drift_diagnostic(&cfg, &cfg.time_grid)?;
                    let pass = tables.iter().all(|t| t.faster_than_inverse.unwrap_or(false));
                    (serde_json::to_string_pretty(&tables)?, pass)
                }
                DiagnoseMode::Coupling => {
                    let report = harness::coupling_diagnostic(&cfg)?;
                    (serde_json::to_string_pretty(&report)?, report.pass)
                }
            };
            write_output(out.as_deref(), |w| writeln!(w, "{json}"))?;
            Ok(pass)
        }
    }
}

fn read_config(path: &Path) -> Result<ExperimentConfig> {
    let text = fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
    Ok(ExperimentConfig::from_json(&text)?)
}

fn write_output(path: Option<&Path>, f: impl FnOnce(&mut dyn Write) -> io::Result<()>) -> Result<()> {
    match path {
        Some(p) => {
            let mut w = io::BufWriter::new(fs::File::create(p).with_context(|| format!("creating {}", p.display()))?);
            f(&mut w)?;
            w.flush()?;
        }
        None => {
            let stdout = io::stdout();
            let mut w = stdout.lock();
            f(&mut w)?;
        }
    }
    Ok(())
}
