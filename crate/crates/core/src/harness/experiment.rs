use std::fs;
use std::io::{BufRead, Write};
use std::path::Path;

use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use super::stats::{chi_square_test, ks_distance, ks_noise, ChiSquareTest, KOLMOGOROV_MEAN, KS_CRITICAL_5};
use super::{ExperimentConfig, HarnessError};
use crate::coalescent::{coalescence_matrix, partition_process, sample_without_replacement, Partition};
use crate::limits::{ctd_single_time, pairwise_cdf, BinaryBDParams};
use crate::simulator::rng::{replicate_rng, replicate_seed};
use crate::simulator::{Outcome, Simulator};

/// Partition frequencies are compared with the limit law up to this many samples.
pub const MAX_PARTITION_M: usize = 4;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ReplicateStatus {
    Retained,
    Extinct,
    /// Alive but fewer than `m` individuals at the sampling time.
    TooSmall,
    /// Event cap hit or rates vanished before the stopping rule fired.
    Incomplete,
}

/// Retained replicate: coalescence times of all pairs and partitions on the
/// time grid.
#[derive(Clone, Debug, PartialEq)]
pub struct ReplicateRecord {
    pub replicate: usize,
    /// `tau(i, j)` for `i < j`, row-major.
    pub taus: Vec<f64>,
    pub partitions: Vec<Partition>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PartitionComparison {
    /// Absolute time.
    pub t: f64,
    #[serde(flatten)]
    pub test: ChiSquareTest,
    pub pass: bool,
}

/// Outcome of all replicates at one carrying capacity.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct KappaResult {
    pub kappa: u64,
    pub attempted: usize,
    pub retained: usize,
    pub extinct: usize,
    pub too_small: usize,
    pub incomplete: usize,
    pub retained_fraction: f64,
    /// KS distance of pooled pairwise times from the limit law (binary
    /// intrinsic rates only).
    pub ks: Option<f64>,
    pub ks_threshold: Option<f64>,
    pub ks_pass: Option<bool>,
    pub partition_tests: Vec<PartitionComparison>,
    #[serde(skip)]
    pub records: Vec<ReplicateRecord>,
}

impl KappaResult {
    /// Every pairwise coalescence time of every retained replicate, sorted.
    pub fn pooled_times(&self) -> Vec<f64> {
        let mut all: Vec<f64> = self.records.iter().flat_map(|r| r.taus.iter().copied()).collect();
        all.sort_by(f64::total_cmp);
        all
    }

    /// `tau(1, 2)` of each retained replicate, sorted.
    pub fn first_pair_times(&self) -> Vec<f64> {
        let mut all: Vec<f64> = self.records.iter().filter_map(|r| r.taus.first().copied()).collect();
        all.sort_by(f64::total_cmp);
        all
    }

    pub fn pass(&self) -> bool {
        self.ks_pass.unwrap_or(true) && self.partition_tests.iter().all(|p| p.pass)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ExperimentResult {
    /// Thresholds are engineering defaults, not derived from a rate of
    /// convergence.
    pub engineering_thresholds: bool,
    pub m: usize,
    pub replicates: usize,
    pub seed: u64,
    pub stop: String,
    pub schedule: String,
    pub growth_rate: f64,
    pub kappas: Vec<KappaResult>,
    /// KS non-increasing in kappa within twice the sampling noise.
    pub ks_non_increasing: Option<bool>,
    pub pass: bool,
}

/// Simulates `replicates` runs per kappa, keeps those with at least `m`
/// individuals at the sampling time, samples `m` of them without
/// replacement and records their coalescence times. Results depend only on
/// the master seed, never on the thread count.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentResult, HarnessError> {
    cfg.validate()?;
    let schedule = cfg.rate_schedule()?;
    let stop = cfg.stopping_rule()?;
    let r = schedule.intrinsic_growth();
    let grid = cfg.times()?;
    let binary = BinaryBDParams::from_rates(schedule.intrinsic()).ok();
    let limit_partitions = match binary {
        Some(p) if cfg.m >= 2 && cfg.m <= MAX_PARTITION_M => Some(
            grid.iter()
                .map(|&t| ctd_single_time(&p, cfg.m, t))
                .collect::<Result<Vec<_>, _>>()?,
        ),
        _ => None,
    };
    let pool = cfg.thread_pool()?;

    let mut kappas = Vec::with_capacity(cfg.kappas.len());
    for &kappa in &cfg.kappas {
        let sim = Simulator::new(&schedule, kappa).with_max_events(cfg.max_events);
        let kappa_seed = replicate_seed(cfg.seed, kappa);
        let outcomes: Vec<Result<(ReplicateStatus, Option<ReplicateRecord>), HarnessError>> = pool.install(|| {
            (0..cfg.replicates)
                .into_par_iter()
                .map(|k| {
                    let mut rng = replicate_rng(kappa_seed, k as u64);
                    let run = sim.simulate_with(stop, &mut rng)?;
                    let status = match run.outcome {
                        Outcome::Extinct => ReplicateStatus::Extinct,
                        Outcome::BudgetExhausted | Outcome::Frozen => ReplicateStatus::Incomplete,
                        Outcome::Stopped if run.final_size() < cfg.m => ReplicateStatus::TooSmall,
                        Outcome::Stopped => ReplicateStatus::Retained,
                    };
                    if status != ReplicateStatus::Retained {
                        return Ok((status, None));
                    }
                    let sample = sample_without_replacement(&run.log, run.stop_time, cfg.m, rng.random())?;
                    let mat = coalescence_matrix(&run.log, &sample)?;
                    let taus = mat.pairs().map(|(_, _, t)| t).collect();
                    let partitions = if cfg.m <= MAX_PARTITION_M {
                        let process = partition_process(&mat)?;
                        grid.iter().map(|&t| process.partition_at(t)).collect()
                    } else {
                        Vec::new()
                    };
                    Ok((status, Some(ReplicateRecord { replicate: k, taus, partitions })))
                })
                .collect()
        });

        let mut result = KappaResult {
            kappa,
            attempted: cfg.replicates,
            retained: 0,
            extinct: 0,
            too_small: 0,
            incomplete: 0,
            retained_fraction: 0.0,
            ks: None,
            ks_threshold: None,
            ks_pass: None,
            partition_tests: Vec::new(),
            records: Vec::new(),
        };
        for outcome in outcomes {
            let (status, record) = outcome?;
            match status {
                ReplicateStatus::Retained => result.retained += 1,
                ReplicateStatus::Extinct => result.extinct += 1,
                ReplicateStatus::TooSmall => result.too_small += 1,
                ReplicateStatus::Incomplete => result.incomplete += 1,
            }
            result.records.extend(record);
        }
        result.retained_fraction = result.retained as f64 / cfg.replicates as f64;

        if binary.is_some() && cfg.m >= 2 && result.retained > 0 {
            let pooled = result.pooled_times();
            let ks = ks_distance(&pooled, |t| pairwise_cdf(r, t))?;
            let threshold = KS_CRITICAL_5 / (result.retained as f64).sqrt() + cfg.ks_allowance;
            result.ks = Some(ks);
            result.ks_threshold = Some(threshold);
            result.ks_pass = Some(ks < threshold);
        }
        if let (Some(law), true) = (&limit_partitions, result.retained > 0) {
            for (g, (&t, probs)) in grid.iter().zip(law).enumerate() {
                let observed: Vec<u64> = probs
                    .iter()
                    .map(|(part, _)| result.records.iter().filter(|rec| rec.partitions[g] == *part).count() as u64)
                    .collect();
                let expected: Vec<f64> = probs.iter().map(|(_, p)| p.max(0.0)).collect();
                let test = chi_square_test(&observed, &expected)?;
                result.partition_tests.push(PartitionComparison { t, test, pass: test.p_value >= cfg.chi_square_level });
            }
        }
        kappas.push(result);
    }

    let ks_non_increasing = ks_trend(&kappas);
    let pass = kappas.iter().all(KappaResult::pass) && ks_non_increasing.unwrap_or(true);
    Ok(ExperimentResult {
        engineering_thresholds: true,
        m: cfg.m,
        replicates: cfg.replicates,
        seed: cfg.seed,
        stop: cfg.stop.clone(),
        schedule: schedule.kind().name().to_string(),
        growth_rate: r,
        kappas,
        ks_non_increasing,
        pass,
    })
}

/// `KS(kappa_(i+1)) <= KS(kappa_i) + 2 * noise` for consecutive kappas, with
/// noise the mean KS statistic under the null at the smaller sample size.
fn ks_trend(kappas: &[KappaResult]) -> Option<bool> {
    let points: Vec<(f64, usize)> = kappas.iter().filter_map(|k| k.ks.map(|ks| (ks, k.retained))).collect();
    if points.len() < 2 {
        return None;
    }
    Some(points.windows(2).all(|w| w[1].0 <= w[0].0 + 2.0 * ks_noise(w[0].1.min(w[1].1))))
}

/// One row of a convergence table.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConvergenceRow {
    pub kappa: u64,
    pub retained: usize,
    pub ks: f64,
    /// Mean KS statistic under the null for this many samples.
    pub noise: f64,
    pub threshold: f64,
    pub pass: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConvergenceStudy {
    pub rows: Vec<ConvergenceRow>,
    pub non_increasing: Option<bool>,
    pub partition_tests: Vec<(u64, Vec<PartitionComparison>)>,
    pub pass: bool,
}

impl ConvergenceStudy {
    /// Tabulates the KS distances of a finished experiment.
    pub fn from_result(result: &ExperimentResult) -> Self {
        let rows: Vec<ConvergenceRow> = result
            .kappas
            .iter()
            .filter_map(|k| {
                Some(ConvergenceRow {
                    kappa: k.kappa,
                    retained: k.retained,
                    ks: k.ks?,
                    noise: KOLMOGOROV_MEAN / (k.retained as f64).sqrt(),
                    threshold: k.ks_threshold?,
                    pass: k.ks_pass?,
                })
            })
            .collect();
        let partition_tests = result.kappas.iter().map(|k| (k.kappa, k.partition_tests.clone())).collect();
        Self { pass: result.pass, non_increasing: result.ks_non_increasing, rows, partition_tests }
    }
}

/// Runs the experiment and reports how the KS distance to the limit law
/// behaves as kappa grows.
pub fn convergence_study(cfg: &ExperimentConfig) -> Result<ConvergenceStudy, HarnessError> {
    if cfg.m < 2 {
        return Err(HarnessError::Config("a convergence study needs m >= 2".into()));
    }
    Ok(ConvergenceStudy::from_result(&run_experiment(cfg)?))
}

/// Writes `kappa_<k>/tau.csv`, `kappa_<k>/partitions.csv` (for small `m`)
/// and `summary.json` under `dir`.
pub fn write_experiment(result: &ExperimentResult, cfg: &ExperimentConfig, dir: &Path) -> Result<(), HarnessError> {
    fs::create_dir_all(dir)?;
    let grid = cfg.times()?;
    for k in &result.kappas {
        let sub = dir.join(format!("kappa_{}", k.kappa));
        fs::create_dir_all(&sub)?;
        write_tau_csv(k, cfg.m, fs::File::create(sub.join("tau.csv"))?)?;
        if cfg.m <= MAX_PARTITION_M {
            let mut out = std::io::BufWriter::new(fs::File::create(sub.join("partitions.csv"))?);
            writeln!(out, "replicate,t,partition")?;
            for rec in &k.records {
                for (t, part) in grid.iter().zip(&rec.partitions) {
                    writeln!(out, "{},{},\"{}\"", rec.replicate, t, part)?;
                }
            }
            out.flush()?;
        }
    }
    fs::write(dir.join("summary.json"), serde_json::to_string_pretty(result)? + "\n")?;
    Ok(())
}

/// `replicate,i,j,tau` rows; sample indices are 1-based.
pub fn write_tau_csv<W: Write>(k: &KappaResult, m: usize, out: W) -> Result<(), HarnessError> {
    let mut out = std::io::BufWriter::new(out);
    writeln!(out, "replicate,i,j,tau")?;
    for rec in &k.records {
        let mut idx = 0;
        for i in 1..=m {
            for j in (i + 1)..=m {
                writeln!(out, "{},{},{},{}", rec.replicate, i, j, rec.taus[idx])?;
                idx += 1;
            }
        }
    }
    out.flush()?;
    Ok(())
}

/// Parses a `tau.csv` back into `(replicate, i, j, tau)` rows.
pub fn read_tau_csv<R: BufRead>(input: R) -> Result<Vec<(usize, usize, usize, f64)>, HarnessError> {
    let mut rows = Vec::new();
    for (n, line) in input.lines().enumerate() {
        let line = line?;
        if n == 0 {
            if line != "replicate,i,j,tau" {
                return Err(HarnessError::Domain(format!("unexpected tau.csv header `{line}`")));
            }
            continue;
        }
        let bad = || HarnessError::Domain(format!("tau.csv line {}: `{line}`", n + 1));
        let f: Vec<&str> = line.split(',').collect();
        if f.len() != 4 {
            return Err(bad());
        }
        rows.push((
            f[0].parse().map_err(|_| bad())?,
            f[1].parse().map_err(|_| bad())?,
            f[2].parse().map_err(|_| bad())?,
            f[3].parse().map_err(|_| bad())?,
        ));
    }
    Ok(rows)
}

/// Serialises parsed rows in the same format as [`write_tau_csv`].
pub fn tau_rows_to_csv(rows: &[(usize, usize, usize, f64)]) -> String {
    let mut s = String::from("replicate,i,j,tau\n");
    for (rep, i, j, t) in rows {
        s.push_str(&format!("{rep},{i},{j},{t}\n"));
    }
    s
}
