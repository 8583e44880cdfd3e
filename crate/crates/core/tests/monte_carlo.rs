//! Monte Carlo oracles: the simulator checked against closed forms, and the
//! closed forms checked against the simulator.

use coaltree::coalescent::{descendant_fraction, sample_by_marks, MarkedSample, SampleSet};
use coaltree::genealogy::{EventLog, Label};
use coaltree::harness::stats::{kolmogorov_p_value, mean_and_se};
use coaltree::harness::{chi_square_test, ks_two_sample, run_experiment, ExperimentConfig};
use coaltree::limits::{bd_laplace_w, bd_pgf, sample_limit_tree_with};
use coaltree::rates::{OffspringRates, TableRow};
use coaltree::simulator::rng::{replicate_rng, replicate_seed, rng_from_seed};
use coaltree::simulator::{simulate_coupled, Outcome, SizeOutcome, Simulator, StoppingRule};
use coaltree::{BinaryBDParamsF64, RateScheduleF64};
use rand::Rng;

fn rates(pairs: &[(usize, f64)]) -> OffspringRates<f64> {
    OffspringRates::new(pairs.iter().copied()).unwrap()
}

fn free(pairs: &[(usize, f64)]) -> RateScheduleF64 {
    RateScheduleF64::density_independent(rates(pairs)).unwrap()
}

/// Mean of `f(path)` over `reps` size-only paths run to time `t`.
fn size_mean(s: &RateScheduleF64, t: f64, reps: u64, seed: u64, f: impl Fn(u64) -> f64) -> (f64, f64) {
    let sim = Simulator::new(s, 1);
    let values: Vec<f64> = (0..reps)
        .map(|k| {
            let path = sim.simulate_sizes(StoppingRule::FixedTime(t), &mut replicate_rng(seed, k), |_| false).unwrap();
            f(if path.end < t { 0 } else { path.size_at(t).unwrap() })
        })
        .collect();
    mean_and_se(&values)
}

#[test]
fn pure_death_lifetime_is_unit_exponential() {
    let table = vec![TableRow { n_min: 1, n_max: None, rates: rates(&[(0, 1.0)]) }];
    let s = RateScheduleF64::user_table(rates(&[(2, 1.0)]), table).unwrap();
    let sim = Simulator::new(&s, 50);
    let times: Vec<f64> = (0..100_000)
        .map(|k| {
            let path = sim.simulate_sizes(StoppingRule::FixedTime(1e9), &mut replicate_rng(1, k), |_| false).unwrap();
            assert_eq!(path.outcome, SizeOutcome::Run(Outcome::Extinct));
            path.end
        })
        .collect();
    let (mean, _) = mean_and_se(&times);
    assert!((mean - 1.0).abs() < 0.01, "mean extinction time {mean}");
}

#[test]
fn yule_mean_size_grows_exponentially() {
    let (mean, se) = size_mean(&free(&[(2, 1.0)]), 3.0, 100_000, 2, |n| n as f64);
    assert!((mean - 3f64.exp()).abs() < 3.0 * se, "{mean} ± {se}");
}

#[test]
fn yule_pgf_matches_simulation() {
    let p = BinaryBDParamsF64::yule(1.0).unwrap();
    let exact = bd_pgf(&p, 1.0, 0.5, 0).unwrap();
    let (mean, se) = size_mean(&free(&[(2, 1.0)]), 1.0, 1_000_000, 3, |n| 0.5f64.powi(n as i32));
    assert!((mean - exact).abs() < 3.0 * se, "{mean} ± {se} vs {exact}");
}

#[test]
fn birth_death_pgf_matches_simulation() {
    let p = BinaryBDParamsF64::new(2.0, 1.0).unwrap();
    let s = free(&[(0, 1.0), (2, 2.0)]);
    for (t, z) in [(0.5, 0.3), (1.5, 0.8)] {
        let exact = bd_pgf(&p, t, z, 0).unwrap();
        let (mean, se) = size_mean(&s, t, 200_000, 4, |n| z.powi(n as i32));
        assert!((mean - exact).abs() < 3.0 * se, "t={t} s={z}: {mean} ± {se} vs {exact}");
    }
}

#[test]
fn extinction_probability_is_death_over_birth() {
    let p = BinaryBDParamsF64::new(1.5, 0.5).unwrap();
    let q = bd_laplace_w(&p, f64::INFINITY, 0).unwrap();
    assert!((q - 1.0 / 3.0).abs() < 1e-15);
    let s = free(&[(0, 0.5), (2, 1.5)]);
    let sim = Simulator::new(&s, 1);
    let reps = 100_000;
    let dead = (0..reps)
        .filter(|&k| {
            // From 300 individuals extinction has probability 3^-300.
            let path = sim.simulate_sizes(StoppingRule::FixedTime(1e9), &mut replicate_rng(5, k), |n| n >= 300).unwrap();
            path.outcome == SizeOutcome::Run(Outcome::Extinct)
        })
        .count() as f64;
    let freq = dead / reps as f64;
    let se = (q * (1.0 - q) / reps as f64).sqrt();
    assert!((freq - q).abs() < 3.0 * se, "{freq} vs {q}");
}

#[test]
fn yule_laplace_transform_matches_scaled_size() {
    // W is approximated by exp(-rT) N(T) at T = 8; the truncation bias is
    // O(exp(-T)), a third of the standard error here.
    let p = BinaryBDParamsF64::yule(1.0).unwrap();
    let exact = bd_laplace_w(&p, 1.0, 0).unwrap();
    let t: f64 = 8.0;
    let (mean, se) = size_mean(&free(&[(2, 1.0)]), t, 100_000, 6, |n| (-(-t).exp() * n as f64).exp());
    assert!((mean - exact).abs() < 3.0 * se, "{mean} ± {se} vs {exact}");
}

fn experiment_config(kind: &str, pairs: &[(usize, f64)], kappas: Vec<u64>, stop: &str, reps: usize, seed: u64) -> ExperimentConfig {
    let desc = rates(pairs).to_string_map();
    let schedule = coaltree::rates::ScheduleDescriptor { kind: kind.into(), intrinsic: desc, params: Default::default() };
    ExperimentConfig::new(schedule, kappas, stop, 2, reps, seed)
}

#[test]
fn experiment_retains_surviving_half() {
    // Survival probability of the {0: 1, 2: 2} process is 1 - q = 1/2.
    let cfg = experiment_config("density-independent", &[(0, 1.0), (2, 2.0)], vec![1000], "time:6", 10_000, 7);
    let k = &run_experiment(&cfg).unwrap().kappas[0];
    let se = (0.25 / k.attempted as f64).sqrt();
    // Survivors to t = 6 that still die out later add O(e^-6) to the gap.
    assert!((k.retained_fraction - 0.5).abs() < 3.0 * se + 3e-3, "{}", k.retained_fraction);
    assert_eq!(k.retained + k.extinct + k.too_small + k.incomplete, k.attempted);
}

#[test]
fn yule_experiment_retains_everything() {
    let cfg = experiment_config("density-independent", &[(2, 1.0)], vec![100], "size:0.5", 500, 14);
    let k = &run_experiment(&cfg).unwrap().kappas[0];
    assert_eq!(k.retained, k.attempted);
    assert_eq!(k.retained_fraction, 1.0);
}

#[test]
fn too_small_rejections_shrink_with_kappa() {
    let mut fractions = Vec::new();
    for kappa in [10u64, 100, 1000] {
        let cfg = experiment_config("density-independent", &[(0, 1.0), (2, 2.0)], vec![kappa], "size:0.1", 4000, 15);
        let k = &run_experiment(&cfg).unwrap().kappas[0];
        fractions.push(k.too_small as f64 / k.attempted as f64);
    }
    for w in fractions.windows(2) {
        let noise = 3.0 * ((w[0] * (1.0 - w[0]) + w[1] * (1.0 - w[1])) / 4000.0).sqrt();
        assert!(w[1] <= w[0] + noise, "{fractions:?}");
    }
}

#[test]
fn marks_sample_uniformly_with_replacement() {
    let mut log: EventLog<f64> = EventLog::new();
    log.record_label(0.1, &Label::root(), 2).unwrap();
    log.record_label(0.2, &Label::new(vec![1]), 3).unwrap();
    log.record_label(0.3, &Label::new(vec![2]), 2).unwrap();
    let alive: Vec<Label> = log.replay(1.0).alive.into_iter().collect();
    assert_eq!(alive.len(), 5);
    let mut rng = rng_from_seed(8);
    let marks: Vec<f64> = (0..100_000).map(|_| rng.random()).collect();
    let MarkedSample::Sample(SampleSet { labels, .. }) = sample_by_marks(&log, 1.0, &marks).unwrap() else {
        panic!("population is alive");
    };
    let counts: Vec<u64> = alive.iter().map(|a| labels.iter().filter(|l| *l == a).count() as u64).collect();
    let test = chi_square_test(&counts, &[0.2; 5]).unwrap();
    assert!(test.p_value > 0.01, "{test:?}");
}

#[test]
fn limit_tree_topology_is_kingman() {
    let p = BinaryBDParamsF64::new(2.0, 0.5).unwrap();
    let mut rng = rng_from_seed(9);
    let mut counts = [0u64; 3];
    for _ in 0..100_000 {
        let tree = sample_limit_tree_with(&p, 3, &mut rng).unwrap();
        let k = match tree.cherry() {
            (1, 2) => 0,
            (1, 3) => 1,
            (2, 3) => 2,
            other => panic!("bad cherry {other:?}"),
        };
        counts[k] += 1;
    }
    let test = chi_square_test(&counts, &[1.0 / 3.0; 3]).unwrap();
    assert!(test.p_value > 0.01, "{counts:?} {test:?}");
}

#[test]
fn coupled_and_plain_sizes_agree_without_density_dependence() {
    let s = free(&[(0, 1.0), (2, 2.0)]);
    let sim = Simulator::new(&s, 100);
    let t = 2.0;
    let reps = 10_000;
    let mut plain = Vec::with_capacity(reps);
    let mut coupled = Vec::with_capacity(reps);
    for k in 0..reps as u64 {
        let run = sim.simulate(StoppingRule::FixedTime(t), replicate_seed(10, k)).unwrap();
        plain.push(run.log.size_at(t) as f64);
        let pair = simulate_coupled(&sim, StoppingRule::FixedTime(t), None, replicate_seed(11, k)).unwrap();
        assert!(pair.decouple_time.is_none());
        assert_eq!(pair.infinite.to_csv_string(), pair.finite.to_csv_string());
        coupled.push(pair.infinite.size_at(t) as f64);
    }
    plain.sort_by(f64::total_cmp);
    coupled.sort_by(f64::total_cmp);
    let d = ks_two_sample(&plain, &coupled).unwrap();
    // Two-sample effective size; the counts are discrete so the test is conservative.
    let p = kolmogorov_p_value(d, reps as f64 / 2.0);
    assert!(p > 0.05, "KS {d}, p {p}");
}

#[test]
fn decoupling_before_horizon_becomes_rarer_with_kappa() {
    let s = RateScheduleF64::logistic_death(rates(&[(0, 1.0), (2, 2.0)])).unwrap();
    let reps = 10_000;
    let mut fractions = Vec::new();
    for kappa in [100u64, 1_000, 10_000] {
        let sim = Simulator::new(&s, kappa);
        let early = (0..reps as u64)
            .filter(|&k| {
                let run = simulate_coupled(&sim, StoppingRule::Size(0.5), None, replicate_seed(12, k)).unwrap();
                run.decouple_time.is_some_and(|t| t < 2.0)
            })
            .count() as f64;
        fractions.push(early / reps as f64);
    }
    for w in fractions.windows(2) {
        let noise = 2.0 * ((w[0] * (1.0 - w[0]) + w[1] * (1.0 - w[1])) / reps as f64).sqrt();
        assert!(w[1] <= w[0] + noise, "{fractions:?}");
    }
    assert!(fractions[2] < fractions[0], "{fractions:?}");
}

#[test]
fn descendant_fractions_converge_to_the_intrinsic_model() {
    let s = RateScheduleF64::logistic_death(rates(&[(0, 1.0), (2, 2.0)])).unwrap();
    let first = Label::new(vec![1]);
    // Lines where one side of the first split dies out give exact zeros, so
    // medians reach 0 quickly; means must keep shrinking.
    let mut medians = Vec::new();
    let mut means = Vec::new();
    for kappa in [100u64, 1_000, 10_000] {
        let sim = Simulator::new(&s, kappa);
        let mut gaps = Vec::new();
        let mut k = 0u64;
        while gaps.len() < 1000 {
            let run = simulate_coupled(&sim, StoppingRule::Size(0.05), Some(StoppingRule::Size(1.0)), replicate_seed(13, k))
                .unwrap();
            k += 1;
            if run.outcome != Outcome::Stopped || run.infinite_outcome != Outcome::Stopped {
                continue;
            }
            let finite = descendant_fraction(&run.finite, &first, run.stop_time);
            let late = descendant_fraction(&run.infinite, &first, run.infinite_end);
            gaps.push((finite - late).abs());
        }
        gaps.sort_by(f64::total_cmp);
        medians.push(gaps[gaps.len() / 2]);
        means.push(mean_and_se(&gaps).0);
    }
    assert!(medians.windows(2).all(|w| w[1] <= w[0]) && medians[2] < medians[0], "{medians:?}");
    assert!(means.windows(2).all(|w| w[1] < w[0]), "{means:?}");
}
