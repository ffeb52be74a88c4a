//! Experiment orchestration: hybrid against the RF-only baseline over seeds.

use rayon::prelude::*;

use crate::config::SimConfig;
use crate::dataset::{federated_data, split_and_partition, Dataset};
use crate::error::{Error, Result};
use crate::fl::run_federated_training;
use crate::topology::{generate_topology, Topology};
use crate::usba::{LinkMode, Planner, UsbaResult};

/// USBA with VLC disabled: every selected user takes an RF RB in each
/// direction and indoor users keep the wall penetration loss.
pub fn run_rf_only(topology: &Topology, config: &SimConfig) -> Result<UsbaResult> {
    Ok(Planner::new(topology, config, LinkMode::RfOnly)?.solve())
}

pub fn solve(topology: &Topology, config: &SimConfig, mode: LinkMode) -> Result<UsbaResult> {
    Ok(Planner::new(topology, config, mode)?.solve())
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentRecord {
    pub seed: u64,
    pub mode: LinkMode,
    pub n_users: usize,
    pub rf_bandwidth_hz: f64,
    pub vlc_bandwidth_hz: f64,
    pub selected: usize,
    pub selected_indoor: usize,
    pub selected_outdoor: usize,
    pub objective: u64,
    pub uplink_rb_hz: f64,
    pub downlink_rb_hz: f64,
    pub vlc_rb_hz: f64,
    pub iterations: usize,
    pub converged: bool,
    pub cycle_detected: bool,
    /// NaN when nobody was selected.
    pub final_r2: f64,
    pub round_r2: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentReport {
    pub config: SimConfig,
    pub seeds: Vec<u64>,
    pub modes: Vec<LinkMode>,
    pub dataset: String,
    pub records: Vec<ExperimentRecord>,
}

impl ExperimentReport {
    pub fn records_for(&self, mode: LinkMode) -> impl Iterator<Item = &ExperimentRecord> {
        self.records.iter().filter(move |r| r.mode == mode)
    }
}

fn run_one(config: &SimConfig, data: &Dataset, seed: u64, mode: LinkMode, train: bool) -> Result<ExperimentRecord> {
    let topology = generate_topology(config, seed)?;
    let r = solve(&topology, config, mode)?;
    let (final_r2, round_r2) = if train && !r.selection.is_empty() {
        let partition = split_and_partition(data, config.n_users, config.test_size, seed)?;
        let fed = federated_data(data, &partition)?;
        let t = run_federated_training(&r.selection, &fed, config, seed)?;
        (t.final_r2, t.round_r2)
    } else {
        (f64::NAN, Vec::new())
    };
    Ok(ExperimentRecord {
        seed,
        mode,
        n_users: config.n_users,
        rf_bandwidth_hz: config.rf_bandwidth_hz,
        vlc_bandwidth_hz: config.vlc_bandwidth_hz,
        selected: r.selection.len(),
        selected_indoor: r.selection.indoor.len(),
        selected_outdoor: r.selection.outdoor.len(),
        objective: r.objective,
        uplink_rb_hz: r.bandwidth.uplink_hz,
        downlink_rb_hz: r.bandwidth.downlink_hz,
        vlc_rb_hz: r.bandwidth.vlc_hz,
        iterations: r.iterations,
        converged: r.converged,
        cycle_detected: r.cycle_detected,
        final_r2,
        round_r2,
    })
}

/// Options shared by every entry point.
#[derive(Debug, Clone)]
pub struct RunOptions<'a> {
    pub dataset: &'a Dataset,
    pub modes: Vec<LinkMode>,
    /// Skip federated training and record selection only.
    pub train: bool,
}

impl<'a> RunOptions<'a> {
    pub fn new(dataset: &'a Dataset) -> Self {
        Self { dataset, modes: vec![LinkMode::Hybrid, LinkMode::RfOnly], train: true }
    }
}

/// The config as used for `dataset`: its row count fixes the shard size.
fn bind_dataset(config: &SimConfig, data: &Dataset) -> Result<SimConfig> {
    let cfg = SimConfig { dataset_rows: data.len(), ..config.clone() };
    cfg.validate()?;
    if cfg.n_users + cfg.test_size > data.len() {
        return Err(Error::invalid_config(
            "n_users",
            format!("{} users and {} test rows exceed the {} dataset rows", cfg.n_users, cfg.test_size, data.len()),
        ));
    }
    Ok(cfg)
}

/// One record per (seed, mode), in seed-major order.
pub fn run_experiment(config: &SimConfig, seeds: &[u64], opts: &RunOptions) -> Result<ExperimentReport> {
    if seeds.is_empty() {
        return Err(Error::InvalidArgument("no seeds given".into()));
    }
    if opts.modes.is_empty() {
        return Err(Error::InvalidArgument("no modes given".into()));
    }
    let cfg = bind_dataset(config, opts.dataset)?;
    let jobs: Vec<(u64, LinkMode)> = seeds.iter().flat_map(|&s| opts.modes.iter().map(move |&m| (s, m))).collect();
    let records = jobs
        .par_iter()
        .map(|&(seed, mode)| {
            run_one(&cfg, opts.dataset, seed, mode, opts.train).map_err(|e| Error::Experiment {
                seed,
                mode: mode.to_string(),
                source: Box::new(e),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ExperimentReport {
        config: cfg,
        seeds: seeds.to_vec(),
        modes: opts.modes.clone(),
        dataset: opts.dataset.name.clone(),
        records,
    })
}

fn concat(base: &SimConfig, seeds: &[u64], opts: &RunOptions, parts: Vec<ExperimentReport>) -> ExperimentReport {
    ExperimentReport {
        config: base.clone(),
        seeds: seeds.to_vec(),
        modes: opts.modes.clone(),
        dataset: opts.dataset.name.clone(),
        records: parts.into_iter().flat_map(|p| p.records).collect(),
    }
}

/// Repeats the experiment for every `n_users` in `config.sweep_users`.
pub fn sweep_users(config: &SimConfig, seeds: &[u64], opts: &RunOptions) -> Result<ExperimentReport> {
    let parts = config
        .sweep_users
        .iter()
        .map(|&n| run_experiment(&SimConfig { n_users: n, ..config.clone() }, seeds, opts))
        .collect::<Result<Vec<_>>>()?;
    Ok(concat(&bind_dataset(config, opts.dataset)?, seeds, opts, parts))
}

/// Repeats the experiment for every `(B_R, B_V)` in `config.sweep_bandwidths`.
pub fn sweep_bandwidth(config: &SimConfig, seeds: &[u64], opts: &RunOptions) -> Result<ExperimentReport> {
    let parts = config
        .sweep_bandwidths
        .iter()
        .map(|&(br, bv)| {
            let cfg = SimConfig { rf_bandwidth_hz: br, vlc_bandwidth_hz: bv, ..config.clone() };
            run_experiment(&cfg, seeds, opts)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(concat(&bind_dataset(config, opts.dataset)?, seeds, opts, parts))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::{boston_housing, synthetic_regression};
    use crate::topology::generate_topology;

    #[test]
    fn record_count_is_seeds_times_modes() {
        let data = synthetic_regression(200, 0.1, 0);
        let cfg = SimConfig { n_users: 10, global_rounds: 3, ..SimConfig::default() };
        let rep = run_experiment(&cfg, &[1, 2], &RunOptions::new(&data)).unwrap();
        assert_eq!(rep.records.len(), 4);
        let order: Vec<_> = rep.records.iter().map(|r| (r.seed, r.mode)).collect();
        assert_eq!(
            order,
            vec![(1, LinkMode::Hybrid), (1, LinkMode::RfOnly), (2, LinkMode::Hybrid), (2, LinkMode::RfOnly)]
        );
        assert_eq!(rep.config.dataset_rows, 200);
    }

    #[test]
    fn baseline_never_beats_hybrid() {
        let cfg = SimConfig::default();
        for seed in 0..20 {
            let t = generate_topology(&cfg, seed).unwrap();
            let h = solve(&t, &cfg, LinkMode::Hybrid).unwrap();
            let r = run_rf_only(&t, &cfg).unwrap();
            assert!(r.selection.len() <= h.selection.len(), "seed {seed}");
        }
    }

    #[test]
    fn single_outdoor_user_same_in_both_modes() {
        let cfg = SimConfig { n_users: 1, indoor_fraction: 0.0, ..SimConfig::default() };
        let t = generate_topology(&cfg, 0).unwrap();
        let h = solve(&t, &cfg, LinkMode::Hybrid).unwrap();
        let r = run_rf_only(&t, &cfg).unwrap();
        assert_eq!(h.selection, r.selection);
        assert_eq!(h.bandwidth.uplink_hz, r.bandwidth.uplink_hz);
        assert_eq!(h.bandwidth.downlink_hz, r.bandwidth.downlink_hz);
    }

    #[test]
    fn errors_carry_seed_context() {
        let data = boston_housing();
        let cfg = SimConfig { n_users: 600, ..SimConfig::default() };
        assert!(run_experiment(&cfg, &[0], &RunOptions::new(&data)).is_err());
        assert!(run_experiment(&SimConfig::default(), &[], &RunOptions::new(&data)).is_err());
    }

    #[test]
    fn sweep_covers_grid() {
        let data = synthetic_regression(300, 0.1, 0);
        let cfg = SimConfig { sweep_users: vec![5, 8], ..SimConfig::default() };
        let opts = RunOptions { train: false, ..RunOptions::new(&data) };
        let rep = sweep_users(&cfg, &[0, 1, 2], &opts).unwrap();
        assert_eq!(rep.records.len(), 12);
        assert!(rep.records[..6].iter().all(|r| r.n_users == 5));
        assert!(rep.records.iter().all(|r| r.final_r2.is_nan()));

        let cfg = SimConfig { sweep_bandwidths: vec![(1e6, 2e6), (5e6, 8e6)], ..SimConfig::default() };
        let rep = sweep_bandwidth(&cfg, &[0], &opts).unwrap();
        assert_eq!(rep.records.len(), 4);
        assert_eq!(rep.records[3].vlc_bandwidth_hz, 8e6);
    }
}
