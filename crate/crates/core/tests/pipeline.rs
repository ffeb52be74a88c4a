use vlcfl::dataset::{boston_housing, federated_data, split_and_partition, synthetic_regression};
use vlcfl::fl::run_federated_training;
use vlcfl::report::emit_report;
use vlcfl::runner::{run_experiment, sweep_users, RunOptions};
use vlcfl::usba::{oracle_enumerate, usba};
use vlcfl::{generate_topology, LinkMode, Selection, SimConfig};

#[test]
fn config_file_overrides_defaults() {
    let cfg = SimConfig::from_toml_str("n_users = 30\nrf_bandwidth_hz = 1e7\n").unwrap();
    assert_eq!(cfg.n_users, 30);
    assert_eq!(cfg.rf_bandwidth_hz, 1e7);
    assert_eq!(cfg.vlc_bandwidth_hz, SimConfig::default().vlc_bandwidth_hz);
    assert!(SimConfig::from_toml_str("bogus_key = 1\n").is_err());
    let err = SimConfig::from_toml_str("optical_power_w = 0\n").unwrap_err().to_string();
    assert!(err.contains("optical_power_w"), "{err}");
}

#[test]
fn hybrid_dominates_baseline_per_seed() {
    let data = synthetic_regression(506, 0.1, 0);
    let cfg = SimConfig::default();
    let opts = RunOptions { train: false, ..RunOptions::new(&data) };
    let rep = sweep_users(&cfg, &[0, 1, 2, 3, 4], &opts).unwrap();
    let hy: Vec<_> = rep.records_for(LinkMode::Hybrid).collect();
    let rf: Vec<_> = rep.records_for(LinkMode::RfOnly).collect();
    assert_eq!(hy.len(), rf.len());
    for (h, r) in hy.iter().zip(&rf) {
        assert_eq!((h.seed, h.n_users), (r.seed, r.n_users));
        assert!(h.selected >= r.selected, "seed {} N {}", h.seed, h.n_users);
    }
}

#[test]
fn more_participants_train_no_worse_on_average() {
    let data = boston_housing();
    let cfg = SimConfig { global_rounds: 60, ..SimConfig::default() };
    let (mut full, mut subset) = (0.0, 0.0);
    let seeds = 10;
    for seed in 0..seeds {
        let p = split_and_partition(&data, cfg.n_users, cfg.test_size, seed).unwrap();
        let f = federated_data(&data, &p).unwrap();
        let t = generate_topology(&cfg, seed).unwrap();
        let all = Selection::from_ids(&t, 0..cfg.n_users);
        let few = Selection::from_ids(&t, 0..5);
        full += run_federated_training(&all, &f, &cfg, seed).unwrap().final_r2;
        subset += run_federated_training(&few, &f, &cfg, seed).unwrap().final_r2;
    }
    assert!(full / seeds as f64 >= subset / seeds as f64, "full {full} subset {subset}");
}

#[test]
fn usba_never_beats_oracle_on_default_physics() {
    for n in [3, 6, 10] {
        let cfg = SimConfig { n_users: n, ..SimConfig::default() };
        for seed in 0..5 {
            let t = generate_topology(&cfg, seed).unwrap();
            let r = usba(&t, &cfg).unwrap();
            let o = oracle_enumerate(&t, &cfg).unwrap();
            assert!(r.objective <= o.objective);
            if r.converged {
                assert_eq!(r.objective, o.objective);
            }
        }
    }
}

#[test]
fn empty_selection_records_nan() {
    let data = synthetic_regression(200, 0.1, 0);
    let cfg = SimConfig { n_users: 10, round_deadline_s: 1e-6, global_rounds: 2, ..SimConfig::default() };
    let rep = run_experiment(&cfg, &[0], &RunOptions::new(&data)).unwrap();
    assert!(rep.records.iter().all(|r| r.selected == 0 && r.final_r2.is_nan() && r.round_r2.is_empty()));
    let dir = tempfile::tempdir().unwrap();
    emit_report(&rep, dir.path()).unwrap();
    let csv = std::fs::read_to_string(dir.path().join("records.csv")).unwrap();
    assert!(csv.lines().nth(1).unwrap().contains(",nan,"));
}

#[test]
fn records_round_trip_floats() {
    let data = synthetic_regression(120, 0.2, 1);
    let cfg = SimConfig { n_users: 8, global_rounds: 3, ..SimConfig::default() };
    let rep = run_experiment(&cfg, &[5], &RunOptions::new(&data)).unwrap();
    let dir = tempfile::tempdir().unwrap();
    emit_report(&rep, dir.path()).unwrap();
    let mut rdr = csv::Reader::from_path(dir.path().join("records.csv")).unwrap();
    for (row, rec) in rdr.records().zip(&rep.records) {
        let row = row.unwrap();
        assert_eq!(row[15].parse::<f64>().unwrap(), rec.final_r2);
        assert_eq!(row[9].parse::<f64>().unwrap(), rec.uplink_rb_hz);
    }
}
