//! CSV and manifest output. Floats are written with 17 significant digits so
//! every value round-trips exactly.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::runner::{ExperimentRecord, ExperimentReport};

pub const RECORDS_FILE: &str = "records.csv";
pub const SUMMARY_FILE: &str = "summary.csv";
pub const MANIFEST_FILE: &str = "manifest.txt";

pub fn fmt_f64(v: f64) -> String {
    if v.is_nan() {
        "nan".into()
    } else {
        format!("{v:.16e}")
    }
}

const RECORD_HEADER: [&str; 17] = [
    "seed",
    "mode",
    "n_users",
    "rf_bandwidth_hz",
    "vlc_bandwidth_hz",
    "selected",
    "selected_indoor",
    "selected_outdoor",
    "objective",
    "uplink_rb_hz",
    "downlink_rb_hz",
    "vlc_rb_hz",
    "iterations",
    "converged",
    "cycle_detected",
    "final_r2",
    "round_r2",
];

fn record_row(r: &ExperimentRecord) -> Vec<String> {
    let trace: Vec<String> = r.round_r2.iter().map(|&v| fmt_f64(v)).collect();
    vec![
        r.seed.to_string(),
        r.mode.to_string(),
        r.n_users.to_string(),
        fmt_f64(r.rf_bandwidth_hz),
        fmt_f64(r.vlc_bandwidth_hz),
        r.selected.to_string(),
        r.selected_indoor.to_string(),
        r.selected_outdoor.to_string(),
        r.objective.to_string(),
        fmt_f64(r.uplink_rb_hz),
        fmt_f64(r.downlink_rb_hz),
        fmt_f64(r.vlc_rb_hz),
        r.iterations.to_string(),
        r.converged.to_string(),
        r.cycle_detected.to_string(),
        fmt_f64(r.final_r2),
        trace.join(";"),
    ]
}

/// Mean and sample standard deviation; the deviation of one value is 0.
pub fn mean_std(values: &[f64]) -> (f64, f64) {
    if values.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() == 1 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

/// Group key: mode, N, and the bandwidth pair by bit pattern.
type GroupKey = (String, usize, u64, u64);

#[derive(Debug, Clone, PartialEq)]
pub struct SummaryRow {
    pub mode: String,
    pub n_users: usize,
    pub rf_bandwidth_hz: f64,
    pub vlc_bandwidth_hz: f64,
    pub runs: usize,
    pub selected: (f64, f64),
    pub selected_indoor: (f64, f64),
    pub selected_outdoor: (f64, f64),
    pub converged_fraction: f64,
    /// Over runs that trained, i.e. selected at least one user.
    pub final_r2: (f64, f64),
    pub trained_runs: usize,
}

pub fn summarize(records: &[ExperimentRecord]) -> Vec<SummaryRow> {
    let mut groups: BTreeMap<GroupKey, Vec<&ExperimentRecord>> = BTreeMap::new();
    for r in records {
        let key = (r.mode.to_string(), r.n_users, r.rf_bandwidth_hz.to_bits(), r.vlc_bandwidth_hz.to_bits());
        groups.entry(key).or_default().push(r);
    }
    groups
        .into_iter()
        .map(|((mode, n_users, _, _), rs)| {
            let col = |f: fn(&ExperimentRecord) -> f64| mean_std(&rs.iter().map(|r| f(r)).collect::<Vec<_>>());
            let r2: Vec<f64> = rs.iter().map(|r| r.final_r2).filter(|v| !v.is_nan()).collect();
            SummaryRow {
                mode,
                n_users,
                rf_bandwidth_hz: rs[0].rf_bandwidth_hz,
                vlc_bandwidth_hz: rs[0].vlc_bandwidth_hz,
                runs: rs.len(),
                selected: col(|r| r.selected as f64),
                selected_indoor: col(|r| r.selected_indoor as f64),
                selected_outdoor: col(|r| r.selected_outdoor as f64),
                converged_fraction: rs.iter().filter(|r| r.converged).count() as f64 / rs.len() as f64,
                final_r2: mean_std(&r2),
                trained_runs: r2.len(),
            }
        })
        .collect()
}

const SUMMARY_HEADER: [&str; 15] = [
    "mode",
    "n_users",
    "rf_bandwidth_hz",
    "vlc_bandwidth_hz",
    "runs",
    "selected_mean",
    "selected_std",
    "selected_indoor_mean",
    "selected_indoor_std",
    "selected_outdoor_mean",
    "selected_outdoor_std",
    "converged_fraction",
    "final_r2_mean",
    "final_r2_std",
    "trained_runs",
];

fn summary_row(s: &SummaryRow) -> Vec<String> {
    vec![
        s.mode.clone(),
        s.n_users.to_string(),
        fmt_f64(s.rf_bandwidth_hz),
        fmt_f64(s.vlc_bandwidth_hz),
        s.runs.to_string(),
        fmt_f64(s.selected.0),
        fmt_f64(s.selected.1),
        fmt_f64(s.selected_indoor.0),
        fmt_f64(s.selected_indoor.1),
        fmt_f64(s.selected_outdoor.0),
        fmt_f64(s.selected_outdoor.1),
        fmt_f64(s.converged_fraction),
        fmt_f64(s.final_r2.0),
        fmt_f64(s.final_r2.1),
        s.trained_runs.to_string(),
    ]
}

fn write_csv(path: &Path, header: &[&str], rows: impl Iterator<Item = Vec<String>>) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(header)?;
    for row in rows {
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

pub fn manifest(report: &ExperimentReport) -> String {
    let mut s = String::new();
    let seeds: Vec<String> = report.seeds.iter().map(u64::to_string).collect();
    let modes: Vec<&str> = report.modes.iter().map(|m| m.as_str()).collect();
    let _ = writeln!(s, "vlcfl {}", env!("CARGO_PKG_VERSION"));
    let _ = writeln!(s, "dataset: {}", report.dataset);
    let _ = writeln!(s, "seeds: {}", seeds.join(","));
    let _ = writeln!(s, "modes: {}", modes.join(","));
    let _ = writeln!(s, "records: {}", report.records.len());
    let _ = writeln!(s, "\n[resolved configuration]");
    s.push_str(&report.config.to_toml_string());
    s
}

/// Writes records, summary and manifest under `out_dir`, creating it if
/// needed. Returns the written paths.
pub fn emit_report(report: &ExperimentReport, out_dir: &Path) -> Result<Vec<PathBuf>> {
    if report.records.is_empty() {
        return Err(Error::InvalidArgument("report has no records".into()));
    }
    fs::create_dir_all(out_dir)?;
    let records = out_dir.join(RECORDS_FILE);
    let summary = out_dir.join(SUMMARY_FILE);
    let manifest_path = out_dir.join(MANIFEST_FILE);
    write_csv(&records, &RECORD_HEADER, report.records.iter().map(record_row))?;
    write_csv(&summary, &SUMMARY_HEADER, summarize(&report.records).iter().map(summary_row))?;
    fs::write(&manifest_path, manifest(report))?;
    Ok(vec![records, summary, manifest_path])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::SimConfig;
    use crate::usba::LinkMode;

    fn record(seed: u64, mode: LinkMode, selected: usize, r2: f64) -> ExperimentRecord {
        ExperimentRecord {
            seed,
            mode,
            n_users: 50,
            rf_bandwidth_hz: 20e6,
            vlc_bandwidth_hz: 40e6,
            selected,
            selected_indoor: selected,
            selected_outdoor: 0,
            objective: 9 * selected as u64,
            uplink_rb_hz: 1e5,
            downlink_rb_hz: 1e5,
            vlc_rb_hz: 1e6,
            iterations: 3,
            converged: true,
            cycle_detected: false,
            final_r2: r2,
            round_r2: vec![0.1, r2],
        }
    }

    fn report() -> ExperimentReport {
        ExperimentReport {
            config: SimConfig::default(),
            seeds: vec![0, 1],
            modes: vec![LinkMode::Hybrid, LinkMode::RfOnly],
            dataset: "t".into(),
            records: vec![
                record(0, LinkMode::Hybrid, 40, 0.6),
                record(0, LinkMode::RfOnly, 30, 0.5),
                record(1, LinkMode::Hybrid, 42, 0.8),
                record(1, LinkMode::RfOnly, 0, f64::NAN),
            ],
        }
    }

    #[test]
    fn float_format_round_trips() {
        for v in [0.1, 1.0 / 3.0, 8.912509381337459e-10, -2.5e300] {
            assert_eq!(fmt_f64(v).parse::<f64>().unwrap(), v);
        }
        assert_eq!(fmt_f64(f64::NAN), "nan");
    }

    #[test]
    fn summary_statistics() {
        let s = summarize(&report().records);
        assert_eq!(s.len(), 2);
        let h = &s[0];
        assert_eq!(h.mode, "hybrid");
        assert!((h.final_r2.0 - 0.7).abs() < 1e-15);
        assert_eq!(h.selected.0, 41.0);
        let rf = &s[1];
        assert_eq!(rf.trained_runs, 1);
        assert_eq!(rf.final_r2, (0.5, 0.0));
        assert_eq!(mean_std(&[2.0, 4.0]), (3.0, 2f64.sqrt()));
    }

    #[test]
    fn emits_files() {
        let dir = tempfile::tempdir().unwrap();
        let paths = emit_report(&report(), dir.path()).unwrap();
        assert_eq!(paths.len(), 3);
        let text = fs::read_to_string(&paths[0]).unwrap();
        assert_eq!(text.lines().count(), 5);
        assert!(text.starts_with("seed,mode,n_users"));
        let first = fs::read(&paths[0]).unwrap();
        emit_report(&report(), dir.path()).unwrap();
        assert_eq!(first, fs::read(&paths[0]).unwrap());
        let m = fs::read_to_string(&paths[2]).unwrap();
        assert!(m.contains("seeds: 0,1") && m.contains("round_deadline_s"));
    }

    #[test]
    fn empty_report_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let empty = ExperimentReport { records: vec![], ..report() };
        assert!(emit_report(&empty, dir.path()).is_err());
    }
}
