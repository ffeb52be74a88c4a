use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use vlcfl::dataset::{boston_housing, load_dataset};
use vlcfl::report::{emit_report, summarize};
use vlcfl::runner::{run_experiment, sweep_bandwidth, sweep_users, RunOptions};
use vlcfl::{validate, LinkMode, SimConfig};

#[derive(Parser)]
#[command(name = "vlcfl", version, about = "Federated learning over hybrid VLC/RF networks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Hybrid against RF-only at the configured N and bandwidths.
    Run(RunArgs),
    /// Repeat `run` for every N in `sweep_users`.
    SweepUsers(RunArgs),
    /// Repeat `run` for every (B_R, B_V) pair in `sweep_bandwidths`.
    SweepBandwidth(RunArgs),
    /// Check the optimizer against the enumeration oracle and run the property suites.
    Validate {
        #[arg(long)]
        config: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Hybrid,
    #[value(name = "rf_only", alias = "rf-only")]
    RfOnly,
    Both,
}

#[derive(Args)]
struct RunArgs {
    /// Flat `key = value` file; unset keys keep their defaults.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Comma-separated seeds or ranges, e.g. `0-9,42`. Defaults to the config's.
    #[arg(long)]
    seeds: Option<String>,
    #[arg(long, default_value = "out")]
    out: PathBuf,
    #[arg(long, value_enum, default_value = "both")]
    mode: ModeArg,
    /// 14-column CSV (13 features, target). Defaults to the bundled Boston housing data.
    #[arg(long)]
    dataset: Option<PathBuf>,
    /// Record user selection only; skip federated training.
    #[arg(long)]
    no_train: bool,
}

fn parse_seeds(list: &str) -> Result<Vec<u64>, String> {
    let mut seeds = Vec::new();
    for part in list.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        let num = |s: &str| s.trim().parse::<u64>().map_err(|e| format!("bad seed `{s}`: {e}"));
        match part.split_once('-') {
            Some((a, b)) => {
                let (a, b) = (num(a)?, num(b)?);
                if a > b {
                    return Err(format!("empty seed range `{part}`"));
                }
                seeds.extend(a..=b);
            }
            None => seeds.push(num(part)?),
        }
    }
    if seeds.is_empty() {
        return Err("no seeds given".into());
    }
    Ok(seeds)
}

fn load_config(path: &Option<PathBuf>) -> vlcfl::Result<SimConfig> {
    match path {
        Some(p) => SimConfig::from_file(p),
        None => Ok(SimConfig::default()),
    }
}

fn run(kind: &Command, args: &RunArgs) -> Result<(), String> {
    let config = load_config(&args.config).map_err(|e| e.to_string())?;
    let seeds = match &args.seeds {
        Some(s) => parse_seeds(s)?,
        None => config.seeds.clone(),
    };
    let data = match &args.dataset {
        Some(p) => load_dataset(p).map_err(|e| e.to_string())?,
        None => boston_housing(),
    };
    let modes = match args.mode {
        ModeArg::Hybrid => vec![LinkMode::Hybrid],
        ModeArg::RfOnly => vec![LinkMode::RfOnly],
        ModeArg::Both => vec![LinkMode::Hybrid, LinkMode::RfOnly],
    };
    let opts = RunOptions { dataset: &data, modes, train: !args.no_train };
    let report = match kind {
        Command::Run(_) => run_experiment(&config, &seeds, &opts),
        Command::SweepUsers(_) => sweep_users(&config, &seeds, &opts),
        Command::SweepBandwidth(_) => sweep_bandwidth(&config, &seeds, &opts),
        Command::Validate { .. } => unreachable!(),
    }
    .map_err(|e| e.to_string())?;
    let paths = emit_report(&report, &args.out).map_err(|e| e.to_string())?;

    println!(
        "{:<8} {:>5} {:>10} {:>10} {:>5} {:>15} {:>12}",
        "mode", "N", "B_R", "B_V", "runs", "selected", "final R2"
    );
    for s in summarize(&report.records) {
        println!(
            "{:<8} {:>5} {:>10.3e} {:>10.3e} {:>5} {:>7.2} ± {:<5.2} {:>12.4}",
            s.mode, s.n_users, s.rf_bandwidth_hz, s.vlc_bandwidth_hz, s.runs, s.selected.0, s.selected.1, s.final_r2.0
        );
    }
    for p in paths {
        println!("wrote {}", p.display());
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Validate { config } => {
            load_config(config).and_then(|c| validate::run_all(&c)).map_err(|e| e.to_string()).and_then(|outcomes| {
                let mut ok = true;
                for o in outcomes {
                    println!("{} {}: {}", if o.passed { "PASS" } else { "FAIL" }, o.name, o.detail);
                    ok &= o.passed;
                }
                if ok {
                    Ok(())
                } else {
                    Err("validation failed".into())
                }
            })
        }
        cmd @ (Command::Run(a) | Command::SweepUsers(a) | Command::SweepBandwidth(a)) => run(cmd, a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}

#[cfg(test)]
mod tests {
    use super::parse_seeds;

    #[test]
    fn seed_lists() {
        assert_eq!(parse_seeds("0-3,7").unwrap(), vec![0, 1, 2, 3, 7]);
        assert_eq!(parse_seeds(" 5 ").unwrap(), vec![5]);
        assert!(parse_seeds("3-1").is_err());
        assert!(parse_seeds("x").is_err());
        assert!(parse_seeds("").is_err());
    }
}
