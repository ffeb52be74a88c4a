//! Regression data: CSV ingest, test split, equal per-user shards.

use std::path::Path;

use rand::seq::SliceRandom;
use rand::Rng;

use crate::error::{Error, Result};
use crate::fl::{DataShard, FederatedData, Standardizer, N_FEATURES};
use crate::rng;

const BOSTON_CSV: &str = include_str!("../data/boston_housing.csv");

#[derive(Debug, Clone, PartialEq)]
pub struct Sample {
    pub features: [f64; N_FEATURES],
    pub target: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub name: String,
    pub rows: Vec<Sample>,
}

impl Dataset {
    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }
}

/// Reads 14 numeric columns (13 features, then the target). A first line
/// with no numeric cell is taken as a header.
pub fn load_dataset(path: &Path) -> Result<Dataset> {
    let text = std::fs::read_to_string(path)?;
    let name = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    parse_csv(&text, path, name)
}

/// The 506-row Boston housing table shipped with the crate.
pub fn boston_housing() -> Dataset {
    parse_csv(BOSTON_CSV, Path::new("boston_housing.csv"), "boston_housing".into()).expect("bundled data parses")
}

pub fn parse_csv(text: &str, path: &Path, name: String) -> Result<Dataset> {
    let mut rdr =
        csv::ReaderBuilder::new().has_headers(false).flexible(true).trim(csv::Trim::All).from_reader(text.as_bytes());
    let mut rows = Vec::new();
    for (k, rec) in rdr.records().enumerate() {
        let rec = rec?;
        let line = rec.position().map_or(k as u64 + 1, |p| p.line());
        if rec.iter().all(|c| c.is_empty()) {
            continue;
        }
        if k == 0 && rec.iter().all(|c| c.parse::<f64>().is_err()) {
            continue;
        }
        if rec.len() != N_FEATURES + 1 {
            return Err(Error::Schema {
                path: path.to_path_buf(),
                message: format!("line {line}: expected {} columns, found {}", N_FEATURES + 1, rec.len()),
            });
        }
        let mut vals = [0.0; N_FEATURES + 1];
        for (col, (cell, v)) in rec.iter().zip(vals.iter_mut()).enumerate() {
            *v = cell.parse::<f64>().ok().filter(|x| x.is_finite()).ok_or_else(|| Error::Parse {
                path: path.to_path_buf(),
                line,
                message: format!("column {}: `{cell}` is not a finite number", col + 1),
            })?;
        }
        rows.push(Sample { features: std::array::from_fn(|i| vals[i]), target: vals[N_FEATURES] });
    }
    if rows.is_empty() {
        return Err(Error::Schema { path: path.to_path_buf(), message: "no data rows".into() });
    }
    Ok(Dataset { name, rows })
}

/// Linear target plus uniform noise, features uniform in `[-1, 1]`.
pub fn synthetic_regression(n_rows: usize, noise: f64, seed: u64) -> Dataset {
    let mut rng = rng::stream(seed, rng::SYNTHETIC);
    let coef: [f64; N_FEATURES] = std::array::from_fn(|_| rng.gen_range(-1.0..=1.0));
    let rows = (0..n_rows)
        .map(|_| {
            let features: [f64; N_FEATURES] = std::array::from_fn(|_| rng.gen_range(-1.0..=1.0));
            let clean: f64 = features.iter().zip(&coef).map(|(x, c)| x * c).sum();
            let eps = if noise > 0.0 { rng.gen_range(-noise..=noise) } else { 0.0 };
            Sample { features, target: clean + eps }
        })
        .collect();
    Dataset { name: "synthetic".into(), rows }
}

/// Row indices per role. Shard `i` belongs to user `i`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Partition {
    pub shards: Vec<Vec<usize>>,
    pub test: Vec<usize>,
    pub unused: Vec<usize>,
}

impl Partition {
    pub fn shard_size(&self) -> usize {
        self.shards.first().map_or(0, Vec::len)
    }
}

pub fn split_and_partition(data: &Dataset, n_users: usize, test_size: usize, seed: u64) -> Result<Partition> {
    let n = data.len();
    if n_users == 0 || test_size + n_users > n {
        return Err(Error::InvalidArgument(format!(
            "cannot split {n} rows into a test set of {test_size} and {n_users} non-empty shards"
        )));
    }
    let mut idx: Vec<usize> = (0..n).collect();
    idx.shuffle(&mut rng::stream(seed, rng::PARTITION));
    let (test, rest) = idx.split_at(test_size);
    let per = rest.len() / n_users;
    let shards = rest.chunks_exact(per).take(n_users).map(<[usize]>::to_vec).collect();
    Ok(Partition { shards, test: test.to_vec(), unused: rest[per * n_users..].to_vec() })
}

/// Standardizes with statistics of every non-test row and builds shards.
pub fn federated_data(data: &Dataset, partition: &Partition) -> Result<FederatedData> {
    let train: Vec<&Sample> =
        partition.shards.iter().flatten().chain(&partition.unused).map(|&i| &data.rows[i]).collect();
    let inputs: Vec<[f64; N_FEATURES]> = train.iter().map(|s| s.features).collect();
    let targets: Vec<f64> = train.iter().map(|s| s.target).collect();
    let scaler = Standardizer::fit(&inputs, &targets)?;
    let shard = |owner: usize, rows: &[usize]| DataShard {
        inputs: rows.iter().map(|&i| scaler.transform_input(&data.rows[i].features)).collect(),
        targets: rows.iter().map(|&i| scaler.transform_target(data.rows[i].target)).collect(),
        owner,
    };
    let shards = partition.shards.iter().enumerate().map(|(u, rows)| shard(u, rows)).collect();
    let test = shard(usize::MAX, &partition.test);
    Ok(FederatedData { shards, test, scaler })
}
