//! Network layout: one BS at the centre of a circular cell, VLC APs on indoor
//! ceilings, users spread uniformly over the cell area.

use std::f64::consts::PI;

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::config::SimConfig;
use crate::error::{Error, Result};
use crate::rng;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Point3 {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Point3 {
    pub const fn new(x: f64, y: f64, z: f64) -> Self {
        Self { x, y, z }
    }

    pub fn horizontal_distance(self, x: f64, y: f64) -> f64 {
        (self.x - x).hypot(self.y - y)
    }
}

pub fn distance(a: Point3, b: Point3) -> f64 {
    let (dx, dy, dz) = (a.x - b.x, a.y - b.y, a.z - b.z);
    (dx * dx + dy * dy + dz * dz).sqrt()
}

#[derive(Debug, Clone, PartialEq)]
pub struct UserNode {
    pub id: usize,
    pub position: Point3,
    pub indoor: bool,
    /// Local training samples `D_n`.
    pub shard_size: usize,
    pub cycles_per_sample: f64,
    pub cpu_freq: f64,
    /// Used as `α/2` per processed cycle.
    pub capacitance_coeff: f64,
    pub tx_power: f64,
    pub energy_budget: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Topology {
    pub cell_radius: f64,
    pub bs_position: (f64, f64),
    pub vlc_aps: Vec<Point3>,
    /// Indoor users first, ids `0..n_indoor`.
    pub users: Vec<UserNode>,
    pub n_indoor: usize,
    pub n_outdoor: usize,
}

impl Topology {
    pub fn n_users(&self) -> usize {
        self.users.len()
    }

    pub fn user(&self, id: usize) -> &UserNode {
        &self.users[id]
    }

    /// Horizontal distance from a user to the BS.
    pub fn bs_distance(&self, user: &UserNode) -> f64 {
        user.position.horizontal_distance(self.bs_position.0, self.bs_position.1)
    }
}

/// Uniform point in a disc, uniform over area.
fn sample_disc<R: Rng>(rng: &mut R, radius: f64) -> (f64, f64) {
    let r = radius * rng.gen::<f64>().sqrt();
    let t = 2.0 * PI * rng.gen::<f64>();
    (r * t.cos(), r * t.sin())
}

/// Ceiling APs on a ring around the BS, first one at 45°.
pub fn ap_layout(config: &SimConfig) -> Vec<Point3> {
    let ring = config.ap_ring_fraction * config.cell_radius_m;
    let z = config.rx_height_m + config.ap_drop_m;
    (0..config.n_aps)
        .map(|k| {
            let a = (45.0 + 360.0 * k as f64 / config.n_aps as f64).to_radians();
            Point3::new(ring * a.cos(), ring * a.sin(), z)
        })
        .collect()
}

pub fn generate_topology(config: &SimConfig, seed: u64) -> Result<Topology> {
    if config.n_users == 0 {
        return Err(Error::invalid_config("n_users", "must be at least 1"));
    }
    if !(0.0..=1.0).contains(&config.indoor_fraction) {
        return Err(Error::invalid_config(
            "indoor_fraction",
            format!("must lie in [0, 1], got {}", config.indoor_fraction),
        ));
    }
    if !(config.cell_radius_m > 0.0) {
        return Err(Error::invalid_config("cell_radius_m", "must be positive"));
    }

    let mut rng: ChaCha8Rng = rng::stream(seed, rng::TOPOLOGY);
    let n = config.n_users;
    let n_indoor = ((config.indoor_fraction * n as f64).round() as usize).min(n);
    let aps = ap_layout(config);
    let shard_size = config.shard_size().max(1);

    let mut users = Vec::with_capacity(n);
    for id in 0..n {
        let indoor = id < n_indoor;
        let (x, y) = if indoor {
            let ap = aps[rng.gen_range(0..aps.len())];
            let (dx, dy) = sample_disc(&mut rng, config.ap_coverage_m);
            (ap.x + dx, ap.y + dy)
        } else {
            sample_disc(&mut rng, config.cell_radius_m)
        };
        let cycles_per_sample = rng.gen_range(config.cycles_per_sample_min..=config.cycles_per_sample_max);
        let cpu_freq = rng.gen_range(config.cpu_freq_min_hz..=config.cpu_freq_max_hz);
        users.push(UserNode {
            id,
            position: Point3::new(x, y, config.rx_height_m),
            indoor,
            shard_size,
            cycles_per_sample,
            cpu_freq,
            capacitance_coeff: config.capacitance_coeff,
            tx_power: config.tx_power_w,
            energy_budget: config.energy_budget_j,
        });
    }

    Ok(Topology {
        cell_radius: config.cell_radius_m,
        bs_position: (0.0, 0.0),
        vlc_aps: aps,
        users,
        n_indoor,
        n_outdoor: n - n_indoor,
    })
}
