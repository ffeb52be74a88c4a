//! Per-round computation and communication costs of one user.

use crate::config::SimConfig;
use crate::error::{Error, Result};
use crate::topology::UserNode;

fn check_accuracy(local_accuracy: f64) -> Result<()> {
    if local_accuracy > 0.0 && local_accuracy < 1.0 {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!("local accuracy must lie in (0, 1), got {local_accuracy}")))
    }
}

/// CPU energy of one global iteration: `ν α c D f² ln(1/θ) / 2`.
pub fn computation_energy(user: &UserNode, local_accuracy: f64, nu: f64) -> Result<f64> {
    check_accuracy(local_accuracy)?;
    let cycles = user.cycles_per_sample * user.shard_size as f64;
    Ok(nu * user.capacitance_coeff * cycles / 2.0 * user.cpu_freq * user.cpu_freq * (1.0 / local_accuracy).ln())
}

/// Computation time of one global iteration: `ν c D ln(1/θ) / f`.
pub fn computation_time(user: &UserNode, local_accuracy: f64, nu: f64) -> Result<f64> {
    check_accuracy(local_accuracy)?;
    if !(user.cpu_freq > 0.0) {
        return Err(Error::InvalidArgument(format!("user {} has non-positive CPU frequency", user.id)));
    }
    let cycles = user.cycles_per_sample * user.shard_size as f64;
    Ok(nu * cycles * (1.0 / local_accuracy).ln() / user.cpu_freq)
}

/// Shortest time that moves `payload_bits` at `rate`. An empty payload takes no time.
pub fn transmission_time(payload_bits: f64, rate: f64) -> Result<f64> {
    if payload_bits == 0.0 {
        return Ok(0.0);
    }
    if !(rate > 0.0) {
        return Err(Error::InfeasibleLink);
    }
    Ok(payload_bits / rate)
}

/// How the global model reaches the user.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Downlink {
    /// Through the home gateway and a VLC AP; pays the backhaul delay.
    Vlc(f64),
    Rf(f64),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinkRates {
    pub uplink: f64,
    pub downlink: Downlink,
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct CostBreakdown {
    pub t_cmp: f64,
    pub t_up: f64,
    pub t_down: f64,
    pub e_cmp: f64,
    pub e_com: f64,
    pub backhaul_delay: f64,
}

impl CostBreakdown {
    pub fn round_time(&self) -> f64 {
        self.t_down + self.t_up + self.t_cmp + self.backhaul_delay
    }

    pub fn energy(&self) -> f64 {
        self.e_com + self.e_cmp
    }
}

pub fn cost_breakdown(user: &UserNode, rates: LinkRates, config: &SimConfig) -> Result<CostBreakdown> {
    let s = config.payload_bits;
    let t_cmp = computation_time(user, config.local_accuracy, config.nu)?;
    let e_cmp = computation_energy(user, config.local_accuracy, config.nu)?;
    let t_up = transmission_time(s, rates.uplink)?;
    let (t_down, backhaul_delay) = match rates.downlink {
        Downlink::Vlc(r) => (transmission_time(s, r)?, config.backhaul_delay_s),
        Downlink::Rf(r) => (transmission_time(s, r)?, 0.0),
    };
    Ok(CostBreakdown { t_cmp, t_up, t_down, e_cmp, e_com: t_up * user.tx_power, backhaul_delay })
}
