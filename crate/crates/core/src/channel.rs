//! Physical-layer models.
//!
//! VLC: line-of-sight Lambertian gain with an optical concentrator, SINR over
//! all APs, and the amplitude-constrained rate lower bound. RF: log-distance
//! path loss and the Shannon rate of one OFDMA resource block.
//!
//! Angles cross the API in degrees.

use std::f64::consts::{E, PI};

use crate::error::{Error, Result};
use crate::topology::{distance, Point3, Topology, UserNode};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VlcParams {
    /// Transmitted optical power per AP, W.
    pub optical_power: f64,
    /// Photodiode area, m².
    pub pd_area: f64,
    pub half_intensity_deg: f64,
    pub filter_gain: f64,
    pub fov_half_angle_deg: f64,
    pub refractive_index: f64,
    /// Optical-to-electrical conversion efficiency, A/W.
    pub conversion_efficiency: f64,
    /// Noise PSD, A²/Hz.
    pub noise_psd: f64,
    pub total_bandwidth: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RfParams {
    pub bs_power: f64,
    /// Noise PSD, W/Hz.
    pub noise_psd: f64,
    pub total_bandwidth: f64,
    /// Co-channel interference received at the BS on an uplink RB, W.
    pub uplink_interference: f64,
    /// Co-channel interference received by a user on a downlink RB, W.
    pub downlink_interference: f64,
    pub penetration_loss_db: f64,
}

/// Cosine of an angle in degrees, exact where the result is 0, ±½ or ±1.
pub(crate) fn cos_deg(deg: f64) -> f64 {
    let r = deg.rem_euclid(360.0);
    match r {
        x if x == 0.0 => 1.0,
        x if x == 60.0 || x == 300.0 => 0.5,
        x if x == 90.0 || x == 270.0 => 0.0,
        x if x == 120.0 || x == 240.0 => -0.5,
        x if x == 180.0 => -1.0,
        x => x.to_radians().cos(),
    }
}

pub(crate) fn sin_deg(deg: f64) -> f64 {
    cos_deg(90.0 - deg)
}

/// Lambertian order `m = -1 / log2(cos θ½)`.
pub fn lambertian_order(half_intensity_deg: f64) -> Result<f64> {
    let c = cos_deg(half_intensity_deg);
    if !(c > 0.0 && c < 1.0) {
        return Err(Error::InvalidArgument(format!(
            "half-intensity angle {half_intensity_deg}° must lie strictly between 0° and 90°"
        )));
    }
    Ok(-1.0 / c.log2())
}

/// Concentrator gain `n0² / sin² Θ_F` inside the field of view, zero outside.
pub fn concentrator_gain(incidence_deg: f64, fov_half_angle_deg: f64, refractive_index: f64) -> f64 {
    if incidence_deg > fov_half_angle_deg {
        return 0.0;
    }
    let s = sin_deg(fov_half_angle_deg);
    refractive_index * refractive_index / (s * s)
}

/// LoS optical gain between a downward-facing LED and an upward-facing photodiode.
///
/// With both devices aligned to the vertical, the irradiation angle equals the
/// incidence angle and `cos θ = Δh / d`.
pub fn vlc_channel_gain(ap: Point3, user: Point3, p: &VlcParams) -> Result<f64> {
    let d = distance(ap, user);
    if d == 0.0 {
        return Err(Error::InvalidArgument("AP and receiver coincide".into()));
    }
    let drop = ap.z - user.z;
    if drop <= 0.0 {
        return Err(Error::InvalidArgument("AP must be above the receiver plane".into()));
    }
    let cos_t = (drop / d).min(1.0);
    let incidence_deg = cos_t.acos().to_degrees();
    let g = concentrator_gain(incidence_deg, p.fov_half_angle_deg, p.refractive_index);
    if g == 0.0 {
        return Ok(0.0);
    }
    let m = lambertian_order(p.half_intensity_deg)?;
    Ok((m + 1.0) * p.pd_area / (2.0 * PI * d * d) * p.filter_gain * g * cos_t.powf(m) * cos_t)
}

/// Received electrical signal power `(γ u P_v)²` from every AP, in AP order.
pub fn vlc_signal_powers(user: &UserNode, topology: &Topology, p: &VlcParams) -> Result<Vec<f64>> {
    topology
        .vlc_aps
        .iter()
        .map(|&ap| {
            let u = vlc_channel_gain(ap, user.position, p)?;
            let a = p.conversion_efficiency * u * p.optical_power;
            Ok(a * a)
        })
        .collect()
}

/// Best per-AP SINR given the received signal powers and the noise power `N0·B`.
pub fn best_sinr(signals: &[f64], noise_power: f64) -> f64 {
    let total: f64 = signals.iter().sum();
    signals
        .iter()
        .map(|&s| {
            let den = noise_power + (total - s).max(0.0);
            if s == 0.0 {
                0.0
            } else {
                s / den
            }
        })
        .fold(0.0, f64::max)
}

/// SINR of an indoor user served by its strongest AP.
pub fn vlc_sinr(user: &UserNode, topology: &Topology, rb_bandwidth: f64, p: &VlcParams) -> Result<f64> {
    if !user.indoor {
        return Err(Error::InvalidArgument(format!("user {} is outdoor and has no VLC link", user.id)));
    }
    if topology.vlc_aps.is_empty() {
        return Err(Error::InvalidArgument("topology has no VLC APs".into()));
    }
    if !(rb_bandwidth > 0.0) {
        return Err(Error::InvalidArgument("RB bandwidth must be positive".into()));
    }
    let signals = vlc_signal_powers(user, topology, p)?;
    Ok(best_sinr(&signals, p.noise_psd * rb_bandwidth))
}

/// Lower bound on the achievable VLC rate of one RB, bits/s.
pub fn vlc_rate(sinr: f64, rb_bandwidth: f64) -> f64 {
    rb_bandwidth / 2.0 * (1.0 + 2.0 / (PI * E) * sinr).log2()
}

/// Log-distance gain `10^(-PL/10)` with `PL = 128.1 + 37.6 log10(d / 1 km) + extra`.
pub(crate) fn path_gain(dist_m: f64, extra_loss_db: f64) -> f64 {
    let pl = 128.1 + 37.6 * (dist_m / 1000.0).log10() + extra_loss_db;
    10f64.powf(-pl / 10.0)
}

pub fn rf_channel_gain(dist_m: f64, indoor: bool, p: &RfParams) -> Result<f64> {
    if !(dist_m > 0.0) {
        return Err(Error::InvalidArgument(format!("RF distance must be positive, got {dist_m}")));
    }
    let extra = if indoor { p.penetration_loss_db } else { 0.0 };
    Ok(path_gain(dist_m, extra))
}

/// Shannon rate of one RB: `B log2(1 + P h / (I + B N0))`.
pub fn rf_rate(tx_power: f64, gain: f64, interference: f64, rb_bandwidth: f64, noise_psd: f64) -> f64 {
    rb_bandwidth * (1.0 + tx_power * gain / (interference + rb_bandwidth * noise_psd)).log2()
}
