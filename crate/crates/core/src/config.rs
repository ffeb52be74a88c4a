//! Simulation configuration.
//!
//! Defaults describe the reference scenario: a 50 m cell, 50 users, 20 MHz of
//! RF and 40 MHz of VLC bandwidth. Every field can be overridden from a flat
//! `key = value` file.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::channel::{self, RfParams, VlcParams};
use crate::error::{Error, Result};

/// Path loss of a co-channel neighbour one cell diameter away, used to derive
/// the default inter-cell interference levels.
fn neighbour_gain(cell_radius_m: f64) -> f64 {
    channel::path_gain(2.0 * cell_radius_m, 0.0)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimConfig {
    // VLC downlink
    pub optical_power_w: f64,
    pub vlc_bandwidth_hz: f64,
    pub pd_area_m2: f64,
    pub half_intensity_deg: f64,
    pub filter_gain: f64,
    pub fov_half_angle_deg: f64,
    pub refractive_index: f64,
    pub conversion_efficiency: f64,
    pub vlc_noise_psd: f64,

    // RF
    pub rf_noise_psd: f64,
    pub rf_bandwidth_hz: f64,
    pub bs_power_w: f64,
    pub uplink_interference_w: f64,
    pub downlink_interference_w: f64,
    pub penetration_loss_db: f64,

    // FL round constraints
    pub n_users: usize,
    pub round_deadline_s: f64,
    pub energy_budget_j: f64,
    pub capacitance_coeff: f64,
    pub payload_bits: f64,
    pub backhaul_delay_s: f64,
    pub nu: f64,
    pub local_accuracy: f64,

    // Layout
    pub indoor_fraction: f64,
    pub cell_radius_m: f64,
    pub n_aps: usize,
    /// AP ring radius as a fraction of the cell radius.
    pub ap_ring_fraction: f64,
    pub ap_drop_m: f64,
    pub rx_height_m: f64,
    pub ap_coverage_m: f64,

    // Per-user hardware
    pub tx_power_w: f64,
    pub cycles_per_sample_min: f64,
    pub cycles_per_sample_max: f64,
    pub cpu_freq_min_hz: f64,
    pub cpu_freq_max_hz: f64,

    // Data
    pub dataset_rows: usize,
    pub test_size: usize,

    // Training
    pub learning_rate: f64,
    pub local_epochs: usize,
    pub global_rounds: usize,

    // USBA
    pub max_iterations: usize,
    /// Initial RF RB width; `None` means the all-users-selected allocation.
    pub initial_rf_rb_hz: Option<f64>,
    pub initial_vlc_rb_hz: Option<f64>,

    // Experiments
    pub seeds: Vec<u64>,
    pub sweep_users: Vec<usize>,
    /// `(rf_bandwidth_hz, vlc_bandwidth_hz)` pairs.
    pub sweep_bandwidths: Vec<(f64, f64)>,
}

impl Default for SimConfig {
    fn default() -> Self {
        let cell_radius_m = 50.0;
        let bs_power_w = 1.0;
        let tx_power_w = 0.1;
        let g = neighbour_gain(cell_radius_m);
        Self {
            optical_power_w: 9.0,
            vlc_bandwidth_hz: 40e6,
            pd_area_m2: 1e-4,
            half_intensity_deg: 60.0,
            filter_gain: 1.0,
            fov_half_angle_deg: 90.0,
            refractive_index: 1.5,
            conversion_efficiency: 0.53,
            vlc_noise_psd: 1e-21,

            rf_noise_psd: 1e-21,
            rf_bandwidth_hz: 20e6,
            bs_power_w,
            uplink_interference_w: tx_power_w * g,
            downlink_interference_w: bs_power_w * g,
            penetration_loss_db: 10.0,

            n_users: 50,
            round_deadline_s: 2.5,
            energy_budget_j: 2.0,
            capacitance_coeff: 2e-28,
            payload_bits: 1e6,
            backhaul_delay_s: 0.05,
            nu: 1.0,
            local_accuracy: 0.5,

            indoor_fraction: 0.8,
            cell_radius_m,
            n_aps: 4,
            ap_ring_fraction: 0.5,
            ap_drop_m: 2.5,
            rx_height_m: 0.85,
            ap_coverage_m: 3.0,

            tx_power_w,
            cycles_per_sample_min: 1e4,
            cycles_per_sample_max: 3e4,
            cpu_freq_min_hz: 1e8,
            cpu_freq_max_hz: 1e9,

            dataset_rows: 506,
            test_size: 17,

            learning_rate: 0.05,
            local_epochs: 5,
            global_rounds: 100,

            max_iterations: 50,
            initial_rf_rb_hz: None,
            initial_vlc_rb_hz: None,

            seeds: (0..20).collect(),
            sweep_users: vec![20, 30, 40, 50, 60, 70, 80, 90, 100],
            sweep_bandwidths: vec![(10e6, 20e6), (20e6, 40e6), (30e6, 60e6)],
        }
    }
}

impl SimConfig {
    /// Reads a flat `key = value` file; unset keys keep their defaults.
    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_toml_str(&text)
    }

    pub fn from_toml_str(text: &str) -> Result<Self> {
        let cfg: SimConfig = toml::from_str(text).map_err(|e| Error::ConfigFile(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_toml_string(&self) -> String {
        // Every field is serializable, so this cannot fail.
        toml::to_string(self).expect("config serializes")
    }

    /// Samples per user under an equal split of the non-test rows.
    pub fn shard_size(&self) -> usize {
        if self.n_users == 0 {
            return 0;
        }
        self.dataset_rows.saturating_sub(self.test_size) / self.n_users
    }

    pub fn vlc_params(&self) -> VlcParams {
        VlcParams {
            optical_power: self.optical_power_w,
            pd_area: self.pd_area_m2,
            half_intensity_deg: self.half_intensity_deg,
            filter_gain: self.filter_gain,
            fov_half_angle_deg: self.fov_half_angle_deg,
            refractive_index: self.refractive_index,
            conversion_efficiency: self.conversion_efficiency,
            noise_psd: self.vlc_noise_psd,
            total_bandwidth: self.vlc_bandwidth_hz,
        }
    }

    pub fn rf_params(&self) -> RfParams {
        RfParams {
            bs_power: self.bs_power_w,
            noise_psd: self.rf_noise_psd,
            total_bandwidth: self.rf_bandwidth_hz,
            uplink_interference: self.uplink_interference_w,
            downlink_interference: self.downlink_interference_w,
            penetration_loss_db: self.penetration_loss_db,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let positive: [(&'static str, f64); 29] = [
            ("optical_power_w", self.optical_power_w),
            ("vlc_bandwidth_hz", self.vlc_bandwidth_hz),
            ("pd_area_m2", self.pd_area_m2),
            ("half_intensity_deg", self.half_intensity_deg),
            ("filter_gain", self.filter_gain),
            ("fov_half_angle_deg", self.fov_half_angle_deg),
            ("refractive_index", self.refractive_index),
            ("conversion_efficiency", self.conversion_efficiency),
            ("vlc_noise_psd", self.vlc_noise_psd),
            ("rf_noise_psd", self.rf_noise_psd),
            ("rf_bandwidth_hz", self.rf_bandwidth_hz),
            ("bs_power_w", self.bs_power_w),
            ("round_deadline_s", self.round_deadline_s),
            ("energy_budget_j", self.energy_budget_j),
            ("capacitance_coeff", self.capacitance_coeff),
            ("nu", self.nu),
            ("local_accuracy", self.local_accuracy),
            ("cell_radius_m", self.cell_radius_m),
            ("ap_ring_fraction", self.ap_ring_fraction),
            ("ap_drop_m", self.ap_drop_m),
            ("rx_height_m", self.rx_height_m),
            ("ap_coverage_m", self.ap_coverage_m),
            ("tx_power_w", self.tx_power_w),
            ("cycles_per_sample_min", self.cycles_per_sample_min),
            ("cycles_per_sample_max", self.cycles_per_sample_max),
            ("cpu_freq_min_hz", self.cpu_freq_min_hz),
            ("cpu_freq_max_hz", self.cpu_freq_max_hz),
            ("learning_rate", self.learning_rate),
            ("payload_bits", self.payload_bits),
        ];
        for (field, v) in positive {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::invalid_config(field, format!("must be positive and finite, got {v}")));
            }
        }
        let non_negative = [
            ("uplink_interference_w", self.uplink_interference_w),
            ("downlink_interference_w", self.downlink_interference_w),
            ("penetration_loss_db", self.penetration_loss_db),
            ("backhaul_delay_s", self.backhaul_delay_s),
        ];
        for (field, v) in non_negative {
            if !(v.is_finite() && v >= 0.0) {
                return Err(Error::invalid_config(field, format!("must be non-negative and finite, got {v}")));
            }
        }
        if self.n_users == 0 {
            return Err(Error::invalid_config("n_users", "must be at least 1"));
        }
        if !(0.0..=1.0).contains(&self.indoor_fraction) {
            return Err(Error::invalid_config(
                "indoor_fraction",
                format!("must lie in [0, 1], got {}", self.indoor_fraction),
            ));
        }
        if self.n_aps == 0 {
            return Err(Error::invalid_config("n_aps", "must be at least 1"));
        }
        if self.local_accuracy >= 1.0 {
            return Err(Error::invalid_config("local_accuracy", "must lie in (0, 1)"));
        }
        if self.half_intensity_deg >= 90.0 {
            return Err(Error::invalid_config("half_intensity_deg", "must lie in (0, 90)"));
        }
        if self.fov_half_angle_deg > 90.0 {
            return Err(Error::invalid_config("fov_half_angle_deg", "must lie in (0, 90]"));
        }
        if self.cycles_per_sample_min > self.cycles_per_sample_max {
            return Err(Error::invalid_config("cycles_per_sample_min", "exceeds cycles_per_sample_max"));
        }
        if self.cpu_freq_min_hz > self.cpu_freq_max_hz {
            return Err(Error::invalid_config("cpu_freq_min_hz", "exceeds cpu_freq_max_hz"));
        }
        if self.ap_ring_fraction * self.cell_radius_m + self.ap_coverage_m > self.cell_radius_m {
            return Err(Error::invalid_config("ap_coverage_m", "indoor coverage discs must fit inside the cell"));
        }
        if self.max_iterations == 0 {
            return Err(Error::invalid_config("max_iterations", "must be at least 1"));
        }
        for (field, v) in [("initial_rf_rb_hz", self.initial_rf_rb_hz), ("initial_vlc_rb_hz", self.initial_vlc_rb_hz)] {
            if let Some(v) = v {
                if !(v.is_finite() && v > 0.0) {
                    return Err(Error::invalid_config(field, format!("must be positive, got {v}")));
                }
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_match_simulation_table() {
        let c = SimConfig::default();
        assert_eq!(c.optical_power_w, 9.0);
        assert_eq!(c.vlc_bandwidth_hz, 40e6);
        assert_eq!(c.pd_area_m2, 1e-4);
        assert_eq!(c.half_intensity_deg, 60.0);
        assert_eq!(c.filter_gain, 1.0);
        assert_eq!(c.fov_half_angle_deg, 90.0);
        assert_eq!(c.refractive_index, 1.5);
        assert_eq!(c.conversion_efficiency, 0.53);
        assert_eq!(c.vlc_noise_psd, 1e-21);
        assert_eq!(c.rf_noise_psd, 1e-21);
        assert_eq!(c.rf_bandwidth_hz, 20e6);
        assert_eq!(c.bs_power_w, 1.0);
        assert_eq!(c.n_users, 50);
        assert_eq!(c.round_deadline_s, 2.5);
        assert_eq!(c.energy_budget_j, 2.0);
        assert_eq!(c.capacitance_coeff, 2e-28);
        assert_eq!(c.payload_bits, 1e6);
        c.validate().unwrap();
    }

    #[test]
    fn default_interference_is_one_neighbour_at_two_radii() {
        let c = SimConfig::default();
        // 128.1 - 37.6 = 90.5 dB at 100 m
        let g = 10f64.powf(-9.05);
        assert!((c.downlink_interference_w / g - 1.0).abs() < 1e-12);
        assert!((c.uplink_interference_w / (0.1 * g) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn rejects_non_positive_field_by_name() {
        let mut c = SimConfig::default();
        c.rf_bandwidth_hz = 0.0;
        match c.validate() {
            Err(Error::InvalidConfig { field, .. }) => assert_eq!(field, "rf_bandwidth_hz"),
            other => panic!("unexpected {other:?}"),
        }
        let mut c = SimConfig::default();
        c.tx_power_w = -1.0;
        let msg = c.validate().unwrap_err().to_string();
        assert!(msg.contains("tx_power_w"), "{msg}");
    }

    #[test]
    fn file_overrides_defaults() {
        let c = SimConfig::from_toml_str("n_users = 12\nrf_bandwidth_hz = 5e6\nseeds = [3, 4]\n").unwrap();
        assert_eq!(c.n_users, 12);
        assert_eq!(c.rf_bandwidth_hz, 5e6);
        assert_eq!(c.seeds, vec![3, 4]);
        assert_eq!(c.vlc_bandwidth_hz, 40e6);
    }

    #[test]
    fn unknown_key_is_rejected() {
        assert!(SimConfig::from_toml_str("n_user = 3").is_err());
    }

    #[test]
    fn toml_round_trip() {
        let c = SimConfig::default();
        let back = SimConfig::from_toml_str(&c.to_toml_string()).unwrap();
        assert_eq!(c, back);
    }

    #[test]
    fn shard_size_follows_equal_split() {
        let mut c = SimConfig::default();
        assert_eq!(c.shard_size(), 9);
        c.n_users = 100;
        assert_eq!(c.shard_size(), 4);
    }
}
