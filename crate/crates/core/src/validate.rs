//! Self-checks behind the `validate` subcommand: optimizer against the
//! enumeration oracle, allocation saturation, fixed points, monotone
//! selection and the backprop gradient.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::config::SimConfig;
use crate::error::Result;
use crate::fl::{self, DataShard, MlpModel, N_FEATURES, N_PARAMS};
use crate::topology::{generate_topology, Topology};
use crate::usba::{BandwidthAllocation, LinkMode, Planner, Selection};

#[derive(Debug, Clone, PartialEq)]
pub struct CheckOutcome {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

/// A small random instance whose budgets are scaled with `N` so that the
/// bandwidth constraints actually bind: `N ∈ [1, max_users]`, both budgets
/// multiplied by `U(0.1, 1)·N/50`.
pub fn random_instance(base: &SimConfig, index: u64, max_users: usize) -> Result<(Topology, SimConfig)> {
    let mut rng = ChaCha8Rng::seed_from_u64(index);
    let n = rng.gen_range(1..=max_users);
    let scale = rng.gen_range(0.1..1.0) * n as f64 / 50.0;
    let cfg = SimConfig {
        n_users: n,
        rf_bandwidth_hz: base.rf_bandwidth_hz * scale,
        vlc_bandwidth_hz: base.vlc_bandwidth_hz * scale,
        ..base.clone()
    };
    let topology = generate_topology(&cfg, index)?;
    Ok((topology, cfg))
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct OracleTally {
    pub converged: usize,
    pub mismatches: usize,
    pub cycled: usize,
    /// Cycled runs whose objective exceeds the oracle's.
    pub dominance_violations: usize,
}

pub fn oracle_equivalence(base: &SimConfig, instances: u64, max_users: usize) -> Result<OracleTally> {
    let mut t = OracleTally::default();
    for i in 0..instances {
        let (topo, cfg) = random_instance(base, i, max_users)?;
        for mode in [LinkMode::Hybrid, LinkMode::RfOnly] {
            let p = Planner::new(&topo, &cfg, mode)?;
            let r = p.solve();
            let o = p.oracle()?;
            if r.converged {
                t.converged += 1;
                t.mismatches += usize::from(r.objective != o.objective);
            } else {
                t.cycled += 1;
                t.dominance_violations += usize::from(r.objective > o.objective);
            }
        }
    }
    Ok(t)
}

/// Converged results that are not fixed points of `get_s ∘ get_b`.
pub fn fixed_point_violations(base: &SimConfig, instances: u64, max_users: usize) -> Result<(usize, usize)> {
    let mut converged = 0;
    let mut bad = 0;
    for i in 0..instances {
        let (topo, cfg) = random_instance(base, i, max_users)?;
        for mode in [LinkMode::Hybrid, LinkMode::RfOnly] {
            let p = Planner::new(&topo, &cfg, mode)?;
            let r = p.solve();
            if !r.converged {
                continue;
            }
            converged += 1;
            let ok = if r.selection.is_empty() {
                p.get_s(&p.solo_bandwidth()).is_empty()
            } else {
                p.get_s(&p.get_b(&r.selection)?) == r.selection
            };
            bad += usize::from(!ok);
        }
    }
    Ok((converged, bad))
}

/// Random selections whose allocation misses either budget by more than one ulp.
pub fn saturation_violations(base: &SimConfig, cases: u64) -> Result<usize> {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5a7);
    let mut bad = 0;
    for _ in 0..cases {
        let n1 = rng.gen_range(0..200usize);
        let n2 = rng.gen_range(0..200usize);
        if n1 + n2 == 0 {
            continue;
        }
        let cfg = SimConfig {
            rf_bandwidth_hz: base.rf_bandwidth_hz * rng.gen_range(0.01..100.0),
            vlc_bandwidth_hz: base.vlc_bandwidth_hz * rng.gen_range(0.01..100.0),
            ..base.clone()
        };
        let sel = Selection { indoor: (0..n1).collect(), outdoor: (n1..n1 + n2).collect() };
        let b = crate::usba::get_b(&sel, &cfg)?;
        let rf = (n1 + 2 * n2) as f64 * b.uplink_hz;
        let ulp = |x: f64| f64::EPSILON * x.abs();
        let mut ok = (rf - cfg.rf_bandwidth_hz).abs() <= ulp(cfg.rf_bandwidth_hz) && b.uplink_hz == b.downlink_hz;
        if n1 > 0 {
            ok &= (n1 as f64 * b.vlc_hz - cfg.vlc_bandwidth_hz).abs() <= ulp(cfg.vlc_bandwidth_hz);
        }
        bad += usize::from(!ok);
    }
    Ok(bad)
}

/// Pairs `bw1 ≤ bw2` for which `get_s(bw1) ⊄ get_s(bw2)`.
pub fn monotonicity_violations(base: &SimConfig, instances: u64) -> Result<usize> {
    let mut bad = 0;
    for i in 0..instances {
        let mut rng = ChaCha8Rng::seed_from_u64(0x40_0000 + i);
        let n = rng.gen_range(1..=60);
        let cfg = SimConfig { n_users: n, ..base.clone() };
        let topo = generate_topology(&cfg, i)?;
        for mode in [LinkMode::Hybrid, LinkMode::RfOnly] {
            let p = Planner::new(&topo, &cfg, mode)?;
            let lo = BandwidthAllocation::new(10f64.powf(rng.gen_range(3.0..7.5)), 10f64.powf(rng.gen_range(3.0..7.5)));
            let grow = rng.gen_range(1.0..20.0);
            let hi = BandwidthAllocation {
                uplink_hz: lo.uplink_hz * grow,
                downlink_hz: lo.downlink_hz * grow,
                vlc_hz: lo.vlc_hz * rng.gen_range(1.0..20.0),
            };
            debug_assert!(lo.le(&hi));
            bad += usize::from(!p.get_s(&lo).is_subset(&p.get_s(&hi)));
        }
    }
    Ok(bad)
}

/// Largest relative error between analytic and central-difference gradients.
pub fn gradient_check(cases: u64) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(0x9ad);
    let mut worst: f64 = 0.0;
    for _ in 0..cases {
        let m = MlpModel::random(&mut rng);
        let n = rng.gen_range(1..=9);
        let shard = DataShard {
            inputs: (0..n).map(|_| std::array::from_fn::<f64, N_FEATURES, _>(|_| rng.gen_range(-2.0..2.0))).collect(),
            targets: (0..n).map(|_| rng.gen_range(-2.0..2.0)).collect(),
            owner: 0,
        };
        let g = fl::gradient(&m, &shard).params();
        let p = m.params();
        for k in 0..N_PARAMS {
            let (mut hi, mut lo) = (p.clone(), p.clone());
            hi[k] += 1e-5;
            lo[k] -= 1e-5;
            let f = |q: &[f64]| fl::loss(&MlpModel::from_params(q).expect("length"), &shard);
            let fd = (f(&hi) - f(&lo)) / 2e-5;
            worst = worst.max((g[k] - fd).abs() / g[k].abs().max(fd.abs()).max(1e-6));
        }
    }
    worst
}

pub fn run_all(base: &SimConfig) -> Result<Vec<CheckOutcome>> {
    let mut out = Vec::new();
    let t = oracle_equivalence(base, 100, 12)?;
    out.push(CheckOutcome {
        name: "oracle equivalence",
        passed: t.mismatches == 0 && t.dominance_violations == 0,
        detail: format!(
            "{} converged ({} mismatched), {} cycled ({} above oracle)",
            t.converged, t.mismatches, t.cycled, t.dominance_violations
        ),
    });
    let (conv, bad) = fixed_point_violations(base, 200, 14)?;
    out.push(CheckOutcome {
        name: "fixed-point consistency",
        passed: bad == 0,
        detail: format!("{bad} of {conv} converged runs are not fixed points"),
    });
    let bad = saturation_violations(base, 1000)?;
    out.push(CheckOutcome {
        name: "allocation saturation",
        passed: bad == 0,
        detail: format!("{bad} of 1000 allocations off budget"),
    });
    let bad = monotonicity_violations(base, 100)?;
    out.push(CheckOutcome {
        name: "monotone selection",
        passed: bad == 0,
        detail: format!("{bad} non-nested bandwidth pairs"),
    });
    let worst = gradient_check(100);
    out.push(CheckOutcome {
        name: "gradient check",
        passed: worst <= 1e-4,
        detail: format!("max relative error {worst:.3e}"),
    });
    Ok(out)
}
