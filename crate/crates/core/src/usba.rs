//! Joint user selection and bandwidth allocation.
//!
//! Selection at fixed RB widths keeps every user whose round time and energy
//! fit their budgets. Bandwidth for a fixed selection saturates both budgets:
//! `B^U = B^D = B_R / (|S| + |S2|)` and `B = B_V / |S1|`. The solver
//! alternates the two steps until neither changes.
//!
//! The alternation is antitone (a larger selection gets narrower RBs, which
//! shrinks the next selection), so it can oscillate. Revisited states are
//! detected and the run stops with the best budget-respecting state it saw,
//! flagged as not converged.

use std::collections::{BTreeSet, HashSet};
use std::fmt;

use crate::channel;
use crate::compute::{cost_breakdown, CostBreakdown, Downlink, LinkRates};
use crate::config::SimConfig;
use crate::error::{Error, Result};
use crate::topology::{Topology, UserNode};

/// Largest topology the enumeration oracle accepts.
pub const ORACLE_MAX_USERS: usize = 14;

/// Relative slack for budget checks on products like `k * (B / k)`.
const BUDGET_RTOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum LinkMode {
    /// Indoor downlink over VLC, everything else over RF.
    Hybrid,
    /// VLC disabled: every downlink takes an RF RB.
    RfOnly,
}

impl LinkMode {
    pub fn as_str(self) -> &'static str {
        match self {
            LinkMode::Hybrid => "hybrid",
            LinkMode::RfOnly => "rf_only",
        }
    }
}

impl fmt::Display for LinkMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Per-RB widths in Hz. Uplink and downlink RBs are always equal.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BandwidthAllocation {
    pub uplink_hz: f64,
    pub downlink_hz: f64,
    pub vlc_hz: f64,
}

impl BandwidthAllocation {
    pub fn new(rf_hz: f64, vlc_hz: f64) -> Self {
        Self { uplink_hz: rf_hz, downlink_hz: rf_hz, vlc_hz }
    }

    fn key(&self) -> [u64; 3] {
        [self.uplink_hz.to_bits(), self.downlink_hz.to_bits(), self.vlc_hz.to_bits()]
    }

    /// Component-wise `self <= other`.
    pub fn le(&self, other: &Self) -> bool {
        self.uplink_hz <= other.uplink_hz && self.downlink_hz <= other.downlink_hz && self.vlc_hz <= other.vlc_hz
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Hash)]
pub struct Selection {
    pub indoor: BTreeSet<usize>,
    pub outdoor: BTreeSet<usize>,
}

impl Selection {
    pub fn len(&self) -> usize {
        self.indoor.len() + self.outdoor.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indoor.is_empty() && self.outdoor.is_empty()
    }

    pub fn contains(&self, id: usize) -> bool {
        self.indoor.contains(&id) || self.outdoor.contains(&id)
    }

    /// All selected ids in ascending order.
    pub fn ids(&self) -> Vec<usize> {
        let mut v: Vec<usize> = self.indoor.iter().chain(self.outdoor.iter()).copied().collect();
        v.sort_unstable();
        v
    }

    pub fn is_subset(&self, other: &Selection) -> bool {
        self.indoor.is_subset(&other.indoor) && self.outdoor.is_subset(&other.outdoor)
    }

    /// Builds a selection from ids, splitting by the users' indoor flag.
    pub fn from_ids(topology: &Topology, ids: impl IntoIterator<Item = usize>) -> Self {
        let mut s = Selection::default();
        for id in ids {
            if topology.user(id).indoor {
                s.indoor.insert(id);
            } else {
                s.outdoor.insert(id);
            }
        }
        s
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct UsbaResult {
    pub selection: Selection,
    pub bandwidth: BandwidthAllocation,
    /// Bandwidth/selection update rounds performed.
    pub iterations: usize,
    pub converged: bool,
    /// The alternation revisited an earlier state.
    pub cycle_detected: bool,
    /// Total selected samples.
    pub objective: u64,
}

pub fn selection_objective(sel: &Selection, topology: &Topology) -> u64 {
    sel.indoor.iter().chain(sel.outdoor.iter()).map(|&id| topology.user(id).shard_size as u64).sum()
}

#[derive(Debug, Clone)]
struct UserLink {
    rf_gain: f64,
    /// `(γ u P_v)²` per AP; empty for outdoor users.
    vlc_signals: Vec<f64>,
}

/// Feasibility and allocation machinery for one topology in one link mode.
#[derive(Debug, Clone)]
pub struct Planner<'a> {
    topology: &'a Topology,
    config: &'a SimConfig,
    mode: LinkMode,
    links: Vec<UserLink>,
}

impl<'a> Planner<'a> {
    pub fn new(topology: &'a Topology, config: &'a SimConfig, mode: LinkMode) -> Result<Self> {
        let rf = config.rf_params();
        let vlc = config.vlc_params();
        let links = topology
            .users
            .iter()
            .map(|u| {
                let rf_gain = channel::rf_channel_gain(topology.bs_distance(u), u.indoor, &rf)?;
                let vlc_signals = if u.indoor && mode == LinkMode::Hybrid {
                    channel::vlc_signal_powers(u, topology, &vlc)?
                } else {
                    Vec::new()
                };
                Ok(UserLink { rf_gain, vlc_signals })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { topology, config, mode, links })
    }

    pub fn mode(&self) -> LinkMode {
        self.mode
    }

    pub fn topology(&self) -> &Topology {
        self.topology
    }

    fn rates(&self, user: &UserNode, bw: &BandwidthAllocation) -> LinkRates {
        let c = self.config;
        let link = &self.links[user.id];
        let uplink =
            channel::rf_rate(user.tx_power, link.rf_gain, c.uplink_interference_w, bw.uplink_hz, c.rf_noise_psd);
        let downlink = if user.indoor && self.mode == LinkMode::Hybrid {
            let sinr = channel::best_sinr(&link.vlc_signals, c.vlc_noise_psd * bw.vlc_hz);
            Downlink::Vlc(channel::vlc_rate(sinr, bw.vlc_hz))
        } else {
            Downlink::Rf(channel::rf_rate(
                c.bs_power_w,
                link.rf_gain,
                c.downlink_interference_w,
                bw.downlink_hz,
                c.rf_noise_psd,
            ))
        };
        LinkRates { uplink, downlink }
    }

    /// Round cost of a user at the given RB widths.
    pub fn user_cost(&self, id: usize, bw: &BandwidthAllocation) -> Result<CostBreakdown> {
        let user = self.topology.user(id);
        cost_breakdown(user, self.rates(user, bw), self.config)
    }

    /// Deadline and energy checks; an unreachable link is infeasible.
    pub fn is_feasible(&self, id: usize, bw: &BandwidthAllocation) -> bool {
        let user = self.topology.user(id);
        match self.user_cost(id, bw) {
            Ok(c) => c.round_time() <= self.config.round_deadline_s && c.energy() <= user.energy_budget,
            Err(_) => false,
        }
    }

    /// Every user that is feasible at `bw`.
    pub fn get_s(&self, bw: &BandwidthAllocation) -> Selection {
        let mut s = Selection::default();
        for u in &self.topology.users {
            if self.is_feasible(u.id, bw) {
                if u.indoor {
                    s.indoor.insert(u.id);
                } else {
                    s.outdoor.insert(u.id);
                }
            }
        }
        s
    }

    /// Budget-saturating RB widths for `n_indoor` + `n_outdoor` selected users.
    pub fn allocation_for_counts(&self, n_indoor: usize, n_outdoor: usize) -> Result<BandwidthAllocation> {
        let total = n_indoor + n_outdoor;
        if total == 0 {
            return Err(Error::EmptySelection);
        }
        let c = self.config;
        Ok(match self.mode {
            LinkMode::Hybrid => {
                let rf = c.rf_bandwidth_hz / (total + n_outdoor) as f64;
                let vlc = if n_indoor == 0 { c.vlc_bandwidth_hz } else { c.vlc_bandwidth_hz / n_indoor as f64 };
                BandwidthAllocation::new(rf, vlc)
            }
            LinkMode::RfOnly => BandwidthAllocation::new(c.rf_bandwidth_hz / (2 * total) as f64, c.vlc_bandwidth_hz),
        })
    }

    pub fn get_b(&self, sel: &Selection) -> Result<BandwidthAllocation> {
        self.allocation_for_counts(sel.indoor.len(), sel.outdoor.len())
    }

    /// Whether the RBs handed to `sel` at widths `bw` fit both budgets.
    pub fn within_budget(&self, sel: &Selection, bw: &BandwidthAllocation) -> bool {
        let c = self.config;
        let (n1, n2) = (sel.indoor.len() as f64, sel.outdoor.len() as f64);
        let rf_used = match self.mode {
            LinkMode::Hybrid => (n1 + n2) * bw.uplink_hz + n2 * bw.downlink_hz,
            LinkMode::RfOnly => (n1 + n2) * (bw.uplink_hz + bw.downlink_hz),
        };
        let vlc_used = match self.mode {
            LinkMode::Hybrid => n1 * bw.vlc_hz,
            LinkMode::RfOnly => 0.0,
        };
        rf_used <= c.rf_bandwidth_hz * (1.0 + BUDGET_RTOL) && vlc_used <= c.vlc_bandwidth_hz * (1.0 + BUDGET_RTOL)
    }

    /// Starting RB widths: configured values, else the allocation that would
    /// serve every user.
    pub fn initial_bandwidth(&self) -> BandwidthAllocation {
        let t = self.topology;
        let all = self.allocation_for_counts(t.n_indoor, t.n_outdoor).unwrap_or_else(|_| self.solo_bandwidth());
        BandwidthAllocation::new(
            self.config.initial_rf_rb_hz.unwrap_or(all.uplink_hz),
            self.config.initial_vlc_rb_hz.unwrap_or(all.vlc_hz),
        )
    }

    /// The widest RBs any single user could be given. Used to restart the
    /// alternation whenever the selection is empty.
    pub fn solo_bandwidth(&self) -> BandwidthAllocation {
        let c = self.config;
        match self.mode {
            LinkMode::Hybrid => BandwidthAllocation::new(c.rf_bandwidth_hz, c.vlc_bandwidth_hz),
            LinkMode::RfOnly => BandwidthAllocation::new(c.rf_bandwidth_hz / 2.0, c.vlc_bandwidth_hz),
        }
    }

    fn next_bandwidth(&self, sel: &Selection) -> BandwidthAllocation {
        self.get_b(sel).unwrap_or_else(|_| self.solo_bandwidth())
    }

    /// Alternates selection and allocation until a fixed point, a revisited
    /// state, or the iteration cap.
    pub fn solve(&self) -> UsbaResult {
        let mut bw = self.initial_bandwidth();
        let mut sel = self.get_s(&bw);
        let mut history = vec![(sel.clone(), bw)];
        let mut seen: HashSet<(Selection, [u64; 3])> = HashSet::new();
        seen.insert((sel.clone(), bw.key()));

        let mut iterations = 0;
        let mut cycle_detected = false;
        while iterations < self.config.max_iterations {
            let next_bw = self.next_bandwidth(&sel);
            let next_sel = self.get_s(&next_bw);
            iterations += 1;
            if next_sel == sel && next_bw == bw {
                let objective = selection_objective(&sel, self.topology);
                return UsbaResult {
                    selection: sel,
                    bandwidth: bw,
                    iterations,
                    converged: true,
                    cycle_detected: false,
                    objective,
                };
            }
            if !seen.insert((next_sel.clone(), next_bw.key())) {
                cycle_detected = true;
                break;
            }
            history.push((next_sel.clone(), next_bw));
            sel = next_sel;
            bw = next_bw;
        }

        // Best state whose selection fits the budgets at its own widths. The
        // first state always qualifies: it was drawn at widths no wider than
        // the full-population allocation, or it is empty.
        let mut best: Option<(&Selection, u64)> = None;
        for (s, b) in &history {
            if !self.within_budget(s, b) {
                continue;
            }
            let obj = selection_objective(s, self.topology);
            if best.map_or(true, |(_, o)| obj > o) {
                best = Some((s, obj));
            }
        }
        let (selection, objective) = match best {
            Some((s, o)) => (s.clone(), o),
            None => (Selection::default(), 0),
        };
        let bandwidth = self.next_bandwidth(&selection);
        UsbaResult { selection, bandwidth, iterations, converged: false, cycle_detected, objective }
    }

    /// Exhaustive optimum over selected-count pairs.
    ///
    /// RB widths depend only on `(|S1|, |S2|)`, so for every count pair the
    /// widths are fixed, the feasible users are known, and the best choice is
    /// the largest shards among them (ties to the lower id).
    pub fn oracle(&self) -> Result<UsbaResult> {
        let t = self.topology;
        if t.n_users() > ORACLE_MAX_USERS {
            return Err(Error::EnumerationCap { n: t.n_users(), cap: ORACLE_MAX_USERS });
        }
        let by_size = |ids: &BTreeSet<usize>| {
            let mut v: Vec<usize> = ids.iter().copied().collect();
            v.sort_by_key(|&id| (std::cmp::Reverse(t.user(id).shard_size), id));
            v
        };

        let mut best = Selection::default();
        let mut best_bw = self.solo_bandwidth();
        let mut best_obj = 0u64;
        let mut evaluated = 0;
        for k1 in 0..=t.n_indoor {
            for k2 in 0..=t.n_outdoor {
                if k1 + k2 == 0 {
                    continue;
                }
                evaluated += 1;
                let bw = self.allocation_for_counts(k1, k2)?;
                let feasible = self.get_s(&bw);
                if feasible.indoor.len() < k1 || feasible.outdoor.len() < k2 {
                    continue;
                }
                let mut pick = Selection::default();
                pick.indoor.extend(by_size(&feasible.indoor).into_iter().take(k1));
                pick.outdoor.extend(by_size(&feasible.outdoor).into_iter().take(k2));
                let obj = selection_objective(&pick, t);
                if obj > best_obj {
                    best_obj = obj;
                    best = pick;
                    best_bw = bw;
                }
            }
        }
        Ok(UsbaResult {
            selection: best,
            bandwidth: best_bw,
            iterations: evaluated,
            converged: true,
            cycle_detected: false,
            objective: best_obj,
        })
    }
}

pub fn is_feasible(user: &UserNode, bw: &BandwidthAllocation, topology: &Topology, config: &SimConfig) -> Result<bool> {
    Ok(Planner::new(topology, config, LinkMode::Hybrid)?.is_feasible(user.id, bw))
}

pub fn get_s(bw: &BandwidthAllocation, topology: &Topology, config: &SimConfig) -> Result<Selection> {
    Ok(Planner::new(topology, config, LinkMode::Hybrid)?.get_s(bw))
}

/// Hybrid-mode allocation; needs no topology, only the selected counts.
pub fn get_b(sel: &Selection, config: &SimConfig) -> Result<BandwidthAllocation> {
    let (n1, n2) = (sel.indoor.len(), sel.outdoor.len());
    if n1 + n2 == 0 {
        return Err(Error::EmptySelection);
    }
    let rf = config.rf_bandwidth_hz / (n1 + 2 * n2) as f64;
    let vlc = if n1 == 0 { config.vlc_bandwidth_hz } else { config.vlc_bandwidth_hz / n1 as f64 };
    Ok(BandwidthAllocation::new(rf, vlc))
}

pub fn usba(topology: &Topology, config: &SimConfig) -> Result<UsbaResult> {
    Ok(Planner::new(topology, config, LinkMode::Hybrid)?.solve())
}

pub fn oracle_enumerate(topology: &Topology, config: &SimConfig) -> Result<UsbaResult> {
    Planner::new(topology, config, LinkMode::Hybrid)?.oracle()
}
