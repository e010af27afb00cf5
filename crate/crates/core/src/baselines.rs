//! Reference schemes for the power comparison.
//!
//! * `comm_only`: the joint problem without the sensing constraint and without
//!   a dedicated radar covariance.
//! * `hd_mode`: half-duplex communication with continuous sensing. Slot A
//!   serves the downlink users (no uplink), slot B serves the uplink users
//!   while the base station transmits a pure radar covariance. Both slots keep
//!   the radar constraint and the full-duplex SINR thresholds.
//! * `fd_proposed`: the full-duplex joint design.

use serde::{Deserialize, Serialize};

use crate::linalg::{db_to_linear, linear_to_db};
use crate::scenario::{ChannelSet, SystemConfig};
use crate::sca::{solve_joint_with, ProblemVariant, ScaSettings, SolverTrace};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scheme {
    FdProposed,
    HdMode,
    CommOnly,
}

impl Scheme {
    pub const ALL: [Scheme; 3] = [Scheme::FdProposed, Scheme::HdMode, Scheme::CommOnly];

    pub fn name(self) -> &'static str {
        match self {
            Scheme::FdProposed => "fd_proposed",
            Scheme::HdMode => "hd_mode",
            Scheme::CommOnly => "comm_only",
        }
    }
}

impl std::fmt::Display for Scheme {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone)]
pub struct BaselineResult {
    pub scheme: Scheme,
    pub total_power_mw: f64,
    pub per_slot_power_mw: Vec<f64>,
    /// One trace per solved slot.
    pub traces: Vec<SolverTrace>,
}

pub fn solve_fd(ch: &ChannelSet, cfg: &SystemConfig, s: &ScaSettings) -> Result<BaselineResult> {
    let sol = solve_joint_with(ch, cfg, s, ProblemVariant::default())?;
    let p = sol.total_power_mw();
    Ok(BaselineResult { scheme: Scheme::FdProposed, total_power_mw: p, per_slot_power_mw: vec![p], traces: vec![sol.trace] })
}

pub fn solve_comm_only(ch: &ChannelSet, cfg: &SystemConfig, s: &ScaSettings) -> Result<BaselineResult> {
    let sol = solve_joint_with(ch, cfg, s, ProblemVariant::COMM_ONLY)?;
    let p = sol.total_power_mw();
    Ok(BaselineResult { scheme: Scheme::CommOnly, total_power_mw: p, per_slot_power_mw: vec![p], traces: vec![sol.trace] })
}

/// How the half-duplex slots are instantiated.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HdConvention {
    /// Each slot keeps the full-duplex SINR thresholds.
    #[default]
    SameThresholds,
    /// Each slot carries its users' traffic in half the resource, so a
    /// threshold `τ` becomes `(1 + τ)² − 1` to deliver the same rate.
    RateMatched,
}

impl HdConvention {
    fn adjust(self, mut cfg: SystemConfig) -> SystemConfig {
        if self == HdConvention::RateMatched {
            let rate_matched = |db: &mut f64| *db = linear_to_db((1.0 + db_to_linear(*db)).powi(2) - 1.0);
            cfg.ul_sinr_db.iter_mut().for_each(rate_matched);
            cfg.dl_sinr_db.iter_mut().for_each(rate_matched);
        }
        cfg
    }
}

pub fn solve_hd_mode(ch: &ChannelSet, cfg: &SystemConfig, s: &ScaSettings) -> Result<BaselineResult> {
    solve_hd_mode_with(ch, cfg, s, HdConvention::default())
}

pub fn solve_hd_mode_with(
    ch: &ChannelSet,
    cfg: &SystemConfig,
    s: &ScaSettings,
    convention: HdConvention,
) -> Result<BaselineResult> {
    let cfg = convention.adjust(cfg.clone());
    let a = solve_joint_with(&ch.clone().without_uplink(), &cfg.clone().without_uplink(), s, ProblemVariant::default())?;
    let b = solve_joint_with(&ch.clone().without_downlink(), &cfg.without_downlink(), s, ProblemVariant::default())?;
    let (pa, pb) = (a.total_power_mw(), b.total_power_mw());
    Ok(BaselineResult {
        scheme: Scheme::HdMode,
        total_power_mw: hd_total(pa, pb),
        per_slot_power_mw: vec![pa, pb],
        traces: vec![a.trace, b.trace],
    })
}

/// Time-averaged power of the two half-duplex slots; each slot occupies half
/// of the resource.
pub fn hd_total(slot_a: f64, slot_b: f64) -> f64 {
    0.5 * (slot_a + slot_b)
}

pub fn solve_scheme(
    scheme: Scheme,
    ch: &ChannelSet,
    cfg: &SystemConfig,
    s: &ScaSettings,
    hd: HdConvention,
) -> Result<BaselineResult> {
    match scheme {
        Scheme::FdProposed => solve_fd(ch, cfg, s),
        Scheme::HdMode => solve_hd_mode_with(ch, cfg, s, hd),
        Scheme::CommOnly => solve_comm_only(ch, cfg, s),
    }
}

impl std::str::FromStr for Scheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Scheme::ALL
            .into_iter()
            .find(|x| x.name() == s)
            .ok_or_else(|| Error::Config(format!("unknown scheme `{s}`")))
    }
}
