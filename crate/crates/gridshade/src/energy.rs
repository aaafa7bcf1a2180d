//! Energy sources at a site: solar output, battery state, and grid windows.
//!
//! Solar output follows a half-sine between sunrise and sunset. Batteries
//! only discharge; residual charge carries across slots and is the sole
//! coupling between consecutive solver runs. A grid outage simply caps the
//! grid draw at zero for every slot the outage window touches.

use crate::net::{Node, NodeId};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum EnergyError {
    #[error("unknown node id {0}")]
    UnknownNode(NodeId),
    #[error(
        "battery over-withdrawal at node {node}: {requested_kwh} kWh requested, {available_kwh} kWh left"
    )]
    OverWithdrawal {
        node: NodeId,
        requested_kwh: f64,
        available_kwh: f64,
    },
}

/// Per-node energy endowment and grid schedule for one simulated day.
#[derive(Debug, Clone, PartialEq)]
pub struct NodeEnergyConfig {
    pub battery_capacity_kwh: f64,
    pub solar_peak_kw: f64,
    pub sunrise_hour: f64,
    pub sunset_hour: f64,
    /// Half-open [start, end) hour windows with no mains power.
    pub grid_outage_windows: Vec<(f64, f64)>,
    /// Grid draw ceiling in kW while the grid is up. Callers set this to the
    /// node's structural maximum power so the cap never binds artificially.
    pub grid_cap_kw: f64,
}

impl NodeEnergyConfig {
    /// Builds a config from a topology node plus the scenario's outage
    /// windows for that node.
    pub fn from_node(node: &Node, outages: Vec<(f64, f64)>, grid_cap_kw: f64) -> Self {
        NodeEnergyConfig {
            battery_capacity_kwh: node.battery_kwh,
            solar_peak_kw: node.solar_peak_kw,
            sunrise_hour: node.sunrise,
            sunset_hour: node.sunset,
            grid_outage_windows: outages,
            grid_cap_kw,
        }
    }
}

/// Mutable battery residuals carried through a day run.
#[derive(Debug, Clone, PartialEq)]
pub struct EnergyState {
    pub residual_kwh: Vec<f64>,
}

impl EnergyState {
    pub fn new(configs: &[NodeEnergyConfig]) -> Self {
        EnergyState {
            residual_kwh: configs.iter().map(|c| c.battery_capacity_kwh).collect(),
        }
    }
}

/// Per-source power ceilings for one node in one slot, kW.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SourceCaps {
    pub re_max_kw: f64,
    pub bt_max_kw: f64,
    pub br_max_kw: f64,
}

/// Mean solar output over the slot, kW.
///
/// Integrates `peak * sin(pi * (h - sunrise) / daylight)` over the part of
/// the slot that overlaps daylight and divides by the slot length.
pub fn renewable_cap(cfg: &NodeEnergyConfig, slot_start_hour: f64, slot_hours: f64) -> f64 {
    let daylight = cfg.sunset_hour - cfg.sunrise_hour;
    if cfg.solar_peak_kw <= 0.0 || daylight <= 0.0 || slot_hours <= 0.0 {
        return 0.0;
    }
    let lo = slot_start_hour.max(cfg.sunrise_hour);
    let hi = (slot_start_hour + slot_hours).min(cfg.sunset_hour);
    if hi <= lo {
        return 0.0;
    }
    let phase = |h: f64| (std::f64::consts::PI * (h - cfg.sunrise_hour) / daylight).cos();
    let integral = cfg.solar_peak_kw * (daylight / std::f64::consts::PI) * (phase(lo) - phase(hi));
    integral / slot_hours
}

/// Whether the grid is usable for the whole slot. Any overlap with an outage
/// window disables it for the slot.
pub fn grid_available(cfg: &NodeEnergyConfig, slot_start_hour: f64, slot_hours: f64) -> bool {
    let slot_end = slot_start_hour + slot_hours;
    !cfg.grid_outage_windows
        .iter()
        .any(|(start, end)| slot_start_hour < *end && *start < slot_end)
}

/// Withdraws a slot's battery energy and updates the residual.
pub fn battery_step(
    state: &mut EnergyState,
    node: NodeId,
    bt_kw: f64,
    slot_hours: f64,
) -> Result<(), EnergyError> {
    let residual = state
        .residual_kwh
        .get_mut(node)
        .ok_or(EnergyError::UnknownNode(node))?;
    let requested = bt_kw * slot_hours;
    if requested > *residual + 1e-9 {
        return Err(EnergyError::OverWithdrawal {
            node,
            requested_kwh: requested,
            available_kwh: *residual,
        });
    }
    *residual = (*residual - requested).max(0.0);
    Ok(())
}

/// Source ceilings for one node in one slot: solar slot-mean, battery
/// residual spread over the slot, and the grid cap or zero during outages.
pub fn source_caps(
    state: &EnergyState,
    cfg: &NodeEnergyConfig,
    node: NodeId,
    slot_start_hour: f64,
    slot_hours: f64,
) -> Result<SourceCaps, EnergyError> {
    let residual = state
        .residual_kwh
        .get(node)
        .copied()
        .ok_or(EnergyError::UnknownNode(node))?;
    Ok(SourceCaps {
        re_max_kw: renewable_cap(cfg, slot_start_hour, slot_hours),
        bt_max_kw: residual / slot_hours,
        br_max_kw: if grid_available(cfg, slot_start_hour, slot_hours) {
            cfg.grid_cap_kw
        } else {
            0.0
        },
    })
}
