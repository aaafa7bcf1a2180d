//! Equipment power model.
//!
//! Watt shares on links and lightpaths are split half/half between the two
//! endpoint sites, so summing node totals reproduces the undivided network
//! figure. Amplifier chains and the optical switch draw power regardless of
//! traffic; everything else scales with lightpath and wavelength counts.

use crate::net::{amplifier_count, NodeId, Topology};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use thiserror::Error;

/// Per-device draw in watts.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DevicePowers {
    pub router_port_w: f64,
    pub transponder_w: f64,
    pub regenerator_w: f64,
    pub edfa_w: f64,
    pub optical_switch_w: f64,
}

impl Default for DevicePowers {
    fn default() -> Self {
        DevicePowers {
            router_port_w: 825.0,
            transponder_w: 167.0,
            regenerator_w: 334.0,
            edfa_w: 55.0,
            optical_switch_w: 85.0,
        }
    }
}

/// A concrete operating point of the two-layer network.
///
/// `lightpaths` counts virtual links C_ij between router pairs,
/// `wavelengths_on_link` counts channels W_mn per ordered physical link, and
/// `wavelength_routing` breaks the latter down per virtual link.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct NetworkConfiguration {
    pub lightpaths: BTreeMap<(NodeId, NodeId), u32>,
    pub wavelengths_on_link: BTreeMap<(NodeId, NodeId), u32>,
    pub wavelength_routing: BTreeMap<((NodeId, NodeId), (NodeId, NodeId)), u32>,
}

impl NetworkConfiguration {
    /// Rebuilds the per-link totals from the per-virtual-link routing.
    pub fn recompute_link_totals(&mut self) {
        self.wavelengths_on_link.clear();
        for ((_, link), count) in &self.wavelength_routing {
            *self.wavelengths_on_link.entry(*link).or_insert(0) += count;
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct NodePowerBreakdown {
    pub router_w: f64,
    pub transponder_w: f64,
    pub edfa_w: f64,
    pub regenerator_w: f64,
    pub switch_w: f64,
}

impl NodePowerBreakdown {
    pub fn total_w(&self) -> f64 {
        self.router_w + self.transponder_w + self.edfa_w + self.regenerator_w + self.switch_w
    }
}

#[derive(Debug, Error)]
pub enum PowerError {
    #[error("unknown node id {0}")]
    UnknownNode(NodeId),
    #[error("configuration references missing physical link ({0}, {1})")]
    UnknownLink(NodeId, NodeId),
}

/// Power drawn at one site for a given operating point.
pub fn node_power(
    topo: &Topology,
    cfg: &NetworkConfiguration,
    dev: &DevicePowers,
    node: NodeId,
) -> Result<NodePowerBreakdown, PowerError> {
    if node >= topo.node_count() {
        return Err(PowerError::UnknownNode(node));
    }

    let mut router_channels = 0u64;
    for ((i, j), count) in &cfg.lightpaths {
        if *i == node || *j == node {
            router_channels += *count as u64;
        }
    }

    let mut transponder_channels = 0u64;
    let mut regenerator_units = 0u64;
    for ((m, n), count) in &cfg.wavelengths_on_link {
        if *m != node && *n != node {
            continue;
        }
        let link = topo
            .link_between(*m, *n)
            .ok_or(PowerError::UnknownLink(*m, *n))?;
        transponder_channels += *count as u64;
        regenerator_units += (link.regenerators as u64) * (*count as u64);
    }

    let mut edfa_units = 0.0;
    for link in &topo.links {
        if link.m == node || link.n == node {
            edfa_units +=
                link.fibers as f64 * amplifier_count(link.length_km, topo.span_km) as f64;
        }
    }

    Ok(NodePowerBreakdown {
        router_w: 0.5 * dev.router_port_w * router_channels as f64,
        transponder_w: 0.5 * dev.transponder_w * transponder_channels as f64,
        edfa_w: 0.5 * dev.edfa_w * edfa_units,
        regenerator_w: 0.5 * dev.regenerator_w * regenerator_units as f64,
        switch_w: dev.optical_switch_w,
    })
}

/// Total network draw; equals the sum of all node totals.
pub fn network_power(
    topo: &Topology,
    cfg: &NetworkConfiguration,
    dev: &DevicePowers,
) -> Result<f64, PowerError> {
    let mut total = 0.0;
    for node in 0..topo.node_count() {
        total += node_power(topo, cfg, dev, node)?.total_w();
    }
    Ok(total)
}

/// Traffic-independent draw at one site: amplifier shares plus the switch.
pub fn fixed_node_power(topo: &Topology, dev: &DevicePowers, node: NodeId) -> f64 {
    let mut edfa_units = 0.0;
    for link in &topo.links {
        if link.m == node || link.n == node {
            edfa_units +=
                link.fibers as f64 * amplifier_count(link.length_km, topo.span_km) as f64;
        }
    }
    0.5 * dev.edfa_w * edfa_units + dev.optical_switch_w
}

/// Upper bound on a site's draw with every lightpath and wavelength count at
/// its structural maximum. Used as the big-M grid cap for nodes with mains
/// power available.
pub fn max_node_power(topo: &Topology, dev: &DevicePowers, node: NodeId) -> f64 {
    let w = topo.wavelengths_per_fiber as f64;
    let mut directed_cap = 0.0;
    let mut regen_cap = 0.0;
    for link in &topo.links {
        if link.m == node || link.n == node {
            let per_direction = w * link.fibers as f64;
            directed_cap += 2.0 * per_direction;
            regen_cap += 2.0 * per_direction * link.regenerators as f64;
        }
    }
    let router = 0.5 * dev.router_port_w * directed_cap;
    let transponder = 0.5 * dev.transponder_w * directed_cap;
    let regenerator = 0.5 * dev.regenerator_w * regen_cap;
    router + transponder + regenerator + fixed_node_power(topo, dev, node)
}
