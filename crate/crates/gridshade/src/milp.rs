//! The per-slot optimization problem.
//!
//! One instance covers one time slot: route every offered demand over
//! lightpaths (or block it), route every lightpath's wavelengths over fiber,
//! and balance each site's power draw against its renewable, grid, and
//! battery ceilings. Constraint families carry the numbering (2)-(9) used
//! throughout this crate's dumps and diagnostics:
//!
//! - (2) IP-layer flow conservation per demand and node, with blocking relief
//! - (3) virtual link capacity: carried flow fits the lightpath channels
//! - (4) optical-layer conservation: wavelengths realize every lightpath
//! - (5) per-link wavelength totals aggregate the per-lightpath routing
//! - (6) fiber capacity per ordered link
//! - (7) renewable ceiling, (8) battery ceiling, plus a grid ceiling
//! - (9) per-node power balance across the three sources

use crate::demand::TrafficMatrix;
use crate::energy::SourceCaps;
use crate::net::{amplifier_count, NodeId, Topology};
use crate::power::{fixed_node_power, DevicePowers, NetworkConfiguration};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::fmt;
use std::fmt::Write as _;
use thiserror::Error;

pub type VarId = usize;

/// Objective weights: `alpha` prices renewable watts, `beta` grid watts,
/// `gamma` battery watts, and `delta` penalizes each blocked demand.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Weights {
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
    pub delta: f64,
}

impl Weights {
    pub fn new(alpha: f64, beta: f64, gamma: f64, delta: f64) -> Self {
        Weights {
            alpha,
            beta,
            gamma,
            delta,
        }
    }

    /// Equal source prices; blocking dominated by the large penalty.
    pub fn blocking_min() -> Self {
        Weights::new(1.0, 1.0, 1.0, 1e6)
    }

    pub fn weso1() -> Self {
        Weights::new(1.0, 10.0, 100.0, 1e6)
    }

    pub fn weso2() -> Self {
        Weights::new(6.0, 8.0, 20.0, 1e6)
    }

    pub fn weso3() -> Self {
        Weights::new(5.0, 15.0, 25.0, 1e6)
    }

    pub fn validate(&self) -> Result<(), MilpError> {
        if self.alpha < 0.0 || self.beta < 0.0 || self.gamma < 0.0 || !(self.delta > 0.0) {
            return Err(MilpError::BadWeights(*self));
        }
        Ok(())
    }
}

/// One offered demand, Gb/s.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Demand {
    pub source: NodeId,
    pub dest: NodeId,
    pub volume_gbps: f64,
}

/// Per-node source ceilings in watts (the solver-side unit).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SourceCapsW {
    pub renewable_w: f64,
    pub grid_w: f64,
    pub battery_w: f64,
}

impl SourceCapsW {
    pub fn from_kw(caps: &SourceCaps) -> Self {
        SourceCapsW {
            renewable_w: caps.re_max_kw * 1000.0,
            grid_w: caps.br_max_kw * 1000.0,
            battery_w: caps.bt_max_kw * 1000.0,
        }
    }

    pub fn total_w(&self) -> f64 {
        self.renewable_w + self.grid_w + self.battery_w
    }
}

/// Identity of one decision variable.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum VarKey {
    /// bl: 1 if the demand is refused entirely.
    Blocked { demand: usize },
    /// C: lightpath count on the ordered virtual link.
    Lightpaths { from: NodeId, to: NodeId },
    /// W: wavelength channels on the ordered physical link.
    LinkWavelengths { from: NodeId, to: NodeId },
    /// W per lightpath: channels of virtual link (vfrom, vto) riding the
    /// ordered physical link (from, to).
    WavelengthRoute {
        vfrom: NodeId,
        vto: NodeId,
        from: NodeId,
        to: NodeId,
    },
    /// Flow of one demand on one ordered virtual link, Gb/s.
    Flow {
        demand: usize,
        from: NodeId,
        to: NodeId,
    },
    /// Renewable draw at a node, W.
    Renewable { node: NodeId },
    /// Grid draw at a node, W.
    Grid { node: NodeId },
    /// Battery draw at a node, W.
    Battery { node: NodeId },
}

impl fmt::Display for VarKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            VarKey::Blocked { demand } => write!(f, "bl_{demand}"),
            VarKey::Lightpaths { from, to } => write!(f, "C_{from}_{to}"),
            VarKey::LinkWavelengths { from, to } => write!(f, "W_{from}_{to}"),
            VarKey::WavelengthRoute {
                vfrom,
                vto,
                from,
                to,
            } => write!(f, "Wr_{vfrom}_{vto}__{from}_{to}"),
            VarKey::Flow { demand, from, to } => write!(f, "f_{demand}__{from}_{to}"),
            VarKey::Renewable { node } => write!(f, "re_{node}"),
            VarKey::Grid { node } => write!(f, "br_{node}"),
            VarKey::Battery { node } => write!(f, "bt_{node}"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VarDef {
    pub key: VarKey,
    pub lower: f64,
    pub upper: f64,
    pub integer: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Relation {
    Le,
    Ge,
    Eq,
}

impl fmt::Display for Relation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Relation::Le => "<=",
            Relation::Ge => ">=",
            Relation::Eq => "=",
        })
    }
}

/// Which constraint family a row belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ConstraintTag {
    IpFlowConservation { demand: usize, node: NodeId },
    VirtualLinkCapacity { from: NodeId, to: NodeId },
    OpticalFlowConservation { vfrom: NodeId, vto: NodeId, node: NodeId },
    LinkWavelengthTotal { from: NodeId, to: NodeId },
    FiberCapacity { from: NodeId, to: NodeId },
    RenewableCap { node: NodeId },
    BatteryCap { node: NodeId },
    GridCap { node: NodeId },
    PowerBalance { node: NodeId },
}

impl ConstraintTag {
    /// The family's number in this crate's constraint numbering; the grid
    /// ceiling is an unnumbered companion of (7) and (8).
    pub fn family_number(&self) -> Option<u32> {
        match self {
            ConstraintTag::IpFlowConservation { .. } => Some(2),
            ConstraintTag::VirtualLinkCapacity { .. } => Some(3),
            ConstraintTag::OpticalFlowConservation { .. } => Some(4),
            ConstraintTag::LinkWavelengthTotal { .. } => Some(5),
            ConstraintTag::FiberCapacity { .. } => Some(6),
            ConstraintTag::RenewableCap { .. } => Some(7),
            ConstraintTag::BatteryCap { .. } => Some(8),
            ConstraintTag::GridCap { .. } => None,
            ConstraintTag::PowerBalance { .. } => Some(9),
        }
    }
}

#[derive(Debug, Clone)]
pub struct Constraint {
    pub terms: Vec<(VarId, f64)>,
    pub relation: Relation,
    pub rhs: f64,
    pub tag: ConstraintTag,
}

/// One ordered direction of a physical link, with derived amplifier count.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OrderedLink {
    pub from: NodeId,
    pub to: NodeId,
    pub fibers: u32,
    pub regenerators: u32,
    pub amplifiers: u32,
    pub length_km: f64,
}

/// Structured inputs the instance was built from; solvers and extractors
/// read these instead of re-deriving them from the topology.
#[derive(Debug, Clone)]
pub struct InstanceMeta {
    pub node_count: usize,
    pub demands: Vec<Demand>,
    pub virtual_pairs: Vec<(NodeId, NodeId)>,
    pub ordered_links: Vec<OrderedLink>,
    pub caps_w: Vec<SourceCapsW>,
    pub weights: Weights,
    pub devices: DevicePowers,
    pub wavelength_capacity_gbps: f64,
    pub wavelengths_per_fiber: u32,
    pub fixed_power_w: Vec<f64>,
}

impl InstanceMeta {
    /// Neighbors of `node` in the physical graph, sorted.
    pub fn neighbors(&self, node: NodeId) -> Vec<NodeId> {
        let mut out: Vec<NodeId> = self
            .ordered_links
            .iter()
            .filter(|l| l.from == node)
            .map(|l| l.to)
            .collect();
        out.sort_unstable();
        out.dedup();
        out
    }

    pub fn ordered_link(&self, from: NodeId, to: NodeId) -> Option<&OrderedLink> {
        self.ordered_links
            .iter()
            .find(|l| l.from == from && l.to == to)
    }

    /// Channel ceiling of one ordered link direction.
    pub fn link_channel_cap(&self, from: NodeId, to: NodeId) -> u32 {
        self.ordered_link(from, to)
            .map(|l| l.fibers * self.wavelengths_per_fiber)
            .unwrap_or(0)
    }

    /// Watts charged to each endpoint per wavelength on the (from, to) link:
    /// the transponder half-share plus the regenerator half-share.
    pub fn endpoint_watts_per_wavelength(&self, from: NodeId, to: NodeId) -> f64 {
        let link = self
            .ordered_link(from, to)
            .expect("link present in instance meta");
        0.5 * (self.devices.transponder_w + self.devices.regenerator_w * link.regenerators as f64)
    }

    /// Node power in watts implied by integer lightpath and wavelength
    /// counts, matching the power model's node totals.
    pub fn node_power_w(
        &self,
        node: NodeId,
        lightpaths: &BTreeMap<(NodeId, NodeId), u32>,
        link_wavelengths: &BTreeMap<(NodeId, NodeId), u32>,
    ) -> f64 {
        let mut total = self.fixed_power_w[node];
        for ((i, j), c) in lightpaths {
            if *i == node || *j == node {
                total += 0.5 * self.devices.router_port_w * *c as f64;
            }
        }
        for ((m, n), w) in link_wavelengths {
            if *m == node || *n == node {
                total += self.endpoint_watts_per_wavelength(*m, *n) * *w as f64;
            }
        }
        total
    }
}

#[derive(Debug, Error)]
pub enum MilpError {
    #[error("demand references unknown node ({0}, {1})")]
    UnknownDemandNode(NodeId, NodeId),
    #[error("caps vector has {found} entries, topology has {expected} nodes")]
    CapsLengthMismatch { expected: usize, found: usize },
    #[error("weights must be non-negative with delta > 0, got {0:?}")]
    BadWeights(Weights),
    #[error("topology has no nodes")]
    EmptyTopology,
    #[error("solution has {found} values, instance has {expected} variables")]
    SolutionShape { expected: usize, found: usize },
}

/// A complete mixed-integer instance for one slot.
#[derive(Debug, Clone)]
pub struct MilpInstance {
    vars: Vec<VarDef>,
    index: BTreeMap<VarKey, VarId>,
    constraints: Vec<Constraint>,
    objective: Vec<f64>,
    pub meta: InstanceMeta,
}

/// Values for every instance variable plus the achieved objective.
#[derive(Debug, Clone, PartialEq)]
pub struct MilpSolution {
    pub values: Vec<f64>,
    pub objective_value: f64,
    /// False when a search stopped at its node or time limit with an
    /// incumbent that is feasible but not proven optimal.
    pub optimal: bool,
}

/// A single feasibility defect found by [`MilpInstance::check_feasibility`].
#[derive(Debug, Clone, PartialEq)]
pub enum Violation {
    Constraint {
        tag: ConstraintTag,
        lhs: f64,
        rhs: f64,
        relation: Relation,
    },
    Bound {
        var: VarKey,
        value: f64,
        lower: f64,
        upper: f64,
    },
    Integrality {
        var: VarKey,
        value: f64,
    },
    Shape {
        expected: usize,
        found: usize,
    },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::Constraint {
                tag,
                lhs,
                rhs,
                relation,
            } => {
                match tag.family_number() {
                    Some(n) => write!(f, "Eq. ({n}) violated")?,
                    None => write!(f, "grid cap violated")?,
                }
                write!(f, " [{tag:?}]: lhs {lhs} {relation} rhs {rhs}")
            }
            Violation::Bound {
                var,
                value,
                lower,
                upper,
            } => write!(f, "bound violated: {var} = {value} outside [{lower}, {upper}]"),
            Violation::Integrality { var, value } => {
                write!(f, "integrality violated: {var} = {value}")
            }
            Violation::Shape { expected, found } => {
                write!(f, "solution shape: {found} values for {expected} variables")
            }
        }
    }
}

/// Assembles the full instance for one slot.
pub fn build_instance(
    topo: &Topology,
    demands: &TrafficMatrix,
    caps: &[SourceCapsW],
    weights: &Weights,
    devices: &DevicePowers,
) -> Result<MilpInstance, MilpError> {
    let n = topo.node_count();
    if n == 0 {
        return Err(MilpError::EmptyTopology);
    }
    if caps.len() != n {
        return Err(MilpError::CapsLengthMismatch {
            expected: n,
            found: caps.len(),
        });
    }
    weights.validate()?;

    let demand_list: Vec<Demand> = demands
        .iter()
        .map(|((s, d), v)| Demand {
            source: *s,
            dest: *d,
            volume_gbps: *v,
        })
        .collect();
    for dm in &demand_list {
        if dm.source >= n || dm.dest >= n {
            return Err(MilpError::UnknownDemandNode(dm.source, dm.dest));
        }
    }

    let mut virtual_pairs = Vec::with_capacity(n * (n - 1));
    for i in 0..n {
        for j in 0..n {
            if i != j {
                virtual_pairs.push((i, j));
            }
        }
    }

    let mut ordered_links: Vec<OrderedLink> = topo
        .links
        .iter()
        .flat_map(|l| {
            let amps = amplifier_count(l.length_km, topo.span_km);
            [
                OrderedLink {
                    from: l.m,
                    to: l.n,
                    fibers: l.fibers,
                    regenerators: l.regenerators,
                    amplifiers: amps,
                    length_km: l.length_km,
                },
                OrderedLink {
                    from: l.n,
                    to: l.m,
                    fibers: l.fibers,
                    regenerators: l.regenerators,
                    amplifiers: amps,
                    length_km: l.length_km,
                },
            ]
        })
        .collect();
    ordered_links.sort_by_key(|l| (l.from, l.to));

    let fixed_power_w: Vec<f64> = (0..n).map(|i| fixed_node_power(topo, devices, i)).collect();

    let meta = InstanceMeta {
        node_count: n,
        demands: demand_list,
        virtual_pairs,
        ordered_links,
        caps_w: caps.to_vec(),
        weights: *weights,
        devices: devices.clone(),
        wavelength_capacity_gbps: topo.wavelength_capacity_gbps,
        wavelengths_per_fiber: topo.wavelengths_per_fiber,
        fixed_power_w,
    };

    let mut instance = MilpInstance {
        vars: Vec::new(),
        index: BTreeMap::new(),
        constraints: Vec::new(),
        objective: Vec::new(),
        meta,
    };
    instance.add_variables();
    instance.add_constraints();
    instance.set_objective();
    Ok(instance)
}

impl MilpInstance {
    fn push_var(&mut self, key: VarKey, lower: f64, upper: f64, integer: bool) {
        let id = self.vars.len();
        self.vars.push(VarDef {
            key,
            lower,
            upper,
            integer,
        });
        self.index.insert(key, id);
    }

    /// Outgoing channel capacity of a node across all incident fibers.
    fn node_out_channel_cap(&self, node: NodeId) -> u32 {
        self.meta
            .ordered_links
            .iter()
            .filter(|l| l.from == node)
            .map(|l| l.fibers * self.meta.wavelengths_per_fiber)
            .sum()
    }

    fn add_variables(&mut self) {
        let meta = &self.meta;
        let n = meta.node_count;
        let demand_count = meta.demands.len();
        let pairs = meta.virtual_pairs.clone();
        let links = meta.ordered_links.clone();
        let demands = meta.demands.clone();
        let caps = meta.caps_w.clone();
        let wpf = meta.wavelengths_per_fiber;

        for k in 0..demand_count {
            self.push_var(VarKey::Blocked { demand: k }, 0.0, 1.0, true);
        }
        for &(i, j) in &pairs {
            let ub = self.node_out_channel_cap(i) as f64;
            self.push_var(VarKey::Lightpaths { from: i, to: j }, 0.0, ub, true);
        }
        for l in &links {
            let ub = (l.fibers * wpf) as f64;
            self.push_var(
                VarKey::LinkWavelengths {
                    from: l.from,
                    to: l.to,
                },
                0.0,
                ub,
                true,
            );
        }
        for &(i, j) in &pairs {
            for l in &links {
                let ub = (l.fibers * wpf) as f64;
                self.push_var(
                    VarKey::WavelengthRoute {
                        vfrom: i,
                        vto: j,
                        from: l.from,
                        to: l.to,
                    },
                    0.0,
                    ub,
                    true,
                );
            }
        }
        for (k, dm) in demands.iter().enumerate() {
            for &(i, j) in &pairs {
                self.push_var(
                    VarKey::Flow {
                        demand: k,
                        from: i,
                        to: j,
                    },
                    0.0,
                    dm.volume_gbps,
                    false,
                );
            }
        }
        for node in 0..n {
            self.push_var(VarKey::Renewable { node }, 0.0, caps[node].renewable_w, false);
        }
        for node in 0..n {
            self.push_var(VarKey::Grid { node }, 0.0, caps[node].grid_w, false);
        }
        for node in 0..n {
            self.push_var(VarKey::Battery { node }, 0.0, caps[node].battery_w, false);
        }
    }

    fn add_constraints(&mut self) {
        let n = self.meta.node_count;
        let b = self.meta.wavelength_capacity_gbps;
        let demands = self.meta.demands.clone();
        let pairs = self.meta.virtual_pairs.clone();
        let links = self.meta.ordered_links.clone();
        let caps = self.meta.caps_w.clone();
        let fixed = self.meta.fixed_power_w.clone();
        let wpf = self.meta.wavelengths_per_fiber;

        // (2) per-demand flow conservation with blocking relief.
        for (k, dm) in demands.iter().enumerate() {
            for node in 0..n {
                let mut terms = Vec::new();
                for &(i, j) in &pairs {
                    if i == node {
                        terms.push((self.var_id(VarKey::Flow { demand: k, from: i, to: j }), 1.0));
                    } else if j == node {
                        terms.push((self.var_id(VarKey::Flow { demand: k, from: i, to: j }), -1.0));
                    }
                }
                let (bl_coeff, rhs) = if node == dm.source {
                    (dm.volume_gbps, dm.volume_gbps)
                } else if node == dm.dest {
                    (-dm.volume_gbps, -dm.volume_gbps)
                } else {
                    (0.0, 0.0)
                };
                if bl_coeff != 0.0 {
                    terms.push((self.var_id(VarKey::Blocked { demand: k }), bl_coeff));
                }
                self.constraints.push(Constraint {
                    terms,
                    relation: Relation::Eq,
                    rhs,
                    tag: ConstraintTag::IpFlowConservation { demand: k, node },
                });
            }
        }

        // (3) flow on a virtual link fits its channels.
        for &(i, j) in &pairs {
            let mut terms = Vec::new();
            for k in 0..demands.len() {
                terms.push((self.var_id(VarKey::Flow { demand: k, from: i, to: j }), 1.0));
            }
            terms.push((self.var_id(VarKey::Lightpaths { from: i, to: j }), -b));
            self.constraints.push(Constraint {
                terms,
                relation: Relation::Le,
                rhs: 0.0,
                tag: ConstraintTag::VirtualLinkCapacity { from: i, to: j },
            });
        }

        // (4) wavelengths of each lightpath telescope from source to sink.
        for &(i, j) in &pairs {
            for node in 0..n {
                let mut terms = Vec::new();
                for l in &links {
                    if l.from == node {
                        terms.push((
                            self.var_id(VarKey::WavelengthRoute {
                                vfrom: i,
                                vto: j,
                                from: l.from,
                                to: l.to,
                            }),
                            1.0,
                        ));
                    } else if l.to == node {
                        terms.push((
                            self.var_id(VarKey::WavelengthRoute {
                                vfrom: i,
                                vto: j,
                                from: l.from,
                                to: l.to,
                            }),
                            -1.0,
                        ));
                    }
                }
                let c_coeff = if node == i {
                    -1.0
                } else if node == j {
                    1.0
                } else {
                    0.0
                };
                if c_coeff != 0.0 {
                    terms.push((self.var_id(VarKey::Lightpaths { from: i, to: j }), c_coeff));
                }
                self.constraints.push(Constraint {
                    terms,
                    relation: Relation::Eq,
                    rhs: 0.0,
                    tag: ConstraintTag::OpticalFlowConservation {
                        vfrom: i,
                        vto: j,
                        node,
                    },
                });
            }
        }

        // (5) per-link totals.
        for l in &links {
            let mut terms = Vec::new();
            for &(i, j) in &pairs {
                terms.push((
                    self.var_id(VarKey::WavelengthRoute {
                        vfrom: i,
                        vto: j,
                        from: l.from,
                        to: l.to,
                    }),
                    1.0,
                ));
            }
            terms.push((
                self.var_id(VarKey::LinkWavelengths {
                    from: l.from,
                    to: l.to,
                }),
                -1.0,
            ));
            self.constraints.push(Constraint {
                terms,
                relation: Relation::Eq,
                rhs: 0.0,
                tag: ConstraintTag::LinkWavelengthTotal {
                    from: l.from,
                    to: l.to,
                },
            });
        }

        // (6) fiber capacity.
        for l in &links {
            self.constraints.push(Constraint {
                terms: vec![(
                    self.var_id(VarKey::LinkWavelengths {
                        from: l.from,
                        to: l.to,
                    }),
                    1.0,
                )],
                relation: Relation::Le,
                rhs: (l.fibers * wpf) as f64,
                tag: ConstraintTag::FiberCapacity {
                    from: l.from,
                    to: l.to,
                },
            });
        }

        // (7), (8) and the grid ceiling.
        for node in 0..n {
            self.constraints.push(Constraint {
                terms: vec![(self.var_id(VarKey::Renewable { node }), 1.0)],
                relation: Relation::Le,
                rhs: caps[node].renewable_w,
                tag: ConstraintTag::RenewableCap { node },
            });
        }
        for node in 0..n {
            self.constraints.push(Constraint {
                terms: vec![(self.var_id(VarKey::Battery { node }), 1.0)],
                relation: Relation::Le,
                rhs: caps[node].battery_w,
                tag: ConstraintTag::BatteryCap { node },
            });
        }
        for node in 0..n {
            self.constraints.push(Constraint {
                terms: vec![(self.var_id(VarKey::Grid { node }), 1.0)],
                relation: Relation::Le,
                rhs: caps[node].grid_w,
                tag: ConstraintTag::GridCap { node },
            });
        }

        // (9) power balance: equipment draw equals sourced watts.
        for node in 0..n {
            let mut terms = Vec::new();
            let half_router = 0.5 * self.meta.devices.router_port_w;
            for &(i, j) in &pairs {
                if i == node || j == node {
                    terms.push((self.var_id(VarKey::Lightpaths { from: i, to: j }), half_router));
                }
            }
            for l in &links {
                if l.from == node || l.to == node {
                    let coeff = self.meta.endpoint_watts_per_wavelength(l.from, l.to);
                    terms.push((
                        self.var_id(VarKey::LinkWavelengths {
                            from: l.from,
                            to: l.to,
                        }),
                        coeff,
                    ));
                }
            }
            terms.push((self.var_id(VarKey::Renewable { node }), -1.0));
            terms.push((self.var_id(VarKey::Grid { node }), -1.0));
            terms.push((self.var_id(VarKey::Battery { node }), -1.0));
            self.constraints.push(Constraint {
                terms,
                relation: Relation::Eq,
                rhs: -fixed[node],
                tag: ConstraintTag::PowerBalance { node },
            });
        }
    }

    fn set_objective(&mut self) {
        let w = self.meta.weights;
        self.objective = vec![0.0; self.vars.len()];
        for (id, var) in self.vars.iter().enumerate() {
            self.objective[id] = match var.key {
                VarKey::Blocked { .. } => w.delta,
                VarKey::Renewable { .. } => w.alpha,
                VarKey::Grid { .. } => w.beta,
                VarKey::Battery { .. } => w.gamma,
                _ => 0.0,
            };
        }
    }

    pub fn var_count(&self) -> usize {
        self.vars.len()
    }

    pub fn vars(&self) -> &[VarDef] {
        &self.vars
    }

    pub fn constraints(&self) -> &[Constraint] {
        &self.constraints
    }

    /// Dense objective coefficients, one per variable.
    pub fn objective_coeffs(&self) -> &[f64] {
        &self.objective
    }

    pub fn var_id(&self, key: VarKey) -> VarId {
        self.index[&key]
    }

    pub fn try_var_id(&self, key: VarKey) -> Option<VarId> {
        self.index.get(&key).copied()
    }

    pub fn value(&self, solution: &MilpSolution, key: VarKey) -> f64 {
        solution.values[self.var_id(key)]
    }

    /// Recomputes the objective under arbitrary weights.
    pub fn objective_value(&self, solution: &MilpSolution, weights: &Weights) -> Result<f64, MilpError> {
        if solution.values.len() != self.vars.len() {
            return Err(MilpError::SolutionShape {
                expected: self.vars.len(),
                found: solution.values.len(),
            });
        }
        let mut total = 0.0;
        for (var, value) in self.vars.iter().zip(&solution.values) {
            total += value
                * match var.key {
                    VarKey::Blocked { .. } => weights.delta,
                    VarKey::Renewable { .. } => weights.alpha,
                    VarKey::Grid { .. } => weights.beta,
                    VarKey::Battery { .. } => weights.gamma,
                    _ => 0.0,
                };
        }
        Ok(total)
    }

    /// Audits every constraint, bound, and integrality requirement.
    pub fn check_feasibility(&self, solution: &MilpSolution, tol: f64) -> Vec<Violation> {
        let mut out = Vec::new();
        if solution.values.len() != self.vars.len() {
            out.push(Violation::Shape {
                expected: self.vars.len(),
                found: solution.values.len(),
            });
            return out;
        }
        for (var, value) in self.vars.iter().zip(&solution.values) {
            if *value < var.lower - tol || *value > var.upper + tol {
                out.push(Violation::Bound {
                    var: var.key,
                    value: *value,
                    lower: var.lower,
                    upper: var.upper,
                });
            }
            if var.integer && (value - value.round()).abs() > tol {
                out.push(Violation::Integrality {
                    var: var.key,
                    value: *value,
                });
            }
        }
        for c in &self.constraints {
            let lhs: f64 = c.terms.iter().map(|(id, coeff)| coeff * solution.values[*id]).sum();
            let violated = match c.relation {
                Relation::Le => lhs > c.rhs + tol,
                Relation::Ge => lhs < c.rhs - tol,
                Relation::Eq => (lhs - c.rhs).abs() > tol,
            };
            if violated {
                out.push(Violation::Constraint {
                    tag: c.tag,
                    lhs,
                    rhs: c.rhs,
                    relation: c.relation,
                });
            }
        }
        out
    }

    /// Rounds the integer layer of a solution into a network configuration.
    pub fn to_network_configuration(&self, solution: &MilpSolution) -> NetworkConfiguration {
        let mut cfg = NetworkConfiguration::default();
        for (var, value) in self.vars.iter().zip(&solution.values) {
            let count = value.round() as u32;
            if count == 0 {
                continue;
            }
            match var.key {
                VarKey::Lightpaths { from, to } => {
                    cfg.lightpaths.insert((from, to), count);
                }
                VarKey::LinkWavelengths { from, to } => {
                    cfg.wavelengths_on_link.insert((from, to), count);
                }
                VarKey::WavelengthRoute {
                    vfrom,
                    vto,
                    from,
                    to,
                } => {
                    cfg.wavelength_routing.insert(((vfrom, vto), (from, to)), count);
                }
                _ => {}
            }
        }
        cfg
    }

    /// Demands refused by the solution.
    pub fn blocked_demands(&self, solution: &MilpSolution) -> Vec<usize> {
        (0..self.meta.demands.len())
            .filter(|k| self.value(solution, VarKey::Blocked { demand: *k }) > 0.5)
            .collect()
    }

    /// Plain-text rendering of the whole instance in an LP-style layout.
    pub fn render_lp(&self) -> String {
        let mut out = String::new();
        out.push_str("minimize\n ");
        let mut first = true;
        for (id, coeff) in self.objective.iter().enumerate() {
            if *coeff == 0.0 {
                continue;
            }
            if !first {
                out.push_str(" + ");
            }
            let _ = write!(out, "{} {}", coeff, self.vars[id].key);
            first = false;
        }
        out.push_str("\nsubject to\n");
        for (row, c) in self.constraints.iter().enumerate() {
            let family = match c.tag.family_number() {
                Some(n) => format!("eq{n}"),
                None => "grid".to_string(),
            };
            let _ = write!(out, " r{row} [{family}]:");
            for (id, coeff) in &c.terms {
                let _ = write!(out, " {:+} {}", coeff, self.vars[*id].key);
            }
            let _ = writeln!(out, " {} {}", c.relation, c.rhs);
        }
        out.push_str("bounds\n");
        for var in &self.vars {
            let _ = writeln!(out, " {} <= {} <= {}", var.lower, var.key, var.upper);
        }
        out.push_str("integers\n");
        for var in &self.vars {
            if var.integer {
                let _ = write!(out, " {}", var.key);
            }
        }
        out.push('\n');
        out
    }
}
