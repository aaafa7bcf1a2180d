//! Physical network model: nodes, fiber links, and the topology container.

use serde::{Deserialize, Serialize};
use std::collections::BTreeSet;
use std::fmt;
use thiserror::Error;

pub type NodeId = usize;

fn default_sunrise() -> f64 {
    6.0
}

fn default_sunset() -> f64 {
    18.0
}

fn default_fibers() -> u32 {
    1
}

/// A core-network site: one IP router co-located with an optical switch.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Node {
    pub id: NodeId,
    pub name: String,
    /// Relative weight used by the gravity traffic model.
    pub population: f64,
    #[serde(default)]
    pub has_datacenter: bool,
    /// Battery bank capacity in kWh; zero means no battery installed.
    #[serde(default)]
    pub battery_kwh: f64,
    /// Peak output of the site's solar array in kW; zero means no array.
    #[serde(default)]
    pub solar_peak_kw: f64,
    #[serde(default = "default_sunrise")]
    pub sunrise: f64,
    #[serde(default = "default_sunset")]
    pub sunset: f64,
}

/// An undirected fiber link between two sites.
///
/// The optimizer routes wavelengths directionally; a single `Link` carries
/// both ordered directions (m, n) and (n, m).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Link {
    pub m: NodeId,
    pub n: NodeId,
    pub length_km: f64,
    #[serde(default = "default_fibers")]
    pub fibers: u32,
    /// Signal regenerators installed per wavelength on this link.
    #[serde(default)]
    pub regenerators: u32,
}

/// A parsed physical topology plus the WDM layer parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Topology {
    pub span_km: f64,
    pub wavelengths_per_fiber: u32,
    pub wavelength_capacity_gbps: f64,
    pub nodes: Vec<Node>,
    pub links: Vec<Link>,
}

#[derive(Debug, Error)]
pub enum TopologyError {
    #[error("topology parse error: {0}")]
    Parse(#[from] serde_json::Error),
    #[error("duplicate node id {0}")]
    DuplicateNodeId(NodeId),
    #[error("node ids must be 0..{expected}, found id {found}")]
    NonContiguousIds { expected: usize, found: NodeId },
    #[error("link ({m}, {n}) references unknown node")]
    UnknownNodeRef { m: NodeId, n: NodeId },
    #[error("link ({m}, {n}) is missing length_km")]
    MissingLength { m: NodeId, n: NodeId },
    #[error("link ({m}, {n}) is a self-loop")]
    SelfLoop { m: NodeId, n: NodeId },
    #[error("span_km must be positive, got {0}")]
    NonPositiveSpan(f64),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

/// Structural problems reported by [`validate_topology`].
#[derive(Debug, Clone, PartialEq)]
pub enum TopologyViolation {
    Disconnected(NodeId),
    DuplicateLink(NodeId, NodeId),
    NonPositiveLength(NodeId, NodeId),
    NegativePopulation(NodeId),
}

impl fmt::Display for TopologyViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TopologyViolation::Disconnected(n) => write!(f, "disconnected: node {n}"),
            TopologyViolation::DuplicateLink(m, n) => {
                write!(f, "duplicate undirected link ({m}, {n})")
            }
            TopologyViolation::NonPositiveLength(m, n) => {
                write!(f, "non-positive length on link ({m}, {n})")
            }
            TopologyViolation::NegativePopulation(n) => {
                write!(f, "negative population on node {n}")
            }
        }
    }
}

#[derive(Deserialize)]
struct RawLink {
    m: NodeId,
    n: NodeId,
    length_km: Option<f64>,
    #[serde(default = "default_fibers")]
    fibers: u32,
    #[serde(default)]
    regenerators: u32,
}

#[derive(Deserialize)]
struct RawTopology {
    span_km: f64,
    wavelengths_per_fiber: u32,
    wavelength_capacity_gbps: f64,
    nodes: Vec<Node>,
    links: Vec<RawLink>,
}

/// Parses a topology document and rejects schema-level problems.
///
/// Structural checks that are useful as a report rather than a hard failure
/// (connectivity, duplicate links) live in [`validate_topology`].
pub fn load_topology(text: &str) -> Result<Topology, TopologyError> {
    let raw: RawTopology = serde_json::from_str(text)?;
    if raw.span_km <= 0.0 {
        return Err(TopologyError::NonPositiveSpan(raw.span_km));
    }
    let n = raw.nodes.len();
    let mut seen = BTreeSet::new();
    for node in &raw.nodes {
        if !seen.insert(node.id) {
            return Err(TopologyError::DuplicateNodeId(node.id));
        }
        if node.id >= n {
            return Err(TopologyError::NonContiguousIds {
                expected: n,
                found: node.id,
            });
        }
    }
    let mut nodes = raw.nodes;
    nodes.sort_by_key(|node| node.id);
    let mut links = Vec::with_capacity(raw.links.len());
    for link in raw.links {
        if link.m >= n || link.n >= n {
            return Err(TopologyError::UnknownNodeRef {
                m: link.m,
                n: link.n,
            });
        }
        if link.m == link.n {
            return Err(TopologyError::SelfLoop {
                m: link.m,
                n: link.n,
            });
        }
        let length_km = link.length_km.ok_or(TopologyError::MissingLength {
            m: link.m,
            n: link.n,
        })?;
        links.push(Link {
            m: link.m,
            n: link.n,
            length_km,
            fibers: link.fibers,
            regenerators: link.regenerators,
        });
    }
    Ok(Topology {
        span_km: raw.span_km,
        wavelengths_per_fiber: raw.wavelengths_per_fiber,
        wavelength_capacity_gbps: raw.wavelength_capacity_gbps,
        nodes,
        links,
    })
}

/// Reads and parses a topology file.
pub fn load_topology_file(path: &std::path::Path) -> Result<Topology, TopologyError> {
    let text = std::fs::read_to_string(path)?;
    load_topology(&text)
}

/// Inline amplifiers on a link: one per span boundary inside the link plus
/// one at each end, never fewer than the two terminal units.
pub fn amplifier_count(length_km: f64, span_km: f64) -> u32 {
    let interior = (length_km / span_km - 1.0).ceil().max(0.0);
    interior as u32 + 2
}

/// Checks structural soundness and returns every violation found.
pub fn validate_topology(topo: &Topology) -> Vec<TopologyViolation> {
    let mut violations = Vec::new();
    let n = topo.nodes.len();

    for node in &topo.nodes {
        if node.population < 0.0 {
            violations.push(TopologyViolation::NegativePopulation(node.id));
        }
    }

    let mut seen = BTreeSet::new();
    for link in &topo.links {
        let key = (link.m.min(link.n), link.m.max(link.n));
        if !seen.insert(key) {
            violations.push(TopologyViolation::DuplicateLink(link.m, link.n));
        }
        if link.length_km <= 0.0 {
            violations.push(TopologyViolation::NonPositiveLength(link.m, link.n));
        }
    }

    if n > 0 {
        let mut reached = vec![false; n];
        let mut stack = vec![0];
        reached[0] = true;
        while let Some(u) = stack.pop() {
            for link in &topo.links {
                let other = if link.m == u {
                    link.n
                } else if link.n == u {
                    link.m
                } else {
                    continue;
                };
                if !reached[other] {
                    reached[other] = true;
                    stack.push(other);
                }
            }
        }
        for (id, ok) in reached.iter().enumerate() {
            if !ok {
                violations.push(TopologyViolation::Disconnected(id));
            }
        }
    }

    violations
}

impl Topology {
    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    /// Neighbor node ids of `i`, sorted and deduplicated.
    pub fn neighbors(&self, i: NodeId) -> Vec<NodeId> {
        let mut out: Vec<NodeId> = self
            .links
            .iter()
            .filter_map(|l| {
                if l.m == i {
                    Some(l.n)
                } else if l.n == i {
                    Some(l.m)
                } else {
                    None
                }
            })
            .collect();
        out.sort_unstable();
        out.dedup();
        out
    }

    /// The undirected link joining `m` and `n`, if one exists.
    pub fn link_between(&self, m: NodeId, n: NodeId) -> Option<&Link> {
        self.links
            .iter()
            .find(|l| (l.m == m && l.n == n) || (l.m == n && l.n == m))
    }

    /// Ordered physical link pairs (m, n) and (n, m) for every link, sorted.
    pub fn ordered_link_pairs(&self) -> Vec<(NodeId, NodeId)> {
        let mut pairs = Vec::with_capacity(self.links.len() * 2);
        for l in &self.links {
            pairs.push((l.m, l.n));
            pairs.push((l.n, l.m));
        }
        pairs.sort_unstable();
        pairs
    }

    /// Amplifier count for the link joining `m` and `n`.
    pub fn amplifiers_between(&self, m: NodeId, n: NodeId) -> Option<u32> {
        self.link_between(m, n)
            .map(|l| amplifier_count(l.length_km, self.span_km))
    }

    /// Maximum wavelength channels a single ordered direction of the (m, n)
    /// link can carry.
    pub fn wavelength_capacity(&self, m: NodeId, n: NodeId) -> u32 {
        self.link_between(m, n)
            .map(|l| l.fibers * self.wavelengths_per_fiber)
            .unwrap_or(0)
    }

    pub fn to_json_string(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("topology serializes");
        s.push('\n');
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn two_node_doc() -> &'static str {
        r#"{
            "span_km": 80.0,
            "wavelengths_per_fiber": 32,
            "wavelength_capacity_gbps": 40.0,
            "nodes": [
                {"id": 0, "name": "a", "population": 1.0},
                {"id": 1, "name": "b", "population": 2.0, "has_datacenter": true}
            ],
            "links": [
                {"m": 0, "n": 1, "length_km": 160.0}
            ]
        }"#
    }

    #[test]
    fn parses_two_node_document() {
        let topo = load_topology(two_node_doc()).unwrap();
        assert_eq!(topo.node_count(), 2);
        assert_eq!(topo.links.len(), 1);
        assert_eq!(topo.links[0].fibers, 1);
        assert_eq!(topo.links[0].regenerators, 0);
        assert_eq!(topo.amplifiers_between(0, 1), Some(3));
        assert!(topo.nodes[1].has_datacenter);
        assert_eq!(topo.nodes[0].sunrise, 6.0);
        assert_eq!(topo.nodes[0].sunset, 18.0);
    }

    #[test]
    fn amplifier_counts_match_span_arithmetic() {
        assert_eq!(amplifier_count(160.0, 80.0), 3);
        assert_eq!(amplifier_count(80.0, 80.0), 2);
        assert_eq!(amplifier_count(200.0, 80.0), 4);
        assert_eq!(amplifier_count(40.0, 80.0), 2);
        assert_eq!(amplifier_count(240.0, 80.0), 4);
    }

    #[test]
    fn amplifier_count_monotone_in_length() {
        let mut prev = 0;
        for tenth_km in 1..400 {
            let a = amplifier_count(tenth_km as f64 * 10.0, 80.0);
            assert!(a >= prev, "length {} km", tenth_km * 10);
            prev = a;
        }
    }

    #[test]
    fn missing_length_names_the_link() {
        let doc = r#"{
            "span_km": 80.0,
            "wavelengths_per_fiber": 32,
            "wavelength_capacity_gbps": 40.0,
            "nodes": [
                {"id": 0, "name": "a", "population": 1.0},
                {"id": 1, "name": "b", "population": 1.0}
            ],
            "links": [{"m": 0, "n": 1}]
        }"#;
        let err = load_topology(doc).unwrap_err();
        assert!(err.to_string().contains("(0, 1)"), "{err}");
        assert!(err.to_string().contains("length_km"), "{err}");
    }

    #[test]
    fn rejects_unknown_node_reference() {
        let doc = two_node_doc().replace(r#""n": 1, "length_km": 160.0"#, r#""n": 7, "length_km": 160.0"#);
        assert!(matches!(
            load_topology(&doc),
            Err(TopologyError::UnknownNodeRef { m: 0, n: 7 })
        ));
    }

    #[test]
    fn rejects_duplicate_node_ids() {
        let doc = two_node_doc().replace(r#""id": 1"#, r#""id": 0"#);
        assert!(matches!(
            load_topology(&doc),
            Err(TopologyError::DuplicateNodeId(0))
        ));
    }

    #[test]
    fn validation_flags_duplicate_links_in_either_orientation() {
        let mut topo = load_topology(two_node_doc()).unwrap();
        topo.links.push(Link {
            m: 1,
            n: 0,
            length_km: 120.0,
            fibers: 1,
            regenerators: 0,
        });
        let violations = validate_topology(&topo);
        assert!(violations
            .iter()
            .any(|v| matches!(v, TopologyViolation::DuplicateLink(1, 0))));
    }

    #[test]
    fn validation_reports_disconnected_nodes() {
        let doc = r#"{
            "span_km": 80.0,
            "wavelengths_per_fiber": 32,
            "wavelength_capacity_gbps": 40.0,
            "nodes": [
                {"id": 0, "name": "a", "population": 1.0},
                {"id": 1, "name": "b", "population": 1.0},
                {"id": 2, "name": "c", "population": 1.0},
                {"id": 3, "name": "d", "population": 1.0}
            ],
            "links": [
                {"m": 0, "n": 1, "length_km": 100.0},
                {"m": 1, "n": 2, "length_km": 100.0}
            ]
        }"#;
        let topo = load_topology(doc).unwrap();
        let violations = validate_topology(&topo);
        assert_eq!(violations.len(), 1);
        assert_eq!(violations[0].to_string(), "disconnected: node 3");
    }

    #[test]
    fn round_trips_through_serialization() {
        let topo = load_topology(two_node_doc()).unwrap();
        let again = load_topology(&topo.to_json_string()).unwrap();
        assert_eq!(topo, again);
    }

    #[test]
    fn bundled_sample_loads_and_validates() {
        let path = concat!(env!("CARGO_MANIFEST_DIR"), "/data/italy21.json");
        let topo = load_topology_file(std::path::Path::new(path)).unwrap();
        assert_eq!(topo.node_count(), 21);
        assert_eq!(topo.links.len(), 36);
        assert!(topo.nodes[19].has_datacenter);
        assert_eq!(topo.nodes[19].name, "Milano");
        assert!(validate_topology(&topo).is_empty());
        assert_eq!(topo.span_km, 80.0);
        assert_eq!(topo.wavelengths_per_fiber, 32);
        assert_eq!(topo.wavelength_capacity_gbps, 40.0);
    }
}
