//! Traffic model: a gravity demand matrix scaled by a diurnal profile.

use crate::net::NodeId;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum DemandError {
    #[error("gravity model needs at least 2 nodes, got {0}")]
    TooFewNodes(usize),
    #[error("gravity model needs a positive population somewhere")]
    AllZeroPopulations,
    #[error("negative population for node {0}")]
    NegativePopulation(NodeId),
    #[error("slot index {index} out of range, profile has {slots} slots")]
    SlotOutOfRange { index: usize, slots: usize },
    #[error("profile must cover 24 h: {slots} slots x {slot_hours} h = {covered} h")]
    BadProfileLength {
        slots: usize,
        slot_hours: f64,
        covered: f64,
    },
    #[error("profile values must be non-negative with a positive maximum")]
    BadProfileValues,
}

/// Per-slot traffic multipliers across one day.
///
/// Values are relative; scaling divides by the profile maximum so the busiest
/// slot carries the configured busy-hour volume exactly.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiurnalProfile {
    pub slot_hours: f64,
    pub values: Vec<f64>,
}

impl DiurnalProfile {
    pub fn new(slot_hours: f64, values: Vec<f64>) -> Result<Self, DemandError> {
        let covered = slot_hours * values.len() as f64;
        if slot_hours <= 0.0 || (covered - 24.0).abs() > 1e-9 {
            return Err(DemandError::BadProfileLength {
                slots: values.len(),
                slot_hours,
                covered,
            });
        }
        let max = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        if !(max > 0.0) || values.iter().any(|v| *v < 0.0) {
            return Err(DemandError::BadProfileValues);
        }
        Ok(DiurnalProfile { slot_hours, values })
    }

    /// Synthetic default: quiet early morning, busy evening peak in the
    /// 22:00-24:00 slot.
    pub fn default_two_hour() -> Self {
        DiurnalProfile::new(
            2.0,
            vec![
                0.55, 0.45, 0.35, 0.40, 0.50, 0.60, 0.70, 0.80, 0.85, 0.90, 0.95, 1.00,
            ],
        )
        .expect("default profile is well-formed")
    }

    pub fn slot_count(&self) -> usize {
        self.values.len()
    }

    pub fn slot_start_hour(&self, slot: usize) -> f64 {
        slot as f64 * self.slot_hours
    }

    /// Multiplier applied to the busy-hour matrix in `slot`.
    pub fn scale(&self, slot: usize) -> Result<f64, DemandError> {
        if slot >= self.values.len() {
            return Err(DemandError::SlotOutOfRange {
                index: slot,
                slots: self.values.len(),
            });
        }
        let max = self.values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        Ok(self.values[slot] / max)
    }
}

/// Offered volume per ordered node pair, Gb/s.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct TrafficMatrix {
    demands: BTreeMap<(NodeId, NodeId), f64>,
}

impl TrafficMatrix {
    pub fn from_pairs(pairs: impl IntoIterator<Item = ((NodeId, NodeId), f64)>) -> Self {
        TrafficMatrix {
            demands: pairs.into_iter().filter(|((s, d), _)| s != d).collect(),
        }
    }

    pub fn get(&self, s: NodeId, d: NodeId) -> f64 {
        self.demands.get(&(s, d)).copied().unwrap_or(0.0)
    }

    /// Ordered iteration over (source, dest) -> volume.
    pub fn iter(&self) -> impl Iterator<Item = (&(NodeId, NodeId), &f64)> {
        self.demands.iter()
    }

    pub fn len(&self) -> usize {
        self.demands.len()
    }

    pub fn is_empty(&self) -> bool {
        self.demands.is_empty()
    }

    /// Number of pairs with strictly positive volume.
    pub fn positive_count(&self) -> usize {
        self.demands.values().filter(|v| **v > 0.0).count()
    }
}

/// Spreads `total_gbps` over all ordered pairs in proportion to the product
/// of endpoint populations.
pub fn gravity_matrix(populations: &[f64], total_gbps: f64) -> Result<TrafficMatrix, DemandError> {
    if populations.len() < 2 {
        return Err(DemandError::TooFewNodes(populations.len()));
    }
    for (i, p) in populations.iter().enumerate() {
        if *p < 0.0 {
            return Err(DemandError::NegativePopulation(i));
        }
    }
    let mut denom = 0.0;
    for (s, ps) in populations.iter().enumerate() {
        for (d, pd) in populations.iter().enumerate() {
            if s != d {
                denom += ps * pd;
            }
        }
    }
    if denom <= 0.0 {
        return Err(DemandError::AllZeroPopulations);
    }
    let mut demands = BTreeMap::new();
    for (s, ps) in populations.iter().enumerate() {
        for (d, pd) in populations.iter().enumerate() {
            if s != d {
                demands.insert((s, d), total_gbps * ps * pd / denom);
            }
        }
    }
    Ok(TrafficMatrix { demands })
}

/// The busy-hour matrix scaled down to one diurnal slot.
pub fn demand_at_slot(
    base: &TrafficMatrix,
    profile: &DiurnalProfile,
    slot: usize,
) -> Result<TrafficMatrix, DemandError> {
    let scale = profile.scale(slot)?;
    Ok(TrafficMatrix {
        demands: base
            .demands
            .iter()
            .map(|(k, v)| (*k, v * scale))
            .collect(),
    })
}

/// Total offered volume across all pairs, Gb/s.
pub fn total_offered(matrix: &TrafficMatrix) -> f64 {
    matrix.demands.values().sum()
}
