//! Branch and bound over the continuous relaxation.
//!
//! Best-bound search: nodes carry the bound proved by their parent's
//! relaxation, the node with the smallest bound is expanded first, and the
//! search stops as soon as that bound reaches the incumbent. Integral
//! relaxations are polished by fixing every integer variable to its rounded
//! value and re-solving the continuous layer, so stored incumbents satisfy
//! the balance equalities to solver precision.

use crate::milp::{MilpInstance, MilpSolution};
use crate::solver::lp::{self, LpProblem, LpStatus};
use std::cmp::Ordering;
use std::collections::BinaryHeap;
use thiserror::Error;

#[derive(Debug, Clone)]
pub struct BnbConfig {
    pub node_limit: usize,
    pub int_tol: f64,
    pub gap_tol: f64,
    pub max_vars: usize,
    pub max_rows: usize,
}

impl Default for BnbConfig {
    fn default() -> Self {
        BnbConfig {
            node_limit: 200_000,
            int_tol: 1e-6,
            gap_tol: 0.0,
            max_vars: 2_000,
            max_rows: 800,
        }
    }
}

impl BnbConfig {
    /// Lifts the size guard for callers that insist on exact solves.
    pub fn unguarded() -> Self {
        BnbConfig {
            max_vars: usize::MAX,
            max_rows: usize::MAX,
            ..BnbConfig::default()
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct SolveStats {
    pub nodes_explored: usize,
    pub lp_solves: usize,
}

#[derive(Debug, Error)]
pub enum SolveError {
    #[error("instance is infeasible")]
    Infeasible,
    #[error("no integer solution within {explored} search nodes")]
    NodeLimit { explored: usize },
    #[error("exact solve rejected: {vars} variables and {rows} rows exceed the {max_vars}x{max_rows} guard")]
    TooLarge {
        vars: usize,
        rows: usize,
        max_vars: usize,
        max_rows: usize,
    },
    #[error("relaxation failed: {0}")]
    Numeric(String),
}

struct Node {
    bound: f64,
    seq: usize,
    /// (column, lower, upper) tightenings accumulated from the root.
    changes: Vec<(usize, f64, f64)>,
}

impl PartialEq for Node {
    fn eq(&self, other: &Self) -> bool {
        self.bound == other.bound && self.seq == other.seq
    }
}
impl Eq for Node {}
impl PartialOrd for Node {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Node {
    fn cmp(&self, other: &Self) -> Ordering {
        // reversed so the max-heap pops the smallest bound, oldest first
        other
            .bound
            .total_cmp(&self.bound)
            .then_with(|| other.seq.cmp(&self.seq))
    }
}

pub fn solve_exact(
    instance: &MilpInstance,
    config: &BnbConfig,
) -> Result<(MilpSolution, SolveStats), SolveError> {
    solve_exact_warm(instance, config, None)
}

/// Exact solve seeded with an optional feasible starting solution.
pub fn solve_exact_warm(
    instance: &MilpInstance,
    config: &BnbConfig,
    warm: Option<&MilpSolution>,
) -> Result<(MilpSolution, SolveStats), SolveError> {
    let vars = instance.var_count();
    let rows = instance.constraints().len();
    if vars > config.max_vars || rows > config.max_rows {
        return Err(SolveError::TooLarge {
            vars,
            rows,
            max_vars: config.max_vars,
            max_rows: config.max_rows,
        });
    }

    let base = lp::problem_from_instance(instance);
    let int_cols: Vec<usize> = instance
        .vars()
        .iter()
        .enumerate()
        .filter(|(_, v)| v.integer)
        .map(|(i, _)| i)
        .collect();

    let mut stats = SolveStats::default();
    let mut incumbent: Option<(Vec<f64>, f64)> = None;
    if let Some(w) = warm {
        if instance.check_feasibility(w, config.int_tol).is_empty() {
            let obj = instance
                .objective_value(w, &instance.meta.weights)
                .expect("warm solution audited");
            incumbent = Some((w.values.clone(), obj));
        }
    }

    let mut heap = BinaryHeap::new();
    heap.push(Node {
        bound: f64::NEG_INFINITY,
        seq: 0,
        changes: Vec::new(),
    });
    let mut next_seq = 1usize;
    let mut scratch = base.clone();
    let mut exhausted = true;

    while let Some(node) = heap.pop() {
        if let Some((_, inc)) = &incumbent {
            if node.bound >= inc - config.gap_tol {
                break;
            }
        }
        if stats.nodes_explored >= config.node_limit {
            exhausted = false;
            break;
        }
        stats.nodes_explored += 1;

        scratch.lower.copy_from_slice(&base.lower);
        scratch.upper.copy_from_slice(&base.upper);
        for (col, lo, up) in &node.changes {
            scratch.lower[*col] = *lo;
            scratch.upper[*col] = *up;
        }
        let relax = lp::solve(&scratch);
        stats.lp_solves += 1;
        match relax.status {
            LpStatus::Infeasible => continue,
            LpStatus::Optimal => {}
            other => return Err(SolveError::Numeric(format!("{other:?} relaxation"))),
        }
        if let Some((_, inc)) = &incumbent {
            if relax.objective >= inc - config.gap_tol {
                continue;
            }
        }

        let branch = most_fractional(&int_cols, &relax.values, config.int_tol);
        match branch {
            None => {
                let candidate = polish(&base, &int_cols, &relax.values, &mut stats)
                    .unwrap_or((relax.values.clone(), relax.objective));
                let improves = incumbent
                    .as_ref()
                    .map_or(true, |(_, inc)| candidate.1 < *inc);
                if improves {
                    incumbent = Some(candidate);
                }
            }
            Some((col, value)) => {
                let mut down = node.changes.clone();
                down.push((col, scratch.lower[col], value.floor()));
                heap.push(Node {
                    bound: relax.objective,
                    seq: next_seq,
                    changes: down,
                });
                next_seq += 1;
                let mut up = node.changes.clone();
                up.push((col, value.ceil(), scratch.upper[col]));
                heap.push(Node {
                    bound: relax.objective,
                    seq: next_seq,
                    changes: up,
                });
                next_seq += 1;
            }
        }
    }

    match incumbent {
        Some((values, objective)) => Ok((
            MilpSolution {
                values,
                objective_value: objective,
                optimal: exhausted,
            },
            stats,
        )),
        None => {
            if exhausted {
                Err(SolveError::Infeasible)
            } else {
                Err(SolveError::NodeLimit {
                    explored: stats.nodes_explored,
                })
            }
        }
    }
}

/// Most fractional integer variable, ties to the lowest column index.
fn most_fractional(int_cols: &[usize], values: &[f64], int_tol: f64) -> Option<(usize, f64)> {
    let mut best: Option<(usize, f64, f64)> = None;
    for &col in int_cols {
        let v = values[col];
        if (v - v.round()).abs() <= int_tol {
            continue;
        }
        let dist = (v - v.floor() - 0.5).abs();
        if best.map_or(true, |(_, _, d)| dist < d) {
            best = Some((col, v, dist));
        }
    }
    best.map(|(col, v, _)| (col, v))
}

/// Fixes every integer variable to its rounded value and re-solves the
/// continuous layer against the root bounds.
fn polish(
    base: &LpProblem,
    int_cols: &[usize],
    values: &[f64],
    stats: &mut SolveStats,
) -> Option<(Vec<f64>, f64)> {
    let mut fixed = base.clone();
    for &col in int_cols {
        let v = values[col].round();
        fixed.lower[col] = v;
        fixed.upper[col] = v;
    }
    let r = lp::solve(&fixed);
    stats.lp_solves += 1;
    if r.status == LpStatus::Optimal {
        Some((r.values, r.objective))
    } else {
        None
    }
}
