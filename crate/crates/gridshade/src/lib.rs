//! Energy-source-aware routing for bypass optical core networks.
//!
//! The crate models an IP-over-WDM network in which every node can draw
//! power from three sources (renewable, grid, battery), formulates one
//! mixed-integer program per time slot that decides routing, lightpath
//! placement, wavelength assignment, blocking, and the per-node power
//! split, and evaluates whole days slot by slot with battery carryover.
//!
//! Start with the runnable examples:
//!
//! - `topology_tour`: load, validate, and inspect a topology file
//! - `gravity_traffic`: build population-proportional traffic matrices
//! - `power_breakdown`: per-device node power for a hand-built configuration
//! - `solve_one_slot`: formulate and solve a single slot to optimality
//! - `blackout_day`: a full day with a node cut off from the grid
//! - `battery_sizing`: smallest battery that keeps a blackout day feasible
//! - `italy_day_heuristic`: the bundled 21-node network, heuristic routing
//! - `oracle_crosscheck`: exhaustive search agreeing with the solver

pub mod demand;
pub mod energy;
pub mod milp;
pub mod net;
pub mod power;
pub mod report;
pub mod sim;
pub mod solver;
pub mod validation;
