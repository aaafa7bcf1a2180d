//! Exhaustive reference solver for small instances.
//!
//! Enumerates every blocking pattern and every lightpath count matrix under
//! provably safe caps, checks carried-flow feasibility with a small
//! self-contained tableau simplex, enumerates cycle-free wavelength
//! routings with capacity propagation, and prices each node's power
//! greedily across sources in ascending weight order. The search prunes
//! only on valid lower bounds, so the best configuration it keeps is a true
//! optimum. Nothing here is shared with the branch-and-bound path, which is
//! what makes agreement between the two meaningful.

use crate::milp::{MilpInstance, MilpSolution, VarKey};
use crate::net::NodeId;
use std::collections::BTreeMap;
use thiserror::Error;

pub const DEFAULT_ORACLE_BUDGET: usize = 20_000_000;

/// Weight stand-in for a node with no usable power source.
const NO_SOURCE_WEIGHT: f64 = 1e12;
const PRUNE_EPS: f64 = 1e-9;

#[derive(Debug, Error)]
pub enum OracleError {
    #[error("instance is infeasible")]
    Infeasible,
    #[error("oracle budget exhausted after {spent} steps")]
    Budget { spent: usize },
}

#[derive(Debug, Clone)]
pub struct OracleOutcome {
    pub objective: f64,
    pub solution: MilpSolution,
}

pub fn solve_oracle(
    instance: &MilpInstance,
    budget: usize,
) -> Result<OracleOutcome, OracleError> {
    Oracle::new(instance, budget).run()
}

/// Finds one directed cycle in a per-demand flow graph, returned as the
/// list of virtual-pair indices it traverses.
fn find_flow_cycle(adj: &BTreeMap<usize, Vec<(usize, usize)>>) -> Option<Vec<usize>> {
    fn visit(
        u: usize,
        adj: &BTreeMap<usize, Vec<(usize, usize)>>,
        color: &mut BTreeMap<usize, u8>,
        trail: &mut Vec<(usize, usize)>,
    ) -> Option<Vec<usize>> {
        color.insert(u, 1);
        if let Some(arcs) = adj.get(&u) {
            for &(pair, v) in arcs {
                match color.get(&v).copied().unwrap_or(0) {
                    0 => {
                        trail.push((pair, v));
                        if let Some(cycle) = visit(v, adj, color, trail) {
                            return Some(cycle);
                        }
                        trail.pop();
                    }
                    1 => {
                        let mut cycle = vec![pair];
                        for &(tp, tn) in trail.iter().rev() {
                            if tn == v {
                                break;
                            }
                            cycle.push(tp);
                        }
                        return Some(cycle);
                    }
                    _ => {}
                }
            }
        }
        color.insert(u, 2);
        None
    }

    let mut color = BTreeMap::new();
    let starts: Vec<usize> = adj.keys().copied().collect();
    for start in starts {
        if color.get(&start).copied().unwrap_or(0) == 0 {
            let mut trail = Vec::new();
            if let Some(cycle) = visit(start, adj, &mut color, &mut trail) {
                return Some(cycle);
            }
        }
    }
    None
}

/// Per-blocking-mask data for the lightpath-count search.
struct CountsCtx {
    pair_caps: Vec<u32>,
    /// Channels pairs at or after each index could still add, per node.
    suffix_out: Vec<Vec<u32>>,
    suffix_in: Vec<Vec<u32>>,
    /// Wavelength channels physically leaving and entering each node.
    out_chan: Vec<u32>,
    in_chan: Vec<u32>,
    sourced: Vec<f64>,
    sunk: Vec<f64>,
    delta_term: f64,
}

#[derive(Debug, Clone)]
struct Best {
    objective: f64,
    blocked: Vec<bool>,
    lightpaths: Vec<u32>,
    routing: BTreeMap<(usize, usize), u32>,
    splits: Vec<[f64; 3]>,
}

struct Oracle<'a> {
    inst: &'a MilpInstance,
    n: usize,
    channel_gbps: f64,
    pairs: Vec<(NodeId, NodeId)>,
    link_index: BTreeMap<(NodeId, NodeId), usize>,
    link_cap: Vec<u32>,
    link_nodes: Vec<(NodeId, NodeId)>,
    link_coeff: Vec<f64>,
    /// Simple physical paths per virtual pair, as ordered-link index lists.
    paths: Vec<Vec<Vec<usize>>>,
    wmin: Vec<f64>,
    cap_total: Vec<f64>,
    fixed: Vec<f64>,
    /// Cheapest conceivable wavelength cost for one unit of each pair.
    wl_min_cost: Vec<f64>,
    /// Cheapest conceivable total cost for one lightpath of each pair.
    unit_lb: Vec<f64>,
    lb_fixed: f64,
    budget: usize,
    spent: usize,
    over_budget: bool,
    best: Option<Best>,
}

impl<'a> Oracle<'a> {
    fn new(inst: &'a MilpInstance, budget: usize) -> Oracle<'a> {
        let meta = &inst.meta;
        let n = meta.node_count;
        let pairs = meta.virtual_pairs.clone();

        let mut link_index = BTreeMap::new();
        let mut link_cap = Vec::new();
        let mut link_nodes = Vec::new();
        let mut link_coeff = Vec::new();
        for (idx, l) in meta.ordered_links.iter().enumerate() {
            link_index.insert((l.from, l.to), idx);
            link_cap.push(l.fibers * meta.wavelengths_per_fiber);
            link_nodes.push((l.from, l.to));
            link_coeff.push(meta.endpoint_watts_per_wavelength(l.from, l.to));
        }

        let weights = meta.weights;
        let mut wmin = Vec::with_capacity(n);
        let mut cap_total = Vec::with_capacity(n);
        for caps in &meta.caps_w {
            let mut w = NO_SOURCE_WEIGHT;
            if caps.renewable_w > 0.0 {
                w = w.min(weights.alpha);
            }
            if caps.grid_w > 0.0 {
                w = w.min(weights.beta);
            }
            if caps.battery_w > 0.0 {
                w = w.min(weights.gamma);
            }
            wmin.push(w);
            cap_total.push(caps.total_w());
        }

        let fixed = meta.fixed_power_w.clone();
        let lb_fixed: f64 = (0..n)
            .map(|i| if fixed[i] > 0.0 { wmin[i] * fixed[i] } else { 0.0 })
            .sum();

        let mut oracle = Oracle {
            inst,
            n,
            channel_gbps: meta.wavelength_capacity_gbps,
            pairs,
            link_index,
            link_cap,
            link_nodes,
            link_coeff,
            paths: Vec::new(),
            wmin,
            cap_total,
            fixed,
            wl_min_cost: Vec::new(),
            unit_lb: Vec::new(),
            lb_fixed,
            budget,
            spent: 0,
            over_budget: false,
            best: None,
        };
        oracle.paths = oracle.enumerate_paths();
        oracle.wl_min_cost = oracle
            .paths
            .iter()
            .map(|paths| {
                paths
                    .iter()
                    .map(|p| p.iter().map(|&l| oracle.link_unit_cost(l)).sum::<f64>())
                    .fold(f64::INFINITY, f64::min)
            })
            .collect();
        oracle.unit_lb = oracle
            .pairs
            .iter()
            .zip(&oracle.wl_min_cost)
            .map(|(&(i, j), &wl)| {
                0.5 * oracle.inst.meta.devices.router_port_w * (oracle.wmin[i] + oracle.wmin[j])
                    + wl
            })
            .collect();
        oracle
    }

    fn link_unit_cost(&self, link: usize) -> f64 {
        let (m, n) = self.link_nodes[link];
        self.link_coeff[link] * (self.wmin[m] + self.wmin[n])
    }

    fn enumerate_paths(&self) -> Vec<Vec<Vec<usize>>> {
        let mut neighbors: Vec<Vec<NodeId>> = vec![Vec::new(); self.n];
        for &(m, n) in self.link_index.keys() {
            neighbors[m].push(n);
        }
        for list in &mut neighbors {
            list.sort_unstable();
            list.dedup();
        }
        self.pairs
            .iter()
            .map(|&(from, to)| {
                let mut found = Vec::new();
                let mut visited = vec![false; self.n];
                visited[from] = true;
                let mut trail = Vec::new();
                self.path_dfs(from, to, &neighbors, &mut visited, &mut trail, &mut found);
                found
            })
            .collect()
    }

    fn path_dfs(
        &self,
        at: NodeId,
        goal: NodeId,
        neighbors: &[Vec<NodeId>],
        visited: &mut Vec<bool>,
        trail: &mut Vec<usize>,
        found: &mut Vec<Vec<usize>>,
    ) {
        if at == goal {
            found.push(trail.clone());
            return;
        }
        for &next in &neighbors[at] {
            if visited[next] {
                continue;
            }
            visited[next] = true;
            trail.push(self.link_index[&(at, next)]);
            self.path_dfs(next, goal, neighbors, visited, trail, found);
            trail.pop();
            visited[next] = false;
        }
    }

    fn tick(&mut self) -> bool {
        self.spent += 1;
        if self.spent > self.budget {
            self.over_budget = true;
        }
        !self.over_budget
    }

    fn improves(&self, candidate: f64) -> bool {
        match &self.best {
            Some(b) => candidate < b.objective - PRUNE_EPS,
            None => true,
        }
    }

    fn run(mut self) -> Result<OracleOutcome, OracleError> {
        for node in 0..self.n {
            if self.cap_total[node] + 1e-9 < self.fixed[node] {
                return Err(OracleError::Infeasible);
            }
        }

        let demands = self.inst.meta.demands.clone();
        let blockable: Vec<usize> = demands
            .iter()
            .enumerate()
            .filter(|(_, d)| d.volume_gbps > 0.0)
            .map(|(k, _)| k)
            .collect();

        for mask in 0..(1u32 << blockable.len()) {
            let mut blocked = vec![false; demands.len()];
            for (bit, &k) in blockable.iter().enumerate() {
                blocked[k] = mask & (1 << bit) != 0;
            }
            let delta_term =
                self.inst.meta.weights.delta * blocked.iter().filter(|b| **b).count() as f64;
            if !self.improves(self.lb_fixed + delta_term) {
                continue;
            }
            let unblocked_total: f64 = demands
                .iter()
                .zip(&blocked)
                .filter(|(_, b)| !**b)
                .map(|(d, _)| d.volume_gbps)
                .sum();
            let count_cap = (unblocked_total / self.channel_gbps).ceil() as u32;
            let mut out_chan = vec![0u32; self.n];
            let mut in_chan = vec![0u32; self.n];
            for (&(m, nn), &cap) in self.link_nodes.iter().zip(&self.link_cap) {
                out_chan[m] += cap;
                in_chan[nn] += cap;
            }
            let pair_caps: Vec<u32> = self
                .pairs
                .iter()
                .map(|&(i, j)| count_cap.min(out_chan[i]).min(in_chan[j]))
                .collect();
            let npairs = self.pairs.len();
            let mut suffix_out = vec![vec![0u32; self.n]; npairs + 1];
            let mut suffix_in = vec![vec![0u32; self.n]; npairs + 1];
            for p in (0..npairs).rev() {
                let (i, j) = self.pairs[p];
                suffix_out[p] = suffix_out[p + 1].clone();
                suffix_in[p] = suffix_in[p + 1].clone();
                suffix_out[p][i] += pair_caps[p];
                suffix_in[p][j] += pair_caps[p];
            }
            let mut sourced = vec![0.0; self.n];
            let mut sunk = vec![0.0; self.n];
            for (k, d) in demands.iter().enumerate() {
                if !blocked[k] && d.volume_gbps > 0.0 {
                    sourced[d.source] += d.volume_gbps;
                    sunk[d.dest] += d.volume_gbps;
                }
            }
            let ctx = CountsCtx {
                pair_caps,
                suffix_out,
                suffix_in,
                out_chan,
                in_chan,
                sourced,
                sunk,
                delta_term,
            };
            let mut counts = vec![0u32; npairs];
            let mut out_units = vec![0u32; self.n];
            let mut in_units = vec![0u32; self.n];
            self.dfs_counts(
                &blocked,
                &ctx,
                0,
                &mut counts,
                &mut out_units,
                &mut in_units,
                0.0,
            );
            if self.over_budget {
                return Err(OracleError::Budget { spent: self.spent });
            }
        }

        if self.over_budget {
            return Err(OracleError::Budget { spent: self.spent });
        }
        let best = match self.best.take() {
            Some(b) => b,
            None => return Err(OracleError::Infeasible),
        };
        // the search is over; do not let the budget starve reconstruction
        self.budget = usize::MAX;
        let solution = self.reconstruct(&best);
        Ok(OracleOutcome {
            objective: best.objective,
            solution,
        })
    }

    #[allow(clippy::too_many_arguments)]
    fn dfs_counts(
        &mut self,
        blocked: &[bool],
        ctx: &CountsCtx,
        pair_idx: usize,
        counts: &mut Vec<u32>,
        out_units: &mut Vec<u32>,
        in_units: &mut Vec<u32>,
        units_lb: f64,
    ) {
        if !self.tick() {
            return;
        }
        if !self.improves(self.lb_fixed + ctx.delta_term + units_lb) {
            return;
        }
        let half_router = 0.5 * self.inst.meta.devices.router_port_w;
        for node in 0..self.n {
            // channels the suffix could still add cannot be exceeded by
            // what this node must source or sink
            let reachable_out =
                (out_units[node] + ctx.suffix_out[pair_idx][node]) as f64 * self.channel_gbps;
            let reachable_in =
                (in_units[node] + ctx.suffix_in[pair_idx][node]) as f64 * self.channel_gbps;
            if ctx.sourced[node] > reachable_out + 1e-9 || ctx.sunk[node] > reachable_in + 1e-9 {
                return;
            }
            // lightpaths already committed claim wavelengths and router
            // ports that no routing choice can avoid
            if out_units[node] > ctx.out_chan[node] || in_units[node] > ctx.in_chan[node] {
                return;
            }
            let router_w =
                self.fixed[node] + half_router * (out_units[node] + in_units[node]) as f64;
            if router_w > self.cap_total[node] + 1e-9 {
                return;
            }
        }
        if pair_idx == self.pairs.len() {
            self.evaluate_counts(blocked, counts, ctx.delta_term);
            return;
        }
        let (i, j) = self.pairs[pair_idx];
        for count in 0..=ctx.pair_caps[pair_idx] {
            counts[pair_idx] = count;
            out_units[i] += count;
            in_units[j] += count;
            self.dfs_counts(
                blocked,
                ctx,
                pair_idx + 1,
                counts,
                out_units,
                in_units,
                units_lb + count as f64 * self.unit_lb[pair_idx],
            );
            out_units[i] -= count;
            in_units[j] -= count;
            if self.over_budget {
                return;
            }
        }
        counts[pair_idx] = 0;
    }

    /// Per-node sourcing plan with minimal weighted cost: fill sources in
    /// ascending weight order, renewable before grid before battery on ties.
    fn split(&self, node: NodeId, power_w: f64) -> Option<(f64, [f64; 3])> {
        let caps = self.inst.meta.caps_w[node];
        let w = self.inst.meta.weights;
        let mut order = [
            (w.alpha, 0usize, caps.renewable_w),
            (w.beta, 1usize, caps.grid_w),
            (w.gamma, 2usize, caps.battery_w),
        ];
        order.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        let mut remaining = power_w;
        let mut cost = 0.0;
        let mut out = [0.0; 3];
        for (weight, slot, cap) in order {
            let take = remaining.min(cap).max(0.0);
            out[slot] = take;
            cost += weight * take;
            remaining -= take;
        }
        if remaining > 1e-9 {
            None
        } else {
            Some((cost, out))
        }
    }

    fn evaluate_counts(&mut self, blocked: &[bool], counts: &[u32], delta_term: f64) {
        let demands = &self.inst.meta.demands;
        // sourced and sunk volume must fit the endpoint channel counts
        let mut sourced = vec![0.0; self.n];
        let mut sunk = vec![0.0; self.n];
        for (k, d) in demands.iter().enumerate() {
            if !blocked[k] && d.volume_gbps > 0.0 {
                sourced[d.source] += d.volume_gbps;
                sunk[d.dest] += d.volume_gbps;
            }
        }
        let mut out_cap = vec![0.0; self.n];
        let mut in_cap = vec![0.0; self.n];
        for (p, &(i, j)) in self.pairs.iter().enumerate() {
            out_cap[i] += counts[p] as f64 * self.channel_gbps;
            in_cap[j] += counts[p] as f64 * self.channel_gbps;
        }
        for node in 0..self.n {
            if sourced[node] > out_cap[node] + 1e-9 || sunk[node] > in_cap[node] + 1e-9 {
                return;
            }
        }

        // router draw alone must stay within each node's total ceiling
        let router = 0.5 * self.inst.meta.devices.router_port_w;
        let mut base_power = self.fixed.clone();
        for (p, &(i, j)) in self.pairs.iter().enumerate() {
            let c = counts[p] as f64;
            base_power[i] += router * c;
            base_power[j] += router * c;
        }
        for node in 0..self.n {
            if base_power[node] > self.cap_total[node] + 1e-9 {
                return;
            }
        }

        if self.flow_lp(blocked, counts).is_none() {
            return;
        }

        let tasks: Vec<(usize, u32)> = counts
            .iter()
            .enumerate()
            .filter(|(_, c)| **c > 0)
            .map(|(p, c)| (p, *c))
            .collect();
        let mut suffix_wl = vec![0.0; tasks.len() + 1];
        for t in (0..tasks.len()).rev() {
            let (p, units) = tasks[t];
            suffix_wl[t] = suffix_wl[t + 1] + units as f64 * self.wl_min_cost[p];
        }
        let mut cap_left = self.link_cap.clone();
        let mut routing = BTreeMap::new();
        let mut power = base_power;
        self.route_tasks(
            blocked,
            counts,
            &tasks,
            &suffix_wl,
            0,
            &mut cap_left,
            &mut power,
            &mut routing,
            delta_term,
        );
    }

    fn partial_cost_lb(&self, power: &[f64]) -> f64 {
        (0..self.n)
            .map(|i| if power[i] > 0.0 { self.wmin[i] * power[i] } else { 0.0 })
            .sum()
    }

    #[allow(clippy::too_many_arguments)]
    fn route_tasks(
        &mut self,
        blocked: &[bool],
        counts: &[u32],
        tasks: &[(usize, u32)],
        suffix_wl: &[f64],
        task_idx: usize,
        cap_left: &mut Vec<u32>,
        power: &mut Vec<f64>,
        routing: &mut BTreeMap<(usize, usize), u32>,
        delta_term: f64,
    ) {
        if !self.tick() {
            return;
        }
        if !self.improves(self.partial_cost_lb(power) + delta_term + suffix_wl[task_idx]) {
            return;
        }
        for node in 0..self.n {
            if power[node] > self.cap_total[node] + 1e-9 {
                return;
            }
        }
        if task_idx == tasks.len() {
            let mut total = delta_term;
            let mut splits = Vec::with_capacity(self.n);
            for node in 0..self.n {
                match self.split(node, power[node]) {
                    Some((cost, split)) => {
                        total += cost;
                        splits.push(split);
                    }
                    None => return,
                }
            }
            if self.improves(total) {
                self.best = Some(Best {
                    objective: total,
                    blocked: blocked.to_vec(),
                    lightpaths: counts.to_vec(),
                    routing: routing.clone(),
                    splits,
                });
            }
            return;
        }
        let (pair, units) = tasks[task_idx];
        self.assign_paths(
            blocked, counts, tasks, suffix_wl, task_idx, pair, 0, units, cap_left, power,
            routing, delta_term,
        );
    }

    #[allow(clippy::too_many_arguments)]
    fn assign_paths(
        &mut self,
        blocked: &[bool],
        counts: &[u32],
        tasks: &[(usize, u32)],
        suffix_wl: &[f64],
        task_idx: usize,
        pair: usize,
        path_idx: usize,
        units_left: u32,
        cap_left: &mut Vec<u32>,
        power: &mut Vec<f64>,
        routing: &mut BTreeMap<(usize, usize), u32>,
        delta_term: f64,
    ) {
        if self.over_budget {
            return;
        }
        if units_left == 0 {
            self.route_tasks(
                blocked, counts, tasks, suffix_wl, task_idx + 1, cap_left, power, routing,
                delta_term,
            );
            return;
        }
        let path_count = self.paths[pair].len();
        if path_idx >= path_count {
            return;
        }
        let path = self.paths[pair][path_idx].clone();
        let max_here = path
            .iter()
            .map(|&l| cap_left[l])
            .min()
            .unwrap_or(0)
            .min(units_left);
        for q in 0..=max_here {
            if q > 0 {
                for &l in &path {
                    cap_left[l] -= 1;
                    let (m, n) = self.link_nodes[l];
                    power[m] += self.link_coeff[l];
                    power[n] += self.link_coeff[l];
                    *routing.entry((pair, l)).or_insert(0) += 1;
                }
            }
            self.assign_paths(
                blocked,
                counts,
                tasks,
                suffix_wl,
                task_idx,
                pair,
                path_idx + 1,
                units_left - q,
                cap_left,
                power,
                routing,
                delta_term,
            );
        }
        if max_here > 0 {
            for &l in &path {
                cap_left[l] += max_here;
                let (m, n) = self.link_nodes[l];
                power[m] -= self.link_coeff[l] * max_here as f64;
                power[n] -= self.link_coeff[l] * max_here as f64;
                let e = routing.get_mut(&(pair, l)).unwrap();
                *e -= max_here;
                if *e == 0 {
                    routing.remove(&(pair, l));
                }
            }
        }
    }

    /// Carried-flow feasibility for fixed blocking and channel counts.
    /// Returns per-(demand, pair) flows when feasible.
    fn flow_lp(
        &mut self,
        blocked: &[bool],
        counts: &[u32],
    ) -> Option<BTreeMap<(usize, usize), f64>> {
        let demands = &self.inst.meta.demands;
        let active: Vec<usize> = demands
            .iter()
            .enumerate()
            .filter(|(k, d)| !blocked[*k] && d.volume_gbps > 0.0)
            .map(|(k, _)| k)
            .collect();
        let open_pairs: Vec<usize> = counts
            .iter()
            .enumerate()
            .filter(|(_, c)| **c > 0)
            .map(|(p, _)| p)
            .collect();
        if active.is_empty() {
            return Some(BTreeMap::new());
        }

        let nf = active.len() * open_pairs.len();
        let col = |a: usize, p: usize| a * open_pairs.len() + p;

        struct Row {
            coeffs: Vec<f64>,
            rhs: f64,
            needs_slack: bool,
        }
        let mut rows = Vec::new();
        for (a, &k) in active.iter().enumerate() {
            let d = demands[k];
            for node in 0..self.n {
                let mut coeffs = vec![0.0; nf];
                for (p, &pr) in open_pairs.iter().enumerate() {
                    let (i, j) = self.pairs[pr];
                    if i == node {
                        coeffs[col(a, p)] += 1.0;
                    }
                    if j == node {
                        coeffs[col(a, p)] -= 1.0;
                    }
                }
                let rhs = if node == d.source {
                    d.volume_gbps
                } else if node == d.dest {
                    -d.volume_gbps
                } else {
                    0.0
                };
                rows.push(Row {
                    coeffs,
                    rhs,
                    needs_slack: false,
                });
            }
        }
        for (p, &pr) in open_pairs.iter().enumerate() {
            let mut coeffs = vec![0.0; nf];
            for a in 0..active.len() {
                coeffs[col(a, p)] = 1.0;
            }
            rows.push(Row {
                coeffs,
                rhs: counts[pr] as f64 * self.channel_gbps,
                needs_slack: true,
            });
        }

        // normalize to nonnegative right-hand sides
        for row in &mut rows {
            if row.rhs < 0.0 {
                for c in &mut row.coeffs {
                    *c = -*c;
                }
                row.rhs = -row.rhs;
            }
        }

        let m = rows.len();
        let nslack = rows.iter().filter(|r| r.needs_slack).count();
        let ntot = nf + nslack + m;
        let mut tab = vec![vec![0.0; ntot + 1]; m];
        let mut basis = vec![0usize; m];
        let mut slack_at = nf;
        for (i, row) in rows.iter().enumerate() {
            tab[i][..nf].copy_from_slice(&row.coeffs);
            tab[i][ntot] = row.rhs;
            if row.needs_slack {
                tab[i][slack_at] = 1.0;
                slack_at += 1;
            }
            // one artificial per row keeps the starting basis trivial
            tab[i][nf + nslack + i] = 1.0;
            basis[i] = nf + nslack + i;
        }
        let mut cost = vec![0.0; ntot + 1];
        for j in nf + nslack..ntot {
            cost[j] = 1.0;
        }
        for i in 0..m {
            for j in 0..=ntot {
                cost[j] -= tab[i][j];
            }
        }

        loop {
            if !self.tick() {
                return None;
            }
            let entering = (0..ntot).find(|&j| cost[j] < -1e-9);
            let q = match entering {
                Some(q) => q,
                None => break,
            };
            let mut leave: Option<usize> = None;
            let mut best_ratio = f64::INFINITY;
            for i in 0..m {
                if tab[i][q] > 1e-9 {
                    let ratio = tab[i][ntot] / tab[i][q];
                    if ratio < best_ratio - 1e-12
                        || (ratio < best_ratio + 1e-12
                            && leave.map_or(true, |r| basis[i] < basis[r]))
                    {
                        best_ratio = ratio;
                        leave = Some(i);
                    }
                }
            }
            let r = leave?;
            let piv = tab[r][q];
            for j in 0..=ntot {
                tab[r][j] /= piv;
            }
            for i in 0..m {
                if i != r && tab[i][q] != 0.0 {
                    let f = tab[i][q];
                    for j in 0..=ntot {
                        tab[i][j] -= f * tab[r][j];
                    }
                }
            }
            let f = cost[q];
            for j in 0..=ntot {
                cost[j] -= f * tab[r][j];
            }
            basis[r] = q;
        }

        let infeasibility = -cost[ntot];
        if infeasibility.abs() > 1e-6 {
            return None;
        }
        let mut flows = BTreeMap::new();
        for (i, &b) in basis.iter().enumerate() {
            if b < nf && tab[i][ntot].abs() > 1e-12 {
                let a = b / open_pairs.len();
                let p = b % open_pairs.len();
                flows.insert((active[a], open_pairs[p]), tab[i][ntot]);
            }
        }
        // a vertex may carry a capacity-saturated circulation; cancelling
        // it keeps conservation and capacities while restoring the
        // per-demand flow bound
        for &k in &active {
            loop {
                let mut adj: BTreeMap<usize, Vec<(usize, usize)>> = BTreeMap::new();
                for (&(dk, p), &f) in &flows {
                    if dk == k && f > 1e-12 {
                        let (i, j) = self.pairs[p];
                        adj.entry(i).or_default().push((p, j));
                    }
                }
                let cycle = match find_flow_cycle(&adj) {
                    Some(c) => c,
                    None => break,
                };
                let slack = cycle
                    .iter()
                    .map(|p| flows[&(k, *p)])
                    .fold(f64::INFINITY, f64::min);
                for p in &cycle {
                    let entry = flows.get_mut(&(k, *p)).unwrap();
                    *entry -= slack;
                    if *entry <= 1e-12 {
                        flows.remove(&(k, *p));
                    }
                }
            }
        }
        Some(flows)
    }

    fn reconstruct(&mut self, best: &Best) -> MilpSolution {
        let mut values = vec![0.0; self.inst.var_count()];
        for (k, b) in best.blocked.iter().enumerate() {
            if *b {
                values[self.inst.var_id(VarKey::Blocked { demand: k })] = 1.0;
            }
        }
        for (p, &(i, j)) in self.pairs.iter().enumerate() {
            values[self.inst.var_id(VarKey::Lightpaths { from: i, to: j })] =
                best.lightpaths[p] as f64;
        }
        let mut per_link = vec![0u32; self.link_nodes.len()];
        for (&(pair, link), units) in &best.routing {
            let (vi, vj) = self.pairs[pair];
            let (m, n) = self.link_nodes[link];
            values[self.inst.var_id(VarKey::WavelengthRoute {
                vfrom: vi,
                vto: vj,
                from: m,
                to: n,
            })] = *units as f64;
            per_link[link] += units;
        }
        for (link, &(m, n)) in self.link_nodes.iter().enumerate() {
            values[self.inst.var_id(VarKey::LinkWavelengths { from: m, to: n })] =
                per_link[link] as f64;
        }
        if let Some(flows) = self.flow_lp(&best.blocked, &best.lightpaths) {
            for ((k, pair), flow) in flows {
                let (i, j) = self.pairs[pair];
                values[self.inst.var_id(VarKey::Flow {
                    demand: k,
                    from: i,
                    to: j,
                })] = flow;
            }
        }
        for node in 0..self.n {
            values[self.inst.var_id(VarKey::Renewable { node })] = best.splits[node][0];
            values[self.inst.var_id(VarKey::Grid { node })] = best.splits[node][1];
            values[self.inst.var_id(VarKey::Battery { node })] = best.splits[node][2];
        }
        MilpSolution {
            values,
            objective_value: best.objective,
            optimal: true,
        }
    }
}
