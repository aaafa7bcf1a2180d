//! Two-phase simplex for linear programs with per-variable bounds.
//!
//! Dense tableau implementation sized for the instances this crate builds:
//! a few hundred rows and columns. Nonbasic variables rest at one of their
//! bounds, phase 1 drives signed artificial variables to zero, and Bland's
//! rule takes over after long degenerate stretches so the search cannot
//! cycle.

use crate::milp::{MilpInstance, Relation};

const PIVOT_TOL: f64 = 1e-9;
const COST_TOL: f64 = 1e-7;
const PHASE1_TOL: f64 = 1e-6;
const RATIO_TIE: f64 = 1e-12;
const ITER_LIMIT: usize = 200_000;
const REFRESH_EVERY: usize = 2_048;

#[derive(Debug, Clone)]
pub struct LpRow {
    pub terms: Vec<(usize, f64)>,
    pub relation: Relation,
    pub rhs: f64,
}

#[derive(Debug, Clone)]
pub struct LpProblem {
    pub objective: Vec<f64>,
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
    pub rows: Vec<LpRow>,
}

impl LpProblem {
    pub fn ncols(&self) -> usize {
        self.objective.len()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
    IterationLimit,
}

#[derive(Debug, Clone)]
pub struct LpResult {
    pub status: LpStatus,
    pub objective: f64,
    /// One value per structural variable; meaningful only when `Optimal`.
    pub values: Vec<f64>,
}

/// The continuous relaxation of a built instance.
pub fn problem_from_instance(instance: &MilpInstance) -> LpProblem {
    LpProblem {
        objective: instance.objective_coeffs().to_vec(),
        lower: instance.vars().iter().map(|v| v.lower).collect(),
        upper: instance.vars().iter().map(|v| v.upper).collect(),
        rows: instance
            .constraints()
            .iter()
            .map(|c| LpRow {
                terms: c.terms.clone(),
                relation: c.relation,
                rhs: c.rhs,
            })
            .collect(),
    }
}

pub fn solve(problem: &LpProblem) -> LpResult {
    Simplex::new(problem).run(problem)
}

struct Simplex {
    m: usize,
    ntot: usize,
    nstruct: usize,
    tab: Vec<Vec<f64>>,
    beta: Vec<f64>,
    lower: Vec<f64>,
    upper: Vec<f64>,
    x: Vec<f64>,
    at_upper: Vec<bool>,
    basis: Vec<usize>,
    in_basis: Vec<bool>,
    artificial_sign: Vec<(usize, f64)>,
}

impl Simplex {
    fn new(problem: &LpProblem) -> Simplex {
        let nstruct = problem.ncols();
        let m = problem.rows.len();
        let mut lower = problem.lower.clone();
        let mut upper = problem.upper.clone();

        let mut x = vec![0.0; nstruct];
        let mut at_upper = vec![false; nstruct];
        for j in 0..nstruct {
            if lower[j].is_finite() {
                x[j] = lower[j];
            } else if upper[j].is_finite() {
                x[j] = upper[j];
                at_upper[j] = true;
            }
        }

        // slack column per row
        for row in &problem.rows {
            let (lo, up) = match row.relation {
                Relation::Le => (0.0, f64::INFINITY),
                Relation::Ge => (f64::NEG_INFINITY, 0.0),
                Relation::Eq => (0.0, 0.0),
            };
            lower.push(lo);
            upper.push(up);
        }

        let mut residual = Vec::with_capacity(m);
        for row in &problem.rows {
            let lhs: f64 = row.terms.iter().map(|(j, a)| a * x[*j]).sum();
            residual.push(row.rhs - lhs);
        }

        let mut basis = Vec::with_capacity(m);
        let mut slack_vals = Vec::with_capacity(m);
        let mut artificial_sign = Vec::new();
        for (i, r) in residual.iter().enumerate() {
            let slack = nstruct + i;
            let s = r.clamp(lower[slack], upper[slack]);
            slack_vals.push(s);
            let d = r - s;
            if d.abs() > 1e-11 {
                artificial_sign.push((i, d.signum()));
            }
        }

        let mut ntot = nstruct + m;
        let mut art_col_of_row = vec![usize::MAX; m];
        for (i, sign) in &artificial_sign {
            art_col_of_row[*i] = ntot;
            if *sign > 0.0 {
                lower.push(0.0);
                upper.push(f64::INFINITY);
            } else {
                lower.push(f64::NEG_INFINITY);
                upper.push(0.0);
            }
            ntot += 1;
        }

        let mut x_all = x;
        x_all.extend_from_slice(&slack_vals);
        let mut at_upper_all = at_upper;
        at_upper_all.extend(problem.rows.iter().map(|r| matches!(r.relation, Relation::Ge)));
        for (i, _) in &artificial_sign {
            let slack = nstruct + *i;
            x_all.push(residual[*i] - x_all[slack]);
            at_upper_all.push(false);
        }

        let mut tab = vec![vec![0.0; ntot]; m];
        for (i, row) in problem.rows.iter().enumerate() {
            for (j, a) in &row.terms {
                tab[i][*j] += a;
            }
            tab[i][nstruct + i] = 1.0;
            if art_col_of_row[i] != usize::MAX {
                tab[i][art_col_of_row[i]] = 1.0;
            }
        }
        let beta: Vec<f64> = problem.rows.iter().map(|r| r.rhs).collect();

        let mut in_basis = vec![false; ntot];
        for i in 0..m {
            let col = if art_col_of_row[i] != usize::MAX {
                art_col_of_row[i]
            } else {
                nstruct + i
            };
            basis.push(col);
            in_basis[col] = true;
        }

        Simplex {
            m,
            ntot,
            nstruct,
            tab,
            beta,
            lower,
            upper,
            x: x_all,
            at_upper: at_upper_all,
            basis,
            in_basis,
            artificial_sign,
        }
    }

    fn run(mut self, problem: &LpProblem) -> LpResult {
        if !self.artificial_sign.is_empty() {
            let mut phase1 = vec![0.0; self.ntot];
            for (k, (_, sign)) in self.artificial_sign.iter().enumerate() {
                phase1[self.nstruct + self.m + k] = *sign;
            }
            match self.optimize(&phase1) {
                LoopEnd::Done => {}
                LoopEnd::Unbounded => {
                    // phase-1 objective is bounded below by zero
                    return self.finish(problem, LpStatus::Infeasible);
                }
                LoopEnd::IterLimit => return self.finish(problem, LpStatus::IterationLimit),
            }
            let infeasibility: f64 = (0..self.artificial_sign.len())
                .map(|k| self.x[self.nstruct + self.m + k].abs())
                .sum();
            if infeasibility > PHASE1_TOL {
                return self.finish(problem, LpStatus::Infeasible);
            }
            for k in 0..self.artificial_sign.len() {
                let col = self.nstruct + self.m + k;
                self.lower[col] = 0.0;
                self.upper[col] = 0.0;
                if !self.in_basis[col] {
                    self.x[col] = 0.0;
                }
            }
            self.recompute_basics();
        }

        let mut phase2 = vec![0.0; self.ntot];
        phase2[..self.nstruct].copy_from_slice(&problem.objective);
        match self.optimize(&phase2) {
            LoopEnd::Done => self.finish(problem, LpStatus::Optimal),
            LoopEnd::Unbounded => self.finish(problem, LpStatus::Unbounded),
            LoopEnd::IterLimit => self.finish(problem, LpStatus::IterationLimit),
        }
    }

    fn finish(self, problem: &LpProblem, status: LpStatus) -> LpResult {
        let values: Vec<f64> = self.x[..self.nstruct].to_vec();
        let objective = problem
            .objective
            .iter()
            .zip(&values)
            .map(|(c, v)| c * v)
            .sum();
        LpResult {
            status,
            objective,
            values,
        }
    }

    /// Basic values from the maintained image of the right-hand side.
    fn recompute_basics(&mut self) {
        let mut vals = self.beta.clone();
        for j in 0..self.ntot {
            if self.in_basis[j] || self.x[j] == 0.0 {
                continue;
            }
            for i in 0..self.m {
                vals[i] -= self.tab[i][j] * self.x[j];
            }
        }
        for i in 0..self.m {
            self.x[self.basis[i]] = vals[i];
        }
    }

    fn reduced_costs(&self, cost: &[f64]) -> Vec<f64> {
        let mut d = cost.to_vec();
        for i in 0..self.m {
            let cb = cost[self.basis[i]];
            if cb == 0.0 {
                continue;
            }
            for j in 0..self.ntot {
                d[j] -= cb * self.tab[i][j];
            }
        }
        for i in 0..self.m {
            d[self.basis[i]] = 0.0;
        }
        d
    }

    fn optimize(&mut self, cost: &[f64]) -> LoopEnd {
        let mut d = self.reduced_costs(cost);
        let mut degenerate_streak = 0usize;
        for iter in 0..ITER_LIMIT {
            if iter > 0 && iter % REFRESH_EVERY == 0 {
                self.recompute_basics();
                d = self.reduced_costs(cost);
            }
            let bland = degenerate_streak > 64;
            let entering = self.pick_entering(&d, bland);
            let q = match entering {
                Some(q) => q,
                None => return LoopEnd::Done,
            };
            let t: f64 = if self.at_upper[q] { -1.0 } else { 1.0 };

            let mut step = self.upper[q] - self.lower[q];
            let mut leaving: Option<(usize, bool)> = None;
            for i in 0..self.m {
                let a = t * self.tab[i][q];
                let b = self.basis[i];
                let (lim, hits_upper) = if a > PIVOT_TOL {
                    ((self.x[b] - self.lower[b]) / a, false)
                } else if a < -PIVOT_TOL {
                    ((self.upper[b] - self.x[b]) / -a, true)
                } else {
                    continue;
                };
                let lim = lim.max(0.0);
                if !lim.is_finite() {
                    continue;
                }
                let better = match leaving {
                    None => lim < step - RATIO_TIE,
                    Some((r, _)) => {
                        lim < step - RATIO_TIE
                            || (lim <= step + RATIO_TIE
                                && if bland {
                                    b < self.basis[r]
                                } else {
                                    self.tab[i][q].abs() > self.tab[r][q].abs()
                                })
                    }
                };
                if better {
                    step = lim.min(step);
                    leaving = Some((i, hits_upper));
                }
            }

            if step.is_infinite() {
                return LoopEnd::Unbounded;
            }
            if step > 1e-10 {
                degenerate_streak = 0;
            } else {
                degenerate_streak += 1;
            }

            match leaving {
                None => {
                    // the entering variable runs to its other bound
                    for i in 0..self.m {
                        let b = self.basis[i];
                        self.x[b] -= t * self.tab[i][q] * step;
                    }
                    self.x[q] += t * step;
                    self.at_upper[q] = !self.at_upper[q];
                }
                Some((r, hits_upper)) => {
                    for i in 0..self.m {
                        let b = self.basis[i];
                        self.x[b] -= t * self.tab[i][q] * step;
                    }
                    self.x[q] += t * step;

                    let leave = self.basis[r];
                    self.x[leave] = if hits_upper {
                        self.upper[leave]
                    } else {
                        self.lower[leave]
                    };
                    self.at_upper[leave] = hits_upper;
                    self.in_basis[leave] = false;

                    let piv = self.tab[r][q];
                    let inv = 1.0 / piv;
                    for j in 0..self.ntot {
                        self.tab[r][j] *= inv;
                    }
                    self.beta[r] *= inv;
                    for i in 0..self.m {
                        if i == r {
                            continue;
                        }
                        let f = self.tab[i][q];
                        if f == 0.0 {
                            continue;
                        }
                        for j in 0..self.ntot {
                            self.tab[i][j] -= f * self.tab[r][j];
                        }
                        self.beta[i] -= f * self.beta[r];
                    }
                    let f = d[q];
                    if f != 0.0 {
                        for j in 0..self.ntot {
                            d[j] -= f * self.tab[r][j];
                        }
                    }
                    d[q] = 0.0;
                    self.basis[r] = q;
                    self.in_basis[q] = true;
                }
            }
        }
        LoopEnd::IterLimit
    }

    fn pick_entering(&self, d: &[f64], bland: bool) -> Option<usize> {
        let mut best: Option<(usize, f64)> = None;
        for j in 0..self.ntot {
            if self.in_basis[j] || self.upper[j] - self.lower[j] <= RATIO_TIE {
                continue;
            }
            let eligible = if self.at_upper[j] {
                d[j] > COST_TOL
            } else {
                d[j] < -COST_TOL
            };
            if !eligible {
                continue;
            }
            if bland {
                return Some(j);
            }
            if best.map_or(true, |(_, score)| d[j].abs() > score) {
                best = Some((j, d[j].abs()));
            }
        }
        best.map(|(j, _)| j)
    }
}

enum LoopEnd {
    Done,
    Unbounded,
    IterLimit,
}
