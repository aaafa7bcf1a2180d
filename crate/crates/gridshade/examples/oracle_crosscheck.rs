//! Cross-checks the branch-and-bound solver against exhaustive enumeration
//! on a family of seeded random instances, and audits the heuristic router
//! on every instance both solvers proved optimal.
//!
//! ```bash
//! cargo run --release --example oracle_crosscheck
//! ```

use gridshade::validation::cross_check;

fn main() {
    let report = cross_check(11, 40).expect("all solvers agree");
    println!("{} random instances", report.cases);
    println!("  proven optimal by both solvers: {}", report.agreed_optimal);
    println!("  infeasible, both agree:         {}", report.agreed_infeasible);
    println!("  heuristic audited as feasible:  {}", report.heuristic_checked);
    println!("  largest objective gap:          {:.2e}", report.max_objective_gap);
}
