//! Evaluates one bundled scenario on the 21-node sample network with the
//! greedy heuristic router and prints the day summary plus the blackout
//! node's battery trajectory.
//!
//! ```bash
//! cargo run --release --example italy_day_heuristic            # weso1
//! cargo run --release --example italy_day_heuristic weso3
//! ```

use gridshade::net::load_topology_file;
use gridshade::report::summarize;
use gridshade::sim::{load_scenario_file, run_day};
use std::path::Path;

fn main() {
    let name = std::env::args().nth(1).unwrap_or_else(|| "weso1".into());
    let data = Path::new(env!("CARGO_MANIFEST_DIR")).join("data");
    let topo = load_topology_file(&data.join("italy21.json")).expect("bundled topology loads");
    let scenario = load_scenario_file(&data.join(format!("scenarios/{name}.json")))
        .expect("bundled scenario loads");
    scenario.validate(&topo).expect("scenario fits topology");

    let day = run_day(&topo, &scenario, false).expect("the day completes");
    print!("{}", summarize(&day));

    if let Some(blackout) = scenario.blackouts.first() {
        let node = blackout.node;
        println!(
            "\nnode {node} ({}) through the blackout:",
            topo.nodes[node].name
        );
        println!("  slot start  solar kW  battery kW  residual kWh");
        for slot in &day.slots {
            let row = &slot.node_power[node];
            println!(
                "  [{:>4.1} h)   {:>8.2} {:>11.2} {:>13.3}",
                slot.start_hour, row.re_kw, row.bt_kw, row.battery_residual_kwh
            );
        }
    }
}
