//! Builds a population-gravity traffic matrix for the bundled topology and
//! walks it through the diurnal profile.
//!
//! ```bash
//! cargo run --example gravity_traffic
//! ```

use gridshade::demand::{demand_at_slot, gravity_matrix, total_offered, DiurnalProfile};
use gridshade::net::load_topology_file;
use std::path::Path;

fn main() {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("data/italy21.json");
    let topo = load_topology_file(&path).expect("bundled topology loads");

    let populations: Vec<f64> = topo.nodes.iter().map(|n| n.population).collect();
    let busy = gravity_matrix(&populations, 1800.0).expect("positive populations");

    println!(
        "busy hour: {} directed pairs, {:.1} Gb/s offered in total",
        busy.positive_count(),
        total_offered(&busy)
    );

    let mut pairs: Vec<_> = busy.iter().map(|(&pair, &vol)| (pair, vol)).collect();
    pairs.sort_by(|a, b| b.1.total_cmp(&a.1));
    println!("\nheaviest pairs:");
    for ((s, d), vol) in pairs.iter().take(5) {
        println!(
            "  {:<8} -> {:<8} {:>6.2} Gb/s",
            topo.nodes[*s].name, topo.nodes[*d].name, vol
        );
    }

    let profile = DiurnalProfile::default_two_hour();
    let (hub_s, hub_d) = pairs[0].0;
    println!(
        "\n{} -> {} across the day:",
        topo.nodes[hub_s].name, topo.nodes[hub_d].name
    );
    for slot in 0..profile.slot_count() {
        let slotted = demand_at_slot(&busy, &profile, slot).expect("slot in range");
        let vol = slotted.get(hub_s, hub_d);
        let bar = "#".repeat((vol / 2.0).round() as usize);
        println!(
            "  [{:>2}h-{:>2}h) {:>6.2} Gb/s  {}",
            profile.slot_start_hour(slot),
            profile.slot_start_hour(slot) + 2.0,
            vol,
            bar
        );
    }
}
