//! Per-device power accounting on a two-node 160 km link, by hand.
//!
//! An idle site pays only for amplifiers and its optical switch. Serving a
//! 40 Gb/s channel adds half a router port and half a transponder pair at
//! each end. Every figure below is exact.
//!
//! ```bash
//! cargo run --example power_breakdown
//! ```

use gridshade::net::load_topology;
use gridshade::power::{
    fixed_node_power, max_node_power, network_power, node_power, DevicePowers,
    NetworkConfiguration,
};
use serde_json::json;

fn main() {
    let topo = load_topology(
        &json!({
            "span_km": 80.0,
            "wavelengths_per_fiber": 4,
            "wavelength_capacity_gbps": 40.0,
            "nodes": [
                {"id": 0, "name": "west", "population": 1.0},
                {"id": 1, "name": "east", "population": 1.0}
            ],
            "links": [
                {"m": 0, "n": 1, "length_km": 160.0}
            ]
        })
        .to_string(),
    )
    .expect("valid topology");
    let dev = DevicePowers::default();

    let idle = NetworkConfiguration::default();
    println!(
        "dark network: {:.1} W total ({:.1} W per node, amplifiers plus switch)",
        network_power(&topo, &idle, &dev).expect("nodes exist"),
        fixed_node_power(&topo, &dev, 0)
    );

    let mut serving = NetworkConfiguration::default();
    serving.lightpaths.insert((0, 1), 1);
    serving.wavelength_routing.insert(((0, 1), (0, 1)), 1);
    serving.recompute_link_totals();

    let west = node_power(&topo, &serving, &dev, 0).expect("node exists");
    println!("\none lightpath west -> east, seen from west:");
    println!("  router ports   {:>6.1} W", west.router_w);
    println!("  transponders   {:>6.1} W", west.transponder_w);
    println!("  regenerators   {:>6.1} W", west.regenerator_w);
    println!("  amplifiers     {:>6.1} W", west.edfa_w);
    println!("  optical switch {:>6.1} W", west.switch_w);
    println!("  total          {:>6.1} W", west.total_w());

    let east = node_power(&topo, &serving, &dev, 1).expect("node exists");
    assert_eq!(west.total_w(), east.total_w(), "both endpoints pay the same");

    println!(
        "\nfully lit ceiling per node: {:.1} W (every wavelength up, both directions)",
        max_node_power(&topo, &dev, 0)
    );
}
