//! Loads the bundled 21-node topology, validates it, and prints a short
//! structural tour: node degrees, amplifier chains, regenerator placement.
//!
//! ```bash
//! cargo run --example topology_tour
//! ```

use gridshade::net::{amplifier_count, load_topology_file, validate_topology};
use std::path::Path;

fn main() {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("data/italy21.json");
    let topo = load_topology_file(&path).expect("bundled topology loads");

    let violations = validate_topology(&topo);
    assert!(violations.is_empty(), "bundled data validates: {violations:?}");

    println!(
        "{} nodes, {} links, {} wavelengths per fiber at {} Gb/s each",
        topo.node_count(),
        topo.links.len(),
        topo.wavelengths_per_fiber,
        topo.wavelength_capacity_gbps
    );

    let mut degree = vec![0usize; topo.node_count()];
    for link in &topo.links {
        degree[link.m] += 1;
        degree[link.n] += 1;
    }

    println!("\n  id  name          pop    degree  battery   solar");
    for node in &topo.nodes {
        println!(
            "  {:>2}  {:<12} {:>5.2}  {:>6}  {:>6.0} kWh  {:>3.0} kW{}",
            node.id,
            node.name,
            node.population,
            degree[node.id],
            node.battery_kwh,
            node.solar_peak_kw,
            if node.has_datacenter { "  [datacenter]" } else { "" }
        );
    }

    let longest = topo
        .links
        .iter()
        .max_by(|a, b| a.length_km.total_cmp(&b.length_km))
        .unwrap();
    println!(
        "\nlongest link: {} - {} at {} km ({} amplifiers per fiber, {} regenerators per channel)",
        topo.nodes[longest.m].name,
        topo.nodes[longest.n].name,
        longest.length_km,
        amplifier_count(longest.length_km, topo.span_km),
        longest.regenerators
    );

    let fiber_km: f64 = topo
        .links
        .iter()
        .map(|l| l.length_km * l.fibers as f64)
        .sum();
    println!("total plant: {fiber_km:.0} fiber-km");
}
