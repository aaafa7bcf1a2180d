//! Formulates one time slot as a mixed-integer program and solves it to
//! proven optimality, then lets exhaustive enumeration confirm the result.
//!
//! The setup is the four-node fixture: traffic between nodes 0 and 2 can
//! ride the short path through node 1, which is on battery power, or take
//! the grid-fed detour through node 3. Energy-source weights decide.
//!
//! ```bash
//! cargo run --example solve_one_slot
//! ```

use gridshade::demand::TrafficMatrix;
use gridshade::milp::{build_instance, SourceCapsW, VarKey, Weights};
use gridshade::power::DevicePowers;
use gridshade::solver::{solve_exact, solve_oracle, BnbConfig, DEFAULT_ORACLE_BUDGET};
use gridshade::validation::{four_node_fixture, transit_wavelengths};

fn main() {
    let topo = four_node_fixture(40.0, 0.0);
    let devices = DevicePowers::default();
    let demands = TrafficMatrix::from_pairs([((0, 2), 30.0), ((2, 0), 30.0)]);

    // Node 1 has only its battery; everyone else sits on a generous grid.
    let grid = SourceCapsW {
        renewable_w: 0.0,
        grid_w: 50_000.0,
        battery_w: 0.0,
    };
    let battery_only = SourceCapsW {
        renewable_w: 0.0,
        grid_w: 0.0,
        battery_w: 20_000.0,
    };
    let caps = vec![grid, battery_only, grid, grid];

    for weights in [Weights::blocking_min(), Weights::weso1()] {
        let instance =
            build_instance(&topo, &demands, &caps, &weights, &devices).expect("valid instance");
        let (solution, stats) =
            solve_exact(&instance, &BnbConfig::default()).expect("fixture slot is feasible");

        let violations = instance.check_feasibility(&solution, 1e-6);
        assert!(violations.is_empty(), "optimum audits clean: {violations:?}");

        let objective = instance
            .objective_value(&solution, &weights)
            .expect("weights validate");
        println!(
            "weights (alpha {}, beta {}, gamma {}): objective {:.1} after {} search nodes",
            weights.alpha, weights.beta, weights.gamma, objective, stats.nodes_explored
        );

        let plan = instance.to_network_configuration(&solution);
        for ((s, d), count) in &plan.lightpaths {
            let route: Vec<String> = plan
                .wavelength_routing
                .iter()
                .filter(|((vlink, _), _)| vlink == &(*s, *d))
                .map(|((_, (m, n)), w)| format!("{m}->{n} x{w}"))
                .collect();
            println!("  {count} lightpath(s) {s} -> {d} on [{}]", route.join(", "));
        }
        for node in 0..topo.node_count() {
            let bt = instance.value(&solution, VarKey::Battery { node });
            if bt > 0.0 {
                println!("  node {node} draws {bt:.1} W from battery");
            }
        }
        println!(
            "  optical transit through node 1: {} wavelength(s)",
            transit_wavelengths(&instance, &solution, 1)
        );

        let oracle = solve_oracle(&instance, DEFAULT_ORACLE_BUDGET).expect("within budget");
        assert!(
            (oracle.objective - objective).abs() <= 1e-6,
            "enumeration agrees with branch and bound"
        );
        println!("  exhaustive enumeration agrees: {:.1}\n", oracle.objective);
    }
}
