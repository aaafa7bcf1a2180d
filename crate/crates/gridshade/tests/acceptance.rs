//! Crate acceptance gate: nine go/no-go checks, one line of output each.
//!
//! Run with `cargo test --test acceptance -- --nocapture` to see the lines.

use gridshade::demand::{demand_at_slot, DiurnalProfile, TrafficMatrix};
use gridshade::energy::{battery_step, renewable_cap, source_caps, EnergyState, NodeEnergyConfig};
use gridshade::milp::{build_instance, MilpInstance, MilpSolution, SourceCapsW, VarKey, Weights};
use gridshade::net::{load_topology, load_topology_file, Topology};
use gridshade::power::{
    max_node_power, network_power, node_power, DevicePowers, NetworkConfiguration,
};
use gridshade::report::{metrics_csv, power_csv, write_outputs};
use gridshade::sim::{run_day, route_heuristic, DayResult, SolverMode};
use gridshade::solver::{solve_exact_warm, solve_oracle, BnbConfig, DEFAULT_ORACLE_BUDGET};
use gridshade::validation::{
    cross_check, four_node_fixture, mixed_scenario, transit_scenario, transit_wavelengths,
};
use serde_json::json;
use std::path::Path;
use std::time::{Duration, Instant};

const OBJ_TOL: f64 = 1e-6;
const POWER_TOL_W: f64 = 1e-6;
const DRIFT_TOL_KWH: f64 = 1e-9;

fn criterion(number: u32, name: &str, body: impl FnOnce() -> Result<String, String>) {
    match body() {
        Ok(detail) => println!("criterion {number} ({name}): PASS {detail}"),
        Err(reason) => {
            println!("criterion {number} ({name}): FAIL {reason}");
            panic!("criterion {number} ({name}): {reason}");
        }
    }
}

fn data_file(name: &str) -> std::path::PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("data").join(name)
}

fn schemes() -> [(&'static str, Weights); 4] {
    [
        ("blocking_min", Weights::blocking_min()),
        ("weso1", Weights::weso1()),
        ("weso2", Weights::weso2()),
        ("weso3", Weights::weso3()),
    ]
}

#[test]
fn criterion_1_oracle_equivalence() {
    criterion(1, "oracle equivalence on random instances", || {
        let start = Instant::now();
        let report = cross_check(11, 120)?;
        let elapsed = start.elapsed();
        if report.cases != 120 {
            return Err(format!("expected 120 cases, got {}", report.cases));
        }
        if report.agreed_optimal + report.agreed_infeasible != report.cases {
            return Err("some case was neither proven optimal nor infeasible".into());
        }
        if report.max_objective_gap > OBJ_TOL {
            return Err(format!(
                "objective gap {} exceeds {OBJ_TOL}",
                report.max_objective_gap
            ));
        }
        if elapsed > Duration::from_secs(300) {
            return Err(format!("took {elapsed:.1?}, budget is 5 min"));
        }
        Ok(format!(
            "- {} instances ({} optimal, {} infeasible), max gap {:.1e}, {:.1?}",
            report.cases, report.agreed_optimal, report.agreed_infeasible,
            report.max_objective_gap, elapsed
        ))
    });
}

/// Feasibility audit plus the power identities: per node, sourced power
/// equals the configuration's recomputed draw, and the network total
/// equals the sum over sources.
fn audit_solution(
    topo: &Topology,
    instance: &MilpInstance,
    solution: &MilpSolution,
    label: &str,
) -> Result<(), String> {
    let violations = instance.check_feasibility(solution, OBJ_TOL);
    if let Some(first) = violations.first() {
        return Err(format!("{label}: audit violation: {first}"));
    }
    let devices = DevicePowers::default();
    let cfg = instance.to_network_configuration(solution);
    let mut sourced_total = 0.0;
    for node in 0..topo.node_count() {
        let sourced = instance.value(solution, VarKey::Renewable { node })
            + instance.value(solution, VarKey::Grid { node })
            + instance.value(solution, VarKey::Battery { node });
        let drawn = node_power(topo, &cfg, &devices, node)
            .map_err(|e| format!("{label}: {e}"))?
            .total_w();
        if (sourced - drawn).abs() > POWER_TOL_W {
            return Err(format!(
                "{label}: node {node} sources {sourced} W but draws {drawn} W"
            ));
        }
        sourced_total += sourced;
    }
    let network = network_power(topo, &cfg, &devices).map_err(|e| format!("{label}: {e}"))?;
    if (sourced_total - network).abs() > POWER_TOL_W {
        return Err(format!(
            "{label}: sources sum to {sourced_total} W, network draws {network} W"
        ));
    }
    Ok(())
}

#[test]
fn criterion_2_constraint_audit() {
    criterion(2, "per-node power balance and network total", || {
        let topo = four_node_fixture(40.0, 0.0);
        let devices = DevicePowers::default();
        let grid: Vec<SourceCapsW> = (0..4)
            .map(|node| SourceCapsW {
                renewable_w: 0.0,
                grid_w: max_node_power(&topo, &devices, node),
                battery_w: 0.0,
            })
            .collect();
        let mut blackout = grid.clone();
        blackout[1] = SourceCapsW {
            renewable_w: 0.0,
            grid_w: 0.0,
            battery_w: 20_000.0,
        };
        let mut solar = blackout.clone();
        solar[1].renewable_w = 1_000.0;

        let transit = TrafficMatrix::from_pairs([((0, 2), 30.0), ((2, 0), 30.0)]);
        let mixed = TrafficMatrix::from_pairs([
            ((0, 2), 35.0),
            ((2, 0), 35.0),
            ((1, 2), 10.0),
            ((2, 1), 10.0),
        ]);

        let mut audited = 0usize;
        for caps in [&grid, &blackout, &solar] {
            for demands in [&transit, &mixed] {
                for (name, weights) in schemes() {
                    let instance = build_instance(&topo, demands, caps, &weights, &devices)
                        .map_err(|e| e.to_string())?;
                    let heuristic = route_heuristic(&instance).map_err(|e| e.to_string())?;
                    audit_solution(&topo, &instance, &heuristic, &format!("{name} heuristic"))?;
                    let (exact, _) =
                        solve_exact_warm(&instance, &BnbConfig::default(), Some(&heuristic))
                            .map_err(|e| e.to_string())?;
                    audit_solution(&topo, &instance, &exact, &format!("{name} exact"))?;
                    let oracle = solve_oracle(&instance, DEFAULT_ORACLE_BUDGET)
                        .map_err(|e| e.to_string())?;
                    audit_solution(&topo, &instance, &oracle.solution, &format!("{name} oracle"))?;
                    audited += 3;
                }
            }
        }
        Ok(format!(
            "- {audited} solutions balanced within {POWER_TOL_W} W"
        ))
    });
}

#[test]
fn criterion_3_power_formula_fixture() {
    criterion(3, "power formula fixtures", || {
        let topo = load_topology(
            &json!({
                "span_km": 80.0,
                "wavelengths_per_fiber": 4,
                "wavelength_capacity_gbps": 40.0,
                "nodes": [
                    {"id": 0, "name": "a", "population": 1.0},
                    {"id": 1, "name": "b", "population": 1.0}
                ],
                "links": [{"m": 0, "n": 1, "length_km": 160.0}]
            })
            .to_string(),
        )
        .map_err(|e| e.to_string())?;
        let dev = DevicePowers::default();

        let empty = NetworkConfiguration::default();
        let dark = network_power(&topo, &empty, &dev).map_err(|e| e.to_string())?;
        if dark != 335.0 {
            return Err(format!("dark two-node network draws {dark} W, want exactly 335"));
        }

        let mut serving = NetworkConfiguration::default();
        serving.lightpaths.insert((0, 1), 1);
        serving.wavelength_routing.insert(((0, 1), (0, 1)), 1);
        serving.recompute_link_totals();
        let breakdown = node_power(&topo, &serving, &dev, 0).map_err(|e| e.to_string())?;
        let expected = [
            ("router", breakdown.router_w, 412.5),
            ("transponder", breakdown.transponder_w, 83.5),
            ("regenerator", breakdown.regenerator_w, 0.0),
            ("edfa", breakdown.edfa_w, 82.5),
            ("switch", breakdown.switch_w, 85.0),
            ("total", breakdown.total_w(), 663.5),
        ];
        for (what, got, want) in expected {
            if got != want {
                return Err(format!("{what} power is {got} W, want exactly {want}"));
            }
        }
        Ok("- 663.5 W serving node and 335 W dark network, exact".into())
    });
}

/// IP-layer transit at `node`: flow on virtual links touching the node for
/// demands that neither start nor end there.
fn ip_transit_flow(instance: &MilpInstance, solution: &MilpSolution, node: usize) -> f64 {
    instance
        .vars()
        .iter()
        .zip(&solution.values)
        .filter_map(|(var, &value)| match var.key {
            VarKey::Flow { demand, from, to } if from == node || to == node => {
                let d = instance.meta.demands[demand];
                (d.source != node && d.dest != node).then_some(value.abs())
            }
            _ => None,
        })
        .sum()
}

#[test]
fn criterion_4_weight_scheme_behavior() {
    criterion(4, "weight schemes on the blackout fixture", || {
        let start = Instant::now();
        let topo = four_node_fixture(40.0, 0.0);
        let devices = DevicePowers::default();
        let matrix = TrafficMatrix::from_pairs([((0, 2), 30.0), ((2, 0), 30.0)]);
        let profile = DiurnalProfile::default_two_hour();

        let mut battery_by_scheme: Vec<Vec<f64>> = Vec::new();
        for (name, weights) in schemes() {
            let scenario = transit_scenario(name, weights, SolverMode::Exact);
            let day = run_day(&topo, &scenario, false).map_err(|e| format!("{name}: {e}"))?;
            if day.total_blocked() != 0 {
                return Err(format!("{name}: day blocked {} demands", day.total_blocked()));
            }

            // Replays the same day to inspect each slot's optimal solution.
            let cfgs: Vec<NodeEnergyConfig> = (0..topo.node_count())
                .map(|node| {
                    let outages = if node == 1 { vec![(0.0, 24.0)] } else { Vec::new() };
                    let grid_kw = max_node_power(&topo, &devices, node) / 1000.0;
                    NodeEnergyConfig::from_node(&topo.nodes[node], outages, grid_kw)
                })
                .collect();
            let mut state = EnergyState::new(&cfgs);
            for slot in 0..12 {
                let start_hour = slot as f64 * 2.0;
                let caps: Vec<SourceCapsW> = (0..topo.node_count())
                    .map(|n| {
                        source_caps(&state, &cfgs[n], n, start_hour, 2.0)
                            .map(|c| SourceCapsW::from_kw(&c))
                    })
                    .collect::<Result<_, _>>()
                    .map_err(|e| e.to_string())?;
                let demands = demand_at_slot(&matrix, &profile, slot).map_err(|e| e.to_string())?;
                let instance = build_instance(&topo, &demands, &caps, &weights, &devices)
                    .map_err(|e| e.to_string())?;
                let warm = route_heuristic(&instance).ok();
                let (solution, _) =
                    solve_exact_warm(&instance, &BnbConfig::default(), warm.as_ref())
                        .map_err(|e| format!("{name} slot {slot}: {e}"))?;

                let oracle = solve_oracle(&instance, DEFAULT_ORACLE_BUDGET)
                    .map_err(|e| format!("{name} slot {slot}: {e}"))?;
                if (oracle.objective - solution.objective_value).abs() > OBJ_TOL {
                    return Err(format!(
                        "{name} slot {slot}: exact {} vs oracle {}",
                        solution.objective_value, oracle.objective
                    ));
                }

                if name != "blocking_min" {
                    let optical = transit_wavelengths(&instance, &solution, 1);
                    if optical > OBJ_TOL {
                        return Err(format!(
                            "{name} slot {slot}: {optical} transit wavelengths through node 1"
                        ));
                    }
                    let groomed = ip_transit_flow(&instance, &solution, 1);
                    if groomed > OBJ_TOL {
                        return Err(format!(
                            "{name} slot {slot}: {groomed} Gb/s groomed through node 1"
                        ));
                    }
                }

                let draw_w = instance.value(&solution, VarKey::Battery { node: 1 });
                let reported_w = day.slots[slot].node_power[1].bt_kw * 1000.0;
                if (draw_w - reported_w).abs() > POWER_TOL_W {
                    return Err(format!(
                        "{name} slot {slot}: replay draws {draw_w} W, day run reported {reported_w} W"
                    ));
                }
                for node in 0..topo.node_count() {
                    let bt_kw = instance.value(&solution, VarKey::Battery { node }) / 1000.0;
                    battery_step(&mut state, node, bt_kw, 2.0).map_err(|e| e.to_string())?;
                }
            }
            battery_by_scheme.push(day.slots.iter().map(|s| s.node_power[1].bt_kw).collect());
        }

        let blocking_min = &battery_by_scheme[0];
        for (scheme, draws) in schemes().iter().skip(1).zip(&battery_by_scheme[1..]) {
            for (slot, (weso, bm)) in draws.iter().zip(blocking_min).enumerate() {
                if *weso > bm + POWER_TOL_W / 1000.0 {
                    return Err(format!(
                        "{} slot {slot}: battery {weso} kW exceeds blocking_min {bm} kW",
                        scheme.0
                    ));
                }
            }
        }

        let elapsed = start.elapsed();
        if elapsed > Duration::from_secs(120) {
            return Err(format!("took {elapsed:.1?}, budget is 2 min"));
        }
        Ok(format!(
            "- 4 schemes x 12 slots, zero transit under WESO, oracle agrees, {elapsed:.1?}"
        ))
    });
}

fn telescoping_check(topo: &Topology, day: &DayResult, label: &str) -> Result<(), String> {
    for node in 0..topo.node_count() {
        let initial = topo.nodes[node].battery_kwh;
        let mut previous = initial;
        let mut spent = 0.0;
        for slot in &day.slots {
            let row = &slot.node_power[node];
            if row.battery_residual_kwh > previous + 1e-12 {
                return Err(format!(
                    "{label}: node {node} residual rose to {} in slot {}",
                    row.battery_residual_kwh, slot.slot_index
                ));
            }
            if row.battery_residual_kwh < -1e-12 {
                return Err(format!(
                    "{label}: node {node} residual went negative in slot {}",
                    slot.slot_index
                ));
            }
            previous = row.battery_residual_kwh;
            spent += row.bt_kw * day.slot_hours;
        }
        let drift = (initial - previous) - spent;
        if drift.abs() > DRIFT_TOL_KWH {
            return Err(format!(
                "{label}: node {node} telescoping drift {drift} kWh"
            ));
        }
    }
    Ok(())
}

#[test]
fn criterion_5_battery_carryover() {
    criterion(5, "battery carryover telescoping", || {
        let mut days = 0usize;

        let fixture = four_node_fixture(40.0, 0.0);
        for (name, weights) in schemes() {
            let day = run_day(
                &fixture,
                &transit_scenario(name, weights, SolverMode::Exact),
                false,
            )
            .map_err(|e| format!("{name}: {e}"))?;
            telescoping_check(&fixture, &day, name)?;
            days += 1;
        }

        let sized = four_node_fixture(60.0, 0.0);
        let day = run_day(
            &sized,
            &mixed_scenario("mixed", Weights::weso1(), SolverMode::Heuristic),
            false,
        )
        .map_err(|e| e.to_string())?;
        telescoping_check(&sized, &day, "mixed heuristic")?;
        days += 1;

        let italy = load_topology_file(&data_file("italy21.json")).map_err(|e| e.to_string())?;
        let scenario = gridshade::sim::load_scenario_file(&data_file("scenarios/weso1.json"))
            .map_err(|e| e.to_string())?;
        let day = run_day(&italy, &scenario, false).map_err(|e| e.to_string())?;
        telescoping_check(&italy, &day, "italy weso1")?;
        days += 1;

        Ok(format!(
            "- {days} days, residuals monotone and telescoped within {DRIFT_TOL_KWH} kWh"
        ))
    });
}

#[test]
fn criterion_6_solar_daily_shape() {
    criterion(6, "solar covers daylight, battery covers darkness", || {
        let topo = four_node_fixture(4.0, 70.0);
        let scenario = transit_scenario("solar", Weights::weso1(), SolverMode::Exact);
        let day = run_day(&topo, &scenario, false).map_err(|e| e.to_string())?;
        if day.total_blocked() != 0 {
            return Err(format!("day blocked {} demands", day.total_blocked()));
        }

        let cfg = NodeEnergyConfig::from_node(&topo.nodes[1], vec![(0.0, 24.0)], 0.0);
        let mut daylight = 0usize;
        let mut dark = 0usize;
        for slot in &day.slots {
            let row = &slot.node_power[1];
            let need_kw = row.re_kw + row.br_kw + row.bt_kw;
            let re_cap_kw = renewable_cap(&cfg, slot.start_hour, day.slot_hours);
            if re_cap_kw >= need_kw {
                if row.bt_kw != 0.0 {
                    return Err(format!(
                        "slot {}: renewable cap {re_cap_kw} kW covers {need_kw} kW yet battery drew {} kW",
                        slot.slot_index, row.bt_kw
                    ));
                }
                daylight += 1;
            } else {
                if row.bt_kw <= 0.0 {
                    return Err(format!(
                        "dark slot {} drew no battery power",
                        slot.slot_index
                    ));
                }
                dark += 1;
            }
        }
        if daylight != 6 || dark != 6 {
            return Err(format!(
                "expected 6 daylight and 6 dark slots, saw {daylight} and {dark}"
            ));
        }
        Ok("- battery idle through all 6 daylight slots, active in all 6 dark slots".into())
    });
}

fn day_is_clean(battery_kwh: f64, weights: Weights) -> bool {
    let topo = four_node_fixture(battery_kwh, 0.0);
    let scenario = mixed_scenario("sizing", weights, SolverMode::Heuristic);
    match run_day(&topo, &scenario, false) {
        Ok(day) => day.total_blocked() == 0,
        Err(_) => false,
    }
}

fn minimum_battery(weights: Weights) -> Result<f64, String> {
    let (mut lo, mut hi) = (1.0f64, 120.0f64);
    if day_is_clean(lo, weights) {
        return Err(format!("{lo} kWh already yields a clean day"));
    }
    if !day_is_clean(hi, weights) {
        return Err(format!("{hi} kWh still blocks"));
    }
    while hi - lo > 0.05 {
        let mid = 0.5 * (lo + hi);
        if day_is_clean(mid, weights) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(hi)
}

#[test]
fn criterion_7_battery_sizing_ratio() {
    criterion(7, "blocking-min needs the larger battery", || {
        let start = Instant::now();
        let blocking_min = minimum_battery(Weights::blocking_min())?;
        let mut detail = format!("- blocking_min {blocking_min:.2} kWh");
        for (name, weights) in &schemes()[1..] {
            let weso = minimum_battery(*weights)?;
            if weso + 1.0 > blocking_min {
                return Err(format!(
                    "{name} needs {weso:.2} kWh, not clearly below blocking_min's {blocking_min:.2}"
                ));
            }
            detail.push_str(&format!(", {name} {weso:.2} kWh"));
        }
        let elapsed = start.elapsed();
        if elapsed > Duration::from_secs(300) {
            return Err(format!("took {elapsed:.1?}, budget is 5 min"));
        }
        detail.push_str(&format!(", {elapsed:.1?}"));
        Ok(detail)
    });
}

#[test]
fn criterion_8_heuristic_admissibility_and_speed() {
    criterion(8, "heuristic admissible and fast", || {
        let report = cross_check(11, 60)?;
        if report.heuristic_checked != report.agreed_optimal {
            return Err(format!(
                "heuristic audited on {} of {} optimal instances",
                report.heuristic_checked, report.agreed_optimal
            ));
        }

        let italy = load_topology_file(&data_file("italy21.json")).map_err(|e| e.to_string())?;
        let scenario = gridshade::sim::load_scenario_file(&data_file("scenarios/weso1.json"))
            .map_err(|e| e.to_string())?;
        let start = Instant::now();
        let day = run_day(&italy, &scenario, false).map_err(|e| e.to_string())?;
        let elapsed = start.elapsed();
        if day.slots.len() != 12 {
            return Err(format!("day ran {} slots, want 12", day.slots.len()));
        }
        if elapsed > Duration::from_secs(60) {
            return Err(format!("bundled day took {elapsed:.1?}, budget is 60 s"));
        }
        Ok(format!(
            "- heuristic >= exact on {} instances, bundled 21-node day in {elapsed:.1?}",
            report.heuristic_checked
        ))
    });
}

#[test]
fn criterion_9_determinism() {
    criterion(9, "byte-identical reruns", || {
        let italy = load_topology_file(&data_file("italy21.json")).map_err(|e| e.to_string())?;
        let scenario = gridshade::sim::load_scenario_file(&data_file("scenarios/weso2.json"))
            .map_err(|e| e.to_string())?;
        let first = run_day(&italy, &scenario, false).map_err(|e| e.to_string())?;
        let second = run_day(&italy, &scenario, false).map_err(|e| e.to_string())?;
        if power_csv(&first) != power_csv(&second) {
            return Err("power.csv differs between reruns".into());
        }
        if metrics_csv(&first) != metrics_csv(&second) {
            return Err("metrics.csv differs between reruns".into());
        }

        let dir_a = tempfile::tempdir().map_err(|e| e.to_string())?;
        let dir_b = tempfile::tempdir().map_err(|e| e.to_string())?;
        write_outputs(dir_a.path(), &first, false).map_err(|e| e.to_string())?;
        write_outputs(dir_b.path(), &second, false).map_err(|e| e.to_string())?;
        for file in ["power.csv", "metrics.csv", "manifest.json"] {
            let a = std::fs::read(dir_a.path().join(file)).map_err(|e| e.to_string())?;
            let b = std::fs::read(dir_b.path().join(file)).map_err(|e| e.to_string())?;
            if a != b {
                return Err(format!("{file} differs between reruns"));
            }
        }

        let fixture = four_node_fixture(40.0, 0.0);
        let exact = transit_scenario("det", Weights::weso3(), SolverMode::Exact);
        let day_a = run_day(&fixture, &exact, false).map_err(|e| e.to_string())?;
        let day_b = run_day(&fixture, &exact, false).map_err(|e| e.to_string())?;
        if power_csv(&day_a) != power_csv(&day_b) {
            return Err("exact-mode power.csv differs between reruns".into());
        }

        Ok("- two scenarios re-run byte-identically, manifests included".into())
    });
}
