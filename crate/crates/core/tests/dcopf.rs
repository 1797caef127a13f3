//! Market clearing: LP assembly, duals-as-prices, congestion behaviour and
//! pinned dispatch values for the bundled fixtures.

mod common;

use approx::assert_abs_diff_eq;
use common::assert_optimal;
use gridshift_core::dcopf::{
    build_dcopf, curtailment_of, emissions_of, solve_dcopf, ConstraintId, DcopfError,
    ObjectiveMode,
};
use gridshift_core::lp::LpError;
use gridshift_core::net::io::load_dir;
use gridshift_core::net::{Bus, Fuel, Generator, Line, Load, Network};

fn fixture(name: &str) -> Network {
    load_dir(format!("{}/fixtures/{name}", env!("CARGO_MANIFEST_DIR"))).unwrap()
}

/// Two buses, cheap unit behind a 200 MW line, 300 MW of load on the far
/// side. Everything about the optimum can be computed by hand.
fn congested_pair() -> Network {
    Network {
        buses: vec![
            Bus { id: 1, name: "near".into(), region: 1, is_ref: true },
            Bus { id: 2, name: "far".into(), region: 1, is_ref: false },
        ],
        gens: vec![
            Generator {
                id: 1,
                bus: 1,
                fuel: Fuel::Coal,
                cost: 10.0,
                p_min: 0.0,
                p_max: 500.0,
                emission_rate: 0.6042,
            },
            Generator {
                id: 2,
                bus: 2,
                fuel: Fuel::Gas,
                cost: 50.0,
                p_min: 0.0,
                p_max: 300.0,
                emission_rate: 0.9606,
            },
        ],
        lines: vec![Line { id: 1, from: 1, to: 2, susceptance: 5.0, limit: 200.0 }],
        loads: vec![Load { id: 1, bus: 2, demand: 300.0, is_data_center: false }],
    }
}

#[test]
fn lp_dimensions_follow_network_size() {
    let net = fixture("fivebus");
    let model = build_dcopf(&net, ObjectiveMode::Cost).unwrap();
    // Variables: one angle per bus plus one output per generator.
    assert_eq!(model.lp.n_vars(), 5 + 6);
    // Equalities: one balance per bus plus the reference pin.
    assert_eq!(model.lp.n_eq(), 5 + 1);
    // Inequalities: two per line, two per generator.
    assert_eq!(model.lp.n_ub(), 2 * 6 + 2 * 6);
    assert_eq!(model.theta_col(0), 0);
    assert_eq!(model.gen_col(0), 5);
    assert_eq!(model.balance_row(4), 4);
}

#[test]
fn congested_pair_matches_hand_solution() {
    let net = congested_pair();
    let d = solve_dcopf(&net, ObjectiveMode::Cost).unwrap();
    assert_optimal(&d.model.lp, &d.solution, "congested pair");

    // Cheap unit fills the line, expensive unit covers the remainder.
    assert_abs_diff_eq!(d.result.p_g[0], 200.0, epsilon = 1e-8);
    assert_abs_diff_eq!(d.result.p_g[1], 100.0, epsilon = 1e-8);
    assert_abs_diff_eq!(d.result.cost, 200.0 * 10.0 + 100.0 * 50.0, epsilon = 1e-6);
    assert_abs_diff_eq!(d.result.flows[0], 200.0, epsilon = 1e-8);

    // Prices separate across the congested line: each bus is priced at its
    // local marginal unit.
    assert_abs_diff_eq!(d.result.lmp[0], 10.0, epsilon = 1e-8);
    assert_abs_diff_eq!(d.result.lmp[1], 50.0, epsilon = 1e-8);

    // One extra MW of line capacity substitutes $50 energy with $10 energy.
    assert_eq!(d.result.binding, vec![ConstraintId::LineForward(1)]);
    assert_abs_diff_eq!(d.solution.duals_ub[0], -40.0, epsilon = 1e-8);

    // Reference angle is pinned.
    assert_abs_diff_eq!(d.result.theta[0], 0.0, epsilon = 1e-12);
    assert_abs_diff_eq!(d.result.total_load, 300.0, epsilon = 1e-12);
}

#[test]
fn threebus_dispatch_is_pinned() {
    let net = fixture("threebus");
    let d = solve_dcopf(&net, ObjectiveMode::Cost).unwrap();
    assert_optimal(&d.model.lp, &d.solution, "threebus");

    let r = &d.result;
    assert_abs_diff_eq!(r.cost, 2640.0, epsilon = 1e-6);
    assert_abs_diff_eq!(r.emissions, 72.504, epsilon = 1e-6);
    assert_abs_diff_eq!(r.curtailment, 0.0, epsilon = 1e-9);
    for (got, want) in r.p_g.iter().zip([0.0, 120.0, 150.0]) {
        assert_abs_diff_eq!(*got, want, epsilon = 1e-7);
    }
    // Uncongested: one system price set by the marginal coal unit.
    for lmp in &r.lmp {
        assert_abs_diff_eq!(*lmp, 22.0, epsilon = 1e-7);
    }
    for (got, want) in r.flows.iter().zip([7.5, -22.5, -7.5]) {
        assert_abs_diff_eq!(*got, want, epsilon = 1e-7);
    }
    assert_eq!(r.binding, vec![ConstraintId::GenMin(1), ConstraintId::GenMax(3)]);
}

#[test]
fn fivebus_dispatch_is_pinned() {
    let net = fixture("fivebus");
    let d = solve_dcopf(&net, ObjectiveMode::Cost).unwrap();
    assert_optimal(&d.model.lp, &d.solution, "fivebus");

    let r = &d.result;
    assert_abs_diff_eq!(r.cost, 5376.939502, epsilon = 1e-5);
    assert_abs_diff_eq!(r.emissions, 153.675160, epsilon = 1e-5);
    assert_abs_diff_eq!(r.curtailment, 76.761566, epsilon = 1e-5);
    let p_want = [180.0, 46.761566, 0.0, 93.238434, 70.0, 0.0];
    for (got, want) in r.p_g.iter().zip(p_want) {
        assert_abs_diff_eq!(*got, want, epsilon = 1e-5);
    }
    let lmp_want = [31.238434, 38.0, 46.113879, 0.0, 14.199288];
    for (got, want) in r.lmp.iter().zip(lmp_want) {
        assert_abs_diff_eq!(*got, want, epsilon = 1e-4);
    }
    let flow_want = [75.800712, 32.562278, -60.0, -16.761566, -6.761566, 57.437722];
    for (got, want) in r.flows.iter().zip(flow_want) {
        assert_abs_diff_eq!(*got, want, epsilon = 1e-5);
    }
    assert_eq!(
        r.binding,
        vec![
            ConstraintId::LineReverse(3),
            ConstraintId::GenMax(1),
            ConstraintId::GenMin(3),
            ConstraintId::GenMax(5),
            ConstraintId::GenMin(6),
        ]
    );

    // Flows respect thermal limits and balance holds at every bus.
    for (l, f) in net.lines.iter().zip(&r.flows) {
        assert!(f.abs() <= l.limit + 1e-6, "line {} overloaded: {f}", l.id);
    }
    let idx = net.bus_index();
    for (bi, bus) in net.buses.iter().enumerate() {
        let gen: f64 = net
            .gens
            .iter()
            .zip(&r.p_g)
            .filter(|(g, _)| g.bus == bus.id)
            .map(|(_, p)| p)
            .sum();
        let outflow: f64 = net
            .lines
            .iter()
            .zip(&r.flows)
            .map(|(l, f)| {
                if l.from == bus.id {
                    *f
                } else if l.to == bus.id {
                    -f
                } else {
                    0.0
                }
            })
            .sum();
        let load = net.demand_at(bus.id);
        assert_abs_diff_eq!(gen - outflow, load, epsilon = 1e-6);
        let _ = (bi, &idx);
    }
}

#[test]
fn repeated_clears_are_bit_identical() {
    let net = fixture("fivebus");
    let a = solve_dcopf(&net, ObjectiveMode::CarbonPriced { rho: 30.0 }).unwrap();
    let b = solve_dcopf(&net, ObjectiveMode::CarbonPriced { rho: 30.0 }).unwrap();
    assert_eq!(a.result.p_g, b.result.p_g);
    assert_eq!(a.result.theta, b.result.theta);
    assert_eq!(a.result.lmp, b.result.lmp);
    assert_eq!(a.result.cost.to_bits(), b.result.cost.to_bits());
    assert_eq!(a.solution.iterations, b.solution.iterations);
    assert_eq!(a.result.binding, b.result.binding);
}

#[test]
fn overload_is_reported_infeasible() {
    let mut net = congested_pair();
    // 900 MW of demand against 800 MW of capability.
    net.loads[0].demand = 900.0;
    match solve_dcopf(&net, ObjectiveMode::Cost) {
        Err(DcopfError::Lp(LpError::Infeasible { .. })) => {}
        other => panic!("expected infeasibility, got {other:?}"),
    }
}

#[test]
fn objective_modes_trade_cost_for_emissions() {
    let net = fixture("fivebus");
    let cost_run = solve_dcopf(&net, ObjectiveMode::Cost).unwrap().result;
    let priced = solve_dcopf(&net, ObjectiveMode::CarbonPriced { rho: 30.0 }).unwrap().result;
    let carbon = solve_dcopf(&net, ObjectiveMode::CarbonOnly).unwrap().result;

    let tol = 1e-6;
    // Production cost rises (weakly) as the carbon weight grows...
    assert!(cost_run.cost <= priced.cost + tol);
    assert!(priced.cost <= carbon.cost + tol);
    // ...while emissions fall (weakly).
    assert!(carbon.emissions <= priced.emissions + tol);
    assert!(priced.emissions <= cost_run.emissions + tol);

    // `cost` is always the production cost; `objective` is what was cleared.
    assert_abs_diff_eq!(cost_run.objective, cost_run.cost, epsilon = 1e-9);
    assert_abs_diff_eq!(
        priced.objective,
        priced.cost + 30.0 * priced.emissions,
        epsilon = 1e-6
    );
    assert_abs_diff_eq!(carbon.objective, carbon.emissions, epsilon = 1e-9);
}

#[test]
fn accounting_helpers_match_definitions() {
    let net = fixture("fivebus");
    let p = vec![10.0, 20.0, 5.0, 100.0, 30.0, 0.0];
    let want_e: f64 = net.gens.iter().zip(&p).map(|(g, x)| g.emission_rate * x).sum();
    assert_abs_diff_eq!(emissions_of(&net, &p), want_e, epsilon = 1e-12);
    // Wind (gen 4, cap 170) and solar (gen 5, cap 70) are curtailable.
    assert_abs_diff_eq!(curtailment_of(&net, &p), (170.0 - 100.0) + (70.0 - 30.0), epsilon = 1e-12);
}

#[test]
fn optimal_basis_is_square_and_consistent() {
    let net = fixture("fivebus");
    let d = solve_dcopf(&net, ObjectiveMode::Cost).unwrap();
    let basis = d.optimal_basis().unwrap();
    assert_eq!(basis.n(), d.model.lp.n_vars());
    let back = basis.solve(basis.rhs());
    for (a, b) in back.iter().zip(&d.solution.x) {
        assert_abs_diff_eq!(*a, *b, epsilon = 1e-7);
    }
}
