// Temporary fixture-tuning aid; deleted before release.
use gridshift_core::net::io::Scenario;
use gridshift_core::report::{check_orderings, compare_models, run_pipeline};
use gridshift_core::shifting::{
    solve_co_optimized, Flexibility, ObjectiveVariant, SignalKind,
};

#[test]
fn profile_shifting() {
    let dir = format!("{}/fixtures/fivebus", env!("CARGO_MANIFEST_DIR"));
    let (sc, base_dir) = Scenario::from_file(format!("{dir}/scenario.toml")).unwrap();
    let net = sc.realize(&base_dir).unwrap();
    let flex = Flexibility::from(&sc.fleet);

    for variant in [ObjectiveVariant::Cost, ObjectiveVariant::Balance, ObjectiveVariant::Co2] {
        for signal in [SignalKind::Marginal, SignalKind::Average] {
            let out = run_pipeline(&net, &flex, variant, signal, sc.market.rho).unwrap();
            println!(
                "m1 {}/{}: delta_pd {:?} transfers {:?} shifted {:.3}",
                variant.as_str(),
                signal.as_str(),
                out.plan.delta_pd.iter().map(|v| (v * 1e6).round() / 1e6).collect::<Vec<_>>(),
                out.plan
                    .transfers
                    .iter()
                    .map(|t| (t.from_bus, t.to_bus, (t.mw * 1e6).round() / 1e6))
                    .collect::<Vec<_>>(),
                out.plan.total_shifted_mw()
            );
            println!(
                "   shifted cost {:.6} emissions {:.6} curtail {:.6}",
                out.shifted.cost, out.shifted.emissions, out.shifted.curtailment
            );
            if let Some(p) = &out.prediction {
                println!(
                    "   pred dcost {:.6} actual {:.6} | dems {:.6} actual {:.6} | dcurt {:.6} actual {:.6}",
                    p.predicted_cost,
                    p.actual_cost,
                    p.predicted_emissions,
                    p.actual_emissions,
                    p.predicted_curtailment,
                    p.actual_curtailment
                );
                println!("   gen_deltas {:?}", p.gen_deltas);
            }
        }
    }

    for variant in [ObjectiveVariant::Cost, ObjectiveVariant::Balance, ObjectiveVariant::Co2] {
        let c = solve_co_optimized(&net, &flex, variant, sc.market.rho).unwrap();
        println!(
            "m3 {}: delta_pd {:?} cost {:.6} emissions {:.6} curtail {:.6} lp_obj {:.6}",
            variant.as_str(),
            c.plan.delta_pd.iter().map(|v| (v * 1e6).round() / 1e6).collect::<Vec<_>>(),
            c.result.cost,
            c.result.emissions,
            c.result.curtailment,
            c.lp_objective
        );
    }

    let report = compare_models(&net, &flex, sc.market.rho).unwrap();
    println!("{}", report.to_csv_string());
    for check in check_orderings(&report) {
        println!(
            "check {} lhs {:.6} rhs {:.6} ok {}",
            check.name, check.lhs, check.rhs, check.ok
        );
    }
}
