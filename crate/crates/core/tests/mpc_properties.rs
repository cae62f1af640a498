use ctxnode_core::energy::{self, BatteryModel, OcvCurve, SocState};
use ctxnode_core::mpc::{self, Beliefs, Decision, MpcConfig, NodeModel, Plan, Weights};
use proptest::prelude::*;
use proptest::test_runner::{Config, RngSeed};

fn config() -> Config {
    Config {
        cases: 48,
        failure_persistence: None,
        rng_seed: RngSeed::Fixed(0x5eed),
        ..Config::default()
    }
}

#[derive(Debug, Clone)]
struct Instance {
    config: MpcConfig,
    beliefs: Beliefs,
    z0: f64,
}

fn instance(max_horizon: usize) -> impl Strategy<Value = Instance> {
    (0..=max_horizon, 0.0..=1.0f64, 0.0..0.2f64, 0.0..1.0f64).prop_flat_map(|(h, w, zeta, z0)| {
        let n = h + 1;
        (
            prop::collection::vec(0.0..4.5f64, n),
            prop::collection::vec(prop_oneof![Just(0.0), 0.0..1000.0f64], n),
        )
            .prop_map(move |(x, irr)| {
                let mut config = MpcConfig::flood_monitoring();
                config.horizon = h;
                config.discount = zeta;
                config.weights = Weights { w_i: w, w_e: 1.0 - w };
                Instance {
                    config,
                    beliefs: Beliefs {
                        process_forecast: x,
                        harvest_forecast: irr,
                    },
                    z0,
                }
            })
    })
}

fn total_drain(plan: &Plan, model: &NodeModel) -> f64 {
    plan.decisions
        .iter()
        .map(|d| energy::drain_charge(d.f_s, d.f_t, &model.profile, 1.0).unwrap())
        .sum()
}

fn flat_model() -> NodeModel {
    let mut m = NodeModel::flood_monitoring();
    m.battery = BatteryModel::new(2.75, 0.015, 3.6, OcvCurve::constant(3.7).unwrap()).unwrap();
    m
}

proptest! {
    #![proptest_config(config())]

    #[test]
    fn plans_satisfy_every_constraint(inst in instance(11)) {
        let m = NodeModel::flood_monitoring();
        let plan = mpc::solve(inst.z0, &inst.beliefs, &inst.config, &m).unwrap();
        prop_assert_eq!(plan.decisions.len(), inst.config.windows());
        if !plan.infeasible_idle {
            let r = mpc::constraint_residuals(&plan.decisions, inst.z0, &inst.beliefs, &inst.config, &m).unwrap();
            for (k, w) in r.iter().enumerate() {
                prop_assert!(w.min() >= -1e-9, "window {}: {:?}", k, w);
            }
        }
    }

    #[test]
    fn solver_within_grid_bound(inst in instance(1)) {
        let m = NodeModel::flood_monitoring();
        let plan = mpc::solve(inst.z0, &inst.beliefs, &inst.config, &m).unwrap();
        let grid = mpc::brute_force_plan(inst.z0, &inst.beliefs, &inst.config, &m, 1.0).unwrap();
        prop_assert_eq!(plan.infeasible_idle, grid.infeasible_idle);
        if !plan.infeasible_idle {
            let bound = mpc::grid_resolution_bound(&inst.config, &m, 1.0);
            prop_assert!(plan.objective_value >= grid.objective_value - bound);
        }
    }

    #[test]
    fn undiscounted_objective_is_plain_sum(inst in instance(11), fracs in prop::collection::vec((0.0..1.0f64, 0.0..1.0f64), 12)) {
        let m = NodeModel::flood_monitoring();
        let mut c = inst.config;
        c.discount = 0.0;
        let n = c.windows();
        // Small decisions keep the plan above the floor.
        let decisions: Vec<Decision> = fracs[..n].iter().map(|&(a, b)| Decision::new(2.0 * a, 2.0 * a * b)).collect();
        let z0 = 0.5 + 0.5 * inst.z0;
        let mut z = SocState::new(z0).unwrap();
        let mut sum = 0.0;
        for (k, d) in decisions.iter().enumerate() {
            z = energy::soc_step(z, d.f_s, d.f_t, &m.profile, &m.harvest, &m.battery, inst.beliefs.harvest_forecast[k], 1.0)
                .unwrap()
                .next;
            sum += mpc::window_utility(inst.beliefs.process_forecast[k], *d, z, &m.voi, &m.battery, &c.weights).unwrap();
        }
        let j = mpc::horizon_objective(&decisions, z0, &inst.beliefs, &c, &m).unwrap();
        prop_assert_eq!(j, sum);
    }

    /// Re-planning one window later over the remaining windows reproduces
    /// the tail of the original plan.
    #[test]
    fn receding_horizon_consistency(inst in instance(5)) {
        prop_assume!(inst.config.horizon >= 1);
        let m = NodeModel::flood_monitoring();
        let mut c = inst.config;
        c.solver.tolerance = 1e-11;
        c.solver.max_iterations = 100_000;
        let plan = mpc::solve(inst.z0, &inst.beliefs, &c, &m).unwrap();
        prop_assume!(!plan.infeasible_idle);
        let mut tail = c;
        tail.horizon -= 1;
        let later = Beliefs {
            process_forecast: inst.beliefs.process_forecast[1..].to_vec(),
            harvest_forecast: inst.beliefs.harvest_forecast[1..].to_vec(),
        };
        let again = mpc::solve(plan.projected_soc[1], &later, &tail, &m).unwrap();
        let (a, b) = (again.first(), plan.decisions[1]);
        prop_assert!((a.f_s - b.f_s).abs() <= 1e-3 && (a.f_t - b.f_t).abs() <= 1e-3, "{:?} vs {:?}", a, b);
    }

    /// With a constant OCV the stored energy has a constant marginal value,
    /// and more of it never buys less activity.
    #[test]
    fn flat_curve_drain_monotone_in_initial_charge(inst in instance(5), dz in 0.0..1.0f64) {
        let m = flat_model();
        let mut c = inst.config;
        c.solver.tolerance = 1e-11;
        c.solver.max_iterations = 100_000;
        let z_lo = 0.05 + 0.95 * inst.z0;
        let z_hi = z_lo + dz * (1.0 - z_lo);
        let lo = mpc::solve(z_lo, &inst.beliefs, &c, &m).unwrap();
        let hi = mpc::solve(z_hi, &inst.beliefs, &c, &m).unwrap();
        prop_assume!(!lo.infeasible_idle);
        prop_assert!(total_drain(&hi, &m) >= total_drain(&lo, &m) - 1e-3, "{} < {}", total_drain(&hi, &m), total_drain(&lo, &m));
    }

    /// When harvest covers any activity the battery stays full, SoE is
    /// fixed, and a higher threat can only raise the optimum.
    #[test]
    fn threat_raises_optimum_when_energy_is_free(inst in instance(5), bump in 0.0..2.0f64) {
        let m = NodeModel::flood_monitoring();
        let mut b = inst.beliefs.clone();
        b.harvest_forecast.iter_mut().for_each(|g| *g = 1000.0);
        let low = mpc::solve(1.0, &b, &inst.config, &m).unwrap();
        b.process_forecast.iter_mut().for_each(|x| *x += bump);
        let high = mpc::solve(1.0, &b, &inst.config, &m).unwrap();
        prop_assert!(high.objective_value >= low.objective_value - 1e-9);
    }
}

fn single_window(w_i: f64) -> MpcConfig {
    let mut c = MpcConfig::flood_monitoring();
    c.horizon = 0;
    c.weights = Weights { w_i, w_e: 1.0 - w_i };
    c
}

/// The Li-ion OCV rises with SoC, so a unit of charge is worth more SoE at
/// high SoC and a fuller battery spends less. Exact grid optima.
#[test]
fn fuller_battery_can_spend_less() {
    let m = NodeModel::flood_monitoring();
    let c = single_window(0.5);
    let b = Beliefs::constant(1, 2.0, 0.0);
    let half = mpc::brute_force_plan(0.5, &b, &c, &m, 0.25).unwrap();
    let full = mpc::brute_force_plan(0.95, &b, &c, &m, 0.25).unwrap();
    assert!(total_drain(&full, &m) < total_drain(&half, &m));
    let solved_half = mpc::solve(0.5, &b, &c, &m).unwrap();
    let solved_full = mpc::solve(0.95, &b, &c, &m).unwrap();
    assert!(total_drain(&solved_full, &m) < total_drain(&solved_half, &m));
}

/// With the battery nearly at its floor, activity is capped by energy
/// rather than chosen, and at capped low frequencies a higher threat lowers
/// the VoI. Exact grid optima.
#[test]
fn threat_can_lower_optimum_when_energy_binds() {
    let m = NodeModel::flood_monitoring();
    let c = single_window(1.0);
    // Room for about 10 A·s of activity beyond the sleep current.
    let z0 = m.battery.z_min() + (5.148 + 10.0) / m.battery.capacity_as();
    let calm = mpc::brute_force_plan(z0, &Beliefs::constant(1, 2.0, 0.0), &c, &m, 0.05).unwrap();
    let flood = mpc::brute_force_plan(z0, &Beliefs::constant(1, 3.0, 0.0), &c, &m, 0.05).unwrap();
    assert!(flood.objective_value < calm.objective_value - 0.05);
}
