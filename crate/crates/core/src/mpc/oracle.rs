//! Exhaustive grid search used to check the solver.
//!
//! Every window's grid pairs are reduced to the ones not dominated by a
//! cheaper pair: a decision only enters the objective through its VoI and
//! its drain, and less drain never lowers a later SoC. The reduced sequences
//! are then enumerated depth-first with SoC propagation, pruning on the SoC
//! floor and on an upper bound (best remaining VoI plus the SoE of an idle
//! continuation). The result is the exact grid optimum.

use alloc::vec;
use alloc::vec::Vec;

use super::{horizon_objective, soc_trajectory, Beliefs, Decision, MpcConfig, NodeModel, Plan};
use crate::energy::{self, apply_charge, SocState};
use crate::error::{positive, unit_interval, Error, Result};
use crate::math::floor;
use crate::voi;

/// Largest `(f_s_max / step + 1)^2 · (H + 1)` the oracle accepts.
pub const SEARCH_LIMIT: f64 = 1e8;

#[derive(Debug, Clone, Copy)]
struct Candidate {
    decision: Decision,
    drain: f64,
    score: f64,
}

struct Search<'a> {
    frontiers: Vec<Vec<Candidate>>,
    harvest: Vec<f64>,
    idle_drain: f64,
    soe_weight: Vec<f64>,
    // Best attainable VoI score from window k to the end.
    voi_tail: Vec<f64>,
    model: &'a NodeModel,
    best: f64,
    best_path: Vec<usize>,
    path: Vec<usize>,
}

impl Search<'_> {
    fn n(&self) -> usize {
        self.frontiers.len()
    }

    /// SoE collected by idling from window `k` on, or `None` if even idling
    /// crosses the floor.
    fn idle_bound(&self, k: usize, z: SocState) -> Option<f64> {
        let b = &self.model.battery;
        let mut z = z;
        let mut sum = 0.0;
        for m in k..self.n() {
            let t = apply_charge(z, self.idle_drain, self.harvest[m], b);
            if t.unfloored(b) < b.z_min() {
                return None;
            }
            z = t.next;
            sum += self.soe_weight[m] * energy::soe_from_soc(z.value(), b).unwrap_or(0.0);
        }
        Some(sum)
    }

    fn dfs(&mut self, k: usize, z: SocState, partial: f64) {
        let b = &self.model.battery;
        let Some(idle_soe) = self.idle_bound(k, z) else {
            return;
        };
        let harvest = self.harvest[k];
        let frontier = &self.frontiers[k];
        // Candidates are sorted by drain, so feasibility is a prefix.
        let feasible = frontier.partition_point(|c| apply_charge(z, c.drain, harvest, b).unfloored(b) >= b.z_min());
        let rest = self.voi_tail.get(k + 1).copied().unwrap_or(0.0);
        for j in (0..feasible).rev() {
            let c = self.frontiers[k][j];
            if partial + c.score + idle_soe + rest <= self.best {
                break;
            }
            let next = apply_charge(z, c.drain, harvest, b).next;
            let gain = c.score + self.soe_weight[k] * energy::soe_from_soc(next.value(), b).unwrap_or(0.0);
            self.path.push(j);
            if k + 1 == self.n() {
                if partial + gain > self.best {
                    self.best = partial + gain;
                    self.best_path.clone_from(&self.path);
                }
            } else {
                self.dfs(k + 1, next, partial + gain);
            }
            self.path.pop();
        }
    }
}

/// Best plan over decisions whose frequencies are multiples of `grid_step`.
pub fn brute_force_plan(
    z0: f64,
    beliefs: &Beliefs,
    config: &MpcConfig,
    model: &NodeModel,
    grid_step: f64,
) -> Result<Plan> {
    config.validate()?;
    model.validate()?;
    model.check_against(config)?;
    unit_interval("z0", z0)?;
    positive("grid_step", grid_step)?;
    let n = config.windows();
    beliefs.validate(n)?;

    let levels = floor(config.f_s_max / grid_step) + 1.0;
    let nodes = levels * levels * n as f64;
    if nodes > SEARCH_LIMIT {
        return Err(Error::SearchTooLarge {
            nodes,
            limit: SEARCH_LIMIT,
        });
    }

    let w = config.weights;
    let mut frontiers = Vec::with_capacity(n);
    for k in 0..n {
        let disc = config.discount_factor(k);
        let x = beliefs.process_forecast[k];
        let mut pairs = Vec::new();
        let steps_s = floor(config.f_s_max / grid_step) as usize;
        for i in 0..=steps_s {
            let f_s = i as f64 * grid_step;
            let steps_t = floor(config.f_t_max.min(f_s) / grid_step) as usize;
            for j in 0..=steps_t {
                let f_t = j as f64 * grid_step;
                let Ok(drain) = energy::drain_charge(f_s, f_t, &model.profile, config.delta) else {
                    continue;
                };
                let v = voi::value_of_information(x, f_s, f_t, &model.voi)?;
                pairs.push(Candidate {
                    decision: Decision::new(f_s, f_t),
                    drain,
                    score: disc * w.w_i * voi::normalize_voi(v, &model.voi),
                });
            }
        }
        pairs.sort_by(|a, b| a.drain.total_cmp(&b.drain).then(b.score.total_cmp(&a.score)));
        let mut frontier: Vec<Candidate> = Vec::new();
        for c in pairs {
            if frontier.last().map_or(true, |last| c.score > last.score) {
                frontier.push(c);
            }
        }
        frontiers.push(frontier);
    }

    let harvest = beliefs
        .harvest_forecast
        .iter()
        .map(|&irr| energy::harvest_charge(irr, &model.harvest, &model.battery, config.delta))
        .collect::<Result<Vec<_>>>()?;
    let mut voi_tail = vec![0.0; n + 1];
    for k in (0..n).rev() {
        voi_tail[k] = voi_tail[k + 1] + frontiers[k].last().map_or(0.0, |c| c.score);
    }
    voi_tail.pop();

    let mut search = Search {
        idle_drain: energy::drain_charge(0.0, 0.0, &model.profile, config.delta)?,
        frontiers,
        harvest,
        soe_weight: (0..n).map(|k| config.discount_factor(k) * w.w_e).collect(),
        voi_tail,
        model,
        best: f64::NEG_INFINITY,
        best_path: Vec::new(),
        path: Vec::with_capacity(n),
    };
    let start = SocState::new(z0)?;
    search.dfs(0, start, 0.0);

    if search.best == f64::NEG_INFINITY {
        let idle = vec![Decision::ZERO; n];
        return Ok(Plan {
            projected_soc: soc_trajectory(&idle, z0, beliefs, config, model)?,
            objective_value: f64::NEG_INFINITY,
            decisions: idle,
            solver_iterations: 0,
            converged: false,
            infeasible_idle: true,
        });
    }
    let decisions: Vec<Decision> = search
        .best_path
        .iter()
        .enumerate()
        .map(|(k, &j)| search.frontiers[k][j].decision)
        .collect();
    Ok(Plan {
        objective_value: horizon_objective(&decisions, z0, beliefs, config, model)?,
        projected_soc: soc_trajectory(&decisions, z0, beliefs, config, model)?,
        decisions,
        solver_iterations: 0,
        converged: true,
        infeasible_idle: false,
    })
}

/// How much the continuous optimum can exceed the grid optimum.
///
/// Rounding every frequency of the continuous optimum down to the grid keeps
/// it feasible and moves each coordinate by less than one step, so the gap
/// is at most one step times the sum of per-coordinate Lipschitz constants.
pub fn grid_resolution_bound(config: &MpcConfig, model: &NodeModel, grid_step: f64) -> f64 {
    let p = &model.voi;
    let prof = &model.profile;
    let battery = &model.battery;
    let n = config.windows();
    let w = config.weights;
    let max_slope = battery.curve().max_voltage() / battery.denominator_energy();
    let charge = config.delta * (prof.sample_charge() + prof.transmission_charge()) / battery.capacity_as();
    let mut tail = 0.0;
    let mut total = 0.0;
    for k in (0..n).rev() {
        let disc = config.discount_factor(k);
        tail += disc;
        let voi_lip = disc * w.w_i * (p.alpha_r * p.delta + p.d_o * p.alpha_d) / (1.0 + p.d_o);
        total += voi_lip + w.w_e * max_slope * charge * tail;
    }
    total * grid_step
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mpc::{horizon_objective, Weights};
    use alloc::vec;

    fn setup(h: usize) -> (MpcConfig, NodeModel) {
        let mut c = MpcConfig::flood_monitoring();
        c.horizon = h;
        (c, NodeModel::flood_monitoring())
    }

    #[test]
    fn single_window_matches_plain_argmax() {
        let (c, m) = setup(0);
        let b = Beliefs::constant(1, 2.7, 80.0);
        let z0 = 0.4;
        let plan = brute_force_plan(z0, &b, &c, &m, 1.0).unwrap();
        let mut best = f64::NEG_INFINITY;
        for fs in 0..=120 {
            for ft in 0..=fs {
                let d = [Decision::new(fs as f64, ft as f64)];
                if let Ok(j) = horizon_objective(&d, z0, &b, &c, &m) {
                    best = best.max(j);
                }
            }
        }
        assert_eq!(plan.objective_value, best);
    }

    #[test]
    fn two_windows_match_full_enumeration_on_coarse_grid() {
        let (c, m) = setup(1);
        let b = Beliefs {
            process_forecast: vec![2.9, 3.3],
            harvest_forecast: vec![0.0, 50.0],
        };
        let z0 = 0.05;
        let step = 5.0;
        let plan = brute_force_plan(z0, &b, &c, &m, step).unwrap();
        let grid: Vec<Decision> = (0..=24)
            .flat_map(|i| (0..=i).map(move |j| Decision::new(i as f64 * step, j as f64 * step)))
            .collect();
        let mut best = f64::NEG_INFINITY;
        for a in &grid {
            for bb in &grid {
                if let Ok(j) = horizon_objective(&[*a, *bb], z0, &b, &c, &m) {
                    best = best.max(j);
                }
            }
        }
        assert!((plan.objective_value - best).abs() < 1e-12, "{} vs {best}", plan.objective_value);
    }

    #[test]
    fn finer_grid_never_worse() {
        let (c, m) = setup(2);
        let b = Beliefs {
            process_forecast: vec![3.1, 2.4, 3.4],
            harvest_forecast: vec![0.0, 0.0, 100.0],
        };
        let coarse = brute_force_plan(0.03, &b, &c, &m, 4.0).unwrap();
        let mid = brute_force_plan(0.03, &b, &c, &m, 2.0).unwrap();
        let fine = brute_force_plan(0.03, &b, &c, &m, 1.0).unwrap();
        assert!(mid.objective_value >= coarse.objective_value);
        assert!(fine.objective_value >= mid.objective_value);
    }

    #[test]
    fn refuses_oversized_grid() {
        let (mut c, m) = setup(11);
        c.f_s_max = 10_000.0;
        c.f_t_max = 10.0;
        let b = Beliefs::constant(12, 1.0, 0.0);
        assert!(matches!(
            brute_force_plan(0.5, &b, &c, &m, 1.0),
            Err(Error::SearchTooLarge { .. })
        ));
    }

    #[test]
    fn idle_infeasible_reported() {
        let (c, m) = setup(2);
        let b = Beliefs::constant(3, 3.0, 0.0);
        let plan = brute_force_plan(m.battery.z_min(), &b, &c, &m, 1.0).unwrap();
        assert!(plan.infeasible_idle);
    }

    #[test]
    fn resolution_bound_scales_with_step() {
        let (mut c, m) = setup(2);
        c.weights = Weights::equal();
        let a = grid_resolution_bound(&c, &m, 1.0);
        let b = grid_resolution_bound(&c, &m, 2.0);
        assert!(a > 0.0);
        assert!((b - 2.0 * a).abs() < 1e-15);
    }
}
