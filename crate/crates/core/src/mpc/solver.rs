//! Projected gradient ascent for the horizon program.
//!
//! The SoC recursion clamps at full charge, which makes the objective
//! nonsmooth. The solver removes the clamp by adding one spill variable per
//! window (harvest thrown away at full charge). With spill, the SoC is affine
//! in the decisions and the feasible set is a polytope:
//!
//! - per window: `0 <= f_t <= f_s <= f_s_max`, `f_t <= f_t_max`, the duty
//!   cycle, and `spill >= 0`;
//! - per prefix of windows: the SoC at the end stays in `[z_min, 1]`.
//!
//! Because the SoE is increasing in SoC, the best spill for fixed decisions
//! is the smallest one that keeps the SoC at or below 1, which is exactly the
//! clamp. Plans are therefore scored with the clamped recursion.
//!
//! Iterates are projected onto the polytope (see `projection`); the step is
//! a Barzilai-Borwein guess refined by Armijo backtracking along the
//! projection arc. Two starts are used, idle and flat-out, and the better
//! plan wins, since the SoE term is convex in SoC and the objective is only
//! nearly concave.

use alloc::vec;
use alloc::vec::Vec;

use super::projection::{Dual, Polytope};
use super::{horizon_objective, soc_trajectory, Beliefs, Decision, MpcConfig, NodeModel, Plan};
use crate::energy::{self, BatteryModel};
use crate::error::{unit_interval, Result};
use crate::voi;
use crate::SECONDS_PER_HOUR;

const PROJECTION_TOL: f64 = 1e-12;
const PROJECTION_SWEEPS: usize = 20_000;
const ARMIJO: f64 = 1e-4;
const MIN_STEP: f64 = 1e-6;
const MAX_STEP: f64 = 1e8;
// SoC head-room kept above the floor when repairing a plan.
const FLOOR_MARGIN: f64 = 1e-12;

struct Problem<'a> {
    n: usize,
    threat: Vec<f64>,
    discount: Vec<f64>,
    harvest: Vec<f64>,
    idle: f64,
    sample: f64,
    transmit: f64,
    // Spill is carried in units of `spill_scale` A·s so that all variables
    // live on comparable scales.
    spill_scale: f64,
    q0: f64,
    q_cap: f64,
    q_min: f64,
    config: &'a MpcConfig,
    model: &'a NodeModel,
    polytope: Polytope,
}

impl<'a> Problem<'a> {
    fn new(z0: f64, beliefs: &Beliefs, config: &'a MpcConfig, model: &'a NodeModel) -> Result<Self> {
        let n = config.windows();
        let battery = &model.battery;
        let delta = config.delta;
        let threat = beliefs
            .process_forecast
            .iter()
            .map(|&x| voi::threat_rating(x, &model.voi))
            .collect::<Result<Vec<_>>>()?;
        let harvest = beliefs
            .harvest_forecast
            .iter()
            .map(|&irr| energy::harvest_charge(irr, &model.harvest, battery, delta))
            .collect::<Result<Vec<_>>>()?;
        let discount = (0..n).map(|k| config.discount_factor(k)).collect();
        let profile = &model.profile;
        let sample = delta * profile.sample_charge();
        let transmit = delta * profile.transmission_charge();
        let idle = delta * profile.idle_charge_per_hour();
        let q_cap = battery.capacity_as();
        let mut p = Self {
            n,
            threat,
            discount,
            harvest,
            idle,
            sample,
            transmit,
            spill_scale: sample,
            q0: z0 * q_cap,
            q_cap,
            q_min: battery.z_min() * q_cap,
            config,
            model,
            polytope: Polytope::new(3 * n),
        };
        p.build_constraints();
        Ok(p)
    }

    fn build_constraints(&mut self) {
        let c = self.config;
        let prof = &self.model.profile;
        let mut poly = Polytope::new(3 * self.n);
        let mut prefix: Vec<(usize, f64)> = Vec::with_capacity(3 * self.n);
        let mut net_harvest = 0.0;
        for k in 0..self.n {
            let (s, t, u) = (3 * k, 3 * k + 1, 3 * k + 2);
            poly.push(&[(t, -1.0)], 0.0);
            poly.push(&[(t, 1.0), (s, -1.0)], 0.0);
            poly.push(&[(s, 1.0)], c.f_s_max);
            poly.push(&[(t, 1.0)], c.f_t_max);
            poly.push(&[(s, prof.d_sense), (t, prof.d_transmit)], SECONDS_PER_HOUR);
            poly.push(&[(u, -1.0)], 0.0);

            prefix.push((s, self.sample));
            prefix.push((t, self.transmit));
            prefix.push((u, self.spill_scale));
            net_harvest += self.harvest[k] - self.idle;
            // q(k+1) >= q_min
            poly.push(&prefix, self.q0 - self.q_min + net_harvest);
            // q(k+1) <= q_cap
            let negated: Vec<(usize, f64)> = prefix.iter().map(|&(i, a)| (i, -a)).collect();
            poly.push(&negated, self.q_cap - self.q0 - net_harvest);
        }
        self.polytope = poly;
    }

    fn battery(&self) -> &BatteryModel {
        &self.model.battery
    }

    /// Objective on the spill formulation; fills `grad` when given.
    fn evaluate(&self, y: &[f64], grad: Option<&mut [f64]>) -> f64 {
        let p = &self.model.voi;
        let w = self.config.weights;
        let norm = 1.0 / (1.0 + p.d_o);
        let battery = self.battery();
        let mut q = self.q0;
        let mut total = 0.0;
        let mut slopes = Vec::new();
        let want_grad = grad.is_some();
        if want_grad {
            slopes.resize(self.n, 0.0);
        }
        for k in 0..self.n {
            let (fs, ft, u) = (y[3 * k], y[3 * k + 1], y[3 * k + 2]);
            q += self.harvest[k] - self.idle - self.sample * fs - self.transmit * ft - self.spill_scale * u;
            let z = q / self.q_cap;
            let v = voi::voi_with_threat(self.threat[k], fs, ft, p);
            total += self.discount[k] * (w.w_i * (v + p.d_o) * norm + w.w_e * battery.soe_extended(z));
            if want_grad {
                slopes[k] = self.discount[k] * w.w_e * battery.soe_slope(z) / self.q_cap;
            }
        }
        if let Some(g) = grad {
            // Charge used in window k lowers the SoC of every later window.
            let mut tail = 0.0;
            for k in (0..self.n).rev() {
                tail += slopes[k];
                let (fs, ft) = (y[3 * k], y[3 * k + 1]);
                let (dvs, dvt) = voi::voi_gradient(self.threat[k], fs, ft, p);
                let scale = self.discount[k] * w.w_i * norm;
                g[3 * k] = scale * dvs - tail * self.sample;
                g[3 * k + 1] = scale * dvt - tail * self.transmit;
                g[3 * k + 2] = -tail * self.spill_scale;
            }
        }
        total
    }

    fn decisions(&self, y: &[f64]) -> Vec<Decision> {
        (0..self.n).map(|k| Decision::new(y[3 * k], y[3 * k + 1])).collect()
    }

    /// Variables for `decisions` with the spill the clamp would produce.
    fn lift(&self, decisions: &[Decision]) -> Vec<f64> {
        let mut y = vec![0.0; 3 * self.n];
        let mut q = self.q0;
        for (k, d) in decisions.iter().enumerate() {
            y[3 * k] = d.f_s;
            y[3 * k + 1] = d.f_t;
            q += self.harvest[k] - self.idle - self.sample * d.f_s - self.transmit * d.f_t;
            if q > self.q_cap {
                y[3 * k + 2] = (q - self.q_cap) / self.spill_scale;
                q = self.q_cap;
            }
        }
        y
    }

    /// Makes a plan exactly feasible: clips each window into its polygon,
    /// then walks the horizon shrinking any window that would leave too
    /// little charge for idling through the rest of the horizon.
    fn repair(&self, decisions: &mut [Decision]) {
        let c = self.config;
        let prof = &self.model.profile;
        for d in decisions.iter_mut() {
            let f_s = d.f_s.clamp(0.0, c.f_s_max);
            let f_t = d.f_t.clamp(0.0, c.f_t_max.min(f_s));
            let busy = prof.busy_seconds_per_hour(f_s, f_t);
            let shrink = if busy > SECONDS_PER_HOUR {
                SECONDS_PER_HOUR / busy
            } else {
                1.0
            };
            *d = Decision::new(f_s * shrink, f_t * shrink);
        }
        let floor = self.q_min + FLOOR_MARGIN * self.q_cap;
        // reserve[k]: least charge at the start of window k from which idling
        // keeps every later window above the floor.
        let mut reserve = vec![floor; self.n + 1];
        for k in (0..self.n).rev() {
            reserve[k] = floor.max(reserve[k + 1] + self.idle - self.harvest[k]);
        }
        let mut q = self.q0;
        for (k, d) in decisions.iter_mut().enumerate() {
            let active = self.sample * d.f_s + self.transmit * d.f_t;
            let allowance = q + self.harvest[k] - self.idle - reserve[k + 1];
            if active > allowance {
                let shrink = if active > 0.0 { allowance.max(0.0) / active } else { 0.0 };
                *d = Decision::new(d.f_s * shrink, d.f_t * shrink);
            }
            let used = self.sample * d.f_s + self.transmit * d.f_t;
            q = (q + self.harvest[k] - self.idle - used).min(self.q_cap);
        }
    }

    fn flat_out(&self) -> Vec<Decision> {
        let c = self.config;
        let prof = &self.model.profile;
        let f_s = c.f_s_max;
        let f_t = c.f_t_max.min(f_s);
        let busy = prof.busy_seconds_per_hour(f_s, f_t);
        let shrink = if busy > SECONDS_PER_HOUR {
            SECONDS_PER_HOUR / busy
        } else {
            1.0
        };
        vec![Decision::new(f_s * shrink, f_t * shrink); self.n]
    }

    fn project(&self, p: &[f64], dual: &mut Dual, out: &mut [f64]) {
        self.polytope.project(p, dual, out, PROJECTION_TOL, PROJECTION_SWEEPS);
    }

    /// Runs projected gradient ascent from a feasible point.
    fn ascend(&self, mut y: Vec<f64>) -> Ascent {
        let opts = self.config.solver;
        let dim = y.len();
        let mut g = vec![0.0; dim];
        let mut j = self.evaluate(&y, Some(&mut g));
        let mut trial = vec![0.0; dim];
        let mut trial_g = vec![0.0; dim];
        let mut probe = vec![0.0; dim];
        let mut shifted = vec![0.0; dim];
        let mut dual_step = self.polytope.dual();
        // Dual of the last accepted projection; trials restart from it so a
        // rejected long step cannot leave oversized multipliers behind.
        let mut dual_accepted = self.polytope.dual();
        let mut dual_probe = self.polytope.dual();
        let mut step = (10.0 / inf_norm(&g).max(1e-12)).clamp(MIN_STEP, MAX_STEP);
        let mut iterations = 0;
        let mut converged = false;

        while iterations < opts.max_iterations {
            for i in 0..dim {
                shifted[i] = y[i] + g[i];
            }
            self.project(&shifted, &mut dual_probe, &mut probe);
            let stationarity = probe.iter().zip(&y).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
            if stationarity < opts.tolerance {
                converged = true;
                break;
            }
            iterations += 1;

            let mut accepted = false;
            let mut t = step;
            for _ in 0..60 {
                for i in 0..dim {
                    shifted[i] = y[i] + t * g[i];
                }
                dual_step.clone_from(&dual_accepted);
                self.project(&shifted, &mut dual_step, &mut trial);
                let jt = self.evaluate(&trial, Some(&mut trial_g));
                let ascent: f64 = g.iter().zip(trial.iter().zip(&y)).map(|(gi, (a, b))| gi * (a - b)).sum();
                if jt >= j + ARMIJO * ascent && jt >= j {
                    accepted = true;
                    let mut ss = 0.0;
                    let mut sy = 0.0;
                    for i in 0..dim {
                        let s = trial[i] - y[i];
                        ss += s * s;
                        sy += s * (trial_g[i] - g[i]);
                    }
                    step = if sy < 0.0 { ss / -sy } else { 4.0 * t };
                    step = step.clamp(MIN_STEP, MAX_STEP);
                    dual_accepted.clone_from(&dual_step);
                    let moved = ss > 0.0;
                    core::mem::swap(&mut y, &mut trial);
                    core::mem::swap(&mut g, &mut trial_g);
                    let improved = jt - j;
                    j = jt;
                    if !moved || improved <= 4.0 * f64::EPSILON * j.abs().max(1.0) && ss < 1e-20 {
                        accepted = false;
                    }
                    break;
                }
                t *= 0.5;
            }
            if !accepted {
                // No representable progress left along the projection arc.
                break;
            }
        }
        Ascent {
            y,
            iterations,
            converged,
        }
    }
}

struct Ascent {
    y: Vec<f64>,
    iterations: usize,
    converged: bool,
}

fn inf_norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

/// Discounted utility with the SoE clamped at 0; used for idle plans that
/// breach the floor.
fn objective_unchecked(decisions: &[Decision], z0: f64, beliefs: &Beliefs, config: &MpcConfig, model: &NodeModel) -> Result<f64> {
    let traj = soc_trajectory(decisions, z0, beliefs, config, model)?;
    let mut total = 0.0;
    for (k, d) in decisions.iter().enumerate() {
        let v = voi::value_of_information(beliefs.process_forecast[k], d.f_s, d.f_t, &model.voi)?;
        let soe = energy::soe_from_soc(traj[k + 1], &model.battery)?;
        total += config.discount_factor(k)
            * (config.weights.w_i * voi::normalize_voi(v, &model.voi) + config.weights.w_e * soe);
    }
    Ok(total)
}

/// Optimal frequency plan for the next `H + 1` windows starting at SoC `z0`.
pub fn solve(z0: f64, beliefs: &Beliefs, config: &MpcConfig, model: &NodeModel) -> Result<Plan> {
    config.validate()?;
    model.validate()?;
    model.check_against(config)?;
    unit_interval("z0", z0)?;
    let n = config.windows();
    beliefs.validate(n)?;

    let idle = vec![Decision::ZERO; n];
    let idle_soc = soc_trajectory(&idle, z0, beliefs, config, model)?;
    let problem = Problem::new(z0, beliefs, config, model)?;
    let idle_breach = {
        // Unclamped charge walk; the clamp at zero would hide the deficit.
        let mut q = problem.q0;
        let mut worst = f64::INFINITY;
        for k in 0..n {
            q = (q + problem.harvest[k] - problem.idle).min(problem.q_cap);
            worst = worst.min(q - problem.q_min);
        }
        worst < -1e-12 * problem.q_cap
    };
    if idle_breach {
        return Ok(Plan {
            objective_value: objective_unchecked(&idle, z0, beliefs, config, model)?,
            decisions: idle,
            projected_soc: idle_soc,
            solver_iterations: 0,
            converged: false,
            infeasible_idle: true,
        });
    }

    let mut best: Option<Plan> = None;
    let mut total_iterations = 0;
    for mut start in [idle.clone(), problem.flat_out()] {
        problem.repair(&mut start);
        let run = problem.ascend(problem.lift(&start));
        total_iterations += run.iterations;
        let mut decisions = problem.decisions(&run.y);
        problem.repair(&mut decisions);
        let objective = horizon_objective(&decisions, z0, beliefs, config, model)?;
        if best.as_ref().map_or(true, |b| objective > b.objective_value) {
            best = Some(Plan {
                projected_soc: soc_trajectory(&decisions, z0, beliefs, config, model)?,
                decisions,
                objective_value: objective,
                solver_iterations: 0,
                converged: run.converged,
                infeasible_idle: false,
            });
        }
    }
    let mut plan = best.expect("at least one start");
    plan.solver_iterations = total_iterations;
    Ok(plan)
}
