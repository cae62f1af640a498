//! Receding-horizon hindcasts and static duty-cycle baselines.
//!
//! Every step builds beliefs from the recorded data, solves the horizon
//! program, applies the first decision rounded to whole events per hour, and
//! advances the battery with the harvest actually recorded for that window.
//! Window 0 only seeds the process belief, so traces start at window 1.

use alloc::vec::Vec;

use crate::energy::{self, SocState, SocTransition};
use crate::error::{finite, nonnegative, positive, unit_interval, Error, Result};
use crate::math::{ceil, floor, round};
use crate::mpc::{self, Beliefs, Decision, MpcConfig, NodeModel, Weights};
use crate::voi;
use crate::SECONDS_PER_HOUR;

/// Process and irradiance values on a uniform window grid.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    start: i64,
    window_hours: f64,
    process: Vec<f64>,
    irradiance: Vec<f64>,
}

impl Dataset {
    /// `start` is the Unix time of window 0 in seconds. `process[i]` is the
    /// process value observed during window `i` and `irradiance[i]` its mean
    /// irradiance in W/m².
    pub fn new(start: i64, window_hours: f64, process: Vec<f64>, irradiance: Vec<f64>) -> Result<Self> {
        positive("window_hours", window_hours)?;
        if process.len() != irradiance.len() {
            return Err(Error::Length {
                what: "irradiance series",
                expected: process.len(),
                got: irradiance.len(),
            });
        }
        for &x in &process {
            finite("process value", x)?;
        }
        for &g in &irradiance {
            nonnegative("irradiance", g)?;
        }
        Ok(Self {
            start,
            window_hours,
            process,
            irradiance,
        })
    }

    pub fn len(&self) -> usize {
        self.process.len()
    }

    pub fn is_empty(&self) -> bool {
        self.process.is_empty()
    }

    pub fn start(&self) -> i64 {
        self.start
    }

    pub fn window_hours(&self) -> f64 {
        self.window_hours
    }

    pub fn window_seconds(&self) -> i64 {
        round(self.window_hours * SECONDS_PER_HOUR) as i64
    }

    /// Unix time at which window `i` starts.
    pub fn timestamp(&self, i: usize) -> i64 {
        self.start + i as i64 * self.window_seconds()
    }

    pub fn process(&self) -> &[f64] {
        &self.process
    }

    pub fn irradiance(&self) -> &[f64] {
        &self.irradiance
    }

    /// The same data with every irradiance value multiplied by `factor`.
    pub fn scale_irradiance(&self, factor: f64) -> Result<Self> {
        nonnegative("irradiance scale", factor)?;
        let mut out = self.clone();
        for g in &mut out.irradiance {
            *g *= factor;
        }
        Ok(out)
    }
}

/// Knobs of the simulation loop that are not part of the model.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimOptions {
    /// A depleted node restarts once its SoC reaches `z_min` plus this.
    pub restart_hysteresis: f64,
    /// Number of preceding windows whose maximum forms the process belief.
    pub belief_lookback: usize,
}

impl Default for SimOptions {
    fn default() -> Self {
        Self {
            restart_hysteresis: 0.02,
            belief_lookback: 1,
        }
    }
}

impl SimOptions {
    pub fn validate(&self) -> Result<()> {
        unit_interval("restart_hysteresis", self.restart_hysteresis)?;
        if self.belief_lookback == 0 {
            return Err(Error::OutOfRange {
                field: "belief_lookback",
                value: 0.0,
                expected: ">= 1",
            });
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum NodeState {
    Active,
    /// Below the SoC floor; all activity is suspended.
    Depleted,
}

impl NodeState {
    pub fn as_str(self) -> &'static str {
        match self {
            NodeState::Active => "active",
            NodeState::Depleted => "depleted",
        }
    }
}

/// One simulated window.
#[derive(Debug, Clone, PartialEq)]
pub struct TraceRecord {
    /// Unix time at which the window starts.
    pub timestamp: i64,
    /// Process value recorded for the window.
    pub x: f64,
    pub f_s: f64,
    pub f_t: f64,
    /// SoC at the end of the window.
    pub z: f64,
    /// SoE at the end of the window.
    pub soe: f64,
    /// Realized VoI, computed from the recorded process value.
    pub voi: f64,
    /// Undiscounted weighted utility of the window.
    pub utility: f64,
    /// Objective of the plan the decision came from, if one was solved.
    pub planned_objective: Option<f64>,
    pub state: NodeState,
    pub drained: f64,
    pub harvested: f64,
    pub spilled: f64,
    pub unmet: f64,
    /// The planner found that even idling breaches the SoC floor.
    pub infeasible_idle: bool,
}

/// Aggregate statistics of a trace.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceSummary {
    pub windows: usize,
    pub cumulative_voi: f64,
    pub terminal_soe: f64,
    pub depleted_window_count: usize,
    pub mean_f_s: f64,
    pub mean_f_t: f64,
}

/// Side-by-side summaries of two traces over the same timeline.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceComparison {
    pub a: TraceSummary,
    pub b: TraceSummary,
}

impl TraceComparison {
    /// `a - b` for every field; depleted counts are signed.
    pub fn cumulative_voi_delta(&self) -> f64 {
        self.a.cumulative_voi - self.b.cumulative_voi
    }

    pub fn terminal_soe_delta(&self) -> f64 {
        self.a.terminal_soe - self.b.terminal_soe
    }

    pub fn depleted_delta(&self) -> i64 {
        self.a.depleted_window_count as i64 - self.b.depleted_window_count as i64
    }

    pub fn mean_f_s_delta(&self) -> f64 {
        self.a.mean_f_s - self.b.mean_f_s
    }

    pub fn mean_f_t_delta(&self) -> f64 {
        self.a.mean_f_t - self.b.mean_f_t
    }
}

/// Beliefs for the step at window `index`.
///
/// The process belief is the maximum over the `lookback` windows before
/// `index`, held constant. The harvest belief is the recorded irradiance of
/// the next `H + 1` windows, padded with zeros past the end of the data.
pub fn build_beliefs(dataset: &Dataset, index: usize, config: &MpcConfig, opts: &SimOptions) -> Result<Beliefs> {
    opts.validate()?;
    if index == 0 || index >= dataset.len() {
        return Err(Error::OutOfRange {
            field: "window index",
            value: index as f64,
            expected: "1 <= index < dataset length",
        });
    }
    let n = config.windows();
    let from = index.saturating_sub(opts.belief_lookback);
    let x = dataset.process[from..index].iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let available = (dataset.len() - index).min(n);
    let mut harvest = Vec::with_capacity(n);
    harvest.extend_from_slice(&dataset.irradiance[index..index + available]);
    if available < n {
        log::debug!(
            "window {index}: {} of {n} irradiance forecast windows past the end of the data, padded with zeros",
            n - available
        );
        harvest.resize(n, 0.0);
    }
    Ok(Beliefs {
        process_forecast: alloc::vec![x; n],
        harvest_forecast: harvest,
    })
}

fn check_dataset(dataset: &Dataset, delta: f64) -> Result<()> {
    if dataset.len() < 2 {
        return Err(Error::Length {
            what: "dataset windows (at least)",
            expected: 2,
            got: dataset.len(),
        });
    }
    if (dataset.window_hours - delta).abs() > 1e-12 * delta.max(1.0) {
        return Err(Error::Mismatch(alloc::format!(
            "dataset window of {} h does not match decision window of {} h",
            dataset.window_hours, delta
        )));
    }
    Ok(())
}

/// Whether `d` can be applied this window without breaking a limit or
/// pushing the SoC under the floor.
fn admissible(d: Decision, z: SocState, irradiance: f64, config: &MpcConfig, model: &NodeModel) -> bool {
    if d.f_t > d.f_s || d.f_s > config.f_s_max || d.f_t > config.f_t_max || d.f_t < 0.0 {
        return false;
    }
    energy::soc_step(z, d.f_s, d.f_t, &model.profile, &model.harvest, &model.battery, irradiance, config.delta)
        .is_ok_and(|t| t.unfloored(&model.battery) >= model.battery.z_min())
}

/// Rounds a planned decision to whole events per hour.
///
/// The four floor/ceil combinations are tried nearest first, ties going to
/// the cheaper one; the first admissible one wins, otherwise the node idles.
fn round_decision(d: Decision, z: SocState, irradiance: f64, config: &MpcConfig, model: &NodeModel) -> Decision {
    let mut candidates = [
        Decision::new(floor(d.f_s), floor(d.f_t)),
        Decision::new(floor(d.f_s), ceil(d.f_t)),
        Decision::new(ceil(d.f_s), floor(d.f_t)),
        Decision::new(ceil(d.f_s), ceil(d.f_t)),
    ];
    let dist = |c: &Decision| (c.f_s - d.f_s) * (c.f_s - d.f_s) + (c.f_t - d.f_t) * (c.f_t - d.f_t);
    candidates.sort_by(|a, b| dist(a).total_cmp(&dist(b)).then((a.f_s + a.f_t).total_cmp(&(b.f_s + b.f_t))));
    candidates
        .into_iter()
        .find(|c| admissible(*c, z, irradiance, config, model))
        .unwrap_or(Decision::ZERO)
}

struct Stepper<'a> {
    dataset: &'a Dataset,
    model: &'a NodeModel,
    weights: Weights,
    delta: f64,
    opts: SimOptions,
    z: SocState,
    state: NodeState,
}

impl Stepper<'_> {
    /// Updates the node state for the start of window `i`.
    fn enter(&mut self) -> NodeState {
        let z_min = self.model.battery.z_min();
        let z = self.z.value();
        self.state = match self.state {
            NodeState::Active if z < z_min => NodeState::Depleted,
            NodeState::Depleted if z >= z_min + self.opts.restart_hysteresis => NodeState::Active,
            s => s,
        };
        self.state
    }

    fn advance(&mut self, i: usize, d: Decision, planned: Option<f64>, infeasible_idle: bool) -> Result<TraceRecord> {
        let m = self.model;
        let x = self.dataset.process[i];
        let t: SocTransition = energy::soc_step(
            self.z,
            d.f_s,
            d.f_t,
            &m.profile,
            &m.harvest,
            &m.battery,
            self.dataset.irradiance[i],
            self.delta,
        )?;
        self.z = t.next;
        let v = voi::value_of_information(x, d.f_s, d.f_t, &m.voi)?;
        Ok(TraceRecord {
            timestamp: self.dataset.timestamp(i),
            x,
            f_s: d.f_s,
            f_t: d.f_t,
            z: t.next.value(),
            soe: energy::soe_from_soc(t.next.value(), &m.battery)?,
            voi: v,
            utility: mpc::window_utility(x, d, t.next, &m.voi, &m.battery, &self.weights)?,
            planned_objective: planned,
            state: self.state,
            drained: t.drained,
            harvested: t.harvested,
            spilled: t.spilled,
            unmet: t.unmet,
            infeasible_idle,
        })
    }
}

/// Receding-horizon hindcast of the MPC policy over `dataset`.
pub fn run_hindcast(
    dataset: &Dataset,
    model: &NodeModel,
    config: &MpcConfig,
    z_initial: f64,
    opts: &SimOptions,
) -> Result<Vec<TraceRecord>> {
    config.validate()?;
    model.validate()?;
    model.check_against(config)?;
    opts.validate()?;
    check_dataset(dataset, config.delta)?;
    let mut s = Stepper {
        dataset,
        model,
        weights: config.weights,
        delta: config.delta,
        opts: *opts,
        z: SocState::new(z_initial)?,
        state: NodeState::Active,
    };
    let padded = (config.windows() - 1).min(dataset.len() - 1);
    if padded > 0 {
        log::warn!("the last {padded} windows plan past the end of the data; their irradiance forecasts are padded with zeros");
    }
    let mut trace = Vec::with_capacity(dataset.len() - 1);
    for i in 1..dataset.len() {
        let rec = match s.enter() {
            NodeState::Depleted => s.advance(i, Decision::ZERO, None, false)?,
            NodeState::Active => {
                let beliefs = build_beliefs(dataset, i, config, opts)?;
                let plan = mpc::solve(s.z.value(), &beliefs, config, model)?;
                let d = if plan.infeasible_idle {
                    Decision::ZERO
                } else {
                    round_decision(plan.first(), s.z, dataset.irradiance[i], config, model)
                };
                s.advance(i, d, Some(plan.objective_value), plan.infeasible_idle)?
            }
        };
        trace.push(rec);
    }
    Ok(trace)
}

/// Hindcast of a node that always runs at `decision` while it has energy.
///
/// `weights` only affects the recorded utility.
pub fn run_static_baseline(
    dataset: &Dataset,
    decision: Decision,
    model: &NodeModel,
    weights: Weights,
    z_initial: f64,
    opts: &SimOptions,
) -> Result<Vec<TraceRecord>> {
    model.validate()?;
    opts.validate()?;
    let delta = dataset.window_hours;
    check_dataset(dataset, delta)?;
    energy::drain_charge(decision.f_s, decision.f_t, &model.profile, delta)?;
    if decision.f_t > decision.f_s {
        return Err(Error::InfeasibleDecision {
            window: 0,
            constraint: mpc::ConstraintKind::Ordering,
            violation: decision.f_t - decision.f_s,
        });
    }
    let mut s = Stepper {
        dataset,
        model,
        weights,
        delta,
        opts: *opts,
        z: SocState::new(z_initial)?,
        state: NodeState::Active,
    };
    let mut trace = Vec::with_capacity(dataset.len() - 1);
    for i in 1..dataset.len() {
        let d = match s.enter() {
            NodeState::Active => decision,
            NodeState::Depleted => Decision::ZERO,
        };
        trace.push(s.advance(i, d, None, false)?);
    }
    Ok(trace)
}

pub fn summarize(trace: &[TraceRecord]) -> TraceSummary {
    let n = trace.len();
    let mean = |f: fn(&TraceRecord) -> f64| {
        if n == 0 {
            0.0
        } else {
            trace.iter().map(f).sum::<f64>() / n as f64
        }
    };
    TraceSummary {
        windows: n,
        cumulative_voi: trace.iter().map(|r| r.voi).sum(),
        terminal_soe: trace.last().map_or(0.0, |r| r.soe),
        depleted_window_count: trace.iter().filter(|r| r.state == NodeState::Depleted).count(),
        mean_f_s: mean(|r| r.f_s),
        mean_f_t: mean(|r| r.f_t),
    }
}

/// Summaries of two traces that cover the same windows.
pub fn compare_traces(a: &[TraceRecord], b: &[TraceRecord]) -> Result<TraceComparison> {
    if a.len() != b.len() {
        return Err(Error::Length {
            what: "second trace",
            expected: a.len(),
            got: b.len(),
        });
    }
    if let Some((i, _)) = a.iter().zip(b).enumerate().find(|(_, (ra, rb))| ra.timestamp != rb.timestamp) {
        return Err(Error::Mismatch(alloc::format!("traces diverge in timestamp at record {i}")));
    }
    Ok(TraceComparison {
        a: summarize(a),
        b: summarize(b),
    })
}

/// Signed SoC error of the charge bookkeeping over a whole trace:
/// the final SoC minus `z_initial` plus the logged net charge.
pub fn audit_energy(trace: &[TraceRecord], z_initial: f64, model: &NodeModel) -> f64 {
    let q = model.battery.capacity_as();
    let net: f64 = trace.iter().map(|r| r.harvested - r.drained - r.spilled + r.unmet).sum();
    let z_final = trace.last().map_or(z_initial, |r| r.z);
    z_final - (z_initial + net / q)
}
