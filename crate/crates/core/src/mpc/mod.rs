//! Discounted finite-horizon program over sampling and transmission
//! frequencies.
//!
//! For windows `k = 0..=H` the controller maximizes
//! `Σ (1 + ζ)^{-k} [w_i · VoI_norm(k) + w_e · SoE(z(k+1))]` subject to, per
//! window: the SoC staying at or above its floor, sensing and transmitting
//! fitting inside the window, `f_t <= f_s`, the hardware caps, and
//! nonnegativity. Only the first decision of a plan is ever executed.

use alloc::vec::Vec;
use core::fmt;

use crate::energy::{self, BatteryModel, EnergyProfile, HarvestModel, SocState, SocTransition};
use crate::error::{finite, nonnegative, positive, Error, Result};
use crate::voi::{self, VoiParams};
use crate::SECONDS_PER_HOUR;

mod oracle;
mod projection;
mod solver;

pub use oracle::{brute_force_plan, grid_resolution_bound, SEARCH_LIMIT};
pub use solver::solve;

/// Slack below which a constraint counts as violated.
pub const FEASIBILITY_TOL: f64 = 1e-9;

/// Sampling and transmission frequency for one window, per hour.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Decision {
    pub f_s: f64,
    pub f_t: f64,
}

impl Decision {
    pub const ZERO: Decision = Decision { f_s: 0.0, f_t: 0.0 };

    pub fn new(f_s: f64, f_t: f64) -> Self {
        Self { f_s, f_t }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Weights {
    pub w_i: f64,
    pub w_e: f64,
}

impl Weights {
    pub fn equal() -> Self {
        Self { w_i: 0.5, w_e: 0.5 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverOptions {
    pub max_iterations: usize,
    /// Projected-gradient norm at which the solver reports convergence.
    pub tolerance: f64,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            max_iterations: 10_000,
            tolerance: 1e-6,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MpcConfig {
    /// Prediction horizon `H`; plans cover `H + 1` windows.
    pub horizon: usize,
    pub discount: f64,
    pub weights: Weights,
    pub f_s_max: f64,
    pub f_t_max: f64,
    /// Window length in hours.
    pub delta: f64,
    pub solver: SolverOptions,
}

impl MpcConfig {
    /// Twelve hourly windows, no discounting, caps of 120 per hour.
    pub fn flood_monitoring() -> Self {
        Self {
            horizon: 11,
            discount: 0.0,
            weights: Weights::equal(),
            f_s_max: 120.0,
            f_t_max: 120.0,
            delta: 1.0,
            solver: SolverOptions::default(),
        }
    }

    pub fn windows(&self) -> usize {
        self.horizon + 1
    }

    pub fn validate(&self) -> Result<()> {
        nonnegative("discount", self.discount)?;
        nonnegative("w_i", self.weights.w_i)?;
        nonnegative("w_e", self.weights.w_e)?;
        if self.weights.w_i + self.weights.w_e <= 0.0 {
            return Err(Error::OutOfRange {
                field: "w_i + w_e",
                value: self.weights.w_i + self.weights.w_e,
                expected: "> 0",
            });
        }
        positive("f_t_max", self.f_t_max)?;
        positive("f_s_max", self.f_s_max)?;
        if self.f_s_max < self.f_t_max {
            return Err(Error::OutOfRange {
                field: "f_s_max",
                value: self.f_s_max,
                expected: ">= f_t_max",
            });
        }
        positive("delta", self.delta)?;
        positive("tolerance", self.solver.tolerance)?;
        Ok(())
    }

    /// Discount factor applied to window `k`.
    pub fn discount_factor(&self, k: usize) -> f64 {
        let mut d = 1.0;
        for _ in 0..k {
            d /= 1.0 + self.discount;
        }
        d
    }
}

/// Everything the controller knows about the node.
#[derive(Debug, Clone, PartialEq)]
pub struct NodeModel {
    pub voi: VoiParams,
    pub battery: BatteryModel,
    pub profile: EnergyProfile,
    pub harvest: HarvestModel,
}

impl NodeModel {
    pub fn flood_monitoring() -> Self {
        Self {
            voi: VoiParams::flood_monitoring(),
            battery: BatteryModel::molicel_p26a(),
            profile: EnergyProfile::esp32_air_quality(),
            harvest: HarvestModel::small_panel(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.voi.validate()?;
        self.profile.validate()?;
        self.harvest.validate()
    }

    pub(crate) fn check_against(&self, config: &MpcConfig) -> Result<()> {
        if (self.voi.delta - config.delta).abs() > 1e-12 {
            return Err(Error::Mismatch(alloc::format!(
                "window length differs between VoI parameters ({}) and MPC config ({})",
                self.voi.delta,
                config.delta
            )));
        }
        Ok(())
    }
}

/// Forecasts of process value and mean irradiance, one per window.
#[derive(Debug, Clone, PartialEq)]
pub struct Beliefs {
    pub process_forecast: Vec<f64>,
    /// Mean irradiance per window, W/m².
    pub harvest_forecast: Vec<f64>,
}

impl Beliefs {
    pub fn constant(windows: usize, process: f64, irradiance: f64) -> Self {
        Self {
            process_forecast: alloc::vec![process; windows],
            harvest_forecast: alloc::vec![irradiance; windows],
        }
    }

    pub fn validate(&self, windows: usize) -> Result<()> {
        if self.process_forecast.len() != windows {
            return Err(Error::Length {
                what: "process_forecast",
                expected: windows,
                got: self.process_forecast.len(),
            });
        }
        if self.harvest_forecast.len() != windows {
            return Err(Error::Length {
                what: "harvest_forecast",
                expected: windows,
                got: self.harvest_forecast.len(),
            });
        }
        for &x in &self.process_forecast {
            finite("process_forecast", x)?;
        }
        for &h in &self.harvest_forecast {
            nonnegative("harvest_forecast", h)?;
        }
        Ok(())
    }
}

/// Optimized decision sequence and its projected SoC trajectory.
#[derive(Debug, Clone, PartialEq)]
pub struct Plan {
    pub decisions: Vec<Decision>,
    /// SoC at the start of every window plus the final one.
    pub projected_soc: Vec<f64>,
    pub objective_value: f64,
    pub solver_iterations: usize,
    pub converged: bool,
    /// Even zero activity breaches the SoC floor; the plan is all zeros.
    pub infeasible_idle: bool,
}

impl Plan {
    pub fn first(&self) -> Decision {
        self.decisions.first().copied().unwrap_or(Decision::ZERO)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ConstraintKind {
    StateOfEnergy,
    DutyCycle,
    Ordering,
    SamplingCap,
    TransmissionCap,
    Nonnegative,
}

impl fmt::Display for ConstraintKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ConstraintKind::StateOfEnergy => "SoC floor (SoE >= 0)",
            ConstraintKind::DutyCycle => "duty cycle",
            ConstraintKind::Ordering => "f_s >= f_t",
            ConstraintKind::SamplingCap => "f_s <= f_s_max",
            ConstraintKind::TransmissionCap => "f_t <= f_t_max",
            ConstraintKind::Nonnegative => "nonnegative frequencies",
        })
    }
}

/// Signed slack of every constraint in one window; negative means violated.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WindowResiduals {
    /// `z(k+1) - z_min`, SoC units.
    pub state_of_energy: f64,
    /// Idle seconds left in the window.
    pub duty_cycle: f64,
    pub ordering: f64,
    pub sampling_cap: f64,
    pub transmission_cap: f64,
    pub nonnegative: f64,
}

impl WindowResiduals {
    pub fn iter(&self) -> impl Iterator<Item = (ConstraintKind, f64)> {
        [
            (ConstraintKind::StateOfEnergy, self.state_of_energy),
            (ConstraintKind::DutyCycle, self.duty_cycle),
            (ConstraintKind::Ordering, self.ordering),
            (ConstraintKind::SamplingCap, self.sampling_cap),
            (ConstraintKind::TransmissionCap, self.transmission_cap),
            (ConstraintKind::Nonnegative, self.nonnegative),
        ]
        .into_iter()
    }

    pub fn min(&self) -> f64 {
        self.iter().map(|(_, s)| s).fold(f64::INFINITY, f64::min)
    }

    /// Most violated constraint, if any slack is below `-tol`.
    pub fn worst_violation(&self, tol: f64) -> Option<(ConstraintKind, f64)> {
        self.iter()
            .filter(|&(_, s)| s < -tol)
            .min_by(|a, b| a.1.total_cmp(&b.1))
    }
}

/// Drain without the duty-cycle check, for residual bookkeeping.
pub(crate) fn drain_raw(d: Decision, profile: &EnergyProfile, delta: f64) -> f64 {
    let busy = profile.busy_seconds_per_hour(d.f_s, d.f_t);
    delta
        * (d.f_s * profile.i_sense * profile.d_sense
            + d.f_t * profile.i_transmit * profile.d_transmit
            + profile.i_sleep * (SECONDS_PER_HOUR - busy))
}

/// `w_i · VoI_norm + w_e · SoE(z_next)` for one window.
pub fn window_utility(
    x: f64,
    d: Decision,
    z_next: SocState,
    voi_params: &VoiParams,
    battery: &BatteryModel,
    weights: &Weights,
) -> Result<f64> {
    let v = voi::value_of_information(x, d.f_s, d.f_t, voi_params)?;
    let soe = energy::soe_from_soc(z_next.value(), battery)?;
    Ok(weights.w_i * voi::normalize_voi(v, voi_params) + weights.w_e * soe)
}

fn check_shape(decisions: &[Decision], z0: f64, beliefs: &Beliefs, config: &MpcConfig) -> Result<()> {
    let n = config.windows();
    if decisions.len() != n {
        return Err(Error::Length {
            what: "decisions",
            expected: n,
            got: decisions.len(),
        });
    }
    beliefs.validate(n)?;
    crate::error::unit_interval("z0", z0)?;
    for d in decisions {
        finite("f_s", d.f_s)?;
        finite("f_t", d.f_t)?;
    }
    Ok(())
}

fn window_residuals(
    d: Decision,
    transition: &SocTransition,
    config: &MpcConfig,
    model: &NodeModel,
) -> WindowResiduals {
    let p = &model.profile;
    WindowResiduals {
        state_of_energy: transition.unfloored(&model.battery) - model.battery.z_min(),
        duty_cycle: config.delta * (SECONDS_PER_HOUR - p.busy_seconds_per_hour(d.f_s, d.f_t)),
        ordering: d.f_s - d.f_t,
        sampling_cap: config.f_s_max - d.f_s,
        transmission_cap: config.f_t_max - d.f_t,
        nonnegative: d.f_s.min(d.f_t),
    }
}

// SoC propagation shared by residuals and objective; never fails on
// infeasible decisions.
fn propagate(
    decisions: &[Decision],
    z0: f64,
    beliefs: &Beliefs,
    config: &MpcConfig,
    model: &NodeModel,
) -> Result<Vec<SocTransition>> {
    let mut z = SocState::new(z0)?;
    let mut out = Vec::with_capacity(decisions.len());
    for (d, &irr) in decisions.iter().zip(&beliefs.harvest_forecast) {
        let drained = drain_raw(*d, &model.profile, config.delta);
        let harvested = energy::harvest_charge(irr, &model.harvest, &model.battery, config.delta)?;
        let t = energy::apply_charge(z, drained, harvested, &model.battery);
        z = t.next;
        out.push(t);
    }
    Ok(out)
}

/// Slack of every constraint, window by window.
pub fn constraint_residuals(
    decisions: &[Decision],
    z0: f64,
    beliefs: &Beliefs,
    config: &MpcConfig,
    model: &NodeModel,
) -> Result<Vec<WindowResiduals>> {
    check_shape(decisions, z0, beliefs, config)?;
    let transitions = propagate(decisions, z0, beliefs, config, model)?;
    Ok(decisions
        .iter()
        .zip(&transitions)
        .map(|(d, t)| window_residuals(*d, t, config, model))
        .collect())
}

/// Discounted sum of window utilities; errors on the first infeasible window.
pub fn horizon_objective(
    decisions: &[Decision],
    z0: f64,
    beliefs: &Beliefs,
    config: &MpcConfig,
    model: &NodeModel,
) -> Result<f64> {
    check_shape(decisions, z0, beliefs, config)?;
    let transitions = propagate(decisions, z0, beliefs, config, model)?;
    let mut total = 0.0;
    for (k, ((d, t), &x)) in decisions
        .iter()
        .zip(&transitions)
        .zip(&beliefs.process_forecast)
        .enumerate()
    {
        if let Some((constraint, slack)) = window_residuals(*d, t, config, model).worst_violation(FEASIBILITY_TOL) {
            return Err(Error::InfeasibleDecision {
                window: k,
                constraint,
                violation: -slack,
            });
        }
        let u = window_utility(x, *d, t.next, &model.voi, &model.battery, &config.weights)?;
        total += config.discount_factor(k) * u;
    }
    Ok(total)
}

/// SoC trajectory (start of each window plus the end) under `decisions`.
pub(crate) fn soc_trajectory(
    decisions: &[Decision],
    z0: f64,
    beliefs: &Beliefs,
    config: &MpcConfig,
    model: &NodeModel,
) -> Result<Vec<f64>> {
    let transitions = propagate(decisions, z0, beliefs, config, model)?;
    let mut out = Vec::with_capacity(decisions.len() + 1);
    out.push(z0);
    out.extend(transitions.iter().map(|t| t.next.value()));
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn window_utility_examples() {
        let m = NodeModel::flood_monitoring();
        let w = Weights::equal();
        let floor = SocState::new(m.battery.z_min()).unwrap();
        let u = window_utility(3.0, Decision::ZERO, floor, &m.voi, &m.battery, &w).unwrap();
        assert_eq!(u, 0.0);
        let u = window_utility(3.0, Decision::new(120.0, 120.0), SocState::FULL, &m.voi, &m.battery, &w).unwrap();
        assert!(close(u, 0.953_260_448_259_335_2, 1e-14));
        let only_voi = Weights { w_i: 1.0, w_e: 0.0 };
        let d = Decision::new(40.0, 20.0);
        let u = window_utility(2.2, d, SocState::new(0.4).unwrap(), &m.voi, &m.battery, &only_voi).unwrap();
        let v = voi::value_of_information(2.2, 40.0, 20.0, &m.voi).unwrap();
        assert_eq!(u, voi::normalize_voi(v, &m.voi));
    }

    #[test]
    fn degenerate_horizon_is_single_window() {
        let m = NodeModel::flood_monitoring();
        let mut c = MpcConfig::flood_monitoring();
        c.horizon = 0;
        let b = Beliefs::constant(1, 2.5, 300.0);
        let d = [Decision::new(30.0, 10.0)];
        let j = horizon_objective(&d, 0.6, &b, &c, &m).unwrap();
        let t = energy::soc_step(SocState::new(0.6).unwrap(), 30.0, 10.0, &m.profile, &m.harvest, &m.battery, 300.0, 1.0)
            .unwrap();
        let u = window_utility(2.5, d[0], t.next, &m.voi, &m.battery, &c.weights).unwrap();
        assert_eq!(j, u);
    }

    #[test]
    fn undiscounted_constant_utility_sums() {
        // Full battery with strong sun keeps z(k+1) = 1 in every window, so
        // each window contributes the same utility.
        let m = NodeModel::flood_monitoring();
        let c = MpcConfig::flood_monitoring();
        let b = Beliefs::constant(12, 3.2, 900.0);
        let d = vec![Decision::new(50.0, 50.0); 12];
        let j = horizon_objective(&d, 1.0, &b, &c, &m).unwrap();
        let u = window_utility(3.2, d[0], SocState::FULL, &m.voi, &m.battery, &c.weights).unwrap();
        assert!(close(j, 12.0 * u, 1e-12));
    }

    #[test]
    fn discount_weights_are_geometric() {
        let mut c = MpcConfig::flood_monitoring();
        c.discount = 1.0;
        let w: f64 = (0..3).map(|k| c.discount_factor(k)).sum();
        assert_eq!(w, 1.75);
    }

    #[test]
    fn residual_examples() {
        let m = NodeModel::flood_monitoring();
        let c = MpcConfig::flood_monitoring();
        let b = Beliefs::constant(12, 0.5, 0.0);
        let zero = vec![Decision::ZERO; 12];
        let r = constraint_residuals(&zero, 1.0, &b, &c, &m).unwrap();
        assert!(r.iter().all(|w| w.min() >= 0.0));
        // 12 h of sleep drain
        assert!(close(r[11].state_of_energy, 1.0 - 0.00624 - 0.015, 1e-12));

        let mut bad = zero.clone();
        bad[3] = Decision::new(0.0, 1.0);
        let r = constraint_residuals(&bad, 1.0, &b, &c, &m).unwrap();
        assert_eq!(r[3].ordering, -1.0);
        assert_eq!(r[3].worst_violation(FEASIBILITY_TOL).unwrap().0, ConstraintKind::Ordering);

        let max = vec![Decision::new(120.0, 120.0); 12];
        let r = constraint_residuals(&max, 1.0, &b, &c, &m).unwrap();
        assert!(close(r[0].duty_cycle, 1548.0, 1e-9));
    }

    #[test]
    fn objective_reports_infeasible_window() {
        let m = NodeModel::flood_monitoring();
        let c = MpcConfig::flood_monitoring();
        let b = Beliefs::constant(12, 0.5, 0.0);
        let mut d = vec![Decision::ZERO; 12];
        d[5] = Decision::new(10.0, 130.0);
        match horizon_objective(&d, 1.0, &b, &c, &m) {
            Err(Error::InfeasibleDecision { window, constraint, .. }) => {
                assert_eq!(window, 5);
                assert_eq!(constraint, ConstraintKind::Ordering);
            }
            other => panic!("unexpected {other:?}"),
        }
        // Battery drained past the floor.
        let greedy = vec![Decision::new(120.0, 120.0); 12];
        match horizon_objective(&greedy, 0.1, &b, &c, &m) {
            Err(Error::InfeasibleDecision { constraint, .. }) => {
                assert_eq!(constraint, ConstraintKind::StateOfEnergy)
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn shape_errors() {
        let m = NodeModel::flood_monitoring();
        let c = MpcConfig::flood_monitoring();
        let b = Beliefs::constant(11, 0.5, 0.0);
        let d = vec![Decision::ZERO; 12];
        assert!(matches!(
            horizon_objective(&d, 1.0, &b, &c, &m),
            Err(Error::Length { .. })
        ));
    }
}
