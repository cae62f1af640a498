//! Battery, consumption profile, harvest and State of Energy.
//!
//! Charge bookkeeping is done in ampere-seconds throughout. The battery is a
//! single cell tracked by Coulomb counting; its State of Energy is the OCV
//! integral between the SoC floor and the current SoC, relative to the same
//! integral up to full charge.

use alloc::format;
use alloc::vec::Vec;

use crate::error::{finite, nonnegative, positive, unit_interval, Error, Result};
use crate::mpc::ConstraintKind;
use crate::SECONDS_PER_HOUR;

/// Current draw per operating phase and task durations.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnergyProfile {
    /// Sleep current, A.
    pub i_sleep: f64,
    /// Sensing current, A.
    pub i_sense: f64,
    /// Transmit current, A.
    pub i_transmit: f64,
    /// Seconds per sample.
    pub d_sense: f64,
    /// Seconds per transmission.
    pub d_transmit: f64,
}

impl EnergyProfile {
    pub fn new(i_sleep: f64, i_sense: f64, i_transmit: f64, d_sense: f64, d_transmit: f64) -> Result<Self> {
        let p = Self {
            i_sleep,
            i_sense,
            i_transmit,
            d_sense,
            d_transmit,
        };
        p.validate()?;
        Ok(p)
    }

    /// ESP32 node with temperature, particulate and gas sensors.
    pub fn esp32_air_quality() -> Self {
        Self {
            i_sleep: 1.43e-3,
            i_sense: 0.105,
            i_transmit: 0.127,
            d_sense: 13.0,
            d_transmit: 4.1,
        }
    }

    pub fn validate(&self) -> Result<()> {
        positive("i_sleep", self.i_sleep)?;
        positive("i_sense", self.i_sense)?;
        positive("i_transmit", self.i_transmit)?;
        positive("d_sense", self.d_sense)?;
        positive("d_transmit", self.d_transmit)?;
        if self.i_sleep >= self.i_sense {
            return Err(Error::OutOfRange {
                field: "i_sleep",
                value: self.i_sleep,
                expected: "< i_sense",
            });
        }
        if self.i_sleep >= self.i_transmit {
            return Err(Error::OutOfRange {
                field: "i_sleep",
                value: self.i_sleep,
                expected: "< i_transmit",
            });
        }
        Ok(())
    }

    /// Busy seconds per hour at the given frequencies.
    pub fn busy_seconds_per_hour(&self, f_s: f64, f_t: f64) -> f64 {
        f_s * self.d_sense + f_t * self.d_transmit
    }

    /// Extra charge (A·s) one sample costs over sleeping for the same time.
    pub(crate) fn sample_charge(&self) -> f64 {
        (self.i_sense - self.i_sleep) * self.d_sense
    }

    /// Extra charge (A·s) one transmission costs over sleeping.
    pub(crate) fn transmission_charge(&self) -> f64 {
        (self.i_transmit - self.i_sleep) * self.d_transmit
    }

    /// Sleep-only charge per hour, A·s.
    pub(crate) fn idle_charge_per_hour(&self) -> f64 {
        self.i_sleep * SECONDS_PER_HOUR
    }
}

/// Solar harvesting front end.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HarvestModel {
    /// End-to-end conversion efficiency in `(0, 1]`.
    pub efficiency_eta: f64,
    /// Panel area, m².
    pub panel_area: f64,
}

impl HarvestModel {
    pub fn new(efficiency_eta: f64, panel_area: f64) -> Result<Self> {
        let h = Self {
            efficiency_eta,
            panel_area,
        };
        h.validate()?;
        Ok(h)
    }

    /// 10 cm × 10 cm panel at 5 % overall efficiency.
    pub fn small_panel() -> Self {
        Self {
            efficiency_eta: 0.05,
            panel_area: 0.01,
        }
    }

    pub fn validate(&self) -> Result<()> {
        positive("efficiency_eta", self.efficiency_eta)?;
        if self.efficiency_eta > 1.0 {
            return Err(Error::OutOfRange {
                field: "efficiency_eta",
                value: self.efficiency_eta,
                expected: "in (0, 1]",
            });
        }
        positive("panel_area", self.panel_area)?;
        Ok(())
    }
}

/// Knots of a generic Li-ion OCV curve, 3.0 V empty to 4.2 V full.
pub const DEFAULT_OCV_KNOTS: [(f64, f64); 21] = [
    (0.00, 3.000),
    (0.05, 3.300),
    (0.10, 3.420),
    (0.15, 3.500),
    (0.20, 3.550),
    (0.25, 3.590),
    (0.30, 3.620),
    (0.35, 3.645),
    (0.40, 3.670),
    (0.45, 3.695),
    (0.50, 3.720),
    (0.55, 3.750),
    (0.60, 3.785),
    (0.65, 3.825),
    (0.70, 3.870),
    (0.75, 3.915),
    (0.80, 3.960),
    (0.85, 4.010),
    (0.90, 4.065),
    (0.95, 4.130),
    (1.00, 4.200),
];

/// Piecewise-linear open-circuit voltage as a function of SoC on `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct OcvCurve {
    soc: Vec<f64>,
    volts: Vec<f64>,
    // Integral of the curve from 0 up to each knot.
    cumulative: Vec<f64>,
}

impl OcvCurve {
    /// Builds a curve from `(soc, volts)` knots.
    ///
    /// Knots must start at SoC 0, end at SoC 1, be strictly increasing in
    /// SoC and nondecreasing in voltage with every voltage positive.
    pub fn new(points: &[(f64, f64)]) -> Result<Self> {
        if points.len() < 2 {
            return Err(Error::Curve(format!("need at least 2 knots, got {}", points.len())));
        }
        for (i, &(s, v)) in points.iter().enumerate() {
            if !s.is_finite() || !v.is_finite() {
                return Err(Error::Curve(format!("knot {i} is not finite")));
            }
            if v <= 0.0 {
                return Err(Error::Curve(format!("knot {i}: voltage {v} must be positive")));
            }
        }
        if points[0].0 != 0.0 {
            return Err(Error::Curve(format!("first knot must be at soc 0.0, got {}", points[0].0)));
        }
        let last = points[points.len() - 1].0;
        if last != 1.0 {
            return Err(Error::Curve(format!("last knot must be at soc 1.0, got {last}")));
        }
        for (i, w) in points.windows(2).enumerate() {
            if w[1].0 <= w[0].0 {
                return Err(Error::Curve(format!(
                    "soc not strictly increasing at knot {}: {} after {}",
                    i + 1,
                    w[1].0,
                    w[0].0
                )));
            }
            if w[1].1 < w[0].1 {
                return Err(Error::Curve(format!(
                    "voltage decreases at knot {}: {} after {}",
                    i + 1,
                    w[1].1,
                    w[0].1
                )));
            }
        }
        let soc: Vec<f64> = points.iter().map(|p| p.0).collect();
        let volts: Vec<f64> = points.iter().map(|p| p.1).collect();
        let mut cumulative = Vec::with_capacity(soc.len());
        cumulative.push(0.0);
        for i in 1..soc.len() {
            let seg = 0.5 * (volts[i] + volts[i - 1]) * (soc[i] - soc[i - 1]);
            cumulative.push(cumulative[i - 1] + seg);
        }
        Ok(Self { soc, volts, cumulative })
    }

    pub fn default_li_ion() -> Self {
        Self::new(&DEFAULT_OCV_KNOTS).expect("default OCV knots are valid")
    }

    /// Flat curve, useful where the SoE should be linear in SoC.
    pub fn constant(volts: f64) -> Result<Self> {
        Self::new(&[(0.0, volts), (1.0, volts)])
    }

    pub fn knots(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.soc.iter().copied().zip(self.volts.iter().copied())
    }

    pub fn len(&self) -> usize {
        self.soc.len()
    }

    pub fn is_empty(&self) -> bool {
        self.soc.is_empty()
    }

    pub fn max_voltage(&self) -> f64 {
        self.volts[self.volts.len() - 1]
    }

    // Index of the segment [soc[i], soc[i+1]] holding z (z already clamped).
    fn segment(&self, z: f64) -> usize {
        match self.soc.binary_search_by(|s| s.partial_cmp(&z).unwrap_or(core::cmp::Ordering::Less)) {
            Ok(i) => i.min(self.soc.len() - 2),
            Err(i) => i.saturating_sub(1).min(self.soc.len() - 2),
        }
    }

    /// Voltage at `z`, held constant outside `[0, 1]`.
    pub(crate) fn voltage_at(&self, z: f64) -> f64 {
        if z <= 0.0 {
            return self.volts[0];
        }
        if z >= 1.0 {
            return self.max_voltage();
        }
        let i = self.segment(z);
        let t = (z - self.soc[i]) / (self.soc[i + 1] - self.soc[i]);
        self.volts[i] + t * (self.volts[i + 1] - self.volts[i])
    }

    /// `∫_0^z OCV`, with the curve extended flat outside `[0, 1]`.
    pub(crate) fn integral_to(&self, z: f64) -> f64 {
        if z <= 0.0 {
            return z * self.volts[0];
        }
        if z >= 1.0 {
            return self.cumulative[self.cumulative.len() - 1] + (z - 1.0) * self.max_voltage();
        }
        let i = self.segment(z);
        let v = self.voltage_at(z);
        self.cumulative[i] + 0.5 * (self.volts[i] + v) * (z - self.soc[i])
    }
}

/// Cell capacity, SoC floor, nominal voltage and OCV curve.
#[derive(Debug, Clone, PartialEq)]
pub struct BatteryModel {
    capacity_ah: f64,
    z_min: f64,
    v_nom: f64,
    curve: OcvCurve,
    denominator_energy: f64,
}

impl BatteryModel {
    pub fn new(capacity_ah: f64, z_min: f64, v_nom: f64, curve: OcvCurve) -> Result<Self> {
        positive("capacity_ah", capacity_ah)?;
        finite("z_min", z_min)?;
        if !(0.0..1.0).contains(&z_min) {
            return Err(Error::OutOfRange {
                field: "z_min",
                value: z_min,
                expected: "in [0, 1)",
            });
        }
        positive("v_nom", v_nom)?;
        let denominator_energy = curve.integral_to(1.0) - curve.integral_to(z_min);
        positive("denominator_energy", denominator_energy)?;
        Ok(Self {
            capacity_ah,
            z_min,
            v_nom,
            curve,
            denominator_energy,
        })
    }

    /// 2.75 Ah 18650 cell, 1.5 % SoC floor, 3.6 V nominal, default curve.
    pub fn molicel_p26a() -> Self {
        Self::new(2.75, 0.015, 3.6, OcvCurve::default_li_ion()).expect("valid battery")
    }

    pub fn capacity_ah(&self) -> f64 {
        self.capacity_ah
    }

    /// Capacity in ampere-seconds.
    pub fn capacity_as(&self) -> f64 {
        self.capacity_ah * SECONDS_PER_HOUR
    }

    pub fn z_min(&self) -> f64 {
        self.z_min
    }

    pub fn v_nom(&self) -> f64 {
        self.v_nom
    }

    pub fn curve(&self) -> &OcvCurve {
        &self.curve
    }

    /// `∫_{z_min}^{1} OCV`.
    pub fn denominator_energy(&self) -> f64 {
        self.denominator_energy
    }

    /// Unclamped SoE: negative below the floor, above 1 past full charge.
    pub(crate) fn soe_extended(&self, z: f64) -> f64 {
        (self.curve.integral_to(z) - self.curve.integral_to(self.z_min)) / self.denominator_energy
    }

    /// Derivative of the SoE with respect to SoC.
    pub(crate) fn soe_slope(&self, z: f64) -> f64 {
        self.curve.voltage_at(z) / self.denominator_energy
    }
}

/// State of charge in `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct SocState(f64);

impl SocState {
    pub fn new(z: f64) -> Result<Self> {
        unit_interval("z", z).map(Self)
    }

    pub const FULL: SocState = SocState(1.0);

    pub fn value(self) -> f64 {
        self.0
    }
}

/// Result of advancing the SoC over one window.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SocTransition {
    pub next: SocState,
    /// Charge consumed by the node, A·s.
    pub drained: f64,
    /// Charge delivered by the panel, A·s.
    pub harvested: f64,
    /// Harvest discarded because the battery was full, A·s.
    pub spilled: f64,
    /// Demand that could not be met because the battery was empty, A·s.
    pub unmet: f64,
}

impl SocTransition {
    /// SoC the window would have reached without the lower clamp.
    pub fn unfloored(&self, battery: &BatteryModel) -> f64 {
        self.next.0 - self.unmet / battery.capacity_as()
    }
}

/// Charge drawn over one window, A·s.
///
/// Frequencies are per hour; `delta` is the window length in hours.
pub fn drain_charge(f_s: f64, f_t: f64, profile: &EnergyProfile, delta: f64) -> Result<f64> {
    nonnegative("f_s", f_s)?;
    nonnegative("f_t", f_t)?;
    let busy = profile.busy_seconds_per_hour(f_s, f_t);
    if busy > SECONDS_PER_HOUR {
        return Err(Error::InfeasibleDecision {
            window: 0,
            constraint: ConstraintKind::DutyCycle,
            violation: (busy - SECONDS_PER_HOUR) * delta,
        });
    }
    Ok(delta
        * (f_s * profile.i_sense * profile.d_sense
            + f_t * profile.i_transmit * profile.d_transmit
            + profile.i_sleep * (SECONDS_PER_HOUR - busy)))
}

/// Charge delivered to the battery over one window, A·s.
pub fn harvest_charge(mean_irradiance: f64, hm: &HarvestModel, battery: &BatteryModel, delta: f64) -> Result<f64> {
    nonnegative("irradiance", mean_irradiance)?;
    Ok(hm.efficiency_eta * mean_irradiance * hm.panel_area * SECONDS_PER_HOUR * delta / battery.v_nom)
}

/// Moves charge between a window's start and end, clamping to `[0, 1]`.
pub fn apply_charge(z: SocState, drained: f64, harvested: f64, battery: &BatteryModel) -> SocTransition {
    let q = battery.capacity_as();
    let raw = z.0 + (harvested - drained) / q;
    let (next, spilled, unmet) = if raw > 1.0 {
        (1.0, (raw - 1.0) * q, 0.0)
    } else if raw < 0.0 {
        (0.0, 0.0, -raw * q)
    } else {
        (raw, 0.0, 0.0)
    };
    SocTransition {
        next: SocState(next),
        drained,
        harvested,
        spilled,
        unmet,
    }
}

/// One Coulomb-counting step with harvest.
#[allow(clippy::too_many_arguments)]
pub fn soc_step(
    z: SocState,
    f_s: f64,
    f_t: f64,
    profile: &EnergyProfile,
    hm: &HarvestModel,
    battery: &BatteryModel,
    irradiance: f64,
    delta: f64,
) -> Result<SocTransition> {
    let drained = drain_charge(f_s, f_t, profile, delta)?;
    let harvested = harvest_charge(irradiance, hm, battery, delta)?;
    Ok(apply_charge(z, drained, harvested, battery))
}

/// Open-circuit voltage at SoC `z`.
pub fn ocv(z: f64, battery: &BatteryModel) -> Result<f64> {
    unit_interval("z", z)?;
    Ok(battery.curve.voltage_at(z))
}

/// State of Energy in `[0, 1]`; 0 at or below the SoC floor.
pub fn soe_from_soc(z: f64, battery: &BatteryModel) -> Result<f64> {
    unit_interval("z", z)?;
    if z <= battery.z_min {
        return Ok(0.0);
    }
    if z >= 1.0 {
        return Ok(1.0);
    }
    Ok(battery.soe_extended(z).clamp(0.0, 1.0))
}

/// SoC whose SoE equals `soe`, by bisection to 1e-9.
pub fn soc_for_soe(soe: f64, battery: &BatteryModel) -> Result<SocState> {
    unit_interval("soe", soe)?;
    if soe == 0.0 {
        return Ok(SocState(battery.z_min));
    }
    if soe == 1.0 {
        return Ok(SocState::FULL);
    }
    let (mut lo, mut hi) = (battery.z_min, 1.0);
    while hi - lo > 1e-12 {
        let mid = 0.5 * (lo + hi);
        if battery.soe_extended(mid) < soe {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(SocState(0.5 * (lo + hi)))
}

/// Hours from full charge to the SoC floor at constant frequencies and no
/// harvest.
pub fn shutdown_time(profile: &EnergyProfile, battery: &BatteryModel, f_s: f64, f_t: f64) -> Result<f64> {
    let per_hour = drain_charge(f_s, f_t, profile, 1.0)?;
    if per_hour <= 0.0 {
        return Err(Error::Unbounded { what: "shutdown time" });
    }
    Ok((1.0 - battery.z_min) * battery.capacity_as() / per_hour)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    fn flat_battery() -> BatteryModel {
        BatteryModel::new(2.75, 0.015, 3.6, OcvCurve::constant(3.6).unwrap()).unwrap()
    }

    #[test]
    fn drain_examples() {
        let p = EnergyProfile::esp32_air_quality();
        assert!(close(drain_charge(0.0, 0.0, &p, 1.0).unwrap(), 5.148, 1e-12));
        assert!(close(drain_charge(100.0, 100.0, &p, 1.0).unwrap(), 191.2727, 1e-10));
        assert!(close(drain_charge(1.0, 0.0, &p, 1.0).unwrap(), 6.49441, 1e-12));
        assert!(close(drain_charge(0.0, 0.0, &p, 2.0).unwrap(), 2.0 * 5.148, 1e-12));
    }

    #[test]
    fn drain_rejects_overfull_window() {
        let p = EnergyProfile::esp32_air_quality();
        let err = drain_charge(300.0, 0.0, &p, 1.0).unwrap_err();
        assert!(matches!(
            err,
            Error::InfeasibleDecision {
                constraint: ConstraintKind::DutyCycle,
                ..
            }
        ));
        assert!(drain_charge(-1.0, 0.0, &p, 1.0).is_err());
    }

    #[test]
    fn harvest_examples() {
        let b = BatteryModel::molicel_p26a();
        let h = HarvestModel::small_panel();
        assert_eq!(harvest_charge(0.0, &h, &b, 1.0).unwrap(), 0.0);
        assert!(close(harvest_charge(1000.0, &h, &b, 1.0).unwrap(), 500.0, 1e-9));
        assert!(close(harvest_charge(200.0, &h, &b, 1.0).unwrap(), 100.0, 1e-9));
        assert!(harvest_charge(-1.0, &h, &b, 1.0).is_err());
    }

    #[test]
    fn soc_step_examples() {
        let b = BatteryModel::molicel_p26a();
        let h = HarvestModel::small_panel();
        let p = EnergyProfile::esp32_air_quality();
        let t = soc_step(SocState::FULL, 100.0, 100.0, &p, &h, &b, 0.0, 1.0).unwrap();
        assert!(close(t.next.value(), 0.980_679_525_252_525_3, 1e-14));
        let t = soc_step(SocState::new(0.5).unwrap(), 0.0, 0.0, &p, &h, &b, 0.0, 1.0).unwrap();
        assert!(close(t.next.value(), 0.49948, 1e-14));
        let t = apply_charge(SocState::FULL, 0.0, 500.0, &b);
        assert_eq!(t.next.value(), 1.0);
        assert!(close(t.spilled, 500.0, 1e-9));
    }

    #[test]
    fn lower_clamp_records_unmet_demand() {
        let b = BatteryModel::molicel_p26a();
        let t = apply_charge(SocState::new(0.001).unwrap(), 100.0, 0.0, &b);
        assert_eq!(t.next.value(), 0.0);
        assert!(close(t.unmet, 100.0 - 9.9, 1e-9));
        assert!(close(t.unfloored(&b), 0.001 - 100.0 / 9900.0, 1e-15));
    }

    #[test]
    fn ocv_interpolates() {
        let b = BatteryModel::molicel_p26a();
        assert_eq!(ocv(0.25, &b).unwrap(), 3.59);
        assert_eq!(ocv(1.0, &b).unwrap(), 4.2);
        assert!(close(ocv(0.275, &b).unwrap(), 0.5 * (3.59 + 3.62), 1e-12));
        assert!(ocv(1.1, &b).is_err());
        let flat = flat_battery();
        assert_eq!(ocv(0.37, &flat).unwrap(), 3.6);
    }

    #[test]
    fn soe_examples() {
        let b = BatteryModel::molicel_p26a();
        assert_eq!(soe_from_soc(b.z_min(), &b).unwrap(), 0.0);
        assert_eq!(soe_from_soc(0.0, &b).unwrap(), 0.0);
        assert_eq!(soe_from_soc(1.0, &b).unwrap(), 1.0);
        let flat = flat_battery();
        assert!(close(soe_from_soc(0.5075, &flat).unwrap(), 0.5, 1e-12));
    }

    #[test]
    fn denominator_is_trapezoid_over_knots() {
        // Independent trapezoid sum over the stored knots.
        let b = BatteryModel::molicel_p26a();
        let knots = DEFAULT_OCV_KNOTS;
        let mut total = 0.0;
        for w in knots.windows(2) {
            let (s0, v0) = w[0];
            let (s1, v1) = w[1];
            let a = s0.max(b.z_min());
            if s1 <= a {
                continue;
            }
            let va = v0 + (v1 - v0) * (a - s0) / (s1 - s0);
            total += 0.5 * (va + v1) * (s1 - a);
        }
        assert!(close(b.denominator_energy(), total, 1e-12));
    }

    #[test]
    fn shutdown_examples() {
        let b = BatteryModel::molicel_p26a();
        let p = EnergyProfile::esp32_air_quality();
        let t = shutdown_time(&p, &b, 100.0, 100.0).unwrap();
        assert!(close(t, 50.982_184_075_406_47, 1e-9));
        assert!((t - 50.3).abs() <= 0.05 * 50.3);
        let idle = shutdown_time(&p, &b, 0.0, 0.0).unwrap();
        assert!(close(idle, 1_894.230_769_230_769, 1e-8));
    }

    #[test]
    fn soc_for_soe_inverts() {
        let b = BatteryModel::molicel_p26a();
        for soe in [0.0, 0.1, 0.3, 0.5, 0.77, 1.0] {
            let z = soc_for_soe(soe, &b).unwrap();
            assert!(close(soe_from_soc(z.value(), &b).unwrap(), soe, 1e-9));
        }
    }

    #[test]
    fn curve_validation() {
        assert!(OcvCurve::new(&[(0.0, 3.0)]).is_err());
        assert!(OcvCurve::new(&[(0.1, 3.0), (1.0, 4.0)]).is_err());
        assert!(OcvCurve::new(&[(0.0, 3.0), (0.9, 4.0)]).is_err());
        assert!(OcvCurve::new(&[(0.0, 3.0), (0.6, 3.5), (0.4, 3.6), (1.0, 4.0)]).is_err());
        assert!(OcvCurve::new(&[(0.0, 3.0), (0.5, 2.9), (1.0, 4.0)]).is_err());
        assert!(OcvCurve::new(&[(0.0, 0.0), (1.0, 4.0)]).is_err());
        let two = OcvCurve::new(&[(0.0, 3.0), (1.0, 4.2)]).unwrap();
        assert!(close(two.voltage_at(0.5), 3.6, 1e-12));
    }

    #[test]
    fn battery_validation() {
        let c = OcvCurve::default_li_ion();
        assert!(BatteryModel::new(0.0, 0.015, 3.6, c.clone()).is_err());
        assert!(BatteryModel::new(2.75, 1.0, 3.6, c.clone()).is_err());
        assert!(BatteryModel::new(2.75, -0.1, 3.6, c.clone()).is_err());
        assert!(BatteryModel::new(2.75, 0.015, 0.0, c).is_err());
    }

    #[test]
    fn profile_validation() {
        assert!(EnergyProfile::new(0.2, 0.105, 0.127, 13.0, 4.1).is_err());
        assert!(EnergyProfile::new(0.001, 0.105, 0.127, 0.0, 4.1).is_err());
        assert!(EnergyProfile::esp32_air_quality().validate().is_ok());
    }
}
