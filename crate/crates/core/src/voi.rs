//! Value of Information.
//!
//! Three factors are combined per decision window:
//!
//! - threat rating `v_c(x)`: how close the observed process value is to the
//!   critical threshold,
//! - process fidelity `v_r`: a saturating reward for sampling often,
//! - cost of update delay `v_d`: a decaying penalty for transmitting rarely.
//!
//! Both frequency terms are scaled by `1 / v_c`, so a more threatening
//! situation needs proportionally higher frequencies for the same value.
//! Frequencies are per hour; the window length `delta` is in hours.

use crate::error::{finite, nonnegative, positive, Result};
use crate::math::exp;

/// Lower bound applied to the threat rating before it is used as a divisor.
pub const THREAT_FLOOR: f64 = 1e-6;

/// Risk-appetite parameters and the critical threshold.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VoiParams {
    /// Threat decay rate per unit of process value.
    pub lambda_c: f64,
    /// Critical threshold, in process units.
    pub x_c: f64,
    /// Fidelity rate per sample.
    pub alpha_r: f64,
    /// Delay-cost decay rate per transmission.
    pub alpha_d: f64,
    /// Maximum (dimensionless) cost of update delay.
    pub d_o: f64,
    /// Decision-window duration in hours.
    pub delta: f64,
}

impl VoiParams {
    pub fn new(lambda_c: f64, x_c: f64, alpha_r: f64, alpha_d: f64, d_o: f64, delta: f64) -> Result<Self> {
        let p = Self {
            lambda_c,
            x_c,
            alpha_r,
            alpha_d,
            d_o,
            delta,
        };
        p.validate()?;
        Ok(p)
    }

    /// Flash-flood monitoring setup: threshold 3 m, one-hour windows.
    pub fn flood_monitoring() -> Self {
        Self {
            lambda_c: 1.4,
            x_c: 3.0,
            alpha_r: 0.018,
            alpha_d: 0.025,
            d_o: 0.5,
            delta: 1.0,
        }
    }

    /// A planner that tolerates threat: steep threat decay, slow fidelity.
    pub fn risk_inclined(x_c: f64, delta: f64) -> Self {
        Self {
            lambda_c: 1.0,
            x_c,
            alpha_r: 0.009,
            alpha_d: 0.025,
            d_o: 0.5,
            delta,
        }
    }

    /// A planner that stays alert: shallow threat decay, fast fidelity.
    pub fn risk_averse(x_c: f64, delta: f64) -> Self {
        Self {
            lambda_c: 0.5,
            x_c,
            alpha_r: 0.02,
            alpha_d: 0.25,
            d_o: 0.25,
            delta,
        }
    }

    pub fn validate(&self) -> Result<()> {
        positive("lambda_c", self.lambda_c)?;
        finite("x_c", self.x_c)?;
        positive("alpha_r", self.alpha_r)?;
        positive("alpha_d", self.alpha_d)?;
        positive("d_o", self.d_o)?;
        positive("delta", self.delta)?;
        Ok(())
    }
}

/// The individual factors behind one VoI evaluation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VoiBreakdown {
    pub v_c: f64,
    pub v_r: f64,
    pub v_d: f64,
    pub v_i: f64,
}

impl VoiBreakdown {
    /// Reassembles `v_i` from the factors.
    pub fn recombine(&self) -> f64 {
        self.v_c * self.v_r - self.v_c * self.v_d
    }
}

/// Threat rating in `(0, 1]`: `exp(-lambda_c (x_c - x))` below the threshold,
/// 1 at or above it.
pub fn threat_rating(x: f64, p: &VoiParams) -> Result<f64> {
    finite("x", x)?;
    if x < p.x_c {
        Ok(exp(-p.lambda_c * (p.x_c - x)))
    } else {
        Ok(1.0)
    }
}

fn floored(v_c: f64) -> f64 {
    if v_c.is_nan() {
        THREAT_FLOOR
    } else {
        v_c.clamp(THREAT_FLOOR, 1.0)
    }
}

/// Process fidelity `1 - exp(-alpha_r delta f_s / v_c)`.
pub fn process_fidelity(f_s: f64, v_c: f64, p: &VoiParams) -> Result<f64> {
    nonnegative("f_s", f_s)?;
    Ok(1.0 - exp(-p.alpha_r * p.delta * f_s / floored(v_c)))
}

/// Cost of update delay `d_o exp(-alpha_d f_t / v_c)`.
pub fn update_delay_cost(f_t: f64, v_c: f64, p: &VoiParams) -> Result<f64> {
    nonnegative("f_t", f_t)?;
    Ok(p.d_o * exp(-p.alpha_d * f_t / floored(v_c)))
}

/// Combined VoI together with its factors.
pub fn breakdown(x: f64, f_s: f64, f_t: f64, p: &VoiParams) -> Result<VoiBreakdown> {
    let v_c = floored(threat_rating(x, p)?);
    let v_r = process_fidelity(f_s, v_c, p)?;
    let v_d = update_delay_cost(f_t, v_c, p)?;
    Ok(VoiBreakdown {
        v_c,
        v_r,
        v_d,
        v_i: v_c * v_r - v_c * v_d,
    })
}

/// `v_c (1 - e^{-alpha_r delta f_s / v_c}) - v_c d_o e^{-alpha_d f_t / v_c}`.
pub fn value_of_information(x: f64, f_s: f64, f_t: f64, p: &VoiParams) -> Result<f64> {
    breakdown(x, f_s, f_t, p).map(|b| b.v_i)
}

/// Affine map of `[-d_o, 1]` onto `[0, 1]`.
pub fn normalize_voi(v_i: f64, p: &VoiParams) -> f64 {
    ((v_i + p.d_o) / (1.0 + p.d_o)).clamp(0.0, 1.0)
}

/// Partial derivatives of the VoI in `(f_s, f_t)` for a fixed threat rating.
pub(crate) fn voi_gradient(v_c: f64, f_s: f64, f_t: f64, p: &VoiParams) -> (f64, f64) {
    let v_c = floored(v_c);
    let ds = p.alpha_r * p.delta * exp(-p.alpha_r * p.delta * f_s / v_c);
    let dt = p.d_o * p.alpha_d * exp(-p.alpha_d * f_t / v_c);
    (ds, dt)
}

/// VoI for an already-floored threat rating; used on the solver hot path.
pub(crate) fn voi_with_threat(v_c: f64, f_s: f64, f_t: f64, p: &VoiParams) -> f64 {
    let v_c = floored(v_c);
    v_c * (1.0 - exp(-p.alpha_r * p.delta * f_s / v_c)) - v_c * p.d_o * exp(-p.alpha_d * f_t / v_c)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn flood() -> VoiParams {
        VoiParams::flood_monitoring()
    }

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn threat_rating_branches() {
        let p = flood();
        assert_eq!(threat_rating(3.0, &p).unwrap(), 1.0);
        assert_eq!(threat_rating(5.0, &p).unwrap(), 1.0);
        // e^{-1.4}
        assert!(close(threat_rating(2.0, &p).unwrap(), 0.246_596_963_941_606_5, 1e-15));
        assert!(threat_rating(f64::NAN, &p).is_err());
        assert!(threat_rating(f64::INFINITY, &p).is_err());
    }

    #[test]
    fn threat_rating_is_continuous_at_threshold() {
        let p = flood();
        let below = threat_rating(p.x_c - 1e-12, &p).unwrap();
        assert!(close(below, 1.0, 1e-11));
    }

    #[test]
    fn fidelity_examples() {
        let p = flood();
        assert_eq!(process_fidelity(0.0, 0.3, &p).unwrap(), 0.0);
        let full = process_fidelity(120.0, 1.0, &p).unwrap();
        assert!(close(full, 0.884_674_878_961_937_5, 1e-14));
        let half = process_fidelity(60.0, 0.5, &p).unwrap();
        assert!(close(half, full, 1e-15));
        assert!(process_fidelity(-1.0, 1.0, &p).is_err());
    }

    #[test]
    fn delay_cost_examples() {
        let p = flood();
        assert_eq!(update_delay_cost(0.0, 0.7, &p).unwrap(), 0.5);
        let v = update_delay_cost(120.0, 1.0, &p).unwrap();
        assert!(close(v, 0.024_893_534_183_931_97, 1e-15));
        let mut prev = update_delay_cost(0.0, 1.0, &p).unwrap();
        for f in 1..2000 {
            let next = update_delay_cost(f as f64, 1.0, &p).unwrap();
            assert!(next <= prev);
            prev = next;
        }
        assert!(prev < 1e-20);
        assert!(update_delay_cost(-0.5, 1.0, &p).is_err());
    }

    #[test]
    fn combined_examples() {
        let p = flood();
        assert_eq!(value_of_information(3.0, 0.0, 0.0, &p).unwrap(), -0.5);
        let v = value_of_information(3.0, 120.0, 120.0, &p).unwrap();
        assert!(close(v, 0.859_781_344_778_005_5, 1e-14));
    }

    #[test]
    fn tiny_threat_voi_is_threat() {
        // x chosen so that v_c = 1e-4 exactly: x = x_c - ln(1e4)/lambda_c.
        let p = flood();
        let x = p.x_c - libm::log(1e4) / p.lambda_c;
        let b = breakdown(x, 1.0, 1.0, &p).unwrap();
        assert!(close(b.v_c, 1e-4, 1e-15));
        assert!(close(b.v_i, 1e-4, 1e-12));
    }

    #[test]
    fn threat_floor_guards_exponent() {
        let p = flood();
        let b = breakdown(-1e6, 120.0, 120.0, &p).unwrap();
        assert_eq!(b.v_c, THREAT_FLOOR);
        assert!(b.v_i.is_finite());
    }

    #[test]
    fn normalize_examples() {
        let p = flood();
        assert_eq!(normalize_voi(-0.5, &p), 0.0);
        assert_eq!(normalize_voi(1.0, &p), 1.0);
        assert!(close(normalize_voi(0.25, &p), 0.5, 1e-15));
    }

    #[test]
    fn breakdown_recombines() {
        let p = flood();
        let b = breakdown(2.4, 37.0, 12.0, &p).unwrap();
        assert_eq!(b.recombine(), b.v_i);
    }

    #[test]
    fn risk_averse_threat_exceeds_risk_inclined() {
        let a = VoiParams::risk_averse(3.0, 1.0);
        let b = VoiParams::risk_inclined(3.0, 1.0);
        let va = threat_rating(2.0, &a).unwrap();
        let vb = threat_rating(2.0, &b).unwrap();
        assert!(close(va, 0.606_530_659_712_633_4, 1e-15));
        assert!(close(vb, 0.367_879_441_171_442_3, 1e-15));
        assert!(va > vb);
    }

    #[test]
    fn analytic_gradient_matches_finite_differences() {
        let p = flood();
        let v_c = threat_rating(2.6, &p).unwrap();
        let (fs, ft) = (40.0, 25.0);
        let (gs, gt) = voi_gradient(v_c, fs, ft, &p);
        let h = 1e-5;
        let ns = (voi_with_threat(v_c, fs + h, ft, &p) - voi_with_threat(v_c, fs - h, ft, &p)) / (2.0 * h);
        let nt = (voi_with_threat(v_c, fs, ft + h, &p) - voi_with_threat(v_c, fs, ft - h, &p)) / (2.0 * h);
        assert!(close(gs, ns, 1e-9));
        assert!(close(gt, nt, 1e-9));
    }

    #[test]
    fn invalid_params_rejected() {
        assert!(VoiParams::new(0.0, 3.0, 0.1, 0.1, 0.5, 1.0).is_err());
        assert!(VoiParams::new(1.0, f64::NAN, 0.1, 0.1, 0.5, 1.0).is_err());
        assert!(VoiParams::new(1.0, 3.0, 0.1, 0.1, -0.5, 1.0).is_err());
        assert!(VoiParams::new(1.0, 3.0, 0.1, 0.1, 0.5, 0.0).is_err());
    }
}
