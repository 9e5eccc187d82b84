//! Robust GPI (generalized proportional integral) control for one joint.
//!
//! Gains come from matching the closed-loop characteristic polynomial of the
//! plant/compensator pair against `(s^2 + 2 xi wn s + wn^2)^2`. The discrete
//! law uses only the measured angle: velocity information enters through the
//! reference and through the integral reconstruction `theta_int = int u dt`.
//! All running integrals use the trapezoidal rule.

use std::cmp::Ordering;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{ensure_finite, Error, Result};
use crate::plant::SecondOrderTf;
use crate::poly;
use crate::trajectory::RefSample;

/// Closed-loop design parameters: damping ratio and natural frequency of the
/// repeated pole pair.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GpiDesign {
    pub xi: f64,
    pub wn: f64,
}

impl GpiDesign {
    pub fn new(xi: f64, wn: f64) -> Result<Self> {
        let d = GpiDesign { xi, wn };
        d.validate()?;
        Ok(d)
    }

    pub fn validate(&self) -> Result<()> {
        ensure_finite(self.xi, "xi")?;
        ensure_finite(self.wn, "wn")?;
        if self.xi <= 0.0 || self.wn <= 0.0 {
            return Err(Error::InvalidParameter(format!(
                "xi = {} and wn = {} must both be positive",
                self.xi, self.wn
            )));
        }
        Ok(())
    }

    /// The designed closed-loop pole (upper half plane). Each of the pair
    /// appears twice.
    pub fn placed_pole(&self) -> Complex64 {
        let re = -self.xi * self.wn;
        let disc = 1.0 - self.xi * self.xi;
        if disc >= 0.0 {
            Complex64::new(re, self.wn * disc.sqrt())
        } else {
            // overdamped: report the slower real root
            Complex64::new(re + self.wn * (-disc).sqrt(), 0.0)
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GpiGains {
    pub k0: f64,
    pub k1: f64,
    pub k2: f64,
    pub k3: f64,
}

impl GpiGains {
    pub fn as_array(&self) -> [f64; 4] {
        [self.k0, self.k1, self.k2, self.k3]
    }
}

/// Pole-placement gains for the `r = 0` compensator.
pub fn compute_gains(design: &GpiDesign, tf: &SecondOrderTf) -> Result<GpiGains> {
    design.validate()?;
    ensure_finite(tf.gamma1, "gamma1")?;
    ensure_finite(tf.gamma2, "gamma2")?;
    let GpiDesign { xi, wn } = *design;
    let (g1, g2) = (tf.gamma1, tf.gamma2);
    let wn2 = wn * wn;

    let k3 = 4.0 * xi * wn - g1;
    if k3 <= 0.0 {
        return Err(Error::UnstableCompensator { k3 });
    }
    Ok(GpiGains {
        k0: wn2 * wn2,
        k1: 4.0 * wn2 * wn * xi - g2 * k3,
        k2: 2.0 * wn2 + 4.0 * xi * xi * wn2 - g1 * k3 - g2,
        k3,
    })
}

/// `s^4 + (k3 + g1) s^3 + (k2 + k3 g1 + g2) s^2 + (k3 g2 + k1) s + k0`.
pub fn closed_loop_char_poly(gains: &GpiGains, tf: &SecondOrderTf) -> [f64; 5] {
    let GpiGains { k0, k1, k2, k3 } = *gains;
    let (g1, g2) = (tf.gamma1, tf.gamma2);
    [1.0, k3 + g1, k2 + k3 * g1 + g2, k3 * g2 + k1, k0]
}

/// Expansion of `(s^2 + 2 xi wn s + wn^2)^2`.
pub fn hurwitz_poly(design: &GpiDesign) -> [f64; 5] {
    let GpiDesign { xi, wn } = *design;
    let wn2 = wn * wn;
    [
        1.0,
        4.0 * xi * wn,
        2.0 * wn2 + 4.0 * xi * xi * wn2,
        4.0 * xi * wn2 * wn,
        wn2 * wn2,
    ]
}

/// Nominal input that makes the undisturbed plant follow the reference.
pub fn feedforward(tf: &SecondOrderTf, reference: &RefSample) -> f64 {
    (reference.theta_ddot_d + tf.gamma1 * reference.theta_dot_d + tf.gamma2 * reference.theta_d) / tf.gamma0
}

/// Actuator bounds in PWM-%.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SaturationLimits {
    pub u_min: f64,
    pub u_max: f64,
}

impl Default for SaturationLimits {
    /// Pressure only: `[0, 100]`.
    fn default() -> Self {
        SaturationLimits {
            u_min: 0.0,
            u_max: 100.0,
        }
    }
}

impl SaturationLimits {
    pub fn new(u_min: f64, u_max: f64) -> Result<Self> {
        let s = SaturationLimits { u_min, u_max };
        s.validate()?;
        Ok(s)
    }

    /// `[-limit, limit]`, i.e. vacuum allowed.
    pub fn symmetric(limit: f64) -> Result<Self> {
        Self::new(-limit, limit)
    }

    pub fn validate(&self) -> Result<()> {
        if self.u_min.partial_cmp(&self.u_max) != Some(Ordering::Less) {
            return Err(Error::InvalidParameter(format!(
                "saturation limits [{}, {}] are empty",
                self.u_min, self.u_max
            )));
        }
        Ok(())
    }

    pub fn clamp(&self, u: f64) -> f64 {
        u.clamp(self.u_min, self.u_max)
    }
}

/// How the integrators behave while the actuator is saturated.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum AntiWindup {
    /// Integrate regardless of saturation.
    None,
    /// Skip the error-integral updates on ticks where the raw command is
    /// clipped.
    Conditional,
    /// Feed the clipped excess `u - u_raw` back through a double integrator
    /// with characteristic polynomial `(s + bandwidth)^2`. Inactive while the
    /// command is inside the limits, so the unsaturated law is unchanged.
    BackCalculation { bandwidth: f64 },
}

impl AntiWindup {
    /// Back-calculation at twice the design natural frequency.
    pub fn default_for(design: &GpiDesign) -> Self {
        AntiWindup::BackCalculation {
            bandwidth: 2.0 * design.wn,
        }
    }
}

/// One trapezoidal update: `acc + dt/2 (prev + cur)`.
#[inline]
pub fn trapezoid(acc: f64, prev: f64, cur: f64, dt: f64) -> f64 {
    acc + 0.5 * dt * (prev + cur)
}

/// Running state of one control loop.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ControllerState {
    /// Trapezoidal `int e dt`.
    pub int_e: f64,
    /// Trapezoidal `int int e dt^2`.
    pub dint_e: f64,
    /// Integral reconstruction `int u dt` of the applied input.
    pub theta_int: f64,
    /// Tracking error at the first tick.
    pub e0: f64,
    /// Initial velocity estimate subtracted from `theta_int`.
    pub theta_dot0: f64,
    pub e_prev: f64,
    pub u_prev: f64,
    /// Unclipped command of the last tick.
    pub u_raw: f64,
    /// Back-calculation integrals of the clipped excess.
    pub aw_int: f64,
    pub aw_dint: f64,
    pub aw_excess_prev: f64,
    pub t: f64,
    pub ticks: u64,
}

impl ControllerState {
    pub fn new(e0: f64, theta_dot0: f64) -> Self {
        ControllerState {
            int_e: 0.0,
            dint_e: 0.0,
            theta_int: 0.0,
            e0,
            theta_dot0,
            e_prev: e0,
            u_prev: 0.0,
            u_raw: 0.0,
            aw_int: 0.0,
            aw_dint: 0.0,
            aw_excess_prev: 0.0,
            t: 0.0,
            ticks: 0,
        }
    }

    /// State for a loop whose first measurement is `theta_meas` against
    /// `reference`.
    pub fn start(theta_meas: f64, reference: &RefSample) -> Self {
        Self::new(theta_meas - reference.theta_d, reference.theta_dot_d)
    }
}

/// The per-joint discrete GPI law.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GpiController {
    pub gains: GpiGains,
    pub tf: SecondOrderTf,
    pub saturation: SaturationLimits,
    pub anti_windup: AntiWindup,
}

impl GpiController {
    pub fn new(gains: GpiGains, tf: SecondOrderTf, saturation: SaturationLimits) -> Self {
        GpiController {
            gains,
            tf,
            saturation,
            anti_windup: AntiWindup::Conditional,
        }
    }

    pub fn with_anti_windup(mut self, anti_windup: AntiWindup) -> Self {
        self.anti_windup = anti_windup;
        self
    }

    /// Gains from `design`, back-calculation anti-windup at `2 wn`.
    pub fn from_design(design: &GpiDesign, tf: SecondOrderTf, saturation: SaturationLimits) -> Result<Self> {
        let gains = compute_gains(design, &tf)?;
        Ok(Self::new(gains, tf, saturation).with_anti_windup(AntiWindup::default_for(design)))
    }

    /// One controller tick. Returns the saturated command and the successor
    /// state.
    ///
    /// `u = u_d - k3 (theta_int - theta_dot0 - theta_dot_d)
    ///      + (1/g0) [-k2 (e - e0) - k1 int e - k0 int int e]`
    ///
    /// `theta_int` includes the current tick's input (trapezoid), so the
    /// law is solved for `u` in closed form before clipping.
    pub fn step(
        &self,
        cs: &ControllerState,
        theta_meas: f64,
        reference: &RefSample,
        dt: f64,
    ) -> Result<(f64, ControllerState)> {
        ensure_finite(theta_meas, "measured angle")?;
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "controller period {dt} must be positive"
            )));
        }
        let GpiGains { k0, k1, k2, k3 } = self.gains;
        let first = cs.ticks == 0;
        let h = if first { 0.0 } else { 0.5 * dt };

        let e = theta_meas - reference.theta_d;
        let u_d = feedforward(&self.tf, reference);

        let int_e = cs.int_e + h * (cs.e_prev + e);
        let dint_e = cs.dint_e + h * (cs.int_e + int_e);

        let (aw_int, aw_dint, correction) = match self.anti_windup {
            AntiWindup::BackCalculation { bandwidth: a } => {
                let aw_int = cs.aw_int + 2.0 * h * cs.aw_excess_prev;
                let aw_dint = cs.aw_dint + h * (cs.aw_int + aw_int);
                (aw_int, aw_dint, 2.0 * a * aw_int + a * a * aw_dint)
            }
            _ => (0.0, 0.0, 0.0),
        };

        // theta_int(k) = base + h * u(k)
        let base = cs.theta_int + h * cs.u_prev;
        let fixed = u_d
            + k3 * (cs.theta_dot0 + reference.theta_dot_d)
            + (-k2 * (e - cs.e0) - k1 * int_e - k0 * dint_e) / self.tf.gamma0
            + correction;
        let u_raw = (fixed - k3 * base) / (1.0 + k3 * h);
        ensure_finite(u_raw, "control command")?;
        let u = self.saturation.clamp(u_raw);
        let saturated = u != u_raw;

        let (int_e, dint_e) = match self.anti_windup {
            AntiWindup::Conditional if saturated => (cs.int_e, cs.dint_e),
            _ => (int_e, dint_e),
        };

        let next = ControllerState {
            int_e,
            dint_e,
            theta_int: base + h * u,
            e0: cs.e0,
            theta_dot0: cs.theta_dot0,
            e_prev: e,
            u_prev: u,
            u_raw,
            aw_int,
            aw_dint,
            aw_excess_prev: if matches!(self.anti_windup, AntiWindup::BackCalculation { .. }) {
                u - u_raw
            } else {
                0.0
            },
            t: if first { cs.t } else { cs.t + dt },
            ticks: cs.ticks + 1,
        };
        Ok((u, next))
    }
}

/// Free-function form of [`GpiController::step`].
#[allow(clippy::too_many_arguments)]
pub fn control_step(
    cs: &ControllerState,
    gains: &GpiGains,
    tf: &SecondOrderTf,
    theta_meas: f64,
    reference: &RefSample,
    dt: f64,
    sat: &SaturationLimits,
    anti_windup: AntiWindup,
) -> Result<(f64, ControllerState)> {
    GpiController::new(*gains, *tf, *sat)
        .with_anti_windup(anti_windup)
        .step(cs, theta_meas, reference, dt)
}

/// A real rational transfer function; coefficients in descending degree.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RationalTf {
    pub num: Vec<f64>,
    pub den: Vec<f64>,
}

impl RationalTf {
    pub fn new(num: Vec<f64>, den: Vec<f64>) -> Result<Self> {
        match den.first() {
            Some(&lead) if lead != 0.0 => Ok(RationalTf { num, den }),
            _ => Err(Error::InvalidParameter(
                "leading denominator coefficient must be nonzero".into(),
            )),
        }
    }
}

/// General-order compensator
/// `(k_{r+2} s^{r+2} + ... + k1 s + k0) / (s^{r+1} (s + k_{r+3}))`,
/// with `gains = [k0, k1, ..., k_{r+3}]`.
pub fn compensator_tf(r: usize, gains: &[f64]) -> Result<RationalTf> {
    let expected = r + 4;
    if gains.len() != expected {
        return Err(Error::GainCount {
            expected,
            got: gains.len(),
        });
    }
    let num: Vec<f64> = gains[..r + 3].iter().rev().copied().collect();
    let mut den = vec![0.0; r + 3];
    den[0] = 1.0;
    den[1] = gains[r + 3];
    RationalTf::new(num, den)
}

/// Closed-loop poles of plant and compensator in unity feedback:
/// roots of `den_p den_c + num_p num_c / g0` (or without the `1/g0` factor
/// when `scaled_by_inv_gamma0` is false).
pub fn closed_loop_poles_analysis(tf: &SecondOrderTf, comp: &RationalTf, scaled_by_inv_gamma0: bool) -> Vec<Complex64> {
    let open = poly::mul(&tf.denominator(), &comp.den);
    let mut fb = poly::mul(&tf.numerator(), &comp.num);
    if scaled_by_inv_gamma0 {
        fb = poly::scale(&fb, 1.0 / tf.gamma0);
    }
    poly::roots(&poly::add(&open, &fb))
}
