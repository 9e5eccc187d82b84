//! Continuous second-order plant models, one per actuated degree of freedom,
//! and their fixed-step simulation.
//!
//! Each joint obeys `theta'' = -g1 * theta' - g2 * theta + g0 * (u + rho)`,
//! i.e. the transfer function `g0 / (s^2 + g1 s + g2)` from PWM-% to radians
//! with an additive input disturbance `rho`.

use nalgebra::{Matrix2, RowVector2, Vector2};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{ensure_finite, Error, Result};

/// `gamma0 / (s^2 + gamma1 s + gamma2)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SecondOrderTf {
    pub gamma0: f64,
    pub gamma1: f64,
    pub gamma2: f64,
}

impl SecondOrderTf {
    /// Identified shoulder abduction/adduction model (joint s1).
    pub const SHOULDER_ABAD: SecondOrderTf = SecondOrderTf {
        gamma0: 0.0005725,
        gamma1: 0.05725,
        gamma2: 0.044,
    };

    /// Identified shoulder flexion/extension model (joint s2).
    pub const SHOULDER_FE: SecondOrderTf = SecondOrderTf {
        gamma0: 0.0003665,
        gamma1: 0.213,
        gamma2: 0.04079,
    };

    /// Builds a model, enforcing `gamma0 > 0`, `gamma1 >= 0` and `gamma2 > 0`.
    pub fn new(gamma0: f64, gamma1: f64, gamma2: f64) -> Result<Self> {
        let tf = SecondOrderTf { gamma0, gamma1, gamma2 };
        tf.validate()?;
        Ok(tf)
    }

    pub fn validate(&self) -> Result<()> {
        ensure_finite(self.gamma0, "gamma0")?;
        ensure_finite(self.gamma1, "gamma1")?;
        ensure_finite(self.gamma2, "gamma2")?;
        if self.gamma0 <= 0.0 {
            return Err(Error::InvalidParameter(format!(
                "gamma0 = {} must be positive",
                self.gamma0
            )));
        }
        if self.gamma1 < 0.0 {
            return Err(Error::InvalidParameter(format!(
                "gamma1 = {} must be non-negative",
                self.gamma1
            )));
        }
        if self.gamma2 <= 0.0 {
            return Err(Error::InvalidParameter(format!(
                "gamma2 = {} must be positive",
                self.gamma2
            )));
        }
        Ok(())
    }

    pub fn numerator(&self) -> [f64; 1] {
        [self.gamma0]
    }

    pub fn denominator(&self) -> [f64; 3] {
        [1.0, self.gamma1, self.gamma2]
    }
}

/// Controllable canonical realization `x' = A x + B u`, `theta = C x` with
/// `x = (theta, theta')`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StateSpace {
    pub a: Matrix2<f64>,
    pub b: Vector2<f64>,
    pub c: RowVector2<f64>,
}

pub fn to_state_space(tf: &SecondOrderTf) -> StateSpace {
    StateSpace {
        a: Matrix2::new(0.0, 1.0, -tf.gamma2, -tf.gamma1),
        b: Vector2::new(0.0, tf.gamma0),
        c: RowVector2::new(1.0, 0.0),
    }
}

/// Steady-state radians per PWM-%.
pub fn dc_gain(tf: &SecondOrderTf) -> Result<f64> {
    if tf.gamma2 == 0.0 {
        return Err(Error::MarginalPlant);
    }
    Ok(tf.gamma0 / tf.gamma2)
}

/// Roots of `s^2 + gamma1 s + gamma2`, ordered with the non-positive
/// imaginary part (or the more negative real root) first.
pub fn poles(tf: &SecondOrderTf) -> [Complex64; 2] {
    let half = -0.5 * tf.gamma1;
    let disc = half * half - tf.gamma2;
    if disc >= 0.0 {
        let r = disc.sqrt();
        [Complex64::new(half - r, 0.0), Complex64::new(half + r, 0.0)]
    } else {
        let w = (-disc).sqrt();
        [Complex64::new(half, -w), Complex64::new(half, w)]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct PlantState {
    pub theta: f64,
    pub theta_dot: f64,
    pub t: f64,
}

impl PlantState {
    pub fn at_rest(theta: f64) -> Self {
        PlantState {
            theta,
            theta_dot: 0.0,
            t: 0.0,
        }
    }
}

/// Constant input disturbance `magnitude * 1(t - onset)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DisturbanceSpec {
    pub magnitude: f64,
    pub onset: f64,
}

impl DisturbanceSpec {
    pub fn new(magnitude: f64, onset: f64) -> Result<Self> {
        let d = DisturbanceSpec { magnitude, onset };
        d.validate()?;
        Ok(d)
    }

    pub fn validate(&self) -> Result<()> {
        ensure_finite(self.magnitude, "disturbance magnitude")?;
        ensure_finite(self.onset, "disturbance onset")?;
        if self.onset < 0.0 {
            return Err(Error::InvalidParameter(format!(
                "disturbance onset {} is negative",
                self.onset
            )));
        }
        Ok(())
    }

    pub fn value_at(&self, t: f64) -> f64 {
        if t >= self.onset {
            self.magnitude
        } else {
            0.0
        }
    }
}

/// Advances the plant one fixed step with classical RK4, holding `u + rho`
/// constant over the step. `u` is expected to be saturated already.
pub fn step(state: &PlantState, tf: &SecondOrderTf, u: f64, rho: f64, dt: f64) -> Result<PlantState> {
    ensure_finite(state.theta, "plant angle")?;
    ensure_finite(state.theta_dot, "plant velocity")?;
    ensure_finite(state.t, "plant time")?;
    ensure_finite(u, "plant input")?;
    ensure_finite(rho, "disturbance")?;
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(Error::InvalidParameter(format!("step size {dt} must be positive")));
    }

    let drive = tf.gamma0 * (u + rho);
    let f = |theta: f64, omega: f64| (omega, -tf.gamma1 * omega - tf.gamma2 * theta + drive);

    let (x0, v0) = (state.theta, state.theta_dot);
    let (k1x, k1v) = f(x0, v0);
    let (k2x, k2v) = f(x0 + 0.5 * dt * k1x, v0 + 0.5 * dt * k1v);
    let (k3x, k3v) = f(x0 + 0.5 * dt * k2x, v0 + 0.5 * dt * k2v);
    let (k4x, k4v) = f(x0 + dt * k3x, v0 + dt * k3v);

    Ok(PlantState {
        theta: x0 + dt / 6.0 * (k1x + 2.0 * k2x + 2.0 * k3x + k4x),
        theta_dot: v0 + dt / 6.0 * (k1v + 2.0 * k2v + 2.0 * k3v + k4v),
        t: state.t + dt,
    })
}
