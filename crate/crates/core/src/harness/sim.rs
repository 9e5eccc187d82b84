//! Closed-loop simulation of each joint under its GPI controller.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::metrics::{compute_metrics, Metrics};
use super::scenario::{JointScenario, Scenario};
use super::JointId;
use crate::error::Result;
use crate::gpi::{compute_gains, ControllerState, GpiController, GpiGains};
use crate::plant::{self, PlantState};
use crate::trajectory::clamp_to_limits;

/// Logged signals of one joint, one entry per controller tick.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Series {
    pub t: Vec<f64>,
    pub theta_d: Vec<f64>,
    /// Angle seen by the controller (plant output plus measurement noise).
    pub theta_meas: Vec<f64>,
    pub u: Vec<f64>,
    /// `theta_meas - theta_d`.
    pub e: Vec<f64>,
}

impl Series {
    pub fn with_capacity(n: usize) -> Self {
        Series {
            t: Vec::with_capacity(n),
            theta_d: Vec::with_capacity(n),
            theta_meas: Vec::with_capacity(n),
            u: Vec::with_capacity(n),
            e: Vec::with_capacity(n),
        }
    }

    pub fn len(&self) -> usize {
        self.t.len()
    }

    pub fn is_empty(&self) -> bool {
        self.t.is_empty()
    }

    pub fn push(&mut self, t: f64, theta_d: f64, theta_meas: f64, u: f64) {
        self.t.push(t);
        self.theta_d.push(theta_d);
        self.theta_meas.push(theta_meas);
        self.u.push(u);
        self.e.push(theta_meas - theta_d);
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JointResult {
    pub joint: JointId,
    pub gains: GpiGains,
    pub series: Series,
    pub metrics: Metrics,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimResult {
    pub scenario: Scenario,
    pub joints: Vec<JointResult>,
}

impl SimResult {
    pub fn joint(&self, id: JointId) -> Option<&JointResult> {
        self.joints.iter().find(|j| j.joint == id)
    }
}

/// Runs every joint of `s` independently. The result depends only on `s`,
/// including its seed.
pub fn run_scenario(s: &Scenario) -> Result<SimResult> {
    s.validate()?;
    let joints = s
        .joints
        .iter()
        .map(|js| run_joint(s, js).map_err(|e| e.for_joint(js.joint)))
        .collect::<Result<Vec<_>>>()?;
    Ok(SimResult {
        scenario: s.clone(),
        joints,
    })
}

fn run_joint(s: &Scenario, js: &JointScenario) -> Result<JointResult> {
    let tf = js.plant();
    let limits = js.limits();
    let gains = compute_gains(&js.design(), &tf)?;
    let controller = GpiController::new(gains, tf, js.saturation()).with_anti_windup(js.anti_windup());
    let reference = js.reference.build(s.dt)?;

    let mut rng = ChaCha8Rng::seed_from_u64(s.seed.wrapping_add(js.joint.index() as u64));
    let noise = s.noise_amplitude;

    let first = clamp_to_limits(&reference.sample(0, s.dt), &limits);
    let mut plant_state = PlantState::at_rest(js.initial_theta.unwrap_or(first.theta_d));
    let mut cs: Option<ControllerState> = None;

    let n = s.samples();
    let mut series = Series::with_capacity(n);
    for k in 0..n {
        let t = k as f64 * s.dt;
        let r = clamp_to_limits(&reference.sample(k as u64, s.dt), &limits);
        let meas = if noise > 0.0 {
            plant_state.theta + rng.random_range(-noise..=noise)
        } else {
            plant_state.theta
        };
        let state = cs.unwrap_or_else(|| ControllerState::start(meas, &r));
        let (u, next) = controller.step(&state, meas, &r, s.dt)?;
        cs = Some(next);
        series.push(t, r.theta_d, meas, u);

        let rho = js.disturbance.map_or(0.0, |d| d.value_at(t));
        plant_state = plant::step(&plant_state, &tf, u, rho, s.dt)?;
    }

    let metrics = compute_metrics(&series)?;
    Ok(JointResult {
        joint: js.joint,
        gains,
        series,
        metrics,
    })
}
