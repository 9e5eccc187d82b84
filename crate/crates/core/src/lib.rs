//! Simulation and control of a soft pneumatic shoulder exosuit: plant
//! models, GPI tracking control, trajectory generation, shoulder kinematics,
//! transfer-function identification and a scenario runner.

pub mod error;
pub mod gpi;
pub mod harness;
pub mod kinematics;
pub mod plant;
pub mod poly;
pub mod sysid;
pub mod trajectory;

pub use error::{Error, Result};
pub use gpi::{
    compute_gains, AntiWindup, ControllerState, GpiController, GpiDesign, GpiGains, RationalTf, SaturationLimits,
};
pub use harness::{run_scenario, JointId, Metrics, Scenario, SimResult};
pub use kinematics::{forward, inverse, ArmLength, ShoulderAngles, WristPosition};
pub use plant::{DisturbanceSpec, PlantState, SecondOrderTf};
pub use sysid::{estimate_tf, DiscreteArx2, Estimate, IoRecord};
pub use trajectory::{JointLimits, QuinticCoeffs, RefSample, Reference, TaughtSample, TaughtTrajectory};
