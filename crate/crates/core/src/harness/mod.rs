//! Scenario-driven closed-loop simulation, metrics and artifact export.

pub mod export;
pub mod metrics;
pub mod plot;
pub mod scenario;
pub mod sim;

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::gpi::{GpiDesign, SaturationLimits};
use crate::plant::SecondOrderTf;
use crate::trajectory::JointLimits;

pub use export::{export_csv, export_metrics, read_series_csv, write_atomic};
pub use metrics::{compute_metrics, Metrics, SETTLE_THRESHOLD};
pub use plot::export_plot;
pub use scenario::{JointScenario, ReferenceSpec, Scenario};
pub use sim::{run_scenario, JointResult, Series, SimResult};

/// The two shoulder joints.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum JointId {
    /// Abduction/adduction.
    S1,
    /// Flexion/extension.
    S2,
}

impl JointId {
    pub const ALL: [JointId; 2] = [JointId::S1, JointId::S2];

    pub fn default_plant(self) -> SecondOrderTf {
        match self {
            JointId::S1 => SecondOrderTf::SHOULDER_ABAD,
            JointId::S2 => SecondOrderTf::SHOULDER_FE,
        }
    }

    pub fn default_design(self) -> GpiDesign {
        match self {
            JointId::S1 => GpiDesign { xi: 0.9, wn: 6.1 },
            JointId::S2 => GpiDesign { xi: 0.9, wn: 10.25 },
        }
    }

    pub fn default_limits(self) -> JointLimits {
        match self {
            JointId::S1 => JointLimits::SHOULDER_ABAD,
            JointId::S2 => JointLimits::SHOULDER_FE,
        }
    }

    pub fn default_saturation(self) -> SaturationLimits {
        SaturationLimits::default()
    }

    pub fn index(self) -> usize {
        match self {
            JointId::S1 => 0,
            JointId::S2 => 1,
        }
    }
}

impl fmt::Display for JointId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            JointId::S1 => "s1",
            JointId::S2 => "s2",
        })
    }
}

impl std::str::FromStr for JointId {
    type Err = crate::Error;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "s1" => Ok(JointId::S1),
            "s2" => Ok(JointId::S2),
            other => Err(crate::Error::InvalidParameter(format!(
                "unknown joint {other:?} (expected s1 or s2)"
            ))),
        }
    }
}
