//! Declarative experiment description, stored as JSON.

use std::collections::BTreeSet;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::JointId;
use crate::error::{ensure_finite, Error, Result};
use crate::gpi::{AntiWindup, GpiDesign, SaturationLimits};
use crate::plant::{DisturbanceSpec, SecondOrderTf};
use crate::sysid::DEFAULT_TS;
use crate::trajectory::{differentiate_teach, quintic_fit, JointLimits, Reference, TaughtTrajectory};

/// Reference generator for one joint.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ReferenceSpec {
    /// Rest-to-rest quintic starting at `t = 0`.
    Quintic { theta0: f64, thetaf: f64, duration: f64 },
    /// `(A/2) sin(f k + phase) + A/2`, `k` the tick index.
    Sine { amplitude: f64, freq: f64, phase: f64 },
    /// A recorded `t,theta,theta_dot` demonstration.
    Taught {
        file: PathBuf,
        /// Moving-average the velocity before differencing.
        #[serde(default)]
        smooth: bool,
    },
}

impl ReferenceSpec {
    pub fn build(&self, dt: f64) -> Result<Reference> {
        match self {
            ReferenceSpec::Quintic {
                theta0,
                thetaf,
                duration,
            } => Ok(Reference::Quintic(quintic_fit(*theta0, *thetaf, *duration)?)),
            ReferenceSpec::Sine { amplitude, freq, phase } => {
                ensure_finite(*amplitude, "sine amplitude")?;
                ensure_finite(*freq, "sine frequency")?;
                ensure_finite(*phase, "sine phase")?;
                Ok(Reference::Sine {
                    amplitude: *amplitude,
                    freq: *freq,
                    phase: *phase,
                })
            }
            ReferenceSpec::Taught { file, smooth } => {
                let tt = TaughtTrajectory::load_csv(file)?;
                Ok(Reference::Taught(differentiate_teach(&tt, dt, *smooth)?))
            }
        }
    }
}

/// Per-joint settings. Omitted fields take the joint's defaults.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JointScenario {
    pub joint: JointId,
    pub reference: ReferenceSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub plant: Option<SecondOrderTf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub design: Option<GpiDesign>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub limits: Option<JointLimits>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub saturation: Option<SaturationLimits>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub anti_windup: Option<AntiWindup>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub disturbance: Option<DisturbanceSpec>,
    /// Plant angle at `t = 0`, at rest. Defaults to the clamped reference.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub initial_theta: Option<f64>,
}

impl JointScenario {
    pub fn new(joint: JointId, reference: ReferenceSpec) -> Self {
        JointScenario {
            joint,
            reference,
            plant: None,
            design: None,
            limits: None,
            saturation: None,
            anti_windup: None,
            disturbance: None,
            initial_theta: None,
        }
    }

    pub fn plant(&self) -> SecondOrderTf {
        self.plant.unwrap_or_else(|| self.joint.default_plant())
    }

    pub fn design(&self) -> GpiDesign {
        self.design.unwrap_or_else(|| self.joint.default_design())
    }

    pub fn limits(&self) -> JointLimits {
        self.limits.unwrap_or_else(|| self.joint.default_limits())
    }

    pub fn saturation(&self) -> SaturationLimits {
        self.saturation.unwrap_or_else(|| self.joint.default_saturation())
    }

    pub fn anti_windup(&self) -> AntiWindup {
        self.anti_windup
            .unwrap_or_else(|| AntiWindup::default_for(&self.design()))
    }

    fn validate(&self) -> Result<()> {
        self.plant().validate()?;
        self.design().validate()?;
        self.limits().validate()?;
        self.saturation().validate()?;
        if let Some(d) = &self.disturbance {
            d.validate()?;
        }
        if let Some(th) = self.initial_theta {
            ensure_finite(th, "initial angle")?;
        }
        if let AntiWindup::BackCalculation { bandwidth } = self.anti_windup() {
            if !(bandwidth > 0.0 && bandwidth.is_finite()) {
                return Err(Error::InvalidParameter(format!(
                    "anti-windup bandwidth {bandwidth} must be positive"
                )));
            }
        }
        if let ReferenceSpec::Taught { file, .. } = &self.reference {
            if !file.is_file() {
                return Err(Error::Io {
                    path: file.clone(),
                    source: std::io::Error::new(std::io::ErrorKind::NotFound, "taught trajectory file not found"),
                });
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub name: String,
    #[serde(default = "default_dt")]
    pub dt: f64,
    pub duration: f64,
    #[serde(default)]
    pub noise_amplitude: f64,
    #[serde(default)]
    pub seed: u64,
    pub joints: Vec<JointScenario>,
}

fn default_dt() -> f64 {
    DEFAULT_TS
}

/// Quintic length used by the bundled endpoint scenarios.
pub const ENDPOINT_MOTION: f64 = 10.0;
/// Run length of the bundled endpoint scenarios.
pub const ENDPOINT_RUN: f64 = 20.0;

impl Scenario {
    pub fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(Error::InvalidParameter(format!("dt {} must be positive", self.dt)));
        }
        if !(self.duration >= self.dt && self.duration.is_finite()) {
            return Err(Error::InvalidDuration(self.duration));
        }
        if !(self.noise_amplitude >= 0.0 && self.noise_amplitude.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "noise amplitude {} must be non-negative",
                self.noise_amplitude
            )));
        }
        if self.joints.is_empty() {
            return Err(Error::InvalidParameter("scenario has no joints".into()));
        }
        let mut seen = BTreeSet::new();
        for j in &self.joints {
            if !seen.insert(j.joint) {
                return Err(Error::InvalidParameter(format!("joint {} listed twice", j.joint)));
            }
            j.validate().map_err(|e| e.for_joint(j.joint))?;
        }
        Ok(())
    }

    /// Reads and validates a scenario file. Taught-trajectory paths are
    /// resolved against the scenario's directory.
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut s: Scenario = serde_json::from_str(&text).map_err(|e| Error::Json {
            path: path.to_path_buf(),
            source: e,
        })?;
        let base = path.parent().unwrap_or_else(|| Path::new(""));
        for j in &mut s.joints {
            if let ReferenceSpec::Taught { file, .. } = &mut j.reference {
                if file.is_relative() {
                    *file = base.join(&*file);
                }
            }
        }
        s.validate()?;
        Ok(s)
    }

    /// Number of logged samples: `ceil(duration / dt) + 1`.
    pub fn samples(&self) -> usize {
        (self.duration / self.dt - 1e-9).ceil() as usize + 1
    }

    /// Both joints start at their lower limit and follow a quintic to the
    /// target (clamped into the joint range). A target of zero means the
    /// joint holds its lower limit.
    pub fn endpoint(name: impl Into<String>, theta_s1: f64, theta_s2: f64) -> Self {
        let joints = [(JointId::S1, theta_s1), (JointId::S2, theta_s2)]
            .into_iter()
            .map(|(id, target)| {
                let lim = id.default_limits();
                let thetaf = if target == 0.0 {
                    lim.theta_min
                } else {
                    lim.clamp(target)
                };
                JointScenario::new(
                    id,
                    ReferenceSpec::Quintic {
                        theta0: lim.theta_min,
                        thetaf,
                        duration: ENDPOINT_MOTION,
                    },
                )
            })
            .collect();
        Scenario {
            name: name.into(),
            dt: DEFAULT_TS,
            duration: ENDPOINT_RUN,
            noise_amplitude: 0.0,
            seed: 0,
            joints,
        }
    }

    pub fn joint(&self, id: JointId) -> Option<&JointScenario> {
        self.joints.iter().find(|j| j.joint == id)
    }

    pub fn joint_mut(&mut self, id: JointId) -> Option<&mut JointScenario> {
        self.joints.iter_mut().find(|j| j.joint == id)
    }
}

/// Desired end-points `(theta_s1, theta_s2)` of the eight reaching motions.
#[allow(clippy::approx_constant)]
pub const TABLE_ENDPOINTS: [(f64, f64); 8] = [
    (0.6981, 0.0),
    (1.0472, 0.0),
    (0.0, 0.3491),
    (0.0, 0.5585),
    (0.6981, 0.3491),
    (0.6981, 0.5585),
    (1.3963, 0.3491),
    (1.3963, 0.5585),
];
