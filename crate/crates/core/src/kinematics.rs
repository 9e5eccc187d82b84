//! Two-DoF shoulder kinematics with the elbow held fixed relative to the
//! shoulder: the wrist sits on a sphere of radius `l_a` around the shoulder.

use nalgebra::Matrix4;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::trajectory::JointLimits;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ShoulderAngles {
    /// Abduction/adduction.
    pub theta_s1: f64,
    /// Flexion/extension.
    pub theta_s2: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WristPosition {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl WristPosition {
    pub fn norm(&self) -> f64 {
        (self.x * self.x + self.y * self.y + self.z * self.z).sqrt()
    }
}

/// Combined arm + forearm length in metres.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ArmLength(f64);

impl ArmLength {
    pub fn new(meters: f64) -> Result<Self> {
        if meters > 0.0 && meters.is_finite() {
            Ok(ArmLength(meters))
        } else {
            Err(Error::InvalidParameter(format!("arm length {meters} must be positive")))
        }
    }

    pub fn get(self) -> f64 {
        self.0
    }
}

impl Default for ArmLength {
    /// 0.14 m.
    fn default() -> Self {
        ArmLength(0.14)
    }
}

/// Standard Denavit-Hartenberg parameters of one link.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DhRow {
    pub theta: f64,
    pub d: f64,
    pub r: f64,
    pub alpha: f64,
}

/// `Rot_z(theta) Trans_z(d) Trans_x(r) Rot_x(alpha)`.
pub fn dh_matrix(row: &DhRow) -> Matrix4<f64> {
    let (st, ct) = row.theta.sin_cos();
    let (sa, ca) = row.alpha.sin_cos();
    #[rustfmt::skip]
    let m = Matrix4::new(
        ct, -st * ca,  st * sa, row.r * ct,
        st,  ct * ca, -ct * sa, row.r * st,
        0.0,      sa,       ca, row.d,
        0.0,     0.0,      0.0, 1.0,
    );
    m
}

/// Link table of the shoulder: `(theta_s1, 0, 0, -pi/2)` then
/// `(theta_s2, 0, l_a, 0)`, so that flexion lowers the wrist
/// (`z = -l_a sin(theta_s2)`).
pub fn shoulder_dh_rows(q: &ShoulderAngles, arm: ArmLength) -> [DhRow; 2] {
    [
        DhRow {
            theta: q.theta_s1,
            d: 0.0,
            r: 0.0,
            alpha: -std::f64::consts::FRAC_PI_2,
        },
        DhRow {
            theta: q.theta_s2,
            d: 0.0,
            r: arm.get(),
            alpha: 0.0,
        },
    ]
}

/// Shoulder-origin to wrist transform.
pub fn shoulder_transform(q: &ShoulderAngles, arm: ArmLength) -> Matrix4<f64> {
    shoulder_dh_rows(q, arm)
        .iter()
        .map(dh_matrix)
        .fold(Matrix4::identity(), |acc, m| acc * m)
}

pub fn forward(q: &ShoulderAngles, arm: ArmLength) -> WristPosition {
    let la = arm.get();
    let (s1, c1) = q.theta_s1.sin_cos();
    let (s2, c2) = q.theta_s2.sin_cos();
    WristPosition {
        x: la * c1 * c2,
        y: la * c2 * s1,
        z: -la * s2,
    }
}

pub fn inverse(p: &WristPosition, arm: ArmLength) -> Result<ShoulderAngles> {
    let la = arm.get();
    if p.z.abs() > la {
        return Err(Error::Unreachable { z: p.z.abs(), arm: la });
    }
    if p.x == 0.0 && p.y == 0.0 {
        return Err(Error::Singular);
    }
    Ok(ShoulderAngles {
        theta_s1: p.y.atan2(p.x),
        theta_s2: (-p.z / la).asin(),
    })
}

pub fn in_workspace(q: &ShoulderAngles, s1: &JointLimits, s2: &JointLimits) -> bool {
    s1.contains(q.theta_s1) && s2.contains(q.theta_s2)
}
