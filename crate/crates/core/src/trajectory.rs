//! Reference generators: rest-to-rest quintics, clipped-offset sines and
//! recorded demonstrations. Every generator emits position, velocity and
//! acceleration so the feedforward never has to differentiate measurements.

use std::path::Path;

use nalgebra::{SMatrix, SVector};
use serde::{Deserialize, Serialize};

use crate::error::{ensure_finite, Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct JointLimits {
    pub theta_min: f64,
    pub theta_max: f64,
}

impl JointLimits {
    /// Abduction/adduction (s1).
    pub const SHOULDER_ABAD: JointLimits = JointLimits {
        theta_min: 0.1745,
        theta_max: 1.396,
    };
    /// Flexion/extension (s2).
    pub const SHOULDER_FE: JointLimits = JointLimits {
        theta_min: 0.1745,
        theta_max: 0.5585,
    };

    pub fn new(theta_min: f64, theta_max: f64) -> Result<Self> {
        let l = JointLimits { theta_min, theta_max };
        l.validate()?;
        Ok(l)
    }

    pub fn validate(&self) -> Result<()> {
        if self.theta_min.partial_cmp(&self.theta_max) != Some(std::cmp::Ordering::Less) {
            return Err(Error::InvalidParameter(format!(
                "joint limits [{}, {}] are empty",
                self.theta_min, self.theta_max
            )));
        }
        Ok(())
    }

    /// Closed-interval membership.
    pub fn contains(&self, theta: f64) -> bool {
        (self.theta_min..=self.theta_max).contains(&theta)
    }

    pub fn clamp(&self, theta: f64) -> f64 {
        theta.clamp(self.theta_min, self.theta_max)
    }
}

/// Desired angle, velocity and acceleration at time `t`.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct RefSample {
    pub theta_d: f64,
    pub theta_dot_d: f64,
    pub theta_ddot_d: f64,
    pub t: f64,
}

/// `theta(t) = sum a[i] t^i` on `[0, duration]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuinticCoeffs {
    /// Ascending powers of `t`.
    pub a: [f64; 6],
    pub duration: f64,
}

/// Rest-to-rest quintic from `theta0` to `thetaf` in `duration` seconds:
/// zero velocity and acceleration at both ends.
pub fn quintic_fit(theta0: f64, thetaf: f64, duration: f64) -> Result<QuinticCoeffs> {
    ensure_finite(theta0, "quintic start")?;
    ensure_finite(thetaf, "quintic end")?;
    if !(duration > 0.0 && duration.is_finite()) {
        return Err(Error::InvalidDuration(duration));
    }
    let t = duration;
    let (t2, t3, t4, t5) = (t * t, t * t * t, t.powi(4), t.powi(5));
    #[rustfmt::skip]
    let m = SMatrix::<f64, 6, 6>::from_row_slice(&[
        1.0, 0.0, 0.0, 0.0,      0.0,       0.0,
        0.0, 1.0, 0.0, 0.0,      0.0,       0.0,
        0.0, 0.0, 2.0, 0.0,      0.0,       0.0,
        1.0, t,   t2,  t3,       t4,        t5,
        0.0, 1.0, 2.0 * t, 3.0 * t2, 4.0 * t3,  5.0 * t4,
        0.0, 0.0, 2.0, 6.0 * t,  12.0 * t2, 20.0 * t3,
    ]);
    let rhs = SVector::<f64, 6>::from_row_slice(&[theta0, 0.0, 0.0, thetaf, 0.0, 0.0]);
    let sol = m
        .lu()
        .solve(&rhs)
        .ok_or_else(|| Error::InvalidParameter("quintic boundary system is singular".into()))?;
    let mut a = [0.0; 6];
    a.copy_from_slice(sol.as_slice());
    if theta0 == thetaf {
        // exact constant, no rounding residue in the higher terms
        a = [theta0, 0.0, 0.0, 0.0, 0.0, 0.0];
    }
    Ok(QuinticCoeffs { a, duration })
}

/// Position and its first two derivatives. Outside `[0, duration]` the end
/// samples are held.
pub fn quintic_eval(c: &QuinticCoeffs, t: f64) -> RefSample {
    let tau = t.clamp(0.0, c.duration);
    let a = &c.a;
    let theta = a[0] + tau * (a[1] + tau * (a[2] + tau * (a[3] + tau * (a[4] + tau * a[5]))));
    let vel = a[1] + tau * (2.0 * a[2] + tau * (3.0 * a[3] + tau * (4.0 * a[4] + tau * 5.0 * a[5])));
    let acc = 2.0 * a[2] + tau * (6.0 * a[3] + tau * (12.0 * a[4] + tau * 20.0 * a[5]));
    RefSample {
        theta_d: theta,
        theta_dot_d: vel,
        theta_ddot_d: acc,
        t,
    }
}

/// `theta = (A/2) sin(f * tick + k) + A/2`.
///
/// `tick` counts controller periods, so `f` is in radians per tick and the
/// phase `k` is added directly to the argument. Derivatives are with respect
/// to wall-clock time `tick * dt`.
pub fn sine_ref(amplitude: f64, freq: f64, phase: f64, tick: f64, dt: f64) -> RefSample {
    let half = 0.5 * amplitude;
    let w = freq / dt;
    let arg = freq * tick + phase;
    let (s, c) = arg.sin_cos();
    RefSample {
        theta_d: half * s + half,
        theta_dot_d: half * w * c,
        theta_ddot_d: -half * w * w * s,
        t: tick * dt,
    }
}

/// Saturates the desired angle into the joint range. Clipped samples get zero
/// velocity and acceleration.
pub fn clamp_to_limits(r: &RefSample, lim: &JointLimits) -> RefSample {
    if lim.contains(r.theta_d) {
        *r
    } else {
        RefSample {
            theta_d: lim.clamp(r.theta_d),
            theta_dot_d: 0.0,
            theta_ddot_d: 0.0,
            t: r.t,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TaughtSample {
    pub t: f64,
    pub theta: f64,
    pub theta_dot: f64,
}

/// A recorded demonstration, kept verbatim.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TaughtTrajectory {
    pub samples: Vec<TaughtSample>,
    pub source: String,
}

/// Default demonstration window in seconds.
pub const TEACH_WINDOW: f64 = 5.0;

impl TaughtTrajectory {
    pub fn duration(&self) -> f64 {
        match (self.samples.first(), self.samples.last()) {
            (Some(a), Some(b)) => b.t - a.t,
            _ => 0.0,
        }
    }

    /// Reads a `t,theta,theta_dot` CSV.
    pub fn load_csv(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let mut rdr = csv::Reader::from_path(path).map_err(|e| Error::csv(path, e))?;
        let samples = rdr
            .deserialize::<TaughtSample>()
            .collect::<Result<Vec<_>, _>>()
            .map_err(|e| Error::csv(path, e))?;
        record_teach(samples)
    }

    pub fn save_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        crate::harness::export::write_atomic(path, |w| {
            let mut wtr = csv::WriterBuilder::new()
                .terminator(csv::Terminator::Any(b'\n'))
                .from_writer(w);
            wtr.write_record(["t", "theta", "theta_dot"])?;
            for s in &self.samples {
                wtr.write_record([s.t.to_string(), s.theta.to_string(), s.theta_dot.to_string()])?;
            }
            wtr.flush()?;
            Ok(())
        })
    }
}

/// Stores a stream of `(t, theta, theta_dot)` samples as a demonstration.
pub fn record_teach(samples: impl IntoIterator<Item = TaughtSample>) -> Result<TaughtTrajectory> {
    let samples: Vec<TaughtSample> = samples.into_iter().collect();
    if samples.len() < 2 {
        return Err(Error::TooFewSamples {
            needed: 2,
            got: samples.len(),
        });
    }
    for (i, s) in samples.iter().enumerate() {
        ensure_finite(s.t, "teach timestamp")?;
        ensure_finite(s.theta, "teach angle")?;
        ensure_finite(s.theta_dot, "teach velocity")?;
        if i > 0 && s.t <= samples[i - 1].t {
            return Err(Error::NonMonotoneTimestamps { index: i });
        }
    }
    Ok(TaughtTrajectory {
        samples,
        source: "imu-record".to_string(),
    })
}

/// Resamples a demonstration onto a uniform grid of period `dt` (linear
/// interpolation of angle and velocity) and estimates the acceleration by
/// central differences of the velocity, one-sided at the ends.
///
/// With `smooth` the resampled velocity is passed through a centered 5-tap
/// moving average before differencing. Sample times start at zero.
pub fn differentiate_teach(tt: &TaughtTrajectory, dt: f64, smooth: bool) -> Result<Vec<RefSample>> {
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "resampling period {dt} must be positive"
        )));
    }
    let s = &tt.samples;
    let t0 = s[0].t;
    let span = tt.duration();
    let n = (span / dt + 1e-9).floor() as usize + 1;

    let mut theta = Vec::with_capacity(n);
    let mut vel = Vec::with_capacity(n);
    let mut j = 0;
    for k in 0..n {
        let t = t0 + k as f64 * dt;
        while j + 2 < s.len() && s[j + 1].t <= t {
            j += 1;
        }
        let (a, b) = (&s[j], &s[j + 1]);
        let w = ((t - a.t) / (b.t - a.t)).clamp(0.0, 1.0);
        theta.push(a.theta + w * (b.theta - a.theta));
        vel.push(a.theta_dot + w * (b.theta_dot - a.theta_dot));
    }

    let vel_used = if smooth { moving_average5(&vel) } else { vel.clone() };
    let acc: Vec<f64> = (0..n)
        .map(|k| {
            if n == 1 {
                0.0
            } else if k == 0 {
                (vel_used[1] - vel_used[0]) / dt
            } else if k == n - 1 {
                (vel_used[n - 1] - vel_used[n - 2]) / dt
            } else {
                (vel_used[k + 1] - vel_used[k - 1]) / (2.0 * dt)
            }
        })
        .collect();

    Ok((0..n)
        .map(|k| RefSample {
            theta_d: theta[k],
            theta_dot_d: vel[k],
            theta_ddot_d: acc[k],
            t: k as f64 * dt,
        })
        .collect())
}

// Window shrinks symmetrically near the ends.
fn moving_average5(v: &[f64]) -> Vec<f64> {
    let n = v.len();
    (0..n)
        .map(|i| {
            let half = 2.min(i).min(n - 1 - i);
            let win = &v[i - half..=i + half];
            win.iter().sum::<f64>() / win.len() as f64
        })
        .collect()
}

/// A reference source sampled once per controller tick.
#[derive(Debug, Clone, PartialEq)]
pub enum Reference {
    Quintic(QuinticCoeffs),
    Sine {
        amplitude: f64,
        freq: f64,
        phase: f64,
    },
    /// Pre-resampled demonstration on the controller grid; the last sample
    /// is held (at rest) once the demonstration ends.
    Taught(Vec<RefSample>),
}

impl Reference {
    pub fn sample(&self, tick: u64, dt: f64) -> RefSample {
        let t = tick as f64 * dt;
        match self {
            Reference::Quintic(c) => quintic_eval(c, t),
            Reference::Sine { amplitude, freq, phase } => sine_ref(*amplitude, *freq, *phase, tick as f64, dt),
            Reference::Taught(samples) => match samples.get(tick as usize) {
                Some(s) => RefSample { t, ..*s },
                None => {
                    let last = samples.last().copied().unwrap_or_default();
                    RefSample {
                        theta_d: last.theta_d,
                        theta_dot_d: 0.0,
                        theta_ddot_d: 0.0,
                        t,
                    }
                }
            },
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn constant_quintic() {
        let q = quintic_fit(0.3, 0.3, 4.0).unwrap();
        assert_eq!(q.a, [0.3, 0.0, 0.0, 0.0, 0.0, 0.0]);
    }

    #[test]
    fn unit_quintic_coefficients() {
        let q = quintic_fit(0.0, 1.0, 1.0).unwrap();
        let expect = [0.0, 0.0, 0.0, 10.0, -15.0, 6.0];
        for (a, b) in q.a.iter().zip(expect) {
            assert!((a - b).abs() < 1e-12, "{:?}", q.a);
        }
        let r = quintic_eval(&q, 0.5);
        assert_relative_eq!(r.theta_d, 0.5, epsilon = 1e-12);
        assert_relative_eq!(r.theta_dot_d, 1.875, epsilon = 1e-12);
        assert!(r.theta_ddot_d.abs() < 1e-12);
    }

    #[test]
    fn quintic_midpoint_and_ends() {
        let q = quintic_fit(0.1745, 0.6981, 10.0).unwrap();
        assert_relative_eq!(quintic_eval(&q, 5.0).theta_d, 0.4363, epsilon = 1e-12);
        let start = quintic_eval(&q, 0.0);
        assert_eq!(
            (start.theta_d, start.theta_dot_d, start.theta_ddot_d),
            (0.1745, 0.0, 0.0)
        );
        let end = quintic_eval(&q, 10.0);
        assert_relative_eq!(end.theta_d, 0.6981, epsilon = 1e-12);
        assert!(end.theta_dot_d.abs() < 1e-12 && end.theta_ddot_d.abs() < 1e-12);
        // held past the end
        assert_eq!(quintic_eval(&q, 12.0).theta_d, end.theta_d);
    }

    #[test]
    fn quintic_rejects_bad_duration() {
        assert!(matches!(quintic_fit(0.0, 1.0, 0.0), Err(Error::InvalidDuration(_))));
        assert!(quintic_fit(0.0, 1.0, -2.0).is_err());
    }

    #[test]
    fn sine_values() {
        let r = sine_ref(1.0, 1.6e-3, 0.0, 0.0, 0.065);
        assert_eq!(r.theta_d, 0.5);
        // crest: f t + k = pi/2
        let f = 2e-3;
        let tick = std::f64::consts::FRAC_PI_2 / f;
        let r = sine_ref(1.3, f, 0.0, tick, 0.065);
        assert_relative_eq!(r.theta_d, 1.3, epsilon = 1e-12);
        assert!(r.theta_dot_d.abs() < 1e-12);
        for k in 0..20_000u32 {
            let r = sine_ref(1.0, 1.6e-3, 300.0, k as f64, 0.065);
            assert!((0.0..=1.0).contains(&r.theta_d));
        }
    }

    #[test]
    fn clamping() {
        let lim = JointLimits::SHOULDER_ABAD;
        let r = RefSample {
            theta_d: 0.05,
            theta_dot_d: 0.3,
            theta_ddot_d: -1.0,
            t: 2.0,
        };
        assert_eq!(
            clamp_to_limits(&r, &lim),
            RefSample {
                theta_d: 0.1745,
                theta_dot_d: 0.0,
                theta_ddot_d: 0.0,
                t: 2.0
            }
        );
        let r = RefSample {
            theta_d: 0.5,
            theta_dot_d: 0.3,
            theta_ddot_d: -1.0,
            t: 2.0,
        };
        assert_eq!(clamp_to_limits(&r, &lim), r);
        // boundary is inside
        let r = RefSample { theta_d: 1.396, ..r };
        assert_eq!(clamp_to_limits(&r, &lim), r);
    }

    #[test]
    fn sine_valleys_flatten_under_limits() {
        let lim = JointLimits::SHOULDER_ABAD;
        let clipped: Vec<f64> = (0..8000)
            .map(|k| clamp_to_limits(&sine_ref(1.0, 1.6e-3, 300.0, k as f64, 0.065), &lim).theta_d)
            .collect();
        let flat = clipped.iter().filter(|&&x| x == 0.1745).count();
        assert!(flat > 100);
        assert!(clipped.iter().all(|&x| x >= 0.1745));
        // the crest at 1.0 is reachable and untouched
        assert!(clipped.iter().any(|&x| x > 0.99));
    }

    #[test]
    fn teach_recording() {
        let tt = record_teach([
            TaughtSample {
                t: 0.0,
                theta: 0.2,
                theta_dot: 0.0,
            },
            TaughtSample {
                t: 5.0,
                theta: 0.2,
                theta_dot: 0.0,
            },
        ])
        .unwrap();
        assert_eq!(tt.source, "imu-record");
        assert_eq!(tt.duration(), 5.0);
        let refs = differentiate_teach(&tt, 0.065, false).unwrap();
        assert!(refs.iter().all(|r| r.theta_d == 0.2 && r.theta_ddot_d == 0.0));

        assert!(matches!(record_teach(Vec::new()), Err(Error::TooFewSamples { .. })));
        let bad = [
            TaughtSample {
                t: 0.0,
                theta: 0.2,
                theta_dot: 0.0,
            },
            TaughtSample {
                t: 1.0,
                theta: 0.2,
                theta_dot: 0.0,
            },
            TaughtSample {
                t: 1.0,
                theta: 0.2,
                theta_dot: 0.0,
            },
        ];
        assert!(matches!(
            record_teach(bad),
            Err(Error::NonMonotoneTimestamps { index: 2 })
        ));
    }

    #[test]
    fn linear_velocity_gives_unit_acceleration() {
        let samples = (0..=50).map(|k| {
            let t = k as f64 * 0.1;
            TaughtSample {
                t,
                theta: 0.5 * t * t,
                theta_dot: t,
            }
        });
        let tt = record_teach(samples).unwrap();
        let refs = differentiate_teach(&tt, 0.065, false).unwrap();
        for r in &refs[1..refs.len() - 1] {
            assert_relative_eq!(r.theta_ddot_d, 1.0, epsilon = 1e-9);
        }
    }

    #[test]
    fn smoothing_keeps_linear_profiles() {
        let v: Vec<f64> = (0..10).map(|k| k as f64).collect();
        let s = moving_average5(&v);
        for (a, b) in v.iter().zip(&s) {
            assert_relative_eq!(a, b, epsilon = 1e-12);
        }
    }

    #[test]
    fn taught_reference_holds_after_end() {
        let samples = vec![
            RefSample {
                theta_d: 0.2,
                theta_dot_d: 0.1,
                theta_ddot_d: 0.0,
                t: 0.0,
            },
            RefSample {
                theta_d: 0.3,
                theta_dot_d: 0.1,
                theta_ddot_d: 0.0,
                t: 0.1,
            },
        ];
        let r = Reference::Taught(samples).sample(7, 0.1);
        assert_eq!(r.theta_d, 0.3);
        assert_eq!(r.theta_dot_d, 0.0);
        assert_relative_eq!(r.t, 0.7);
    }
}
