//! Tracking-error summaries.

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::sim::Series;
use crate::error::{Error, Result};

/// Band (rad) that defines settling.
pub const SETTLE_THRESHOLD: f64 = 0.03;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    pub mse: f64,
    pub rmse: f64,
    pub max_abs_error: f64,
    /// Mean `|e|` over the final 10 % of samples.
    pub steady_state_error: f64,
    /// First time after which `|e|` stays within [`SETTLE_THRESHOLD`];
    /// infinite (JSON `null`) if the run never settles.
    #[serde(serialize_with = "inf_as_null", deserialize_with = "null_as_inf")]
    pub settle_time: f64,
}

impl Metrics {
    pub fn settled(&self) -> bool {
        self.settle_time.is_finite()
    }
}

fn inf_as_null<S: Serializer>(v: &f64, s: S) -> std::result::Result<S::Ok, S::Error> {
    if v.is_finite() {
        s.serialize_f64(*v)
    } else {
        s.serialize_none()
    }
}

fn null_as_inf<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<f64, D::Error> {
    Ok(Option::<f64>::deserialize(d)?.unwrap_or(f64::INFINITY))
}

pub fn compute_metrics(series: &Series) -> Result<Metrics> {
    let e = &series.e;
    let n = e.len();
    if n == 0 {
        return Err(Error::TooFewSamples { needed: 1, got: 0 });
    }
    if series.t.len() != n {
        return Err(Error::LengthMismatch(series.t.len(), n));
    }
    let mse = e.iter().map(|v| v * v).sum::<f64>() / n as f64;
    let max_abs_error = e.iter().fold(0.0_f64, |m, v| m.max(v.abs()));

    let window = (n / 10).max(1);
    let tail = &e[n - window..];
    let steady_state_error = tail.iter().map(|v| v.abs()).sum::<f64>() / window as f64;

    let settle_time = match e.iter().rposition(|v| v.abs() > SETTLE_THRESHOLD) {
        None => series.t[0],
        Some(i) if i + 1 < n => series.t[i + 1],
        Some(_) => f64::INFINITY,
    };

    Ok(Metrics {
        mse,
        rmse: mse.sqrt(),
        max_abs_error,
        steady_state_error,
        settle_time,
    })
}
