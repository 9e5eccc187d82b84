//! Second-order transfer-function identification from sampled PWM/angle
//! records.
//!
//! A discrete ARX(2,1) model is fitted by linear least squares and mapped
//! back to `g0 / (s^2 + g1 s + g2)` through the inverse bilinear (Tustin)
//! substitution. For noisy records, [`estimate_tf`] low-pass prefilters the
//! data for the first fit and then refines it with a few Steiglitz-McBride
//! passes (least squares on data filtered by the current `1/A(q)`), which
//! removes most of the equation-error bias without leaving the linear
//! least-squares family.

use std::path::Path;

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{ensure_finite, Error, Result};
use crate::plant::{self, PlantState, SecondOrderTf};

/// Default sampling period of the identification data, in seconds.
pub const DEFAULT_TS: f64 = 0.065;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IoRecord {
    pub u: Vec<f64>,
    pub theta: Vec<f64>,
    pub ts: f64,
}

impl IoRecord {
    pub fn new(u: Vec<f64>, theta: Vec<f64>, ts: f64) -> Result<Self> {
        if u.len() != theta.len() {
            return Err(Error::LengthMismatch(u.len(), theta.len()));
        }
        if u.len() < 10 {
            return Err(Error::TooFewSamples {
                needed: 10,
                got: u.len(),
            });
        }
        if !(ts > 0.0 && ts.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "sampling period {ts} must be positive"
            )));
        }
        for (&a, &b) in u.iter().zip(&theta) {
            ensure_finite(a, "input sample")?;
            ensure_finite(b, "output sample")?;
        }
        Ok(IoRecord { u, theta, ts })
    }

    pub fn len(&self) -> usize {
        self.u.len()
    }

    pub fn is_empty(&self) -> bool {
        self.u.is_empty()
    }

    /// Reads a `t,u,theta` CSV. The `t` column is ignored in favour of `ts`.
    pub fn load_csv(path: impl AsRef<Path>, ts: f64) -> Result<Self> {
        #[derive(Deserialize)]
        struct Row {
            #[allow(dead_code)]
            t: f64,
            u: f64,
            theta: f64,
        }
        let path = path.as_ref();
        let mut rdr = csv::Reader::from_path(path).map_err(|e| Error::csv(path, e))?;
        let mut u = Vec::new();
        let mut theta = Vec::new();
        for row in rdr.deserialize::<Row>() {
            let row = row.map_err(|e| Error::csv(path, e))?;
            u.push(row.u);
            theta.push(row.theta);
        }
        IoRecord::new(u, theta, ts)
    }
}

/// Which input term the ARX regression uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InputRegressor {
    /// `b0 u[k-1]`.
    #[default]
    Delayed,
    /// `b0 (u[k-1] + u[k-2]) / 2`, which matches a zero-order-held input
    /// driving a slow second-order plant.
    HoldAveraged,
}

/// `theta[k] = -a1 theta[k-1] - a2 theta[k-2] + b0 * input`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DiscreteArx2 {
    pub a1: f64,
    pub a2: f64,
    pub b0: f64,
    #[serde(default)]
    pub input: InputRegressor,
}

impl DiscreteArx2 {
    /// Largest pole modulus of `z^2 + a1 z + a2`.
    pub fn spectral_radius(&self) -> f64 {
        let disc = self.a1 * self.a1 - 4.0 * self.a2;
        if disc >= 0.0 {
            let r = disc.sqrt();
            ((-self.a1 + r) / 2.0).abs().max(((-self.a1 - r) / 2.0).abs())
        } else {
            self.a2.abs().sqrt()
        }
    }

    pub fn dc_gain(&self) -> f64 {
        self.b0 / (1.0 + self.a1 + self.a2)
    }

    /// Runs the difference equation from zero initial conditions.
    pub fn simulate(&self, u: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; u.len()];
        for k in 2..u.len() {
            y[k] = -self.a1 * y[k - 1] - self.a2 * y[k - 2] + self.b0 * input_term(self.input, u, k);
        }
        y
    }
}

fn input_term(kind: InputRegressor, u: &[f64], k: usize) -> f64 {
    match kind {
        InputRegressor::Delayed => u[k - 1],
        InputRegressor::HoldAveraged => 0.5 * (u[k - 1] + u[k - 2]),
    }
}

/// Least-squares ARX(2,1) fit with a one-sample input delay.
pub fn fit_arx2(rec: &IoRecord) -> Result<DiscreteArx2> {
    least_squares(&rec.theta, &rec.u, InputRegressor::Delayed)
}

fn least_squares(y: &[f64], u: &[f64], input: InputRegressor) -> Result<DiscreteArx2> {
    let n = y.len();
    if n < 5 {
        return Err(Error::TooFewSamples { needed: 5, got: n });
    }
    let rows = n - 2;
    let mut phi = DMatrix::<f64>::zeros(rows, 3);
    let mut rhs = DVector::<f64>::zeros(rows);
    for k in 2..n {
        let i = k - 2;
        phi[(i, 0)] = -y[k - 1];
        phi[(i, 1)] = -y[k - 2];
        phi[(i, 2)] = input_term(input, u, k);
        rhs[i] = y[k];
    }

    // Column scaling so the rank test does not depend on units.
    let mut scales = [0.0; 3];
    for (j, s) in scales.iter_mut().enumerate() {
        *s = phi.column(j).norm();
        if *s == 0.0 {
            return Err(Error::InsufficientExcitation);
        }
    }
    for (j, s) in scales.iter().enumerate() {
        phi.column_mut(j).scale_mut(1.0 / s);
    }
    let svd = phi.svd(true, true);
    let smax = svd.singular_values.max();
    let smin = svd.singular_values.min();
    if smin <= 1e-12 * smax {
        return Err(Error::InsufficientExcitation);
    }
    let sol = svd.solve(&rhs, 0.0).map_err(|_| Error::InsufficientExcitation)?;
    Ok(DiscreteArx2 {
        a1: sol[0] / scales[0],
        a2: sol[1] / scales[1],
        b0: sol[2] / scales[2],
        input,
    })
}

/// Maps a discrete model back to continuous time with
/// `z = (1 + s ts/2) / (1 - s ts/2)`; the gain `g0` is set so that the DC
/// gains agree.
pub fn to_continuous(d: &DiscreteArx2, ts: f64) -> Result<SecondOrderTf> {
    if !(ts > 0.0 && ts.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "sampling period {ts} must be positive"
        )));
    }
    let h = 0.5 * ts;
    let at_minus_one = 1.0 - d.a1 + d.a2;
    let at_one = 1.0 + d.a1 + d.a2;
    let scale = 1.0 + d.a1.abs() + d.a2.abs();
    if at_minus_one.abs() <= 1e-14 * scale {
        return Err(Error::TustinSingularity);
    }
    if at_one.abs() <= 1e-14 * scale {
        return Err(Error::MarginalPlant);
    }
    let radius = d.spectral_radius();
    if radius >= 1.0 {
        return Err(Error::UnstableModel(radius));
    }
    let c2 = h * h * at_minus_one;
    let tf = SecondOrderTf {
        gamma0: d.b0 / c2,
        gamma1: 2.0 * h * (1.0 - d.a2) / c2,
        gamma2: at_one / c2,
    };
    tf.validate()?;
    Ok(tf)
}

/// Bilinear discretization with the input gain chosen to preserve the DC
/// gain, i.e. the exact inverse of [`to_continuous`].
pub fn discretize_tustin(tf: &SecondOrderTf, ts: f64, input: InputRegressor) -> Result<DiscreteArx2> {
    let k = 2.0 / ts;
    let c2 = k * k + tf.gamma1 * k + tf.gamma2;
    let c1 = -2.0 * k * k + 2.0 * tf.gamma2;
    let c0 = k * k - tf.gamma1 * k + tf.gamma2;
    let (a1, a2) = (c1 / c2, c0 / c2);
    let dc = plant::dc_gain(tf)?;
    Ok(DiscreteArx2 {
        a1,
        a2,
        b0: dc * (1.0 + a1 + a2),
        input,
    })
}

/// Normalized-RMSE fit: `100 (1 - |y - yhat| / |y - mean(y)|)`.
pub fn fit_percent(y: &[f64], yhat: &[f64]) -> Result<f64> {
    if y.len() != yhat.len() {
        return Err(Error::LengthMismatch(y.len(), yhat.len()));
    }
    if y.is_empty() {
        return Err(Error::TooFewSamples { needed: 1, got: 0 });
    }
    let mean = y.iter().sum::<f64>() / y.len() as f64;
    let den = y.iter().map(|v| (v - mean).powi(2)).sum::<f64>().sqrt();
    if den == 0.0 {
        return Err(Error::UndefinedFit);
    }
    let num = y.iter().zip(yhat).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
    Ok(100.0 * (1.0 - num / den))
}

/// Response of a continuous model to a zero-order-held input sampled every
/// `ts`, starting at rest at `theta0`. Element `k` is the angle at `k ts`,
/// before `u[k]` is applied.
pub fn simulate_tf(tf: &SecondOrderTf, u: &[f64], ts: f64, theta0: f64) -> Result<Vec<f64>> {
    let mut state = PlantState::at_rest(0.0);
    let mut out = Vec::with_capacity(u.len());
    for &uk in u {
        out.push(theta0 + state.theta);
        state = plant::step(&state, tf, uk, 0.0, ts)?;
    }
    Ok(out)
}

/// Settings for [`estimate_tf_with`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EstimateOptions {
    pub input: InputRegressor,
    /// Cut-off (rad/s) of the critically damped second-order low-pass used
    /// before the first fit; `None` fits the raw data.
    pub prefilter_bandwidth: Option<f64>,
    /// Steiglitz-McBride refinement passes after the first fit.
    pub refinement_passes: usize,
}

impl Default for EstimateOptions {
    fn default() -> Self {
        EstimateOptions {
            input: InputRegressor::HoldAveraged,
            prefilter_bandwidth: Some(1.0),
            refinement_passes: 5,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub tf: SecondOrderTf,
    pub arx: DiscreteArx2,
    /// Fit of the simulated model against the recorded angle, in percent.
    pub fit: f64,
}

/// Identifies `g0 / (s^2 + g1 s + g2)` from a record with the default
/// options.
pub fn estimate_tf(rec: &IoRecord) -> Result<Estimate> {
    estimate_tf_with(rec, &EstimateOptions::default())
}

/// The record is assumed to start at rest with zero input; the initial angle
/// is treated as the baseline.
pub fn estimate_tf_with(rec: &IoRecord, opts: &EstimateOptions) -> Result<Estimate> {
    let theta0 = rec.theta[0];
    let y: Vec<f64> = rec.theta.iter().map(|v| v - theta0).collect();
    let u = &rec.u;

    let mut arx = match opts.prefilter_bandwidth {
        Some(wc) => {
            let p = (-wc * rec.ts).exp();
            least_squares(&lowpass2(&y, p), &lowpass2(u, p), opts.input)?
        }
        None => least_squares(&y, u, opts.input)?,
    };
    for _ in 0..opts.refinement_passes {
        if arx.spectral_radius() >= 1.0 {
            break;
        }
        let yf = inverse_ar(&y, arx.a1, arx.a2);
        let uf = inverse_ar(u, arx.a1, arx.a2);
        match least_squares(&yf, &uf, opts.input) {
            Ok(next) => arx = next,
            Err(_) => break,
        }
    }

    let tf = to_continuous(&arx, rec.ts)?;
    let yhat = simulate_tf(&tf, u, rec.ts, theta0)?;
    let fit = fit_percent(&rec.theta, &yhat)?;
    Ok(Estimate { tf, arx, fit })
}

// Unity-DC-gain double first-order low-pass, zero initial state.
fn lowpass2(v: &[f64], p: f64) -> Vec<f64> {
    let mut out = v.to_vec();
    for _ in 0..2 {
        let mut s = 0.0;
        for x in out.iter_mut() {
            s = p * s + (1.0 - p) * *x;
            *x = s;
        }
    }
    out
}

// 1 / (1 + a1 q^-1 + a2 q^-2), zero initial state.
fn inverse_ar(v: &[f64], a1: f64, a2: f64) -> Vec<f64> {
    let mut out = vec![0.0; v.len()];
    for k in 0..v.len() {
        let y1 = if k >= 1 { out[k - 1] } else { 0.0 };
        let y2 = if k >= 2 { out[k - 2] } else { 0.0 };
        out[k] = v[k] - a1 * y1 - a2 * y2;
    }
    out
}

/// Seeded multi-step PWM profile: levels uniform in `[0, 100]`, each held
/// for a uniformly drawn number of samples in `hold`.
pub fn multistep_excitation(n: usize, seed: u64, hold: std::ops::Range<usize>) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut u = Vec::with_capacity(n);
    while u.len() < n {
        let len = rng.random_range(hold.clone()).max(1);
        let level: f64 = rng.random_range(0.0..=100.0);
        u.extend(std::iter::repeat_n(level, len.min(n - u.len())));
    }
    u
}
