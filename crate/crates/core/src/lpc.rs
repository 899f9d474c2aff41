//! Linear predictive analysis by the autocorrelation method.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::predictor::Predictor;

/// Analysis window applied to a frame before autocorrelation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Window {
    #[default]
    Rectangular,
    Hamming,
}

impl Window {
    pub fn name(self) -> &'static str {
        match self {
            Window::Rectangular => "rectangular",
            Window::Hamming => "hamming",
        }
    }

    fn apply(self, frame: &[f64]) -> Vec<f64> {
        match self {
            Window::Rectangular => frame.to_vec(),
            Window::Hamming => {
                let n = frame.len();
                if n < 2 {
                    return frame.to_vec();
                }
                let denom = (n - 1) as f64;
                frame
                    .iter()
                    .enumerate()
                    .map(|(i, &x)| {
                        let w = 0.54 - 0.46 * (2.0 * std::f64::consts::PI * i as f64 / denom).cos();
                        x * w
                    })
                    .collect()
            }
        }
    }
}

/// Order-p linear predictor: `x̂(n) = Σ coeffs[i-1] · x(n-i)`.
#[derive(Debug, Clone, PartialEq)]
pub struct LpcModel {
    coeffs: Vec<f64>,
    reflection: Vec<f64>,
    residual_energy: f64,
}

impl LpcModel {
    /// All-zero predictor of the given order.
    pub fn zero(order: usize) -> Self {
        Self {
            coeffs: vec![0.0; order],
            reflection: vec![0.0; order],
            residual_energy: 0.0,
        }
    }

    /// Model from explicit direct-form coefficients (no reflection data).
    pub fn from_coeffs(coeffs: Vec<f64>) -> Self {
        let order = coeffs.len();
        Self {
            coeffs,
            reflection: vec![0.0; order],
            residual_energy: 0.0,
        }
    }

    pub fn order(&self) -> usize {
        self.coeffs.len()
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn reflection(&self) -> &[f64] {
        &self.reflection
    }

    pub fn residual_energy(&self) -> f64 {
        self.residual_energy
    }
}

impl Predictor for LpcModel {
    fn order(&self) -> usize {
        self.coeffs.len()
    }

    fn predict(&self, history: &[f64]) -> f64 {
        lpc_predict(self, history)
    }
}

/// Biased autocorrelation `r(k) = Σ_{n=k}^{N-1} x(n)·x(n-k)` for `k = 0..=max_lag`.
/// Lags beyond the frame length are zero.
pub fn autocorrelation(frame: &[f64], max_lag: usize) -> Vec<f64> {
    (0..=max_lag)
        .map(|k| {
            if k >= frame.len() {
                0.0
            } else {
                frame[k..].iter().zip(frame).map(|(a, b)| a * b).sum()
            }
        })
        .collect()
}

/// Solve the Toeplitz normal equations by the Levinson-Durbin recursion.
///
/// An all-zero `r` yields the zero predictor. A step whose prediction error
/// is not positive (inconsistent `r`) is reported as
/// [`Error::DegenerateRecursion`].
pub fn levinson_durbin(r: &[f64], order: usize) -> Result<LpcModel> {
    if r.len() < order + 1 {
        return Err(Error::InvalidConfig(format!(
            "autocorrelation of length {} too short for order {order}",
            r.len()
        )));
    }
    if !(r[0] >= 0.0) {
        return Err(Error::DegenerateRecursion { order: 0 });
    }
    if r[0] == 0.0 {
        return Ok(LpcModel::zero(order));
    }

    let mut a = vec![0.0; order];
    let mut prev = vec![0.0; order];
    let mut reflection = vec![0.0; order];
    let mut err = r[0];
    for m in 0..order {
        let mut acc = r[m + 1];
        for i in 0..m {
            acc -= a[i] * r[m - i];
        }
        let k = acc / err;
        if !k.is_finite() || k.abs() > 1.0 {
            return Err(Error::DegenerateRecursion { order: m + 1 });
        }
        prev[..m].copy_from_slice(&a[..m]);
        for i in 0..m {
            a[i] = prev[i] - k * prev[m - 1 - i];
        }
        a[m] = k;
        reflection[m] = k;
        err *= 1.0 - k * k;
        if !(err > 0.0) && m + 1 < order {
            return Err(Error::DegenerateRecursion { order: m + 1 });
        }
    }
    Ok(LpcModel {
        coeffs: a,
        reflection,
        residual_energy: err.max(0.0),
    })
}

/// Autocorrelation analysis of one frame.
pub fn analyze(frame: &[f64], order: usize, window: Window) -> Result<LpcModel> {
    let windowed = window.apply(frame);
    levinson_durbin(&autocorrelation(&windowed, order), order)
}

/// `Σ coeffs[i-1] · history[p-i]`, history newest last.
pub fn lpc_predict(model: &LpcModel, history: &[f64]) -> f64 {
    let p = model.coeffs.len();
    debug_assert_eq!(history.len(), p);
    let mut acc = 0.0;
    for i in 0..p {
        acc += model.coeffs[i] * history[p - 1 - i];
    }
    acc
}
