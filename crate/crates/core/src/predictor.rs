//! One-step predictors shared by the linear and nonlinear paths.

use crate::signal::snr_db;

/// Gain values are clamped into this range; a perfect predictor reports the
/// ceiling.
pub const GAIN_CLAMP_DB: (f64, f64) = (-80.0, 80.0);

/// Predicts the next sample from the `order()` most recent samples.
pub trait Predictor {
    fn order(&self) -> usize;

    /// `history` holds exactly `order()` samples, newest last.
    fn predict(&self, history: &[f64]) -> f64;
}

impl<P: Predictor + ?Sized> Predictor for &P {
    fn order(&self) -> usize {
        (**self).order()
    }

    fn predict(&self, history: &[f64]) -> f64 {
        (**self).predict(history)
    }
}

/// Always predicts zero (plain PCM of the residual).
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct ZeroPredictor;

impl Predictor for ZeroPredictor {
    fn order(&self) -> usize {
        0
    }

    fn predict(&self, _history: &[f64]) -> f64 {
        0.0
    }
}

/// Open-loop prediction gain in dB over `frame`, using true past samples.
///
/// `prefix` holds the samples preceding the frame (oldest first) and must be
/// at least `predictor.order()` long. A zero-energy frame reports 0 dB.
pub fn prediction_gain<P: Predictor + ?Sized>(predictor: &P, prefix: &[f64], frame: &[f64]) -> f64 {
    let p = predictor.order();
    assert!(prefix.len() >= p, "prefix shorter than predictor order");
    let signal: f64 = frame.iter().map(|v| v * v).sum();
    if signal == 0.0 {
        return 0.0;
    }
    let mut buf = Vec::with_capacity(p + frame.len());
    buf.extend_from_slice(&prefix[prefix.len() - p..]);
    buf.extend_from_slice(frame);
    let residual: f64 = frame
        .iter()
        .enumerate()
        .map(|(n, &x)| {
            let e = x - predictor.predict(&buf[n..n + p]);
            e * e
        })
        .sum();
    if !residual.is_finite() {
        return GAIN_CLAMP_DB.0;
    }
    snr_db(signal, residual, GAIN_CLAMP_DB)
}
