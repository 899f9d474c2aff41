//! Synthetic test signals: autoregressive processes, saturated AR, and a
//! voiced-like pulse train through time-varying resonators.
//!
//! These stand in for a speech corpus when none is available. All generators
//! are seeded and deterministic.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::signal::{SignalBuffer, DEFAULT_BIT_DEPTH, DEFAULT_SAMPLE_RATE};

/// Peak absolute value every generated signal is scaled to.
pub const PEAK: f64 = 0.9;

/// Direct-form coefficients `a` (for `x(n) = Σ a_i x(n-i) + e(n)`) of an
/// all-pole filter with the given conjugate pole pairs `(radius, angle)`.
pub fn ar_from_poles(poles: &[(f64, f64)]) -> Vec<f64> {
    // A(z) = Π (1 - 2 r cos θ z⁻¹ + r² z⁻²)
    let mut poly = vec![1.0];
    for &(r, theta) in poles {
        let section = [1.0, -2.0 * r * theta.cos(), r * r];
        let mut next = vec![0.0; poly.len() + 2];
        for (i, &p) in poly.iter().enumerate() {
            for (j, &s) in section.iter().enumerate() {
                next[i + j] += p * s;
            }
        }
        poly = next;
    }
    poly[1..].iter().map(|c| -c).collect()
}

/// Stable AR(10) with resonances at speech-like formant positions.
pub fn formant_ar10(sample_rate: f64) -> Vec<f64> {
    let formants = [
        (0.96, 500.0),
        (0.94, 1500.0),
        (0.92, 2500.0),
        (0.90, 3300.0),
        (0.85, 3800.0),
    ];
    let poles: Vec<(f64, f64)> = formants
        .iter()
        .map(|&(r, f)| (r, 2.0 * PI * f / sample_rate))
        .collect();
    ar_from_poles(&poles)
}

fn filter_ar(coeffs: &[f64], excitation: &[f64]) -> Vec<f64> {
    let mut y = vec![0.0; excitation.len()];
    for n in 0..excitation.len() {
        let mut v = excitation[n];
        for (i, a) in coeffs.iter().enumerate() {
            if n > i {
                v += a * y[n - 1 - i];
            }
        }
        y[n] = v;
    }
    y
}

fn normalize_peak(x: &mut [f64], peak: f64) {
    let m = x.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if m > 0.0 {
        for v in x.iter_mut() {
            *v *= peak / m;
        }
    }
}

const WARMUP: usize = 1000;

fn gaussian(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    (0..n).map(|_| rng.sample(StandardNormal)).collect()
}

/// Gaussian-driven AR process, scaled to [`PEAK`].
pub fn ar_process(coeffs: &[f64], n: usize, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let e = gaussian(&mut rng, n + WARMUP);
    let mut x = filter_ar(coeffs, &e).split_off(WARMUP);
    normalize_peak(&mut x, PEAK);
    x
}

/// Saturating autoregression `x(n) = tanh(gain · Σ a_i x(n-i) + sigma · e(n))`,
/// scaled to [`PEAK`]. With `gain > 1` the linear part is unstable and the
/// `tanh` bounds it into a noisy limit cycle.
pub fn saturated_ar(coeffs: &[f64], n: usize, gain: f64, sigma: f64, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let e = gaussian(&mut rng, n + WARMUP);
    let mut x = vec![0.0; e.len()];
    for t in 0..x.len() {
        let mut v = 0.0;
        for (i, a) in coeffs.iter().enumerate() {
            if t > i {
                v += a * x[t - 1 - i];
            }
        }
        x[t] = (gain * v + sigma * e[t]).tanh();
    }
    let mut x = x.split_off(WARMUP);
    normalize_peak(&mut x, PEAK);
    x
}

/// White Gaussian noise, scaled to [`PEAK`].
pub fn noise(n: usize, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut x = gaussian(&mut rng, n);
    normalize_peak(&mut x, PEAK);
    x
}

/// Rosenberg glottal flow at phase `t` in `[0, 1)` of the pitch period
/// (opening 40%, closing 16%).
fn glottal_flow(t: f64) -> f64 {
    const OPEN: f64 = 0.4;
    const CLOSE: f64 = 0.16;
    if t < OPEN {
        0.5 * (1.0 - (PI * t / OPEN).cos())
    } else if t < OPEN + CLOSE {
        (0.5 * PI * (t - OPEN) / CLOSE).cos()
    } else {
        0.0
    }
}

/// Differentiated Rosenberg glottal flow through five resonators, with a
/// little aspiration noise. Pitch and the lower three formants glide
/// linearly towards new random targets every 200 to 600 samples, and a
/// syllable-rate envelope modulates the excitation, so the signal is only
/// stationary over a few tens of milliseconds.
pub fn voiced(n: usize, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let fs = DEFAULT_SAMPLE_RATE as f64;
    let target = |rng: &mut ChaCha8Rng| {
        [
            rng.random_range(90.0..220.0),
            rng.random_range(300.0..900.0),
            rng.random_range(900.0..2200.0),
            rng.random_range(2200.0..3000.0),
        ]
    };
    let syllable: f64 = rng.random_range(1000.0..1600.0);
    let mut from = target(&mut rng);
    let mut out = Vec::with_capacity(n);
    let mut state = [0.0; 10];
    let mut phase: f64 = 0.0;
    let mut last_flow = 0.0;
    let mut t = 0;
    while t < n {
        let to = target(&mut rng);
        let len = rng.random_range(200..600).min(n - t);
        for k in 0..len {
            let w = k as f64 / len as f64;
            let p: Vec<f64> = from.iter().zip(&to).map(|(a, b)| a + w * (b - a)).collect();
            let a = ar_from_poles(&[
                (0.97, 2.0 * PI * p[1] / fs),
                (0.95, 2.0 * PI * p[2] / fs),
                (0.92, 2.0 * PI * p[3] / fs),
                (0.85, 2.0 * PI * 3400.0 / fs),
                (0.80, 2.0 * PI * 3800.0 / fs),
            ]);
            phase = (phase + p[0] / fs).fract();
            let flow = glottal_flow(phase);
            let envelope = 0.05 + 0.95 * (PI * (t + k) as f64 / syllable).sin().powi(2);
            let exc = envelope * (flow - last_flow) + 0.002 * rng.sample::<f64, _>(StandardNormal);
            last_flow = flow;
            let mut v = exc;
            for (i, c) in a.iter().enumerate() {
                v += c * state[9 - i];
            }
            state.rotate_left(1);
            state[9] = v;
            out.push(v);
        }
        from = to;
        t += len;
    }
    normalize_peak(&mut out, PEAK);
    out
}

/// Named synthetic signal families.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SynthKind {
    /// AR(10) with formant-like poles.
    Ar,
    /// The same AR(10) with a `tanh` saturation inside the recursion.
    SaturatedAr,
    /// Voiced-like pulse train through time-varying resonators.
    Voiced,
    Noise,
}

impl SynthKind {
    pub const ALL: [SynthKind; 4] = [
        SynthKind::Ar,
        SynthKind::SaturatedAr,
        SynthKind::Voiced,
        SynthKind::Noise,
    ];

    pub fn name(self) -> &'static str {
        match self {
            SynthKind::Ar => "ar",
            SynthKind::SaturatedAr => "saturated",
            SynthKind::Voiced => "voiced",
            SynthKind::Noise => "noise",
        }
    }

    /// Generate `n` samples at 8 kHz.
    pub fn generate(self, n: usize, seed: u64) -> Vec<f64> {
        let a = formant_ar10(DEFAULT_SAMPLE_RATE as f64);
        match self {
            SynthKind::Ar => ar_process(&a, n, seed),
            SynthKind::SaturatedAr => saturated_ar(&a, n, SATURATION_GAIN, SATURATION_SIGMA, seed),
            SynthKind::Voiced => voiced(n, seed),
            SynthKind::Noise => noise(n, seed),
        }
    }

    pub fn signal(self, n: usize, seed: u64) -> SignalBuffer {
        SignalBuffer::new(self.generate(n, seed), DEFAULT_SAMPLE_RATE, DEFAULT_BIT_DEPTH)
            .expect("generated samples lie in [-1, 1)")
    }
}

/// Loop gain and innovation level of [`SynthKind::SaturatedAr`].
pub const SATURATION_GAIN: f64 = 1.5;
pub const SATURATION_SIGMA: f64 = 0.1;

impl fmt::Display for SynthKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SynthKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        SynthKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::InvalidConfig(format!("unknown synthetic signal {s:?}")))
    }
}

/// A labeled synthetic signal.
#[derive(Debug, Clone)]
pub struct SynthSignal {
    pub label: String,
    pub kind: SynthKind,
    pub seed: u64,
    pub signal: SignalBuffer,
}

/// `count` signals cycling through every kind, lengths cycling over 1, 2
/// and 3 seconds when `varied_length` is set (otherwise `seconds` each).
pub fn corpus(count: usize, seconds: f64, varied_length: bool, seed: u64) -> Vec<SynthSignal> {
    (0..count)
        .map(|i| {
            let kind = SynthKind::ALL[i % SynthKind::ALL.len()];
            let secs = if varied_length {
                1.0 + (i / SynthKind::ALL.len() % 3) as f64
            } else {
                seconds
            };
            let n = (secs * DEFAULT_SAMPLE_RATE as f64) as usize;
            let s = seed.wrapping_mul(1000).wrapping_add(i as u64);
            SynthSignal {
                label: format!("{}-{i:02}", kind.name()),
                kind,
                seed: s,
                signal: kind.signal(n, s),
            }
        })
        .collect()
}
