//! Adaptive mid-rise quantizer with per-level step multipliers.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const MIN_BITS: u8 = 2;
pub const MAX_BITS: u8 = 5;
const MAX_LEVELS: usize = 1 << (MAX_BITS - 1);

/// Step-size multipliers per magnitude level, for 2..=5 bits.
pub fn default_multipliers(nq: u8) -> Vec<f64> {
    match nq {
        2 => vec![0.8, 1.6],
        3 => vec![0.9, 0.9, 1.25, 1.75],
        4 => vec![0.9, 0.9, 0.9, 0.9, 1.2, 1.6, 2.0, 2.4],
        5 => default_multipliers(4)
            .into_iter()
            .flat_map(|m| [m, m])
            .collect(),
        _ => Vec::new(),
    }
}

/// Quantizer tunables shared by every stream with the same configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct QuantParams {
    pub step_init: f64,
    pub step_min: f64,
    pub step_max: f64,
    pub multipliers_2: Vec<f64>,
    pub multipliers_3: Vec<f64>,
    pub multipliers_4: Vec<f64>,
    pub multipliers_5: Vec<f64>,
}

impl Default for QuantParams {
    fn default() -> Self {
        Self {
            step_init: 2f64.powi(-7),
            step_min: 2f64.powi(-15),
            step_max: 0.5,
            multipliers_2: default_multipliers(2),
            multipliers_3: default_multipliers(3),
            multipliers_4: default_multipliers(4),
            multipliers_5: default_multipliers(5),
        }
    }
}

impl QuantParams {
    pub fn multipliers(&self, nq: u8) -> &[f64] {
        match nq {
            2 => &self.multipliers_2,
            3 => &self.multipliers_3,
            4 => &self.multipliers_4,
            5 => &self.multipliers_5,
            _ => &[],
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidConfig(m));
        if !(self.step_min > 0.0 && self.step_min <= self.step_max && self.step_max.is_finite()) {
            return bad(format!(
                "need 0 < step_min <= step_max, got {} and {}",
                self.step_min, self.step_max
            ));
        }
        if !(self.step_min..=self.step_max).contains(&self.step_init) {
            return bad(format!("step_init {} outside the step bounds", self.step_init));
        }
        for nq in MIN_BITS..=MAX_BITS {
            let m = self.multipliers(nq);
            if m.len() != 1 << (nq - 1) {
                return bad(format!(
                    "{nq}-bit multiplier table has {} entries, expected {}",
                    m.len(),
                    1 << (nq - 1)
                ));
            }
            if m.iter().any(|v| !(*v > 0.0 && v.is_finite())) {
                return bad(format!("{nq}-bit multipliers must be positive"));
            }
            if m.windows(2).any(|w| w[1] < w[0]) {
                return bad(format!("{nq}-bit multipliers must be non-decreasing"));
            }
        }
        Ok(())
    }
}

/// One quantizer output: a sign and a magnitude level.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Code {
    pub negative: bool,
    pub magnitude: u8,
}

impl Code {
    pub const ZERO: Code = Code {
        negative: false,
        magnitude: 0,
    };

    /// Sign bit (1 = negative) followed by the magnitude, MSB first.
    pub fn pack(self, nq: u8) -> u8 {
        ((self.negative as u8) << (nq - 1)) | self.magnitude
    }

    pub fn unpack(bits: u8, nq: u8) -> Self {
        let mask = (1u8 << (nq - 1)) - 1;
        Code {
            negative: (bits >> (nq - 1)) & 1 == 1,
            magnitude: bits & mask,
        }
    }
}

/// Adaptive quantizer state. Small and `Copy`; [`adapt`] returns a new one.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuantState {
    nq: u8,
    step: f64,
    step_min: f64,
    step_max: f64,
    multipliers: [f64; MAX_LEVELS],
}

impl QuantState {
    pub fn new(nq: u8, params: &QuantParams) -> Result<Self> {
        if !(MIN_BITS..=MAX_BITS).contains(&nq) {
            return Err(Error::InvalidConfig(format!(
                "nq = {nq} outside {MIN_BITS}..={MAX_BITS}"
            )));
        }
        params.validate()?;
        let mut multipliers = [0.0; MAX_LEVELS];
        let table = params.multipliers(nq);
        multipliers[..table.len()].copy_from_slice(table);
        Ok(Self {
            nq,
            step: params.step_init,
            step_min: params.step_min,
            step_max: params.step_max,
            multipliers,
        })
    }

    pub fn nq(&self) -> u8 {
        self.nq
    }

    pub fn step(&self) -> f64 {
        self.step
    }

    pub fn step_min(&self) -> f64 {
        self.step_min
    }

    pub fn step_max(&self) -> f64 {
        self.step_max
    }

    pub fn levels(&self) -> usize {
        1 << (self.nq - 1)
    }

    pub fn multipliers(&self) -> &[f64] {
        &self.multipliers[..self.levels()]
    }
}

/// Mid-rise, saturating: `magnitude = min(floor(|e|/Δ), levels - 1)`; zero maps to `+`.
pub fn quantize(e: f64, state: &QuantState) -> Code {
    let top = (state.levels() - 1) as f64;
    let level = (e.abs() / state.step).floor();
    let magnitude = if level.is_nan() { 0.0 } else { level.min(top) };
    Code {
        negative: e < 0.0,
        magnitude: magnitude as u8,
    }
}

/// `±(magnitude + 0.5)·Δ`.
pub fn dequantize(code: Code, state: &QuantState) -> f64 {
    let v = (code.magnitude as f64 + 0.5) * state.step;
    if code.negative {
        -v
    } else {
        v
    }
}

/// Scale the step by the multiplier of the code's magnitude level and clamp.
pub fn adapt(state: &QuantState, code: Code) -> QuantState {
    let step = (state.step * state.multipliers[code.magnitude as usize])
        .clamp(state.step_min, state.step_max);
    QuantState { step, ..*state }
}
