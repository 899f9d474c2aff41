//! Codec tunables that are not carried in the stream header.
//!
//! Encoder and decoder must agree on these; the header stores a 64-bit
//! FNV-1a digest of [`Tunables::canonical_text`] so that a mismatch fails
//! loudly at decode time.

use std::fmt::Write as _;
use std::hash::Hasher;
use std::path::Path;

use fnv::FnvHasher;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lpc::Window;
use crate::mlp::TrainConfig;
use crate::quant::{QuantParams, MAX_BITS, MIN_BITS};

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LpcParams {
    pub window: Window,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Tunables {
    pub quant: QuantParams,
    pub train: TrainConfig,
    pub lpc: LpcParams,
}

fn join(values: &[f64]) -> String {
    values
        .iter()
        .map(|v| format!("{v:?}"))
        .collect::<Vec<_>>()
        .join(",")
}

impl Tunables {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let t: Tunables =
            toml::from_str(text).map_err(|e| Error::InvalidConfig(format!("tunables: {e}")))?;
        t.validate()?;
        Ok(t)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml_str(&text)
    }

    pub fn validate(&self) -> Result<()> {
        self.quant.validate()?;
        self.train.validate()
    }

    /// Stable textual form of every field that influences decoding. The
    /// training seed is excluded because the header carries it separately.
    pub fn canonical_text(&self) -> String {
        let q = &self.quant;
        let t = &self.train;
        let mut s = String::from("ahpc-tunables-v1\n");
        let _ = writeln!(s, "quant.step_init={:?}", q.step_init);
        let _ = writeln!(s, "quant.step_min={:?}", q.step_min);
        let _ = writeln!(s, "quant.step_max={:?}", q.step_max);
        for nq in MIN_BITS..=MAX_BITS {
            let _ = writeln!(s, "quant.multipliers_{nq}={}", join(q.multipliers(nq)));
        }
        let _ = writeln!(s, "train.epochs={}", t.epochs);
        let _ = writeln!(s, "train.n_starts={}", t.n_starts);
        let _ = writeln!(s, "train.lambda_init={:?}", t.lambda_init);
        let _ = writeln!(s, "train.lambda_up={:?}", t.lambda_up);
        let _ = writeln!(s, "train.lambda_down={:?}", t.lambda_down);
        let _ = writeln!(s, "train.lambda_max={:?}", t.lambda_max);
        let _ = writeln!(s, "train.max_retries={}", t.max_retries);
        let _ = writeln!(s, "train.init_scale={:?}", t.init_scale);
        let _ = writeln!(s, "lpc.window={}", self.lpc.window.name());
        s
    }

    pub fn digest(&self) -> u64 {
        let mut h = FnvHasher::default();
        h.write(self.canonical_text().as_bytes());
        h.finish()
    }
}
