//! The 10x2x1 perceptron predictor and its Levenberg-Marquardt trainer.
//!
//! Parameters are stored flat in a fixed order shared by [`jacobian_row`]
//! and the LM update:
//!
//! | index   | parameter                      |
//! |---------|--------------------------------|
//! | 0..10   | hidden unit 0 input weights    |
//! | 10..20  | hidden unit 1 input weights    |
//! | 20, 21  | hidden biases                  |
//! | 22, 23  | output weights                 |
//! | 24      | output bias                    |
//!
//! Inputs are the ten previous samples, oldest first (newest at index 9).
//! The hidden activation is `tanh`; the output unit is linear.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::predictor::{prediction_gain, Predictor};

pub const INPUTS: usize = 10;
pub const HIDDEN: usize = 2;
pub const PARAMS: usize = INPUTS * HIDDEN + HIDDEN + HIDDEN + 1;

const B_HIDDEN: usize = INPUTS * HIDDEN;
const W_OUT: usize = B_HIDDEN + HIDDEN;
const B_OUT: usize = W_OUT + HIDDEN;

pub type Input = [f64; INPUTS];
pub type Params = [f64; PARAMS];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MlpModel {
    params: Params,
}

impl Default for MlpModel {
    fn default() -> Self {
        Self::zero()
    }
}

impl MlpModel {
    pub fn zero() -> Self {
        Self {
            params: [0.0; PARAMS],
        }
    }

    pub fn from_params(params: Params) -> Self {
        Self { params }
    }

    pub fn params(&self) -> &Params {
        &self.params
    }

    pub fn w_hidden(&self, unit: usize) -> &[f64] {
        &self.params[unit * INPUTS..(unit + 1) * INPUTS]
    }

    pub fn b_hidden(&self) -> &[f64] {
        &self.params[B_HIDDEN..W_OUT]
    }

    pub fn w_out(&self) -> &[f64] {
        &self.params[W_OUT..B_OUT]
    }

    pub fn b_out(&self) -> f64 {
        self.params[B_OUT]
    }

    pub fn is_finite(&self) -> bool {
        self.params.iter().all(|p| p.is_finite())
    }

    fn hidden(&self, input: &[f64]) -> [f64; HIDDEN] {
        let mut h = [0.0; HIDDEN];
        for (j, hj) in h.iter_mut().enumerate() {
            let w = self.w_hidden(j);
            let mut z = self.params[B_HIDDEN + j];
            for i in 0..INPUTS {
                z += w[i] * input[i];
            }
            *hj = z.tanh();
        }
        h
    }
}

impl Predictor for MlpModel {
    fn order(&self) -> usize {
        INPUTS
    }

    fn predict(&self, history: &[f64]) -> f64 {
        forward(self, history)
    }
}

/// Network output for one input vector.
pub fn forward(model: &MlpModel, input: &[f64]) -> f64 {
    debug_assert_eq!(input.len(), INPUTS);
    let h = model.hidden(input);
    let mut out = model.params[B_OUT];
    for (j, hj) in h.iter().enumerate() {
        out += model.params[W_OUT + j] * hj;
    }
    out
}

/// Analytic gradient of [`forward`] with respect to all 25 parameters.
pub fn jacobian_row(model: &MlpModel, input: &[f64]) -> Params {
    let h = model.hidden(input);
    let mut row = [0.0; PARAMS];
    for j in 0..HIDDEN {
        let d = model.params[W_OUT + j] * (1.0 - h[j] * h[j]);
        for i in 0..INPUTS {
            row[j * INPUTS + i] = d * input[i];
        }
        row[B_HIDDEN + j] = d;
        row[W_OUT + j] = h[j];
    }
    row[B_OUT] = 1.0;
    row
}

/// Levenberg-Marquardt and multistart settings.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainConfig {
    pub epochs: usize,
    pub n_starts: usize,
    pub lambda_init: f64,
    pub lambda_up: f64,
    pub lambda_down: f64,
    pub lambda_max: f64,
    /// Rejected steps tolerated per epoch before moving on.
    pub max_retries: usize,
    pub init_scale: f64,
    pub seed: u64,
    /// Train the multistart candidates on the rayon pool. Does not affect results.
    #[serde(skip)]
    pub parallel: bool,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            epochs: 6,
            n_starts: 5,
            lambda_init: 1e-2,
            lambda_up: 10.0,
            lambda_down: 0.1,
            lambda_max: 1e10,
            max_retries: 10,
            init_scale: 0.2,
            seed: 0,
            parallel: true,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidConfig(m.to_string()));
        if self.epochs == 0 {
            return bad("epochs must be at least 1");
        }
        if self.n_starts == 0 {
            return bad("n_starts must be at least 1");
        }
        if !(self.lambda_init > 0.0 && self.lambda_max > 0.0) {
            return bad("lambda_init and lambda_max must be positive");
        }
        if !(self.lambda_down > 0.0 && self.lambda_down < 1.0 && self.lambda_up > 1.0) {
            return bad("need 0 < lambda_down < 1 < lambda_up");
        }
        if !(self.init_scale > 0.0 && self.init_scale.is_finite()) {
            return bad("init_scale must be positive");
        }
        Ok(())
    }
}

/// Input/target pairs built from one frame and the samples preceding it.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainSet {
    inputs: Vec<Input>,
    targets: Vec<f64>,
}

impl TrainSet {
    /// `prefix` holds at least ten samples preceding `frame`, oldest first.
    pub fn from_frame(prefix: &[f64], frame: &[f64]) -> Self {
        assert!(prefix.len() >= INPUTS, "prefix shorter than the input order");
        let mut buf = Vec::with_capacity(INPUTS + frame.len());
        buf.extend_from_slice(&prefix[prefix.len() - INPUTS..]);
        buf.extend_from_slice(frame);
        let inputs = buf
            .windows(INPUTS)
            .take(frame.len())
            .map(|w| {
                let mut a = [0.0; INPUTS];
                a.copy_from_slice(w);
                a
            })
            .collect();
        Self {
            inputs,
            targets: frame.to_vec(),
        }
    }

    pub fn new(inputs: Vec<Input>, targets: Vec<f64>) -> Self {
        assert_eq!(inputs.len(), targets.len());
        Self { inputs, targets }
    }

    pub fn len(&self) -> usize {
        self.targets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.targets.is_empty()
    }

    pub fn inputs(&self) -> &[Input] {
        &self.inputs
    }

    pub fn targets(&self) -> &[f64] {
        &self.targets
    }

    fn sse(&self, model: &MlpModel) -> f64 {
        let mut s = 0.0;
        for (x, &t) in self.inputs.iter().zip(&self.targets) {
            let e = t - forward(model, x);
            s += e * e;
        }
        s
    }

    pub fn mse(&self, model: &MlpModel) -> f64 {
        self.sse(model) / self.len() as f64
    }
}

/// Result of one LM run, with the MSE after every accepted step.
#[derive(Debug, Clone)]
pub struct LmReport {
    pub model: MlpModel,
    pub initial_mse: f64,
    pub final_mse: f64,
    pub accepted_mse: Vec<f64>,
}

/// Train for exactly `cfg.epochs` LM epochs. Returns the model and its MSE on `data`.
pub fn lm_train(model: &MlpModel, data: &TrainSet, cfg: &TrainConfig) -> Result<(MlpModel, f64)> {
    lm_train_report(model, data, cfg).map(|r| (r.model, r.final_mse))
}

pub fn lm_train_report(model: &MlpModel, data: &TrainSet, cfg: &TrainConfig) -> Result<LmReport> {
    lm_train_with(model, data, cfg, jacobian_row)
}

pub(crate) fn lm_train_with(
    model: &MlpModel,
    data: &TrainSet,
    cfg: &TrainConfig,
    row_fn: impl Fn(&MlpModel, &[f64]) -> Params,
) -> Result<LmReport> {
    if data.is_empty() {
        return Err(Error::InvalidConfig("empty training set".into()));
    }
    let n = data.len() as f64;
    let mut current = *model;
    let mut sse = data.sse(&current);
    if !sse.is_finite() {
        return Err(Error::NonFiniteLoss);
    }
    let initial_mse = sse / n;
    let mut lambda = cfg.lambda_init;
    let mut accepted_mse = Vec::new();

    for _ in 0..cfg.epochs {
        // Normal matrix JᵀJ (upper triangle, rows accumulated in sample order) and Jᵀe.
        let mut jtj = [[0.0; PARAMS]; PARAMS];
        let mut jte = [0.0; PARAMS];
        for (x, &t) in data.inputs.iter().zip(&data.targets) {
            let row = row_fn(&current, x);
            let e = t - forward(&current, x);
            for a in 0..PARAMS {
                let ra = row[a];
                jte[a] += ra * e;
                for b in a..PARAMS {
                    jtj[a][b] += ra * row[b];
                }
            }
        }
        for a in 0..PARAMS {
            for b in 0..a {
                jtj[a][b] = jtj[b][a];
            }
        }

        for _attempt in 0..=cfg.max_retries {
            let mut damped = jtj;
            for (a, row) in damped.iter_mut().enumerate() {
                row[a] += lambda;
            }
            let accepted = solve_spd(&damped, &jte).and_then(|delta| {
                let mut next = current.params;
                for (p, d) in next.iter_mut().zip(&delta) {
                    *p += d;
                }
                let candidate = MlpModel::from_params(next);
                let candidate_sse = data.sse(&candidate);
                (candidate_sse.is_finite() && candidate_sse < sse)
                    .then_some((candidate, candidate_sse))
            });
            match accepted {
                Some((candidate, candidate_sse)) => {
                    current = candidate;
                    sse = candidate_sse;
                    accepted_mse.push(sse / n);
                    lambda *= cfg.lambda_down;
                    break;
                }
                None => lambda = (lambda * cfg.lambda_up).min(cfg.lambda_max),
            }
        }
    }

    Ok(LmReport {
        model: current,
        initial_mse,
        final_mse: sse / n,
        accepted_mse,
    })
}

/// Cholesky solve of a symmetric positive-definite system. `None` if a pivot
/// is not positive.
fn solve_spd(a: &[[f64; PARAMS]; PARAMS], b: &Params) -> Option<Params> {
    let mut l = [[0.0; PARAMS]; PARAMS];
    for i in 0..PARAMS {
        for j in 0..=i {
            let mut s = a[i][j];
            for k in 0..j {
                s -= l[i][k] * l[j][k];
            }
            if i == j {
                if !(s > 0.0) {
                    return None;
                }
                l[i][i] = s.sqrt();
            } else {
                l[i][j] = s / l[j][j];
            }
        }
    }
    let mut y = [0.0; PARAMS];
    for i in 0..PARAMS {
        let mut s = b[i];
        for k in 0..i {
            s -= l[i][k] * y[k];
        }
        y[i] = s / l[i][i];
    }
    let mut x = [0.0; PARAMS];
    for i in (0..PARAMS).rev() {
        let mut s = y[i];
        for k in i + 1..PARAMS {
            s -= l[k][i] * x[k];
        }
        x[i] = s / l[i][i];
    }
    x.iter().all(|v| v.is_finite()).then_some(x)
}

/// Deterministic generator for one multistart initialization, keyed by
/// `(seed, frame_index, start)` so any party can regenerate it independently.
pub fn start_rng(seed: u64, frame_index: u64, start: u64) -> ChaCha8Rng {
    let mut key = [0u8; 32];
    key[0..8].copy_from_slice(&seed.to_le_bytes());
    key[8..16].copy_from_slice(&frame_index.to_le_bytes());
    key[16..24].copy_from_slice(&start.to_le_bytes());
    key[24..32].copy_from_slice(b"mlpinit\0");
    ChaCha8Rng::from_seed(key)
}

/// Parameters i.i.d. uniform in `[-scale, scale]`.
pub fn random_model(rng: &mut impl Rng, scale: f64) -> MlpModel {
    let mut params = [0.0; PARAMS];
    for p in params.iter_mut() {
        *p = rng.random_range(-scale..=scale);
    }
    MlpModel::from_params(params)
}

/// One trained multistart candidate.
#[derive(Debug, Clone, Copy)]
pub struct Candidate {
    pub start: usize,
    pub model: MlpModel,
    pub gain_db: f64,
}

/// Train every start; `None` marks starts whose loss went non-finite.
pub fn multistart_candidates(
    prefix: &[f64],
    frame: &[f64],
    cfg: &TrainConfig,
    frame_index: u64,
) -> Vec<Option<Candidate>> {
    let data = TrainSet::from_frame(prefix, frame);
    let run = |start: usize| {
        let mut rng = start_rng(cfg.seed, frame_index, start as u64);
        let init = random_model(&mut rng, cfg.init_scale);
        let (model, _) = lm_train(&init, &data, cfg).ok()?;
        if !model.is_finite() {
            return None;
        }
        let gain_db = prediction_gain(&model, prefix, frame);
        Some(Candidate {
            start,
            model,
            gain_db,
        })
    };
    if cfg.parallel && cfg.n_starts > 1 {
        (0..cfg.n_starts).into_par_iter().map(run).collect()
    } else {
        (0..cfg.n_starts).map(run).collect()
    }
}

/// Train `cfg.n_starts` seeded initializations and keep the one with the
/// highest open-loop prediction gain on the training frame (earliest start
/// wins ties).
pub fn multistart_train(
    prefix: &[f64],
    frame: &[f64],
    cfg: &TrainConfig,
    frame_index: u64,
) -> Result<MlpModel> {
    if frame.is_empty() {
        return Err(Error::InvalidConfig("empty training frame".into()));
    }
    let mut best: Option<Candidate> = None;
    for c in multistart_candidates(prefix, frame, cfg, frame_index)
        .into_iter()
        .flatten()
    {
        if best.is_none_or(|b| c.gain_db > b.gain_db) {
            best = Some(c);
        }
    }
    best.map(|c| c.model).ok_or(Error::NonFiniteLoss)
}
