//! Closed-loop ADPCM encoder and decoder with a per-frame LPC/MLP switch.
//!
//! Each frame is coded as: predict from the reconstructed history, quantize
//! the residual, add the dequantized residual back, adapt the step. In
//! backward mode both predictors are re-derived from the previous decoded
//! frame, so the decoder tracks the encoder with no side information beyond
//! one selection bit per frame in hybrid mode. Forward mode fits the
//! predictors on the raw frame and ships their parameters as unquantized
//! 64-bit floats; it is a reference mode, not a compression mode.
//!
//! Stream layout (header integers little-endian):
//!
//! ```text
//! "AHPC" | version u16 | mode u8 | predictor u8 | nq u8 | lpc_order u8 |
//! frame_len u16 | seed u64 | sample_count u64 | source_bit_depth u8 |
//! tunables digest u64 | payload
//! ```
//!
//! Payload, per frame, MSB-first and contiguous across frames:
//! `[selection bit (hybrid)] [parameters (forward)] [codes, nq bits each]`,
//! zero-padded to a byte boundary only at the end of the stream. Forward
//! parameters are the LPC coefficients then the 25 MLP parameters, each as
//! the 64 bits of an IEEE double.

use std::fmt;
use std::hash::Hasher;
use std::str::FromStr;

use fnv::FnvHasher;
use serde::Serialize;

use crate::bits::{BitReader, BitWriter};
use crate::config::Tunables;
use crate::error::{Error, Result};
use crate::lpc::{self, LpcModel};
use crate::mlp::{self, MlpModel, TrainConfig, PARAMS};
use crate::predictor::Predictor;
use crate::quant::{adapt, dequantize, quantize, Code, QuantState, MAX_BITS, MIN_BITS};
use crate::signal::{frame_count, SignalBuffer, DEFAULT_SAMPLE_RATE};

pub const MAGIC: [u8; 4] = *b"AHPC";
pub const VERSION: u16 = 1;
pub const HEADER_LEN: usize = 37;

/// Upper clamp for reconstructed samples, keeping them inside `[-1, 1)`.
pub const RECON_MAX: f64 = 1.0 - 1.0 / 65536.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Backward,
    Forward,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum PredictorKind {
    Lpc,
    Mlp,
    Hybrid,
}

impl Mode {
    fn to_u8(self) -> u8 {
        self as u8
    }

    fn from_u8(v: u8) -> Result<Self> {
        match v {
            0 => Ok(Mode::Backward),
            1 => Ok(Mode::Forward),
            _ => Err(Error::BadHeader(format!("unknown mode {v}"))),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Mode::Backward => "backward",
            Mode::Forward => "forward",
        }
    }
}

impl PredictorKind {
    fn to_u8(self) -> u8 {
        self as u8
    }

    fn from_u8(v: u8) -> Result<Self> {
        match v {
            0 => Ok(PredictorKind::Lpc),
            1 => Ok(PredictorKind::Mlp),
            2 => Ok(PredictorKind::Hybrid),
            _ => Err(Error::BadHeader(format!("unknown predictor {v}"))),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            PredictorKind::Lpc => "lpc",
            PredictorKind::Mlp => "mlp",
            PredictorKind::Hybrid => "hybrid",
        }
    }

    fn uses_lpc(self) -> bool {
        self != PredictorKind::Mlp
    }

    fn uses_mlp(self) -> bool {
        self != PredictorKind::Lpc
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl fmt::Display for PredictorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Mode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "backward" | "b" => Ok(Mode::Backward),
            "forward" | "f" => Ok(Mode::Forward),
            _ => Err(Error::InvalidConfig(format!("unknown mode {s:?}"))),
        }
    }
}

impl FromStr for PredictorKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "lpc" | "lpc_only" => Ok(PredictorKind::Lpc),
            "mlp" | "mlp_only" => Ok(PredictorKind::Mlp),
            "hybrid" => Ok(PredictorKind::Hybrid),
            _ => Err(Error::InvalidConfig(format!("unknown predictor {s:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CodecConfig {
    pub mode: Mode,
    pub predictor: PredictorKind,
    pub lpc_order: usize,
    pub frame_len: usize,
    pub nq: u8,
    pub seed: u64,
    pub tunables: Tunables,
    /// Run hybrid trials and multistart candidates on the rayon pool.
    pub parallel: bool,
}

impl Default for CodecConfig {
    fn default() -> Self {
        Self {
            mode: Mode::Backward,
            predictor: PredictorKind::Hybrid,
            lpc_order: 10,
            frame_len: 100,
            nq: 4,
            seed: 0,
            tunables: Tunables::default(),
            parallel: true,
        }
    }
}

impl CodecConfig {
    pub fn new(mode: Mode, predictor: PredictorKind, nq: u8) -> Self {
        Self {
            mode,
            predictor,
            nq,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidConfig(m));
        if !(MIN_BITS..=MAX_BITS).contains(&self.nq) {
            return bad(format!("nq = {} outside {MIN_BITS}..={MAX_BITS}", self.nq));
        }
        if !(1..=u8::MAX as usize).contains(&self.lpc_order) {
            return bad(format!("lpc_order = {} outside 1..=255", self.lpc_order));
        }
        if self.predictor == PredictorKind::Hybrid && self.lpc_order != 10 {
            return bad("the hybrid predictor pairs LPC-10 with the MLP; lpc_order must be 10".into());
        }
        if self.frame_len < mlp::INPUTS || self.frame_len > u16::MAX as usize {
            return bad(format!(
                "frame_len = {} outside {}..=65535",
                self.frame_len,
                mlp::INPUTS
            ));
        }
        self.tunables.validate()
    }

    fn train_config(&self) -> TrainConfig {
        TrainConfig {
            seed: self.seed,
            parallel: self.parallel,
            ..self.tunables.train
        }
    }

    fn history_len(&self) -> usize {
        self.lpc_order.max(mlp::INPUTS)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Header {
    pub version: u16,
    pub mode: Mode,
    pub predictor: PredictorKind,
    pub nq: u8,
    pub lpc_order: u8,
    pub frame_len: u16,
    pub seed: u64,
    pub sample_count: u64,
    pub source_bit_depth: u8,
    pub digest: u64,
}

impl Header {
    pub fn to_bytes(&self) -> [u8; HEADER_LEN] {
        let mut b = [0u8; HEADER_LEN];
        b[0..4].copy_from_slice(&MAGIC);
        b[4..6].copy_from_slice(&self.version.to_le_bytes());
        b[6] = self.mode.to_u8();
        b[7] = self.predictor.to_u8();
        b[8] = self.nq;
        b[9] = self.lpc_order;
        b[10..12].copy_from_slice(&self.frame_len.to_le_bytes());
        b[12..20].copy_from_slice(&self.seed.to_le_bytes());
        b[20..28].copy_from_slice(&self.sample_count.to_le_bytes());
        b[28] = self.source_bit_depth;
        b[29..37].copy_from_slice(&self.digest.to_le_bytes());
        b
    }

    pub fn from_bytes(b: &[u8]) -> Result<Self> {
        if b.len() < 4 || b[0..4] != MAGIC {
            return Err(Error::BadMagic);
        }
        if b.len() < HEADER_LEN {
            return Err(Error::Truncated);
        }
        let version = u16::from_le_bytes([b[4], b[5]]);
        if version != VERSION {
            return Err(Error::BadVersion(version));
        }
        let u64_at = |i: usize| u64::from_le_bytes(b[i..i + 8].try_into().unwrap());
        let h = Header {
            version,
            mode: Mode::from_u8(b[6])?,
            predictor: PredictorKind::from_u8(b[7])?,
            nq: b[8],
            lpc_order: b[9],
            frame_len: u16::from_le_bytes([b[10], b[11]]),
            seed: u64_at(12),
            sample_count: u64_at(20),
            source_bit_depth: b[28],
            digest: u64_at(29),
        };
        if !(MIN_BITS..=MAX_BITS).contains(&h.nq) {
            return Err(Error::BadHeader(format!("nq = {}", h.nq)));
        }
        if h.lpc_order == 0 || (h.frame_len as usize) < mlp::INPUTS {
            return Err(Error::BadHeader("lpc_order or frame_len out of range".into()));
        }
        if !(8..=32).contains(&h.source_bit_depth) {
            return Err(Error::BadHeader(format!("bit depth {}", h.source_bit_depth)));
        }
        Ok(h)
    }

    /// Codec configuration described by this header, with the given tunables.
    pub fn config(&self, tunables: Tunables) -> CodecConfig {
        CodecConfig {
            mode: self.mode,
            predictor: self.predictor,
            lpc_order: self.lpc_order as usize,
            frame_len: self.frame_len as usize,
            nq: self.nq,
            seed: self.seed,
            tunables,
            parallel: true,
        }
    }

    /// Payload bits of one frame with `len` samples.
    pub fn frame_bits(&self, len: usize) -> u64 {
        frame_bits(self.mode, self.predictor, self.lpc_order as usize, self.nq, len)
    }

    /// Exact payload bit count implied by the header.
    pub fn payload_bits(&self) -> u64 {
        let n = self.sample_count as usize;
        let l = self.frame_len as usize;
        let full = n / l;
        let tail = n % l;
        let mut bits = full as u64 * self.frame_bits(l);
        if tail > 0 {
            bits += self.frame_bits(tail);
        }
        bits
    }
}

fn frame_bits(mode: Mode, predictor: PredictorKind, lpc_order: usize, nq: u8, len: usize) -> u64 {
    let selection = (predictor == PredictorKind::Hybrid) as u64;
    let params = match mode {
        Mode::Backward => 0,
        Mode::Forward => {
            64 * (predictor.uses_lpc() as u64 * lpc_order as u64
                + predictor.uses_mlp() as u64 * PARAMS as u64)
        }
    };
    selection + params + len as u64 * nq as u64
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EncodedStream {
    pub header: Header,
    pub payload: Vec<u8>,
}

impl EncodedStream {
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(HEADER_LEN + self.payload.len());
        out.extend_from_slice(&self.header.to_bytes());
        out.extend_from_slice(&self.payload);
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let header = Header::from_bytes(bytes)?;
        let payload = bytes[HEADER_LEN..].to_vec();
        let expected = header.payload_bits().div_ceil(8) as usize;
        if payload.len() < expected {
            return Err(Error::Truncated);
        }
        if payload.len() > expected {
            return Err(Error::BadHeader(format!(
                "{} trailing payload bytes",
                payload.len() - expected
            )));
        }
        Ok(Self { header, payload })
    }

    pub fn len_bytes(&self) -> usize {
        HEADER_LEN + self.payload.len()
    }

    /// Payload bits per input sample.
    pub fn bits_per_sample(&self) -> f64 {
        self.header.payload_bits() as f64 / self.header.sample_count.max(1) as f64
    }
}

/// Which predictor coded a frame.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Selection {
    Lpc,
    Mlp,
}

/// Per-frame diagnostics. Encoder and decoder produce the same
/// `entry_digest` sequence when they track each other.
#[derive(Debug, Clone, PartialEq)]
pub struct FrameTrace {
    pub index: usize,
    pub len: usize,
    pub selection: Selection,
    /// Digest of the loop state (history, step, LPC model) before the frame.
    pub entry_digest: u64,
    /// In-loop squared reconstruction error of the LPC and MLP trials (encoder only).
    pub lpc_trial_error: Option<f64>,
    pub mlp_trial_error: Option<f64>,
    pub committed_error: Option<f64>,
    /// MLP was wanted but unavailable (bootstrap frame or training failure).
    pub mlp_unavailable: bool,
    /// A non-finite prediction forced the zero predictor for part of the frame.
    pub nonfinite_prediction: bool,
}

#[derive(Debug, Clone)]
pub struct EncodeOutput {
    pub stream: EncodedStream,
    /// The encoder's own closed-loop reconstruction.
    pub reconstruction: Vec<f64>,
    pub frames: Vec<FrameTrace>,
}

impl EncodeOutput {
    /// Fraction of frames coded with the MLP.
    pub fn mlp_usage(&self) -> f64 {
        mlp_usage(&self.frames)
    }
}

#[derive(Debug, Clone)]
pub struct DecodeOutput {
    pub signal: SignalBuffer,
    pub frames: Vec<FrameTrace>,
}

pub fn mlp_usage(frames: &[FrameTrace]) -> f64 {
    if frames.is_empty() {
        return 0.0;
    }
    frames.iter().filter(|f| f.selection == Selection::Mlp).count() as f64 / frames.len() as f64
}

/// Reconstructed history and quantizer state threaded through the frames.
#[derive(Debug, Clone, PartialEq)]
pub struct LoopState {
    history: Vec<f64>,
    quant: QuantState,
}

impl LoopState {
    pub fn new(history_len: usize, quant: QuantState) -> Self {
        Self {
            history: vec![0.0; history_len],
            quant,
        }
    }

    /// Most recent reconstructed samples, newest last.
    pub fn history(&self) -> &[f64] {
        &self.history
    }

    pub fn quant(&self) -> &QuantState {
        &self.quant
    }

    fn digest(&self, lpc: &LpcModel) -> u64 {
        let mut h = FnvHasher::default();
        for v in &self.history {
            h.write_u64(v.to_bits());
        }
        h.write_u64(self.quant.step().to_bits());
        for a in lpc.coeffs() {
            h.write_u64(a.to_bits());
        }
        h.finish()
    }
}

/// Samples to code, or codes to replay.
#[derive(Clone, Copy)]
enum Source<'a> {
    Samples(&'a [f64]),
    Codes(&'a [Code]),
}

impl Source<'_> {
    fn len(&self) -> usize {
        match self {
            Source::Samples(s) => s.len(),
            Source::Codes(c) => c.len(),
        }
    }
}

/// Result of running the closed loop over one frame.
#[derive(Debug, Clone)]
pub struct FrameRun {
    pub codes: Vec<Code>,
    pub reconstructed: Vec<f64>,
    pub state: LoopState,
    pub nonfinite_prediction: bool,
}

impl FrameRun {
    /// `Σ (x - x_rec)²` against the original frame.
    pub fn squared_error(&self, frame: &[f64]) -> f64 {
        frame
            .iter()
            .zip(&self.reconstructed)
            .map(|(x, y)| (x - y) * (x - y))
            .sum()
    }
}

/// The single closed loop shared by the encoder and the decoder.
fn closed_loop(source: Source<'_>, predictor: &dyn Predictor, entry: &LoopState) -> FrameRun {
    let n = source.len();
    let h = entry.history.len();
    let p = predictor.order();
    debug_assert!(p <= h);
    let mut buf = Vec::with_capacity(h + n);
    buf.extend_from_slice(&entry.history);
    let mut quant = entry.quant;
    let mut codes = Vec::with_capacity(n);
    let mut zero_fallback = false;
    for t in 0..n {
        let mut pred = if zero_fallback {
            0.0
        } else {
            predictor.predict(&buf[h + t - p..h + t])
        };
        if !pred.is_finite() {
            zero_fallback = true;
            pred = 0.0;
        }
        let code = match source {
            Source::Samples(x) => quantize(x[t] - pred, &quant),
            Source::Codes(c) => c[t],
        };
        let rec = (pred + dequantize(code, &quant)).clamp(-1.0, RECON_MAX);
        quant = adapt(&quant, code);
        buf.push(rec);
        codes.push(code);
    }
    let reconstructed = buf[h..].to_vec();
    let history = buf[buf.len() - h..].to_vec();
    FrameRun {
        codes,
        reconstructed,
        state: LoopState { history, quant },
        nonfinite_prediction: zero_fallback,
    }
}

/// Code one frame with a fixed predictor.
pub fn encode_frame(frame: &[f64], predictor: &dyn Predictor, entry: &LoopState) -> FrameRun {
    closed_loop(Source::Samples(frame), predictor, entry)
}

/// Reconstruct one frame from its codes.
pub fn decode_frame(codes: &[Code], predictor: &dyn Predictor, entry: &LoopState) -> FrameRun {
    closed_loop(Source::Codes(codes), predictor, entry)
}

/// Outcome of the hybrid switch for one frame.
#[derive(Debug, Clone)]
pub struct Choice {
    pub selection: Selection,
    pub run: FrameRun,
    pub lpc_error: f64,
    pub mlp_error: f64,
}

/// Trial-encode the frame with both predictors from the same entry state and
/// keep the one with the smaller in-loop squared error (LPC on ties).
pub fn choose_predictor(
    frame: &[f64],
    lpc: &LpcModel,
    mlp: &MlpModel,
    entry: &LoopState,
    parallel: bool,
) -> Choice {
    let (lpc_run, mlp_run) = if parallel {
        rayon::join(
            || encode_frame(frame, lpc, entry),
            || encode_frame(frame, mlp, entry),
        )
    } else {
        (encode_frame(frame, lpc, entry), encode_frame(frame, mlp, entry))
    };
    let lpc_error = lpc_run.squared_error(frame);
    let mlp_error = mlp_run.squared_error(frame);
    let (selection, run) = if mlp_error < lpc_error {
        (Selection::Mlp, mlp_run)
    } else {
        (Selection::Lpc, lpc_run)
    };
    Choice {
        selection,
        run,
        lpc_error,
        mlp_error,
    }
}

/// The `count` samples before `start` in `x`, zero-filled before the signal.
fn prefix(x: &[f64], start: usize, count: usize) -> Vec<f64> {
    let mut out = vec![0.0; count];
    let avail = start.min(count);
    out[count - avail..].copy_from_slice(&x[start - avail..start]);
    out
}

/// Predictor models in force for one frame.
struct FrameModels {
    lpc: LpcModel,
    mlp: Option<MlpModel>,
}

/// Derives per-frame models, identically on both sides in backward mode.
struct Adapter<'a> {
    cfg: &'a CodecConfig,
    train: TrainConfig,
    last_lpc: LpcModel,
}

impl<'a> Adapter<'a> {
    fn new(cfg: &'a CodecConfig) -> Self {
        Self {
            cfg,
            train: cfg.train_config(),
            last_lpc: LpcModel::zero(cfg.lpc_order),
        }
    }

    /// LPC fit on `frame`, falling back to the previous model when the
    /// recursion degenerates.
    fn fit_lpc(&mut self, frame: &[f64]) -> LpcModel {
        if let Ok(m) = lpc::analyze(frame, self.cfg.lpc_order, self.cfg.tunables.lpc.window) {
            self.last_lpc = m;
        }
        self.last_lpc.clone()
    }

    fn fit_mlp(&self, prefix: &[f64], frame: &[f64], frame_index: usize) -> Option<MlpModel> {
        mlp::multistart_train(prefix, frame, &self.train, frame_index as u64).ok()
    }

    /// Backward adaptation from the decoded signal so far; `want_mlp` lets
    /// the decoder skip training for frames that will not use it.
    fn backward(&mut self, decoded: &[f64], index: usize, want_mlp: bool) -> FrameModels {
        if index == 0 {
            return FrameModels {
                lpc: LpcModel::zero(self.cfg.lpc_order),
                mlp: None,
            };
        }
        let l = self.cfg.frame_len;
        let prev_start = (index - 1) * l;
        let prev = &decoded[prev_start..prev_start + l];
        let lpc = self.fit_lpc(prev);
        let mlp = if want_mlp {
            let pre = prefix(decoded, prev_start, mlp::INPUTS);
            self.fit_mlp(&pre, prev, index)
        } else {
            None
        };
        FrameModels { lpc, mlp }
    }
}

/// Closed-loop encoder.
pub fn encode(signal: &SignalBuffer, cfg: &CodecConfig) -> Result<EncodeOutput> {
    cfg.validate()?;
    if signal.is_empty() {
        return Err(Error::InvalidSignal("cannot encode an empty signal".into()));
    }
    let x = signal.samples();
    let header = Header {
        version: VERSION,
        mode: cfg.mode,
        predictor: cfg.predictor,
        nq: cfg.nq,
        lpc_order: cfg.lpc_order as u8,
        frame_len: cfg.frame_len as u16,
        seed: cfg.seed,
        sample_count: x.len() as u64,
        source_bit_depth: signal.source_bit_depth(),
        digest: cfg.tunables.digest(),
    };
    let mut adapter = Adapter::new(cfg);
    let mut state = LoopState::new(
        cfg.history_len(),
        QuantState::new(cfg.nq, &cfg.tunables.quant)?,
    );
    let mut writer = BitWriter::new();
    let mut recon: Vec<f64> = Vec::with_capacity(x.len());
    let mut traces = Vec::with_capacity(frame_count(x.len(), cfg.frame_len));

    for (index, frame) in x.chunks(cfg.frame_len).enumerate() {
        let start = index * cfg.frame_len;
        let models = match cfg.mode {
            Mode::Backward => adapter.backward(&recon, index, cfg.predictor.uses_mlp()),
            Mode::Forward => {
                let lpc = if cfg.predictor.uses_lpc() {
                    adapter.fit_lpc(frame)
                } else {
                    LpcModel::zero(cfg.lpc_order)
                };
                let mlp = if cfg.predictor.uses_mlp() {
                    let pre = prefix(x, start, mlp::INPUTS);
                    Some(adapter.fit_mlp(&pre, frame, index).unwrap_or_default())
                } else {
                    None
                };
                FrameModels { lpc, mlp }
            }
        };
        let entry_digest = state.digest(&models.lpc);
        let mlp_unavailable = cfg.predictor.uses_mlp() && models.mlp.is_none();

        let (selection, run, lpc_err, mlp_err) = match (cfg.predictor, &models.mlp) {
            (PredictorKind::Hybrid, Some(m)) => {
                let c = choose_predictor(frame, &models.lpc, m, &state, cfg.parallel);
                (c.selection, c.run, Some(c.lpc_error), Some(c.mlp_error))
            }
            (PredictorKind::Mlp, Some(m)) => {
                let run = encode_frame(frame, m, &state);
                let e = run.squared_error(frame);
                (Selection::Mlp, run, None, Some(e))
            }
            _ => {
                let run = encode_frame(frame, &models.lpc, &state);
                let e = run.squared_error(frame);
                (Selection::Lpc, run, Some(e), None)
            }
        };

        if cfg.predictor == PredictorKind::Hybrid {
            writer.write((selection == Selection::Mlp) as u64, 1);
        }
        if cfg.mode == Mode::Forward {
            if cfg.predictor.uses_lpc() {
                for &a in models.lpc.coeffs() {
                    writer.write_f64(a);
                }
            }
            if cfg.predictor.uses_mlp() {
                for &p in models.mlp.unwrap_or_default().params() {
                    writer.write_f64(p);
                }
            }
        }
        for c in &run.codes {
            writer.write(c.pack(cfg.nq) as u64, cfg.nq as u32);
        }

        let committed = run.squared_error(frame);
        traces.push(FrameTrace {
            index,
            len: frame.len(),
            selection,
            entry_digest,
            lpc_trial_error: lpc_err,
            mlp_trial_error: mlp_err,
            committed_error: Some(committed),
            mlp_unavailable,
            nonfinite_prediction: run.nonfinite_prediction,
        });
        recon.extend_from_slice(&run.reconstructed);
        state = run.state;
    }

    debug_assert_eq!(writer.bit_len(), header.payload_bits());
    Ok(EncodeOutput {
        stream: EncodedStream {
            header,
            payload: writer.into_bytes(),
        },
        reconstruction: recon,
        frames: traces,
    })
}

/// Decode with the default tunables.
pub fn decode(stream: &EncodedStream) -> Result<DecodeOutput> {
    decode_with(stream, &Tunables::default())
}

/// Decode with explicit tunables; their digest must match the stream's.
pub fn decode_with(stream: &EncodedStream, tunables: &Tunables) -> Result<DecodeOutput> {
    let header = stream.header;
    let digest = tunables.digest();
    if header.digest != digest {
        return Err(Error::DigestMismatch {
            stream: header.digest,
            decoder: digest,
        });
    }
    let cfg = header.config(tunables.clone());
    cfg.validate().map_err(|e| Error::BadHeader(e.to_string()))?;
    let n = header.sample_count as usize;
    if (stream.payload.len() as u64) < header.payload_bits().div_ceil(8) {
        return Err(Error::Truncated);
    }
    let mut reader = BitReader::new(&stream.payload);
    let mut adapter = Adapter::new(&cfg);
    let mut state = LoopState::new(
        cfg.history_len(),
        QuantState::new(cfg.nq, &cfg.tunables.quant)?,
    );
    let mut recon: Vec<f64> = Vec::with_capacity(n);
    let mut traces = Vec::new();
    let mut index = 0;

    while recon.len() < n {
        let len = cfg.frame_len.min(n - recon.len());
        let flag = if cfg.predictor == PredictorKind::Hybrid {
            reader.read(1)? == 1
        } else {
            cfg.predictor == PredictorKind::Mlp
        };

        let models = match cfg.mode {
            Mode::Backward => adapter.backward(&recon, index, flag),
            Mode::Forward => {
                let lpc = if cfg.predictor.uses_lpc() {
                    let coeffs = (0..cfg.lpc_order)
                        .map(|_| reader.read_f64())
                        .collect::<Result<Vec<_>>>()?;
                    LpcModel::from_coeffs(coeffs)
                } else {
                    LpcModel::zero(cfg.lpc_order)
                };
                let mlp = if cfg.predictor.uses_mlp() {
                    let mut params = [0.0; PARAMS];
                    for p in params.iter_mut() {
                        *p = reader.read_f64()?;
                    }
                    Some(MlpModel::from_params(params))
                } else {
                    None
                };
                FrameModels { lpc, mlp }
            }
        };
        let entry_digest = state.digest(&models.lpc);

        let mut codes = Vec::with_capacity(len);
        for _ in 0..len {
            codes.push(Code::unpack(reader.read(cfg.nq as u32)? as u8, cfg.nq));
        }

        let (selection, run) = match (flag, &models.mlp) {
            (true, Some(m)) => (Selection::Mlp, decode_frame(&codes, m, &state)),
            (true, None) if cfg.predictor == PredictorKind::Hybrid => {
                // The encoder never selects an unavailable MLP.
                return Err(Error::BadHeader(format!(
                    "frame {index} selects the MLP but none is available"
                )));
            }
            _ => (Selection::Lpc, decode_frame(&codes, &models.lpc, &state)),
        };
        traces.push(FrameTrace {
            index,
            len,
            selection,
            entry_digest,
            lpc_trial_error: None,
            mlp_trial_error: None,
            committed_error: None,
            mlp_unavailable: cfg.predictor.uses_mlp() && models.mlp.is_none(),
            nonfinite_prediction: run.nonfinite_prediction,
        });
        recon.extend_from_slice(&run.reconstructed);
        state = run.state;
        index += 1;
    }

    let signal = SignalBuffer::new(recon, DEFAULT_SAMPLE_RATE, header.source_bit_depth)?;
    Ok(DecodeOutput {
        signal,
        frames: traces,
    })
}
