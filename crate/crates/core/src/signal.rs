//! PCM ingestion and emission, framing, and segmental SNR.
//!
//! Samples are held as `f64` in `[-1, 1)`, normalized by the *source* bit
//! depth of the corpus (12 bits for the reference speech database), so that
//! fixed quantizer step bounds mean the same thing for every file.

use std::fs;
use std::path::Path;
use std::str::FromStr;

use serde::Serialize;

use crate::error::{Error, Result};

pub const DEFAULT_SAMPLE_RATE: u32 = 8000;
pub const DEFAULT_BIT_DEPTH: u8 = 12;

/// Mono sampled waveform normalized to `[-1, 1)`.
#[derive(Debug, Clone, PartialEq)]
pub struct SignalBuffer {
    samples: Vec<f64>,
    sample_rate_hz: u32,
    source_bit_depth: u8,
}

impl SignalBuffer {
    pub fn new(samples: Vec<f64>, sample_rate_hz: u32, source_bit_depth: u8) -> Result<Self> {
        if sample_rate_hz == 0 {
            return Err(Error::InvalidSignal("sample rate must be positive".into()));
        }
        if !(8..=32).contains(&source_bit_depth) {
            return Err(Error::InvalidSignal(format!(
                "bit depth {source_bit_depth} outside 8..=32"
            )));
        }
        if let Some((i, v)) = samples
            .iter()
            .enumerate()
            .find(|(_, v)| !(-1.0..1.0).contains(*v))
        {
            return Err(Error::InvalidSignal(format!(
                "sample {i} = {v} outside [-1, 1)"
            )));
        }
        Ok(Self {
            samples,
            sample_rate_hz,
            source_bit_depth,
        })
    }

    /// 8 kHz, 12-bit buffer.
    pub fn from_samples(samples: Vec<f64>) -> Result<Self> {
        Self::new(samples, DEFAULT_SAMPLE_RATE, DEFAULT_BIT_DEPTH)
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn into_samples(self) -> Vec<f64> {
        self.samples
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn sample_rate_hz(&self) -> u32 {
        self.sample_rate_hz
    }

    pub fn source_bit_depth(&self) -> u8 {
        self.source_bit_depth
    }

    pub fn with_sample_rate(mut self, sample_rate_hz: u32) -> Result<Self> {
        if sample_rate_hz == 0 {
            return Err(Error::InvalidSignal("sample rate must be positive".into()));
        }
        self.sample_rate_hz = sample_rate_hz;
        Ok(self)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum PcmFormat {
    /// Little-endian signed 16-bit mono, no header.
    Raw16le,
    /// RIFF/WAVE, integer PCM, mono.
    Wav,
}

impl FromStr for PcmFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "raw" | "raw16le" | "pcm" => Ok(PcmFormat::Raw16le),
            "wav" => Ok(PcmFormat::Wav),
            other => Err(Error::UnsupportedPcm(format!("unknown format {other:?}"))),
        }
    }
}

impl PcmFormat {
    /// Guess the format from a file extension; anything but `.wav` is raw.
    pub fn from_path(path: &Path) -> Self {
        match path.extension().and_then(|e| e.to_str()) {
            Some(ext) if ext.eq_ignore_ascii_case("wav") => PcmFormat::Wav,
            _ => PcmFormat::Raw16le,
        }
    }
}

fn scale_integers(values: &[i32], source_bit_depth: u8) -> Result<Vec<f64>> {
    let full = (1i64 << (source_bit_depth - 1)) as f64;
    let lo = -(1i64 << (source_bit_depth - 1));
    let hi = (1i64 << (source_bit_depth - 1)) - 1;
    values
        .iter()
        .enumerate()
        .map(|(i, &v)| {
            if (v as i64) < lo || (v as i64) > hi {
                Err(Error::UnsupportedPcm(format!(
                    "sample {i} = {v} exceeds the declared {source_bit_depth}-bit range"
                )))
            } else {
                Ok(v as f64 / full)
            }
        })
        .collect()
}

/// Read a mono PCM file and normalize by `2^(source_bit_depth - 1)`.
pub fn load_pcm(path: &Path, format: PcmFormat, source_bit_depth: u8) -> Result<SignalBuffer> {
    if !(8..=32).contains(&source_bit_depth) {
        return Err(Error::UnsupportedPcm(format!(
            "bit depth {source_bit_depth} outside 8..=32"
        )));
    }
    match format {
        PcmFormat::Raw16le => {
            if source_bit_depth > 16 {
                return Err(Error::UnsupportedPcm(
                    "raw16le input cannot carry more than 16 bits".into(),
                ));
            }
            let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
            if bytes.len() % 2 != 0 {
                return Err(Error::UnsupportedPcm(format!(
                    "raw16le payload has odd length {}",
                    bytes.len()
                )));
            }
            let ints: Vec<i32> = bytes
                .chunks_exact(2)
                .map(|c| i16::from_le_bytes([c[0], c[1]]) as i32)
                .collect();
            let samples = scale_integers(&ints, source_bit_depth)?;
            SignalBuffer::new(samples, DEFAULT_SAMPLE_RATE, source_bit_depth)
        }
        PcmFormat::Wav => {
            if !path.exists() {
                return Err(Error::io(
                    path,
                    std::io::Error::new(std::io::ErrorKind::NotFound, "file not found"),
                ));
            }
            let reader = hound::WavReader::open(path).map_err(|e| match e {
                hound::Error::IoError(io) => Error::io(path, io),
                other => Error::Wav(other.to_string()),
            })?;
            let spec = reader.spec();
            if spec.channels != 1 {
                return Err(Error::UnsupportedPcm(format!(
                    "{} channels; only mono is supported",
                    spec.channels
                )));
            }
            if spec.sample_format != hound::SampleFormat::Int {
                return Err(Error::UnsupportedPcm("floating-point wav".into()));
            }
            if source_bit_depth as u16 > spec.bits_per_sample {
                return Err(Error::UnsupportedPcm(format!(
                    "declared bit depth {source_bit_depth} exceeds the {}-bit container",
                    spec.bits_per_sample
                )));
            }
            let ints = reader
                .into_samples::<i32>()
                .collect::<std::result::Result<Vec<_>, _>>()
                .map_err(|e| Error::Wav(e.to_string()))?;
            let samples = scale_integers(&ints, source_bit_depth)?;
            SignalBuffer::new(samples, spec.sample_rate, source_bit_depth)
        }
    }
}

fn container_bits(source_bit_depth: u8) -> u16 {
    match source_bit_depth {
        0..=16 => 16,
        17..=24 => 24,
        _ => 32,
    }
}

fn to_integers(signal: &SignalBuffer) -> Vec<i32> {
    let depth = signal.source_bit_depth();
    let full = (1i64 << (depth - 1)) as f64;
    let lo = -(1i64 << (depth - 1)) as f64;
    let hi = ((1i64 << (depth - 1)) - 1) as f64;
    signal
        .samples()
        .iter()
        .map(|&x| (x * full).round().clamp(lo, hi) as i32)
        .collect()
}

/// Write a signal at its source bit depth, clipping to the representable range.
pub fn save_pcm(signal: &SignalBuffer, path: &Path, format: PcmFormat) -> Result<()> {
    let ints = to_integers(signal);
    match format {
        PcmFormat::Raw16le => {
            if signal.source_bit_depth() > 16 {
                return Err(Error::UnsupportedPcm(
                    "raw16le output cannot carry more than 16 bits".into(),
                ));
            }
            let bytes: Vec<u8> = ints
                .iter()
                .flat_map(|&v| (v as i16).to_le_bytes())
                .collect();
            fs::write(path, bytes).map_err(|e| Error::io(path, e))
        }
        PcmFormat::Wav => {
            let spec = hound::WavSpec {
                channels: 1,
                sample_rate: signal.sample_rate_hz(),
                bits_per_sample: container_bits(signal.source_bit_depth()),
                sample_format: hound::SampleFormat::Int,
            };
            let wav_err = |e: hound::Error| match e {
                hound::Error::IoError(io) => Error::io(path, io),
                other => Error::Wav(other.to_string()),
            };
            let mut writer = hound::WavWriter::create(path, spec).map_err(wav_err)?;
            for &v in &ints {
                writer.write_sample(v).map_err(wav_err)?;
            }
            writer.finalize().map_err(wav_err)
        }
    }
}

/// A view of one coding frame.
#[derive(Debug, Clone, Copy)]
pub struct Frame<'a> {
    pub index: usize,
    pub start: usize,
    pub samples: &'a [f64],
    signal: &'a [f64],
}

impl<'a> Frame<'a> {
    /// The `order` samples preceding the frame, oldest first, zero-filled
    /// before the start of the signal.
    pub fn history(&self, order: usize) -> Vec<f64> {
        let mut out = vec![0.0; order];
        let avail = self.start.min(order);
        out[order - avail..].copy_from_slice(&self.signal[self.start - avail..self.start]);
        out
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }
}

/// Consecutive non-overlapping frames; a trailing partial frame is kept.
pub fn frames(samples: &[f64], frame_len: usize) -> impl Iterator<Item = Frame<'_>> + '_ {
    assert!(frame_len >= 1, "frame_len must be at least 1");
    samples
        .chunks(frame_len)
        .enumerate()
        .map(move |(index, chunk)| Frame {
            index,
            start: index * frame_len,
            samples: chunk,
            signal: samples,
        })
}

/// Number of frames `frames` yields for `len` samples.
pub fn frame_count(len: usize, frame_len: usize) -> usize {
    len.div_ceil(frame_len)
}

pub const DEFAULT_SEGMENT_LEN: usize = 200;
pub const DEFAULT_CLAMP_DB: (f64, f64) = (0.0, 80.0);

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SegSnrReport {
    pub segsnr_db: f64,
    pub std_db: f64,
    pub segment_count: usize,
    pub segment_len: usize,
    pub clamp_db: (f64, f64),
    /// Per-segment clamped values, in order.
    pub segments_db: Vec<f64>,
}

/// SNR in dB of one segment, clamped. Zero error maps to the ceiling and a
/// silent reference with nonzero error to the floor.
pub fn snr_db(signal_energy: f64, error_energy: f64, clamp_db: (f64, f64)) -> f64 {
    let (floor, ceiling) = clamp_db;
    if error_energy <= 0.0 {
        return ceiling;
    }
    if signal_energy <= 0.0 {
        return floor;
    }
    (10.0 * (signal_energy / error_energy).log10()).clamp(floor, ceiling)
}

/// Mean and population standard deviation.
pub fn mean_std(values: &[f64]) -> (f64, f64) {
    if values.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
    (mean, var.sqrt())
}

/// Segmental SNR over full non-overlapping segments; the trailing partial
/// segment is discarded.
pub fn segsnr(
    original: &[f64],
    decoded: &[f64],
    segment_len: usize,
    clamp_db: (f64, f64),
) -> Result<SegSnrReport> {
    if original.len() != decoded.len() {
        return Err(Error::LengthMismatch {
            original: original.len(),
            decoded: decoded.len(),
        });
    }
    if segment_len == 0 || original.len() < segment_len {
        return Err(Error::TooShort {
            len: original.len(),
            segment_len,
        });
    }
    if clamp_db.0 > clamp_db.1 {
        return Err(Error::InvalidConfig(format!(
            "clamp floor {} above ceiling {}",
            clamp_db.0, clamp_db.1
        )));
    }
    let segments_db: Vec<f64> = original
        .chunks_exact(segment_len)
        .zip(decoded.chunks_exact(segment_len))
        .map(|(x, y)| {
            let signal: f64 = x.iter().map(|v| v * v).sum();
            let error: f64 = x.iter().zip(y).map(|(a, b)| (a - b) * (a - b)).sum();
            snr_db(signal, error, clamp_db)
        })
        .collect();
    let (segsnr_db, std_db) = mean_std(&segments_db);
    Ok(SegSnrReport {
        segsnr_db,
        std_db,
        segment_count: segments_db.len(),
        segment_len,
        clamp_db,
        segments_db,
    })
}
