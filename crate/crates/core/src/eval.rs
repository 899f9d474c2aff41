//! Corpus evaluation and frame-length sweeps, reported as CSV.

use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use rayon::prelude::*;
use serde::Serialize;

use crate::codec::{encode, CodecConfig, Mode, PredictorKind, Selection};
use crate::error::{Error, Result};
use crate::signal::{load_pcm, mean_std, segsnr, PcmFormat, SignalBuffer, DEFAULT_CLAMP_DB, DEFAULT_SEGMENT_LEN};

#[derive(Debug, Clone, PartialEq)]
pub struct ManifestEntry {
    pub path: PathBuf,
    pub format: PcmFormat,
    pub source_bit_depth: u8,
    pub label: String,
}

/// List of corpus files, one `path,format,bit_depth,label` per line.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct CorpusManifest {
    pub root: PathBuf,
    pub entries: Vec<ManifestEntry>,
}

impl CorpusManifest {
    /// Parse manifest text. Relative paths resolve against `root`; blank
    /// lines and `#` comments are skipped.
    pub fn parse(text: &str, root: &Path) -> Result<Self> {
        let mut entries = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let err = |reason: String| Error::Manifest {
                line: i + 1,
                reason,
            };
            let fields: Vec<&str> = line.split(',').map(str::trim).collect();
            if fields.len() != 4 {
                return Err(err(format!("expected 4 fields, found {}", fields.len())));
            }
            let path = root.join(fields[0]);
            if !path.is_file() {
                return Err(err(format!("{} does not exist", path.display())));
            }
            let format = fields[1].parse().map_err(|e: Error| err(e.to_string()))?;
            let source_bit_depth = fields[2]
                .parse()
                .map_err(|_| err(format!("bad bit depth {:?}", fields[2])))?;
            entries.push(ManifestEntry {
                path,
                format,
                source_bit_depth,
                label: fields[3].to_string(),
            });
        }
        Ok(Self {
            root: root.to_path_buf(),
            entries,
        })
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let root = path.parent().unwrap_or(Path::new("."));
        Self::parse(&text, root)
    }
}

/// Configurations to evaluate: the cross product of every axis, applied on
/// top of `base`.
#[derive(Debug, Clone)]
pub struct EvalGrid {
    pub base: CodecConfig,
    pub modes: Vec<Mode>,
    pub predictors: Vec<PredictorKind>,
    pub nqs: Vec<u8>,
    pub frame_lens: Vec<usize>,
}

impl EvalGrid {
    pub fn configs(&self) -> Vec<CodecConfig> {
        let mut out = Vec::new();
        for &mode in &self.modes {
            for &predictor in &self.predictors {
                for &nq in &self.nqs {
                    for &frame_len in &self.frame_lens {
                        out.push(CodecConfig {
                            mode,
                            predictor,
                            nq,
                            frame_len,
                            ..self.base.clone()
                        });
                    }
                }
            }
        }
        out
    }
}

/// `file` rows are per (file, configuration); `files` aggregates average
/// per-file SEGSNR with the standard deviation across files; `segments`
/// aggregates pool every segment of every file.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum RowKind {
    File,
    Files,
    Segments,
}

#[derive(Debug, Clone, Serialize)]
pub struct EvalRow {
    pub kind: RowKind,
    pub label: String,
    pub mode: Mode,
    pub predictor: PredictorKind,
    pub nq: u8,
    pub frame_len: usize,
    pub segsnr_db: f64,
    pub std_db: f64,
    pub mlp_usage_fraction: f64,
    pub mlp_usage_percent: f64,
    pub encode_wall_time_s: f64,
    pub error: String,
    #[serde(skip)]
    segments_db: Vec<f64>,
    #[serde(skip)]
    frames: (usize, usize),
}

impl EvalRow {
    fn sort_key(&self) -> impl Ord + '_ {
        (
            self.kind,
            self.mode,
            self.predictor,
            self.nq,
            self.frame_len,
            self.label.as_str(),
        )
    }

    pub fn is_ok(&self) -> bool {
        self.error.is_empty()
    }
}

/// Encode one signal under one configuration and score the reconstruction.
pub fn evaluate_signal(label: &str, signal: &SignalBuffer, cfg: &CodecConfig) -> EvalRow {
    let mut row = EvalRow {
        kind: RowKind::File,
        label: label.to_string(),
        mode: cfg.mode,
        predictor: cfg.predictor,
        nq: cfg.nq,
        frame_len: cfg.frame_len,
        segsnr_db: f64::NAN,
        std_db: f64::NAN,
        mlp_usage_fraction: f64::NAN,
        mlp_usage_percent: f64::NAN,
        encode_wall_time_s: f64::NAN,
        error: String::new(),
        segments_db: Vec::new(),
        frames: (0, 0),
    };
    let t0 = Instant::now();
    let result = encode(signal, cfg).and_then(|out| {
        let elapsed = t0.elapsed().as_secs_f64();
        let report = segsnr(
            signal.samples(),
            &out.reconstruction,
            DEFAULT_SEGMENT_LEN,
            DEFAULT_CLAMP_DB,
        )?;
        Ok((out, report, elapsed))
    });
    match result {
        Ok((out, report, elapsed)) => {
            row.segsnr_db = report.segsnr_db;
            row.std_db = report.std_db;
            row.mlp_usage_fraction = out.mlp_usage();
            row.mlp_usage_percent = 100.0 * out.mlp_usage();
            row.encode_wall_time_s = elapsed;
            row.segments_db = report.segments_db;
            let mlp = out
                .frames
                .iter()
                .filter(|f| f.selection == Selection::Mlp)
                .count();
            row.frames = (mlp, out.frames.len());
        }
        Err(e) => row.error = format!("{}: {e}", e.code()),
    }
    row
}

fn aggregate(rows: &[&EvalRow], kind: RowKind) -> EvalRow {
    let first = rows[0];
    let ok: Vec<&&EvalRow> = rows.iter().filter(|r| r.is_ok()).collect();
    let (segsnr_db, std_db) = match kind {
        RowKind::Files => mean_std(&ok.iter().map(|r| r.segsnr_db).collect::<Vec<_>>()),
        _ => mean_std(
            &ok.iter()
                .flat_map(|r| r.segments_db.iter().copied())
                .collect::<Vec<_>>(),
        ),
    };
    let (mlp, total) = ok
        .iter()
        .fold((0, 0), |(a, b), r| (a + r.frames.0, b + r.frames.1));
    let failed = rows.len() - ok.len();
    let usage = if total == 0 { f64::NAN } else { mlp as f64 / total as f64 };
    EvalRow {
        kind,
        label: "*".into(),
        mode: first.mode,
        predictor: first.predictor,
        nq: first.nq,
        frame_len: first.frame_len,
        segsnr_db,
        std_db,
        mlp_usage_fraction: usage,
        mlp_usage_percent: 100.0 * usage,
        encode_wall_time_s: ok.iter().map(|r| r.encode_wall_time_s).sum(),
        error: if failed > 0 {
            format!("{failed} file(s) failed")
        } else {
            String::new()
        },
        segments_db: Vec::new(),
        frames: (mlp, total),
    }
}

/// Evaluate every labeled signal under every grid configuration, in
/// parallel across files. Rows are sorted; aggregates follow file rows.
pub fn evaluate_signals(signals: &[(String, SignalBuffer)], grid: &EvalGrid) -> Vec<EvalRow> {
    let configs = grid.configs();
    let jobs: Vec<(usize, usize)> = (0..signals.len())
        .flat_map(|s| (0..configs.len()).map(move |c| (s, c)))
        .collect();
    let mut rows: Vec<EvalRow> = jobs
        .par_iter()
        .map(|&(s, c)| evaluate_signal(&signals[s].0, &signals[s].1, &configs[c]))
        .collect();
    rows.sort_by(|a, b| a.sort_key().cmp(&b.sort_key()));

    let mut aggregates = Vec::new();
    for cfg in &configs {
        let group: Vec<&EvalRow> = rows
            .iter()
            .filter(|r| {
                r.mode == cfg.mode
                    && r.predictor == cfg.predictor
                    && r.nq == cfg.nq
                    && r.frame_len == cfg.frame_len
            })
            .collect();
        if !group.is_empty() {
            aggregates.push(aggregate(&group, RowKind::Files));
            aggregates.push(aggregate(&group, RowKind::Segments));
        }
    }
    aggregates.sort_by(|a, b| a.sort_key().cmp(&b.sort_key()));
    rows.extend(aggregates);
    rows
}

/// Load every manifest entry and evaluate. Files that fail to load produce
/// error rows and the run continues.
pub fn evaluate_manifest(manifest: &CorpusManifest, grid: &EvalGrid) -> Vec<EvalRow> {
    let mut signals = Vec::new();
    let mut failures = Vec::new();
    for e in &manifest.entries {
        match load_pcm(&e.path, e.format, e.source_bit_depth) {
            Ok(s) => signals.push((e.label.clone(), s)),
            Err(err) => failures.push((e.label.clone(), err)),
        }
    }
    let mut rows = evaluate_signals(&signals, grid);
    for (label, err) in failures {
        for cfg in grid.configs() {
            rows.push(EvalRow {
                kind: RowKind::File,
                label: label.clone(),
                mode: cfg.mode,
                predictor: cfg.predictor,
                nq: cfg.nq,
                frame_len: cfg.frame_len,
                segsnr_db: f64::NAN,
                std_db: f64::NAN,
                mlp_usage_fraction: f64::NAN,
                mlp_usage_percent: f64::NAN,
                encode_wall_time_s: f64::NAN,
                error: format!("{}: {err}", err.code()),
                segments_db: Vec::new(),
                frames: (0, 0),
            });
        }
    }
    rows.sort_by(|a, b| a.sort_key().cmp(&b.sort_key()));
    rows
}

const EVAL_HEADER: [&str; 12] = [
    "kind",
    "label",
    "mode",
    "predictor",
    "nq",
    "frame_len",
    "segsnr_db",
    "std_db",
    "mlp_usage_fraction",
    "mlp_usage_percent",
    "encode_wall_time_s",
    "error",
];

pub fn write_eval_csv<W: Write>(rows: &[EvalRow], out: W) -> Result<()> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(out);
    w.write_record(EVAL_HEADER)?;
    for r in rows {
        w.serialize(r)?;
    }
    w.flush().map_err(|e| Error::io("<csv>", e))
}

/// Frame lengths 10, 20, ..., 300.
pub fn default_sweep_lengths() -> Vec<usize> {
    (1..=30).map(|k| k * 10).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SweepRow {
    pub frame_len: usize,
    pub lpc_db: f64,
    pub mlp_db: f64,
    pub hybrid_db: f64,
}

/// SEGSNR of each predictor at each frame length, with the rest of `base`
/// held fixed. The hybrid column always uses LPC-10.
pub fn sweep_frame_len(
    signal: &SignalBuffer,
    base: &CodecConfig,
    lengths: &[usize],
) -> Result<Vec<SweepRow>> {
    let longest = lengths.iter().copied().max().unwrap_or(0);
    if signal.len() < longest.max(DEFAULT_SEGMENT_LEN) {
        return Err(Error::TooShort {
            len: signal.len(),
            segment_len: longest.max(DEFAULT_SEGMENT_LEN),
        });
    }
    let predictors = [PredictorKind::Lpc, PredictorKind::Mlp, PredictorKind::Hybrid];
    let jobs: Vec<(usize, PredictorKind)> = lengths
        .iter()
        .flat_map(|&l| predictors.iter().map(move |&p| (l, p)))
        .collect();
    let scores = jobs
        .par_iter()
        .map(|&(frame_len, predictor)| {
            let lpc_order = if predictor == PredictorKind::Hybrid {
                10
            } else {
                base.lpc_order
            };
            let cfg = CodecConfig {
                frame_len,
                predictor,
                lpc_order,
                ..base.clone()
            };
            let out = encode(signal, &cfg)?;
            segsnr(
                signal.samples(),
                &out.reconstruction,
                DEFAULT_SEGMENT_LEN,
                DEFAULT_CLAMP_DB,
            )
            .map(|r| r.segsnr_db)
        })
        .collect::<Result<Vec<f64>>>()?;
    Ok(lengths
        .iter()
        .zip(scores.chunks_exact(3))
        .map(|(&frame_len, s)| SweepRow {
            frame_len,
            lpc_db: s[0],
            mlp_db: s[1],
            hybrid_db: s[2],
        })
        .collect())
}

pub fn write_sweep_csv<W: Write>(rows: &[SweepRow], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for r in rows {
        w.serialize(r)?;
    }
    w.flush().map_err(|e| Error::io("<csv>", e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::synth::SynthKind;

    #[test]
    fn manifest_parsing() {
        let dir = tempfile::tempdir().unwrap();
        std::fs::write(dir.path().join("a.raw"), [0u8; 4]).unwrap();
        let text = "# corpus\n\na.raw, raw16le, 12, spk1-m\n";
        let m = CorpusManifest::parse(text, dir.path()).unwrap();
        assert_eq!(m.entries.len(), 1);
        assert_eq!(m.entries[0].label, "spk1-m");
        assert_eq!(m.entries[0].source_bit_depth, 12);

        let missing = CorpusManifest::parse("b.raw,raw16le,12,x\n", dir.path());
        assert!(matches!(missing, Err(Error::Manifest { line: 1, .. })));
        let short = CorpusManifest::parse("a.raw,raw16le\n", dir.path());
        assert!(short.is_err());
    }

    #[test]
    fn empty_manifest_gives_header_only() {
        let grid = EvalGrid {
            base: CodecConfig::default(),
            modes: vec![Mode::Backward],
            predictors: vec![PredictorKind::Lpc],
            nqs: vec![2],
            frame_lens: vec![100],
        };
        let rows = evaluate_manifest(&CorpusManifest::default(), &grid);
        assert!(rows.is_empty());
        let mut buf = Vec::new();
        write_eval_csv(&rows, &mut buf).unwrap();
        assert_eq!(
            String::from_utf8(buf).unwrap(),
            "kind,label,mode,predictor,nq,frame_len,segsnr_db,std_db,mlp_usage_fraction,mlp_usage_percent,encode_wall_time_s,error\n"
        );
    }

    #[test]
    fn grid_rows_and_aggregates() {
        let signals: Vec<(String, SignalBuffer)> = (0..2)
            .map(|i| (format!("s{i}"), SynthKind::Ar.signal(1200, i)))
            .collect();
        let grid = EvalGrid {
            base: CodecConfig::default(),
            modes: vec![Mode::Backward],
            predictors: vec![PredictorKind::Lpc, PredictorKind::Hybrid],
            nqs: vec![2, 3],
            frame_lens: vec![100],
        };
        let rows = evaluate_signals(&signals, &grid);
        assert_eq!(rows.iter().filter(|r| r.kind == RowKind::File).count(), 8);
        assert_eq!(rows.iter().filter(|r| r.kind == RowKind::Files).count(), 4);
        assert_eq!(rows.iter().filter(|r| r.kind == RowKind::Segments).count(), 4);
        assert!(rows.iter().all(|r| r.is_ok()));
        let lpc_agg = rows
            .iter()
            .find(|r| r.kind == RowKind::Files && r.predictor == PredictorKind::Lpc)
            .unwrap();
        assert_eq!(lpc_agg.mlp_usage_fraction, 0.0);
    }

    #[test]
    fn sweep_rejects_short_signal() {
        let s = SynthKind::Ar.signal(250, 0);
        assert!(matches!(
            sweep_frame_len(&s, &CodecConfig::default(), &default_sweep_lengths()),
            Err(Error::TooShort { .. })
        ));
        assert_eq!(default_sweep_lengths().len(), 30);
    }
}
