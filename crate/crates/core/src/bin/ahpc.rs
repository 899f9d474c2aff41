//! Command-line front end: encode, decode, eval, sweep, synth.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use ahpc::codec::{decode_with, encode, CodecConfig, EncodedStream, Mode, PredictorKind};
use ahpc::eval::{
    default_sweep_lengths, evaluate_manifest, sweep_frame_len, write_eval_csv, write_sweep_csv,
    CorpusManifest, EvalGrid,
};
use ahpc::signal::{
    load_pcm, save_pcm, segsnr, PcmFormat, DEFAULT_BIT_DEPTH, DEFAULT_CLAMP_DB,
    DEFAULT_SEGMENT_LEN,
};
use ahpc::synth::{corpus, SynthKind};
use ahpc::{Error, Result, Tunables};
use clap::builder::{PossibleValuesParser, TypedValueParser};
use clap::{Args, Parser, Subcommand};

#[derive(Parser)]
#[command(name = "ahpc", version, about = "Hybrid LPC/MLP ADPCM speech coder")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Encode a PCM file into an AHPC stream.
    Encode {
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[command(flatten)]
        pcm: PcmArgs,
        #[command(flatten)]
        codec: CodecArgs,
    },
    /// Decode an AHPC stream into PCM.
    Decode {
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Output container; inferred from the extension when omitted.
        #[arg(long)]
        format: Option<PcmFormat>,
        /// Tunables file the stream was encoded with.
        #[arg(long)]
        config: Option<PathBuf>,
    },
    /// Evaluate a corpus manifest over a configuration grid and write CSV.
    Eval {
        #[arg(long)]
        manifest: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, value_delimiter = ',', default_value = "backward")]
        mode: Vec<Mode>,
        #[arg(long, value_delimiter = ',', default_value = "lpc,mlp,hybrid")]
        predictor: Vec<PredictorKind>,
        #[arg(long, value_delimiter = ',', default_value = "2,3,4,5", value_parser = clap::value_parser!(u8).range(2..=5))]
        nq: Vec<u8>,
        #[arg(long = "frame-len", value_delimiter = ',', default_value = "100")]
        frame_len: Vec<usize>,
        #[command(flatten)]
        common: CommonArgs,
    },
    /// SEGSNR of each predictor over frame lengths 10..=300 step 10.
    Sweep {
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[command(flatten)]
        pcm: PcmArgs,
        #[command(flatten)]
        codec: CodecArgs,
    },
    /// Write a synthetic corpus (wav files plus manifest.csv) into a directory.
    Synth {
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 8)]
        count: usize,
        /// Length of every file; lengths cycle over 1, 2 and 3 s when omitted.
        #[arg(long)]
        seconds: Option<f64>,
        /// Generate only this signal family.
        #[arg(long)]
        kind: Option<SynthKind>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

#[derive(Args)]
struct PcmArgs {
    /// Input container; inferred from the extension when omitted.
    #[arg(long)]
    format: Option<PcmFormat>,
    /// Significant bits per input sample.
    #[arg(long = "bit-depth", default_value_t = DEFAULT_BIT_DEPTH)]
    bit_depth: u8,
}

#[derive(Args)]
struct CodecArgs {
    #[arg(long, default_value = "backward")]
    mode: Mode,
    #[arg(long, default_value = "hybrid")]
    predictor: PredictorKind,
    #[arg(long, default_value_t = 4, value_parser = clap::value_parser!(u8).range(2..=5))]
    nq: u8,
    #[arg(long = "frame-len", default_value_t = 100)]
    frame_len: usize,
    #[arg(long = "lpc-order", default_value_t = 10, value_parser = PossibleValuesParser::new(["10", "25"]).map(|s| s.parse::<usize>().unwrap()))]
    lpc_order: usize,
    #[command(flatten)]
    common: CommonArgs,
}

#[derive(Args)]
struct CommonArgs {
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Levenberg-Marquardt epochs per training run.
    #[arg(long)]
    epochs: Option<usize>,
    /// Random initialisations per frame.
    #[arg(long)]
    starts: Option<usize>,
    /// Tunables file (quantizer tables, step bounds, training settings).
    #[arg(long)]
    config: Option<PathBuf>,
}

impl CommonArgs {
    fn tunables(&self) -> Result<Tunables> {
        let mut t = match &self.config {
            Some(path) => Tunables::load(path)?,
            None => Tunables::default(),
        };
        if let Some(e) = self.epochs {
            t.train.epochs = e;
        }
        if let Some(s) = self.starts {
            t.train.n_starts = s;
        }
        t.validate()?;
        Ok(t)
    }

    fn base_config(&self) -> Result<CodecConfig> {
        Ok(CodecConfig {
            seed: self.seed,
            tunables: self.tunables()?,
            ..CodecConfig::default()
        })
    }
}

impl CodecArgs {
    fn config(&self) -> Result<CodecConfig> {
        let cfg = CodecConfig {
            mode: self.mode,
            predictor: self.predictor,
            nq: self.nq,
            frame_len: self.frame_len,
            lpc_order: self.lpc_order,
            ..self.common.base_config()?
        };
        cfg.validate()?;
        Ok(cfg)
    }
}

fn format_for(path: &Path, explicit: Option<PcmFormat>) -> PcmFormat {
    explicit.unwrap_or_else(|| PcmFormat::from_path(path))
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<()> {
    fs::write(path, bytes).map_err(|e| Error::Io {
        path: path.to_path_buf(),
        source: e,
    })
}

fn create(path: &Path) -> Result<fs::File> {
    fs::File::create(path).map_err(|e| Error::Io {
        path: path.to_path_buf(),
        source: e,
    })
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Encode {
            input,
            out,
            pcm,
            codec,
        } => {
            let cfg = codec.config()?;
            let signal = load_pcm(&input, format_for(&input, pcm.format), pcm.bit_depth)?;
            let encoded = encode(&signal, &cfg)?;
            write_file(&out, &encoded.stream.to_bytes())?;
            println!("samples: {}", signal.len());
            println!("bytes: {}", encoded.stream.len_bytes());
            println!("bits_per_sample: {}", encoded.stream.bits_per_sample());
            match segsnr(
                signal.samples(),
                &encoded.reconstruction,
                DEFAULT_SEGMENT_LEN,
                DEFAULT_CLAMP_DB,
            ) {
                Ok(r) => println!("segsnr_db: {:.3}", r.segsnr_db),
                Err(_) => println!("segsnr_db: n/a (shorter than one segment)"),
            }
            if cfg.predictor == PredictorKind::Hybrid {
                println!("mlp_usage: {:.4}", encoded.mlp_usage());
            }
        }
        Command::Decode {
            input,
            out,
            format,
            config,
        } => {
            let tunables = match config {
                Some(p) => Tunables::load(&p)?,
                None => Tunables::default(),
            };
            let bytes = fs::read(&input).map_err(|e| Error::Io {
                path: input.clone(),
                source: e,
            })?;
            let stream = EncodedStream::from_bytes(&bytes)?;
            let h = stream.header;
            let decoded = decode_with(&stream, &tunables)?;
            save_pcm(&decoded.signal, &out, format_for(&out, format))?;
            println!(
                "mode: {}\npredictor: {}\nnq: {}\nframe_len: {}\nlpc_order: {}\nseed: {}\nsamples: {}\nsource_bit_depth: {}\ndigest: {:016x} (ok)",
                h.mode, h.predictor, h.nq, h.frame_len, h.lpc_order, h.seed, h.sample_count, h.source_bit_depth, h.digest
            );
        }
        Command::Eval {
            manifest,
            out,
            mode,
            predictor,
            nq,
            frame_len,
            common,
        } => {
            let grid = EvalGrid {
                base: common.base_config()?,
                modes: mode,
                predictors: predictor,
                nqs: nq,
                frame_lens: frame_len,
            };
            for cfg in grid.configs() {
                cfg.validate()?;
            }
            let manifest = CorpusManifest::load(&manifest)?;
            let rows = evaluate_manifest(&manifest, &grid);
            let failed = rows.iter().filter(|r| !r.is_ok()).count();
            write_eval_csv(&rows, create(&out)?)?;
            println!("rows: {}", rows.len());
            if failed > 0 {
                eprintln!("warning: {failed} row(s) record errors");
            }
        }
        Command::Sweep {
            input,
            out,
            pcm,
            codec,
        } => {
            let cfg = codec.config()?;
            let signal = load_pcm(&input, format_for(&input, pcm.format), pcm.bit_depth)?;
            let rows = sweep_frame_len(&signal, &cfg, &default_sweep_lengths())?;
            write_sweep_csv(&rows, create(&out)?)?;
            println!("rows: {}", rows.len());
        }
        Command::Synth {
            out,
            count,
            seconds,
            kind,
            seed,
        } => {
            fs::create_dir_all(&out).map_err(|e| Error::Io {
                path: out.clone(),
                source: e,
            })?;
            let signals = match kind {
                None => corpus(count, seconds.unwrap_or(1.0), seconds.is_none(), seed),
                Some(k) => (0..count as u64)
                    .map(|i| {
                        let secs = seconds.unwrap_or(1.0 + (i % 3) as f64);
                        let n = (secs * ahpc::signal::DEFAULT_SAMPLE_RATE as f64) as usize;
                        let s = seed.wrapping_mul(1000).wrapping_add(i);
                        ahpc::synth::SynthSignal {
                            label: format!("{}-{i:02}", k.name()),
                            kind: k,
                            seed: s,
                            signal: k.signal(n, s),
                        }
                    })
                    .collect(),
            };
            let mut manifest = create(&out.join("manifest.csv"))?;
            for s in &signals {
                let name = format!("{}.wav", s.label);
                save_pcm(&s.signal, &out.join(&name), PcmFormat::Wav)?;
                writeln!(manifest, "{name},wav,{},{}", s.signal.source_bit_depth(), s.label)
                    .map_err(|e| Error::Io {
                        path: out.join("manifest.csv"),
                        source: e,
                    })?;
            }
            println!("files: {}", signals.len());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let rendered = e.render().to_string();
            let line: Vec<&str> = rendered
                .lines()
                .map(str::trim)
                .filter(|l| !l.is_empty())
                .collect();
            let line = line.join("; ");
            eprintln!("error[E_USAGE]: {}", line.strip_prefix("error: ").unwrap_or(&line));
            return ExitCode::from(2);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error[{}]: {e}", e.code());
            ExitCode::FAILURE
        }
    }
}
