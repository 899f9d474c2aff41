//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! nonzero if any criterion fails.

use std::collections::BTreeMap;
use std::process::ExitCode;
use std::time::Instant;

use ahpc::codec::{decode, encode, CodecConfig, EncodeOutput, Mode, PredictorKind, HEADER_LEN};
use ahpc::eval::{default_sweep_lengths, sweep_frame_len, SweepRow};
use ahpc::lpc::{autocorrelation, levinson_durbin};
use ahpc::mlp::{forward, jacobian_row, MlpModel, INPUTS, PARAMS};
use ahpc::quant::{adapt, dequantize, quantize, Code, QuantParams, QuantState};
use ahpc::signal::{segsnr, DEFAULT_CLAMP_DB, DEFAULT_SEGMENT_LEN};
use ahpc::synth::{corpus, SynthKind, SynthSignal};
use ahpc::SignalBuffer;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

const MODES: [Mode; 2] = [Mode::Backward, Mode::Forward];
const PREDICTORS: [PredictorKind; 3] = [PredictorKind::Lpc, PredictorKind::Mlp, PredictorKind::Hybrid];
const NQS: [u8; 4] = [2, 3, 4, 5];

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

fn score(signal: &SignalBuffer, out: &EncodeOutput) -> f64 {
    segsnr(
        signal.samples(),
        &out.reconstruction,
        DEFAULT_SEGMENT_LEN,
        DEFAULT_CLAMP_DB,
    )
    .unwrap()
    .segsnr_db
}

/// One encode of the shared grid, with its decode check.
struct GridCell {
    signal: usize,
    mode: Mode,
    predictor: PredictorKind,
    nq: u8,
    segsnr_db: f64,
    bit_exact: bool,
    digests_match: bool,
    worst_dominance_gap: f64,
}

fn run_grid(signals: &[SynthSignal]) -> Vec<GridCell> {
    let mut jobs = Vec::new();
    for i in 0..signals.len() {
        for mode in MODES {
            for predictor in PREDICTORS {
                for nq in NQS {
                    jobs.push((i, mode, predictor, nq));
                }
            }
        }
    }
    jobs.par_iter()
        .map(|&(i, mode, predictor, nq)| {
            let signal = &signals[i].signal;
            let out = encode(signal, &CodecConfig::new(mode, predictor, nq)).unwrap();
            let bytes = out.stream.to_bytes();
            let stream = ahpc::EncodedStream::from_bytes(&bytes).unwrap();
            let dec = decode(&stream).unwrap();
            let bit_exact = dec.signal.len() == out.reconstruction.len()
                && dec
                    .signal
                    .samples()
                    .iter()
                    .zip(&out.reconstruction)
                    .all(|(a, b)| a.to_bits() == b.to_bits());
            let digests_match = dec.frames.len() == out.frames.len()
                && dec
                    .frames
                    .iter()
                    .zip(&out.frames)
                    .all(|(d, e)| d.entry_digest == e.entry_digest && d.selection == e.selection);
            // Committed error minus the smaller trial; zero when the switch is exact.
            let worst_dominance_gap = out
                .frames
                .iter()
                .filter_map(|f| match (f.lpc_trial_error, f.mlp_trial_error, f.committed_error) {
                    (Some(l), Some(m), Some(c)) => Some((c - l.min(m)).abs()),
                    _ => None,
                })
                .fold(0.0, f64::max);
            GridCell {
                signal: i,
                mode,
                predictor,
                nq,
                segsnr_db: score(signal, &out),
                bit_exact,
                digests_match,
                worst_dominance_gap,
            }
        })
        .collect()
}

fn acc_round_trip(cells: &[GridCell], signals: usize) -> Outcome {
    let bad: Vec<_> = cells.iter().filter(|c| !c.bit_exact || !c.digests_match).collect();
    let detail = format!(
        "{} encodes ({} signals x {} modes x {} predictors x nq 2..5), {} mismatches",
        cells.len(),
        signals,
        MODES.len(),
        PREDICTORS.len(),
        bad.len()
    );
    outcome(signals >= 20 && bad.is_empty(), detail)
}

fn acc_jacobian() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let h = 1e-6;
    let mut worst: f64 = 0.0;
    for _ in 0..100 {
        let mut params = [0.0; PARAMS];
        for p in params.iter_mut() {
            *p = rng.random_range(-1.0..1.0);
        }
        let model = MlpModel::from_params(params);
        let input: Vec<f64> = (0..INPUTS).map(|_| rng.random_range(-1.0..1.0)).collect();
        let analytic = jacobian_row(&model, &input);
        for k in 0..PARAMS {
            let mut plus = params;
            let mut minus = params;
            plus[k] += h;
            minus[k] -= h;
            let fd = (forward(&MlpModel::from_params(plus), &input)
                - forward(&MlpModel::from_params(minus), &input))
                / (2.0 * h);
            worst = worst.max((fd - analytic[k]).abs());
        }
    }
    outcome(worst < 1e-6, format!("max abs error {worst:.2e} (limit 1e-6)"))
}

/// Gaussian elimination with partial pivoting on the full Toeplitz system.
fn dense_solve(r: &[f64], order: usize) -> Vec<f64> {
    let mut m: Vec<Vec<f64>> = (0..order)
        .map(|i| {
            let mut row: Vec<f64> = (0..order).map(|j| r[i.abs_diff(j)]).collect();
            row.push(r[i + 1]);
            row
        })
        .collect();
    for col in 0..order {
        let piv = (col..order)
            .max_by(|&a, &b| m[a][col].abs().total_cmp(&m[b][col].abs()))
            .unwrap();
        m.swap(col, piv);
        for row in col + 1..order {
            let f = m[row][col] / m[col][col];
            for c in col..=order {
                m[row][c] -= f * m[col][c];
            }
        }
    }
    let mut x = vec![0.0; order];
    for i in (0..order).rev() {
        let s: f64 = (i + 1..order).map(|j| m[i][j] * x[j]).sum();
        x[i] = (m[i][order] - s) / m[i][i];
    }
    x
}

fn acc_levinson() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut worst: f64 = 0.0;
    for case in 0..100 {
        let order = 1 + case % 25;
        // Mildly colored noise gives a positive-definite, well-conditioned Toeplitz matrix.
        let pole: f64 = rng.random_range(-0.8..0.8);
        let mut x = Vec::with_capacity(400);
        let mut prev = 0.0;
        for _ in 0..400 {
            prev = pole * prev + rng.random_range(-1.0..1.0);
            x.push(prev);
        }
        let r = autocorrelation(&x, order);
        let fast = levinson_durbin(&r, order).unwrap();
        let dense = dense_solve(&r, order);
        let diff: f64 = fast
            .coeffs()
            .iter()
            .zip(&dense)
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt();
        let norm: f64 = dense.iter().map(|b| b * b).sum::<f64>().sqrt();
        worst = worst.max(diff / norm);
    }
    outcome(
        worst < 1e-9,
        format!("100 systems, orders 1-25, max relative error {worst:.2e} (limit 1e-9)"),
    )
}

fn acc_quantizer() -> Outcome {
    let params = QuantParams::default();
    let mut failures = Vec::new();

    for nq in NQS {
        let q = QuantState::new(nq, &params).unwrap();
        for bits in 0..(1u8 << nq) {
            let code = Code::unpack(bits, nq);
            if code.pack(nq) != bits || quantize(dequantize(code, &q), &q) != code {
                failures.push(format!("code {bits:#b} nq {nq}"));
            }
        }
    }

    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut out_of_bounds = 0usize;
    for nq in NQS {
        let mut q = QuantState::new(nq, &params).unwrap();
        for _ in 0..250_000 {
            let code = Code::unpack(rng.random_range(0..(1u8 << nq)), nq);
            q = adapt(&q, code);
            if !(q.step() >= params.step_min && q.step() <= params.step_max) {
                out_of_bounds += 1;
            }
        }
    }
    if out_of_bounds > 0 {
        failures.push(format!("{out_of_bounds} steps out of bounds"));
    }

    let mut grid_points = 0usize;
    for nq in NQS {
        for step in [params.step_min, 1e-3, params.step_init, 0.1, params.step_max] {
            let fixed = QuantParams {
                step_init: step,
                step_min: step,
                step_max: step,
                ..params.clone()
            };
            let q = QuantState::new(nq, &fixed).unwrap();
            let limit = step * (1u32 << (nq - 1)) as f64;
            let n = 20_000;
            for i in 0..n {
                let e = -limit + 2.0 * limit * (i as f64 + 0.5) / n as f64;
                grid_points += 1;
                if (dequantize(quantize(e, &q), &q) - e).abs() > step / 2.0 {
                    failures.push(format!("grid e={e} step={step} nq={nq}"));
                }
            }
        }
    }

    let detail = format!(
        "exhaustive codes nq 2..5, 10^6 adaptations, {grid_points} grid points; {} failures",
        failures.len()
    );
    outcome(failures.is_empty(), detail)
}

fn acc_hybrid_dominance(cells: &[GridCell]) -> Outcome {
    let worst_gap = cells.iter().map(|c| c.worst_dominance_gap).fold(0.0, f64::max);
    let mut by_key: BTreeMap<(usize, Mode, u8), [f64; 3]> = BTreeMap::new();
    for c in cells {
        let slot = match c.predictor {
            PredictorKind::Lpc => 0,
            PredictorKind::Mlp => 1,
            PredictorKind::Hybrid => 2,
        };
        by_key.entry((c.signal, c.mode, c.nq)).or_default()[slot] = c.segsnr_db;
    }
    let worst_margin = by_key
        .values()
        .map(|s| s[2] - s[0].max(s[1]))
        .fold(f64::INFINITY, f64::min);
    outcome(
        worst_gap == 0.0 && worst_margin >= -0.5,
        format!(
            "per-frame committed = min(trials) on {} runs (max gap {worst_gap:e}); worst file hybrid - max(lpc, mlp) = {worst_margin:+.2} dB (limit -0.5)",
            cells.iter().filter(|c| c.predictor == PredictorKind::Hybrid).count()
        ),
    )
}

fn acc_nonlinearity() -> Outcome {
    let mut lines = Vec::new();
    let mut pass = true;
    for seed in 0..3u64 {
        let signal = SynthKind::SaturatedAr.signal(16_000, seed);
        let run = |p| encode(&signal, &CodecConfig::new(Mode::Forward, p, 4)).unwrap();
        let lpc = score(&signal, &run(PredictorKind::Lpc));
        let mlp = score(&signal, &run(PredictorKind::Mlp));
        let hybrid = run(PredictorKind::Hybrid);
        let usage = hybrid.mlp_usage();
        pass &= mlp - lpc >= 1.0 && usage >= 0.4;
        lines.push(format!("seed {seed}: mlp-lpc {:+.2} dB, usage {:.0}%", mlp - lpc, 100.0 * usage));
    }
    outcome(pass, format!("{} (limits +1 dB, 40%)", lines.join("; ")))
}

fn acc_forward_vs_backward(cells: &[GridCell]) -> Outcome {
    let mut sums: BTreeMap<(PredictorKind, u8, Mode), (f64, usize)> = BTreeMap::new();
    for c in cells {
        let e = sums
            .entry((c.predictor, c.nq, c.mode))
            .or_default();
        e.0 += c.segsnr_db;
        e.1 += 1;
    }
    let mean = |p: PredictorKind, nq: u8, m: Mode| {
        let (s, n) = sums[&(p, nq, m)];
        s / n as f64
    };
    let mut worst = f64::INFINITY;
    let mut at = String::new();
    for p in PREDICTORS {
        for nq in NQS {
            let d = mean(p, nq, Mode::Forward) - mean(p, nq, Mode::Backward);
            if d < worst {
                worst = d;
                at = format!("{} nq{nq}", p.name());
            }
        }
    }
    outcome(
        worst >= -0.2,
        format!("min mean(forward) - mean(backward) = {worst:+.2} dB at {at} (limit -0.2)"),
    )
}

fn acc_rate() -> Outcome {
    let mut pass = true;
    let mut lines = Vec::new();
    for (n, frame_len) in [(8000usize, 100usize), (8437, 100), (5000, 37)] {
        let signal = SynthKind::Ar.signal(n, 11);
        for nq in NQS {
            let out = encode(&signal, &CodecConfig {
                frame_len,
                ..CodecConfig::new(Mode::Backward, PredictorKind::Hybrid, nq)
            })
            .unwrap();
            let full = n / frame_len;
            let rest = n % frame_len;
            let mut bits = (full * (1 + frame_len * nq as usize)) as u64;
            if rest > 0 {
                bits += (1 + rest * nq as usize) as u64;
            }
            let expected = HEADER_LEN + bits.div_ceil(8) as usize;
            pass &= out.stream.to_bytes().len() == expected && out.stream.header.payload_bits() == bits;
        }
        lines.push(format!("N={n} L={frame_len}"));
    }
    // 80 frames of 100: the payload fills whole bytes, so bytes measure bits exactly.
    let signal = SynthKind::Voiced.signal(8000, 12);
    let mut overheads = Vec::new();
    for nq in NQS {
        let out = encode(&signal, &CodecConfig::new(Mode::Backward, PredictorKind::Hybrid, nq)).unwrap();
        let payload_bits = (out.stream.to_bytes().len() - HEADER_LEN) * 8;
        let overhead_bits = payload_bits - 8000 * nq as usize;
        pass &= overhead_bits * 100 == 8000;
        overheads.push(overhead_bits as f64 / 8000.0);
    }
    outcome(
        pass,
        format!(
            "sizes exact for {}; overhead at L=100: {:?} bit/sample",
            lines.join(", "),
            overheads
        ),
    )
}

fn acc_determinism() -> Outcome {
    let signal = SynthKind::Voiced.signal(12_000, 21);
    let mut pass = true;
    let mut runs = 0;
    for mode in MODES {
        for predictor in PREDICTORS {
            let cfg = CodecConfig::new(mode, predictor, 3);
            let a = encode(&signal, &CodecConfig { parallel: true, ..cfg.clone() }).unwrap();
            let b = encode(&signal, &CodecConfig { parallel: true, ..cfg.clone() }).unwrap();
            let c = encode(&signal, &CodecConfig { parallel: false, ..cfg.clone() }).unwrap();
            let bytes = a.stream.to_bytes();
            pass &= bytes == b.stream.to_bytes() && bytes == c.stream.to_bytes();
            runs += 3;
        }
    }
    outcome(pass, format!("{runs} encodes, parallel x2 + sequential per config, byte-identical"))
}

/// Rises by at least 3 dB from the shortest length to an interior maximum
/// that also exceeds the longest length.
fn peaked(values: &[f64]) -> Option<usize> {
    let (argmax, peak) = values
        .iter()
        .enumerate()
        .fold((0, f64::NEG_INFINITY), |a, (i, &v)| if v > a.1 { (i, v) } else { a });
    let last = values.len() - 1;
    let ok = argmax > 0 && argmax < last && peak - values[0] >= 3.0 && peak > values[last];
    ok.then_some(argmax)
}

fn acc_sweep() -> (Outcome, Outcome) {
    let lengths = default_sweep_lengths();
    let seeds = [0u64, 1, 2];
    let mut slowest: f64 = 0.0;
    let mut lpc_spread: f64 = 0.0;
    let mut sweeps: Vec<Vec<SweepRow>> = Vec::new();
    for seed in seeds {
        let signal = SynthKind::Voiced.signal(24_000, seed);
        let t0 = Instant::now();
        let rows = sweep_frame_len(&signal, &CodecConfig::default(), &lengths).unwrap();
        slowest = slowest.max(t0.elapsed().as_secs_f64());
        let lpc: Vec<f64> = rows.iter().filter(|r| r.frame_len >= 50).map(|r| r.lpc_db).collect();
        let spread = lpc.iter().cloned().fold(f64::MIN, f64::max) - lpc.iter().cloned().fold(f64::MAX, f64::min);
        lpc_spread = lpc_spread.max(spread);
        sweeps.push(rows);
    }
    let per_seed: Vec<Option<usize>> = sweeps
        .iter()
        .map(|rows| peaked(&rows.iter().map(|r| r.mlp_db).collect::<Vec<_>>()))
        .collect();
    let mean: Vec<f64> = (0..lengths.len())
        .map(|i| sweeps.iter().map(|s| s[i].mlp_db).sum::<f64>() / sweeps.len() as f64)
        .collect();
    let mean_peak = peaked(&mean);
    let peaks: Vec<String> = per_seed
        .iter()
        .map(|p| p.map_or("none".into(), |i| lengths[i].to_string()))
        .collect();
    let shape = outcome(
        slowest < 600.0
            && lengths.len() == 30
            && lpc_spread < 3.0
            && mean_peak.is_some()
            && per_seed.iter().all(Option::is_some),
        format!(
            "3 s voiced, 30 lengths, slowest sweep {slowest:.1} s (limit 600); lpc spread 50-300 {lpc_spread:.2} dB (limit 3); mlp peak at {} (mean profile {}), {:.2} dB at 10, {:.2} dB at 300",
            peaks.join("/"),
            mean_peak.map_or("none".into(), |i| format!("{} = {:.2} dB", lengths[i], mean[i])),
            mean[0],
            mean[lengths.len() - 1]
        ),
    );
    let hybrid_margin = sweeps
        .iter()
        .flatten()
        .map(|r| r.hybrid_db - r.lpc_db.max(r.mlp_db))
        .fold(f64::INFINITY, f64::min);
    let hybrid = outcome(
        hybrid_margin >= -0.5,
        format!("worst hybrid - max(lpc, mlp) over lengths = {hybrid_margin:+.2} dB (limit -0.5)"),
    );
    (shape, hybrid)
}

fn main() -> ExitCode {
    let mut results: Vec<(&str, Outcome)> = Vec::new();
    let mut report = |id: &'static str, o: Outcome| {
        println!("{} [{id}] {}", if o.pass { "PASS" } else { "FAIL" }, o.detail);
        results.push((id, o));
    };

    let signals = corpus(24, 1.0, true, 7);
    let t0 = Instant::now();
    let cells = run_grid(&signals);
    eprintln!("codec grid: {} runs in {:.1} s", cells.len(), t0.elapsed().as_secs_f64());

    report("1 round-trip", acc_round_trip(&cells, signals.len()));
    report("2 jacobian", acc_jacobian());
    report("3 levinson", acc_levinson());
    report("4 quantizer", acc_quantizer());
    report("5 hybrid-dominance", acc_hybrid_dominance(&cells));
    report("6 nonlinearity", acc_nonlinearity());
    report("7 forward-vs-backward", acc_forward_vs_backward(&cells));
    report("8 rate", acc_rate());
    report("9 determinism", acc_determinism());
    let (shape, hybrid) = acc_sweep();
    report("10 frame-length-sweep", shape);
    report("10 sweep-hybrid", hybrid);

    let failed = results.iter().filter(|(_, o)| !o.pass).count();
    println!("{} passed, {failed} failed", results.len() - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
