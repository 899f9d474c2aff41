//! Encode a voiced signal with the switched LPC/MLP coder, serialize the
//! stream, decode it, and show what each frame chose.
//!
//! cargo run --release --example hybrid_codec [nq]

use ahpc::codec::{decode, encode, CodecConfig, EncodedStream, Mode, PredictorKind, Selection};
use ahpc::signal::{segsnr, DEFAULT_CLAMP_DB, DEFAULT_SEGMENT_LEN};
use ahpc::synth::SynthKind;

pub fn main() {
    let nq = std::env::args().nth(1).map_or(4, |a| a.parse().expect("nq in 2..=5"));
    run(nq);
}

pub fn run(nq: u8) {
    let signal = SynthKind::Voiced.signal(8000, 1);
    let cfg = CodecConfig::new(Mode::Backward, PredictorKind::Hybrid, nq);

    let out = encode(&signal, &cfg).unwrap();
    let bytes = out.stream.to_bytes();
    println!(
        "{} samples -> {} bytes, {:.3} bit/sample",
        signal.len(),
        bytes.len(),
        out.stream.bits_per_sample()
    );

    let decoded = decode(&EncodedStream::from_bytes(&bytes).unwrap()).unwrap();
    assert_eq!(decoded.signal.samples(), &out.reconstruction[..]);
    let tracked = decoded
        .frames
        .iter()
        .zip(&out.frames)
        .all(|(d, e)| d.entry_digest == e.entry_digest);
    println!("decoder matches encoder bit for bit, state digests agree: {tracked}");

    let report = segsnr(signal.samples(), decoded.signal.samples(), DEFAULT_SEGMENT_LEN, DEFAULT_CLAMP_DB).unwrap();
    println!("SEGSNR {:.2} dB (std {:.2}), MLP on {:.0}% of frames\n", report.segsnr_db, report.std_db, 100.0 * out.mlp_usage());

    println!("frame  pick  lpc trial err  mlp trial err");
    for f in out.frames.iter().take(20) {
        let pick = match f.selection {
            Selection::Lpc => "lpc",
            Selection::Mlp => "mlp",
        };
        let fmt = |v: Option<f64>| v.map_or("-".to_string(), |e| format!("{e:.3e}"));
        println!(
            "{:5}  {pick:4}  {:>13}  {:>13}",
            f.index,
            fmt(f.lpc_trial_error),
            fmt(f.mlp_trial_error)
        );
    }
}
