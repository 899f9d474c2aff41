//! SEGSNR of every predictor under backward and forward adaptation, on each
//! synthetic signal family.
//!
//! cargo run --release --example forward_vs_backward

use ahpc::codec::{encode, CodecConfig, Mode, PredictorKind};
use ahpc::signal::{segsnr, DEFAULT_CLAMP_DB, DEFAULT_SEGMENT_LEN};
use ahpc::synth::SynthKind;

pub fn main() {
    let nq = 4;
    println!("nq = {nq}, 1 s per signal; forward sends parameters unquantized");
    println!("{:10} {:>8} {:>8} {:>8} {:>8} {:>8} {:>8} {:>9} {:>9}", "signal", "b-lpc", "b-mlp", "b-hyb", "f-lpc", "f-mlp", "f-hyb", "b-rate", "f-rate");
    for kind in SynthKind::ALL {
        let signal = kind.signal(8000, 2);
        let mut line = format!("{:10}", kind.name());
        let mut rates = String::new();
        for mode in [Mode::Backward, Mode::Forward] {
            for p in [PredictorKind::Lpc, PredictorKind::Mlp, PredictorKind::Hybrid] {
                let out = encode(&signal, &CodecConfig::new(mode, p, nq)).unwrap();
                let s = segsnr(signal.samples(), &out.reconstruction, DEFAULT_SEGMENT_LEN, DEFAULT_CLAMP_DB).unwrap();
                line += &format!(" {:8.2}", s.segsnr_db);
                if p == PredictorKind::Hybrid {
                    rates += &format!(" {:9.2}", out.stream.bits_per_sample());
                }
            }
        }
        println!("{line}{rates}");
    }
}
