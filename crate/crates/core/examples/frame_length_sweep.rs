//! SEGSNR against frame length for each predictor. By default a quick
//! sweep over a few lengths of a 1 s signal; pass `full` for 10..=300 step
//! 10 on 3 s.
//!
//! cargo run --release --example frame_length_sweep [full]

use ahpc::codec::CodecConfig;
use ahpc::eval::{default_sweep_lengths, sweep_frame_len, write_sweep_csv};
use ahpc::synth::SynthKind;

pub fn main() {
    run(std::env::args().nth(1).is_some_and(|a| a == "full"));
}

pub fn run(full: bool) {
    let (samples, lengths) = if full {
        (24_000, default_sweep_lengths())
    } else {
        (8000, vec![20, 50, 100, 200, 300])
    };
    let signal = SynthKind::Voiced.signal(samples, 0);
    let rows = sweep_frame_len(&signal, &CodecConfig::default(), &lengths).unwrap();
    let mut csv = Vec::new();
    write_sweep_csv(&rows, &mut csv).unwrap();
    print!("{}", String::from_utf8(csv).unwrap());
}
