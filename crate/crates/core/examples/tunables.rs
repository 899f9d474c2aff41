//! Load codec tunables from TOML, change a quantizer table, and show that a
//! decoder with different tunables refuses the stream.
//!
//! cargo run --example tunables

use ahpc::codec::{decode_with, encode, CodecConfig, Mode, PredictorKind};
use ahpc::synth::SynthKind;
use ahpc::Tunables;

pub fn main() {
    let shipped = Tunables::from_toml_str(include_str!("../tunables.toml")).unwrap();
    println!("shipped tunables digest {:016x}", shipped.digest());

    let mut faster = shipped.clone();
    faster.quant.multipliers_4 = vec![0.8, 0.8, 0.8, 0.8, 1.4, 1.8, 2.2, 2.6];
    println!("modified tunables digest {:016x}", faster.digest());

    let signal = SynthKind::Ar.signal(4000, 0);
    let cfg = CodecConfig {
        tunables: faster.clone(),
        ..CodecConfig::new(Mode::Backward, PredictorKind::Lpc, 4)
    };
    let out = encode(&signal, &cfg).unwrap();

    match decode_with(&out.stream, &shipped) {
        Ok(_) => println!("unexpected: decoded with mismatched tunables"),
        Err(e) => println!("decode with shipped tunables: {} ({})", e, e.code()),
    }
    let ok = decode_with(&out.stream, &faster).unwrap();
    println!("decode with matching tunables: {} samples", ok.signal.len());
}
