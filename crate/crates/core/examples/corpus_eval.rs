//! Evaluate a small synthetic corpus over a configuration grid and print the
//! CSV that `ahpc eval` would write.
//!
//! cargo run --release --example corpus_eval

use ahpc::codec::{CodecConfig, Mode, PredictorKind};
use ahpc::eval::{evaluate_signals, write_eval_csv, EvalGrid};
use ahpc::synth::corpus;

pub fn main() {
    let signals: Vec<_> = corpus(4, 1.0, false, 0)
        .into_iter()
        .map(|s| (s.label, s.signal))
        .collect();
    let grid = EvalGrid {
        base: CodecConfig::default(),
        modes: vec![Mode::Backward],
        predictors: vec![PredictorKind::Lpc, PredictorKind::Mlp, PredictorKind::Hybrid],
        nqs: vec![2, 4],
        frame_lens: vec![100],
    };
    let rows = evaluate_signals(&signals, &grid);
    let mut csv = Vec::new();
    write_eval_csv(&rows, &mut csv).unwrap();
    print!("{}", String::from_utf8(csv).unwrap());
}
