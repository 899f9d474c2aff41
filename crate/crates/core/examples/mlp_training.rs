//! Train the 10x2x1 perceptron with Levenberg-Marquardt on one frame of a
//! saturated AR signal, then let the multistart pick among five seeds.
//!
//! cargo run --example mlp_training

use ahpc::lpc::{analyze, Window};
use ahpc::mlp::{lm_train_report, multistart_candidates, random_model, start_rng, TrainConfig, TrainSet};
use ahpc::predictor::prediction_gain;
use ahpc::synth::SynthKind;

pub fn main() {
    let x = SynthKind::SaturatedAr.generate(2000, 5);
    let (prefix, frame) = (&x[990..1000], &x[1000..1100]);
    let cfg = TrainConfig {
        epochs: 20,
        ..TrainConfig::default()
    };

    let data = TrainSet::from_frame(prefix, frame);
    let init = random_model(&mut start_rng(cfg.seed, 0, 0), cfg.init_scale);
    let report = lm_train_report(&init, &data, &cfg).unwrap();
    println!("single start, {} epochs", cfg.epochs);
    println!("  initial mse {:.3e}", report.initial_mse);
    for (i, mse) in report.accepted_mse.iter().enumerate() {
        println!("  accepted step {:2}: mse {mse:.3e}", i + 1);
    }

    let cfg = TrainConfig::default();
    println!("\nmultistart, {} starts x {} epochs", cfg.n_starts, cfg.epochs);
    for c in multistart_candidates(prefix, frame, &cfg, 0).into_iter().flatten() {
        println!("  start {}: open-loop gain {:.2} dB", c.start, c.gain_db);
    }

    let lpc = analyze(frame, 10, Window::Rectangular).unwrap();
    println!("  lpc-10 on the same frame: {:.2} dB", prediction_gain(&lpc, prefix, frame));
}
