//! Fit an order-10 LPC model to one frame of a known AR(10) process and
//! compare it with the true coefficients.
//!
//! cargo run --example lpc_analysis

use ahpc::lpc::{analyze, autocorrelation, levinson_durbin, Window};
use ahpc::predictor::prediction_gain;
use ahpc::synth::{formant_ar10, SynthKind};

pub fn main() {
    let truth = formant_ar10(8000.0);
    let x = SynthKind::Ar.generate(4000, 3);
    let frame = &x[2000..3000];

    for window in [Window::Rectangular, Window::Hamming] {
        let model = analyze(frame, 10, window).expect("AR frame is well conditioned");
        println!("{} window", window.name());
        println!("  i   true a_i   fitted a_i   reflection k_i");
        for i in 0..10 {
            println!(
                "{:3} {:10.4} {:12.4} {:16.4}",
                i + 1,
                truth[i],
                model.coeffs()[i],
                model.reflection()[i]
            );
        }
        let gain = prediction_gain(&model, &x[1990..2000], frame);
        println!("  prediction gain {gain:.2} dB\n");
    }

    // Orders can be chosen after the fact: one autocorrelation, any order up to its length.
    let r = autocorrelation(frame, 25);
    for order in [1, 2, 4, 10, 25] {
        let m = levinson_durbin(&r, order).unwrap();
        println!(
            "order {order:2}: residual energy {:.4} of {:.4}",
            m.residual_energy(),
            r[0]
        );
    }
}
