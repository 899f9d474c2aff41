//! Trace the adaptive quantizer's step size as the residual level jumps.
//!
//! cargo run --example adaptive_quantizer

use ahpc::quant::{adapt, dequantize, quantize, QuantParams, QuantState};

pub fn main() {
    let params = QuantParams::default();
    for nq in [2u8, 4] {
        let mut q = QuantState::new(nq, &params).unwrap();
        println!("nq = {nq}, multipliers {:?}", q.multipliers());
        println!("   t        e     code       ê        step");
        for t in 0..40 {
            // Quiet, then a burst 20 dB louder, then quiet again.
            let level = if (12..24).contains(&t) { 0.3 } else { 0.03 };
            let e = level * (0.7 * t as f64).sin();
            let code = quantize(e, &q);
            let e_hat = dequantize(code, &q);
            println!(
                "{t:4} {e:8.4} {:>4}{:<3} {e_hat:8.4} {:11.6}",
                if code.negative { "-" } else { "+" },
                code.magnitude,
                q.step()
            );
            q = adapt(&q, code);
        }
        println!();
    }
}
