//! Adaptive ADPCM speech coding with a switched linear/nonlinear predictor.
//!
//! Every frame (100 samples by default) the coder picks between an order-10
//! autocorrelation-method LPC predictor and a 10x2x1 perceptron trained with
//! Levenberg-Marquardt, signaling the choice with one bit. Predictor
//! coefficients adapt backward (from the previous decoded frame, nothing
//! transmitted) or forward (fit on the input frame and sent unquantized).
//! The residual goes through a 2 to 5 bit adaptive mid-rise quantizer whose
//! step follows per-level multipliers.
//!
//! ```no_run
//! use ahpc::codec::{decode, encode, CodecConfig, Mode, PredictorKind};
//! use ahpc::synth::SynthKind;
//!
//! let signal = SynthKind::Voiced.signal(8000, 1);
//! let cfg = CodecConfig::new(Mode::Backward, PredictorKind::Hybrid, 4);
//! let out = encode(&signal, &cfg).unwrap();
//! let bytes = out.stream.to_bytes();
//! let decoded = decode(&ahpc::codec::EncodedStream::from_bytes(&bytes).unwrap()).unwrap();
//! assert_eq!(decoded.signal.samples(), &out.reconstruction[..]);
//! ```

pub mod bits;
pub mod codec;
pub mod config;
pub mod error;
pub mod eval;
pub mod lpc;
pub mod mlp;
pub mod predictor;
pub mod quant;
pub mod signal;
pub mod synth;

pub use codec::{decode, encode, CodecConfig, EncodedStream, Mode, PredictorKind};
pub use config::Tunables;
pub use error::{Error, Result};
pub use signal::SignalBuffer;
