//! Double-polar (D-Polar) joint source-channel coding.
//!
//! A Bernoulli source word `s` is compressed by a source polar code to its
//! high-entropy bits `c_H`, which are then carried on the information set of
//! a channel polar code. The receiver merges both decoding trellises into a
//! compound trellis and runs a joint successive-cancellation list decoder
//! whose path metric adds channel and source penalties.
//!
//! - [`polar`]: transform, code specs, Gaussian-approximation construction, encoder.
//! - [`trellis`]: compound trellis (JSC, low-entropy and frozen levels).
//! - [`decode`]: f/g kernels, path metrics, J-SCL, channel SCL, separate SCL.
//! - [`simulate`]: Bernoulli source, BPSK-AWGN channel, Monte Carlo BER engine.

pub mod bits;
pub mod decode;
pub mod error;
pub mod polar;
pub mod simulate;
pub mod trellis;

pub use bits::BitBlock;
pub use error::{Error, Result};
