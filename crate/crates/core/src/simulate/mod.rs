//! Monte Carlo BER/FER estimation over BPSK-AWGN.
//!
//! Every frame draws its source word and noise from a seed derived from
//! `(base_seed, Eb/N0, frame index)`, so the statistics of a point are a
//! function of the configuration alone. Frames are decoded in batches on a
//! worker pool and then folded in index order; the stopping rule is applied
//! during that fold, which makes the result independent of the worker count.

mod channel;

pub use channel::{
    bpsk, channel_pass, generate_source, generate_source_for, noise_variance, noiseless_llrs,
};

use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bits::BitBlock;
use crate::decode::{DecoderOptions, JointDecoder, SeparateDecoder};
use crate::error::{invalid, Error, Result};
use crate::polar::{
    construct_channel_code, dpolar_encode, esn0_from_ebn0, ChannelCodeSpec, SourceCodeSpec,
};
use crate::trellis::CompoundTrellis;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DecoderKind {
    Jscl,
    #[serde(alias = "sep_scl")]
    SepScl,
}

impl fmt::Display for DecoderKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            DecoderKind::Jscl => "jscl",
            DecoderKind::SepScl => "sep-scl",
        })
    }
}

impl FromStr for DecoderKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().replace('_', "-").as_str() {
            "jscl" | "j-scl" => Ok(DecoderKind::Jscl),
            "sep-scl" | "sepscl" | "sep" => Ok(DecoderKind::SepScl),
            other => invalid(format!("unknown decoder '{}' (expected jscl or sep-scl)", other)),
        }
    }
}

/// How the channel code is obtained for a given Eb/N0 point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ChannelDesign {
    /// Gaussian-approximation construction at the simulated Eb/N0.
    PerPoint,
    /// Gaussian-approximation construction at one fixed Eb/N0 (dB).
    FixedEbn0(f64),
    /// A given code, used at every point.
    Explicit(ChannelCodeSpec),
}

/// Everything needed to simulate one curve.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    pub source: SourceCodeSpec,
    pub channel_log_len: u32,
    pub design: ChannelDesign,
    pub decoder: DecoderKind,
    pub options: DecoderOptions,
    pub max_frames: u64,
    pub target_frame_errors: u64,
    pub base_seed: u64,
}

impl SimConfig {
    pub fn new(
        source: SourceCodeSpec,
        channel_log_len: u32,
        decoder: DecoderKind,
        list_size: usize,
    ) -> Self {
        Self {
            source,
            channel_log_len,
            design: ChannelDesign::PerPoint,
            decoder,
            options: DecoderOptions::new(list_size),
            max_frames: 100_000_000,
            target_frame_errors: 100,
            base_seed: 0,
        }
    }

    pub fn channel_len(&self) -> usize {
        1 << self.channel_log_len
    }

    /// Overall rate `R = R_c / R_s = N_s / N_c`.
    pub fn rate(&self) -> f64 {
        self.source.len() as f64 / self.channel_len() as f64
    }

    pub fn channel_rate(&self) -> f64 {
        self.source.k() as f64 / self.channel_len() as f64
    }

    /// Channel code used at `ebn0_db`.
    pub fn channel_code(&self, ebn0_db: f64) -> Result<ChannelCodeSpec> {
        let k = self.source.k();
        let code = match &self.design {
            ChannelDesign::PerPoint => {
                construct_channel_code(self.channel_log_len, k, esn0_from_ebn0(ebn0_db, self.rate()))?
            }
            ChannelDesign::FixedEbn0(db) => {
                construct_channel_code(self.channel_log_len, k, esn0_from_ebn0(*db, self.rate()))?
            }
            ChannelDesign::Explicit(code) => code.clone(),
        };
        if code.log_len() != self.channel_log_len || code.k() != k {
            return invalid("explicit channel code does not match N_c and K");
        }
        Ok(code)
    }

    fn validate(&self) -> Result<()> {
        if self.target_frame_errors == 0 || self.max_frames == 0 {
            return invalid("max_frames and target_frame_errors must be positive");
        }
        if self.source.k() > self.channel_len() {
            return invalid(format!(
                "K = {} does not fit a channel code of length {}",
                self.source.k(),
                self.channel_len()
            ));
        }
        Ok(())
    }
}

/// Aggregated statistics for one Eb/N0 point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BerPoint {
    pub ebn0_db: f64,
    pub frames: u64,
    pub bit_errors: u64,
    pub frame_errors: u64,
    pub ber: f64,
    pub fer: f64,
    /// Set when the frame cap was hit before the target error count.
    pub low_confidence: bool,
    pub seconds: f64,
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed of frame `index` at `ebn0_db`.
pub fn frame_seed(base_seed: u64, ebn0_db: f64, index: u64) -> u64 {
    splitmix64(base_seed ^ splitmix64(ebn0_db.to_bits() ^ splitmix64(index)))
}

/// Source and noise seeds derived from a frame seed.
pub fn frame_streams(seed: u64) -> (u64, u64) {
    (splitmix64(seed ^ 0x5EED_0001), splitmix64(seed ^ 0x5EED_0002))
}

/// A decoder of either kind, owned by one worker.
pub enum FrameDecoder {
    Joint(JointDecoder),
    Separate(SeparateDecoder),
}

impl FrameDecoder {
    pub fn new(
        kind: DecoderKind,
        source: &SourceCodeSpec,
        channel: &ChannelCodeSpec,
        trellis: &CompoundTrellis,
        options: DecoderOptions,
    ) -> Result<Self> {
        Ok(match kind {
            DecoderKind::Jscl => FrameDecoder::Joint(JointDecoder::new(trellis, source, options)?),
            DecoderKind::SepScl => {
                FrameDecoder::Separate(SeparateDecoder::new(source, channel, options)?)
            }
        })
    }

    pub fn decode(&mut self, llrs: &[f64]) -> Result<BitBlock> {
        match self {
            FrameDecoder::Joint(d) => Ok(d.decode(llrs)?.s_hat),
            FrameDecoder::Separate(d) => d.decode(llrs),
        }
    }
}

/// One transmitted frame: source word and channel LLRs.
pub struct Frame {
    pub source: BitBlock,
    pub llrs: Vec<f64>,
}

/// Generates the frame with seed `seed`.
pub fn make_frame(
    source: &SourceCodeSpec,
    channel: &ChannelCodeSpec,
    ebn0_db: f64,
    seed: u64,
) -> Result<Frame> {
    let (source_seed, noise_seed) = frame_streams(seed);
    let s = generate_source_for(source, source_seed)?;
    let x = dpolar_encode(&s, source, channel)?;
    let rate = source.len() as f64 / channel.len() as f64;
    let llrs = channel_pass(&x, ebn0_db, rate, noise_seed)?;
    Ok(Frame { source: s, llrs })
}

fn frame_bit_errors(
    decoder: &mut FrameDecoder,
    source: &SourceCodeSpec,
    channel: &ChannelCodeSpec,
    ebn0_db: f64,
    seed: u64,
) -> Result<u64> {
    let frame = make_frame(source, channel, ebn0_db, seed)?;
    let s_hat = decoder.decode(&frame.llrs).map_err(|e| Error::Frame {
        seed,
        message: e.to_string(),
    })?;
    Ok(s_hat.hamming_distance(&frame.source) as u64)
}

/// Simulates one Eb/N0 point on `workers` threads.
pub fn run_point(config: &SimConfig, ebn0_db: f64, workers: usize) -> Result<BerPoint> {
    config.validate()?;
    let channel = config.channel_code(ebn0_db)?;
    let trellis = CompoundTrellis::new(&config.source, &channel)?;
    // construction errors surface here rather than inside the pool
    FrameDecoder::new(config.decoder, &config.source, &channel, &trellis, config.options)?;

    let workers = workers.max(1);
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::InvalidArgument(format!("cannot start worker pool: {}", e)))?;
    let batch = (workers as u64 * 8).max(8);
    let started = Instant::now();
    let (mut frames, mut bit_errors, mut frame_errors) = (0u64, 0u64, 0u64);

    'outer: while frames < config.max_frames && frame_errors < config.target_frame_errors {
        let first = frames;
        let count = batch.min(config.max_frames - first);
        let results: Vec<Result<u64>> = pool.install(|| {
            (first..first + count)
                .into_par_iter()
                .map_init(
                    || {
                        FrameDecoder::new(
                            config.decoder,
                            &config.source,
                            &channel,
                            &trellis,
                            config.options,
                        )
                        .expect("decoder construction was checked above")
                    },
                    |decoder, index| {
                        let seed = frame_seed(config.base_seed, ebn0_db, index);
                        frame_bit_errors(decoder, &config.source, &channel, ebn0_db, seed)
                    },
                )
                .collect()
        });
        for r in results {
            let errors = r?;
            frames += 1;
            bit_errors += errors;
            if errors > 0 {
                frame_errors += 1;
            }
            if frame_errors >= config.target_frame_errors {
                break 'outer;
            }
        }
    }

    let bits = frames as f64 * config.source.len() as f64;
    Ok(BerPoint {
        ebn0_db,
        frames,
        bit_errors,
        frame_errors,
        ber: bit_errors as f64 / bits,
        fer: frame_errors as f64 / frames as f64,
        low_confidence: frame_errors < config.target_frame_errors,
        seconds: started.elapsed().as_secs_f64(),
    })
}
