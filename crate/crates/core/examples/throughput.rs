//! Decoder throughput at a given configuration.
//!
//! `cargo run --release -p dpolar --example throughput -- [ns] [nc] [k] [L] [frames]`

use std::time::Instant;

use dpolar::decode::DecoderOptions;
use dpolar::polar::{construct_channel_code, construct_source_code, esn0_from_ebn0};
use dpolar::simulate::{make_frame, DecoderKind, FrameDecoder};
use dpolar::trellis::CompoundTrellis;

fn main() -> dpolar::Result<()> {
    let args: Vec<usize> = std::env::args().skip(1).map(|a| a.parse().expect("integer argument")).collect();
    let arg = |i: usize, d: usize| args.get(i).copied().unwrap_or(d);
    let (ns, nc, k, list, frames) = (arg(0, 512), arg(1, 1024), arg(2, 307), arg(3, 32), arg(4, 50));
    let ebn0 = 2.0;
    let source = construct_source_code(ns.trailing_zeros(), k, 0.07)?;
    let rate = ns as f64 / nc as f64;
    let channel = construct_channel_code(nc.trailing_zeros(), k, esn0_from_ebn0(ebn0, rate))?;
    let trellis = CompoundTrellis::new(&source, &channel)?;
    for kind in [DecoderKind::Jscl, DecoderKind::SepScl] {
        let mut dec = FrameDecoder::new(kind, &source, &channel, &trellis, DecoderOptions::new(list))?;
        let mut errors = 0;
        let start = Instant::now();
        for i in 0..frames as u64 {
            let frame = make_frame(&source, &channel, ebn0, i)?;
            errors += usize::from(dec.decode(&frame.llrs)? != frame.source);
        }
        let secs = start.elapsed().as_secs_f64();
        println!("{kind}: {:.3} ms/frame, {errors}/{frames} frame errors", 1e3 * secs / frames as f64);
    }
    Ok(())
}
