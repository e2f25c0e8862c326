//! Subcommand implementations.

use std::path::PathBuf;

use dpolar::decode::{DecoderOptions, JointDecoder, SeparateDecoder};
use dpolar::polar::{ChannelCodeSpec, CodeSpecDoc, SourceCodeSpec};
use dpolar::simulate::{frame_seed, make_frame, DecoderKind};
use dpolar::trellis::CompoundTrellis;
use serde_json::json;

use crate::args::{Command, DecodeArgs, ExperimentArgs, SweepArgs, TrellisArgs};
use crate::experiment::{resolve, Resolved};
use crate::sweep::{run_sweep, SweepOptions};
use crate::CliError;

pub fn run(command: Command) -> Result<(), CliError> {
    match command {
        Command::Sweep(args) => sweep(&args),
        Command::Construct(args) => construct(&args),
        Command::Trellis(args) => trellis(&args),
        Command::Decode(args) => decode(&args),
    }
}

fn runtime(e: dpolar::Error) -> CliError {
    CliError::Runtime(e.to_string())
}

fn config(e: dpolar::Error) -> CliError {
    CliError::Config(e.to_string())
}

fn one_based(indices: &[usize]) -> String {
    let items: Vec<String> = indices.iter().map(|i| (i + 1).to_string()).collect();
    format!("{{{}}}", items.join(","))
}

fn sweep(args: &SweepArgs) -> Result<(), CliError> {
    let spec = args.experiment.to_spec()?;
    let resolved = resolve(&spec)?;
    let workers = args
        .workers
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()));
    let out_dir = args
        .out_dir
        .clone()
        .or_else(|| spec.out_dir.as_ref().map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("results"));
    if !args.quiet {
        println!("{} ({} workers)", resolved.summary(), workers);
    }
    let opts = SweepOptions { out_dir, workers, dump_trellis: args.dump_trellis, quiet: args.quiet };
    run_sweep(&resolved, &opts).map(|_| ())
}

/// Design Eb/N0 for one-off construction: the fixed design point if set,
/// otherwise the first grid value.
fn single_ebn0(resolved: &Resolved) -> Result<f64, CliError> {
    resolved
        .spec
        .design_ebn0_db
        .or_else(|| resolved.spec.ebn0_db.first().copied())
        .ok_or_else(|| CliError::Config("ebn0: give --ebn0 or --design-ebn0".into()))
}

fn channel_at(resolved: &Resolved, ebn0: f64) -> Result<ChannelCodeSpec, CliError> {
    resolved.sim_config(DecoderKind::Jscl, 1).channel_code(ebn0).map_err(config)
}

fn construct(args: &ExperimentArgs) -> Result<(), CliError> {
    let resolved = resolve(&args.to_spec()?)?;
    let ebn0 = single_ebn0(&resolved)?;
    let channel = channel_at(&resolved, ebn0)?;
    let doc = json!({
        "K": resolved.k,
        "N_s": resolved.spec.ns,
        "N_c": resolved.channel_len(),
        "R_s": resolved.source_rate(),
        "R_c": resolved.channel_rate(),
        "R": resolved.overall_rate(),
        "design_ebn0_db": ebn0,
        "source": CodeSpecDoc::from(resolved.source.clone()),
        "channel": CodeSpecDoc::from(channel),
    });
    println!("{}", serde_json::to_string_pretty(&doc).expect("construction serializes"));
    Ok(())
}

fn explicit_codes(args: &TrellisArgs) -> Result<(SourceCodeSpec, ChannelCodeSpec), CliError> {
    let exp = &args.experiment;
    if args.high_entropy.len() != args.info.len() {
        return Err(CliError::Config("h/a: sets must have the same size".into()));
    }
    let ns = exp.ns.ok_or_else(|| CliError::Config("ns: required with --h".into()))?;
    let nc = match (exp.nc, exp.rate) {
        (Some(nc), _) => nc,
        (None, Some(rate)) if rate > 0.0 => (ns as f64 / rate).round() as usize,
        _ => return Err(CliError::Config("nc: required with --a".into())),
    };
    if let Some(k) = exp.k {
        if k != args.high_entropy.len() {
            return Err(CliError::Config(format!("k: {} differs from the size of --h", k)));
        }
    }
    let log = |n: usize, key: &str| {
        if n.is_power_of_two() && n > 1 {
            Ok(n.trailing_zeros())
        } else {
            Err(CliError::Config(format!("{}: {} is not a power of two", key, n)))
        }
    };
    let zero_based = |set: &[usize], key: &str| {
        set.iter()
            .map(|&i| i.checked_sub(1).ok_or_else(|| CliError::Config(format!("{}: indices are 1-based", key))))
            .collect::<Result<Vec<usize>, CliError>>()
    };
    let source = SourceCodeSpec::new(log(ns, "ns")?, zero_based(&args.high_entropy, "h")?, exp.p.unwrap_or(0.07))
        .map_err(config)?;
    let channel = ChannelCodeSpec::new(log(nc, "nc")?, zero_based(&args.info, "a")?).map_err(config)?;
    Ok((source, channel))
}

fn trellis(args: &TrellisArgs) -> Result<(), CliError> {
    let (source, channel) = if args.high_entropy.is_empty() && args.info.is_empty() {
        let resolved = resolve(&args.experiment.to_spec()?)?;
        let ebn0 = single_ebn0(&resolved)?;
        let channel = channel_at(&resolved, ebn0)?;
        (resolved.source, channel)
    } else {
        explicit_codes(args)?
    };
    let trellis = CompoundTrellis::new(&source, &channel).map_err(config)?;
    println!("H={}", one_based(source.high_entropy()));
    println!("A={}", one_based(channel.info()));
    println!("J={}", one_based(trellis.jsc()));
    println!("W={}", one_based(trellis.low_entropy()));
    println!("N={}", trellis.len());
    if args.dump_trellis {
        println!("{}", serde_json::to_string_pretty(&trellis.dump()).expect("trellis serializes"));
    }
    Ok(())
}

fn decode(args: &DecodeArgs) -> Result<(), CliError> {
    let resolved = resolve(&args.experiment.to_spec()?)?;
    let spec = &resolved.spec;
    let ebn0 = *spec
        .ebn0_db
        .first()
        .ok_or_else(|| CliError::Config("ebn0: give the Eb/N0 of the frame".into()))?;
    let decoder = spec.decoders[0];
    let list_size = spec.list_sizes[0];
    let channel = channel_at(&resolved, ebn0)?;
    let trellis = CompoundTrellis::new(&resolved.source, &channel).map_err(runtime)?;
    if args.dump_trellis {
        println!("{}", serde_json::to_string(&trellis.dump()).expect("trellis serializes"));
    }
    let seed = args.frame_seed.unwrap_or_else(|| frame_seed(spec.seed, ebn0, args.frame));
    let frame = make_frame(&resolved.source, &channel, ebn0, seed).map_err(runtime)?;
    let mut options = DecoderOptions::new(list_size);
    options.check_node = spec.check_node;

    let (s_hat, metric) = match decoder {
        DecoderKind::Jscl => {
            let mut dec = JointDecoder::new(&trellis, &resolved.source, options).map_err(runtime)?;
            let out = if args.trace {
                let (out, trace) = dec.decode_traced(&frame.llrs).map_err(runtime)?;
                for record in &trace {
                    println!("{}", serde_json::to_string(record).expect("trace serializes"));
                }
                out
            } else {
                dec.decode(&frame.llrs).map_err(runtime)?
            };
            (out.s_hat, Some(out.metric))
        }
        DecoderKind::SepScl => {
            if args.trace {
                return Err(CliError::Config("trace: only available for the jscl decoder".into()));
            }
            let mut dec = SeparateDecoder::new(&resolved.source, &channel, options).map_err(runtime)?;
            (dec.decode(&frame.llrs).map_err(runtime)?, None)
        }
    };
    let summary = json!({
        "ebn0_db": ebn0,
        "frame_seed": format!("{:#018x}", seed),
        "decoder": decoder,
        "list_size": list_size,
        "s": frame.source.to_string(),
        "s_hat": s_hat.to_string(),
        "bit_errors": s_hat.hamming_distance(&frame.source),
        "metric": metric,
    });
    println!("{}", summary);
    Ok(())
}
