//! Command-line definitions.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use dpolar::simulate::DecoderKind;
use serde_json::{json, Map, Value};

use crate::experiment::{parse_grid, ExperimentSpec};
use crate::CliError;

#[derive(Debug, Parser)]
#[command(name = "dpolar", version, about = "D-Polar joint source-channel coding: construction, decoding and BER sweeps")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Simulate BER/FER curves over an Eb/N0 grid.
    Sweep(SweepArgs),
    /// Print the constructed source and channel codes as JSON.
    Construct(ExperimentArgs),
    /// Print the JSC and low-entropy level sets of the compound trellis.
    Trellis(TrellisArgs),
    /// Decode a single frame, optionally with a per-level trace.
    Decode(DecodeArgs),
}

/// Experiment parameters. Flags override the values of `--config`.
#[derive(Debug, Clone, Default, Args)]
pub struct ExperimentArgs {
    /// JSON experiment file, or a results sidecar to re-run.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub name: Option<String>,
    /// Source block length N_s.
    #[arg(long)]
    pub ns: Option<usize>,
    /// Number of high-entropy bits K (alternative to --rs).
    #[arg(long)]
    pub k: Option<usize>,
    /// Compression rate R_s = K/N_s.
    #[arg(long)]
    pub rs: Option<f64>,
    /// Channel block length N_c (alternative to --rate).
    #[arg(long)]
    pub nc: Option<usize>,
    /// Overall rate R = N_s/N_c.
    #[arg(long)]
    pub rate: Option<f64>,
    /// Source probability P(1).
    #[arg(long)]
    pub p: Option<f64>,
    #[arg(long, value_delimiter = ',')]
    pub list_sizes: Vec<usize>,
    /// jscl and/or sep-scl.
    #[arg(long, value_delimiter = ',')]
    pub decoder: Vec<DecoderKind>,
    /// Eb/N0 grid in dB: `a,b,c` or `start:step:stop`.
    #[arg(long, allow_hyphen_values = true)]
    pub ebn0: Option<String>,
    #[arg(long, env = "DPOLAR_SEED")]
    pub seed: Option<u64>,
    #[arg(long)]
    pub max_frames: Option<u64>,
    #[arg(long)]
    pub target_errors: Option<u64>,
    /// Design the channel code once at this Eb/N0 instead of per point.
    #[arg(long, allow_hyphen_values = true)]
    pub design_ebn0: Option<f64>,
    /// Use the min-sum check-node rule.
    #[arg(long)]
    pub min_sum: bool,
}

#[derive(Debug, Clone, Args)]
pub struct SweepArgs {
    #[command(flatten)]
    pub experiment: ExperimentArgs,
    /// Worker threads; defaults to the available parallelism.
    #[arg(long)]
    pub workers: Option<usize>,
    #[arg(long)]
    pub out_dir: Option<PathBuf>,
    /// Also write the compound trellis of every grid point.
    #[arg(long)]
    pub dump_trellis: bool,
    #[arg(long)]
    pub quiet: bool,
}

#[derive(Debug, Clone, Args)]
pub struct TrellisArgs {
    #[command(flatten)]
    pub experiment: ExperimentArgs,
    /// Explicit high-entropy set, 1-based.
    #[arg(long = "h", value_delimiter = ',')]
    pub high_entropy: Vec<usize>,
    /// Explicit information set, 1-based.
    #[arg(long = "a", value_delimiter = ',')]
    pub info: Vec<usize>,
    /// Print every level as JSON.
    #[arg(long)]
    pub dump_trellis: bool,
}

#[derive(Debug, Clone, Args)]
pub struct DecodeArgs {
    #[command(flatten)]
    pub experiment: ExperimentArgs,
    /// Frame index within the Eb/N0 point.
    #[arg(long, default_value_t = 0)]
    pub frame: u64,
    /// Replay a frame by its seed (decimal or 0x-prefixed hex).
    #[arg(long, value_parser = parse_seed)]
    pub frame_seed: Option<u64>,
    /// Emit one JSON record per level before the result.
    #[arg(long)]
    pub trace: bool,
    #[arg(long)]
    pub dump_trellis: bool,
}

fn parse_seed(text: &str) -> Result<u64, String> {
    match text.strip_prefix("0x") {
        Some(hex) => u64::from_str_radix(hex, 16),
        None => text.parse(),
    }
    .map_err(|e| e.to_string())
}

impl ExperimentArgs {
    /// Merges the config file (if any) with the flags.
    pub fn to_spec(&self) -> Result<ExperimentSpec, CliError> {
        let mut value = match &self.config {
            Some(path) => ExperimentSpec::load_value(path)?,
            None => Value::Object(Map::new()),
        };
        let obj = value
            .as_object_mut()
            .ok_or_else(|| CliError::Config("config: expected a JSON object".into()))?;
        let mut set = |key: &str, v: Value, excludes: Option<&str>| {
            obj.insert(key.into(), v);
            if let Some(other) = excludes {
                obj.remove(other);
            }
        };
        if let Some(v) = &self.name {
            set("name", json!(v), None);
        }
        if let Some(v) = self.ns {
            set("ns", json!(v), None);
        }
        if let Some(v) = self.k {
            set("k", json!(v), Some("rs"));
        }
        if let Some(v) = self.rs {
            set("rs", json!(v), Some("k"));
        }
        if let Some(v) = self.nc {
            set("nc", json!(v), Some("rate"));
        }
        if let Some(v) = self.rate {
            set("rate", json!(v), Some("nc"));
        }
        if let Some(v) = self.p {
            set("p", json!(v), None);
        }
        if !self.list_sizes.is_empty() {
            set("list_sizes", json!(self.list_sizes), None);
        }
        if !self.decoder.is_empty() {
            set("decoders", json!(self.decoder), None);
        }
        if let Some(v) = &self.ebn0 {
            set("ebn0_db", json!(parse_grid(v)?), None);
        }
        if let Some(v) = self.seed {
            set("seed", json!(v), None);
        }
        if let Some(v) = self.max_frames {
            set("max_frames", json!(v), None);
        }
        if let Some(v) = self.target_errors {
            set("target_frame_errors", json!(v), None);
        }
        if let Some(v) = self.design_ebn0 {
            set("design_ebn0_db", json!(v), None);
        }
        if self.min_sum {
            set("check_node", json!("min-sum"), None);
        }
        ExperimentSpec::from_value(value)
    }
}
