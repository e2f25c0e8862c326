//! Experiment documents and their resolution into concrete codes.

use std::path::Path;

use dpolar::decode::CheckNode;
use dpolar::polar::{construct_source_code, SourceCodeSpec};
use dpolar::simulate::{ChannelDesign, DecoderKind, SimConfig};
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::CliError;

fn default_name() -> String {
    "sweep".into()
}

fn default_list_sizes() -> Vec<usize> {
    vec![32]
}

fn default_decoders() -> Vec<DecoderKind> {
    vec![DecoderKind::Jscl]
}

fn default_max_frames() -> u64 {
    100_000_000
}

fn default_target() -> u64 {
    100
}

/// A named simulation scenario, as read from a JSON config file.
///
/// Exactly one of `k`/`rs` and one of `nc`/`rate` must be given.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentSpec {
    #[serde(default = "default_name")]
    pub name: String,
    pub ns: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rs: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub nc: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rate: Option<f64>,
    pub p: f64,
    #[serde(default = "default_list_sizes")]
    pub list_sizes: Vec<usize>,
    #[serde(default = "default_decoders")]
    pub decoders: Vec<DecoderKind>,
    #[serde(default)]
    pub ebn0_db: Vec<f64>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_max_frames")]
    pub max_frames: u64,
    #[serde(default = "default_target")]
    pub target_frame_errors: u64,
    /// Fixed design Eb/N0 for the channel code; absent means per point.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub design_ebn0_db: Option<f64>,
    #[serde(default)]
    pub check_node: CheckNode,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out_dir: Option<String>,
}

impl ExperimentSpec {
    /// Builds a spec from a JSON value, reporting missing or unknown keys.
    pub fn from_value(value: Value) -> Result<Self, CliError> {
        serde_json::from_value(value).map_err(|e| CliError::Config(format!("experiment: {}", e)))
    }

    /// Reads a config file. A results sidecar is accepted too, in which
    /// case its recorded experiment is returned.
    pub fn load_value(path: &Path) -> Result<Value, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {}", path.display(), e)))?;
        let mut value: Value = serde_json::from_str(&text)
            .map_err(|e| CliError::Config(format!("{}: {}", path.display(), e)))?;
        if let Some(inner) = value.get_mut("experiment") {
            return Ok(inner.take());
        }
        Ok(value)
    }

    /// The spec with the fields that do not change any single point's
    /// result cleared: grid, decoders, list sizes, name and output path.
    pub fn identity(&self) -> Self {
        Self {
            name: String::new(),
            list_sizes: Vec::new(),
            decoders: Vec::new(),
            ebn0_db: Vec::new(),
            out_dir: None,
            ..self.clone()
        }
    }

    /// Union of two runs of the same experiment, so that the recorded
    /// spec covers every point either of them produced.
    pub fn merged_with(&self, other: &ExperimentSpec) -> Self {
        let mut out = self.clone();
        for &l in &other.list_sizes {
            if !out.list_sizes.contains(&l) {
                out.list_sizes.push(l);
            }
        }
        for &d in &other.decoders {
            if !out.decoders.contains(&d) {
                out.decoders.push(d);
            }
        }
        for &e in &other.ebn0_db {
            if !out.ebn0_db.iter().any(|x| x.to_bits() == e.to_bits()) {
                out.ebn0_db.push(e);
            }
        }
        out.ebn0_db.sort_by(f64::total_cmp);
        out.out_dir = None;
        out
    }
}

/// Code parameters after rate resolution.
#[derive(Debug, Clone, PartialEq)]
pub struct Resolved {
    pub spec: ExperimentSpec,
    pub source: SourceCodeSpec,
    pub k: usize,
    pub channel_log_len: u32,
}

fn power_of_two_log(value: f64, key: &str) -> Result<u32, CliError> {
    let rounded = value.round();
    if (value - rounded).abs() > 1e-9 || rounded < 2.0 || !(rounded as u64).is_power_of_two() {
        return Err(CliError::Config(format!("{}: length {} is not a power of two", key, value)));
    }
    Ok((rounded as u64).trailing_zeros())
}

/// Resolves rates into K, N_c and the constructed source code.
pub fn resolve(spec: &ExperimentSpec) -> Result<Resolved, CliError> {
    let ns_log = power_of_two_log(spec.ns as f64, "ns")?;
    if !(spec.p > 0.0 && spec.p < 0.5) {
        return Err(CliError::Config(format!("p: {} is outside (0, 0.5)", spec.p)));
    }
    let k = match (spec.k, spec.rs) {
        (Some(k), None) => k,
        (None, Some(rs)) if rs > 0.0 && rs <= 1.0 => (spec.ns as f64 * rs).round() as usize,
        (None, Some(rs)) => return Err(CliError::Config(format!("rs: {} is outside (0, 1]", rs))),
        _ => return Err(CliError::Config("k/rs: give exactly one of them".into())),
    };
    if k == 0 || k > spec.ns {
        return Err(CliError::Config(format!("k: {} must lie in 1..={}", k, spec.ns)));
    }
    let channel_log_len = match (spec.nc, spec.rate) {
        (Some(nc), None) => power_of_two_log(nc as f64, "nc")?,
        (None, Some(rate)) if rate > 0.0 => power_of_two_log(spec.ns as f64 / rate, "rate")?,
        (None, Some(rate)) => return Err(CliError::Config(format!("rate: {} must be positive", rate))),
        _ => return Err(CliError::Config("nc/rate: give exactly one of them".into())),
    };
    if k > 1 << channel_log_len {
        return Err(CliError::Config(format!(
            "k: {} does not fit a channel code of length {}",
            k,
            1u64 << channel_log_len
        )));
    }
    if spec.list_sizes.is_empty() || spec.list_sizes.contains(&0) {
        return Err(CliError::Config("list_sizes: need at least one positive list size".into()));
    }
    if spec.decoders.is_empty() {
        return Err(CliError::Config("decoders: need at least one decoder".into()));
    }
    if spec.max_frames == 0 || spec.target_frame_errors == 0 {
        return Err(CliError::Config("max_frames/target_frame_errors: must be positive".into()));
    }
    if spec.ebn0_db.iter().any(|e| !e.is_finite()) {
        return Err(CliError::Config("ebn0_db: grid values must be finite".into()));
    }
    let source = construct_source_code(ns_log, k, spec.p)
        .map_err(|e| CliError::Config(format!("source code: {}", e)))?;
    Ok(Resolved { spec: spec.clone(), source, k, channel_log_len })
}

impl Resolved {
    pub fn channel_len(&self) -> usize {
        1 << self.channel_log_len
    }

    pub fn source_rate(&self) -> f64 {
        self.k as f64 / self.spec.ns as f64
    }

    pub fn channel_rate(&self) -> f64 {
        self.k as f64 / self.channel_len() as f64
    }

    pub fn overall_rate(&self) -> f64 {
        self.spec.ns as f64 / self.channel_len() as f64
    }

    pub fn summary(&self) -> String {
        format!(
            "N_s={} K={} N_c={} R_s={:.4} R_c={:.4} R={:.4} p={}",
            self.spec.ns,
            self.k,
            self.channel_len(),
            self.source_rate(),
            self.channel_rate(),
            self.overall_rate(),
            self.spec.p
        )
    }

    pub fn sim_config(&self, decoder: DecoderKind, list_size: usize) -> SimConfig {
        let mut cfg = SimConfig::new(self.source.clone(), self.channel_log_len, decoder, list_size);
        cfg.options.check_node = self.spec.check_node;
        cfg.max_frames = self.spec.max_frames;
        cfg.target_frame_errors = self.spec.target_frame_errors;
        cfg.base_seed = self.spec.seed;
        if let Some(db) = self.spec.design_ebn0_db {
            cfg.design = ChannelDesign::FixedEbn0(db);
        }
        cfg
    }
}

/// Parses a grid given as `a,b,c` or `start:step:stop` (inclusive).
pub fn parse_grid(text: &str) -> Result<Vec<f64>, CliError> {
    let bad = || CliError::Config(format!("ebn0: cannot parse grid '{}'", text));
    let parts: Vec<&str> = text.split(':').collect();
    match parts.as_slice() {
        [start, step, stop] => {
            let (start, step, stop): (f64, f64, f64) = (
                start.trim().parse().map_err(|_| bad())?,
                step.trim().parse().map_err(|_| bad())?,
                stop.trim().parse().map_err(|_| bad())?,
            );
            if !(step > 0.0) || stop < start {
                return Err(bad());
            }
            let count = ((stop - start) / step + 1e-9).floor() as usize + 1;
            // snap to 1e-9 so 0.1-style steps do not accumulate drift
            Ok((0..count).map(|i| ((start + i as f64 * step) * 1e9).round() / 1e9).collect())
        }
        [_] => text.split(',').map(|t| t.trim().parse().map_err(|_| bad())).collect(),
        _ => Err(bad()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    fn spec(v: Value) -> ExperimentSpec {
        ExperimentSpec::from_value(v).unwrap()
    }

    #[test]
    fn standard_setups() {
        let r = resolve(&spec(json!({"ns": 512, "rs": 0.6, "rate": 0.5, "p": 0.07}))).unwrap();
        assert_eq!((r.k, r.channel_len()), (307, 1024));
        assert!((r.channel_rate() - 0.2998).abs() < 1e-4);
        let r = resolve(&spec(json!({"ns": 1024, "rs": 0.5, "rate": 1.0, "p": 0.07}))).unwrap();
        assert_eq!((r.k, r.channel_len()), (512, 1024));
        let r = resolve(&spec(json!({"ns": 512, "rs": 0.5, "rate": 0.5, "p": 0.04}))).unwrap();
        assert_eq!((r.k, r.channel_len()), (256, 1024));
        assert_eq!(r.overall_rate(), 0.5);
    }

    #[test]
    fn config_errors_name_the_key() {
        let err = |v: Value| match resolve(&spec(v)) {
            Err(CliError::Config(m)) => m,
            other => panic!("{:?}", other),
        };
        assert!(err(json!({"ns": 512, "rs": 0.6, "rate": 0.3, "p": 0.07})).starts_with("rate"));
        assert!(err(json!({"ns": 500, "rs": 0.6, "rate": 0.5, "p": 0.07})).starts_with("ns"));
        assert!(err(json!({"ns": 512, "rs": 0.6, "rate": 0.5, "p": 0.5})).starts_with("p"));
        assert!(err(json!({"ns": 512, "k": 3, "rs": 0.6, "rate": 0.5, "p": 0.1})).starts_with("k/rs"));
        assert!(err(json!({"ns": 8, "k": 3, "nc": 8, "p": 0.1, "list_sizes": []})).starts_with("list_sizes"));
        let unknown = ExperimentSpec::from_value(json!({"ns": 8, "k": 3, "nc": 8, "p": 0.1, "lsit": 1}));
        assert!(matches!(unknown, Err(CliError::Config(m)) if m.contains("lsit")));
        let missing = ExperimentSpec::from_value(json!({"k": 3, "nc": 8, "p": 0.1}));
        assert!(matches!(missing, Err(CliError::Config(m)) if m.contains("ns")));
    }

    #[test]
    fn grids() {
        assert_eq!(parse_grid("-1,0.5, 2").unwrap(), vec![-1.0, 0.5, 2.0]);
        assert_eq!(parse_grid("0:0.1:0.3").unwrap(), vec![0.0, 0.1, 0.2, 0.3]);
        assert_eq!(parse_grid("-2:0.25:-1.5").unwrap(), vec![-2.0, -1.75, -1.5]);
        assert!(parse_grid("1:0:2").is_err());
        assert!(parse_grid("a,b").is_err());
    }

    #[test]
    fn sidecar_round_trip() {
        let s = spec(json!({"ns": 512, "rs": 0.6, "rate": 0.5, "p": 0.07, "ebn0_db": [-1.3, 0.1]}));
        let back = ExperimentSpec::from_value(serde_json::to_value(&s).unwrap()).unwrap();
        assert_eq!(back, s);
    }
}
