//! Sweep execution: CSV streaming, resume, sidecar and plot files.

use std::collections::HashMap;
use std::fs::{self, File, OpenOptions};
use std::io::Write;
use std::path::{Path, PathBuf};

use dpolar::polar::CodeSpecDoc;
use dpolar::simulate::{run_point, BerPoint, DecoderKind};
use dpolar::trellis::CompoundTrellis;
use serde::Serialize;
use serde_json::json;

use crate::experiment::{ExperimentSpec, Resolved};
use crate::CliError;

pub const CSV_HEADER: &str = "ebn0_db,frames,bit_errors,frame_errors,ber,fer,low_confidence,seconds";

#[derive(Debug, Clone)]
pub struct SweepOptions {
    pub out_dir: PathBuf,
    pub workers: usize,
    pub dump_trellis: bool,
    pub quiet: bool,
}

/// One finished decoder/list-size curve.
#[derive(Debug, Clone)]
pub struct Curve {
    pub decoder: DecoderKind,
    pub list_size: usize,
    pub csv: PathBuf,
    pub points: Vec<BerPoint>,
}

fn io_error(path: &Path, e: impl std::fmt::Display) -> CliError {
    CliError::Runtime(format!("{}: {}", path.display(), e))
}

pub fn curve_stem(name: &str, decoder: DecoderKind, list_size: usize) -> String {
    format!("{}_{}_L{}", name, decoder, list_size)
}

pub fn sidecar_path(out_dir: &Path, name: &str) -> PathBuf {
    out_dir.join(format!("{}.json", name))
}

fn sidecar(resolved: &Resolved, spec: &ExperimentSpec) -> Result<serde_json::Value, CliError> {
    let source = CodeSpecDoc::from(resolved.source.clone());
    let cfg = resolved.sim_config(DecoderKind::Jscl, 1);
    let mut channels = Vec::new();
    for &ebn0 in &spec.ebn0_db {
        let code = cfg.channel_code(ebn0).map_err(|e| CliError::Runtime(e.to_string()))?;
        channels.push(json!({"ebn0_db": ebn0, "code": CodeSpecDoc::from(code)}));
    }
    Ok(json!({
        "experiment": spec,
        "resolved": {
            "K": resolved.k,
            "N_s": spec.ns,
            "N_c": resolved.channel_len(),
            "R_s": resolved.source_rate(),
            "R_c": resolved.channel_rate(),
            "R": resolved.overall_rate(),
            "source": source,
            "channel": channels,
        }
    }))
}

/// Refuses to mix results from a different experiment into `out_dir` and
/// returns the spec to record.
fn check_sidecar(path: &Path, spec: &ExperimentSpec) -> Result<ExperimentSpec, CliError> {
    if !path.exists() {
        return Ok(spec.merged_with(spec));
    }
    let previous = ExperimentSpec::from_value(ExperimentSpec::load_value(path)?)?;
    if previous.identity() != spec.identity() {
        return Err(CliError::Config(format!(
            "{} records a different experiment; use another --out-dir",
            path.display()
        )));
    }
    Ok(previous.merged_with(spec))
}

pub fn read_points(path: &Path) -> Result<Vec<BerPoint>, CliError> {
    let mut reader = csv::Reader::from_path(path).map_err(|e| io_error(path, e))?;
    let header = reader.headers().map_err(|e| io_error(path, e))?.iter().collect::<Vec<_>>().join(",");
    if header != CSV_HEADER {
        return Err(CliError::Runtime(format!("{}: unexpected header '{}'", path.display(), header)));
    }
    reader
        .deserialize()
        .collect::<Result<Vec<BerPoint>, _>>()
        .map_err(|e| io_error(path, e))
}

fn append_point(path: &Path, point: &BerPoint) -> Result<(), CliError> {
    let fresh = !path.exists();
    let file = OpenOptions::new().create(true).append(true).open(path).map_err(|e| io_error(path, e))?;
    let mut writer = csv::WriterBuilder::new().has_headers(fresh).from_writer(file);
    writer.serialize(point).map_err(|e| io_error(path, e))?;
    writer.flush().map_err(|e| io_error(path, e))
}

fn write_plot(path: &Path, points: &[BerPoint]) -> Result<(), CliError> {
    let mut file = File::create(path).map_err(|e| io_error(path, e))?;
    for p in points {
        writeln!(file, "{} {}", p.ebn0_db, p.ber).map_err(|e| io_error(path, e))?;
    }
    Ok(())
}

#[derive(Serialize)]
struct TrellisDump {
    ebn0_db: f64,
    levels: Vec<dpolar::trellis::TrellisLevel>,
}

/// Runs every decoder × list size × Eb/N0 point, skipping points already
/// present in the output CSVs.
pub fn run_sweep(resolved: &Resolved, opts: &SweepOptions) -> Result<Vec<Curve>, CliError> {
    let spec = &resolved.spec;
    if spec.ebn0_db.is_empty() {
        return Err(CliError::Config("ebn0_db: grid is empty".into()));
    }
    fs::create_dir_all(&opts.out_dir).map_err(|e| io_error(&opts.out_dir, e))?;
    let side = sidecar_path(&opts.out_dir, &spec.name);
    let recorded = check_sidecar(&side, spec)?;
    let doc = serde_json::to_string_pretty(&sidecar(resolved, &recorded)?).expect("sidecar serializes");
    fs::write(&side, doc + "\n").map_err(|e| io_error(&side, e))?;

    if opts.dump_trellis {
        let cfg = resolved.sim_config(DecoderKind::Jscl, 1);
        let mut dumps = Vec::new();
        for &ebn0 in &spec.ebn0_db {
            let code = cfg.channel_code(ebn0).map_err(|e| CliError::Runtime(e.to_string()))?;
            let trellis = CompoundTrellis::new(&resolved.source, &code)
                .map_err(|e| CliError::Runtime(e.to_string()))?;
            dumps.push(TrellisDump { ebn0_db: ebn0, levels: trellis.dump() });
        }
        let path = opts.out_dir.join(format!("{}_trellis.json", spec.name));
        fs::write(&path, serde_json::to_string(&dumps).expect("trellis serializes"))
            .map_err(|e| io_error(&path, e))?;
    }

    let mut curves = Vec::new();
    for &decoder in &spec.decoders {
        for &list_size in &spec.list_sizes {
            let stem = curve_stem(&spec.name, decoder, list_size);
            let csv_path = opts.out_dir.join(format!("{}.csv", stem));
            let mut done: HashMap<u64, BerPoint> = HashMap::new();
            if csv_path.exists() {
                for p in read_points(&csv_path)? {
                    done.insert(p.ebn0_db.to_bits(), p);
                }
            }
            let cfg = resolved.sim_config(decoder, list_size);
            let mut points = Vec::with_capacity(spec.ebn0_db.len());
            for &ebn0 in &spec.ebn0_db {
                if let Some(p) = done.get(&ebn0.to_bits()) {
                    points.push(p.clone());
                    continue;
                }
                let point = run_point(&cfg, ebn0, opts.workers).map_err(|e| CliError::Runtime(e.to_string()))?;
                append_point(&csv_path, &point)?;
                if !opts.quiet {
                    println!(
                        "{} L={} Eb/N0={} dB: frames={} frame_errors={} ber={:.3e} fer={:.3e}{} ({:.1} s)",
                        decoder,
                        list_size,
                        ebn0,
                        point.frames,
                        point.frame_errors,
                        point.ber,
                        point.fer,
                        if point.low_confidence { " low-confidence" } else { "" },
                        point.seconds
                    );
                }
                points.push(point);
            }
            write_plot(&opts.out_dir.join(format!("{}.dat", stem)), &points)?;
            curves.push(Curve { decoder, list_size, csv: csv_path, points });
        }
    }
    Ok(curves)
}
