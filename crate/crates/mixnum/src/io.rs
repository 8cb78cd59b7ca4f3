//! Result files.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use mixnum_core::metrics::{CcdfCurve, PsdEstimate};
use mixnum_core::scenario::ScenarioSpec;
use mixnum_core::ComplexSignal;
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::error::{io_err, CliResult};

pub const CCDF_SCHEMA: &str = "# mixnum-ccdf v1";
pub const PSD_SCHEMA: &str = "# mixnum-psd v1";
pub const SWEEP_SCHEMA: &str = "# mixnum-sweep v1";

/// PAPR thresholds written to `ccdf.csv`: 0 to 16 dB in 0.01 dB steps.
pub fn ccdf_grid() -> Vec<f64> {
    (0..=1600).map(|i| i as f64 / 100.0).collect()
}

/// SHA-256 over the canonical JSON of the fully resolved scenario.
pub fn scenario_digest(spec: &ScenarioSpec) -> String {
    let canonical = serde_json::to_vec(spec).expect("scenario serializes");
    hex::encode(Sha256::digest(&canonical))
}

fn create(path: &Path) -> CliResult<BufWriter<File>> {
    Ok(BufWriter::new(File::create(path).map_err(io_err(path))?))
}

pub fn write_ccdf_csv(path: &Path, curve: &CcdfCurve) -> CliResult<()> {
    let mut w = create(path)?;
    let mut body = format!("{CCDF_SCHEMA}\npapr_db,probability\n");
    for (t, p) in curve.on_grid(&ccdf_grid()) {
        body.push_str(&format!("{t:.2},{p:.9e}\n"));
    }
    w.write_all(body.as_bytes()).and_then(|_| w.flush()).map_err(io_err(path))
}

pub fn write_psd_csv(path: &Path, psd: &PsdEstimate) -> CliResult<()> {
    let mut w = create(path)?;
    let mut body = format!("{PSD_SCHEMA}\nfreq_hz,db\n");
    for (f, d) in psd.freqs_hz.iter().zip(&psd.db) {
        body.push_str(&format!("{f:.1},{d:.6}\n"));
    }
    w.write_all(body.as_bytes()).and_then(|_| w.flush()).map_err(io_err(path))
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> CliResult<()> {
    let mut w = create(path)?;
    serde_json::to_writer_pretty(&mut w, value)?;
    w.write_all(b"\n").and_then(|_| w.flush()).map_err(io_err(path))
}

#[derive(Debug, Serialize)]
struct WaveformHeader<'a> {
    format: &'a str,
    sample_rate_hz: f64,
    samples: usize,
    data_file: &'a str,
}

/// Writes `<stem>.f64` (interleaved re/im, little-endian f64) and `<stem>.json`.
pub fn dump_waveform(dir: &Path, stem: &str, signal: &ComplexSignal) -> CliResult<()> {
    let data_name = format!("{stem}.f64");
    let data_path = dir.join(&data_name);
    let mut w = create(&data_path)?;
    let mut bytes = Vec::with_capacity(signal.len() * 16);
    for v in &signal.samples {
        bytes.extend_from_slice(&v.re.to_le_bytes());
        bytes.extend_from_slice(&v.im.to_le_bytes());
    }
    w.write_all(&bytes).and_then(|_| w.flush()).map_err(io_err(&data_path))?;
    write_json(
        &dir.join(format!("{stem}.json")),
        &WaveformHeader {
            format: "complex interleaved f64 little-endian",
            sample_rate_hz: signal.sample_rate_hz,
            samples: signal.len(),
            data_file: &data_name,
        },
    )
}

/// Reads a dump written by [`dump_waveform`].
pub fn read_waveform(data_path: &Path, sample_rate_hz: f64) -> CliResult<ComplexSignal> {
    let bytes = std::fs::read(data_path).map_err(io_err(data_path))?;
    let samples = bytes
        .chunks_exact(16)
        .map(|c| {
            let re = f64::from_le_bytes(c[..8].try_into().expect("8 bytes"));
            let im = f64::from_le_bytes(c[8..].try_into().expect("8 bytes"));
            mixnum_core::Complex64::new(re, im)
        })
        .collect();
    Ok(ComplexSignal::new(samples, sample_rate_hz))
}
