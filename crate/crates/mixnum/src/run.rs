//! `run` and `sweep`.

use std::path::Path;
use std::time::Instant;

use mixnum_core::metrics::{measure, CcdfCurve, EmissionMask, MetricsReport, PsdEstimate};
use mixnum_core::pipeline;
use mixnum_core::scenario::{Method, ScenarioSpec};
use mixnum_core::{ComplexSignal, Engine, Executor, FftBackend};
use serde::{Deserialize, Serialize};

use crate::error::{io_err, CliError, CliResult};
use crate::io;

pub const REPORT_SCHEMA: &str = "mixnum-report v1";

/// Contents of `report.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub schema: String,
    pub digest: String,
    pub method: Method,
    pub papr_target_db: f64,
    pub seed: u64,
    pub metrics: MetricsReport,
    pub scenario: ScenarioSpec,
}

#[derive(Debug, Clone)]
pub struct RunResult {
    pub report: Report,
    pub ccdf: CcdfCurve,
    pub psd: PsdEstimate,
    pub signal: ComplexSignal,
    /// Not written to any file, so reports stay reproducible.
    pub wall_time_s: f64,
}

/// Generates and measures one waveform.
pub fn run_spec<F: FftBackend, E: Executor>(
    engine: &Engine<F, E>,
    spec: &ScenarioSpec,
    mask: Option<&EmissionMask>,
) -> CliResult<RunResult> {
    let start = Instant::now();
    let (dims, wf) = pipeline::run(engine, spec)?;
    let m = measure(
        engine,
        &wf.signal,
        &wf.reference,
        &dims,
        &spec.measurement,
        mask,
        &wf.iterations,
    )?;
    Ok(RunResult {
        report: Report {
            schema: REPORT_SCHEMA.into(),
            digest: io::scenario_digest(spec),
            method: spec.method,
            papr_target_db: spec.papr_target_db,
            seed: spec.seed,
            metrics: m.report,
            scenario: spec.clone(),
        },
        ccdf: m.ccdf,
        psd: m.psd,
        signal: wf.signal,
        wall_time_s: start.elapsed().as_secs_f64(),
    })
}

/// Writes `ccdf.csv`, `psd.csv`, `report.json` and optionally the waveform.
pub fn write_run(out_dir: &Path, result: &RunResult, dump_waveform: bool) -> CliResult<()> {
    std::fs::create_dir_all(out_dir).map_err(io_err(out_dir))?;
    io::write_ccdf_csv(&out_dir.join("ccdf.csv"), &result.ccdf)?;
    io::write_psd_csv(&out_dir.join("psd.csv"), &result.psd)?;
    io::write_json(&out_dir.join("report.json"), &result.report)?;
    if dump_waveform {
        io::dump_waveform(out_dir, "waveform", &result.signal)?;
    }
    Ok(())
}

/// One line of human-readable output.
pub fn summary_line(r: &RunResult) -> String {
    let m = &r.report.metrics;
    let fmt = |v: &[f64]| v.iter().map(|x| format!("{x:.2}")).collect::<Vec<_>>().join("/");
    format!(
        "{} target={:.2} dB papr@{}={:.3} dB mse={} dB aclr={} dB time={:.1}s",
        r.report.method.name(),
        r.report.papr_target_db,
        m.ccdf_probability,
        m.papr_at_p_db,
        fmt(&m.mse_db),
        fmt(&m.aclr_db),
        r.wall_time_s
    )
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub method: Method,
    pub target_db: f64,
    pub papr_at_p_db: f64,
    pub mse_db: Vec<f64>,
    pub aclr_db: Vec<f64>,
}

impl SweepRow {
    pub fn from_report(r: &Report) -> Self {
        Self {
            method: r.method,
            target_db: r.papr_target_db,
            papr_at_p_db: r.metrics.papr_at_p_db,
            mse_db: r.metrics.mse_db.clone(),
            aclr_db: r.metrics.aclr_db.clone(),
        }
    }
}

/// Runs every `(method, target)` pair in order.
pub fn sweep<F: FftBackend, E: Executor>(
    engine: &Engine<F, E>,
    base: &ScenarioSpec,
    targets: &[f64],
    methods: &[Method],
    mask: Option<&EmissionMask>,
    mut on_result: impl FnMut(&RunResult),
) -> CliResult<Vec<SweepRow>> {
    let mut rows = Vec::with_capacity(targets.len() * methods.len());
    for &method in methods {
        for &target in targets {
            let mut spec = base.clone();
            spec.method = method;
            spec.papr_target_db = target;
            spec.validate()?;
            let r = run_spec(engine, &spec, mask)?;
            on_result(&r);
            rows.push(SweepRow::from_report(&r.report));
        }
    }
    Ok(rows)
}

pub fn write_sweep_csv(path: &Path, rows: &[SweepRow]) -> CliResult<()> {
    let bwps = rows.first().map_or(0, |r| r.mse_db.len());
    let sides = rows.first().map_or(0, |r| r.aclr_db.len());
    let mut header = vec!["method".to_string(), "target_db".into(), "papr_at_p_db".into()];
    header.extend((0..bwps).map(|i| format!("mse_bwp{i}_db")));
    header.extend((0..sides).map(|i| format!("aclr{i}_db")));
    let mut body = format!("{}\n{}\n", io::SWEEP_SCHEMA, header.join(","));
    for r in rows {
        let mut cells = vec![r.method.name().to_string(), format!("{:.2}", r.target_db), format!("{:.4}", r.papr_at_p_db)];
        cells.extend(r.mse_db.iter().map(|v| format!("{v:.4}")));
        cells.extend(r.aclr_db.iter().map(|v| format!("{v:.4}")));
        body.push_str(&cells.join(","));
        body.push('\n');
    }
    std::fs::write(path, body).map_err(io_err(path))
}

/// Parses `NAME[,NAME...]` method lists.
pub fn parse_methods(list: &str) -> CliResult<Vec<Method>> {
    list.split(',')
        .map(|s| {
            Method::from_name(s.trim()).ok_or_else(|| CliError::Override(s.into(), "unknown method".into()))
        })
        .collect()
}
