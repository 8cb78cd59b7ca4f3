//! End-to-end waveform generation for each method.

use alloc::vec::Vec;

use crate::error::Result;
use crate::exec::{Engine, Executor};
use crate::fc_icef::{run_fc_f_ofdm, run_fc_icef};
use crate::fft::FftBackend;
use crate::icef::{run_e_icef, run_i_icef, wola_aggregate, EIcefOptions, IcefSettings};
use crate::ofdm::{generate_grids, ofdm_modulate, Placement, Rate, ResourceGrid};
use crate::scenario::{derive_dims, DerivedDims, Method, ScenarioSpec};
use crate::signal::ComplexSignal;

/// A generated waveform with the data it must carry.
#[derive(Debug, Clone)]
pub struct Waveform {
    pub method: Method,
    pub signal: ComplexSignal,
    /// Pre-reduction grids, the MSE reference.
    pub reference: Vec<ResourceGrid>,
    /// Iterations per processed unit (symbols, blocks, or one aggregate run).
    pub iterations: Vec<usize>,
}

/// CP-OFDM with per-BWP WOLA, summed; the unprocessed baseline.
pub fn run_wola_cp_ofdm<F: FftBackend, E: Executor>(
    engine: &Engine<F, E>,
    grids: &[ResourceGrid],
    dims: &DerivedDims,
    extension_factor: f64,
) -> Result<ComplexSignal> {
    let subbands = grids
        .iter()
        .map(|g| ofdm_modulate(engine, g, dims, Rate::Oversampled, Placement::FullBand))
        .collect::<Result<Vec<_>>>()?;
    wola_aggregate(&subbands, dims, extension_factor)
}

/// Generates the waveform of `spec.method` from given grids.
pub fn run_with_grids<F: FftBackend, E: Executor>(
    engine: &Engine<F, E>,
    spec: &ScenarioSpec,
    dims: &DerivedDims,
    grids: Vec<ResourceGrid>,
) -> Result<Waveform> {
    let settings = IcefSettings::from_spec(spec);
    let (signal, iterations) = match spec.method {
        Method::None => (
            run_wola_cp_ofdm(engine, &grids, dims, spec.wola_extension_factor)?,
            Vec::new(),
        ),
        Method::IIcef => {
            let o = run_i_icef(engine, &grids, dims, &settings)?;
            (o.signal, o.iterations)
        }
        Method::EIcefWola => {
            let o = run_e_icef(engine, &grids, dims, &settings, EIcefOptions::default())?;
            (o.signal, o.iterations)
        }
        Method::FcFOfdm => (run_fc_f_ofdm(engine, &grids, dims)?.signal, Vec::new()),
        Method::FcIcef => {
            let o = run_fc_icef(engine, &grids, dims, &settings)?;
            (o.signal, o.iterations)
        }
    };
    Ok(Waveform {
        method: spec.method,
        signal,
        reference: grids,
        iterations,
    })
}

/// Validates `spec`, draws its grids and generates the waveform.
pub fn run<F: FftBackend, E: Executor>(engine: &Engine<F, E>, spec: &ScenarioSpec) -> Result<(DerivedDims, Waveform)> {
    let dims = derive_dims(spec)?;
    let grids = generate_grids(&dims, spec.seed);
    let wf = run_with_grids(engine, spec, &dims, grids)?;
    Ok((dims, wf))
}
