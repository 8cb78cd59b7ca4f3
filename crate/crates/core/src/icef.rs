//! Iterative clipping and error filtering on OFDM symbols.
//!
//! * [`icef_symbol`] is the single-numerology kernel: clip the oversampled
//!   symbol, take the clipping error back to the frequency domain, keep it only
//!   on the active subcarriers, repeat.
//! * [`run_i_icef`] applies it to every subband independently and sums the
//!   WOLA-shaped results.
//! * [`run_e_icef`] clips the *aggregate* signal and, per subband and symbol,
//!   removes the inter-numerology interference of all other subbands from the
//!   extracted clipping error before adding it back.

use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::exec::{Engine, Executor};
use crate::fft::FftBackend;
use crate::math;
use crate::ofdm::{ofdm_modulate, Placement, Rate, ResourceGrid};
use crate::scenario::{BwpDims, DerivedDims, ScenarioSpec};
use crate::signal::ComplexSignal;
use crate::wola::{self, WolaParams};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Clipping level and stopping rule.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClipConfig {
    pub papr_target_db: f64,
    pub max_iterations: usize,
    /// Amplitude `A` a sample may not exceed.
    pub threshold_amp: f64,
    pub stop_epsilon_db: f64,
}

impl ClipConfig {
    pub fn new(papr_target_db: f64, max_iterations: usize, threshold_amp: f64, stop_epsilon_db: f64) -> Result<Self> {
        if !(threshold_amp.is_finite() && threshold_amp > 0.0) {
            return Err(Error::InvalidAmplitude(threshold_amp));
        }
        Ok(Self {
            papr_target_db,
            max_iterations,
            threshold_amp,
            stop_epsilon_db,
        })
    }

    /// Peak power at or below which iteration stops: `A²·10^(ε/10)`.
    pub fn stop_power(&self) -> f64 {
        self.threshold_amp * self.threshold_amp * math::db_to_lin(self.stop_epsilon_db)
    }
}

/// Scenario-level parameters shared by the symbol-domain methods.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IcefSettings {
    pub papr_target_db: f64,
    pub max_iterations: usize,
    pub stop_epsilon_db: f64,
    pub wola_extension_factor: f64,
    pub threshold_passes: usize,
}

impl IcefSettings {
    pub fn from_spec(spec: &ScenarioSpec) -> Self {
        Self {
            papr_target_db: spec.papr_target_db,
            max_iterations: spec.max_iterations,
            stop_epsilon_db: spec.stop_epsilon_db,
            wola_extension_factor: spec.wola_extension_factor,
            threshold_passes: spec.threshold_passes,
        }
    }
}

/// Amplitude limiter preserving phase: `A·x/|x|` wherever `|x| > A`.
pub fn clip_in_place(x: &mut [Complex64], amp: f64) {
    let amp_sq = amp * amp;
    for v in x.iter_mut() {
        let p = v.norm_sqr();
        if p > amp_sq {
            *v *= amp / math::sqrt(p);
        }
    }
}

pub fn clip_polar(x: &ComplexSignal, amp: f64) -> Result<ComplexSignal> {
    if !(amp.is_finite() && amp > 0.0) {
        return Err(Error::InvalidAmplitude(amp));
    }
    let mut out = x.clone();
    clip_in_place(&mut out.samples, amp);
    Ok(out)
}

/// `A = sqrt(P_avg · 10^(target/10))`, `P_avg` the mean power of `signal`.
pub fn threshold_from_target(signal: &ComplexSignal, target_db: f64) -> Result<f64> {
    let p = signal.mean_power();
    if p.is_nan() || p <= 0.0 || p.is_infinite() {
        return Err(Error::ZeroPower);
    }
    Ok(math::sqrt(p * math::db_to_lin(target_db)))
}

/// Binary clipping-error filter over one BWP's oversampled transform bins.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SubbandMask {
    pub bins: Vec<bool>,
}

impl SubbandMask {
    pub fn for_bwp(bwp: &BwpDims) -> Self {
        let mut bins = vec![false; bwp.ofdm_len_os];
        for &k in &bwp.active {
            bins[math::wrap_index(k, bwp.ofdm_len_os)] = true;
        }
        Self { bins }
    }

    pub fn active_count(&self) -> usize {
        self.bins.iter().filter(|&&b| b).count()
    }

    /// `original + h ⊙ error` over the full transform.
    pub fn filter_add(&self, original: &[Complex64], error: &[Complex64]) -> Vec<Complex64> {
        original
            .iter()
            .zip(error)
            .zip(&self.bins)
            .map(|((x, c), &h)| if h { x + c } else { *x })
            .collect()
    }
}

fn active_slots(bwp: &BwpDims) -> Vec<usize> {
    bwp.active
        .iter()
        .map(|&k| math::wrap_index(k, bwp.ofdm_len_os))
        .collect()
}

/// ICEF on one oversampled symbol. `column` holds the active-subcarrier
/// values; returns the modified column and the number of iterations run.
pub fn icef_symbol<F: FftBackend + ?Sized>(
    fft: &F,
    column: &[Complex64],
    bwp: &BwpDims,
    cfg: &ClipConfig,
) -> (Vec<Complex64>, usize) {
    let len = bwp.ofdm_len_os;
    let slots = active_slots(bwp);
    let mut original = vec![ZERO; len];
    for (&slot, &x) in slots.iter().zip(column) {
        original[slot] = x;
    }
    let mask = SubbandMask::for_bwp(bwp);
    let mut current = original.clone();
    let mut time = current.clone();
    fft.inverse(&mut time);
    let stop = cfg.stop_power();
    let mut used = 0;
    for l in 1..=cfg.max_iterations {
        if math::peak_power(&time) <= stop {
            break;
        }
        clip_in_place(&mut time, cfg.threshold_amp);
        fft.forward(&mut time);
        let error: Vec<Complex64> = time.iter().zip(&original).map(|(a, b)| a - b).collect();
        current = mask.filter_add(&original, &error);
        time.copy_from_slice(&current);
        fft.inverse(&mut time);
        used = l;
    }
    (slots.iter().map(|&s| current[s]).collect(), used)
}

/// Result of a symbol-domain PAPR reduction run.
#[derive(Debug, Clone)]
pub struct IcefOutcome {
    /// WOLA-shaped aggregate.
    pub signal: ComplexSignal,
    /// Final frequency-domain grids per BWP.
    pub grids: Vec<ResourceGrid>,
    /// Iterations used per processed unit (symbols for I-ICEF, one entry for E-ICEF).
    pub iterations: Vec<usize>,
    /// Peak amplitude of the aggregate after each E-ICEF regeneration.
    pub regrown_peaks: Vec<f64>,
}

fn modulate_all<F: FftBackend, E: Executor>(
    engine: &Engine<F, E>,
    grids: &[ResourceGrid],
    dims: &DerivedDims,
) -> Result<Vec<ComplexSignal>> {
    grids
        .iter()
        .map(|g| ofdm_modulate(engine, g, dims, Rate::Oversampled, Placement::FullBand))
        .collect()
}

/// Per-BWP WOLA followed by aggregation.
pub fn wola_aggregate(
    subbands: &[ComplexSignal],
    dims: &DerivedDims,
    extension_factor: f64,
) -> Result<ComplexSignal> {
    let shaped = subbands
        .iter()
        .zip(&dims.bwps)
        .map(|(x, b)| wola::shape_cp_ofdm(x, &WolaParams::for_bwp(b, extension_factor)))
        .collect::<Result<Vec<_>>>()?;
    wola::aggregate(&shaped)
}

/// Runs `process` with a clipping amplitude refined over `passes`.
///
/// Pass 1 uses `A² = P·T` with `P = initial_power`. Every later pass sets
/// `P` to the mean power of the previous output, which `process` returns
/// alongside its result.
pub fn refine_threshold<T>(
    initial_power: f64,
    papr_target_db: f64,
    passes: usize,
    mut process: impl FnMut(f64) -> Result<(T, f64)>,
) -> Result<(T, f64)> {
    let target = math::db_to_lin(papr_target_db);
    let mut power = initial_power;
    let mut pass = 0;
    loop {
        let amp = math::sqrt(power * target);
        if !(amp.is_finite() && amp > 0.0) {
            return Err(Error::InvalidAmplitude(amp));
        }
        let (out, out_power) = process(amp)?;
        pass += 1;
        if pass >= passes.max(1) {
            return Ok((out, amp));
        }
        power = out_power;
    }
}

/// Independent per-subband ICEF, then WOLA and summation.
///
/// Each subband's threshold comes from its own mean power.
pub fn run_i_icef<F: FftBackend, E: Executor>(
    engine: &Engine<F, E>,
    grids: &[ResourceGrid],
    dims: &DerivedDims,
    settings: &IcefSettings,
) -> Result<IcefOutcome> {
    let mut out_grids = Vec::with_capacity(grids.len());
    let mut iterations = Vec::new();
    for grid in grids {
        let bwp = &dims.bwps[grid.bwp_index];
        let x = ofdm_modulate(engine, grid, dims, Rate::Oversampled, Placement::FullBand)?;
        let ((g, used), _) = refine_threshold(x.mean_power(), settings.papr_target_db, settings.threshold_passes, |amp| {
            let cfg = ClipConfig::new(settings.papr_target_db, settings.max_iterations, amp, settings.stop_epsilon_db)?;
            let results = engine
                .exec
                .map(grid.num_symbols, |s| icef_symbol(&engine.fft, grid.column(s), bwp, &cfg));
            let mut g = ResourceGrid::zeros(grid.bwp_index, grid.num_subcarriers, grid.num_symbols);
            let mut used = Vec::with_capacity(grid.num_symbols);
            for (s, (col, n)) in results.into_iter().enumerate() {
                g.column_mut(s).copy_from_slice(&col);
                used.push(n);
            }
            let power = ofdm_modulate(engine, &g, dims, Rate::Oversampled, Placement::FullBand)?.mean_power();
            Ok(((g, used), power))
        })?;
        iterations.extend(used);
        out_grids.push(g);
    }
    let subbands = modulate_all(engine, &out_grids, dims)?;
    let signal = wola_aggregate(&subbands, dims, settings.wola_extension_factor)?;
    Ok(IcefOutcome {
        signal,
        grids: out_grids,
        iterations,
        regrown_peaks: Vec::new(),
    })
}

/// INI seen by subband `m`, symbol `s`: DFT of the sum of all *other*
/// subbands over that symbol's CP-stripped window.
pub fn compute_ini<F: FftBackend + ?Sized>(
    fft: &F,
    subbands: &[ComplexSignal],
    m: usize,
    s: usize,
    dims: &DerivedDims,
) -> Result<Vec<Complex64>> {
    let bwp = &dims.bwps[m];
    let len = bwp.ofdm_len_os;
    let start = s * bwp.stride_os() + bwp.cp_len_os;
    let mut acc = vec![ZERO; len];
    for (i, x) in subbands.iter().enumerate() {
        if i == m {
            continue;
        }
        if x.len() < start + len {
            return Err(Error::LengthMismatch {
                expected: start + len,
                actual: x.len(),
            });
        }
        for (a, v) in acc.iter_mut().zip(&x.samples[start..start + len]) {
            *a += v;
        }
    }
    fft.forward(&mut acc);
    Ok(acc)
}

/// Active-bin INI of every symbol of subband `m`, column-major like a grid.
fn ini_grid<F: FftBackend, E: Executor>(
    engine: &Engine<F, E>,
    subbands: &[ComplexSignal],
    m: usize,
    dims: &DerivedDims,
) -> Result<Vec<Complex64>> {
    let bwp = &dims.bwps[m];
    let slots = active_slots(bwp);
    let k = slots.len();
    let need = bwp.symbols * bwp.stride_os();
    if let Some(x) = subbands.iter().find(|x| x.len() < need) {
        return Err(Error::LengthMismatch {
            expected: need,
            actual: x.len(),
        });
    }
    let mut z = vec![ZERO; k * bwp.symbols];
    engine.exec.for_each_chunk(&mut z, k, |s, col| {
        let full = compute_ini(&engine.fft, subbands, m, s, dims).expect("lengths checked");
        for (o, &slot) in col.iter_mut().zip(&slots) {
            *o = full[slot];
        }
    });
    Ok(z)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EIcefOptions {
    /// Subtract the INI term from the extracted clipping error. Disabling it
    /// gives the plain aggregate-clipping ablation.
    pub cancel_ini: bool,
}

impl Default for EIcefOptions {
    fn default() -> Self {
        Self { cancel_ini: true }
    }
}

/// Enhanced ICEF on the aggregated mixed-numerology signal.
///
/// Within a threshold pass the amplitude is frozen. Iteration stops after
/// `max_iterations` or as soon as the aggregate's PAPR is within
/// `target + ε`. The output is the WOLA-shaped sum of the final subbands.
pub fn run_e_icef<F: FftBackend, E: Executor>(
    engine: &Engine<F, E>,
    grids: &[ResourceGrid],
    dims: &DerivedDims,
    settings: &IcefSettings,
    options: EIcefOptions,
) -> Result<IcefOutcome> {
    let subbands = modulate_all(engine, grids, dims)?;
    let initial_power = wola::aggregate(&subbands)?.mean_power();
    let (pass, _) = refine_threshold(initial_power, settings.papr_target_db, settings.threshold_passes, |amp| {
        let pass = e_icef_pass(engine, grids, &subbands, dims, settings, amp, options)?;
        let power = wola::aggregate(&pass.subbands)?.mean_power();
        Ok((pass, power))
    })?;
    let signal = wola_aggregate(&pass.subbands, dims, settings.wola_extension_factor)?;
    Ok(IcefOutcome {
        signal,
        grids: pass.grids,
        iterations: vec![pass.used],
        regrown_peaks: pass.regrown_peaks,
    })
}

struct EIcefPass {
    subbands: Vec<ComplexSignal>,
    grids: Vec<ResourceGrid>,
    used: usize,
    regrown_peaks: Vec<f64>,
}

fn e_icef_pass<F: FftBackend, E: Executor>(
    engine: &Engine<F, E>,
    grids: &[ResourceGrid],
    original_subbands: &[ComplexSignal],
    dims: &DerivedDims,
    settings: &IcefSettings,
    amp: f64,
    options: EIcefOptions,
) -> Result<EIcefPass> {
    let m_count = grids.len();
    let cfg = ClipConfig::new(settings.papr_target_db, settings.max_iterations, amp, settings.stop_epsilon_db)?;
    let stop_papr = math::db_to_lin(settings.papr_target_db + settings.stop_epsilon_db);
    let mut subbands = original_subbands.to_vec();

    let slots: Vec<Vec<usize>> = dims.bwps.iter().map(active_slots).collect();
    let mut ini: Vec<Vec<Complex64>> = if options.cancel_ini {
        (0..m_count)
            .map(|m| ini_grid(engine, &subbands, m, dims))
            .collect::<Result<_>>()?
    } else {
        Vec::new()
    };
    let mut current: Vec<ResourceGrid> = grids.to_vec();
    for g in &mut current {
        g.reference = false;
    }
    let mut used = 0;
    let mut regrown_peaks = Vec::new();

    for l in 1..=cfg.max_iterations {
        let mut agg = wola::aggregate(&subbands)?;
        if agg.peak_power() <= stop_papr * agg.mean_power() {
            break;
        }
        clip_in_place(&mut agg.samples, cfg.threshold_amp);

        for (m, grid) in current.iter_mut().enumerate() {
            let bwp = &dims.bwps[m];
            let (len, cp, stride) = (bwp.ofdm_len_os, bwp.cp_len_os, bwp.stride_os());
            let original = &grids[m];
            let slots = &slots[m];
            let z = ini.get(m);
            let k = grid.num_subcarriers;
            let clipped = &agg.samples;
            engine.exec.for_each_chunk(&mut grid.values, k, |s, col| {
                let start = s * stride + cp;
                let mut buf = clipped[start..start + len].to_vec();
                engine.fft.forward(&mut buf);
                let x0 = original.column(s);
                for i in 0..k {
                    let mut c = buf[slots[i]] - x0[i];
                    if let Some(z) = z {
                        c -= z[s * k + i];
                    }
                    col[i] = x0[i] + c;
                }
            });
        }
        drop(agg);

        subbands = modulate_all(engine, &current, dims)?;
        if options.cancel_ini {
            for (m, z) in ini.iter_mut().enumerate() {
                *z = ini_grid(engine, &subbands, m, dims)?;
            }
        }
        used = l;
        let regrown = wola::aggregate(&subbands)?;
        regrown_peaks.push(math::sqrt(regrown.peak_power()));
    }
    Ok(EIcefPass {
        subbands,
        grids: current,
        used,
        regrown_peaks,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ofdm::generate_grid;
    use crate::scenario::{derive_dims, Method, ScenarioSpec};

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn clip_below_threshold_is_identity() {
        let x = ComplexSignal::new(vec![c(0.3, 0.4), c(-0.5, 0.0)], 1.0);
        assert_eq!(clip_polar(&x, 1.0).unwrap(), x);
    }

    #[test]
    fn clip_preserves_phase() {
        let x = ComplexSignal::new(vec![math::cis(math::PI / 4.0) * 2.0], 1.0);
        let y = clip_polar(&x, 1.0).unwrap();
        assert!((y.samples[0] - math::cis(math::PI / 4.0)).norm() < 1e-15);
    }

    #[test]
    fn clip_is_idempotent() {
        let x = ComplexSignal::new((0..50).map(|i| c(i as f64 * 0.1 - 2.0, 1.0)).collect(), 1.0);
        let once = clip_polar(&x, 1.2).unwrap();
        let twice = clip_polar(&once, 1.2).unwrap();
        for (a, b) in twice.samples.iter().zip(&once.samples) {
            assert!((a - b).norm() <= 1e-15);
        }
    }

    #[test]
    fn clip_rejects_non_positive_amplitude() {
        let x = ComplexSignal::new(vec![c(1.0, 0.0)], 1.0);
        assert_eq!(clip_polar(&x, 0.0), Err(Error::InvalidAmplitude(0.0)));
        assert_eq!(clip_polar(&x, -1.0), Err(Error::InvalidAmplitude(-1.0)));
    }

    #[test]
    fn threshold_examples() {
        let unit = ComplexSignal::new(vec![c(1.0, 0.0), c(0.0, -1.0)], 1.0);
        assert!((threshold_from_target(&unit, 0.0).unwrap() - 1.0).abs() < 1e-15);
        let six = 20.0 * math::log10(2.0);
        assert!((threshold_from_target(&unit, six).unwrap() - 2.0).abs() < 1e-12);
        assert_eq!(
            threshold_from_target(&ComplexSignal::zeros(4, 1.0), 3.0),
            Err(Error::ZeroPower)
        );
    }

    fn single_bwp() -> DerivedDims {
        let mut spec = ScenarioSpec::mixed_20mhz(Method::IIcef, 5.0, 4);
        spec.bwps.truncate(1);
        spec.bwps[0].center_offset_hz = 0.0;
        derive_dims(&spec).unwrap()
    }

    #[test]
    fn zero_iterations_leave_column_unchanged() {
        let d = single_bwp();
        let eng = Engine::sequential(d.max_fft_len());
        let g = generate_grid(&d.bwps[0], 0, 5);
        let cfg = ClipConfig::new(5.0, 0, 1e-6, 0.01).unwrap();
        let (col, used) = icef_symbol(&eng.fft, g.column(0), &d.bwps[0], &cfg);
        assert_eq!(used, 0);
        assert_eq!(col, g.column(0));
    }

    #[test]
    fn high_threshold_stops_immediately() {
        let d = single_bwp();
        let eng = Engine::sequential(d.max_fft_len());
        let g = generate_grid(&d.bwps[0], 0, 5);
        let cfg = ClipConfig::new(30.0, 20, 1e3, 0.01).unwrap();
        let (col, used) = icef_symbol(&eng.fft, g.column(0), &d.bwps[0], &cfg);
        assert_eq!(used, 0);
        assert_eq!(col, g.column(0));
    }

    #[test]
    fn mask_filter_touches_only_active_bins() {
        let d = single_bwp();
        let mask = SubbandMask::for_bwp(&d.bwps[0]);
        assert_eq!(mask.active_count(), 624);
        let n = mask.bins.len();
        let orig: Vec<_> = (0..n).map(|i| c(i as f64, 0.0)).collect();
        let err = vec![c(1.0, 1.0); n];
        let out = mask.filter_add(&orig, &err);
        for i in 0..n {
            let delta = out[i] - orig[i];
            if mask.bins[i] {
                assert_eq!(delta, c(1.0, 1.0));
            } else {
                assert_eq!(delta, c(0.0, 0.0));
            }
        }
    }

    #[test]
    fn ini_is_zero_for_single_subband() {
        let d = single_bwp();
        let eng = Engine::sequential(d.max_fft_len());
        let g = generate_grid(&d.bwps[0], 0, 1);
        let x = ofdm_modulate(&eng, &g, &d, Rate::Oversampled, Placement::FullBand).unwrap();
        let z = compute_ini(&eng.fft, &[x], 0, 1, &d).unwrap();
        assert!(z.iter().all(|v| v.norm() == 0.0));
    }

    #[test]
    fn ini_window_beyond_signal_is_an_error() {
        let spec = ScenarioSpec::mixed_20mhz(Method::EIcefWola, 5.0, 1);
        let d = derive_dims(&spec).unwrap();
        let eng = Engine::sequential(d.max_fft_len());
        let short = vec![ComplexSignal::zeros(10, d.fs_oversampled); 2];
        assert!(matches!(
            compute_ini(&eng.fft, &short, 0, 0, &d),
            Err(Error::LengthMismatch { .. })
        ));
    }
}
