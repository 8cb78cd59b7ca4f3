//! Iterative clipping and filtering inside the common FC stage.
//!
//! Each `N`-point block of the combined spectrum is clipped in time, and the
//! clipping error is kept only on the bins where the subband filters already
//! let energy through (passband and transition band). In-channel gaps and all
//! out-of-channel bins stay exactly as the filter produced them.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::exec::{Engine, Executor};
use crate::fc::{self, FcDims, FcWindow};
use crate::fft::FftBackend;
use crate::icef::{clip_in_place, refine_threshold, IcefSettings};
use crate::math;
use crate::ofdm::{ofdm_modulate, Placement, Rate, ResourceGrid};
use crate::scenario::DerivedDims;
use crate::signal::ComplexSignal;

/// Disjoint partition of the `N` output bins.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BinSets {
    pub n: usize,
    /// Clipping noise allowed.
    pub k_e: Vec<usize>,
    /// In channel, clipping noise forbidden.
    pub k_f: Vec<usize>,
    /// Out of channel.
    pub k_null: Vec<usize>,
}

impl BinSets {
    /// `K_E ∪ K_F`, sorted.
    pub fn k_active(&self) -> Vec<usize> {
        let mut v: Vec<usize> = self.k_e.iter().chain(&self.k_f).copied().collect();
        v.sort_unstable();
        v
    }
}

/// Binary error filter `h`: `true` exactly on `K_E`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClipNoiseFilter {
    pub h: Vec<bool>,
}

impl ClipNoiseFilter {
    pub fn from_bins(bins: &BinSets) -> Self {
        let mut h = vec![false; bins.n];
        for &k in &bins.k_e {
            h[k] = true;
        }
        Self { h }
    }

    pub fn all_pass(n: usize) -> Self {
        Self { h: vec![true; n] }
    }

    pub fn all_stop(n: usize) -> Self {
        Self { h: vec![false; n] }
    }

    pub fn len(&self) -> usize {
        self.h.len()
    }

    pub fn is_empty(&self) -> bool {
        self.h.is_empty()
    }

    pub fn support(&self) -> Vec<usize> {
        self.h.iter().enumerate().filter(|(_, &on)| on).map(|(k, _)| k).collect()
    }
}

/// In-channel bins: signed index `n` with `|n|·Δf ≤ bw/2`.
fn in_channel(n: usize, bin_spacing_hz: f64, channel_bw_hz: f64) -> Vec<bool> {
    let half = (n / 2) as i64;
    (0..n)
        .map(|k| {
            let signed = if (k as i64) < half { k as i64 } else { k as i64 - n as i64 };
            math::abs(signed as f64) * bin_spacing_hz <= channel_bw_hz / 2.0 + 1e-6
        })
        .collect()
}

pub fn build_bin_sets(fc: &FcDims, windows: &[FcWindow], channel_bw_hz: f64) -> Result<BinSets> {
    if windows.len() != fc.subbands.len() {
        return Err(Error::LengthMismatch {
            expected: fc.subbands.len(),
            actual: windows.len(),
        });
    }
    let n = fc.n;
    let mut owner: Vec<Option<usize>> = vec![None; n];
    for (m, (sub, win)) in fc.subbands.iter().zip(windows).enumerate() {
        for b in win.support() {
            let k = math::wrap_index(sub.center_bin + win.baseband_bin(b), n);
            if owner[k].is_some() {
                let signed = if k < n / 2 { k as i64 } else { k as i64 - n as i64 };
                return Err(Error::OverlappingSupports(signed));
            }
            owner[k] = Some(m);
        }
    }
    let active = in_channel(n, fc.bin_spacing_hz, channel_bw_hz);
    let (mut k_e, mut k_f, mut k_null) = (Vec::new(), Vec::new(), Vec::new());
    for k in 0..n {
        match (owner[k].is_some(), active[k]) {
            (true, true) => k_e.push(k),
            (true, false) => {
                return Err(Error::FcGeometry(format!("filter support bin {k} lies outside the channel")));
            }
            (false, true) => k_f.push(k),
            (false, false) => k_null.push(k),
        }
    }
    Ok(BinSets { n, k_e, k_f, k_null })
}

/// Output of [`block_iterate`].
#[derive(Debug, Clone, PartialEq)]
pub struct BlockIteration {
    pub time: Vec<Complex64>,
    pub spectrum: Vec<Complex64>,
    pub iterations: usize,
}

/// Clip-and-filter iterations on one `N`-point block.
///
/// Stops once the block peak power is at most `A²·10^(ε/10)`; this is also
/// checked before the first iteration.
pub fn block_iterate<F: FftBackend + ?Sized>(
    fft: &F,
    v_f: &[Complex64],
    h: &ClipNoiseFilter,
    amp: f64,
    max_iterations: usize,
    stop_epsilon_db: f64,
) -> Result<BlockIteration> {
    if h.len() != v_f.len() {
        return Err(Error::LengthMismatch {
            expected: v_f.len(),
            actual: h.len(),
        });
    }
    if !(amp.is_finite() && amp > 0.0) {
        return Err(Error::InvalidAmplitude(amp));
    }
    let stop = amp * amp * math::db_to_lin(stop_epsilon_db);
    let mut spectrum = v_f.to_vec();
    let mut time = spectrum.clone();
    fft.inverse(&mut time);
    let mut used = 0;
    let mut work = vec![Complex64::new(0.0, 0.0); v_f.len()];
    for l in 1..=max_iterations {
        if math::peak_power(&time) <= stop {
            break;
        }
        work.copy_from_slice(&time);
        clip_in_place(&mut work, amp);
        fft.forward(&mut work);
        for ((out, &orig), (&clipped, &on)) in spectrum.iter_mut().zip(v_f).zip(work.iter().zip(&h.h)) {
            *out = if on { orig + (clipped - orig) } else { orig };
        }
        time.copy_from_slice(&spectrum);
        fft.inverse(&mut time);
        used = l;
    }
    Ok(BlockIteration {
        time,
        spectrum,
        iterations: used,
    })
}

/// Nominal-rate baseband CP-OFDM of every BWP, the FC input.
pub fn baseband_inputs<F: FftBackend, E: Executor>(
    engine: &Engine<F, E>,
    grids: &[ResourceGrid],
    dims: &DerivedDims,
) -> Result<Vec<ComplexSignal>> {
    grids
        .iter()
        .map(|g| ofdm_modulate(engine, g, dims, Rate::Nominal, Placement::Baseband))
        .collect()
}

/// Result of an FC-based run.
#[derive(Debug, Clone)]
pub struct FcOutcome {
    pub signal: ComplexSignal,
    /// Iterations used per block; empty without PAPR reduction.
    pub iterations: Vec<usize>,
    /// Frozen clipping amplitude, 0 without PAPR reduction.
    pub threshold_amp: f64,
    pub bins: BinSets,
}

/// FC-F-OFDM without PAPR reduction.
pub fn run_fc_f_ofdm<F: FftBackend, E: Executor>(
    engine: &Engine<F, E>,
    grids: &[ResourceGrid],
    dims: &DerivedDims,
) -> Result<FcOutcome> {
    let inputs = baseband_inputs(engine, grids, dims)?;
    let syn = fc::synthesize(engine, &inputs, dims)?;
    let bins = build_bin_sets(dims.fc()?, &syn.windows, dims.channel_bw_hz)?;
    Ok(FcOutcome {
        signal: syn.output,
        iterations: Vec::new(),
        threshold_amp: 0.0,
        bins,
    })
}

/// FC-F-OFDM with per-block clipping and `K_E`-confined error filtering.
///
/// Two phases per threshold pass: the amplitude is fixed from a global mean
/// power (the unprocessed OLS output on the first pass), then blocks are
/// processed independently.
pub fn run_fc_icef<F: FftBackend, E: Executor>(
    engine: &Engine<F, E>,
    grids: &[ResourceGrid],
    dims: &DerivedDims,
    settings: &IcefSettings,
) -> Result<FcOutcome> {
    let fc = dims.fc()?;
    let inputs = baseband_inputs(engine, grids, dims)?;
    let syn = fc::synthesize(engine, &inputs, dims)?;
    let bins = build_bin_sets(fc, &syn.windows, dims.channel_bw_hz)?;
    let h = ClipNoiseFilter::from_bins(&bins);
    let v_f = &syn.v_f;
    let initial_power = syn.output.mean_power();
    let ((signal, iterations), amp) =
        refine_threshold(initial_power, settings.papr_target_db, settings.threshold_passes, |amp| {
            let results = engine.exec.map(v_f.num_blocks, |r| {
                block_iterate(&engine.fft, v_f.block(r), &h, amp, settings.max_iterations, settings.stop_epsilon_db)
            });
            let mut v_t = syn.v_t.clone();
            let mut iterations = Vec::with_capacity(v_f.num_blocks);
            for (r, res) in results.into_iter().enumerate() {
                let res = res?;
                v_t.block_mut(r).copy_from_slice(&res.time);
                iterations.push(res.iterations);
            }
            let signal = fc::ols_extract(&v_t, fc, dims.fs_oversampled)?;
            let power = signal.mean_power();
            Ok(((signal, iterations), power))
        })?;
    Ok(FcOutcome {
        signal,
        iterations,
        threshold_amp: amp,
        bins,
    })
}
