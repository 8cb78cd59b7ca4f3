//! Fast-convolution filtered OFDM synthesis.
//!
//! Every subband arrives as a baseband signal at the nominal rate. It is cut
//! into overlapping blocks of `L_m` samples, each block is transformed,
//! weighted by the subband's frequency window and mapped onto the bins of a
//! common `N`-point inverse transform centred at `c_m`. The `N`-point blocks of
//! all subbands are summed, inverse-transformed, and the central `N_S`
//! samples of each are concatenated (overlap-save). The result is the
//! filtered composite at `I = N/L_m` times the input rate.
//!
//! Block `r` starts `r·L_S` samples into the input after `L_O/2` leading
//! zeros, so the kept centre of block `r` covers input samples
//! `[r·L_S, (r+1)·L_S)` and the kept regions tile the timeline exactly.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;
use core::ops::Range;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exec::{Engine, Executor};
use crate::fft::FftBackend;
use crate::math;
use crate::scenario::DerivedDims;
use crate::signal::ComplexSignal;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TransitionShape {
    RaisedCosine,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FcConfig {
    /// Nominal inverse transform size; `N = N_ov · n_nom`.
    #[serde(default = "defaults::n_nom")]
    pub n_nom: usize,
    #[serde(default = "defaults::bin_spacing_hz")]
    pub bin_spacing_hz: f64,
    /// `λ = L_O / L`.
    #[serde(default = "defaults::overlap_factor")]
    pub overlap_factor: f64,
    /// Transition-band bins on each side of the passband.
    #[serde(default = "defaults::transition_bins")]
    pub transition_bins: usize,
    #[serde(default = "defaults::transition_shape")]
    pub transition_shape: TransitionShape,
}

mod defaults {
    use super::TransitionShape;

    pub fn n_nom() -> usize {
        2048
    }
    pub fn bin_spacing_hz() -> f64 {
        15e3
    }
    pub fn overlap_factor() -> f64 {
        0.5
    }
    pub fn transition_bins() -> usize {
        12
    }
    pub fn transition_shape() -> TransitionShape {
        TransitionShape::RaisedCosine
    }
}

impl Default for FcConfig {
    fn default() -> Self {
        Self {
            n_nom: defaults::n_nom(),
            bin_spacing_hz: defaults::bin_spacing_hz(),
            overlap_factor: defaults::overlap_factor(),
            transition_bins: defaults::transition_bins(),
            transition_shape: defaults::transition_shape(),
        }
    }
}

impl FcConfig {
    pub fn validate(&self) -> Result<()> {
        if !self.n_nom.is_power_of_two() {
            return Err(Error::scenario("fc.n_nom", format!("{} is not a power of two", self.n_nom)));
        }
        if !(self.bin_spacing_hz.is_finite() && self.bin_spacing_hz > 0.0) {
            return Err(Error::scenario("fc.bin_spacing_hz", "must be finite and > 0"));
        }
        if !(self.overlap_factor > 0.0 && self.overlap_factor < 1.0) {
            return Err(Error::scenario(
                "fc.overlap_factor",
                format!("must lie in (0, 1), got {}", self.overlap_factor),
            ));
        }
        Ok(())
    }
}

/// Geometry of one subband's FC processing.
#[derive(Debug, Clone, PartialEq)]
pub struct FcSubband {
    /// Forward transform `L_m`.
    pub block_len: usize,
    /// Non-overlapping part `L_S = (1 − λ)L_m`.
    pub hop: usize,
    /// Overlap `L_O = λ L_m`.
    pub overlap: usize,
    /// `I_m = N / L_m`.
    pub interpolation: usize,
    /// Subband centre `c_m` in output bins.
    pub center_bin: i64,
    /// `θ_m = c_m L_S / L_m`.
    pub theta: f64,
    /// Passband as baseband bins `[lo, hi)` of the `L_m` grid.
    pub passband: (i64, i64),
}

#[derive(Debug, Clone, PartialEq)]
pub struct FcDims {
    /// Common inverse transform `N`.
    pub n: usize,
    /// Samples kept per output block, `N_S = (1 − λ)N`.
    pub n_s: usize,
    pub bin_spacing_hz: f64,
    pub transition_bins: usize,
    pub transition_shape: TransitionShape,
    pub subbands: Vec<FcSubband>,
}

impl FcDims {
    pub fn derive(cfg: &FcConfig, dims: &DerivedDims) -> Result<Self> {
        cfg.validate()?;
        let geometry = |msg: alloc::string::String| Err(Error::FcGeometry(msg));
        let n = dims.oversampling * cfg.n_nom;
        let out_spacing = dims.fs_oversampled / n as f64;
        if math::abs(out_spacing - cfg.bin_spacing_hz) > 1e-6 {
            return geometry(format!(
                "output bin spacing {out_spacing} Hz differs from configured {} Hz",
                cfg.bin_spacing_hz
            ));
        }
        let block_len_f = dims.fs_nominal / cfg.bin_spacing_hz;
        let block_len = math::round(block_len_f) as usize;
        if math::abs(block_len_f - block_len as f64) > 1e-9 || !block_len.is_power_of_two() {
            return geometry(format!("forward transform {block_len_f} is not a power of two"));
        }
        if n % block_len != 0 {
            return geometry(format!("N = {n} is not a multiple of L = {block_len}"));
        }
        let hop_f = (1.0 - cfg.overlap_factor) * block_len as f64;
        let hop = math::round(hop_f) as usize;
        if math::abs(hop_f - hop as f64) > 1e-9 || hop % 2 != 0 || hop == 0 {
            return geometry(format!("L_S = {hop_f} is not a positive even integer"));
        }
        let overlap = block_len - hop;
        if overlap % 2 != 0 {
            return geometry(format!("L_O = {overlap} is odd"));
        }
        let interpolation = n / block_len;

        let mut subbands = Vec::with_capacity(dims.bwps.len());
        for (m, bwp) in dims.bwps.iter().enumerate() {
            let c = bwp.snapped_center_hz() / cfg.bin_spacing_hz;
            let center_bin = math::round(c) as i64;
            if math::abs(c - center_bin as f64) > 1e-9 {
                return geometry(format!("subband {m} centre {c} is not an integer bin"));
            }
            let ratio_f = bwp.scs_hz / cfg.bin_spacing_hz;
            let ratio = math::round(ratio_f) as i64;
            if math::abs(ratio_f - ratio as f64) > 1e-9 || ratio < 1 {
                return geometry(format!("subband {m} SCS is not a multiple of the bin spacing"));
            }
            let k = bwp.num_subcarriers() as i64;
            let (first, last) = (-k / 2, -k / 2 + k - 1);
            let passband = (ratio * first - ratio / 2, ratio * last + ratio - ratio / 2);
            subbands.push(FcSubband {
                block_len,
                hop,
                overlap,
                interpolation,
                center_bin,
                theta: center_bin as f64 * hop as f64 / block_len as f64,
                passband,
            });
        }
        Ok(Self {
            n,
            n_s: n / block_len * hop,
            bin_spacing_hz: cfg.bin_spacing_hz,
            transition_bins: cfg.transition_bins,
            transition_shape: cfg.transition_shape,
            subbands,
        })
    }
}

/// Frequency-domain window of one subband, in DFT-shifted order (index `b`
/// is baseband bin `b − L/2`).
#[derive(Debug, Clone, PartialEq)]
pub struct FcWindow {
    pub weights: Vec<f64>,
    pub passband: Range<usize>,
    pub lower_transition: Range<usize>,
    pub upper_transition: Range<usize>,
}

impl FcWindow {
    /// Indices with nonzero weight.
    pub fn support(&self) -> Range<usize> {
        self.lower_transition.start..self.upper_transition.end
    }

    /// Baseband bin of shifted index `b`.
    pub fn baseband_bin(&self, b: usize) -> i64 {
        b as i64 - (self.weights.len() / 2) as i64
    }
}

/// Unity passband with raised-cosine transitions of `transition_bins` on
/// each side, placed just outside the passband.
///
/// Transition weights are `½(1 − cos(π(j + ½)/T))` rising towards the
/// passband, so the ramp crosses 0.5 at its midpoint and the two halves are
/// complementary.
pub fn design_window(sub: &FcSubband, transition_bins: usize, shape: TransitionShape) -> Result<FcWindow> {
    let TransitionShape::RaisedCosine = shape;
    let len = sub.block_len;
    let half = (len / 2) as i64;
    let (lo, hi) = sub.passband;
    let t = transition_bins as i64;
    if lo - t + half < 0 || hi + t + half > len as i64 || lo >= hi {
        return Err(Error::InvalidWindow(format!(
            "passband [{lo}, {hi}) plus {t} transition bins per side exceeds L = {len}"
        )));
    }
    let pass = (lo + half) as usize..(hi + half) as usize;
    let lower = pass.start - transition_bins..pass.start;
    let upper = pass.end..pass.end + transition_bins;
    let mut weights = vec![0.0; len];
    weights[pass.clone()].iter_mut().for_each(|w| *w = 1.0);
    for j in 0..transition_bins {
        let v = 0.5 * (1.0 - math::cos(math::PI * (j as f64 + 0.5) / transition_bins as f64));
        weights[lower.start + j] = v;
        weights[upper.end - 1 - j] = v;
    }
    Ok(FcWindow {
        weights,
        passband: pass,
        lower_transition: lower,
        upper_transition: upper,
    })
}

/// Equally long blocks stored back to back.
#[derive(Debug, Clone, PartialEq)]
pub struct FcBlocks {
    pub block_len: usize,
    pub num_blocks: usize,
    /// Input samples advanced per block.
    pub hop: usize,
    /// Length of the unpadded input signal the blocks were cut from.
    pub source_len: usize,
    pub data: Vec<Complex64>,
}

impl FcBlocks {
    pub fn block(&self, r: usize) -> &[Complex64] {
        &self.data[r * self.block_len..(r + 1) * self.block_len]
    }

    pub fn block_mut(&mut self, r: usize) -> &mut [Complex64] {
        &mut self.data[r * self.block_len..(r + 1) * self.block_len]
    }

    fn zeros_like(&self, block_len: usize) -> Self {
        Self {
            block_len,
            num_blocks: self.num_blocks,
            hop: self.hop,
            source_len: self.source_len,
            data: vec![ZERO; block_len * self.num_blocks],
        }
    }
}

/// Cuts `signal` into `R = ⌈(len + L_O/2)/L_S⌉` overlapping blocks after
/// prepending `L_O/2` zeros; the tail is zero-padded.
pub fn segment(signal: &ComplexSignal, sub: &FcSubband) -> FcBlocks {
    let pad = sub.overlap / 2;
    let num_blocks = (signal.len() + pad).div_ceil(sub.hop);
    let padded_len = (num_blocks - 1) * sub.hop + sub.block_len;
    let mut padded = vec![ZERO; padded_len];
    padded[pad..pad + signal.len()].copy_from_slice(&signal.samples);
    let mut data = Vec::with_capacity(num_blocks * sub.block_len);
    for r in 0..num_blocks {
        data.extend_from_slice(&padded[r * sub.hop..r * sub.hop + sub.block_len]);
    }
    FcBlocks {
        block_len: sub.block_len,
        num_blocks,
        hop: sub.hop,
        source_len: signal.len(),
        data,
    }
}

/// Phase applied to block `r`: `exp(j2π c (r·L_S − L_O/2)/L)`.
///
/// The `r`-dependent part is `exp(j2π r θ)`; the constant accounts for the
/// `L_O/2` leading zeros so the output is `exp(j2π c n/N)`-continuous from
/// the first input sample.
fn block_phase(sub: &FcSubband, r: usize) -> Complex64 {
    let t = (r * sub.hop) as i64 - (sub.overlap / 2) as i64;
    let cycles = (sub.center_bin * t).rem_euclid(sub.block_len as i64) as f64 / sub.block_len as f64;
    math::cis(2.0 * math::PI * cycles)
}

/// Per-block DFT, half shift, windowing, mapping to the `N`-point grid
/// around `c_m`, phase rotation and `I_m` gain.
pub fn subband_forward<F: FftBackend, E: Executor>(
    engine: &Engine<F, E>,
    blocks: &FcBlocks,
    window: &FcWindow,
    sub: &FcSubband,
    n: usize,
) -> Result<FcBlocks> {
    let len = sub.block_len;
    if blocks.block_len != len || window.weights.len() != len {
        return Err(Error::LengthMismatch {
            expected: len,
            actual: window.weights.len().min(blocks.block_len),
        });
    }
    let offset = sub.center_bin - len.div_ceil(2) as i64;
    let mapped: Vec<(usize, usize, f64)> = window
        .support()
        .map(|b| {
            let src = (b + len / 2) % len;
            let dst = math::wrap_index(offset + b as i64, n);
            (src, dst, window.weights[b] * sub.interpolation as f64)
        })
        .collect();
    let mut out = blocks.zeros_like(n);
    engine.exec.for_each_chunk(&mut out.data, n, |r, dst_block| {
        let mut buf = blocks.block(r).to_vec();
        engine.fft.forward(&mut buf);
        let rot = block_phase(sub, r);
        for &(src, dst, w) in &mapped {
            dst_block[dst] = buf[src] * (rot * w);
        }
    });
    Ok(out)
}

/// Sums subband spectra into `V_f` and inverse-transforms each block into `V_t`.
pub fn combine<F: FftBackend, E: Executor>(
    engine: &Engine<F, E>,
    subbands: &[FcBlocks],
) -> Result<(FcBlocks, FcBlocks)> {
    let first = subbands.first().ok_or(Error::Empty)?;
    for s in subbands {
        if s.num_blocks != first.num_blocks || s.block_len != first.block_len {
            return Err(Error::LengthMismatch {
                expected: first.num_blocks * first.block_len,
                actual: s.num_blocks * s.block_len,
            });
        }
    }
    let mut v_f = first.clone();
    for s in &subbands[1..] {
        for (a, b) in v_f.data.iter_mut().zip(&s.data) {
            *a += b;
        }
    }
    let mut v_t = v_f.clone();
    engine
        .exec
        .for_each_chunk(&mut v_t.data, v_t.block_len, |_, block| engine.fft.inverse(block));
    Ok((v_f, v_t))
}

/// Overlap-save output: the central `N_S` samples of every block,
/// concatenated and cut to `I · source_len`.
pub fn ols_extract(v_t: &FcBlocks, fc: &FcDims, sample_rate_hz: f64) -> Result<ComplexSignal> {
    let n = fc.n;
    if v_t.block_len != n {
        return Err(Error::LengthMismatch {
            expected: n,
            actual: v_t.block_len,
        });
    }
    let skip = (n - fc.n_s) / 2;
    let interpolation = fc.n_s / v_t.hop;
    let out_len = v_t.source_len * interpolation;
    let mut out = Vec::with_capacity(v_t.num_blocks * fc.n_s);
    for r in 0..v_t.num_blocks {
        out.extend_from_slice(&v_t.block(r)[skip..skip + fc.n_s]);
    }
    out.truncate(out_len);
    Ok(ComplexSignal::new(out, sample_rate_hz))
}

/// The FC-F-OFDM composite before overlap-save, plus its OLS output.
#[derive(Debug, Clone)]
pub struct FcSynthesis {
    pub v_f: FcBlocks,
    pub v_t: FcBlocks,
    pub windows: Vec<FcWindow>,
    pub output: ComplexSignal,
}

/// Filters and combines nominal-rate baseband subband signals.
pub fn synthesize<F: FftBackend, E: Executor>(
    engine: &Engine<F, E>,
    subband_inputs: &[ComplexSignal],
    dims: &DerivedDims,
) -> Result<FcSynthesis> {
    let fc = dims.fc()?;
    let windows = fc
        .subbands
        .iter()
        .map(|s| design_window(s, fc.transition_bins, fc.transition_shape))
        .collect::<Result<Vec<_>>>()?;
    let mut spectra = Vec::with_capacity(subband_inputs.len());
    for ((x, sub), win) in subband_inputs.iter().zip(&fc.subbands).zip(&windows) {
        let blocks = segment(x, sub);
        spectra.push(subband_forward(engine, &blocks, win, sub, fc.n)?);
    }
    let (v_f, v_t) = combine(engine, &spectra)?;
    let output = ols_extract(&v_t, fc, dims.fs_oversampled)?;
    Ok(FcSynthesis {
        v_f,
        v_t,
        windows,
        output,
    })
}
