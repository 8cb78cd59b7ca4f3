//! QAM mapping, resource grids and CP-OFDM modulation/demodulation.
//!
//! Signed subcarrier indices address transform bins as `k mod L`; DC is bin 0.

use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex64;
use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};

use crate::error::{Error, Result};
use crate::exec::{Engine, Executor};
use crate::fft::FftBackend;
use crate::math;
use crate::scenario::{BwpDims, DerivedDims, Modulation};
use crate::signal::ComplexSignal;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Gray-mapped square QAM with unit average power.
///
/// Even-indexed bits drive the in-phase axis, odd-indexed bits the
/// quadrature axis, most significant first; a `0` bit selects the positive
/// half-plane, so QPSK `00` maps to `(1 + j)/√2`.
pub fn qam_map(bits: &[u8], modulation: Modulation) -> Result<Vec<Complex64>> {
    let per_symbol = modulation.bits_per_symbol();
    if bits.len() % per_symbol != 0 {
        return Err(Error::MisalignedBits {
            bits: bits.len(),
            per_symbol,
        });
    }
    let order = modulation.order() as f64;
    let norm = 1.0 / math::sqrt(2.0 * (order - 1.0) / 3.0);
    Ok(bits
        .chunks_exact(per_symbol)
        .map(|b| {
            let re = pam_level(b.iter().step_by(2).copied());
            let im = pam_level(b.iter().skip(1).step_by(2).copied());
            Complex64::new(re * norm, im * norm)
        })
        .collect())
}

// Nested-sign Gray PAM: (1−2b0)(2^{k−1} − (1−2b1)(2^{k−2} − …)).
fn pam_level(bits: impl DoubleEndedIterator<Item = u8> + ExactSizeIterator) -> f64 {
    let sign = |b: u8| if b == 0 { 1.0 } else { -1.0 };
    let k = bits.len();
    let mut it = bits.rev();
    let mut level = 1.0;
    for (depth, b) in it.by_ref().take(k - 1).enumerate() {
        level = (1u32 << (depth + 1)) as f64 - sign(b) * level;
    }
    sign(it.next().expect("at least one bit per axis")) * level
}

/// Frequency-domain symbols of one BWP, active subcarriers only.
#[derive(Debug, Clone, PartialEq)]
pub struct ResourceGrid {
    pub bwp_index: usize,
    pub num_subcarriers: usize,
    pub num_symbols: usize,
    /// Column-major: symbol `s` occupies `values[s·K..(s+1)·K]`, rows in
    /// active-subcarrier order.
    pub values: Vec<Complex64>,
    /// `true` for constellation-valued reference grids, `false` once modified.
    pub reference: bool,
}

impl ResourceGrid {
    pub fn zeros(bwp_index: usize, num_subcarriers: usize, num_symbols: usize) -> Self {
        Self {
            bwp_index,
            num_subcarriers,
            num_symbols,
            values: vec![ZERO; num_subcarriers * num_symbols],
            reference: false,
        }
    }

    pub fn column(&self, s: usize) -> &[Complex64] {
        &self.values[s * self.num_subcarriers..(s + 1) * self.num_subcarriers]
    }

    pub fn column_mut(&mut self, s: usize) -> &mut [Complex64] {
        &mut self.values[s * self.num_subcarriers..(s + 1) * self.num_subcarriers]
    }

    pub fn columns(&self) -> impl Iterator<Item = &[Complex64]> {
        self.values.chunks_exact(self.num_subcarriers)
    }
}

fn symbol_rng(seed: u64, bwp: usize, symbol: usize) -> ChaCha8Rng {
    let mut key = [0u8; 32];
    key[..8].copy_from_slice(&seed.to_le_bytes());
    key[8..16].copy_from_slice(b"mixnum-g");
    let mut rng = ChaCha8Rng::from_seed(key);
    rng.set_stream(((bwp as u64) << 32) | symbol as u64);
    rng
}

/// Random unit-power constellation payload for one BWP.
///
/// Each symbol column draws from its own ChaCha stream keyed by
/// `(seed, bwp, symbol)`, so grids do not depend on generation order.
pub fn generate_grid(bwp: &BwpDims, bwp_index: usize, seed: u64) -> ResourceGrid {
    let k = bwp.num_subcarriers();
    let per_symbol = bwp.modulation.bits_per_symbol();
    let mut values = Vec::with_capacity(k * bwp.symbols);
    let mut bits = vec![0u8; k * per_symbol];
    for s in 0..bwp.symbols {
        let mut rng = symbol_rng(seed, bwp_index, s);
        let mut word = 0u64;
        for (i, bit) in bits.iter_mut().enumerate() {
            if i % 64 == 0 {
                word = rng.next_u64();
            }
            *bit = (word & 1) as u8;
            word >>= 1;
        }
        values.extend(qam_map(&bits, bwp.modulation).expect("bit count is aligned"));
    }
    ResourceGrid {
        bwp_index,
        num_subcarriers: k,
        num_symbols: bwp.symbols,
        values,
        reference: true,
    }
}

/// Reference grids for every BWP of a scenario.
pub fn generate_grids(dims: &DerivedDims, seed: u64) -> Vec<ResourceGrid> {
    dims.bwps
        .iter()
        .enumerate()
        .map(|(m, b)| generate_grid(b, m, seed))
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Rate {
    /// `L_ofdm` transform at the nominal sample rate.
    Nominal,
    /// `N_ov · L_ofdm` transform at the oversampled rate.
    Oversampled,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Placement {
    /// Subcarriers at their full-band positions (BWP centre embedded).
    FullBand,
    /// Subcarriers around DC, for later frequency translation to the BWP
    /// centre. Each symbol is pre-rotated by `exp(−j2π f_c t_s)`, `t_s` the
    /// start of its FFT window, so that a phase-continuous shift by `f_c`
    /// reproduces the full-band signal exactly.
    Baseband,
}

/// Transform and CP length of `bwp` at `rate`.
pub fn symbol_geometry(bwp: &BwpDims, rate: Rate) -> (usize, usize) {
    match rate {
        Rate::Nominal => (bwp.ofdm_len, bwp.cp_len),
        Rate::Oversampled => (bwp.ofdm_len_os, bwp.cp_len_os),
    }
}

/// Signed transform bin of each active subcarrier under `placement`.
pub fn active_bins(bwp: &BwpDims, placement: Placement) -> Vec<i64> {
    match placement {
        Placement::FullBand => bwp.active.clone(),
        Placement::Baseband => bwp.active.iter().map(|k| k - bwp.center_own).collect(),
    }
}

fn check_bins(bins: &[i64], len: usize) -> Result<()> {
    let half = (len / 2) as i64;
    match bins.iter().find(|&&k| k < -half || k >= half) {
        Some(&index) => Err(Error::IndexOutOfRange {
            index,
            half: len / 2,
        }),
        None => Ok(()),
    }
}

/// Phase `exp(−j2π c (s·stride + cp)/L)` applied to baseband symbol `s`.
fn baseband_rotation(center: i64, s: usize, stride: usize, cp: usize, len: usize) -> Complex64 {
    let t = (s * stride + cp) as i64;
    let cycles = (center * t).rem_euclid(len as i64) as f64 / len as f64;
    math::cis(-2.0 * math::PI * cycles)
}

/// CP-OFDM modulation of one grid: zero-padded IDFT per symbol, CP
/// insertion, column concatenation.
pub fn ofdm_modulate<F: FftBackend, E: Executor>(
    engine: &Engine<F, E>,
    grid: &ResourceGrid,
    dims: &DerivedDims,
    rate: Rate,
    placement: Placement,
) -> Result<ComplexSignal> {
    let bwp = &dims.bwps[grid.bwp_index];
    if grid.num_subcarriers != bwp.num_subcarriers() {
        return Err(Error::LengthMismatch {
            expected: bwp.num_subcarriers(),
            actual: grid.num_subcarriers,
        });
    }
    if grid.num_symbols != bwp.symbols {
        return Err(Error::LengthMismatch {
            expected: bwp.symbols,
            actual: grid.num_symbols,
        });
    }
    let (len, cp) = symbol_geometry(bwp, rate);
    let bins = active_bins(bwp, placement);
    check_bins(&bins, len)?;
    let slots: Vec<usize> = bins.iter().map(|&k| math::wrap_index(k, len)).collect();
    let stride = len + cp;
    let fs = match rate {
        Rate::Nominal => dims.fs_nominal,
        Rate::Oversampled => dims.fs_oversampled,
    };

    let mut out = vec![ZERO; stride * grid.num_symbols];
    engine.exec.for_each_chunk(&mut out, stride, |s, chunk| {
        let rot = match placement {
            Placement::FullBand => Complex64::new(1.0, 0.0),
            Placement::Baseband => baseband_rotation(bwp.center_own, s, stride, cp, len),
        };
        let body = &mut chunk[cp..];
        body.iter_mut().for_each(|v| *v = ZERO);
        for (&slot, &x) in slots.iter().zip(grid.column(s)) {
            body[slot] = x * rot;
        }
        engine.fft.inverse(body);
        let (prefix, body) = chunk.split_at_mut(cp);
        prefix.copy_from_slice(&body[len - cp..]);
    });
    Ok(ComplexSignal::new(out, fs))
}

/// Plain CP-removal + DFT receiver.
///
/// The FFT window of symbol `s` starts `timing_offset` samples after the end
/// of its CP (`timing_offset ∈ [−L_cp, 0]`); the resulting linear phase is
/// removed before the active bins are extracted.
pub fn ofdm_demodulate<F: FftBackend, E: Executor>(
    engine: &Engine<F, E>,
    signal: &ComplexSignal,
    dims: &DerivedDims,
    bwp_index: usize,
    timing_offset: i64,
    rate: Rate,
) -> Result<ResourceGrid> {
    let bwp = &dims.bwps[bwp_index];
    let (len, cp) = symbol_geometry(bwp, rate);
    let stride = len + cp;
    let need = bwp.symbols * stride;
    if signal.len() < need {
        return Err(Error::LengthMismatch {
            expected: need,
            actual: signal.len(),
        });
    }
    if timing_offset < -(cp as i64) || timing_offset > 0 {
        let start = cp as i64 + timing_offset;
        return Err(Error::WindowOutOfRange {
            start,
            end: start + len as i64,
            min: 0,
            max: stride as i64,
        });
    }
    let bins = &bwp.active;
    check_bins(bins, len)?;
    let derotate: Vec<(usize, Complex64)> = bins
        .iter()
        .map(|&k| {
            let cycles = (k * timing_offset).rem_euclid(len as i64) as f64 / len as f64;
            (math::wrap_index(k, len), math::cis(-2.0 * math::PI * cycles))
        })
        .collect();

    let k = bwp.num_subcarriers();
    let mut grid = ResourceGrid::zeros(bwp_index, k, bwp.symbols);
    engine.exec.for_each_chunk(&mut grid.values, k, |s, column| {
        let start = (s * stride + cp) as i64 + timing_offset;
        let start = start as usize;
        let mut buf = signal.samples[start..start + len].to_vec();
        engine.fft.forward(&mut buf);
        for (out, &(slot, rot)) in column.iter_mut().zip(&derotate) {
            *out = buf[slot] * rot;
        }
    });
    Ok(grid)
}
