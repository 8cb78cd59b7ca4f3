//! Transmitter WOLA shaping and subband aggregation.
//!
//! Each CP-OFDM symbol is cyclically extended by `l_ext` samples past the end
//! of its body, multiplied by a raised-cosine window whose ramps are `l_ext`
//! long, and overlap-added at the CP-OFDM stride. The rising ramp therefore
//! sits in the first `l_ext` samples of the CP and the falling ramp in the
//! extension, overlapping the next symbol's rising ramp exactly. The FFT
//! window of a receiver that starts right after the CP sees only flat,
//! unit-weight samples.
//!
//! ```text
//!        |<-- L_cp -->|<------- L_ofdm ------->|<- l_ext ->|
//!   w:   /‾‾‾‾‾‾‾‾‾‾‾‾‾‾‾‾‾‾‾‾‾‾‾‾‾‾‾‾‾‾‾‾‾‾‾‾‾‾‾‾‾\
//!        ramp-up                                ramp-down
//! ```

use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::math;
use crate::scenario::BwpDims;
use crate::signal::ComplexSignal;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct WolaParams {
    pub body_len: usize,
    pub cp_len: usize,
    /// Cyclic extension beyond the CP-OFDM stride; also the ramp length.
    pub l_ext: usize,
}

impl WolaParams {
    /// Oversampled-rate parameters for `bwp` with `l_ext = 2⌊factor·L_cp/2⌋`.
    pub fn for_bwp(bwp: &BwpDims, extension_factor: f64) -> Self {
        let half = math::floor(extension_factor * bwp.cp_len_os as f64 / 2.0) as usize;
        Self {
            body_len: bwp.ofdm_len_os,
            cp_len: bwp.cp_len_os,
            l_ext: 2 * half,
        }
    }

    pub fn stride(&self) -> usize {
        self.body_len + self.cp_len
    }

    pub fn window_len(&self) -> usize {
        self.body_len + self.cp_len + self.l_ext
    }

    pub fn ramp_len(&self) -> usize {
        self.l_ext
    }
}

/// Raised-cosine window of `window_len` with `ramp_len`-sample ramps.
///
/// `w[i] = ½(1 − cos(π(i + ½)/ramp_len))` on the rising ramp, mirrored on the
/// falling ramp, unity between. The half-sample offset makes the two ramps
/// exactly complementary.
pub fn rc_window(window_len: usize, ramp_len: usize) -> Result<Vec<f64>> {
    if 2 * ramp_len > window_len {
        return Err(Error::InvalidWindow(alloc::format!(
            "ramp length {ramp_len} exceeds half the window length {window_len}"
        )));
    }
    let mut w = vec![1.0; window_len];
    for i in 0..ramp_len {
        let v = 0.5 * (1.0 - math::cos(math::PI * (i as f64 + 0.5) / ramp_len as f64));
        w[i] = v;
        w[window_len - 1 - i] = v;
    }
    Ok(w)
}

pub fn build_rc_window(params: &WolaParams) -> Result<Vec<f64>> {
    rc_window(params.window_len(), params.ramp_len())
}

/// Cyclically extends one symbol body (CP before, `l_ext` head samples
/// after) and applies `window`.
pub fn wola_symbol(body: &[Complex64], params: &WolaParams, window: &[f64]) -> Result<Vec<Complex64>> {
    if body.len() != params.body_len {
        return Err(Error::LengthMismatch {
            expected: params.body_len,
            actual: body.len(),
        });
    }
    if window.len() != params.window_len() {
        return Err(Error::LengthMismatch {
            expected: params.window_len(),
            actual: window.len(),
        });
    }
    if params.cp_len > params.body_len || params.l_ext > params.body_len {
        return Err(Error::InvalidWindow("extension longer than the symbol body".into()));
    }
    let l = params.body_len;
    let extended = body[l - params.cp_len..]
        .iter()
        .chain(body)
        .chain(&body[..params.l_ext]);
    Ok(extended.zip(window).map(|(x, w)| x * *w).collect())
}

/// Overlap-adds equally long windowed symbols at `stride`.
///
/// The output has `stride·S + (symbol_len − stride)` samples, with symbol `s`
/// starting at `s·stride`.
pub fn wola_assemble(symbols: &[Vec<Complex64>], stride: usize, sample_rate_hz: f64) -> Result<ComplexSignal> {
    let first = symbols.first().ok_or(Error::Empty)?;
    let sym_len = first.len();
    if let Some(bad) = symbols.iter().find(|s| s.len() != sym_len) {
        return Err(Error::LengthMismatch {
            expected: sym_len,
            actual: bad.len(),
        });
    }
    if stride == 0 || stride > sym_len {
        return Err(Error::InvalidWindow(alloc::format!(
            "stride {stride} must lie in [1, {sym_len}]"
        )));
    }
    let mut out = vec![ZERO; stride * symbols.len() + (sym_len - stride)];
    for (s, sym) in symbols.iter().enumerate() {
        for (o, x) in out[s * stride..s * stride + sym_len].iter_mut().zip(sym) {
            *o += x;
        }
    }
    Ok(ComplexSignal::new(out, sample_rate_hz))
}

/// WOLA-shapes a CP-OFDM signal produced at the stride of `params`.
///
/// Equivalent to [`wola_symbol`] on every body followed by
/// [`wola_assemble`], but works directly on the CP-OFDM samples.
pub fn shape_cp_ofdm(signal: &ComplexSignal, params: &WolaParams) -> Result<ComplexSignal> {
    let stride = params.stride();
    if signal.is_empty() || signal.len() % stride != 0 {
        return Err(Error::LengthMismatch {
            expected: stride * (signal.len() / stride).max(1),
            actual: signal.len(),
        });
    }
    let window = build_rc_window(params)?;
    let symbols = signal.len() / stride;
    let mut out = vec![ZERO; signal.len() + params.l_ext];
    for s in 0..symbols {
        let base = s * stride;
        let sym = &signal.samples[base..base + stride];
        for (i, (o, x)) in out[base..base + stride].iter_mut().zip(sym).enumerate() {
            *o += x * window[i];
        }
        let head = &sym[params.cp_len..params.cp_len + params.l_ext];
        for (i, (o, x)) in out[base + stride..base + stride + params.l_ext]
            .iter_mut()
            .zip(head)
            .enumerate()
        {
            *o += x * window[stride + i];
        }
    }
    Ok(ComplexSignal::new(out, signal.sample_rate_hz))
}

/// Element-wise sum of subband signals; shorter inputs are zero-padded.
pub fn aggregate(signals: &[ComplexSignal]) -> Result<ComplexSignal> {
    let first = signals.first().ok_or(Error::Empty)?;
    let fs = first.sample_rate_hz;
    if let Some(bad) = signals.iter().find(|s| s.sample_rate_hz != fs) {
        return Err(Error::SampleRateMismatch(fs, bad.sample_rate_hz));
    }
    let len = signals.iter().map(ComplexSignal::len).max().unwrap_or(0);
    let mut out = vec![ZERO; len];
    for sig in signals {
        for (o, x) in out.iter_mut().zip(&sig.samples) {
            *o += x;
        }
    }
    Ok(ComplexSignal::new(out, fs))
}
