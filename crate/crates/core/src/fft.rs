//! Complex DFT pair.
//!
//! Convention used throughout the crate: the forward transform is
//! unnormalised and the inverse carries the `1/L` factor, so
//! `idft(dft(x)) == x` and `‖dft(x)‖² = L·‖x‖²`.

use alloc::vec::Vec;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::math;

/// An in-place power-of-two DFT.
pub trait FftBackend: Sync {
    /// Unnormalised forward DFT. `buf.len()` must be a power of two.
    fn forward(&self, buf: &mut [Complex64]);
    /// Inverse DFT including the `1/L` factor. `buf.len()` must be a power of two.
    fn inverse(&self, buf: &mut [Complex64]);
}

impl<T: FftBackend + ?Sized> FftBackend for &T {
    fn forward(&self, buf: &mut [Complex64]) {
        (**self).forward(buf)
    }
    fn inverse(&self, buf: &mut [Complex64]) {
        (**self).inverse(buf)
    }
}

pub fn check_len(len: usize) -> Result<()> {
    if len.is_power_of_two() {
        Ok(())
    } else {
        Err(Error::NotPowerOfTwo(len))
    }
}

/// Forward DFT of `x` into a new buffer.
pub fn dft<F: FftBackend + ?Sized>(fft: &F, x: &[Complex64]) -> Result<Vec<Complex64>> {
    check_len(x.len())?;
    let mut out = x.to_vec();
    fft.forward(&mut out);
    Ok(out)
}

/// Inverse DFT (with `1/L`) of `spectrum` into a new buffer.
pub fn idft<F: FftBackend + ?Sized>(fft: &F, spectrum: &[Complex64]) -> Result<Vec<Complex64>> {
    check_len(spectrum.len())?;
    let mut out = spectrum.to_vec();
    fft.inverse(&mut out);
    Ok(out)
}

/// Iterative decimation-in-time radix-2 FFT.
///
/// A twiddle table is built once for `max_len`; any power-of-two length up
/// to that size reuses it by striding. Longer transforms build a temporary
/// table per call.
#[derive(Debug, Clone)]
pub struct Radix2Fft {
    max_len: usize,
    // e^{-j2πk/max_len}, k < max_len/2
    twiddles: Vec<Complex64>,
}

impl Radix2Fft {
    pub fn new(max_len: usize) -> Self {
        let max_len = max_len.max(2).next_power_of_two();
        Self {
            max_len,
            twiddles: twiddle_table(max_len),
        }
    }

    pub fn max_len(&self) -> usize {
        self.max_len
    }

    fn transform(&self, buf: &mut [Complex64], inverse: bool) {
        let n = buf.len();
        assert!(n.is_power_of_two(), "radix-2 length {n} is not a power of two");
        if n <= 1 {
            return;
        }
        if n > self.max_len {
            let table = twiddle_table(n);
            butterflies(buf, &table, n, inverse);
        } else {
            butterflies(buf, &self.twiddles, self.max_len, inverse);
        }
    }
}

fn twiddle_table(len: usize) -> Vec<Complex64> {
    (0..len / 2)
        .map(|k| math::cis(-2.0 * math::PI * k as f64 / len as f64))
        .collect()
}

fn bit_reverse(buf: &mut [Complex64]) {
    let n = buf.len();
    let bits = n.trailing_zeros();
    for i in 0..n {
        let j = i.reverse_bits() >> (usize::BITS - bits);
        if j > i {
            buf.swap(i, j);
        }
    }
}

fn butterflies(buf: &mut [Complex64], table: &[Complex64], table_len: usize, inverse: bool) {
    let n = buf.len();
    bit_reverse(buf);
    let mut m = 2;
    while m <= n {
        let half = m / 2;
        let step = table_len / m;
        for block in buf.chunks_exact_mut(m) {
            let (lo, hi) = block.split_at_mut(half);
            for (j, (a, b)) in lo.iter_mut().zip(hi.iter_mut()).enumerate() {
                let w = table[j * step];
                let w = if inverse { w.conj() } else { w };
                let t = *b * w;
                *b = *a - t;
                *a += t;
            }
        }
        m *= 2;
    }
}

impl FftBackend for Radix2Fft {
    fn forward(&self, buf: &mut [Complex64]) {
        self.transform(buf, false);
    }

    fn inverse(&self, buf: &mut [Complex64]) {
        self.transform(buf, true);
        let scale = 1.0 / buf.len() as f64;
        buf.iter_mut().for_each(|v| *v *= scale);
    }
}
