//! Scheduling of independent work items.
//!
//! Implementations may run items on any number of threads, but must hand
//! each item to `f` exactly once and preserve output order in [`Executor::map`].

use alloc::vec::Vec;

use crate::fft::{FftBackend, Radix2Fft};

pub trait Executor: Sync {
    /// Calls `f(i, chunk_i)` for every `chunk_len`-sized chunk of `data`.
    fn for_each_chunk<T, F>(&self, data: &mut [T], chunk_len: usize, f: F)
    where
        T: Send,
        F: Fn(usize, &mut [T]) + Sync + Send;

    /// Evaluates `f(0..count)` and returns the results in index order.
    fn map<R, F>(&self, count: usize, f: F) -> Vec<R>
    where
        R: Send,
        F: Fn(usize) -> R + Sync + Send;
}

/// Runs everything on the calling thread.
#[derive(Debug, Clone, Copy, Default)]
pub struct Sequential;

impl Executor for Sequential {
    fn for_each_chunk<T, F>(&self, data: &mut [T], chunk_len: usize, f: F)
    where
        T: Send,
        F: Fn(usize, &mut [T]) + Sync + Send,
    {
        data.chunks_mut(chunk_len)
            .enumerate()
            .for_each(|(i, chunk)| f(i, chunk));
    }

    fn map<R, F>(&self, count: usize, f: F) -> Vec<R>
    where
        R: Send,
        F: Fn(usize) -> R + Sync + Send,
    {
        (0..count).map(f).collect()
    }
}

/// An FFT backend paired with an executor; every pipeline stage takes one.
#[derive(Debug, Clone)]
pub struct Engine<F, E> {
    pub fft: F,
    pub exec: E,
}

impl<F: FftBackend, E: Executor> Engine<F, E> {
    pub fn new(fft: F, exec: E) -> Self {
        Self { fft, exec }
    }
}

impl Engine<Radix2Fft, Sequential> {
    /// Built-in radix-2 FFT on the calling thread.
    pub fn sequential(max_fft_len: usize) -> Self {
        Self {
            fft: Radix2Fft::new(max_fft_len),
            exec: Sequential,
        }
    }
}
