//! `std` implementations of the core's FFT and executor traits.

use std::collections::HashMap;
use std::sync::{Arc, Mutex};

use mixnum_core::{Complex64, Engine, Executor, FftBackend};
use rayon::prelude::*;
use rustfft::{Fft, FftPlanner};

type PlanPair = (Arc<dyn Fft<f64>>, Arc<dyn Fft<f64>>);

/// rustfft plans, created on first use and shared between threads.
pub struct RustFftBackend {
    plans: Mutex<HashMap<usize, PlanPair>>,
}

impl Default for RustFftBackend {
    fn default() -> Self {
        Self::new()
    }
}

impl std::fmt::Debug for RustFftBackend {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("RustFftBackend").finish_non_exhaustive()
    }
}

impl RustFftBackend {
    pub fn new() -> Self {
        Self {
            plans: Mutex::new(HashMap::new()),
        }
    }

    fn plan(&self, len: usize) -> (Arc<dyn Fft<f64>>, Arc<dyn Fft<f64>>) {
        let mut plans = self.plans.lock().expect("plan cache poisoned");
        plans
            .entry(len)
            .or_insert_with(|| {
                let mut planner = FftPlanner::new();
                (planner.plan_fft_forward(len), planner.plan_fft_inverse(len))
            })
            .clone()
    }
}

impl FftBackend for RustFftBackend {
    fn forward(&self, data: &mut [Complex64]) {
        if data.len() > 1 {
            self.plan(data.len()).0.process(data);
        }
    }

    fn inverse(&self, data: &mut [Complex64]) {
        if data.len() > 1 {
            self.plan(data.len()).1.process(data);
            let scale = 1.0 / data.len() as f64;
            data.iter_mut().for_each(|v| *v *= scale);
        }
    }
}

/// Work items on a dedicated rayon pool.
#[derive(Debug)]
pub struct RayonExecutor {
    pool: rayon::ThreadPool,
}

impl RayonExecutor {
    /// `threads = 0` uses rayon's default (all cores).
    pub fn new(threads: usize) -> Result<Self, rayon::ThreadPoolBuildError> {
        let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build()?;
        Ok(Self { pool })
    }

    pub fn threads(&self) -> usize {
        self.pool.current_num_threads()
    }
}

impl Executor for RayonExecutor {
    fn for_each_chunk<T, F>(&self, data: &mut [T], chunk_len: usize, f: F)
    where
        T: Send,
        F: Fn(usize, &mut [T]) + Sync + Send,
    {
        self.pool.install(|| {
            data.par_chunks_mut(chunk_len)
                .enumerate()
                .for_each(|(i, chunk)| f(i, chunk))
        });
    }

    fn map<R, F>(&self, count: usize, f: F) -> Vec<R>
    where
        R: Send,
        F: Fn(usize) -> R + Sync + Send,
    {
        self.pool.install(|| (0..count).into_par_iter().map(f).collect())
    }
}

pub type StdEngine = Engine<RustFftBackend, RayonExecutor>;

pub fn std_engine(threads: usize) -> Result<StdEngine, rayon::ThreadPoolBuildError> {
    Ok(Engine::new(RustFftBackend::new(), RayonExecutor::new(threads)?))
}
