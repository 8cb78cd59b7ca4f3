//! Mixed-numerology CP-OFDM synthesis with PAPR reduction.
//!
//! This crate is `no_std` (it needs `alloc`) and contains every numeric
//! kernel: scenario expansion, CP-OFDM modulation, WOLA shaping, the
//! symbol-level ICEF family (independent and INI-cancelling), fast-convolution
//! filtered OFDM with block-level ICEF, and the measurement suite (PAPR/CCDF,
//! passband MSE, Welch PSD, ACLR, emission-mask margin).
//!
//! Transforms and parallelism are injected. [`fft::FftBackend`] abstracts the
//! DFT (a radix-2 implementation ships here), and [`exec::Executor`] abstracts
//! how independent work items (symbols, FC blocks) are scheduled. Every
//! reduction is performed sequentially, so results do not depend on the
//! executor.
//!
//! ```text
//! ScenarioSpec ──derive_dims──▶ DerivedDims
//!      │
//!      ├─ NONE / I_ICEF / E_ICEF_WOLA : grids → CP-OFDM (oversampled) → [ICEF] → WOLA → Σ
//!      └─ FC_F_OFDM / FC_ICEF         : grids → CP-OFDM (nominal) → subband FC → Σ → [block ICEF] → OLS
//! ```
#![no_std]
#![forbid(unsafe_code)]

extern crate alloc;

pub mod error;
pub mod exec;
pub mod fc;
pub mod fc_icef;
pub mod fft;
pub mod icef;
pub mod math;
pub mod metrics;
pub mod ofdm;
pub mod pipeline;
pub mod scenario;
pub mod signal;
pub mod wola;

pub use error::{Error, Result};
pub use exec::{Engine, Executor, Sequential};
pub use fft::{FftBackend, Radix2Fft};
pub use num_complex::Complex64;
pub use signal::ComplexSignal;
