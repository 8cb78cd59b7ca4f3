use std::f64::consts::PI;
use std::sync::Mutex;

use mixnum_core::fc::{self, FcDims, FcSubband, TransitionShape};
use mixnum_core::pipeline;
use mixnum_core::scenario::{derive_dims, Method, ScenarioSpec};
use mixnum_core::wola::{rc_window, wola_assemble, wola_symbol, WolaParams};
use mixnum_core::{Complex64, ComplexSignal, Engine, Executor, Radix2Fft};
use proptest::prelude::*;

fn tone(bin: i64, n: usize, len: usize) -> Complex64 {
    Complex64::from_polar(1.0, 2.0 * PI * (bin * n as i64).rem_euclid(len as i64) as f64 / len as f64)
}

fn multitone(tones: &[(i64, Complex64)], len: usize, period: usize) -> Vec<Complex64> {
    (0..len).map(|n| tones.iter().map(|&(k, a)| a * tone(k, n, period)).sum()).collect()
}

/// Runs the FC chain on nominal-rate inputs and returns the OLS output.
fn fc_chain(inputs: &[Vec<Complex64>], fc_dims: &FcDims, fs: f64) -> Vec<Complex64> {
    let eng = Engine::sequential(fc_dims.n);
    let spectra: Vec<_> = inputs
        .iter()
        .zip(&fc_dims.subbands)
        .map(|(x, sub)| {
            let w = fc::design_window(sub, fc_dims.transition_bins, fc_dims.transition_shape).unwrap();
            let blocks = fc::segment(&ComplexSignal::new(x.clone(), fs), sub);
            fc::subband_forward(&eng, &blocks, &w, sub, fc_dims.n).unwrap()
        })
        .collect();
    let (_, v_t) = fc::combine(&eng, &spectra).unwrap();
    fc::ols_extract(&v_t, fc_dims, fs * fc_dims.subbands[0].interpolation as f64)
        .unwrap()
        .samples
}

/// Output samples produced only by blocks that lie fully inside the input.
fn interior(sub: &FcSubband, input_len: usize) -> std::ops::Range<usize> {
    let last_full = (input_len + sub.overlap / 2 - sub.block_len) / sub.hop;
    sub.interpolation * sub.hop..sub.interpolation * sub.hop * (last_full + 1)
}

fn small_dims(center_bin: i64) -> FcDims {
    FcDims {
        n: 256,
        n_s: 128,
        bin_spacing_hz: 1.0,
        transition_bins: 4,
        transition_shape: TransitionShape::RaisedCosine,
        subbands: vec![FcSubband {
            block_len: 64,
            hop: 32,
            overlap: 32,
            interpolation: 4,
            center_bin,
            theta: center_bin as f64 / 2.0,
            passband: (-16, 16),
        }],
    }
}

#[test]
fn reference_all_pass_chain_matches_interpolation() {
    let dims = derive_dims(&ScenarioSpec::mixed_20mhz(Method::FcFOfdm, 5.0, 3)).unwrap();
    let fcd = dims.fc().unwrap();
    let len = dims.bwps[0].symbols * dims.bwps[0].stride();
    let tones: [Vec<(i64, Complex64)>; 2] = [
        vec![(-312, Complex64::new(0.5, 0.5)), (-1, Complex64::new(1.0, 0.0)), (311, Complex64::new(0.0, -0.7))],
        vec![(-266, Complex64::new(-0.3, 0.2)), (64, Complex64::new(0.9, 0.1)), (261, Complex64::new(0.4, 0.4))],
    ];
    let inputs: Vec<_> = tones.iter().zip(&fcd.subbands).map(|(t, s)| multitone(t, len, s.block_len)).collect();
    let y = fc_chain(&inputs, fcd, dims.fs_nominal);
    let mut err: f64 = 0.0;
    let mut peak: f64 = 0.0;
    for n in interior(&fcd.subbands[0], len) {
        let want: Complex64 = tones
            .iter()
            .zip(&fcd.subbands)
            .flat_map(|(t, s)| t.iter().map(move |&(k, a)| a * tone(s.center_bin + k, n, fcd.n)))
            .sum();
        err = err.max((y[n] - want).norm());
        peak = peak.max(want.norm());
    }
    assert!(err / peak <= 1e-9, "relative error {}", err / peak);
}

proptest! {
    #[test]
    fn all_pass_chain_matches_interpolation(
        center in -100i64..100,
        tones in prop::collection::vec((-16i64..16, -1.0f64..1.0, -1.0f64..1.0), 1..5),
    ) {
        let fcd = small_dims(center);
        let tones: Vec<(i64, Complex64)> = tones.into_iter().map(|(k, re, im)| (k, Complex64::new(re, im))).collect();
        let len = 400;
        let y = fc_chain(&[multitone(&tones, len, 64)], &fcd, 1.0);
        prop_assert_eq!(y.len(), 4 * len);
        let mut err: f64 = 0.0;
        for n in interior(&fcd.subbands[0], len) {
            let want: Complex64 = tones.iter().map(|&(k, a)| a * tone(center + k, n, 256)).sum();
            err = err.max((y[n] - want).norm());
        }
        let scale: f64 = tones.iter().map(|(_, a)| a.norm()).sum::<f64>().max(1e-3);
        prop_assert!(err <= 1e-9 * scale, "err {}", err);
    }
}

#[test]
fn phase_is_continuous_across_block_boundaries() {
    // odd centre bin: θ = c/2 is half-integer, so every other block is rotated
    let fcd = small_dims(37);
    let len = 512;
    let y = fc_chain(&[vec![Complex64::new(1.0, 0.0); len]], &fcd, 1.0);
    let step = tone(37, 1, 256);
    let range = interior(&fcd.subbands[0], len);
    for n in range.start..range.end - 1 {
        assert!((y[n + 1] - y[n] * step).norm() < 1e-12, "jump at {n}");
    }
    assert!((y[range.start] - tone(37, range.start, 256)).norm() < 1e-12);
}

#[test]
fn fc_window_transitions_are_complementary() {
    let dims = derive_dims(&ScenarioSpec::mixed_20mhz(Method::FcIcef, 5.0, 2)).unwrap();
    let fcd = dims.fc().unwrap();
    for sub in &fcd.subbands {
        let w = fc::design_window(sub, 12, TransitionShape::RaisedCosine).unwrap();
        let lo = &w.weights[w.lower_transition.clone()];
        let hi = &w.weights[w.upper_transition.clone()];
        for j in 0..12 {
            assert!((lo[j] + lo[11 - j] - 1.0).abs() <= 2.0 * f64::EPSILON);
            assert_eq!(lo[j], hi[11 - j]);
        }
        assert!(w.weights[w.passband.clone()].iter().all(|&v| v == 1.0));
    }
}

#[test]
fn wola_ramps_sum_to_unity_in_overlaps() {
    let params = WolaParams {
        body_len: 64,
        cp_len: 16,
        l_ext: 10,
    };
    let window = rc_window(params.window_len(), params.ramp_len()).unwrap();
    for i in 0..10 {
        assert!((window[i] + window[9 - i] - 1.0).abs() <= 2.0 * f64::EPSILON);
    }
    let body = vec![Complex64::new(1.0, -1.0); 64];
    let symbols: Vec<_> = (0..6).map(|_| wola_symbol(&body, &params, &window).unwrap()).collect();
    let out = wola_assemble(&symbols, params.stride(), 1.0).unwrap();
    // after the first ramp-up and before the last ramp-down the sum is flat
    for v in &out.samples[10..6 * params.stride()] {
        assert!((v - Complex64::new(1.0, -1.0)).norm() < 1e-15);
    }
}

/// Visits work items last-to-first and records the order it used.
struct Reversed {
    order: Mutex<Vec<usize>>,
}

impl Executor for Reversed {
    fn for_each_chunk<T, F>(&self, data: &mut [T], chunk_len: usize, f: F)
    where
        T: Send,
        F: Fn(usize, &mut [T]) + Sync + Send,
    {
        let mut chunks: Vec<_> = data.chunks_mut(chunk_len).enumerate().collect();
        while let Some((i, chunk)) = chunks.pop() {
            self.order.lock().unwrap().push(i);
            f(i, chunk);
        }
    }

    fn map<R, F>(&self, count: usize, f: F) -> Vec<R>
    where
        R: Send,
        F: Fn(usize) -> R + Sync + Send,
    {
        let mut out: Vec<(usize, R)> = (0..count).rev().map(|i| (i, f(i))).collect();
        out.reverse();
        out.into_iter().map(|(_, r)| r).collect()
    }
}

#[test]
fn results_do_not_depend_on_work_order() {
    for method in [Method::FcIcef, Method::EIcefWola, Method::IIcef] {
        let mut spec = ScenarioSpec::mixed_20mhz(method, 5.0, 2);
        spec.max_iterations = 5;
        let a = pipeline::run(&Engine::sequential(8192), &spec).unwrap().1;
        let rev = Engine::new(
            Radix2Fft::new(8192),
            Reversed {
                order: Mutex::new(Vec::new()),
            },
        );
        let b = pipeline::run(&rev, &spec).unwrap().1;
        assert!(rev.exec.order.lock().unwrap().first().is_some_and(|&i| i > 0));
        assert_eq!(a.signal.samples, b.signal.samples, "{method:?}");
        assert_eq!(a.iterations, b.iterations);
    }
}
