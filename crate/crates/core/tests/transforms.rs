use std::f64::consts::PI;

use mixnum_core::fft::{dft, idft};
use mixnum_core::{Complex64, Error, Radix2Fft};
use proptest::prelude::*;

fn naive_dft(x: &[Complex64]) -> Vec<Complex64> {
    let n = x.len();
    (0..n)
        .map(|k| {
            x.iter()
                .enumerate()
                .map(|(i, v)| v * Complex64::from_polar(1.0, -2.0 * PI * ((i * k) % n) as f64 / n as f64))
                .sum()
        })
        .collect()
}

fn signal(max_log2: u32) -> impl Strategy<Value = Vec<Complex64>> {
    (0..=max_log2).prop_flat_map(|e| prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 1usize << e))
        .prop_map(|v| v.into_iter().map(|(re, im)| Complex64::new(re, im)).collect())
}

fn max_err(a: &[Complex64], b: &[Complex64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

proptest! {
    #[test]
    fn forward_matches_direct_sum(x in signal(8)) {
        let fft = Radix2Fft::new(256);
        let fast = dft(&fft, &x).unwrap();
        let slow = naive_dft(&x);
        let scale = slow.iter().map(|v| v.norm()).fold(1.0, f64::max);
        prop_assert!(max_err(&fast, &slow) <= 1e-12 * scale);
    }

    #[test]
    fn round_trip(x in signal(12)) {
        let fft = Radix2Fft::new(1024);
        let back = idft(&fft, &dft(&fft, &x).unwrap()).unwrap();
        prop_assert!(max_err(&back, &x) <= 1e-12);
    }

    #[test]
    fn parseval(x in signal(11)) {
        let fft = Radix2Fft::new(2048);
        let s = dft(&fft, &x).unwrap();
        let et: f64 = x.iter().map(|v| v.norm_sqr()).sum::<f64>() * x.len() as f64;
        let ef: f64 = s.iter().map(|v| v.norm_sqr()).sum();
        prop_assert!((et - ef).abs() <= 1e-12 * et.max(1e-300));
    }

    #[test]
    fn inverse_matches_conjugated_direct_sum(x in signal(7)) {
        let fft = Radix2Fft::new(128);
        let n = x.len() as f64;
        let conj: Vec<Complex64> = x.iter().map(|v| v.conj()).collect();
        let oracle: Vec<Complex64> = naive_dft(&conj).iter().map(|v| v.conj() / n).collect();
        prop_assert!(max_err(&idft(&fft, &x).unwrap(), &oracle) <= 1e-12);
    }
}

#[test]
fn impulse_and_tone() {
    let fft = Radix2Fft::new(16);
    let mut x = vec![Complex64::new(0.0, 0.0); 16];
    x[0] = Complex64::new(1.0, 0.0);
    assert!(dft(&fft, &x).unwrap().iter().all(|v| (v - Complex64::new(1.0, 0.0)).norm() < 1e-15));
    let tone: Vec<Complex64> = (0..16).map(|n| Complex64::from_polar(1.0, 2.0 * PI * 3.0 * n as f64 / 16.0)).collect();
    let s = dft(&fft, &tone).unwrap();
    for (k, v) in s.iter().enumerate() {
        let want = if k == 3 { 16.0 } else { 0.0 };
        assert!((v.norm() - want).abs() < 1e-12, "bin {k}");
    }
}

#[test]
fn transforms_beyond_table_size_still_work() {
    let fft = Radix2Fft::new(8);
    let x: Vec<Complex64> = (0..64).map(|n| Complex64::new((n as f64).sin(), 0.5)).collect();
    assert!(max_err(&dft(&fft, &x).unwrap(), &naive_dft(&x)) < 1e-11);
}

#[test]
fn non_power_of_two_is_rejected() {
    let fft = Radix2Fft::new(16);
    let x = vec![Complex64::new(1.0, 0.0); 12];
    assert_eq!(dft(&fft, &x), Err(Error::NotPowerOfTwo(12)));
    assert_eq!(idft(&fft, &x), Err(Error::NotPowerOfTwo(12)));
}
