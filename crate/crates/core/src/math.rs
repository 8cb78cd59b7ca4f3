//! Float helpers over `libm`, since `core` has no transcendental functions.

use num_complex::Complex64;

pub use core::f64::consts::PI;

#[inline]
pub fn sqrt(x: f64) -> f64 {
    libm::sqrt(x)
}

#[inline]
pub fn cos(x: f64) -> f64 {
    libm::cos(x)
}

#[inline]
pub fn sin(x: f64) -> f64 {
    libm::sin(x)
}

#[inline]
pub fn log10(x: f64) -> f64 {
    libm::log10(x)
}

#[inline]
pub fn round(x: f64) -> f64 {
    libm::round(x)
}

#[inline]
pub fn floor(x: f64) -> f64 {
    libm::floor(x)
}

#[inline]
pub fn ceil(x: f64) -> f64 {
    libm::ceil(x)
}

#[inline]
pub fn abs(x: f64) -> f64 {
    libm::fabs(x)
}

/// `10^(db/10)`.
#[inline]
pub fn db_to_lin(db: f64) -> f64 {
    libm::pow(10.0, db / 10.0)
}

/// `10·log10(x)`.
#[inline]
pub fn lin_to_db(x: f64) -> f64 {
    10.0 * libm::log10(x)
}

/// `exp(jφ)`.
#[inline]
pub fn cis(phase: f64) -> Complex64 {
    Complex64::new(libm::cos(phase), libm::sin(phase))
}

pub fn mean_power(x: &[Complex64]) -> f64 {
    if x.is_empty() {
        return 0.0;
    }
    x.iter().map(|v| v.norm_sqr()).sum::<f64>() / x.len() as f64
}

pub fn peak_power(x: &[Complex64]) -> f64 {
    x.iter().map(|v| v.norm_sqr()).fold(0.0, f64::max)
}

/// Signed index wrapped onto `[0, len)`.
#[inline]
pub fn wrap_index(k: i64, len: usize) -> usize {
    k.rem_euclid(len as i64) as usize
}

pub fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

pub fn lcm(a: u64, b: u64) -> u64 {
    a / gcd(a, b) * b
}
