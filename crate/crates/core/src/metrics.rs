//! PAPR statistics, passband MSE, Welch PSD, ACLR and mask margin.

use alloc::collections::BTreeMap;
use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exec::{Engine, Executor};
use crate::fft::FftBackend;
use crate::math;
use crate::ofdm::{ofdm_demodulate, Rate, ResourceGrid};
use crate::scenario::{DerivedDims, MeasurementConfig};
use crate::signal::ComplexSignal;

/// Reported mask margin when every limit is `+∞`.
pub const UNBOUNDED_MARGIN_DB: f64 = 999.0;

/// `|y[n]|² / mean|y|²` for every sample.
pub fn papr_per_sample(y: &ComplexSignal) -> Result<Vec<f64>> {
    y.check_measurable()?;
    let mean = y.mean_power();
    if mean <= 0.0 {
        return Err(Error::ZeroPower);
    }
    Ok(y.samples.iter().map(|v| v.norm_sqr() / mean).collect())
}

/// Empirical `P(PAPR > t)` at every distinct observed value `t`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CcdfCurve {
    /// Distinct sample values in dB, ascending.
    pub thresholds_db: Vec<f64>,
    /// Exceedance probability at each threshold, non-increasing.
    pub probabilities: Vec<f64>,
    pub samples: usize,
}

pub fn ccdf(papr_linear: &[f64]) -> Result<CcdfCurve> {
    if papr_linear.is_empty() {
        return Err(Error::Empty);
    }
    if papr_linear.iter().any(|v| !v.is_finite() || *v < 0.0) {
        return Err(Error::NonFinite);
    }
    let mut sorted = papr_linear.to_vec();
    sorted.sort_unstable_by(f64::total_cmp);
    let n = sorted.len();
    let mut thresholds_db = Vec::new();
    let mut probabilities = Vec::new();
    let mut i = 0;
    while i < n {
        let v = sorted[i];
        let mut j = i + 1;
        while j < n && sorted[j] == v {
            j += 1;
        }
        thresholds_db.push(math::lin_to_db(v));
        probabilities.push((n - j) as f64 / n as f64);
        i = j;
    }
    Ok(CcdfCurve {
        thresholds_db,
        probabilities,
        samples: n,
    })
}

impl CcdfCurve {
    /// `P(PAPR > t_db)`.
    pub fn exceedance_at(&self, t_db: f64) -> f64 {
        let idx = self.thresholds_db.partition_point(|&t| t <= t_db);
        if idx == 0 {
            1.0
        } else {
            self.probabilities[idx - 1]
        }
    }

    /// Whether `p` is resolvable with this many samples (`n·p ≥ 1`).
    pub fn resolves(&self, p: f64) -> bool {
        self.samples as f64 * p >= 1.0
    }

    /// Samples the curve on a threshold grid.
    pub fn on_grid(&self, grid_db: &[f64]) -> Vec<(f64, f64)> {
        grid_db.iter().map(|&t| (t, self.exceedance_at(t))).collect()
    }
}

/// Smallest threshold whose exceedance is at most `p`, interpolated
/// linearly in probability between neighbouring curve points.
pub fn papr_at_probability(curve: &CcdfCurve, p: f64) -> f64 {
    let probs = &curve.probabilities;
    let ts = &curve.thresholds_db;
    let i = probs.partition_point(|&q| q > p);
    if i == 0 {
        return ts[0];
    }
    if i == probs.len() {
        return ts[ts.len() - 1];
    }
    let (p0, p1) = (probs[i - 1], probs[i]);
    let frac = (p0 - p) / (p0 - p1);
    ts[i - 1] + frac * (ts[i] - ts[i - 1])
}

/// Passband MSE per BWP in dB after a least-squares complex gain fit.
///
/// The receiver places its DFT window `cp_fraction · L_cp` samples before
/// the end of each CP.
pub fn mse_per_bwp<F: FftBackend, E: Executor>(
    engine: &Engine<F, E>,
    y: &ComplexSignal,
    reference: &[ResourceGrid],
    dims: &DerivedDims,
    cp_fraction: f64,
) -> Result<Vec<f64>> {
    if (y.sample_rate_hz - dims.fs_oversampled).abs() > 1e-6 {
        return Err(Error::SampleRateMismatch(dims.fs_oversampled, y.sample_rate_hz));
    }
    let mut out = Vec::with_capacity(reference.len());
    for grid in reference {
        let bwp = &dims.bwps[grid.bwp_index];
        let offset = -(math::round(cp_fraction * bwp.cp_len_os as f64) as i64);
        let rx = ofdm_demodulate(engine, y, dims, grid.bwp_index, offset, Rate::Oversampled)?;
        out.push(mse_db(&rx.values, &grid.values)?);
    }
    Ok(out)
}

/// `mean|Y/g − X|² / mean|X|²` in dB, `g` the LS gain of `Y` on `X`.
pub fn mse_db(received: &[Complex64], reference: &[Complex64]) -> Result<f64> {
    if received.len() != reference.len() {
        return Err(Error::LengthMismatch {
            expected: reference.len(),
            actual: received.len(),
        });
    }
    let ref_power: f64 = reference.iter().map(|x| x.norm_sqr()).sum();
    if ref_power <= 0.0 {
        return Err(Error::ZeroPower);
    }
    let cross: Complex64 = received.iter().zip(reference).map(|(y, x)| y * x.conj()).sum();
    let gain = cross / ref_power;
    if gain.norm() == 0.0 {
        return Err(Error::ZeroPower);
    }
    let err: f64 = received
        .iter()
        .zip(reference)
        .map(|(y, x)| (y / gain - x).norm_sqr())
        .sum();
    Ok(math::lin_to_db(err / ref_power))
}

/// Averaged periodogram in centred bin order.
#[derive(Debug, Clone, PartialEq)]
pub struct PsdEstimate {
    pub freqs_hz: Vec<f64>,
    /// Power per bin as a fraction of total signal power.
    pub power: Vec<f64>,
    /// Density in dB relative to total power per `rbw_hz`.
    pub db: Vec<f64>,
    pub rbw_hz: f64,
    pub bin_hz: f64,
    /// Absolute mean power of the measured signal.
    pub total_power: f64,
}

/// Power of two closest to `x` in log scale.
pub fn nearest_pow2(x: f64) -> usize {
    let e = math::round(libm::log2(x.max(1.0)));
    1usize << (e as u32)
}

const PSD_BATCH: usize = 32;

/// Hann-windowed Welch estimate, segment `2^round(log2(fs/rbw))`, 50% overlap.
pub fn psd_welch<F: FftBackend, E: Executor>(engine: &Engine<F, E>, y: &ComplexSignal, rbw_hz: f64) -> Result<PsdEstimate> {
    y.check_measurable()?;
    let seg = nearest_pow2(y.sample_rate_hz / rbw_hz);
    if y.len() < seg {
        return Err(Error::SignalTooShort {
            len: y.len(),
            segment: seg,
        });
    }
    let hop = seg / 2;
    let count = (y.len() - seg) / hop + 1;
    let window: Vec<f64> = (0..seg)
        .map(|n| 0.5 * (1.0 - math::cos(2.0 * math::PI * n as f64 / seg as f64)))
        .collect();
    let win_energy: f64 = window.iter().map(|w| w * w).sum();
    let batches = count.div_ceil(PSD_BATCH);
    let partial = engine.exec.map(batches, |b| {
        let mut acc = vec![0.0; seg];
        let mut buf = vec![Complex64::new(0.0, 0.0); seg];
        for s in b * PSD_BATCH..((b + 1) * PSD_BATCH).min(count) {
            let x = &y.samples[s * hop..s * hop + seg];
            for ((o, v), w) in buf.iter_mut().zip(x).zip(&window) {
                *o = v * *w;
            }
            engine.fft.forward(&mut buf);
            for (a, v) in acc.iter_mut().zip(&buf) {
                *a += v.norm_sqr();
            }
        }
        acc
    });
    let mut acc = vec![0.0; seg];
    for p in partial {
        for (a, v) in acc.iter_mut().zip(&p) {
            *a += v;
        }
    }
    let total = y.mean_power();
    if total <= 0.0 {
        return Err(Error::ZeroPower);
    }
    let scale = 1.0 / (count as f64 * seg as f64 * win_energy * total);
    let bin_hz = y.sample_rate_hz / seg as f64;
    let mut freqs_hz = Vec::with_capacity(seg);
    let mut power = Vec::with_capacity(seg);
    for i in 0..seg {
        let k = (i + seg / 2) % seg;
        freqs_hz.push((i as f64 - (seg / 2) as f64) * bin_hz);
        power.push(acc[k] * scale);
    }
    let db = power
        .iter()
        .map(|&p| math::lin_to_db((p * rbw_hz / bin_hz).max(1e-300)))
        .collect();
    Ok(PsdEstimate {
        freqs_hz,
        power,
        db,
        rbw_hz,
        bin_hz,
        total_power: total,
    })
}

impl PsdEstimate {
    /// Sum of `power` over bins whose centre lies within `bw/2` of `center`.
    pub fn band_power(&self, center_hz: f64, bw_hz: f64) -> f64 {
        self.freqs_hz
            .iter()
            .zip(&self.power)
            .filter(|(f, _)| math::abs(**f - center_hz) <= bw_hz / 2.0 + 1e-9)
            .map(|(_, p)| p)
            .sum()
    }

    fn nyquist_hz(&self) -> f64 {
        self.bin_hz * self.freqs_hz.len() as f64 / 2.0
    }
}

/// `10·log10(P_main / P_adj)` for each adjacent-channel offset.
pub fn aclr(psd: &PsdEstimate, measurement_bw_hz: f64, offsets_hz: &[f64]) -> Result<Vec<f64>> {
    let nyq = psd.nyquist_hz();
    let main = psd.band_power(0.0, measurement_bw_hz);
    offsets_hz
        .iter()
        .map(|&off| {
            if math::abs(off) + measurement_bw_hz / 2.0 > nyq + 1e-9 {
                return Err(Error::BeyondNyquist {
                    offset_hz: off,
                    nyquist_hz: nyq,
                });
            }
            let adj = psd.band_power(off, measurement_bw_hz).max(1e-300);
            Ok(math::lin_to_db(main / adj))
        })
        .collect()
}

/// Piecewise-linear limit in dB (relative to total power, per RBW) versus
/// offset from the channel edge, applied to both sides.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmissionMask {
    /// `(offset_hz, limit_db)`, offsets ascending.
    pub points: Vec<(f64, f64)>,
}

impl EmissionMask {
    pub fn new(points: Vec<(f64, f64)>) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::MaskDomain);
        }
        if points.iter().any(|(o, l)| !o.is_finite() || l.is_nan() || *o < 0.0)
            || points.windows(2).any(|w| w[1].0 < w[0].0)
        {
            return Err(Error::MaskDomain);
        }
        Ok(Self { points })
    }

    /// Limit at `offset`, `None` outside the mask's span.
    pub fn limit_at(&self, offset_hz: f64) -> Option<f64> {
        let pts = &self.points;
        let (first, last) = (pts[0].0, pts[pts.len() - 1].0);
        if offset_hz < first || offset_hz > last {
            return None;
        }
        let i = pts.partition_point(|p| p.0 <= offset_hz);
        if i == pts.len() {
            return Some(pts[i - 1].1);
        }
        let (a, b) = (pts[i - 1], pts[i]);
        if a.1 == b.1 {
            return Some(a.1);
        }
        if a.1.is_infinite() || b.1.is_infinite() {
            return Some(f64::INFINITY);
        }
        Some(a.1 + (b.1 - a.1) * (offset_hz - a.0) / (b.0 - a.0))
    }
}

/// `min(mask − psd)` over all PSD bins the mask covers; `+∞` is clamped to
/// [`UNBOUNDED_MARGIN_DB`].
pub fn mask_margin(psd: &PsdEstimate, mask: &EmissionMask, channel_bw_hz: f64) -> Result<f64> {
    let mut margin = f64::INFINITY;
    let mut covered = false;
    for (f, db) in psd.freqs_hz.iter().zip(&psd.db) {
        let off = math::abs(*f) - channel_bw_hz / 2.0;
        if let Some(limit) = mask.limit_at(off) {
            covered = true;
            margin = margin.min(limit - db);
        }
    }
    if !covered {
        return Err(Error::MaskDomain);
    }
    Ok(if margin.is_finite() { margin } else { UNBOUNDED_MARGIN_DB })
}

/// Count of work units per iteration number.
pub fn iteration_histogram(iterations: &[usize]) -> BTreeMap<usize, usize> {
    let mut h = BTreeMap::new();
    for &i in iterations {
        *h.entry(i).or_insert(0) += 1;
    }
    h
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub ccdf_probability: f64,
    pub papr_at_p_db: f64,
    pub mse_db: Vec<f64>,
    pub aclr_offsets_hz: Vec<f64>,
    pub aclr_db: Vec<f64>,
    pub mask_margin_db: Option<f64>,
    pub iterations_histogram: BTreeMap<usize, usize>,
    pub samples: usize,
}

impl MetricsReport {
    pub fn is_finite(&self) -> bool {
        self.papr_at_p_db.is_finite()
            && self.mse_db.iter().all(|v| v.is_finite())
            && self.aclr_db.iter().all(|v| v.is_finite())
            && self.mask_margin_db.map_or(true, f64::is_finite)
    }
}

/// Everything measured on one waveform.
#[derive(Debug, Clone)]
pub struct Measurement {
    pub report: MetricsReport,
    pub ccdf: CcdfCurve,
    pub psd: PsdEstimate,
}

pub fn measure<F: FftBackend, E: Executor>(
    engine: &Engine<F, E>,
    y: &ComplexSignal,
    reference: &[ResourceGrid],
    dims: &DerivedDims,
    cfg: &MeasurementConfig,
    mask: Option<&EmissionMask>,
    iterations: &[usize],
) -> Result<Measurement> {
    let papr = papr_per_sample(y)?;
    let curve = ccdf(&papr)?;
    drop(papr);
    let papr_at_p_db = papr_at_probability(&curve, cfg.ccdf_probability);
    let mse_db = mse_per_bwp(engine, y, reference, dims, cfg.receiver_cp_fraction)?;
    let psd = psd_welch(engine, y, cfg.psd_rbw_hz)?;
    let offsets = cfg.resolved_aclr_offsets(dims.channel_bw_hz);
    let aclr_db = aclr(&psd, cfg.aclr_measurement_bw_hz, &offsets)?;
    let mask_margin_db = mask.map(|m| mask_margin(&psd, m, dims.channel_bw_hz)).transpose()?;
    Ok(Measurement {
        report: MetricsReport {
            ccdf_probability: cfg.ccdf_probability,
            papr_at_p_db,
            mse_db,
            aclr_offsets_hz: offsets,
            aclr_db,
            mask_margin_db,
            iterations_histogram: iteration_histogram(iterations),
            samples: y.len(),
        },
        ccdf: curve,
        psd,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn papr_hand_example() {
        let y = ComplexSignal::new(vec![c(1.0, 0.0), c(1.0, 0.0), c(1.0, 0.0), c(0.0, 3.0)], 1.0);
        let p = papr_per_sample(&y).unwrap();
        let want = [1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0, 3.0];
        for (a, b) in p.iter().zip(want) {
            assert!((a - b).abs() < 1e-15);
        }
    }

    #[test]
    fn papr_single_spike() {
        let mut s = vec![c(0.0, 0.0); 10];
        s[4] = c(2.0, 0.0);
        let p = papr_per_sample(&ComplexSignal::new(s, 1.0)).unwrap();
        assert_eq!(p[4], 10.0);
        assert!(matches!(
            papr_per_sample(&ComplexSignal::new(vec![c(0.0, 0.0); 3], 1.0)),
            Err(Error::ZeroPower)
        ));
    }

    #[test]
    fn constant_envelope_is_zero_db() {
        let y = ComplexSignal::new((0..16).map(|i| math::cis(i as f64)).collect(), 1.0);
        assert!(papr_per_sample(&y).unwrap().iter().all(|p| (p - 1.0).abs() < 1e-12));
    }

    #[test]
    fn ccdf_step_for_equal_samples() {
        let c = ccdf(&[2.0; 50]).unwrap();
        let v = math::lin_to_db(2.0);
        assert_eq!(c.exceedance_at(v - 0.1), 1.0);
        assert_eq!(c.exceedance_at(v), 0.0);
        assert_eq!(c.exceedance_at(v + 1.0), 0.0);
    }

    #[test]
    fn ccdf_order_statistic() {
        let mut x: Vec<f64> = (0..999).map(|i| math::db_to_lin(7.9 * i as f64 / 998.0)).collect();
        x.push(math::db_to_lin(12.0));
        let c = ccdf(&x).unwrap();
        let v = papr_at_probability(&c, 1e-3);
        assert!((v - 7.9).abs() < 0.01, "{v}");
        assert!(c.resolves(1e-3));
        assert!(!c.resolves(1e-4));
    }

    #[test]
    fn mse_back_to_back_and_gain_invariance() {
        let x: Vec<Complex64> = (0..20).map(|i| c((i as f64).sin(), (i as f64).cos())).collect();
        assert!(mse_db(&x, &x).unwrap() < -200.0);
        let g = c(0.3, -1.2);
        let noisy: Vec<Complex64> = x.iter().enumerate().map(|(i, v)| v + c(0.01 * (i % 3) as f64, 0.0)).collect();
        let scaled: Vec<Complex64> = noisy.iter().map(|v| v * g).collect();
        let a = mse_db(&noisy, &x).unwrap();
        let b = mse_db(&scaled, &x).unwrap();
        assert!((a - b).abs() < 1e-9);
        assert!(mse_db(&x[..3], &x).is_err());
    }

    #[test]
    fn segment_for_reference_rates() {
        assert_eq!(nearest_pow2(122.88e6 / 30e3), 4096);
        assert_eq!(nearest_pow2(3.0), 4);
        assert_eq!(nearest_pow2(1.0), 1);
    }

    #[test]
    fn tone_psd_peak_and_closure() {
        let eng = Engine::sequential(64);
        let fs = 64.0;
        let y = ComplexSignal::new((0..4096).map(|n| math::cis(2.0 * math::PI * 5.0 * n as f64 / 64.0) * 2.0).collect(), fs);
        let p = psd_welch(&eng, &y, 1.0).unwrap();
        let (imax, _) = p.power.iter().enumerate().fold((0, 0.0), |acc, (i, &v)| if v > acc.1 { (i, v) } else { acc });
        assert_eq!(p.freqs_hz[imax], 5.0);
        let total: f64 = p.power.iter().sum();
        assert!((math::lin_to_db(total)).abs() < 0.1);
        assert_eq!(p.freqs_hz[0], -32.0);
    }

    #[test]
    fn psd_too_short() {
        let eng = Engine::sequential(64);
        let y = ComplexSignal::new(vec![c(1.0, 0.0); 10], 64.0);
        assert!(matches!(psd_welch(&eng, &y, 1.0), Err(Error::SignalTooShort { .. })));
    }

    fn synthetic_psd() -> PsdEstimate {
        let n = 100;
        let freqs_hz: Vec<f64> = (0..n).map(|i| i as f64 - 50.0).collect();
        let power: Vec<f64> = freqs_hz
            .iter()
            .map(|f| if f.abs() <= 9.0 { 1.0 } else if (f.abs() - 20.0).abs() <= 9.0 { 1e-6 } else { 0.0 })
            .collect();
        let db = power.iter().map(|p: &f64| math::lin_to_db(p.max(1e-300))).collect();
        PsdEstimate {
            freqs_hz,
            power,
            db,
            rbw_hz: 1.0,
            bin_hz: 1.0,
            total_power: 1.0,
        }
    }

    #[test]
    fn aclr_constructed_ratio() {
        let p = synthetic_psd();
        let a = aclr(&p, 18.0, &[-20.0, 20.0]).unwrap();
        assert!((a[0] - 60.0).abs() < 1e-9 && (a[1] - 60.0).abs() < 1e-9);
        assert!(matches!(aclr(&p, 18.0, &[45.0]), Err(Error::BeyondNyquist { .. })));
    }

    #[test]
    fn mask_margin_cases() {
        let p = synthetic_psd();
        let open = EmissionMask::new(vec![(0.0, f64::INFINITY), (30.0, f64::INFINITY)]).unwrap();
        assert_eq!(mask_margin(&p, &open, 20.0).unwrap(), UNBOUNDED_MARGIN_DB);
        // adjacent plateau sits at -60 dB, offsets 1..19 from the 10 Hz edge
        let touching = EmissionMask::new(vec![(0.5, -60.0), (30.0, -60.0)]).unwrap();
        assert_eq!(mask_margin(&p, &touching, 20.0).unwrap(), 0.0);
        let far = EmissionMask::new(vec![(1000.0, 0.0), (2000.0, 0.0)]).unwrap();
        assert!(matches!(mask_margin(&p, &far, 20.0), Err(Error::MaskDomain)));
        assert!(EmissionMask::new(vec![(5.0, 0.0), (1.0, 0.0)]).is_err());
    }

    #[test]
    fn mask_interpolates_linearly() {
        let m = EmissionMask::new(vec![(0.0, -10.0), (10.0, -30.0)]).unwrap();
        assert_eq!(m.limit_at(5.0), Some(-20.0));
        assert_eq!(m.limit_at(10.0), Some(-30.0));
        assert_eq!(m.limit_at(11.0), None);
    }

    #[test]
    fn histogram_counts() {
        let h = iteration_histogram(&[0, 3, 3, 20]);
        assert_eq!(h.get(&3), Some(&2));
        assert_eq!(h.len(), 3);
    }
}
