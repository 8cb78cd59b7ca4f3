//! Property checks on small deterministic instances.
//!
//! Every check is exact or held to machine precision; none is statistical.
//! The report contains no timing, so two runs produce identical output.

use std::f64::consts::PI;

use mixnum_core::fc::{self, FcWindow};
use mixnum_core::fc_icef::{baseband_inputs, block_iterate, build_bin_sets, ClipNoiseFilter};
use mixnum_core::fft::{dft, idft};
use mixnum_core::icef::{compute_ini, run_e_icef, EIcefOptions, IcefSettings};
use mixnum_core::metrics::{ccdf, papr_at_probability, papr_per_sample};
use mixnum_core::ofdm::{generate_grid, generate_grids, ofdm_demodulate, ofdm_modulate, Placement, Rate};
use mixnum_core::scenario::{derive_dims, BwpSpec, DerivedDims, Method, Modulation, ScenarioSpec};
use mixnum_core::{wola, Complex64, ComplexSignal, Engine, Executor, FftBackend};
use serde::Serialize;

use crate::error::CliResult;

const SEED: u64 = 20_240_601;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SelfTestReport {
    pub checks: Vec<Check>,
}

impl SelfTestReport {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn failed(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.passed)
    }
}

fn bounded(name: &str, value: f64, limit: f64, what: &str) -> Check {
    Check {
        name: name.to_string(),
        passed: value.is_finite() && value <= limit,
        detail: format!("{what} {value:.3e} (limit {limit:.0e})"),
    }
}

fn test_vector(n: usize, k: f64) -> Vec<Complex64> {
    (0..n)
        .map(|i| {
            let t = i as f64;
            Complex64::new((0.37 * t * k).sin() + 0.2 * (1.3 * t).cos(), (0.11 * t + k).cos() - 0.4 * (0.7 * t).sin())
        })
        .collect()
}

fn max_abs_diff(a: &[Complex64], b: &[Complex64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

fn max_abs(a: &[Complex64]) -> f64 {
    a.iter().map(|x| x.norm()).fold(0.0, f64::max)
}

/// Runs every property check. With `perturb_fc_window` the FC reconstruction
/// check uses a window with passband weights above unity and must fail.
pub fn run_selftest<F: FftBackend, E: Executor>(
    engine: &Engine<F, E>,
    perturb_fc_window: bool,
) -> CliResult<SelfTestReport> {
    let mut checks = vec![
        fft_round_trip(engine),
        fft_matches_direct_sum(engine),
        parseval(engine),
        papr_hand_oracle(),
        rc_ramp_complementarity(),
        ofdm_orthogonality(engine)?,
        ini_same_numerology(engine)?,
        fc_all_pass_reconstruction(engine, perturb_fc_window)?,
    ];
    checks.extend(fc_icef_properties(engine)?);
    checks.push(e_icef_confinement(engine)?);
    Ok(SelfTestReport { checks })
}

fn fft_round_trip<F: FftBackend, E: Executor>(engine: &Engine<F, E>) -> Check {
    let x = test_vector(4096, 1.0);
    let back = dft(&engine.fft, &x).and_then(|s| idft(&engine.fft, &s));
    match back {
        Ok(y) => bounded("fft_round_trip", max_abs_diff(&x, &y) / max_abs(&x), 1e-12, "relative error"),
        Err(e) => failed("fft_round_trip", e),
    }
}

fn fft_matches_direct_sum<F: FftBackend, E: Executor>(engine: &Engine<F, E>) -> Check {
    let n = 64;
    let x = test_vector(n, 2.0);
    let direct: Vec<Complex64> = (0..n)
        .map(|k| {
            x.iter()
                .enumerate()
                .map(|(i, v)| v * Complex64::from_polar(1.0, -2.0 * PI * ((i * k) % n) as f64 / n as f64))
                .sum()
        })
        .collect();
    match dft(&engine.fft, &x) {
        Ok(s) => bounded("fft_matches_direct_sum", max_abs_diff(&s, &direct) / max_abs(&direct), 1e-12, "relative error"),
        Err(e) => failed("fft_matches_direct_sum", e),
    }
}

fn parseval<F: FftBackend, E: Executor>(engine: &Engine<F, E>) -> Check {
    let x = test_vector(2048, 3.0);
    match dft(&engine.fft, &x) {
        Ok(s) => {
            let et: f64 = x.iter().map(|v| v.norm_sqr()).sum::<f64>() * x.len() as f64;
            let ef: f64 = s.iter().map(|v| v.norm_sqr()).sum();
            bounded("parseval", (et - ef).abs() / et, 1e-12, "relative energy mismatch")
        }
        Err(e) => failed("parseval", e),
    }
}

fn failed(name: &str, e: impl std::fmt::Display) -> Check {
    Check {
        name: name.to_string(),
        passed: false,
        detail: format!("error: {e}"),
    }
}

fn papr_hand_oracle() -> Check {
    let y = ComplexSignal::new(
        vec![
            Complex64::new(1.0, 0.0),
            Complex64::new(0.0, -1.0),
            Complex64::new(3.0, 0.0),
            Complex64::new(0.0, 3.0),
        ],
        1.0,
    );
    let expected = [0.2, 0.2, 1.8, 1.8];
    let passed = papr_per_sample(&y).map(|p| p == expected).unwrap_or(false);
    Check {
        name: "papr_hand_oracle".into(),
        passed,
        detail: "[1, -j, 3, 3j] -> [0.2, 0.2, 1.8, 1.8]".into(),
    }
}

fn rc_ramp_complementarity() -> Check {
    let ramp = 100;
    let worst = wola::rc_window(1000, ramp)
        .map(|w| (0..ramp).map(|i| (w[i] + w[ramp - 1 - i] - 1.0).abs()).fold(0.0, f64::max))
        .unwrap_or(f64::INFINITY);
    bounded("rc_ramp_complementarity", worst, 4.0 * f64::EPSILON, "max |w[i] + w[R-1-i] - 1|")
}

fn single_bwp_dims() -> CliResult<DerivedDims> {
    let mut spec = ScenarioSpec::mixed_20mhz(Method::None, 5.0, 4);
    spec.bwps.truncate(1);
    spec.bwps[0].center_offset_hz = 0.0;
    Ok(derive_dims(&spec)?)
}

fn ofdm_orthogonality<F: FftBackend, E: Executor>(engine: &Engine<F, E>) -> CliResult<Check> {
    let dims = single_bwp_dims()?;
    let grid = generate_grid(&dims.bwps[0], 0, SEED);
    let x = ofdm_modulate(engine, &grid, &dims, Rate::Oversampled, Placement::FullBand)?;
    let cp = dims.bwps[0].cp_len_os as i64;
    let mut worst: f64 = 0.0;
    for offset in [0, -cp / 2, -cp] {
        let rx = ofdm_demodulate(engine, &x, &dims, 0, offset, Rate::Oversampled)?;
        worst = worst.max(max_abs_diff(&rx.values, &grid.values));
    }
    Ok(bounded("ofdm_orthogonality", worst, 1e-10, "max symbol error over CP timings"))
}

/// Two 15 kHz subbands at the reference-scenario centres.
pub fn same_numerology_spec(duration_symbols_base: usize) -> ScenarioSpec {
    let mut spec = ScenarioSpec::mixed_20mhz(Method::EIcefWola, 5.0, duration_symbols_base);
    spec.bwps = vec![
        BwpSpec {
            scs_hz: 15e3,
            num_prbs: 48,
            modulation: Modulation::Qpsk,
            center_offset_hz: -5e6,
        },
        BwpSpec {
            scs_hz: 15e3,
            num_prbs: 48,
            modulation: Modulation::Qam16,
            center_offset_hz: 5e6,
        },
    ];
    spec
}

fn ini_same_numerology<F: FftBackend, E: Executor>(engine: &Engine<F, E>) -> CliResult<Check> {
    let dims = derive_dims(&same_numerology_spec(3))?;
    let grids = generate_grids(&dims, SEED);
    let subbands = grids
        .iter()
        .map(|g| ofdm_modulate(engine, g, &dims, Rate::Oversampled, Placement::FullBand))
        .collect::<Result<Vec<_>, _>>()?;
    let bwp = &dims.bwps[0];
    let slots: Vec<usize> = bwp
        .active
        .iter()
        .map(|&k| k.rem_euclid(bwp.ofdm_len_os as i64) as usize)
        .collect();
    let mut worst: f64 = 0.0;
    let mut scale: f64 = 0.0;
    for s in 0..bwp.symbols {
        let z = compute_ini(&engine.fft, &subbands, 0, s, &dims)?;
        scale = scale.max(max_abs(&z));
        worst = slots.iter().map(|&k| z[k].norm()).fold(worst, f64::max);
    }
    Ok(bounded("ini_same_numerology", worst / scale, 1e-10, "active-bin INI relative to leakage peak"))
}

/// Multi-tone input per subband: `(baseband bin, amplitude)`, inside the
/// Reference-scenario passbands.
const TONES: [&[(i64, (f64, f64))]; 2] = [
    &[(-300, (1.0, 0.0)), (-17, (0.3, -0.8)), (5, (-0.5, 0.5)), (311, (0.0, 0.9))],
    &[(-266, (0.7, 0.7)), (0, (1.0, 0.0)), (97, (-0.2, 0.4)), (261, (0.6, -0.3))],
];

fn tone(bin: i64, n: usize, len: usize) -> Complex64 {
    Complex64::from_polar(1.0, 2.0 * PI * (bin * n as i64).rem_euclid(len as i64) as f64 / len as f64)
}

/// FC chain against direct interpolation: with tones inside the passbands
/// every fully occupied block must reproduce `Σ a·exp(j2π(c + k)n/N)`.
pub fn fc_reconstruction_error<F: FftBackend, E: Executor>(
    engine: &Engine<F, E>,
    perturb: impl Fn(usize, &mut FcWindow),
) -> CliResult<f64> {
    let dims = derive_dims(&ScenarioSpec::mixed_20mhz(Method::FcFOfdm, 5.0, 3))?;
    let fc_dims = dims.fc()?;
    let len = dims.bwps[0].symbols * dims.bwps[0].stride();
    let mut spectra = Vec::new();
    for (m, sub) in fc_dims.subbands.iter().enumerate() {
        let x: Vec<Complex64> = (0..len)
            .map(|n| TONES[m].iter().map(|&(k, (re, im))| Complex64::new(re, im) * tone(k, n, sub.block_len)).sum())
            .collect();
        let mut window = fc::design_window(sub, fc_dims.transition_bins, fc_dims.transition_shape)?;
        perturb(m, &mut window);
        let blocks = fc::segment(&ComplexSignal::new(x, dims.fs_nominal), sub);
        spectra.push(fc::subband_forward(engine, &blocks, &window, sub, fc_dims.n)?);
    }
    let (_, v_t) = fc::combine(engine, &spectra)?;
    let y = fc::ols_extract(&v_t, fc_dims, dims.fs_oversampled)?;

    let sub = &fc_dims.subbands[0];
    let last_full = (len + sub.overlap / 2 - sub.block_len) / sub.hop;
    let valid = sub.interpolation * sub.hop..sub.interpolation * sub.hop * (last_full + 1);
    let mut err: f64 = 0.0;
    let mut peak: f64 = 0.0;
    for n in valid {
        let oracle: Complex64 = fc_dims
            .subbands
            .iter()
            .zip(TONES)
            .flat_map(|(s, tones)| tones.iter().map(move |&(k, a)| (s.center_bin + k, a)))
            .map(|(bin, (re, im))| Complex64::new(re, im) * tone(bin, n, fc_dims.n))
            .sum();
        err = err.max((y.samples[n] - oracle).norm());
        peak = peak.max(oracle.norm());
    }
    Ok(err / peak)
}

fn fc_all_pass_reconstruction<F: FftBackend, E: Executor>(engine: &Engine<F, E>, perturb: bool) -> CliResult<Check> {
    let rel = fc_reconstruction_error(engine, |m, w| {
        if perturb && m == 0 {
            let pass = w.passband.clone();
            w.weights[pass].iter_mut().for_each(|v| *v *= 1.5);
        }
    })?;
    Ok(bounded("fc_all_pass_reconstruction", rel, 1e-9, "relative error vs interpolation oracle"))
}

fn fc_icef_properties<F: FftBackend, E: Executor>(engine: &Engine<F, E>) -> CliResult<Vec<Check>> {
    let spec = ScenarioSpec::mixed_20mhz(Method::FcIcef, 5.0, 3);
    let dims = derive_dims(&spec)?;
    let grids = generate_grids(&dims, SEED);
    let inputs = baseband_inputs(engine, &grids, &dims)?;
    let syn = fc::synthesize(engine, &inputs, &dims)?;
    let bins = build_bin_sets(dims.fc()?, &syn.windows, dims.channel_bw_hz)?;
    let h = ClipNoiseFilter::from_bins(&bins);
    let amp = (syn.output.mean_power() * 10f64.powf(spec.papr_target_db / 10.0)).sqrt();
    let forbidden: Vec<usize> = bins.k_f.iter().chain(&bins.k_null).copied().collect();

    let mut leaked = 0usize;
    let mut iterations = 0usize;
    let mut reference_run = Vec::new();
    let mut second_run = Vec::new();
    for r in 0..syn.v_f.num_blocks {
        let v = syn.v_f.block(r);
        let a = block_iterate(&engine.fft, v, &h, amp, spec.max_iterations, spec.stop_epsilon_db)?;
        let b = block_iterate(&engine.fft, v, &h, amp, spec.max_iterations, spec.stop_epsilon_db)?;
        leaked += forbidden.iter().filter(|&&k| a.spectrum[k] != v[k]).count();
        iterations += a.iterations;
        reference_run.extend(a.time);
        second_run.extend(b.time);
    }
    let confinement = Check {
        name: "fc_icef_confinement".into(),
        passed: leaked == 0 && iterations > 0,
        detail: format!(
            "{leaked} changed bins in K_F ∪ K_null over {} blocks, {iterations} iterations",
            syn.v_f.num_blocks
        ),
    };
    let identical = reference_run.len() == second_run.len()
        && reference_run.iter().zip(&second_run).all(|(x, y)| x.re.to_bits() == y.re.to_bits() && x.im.to_bits() == y.im.to_bits());
    let papr = papr_per_sample(&ComplexSignal::new(reference_run, dims.fs_oversampled))?;
    let curve = ccdf(&papr)?;
    let monotone = curve.probabilities.windows(2).all(|w| w[1] <= w[0]);
    let ps = [0.1, 0.03, 0.01, 0.003, 0.001];
    let quantiles: Vec<f64> = ps.iter().map(|&p| papr_at_probability(&curve, p)).collect();
    let ordered = quantiles.windows(2).all(|w| w[1] >= w[0]);
    Ok(vec![
        confinement,
        Check {
            name: "block_determinism".into(),
            passed: identical,
            detail: "repeated block processing is bit-identical".into(),
        },
        Check {
            name: "ccdf_monotonicity".into(),
            passed: monotone && ordered,
            detail: format!("{} distinct levels, PAPR at decreasing p: {quantiles:.3?}", curve.thresholds_db.len()),
        },
    ])
}

fn e_icef_confinement<F: FftBackend, E: Executor>(engine: &Engine<F, E>) -> CliResult<Check> {
    let spec = ScenarioSpec::mixed_20mhz(Method::EIcefWola, 5.0, 2);
    let dims = derive_dims(&spec)?;
    let grids = generate_grids(&dims, SEED);
    let mut settings = IcefSettings::from_spec(&spec);
    settings.max_iterations = 4;
    settings.threshold_passes = 1;
    let out = run_e_icef(engine, &grids, &dims, &settings, EIcefOptions::default())?;
    let mut worst_off: f64 = 0.0;
    let mut peak_on: f64 = 0.0;
    for (m, bwp) in dims.bwps.iter().enumerate() {
        let before = ofdm_modulate(engine, &grids[m], &dims, Rate::Oversampled, Placement::FullBand)?;
        let after = ofdm_modulate(engine, &out.grids[m], &dims, Rate::Oversampled, Placement::FullBand)?;
        let len = bwp.ofdm_len_os;
        let mut active = vec![false; len];
        for &k in &bwp.active {
            active[k.rem_euclid(len as i64) as usize] = true;
        }
        for s in 0..bwp.symbols {
            let start = s * bwp.stride_os() + bwp.cp_len_os;
            let delta: Vec<Complex64> = after.samples[start..start + len]
                .iter()
                .zip(&before.samples[start..start + len])
                .map(|(a, b)| a - b)
                .collect();
            let spectrum = dft(&engine.fft, &delta)?;
            for (k, v) in spectrum.iter().enumerate() {
                if active[k] {
                    peak_on = peak_on.max(v.norm());
                } else {
                    worst_off = worst_off.max(v.norm());
                }
            }
        }
    }
    let mut check = bounded(
        "e_icef_confinement",
        worst_off / peak_on,
        1e-12,
        "off-active grid delta relative to active delta",
    );
    check.passed &= out.iterations.first().is_some_and(|&n| n > 0);
    Ok(check)
}
