//! Experiment descriptions and the dimensions derived from them.
//!
//! A [`ScenarioSpec`] is the declarative input (channel, BWPs, method,
//! targets); [`derive_dims`] expands it into every transform size, CP length,
//! symbol count and subcarrier index map the rest of the crate consumes.
//!
//! Frequencies are expressed on a 15 kHz reference grid. The nominal sample
//! rate is `nominal_transform · 15 kHz`, so a BWP with subcarrier spacing
//! `scs` uses a nominal transform of `nominal_transform · 15 kHz / scs`.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fc::{FcConfig, FcDims};
use crate::math;

/// Subcarrier spacing the nominal transform size refers to.
pub const REFERENCE_SCS_HZ: f64 = 15e3;

/// Subcarriers per physical resource block.
pub const SUBCARRIERS_PER_PRB: usize = 12;

const ALLOWED_SCS_HZ: [f64; 4] = [15e3, 30e3, 60e3, 120e3];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Modulation {
    #[serde(rename = "QPSK")]
    Qpsk,
    #[serde(rename = "16QAM")]
    Qam16,
    #[serde(rename = "64QAM")]
    Qam64,
    #[serde(rename = "256QAM")]
    Qam256,
}

impl Modulation {
    pub fn bits_per_symbol(self) -> usize {
        match self {
            Modulation::Qpsk => 2,
            Modulation::Qam16 => 4,
            Modulation::Qam64 => 6,
            Modulation::Qam256 => 8,
        }
    }

    pub fn order(self) -> usize {
        1 << self.bits_per_symbol()
    }

    pub fn name(self) -> &'static str {
        match self {
            Modulation::Qpsk => "QPSK",
            Modulation::Qam16 => "16QAM",
            Modulation::Qam64 => "64QAM",
            Modulation::Qam256 => "256QAM",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Method {
    #[serde(rename = "NONE")]
    None,
    #[serde(rename = "I_ICEF")]
    IIcef,
    #[serde(rename = "E_ICEF_WOLA")]
    EIcefWola,
    #[serde(rename = "FC_F_OFDM")]
    FcFOfdm,
    #[serde(rename = "FC_ICEF")]
    FcIcef,
}

impl Method {
    pub const ALL: [Method; 5] = [
        Method::None,
        Method::IIcef,
        Method::EIcefWola,
        Method::FcFOfdm,
        Method::FcIcef,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Method::None => "NONE",
            Method::IIcef => "I_ICEF",
            Method::EIcefWola => "E_ICEF_WOLA",
            Method::FcFOfdm => "FC_F_OFDM",
            Method::FcIcef => "FC_ICEF",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|m| m.name() == name)
    }

    /// Output is shaped with per-BWP WOLA windows.
    pub fn uses_wola(self) -> bool {
        matches!(self, Method::None | Method::IIcef | Method::EIcefWola)
    }

    /// Output goes through fast-convolution filtering.
    pub fn uses_fc(self) -> bool {
        matches!(self, Method::FcFOfdm | Method::FcIcef)
    }

    /// Runs an iterative PAPR reduction stage.
    pub fn reduces_papr(self) -> bool {
        matches!(self, Method::IIcef | Method::EIcefWola | Method::FcIcef)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BwpSpec {
    pub scs_hz: f64,
    pub num_prbs: usize,
    pub modulation: Modulation,
    pub center_offset_hz: f64,
}

impl BwpSpec {
    pub fn num_subcarriers(&self) -> usize {
        SUBCARRIERS_PER_PRB * self.num_prbs
    }
}

/// Measurement settings shared by every method.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MeasurementConfig {
    /// CCDF probability at which PAPR is reported.
    #[serde(default = "defaults::ccdf_probability")]
    pub ccdf_probability: f64,
    #[serde(default = "defaults::psd_rbw_hz")]
    pub psd_rbw_hz: f64,
    /// Integration bandwidth of the main and adjacent channels.
    #[serde(default = "defaults::aclr_measurement_bw_hz")]
    pub aclr_measurement_bw_hz: f64,
    /// Adjacent-channel centres relative to the carrier. Empty means ±channel bandwidth.
    #[serde(default)]
    pub aclr_offsets_hz: Vec<f64>,
    /// Receiver FFT window advance into the CP, as a fraction of each BWP's
    /// CP length. The default keeps the window clear of the WOLA ramp.
    #[serde(default = "defaults::receiver_cp_fraction")]
    pub receiver_cp_fraction: f64,
    /// Emission mask CSV; resolved relative to the scenario file by the loader.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mask_file: Option<String>,
}

impl MeasurementConfig {
    /// Adjacent-channel offsets, `±channel_bw_hz` when none are configured.
    pub fn resolved_aclr_offsets(&self, channel_bw_hz: f64) -> Vec<f64> {
        if self.aclr_offsets_hz.is_empty() {
            alloc::vec![-channel_bw_hz, channel_bw_hz]
        } else {
            self.aclr_offsets_hz.clone()
        }
    }
}

impl Default for MeasurementConfig {
    fn default() -> Self {
        Self {
            ccdf_probability: defaults::ccdf_probability(),
            psd_rbw_hz: defaults::psd_rbw_hz(),
            aclr_measurement_bw_hz: defaults::aclr_measurement_bw_hz(),
            aclr_offsets_hz: Vec::new(),
            receiver_cp_fraction: defaults::receiver_cp_fraction(),
            mask_file: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioSpec {
    pub channel_bw_hz: f64,
    #[serde(default = "defaults::nominal_transform")]
    pub nominal_transform: usize,
    #[serde(default = "defaults::oversampling")]
    pub oversampling: usize,
    pub bwps: Vec<BwpSpec>,
    #[serde(default = "defaults::papr_target_db")]
    pub papr_target_db: f64,
    #[serde(default = "defaults::max_iterations")]
    pub max_iterations: usize,
    #[serde(default = "defaults::stop_epsilon_db")]
    pub stop_epsilon_db: f64,
    /// Clipping-threshold passes. The first derives `A` from the unprocessed
    /// signal; each further pass rederives it from the previous output's
    /// mean power, so the target holds against the power the PAPR is
    /// measured with.
    #[serde(default = "defaults::threshold_passes")]
    pub threshold_passes: usize,
    #[serde(default = "defaults::method")]
    pub method: Method,
    #[serde(default = "defaults::seed")]
    pub seed: u64,
    #[serde(default = "defaults::duration_symbols_base")]
    pub duration_symbols_base: usize,
    #[serde(default = "defaults::wola_extension_factor")]
    pub wola_extension_factor: f64,
    #[serde(default)]
    pub fc: FcConfig,
    #[serde(default)]
    pub measurement: MeasurementConfig,
}

pub(crate) mod defaults {
    use super::Method;

    pub fn nominal_transform() -> usize {
        2048
    }
    pub fn oversampling() -> usize {
        4
    }
    pub fn papr_target_db() -> f64 {
        5.0
    }
    pub fn max_iterations() -> usize {
        20
    }
    pub fn receiver_cp_fraction() -> f64 {
        0.25
    }
    pub fn threshold_passes() -> usize {
        3
    }
    pub fn stop_epsilon_db() -> f64 {
        0.01
    }
    pub fn method() -> Method {
        Method::None
    }
    pub fn seed() -> u64 {
        1
    }
    pub fn duration_symbols_base() -> usize {
        512
    }
    pub fn wola_extension_factor() -> f64 {
        0.7
    }
    pub fn ccdf_probability() -> f64 {
        1e-3
    }
    pub fn psd_rbw_hz() -> f64 {
        30e3
    }
    pub fn aclr_measurement_bw_hz() -> f64 {
        18e6
    }
}

impl ScenarioSpec {
    /// Two-BWP 20 MHz scenario: 15 kHz/52 PRB/QPSK at −5 MHz and
    /// 60 kHz/11 PRB/64QAM at +5 MHz, all other parameters at their defaults.
    pub fn mixed_20mhz(method: Method, papr_target_db: f64, duration_symbols_base: usize) -> Self {
        Self {
            channel_bw_hz: 20e6,
            nominal_transform: defaults::nominal_transform(),
            oversampling: defaults::oversampling(),
            bwps: alloc::vec![
                BwpSpec {
                    scs_hz: 15e3,
                    num_prbs: 52,
                    modulation: Modulation::Qpsk,
                    center_offset_hz: -5e6,
                },
                BwpSpec {
                    scs_hz: 60e3,
                    num_prbs: 11,
                    modulation: Modulation::Qam64,
                    center_offset_hz: 5e6,
                },
            ],
            papr_target_db,
            max_iterations: defaults::max_iterations(),
            stop_epsilon_db: defaults::stop_epsilon_db(),
            threshold_passes: defaults::threshold_passes(),
            method,
            seed: defaults::seed(),
            duration_symbols_base,
            wola_extension_factor: defaults::wola_extension_factor(),
            fc: FcConfig::default(),
            measurement: MeasurementConfig::default(),
        }
    }

    pub fn fs_nominal_hz(&self) -> f64 {
        self.nominal_transform as f64 * REFERENCE_SCS_HZ
    }

    /// Adjacent-channel offsets with the empty-list default resolved.
    pub fn aclr_offsets_hz(&self) -> Vec<f64> {
        self.measurement.resolved_aclr_offsets(self.channel_bw_hz)
    }

    /// Checks every field invariant; the error names the offending field.
    pub fn validate(&self) -> Result<()> {
        let positive = |field: &str, v: f64| {
            if v.is_finite() && v > 0.0 {
                Ok(())
            } else {
                Err(Error::scenario(field, format!("must be finite and > 0, got {v}")))
            }
        };

        positive("channel_bw_hz", self.channel_bw_hz)?;
        if !self.nominal_transform.is_power_of_two() || self.nominal_transform < 16 {
            return Err(Error::scenario(
                "nominal_transform",
                format!("must be a power of two ≥ 16, got {}", self.nominal_transform),
            ));
        }
        if self.oversampling == 0 || !self.oversampling.is_power_of_two() {
            return Err(Error::scenario(
                "oversampling",
                format!("must be a power of two ≥ 1, got {}", self.oversampling),
            ));
        }
        if self.channel_bw_hz > self.fs_nominal_hz() {
            return Err(Error::scenario(
                "channel_bw_hz",
                format!(
                    "{} Hz exceeds the nominal sample rate {} Hz",
                    self.channel_bw_hz,
                    self.fs_nominal_hz()
                ),
            ));
        }
        if self.bwps.is_empty() {
            return Err(Error::scenario("bwps", "at least one BWP is required"));
        }
        for (m, bwp) in self.bwps.iter().enumerate() {
            if !ALLOWED_SCS_HZ.contains(&bwp.scs_hz) {
                return Err(Error::scenario(
                    format!("bwps[{m}].scs_hz"),
                    format!("must be one of 15e3, 30e3, 60e3, 120e3, got {}", bwp.scs_hz),
                ));
            }
            if bwp.num_prbs == 0 {
                return Err(Error::scenario(format!("bwps[{m}].num_prbs"), "must be ≥ 1"));
            }
            if !bwp.center_offset_hz.is_finite() {
                return Err(Error::scenario(
                    format!("bwps[{m}].center_offset_hz"),
                    "must be finite",
                ));
            }
            let half_occupied = 0.5 * bwp.num_subcarriers() as f64 * bwp.scs_hz;
            if half_occupied + math::abs(bwp.center_offset_hz) > 0.5 * self.channel_bw_hz {
                return Err(Error::scenario(
                    format!("bwps[{m}]"),
                    format!(
                        "occupied band ±{half_occupied} Hz around {} Hz does not fit the ±{} Hz channel",
                        bwp.center_offset_hz,
                        0.5 * self.channel_bw_hz
                    ),
                ));
            }
        }
        positive("papr_target_db", self.papr_target_db)?;
        if self.threshold_passes == 0 {
            return Err(Error::scenario("threshold_passes", "must be ≥ 1"));
        }
        if !(self.stop_epsilon_db.is_finite() && self.stop_epsilon_db >= 0.0) {
            return Err(Error::scenario("stop_epsilon_db", "must be finite and ≥ 0"));
        }
        if self.duration_symbols_base == 0 {
            return Err(Error::scenario("duration_symbols_base", "must be ≥ 1"));
        }
        if self.method.uses_wola()
            && !(self.wola_extension_factor.is_finite()
                && (0.0..=1.0).contains(&self.wola_extension_factor))
        {
            return Err(Error::scenario(
                "wola_extension_factor",
                format!("must lie in [0, 1], got {}", self.wola_extension_factor),
            ));
        }
        if self.method.uses_fc() {
            self.fc.validate()?;
        }
        let meas = &self.measurement;
        if !(meas.ccdf_probability > 0.0 && meas.ccdf_probability < 1.0) {
            return Err(Error::scenario(
                "measurement.ccdf_probability",
                format!("must lie in (0, 1), got {}", meas.ccdf_probability),
            ));
        }
        positive("measurement.psd_rbw_hz", meas.psd_rbw_hz)?;
        positive("measurement.aclr_measurement_bw_hz", meas.aclr_measurement_bw_hz)?;
        if !(meas.receiver_cp_fraction.is_finite() && (0.0..=1.0).contains(&meas.receiver_cp_fraction))
        {
            return Err(Error::scenario(
                "measurement.receiver_cp_fraction",
                "must lie in [0, 1]",
            ));
        }
        Ok(())
    }
}

/// Per-BWP derived dimensions.
#[derive(Debug, Clone, PartialEq)]
pub struct BwpDims {
    pub scs_hz: f64,
    pub modulation: Modulation,
    /// `scs / 15 kHz`.
    pub scs_ratio: usize,
    /// Nominal transform size `L_ofdm`.
    pub ofdm_len: usize,
    /// Oversampled transform size `N_ov · L_ofdm`.
    pub ofdm_len_os: usize,
    pub cp_len: usize,
    pub cp_len_os: usize,
    pub symbols: usize,
    /// Snapped BWP centre in units of this BWP's own subcarrier spacing.
    pub center_own: i64,
    /// Snapped BWP centre in 15 kHz bins (`c_m`).
    pub center_bin: i64,
    /// Signed full-band subcarrier indices (own-SCS units), lowest first.
    pub active: Vec<i64>,
}

impl BwpDims {
    pub fn num_subcarriers(&self) -> usize {
        self.active.len()
    }

    pub fn stride(&self) -> usize {
        self.ofdm_len + self.cp_len
    }

    pub fn stride_os(&self) -> usize {
        self.ofdm_len_os + self.cp_len_os
    }

    pub fn snapped_center_hz(&self) -> f64 {
        self.center_own as f64 * self.scs_hz
    }

    /// Occupied 15 kHz-bin interval `[lo, hi)` of the active subcarriers.
    pub fn occupied_bins(&self) -> (i64, i64) {
        let r = self.scs_ratio as i64;
        let first = *self.active.first().expect("BWP has subcarriers");
        let last = *self.active.last().expect("BWP has subcarriers");
        (r * first - r / 2, r * last + r - r / 2)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DerivedDims {
    pub bwps: Vec<BwpDims>,
    pub channel_bw_hz: f64,
    pub fs_nominal: f64,
    pub fs_oversampled: f64,
    pub oversampling: usize,
    pub nominal_transform: usize,
    /// `N = N_ov · L_nom`.
    pub fc_size: usize,
    /// Common frame length at the oversampled rate.
    pub frame_len_os: usize,
    /// Common frame length at the nominal rate.
    pub frame_len: usize,
    /// Fast-convolution geometry; `None` when the FC configuration does not
    /// fit this scenario and the method does not need it.
    pub fc: Option<FcDims>,
}

impl DerivedDims {
    pub fn num_bwps(&self) -> usize {
        self.bwps.len()
    }

    /// Largest transform any stage of this scenario needs.
    pub fn max_fft_len(&self) -> usize {
        let ofdm = self.bwps.iter().map(|b| b.ofdm_len_os).max().unwrap_or(1);
        ofdm.max(self.fc_size).max(8192)
    }

    pub fn fc(&self) -> Result<&FcDims> {
        self.fc
            .as_ref()
            .ok_or_else(|| Error::FcGeometry("FC geometry unavailable for this scenario".into()))
    }
}

fn hz_to_int(v: f64) -> u64 {
    math::round(v) as u64
}

/// Expands a validated spec into every derived dimension.
pub fn derive_dims(spec: &ScenarioSpec) -> Result<DerivedDims> {
    spec.validate()?;
    let n_ov = spec.oversampling;
    let fs_nominal = spec.fs_nominal_hz();

    let grid_hz = spec
        .bwps
        .iter()
        .map(|b| hz_to_int(b.scs_hz))
        .fold(hz_to_int(REFERENCE_SCS_HZ), math::lcm) as f64;
    let min_scs = spec
        .bwps
        .iter()
        .map(|b| b.scs_hz)
        .fold(f64::INFINITY, f64::min);

    let mut bwps = Vec::with_capacity(spec.bwps.len());
    for (m, bwp) in spec.bwps.iter().enumerate() {
        let scs_ratio = (bwp.scs_hz / REFERENCE_SCS_HZ) as usize;
        if spec.nominal_transform % scs_ratio != 0 {
            return Err(Error::scenario(
                format!("bwps[{m}].scs_hz"),
                "nominal transform is not divisible by the SCS ratio",
            ));
        }
        let ofdm_len = spec.nominal_transform / scs_ratio;
        let cp_len = math::round(144.0 * ofdm_len as f64 / 2048.0) as usize;
        let symbols = spec.duration_symbols_base * hz_to_int(bwp.scs_hz / min_scs) as usize;

        let snapped_hz = math::round(bwp.center_offset_hz / grid_hz) * grid_hz;
        let center_own = math::round(snapped_hz / bwp.scs_hz) as i64;
        let center_bin = math::round(snapped_hz / REFERENCE_SCS_HZ) as i64;
        let k = bwp.num_subcarriers() as i64;
        let active: Vec<i64> = (center_own - k / 2..center_own - k / 2 + k).collect();

        let half = (ofdm_len / 2) as i64;
        if active[0] < -half || *active.last().unwrap() >= half {
            return Err(Error::scenario(
                format!("bwps[{m}]"),
                format!("active subcarriers exceed the {ofdm_len}-point transform"),
            ));
        }
        let lo_hz = (active[0] as f64 - 0.5) * bwp.scs_hz;
        let hi_hz = (*active.last().unwrap() as f64 + 0.5) * bwp.scs_hz;
        if lo_hz < -0.5 * spec.channel_bw_hz || hi_hz > 0.5 * spec.channel_bw_hz {
            return Err(Error::scenario(
                format!("bwps[{m}].center_offset_hz"),
                format!(
                    "centre snapped to {snapped_hz} Hz leaves the BWP outside the channel"
                ),
            ));
        }

        bwps.push(BwpDims {
            scs_hz: bwp.scs_hz,
            modulation: bwp.modulation,
            scs_ratio,
            ofdm_len,
            ofdm_len_os: n_ov * ofdm_len,
            cp_len,
            cp_len_os: n_ov * cp_len,
            symbols,
            center_own,
            center_bin,
            active,
        });
    }

    for i in 0..bwps.len() {
        for j in i + 1..bwps.len() {
            let (a0, a1) = bwps[i].occupied_bins();
            let (b0, b1) = bwps[j].occupied_bins();
            if a0 < b1 && b0 < a1 {
                return Err(Error::scenario(
                    format!("bwps[{j}].center_offset_hz"),
                    format!("BWP {j} overlaps BWP {i} after centre snapping"),
                ));
            }
        }
    }

    let frame_len_os = bwps[0].symbols * bwps[0].stride_os();
    let frame_len = bwps[0].symbols * bwps[0].stride();
    if let Some((m, _)) = bwps
        .iter()
        .enumerate()
        .find(|(_, b)| b.symbols * b.stride_os() != frame_len_os)
    {
        return Err(Error::scenario(
            format!("bwps[{m}]"),
            "BWP frame duration differs from BWP 0 (CP length does not scale with the transform)",
        ));
    }

    let mut dims = DerivedDims {
        bwps,
        channel_bw_hz: spec.channel_bw_hz,
        fs_nominal,
        fs_oversampled: fs_nominal * n_ov as f64,
        oversampling: n_ov,
        nominal_transform: spec.nominal_transform,
        fc_size: n_ov * spec.nominal_transform,
        frame_len_os,
        frame_len,
        fc: None,
    };
    match FcDims::derive(&spec.fc, &dims) {
        Ok(fc) => dims.fc = Some(fc),
        Err(e) if spec.method.uses_fc() => return Err(e),
        Err(_) => {}
    }
    Ok(dims)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reference_dimensions() {
        let spec = ScenarioSpec::mixed_20mhz(Method::FcIcef, 5.0, 8);
        let d = derive_dims(&spec).unwrap();
        assert_eq!(d.bwps[0].ofdm_len, 2048);
        assert_eq!(d.bwps[1].ofdm_len, 512);
        assert_eq!(d.bwps[0].ofdm_len_os, 8192);
        assert_eq!(d.bwps[1].ofdm_len_os, 2048);
        assert_eq!(d.bwps[0].cp_len_os, 576);
        assert_eq!(d.bwps[1].cp_len_os, 144);
        assert_eq!(d.fs_oversampled, 122.88e6);
        assert_eq!(d.bwps[0].symbols, 8);
        assert_eq!(d.bwps[1].symbols, 32);
        assert_eq!(8 * 8768, 32 * 2192);
        assert_eq!(d.frame_len_os, 8 * 8768);
    }

    #[test]
    fn centres_snap_to_4_98_mhz() {
        let d = derive_dims(&ScenarioSpec::mixed_20mhz(Method::None, 5.0, 1)).unwrap();
        assert_eq!(d.bwps[0].center_bin, -332);
        assert_eq!(d.bwps[0].center_own, -332);
        assert_eq!(d.bwps[1].center_bin, 332);
        assert_eq!(d.bwps[1].center_own, 83);
        assert_eq!(d.bwps[1].snapped_center_hz(), 4.98e6);
        // K/2 below the centre, K/2 - 1 above, DC not skipped
        assert_eq!(d.bwps[0].active[0], -332 - 312);
        assert_eq!(*d.bwps[0].active.last().unwrap(), -332 + 311);
        assert_eq!(d.bwps[1].active.len(), 132);
        for b in &d.bwps {
            assert_eq!(b.center_bin % (b.scs_hz / REFERENCE_SCS_HZ) as i64, 0);
        }
    }

    #[test]
    fn no_oversampling_keeps_nominal_sizes() {
        let mut spec = ScenarioSpec::mixed_20mhz(Method::None, 5.0, 2);
        spec.oversampling = 1;
        let d = derive_dims(&spec).unwrap();
        for b in &d.bwps {
            assert_eq!(b.ofdm_len_os, b.ofdm_len);
            assert_eq!(b.cp_len_os, b.cp_len);
        }
    }

    #[test]
    fn rejects_negative_target() {
        let mut spec = ScenarioSpec::mixed_20mhz(Method::FcIcef, 5.0, 2);
        spec.papr_target_db = -1.0;
        match spec.validate() {
            Err(Error::InvalidScenario { field, .. }) => assert_eq!(field, "papr_target_db"),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn rejects_bwp_outside_channel() {
        let mut spec = ScenarioSpec::mixed_20mhz(Method::None, 5.0, 2);
        spec.bwps[1].center_offset_hz = 8e6;
        assert!(matches!(
            derive_dims(&spec),
            Err(Error::InvalidScenario { .. })
        ));
    }

    #[test]
    fn rejects_overlapping_bwps() {
        let mut spec = ScenarioSpec::mixed_20mhz(Method::None, 5.0, 2);
        spec.bwps[1].center_offset_hz = -1e6;
        spec.bwps[1].num_prbs = 2;
        let err = derive_dims(&spec).unwrap_err();
        assert!(matches!(err, Error::InvalidScenario { ref reason, .. } if reason.contains("overlaps")));
    }

    #[test]
    fn rejects_unsupported_scs() {
        let mut spec = ScenarioSpec::mixed_20mhz(Method::None, 5.0, 2);
        spec.bwps[0].scs_hz = 45e3;
        assert!(matches!(
            spec.validate(),
            Err(Error::InvalidScenario { ref field, .. }) if field == "bwps[0].scs_hz"
        ));
    }

    #[test]
    fn derive_is_deterministic() {
        let spec = ScenarioSpec::mixed_20mhz(Method::FcIcef, 5.0, 4);
        assert_eq!(derive_dims(&spec).unwrap(), derive_dims(&spec).unwrap());
    }
}
