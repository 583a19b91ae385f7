//! Projector model: a square piston driven through a series LC tuning
//! network, reduced to a single resonant band around the carrier.
//!
//! The electrical drive maps to face pressure through a second-order
//! resonator centered on the carrier. The resonator's gain is calibrated so
//! that a reference burst at the rated drive reaches the rated face
//! pressure, which keeps the model's output in physical units without
//! modeling the full electro-mechanical chain.

use serde::{Deserialize, Serialize};

use crate::dsp::{apply_filter, Biquad, FilterChain, FilterMode};
use crate::error::{Error, Result};
use crate::waveform::{synth_symbol, SymbolSpec, Unit, Waveform};

/// Physical and electrical parameters of the projector.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SourceParams {
    pub aperture_width_m: f64,
    pub aperture_height_m: f64,
    pub center_frequency_hz: f64,
    /// Clamped (blocked) capacitance of the element stack.
    pub clamp_capacitance_f: f64,
    /// Series inductance chosen to tune out the clamp capacitance.
    pub tuning_inductance_h: f64,
    /// Half-power bandwidth of the resonator model.
    pub model_bandwidth_hz: f64,
    /// Face pressure reached by the rated drive at the calibration burst.
    pub primary_pressure_pa: f64,
}

impl Default for SourceParams {
    fn default() -> Self {
        Self {
            aperture_width_m: 0.075,
            aperture_height_m: 0.075,
            center_frequency_hz: 855e3,
            clamp_capacitance_f: 17e-9,
            tuning_inductance_h: 2.1e-6,
            model_bandwidth_hz: 100e3,
            primary_pressure_pa: 20e3,
        }
    }
}

impl SourceParams {
    pub fn validate(&self) -> Result<()> {
        let fields = [
            ("aperture_width_m", self.aperture_width_m),
            ("aperture_height_m", self.aperture_height_m),
            ("center_frequency_hz", self.center_frequency_hz),
            ("clamp_capacitance_f", self.clamp_capacitance_f),
            ("tuning_inductance_h", self.tuning_inductance_h),
            ("model_bandwidth_hz", self.model_bandwidth_hz),
            ("primary_pressure_pa", self.primary_pressure_pa),
        ];
        for (name, value) in fields {
            if !(value > 0.0 && value.is_finite()) {
                return Err(Error::InvalidParam {
                    name,
                    reason: "must be positive and finite",
                    value,
                });
            }
        }
        if self.model_bandwidth_hz >= 2.0 * self.center_frequency_hz {
            return Err(Error::InvalidParam {
                name: "model_bandwidth_hz",
                reason: "must be less than twice the center frequency",
                value: self.model_bandwidth_hz,
            });
        }
        Ok(())
    }

    /// Radiating face area.
    pub fn aperture_area_m2(&self) -> f64 {
        self.aperture_width_m * self.aperture_height_m
    }
}

/// Series resonance of the tuning inductor against the clamp capacitance,
/// 1 / (2 pi sqrt(L C)).
pub fn tuned_resonance_hz(inductance_h: f64, capacitance_f: f64) -> Result<f64> {
    if !(inductance_h > 0.0 && inductance_h.is_finite()) {
        return Err(Error::InvalidParam {
            name: "inductance_h",
            reason: "must be positive and finite",
            value: inductance_h,
        });
    }
    if !(capacitance_f > 0.0 && capacitance_f.is_finite()) {
        return Err(Error::InvalidParam {
            name: "capacitance_f",
            reason: "must be positive and finite",
            value: capacitance_f,
        });
    }
    Ok(1.0 / (2.0 * std::f64::consts::PI * (inductance_h * capacitance_f).sqrt()))
}

/// Second-order resonator as a single digital section. The band edges are
/// placed by frequency-warping each edge separately, so the half-power
/// points land on the requested frequencies exactly.
fn resonator_section(center_hz: f64, bandwidth_hz: f64, fs: f64) -> Biquad {
    let warp = |f: f64| 2.0 * fs * (std::f64::consts::PI * f / fs).tan();
    let w1 = warp(center_hz - bandwidth_hz / 2.0);
    let w2 = warp(center_hz + bandwidth_hz / 2.0);
    let bw = w2 - w1;
    let w0sq = w1 * w2;
    let fs2 = 2.0 * fs;
    let a0 = fs2 * fs2 + fs2 * bw + w0sq;
    Biquad {
        b0: fs2 * bw / a0,
        b1: 0.0,
        b2: -fs2 * bw / a0,
        a1: 2.0 * (w0sq - fs2 * fs2) / a0,
        a2: (fs2 * fs2 - fs2 * bw + w0sq) / a0,
    }
}

/// How long the resonator keeps ringing after the drive stops, in samples:
/// enough for the envelope to fall nine decades.
fn ring_down_samples(bandwidth_hz: f64, fs: f64) -> usize {
    ((9.0 * std::f64::consts::LN_10) / (std::f64::consts::PI * bandwidth_hz) * fs).ceil() as usize
}

/// Converts an electrical drive record to the face pressure it produces.
///
/// The output keeps the drive's sample rate and start time and extends past
/// its end by the resonator's ring-down. The absolute scale comes from a
/// calibration burst: a unit-amplitude eight-cycle reference symbol at the
/// rated drive maps to the rated face pressure.
pub fn drive_to_pressure(source: &SourceParams, drive: &Waveform) -> Result<Waveform> {
    source.validate()?;
    drive.validate()?;
    let fs = drive.sample_rate_hz;
    if fs < 8.0 * source.center_frequency_hz {
        return Err(Error::UndersampledDrive {
            sample_rate_hz: fs,
            center_hz: source.center_frequency_hz,
        });
    }
    let chain = FilterChain {
        sample_rate_hz: fs,
        sections: vec![resonator_section(
            source.center_frequency_hz,
            source.model_bandwidth_hz,
            fs,
        )],
    };

    // calibration: unit burst at a difference frequency well inside the band
    let f_cal = (source.center_frequency_hz / 10.0).min(20e3);
    let reference = synth_symbol(
        &SymbolSpec {
            difference_frequency_hz: f_cal,
            n_cycles: 8.0,
            polarity: 1,
        },
        source.center_frequency_hz,
        fs,
        1.0,
    )?;
    let mut ref_padded = reference.samples;
    ref_padded.resize(
        ref_padded.len() + ring_down_samples(source.model_bandwidth_hz, fs),
        0.0,
    );
    let ref_out = apply_filter(
        &chain,
        &Waveform::new(fs, 0.0, Unit::Volt, ref_padded)?,
        FilterMode::Causal,
    )?;
    let ref_peak = ref_out.samples.iter().fold(0f64, |m, v| m.max(v.abs()));
    let gain = source.primary_pressure_pa / ref_peak;

    let mut samples = drive.samples.clone();
    samples.resize(
        samples.len() + ring_down_samples(source.model_bandwidth_hz, fs),
        0.0,
    );
    let out = apply_filter(
        &chain,
        &Waveform::new(fs, drive.start_time_s, Unit::Volt, samples)?,
        FilterMode::Causal,
    )?;
    Ok(Waveform {
        sample_rate_hz: fs,
        start_time_s: drive.start_time_s,
        unit: Unit::Pascal,
        samples: out.samples.iter().map(|v| v * gain).collect(),
    })
}
