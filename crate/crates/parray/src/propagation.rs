//! Nonlinear self-demodulation and primary-beam transport.
//!
//! A strong amplitude-modulated carrier demodulates itself in the water
//! column: absorption of the carrier leaves behind a low-frequency wave
//! proportional to the second time derivative of the squared modulation
//! envelope. This module computes that difference-frequency wave, carries
//! the primary beam between ranges, and evaluates the end-fire directivity
//! of the virtual array formed along the absorption zone.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::medium::{absorption_np_per_m, MediumParams};
use crate::waveform::{Unit, Waveform};

/// Inputs to the far-field demodulation solution.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BerktayParams {
    /// Coefficient of nonlinearity of the medium.
    pub beta: f64,
    /// Peak primary pressure at the source face.
    pub primary_pressure_pa: f64,
    /// Cross-section of the collimated primary beam.
    pub beam_area_m2: f64,
    pub density: f64,
    pub sound_speed: f64,
    /// Observation range from the source.
    pub range_m: f64,
    /// Carrier absorption that sets the virtual array length.
    pub alpha0_np_per_m: f64,
}

impl BerktayParams {
    pub fn validate(&self) -> Result<()> {
        let fields = [
            ("beta", self.beta),
            ("primary_pressure_pa", self.primary_pressure_pa),
            ("beam_area_m2", self.beam_area_m2),
            ("density", self.density),
            ("sound_speed", self.sound_speed),
            ("range_m", self.range_m),
            ("alpha0_np_per_m", self.alpha0_np_per_m),
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
        Ok(())
    }

    /// Scale factor in front of the envelope's second derivative, Pa s^2.
    pub fn coefficient(&self) -> f64 {
        self.beta * self.primary_pressure_pa.powi(2) * self.beam_area_m2
            / (16.0
                * std::f64::consts::PI
                * self.density
                * self.sound_speed.powi(4)
                * self.range_m
                * self.alpha0_np_per_m)
    }
}

/// Second time derivative on a uniform grid. Interior points use the
/// five-point central stencil; the two samples at each end fall back to
/// one-sided and three-point forms of matching layout.
pub fn second_derivative(samples: &[f64], dt: f64) -> Result<Vec<f64>> {
    if samples.len() < 5 {
        return Err(Error::TooShort {
            len: samples.len(),
            min: 5,
        });
    }
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(Error::InvalidParam {
            name: "dt",
            reason: "must be positive and finite",
            value: dt,
        });
    }
    let n = samples.len();
    let h2 = dt * dt;
    let mut out = vec![0.0; n];
    out[0] = (2.0 * samples[0] - 5.0 * samples[1] + 4.0 * samples[2] - samples[3]) / h2;
    out[1] = (samples[0] - 2.0 * samples[1] + samples[2]) / h2;
    for i in 2..n - 2 {
        out[i] = (-samples[i - 2] + 16.0 * samples[i - 1] - 30.0 * samples[i]
            + 16.0 * samples[i + 1]
            - samples[i + 2])
            / (12.0 * h2);
    }
    out[n - 2] = (samples[n - 3] - 2.0 * samples[n - 2] + samples[n - 1]) / h2;
    out[n - 1] =
        (2.0 * samples[n - 1] - 5.0 * samples[n - 2] + 4.0 * samples[n - 3] - samples[n - 4]) / h2;
    Ok(out)
}

/// Far-field difference-frequency wave from a normalized modulation
/// envelope: the coefficient times the second time derivative of the
/// squared envelope. The envelope is dimensionless (primary pressure is
/// envelope times the rated face pressure); the result is in pascals at the
/// parameter range.
pub fn berktay_demodulate(envelope: &Waveform, params: &BerktayParams) -> Result<Waveform> {
    params.validate()?;
    envelope.validate()?;
    if envelope.samples.len() < 5 {
        return Err(Error::TooShort {
            len: envelope.samples.len(),
            min: 5,
        });
    }
    let squared: Vec<f64> = envelope.samples.iter().map(|e| e * e).collect();
    let d2 = second_derivative(&squared, 1.0 / envelope.sample_rate_hz)?;
    let k = params.coefficient();
    Ok(Waveform {
        sample_rate_hz: envelope.sample_rate_hz,
        start_time_s: envelope.start_time_s,
        unit: Unit::Pascal,
        samples: d2.iter().map(|v| k * v).collect(),
    })
}

/// Carries a primary-band record from one range to another: collimated
/// (no spreading) out to the collimation distance, spherical beyond it,
/// with exponential absorption at the given frequency and the flight-time
/// difference added to the start time.
pub fn primary_at_range(
    at_reference: &Waveform,
    range_m: f64,
    reference_range_m: f64,
    frequency_hz: f64,
    medium: &MediumParams,
    collimation_m: f64,
) -> Result<Waveform> {
    at_reference.validate()?;
    medium.validate()?;
    for (name, value) in [
        ("range_m", range_m),
        ("reference_range_m", reference_range_m),
        ("collimation_m", collimation_m),
    ] {
        if !(value > 0.0 && value.is_finite()) {
            return Err(Error::InvalidParam {
                name,
                reason: "must be positive and finite",
                value,
            });
        }
    }
    let spread = |r: f64| {
        if r <= collimation_m {
            1.0
        } else {
            collimation_m / r
        }
    };
    let alpha = absorption_np_per_m(frequency_hz, medium)?;
    let gain = spread(range_m) / spread(reference_range_m)
        * (-alpha * (range_m - reference_range_m)).exp();
    Ok(Waveform {
        sample_rate_hz: at_reference.sample_rate_hz,
        start_time_s: at_reference.start_time_s
            + (range_m - reference_range_m) / medium.sound_speed,
        unit: at_reference.unit,
        samples: at_reference.samples.iter().map(|v| v * gain).collect(),
    })
}

fn beam_ratio(difference_frequency_hz: f64, carrier_frequency_hz: f64, medium: &MediumParams) -> Result<f64> {
    medium.validate()?;
    for (name, value) in [
        ("difference_frequency_hz", difference_frequency_hz),
        ("carrier_frequency_hz", carrier_frequency_hz),
    ] {
        if !(value > 0.0 && value.is_finite()) {
            return Err(Error::InvalidParam {
                name,
                reason: "must be positive and finite",
                value,
            });
        }
    }
    let k_d = 2.0 * std::f64::consts::PI * difference_frequency_hz / medium.sound_speed;
    let alpha_t = absorption_np_per_m(carrier_frequency_hz, medium)?;
    Ok(alpha_t / k_d)
}

/// Normalized end-fire beam pattern of the virtual array, 1 on axis.
pub fn directivity(
    theta_deg: f64,
    difference_frequency_hz: f64,
    carrier_frequency_hz: f64,
    medium: &MediumParams,
) -> Result<f64> {
    let ratio = beam_ratio(difference_frequency_hz, carrier_frequency_hz, medium)?;
    if !theta_deg.is_finite() {
        return Err(Error::InvalidParam {
            name: "theta_deg",
            reason: "must be finite",
            value: theta_deg,
        });
    }
    let s2 = (theta_deg.to_radians() / 2.0).sin().powi(2);
    Ok(1.0 / (1.0 + (s2 / ratio).powi(2)).sqrt())
}

/// Full width of the difference-frequency beam between its half-power
/// points, degrees. Errors when absorption is so strong relative to the
/// difference wavenumber that the pattern never falls to half power.
pub fn halfpower_beamwidth_deg(
    difference_frequency_hz: f64,
    carrier_frequency_hz: f64,
    medium: &MediumParams,
) -> Result<f64> {
    let ratio = beam_ratio(difference_frequency_hz, carrier_frequency_hz, medium)?;
    if ratio > 1.0 {
        return Err(Error::NoHalfPowerAngle { ratio });
    }
    Ok(4.0 * ratio.sqrt().asin().to_degrees())
}
