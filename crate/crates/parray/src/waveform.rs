//! Sampled waveforms and square-root amplitude modulation (SQRAM).
//!
//! A SQRAM symbol carries one bit in the sign convention of its envelope:
//! polarity +1 uses E(t) = sqrt(1 - sin w_d t), polarity -1 uses
//! E(t) = sqrt(1 + sin w_d t). Squaring either envelope yields a pure
//! sinusoid at the difference frequency plus a constant, which is what makes
//! the self-demodulated wave a clean tone instead of a distorted one.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default sample rate for synthesis, 20 MHz: resolves an 855 kHz carrier
/// with better than 23 samples per cycle.
pub const DEFAULT_SAMPLE_RATE_HZ: f64 = 20e6;

/// Physical unit of a waveform's samples.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Unit {
    Volt,
    Pascal,
    Dimensionless,
}

/// A uniformly sampled real signal with an absolute time origin.
///
/// `start_time_s` is measured from the transmit trigger at t = 0; sample i
/// sits at start_time_s + i / sample_rate_hz.
#[derive(Debug, Clone, PartialEq)]
pub struct Waveform {
    pub sample_rate_hz: f64,
    pub start_time_s: f64,
    pub unit: Unit,
    pub samples: Vec<f64>,
}

impl Waveform {
    /// Builds a waveform and checks the container invariants: positive
    /// sample rate, at least one sample, every sample finite.
    pub fn new(sample_rate_hz: f64, start_time_s: f64, unit: Unit, samples: Vec<f64>) -> Result<Self> {
        let w = Self {
            sample_rate_hz,
            start_time_s,
            unit,
            samples,
        };
        w.validate()?;
        Ok(w)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.sample_rate_hz > 0.0) || !self.sample_rate_hz.is_finite() {
            return Err(Error::InvalidParam {
                name: "sample_rate_hz",
                reason: "must be positive and finite",
                value: self.sample_rate_hz,
            });
        }
        if !self.start_time_s.is_finite() {
            return Err(Error::InvalidParam {
                name: "start_time_s",
                reason: "must be finite",
                value: self.start_time_s,
            });
        }
        if self.samples.is_empty() {
            return Err(Error::EmptyWaveform);
        }
        if let Some(index) = self.samples.iter().position(|s| !s.is_finite()) {
            return Err(Error::NonFiniteSample { index });
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    /// Time of sample i on the absolute axis.
    pub fn time_at(&self, i: usize) -> f64 {
        self.start_time_s + i as f64 / self.sample_rate_hz
    }

    /// Time of the last sample.
    pub fn end_time_s(&self) -> f64 {
        self.time_at(self.samples.len().saturating_sub(1))
    }

    /// Record length in seconds (sample count over rate).
    pub fn duration_s(&self) -> f64 {
        self.samples.len() as f64 / self.sample_rate_hz
    }
}

/// One SQRAM symbol: a difference frequency, a half-integer cycle count,
/// and a bit polarity. The gate lasts t_d = n_cycles / f_d.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SymbolSpec {
    pub difference_frequency_hz: f64,
    /// Gate length in difference-frequency cycles; any positive multiple of 0.5.
    pub n_cycles: f64,
    /// +1 or -1; selects which envelope of the complementary pair is sent.
    pub polarity: i8,
}

impl Default for SymbolSpec {
    fn default() -> Self {
        Self {
            difference_frequency_hz: 20e3,
            n_cycles: 8.0,
            polarity: 1,
        }
    }
}

impl SymbolSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.difference_frequency_hz > 0.0) || !self.difference_frequency_hz.is_finite() {
            return Err(Error::InvalidParam {
                name: "difference_frequency_hz",
                reason: "must be positive and finite",
                value: self.difference_frequency_hz,
            });
        }
        let doubled = 2.0 * self.n_cycles;
        if !self.n_cycles.is_finite() || doubled < 1.0 || (doubled - doubled.round()).abs() > 1e-9 {
            return Err(Error::InvalidCycleCount {
                n_cycles: self.n_cycles,
            });
        }
        if self.polarity != 1 && self.polarity != -1 {
            return Err(Error::InvalidParam {
                name: "polarity",
                reason: "must be +1 or -1",
                value: self.polarity as f64,
            });
        }
        Ok(())
    }

    /// Gate duration t_d in seconds.
    pub fn duration_s(&self) -> f64 {
        self.n_cycles / self.difference_frequency_hz
    }

    /// Number of samples in the gate at a given rate, round(t_d * fs).
    pub fn gate_samples(&self, sample_rate_hz: f64) -> usize {
        (self.duration_s() * sample_rate_hz).round() as usize
    }
}

/// SQRAM envelope at time t: sqrt(1 - polarity * sin(2 pi f_d t)).
///
/// Ranges over [0, sqrt(2)]; the complementary pair satisfies
/// E_+^2 + E_-^2 = 2 identically, and the -1 envelope equals the +1
/// envelope delayed by half a difference period.
pub fn envelope_value(t_s: f64, difference_frequency_hz: f64, polarity: i8) -> f64 {
    let s = (2.0 * std::f64::consts::PI * difference_frequency_hz * t_s).sin();
    // clamp: 1 -/+ s can dip a few ulp below zero at the tangent points
    (1.0 - polarity as f64 * s).max(0.0).sqrt()
}

/// Synthesizes one SQRAM symbol: amplitude * E(t) * sin(2 pi f_c t) over the
/// gate, sampled from t = 0 with carrier phase 0.
///
/// The record covers exactly the gate, round(t_d * fs) samples; nothing is
/// emitted outside it. Requires at least 8 samples per carrier cycle and a
/// carrier above the difference frequency.
pub fn synth_symbol(
    spec: &SymbolSpec,
    carrier_hz: f64,
    sample_rate_hz: f64,
    amplitude: f64,
) -> Result<Waveform> {
    spec.validate()?;
    if !(carrier_hz > spec.difference_frequency_hz) || !carrier_hz.is_finite() {
        return Err(Error::InvalidParam {
            name: "carrier_hz",
            reason: "must exceed the difference frequency",
            value: carrier_hz,
        });
    }
    if !(sample_rate_hz >= 8.0 * carrier_hz) {
        return Err(Error::UndersampledCarrier {
            sample_rate_hz,
            carrier_hz,
        });
    }
    if !amplitude.is_finite() {
        return Err(Error::InvalidParam {
            name: "amplitude",
            reason: "must be finite",
            value: amplitude,
        });
    }
    let n = spec.gate_samples(sample_rate_hz);
    let w_c = 2.0 * std::f64::consts::PI * carrier_hz;
    let samples = (0..n)
        .map(|i| {
            let t = i as f64 / sample_rate_hz;
            amplitude * envelope_value(t, spec.difference_frequency_hz, spec.polarity) * (w_c * t).sin()
        })
        .collect();
    Waveform::new(sample_rate_hz, 0.0, Unit::Volt, samples)
}

/// Assembles a coded burst: one SQRAM symbol per bit, separated by silent
/// guard intervals. Each symbol restarts envelope and carrier phase at its
/// own gate, so every slot is an exact copy of `synth_symbol` for its bit.
///
/// Total duration is n * t_d + (n - 1) * guard_s; the record ends with the
/// last gate (no trailing guard).
pub fn synth_sequence(
    bits: &[i8],
    spec_template: &SymbolSpec,
    carrier_hz: f64,
    guard_s: f64,
    sample_rate_hz: f64,
    amplitude: f64,
) -> Result<Waveform> {
    if bits.is_empty() {
        return Err(Error::EmptySequence);
    }
    if !(guard_s >= 0.0) || !guard_s.is_finite() {
        return Err(Error::InvalidParam {
            name: "guard_s",
            reason: "must be >= 0",
            value: guard_s,
        });
    }
    let gate_n = spec_template.gate_samples(sample_rate_hz);
    let guard_n = (guard_s * sample_rate_hz).round() as usize;
    let period_n = gate_n + guard_n;
    let total = (bits.len() - 1) * period_n + gate_n;
    let mut samples = vec![0.0; total];
    for (i, &bit) in bits.iter().enumerate() {
        let spec = SymbolSpec {
            polarity: bit,
            ..*spec_template
        };
        let symbol = synth_symbol(&spec, carrier_hz, sample_rate_hz, amplitude)?;
        let at = i * period_n;
        samples[at..at + gate_n].copy_from_slice(&symbol.samples);
    }
    Waveform::new(sample_rate_hz, 0.0, Unit::Volt, samples)
}

#[cfg(test)]
mod tests {
    use super::*;

    const FS: f64 = DEFAULT_SAMPLE_RATE_HZ;

    fn spec(f_d: f64, n_cycles: f64, polarity: i8) -> SymbolSpec {
        SymbolSpec {
            difference_frequency_hz: f_d,
            n_cycles,
            polarity,
        }
    }

    #[test]
    fn envelope_stays_in_range_and_pair_is_complementary() {
        let f_d = 20e3;
        for i in 0..5000 {
            let t = i as f64 * 1e-7;
            let ep = envelope_value(t, f_d, 1);
            let em = envelope_value(t, f_d, -1);
            assert!((0.0..=2f64.sqrt() + 1e-15).contains(&ep), "envelope out of range at t={t}");
            let sum = ep * ep + em * em;
            assert!(
                (sum - 2.0).abs() < 1e-12,
                "complementary envelopes must satisfy E+^2 + E-^2 = 2, got {sum} at t={t}"
            );
        }
    }

    #[test]
    fn negative_envelope_is_the_positive_one_delayed_half_a_period() {
        let f_d = 20e3;
        let half = 0.5 / f_d;
        for i in 0..2000 {
            let t = i as f64 * 3e-7;
            let em = envelope_value(t, f_d, -1);
            let ep = envelope_value(t - half, f_d, 1);
            assert!(
                (em - ep).abs() < 1e-12,
                "E-(t) must equal E+(t - T/2), diff {} at t={t}",
                em - ep
            );
        }
    }

    #[test]
    fn envelope_is_periodic_in_the_difference_period() {
        let f_d = 40e3;
        let period = 1.0 / f_d;
        for i in 0..1000 {
            let t = i as f64 * 1.7e-7;
            for pol in [1i8, -1] {
                let d = envelope_value(t + period, f_d, pol) - envelope_value(t, f_d, pol);
                assert!(d.abs() < 1e-12, "envelope must repeat each period, diff {d}");
            }
        }
    }

    #[test]
    fn symbol_length_is_rounded_gate_duration() {
        let w = synth_symbol(&spec(20e3, 8.0, 1), 855e3, FS, 1.0).unwrap();
        assert_eq!(w.len(), 8000, "8 cycles at 20 kHz, 20 MHz rate");
        let w = synth_symbol(&spec(20e3, 0.5, 1), 855e3, FS, 1.0).unwrap();
        assert_eq!(w.len(), 500, "half a cycle at 20 kHz");
        let w = synth_symbol(&spec(40e3, 2.5, -1), 855e3, FS, 1.0).unwrap();
        assert_eq!(w.len(), 1250);
        assert_eq!(w.unit, Unit::Volt);
        assert_eq!(w.start_time_s, 0.0, "symbols start at the transmit trigger");
    }

    #[test]
    fn symbol_amplitude_is_bounded_by_sqrt2() {
        let amp = 2.5;
        let w = synth_symbol(&spec(20e3, 8.0, -1), 855e3, FS, amp).unwrap();
        let bound = 2f64.sqrt() * amp + 1e-12;
        let peak = w.samples.iter().fold(0f64, |m, s| m.max(s.abs()));
        assert!(peak <= bound, "|s| must stay below sqrt(2) * amplitude, peak {peak}");
        // the bound is actually approached: the envelope peak beats the carrier
        assert!(peak > 0.95 * 2f64.sqrt() * amp, "peak {peak} should come close to the bound");
    }

    #[test]
    fn symbol_starts_at_carrier_phase_zero() {
        let w = synth_symbol(&spec(20e3, 1.0, 1), 855e3, FS, 1.0).unwrap();
        assert_eq!(w.samples[0], 0.0, "carrier phase is zero at the gate start");
    }

    #[test]
    fn undersampled_carrier_is_rejected() {
        let err = synth_symbol(&spec(20e3, 8.0, 1), 855e3, 4e6, 1.0).unwrap_err();
        assert!(
            matches!(err, Error::UndersampledCarrier { .. }),
            "4 MHz cannot carry 855 kHz, got {err:?}"
        );
    }

    #[test]
    fn carrier_below_difference_frequency_is_rejected() {
        assert!(synth_symbol(&spec(20e3, 8.0, 1), 10e3, FS, 1.0).is_err());
    }

    #[test]
    fn bad_cycle_counts_are_rejected() {
        for n in [0.0, 0.3, -1.0, 1.2, f64::NAN] {
            let err = synth_symbol(&spec(20e3, n, 1), 855e3, FS, 1.0).unwrap_err();
            assert!(
                matches!(err, Error::InvalidCycleCount { .. }),
                "n_cycles={n} must be rejected, got {err:?}"
            );
        }
        for n in [0.5, 1.0, 1.5, 8.0, 12.5] {
            assert!(spec(20e3, n, 1).validate().is_ok(), "n_cycles={n} is a valid half-integer");
        }
    }

    #[test]
    fn sequence_layout_and_guard_silence() {
        let template = spec(20e3, 2.0, 1);
        let bits = [1i8, -1, 1, -1];
        let guard = template.duration_s();
        let seq = synth_sequence(&bits, &template, 855e3, guard, FS, 1.0).unwrap();
        let gate_n = template.gate_samples(FS);
        assert_eq!(seq.len(), 7 * gate_n, "4 gates and 3 equal guards");
        for slot in 0..3 {
            let from = slot * 2 * gate_n + gate_n;
            assert!(
                seq.samples[from..from + gate_n].iter().all(|&s| s == 0.0),
                "guard {slot} must be exactly silent"
            );
        }
    }

    #[test]
    fn sequence_slots_match_single_symbols_exactly() {
        let template = spec(40e3, 2.0, 1);
        let bits = [-1i8, 1, -1];
        let seq = synth_sequence(&bits, &template, 855e3, 25e-6, FS, 0.7).unwrap();
        let gate_n = template.gate_samples(FS);
        let period_n = gate_n + (25e-6 * FS).round() as usize;
        for (i, &bit) in bits.iter().enumerate() {
            let single = synth_symbol(
                &SymbolSpec { polarity: bit, ..template },
                855e3,
                FS,
                0.7,
            )
            .unwrap();
            let at = i * period_n;
            assert_eq!(
                &seq.samples[at..at + gate_n],
                single.samples.as_slice(),
                "slot {i} must be a bit-exact copy of the single symbol"
            );
        }
    }

    #[test]
    fn empty_sequence_is_rejected() {
        let err = synth_sequence(&[], &spec(20e3, 2.0, 1), 855e3, 0.0, FS, 1.0).unwrap_err();
        assert!(matches!(err, Error::EmptySequence));
    }

    #[test]
    fn waveform_container_invariants() {
        assert!(matches!(
            Waveform::new(FS, 0.0, Unit::Volt, vec![]),
            Err(Error::EmptyWaveform)
        ));
        assert!(matches!(
            Waveform::new(FS, 0.0, Unit::Volt, vec![1.0, f64::INFINITY]),
            Err(Error::NonFiniteSample { index: 1 })
        ));
        assert!(Waveform::new(0.0, 0.0, Unit::Volt, vec![1.0]).is_err());
        let w = Waveform::new(1000.0, 0.25, Unit::Pascal, vec![0.0; 10]).unwrap();
        assert_eq!(w.time_at(3), 0.25 + 3e-3);
        assert_eq!(w.end_time_s(), 0.25 + 9e-3);
        assert_eq!(w.duration_s(), 1e-2);
    }
}
