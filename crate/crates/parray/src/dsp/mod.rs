//! Filter design and application, spectra, correlation, and envelope
//! extraction. Filters are cascades of second-order sections; spectra and
//! correlations run on FFTs sized to the data.

mod design;

pub use design::{design_butterworth, postprocess_chain};

use rustfft::num_complex::Complex64;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::waveform::Waveform;

/// Filter family and cutoff placement.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum FilterKind {
    Lowpass { cutoff_hz: f64 },
    Highpass { cutoff_hz: f64 },
    Bandpass { low_hz: f64, high_hz: f64 },
}

/// A filter request: kind plus order. Validity depends on the sample rate
/// the design will run at, so validation takes it as an argument.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FilterSpec {
    pub kind: FilterKind,
    pub order: usize,
}

impl FilterSpec {
    pub fn validate(&self, sample_rate_hz: f64) -> Result<()> {
        if self.order < 1 {
            return Err(Error::InvalidFilterSpec {
                reason: "order must be at least 1".into(),
            });
        }
        if !(sample_rate_hz > 0.0) {
            return Err(Error::InvalidFilterSpec {
                reason: format!("sample rate must be positive, got {sample_rate_hz}"),
            });
        }
        let nyquist = sample_rate_hz / 2.0;
        let check = |f: f64, label: &str| -> Result<()> {
            if !(f > 0.0 && f < nyquist) {
                return Err(Error::InvalidFilterSpec {
                    reason: format!("{label} {f} Hz must lie strictly inside (0, {nyquist}) Hz"),
                });
            }
            Ok(())
        };
        match self.kind {
            FilterKind::Lowpass { cutoff_hz } | FilterKind::Highpass { cutoff_hz } => {
                check(cutoff_hz, "cutoff")
            }
            FilterKind::Bandpass { low_hz, high_hz } => {
                check(low_hz, "lower cutoff")?;
                check(high_hz, "upper cutoff")?;
                if !(low_hz < high_hz) {
                    return Err(Error::InvalidFilterSpec {
                        reason: format!("band edges out of order: {low_hz} >= {high_hz}"),
                    });
                }
                Ok(())
            }
        }
    }
}

/// One second-order section, denominator normalized to a0 = 1.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Biquad {
    pub b0: f64,
    pub b1: f64,
    pub b2: f64,
    pub a1: f64,
    pub a2: f64,
}

impl Biquad {
    /// Both poles strictly inside the unit circle.
    pub fn is_stable(&self) -> bool {
        self.a2.abs() < 1.0 && self.a1.abs() < 1.0 + self.a2
    }

    /// Transposed direct form II, one pass over the buffer in place.
    fn run(&self, x: &mut [f64]) {
        let (mut s1, mut s2) = (0.0f64, 0.0f64);
        for v in x.iter_mut() {
            let xin = *v;
            let y = self.b0 * xin + s1;
            s1 = self.b1 * xin - self.a1 * y + s2;
            s2 = self.b2 * xin - self.a2 * y;
            *v = y;
        }
    }

    fn response_at(&self, w: f64) -> Complex64 {
        let e1 = Complex64::from_polar(1.0, -w);
        let e2 = Complex64::from_polar(1.0, -2.0 * w);
        (self.b0 + self.b1 * e1 + self.b2 * e2) / (1.0 + self.a1 * e1 + self.a2 * e2)
    }
}

/// How a chain is run over a record.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FilterMode {
    /// Single forward pass; physically realizable, introduces group delay.
    Causal,
    /// Forward pass then time-reversed pass: squared magnitude, zero phase.
    ZeroPhase,
}

/// An immutable cascade of sections designed at a fixed sample rate.
///
/// The overall gain is spread evenly across the sections, so the cascade is
/// the complete filter; an empty chain is the identity.
#[derive(Debug, Clone, PartialEq)]
pub struct FilterChain {
    pub sample_rate_hz: f64,
    pub sections: Vec<Biquad>,
}

impl FilterChain {
    /// A pass-through chain at the given rate.
    pub fn identity(sample_rate_hz: f64) -> Self {
        Self {
            sample_rate_hz,
            sections: Vec::new(),
        }
    }

    /// Linear magnitude response at a frequency.
    pub fn magnitude_at(&self, f_hz: f64) -> f64 {
        let w = 2.0 * std::f64::consts::PI * f_hz / self.sample_rate_hz;
        self.sections
            .iter()
            .map(|s| s.response_at(w).norm())
            .product()
    }

    /// Magnitude response in dB, accumulated per section so that stopbands
    /// hundreds of dB down do not underflow.
    pub fn magnitude_db_at(&self, f_hz: f64) -> f64 {
        let w = 2.0 * std::f64::consts::PI * f_hz / self.sample_rate_hz;
        self.sections
            .iter()
            .map(|s| 20.0 * s.response_at(w).norm().log10())
            .sum()
    }
}

fn check_rates(a: f64, b: f64) -> Result<()> {
    if (a - b).abs() > 1e-9 * a.abs().max(b.abs()) {
        return Err(Error::SampleRateMismatch { a, b });
    }
    Ok(())
}

/// Runs a chain over a waveform. Causal mode filters forward once;
/// zero-phase mode filters forward, then filters the reversed result and
/// reverses back. Output keeps the input's length, unit, and time base.
pub fn apply_filter(chain: &FilterChain, x: &Waveform, mode: FilterMode) -> Result<Waveform> {
    x.validate()?;
    check_rates(chain.sample_rate_hz, x.sample_rate_hz)?;
    let mut samples = x.samples.clone();
    for s in &chain.sections {
        s.run(&mut samples);
    }
    if mode == FilterMode::ZeroPhase {
        samples.reverse();
        for s in &chain.sections {
            s.run(&mut samples);
        }
        samples.reverse();
    }
    Ok(Waveform {
        sample_rate_hz: x.sample_rate_hz,
        start_time_s: x.start_time_s,
        unit: x.unit,
        samples,
    })
}

fn fft_forward(buf: &mut [Complex64]) {
    FftPlanner::new().plan_fft_forward(buf.len()).process(buf);
}

fn fft_inverse_normalized(buf: &mut [Complex64]) {
    let n = buf.len();
    FftPlanner::new().plan_fft_inverse(n).process(buf);
    let scale = 1.0 / n as f64;
    for v in buf.iter_mut() {
        *v *= scale;
    }
}

/// Single-sided magnitude series of a waveform.
#[derive(Debug, Clone)]
pub struct Spectrum {
    pub frequency_hz: Vec<f64>,
    /// Scaled so that the sum of squared magnitudes equals the sum of
    /// squared time samples (energy-preserving fold of the two sides).
    pub magnitude: Vec<f64>,
}

impl Spectrum {
    /// Index of the bin nearest a frequency.
    pub fn bin_of(&self, f_hz: f64) -> usize {
        let df = self.frequency_hz.get(1).copied().unwrap_or(1.0);
        ((f_hz / df).round() as usize).min(self.frequency_hz.len() - 1)
    }
}

/// Discrete Fourier magnitude of the record, single-sided, bin spacing
/// sample_rate / N.
pub fn spectrum(x: &Waveform) -> Result<Spectrum> {
    x.validate()?;
    let n = x.samples.len();
    let mut buf: Vec<Complex64> = x
        .samples
        .iter()
        .map(|&s| Complex64::new(s, 0.0))
        .collect();
    fft_forward(&mut buf);
    let half = n / 2;
    let n_bins = half + 1;
    let mut frequency_hz = Vec::with_capacity(n_bins.min(n));
    let mut magnitude = Vec::with_capacity(n_bins.min(n));
    for (k, v) in buf.iter().enumerate().take(n_bins.min(n)) {
        // interior bins carry both spectral sides; DC and (for even N) the
        // Nyquist bin appear once
        let w = if k == 0 || (n % 2 == 0 && k == half) {
            1.0
        } else {
            2.0
        };
        frequency_hz.push(k as f64 * x.sample_rate_hz / n as f64);
        magnitude.push(v.norm() * (w / n as f64).sqrt());
    }
    Ok(Spectrum {
        frequency_hz,
        magnitude,
    })
}

/// Analytic signal of a real record through a full-length FFT: positive
/// frequencies doubled, negative zeroed. The magnitude is the instantaneous
/// envelope; the phase derivative is the instantaneous frequency.
pub(crate) fn analytic_signal(x: &Waveform) -> Result<Vec<Complex64>> {
    x.validate()?;
    let n = x.samples.len();
    if n == 1 {
        return Ok(vec![Complex64::new(x.samples[0], 0.0)]);
    }
    let mut buf: Vec<Complex64> = x
        .samples
        .iter()
        .map(|&s| Complex64::new(s, 0.0))
        .collect();
    fft_forward(&mut buf);
    let half = n / 2;
    for (k, v) in buf.iter_mut().enumerate() {
        if k == 0 || (n % 2 == 0 && k == half) {
            // DC and Nyquist stay as they are
        } else if k < half || (n % 2 == 1 && k == half) {
            *v *= 2.0;
        } else {
            *v = Complex64::new(0.0, 0.0);
        }
    }
    fft_inverse_normalized(&mut buf);
    Ok(buf)
}

/// Magnitude of the analytic signal: the instantaneous envelope of a real
/// record.
pub fn analytic_envelope(x: &Waveform) -> Result<Waveform> {
    let z = analytic_signal(x)?;
    Ok(Waveform {
        sample_rate_hz: x.sample_rate_hz,
        start_time_s: x.start_time_s,
        unit: x.unit,
        samples: z.iter().map(|v| v.norm()).collect(),
    })
}

/// Full cross-correlation c[m] = sum_u a[u + m] * b[u] over all overlaps,
/// returned in ascending m from -(len(b) - 1) to len(a) - 1. FFT-based.
pub(crate) fn raw_xcorr_full(a: &[f64], b: &[f64]) -> Vec<f64> {
    let out_len = a.len() + b.len() - 1;
    let n = out_len.next_power_of_two();
    let mut fa: Vec<Complex64> = vec![Complex64::new(0.0, 0.0); n];
    let mut fb: Vec<Complex64> = vec![Complex64::new(0.0, 0.0); n];
    for (i, &v) in a.iter().enumerate() {
        fa[i] = Complex64::new(v, 0.0);
    }
    // time-reverse b so the convolution theorem yields correlation
    for (i, &v) in b.iter().rev().enumerate() {
        fb[i] = Complex64::new(v, 0.0);
    }
    fft_forward(&mut fa);
    fft_forward(&mut fb);
    for (x, y) in fa.iter_mut().zip(&fb) {
        *x *= y;
    }
    fft_inverse_normalized(&mut fa);
    fa.truncate(out_len);
    fa.iter().map(|v| v.re).collect()
}

/// Cross-correlation of two records, normalized by the geometric mean of
/// their energies so a perfect match scores 1.
#[derive(Debug, Clone)]
pub struct CrossCorrelation {
    /// Time by which the second record lags the first, ascending.
    pub delay_s: Vec<f64>,
    pub correlation: Vec<f64>,
    /// Value of largest magnitude (sign kept). Ties resolve to the
    /// smallest delay.
    pub peak_value: f64,
    pub peak_delay_s: f64,
}

/// Energy-normalized cross-correlation. The delay axis reports how far `b`
/// sits after `a` on the absolute time line, combining the sample-domain lag
/// with both records' start times.
pub fn normalized_xcorr(a: &Waveform, b: &Waveform) -> Result<CrossCorrelation> {
    a.validate()?;
    b.validate()?;
    check_rates(a.sample_rate_hz, b.sample_rate_hz)?;
    let ea: f64 = a.samples.iter().map(|s| s * s).sum();
    let eb: f64 = b.samples.iter().map(|s| s * s).sum();
    if ea == 0.0 {
        return Err(Error::ZeroEnergy { which: "first waveform" });
    }
    if eb == 0.0 {
        return Err(Error::ZeroEnergy { which: "second waveform" });
    }
    let raw = raw_xcorr_full(&a.samples, &b.samples);
    let norm = (ea * eb).sqrt();
    let dt = 1.0 / a.sample_rate_hz;
    let offset = b.start_time_s - a.start_time_s;
    let m_min = -(b.samples.len() as isize - 1);
    // ascending delay = descending m
    let mut delay_s = Vec::with_capacity(raw.len());
    let mut correlation = Vec::with_capacity(raw.len());
    for (j, &c) in raw.iter().enumerate().rev() {
        let m = m_min + j as isize;
        delay_s.push(-(m as f64) * dt + offset);
        correlation.push((c / norm).clamp(-1.0, 1.0));
    }
    let mut peak_i = 0usize;
    for (i, c) in correlation.iter().enumerate() {
        if c.abs() > correlation[peak_i].abs() {
            peak_i = i;
        }
    }
    Ok(CrossCorrelation {
        peak_value: correlation[peak_i],
        peak_delay_s: delay_s[peak_i],
        delay_s,
        correlation,
    })
}

/// Root-mean-square over the whole record or a time window (absolute
/// seconds). A window is intersected with the record's extent; an empty
/// intersection is an error.
pub fn rms(x: &Waveform, window: Option<(f64, f64)>) -> Result<f64> {
    x.validate()?;
    let (i0, i1) = match window {
        None => (0usize, x.samples.len() - 1),
        Some((t0, t1)) => {
            let span_tol = 0.5 / x.sample_rate_hz;
            if t1 < t0 {
                return Err(Error::EmptyWindow {
                    t0,
                    t1,
                    start: x.start_time_s,
                    end: x.end_time_s(),
                });
            }
            let first = ((t0 - x.start_time_s) * x.sample_rate_hz - 1e-9).ceil().max(0.0);
            let last = ((t1 - x.start_time_s) * x.sample_rate_hz + 1e-9).floor();
            if last < 0.0 || first > (x.samples.len() - 1) as f64 || t1 < x.start_time_s - span_tol
            {
                return Err(Error::EmptyWindow {
                    t0,
                    t1,
                    start: x.start_time_s,
                    end: x.end_time_s(),
                });
            }
            (first as usize, (last as usize).min(x.samples.len() - 1))
        }
    };
    if i1 < i0 {
        return Err(Error::EmptyWindow {
            t0: window.map(|w| w.0).unwrap_or(x.start_time_s),
            t1: window.map(|w| w.1).unwrap_or(x.end_time_s()),
            start: x.start_time_s,
            end: x.end_time_s(),
        });
    }
    let n = (i1 - i0 + 1) as f64;
    let sum: f64 = x.samples[i0..=i1].iter().map(|s| s * s).sum();
    Ok((sum / n).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::waveform::{synth_symbol, SymbolSpec, Unit};

    fn wave(fs: f64, samples: Vec<f64>) -> Waveform {
        Waveform::new(fs, 0.0, Unit::Dimensionless, samples).unwrap()
    }

    fn tone(fs: f64, f: f64, n: usize) -> Vec<f64> {
        (0..n)
            .map(|i| (2.0 * std::f64::consts::PI * f * i as f64 / fs).sin())
            .collect()
    }

    const LP28_AT_40K: FilterSpec = FilterSpec {
        kind: FilterKind::Lowpass { cutoff_hz: 40e3 },
        order: 28,
    };

    #[test]
    fn lowpass_dc_gain_is_unity() {
        let chain = design_butterworth(&LP28_AT_40K, 20e6).unwrap();
        let dc = chain.magnitude_at(0.0);
        assert!(
            (dc - 1.0).abs() < 1e-6,
            "order-28 lowpass must pass DC at unit gain, got {dc}"
        );
        assert_eq!(chain.sections.len(), 14);
    }

    #[test]
    fn lowpass_hits_half_power_at_cutoff() {
        for (fs, fc) in [(20e6, 40e3), (20e6, 160e3), (1e6, 50e3), (192e3, 20e3)] {
            let chain = design_butterworth(
                &FilterSpec {
                    kind: FilterKind::Lowpass { cutoff_hz: fc },
                    order: 28,
                },
                fs,
            )
            .unwrap();
            let db = chain.magnitude_db_at(fc);
            assert!(
                (db + 3.0102999566398).abs() < 1e-6,
                "cutoff must sit at -3.0103 dB, got {db} dB at {fc} Hz / {fs} Hz"
            );
        }
    }

    #[test]
    fn lowpass_stopband_matches_the_analytic_magnitude() {
        // analog reference at twice the cutoff: 10 log10(1 + 2^56)
        let chain = design_butterworth(&LP28_AT_40K, 20e6).unwrap();
        let at_2fc = chain.magnitude_db_at(80e3);
        assert!(
            (at_2fc + 168.5864).abs() < 0.01,
            "digital attenuation at 2x cutoff should be 168.59 dB, got {at_2fc}"
        );
        let analog = 10.0 * (1.0 + 2f64.powi(56)).log10();
        assert!(
            (at_2fc.abs() - analog).abs() < 1.0,
            "digital design must stay within 1 dB of the analog prototype at 2x cutoff"
        );
        let at_carrier = chain.magnitude_db_at(855e3);
        assert!(
            (at_carrier + 746.21).abs() < 0.05,
            "carrier rejection should be about 746 dB, got {at_carrier}"
        );
        assert!(at_carrier < -100.0);
    }

    #[test]
    fn highpass_blocks_dc_exactly_and_cuts_at_cutoff() {
        let chain = design_butterworth(
            &FilterSpec {
                kind: FilterKind::Highpass { cutoff_hz: 1e3 },
                order: 2,
            },
            20e6,
        )
        .unwrap();
        assert_eq!(chain.magnitude_at(0.0), 0.0, "highpass DC gain must be exactly zero");
        let at_cut = chain.magnitude_db_at(1e3);
        assert!(
            (at_cut + 3.0103).abs() < 0.05,
            "highpass cutoff must sit at -3.01 dB, got {at_cut}"
        );
        let at_100 = chain.magnitude_db_at(100.0);
        assert!(
            (at_100 + 40.000434).abs() < 0.01,
            "second-order rolloff puts 100 Hz at -40 dB, got {at_100}"
        );
    }

    #[test]
    fn bandpass_design_is_sane() {
        let spec = FilterSpec {
            kind: FilterKind::Bandpass {
                low_hz: 10e3,
                high_hz: 30e3,
            },
            order: 5,
        };
        let chain = design_butterworth(&spec, 1e6).unwrap();
        assert_eq!(chain.sections.len(), 5);
        for f in [10e3, 30e3] {
            let db = chain.magnitude_db_at(f);
            assert!((db + 3.0103).abs() < 1e-6, "band edge {f} Hz at {db} dB");
        }
        let mid = chain.magnitude_db_at(17.32e3);
        assert!(mid.abs() < 0.01, "geometric band center should pass, got {mid} dB");
        assert_eq!(chain.magnitude_at(0.0), 0.0, "bandpass must block DC");
        assert!(chain.magnitude_db_at(200e3) < -60.0);
    }

    #[test]
    fn odd_orders_get_a_first_order_section() {
        let chain = design_butterworth(
            &FilterSpec {
                kind: FilterKind::Lowpass { cutoff_hz: 50e3 },
                order: 7,
            },
            1e6,
        )
        .unwrap();
        assert_eq!(chain.sections.len(), 4);
        // the most damped section leads and it is the first-order one
        assert_eq!(chain.sections[0].a2, 0.0);
        let db = chain.magnitude_db_at(50e3);
        assert!((db + 3.0103).abs() < 1e-6, "odd-order cutoff at {db} dB");
    }

    #[test]
    fn sections_are_ordered_most_damped_first() {
        let chain = design_butterworth(&LP28_AT_40K, 20e6).unwrap();
        let radii: Vec<f64> = chain
            .sections
            .iter()
            .map(|s| if s.a2 > 0.0 { s.a2.sqrt() } else { 0.0 })
            .collect();
        for pair in radii.windows(2) {
            assert!(
                pair[0] <= pair[1] + 1e-12,
                "pole radius must not decrease along the cascade: {radii:?}"
            );
        }
    }

    #[test]
    fn every_designed_section_is_stable_and_impulse_decays() {
        let chain = design_butterworth(
            &FilterSpec {
                kind: FilterKind::Lowpass { cutoff_hz: 50e3 },
                order: 8,
            },
            1e6,
        )
        .unwrap();
        for s in &chain.sections {
            assert!(s.is_stable());
        }
        let mut impulse = vec![0.0; 100_000];
        impulse[0] = 1.0;
        let y = apply_filter(&chain, &wave(1e6, impulse), FilterMode::Causal).unwrap();
        let peak = y.samples.iter().fold(0f64, |m, v| m.max(v.abs()));
        let tail = y.samples[90_000..].iter().fold(0f64, |m, v| m.max(v.abs()));
        assert!(
            tail < 1e-12 * peak,
            "impulse response must decay below 1e-12 of peak, tail {tail}, peak {peak}"
        );
    }

    #[test]
    fn unstable_request_is_reported_not_built() {
        // cutoff within one part in 1e13 of Nyquist: tan() blows up and the
        // sections land on the unit circle
        let spec = FilterSpec {
            kind: FilterKind::Lowpass {
                cutoff_hz: 0.4999999999999 * 1e6,
            },
            order: 28,
        };
        match design_butterworth(&spec, 1e6) {
            Err(Error::UnstableDesign { .. }) | Err(Error::InvalidFilterSpec { .. }) => {}
            Ok(chain) => {
                // if it does build, every section must still verify stable
                for s in &chain.sections {
                    assert!(s.is_stable(), "built an unstable section: {s:?}");
                }
            }
            Err(e) => panic!("unexpected error kind: {e:?}"),
        }
    }

    #[test]
    fn cutoff_outside_nyquist_is_rejected() {
        let bad = FilterSpec {
            kind: FilterKind::Lowpass { cutoff_hz: 600e3 },
            order: 4,
        };
        assert!(matches!(
            design_butterworth(&bad, 1e6),
            Err(Error::InvalidFilterSpec { .. })
        ));
        assert!(design_butterworth(
            &FilterSpec {
                kind: FilterKind::Bandpass {
                    low_hz: 30e3,
                    high_hz: 10e3
                },
                order: 3
            },
            1e6
        )
        .is_err());
    }

    #[test]
    fn design_matches_analytic_butterworth_response_at_probe_frequencies() {
        // |H|^2 = 1 / (1 + (w/wc)^2n) in the prewarped frequency variable
        let fs = 1e6;
        for (order, fc) in [(2usize, 20e3), (5, 50e3), (28, 40e3)] {
            let chain = design_butterworth(
                &FilterSpec {
                    kind: FilterKind::Lowpass { cutoff_hz: fc },
                    order,
                },
                fs,
            )
            .unwrap();
            let warp = |f: f64| (std::f64::consts::PI * f / fs).tan();
            for k in 0..20 {
                let f = 2e3 * 1.3f64.powi(k);
                if f >= fs / 2.0 {
                    break;
                }
                let ratio = warp(f) / warp(fc);
                let expect = -10.0 * (1.0 + ratio.powi(2 * order as i32)).log10();
                if expect < -700.0 {
                    continue;
                }
                let got = chain.magnitude_db_at(f);
                assert!(
                    (got - expect).abs() < 0.1,
                    "order {order} at {f} Hz: designed {got} dB vs analytic {expect} dB"
                );
            }
        }
    }

    #[test]
    fn causal_filtering_is_linear_and_time_invariant() {
        let fs = 1e6;
        let chain = design_butterworth(
            &FilterSpec {
                kind: FilterKind::Lowpass { cutoff_hz: 80e3 },
                order: 6,
            },
            fs,
        )
        .unwrap();
        let x1: Vec<f64> = tone(fs, 12.3e3, 4000);
        let x2: Vec<f64> = (0..4000).map(|i| ((i * i) as f64 * 1e-5).sin()).collect();
        let y1 = apply_filter(&chain, &wave(fs, x1.clone()), FilterMode::Causal).unwrap();
        let y2 = apply_filter(&chain, &wave(fs, x2.clone()), FilterMode::Causal).unwrap();
        let mixed: Vec<f64> = x1.iter().zip(&x2).map(|(a, b)| 2.0 * a - 0.5 * b).collect();
        let ym = apply_filter(&chain, &wave(fs, mixed), FilterMode::Causal).unwrap();
        let worst = ym
            .samples
            .iter()
            .zip(y1.samples.iter().zip(&y2.samples))
            .map(|(m, (a, b))| (m - (2.0 * a - 0.5 * b)).abs())
            .fold(0f64, f64::max);
        assert!(worst < 1e-9, "superposition violated by {worst}");

        // shifting in k zeros shifts the output by exactly k samples
        let k = 17;
        let mut shifted = vec![0.0; k];
        shifted.extend_from_slice(&x1);
        let ys = apply_filter(&chain, &wave(fs, shifted), FilterMode::Causal).unwrap();
        assert!(
            ys.samples[k..]
                .iter()
                .zip(&y1.samples)
                .all(|(s, y)| s == y),
            "time invariance must hold bit for bit from zero initial state"
        );
    }

    #[test]
    fn causal_passband_tone_keeps_its_amplitude() {
        let fs = 20e6;
        let chain = design_butterworth(&LP28_AT_40K, fs).unwrap();
        let f = 10e3;
        let n = 60_000;
        let y = apply_filter(&chain, &wave(fs, tone(fs, f, n)), FilterMode::Causal).unwrap();
        // steady state: peak over the last whole cycles of the record
        let steady = &y.samples[n - 4000..];
        let peak = steady.iter().fold(0f64, |m, v| m.max(v.abs()));
        let db = 20.0 * peak.log10();
        assert!(
            db.abs() < 0.1,
            "in-band tone at cutoff/4 must keep its amplitude, got {db} dB"
        );
    }

    #[test]
    fn zero_phase_keeps_a_symmetric_pulse_symmetric() {
        let fs = 1e6;
        let chain = design_butterworth(
            &FilterSpec {
                kind: FilterKind::Lowpass { cutoff_hz: 50e3 },
                order: 4,
            },
            fs,
        )
        .unwrap();
        let n = 4001;
        let c = 2000usize;
        let x: Vec<f64> = (0..n)
            .map(|i| (-((i as f64 - c as f64) / 150.0).powi(2)).exp())
            .collect();
        let y = apply_filter(&chain, &wave(fs, x), FilterMode::ZeroPhase).unwrap();
        let peak_at = y
            .samples
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.total_cmp(b.1))
            .unwrap()
            .0;
        assert!(
            (peak_at as isize - c as isize).abs() <= 1,
            "zero-phase output must not move the pulse center, peak at {peak_at}"
        );
        let peak = y.samples[peak_at];
        for k in 1..600 {
            let d = (y.samples[c + k] - y.samples[c - k]).abs();
            assert!(
                d < 1e-9 * peak,
                "zero-phase output must stay symmetric, asymmetry {d} at offset {k}"
            );
        }
    }

    #[test]
    fn filtering_zero_gives_zero_and_rates_must_match() {
        let chain = design_butterworth(&LP28_AT_40K, 20e6).unwrap();
        let y = apply_filter(&chain, &wave(20e6, vec![0.0; 100]), FilterMode::Causal).unwrap();
        assert!(y.samples.iter().all(|&v| v == 0.0));
        let err = apply_filter(&chain, &wave(1e6, vec![1.0; 10]), FilterMode::Causal).unwrap_err();
        assert!(matches!(err, Error::SampleRateMismatch { .. }));
    }

    #[test]
    fn identity_chain_passes_records_untouched() {
        let x = wave(48e3, (0..64).map(|i| (i as f64).cos()).collect());
        let y = apply_filter(&FilterChain::identity(48e3), &x, FilterMode::ZeroPhase).unwrap();
        assert_eq!(x, y);
        assert_eq!(FilterChain::identity(48e3).magnitude_db_at(1e3), 0.0);
    }

    #[test]
    fn postprocess_chain_composition() {
        let chain = postprocess_chain(20e3, 20e6).unwrap();
        assert_eq!(chain.sections.len(), 15, "14 lowpass sections plus 1 highpass");
        let at_cut = chain.magnitude_db_at(40e3);
        // highpass at 1 kHz contributes nothing at 40 kHz
        assert!((at_cut + 3.0103).abs() < 1e-3, "lowpass cutoff in chain at {at_cut} dB");
        assert_eq!(chain.magnitude_at(0.0), 0.0, "chain must block DC");
        assert!(
            chain.magnitude_db_at(855e3) < -100.0,
            "carrier must be deeply rejected"
        );
        assert!(postprocess_chain(80e3, 20e6).unwrap().magnitude_db_at(855e3) < -100.0);
        // Nyquist violation rejected
        assert!(postprocess_chain(30e3, 100e3).is_err());
    }

    #[test]
    fn spectrum_of_a_bin_centered_tone_is_a_single_line() {
        let fs = 40960.0;
        let n = 4096;
        let x = wave(fs, tone(fs, 1000.0, n));
        let s = spectrum(&x).unwrap();
        assert_eq!(s.frequency_hz.len(), n / 2 + 1);
        let peak_bin = s.bin_of(1000.0);
        assert_eq!(peak_bin, 100);
        let peak = s.magnitude[peak_bin];
        let floor = 10f64.powf(-250.0 / 20.0);
        for (k, &m) in s.magnitude.iter().enumerate() {
            if k != peak_bin {
                assert!(
                    m < peak * floor,
                    "bin {k} should be below -250 dB of the line, got {}",
                    20.0 * (m / peak).log10()
                );
            }
        }
    }

    #[test]
    fn spectrum_preserves_energy() {
        for n in [1024usize, 1023] {
            let x = wave(
                1e5,
                (0..n).map(|i| ((i * 37 + 11) as f64 * 0.61).sin() * 0.5 + 0.1).collect(),
            );
            let time: f64 = x.samples.iter().map(|s| s * s).sum();
            let s = spectrum(&x).unwrap();
            let freq: f64 = s.magnitude.iter().map(|m| m * m).sum();
            assert!(
                (time - freq).abs() < 1e-9 * time,
                "energy mismatch for N={n}: time {time} vs spectral {freq}"
            );
        }
    }

    #[test]
    fn sqram_symbol_spectrum_has_even_envelope_harmonic_sidebands() {
        // the rectified-cosine envelope contains only whole multiples of the
        // difference frequency: lines at fc +/- k fd with amplitude
        // 1/(4k^2 - 1) of the carrier line, none at half-multiples
        let spec = SymbolSpec {
            difference_frequency_hz: 20e3,
            n_cycles: 8.0,
            polarity: 1,
        };
        let w = synth_symbol(&spec, 855e3, 20e6, 1.0).unwrap();
        let s = spectrum(&w).unwrap();
        let carrier = s.magnitude[s.bin_of(855e3)];
        for (offset, expect) in [(20e3, 1.0 / 3.0), (40e3, 1.0 / 15.0)] {
            for f in [855e3 - offset, 855e3 + offset] {
                let got = s.magnitude[s.bin_of(f)] / carrier;
                assert!(
                    (got - expect).abs() < 1e-3 * expect.max(1.0),
                    "sideband at {f} Hz should be {expect} of the carrier, got {got}"
                );
            }
        }
        // half-multiple offsets carry no first-order line: the only energy
        // there is the conjugate carrier image beating with envelope
        // harmonics of order ~2 fc/fd, which decay as 1/(4k^2 - 1) ~ 3e-5
        for f in [855e3 - 10e3, 855e3 + 10e3, 855e3 - 30e3, 855e3 + 30e3] {
            let rel = s.magnitude[s.bin_of(f)] / carrier;
            assert!(
                rel < 1e-4,
                "no half-multiple sidebands expected, found {rel} at {f} Hz"
            );
        }
    }

    #[test]
    fn analytic_envelope_recovers_an_am_envelope() {
        let fs = 1e6;
        let n = 10_000;
        let x: Vec<f64> = (0..n)
            .map(|i| {
                let t = i as f64 / fs;
                let env = 1.0 + 0.5 * (2.0 * std::f64::consts::PI * 2e3 * t).cos();
                env * (2.0 * std::f64::consts::PI * 100e3 * t).sin()
            })
            .collect();
        let env = analytic_envelope(&wave(fs, x)).unwrap();
        // interior only: the FFT analytic signal wraps at record edges
        for i in 500..n - 500 {
            let t = i as f64 / fs;
            let expect = 1.0 + 0.5 * (2.0 * std::f64::consts::PI * 2e3 * t).cos();
            assert!(
                (env.samples[i] - expect).abs() < 5e-3,
                "envelope off at sample {i}: got {} want {expect}",
                env.samples[i]
            );
        }
    }

    #[test]
    fn xcorr_of_identical_and_negated_records() {
        let x = wave(1e5, tone(1e5, 3e3, 512));
        let same = normalized_xcorr(&x, &x).unwrap();
        assert!(
            (same.peak_value - 1.0).abs() < 1e-9,
            "self correlation peaks at 1, got {}",
            same.peak_value
        );
        assert_eq!(same.peak_delay_s, 0.0);
        let neg = Waveform {
            samples: x.samples.iter().map(|v| -v).collect(),
            ..x.clone()
        };
        let anti = normalized_xcorr(&x, &neg).unwrap();
        assert!(
            (anti.peak_value + 1.0).abs() < 1e-9,
            "anti correlation peaks at -1, got {}",
            anti.peak_value
        );
        assert_eq!(anti.peak_delay_s, 0.0);
    }

    #[test]
    fn xcorr_finds_a_sample_shift_and_a_start_time_shift() {
        let fs = 1e5;
        let body = tone(fs, 3e3, 256);
        let a = wave(fs, body.clone());
        // b = a delayed by 17 samples
        let mut delayed = vec![0.0; 17];
        delayed.extend_from_slice(&body);
        let b = wave(fs, delayed);
        let c = normalized_xcorr(&a, &b).unwrap();
        assert!((c.peak_value - 1.0).abs() < 1e-9);
        assert!(
            (c.peak_delay_s - 17.0 / fs).abs() < 1e-12,
            "sample-domain delay must read 17 samples, got {}",
            c.peak_delay_s
        );
        // same content, delay expressed through the start time instead
        let b2 = Waveform {
            start_time_s: 17.0 / fs,
            ..a.clone()
        };
        let c2 = normalized_xcorr(&a, &b2).unwrap();
        assert!(
            (c2.peak_delay_s - 17.0 / fs).abs() < 1e-12,
            "start-time delay must read the same, got {}",
            c2.peak_delay_s
        );
    }

    #[test]
    fn xcorr_is_scale_invariant_and_odd_under_negation() {
        let fs = 1e5;
        let a = wave(fs, tone(fs, 3e3, 200));
        let b = wave(fs, tone(fs, 3.7e3, 150));
        let base = normalized_xcorr(&a, &b).unwrap();
        let scaled = Waveform {
            samples: b.samples.iter().map(|v| 42.0 * v).collect(),
            ..b.clone()
        };
        let s = normalized_xcorr(&a, &scaled).unwrap();
        assert!((s.peak_value - base.peak_value).abs() < 1e-9);
        let neg = Waveform {
            samples: b.samples.iter().map(|v| -v).collect(),
            ..b.clone()
        };
        let n = normalized_xcorr(&a, &neg).unwrap();
        for (x, y) in n.correlation.iter().zip(&base.correlation) {
            assert!((x + y).abs() < 1e-9, "negating one input must negate the series");
        }
    }

    #[test]
    fn xcorr_rejects_silent_records() {
        let a = wave(1e5, vec![0.0; 64]);
        let b = wave(1e5, tone(1e5, 3e3, 64));
        assert!(matches!(
            normalized_xcorr(&a, &b),
            Err(Error::ZeroEnergy { .. })
        ));
        assert!(matches!(
            normalized_xcorr(&b, &a),
            Err(Error::ZeroEnergy { .. })
        ));
    }

    #[test]
    fn rms_of_constants_sines_and_windows() {
        let fs = 1e5;
        assert_eq!(rms(&wave(fs, vec![-3.0; 50]), None).unwrap(), 3.0);
        assert_eq!(rms(&wave(fs, vec![0.0; 50]), None).unwrap(), 0.0);
        // whole periods of a unit sine: 1/sqrt(2)
        let x = wave(fs, tone(fs, 1e3, 1000));
        let r = rms(&x, None).unwrap();
        assert!(
            (r - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-9,
            "unit sine rms over whole periods, got {r}"
        );
        // window selecting the first half
        let half = rms(&x, Some((0.0, 499.0 / fs))).unwrap();
        assert!((half - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-9);
        // empty window errors
        assert!(matches!(
            rms(&x, Some((1.0, 2.0))),
            Err(Error::EmptyWindow { .. })
        ));
        assert!(matches!(
            rms(&x, Some((2.0, 1.0))),
            Err(Error::EmptyWindow { .. })
        ));
    }
}
