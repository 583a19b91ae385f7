//! Measurement procedures on demodulated records: matched-reference pulse
//! quality, phase comparison, beam pattern reduction, level conversion, and
//! symbol decoding.

use crate::dsp::{
    apply_filter, normalized_xcorr, raw_xcorr_full, rms, FilterChain, FilterMode,
};
use crate::error::{Error, Result};
use crate::waveform::{SymbolSpec, Unit, Waveform};

/// A cross-range sweep of demodulated records at a fixed range.
#[derive(Debug, Clone)]
pub struct ScanData {
    pub range_m: f64,
    /// Cross-range offsets from the axis, strictly increasing.
    pub positions_m: Vec<f64>,
    /// One record per position, all at the same sample rate.
    pub waveforms: Vec<Waveform>,
}

impl ScanData {
    pub fn validate(&self) -> Result<()> {
        if !(self.range_m > 0.0 && self.range_m.is_finite()) {
            return Err(Error::InvalidScan {
                reason: format!("range must be positive and finite, got {}", self.range_m),
            });
        }
        if self.positions_m.len() < 3 {
            return Err(Error::InvalidScan {
                reason: format!(
                    "a pattern needs at least 3 positions, got {}",
                    self.positions_m.len()
                ),
            });
        }
        if self.positions_m.iter().any(|p| !p.is_finite()) {
            return Err(Error::InvalidScan {
                reason: "positions must be finite".into(),
            });
        }
        for pair in self.positions_m.windows(2) {
            if pair[1] <= pair[0] {
                return Err(Error::InvalidScan {
                    reason: format!(
                        "positions must be strictly increasing, found {} then {}",
                        pair[0], pair[1]
                    ),
                });
            }
        }
        if self.waveforms.len() != self.positions_m.len() {
            return Err(Error::InvalidScan {
                reason: format!(
                    "{} positions but {} waveforms",
                    self.positions_m.len(),
                    self.waveforms.len()
                ),
            });
        }
        let fs = self.waveforms[0].sample_rate_hz;
        for w in &self.waveforms {
            w.validate()?;
            if (w.sample_rate_hz - fs).abs() > 1e-9 * fs {
                return Err(Error::InvalidScan {
                    reason: "all scan records must share one sample rate".into(),
                });
            }
        }
        Ok(())
    }
}

/// Match of a measured pulse against its reference.
#[derive(Debug, Clone, Copy)]
pub struct PulseQuality {
    /// Peak normalized cross-correlation, signed: +1 is a perfect match,
    /// -1 a perfect match of inverted polarity.
    pub peak_correlation: f64,
    /// Time at which the measured pulse best aligns with the reference.
    pub arrival_time_s: f64,
}

/// Reduced beam pattern from a cross-range scan.
#[derive(Debug, Clone)]
pub struct ScanResult {
    pub beamwidth_deg: f64,
    pub angles_deg: Vec<f64>,
    /// Per-position level relative to the loudest position.
    pub normalized_rms_db: Vec<f64>,
    pub peak_index: usize,
    pub warnings: Vec<String>,
}

/// Half-power level relative to the peak.
const HALF_POWER_DB: f64 = -3.010299956639812;

/// Builds the ideal demodulated pulse for a symbol as it would appear after
/// the receive filters: a gated sinusoid at the difference frequency, run
/// through the chain. With filters attached, four gate lengths of zeros are
/// appended so the response can settle; an empty chain returns the bare
/// gated sinusoid. Pure function of its inputs, so repeated calls are
/// bit-identical.
pub fn make_reference(
    symbol: &SymbolSpec,
    sample_rate_hz: f64,
    chain: &FilterChain,
    mode: FilterMode,
) -> Result<Waveform> {
    symbol.validate()?;
    if !(sample_rate_hz > 0.0 && sample_rate_hz.is_finite()) {
        return Err(Error::InvalidParam {
            name: "sample_rate_hz",
            reason: "must be positive and finite",
            value: sample_rate_hz,
        });
    }
    let gate_n = symbol.gate_samples(sample_rate_hz);
    if gate_n == 0 {
        return Err(Error::InsufficientSignal {
            span_s: symbol.duration_s(),
            f_hz: symbol.difference_frequency_hz,
        });
    }
    let total = if chain.sections.is_empty() {
        gate_n
    } else {
        5 * gate_n
    };
    let w = 2.0 * std::f64::consts::PI * symbol.difference_frequency_hz;
    let pol = symbol.polarity as f64;
    let samples: Vec<f64> = (0..total)
        .map(|i| {
            if i < gate_n {
                pol * (w * i as f64 / sample_rate_hz).sin()
            } else {
                0.0
            }
        })
        .collect();
    let gated = Waveform::new(sample_rate_hz, 0.0, Unit::Dimensionless, samples)?;
    apply_filter(chain, &gated, mode)
}

/// Scores a measured pulse against a reference. The arrival time is where
/// the reference must be placed on the measured record's time line to align
/// best, so a reference starting at zero reads out the pulse arrival
/// directly.
pub fn pulse_quality(measured: &Waveform, reference: &Waveform) -> Result<PulseQuality> {
    let c = normalized_xcorr(reference, measured)?;
    Ok(PulseQuality {
        peak_correlation: c.peak_value,
        arrival_time_s: c.peak_delay_s,
    })
}

/// Phase of `b` relative to `a` at one frequency: the angle by which `b`
/// leads `a`, in degrees within [0, 360), so a record delayed by a quarter
/// period reads 270. Both records are projected onto the probe frequency
/// over their common time span; when that span is generous (over three
/// periods) one period is trimmed from each side to keep edge transients
/// out of the estimate.
pub fn phase_difference_deg(a: &Waveform, b: &Waveform, frequency_hz: f64) -> Result<f64> {
    a.validate()?;
    b.validate()?;
    if !(frequency_hz > 0.0 && frequency_hz.is_finite()) {
        return Err(Error::InvalidParam {
            name: "frequency_hz",
            reason: "must be positive and finite",
            value: frequency_hz,
        });
    }
    let period = 1.0 / frequency_hz;
    let mut t0 = a.start_time_s.max(b.start_time_s);
    let mut t1 = a.end_time_s().min(b.end_time_s());
    if t1 - t0 < period {
        return Err(Error::InsufficientSignal {
            span_s: (t1 - t0).max(0.0),
            f_hz: frequency_hz,
        });
    }
    if t1 - t0 > 3.0 * period {
        t0 += period;
        t1 -= period;
    }
    let project = |x: &Waveform| -> (f64, f64) {
        let w = 2.0 * std::f64::consts::PI * frequency_hz;
        let i0 = ((t0 - x.start_time_s) * x.sample_rate_hz).ceil().max(0.0) as usize;
        let i1 = (((t1 - x.start_time_s) * x.sample_rate_hz).floor() as usize)
            .min(x.samples.len() - 1);
        let (mut re, mut im) = (0.0, 0.0);
        for i in i0..=i1 {
            let t = x.time_at(i);
            re += x.samples[i] * (w * t).cos();
            im -= x.samples[i] * (w * t).sin();
        }
        (re, im)
    };
    let (ar, ai) = project(a);
    let (br, bi) = project(b);
    if ar == 0.0 && ai == 0.0 {
        return Err(Error::ZeroEnergy { which: "first waveform at the probe frequency" });
    }
    if br == 0.0 && bi == 0.0 {
        return Err(Error::ZeroEnergy { which: "second waveform at the probe frequency" });
    }
    // arg(zb / za) without the division
    let deg = (bi * ar - br * ai).atan2(br * ar + bi * ai).to_degrees();
    Ok(if deg < 0.0 { deg + 360.0 } else { deg })
}

/// Reduces a cross-range scan to a beam pattern and its half-power width.
/// Each record is run through the chain, its level taken as rms, and the
/// pattern normalized to the loudest position. The width comes from
/// straight-line interpolation of level in dB against angle on both sides
/// of the peak.
pub fn beamwidth_from_scan(
    scan: &ScanData,
    chain: &FilterChain,
    mode: FilterMode,
) -> Result<ScanResult> {
    scan.validate()?;
    let mut levels = Vec::with_capacity(scan.waveforms.len());
    for w in &scan.waveforms {
        let filtered = apply_filter(chain, w, mode)?;
        levels.push(rms(&filtered, None)?);
    }
    let peak_index = levels
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.total_cmp(b.1))
        .map(|(i, _)| i)
        .unwrap_or(0);
    let peak = levels[peak_index];
    if peak <= 0.0 {
        return Err(Error::ZeroEnergy { which: "every scan position" });
    }
    let angles_deg: Vec<f64> = scan
        .positions_m
        .iter()
        .map(|p| (p / scan.range_m).atan().to_degrees())
        .collect();
    let normalized_rms_db: Vec<f64> = levels
        .iter()
        .map(|l| {
            if *l > 0.0 {
                20.0 * (l / peak).log10()
            } else {
                f64::NEG_INFINITY
            }
        })
        .collect();

    let mut warnings = Vec::new();
    let mid_lo = (scan.positions_m.len() - 1) / 2;
    let mid_hi = scan.positions_m.len() / 2;
    if peak_index != mid_lo && peak_index != mid_hi {
        warnings.push(format!(
            "pattern peak at position index {peak_index} ({:.4} m), not at the scan center; \
             the scan may be aimed off axis",
            scan.positions_m[peak_index]
        ));
    }

    // walk outward from the peak to the first half-power crossing each side
    let cross = |dir: isize| -> Result<f64> {
        let mut i = peak_index as isize;
        loop {
            let j = i + dir;
            if j < 0 || j as usize >= normalized_rms_db.len() {
                return Err(Error::NoCrossing {
                    detail: format!(
                        "pattern never falls to half power {} of the peak; widen the scan",
                        if dir < 0 { "left" } else { "right" }
                    ),
                });
            }
            let (d0, d1) = (normalized_rms_db[i as usize], normalized_rms_db[j as usize]);
            if d1 <= HALF_POWER_DB {
                let (a0, a1) = (angles_deg[i as usize], angles_deg[j as usize]);
                let frac = (HALF_POWER_DB - d0) / (d1 - d0);
                return Ok(a0 + frac * (a1 - a0));
            }
            i = j;
        }
    };
    let left = cross(-1)?;
    let right = cross(1)?;
    Ok(ScanResult {
        beamwidth_deg: right - left,
        angles_deg,
        normalized_rms_db,
        peak_index,
        warnings,
    })
}

/// Source level referenced to 1 uPa at 1 m, from a pressure measured at
/// range: back-propagates spherically.
pub fn source_level_db(pressure_pa: f64, range_m: f64) -> Result<f64> {
    if !(pressure_pa > 0.0 && pressure_pa.is_finite()) {
        return Err(Error::InvalidParam {
            name: "pressure_pa",
            reason: "must be positive and finite",
            value: pressure_pa,
        });
    }
    if !(range_m > 0.0 && range_m.is_finite()) {
        return Err(Error::InvalidParam {
            name: "range_m",
            reason: "must be positive and finite",
            value: range_m,
        });
    }
    Ok(20.0 * (pressure_pa / 1e-6).log10() + 20.0 * range_m.log10())
}

/// Decodes a phase-coded symbol stream by sliding the reference over the
/// received record. The record's first sample is taken as the start of the
/// first slot; slot i spans one repetition period starting at i periods in.
/// Each slot reports +1 or -1 from the sign of the strongest correlation,
/// or 0 for a silent slot.
pub fn decode_symbols(
    received: &Waveform,
    reference: &Waveform,
    n_symbols: usize,
    period_s: f64,
) -> Result<Vec<i8>> {
    received.validate()?;
    reference.validate()?;
    if n_symbols == 0 {
        return Err(Error::EmptySequence);
    }
    if (received.sample_rate_hz - reference.sample_rate_hz).abs()
        > 1e-9 * received.sample_rate_hz
    {
        return Err(Error::SampleRateMismatch {
            a: received.sample_rate_hz,
            b: reference.sample_rate_hz,
        });
    }
    let fs = received.sample_rate_hz;
    let period_n = (period_s * fs).round() as isize;
    if period_n < 1 {
        return Err(Error::InvalidParam {
            name: "period_s",
            reason: "must span at least one sample",
            value: period_s,
        });
    }
    if received.samples.iter().all(|&v| v == 0.0) {
        return Err(Error::ZeroEnergy { which: "received waveform" });
    }
    if reference.samples.iter().all(|&v| v == 0.0) {
        return Err(Error::ZeroEnergy { which: "reference waveform" });
    }
    let c = raw_xcorr_full(&received.samples, &reference.samples);
    // non-negative reference offsets into the received record
    let zero_lag = reference.samples.len() - 1;
    let max_lag = received.samples.len() as isize - 1;
    let mut symbols = Vec::with_capacity(n_symbols);
    for slot in 0..n_symbols {
        let lo = slot as isize * period_n;
        if lo > max_lag {
            return Err(Error::SlotMisalignment {
                slot,
                n_slots: n_symbols,
            });
        }
        let hi = ((slot as isize + 1) * period_n).min(max_lag + 1);
        let mut best = 0.0f64;
        for m in lo..hi {
            let v = c[zero_lag + m as usize];
            if v.abs() > best.abs() {
                best = v;
            }
        }
        symbols.push(if best > 0.0 {
            1
        } else if best < 0.0 {
            -1
        } else {
            0
        });
    }
    Ok(symbols)
}

/// Estimates the dominant frequency of an oscillatory record from the
/// median instantaneous frequency of its analytic signal, taken only where
/// the envelope exceeds half its maximum. The median makes the estimate
/// insensitive to edge transients and brief interference; the envelope gate
/// keeps silence out entirely. Fails when the strong part of the record
/// does not complete at least one full turn of phase.
pub fn measure_frequency_hz(x: &Waveform) -> Result<f64> {
    x.validate()?;
    let z = crate::dsp::analytic_signal(x)?;
    let n = z.len();
    let peak_env = z.iter().map(|v| v.norm()).fold(0f64, f64::max);
    if peak_env == 0.0 {
        return Err(Error::ZeroEnergy { which: "frequency probe input" });
    }
    if n < 3 {
        return Err(Error::InsufficientSignal {
            span_s: x.duration_s(),
            f_hz: 0.0,
        });
    }
    // unwrap the analytic phase over the whole record
    let mut phase = Vec::with_capacity(n);
    let mut prev = z[0].arg();
    phase.push(prev);
    let mut offset = 0.0;
    for v in z.iter().skip(1) {
        let raw = v.arg();
        let mut d = raw - prev;
        while d > std::f64::consts::PI {
            d -= 2.0 * std::f64::consts::PI;
        }
        while d < -std::f64::consts::PI {
            d += 2.0 * std::f64::consts::PI;
        }
        offset += d - (raw - prev);
        phase.push(raw + offset);
        prev = raw;
    }
    let scale = x.sample_rate_hz / (2.0 * std::f64::consts::PI);
    let threshold = 0.5 * peak_env;
    let mut rates = Vec::new();
    let (mut ph_min, mut ph_max) = (f64::INFINITY, f64::NEG_INFINITY);
    for i in 0..n {
        if z[i].norm() < threshold {
            continue;
        }
        ph_min = ph_min.min(phase[i]);
        ph_max = ph_max.max(phase[i]);
        let rate = if i == 0 {
            phase[1] - phase[0]
        } else if i == n - 1 {
            phase[n - 1] - phase[n - 2]
        } else {
            (phase[i + 1] - phase[i - 1]) / 2.0
        };
        rates.push(rate * scale);
    }
    if ph_max - ph_min < 2.0 * std::f64::consts::PI {
        return Err(Error::InsufficientSignal {
            span_s: x.duration_s(),
            f_hz: (ph_max - ph_min) * scale / x.samples.len() as f64,
        });
    }
    rates.sort_by(f64::total_cmp);
    let mid = rates.len() / 2;
    Ok(if rates.len() % 2 == 1 {
        rates[mid]
    } else {
        0.5 * (rates[mid - 1] + rates[mid])
    })
}
