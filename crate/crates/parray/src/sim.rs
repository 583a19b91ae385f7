//! End-to-end scenario orchestration: one struct describes a transmission,
//! and the runners here carry it from drive synthesis through demodulation,
//! receive filtering, and measurement.
//!
//! The time base is shared by every runner: the drive starts at t = 0, the
//! face pressure is calibrated at the reference range (1 m), and records at
//! the observation range start at their acoustic flight time.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::analysis::{
    beamwidth_from_scan, decode_symbols, make_reference, measure_frequency_hz,
    phase_difference_deg, pulse_quality, source_level_db, ScanData,
};
use crate::dsp::{
    analytic_envelope, apply_filter, postprocess_chain, rms, spectrum, FilterMode, Spectrum,
};
use crate::error::{Error, Result};
use crate::medium::{
    absorption_np_per_m, absorption_range, rayleigh_distance, shock_distance, MediumParams,
};
use crate::propagation::{
    berktay_demodulate, directivity, halfpower_beamwidth_deg, primary_at_range, BerktayParams,
};
use crate::transducer::{drive_to_pressure, SourceParams};
use crate::waveform::{synth_sequence, synth_symbol, SymbolSpec, Unit, Waveform};

/// Calibration range for the source: face pressure figures refer to 1 m.
pub const REFERENCE_RANGE_M: f64 = 1.0;

/// Scenario schema understood by this build.
pub const SCHEMA_VERSION: u32 = 1;

/// Artifact names a simulation can produce, in the order they are written.
pub const ARTIFACT_NAMES: [&str; 6] = [
    "drive",
    "primary_at_range",
    "demodulated_raw",
    "demodulated_filtered",
    "spectrum",
    "report",
];

/// A complete transmission description. Deserializes from JSON with every
/// field optional; unknown fields are rejected so typos fail loudly.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Scenario {
    pub schema_version: u32,
    pub medium: MediumParams,
    pub source: SourceParams,
    pub symbol: SymbolSpec,
    /// Observation range from the source face.
    pub range_m: f64,
    pub sample_rate_hz: f64,
    /// Drive level in units of the rated drive; 1.0 reaches the rated face
    /// pressure.
    pub drive_amplitude: f64,
    pub filter_mode: FilterMode,
    /// Silence between symbol gates in a coded sequence.
    pub guard_s: f64,
    /// Receiver noise, as a fraction of the noiseless filtered record's rms.
    pub noise_rms_fraction: f64,
    pub seed: u64,
    /// Artifacts to emit; empty means all of them.
    pub outputs: Vec<String>,
}

impl Default for Scenario {
    fn default() -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            medium: MediumParams::default(),
            source: SourceParams::default(),
            symbol: SymbolSpec::default(),
            range_m: 2.0,
            sample_rate_hz: crate::waveform::DEFAULT_SAMPLE_RATE_HZ,
            drive_amplitude: 1.0,
            filter_mode: FilterMode::Causal,
            guard_s: 100e-6,
            noise_rms_fraction: 0.0,
            seed: 0,
            outputs: Vec::new(),
        }
    }
}

impl Scenario {
    /// Checks the whole description before any work starts, so a runner
    /// either proceeds cleanly or fails without side effects.
    pub fn validate(&self) -> Result<()> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(Error::UnsupportedSchema {
                found: self.schema_version,
                expected: SCHEMA_VERSION,
            });
        }
        self.medium.validate()?;
        self.source.validate()?;
        self.symbol.validate()?;
        if !(self.range_m > 0.0 && self.range_m.is_finite()) {
            return Err(Error::InvalidParam {
                name: "range_m",
                reason: "must be positive and finite",
                value: self.range_m,
            });
        }
        if !(self.sample_rate_hz.is_finite()
            && self.sample_rate_hz >= 8.0 * self.source.center_frequency_hz)
        {
            return Err(Error::UndersampledDrive {
                sample_rate_hz: self.sample_rate_hz,
                center_hz: self.source.center_frequency_hz,
            });
        }
        if !(self.drive_amplitude > 0.0 && self.drive_amplitude.is_finite()) {
            return Err(Error::InvalidParam {
                name: "drive_amplitude",
                reason: "must be positive and finite",
                value: self.drive_amplitude,
            });
        }
        if !(self.guard_s >= 0.0) || !self.guard_s.is_finite() {
            return Err(Error::InvalidParam {
                name: "guard_s",
                reason: "must be >= 0",
                value: self.guard_s,
            });
        }
        if !(self.noise_rms_fraction >= 0.0) || !self.noise_rms_fraction.is_finite() {
            return Err(Error::InvalidParam {
                name: "noise_rms_fraction",
                reason: "must be >= 0",
                value: self.noise_rms_fraction,
            });
        }
        if self.symbol.difference_frequency_hz >= self.source.center_frequency_hz {
            return Err(Error::Config {
                reason: format!(
                    "difference frequency {} Hz must sit below the carrier {} Hz",
                    self.symbol.difference_frequency_hz, self.source.center_frequency_hz
                ),
            });
        }
        // the receive chain must be designable at this rate
        postprocess_chain(self.symbol.difference_frequency_hz, self.sample_rate_hz)?;
        for name in &self.outputs {
            if !ARTIFACT_NAMES.contains(&name.as_str()) {
                return Err(Error::Config {
                    reason: format!(
                        "unknown output \"{name}\"; valid outputs are {}",
                        ARTIFACT_NAMES.join(", ")
                    ),
                });
            }
        }
        Ok(())
    }

    /// Whether an artifact should be written: an empty list selects all.
    pub fn wants(&self, artifact: &str) -> bool {
        self.outputs.is_empty() || self.outputs.iter().any(|o| o == artifact)
    }
}

/// The characteristic ranges of a scenario's geometry.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DistancesReport {
    /// Boundary between the collimated near field and spherical spreading.
    pub rayleigh_distance_m: f64,
    /// e-folding range of the carrier; the virtual array's effective length.
    pub absorption_range_m: f64,
    /// Range where cumulative steepening would shock the carrier.
    pub shock_distance_m: f64,
    pub range_m: f64,
    pub in_collimated_zone: bool,
}

/// Computes the three characteristic ranges and relates the observation
/// range to them.
pub fn run_distances(scenario: &Scenario) -> Result<DistancesReport> {
    scenario.validate()?;
    let f_c = scenario.source.center_frequency_hz;
    let rayleigh =
        rayleigh_distance(scenario.source.aperture_area_m2(), f_c, &scenario.medium)?;
    let absorption = absorption_range(f_c, &scenario.medium)?;
    let shock = shock_distance(
        scenario.drive_amplitude * scenario.source.primary_pressure_pa,
        f_c,
        &scenario.medium,
    )?;
    Ok(DistancesReport {
        rayleigh_distance_m: rayleigh,
        absorption_range_m: absorption,
        shock_distance_m: shock,
        range_m: scenario.range_m,
        in_collimated_zone: scenario.range_m <= rayleigh,
    })
}

/// Scalar measurements of a single-symbol transmission.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulationReport {
    /// Peak normalized correlation of the filtered record against its ideal
    /// pulse; signed, so inverted arrivals read negative.
    pub peak_correlation: f64,
    pub arrival_time_s: f64,
    /// Phase of the raw demodulated record relative to the positive-polarity
    /// transmission of the same symbol; None when the gate is too short to
    /// measure.
    pub phase_vs_positive_deg: Option<f64>,
    /// Dominant frequency of the filtered record; None when the record does
    /// not sustain a full cycle.
    pub measured_frequency_hz: Option<f64>,
    /// Largest magnitude of the filtered record.
    pub peak_pressure_pa: f64,
    /// Receive-chain attenuation at the carrier frequency.
    pub carrier_rejection_db: f64,
    /// Equivalent source level of the demodulated wave, re 1 uPa at 1 m.
    pub source_level_db: f64,
    pub warnings: Vec<String>,
}

/// Every record a single-symbol run produces, plus its measurements.
#[derive(Debug, Clone)]
pub struct SimulationOutput {
    /// Electrical drive, dimensionless units of rated drive, from t = 0.
    pub drive: Waveform,
    /// Carrier-band pressure at the observation range.
    pub primary_at_range: Waveform,
    /// Demodulated difference-frequency wave before any filtering.
    pub demodulated_raw: Waveform,
    /// The same wave after the receive chain (and noise, if configured).
    pub demodulated_filtered: Waveform,
    /// Single-sided spectrum of the carrier-band record at range.
    pub spectrum: Spectrum,
    pub report: SimulationReport,
}

/// Intermediate records shared by the single-symbol and scan paths.
struct RawPipeline {
    drive: Waveform,
    /// Face pressure including the transducer's ring-down, from t = 0.
    face: Waveform,
    /// Modulation envelope over the gate, normalized to the rated drive.
    envelope: Waveform,
    /// Demodulated wave at the observation range, aligned at flight time.
    demodulated: Waveform,
}

/// Runs synthesis, the transducer, envelope extraction, and demodulation for
/// one polarity of the scenario's symbol.
///
/// The envelope is taken over the whole face record, ring-down included, and
/// only then cut to the gate: cutting first would disturb the analytic
/// signal at the gate-end boundary.
fn raw_pipeline(scenario: &Scenario, polarity: i8) -> Result<RawPipeline> {
    let spec = SymbolSpec {
        polarity,
        ..scenario.symbol
    };
    let fs = scenario.sample_rate_hz;
    let amp = scenario.drive_amplitude;
    let p0 = scenario.source.primary_pressure_pa;
    let drive = synth_symbol(&spec, scenario.source.center_frequency_hz, fs, amp)?;
    let face = drive_to_pressure(&scenario.source, &drive)?;
    let env_full = analytic_envelope(&face)?;
    let gate_n = spec.gate_samples(fs);
    // rated drive is calibrated to p0 at the envelope peak sqrt(2)
    let scale = std::f64::consts::SQRT_2 / (amp * p0);
    let envelope = Waveform::new(
        fs,
        0.0,
        Unit::Dimensionless,
        env_full.samples[..gate_n].iter().map(|v| v * scale).collect(),
    )?;
    let params = BerktayParams {
        beta: scenario.medium.beta,
        primary_pressure_pa: amp * p0,
        beam_area_m2: scenario.source.aperture_area_m2(),
        density: scenario.medium.density,
        sound_speed: scenario.medium.sound_speed,
        range_m: scenario.range_m,
        alpha0_np_per_m: absorption_np_per_m(
            scenario.source.center_frequency_hz,
            &scenario.medium,
        )?,
    };
    let mut demodulated = berktay_demodulate(&envelope, &params)?;
    demodulated.start_time_s = scenario.range_m / scenario.medium.sound_speed;
    Ok(RawPipeline {
        drive,
        face,
        envelope,
        demodulated,
    })
}

/// Extends a record with trailing zeros so a causal chain can settle.
fn pad_zeros(w: &Waveform, extra: usize) -> Waveform {
    let mut samples = w.samples.clone();
    samples.extend(std::iter::repeat(0.0).take(extra));
    Waveform {
        sample_rate_hz: w.sample_rate_hz,
        start_time_s: w.start_time_s,
        unit: w.unit,
        samples,
    }
}

/// Adds seeded white Gaussian noise at a fraction of the record's own rms.
/// A zero fraction or a silent record leaves the samples untouched.
fn add_noise(w: &mut Waveform, fraction: f64, seed: u64) -> Result<()> {
    if fraction == 0.0 {
        return Ok(());
    }
    let clean_rms = rms(w, None)?;
    if clean_rms == 0.0 {
        return Ok(());
    }
    let normal = Normal::new(0.0, fraction * clean_rms)
        .expect("standard deviation is positive and finite here");
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    for v in &mut w.samples {
        *v += normal.sample(&mut rng);
    }
    Ok(())
}

/// Envelope depth below which the demodulated pulse is visibly distorted.
/// Full depth is sqrt(2); the margin absorbs transducer droop at the faster
/// modulation rates.
const ENVELOPE_DEPTH_FLOOR: f64 = 0.9 * std::f64::consts::SQRT_2;

/// Runs one symbol end to end and measures the received pulse.
pub fn run_simulate(scenario: &Scenario) -> Result<SimulationOutput> {
    scenario.validate()?;
    let fs = scenario.sample_rate_hz;
    let f_c = scenario.source.center_frequency_hz;
    let f_d = scenario.symbol.difference_frequency_hz;
    let c0 = scenario.medium.sound_speed;

    let pipe = raw_pipeline(scenario, scenario.symbol.polarity)?;

    // carrier-band transport: calibrate at the reference range, then carry
    // to the observation range with spreading, absorption, and flight time
    let mut at_reference = pipe.face.clone();
    at_reference.start_time_s += REFERENCE_RANGE_M / c0;
    let collimation =
        rayleigh_distance(scenario.source.aperture_area_m2(), f_c, &scenario.medium)?;
    let primary = primary_at_range(
        &at_reference,
        scenario.range_m,
        REFERENCE_RANGE_M,
        f_c,
        &scenario.medium,
        collimation,
    )?;
    let primary_spectrum = spectrum(&primary)?;

    // receive conditioning
    let gate_n = scenario.symbol.gate_samples(fs);
    let padded = pad_zeros(&pipe.demodulated, 4 * gate_n);
    let chain = postprocess_chain(f_d, fs)?;
    let mut filtered = apply_filter(&chain, &padded, scenario.filter_mode)?;
    add_noise(&mut filtered, scenario.noise_rms_fraction, scenario.seed)?;

    let mut warnings = Vec::new();
    if scenario.symbol.n_cycles < 1.0 {
        warnings.push(format!(
            "gate holds only {} of a difference period; the demodulated pulse cannot form a full cycle",
            scenario.symbol.n_cycles
        ));
    }
    let env_max = pipe.envelope.samples.iter().fold(0f64, |m, &v| m.max(v));
    if env_max < ENVELOPE_DEPTH_FLOOR {
        warnings.push(format!(
            "modulation envelope peaks at {env_max:.3}, short of its full depth {:.3}; expect a distorted pulse",
            std::f64::consts::SQRT_2
        ));
    }

    let reference = make_reference(&scenario.symbol, fs, &chain, scenario.filter_mode)?;
    let quality = pulse_quality(&filtered, &reference)?;

    // phase is read on raw records: the receive chain's group delay would
    // bias it. The positive-polarity transmission is the reference.
    let phase_vs_positive_deg = if scenario.symbol.polarity == 1 {
        match phase_difference_deg(&pipe.demodulated, &pipe.demodulated, f_d) {
            Ok(p) => Some(p),
            Err(e) => {
                warnings.push(format!("phase estimate unavailable: {e}"));
                None
            }
        }
    } else {
        let plus = raw_pipeline(scenario, 1)?;
        match phase_difference_deg(&plus.demodulated, &pipe.demodulated, f_d) {
            Ok(p) => Some(p),
            Err(e) => {
                warnings.push(format!("phase estimate unavailable: {e}"));
                None
            }
        }
    };

    let measured_frequency_hz = match measure_frequency_hz(&filtered) {
        Ok(f) => Some(f),
        Err(e) => {
            warnings.push(format!("frequency estimate unavailable: {e}"));
            None
        }
    };

    let peak_pressure_pa = filtered.samples.iter().fold(0f64, |m, &v| m.max(v.abs()));
    let carrier_rejection_db = -chain.magnitude_db_at(f_c);
    let source_level = source_level_db(peak_pressure_pa, scenario.range_m)?;

    Ok(SimulationOutput {
        drive: pipe.drive,
        primary_at_range: primary,
        demodulated_raw: pipe.demodulated,
        demodulated_filtered: filtered,
        spectrum: primary_spectrum,
        report: SimulationReport {
            peak_correlation: quality.peak_correlation,
            arrival_time_s: quality.arrival_time_s,
            phase_vs_positive_deg,
            measured_frequency_hz,
            peak_pressure_pa,
            carrier_rejection_db,
            source_level_db: source_level,
            warnings,
        },
    })
}

/// Summary of a cross-range beam scan.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanReport {
    /// Half-power width recovered from the simulated scan.
    pub beamwidth_deg: f64,
    /// Closed-form half-power width of the virtual array for comparison.
    pub analytic_beamwidth_deg: f64,
    pub range_m: f64,
    pub half_span_m: f64,
    pub step_m: f64,
    pub n_positions: usize,
    pub peak_index: usize,
    pub warnings: Vec<String>,
}

/// A beam scan reduced to its pattern: one row per receiver position.
#[derive(Debug, Clone)]
pub struct ScanOutput {
    pub positions_m: Vec<f64>,
    pub angles_deg: Vec<f64>,
    /// Level at each position relative to the loudest one.
    pub normalized_rms_db: Vec<f64>,
    pub report: ScanReport,
}

/// Sweeps a receiver across the beam at the scenario range and recovers the
/// half-power beamwidth from the received levels.
///
/// Positions run from -half_span to +half_span in uniform steps with one on
/// the axis. Each off-axis record is the on-axis demodulated wave scaled by
/// the beam pattern; the width estimator applies the receive chain itself.
pub fn run_scan(scenario: &Scenario, half_span_m: f64, step_m: f64) -> Result<ScanOutput> {
    scenario.validate()?;
    for (name, value) in [("half_span_m", half_span_m), ("step_m", step_m)] {
        if !(value > 0.0 && value.is_finite()) {
            return Err(Error::InvalidParam {
                name,
                reason: "must be positive and finite",
                value,
            });
        }
    }
    let k = (half_span_m / step_m + 1e-9).floor() as i64;
    if k < 1 {
        return Err(Error::InvalidScan {
            reason: format!(
                "span {half_span_m} m at step {step_m} m leaves no off-axis positions"
            ),
        });
    }
    let f_c = scenario.source.center_frequency_hz;
    let f_d = scenario.symbol.difference_frequency_hz;

    let pipe = raw_pipeline(scenario, scenario.symbol.polarity)?;
    let positions_m: Vec<f64> = (-k..=k).map(|i| i as f64 * step_m).collect();
    let mut waveforms = Vec::with_capacity(positions_m.len());
    for &x in &positions_m {
        let theta_deg = (x / scenario.range_m).atan().to_degrees();
        let d = directivity(theta_deg, f_d, f_c, &scenario.medium)?;
        let mut w = pipe.demodulated.clone();
        for v in &mut w.samples {
            *v *= d;
        }
        waveforms.push(w);
    }
    let scan = ScanData {
        range_m: scenario.range_m,
        positions_m: positions_m.clone(),
        waveforms,
    };
    let chain = postprocess_chain(f_d, scenario.sample_rate_hz)?;
    let result = beamwidth_from_scan(&scan, &chain, scenario.filter_mode)?;
    let analytic = halfpower_beamwidth_deg(f_d, f_c, &scenario.medium)?;
    Ok(ScanOutput {
        positions_m,
        angles_deg: result.angles_deg,
        normalized_rms_db: result.normalized_rms_db,
        report: ScanReport {
            beamwidth_deg: result.beamwidth_deg,
            analytic_beamwidth_deg: analytic,
            range_m: scenario.range_m,
            half_span_m,
            step_m,
            n_positions: 2 * k as usize + 1,
            peak_index: result.peak_index,
            warnings: result.warnings,
        },
    })
}

/// Outcome of a coded transmission.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinkReport {
    pub sent: Vec<i8>,
    pub decoded: Vec<i8>,
    pub n_correct: usize,
    pub n_symbols: usize,
    pub noise_rms_fraction: f64,
    pub seed: u64,
}

/// A coded transmission's received record and the reference it was decoded
/// against.
#[derive(Debug, Clone)]
pub struct LinkOutput {
    pub report: LinkReport,
    /// Filtered (and, if configured, noisy) record at the receiver.
    pub received: Waveform,
    /// Ideal positive-polarity pulse used by the decoder.
    pub reference: Waveform,
}

/// Transmits a bit sequence as phase-coded symbols and decodes it from the
/// received record.
///
/// The whole sequence passes through the transducer as one record, so each
/// symbol rides the settling of its predecessors; demodulation then runs
/// slot by slot over the shared envelope.
pub fn run_link(scenario: &Scenario, bits: &[i8]) -> Result<LinkOutput> {
    scenario.validate()?;
    let fs = scenario.sample_rate_hz;
    let f_d = scenario.symbol.difference_frequency_hz;
    let amp = scenario.drive_amplitude;
    let p0 = scenario.source.primary_pressure_pa;

    let drive = synth_sequence(
        bits,
        &scenario.symbol,
        scenario.source.center_frequency_hz,
        scenario.guard_s,
        fs,
        amp,
    )?;
    let face = drive_to_pressure(&scenario.source, &drive)?;
    let env_full = analytic_envelope(&face)?;
    let scale = std::f64::consts::SQRT_2 / (amp * p0);

    let gate_n = scenario.symbol.gate_samples(fs);
    let guard_n = (scenario.guard_s * fs).round() as usize;
    let period_n = gate_n + guard_n;
    let seq_len = (bits.len() - 1) * period_n + gate_n;

    let params = BerktayParams {
        beta: scenario.medium.beta,
        primary_pressure_pa: amp * p0,
        beam_area_m2: scenario.source.aperture_area_m2(),
        density: scenario.medium.density,
        sound_speed: scenario.medium.sound_speed,
        range_m: scenario.range_m,
        alpha0_np_per_m: absorption_np_per_m(
            scenario.source.center_frequency_hz,
            &scenario.medium,
        )?,
    };
    let mut demodulated = vec![0.0; seq_len];
    for i in 0..bits.len() {
        let at = i * period_n;
        let envelope = Waveform::new(
            fs,
            0.0,
            Unit::Dimensionless,
            env_full.samples[at..at + gate_n]
                .iter()
                .map(|v| v * scale)
                .collect(),
        )?;
        let slot = berktay_demodulate(&envelope, &params)?;
        demodulated[at..at + gate_n].copy_from_slice(&slot.samples);
    }
    let raw = Waveform::new(
        fs,
        scenario.range_m / scenario.medium.sound_speed,
        Unit::Pascal,
        demodulated,
    )?;

    let padded = pad_zeros(&raw, 4 * gate_n);
    let chain = postprocess_chain(f_d, fs)?;
    let mut received = apply_filter(&chain, &padded, scenario.filter_mode)?;
    add_noise(&mut received, scenario.noise_rms_fraction, scenario.seed)?;

    let reference = make_reference(
        &SymbolSpec {
            polarity: 1,
            ..scenario.symbol
        },
        fs,
        &chain,
        scenario.filter_mode,
    )?;
    let period_s = period_n as f64 / fs;
    let decoded = decode_symbols(&received, &reference, bits.len(), period_s)?;
    let n_correct = bits
        .iter()
        .zip(&decoded)
        .filter(|(a, b)| a == b)
        .count();
    Ok(LinkOutput {
        report: LinkReport {
            sent: bits.to_vec(),
            decoded,
            n_correct,
            n_symbols: bits.len(),
            noise_rms_fraction: scenario.noise_rms_fraction,
            seed: scenario.seed,
        },
        received,
        reference,
    })
}

/// Deterministic random bit sequence for link exercises: n values of +/-1
/// from a counter-seeded stream, so the same seed always yields the same
/// message.
pub fn random_bits(n: usize, seed: u64) -> Vec<i8> {
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    (0..n).map(|_| if rng.gen::<bool>() { 1 } else { -1 }).collect()
}
