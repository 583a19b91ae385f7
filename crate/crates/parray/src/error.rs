use thiserror::Error;

/// Everything that can go wrong across the crate.
///
/// Variants carry enough context to point at the offending input; the CLI
/// maps any of these to a nonzero exit without writing partial outputs.
#[derive(Debug, Error)]
pub enum Error {
    /// A physical or configuration parameter is outside its valid domain.
    #[error("invalid parameter {name}: {reason} (got {value})")]
    InvalidParam {
        name: &'static str,
        reason: &'static str,
        value: f64,
    },

    /// Absorption underflowed to zero, so the requested range is unbounded.
    #[error("absorption range is unbounded for the given inputs (absorption {alpha_np_per_m} Np/m)")]
    UnboundedRange { alpha_np_per_m: f64 },

    /// The directivity never falls to half power inside +/-90 degrees.
    #[error("no half-power angle: alpha_total/k_d = {ratio} exceeds 1")]
    NoHalfPowerAngle { ratio: f64 },

    #[error("waveform has no samples")]
    EmptyWaveform,

    #[error("waveform sample {index} is not finite")]
    NonFiniteSample { index: usize },

    /// Carrier synthesis requires at least 8 samples per carrier cycle.
    #[error("undersampled carrier: sample rate {sample_rate_hz} Hz < 8 x carrier {carrier_hz} Hz")]
    UndersampledCarrier {
        sample_rate_hz: f64,
        carrier_hz: f64,
    },

    /// Symbol lengths are restricted to half-integer cycle counts.
    #[error("cycle count {n_cycles} is not a positive half-integer")]
    InvalidCycleCount { n_cycles: f64 },

    #[error("symbol sequence is empty")]
    EmptySequence,

    /// Drive records must resolve the transducer center frequency.
    #[error("undersampled drive: sample rate {sample_rate_hz} Hz < 8 x center frequency {center_hz} Hz")]
    UndersampledDrive { sample_rate_hz: f64, center_hz: f64 },

    /// Numerical differentiation needs at least 5 samples.
    #[error("signal too short: {len} samples, need at least {min}")]
    TooShort { len: usize, min: usize },

    /// A designed second-order section has poles on or outside the unit circle.
    #[error("unstable filter design: section {section} (order {order}, cutoff too close to Nyquist)")]
    UnstableDesign { section: usize, order: usize },

    #[error("invalid filter spec: {reason}")]
    InvalidFilterSpec { reason: String },

    #[error("sample rate mismatch: {a} Hz vs {b} Hz")]
    SampleRateMismatch { a: f64, b: f64 },

    /// Correlation against a silent record is undefined.
    #[error("zero-energy input: {which}")]
    ZeroEnergy { which: &'static str },

    #[error("empty analysis window [{t0} s, {t1} s] on record [{start} s, {end} s]")]
    EmptyWindow { t0: f64, t1: f64, start: f64, end: f64 },

    /// Phase estimation needs at least one cycle of overlap at the probe frequency.
    #[error("insufficient signal for phase estimate: common span {span_s} s < one cycle at {f_hz} Hz")]
    InsufficientSignal { span_s: f64, f_hz: f64 },

    /// The scan never crosses the half-power level on both sides of the peak.
    #[error("scan does not bracket both -3 dB crossings ({detail})")]
    NoCrossing { detail: String },

    #[error("decode slots overrun the received record: slot {slot} of {n_slots} starts past the end")]
    SlotMisalignment { slot: usize, n_slots: usize },

    #[error("scan geometry invalid: {reason}")]
    InvalidScan { reason: String },

    #[error("i/o failure on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    /// CSV parse failure, pointing at the 1-based row.
    #[error("csv parse error at {path}:{row}: {reason}")]
    CsvParse {
        path: String,
        row: usize,
        reason: String,
    },

    #[error("wav format error in {path}: {reason}")]
    WavFormat { path: String, reason: String },

    /// Timestamps deviate from a uniform grid by more than 1e-6 of the span.
    #[error("nonuniform timestamps in {path}: relative jitter {jitter} exceeds 1e-6")]
    NonuniformTimestamps { path: String, jitter: f64 },

    #[error("scenario config error: {reason}")]
    Config { reason: String },

    #[error("unsupported scenario schema version {found} (expected {expected})")]
    UnsupportedSchema { found: u32, expected: u32 },
}

pub type Result<T> = std::result::Result<T, Error>;
