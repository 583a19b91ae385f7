//! File formats: CSV and WAV waveform interchange, JSON scenarios and
//! reports, and plot-ready CSV series.
//!
//! CSV waveforms carry `time_s,value` rows at 9 significant digits; WAV
//! files are canonical 44-byte-header mono IEEE float32. Neither format
//! carries a unit tag, so imported records come back dimensionless. Sample
//! values pass through float32 in both formats, which makes export then
//! import the identity for float32-representable data and a fixed point
//! for everything else after one pass.

use std::io::Write as _;
use std::path::Path;

use serde::Serialize;

use crate::dsp::Spectrum;
use crate::error::{Error, Result};
use crate::sim::Scenario;
use crate::waveform::{Unit, Waveform};

/// Waveform interchange formats.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FileFormat {
    Csv,
    Wav,
}

fn io_err(path: &Path, source: std::io::Error) -> Error {
    Error::Io {
        path: path.display().to_string(),
        source,
    }
}

/// Writes a waveform to disk in the chosen format.
pub fn export_waveform(w: &Waveform, path: &Path, format: FileFormat) -> Result<()> {
    w.validate()?;
    match format {
        FileFormat::Csv => export_csv(w, path),
        FileFormat::Wav => export_wav(w, path),
    }
}

/// Reads a waveform from disk in the chosen format.
pub fn import_waveform(path: &Path, format: FileFormat) -> Result<Waveform> {
    match format {
        FileFormat::Csv => import_csv(path),
        FileFormat::Wav => import_wav(path),
    }
}

fn export_csv(w: &Waveform, path: &Path) -> Result<()> {
    let mut out = String::with_capacity(32 * (w.len() + 1));
    out.push_str("time_s,value\n");
    for (i, &v) in w.samples.iter().enumerate() {
        out.push_str(&format!("{:.8e},{:.8e}\n", w.time_at(i), v));
    }
    std::fs::write(path, out).map_err(|e| io_err(path, e))
}

fn import_csv(path: &Path) -> Result<Waveform> {
    let text = std::fs::read_to_string(path).map_err(|e| io_err(path, e))?;
    let path_s = path.display().to_string();
    let parse_err = |row: usize, reason: String| Error::CsvParse {
        path: path_s.clone(),
        row,
        reason,
    };
    let mut lines = text.lines();
    match lines.next() {
        Some(h) if h.trim_end() == "time_s,value" => {}
        other => {
            return Err(parse_err(
                1,
                format!("expected header \"time_s,value\", got {:?}", other.unwrap_or("")),
            ))
        }
    }
    let mut times = Vec::new();
    let mut values = Vec::new();
    // the header is line 1, so the first data row is line 2
    for (i, line) in lines.enumerate() {
        let row = i + 2;
        let line = line.trim_end();
        if line.is_empty() {
            continue;
        }
        let mut fields = line.split(',');
        let (t_s, v_s) = match (fields.next(), fields.next(), fields.next()) {
            (Some(t), Some(v), None) => (t, v),
            _ => return Err(parse_err(row, "expected exactly 2 comma-separated fields".into())),
        };
        let t: f64 = t_s
            .trim()
            .parse()
            .map_err(|_| parse_err(row, format!("unreadable time {t_s:?}")))?;
        let v: f64 = v_s
            .trim()
            .parse()
            .map_err(|_| parse_err(row, format!("unreadable value {v_s:?}")))?;
        if !t.is_finite() {
            return Err(parse_err(row, format!("non-finite time {t_s:?}")));
        }
        if !v.is_finite() {
            return Err(parse_err(row, format!("non-finite value {v_s:?}")));
        }
        times.push(t);
        // values travel through float32 so both interchange formats agree
        values.push(v as f32 as f64);
    }
    if times.len() < 2 {
        return Err(parse_err(
            times.len() + 1,
            format!("a waveform needs at least 2 samples, found {}", times.len()),
        ));
    }
    let start = times[0];
    let span = times[times.len() - 1] - start;
    if !(span > 0.0) {
        return Err(Error::NonuniformTimestamps {
            path: path_s,
            jitter: f64::INFINITY,
        });
    }
    let dt = span / (times.len() - 1) as f64;
    let mut jitter = 0.0f64;
    for (i, &t) in times.iter().enumerate() {
        jitter = jitter.max((t - (start + i as f64 * dt)).abs() / span);
    }
    if jitter > 1e-6 {
        return Err(Error::NonuniformTimestamps { path: path_s, jitter });
    }
    // rates written by this library are integer hertz; snap the tiny
    // rounding left by 9-digit timestamps
    let fs_raw = 1.0 / dt;
    let fs = if (fs_raw - fs_raw.round()).abs() <= 1e-6 * fs_raw && fs_raw.round() >= 1.0 {
        fs_raw.round()
    } else {
        fs_raw
    };
    Waveform::new(fs, start, Unit::Dimensionless, values)
}

/// Canonical PCM-style header: RIFF + fmt + data, IEEE float32 mono.
const WAV_HEADER_LEN: usize = 44;

fn export_wav(w: &Waveform, path: &Path) -> Result<()> {
    let rate = w.sample_rate_hz.round();
    if !(rate >= 1.0 && rate <= u32::MAX as f64) {
        return Err(Error::WavFormat {
            path: path.display().to_string(),
            reason: format!("sample rate {} Hz does not fit an integer field", w.sample_rate_hz),
        });
    }
    let rate = rate as u32;
    let data_len = 4 * w.len() as u32;
    let mut bytes = Vec::with_capacity(WAV_HEADER_LEN + data_len as usize);
    bytes.extend_from_slice(b"RIFF");
    bytes.extend_from_slice(&(36 + data_len).to_le_bytes());
    bytes.extend_from_slice(b"WAVE");
    bytes.extend_from_slice(b"fmt ");
    bytes.extend_from_slice(&16u32.to_le_bytes());
    bytes.extend_from_slice(&3u16.to_le_bytes()); // IEEE float
    bytes.extend_from_slice(&1u16.to_le_bytes()); // mono
    bytes.extend_from_slice(&rate.to_le_bytes());
    bytes.extend_from_slice(&(4 * rate).to_le_bytes());
    bytes.extend_from_slice(&4u16.to_le_bytes()); // block align
    bytes.extend_from_slice(&32u16.to_le_bytes());
    bytes.extend_from_slice(b"data");
    bytes.extend_from_slice(&data_len.to_le_bytes());
    for &v in &w.samples {
        bytes.extend_from_slice(&(v as f32).to_le_bytes());
    }
    std::fs::write(path, bytes).map_err(|e| io_err(path, e))
}

fn import_wav(path: &Path) -> Result<Waveform> {
    let bytes = std::fs::read(path).map_err(|e| io_err(path, e))?;
    let path_s = path.display().to_string();
    let bad = |reason: String| Error::WavFormat {
        path: path_s.clone(),
        reason,
    };
    let u16_at = |at: usize| u16::from_le_bytes([bytes[at], bytes[at + 1]]);
    let u32_at =
        |at: usize| u32::from_le_bytes([bytes[at], bytes[at + 1], bytes[at + 2], bytes[at + 3]]);
    if bytes.len() < WAV_HEADER_LEN {
        return Err(bad(format!("file is {} bytes, shorter than a header", bytes.len())));
    }
    if &bytes[0..4] != b"RIFF" || &bytes[8..12] != b"WAVE" {
        return Err(bad("missing RIFF/WAVE signature".into()));
    }
    // walk the chunk list; fmt must precede data
    let mut at = 12;
    let mut rate = None;
    loop {
        if at + 8 > bytes.len() {
            return Err(bad("no data chunk found".into()));
        }
        let tag = &bytes[at..at + 4];
        let size = u32_at(at + 4) as usize;
        let body = at + 8;
        if body + size > bytes.len() {
            return Err(bad(format!(
                "chunk {:?} claims {size} bytes past the end of the file",
                String::from_utf8_lossy(tag)
            )));
        }
        match tag {
            b"fmt " => {
                if size < 16 {
                    return Err(bad(format!("fmt chunk is {size} bytes, need 16")));
                }
                let format = u16_at(body);
                let channels = u16_at(body + 2);
                let bits = u16_at(body + 14);
                if format != 3 || bits != 32 {
                    return Err(bad(format!(
                        "need IEEE float32 samples, got format {format} at {bits} bits"
                    )));
                }
                if channels != 1 {
                    return Err(bad(format!("need mono, got {channels} channels")));
                }
                rate = Some(u32_at(body + 4));
            }
            b"data" => {
                let rate = rate.ok_or_else(|| bad("data chunk before fmt chunk".into()))?;
                if rate == 0 {
                    return Err(bad("sample rate field is zero".into()));
                }
                if size % 4 != 0 {
                    return Err(bad(format!("data length {size} is not whole float32 samples")));
                }
                let samples: Vec<f64> = bytes[body..body + size]
                    .chunks_exact(4)
                    .map(|c| f32::from_le_bytes([c[0], c[1], c[2], c[3]]) as f64)
                    .collect();
                return Waveform::new(rate as f64, 0.0, Unit::Dimensionless, samples);
            }
            _ => {}
        }
        // chunks are word-aligned: odd sizes carry a pad byte
        at = body + size + (size % 2);
    }
}

/// Loads and validates a scenario description from a JSON file.
pub fn load_scenario(path: &Path) -> Result<Scenario> {
    let text = std::fs::read_to_string(path).map_err(|e| io_err(path, e))?;
    let scenario: Scenario = serde_json::from_str(&text).map_err(|e| Error::Config {
        reason: format!("{}: {e}", path.display()),
    })?;
    scenario.validate()?;
    Ok(scenario)
}

/// Writes any serializable report as pretty-printed JSON with a trailing
/// newline.
pub fn write_json_report<T: Serialize>(value: &T, path: &Path) -> Result<()> {
    let text = serde_json::to_string_pretty(value).map_err(|e| Error::Config {
        reason: format!("could not serialize report: {e}"),
    })?;
    let mut file = std::fs::File::create(path).map_err(|e| io_err(path, e))?;
    file.write_all(text.as_bytes())
        .and_then(|_| file.write_all(b"\n"))
        .map_err(|e| io_err(path, e))
}

/// Writes a beam pattern as one CSV row per receiver position.
pub fn export_pattern_csv(
    path: &Path,
    positions_m: &[f64],
    angles_deg: &[f64],
    levels_db: &[f64],
) -> Result<()> {
    let mut out = String::from("position_m,angle_deg,level_db\n");
    for ((&p, &a), &l) in positions_m.iter().zip(angles_deg).zip(levels_db) {
        out.push_str(&format!("{p:.8e},{a:.8e},{l:.8e}\n"));
    }
    std::fs::write(path, out).map_err(|e| io_err(path, e))
}

/// Writes a single-sided spectrum as CSV.
pub fn export_spectrum_csv(path: &Path, spectrum: &Spectrum) -> Result<()> {
    let mut out = String::from("frequency_hz,magnitude\n");
    for (&f, &m) in spectrum.frequency_hz.iter().zip(&spectrum.magnitude) {
        out.push_str(&format!("{f:.8e},{m:.8e}\n"));
    }
    std::fs::write(path, out).map_err(|e| io_err(path, e))
}
