//! Transmit transducer model: LC tuning and band-limited ringing.
//!
//! Checks that the series inductor tunes out the clamp capacitance near the
//! carrier, then drives the resonator model with bursts at several
//! modulation rates to show how the finite bandwidth erodes fast envelopes.
//!
//! ```sh
//! cargo run --example transducer_response
//! ```

use parray::dsp::analytic_envelope;
use parray::transducer::{drive_to_pressure, tuned_resonance_hz, SourceParams};
use parray::waveform::{synth_symbol, SymbolSpec, DEFAULT_SAMPLE_RATE_HZ};

fn main() {
    let source = SourceParams::default();
    let fs = DEFAULT_SAMPLE_RATE_HZ;

    let f_lc = tuned_resonance_hz(source.tuning_inductance_h, source.clamp_capacitance_f)
        .expect("positive L and C");
    println!(
        "electrical resonance 1/(2 pi sqrt(LC)) = {:.1} kHz against a {:.0} kHz carrier ({:+.2}% off)",
        f_lc / 1e3,
        source.center_frequency_hz / 1e3,
        100.0 * (f_lc - source.center_frequency_hz) / source.center_frequency_hz
    );

    // rated drive reaches the rated face pressure by construction
    let cal = synth_symbol(
        &SymbolSpec { difference_frequency_hz: 20e3, n_cycles: 8.0, polarity: 1 },
        source.center_frequency_hz,
        fs,
        1.0,
    )
    .expect("valid drive");
    let face = drive_to_pressure(&source, &cal).expect("drive converts");
    let peak = face.samples.iter().fold(0f64, |m, v| m.max(v.abs()));
    println!(
        "rated 8-cycle burst: peak face pressure {:.1} kPa (rated {:.1} kPa), record carries {} extra ring-down samples",
        peak / 1e3,
        source.primary_pressure_pa / 1e3,
        face.len() - cal.len()
    );

    // the faster the envelope, the more the band limit flattens it:
    // full depth is sqrt(2), and droop grows with modulation frequency
    println!("\nenvelope depth through the transducer (full depth = 1.414):");
    for f_d in [10e3, 20e3, 40e3, 80e3] {
        let spec = SymbolSpec { difference_frequency_hz: f_d, n_cycles: 8.0, polarity: 1 };
        let drive = synth_symbol(&spec, source.center_frequency_hz, fs, 1.0).unwrap();
        let pressure = drive_to_pressure(&source, &drive).unwrap();
        let envelope = analytic_envelope(&pressure).unwrap();
        let gate_n = spec.gate_samples(fs);
        let depth = envelope.samples[..gate_n]
            .iter()
            .fold(0f64, |m, &v| m.max(v))
            * std::f64::consts::SQRT_2
            / source.primary_pressure_pa;
        println!("  f_d = {:2.0} kHz -> envelope peak {depth:.3}", f_d / 1e3);
    }
}
