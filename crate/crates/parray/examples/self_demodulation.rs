//! Far-field self-demodulation of the modulation envelope.
//!
//! Feeds ideal square-root envelopes through the far-field demodulation
//! solution and verifies three structural facts: the demodulated pulse is a
//! sinusoid at the difference frequency, its pressure grows fourfold per
//! frequency doubling (the d^2/dt^2 signature), and the two complementary
//! envelopes demodulate into antiphase pulses.
//!
//! ```sh
//! cargo run --example self_demodulation
//! ```

use parray::medium::{absorption_np_per_m, MediumParams};
use parray::propagation::{berktay_demodulate, BerktayParams};
use parray::transducer::SourceParams;
use parray::waveform::{envelope_value, Unit, Waveform, DEFAULT_SAMPLE_RATE_HZ};

fn ideal_envelope(f_d: f64, n_cycles: f64, polarity: i8, fs: f64) -> Waveform {
    let n = (n_cycles / f_d * fs).round() as usize;
    let samples = (0..n)
        .map(|i| envelope_value(i as f64 / fs, f_d, polarity))
        .collect();
    Waveform::new(fs, 0.0, Unit::Dimensionless, samples).expect("nonempty envelope")
}

fn main() {
    let medium = MediumParams::default();
    let source = SourceParams::default();
    let fs = DEFAULT_SAMPLE_RATE_HZ;
    let params = BerktayParams {
        beta: medium.beta,
        primary_pressure_pa: source.primary_pressure_pa,
        beam_area_m2: source.aperture_area_m2(),
        density: medium.density,
        sound_speed: medium.sound_speed,
        range_m: 2.0,
        alpha0_np_per_m: absorption_np_per_m(source.center_frequency_hz, &medium)
            .expect("carrier absorbs"),
    };
    println!(
        "demodulation coefficient K = {:.4e} Pa s^2 at {} m",
        params.coefficient(),
        params.range_m
    );

    // peak pressure: K * (2 pi f_d)^2, so each octave buys a factor of 4
    println!("\ndemodulated peak vs difference frequency (8-cycle ideal envelopes):");
    let mut previous: Option<f64> = None;
    for f_d in [10e3, 20e3, 40e3, 80e3] {
        let envelope = ideal_envelope(f_d, 8.0, 1, fs);
        let dfw = berktay_demodulate(&envelope, &params).expect("valid envelope");
        // read the peak away from the gate edges where the stencil is one-sided
        let interior = &dfw.samples[dfw.len() / 4..3 * dfw.len() / 4];
        let peak = interior.iter().fold(0f64, |m, v| m.max(v.abs()));
        match previous {
            Some(p) => println!(
                "  f_d = {:2.0} kHz -> {:8.3} Pa  (x{:.3} over the octave below)",
                f_d / 1e3,
                peak,
                peak / p
            ),
            None => println!("  f_d = {:2.0} kHz -> {:8.3} Pa", f_d / 1e3, peak),
        }
        previous = Some(peak);
    }

    // complementary envelopes demodulate in antiphase: the squared envelopes
    // sum to a constant, and the second derivative kills the constant
    let plus = berktay_demodulate(&ideal_envelope(20e3, 8.0, 1, fs), &params).unwrap();
    let minus = berktay_demodulate(&ideal_envelope(20e3, 8.0, -1, fs), &params).unwrap();
    let dot: f64 = plus.samples.iter().zip(&minus.samples).map(|(a, b)| a * b).sum();
    let norm = |w: &Waveform| w.samples.iter().map(|v| v * v).sum::<f64>().sqrt();
    println!(
        "\nnormalized inner product of the +1 and -1 pulses: {:.4} (pure antiphase reads -1)",
        dot / (norm(&plus) * norm(&minus))
    );
}
