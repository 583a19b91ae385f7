//! Square-root amplitude modulation symbol synthesis.
//!
//! Builds the complementary +1 and -1 symbols, shows that their squared
//! envelopes sum to a constant (the property that makes the demodulated
//! pulses antiphase), and inspects the transmitted spectrum: the modulation
//! puts sidebands at multiples of the difference frequency around the
//! carrier, with nothing at half-multiples.
//!
//! ```sh
//! cargo run --example sqram_symbols
//! ```

use parray::dsp::spectrum;
use parray::waveform::{envelope_value, synth_symbol, SymbolSpec, DEFAULT_SAMPLE_RATE_HZ};

fn main() {
    let fs = DEFAULT_SAMPLE_RATE_HZ;
    let carrier_hz = 855e3;
    // eight cycles put the spectral lines exactly on FFT bins: the 400 us
    // gate gives 2.5 kHz spacing, and every frequency of interest is a
    // multiple of that
    let spec = SymbolSpec {
        difference_frequency_hz: 20e3,
        n_cycles: 8.0,
        polarity: 1,
    };

    let plus = synth_symbol(&spec, carrier_hz, fs, 1.0).expect("valid symbol");
    let minus = synth_symbol(
        &SymbolSpec { polarity: -1, ..spec },
        carrier_hz,
        fs,
        1.0,
    )
    .expect("valid symbol");
    println!(
        "eight-cycle symbol at {} kHz: {} samples, {:.0} us gate",
        spec.difference_frequency_hz / 1e3,
        plus.len(),
        plus.duration_s() * 1e6
    );
    let energy = |w: &parray::waveform::Waveform| w.samples.iter().map(|v| v * v).sum::<f64>();
    println!(
        "symbol energies match: +1 carries {:.1}, -1 carries {:.1}",
        energy(&plus),
        energy(&minus)
    );

    // complementary envelopes: E+^2 + E-^2 = 2 at every instant
    let mut worst = 0.0f64;
    for i in 0..plus.len() {
        let t = i as f64 / fs;
        let ep = envelope_value(t, spec.difference_frequency_hz, 1);
        let em = envelope_value(t, spec.difference_frequency_hz, -1);
        worst = worst.max((ep * ep + em * em - 2.0).abs());
    }
    println!("worst deviation of E+^2 + E-^2 from 2: {worst:.2e}");

    // spectrum structure around the carrier
    let s = spectrum(&plus).expect("nonempty record");
    let carrier_mag = s.magnitude[s.bin_of(carrier_hz)];
    println!("\nlines relative to the carrier at {:.0} kHz:", carrier_hz / 1e3);
    for k in 1..=3 {
        let f = carrier_hz + k as f64 * spec.difference_frequency_hz;
        let ratio = s.magnitude[s.bin_of(f)] / carrier_mag;
        println!(
            "  carrier + {k} x f_d ({:6.0} kHz): {:8.5}  ({:6.1} dB)",
            f / 1e3,
            ratio,
            20.0 * ratio.log10()
        );
    }
    let half = carrier_hz + 0.5 * spec.difference_frequency_hz;
    let half_ratio = s.magnitude[s.bin_of(half)] / carrier_mag;
    println!(
        "  carrier + f_d/2 ({:6.0} kHz): {:8.1e}  (empty: no first-order line there)",
        half / 1e3,
        half_ratio
    );
}
