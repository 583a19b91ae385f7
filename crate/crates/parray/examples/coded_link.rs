//! Phase-coded symbol transmission through the simulated channel.
//!
//! Sends a 64-symbol random message end to end: sequence synthesis, the
//! transducer, self-demodulation, receive filtering, additive receiver
//! noise, and matched-filter decoding. Repeats at increasing noise levels
//! to show the margin.
//!
//! ```sh
//! cargo run --example coded_link
//! ```

use parray::sim::{random_bits, run_link, Scenario};

fn main() {
    let bits = random_bits(64, 42);
    let render = |b: &[i8]| b.iter().map(|&v| if v > 0 { '+' } else { '-' }).collect::<String>();
    println!("message ({} symbols): {}", bits.len(), render(&bits));

    for noise in [0.0, 0.1, 0.3, 0.5] {
        let mut scenario = Scenario::default();
        scenario.noise_rms_fraction = noise;
        scenario.seed = 7;
        let out = run_link(&scenario, &bits).expect("link runs");
        let errors: String = out
            .report
            .sent
            .iter()
            .zip(&out.report.decoded)
            .map(|(a, b)| if a == b { '.' } else { 'X' })
            .collect();
        println!(
            "noise {:3.0}% of signal rms -> {:2}/{} correct  {}",
            noise * 100.0,
            out.report.n_correct,
            out.report.n_symbols,
            errors
        );
    }

    println!(
        "\neach symbol occupies {:.0} us of gate plus {:.0} us of guard",
        Scenario::default().symbol.duration_s() * 1e6,
        Scenario::default().guard_s * 1e6
    );
}
