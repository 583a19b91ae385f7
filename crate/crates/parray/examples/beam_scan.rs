//! Beamwidth from a simulated cross-range scan.
//!
//! Sweeps a virtual hydrophone across the demodulated beam at 2 m, reduces
//! the per-position records to a normalized pattern, and compares the
//! half-power width read from the pattern with the closed-form value for
//! the absorption-limited virtual array.
//!
//! ```sh
//! cargo run --example beam_scan
//! ```

use parray::sim::{run_scan, Scenario};

fn main() {
    let scenario = Scenario::default();
    let out = run_scan(&scenario, 0.4, 0.025).expect("default scan geometry");
    println!(
        "scan at {} m: {} positions, 2.5 cm apart",
        out.report.range_m, out.report.n_positions
    );
    println!("measured beamwidth  {:.3} deg", out.report.beamwidth_deg);
    println!("analytic beamwidth  {:.3} deg", out.report.analytic_beamwidth_deg);
    println!(
        "difference          {:+.2}%",
        100.0 * (out.report.beamwidth_deg - out.report.analytic_beamwidth_deg)
            / out.report.analytic_beamwidth_deg
    );

    // the central slice of the pattern, as it would be plotted
    println!("\n  angle      level");
    for (a, l) in out.angles_deg.iter().zip(&out.normalized_rms_db) {
        if a.abs() < 6.5 {
            let bar_len = ((l + 40.0).max(0.0) * 0.8) as usize;
            println!("  {a:+6.2} deg {l:7.2} dB  {}", "#".repeat(bar_len));
        }
    }
    for w in &out.report.warnings {
        println!("warning: {w}");
    }
}
