//! Characteristic ranges of a parametric source.
//!
//! Prints the Rayleigh distance (collimated zone boundary), the absorption
//! range (virtual array length), and the shock distance for the default
//! scenario, then shows how each one moves when the drive level or the
//! water temperature changes.
//!
//! ```sh
//! cargo run --example distances
//! ```

use parray::sim::{run_distances, Scenario};

fn main() {
    let scenario = Scenario::default();
    let report = run_distances(&scenario).expect("defaults are valid");

    println!("carrier {} kHz, aperture {:.1} x {:.1} cm, drive at rated level",
        scenario.source.center_frequency_hz / 1e3,
        scenario.source.aperture_width_m * 100.0,
        scenario.source.aperture_height_m * 100.0,
    );
    println!("  rayleigh distance  R_F = {:7.3} m", report.rayleigh_distance_m);
    println!("  shock distance     R_s = {:7.3} m", report.shock_distance_m);
    println!("  absorption range   R_a = {:7.3} m", report.absorption_range_m);
    println!(
        "  observation range      = {:7.3} m  ({})",
        report.range_m,
        if report.in_collimated_zone {
            "inside the collimated near field"
        } else {
            "beyond the collimated near field"
        }
    );

    // the shock distance scales inversely with drive pressure: pushing the
    // source harder moves the sawtooth limit closer
    println!("\nshock distance vs drive level:");
    for amp in [0.5, 1.0, 2.0, 4.0] {
        let mut s = scenario.clone();
        s.drive_amplitude = amp;
        let r = run_distances(&s).expect("scaled drive is valid");
        println!("  {:4.1} x rated -> R_s = {:7.3} m", amp, r.shock_distance_m);
    }

    // absorption rises with temperature through the relaxation frequency,
    // shortening the virtual array
    println!("\nabsorption range vs temperature:");
    for t in [4.0, 10.0, 20.0, 30.0] {
        let mut s = scenario.clone();
        s.medium.temperature_c = t;
        let r = run_distances(&s).expect("tempered medium is valid");
        println!("  {t:4.1} degC -> R_a = {:7.3} m", r.absorption_range_m);
    }
}
