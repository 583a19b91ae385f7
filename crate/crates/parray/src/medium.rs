//! Water-medium physics: the acoustic absorption model and the three
//! critical distances that govern where a parametric array forms and decays.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Meters per kiloyard, used by the absorption unit conversion.
pub const M_PER_KYD: f64 = 914.4;

/// Decibels per neper, 20/ln(10) = 8.6859.
pub const DB_PER_NP: f64 = 8.685889638065035;

/// Bulk properties of the water column.
///
/// Defaults describe cold fresh water: 10 degC, zero salinity,
/// 1000 kg/m^3, 1480 m/s, nonlinearity parameter 3.5.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct MediumParams {
    /// Water temperature in degrees Celsius, valid in [-2, 40].
    pub temperature_c: f64,
    /// Salinity in parts per thousand, valid in [0, 45].
    pub salinity_ppt: f64,
    /// Density rho_0 in kg/m^3.
    pub density: f64,
    /// Small-signal sound speed c_0 in m/s.
    pub sound_speed: f64,
    /// Dimensionless nonlinearity parameter beta.
    pub beta: f64,
}

impl Default for MediumParams {
    fn default() -> Self {
        Self {
            temperature_c: 10.0,
            salinity_ppt: 0.0,
            density: 1000.0,
            sound_speed: 1480.0,
            beta: 3.5,
        }
    }
}

impl MediumParams {
    /// Checks every field against its physical domain.
    ///
    /// Out-of-range temperature or salinity is a hard error, not a clamp;
    /// silent clamping would hide configuration mistakes.
    pub fn validate(&self) -> Result<()> {
        let checks: [(&'static str, f64, bool, &'static str); 5] = [
            (
                "temperature_c",
                self.temperature_c,
                (-2.0..=40.0).contains(&self.temperature_c),
                "must be in [-2, 40] degC",
            ),
            (
                "salinity_ppt",
                self.salinity_ppt,
                (0.0..=45.0).contains(&self.salinity_ppt),
                "must be in [0, 45] ppt",
            ),
            (
                "density",
                self.density,
                self.density > 0.0 && self.density.is_finite(),
                "must be positive",
            ),
            (
                "sound_speed",
                self.sound_speed,
                self.sound_speed > 0.0 && self.sound_speed.is_finite(),
                "must be positive",
            ),
            (
                "beta",
                self.beta,
                self.beta > 0.0 && self.beta.is_finite(),
                "must be positive",
            ),
        ];
        for (name, value, ok, reason) in checks {
            if !ok {
                return Err(Error::InvalidParam {
                    name,
                    reason,
                    value,
                });
            }
        }
        Ok(())
    }
}

/// Temperature-dependent relaxation frequency of the salinity term, in kHz.
fn relaxation_frequency_khz(temperature_c: f64) -> f64 {
    21.9 * 10f64.powf(6.0 - 1520.0 / (temperature_c + 273.0))
}

/// Acoustic absorption coefficient in dB per kiloyard.
///
/// Two-term model: a salinity-driven relaxation term that saturates above
/// the relaxation frequency, plus a freshwater viscosity term growing as
/// f^2. Both frequency arguments are in kHz.
pub fn absorption_db_per_kyd(frequency_khz: f64, medium: &MediumParams) -> Result<f64> {
    medium.validate()?;
    if !(frequency_khz >= 0.0) {
        return Err(Error::InvalidParam {
            name: "frequency_khz",
            reason: "must be >= 0",
            value: frequency_khz,
        });
    }
    let ft = relaxation_frequency_khz(medium.temperature_c);
    let f2 = frequency_khz * frequency_khz;
    let relaxation = 1.86e-2 * medium.salinity_ppt * ft * f2 / (ft * ft + f2);
    let viscous = 2.68e-2 * f2 / ft;
    Ok(relaxation + viscous)
}

/// Absorption converted to nepers per meter (1 kyd = 914.4 m, 1 Np = 20/ln10 dB).
pub fn absorption_np_per_m(frequency_hz: f64, medium: &MediumParams) -> Result<f64> {
    Ok(absorption_db_per_kyd(frequency_hz / 1e3, medium)? / M_PER_KYD / DB_PER_NP)
}

/// Absorption range R_a = 1/alpha: the e-folding length of the primary
/// field and the effective length of the virtual array.
pub fn absorption_range(frequency_hz: f64, medium: &MediumParams) -> Result<f64> {
    if !(frequency_hz > 0.0) {
        return Err(Error::InvalidParam {
            name: "frequency_hz",
            reason: "must be > 0",
            value: frequency_hz,
        });
    }
    let alpha = absorption_np_per_m(frequency_hz, medium)?;
    if alpha == 0.0 {
        return Err(Error::UnboundedRange {
            alpha_np_per_m: alpha,
        });
    }
    Ok(1.0 / alpha)
}

/// Rayleigh distance R_F = S * f / c_0, the boundary between the collimated
/// near field and spherical spreading for an aperture of area S.
pub fn rayleigh_distance(
    aperture_area_m2: f64,
    frequency_hz: f64,
    medium: &MediumParams,
) -> Result<f64> {
    medium.validate()?;
    if !(aperture_area_m2 > 0.0) {
        return Err(Error::InvalidParam {
            name: "aperture_area_m2",
            reason: "must be > 0",
            value: aperture_area_m2,
        });
    }
    if !(frequency_hz > 0.0) {
        return Err(Error::InvalidParam {
            name: "frequency_hz",
            reason: "must be > 0",
            value: frequency_hz,
        });
    }
    Ok(aperture_area_m2 * frequency_hz / medium.sound_speed)
}

/// Shock distance R_s = c_0 * lambda / (4 * beta * u) with particle velocity
/// u = p_0 / (rho_0 * c_0): the range where cumulative steepening would form
/// a sawtooth and excess attenuation sets in.
pub fn shock_distance(
    primary_pressure_pa: f64,
    frequency_hz: f64,
    medium: &MediumParams,
) -> Result<f64> {
    medium.validate()?;
    if !(primary_pressure_pa > 0.0) {
        return Err(Error::InvalidParam {
            name: "primary_pressure_pa",
            reason: "must be > 0",
            value: primary_pressure_pa,
        });
    }
    if !(frequency_hz > 0.0) {
        return Err(Error::InvalidParam {
            name: "frequency_hz",
            reason: "must be > 0",
            value: frequency_hz,
        });
    }
    let lambda = medium.sound_speed / frequency_hz;
    let u = primary_pressure_pa / (medium.density * medium.sound_speed);
    Ok(medium.sound_speed * lambda / (4.0 * medium.beta * u))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fresh() -> MediumParams {
        MediumParams::default()
    }

    fn sea() -> MediumParams {
        MediumParams {
            salinity_ppt: 35.0,
            ..MediumParams::default()
        }
    }

    fn rel_err(got: f64, want: f64) -> f64 {
        (got - want).abs() / want.abs()
    }

    #[test]
    fn relaxation_frequency_at_10c() {
        let ft = relaxation_frequency_khz(10.0);
        assert!(
            rel_err(ft, 93.200744) < 1e-6,
            "relaxation frequency at 10 degC should be 93.2007 kHz, got {ft}"
        );
    }

    #[test]
    fn absorption_freshwater_at_855_khz() {
        let a = absorption_db_per_kyd(855.0, &fresh()).unwrap();
        assert!(
            rel_err(a, 210.207227) < 1e-6,
            "freshwater absorption at 855 kHz should be 210.207 dB/kyd, got {a}"
        );
    }

    #[test]
    fn absorption_seawater_values() {
        let a = absorption_db_per_kyd(855.0, &sea()).unwrap();
        assert!(rel_err(a, 270.168425) < 1e-6, "855 kHz seawater, got {a}");
        let b = absorption_db_per_kyd(20.0, &sea()).unwrap();
        assert!(rel_err(b, 2.785994) < 1e-6, "20 kHz seawater, got {b}");
        let c = absorption_db_per_kyd(20.0, &fresh()).unwrap();
        assert!(rel_err(c, 0.115021) < 1e-5, "20 kHz freshwater, got {c}");
    }

    #[test]
    fn absorption_zero_frequency_is_zero() {
        assert_eq!(absorption_db_per_kyd(0.0, &fresh()).unwrap(), 0.0);
        assert_eq!(absorption_np_per_m(0.0, &sea()).unwrap(), 0.0);
    }

    #[test]
    fn zero_salinity_leaves_only_the_viscous_term() {
        let m = fresh();
        let ft = relaxation_frequency_khz(m.temperature_c);
        for f in [1.0, 20.0, 93.2, 855.0, 1710.0] {
            let a = absorption_db_per_kyd(f, &m).unwrap();
            let viscous = 2.68e-2 * f * f / ft;
            assert!(
                rel_err(a, viscous) < 1e-15,
                "at S=0 the absorption must equal the viscous term alone (f={f})"
            );
        }
    }

    #[test]
    fn absorption_np_conversion() {
        let a = absorption_np_per_m(855e3, &fresh()).unwrap();
        assert!(
            rel_err(a, 0.026466537) < 1e-6,
            "855 kHz freshwater absorption should be 0.0264665 Np/m, got {a}"
        );
    }

    #[test]
    fn absorption_monotone_in_frequency() {
        for m in [fresh(), sea()] {
            let mut prev = -1.0;
            for k in 0..200 {
                let f = 0.5 * 1.05f64.powi(k);
                let a = absorption_db_per_kyd(f, &m).unwrap();
                assert!(
                    a > prev,
                    "absorption must increase with frequency (f={f} kHz, {a} <= {prev})"
                );
                prev = a;
            }
        }
    }

    #[test]
    fn absorption_range_values() {
        let ra = absorption_range(855e3, &fresh()).unwrap();
        assert!(
            rel_err(ra, 37.783560) < 1e-6,
            "absorption range at 855 kHz should be 37.78 m, got {ra}"
        );
        let ra2 = absorption_range(1710e3, &fresh()).unwrap();
        assert!(
            rel_err(ra2, 9.445890) < 1e-6,
            "absorption range at 1710 kHz should be 9.45 m, got {ra2}"
        );
    }

    #[test]
    fn absorption_range_is_reciprocal_of_absorption() {
        for f in [10e3, 100e3, 855e3, 2e6] {
            for m in [fresh(), sea()] {
                let prod = absorption_range(f, &m).unwrap() * absorption_np_per_m(f, &m).unwrap();
                assert!(
                    (prod - 1.0).abs() < 1e-12,
                    "R_a * alpha must be 1, got {prod} at f={f}"
                );
            }
        }
    }

    #[test]
    fn rayleigh_distance_default_aperture() {
        let rf = rayleigh_distance(0.075 * 0.075, 855e3, &fresh()).unwrap();
        assert!(
            rel_err(rf, 3.249578) < 1e-6,
            "Rayleigh distance should be 3.25 m, got {rf}"
        );
    }

    #[test]
    fn rayleigh_distance_linear_in_area_and_frequency() {
        let m = fresh();
        let base = rayleigh_distance(5e-3, 855e3, &m).unwrap();
        let double_area = rayleigh_distance(1e-2, 855e3, &m).unwrap();
        let double_freq = rayleigh_distance(5e-3, 1710e3, &m).unwrap();
        assert!((double_area - 2.0 * base).abs() < 1e-12 * base);
        assert!((double_freq - 2.0 * base).abs() < 1e-12 * base);
    }

    #[test]
    fn shock_distance_default_drive() {
        let rs = shock_distance(20e3, 855e3, &fresh()).unwrap();
        assert!(
            rel_err(rs, 13.541320) < 1e-6,
            "shock distance should be 13.54 m, got {rs}"
        );
    }

    #[test]
    fn shock_distance_halves_when_pressure_doubles() {
        let m = fresh();
        let r1 = shock_distance(20e3, 855e3, &m).unwrap();
        let r2 = shock_distance(40e3, 855e3, &m).unwrap();
        assert_eq!(r2, r1 / 2.0, "doubling drive pressure must halve R_s");
        let mb = MediumParams { beta: 7.0, ..m };
        let r3 = shock_distance(20e3, 855e3, &mb).unwrap();
        assert_eq!(r3, r1 / 2.0, "doubling beta must halve R_s");
    }

    #[test]
    fn invalid_medium_is_rejected() {
        let cases = [
            MediumParams {
                temperature_c: 50.0,
                ..fresh()
            },
            MediumParams {
                temperature_c: -5.0,
                ..fresh()
            },
            MediumParams {
                salinity_ppt: -1.0,
                ..fresh()
            },
            MediumParams {
                salinity_ppt: 46.0,
                ..fresh()
            },
            MediumParams {
                density: 0.0,
                ..fresh()
            },
            MediumParams {
                sound_speed: -1480.0,
                ..fresh()
            },
            MediumParams {
                beta: 0.0,
                ..fresh()
            },
        ];
        for m in cases {
            assert!(
                absorption_db_per_kyd(855.0, &m).is_err(),
                "invalid medium must be rejected: {m:?}"
            );
        }
    }

    #[test]
    fn negative_frequency_is_rejected() {
        assert!(absorption_db_per_kyd(-1.0, &fresh()).is_err());
        assert!(absorption_range(0.0, &fresh()).is_err());
        assert!(rayleigh_distance(5e-3, -855e3, &fresh()).is_err());
        assert!(shock_distance(0.0, 855e3, &fresh()).is_err());
    }
}
