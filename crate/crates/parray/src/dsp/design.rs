//! Butterworth design: analog prototype, frequency transform, bilinear
//! mapping with prewarp, and grouping into stable second-order sections.
//!
//! Everything is carried in zero-pole-gain form until the last step. A
//! direct-form realization of order 28 is numerically unusable; cascaded
//! biquads with the overall gain spread evenly across sections keep every
//! intermediate signal O(1).

use rustfft::num_complex::Complex64;

use crate::error::{Error, Result};

use super::{Biquad, FilterChain, FilterKind, FilterSpec};

/// Complex product that cannot overflow: mantissa kept near unit magnitude,
/// power-of-two exponent tracked separately.
struct ScaledProduct {
    m: Complex64,
    e: i32,
}

impl ScaledProduct {
    fn one() -> Self {
        Self {
            m: Complex64::new(1.0, 0.0),
            e: 0,
        }
    }

    fn renorm(&mut self) {
        let mut n = self.m.norm_sqr();
        while n > 4.0 {
            self.m *= 0.5;
            self.e += 1;
            n = self.m.norm_sqr();
        }
        while n > 0.0 && n < 0.25 {
            self.m *= 2.0;
            self.e -= 1;
            n = self.m.norm_sqr();
        }
    }

    fn mul(&mut self, c: Complex64) {
        self.m *= c;
        self.renorm();
    }

    fn div(&mut self, c: Complex64) {
        self.m /= c;
        self.renorm();
    }

    /// Real part of the accumulated product; the designs below only ever
    /// produce real totals.
    fn to_real(&self) -> f64 {
        self.m.re * f64::powi(2.0, self.e)
    }
}

/// Left-half-plane poles of the analog Butterworth prototype (cutoff 1 rad/s).
fn prototype_poles(order: usize) -> Vec<Complex64> {
    let n = order as f64;
    (0..order)
        .map(|k| {
            let theta = std::f64::consts::PI * (2.0 * k as f64 + n + 1.0) / (2.0 * n);
            Complex64::from_polar(1.0, theta)
        })
        .collect()
}

/// Analog angular frequency that the bilinear transform maps onto f at the
/// given sample rate.
fn prewarp(f_hz: f64, sample_rate_hz: f64) -> f64 {
    2.0 * sample_rate_hz * (std::f64::consts::PI * f_hz / sample_rate_hz).tan()
}

struct AnalogZpk {
    zeros: Vec<Complex64>,
    poles: Vec<Complex64>,
    /// Gain expressed as a scaled product so order-28 designs cannot overflow.
    gain: ScaledProduct,
}

fn analog_design(spec: &FilterSpec, sample_rate_hz: f64) -> AnalogZpk {
    let proto = prototype_poles(spec.order);
    let mut gain = ScaledProduct::one();
    match spec.kind {
        FilterKind::Lowpass { cutoff_hz } => {
            let wo = prewarp(cutoff_hz, sample_rate_hz);
            let poles = proto.iter().map(|p| p * wo).collect();
            for _ in 0..spec.order {
                gain.mul(Complex64::new(wo, 0.0));
            }
            AnalogZpk {
                zeros: vec![],
                poles,
                gain,
            }
        }
        FilterKind::Highpass { cutoff_hz } => {
            let wo = prewarp(cutoff_hz, sample_rate_hz);
            let poles: Vec<_> = proto.iter().map(|p| wo / p).collect();
            // k_hp = 1 / prod(-p_proto), which is exactly 1 for Butterworth;
            // computed anyway so the algebra stays general
            for p in &proto {
                gain.div(-p);
            }
            AnalogZpk {
                zeros: vec![Complex64::new(0.0, 0.0); spec.order],
                poles,
                gain,
            }
        }
        FilterKind::Bandpass { low_hz, high_hz } => {
            let w1 = prewarp(low_hz, sample_rate_hz);
            let w2 = prewarp(high_hz, sample_rate_hz);
            let wo2 = w1 * w2;
            let bw = w2 - w1;
            let mut poles = Vec::with_capacity(2 * spec.order);
            for p in &proto {
                let s = p * (bw / 2.0);
                let d = (s * s - wo2).sqrt();
                poles.push(s + d);
                poles.push(s - d);
            }
            for _ in 0..spec.order {
                gain.mul(Complex64::new(bw, 0.0));
            }
            AnalogZpk {
                zeros: vec![Complex64::new(0.0, 0.0); spec.order],
                poles,
                gain,
            }
        }
    }
}

struct DigitalZpk {
    poles: Vec<Complex64>,
    gain: f64,
}

/// Maps analog poles into the z-plane. The digital zeros are not kept: for
/// these kinds they all land at z = +1 or z = -1 and the section numerators
/// encode them as fixed templates.
fn bilinear(analog: AnalogZpk, sample_rate_hz: f64) -> DigitalZpk {
    let fs2 = Complex64::new(2.0 * sample_rate_hz, 0.0);
    let mut gain = analog.gain;
    for z in &analog.zeros {
        gain.mul(fs2 - z);
    }
    let poles: Vec<_> = analog
        .poles
        .iter()
        .map(|p| {
            gain.div(fs2 - p);
            (fs2 + p) / (fs2 - p)
        })
        .collect();
    DigitalZpk {
        poles,
        gain: gain.to_real(),
    }
}

/// Quality factor of the analog resonance equivalent to a digital pole,
/// used only to order sections (most damped first).
fn pole_q(p: Complex64) -> f64 {
    let r = p.norm();
    if r <= 0.0 {
        return 0.25;
    }
    let sigma = -r.ln();
    let omega = p.arg().abs();
    if sigma <= 0.0 {
        return f64::INFINITY;
    }
    (sigma * sigma + omega * omega).sqrt() / (2.0 * sigma)
}

struct SectionSeed {
    a1: f64,
    a2: f64,
    /// Unscaled numerator; the gain share is folded in later.
    b: [f64; 3],
    q: f64,
}

fn group_sections(digital: &DigitalZpk, spec: &FilterSpec) -> Result<Vec<SectionSeed>> {
    let mut upper: Vec<Complex64> = Vec::new();
    let mut real: Vec<f64> = Vec::new();
    for p in &digital.poles {
        if p.im.abs() <= 1e-9 * (1.0 + p.re.abs()) {
            real.push(p.re);
        } else if p.im > 0.0 {
            upper.push(*p);
        }
    }
    if 2 * upper.len() + real.len() != digital.poles.len() {
        return Err(Error::InvalidFilterSpec {
            reason: "conjugate pole pairing failed".into(),
        });
    }
    real.sort_by(f64::total_cmp);

    // numerator templates place the digital zeros: lowpass zeros at -1,
    // highpass at +1, bandpass one of each per section
    let (full, half) = match spec.kind {
        FilterKind::Lowpass { .. } => ([1.0, 2.0, 1.0], [1.0, 1.0, 0.0]),
        FilterKind::Highpass { .. } => ([1.0, -2.0, 1.0], [1.0, -1.0, 0.0]),
        FilterKind::Bandpass { .. } => ([1.0, 0.0, -1.0], [1.0, 0.0, 0.0]),
    };

    let mut seeds: Vec<SectionSeed> = Vec::new();
    for p in upper {
        seeds.push(SectionSeed {
            a1: -2.0 * p.re,
            a2: p.norm_sqr(),
            b: full,
            q: pole_q(p),
        });
    }
    let mut reals = real.chunks_exact(2);
    for pair in &mut reals {
        let (p, q) = (pair[0], pair[1]);
        seeds.push(SectionSeed {
            a1: -(p + q),
            a2: p * q,
            b: full,
            q: 0.5,
        });
    }
    if let [p] = reals.remainder() {
        seeds.push(SectionSeed {
            a1: -p,
            a2: 0.0,
            b: half,
            q: 0.25,
        });
    }
    seeds.sort_by(|x, y| x.q.total_cmp(&y.q).then(x.a2.total_cmp(&y.a2)));
    Ok(seeds)
}

/// Designs a digital Butterworth filter as a cascade of second-order
/// sections: maximally flat magnitude, exactly -3.01 dB at each cutoff.
pub fn design_butterworth(spec: &FilterSpec, sample_rate_hz: f64) -> Result<FilterChain> {
    spec.validate(sample_rate_hz)?;
    let digital = bilinear(analog_design(spec, sample_rate_hz), sample_rate_hz);
    let seeds = group_sections(&digital, spec)?;

    // spread the overall gain evenly so no section sees huge or tiny signals
    let n_sections = seeds.len();
    let share = digital.gain.abs().powf(1.0 / n_sections as f64);
    let mut sections = Vec::with_capacity(n_sections);
    for (i, seed) in seeds.into_iter().enumerate() {
        let sign = if i == 0 && digital.gain < 0.0 { -1.0 } else { 1.0 };
        let s = Biquad {
            b0: sign * share * seed.b[0],
            b1: sign * share * seed.b[1],
            b2: sign * share * seed.b[2],
            a1: seed.a1,
            a2: seed.a2,
        };
        if !s.is_stable() {
            return Err(Error::UnstableDesign {
                section: i,
                order: spec.order,
            });
        }
        sections.push(s);
    }
    Ok(FilterChain {
        sample_rate_hz,
        sections,
    })
}

/// The receive-side conditioning used on every demodulated record: an
/// order-28 lowpass at twice the difference frequency (passes the pulse,
/// rejects carrier leakage and demodulation harmonics) followed by an
/// order-2 highpass at 1 kHz (removes the rectification offset).
pub fn postprocess_chain(f_d_hz: f64, sample_rate_hz: f64) -> Result<FilterChain> {
    if !(f_d_hz > 0.0) || !(2.0 * f_d_hz < sample_rate_hz / 2.0) {
        return Err(Error::InvalidFilterSpec {
            reason: format!(
                "lowpass cutoff 2 x {f_d_hz} Hz must sit below Nyquist at {sample_rate_hz} Hz"
            ),
        });
    }
    let lowpass = design_butterworth(
        &FilterSpec {
            kind: FilterKind::Lowpass {
                cutoff_hz: 2.0 * f_d_hz,
            },
            order: 28,
        },
        sample_rate_hz,
    )?;
    let highpass = design_butterworth(
        &FilterSpec {
            kind: FilterKind::Highpass { cutoff_hz: 1e3 },
            order: 2,
        },
        sample_rate_hz,
    )?;
    let mut sections = lowpass.sections;
    sections.extend(highpass.sections);
    Ok(FilterChain {
        sample_rate_hz,
        sections,
    })
}
