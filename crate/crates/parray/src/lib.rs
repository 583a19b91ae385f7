//! Parametric acoustic array toolkit.
//!
//! Simulates the transmit chain of a parametric sonar: square-root
//! amplitude-modulated (SQRAM) carrier bursts, a band-limited transducer,
//! self-demodulation of the envelope into a low-frequency difference wave,
//! the receive-side filter chain, and the measurement procedures built on
//! top (pulse quality, phase opposition, beam scans, coded links).

pub mod analysis;
pub mod dsp;
pub mod error;
pub mod io;
pub mod medium;
pub mod propagation;
pub mod sim;
pub mod transducer;
pub mod waveform;

pub use error::{Error, Result};
