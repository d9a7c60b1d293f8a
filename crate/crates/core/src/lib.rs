//! Link-level baseband simulation workbench.
//!
//! Three receiver archetypes share one geometry-driven multipath channel:
//!
//! * [`rake`]: DSSS spreading with a path searcher, correlator fingers and
//!   maximal-ratio combining (WCDMA-like).
//! * [`ofdm`]: cyclic-prefix OFDM with least-squares or LMS channel
//!   estimation and one-tap equalization (WiMax-like).
//! * [`adapteq`]: a time-domain LMS equalizer with training and
//!   decision-directed modes (WiFi-like).
//!
//! [`channel`] turns scatterer scenes into tap sets and analyses band-limited
//! impulse responses, [`sigcore`] holds the shared signal types, and
//! [`workbench`] binds everything into seeded, reproducible scenarios.

pub mod adapteq;
pub mod channel;
pub mod error;
pub mod ofdm;
pub mod rake;
pub mod sigcore;
pub mod workbench;

pub use error::{Error, Result};
pub use num_complex::Complex64;
