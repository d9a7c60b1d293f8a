//! Geometry-driven multipath channel.
//!
//! A [`ScattererScene`] becomes a [`TapSet`] of (delay, gain, Doppler)
//! triples, [`apply_channel`] runs the tapped delay line on a sampled signal,
//! and [`impulse_response`] gives the band-limited view of the same taps
//! together with the main-lobe width metric.

mod geometry;
mod ir;
mod taps;

pub use geometry::{scene_to_taps, Point2, Scatterer, ScattererScene, SPEED_OF_LIGHT};
pub use ir::{
    broadening_sweep, impulse_response, mainlobe_broadening, separation_for_broadening,
    two_tap_broadening, IrAnalysis, NULL_THRESHOLD_DB, SINC_LOBES,
};
pub use taps::{apply_channel, delay_in_samples, Tap, TapSet};
