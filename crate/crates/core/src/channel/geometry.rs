use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{Tap, TapSet};
use crate::{Error, Result};

/// Metres per second.
pub const SPEED_OF_LIGHT: f64 = 2.997_924_58e8;

/// Minimum separation, in metres, between a scatterer and either antenna.
const COINCIDENCE_EPS: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Point2 {
    pub x: f64,
    pub y: f64,
}

impl Point2 {
    pub fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn distance(self, other: Point2) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }

    fn direction_to(self, other: Point2) -> (f64, f64) {
        let d = self.distance(other);
        ((other.x - self.x) / d, (other.y - self.y) / d)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scatterer {
    pub pos: Point2,
    /// Complex reflection factor, magnitude at most one.
    pub reflectivity: Complex64,
}

fn default_path_loss_exponent() -> f64 {
    1.0
}

/// Two-dimensional transmitter, receiver and point scatterers.
///
/// `rx_velocity` is the receiver speed along the LOS axis in m/s, positive
/// when closing on the transmitter.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScattererScene {
    pub tx_pos: Point2,
    pub rx_pos: Point2,
    #[serde(default)]
    pub scatterers: Vec<Scatterer>,
    #[serde(default)]
    pub los_blocked: bool,
    #[serde(default)]
    pub rx_velocity: f64,
    pub carrier_freq: f64,
    /// Amplitude falls off as `(los_length / path_length)^alpha`.
    #[serde(default = "default_path_loss_exponent")]
    pub path_loss_exponent: f64,
}

impl ScattererScene {
    pub fn new(tx_pos: Point2, rx_pos: Point2, carrier_freq: f64) -> Self {
        Self {
            tx_pos,
            rx_pos,
            scatterers: Vec::new(),
            los_blocked: false,
            rx_velocity: 0.0,
            carrier_freq,
            path_loss_exponent: 1.0,
        }
    }

    pub fn with_scatterer(mut self, pos: Point2, reflectivity: Complex64) -> Self {
        self.scatterers.push(Scatterer { pos, reflectivity });
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.tx_pos.distance(self.rx_pos) < COINCIDENCE_EPS {
            return Err(Error::Geometry("transmitter and receiver coincide".into()));
        }
        if !(self.carrier_freq > 0.0 && self.carrier_freq.is_finite()) {
            return Err(Error::Geometry(format!(
                "carrier frequency {} must be positive",
                self.carrier_freq
            )));
        }
        if !self.path_loss_exponent.is_finite() || self.path_loss_exponent < 0.0 {
            return Err(Error::Geometry("path-loss exponent must be finite and non-negative".into()));
        }
        for (i, s) in self.scatterers.iter().enumerate() {
            if s.reflectivity.norm() > 1.0 + 1e-12 {
                return Err(Error::Geometry(format!(
                    "scatterer {i} reflectivity magnitude {} exceeds 1",
                    s.reflectivity.norm()
                )));
            }
            if s.pos.distance(self.tx_pos) < COINCIDENCE_EPS
                || s.pos.distance(self.rx_pos) < COINCIDENCE_EPS
            {
                return Err(Error::Geometry(format!(
                    "scatterer {i} coincides with an antenna"
                )));
            }
        }
        if self.los_blocked && self.scatterers.is_empty() {
            return Err(Error::Geometry("LOS blocked and no scatterers: no propagation path".into()));
        }
        Ok(())
    }

    fn doppler_from(&self, source: Point2) -> f64 {
        let axis = self.rx_pos.direction_to(self.tx_pos);
        let arrival = self.rx_pos.direction_to(source);
        let cos = axis.0 * arrival.0 + axis.1 * arrival.1;
        self.rx_velocity * self.carrier_freq / SPEED_OF_LIGHT * cos
    }
}

/// Converts a scene into its LOS tap (unless blocked) plus one tap per
/// scatterer. LOS has unit gain; scattered paths carry the reflectivity,
/// the path-length loss relative to LOS and the carrier phase of their delay.
pub fn scene_to_taps(scene: &ScattererScene) -> Result<TapSet> {
    scene.validate()?;
    let los_len = scene.tx_pos.distance(scene.rx_pos);
    let mut taps = Vec::with_capacity(scene.scatterers.len() + 1);
    if !scene.los_blocked {
        taps.push(Tap::new(
            los_len / SPEED_OF_LIGHT,
            Complex64::new(1.0, 0.0),
            scene.doppler_from(scene.tx_pos),
        ));
    }
    for s in &scene.scatterers {
        let path = scene.tx_pos.distance(s.pos) + s.pos.distance(scene.rx_pos);
        let delay = path / SPEED_OF_LIGHT;
        let loss = (los_len / path).powf(scene.path_loss_exponent);
        let phase = Complex64::from_polar(1.0, -2.0 * PI * delay * scene.carrier_freq);
        taps.push(Tap::new(delay, s.reflectivity * loss * phase, scene.doppler_from(s.pos)));
    }
    TapSet::new(taps)
}
