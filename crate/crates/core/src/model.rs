//! Outcome and delay generation for one emitted pair, and the two analytic
//! reference curves (quantum prediction and the no-post-selection sawtooth).

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI, TAU};

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Hidden state of one pair. The second particle carries `phi + π/2`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PairState {
    pub phi: f64,
    pub r1: f64,
    pub r2: f64,
}

impl PairState {
    /// Polarization angle seen by Bob's station.
    pub fn phi_second(&self) -> f64 {
        self.phi + FRAC_PI_2
    }
}

/// Parameters shared by both stations.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelConfig {
    /// The fixed time scale `T`; delays lie in `[0, T]`.
    pub time_scale: f64,
    /// Exponent `d` of `|sin 2(a - φ)|` in the delay. Only `d = 2` is the
    /// published model; larger even values are an extension.
    pub delay_exponent: u32,
    /// Lower end of the range `r` is drawn from. Zero reproduces the
    /// original model; `1 - c` gives the narrow-range variant.
    pub r_min: f64,
}

impl Default for ModelConfig {
    fn default() -> Self {
        Self {
            time_scale: 1000.0,
            delay_exponent: 2,
            r_min: 0.0,
        }
    }
}

impl ModelConfig {
    pub fn validate(&self) -> Result<()> {
        validate_time_scale(self.time_scale)?;
        validate_delay_exponent(self.delay_exponent)?;
        validate_r_min(self.r_min)
    }

    pub fn station(&self, angle: f64) -> StationConfig {
        StationConfig {
            angle,
            time_scale: self.time_scale,
            delay_exponent: self.delay_exponent,
        }
    }
}

pub(crate) fn validate_time_scale(t: f64) -> Result<()> {
    if !(t.is_finite() && t > 0.0) {
        return Err(Error::Config(format!("time scale must be positive, got {t}")));
    }
    Ok(())
}

pub(crate) fn validate_delay_exponent(d: u32) -> Result<()> {
    if d < 2 || !d.is_multiple_of(2) {
        return Err(Error::Config(format!(
            "delay exponent must be an even integer >= 2, got {d}"
        )));
    }
    Ok(())
}

pub(crate) fn validate_r_min(r_min: f64) -> Result<()> {
    if !(0.0..1.0).contains(&r_min) {
        return Err(Error::Config(format!("r_min must lie in [0, 1), got {r_min}")));
    }
    Ok(())
}

/// A polarizer station: setting angle `a`, time scale `T`, delay exponent `d`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StationConfig {
    pub angle: f64,
    pub time_scale: f64,
    pub delay_exponent: u32,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DetectionEvent {
    pub outcome: i8,
    pub delay: f64,
}

/// `sign` with the tie `sign(0) = +1`.
#[inline]
pub fn sign(value: f64) -> i8 {
    if value >= 0.0 {
        1
    } else {
        -1
    }
}

/// Draws a pair state: `phi` uniform on `[0, 2π)`, `r1`, `r2` uniform on
/// `[r_min, 1]`.
pub fn sample_pair<R: Rng + ?Sized>(stream: &mut R, r_min: f64) -> Result<PairState> {
    validate_r_min(r_min)?;
    Ok(sample_pair_unchecked(stream, r_min))
}

#[inline]
pub(crate) fn sample_pair_unchecked<R: Rng + ?Sized>(stream: &mut R, r_min: f64) -> PairState {
    let span = 1.0 - r_min;
    let phi = stream.gen::<f64>() * TAU;
    let r1 = r_min + span * stream.gen::<f64>();
    let r2 = r_min + span * stream.gen::<f64>();
    PairState { phi, r1, r2 }
}

/// Deterministic response of one station to one particle.
///
/// `c = cos 2(a - φ)`, `s = sin 2(a - φ)`; the outcome is `sign(c)` and the
/// delay is `r·T·|s|^d`.
#[inline]
pub fn measure(phi_component: f64, station: &StationConfig, r: f64) -> DetectionEvent {
    let (s, c) = (2.0 * (station.angle - phi_component)).sin_cos();
    DetectionEvent {
        outcome: sign(c),
        delay: r * station.time_scale * s.abs().powi(station.delay_exponent as i32),
    }
}

/// `-cos 2(a - b)`: the photon-pair prediction with perfect anti-correlation
/// at equal settings.
pub fn quantum_correlation(a: f64, b: f64) -> f64 {
    -(2.0 * (a - b)).cos()
}

/// Correlation of the generating model without any post-selection,
/// `(1/2π) ∫ sign(cos 2(a-φ)) sign(cos 2(b-φ-π/2)) dφ`.
///
/// The integrand is piecewise constant with period π, so the integral is
/// evaluated exactly: every sign change in `[0, π)` is enumerated and the
/// constant pieces are summed.
pub fn sawtooth_oracle(a: f64, b: f64) -> f64 {
    let mut cuts = Vec::with_capacity(6);
    cuts.push(0.0);
    cuts.push(PI);
    // cos 2(θ - φ) vanishes at φ = θ - π/4 + kπ/2.
    for theta in [a, b + FRAC_PI_2] {
        for k in 0..2 {
            let p = (theta - FRAC_PI_4 + k as f64 * FRAC_PI_2).rem_euclid(PI);
            cuts.push(p);
        }
    }
    cuts.sort_by(f64::total_cmp);

    let alice = StationConfig {
        angle: a,
        time_scale: 1.0,
        delay_exponent: 2,
    };
    let bob = StationConfig { angle: b, ..alice };
    let mut total = 0.0;
    for w in cuts.windows(2) {
        let width = w[1] - w[0];
        if width <= 0.0 {
            continue;
        }
        let mid = 0.5 * (w[0] + w[1]);
        let x1 = measure(mid, &alice, 0.0).outcome;
        let x2 = measure(mid + FRAC_PI_2, &bob, 0.0).outcome;
        total += width * f64::from(x1 * x2);
    }
    (total / PI).clamp(-1.0, 1.0)
}
