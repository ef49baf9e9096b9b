//! The factorized contextual model of the post-selected experiment.
//!
//! After the window is applied, the distribution of the hidden variables
//! depends on the settings and on the window. Writing the post-selected
//! joint distribution as
//!
//! ```text
//! P(x1, x2 | α, β, W) = ∫ P(x1 | α, ξ1) P(x2 | β, ξ2) P(ξ1, ξ2 | α, β, W)
//! ```
//!
//! with deterministic outcome kernels makes that dependence explicit. The
//! pair's support is the curve `ξ2 = ξ1 + π/2`, so the integral runs over
//! `φ = ξ1 ∈ [0, π)` (everything has period π) with density proportional to
//! the probability that a pair at `φ` passes the window.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{measure, ModelConfig};
use crate::postselect::{acceptance_probability, CoincidenceWindow};

pub const DEFAULT_BINS: usize = 360;

/// A piece of the φ grid on which both outcomes are constant.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ModelCell {
    pub phi_lo: f64,
    pub phi_hi: f64,
    pub weight: f64,
    pub x1: i8,
    pub x2: i8,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ContextualModel {
    pub alpha: f64,
    pub beta: f64,
    pub window: CoincidenceWindow,
    pub model: ModelConfig,
    pub bins: usize,
    /// Normalized: weights sum to 1.
    pub cells: Vec<ModelCell>,
}

/// Builds `P(ξ1, ξ2 | α, β, W)` on `bins` equal φ bins over `[0, π)`.
///
/// Bins are further split where either outcome changes sign, so each cell
/// carries a single outcome pair; the weight of a cell is its width times
/// the acceptance probability at its midpoint.
pub fn build_contextual_model(
    alpha: f64,
    beta: f64,
    window: CoincidenceWindow,
    model: &ModelConfig,
    bins: usize,
) -> Result<ContextualModel> {
    model.validate()?;
    if window.width <= 0.0 {
        return Err(Error::Config("contextual model needs a window wider than 0".into()));
    }
    if bins == 0 {
        return Err(Error::Config("contextual model needs at least one bin".into()));
    }
    let mut edges: Vec<f64> = (0..=bins).map(|k| k as f64 * PI / bins as f64).collect();
    for theta in [alpha, beta + FRAC_PI_2] {
        for k in 0..2 {
            edges.push((theta - FRAC_PI_4 + k as f64 * FRAC_PI_2).rem_euclid(PI));
        }
    }
    edges.sort_by(f64::total_cmp);

    let w = window.width / model.time_scale;
    let d = model.delay_exponent as i32;
    let alice = model.station(alpha);
    let bob = model.station(beta);
    let mut cells = Vec::with_capacity(edges.len());
    for e in edges.windows(2) {
        let width = e[1] - e[0];
        if width <= 0.0 {
            continue;
        }
        let phi = 0.5 * (e[0] + e[1]);
        let s1 = (2.0 * (alpha - phi)).sin().abs().powi(d);
        let s2 = (2.0 * (beta - phi - FRAC_PI_2)).sin().abs().powi(d);
        cells.push(ModelCell {
            phi_lo: e[0],
            phi_hi: e[1],
            weight: width * acceptance_probability(s1, s2, w, model.r_min),
            x1: measure(phi, &alice, 0.0).outcome,
            x2: measure(phi + FRAC_PI_2, &bob, 0.0).outcome,
        });
    }
    let total: f64 = cells.iter().map(|c| c.weight).sum();
    if !(total > 0.0) {
        return Err(Error::DegenerateModel(format!(
            "window {} keeps no pairs at settings ({alpha}, {beta})",
            window.width
        )));
    }
    for c in &mut cells {
        c.weight /= total;
    }
    Ok(ContextualModel {
        alpha,
        beta,
        window,
        model: *model,
        bins,
        cells,
    })
}

/// Joint distribution of `(+,+), (+,-), (-,+), (-,-)` predicted by the model.
pub fn contextual_model_predict(model: &ContextualModel) -> [f64; 4] {
    let mut p = [0.0; 4];
    for c in &model.cells {
        p[super::joint_cell(c.x1, c.x2)] += c.weight;
    }
    let total: f64 = p.iter().sum();
    p.map(|v| v / total)
}

impl ContextualModel {
    pub fn correlation(&self) -> f64 {
        let p = contextual_model_predict(self);
        p[0] + p[3] - p[1] - p[2]
    }

    /// Weight of each of `bins` equal φ bins over `[0, π)`.
    pub fn phi_histogram(&self, bins: usize) -> Vec<f64> {
        let mut h = vec![0.0; bins];
        for c in &self.cells {
            let mid = 0.5 * (c.phi_lo + c.phi_hi);
            let k = ((mid / PI * bins as f64) as usize).min(bins - 1);
            h[k] += c.weight;
        }
        h
    }
}
