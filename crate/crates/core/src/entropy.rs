//! p-Shannon and p-Rényi entropies of frame coefficient distributions.
//!
//! For a Parseval p-frame and `x ≠ 0` the numbers `|f_j(x/‖x‖)|^p` form a
//! probability vector; the entropies below are those of that vector, in nats.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::frames::AnalysisFrame;
use crate::spaces::{self, dot, Scalar, Vector};

/// Probabilities below this are treated as exact zeros.
pub const PROBABILITY_FLOOR: f64 = 1e-300;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Order {
    Shannon,
    Renyi(f64),
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EntropyValue {
    pub value: f64,
    pub p: f64,
    pub order: Order,
}

/// `−Σ c log c` with `0 log 0 = 0`.
pub fn shannon(probabilities: &[f64]) -> f64 {
    -probabilities
        .iter()
        .filter(|&&c| c >= PROBABILITY_FLOOR)
        .map(|&c| c * c.ln())
        .sum::<f64>()
}

/// `log(Σ c^α) / (1 − α)`; zero entries are dropped since `0^α = 0`.
pub fn renyi(probabilities: &[f64], alpha: f64) -> Result<f64> {
    check_alpha(alpha)?;
    let s: f64 = probabilities
        .iter()
        .filter(|&&c| c >= PROBABILITY_FLOOR)
        .map(|&c| c.powf(alpha))
        .sum();
    Ok(s.ln() / (1.0 - alpha))
}

pub(crate) fn check_alpha(alpha: f64) -> Result<()> {
    if !(alpha.is_finite() && alpha > 0.0) || alpha == 1.0 {
        return Err(Error::InvalidAlpha(alpha));
    }
    Ok(())
}

/// `|a_j(y)|^p` for rows `a_j` at an already normalised point.
pub(crate) fn coefficient_distribution(rows: &[&[Scalar]], unit: &[Scalar], p: f64) -> Vec<f64> {
    rows.iter()
        .map(|a| {
            let c = dot(a, unit).norm().powf(p);
            if c < PROBABILITY_FLOOR {
                0.0
            } else {
                c
            }
        })
        .collect()
}

/// `(|f_j(x/‖x‖)|^p)_j`.
pub fn frame_distribution(frame: &AnalysisFrame, x: &Vector) -> Result<Vec<f64>> {
    let unit = spaces::normalize(frame.space(), x)?;
    Ok(coefficient_distribution(
        &frame.rows(),
        unit.coords(),
        frame.p(),
    ))
}

pub fn p_shannon_entropy(frame: &AnalysisFrame, x: &Vector) -> Result<EntropyValue> {
    let c = frame_distribution(frame, x)?;
    Ok(EntropyValue {
        value: shannon(&c),
        p: frame.p(),
        order: Order::Shannon,
    })
}

pub fn p_renyi_entropy(frame: &AnalysisFrame, x: &Vector, alpha: f64) -> Result<EntropyValue> {
    check_alpha(alpha)?;
    let c = frame_distribution(frame, x)?;
    Ok(EntropyValue {
        value: renyi(&c, alpha)?,
        p: frame.p(),
        order: Order::Renyi(alpha),
    })
}
