//! Multi-start ascent for the sup-coherence constant
//! `c = sup_{‖y‖=1} max_{j,k} |a_j(y)| |b_k(y)|`.
//!
//! Both maxima are replaced by log-sum-exp soft maxima during ascent. Each
//! stage runs a retraction ascent (step, then renormalise onto the sphere)
//! with backtracking on the smoothed objective; later stages sharpen the
//! smoothing by a factor of ten. Every visited point is scored with the exact
//! objective and the best exact value is what gets reported, so the result is
//! always attained at the returned witness.

use crate::exec::{self, Execution};
use crate::spaces::{dot, Field, NormedSpace, Scalar};

/// Sharpening factors applied to the base smoothing parameter, in order.
const CONTINUATION: [f64; 3] = [1.0, 10.0, 100.0];

#[derive(Clone, Copy, Debug)]
pub(crate) struct AscentSettings {
    pub starts: usize,
    pub max_iters: usize,
    pub step_init: f64,
    pub beta: f64,
    pub tol: f64,
    pub seed: u64,
    pub execution: Execution,
}

pub(crate) struct CoherenceProblem<'a> {
    pub sphere: NormedSpace,
    pub left: Vec<&'a [Scalar]>,
    pub right: Vec<&'a [Scalar]>,
}

#[derive(Clone, Debug)]
pub(crate) struct Ascent {
    pub value: f64,
    pub point: Vec<Scalar>,
}

fn max_modulus(rows: &[&[Scalar]], y: &[Scalar]) -> f64 {
    rows.iter().map(|a| dot(a, y).norm()).fold(0.0, f64::max)
}

/// Soft maximum of `|a_j(y)|` and its gradient in the Wirtinger form
/// `∂/∂Re + i ∂/∂Im`.
fn soft_max(rows: &[&[Scalar]], y: &[Scalar], beta: f64) -> (f64, Vec<Scalar>) {
    let values: Vec<Scalar> = rows.iter().map(|a| dot(a, y)).collect();
    let moduli: Vec<f64> = values.iter().map(|u| u.norm()).collect();
    let peak = moduli.iter().cloned().fold(0.0, f64::max);
    let weights: Vec<f64> = moduli.iter().map(|v| (beta * (v - peak)).exp()).collect();
    let total: f64 = weights.iter().sum();
    let value = peak + total.ln() / beta;
    let mut grad = vec![Scalar::new(0.0, 0.0); y.len()];
    for ((a, u), (v, w)) in rows.iter().zip(&values).zip(moduli.iter().zip(&weights)) {
        if *v == 0.0 {
            continue;
        }
        let scale = u * (w / total / v);
        for (g, ai) in grad.iter_mut().zip(a.iter()) {
            *g += scale * ai.conj();
        }
    }
    (value, grad)
}

impl CoherenceProblem<'_> {
    /// `max_j |a_j(y)| · max_k |b_k(y)|` at a unit point.
    pub fn exact(&self, unit: &[Scalar]) -> f64 {
        max_modulus(&self.left, unit) * max_modulus(&self.right, unit)
    }

    fn smoothed(&self, unit: &[Scalar], beta: f64) -> (f64, Vec<Scalar>) {
        let (sf, gf) = soft_max(&self.left, unit, beta);
        let (sg, gg) = soft_max(&self.right, unit, beta);
        let mut grad: Vec<Scalar> = gf.iter().zip(&gg).map(|(a, b)| a * sg + b * sf).collect();
        if self.sphere.field() == Field::Real {
            grad.iter_mut().for_each(|g| g.im = 0.0);
        }
        (sf * sg, grad)
    }

    fn normalized(&self, y: Vec<Scalar>) -> Option<Vec<Scalar>> {
        let n = self.sphere.norm_of(&y);
        if n > 0.0 && n.is_finite() {
            Some(y.into_iter().map(|c| c / n).collect())
        } else {
            None
        }
    }

    pub fn ascend(&self, start: Vec<Scalar>, cfg: &AscentSettings) -> Ascent {
        let Some(mut y) = self.normalized(start) else {
            return Ascent {
                value: 0.0,
                point: vec![Scalar::new(0.0, 0.0); self.sphere.dim()],
            };
        };
        let mut best = Ascent {
            value: self.exact(&y),
            point: y.clone(),
        };
        for factor in CONTINUATION {
            let beta = cfg.beta * factor;
            let (mut value, mut grad) = self.smoothed(&y, beta);
            let mut step = cfg.step_init;
            for _ in 0..cfg.max_iters {
                // drop the radial component; only tangent moves change the objective
                let yy: f64 = y.iter().map(|c| c.norm_sqr()).sum();
                let radial: f64 = grad
                    .iter()
                    .zip(&y)
                    .map(|(g, c)| (g * c.conj()).re)
                    .sum::<f64>()
                    / yy;
                let tangent: Vec<Scalar> =
                    grad.iter().zip(&y).map(|(g, c)| g - c * radial).collect();
                let tnorm = tangent.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
                if tnorm <= cfg.tol || step <= cfg.tol {
                    break;
                }
                let scale = step * yy.sqrt() / tnorm;
                let moved = y.iter().zip(&tangent).map(|(c, t)| c + t * scale).collect();
                let Some(candidate) = self.normalized(moved) else {
                    step *= 0.5;
                    continue;
                };
                let (cand_value, cand_grad) = self.smoothed(&candidate, beta);
                if cand_value > value {
                    let exact = self.exact(&candidate);
                    if exact > best.value {
                        best = Ascent {
                            value: exact,
                            point: candidate.clone(),
                        };
                    }
                    y = candidate;
                    value = cand_value;
                    grad = cand_grad;
                    step = (step * 1.5).min(1.0);
                } else {
                    step *= 0.5;
                }
            }
        }
        best
    }

    /// Gaussian starts, then one norming point per row, then `extra` points.
    pub fn starts(&self, cfg: &AscentSettings, extra: &[Vec<Scalar>]) -> Vec<Vec<Scalar>> {
        let mut starts = self.sphere.sample_sphere_coords(cfg.starts, cfg.seed);
        starts.extend(
            self.left
                .iter()
                .chain(&self.right)
                .map(|a| self.sphere.norming_point(a)),
        );
        starts.extend(extra.iter().cloned());
        starts
    }

    /// Best exact value over all starts; ties go to the lowest start index.
    pub fn estimate(&self, cfg: &AscentSettings, extra: &[Vec<Scalar>]) -> Ascent {
        let starts = self.starts(cfg, extra);
        let results = exec::map_indexed(cfg.execution, &starts, |_, s| self.ascend(s.clone(), cfg));
        let mut best: Option<Ascent> = None;
        for r in results {
            if best.as_ref().is_none_or(|b| r.value > b.value) {
                best = Some(r);
            }
        }
        best.expect("start set is never empty")
    }
}
