//! Empirical exploration of equality cases of the pointwise chain.
//!
//! The gap `S_f(x) + S_g(x) + p log m(x̂)` is nonnegative for every Parseval
//! pair and every `x`; this module minimises it jointly over `x` and over a
//! parametrised family of exactly constructible frame pairs. Results are
//! ranked candidate configurations, nothing more.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};
use std::f64::consts::TAU;

use crate::certify::{self, joint_space, Certificate, CheckConfig, OptimizerConfig};
use crate::entropy::{self, frame_distribution};
use crate::error::{Error, Result};
use crate::exec;
use crate::frames::{generate_frame, AnalysisFrame, FrameKind};
use crate::spaces::{Field, Functional, NormedSpace, Scalar, Vector};

pub const CANDIDATE_LABEL: &str = "empirical candidate";

/// Frame-pair families with exact Parseval constructions.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Family {
    /// Standard basis of real ℓ^dim versus its image under a product of
    /// Givens rotations; one angle per coordinate pair `i < j`.
    RotatedOnb { dim: usize },
    /// Weighted coordinate frames on ℓ^p with `splits` functionals per
    /// coordinate. With `tied` both frames share one weight table.
    WeightedCoordinate {
        p: f64,
        dim: usize,
        splits: usize,
        tied: bool,
    },
}

impl Family {
    pub fn parameter_count(&self) -> usize {
        match self {
            Family::RotatedOnb { dim } => dim * dim.saturating_sub(1) / 2,
            Family::WeightedCoordinate {
                dim, splits, tied, ..
            } => dim * splits * if *tied { 1 } else { 2 },
        }
    }

    fn validate(&self) -> Result<()> {
        match self {
            Family::RotatedOnb { dim } if *dim < 1 => {
                Err(Error::InvalidConfig("dim must be at least 1".into()))
            }
            Family::WeightedCoordinate { p, dim, splits, .. } => {
                crate::frames::check_frame_exponent(*p)?;
                if *dim < 1 || *splits < 1 {
                    return Err(Error::InvalidConfig(
                        "dim and splits must be at least 1".into(),
                    ));
                }
                Ok(())
            }
            _ => Ok(()),
        }
    }

    fn space(&self) -> Result<NormedSpace> {
        match self {
            Family::RotatedOnb { dim } => NormedSpace::lq(*dim, Field::Real, 2.0),
            Family::WeightedCoordinate { p, dim, .. } => NormedSpace::lq(*dim, Field::Real, *p),
        }
    }
}

/// A family member: angles in `[0, 2π)` or weight tables (frame `f` first,
/// then `g` unless tied), coordinate-major.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FamilyParams {
    pub family: Family,
    pub parameters: Vec<f64>,
}

impl FamilyParams {
    pub fn new(family: Family, parameters: Vec<f64>) -> Result<Self> {
        let params = Self { family, parameters };
        params.validate()?;
        Ok(params)
    }

    /// Zero angles, or uniform weights.
    pub fn initial(family: Family) -> Result<Self> {
        family.validate()?;
        let parameters = match &family {
            Family::RotatedOnb { .. } => vec![0.0; family.parameter_count()],
            Family::WeightedCoordinate { splits, .. } => {
                vec![1.0 / *splits as f64; family.parameter_count()]
            }
        };
        Self::new(family, parameters)
    }

    pub fn validate(&self) -> Result<()> {
        self.family.validate()?;
        if self.parameters.len() != self.family.parameter_count() {
            return Err(Error::DimensionMismatch {
                expected: self.family.parameter_count(),
                found: self.parameters.len(),
            });
        }
        match &self.family {
            Family::RotatedOnb { .. } => {
                if self.parameters.iter().any(|a| !(0.0..TAU).contains(a)) {
                    return Err(Error::InvalidConfig("angles must lie in [0, 2pi)".into()));
                }
            }
            Family::WeightedCoordinate { splits, .. } => {
                for group in self.parameters.chunks(*splits) {
                    if group.iter().any(|w| !(w.is_finite() && *w > 0.0)) {
                        return Err(Error::InvalidConfig("weights must be positive".into()));
                    }
                    let total: f64 = group.iter().sum();
                    if (total - 1.0).abs() > 1e-9 {
                        return Err(Error::InvalidConfig(format!(
                            "coordinate weights sum to {total}, not 1"
                        )));
                    }
                }
            }
        }
        Ok(())
    }

    pub fn frames(&self) -> Result<(AnalysisFrame, AnalysisFrame)> {
        self.validate()?;
        match &self.family {
            Family::RotatedOnb { dim } => {
                let f = generate_frame(
                    &FrameKind::Coordinate {
                        p: 2.0,
                        dim: *dim,
                        weights: None,
                    },
                    0,
                )?;
                let rotation = givens_product(*dim, &self.parameters);
                let rows = rotation
                    .into_iter()
                    .map(|r| Functional::from_real(&r))
                    .collect();
                let g = AnalysisFrame::new(self.family.space()?, 2.0, rows)?;
                Ok((f, g))
            }
            Family::WeightedCoordinate {
                p,
                dim,
                splits,
                tied,
            } => {
                let table = |chunk: &[f64]| -> Vec<Vec<f64>> {
                    chunk.chunks(*splits).map(|c| c.to_vec()).collect()
                };
                let per_frame = dim * splits;
                let wf = table(&self.parameters[..per_frame]);
                let wg = if *tied {
                    wf.clone()
                } else {
                    table(&self.parameters[per_frame..])
                };
                let f = generate_frame(
                    &FrameKind::Coordinate {
                        p: *p,
                        dim: *dim,
                        weights: Some(wf),
                    },
                    0,
                )?;
                let g = generate_frame(
                    &FrameKind::Coordinate {
                        p: *p,
                        dim: *dim,
                        weights: Some(wg),
                    },
                    0,
                )?;
                Ok((f, g))
            }
        }
    }

    /// Maps unconstrained search coordinates (raw angles, or per-coordinate
    /// logits) to a valid member.
    fn decode(family: &Family, raw: &[f64]) -> FamilyParams {
        let parameters = match family {
            Family::RotatedOnb { .. } => raw
                .iter()
                .map(|a| a.rem_euclid(TAU))
                .map(|a| if a >= TAU { 0.0 } else { a })
                .collect(),
            Family::WeightedCoordinate { splits, .. } => raw
                .chunks(*splits)
                .flat_map(|logits| {
                    let peak = logits.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
                    let e: Vec<f64> = logits.iter().map(|l| (l - peak).exp()).collect();
                    let total: f64 = e.iter().sum();
                    e.into_iter().map(move |v| v / total)
                })
                .collect(),
        };
        FamilyParams {
            family: family.clone(),
            parameters,
        }
    }

    fn encode(&self) -> Vec<f64> {
        match self.family {
            Family::RotatedOnb { .. } => self.parameters.clone(),
            Family::WeightedCoordinate { .. } => self.parameters.iter().map(|w| w.ln()).collect(),
        }
    }
}

/// Rows of `G_{(0,1)}(θ_0) G_{(0,2)}(θ_1) ⋯` with one Givens rotation per pair.
fn givens_product(dim: usize, angles: &[f64]) -> Vec<Vec<f64>> {
    let mut m: Vec<Vec<f64>> = (0..dim)
        .map(|i| (0..dim).map(|j| if i == j { 1.0 } else { 0.0 }).collect())
        .collect();
    let mut k = 0;
    for i in 0..dim {
        for j in (i + 1)..dim {
            let (s, c) = angles[k].sin_cos();
            k += 1;
            for row in m.iter_mut() {
                let (a, b) = (row[i], row[j]);
                row[i] = c * a + s * b;
                row[j] = c * b - s * a;
            }
        }
    }
    // columns of m are the rotated basis; return them as rows
    (0..dim)
        .map(|j| (0..dim).map(|i| m[i][j]).collect())
        .collect()
}

/// `S_f(x) + S_g(x) + p log m(x̂)`; zero exactly where the pointwise chain is tight.
pub fn equality_gap(f: &AnalysisFrame, g: &AnalysisFrame, x: &Vector) -> Result<f64> {
    joint_space(f, g)?;
    let sf = entropy::shannon(&frame_distribution(f, x)?);
    let sg = entropy::shannon(&frame_distribution(g, x)?);
    let m = certify::pointwise_max_product(f, g, x)?;
    Ok(sf + sg + f.p() * m.ln())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GapRecord {
    pub label: String,
    pub params: FamilyParams,
    pub x: Vector,
    pub gap: f64,
    pub certificate: Certificate,
}

/// `(α, R_{f,α}(x) + R_{g,α}(x))` for each order.
pub fn renyi_sweep(
    f: &AnalysisFrame,
    g: &AnalysisFrame,
    x: &Vector,
    alphas: &[f64],
) -> Result<Vec<(f64, f64)>> {
    joint_space(f, g)?;
    let cf = frame_distribution(f, x)?;
    let cg = frame_distribution(g, x)?;
    alphas
        .iter()
        .map(|&a| Ok((a, entropy::renyi(&cf, a)? + entropy::renyi(&cg, a)?)))
        .collect()
}

struct StartResult {
    raw: Vec<f64>,
    x: Vec<f64>,
    gap: f64,
}

fn gap_at(family: &Family, raw: &[f64], x: &[f64]) -> f64 {
    let params = FamilyParams::decode(family, raw);
    let Ok((f, g)) = params.frames() else {
        return f64::INFINITY;
    };
    equality_gap(&f, &g, &Vector::from_real(x)).unwrap_or(f64::INFINITY)
}

fn normalized(space: &NormedSpace, x: &[f64]) -> Option<Vec<f64>> {
    let coords: Vec<Scalar> = x.iter().map(|&v| Scalar::new(v, 0.0)).collect();
    let n = space.norm_of(&coords);
    (n > 0.0 && n.is_finite()).then(|| x.iter().map(|v| v / n).collect())
}

/// Compass search alternating between the point block and the parameter
/// block, halving the step whenever a full sweep makes no progress.
fn descend(
    family: &Family,
    space: &NormedSpace,
    mut raw: Vec<f64>,
    mut x: Vec<f64>,
    cfg: &OptimizerConfig,
) -> StartResult {
    let mut gap = gap_at(family, &raw, &x);
    let mut step = cfg.step_init;
    let floor = cfg.tol.max(1e-9);
    for _ in 0..cfg.max_iters {
        let mut improved = false;
        for i in 0..x.len() {
            for sign in [1.0, -1.0] {
                let mut trial = x.clone();
                trial[i] += sign * step;
                let Some(trial) = normalized(space, &trial) else {
                    continue;
                };
                let v = gap_at(family, &raw, &trial);
                if v < gap {
                    gap = v;
                    x = trial;
                    improved = true;
                    break;
                }
            }
        }
        for i in 0..raw.len() {
            for sign in [1.0, -1.0] {
                let mut trial = raw.clone();
                trial[i] += sign * step;
                let v = gap_at(family, &trial, &x);
                if v < gap {
                    gap = v;
                    raw = trial;
                    improved = true;
                    break;
                }
            }
        }
        if !improved {
            step *= 0.5;
            if step < floor {
                break;
            }
        }
    }
    StartResult { raw, x, gap }
}

/// Runs one descent per start and returns every result ranked by gap
/// (ascending, ties by start index). Start 0 is `initial` at the uniform
/// point; the remaining `cfg.starts` are seeded random members and points.
pub fn search_candidates(
    initial: &FamilyParams,
    cfg: &OptimizerConfig,
    checks: &CheckConfig,
) -> Result<Vec<GapRecord>> {
    cfg.validate()?;
    initial.validate()?;
    let family = initial.family.clone();
    let space = family.space()?;
    let dim = space.dim();
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut starts = vec![(
        initial.encode(),
        normalized(&space, &vec![1.0; dim]).expect("nonzero"),
    )];
    for _ in 0..cfg.starts {
        let raw: Vec<f64> = (0..family.parameter_count())
            .map(|_| match family {
                Family::RotatedOnb { .. } => rng.gen_range(0.0..TAU),
                Family::WeightedCoordinate { .. } => rng.sample(StandardNormal),
            })
            .collect();
        let x = loop {
            let draw: Vec<f64> = (0..dim).map(|_| rng.sample(StandardNormal)).collect();
            if let Some(x) = normalized(&space, &draw) {
                break x;
            }
        };
        starts.push((raw, x));
    }
    let results = exec::map_indexed(cfg.execution, &starts, |_, (raw, x)| {
        descend(&family, &space, raw.clone(), x.clone(), cfg)
    });

    let mut order: Vec<usize> = (0..results.len()).collect();
    order.sort_by(|&a, &b| results[a].gap.total_cmp(&results[b].gap).then(a.cmp(&b)));
    order
        .into_iter()
        .map(|i| {
            let r = &results[i];
            let params = FamilyParams::decode(&family, &r.raw);
            let (f, g) = params.frames()?;
            let x = Vector::from_real(&r.x);
            let certificate = certify::certify_point(&f, &g, &x, cfg, checks)?;
            Ok(GapRecord {
                label: CANDIDATE_LABEL.to_string(),
                params,
                x,
                gap: r.gap,
                certificate,
            })
        })
        .collect()
}

/// The lowest-gap record found by [`search_candidates`].
pub fn minimize_gap(initial: &FamilyParams, cfg: &OptimizerConfig) -> Result<GapRecord> {
    let mut records = search_candidates(initial, cfg, &CheckConfig::default())?;
    Ok(records.swap_remove(0))
}

/// One JSON object per line.
pub fn write_jsonl<W: std::io::Write>(records: &[GapRecord], mut out: W) -> Result<()> {
    for r in records {
        serde_json::to_writer(&mut out, r)?;
        out.write_all(b"\n")?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::{FRAC_1_SQRT_2, PI};

    fn coordinate(dim: usize) -> AnalysisFrame {
        generate_frame(
            &FrameKind::Coordinate {
                p: 2.0,
                dim,
                weights: None,
            },
            0,
        )
        .unwrap()
    }

    fn quick() -> OptimizerConfig {
        OptimizerConfig {
            starts: 6,
            max_iters: 200,
            seed: 11,
            ..OptimizerConfig::default()
        }
    }

    #[test]
    fn gap_examples() {
        let f = coordinate(2);
        let h = FRAC_1_SQRT_2;
        assert_abs_diff_eq!(
            equality_gap(&f, &f, &Vector::from_real(&[h, h])).unwrap(),
            0.0,
            epsilon = 1e-15
        );

        // 2·H(0.9, 0.1) + 2·log 0.9
        let h91 = -(0.9f64 * 0.9f64.ln() + 0.1f64 * 0.1f64.ln());
        let expected = 2.0 * h91 + 2.0 * 0.9f64.ln();
        assert_abs_diff_eq!(expected, 0.43944, epsilon = 1e-5);
        let x = Vector::from_real(&[0.9f64.sqrt(), 0.1f64.sqrt()]);
        assert_abs_diff_eq!(equality_gap(&f, &f, &x).unwrap(), expected, epsilon = 1e-12);

        let fourier = generate_frame(&FrameKind::Fourier { n: 2 }, 0).unwrap();
        let x = Vector::from_real(&[(PI / 8.0).cos(), (PI / 8.0).sin()]);
        let c = (PI / 8.0).cos().powi(2);
        let expected = -2.0 * (c * c.ln() + (1.0 - c) * (1.0 - c).ln()) + 2.0 * c.ln();
        assert_abs_diff_eq!(
            equality_gap(&f, &fourier, &x).unwrap(),
            expected,
            epsilon = 1e-12
        );
        assert_abs_diff_eq!(expected, 0.51641, epsilon = 2e-4);
    }

    #[test]
    fn givens_rows_are_orthonormal() {
        let rows = givens_product(4, &[0.3, 1.1, -0.4, 2.0, 0.7, 5.9]);
        let complex: Vec<Vec<Scalar>> = rows
            .iter()
            .map(|r| r.iter().map(|&v| Scalar::new(v, 0.0)).collect())
            .collect();
        assert!(crate::frames::unitary_defect(&complex) < 1e-14);
        let two = givens_product(2, &[0.5]);
        assert_abs_diff_eq!(two[0][0], 0.5f64.cos(), epsilon = 1e-15);
        assert_abs_diff_eq!(two[0][1], 0.5f64.sin(), epsilon = 1e-15);
    }

    #[test]
    fn family_validation() {
        let fam = Family::WeightedCoordinate {
            p: 2.0,
            dim: 2,
            splits: 2,
            tied: true,
        };
        assert!(FamilyParams::new(fam.clone(), vec![0.5, 0.5, 0.2, 0.8]).is_ok());
        assert!(FamilyParams::new(fam.clone(), vec![0.5, 0.6, 0.2, 0.8]).is_err());
        assert!(FamilyParams::new(fam, vec![0.5, 0.5]).is_err());
        assert!(FamilyParams::new(Family::RotatedOnb { dim: 2 }, vec![7.0]).is_err());
        assert!(FamilyParams::new(Family::RotatedOnb { dim: 2 }, vec![-0.1]).is_err());
    }

    #[test]
    fn decode_produces_valid_members() {
        let fam = Family::WeightedCoordinate {
            p: 1.5,
            dim: 3,
            splits: 3,
            tied: false,
        };
        let raw: Vec<f64> = (0..18).map(|i| (i as f64 * 0.37).sin() * 3.0).collect();
        assert!(FamilyParams::decode(&fam, &raw).validate().is_ok());
        let rot = FamilyParams::decode(&Family::RotatedOnb { dim: 3 }, &[-1.0, 7.0, 13.0]);
        assert!(rot.validate().is_ok());
    }

    #[test]
    fn tied_uniform_weights_are_tight() {
        let fam = Family::WeightedCoordinate {
            p: 2.0,
            dim: 2,
            splits: 2,
            tied: true,
        };
        let record = minimize_gap(&FamilyParams::initial(fam).unwrap(), &quick()).unwrap();
        assert!(record.gap.abs() <= 1e-9);
        assert!(record.gap >= -1e-9);
        assert_eq!(record.label, CANDIDATE_LABEL);
    }

    #[test]
    fn rotated_onb_matches_grid_oracle() {
        // independent oracle: closed-form gap for the standard basis against
        // the basis rotated by θ, at x = (cos φ, sin φ)
        let h = |a: f64| -> f64 {
            [a, 1.0 - a]
                .iter()
                .filter(|c| **c > 0.0)
                .map(|c| -c * c.ln())
                .sum()
        };
        let gap = |theta: f64, phi: f64| {
            let (c1, c2) = (phi.cos().powi(2), (phi - theta).cos().powi(2));
            let m = phi.cos().abs().max(phi.sin().abs())
                * (phi - theta).cos().abs().max((phi - theta).sin().abs());
            h(c1) + h(c2) + 2.0 * m.ln()
        };
        let steps = 400;
        let mut grid_min = f64::INFINITY;
        for a in 0..steps {
            for b in 0..steps {
                let theta = TAU * a as f64 / steps as f64;
                let phi = TAU * b as f64 / steps as f64;
                grid_min = grid_min.min(gap(theta, phi));
            }
        }
        assert!(grid_min >= -1e-12);
        let start = FamilyParams::new(Family::RotatedOnb { dim: 2 }, vec![1.0]).unwrap();
        let record = minimize_gap(&start, &quick()).unwrap();
        assert!(record.gap >= -1e-9);
        assert!(
            record.gap <= grid_min + 1e-6,
            "search {} vs grid {}",
            record.gap,
            grid_min
        );
        // the record's own frames reproduce the oracle value
        let theta = record.params.parameters[0];
        let x = record.x.coords();
        let phi = x[1].re.atan2(x[0].re);
        assert_abs_diff_eq!(gap(theta, phi), record.gap, epsilon = 1e-12);
    }

    #[test]
    fn search_is_reproducible() {
        let fam = Family::WeightedCoordinate {
            p: 3.0,
            dim: 2,
            splits: 2,
            tied: false,
        };
        let init = FamilyParams::initial(fam).unwrap();
        let a = search_candidates(&init, &quick(), &CheckConfig::default()).unwrap();
        let b = search_candidates(&init, &quick(), &CheckConfig::default()).unwrap();
        assert_eq!(a, b);
        assert!(a.windows(2).all(|w| w[0].gap <= w[1].gap));
        assert!(a.iter().all(|r| r.gap >= -1e-9));
    }

    #[test]
    fn sweep_examples() {
        let f = coordinate(3);
        let uniform = Vector::from_real(&[1.0, 1.0, 1.0]);
        for (_, v) in renyi_sweep(&f, &f, &uniform, &[0.3, 0.5, 2.0, 5.0]).unwrap() {
            assert_abs_diff_eq!(v, 2.0 * 3f64.ln(), epsilon = 1e-12);
        }
        let fourier = generate_frame(&FrameKind::Fourier { n: 3 }, 0).unwrap();
        let x = Vector::from_real(&[0.2, -0.5, 0.9]);
        let shannon = equality_gap(&f, &fourier, &x).unwrap()
            - 2.0
                * certify::pointwise_max_product(&f, &fourier, &x)
                    .unwrap()
                    .ln();
        for (_, v) in renyi_sweep(&f, &fourier, &x, &[0.999, 1.001]).unwrap() {
            assert!((v - shannon).abs() <= 1e-2);
        }
        assert!(matches!(
            renyi_sweep(&f, &f, &x, &[1.0]),
            Err(Error::InvalidAlpha(_))
        ));
    }

    #[test]
    fn jsonl_has_one_record_per_line() {
        let fam = Family::RotatedOnb { dim: 2 };
        let records = search_candidates(
            &FamilyParams::initial(fam).unwrap(),
            &OptimizerConfig {
                starts: 2,
                max_iters: 20,
                ..quick()
            },
            &CheckConfig::default(),
        )
        .unwrap();
        let mut buf = Vec::new();
        write_jsonl(&records, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().count(), records.len());
        for line in text.lines() {
            let back: GapRecord = serde_json::from_str(line).unwrap();
            assert_eq!(back.label, CANDIDATE_LABEL);
        }
    }
}
