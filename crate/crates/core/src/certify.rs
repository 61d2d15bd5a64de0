//! Certificates for the entropic uncertainty chain of two Parseval p-frames
//!
//! ```text
//! log(nm) ≥ S_f(x) + S_g(x) ≥ −p log m(x̂) ≥ −p log c,   m(z) ≥ (nm)^{-1/p},
//! ```
//!
//! where `m(z) = max_{j,k} |f_j(z) g_k(z)|` and `c = sup_{‖z‖=1} m(z)`. The
//! pointwise bound is exact; `c` is estimated by ascent and is therefore only
//! a lower bound on the true supremum (attained at the reported witness).

use serde::{Deserialize, Serialize};

use crate::coherence::{AscentSettings, CoherenceProblem};
use crate::entropy::{coefficient_distribution, shannon};
use crate::error::{Error, Result};
use crate::exec::{self, Execution};
use crate::frames::{self, AnalysisFrame, DEFAULT_EPS_SUPP};
use crate::spaces::{self, complex_list, dot, NormedSpace, Scalar, Vector};

/// Settings for the multi-start sphere ascent.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OptimizerConfig {
    pub starts: usize,
    pub max_iters: usize,
    pub step_init: f64,
    pub smoothing_beta: f64,
    pub tol: f64,
    pub seed: u64,
    /// Not part of reports: results do not depend on it.
    #[serde(skip)]
    pub execution: Execution,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        Self {
            starts: 32,
            max_iters: 500,
            step_init: 0.1,
            smoothing_beta: 200.0,
            tol: 1e-10,
            seed: 0,
            execution: Execution::default(),
        }
    }
}

impl OptimizerConfig {
    pub fn with_seed(seed: u64) -> Self {
        Self {
            seed,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let positive = |v: f64| v.is_finite() && v > 0.0;
        if self.starts == 0 || self.max_iters == 0 {
            return Err(Error::InvalidConfig(
                "starts and max_iters must be positive".into(),
            ));
        }
        if !(positive(self.step_init) && positive(self.smoothing_beta) && positive(self.tol)) {
            return Err(Error::InvalidConfig(
                "step_init, smoothing_beta and tol must be positive".into(),
            ));
        }
        Ok(())
    }

    pub(crate) fn settings(&self) -> AscentSettings {
        AscentSettings {
            starts: self.starts,
            max_iters: self.max_iters,
            step_init: self.step_init,
            beta: self.smoothing_beta,
            tol: self.tol,
            seed: self.seed,
            execution: self.execution,
        }
    }
}

/// Tolerances for the theorem checks.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CheckConfig {
    /// Additive slack on every inequality.
    pub tol: f64,
    /// Coefficients at or below this count as vanishing in the support test.
    pub eps_supp: f64,
}

impl Default for CheckConfig {
    fn default() -> Self {
        Self {
            tol: 1e-9,
            eps_supp: DEFAULT_EPS_SUPP,
        }
    }
}

/// Which chain a certificate belongs to.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Side {
    /// Frames of functionals, evaluated at vectors.
    Primal,
    /// Frames of vectors, evaluated at functionals.
    Dual,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Passes {
    pub upper_ok: bool,
    pub point_ok: bool,
    pub global_ok: bool,
    pub floor_ok: bool,
}

impl Passes {
    pub fn all(&self) -> bool {
        self.upper_ok && self.point_ok && self.global_ok && self.floor_ok
    }

    pub(crate) fn failed(&self) -> Vec<String> {
        [
            ("upper_ok", self.upper_ok),
            ("point_ok", self.point_ok),
            ("global_ok", self.global_ok),
            ("floor_ok", self.floor_ok),
        ]
        .into_iter()
        .filter(|(_, ok)| !ok)
        .map(|(name, _)| name.to_string())
        .collect()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Certificate {
    pub side: Side,
    pub n: usize,
    pub m: usize,
    pub p: f64,
    pub entropy_f: f64,
    pub entropy_g: f64,
    /// `S_f(x) + S_g(x)`.
    pub lhs: f64,
    /// `log(nm)`.
    pub upper: f64,
    /// `max_{j,k} |f_j(x̂) g_k(x̂)|`.
    pub m_point: f64,
    /// `−p log m_point`.
    pub rhs_point: f64,
    /// Best value of `m` found on the sphere; never below `m_point`.
    pub c_hat: f64,
    /// `−p log c_hat`.
    pub rhs_global: f64,
    /// `(nm)^{-1/p}`.
    pub floor: f64,
    /// Evaluation point lies in the joint support set.
    pub in_support: bool,
    #[serde(with = "complex_list")]
    pub witness: Vec<Scalar>,
    pub witness_in_support: bool,
    pub passes: Passes,
    pub tolerance: f64,
}

/// Result of [`estimate_sup_c`].
#[derive(Clone, Debug, PartialEq)]
pub struct SupEstimate {
    pub c_hat: f64,
    pub witness: Vector,
}

/// Both frames must share dimension, norm and exponent; returns the space in
/// the larger of the two scalar fields.
pub fn joint_space(f: &AnalysisFrame, g: &AnalysisFrame) -> Result<NormedSpace> {
    if !f.space().same_geometry(g.space()) {
        return Err(Error::MismatchedFrames(
            "frames live on different spaces".into(),
        ));
    }
    if f.p() != g.p() {
        return Err(Error::MismatchedFrames(format!(
            "frame exponents differ: {} vs {}",
            f.p(),
            g.p()
        )));
    }
    Ok(f.space()
        .with_field(f.space().field().join(g.space().field())))
}

fn problem<'a>(f: &'a AnalysisFrame, g: &'a AnalysisFrame) -> Result<CoherenceProblem<'a>> {
    Ok(CoherenceProblem {
        sphere: joint_space(f, g)?,
        left: f.rows(),
        right: g.rows(),
    })
}

/// `max_{j,k} |f_j(ẑ) g_k(ẑ)|` at `ẑ = z/‖z‖`.
pub fn pointwise_max_product(f: &AnalysisFrame, g: &AnalysisFrame, z: &Vector) -> Result<f64> {
    let problem = problem(f, g)?;
    let unit = spaces::normalize(&problem.sphere, z)?;
    Ok(problem.exact(unit.coords()))
}

pub fn estimate_sup_c(
    f: &AnalysisFrame,
    g: &AnalysisFrame,
    cfg: &OptimizerConfig,
) -> Result<SupEstimate> {
    estimate_with_extra_starts(f, g, cfg, &[])
}

fn estimate_with_extra_starts(
    f: &AnalysisFrame,
    g: &AnalysisFrame,
    cfg: &OptimizerConfig,
    extra: &[Vec<Scalar>],
) -> Result<SupEstimate> {
    cfg.validate()?;
    let best = problem(f, g)?.estimate(&cfg.settings(), extra);
    Ok(SupEstimate {
        c_hat: best.value,
        witness: Vector::new(best.point),
    })
}

/// Inputs shared by the primal and dual certificate builders.
pub(crate) struct ChainInputs<'a> {
    pub side: Side,
    pub problem: CoherenceProblem<'a>,
    pub p: f64,
}

impl ChainInputs<'_> {
    fn in_support(&self, unit: &[Scalar], eps: f64) -> bool {
        self.problem
            .left
            .iter()
            .chain(&self.problem.right)
            .all(|a| dot(a, unit).norm() > eps)
    }

    /// Certificate at a unit point given a precomputed sup estimate; the point
    /// itself is folded into the estimate so `c_hat ≥ m_point` always holds.
    pub fn certificate(
        &self,
        unit: &[Scalar],
        estimate: (f64, &[Scalar]),
        checks: &CheckConfig,
    ) -> Certificate {
        let (n, m) = (self.problem.left.len(), self.problem.right.len());
        let tol = checks.tol;
        let entropy_f = shannon(&coefficient_distribution(&self.problem.left, unit, self.p));
        let entropy_g = shannon(&coefficient_distribution(&self.problem.right, unit, self.p));
        let lhs = entropy_f + entropy_g;
        let upper = ((n * m) as f64).ln();
        let m_point = self.problem.exact(unit);
        let rhs_point = -self.p * m_point.ln();
        let (c_hat, witness) = if m_point > estimate.0 {
            (m_point, unit)
        } else {
            estimate
        };
        let rhs_global = -self.p * c_hat.ln();
        let floor = ((n * m) as f64).powf(-1.0 / self.p);
        let passes = Passes {
            upper_ok: lhs <= upper + tol,
            point_ok: lhs >= rhs_point - tol,
            global_ok: lhs >= rhs_global - tol,
            floor_ok: m_point >= floor - tol,
        };
        Certificate {
            side: self.side,
            n,
            m,
            p: self.p,
            entropy_f,
            entropy_g,
            lhs,
            upper,
            m_point,
            rhs_point,
            c_hat,
            rhs_global,
            floor,
            in_support: self.in_support(unit, checks.eps_supp),
            witness: witness.to_vec(),
            witness_in_support: self.in_support(witness, checks.eps_supp),
            passes,
            tolerance: tol,
        }
    }
}

/// Full certificate at `x`; the ascent includes `x̂` among its starts.
pub fn certify_point(
    f: &AnalysisFrame,
    g: &AnalysisFrame,
    x: &Vector,
    cfg: &OptimizerConfig,
    checks: &CheckConfig,
) -> Result<Certificate> {
    let inputs = ChainInputs {
        side: Side::Primal,
        problem: problem(f, g)?,
        p: f.p(),
    };
    let unit = spaces::normalize(&inputs.problem.sphere, x)?;
    let est = estimate_with_extra_starts(f, g, cfg, &[unit.coords().to_vec()])?;
    Ok(inputs.certificate(unit.coords(), (est.c_hat, est.witness.coords()), checks))
}

/// Certificate at `x` reusing a sup estimate computed once for the pair.
pub fn certify_with_estimate(
    f: &AnalysisFrame,
    g: &AnalysisFrame,
    x: &Vector,
    estimate: &SupEstimate,
    checks: &CheckConfig,
) -> Result<Certificate> {
    let inputs = ChainInputs {
        side: Side::Primal,
        problem: problem(f, g)?,
        p: f.p(),
    };
    let unit = spaces::normalize(&inputs.problem.sphere, x)?;
    Ok(inputs.certificate(
        unit.coords(),
        (estimate.c_hat, estimate.witness.coords()),
        checks,
    ))
}

/// Basis vectors `τ_j` of a frame built from an orthonormal basis of ℓ².
fn basis_vectors(frame: &AnalysisFrame) -> Result<Vec<Vec<Scalar>>> {
    if !frame.space().is_hilbert() {
        return Err(Error::InvalidConfig(
            "Buzano bound needs an unweighted l2 space".into(),
        ));
    }
    if frame.p() != 2.0 {
        return Err(Error::InvalidConfig(format!(
            "Buzano bound needs p = 2, got {}",
            frame.p()
        )));
    }
    let rows: Vec<Vec<Scalar>> = frame
        .functionals()
        .iter()
        .map(|f| f.coords().iter().map(|c| c.conj()).collect())
        .collect();
    frames::check_orthonormal(&rows)?;
    Ok(rows)
}

/// `μ = max_{j,k} |⟨τ_j, ω_k⟩|` for two orthonormal-basis frames.
pub fn mutual_coherence(tau: &AnalysisFrame, omega: &AnalysisFrame) -> Result<f64> {
    joint_space(tau, omega)?;
    let a = basis_vectors(tau)?;
    let b = basis_vectors(omega)?;
    let mut mu: f64 = 0.0;
    for t in &a {
        for w in &b {
            let ip: Scalar = t.iter().zip(w).map(|(x, y)| x * y.conj()).sum();
            mu = mu.max(ip.norm());
        }
    }
    Ok(mu)
}

/// `(1 + μ) / 2`, an upper bound on the sup-coherence of two orthonormal bases.
pub fn buzano_overlap_bound(tau: &AnalysisFrame, omega: &AnalysisFrame) -> Result<f64> {
    Ok((1.0 + mutual_coherence(tau, omega)?) / 2.0)
}

/// One line of a scan, also the CSV record layout.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScanRow {
    pub sample_index: usize,
    pub lhs: f64,
    pub m_point: f64,
    pub rhs_point: f64,
    pub upper_ok: bool,
    pub point_ok: bool,
    pub global_ok: bool,
    pub floor_ok: bool,
    pub in_support: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Violation {
    pub sample_index: usize,
    pub failed: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScanReport {
    pub side: Side,
    pub samples: usize,
    pub seed: u64,
    pub c_hat: f64,
    #[serde(with = "complex_list")]
    pub witness: Vec<Scalar>,
    /// `min nm · m(z)^p` over the samples; at least one for Parseval pairs.
    pub min_floor_ratio: f64,
    pub rows: Vec<ScanRow>,
    pub violations: Vec<Violation>,
}

impl ScanReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }

    /// CSV with one row per sample.
    pub fn write_csv<W: std::io::Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        for row in &self.rows {
            w.serialize(row)?;
        }
        w.flush()?;
        Ok(())
    }
}

pub(crate) fn scan(
    inputs: &ChainInputs<'_>,
    samples: &[Vec<Scalar>],
    estimate: (f64, &[Scalar]),
    seed: u64,
    checks: &CheckConfig,
    execution: Execution,
) -> ScanReport {
    let certs = exec::map_indexed(execution, samples, |_, s| {
        inputs.certificate(s, estimate, checks)
    });
    let nm = (inputs.problem.left.len() * inputs.problem.right.len()) as f64;
    let mut rows = Vec::with_capacity(certs.len());
    let mut violations = Vec::new();
    let mut min_floor_ratio = f64::INFINITY;
    let mut best = estimate;
    for (i, c) in certs.iter().enumerate() {
        min_floor_ratio = min_floor_ratio.min(nm * c.m_point.powf(inputs.p));
        if c.m_point > best.0 {
            best = (c.m_point, &samples[i]);
        }
        if !c.passes.all() {
            violations.push(Violation {
                sample_index: i,
                failed: c.passes.failed(),
            });
        }
        rows.push(ScanRow {
            sample_index: i,
            lhs: c.lhs,
            m_point: c.m_point,
            rhs_point: c.rhs_point,
            upper_ok: c.passes.upper_ok,
            point_ok: c.passes.point_ok,
            global_ok: c.passes.global_ok,
            floor_ok: c.passes.floor_ok,
            in_support: c.in_support,
        });
    }
    ScanReport {
        side: inputs.side,
        samples: samples.len(),
        seed,
        c_hat: best.0,
        witness: best.1.to_vec(),
        min_floor_ratio,
        rows,
        violations,
    }
}

/// Certifies `sample_count` random unit points (drawn with `seed`) against a
/// single sup estimate computed with `cfg`, and lists every point with a
/// failing flag.
pub fn counterexample_scan(
    f: &AnalysisFrame,
    g: &AnalysisFrame,
    sample_count: usize,
    seed: u64,
    checks: &CheckConfig,
    cfg: &OptimizerConfig,
) -> Result<ScanReport> {
    let inputs = ChainInputs {
        side: Side::Primal,
        problem: problem(f, g)?,
        p: f.p(),
    };
    let samples = spaces::sample_unit_sphere(&inputs.problem.sphere, sample_count, seed)?;
    let coords: Vec<Vec<Scalar>> = samples.into_iter().map(Vector::into_coords).collect();
    let est = estimate_sup_c(f, g, cfg)?;
    Ok(scan(
        &inputs,
        &coords,
        (est.c_hat, est.witness.coords()),
        seed,
        checks,
        cfg.execution,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frames::{generate_frame, FrameKind};
    use approx::assert_abs_diff_eq;
    use std::f64::consts::{FRAC_1_SQRT_2, PI};

    fn coordinate(p: f64, dim: usize) -> AnalysisFrame {
        generate_frame(
            &FrameKind::Coordinate {
                p,
                dim,
                weights: None,
            },
            0,
        )
        .unwrap()
    }

    fn fourier(n: usize) -> AnalysisFrame {
        generate_frame(&FrameKind::Fourier { n }, 0).unwrap()
    }

    fn eighth() -> Vector {
        Vector::from_real(&[(PI / 8.0).cos(), (PI / 8.0).sin()])
    }

    #[test]
    fn pointwise_examples() {
        let f = coordinate(2.0, 2);
        let h = FRAC_1_SQRT_2;
        assert_abs_diff_eq!(
            pointwise_max_product(&f, &f, &Vector::from_real(&[h, h])).unwrap(),
            0.5,
            epsilon = 1e-15
        );
        assert_abs_diff_eq!(
            pointwise_max_product(&f, &f, &Vector::from_real(&[1.0, 0.0])).unwrap(),
            1.0,
            epsilon = 1e-15
        );
        let c2 = (PI / 8.0).cos().powi(2);
        assert_abs_diff_eq!(c2, 0.853553, epsilon = 1e-6);
        assert_abs_diff_eq!(
            pointwise_max_product(&f, &fourier(2), &eighth()).unwrap(),
            c2,
            epsilon = 1e-14
        );
    }

    #[test]
    fn mismatched_pairs_are_rejected() {
        let a = coordinate(2.0, 2);
        let b = coordinate(3.0, 2);
        assert!(matches!(
            pointwise_max_product(&a, &b, &eighth()),
            Err(Error::MismatchedFrames(_))
        ));
        let c = coordinate(2.0, 3);
        assert!(matches!(
            estimate_sup_c(&a, &c, &OptimizerConfig::default()),
            Err(Error::MismatchedFrames(_))
        ));
        assert!(matches!(
            certify_point(
                &a,
                &a,
                &Vector::from_real(&[0.0, 0.0]),
                &OptimizerConfig::default(),
                &CheckConfig::default()
            ),
            Err(Error::ZeroVector)
        ));
    }

    #[test]
    fn sup_examples() {
        let f = coordinate(2.0, 2);
        let est = estimate_sup_c(&f, &f, &OptimizerConfig::default()).unwrap();
        assert_abs_diff_eq!(est.c_hat, 1.0, epsilon = 1e-9);
        let w = est.witness.coords();
        assert!(w[0].norm().min(w[1].norm()) < 1e-4);

        let est = estimate_sup_c(&f, &fourier(2), &OptimizerConfig::default()).unwrap();
        assert_abs_diff_eq!(est.c_hat, (1.0 + FRAC_1_SQRT_2) / 2.0, epsilon = 1e-6);
    }

    #[test]
    fn eighth_turn_certificate() {
        let cert = certify_point(
            &coordinate(2.0, 2),
            &fourier(2),
            &eighth(),
            &OptimizerConfig::default(),
            &CheckConfig::default(),
        )
        .unwrap();
        // S_std = H(cos²π/8, sin²π/8); S_fourier is the same entropy since
        // |⟨x, ω_k⟩|² = (1 ± sin π/4)/2 = (cos²π/8, sin²π/8)
        let c1 = (2.0 + 2f64.sqrt()) / 4.0;
        let h = -(c1 * c1.ln() + (1.0 - c1) * (1.0 - c1).ln());
        assert_abs_diff_eq!(cert.lhs, 2.0 * h, epsilon = 1e-12);
        assert_abs_diff_eq!(cert.lhs, 0.83310, epsilon = 2e-4);
        assert_abs_diff_eq!(cert.upper, 4f64.ln(), epsilon = 1e-15);
        assert_abs_diff_eq!(cert.rhs_point, -2.0 * c1.ln(), epsilon = 1e-12);
        assert_abs_diff_eq!(cert.rhs_point, 0.316692, epsilon = 1e-5);
        assert!(cert.passes.all());
        assert!(cert.m_point <= cert.c_hat);
    }

    #[test]
    fn uniform_point_saturates_the_pointwise_bound() {
        let f = coordinate(2.0, 2);
        let h = FRAC_1_SQRT_2;
        let cert = certify_point(
            &f,
            &f,
            &Vector::from_real(&[h, h]),
            &OptimizerConfig::default(),
            &CheckConfig::default(),
        )
        .unwrap();
        assert_abs_diff_eq!(cert.lhs, 2.0 * 2f64.ln(), epsilon = 1e-15);
        assert_abs_diff_eq!(cert.m_point, 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(cert.rhs_point, cert.lhs, epsilon = 1e-15);
        assert_abs_diff_eq!(cert.floor, 0.5, epsilon = 1e-15);
        assert!(cert.passes.all());
        assert!(cert.in_support);
    }

    #[test]
    fn buzano_examples() {
        let std2 = coordinate(2.0, 2);
        assert_abs_diff_eq!(
            buzano_overlap_bound(&std2, &fourier(2)).unwrap(),
            (1.0 + FRAC_1_SQRT_2) / 2.0,
            epsilon = 1e-15
        );
        assert_abs_diff_eq!(
            buzano_overlap_bound(&std2, &std2).unwrap(),
            1.0,
            epsilon = 1e-15
        );
        assert_abs_diff_eq!(
            buzano_overlap_bound(&coordinate(2.0, 4), &fourier(4)).unwrap(),
            0.75,
            epsilon = 1e-15
        );
    }

    #[test]
    fn buzano_preconditions() {
        let l3 = coordinate(3.0, 2);
        assert!(buzano_overlap_bound(&l3, &l3).is_err());
        let redundant = generate_frame(&FrameKind::RandomParseval2 { n: 3, d: 2 }, 1).unwrap();
        assert!(buzano_overlap_bound(&coordinate(2.0, 2), &redundant).is_err());
    }

    #[test]
    fn scan_examples() {
        let checks = CheckConfig::default();
        let cfg = OptimizerConfig::with_seed(5);
        let r =
            counterexample_scan(&coordinate(2.0, 4), &fourier(4), 1000, 1, &checks, &cfg).unwrap();
        assert!(r.passed(), "{:?}", r.violations);
        assert!(r.min_floor_ratio >= 1.0 - 1e-9);

        let l3 = coordinate(3.0, 3);
        let r = counterexample_scan(&l3, &l3, 1000, 2, &checks, &cfg).unwrap();
        assert!(r.passed());
    }

    #[test]
    fn broken_hypothesis_is_reported() {
        let space = NormedSpace::lq(2, crate::spaces::Field::Real, 2.0).unwrap();
        let doubled = AnalysisFrame::new(
            space,
            2.0,
            vec![
                crate::spaces::Functional::from_real(&[2.0, 0.0]),
                crate::spaces::Functional::from_real(&[0.0, 2.0]),
            ],
        )
        .unwrap();
        let r = counterexample_scan(
            &doubled,
            &doubled,
            200,
            3,
            &CheckConfig::default(),
            &OptimizerConfig::default(),
        )
        .unwrap();
        assert!(!r.violations.is_empty());
        assert!(r.violations[0].failed.contains(&"point_ok".to_string()));
    }

    #[test]
    fn csv_layout() {
        let f = coordinate(2.0, 2);
        let r = counterexample_scan(
            &f,
            &f,
            2,
            1,
            &CheckConfig::default(),
            &OptimizerConfig::default(),
        )
        .unwrap();
        let mut buf = Vec::new();
        r.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(
            lines.next().unwrap(),
            "sample_index,lhs,m_point,rhs_point,upper_ok,point_ok,global_ok,floor_ok,in_support"
        );
        assert_eq!(lines.count(), 2);
    }
}
