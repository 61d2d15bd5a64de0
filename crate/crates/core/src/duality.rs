//! Parseval p-frames for the dual space: vectors `{τ_j} ⊂ X` with
//! `Σ_j |f(τ_j)|^p = ‖f‖^p` for every functional `f`.
//!
//! All computations run on the dual sphere `{‖f‖_* = 1}`. Since the pairing
//! is bilinear in coordinates, `f(τ_j) = Σ_i f_i τ_{j,i}` and the dual chain
//! reuses the primal machinery with the vector coordinates as rows and the
//! dual norm as the sphere norm.

use serde::{Deserialize, Serialize};

use crate::certify::{
    self, Certificate, ChainInputs, CheckConfig, OptimizerConfig, ScanReport, Side,
};
use crate::coherence::CoherenceProblem;
use crate::entropy::{self, coefficient_distribution, EntropyValue, Order};
use crate::error::{Error, Result};
use crate::frames::{self, check_frame_exponent, FrameKind};
use crate::spaces::{conjugate_exponent, dot, Field, Functional, NormedSpace, Scalar, Vector};

pub(crate) const VECTOR_ROLE: &str = "vector_frame";

/// A finite family of vectors in the predual `space`, with exponent `p`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawVectorFrame", into = "RawVectorFrame")]
pub struct VectorFrame {
    space: NormedSpace,
    p: f64,
    vectors: Vec<Vector>,
}

#[derive(Serialize, Deserialize)]
struct RawVectorFrame {
    role: String,
    space: NormedSpace,
    p: f64,
    vectors: Vec<Vector>,
}

impl TryFrom<RawVectorFrame> for VectorFrame {
    type Error = Error;

    fn try_from(raw: RawVectorFrame) -> Result<Self> {
        if raw.role != VECTOR_ROLE {
            return Err(Error::Schema(format!(
                "expected role {VECTOR_ROLE:?}, found {:?}",
                raw.role
            )));
        }
        VectorFrame::new(raw.space, raw.p, raw.vectors)
    }
}

impl From<VectorFrame> for RawVectorFrame {
    fn from(frame: VectorFrame) -> Self {
        RawVectorFrame {
            role: VECTOR_ROLE.to_string(),
            space: frame.space,
            p: frame.p,
            vectors: frame.vectors,
        }
    }
}

impl VectorFrame {
    pub fn new(space: NormedSpace, p: f64, vectors: Vec<Vector>) -> Result<Self> {
        check_frame_exponent(p)?;
        if vectors.is_empty() {
            return Err(Error::InvalidConfig(
                "a frame needs at least one vector".into(),
            ));
        }
        for v in &vectors {
            space.check_len(v.len())?;
        }
        Ok(Self { space, p, vectors })
    }

    pub fn space(&self) -> &NormedSpace {
        &self.space
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn vectors(&self) -> &[Vector] {
        &self.vectors
    }

    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }

    pub(crate) fn rows(&self) -> Vec<&[Scalar]> {
        self.vectors.iter().map(|v| v.coords()).collect()
    }

    /// `max_j ‖τ_j‖`; at most one for a dual Parseval frame.
    pub fn max_vector_norm(&self) -> f64 {
        self.vectors
            .iter()
            .map(|v| self.space.norm_of(v.coords()))
            .fold(0.0, f64::max)
    }
}

/// Exact dual constructions. Coordinate frames live on `ℓ^{p'}` so that the
/// dual norm is `ℓ^p`; the other kinds are ℓ² bases or isometries.
pub fn generate_vector_frame(kind: &FrameKind, seed: u64) -> Result<VectorFrame> {
    let (space, p, rows): (NormedSpace, f64, Vec<Vec<Scalar>>) = match kind {
        FrameKind::Coordinate { p, dim, weights } => {
            let rows = frames::coordinate_rows(*p, *dim, weights.as_deref())?;
            (
                NormedSpace::lq(*dim, Field::Real, conjugate_exponent(*p))?,
                *p,
                rows,
            )
        }
        FrameKind::Orthonormal { basis } => {
            let field = frames::check_orthonormal(basis)?;
            (
                NormedSpace::lq(basis.len(), field, 2.0)?,
                2.0,
                basis.clone(),
            )
        }
        FrameKind::Fourier { n } => (
            NormedSpace::lq(*n, Field::Complex, 2.0)?,
            2.0,
            frames::fourier_basis(*n)?,
        ),
        FrameKind::RandomParseval2 { .. } => {
            // the same isometry rows: Σ_j |g(q_j)|² = ‖Q g‖² = ‖g‖²
            let analysis = frames::generate_frame(kind, seed)?;
            let space = analysis.space().clone();
            let rows = analysis
                .functionals()
                .iter()
                .map(|f| f.coords().to_vec())
                .collect();
            (space, 2.0, rows)
        }
    };
    VectorFrame::new(space, p, rows.into_iter().map(Vector::new).collect())
}

fn dual_unit(space: &NormedSpace, f: &Functional) -> Result<Vec<Scalar>> {
    unit_on(&space.dual_space(), f)
}

/// `f / ‖f‖` for a functional already expressed on the dual sphere's space.
fn unit_on(sphere: &NormedSpace, f: &Functional) -> Result<Vec<Scalar>> {
    sphere.check_len(f.len())?;
    let n = sphere.norm_of(f.coords());
    if n == 0.0 {
        return Err(Error::ZeroVector);
    }
    Ok(f.coords().iter().map(|c| c / n).collect())
}

/// `max_f |Σ_j |f(τ_j)|^p − 1|` over functionals of dual norm one.
pub fn dual_parseval_defect(frame: &VectorFrame, functional_samples: &[Functional]) -> Result<f64> {
    if functional_samples.is_empty() {
        return Err(Error::EmptySamples);
    }
    let dual = frame.space.dual_space();
    let mut defect: f64 = 0.0;
    for f in functional_samples {
        frame.space.check_len(f.len())?;
        frames::check_unit(&dual, f.coords())?;
        let total: f64 = frame
            .vectors
            .iter()
            .map(|t| dot(f.coords(), t.coords()).norm().powf(frame.p))
            .sum();
        defect = defect.max((total - 1.0).abs());
    }
    Ok(defect)
}

pub fn sampled_dual_parseval_defect(frame: &VectorFrame, count: usize, seed: u64) -> Result<f64> {
    let samples = crate::spaces::sample_dual_unit_sphere(&frame.space, count, seed)?;
    dual_parseval_defect(frame, &samples)
}

/// `(|f(τ_j)| / ‖f‖)^p`.
pub fn dual_distribution(frame: &VectorFrame, f: &Functional) -> Result<Vec<f64>> {
    let unit = dual_unit(&frame.space, f)?;
    Ok(coefficient_distribution(&frame.rows(), &unit, frame.p))
}

pub fn dual_entropy(frame: &VectorFrame, f: &Functional) -> Result<EntropyValue> {
    let c = dual_distribution(frame, f)?;
    Ok(EntropyValue {
        value: entropy::shannon(&c),
        p: frame.p,
        order: Order::Shannon,
    })
}

pub fn dual_renyi_entropy(frame: &VectorFrame, f: &Functional, alpha: f64) -> Result<EntropyValue> {
    entropy::check_alpha(alpha)?;
    let c = dual_distribution(frame, f)?;
    Ok(EntropyValue {
        value: entropy::renyi(&c, alpha)?,
        p: frame.p,
        order: Order::Renyi(alpha),
    })
}

/// Whether `f(τ_j) / ‖f‖ > eps_supp` for every `j`.
pub fn dual_support_membership(frame: &VectorFrame, f: &Functional, eps_supp: f64) -> Result<bool> {
    let unit = dual_unit(&frame.space, f)?;
    Ok(frame
        .vectors
        .iter()
        .all(|t| dot(&unit, t.coords()).norm() > eps_supp))
}

fn dual_inputs<'a>(tau: &'a VectorFrame, omega: &'a VectorFrame) -> Result<ChainInputs<'a>> {
    if !tau.space.same_geometry(&omega.space) {
        return Err(Error::MismatchedFrames(
            "frames live on different spaces".into(),
        ));
    }
    if tau.p != omega.p {
        return Err(Error::MismatchedFrames(format!(
            "frame exponents differ: {} vs {}",
            tau.p, omega.p
        )));
    }
    let field = tau.space.field().join(omega.space.field());
    let sphere = tau.space.with_field(field).dual_space();
    Ok(ChainInputs {
        side: Side::Dual,
        problem: CoherenceProblem {
            sphere,
            left: tau.rows(),
            right: omega.rows(),
        },
        p: tau.p,
    })
}

/// `max_{j,k} |ĝ(τ_j) ĝ(ω_k)|` with `ĝ = g / ‖g‖_*`.
pub fn dual_pointwise_max_product(
    tau: &VectorFrame,
    omega: &VectorFrame,
    g: &Functional,
) -> Result<f64> {
    let inputs = dual_inputs(tau, omega)?;
    let unit = unit_on(&inputs.problem.sphere, g)?;
    Ok(inputs.problem.exact(&unit))
}

/// Sup-coherence estimate over the dual unit sphere.
pub fn dual_estimate_sup_c(
    tau: &VectorFrame,
    omega: &VectorFrame,
    cfg: &OptimizerConfig,
) -> Result<(f64, Functional)> {
    cfg.validate()?;
    let inputs = dual_inputs(tau, omega)?;
    let best = inputs.problem.estimate(&cfg.settings(), &[]);
    Ok((best.value, Functional::new(best.point)))
}

pub fn dual_certify(
    tau: &VectorFrame,
    omega: &VectorFrame,
    f: &Functional,
    cfg: &OptimizerConfig,
    checks: &CheckConfig,
) -> Result<Certificate> {
    cfg.validate()?;
    let inputs = dual_inputs(tau, omega)?;
    let unit = unit_on(&inputs.problem.sphere, f)?;
    let best = inputs
        .problem
        .estimate(&cfg.settings(), std::slice::from_ref(&unit));
    Ok(inputs.certificate(&unit, (best.value, &best.point), checks))
}

/// Dual counterpart of [`certify::counterexample_scan`].
pub fn dual_counterexample_scan(
    tau: &VectorFrame,
    omega: &VectorFrame,
    sample_count: usize,
    seed: u64,
    checks: &CheckConfig,
    cfg: &OptimizerConfig,
) -> Result<ScanReport> {
    cfg.validate()?;
    let inputs = dual_inputs(tau, omega)?;
    if sample_count == 0 {
        return Err(Error::InvalidConfig(
            "sample count must be at least 1".into(),
        ));
    }
    let samples = inputs
        .problem
        .sphere
        .sample_sphere_coords(sample_count, seed);
    let best = inputs.problem.estimate(&cfg.settings(), &[]);
    Ok(certify::scan(
        &inputs,
        &samples,
        (best.value, &best.point),
        seed,
        checks,
        cfg.execution,
    ))
}
