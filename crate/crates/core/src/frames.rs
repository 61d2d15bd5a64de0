//! Parseval p-frames `{f_j} ⊂ X*`: families of functionals with
//! `Σ_j |f_j(x)|^p = ‖x‖^p` for every `x`.

use nalgebra::DMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spaces::{self, dot, Field, Functional, NormedSpace, Scalar, Vector};

/// Default threshold below which a frame coefficient counts as vanishing.
pub const DEFAULT_EPS_SUPP: f64 = 1e-12;

/// Acceptance threshold for sampled Parseval verification.
pub const PARSEVAL_TOL: f64 = 1e-9;

const UNIT_TOL: f64 = 1e-10;

/// A finite family of functionals on `space` together with its exponent `p`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawAnalysisFrame", into = "RawAnalysisFrame")]
pub struct AnalysisFrame {
    space: NormedSpace,
    p: f64,
    functionals: Vec<Functional>,
}

#[derive(Serialize, Deserialize)]
struct RawAnalysisFrame {
    #[serde(default)]
    role: Option<String>,
    space: NormedSpace,
    p: f64,
    functionals: Vec<Functional>,
}

impl TryFrom<RawAnalysisFrame> for AnalysisFrame {
    type Error = Error;

    fn try_from(raw: RawAnalysisFrame) -> Result<Self> {
        if let Some(role) = raw.role.as_deref() {
            if role != ANALYSIS_ROLE {
                return Err(Error::Schema(format!(
                    "expected role {ANALYSIS_ROLE:?}, found {role:?}"
                )));
            }
        }
        AnalysisFrame::new(raw.space, raw.p, raw.functionals)
    }
}

impl From<AnalysisFrame> for RawAnalysisFrame {
    fn from(frame: AnalysisFrame) -> Self {
        RawAnalysisFrame {
            role: Some(ANALYSIS_ROLE.to_string()),
            space: frame.space,
            p: frame.p,
            functionals: frame.functionals,
        }
    }
}

pub(crate) const ANALYSIS_ROLE: &str = "analysis_frame";

pub(crate) fn check_frame_exponent(p: f64) -> Result<()> {
    if !(p.is_finite() && p >= 1.0) {
        return Err(Error::InvalidConfig(format!(
            "frame exponent must satisfy 1 <= p < inf, got {p}"
        )));
    }
    Ok(())
}

impl AnalysisFrame {
    pub fn new(space: NormedSpace, p: f64, functionals: Vec<Functional>) -> Result<Self> {
        check_frame_exponent(p)?;
        if functionals.is_empty() {
            return Err(Error::InvalidConfig(
                "a frame needs at least one functional".into(),
            ));
        }
        for f in &functionals {
            space.check_len(f.len())?;
        }
        Ok(Self {
            space,
            p,
            functionals,
        })
    }

    pub fn space(&self) -> &NormedSpace {
        &self.space
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn functionals(&self) -> &[Functional] {
        &self.functionals
    }

    pub fn len(&self) -> usize {
        self.functionals.len()
    }

    pub fn is_empty(&self) -> bool {
        self.functionals.is_empty()
    }

    pub(crate) fn rows(&self) -> Vec<&[Scalar]> {
        self.functionals.iter().map(|f| f.coords()).collect()
    }

    /// The same frame over a possibly larger scalar field.
    pub fn with_field(&self, field: Field) -> AnalysisFrame {
        AnalysisFrame {
            space: self.space.with_field(field),
            ..self.clone()
        }
    }

    /// `(f_j(x))_j` without normalisation.
    pub fn analysis(&self, x: &Vector) -> Result<Vec<Scalar>> {
        self.space.check_len(x.len())?;
        Ok(self
            .functionals
            .iter()
            .map(|f| dot(f.coords(), x.coords()))
            .collect())
    }

    /// Largest dual norm `max_j ‖f_j‖`; at most one for a Parseval frame.
    pub fn max_functional_norm(&self) -> f64 {
        let dual = self.space.dual_space();
        self.functionals
            .iter()
            .map(|f| dual.norm_of(f.coords()))
            .fold(0.0, f64::max)
    }
}

/// Exact constructions of Parseval frames.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum FrameKind {
    /// Functionals `w_{i,k}^{1/p} e_i*` on ℓ^p; each coordinate's weights
    /// must sum to one. `weights: None` gives the plain coordinate frame.
    Coordinate {
        p: f64,
        dim: usize,
        weights: Option<Vec<Vec<f64>>>,
    },
    /// `h ↦ ⟨h, τ_j⟩` for the rows `τ_j` of a unitary matrix, on ℓ².
    Orthonormal {
        #[serde(with = "complex_rows")]
        basis: Vec<Vec<Scalar>>,
    },
    /// The unitary DFT basis on complex ℓ².
    Fourier { n: usize },
    /// Rows of a seeded `n × d` matrix with orthonormal columns, on real ℓ².
    RandomParseval2 { n: usize, d: usize },
}

pub fn generate_frame(kind: &FrameKind, seed: u64) -> Result<AnalysisFrame> {
    match kind {
        FrameKind::Coordinate { p, dim, weights } => {
            let functionals = coordinate_rows(*p, *dim, weights.as_deref())?
                .into_iter()
                .map(Functional::new)
                .collect();
            AnalysisFrame::new(NormedSpace::lq(*dim, Field::Real, *p)?, *p, functionals)
        }
        FrameKind::Orthonormal { basis } => {
            let field = check_orthonormal(basis)?;
            let functionals = basis
                .iter()
                .map(|row| Functional::new(row.iter().map(|c| c.conj()).collect()))
                .collect();
            AnalysisFrame::new(NormedSpace::lq(basis.len(), field, 2.0)?, 2.0, functionals)
        }
        FrameKind::Fourier { n } => {
            let functionals = fourier_basis(*n)?
                .into_iter()
                .map(|row| Functional::new(row.iter().map(|c| c.conj()).collect()))
                .collect();
            AnalysisFrame::new(NormedSpace::lq(*n, Field::Complex, 2.0)?, 2.0, functionals)
        }
        FrameKind::RandomParseval2 { n, d } => {
            let functionals = random_isometry_rows(*n, *d, seed)?
                .into_iter()
                .map(Functional::from_real_vec)
                .collect();
            AnalysisFrame::new(NormedSpace::lq(*d, Field::Real, 2.0)?, 2.0, functionals)
        }
    }
}

impl Functional {
    fn from_real_vec(v: Vec<f64>) -> Self {
        Functional::from_real(&v)
    }
}

/// Scaled coordinate rows `w^{1/p} e_i`, coordinate-major.
pub(crate) fn coordinate_rows(
    p: f64,
    dim: usize,
    weights: Option<&[Vec<f64>]>,
) -> Result<Vec<Vec<Scalar>>> {
    check_frame_exponent(p)?;
    if dim == 0 {
        return Err(Error::InvalidConfig("dimension must be at least 1".into()));
    }
    let unit: Vec<Vec<f64>> = vec![vec![1.0]; dim];
    let weights = weights.unwrap_or(&unit);
    if weights.len() != dim {
        return Err(Error::DimensionMismatch {
            expected: dim,
            found: weights.len(),
        });
    }
    let mut rows = Vec::new();
    for (i, split) in weights.iter().enumerate() {
        if split.is_empty() || split.iter().any(|w| !(w.is_finite() && *w > 0.0)) {
            return Err(Error::InvalidConfig(format!(
                "weights of coordinate {i} must be positive"
            )));
        }
        let total: f64 = split.iter().sum();
        if (total - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidConfig(format!(
                "weights of coordinate {i} sum to {total}, not 1"
            )));
        }
        for w in split {
            let mut row = vec![Scalar::new(0.0, 0.0); dim];
            row[i] = Scalar::new(w.powf(1.0 / p), 0.0);
            rows.push(row);
        }
    }
    Ok(rows)
}

/// Rows `ω_j = (e^{2πi jk/n} / √n)_k` of the unitary DFT matrix.
pub(crate) fn fourier_basis(n: usize) -> Result<Vec<Vec<Scalar>>> {
    if n == 0 {
        return Err(Error::InvalidConfig(
            "Fourier size must be at least 1".into(),
        ));
    }
    let scale = 1.0 / (n as f64).sqrt();
    Ok((0..n)
        .map(|j| {
            (0..n)
                .map(|k| root_of_unity((j * k) % n, n) * scale)
                .collect()
        })
        .collect())
}

/// `e^{2πi k/n}`, exact on quarter turns.
fn root_of_unity(k: usize, n: usize) -> Scalar {
    if (4 * k).is_multiple_of(n) {
        return match (4 * k / n) % 4 {
            0 => Scalar::new(1.0, 0.0),
            1 => Scalar::new(0.0, 1.0),
            2 => Scalar::new(-1.0, 0.0),
            _ => Scalar::new(0.0, -1.0),
        };
    }
    let t = 2.0 * std::f64::consts::PI * k as f64 / n as f64;
    Scalar::new(t.cos(), t.sin())
}

fn random_isometry_rows(n: usize, d: usize, seed: u64) -> Result<Vec<Vec<f64>>> {
    if d == 0 {
        return Err(Error::InvalidConfig("dimension must be at least 1".into()));
    }
    if n < d {
        return Err(Error::InvalidConfig(format!(
            "random_parseval2 needs n >= d, got n = {n}, d = {d}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let gaussian = DMatrix::<f64>::from_fn(n, d, |_, _| StandardNormal.sample(&mut rng));
    let q = gaussian.qr().q();
    Ok((0..n)
        .map(|i| (0..d).map(|k| q[(i, k)]).collect())
        .collect())
}

/// Checks `B B* = I` for a square matrix given by rows; returns the field the
/// entries live in.
pub(crate) fn check_orthonormal(rows: &[Vec<Scalar>]) -> Result<Field> {
    let n = rows.len();
    if n == 0 {
        return Err(Error::InvalidConfig("basis is empty".into()));
    }
    for r in rows {
        if r.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: r.len(),
            });
        }
    }
    let defect = unitary_defect(rows);
    #[allow(clippy::neg_cmp_op_on_partial_ord)] // NaN must fail too
    if !(defect <= 1e-10) {
        return Err(Error::NotOrthonormal { defect });
    }
    let complex = rows.iter().flatten().any(|c| c.im != 0.0);
    Ok(if complex { Field::Complex } else { Field::Real })
}

pub(crate) fn unitary_defect(rows: &[Vec<Scalar>]) -> f64 {
    let mut defect: f64 = 0.0;
    for (j, a) in rows.iter().enumerate() {
        for (k, b) in rows.iter().enumerate() {
            let g: Scalar = a.iter().zip(b).map(|(x, y)| x * y.conj()).sum();
            let target = if j == k { 1.0 } else { 0.0 };
            defect = defect.max((g - target).norm());
        }
    }
    defect
}

pub(crate) fn check_unit(space: &NormedSpace, coords: &[Scalar]) -> Result<()> {
    let n = space.norm_of(coords);
    #[allow(clippy::neg_cmp_op_on_partial_ord)] // NaN must fail too
    if !((n - 1.0).abs() <= UNIT_TOL) {
        return Err(Error::NotUnit { norm: n });
    }
    Ok(())
}

/// `max_x |Σ_j |f_j(x)|^p − 1|` over unit-norm samples.
pub fn parseval_defect(frame: &AnalysisFrame, samples: &[Vector]) -> Result<f64> {
    if samples.is_empty() {
        return Err(Error::EmptySamples);
    }
    let mut defect: f64 = 0.0;
    for x in samples {
        frame.space.check_len(x.len())?;
        check_unit(&frame.space, x.coords())?;
        let total: f64 = frame
            .functionals
            .iter()
            .map(|f| dot(f.coords(), x.coords()).norm().powf(frame.p))
            .sum();
        defect = defect.max((total - 1.0).abs());
    }
    Ok(defect)
}

/// Parseval defect on `count` fresh sphere samples drawn with `seed`.
pub fn sampled_parseval_defect(frame: &AnalysisFrame, count: usize, seed: u64) -> Result<f64> {
    let samples = spaces::sample_unit_sphere(&frame.space, count, seed)?;
    parseval_defect(frame, &samples)
}

/// Whether `x` lies in `X_f`: every coefficient of `x/‖x‖` exceeds `eps_supp`.
pub fn support_membership(frame: &AnalysisFrame, x: &Vector, eps_supp: f64) -> Result<bool> {
    let unit = spaces::normalize(&frame.space, x)?;
    Ok(frame
        .functionals
        .iter()
        .all(|f| dot(f.coords(), unit.coords()).norm() > eps_supp))
}

pub(crate) mod complex_rows {
    use crate::spaces::Scalar;
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(rows: &[Vec<Scalar>], s: S) -> Result<S::Ok, S::Error> {
        let pairs: Vec<Vec<[f64; 2]>> = rows
            .iter()
            .map(|r| r.iter().map(crate::spaces::complex_list::pair).collect())
            .collect();
        pairs.serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<Vec<Scalar>>, D::Error> {
        let pairs = Vec::<Vec<[f64; 2]>>::deserialize(d)?;
        Ok(pairs
            .into_iter()
            .map(|r| r.into_iter().map(|[re, im]| Scalar::new(re, im)).collect())
            .collect())
    }
}
