//! Finite-dimensional normed spaces over the reals or complexes.
//!
//! Norms are (weighted) ℓ^q norms with `q ∈ [1, ∞]`. A weighted norm with
//! weights `w` is `(Σ w_i |x_i|^q)^{1/q}` for finite `q` and `max_i w_i |x_i|`
//! for `q = ∞`. Both are written internally as `‖s ∘ x‖_q` with per-coordinate
//! scales `s_i = w_i^{1/q}` (resp. `s_i = w_i`), which makes the dual norm
//! `‖f / s‖_{q'}` with `1/q + 1/q' = 1`.

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// Scalars are stored as complex numbers; real spaces keep zero imaginary parts.
pub type Scalar = Complex64;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Field {
    Real,
    Complex,
}

impl Field {
    /// The smallest field containing both.
    pub fn join(self, other: Field) -> Field {
        if self == Field::Complex || other == Field::Complex {
            Field::Complex
        } else {
            Field::Real
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Norm {
    Lq {
        #[serde(with = "exponent")]
        q: f64,
    },
    WeightedLq {
        #[serde(with = "exponent")]
        q: f64,
        weights: Vec<f64>,
    },
}

impl Norm {
    pub fn exponent(&self) -> f64 {
        match self {
            Norm::Lq { q } | Norm::WeightedLq { q, .. } => *q,
        }
    }
}

/// `1/q + 1/q' = 1`, with `1 ↔ ∞`.
pub fn conjugate_exponent(q: f64) -> f64 {
    if q == 1.0 {
        f64::INFINITY
    } else if q.is_infinite() {
        1.0
    } else {
        q / (q - 1.0)
    }
}

/// The ambient space `X`: `K^dim` with an ℓ^q-type norm.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawSpace")]
pub struct NormedSpace {
    dim: usize,
    field: Field,
    norm: Norm,
}

#[derive(Deserialize)]
struct RawSpace {
    dim: usize,
    field: Field,
    norm: Norm,
}

impl TryFrom<RawSpace> for NormedSpace {
    type Error = Error;

    fn try_from(raw: RawSpace) -> Result<Self> {
        NormedSpace::new(raw.dim, raw.field, raw.norm)
    }
}

impl NormedSpace {
    pub fn new(dim: usize, field: Field, norm: Norm) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidConfig("dimension must be at least 1".into()));
        }
        let q = norm.exponent();
        if q.is_nan() || q < 1.0 {
            return Err(Error::InvalidConfig(format!(
                "norm exponent must satisfy q >= 1, got {q}"
            )));
        }
        if let Norm::WeightedLq { weights, .. } = &norm {
            if weights.len() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    found: weights.len(),
                });
            }
            if weights.iter().any(|w| !(w.is_finite() && *w > 0.0)) {
                return Err(Error::InvalidConfig(
                    "norm weights must be finite and strictly positive".into(),
                ));
            }
        }
        Ok(Self { dim, field, norm })
    }

    /// Unweighted ℓ^q on `K^dim`.
    pub fn lq(dim: usize, field: Field, q: f64) -> Result<Self> {
        Self::new(dim, field, Norm::Lq { q })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn field(&self) -> Field {
        self.field
    }

    pub fn norm_kind(&self) -> &Norm {
        &self.norm
    }

    pub fn exponent(&self) -> f64 {
        self.norm.exponent()
    }

    /// True for unweighted ℓ².
    pub fn is_hilbert(&self) -> bool {
        matches!(self.norm, Norm::Lq { q } if q == 2.0)
    }

    /// Same dimension and norm; the fields may differ.
    pub fn same_geometry(&self, other: &NormedSpace) -> bool {
        self.dim == other.dim && self.norm == other.norm
    }

    pub fn with_field(&self, field: Field) -> NormedSpace {
        NormedSpace {
            field,
            ..self.clone()
        }
    }

    pub(crate) fn scales(&self) -> Vec<f64> {
        match &self.norm {
            Norm::Lq { .. } => vec![1.0; self.dim],
            Norm::WeightedLq { q, weights } => {
                if q.is_infinite() {
                    weights.clone()
                } else {
                    weights.iter().map(|w| w.powf(1.0 / q)).collect()
                }
            }
        }
    }

    /// The dual space `X*`, realised on the same coordinates through the
    /// bilinear pairing `f(x) = Σ f_i x_i`.
    pub fn dual_space(&self) -> NormedSpace {
        let q_dual = conjugate_exponent(self.exponent());
        let norm = match &self.norm {
            Norm::Lq { .. } => Norm::Lq { q: q_dual },
            Norm::WeightedLq { .. } => {
                let weights = self
                    .scales()
                    .iter()
                    .map(|s| {
                        let t = 1.0 / s;
                        if q_dual.is_infinite() {
                            t
                        } else {
                            t.powf(q_dual)
                        }
                    })
                    .collect();
                Norm::WeightedLq { q: q_dual, weights }
            }
        };
        NormedSpace {
            dim: self.dim,
            field: self.field,
            norm,
        }
    }

    pub(crate) fn check_len(&self, len: usize) -> Result<()> {
        if len != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: len,
            });
        }
        Ok(())
    }

    /// Norm of raw coordinates (no dimension check).
    pub(crate) fn norm_of(&self, coords: &[Scalar]) -> f64 {
        match &self.norm {
            Norm::Lq { q } => lq_norm(coords.iter().map(|c| c.norm()), *q),
            Norm::WeightedLq { q, .. } => {
                let scales = self.scales();
                lq_norm(coords.iter().zip(&scales).map(|(c, s)| c.norm() * s), *q)
            }
        }
    }

    /// Coordinates of a point on the unit sphere maximising `|Σ a_i y_i|`.
    ///
    /// For ℓ^q this is the Hölder equality case `y_i ∝ conj(a_i)|a_i|^{q'-2}`;
    /// weights are absorbed by the substitution `z = s ∘ y`. A zero `a`
    /// returns the first basis vector.
    pub(crate) fn norming_point(&self, a: &[Scalar]) -> Vec<Scalar> {
        let q = self.exponent();
        let scales = self.scales();
        let b: Vec<Scalar> = a.iter().zip(&scales).map(|(ai, s)| ai / s).collect();
        let moduli: Vec<f64> = b.iter().map(|c| c.norm()).collect();
        let peak = moduli.iter().cloned().fold(0.0, f64::max);
        let mut z = vec![Scalar::new(0.0, 0.0); self.dim];
        if peak == 0.0 {
            z[0] = Scalar::new(1.0, 0.0);
        } else if q == 1.0 {
            let i = moduli.iter().position(|m| *m == peak).unwrap_or(0);
            z[i] = b[i].conj() / moduli[i];
        } else if q.is_infinite() {
            for i in 0..self.dim {
                z[i] = if moduli[i] > 0.0 {
                    b[i].conj() / moduli[i]
                } else {
                    Scalar::new(1.0, 0.0)
                };
            }
        } else {
            let q_dual = conjugate_exponent(q);
            for i in 0..self.dim {
                if moduli[i] > 0.0 {
                    // rescale by the peak so large exponents cannot overflow
                    z[i] = b[i].conj() / moduli[i] * (moduli[i] / peak).powf(q_dual - 1.0);
                }
            }
        }
        let mut y: Vec<Scalar> = z.iter().zip(&scales).map(|(zi, s)| zi / s).collect();
        if self.field == Field::Real {
            for c in y.iter_mut() {
                c.im = 0.0;
            }
        }
        let n = self.norm_of(&y);
        y.iter_mut().for_each(|c| *c /= n);
        y
    }

    /// Deterministic Gaussian draws normalised to the unit sphere.
    pub(crate) fn sample_sphere_coords(&self, count: usize, seed: u64) -> Vec<Vec<Scalar>> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut out = Vec::with_capacity(count);
        while out.len() < count {
            let coords: Vec<Scalar> = (0..self.dim)
                .map(|_| {
                    let re: f64 = StandardNormal.sample(&mut rng);
                    let im: f64 = match self.field {
                        Field::Real => 0.0,
                        Field::Complex => StandardNormal.sample(&mut rng),
                    };
                    Scalar::new(re, im)
                })
                .collect();
            let n = self.norm_of(&coords);
            if n > 0.0 && n.is_finite() {
                out.push(coords.into_iter().map(|c| c / n).collect());
            }
        }
        out
    }
}

fn lq_norm(moduli: impl Iterator<Item = f64> + Clone, q: f64) -> f64 {
    let peak = moduli.clone().fold(0.0, f64::max);
    if q.is_infinite() || peak == 0.0 {
        return peak;
    }
    if q == 1.0 {
        return moduli.sum();
    }
    let s: f64 = moduli.map(|m| (m / peak).powf(q)).sum();
    peak * s.powf(1.0 / q)
}

/// A point `x ∈ X`.
#[derive(Clone, Debug, PartialEq)]
pub struct Vector(Vec<Scalar>);

/// A linear functional `f ∈ X*`, acting by `f(x) = Σ_i f_i x_i`.
#[derive(Clone, Debug, PartialEq)]
pub struct Functional(Vec<Scalar>);

macro_rules! coords_newtype {
    ($ty:ident) => {
        impl $ty {
            pub fn new(coords: Vec<Scalar>) -> Self {
                Self(coords)
            }

            pub fn from_real(coords: &[f64]) -> Self {
                Self(coords.iter().map(|&r| Scalar::new(r, 0.0)).collect())
            }

            pub fn coords(&self) -> &[Scalar] {
                &self.0
            }

            pub fn len(&self) -> usize {
                self.0.len()
            }

            pub fn is_empty(&self) -> bool {
                self.0.is_empty()
            }

            pub fn is_zero(&self) -> bool {
                self.0.iter().all(|c| c.re == 0.0 && c.im == 0.0)
            }

            pub fn scaled(&self, factor: Scalar) -> Self {
                Self(self.0.iter().map(|c| c * factor).collect())
            }

            pub fn into_coords(self) -> Vec<Scalar> {
                self.0
            }
        }

        impl From<Vec<Scalar>> for $ty {
            fn from(coords: Vec<Scalar>) -> Self {
                Self(coords)
            }
        }

        impl Serialize for $ty {
            fn serialize<S: Serializer>(
                &self,
                serializer: S,
            ) -> std::result::Result<S::Ok, S::Error> {
                complex_list::serialize(&self.0, serializer)
            }
        }

        impl<'de> Deserialize<'de> for $ty {
            fn deserialize<D: Deserializer<'de>>(
                deserializer: D,
            ) -> std::result::Result<Self, D::Error> {
                complex_list::deserialize(deserializer).map(Self)
            }
        }
    };
}

coords_newtype!(Vector);
coords_newtype!(Functional);

pub(crate) fn dot(a: &[Scalar], y: &[Scalar]) -> Scalar {
    a.iter().zip(y).map(|(ai, yi)| ai * yi).sum()
}

pub fn norm(space: &NormedSpace, x: &Vector) -> Result<f64> {
    space.check_len(x.len())?;
    Ok(space.norm_of(x.coords()))
}

pub fn dual_norm(space: &NormedSpace, f: &Functional) -> Result<f64> {
    space.check_len(f.len())?;
    Ok(space.dual_space().norm_of(f.coords()))
}

pub fn pairing(f: &Functional, x: &Vector) -> Result<Scalar> {
    if f.len() != x.len() {
        return Err(Error::DimensionMismatch {
            expected: f.len(),
            found: x.len(),
        });
    }
    Ok(dot(f.coords(), x.coords()))
}

/// `x / ‖x‖`.
pub fn normalize(space: &NormedSpace, x: &Vector) -> Result<Vector> {
    let n = norm(space, x)?;
    if n == 0.0 {
        return Err(Error::ZeroVector);
    }
    Ok(Vector(x.coords().iter().map(|c| c / n).collect()))
}

pub fn sample_unit_sphere(space: &NormedSpace, count: usize, seed: u64) -> Result<Vec<Vector>> {
    if count == 0 {
        return Err(Error::InvalidConfig(
            "sample count must be at least 1".into(),
        ));
    }
    Ok(space
        .sample_sphere_coords(count, seed)
        .into_iter()
        .map(Vector)
        .collect())
}

/// Functionals of dual norm one, drawn as normalised Gaussians.
pub fn sample_dual_unit_sphere(
    space: &NormedSpace,
    count: usize,
    seed: u64,
) -> Result<Vec<Functional>> {
    if count == 0 {
        return Err(Error::InvalidConfig(
            "sample count must be at least 1".into(),
        ));
    }
    Ok(space
        .dual_space()
        .sample_sphere_coords(count, seed)
        .into_iter()
        .map(Functional)
        .collect())
}

/// Complex scalars as `[re, im]` pairs.
pub(crate) mod complex_list {
    use super::Scalar;
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    /// `[re, im]` with signed zeros written as `0.0`.
    pub(crate) fn pair(c: &Scalar) -> [f64; 2] {
        [c.re + 0.0, c.im + 0.0]
    }

    pub fn serialize<S: Serializer>(v: &[Scalar], s: S) -> Result<S::Ok, S::Error> {
        let pairs: Vec<[f64; 2]> = v.iter().map(pair).collect();
        pairs.serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<Scalar>, D::Error> {
        let pairs = Vec::<[f64; 2]>::deserialize(d)?;
        Ok(pairs
            .into_iter()
            .map(|[re, im]| Scalar::new(re, im))
            .collect())
    }
}

/// Exponents are JSON numbers, or the string `"inf"` for `q = ∞`.
mod exponent {
    use serde::{de, Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(q: &f64, s: S) -> Result<S::Ok, S::Error> {
        if q.is_infinite() {
            s.serialize_str("inf")
        } else {
            s.serialize_f64(*q)
        }
    }

    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Repr {
        Number(f64),
        Text(String),
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        match Repr::deserialize(d)? {
            Repr::Number(q) => Ok(q),
            Repr::Text(t) if matches!(t.as_str(), "inf" | "infinity" | "Infinity") => {
                Ok(f64::INFINITY)
            }
            Repr::Text(t) => Err(de::Error::custom(format!("invalid exponent {t:?}"))),
        }
    }
}
