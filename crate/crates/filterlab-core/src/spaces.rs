//! Finite vector models and their seminorms.
//!
//! Convergence questions are posed against a [`SpaceModel`], which names a
//! family of seminorms over either dense coordinate vectors or sparse
//! string-keyed ones:
//!
//! * `NormedL1` / `NormedLinf`: one seminorm that is an actual norm.
//! * `SeminormFamily`: finitely many functionals f, each inducing
//!   p_f(x) = |pairing(f, x)|. Such a family usually cannot separate points,
//!   and that failure is exactly what several gallery runs exhibit.
//! * `SparseProduct`: a product of scalar lines indexed by string keys, with
//!   one coordinate seminorm per key. Vectors only carry the keys they
//!   touch, so this models a product over a large index set without storing
//!   it.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;

use crate::fmath;

#[derive(Clone, Debug, PartialEq)]
pub enum SpaceError {
    DimensionMismatch { expected: usize, got: usize },
    UnknownSeminorm { label: String },
    /// Dense and sparse vectors cannot be mixed, and sparse spaces reject
    /// dense vectors outright.
    ShapeMismatch { reason: String },
    NonFiniteValue { label: String },
    InvalidSpace { reason: String },
}

impl core::fmt::Display for SpaceError {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            SpaceError::DimensionMismatch { expected, got } => {
                write!(f, "dimension mismatch: expected {expected}, got {got}")
            }
            SpaceError::UnknownSeminorm { label } => write!(f, "unknown seminorm `{label}`"),
            SpaceError::ShapeMismatch { reason } => write!(f, "shape mismatch: {reason}"),
            SpaceError::NonFiniteValue { label } => {
                write!(f, "seminorm `{label}` produced a non-finite value")
            }
            SpaceError::InvalidSpace { reason } => write!(f, "invalid space: {reason}"),
        }
    }
}

#[cfg(feature = "std")]
impl std::error::Error for SpaceError {}

/// A point in one of the space models.
#[derive(Clone, Debug, PartialEq)]
pub enum Vector {
    Dense(Vec<f64>),
    Sparse(BTreeMap<String, f64>),
}

impl Vector {
    pub fn dense(coords: Vec<f64>) -> Vector {
        Vector::Dense(coords)
    }

    pub fn sparse<I, K>(pairs: I) -> Vector
    where
        I: IntoIterator<Item = (K, f64)>,
        K: Into<String>,
    {
        Vector::Sparse(pairs.into_iter().map(|(k, v)| (k.into(), v)).collect())
    }

    pub fn zeros(dim: usize) -> Vector {
        Vector::Dense(vec![0.0; dim])
    }

    pub fn ones(dim: usize) -> Vector {
        Vector::Dense(vec![1.0; dim])
    }

    /// The standard basis vector with a 1 in coordinate `i` (0-indexed).
    pub fn basis(dim: usize, i: usize) -> Result<Vector, SpaceError> {
        if i >= dim {
            return Err(SpaceError::DimensionMismatch { expected: dim, got: i + 1 });
        }
        let mut coords = vec![0.0; dim];
        coords[i] = 1.0;
        Ok(Vector::Dense(coords))
    }

    pub fn shape_name(&self) -> &'static str {
        match self {
            Vector::Dense(_) => "dense",
            Vector::Sparse(_) => "sparse",
        }
    }

    pub fn sub(&self, other: &Vector) -> Result<Vector, SpaceError> {
        self.zip_with(other, |a, b| a - b)
    }

    pub fn add(&self, other: &Vector) -> Result<Vector, SpaceError> {
        self.zip_with(other, |a, b| a + b)
    }

    pub fn scale(&self, t: f64) -> Vector {
        match self {
            Vector::Dense(coords) => Vector::Dense(coords.iter().map(|&c| c * t).collect()),
            Vector::Sparse(map) => {
                Vector::Sparse(map.iter().map(|(k, &v)| (k.clone(), v * t)).collect())
            }
        }
    }

    fn zip_with(&self, other: &Vector, op: impl Fn(f64, f64) -> f64) -> Result<Vector, SpaceError> {
        match (self, other) {
            (Vector::Dense(a), Vector::Dense(b)) => {
                if a.len() != b.len() {
                    return Err(SpaceError::DimensionMismatch { expected: a.len(), got: b.len() });
                }
                Ok(Vector::Dense(a.iter().zip(b.iter()).map(|(&x, &y)| op(x, y)).collect()))
            }
            (Vector::Sparse(a), Vector::Sparse(b)) => {
                let mut out = BTreeMap::new();
                for (k, &v) in a {
                    out.insert(k.clone(), op(v, b.get(k).copied().unwrap_or(0.0)));
                }
                for (k, &v) in b {
                    out.entry(k.clone()).or_insert_with(|| op(0.0, v));
                }
                Ok(Vector::Sparse(out))
            }
            _ => Err(SpaceError::ShapeMismatch {
                reason: format!("{} vector paired with {}", self.shape_name(), other.shape_name()),
            }),
        }
    }
}

/// The bilinear pairing sum(f_i * x_i). Sparse vectors pair over shared keys.
pub fn pairing(f: &Vector, x: &Vector) -> Result<f64, SpaceError> {
    match (f, x) {
        (Vector::Dense(a), Vector::Dense(b)) => {
            if a.len() != b.len() {
                return Err(SpaceError::DimensionMismatch { expected: a.len(), got: b.len() });
            }
            Ok(a.iter().zip(b.iter()).map(|(&p, &q)| p * q).sum())
        }
        (Vector::Sparse(a), Vector::Sparse(b)) => Ok(a
            .iter()
            .filter_map(|(k, &v)| b.get(k).map(|&w| v * w))
            .sum()),
        _ => Err(SpaceError::ShapeMismatch {
            reason: format!("{} functional paired with {} vector", f.shape_name(), x.shape_name()),
        }),
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum SpaceModel {
    NormedL1 { dim: usize },
    NormedLinf { dim: usize },
    SeminormFamily { dim: usize, functionals: Vec<(String, Vector)> },
    SparseProduct { keys: Vec<String> },
}

impl SpaceModel {
    pub fn l1(dim: usize) -> Result<SpaceModel, SpaceError> {
        if dim == 0 {
            return Err(SpaceError::InvalidSpace { reason: "dimension must be positive".into() });
        }
        Ok(SpaceModel::NormedL1 { dim })
    }

    pub fn linf(dim: usize) -> Result<SpaceModel, SpaceError> {
        if dim == 0 {
            return Err(SpaceError::InvalidSpace { reason: "dimension must be positive".into() });
        }
        Ok(SpaceModel::NormedLinf { dim })
    }

    /// A finite family of functionals on a dense space, each inducing the
    /// seminorm |pairing(f, .)|. Labels must be distinct and every
    /// functional must be dense of the stated dimension.
    pub fn seminorm_family(
        dim: usize,
        functionals: Vec<(String, Vector)>,
    ) -> Result<SpaceModel, SpaceError> {
        if dim == 0 {
            return Err(SpaceError::InvalidSpace { reason: "dimension must be positive".into() });
        }
        if functionals.is_empty() {
            return Err(SpaceError::InvalidSpace {
                reason: "a seminorm family needs at least one functional".into(),
            });
        }
        for (label, f) in &functionals {
            match f {
                Vector::Dense(coords) if coords.len() == dim => {}
                Vector::Dense(coords) => {
                    return Err(SpaceError::DimensionMismatch { expected: dim, got: coords.len() })
                }
                Vector::Sparse(_) => {
                    return Err(SpaceError::ShapeMismatch {
                        reason: format!("functional `{label}` is sparse in a dense family"),
                    })
                }
            }
        }
        let mut labels: Vec<&str> = functionals.iter().map(|(l, _)| l.as_str()).collect();
        labels.sort_unstable();
        labels.dedup();
        if labels.len() != functionals.len() {
            return Err(SpaceError::InvalidSpace { reason: "duplicate functional labels".into() });
        }
        Ok(SpaceModel::SeminormFamily { dim, functionals })
    }

    /// A product of scalar lines indexed by string keys, one coordinate
    /// seminorm per key.
    pub fn sparse_product<I, K>(keys: I) -> Result<SpaceModel, SpaceError>
    where
        I: IntoIterator<Item = K>,
        K: Into<String>,
    {
        let mut keys: Vec<String> = keys.into_iter().map(Into::into).collect();
        if keys.is_empty() {
            return Err(SpaceError::InvalidSpace {
                reason: "a product needs at least one key".into(),
            });
        }
        let before = keys.len();
        keys.sort();
        keys.dedup();
        if keys.len() != before {
            return Err(SpaceError::InvalidSpace { reason: "duplicate product keys".into() });
        }
        Ok(SpaceModel::SparseProduct { keys })
    }

    pub fn describe(&self) -> String {
        match self {
            SpaceModel::NormedL1 { dim } => format!("l1({dim})"),
            SpaceModel::NormedLinf { dim } => format!("linf({dim})"),
            SpaceModel::SeminormFamily { dim, functionals } => {
                format!("family({} functionals on dim {dim})", functionals.len())
            }
            SpaceModel::SparseProduct { keys } => format!("product({})", keys.join(",")),
        }
    }

    /// Labels of the seminorms this model carries, in evaluation order.
    pub fn seminorm_labels(&self) -> Vec<String> {
        match self {
            SpaceModel::NormedL1 { .. } => vec!["l1".to_string()],
            SpaceModel::NormedLinf { .. } => vec!["linf".to_string()],
            SpaceModel::SeminormFamily { functionals, .. } => {
                functionals.iter().map(|(l, _)| l.clone()).collect()
            }
            SpaceModel::SparseProduct { keys } => keys.clone(),
        }
    }

    /// Whether the single seminorm (or family) separates points. Only the
    /// two normed models promise that.
    pub fn is_normed(&self) -> bool {
        matches!(self, SpaceModel::NormedL1 { .. } | SpaceModel::NormedLinf { .. })
    }

    pub fn check_vector(&self, v: &Vector) -> Result<(), SpaceError> {
        match (self, v) {
            (SpaceModel::NormedL1 { dim }, Vector::Dense(c))
            | (SpaceModel::NormedLinf { dim }, Vector::Dense(c))
            | (SpaceModel::SeminormFamily { dim, .. }, Vector::Dense(c)) => {
                if c.len() == *dim {
                    Ok(())
                } else {
                    Err(SpaceError::DimensionMismatch { expected: *dim, got: c.len() })
                }
            }
            (SpaceModel::SparseProduct { .. }, Vector::Sparse(_)) => Ok(()),
            _ => Err(SpaceError::ShapeMismatch {
                reason: format!("{} vector in {}", v.shape_name(), self.describe()),
            }),
        }
    }

    pub fn seminorm(&self, label: &str, v: &Vector) -> Result<f64, SpaceError> {
        self.check_vector(v)?;
        let value = match (self, v) {
            (SpaceModel::NormedL1 { .. }, Vector::Dense(c)) => {
                if label != "l1" {
                    return Err(SpaceError::UnknownSeminorm { label: label.into() });
                }
                c.iter().map(|&x| fmath::abs(x)).sum()
            }
            (SpaceModel::NormedLinf { .. }, Vector::Dense(c)) => {
                if label != "linf" {
                    return Err(SpaceError::UnknownSeminorm { label: label.into() });
                }
                c.iter().fold(0.0, |acc, &x| fmath::max(acc, fmath::abs(x)))
            }
            (SpaceModel::SeminormFamily { functionals, .. }, _) => {
                let f = functionals
                    .iter()
                    .find(|(l, _)| l == label)
                    .ok_or_else(|| SpaceError::UnknownSeminorm { label: label.into() })?;
                fmath::abs(pairing(&f.1, v)?)
            }
            (SpaceModel::SparseProduct { keys }, Vector::Sparse(map)) => {
                if !keys.iter().any(|k| k == label) {
                    return Err(SpaceError::UnknownSeminorm { label: label.into() });
                }
                fmath::abs(map.get(label).copied().unwrap_or(0.0))
            }
            _ => unreachable!("check_vector already rejected mismatched shapes"),
        };
        if value.is_finite() {
            Ok(value)
        } else {
            Err(SpaceError::NonFiniteValue { label: label.into() })
        }
    }

    /// The largest seminorm value over the whole family.
    pub fn max_seminorm(&self, v: &Vector) -> Result<f64, SpaceError> {
        let mut worst = 0.0;
        for label in self.seminorm_labels() {
            worst = fmath::max(worst, self.seminorm(&label, v)?);
        }
        Ok(worst)
    }
}
