use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::SimplicialComplex;

/// Real k-cochain: one value per k-simplex in the complex's canonical order.
/// Values on lower simplices refer to the sorted vertex order; values on top
/// cells refer to the cell's orientation.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Cochain {
    pub degree: usize,
    pub values: Vec<f64>,
    #[serde(skip)]
    fingerprint: u64,
}

impl Cochain {
    pub fn zeros(complex: &SimplicialComplex, degree: usize) -> Self {
        Self { degree, values: vec![0.0; complex.count(degree)], fingerprint: complex.fingerprint() }
    }

    pub fn from_values(complex: &SimplicialComplex, degree: usize, values: Vec<f64>) -> Result<Self> {
        if degree > complex.dim() {
            return Err(Error::DegreeMismatch { expected: complex.dim(), found: degree });
        }
        if values.len() != complex.count(degree) {
            return Err(Error::LengthMismatch { expected: complex.count(degree), found: values.len() });
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter("non-finite cochain value".into()));
        }
        Ok(Self { degree, values, fingerprint: complex.fingerprint() })
    }

    /// Internal constructor for values already known to fit.
    pub(crate) fn raw(fingerprint: u64, degree: usize, values: Vec<f64>) -> Self {
        Self { degree, values, fingerprint }
    }

    pub fn fingerprint(&self) -> u64 {
        self.fingerprint
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn belongs_to(&self, complex: &SimplicialComplex) -> bool {
        self.fingerprint == complex.fingerprint() && self.values.len() == complex.count(self.degree)
    }

    pub fn check(&self, complex: &SimplicialComplex, degree: usize) -> Result<()> {
        if self.degree != degree {
            return Err(Error::DegreeMismatch { expected: degree, found: self.degree });
        }
        if !self.belongs_to(complex) {
            return Err(Error::ComplexMismatch);
        }
        Ok(())
    }

    fn same_shape(&self, other: &Self) -> Result<()> {
        if self.degree != other.degree {
            return Err(Error::DegreeMismatch { expected: self.degree, found: other.degree });
        }
        if self.fingerprint != other.fingerprint || self.values.len() != other.values.len() {
            return Err(Error::ComplexMismatch);
        }
        Ok(())
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.same_shape(other)?;
        Ok(self.map2(other, |a, b| a + b))
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.same_shape(other)?;
        Ok(self.map2(other, |a, b| a - b))
    }

    /// self + t·other
    pub fn axpy(&self, t: f64, other: &Self) -> Result<Self> {
        self.same_shape(other)?;
        Ok(self.map2(other, |a, b| a + t * b))
    }

    pub fn scale(&self, t: f64) -> Self {
        Self { values: self.values.iter().map(|v| v * t).collect(), ..self.clone() }
    }

    fn map2(&self, other: &Self, f: impl Fn(f64, f64) -> f64) -> Self {
        Self {
            degree: self.degree,
            values: self.values.iter().zip(&other.values).map(|(&a, &b)| f(a, b)).collect(),
            fingerprint: self.fingerprint,
        }
    }

    pub fn norm_inf(&self) -> f64 {
        self.values.iter().fold(0.0f64, |m, v| m.max(v.abs()))
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(self)?)
    }

    /// Parse `{"degree": k, "values": [...]}` and bind it to `complex`.
    pub fn from_json(complex: &SimplicialComplex, s: &str) -> Result<Self> {
        let c: Cochain = serde_json::from_str(s)?;
        Self::from_values(complex, c.degree, c.values)
    }
}
