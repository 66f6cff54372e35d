use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::grid::TorusGrid;
use crate::error::{Error, Result};

/// A point of ℂⁿ, typically inside the unit polydisc.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct PolydiscPoint {
    #[serde(with = "crate::serde_complex::vec")]
    coords: Vec<Complex64>,
}

impl PolydiscPoint {
    pub fn new(coords: Vec<Complex64>) -> Result<Self> {
        if coords.is_empty() {
            return Err(Error::InvalidData("point needs at least one coordinate".into()));
        }
        if coords.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::InvalidData("non-finite coordinate".into()));
        }
        Ok(PolydiscPoint { coords })
    }

    pub fn real(coords: &[f64]) -> Self {
        Self::new(coords.iter().map(|&x| Complex64::new(x, 0.0)).collect()).expect("valid point")
    }

    pub fn origin(dim: usize) -> Self {
        Self::new(vec![Complex64::default(); dim]).expect("valid point")
    }

    pub fn coords(&self) -> &[Complex64] {
        &self.coords
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    /// max_l |x_l|.
    pub fn radius(&self) -> f64 {
        self.coords.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn is_interior(&self) -> bool {
        self.radius() < 1.0
    }

    /// max_l |x_l − y_l|.
    pub fn distance(&self, other: &PolydiscPoint) -> f64 {
        self.coords.iter().zip(&other.coords).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max)
    }
}

/// ∏_l 1/(1 − x_l conj(y_l)); Hermitian in (x, y).
pub fn szego_kernel(x: &PolydiscPoint, y: &PolydiscPoint) -> Result<Complex64> {
    if x.dim() != y.dim() {
        return Err(Error::DimensionMismatch { expected: x.dim(), found: y.dim() });
    }
    let mut v = Complex64::new(1.0, 0.0);
    for (axis, (a, b)) in x.coords.iter().zip(&y.coords).enumerate() {
        let product = a.norm() * b.norm();
        if product >= 1.0 {
            return Err(Error::KernelUndefined { axis, product });
        }
        v /= Complex64::new(1.0, 0.0) - a * b.conj();
    }
    Ok(v)
}

/// Poisson integral of grid samples at an interior point, normalized per axis so
/// constants are reproduced exactly.
pub fn poisson_eval(samples: &[Complex64], x: &PolydiscPoint, grid: &TorusGrid) -> Result<Complex64> {
    grid.check_dim(x.dim())?;
    grid.require_min(4)?;
    if samples.len() != grid.len() {
        return Err(Error::DimensionMismatch { expected: grid.len(), found: samples.len() });
    }
    if !x.is_interior() {
        return Err(Error::OutsidePolydisc);
    }
    let weights: Vec<Vec<f64>> = (0..grid.dim())
        .map(|l| {
            let xl = x.coords[l];
            let num = 1.0 - xl.norm_sqr();
            let w: Vec<f64> = (0..grid.res()[l])
                .map(|k| {
                    let zeta = Complex64::from_polar(1.0, grid.angle(l, k));
                    num / (Complex64::new(1.0, 0.0) - zeta.conj() * xl).norm_sqr()
                })
                .collect();
            let total: f64 = w.iter().sum();
            w.into_iter().map(|v| v / total).collect()
        })
        .collect();
    let mut acc = Complex64::default();
    for (flat, s) in samples.iter().enumerate() {
        let idx = grid.multi_index(flat);
        let w: f64 = idx.iter().enumerate().map(|(l, &k)| weights[l][k]).product();
        acc += s * w;
    }
    Ok(acc)
}
