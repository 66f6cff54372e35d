use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::fft;
use super::poly::{LaurentPolynomial, MultiIndex};
use crate::error::{Error, Result};

/// Uniform product grid on 𝕋ⁿ with M_l nodes on axis l, stored row-major (last axis fastest).
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "GridRepr")]
pub struct TorusGrid {
    res: Vec<usize>,
}

#[derive(Deserialize)]
struct GridRepr {
    res: Vec<usize>,
}

impl TryFrom<GridRepr> for TorusGrid {
    type Error = Error;
    fn try_from(r: GridRepr) -> Result<Self> {
        TorusGrid::new(r.res)
    }
}

impl TorusGrid {
    pub fn new(res: Vec<usize>) -> Result<Self> {
        if res.is_empty() {
            return Err(Error::InvalidData("grid needs at least one axis".into()));
        }
        if let Some(&m) = res.iter().find(|&&m| m == 0) {
            return Err(Error::UnderResolvedGrid { needed: 1, found: m });
        }
        Ok(TorusGrid { res })
    }

    pub fn uniform(dim: usize, m: usize) -> Self {
        TorusGrid::new(vec![m; dim]).expect("positive resolution")
    }

    pub fn res(&self) -> &[usize] {
        &self.res
    }

    pub fn dim(&self) -> usize {
        self.res.len()
    }

    pub fn len(&self) -> usize {
        self.res.iter().product()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn min_res(&self) -> usize {
        *self.res.iter().min().unwrap()
    }

    /// Angular spacing 2π/M_l.
    pub fn mesh(&self, axis: usize) -> f64 {
        2.0 * PI / self.res[axis] as f64
    }

    pub fn require_min(&self, needed: usize) -> Result<()> {
        let m = self.min_res();
        if m < needed {
            return Err(Error::UnderResolvedGrid { needed, found: m });
        }
        Ok(())
    }

    pub fn check_dim(&self, dim: usize) -> Result<()> {
        if self.dim() != dim {
            return Err(Error::DimensionMismatch { expected: dim, found: self.dim() });
        }
        Ok(())
    }

    pub fn multi_index(&self, mut flat: usize) -> Vec<usize> {
        let mut out = vec![0; self.dim()];
        for l in (0..self.dim()).rev() {
            out[l] = flat % self.res[l];
            flat /= self.res[l];
        }
        out
    }

    pub fn flat_index(&self, idx: &[usize]) -> usize {
        idx.iter().zip(&self.res).fold(0, |acc, (&k, &m)| acc * m + k)
    }

    pub fn angle(&self, axis: usize, k: usize) -> f64 {
        2.0 * PI * k as f64 / self.res[axis] as f64
    }

    pub fn node(&self, flat: usize) -> Vec<Complex64> {
        self.multi_index(flat)
            .iter()
            .enumerate()
            .map(|(l, &k)| Complex64::from_polar(1.0, self.angle(l, k)))
            .collect()
    }

    pub fn nodes(&self) -> Vec<Vec<Complex64>> {
        (0..self.len()).map(|f| self.node(f)).collect()
    }

    /// Flat position of the frequency γ in an FFT array (γ_l taken mod M_l).
    pub fn frequency_slot(&self, exp: &[i32]) -> usize {
        exp.iter()
            .zip(&self.res)
            .fold(0, |acc, (&g, &m)| acc * m + g.rem_euclid(m as i32) as usize)
    }

    /// Signed frequency carried by FFT slot `flat` (representatives in (−M/2, M/2]).
    pub fn slot_frequency(&self, flat: usize) -> Vec<i32> {
        self.multi_index(flat)
            .iter()
            .zip(&self.res)
            .map(|(&k, &m)| if 2 * k > m { k as i32 - m as i32 } else { k as i32 })
            .collect()
    }

    /// Values of `p` at every node, exact up to rounding (aliasing folds exponents mod M).
    pub fn values_of(&self, p: &LaurentPolynomial) -> Result<Vec<Complex64>> {
        self.check_dim(p.dim())?;
        let mut arr = vec![Complex64::default(); self.len()];
        for (e, c) in p.terms() {
            arr[self.frequency_slot(e.entries())] += c;
        }
        fft::synthesize(&mut arr, &self.res);
        Ok(arr)
    }

    /// Values of `p` on the radius-r torus (r·ζ_k).
    pub fn values_on_radius(&self, p: &LaurentPolynomial, radius: f64) -> Result<Vec<Complex64>> {
        let mut arr = vec![Complex64::default(); self.len()];
        self.check_dim(p.dim())?;
        for (e, c) in p.terms() {
            arr[self.frequency_slot(e.entries())] += c * radius.powi(e.total_degree());
        }
        fft::synthesize(&mut arr, &self.res);
        Ok(arr)
    }

    /// Discrete Fourier coefficients (1/N)Σ f(ζ_k) ζ_k^{−γ}, indexed by FFT slot.
    pub fn analyze(&self, samples: &[Complex64]) -> Result<Vec<Complex64>> {
        if samples.len() != self.len() {
            return Err(Error::DimensionMismatch { expected: self.len(), found: samples.len() });
        }
        let mut arr = samples.to_vec();
        fft::analyze(&mut arr, &self.res);
        Ok(arr)
    }

    /// Inverse of [`TorusGrid::analyze`].
    pub fn synthesize(&self, coeffs: &[Complex64]) -> Result<Vec<Complex64>> {
        if coeffs.len() != self.len() {
            return Err(Error::DimensionMismatch { expected: self.len(), found: coeffs.len() });
        }
        let mut arr = coeffs.to_vec();
        fft::synthesize(&mut arr, &self.res);
        Ok(arr)
    }

    /// Equal-weight quadrature of grid samples.
    pub fn mean(&self, samples: &[Complex64]) -> Complex64 {
        samples.iter().sum::<Complex64>() / samples.len() as f64
    }

    /// Samples of the function x ↦ f(x) at every node.
    pub fn sample<F: Fn(&[Complex64]) -> Complex64>(&self, f: F) -> Vec<Complex64> {
        (0..self.len()).map(|k| f(&self.node(k))).collect()
    }

    pub fn exponent_of_slot(&self, flat: usize) -> MultiIndex {
        self.slot_frequency(flat).into()
    }
}
