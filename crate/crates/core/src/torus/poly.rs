use std::collections::btree_map::Entry;
use std::collections::BTreeMap;

use num_complex::Complex64;
use num_traits::Zero;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Exponent vector in ℤⁿ.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct MultiIndex(Vec<i32>);

impl MultiIndex {
    pub fn new(entries: Vec<i32>) -> Result<Self> {
        if entries.is_empty() {
            return Err(Error::InvalidData("multi-index of length zero".into()));
        }
        Ok(MultiIndex(entries))
    }

    pub fn zero(dim: usize) -> Self {
        MultiIndex(vec![0; dim])
    }

    pub fn unit(dim: usize, axis: usize) -> Self {
        let mut e = vec![0; dim];
        e[axis] = 1;
        MultiIndex(e)
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn entries(&self) -> &[i32] {
        &self.0
    }

    pub fn is_natural(&self) -> bool {
        self.0.iter().all(|&e| e >= 0)
    }

    pub fn total_degree(&self) -> i32 {
        self.0.iter().sum()
    }

    pub fn l1(&self) -> i32 {
        self.0.iter().map(|e| e.abs()).sum()
    }

    pub fn add(&self, other: &MultiIndex) -> MultiIndex {
        MultiIndex(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }

    pub fn sub(&self, other: &MultiIndex) -> MultiIndex {
        MultiIndex(self.0.iter().zip(&other.0).map(|(a, b)| a - b).collect())
    }

    pub fn neg(&self) -> MultiIndex {
        MultiIndex(self.0.iter().map(|a| -a).collect())
    }

    /// ∏ z_l^{γ_l}.
    pub fn monomial_at(&self, z: &[Complex64]) -> Result<Complex64> {
        let mut v = Complex64::new(1.0, 0.0);
        for (axis, (&e, &zl)) in self.0.iter().zip(z).enumerate() {
            if e == 0 {
                continue;
            }
            if e < 0 && zl == Complex64::zero() {
                return Err(Error::ZeroToNegativePower { axis });
            }
            v *= zl.powi(e);
        }
        Ok(v)
    }
}

impl From<Vec<i32>> for MultiIndex {
    fn from(v: Vec<i32>) -> Self {
        MultiIndex(v)
    }
}

/// Finitely supported complex coefficients on ℤⁿ. Zero coefficients are never stored.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "PolyRepr", into = "PolyRepr")]
pub struct LaurentPolynomial {
    dim: usize,
    terms: BTreeMap<MultiIndex, Complex64>,
}

#[derive(Serialize, Deserialize)]
struct TermRepr {
    exp: Vec<i32>,
    re: f64,
    im: f64,
}

#[derive(Serialize, Deserialize)]
struct PolyRepr {
    dim: usize,
    terms: Vec<TermRepr>,
}

impl TryFrom<PolyRepr> for LaurentPolynomial {
    type Error = Error;
    fn try_from(r: PolyRepr) -> Result<Self> {
        LaurentPolynomial::from_terms(
            r.dim,
            r.terms.into_iter().map(|t| (t.exp, Complex64::new(t.re, t.im))),
        )
    }
}

impl From<LaurentPolynomial> for PolyRepr {
    fn from(p: LaurentPolynomial) -> Self {
        PolyRepr {
            dim: p.dim,
            terms: p
                .terms
                .into_iter()
                .map(|(e, c)| TermRepr { exp: e.0, re: c.re, im: c.im })
                .collect(),
        }
    }
}

impl LaurentPolynomial {
    pub fn zero(dim: usize) -> Self {
        assert!(dim >= 1, "dimension must be at least 1");
        LaurentPolynomial { dim, terms: BTreeMap::new() }
    }

    pub fn constant(dim: usize, c: Complex64) -> Self {
        let mut p = Self::zero(dim);
        p.add_term(MultiIndex::zero(dim), c);
        p
    }

    pub fn one(dim: usize) -> Self {
        Self::constant(dim, Complex64::new(1.0, 0.0))
    }

    /// The coordinate function z_axis.
    pub fn coordinate(dim: usize, axis: usize) -> Self {
        Self::monomial(MultiIndex::unit(dim, axis), Complex64::new(1.0, 0.0))
    }

    pub fn monomial(exp: MultiIndex, c: Complex64) -> Self {
        let mut p = Self::zero(exp.dim());
        p.add_term(exp, c);
        p
    }

    pub fn from_terms<I, E>(dim: usize, terms: I) -> Result<Self>
    where
        I: IntoIterator<Item = (E, Complex64)>,
        E: Into<Vec<i32>>,
    {
        if dim == 0 {
            return Err(Error::InvalidData("dimension must be at least 1".into()));
        }
        let mut p = Self::zero(dim);
        for (e, c) in terms {
            let e: Vec<i32> = e.into();
            if e.len() != dim {
                return Err(Error::DimensionMismatch { expected: dim, found: e.len() });
            }
            if !c.re.is_finite() || !c.im.is_finite() {
                return Err(Error::InvalidData("non-finite coefficient".into()));
            }
            p.add_term(MultiIndex(e), c);
        }
        Ok(p)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&MultiIndex, &Complex64)> {
        self.terms.iter()
    }

    pub fn coefficient(&self, exp: &[i32]) -> Complex64 {
        self.terms.get(&MultiIndex(exp.to_vec())).copied().unwrap_or_default()
    }

    /// Accumulates `c` onto the coefficient at `exp`, dropping it if the sum is zero.
    pub fn add_term(&mut self, exp: MultiIndex, c: Complex64) {
        assert_eq!(exp.dim(), self.dim, "exponent dimension");
        match self.terms.entry(exp) {
            Entry::Vacant(v) => {
                if c != Complex64::zero() {
                    v.insert(c);
                }
            }
            Entry::Occupied(mut o) => {
                *o.get_mut() += c;
                if *o.get() == Complex64::zero() {
                    o.remove();
                }
            }
        }
    }

    fn check_dim(&self, other: &Self) -> Result<()> {
        if self.dim != other.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, found: other.dim });
        }
        Ok(())
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_dim(other)?;
        let mut out = self.clone();
        for (e, c) in &other.terms {
            out.add_term(e.clone(), *c);
        }
        Ok(out)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.add(&other.scale(Complex64::new(-1.0, 0.0)))
    }

    pub fn scale(&self, c: Complex64) -> Self {
        let mut out = Self::zero(self.dim);
        for (e, v) in &self.terms {
            out.add_term(e.clone(), v * c);
        }
        out
    }

    /// Coefficient convolution.
    pub fn mul(&self, other: &Self) -> Result<Self> {
        self.check_dim(other)?;
        let mut acc: BTreeMap<MultiIndex, Complex64> = BTreeMap::new();
        for (ea, ca) in &self.terms {
            for (eb, cb) in &other.terms {
                *acc.entry(ea.add(eb)).or_insert(Complex64::zero()) += ca * cb;
            }
        }
        acc.retain(|_, c| *c != Complex64::zero());
        Ok(LaurentPolynomial { dim: self.dim, terms: acc })
    }

    /// Product keeping only terms of total degree ≤ `max_degree`; meant for analytic factors.
    pub fn mul_truncated(&self, other: &Self, max_degree: i32) -> Result<Self> {
        self.check_dim(other)?;
        let mut acc: BTreeMap<MultiIndex, Complex64> = BTreeMap::new();
        for (ea, ca) in &self.terms {
            let da = ea.total_degree();
            for (eb, cb) in &other.terms {
                if da + eb.total_degree() > max_degree {
                    continue;
                }
                *acc.entry(ea.add(eb)).or_insert(Complex64::zero()) += ca * cb;
            }
        }
        acc.retain(|_, c| *c != Complex64::zero());
        Ok(LaurentPolynomial { dim: self.dim, terms: acc })
    }

    /// Coefficients c_γ ↦ conj(c_γ) at −γ: on the torus this is ζ ↦ conj(p(ζ)).
    pub fn conj_reflect(&self) -> Self {
        LaurentPolynomial {
            dim: self.dim,
            terms: self.terms.iter().map(|(e, c)| (e.neg(), c.conj())).collect(),
        }
    }

    /// Laurent expansion of |p|² on the torus.
    pub fn mod_squared(&self) -> Self {
        self.mul(&self.conj_reflect()).expect("same dimension")
    }

    pub fn evaluate(&self, z: &[Complex64]) -> Result<Complex64> {
        if z.len() != self.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, found: z.len() });
        }
        let mut s = Complex64::zero();
        for (e, c) in &self.terms {
            s += c * e.monomial_at(z)?;
        }
        Ok(s)
    }

    pub fn is_analytic(&self) -> bool {
        self.terms.keys().all(MultiIndex::is_natural)
    }

    /// True when c_{−γ} = conj(c_γ) for every γ, up to `tol` (0 means exact).
    pub fn is_hermitian_symmetric(&self, tol: f64) -> bool {
        self.terms.iter().all(|(e, c)| {
            let mirror = self.terms.get(&e.neg()).copied().unwrap_or_default();
            (mirror - c.conj()).norm() <= tol
        })
    }

    /// Largest total degree of an analytic polynomial (0 for the zero polynomial).
    pub fn total_degree(&self) -> i32 {
        self.terms.keys().map(MultiIndex::total_degree).max().unwrap_or(0).max(0)
    }

    /// max |γ_l| over the support, per axis.
    pub fn max_abs_exponents(&self) -> Vec<i32> {
        let mut m = vec![0; self.dim];
        for e in self.terms.keys() {
            for (l, &x) in e.entries().iter().enumerate() {
                m[l] = m[l].max(x.abs());
            }
        }
        m
    }

    pub fn l1_norm(&self) -> f64 {
        self.terms.values().map(|c| c.norm()).sum()
    }

    /// Σ |c_γ| R^{|γ|₁}, a bound for sup |p| on the radius-R polydisc.
    pub fn majorant(&self, radius: f64) -> f64 {
        self.terms
            .iter()
            .map(|(e, c)| c.norm() * radius.powi(e.total_degree()))
            .sum()
    }

    /// Per-axis bounds on |∂p/∂z_l| over the closed radius-R polydisc of an analytic p.
    pub fn derivative_bounds(&self, radius: f64) -> Vec<f64> {
        let mut out = vec![0.0; self.dim];
        for (e, c) in &self.terms {
            let d = e.total_degree();
            for (l, &g) in e.entries().iter().enumerate() {
                if g > 0 {
                    out[l] += c.norm() * g as f64 * radius.powi(d - 1);
                }
            }
        }
        out
    }

    /// Lipschitz constant of ζ ↦ p(ζ) on the torus along axis l: Σ |c_γ||γ_l|.
    pub fn torus_lipschitz(&self) -> Vec<f64> {
        let mut out = vec![0.0; self.dim];
        for (e, c) in &self.terms {
            for (l, &g) in e.entries().iter().enumerate() {
                out[l] += c.norm() * g.unsigned_abs() as f64;
            }
        }
        out
    }

    /// p(R z): coefficients scaled by R^{|γ|}.
    pub fn dilate(&self, radius: f64) -> Self {
        LaurentPolynomial {
            dim: self.dim,
            terms: self
                .terms
                .iter()
                .map(|(e, c)| (e.clone(), c * radius.powi(e.total_degree())))
                .filter(|(_, c)| *c != Complex64::zero())
                .collect(),
        }
    }

    /// ∂p/∂z_axis.
    pub fn derivative(&self, axis: usize) -> Self {
        let mut out = Self::zero(self.dim);
        for (e, c) in &self.terms {
            let g = e.entries()[axis];
            if g != 0 {
                let mut ne = e.0.clone();
                ne[axis] -= 1;
                out.add_term(MultiIndex(ne), c * g as f64);
            }
        }
        out
    }

    /// Drops terms with |c| ≤ `tol`.
    pub fn pruned(&self, tol: f64) -> Self {
        LaurentPolynomial {
            dim: self.dim,
            terms: self.terms.iter().filter(|(_, c)| c.norm() > tol).map(|(e, c)| (e.clone(), *c)).collect(),
        }
    }
}

/// Plain coefficient convolution.
pub fn laurent_mul(a: &LaurentPolynomial, b: &LaurentPolynomial) -> Result<LaurentPolynomial> {
    a.mul(b)
}

pub fn mod_squared(p: &LaurentPolynomial) -> LaurentPolynomial {
    p.mod_squared()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn two_plus_z1() -> LaurentPolynomial {
        LaurentPolynomial::from_terms(2, [(vec![0, 0], c(2.0, 0.0)), (vec![1, 0], c(1.0, 0.0))]).unwrap()
    }

    #[test]
    fn unit_times_unit() {
        let one = LaurentPolynomial::one(2);
        assert_eq!(laurent_mul(&one, &one).unwrap(), one);
    }

    #[test]
    fn exponent_cancellation() {
        let z = LaurentPolynomial::coordinate(2, 0);
        let zb = z.conj_reflect();
        let prod = z.mul(&zb).unwrap();
        assert_eq!(prod.len(), 1);
        assert_eq!(prod.coefficient(&[0, 0]), c(1.0, 0.0));
    }

    #[test]
    fn two_plus_z_times_conjugate() {
        let p = two_plus_z1();
        let q = p.conj_reflect();
        let prod = laurent_mul(&p, &q).unwrap();
        assert_eq!(prod.len(), 3);
        assert_eq!(prod.coefficient(&[0, 0]), c(5.0, 0.0));
        assert_eq!(prod.coefficient(&[1, 0]), c(2.0, 0.0));
        assert_eq!(prod.coefficient(&[-1, 0]), c(2.0, 0.0));
        assert_eq!(prod, mod_squared(&p));
    }

    #[test]
    fn mod_squared_of_monomial_is_one() {
        let p = LaurentPolynomial::monomial(vec![1, 1].into(), c(1.0, 0.0));
        assert_eq!(p.mod_squared(), LaurentPolynomial::one(2));
        assert_eq!(LaurentPolynomial::one(3).mod_squared(), LaurentPolynomial::one(3));
    }

    #[test]
    fn dimension_mismatch() {
        let a = LaurentPolynomial::one(1);
        let b = LaurentPolynomial::one(2);
        assert!(matches!(a.mul(&b), Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn evaluation_examples() {
        assert_eq!(LaurentPolynomial::one(2).evaluate(&[c(0.3, 0.1), c(-2.0, 0.0)]).unwrap(), c(1.0, 0.0));
        assert_eq!(two_plus_z1().evaluate(&[c(0.5, 0.0), c(0.0, 0.0)]).unwrap(), c(2.5, 0.0));
        let zb = LaurentPolynomial::monomial(vec![-1, 0].into(), c(1.0, 0.0));
        let v = zb.evaluate(&[c(0.0, 1.0), c(1.0, 0.0)]).unwrap();
        assert!((v - c(0.0, -1.0)).norm() < 1e-15);
        assert!(matches!(
            zb.evaluate(&[c(0.0, 0.0), c(1.0, 0.0)]),
            Err(Error::ZeroToNegativePower { axis: 0 })
        ));
    }

    #[test]
    fn cancelling_terms_are_removed() {
        let mut p = two_plus_z1();
        p.add_term(vec![1, 0].into(), c(-1.0, 0.0));
        assert_eq!(p.len(), 1);
        assert!(p.is_analytic());
    }

    #[test]
    fn json_roundtrip() {
        let p = two_plus_z1().mod_squared();
        let s = serde_json::to_string(&p).unwrap();
        assert!(s.starts_with("{\"dim\":2,\"terms\":[{\"exp\":"));
        let q: LaurentPolynomial = serde_json::from_str(&s).unwrap();
        assert_eq!(p, q);
        let bad = r#"{"dim":2,"terms":[{"exp":[1],"re":1.0,"im":0.0}]}"#;
        assert!(serde_json::from_str::<LaurentPolynomial>(bad).is_err());
    }

    #[test]
    fn derivative_and_bounds() {
        let p = LaurentPolynomial::from_terms(2, [(vec![2, 1], c(3.0, 0.0)), (vec![0, 0], c(1.0, 0.0))]).unwrap();
        let d0 = p.derivative(0);
        assert_eq!(d0.coefficient(&[1, 1]), c(6.0, 0.0));
        assert_eq!(p.derivative_bounds(1.0), vec![6.0, 3.0]);
        assert_eq!(p.torus_lipschitz(), vec![6.0, 3.0]);
    }

    #[test]
    fn truncated_product_drops_high_degree() {
        let p = two_plus_z1();
        let sq = p.mul_truncated(&p, 1).unwrap();
        assert_eq!(sq.coefficient(&[0, 0]), c(4.0, 0.0));
        assert_eq!(sq.coefficient(&[1, 0]), c(4.0, 0.0));
        assert_eq!(sq.coefficient(&[2, 0]), c(0.0, 0.0));
    }
}
