//! Finite-dimensional models of weighted Hardy spaces: monomial Gram matrices,
//! truncated reproducing kernels, and the closed form for zero-free analytic weights.

use std::collections::BTreeSet;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::linalg::{hermitian_defect, CMatrix, HermitianFactor};
use crate::serde_complex;
use crate::torus::{szego_kernel, CertifiedPolynomial, LaurentPolynomial, MultiIndex, PolydiscPoint};

pub const MAX_CONDITION: f64 = 1e12;

/// Algebra generated by analytic monomials, truncated at total degree `degree_cap`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AlgebraSpec {
    pub dim: usize,
    pub generators: Vec<LaurentPolynomial>,
    pub degree_cap: u32,
}

impl AlgebraSpec {
    /// A(𝔻ⁿ): generated by the coordinates.
    pub fn full(dim: usize, degree_cap: u32) -> Self {
        AlgebraSpec {
            dim,
            generators: (0..dim).map(|l| LaurentPolynomial::coordinate(dim, l)).collect(),
            degree_cap,
        }
    }

    pub fn with_generators(dim: usize, generators: Vec<LaurentPolynomial>, degree_cap: u32) -> Result<Self> {
        let spec = AlgebraSpec { dim, generators, degree_cap };
        spec.generator_exponents()?;
        Ok(spec)
    }

    pub fn is_full(&self) -> bool {
        let exps = match self.generator_exponents() {
            Ok(e) => e,
            Err(_) => return false,
        };
        (0..self.dim).all(|l| exps.contains(&MultiIndex::unit(self.dim, l)))
    }

    /// Generators must be single analytic monomials of positive degree.
    fn generator_exponents(&self) -> Result<BTreeSet<MultiIndex>> {
        let mut out = BTreeSet::new();
        for g in &self.generators {
            if g.dim() != self.dim {
                return Err(Error::DimensionMismatch { expected: self.dim, found: g.dim() });
            }
            let mut terms = g.terms();
            match (terms.next(), terms.next()) {
                (Some((e, _)), None) if e.is_natural() && e.total_degree() > 0 => {
                    out.insert(e.clone());
                }
                _ => {
                    return Err(Error::InvalidData(
                        "algebra generators must be single analytic monomials of positive degree".into(),
                    ))
                }
            }
        }
        Ok(out)
    }

    /// Products of generators with total degree ≤ cap, in graded-lex order.
    pub fn basis(&self) -> Result<Vec<MultiIndex>> {
        let gens = self.generator_exponents()?;
        let cap = self.degree_cap as i32;
        let mut seen: BTreeSet<MultiIndex> = BTreeSet::new();
        let mut frontier = vec![MultiIndex::zero(self.dim)];
        seen.insert(MultiIndex::zero(self.dim));
        while let Some(e) = frontier.pop() {
            for g in &gens {
                let next = e.add(g);
                if next.total_degree() <= cap && seen.insert(next.clone()) {
                    frontier.push(next);
                }
            }
        }
        let mut basis: Vec<MultiIndex> = seen.into_iter().collect();
        basis.sort_by(|a, b| a.total_degree().cmp(&b.total_degree()).then_with(|| b.cmp(a)));
        Ok(basis)
    }
}

#[derive(Clone, Debug)]
pub struct WeightedGram {
    pub basis: Vec<MultiIndex>,
    pub gram: CMatrix,
    pub weight: LaurentPolynomial,
}

/// gram[α][β] = ⟨z^α, z^β⟩ = coefficient of the weight at β − α.
pub fn gram_matrix(alg: &AlgebraSpec, weight: &LaurentPolynomial) -> Result<WeightedGram> {
    if weight.dim() != alg.dim {
        return Err(Error::DimensionMismatch { expected: alg.dim, found: weight.dim() });
    }
    let scale = weight.l1_norm().max(1.0);
    if !weight.is_hermitian_symmetric(1e-12 * scale) {
        return Err(Error::NotHermitianSymmetric);
    }
    let mean = weight.coefficient(&vec![0; alg.dim]);
    if !(mean.re > 0.0) {
        return Err(Error::InvalidData("weight mean must be positive".into()));
    }
    let basis = alg.basis()?;
    let n = basis.len();
    let gram = CMatrix::from_fn(n, n, |a, b| weight.coefficient(basis[b].sub(&basis[a]).entries()));
    Ok(WeightedGram { basis, gram, weight: weight.clone() })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Provenance {
    Truncated { degree: u32 },
    ClosedForm,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TruncationDiagnostics {
    pub basis_size: usize,
    pub condition: f64,
    pub reproducing_residual: f64,
}

#[derive(Clone, Debug)]
pub struct KernelGram {
    pub nodes: Vec<PolydiscPoint>,
    pub entries: CMatrix,
    pub provenance: Provenance,
    pub weight_hash: String,
    pub diagnostics: Option<TruncationDiagnostics>,
}

#[derive(Serialize, Deserialize)]
struct KernelGramRepr {
    nodes: Vec<PolydiscPoint>,
    #[serde(with = "serde_complex::vec2")]
    entries: Vec<Vec<Complex64>>,
    provenance: Provenance,
    weight_hash: String,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    diagnostics: Option<TruncationDiagnostics>,
}

impl Serialize for KernelGram {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let n = self.entries.nrows();
        KernelGramRepr {
            nodes: self.nodes.clone(),
            entries: (0..n).map(|j| (0..n).map(|k| self.entries[(j, k)]).collect()).collect(),
            provenance: self.provenance.clone(),
            weight_hash: self.weight_hash.clone(),
            diagnostics: self.diagnostics.clone(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for KernelGram {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let r = KernelGramRepr::deserialize(d)?;
        let n = r.entries.len();
        if r.entries.iter().any(|row| row.len() != n) || r.nodes.len() != n {
            return Err(serde::de::Error::custom("kernel gram must be square and match the nodes"));
        }
        Ok(KernelGram {
            nodes: r.nodes,
            entries: CMatrix::from_fn(n, n, |j, k| r.entries[j][k]),
            provenance: r.provenance,
            weight_hash: r.weight_hash,
            diagnostics: r.diagnostics,
        })
    }
}

/// sha256 of the canonical JSON encoding of a weight.
pub fn weight_hash(weight: &LaurentPolynomial) -> String {
    let json = serde_json::to_vec(weight).expect("polynomials serialize");
    hex::encode(Sha256::digest(&json))
}

fn check_nodes(dim: usize, nodes: &[PolydiscPoint]) -> Result<()> {
    for x in nodes {
        if x.dim() != dim {
            return Err(Error::DimensionMismatch { expected: dim, found: x.dim() });
        }
        if !x.is_interior() {
            return Err(Error::OutsidePolydisc);
        }
    }
    Ok(())
}

/// Kernel entries from the Riesz representatives of point evaluation in the truncated
/// space: with v(x) = (x^α)_α and G the Gram matrix, entry(j,k) = v(X_k)^H G⁻¹ v(X_j).
pub fn kernel_gram_truncated(wg: &WeightedGram, nodes: &[PolydiscPoint]) -> Result<KernelGram> {
    check_nodes(wg.weight.dim(), nodes)?;
    let factor = HermitianFactor::new(&wg.gram, MAX_CONDITION)?;
    let b = wg.basis.len();
    let n = nodes.len();
    let mut v = CMatrix::zeros(b, n);
    for (j, x) in nodes.iter().enumerate() {
        for (a, e) in wg.basis.iter().enumerate() {
            v[(a, j)] = e.monomial_at(x.coords())?;
        }
    }
    let u = factor.solve(&v);
    let residual = (&wg.gram * &u - &v).norm() / v.norm().max(1.0);
    let vhu = v.adjoint() * &u;
    let mut entries = vhu.transpose();
    // symmetrize away rounding; the exact matrix is Hermitian
    entries = (&entries + entries.adjoint()) * Complex64::new(0.5, 0.0);
    let degree = wg.basis.iter().map(|e| e.total_degree()).max().unwrap_or(0) as u32;
    Ok(KernelGram {
        nodes: nodes.to_vec(),
        entries,
        provenance: Provenance::Truncated { degree },
        weight_hash: weight_hash(&wg.weight),
        diagnostics: Some(TruncationDiagnostics {
            basis_size: b,
            condition: factor.condition,
            reproducing_residual: residual,
        }),
    })
}

/// Convenience: full algebra, weight |p|², degree cap `d`.
pub fn kernel_gram_for_weight(p: &LaurentPolynomial, d: u32, nodes: &[PolydiscPoint]) -> Result<KernelGram> {
    let alg = AlgebraSpec::full(p.dim(), d);
    let wg = gram_matrix(&alg, &p.mod_squared())?;
    kernel_gram_truncated(&wg, nodes)
}

/// entry(j,k) = ∏_l 1/(1 − X_{j,l} conj X_{k,l}) / (p(X_j) conj p(X_k)) for p zero-free on
/// a closed polydisc of radius ≥ 1 and the full algebra.
pub fn kernel_gram_closed_form(p: &CertifiedPolynomial, nodes: &[PolydiscPoint]) -> Result<KernelGram> {
    if p.radius() < 1.0 {
        return Err(Error::NotCertified(format!("radius {} < 1", p.radius())));
    }
    let poly = p.poly();
    check_nodes(poly.dim(), nodes)?;
    let vals: Vec<Complex64> = nodes.iter().map(|x| poly.evaluate(x.coords())).collect::<Result<_>>()?;
    let n = nodes.len();
    let mut entries = CMatrix::zeros(n, n);
    for j in 0..n {
        for k in 0..n {
            entries[(j, k)] = szego_kernel(&nodes[j], &nodes[k])? / (vals[j] * vals[k].conj());
        }
    }
    Ok(KernelGram {
        nodes: nodes.to_vec(),
        entries,
        provenance: Provenance::ClosedForm,
        weight_hash: weight_hash(&poly.mod_squared()),
        diagnostics: None,
    })
}

/// Classical Szegő gram [∏ 1/(1 − X_j conj X_k)].
pub fn szego_gram(nodes: &[PolydiscPoint]) -> Result<KernelGram> {
    let dim = nodes.first().map(|x| x.dim()).unwrap_or(1);
    check_nodes(dim, nodes)?;
    let n = nodes.len();
    let mut entries = CMatrix::zeros(n, n);
    for j in 0..n {
        for k in 0..n {
            entries[(j, k)] = szego_kernel(&nodes[j], &nodes[k])?;
        }
    }
    Ok(KernelGram {
        nodes: nodes.to_vec(),
        entries,
        provenance: Provenance::ClosedForm,
        weight_hash: weight_hash(&LaurentPolynomial::one(dim)),
        diagnostics: None,
    })
}

impl KernelGram {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn hermitian_defect(&self) -> f64 {
        hermitian_defect(&self.entries)
    }
}
