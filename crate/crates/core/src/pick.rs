//! Pick matrices, PSD testing, weight families and the refutation search.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hardy::{kernel_gram_closed_form, kernel_gram_for_weight, KernelGram, Provenance};
use crate::linalg::{hermitian_defect, hermitian_eigen, max_abs, trace_re, CMatrix};
use crate::modulus::exp_truncated;
use crate::serde_complex;
use crate::torus::{
    certify_nonvanishing, torus_lower_bound, CertifiedPolynomial, LaurentPolynomial, MarginPolicy, MultiIndex,
    Nonvanishing, PolydiscPoint, TorusGrid,
};

pub const DEFAULT_TOL: f64 = 1e-9;

/// Nodes X_j in 𝔻ⁿ with targets w_j in 𝔻.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "DataRepr", into = "DataRepr")]
pub struct InterpolationData {
    n: usize,
    radius: f64,
    nodes: Vec<PolydiscPoint>,
    targets: Vec<Complex64>,
}

#[derive(Serialize, Deserialize)]
struct DataRepr {
    n: usize,
    #[serde(rename = "R", default = "default_radius")]
    radius: f64,
    nodes: Vec<PolydiscPoint>,
    #[serde(with = "serde_complex::vec")]
    targets: Vec<Complex64>,
}

fn default_radius() -> f64 {
    1.0
}

impl TryFrom<DataRepr> for InterpolationData {
    type Error = Error;
    fn try_from(r: DataRepr) -> Result<Self> {
        let mut d = InterpolationData::new(r.nodes, r.targets)?;
        if d.n != r.n {
            return Err(Error::DimensionMismatch { expected: r.n, found: d.n });
        }
        d = d.with_radius(r.radius)?;
        Ok(d)
    }
}

impl From<InterpolationData> for DataRepr {
    fn from(d: InterpolationData) -> Self {
        DataRepr { n: d.n, radius: d.radius, nodes: d.nodes, targets: d.targets }
    }
}

impl InterpolationData {
    pub fn new(nodes: Vec<PolydiscPoint>, targets: Vec<Complex64>) -> Result<Self> {
        if nodes.is_empty() {
            return Err(Error::InvalidData("no interpolation nodes".into()));
        }
        if nodes.len() != targets.len() {
            return Err(Error::InvalidData(format!("{} nodes but {} targets", nodes.len(), targets.len())));
        }
        let n = nodes[0].dim();
        for x in &nodes {
            if x.dim() != n {
                return Err(Error::DimensionMismatch { expected: n, found: x.dim() });
            }
            if !x.is_interior() {
                return Err(Error::OutsidePolydisc);
            }
        }
        for (j, w) in targets.iter().enumerate() {
            if !(w.norm() < 1.0) {
                return Err(Error::InvalidData(format!("target {j} has modulus {} >= 1", w.norm())));
            }
        }
        for j in 0..nodes.len() {
            for k in j + 1..nodes.len() {
                if nodes[j].distance(&nodes[k]) == 0.0 {
                    return Err(Error::DuplicateNodes(j, k));
                }
            }
        }
        Ok(InterpolationData { n, radius: 1.0, nodes, targets })
    }

    pub fn with_radius(mut self, radius: f64) -> Result<Self> {
        if !(radius >= 1.0 && radius.is_finite()) {
            return Err(Error::InvalidData(format!("R = {radius} must be >= 1")));
        }
        self.radius = radius;
        Ok(self)
    }

    /// Targets are not range-checked: scaled problems may exceed the disc.
    pub fn with_targets_unchecked(&self, targets: Vec<Complex64>) -> Self {
        InterpolationData { targets, ..self.clone() }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn nodes(&self) -> &[PolydiscPoint] {
        &self.nodes
    }

    pub fn targets(&self) -> &[Complex64] {
        &self.targets
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }
}

/// [(1 − w_j conj w_k)·kg(j,k)].
pub fn assemble_pick_matrix(data: &InterpolationData, kg: &KernelGram) -> Result<CMatrix> {
    if kg.nodes.as_slice() != data.nodes() {
        return Err(Error::NodeMismatch);
    }
    let w = data.targets();
    let n = w.len();
    Ok(CMatrix::from_fn(n, n, |j, k| (Complex64::new(1.0, 0.0) - w[j] * w[k].conj()) * kg.entries[(j, k)]))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum PsdOutcome {
    Psd {
        min_eigenvalue: f64,
    },
    Refuted {
        min_eigenvalue: f64,
        #[serde(with = "serde_complex::vec")]
        eigenvector: Vec<Complex64>,
        residual: f64,
    },
}

impl PsdOutcome {
    pub fn is_psd(&self) -> bool {
        matches!(self, PsdOutcome::Psd { .. })
    }

    pub fn min_eigenvalue(&self) -> f64 {
        match self {
            PsdOutcome::Psd { min_eigenvalue } | PsdOutcome::Refuted { min_eigenvalue, .. } => *min_eigenvalue,
        }
    }
}

/// PSD iff λ_min ≥ −tol·max(1, trace).
pub fn psd_test(m: &CMatrix, tol: f64) -> Result<PsdOutcome> {
    if m.nrows() != m.ncols() {
        return Err(Error::InvalidData("matrix is not square".into()));
    }
    let defect = hermitian_defect(m);
    if defect > 1e-12 * max_abs(m).max(1.0) {
        return Err(Error::NotHermitian(defect));
    }
    let (vals, vecs) = hermitian_eigen(m);
    let lmin = vals[0];
    if lmin >= -tol * trace_re(m).max(1.0) {
        return Ok(PsdOutcome::Psd { min_eigenvalue: lmin });
    }
    let v = vecs.column(0).into_owned();
    let residual = (m * &v - &v * Complex64::new(lmin, 0.0)).norm();
    Ok(PsdOutcome::Refuted { min_eigenvalue: lmin, eigenvector: v.iter().copied().collect(), residual })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, PartialOrd, Ord, Hash)]
#[serde(rename_all = "snake_case")]
pub enum FamilyKind {
    #[serde(rename = "pR")]
    PR,
    Mccullough,
    Both,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FamilyParams {
    pub kind: FamilyKind,
    pub dim: usize,
    #[serde(rename = "R")]
    pub radius: f64,
    pub budget: usize,
    pub seed: u64,
    pub max_degree: u32,
}

impl FamilyParams {
    pub fn new(kind: FamilyKind, dim: usize, radius: f64, budget: usize, seed: u64) -> Self {
        FamilyParams { kind, dim, radius, budget, seed, max_degree: 3 }
    }
}

/// A weight emitted by a family generator.
#[derive(Clone, Debug)]
pub enum Weight {
    /// Zero-free on the closed radius-R polydisc.
    PR(CertifiedPolynomial),
    /// Zero-free on 𝕋ⁿ with a verified zero inside 𝔻ⁿ.
    Mccullough {
        poly: LaurentPolynomial,
        torus_bound: f64,
        #[allow(dead_code)]
        zero: Vec<Complex64>,
    },
}

impl Weight {
    pub fn poly(&self) -> &LaurentPolynomial {
        match self {
            Weight::PR(p) => p.poly(),
            Weight::Mccullough { poly, .. } => poly,
        }
    }

    pub fn family(&self) -> FamilyKind {
        match self {
            Weight::PR(_) => FamilyKind::PR,
            Weight::Mccullough { .. } => FamilyKind::Mccullough,
        }
    }
}

/// Deterministic weight stream; rejected candidates are counted in `rejected`.
pub struct FamilyStream {
    kind: FamilyKind,
    dim: usize,
    radius: f64,
    max_degree: u32,
    rng: ChaCha8Rng,
    alt_rng: ChaCha8Rng,
    emitted: usize,
    emitted_pr: usize,
    emitted_mc: usize,
    pub rejected: usize,
    grid: TorusGrid,
    policy: MarginPolicy,
}

pub fn generate_family(params: &FamilyParams) -> Result<FamilyStream> {
    if params.dim == 0 {
        return Err(Error::InvalidData("dimension must be positive".into()));
    }
    if params.kind != FamilyKind::Mccullough && !(params.radius >= 1.0) {
        return Err(Error::InvalidData(format!("R = {} must be >= 1", params.radius)));
    }
    let res = match params.dim {
        1 => 256,
        2 => 48,
        _ => 16,
    };
    Ok(FamilyStream {
        kind: params.kind,
        dim: params.dim,
        radius: params.radius,
        max_degree: params.max_degree.max(1),
        rng: ChaCha8Rng::seed_from_u64(params.seed),
        alt_rng: ChaCha8Rng::seed_from_u64(params.seed ^ 0x9e37_79b9_7f4a_7c15),
        emitted: 0,
        emitted_pr: 0,
        emitted_mc: 0,
        rejected: 0,
        grid: TorusGrid::uniform(params.dim, res),
        policy: MarginPolicy { max_cells: 20_000, ..MarginPolicy::default() },
    })
}

fn random_disc(rng: &mut ChaCha8Rng, radius: f64) -> Complex64 {
    let r = radius * rng.gen::<f64>().sqrt();
    Complex64::from_polar(r, 2.0 * PI * rng.gen::<f64>())
}

fn random_unimodular(rng: &mut ChaCha8Rng) -> Complex64 {
    Complex64::from_polar(1.0, 2.0 * PI * rng.gen::<f64>())
}

/// Random analytic polynomial with terms of total degree 1..=deg and coefficient
/// moduli summing to at most `mass`.
fn random_analytic(rng: &mut ChaCha8Rng, dim: usize, deg: u32, mass: f64) -> LaurentPolynomial {
    let mut exps = Vec::new();
    let mut e = vec![0i32; dim];
    loop {
        let d: i32 = e.iter().sum();
        if d >= 1 && d <= deg as i32 {
            exps.push(e.clone());
        }
        let mut l = 0;
        loop {
            if l == dim {
                break;
            }
            e[l] += 1;
            if e[l] <= deg as i32 {
                break;
            }
            e[l] = 0;
            l += 1;
        }
        if l == dim {
            break;
        }
    }
    let raw: Vec<Complex64> = exps.iter().map(|_| random_disc(rng, 1.0)).collect();
    let total: f64 = raw.iter().map(|c| c.norm()).sum::<f64>().max(1e-300);
    let share = mass * rng.gen::<f64>() / total;
    LaurentPolynomial::from_terms(dim, exps.into_iter().zip(raw).map(|(e, c)| (e, c * share))).expect("valid")
}

impl FamilyStream {
    fn next_pr(&mut self) -> Weight {
        loop {
            let idx = self.emitted_pr;
            let cand = if idx == 0 {
                LaurentPolynomial::one(self.dim)
            } else {
                self.pr_candidate(idx)
            };
            match certify_nonvanishing(&cand, self.radius, &self.grid, &self.policy) {
                Ok(Nonvanishing::Certified { lower_bound, .. }) if lower_bound > 0.0 => {
                    self.emitted_pr += 1;
                    let cp = CertifiedPolynomial::certify(&cand, self.radius, &self.grid, &self.policy)
                        .expect("certified above");
                    return Weight::PR(cp);
                }
                _ => {
                    self.rejected += 1;
                    self.emitted_pr += 1;
                }
            }
        }
    }

    fn pr_candidate(&mut self, idx: usize) -> LaurentPolynomial {
        let rng = &mut self.rng;
        let n = self.dim;
        let r = self.radius;
        match idx % 3 {
            1 => {
                let factors = rng.gen_range(1..=3);
                let mut p = LaurentPolynomial::constant(n, random_unimodular(rng));
                for _ in 0..factors {
                    let c = Complex64::from_polar(r + 0.1 + 2.0 * rng.gen::<f64>(), 2.0 * PI * rng.gen::<f64>());
                    let axis = rng.gen_range(0..n);
                    let f = LaurentPolynomial::constant(n, c).sub(&LaurentPolynomial::coordinate(n, axis)).unwrap();
                    p = p.mul(&f).unwrap();
                }
                p
            }
            2 => {
                let q = random_analytic(rng, n, self.max_degree.min(3), 0.8 / r.powi(self.max_degree.min(3) as i32));
                exp_truncated(&q, 6 + self.max_degree as i32).scale(Complex64::new(0.5 + rng.gen::<f64>(), 0.0))
            }
            _ => {
                let q = random_analytic(rng, n, self.max_degree, 1.3 / r.powi(self.max_degree as i32));
                q.add(&LaurentPolynomial::constant(n, Complex64::new(1.0, 0.0))).unwrap()
            }
        }
    }

    fn next_mccullough(&mut self) -> Weight {
        loop {
            let (cand, zero) = self.mc_candidate();
            self.emitted_mc += 1;
            let bound = torus_lower_bound(&cand, &self.grid).unwrap_or(-1.0);
            let zero_ok = cand.evaluate(&zero).map(|v| v.norm() < 1e-10).unwrap_or(false)
                && zero.iter().all(|z| z.norm() < 1.0);
            if bound > 0.0 && zero_ok {
                return Weight::Mccullough { poly: cand, torus_bound: bound, zero };
            }
            self.rejected += 1;
        }
    }

    /// (z_l − h(z)) · q(z) with sup|h| < 1 on the closed polydisc, h independent of z_l,
    /// and q zero-free there. The zero set of the first factor meets 𝔻ⁿ but not 𝕋ⁿ.
    fn mc_candidate(&mut self) -> (LaurentPolynomial, Vec<Complex64>) {
        let rng = &mut self.alt_rng;
        let n = self.dim;
        let axis = rng.gen_range(0..n);
        let a = random_disc(rng, 0.6);
        let mut h = LaurentPolynomial::constant(n, a);
        if n > 1 {
            let room = 0.85 - a.norm();
            let other = (axis + 1 + rng.gen_range(0..n - 1)) % n;
            let c1 = random_disc(rng, 1.0) * (room * (0.3 + 0.7 * rng.gen::<f64>()));
            h.add_term(MultiIndex::unit(n, other), c1);
        }
        let first = LaurentPolynomial::coordinate(n, axis).sub(&h).unwrap();
        let mut zero: Vec<Complex64> = (0..n).map(|_| random_disc(rng, 0.5)).collect();
        zero[axis] = Complex64::default();
        zero[axis] = h.evaluate(&zero).unwrap();
        let mut p = first;
        if rng.gen::<f64>() < 0.5 {
            let c = Complex64::from_polar(1.3 + rng.gen::<f64>(), 2.0 * PI * rng.gen::<f64>());
            let ax = rng.gen_range(0..n);
            p = p.mul(&LaurentPolynomial::constant(n, c).sub(&LaurentPolynomial::coordinate(n, ax)).unwrap()).unwrap();
        }
        (p.scale(random_unimodular(rng)), zero)
    }
}

impl Iterator for FamilyStream {
    type Item = Weight;

    fn next(&mut self) -> Option<Weight> {
        let w = match self.kind {
            FamilyKind::PR => self.next_pr(),
            FamilyKind::Mccullough => self.next_mccullough(),
            FamilyKind::Both => {
                if self.emitted % 2 == 0 {
                    self.next_pr()
                } else {
                    self.next_mccullough()
                }
            }
        };
        self.emitted += 1;
        Some(w)
    }
}

/// Kernel gram for a weight: closed form for certified weights on the full algebra,
/// truncated at degree `d` otherwise.
pub fn kernel_for_weight(w: &Weight, nodes: &[PolydiscPoint], d: u32, closed_form: bool) -> Result<KernelGram> {
    match w {
        Weight::PR(cp) if closed_form && cp.radius() >= 1.0 => kernel_gram_closed_form(cp, nodes),
        _ => kernel_gram_for_weight(w.poly(), d, nodes),
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Refutation {
    pub index: usize,
    pub family: FamilyKind,
    pub weight: LaurentPolynomial,
    pub provenance: Provenance,
    pub min_eigenvalue: f64,
    pub trace: f64,
    #[serde(with = "serde_complex::vec")]
    pub eigenvector: Vec<Complex64>,
    pub residual: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CertificateStatus {
    NoRefutation,
    Refuted,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Certificate {
    pub status: CertificateStatus,
    pub semantics: String,
    pub family: FamilyParams,
    pub degree: u32,
    pub tol: f64,
    pub weights_tried: usize,
    pub rejected_candidates: usize,
    pub skipped_ill_conditioned: usize,
    pub refutation: Option<Refutation>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SearchOptions {
    pub degree: u32,
    pub tol: f64,
    pub closed_form: bool,
    pub batch: usize,
}

impl Default for SearchOptions {
    fn default() -> Self {
        SearchOptions { degree: 24, tol: DEFAULT_TOL, closed_form: true, batch: 16 }
    }
}

enum Trial {
    Psd,
    Skipped,
    Refuted(Refutation),
}

/// Runs the family search: the first refuting weight in stream order wins, so the
/// result does not depend on the thread count.
pub fn check_interpolation(data: &InterpolationData, family: &FamilyParams, opts: &SearchOptions) -> Result<Certificate> {
    if family.dim != data.dim() {
        return Err(Error::DimensionMismatch { expected: data.dim(), found: family.dim });
    }
    let mut stream = generate_family(family)?;
    let mut tried = 0usize;
    let mut skipped = 0usize;
    let mut refutation = None;
    let batch = opts.batch.max(1);
    'outer: while tried < family.budget {
        let take = batch.min(family.budget - tried);
        let weights: Vec<(usize, Weight)> = (0..take).map(|i| (tried + i, stream.next().expect("infinite"))).collect();
        let results: Vec<Result<Trial>> = weights
            .par_iter()
            .map(|(idx, w)| {
                let kg = match kernel_for_weight(w, data.nodes(), opts.degree, opts.closed_form) {
                    Ok(kg) => kg,
                    Err(Error::IllConditioned(_)) | Err(Error::Indefinite) => return Ok(Trial::Skipped),
                    Err(e) => return Err(e),
                };
                let pm = assemble_pick_matrix(data, &kg)?;
                match psd_test(&pm, opts.tol)? {
                    PsdOutcome::Psd { .. } => Ok(Trial::Psd),
                    PsdOutcome::Refuted { min_eigenvalue, eigenvector, residual } => Ok(Trial::Refuted(Refutation {
                        index: *idx,
                        family: w.family(),
                        weight: w.poly().clone(),
                        provenance: kg.provenance.clone(),
                        min_eigenvalue,
                        trace: trace_re(&pm),
                        eigenvector,
                        residual,
                    })),
                }
            })
            .collect();
        for r in results {
            tried += 1;
            match r? {
                Trial::Psd => {}
                Trial::Skipped => skipped += 1,
                Trial::Refuted(rf) => {
                    refutation = Some(rf);
                    break 'outer;
                }
            }
        }
    }
    let status = if refutation.is_some() { CertificateStatus::Refuted } else { CertificateStatus::NoRefutation };
    let semantics = match status {
        CertificateStatus::Refuted => "refuted: a Pick matrix of the sampled family is not positive semidefinite",
        CertificateStatus::NoRefutation => {
            "no_refutation within budget: the family was sampled, this is not a solvability proof"
        }
    };
    Ok(Certificate {
        status,
        semantics: semantics.into(),
        family: family.clone(),
        degree: opts.degree,
        tol: opts.tol,
        weights_tried: tried,
        rejected_candidates: stream.rejected,
        skipped_ill_conditioned: skipped,
        refutation,
    })
}
