//! Quotient-norm machinery and the extremal boundary-set explorer.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hardy::{KernelGram, MAX_CONDITION};
use crate::linalg::{hermitian_eigen, solve_lower, CMatrix, HermitianFactor};
use crate::pick::{generate_family, kernel_for_weight, FamilyKind, FamilyParams, InterpolationData};
use crate::serde_complex;
use crate::torus::{LaurentPolynomial, MultiIndex, PolydiscPoint, TorusGrid};

fn one() -> Complex64 {
    Complex64::new(1.0, 0.0)
}

/// Φ_j(X_k) = δ_jk. Φ_j for j < N is a product of separating affine factors; Φ_N is
/// 1 − Σ_{j<N} Φ_j so the basis sums to 1 identically.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LagrangeBasis {
    pub nodes: Vec<PolydiscPoint>,
    pub polys: Vec<LaurentPolynomial>,
}

impl LagrangeBasis {
    /// [Φ_j(X_k)] with rows indexed by j.
    pub fn evaluation_matrix(&self) -> Result<CMatrix> {
        let n = self.nodes.len();
        let mut m = CMatrix::zeros(n, n);
        for (j, p) in self.polys.iter().enumerate() {
            for (k, x) in self.nodes.iter().enumerate() {
                m[(j, k)] = p.evaluate(x.coords())?;
            }
        }
        Ok(m)
    }
}

pub fn lagrange_basis(nodes: &[PolydiscPoint]) -> Result<LagrangeBasis> {
    let n = nodes.len();
    let dim = nodes.first().ok_or(Error::InvalidData("no nodes".into()))?.dim();
    for x in nodes {
        if x.dim() != dim {
            return Err(Error::DimensionMismatch { expected: dim, found: x.dim() });
        }
    }
    let mut polys = Vec::with_capacity(n);
    for j in 0..n.saturating_sub(1) {
        let mut phi = LaurentPolynomial::one(dim);
        for k in 0..n {
            if k == j {
                continue;
            }
            let (xj, xk) = (nodes[j].coords(), nodes[k].coords());
            let (axis, gap) = (0..dim)
                .map(|l| (l, (xj[l] - xk[l]).norm()))
                .fold((0, -1.0), |best, cur| if cur.1 > best.1 { cur } else { best });
            if gap == 0.0 {
                return Err(Error::DuplicateNodes(j.min(k), j.max(k)));
            }
            let d = xj[axis] - xk[axis];
            let factor = LaurentPolynomial::coordinate(dim, axis)
                .sub(&LaurentPolynomial::constant(dim, xk[axis]))?
                .scale(one() / d);
            phi = phi.mul(&factor)?;
        }
        polys.push(phi);
    }
    let mut last = LaurentPolynomial::one(dim);
    for p in &polys {
        last = last.sub(p)?;
    }
    polys.push(last);
    Ok(LagrangeBasis { nodes: nodes.to_vec(), polys })
}

/// φ = Σ w_j Φ_j.
pub fn candidate_interpolant(data: &InterpolationData) -> Result<LaurentPolynomial> {
    let basis = lagrange_basis(data.nodes())?;
    let mut phi = LaurentPolynomial::zero(data.dim());
    for (p, w) in basis.polys.iter().zip(data.targets()) {
        phi = phi.add(&p.scale(*w))?;
    }
    Ok(phi.pruned(0.0))
}

/// Operator norm of c_j ↦ conj(φ(X_j)) c_j in the norm induced by `kg`:
/// sqrt of the largest generalized eigenvalue of (D* kg D, kg).
pub fn compressed_operator_norm(phi: &LaurentPolynomial, kg: &KernelGram) -> Result<f64> {
    let values = kg.nodes.iter().map(|x| phi.evaluate(x.coords())).collect::<Result<Vec<_>>>()?;
    compressed_norm_of_values(&values, kg)
}

pub fn compressed_norm_of_values(values: &[Complex64], kg: &KernelGram) -> Result<f64> {
    let n = kg.len();
    if values.len() != n {
        return Err(Error::DimensionMismatch { expected: n, found: values.len() });
    }
    let factor = HermitianFactor::new(&kg.entries, MAX_CONDITION).map_err(|e| match e {
        Error::Indefinite | Error::IllConditioned(_) => Error::RankDeficient,
        other => other,
    })?;
    let l = factor.l();
    let w = CMatrix::from_fn(n, n, |j, k| values[j] * kg.entries[(j, k)] * values[k].conj());
    let half = solve_lower(&l, &w);
    let m = solve_lower(&l, &half.adjoint()).adjoint();
    let (vals, _) = hermitian_eigen(&m);
    Ok(vals.last().copied().unwrap_or(0.0).max(0.0).sqrt())
}

/// Rigorous sup of |φ| over the closed polydisc: grid maximum on 𝕋ⁿ plus a Lipschitz margin.
pub fn sup_norm_bound(phi: &LaurentPolynomial, per_axis: usize) -> Result<f64> {
    let grid = TorusGrid::uniform(phi.dim(), per_axis);
    let vals = grid.values_of(phi)?;
    let max = vals.iter().map(|v| v.norm()).fold(0.0, f64::max);
    let lip = phi.torus_lipschitz();
    Ok(max + lip.iter().map(|l| l * PI / per_axis as f64).sum::<f64>())
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct QuotientEstimate {
    /// Supremum of compressed norms over the sampled weights: a lower bound on ‖[φ]‖.
    pub lower_bound: f64,
    pub best_index: Option<usize>,
    pub best_family: Option<FamilyKind>,
    pub best_weight: Option<LaurentPolynomial>,
    /// sup over the closed polydisc of |φ|: an upper bound on ‖[φ]‖ with φ as representative.
    pub sup_phi_upper_bound: f64,
    pub weights_tried: usize,
    pub skipped: usize,
    pub degree: u32,
}

pub fn quotient_norm_estimate(
    phi: &LaurentPolynomial,
    data: &InterpolationData,
    family: &FamilyParams,
    d: u32,
) -> Result<QuotientEstimate> {
    if phi.dim() != data.dim() || family.dim != data.dim() {
        return Err(Error::DimensionMismatch { expected: data.dim(), found: phi.dim() });
    }
    let values = data.nodes().iter().map(|x| phi.evaluate(x.coords())).collect::<Result<Vec<_>>>()?;
    let mut stream = generate_family(family)?;
    let mut est = QuotientEstimate {
        lower_bound: 0.0,
        best_index: None,
        best_family: None,
        best_weight: None,
        sup_phi_upper_bound: sup_norm_bound(phi, if phi.dim() <= 2 { 256 } else { 32 })?,
        weights_tried: 0,
        skipped: 0,
        degree: d,
    };
    for idx in 0..family.budget {
        let w = stream.next().expect("family streams are infinite");
        est.weights_tried += 1;
        let kg = match kernel_for_weight(&w, data.nodes(), d, true) {
            Ok(kg) => kg,
            Err(Error::IllConditioned(_)) | Err(Error::Indefinite) => {
                est.skipped += 1;
                continue;
            }
            Err(e) => return Err(e),
        };
        let norm = match compressed_norm_of_values(&values, &kg) {
            Ok(v) => v,
            Err(Error::RankDeficient) => {
                est.skipped += 1;
                continue;
            }
            Err(e) => return Err(e),
        };
        if est.best_index.is_none() || norm > est.lower_bound {
            est.lower_bound = norm;
            est.best_index = Some(idx);
            est.best_family = Some(w.family());
            est.best_weight = Some(w.poly().clone());
        }
    }
    Ok(est)
}

/// a_j = ∫ Φ_j f dm by grid quadrature.
pub fn coset_projection(samples: &[Complex64], data: &InterpolationData, grid: &TorusGrid) -> Result<Vec<Complex64>> {
    grid.check_dim(data.dim())?;
    if samples.len() != grid.len() {
        return Err(Error::DimensionMismatch { expected: grid.len(), found: samples.len() });
    }
    let basis = lagrange_basis(data.nodes())?;
    let deg = basis.polys.iter().map(|p| p.total_degree()).max().unwrap_or(0).max(0) as usize;
    grid.require_min(2 * deg + 2)?;
    basis
        .polys
        .iter()
        .map(|p| {
            let vals = grid.values_of(p)?;
            Ok(vals.iter().zip(samples).map(|(a, b)| a * b).sum::<Complex64>() / grid.len() as f64)
        })
        .collect()
}

/// K(X, ζ) = ∏ 1/(1 − X_l conj ζ_l) on the torus grid.
pub fn kernel_samples(x: &PolydiscPoint, grid: &TorusGrid) -> Result<Vec<Complex64>> {
    grid.check_dim(x.dim())?;
    if !x.is_interior() {
        return Err(Error::OutsidePolydisc);
    }
    Ok(grid.sample(|z| x.coords().iter().zip(z).map(|(a, b)| one() / (one() - a * b.conj())).product()))
}

/// Coset representative G = Σ a_j K(X_j,·) + Σ_α C_α conj(ζ)^α, α ∈ ℤⁿ∖ℕⁿ, normalized to
/// grid-𝕃¹ norm 1.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DualElement {
    pub nodes: Vec<PolydiscPoint>,
    #[serde(with = "serde_complex::vec")]
    pub kernel_coefficients: Vec<Complex64>,
    /// Exponents α of conj(ζ)^α.
    pub correction: LaurentPolynomial,
    /// Re ∫ φ G dm on the grid.
    pub objective: f64,
    pub l1_norm: f64,
    /// Weak-duality bound max|φ + ψ| with ψ annihilating the search space.
    pub upper_bound: f64,
    /// 1 − objective.
    pub dual_gap: f64,
    pub budget: i32,
    pub grid: TorusGrid,
    pub iterations: usize,
}

impl DualElement {
    pub fn samples(&self, grid: &TorusGrid) -> Result<Vec<Complex64>> {
        // conj(ζ)^α = ζ^{−α} on the torus
        let mut out = grid.values_of(&negate_exponents(&self.correction))?;
        for (x, a) in self.nodes.iter().zip(&self.kernel_coefficients) {
            for (o, k) in out.iter_mut().zip(kernel_samples(x, grid)?) {
                *o += a * k;
            }
        }
        Ok(out)
    }
}

fn negate_exponents(p: &LaurentPolynomial) -> LaurentPolynomial {
    let mut out = LaurentPolynomial::zero(p.dim());
    for (e, c) in p.terms() {
        out.add_term(e.neg(), *c);
    }
    out
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DualOptions {
    pub max_iterations: usize,
    /// Stop once upper_bound − objective falls below this.
    pub gap_tol: f64,
    pub check_every: usize,
}

impl Default for DualOptions {
    fn default() -> Self {
        DualOptions { max_iterations: 40_000, gap_tol: 1e-4, check_every: 500 }
    }
}

/// Correction support: max|α_l| ≤ budget, α ∉ ℕⁿ.
pub fn correction_support(dim: usize, budget: i32) -> Vec<MultiIndex> {
    let side = (2 * budget + 1) as usize;
    let total = side.pow(dim as u32);
    (0..total)
        .map(|mut f| {
            let mut e = vec![0i32; dim];
            for l in (0..dim).rev() {
                e[l] = (f % side) as i32 - budget;
                f /= side;
            }
            MultiIndex::from(e)
        })
        .filter(|e| !e.is_natural())
        .collect()
}

/// Linear map x = (a, C) ↦ G on the grid, with kernel columns scaled to unit grid norm.
struct DualOperator {
    grid: TorusGrid,
    kernel: Vec<Vec<Complex64>>,
    scale: Vec<f64>,
    slots: Vec<usize>,
    n_nodes: usize,
}

impl DualOperator {
    fn len(&self) -> usize {
        self.n_nodes + self.slots.len()
    }

    fn apply(&self, x: &[Complex64]) -> Vec<Complex64> {
        let mut arr = vec![Complex64::default(); self.grid.len()];
        for (i, &s) in self.slots.iter().enumerate() {
            arr[s] = x[self.n_nodes + i];
        }
        let mut out = self.grid.synthesize(&arr).expect("grid sized");
        for j in 0..self.n_nodes {
            let a = x[j] * self.scale[j];
            for (o, k) in out.iter_mut().zip(&self.kernel[j]) {
                *o += a * k;
            }
        }
        out
    }

    fn adjoint(&self, y: &[Complex64]) -> Vec<Complex64> {
        let n = self.grid.len() as f64;
        let f = self.grid.analyze(y).expect("grid sized");
        let mut out = Vec::with_capacity(self.len());
        for j in 0..self.n_nodes {
            let s: Complex64 = self.kernel[j].iter().zip(y).map(|(k, v)| k.conj() * v).sum();
            out.push(s * self.scale[j]);
        }
        for &s in &self.slots {
            out.push(f[s] * n);
        }
        out
    }
}

fn dot_re(a: &[Complex64], b: &[Complex64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x.conj() * y).re).sum()
}

fn l1_mean(v: &[Complex64]) -> f64 {
    v.iter().map(|z| z.norm()).sum::<f64>() / v.len() as f64
}

/// Maximizes Re ∫ φ G dm over grid-𝕃¹-unit G in span{K(X_j,·)} + span{conj(ζ)^α : α ∈ 𝕐ⁿ}.
///
/// Solved as min ‖Bx‖₁ subject to Re ∫ φ Bx dm = 1 by a primal-dual hybrid gradient
/// iteration; the modulus of every grid value enters exactly.
pub fn dual_extremal_search(
    data: &InterpolationData,
    phi: &[Complex64],
    budget: i32,
    grid: &TorusGrid,
    opts: &DualOptions,
) -> Result<DualElement> {
    grid.check_dim(data.dim())?;
    if phi.len() != grid.len() {
        return Err(Error::DimensionMismatch { expected: grid.len(), found: phi.len() });
    }
    if budget < 0 {
        return Err(Error::InvalidData("budget must be nonnegative".into()));
    }
    grid.require_min(2 * budget as usize + 1)?;
    if data.targets().iter().all(|w| w.norm() == 0.0) && phi.iter().all(|v| v.norm() == 0.0) {
        return Err(Error::Degenerate("zero interpolation problem".into()));
    }
    let n_grid = grid.len();
    let nf = n_grid as f64;
    let support = correction_support(data.dim(), budget);
    let kernel = data.nodes().iter().map(|x| kernel_samples(x, grid)).collect::<Result<Vec<_>>>()?;
    let scale = kernel.iter().map(|k| 1.0 / (l1_sq(k) / nf).sqrt()).collect();
    let slots = support.iter().map(|a| grid.frequency_slot(a.neg().entries())).collect();
    let op = DualOperator { grid: grid.clone(), kernel, scale, slots, n_nodes: data.len() };
    let m = op.len();

    // Re Σ_i g_i x_i with g = Bᵀφ/N; hyperplane Re⟨c, x⟩ = 1 for c = conj(g)
    let phi_conj: Vec<Complex64> = phi.iter().map(|v| v.conj()).collect();
    let c: Vec<Complex64> = op.adjoint(&phi_conj).iter().map(|v| v / nf).collect();
    let c_norm2 = dot_re(&c, &c);
    if c_norm2 == 0.0 {
        return Err(Error::Degenerate("φ pairs to zero with every representative".into()));
    }
    let project = |v: &mut Vec<Complex64>| {
        let t = (1.0 - dot_re(&c, v)) / c_norm2;
        for (vi, ci) in v.iter_mut().zip(&c) {
            *vi += ci * t;
        }
    };

    let lipschitz = operator_norm_sq(&op) / nf;
    let step = 0.95 / lipschitz.sqrt();
    let root = nf.sqrt();
    let cap = 1.0 / root;

    let mut x: Vec<Complex64> = c.iter().map(|v| v / c_norm2).collect();
    let mut xbar = x.clone();
    let mut y = vec![Complex64::default(); n_grid];
    let mut best = (f64::INFINITY, x.clone());
    let mut upper = f64::INFINITY;
    let mut iterations = 0;
    for it in 1..=opts.max_iterations {
        iterations = it;
        let kx = op.apply(&xbar);
        for (yk, v) in y.iter_mut().zip(&kx) {
            let t = *yk + v * (step / root);
            let r = t.norm();
            *yk = if r > cap { t * (cap / r) } else { t };
        }
        let kty = op.adjoint(&y);
        let mut next: Vec<Complex64> = x.iter().zip(&kty).map(|(xi, g)| xi - g * (step / root)).collect();
        project(&mut next);
        for i in 0..m {
            xbar[i] = next[i] * 2.0 - x[i];
        }
        x = next;
        if it % opts.check_every == 0 || it == opts.max_iterations {
            let l1 = l1_mean(&op.apply(&x));
            if l1 < best.0 {
                best = (l1, x.clone());
            }
            let sign: Vec<Complex64> = y.iter().map(|v| (v * root).conj()).collect();
            upper = upper.min(weak_duality_bound(&op, phi, &sign)?);
            if upper - 1.0 / best.0 < opts.gap_tol {
                break;
            }
        }
    }
    let (l1, x) = best;
    let objective = 1.0 / l1;
    if objective > 1.0 + 1e-6 && phi.iter().all(|v| v.norm() <= 1.0) {
        return Err(Error::Degenerate(format!("objective {objective} exceeds 1: φ is not a contractive interpolant")));
    }
    let kernel_coefficients = (0..data.len()).map(|j| x[j] * op.scale[j] / l1).collect();
    let mut correction = LaurentPolynomial::zero(data.dim());
    for (i, a) in support.iter().enumerate() {
        correction.add_term(a.clone(), x[data.len() + i] / l1);
    }
    Ok(DualElement {
        nodes: data.nodes().to_vec(),
        kernel_coefficients,
        correction,
        objective,
        l1_norm: 1.0,
        upper_bound: upper,
        dual_gap: (1.0 - objective).max(0.0),
        budget,
        grid: grid.clone(),
        iterations,
    })
}

fn l1_sq(v: &[Complex64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum()
}

/// ‖B‖² by power iteration on BᴴB.
fn operator_norm_sq(op: &DualOperator) -> f64 {
    let m = op.len();
    let mut v: Vec<Complex64> = (0..m).map(|i| Complex64::new(1.0 + (i % 5) as f64 * 0.1, (i % 3) as f64 * 0.1)).collect();
    let mut lambda = 0.0;
    for _ in 0..60 {
        let norm = l1_sq(&v).sqrt();
        v.iter_mut().for_each(|z| *z /= norm);
        let w = op.adjoint(&op.apply(&v));
        lambda = dot_re(&v, &w);
        v = w;
    }
    lambda * 1.02
}

/// max_k |φ_k + ψ_k| minimized over ψ = Proj(s·u − φ), s ∈ ℂ, where Proj is the orthogonal
/// projection onto {ψ : Σ_k ψ_k (Bx)_k = 0 ∀x}. Any such ψ gives an upper bound on the optimum.
fn weak_duality_bound(op: &DualOperator, phi: &[Complex64], u: &[Complex64]) -> Result<f64> {
    let q: Vec<Complex64> = phi.iter().zip(annihilator_projection(op, phi)?).map(|(a, b)| a - b).collect();
    let d = annihilator_projection(op, u)?;
    let f = |s: Complex64| q.iter().zip(&d).map(|(a, b)| (a + b * s).norm()).fold(0.0, f64::max);
    let golden = |lo: f64, hi: f64, g: &dyn Fn(f64) -> f64| {
        let r = 0.5 * (5f64.sqrt() - 1.0);
        let (mut a, mut b) = (lo, hi);
        for _ in 0..48 {
            let x1 = b - r * (b - a);
            let x2 = a + r * (b - a);
            if g(x1) <= g(x2) {
                b = x2;
            } else {
                a = x1;
            }
        }
        0.5 * (a + b)
    };
    let inner = |re: f64| {
        let im = golden(-4.0, 4.0, &|im| f(Complex64::new(re, im)));
        f(Complex64::new(re, im))
    };
    let re = golden(-4.0, 4.0, &inner);
    let im = golden(-4.0, 4.0, &|im| f(Complex64::new(re, im)));
    Ok(f(Complex64::new(re, im)).min(f(Complex64::default())))
}

/// v ↦ conj(P⊥ conj(v)) where P⊥ removes the range of B: the result ψ satisfies Bᵀψ = 0.
fn annihilator_projection(op: &DualOperator, v: &[Complex64]) -> Result<Vec<Complex64>> {
    let nf = op.grid.len() as f64;
    let vc: Vec<Complex64> = v.iter().map(|z| z.conj()).collect();
    let r = op.adjoint(&vc);
    // BᴴB = [[Kk, Kf], [Kfᴴ, N·I]]; solve by the Schur complement on the kernel block
    let nn = op.n_nodes;
    let mut kk = CMatrix::zeros(nn, nn);
    let mut kf = CMatrix::zeros(nn, op.slots.len());
    for j in 0..nn {
        let mut e = vec![Complex64::default(); op.len()];
        e[j] = one();
        let col = op.adjoint(&op.apply(&e));
        for i in 0..nn {
            kk[(i, j)] = col[i];
        }
        for (a, v) in col[nn..].iter().enumerate() {
            kf[(j, a)] = v.conj();
        }
    }
    let r1 = CMatrix::from_fn(nn, 1, |i, _| r[i]);
    let r2 = CMatrix::from_fn(op.slots.len(), 1, |i, _| r[nn + i]);
    let schur = &kk - &kf * kf.adjoint() / Complex64::new(nf, 0.0);
    let rhs = &r1 - &kf * &r2 / Complex64::new(nf, 0.0);
    let z1 = schur.lu().solve(&rhs).ok_or(Error::RankDeficient)?;
    let z2 = (&r2 - kf.adjoint() * &z1) / Complex64::new(nf, 0.0);
    let mut z: Vec<Complex64> = z1.iter().copied().collect();
    z.extend(z2.iter().copied());
    let bz = op.apply(&z);
    Ok(vc.iter().zip(&bz).map(|(a, b)| (a - b).conj()).collect())
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ChebyshevCheck {
    /// μ({1 − |φ| ≥ √ε}) with dμ = |G| dm.
    pub measure: f64,
    /// (1/√ε) ∫ (1 − |φ|) |G| dm.
    pub integral_bound: f64,
    /// (1/√ε) (‖G‖₁ − |∫ φ G dm|).
    pub norm_bound: f64,
    pub sqrt_epsilon: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct KReport {
    pub k: u32,
    pub epsilon: f64,
    pub m_e: f64,
    pub m_a: f64,
    pub m_b: f64,
    pub m_s: f64,
    pub bound: f64,
    pub slack: f64,
    pub bound_holds: bool,
    pub partition_exact: bool,
    pub b_within_s: bool,
    pub s_proper: bool,
    /// ‖G‖₁ < 1 + ε for the scaled representative.
    pub norm_within_epsilon: bool,
    pub chebyshev: ChebyshevCheck,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct KMasks {
    pub k: u32,
    pub e: Vec<bool>,
    pub a: Vec<bool>,
    pub b: Vec<bool>,
    pub s: Vec<bool>,
}

impl KMasks {
    /// Rows "index,E,A,B,S" (row-major grid index, 0/1 flags).
    pub fn csv_rows(&self) -> Vec<[usize; 5]> {
        (0..self.e.len())
            .map(|i| [i, self.e[i] as usize, self.a[i] as usize, self.b[i] as usize, self.s[i] as usize])
            .collect()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BoundaryReport {
    pub k_min: u32,
    pub k_max: u32,
    pub grid: TorusGrid,
    pub dual_objective: f64,
    pub dual_gap: f64,
    /// Grid-𝕃¹ norm of the scaled representative G = G_dual/objective (so ∫ φ G dm = 1).
    pub scaled_l1_norm: f64,
    pub per_k: Vec<KReport>,
    #[serde(skip)]
    pub masks: Vec<KMasks>,
}

/// Grid masks E_k = {1 − |φ| > 1/k³}, A_k = E_k ∩ {|G| ≥ 1/k}, B_k = E_k ∩ {|G| < 1/k},
/// S_k = {|G| < 1/k} for ε = 1/k⁶, with the measure bound m(A_k) ≤ 1/k² + slack.
pub fn boundary_explorer(
    phi: &[Complex64],
    dual: &DualElement,
    k_range: std::ops::RangeInclusive<u32>,
    grid: &TorusGrid,
) -> Result<BoundaryReport> {
    if phi.len() != grid.len() {
        return Err(Error::DimensionMismatch { expected: grid.len(), found: phi.len() });
    }
    if *k_range.start() == 0 {
        return Err(Error::InvalidData("k starts at 1".into()));
    }
    let raw = dual.samples(grid)?;
    let nf = grid.len() as f64;
    let pairing: Complex64 = phi.iter().zip(&raw).map(|(a, b)| a * b).sum::<Complex64>() / nf;
    let objective = pairing.re;
    if !(objective > 0.0) {
        return Err(Error::Degenerate("dual element has no positive pairing with φ".into()));
    }
    let g: Vec<f64> = raw.iter().map(|v| v.norm() / objective).collect();
    let l1 = g.iter().sum::<f64>() / nf;
    let pair_abs = pairing.norm() / objective;
    let deficit: Vec<f64> = phi.iter().map(|v| 1.0 - v.norm()).collect();
    let gap = (1.0 - objective).max(0.0);
    let slack = gap + 2.0 / grid.min_res() as f64;
    let mut per_k = vec![];
    let mut masks = vec![];
    for k in k_range.clone() {
        let kf = k as f64;
        let eps = kf.powi(-6);
        let e: Vec<bool> = deficit.iter().map(|d| *d > kf.powi(-3)).collect();
        let s: Vec<bool> = g.iter().map(|v| *v < 1.0 / kf).collect();
        let a: Vec<bool> = e.iter().zip(&s).map(|(e, s)| *e && !*s).collect();
        let b: Vec<bool> = e.iter().zip(&s).map(|(e, s)| *e && *s).collect();
        let partition_exact = (0..g.len()).all(|i| (a[i] || b[i]) == e[i] && !(a[i] && b[i]));
        let b_within_s = b.iter().zip(&s).all(|(b, s)| !*b || *s);
        let measure = |m: &[bool]| m.iter().filter(|v| **v).count() as f64 / nf;
        let m_a = measure(&a);
        let root = eps.sqrt();
        let cheb_measure = deficit.iter().zip(&g).filter(|(d, _)| **d >= root).map(|(_, v)| v).sum::<f64>() / nf;
        let integral = deficit.iter().zip(&g).map(|(d, v)| d * v).sum::<f64>() / nf / root;
        per_k.push(KReport {
            k,
            epsilon: eps,
            m_e: measure(&e),
            m_a,
            m_b: measure(&b),
            m_s: measure(&s),
            bound: 1.0 / (kf * kf),
            slack,
            bound_holds: m_a <= 1.0 / (kf * kf) + slack,
            partition_exact,
            b_within_s,
            s_proper: l1 < 1.0 || s.iter().any(|v| !*v),
            norm_within_epsilon: l1 >= 1.0 - 1e-12 && l1 < 1.0 + eps,
            chebyshev: ChebyshevCheck {
                measure: cheb_measure,
                integral_bound: integral,
                norm_bound: (l1 - pair_abs) / root,
                sqrt_epsilon: root,
            },
        });
        masks.push(KMasks { k, e, a, b, s });
    }
    Ok(BoundaryReport {
        k_min: *k_range.start(),
        k_max: *k_range.end(),
        grid: grid.clone(),
        dual_objective: objective,
        dual_gap: gap,
        scaled_l1_norm: l1,
        per_k,
        masks,
    })
}
