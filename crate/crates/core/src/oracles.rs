//! Independent ground truth: the classical one-variable Pick problem (test, Schur
//! algorithm, extremal norm) and Agler-decomposition feasibility on the bidisc.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hardy::szego_gram;
use crate::linalg::{hermitian_eigen, CMatrix};
use crate::pick::{assemble_pick_matrix, psd_test, InterpolationData, PsdOutcome, DEFAULT_TOL};
use crate::serde_complex;
use crate::torus::PolydiscPoint;

fn one() -> Complex64 {
    Complex64::new(1.0, 0.0)
}

fn require_dim(data: &InterpolationData, n: usize) -> Result<()> {
    if data.dim() != n {
        return Err(Error::DimensionMismatch { expected: n, found: data.dim() });
    }
    Ok(())
}

/// Classical Pick matrix [(1 − w_j conj w_k)/(1 − x_j conj x_k)] of any-dimensional data
/// (the product Szegő kernel in several variables).
pub fn classical_pick_matrix(data: &InterpolationData) -> Result<CMatrix> {
    assemble_pick_matrix(data, &szego_gram(data.nodes())?)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Pick1d {
    pub solvable: bool,
    pub min_eigenvalue: f64,
    #[serde(with = "serde_complex::vec2")]
    pub matrix: Vec<Vec<Complex64>>,
}

pub fn pick_1d(data: &InterpolationData) -> Result<Pick1d> {
    pick_1d_tol(data, DEFAULT_TOL)
}

pub fn pick_1d_tol(data: &InterpolationData, tol: f64) -> Result<Pick1d> {
    require_dim(data, 1)?;
    let m = classical_pick_matrix(data)?;
    let out = psd_test(&m, tol)?;
    let n = m.nrows();
    Ok(Pick1d {
        solvable: out.is_psd(),
        min_eigenvalue: out.min_eigenvalue(),
        matrix: (0..n).map(|j| (0..n).map(|k| m[(j, k)]).collect()).collect(),
    })
}

/// Rational Schur function produced by the Schur-Nevanlinna recursion:
/// F = (γ₁ + b₁F₁)/(1 + conj(γ₁) b₁F₁), b₁(z) = (z − x₁)/(1 − conj(x₁) z), ending in a constant.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SchurInterpolant {
    #[serde(with = "serde_complex::vec")]
    pub points: Vec<Complex64>,
    #[serde(with = "serde_complex::vec")]
    pub parameters: Vec<Complex64>,
    #[serde(with = "serde_complex")]
    pub tail: Complex64,
    /// True when the recursion ended on a unimodular constant (singular Pick matrix).
    pub blaschke: bool,
    pub boundary_sup: f64,
}

fn blaschke_factor(a: Complex64, z: Complex64) -> Complex64 {
    (z - a) / (one() - a.conj() * z)
}

impl SchurInterpolant {
    pub fn evaluate(&self, z: Complex64) -> Complex64 {
        let mut f = self.tail;
        for (x, g) in self.points.iter().zip(&self.parameters).rev() {
            let bf = blaschke_factor(*x, z) * f;
            f = (g + bf) / (one() + g.conj() * bf);
        }
        f
    }
}

pub fn schur_interpolant_1d(data: &InterpolationData) -> Result<SchurInterpolant> {
    require_dim(data, 1)?;
    let mut xs: Vec<Complex64> = data.nodes().iter().map(|x| x.coords()[0]).collect();
    let mut ws: Vec<Complex64> = data.targets().to_vec();
    let mut points = vec![];
    let mut parameters = vec![];
    let edge = 1e-9;
    let tail;
    let mut blaschke = false;
    loop {
        let g = ws[0];
        if g.norm() >= 1.0 - edge {
            if ws.iter().all(|w| (w - g).norm() < 1e-6) {
                tail = g / g.norm();
                blaschke = true;
                break;
            }
            return Err(Error::InvalidData("Pick matrix is not positive semidefinite".into()));
        }
        if xs.len() == 1 {
            tail = g;
            break;
        }
        let x = xs[0];
        let next: Vec<Complex64> = xs[1..]
            .iter()
            .zip(&ws[1..])
            .map(|(&xj, &wj)| (wj - g) / (one() - g.conj() * wj) / blaschke_factor(x, xj))
            .collect();
        if next.iter().any(|w| w.norm() > 1.0 + 1e-6) {
            return Err(Error::InvalidData("Pick matrix is not positive semidefinite".into()));
        }
        points.push(x);
        parameters.push(g);
        xs.remove(0);
        ws = next;
    }
    let mut f = SchurInterpolant { points, parameters, tail, blaschke, boundary_sup: 0.0 };
    let samples = 4096;
    let sup = (0..samples)
        .map(|k| f.evaluate(Complex64::from_polar(1.0, 2.0 * PI * k as f64 / samples as f64)).norm())
        .fold(0.0, f64::max);
    f.boundary_sup = sup;
    if sup > 1.0 + 1e-9 {
        return Err(Error::BoundaryVerification(sup));
    }
    Ok(f)
}

/// Smallest t for which {x_j ↦ w_j/t} has a PSD Pick matrix, by bisection to width 1e-8.
pub fn extremal_norm_1d(data: &InterpolationData) -> Result<f64> {
    require_dim(data, 1)?;
    let wmax = data.targets().iter().map(|w| w.norm()).fold(0.0, f64::max);
    if wmax == 0.0 {
        return Err(Error::Degenerate("all targets are zero".into()));
    }
    let kg = szego_gram(data.nodes())?;
    let psd_at = |t: f64| -> Result<bool> {
        let scaled = data.with_targets_unchecked(data.targets().iter().map(|w| w / t).collect());
        // sign of the smallest eigenvalue at round-off level; a looser tolerance biases t downward
        Ok(psd_test(&assemble_pick_matrix(&scaled, &kg)?, 1e-14)?.is_psd())
    };
    let mut lo = wmax;
    let mut hi = 1.0 + wmax;
    while !psd_at(hi)? {
        lo = hi;
        hi *= 2.0;
        if hi > 1e12 {
            return Err(Error::SolverFailure("bisection bracket did not close".into()));
        }
    }
    while hi - lo > 1e-8 {
        let mid = 0.5 * (lo + hi);
        if psd_at(mid)? {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(hi)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum AglerOutcome {
    Feasible {
        #[serde(with = "serde_complex::vec2")]
        gamma1: Vec<Vec<Complex64>>,
        #[serde(with = "serde_complex::vec2")]
        gamma2: Vec<Vec<Complex64>>,
        constraint_residual: f64,
        iterations: usize,
    },
    Infeasible {
        /// W with conj(A^l)∘W ⪰ 0 for l = 1, 2 and Re⟨W, C⟩ < 0.
        #[serde(with = "serde_complex::vec2")]
        witness: Vec<Vec<Complex64>>,
        margin: f64,
        iterations: usize,
    },
    Undecided {
        residual: f64,
        best_margin: f64,
        iterations: usize,
    },
}

impl AglerOutcome {
    pub fn is_feasible(&self) -> bool {
        matches!(self, AglerOutcome::Feasible { .. })
    }

    pub fn is_infeasible(&self) -> bool {
        matches!(self, AglerOutcome::Infeasible { .. })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AglerOptions {
    pub tol: f64,
    pub max_iterations: usize,
    pub witness_every: usize,
}

impl Default for AglerOptions {
    fn default() -> Self {
        AglerOptions { tol: 1e-9, max_iterations: 100_000, witness_every: 250 }
    }
}

fn to_rows(m: &CMatrix) -> Vec<Vec<Complex64>> {
    (0..m.nrows()).map(|j| (0..m.ncols()).map(|k| m[(j, k)]).collect()).collect()
}

fn project_psd(m: &CMatrix) -> CMatrix {
    let (vals, vecs) = hermitian_eigen(m);
    let n = m.nrows();
    let mut out = CMatrix::zeros(n, n);
    for (i, &v) in vals.iter().enumerate() {
        if v > 0.0 {
            let col = vecs.column(i);
            out += &col * col.adjoint() * Complex64::new(v, 0.0);
        }
    }
    out
}

struct AglerSystem {
    a: [CMatrix; 2],
    c: CMatrix,
    norm2: CMatrix,
}

impl AglerSystem {
    fn new(data: &InterpolationData) -> Self {
        let x = data.nodes();
        let w = data.targets();
        let n = x.len();
        let a = [0, 1].map(|l| CMatrix::from_fn(n, n, |j, k| one() - x[j].coords()[l] * x[k].coords()[l].conj()));
        let c = CMatrix::from_fn(n, n, |j, k| one() - w[j] * w[k].conj());
        let norm2 = CMatrix::from_fn(n, n, |j, k| Complex64::new(a[0][(j, k)].norm_sqr() + a[1][(j, k)].norm_sqr(), 0.0));
        AglerSystem { a, c, norm2 }
    }

    fn residual(&self, g: &[CMatrix; 2]) -> CMatrix {
        &self.c - self.a[0].component_mul(&g[0]) - self.a[1].component_mul(&g[1])
    }

    fn project_affine(&self, g: &[CMatrix; 2]) -> [CMatrix; 2] {
        let r = self.residual(g).component_div(&self.norm2);
        [0, 1].map(|l| &g[l] + self.a[l].map(|v| v.conj()).component_mul(&r))
    }

    /// Farkas witness from the gap between an affine point and its PSD projection.
    fn witness(&self, gap: &[CMatrix; 2]) -> (CMatrix, f64) {
        let n = self.c.nrows();
        let mut v = CMatrix::zeros(n, n);
        for j in 0..n {
            for k in 0..n {
                let num = self.a[0][(j, k)] * gap[0][(j, k)] + self.a[1][(j, k)] * gap[1][(j, k)];
                v[(j, k)] = num / self.norm2[(j, k)].re;
            }
        }
        let w = -(&v + v.adjoint()) * Complex64::new(0.5, 0.0);
        // shift by s·I: conj(A^l)∘I = diag(1 − |X_{j,l}|²) is positive definite
        let mut s: f64 = 0.0;
        for l in 0..2 {
            let d: Vec<f64> = (0..n).map(|j| self.a[l][(j, j)].re.sqrt()).collect();
            let m = CMatrix::from_fn(n, n, |j, k| self.a[l][(j, k)].conj() * w[(j, k)] / (d[j] * d[k]));
            let (vals, _) = hermitian_eigen(&m);
            s = s.max(-vals[0]);
        }
        let shifted = &w + CMatrix::identity(n, n) * Complex64::new(s * (1.0 + 1e-12), 0.0);
        let pairing: f64 = shifted.iter().zip(self.c.iter()).map(|(a, b)| (a.conj() * b).re).sum();
        let norm = shifted.norm();
        let margin = if norm > 0.0 { -pairing / norm } else { 0.0 };
        (shifted, margin)
    }

    /// Independent check of a witness: conj(A^l)∘W ⪰ 0 and the normalized margin.
    fn verify_witness(&self, w: &CMatrix) -> f64 {
        let n = w.nrows();
        for l in 0..2 {
            let m = CMatrix::from_fn(n, n, |j, k| self.a[l][(j, k)].conj() * w[(j, k)]);
            if hermitian_eigen(&m).0[0] < -1e-13 * w.norm() {
                return f64::NEG_INFINITY;
            }
        }
        let pairing: f64 = w.iter().zip(self.c.iter()).map(|(a, b)| (a.conj() * b).re).sum();
        -pairing / w.norm()
    }
}

/// Two-block PSD feasibility for the Agler decomposition
/// 1 − w_j conj w_k = Σ_l (1 − X_{j,l} conj X_{k,l}) Γ^l_{jk}, by Dykstra alternating projections.
pub fn agler_feasible_2d(data: &InterpolationData, opts: &AglerOptions) -> Result<AglerOutcome> {
    require_dim(data, 2)?;
    if data.len() > 6 {
        return Err(Error::InvalidData(format!("at most 6 nodes supported, got {}", data.len())));
    }
    let sys = AglerSystem::new(data);
    let n = data.len();
    let zero = CMatrix::zeros(n, n);
    let mut x = sys.project_affine(&[zero.clone(), zero.clone()]);
    let mut p = [zero.clone(), zero.clone()];
    let mut best_margin = f64::NEG_INFINITY;
    let mut residual = f64::INFINITY;
    for it in 1..=opts.max_iterations {
        let y = [0, 1].map(|l| project_psd(&(&x[l] + &p[l])));
        p = [0, 1].map(|l| &x[l] + &p[l] - &y[l]);
        x = sys.project_affine(&y);
        let proj = [0, 1].map(|l| project_psd(&x[l]));
        let gap = [0, 1].map(|l| &x[l] - &proj[l]);
        residual = (gap[0].norm_squared() + gap[1].norm_squared()).sqrt();
        if residual <= opts.tol {
            return Ok(feasible(&sys, proj, it));
        }
        if it % opts.witness_every == 0 {
            let (w, margin) = sys.witness(&gap);
            let checked = sys.verify_witness(&w).min(margin);
            best_margin = best_margin.max(checked);
            if checked > 10.0 * opts.tol {
                return Ok(AglerOutcome::Infeasible { witness: to_rows(&w), margin: checked, iterations: it });
            }
        }
    }
    if residual <= 1e-7 {
        let proj = [0, 1].map(|l| project_psd(&x[l]));
        return Ok(feasible(&sys, proj, opts.max_iterations));
    }
    Ok(AglerOutcome::Undecided { residual, best_margin, iterations: opts.max_iterations })
}

fn feasible(sys: &AglerSystem, g: [CMatrix; 2], iterations: usize) -> AglerOutcome {
    let constraint_residual = sys.residual(&g).norm();
    AglerOutcome::Feasible { gamma1: to_rows(&g[0]), gamma2: to_rows(&g[1]), constraint_residual, iterations }
}

/// Explicit Schur-class expressions on the polydisc.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SchurExpr {
    Coordinate { axis: usize },
    Constant {
        #[serde(with = "serde_complex")]
        value: Complex64,
    },
    /// (z_axis − a)/(1 − conj(a) z_axis).
    Mobius {
        axis: usize,
        #[serde(with = "serde_complex")]
        a: Complex64,
    },
    Product { factors: Vec<SchurExpr> },
    /// Σ t_i F_i with t_i ≥ 0 and Σ t_i ≤ 1.
    Convex { weights: Vec<f64>, terms: Vec<SchurExpr> },
}

impl SchurExpr {
    pub fn evaluate(&self, z: &[Complex64]) -> Result<Complex64> {
        Ok(match self {
            SchurExpr::Coordinate { axis } => *z.get(*axis).ok_or(Error::DimensionMismatch { expected: axis + 1, found: z.len() })?,
            SchurExpr::Constant { value } => *value,
            SchurExpr::Mobius { axis, a } => {
                let zl = *z.get(*axis).ok_or(Error::DimensionMismatch { expected: axis + 1, found: z.len() })?;
                blaschke_factor(*a, zl)
            }
            SchurExpr::Product { factors } => {
                let mut v = one();
                for f in factors {
                    v *= f.evaluate(z)?;
                }
                v
            }
            SchurExpr::Convex { weights, terms } => {
                let mut v = Complex64::default();
                for (t, f) in weights.iter().zip(terms) {
                    v += f.evaluate(z)? * *t;
                }
                v
            }
        })
    }

    /// Structural Schur-class check (parameters in range) plus sup over a boundary grid.
    pub fn verify(&self, dim: usize, per_axis: usize) -> Result<f64> {
        self.check_structure()?;
        let grid = crate::torus::TorusGrid::uniform(dim, per_axis);
        let mut sup: f64 = 0.0;
        for k in 0..grid.len() {
            sup = sup.max(self.evaluate(&grid.node(k))?.norm());
        }
        if sup > 1.0 + 1e-12 {
            return Err(Error::BoundaryVerification(sup));
        }
        Ok(sup)
    }

    fn check_structure(&self) -> Result<()> {
        match self {
            SchurExpr::Constant { value } if value.norm() > 1.0 => Err(Error::BoundaryVerification(value.norm())),
            SchurExpr::Mobius { a, .. } if a.norm() >= 1.0 => {
                Err(Error::InvalidData("Möbius parameter must lie in the open disc".into()))
            }
            SchurExpr::Product { factors } => factors.iter().try_for_each(|f| f.check_structure()),
            SchurExpr::Convex { weights, terms } => {
                if weights.len() != terms.len() || weights.iter().any(|&t| t < 0.0) || weights.iter().sum::<f64>() > 1.0 + 1e-15 {
                    return Err(Error::InvalidData("convex weights must be nonnegative with sum at most 1".into()));
                }
                terms.iter().try_for_each(|f| f.check_structure())
            }
            _ => Ok(()),
        }
    }
}

/// Targets w_j = F(X_j) for a verified Schur-class F.
pub fn sample_schur(f: &SchurExpr, nodes: Vec<PolydiscPoint>) -> Result<InterpolationData> {
    let dim = nodes.first().map(|x| x.dim()).ok_or(Error::InvalidData("no nodes".into()))?;
    f.verify(dim, if dim == 1 { 4096 } else if dim == 2 { 128 } else { 24 })?;
    let targets = nodes.iter().map(|x| f.evaluate(x.coords())).collect::<Result<Vec<_>>>()?;
    InterpolationData::new(nodes, targets)
}

/// Random nodes in the polydisc of the given radius.
pub fn random_nodes(rng: &mut ChaCha8Rng, dim: usize, count: usize, radius: f64) -> Vec<PolydiscPoint> {
    (0..count)
        .map(|_| {
            PolydiscPoint::new(
                (0..dim)
                    .map(|_| Complex64::from_polar(radius * rng.gen::<f64>().sqrt(), 2.0 * PI * rng.gen::<f64>()))
                    .collect(),
            )
            .expect("finite")
        })
        .collect()
}

/// Bidisc instance whose classical Szegő-Pick matrix is PSD while the Agler problem is
/// certified infeasible.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AglerGap {
    pub data: InterpolationData,
    pub classical_min_eigenvalue: f64,
    pub agler: AglerOutcome,
    pub attempt: usize,
}

/// Seeded search: scale random targets to just inside the classical PSD boundary and
/// keep the first instance with a certified Agler infeasibility witness.
pub fn find_agler_gap(seed: u64, attempts: usize, nodes: usize) -> Result<Option<AglerGap>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for attempt in 0..attempts {
        let x = random_nodes(&mut rng, 2, nodes, 0.9);
        let dir: Vec<Complex64> =
            (0..nodes).map(|_| Complex64::from_polar(rng.gen::<f64>().sqrt(), 2.0 * PI * rng.gen::<f64>())).collect();
        let wmax = dir.iter().map(|w| w.norm()).fold(0.0, f64::max);
        let kg = szego_gram(&x)?;
        let base = InterpolationData::new(x.clone(), vec![Complex64::default(); nodes])?;
        let psd_at = |s: f64| -> Result<(bool, f64)> {
            let d = base.with_targets_unchecked(dir.iter().map(|w| w * s).collect());
            let out = psd_test(&assemble_pick_matrix(&d, &kg)?, 0.0)?;
            Ok((out.is_psd(), out.min_eigenvalue()))
        };
        let (mut lo, mut hi) = (0.0, 0.999 / wmax);
        if psd_at(hi)?.0 {
            continue;
        }
        for _ in 0..60 {
            let mid = 0.5 * (lo + hi);
            if psd_at(mid)?.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let s = lo * 0.95;
        let (ok, lmin) = psd_at(s)?;
        if !ok {
            continue;
        }
        let data = InterpolationData::new(x, dir.iter().map(|w| w * s).collect())?;
        let agler = agler_feasible_2d(&data, &AglerOptions { max_iterations: 20_000, ..Default::default() })?;
        if agler.is_infeasible() {
            return Ok(Some(AglerGap { data, classical_min_eigenvalue: lmin, agler, attempt }));
        }
    }
    Ok(None)
}

/// Convenience for PSD outcomes in oracle reports.
pub fn classical_psd(data: &InterpolationData) -> Result<PsdOutcome> {
    psd_test(&classical_pick_matrix(data)?, DEFAULT_TOL)
}
