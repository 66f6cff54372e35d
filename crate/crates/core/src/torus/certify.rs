use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::grid::TorusGrid;
use super::poly::LaurentPolynomial;
use crate::error::{Error, Result};

/// Limits for the interior cell screen.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MarginPolicy {
    pub max_cells: usize,
    /// Cells whose radius falls below `zero_radius · R` are treated as zero candidates.
    pub zero_radius: f64,
}

impl Default for MarginPolicy {
    fn default() -> Self {
        MarginPolicy { max_cells: 400_000, zero_radius: 1e-10 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "outcome", rename_all = "snake_case")]
pub enum Nonvanishing {
    Certified {
        lower_bound: f64,
        boundary_min: f64,
        boundary_slack: f64,
        cell_bound: f64,
        cells: usize,
    },
    ZeroFound {
        #[serde(with = "crate::serde_complex::vec")]
        witness: Vec<Complex64>,
        modulus: f64,
    },
    Inconclusive {
        reason: String,
        #[serde(with = "crate::serde_complex::vec")]
        witness: Vec<Complex64>,
        smallest_modulus: f64,
        cells: usize,
    },
}

impl Nonvanishing {
    pub fn is_certified(&self) -> bool {
        matches!(self, Nonvanishing::Certified { .. })
    }

    pub fn lower_bound(&self) -> Option<f64> {
        match self {
            Nonvanishing::Certified { lower_bound, .. } => Some(*lower_bound),
            _ => None,
        }
    }
}

/// An analytic polynomial proven zero-free on the closed radius-R polydisc.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CertifiedPolynomial {
    poly: LaurentPolynomial,
    radius: f64,
    lower_bound: f64,
}

impl CertifiedPolynomial {
    pub fn certify(p: &LaurentPolynomial, radius: f64, grid: &TorusGrid, policy: &MarginPolicy) -> Result<Self> {
        match certify_nonvanishing(p, radius, grid, policy)? {
            Nonvanishing::Certified { lower_bound, .. } => {
                Ok(CertifiedPolynomial { poly: p.clone(), radius, lower_bound })
            }
            Nonvanishing::ZeroFound { modulus, .. } => {
                Err(Error::NotCertified(format!("zero found (|p| = {modulus:e})")))
            }
            Nonvanishing::Inconclusive { reason, .. } => Err(Error::NotCertified(reason)),
        }
    }

    pub fn poly(&self) -> &LaurentPolynomial {
        &self.poly
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn lower_bound(&self) -> f64 {
        self.lower_bound
    }
}

#[derive(Clone, Copy, Debug)]
enum Cell {
    /// Whole (p independent of this coordinate).
    Free,
    Disc { r: f64 },
    Sector { r0: f64, r1: f64, t0: f64, t1: f64 },
}

impl Cell {
    fn center(&self) -> Complex64 {
        match *self {
            Cell::Free | Cell::Disc { .. } => Complex64::default(),
            Cell::Sector { r0, r1, t0, t1 } => Complex64::from_polar(0.5 * (r0 + r1), 0.5 * (t0 + t1)),
        }
    }

    /// Bound on |z − center| over the cell.
    fn spread(&self) -> f64 {
        match *self {
            Cell::Free => 0.0,
            Cell::Disc { r } => r,
            Cell::Sector { r0, r1, t0, t1 } => {
                let half = (0.5 * (t1 - t0)).min(PI);
                0.5 * (r1 - r0) + r1 * 2.0 * (0.5 * half).sin()
            }
        }
    }

    fn split(&self) -> Vec<Cell> {
        match *self {
            Cell::Free => vec![Cell::Free],
            Cell::Disc { r } => {
                let mut out = vec![Cell::Disc { r: 0.5 * r }];
                for q in 0..4 {
                    let t0 = q as f64 * PI / 2.0;
                    out.push(Cell::Sector { r0: 0.5 * r, r1: r, t0, t1: t0 + PI / 2.0 });
                }
                out
            }
            Cell::Sector { r0, r1, t0, t1 } => {
                let rm = 0.5 * (r0 + r1);
                let tm = 0.5 * (t0 + t1);
                vec![
                    Cell::Sector { r0, r1: rm, t0, t1: tm },
                    Cell::Sector { r0, r1: rm, t0: tm, t1 },
                    Cell::Sector { r0: rm, r1, t0, t1: tm },
                    Cell::Sector { r0: rm, r1, t0: tm, t1 },
                ]
            }
        }
    }
}

/// Proves |p| > 0 on the closed radius-R polydisc, or finds a (near-)zero.
///
/// The interior screen covers the polydisc by products of polar cells; a cell is cleared
/// when |p(center)| exceeds Σ_l L_l·spread_l with L_l = sup |∂_l p|. Once the whole
/// polydisc is cleared, the minimum modulus principle lets the sharper grid bound on the
/// distinguished boundary stand in as the global lower bound.
pub fn certify_nonvanishing(
    p: &LaurentPolynomial,
    radius: f64,
    grid: &TorusGrid,
    policy: &MarginPolicy,
) -> Result<Nonvanishing> {
    let n = p.dim();
    grid.check_dim(n)?;
    if !p.is_analytic() {
        return Err(Error::NotAnalytic);
    }
    if !(radius > 0.0 && radius.is_finite()) {
        return Err(Error::InvalidData(format!("radius {radius} must be positive")));
    }
    if p.is_zero() {
        return Ok(Nonvanishing::ZeroFound { witness: vec![Complex64::default(); n], modulus: 0.0 });
    }
    let lip = p.derivative_bounds(radius);
    let scale = p.majorant(radius);
    let floor = 1e-13 * scale;

    let boundary = grid.values_on_radius(p, radius)?;
    let boundary_min = boundary.iter().map(|v| v.norm()).fold(f64::INFINITY, f64::min);
    let boundary_slack: f64 = (0..n).map(|l| lip[l] * radius * PI / grid.res()[l] as f64).sum();

    let terms: Vec<(Vec<i32>, Complex64)> = p.terms().map(|(e, c)| (e.entries().to_vec(), *c)).collect();
    let eval = |z: &[Complex64]| -> Complex64 {
        terms
            .iter()
            .map(|(e, c)| c * e.iter().zip(z).fold(Complex64::new(1.0, 0.0), |acc, (&g, zl)| acc * zl.powi(g)))
            .sum()
    };

    let initial: Vec<Cell> = lip.iter().map(|&l| if l > 0.0 { Cell::Disc { r: radius } } else { Cell::Free }).collect();
    let mut stack = vec![initial];
    let mut cells = 0usize;
    let mut cell_bound = f64::INFINITY;
    let mut best = (f64::INFINITY, vec![Complex64::default(); n]);

    while let Some(cell) = stack.pop() {
        cells += 1;
        let center: Vec<Complex64> = cell.iter().map(Cell::center).collect();
        let v = eval(&center).norm();
        let spreads: Vec<f64> = cell.iter().map(Cell::spread).collect();
        let slack: f64 = (0..n).map(|l| lip[l] * spreads[l]).sum();
        if v - slack > floor {
            cell_bound = cell_bound.min(v - slack);
            continue;
        }
        if v < best.0 {
            best = (v, center.clone());
        }
        let widest = spreads.iter().cloned().fold(0.0, f64::max);
        if widest < policy.zero_radius * radius {
            let (z, m) = newton_polish(p, &center, radius);
            let (z, m) = if m < v { (z, m) } else { (center, v) };
            return Ok(Nonvanishing::ZeroFound { witness: z, modulus: m });
        }
        if cells >= policy.max_cells {
            let (z, m) = newton_polish(p, &best.1, radius);
            if m <= 1e-12 * scale {
                return Ok(Nonvanishing::ZeroFound { witness: z, modulus: m });
            }
            return Ok(Nonvanishing::Inconclusive {
                reason: format!("cell budget {} exhausted", policy.max_cells),
                witness: best.1,
                smallest_modulus: best.0,
                cells,
            });
        }
        let axis = (0..n)
            .max_by(|&a, &b| (lip[a] * spreads[a]).total_cmp(&(lip[b] * spreads[b])))
            .expect("n >= 1");
        for child in cell[axis].split() {
            let mut next = cell.clone();
            next[axis] = child;
            stack.push(next);
        }
    }

    let boundary_bound = boundary_min - boundary_slack;
    Ok(Nonvanishing::Certified {
        lower_bound: cell_bound.max(boundary_bound),
        boundary_min,
        boundary_slack,
        cell_bound,
        cells,
    })
}

/// Gauss-Newton steps towards a zero of p, staying inside the closed radius-R polydisc.
fn newton_polish(p: &LaurentPolynomial, start: &[Complex64], radius: f64) -> (Vec<Complex64>, f64) {
    let grads: Vec<LaurentPolynomial> = (0..p.dim()).map(|l| p.derivative(l)).collect();
    let mut z = start.to_vec();
    let mut val = p.evaluate(&z).map(|v| v.norm()).unwrap_or(f64::INFINITY);
    for _ in 0..60 {
        let pz = match p.evaluate(&z) {
            Ok(v) => v,
            Err(_) => break,
        };
        let g: Vec<Complex64> = grads.iter().map(|d| d.evaluate(&z).unwrap_or_default()).collect();
        let gn: f64 = g.iter().map(|x| x.norm_sqr()).sum();
        if gn == 0.0 {
            break;
        }
        let cand: Vec<Complex64> = z
            .iter()
            .zip(&g)
            .map(|(zl, gl)| {
                let w = zl - pz * gl.conj() / gn;
                if w.norm() > radius {
                    w * (radius / w.norm())
                } else {
                    w
                }
            })
            .collect();
        let cv = p.evaluate(&cand).map(|v| v.norm()).unwrap_or(f64::INFINITY);
        if cv >= val {
            break;
        }
        z = cand;
        val = cv;
    }
    (z, val)
}

/// Certified lower bound for min |p| on 𝕋ⁿ (p may be Laurent): grid minimum minus
/// the per-axis Lipschitz slack Σ_l (Σ|c_γ||γ_l|)·π/M_l.
pub fn torus_lower_bound(p: &LaurentPolynomial, grid: &TorusGrid) -> Result<f64> {
    let vals = grid.values_of(p)?;
    let m = vals.iter().map(|v| v.norm()).fold(f64::INFINITY, f64::min);
    let lip = p.torus_lipschitz();
    let slack: f64 = (0..p.dim()).map(|l| lip[l] * PI / grid.res()[l] as f64).sum();
    Ok(m - slack)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    fn affine(n: usize, constant: Complex64, coeffs: &[(usize, f64)]) -> LaurentPolynomial {
        let mut p = LaurentPolynomial::constant(n, constant);
        for &(axis, a) in coeffs {
            p = p.add(&LaurentPolynomial::coordinate(n, axis).scale(c(a))).unwrap();
        }
        p
    }

    #[test]
    fn z_minus_three() {
        let p = affine(1, c(-3.0), &[(0, 1.0)]);
        let out = certify_nonvanishing(&p, 1.0, &TorusGrid::uniform(1, 64), &MarginPolicy::default()).unwrap();
        assert!(out.lower_bound().unwrap() >= 2.0 - 1e-12, "{out:?}");
        assert!(out.lower_bound().unwrap() <= 2.0 + 1e-12);
    }

    #[test]
    fn interior_zero_is_found() {
        let p = affine(1, c(-0.5), &[(0, 1.0)]);
        match certify_nonvanishing(&p, 1.0, &TorusGrid::uniform(1, 64), &MarginPolicy::default()).unwrap() {
            Nonvanishing::ZeroFound { witness, modulus } => {
                assert!(modulus < 1e-10);
                assert!((witness[0] - c(0.5)).norm() < 1e-9);
            }
            other => panic!("expected a zero, got {other:?}"),
        }
    }

    #[test]
    fn three_plus_coordinates() {
        let p = affine(2, c(3.0), &[(0, 1.0), (1, 1.0)]);
        let out = certify_nonvanishing(&p, 1.0, &TorusGrid::uniform(2, 64), &MarginPolicy::default()).unwrap();
        assert!(out.lower_bound().unwrap() >= 1.0 - 1e-12);
    }

    #[test]
    fn zero_on_boundary_is_never_certified() {
        let p = affine(2, c(-1.0), &[(1, 1.0)]);
        let out = certify_nonvanishing(&p, 1.0, &TorusGrid::uniform(2, 32), &MarginPolicy::default()).unwrap();
        assert!(!out.is_certified());
    }

    #[test]
    fn certified_wrapper_rejects_zero() {
        let p = affine(1, c(-0.5), &[(0, 1.0)]);
        let g = TorusGrid::uniform(1, 32);
        assert!(CertifiedPolynomial::certify(&p, 1.0, &g, &MarginPolicy::default()).is_err());
        let q = affine(1, c(2.0), &[(0, 1.0)]);
        let cq = CertifiedPolynomial::certify(&q, 1.0, &g, &MarginPolicy::default()).unwrap();
        assert!(cq.lower_bound() > 0.99);
    }

    #[test]
    fn torus_bound() {
        let p = affine(2, c(-0.3), &[(0, 1.0)]);
        let b = torus_lower_bound(&p, &TorusGrid::uniform(2, 256)).unwrap();
        assert!(b > 0.68 && b <= 0.7 + 1e-12);
    }

    #[test]
    fn rejects_laurent_input() {
        let p = LaurentPolynomial::monomial(vec![-1].into(), c(1.0));
        assert_eq!(
            certify_nonvanishing(&p, 1.0, &TorusGrid::uniform(1, 8), &MarginPolicy::default()),
            Err(Error::NotAnalytic)
        );
    }
}
