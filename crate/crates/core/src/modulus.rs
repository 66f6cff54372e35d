//! Approximation of a positive function on 𝕋ⁿ by |p|² with p zero-free on a closed
//! polydisc: Fejér means of log f, analytic completion, exponential, Taylor truncation.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::torus::{certify_nonvanishing, LaurentPolynomial, MarginPolicy, MultiIndex, Nonvanishing, TorusGrid};

/// Analytic P_k whose real part on the torus is the Fejér mean of log f restricted to
/// frequencies in ℕⁿ ∪ (−ℕⁿ).
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CesaroPolynomial {
    pub order: usize,
    pub poly: LaurentPolynomial,
    /// Σ |damped ĉ_γ| over frequencies with mixed signs, which Re P_k cannot carry.
    pub mixed_l1: f64,
}

fn check_samples(samples: &[f64], grid: &TorusGrid) -> Result<()> {
    if samples.len() != grid.len() {
        return Err(Error::DimensionMismatch { expected: grid.len(), found: samples.len() });
    }
    for (index, &value) in samples.iter().enumerate() {
        if !(value > 0.0 && value.is_finite()) {
            return Err(Error::NonPositiveSample { index, value });
        }
    }
    Ok(())
}

/// Fourier coefficients of log f on the grid, by FFT slot.
fn log_spectrum(samples: &[f64], grid: &TorusGrid) -> Result<Vec<Complex64>> {
    check_samples(samples, grid)?;
    let logs: Vec<Complex64> = samples.iter().map(|v| Complex64::new(v.ln(), 0.0)).collect();
    grid.analyze(&logs)
}

fn fejer_damping(freq: &[i32], k: usize) -> f64 {
    freq.iter()
        .map(|&g| {
            let a = g.unsigned_abs() as usize;
            if a > k {
                0.0
            } else {
                1.0 - a as f64 / (k + 1) as f64
            }
        })
        .product()
}

fn cesaro_from_spectrum(spec: &[Complex64], grid: &TorusGrid, k: usize) -> CesaroPolynomial {
    let n = grid.dim();
    let mut poly = LaurentPolynomial::zero(n);
    let mut mixed = 0.0;
    for (slot, c) in spec.iter().enumerate() {
        let freq = grid.slot_frequency(slot);
        let d = fejer_damping(&freq, k);
        if d == 0.0 {
            continue;
        }
        let natural = freq.iter().all(|&g| g >= 0);
        let anti = freq.iter().all(|&g| g <= 0);
        if freq.iter().all(|&g| g == 0) {
            poly.add_term(MultiIndex::zero(n), Complex64::new(c.re, 0.0));
        } else if natural {
            let v = c * (2.0 * d);
            if v.norm() > 1e-15 {
                poly.add_term(freq.into(), v);
            }
        } else if !anti {
            mixed += d * c.norm();
        }
    }
    CesaroPolynomial { order: k, poly, mixed_l1: mixed }
}

/// Fejér-Cesàro polynomial of order k for log f.
pub fn fejer_log_poly(samples: &[f64], grid: &TorusGrid, k: usize) -> Result<CesaroPolynomial> {
    grid.require_min(2 * k + 1)?;
    let spec = log_spectrum(samples, grid)?;
    Ok(cesaro_from_spectrum(&spec, grid, k))
}

/// Full product-Fejér mean of log f at the grid nodes (all frequencies).
pub fn cesaro_mean(samples: &[f64], grid: &TorusGrid, k: usize) -> Result<Vec<f64>> {
    grid.require_min(2 * k + 1)?;
    let mut spec = log_spectrum(samples, grid)?;
    for (slot, c) in spec.iter_mut().enumerate() {
        *c *= fejer_damping(&grid.slot_frequency(slot), k);
    }
    Ok(grid.synthesize(&spec)?.into_iter().map(|z| z.re).collect())
}

/// e^{q₀}·Σ_{m≤D} (q − q₀)^m/m! with every product truncated at total degree D; q analytic.
pub fn exp_truncated(q: &LaurentPolynomial, degree: i32) -> LaurentPolynomial {
    let n = q.dim();
    let q0 = q.coefficient(&vec![0; n]);
    let rest = q.sub(&LaurentPolynomial::constant(n, q0)).expect("same dimension");
    let mut sum = LaurentPolynomial::one(n);
    let mut term = LaurentPolynomial::one(n);
    for m in 1..=degree.max(0) {
        term = term.mul_truncated(&rest, degree).expect("same dimension").scale(Complex64::new(1.0 / m as f64, 0.0));
        if term.is_zero() {
            break;
        }
        sum = sum.add(&term).expect("same dimension");
    }
    sum.scale(q0.exp())
}

/// Bound on sup |e^q − exp_truncated(q, D)| over the closed radius-R polydisc, from the
/// univariate majorant A(t) = Σ_d (Σ_{|γ|=d} |q_γ| R^d) tᵈ of q − q₀.
pub fn exp_tail_bound(q: &LaurentPolynomial, degree: i32, radius: f64) -> f64 {
    let n = q.dim();
    let q0 = q.coefficient(&vec![0; n]);
    let top = q.total_degree().max(1) as usize;
    let mut a = vec![0.0; top + 1];
    for (e, c) in q.terms() {
        let d = e.total_degree() as usize;
        if d > 0 {
            a[d] += c.norm() * radius.powi(d as i32);
        }
    }
    let a1: f64 = a.iter().sum();
    let mut e = vec![1.0];
    let mut partial = 1.0;
    for d in 1..=degree.max(0) as usize {
        let s: f64 = (1..=d.min(top)).map(|j| j as f64 * a[j] * e[d - j]).sum();
        let ed = s / d as f64;
        e.push(ed);
        partial += ed;
    }
    let total = a1.exp();
    q0.re.exp() * ((total - partial).max(0.0) + 4.0 * f64::EPSILON * total)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModulusOptions {
    /// Per-axis Lipschitz bounds of f in θ_l; estimated from samples when absent.
    pub omega: Option<Vec<f64>>,
    pub max_iterations: usize,
    pub max_truncation_degree: i32,
    pub certify_grid: usize,
}

impl Default for ModulusOptions {
    fn default() -> Self {
        ModulusOptions { omega: None, max_iterations: 16, max_truncation_degree: 400, certify_grid: 128 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ModulusCertificate {
    pub p: LaurentPolynomial,
    #[serde(rename = "R")]
    pub radius: f64,
    pub epsilon: f64,
    pub fejer_order: usize,
    pub fejer_grid_error: f64,
    pub mixed_l1: f64,
    pub max_f: f64,
    pub big_m: f64,
    pub mu_exponential: f64,
    pub truncation_degree: i32,
    pub tail_bound: f64,
    pub tail_threshold: f64,
    pub grid_error: f64,
    pub slack: f64,
    pub achieved_bound: f64,
    pub nonvanishing_bound: f64,
    pub omega: Vec<f64>,
}

/// Outcome of the refinement loop; `best_bound` is the smallest certified sup bound seen.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ModulusSearch {
    pub certificate: Option<ModulusCertificate>,
    pub best_bound: f64,
    pub orders_tried: Vec<usize>,
    pub last_failure: Option<String>,
}

/// Lipschitz estimate of grid samples along each axis, doubled for safety.
pub fn estimate_omega(samples: &[f64], grid: &TorusGrid) -> Vec<f64> {
    (0..grid.dim())
        .map(|l| {
            let m = grid.res()[l];
            let mut best: f64 = 0.0;
            for flat in 0..grid.len() {
                let mut idx = grid.multi_index(flat);
                idx[l] = (idx[l] + 1) % m;
                let d = (samples[grid.flat_index(&idx)] - samples[flat]).abs();
                best = best.max(d);
            }
            2.0 * best / grid.mesh(l)
        })
        .collect()
}

/// Lipschitz bound of |p|² in θ_l on the torus.
fn mod_squared_lipschitz(p: &LaurentPolynomial) -> Vec<f64> {
    if p.len() <= 1500 {
        p.mod_squared().torus_lipschitz()
    } else {
        let s = p.l1_norm();
        p.torus_lipschitz().into_iter().map(|v| 2.0 * s * v).collect()
    }
}

pub fn approximate_modulus(
    samples: &[f64],
    grid: &TorusGrid,
    radius: f64,
    epsilon: f64,
    opts: &ModulusOptions,
) -> Result<ModulusCertificate> {
    let search = modulus_search(samples, grid, radius, epsilon, opts)?;
    match search.certificate {
        Some(c) => Ok(c),
        None => Err(Error::BudgetExhausted(format!(
            "best certified bound {:.6} after orders {:?}{}",
            search.best_bound,
            search.orders_tried,
            search.last_failure.map(|s| format!(" ({s})")).unwrap_or_default()
        ))),
    }
}

/// The refinement loop: Fejér orders 1, 2, 4, … up to the grid limit or iteration budget.
pub fn modulus_search(
    samples: &[f64],
    grid: &TorusGrid,
    radius: f64,
    epsilon: f64,
    opts: &ModulusOptions,
) -> Result<ModulusSearch> {
    if !(epsilon > 0.0) {
        return Err(Error::InvalidData("epsilon must be positive".into()));
    }
    if !(radius >= 1.0 && radius.is_finite()) {
        return Err(Error::InvalidData(format!("R = {radius} must be >= 1")));
    }
    grid.require_min(3)?;
    let spec = log_spectrum(samples, grid)?;
    let n = grid.dim();
    let omega = match &opts.omega {
        Some(w) if w.len() == n => w.clone(),
        Some(w) => return Err(Error::DimensionMismatch { expected: n, found: w.len() }),
        None => estimate_omega(samples, grid),
    };
    let max_f = samples.iter().cloned().fold(f64::MIN, f64::max);
    let half = epsilon / 2.0;
    let big_m = 2f64.sqrt() * ((max_f + half) + ((max_f + half).sqrt() + 1.0).powi(2)).sqrt();
    let cert_grid = TorusGrid::new(grid.res().iter().map(|&m| m.min(opts.certify_grid)).collect())?;
    let kmax = (grid.min_res() - 1) / 2;

    let mut out = ModulusSearch { certificate: None, best_bound: f64::INFINITY, orders_tried: vec![], last_failure: None };
    let mut k = 1usize;
    for _ in 0..opts.max_iterations {
        if k > kmax {
            out.last_failure = Some(format!("grid supports Fejér order at most {kmax}"));
            break;
        }
        out.orders_tried.push(k);
        let ces = cesaro_from_spectrum(&spec, grid, k);
        let re_p: Vec<f64> = grid.values_of(&ces.poly)?.iter().map(|z| z.re).collect();
        let fejer_err = samples.iter().zip(&re_p).map(|(f, r)| (f - r.exp()).abs()).fold(0.0, f64::max);
        if fejer_err < half {
            match truncate_and_verify(samples, grid, &cert_grid, &ces, radius, epsilon, big_m, max_f, &omega, opts) {
                Ok(cert) => {
                    out.best_bound = out.best_bound.min(cert.achieved_bound);
                    if cert.achieved_bound < epsilon {
                        out.certificate = Some(cert);
                        return Ok(out);
                    }
                    out.last_failure = Some(format!("bound {:.6} at order {k}", cert.achieved_bound));
                }
                Err(e) => out.last_failure = Some(e.to_string()),
            }
        } else {
            out.last_failure = Some(format!("Fejér grid error {fejer_err:.6} at order {k}"));
        }
        k *= 2;
    }
    Ok(out)
}

#[allow(clippy::too_many_arguments)]
fn truncate_and_verify(
    samples: &[f64],
    grid: &TorusGrid,
    cert_grid: &TorusGrid,
    ces: &CesaroPolynomial,
    radius: f64,
    epsilon: f64,
    big_m: f64,
    max_f: f64,
    omega: &[f64],
    opts: &ModulusOptions,
) -> Result<ModulusCertificate> {
    let n = grid.dim();
    let q = ces.poly.scale(Complex64::new(0.5, 0.0));

    // μ for e^{Q}: Re Q is pluriharmonic, so its minimum over the closed polydisc sits on
    // the radius-R torus; grid minimum minus the θ-Lipschitz slack bounds it.
    let re_q = grid.values_on_radius(&q, radius)?;
    let min_re = re_q.iter().map(|z| z.re).fold(f64::INFINITY, f64::min);
    let mut s = vec![0.0; n];
    for (e, c) in q.terms() {
        let w = c.norm() * radius.powi(e.total_degree());
        for (l, &g) in e.entries().iter().enumerate() {
            s[l] += w * g as f64;
        }
    }
    let re_slack: f64 = (0..n).map(|l| s[l] * PI / grid.res()[l] as f64).sum();
    let mu_exp = (min_re - re_slack).exp();

    let threshold = (epsilon / (2.0 * big_m)).min(mu_exp / 2.0).min(1.0);
    let mut degree = q.total_degree().max(1);
    let mut tail = exp_tail_bound(&q, degree, radius);
    while tail >= threshold {
        degree += 1;
        if degree > opts.max_truncation_degree {
            return Err(Error::BudgetExhausted(format!(
                "truncation tail {tail:e} above {threshold:e} at degree {}",
                opts.max_truncation_degree
            )));
        }
        tail = exp_tail_bound(&q, degree, radius);
    }
    let p = exp_truncated(&q, degree).pruned(1e-16);

    let nonvanishing = match certify_nonvanishing(&p, radius, cert_grid, &MarginPolicy::default())? {
        Nonvanishing::Certified { lower_bound, .. } if lower_bound > 0.0 => lower_bound,
        other => return Err(Error::Inconclusive(format!("nonvanishing: {other:?}"))),
    };

    let vals = grid.values_of(&p)?;
    let grid_error = samples.iter().zip(&vals).map(|(f, v)| (f - v.norm_sqr()).abs()).fold(0.0, f64::max);
    let lip = mod_squared_lipschitz(&p);
    let slack: f64 = (0..n).map(|l| (omega[l] + lip[l]) * PI / grid.res()[l] as f64).sum();
    Ok(ModulusCertificate {
        p,
        radius,
        epsilon,
        fejer_order: ces.order,
        fejer_grid_error: samples
            .iter()
            .zip(grid.values_of(&ces.poly)?)
            .map(|(f, r)| (f - r.re.exp()).abs())
            .fold(0.0, f64::max),
        mixed_l1: ces.mixed_l1,
        max_f,
        big_m,
        mu_exponential: mu_exp,
        truncation_degree: degree,
        tail_bound: tail,
        tail_threshold: threshold,
        grid_error,
        slack,
        achieved_bound: grid_error + slack,
        nonvanishing_bound: nonvanishing,
        omega: omega.to_vec(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn samples(grid: &TorusGrid, f: impl Fn(&[Complex64]) -> f64) -> Vec<f64> {
        (0..grid.len()).map(|k| f(&grid.node(k))).collect()
    }

    #[test]
    fn constant_e_gives_one() {
        let g = TorusGrid::uniform(2, 16);
        let f = vec![std::f64::consts::E; g.len()];
        for k in [1, 3, 7] {
            let c = fejer_log_poly(&f, &g, k).unwrap();
            assert_eq!(c.poly.len(), 1);
            assert!((c.poly.coefficient(&[0, 0]) - Complex64::new(1.0, 0.0)).norm() < 1e-14);
        }
        let one = vec![1.0; g.len()];
        assert!(fejer_log_poly(&one, &g, 2).unwrap().poly.is_zero());
    }

    #[test]
    fn single_frequency_damping() {
        let g = TorusGrid::uniform(1, 64);
        let f = samples(&g, |z| (2.0 * z[0].re).exp());
        for k in [1usize, 2, 5, 10] {
            let c = fejer_log_poly(&f, &g, k).unwrap();
            let expect = 2.0 * (1.0 - 1.0 / (k as f64 + 1.0));
            assert!((c.poly.coefficient(&[1]) - Complex64::new(expect, 0.0)).norm() < 1e-12);
            assert!(c.poly.coefficient(&[0]).norm() < 1e-12);
            assert_eq!(c.mixed_l1, 0.0);
        }
    }

    #[test]
    fn errors() {
        let g = TorusGrid::uniform(1, 8);
        let mut f = vec![1.0; 8];
        assert!(matches!(fejer_log_poly(&f, &g, 4), Err(Error::UnderResolvedGrid { .. })));
        f[3] = 0.0;
        assert!(matches!(fejer_log_poly(&f, &g, 2), Err(Error::NonPositiveSample { index: 3, .. })));
    }

    #[test]
    fn exp_truncation_matches_series() {
        let q = LaurentPolynomial::from_terms(1, [(vec![1], Complex64::new(0.5, 0.0))]).unwrap();
        let p = exp_truncated(&q, 12);
        let z = Complex64::new(0.3, -0.8);
        let exact = (z * 0.5).exp();
        let err = (p.evaluate(&[z]).unwrap() - exact).norm();
        assert!(err <= exp_tail_bound(&q, 12, 1.0));
        assert!(exp_tail_bound(&q, 12, 1.0) < 1e-12);
        assert!(exp_tail_bound(&q, 3, 1.0) > exp_tail_bound(&q, 4, 1.0));
    }

    #[test]
    fn constant_one_modulus() {
        let g = TorusGrid::uniform(2, 16);
        let f = vec![1.0; g.len()];
        let cert = approximate_modulus(&f, &g, 1.0, 0.1, &ModulusOptions::default()).unwrap();
        assert_eq!(cert.p, LaurentPolynomial::one(2));
        assert!(cert.achieved_bound < 0.1);
    }

    #[test]
    fn two_plus_cos() {
        let g = TorusGrid::new(vec![512, 260]).unwrap();
        let f = samples(&g, |z| 2.0 + z[0].re);
        let opts = ModulusOptions { omega: Some(vec![1.0, 0.0]), ..Default::default() };
        let cert = approximate_modulus(&f, &g, 1.0, 0.1, &opts).unwrap();
        assert!(cert.achieved_bound < 0.1);
        assert!(cert.nonvanishing_bound > 0.0);
    }
}
