//! Frozen reference values, each recomputed here by a route independent of the library.

use nalgebra::DMatrix;
use num_complex::Complex64;
use picklab::extremal::{candidate_interpolant, compressed_operator_norm, lagrange_basis};
use picklab::hardy::{gram_matrix, kernel_gram_for_weight, szego_gram, AlgebraSpec};
use picklab::modulus::fejer_log_poly;
use picklab::oracles::{agler_feasible_2d, extremal_norm_1d, pick_1d, schur_interpolant_1d, AglerOptions, AglerOutcome};
use picklab::pick::{assemble_pick_matrix, psd_test, InterpolationData};
use picklab::torus::{LaurentPolynomial, MultiIndex, PolydiscPoint, TorusGrid};

fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

fn data1(nodes: &[f64], targets: &[f64]) -> InterpolationData {
    InterpolationData::new(nodes.iter().map(|&x| PolydiscPoint::real(&[x])).collect(), targets.iter().map(|&w| c(w)).collect())
        .unwrap()
}

const AGLER_GAP: &str = r#"{"n":2,"R":1.0,"nodes":[[{"re":-0.7405528600099212,"im":0.16103585944329696},{"re":0.6993892201523447,"im":0.27777823043072997}],[{"re":-0.8033117704856877,"im":-0.258398686036967},{"re":0.7529117429907115,"im":-0.3234212931241977}],[{"re":0.45650383019238266,"im":0.6653325358227529},{"re":0.10877342309729135,"im":-0.8375827589204718}]],"targets":[{"re":-0.3798351996766819,"im":0.5174062023154707},{"re":-0.4841577428877002,"im":-0.6055031992035452},{"re":-0.35020305007235647,"im":0.16259314021405344}]}"#;

#[test]
fn unsolvable_two_point_spectrum() {
    // [[1, 1], [1, 7/12]]: eigenvalues (19 ± √601)/24
    let out = pick_1d(&data1(&[0.0, 0.5], &[0.0, 0.75])).unwrap();
    assert!(!out.solvable);
    assert!((out.min_eigenvalue - (19.0 - 601f64.sqrt()) / 24.0).abs() < 1e-12);
    assert!((out.matrix[1][1].re - 7.0 / 12.0).abs() < 1e-15);
}

#[test]
fn schwarz_extremal_values() {
    // |f(r)| ≤ r‖f‖ when f(0) = 0
    for (r, w) in [(0.5, 0.25), (0.3, 0.3), (0.8, 0.2), (0.01, 0.5)] {
        let t = extremal_norm_1d(&data1(&[0.0, r], &[0.0, w])).unwrap();
        assert!((t - w / r).abs() < 1e-6 * (w / r).max(1.0), "r={r} w={w} t={t}");
    }
}

#[test]
fn schur_three_point_interpolant() {
    // targets sampled from f(z) = z²/2 + 1/5
    let xs = [c(0.0), c(0.4), Complex64::new(-0.2, 0.5)];
    let d = InterpolationData::new(
        xs.iter().map(|&x| PolydiscPoint::new(vec![x]).unwrap()).collect(),
        xs.iter().map(|&x| x * x / 2.0 + 0.2).collect(),
    )
    .unwrap();
    let f = schur_interpolant_1d(&d).unwrap();
    for (x, w) in d.nodes().iter().zip(d.targets()) {
        assert!((f.evaluate(x.coords()[0]) - w).norm() < 1e-10);
    }
    assert!(f.boundary_sup <= 1.0 && !f.blaschke);
}

#[test]
fn fejer_single_frequency_damping() {
    // log f = 2cos θ has ĉ_{±1} = 1, so P_k = 2(1 − 1/(k+1)) z
    let grid = TorusGrid::uniform(1, 64);
    let samples: Vec<f64> = (0..64).map(|i| (2.0 * (2.0 * std::f64::consts::PI * i as f64 / 64.0).cos()).exp()).collect();
    for k in [1usize, 3, 10] {
        let p = fejer_log_poly(&samples, &grid, k).unwrap();
        let expect = 2.0 * (1.0 - 1.0 / (k as f64 + 1.0));
        assert!((p.poly.coefficient(&[1]) - c(expect)).norm() < 1e-12);
        assert!(p.poly.coefficient(&[0]).norm() < 1e-12);
    }
}

#[test]
fn gram_of_one_plus_half_z() {
    // |1 + z/2|² = 5/4 + (z + conj z)/2: gram on {1, z, z²} is tridiagonal (5/4, 1/2)
    let p = LaurentPolynomial::from_terms(1, [(vec![0], c(1.0)), (vec![1], c(0.5))]).unwrap();
    let wg = gram_matrix(&AlgebraSpec::full(1, 2), &p.mod_squared()).unwrap();
    for a in 0usize..3 {
        for b in 0..3 {
            let expect = if a == b { 1.25 } else if a.abs_diff(b) == 1 { 0.5 } else { 0.0 };
            assert!((wg.gram[(a, b)] - c(expect)).norm() < 1e-15);
        }
    }
}

#[test]
fn truncated_kernel_of_outer_weight() {
    // weight |1 + z/2|²: the reproducing kernel is 1/((1 − x conj y)(1 + x/2)(1 + conj y/2))
    let p = LaurentPolynomial::from_terms(1, [(vec![0], c(1.0)), (vec![1], c(0.5))]).unwrap();
    let nodes = vec![PolydiscPoint::real(&[0.3]), PolydiscPoint::new(vec![Complex64::new(-0.2, 0.4)]).unwrap()];
    let kg = kernel_gram_for_weight(&p, 60, &nodes).unwrap();
    for j in 0..2 {
        for k in 0..2 {
            let x = nodes[j].coords()[0];
            let y = nodes[k].coords()[0];
            let exact = 1.0 / ((1.0 - x * y.conj()) * (1.0 + x / 2.0) * (1.0 + y.conj() / 2.0));
            assert!((kg.entries[(j, k)] - exact).norm() < 1e-10);
        }
    }
}

#[test]
fn lagrange_bidisc_example() {
    let b = lagrange_basis(&[PolydiscPoint::real(&[0.0, 0.0]), PolydiscPoint::real(&[0.5, 0.0])]).unwrap();
    assert_eq!(b.polys[0].coefficient(&[0, 0]), c(1.0));
    assert_eq!(b.polys[0].coefficient(&[1, 0]), c(-2.0));
    assert_eq!(b.polys[1].coefficient(&[1, 0]), c(2.0));
    assert_eq!(b.polys[0].len() + b.polys[1].len(), 3);
}

#[test]
fn candidate_of_linear_data_is_z() {
    let phi = candidate_interpolant(&data1(&[0.0, 0.5], &[0.0, 0.5])).unwrap();
    assert_eq!(phi, LaurentPolynomial::monomial(MultiIndex::from(vec![1]), c(1.0)));
    let kg = szego_gram(&[PolydiscPoint::real(&[0.0]), PolydiscPoint::real(&[0.5])]).unwrap();
    assert!((compressed_operator_norm(&phi, &kg).unwrap() - 1.0).abs() < 1e-12);
}

fn classical_min_eigenvalue(d: &InterpolationData) -> f64 {
    let n = d.len();
    let m = DMatrix::from_fn(n, n, |j, k| {
        let mut s = Complex64::new(1.0, 0.0);
        for (a, b) in d.nodes()[j].coords().iter().zip(d.nodes()[k].coords()) {
            s /= 1.0 - a * b.conj();
        }
        (1.0 - d.targets()[j] * d.targets()[k].conj()) * s
    });
    m.symmetric_eigen().eigenvalues.iter().cloned().fold(f64::INFINITY, f64::min)
}

#[test]
fn agler_gap_fixture() {
    let d: InterpolationData = serde_json::from_str(AGLER_GAP).unwrap();
    // the single-kernel Szegő-Pick matrix is comfortably PSD ...
    let lmin = classical_min_eigenvalue(&d);
    assert!(lmin > 0.5, "{lmin}");
    let kg = szego_gram(d.nodes()).unwrap();
    assert!(psd_test(&assemble_pick_matrix(&d, &kg).unwrap(), 1e-9).unwrap().is_psd());
    // ... yet no Agler decomposition exists; check the witness from scratch
    let out = agler_feasible_2d(&d, &AglerOptions::default()).unwrap();
    let AglerOutcome::Infeasible { witness, .. } = out else { panic!("{out:?}") };
    let n = d.len();
    let w = DMatrix::from_fn(n, n, |j, k| witness[j][k]);
    let mut pairing = 0.0;
    for j in 0..n {
        for k in 0..n {
            pairing += (w[(j, k)].conj() * (1.0 - d.targets()[j] * d.targets()[k].conj())).re;
        }
    }
    assert!(pairing < -1e-6 * w.norm(), "{pairing}");
    for l in 0..2 {
        let m = DMatrix::from_fn(n, n, |j, k| (1.0 - d.nodes()[j].coords()[l] * d.nodes()[k].coords()[l].conj()).conj() * w[(j, k)]);
        let h = (&m + m.adjoint()) * Complex64::new(0.5, 0.0);
        let lmin = h.symmetric_eigen().eigenvalues.iter().cloned().fold(f64::INFINITY, f64::min);
        assert!(lmin >= -1e-12 * w.norm(), "axis {l}: {lmin}");
    }
}
