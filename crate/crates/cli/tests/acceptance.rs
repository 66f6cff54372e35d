//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any fails.

use std::f64::consts::PI;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::{Path, PathBuf};
use std::process::{Command, Stdio};
use std::time::Instant;

use num_complex::Complex64;
use picklab::extremal::{
    boundary_explorer, candidate_interpolant, compressed_operator_norm, dual_extremal_search, quotient_norm_estimate,
    DualOptions,
};
use picklab::hardy::{gram_matrix, kernel_gram_closed_form, kernel_gram_for_weight, kernel_gram_truncated, szego_gram, AlgebraSpec};
use picklab::linalg::CMatrix;
use picklab::modulus::{approximate_modulus, ModulusOptions};
use picklab::oracles::{extremal_norm_1d, pick_1d, random_nodes, sample_schur, SchurExpr};
use picklab::pick::{
    assemble_pick_matrix, check_interpolation, generate_family, kernel_for_weight, psd_test, CertificateStatus, FamilyKind,
    FamilyParams, InterpolationData, SearchOptions, Weight,
};
use picklab::torus::{certify_nonvanishing, LaurentPolynomial, MarginPolicy, MultiIndex, PolydiscPoint, TorusGrid};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;

fn ensure(ok: bool, msg: impl Into<String>) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn e2s<E: std::fmt::Debug>(e: E) -> String {
    format!("{e:?}")
}

fn disc(rng: &mut ChaCha8Rng, r: f64) -> Complex64 {
    Complex64::from_polar(r * rng.gen::<f64>().sqrt(), 2.0 * PI * rng.gen::<f64>())
}

fn max_diff(a: &CMatrix, b: &CMatrix) -> f64 {
    (a - b).iter().map(|z| z.norm()).fold(0.0, f64::max)
}

fn szego_product(x: &PolydiscPoint, y: &PolydiscPoint) -> Complex64 {
    x.coords().iter().zip(y.coords()).map(|(a, b)| 1.0 / (1.0 - a * b.conj())).product()
}

fn random_schur(rng: &mut ChaCha8Rng, dim: usize, depth: u32) -> SchurExpr {
    let pick = if depth == 0 { rng.gen_range(0..3) } else { rng.gen_range(0..5) };
    match pick {
        0 => SchurExpr::Coordinate { axis: rng.gen_range(0..dim) },
        1 => SchurExpr::Mobius { axis: rng.gen_range(0..dim), a: disc(rng, 0.8) },
        2 => SchurExpr::Constant { value: disc(rng, 0.9) },
        3 => SchurExpr::Product { factors: (0..2).map(|_| random_schur(rng, dim, depth - 1)).collect() },
        _ => {
            let raw: Vec<f64> = (0..3).map(|_| rng.gen::<f64>()).collect();
            let s: f64 = raw.iter().sum();
            SchurExpr::Convex {
                weights: raw.iter().map(|t| t / s).collect(),
                terms: (0..3).map(|_| random_schur(rng, dim, depth - 1)).collect(),
            }
        }
    }
}

/// 0.95·F: strictly inside the Schur class, so the Pick matrix is positive definite rather
/// than singular (inner F) and the PSD verdict does not hinge on the tolerance.
fn strict_schur(rng: &mut ChaCha8Rng, dim: usize) -> SchurExpr {
    SchurExpr::Convex { weights: vec![0.95], terms: vec![random_schur(rng, dim, 2)] }
}

/// Fourier coefficients ĉ(γ), γ ∈ [−cap, cap]ⁿ, of samples on an m-per-axis grid (axis 0 fastest),
/// by direct partial DFTs one axis at a time. Result index: γ_0 + cap fastest.
fn quadrature_coefficients(samples: Vec<Complex64>, dim: usize, m: usize, cap: i32) -> Vec<Complex64> {
    let f = (2 * cap + 1) as usize;
    let mut data = samples;
    for _ in 0..dim {
        let rest = data.len() / m;
        let mut out = vec![Complex64::default(); rest * f];
        for (fi, g) in (-cap..=cap).enumerate() {
            let tw: Vec<Complex64> = (0..m).map(|i| Complex64::from_polar(1.0 / m as f64, -2.0 * PI * (g as f64) * i as f64 / m as f64)).collect();
            for r in 0..rest {
                let row = &data[r * m..(r + 1) * m];
                out[r + rest * fi] = row.iter().zip(&tw).map(|(a, b)| a * b).sum();
            }
        }
        data = out;
    }
    data
}

fn criterion_1() -> Outcome {
    let t = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(101);
    let m = 256usize;
    let mut worst: f64 = 0.0;
    for i in 0..20 {
        let dim = 1 + i % 3;
        let cap = [8, 6, 4][dim - 1];
        let mut p = LaurentPolynomial::constant(dim, Complex64::new(1.0, 0.0));
        for _ in 0..5 {
            let total = rng.gen_range(1..=8);
            let mut exp = vec![0i32; dim];
            for _ in 0..total {
                exp[rng.gen_range(0..dim)] += 1;
            }
            p.add_term(MultiIndex::from(exp), disc(&mut rng, 1.0));
        }
        let wg = gram_matrix(&AlgebraSpec::full(dim, cap as u32), &p.mod_squared()).map_err(e2s)?;
        // brute force: sample |p|² on the grid, then integrate against conj(ζ)^γ
        let powers: Vec<Vec<Complex64>> =
            (0..=8).map(|e| (0..m).map(|k| Complex64::from_polar(1.0, 2.0 * PI * (e * k) as f64 / m as f64)).collect()).collect();
        let terms: Vec<(Vec<i32>, Complex64)> = p.terms().map(|(e, c)| (e.entries().to_vec(), *c)).collect();
        let total = m.pow(dim as u32);
        let samples: Vec<Complex64> = (0..total)
            .map(|flat| {
                let idx: Vec<usize> = (0..dim).map(|l| (flat / m.pow(l as u32)) % m).collect();
                let v: Complex64 = terms
                    .iter()
                    .map(|(e, c)| e.iter().zip(&idx).fold(*c, |acc, (&el, &il)| acc * powers[el as usize][il]))
                    .sum();
                Complex64::new(v.norm_sqr(), 0.0)
            })
            .collect();
        let coeffs = quadrature_coefficients(samples, dim, m, cap);
        let f = (2 * cap + 1) as usize;
        for (a, ea) in wg.basis.iter().enumerate() {
            for (b, eb) in wg.basis.iter().enumerate() {
                let gamma = eb.sub(ea);
                let slot: usize = gamma.entries().iter().enumerate().map(|(l, g)| (g + cap) as usize * f.pow(l as u32)).sum();
                worst = worst.max((wg.gram[(a, b)] - coeffs[slot]).norm());
            }
        }
    }
    let secs = t.elapsed().as_secs_f64();
    ensure(worst <= 1e-10, format!("max entry error {worst:.2e}"))?;
    ensure(secs < 30.0, format!("runtime {secs:.1}s"))?;
    Ok(format!("20 weights, max |gram − quadrature| = {worst:.2e}, {secs:.1}s"))
}

fn criterion_2() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(202);
    let nodes = random_nodes(&mut rng, 2, 4, 0.5);
    let exact = CMatrix::from_fn(4, 4, |j, k| szego_product(&nodes[j], &nodes[k]));
    let mut curve = vec![];
    for d in (5..=40).step_by(5) {
        let wg = gram_matrix(&AlgebraSpec::full(2, d), &LaurentPolynomial::one(2)).map_err(e2s)?;
        let kg = kernel_gram_truncated(&wg, &nodes).map_err(e2s)?;
        curve.push((d, max_diff(&kg.entries, &exact)));
    }
    let line: Vec<String> = curve.iter().map(|(d, e)| format!("D={d}:{e:.1e}")).collect();
    let final_err = curve.last().unwrap().1;
    ensure(final_err <= 1e-6, format!("D=40 error {final_err:.2e}"))?;
    // monotone until the error reaches rounding level
    let monotone = curve.windows(2).all(|w| w[1].1 <= w[0].1 || w[1].1 <= 1e-13);
    ensure(monotone, format!("not monotone: {}", line.join(" ")))?;
    Ok(format!("curve {}", line.join(" ")))
}

fn criterion_3() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(303);
    let mut stream = generate_family(&FamilyParams::new(FamilyKind::PR, 2, 1.0, 10, 303)).map_err(e2s)?;
    let ps: Vec<_> = (0..10)
        .map(|_| match stream.next().expect("infinite stream") {
            Weight::PR(cp) => cp,
            _ => unreachable!("pR family"),
        })
        .collect();
    let nodes = random_nodes(&mut rng, 2, 3, 0.5);
    let mut agree: f64 = 0.0;
    for cp in &ps {
        let closed = kernel_gram_closed_form(cp, &nodes).map_err(e2s)?;
        let trunc = kernel_gram_for_weight(cp.poly(), 50, &nodes).map_err(e2s)?;
        agree = agree.max(max_diff(&closed.entries, &trunc.entries));
    }
    ensure(agree <= 1e-6, format!("closed vs truncated (D=50) {agree:.2e}"))?;
    let mut rel: f64 = 0.0;
    let mut statuses = [0usize; 2];
    for _ in 0..10 {
        let x = random_nodes(&mut rng, 2, 3, 0.8);
        let w: Vec<Complex64> = (0..3).map(|_| disc(&mut rng, 0.9)).collect();
        let data = InterpolationData::new(x.clone(), w).map_err(e2s)?;
        let phi = candidate_interpolant(&data).map_err(e2s)?;
        let ks = szego_gram(&x).map_err(e2s)?;
        let base_norm = compressed_operator_norm(&phi, &ks).map_err(e2s)?;
        let base_psd = psd_test(&assemble_pick_matrix(&data, &ks).map_err(e2s)?, 1e-9).map_err(e2s)?.is_psd();
        statuses[base_psd as usize] += 1;
        for cp in &ps {
            let kp = kernel_gram_closed_form(cp, &x).map_err(e2s)?;
            let norm = compressed_operator_norm(&phi, &kp).map_err(e2s)?;
            rel = rel.max((norm - base_norm).abs() / base_norm);
            let psd = psd_test(&assemble_pick_matrix(&data, &kp).map_err(e2s)?, 1e-9).map_err(e2s)?.is_psd();
            ensure(psd == base_psd, "PSD status differs across the family")?;
        }
    }
    ensure(rel <= 1e-8, format!("compressed norm relative spread {rel:.2e}"))?;
    Ok(format!(
        "closed vs truncated (D=50) {agree:.1e}; norm spread {rel:.1e}; status identical ({} psd, {} refuted data sets)",
        statuses[1], statuses[0]
    ))
}

fn criterion_4() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(404);
    let mut quotient_err: f64 = 0.0;
    let mut counts = [0usize; 2];
    for i in 0..100 {
        let n = rng.gen_range(1..=4);
        let x = random_nodes(&mut rng, 1, n, 0.7);
        let data = if i % 2 == 0 {
            sample_schur(&strict_schur(&mut rng, 1), x).map_err(e2s)?
        } else {
            InterpolationData::new(x, (0..n).map(|_| disc(&mut rng, 0.95)).collect()).map_err(e2s)?
        };
        let oracle = pick_1d(&data).map_err(e2s)?;
        let fam = FamilyParams::new(FamilyKind::Both, 1, 1.0, 40, i as u64);
        let cert = check_interpolation(&data, &fam, &SearchOptions::default()).map_err(e2s)?;
        let refuted = cert.status == CertificateStatus::Refuted;
        ensure(refuted != oracle.solvable, format!("instance {i}: check refuted={refuted}, pick_1d solvable={}", oracle.solvable))?;
        counts[oracle.solvable as usize] += 1;
        if data.targets().iter().any(|w| w.norm() > 0.0) {
            let phi = candidate_interpolant(&data).map_err(e2s)?;
            let est = quotient_norm_estimate(&phi, &data, &fam, 40).map_err(e2s)?;
            let exact = extremal_norm_1d(&data).map_err(e2s)?;
            quotient_err = quotient_err.max((est.lower_bound - exact).abs());
        }
    }
    ensure(quotient_err <= 1e-4, format!("quotient vs extremal {quotient_err:.2e}"))?;
    let fixture = InterpolationData::new(
        vec![PolydiscPoint::real(&[0.0]), PolydiscPoint::real(&[0.5])],
        vec![Complex64::new(0.0, 0.0), Complex64::new(0.75, 0.0)],
    )
    .map_err(e2s)?;
    let cert = check_interpolation(&fixture, &FamilyParams::new(FamilyKind::Both, 1, 1.0, 200, 20240601), &SearchOptions::default())
        .map_err(e2s)?;
    let lmin = cert.refutation.as_ref().ok_or("fixture not refuted")?.min_eigenvalue;
    let hand = (19.0 - 601f64.sqrt()) / 24.0;
    ensure((lmin - hand).abs() <= 1e-10, format!("fixture λmin {lmin} vs {hand}"))?;
    Ok(format!(
        "100 instances agree ({} solvable, {} not); quotient err {quotient_err:.1e}; fixture λmin {lmin:.12}",
        counts[1], counts[0]
    ))
}

fn criterion_5() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(505);
    let mut stream = generate_family(&FamilyParams::new(FamilyKind::Both, 2, 1.0, 50, 505)).map_err(e2s)?;
    let mut counts = [0usize; 2];
    for i in 0..50 {
        let w = stream.next().expect("infinite stream");
        let x = random_nodes(&mut rng, 2, 3, 0.7);
        let data = if i % 2 == 0 {
            sample_schur(&strict_schur(&mut rng, 2), x).map_err(e2s)?
        } else {
            InterpolationData::new(x, (0..3).map(|_| disc(&mut rng, 0.9)).collect()).map_err(e2s)?
        };
        let kg = kernel_for_weight(&w, data.nodes(), 16, true).map_err(e2s)?;
        let phi = candidate_interpolant(&data).map_err(e2s)?;
        let norm = compressed_operator_norm(&phi, &kg).map_err(e2s)?;
        let psd = psd_test(&assemble_pick_matrix(&data, &kg).map_err(e2s)?, 1e-9).map_err(e2s)?.is_psd();
        ensure((norm <= 1.0) == psd, format!("pair {i}: norm {norm} but psd={psd}"))?;
        counts[psd as usize] += 1;
    }
    Ok(format!("50 pairs, 0 disagreements ({} contractive, {} not)", counts[1], counts[0]))
}

fn criterion_6() -> Outcome {
    let t = Instant::now();
    let grid = TorusGrid::new(vec![2048, 520]).map_err(e2s)?;
    let f = |z: &[Complex64]| (Complex64::new(2.0, 0.0) + z[0]).norm_sqr();
    let samples: Vec<f64> = (0..grid.len()).map(|i| f(&grid.node(i))).collect();
    let cert = approximate_modulus(&samples, &grid, 1.0, 0.05, &ModulusOptions::default()).map_err(e2s)?;
    // independent check: direct evaluation of p on a 512 × 512 grid
    let terms: Vec<(Vec<i32>, Complex64)> = cert.p.terms().map(|(e, c)| (e.entries().to_vec(), *c)).collect();
    let m = 512;
    let mut worst: f64 = 0.0;
    for i in 0..m {
        for j in 0..m {
            let z = [
                Complex64::from_polar(1.0, 2.0 * PI * i as f64 / m as f64),
                Complex64::from_polar(1.0, 2.0 * PI * j as f64 / m as f64),
            ];
            let p: Complex64 = terms.iter().map(|(e, c)| c * z[0].powi(e[0]) * z[1].powi(e[1])).sum();
            worst = worst.max((f(&z) - p.norm_sqr()).abs());
        }
    }
    ensure(worst < 0.05, format!("512-grid sup |f − |p|²| = {worst}"))?;
    let nv = certify_nonvanishing(&cert.p, 1.0, &TorusGrid::uniform(2, 64), &MarginPolicy::default()).map_err(e2s)?;
    ensure(nv.is_certified(), format!("p not certified zero-free: {nv:?}"))?;
    let secs = t.elapsed().as_secs_f64();
    ensure(secs < 60.0, format!("runtime {secs:.1}s"))?;
    Ok(format!(
        "certified bound {:.4}, 512-grid sup error {worst:.4}, order {}, {} terms, {secs:.1}s",
        cert.achieved_bound,
        cert.fejer_order,
        terms.len()
    ))
}

fn criterion_7() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(707);
    let opts = SearchOptions { degree: 24, ..Default::default() };
    let mut weights = 0;
    for i in 0..50 {
        let n = rng.gen_range(2..=4);
        let x = random_nodes(&mut rng, 2, n, 0.7);
        let data = sample_schur(&strict_schur(&mut rng, 2), x).map_err(e2s)?;
        let cert = check_interpolation(&data, &FamilyParams::new(FamilyKind::Both, 2, 1.0, 200, i), &opts).map_err(e2s)?;
        ensure(
            cert.status == CertificateStatus::NoRefutation,
            format!("instance {i} refuted: {:?}", cert.refutation.map(|r| (r.index, r.family, r.min_eigenvalue))),
        )?;
        weights += cert.weights_tried;
    }
    Ok(format!("50 instances, {weights} weight trials, no refutation"))
}

fn criterion_8() -> Outcome {
    let data = InterpolationData::new(
        vec![PolydiscPoint::real(&[0.0, 0.0]), PolydiscPoint::real(&[0.5, 0.5])],
        vec![Complex64::new(0.0, 0.0), Complex64::new(0.5, 0.0)],
    )
    .map_err(e2s)?;
    let grid = TorusGrid::uniform(2, 64);
    let phi = grid.sample(|z| (z[0] + z[1]) / 2.0);
    let dual = dual_extremal_search(&data, &phi, 16, &grid, &DualOptions::default()).map_err(e2s)?;
    let rep = boundary_explorer(&phi, &dual, 2..=10, &grid).map_err(e2s)?;
    let mut problems = vec![];
    if dual.objective < 0.98 {
        problems.push(format!("objective {:.5} < 0.98", dual.objective));
    }
    for (kr, m) in rep.per_k.iter().zip(&rep.masks) {
        let exact = (0..m.e.len()).all(|i| (m.a[i] || m.b[i]) == m.e[i] && !(m.a[i] && m.b[i]) && (!m.b[i] || m.s[i]));
        if !exact {
            problems.push(format!("k={} mask algebra", kr.k));
        }
        if kr.m_a > kr.bound + kr.slack {
            problems.push(format!("k={} m(A)={:.4} > {:.4}", kr.k, kr.m_a, kr.bound + kr.slack));
        }
    }
    let inner = InterpolationData::new(
        vec![PolydiscPoint::real(&[0.0]), PolydiscPoint::real(&[0.6])],
        vec![Complex64::new(0.0, 0.0), Complex64::new(0.6, 0.0)],
    )
    .map_err(e2s)?;
    let g1 = TorusGrid::uniform(1, 64);
    let z = g1.sample(|z| z[0]);
    let d1 = dual_extremal_search(&inner, &z, 8, &g1, &DualOptions::default()).map_err(e2s)?;
    let r1 = boundary_explorer(&z, &d1, 2..=10, &g1).map_err(e2s)?;
    if r1.per_k.iter().any(|k| k.m_e > 0.0) {
        problems.push("inner fixture has nonempty E_k".into());
    }
    let summary = format!(
        "objective {:.5} (upper {:.5}), slack {:.4}, m(A_k) for k=2..10: {}",
        dual.objective,
        dual.upper_bound,
        rep.per_k[0].slack,
        rep.per_k.iter().map(|k| format!("{:.3}", k.m_a)).collect::<Vec<_>>().join(" ")
    );
    if problems.is_empty() {
        Ok(summary)
    } else {
        Err(format!("{}; {summary}", problems.join("; ")))
    }
}

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(name)
}

fn run_cli(args: &[&str], input: &Path, out: &Path) -> Result<Vec<u8>, String> {
    Command::new(env!("CARGO_BIN_EXE_picklab"))
        .env_remove("PICKLAB_THREADS")
        .stderr(Stdio::null())
        .args(args)
        .arg("--input")
        .arg(input)
        .arg("--output")
        .arg(out)
        .status()
        .map_err(e2s)?;
    std::fs::read(out).map_err(e2s)
}

fn criterion_9() -> Outcome {
    let dir = tempfile::tempdir().map_err(e2s)?;
    let out = dir.path().join("run.json");
    let sampled = dir.path().join("sampled.json");
    run_cli(&["oracle", "sample"], &fixture("sample_2d.json"), &sampled)?;
    let cases: Vec<(Vec<&str>, PathBuf)> = vec![
        (vec!["check"], fixture("unsolvable_1d.json")),
        (vec!["check"], fixture("solvable_1d.json")),
        (vec!["check", "--budget", "60"], sampled.clone()),
        (vec!["oracle", "sample"], fixture("sample_2d.json")),
        (vec!["oracle", "pick1d"], fixture("solvable_1d.json")),
        (vec!["oracle", "extremal1d"], fixture("solvable_1d.json")),
        (vec!["oracle", "agler2d"], fixture("agler_infeasible.json")),
        (vec!["extremal-norm"], fixture("solvable_1d.json")),
        (vec!["dual-search", "--grid", "32", "--budget", "4"], fixture("dual_1d.json")),
        (vec!["boundary-explore", "--grid", "32", "--budget", "4", "--k-max", "4"], fixture("dual_1d.json")),
        (vec!["approx-modulus", "--epsilon", "0.2"], fixture("modulus_1d.csv")),
        (vec!["check"], fixture("malformed.json")),
    ];
    let side = |k: u32| dir.path().join(format!("run.k{k}.csv"));
    for (args, input) in &cases {
        let first = run_cli(args, input, &out)?;
        let csv_first: Vec<Option<Vec<u8>>> = (2..=4).map(|k| std::fs::read(side(k)).ok()).collect();
        for threads in ["0", "1"] {
            let mut a = args.clone();
            if threads == "1" {
                a.extend(["--threads", "1"]);
            }
            let again = run_cli(&a, input, &out)?;
            ensure(again == first, format!("{args:?} differs on rerun (threads={threads})"))?;
            let csv_again: Vec<Option<Vec<u8>>> = (2..=4).map(|k| std::fs::read(side(k)).ok()).collect();
            ensure(csv_again == csv_first, format!("{args:?} mask files differ"))?;
        }
        for k in 2..=4 {
            let _ = std::fs::remove_file(side(k));
        }
    }
    Ok(format!("{} fixture runs byte-identical across reruns and thread counts", cases.len()))
}

fn main() {
    let criteria: [(u32, fn() -> Outcome); 9] = [
        (1, criterion_1),
        (2, criterion_2),
        (3, criterion_3),
        (4, criterion_4),
        (5, criterion_5),
        (6, criterion_6),
        (7, criterion_7),
        (8, criterion_8),
        (9, criterion_9),
    ];
    let only: Vec<u32> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let mut failed = 0;
    for (n, f) in criteria {
        if !only.is_empty() && !only.contains(&n) {
            continue;
        }
        let t = Instant::now();
        let res = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|p| {
            Err(p.downcast_ref::<String>().cloned().or(p.downcast_ref::<&str>().map(|s| s.to_string())).unwrap_or_default())
        });
        let secs = t.elapsed().as_secs_f64();
        match res {
            Ok(msg) => println!("criterion {n}: PASS ({secs:.1}s) {msg}"),
            Err(msg) => {
                failed += 1;
                println!("criterion {n}: FAIL ({secs:.1}s) {msg}");
            }
        }
    }
    if failed > 0 {
        std::process::exit(1);
    }
}
