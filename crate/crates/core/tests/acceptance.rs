//! Acceptance criteria 1-9, one line each. Runs without the libtest harness
//! so the report is always printed; exits non-zero if any criterion fails.

use std::collections::BTreeSet;
use std::time::{Duration, Instant};

use rug::{Float, Integer, Rational};

use lel_core::finite::{exact_ratio, length_corollary_error, sieve_asymptote, torus_alpha_n, walks_to_hikes_check, Digraph, VertexSet};
use lel_core::green::c_entry;
use lel_core::lattice::{build_patch, enumerate_anchored_saps, rectangle, Point, Sap};
use lel_core::linalg::{adjugate_fl, pipoly_mat_mul};
use lel_core::oracle::{count_last_loop, last_loop_histogram};
use lel_core::ring::PiPoly;
use lel_core::series::{
    alpha, closed_form_check, mu_tilde, r_series, ratio_convergence, rp_series_infinite, torus, zeta_tilde, ClosedForm,
    RatSeries,
};
use lel_core::sieve::{fit_exponent, fraction_exact, fraction_numeric, patch_matrix, sweep, SweepMode, SweepOptions, SweepTable};
use lel_core::store::Store;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn within_budget(elapsed: Duration, budget: Duration) -> Result<(), String> {
    ensure(elapsed <= budget, || format!("took {elapsed:.1?}, budget {budget:?}"))
}

fn sap(s: &str) -> Sap {
    Sap::parse(s).expect("valid polygon")
}

fn series_ints(s: &RatSeries, start: usize, step: usize, n: usize) -> Vec<Integer> {
    (0..n).map(|i| s.coeffs()[start + i * step].numer().clone()).collect()
}

fn ints(v: &[i64]) -> Vec<Integer> {
    v.iter().map(|&x| Integer::from(x)).collect()
}

fn near(name: &str, got: &Float, want: f64, tol: f64) -> Result<(), String> {
    let d = Float::with_val(got.prec(), got - want).abs().to_f64();
    ensure(d <= tol, || format!("{name} = {got:.8e}, want {want:e} ± {tol:e}"))
}

fn criterion_1() -> Outcome {
    let start = Instant::now();
    let edge = fraction_exact(&sap("RL"));
    ensure(edge == PiPoly::from_coeffs(vec![Rational::from((1, 8))]), || format!("edge = {edge}"))?;

    let square = fraction_exact(&sap("RULD"));
    // 128(π − 2)/(4⁴π³) = 1/(2π²) − 1/π³
    let want = PiPoly::from_coeffs(vec![Rational::new(), Rational::new(), Rational::from((1, 2)), Rational::from(-1)]);
    ensure(square == want, || format!("unit square = {square}"))?;
    near("unit square", &square.eval(128), 0.0184, 5e-5)?;

    for (s, v, tol) in [("RRULLD", 0.002585, 5e-7), ("RRRULLLD", 0.00035499, 5e-9), ("RRUULLDD", 0.00044623, 5e-9)] {
        near(s, &fraction_exact(&sap(s)).eval(128), v, tol)?;
    }
    let t = start.elapsed();
    within_budget(t, Duration::from_secs(1))?;
    Ok(format!("edge 1/8, square {square}, rectangles to printed digits ({t:.2?})"))
}

fn criterion_2() -> Outcome {
    let start = Instant::now();
    let long = fraction_numeric(&sap("RRRUULDLUURULLDDDD"), 256).map_err(|e| e.to_string())?;
    near("18-step", &long, 7.7644e-9, 5e-13)?;
    let big = fraction_numeric(&rectangle(70, 70), 1024).map_err(|e| e.to_string())?;
    near("70x70", &big, 1.5236e-108, 5e-113)?;
    let t = start.elapsed();
    within_budget(t, Duration::from_secs(60))?;
    Ok(format!("18-step {:.5e}, 70x70 {:.5e} at 1024 bits ({t:.1?})", long.to_f64(), big.to_f64()))
}

fn criterion_3() -> Outcome {
    let start = Instant::now();
    let re = rp_series_infinite(&sap("RL"), 12).map_err(|e| e.to_string())?;
    ensure(series_ints(&re, 2, 2, 6) == ints(&[1, 7, 70, 807, 10046, 131206]), || "R_e coefficients".into())?;
    let r11 = rp_series_infinite(&sap("RULD"), 12).map_err(|e| e.to_string())?;
    ensure(series_ints(&r11, 4, 2, 5) == ints(&[1, 12, 144, 1804, 23464]), || "R_11 coefficients".into())?;
    let z = zeta_tilde(12);
    ensure(series_ints(&z, 0, 2, 7) == ints(&[1, 2, 11, 86, 805, 8402, 94306]), || "zeta-tilde".into())?;
    let m = mu_tilde(12);
    ensure(series_ints(&m, 0, 2, 7) == ints(&[1, -2, -7, -50, -456, -4728, -53095]), || "mu-tilde".into())?;
    let a = alpha(128).map_err(|e| e.to_string())?;
    near("alpha", &a, 0.8025, 5e-5)?;
    let t = start.elapsed();
    within_budget(t, Duration::from_secs(10))?;
    Ok(format!("R_e, R_11, zeta-tilde, mu-tilde exact; alpha {:.6} ({t:.2?})", a.to_f64()))
}

fn criterion_4() -> Outcome {
    let start = Instant::now();
    let saps: Vec<Sap> = enumerate_anchored_saps(8).collect();
    let mut pairs = 0;
    for p in &saps {
        let series = rp_series_infinite(p, 10).map_err(|e| e.to_string())?;
        for l in (p.len()..=10).step_by(2) {
            let count = count_last_loop(p, l).map_err(|e| e.to_string())?;
            ensure(*series.coeffs()[l].numer() == count, || format!("{p} at length {l}: {count}"))?;
            pairs += 1;
        }
    }
    for l in (2..=10).step_by(2) {
        let total: u64 = last_loop_histogram(l).map_err(|e| e.to_string())?.values().sum();
        let c = Integer::from(Integer::binomial_u(l as u32, l as u32 / 2));
        ensure(total == c.clone() * c, || format!("histogram total at {l}: {total}"))?;
    }
    let seven = count_last_loop(&sap("RL"), 4).map_err(|e| e.to_string())?;
    let twelve = count_last_loop(&sap("RULD"), 6).map_err(|e| e.to_string())?;
    ensure(seven == 7 && twelve == 12, || format!("counts {seven}, {twelve}"))?;
    Ok(format!("{} polygons, {pairs} (p, l) pairs, histogram totals, counts 7 and 12 ({:.1?})", saps.len(), start.elapsed()))
}

const TABLE: [f64; 7] = [0.5, 0.6473, 0.7093, 0.7493, 0.7774, 0.7984, 0.8149];

fn criterion_5() -> Outcome {
    let start = Instant::now();
    let opts = SweepOptions { max_len: 14, mode: SweepMode::Numeric, precision: 128, dedup: true };
    let out = sweep(&opts, None).map_err(|e| e.to_string())?;
    let rows: Vec<(f64, f64)> = out.table.rows.iter().map(|r| (r.len as f64, r.s.to_f64())).collect();
    ensure(rows.len() == TABLE.len(), || format!("{} rows", rows.len()))?;
    for ((l, s), want) in rows.iter().zip(TABLE) {
        ensure((s - want).abs() <= 5e-5, || format!("S({l}) = {s:.6}, want {want}"))?;
    }
    let slope = fit_exponent(&rows).map_err(|e| e.to_string())?;
    ensure((-0.75..=-0.45).contains(&slope), || format!("exponent {slope:.3} outside [-0.75, -0.45]"))?;
    let t = start.elapsed();
    within_budget(t, Duration::from_secs(300))?;
    Ok(format!("S(2..14) to 4 dp, exponent {slope:.3} ({t:.1?})"))
}

fn criterion_6() -> Outcome {
    let start = Instant::now();
    let t = torus(8).map_err(|e| e.to_string())?;
    let g = t.to_digraph();
    let p = VertexSet::new(vec![t.index(Point::new(0, 0)), t.index(Point::new(1, 0))]);
    let k_max = t.vertex_count();
    let asym = sieve_asymptote(&g, &p, 2, 256).map_err(|e| e.to_string())?;
    let mut worst = 0f64;
    for l in (4..=40).step_by(2) {
        let exact = exact_ratio(&g, &p, 2, l).map_err(|e| e.to_string())?;
        let err = length_corollary_error(&g, &p, 2, l, k_max, 256).map_err(|e| e.to_string())?;
        let predicted = Float::with_val(256, &asym + &err);
        let rel = (Float::with_val(256, &predicted - &exact) / Float::with_val(256, &exact)).abs().to_f64();
        ensure(rel <= 1e-9, || format!("l = {l}: relative error {rel:e}"))?;
        worst = worst.max(rel);
    }
    for n in [4, 8] {
        let (lhs, rhs) = walks_to_hikes_check(&torus(n).map_err(|e| e.to_string())?, 256).map_err(|e| e.to_string())?;
        let rel = (Float::with_val(256, &lhs - &rhs) / &rhs).abs().to_f64();
        ensure(rel <= 1e-9, || format!("torus {n}: det {lhs:.10e} vs alpha_N/N {rhs:.10e}"))?;
    }
    let a = alpha(128).map_err(|e| e.to_string())?.to_f64();
    let sides = [4usize, 8, 16, 32];
    let roots: Vec<f64> = sides
        .iter()
        .map(|&n| {
            let tg = torus(n).expect("n ≥ 3");
            torus_alpha_n(&tg, 128).to_f64().powf(1.0 / tg.vertex_count() as f64)
        })
        .collect();
    let gaps: Vec<f64> = roots.iter().map(|r| (r - a).abs()).collect();
    ensure(gaps.windows(2).all(|w| w[1] < w[0]) && gaps[3] < 0.01, || format!("alpha_N^(1/N) = {roots:?} not approaching {a:.4}"))?;
    let passed = format!(
        "torus 8 edge worst rel {worst:.1e} over l in [4, 40]; walks-to-hikes n = 4, 8; alpha_N^(1/N) -> alpha ({:.1?})",
        start.elapsed()
    );
    let shown: Vec<String> = sides.iter().zip(&roots).map(|(n, r)| format!("n={n}: {r:.4}")).collect();
    ensure(roots.windows(2).all(|w| w[0] < w[1]), || {
        format!("{passed}; but alpha_N^(1/N) decreases toward {a:.4} ({}), not increasing", shown.join(", "))
    })?;
    Ok(passed)
}

fn slope(pts: &[(f64, f64)]) -> f64 {
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    sxy / sxx
}

fn criterion_7() -> Outcome {
    let mut parts = Vec::new();
    for (name, s) in [("edge", "RL"), ("square", "RULD")] {
        let points = ratio_convergence(&sap(s), 40).map_err(|e| e.to_string())?;
        let window: Vec<_> = points.iter().filter(|r| (20..=40).contains(&r.ell)).collect();
        let max_scaled = window.iter().map(|r| r.scaled_error.abs()).fold(0.0, f64::max);
        let raw: Vec<(f64, f64)> =
            window.iter().map(|r| ((r.ell as f64).ln(), (r.scaled_error / r.ell as f64).abs().ln())).collect();
        let scaled: Vec<(f64, f64)> = window.iter().map(|r| ((r.ell as f64).ln(), r.scaled_error.abs().ln())).collect();
        let (k_raw, k_scaled) = (slope(&raw), slope(&scaled));
        ensure(max_scaled < 1.0, || format!("{name}: scaled error reaches {max_scaled:.3}"))?;
        ensure((-1.3..=-0.7).contains(&k_raw), || format!("{name}: error slope {k_raw:.3} outside -1 ± 0.3"))?;
        parts.push(format!("{name} max scaled {max_scaled:.3}, error slope {k_raw:.3}, scaled slope {k_scaled:.3}"));
    }
    Ok(parts.join("; "))
}

fn criterion_8() -> Outcome {
    let mut parts = Vec::new();
    for form in [ClosedForm::Edge, ClosedForm::UnitSquare] {
        let (s, c) = closed_form_check(form, 0.1).map_err(|e| e.to_string())?;
        ensure((s - c).abs() <= 1e-8, || format!("{form:?}: series {s:e}, closed form {c:e}"))?;
        parts.push(format!("{form:?} {s:.10} (diff {:.1e})", (s - c).abs()));
    }
    Ok(parts.join(", "))
}

fn bits(t: &SweepTable) -> Vec<(usize, u64, String)> {
    t.rows.iter().map(|r| (r.len, r.count, r.s.to_string_radix(16, None))).collect()
}

fn criterion_9() -> Outcome {
    // Ring axioms on a few elements.
    let q = |n: i64, d: i64| Rational::from((n, d));
    let elems = [
        PiPoly::from_coeffs(vec![q(1, 3), q(-2, 1)]),
        PiPoly::from_coeffs(vec![q(0, 1), q(5, 7), q(1, 2)]),
        PiPoly::from_coeffs(vec![q(-4, 1)]),
    ];
    for a in &elems {
        for b in &elems {
            for c in &elems {
                ensure(a * b == b * a && &(a + b) + c == a + &(b + c), || "ring commutativity/associativity".into())?;
                ensure(a * &(b + c) == &(a * b) + &(a * c), || "ring distributivity".into())?;
            }
        }
    }

    // ζ·μ = 1 on a weighted digraph, and for the hike series.
    let g = Digraph::new(3, &[(0, 1, q(1, 1)), (1, 2, q(1, 1)), (2, 0, q(1, 1)), (0, 2, q(1, 2)), (1, 1, q(1, 3))])
        .map_err(|e| e.to_string())?;
    ensure(&g.zeta_series(12) * &RatSeries::new(g.mu_poly(), 12) == RatSeries::one(12), || "zeta·mu".into())?;
    ensure(&zeta_tilde(24) * &mu_tilde(24) == RatSeries::one(24), || "zeta-tilde·mu-tilde".into())?;

    // M·adj(M) = det(M)·I over ℚ[χ] for patch matrices.
    for s in ["RL", "RULD", "RRULLD"] {
        let m = patch_matrix(&build_patch(&sap(s)));
        let (adj, det) = adjugate_fl(&m);
        let prod = pipoly_mat_mul(&m, &adj);
        for (i, row) in prod.iter().enumerate() {
            for (j, e) in row.iter().enumerate() {
                ensure(*e == if i == j { det.clone() } else { PiPoly::zero() }, || format!("{s}: M·adj(M) at ({i}, {j})"))?;
            }
        }
    }

    // C-matrix recursion, symmetry, second-neighbour identity.
    for dx in -6i64..=6 {
        for dy in -6i64..=6 {
            let around = [(1, 0), (-1, 0), (0, 1), (0, -1)]
                .iter()
                .fold(PiPoly::zero(), |acc, (ox, oy)| &acc + &c_entry(dx + ox, dy + oy));
            let delta = if dx == 0 && dy == 0 { PiPoly::from(4) } else { PiPoly::zero() };
            ensure(&PiPoly::from(4) * &c_entry(dx, dy) == &delta + &around, || format!("recursion at ({dx}, {dy})"))?;
            ensure(c_entry(dx, dy) == c_entry(dy, -dx), || format!("symmetry at ({dx}, {dy})"))?;
        }
    }
    let second = &(&PiPoly::from(4) * &c_entry(2, 0)) + &(&PiPoly::from(8) * &c_entry(1, 1));
    ensure(&second + &(&PiPoly::from(4) * &c_entry(0, 0)) == PiPoly::from(-16), || "second-neighbour identity".into())?;

    // Orientation and anchoring invariance.
    for s in ["RRULLD", "RRUULLDD", "RRUULDLD"] {
        let p = sap(s);
        let f = fraction_exact(&p);
        ensure(fraction_exact(&p.reversed()) == f && fraction_exact(&p.rotated(1)) == f, || format!("{s} invariance"))?;
    }

    // Completeness for ℓ ≤ 10.
    let r = r_series(10);
    let mut sum = vec![Integer::new(); 11];
    for p in enumerate_anchored_saps(10) {
        for (l, c) in rp_series_infinite(&p, 10).map_err(|e| e.to_string())?.coeffs().iter().enumerate() {
            sum[l] += c.numer();
        }
    }
    ensure((1..=10).all(|l| sum[l] == *r.coeffs()[l].numer()), || "completeness".into())?;

    // Thread-count independence and bit-exact cache resume.
    let opts = SweepOptions { max_len: 10, mode: SweepMode::Exact, precision: 192, dedup: true };
    let pool = |n| rayon::ThreadPoolBuilder::new().num_threads(n).build().expect("pool");
    let one = pool(1).install(|| sweep(&opts, None)).map_err(|e| e.to_string())?;
    let four = pool(4).install(|| sweep(&opts, None)).map_err(|e| e.to_string())?;
    ensure(bits(&one.table) == bits(&four.table), || "1 vs 4 threads differ".into())?;

    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let path = dir.path().join("acceptance.lel.jsonl");
    {
        let mut st = Store::open(&path, false).map_err(|e| e.to_string())?;
        sweep(&opts, Some(&mut st)).map_err(|e| e.to_string())?;
    }
    let text = std::fs::read_to_string(&path).map_err(|e| e.to_string())?;
    let lines: Vec<&str> = text.lines().collect();
    std::fs::write(&path, lines[..lines.len() / 3].join("\n") + "\n").map_err(|e| e.to_string())?;
    let mut st = Store::open(&path, false).map_err(|e| e.to_string())?;
    let pending: BTreeSet<String> = st.resume_sweep(10);
    let resumed = pool(3).install(|| sweep(&opts, Some(&mut st))).map_err(|e| e.to_string())?;
    ensure(resumed.computed == pending.len() && resumed.cached > 0, || "resume recomputed the wrong classes".into())?;
    ensure(bits(&resumed.table) == bits(&one.table), || "resumed table differs".into())?;

    Ok(format!("ring, zeta·mu, M·adj(M), C identities, invariance, completeness, threads 1/4, resume of {} classes", pending.len()))
}

/// Criteria whose wording cannot hold; they are run and reported, and the
/// run only fails if one of them unexpectedly passes or another one fails.
const EXPECTED_FAILURES: [(usize, &str); 1] = [(
    6,
    "alpha_N^(1/N) on n x n tori converges to alpha from above (4x4: 42467328 spanning trees give 0.9718), so it cannot increase toward it",
)];

fn main() {
    let criteria: [Criterion; 9] = [
        ("golden exact values", criterion_1),
        ("long polygons", criterion_2),
        ("generating-function coefficients", criterion_3),
        ("oracle equivalence", criterion_4),
        ("S(L) table", criterion_5),
        ("finite sieve", criterion_6),
        ("convergence law", criterion_7),
        ("closed forms", criterion_8),
        ("property suites", criterion_9),
    ];
    let filter: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    let mut unexpected = Vec::new();
    for (i, (name, run)) in criteria.iter().enumerate() {
        let expected = EXPECTED_FAILURES.iter().find(|(n, _)| *n == i + 1);
        let label = format!("criterion {}: {name}", i + 1);
        if !filter.is_empty() && !filter.iter().any(|f| label.contains(f.as_str())) {
            continue;
        }
        match (run(), expected) {
            (Ok(detail), None) => println!("PASS {label}: {detail}"),
            (Ok(detail), Some(_)) => {
                unexpected.push(i + 1);
                println!("PASS {label}: {detail} (listed as an expected failure)");
            }
            (Err(why), Some((_, reason))) => println!("FAIL {label}: {why} [expected: {reason}]"),
            (Err(why), None) => {
                unexpected.push(i + 1);
                println!("FAIL {label}: {why}");
            }
        }
    }
    if !unexpected.is_empty() {
        println!("unexpected outcome for criteria {unexpected:?}");
        std::process::exit(1);
    }
}
