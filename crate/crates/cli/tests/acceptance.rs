//! Acceptance suite: one line per criterion, non-zero exit if any fails.

mod common;

use std::collections::BTreeSet;
use std::f64::consts::TAU;
use std::time::{Duration, Instant};

use common::{check_golden, run, GOLDEN};
use mixed_newton::degeneracy::{monomial_rule, FaceStatus};
use mixed_newton::family::{pullback_covering, CoveringSpec, FamilyPolynomial};
use mixed_newton::newton::classify_subspaces;
use mixed_newton::probe::euler_residual;
use mixed_newton::tameness::{tameness_summary, TamenessConfig};
use mixed_newton::{Complex, MixedPolynomial, Subset};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

type Outcome = Result<String, String>;

macro_rules! ensure {
    ($cond:expr, $($msg:tt)+) => {
        if !$cond {
            return Err(format!($($msg)+));
        }
    };
}

const F51: &str = "~z1^2*z2^3 + z1^3*~z2^2 + t*z1^2*z2^4";
const CASES: usize = 128;

fn c(re: f64, im: f64) -> Complex {
    Complex::new(re, im)
}

fn faces_with(v: &Value, key: &str) -> Vec<Value> {
    v["payload"][key].as_array().cloned().unwrap_or_default()
}

fn criterion_1() -> Outcome {
    let out = run(&["faces", "--poly", "ex22.mp", "--json", "-"], None);
    ensure!(out.code == 0, "exit {}: {}", out.code, out.stderr);
    let v = out.json();
    ensure!(
        v["payload"]["vertices"] == json!([[2, 3], [3, 2], [6, 0]]),
        "vertices {}",
        v["payload"]["vertices"]
    );
    let edges: BTreeSet<String> = faces_with(&v, "compact_faces")
        .iter()
        .filter(|f| f["dim"] == 1)
        .map(|f| f["vertices"].to_string())
        .collect();
    let expected: BTreeSet<String> = ["[[2,3],[3,2]]", "[[3,2],[6,0]]"].iter().map(|s| s.to_string()).collect();
    ensure!(edges == expected, "compact edges {:?}", edges);
    let essential = faces_with(&v, "essential_noncompact");
    ensure!(essential.len() == 1, "{} essential faces", essential.len());
    ensure!(
        essential[0]["vertices"] == json!([[2, 3]]) && essential[0]["direction"] == json!([2]),
        "essential face {}",
        essential[0]
    );
    let rejected = faces_with(&v, "rejected_noncompact");
    ensure!(
        rejected
            .iter()
            .any(|f| f["vertices"] == json!([[6, 0]]) && f["direction"] == json!([1])),
        "(6,0)+R e1 not rejected: {:?}",
        rejected
    );
    Ok("3 vertices, edges AB and BC, essential (2,3)+R e2 with I = {2}, (6,0)+R e1 rejected".into())
}

fn criterion_2() -> Outcome {
    let out = run(&["nondeg", "--poly", "ex23.mp", "--starts", "512", "--seed", "0", "--json", "-"], None);
    ensure!(out.code == 0, "exit {}: {}", out.code, out.stderr);
    let v = out.json();
    ensure!(v["payload"]["convenient"] == true, "not convenient");
    let faces = faces_with(&v, "faces");
    ensure!(faces.len() == 5, "{} face verdicts", faces.len());
    let mut min_edge = f64::INFINITY;
    for f in &faces {
        let dim = f["face"]["dim"].as_u64().unwrap_or(99);
        let status = f["status"].as_str().unwrap_or("");
        if dim == 0 {
            ensure!(status == "PROVEN_NONDEGENERATE", "vertex {} is {}", f["face"]["vertices"], status);
        } else {
            let r = f["min_residual_seen"].as_f64().unwrap_or(0.0);
            let starts = f["starts"].as_u64().unwrap_or(0);
            ensure!(status == "NO_CRITICAL_POINT_FOUND", "edge {} is {}", f["face"]["vertices"], status);
            ensure!(r > 1e-3, "edge {} has min residual {:.3e}", f["face"]["vertices"], r);
            ensure!(starts >= 512, "edge used {} starts", starts);
            min_edge = min_edge.min(r);
        }
    }
    Ok(format!("5 faces pass; min edge residual {:.4}", min_edge))
}

fn criterion_3() -> Outcome {
    let out = run(&["tame", "--poly", "ex24.mp", "--json", "-"], None);
    ensure!(out.code == 0, "exit {}: {}", out.code, out.stderr);
    let v = out.json();
    let faces = v["payload"]["summary"]["faces"].as_array().cloned().unwrap_or_default();
    let by_dir = |d: u64| faces.iter().find(|f| f["face"]["direction"] == json!([d])).cloned();
    let d1 = by_dir(2).ok_or("no essential face over I = {2}")?;
    ensure!(d1["status"] == "FAILURE_AT", "Δ1 status {}", d1["status"]);
    let r1 = d1["radius"].as_f64().unwrap_or(f64::NAN);
    ensure!((0.475..=0.525).contains(&r1), "Δ1 failure radius {}", r1);
    let d2 = by_dir(1).ok_or("no essential face over I = {1}")?;
    ensure!(d2["status"] == "TAME_UP_TO", "Δ2 status {}", d2["status"]);
    let r2 = d2["radius"].as_f64().unwrap_or(f64::INFINITY);
    ensure!(r2 >= 10.0, "Δ2 clean only up to {}", r2);
    Ok(format!("Δ1 fails at {:.4}, Δ2 clean up to {}", r1, r2))
}

fn family_verdict(args: &[&str]) -> Result<(i32, Value), String> {
    let mut full = vec!["family"];
    full.extend_from_slice(args);
    full.extend_from_slice(&["--json", "-"]);
    let out = run(&full, None);
    ensure!(out.code == 0 || out.code == 1, "exit {}: {}", out.code, out.stderr);
    Ok((out.code, out.json()))
}

fn criterion_4() -> Outcome {
    let cfg = TamenessConfig::default();
    let mut radii = Vec::new();
    for t in [0.5, 0.8] {
        let f = FamilyPolynomial::parse(F51, 2).unwrap().specialize(c(t, 0.0));
        let r = tameness_summary(&f, &cfg).map_err(|e| e.to_string())?.r_nc;
        ensure!((r - 1.0 / t).abs() <= 0.05 / t, "t = {}: r_nc {} vs {}", t, r, 1.0 / t);
        radii.push(r);
    }
    let (code, v) = family_verdict(&["--file", "ex51.fam", "--rho", "1.0", "--t-max", "0.9"])?;
    let verdict = &v["payload"]["report"]["verdict"];
    ensure!(code == 0 && verdict == "NUMERICALLY_ADMISSIBLE", "rho 1: exit {} {}", code, verdict);
    let (code, v) = family_verdict(&["--file", "ex51.fam", "--rho", "2.0", "--t-max", "0.9"])?;
    let verdict = &v["payload"]["report"]["verdict"];
    ensure!(code == 1 && verdict == "FAILED", "rho 2: exit {} {}", code, verdict);
    Ok(format!(
        "r_nc = {:.4} (t = 0.5), {:.4} (t = 0.8); rho 1 admissible, rho 2 failed",
        radii[0], radii[1]
    ))
}

fn criterion_5() -> Outcome {
    let (code, v) = family_verdict(&["--file", "ex52.fam", "--rho", "1.0", "--t-max", "0.9"])?;
    let report = &v["payload"]["report"];
    ensure!(report["newton"]["constant"] == true, "Newton boundary not constant: {}", report["newton"]);
    ensure!(
        code == 0 && report["verdict"] == "NUMERICALLY_ADMISSIBLE",
        "exit {} {} {}",
        code,
        report["verdict"],
        report["failures"]
    );
    Ok(format!("constant over {} samples, admissible", report["newton"]["sampled"]))
}

fn random_holomorphic(rng: &mut ChaCha8Rng) -> (usize, FamilyPolynomial) {
    loop {
        let n = rng.gen_range(1..=3);
        let mut parts = Vec::new();
        for _ in 0..rng.gen_range(1..=5) {
            let exps: Vec<u32> = (0..n).map(|_| rng.gen_range(0..=3)).collect();
            if exps.iter().all(|&e| e == 0) {
                continue;
            }
            let mono: Vec<String> = exps
                .iter()
                .enumerate()
                .filter(|(_, &e)| e > 0)
                .map(|(i, &e)| format!("z{}^{}", i + 1, e))
                .collect();
            let coeff = rng.gen_range(1..=4);
            let coeff = if rng.gen_bool(0.5) { format!("({}*t)", coeff) } else { coeff.to_string() };
            parts.push(format!("{}*{}", coeff, mono.join("*")));
        }
        if !parts.is_empty() {
            return (n, FamilyPolynomial::parse(&parts.join(" + "), n).unwrap());
        }
    }
}

fn random_covering(rng: &mut ChaCha8Rng, n: usize) -> CoveringSpec {
    let delta = rng.gen_range(1..=4u32);
    let mu: Vec<u32> = (0..n).map(|_| rng.gen_range(0..=(delta - 1) / 2)).collect();
    CoveringSpec::new(mu.iter().map(|m| delta - m).collect(), mu, delta).unwrap()
}

fn criterion_6() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let zero = c(0.0, 0.0);
    for case in 0..20 {
        let (n, f) = random_holomorphic(&mut rng);
        let spec = random_covering(&mut rng, n);
        let g = pullback_covering(&f, &spec).map_err(|e| e.to_string())?;
        let support = |f: &FamilyPolynomial| -> BTreeSet<Vec<u64>> {
            f.terms()
                .map(|(k, _)| (0..n).map(|i| (k.nu[i] + k.mu[i]) as u64).collect())
                .collect()
        };
        let scaled: BTreeSet<Vec<u64>> = support(&f)
            .into_iter()
            .map(|p| p.into_iter().map(|x| x * spec.delta as u64).collect())
            .collect();
        ensure!(support(&g) == scaled, "case {}: support of {} not scaled by {}", case, g, spec.delta);
        let iv = |f: &FamilyPolynomial| classify_subspaces(&f.specialize(zero)).map(|c| c.vanishing);
        ensure!(
            iv(&g).map_err(|e| e.to_string())? == iv(&f).map_err(|e| e.to_string())?,
            "case {}: I_v changed",
            case
        );
    }
    let (code, v) = family_verdict(&[
        "--file",
        "convenient.fam",
        "--cover-nu",
        "2,2",
        "--cover-mu",
        "1,1",
        "--cover-delta",
        "3",
        "--rho",
        "0.9",
    ])?;
    let verdict = &v["payload"]["report"]["verdict"];
    ensure!(code == 0 && verdict == "NUMERICALLY_ADMISSIBLE", "pullback: exit {} {}", code, verdict);
    Ok(format!("20 random inputs scale exactly; {} admissible", v["payload"]["family"]))
}

fn random_poly(rng: &mut ChaCha8Rng, n: usize, max_exp: u32, terms: usize) -> MixedPolynomial {
    loop {
        let t: Vec<(Complex, Vec<u32>, Vec<u32>)> = (0..terms)
            .map(|_| {
                (
                    c(rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0)),
                    (0..n).map(|_| rng.gen_range(0..=max_exp)).collect(),
                    (0..n).map(|_| rng.gen_range(0..=max_exp)).collect(),
                )
            })
            .collect();
        let f = MixedPolynomial::from_terms(n, t).unwrap();
        if !f.is_zero() {
            return f;
        }
    }
}

fn torus_point(rng: &mut ChaCha8Rng, n: usize) -> Vec<Complex> {
    (0..n)
        .map(|_| Complex::from_polar(rng.gen_range(0.5..1.5), rng.gen_range(0.0..TAU)))
        .collect()
}

fn wirtinger_suite(rng: &mut ChaCha8Rng) -> Result<f64, String> {
    let mut worst = 0.0f64;
    for case in 0..CASES {
        let n = rng.gen_range(1..=3);
        let terms = rng.gen_range(1..=6);
        let f = random_poly(rng, n, 4, terms);
        let z = torus_point(rng, n);
        let w = f.wirtinger_gradient(&z).unwrap();
        let h = 1e-6;
        let eval = |i: usize, d: Complex| {
            let mut p = z.clone();
            p[i] += d;
            f.evaluate(&p).unwrap()
        };
        let (mut err, mut norm, mut scale) = (0.0f64, 0.0f64, 0.0f64);
        for i in 0..n {
            let dx = (eval(i, c(h, 0.0)) - eval(i, c(-h, 0.0))) / (2.0 * h);
            let dy = (eval(i, c(0.0, h)) - eval(i, c(0.0, -h))) / (2.0 * h);
            let dz = (dx - c(0.0, 1.0) * dy) * 0.5;
            let dzbar = (dx + c(0.0, 1.0) * dy) * 0.5;
            err = err.max((dz - w.dz[i]).norm()).max((dzbar - w.dzbar[i]).norm());
            norm = norm.max(w.dz[i].norm()).max(w.dzbar[i].norm());
        }
        for (k, a) in f.terms() {
            let m = a.norm() * k.eval(&z).norm();
            scale += (0..n).map(|i| m * (k.nu[i] + k.mu[i]) as f64 / z[i].norm()).sum::<f64>();
        }
        let rel = err / norm.max(1e-3 * scale);
        ensure!(rel < 1e-6, "case {}: relative error {:.3e} for {}", case, rel, f);
        worst = worst.max(rel);
    }
    Ok(worst)
}

/// A random radially homogeneous polynomial for random weights.
fn homogeneous(rng: &mut ChaCha8Rng) -> (MixedPolynomial, Vec<u64>) {
    loop {
        let n = rng.gen_range(1..=3);
        let w: Vec<u64> = (0..n).map(|_| rng.gen_range(1..=3)).collect();
        let d = rng.gen_range(2..=8u64);
        let mut terms = Vec::new();
        for _ in 0..200 {
            let nu: Vec<u32> = (0..n).map(|_| rng.gen_range(0..=4)).collect();
            let mu: Vec<u32> = (0..n).map(|_| rng.gen_range(0..=4)).collect();
            let deg: u64 = (0..n).map(|i| w[i] * (nu[i] + mu[i]) as u64).sum();
            if deg == d && terms.len() < 5 {
                terms.push((c(rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0)), nu, mu));
            }
        }
        if !terms.is_empty() {
            return (MixedPolynomial::from_terms(n, terms).unwrap(), w);
        }
    }
}

fn euler_suite(rng: &mut ChaCha8Rng) -> Result<f64, String> {
    let mut worst = 0.0f64;
    for case in 0..CASES {
        let (f, w) = homogeneous(rng);
        let z = torus_point(rng, f.n());
        let r = euler_residual(&f, &w, &z).map_err(|e| e.to_string())?;
        ensure!(r < 1e-10, "case {}: Euler residual {:.3e} for {}", case, r, f);
        worst = worst.max(r);
    }
    Ok(worst)
}

fn criticality_suite(rng: &mut ChaCha8Rng) -> Result<usize, String> {
    let mut critical = 0;
    for case in 0..CASES {
        let n = rng.gen_range(1..=3);
        let terms = rng.gen_range(1..=5);
        let mut f = random_poly(rng, n, 3, terms);
        if case % 2 == 1 {
            let phase = Complex::from_polar(1.0, rng.gen_range(0.0..TAU));
            let sym: Vec<_> = f
                .terms()
                .flat_map(|(k, a)| [(*a, k.nu.clone(), k.mu.clone()), (a.conj(), k.mu.clone(), k.nu.clone())])
                .map(|(a, nu, mu)| (a * phase, nu, mu))
                .collect();
            f = MixedPolynomial::from_terms(n, sym).unwrap();
            if f.is_zero() {
                continue;
            }
        }
        let z = torus_point(rng, n);
        let all = Subset::full(n);
        if f.gradient_vanishing_residual(&z, all) <= 1e-6 {
            continue;
        }
        let sigma = f.criticality_residual(&z);
        let (_, fit) = f.lambda_fit(&z, all);
        ensure!(
            (sigma < 1e-6) == (fit < 1e-6),
            "case {}: σ₂/σ₁ {:.3e} vs λ-fit {:.3e} for {}",
            case,
            sigma,
            fit,
            f
        );
        if case % 2 == 1 {
            ensure!(sigma < 1e-6, "case {}: real-valued {} not critical", case, f);
        }
        critical += usize::from(sigma < 1e-6);
    }
    Ok(critical)
}

fn grid_minimum(f: &MixedPolynomial) -> f64 {
    let phases: Vec<f64> = (0..64).map(|k| TAU * (k as f64 + 0.5) / 64.0).collect();
    let mut best = f64::INFINITY;
    if f.n() == 1 {
        for r in (0..64).map(|k| 0.2 + 4.8 * k as f64 / 63.0) {
            for &a in &phases {
                best = best.min(f.criticality_residual(&[Complex::from_polar(r, a)]));
            }
        }
    } else {
        for &a in &phases {
            for &b in &phases {
                best = best.min(f.criticality_residual(&[Complex::from_polar(0.7, a), Complex::from_polar(1.3, b)]));
            }
        }
    }
    best
}

fn monomial_suite() -> Result<usize, String> {
    let mut checked = 0;
    for n in 1..=2usize {
        for code in 1..4u32.pow(2 * n as u32) {
            let digits: Vec<u32> = (0..2 * n).map(|k| (code / 4u32.pow(k as u32)) % 4).collect();
            let f = MixedPolynomial::from_terms(n, [(c(0.6, -1.1), digits[..n].to_vec(), digits[n..].to_vec())])
                .unwrap();
            let degenerate = matches!(monomial_rule(&f).unwrap(), FaceStatus::ProvenDegenerate { .. });
            let min = grid_minimum(&f);
            ensure!(degenerate == (min < 1e-6), "{}: rule {} vs grid minimum {:.3e}", f, degenerate, min);
            checked += 1;
        }
    }
    Ok(checked)
}

fn criterion_7() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let wirtinger = wirtinger_suite(&mut rng)?;
    let euler = euler_suite(&mut rng)?;
    let critical = criticality_suite(&mut rng)?;
    let monomials = monomial_suite()?;
    Ok(format!(
        "{} cases each: Wirtinger rel {:.1e}, Euler {:.1e}, {} critical agreements; {} monomials exact",
        CASES, wirtinger, euler, critical, monomials
    ))
}

fn probe(args: &[&str]) -> Result<(i32, Value), String> {
    let mut full = vec!["probe"];
    full.extend_from_slice(args);
    full.extend_from_slice(&["--json", "-"]);
    let out = run(&full, None);
    ensure!(out.code == 0 || out.code == 1, "exit {}: {}", out.code, out.stderr);
    Ok((out.code, out.json()))
}

fn criterion_8() -> Outcome {
    let (code, v) = probe(&["whitney", "--file", "ex51.fam", "--pair", "pair51.arc.json"])?;
    let r = &v["payload"]["report"];
    ensure!(code == 0 && v["payload"]["verdict"] == "PASS", "whitney: {} {:?}", v["payload"]["verdict"], r["notes"]);
    let residual = r["containment_residual"].as_f64().unwrap_or(1.0);
    ensure!(residual < 1e-3, "whitney residual {}", residual);
    let tail: Vec<f64> = r["numeric"]
        .as_array()
        .cloned()
        .unwrap_or_default()
        .iter()
        .filter(|s| s["k"].as_i64().unwrap_or(0) >= 10)
        .filter_map(|s| s["residual"].as_f64())
        .collect();
    ensure!(tail.len() == 11, "{} samples with k >= 10", tail.len());
    ensure!(
        tail.windows(2).all(|w| w[1] <= 2.0 * w[0]) && tail[10] < tail[0],
        "residuals not decreasing: {:?}",
        tail
    );
    let (code, v) = probe(&["thom", "--file", "ex51.fam", "--arc", "diag51.arc.json", "--stratum", "C_{}"])?;
    ensure!(code == 0 && v["payload"]["verdict"] == "PASS", "thom: {}", v["payload"]["verdict"]);
    let (code, v) = probe(&["whitney", "--file", "control.fam", "--pair", "control_pair.arc.json"])?;
    ensure!(code == 1 && v["payload"]["verdict"] == "FAIL", "whitney control: {}", v["payload"]["verdict"]);
    let (code, v) = probe(&["thom", "--file", "control.fam", "--arc", "control_diag.arc.json"])?;
    ensure!(code == 1 && v["payload"]["verdict"] == "FAIL", "thom control: {}", v["payload"]["verdict"]);
    Ok(format!(
        "whitney residual {:.1e} (k = 10: {:.1e}), thom PASS, both controls FAIL",
        residual, tail[0]
    ))
}

fn criterion_9() -> Outcome {
    let (code, v) = probe(&[
        "spot",
        "--file",
        "ex51.fam",
        "--radius",
        "0.5",
        "--samples",
        "200",
        "--seed",
        "11",
        "--t-values",
        "0,0.5,0.9i",
    ])?;
    let r = &v["payload"];
    let (crit, trans) = (r["min_criticality"].as_f64(), r["min_transversality"].as_f64());
    ensure!(code == 0 && r["passes"] == true, "spot-check failed: {}", r["counterexamples"]);
    ensure!(r["requested"] == 200 && r["accepted"].as_u64().unwrap_or(0) > 0, "accepted {}", r["accepted"]);
    let (crit, trans) = (crit.ok_or("no criticality minimum")?, trans.ok_or("no transversality minimum")?);
    ensure!(crit > 1e-4 && trans > 1e-5, "criticality {:.3e}, transversality {:.3e}", crit, trans);
    for mode in ["smoothness", "nearby-fibres"] {
        let (code, v) = probe(&["spot", "--file", "critical.fam", "--samples", "30", "--mode", mode])?;
        ensure!(
            code == 1 && v["payload"]["counterexample_count"].as_u64().unwrap_or(0) > 0,
            "control not detected in {} mode",
            mode
        );
    }
    Ok(format!(
        "{} of 200 points on V(f_t), min criticality {:.3e}, min transversality {:.3e}; control trips",
        r["accepted"], crit, trans
    ))
}

fn criterion_10() -> Outcome {
    let mut compared = 0;
    for (name, args) in GOLDEN {
        for threads in [1, 2, 4] {
            check_golden(name, args, threads)?;
            compared += 1;
        }
    }
    Ok(format!("{} golden files, {} runs at 1, 2 and 4 threads", GOLDEN.len(), compared))
}

fn main() {
    let criteria: [(&str, Duration, fn() -> Outcome); 10] = [
        ("faces on the three-vertex example", Duration::from_secs(1), criterion_1),
        ("convenient example is non-degenerate", Duration::from_secs(30), criterion_2),
        ("tameness radii", Duration::from_secs(60), criterion_3),
        ("r_nc = 1/|t| family", Duration::from_secs(300), criterion_4),
        ("constant Newton boundary family", Duration::from_secs(120), criterion_5),
        ("branched covering pullback", Duration::from_secs(60), criterion_6),
        ("property suites", Duration::from_secs(120), criterion_7),
        ("Whitney and Thom probes", Duration::from_secs(120), criterion_8),
        ("smoothness spot-checks", Duration::from_secs(180), criterion_9),
        ("determinism across thread counts", Duration::from_secs(600), criterion_10),
    ];
    let mut failed = 0;
    for (i, (title, limit, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = check();
        let elapsed = start.elapsed();
        let outcome = match outcome {
            Ok(detail) if elapsed > *limit => Err(format!("{} but took longer than {:?}", detail, limit)),
            other => other,
        };
        let (status, detail) = match &outcome {
            Ok(d) => ("PASS", d),
            Err(d) => ("FAIL", d),
        };
        failed += usize::from(outcome.is_err());
        println!(
            "criterion {:>2} {:<40} {}  {:>7.2}s  {}",
            i + 1,
            title,
            status,
            elapsed.as_secs_f64(),
            detail
        );
    }
    println!("acceptance: {} of {} criteria pass", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
