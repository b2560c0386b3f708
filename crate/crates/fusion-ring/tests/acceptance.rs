//! Acceptance gate: one PASS/FAIL line per criterion, nonzero exit if any fails.

use std::collections::BTreeMap;
use std::time::{Duration, Instant};

use fusion_ring::characters::character_element;
use fusion_ring::cli::{verify_suite, CheckResult, VerifyOptions, RANK_LIMIT_ENV};
use fusion_ring::fusion::{ideal_fusion, idempotent_system, kac_walton_fusion, modular_matrices, psi, verlinde_fusion};
use fusion_ring::weyl::DEFAULT_RANK_LIMIT;
use fusion_ring::{build_affine_data, AlgebraContext};
use num_complex::Complex64;

const MATRIX: &[(&str, &[i64])] = &[
    ("A1~1", &[1, 2, 3, 4, 5, 6, 7, 8]),
    ("A2~1", &[1, 2, 3, 4]),
    ("B2~1", &[1, 2]),
    ("C2~1", &[1, 2]),
    ("G2~1", &[1, 2]),
    ("A2~2", &[1, 2]),
    ("A3~2", &[1, 2]),
    ("D3~2", &[1, 2]),
];

struct Criterion {
    number: usize,
    title: &'static str,
    ok: bool,
    summary: String,
    failures: Vec<String>,
}

/// `(check name, tolerance)`; `None` means the check is exact.
type Requirement = (&'static str, Option<f64>);

fn context(t: &str, level: i64) -> AlgebraContext {
    AlgebraContext::new(build_affine_data(t.parse().expect("type")), level, DEFAULT_RANK_LIMIT).expect("context")
}

fn near(a: Complex64, b: Complex64) -> f64 {
    (a - b).norm()
}

fn golden() -> Criterion {
    let start = Instant::now();
    let ctx = context("A1~1", 1);
    let mut failures = Vec::new();
    let mut worst = 0.0f64;
    let tol = 1e-10;
    let mut note = |name: &str, dev: f64, failures: &mut Vec<String>| {
        worst = worst.max(dev);
        if dev > tol {
            failures.push(format!("{name}: deviation {dev:.3e}"));
        }
    };

    if ctx.order() != 6 {
        failures.push(format!("|G| = {}, expected 6", ctx.order()));
    }
    let mut dev = 0.0f64;
    for n in 0..6i64 {
        let p = psi(&ctx, &[n]);
        for k in 0..6i64 {
            let expected = Complex64::from_polar(1.0, std::f64::consts::PI * (k * (n + 1)) as f64 / 3.0);
            dev = dev.max(near(p.coeffs[ctx.group_index(&[k])], expected));
        }
    }
    note("ψ coefficients", dev, &mut failures);

    let sys = idempotent_system(&ctx).expect("idempotents");
    let expected_orbits: Vec<Vec<usize>> = vec![vec![0, 4], vec![1, 3], vec![2], vec![5]];
    if sys.orbits != expected_orbits {
        failures.push(format!("dot orbits {:?}", sys.orbits));
    }
    let mut dev = 0.0f64;
    for o in 0..2 {
        dev = dev.max(sys.phi_from_psi(&ctx, o).expect("phi").distance(&sys.phi[o]));
    }
    note("φ⁰, φ¹ from ψ̂", dev, &mut failures);

    let dhat = ctx.evaluate(&sys.delta).expect("evaluate");
    note("Δ̂₁ = φ⁰+φ¹", dhat.distance(&sys.phi[0].add(&sys.phi[1])), &mut failures);

    let chi1 = ctx.evaluate(&character_element(&ctx, &[1]).expect("character")).expect("evaluate");
    let expected = sys.phi[0]
        .sub(&sys.phi[1])
        .sub(&sys.phi[2].scale(Complex64::new(2.0, 0.0)))
        .add(&sys.phi[3].scale(Complex64::new(2.0, 0.0)));
    note("χ̂₁ = φ⁰−φ¹−2φ²+2φ⁵", chi1.distance(&expected), &mut failures);

    let expected_n = vec![vec![vec![1, 0], vec![0, 1]], vec![vec![0, 1], vec![1, 0]]];
    let m = modular_matrices(&ctx);
    let tables = [
        verlinde_fusion(&ctx, &m).expect("verlinde"),
        ideal_fusion(&ctx, &sys).expect("ideal").0,
        kac_walton_fusion(&ctx).expect("kac-walton").0,
    ];
    for t in &tables {
        if t.n != expected_n {
            failures.push(format!("{} table {:?}", t.method, t.n));
        }
    }
    let elapsed = start.elapsed();
    if elapsed >= Duration::from_secs(1) {
        failures.push(format!("runtime {elapsed:.2?} ≥ 1 s"));
    }
    Criterion {
        number: 1,
        title: "golden example A1~1 level 1",
        ok: failures.is_empty(),
        summary: format!("max coefficient deviation {worst:.3e} (tol 1e-10), χ₁² = χ₀ in all engines, {elapsed:.2?}"),
        failures,
    }
}

fn evaluate(
    number: usize,
    title: &'static str,
    requirements: &[Requirement],
    results: &BTreeMap<String, Vec<CheckResult>>,
    extra: impl Fn(&str) -> Vec<Requirement>,
) -> Criterion {
    let mut failures = Vec::new();
    let mut worst: BTreeMap<&str, f64> = BTreeMap::new();
    for (ctx_name, checks) in results {
        let mut reqs = requirements.to_vec();
        reqs.extend(extra(ctx_name));
        for (name, tol) in reqs {
            let Some(c) = checks.iter().find(|c| c.name == name) else {
                failures.push(format!("{ctx_name}: check {name} did not run"));
                continue;
            };
            let passed = match (tol, c.deviation) {
                (Some(t), Some(d)) => {
                    let w = worst.entry(name).or_insert(0.0);
                    *w = w.max(d);
                    d <= t
                }
                _ => c.status == fusion_ring::cli::Status::Pass,
            };
            if !passed {
                let dev = c.deviation.map(|d| format!("deviation {d:.3e}, ")).unwrap_or_default();
                failures.push(format!("{ctx_name}: {name} {dev}{}", c.detail));
            }
        }
    }
    let summary = if worst.is_empty() {
        format!("{} contexts", results.len())
    } else {
        worst.iter().map(|(k, v)| format!("{k} ≤ {v:.2e}")).collect::<Vec<_>>().join(", ")
    };
    Criterion { number, title, ok: failures.is_empty(), summary, failures }
}

fn main() {
    if std::env::args().any(|a| a == "--list") {
        return;
    }
    if std::env::var(RANK_LIMIT_ENV).is_ok() {
        eprintln!("note: {RANK_LIMIT_ENV} is ignored by the acceptance gate");
    }
    let start = Instant::now();
    let mut criteria = vec![golden()];

    let opts = VerifyOptions { seed: 20261016, draws: 100, tolerance: None };
    let mut results: BTreeMap<String, Vec<CheckResult>> = BTreeMap::new();
    let mut twisted: Vec<String> = Vec::new();
    for (t, levels) in MATRIX {
        for &level in *levels {
            let ctx = context(t, level);
            let name = format!("{t} level {level}");
            if ctx.data().dual_is_coweight() {
                twisted.push(name.clone());
            }
            match verify_suite(&ctx, &opts) {
                Ok(c) => {
                    results.insert(name, c);
                }
                Err(e) => {
                    println!("FAIL  setup: {name}: {e}");
                    std::process::exit(1);
                }
            }
        }
    }
    let matrix_time = start.elapsed();

    let mut oracle = evaluate(2, "three-way oracle", &[("oracle.three_way", None)], &results, |_| vec![]);
    oracle.summary = format!("{} contexts agree exactly, {matrix_time:.2?} for the whole matrix", results.len());
    if matrix_time >= Duration::from_secs(120) {
        oracle.ok = false;
        oracle.failures.push(format!("runtime {matrix_time:.2?} ≥ 2 min"));
    }
    criteria.push(oracle);
    criteria.push(evaluate(
        3,
        "modular properties",
        &[
            ("modular.symmetry", Some(1e-9)),
            ("modular.unitarity", Some(1e-9)),
            ("modular.s_squared", Some(1e-8)),
            ("modular.st_cubed", Some(1e-8)),
        ],
        &results,
        |_| vec![],
    ));
    let mut fourier = evaluate(
        4,
        "Fourier and Heisenberg suite",
        &[
            ("fourier.convolution", Some(1e-9)),
            ("fourier.parseval", Some(1e-9)),
            ("fourier.inversion", Some(1e-9)),
            ("heisenberg.literal_half_phase", Some(1e-9)),
        ],
        &results,
        |_| vec![],
    );
    let corrected = results
        .values()
        .flat_map(|c| c.iter().filter(|c| c.name.starts_with("heisenberg.intertwining")))
        .filter_map(|c| c.deviation)
        .fold(0.0f64, f64::max);
    fourier.summary.push_str(&format!("; corrected law (β,−α,⟨α,β⟩) ≤ {corrected:.2e}"));
    criteria.push(fourier);
    criteria.push(evaluate(
        5,
        "ideal and homomorphism suite",
        &[
            ("delta.idempotent", Some(1e-10)),
            ("kacwalton.projection", Some(1e-8)),
            ("forms.orthonormality", Some(1e-8)),
            ("forms.frobenius", Some(1e-8)),
        ],
        &results,
        |_| vec![],
    ));
    criteria.push(evaluate(
        6,
        "counting claims",
        &[("counting.regular_orbits", None), ("counting.group_order", None)],
        &results,
        |name| if twisted.iter().any(|t| t == name) { vec![("counting.dual_labels", None)] } else { vec![] },
    ));
    criteria.push(evaluate(
        7,
        "exact combinatorics",
        &[("combinatorics.dimension_conservation", None), ("combinatorics.certificates", None)],
        &results,
        |_| vec![],
    ));

    for c in &criteria {
        println!("{}  {}. {}: {}", if c.ok { "PASS" } else { "FAIL" }, c.number, c.title, c.summary);
        for f in &c.failures {
            println!("        {f}");
        }
    }
    let passed = criteria.iter().filter(|c| c.ok).count();
    println!("{passed}/{} criteria passed in {:.2?}", criteria.len(), start.elapsed());
    if passed != criteria.len() {
        std::process::exit(1);
    }
}
