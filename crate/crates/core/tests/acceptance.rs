//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! nonzero if any fails.

use std::time::Instant;

use nsfd_core::equilibria::{find_k, find_m, EquilibriumKind};
use nsfd_core::integrators::find_positivity_threshold;
use nsfd_core::model::REFERENCE_CASES;
use nsfd_core::stability::lyapunov::{select_lyapunov_params, verify_lyapunov_many};
use nsfd_core::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

const STEPS: [f64; 4] = [0.1, 1.0, 10.0, 100.0];

const FIXED_POINT_REL: f64 = 1e-12;
const POSITIVITY_STARTS: usize = 1000;
const POSITIVITY_ITERS: usize = 10_000;
const LYAPUNOV_STARTS: usize = 100;
const LYAPUNOV_BALL: f64 = 1e-6;
const LYAPUNOV_MAX_STEPS: usize = 400_000_000;
const ORDER_FIRST: (f64, f64) = (0.7, 1.3);
const ORDER_RK4: (f64, f64) = (3.5, 4.5);
const JACOBIAN_REL: f64 = 1e-5;

fn model(m1: f64, m2: f64) -> PreyPredatorModel {
    PreyPredatorModel::reference(m1, m2).unwrap()
}

fn map(model: &PreyPredatorModel, h: f64) -> DiscreteMap<'_> {
    DiscreteMap::with_defaults(model, h).unwrap()
}

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

fn equilibrium_preservation() -> Outcome {
    let mut worst: f64 = 0.0;
    let mut checked = 0;
    for &(_, m1, m2) in REFERENCE_CASES.iter() {
        let m = model(m1, m2);
        for e in enumerate_equilibria(&m).unwrap() {
            for h in STEPS {
                let next = map(&m, h).step(e.location).unwrap();
                let scaled = next.distance_inf(&e.location) / (1.0 + e.location.max_norm());
                worst = worst.max(scaled);
                checked += 1;
            }
        }
    }
    outcome(
        worst <= FIXED_POINT_REL,
        format!("{checked} (equilibrium, h) pairs, worst scaled residual {worst:e}"),
    )
}

fn unconditional_positivity() -> Outcome {
    let m = model(1.53, 0.622);
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let starts: Vec<PopulationState> = (0..POSITIVITY_STARTS)
        .map(|_| PopulationState {
            x: rng.gen_range(0.0..=100.0),
            y: rng.gen_range(0.0..=100.0),
        })
        .collect();
    let mut negatives = 0usize;
    let mut failures = 0usize;
    for h in STEPS {
        let mp = map(&m, h);
        let (neg, fail) = starts
            .par_iter()
            .map(|&s| {
                let mut z = s;
                for _ in 0..POSITIVITY_ITERS {
                    match mp.step(z) {
                        Ok(n) => z = n,
                        Err(_) => return (0, 1),
                    }
                    if z.x < 0.0 || z.y < 0.0 {
                        return (1, 0);
                    }
                }
                (0, 0)
            })
            .reduce(|| (0, 0), |a, b| (a.0 + b.0, a.1 + b.1));
        negatives += neg;
        failures += fail;
    }
    outcome(
        negatives == 0 && failures == 0,
        format!(
            "{POSITIVITY_STARTS} starts x {} h x {POSITIVITY_ITERS} steps: {negatives} negative, {failures} failed",
            STEPS.len()
        ),
    )
}

fn dynamic_consistency() -> Outcome {
    let mut checked = 0;
    let mut mismatches = Vec::new();
    let mut max_stable_modulus: f64 = 0.0;
    for &(label, m1, m2) in REFERENCE_CASES.iter() {
        let m = model(m1, m2);
        let report = consistency_report(&m, &SchemeParams::DEFAULT).unwrap();
        if !report.consistent {
            mismatches.push(format!("case {label}: conditions fail"));
            continue;
        }
        for e in enumerate_equilibria(&m).unwrap() {
            for h in STEPS {
                let v = classify_discrete(&map(&m, h), e.location).unwrap();
                checked += 1;
                if !v.agrees_with(&e.continuous_verdict) {
                    mismatches.push(format!("case {label} {} h={h}: {}", e.kind, v.stability));
                }
                if e.continuous_verdict.is_stable() {
                    max_stable_modulus = max_stable_modulus.max(v.max_modulus());
                    if v.max_modulus() >= 1.0 {
                        mismatches.push(format!("case {label} {} h={h}: modulus >= 1", e.kind));
                    }
                }
            }
        }
    }
    outcome(
        mismatches.is_empty(),
        format!(
            "{checked} verdicts, max modulus at stable points {max_stable_modulus:.9}{}",
            if mismatches.is_empty() {
                String::new()
            } else {
                format!("; mismatches: {}", mismatches.join("; "))
            }
        ),
    )
}

fn lyapunov_global_stability() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let starts: Vec<PopulationState> = (0..LYAPUNOV_STARTS)
        .map(|_| PopulationState {
            x: 100.0 - rng.gen_range(0.0..100.0),
            y: 100.0 - rng.gen_range(0.0..100.0),
        })
        .collect();
    let mut pass = true;
    let mut parts = Vec::new();
    for (m1, m2) in [(1.53, 0.622), (1.5, 0.5)] {
        let m = model(m1, m2);
        for h in [1.0, 100.0] {
            let mp = map(&m, h);
            let params = select_lyapunov_params(&m, mp.scheme()).unwrap();
            let results = verify_lyapunov_many(&mp, &params, &starts, LYAPUNOV_MAX_STEPS, LYAPUNOV_BALL);
            let mut ok = 0;
            let mut max_delta = f64::NEG_INFINITY;
            let mut max_steps = 0;
            for r in &results {
                match r {
                    Ok(rep) if rep.entered_ball_at.is_some() => {
                        ok += 1;
                        max_delta = max_delta.max(rep.max_delta.unwrap_or(f64::NEG_INFINITY));
                        max_steps = max_steps.max(rep.steps);
                    }
                    Ok(_) => {}
                    Err(e) => parts.push(format!("({m1}, {m2}) h={h}: {e}")),
                }
            }
            pass &= ok == starts.len();
            parts.push(format!(
                "({m1}, {m2}) h={h}: {ok}/{} reach ball, max dV {max_delta:e}, max steps {max_steps}",
                starts.len()
            ));
        }
    }
    outcome(pass, parts.join("; "))
}

fn standard_scheme_failure() -> Outcome {
    let m = model(1.53, 0.622);
    let start = PopulationState { x: 10.0, y: 10.0 };
    let n = 200;
    let threshold =
        find_positivity_threshold(Method::Euler, &m, start, 1.0 / 64.0, 1024.0, n).unwrap();
    let Some(h) = threshold else {
        return outcome(false, "Euler never produced a negative component");
    };
    let mut pass = true;
    let mut parts = vec![format!("Euler threshold h = {h}")];
    for h in [h, 50.0] {
        let cmp = compare_trajectories(&m, SchemeParams::DEFAULT, Denominator::Linear, start, h, n)
            .unwrap();
        pass &= !cmp.euler.stays_nonnegative() && cmp.nsfd.stays_nonnegative();
        parts.push(format!(
            "h={h}: euler first negative at {:?}, nsfd nonnegative {}",
            cmp.euler.first_negative,
            cmp.nsfd.stays_nonnegative()
        ));
    }
    outcome(pass, parts.join("; "))
}

fn convergence_order() -> Outcome {
    let m = model(0.3, 0.501);
    let start = PopulationState { x: 5.0, y: 5.0 };
    let hs = [0.1, 0.05, 0.025, 0.0125];
    let mut pass = true;
    let mut parts = Vec::new();
    for (method, (lo, hi)) in [
        (Method::NSFD_DEFAULT, ORDER_FIRST),
        (Method::Euler, ORDER_FIRST),
        (Method::Rk4, ORDER_RK4),
    ] {
        let est = estimate_order(method, &m, start, 10.0, &hs).unwrap();
        pass &= est.order >= lo && est.order <= hi;
        parts.push(format!("{} p = {:.4}", est.method, est.order));
    }
    outcome(pass, parts.join(", "))
}

/// Reference rates written out directly.
fn r(x: f64) -> f64 {
    15.0 / (x + 10.0)
}
fn dr(x: f64) -> f64 {
    -15.0 / (x + 10.0).powi(2)
}
fn s(y: f64) -> f64 {
    5.0 / (y + 10.0)
}
fn ds(y: f64) -> f64 {
    -5.0 / (y + 10.0).powi(2)
}
fn phi(x: f64) -> f64 {
    1.0 / (x + 30.0)
}
fn dphi(x: f64) -> f64 {
    -1.0 / (x + 30.0).powi(2)
}
const C: f64 = 0.003;
// default weights
const A2: f64 = -1.0;
const A4: f64 = 2.0;
const A6: f64 = 2.0;
const B2: f64 = -1.0;
const B4: f64 = -3.0;
const B6: f64 = 2.0;

fn condition_certificates() -> Outcome {
    let scheme = SchemeParams::DEFAULT;
    let sign_ok = scheme.positivity_violations().is_empty();
    let global = scheme.alpha()[3] + scheme.beta()[3];
    let mut pass = sign_ok && global < 0.0;
    let mut parts = vec![format!("signs ok {sign_ok}, alpha4+beta4 = {global}")];
    let mut check = |label: &str, m: &PreyPredatorModel, expected: &[(&str, f64)]| {
        let report = consistency_report(m, &SchemeParams::DEFAULT).unwrap();
        for &(name, value) in expected {
            let got = report.entry(name).and_then(|e| e.value).unwrap_or(f64::NAN);
            let agree = (got - value).abs() <= 1e-9 * (1.0 + value.abs());
            pass &= agree && value > 0.0 && report.consistent;
            parts.push(format!("{label} {name} = {got:.6} (direct {value:.6})"));
        }
    };

    // predator extinction: K solves r(K) = m1
    let (m1, m2) = (1.38, 0.622);
    let k = 15.0 / m1 - 10.0;
    let ck = C * k * phi(k);
    check(
        "vi",
        &model(m1, m2),
        &[
            ("T1", 2.0 * A6 * m1 - 2.0 * A2 * r(k) + k * dr(k)),
            ("T2", s(0.0) - m2 + ck - 2.0 * B2 * s(0.0) - 2.0 * B4 * ck + 2.0 * B6 * m2),
        ],
    );

    // prey extinction: M solves s(M) = m2
    for (label, m1, m2) in [("ii", 1.53, 0.4789), ("iii", 1.4925, 0.4789)] {
        let mm = 5.0 / m2 - 10.0;
        check(
            label,
            &model(m1, m2),
            &[
                (
                    "T3",
                    r(0.0) - mm * phi(0.0) - m1 - 2.0 * A2 * r(0.0)
                        + 2.0 * A4 * mm * phi(0.0)
                        + 2.0 * A6 * m1,
                ),
                ("T4", mm * ds(mm) - 2.0 * B2 * s(mm) + 2.0 * B6 * m2),
            ],
        );
    }

    for (label, m1, m2) in [("iv", 1.38, 0.4789), ("v", 0.3, 0.501)] {
        let m = model(m1, m2);
        let p3 = find_interior(&m).unwrap().expect("interior point").state;
        let (x, y) = (p3.x, p3.y);
        let slope = dr(x) - y * dphi(x);
        let u = -A2 * r(x) + A4 * y * phi(x) + A6 * m1;
        let v = -B2 * s(y) - B4 * C * x * phi(x) + B6 * m2;
        let t5 = -x * slope * v - y * ds(y) * u - x * y * ds(y) * slope
            - C * x * y * phi(x) * (phi(x) + x * dphi(x));
        check(
            label,
            &m,
            &[("T5", t5), ("T6", u + x * slope), ("T7", v + y * ds(y))],
        );
    }
    drop(check);
    outcome(pass, parts.join("; "))
}

fn rel_err(a: f64, b: f64) -> f64 {
    if a == b {
        0.0
    } else {
        (a - b).abs() / b.abs().max(f64::MIN_POSITIVE)
    }
}

fn jacobian_cross_check() -> Outcome {
    let mut worst: f64 = 0.0;
    let mut checked = 0;
    let mut where_worst = String::new();
    for &(label, m1, m2) in REFERENCE_CASES.iter() {
        let m = model(m1, m2);
        for h in STEPS {
            let mp = map(&m, h);
            let p = mp.varphi();
            let mut points = vec![(EquilibriumKind::Extinction, PopulationState::ORIGIN)];
            if let Some(k) = find_k(&m).unwrap() {
                points.push((EquilibriumKind::PredatorExtinction, PopulationState { x: k, y: 0.0 }));
            }
            if let Some(mm) = find_m(&m).unwrap() {
                points.push((EquilibriumKind::PreyExtinction, PopulationState { x: 0.0, y: mm }));
            }
            for (kind, z) in points {
                let expected = match kind {
                    EquilibriumKind::Extinction => {
                        let l1 = (1.0 + p * 2.0 * r(0.0) + p * m1) / (1.0 - p * A2 * r(0.0) + p * A6 * m1);
                        let l2 = (1.0 + p * 2.0 * s(0.0) + p * m2) / (1.0 - p * B2 * s(0.0) + p * B6 * m2);
                        Jacobian2::new(l1, 0.0, 0.0, l2)
                    }
                    EquilibriumKind::PredatorExtinction => {
                        let k = z.x;
                        let u = 1.0 - p * A2 * r(k) + p * A6 * m1;
                        let ck = C * k * phi(k);
                        let v = 1.0 - p * B2 * s(0.0) - p * B4 * ck + p * B6 * m2;
                        Jacobian2::new(
                            1.0 + p * k * dr(k) / u,
                            -p * k * phi(k) / u,
                            0.0,
                            1.0 + p * (s(0.0) - m2 + ck) / v,
                        )
                    }
                    EquilibriumKind::PreyExtinction => {
                        let mm = z.y;
                        let u = 1.0 - p * A2 * r(0.0) + p * A4 * mm * phi(0.0) + p * A6 * m1;
                        let v = 1.0 - p * B2 * s(mm) + p * B6 * m2;
                        Jacobian2::new(
                            1.0 + p * (r(0.0) - mm * phi(0.0) - m1) / u,
                            0.0,
                            p * C * mm * phi(0.0) / v,
                            1.0 + p * mm * ds(mm) / v,
                        )
                    }
                    EquilibriumKind::Coexistence => unreachable!(),
                };
                let got = discrete_jacobian(&mp, z).unwrap();
                for (g, e) in got.entries().iter().zip(expected.entries()) {
                    let err = rel_err(*g, e);
                    checked += 1;
                    if err > worst {
                        worst = err;
                        where_worst = format!("case {label} {kind} h={h}");
                    }
                }
            }
        }
    }
    outcome(
        worst <= JACOBIAN_REL,
        format!("{checked} entries, worst relative error {worst:e} ({where_worst})"),
    )
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 8] = [
        ("equilibrium preservation", equilibrium_preservation),
        ("unconditional positivity", unconditional_positivity),
        ("elementary stability / dynamic consistency", dynamic_consistency),
        ("global stability via Lyapunov", lyapunov_global_stability),
        ("standard-scheme failure", standard_scheme_failure),
        ("convergence order", convergence_order),
        ("condition-checker certificates", condition_certificates),
        ("Jacobian cross-check", jacobian_cross_check),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let t = Instant::now();
        let o = run();
        if !o.pass {
            failed += 1;
        }
        println!(
            "criterion {} {name}: {} [{:.1}s] {}",
            i + 1,
            if o.pass { "PASS" } else { "FAIL" },
            t.elapsed().as_secs_f64(),
            o.detail
        );
    }
    println!("acceptance: {}/{} passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
