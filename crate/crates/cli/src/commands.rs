//! Subcommand bodies. Each returns the text destined for standard output.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use nsfd_core::equilibria::{equilibria_to_csv, Equilibrium};
use nsfd_core::integrators::{find_positivity_threshold, Comparison, Method, MethodSummary};
use nsfd_core::scheme::{
    check_coexistence_conditions, check_predator_extinction_conditions,
    check_prey_extinction_conditions, ConditionEntry,
};
use nsfd_core::stability::lyapunov::verify_lyapunov_decrease;
use nsfd_core::{
    classify_discrete, compare_trajectories, consistency_report, enumerate_equilibria,
    estimate_order, select_lyapunov_params, DiscreteMap, PopulationState, PreyPredatorModel,
};

use crate::scenario::{ConfigError, MethodName, Scenario};
use crate::svg::{self, Marker, Series};

#[derive(Debug, thiserror::Error)]
pub enum Failure {
    #[error("configuration error: {0}")]
    Config(#[from] ConfigError),
    #[error("numerical failure: {0}")]
    Numerical(#[from] nsfd_core::Error),
    #[error("cannot write {path}: {source}")]
    Write {
        path: String,
        source: std::io::Error,
    },
}

impl Failure {
    pub fn exit_code(&self) -> u8 {
        match self {
            Failure::Config(_) | Failure::Write { .. } => 2,
            Failure::Numerical(_) => 3,
        }
    }
}

type Outcome = Result<String, Failure>;

/// Step sizes probed by the positivity doubling search.
const SEARCH_H0: f64 = 1.0 / 64.0;
const SEARCH_H_MAX: f64 = 1024.0;
/// Steps in the Lyapunov spot check printed by `analyze`.
const SPOT_CHECK_STEPS: usize = 1000;

fn write_file(path: &Path, contents: &str) -> Result<(), Failure> {
    std::fs::write(path, contents).map_err(|source| Failure::Write {
        path: path.display().to_string(),
        source,
    })
}

fn header(sc: &Scenario, model: &PreyPredatorModel) -> String {
    let mut out = format!("scenario: {}\n", sc.label);
    let _ = writeln!(
        out,
        "model: m1 = {:?}, m2 = {:?}, c = {:?}, r(0) = {:?}, s(0) = {:?}, phi(0) = {:?}",
        model.m1(),
        model.m2(),
        model.c(),
        model.r0(),
        model.s0(),
        model.phi0()
    );
    if !model.is_verified() {
        let failed: Vec<_> = model.verification().failures().map(|c| c.condition).collect();
        let _ = writeln!(out, "warning: rate functions fail: {}", failed.join(", "));
    }
    out
}

fn consistency_block(sc: &Scenario, model: &PreyPredatorModel) -> Result<String, Failure> {
    Ok(match consistency_report(model, &sc.scheme()?) {
        Ok(report) => format!("conditions:\n{report}"),
        Err(e) => format!("conditions: unavailable ({e})\n"),
    })
}

fn markers(equilibria: &[Equilibrium]) -> Vec<Marker> {
    equilibria
        .iter()
        .map(|e| Marker {
            label: e.kind.label().to_string(),
            x: e.location.x,
            y: e.location.y,
        })
        .collect()
}

/// Location of the equilibrium the regime table says is stable.
fn attractor(sc: &Scenario, model: &PreyPredatorModel) -> Option<(String, PopulationState)> {
    let report = consistency_report(model, &sc.scheme().ok()?).ok()?;
    let kind = report.regime.stable_equilibrium();
    enumerate_equilibria(model)
        .ok()?
        .into_iter()
        .find(|e| e.kind == kind)
        .map(|e| (kind.label().to_string(), e.location))
}

fn summary_line(s: &MethodSummary, target: &Option<(String, PopulationState)>) -> String {
    let mut line = format!("  {}:", s.method);
    match (s.first_negative, s.failed_at) {
        (None, None) => line.push_str(" nonnegative throughout"),
        (neg, fail) => {
            if let Some(k) = neg {
                let _ = write!(line, " first negative component at k = {k}");
            }
            if let Some(k) = fail {
                let _ = write!(line, " failed at step {k}");
            }
        }
    }
    match s.final_state {
        Some(z) => {
            let _ = write!(line, "; final ({:?}, {:?})", z.x, z.y);
            if let Some((label, p)) = target {
                let _ = write!(line, "; distance to {label} = {:?}", z.distance_inf(p));
            }
        }
        None => line.push_str("; no final state"),
    }
    line
}

fn comparison_summary(cmp: &Comparison, target: &Option<(String, PopulationState)>) -> String {
    let mut out = format!("comparison (h = {:?}, n = {}):\n", cmp.h, cmp.rows.len() - 1);
    for s in cmp.summaries() {
        out.push_str(&summary_line(s, target));
        out.push('\n');
    }
    out
}

fn comparison_series(cmp: &Comparison) -> Vec<Series<'static>> {
    let pick = |f: fn(&nsfd_core::integrators::ComparisonRow) -> Option<PopulationState>| {
        cmp.rows
            .iter()
            .filter_map(|r| f(r).map(|z| (r.t, z.x, z.y)))
            .collect::<Vec<_>>()
    };
    vec![
        Series {
            name: "nsfd",
            color: "#1f77b4",
            points: pick(|r| r.nsfd),
        },
        Series {
            name: "euler",
            color: "#d62728",
            points: pick(|r| r.euler),
        },
        Series {
            name: "rk4",
            color: "#2ca02c",
            points: pick(|r| r.rk4),
        },
    ]
}

fn derived_comparison_path(csv: &Path) -> PathBuf {
    let stem = csv.file_stem().and_then(|s| s.to_str()).unwrap_or("trajectory");
    csv.with_file_name(format!("{stem}_comparison.csv"))
}

pub fn simulate(sc: &Scenario) -> Outcome {
    let model = sc.model()?;
    let map = DiscreteMap::new(&model, sc.scheme()?, sc.denominator()?, sc.h)?;
    let n = sc.steps()?;
    let traj = map.iterate(sc.start(), n)?;
    let last = *traj.last().expect("trajectory has its initial state");

    let mut out = header(sc, &model);
    let _ = writeln!(out, "steps: n = {n}, h = {:?}, t_end = {:?}", sc.h, traj.time(n));
    let _ = writeln!(out, "final state: x = {:?}, y = {:?}", last.x, last.y);
    if let Some(path) = &sc.csv {
        write_file(path, &traj.to_csv())?;
        let _ = writeln!(out, "trajectory csv: {}", path.display());
    }

    let equilibria = enumerate_equilibria(&model)?;
    let wants_comparison = sc.methods().iter().any(|m| *m != MethodName::Nsfd);
    let mut series = vec![Series {
        name: "nsfd",
        color: "#1f77b4",
        points: traj
            .states
            .iter()
            .enumerate()
            .map(|(k, z)| (traj.time(k), z.x, z.y))
            .collect(),
    }];
    if wants_comparison {
        let cmp = compare_trajectories(&model, sc.scheme()?, sc.denominator()?, sc.start(), sc.h, n)?;
        out.push_str(&comparison_summary(&cmp, &attractor(sc, &model)));
        let path = sc
            .comparison_csv
            .clone()
            .or_else(|| sc.csv.as_deref().map(derived_comparison_path));
        if let Some(path) = path {
            write_file(&path, &cmp.to_csv())?;
            let _ = writeln!(out, "comparison csv: {}", path.display());
        }
        series = comparison_series(&cmp)
            .into_iter()
            .filter(|s| sc.methods().iter().any(|m| m.as_str() == s.name))
            .collect();
    }
    if let Some(path) = &sc.svg {
        write_file(path, &svg::render(&sc.label, &series, &markers(&equilibria)))?;
        let _ = writeln!(out, "svg: {}", path.display());
    }
    out.push_str(&consistency_block(sc, &model)?);
    Ok(out)
}

pub fn analyze(sc: &Scenario, h_list: &[f64]) -> Outcome {
    let model = sc.model()?;
    let scheme = sc.scheme()?;
    let denominator = sc.denominator()?;
    let mut out = header(sc, &model);
    let equilibria = enumerate_equilibria(&model)?;

    out.push_str("equilibria:\n");
    for e in &equilibria {
        let _ = writeln!(
            out,
            "  {} = ({:?}, {:?}): continuous {}",
            e.kind, e.location.x, e.location.y, e.continuous_verdict
        );
        for &h in h_list {
            let map = DiscreteMap::new(&model, scheme, denominator, h)?;
            let v = classify_discrete(&map, e.location)?;
            let _ = writeln!(
                out,
                "    h = {h:?}: discrete {}, |lambda| = {:.9}, {:.9}, jury det<1 {} 1-tr+det>0 {} 1+tr+det>0 {}, agrees {}",
                v.stability,
                v.moduli[0],
                v.moduli[1],
                v.jury.det_lt_1,
                v.jury.one_minus_tr_plus_det_pos,
                v.jury.one_plus_tr_plus_det_pos,
                v.agrees_with(&e.continuous_verdict)
            );
        }
    }

    out.push_str(&consistency_block(sc, &model)?);

    if model.m1() >= model.r0() && model.m2() >= model.s0() {
        match select_lyapunov_params(&model, &scheme) {
            Ok(p) => {
                let _ = writeln!(
                    out,
                    "lyapunov: V = {:?} x y + {:?} x^2 + {:?} x + {:?} y",
                    p.xy_weight(),
                    p.x2_weight(),
                    p.x_weight(),
                    p.y_weight()
                );
                let _ = writeln!(
                    out,
                    "  certificate inequalities hold: {}",
                    p.satisfies_certificate(&model, &scheme)
                );
                let map = DiscreteMap::new(&model, scheme, denominator, sc.h)?;
                let r = verify_lyapunov_decrease(&map, &p, sc.start(), SPOT_CHECK_STEPS)?;
                let _ = writeln!(
                    out,
                    "  spot check from ({:?}, {:?}), h = {:?}: {} steps, dV in [{:?}, {:?}], final distance {:?}",
                    sc.x0,
                    sc.y0,
                    sc.h,
                    r.steps,
                    r.min_delta.unwrap_or(0.0),
                    r.max_delta.unwrap_or(0.0),
                    r.final_distance
                );
            }
            Err(e) => {
                let _ = writeln!(out, "lyapunov: no certificate ({e})");
            }
        }
    } else {
        out.push_str("lyapunov: not applicable (needs m1 >= r(0) and m2 >= s(0))\n");
    }
    Ok(out)
}

pub fn equilibria(sc: &Scenario) -> Outcome {
    let model = sc.model()?;
    let csv = equilibria_to_csv(&enumerate_equilibria(&model)?);
    match &sc.csv {
        Some(path) => {
            write_file(path, &csv)?;
            Ok(format!("equilibria csv: {}\n", path.display()))
        }
        None => Ok(csv),
    }
}

pub fn check_scheme(sc: &Scenario) -> Outcome {
    let model = sc.model()?;
    let scheme = sc.scheme()?;
    let mut out = header(sc, &model);
    let _ = writeln!(out, "alpha = {:?}", scheme.alpha());
    let _ = writeln!(out, "beta = {:?}", scheme.beta());
    let violations = scheme.positivity_violations();
    if !violations.is_empty() {
        let _ = writeln!(out, "sign violations: {}", violations.join(", "));
    }
    out.push_str(&consistency_block(sc, &model)?);

    let mut all: Vec<ConditionEntry> = Vec::new();
    for entries in [
        check_predator_extinction_conditions(&model, &scheme),
        check_prey_extinction_conditions(&model, &scheme),
        check_coexistence_conditions(&model, &scheme),
    ] {
        match entries {
            Ok(e) => all.extend(e),
            Err(nsfd_core::Error::MissingEquilibrium(_)) => {}
            Err(e) => return Err(e.into()),
        }
    }
    out.push_str("conditions at every existing boundary or interior equilibrium:\n");
    for e in all {
        let _ = writeln!(out, "  {e}");
    }
    Ok(out)
}

pub fn compare(sc: &Scenario) -> Outcome {
    let model = sc.model()?;
    let n = sc.steps()?;
    let cmp = compare_trajectories(&model, sc.scheme()?, sc.denominator()?, sc.start(), sc.h, n)?;
    let mut out = header(sc, &model);
    out.push_str(&comparison_summary(&cmp, &attractor(sc, &model)));

    out.push_str(&format!(
        "positivity threshold (doubling from h = {SEARCH_H0} to {SEARCH_H_MAX}, {n} steps):\n"
    ));
    for method in [sc.nsfd_method()?, Method::Euler, Method::Rk4] {
        let t = find_positivity_threshold(method, &model, sc.start(), SEARCH_H0, SEARCH_H_MAX, n)?;
        let _ = match t {
            Some(h) => writeln!(out, "  {}: first failing h = {h:?}", method.name()),
            None => writeln!(out, "  {}: none", method.name()),
        };
    }

    if let Some(path) = sc.comparison_csv.as_ref().or(sc.csv.as_ref()) {
        write_file(path, &cmp.to_csv())?;
        let _ = writeln!(out, "comparison csv: {}", path.display());
    }
    if let Some(path) = &sc.svg {
        let equilibria = enumerate_equilibria(&model)?;
        write_file(path, &svg::render(&sc.label, &comparison_series(&cmp), &markers(&equilibria)))?;
        let _ = writeln!(out, "svg: {}", path.display());
    }
    Ok(out)
}

pub const DEFAULT_ORDER_T_END: f64 = 10.0;

pub fn order(sc: &Scenario, h_list: &[f64]) -> Outcome {
    let model = sc.model()?;
    let t_end = sc.t_end.unwrap_or(DEFAULT_ORDER_T_END);
    let methods = match &sc.methods {
        Some(m) => m.clone(),
        None => vec![MethodName::Nsfd, MethodName::Euler, MethodName::Rk4],
    };
    let mut out = header(sc, &model);
    let _ = writeln!(
        out,
        "order at t_end = {t_end:?} from ({:?}, {:?}), h = {:?}",
        sc.x0, sc.y0, h_list
    );
    let mut csv = String::from("method,h,error\n");
    for m in methods {
        let method = match m {
            MethodName::Nsfd => sc.nsfd_method()?,
            MethodName::Euler => Method::Euler,
            MethodName::Rk4 => Method::Rk4,
        };
        let est = estimate_order(method, &model, sc.start(), t_end, h_list)?;
        let _ = writeln!(out, "  {}: p = {:.4}", est.method, est.order);
        for (h, e) in &est.errors {
            let _ = writeln!(out, "    h = {h:?}: error = {e:e}");
            let _ = writeln!(csv, "{},{h:?},{e:?}", est.method);
        }
    }
    if let Some(path) = &sc.csv {
        write_file(path, &csv)?;
        let _ = writeln!(out, "order csv: {}", path.display());
    }
    Ok(out)
}
