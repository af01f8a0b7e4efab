//! Scenario configuration: built-in cases, `key = value` files and
//! command-line overrides, layered in that order.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use nsfd_core::integrators::Method;
use nsfd_core::model::{reference_case, MortalityParams, RationalVitalRates};
use nsfd_core::{Denominator, PopulationState, PreyPredatorModel, SchemeParams};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("{path}:{line}: {message}")]
    Syntax {
        path: String,
        line: usize,
        message: String,
    },
    #[error("cannot read {path}: {source}")]
    Read {
        path: String,
        source: std::io::Error,
    },
    #[error("unknown key `{0}`")]
    UnknownKey(String),
    #[error("unknown case `{0}` (expected i, ii, iii, iv, v or vi)")]
    UnknownCase(String),
    #[error("invalid value for `{key}`: {message}")]
    Value { key: String, message: String },
    #[error("missing `{0}`: give --case or set it in a config file")]
    Missing(&'static str),
    #[error("{0}")]
    Invalid(String),
}

const KEYS: &[&str] = &[
    "a_r", "b_r", "a_s", "b_s", "b_phi", "c", "m1", "m2", "alpha1", "alpha2", "alpha3", "alpha4",
    "alpha5", "alpha6", "beta1", "beta2", "beta3", "beta4", "beta5", "beta6", "denominator", "q",
    "h", "n", "t_end", "x0", "y0", "csv", "svg", "comparison_csv", "methods",
];

/// Unresolved `key -> value` layers.
#[derive(Debug, Clone, Default)]
pub struct Settings {
    values: BTreeMap<String, String>,
    label: Option<String>,
}

impl Settings {
    pub fn set(&mut self, key: &str, value: impl Into<String>) -> Result<(), ConfigError> {
        if !KEYS.contains(&key) {
            return Err(ConfigError::UnknownKey(key.to_string()));
        }
        self.values.insert(key.to_string(), value.into());
        Ok(())
    }

    /// Loads the mortality pair of a built-in case.
    pub fn apply_case(&mut self, case: &str) -> Result<(), ConfigError> {
        let (m1, m2) =
            reference_case(case).ok_or_else(|| ConfigError::UnknownCase(case.to_string()))?;
        self.set("m1", m1.to_string())?;
        self.set("m2", m2.to_string())?;
        self.label = Some(format!("case {case}"));
        Ok(())
    }

    pub fn apply_file(&mut self, path: &Path) -> Result<(), ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Read {
            path: path.display().to_string(),
            source,
        })?;
        self.apply_text(&text, &path.display().to_string())?;
        self.label = Some(path.display().to_string());
        Ok(())
    }

    pub fn apply_text(&mut self, text: &str, origin: &str) -> Result<(), ConfigError> {
        let mut seen = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let syntax = |message: String| ConfigError::Syntax {
                path: origin.to_string(),
                line: i + 1,
                message,
            };
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| syntax(format!("expected `key = value`, got `{line}`")))?;
            let (key, value) = (key.trim(), value.trim());
            if seen.contains(&key) {
                return Err(syntax(format!("duplicate key `{key}`")));
            }
            seen.push(key);
            self.set(key, value).map_err(|e| syntax(e.to_string()))?;
        }
        Ok(())
    }

    fn get(&self, key: &str) -> Option<&str> {
        self.values.get(key).map(String::as_str)
    }

    fn real(&self, key: &str, default: Option<f64>) -> Result<Option<f64>, ConfigError> {
        match self.get(key) {
            None => Ok(default),
            Some(v) => v
                .parse::<f64>()
                .ok()
                .filter(|x| x.is_finite())
                .map(Some)
                .ok_or_else(|| ConfigError::Value {
                    key: key.to_string(),
                    message: format!("`{v}` is not a finite number"),
                }),
        }
    }

    fn required(&self, key: &'static str, default: Option<f64>) -> Result<f64, ConfigError> {
        self.real(key, default)?.ok_or(ConfigError::Missing(key))
    }

    pub fn resolve(&self) -> Result<Scenario, ConfigError> {
        let defaults = RationalVitalRates::reference();
        let alpha_default = SchemeParams::DEFAULT.alpha();
        let beta_default = SchemeParams::DEFAULT.beta();
        let mut alpha = [0.0; 6];
        let mut beta = [0.0; 6];
        for j in 0..6 {
            alpha[j] = self.required(KEYS[8 + j], Some(alpha_default[j]))?;
            beta[j] = self.required(KEYS[14 + j], Some(beta_default[j]))?;
        }

        let denominator = match self.get("denominator").unwrap_or("linear") {
            "linear" => DenominatorKind::Linear,
            "mickens" => DenominatorKind::Mickens,
            other => {
                return Err(ConfigError::Value {
                    key: "denominator".into(),
                    message: format!("`{other}` (expected linear or mickens)"),
                })
            }
        };
        let q = self.real("q", None)?;
        if denominator == DenominatorKind::Mickens && q.is_none() {
            return Err(ConfigError::Missing("q"));
        }

        let n = match self.get("n") {
            None => None,
            Some(v) => Some(v.parse::<usize>().map_err(|_| ConfigError::Value {
                key: "n".into(),
                message: format!("`{v}` is not a nonnegative integer"),
            })?),
        };

        let methods = match self.get("methods") {
            None => None,
            Some(v) => Some(parse_methods(v)?),
        };

        let path = |key: &str| self.get(key).filter(|s| !s.is_empty()).map(PathBuf::from);

        let scenario = Scenario {
            label: self.label.clone().unwrap_or_else(|| "scenario".into()),
            a_r: self.required("a_r", Some(defaults.a_r()))?,
            b_r: self.required("b_r", Some(defaults.b_r()))?,
            a_s: self.required("a_s", Some(defaults.a_s()))?,
            b_s: self.required("b_s", Some(defaults.b_s()))?,
            b_phi: self.required("b_phi", Some(defaults.b_phi()))?,
            c: self.required("c", Some(nsfd_core::model::REFERENCE_CONVERSION))?,
            m1: self.required("m1", None)?,
            m2: self.required("m2", None)?,
            alpha,
            beta,
            denominator,
            q,
            h: self.required("h", Some(DEFAULT_H))?,
            n,
            t_end: self.real("t_end", None)?,
            x0: self.required("x0", Some(DEFAULT_START.x))?,
            y0: self.required("y0", Some(DEFAULT_START.y))?,
            csv: path("csv"),
            svg: path("svg"),
            comparison_csv: path("comparison_csv"),
            methods,
        };
        scenario.validate()?;
        Ok(scenario)
    }
}

pub const DEFAULT_H: f64 = 1.0;
pub const DEFAULT_STEPS: usize = 1000;
pub const DEFAULT_START: PopulationState = PopulationState { x: 10.0, y: 10.0 };

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DenominatorKind {
    Linear,
    Mickens,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MethodName {
    Nsfd,
    Euler,
    Rk4,
}

impl MethodName {
    pub fn as_str(&self) -> &'static str {
        match self {
            MethodName::Nsfd => "nsfd",
            MethodName::Euler => "euler",
            MethodName::Rk4 => "rk4",
        }
    }
}

pub fn parse_methods(list: &str) -> Result<Vec<MethodName>, ConfigError> {
    let mut out = Vec::new();
    for item in list.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        let m = match item {
            "nsfd" => MethodName::Nsfd,
            "euler" => MethodName::Euler,
            "rk4" => MethodName::Rk4,
            other => {
                return Err(ConfigError::Value {
                    key: "methods".into(),
                    message: format!("unknown method `{other}`"),
                })
            }
        };
        if !out.contains(&m) {
            out.push(m);
        }
    }
    if out.is_empty() {
        return Err(ConfigError::Value {
            key: "methods".into(),
            message: "empty list".into(),
        });
    }
    Ok(out)
}

/// A fully resolved run description.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub label: String,
    pub a_r: f64,
    pub b_r: f64,
    pub a_s: f64,
    pub b_s: f64,
    pub b_phi: f64,
    pub c: f64,
    pub m1: f64,
    pub m2: f64,
    pub alpha: [f64; 6],
    pub beta: [f64; 6],
    pub denominator: DenominatorKind,
    pub q: Option<f64>,
    pub h: f64,
    pub n: Option<usize>,
    pub t_end: Option<f64>,
    pub x0: f64,
    pub y0: f64,
    pub csv: Option<PathBuf>,
    pub svg: Option<PathBuf>,
    pub comparison_csv: Option<PathBuf>,
    pub methods: Option<Vec<MethodName>>,
}

impl Scenario {
    fn validate(&self) -> Result<(), ConfigError> {
        let invalid = |m: String| Err(ConfigError::Invalid(m));
        if self.n.is_some() && self.t_end.is_some() {
            return invalid("give either n or t_end, not both".into());
        }
        if !(self.h > 0.0) {
            return invalid(format!("h must be positive, got {}", self.h));
        }
        if !(self.x0 >= 0.0 && self.y0 >= 0.0) {
            return invalid(format!(
                "initial state must be nonnegative, got ({}, {})",
                self.x0, self.y0
            ));
        }
        if let Some(t) = self.t_end {
            if !(t > 0.0) {
                return invalid(format!("t_end must be positive, got {t}"));
            }
            self.steps()?;
        }
        self.model()?;
        self.scheme()?;
        self.denominator()?;
        Ok(())
    }

    pub fn model(&self) -> Result<PreyPredatorModel, ConfigError> {
        let rates = RationalVitalRates::new(self.a_r, self.b_r, self.a_s, self.b_s, self.b_phi)
            .map_err(|e| ConfigError::Invalid(e.to_string()))?;
        let params = MortalityParams::new(self.m1, self.m2, self.c)
            .map_err(|e| ConfigError::Invalid(e.to_string()))?;
        Ok(PreyPredatorModel::new(rates, params))
    }

    pub fn scheme(&self) -> Result<SchemeParams, ConfigError> {
        SchemeParams::new(self.alpha, self.beta).map_err(|e| ConfigError::Invalid(e.to_string()))
    }

    pub fn denominator(&self) -> Result<Denominator, ConfigError> {
        match self.denominator {
            DenominatorKind::Linear => Ok(Denominator::Linear),
            DenominatorKind::Mickens => Denominator::mickens(self.q.unwrap_or(f64::NAN))
                .map_err(|e| ConfigError::Invalid(e.to_string())),
        }
    }

    pub fn nsfd_method(&self) -> Result<Method, ConfigError> {
        Ok(Method::Nsfd {
            scheme: self.scheme()?,
            denominator: self.denominator()?,
        })
    }

    /// Number of steps: `n`, or `t_end / h` when that is an integer.
    pub fn steps(&self) -> Result<usize, ConfigError> {
        match (self.n, self.t_end) {
            (Some(n), _) => Ok(n),
            (None, Some(t)) => {
                let n = (t / self.h).round();
                if (n * self.h - t).abs() > 1e-9 * t || n < 1.0 {
                    Err(ConfigError::Invalid(format!(
                        "h = {} does not divide t_end = {t}",
                        self.h
                    )))
                } else {
                    Ok(n as usize)
                }
            }
            (None, None) => Ok(DEFAULT_STEPS),
        }
    }

    pub fn start(&self) -> PopulationState {
        PopulationState {
            x: self.x0,
            y: self.y0,
        }
    }

    pub fn methods(&self) -> Vec<MethodName> {
        self.methods.clone().unwrap_or_else(|| vec![MethodName::Nsfd])
    }

    /// Output paths this scenario writes to.
    pub fn outputs(&self) -> Vec<&Path> {
        [&self.csv, &self.svg, &self.comparison_csv]
            .into_iter()
            .flatten()
            .map(PathBuf::as_path)
            .collect()
    }

    /// The resolved scenario in config-file syntax.
    pub fn to_config(&self) -> String {
        let mut out = String::new();
        let mut kv = |k: &str, v: &dyn std::fmt::Display| {
            let _ = writeln!(out, "{k} = {v}");
        };
        // `{:?}` keeps floats in shortest round-trip form with exponents
        let real = |v: f64| format!("{v:?}");
        kv("a_r", &real(self.a_r));
        kv("b_r", &real(self.b_r));
        kv("a_s", &real(self.a_s));
        kv("b_s", &real(self.b_s));
        kv("b_phi", &real(self.b_phi));
        kv("c", &real(self.c));
        kv("m1", &real(self.m1));
        kv("m2", &real(self.m2));
        for j in 0..6 {
            kv(KEYS[8 + j], &real(self.alpha[j]));
        }
        for j in 0..6 {
            kv(KEYS[14 + j], &real(self.beta[j]));
        }
        match self.denominator {
            DenominatorKind::Linear => kv("denominator", &"linear"),
            DenominatorKind::Mickens => kv("denominator", &"mickens"),
        }
        if let Some(q) = self.q {
            kv("q", &real(q));
        }
        kv("h", &real(self.h));
        match (self.n, self.t_end) {
            (_, Some(t)) => kv("t_end", &real(t)),
            (Some(n), None) => kv("n", &n),
            (None, None) => kv("n", &DEFAULT_STEPS),
        }
        kv("x0", &real(self.x0));
        kv("y0", &real(self.y0));
        for (k, p) in [
            ("csv", &self.csv),
            ("svg", &self.svg),
            ("comparison_csv", &self.comparison_csv),
        ] {
            if let Some(p) = p {
                kv(k, &p.display());
            }
        }
        let methods: Vec<_> = self.methods().iter().map(|m| m.as_str()).collect();
        kv("methods", &methods.join(","));
        out
    }
}
