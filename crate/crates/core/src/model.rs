//! The continuous predator-prey system
//!
//! ```text
//! x' = x [ r(x) - y phi(x) - m1 ]
//! y' = y [ s(y) + c x phi(x) - m2 ]
//! ```
//!
//! with per-capita recruitment rates `r`, `s` and functional response
//! `x phi(x)`. The vital rates are abstract ([`VitalRates`]) and must supply
//! closed-form derivatives; [`RationalVitalRates`] is the concrete family
//! `r(x) = a_r/(x + b_r)`, `s(y) = a_s/(y + b_s)`, `phi(x) = 1/(x + b_phi)`.

use std::fmt;

use crate::error::{Error, Result};

/// Probe grid used when a model is constructed.
pub const DEFAULT_PROBE_GRID: [f64; 7] = [0.0, 0.5, 1.0, 5.0, 10.0, 50.0, 100.0];
/// Large argument at which `r` and `s` must have decayed below [`DEFAULT_DECAY_EPS`].
pub const DEFAULT_DECAY_PROBE: f64 = 1e6;
pub const DEFAULT_DECAY_EPS: f64 = 1e-3;

/// A point of the nonnegative quadrant (prey `x`, predators `y`).
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct PopulationState {
    pub x: f64,
    pub y: f64,
}

impl PopulationState {
    pub const ORIGIN: PopulationState = PopulationState { x: 0.0, y: 0.0 };

    /// Validated constructor: both coordinates finite and nonnegative.
    pub fn new(x: f64, y: f64) -> Result<Self> {
        let state = Self { x, y };
        if state.in_omega() {
            Ok(state)
        } else {
            Err(Error::InvalidParameter(format!(
                "state ({x}, {y}) is outside the nonnegative quadrant"
            )))
        }
    }

    pub fn in_omega(&self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.x >= 0.0 && self.y >= 0.0
    }

    pub fn max_norm(&self) -> f64 {
        self.x.abs().max(self.y.abs())
    }

    pub fn distance_inf(&self, other: &PopulationState) -> f64 {
        (self.x - other.x).abs().max((self.y - other.y).abs())
    }
}

impl From<PopulationState> for (f64, f64) {
    fn from(s: PopulationState) -> Self {
        (s.x, s.y)
    }
}

/// Mortality rates and conversion efficiency.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MortalityParams {
    m1: f64,
    m2: f64,
    c: f64,
}

impl MortalityParams {
    pub fn new(m1: f64, m2: f64, c: f64) -> Result<Self> {
        if !(m1.is_finite() && m1 > 0.0) {
            return Err(Error::InvalidParameter(format!("m1 must be positive, got {m1}")));
        }
        if !(m2.is_finite() && m2 > 0.0) {
            return Err(Error::InvalidParameter(format!("m2 must be positive, got {m2}")));
        }
        if !(c > 0.0 && c < 1.0) {
            return Err(Error::InvalidParameter(format!("c must lie in (0, 1), got {c}")));
        }
        Ok(Self { m1, m2, c })
    }

    /// Prey total mortality.
    pub fn m1(&self) -> f64 {
        self.m1
    }

    /// Predator total mortality.
    pub fn m2(&self) -> f64 {
        self.m2
    }

    /// Conversion efficiency of prey into predators.
    pub fn c(&self) -> f64 {
        self.c
    }
}

/// Recruitment rates `r`, `s` and response `phi`, each with its derivative.
///
/// Implementations must give closed-form derivatives: stability verdicts are
/// computed from them pointwise.
pub trait VitalRates {
    fn r(&self, x: f64) -> f64;
    fn r_prime(&self, x: f64) -> f64;
    fn s(&self, y: f64) -> f64;
    fn s_prime(&self, y: f64) -> f64;
    fn phi(&self, x: f64) -> f64;
    fn phi_prime(&self, x: f64) -> f64;

    /// Closed-form solution of `r(x) = level`, if the family has one.
    fn r_inverse(&self, _level: f64) -> Option<f64> {
        None
    }

    /// Closed-form solution of `s(y) = level`, if the family has one.
    fn s_inverse(&self, _level: f64) -> Option<f64> {
        None
    }
}

impl<T: VitalRates + ?Sized> VitalRates for Box<T> {
    fn r(&self, x: f64) -> f64 {
        (**self).r(x)
    }
    fn r_prime(&self, x: f64) -> f64 {
        (**self).r_prime(x)
    }
    fn s(&self, y: f64) -> f64 {
        (**self).s(y)
    }
    fn s_prime(&self, y: f64) -> f64 {
        (**self).s_prime(y)
    }
    fn phi(&self, x: f64) -> f64 {
        (**self).phi(x)
    }
    fn phi_prime(&self, x: f64) -> f64 {
        (**self).phi_prime(x)
    }
    fn r_inverse(&self, level: f64) -> Option<f64> {
        (**self).r_inverse(level)
    }
    fn s_inverse(&self, level: f64) -> Option<f64> {
        (**self).s_inverse(level)
    }
}

/// `r(x) = a_r/(x + b_r)`, `s(y) = a_s/(y + b_s)`, `phi(x) = 1/(x + b_phi)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RationalVitalRates {
    a_r: f64,
    b_r: f64,
    a_s: f64,
    b_s: f64,
    b_phi: f64,
}

impl RationalVitalRates {
    pub fn new(a_r: f64, b_r: f64, a_s: f64, b_s: f64, b_phi: f64) -> Result<Self> {
        for (name, v) in [
            ("a_r", a_r),
            ("b_r", b_r),
            ("a_s", a_s),
            ("b_s", b_s),
            ("b_phi", b_phi),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::InvalidParameter(format!(
                    "{name} must be positive, got {v}"
                )));
            }
        }
        Ok(Self {
            a_r,
            b_r,
            a_s,
            b_s,
            b_phi,
        })
    }

    /// The textbook instance: `x r(x) = 15x/(x+10)`, `y s(y) = 5y/(y+10)`,
    /// `x phi(x) = x/(x+30)`.
    pub fn reference() -> Self {
        Self {
            a_r: 15.0,
            b_r: 10.0,
            a_s: 5.0,
            b_s: 10.0,
            b_phi: 30.0,
        }
    }

    pub fn a_r(&self) -> f64 {
        self.a_r
    }
    pub fn b_r(&self) -> f64 {
        self.b_r
    }
    pub fn a_s(&self) -> f64 {
        self.a_s
    }
    pub fn b_s(&self) -> f64 {
        self.b_s
    }
    pub fn b_phi(&self) -> f64 {
        self.b_phi
    }

    pub fn r_at_zero(&self) -> f64 {
        self.a_r / self.b_r
    }
    pub fn s_at_zero(&self) -> f64 {
        self.a_s / self.b_s
    }
    pub fn phi_at_zero(&self) -> f64 {
        1.0 / self.b_phi
    }
}

impl VitalRates for RationalVitalRates {
    #[inline]
    fn r(&self, x: f64) -> f64 {
        self.a_r / (x + self.b_r)
    }
    #[inline]
    fn r_prime(&self, x: f64) -> f64 {
        let d = x + self.b_r;
        -self.a_r / (d * d)
    }
    #[inline]
    fn s(&self, y: f64) -> f64 {
        self.a_s / (y + self.b_s)
    }
    #[inline]
    fn s_prime(&self, y: f64) -> f64 {
        let d = y + self.b_s;
        -self.a_s / (d * d)
    }
    #[inline]
    fn phi(&self, x: f64) -> f64 {
        1.0 / (x + self.b_phi)
    }
    #[inline]
    fn phi_prime(&self, x: f64) -> f64 {
        let d = x + self.b_phi;
        -1.0 / (d * d)
    }

    fn r_inverse(&self, level: f64) -> Option<f64> {
        (level > 0.0).then(|| self.a_r / level - self.b_r)
    }

    fn s_inverse(&self, level: f64) -> Option<f64> {
        (level > 0.0).then(|| self.a_s / level - self.b_s)
    }
}

/// One sub-condition of the admissibility requirements on the vital rates.
#[derive(Debug, Clone, PartialEq)]
pub struct BiologicalCheck {
    pub condition: &'static str,
    pub passed: bool,
    /// First probe at which the condition failed.
    pub failing_probe: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct BiologicalReport {
    pub checks: Vec<BiologicalCheck>,
}

impl BiologicalReport {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn check(&self, condition: &str) -> Option<&BiologicalCheck> {
        self.checks.iter().find(|c| c.condition == condition)
    }

    pub fn failures(&self) -> impl Iterator<Item = &BiologicalCheck> {
        self.checks.iter().filter(|c| !c.passed)
    }
}

impl fmt::Display for BiologicalReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for c in &self.checks {
            let status = if c.passed { "pass" } else { "fail" };
            match c.failing_probe {
                Some(p) => writeln!(f, "{} = {} (at {})", c.condition, status, p)?,
                None => writeln!(f, "{} = {}", c.condition, status)?,
            }
        }
        Ok(())
    }
}

fn grid_check(
    condition: &'static str,
    grid: &[f64],
    holds: impl Fn(f64) -> bool,
) -> BiologicalCheck {
    let failing_probe = grid.iter().copied().find(|&p| !holds(p));
    BiologicalCheck {
        condition,
        passed: failing_probe.is_none(),
        failing_probe,
    }
}

/// Checks the sign, monotonicity and decay requirements on the vital rates
/// at every probe point. Product-rule monotonicity (`[x r(x)]' >= 0`) is
/// evaluated from the supplied derivatives; decay is `r(decay_probe) <
/// decay_eps` (same for `s`).
pub fn verify_biological_conditions<R: VitalRates + ?Sized>(
    rates: &R,
    probe_grid: &[f64],
    decay_probe: f64,
    decay_eps: f64,
) -> Result<BiologicalReport> {
    if probe_grid.is_empty() {
        return Err(Error::EmptyGrid);
    }
    let sorted = probe_grid.windows(2).all(|w| w[0] <= w[1]);
    if !sorted || probe_grid.iter().any(|p| !(*p >= 0.0)) {
        return Err(Error::InvalidGrid);
    }

    let g = probe_grid;
    let decay = |condition, value: f64| BiologicalCheck {
        condition,
        passed: value < decay_eps,
        failing_probe: (value >= decay_eps || value.is_nan()).then_some(decay_probe),
    };
    let checks = vec![
        grid_check("r(x) > 0", g, |x| rates.r(x) > 0.0),
        grid_check("r'(x) < 0", g, |x| rates.r_prime(x) < 0.0),
        grid_check("[x r(x)]' >= 0", g, |x| rates.r(x) + x * rates.r_prime(x) >= 0.0),
        decay("r(x) -> 0", rates.r(decay_probe)),
        grid_check("s(y) > 0", g, |y| rates.s(y) > 0.0),
        grid_check("s'(y) < 0", g, |y| rates.s_prime(y) < 0.0),
        grid_check("[y s(y)]' >= 0", g, |y| rates.s(y) + y * rates.s_prime(y) >= 0.0),
        decay("s(y) -> 0", rates.s(decay_probe)),
        grid_check("phi(x) > 0", g, |x| rates.phi(x) > 0.0),
        grid_check("phi'(x) <= 0", g, |x| rates.phi_prime(x) <= 0.0),
        grid_check("[x phi(x)]' >= 0", g, |x| {
            rates.phi(x) + x * rates.phi_prime(x) >= 0.0
        }),
    ];
    Ok(BiologicalReport { checks })
}

/// The continuous system bound to a concrete set of vital rates.
///
/// Construction verifies the vital rates on [`DEFAULT_PROBE_GRID`] and keeps
/// the report; failures are recorded, not rejected.
#[derive(Debug, Clone)]
pub struct PreyPredatorModel<R = RationalVitalRates> {
    rates: R,
    params: MortalityParams,
    verification: BiologicalReport,
}

impl<R: VitalRates> PreyPredatorModel<R> {
    pub fn new(rates: R, params: MortalityParams) -> Self {
        let verification = verify_biological_conditions(
            &rates,
            &DEFAULT_PROBE_GRID,
            DEFAULT_DECAY_PROBE,
            DEFAULT_DECAY_EPS,
        )
        .expect("default grid is nonempty and sorted");
        Self {
            rates,
            params,
            verification,
        }
    }

    pub fn rates(&self) -> &R {
        &self.rates
    }

    pub fn params(&self) -> &MortalityParams {
        &self.params
    }

    pub fn verification(&self) -> &BiologicalReport {
        &self.verification
    }

    pub fn is_verified(&self) -> bool {
        self.verification.all_passed()
    }

    pub fn m1(&self) -> f64 {
        self.params.m1
    }
    pub fn m2(&self) -> f64 {
        self.params.m2
    }
    pub fn c(&self) -> f64 {
        self.params.c
    }

    /// `r(0)`: the prey extinction threshold on `m1`.
    pub fn r0(&self) -> f64 {
        self.rates.r(0.0)
    }
    /// `s(0)`: the predator extinction threshold on `m2`.
    pub fn s0(&self) -> f64 {
        self.rates.s(0.0)
    }
    pub fn phi0(&self) -> f64 {
        self.rates.phi(0.0)
    }

    /// Per-capita prey growth `f(x, y) = r(x) - y phi(x) - m1`.
    #[inline]
    pub fn prey_rate(&self, x: f64, y: f64) -> f64 {
        self.rates.r(x) - y * self.rates.phi(x) - self.params.m1
    }

    /// Per-capita predator growth `g(x, y) = s(y) + c x phi(x) - m2`.
    #[inline]
    pub fn predator_rate(&self, x: f64, y: f64) -> f64 {
        self.rates.s(y) + self.params.c * x * self.rates.phi(x) - self.params.m2
    }

    /// `(dx/dt, dy/dt)` on the invariant quadrant.
    pub fn vector_field(&self, state: PopulationState) -> (f64, f64) {
        self.vector_field_raw(state.x, state.y)
    }

    /// The same formula applied verbatim to any real pair, including negative
    /// coordinates produced by standard integrators.
    #[inline]
    pub fn vector_field_raw(&self, x: f64, y: f64) -> (f64, f64) {
        (x * self.prey_rate(x, y), y * self.predator_rate(x, y))
    }
}

impl PreyPredatorModel<RationalVitalRates> {
    /// Reference vital rates with `c = 0.003` and the given mortalities.
    pub fn reference(m1: f64, m2: f64) -> Result<Self> {
        Ok(Self::new(
            RationalVitalRates::reference(),
            MortalityParams::new(m1, m2, REFERENCE_CONVERSION)?,
        ))
    }
}

/// Conversion efficiency of the reference example.
pub const REFERENCE_CONVERSION: f64 = 0.003;

/// The six `(m1, m2)` parameter cases studied with the reference rates.
pub const REFERENCE_CASES: [(&str, f64, f64); 6] = [
    ("i", 1.53, 0.622),
    ("ii", 1.53, 0.4789),
    ("iii", 1.4925, 0.4789),
    ("iv", 1.38, 0.4789),
    ("v", 0.3, 0.501),
    ("vi", 1.38, 0.622),
];

/// Looks up one of [`REFERENCE_CASES`] by its roman-numeral label.
pub fn reference_case(label: &str) -> Option<(f64, f64)> {
    let label = label.trim().to_ascii_lowercase();
    REFERENCE_CASES
        .iter()
        .find(|(l, _, _)| *l == label)
        .map(|&(_, m1, m2)| (m1, m2))
}
