//! Equilibria of the continuous system and their stability.
//!
//! There are at most four kinds: extinction `P0 = (0, 0)`, predator
//! extinction `P1 = (K, 0)` with `r(K) = m1`, prey extinction `P2 = (0, M)`
//! with `s(M) = m2`, and coexistence `P3 = (x*, y*)` where `x*` is a root of
//!
//! ```text
//! psi(x) = c x phi(x) + s((r(x) - m1) / phi(x)) - m2
//! ```
//!
//! on `(0, K)` and `y* = (r(x*) - m1) / phi(x*)`.

use std::fmt;

use crate::error::{Error, Result};
use crate::model::{PopulationState, PreyPredatorModel, VitalRates};

/// Upper end of the generic bracketing interval for `K` and `M`.
pub const DEFAULT_X_MAX: f64 = 1e6;
/// Band around a stability boundary inside which an equilibrium is treated
/// as non-hyperbolic.
pub const DEFAULT_TOL_HYPERBOLIC: f64 = 1e-9;
/// Number of uniform subintervals scanned for sign changes of `psi`.
pub const INTERIOR_SCAN_INTERVALS: usize = 1024;

const ROOT_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum EquilibriumKind {
    /// `P0 = (0, 0)`
    Extinction,
    /// `P1 = (K, 0)`
    PredatorExtinction,
    /// `P2 = (0, M)`
    PreyExtinction,
    /// `P3 = (x*, y*)`
    Coexistence,
}

impl EquilibriumKind {
    pub fn label(&self) -> &'static str {
        match self {
            EquilibriumKind::Extinction => "P0",
            EquilibriumKind::PredatorExtinction => "P1",
            EquilibriumKind::PreyExtinction => "P2",
            EquilibriumKind::Coexistence => "P3",
        }
    }
}

impl fmt::Display for EquilibriumKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

/// Stability of an equilibrium of the continuous system.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ContinuousVerdict {
    GloballyStable,
    LocallyStable,
    Unstable,
    /// A linearization eigenvalue sits on the imaginary axis. For `P0` with
    /// `m1 >= r(0)` and `m2 >= s(0)` the point is still globally stable.
    NonHyperbolic { globally_stable: bool },
}

impl ContinuousVerdict {
    /// Attracting, either locally or globally.
    pub fn is_stable(&self) -> bool {
        matches!(
            self,
            ContinuousVerdict::GloballyStable
                | ContinuousVerdict::LocallyStable
                | ContinuousVerdict::NonHyperbolic {
                    globally_stable: true
                }
        )
    }

    pub fn is_hyperbolic(&self) -> bool {
        !matches!(self, ContinuousVerdict::NonHyperbolic { .. })
    }
}

impl fmt::Display for ContinuousVerdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ContinuousVerdict::GloballyStable => f.write_str("globally_stable"),
            ContinuousVerdict::LocallyStable => f.write_str("locally_stable"),
            ContinuousVerdict::Unstable => f.write_str("unstable"),
            ContinuousVerdict::NonHyperbolic {
                globally_stable: true,
            } => f.write_str("non_hyperbolic_globally_stable"),
            ContinuousVerdict::NonHyperbolic {
                globally_stable: false,
            } => f.write_str("non_hyperbolic"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Equilibrium {
    pub kind: EquilibriumKind,
    pub location: PopulationState,
    pub continuous_verdict: ContinuousVerdict,
}

/// Tuning for the root finders and the hyperbolicity band.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EquilibriumOptions {
    pub x_max: f64,
    pub tol_hyperbolic: f64,
    pub scan_intervals: usize,
}

impl Default for EquilibriumOptions {
    fn default() -> Self {
        Self {
            x_max: DEFAULT_X_MAX,
            tol_hyperbolic: DEFAULT_TOL_HYPERBOLIC,
            scan_intervals: INTERIOR_SCAN_INTERVALS,
        }
    }
}

/// Bisection for a root of a function that is positive at `lo` and negative
/// at `hi`, carried to floating-point resolution.
fn bisect(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> f64 {
    let f_lo = f(lo);
    let lo_positive = f_lo > 0.0;
    for _ in 0..2000 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let v = f(mid);
        if v == 0.0 {
            return mid;
        }
        if (v > 0.0) == lo_positive {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    if f(lo).abs() <= f(hi).abs() {
        lo
    } else {
        hi
    }
}

/// Root of `g(x) = level` for a decreasing `g` with `g(0) > level`.
fn decreasing_root(
    g: impl Fn(f64) -> f64,
    level: f64,
    x_max: f64,
    what: &'static str,
) -> Result<f64> {
    let shifted = |x: f64| g(x) - level;
    if !(shifted(x_max) < 0.0) {
        return Err(Error::BracketNotFound { what, x_max });
    }
    let root = bisect(shifted, 0.0, x_max);
    debug_assert!(shifted(root).abs() <= ROOT_TOL.max(level.abs() * 1e-14));
    Ok(root)
}

/// `K` with `r(K) = m1`, present iff `m1 < r(0)`. Uses the closed form when
/// the rate family provides one.
pub fn find_k<R: VitalRates>(model: &PreyPredatorModel<R>) -> Result<Option<f64>> {
    let m1 = model.m1();
    if !(m1 < model.r0()) {
        return Ok(None);
    }
    match model.rates().r_inverse(m1) {
        Some(k) => Ok(Some(k)),
        None => find_k_bisection(model, DEFAULT_X_MAX),
    }
}

/// Generic bisection route for `K` that ignores any closed form.
pub fn find_k_bisection<R: VitalRates>(
    model: &PreyPredatorModel<R>,
    x_max: f64,
) -> Result<Option<f64>> {
    let m1 = model.m1();
    if !(m1 < model.r0()) {
        return Ok(None);
    }
    decreasing_root(|x| model.rates().r(x), m1, x_max, "r(x) = m1").map(Some)
}

/// `M` with `s(M) = m2`, present iff `m2 < s(0)`.
pub fn find_m<R: VitalRates>(model: &PreyPredatorModel<R>) -> Result<Option<f64>> {
    let m2 = model.m2();
    if !(m2 < model.s0()) {
        return Ok(None);
    }
    match model.rates().s_inverse(m2) {
        Some(m) => Ok(Some(m)),
        None => find_m_bisection(model, DEFAULT_X_MAX),
    }
}

pub fn find_m_bisection<R: VitalRates>(
    model: &PreyPredatorModel<R>,
    y_max: f64,
) -> Result<Option<f64>> {
    let m2 = model.m2();
    if !(m2 < model.s0()) {
        return Ok(None);
    }
    decreasing_root(|y| model.rates().s(y), m2, y_max, "s(y) = m2").map(Some)
}

/// The boundary values that partition the `(m1, m2)` plane.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RegimeThresholds {
    pub r0: f64,
    pub s0: f64,
    pub k: Option<f64>,
    pub m: Option<f64>,
    /// `s(0) + c K phi(K)`: `P1` is stable above it.
    pub predator_invasion: Option<f64>,
    /// `r(0) - M phi(0)`: `P2` is stable above it.
    pub prey_invasion: Option<f64>,
}

impl RegimeThresholds {
    pub fn new<R: VitalRates>(model: &PreyPredatorModel<R>) -> Result<Self> {
        let k = find_k(model)?;
        let m = find_m(model)?;
        let rates = model.rates();
        Ok(Self {
            r0: model.r0(),
            s0: model.s0(),
            k,
            m,
            predator_invasion: k.map(|k| model.s0() + model.c() * k * rates.phi(k)),
            prey_invasion: m.map(|m| model.r0() - m * model.phi0()),
        })
    }

    /// Existence condition for the coexistence equilibrium.
    pub fn interior_exists(&self, m1: f64, m2: f64) -> bool {
        let low_mortality = matches!(self.prey_invasion, Some(t) if m1 < t) && m2 < self.s0;
        let window = m1 < self.r0
            && matches!(self.predator_invasion, Some(t) if self.s0 < m2 && m2 < t);
        low_mortality || window
    }
}

/// A coexistence equilibrium together with the number of sign-change
/// brackets seen by the scan (more than one means `psi` has several roots and
/// the leftmost was taken).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InteriorEquilibrium {
    pub state: PopulationState,
    pub brackets: usize,
}

/// `psi(x) = c x phi(x) + s((r(x) - m1)/phi(x)) - m2`.
pub fn interior_residual<R: VitalRates>(model: &PreyPredatorModel<R>, x: f64) -> f64 {
    let rates = model.rates();
    let phi = rates.phi(x);
    let y = (rates.r(x) - model.m1()) / phi;
    model.c() * x * phi + rates.s(y) - model.m2()
}

pub fn find_interior<R: VitalRates>(
    model: &PreyPredatorModel<R>,
) -> Result<Option<InteriorEquilibrium>> {
    find_interior_with(model, INTERIOR_SCAN_INTERVALS)
}

pub fn find_interior_with<R: VitalRates>(
    model: &PreyPredatorModel<R>,
    scan_intervals: usize,
) -> Result<Option<InteriorEquilibrium>> {
    let thresholds = RegimeThresholds::new(model)?;
    if !thresholds.interior_exists(model.m1(), model.m2()) {
        return Ok(None);
    }
    let k = thresholds
        .k
        .expect("interior existence implies m1 < r(0), hence K");
    let psi = |x: f64| interior_residual(model, x);

    let n = scan_intervals.max(1);
    let grid: Vec<(f64, f64)> = (0..=n)
        .map(|i| {
            let x = k * i as f64 / n as f64;
            (x, psi(x))
        })
        .collect();

    let mut brackets = Vec::new();
    for w in grid.windows(2) {
        let ((a, fa), (b, fb)) = (w[0], w[1]);
        if fb == 0.0 && b < k {
            brackets.push((b, b));
        } else if fa != 0.0 && fb != 0.0 && (fa < 0.0) != (fb < 0.0) {
            brackets.push((a, b));
        }
    }

    let &(a, b) = brackets.first().ok_or(Error::NoSignChange { k })?;
    let x = if a == b {
        a
    } else if psi(a) > 0.0 {
        bisect(psi, a, b)
    } else {
        bisect(|x| -psi(x), a, b)
    };
    let rates = model.rates();
    let y = (rates.r(x) - model.m1()) / rates.phi(x);
    Ok(Some(InteriorEquilibrium {
        state: PopulationState { x, y },
        brackets: brackets.len(),
    }))
}

/// Stability of an equilibrium of the continuous system.
///
/// `P0` is reported non-hyperbolic when `m1` or `m2` lies within
/// `tol_hyperbolic` of `r(0)` or `s(0)`; `P1` and `P2` likewise at their own
/// invasion thresholds.
pub fn classify_continuous<R: VitalRates>(
    model: &PreyPredatorModel<R>,
    kind: EquilibriumKind,
    location: PopulationState,
    tol_hyperbolic: f64,
) -> ContinuousVerdict {
    let (m1, m2) = (model.m1(), model.m2());
    let (r0, s0) = (model.r0(), model.s0());
    let rates = model.rates();
    match kind {
        EquilibriumKind::Extinction => {
            if (m1 - r0).abs() <= tol_hyperbolic || (m2 - s0).abs() <= tol_hyperbolic {
                ContinuousVerdict::NonHyperbolic {
                    globally_stable: m1 >= r0 && m2 >= s0,
                }
            } else if m1 > r0 && m2 > s0 {
                ContinuousVerdict::GloballyStable
            } else {
                ContinuousVerdict::Unstable
            }
        }
        EquilibriumKind::PredatorExtinction => {
            let k = location.x;
            let threshold = s0 + model.c() * k * rates.phi(k);
            if (m2 - threshold).abs() <= tol_hyperbolic {
                ContinuousVerdict::NonHyperbolic {
                    globally_stable: false,
                }
            } else if m1 < r0 && m2 > threshold {
                ContinuousVerdict::LocallyStable
            } else {
                ContinuousVerdict::Unstable
            }
        }
        EquilibriumKind::PreyExtinction => {
            let threshold = r0 - location.y * model.phi0();
            if (m1 - threshold).abs() <= tol_hyperbolic {
                ContinuousVerdict::NonHyperbolic {
                    globally_stable: false,
                }
            } else if m1 > threshold && m2 < s0 {
                ContinuousVerdict::LocallyStable
            } else {
                ContinuousVerdict::Unstable
            }
        }
        EquilibriumKind::Coexistence => ContinuousVerdict::LocallyStable,
    }
}

pub fn enumerate_equilibria<R: VitalRates>(
    model: &PreyPredatorModel<R>,
) -> Result<Vec<Equilibrium>> {
    enumerate_equilibria_with(model, &EquilibriumOptions::default())
}

/// All equilibria that exist for the model, each with its continuous verdict.
/// `P0` always comes first, then `P1`, `P2`, `P3` when present.
pub fn enumerate_equilibria_with<R: VitalRates>(
    model: &PreyPredatorModel<R>,
    options: &EquilibriumOptions,
) -> Result<Vec<Equilibrium>> {
    let k = match model.rates().r_inverse(model.m1()) {
        Some(_) => find_k(model)?,
        None => find_k_bisection(model, options.x_max)?,
    };
    let m = match model.rates().s_inverse(model.m2()) {
        Some(_) => find_m(model)?,
        None => find_m_bisection(model, options.x_max)?,
    };
    let interior = find_interior_with(model, options.scan_intervals)?;

    let mut located = vec![(EquilibriumKind::Extinction, PopulationState::ORIGIN)];
    if let Some(k) = k {
        located.push((EquilibriumKind::PredatorExtinction, PopulationState { x: k, y: 0.0 }));
    }
    if let Some(m) = m {
        located.push((EquilibriumKind::PreyExtinction, PopulationState { x: 0.0, y: m }));
    }
    if let Some(p3) = interior {
        located.push((EquilibriumKind::Coexistence, p3.state));
    }

    Ok(located
        .into_iter()
        .map(|(kind, location)| Equilibrium {
            kind,
            location,
            continuous_verdict: classify_continuous(model, kind, location, options.tol_hyperbolic),
        })
        .collect())
}

/// CSV with header `kind,x,y,verdict`.
pub fn equilibria_to_csv(equilibria: &[Equilibrium]) -> String {
    let mut out = String::from("kind,x,y,verdict\n");
    for e in equilibria {
        out.push_str(&format!(
            "{},{:?},{:?},{}\n",
            e.kind, e.location.x, e.location.y, e.continuous_verdict
        ));
    }
    out
}
