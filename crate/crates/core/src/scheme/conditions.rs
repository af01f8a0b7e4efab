//! Sufficient conditions on the splitting weights for dynamic consistency,
//! and the regime table that says which of them a given `(m1, m2)` needs.

use std::fmt;

use super::SchemeParams;
use crate::equilibria::{find_interior, EquilibriumKind, RegimeThresholds, DEFAULT_TOL_HYPERBOLIC};
use crate::error::{Error, Result};
use crate::model::{PreyPredatorModel, VitalRates};

/// One evaluated condition.
#[derive(Debug, Clone, PartialEq)]
pub struct ConditionEntry {
    pub name: String,
    pub value: Option<f64>,
    pub passed: bool,
}

impl ConditionEntry {
    fn positive(name: &str, value: f64) -> Self {
        Self {
            name: name.to_string(),
            value: Some(value),
            passed: value > 0.0,
        }
    }
}

impl fmt::Display for ConditionEntry {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let status = if self.passed { "pass" } else { "fail" };
        match self.value {
            Some(v) => write!(f, "{} = {:?} {}", self.name, v, status),
            None => write!(f, "{} = - {}", self.name, status),
        }
    }
}

/// Sign conditions under which the nonnegative quadrant is invariant.
pub fn check_positivity_conditions(scheme: &SchemeParams) -> ConditionEntry {
    ConditionEntry {
        name: "positivity_signs".into(),
        value: None,
        passed: scheme.positivity_violations().is_empty(),
    }
}

/// `alpha4 + beta4 < 0`, the extra requirement for global stability of the
/// extinction point.
pub fn check_global_stability_condition(scheme: &SchemeParams) -> bool {
    scheme.alpha[3] + scheme.beta[3] < 0.0
}

fn global_stability_entry(scheme: &SchemeParams) -> ConditionEntry {
    ConditionEntry {
        name: "alpha4+beta4<0".into(),
        value: Some(scheme.alpha[3] + scheme.beta[3]),
        passed: check_global_stability_condition(scheme),
    }
}

/// `T1`, `T2` at `P1 = (K, 0)`; both must be positive.
pub fn check_predator_extinction_conditions<R: VitalRates>(
    model: &PreyPredatorModel<R>,
    scheme: &SchemeParams,
) -> Result<Vec<ConditionEntry>> {
    let k = RegimeThresholds::new(model)?
        .k
        .ok_or(Error::MissingEquilibrium(EquilibriumKind::PredatorExtinction))?;
    let rates = model.rates();
    let [_, a2, _, _, _, a6] = scheme.alpha;
    let [_, b2, _, b4, _, b6] = scheme.beta;
    let (m1, m2, c) = (model.m1(), model.m2(), model.c());
    let s0 = model.s0();
    let ckphi = c * k * rates.phi(k);

    let t1 = 2.0 * a6 * m1 - 2.0 * a2 * rates.r(k) + k * rates.r_prime(k);
    let t2 = s0 - m2 + ckphi - 2.0 * b2 * s0 - 2.0 * b4 * ckphi + 2.0 * b6 * m2;
    Ok(vec![
        ConditionEntry::positive("T1", t1),
        ConditionEntry::positive("T2", t2),
    ])
}

/// `T3`, `T4` at `P2 = (0, M)`; both must be positive.
pub fn check_prey_extinction_conditions<R: VitalRates>(
    model: &PreyPredatorModel<R>,
    scheme: &SchemeParams,
) -> Result<Vec<ConditionEntry>> {
    let m = RegimeThresholds::new(model)?
        .m
        .ok_or(Error::MissingEquilibrium(EquilibriumKind::PreyExtinction))?;
    Ok(prey_extinction_values(model, scheme, m))
}

pub(crate) fn prey_extinction_values<R: VitalRates>(
    model: &PreyPredatorModel<R>,
    scheme: &SchemeParams,
    m: f64,
) -> Vec<ConditionEntry> {
    let rates = model.rates();
    let [_, a2, _, a4, _, a6] = scheme.alpha;
    let [_, b2, _, _, _, b6] = scheme.beta;
    let (m1, m2) = (model.m1(), model.m2());
    let (r0, phi0) = (model.r0(), model.phi0());

    let t3 = r0 - m * phi0 - m1 - 2.0 * a2 * r0 + 2.0 * a4 * m * phi0 + 2.0 * a6 * m1;
    let t4 = m * rates.s_prime(m) - 2.0 * b2 * rates.s(m) + 2.0 * b6 * m2;
    vec![
        ConditionEntry::positive("T3", t3),
        ConditionEntry::positive("T4", t4),
    ]
}

/// `T5`, `T6`, `T7` at the coexistence point; all must be positive.
pub fn check_coexistence_conditions<R: VitalRates>(
    model: &PreyPredatorModel<R>,
    scheme: &SchemeParams,
) -> Result<Vec<ConditionEntry>> {
    let p3 = find_interior(model)?
        .ok_or(Error::MissingEquilibrium(EquilibriumKind::Coexistence))?;
    let (x, y) = (p3.state.x, p3.state.y);
    let rates = model.rates();
    let [_, a2, _, a4, _, a6] = scheme.alpha;
    let [_, b2, _, b4, _, b6] = scheme.beta;
    let (m1, m2, c) = (model.m1(), model.m2(), model.c());

    let phi = rates.phi(x);
    let dphi = rates.phi_prime(x);
    let ds = rates.s_prime(y);
    // r'(x*) - y* phi'(x*)
    let prey_slope = rates.r_prime(x) - y * dphi;
    let u_part = -a2 * rates.r(x) + a4 * y * phi + a6 * m1;
    let v_part = -b2 * rates.s(y) - b4 * c * x * phi + b6 * m2;

    let t5 = -x * prey_slope * v_part
        - y * ds * u_part
        - x * y * ds * prey_slope
        - c * x * y * phi * (phi + x * dphi);
    let t6 = u_part + x * prey_slope;
    let t7 = v_part + y * ds;
    Ok(vec![
        ConditionEntry::positive("T5", t5),
        ConditionEntry::positive("T6", t6),
        ConditionEntry::positive("T7", t7),
    ])
}

/// The five parameter regimes, each with its own sufficient stability
/// condition.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Regime {
    /// `m1 >= r(0)`, `m2 >= s(0)`: extinction is globally stable.
    Extinction,
    /// `m1 < r(0)`, `m2 > s(0) + c K phi(K)`: `P1` stable.
    PredatorExtinction,
    /// `m1 > r(0) - M phi(0)`, `m2 < s(0)`: `P2` stable.
    PreyExtinction,
    /// `m1 < r(0) - M phi(0)`, `m2 < s(0)`: `P3` stable.
    Coexistence,
    /// `m1 < r(0)`, `s(0) < m2 < s(0) + c K phi(K)`: `P3` stable.
    CoexistenceWindow,
}

impl Regime {
    /// Row number in the table of sufficient conditions (1-based).
    pub fn row(&self) -> usize {
        match self {
            Regime::Extinction => 1,
            Regime::PredatorExtinction => 2,
            Regime::PreyExtinction => 3,
            Regime::Coexistence => 4,
            Regime::CoexistenceWindow => 5,
        }
    }

    pub fn description(&self) -> &'static str {
        match self {
            Regime::Extinction => "m1 >= r(0) and m2 >= s(0)",
            Regime::PredatorExtinction => "m1 < r(0) and m2 > s(0) + c K phi(K)",
            Regime::PreyExtinction => "m1 > r(0) - M phi(0) and m2 < s(0)",
            Regime::Coexistence => "m1 < r(0) - M phi(0) and m2 < s(0)",
            Regime::CoexistenceWindow => "m1 < r(0) and s(0) < m2 < s(0) + c K phi(K)",
        }
    }

    /// The equilibrium whose stability the regime's condition certifies.
    pub fn stable_equilibrium(&self) -> EquilibriumKind {
        match self {
            Regime::Extinction => EquilibriumKind::Extinction,
            Regime::PredatorExtinction => EquilibriumKind::PredatorExtinction,
            Regime::PreyExtinction => EquilibriumKind::PreyExtinction,
            Regime::Coexistence | Regime::CoexistenceWindow => EquilibriumKind::Coexistence,
        }
    }

    /// Locates `(m1, m2)` in the regime table.
    ///
    /// The closed region `m1 >= r(0)`, `m2 >= s(0)` always resolves to
    /// [`Regime::Extinction`]. Anywhere else, a point within `tol` of a
    /// boundary between two regimes is reported as ambiguous.
    pub fn locate(m1: f64, m2: f64, t: &RegimeThresholds, tol: f64) -> Result<Regime> {
        let ambiguous = |boundary| Error::AmbiguousRegime {
            m1,
            m2,
            tol,
            boundary,
        };
        if m1 >= t.r0 && m2 >= t.s0 {
            return Ok(Regime::Extinction);
        }
        if (m2 - t.s0).abs() <= tol {
            return Err(ambiguous("m2 = s(0)"));
        }
        if m2 > t.s0 {
            // m1 < r(0) here, so K exists.
            if (m1 - t.r0).abs() <= tol {
                return Err(ambiguous("m1 = r(0)"));
            }
            let top = t.predator_invasion.expect("K exists when m1 < r(0)");
            if (m2 - top).abs() <= tol {
                return Err(ambiguous("m2 = s(0) + c K phi(K)"));
            }
            return Ok(if m2 > top {
                Regime::PredatorExtinction
            } else {
                Regime::CoexistenceWindow
            });
        }
        let threshold = t.prey_invasion.expect("M exists when m2 < s(0)");
        if (m1 - threshold).abs() <= tol {
            return Err(ambiguous("m1 = r(0) - M phi(0)"));
        }
        Ok(if m1 > threshold {
            Regime::PreyExtinction
        } else {
            Regime::Coexistence
        })
    }
}

impl fmt::Display for Regime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "row {} ({})", self.row(), self.description())
    }
}

/// The ledger of sufficient conditions for one model and scheme.
#[derive(Debug, Clone, PartialEq)]
pub struct ConditionReport {
    pub regime: Regime,
    pub entries: Vec<ConditionEntry>,
    /// Always true: the scheme's fixed points are exactly the model's
    /// equilibria.
    pub equilibria_preserved: bool,
    pub positivity: bool,
    pub stability: bool,
    pub consistent: bool,
}

impl ConditionReport {
    pub fn entry(&self, name: &str) -> Option<&ConditionEntry> {
        self.entries.iter().find(|e| e.name == name)
    }
}

impl fmt::Display for ConditionReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "regime = {}", self.regime)?;
        writeln!(f, "equilibria_preserved = * pass")?;
        for e in &self.entries {
            writeln!(f, "{e}")?;
        }
        writeln!(f, "dynamically_consistent = {}", self.consistent)
    }
}

pub fn consistency_report<R: VitalRates>(
    model: &PreyPredatorModel<R>,
    scheme: &SchemeParams,
) -> Result<ConditionReport> {
    consistency_report_with(model, scheme, DEFAULT_TOL_HYPERBOLIC)
}

/// Evaluates the positivity signs and the stability condition required by
/// the regime `(m1, m2)` falls into. Schemes failing the sign conditions are
/// never certified consistent.
pub fn consistency_report_with<R: VitalRates>(
    model: &PreyPredatorModel<R>,
    scheme: &SchemeParams,
    tol: f64,
) -> Result<ConditionReport> {
    let thresholds = RegimeThresholds::new(model)?;
    let regime = Regime::locate(model.m1(), model.m2(), &thresholds, tol)?;

    let positivity_entry = check_positivity_conditions(scheme);
    let positivity = positivity_entry.passed;
    let stability_entries = match regime {
        Regime::Extinction => vec![global_stability_entry(scheme)],
        Regime::PredatorExtinction => check_predator_extinction_conditions(model, scheme)?,
        Regime::PreyExtinction => check_prey_extinction_conditions(model, scheme)?,
        Regime::Coexistence | Regime::CoexistenceWindow => {
            check_coexistence_conditions(model, scheme)?
        }
    };
    let stability = stability_entries.iter().all(|e| e.passed);

    let mut entries = vec![positivity_entry];
    entries.extend(stability_entries);
    Ok(ConditionReport {
        regime,
        entries,
        equilibria_preserved: true,
        positivity,
        stability,
        consistent: positivity && stability,
    })
}
