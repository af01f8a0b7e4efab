//! The nonstandard finite difference map.
//!
//! Each right-hand-side term of the continuous system is split between the
//! current and the next iterate with weights `alpha_j`, `beta_j`
//! (`alpha_j + alpha_{j+1} = 1` for `j = 1, 3, 5`, same for `beta`), and the
//! step `h` is replaced by a denominator function `varphi(h) = h + O(h^2)`.
//! Solving for the next iterate gives the explicit map
//!
//! ```text
//!          x + p a1 x r(x) - p a3 x y phi(x) - p a5 m1 x
//! F(x,y) = ---------------------------------------------
//!          1 - p a2 r(x) + p a4 y phi(x) + p a6 m1
//!
//!          y + p b1 y s(y) + p b3 c x y phi(x) - p b5 m2 y
//! G(x,y) = -----------------------------------------------
//!          1 - p b2 s(y) - p b4 c x phi(x) + p b6 m2
//! ```
//!
//! with `p = varphi(h)`. Under the sign conditions of
//! [`SchemeParams::positivity_violations`] every retained term is
//! nonnegative, so the quadrant is invariant for any `h`.

pub mod conditions;

use crate::error::{Error, Result};
use crate::model::{PopulationState, PreyPredatorModel, VitalRates};

pub use conditions::{
    check_coexistence_conditions, check_global_stability_condition,
    check_positivity_conditions, check_predator_extinction_conditions,
    check_prey_extinction_conditions, consistency_report, consistency_report_with, ConditionEntry,
    ConditionReport, Regime,
};

const PAIRING_TOL: f64 = 1e-12;

/// The twelve splitting weights.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SchemeParams {
    alpha: [f64; 6],
    beta: [f64; 6],
}

impl SchemeParams {
    /// Small-integer weights that satisfy the pairing constraint, the
    /// positivity sign conditions and `alpha4 + beta4 = -1 < 0`.
    pub const DEFAULT: SchemeParams = SchemeParams {
        alpha: [2.0, -1.0, -1.0, 2.0, -1.0, 2.0],
        beta: [2.0, -1.0, 4.0, -3.0, -1.0, 2.0],
    };

    pub fn new(alpha: [f64; 6], beta: [f64; 6]) -> Result<Self> {
        if alpha.iter().chain(beta.iter()).any(|w| !w.is_finite()) {
            return Err(Error::InvalidParameter("scheme weights must be finite".into()));
        }
        for j in [0, 2, 4] {
            let sa = alpha[j] + alpha[j + 1];
            let sb = beta[j] + beta[j + 1];
            if (sa - 1.0).abs() > PAIRING_TOL || (sb - 1.0).abs() > PAIRING_TOL {
                return Err(Error::InvalidParameter(format!(
                    "weights {} and {} must sum to 1 (alpha sum {sa}, beta sum {sb})",
                    j + 1,
                    j + 2
                )));
            }
        }
        Ok(Self { alpha, beta })
    }

    pub fn alpha(&self) -> &[f64; 6] {
        &self.alpha
    }

    pub fn beta(&self) -> &[f64; 6] {
        &self.beta
    }

    /// Names of the weights that break the positivity sign pattern
    /// `alpha = (+, -, -, +, -, +)`, `beta = (+, -, +, -, -, +)`
    /// (`+` meaning `>= 0`, `-` meaning `<= 0`).
    pub fn positivity_violations(&self) -> Vec<&'static str> {
        const ALPHA_NAMES: [&str; 6] = ["alpha1", "alpha2", "alpha3", "alpha4", "alpha5", "alpha6"];
        const BETA_NAMES: [&str; 6] = ["beta1", "beta2", "beta3", "beta4", "beta5", "beta6"];
        const ALPHA_SIGNS: [bool; 6] = [true, false, false, true, false, true];
        const BETA_SIGNS: [bool; 6] = [true, false, true, false, false, true];

        let mut out = Vec::new();
        for j in 0..6 {
            if ALPHA_SIGNS[j] != (self.alpha[j] >= 0.0) && self.alpha[j] != 0.0 {
                out.push(ALPHA_NAMES[j]);
            }
            if BETA_SIGNS[j] != (self.beta[j] >= 0.0) && self.beta[j] != 0.0 {
                out.push(BETA_NAMES[j]);
            }
        }
        out
    }
}

impl Default for SchemeParams {
    fn default() -> Self {
        Self::DEFAULT
    }
}

/// The function replacing `h` in the difference quotient.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub enum Denominator {
    /// `varphi(h) = h`
    #[default]
    Linear,
    /// `varphi(h) = (1 - exp(-q h)) / q`
    MickensExponential { q: f64 },
}

impl Denominator {
    pub fn mickens(q: f64) -> Result<Self> {
        if q.is_finite() && q > 0.0 {
            Ok(Denominator::MickensExponential { q })
        } else {
            Err(Error::InvalidParameter(format!("q must be positive, got {q}")))
        }
    }

    pub fn eval(&self, h: f64) -> f64 {
        match *self {
            Denominator::Linear => h,
            Denominator::MickensExponential { q } => -(-q * h).exp_m1() / q,
        }
    }
}

/// One step of the scheme bound to a model, weights, denominator and step size.
#[derive(Debug, Clone, Copy)]
pub struct DiscreteMap<'m, R = crate::model::RationalVitalRates> {
    model: &'m PreyPredatorModel<R>,
    scheme: SchemeParams,
    denominator: Denominator,
    h: f64,
    p: f64,
}

impl<'m, R: VitalRates> DiscreteMap<'m, R> {
    pub fn new(
        model: &'m PreyPredatorModel<R>,
        scheme: SchemeParams,
        denominator: Denominator,
        h: f64,
    ) -> Result<Self> {
        if !(h.is_finite() && h > 0.0) {
            return Err(Error::InvalidParameter(format!("step size must be positive, got {h}")));
        }
        Ok(Self {
            model,
            scheme,
            denominator,
            h,
            p: denominator.eval(h),
        })
    }

    /// Default weights and the linear denominator.
    pub fn with_defaults(model: &'m PreyPredatorModel<R>, h: f64) -> Result<Self> {
        Self::new(model, SchemeParams::DEFAULT, Denominator::Linear, h)
    }

    pub fn model(&self) -> &'m PreyPredatorModel<R> {
        self.model
    }
    pub fn scheme(&self) -> &SchemeParams {
        &self.scheme
    }
    pub fn denominator(&self) -> Denominator {
        self.denominator
    }
    pub fn h(&self) -> f64 {
        self.h
    }
    /// `varphi(h)`
    pub fn varphi(&self) -> f64 {
        self.p
    }

    /// The prey and predator denominators of the explicit map.
    #[inline]
    pub fn denominators(&self, x: f64, y: f64) -> (f64, f64) {
        let rates = self.model.rates();
        let p = self.p;
        let [_, a2, _, a4, _, a6] = self.scheme.alpha;
        let [_, b2, _, b4, _, b6] = self.scheme.beta;
        let phi = rates.phi(x);
        let c = self.model.c();
        let u = 1.0 - p * a2 * rates.r(x) + p * a4 * y * phi + p * a6 * self.model.m1();
        let v = 1.0 - p * b2 * rates.s(y) - p * b4 * c * x * phi + p * b6 * self.model.m2();
        (u, v)
    }

    fn check_denominators(&self, u: f64, v: f64, x: f64, y: f64) -> Result<()> {
        if !(u > 0.0) {
            return Err(Error::NonpositiveDenominator {
                which: "prey",
                value: u,
                x,
                y,
            });
        }
        if !(v > 0.0) {
            return Err(Error::NonpositiveDenominator {
                which: "predator",
                value: v,
                x,
                y,
            });
        }
        Ok(())
    }

    /// Next iterate `(F(x, y), G(x, y))`.
    #[inline]
    pub fn step(&self, state: PopulationState) -> Result<PopulationState> {
        let PopulationState { x, y } = state;
        let rates = self.model.rates();
        let p = self.p;
        let [a1, a2, a3, a4, a5, a6] = self.scheme.alpha;
        let [b1, b2, b3, b4, b5, b6] = self.scheme.beta;
        let (m1, m2, c) = (self.model.m1(), self.model.m2(), self.model.c());
        let r = rates.r(x);
        let s = rates.s(y);
        let phi = rates.phi(x);

        let u = 1.0 - p * a2 * r + p * a4 * y * phi + p * a6 * m1;
        let v = 1.0 - p * b2 * s - p * b4 * c * x * phi + p * b6 * m2;
        self.check_denominators(u, v, x, y)?;

        let num_x = x + p * a1 * x * r - p * a3 * x * y * phi - p * a5 * m1 * x;
        let num_y = y + p * b1 * y * s + p * b3 * c * x * y * phi - p * b5 * m2 * y;
        Ok(PopulationState {
            x: num_x / u,
            y: num_y / v,
        })
    }

    /// `(F(x, y) - x, G(x, y) - y)` computed from the rearranged form
    /// `varphi * x f(x, y) / u`, `varphi * y g(x, y) / v`. Valid because the
    /// weights pair to 1; it avoids the cancellation of `F - x` when the
    /// increment is much smaller than the state.
    pub fn increment(&self, x: f64, y: f64) -> Result<(f64, f64)> {
        let (u, v) = self.denominators(x, y);
        self.check_denominators(u, v, x, y)?;
        let p = self.p;
        Ok((
            p * x * self.model.prey_rate(x, y) / u,
            p * y * self.model.predator_rate(x, y) / v,
        ))
    }

    pub fn iterate(&self, state0: PopulationState, n: usize) -> Result<Trajectory> {
        let mut states = Vec::with_capacity(n + 1);
        states.push(state0);
        let mut current = state0;
        for index in 0..n {
            current = self.step(current).map_err(|e| Error::StepFailed {
                index,
                source: Box::new(e),
            })?;
            states.push(current);
        }
        Ok(Trajectory {
            t0: 0.0,
            h: self.h,
            states,
        })
    }

    /// Final state after `n` steps without storing the orbit.
    pub fn advance(&self, state0: PopulationState, n: usize) -> Result<PopulationState> {
        let mut current = state0;
        for index in 0..n {
            current = self.step(current).map_err(|e| Error::StepFailed {
                index,
                source: Box::new(e),
            })?;
        }
        Ok(current)
    }
}

/// An orbit sampled at `t0 + k h`.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub t0: f64,
    pub h: f64,
    pub states: Vec<PopulationState>,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn time(&self, k: usize) -> f64 {
        self.t0 + k as f64 * self.h
    }

    pub fn last(&self) -> Option<&PopulationState> {
        self.states.last()
    }

    pub fn stays_in_omega(&self) -> bool {
        self.states.iter().all(PopulationState::in_omega)
    }

    /// CSV with header `k,t,x,y`; floats in shortest round-trip form.
    pub fn to_csv(&self) -> String {
        let mut out = String::with_capacity(32 * self.states.len() + 8);
        out.push_str("k,t,x,y\n");
        for (k, s) in self.states.iter().enumerate() {
            out.push_str(&format!("{},{:?},{:?},{:?}\n", k, self.time(k), s.x, s.y));
        }
        out
    }
}
