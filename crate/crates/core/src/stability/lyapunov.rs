//! Lyapunov certificate for global stability of the extinction point when
//! both mortalities reach the zero-density growth rates.
//!
//! `V(x, y) = a x y + b x^2 + g x + d y` with weights chosen so that
//!
//! ```text
//! max{c, (-a2 c r(0) + a6 c m1) / (b6 m2)} < b/a  and  < g/d
//! c a4 phi(0) / (b6 m2) < a/d
//! a4 + b4 < 0
//! ```

use std::fmt::Write as _;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::model::{PopulationState, PreyPredatorModel, VitalRates};
use crate::scheme::{check_global_stability_condition, check_positivity_conditions};
use crate::scheme::{DiscreteMap, SchemeParams};

/// States with max-norm at or below this are treated as the origin.
pub const ORIGIN_TOL: f64 = 1e-14;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LyapunovParams {
    xy_weight: f64,
    x2_weight: f64,
    x_weight: f64,
    y_weight: f64,
}

impl LyapunovParams {
    pub fn new(xy_weight: f64, x2_weight: f64, x_weight: f64, y_weight: f64) -> Result<Self> {
        for (name, w) in [
            ("xy weight", xy_weight),
            ("x^2 weight", x2_weight),
            ("x weight", x_weight),
            ("y weight", y_weight),
        ] {
            if !(w > 0.0 && w.is_finite()) {
                return Err(Error::InvalidParameter(format!(
                    "{name} must be positive and finite, got {w}"
                )));
            }
        }
        Ok(Self {
            xy_weight,
            x2_weight,
            x_weight,
            y_weight,
        })
    }

    pub fn xy_weight(&self) -> f64 {
        self.xy_weight
    }
    pub fn x2_weight(&self) -> f64 {
        self.x2_weight
    }
    pub fn x_weight(&self) -> f64 {
        self.x_weight
    }
    pub fn y_weight(&self) -> f64 {
        self.y_weight
    }

    pub fn scaled(&self, k: f64) -> Result<Self> {
        Self::new(
            k * self.xy_weight,
            k * self.x2_weight,
            k * self.x_weight,
            k * self.y_weight,
        )
    }

    pub fn value(&self, state: PopulationState) -> f64 {
        lyapunov_value(self, state)
    }

    /// Re-evaluates the four certificate inequalities.
    pub fn satisfies_certificate<R: VitalRates>(
        &self,
        model: &PreyPredatorModel<R>,
        scheme: &SchemeParams,
    ) -> bool {
        let Ok((b1, b2)) = certificate_bounds(model, scheme) else {
            return false;
        };
        b1 < self.x2_weight / self.xy_weight
            && b1 < self.x_weight / self.y_weight
            && b2 < self.xy_weight / self.y_weight
            && check_global_stability_condition(scheme)
    }
}

pub fn lyapunov_value(params: &LyapunovParams, state: PopulationState) -> f64 {
    let PopulationState { x, y } = state;
    params.xy_weight * x * y + params.x2_weight * x * x + params.x_weight * x + params.y_weight * y
}

/// The two lower bounds appearing in the certificate: the bound on
/// `b/a` and `g/d`, and the bound on `a/d`.
pub fn certificate_bounds<R: VitalRates>(
    model: &PreyPredatorModel<R>,
    scheme: &SchemeParams,
) -> Result<(f64, f64)> {
    let a = scheme.alpha();
    let b6 = scheme.beta()[5];
    if !(b6 > 0.0) {
        return Err(Error::InfeasibleScheme(format!(
            "sixth predator weight must be positive, got {b6}"
        )));
    }
    let c = model.c();
    let scale = b6 * model.m2();
    let b1 = c.max((-a[1] * c * model.r0() + a[5] * c * model.m1()) / scale);
    let b2 = c * a[3] * model.phi0() / scale;
    Ok((b1, b2))
}

fn check_preconditions<R: VitalRates>(
    model: &PreyPredatorModel<R>,
    scheme: &SchemeParams,
) -> Result<()> {
    if !(model.m1() >= model.r0() && model.m2() >= model.s0()) {
        return Err(Error::InvalidParameter(format!(
            "certificate needs m1 >= r(0) = {} and m2 >= s(0) = {}, got ({}, {})",
            model.r0(),
            model.s0(),
            model.m1(),
            model.m2()
        )));
    }
    let violations = scheme.positivity_violations();
    if !check_positivity_conditions(scheme).passed {
        return Err(Error::InfeasibleScheme(format!(
            "sign conditions violated: {}",
            violations.join(", ")
        )));
    }
    if !check_global_stability_condition(scheme) {
        let s = scheme.alpha()[3] + scheme.beta()[3];
        return Err(Error::InfeasibleScheme(format!(
            "alpha4 + beta4 must be negative, got {s}"
        )));
    }
    Ok(())
}

/// Weights with a factor-2 margin on every inequality:
/// `d = 1, a = 2 max(B2, 1), b = 2 B1 a, g = 2 B1`.
pub fn select_lyapunov_params<R: VitalRates>(
    model: &PreyPredatorModel<R>,
    scheme: &SchemeParams,
) -> Result<LyapunovParams> {
    check_preconditions(model, scheme)?;
    let (b1, b2) = certificate_bounds(model, scheme)?;
    let y_weight = 1.0;
    let xy_weight = 2.0 * b2.max(1.0);
    LyapunovParams::new(xy_weight, 2.0 * b1 * xy_weight, 2.0 * b1, y_weight)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LyapunovReport {
    /// Number of steps taken.
    pub steps: usize,
    pub min_delta: Option<f64>,
    pub max_delta: Option<f64>,
    pub final_state: PopulationState,
    pub final_distance: f64,
    /// First index whose state lies strictly inside the target ball.
    pub entered_ball_at: Option<usize>,
}

fn validate<R: VitalRates>(map: &DiscreteMap<'_, R>, params: &LyapunovParams) -> Result<()> {
    check_preconditions(map.model(), map.scheme())?;
    if !params.satisfies_certificate(map.model(), map.scheme()) {
        return Err(Error::InfeasibleScheme(
            "weights do not satisfy the certificate inequalities".into(),
        ));
    }
    Ok(())
}

/// One trajectory under verification.
struct Walker {
    state: PopulationState,
    v: f64,
    k: usize,
    min_delta: f64,
    max_delta: f64,
    entered: Option<usize>,
}

impl Walker {
    fn start(params: &LyapunovParams, state0: PopulationState, radius: Option<f64>) -> Result<Self> {
        if !state0.in_omega() {
            return Err(Error::InvalidParameter(format!(
                "initial state ({}, {}) is outside the closed quadrant",
                state0.x, state0.y
            )));
        }
        let mut w = Walker {
            state: state0,
            v: lyapunov_value(params, state0),
            k: 0,
            min_delta: f64::INFINITY,
            max_delta: f64::NEG_INFINITY,
            entered: None,
        };
        w.mark(radius);
        Ok(w)
    }

    #[inline]
    fn mark(&mut self, radius: Option<f64>) {
        if radius.is_some_and(|r| self.state.max_norm() < r) {
            self.entered = Some(self.k);
        }
    }

    #[inline]
    fn finished(&self, max_steps: usize) -> bool {
        self.k >= max_steps || self.entered.is_some() || self.state.max_norm() <= ORIGIN_TOL
    }

    #[inline]
    fn advance<R: VitalRates>(
        &mut self,
        map: &DiscreteMap<'_, R>,
        params: &LyapunovParams,
        radius: Option<f64>,
        on_step: &mut impl FnMut(usize, PopulationState, f64, Option<f64>),
    ) -> Result<()> {
        let k = self.k;
        let next = map.step(self.state).map_err(|e| Error::StepFailed {
            index: k,
            source: Box::new(e),
        })?;
        let v_next = lyapunov_value(params, next);
        let delta = v_next - self.v;
        on_step(k, self.state, self.v, Some(delta));
        if !(delta < 0.0) {
            return Err(Error::DecreaseViolated {
                index: k,
                x: self.state.x,
                y: self.state.y,
                delta,
            });
        }
        self.min_delta = self.min_delta.min(delta);
        self.max_delta = self.max_delta.max(delta);
        self.state = next;
        self.v = v_next;
        self.k += 1;
        self.mark(radius);
        Ok(())
    }

    fn report(&self) -> LyapunovReport {
        let any = self.k > 0;
        LyapunovReport {
            steps: self.k,
            min_delta: any.then_some(self.min_delta),
            max_delta: any.then_some(self.max_delta),
            final_state: self.state,
            final_distance: self.state.max_norm(),
            entered_ball_at: self.entered,
        }
    }
}

fn run<R: VitalRates>(
    map: &DiscreteMap<'_, R>,
    params: &LyapunovParams,
    state0: PopulationState,
    max_steps: usize,
    radius: Option<f64>,
    mut on_step: impl FnMut(usize, PopulationState, f64, Option<f64>),
) -> Result<LyapunovReport> {
    validate(map, params)?;
    let mut w = Walker::start(params, state0, radius)?;
    while !w.finished(max_steps) {
        w.advance(map, params, radius, &mut on_step)?;
    }
    on_step(w.k, w.state, w.v, None);
    Ok(w.report())
}

/// Iterates `n` steps (stopping early at the origin) and checks `V`
/// strictly decreases at each one.
pub fn verify_lyapunov_decrease<R: VitalRates>(
    map: &DiscreteMap<'_, R>,
    params: &LyapunovParams,
    state0: PopulationState,
    n: usize,
) -> Result<LyapunovReport> {
    run(map, params, state0, n, None, |_, _, _, _| {})
}

/// Like [`verify_lyapunov_decrease`] but stops once the state is inside the
/// max-norm ball of `radius`, or after `max_steps`.
pub fn verify_lyapunov_until<R: VitalRates>(
    map: &DiscreteMap<'_, R>,
    params: &LyapunovParams,
    state0: PopulationState,
    max_steps: usize,
    radius: f64,
) -> Result<LyapunovReport> {
    run(map, params, state0, max_steps, Some(radius), |_, _, _, _| {})
}

/// [`verify_lyapunov_until`] over many starts in parallel. Results keep the
/// order of `starts`.
pub fn verify_lyapunov_many<R: VitalRates + Sync>(
    map: &DiscreteMap<'_, R>,
    params: &LyapunovParams,
    starts: &[PopulationState],
    max_steps: usize,
    radius: f64,
) -> Vec<Result<LyapunovReport>> {
    if let Err(e) = validate(map, params) {
        return starts.iter().map(|_| Err(e.clone())).collect();
    }
    starts
        .par_iter()
        .map(|&s| {
            let mut w = Walker::start(params, s, Some(radius))?;
            while !w.finished(max_steps) {
                w.advance(map, params, Some(radius), &mut |_, _, _, _| {})?;
            }
            Ok(w.report())
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LyapunovSample {
    pub k: usize,
    pub state: PopulationState,
    pub value: f64,
    /// `V(k+1) - V(k)`; absent on the last sample.
    pub delta: Option<f64>,
}

/// Per-step record of `V` along a trajectory.
pub fn lyapunov_trace<R: VitalRates>(
    map: &DiscreteMap<'_, R>,
    params: &LyapunovParams,
    state0: PopulationState,
    n: usize,
) -> Result<(LyapunovReport, Vec<LyapunovSample>)> {
    let mut samples = Vec::with_capacity(n + 1);
    let report = run(map, params, state0, n, None, |k, state, value, delta| {
        samples.push(LyapunovSample {
            k,
            state,
            value,
            delta,
        })
    })?;
    Ok((report, samples))
}

pub fn trace_to_csv(samples: &[LyapunovSample]) -> String {
    let mut out = String::from("k,x,y,V,dV\n");
    for s in samples {
        let _ = write!(out, "{},{:?},{:?},{:?},", s.k, s.state.x, s.state.y, s.value);
        if let Some(d) = s.delta {
            let _ = write!(out, "{d:?}");
        }
        out.push('\n');
    }
    out
}
