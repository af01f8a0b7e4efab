//! Standard explicit integrators used as baselines, side-by-side
//! comparison against the nonstandard map, and empirical convergence orders.

use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::model::{PopulationState, PreyPredatorModel, VitalRates};
use crate::scheme::{Denominator, DiscreteMap, SchemeParams};

fn finite(x: f64, y: f64) -> Result<(f64, f64)> {
    if x.is_finite() && y.is_finite() {
        Ok((x, y))
    } else {
        Err(Error::NonFiniteValue { x, y })
    }
}

/// Forward Euler. No positivity guarantee.
pub fn euler_step<R: VitalRates>(
    model: &PreyPredatorModel<R>,
    x: f64,
    y: f64,
    h: f64,
) -> Result<(f64, f64)> {
    let (fx, fy) = model.vector_field_raw(x, y);
    finite(x + h * fx, y + h * fy)
}

/// Classical fourth-order Runge-Kutta. No positivity guarantee.
pub fn rk4_step<R: VitalRates>(
    model: &PreyPredatorModel<R>,
    x: f64,
    y: f64,
    h: f64,
) -> Result<(f64, f64)> {
    let f = |x, y| model.vector_field_raw(x, y);
    let (k1x, k1y) = f(x, y);
    let (k2x, k2y) = f(x + 0.5 * h * k1x, y + 0.5 * h * k1y);
    let (k3x, k3y) = f(x + 0.5 * h * k2x, y + 0.5 * h * k2y);
    let (k4x, k4y) = f(x + h * k3x, y + h * k3y);
    finite(
        x + h / 6.0 * (k1x + 2.0 * k2x + 2.0 * k3x + k4x),
        y + h / 6.0 * (k1y + 2.0 * k2y + 2.0 * k3y + k4y),
    )
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Method {
    Nsfd {
        scheme: SchemeParams,
        denominator: Denominator,
    },
    Euler,
    Rk4,
}

impl Method {
    pub const NSFD_DEFAULT: Method = Method::Nsfd {
        scheme: SchemeParams::DEFAULT,
        denominator: Denominator::Linear,
    };

    pub fn name(&self) -> &'static str {
        match self {
            Method::Nsfd { .. } => "nsfd",
            Method::Euler => "euler",
            Method::Rk4 => "rk4",
        }
    }

    /// Integrates `n` steps of size `h` and returns the final state.
    pub fn advance<R: VitalRates>(
        &self,
        model: &PreyPredatorModel<R>,
        state0: PopulationState,
        h: f64,
        n: usize,
    ) -> Result<PopulationState> {
        let step = self.stepper(model, h)?;
        let (mut x, mut y) = (state0.x, state0.y);
        for index in 0..n {
            (x, y) = step(x, y).map_err(|e| Error::StepFailed {
                index,
                source: Box::new(e),
            })?;
        }
        Ok(PopulationState { x, y })
    }

    fn stepper<'a, R: VitalRates>(
        &self,
        model: &'a PreyPredatorModel<R>,
        h: f64,
    ) -> Result<Box<dyn Fn(f64, f64) -> Result<(f64, f64)> + 'a>> {
        Ok(match *self {
            Method::Nsfd {
                scheme,
                denominator,
            } => {
                let map = DiscreteMap::new(model, scheme, denominator, h)?;
                Box::new(move |x, y| {
                    map.step(PopulationState { x, y }).map(|s| (s.x, s.y))
                })
            }
            Method::Euler => Box::new(move |x, y| euler_step(model, x, y, h)),
            Method::Rk4 => Box::new(move |x, y| rk4_step(model, x, y, h)),
        })
    }
}

/// One row of a side-by-side run. A method that failed earlier is `None`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ComparisonRow {
    pub k: usize,
    pub t: f64,
    pub nsfd: Option<PopulationState>,
    pub euler: Option<PopulationState>,
    pub rk4: Option<PopulationState>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MethodSummary {
    pub method: &'static str,
    /// First index with a negative component.
    pub first_negative: Option<usize>,
    /// First index at which the step failed (overflow or invalid denominator).
    pub failed_at: Option<usize>,
    pub final_state: Option<PopulationState>,
}

impl MethodSummary {
    pub fn stays_nonnegative(&self) -> bool {
        self.first_negative.is_none() && self.failed_at.is_none()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Comparison {
    pub h: f64,
    pub rows: Vec<ComparisonRow>,
    pub nsfd: MethodSummary,
    pub euler: MethodSummary,
    pub rk4: MethodSummary,
}

impl Comparison {
    pub fn summaries(&self) -> [&MethodSummary; 3] {
        [&self.nsfd, &self.euler, &self.rk4]
    }

    /// Largest max-norm gap between two methods over the steps where both exist.
    pub fn max_divergence(&self, a: &str, b: &str) -> Option<f64> {
        let pick = |row: &ComparisonRow, m: &str| match m {
            "nsfd" => row.nsfd,
            "euler" => row.euler,
            "rk4" => row.rk4,
            _ => None,
        };
        self.rows
            .iter()
            .filter_map(|r| Some(pick(r, a)?.distance_inf(&pick(r, b)?)))
            .reduce(f64::max)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("k,t,x_nsfd,y_nsfd,x_euler,y_euler,x_rk4,y_rk4\n");
        for row in &self.rows {
            let _ = write!(out, "{},{:?}", row.k, row.t);
            for s in [row.nsfd, row.euler, row.rk4] {
                match s {
                    Some(s) => {
                        let _ = write!(out, ",{:?},{:?}", s.x, s.y);
                    }
                    None => out.push_str(",,"),
                }
            }
            out.push('\n');
        }
        out
    }
}

struct Track<'a> {
    step: Box<dyn Fn(f64, f64) -> Result<(f64, f64)> + 'a>,
    current: Option<(f64, f64)>,
    summary: MethodSummary,
}

impl Track<'_> {
    fn record(&mut self, k: usize) -> Option<PopulationState> {
        let (x, y) = self.current?;
        if self.summary.first_negative.is_none() && (x < 0.0 || y < 0.0) {
            self.summary.first_negative = Some(k);
        }
        Some(PopulationState { x, y })
    }

    fn advance(&mut self, k: usize) {
        if let Some((x, y)) = self.current {
            match (self.step)(x, y) {
                Ok(next) => self.current = Some(next),
                Err(_) => {
                    self.summary.failed_at = Some(k);
                    self.current = None;
                }
            }
        }
    }
}

/// Runs the nonstandard map, Euler and RK4 from the same start with the same
/// step. Failures of one method do not stop the others.
pub fn compare_trajectories<R: VitalRates>(
    model: &PreyPredatorModel<R>,
    scheme: SchemeParams,
    denominator: Denominator,
    state0: PopulationState,
    h: f64,
    n: usize,
) -> Result<Comparison> {
    if !(h > 0.0 && h.is_finite()) {
        return Err(Error::InvalidParameter(format!("step size must be positive, got {h}")));
    }
    let methods = [
        Method::Nsfd {
            scheme,
            denominator,
        },
        Method::Euler,
        Method::Rk4,
    ];
    let mut tracks = Vec::with_capacity(3);
    for m in methods {
        tracks.push(Track {
            step: m.stepper(model, h)?,
            current: Some((state0.x, state0.y)),
            summary: MethodSummary {
                method: m.name(),
                first_negative: None,
                failed_at: None,
                final_state: None,
            },
        });
    }

    let mut rows = Vec::with_capacity(n + 1);
    for k in 0..=n {
        let states: Vec<_> = tracks.iter_mut().map(|t| t.record(k)).collect();
        rows.push(ComparisonRow {
            k,
            t: k as f64 * h,
            nsfd: states[0],
            euler: states[1],
            rk4: states[2],
        });
        if k < n {
            for t in tracks.iter_mut() {
                t.advance(k);
            }
        }
    }

    let mut summaries = tracks.into_iter().map(|t| {
        let mut s = t.summary;
        s.final_state = t.current.map(|(x, y)| PopulationState { x, y });
        s
    });
    let (nsfd, euler, rk4) = (
        summaries.next().unwrap(),
        summaries.next().unwrap(),
        summaries.next().unwrap(),
    );
    Ok(Comparison {
        h,
        rows,
        nsfd,
        euler,
        rk4,
    })
}

/// Smallest `h` in the doubling sequence `h0, 2 h0, ...` (up to `h_max`) for
/// which `method` produces a negative component or fails within `n` steps.
pub fn find_positivity_threshold<R: VitalRates>(
    method: Method,
    model: &PreyPredatorModel<R>,
    state0: PopulationState,
    h0: f64,
    h_max: f64,
    n: usize,
) -> Result<Option<f64>> {
    if !(h0 > 0.0 && h0 <= h_max) {
        return Err(Error::InvalidParameter(format!(
            "need 0 < h0 <= h_max, got {h0}, {h_max}"
        )));
    }
    let mut h = h0;
    while h <= h_max {
        let step = method.stepper(model, h)?;
        let (mut x, mut y) = (state0.x, state0.y);
        for _ in 0..n {
            match step(x, y) {
                Ok(next) => (x, y) = next,
                Err(_) => return Ok(Some(h)),
            }
            if x < 0.0 || y < 0.0 {
                return Ok(Some(h));
            }
        }
        h *= 2.0;
    }
    Ok(None)
}

#[derive(Debug, Clone, PartialEq)]
pub struct OrderEstimate {
    pub method: &'static str,
    /// `(h, max-norm error at t_end)` in ascending `h`.
    pub errors: Vec<(f64, f64)>,
    /// Least-squares slope of `log error` against `log h`.
    pub order: f64,
    pub reference: PopulationState,
}

/// Steps needed to reach `t_end` with step `h`, if `h` divides it.
fn steps_for(t_end: f64, h: f64) -> Option<usize> {
    let n = (t_end / h).round();
    (n >= 1.0 && ((n * h - t_end).abs() <= 1e-9 * t_end)).then_some(n as usize)
}

/// Empirical convergence order against an RK4 reference with step
/// `min(h_list) / 100`.
pub fn estimate_order<R: VitalRates>(
    method: Method,
    model: &PreyPredatorModel<R>,
    state0: PopulationState,
    t_end: f64,
    h_list: &[f64],
) -> Result<OrderEstimate> {
    if !(t_end > 0.0 && t_end.is_finite()) {
        return Err(Error::InvalidStepList(format!("t_end must be positive, got {t_end}")));
    }
    let mut hs: Vec<f64> = h_list.to_vec();
    if hs.iter().any(|h| !(*h > 0.0 && h.is_finite())) {
        return Err(Error::InvalidStepList("step sizes must be positive".into()));
    }
    hs.sort_by(f64::total_cmp);
    hs.dedup();
    if hs.len() < 3 {
        return Err(Error::InvalidStepList(format!(
            "need at least 3 distinct step sizes, got {}",
            hs.len()
        )));
    }
    let mut steps = Vec::with_capacity(hs.len());
    for &h in &hs {
        match steps_for(t_end, h) {
            Some(n) => steps.push(n),
            None => {
                return Err(Error::InvalidStepList(format!(
                    "h = {h} does not divide t_end = {t_end}"
                )))
            }
        }
    }

    let h_ref = hs[0] / 100.0;
    let n_ref = steps[0] * 100;
    let reference = Method::Rk4
        .advance(model, state0, h_ref, n_ref)
        .map_err(|_| Error::ReferenceUnstable { t: t_end })?;
    if !reference.in_omega() {
        return Err(Error::ReferenceUnstable { t: t_end });
    }

    let mut errors = Vec::with_capacity(hs.len());
    for (&h, &n) in hs.iter().zip(&steps) {
        let end = method.advance(model, state0, h, n)?;
        errors.push((h, end.distance_inf(&reference)));
    }

    let order = log_log_slope(&errors)?;
    Ok(OrderEstimate {
        method: method.name(),
        errors,
        order,
        reference,
    })
}

fn log_log_slope(points: &[(f64, f64)]) -> Result<f64> {
    if points.iter().any(|&(_, e)| !(e > 0.0)) {
        return Err(Error::InvalidStepList(
            "an error is zero or not finite; the order is undefined".into(),
        ));
    }
    let n = points.len() as f64;
    let (lx, ly): (Vec<f64>, Vec<f64>) = points.iter().map(|&(h, e)| (h.ln(), e.ln())).unzip();
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxy: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = lx.iter().map(|a| (a - mx).powi(2)).sum();
    Ok(sxy / sxx)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::equilibria::enumerate_equilibria;
    use crate::model::REFERENCE_CASES;

    fn case_v() -> PreyPredatorModel {
        PreyPredatorModel::reference(0.3, 0.501).unwrap()
    }

    const START: PopulationState = PopulationState { x: 10.0, y: 10.0 };

    #[test]
    fn rk4_richardson_ratio() {
        let model = case_v();
        let t_end = 1.0;
        let reference = Method::Rk4.advance(&model, START, 1e-4, 10_000).unwrap();
        let err = |h: f64| {
            let n = (t_end / h).round() as usize;
            Method::Rk4
                .advance(&model, START, h, n)
                .unwrap()
                .distance_inf(&reference)
        };
        let ratio = err(0.1) / err(0.05);
        assert!((ratio - 16.0).abs() <= 0.2 * 16.0, "ratio {ratio}");
    }

    #[test]
    fn euler_and_nsfd_agree_to_second_order_per_step() {
        let model = case_v();
        let map = DiscreteMap::with_defaults(&model, 1.0).unwrap();
        let z = PopulationState { x: 12.0, y: 4.0 };
        let mut prev = f64::INFINITY;
        for h in [1e-1, 1e-2, 1e-3] {
            let map = DiscreteMap::new(&model, *map.scheme(), Denominator::Linear, h).unwrap();
            let a = map.step(z).unwrap();
            let (ex, ey) = euler_step(&model, z.x, z.y, h).unwrap();
            let gap = a.distance_inf(&PopulationState { x: ex, y: ey });
            assert!(gap / (h * h) < 50.0, "h = {h}, gap {gap}");
            assert!(gap < prev / 50.0 || prev.is_infinite());
            prev = gap;
        }
    }

    #[test]
    fn equilibria_fixed_under_all_methods() {
        for &(_, m1, m2) in REFERENCE_CASES.iter() {
            let model = PreyPredatorModel::reference(m1, m2).unwrap();
            for e in enumerate_equilibria(&model).unwrap() {
                for m in [Method::NSFD_DEFAULT, Method::Euler, Method::Rk4] {
                    let end = m.advance(&model, e.location, 0.5, 1).unwrap();
                    assert!(
                        end.distance_inf(&e.location) <= 1e-12 * (1.0 + e.location.max_norm()),
                        "{} at {:?}",
                        m.name(),
                        e.kind
                    );
                }
            }
        }
    }

    #[test]
    fn small_step_comparison_agrees() {
        let model = case_v();
        let cmp =
            compare_trajectories(&model, SchemeParams::DEFAULT, Denominator::Linear, START, 1e-3, 1000)
                .unwrap();
        assert_eq!(cmp.rows.len(), 1001);
        assert!(cmp.summaries().iter().all(|s| s.stays_nonnegative()));
        let d = cmp.max_divergence("nsfd", "rk4").unwrap();
        assert!(d < 1e-2, "{d}");
        assert!(cmp.max_divergence("euler", "rk4").unwrap() < 1e-2);
        let csv = cmp.to_csv();
        assert!(csv.starts_with("k,t,x_nsfd,y_nsfd,x_euler,y_euler,x_rk4,y_rk4\n"));
        assert_eq!(csv.lines().count(), 1002);

        let empty =
            compare_trajectories(&model, SchemeParams::DEFAULT, Denominator::Linear, START, 1.0, 0)
                .unwrap();
        assert_eq!(empty.rows.len(), 1);
        let row = empty.rows[0];
        assert!([row.nsfd, row.euler, row.rk4].iter().all(|s| *s == Some(START)));
    }

    #[test]
    fn euler_loses_positivity_at_large_steps() {
        let model = PreyPredatorModel::reference(1.53, 0.622).unwrap();
        let h = find_positivity_threshold(Method::Euler, &model, START, 1.0 / 64.0, 1e3, 1000)
            .unwrap()
            .expect("Euler should fail somewhere");
        assert!(h <= 100.0);
        let cmp =
            compare_trajectories(&model, SchemeParams::DEFAULT, Denominator::Linear, START, h, 1000)
                .unwrap();
        assert!(!cmp.euler.stays_nonnegative());
        assert!(cmp.nsfd.stays_nonnegative());
        assert_eq!(
            find_positivity_threshold(Method::NSFD_DEFAULT, &model, START, 1.0 / 64.0, 1e3, 1000)
                .unwrap(),
            None
        );
    }

    #[test]
    fn overflow_is_reported() {
        let model = case_v();
        assert!(matches!(
            euler_step(&model, 1e300, 1e300, 1e10),
            Err(Error::NonFiniteValue { .. })
        ));
    }

    #[test]
    fn order_input_validation() {
        let model = case_v();
        let m = Method::Euler;
        assert!(matches!(
            estimate_order(m, &model, START, 1.0, &[0.1, 0.05]),
            Err(Error::InvalidStepList(_))
        ));
        assert!(matches!(
            estimate_order(m, &model, START, 1.0, &[0.3, 0.1, 0.05]),
            Err(Error::InvalidStepList(_))
        ));
    }

    #[test]
    fn order_independent_of_list_order() {
        let model = case_v();
        let a = estimate_order(Method::Euler, &model, START, 1.0, &[0.1, 0.05, 0.025]).unwrap();
        let b = estimate_order(Method::Euler, &model, START, 1.0, &[0.025, 0.1, 0.05]).unwrap();
        assert_eq!(a, b);
        assert!((a.order - 1.0).abs() < 0.3, "order {}", a.order);
    }

    #[test]
    fn slope_of_exact_power_law() {
        let pts: Vec<_> = [0.1, 0.2, 0.4].iter().map(|&h: &f64| (h, 3.0 * h.powi(2))).collect();
        assert!((log_log_slope(&pts).unwrap() - 2.0).abs() < 1e-12);
    }
}
