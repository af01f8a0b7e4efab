//! Local stability of fixed points of the discrete map.
//!
//! The Jacobian is taken by finite differences; for a 2x2 matrix the Jury
//! conditions `det < 1`, `1 - tr + det > 0`, `1 + tr + det > 0` are
//! equivalent to both eigenvalues lying strictly inside the unit circle.

pub mod lyapunov;

use std::fmt;

use num_complex::Complex64;

use crate::equilibria::ContinuousVerdict;
use crate::error::{Error, Result};
use crate::model::{PopulationState, VitalRates};
use crate::scheme::DiscreteMap;

pub use lyapunov::{
    select_lyapunov_params, verify_lyapunov_decrease, verify_lyapunov_until, LyapunovParams,
    LyapunovReport,
};

/// Relative finite-difference step.
pub const FD_STEP: f64 = 1e-6;
/// Residual above which a point is not accepted as a fixed point.
pub const FIXED_POINT_TOL: f64 = 1e-8;
/// Eigenvalue moduli within this band of 1 are reported as non-hyperbolic.
pub const UNIT_CIRCLE_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Jacobian2 {
    pub j11: f64,
    pub j12: f64,
    pub j21: f64,
    pub j22: f64,
}

impl Jacobian2 {
    pub const IDENTITY: Jacobian2 = Jacobian2 {
        j11: 1.0,
        j12: 0.0,
        j21: 0.0,
        j22: 1.0,
    };

    pub fn new(j11: f64, j12: f64, j21: f64, j22: f64) -> Self {
        Self { j11, j12, j21, j22 }
    }

    pub fn trace(&self) -> f64 {
        self.j11 + self.j22
    }

    pub fn det(&self) -> f64 {
        self.j11 * self.j22 - self.j12 * self.j21
    }

    pub fn entries(&self) -> [f64; 4] {
        [self.j11, self.j12, self.j21, self.j22]
    }

    pub fn max_abs_diff(&self, other: &Jacobian2) -> f64 {
        self.entries()
            .iter()
            .zip(other.entries())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

/// Roots of `l^2 - tr l + det = 0`, real roots ordered by the stable
/// quadratic formula, complex roots as a conjugate pair.
pub fn eigenvalues_2x2(jac: &Jacobian2) -> [Complex64; 2] {
    let tr = jac.trace();
    let det = jac.det();
    let disc = tr * tr - 4.0 * det;
    if disc >= 0.0 {
        let sq = disc.sqrt();
        // q = (tr + sign(tr) sqrt(disc)) / 2 avoids cancellation.
        let q = 0.5 * (tr + if tr >= 0.0 { sq } else { -sq });
        if q == 0.0 {
            return [Complex64::new(0.0, 0.0); 2];
        }
        [Complex64::new(q, 0.0), Complex64::new(det / q, 0.0)]
    } else {
        let im = 0.5 * (-disc).sqrt();
        [
            Complex64::new(0.5 * tr, im),
            Complex64::new(0.5 * tr, -im),
        ]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct JuryVerdict {
    pub det_lt_1: bool,
    pub one_minus_tr_plus_det_pos: bool,
    pub one_plus_tr_plus_det_pos: bool,
    pub stable: bool,
    pub unstable: bool,
    pub inconclusive: bool,
}

pub fn jury_test(jac: &Jacobian2) -> JuryVerdict {
    let tr = jac.trace();
    let det = jac.det();
    let a = 1.0 - tr + det;
    let b = 1.0 + tr + det;
    let det_lt_1 = det < 1.0;
    let one_minus_tr_plus_det_pos = a > 0.0;
    let one_plus_tr_plus_det_pos = b > 0.0;
    let stable = det_lt_1 && one_minus_tr_plus_det_pos && one_plus_tr_plus_det_pos;
    let unstable = det > 1.0 || a < 0.0 || b < 0.0;
    JuryVerdict {
        det_lt_1,
        one_minus_tr_plus_det_pos,
        one_plus_tr_plus_det_pos,
        stable,
        unstable,
        inconclusive: !stable && !unstable,
    }
}

/// Jacobian of the map at `point` by finite differences with step
/// `FD_STEP * max(1, |coordinate|)`: central in the interior, a second-order
/// one-sided stencil pointing into the quadrant when the coordinate is
/// within one step of its axis.
///
/// The map increment `(F - x, G - y)` is differenced rather than `(F, G)`
/// themselves, and the identity added back.
pub fn discrete_jacobian<R: VitalRates>(
    map: &DiscreteMap<'_, R>,
    point: PopulationState,
) -> Result<Jacobian2> {
    let PopulationState { x, y } = point;
    let inc = |x: f64, y: f64| map.increment(x, y);

    let partial = |along_x: bool| -> Result<(f64, f64)> {
        let coord = if along_x { x } else { y };
        let d = FD_STEP * coord.abs().max(1.0);
        let at = |t: f64| {
            if along_x {
                inc(x + t, y)
            } else {
                inc(x, y + t)
            }
        };
        if coord >= d {
            let (p, m) = (at(d)?, at(-d)?);
            Ok(((p.0 - m.0) / (2.0 * d), (p.1 - m.1) / (2.0 * d)))
        } else {
            let (f0, f1, f2) = (at(0.0)?, at(d)?, at(2.0 * d)?);
            let stencil = |a: f64, b: f64, c: f64| (-3.0 * a + 4.0 * b - c) / (2.0 * d);
            Ok((stencil(f0.0, f1.0, f2.0), stencil(f0.1, f1.1, f2.1)))
        }
    };

    let (dfx, dgx) = partial(true)?;
    let (dfy, dgy) = partial(false)?;
    Ok(Jacobian2 {
        j11: 1.0 + dfx,
        j12: dfy,
        j21: dgx,
        j22: 1.0 + dgy,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DiscreteStability {
    Stable,
    Unstable,
    NonHyperbolic,
    Inconclusive,
}

impl fmt::Display for DiscreteStability {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            DiscreteStability::Stable => "stable",
            DiscreteStability::Unstable => "unstable",
            DiscreteStability::NonHyperbolic => "non_hyperbolic",
            DiscreteStability::Inconclusive => "inconclusive",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiscreteVerdict {
    pub jacobian: Jacobian2,
    pub jury: JuryVerdict,
    pub eigenvalues: [Complex64; 2],
    pub moduli: [f64; 2],
    pub stability: DiscreteStability,
}

impl DiscreteVerdict {
    pub fn max_modulus(&self) -> f64 {
        self.moduli[0].max(self.moduli[1])
    }

    /// Whether the discrete verdict reproduces the continuous one: stable
    /// with stable, unstable with unstable, non-hyperbolic with
    /// non-hyperbolic.
    pub fn agrees_with(&self, continuous: &ContinuousVerdict) -> bool {
        match (self.stability, continuous) {
            (DiscreteStability::NonHyperbolic, ContinuousVerdict::NonHyperbolic { .. }) => true,
            (DiscreteStability::Stable, c) => c.is_hyperbolic() && c.is_stable(),
            (DiscreteStability::Unstable, ContinuousVerdict::Unstable) => true,
            _ => false,
        }
    }
}

/// Jury test and eigenvalue moduli at a fixed point of the map.
pub fn classify_discrete<R: VitalRates>(
    map: &DiscreteMap<'_, R>,
    location: PopulationState,
) -> Result<DiscreteVerdict> {
    let next = map.step(location)?;
    let residual = next.distance_inf(&location);
    if !(residual <= FIXED_POINT_TOL) {
        return Err(Error::NotAFixedPoint {
            x: location.x,
            y: location.y,
            residual,
        });
    }
    let jacobian = discrete_jacobian(map, location)?;
    let jury = jury_test(&jacobian);
    let eigenvalues = eigenvalues_2x2(&jacobian);
    let moduli = [eigenvalues[0].norm(), eigenvalues[1].norm()];
    let stability = if moduli.iter().any(|m| (m - 1.0).abs() <= UNIT_CIRCLE_TOL) {
        DiscreteStability::NonHyperbolic
    } else if jury.stable {
        DiscreteStability::Stable
    } else if jury.unstable {
        DiscreteStability::Unstable
    } else {
        DiscreteStability::Inconclusive
    };
    Ok(DiscreteVerdict {
        jacobian,
        jury,
        eigenvalues,
        moduli,
        stability,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::equilibria::{enumerate_equilibria, find_k};
    use crate::model::PreyPredatorModel;
    use crate::scheme::SchemeParams;
    use proptest::prelude::*;

    fn case(m1: f64, m2: f64) -> PreyPredatorModel {
        PreyPredatorModel::reference(m1, m2).unwrap()
    }

    fn rel(a: f64, b: f64) -> f64 {
        if a == b {
            0.0
        } else {
            (a - b).abs() / b.abs()
        }
    }

    #[test]
    fn trace_and_determinant() {
        let j = Jacobian2::new(1.0, 2.0, 3.0, 4.0);
        assert_eq!(j.trace(), 5.0);
        assert_eq!(j.det(), -2.0);
    }

    #[test]
    fn eigenvalues_of_simple_matrices() {
        let id = eigenvalues_2x2(&Jacobian2::IDENTITY);
        assert_eq!(id, [Complex64::new(1.0, 0.0); 2]);

        let mut d = eigenvalues_2x2(&Jacobian2::new(0.3, 0.0, 0.0, -2.0)).map(|z| z.re);
        d.sort_by(f64::total_cmp);
        assert!((d[0] + 2.0).abs() < 1e-15 && (d[1] - 0.3).abs() < 1e-15);

        let rot = eigenvalues_2x2(&Jacobian2::new(0.0, -1.0, 1.0, 0.0));
        assert_eq!(rot[0], Complex64::new(0.0, 1.0));
        assert_eq!(rot[1], Complex64::new(0.0, -1.0));
        assert!(rot.iter().all(|z| (z.norm() - 1.0).abs() < 1e-15));

        assert_eq!(
            eigenvalues_2x2(&Jacobian2::new(0.0, 0.0, 0.0, 0.0)),
            [Complex64::new(0.0, 0.0); 2]
        );
    }

    #[test]
    fn jury_examples() {
        let zero = jury_test(&Jacobian2::new(0.0, 0.0, 0.0, 0.0));
        assert!(zero.stable && !zero.unstable && !zero.inconclusive);

        let v = jury_test(&Jacobian2::new(2.0, 0.0, 0.0, 0.0));
        assert!(v.unstable && !v.one_minus_tr_plus_det_pos);

        // det = 1, tr = 0: rotation by 90 degrees
        let v = jury_test(&Jacobian2::new(0.0, -1.0, 1.0, 0.0));
        assert!(v.inconclusive && !v.stable && !v.unstable);
    }

    #[test]
    fn extinction_point_closed_form() {
        let model = case(1.53, 0.622);
        let map = DiscreteMap::with_defaults(&model, 10.0).unwrap();
        let j = discrete_jacobian(&map, PopulationState::ORIGIN).unwrap();
        let p = 10.0;
        let l1 = (1.0 + p * 2.0 * 1.5 + p * 1.53) / (1.0 + p * 1.5 + p * 1.53 * 2.0);
        let l2 = (1.0 + p * 2.0 * 0.5 + p * 0.622) / (1.0 + p * 0.5 + p * 0.622 * 2.0);
        assert!(rel(j.j11, l1) <= 1e-5);
        assert!(rel(j.j22, l2) <= 1e-5);
        assert_eq!(j.j12, 0.0);
        assert_eq!(j.j21, 0.0);

        let v = classify_discrete(&map, PopulationState::ORIGIN).unwrap();
        assert_eq!(v.stability, DiscreteStability::Stable);
        assert!(v.moduli.iter().all(|&m| m < 1.0));
    }

    #[test]
    fn extinction_point_non_hyperbolic_at_threshold() {
        let model = case(1.5, 0.7);
        for h in [0.1, 1.0, 10.0, 100.0] {
            let map = DiscreteMap::with_defaults(&model, h).unwrap();
            let v = classify_discrete(&map, PopulationState::ORIGIN).unwrap();
            assert_eq!(v.stability, DiscreteStability::NonHyperbolic, "h = {h}");
            let eq = &enumerate_equilibria(&model).unwrap()[0];
            assert!(v.agrees_with(&eq.continuous_verdict));
        }
    }

    #[test]
    fn predator_extinction_point_closed_form() {
        let model = case(1.38, 0.622);
        let k = find_k(&model).unwrap().unwrap();
        let r = model.rates();
        for h in [0.1, 1.0, 10.0, 100.0] {
            let map = DiscreteMap::with_defaults(&model, h).unwrap();
            let j = discrete_jacobian(&map, PopulationState { x: k, y: 0.0 }).unwrap();
            let u = 1.0 + h * r.r(k) + 2.0 * h * 1.38;
            let ckphi = 0.003 * k * r.phi(k);
            let v = 1.0 + h * 0.5 + 3.0 * h * ckphi + 2.0 * h * 0.622;
            assert_eq!(j.j21, 0.0);
            assert!(rel(j.j11, 1.0 + h * k * r.r_prime(k) / u) <= 1e-5);
            assert!(rel(j.j12, -h * k * r.phi(k) / u) <= 1e-5);
            assert!(rel(j.j22, 1.0 + h * (0.5 - 0.622 + ckphi) / v) <= 1e-5);

            let verdict = classify_discrete(&map, PopulationState { x: k, y: 0.0 }).unwrap();
            assert_eq!(verdict.stability, DiscreteStability::Stable, "h = {h}");
        }
    }

    #[test]
    fn jacobian_tends_to_identity_as_step_vanishes() {
        let model = case(0.3, 0.501);
        let z = PopulationState { x: 12.0, y: 7.0 };
        let mut last = f64::INFINITY;
        for h in [1e-2, 1e-3, 1e-4] {
            let map = DiscreteMap::with_defaults(&model, h).unwrap();
            let dev = discrete_jacobian(&map, z).unwrap().max_abs_diff(&Jacobian2::IDENTITY);
            assert!(dev <= 2.0 * h, "h = {h}, deviation {dev}");
            assert!(dev < last);
            last = dev;
        }
    }

    #[test]
    fn not_a_fixed_point() {
        let model = case(1.53, 0.622);
        let map = DiscreteMap::with_defaults(&model, 1.0).unwrap();
        assert!(matches!(
            classify_discrete(&map, PopulationState { x: 1.0, y: 1.0 }),
            Err(Error::NotAFixedPoint { .. })
        ));
    }

    #[test]
    fn discrete_verdicts_match_continuous_for_reference_cases() {
        for &(_, m1, m2) in crate::model::REFERENCE_CASES.iter() {
            let model = case(m1, m2);
            for e in enumerate_equilibria(&model).unwrap() {
                for h in [0.1, 1.0, 10.0, 100.0] {
                    let map = DiscreteMap::new(
                        &model,
                        SchemeParams::DEFAULT,
                        crate::scheme::Denominator::Linear,
                        h,
                    )
                    .unwrap();
                    let v = classify_discrete(&map, e.location).unwrap();
                    assert!(
                        v.agrees_with(&e.continuous_verdict),
                        "({m1}, {m2}) {:?} h={h}: {:?} vs {}",
                        e.kind,
                        v.stability,
                        e.continuous_verdict
                    );
                }
            }
        }
    }

    fn entry() -> impl Strategy<Value = f64> {
        -2.0f64..2.0
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(1000))]

        #[test]
        fn jury_agrees_with_eigenvalues(a in entry(), b in entry(), c in entry(), d in entry()) {
            let j = Jacobian2::new(a, b, c, d);
            let verdict = jury_test(&j);
            let max_mod = eigenvalues_2x2(&j).iter().map(|z| z.norm()).fold(0.0, f64::max);
            if max_mod < 1.0 - 1e-12 {
                prop_assert!(verdict.stable);
            }
            if verdict.stable {
                prop_assert!(max_mod < 1.0 + 1e-12);
            }
            if max_mod > 1.0 + 1e-12 {
                prop_assert!(verdict.unstable);
            }
        }

        #[test]
        fn eigenvalues_reproduce_trace_and_determinant(a in entry(), b in entry(), c in entry(), d in entry()) {
            let j = Jacobian2::new(a, b, c, d);
            let [l1, l2] = eigenvalues_2x2(&j);
            prop_assert!(((l1 + l2).re - j.trace()).abs() <= 1e-12);
            prop_assert!(((l1 * l2).re - j.det()).abs() <= 1e-12);
        }
    }
}
