//! Nonstandard finite difference (NSFD) schemes for a predator-prey system
//! with general recruitment and functional response.
//!
//! The crate is organised bottom-up:
//!
//! - [`model`]: the continuous system, its vital rates and admissibility checks;
//! - [`equilibria`]: the four equilibrium kinds and their continuous stability;
//! - [`scheme`]: the explicit NSFD map, trajectories and the sufficient
//!   conditions for dynamic consistency;
//! - [`stability`]: Jacobians, eigenvalues and the Jury test for the map, and
//!   the Lyapunov certificate for the extinction point;
//! - [`integrators`]: explicit Euler and RK4 comparators and order estimation.

pub mod equilibria;
pub mod error;
pub mod integrators;
pub mod model;
pub mod scheme;
pub mod stability;

pub use equilibria::{
    classify_continuous, enumerate_equilibria, find_interior, find_k, find_m, ContinuousVerdict,
    Equilibrium, EquilibriumKind,
};
pub use error::{Error, Result};
pub use model::{
    MortalityParams, PopulationState, PreyPredatorModel, RationalVitalRates, VitalRates,
};
pub use scheme::{consistency_report, ConditionReport, Denominator, DiscreteMap, SchemeParams, Trajectory};
pub use stability::{
    classify_discrete, discrete_jacobian, eigenvalues_2x2, jury_test, select_lyapunov_params,
    DiscreteStability, DiscreteVerdict, Jacobian2, JuryVerdict, LyapunovParams,
};
pub use integrators::{compare_trajectories, estimate_order, Method};
