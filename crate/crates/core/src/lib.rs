//! Ensemble controllability of control-affine systems on the torus driven by
//! trigonometric vector fields.
//!
//! The core types are generic over the coefficient scalar: exact rationals
//! for Lie algebra computations and `f32`/`f64` for simulation and planning.

pub mod closure;
pub mod dynamics;
pub mod ensemble;
pub mod error;
pub mod io;
pub mod lattice;
pub mod linalg;
pub mod planner;
pub mod scalar;
pub mod trigfield;

pub use closure::{ClosureDescriptor, ClosureKind, ModeSpanTable};
pub use dynamics::{ControlSignal, Segment, Trajectory};
pub use ensemble::EnsembleState;
pub use error::{Error, Result};
pub use lattice::{LatticeSubgroup, Mode};
pub use planner::{PlanOptions, PlanProblem, PlanResult};
pub use scalar::{Rational, Real, Scalar};
pub use trigfield::{CoeffPair, StreamFunction, TrigField, TrigPoly};

/// Field with exact rational coefficients.
pub type ExactField = TrigField<Rational>;
/// Field with double precision coefficients.
pub type FloatField = TrigField<f64>;
/// Exact stream function on `T^2`.
pub type ExactStream = TrigPoly<Rational>;
