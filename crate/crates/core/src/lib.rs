//! Numerical solution of the truncated first-kind Volterra convolution
//! equation
//!
//! ```text
//! ∫_0^t K_N(t - s) φ(s) ds = y(t),   K_N(λ) = Σ_{q=1}^{N} (-1)^{q+1} q² exp(-π² q² λ)
//! ```
//!
//! that arises from the inverse boundary heat-conduction problem.
//!
//! * [`sigdec`] — fixed-length decimal arithmetic that tracks valid
//!   significand digits, used to study cancellation inside `K_N`.
//! * [`kernel`] — evaluation of `K_N`, traced evaluation, roots and the
//!   admissible mesh step.
//! * [`forward`] — the reference solution, its exact right-hand side, mesh
//!   sampling and saw-tooth data noise.
//! * [`solver`] — midpoint and product-integration difference schemes,
//!   error norms and convergence orders.
//! * [`lab`] — experiment drivers behind the `volterra` CLI, emitting CSV.

pub mod forward;
pub mod kernel;
pub mod lab;
pub mod sigdec;
pub mod solver;

pub use forward::{Mesh, ReferenceSolution, RhsSamples, TestProblem};
pub use kernel::{KernelSpec, StepBound};
pub use sigdec::{ShadowContext, SigDecimal};
pub use solver::{ErrorRecord, MeshSolution, Scheme, WeightSequence};
