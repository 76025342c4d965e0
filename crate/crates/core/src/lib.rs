//! Solver and certificate checker for Mayer problems constrained by a
//! higher order differential inclusion x^(kappa)(t) in F(x, x', ..., x^(kappa-1))
//! on [0, 1], with set constraints on the initial derivatives and a piecewise
//! affine terminal cost.
//!
//! The crate is organized bottom up:
//!
//! * [`numerics`]: dense matrices, a two-phase revised simplex, and an
//!   independent vertex-enumeration LP solver used to cross-check the simplex.
//! * [`convex`]: polytopes, support functions, piecewise-max-affine functions
//!   and their conjugates, subdifferential and dual-cone membership tests.
//! * [`dfi`]: the two inclusion-map families (semilinear, polyhedral graph),
//!   Hamiltonians, locally adjoint map tests, and the infimal convolution
//!   value that appears in the dual objective.
//! * [`transcription`]: uniform-grid discretizations of the primal and dual
//!   problems into linear programs, objective evaluators, and recovery of a
//!   dual trajectory from primal multipliers.
//! * [`certify`]: residual checks for the sufficient optimality conditions
//!   (adjoint inclusion, transversality at both ends, the pointwise maximum
//!   condition, complementarity) bundled into a certificate report.

pub mod certify;
pub mod convex;
pub mod dfi;
#[cfg(test)]
pub(crate) mod fixtures;
pub mod numerics;
pub mod transcription;
