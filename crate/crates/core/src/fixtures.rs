//! Hand-checked problem instances shared by the unit tests.

use crate::convex::{PiecewiseMaxAffine, Polytope};
use crate::dfi::{InclusionMap, MayerProblem, PolyhedralMap2, SemilinearMap};
use crate::numerics::Matrix;

pub(crate) fn mat(rows: &[&[f64]]) -> Matrix {
    let owned: Vec<Vec<f64>> = rows.iter().map(|r| r.to_vec()).collect();
    Matrix::from_rows(&owned)
}

/// First-order integrator: x' = u with u in [-1, 1], x(0) = 1, and endpoint
/// cost sign * x(1). With sign = +1 the optimum rides u = -1 into x(1) = 0
/// and the value is 0; the adjoint is identically -1.
pub(crate) fn integrator(sign: f64) -> MayerProblem {
    let f = SemilinearMap::new(
        vec![mat(&[&[0.0]])],
        mat(&[&[1.0]]),
        Polytope::from_bounds(&[-1.0], &[1.0]).unwrap(),
    )
    .unwrap();
    let q0 = Polytope::singleton(&[1.0]).unwrap();
    let phi = PiecewiseMaxAffine::affine(vec![sign], 0.0);
    MayerProblem::new(InclusionMap::Semilinear(f), vec![q0], phi).unwrap()
}

/// Second-order integrator through graph rows: x'' in [-1, 1] encoded as
/// -Cv <= d with C = (-1, 1)^T, x(0) = x'(0) = 0, endpoint cost x(1). The
/// discrete optimum is -(N-1)/(2N); the graph multipliers are (0, 1 - t_k).
pub(crate) fn double_integrator() -> MayerProblem {
    let f = PolyhedralMap2::new(
        mat(&[&[0.0], &[0.0]]),
        mat(&[&[0.0], &[0.0]]),
        mat(&[&[-1.0], &[1.0]]),
        vec![1.0, 1.0],
        (&[0.0], &[0.0]),
    )
    .unwrap();
    let q = Polytope::singleton(&[0.0]).unwrap();
    let phi = PiecewiseMaxAffine::affine(vec![1.0, 0.0], 0.0);
    MayerProblem::new(InclusionMap::Polyhedral2(f), vec![q.clone(), q], phi).unwrap()
}

/// Mildly coupled third-order instance with a two-piece endpoint cost;
/// bounded and feasible, with no closed-form value. Exercises the lead-in
/// nodes and both auxiliary chain tracks.
pub(crate) fn third_order() -> MayerProblem {
    let f = SemilinearMap::new(
        vec![mat(&[&[0.3]]), mat(&[&[-0.2]]), mat(&[&[0.1]])],
        mat(&[&[1.0]]),
        Polytope::from_bounds(&[-1.0], &[1.0]).unwrap(),
    )
    .unwrap();
    let q0 = Polytope::singleton(&[0.5]).unwrap();
    let q1 = Polytope::from_bounds(&[-0.1], &[0.1]).unwrap();
    let q2 = Polytope::singleton(&[0.0]).unwrap();
    let phi = PiecewiseMaxAffine::new(vec![
        (vec![1.0, 0.5, -0.2], 0.0),
        (vec![-1.0, 0.0, 1.0], -0.3),
    ])
    .unwrap();
    MayerProblem::new(InclusionMap::Semilinear(f), vec![q0, q1, q2], phi).unwrap()
}
