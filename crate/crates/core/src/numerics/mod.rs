//! Dense linear algebra and deterministic linear programming.
//!
//! Two independent LP routes live here: [`solve_lp`] is a two-phase revised
//! simplex, and [`solve_lp_by_enumeration`] answers the same question by
//! brute-force vertex enumeration. The second exists purely to cross-check
//! the first and shares none of its pivoting machinery.
//!
//! Sign convention, stated once and adopted everywhere: a minimization with
//! rows `G x <= h` and `E x = f` uses the Lagrangian
//! `cost . x + y . (G x - h) + w . (E x - f)` with `y >= 0`, so at an optimum
//! `cost + G^T y + E^T w = 0` and the dual objective is `-(h . y + f . w)`.

mod enumeration;
mod matrix;
mod simplex;

pub use enumeration::{enumerate_vertices, solve_lp_by_enumeration};
pub use matrix::{
    dot, invert, lu_factor, norm_inf, reduce_system, row_space_basis, LinearSystem, Lu, Matrix,
};

use std::fmt;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Sense {
    Min,
    Max,
}

/// `min/max cost.x` subject to `ineq x <= ineq_rhs` and `eq x = eq_rhs`.
/// Immutable after construction; shape is validated on every solve.
#[derive(Clone, Debug)]
pub struct LpProblem {
    pub sense: Sense,
    pub cost: Vec<f64>,
    pub ineq: Matrix,
    pub ineq_rhs: Vec<f64>,
    pub eq: Matrix,
    pub eq_rhs: Vec<f64>,
}

impl LpProblem {
    pub fn minimize(
        cost: Vec<f64>,
        ineq: Matrix,
        ineq_rhs: Vec<f64>,
        eq: Matrix,
        eq_rhs: Vec<f64>,
    ) -> Self {
        LpProblem { sense: Sense::Min, cost, ineq, ineq_rhs, eq, eq_rhs }
    }

    pub fn maximize(
        cost: Vec<f64>,
        ineq: Matrix,
        ineq_rhs: Vec<f64>,
        eq: Matrix,
        eq_rhs: Vec<f64>,
    ) -> Self {
        LpProblem { sense: Sense::Max, cost, ineq, ineq_rhs, eq, eq_rhs }
    }

    /// Inequality-only problem.
    pub fn minimize_ineq(cost: Vec<f64>, ineq: Matrix, ineq_rhs: Vec<f64>) -> Self {
        let n = cost.len();
        LpProblem::minimize(cost, ineq, ineq_rhs, Matrix::zeros(0, n), Vec::new())
    }

    pub fn num_vars(&self) -> usize {
        self.cost.len()
    }

    pub fn validate(&self) -> Result<(), LpError> {
        let n = self.num_vars();
        if self.ineq.cols() != n {
            return Err(LpError::Shape(format!(
                "inequality matrix has {} columns, expected {}",
                self.ineq.cols(),
                n
            )));
        }
        if self.eq.cols() != n {
            return Err(LpError::Shape(format!(
                "equality matrix has {} columns, expected {}",
                self.eq.cols(),
                n
            )));
        }
        if self.ineq.rows() != self.ineq_rhs.len() {
            return Err(LpError::Shape(format!(
                "{} inequality rows but {} right-hand sides",
                self.ineq.rows(),
                self.ineq_rhs.len()
            )));
        }
        if self.eq.rows() != self.eq_rhs.len() {
            return Err(LpError::Shape(format!(
                "{} equality rows but {} right-hand sides",
                self.eq.rows(),
                self.eq_rhs.len()
            )));
        }
        let finite = self.cost.iter().all(|v| v.is_finite())
            && self.ineq.is_finite()
            && self.eq.is_finite()
            && self.ineq_rhs.iter().all(|v| v.is_finite())
            && self.eq_rhs.iter().all(|v| v.is_finite());
        if !finite {
            return Err(LpError::NonFinite);
        }
        Ok(())
    }
}

/// All tolerances are absolute on equilibrated data and overridable.
#[derive(Clone, Copy, Debug)]
pub struct LpTolerances {
    /// Smallest acceptable pivot magnitude.
    pub pivot: f64,
    /// Primal feasibility slack.
    pub feas: f64,
    /// Complementary slackness bound.
    pub cs: f64,
    /// Primal-dual objective agreement.
    pub gap: f64,
}

impl Default for LpTolerances {
    fn default() -> Self {
        LpTolerances { pivot: 1e-9, feas: 1e-8, cs: 1e-7, gap: 1e-7 }
    }
}

#[derive(Clone, Debug)]
pub enum LpSolution {
    Optimal(Optimum),
    Infeasible,
    /// `ray` is a feasible direction along which the objective improves
    /// without bound (decreases for Min, increases for Max).
    Unbounded {
        ray: Vec<f64>,
    },
}

/// For `Sense::Max` the point and value refer to the original maximization;
/// the multipliers always refer to the equivalent minimization with negated
/// cost, so the stated sign convention holds with `cost` replaced by `-cost`.
#[derive(Clone, Debug)]
pub struct Optimum {
    pub x: Vec<f64>,
    pub value: f64,
    /// One per inequality row, nonnegative.
    pub ineq_multipliers: Vec<f64>,
    /// One per equality row, sign-free.
    pub eq_multipliers: Vec<f64>,
    /// True when the optimal basis had a zero basic variable, i.e. the
    /// multipliers need not be unique.
    pub degenerate: bool,
}

impl LpSolution {
    pub fn optimal(&self) -> Option<&Optimum> {
        match self {
            LpSolution::Optimal(o) => Some(o),
            _ => None,
        }
    }

    pub fn status_name(&self) -> &'static str {
        match self {
            LpSolution::Optimal(_) => "optimal",
            LpSolution::Infeasible => "infeasible",
            LpSolution::Unbounded { .. } => "unbounded",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum LpError {
    Shape(String),
    NonFinite,
    /// The pivoting loop exceeded its iteration cap; indicates a bug or a
    /// pathologically conditioned instance, never a normal outcome.
    IterationLimit,
    /// A basis refactorization failed, which the pivot tolerance should
    /// have prevented.
    SingularBasis,
    /// Vertex enumeration: C(rows, dim) exceeds the supported budget.
    TooLargeForEnumeration { rows: usize, dim: usize },
    /// Vertex enumeration asked on an unbounded polytope.
    UnboundedPolytope,
}

impl fmt::Display for LpError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LpError::Shape(s) => write!(f, "shape error: {s}"),
            LpError::NonFinite => write!(f, "problem data contains non-finite entries"),
            LpError::IterationLimit => write!(f, "simplex iteration limit exceeded"),
            LpError::SingularBasis => write!(f, "singular basis during refactorization"),
            LpError::TooLargeForEnumeration { rows, dim } => {
                write!(f, "too large for enumeration: C({rows}, {dim}) exceeds the budget")
            }
            LpError::UnboundedPolytope => write!(f, "unbounded polytope"),
        }
    }
}

impl std::error::Error for LpError {}

/// Deterministic two-phase revised simplex with default tolerances.
pub fn solve_lp(lp: &LpProblem) -> Result<LpSolution, LpError> {
    solve_lp_with(lp, &LpTolerances::default())
}

pub fn solve_lp_with(lp: &LpProblem, tol: &LpTolerances) -> Result<LpSolution, LpError> {
    lp.validate()?;
    simplex::solve(lp, tol)
}
