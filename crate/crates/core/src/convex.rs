//! Convex analysis over polytopes and max-affine functions.
//!
//! Everything here is exact up to LP tolerances: support functions,
//! conjugates, subdifferential membership, and dual-cone membership all
//! reduce to small linear programs. A `Polytope` caches nonemptiness and
//! boundedness at construction so later calls can rely on both.

use std::error::Error;
use std::fmt;

use crate::numerics::{
    dot, enumerate_vertices, norm_inf, solve_lp, LpError, LpProblem, LpSolution, Matrix,
};

/// Scalar with the two infinities that support functions and conjugates take.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Extended {
    Finite(f64),
    PosInf,
    NegInf,
}

impl Extended {
    pub fn finite(self) -> Option<f64> {
        match self {
            Extended::Finite(v) => Some(v),
            _ => None,
        }
    }

    pub fn is_finite(self) -> bool {
        matches!(self, Extended::Finite(_))
    }
}

impl fmt::Display for Extended {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Extended::Finite(v) => write!(f, "{v}"),
            Extended::PosInf => write!(f, "+inf"),
            Extended::NegInf => write!(f, "-inf"),
        }
    }
}

#[derive(Debug)]
pub enum ConvexError {
    Lp(LpError),
    Dimension(String),
    EmptyPolytope,
    UnboundedPolytope,
    PointOutsideSet,
    NoPieces,
    NonFinite,
}

impl fmt::Display for ConvexError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ConvexError::Lp(e) => write!(f, "linear program failed: {e}"),
            ConvexError::Dimension(msg) => write!(f, "dimension mismatch: {msg}"),
            ConvexError::EmptyPolytope => write!(f, "polytope is empty"),
            ConvexError::UnboundedPolytope => write!(f, "polytope is unbounded"),
            ConvexError::PointOutsideSet => write!(f, "reference point lies outside the set"),
            ConvexError::NoPieces => write!(f, "max-affine function needs at least one piece"),
            ConvexError::NonFinite => write!(f, "non-finite coefficient"),
        }
    }
}

impl Error for ConvexError {}

impl From<LpError> for ConvexError {
    fn from(e: LpError) -> Self {
        ConvexError::Lp(e)
    }
}

/// Feasibility slack accepted when checking membership of given points.
const MEMBER_TOL: f64 = 1e-8;

/// {x : Gx <= h}, nonempty by construction, with a cached boundedness flag.
#[derive(Clone, Debug)]
pub struct Polytope {
    g: Matrix,
    h: Vec<f64>,
    bounded: bool,
}

impl Polytope {
    /// Validates nonemptiness (one feasibility LP) and probes boundedness
    /// along each coordinate axis (2·dim LPs).
    pub fn new(g: Matrix, h: Vec<f64>) -> Result<Self, ConvexError> {
        if g.rows() != h.len() {
            return Err(ConvexError::Dimension(format!(
                "{} rows against {} right-hand sides",
                g.rows(),
                h.len()
            )));
        }
        if !g.is_finite() || !h.iter().all(|v| v.is_finite()) {
            return Err(ConvexError::NonFinite);
        }
        let n = g.cols();
        let feas = LpProblem::minimize_ineq(vec![0.0; n], g.clone(), h.clone());
        match solve_lp(&feas)? {
            LpSolution::Infeasible => return Err(ConvexError::EmptyPolytope),
            _ => {}
        }
        let mut bounded = true;
        'probe: for i in 0..n {
            for sign in [1.0, -1.0] {
                let mut cost = vec![0.0; n];
                cost[i] = sign;
                let probe = LpProblem::maximize(cost, g.clone(), h.clone(), Matrix::zeros(0, n), vec![]);
                if matches!(solve_lp(&probe)?, LpSolution::Unbounded { .. }) {
                    bounded = false;
                    break 'probe;
                }
            }
        }
        Ok(Polytope { g, h, bounded })
    }

    /// Axis-aligned box lo <= x <= hi.
    pub fn from_bounds(lo: &[f64], hi: &[f64]) -> Result<Self, ConvexError> {
        if lo.len() != hi.len() {
            return Err(ConvexError::Dimension(format!(
                "lower bound dim {} against upper bound dim {}",
                lo.len(),
                hi.len()
            )));
        }
        if lo.iter().zip(hi).any(|(l, u)| l > u) {
            return Err(ConvexError::EmptyPolytope);
        }
        let n = lo.len();
        let mut g = Matrix::zeros(2 * n, n);
        let mut h = vec![0.0; 2 * n];
        for i in 0..n {
            g.set(2 * i, i, 1.0);
            h[2 * i] = hi[i];
            g.set(2 * i + 1, i, -1.0);
            h[2 * i + 1] = -lo[i];
        }
        if !h.iter().all(|v| v.is_finite()) {
            return Err(ConvexError::NonFinite);
        }
        Ok(Polytope { g, h, bounded: true })
    }

    /// The one-point set {x}.
    pub fn singleton(x: &[f64]) -> Result<Self, ConvexError> {
        Polytope::from_bounds(x, x)
    }

    pub fn dim(&self) -> usize {
        self.g.cols()
    }

    pub fn rows(&self) -> usize {
        self.g.rows()
    }

    pub fn is_bounded(&self) -> bool {
        self.bounded
    }

    pub fn matrix(&self) -> &Matrix {
        &self.g
    }

    pub fn rhs(&self) -> &[f64] {
        &self.h
    }

    pub fn contains(&self, x: &[f64], tol: f64) -> bool {
        if x.len() != self.dim() {
            return false;
        }
        (0..self.g.rows()).all(|i| dot(self.g.row(i), x) <= self.h[i] + tol * (1.0 + self.h[i].abs()))
    }

    /// Vertex set via the enumeration route; requires boundedness.
    pub fn vertices(&self) -> Result<Vec<Vec<f64>>, ConvexError> {
        if !self.bounded {
            return Err(ConvexError::UnboundedPolytope);
        }
        Ok(enumerate_vertices(&self.g, &self.h)?)
    }
}

/// Value of sup{<x,p> : x in Q} together with a maximizer when it exists.
#[derive(Clone, Debug)]
pub enum SupportValue {
    Finite { value: f64, argmax: Vec<f64> },
    Infinite,
}

impl SupportValue {
    pub fn value(&self) -> Extended {
        match self {
            SupportValue::Finite { value, .. } => Extended::Finite(*value),
            SupportValue::Infinite => Extended::PosInf,
        }
    }
}

/// W_Q(p) = sup{<x,p> : x in Q}, one LP in max sense.
pub fn support_function(q: &Polytope, p: &[f64]) -> Result<SupportValue, ConvexError> {
    if p.len() != q.dim() {
        return Err(ConvexError::Dimension(format!(
            "direction dim {} against set dim {}",
            p.len(),
            q.dim()
        )));
    }
    let lp = LpProblem::maximize(
        p.to_vec(),
        q.g.clone(),
        q.h.clone(),
        Matrix::zeros(0, q.dim()),
        vec![],
    );
    match solve_lp(&lp)? {
        LpSolution::Optimal(opt) => Ok(SupportValue::Finite { value: opt.value, argmax: opt.x }),
        LpSolution::Unbounded { .. } => Ok(SupportValue::Infinite),
        LpSolution::Infeasible => Err(ConvexError::EmptyPolytope),
    }
}

/// phi(z) = max_i (<c_i, z> + b_i): convex, proper, finite everywhere.
#[derive(Clone, Debug)]
pub struct PiecewiseMaxAffine {
    pieces: Vec<(Vec<f64>, f64)>,
}

impl PiecewiseMaxAffine {
    pub fn new(pieces: Vec<(Vec<f64>, f64)>) -> Result<Self, ConvexError> {
        let dim = match pieces.first() {
            None => return Err(ConvexError::NoPieces),
            Some((c, _)) => c.len(),
        };
        for (c, b) in &pieces {
            if c.len() != dim {
                return Err(ConvexError::Dimension(format!(
                    "piece dim {} against {}",
                    c.len(),
                    dim
                )));
            }
            if !c.iter().all(|v| v.is_finite()) || !b.is_finite() {
                return Err(ConvexError::NonFinite);
            }
        }
        Ok(PiecewiseMaxAffine { pieces })
    }

    /// The affine function <c, z> + b as a single piece.
    pub fn affine(c: Vec<f64>, b: f64) -> Self {
        PiecewiseMaxAffine { pieces: vec![(c, b)] }
    }

    pub fn dim(&self) -> usize {
        self.pieces[0].0.len()
    }

    pub fn pieces(&self) -> &[(Vec<f64>, f64)] {
        &self.pieces
    }

    pub fn eval(&self, z: &[f64]) -> f64 {
        self.pieces
            .iter()
            .map(|(c, b)| dot(c, z) + b)
            .fold(f64::NEG_INFINITY, f64::max)
    }

    /// Indices of pieces active at z within the scale-aware kink tolerance.
    pub fn active_pieces(&self, z: &[f64]) -> Vec<usize> {
        let v = self.eval(z);
        let tol = 1e-7 * (1.0 + v.abs());
        self.pieces
            .iter()
            .enumerate()
            .filter(|(_, (c, b))| dot(c, z) + b >= v - tol)
            .map(|(i, _)| i)
            .collect()
    }
}

/// phi*(z*) = sup_z (<z, z*> - phi(z)); +inf when z* lies outside conv{c_i}.
pub fn conjugate_value(phi: &PiecewiseMaxAffine, zstar: &[f64]) -> Result<Extended, ConvexError> {
    let n = phi.dim();
    if zstar.len() != n {
        return Err(ConvexError::Dimension(format!(
            "argument dim {} against function dim {}",
            zstar.len(),
            n
        )));
    }
    let k = phi.pieces.len();
    // minimize -sum(lambda_i b_i) over the face of the simplex mapping to z*.
    let cost: Vec<f64> = phi.pieces.iter().map(|(_, b)| -b).collect();
    let mut eq = Matrix::zeros(n + 1, k);
    let mut eq_rhs = vec![0.0; n + 1];
    for (i, (c, _)) in phi.pieces.iter().enumerate() {
        for j in 0..n {
            eq.set(j, i, c[j]);
        }
        eq.set(n, i, 1.0);
    }
    eq_rhs[..n].copy_from_slice(zstar);
    eq_rhs[n] = 1.0;
    let mut ineq = Matrix::zeros(k, k);
    for i in 0..k {
        ineq.set(i, i, -1.0);
    }
    let lp = LpProblem::minimize(cost, ineq, vec![0.0; k], eq, eq_rhs);
    match solve_lp(&lp)? {
        LpSolution::Optimal(opt) => Ok(Extended::Finite(opt.value)),
        LpSolution::Infeasible => Ok(Extended::PosInf),
        LpSolution::Unbounded { .. } => Err(ConvexError::Lp(LpError::IterationLimit)),
    }
}

/// L1 distance of g from conv{c_i : piece i active at z}, the
/// subdifferential of a max-affine function, via an L1-projection LP.
pub fn subdifferential_distance(
    phi: &PiecewiseMaxAffine,
    z: &[f64],
    g: &[f64],
) -> Result<f64, ConvexError> {
    let n = phi.dim();
    if z.len() != n || g.len() != n {
        return Err(ConvexError::Dimension(format!(
            "point dim {} / gradient dim {} against function dim {}",
            z.len(),
            g.len(),
            n
        )));
    }
    let active = phi.active_pieces(z);
    let k = active.len();
    // Variables: lambda (k), splus (n), sminus (n); all nonnegative.
    // sum(lambda_i c_i) + splus - sminus = g, sum(lambda) = 1.
    let nv = k + 2 * n;
    let mut cost = vec![0.0; nv];
    for v in cost.iter_mut().skip(k) {
        *v = 1.0;
    }
    let mut eq = Matrix::zeros(n + 1, nv);
    let mut eq_rhs = vec![0.0; n + 1];
    for (col, &pi) in active.iter().enumerate() {
        let c = &phi.pieces[pi].0;
        for j in 0..n {
            eq.set(j, col, c[j]);
        }
        eq.set(n, col, 1.0);
    }
    for j in 0..n {
        eq.set(j, k + j, 1.0);
        eq.set(j, k + n + j, -1.0);
    }
    eq_rhs[..n].copy_from_slice(g);
    eq_rhs[n] = 1.0;
    let mut ineq = Matrix::zeros(nv, nv);
    for i in 0..nv {
        ineq.set(i, i, -1.0);
    }
    let lp = LpProblem::minimize(cost, ineq, vec![0.0; nv], eq, eq_rhs);
    match solve_lp(&lp)? {
        LpSolution::Optimal(opt) => Ok(opt.value.max(0.0)),
        // The simplex over lambda is compact and the slacks only grow the
        // objective, so neither outcome below can occur on valid data.
        LpSolution::Infeasible => Err(ConvexError::EmptyPolytope),
        LpSolution::Unbounded { .. } => Err(ConvexError::Lp(LpError::IterationLimit)),
    }
}

/// True iff g lies in conv{c_i : piece i active at z} up to an L1 slack of
/// tol scaled by the size of g.
pub fn subdifferential_contains(
    phi: &PiecewiseMaxAffine,
    z: &[f64],
    g: &[f64],
    tol: f64,
) -> Result<bool, ConvexError> {
    Ok(subdifferential_distance(phi, z, g)? <= tol * (1.0 + norm_inf(g)))
}

/// sup_{y in Q} <p, x - y>, the violation of p as a supporting direction of
/// Q at x: zero exactly when <p, y - x> >= 0 for all y in Q, and +inf when
/// p has unbounded decrease over Q. Errors when x is not a member of Q.
pub fn dual_cone_gap(q: &Polytope, x: &[f64], p: &[f64]) -> Result<f64, ConvexError> {
    if x.len() != q.dim() || p.len() != q.dim() {
        return Err(ConvexError::Dimension(format!(
            "point dim {} / direction dim {} against set dim {}",
            x.len(),
            p.len(),
            q.dim()
        )));
    }
    if !q.contains(x, MEMBER_TOL) {
        return Err(ConvexError::PointOutsideSet);
    }
    let lp = LpProblem::minimize_ineq(p.to_vec(), q.g.clone(), q.h.clone());
    match solve_lp(&lp)? {
        LpSolution::Optimal(opt) => Ok((dot(p, x) - opt.value).max(0.0)),
        LpSolution::Unbounded { .. } => Ok(f64::INFINITY),
        LpSolution::Infeasible => Err(ConvexError::EmptyPolytope),
    }
}

/// True iff p lies in the dual cone of Q at x, up to tol.
pub fn dual_cone_contains(
    q: &Polytope,
    x: &[f64],
    p: &[f64],
    tol: f64,
) -> Result<bool, ConvexError> {
    Ok(dual_cone_gap(q, x, p)? <= tol)
}
