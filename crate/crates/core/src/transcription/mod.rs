//! Discretization of the continuous problem and of its dual.
//!
//! The primal side is an explicit Euler transcription of the state chain;
//! the dual side discretizes the adjoint objective on the same grid. Both
//! reduce to dense linear programs, and the two optimal values coincide
//! exactly at every grid size because the dual stencils are chosen so that
//! the discrete integration-by-parts identity (`pairing_identity` below)
//! holds without remainder. That choice is load-bearing: the dual derivative
//! builders here are one-sided and live on a grid extended to the left by
//! kappa - 1 lead-in nodes, and they must not be swapped for the symmetric
//! stencils in `fd`, which serve only the residual checks in `certify`.

use std::collections::BTreeMap;
use std::error::Error;
use std::fmt;

use crate::convex::{conjugate_value, support_function, ConvexError, Extended, SupportValue};
use crate::dfi::{m_value, DfiError, InclusionMap, MayerProblem};
use crate::numerics::LpError;

mod dual;
mod extract;
mod fd;
mod primal;

pub use dual::{solve_dual, transcribe_dual_direct, DualTranscription};
pub use extract::extract_dual_trajectory;
pub use fd::finite_difference;
pub use primal::{solve_primal, transcribe_primal, PrimalTranscription};

pub(crate) use fd::binomial;

/// Errors raised while building, solving, or unpacking a transcription.
#[derive(Debug)]
pub enum TranscriptionError {
    /// A grid with zero steps was requested.
    EmptyGrid,
    /// Too few grid steps for the requested stencil order.
    GridTooShort { steps: usize, order: usize },
    /// Dimension mismatch in supplied data.
    Shape(String),
    /// The discretized problem has no feasible point.
    Infeasible(String),
    /// The discretized problem has unbounded value.
    Unbounded(String),
    /// Multiplier data does not determine a dual trajectory.
    Degenerate(String),
    Lp(LpError),
    Convex(ConvexError),
    Dfi(DfiError),
}

impl fmt::Display for TranscriptionError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TranscriptionError::EmptyGrid => write!(f, "grid needs at least one step"),
            TranscriptionError::GridTooShort { steps, order } => {
                write!(f, "{steps} grid steps cannot carry an order-{order} stencil")
            }
            TranscriptionError::Shape(s) => write!(f, "shape mismatch: {s}"),
            TranscriptionError::Infeasible(s) => write!(f, "infeasible: {s}"),
            TranscriptionError::Unbounded(s) => write!(f, "unbounded: {s}"),
            TranscriptionError::Degenerate(s) => write!(f, "degenerate multipliers: {s}"),
            TranscriptionError::Lp(e) => write!(f, "linear program: {e}"),
            TranscriptionError::Convex(e) => write!(f, "convex oracle: {e}"),
            TranscriptionError::Dfi(e) => write!(f, "inclusion oracle: {e}"),
        }
    }
}

impl Error for TranscriptionError {}

impl From<LpError> for TranscriptionError {
    fn from(e: LpError) -> Self {
        TranscriptionError::Lp(e)
    }
}

impl From<ConvexError> for TranscriptionError {
    fn from(e: ConvexError) -> Self {
        TranscriptionError::Convex(e)
    }
}

impl From<DfiError> for TranscriptionError {
    fn from(e: DfiError) -> Self {
        TranscriptionError::Dfi(e)
    }
}

/// Uniform grid on [0, 1] with N steps and nodes t_k = k/N.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Grid {
    steps: usize,
}

impl Grid {
    pub fn new(steps: usize) -> Result<Grid, TranscriptionError> {
        if steps == 0 {
            return Err(TranscriptionError::EmptyGrid);
        }
        Ok(Grid { steps })
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    pub fn h(&self) -> f64 {
        1.0 / self.steps as f64
    }

    /// t_k, exact at both endpoints.
    pub fn node(&self, k: usize) -> f64 {
        k as f64 / self.steps as f64
    }
}

/// Discrete primal arc: stacked state samples per node, one derivative and
/// (for the control-parameterized class) one control sample per interval.
#[derive(Debug, Clone)]
pub struct PrimalTrajectory {
    grid: Grid,
    z: Vec<Vec<f64>>,
    v: Vec<Vec<f64>>,
    u: Vec<Vec<f64>>,
}

impl PrimalTrajectory {
    /// Validates dimensions against the problem; feasibility is the solver's
    /// business and is checked separately by the certificate layer.
    pub fn new(
        problem: &MayerProblem,
        grid: Grid,
        z: Vec<Vec<f64>>,
        v: Vec<Vec<f64>>,
        u: Vec<Vec<f64>>,
    ) -> Result<PrimalTrajectory, TranscriptionError> {
        let n = problem.state_dim();
        let kappa = problem.kappa();
        let steps = grid.steps();
        if z.len() != steps + 1 || z.iter().any(|zk| zk.len() != kappa * n) {
            return Err(TranscriptionError::Shape(format!(
                "state samples must be {} vectors of length {}",
                steps + 1,
                kappa * n
            )));
        }
        if v.len() != steps || v.iter().any(|vk| vk.len() != n) {
            return Err(TranscriptionError::Shape(format!(
                "derivative samples must be {steps} vectors of length {n}"
            )));
        }
        let want_u = match problem.inclusion() {
            InclusionMap::Semilinear(f) => Some(f.control_dim()),
            InclusionMap::Polyhedral2(_) => None,
        };
        match want_u {
            Some(r) => {
                if u.len() != steps || u.iter().any(|uk| uk.len() != r) {
                    return Err(TranscriptionError::Shape(format!(
                        "control samples must be {steps} vectors of length {r}"
                    )));
                }
            }
            None => {
                if !u.is_empty() {
                    return Err(TranscriptionError::Shape(
                        "this inclusion class carries no control samples".into(),
                    ));
                }
            }
        }
        Ok(PrimalTrajectory { grid, z, v, u })
    }

    pub fn grid(&self) -> Grid {
        self.grid
    }

    /// Stacked (x, x', .., x^(kappa-1)) sample at node k.
    pub fn state(&self, k: usize) -> &[f64] {
        &self.z[k]
    }

    /// Component j of the state stack at node k.
    pub fn state_part(&self, k: usize, j: usize, n: usize) -> &[f64] {
        &self.z[k][j * n..(j + 1) * n]
    }

    /// Highest-derivative sample on interval k.
    pub fn derivative(&self, k: usize) -> &[f64] {
        &self.v[k]
    }

    /// Control sample on interval k; empty slice for classes without one.
    pub fn control(&self, k: usize) -> &[f64] {
        if self.u.is_empty() {
            &[]
        } else {
            &self.u[k]
        }
    }
}

/// Discrete dual arc. Besides the adjoint samples at the grid nodes it
/// carries kappa - 1 lead-in samples at t < 0 feeding the one-sided boundary
/// stencils, the auxiliary chain eta, and (for the graph-constrained class)
/// one nonnegative multiplier vector per interval.
#[derive(Debug, Clone)]
pub struct DualTrajectory {
    grid: Grid,
    xstar: Vec<Vec<f64>>,
    lead_in: Vec<Vec<f64>>,
    eta: Vec<Vec<Vec<f64>>>,
    lambda: Option<Vec<Vec<f64>>>,
    degenerate: bool,
}

impl DualTrajectory {
    pub fn new(
        problem: &MayerProblem,
        grid: Grid,
        xstar: Vec<Vec<f64>>,
        lead_in: Vec<Vec<f64>>,
        eta: Vec<Vec<Vec<f64>>>,
        lambda: Option<Vec<Vec<f64>>>,
    ) -> Result<DualTrajectory, TranscriptionError> {
        let n = problem.state_dim();
        let kappa = problem.kappa();
        let steps = grid.steps();
        if xstar.len() != steps + 1 || xstar.iter().any(|x| x.len() != n) {
            return Err(TranscriptionError::Shape(format!(
                "adjoint samples must be {} vectors of length {n}",
                steps + 1
            )));
        }
        if lead_in.len() != kappa - 1 || lead_in.iter().any(|x| x.len() != n) {
            return Err(TranscriptionError::Shape(format!(
                "lead-in must hold {} vectors of length {n}",
                kappa - 1
            )));
        }
        if eta.len() != kappa.saturating_sub(1) {
            return Err(TranscriptionError::Shape(format!(
                "eta must hold {} component tracks",
                kappa - 1
            )));
        }
        for track in &eta {
            if track.len() != steps + 1 || track.iter().any(|e| e.len() != n) {
                return Err(TranscriptionError::Shape(format!(
                    "each eta track must hold {} vectors of length {n}",
                    steps + 1
                )));
            }
        }
        match (problem.inclusion(), &lambda) {
            (InclusionMap::Polyhedral2(f), Some(l)) => {
                if l.len() != steps || l.iter().any(|lk| lk.len() != f.rows()) {
                    return Err(TranscriptionError::Shape(format!(
                        "lambda must hold {} vectors of length {}",
                        steps,
                        f.rows()
                    )));
                }
            }
            (InclusionMap::Polyhedral2(_), None) => {
                return Err(TranscriptionError::Shape(
                    "graph-constrained duals carry per-interval multipliers".into(),
                ));
            }
            (InclusionMap::Semilinear(_), Some(_)) => {
                return Err(TranscriptionError::Shape(
                    "this inclusion class carries no interval multipliers".into(),
                ));
            }
            (InclusionMap::Semilinear(_), None) => {}
        }
        Ok(DualTrajectory { grid, xstar, lead_in, eta, lambda, degenerate: false })
    }

    pub fn grid(&self) -> Grid {
        self.grid
    }

    /// Adjoint sample y_i; negative i addresses the lead-in nodes.
    pub fn adjoint(&self, i: isize) -> &[f64] {
        if i >= 0 {
            &self.xstar[i as usize]
        } else {
            &self.lead_in[(-i) as usize - 1]
        }
    }

    /// All adjoint node samples y_0 .. y_N.
    pub fn adjoint_samples(&self) -> &[Vec<f64>] {
        &self.xstar
    }

    /// Auxiliary chain sample eta_m at node k (1 <= m <= kappa-1).
    pub fn eta(&self, m: usize, k: usize) -> &[f64] {
        &self.eta[m - 1][k]
    }

    pub fn eta_tracks(&self) -> &[Vec<Vec<f64>>] {
        &self.eta
    }

    /// Graph multiplier on interval k, when the class carries one.
    pub fn lambda(&self, k: usize) -> Option<&[f64]> {
        self.lambda.as_ref().map(|l| l[k].as_slice())
    }

    /// True when the source multiplier set was degenerate, so this is one
    /// optimal selection among several.
    pub fn degenerate(&self) -> bool {
        self.degenerate
    }

    pub(crate) fn mark_degenerate(mut self) -> DualTrajectory {
        self.degenerate = true;
        self
    }
}

/// One symbolic dual unknown: an adjoint node sample (possibly on the
/// lead-in) or an auxiliary chain sample.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub(crate) enum BVar {
    Y(isize),
    Eta { m: usize, node: usize },
}

/// Sparse linear combination of dual unknowns with scalar weights; each
/// unknown stands for an n-vector, so a builder denotes an n-vector form.
#[derive(Debug, Clone)]
pub(crate) struct Comb {
    pub terms: Vec<(f64, BVar)>,
}

impl Comb {
    fn from_map(map: BTreeMap<BVar, f64>) -> Comb {
        let terms = map
            .into_iter()
            .filter(|(_, c)| *c != 0.0)
            .map(|(v, c)| (c, v))
            .collect();
        Comb { terms }
    }

    fn scaled(&self, s: f64) -> Comb {
        Comb { terms: self.terms.iter().map(|(c, v)| (c * s, *v)).collect() }
    }

    fn plus(&self, other: &Comb) -> Comb {
        let mut map = BTreeMap::new();
        for (c, v) in self.terms.iter().chain(&other.terms) {
            *map.entry(*v).or_insert(0.0) += c;
        }
        Comb::from_map(map)
    }

    /// Concrete n-vector value of the combination on a dual trajectory.
    pub fn eval(&self, dual: &DualTrajectory, n: usize) -> Vec<f64> {
        let mut out = vec![0.0; n];
        for (c, var) in &self.terms {
            let sample = match var {
                BVar::Y(i) => dual.adjoint(*i),
                BVar::Eta { m, node } => dual.eta(*m, *node),
            };
            for (o, s) in out.iter_mut().zip(sample) {
                *o += c * s;
            }
        }
        out
    }
}

/// Factory for the dual-side difference expressions on a fixed grid.
///
/// All derivative builders are one-sided: `backward(j, i)` spans nodes
/// i-j .. i and `forward(j, i)` spans i .. i+j. The boundary expressions
/// reach onto the lead-in nodes, which is what makes the discrete pairing
/// identity exact.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Builders {
    pub kappa: usize,
    pub steps: usize,
    pub h: f64,
}

impl Builders {
    pub fn new(kappa: usize, grid: Grid) -> Builders {
        Builders { kappa, steps: grid.steps(), h: grid.h() }
    }

    /// (-1)^p as f64.
    fn sign(p: usize) -> f64 {
        if p % 2 == 0 {
            1.0
        } else {
            -1.0
        }
    }

    /// Backward difference of order j anchored at node i.
    pub fn backward(&self, j: usize, i: isize) -> Comb {
        let hj = self.h.powi(j as i32);
        let mut map = BTreeMap::new();
        for l in 0..=j {
            let c = Self::sign(l) * binomial(j, l) / hj;
            *map.entry(BVar::Y(i - l as isize)).or_insert(0.0) += c;
        }
        Comb::from_map(map)
    }

    /// Forward difference of order j anchored at node i.
    pub fn forward(&self, j: usize, i: isize) -> Comb {
        let hj = self.h.powi(j as i32);
        let mut map = BTreeMap::new();
        for l in 0..=j {
            let c = Self::sign(j - l) * binomial(j, l) / hj;
            *map.entry(BVar::Y(i + l as isize)).or_insert(0.0) += c;
        }
        Comb::from_map(map)
    }

    fn eta_at(&self, m: usize, node: usize) -> Comb {
        if m == 0 {
            Comb { terms: Vec::new() }
        } else {
            Comb { terms: vec![(1.0, BVar::Eta { m, node })] }
        }
    }

    /// Component l of the endpoint cost argument at t = 1.
    pub fn ghat1(&self, l: usize) -> Comb {
        let j = self.kappa - 1 - l;
        let d = self.backward(j, self.steps as isize).scaled(Self::sign(self.kappa - l));
        d.plus(&self.eta_at(j, self.steps))
    }

    /// Slot j of the graph-pairing argument on interval k.
    pub fn slot(&self, j: usize, k: usize) -> Comb {
        if j == 0 {
            let d = self.backward(self.kappa, k as isize + 1).scaled(Self::sign(self.kappa));
            let m = self.kappa - 1;
            let jump = self
                .eta_at(m, k + 1)
                .plus(&self.eta_at(m, k).scaled(-1.0))
                .scaled(1.0 / self.h);
            d.plus(&jump)
        } else {
            let m = self.kappa - j;
            let jump = self
                .eta_at(m - 1, k + 1)
                .plus(&self.eta_at(m - 1, k).scaled(-1.0))
                .scaled(1.0 / self.h);
            self.eta_at(m, k + 1).plus(&jump)
        }
    }

    /// Derivative slot of the graph pairing on interval k.
    pub fn vslot(&self, k: usize) -> Comb {
        Comb { terms: vec![(1.0, BVar::Y(k as isize + 1))] }
    }

    /// Component j of the initial-set support argument at t = 0.
    pub fn ghat3(&self, j: usize) -> Comb {
        let d = self.forward(j, -(j as isize)).scaled(Self::sign(j));
        d.plus(&self.eta_at(j, 0).scaled(-1.0))
    }
}

/// Endpoint cost of a discrete arc.
pub fn evaluate_primal_objective(problem: &MayerProblem, traj: &PrimalTrajectory) -> f64 {
    problem.objective().eval(traj.state(traj.grid().steps()))
}

/// Dual functional of a discrete dual arc: -phi* at the endpoint argument,
/// plus h times the graph pairing value per interval, minus the initial-set
/// support terms. Any infinite ingredient collapses the value to -inf.
pub fn evaluate_dual_objective(
    problem: &MayerProblem,
    dual: &DualTrajectory,
) -> Result<Extended, TranscriptionError> {
    let n = problem.state_dim();
    let kappa = problem.kappa();
    let steps = dual.grid().steps();
    let h = dual.grid().h();
    let b = Builders::new(kappa, dual.grid());

    let mut g1 = Vec::with_capacity(kappa * n);
    for l in 0..kappa {
        g1.extend(b.ghat1(l).eval(dual, n));
    }
    let conj = match conjugate_value(problem.objective(), &g1)? {
        Extended::Finite(v) => v,
        _ => return Ok(Extended::NegInf),
    };

    let mut total = -conj;
    for k in 0..steps {
        let mut w = Vec::with_capacity((kappa + 1) * n);
        for j in 0..kappa {
            w.extend(b.slot(j, k).eval(dual, n));
        }
        w.extend(b.vslot(k).eval(dual, n));
        match m_value(problem.inclusion(), &w)?.value {
            Extended::Finite(v) => total += h * v,
            _ => return Ok(Extended::NegInf),
        }
    }

    for j in 0..kappa {
        let g3 = b.ghat3(j).eval(dual, n);
        match support_function(problem.initial_set(kappa - 1 - j), &g3)? {
            SupportValue::Finite { value, .. } => total -= value,
            SupportValue::Infinite => return Ok(Extended::NegInf),
        }
    }

    Ok(Extended::Finite(total))
}
