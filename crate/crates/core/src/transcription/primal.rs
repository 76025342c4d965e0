//! Euler transcription of the primal problem into a linear program.
//!
//! Variables are the stacked state samples z_{j,k}, one highest-derivative
//! sample v_k per interval, one control sample u_k per interval for the
//! control-parameterized class, and an epigraph variable for the endpoint
//! cost. The chain rows z_{j,k+1} = z_{j,k} + h z_{j+1,k} make the state a
//! cumulative sum of the v_k, so boundedness of the value reduces to
//! boundedness of the reachable endpoint set.

use crate::convex::Polytope;
use crate::dfi::{InclusionMap, MayerProblem, PolyhedralMap2, SemilinearMap};
use crate::numerics::{solve_lp, LpProblem, LpSolution, Matrix, Optimum};

use super::{Grid, PrimalTrajectory, TranscriptionError};

/// Column and row layout of the primal transcription.
#[derive(Debug, Clone)]
pub(crate) struct PrimalLayout {
    pub kappa: usize,
    pub n: usize,
    /// Control dimension; zero for the graph-constrained class.
    pub r: usize,
    pub steps: usize,
    /// Rows of each initial-set description, in component order.
    pub q_rows: Vec<usize>,
    /// Rows of the interval constraint block (control set or graph).
    pub interval_rows: usize,
    /// Number of endpoint cost pieces.
    pub pieces: usize,
}

impl PrimalLayout {
    pub fn new(problem: &MayerProblem, grid: Grid) -> PrimalLayout {
        let kappa = problem.kappa();
        let n = problem.state_dim();
        let (r, interval_rows) = match problem.inclusion() {
            InclusionMap::Semilinear(f) => (f.control_dim(), f.control_set().rows()),
            InclusionMap::Polyhedral2(f) => (0, f.rows()),
        };
        let q_rows = (0..kappa).map(|j| problem.initial_set(j).rows()).collect();
        PrimalLayout {
            kappa,
            n,
            r,
            steps: grid.steps(),
            q_rows,
            interval_rows,
            pieces: problem.objective().pieces().len(),
        }
    }

    /// Column of component j of the state stack at node k.
    pub fn z_col(&self, k: usize, j: usize) -> usize {
        (k * self.kappa + j) * self.n
    }

    /// Column of the highest-derivative sample on interval k.
    pub fn v_col(&self, k: usize) -> usize {
        (self.steps + 1) * self.kappa * self.n + k * self.n
    }

    /// Column of the control sample on interval k.
    pub fn u_col(&self, k: usize) -> usize {
        self.v_col(self.steps) + k * self.r
    }

    /// Column of the epigraph variable.
    pub fn tau_col(&self) -> usize {
        self.u_col(self.steps)
    }

    pub fn num_vars(&self) -> usize {
        self.tau_col() + 1
    }

    /// Equality row of the chain update for component j on interval k.
    pub fn chain_row(&self, k: usize, j: usize) -> usize {
        (k * self.kappa + j) * self.n
    }

    /// Equality row tying v_k to the right-hand side map (control class).
    pub fn dynamics_row(&self, k: usize) -> usize {
        self.steps * self.kappa * self.n + k * self.n
    }

    pub fn num_eq_rows(&self) -> usize {
        let dynamics = if self.r > 0 { self.steps * self.n } else { 0 };
        self.steps * self.kappa * self.n + dynamics
    }

    /// First inequality row of the initial-set block for component j.
    pub fn q_row(&self, j: usize) -> usize {
        self.q_rows[..j].iter().sum()
    }

    /// First inequality row of the interval block (control set or graph).
    pub fn interval_row(&self, k: usize) -> usize {
        self.q_row(self.kappa) + k * self.interval_rows
    }

    /// First inequality row of the epigraph block.
    pub fn epigraph_row(&self) -> usize {
        self.interval_row(self.steps)
    }

    pub fn num_ineq_rows(&self) -> usize {
        self.epigraph_row() + self.pieces
    }
}

/// The primal transcription: a minimization LP plus the layout needed to
/// unpack solutions and multipliers.
#[derive(Debug, Clone)]
pub struct PrimalTranscription {
    pub lp: LpProblem,
    pub(crate) layout: PrimalLayout,
    grid: Grid,
}

fn copy_block(m: &mut Matrix, row0: usize, col0: usize, block: &Matrix, scale: f64) {
    for i in 0..block.rows() {
        for j in 0..block.cols() {
            let v = block.get(i, j);
            if v != 0.0 {
                m.set(row0 + i, col0 + j, m.get(row0 + i, col0 + j) + scale * v);
            }
        }
    }
}

fn set_identity(m: &mut Matrix, row0: usize, col0: usize, n: usize, scale: f64) {
    for d in 0..n {
        m.set(row0 + d, col0 + d, m.get(row0 + d, col0 + d) + scale);
    }
}

fn fill_chain_rows(eq: &mut Matrix, layout: &PrimalLayout, h: f64) {
    for k in 0..layout.steps {
        for j in 0..layout.kappa {
            let row = layout.chain_row(k, j);
            set_identity(eq, row, layout.z_col(k + 1, j), layout.n, 1.0);
            set_identity(eq, row, layout.z_col(k, j), layout.n, -1.0);
            if j + 1 < layout.kappa {
                set_identity(eq, row, layout.z_col(k, j + 1), layout.n, -h);
            } else {
                set_identity(eq, row, layout.v_col(k), layout.n, -h);
            }
        }
    }
}

fn fill_semilinear_rows(eq: &mut Matrix, layout: &PrimalLayout, f: &SemilinearMap) {
    for k in 0..layout.steps {
        let row = layout.dynamics_row(k);
        set_identity(eq, row, layout.v_col(k), layout.n, 1.0);
        for j in 0..layout.kappa {
            copy_block(eq, row, layout.z_col(k, j), f.coefficient(j), -1.0);
        }
        copy_block(eq, row, layout.u_col(k), f.control_matrix(), -1.0);
    }
}

fn fill_initial_sets(
    g: &mut Matrix,
    rhs: &mut [f64],
    layout: &PrimalLayout,
    problem: &MayerProblem,
) {
    for j in 0..layout.kappa {
        let q = problem.initial_set(j);
        let row = layout.q_row(j);
        copy_block(g, row, layout.z_col(0, j), q.matrix(), 1.0);
        rhs[row..row + q.rows()].copy_from_slice(q.rhs());
    }
}

fn fill_control_sets(g: &mut Matrix, rhs: &mut [f64], layout: &PrimalLayout, u: &Polytope) {
    for k in 0..layout.steps {
        let row = layout.interval_row(k);
        copy_block(g, row, layout.u_col(k), u.matrix(), 1.0);
        rhs[row..row + u.rows()].copy_from_slice(u.rhs());
    }
}

fn fill_graph_rows(g: &mut Matrix, rhs: &mut [f64], layout: &PrimalLayout, f: &PolyhedralMap2) {
    for k in 0..layout.steps {
        let row = layout.interval_row(k);
        copy_block(g, row, layout.z_col(k, 0), f.a(), 1.0);
        copy_block(g, row, layout.z_col(k, 1), f.b(), 1.0);
        copy_block(g, row, layout.v_col(k), f.c(), -1.0);
        rhs[row..row + f.rows()].copy_from_slice(f.d());
    }
}

fn fill_epigraph(g: &mut Matrix, rhs: &mut [f64], layout: &PrimalLayout, problem: &MayerProblem) {
    let row0 = layout.epigraph_row();
    for (i, (slope, offset)) in problem.objective().pieces().iter().enumerate() {
        for (col, c) in slope.iter().enumerate() {
            g.set(row0 + i, layout.z_col(layout.steps, 0) + col, *c);
        }
        g.set(row0 + i, layout.tau_col(), -1.0);
        rhs[row0 + i] = -offset;
    }
}

/// Builds the primal linear program on the given grid.
pub fn transcribe_primal(problem: &MayerProblem, grid: Grid) -> PrimalTranscription {
    let layout = PrimalLayout::new(problem, grid);
    let h = grid.h();
    let nv = layout.num_vars();

    let mut eq = Matrix::zeros(layout.num_eq_rows(), nv);
    fill_chain_rows(&mut eq, &layout, h);

    let mut g = Matrix::zeros(layout.num_ineq_rows(), nv);
    let mut rhs = vec![0.0; layout.num_ineq_rows()];
    fill_initial_sets(&mut g, &mut rhs, &layout, problem);
    match problem.inclusion() {
        InclusionMap::Semilinear(f) => {
            fill_semilinear_rows(&mut eq, &layout, f);
            fill_control_sets(&mut g, &mut rhs, &layout, f.control_set());
        }
        InclusionMap::Polyhedral2(f) => fill_graph_rows(&mut g, &mut rhs, &layout, f),
    }
    fill_epigraph(&mut g, &mut rhs, &layout, problem);

    let mut cost = vec![0.0; nv];
    cost[layout.tau_col()] = 1.0;
    let eq_rhs = vec![0.0; layout.num_eq_rows()];
    let lp = LpProblem::minimize(cost, g, rhs, eq, eq_rhs);
    PrimalTranscription { lp, layout, grid }
}

impl PrimalTranscription {
    pub fn grid(&self) -> Grid {
        self.grid
    }

    /// Reads a trajectory out of an optimal LP point.
    pub fn unpack(
        &self,
        problem: &MayerProblem,
        opt: &Optimum,
    ) -> Result<PrimalTrajectory, TranscriptionError> {
        let l = &self.layout;
        let x = &opt.x;
        let z = (0..=l.steps)
            .map(|k| x[l.z_col(k, 0)..l.z_col(k, 0) + l.kappa * l.n].to_vec())
            .collect();
        let v = (0..l.steps).map(|k| x[l.v_col(k)..l.v_col(k) + l.n].to_vec()).collect();
        let u = if l.r > 0 {
            (0..l.steps).map(|k| x[l.u_col(k)..l.u_col(k) + l.r].to_vec()).collect()
        } else {
            Vec::new()
        };
        PrimalTrajectory::new(problem, self.grid, z, v, u)
    }
}

/// Chain-row multipliers and aggregated boundary data of an optimal primal
/// point, in the sign convention cost + G^T mu + E^T p = 0. These determine
/// a dual trajectory; see `extract_dual_trajectory`.
#[derive(Debug, Clone)]
pub(crate) struct ChainMultipliers {
    /// p[j][k]: multiplier of the chain row for component j on interval k.
    pub p: Vec<Vec<Vec<f64>>>,
    /// gamma[j] = G_{Q_j}^T mu_j from the initial-set block at node 0.
    pub gamma: Vec<Vec<f64>>,
    /// Graph-row multipliers per interval, LP scale (graph class only).
    pub graph: Option<Vec<Vec<f64>>>,
    pub degenerate: bool,
}

impl PrimalTranscription {
    pub(crate) fn chain_multipliers(
        &self,
        problem: &MayerProblem,
        opt: &Optimum,
    ) -> ChainMultipliers {
        let l = &self.layout;
        let p = (0..l.kappa)
            .map(|j| {
                (0..l.steps)
                    .map(|k| {
                        let row = l.chain_row(k, j);
                        opt.eq_multipliers[row..row + l.n].to_vec()
                    })
                    .collect()
            })
            .collect();
        let gamma = (0..l.kappa)
            .map(|j| {
                let q = problem.initial_set(j);
                let row = l.q_row(j);
                let mu = &opt.ineq_multipliers[row..row + q.rows()];
                q.matrix().tr_mul_vec(mu)
            })
            .collect();
        let graph = match problem.inclusion() {
            InclusionMap::Polyhedral2(_) => Some(
                (0..l.steps)
                    .map(|k| {
                        let row = l.interval_row(k);
                        opt.ineq_multipliers[row..row + l.interval_rows].to_vec()
                    })
                    .collect(),
            ),
            InclusionMap::Semilinear(_) => None,
        };
        ChainMultipliers { p, gamma, graph, degenerate: opt.degenerate }
    }
}

/// Transcribes and solves the primal problem; returns the optimal arc and
/// its endpoint cost.
pub fn solve_primal(
    problem: &MayerProblem,
    grid: Grid,
) -> Result<(PrimalTrajectory, f64), TranscriptionError> {
    let t = transcribe_primal(problem, grid);
    match solve_lp(&t.lp)? {
        LpSolution::Optimal(opt) => {
            let traj = t.unpack(problem, &opt)?;
            Ok((traj, opt.value))
        }
        LpSolution::Infeasible => Err(TranscriptionError::Infeasible(
            "no arc satisfies the chain, the inclusion, and the initial sets".into(),
        )),
        LpSolution::Unbounded { .. } => Err(TranscriptionError::Unbounded(
            "endpoint cost decreases without bound along feasible arcs".into(),
        )),
    }
}
