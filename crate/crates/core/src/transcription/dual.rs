//! Direct transcription of the dual problem into a linear program.
//!
//! The unknowns are the adjoint samples y_i (lead-in nodes included), the
//! auxiliary chain eta, a convex weight per endpoint cost piece, one
//! multiplier per initial-set row, and one multiplier vector per interval
//! for the graph pairing. Each concave ingredient of the dual functional is
//! embedded through its own linear-programming description, which
//! underestimates the ingredient at any feasible point and is tight at the
//! optimum; together with the pairing identity this pins the optimal value
//! to the primal one exactly.

use crate::dfi::{InclusionMap, MayerProblem};
use crate::numerics::{solve_lp, LpProblem, LpSolution, Matrix, Optimum};

use super::{Builders, Comb, DualTrajectory, Grid, TranscriptionError};

/// Column and row layout of the dual transcription.
#[derive(Debug, Clone)]
pub(crate) struct DualLayout {
    pub kappa: usize,
    pub n: usize,
    pub steps: usize,
    /// Rows of the initial-set descriptions, indexed by the support term
    /// position j, which pairs with initial set kappa - 1 - j.
    pub support_rows: Vec<usize>,
    /// Length of one interval multiplier vector.
    pub interval_len: usize,
    /// Rows closing each interval block: the control match (length r) for
    /// the control class, the derivative match (length n) for the graph one.
    pub tail: usize,
    pub pieces: usize,
}

impl DualLayout {
    pub fn new(problem: &MayerProblem, grid: Grid) -> DualLayout {
        let kappa = problem.kappa();
        let n = problem.state_dim();
        let (interval_len, tail) = match problem.inclusion() {
            InclusionMap::Semilinear(f) => (f.control_set().rows(), f.control_dim()),
            InclusionMap::Polyhedral2(f) => (f.rows(), n),
        };
        let support_rows =
            (0..kappa).map(|j| problem.initial_set(kappa - 1 - j).rows()).collect();
        DualLayout {
            kappa,
            n,
            steps: grid.steps(),
            support_rows,
            interval_len,
            tail,
            pieces: problem.objective().pieces().len(),
        }
    }

    /// Column of adjoint sample y_i; i ranges over -(kappa-1) ..= steps.
    pub fn y_col(&self, i: isize) -> usize {
        ((i + self.kappa as isize - 1) as usize) * self.n
    }

    /// Column of eta_m at node k (1 <= m <= kappa-1).
    pub fn eta_col(&self, m: usize, k: usize) -> usize {
        (self.steps + self.kappa) * self.n + ((m - 1) * (self.steps + 1) + k) * self.n
    }

    /// Column of the convex weight on endpoint cost piece i.
    pub fn weight_col(&self, i: usize) -> usize {
        let eta = (self.kappa - 1) * (self.steps + 1) * self.n;
        (self.steps + self.kappa) * self.n + eta + i
    }

    /// Column of the multiplier block for support term j.
    pub fn support_col(&self, j: usize) -> usize {
        self.weight_col(self.pieces) + self.support_rows[..j].iter().sum::<usize>()
    }

    /// Column of the interval multiplier block on interval k.
    pub fn interval_col(&self, k: usize) -> usize {
        self.support_col(self.kappa) + k * self.interval_len
    }

    pub fn num_vars(&self) -> usize {
        self.interval_col(self.steps)
    }

    /// Equality row of component l of the endpoint argument match.
    pub fn g1_row(&self, l: usize) -> usize {
        l * self.n
    }

    /// Equality row of the convex weight normalization.
    pub fn convexity_row(&self) -> usize {
        self.kappa * self.n
    }

    /// Equality row of support term j's argument match.
    pub fn g3_row(&self, j: usize) -> usize {
        self.kappa * self.n + 1 + j * self.n
    }

    pub fn num_eq_rows(&self) -> usize {
        self.g3_row(self.kappa) + self.steps * (self.kappa * self.n + self.tail)
    }

    /// First equality row of the interval block on interval k.
    pub fn interval_eq_row(&self, k: usize) -> usize {
        self.g3_row(self.kappa) + k * (self.kappa * self.n + self.tail)
    }

    pub fn num_ineq_rows(&self) -> usize {
        self.pieces + self.support_rows.iter().sum::<usize>() + self.steps * self.interval_len
    }
}

/// The dual transcription: a maximization LP plus its layout.
#[derive(Debug, Clone)]
pub struct DualTranscription {
    pub lp: LpProblem,
    pub(crate) layout: DualLayout,
    grid: Grid,
}

fn add_comb(eq: &mut Matrix, layout: &DualLayout, row0: usize, comb: &Comb, sign: f64) {
    for (c, var) in &comb.terms {
        let col = match var {
            super::BVar::Y(i) => layout.y_col(*i),
            super::BVar::Eta { m, node } => layout.eta_col(*m, *node),
        };
        for d in 0..layout.n {
            let cur = eq.get(row0 + d, col + d);
            eq.set(row0 + d, col + d, cur + sign * c);
        }
    }
}

fn add_tr_block(eq: &mut Matrix, row0: usize, col0: usize, block: &Matrix, scale: f64) {
    // Adds scale * block^T with its top-left corner at (row0, col0).
    for i in 0..block.rows() {
        for j in 0..block.cols() {
            let v = block.get(i, j);
            if v != 0.0 {
                eq.set(row0 + j, col0 + i, eq.get(row0 + j, col0 + i) + scale * v);
            }
        }
    }
}

/// Builds the dual linear program on the given grid.
pub fn transcribe_dual_direct(problem: &MayerProblem, grid: Grid) -> DualTranscription {
    let layout = DualLayout::new(problem, grid);
    let b = Builders::new(layout.kappa, grid);
    let h = grid.h();
    let nv = layout.num_vars();
    let n = layout.n;

    let mut eq = Matrix::zeros(layout.num_eq_rows(), nv);
    let mut cost = vec![0.0; nv];

    // Endpoint argument match and the convex weight normalization.
    for l in 0..layout.kappa {
        add_comb(&mut eq, &layout, layout.g1_row(l), &b.ghat1(l), -1.0);
    }
    for (i, (slope, offset)) in problem.objective().pieces().iter().enumerate() {
        let col = layout.weight_col(i);
        for l in 0..layout.kappa {
            for d in 0..n {
                eq.set(layout.g1_row(l) + d, col, slope[l * n + d]);
            }
        }
        eq.set(layout.convexity_row(), col, 1.0);
        cost[col] = *offset;
    }

    // Initial-set support arguments.
    for j in 0..layout.kappa {
        let q = problem.initial_set(layout.kappa - 1 - j);
        let row = layout.g3_row(j);
        add_comb(&mut eq, &layout, row, &b.ghat3(j), -1.0);
        add_tr_block(&mut eq, row, layout.support_col(j), q.matrix(), 1.0);
        for (i, hi) in q.rhs().iter().enumerate() {
            cost[layout.support_col(j) + i] = -hi;
        }
    }

    // Interval blocks: slot matches plus the class-specific closing rows.
    for k in 0..layout.steps {
        let row = layout.interval_eq_row(k);
        match problem.inclusion() {
            InclusionMap::Semilinear(f) => {
                for j in 0..layout.kappa {
                    add_comb(&mut eq, &layout, row + j * n, &b.slot(j, k), 1.0);
                    add_tr_block(
                        &mut eq,
                        row + j * n,
                        layout.y_col(k as isize + 1),
                        f.coefficient(j),
                        -1.0,
                    );
                }
                let crow = row + layout.kappa * n;
                add_tr_block(&mut eq, crow, layout.interval_col(k), f.control_set().matrix(), 1.0);
                add_tr_block(&mut eq, crow, layout.y_col(k as isize + 1), f.control_matrix(), -1.0);
                for (i, hi) in f.control_set().rhs().iter().enumerate() {
                    cost[layout.interval_col(k) + i] = -h * hi;
                }
            }
            InclusionMap::Polyhedral2(f) => {
                add_comb(&mut eq, &layout, row, &b.slot(0, k), 1.0);
                add_tr_block(&mut eq, row, layout.interval_col(k), f.a(), 1.0);
                add_comb(&mut eq, &layout, row + n, &b.slot(1, k), 1.0);
                add_tr_block(&mut eq, row + n, layout.interval_col(k), f.b(), 1.0);
                add_comb(&mut eq, &layout, row + 2 * n, &b.vslot(k), 1.0);
                add_tr_block(&mut eq, row + 2 * n, layout.interval_col(k), f.c(), 1.0);
                for (i, di) in f.d().iter().enumerate() {
                    cost[layout.interval_col(k) + i] = -h * di;
                }
            }
        }
    }

    // Sign constraints on the weight and multiplier variables.
    let mut g = Matrix::zeros(layout.num_ineq_rows(), nv);
    let first_signed = layout.weight_col(0);
    for (row, col) in (first_signed..nv).enumerate() {
        g.set(row, col, -1.0);
    }
    let rhs = vec![0.0; layout.num_ineq_rows()];
    let mut eq_rhs = vec![0.0; layout.num_eq_rows()];
    eq_rhs[layout.convexity_row()] = 1.0;

    let lp = LpProblem::maximize(cost, g, rhs, eq, eq_rhs);
    DualTranscription { lp, layout, grid }
}

impl DualTranscription {
    pub fn grid(&self) -> Grid {
        self.grid
    }

    /// Reads a dual trajectory out of an optimal LP point.
    pub fn unpack(
        &self,
        problem: &MayerProblem,
        opt: &Optimum,
    ) -> Result<DualTrajectory, TranscriptionError> {
        let l = &self.layout;
        let x = &opt.x;
        let xstar =
            (0..=l.steps).map(|k| x[l.y_col(k as isize)..l.y_col(k as isize) + l.n].to_vec()).collect();
        let lead_in = (1..l.kappa)
            .map(|i| {
                let c = l.y_col(-(i as isize));
                x[c..c + l.n].to_vec()
            })
            .collect();
        let eta = (1..l.kappa)
            .map(|m| {
                (0..=l.steps)
                    .map(|k| x[l.eta_col(m, k)..l.eta_col(m, k) + l.n].to_vec())
                    .collect()
            })
            .collect();
        let lambda = match problem.inclusion() {
            InclusionMap::Polyhedral2(_) => Some(
                (0..l.steps)
                    .map(|k| x[l.interval_col(k)..l.interval_col(k) + l.interval_len].to_vec())
                    .collect(),
            ),
            InclusionMap::Semilinear(_) => None,
        };
        let traj = DualTrajectory::new(problem, self.grid, xstar, lead_in, eta, lambda)?;
        Ok(if opt.degenerate { traj.mark_degenerate() } else { traj })
    }
}

/// Transcribes and solves the dual problem; returns the optimal dual arc
/// and the dual functional value.
pub fn solve_dual(
    problem: &MayerProblem,
    grid: Grid,
) -> Result<(DualTrajectory, f64), TranscriptionError> {
    let t = transcribe_dual_direct(problem, grid);
    match solve_lp(&t.lp)? {
        LpSolution::Optimal(opt) => {
            let traj = t.unpack(problem, &opt)?;
            Ok((traj, opt.value))
        }
        LpSolution::Infeasible => Err(TranscriptionError::Infeasible(
            "no dual point satisfies the stationarity rows; the primal value is unbounded".into(),
        )),
        LpSolution::Unbounded { .. } => Err(TranscriptionError::Unbounded(
            "dual functional increases without bound; the primal problem is infeasible".into(),
        )),
    }
}
