//! Dual trajectory recovery from an optimal primal basis.
//!
//! The multipliers of the chain rows fix the adjoint samples at nodes
//! 1 .. N directly. The remaining dual unknowns, the node-0 sample, the
//! lead-in samples, and the auxiliary chain, satisfy a small square linear
//! system assembled from the stationarity identities of the primal program.
//! That system can carry an exact one-dimensional gauge (the second-order
//! case does); when the factorization flags it, one interval equation is
//! replaced by a gauge-fixing row, which is harmless because the replaced
//! equation is implied by the remaining ones.

use crate::dfi::{InclusionMap, MayerProblem};
use crate::numerics::{lu_factor, LpSolution, Matrix};

use super::primal::transcribe_primal;
use super::{BVar, Builders, DualTrajectory, Grid, TranscriptionError};

/// One equation: a dual-unknown combination, its target vector, and whether
/// it may be sacrificed for a gauge row.
struct EquationSet {
    kappa: usize,
    steps: usize,
    n: usize,
    /// Matrix over the unknown vector, one scalar block per component.
    a: Matrix,
    /// Targets, one column per state component.
    rhs: Matrix,
    /// Row indices eligible for gauge replacement, in replacement order.
    gauge_rows: Vec<usize>,
}

impl EquationSet {
    fn unknowns(kappa: usize, steps: usize) -> usize {
        kappa + (kappa - 1) * (steps + 1)
    }

    fn index(&self, var: &BVar) -> Option<usize> {
        match var {
            BVar::Y(i) if *i <= 0 => Some((-i) as usize),
            BVar::Y(_) => None,
            BVar::Eta { m, node } => {
                Some(self.kappa + (m - 1) * (self.steps + 1) + node)
            }
        }
    }

    /// Adds the equation `comb = target`, moving the known adjoint samples
    /// (nodes >= 1) onto the right-hand side.
    fn push(
        &mut self,
        row: usize,
        comb: &super::Comb,
        target: &[f64],
        known: &[Vec<f64>],
    ) {
        for d in 0..self.n {
            self.rhs.set(row, d, target[d]);
        }
        for (c, var) in &comb.terms {
            match self.index(var) {
                Some(col) => {
                    self.a.set(row, col, self.a.get(row, col) + c);
                }
                None => {
                    let i = match var {
                        BVar::Y(i) => *i as usize,
                        BVar::Eta { .. } => unreachable!(),
                    };
                    for d in 0..self.n {
                        let cur = self.rhs.get(row, d);
                        self.rhs.set(row, d, cur - c * known[i - 1][d]);
                    }
                }
            }
        }
    }

    /// Row-equilibrated copy of the system with `replaced` leading gauge
    /// rows swapped in.
    fn build(&self, replaced: usize) -> (Matrix, Matrix) {
        let s = self.a.rows();
        let mut a = self.a.clone();
        let mut rhs = self.rhs.clone();
        for g in 1..=replaced {
            let row = self.gauge_rows[g - 1];
            for col in 0..s {
                a.set(row, col, 0.0);
            }
            let e0 = self.kappa + (g - 1) * (self.steps + 1);
            a.set(row, e0, 1.0);
            a.set(row, e0 + 1, -1.0);
            for d in 0..self.n {
                rhs.set(row, d, 0.0);
            }
        }
        for row in 0..s {
            let mut scale = 0.0f64;
            for col in 0..s {
                scale = scale.max(a.get(row, col).abs());
            }
            if scale > 0.0 {
                for col in 0..s {
                    a.set(row, col, a.get(row, col) / scale);
                }
                for d in 0..self.n {
                    rhs.set(row, d, rhs.get(row, d) / scale);
                }
            }
        }
        (a, rhs)
    }
}

/// Solves the boundary system for (node-0 sample, lead-in, eta) given the
/// chain multipliers p[j][k] and the initial-set aggregates gamma[j].
#[allow(clippy::type_complexity)]
pub(crate) fn dual_point_from_stationarity(
    kappa: usize,
    n: usize,
    grid: Grid,
    p: &[Vec<Vec<f64>>],
    gamma: &[Vec<f64>],
) -> Result<(Vec<Vec<f64>>, Vec<Vec<f64>>, Vec<Vec<Vec<f64>>>), TranscriptionError> {
    let steps = grid.steps();
    let h = grid.h();
    if steps + 1 < kappa {
        return Err(TranscriptionError::GridTooShort { steps, order: kappa - 1 });
    }
    let b = Builders::new(kappa, grid);

    // Known adjoint samples at nodes 1..=N.
    let known: Vec<Vec<f64>> = (0..steps).map(|k| p[kappa - 1][k].clone()).collect();

    // Stationarity targets. alpha[j][k] is the interval-k jump of the chain
    // multiplier for component j; beta[j] its node-0 variant including the
    // initial-set aggregate.
    let alpha = |j: usize, k: usize| -> Vec<f64> {
        (0..n)
            .map(|d| {
                let lower = if j > 0 { h * p[j - 1][k][d] } else { 0.0 };
                p[j][k - 1][d] - p[j][k][d] - lower
            })
            .collect()
    };
    let beta = |j: usize| -> Vec<f64> {
        (0..n)
            .map(|d| {
                let lower = if j > 0 { h * p[j - 1][0][d] } else { 0.0 };
                gamma[j][d] - p[j][0][d] - lower
            })
            .collect()
    };
    let target = |j: usize, k: usize| -> Vec<f64> {
        let raw = if k == 0 { beta(j) } else { alpha(j, k) };
        raw.iter().map(|v| v / h).collect()
    };

    let size = EquationSet::unknowns(kappa, steps);
    let mut set = EquationSet {
        kappa,
        steps,
        n,
        a: Matrix::zeros(size, size),
        rhs: Matrix::zeros(size, n),
        gauge_rows: Vec::new(),
    };

    let mut row = 0;
    for j in 1..kappa {
        for k in 0..steps {
            set.push(row, &b.slot(j, k), &target(j, k), &known);
            row += 1;
        }
    }
    for j in 1..kappa {
        set.push(row, &b.ghat3(j), &gamma[kappa - 1 - j], &known);
        row += 1;
    }
    let y0 = super::Comb { terms: vec![(1.0, BVar::Y(0))] };
    set.push(row, &y0, &gamma[kappa - 1], &known);
    row += 1;
    for k in 0..kappa - 1 {
        set.gauge_rows.push(row);
        set.push(row, &b.slot(0, k), &target(0, k), &known);
        row += 1;
    }
    debug_assert_eq!(row, size);

    // Factor, falling back to gauge rows while the system stays singular.
    let mut solution = None;
    for replaced in 0..kappa {
        let (a, rhs) = set.build(replaced);
        if let Some(lu) = lu_factor(&a, 1e-8) {
            solution = Some(lu.solve_matrix(&rhs));
            break;
        }
    }
    let sol = solution.ok_or_else(|| {
        TranscriptionError::Degenerate(
            "boundary system stayed singular after gauge fixing".into(),
        )
    })?;

    let read = |idx: usize| -> Vec<f64> { (0..n).map(|d| sol.get(idx, d)).collect() };
    let mut xstar = Vec::with_capacity(steps + 1);
    xstar.push(read(0));
    xstar.extend(known.iter().cloned());
    let lead_in: Vec<Vec<f64>> = (1..kappa).map(read).collect();
    let eta: Vec<Vec<Vec<f64>>> = (1..kappa)
        .map(|m| {
            (0..=steps)
                .map(|k| read(kappa + (m - 1) * (steps + 1) + k))
                .collect()
        })
        .collect();
    Ok((xstar, lead_in, eta))
}

/// Recovers the dual trajectory determined by an optimal primal solve.
///
/// The chain-row multipliers give the adjoint samples, the initial-set
/// multipliers give the boundary aggregates, and for the graph class the
/// interval multipliers (rescaled by 1/h) come along as well. The result
/// attains the same dual functional value as the primal optimum.
pub fn extract_dual_trajectory(
    problem: &MayerProblem,
    grid: Grid,
    sol: &LpSolution,
) -> Result<DualTrajectory, TranscriptionError> {
    let opt = match sol {
        LpSolution::Optimal(o) => o,
        LpSolution::Infeasible => {
            return Err(TranscriptionError::Infeasible(
                "cannot extract a dual trajectory from an infeasible solve".into(),
            ))
        }
        LpSolution::Unbounded { .. } => {
            return Err(TranscriptionError::Unbounded(
                "cannot extract a dual trajectory from an unbounded solve".into(),
            ))
        }
    };
    let t = transcribe_primal(problem, grid);
    let m = t.chain_multipliers(problem, opt);
    let n = problem.state_dim();
    let kappa = problem.kappa();
    let (xstar, lead_in, eta) =
        dual_point_from_stationarity(kappa, n, grid, &m.p, &m.gamma)?;
    let lambda = match problem.inclusion() {
        InclusionMap::Polyhedral2(_) => {
            let h = grid.h();
            Some(
                m.graph
                    .expect("graph multipliers present for the graph class")
                    .iter()
                    .map(|lk| lk.iter().map(|v| v / h).collect())
                    .collect(),
            )
        }
        InclusionMap::Semilinear(_) => None,
    };
    let traj = DualTrajectory::new(problem, grid, xstar, lead_in, eta, lambda)?;
    Ok(if m.degenerate { traj.mark_degenerate() } else { traj })
}
