//! Two-phase revised simplex on dense data.
//!
//! Standard form: every variable is split into a nonnegative pair, each
//! inequality row gains a unit slack, rows are equilibrated by their largest
//! coefficient and flipped so the right-hand side is nonnegative. Phase 1
//! minimizes the sum of artificial variables over rows that lack a usable
//! slack in the initial basis; artificials are driven out (or their rows
//! deleted as redundant) before phase 2 prices only real columns.
//!
//! Pricing is Dantzig's rule, switching permanently to Bland's rule once
//! 3(m+n) degenerate pivots accumulate so termination stays guaranteed.
//! Ties break toward the lowest column index. The basis inverse is kept
//! explicitly and refactorized periodically.

use super::matrix::{dot, invert, norm_inf, Matrix};
use super::{LpError, LpProblem, LpSolution, LpTolerances, Optimum, Sense};

const REFACTOR_EVERY: usize = 64;

#[derive(Clone, Copy, PartialEq, Eq)]
enum ColKind {
    /// Positive half of original variable j.
    Plus(usize),
    /// Negative half of original variable j.
    Minus(usize),
    /// Slack of standard row i.
    Slack(usize),
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Basic {
    Real(usize),
    Artificial(usize),
}

#[derive(Clone, Copy)]
enum RowOrigin {
    Ineq(usize),
    Eq(usize),
}

struct Tableau {
    m: usize,
    /// Column-major real columns of the standard matrix.
    cols: Vec<Vec<f64>>,
    kind: Vec<ColKind>,
    /// Phase-2 objective per real column.
    cost: Vec<f64>,
    b: Vec<f64>,
    origin: Vec<RowOrigin>,
    /// Equilibration divisor per row (applied before flipping).
    scale: Vec<f64>,
    /// Row flip sign, +1 or -1.
    sigma: Vec<f64>,
    basis: Vec<Basic>,
    in_basis: Vec<bool>,
    binv: Matrix,
    xb: Vec<f64>,
    pivots_since_refactor: usize,
}

enum PhaseEnd {
    Optimal,
    Unbounded { entering: usize, direction: Vec<f64> },
}

pub(super) fn solve(lp: &LpProblem, tol: &LpTolerances) -> Result<LpSolution, LpError> {
    let n = lp.num_vars();
    let min_cost: Vec<f64> = match lp.sense {
        Sense::Min => lp.cost.clone(),
        Sense::Max => lp.cost.iter().map(|c| -c).collect(),
    };
    let mut t = build_tableau(lp, &min_cost);

    if t.basis.iter().any(|b| matches!(b, Basic::Artificial(_))) {
        let feas_budget = tol.feas * (1.0 + norm_inf(&t.b));
        match run_phase(&mut t, true, tol)? {
            PhaseEnd::Optimal => {}
            PhaseEnd::Unbounded { .. } => return Err(LpError::IterationLimit),
        }
        let infeas: f64 = t
            .basis
            .iter()
            .zip(&t.xb)
            .filter(|(b, _)| matches!(b, Basic::Artificial(_)))
            .map(|(_, v)| v.max(0.0))
            .sum();
        if infeas > feas_budget {
            return Ok(LpSolution::Infeasible);
        }
        drive_out_artificials(&mut t, tol)?;
    }

    match run_phase(&mut t, false, tol)? {
        PhaseEnd::Optimal => Ok(LpSolution::Optimal(extract_optimum(&t, lp, &min_cost, tol))),
        PhaseEnd::Unbounded { entering, direction } => {
            Ok(LpSolution::Unbounded { ray: recover_ray(&t, n, entering, &direction) })
        }
    }
}

fn build_tableau(lp: &LpProblem, min_cost: &[f64]) -> Tableau {
    let n = lp.num_vars();
    let m_ineq = lp.ineq.rows();
    let m = m_ineq + lp.eq.rows();

    let mut scale = vec![1.0; m];
    let mut sigma = vec![1.0; m];
    let mut origin = Vec::with_capacity(m);
    let mut rows: Vec<Vec<f64>> = Vec::with_capacity(m);
    let mut b = Vec::with_capacity(m);
    for i in 0..m {
        let (raw, rhs, org) = if i < m_ineq {
            (lp.ineq.row(i), lp.ineq_rhs[i], RowOrigin::Ineq(i))
        } else {
            (lp.eq.row(i - m_ineq), lp.eq_rhs[i - m_ineq], RowOrigin::Eq(i - m_ineq))
        };
        origin.push(org);
        let s = norm_inf(raw).max(1e-300).max(f64::MIN_POSITIVE);
        let s = if s < 1e-12 { 1.0 } else { s };
        scale[i] = s;
        let mut row: Vec<f64> = raw.iter().map(|v| v / s).collect();
        let mut rhs = rhs / s;
        if rhs < 0.0 {
            sigma[i] = -1.0;
            for v in row.iter_mut() {
                *v = -*v;
            }
            rhs = -rhs;
        }
        rows.push(row);
        b.push(rhs);
    }

    let ncols = 2 * n + m_ineq;
    let mut cols: Vec<Vec<f64>> = Vec::with_capacity(ncols);
    let mut kind = Vec::with_capacity(ncols);
    let mut cost = Vec::with_capacity(ncols);
    for j in 0..n {
        let col: Vec<f64> = (0..m).map(|i| rows[i][j]).collect();
        cols.push(col.clone());
        kind.push(ColKind::Plus(j));
        cost.push(min_cost[j]);
        cols.push(col.iter().map(|v| -v).collect());
        kind.push(ColKind::Minus(j));
        cost.push(-min_cost[j]);
    }
    for i in 0..m_ineq {
        let mut col = vec![0.0; m];
        col[i] = sigma[i];
        cols.push(col);
        kind.push(ColKind::Slack(i));
        cost.push(0.0);
    }

    let mut basis = Vec::with_capacity(m);
    let mut in_basis = vec![false; ncols];
    for i in 0..m {
        if i < m_ineq && sigma[i] > 0.0 {
            let col = 2 * n + i;
            basis.push(Basic::Real(col));
            in_basis[col] = true;
        } else {
            basis.push(Basic::Artificial(i));
        }
    }

    let xb = b.clone();
    Tableau {
        m,
        cols,
        kind,
        cost,
        b,
        origin,
        scale,
        sigma,
        basis,
        in_basis,
        binv: Matrix::identity(m),
        xb,
        pivots_since_refactor: 0,
    }
}

fn basic_cost(t: &Tableau, phase1: bool) -> Vec<f64> {
    t.basis
        .iter()
        .map(|b| match b {
            Basic::Real(c) => {
                if phase1 {
                    0.0
                } else {
                    t.cost[*c]
                }
            }
            Basic::Artificial(_) => {
                if phase1 {
                    1.0
                } else {
                    0.0
                }
            }
        })
        .collect()
}

/// y such that y^T = c_B^T B^{-1}.
fn dual_prices(t: &Tableau, cb: &[f64]) -> Vec<f64> {
    let mut y = vec![0.0; t.m];
    for (k, &c) in cb.iter().enumerate() {
        if c == 0.0 {
            continue;
        }
        let row = t.binv.row(k);
        for (yi, bi) in y.iter_mut().zip(row) {
            *yi += c * bi;
        }
    }
    y
}

fn run_phase(t: &mut Tableau, phase1: bool, tol: &LpTolerances) -> Result<PhaseEnd, LpError> {
    let ncols = t.cols.len();
    let cost_scale = if phase1 {
        1.0
    } else {
        1.0 + t.cost.iter().fold(0.0_f64, |m, c| m.max(c.abs()))
    };
    let enter_tol = tol.pivot * cost_scale;
    let degen_tol = tol.pivot.max(1e-11);
    let bland_after = 3 * (t.m + ncols);
    let iter_cap = 200 * (t.m + ncols) + 10_000;

    let mut degenerate_pivots = 0usize;
    let mut bland = false;

    for _ in 0..iter_cap {
        let cb = basic_cost(t, phase1);
        let y = dual_prices(t, &cb);

        // Pricing over nonbasic real columns.
        let mut entering: Option<(usize, f64)> = None;
        for j in 0..ncols {
            if t.in_basis[j] {
                continue;
            }
            let cj = if phase1 { 0.0 } else { t.cost[j] };
            let r = cj - dot(&y, &t.cols[j]);
            if r < -enter_tol {
                if bland {
                    entering = Some((j, r));
                    break;
                }
                match entering {
                    Some((_, best)) if best <= r => {}
                    _ => entering = Some((j, r)),
                }
            }
        }
        let (e, _) = match entering {
            Some(p) => p,
            None => return Ok(PhaseEnd::Optimal),
        };

        let d = t.binv.mul_vec(&t.cols[e]);

        // Ratio test in two passes: the first finds the tightest ratio, the
        // second picks the largest pivot element among rows whose basic
        // value would dip at most a feasibility slack below zero at that
        // step. Degenerate problems tie many rows at ratio zero, and taking
        // the stablest pivot there is what keeps the basis invertible.
        // Under Bland's rule the classic lowest-index tie break applies
        // instead so the termination guarantee stays intact.
        let mut theta_star: Option<f64> = None;
        for i in 0..t.m {
            if d[i] > tol.pivot {
                let theta = t.xb[i].max(0.0) / d[i];
                if theta_star.is_none_or(|best| theta < best) {
                    theta_star = Some(theta);
                }
            }
        }
        let theta_star = match theta_star {
            None => {
                if phase1 {
                    // Phase-1 objective is bounded below by zero; a missing
                    // ratio row means numerical breakdown.
                    return Err(LpError::IterationLimit);
                }
                return Ok(PhaseEnd::Unbounded { entering: e, direction: d });
            }
            Some(v) => v,
        };
        let mut leave: Option<(usize, f64)> = None;
        for i in 0..t.m {
            if d[i] <= tol.pivot {
                continue;
            }
            let num = t.xb[i].max(0.0);
            let qualifies = if bland {
                num / d[i] == theta_star
            } else {
                num - theta_star * d[i] <= tol.feas * (1.0 + num)
            };
            if !qualifies {
                continue;
            }
            let better = match leave {
                None => true,
                Some((li, ld)) => {
                    if bland {
                        basic_order(t.basis[i], ncols) < basic_order(t.basis[li], ncols)
                    } else {
                        d[i] > ld
                            || (d[i] == ld
                                && basic_order(t.basis[i], ncols) < basic_order(t.basis[li], ncols))
                    }
                }
            };
            if better {
                leave = Some((i, d[i]));
            }
        }
        let (r, _) = leave.expect("the tightest-ratio row qualifies in both modes");
        let theta = t.xb[r].max(0.0) / d[r];

        // A tiny pivot read off a stale inverse is the classic way a basis
        // goes singular; rebuild and re-price once before trusting it.
        if d[r] < 1e-6 && t.pivots_since_refactor > 0 {
            refactor(t, tol)?;
            continue;
        }

        if theta <= degen_tol {
            degenerate_pivots += 1;
            if degenerate_pivots > bland_after {
                bland = true;
            }
        }

        pivot(t, e, r, &d, theta);

        if t.pivots_since_refactor >= REFACTOR_EVERY {
            refactor(t, tol)?;
        }
    }
    Err(LpError::IterationLimit)
}

/// Deterministic total order used for ratio-test tie breaks.
fn basic_order(b: Basic, ncols: usize) -> usize {
    match b {
        Basic::Real(c) => c,
        Basic::Artificial(r) => ncols + r,
    }
}

fn pivot(t: &mut Tableau, entering: usize, r: usize, d: &[f64], theta: f64) {
    let p = d[r];
    // Update the inverse: row r scales by 1/p, others eliminate d_i.
    let prow: Vec<f64> = t.binv.row(r).iter().map(|v| v / p).collect();
    for i in 0..t.m {
        if i == r {
            continue;
        }
        let f = d[i];
        if f == 0.0 {
            continue;
        }
        let row = t.binv.row_mut(i);
        for (ri, pi) in row.iter_mut().zip(&prow) {
            *ri -= f * pi;
        }
    }
    t.binv.row_mut(r).copy_from_slice(&prow);

    for i in 0..t.m {
        if i != r {
            t.xb[i] -= theta * d[i];
            if t.xb[i] < 0.0 && t.xb[i] > -1e-11 {
                t.xb[i] = 0.0;
            }
        }
    }
    t.xb[r] = theta;

    if let Basic::Real(old) = t.basis[r] {
        t.in_basis[old] = false;
    }
    t.basis[r] = Basic::Real(entering);
    t.in_basis[entering] = true;
    t.pivots_since_refactor += 1;
}

fn refactor(t: &mut Tableau, tol: &LpTolerances) -> Result<(), LpError> {
    let mut bmat = Matrix::zeros(t.m, t.m);
    for (k, b) in t.basis.iter().enumerate() {
        match b {
            Basic::Real(c) => {
                for i in 0..t.m {
                    bmat.set(i, k, t.cols[*c][i]);
                }
            }
            Basic::Artificial(row) => bmat.set(*row, k, 1.0),
        }
    }
    t.binv = invert(&bmat, tol.pivot).ok_or(LpError::SingularBasis)?;
    t.xb = t.binv.mul_vec(&t.b);
    for v in t.xb.iter_mut() {
        if *v < 0.0 && *v > -1e-11 {
            *v = 0.0;
        }
    }
    t.pivots_since_refactor = 0;
    Ok(())
}

/// After a feasible phase 1: pivot basic artificials onto real columns, and
/// delete rows where no real pivot exists (those rows are redundant).
fn drive_out_artificials(t: &mut Tableau, tol: &LpTolerances) -> Result<(), LpError> {
    let ncols = t.cols.len();
    let mut dead_rows: Vec<usize> = Vec::new();
    for r in 0..t.m {
        if !matches!(t.basis[r], Basic::Artificial(_)) {
            continue;
        }
        // Largest eligible pivot element, for the same stability reason as
        // in the ratio test.
        let mut found: Option<(usize, f64)> = None;
        for j in 0..ncols {
            if t.in_basis[j] {
                continue;
            }
            let dr = dot(t.binv.row(r), &t.cols[j]);
            if dr.abs() > tol.pivot * 10.0 && found.is_none_or(|(_, best)| dr.abs() > best.abs()) {
                found = Some((j, dr));
            }
        }
        match found {
            Some((j, _)) => {
                let d = t.binv.mul_vec(&t.cols[j]);
                let theta = t.xb[r].max(0.0) / d[r];
                pivot(t, j, r, &d, theta);
            }
            None => dead_rows.push(r),
        }
    }
    if dead_rows.is_empty() {
        return refactor(t, tol);
    }

    let keep: Vec<usize> = (0..t.m).filter(|i| !dead_rows.contains(i)).collect();
    for col in t.cols.iter_mut() {
        *col = keep.iter().map(|&i| col[i]).collect();
    }
    t.b = keep.iter().map(|&i| t.b[i]).collect();
    t.origin = keep.iter().map(|&i| t.origin[i]).collect();
    t.scale = keep.iter().map(|&i| t.scale[i]).collect();
    t.sigma = keep.iter().map(|&i| t.sigma[i]).collect();
    // Slack columns keep their row coordinate through `ColKind::Slack(i)`
    // only via the stored column data, which we just filtered; the kind tag
    // refers to the original inequality index and is used for nothing but
    // bookkeeping, so it stays as is.
    let mut new_basis = Vec::with_capacity(keep.len());
    for (r, b) in t.basis.iter().enumerate() {
        if dead_rows.contains(&r) {
            debug_assert!(matches!(b, Basic::Artificial(_)));
            continue;
        }
        // Remaining artificials on kept rows keep their (re-indexed) row.
        let nb = match b {
            Basic::Artificial(row) => {
                let new_row = keep.iter().position(|&i| i == *row).expect("kept row");
                Basic::Artificial(new_row)
            }
            Basic::Real(c) => Basic::Real(*c),
        };
        new_basis.push(nb);
    }
    t.basis = new_basis;
    t.m = keep.len();
    refactor(t, tol)
}

fn extract_optimum(t: &Tableau, lp: &LpProblem, min_cost: &[f64], tol: &LpTolerances) -> Optimum {
    let n = lp.num_vars();
    // Clean basic values straight from the final inverse.
    let xb = t.binv.mul_vec(&t.b);

    let mut x = vec![0.0; n];
    let mut degenerate = false;
    let b_scale = 1.0 + norm_inf(&t.b);
    for (k, b) in t.basis.iter().enumerate() {
        let v = xb[k];
        if v.abs() <= tol.feas * b_scale {
            degenerate = true;
        }
        if let Basic::Real(c) = b {
            match t.kind[*c] {
                ColKind::Plus(j) => x[j] += v,
                ColKind::Minus(j) => x[j] -= v,
                ColKind::Slack(_) => {}
            }
        }
    }

    let value_min = dot(min_cost, &x);
    let value = match lp.sense {
        Sense::Min => value_min,
        Sense::Max => -value_min,
    };

    // Multipliers: y_std^T = c_B^T B^{-1} on the scaled, flipped rows; undo
    // the flip and the equilibration, then negate into the stated
    // convention (cost + G^T y + E^T w = 0 with y >= 0).
    let cb = basic_cost(t, false);
    let y_std = dual_prices(t, &cb);
    let mut ineq_multipliers = vec![0.0; lp.ineq.rows()];
    let mut eq_multipliers = vec![0.0; lp.eq.rows()];
    for i in 0..t.m {
        let v = -(t.sigma[i] * y_std[i] / t.scale[i]);
        match t.origin[i] {
            RowOrigin::Ineq(orig) => {
                ineq_multipliers[orig] = if v < 0.0 && v > -1e-11 { 0.0 } else { v };
            }
            RowOrigin::Eq(orig) => eq_multipliers[orig] = v,
        }
    }

    Optimum { x, value, ineq_multipliers, eq_multipliers, degenerate }
}

fn recover_ray(t: &Tableau, n: usize, entering: usize, d: &[f64]) -> Vec<f64> {
    let mut ray = vec![0.0; n];
    match t.kind[entering] {
        ColKind::Plus(j) => ray[j] += 1.0,
        ColKind::Minus(j) => ray[j] -= 1.0,
        ColKind::Slack(_) => {}
    }
    for (k, b) in t.basis.iter().enumerate() {
        if let Basic::Real(c) = b {
            match t.kind[*c] {
                ColKind::Plus(j) => ray[j] -= d[k],
                ColKind::Minus(j) => ray[j] += d[k],
                ColKind::Slack(_) => {}
            }
        }
    }
    let m = norm_inf(&ray);
    if m > 0.0 {
        for v in ray.iter_mut() {
            *v /= m;
        }
    }
    ray
}
