//! Numerical optimality certificates for a primal/dual trajectory pair.
//!
//! Each check measures the violation of one textbook optimality condition
//! with classical finite differences and the convex-analysis oracles, and
//! passes when the violation stays below an explicit tolerance. The checks
//! are deliberately independent of the transcriptions' internal stencils:
//! they would flag a dual arc produced by a buggy solver even though that
//! solver believes in it.

use std::error::Error;
use std::fmt;

use crate::convex::{
    conjugate_value, dual_cone_gap, subdifferential_distance, support_function, ConvexError,
    Extended, SupportValue,
};
use crate::dfi::{adjoint_system, DfiError, InclusionMap, MayerProblem};
use crate::numerics::{dot, LpError};
use crate::transcription::{
    evaluate_dual_objective, evaluate_primal_objective, finite_difference, solve_dual,
    solve_primal, DualTrajectory, Grid, PrimalTrajectory, TranscriptionError,
};

/// Weak duality must hold up to this absolute-plus-relative slack.
pub const WEAK_DUALITY_TOL: f64 = 1e-6;

/// Default certificate tolerance on a given grid: the discretization error
/// of the first-order scheme dominates rounding, so the tolerance tracks h.
pub fn default_tolerance(grid: Grid) -> f64 {
    (5.0 * grid.h()).max(1e-6)
}

#[derive(Debug)]
pub enum CertifyError {
    /// Trajectory pair does not match the problem.
    Shape(String),
    Transcription(TranscriptionError),
    Convex(ConvexError),
    Dfi(DfiError),
    Lp(LpError),
}

impl fmt::Display for CertifyError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CertifyError::Shape(s) => write!(f, "shape mismatch: {s}"),
            CertifyError::Transcription(e) => write!(f, "transcription: {e}"),
            CertifyError::Convex(e) => write!(f, "convex oracle: {e}"),
            CertifyError::Dfi(e) => write!(f, "inclusion oracle: {e}"),
            CertifyError::Lp(e) => write!(f, "linear program: {e}"),
        }
    }
}

impl Error for CertifyError {}

impl From<TranscriptionError> for CertifyError {
    fn from(e: TranscriptionError) -> Self {
        CertifyError::Transcription(e)
    }
}

impl From<ConvexError> for CertifyError {
    fn from(e: ConvexError) -> Self {
        CertifyError::Convex(e)
    }
}

impl From<DfiError> for CertifyError {
    fn from(e: DfiError) -> Self {
        CertifyError::Dfi(e)
    }
}

impl From<LpError> for CertifyError {
    fn from(e: LpError) -> Self {
        CertifyError::Lp(e)
    }
}

/// Outcome of a single certificate check.
#[derive(Debug, Clone)]
pub struct ConditionEntry {
    pub name: String,
    pub residual: f64,
    pub tolerance: f64,
    pub pass: bool,
    pub details: String,
}

impl ConditionEntry {
    fn new(name: &str, residual: f64, tolerance: f64, details: String) -> ConditionEntry {
        ConditionEntry {
            name: name.to_string(),
            residual,
            tolerance,
            pass: residual <= tolerance,
            details,
        }
    }
}

/// Full certificate: the individual checks, the evaluated duality gap, and
/// an overall verdict.
#[derive(Debug, Clone)]
pub struct CertificateReport {
    pub entries: Vec<ConditionEntry>,
    pub duality_gap: f64,
    pub pass: bool,
    pub degenerate_multipliers: bool,
}

fn vec_norm_inf(v: &[f64]) -> f64 {
    v.iter().fold(0.0f64, |a, x| a.max(x.abs()))
}

/// Adjoint equation residual. For the control class this is the sup norm of
/// the kappa-th order adjoint ODE over interior nodes plus the deviation of
/// the auxiliary chain from its elimination formulas; for the graph class,
/// the second-order multiplier ODE plus the consistency of x* with the
/// multiplier samples.
pub fn check_euler_lagrange(
    problem: &MayerProblem,
    dual: &DualTrajectory,
    tol: f64,
) -> Result<ConditionEntry, CertifyError> {
    let n = problem.state_dim();
    let kappa = problem.kappa();
    let grid = dual.grid();
    let steps = grid.steps();
    let h = grid.h();
    let xs = dual.adjoint_samples();

    match problem.inclusion() {
        InclusionMap::Semilinear(f) => {
            let mut d = Vec::with_capacity(kappa + 1);
            for order in 0..=kappa {
                d.push(finite_difference(xs, order, h)?);
            }
            let sys = adjoint_system(f);
            let lead = if kappa % 2 == 0 { 1.0 } else { -1.0 };

            let mut ode = 0.0f64;
            for k in 1..steps {
                let mut r: Vec<f64> = d[kappa][k].iter().map(|v| lead * v).collect();
                for term in &sys.ode_rhs {
                    let t = term.matrix.mul_vec(&d[term.order][k]);
                    for (ri, ti) in r.iter_mut().zip(&t) {
                        *ri -= term.sign * ti;
                    }
                }
                ode = ode.max(vec_norm_inf(&r));
            }

            // The first m nodes of auxiliary track m are boundary gauge: the
            // discrete stationarity system leaves them free up to summation
            // by parts constants, and the transversality combinations check
            // them instead.
            let mut chain = 0.0f64;
            for m in 1..kappa {
                for k in m..=steps {
                    let mut r = dual.eta(m, k).to_vec();
                    for term in &sys.eta[m - 1] {
                        let t = term.matrix.mul_vec(&d[term.order][k]);
                        for (ri, ti) in r.iter_mut().zip(&t) {
                            *ri -= term.sign * ti;
                        }
                    }
                    chain = chain.max(vec_norm_inf(&r));
                }
            }

            let residual = ode + chain;
            Ok(ConditionEntry::new(
                "euler_lagrange",
                residual,
                tol,
                format!("adjoint ode sup residual {ode:.3e}, auxiliary chain deviation {chain:.3e}"),
            ))
        }
        InclusionMap::Polyhedral2(f) => {
            let lambdas: Vec<Vec<f64>> = (0..steps)
                .map(|k| {
                    dual.lambda(k)
                        .map(|l| l.to_vec())
                        .ok_or_else(|| {
                            CertifyError::Shape("graph class needs interval multipliers".into())
                        })
                })
                .collect::<Result<_, _>>()?;
            let dl = finite_difference(&lambdas, 1, h)?;
            let d2l = finite_difference(&lambdas, 2, h)?;

            let mut ode = 0.0f64;
            for k in 1..steps.saturating_sub(1) {
                let mut r = f.c().tr_mul_vec(&d2l[k]);
                let bterm = f.b().tr_mul_vec(&dl[k]);
                let aterm = f.a().tr_mul_vec(&lambdas[k]);
                for i in 0..n {
                    r[i] += bterm[i] - aterm[i];
                }
                ode = ode.max(vec_norm_inf(&r));
            }

            let mut consistency = 0.0f64;
            for (k, lk) in lambdas.iter().enumerate() {
                let ct = f.c().tr_mul_vec(lk);
                let xk = dual.adjoint(k as isize);
                let dev = (0..n).fold(0.0f64, |a, i| a.max((xk[i] + ct[i]).abs()));
                consistency = consistency.max(dev);
            }

            let residual = ode + consistency;
            Ok(ConditionEntry::new(
                "euler_lagrange",
                residual,
                tol,
                format!(
                    "multiplier ode sup residual {ode:.3e}, adjoint consistency {consistency:.3e}"
                ),
            ))
        }
    }
}

/// Boundary conditions: at t = 0 each signed adjoint derivative must
/// support the matching initial set at the trajectory's starting point; at
/// t = 1 the endpoint argument must lie in the subdifferential of the
/// endpoint cost. The conjugate pairing residual at t = 1 is reported in
/// the details (it is infinite whenever the argument leaves the hull).
pub fn check_transversality(
    problem: &MayerProblem,
    traj: &PrimalTrajectory,
    dual: &DualTrajectory,
    tol: f64,
) -> Result<ConditionEntry, CertifyError> {
    let n = problem.state_dim();
    let kappa = problem.kappa();
    let grid = dual.grid();
    let steps = grid.steps();
    let h = grid.h();
    let xs = dual.adjoint_samples();

    let mut d = Vec::with_capacity(kappa);
    for order in 0..kappa {
        d.push(finite_difference(xs, order, h)?);
    }

    let mut start_gap = 0.0f64;
    let mut outside = false;
    for j in 0..kappa {
        let sign = if (j + 1) % 2 == 0 { 1.0 } else { -1.0 };
        let mut g: Vec<f64> = d[j][0].iter().map(|v| sign * v).collect();
        if j >= 1 {
            for (gi, ei) in g.iter_mut().zip(dual.eta(j, 0)) {
                *gi += ei;
            }
        }
        let q = problem.initial_set(kappa - 1 - j);
        let point = traj.state_part(0, kappa - 1 - j, n);
        match dual_cone_gap(q, point, &g) {
            Ok(gap) => start_gap = start_gap.max(gap),
            Err(ConvexError::PointOutsideSet) => {
                start_gap = f64::INFINITY;
                outside = true;
            }
            Err(e) => return Err(e.into()),
        }
    }

    let mut g1 = Vec::with_capacity(kappa * n);
    for l in 0..kappa {
        let j = kappa - 1 - l;
        let sign = if (kappa - l) % 2 == 0 { 1.0 } else { -1.0 };
        let base = d[j][steps].iter().map(|v| sign * v);
        if j >= 1 {
            g1.extend(base.zip(dual.eta(j, steps)).map(|(v, e)| v + e));
        } else {
            g1.extend(base);
        }
    }
    let zn = traj.state(steps);
    let hull_distance = subdifferential_distance(problem.objective(), zn, &g1)?;
    let pairing = match conjugate_value(problem.objective(), &g1)? {
        Extended::Finite(c) => (problem.objective().eval(zn) + c - dot(zn, &g1)).abs(),
        _ => f64::INFINITY,
    };

    let residual = start_gap.max(hull_distance);
    let note = if outside { " (a start component leaves its initial set)" } else { "" };
    Ok(ConditionEntry::new(
        "transversality",
        residual,
        tol,
        format!(
            "start cone gap {start_gap:.3e}, endpoint hull distance {hull_distance:.3e}, \
             endpoint pairing residual {pairing:.3e}{note}"
        ),
    ))
}

/// Pointwise pairing condition along the arc. For the control class the
/// control sample must attain the support of the control set in the
/// direction handed down by the adjoint; for the graph class the interval
/// multipliers must be nonnegative and complementary to the graph rows.
pub fn check_maximum_condition(
    problem: &MayerProblem,
    traj: &PrimalTrajectory,
    dual: &DualTrajectory,
    tol: f64,
) -> Result<ConditionEntry, CertifyError> {
    let grid = dual.grid();
    let steps = grid.steps();

    match problem.inclusion() {
        InclusionMap::Semilinear(f) => {
            // An excess over the support value is as bad as a shortfall: it
            // means the control sample left its admissible set.
            let mut residual = 0.0f64;
            for k in 0..steps {
                let p = f.control_matrix().tr_mul_vec(dual.adjoint(k as isize));
                let best = match support_function(f.control_set(), &p)? {
                    SupportValue::Finite { value, .. } => value,
                    SupportValue::Infinite => f64::INFINITY,
                };
                let attained = dot(traj.control(k), &p);
                residual = residual.max((best - attained).abs());
            }
            Ok(ConditionEntry::new(
                "maximum_condition",
                residual,
                tol,
                "largest support pairing mismatch of the control samples".into(),
            ))
        }
        InclusionMap::Polyhedral2(f) => {
            let mut pairing = 0.0f64;
            let mut negativity = 0.0f64;
            for k in 0..steps {
                let lk = dual.lambda(k).ok_or_else(|| {
                    CertifyError::Shape("graph class needs interval multipliers".into())
                })?;
                let res = f.residuals(traj.state(k), traj.derivative(k));
                pairing = pairing.max(dot(&res, lk).abs());
                negativity =
                    negativity.max(lk.iter().fold(0.0f64, |a, v| a.max((-v).max(0.0))));
            }
            let residual = pairing.max(negativity);
            Ok(ConditionEntry::new(
                "maximum_condition",
                residual,
                tol,
                format!(
                    "largest graph pairing {pairing:.3e}, multiplier negativity {negativity:.3e}"
                ),
            ))
        }
    }
}

/// Weak duality of the pair: the primal cost must not fall below the dual
/// functional beyond rounding. With `optimal_tol` set, the gap must also
/// close to within that tolerance, certifying joint optimality. Returns the
/// entry together with the signed gap (+inf when the dual value is -inf).
pub fn check_weak_duality(
    problem: &MayerProblem,
    traj: &PrimalTrajectory,
    dual: &DualTrajectory,
    optimal_tol: Option<f64>,
) -> Result<(ConditionEntry, f64), CertifyError> {
    let primal = evaluate_primal_objective(problem, traj);
    let dual_value = evaluate_dual_objective(problem, dual)?;
    let (gap, scale) = match dual_value {
        Extended::Finite(dv) => (primal - dv, 1.0 + primal.abs().max(dv.abs())),
        Extended::NegInf => (f64::INFINITY, 1.0 + primal.abs()),
        Extended::PosInf => {
            return Err(CertifyError::Shape(
                "dual functional cannot evaluate to +inf".into(),
            ))
        }
    };
    let violation = (-gap).max(0.0);
    let entry = match optimal_tol {
        None => {
            let tolerance = WEAK_DUALITY_TOL * scale;
            ConditionEntry::new(
                "weak_duality",
                violation,
                tolerance,
                format!("gap {gap:.6e} (primal {primal:.6e}, dual {dual_value})"),
            )
        }
        Some(t) => {
            let residual = if gap.is_finite() { gap.abs() } else { f64::INFINITY };
            ConditionEntry::new(
                "weak_duality",
                residual,
                t.max(WEAK_DUALITY_TOL * scale),
                format!("gap {gap:.6e} (primal {primal:.6e}, dual {dual_value})"),
            )
        }
    };
    Ok((entry, gap))
}

/// Runs every check at the given tolerance and aggregates the verdict.
pub fn certify(
    problem: &MayerProblem,
    traj: &PrimalTrajectory,
    dual: &DualTrajectory,
    tol: f64,
) -> Result<CertificateReport, CertifyError> {
    let mut entries = vec![
        check_euler_lagrange(problem, dual, tol)?,
        check_transversality(problem, traj, dual, tol)?,
        check_maximum_condition(problem, traj, dual, tol)?,
    ];
    let (wd, gap) = check_weak_duality(problem, traj, dual, Some(tol))?;
    entries.push(wd);
    let pass = entries.iter().all(|e| e.pass);
    Ok(CertificateReport {
        entries,
        duality_gap: gap,
        pass,
        degenerate_multipliers: dual.degenerate(),
    })
}

/// Distance between the primal and dual optimal values on a grid, each from
/// its own independent solve.
pub fn duality_gap(problem: &MayerProblem, grid: Grid) -> Result<f64, CertifyError> {
    let (_, primal) = solve_primal(problem, grid)?;
    let (_, dual) = solve_dual(problem, grid)?;
    Ok((primal - dual).abs())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::{double_integrator, integrator, third_order};
    use crate::numerics::{solve_lp, LpSolution};
    use crate::transcription::{extract_dual_trajectory, transcribe_primal};

    fn optimal_pair(
        problem: &MayerProblem,
        steps: usize,
    ) -> (Grid, PrimalTrajectory, DualTrajectory) {
        let grid = Grid::new(steps).unwrap();
        let t = transcribe_primal(problem, grid);
        let sol = solve_lp(&t.lp).unwrap();
        let dual = extract_dual_trajectory(problem, grid, &sol).unwrap();
        let opt = match sol {
            LpSolution::Optimal(o) => o,
            _ => panic!("fixture problems are solvable"),
        };
        let traj = t.unpack(problem, &opt).unwrap();
        (grid, traj, dual)
    }

    #[test]
    fn integrator_certificate_passes() {
        let p = integrator(1.0);
        let (grid, traj, dual) = optimal_pair(&p, 16);
        let report = certify(&p, &traj, &dual, default_tolerance(grid)).unwrap();
        assert!(report.pass, "{:#?}", report);
        assert!(report.duality_gap.abs() <= 1e-9);
    }

    #[test]
    fn double_integrator_certificate_passes() {
        let p = double_integrator();
        let (grid, traj, dual) = optimal_pair(&p, 16);
        let report = certify(&p, &traj, &dual, default_tolerance(grid)).unwrap();
        assert!(report.pass, "{:#?}", report);
    }

    #[test]
    fn third_order_certificate_passes() {
        let p = third_order();
        let (grid, traj, dual) = optimal_pair(&p, 32);
        let report = certify(&p, &traj, &dual, default_tolerance(grid)).unwrap();
        assert!(report.pass, "{:#?}", report);
    }

    #[test]
    fn independent_solves_close_the_gap() {
        for (p, steps) in
            [(integrator(1.0), 8usize), (double_integrator(), 8), (third_order(), 8)]
        {
            let gap = duality_gap(&p, Grid::new(steps).unwrap()).unwrap();
            assert!(gap <= 1e-8, "gap {gap}");
        }
    }

    #[test]
    fn perturbed_adjoint_fails_a_check() {
        let p = integrator(1.0);
        let (grid, traj, dual) = optimal_pair(&p, 16);
        let tol = default_tolerance(grid);
        let mut xstar: Vec<Vec<f64>> = dual.adjoint_samples().to_vec();
        let bump = 100.0 * tol;
        let mid = xstar.len() / 2;
        xstar[mid][0] += bump;
        let mutated =
            DualTrajectory::new(&p, grid, xstar, Vec::new(), Vec::new(), None).unwrap();
        let report = certify(&p, &traj, &mutated, tol).unwrap();
        assert!(!report.pass);
        assert!(report.entries.iter().any(|e| !e.pass));
    }

    #[test]
    fn scaled_multipliers_fail_a_check() {
        let p = double_integrator();
        let (grid, traj, dual) = optimal_pair(&p, 16);
        let tol = default_tolerance(grid);
        let lambda: Vec<Vec<f64>> = (0..grid.steps())
            .map(|k| dual.lambda(k).unwrap().iter().map(|v| 2.0 * v).collect())
            .collect();
        let mutated = DualTrajectory::new(
            &p,
            grid,
            dual.adjoint_samples().to_vec(),
            vec![dual.adjoint(-1).to_vec()],
            dual.eta_tracks().to_vec(),
            Some(lambda),
        )
        .unwrap();
        let report = certify(&p, &traj, &mutated, tol).unwrap();
        assert!(!report.pass);
    }

    #[test]
    fn suboptimal_pair_keeps_weak_duality_but_not_the_gap() {
        // Feasible arc that stays at x = 1 with u = 0: cost 1, far from the
        // optimal 0.
        let p = integrator(1.0);
        let grid = Grid::new(8).unwrap();
        let (_, _, dual) = optimal_pair(&p, 8);
        let z: Vec<Vec<f64>> = (0..=8).map(|_| vec![1.0]).collect();
        let v: Vec<Vec<f64>> = (0..8).map(|_| vec![0.0]).collect();
        let u: Vec<Vec<f64>> = (0..8).map(|_| vec![0.0]).collect();
        let traj = PrimalTrajectory::new(&p, grid, z, v, u).unwrap();
        let (weak, gap) = check_weak_duality(&p, &traj, &dual, None).unwrap();
        assert!(weak.pass);
        assert!((gap - 1.0).abs() <= 1e-8);
        let (strict, _) = check_weak_duality(&p, &traj, &dual, Some(1e-6)).unwrap();
        assert!(!strict.pass);
    }
}
