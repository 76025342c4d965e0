//! Problem model and set-valued calculus for the two inclusion classes.
//!
//! A problem couples an inclusion map (semilinear of any order, or
//! polyhedral of order two), initial sets for the state and its derivatives,
//! and a max-affine terminal objective. The calculus consists of the
//! Hamiltonian, argmaximum membership, adjoint-map membership, the bilinear
//! graph infimum, and the symbolic adjoint system of the semilinear class.
//! Everything reduces to closed forms or small LPs.

use std::error::Error;
use std::fmt;

use crate::convex::{
    support_function, ConvexError, Extended, PiecewiseMaxAffine, Polytope, SupportValue,
};
use crate::numerics::{dot, norm_inf, solve_lp, LpProblem, LpSolution, Matrix};

/// Feasibility slack accepted when checking membership of given points.
const FEAS_TOL: f64 = 1e-8;

#[derive(Debug)]
pub enum DfiError {
    Convex(ConvexError),
    Dimension(String),
    Invalid(String),
    UndefinedArgmax,
    PointNotFeasible,
}

impl fmt::Display for DfiError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DfiError::Convex(e) => write!(f, "convex subproblem failed: {e}"),
            DfiError::Dimension(msg) => write!(f, "dimension mismatch: {msg}"),
            DfiError::Invalid(msg) => write!(f, "invalid problem: {msg}"),
            DfiError::UndefinedArgmax => write!(f, "argmaximum undefined: Hamiltonian is infinite"),
            DfiError::PointNotFeasible => write!(f, "point lies outside the inclusion value"),
        }
    }
}

impl Error for DfiError {}

impl From<ConvexError> for DfiError {
    fn from(e: ConvexError) -> Self {
        DfiError::Convex(e)
    }
}

impl From<crate::numerics::LpError> for DfiError {
    fn from(e: crate::numerics::LpError) -> Self {
        DfiError::Convex(ConvexError::Lp(e))
    }
}

/// F(x, v_1, .., v_{kappa-1}) = A_0 x + sum_j A_j v_j + B U with U compact.
#[derive(Clone, Debug)]
pub struct SemilinearMap {
    kappa: usize,
    n: usize,
    r: usize,
    a: Vec<Matrix>,
    b: Matrix,
    u: Polytope,
}

impl SemilinearMap {
    pub fn new(a: Vec<Matrix>, b: Matrix, u: Polytope) -> Result<Self, DfiError> {
        let kappa = a.len();
        if kappa == 0 {
            return Err(DfiError::Invalid("order must be at least one".into()));
        }
        let n = a[0].rows();
        for (j, aj) in a.iter().enumerate() {
            if aj.rows() != n || aj.cols() != n {
                return Err(DfiError::Dimension(format!(
                    "coefficient matrix {j} is {}x{}, expected {n}x{n}",
                    aj.rows(),
                    aj.cols()
                )));
            }
        }
        if b.rows() != n {
            return Err(DfiError::Dimension(format!(
                "control matrix has {} rows, expected {n}",
                b.rows()
            )));
        }
        let r = b.cols();
        if u.dim() != r {
            return Err(DfiError::Dimension(format!(
                "control set dim {} against control matrix cols {r}",
                u.dim()
            )));
        }
        if !u.is_bounded() {
            return Err(DfiError::Invalid("control set must be bounded".into()));
        }
        Ok(SemilinearMap { kappa, n, r, a, b, u })
    }

    pub fn kappa(&self) -> usize {
        self.kappa
    }

    pub fn state_dim(&self) -> usize {
        self.n
    }

    pub fn control_dim(&self) -> usize {
        self.r
    }

    pub fn coefficient(&self, j: usize) -> &Matrix {
        &self.a[j]
    }

    pub fn control_matrix(&self) -> &Matrix {
        &self.b
    }

    pub fn control_set(&self) -> &Polytope {
        &self.u
    }

    /// Drift term A_0 x + sum_j A_j v_j at the stacked point z.
    pub fn drift(&self, z: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.n];
        for (j, aj) in self.a.iter().enumerate() {
            let zj = &z[j * self.n..(j + 1) * self.n];
            let av = aj.mul_vec(zj);
            for (o, v) in out.iter_mut().zip(&av) {
                *o += v;
            }
        }
        out
    }
}

/// F(x, v_1) = {v : A x + B v_1 - C v <= d}, fixed at order two.
#[derive(Clone, Debug)]
pub struct PolyhedralMap2 {
    s: usize,
    n: usize,
    a: Matrix,
    b: Matrix,
    c: Matrix,
    d: Vec<f64>,
}

impl PolyhedralMap2 {
    /// The reference point (x, v1) is only used to certify that the map has
    /// a nonempty value somewhere.
    pub fn new(
        a: Matrix,
        b: Matrix,
        c: Matrix,
        d: Vec<f64>,
        reference: (&[f64], &[f64]),
    ) -> Result<Self, DfiError> {
        let s = a.rows();
        let n = a.cols();
        for (name, m) in [("second", &b), ("third", &c)] {
            if m.rows() != s || m.cols() != n {
                return Err(DfiError::Dimension(format!(
                    "{name} matrix is {}x{}, expected {s}x{n}",
                    m.rows(),
                    m.cols()
                )));
            }
        }
        if d.len() != s {
            return Err(DfiError::Dimension(format!(
                "right-hand side has {} entries, expected {s}",
                d.len()
            )));
        }
        let map = PolyhedralMap2 { s, n, a, b, c, d };
        let (x, v1) = reference;
        if x.len() != n || v1.len() != n {
            return Err(DfiError::Dimension(format!(
                "reference point dims {}/{} against state dim {n}",
                x.len(),
                v1.len()
            )));
        }
        let mut z = x.to_vec();
        z.extend_from_slice(v1);
        match map.value_lp(&z, &vec![0.0; n]) {
            Ok(LpSolution::Infeasible) => {
                Err(DfiError::Invalid("map value is empty at the reference point".into()))
            }
            Ok(_) => Ok(map),
            Err(e) => Err(e.into()),
        }
    }

    pub fn rows(&self) -> usize {
        self.s
    }

    pub fn state_dim(&self) -> usize {
        self.n
    }

    pub fn a(&self) -> &Matrix {
        &self.a
    }

    pub fn b(&self) -> &Matrix {
        &self.b
    }

    pub fn c(&self) -> &Matrix {
        &self.c
    }

    pub fn d(&self) -> &[f64] {
        &self.d
    }

    /// Row residuals A x + B v1 - C v - d at a stacked (z, v) point.
    pub fn residuals(&self, z: &[f64], v: &[f64]) -> Vec<f64> {
        let n = self.n;
        let ax = self.a.mul_vec(&z[..n]);
        let bv1 = self.b.mul_vec(&z[n..2 * n]);
        let cv = self.c.mul_vec(v);
        (0..self.s).map(|i| ax[i] + bv1[i] - cv[i] - self.d[i]).collect()
    }

    /// max <v, cost> over F(z) as an LP; cost 0 probes nonemptiness.
    fn value_lp(&self, z: &[f64], cost: &[f64]) -> Result<LpSolution, crate::numerics::LpError> {
        let n = self.n;
        let ax = self.a.mul_vec(&z[..n]);
        let bv1 = self.b.mul_vec(&z[n..2 * n]);
        let mut g = Matrix::zeros(self.s, n);
        let mut h = vec![0.0; self.s];
        for i in 0..self.s {
            for j in 0..n {
                g.set(i, j, -self.c.get(i, j));
            }
            h[i] = self.d[i] - ax[i] - bv1[i];
        }
        let lp = LpProblem::maximize(cost.to_vec(), g, h, Matrix::zeros(0, n), vec![]);
        solve_lp(&lp)
    }
}

/// The two inclusion classes the calculus supports; no other implementations
/// exist by design.
#[derive(Clone, Debug)]
pub enum InclusionMap {
    Semilinear(SemilinearMap),
    Polyhedral2(PolyhedralMap2),
}

impl InclusionMap {
    pub fn kappa(&self) -> usize {
        match self {
            InclusionMap::Semilinear(m) => m.kappa,
            InclusionMap::Polyhedral2(_) => 2,
        }
    }

    pub fn state_dim(&self) -> usize {
        match self {
            InclusionMap::Semilinear(m) => m.n,
            InclusionMap::Polyhedral2(m) => m.n,
        }
    }

    pub fn control_dim(&self) -> usize {
        match self {
            InclusionMap::Semilinear(m) => m.r,
            InclusionMap::Polyhedral2(_) => 0,
        }
    }
}

/// Terminal-cost problem over an inclusion with initial sets for the state
/// and each derivative up to order kappa-1.
#[derive(Clone, Debug)]
pub struct MayerProblem {
    inclusion: InclusionMap,
    q: Vec<Polytope>,
    phi: PiecewiseMaxAffine,
}

impl MayerProblem {
    pub fn new(
        inclusion: InclusionMap,
        q: Vec<Polytope>,
        phi: PiecewiseMaxAffine,
    ) -> Result<Self, DfiError> {
        let kappa = inclusion.kappa();
        let n = inclusion.state_dim();
        if q.len() != kappa {
            return Err(DfiError::Invalid(format!(
                "{} initial sets against order {kappa}",
                q.len()
            )));
        }
        for (j, qj) in q.iter().enumerate() {
            if qj.dim() != n {
                return Err(DfiError::Dimension(format!(
                    "initial set {j} has dim {}, expected {n}",
                    qj.dim()
                )));
            }
        }
        if phi.dim() != kappa * n {
            return Err(DfiError::Dimension(format!(
                "objective dim {} against stacked endpoint dim {}",
                phi.dim(),
                kappa * n
            )));
        }
        Ok(MayerProblem { inclusion, q, phi })
    }

    pub fn inclusion(&self) -> &InclusionMap {
        &self.inclusion
    }

    pub fn kappa(&self) -> usize {
        self.inclusion.kappa()
    }

    pub fn state_dim(&self) -> usize {
        self.inclusion.state_dim()
    }

    pub fn initial_set(&self, j: usize) -> &Polytope {
        &self.q[j]
    }

    pub fn objective(&self) -> &PiecewiseMaxAffine {
        &self.phi
    }
}

fn check_z_dim(f: &InclusionMap, z: &[f64]) -> Result<(), DfiError> {
    let want = f.kappa() * f.state_dim();
    if z.len() != want {
        return Err(DfiError::Dimension(format!(
            "stacked point has dim {}, expected {want}",
            z.len()
        )));
    }
    Ok(())
}

fn check_n_dim(f: &InclusionMap, name: &str, v: &[f64]) -> Result<(), DfiError> {
    if v.len() != f.state_dim() {
        return Err(DfiError::Dimension(format!(
            "{name} has dim {}, expected {}",
            v.len(),
            f.state_dim()
        )));
    }
    Ok(())
}

/// H_F(z, v*) = sup{<v, v*> : v in F(z)}.
pub fn hamiltonian(f: &InclusionMap, z: &[f64], vstar: &[f64]) -> Result<Extended, DfiError> {
    check_z_dim(f, z)?;
    check_n_dim(f, "dual direction", vstar)?;
    match f {
        InclusionMap::Semilinear(m) => {
            let mut value = dot(&m.drift(z), vstar);
            let btv = m.b.tr_mul_vec(vstar);
            match support_function(&m.u, &btv)? {
                SupportValue::Finite { value: w, .. } => value += w,
                // Unreachable: the control set is bounded by construction.
                SupportValue::Infinite => return Ok(Extended::PosInf),
            }
            Ok(Extended::Finite(value))
        }
        InclusionMap::Polyhedral2(m) => match m.value_lp(z, vstar)? {
            LpSolution::Optimal(opt) => Ok(Extended::Finite(opt.value)),
            LpSolution::Unbounded { .. } => Ok(Extended::PosInf),
            LpSolution::Infeasible => Ok(Extended::NegInf),
        },
    }
}

/// True iff v lies in F(z) within the feasibility tolerance.
pub fn inclusion_contains(f: &InclusionMap, z: &[f64], v: &[f64]) -> Result<bool, DfiError> {
    check_z_dim(f, z)?;
    check_n_dim(f, "velocity", v)?;
    match f {
        InclusionMap::Semilinear(m) => {
            // v - drift must be B u for some u in U: minimize the L1 gap.
            let drift = m.drift(z);
            let target: Vec<f64> = v.iter().zip(&drift).map(|(a, b)| a - b).collect();
            let n = m.n;
            let r = m.r;
            let gu = m.u.matrix();
            let mu = gu.rows();
            // Variables: u (r, free), splus (n), sminus (n).
            let nv = r + 2 * n;
            let mut cost = vec![0.0; nv];
            for c in cost.iter_mut().skip(r) {
                *c = 1.0;
            }
            let mut eq = Matrix::zeros(n, nv);
            for i in 0..n {
                for j in 0..r {
                    eq.set(i, j, m.b.get(i, j));
                }
                eq.set(i, r + i, 1.0);
                eq.set(i, r + n + i, -1.0);
            }
            let mut ineq = Matrix::zeros(mu + 2 * n, nv);
            let mut ineq_rhs = vec![0.0; mu + 2 * n];
            for i in 0..mu {
                for j in 0..r {
                    ineq.set(i, j, gu.get(i, j));
                }
                ineq_rhs[i] = m.u.rhs()[i];
            }
            for i in 0..2 * n {
                ineq.set(mu + i, r + i, -1.0);
            }
            let lp = LpProblem::minimize(cost, ineq, ineq_rhs, eq, target.clone());
            match solve_lp(&lp)? {
                LpSolution::Optimal(opt) => {
                    Ok(opt.value <= FEAS_TOL * (1.0 + norm_inf(&target)))
                }
                _ => Ok(false),
            }
        }
        InclusionMap::Polyhedral2(m) => {
            let res = m.residuals(z, v);
            Ok(res.iter().zip(&m.d).all(|(ri, di)| *ri <= FEAS_TOL * (1.0 + di.abs())))
        }
    }
}

/// True iff v in F(z) attains the Hamiltonian within tol.
pub fn argmax_contains(
    f: &InclusionMap,
    z: &[f64],
    v: &[f64],
    vstar: &[f64],
    tol: f64,
) -> Result<bool, DfiError> {
    let h = match hamiltonian(f, z, vstar)? {
        Extended::Finite(h) => h,
        _ => return Err(DfiError::UndefinedArgmax),
    };
    if !inclusion_contains(f, z, v)? {
        return Ok(false);
    }
    Ok(dot(v, vstar) >= h - tol * (1.0 + h.abs()))
}

/// True iff the candidate stacked vector (x*, v_1*, .., v_{kappa-1}*) lies
/// in the adjoint map at ((z, v), v*).
pub fn lam_contains(
    f: &InclusionMap,
    vstar: &[f64],
    z: &[f64],
    v: &[f64],
    candidate: &[f64],
    tol: f64,
) -> Result<bool, DfiError> {
    check_z_dim(f, z)?;
    check_z_dim(f, candidate)?;
    check_n_dim(f, "velocity", v)?;
    check_n_dim(f, "dual direction", vstar)?;
    if !inclusion_contains(f, z, v)? {
        return Err(DfiError::PointNotFeasible);
    }
    match f {
        InclusionMap::Semilinear(m) => {
            if !argmax_contains(f, z, v, vstar, tol)? {
                return Ok(false);
            }
            let band = tol * (1.0 + norm_inf(vstar));
            for j in 0..m.kappa {
                let want = m.a[j].tr_mul_vec(vstar);
                let got = &candidate[j * m.n..(j + 1) * m.n];
                if want.iter().zip(got).any(|(w, g)| (w - g).abs() > band) {
                    return Ok(false);
                }
            }
            Ok(true)
        }
        InclusionMap::Polyhedral2(m) => {
            // Find lambda >= 0 with -A^T lambda = x*, -B^T lambda = v1*,
            // -C^T lambda = v*, and complementarity with the row residuals,
            // all via one L1-slack feasibility LP.
            let n = m.n;
            let s = m.s;
            let res = m.residuals(z, v);
            let rows = 3 * n + 1;
            // Variables: lambda (s), splus (rows), sminus (rows).
            let nv = s + 2 * rows;
            let mut cost = vec![0.0; nv];
            for c in cost.iter_mut().skip(s) {
                *c = 1.0;
            }
            let mut eq = Matrix::zeros(rows, nv);
            let mut eq_rhs = vec![0.0; rows];
            for i in 0..n {
                for l in 0..s {
                    eq.set(i, l, m.a.get(l, i));
                    eq.set(n + i, l, m.b.get(l, i));
                    eq.set(2 * n + i, l, m.c.get(l, i));
                }
                eq_rhs[i] = -candidate[i];
                eq_rhs[n + i] = -candidate[n + i];
                eq_rhs[2 * n + i] = -vstar[i];
            }
            for (l, ri) in res.iter().enumerate() {
                eq.set(3 * n, l, *ri);
            }
            for i in 0..rows {
                eq.set(i, s + i, 1.0);
                eq.set(i, s + rows + i, -1.0);
            }
            let mut ineq = Matrix::zeros(nv, nv);
            for i in 0..nv {
                ineq.set(i, i, -1.0);
            }
            let lp = LpProblem::minimize(cost, ineq, vec![0.0; nv], eq, eq_rhs);
            match solve_lp(&lp)? {
                LpSolution::Optimal(opt) => {
                    let scale = 1.0 + norm_inf(vstar) + norm_inf(candidate);
                    Ok(opt.value <= tol * scale)
                }
                _ => Ok(false),
            }
        }
    }
}

/// Value of the graph infimum together with the LP multipliers that attain
/// it in the polyhedral case.
#[derive(Clone, Debug)]
pub struct MValue {
    pub value: Extended,
    pub lambda: Option<Vec<f64>>,
}

/// M_F(w*) = inf over gph F of <x,x*> + sum_j <v_j, v_j*> - <v, v*> with
/// w* = (x*, v_1*, .., v_{kappa-1}*, v*) stacked.
pub fn m_value(f: &InclusionMap, wstar: &[f64]) -> Result<MValue, DfiError> {
    let n = f.state_dim();
    let kappa = f.kappa();
    if wstar.len() != (kappa + 1) * n {
        return Err(DfiError::Dimension(format!(
            "stacked dual point has dim {}, expected {}",
            wstar.len(),
            (kappa + 1) * n
        )));
    }
    let vstar = &wstar[kappa * n..];
    match f {
        InclusionMap::Semilinear(m) => {
            // Finite only on the affine set where each slot matches A_j^T v*;
            // there the infimum is -W_U(B^T v*).
            let band = 1e-7 * (1.0 + norm_inf(vstar));
            for j in 0..kappa {
                let want = m.a[j].tr_mul_vec(vstar);
                let got = &wstar[j * n..(j + 1) * n];
                if want.iter().zip(got).any(|(w, g)| (w - g).abs() > band) {
                    return Ok(MValue { value: Extended::NegInf, lambda: None });
                }
            }
            let btv = m.b.tr_mul_vec(vstar);
            match support_function(&m.u, &btv)? {
                SupportValue::Finite { value, .. } => {
                    Ok(MValue { value: Extended::Finite(-value), lambda: None })
                }
                SupportValue::Infinite => Ok(MValue { value: Extended::NegInf, lambda: None }),
            }
        }
        InclusionMap::Polyhedral2(m) => {
            let s = m.s;
            // minimize <(x, v1, v), (x*, v1*, -v*)> over the graph rows.
            let mut cost = wstar[..2 * n].to_vec();
            cost.extend(vstar.iter().map(|v| -v));
            let mut g = Matrix::zeros(s, 3 * n);
            for i in 0..s {
                for j in 0..n {
                    g.set(i, j, m.a.get(i, j));
                    g.set(i, n + j, m.b.get(i, j));
                    g.set(i, 2 * n + j, -m.c.get(i, j));
                }
            }
            let lp = LpProblem::minimize_ineq(cost, g, m.d.clone());
            match solve_lp(&lp)? {
                LpSolution::Optimal(opt) => Ok(MValue {
                    value: Extended::Finite(opt.value),
                    lambda: Some(opt.ineq_multipliers),
                }),
                LpSolution::Unbounded { .. } => {
                    Ok(MValue { value: Extended::NegInf, lambda: None })
                }
                // The graph was certified nonempty at construction.
                LpSolution::Infeasible => {
                    Err(DfiError::Invalid("graph rows became infeasible".into()))
                }
            }
        }
    }
}

/// One signed, matrix-weighted derivative of the adjoint variable.
#[derive(Clone, Debug)]
pub struct AdjointTerm {
    /// +1 or -1.
    pub sign: f64,
    /// Derivative order of x* the term applies to.
    pub order: usize,
    /// Already-transposed coefficient.
    pub matrix: Matrix,
}

/// Symbolic adjoint data for a semilinear map: elimination formulas for each
/// eta_j and the kappa-th order ODE for x*.
#[derive(Clone, Debug)]
pub struct AdjointSystem {
    pub kappa: usize,
    /// eta[j-1] lists the terms of eta_j, j = 1..kappa-1.
    pub eta: Vec<Vec<AdjointTerm>>,
    /// Right-hand side terms of (-1)^kappa x*^(kappa) = sum of these.
    pub ode_rhs: Vec<AdjointTerm>,
}

/// eta_j = sum_{i=0}^{j-1} (-1)^i A_{kappa-j+i}^T x*^(i), and the ODE
/// (-1)^kappa x*^(kappa) = sum_j (-1)^j A_j^T x*^(j).
pub fn adjoint_system(f: &SemilinearMap) -> AdjointSystem {
    let kappa = f.kappa;
    let mut eta = Vec::with_capacity(kappa.saturating_sub(1));
    for j in 1..kappa {
        let mut terms = Vec::with_capacity(j);
        for i in 0..j {
            terms.push(AdjointTerm {
                sign: if i % 2 == 0 { 1.0 } else { -1.0 },
                order: i,
                matrix: f.a[kappa - j + i].transpose(),
            });
        }
        eta.push(terms);
    }
    let ode_rhs = (0..kappa)
        .map(|j| AdjointTerm {
            sign: if j % 2 == 0 { 1.0 } else { -1.0 },
            order: j,
            matrix: f.a[j].transpose(),
        })
        .collect();
    AdjointSystem { kappa, eta, ode_rhs }
}

fn subscript(i: usize) -> String {
    const DIGITS: [char; 10] = ['₀', '₁', '₂', '₃', '₄', '₅', '₆', '₇', '₈', '₉'];
    i.to_string()
        .chars()
        .map(|c| DIGITS[c.to_digit(10).unwrap() as usize])
        .collect()
}

fn derivative_mark(order: usize) -> String {
    match order {
        0 => String::new(),
        1 => "′".into(),
        2 => "″".into(),
        3 => "‴".into(),
        o => format!("⁽{o}⁾"),
    }
}

impl AdjointSystem {
    /// One-line rendering, e.g. "η₁* = A₁ᵀx*; x*″ = A₀ᵀx* − A₁ᵀx*′".
    pub fn render(&self) -> String {
        let mut parts = Vec::new();
        for (jm1, terms) in self.eta.iter().enumerate() {
            let j = jm1 + 1;
            let body = render_adjoint_terms(terms, |i| self.kappa - j + i);
            parts.push(format!("η{}* = {body}", subscript(j)));
        }
        let lhs = if self.kappa % 2 == 0 {
            format!("x*{}", derivative_mark(self.kappa))
        } else {
            format!("−x*{}", derivative_mark(self.kappa))
        };
        let body = render_adjoint_terms(&self.ode_rhs, |j| j);
        parts.push(format!("{lhs} = {body}"));
        parts.join("; ")
    }
}

fn render_adjoint_terms(terms: &[AdjointTerm], index_of: impl Fn(usize) -> usize) -> String {
    let mut out = String::new();
    for (pos, t) in terms.iter().enumerate() {
        if t.sign < 0.0 {
            out.push_str(if pos == 0 { "−" } else { " − " });
        } else if pos > 0 {
            out.push_str(" + ");
        }
        out.push_str(&format!("A{}ᵀx*{}", subscript(index_of(pos)), derivative_mark(t.order)));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn scalar_semilinear(a0: f64, b: f64, ulo: f64, uhi: f64) -> InclusionMap {
        let m = SemilinearMap::new(
            vec![Matrix::from_rows(&[vec![a0]])],
            Matrix::from_rows(&[vec![b]]),
            Polytope::from_bounds(&[ulo], &[uhi]).unwrap(),
        )
        .unwrap();
        InclusionMap::Semilinear(m)
    }

    fn halfline_polyhedral() -> InclusionMap {
        // F(x, v1) = {v : v >= x}, written as x - v <= 0.
        let m = PolyhedralMap2::new(
            Matrix::from_rows(&[vec![1.0]]),
            Matrix::from_rows(&[vec![0.0]]),
            Matrix::from_rows(&[vec![1.0]]),
            vec![0.0],
            (&[0.0], &[0.0]),
        )
        .unwrap();
        InclusionMap::Polyhedral2(m)
    }

    #[test]
    fn semilinear_hamiltonian_closed_form() {
        let f = scalar_semilinear(2.0, 1.0, -1.0, 1.0);
        assert_eq!(hamiltonian(&f, &[1.0], &[3.0]).unwrap(), Extended::Finite(9.0));
        assert_eq!(hamiltonian(&f, &[1.0], &[0.0]).unwrap(), Extended::Finite(0.0));
    }

    #[test]
    fn polyhedral_hamiltonian_by_lp() {
        let f = halfline_polyhedral();
        assert_eq!(hamiltonian(&f, &[2.0, 0.0], &[-1.0]).unwrap(), Extended::Finite(-2.0));
        assert_eq!(hamiltonian(&f, &[2.0, 0.0], &[1.0]).unwrap(), Extended::PosInf);
    }

    #[test]
    fn argmax_membership_matches_hand_values() {
        let f = scalar_semilinear(0.0, 1.0, -1.0, 1.0);
        assert!(argmax_contains(&f, &[0.0], &[1.0], &[2.0], 1e-8).unwrap());
        assert!(!argmax_contains(&f, &[0.0], &[0.0], &[2.0], 1e-8).unwrap());
        // Zero dual direction: every feasible point maximizes.
        assert!(argmax_contains(&f, &[0.0], &[-0.3], &[0.0], 1e-8).unwrap());
        assert!(!argmax_contains(&f, &[0.0], &[1.5], &[0.0], 1e-8).unwrap());
    }

    #[test]
    fn polyhedral_argmax_membership() {
        let f = halfline_polyhedral();
        assert!(argmax_contains(&f, &[2.0, 0.0], &[2.0], &[-1.0], 1e-8).unwrap());
        assert!(!argmax_contains(&f, &[2.0, 0.0], &[3.0], &[-1.0], 1e-8).unwrap());
        let err = argmax_contains(&f, &[2.0, 0.0], &[2.0], &[1.0], 1e-8).unwrap_err();
        assert!(matches!(err, DfiError::UndefinedArgmax));
    }

    #[test]
    fn semilinear_adjoint_map_membership() {
        let f = scalar_semilinear(2.0, 1.0, -1.0, 1.0);
        // H(0, 3) = 3, attained at v = 1; the only adjoint vector is 6.
        assert!(lam_contains(&f, &[3.0], &[0.0], &[1.0], &[6.0], 1e-7).unwrap());
        assert!(!lam_contains(&f, &[3.0], &[0.0], &[1.0], &[5.0], 1e-7).unwrap());
        // Off the argmaximum the adjoint map is empty.
        assert!(!lam_contains(&f, &[2.0], &[0.0], &[0.0], &[4.0], 1e-7).unwrap());
    }

    #[test]
    fn polyhedral_adjoint_map_membership() {
        let f = halfline_polyhedral();
        assert!(lam_contains(&f, &[-1.0], &[2.0, 0.0], &[2.0], &[-1.0, 0.0], 1e-7).unwrap());
        assert!(!lam_contains(&f, &[-1.0], &[2.0, 0.0], &[2.0], &[1.0, 0.0], 1e-7).unwrap());
        // Inactive row forces lambda = 0, killing nonzero candidates.
        assert!(!lam_contains(&f, &[0.0], &[2.0, 0.0], &[3.0], &[-1.0, 0.0], 1e-7).unwrap());
    }

    #[test]
    fn lam_membership_implies_argmax_membership() {
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        let f = scalar_semilinear(0.7, 1.0, -1.0, 1.0);
        for _ in 0..40 {
            let z = [rng.gen_range(-1.0..1.0)];
            let vstar = [rng.gen_range(-2.0..2.0)];
            let u = if vstar[0] >= 0.0 { 1.0 } else { -1.0 };
            let v = [0.7 * z[0] + u];
            let cand = [0.7 * vstar[0]];
            if lam_contains(&InclusionMap::Semilinear(match &f {
                InclusionMap::Semilinear(m) => m.clone(),
                _ => unreachable!(),
            }), &vstar, &z, &v, &cand, 1e-7)
            .unwrap()
            {
                assert!(argmax_contains(&f, &z, &v, &vstar, 1e-6).unwrap());
            }
        }
    }

    #[test]
    fn semilinear_graph_infimum_cases() {
        let f = scalar_semilinear(0.0, 1.0, -1.0, 1.0);
        let m = m_value(&f, &[0.0, 2.0]).unwrap();
        assert_eq!(m.value, Extended::Finite(-2.0));
        let m = m_value(&f, &[1.0, 2.0]).unwrap();
        assert_eq!(m.value, Extended::NegInf);
    }

    #[test]
    fn polyhedral_graph_infimum_matches_multipliers() {
        let f = halfline_polyhedral();
        let m = m_value(&f, &[-1.0, 0.0, -1.0]).unwrap();
        match m.value {
            Extended::Finite(v) => assert!(v.abs() < 1e-9),
            other => panic!("expected finite, got {other}"),
        }
        let lambda = m.lambda.unwrap();
        // Value equals -<d, lambda> with d = 0 here.
        assert!((lambda[0] - 1.0).abs() < 1e-9);
    }

    #[test]
    fn zero_dual_point_gives_zero_infimum() {
        let f = halfline_polyhedral();
        let m = m_value(&f, &[0.0, 0.0, 0.0]).unwrap();
        assert_eq!(m.value, Extended::Finite(0.0));
    }

    #[test]
    fn hamiltonian_is_concave_in_the_state() {
        let mut rng = ChaCha8Rng::seed_from_u64(37);
        let f = halfline_polyhedral();
        for _ in 0..60 {
            let z1 = [rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0)];
            let z2 = [rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0)];
            let theta: f64 = rng.gen_range(0.0..1.0);
            let zm = [
                theta * z1[0] + (1.0 - theta) * z2[0],
                theta * z1[1] + (1.0 - theta) * z2[1],
            ];
            let vstar = [-rng.gen_range(0.1..2.0)];
            let (h1, h2, hm) = (
                hamiltonian(&f, &z1, &vstar).unwrap(),
                hamiltonian(&f, &z2, &vstar).unwrap(),
                hamiltonian(&f, &zm, &vstar).unwrap(),
            );
            if let (Extended::Finite(a), Extended::Finite(b), Extended::Finite(m)) = (h1, h2, hm) {
                assert!(m >= theta * a + (1.0 - theta) * b - 1e-8);
            }
        }
    }

    #[test]
    fn graph_infimum_lower_bounds_the_bilinear_gap() {
        let mut rng = ChaCha8Rng::seed_from_u64(41);
        let f = scalar_semilinear(0.5, 1.0, -1.0, 1.0);
        for _ in 0..60 {
            let vstar = [rng.gen_range(-2.0..2.0)];
            let wstar = [0.5 * vstar[0], vstar[0]];
            let m = match m_value(&f, &wstar).unwrap().value {
                Extended::Finite(v) => v,
                _ => continue,
            };
            let z = [rng.gen_range(-2.0..2.0)];
            let h = match hamiltonian(&f, &z, &vstar).unwrap() {
                Extended::Finite(v) => v,
                _ => continue,
            };
            assert!(m <= z[0] * wstar[0] - h + 1e-8);
        }
    }

    #[test]
    fn adjoint_system_renders_known_orders() {
        let a0 = Matrix::from_rows(&[vec![0.0]]);
        let a1 = Matrix::from_rows(&[vec![1.0]]);
        let a2 = Matrix::from_rows(&[vec![2.0]]);
        let b = Matrix::from_rows(&[vec![1.0]]);
        let u = Polytope::from_bounds(&[-1.0], &[1.0]).unwrap();

        let k1 = SemilinearMap::new(vec![a0.clone()], b.clone(), u.clone()).unwrap();
        assert_eq!(adjoint_system(&k1).render(), "−x*′ = A₀ᵀx*");

        let k2 = SemilinearMap::new(vec![a0.clone(), a1.clone()], b.clone(), u.clone()).unwrap();
        assert_eq!(adjoint_system(&k2).render(), "η₁* = A₁ᵀx*; x*″ = A₀ᵀx* − A₁ᵀx*′");

        let k3 = SemilinearMap::new(vec![a0, a1, a2], b, u).unwrap();
        assert_eq!(
            adjoint_system(&k3).render(),
            "η₁* = A₂ᵀx*; η₂* = A₁ᵀx* − A₂ᵀx*′; −x*‴ = A₀ᵀx* − A₁ᵀx*′ + A₂ᵀx*″"
        );
    }

    #[test]
    fn problem_validation_counts_initial_sets() {
        let f = scalar_semilinear(0.0, 1.0, -1.0, 1.0);
        let phi = PiecewiseMaxAffine::affine(vec![1.0], 0.0);
        let q1 = Polytope::singleton(&[1.0]).unwrap();
        assert!(MayerProblem::new(f.clone(), vec![q1.clone()], phi.clone()).is_ok());
        let err = MayerProblem::new(f, vec![q1.clone(), q1], phi).unwrap_err();
        assert!(matches!(err, DfiError::Invalid(_)));
    }
}
