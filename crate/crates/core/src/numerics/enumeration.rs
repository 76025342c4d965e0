//! Vertex enumeration and an enumeration-backed LP solver.
//!
//! This is the slow, simple route used to cross-check the simplex path. It
//! never calls into the simplex code: vertices come from solving every
//! n-subset of active rows by LU factorization, and optimization means
//! taking the minimum over vertices after equality rows are eliminated and
//! lineality directions are quotiented away. Feasibility and boundedness
//! questions reduce to enumerating small auxiliary polytopes, so the whole
//! module stays LP-free.

use super::matrix::{dot, lu_factor, norm_inf, reduce_system, row_space_basis, Matrix};
use super::{LpError, LpProblem, LpSolution, Optimum, Sense};

const MAX_SUBSETS: f64 = 1e6;
const RECESSION_SUBSETS: f64 = 2e5;
const PIVOT_TOL: f64 = 1e-9;
const FEAS_TOL: f64 = 1e-8;

fn subset_count(m: usize, n: usize) -> f64 {
    if n > m {
        return 0.0;
    }
    let mut c = 1.0f64;
    for i in 0..n {
        c = c * (m - i) as f64 / (i + 1) as f64;
        if c > 1e18 {
            return c;
        }
    }
    c
}

/// Iterate lexicographic n-subsets of 0..m via an index vector.
struct Subsets {
    idx: Vec<usize>,
    m: usize,
    started: bool,
}

impl Subsets {
    fn new(m: usize, n: usize) -> Self {
        Subsets { idx: (0..n).collect(), m, started: false }
    }

    fn next_subset(&mut self) -> Option<&[usize]> {
        let n = self.idx.len();
        if n > self.m {
            return None;
        }
        if !self.started {
            self.started = true;
            return Some(&self.idx);
        }
        // Advance the rightmost index that can still move.
        let mut i = n;
        loop {
            if i == 0 {
                return None;
            }
            i -= 1;
            if self.idx[i] < self.m - (n - i) {
                self.idx[i] += 1;
                for k in i + 1..n {
                    self.idx[k] = self.idx[k - 1] + 1;
                }
                return Some(&self.idx);
            }
        }
    }
}

/// All vertices of {x : g x <= h}, deduplicated, in first-found order.
///
/// The polytope must be bounded; unboundedness is reported when the cheap
/// certificates at hand detect it (rank deficiency always, a nonzero
/// recession direction when the auxiliary enumeration is small enough).
pub fn enumerate_vertices(g: &Matrix, h: &[f64]) -> Result<Vec<Vec<f64>>, LpError> {
    let m = g.rows();
    let n = g.cols();
    if h.len() != m {
        return Err(LpError::Shape(format!(
            "inequality rhs has {} entries for {} rows",
            h.len(),
            m
        )));
    }
    if n == 0 {
        return Ok(vec![vec![]]);
    }
    if subset_count(m, n) > MAX_SUBSETS {
        return Err(LpError::TooLargeForEnumeration { rows: m, dim: n });
    }
    let scale = 1.0 + g.max_abs();
    if rank_of(g) < n {
        return Err(LpError::UnboundedPolytope);
    }
    if let Some(dir) = recession_direction(g, n, scale) {
        let _ = dir;
        return Err(LpError::UnboundedPolytope);
    }

    let h_scale = 1.0 + norm_inf(h);
    let mut verts: Vec<Vec<f64>> = Vec::new();
    let mut subsets = Subsets::new(m, n);
    while let Some(rows) = subsets.next_subset() {
        let mut a = Matrix::zeros(n, n);
        let mut rhs = vec![0.0; n];
        for (k, &r) in rows.iter().enumerate() {
            for j in 0..n {
                a.set(k, j, g.get(r, j));
            }
            rhs[k] = h[r];
        }
        let lu = match lu_factor(&a, PIVOT_TOL * scale) {
            Some(f) => f,
            None => continue,
        };
        let x = lu.solve(&rhs);
        if !x.iter().all(|v| v.is_finite()) {
            continue;
        }
        let mut feasible = true;
        for i in 0..m {
            if dot(g.row(i), &x) > h[i] + FEAS_TOL * h_scale * (1.0 + norm_inf(&x)) {
                feasible = false;
                break;
            }
        }
        if !feasible {
            continue;
        }
        let vtol = 1e-7 * (1.0 + norm_inf(&x));
        if !verts.iter().any(|v| close(v, &x, vtol)) {
            verts.push(x);
        }
    }
    Ok(verts)
}

fn close(a: &[f64], b: &[f64], tol: f64) -> bool {
    a.iter().zip(b).all(|(x, y)| (x - y).abs() <= tol)
}

fn rank_of(g: &Matrix) -> usize {
    let zero = Matrix::zeros(g.rows(), 1);
    reduce_system(g, &zero, 1e-10).rank()
}

/// Search {g d <= 0, -1 <= d <= 1} for a vertex with d != 0. Returns such a
/// direction if the auxiliary enumeration is affordable, None otherwise
/// (which callers treat as "no unboundedness detected").
fn recession_direction(g: &Matrix, n: usize, scale: f64) -> Option<Vec<f64>> {
    let m = g.rows();
    if subset_count(m + 2 * n, n) > RECESSION_SUBSETS {
        return None;
    }
    let mut aug = Matrix::zeros(m + 2 * n, n);
    let mut rhs = vec![0.0; m + 2 * n];
    for i in 0..m {
        for j in 0..n {
            aug.set(i, j, g.get(i, j));
        }
    }
    for j in 0..n {
        aug.set(m + j, j, 1.0);
        rhs[m + j] = 1.0;
        aug.set(m + n + j, j, -1.0);
        rhs[m + n + j] = 1.0;
    }
    let mut subsets = Subsets::new(m + 2 * n, n);
    while let Some(rows) = subsets.next_subset() {
        let mut a = Matrix::zeros(n, n);
        let mut b = vec![0.0; n];
        for (k, &r) in rows.iter().enumerate() {
            for j in 0..n {
                a.set(k, j, aug.get(r, j));
            }
            b[k] = rhs[r];
        }
        let lu = match lu_factor(&a, PIVOT_TOL * scale) {
            Some(f) => f,
            None => continue,
        };
        let d = lu.solve(&b);
        if !d.iter().all(|v| v.is_finite()) {
            continue;
        }
        if norm_inf(&d) <= 1e-7 {
            continue;
        }
        let feasible = (0..m + 2 * n).all(|i| dot(aug.row(i), &d) <= rhs[i] + FEAS_TOL);
        if feasible && (0..m).all(|i| dot(g.row(i), &d) <= FEAS_TOL) {
            return Some(d);
        }
    }
    None
}

/// Solve an LP by exhaustive geometry instead of pivoting.
///
/// Equality rows are eliminated onto their solution manifold, lineality
/// directions of the reduced feasible set are quotiented away, and the
/// optimum is read off the surviving vertex list. Multiplier vectors in the
/// result are empty: this route reports primal data only.
pub fn solve_lp_by_enumeration(lp: &LpProblem) -> Result<LpSolution, LpError> {
    lp.validate()?;
    let n = lp.num_vars();
    let min_cost: Vec<f64> = match lp.sense {
        Sense::Min => lp.cost.clone(),
        Sense::Max => lp.cost.iter().map(|c| -c).collect(),
    };

    // Step 1: eliminate equality rows. x = x0 + Z t with Z a null basis.
    let (x0, z) = if lp.eq.rows() > 0 {
        let mut rhs = Matrix::zeros(lp.eq.rows(), 1);
        for i in 0..lp.eq.rows() {
            rhs.set(i, 0, lp.eq_rhs[i]);
        }
        let sys = reduce_system(&lp.eq, &rhs, 1e-10);
        match sys.particular_solution() {
            None => return Ok(LpSolution::Infeasible),
            Some(x0) => (x0.column(0), sys.null_basis()),
        }
    } else {
        (vec![0.0; n], Matrix::identity(n))
    };
    let nf = z.cols();

    let m = lp.ineq.rows();
    let mut g1 = Matrix::zeros(m, nf);
    let mut h1 = vec![0.0; m];
    for i in 0..m {
        let row = lp.ineq.row(i);
        for j in 0..nf {
            let mut s = 0.0;
            for k in 0..n {
                s += row[k] * z.get(k, j);
            }
            g1.set(i, j, s);
        }
        h1[i] = lp.ineq_rhs[i] - dot(row, &x0);
    }
    let mut c1 = vec![0.0; nf];
    for j in 0..nf {
        let mut s = 0.0;
        for k in 0..n {
            s += min_cost[k] * z.get(k, j);
        }
        c1[j] = s;
    }
    let constant = dot(&min_cost, &x0);

    if nf == 0 {
        let h_scale = 1.0 + norm_inf(&lp.ineq_rhs);
        let feasible = (0..m).all(|i| h1[i] >= -FEAS_TOL * h_scale);
        return Ok(if feasible {
            LpSolution::Optimal(finish(lp, x0, constant))
        } else {
            LpSolution::Infeasible
        });
    }

    // Step 2: quotient lineality directions of {g1 t <= h1}.
    let zero = Matrix::zeros(m.max(1), 1);
    let g1_for_null = if m == 0 { Matrix::zeros(1, nf) } else { g1.clone() };
    let lin = reduce_system(&g1_for_null, &zero, 1e-10).null_basis();
    let c_scale = 1.0 + norm_inf(&c1);
    for j in 0..lin.cols() {
        let d: Vec<f64> = (0..nf).map(|k| lin.get(k, j)).collect();
        let slope = dot(&c1, &d);
        if slope.abs() > 1e-9 * c_scale {
            // Cost is unbounded along a free line as soon as the set is
            // nonempty; emptiness would need g1 t <= h1 infeasible, which a
            // consistent lineality space cannot cause on its own, so decide
            // feasibility on the quotient below only if needed.
            let sgn = if slope < 0.0 { 1.0 } else { -1.0 };
            if is_reduced_feasible(&g1, &h1) {
                let mut ray = vec![0.0; n];
                for k in 0..n {
                    let mut s = 0.0;
                    for t in 0..nf {
                        s += z.get(k, t) * d[t] * sgn;
                    }
                    ray[k] = s;
                }
                let mx = norm_inf(&ray);
                if mx > 0.0 {
                    for v in ray.iter_mut() {
                        *v /= mx;
                    }
                }
                return Ok(LpSolution::Unbounded { ray: orient_ray(lp, ray) });
            }
            return Ok(LpSolution::Infeasible);
        }
    }

    // Step 3: restrict to the row space, where the feasible set is pointed.
    let r = row_space_basis(&g1_for_null, 1e-10);
    let np = r.cols();
    if np == 0 {
        // No effective constraints and no cost slope: any point works.
        return Ok(LpSolution::Optimal(finish(lp, x0, constant)));
    }
    let mut g2 = Matrix::zeros(m, np);
    for i in 0..m {
        for j in 0..np {
            let mut s = 0.0;
            for k in 0..nf {
                s += g1.get(i, k) * r.get(k, j);
            }
            g2.set(i, j, s);
        }
    }
    let mut c2 = vec![0.0; np];
    for j in 0..np {
        let mut s = 0.0;
        for k in 0..nf {
            s += c1[k] * r.get(k, j);
        }
        c2[j] = s;
    }

    if subset_count(m, np) > MAX_SUBSETS {
        return Err(LpError::TooLargeForEnumeration { rows: m, dim: np });
    }

    // Recession cone of the pointed quotient: extreme directions show up as
    // nonzero vertices of the cone boxed to [-1, 1]^np.
    let scale = 1.0 + g2.max_abs();
    if let Some(d) = recession_direction(&g2, np, scale) {
        let slope = dot(&c2, &d);
        let verts = vertices_raw(&g2, &h1)?;
        if verts.is_empty() {
            return Ok(LpSolution::Infeasible);
        }
        if slope < -1e-9 * c_scale || {
            // Some extreme ray may still descend even if this one does not;
            // check them all by enumerating the boxed cone's vertices.
            descending_ray_exists(&g2, &c2, np, scale, c_scale)
        } {
            let d = best_descending_ray(&g2, &c2, np, scale, c_scale).unwrap_or(d);
            let mut ray = vec![0.0; n];
            for k in 0..n {
                let mut s = 0.0;
                for t in 0..nf {
                    let mut rt = 0.0;
                    for q in 0..np {
                        rt += r.get(t, q) * d[q];
                    }
                    s += z.get(k, t) * rt;
                }
                ray[k] = s;
            }
            let mx = norm_inf(&ray);
            if mx > 0.0 {
                for v in ray.iter_mut() {
                    *v /= mx;
                }
            }
            return Ok(LpSolution::Unbounded { ray });
        }
        // All recession directions are level or ascending: the minimum is
        // attained on the vertex set.
        return Ok(LpSolution::Optimal(pick_best(lp, &verts, &c2, &r, &z, &x0, constant)));
    }

    let verts = vertices_raw(&g2, &h1)?;
    if verts.is_empty() {
        return Ok(LpSolution::Infeasible);
    }
    Ok(LpSolution::Optimal(pick_best(lp, &verts, &c2, &r, &z, &x0, constant)))
}

/// Vertices of {g x <= h} without the boundedness precheck (callers have
/// already classified the recession cone).
fn vertices_raw(g: &Matrix, h: &[f64]) -> Result<Vec<Vec<f64>>, LpError> {
    let m = g.rows();
    let n = g.cols();
    if subset_count(m, n) > MAX_SUBSETS {
        return Err(LpError::TooLargeForEnumeration { rows: m, dim: n });
    }
    let scale = 1.0 + g.max_abs();
    let h_scale = 1.0 + norm_inf(h);
    let mut verts: Vec<Vec<f64>> = Vec::new();
    let mut subsets = Subsets::new(m, n);
    while let Some(rows) = subsets.next_subset() {
        let mut a = Matrix::zeros(n, n);
        let mut rhs = vec![0.0; n];
        for (k, &r) in rows.iter().enumerate() {
            for j in 0..n {
                a.set(k, j, g.get(r, j));
            }
            rhs[k] = h[r];
        }
        let lu = match lu_factor(&a, PIVOT_TOL * scale) {
            Some(f) => f,
            None => continue,
        };
        let x = lu.solve(&rhs);
        if !x.iter().all(|v| v.is_finite()) {
            continue;
        }
        let mut feasible = true;
        for i in 0..m {
            if dot(g.row(i), &x) > h[i] + FEAS_TOL * h_scale * (1.0 + norm_inf(&x)) {
                feasible = false;
                break;
            }
        }
        if !feasible {
            continue;
        }
        let vtol = 1e-7 * (1.0 + norm_inf(&x));
        if !verts.iter().any(|v| close(v, &x, vtol)) {
            verts.push(x);
        }
    }
    Ok(verts)
}

fn descending_ray_exists(g: &Matrix, c: &[f64], n: usize, scale: f64, c_scale: f64) -> bool {
    best_descending_ray(g, c, n, scale, c_scale).is_some()
}

fn best_descending_ray(
    g: &Matrix,
    c: &[f64],
    n: usize,
    scale: f64,
    c_scale: f64,
) -> Option<Vec<f64>> {
    let m = g.rows();
    if subset_count(m + 2 * n, n) > RECESSION_SUBSETS {
        return None;
    }
    let mut aug = Matrix::zeros(m + 2 * n, n);
    let mut rhs = vec![0.0; m + 2 * n];
    for i in 0..m {
        for j in 0..n {
            aug.set(i, j, g.get(i, j));
        }
    }
    for j in 0..n {
        aug.set(m + j, j, 1.0);
        rhs[m + j] = 1.0;
        aug.set(m + n + j, j, -1.0);
        rhs[m + n + j] = 1.0;
    }
    let mut best: Option<(f64, Vec<f64>)> = None;
    let mut subsets = Subsets::new(m + 2 * n, n);
    while let Some(rows) = subsets.next_subset() {
        let mut a = Matrix::zeros(n, n);
        let mut b = vec![0.0; n];
        for (k, &r) in rows.iter().enumerate() {
            for j in 0..n {
                a.set(k, j, aug.get(r, j));
            }
            b[k] = rhs[r];
        }
        let lu = match lu_factor(&a, PIVOT_TOL * scale) {
            Some(f) => f,
            None => continue,
        };
        let d = lu.solve(&b);
        if !d.iter().all(|v| v.is_finite()) || norm_inf(&d) <= 1e-7 {
            continue;
        }
        if !(0..m).all(|i| dot(g.row(i), &d) <= FEAS_TOL) {
            continue;
        }
        if !(0..2 * n).all(|i| dot(aug.row(m + i), &d) <= rhs[m + i] + FEAS_TOL) {
            continue;
        }
        let slope = dot(c, &d);
        if slope < -1e-9 * c_scale {
            match &best {
                Some((s, _)) if *s <= slope => {}
                _ => best = Some((slope, d)),
            }
        }
    }
    best.map(|(_, d)| d)
}

fn is_reduced_feasible(g: &Matrix, h: &[f64]) -> bool {
    // A set with a full lineality component is feasible iff its projection
    // onto the row space is; reuse the pointed-case machinery.
    let n = g.cols();
    if g.rows() == 0 {
        return true;
    }
    let r = row_space_basis(g, 1e-10);
    let np = r.cols();
    if np == 0 {
        return norm_inf(h) >= -FEAS_TOL || h.iter().all(|v| *v >= -FEAS_TOL);
    }
    let m = g.rows();
    let mut g2 = Matrix::zeros(m, np);
    for i in 0..m {
        for j in 0..np {
            let mut s = 0.0;
            for k in 0..n {
                s += g.get(i, k) * r.get(k, j);
            }
            g2.set(i, j, s);
        }
    }
    match vertices_raw(&g2, h) {
        Ok(v) if !v.is_empty() => true,
        Ok(_) => {
            // A pointed quotient with no vertices is empty.
            false
        }
        Err(_) => false,
    }
}

fn orient_ray(lp: &LpProblem, ray: Vec<f64>) -> Vec<f64> {
    // The ray was already oriented against the minimized cost; for a Max
    // problem the minimized cost is the negated one, so the orientation is
    // correct for the original sense as well.
    let _ = lp;
    ray
}

fn pick_best(
    lp: &LpProblem,
    verts: &[Vec<f64>],
    c2: &[f64],
    r: &Matrix,
    z: &Matrix,
    x0: &[f64],
    constant: f64,
) -> Optimum {
    let n = lp.num_vars();
    let nf = z.cols();
    let np = r.cols();
    let mut best_idx = 0usize;
    let mut best_val = f64::INFINITY;
    for (i, v) in verts.iter().enumerate() {
        let val = dot(c2, v);
        if val < best_val - 0.0 {
            best_val = val;
            best_idx = i;
        }
    }
    let p = &verts[best_idx];
    let mut x = x0.to_vec();
    for k in 0..n {
        let mut s = 0.0;
        for t in 0..nf {
            let mut rt = 0.0;
            for q in 0..np {
                rt += r.get(t, q) * p[q];
            }
            s += z.get(k, t) * rt;
        }
        x[k] += s;
    }
    finish(lp, x, best_val + constant)
}

fn finish(lp: &LpProblem, x: Vec<f64>, value_min: f64) -> Optimum {
    let value = match lp.sense {
        Sense::Min => value_min,
        Sense::Max => -value_min,
    };
    Optimum {
        x,
        value,
        ineq_multipliers: Vec::new(),
        eq_multipliers: Vec::new(),
        degenerate: false,
    }
}

#[cfg(test)]
mod tests {
    use super::super::{LpProblem, LpSolution};
    use super::*;

    fn mat(rows: &[&[f64]]) -> Matrix {
        let owned: Vec<Vec<f64>> = rows.iter().map(|r| r.to_vec()).collect();
        Matrix::from_rows(&owned)
    }

    #[test]
    fn unit_box_has_four_corners() {
        let g = mat(&[&[1.0, 0.0], &[-1.0, 0.0], &[0.0, 1.0], &[0.0, -1.0]]);
        let v = enumerate_vertices(&g, &[1.0, 1.0, 1.0, 1.0]).unwrap();
        assert_eq!(v.len(), 4);
        for corner in [[1.0, 1.0], [1.0, -1.0], [-1.0, 1.0], [-1.0, -1.0]] {
            assert!(v.iter().any(|p| close(p, &corner, 1e-9)));
        }
    }

    #[test]
    fn standard_simplex_has_three_vertices() {
        let g = mat(&[&[-1.0, 0.0], &[0.0, -1.0], &[1.0, 1.0]]);
        let v = enumerate_vertices(&g, &[0.0, 0.0, 1.0]).unwrap();
        assert_eq!(v.len(), 3);
    }

    #[test]
    fn redundant_rows_do_not_duplicate_vertices() {
        let g = mat(&[&[1.0], &[-1.0], &[1.0]]);
        let v = enumerate_vertices(&g, &[1.0, 0.0, 1.0]).unwrap();
        assert_eq!(v.len(), 2);
        assert!(v.iter().any(|p| close(p, &[1.0], 1e-9)));
        assert!(v.iter().any(|p| close(p, &[0.0], 1e-9)));
    }

    #[test]
    fn halfline_is_flagged_unbounded() {
        let g = mat(&[&[-1.0, 0.0], &[0.0, -1.0], &[0.0, 1.0]]);
        let err = enumerate_vertices(&g, &[0.0, 0.0, 1.0]).unwrap_err();
        assert!(matches!(err, LpError::UnboundedPolytope));
    }

    #[test]
    fn rank_deficiency_is_flagged_unbounded() {
        let g = mat(&[&[1.0, 0.0], &[-1.0, 0.0]]);
        let err = enumerate_vertices(&g, &[1.0, 1.0]).unwrap_err();
        assert!(matches!(err, LpError::UnboundedPolytope));
    }

    #[test]
    fn enumeration_minimum_matches_hand_value() {
        // min -x - 2y over the triangle x, y >= 0, x + y <= 1.
        let lp = LpProblem::minimize_ineq(
            vec![-1.0, -2.0],
            mat(&[&[-1.0, 0.0], &[0.0, -1.0], &[1.0, 1.0]]),
            vec![0.0, 0.0, 1.0],
        );
        let sol = solve_lp_by_enumeration(&lp).unwrap();
        let opt = sol.optimal().unwrap();
        assert!((opt.value - (-2.0)).abs() < 1e-9);
        assert!(close(&opt.x, &[0.0, 1.0], 1e-9));
    }

    #[test]
    fn equality_elimination_handles_fixed_point() {
        // x + y = 1 with x, y in [0, 1]: minimize x - y at (0, 1).
        let lp = LpProblem::minimize(
            vec![1.0, -1.0],
            mat(&[&[1.0, 0.0], &[-1.0, 0.0], &[0.0, 1.0], &[0.0, -1.0]]),
            vec![1.0, 0.0, 1.0, 0.0],
            mat(&[&[1.0, 1.0]]),
            vec![1.0],
        );
        let sol = solve_lp_by_enumeration(&lp).unwrap();
        let opt = sol.optimal().unwrap();
        assert!((opt.value - (-1.0)).abs() < 1e-9);
    }

    #[test]
    fn unbounded_cost_yields_ray() {
        // min -x with x >= 0 only.
        let lp = LpProblem::minimize_ineq(vec![-1.0, 0.0], mat(&[&[-1.0, 0.0]]), vec![0.0]);
        match solve_lp_by_enumeration(&lp) {
            Ok(LpSolution::Unbounded { ray }) => assert!(ray[0] > 0.5),
            other => panic!("expected unbounded, got {:?}", other.map(|s| s.status_name())),
        }
    }

    #[test]
    fn infeasible_equalities_are_reported() {
        let lp = LpProblem::minimize(
            vec![1.0],
            Matrix::zeros(0, 1),
            vec![],
            mat(&[&[1.0], &[1.0]]),
            vec![0.0, 1.0],
        );
        assert!(matches!(solve_lp_by_enumeration(&lp).unwrap(), LpSolution::Infeasible));
    }
}
