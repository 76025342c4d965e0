//! Shared fixtures and random-instance generators for the integration and
//! acceptance suites.

use mayer_core::convex::{PiecewiseMaxAffine, Polytope};
use mayer_core::dfi::{InclusionMap, MayerProblem, PolyhedralMap2, SemilinearMap};
use mayer_core::numerics::Matrix;
use mayer_core::transcription::{DualTrajectory, Grid, PrimalTrajectory};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub fn mat(rows: &[&[f64]]) -> Matrix {
    let owned: Vec<Vec<f64>> = rows.iter().map(|r| r.to_vec()).collect();
    Matrix::from_rows(&owned)
}

/// First-order integrator: x' = u with u in [-1, 1], x(0) = 1, and endpoint
/// cost sign * x(1). With sign = +1 the optimum rides u = -1 into x(1) = 0
/// and the value is 0; the adjoint is identically -1.
pub fn integrator(sign: f64) -> MayerProblem {
    let f = SemilinearMap::new(
        vec![mat(&[&[0.0]])],
        mat(&[&[1.0]]),
        Polytope::from_bounds(&[-1.0], &[1.0]).unwrap(),
    )
    .unwrap();
    let q0 = Polytope::singleton(&[1.0]).unwrap();
    let phi = PiecewiseMaxAffine::affine(vec![sign], 0.0);
    MayerProblem::new(InclusionMap::Semilinear(f), vec![q0], phi).unwrap()
}

/// Second-order integrator through graph rows: x'' in [-1, 1] encoded as
/// -Cv <= d with C = (-1, 1)^T, x(0) = x'(0) = 0, endpoint cost x(1). The
/// discrete optimum is -(N-1)/(2N); the graph multipliers are (0, 1 - t_k).
pub fn double_integrator() -> MayerProblem {
    let f = PolyhedralMap2::new(
        mat(&[&[0.0], &[0.0]]),
        mat(&[&[0.0], &[0.0]]),
        mat(&[&[-1.0], &[1.0]]),
        vec![1.0, 1.0],
        (&[0.0], &[0.0]),
    )
    .unwrap();
    let q = Polytope::singleton(&[0.0]).unwrap();
    let phi = PiecewiseMaxAffine::affine(vec![1.0, 0.0], 0.0);
    MayerProblem::new(InclusionMap::Polyhedral2(f), vec![q.clone(), q], phi).unwrap()
}

/// Mildly coupled third-order instance with a two-piece endpoint cost;
/// bounded and feasible, with no closed-form value.
pub fn third_order() -> MayerProblem {
    let f = SemilinearMap::new(
        vec![mat(&[&[0.3]]), mat(&[&[-0.2]]), mat(&[&[0.1]])],
        mat(&[&[1.0]]),
        Polytope::from_bounds(&[-1.0], &[1.0]).unwrap(),
    )
    .unwrap();
    let q0 = Polytope::singleton(&[0.5]).unwrap();
    let q1 = Polytope::from_bounds(&[-0.1], &[0.1]).unwrap();
    let q2 = Polytope::singleton(&[0.0]).unwrap();
    let phi = PiecewiseMaxAffine::new(vec![
        (vec![1.0, 0.5, -0.2], 0.0),
        (vec![-1.0, 0.0, 1.0], -0.3),
    ])
    .unwrap();
    MayerProblem::new(InclusionMap::Semilinear(f), vec![q0, q1, q2], phi).unwrap()
}

/// A randomly generated problem together with the box data needed to sample
/// feasible points from it.
pub struct Instance {
    pub problem: MayerProblem,
    /// Initial-set boxes as (lower, upper) pairs, one per derivative order.
    pub q_bounds: Vec<(Vec<f64>, Vec<f64>)>,
    /// Symmetric bound on the control (control class) or the highest
    /// derivative (graph class).
    pub box_bound: Vec<f64>,
}

fn random_matrix(rng: &mut ChaCha8Rng, rows: usize, cols: usize, scale: f64) -> Matrix {
    let data: Vec<Vec<f64>> =
        (0..rows).map(|_| (0..cols).map(|_| rng.gen_range(-scale..scale)).collect()).collect();
    Matrix::from_rows(&data)
}

fn random_boxes(rng: &mut ChaCha8Rng, kappa: usize, n: usize) -> Vec<(Vec<f64>, Vec<f64>)> {
    (0..kappa)
        .map(|_| {
            let lo: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..0.5)).collect();
            let hi: Vec<f64> = lo.iter().map(|l| l + rng.gen_range(0.0..1.0)).collect();
            (lo, hi)
        })
        .collect()
}

fn random_objective(rng: &mut ChaCha8Rng, dim: usize) -> PiecewiseMaxAffine {
    let pieces = rng.gen_range(1..=3);
    PiecewiseMaxAffine::new(
        (0..pieces)
            .map(|_| {
                let slope: Vec<f64> = (0..dim).map(|_| rng.gen_range(-1.5..1.5)).collect();
                (slope, rng.gen_range(-0.5..0.5))
            })
            .collect(),
    )
    .unwrap()
}

/// Control-parameterized instance: bounded control box, bounded initial
/// boxes, and mild coefficients, so the problem is always feasible and the
/// value is always finite.
pub fn random_semilinear(rng: &mut ChaCha8Rng, kappa: usize, n: usize) -> Instance {
    let r = rng.gen_range(1..=2);
    let a = (0..kappa).map(|_| random_matrix(rng, n, n, 0.6)).collect();
    let b = random_matrix(rng, n, r, 1.0);
    let ub: Vec<f64> = (0..r).map(|_| rng.gen_range(0.3..1.5)).collect();
    let lo: Vec<f64> = ub.iter().map(|v| -v).collect();
    let u = Polytope::from_bounds(&lo, &ub).unwrap();
    let f = SemilinearMap::new(a, b, u).unwrap();
    let q_bounds = random_boxes(rng, kappa, n);
    let q = q_bounds
        .iter()
        .map(|(lo, hi)| Polytope::from_bounds(lo, hi).unwrap())
        .collect();
    let phi = random_objective(rng, kappa * n);
    let problem = MayerProblem::new(InclusionMap::Semilinear(f), q, phi).unwrap();
    Instance { problem, q_bounds, box_bound: ub }
}

/// Graph-constrained second-order instance. The graph always contains the
/// rows +-v_i <= vb_i, so the highest derivative lives in a box and every
/// box sample is admissible; with `coupled`, extra rows tie the lower
/// derivatives in, with enough slack to keep the zero-derivative line from
/// the box centers feasible.
pub fn random_polyhedral(rng: &mut ChaCha8Rng, n: usize, coupled: bool) -> Instance {
    let vb: Vec<f64> = (0..n).map(|_| rng.gen_range(0.5..1.5)).collect();
    let q_bounds = random_boxes(rng, 2, n);
    let center: Vec<Vec<f64>> = q_bounds
        .iter()
        .map(|(lo, hi)| lo.iter().zip(hi).map(|(l, h)| 0.5 * (l + h)).collect())
        .collect();

    let extra = if coupled { rng.gen_range(1..=2) } else { 0 };
    let rows = 2 * n + extra;
    let mut a = Matrix::zeros(rows, n);
    let mut b = Matrix::zeros(rows, n);
    let mut c = Matrix::zeros(rows, n);
    let mut d = vec![0.0; rows];
    for i in 0..n {
        c.set(2 * i, i, -1.0);
        d[2 * i] = vb[i];
        c.set(2 * i + 1, i, 1.0);
        d[2 * i + 1] = vb[i];
    }
    for e in 0..extra {
        let row = 2 * n + e;
        let ar: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let br: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
        // Largest value of a.z0 + b.z1 along the zero-derivative line
        // z0(t) = c0 + t c1, z1(t) = c1 from the box centers.
        let base: f64 = (0..n).map(|i| ar[i] * center[0][i] + br[i] * center[1][i]).sum();
        let drift: f64 = (0..n).map(|i| ar[i] * center[1][i]).sum();
        d[row] = base + drift.max(0.0) + rng.gen_range(0.1..0.6);
        for i in 0..n {
            a.set(row, i, ar[i]);
            b.set(row, i, br[i]);
        }
    }

    let f = PolyhedralMap2::new(a, b, c, d, (&center[0], &center[1])).unwrap();
    let q = q_bounds
        .iter()
        .map(|(lo, hi)| Polytope::from_bounds(lo, hi).unwrap())
        .collect();
    let phi = random_objective(rng, 2 * n);
    let problem = MayerProblem::new(InclusionMap::Polyhedral2(f), q, phi).unwrap();
    Instance { problem, q_bounds, box_bound: vb }
}

/// A feasible trajectory sampled uniformly from the instance's boxes: the
/// start lies in the initial boxes, the control (or highest derivative)
/// stays in its box, and the chain is integrated exactly.
pub fn feasible_trajectory(
    rng: &mut ChaCha8Rng,
    inst: &Instance,
    grid: Grid,
) -> PrimalTrajectory {
    let p = &inst.problem;
    let kappa = p.kappa();
    let n = p.state_dim();
    let steps = grid.steps();
    let h = grid.h();

    let mut z0 = Vec::with_capacity(kappa * n);
    for (lo, hi) in &inst.q_bounds {
        for i in 0..n {
            z0.push(rng.gen_range(0.0..=1.0) * (hi[i] - lo[i]) + lo[i]);
        }
    }

    let mut z = vec![z0];
    let mut v = Vec::with_capacity(steps);
    let mut u = Vec::new();
    for k in 0..steps {
        let zk = z[k].clone();
        let vk: Vec<f64> = match p.inclusion() {
            InclusionMap::Semilinear(f) => {
                let uk: Vec<f64> = inst
                    .box_bound
                    .iter()
                    .map(|b| rng.gen_range(-1.0..=1.0) * b)
                    .collect();
                let mut vk = f.control_matrix().mul_vec(&uk);
                for j in 0..kappa {
                    let part = f.coefficient(j).mul_vec(&zk[j * n..(j + 1) * n]);
                    for i in 0..n {
                        vk[i] += part[i];
                    }
                }
                u.push(uk);
                vk
            }
            InclusionMap::Polyhedral2(_) => inst
                .box_bound
                .iter()
                .map(|b| rng.gen_range(-1.0..=1.0) * b)
                .collect(),
        };
        let mut next = zk.clone();
        for j in 0..kappa {
            for i in 0..n {
                let top = if j + 1 < kappa { zk[(j + 1) * n + i] } else { vk[i] };
                next[j * n + i] += h * top;
            }
        }
        z.push(next);
        v.push(vk);
    }
    PrimalTrajectory::new(p, grid, z, v, u).unwrap()
}

/// Unstructured dual arc with entries of the given amplitude. For the graph
/// class the interval multipliers are sampled nonnegative.
pub fn random_dual(
    rng: &mut ChaCha8Rng,
    problem: &MayerProblem,
    grid: Grid,
    amp: f64,
) -> DualTrajectory {
    let kappa = problem.kappa();
    let n = problem.state_dim();
    let steps = grid.steps();
    let sample = |rng: &mut ChaCha8Rng| -> Vec<f64> {
        (0..n).map(|_| rng.gen_range(-amp..amp)).collect()
    };
    let xstar = (0..=steps).map(|_| sample(rng)).collect();
    let lead_in = (1..kappa).map(|_| sample(rng)).collect();
    let eta = (1..kappa).map(|_| (0..=steps).map(|_| sample(rng)).collect()).collect();
    let lambda = match problem.inclusion() {
        InclusionMap::Polyhedral2(f) => Some(
            (0..steps)
                .map(|_| (0..f.rows()).map(|_| rng.gen_range(0.0..amp)).collect())
                .collect(),
        ),
        InclusionMap::Semilinear(_) => None,
    };
    DualTrajectory::new(problem, grid, xstar, lead_in, eta, lambda).unwrap()
}

/// Convex combination theta * a + (1 - theta) * b of two dual arcs.
pub fn combine_duals(
    problem: &MayerProblem,
    a: &DualTrajectory,
    b: &DualTrajectory,
    theta: f64,
) -> DualTrajectory {
    let grid = a.grid();
    let steps = grid.steps();
    let kappa = problem.kappa();
    let mix = |x: &[f64], y: &[f64]| -> Vec<f64> {
        x.iter().zip(y).map(|(xi, yi)| theta * xi + (1.0 - theta) * yi).collect()
    };
    let xstar = (0..=steps)
        .map(|k| mix(a.adjoint(k as isize), b.adjoint(k as isize)))
        .collect();
    let lead_in = (1..kappa)
        .map(|i| mix(a.adjoint(-(i as isize)), b.adjoint(-(i as isize))))
        .collect();
    let eta = (1..kappa)
        .map(|m| (0..=steps).map(|k| mix(a.eta(m, k), b.eta(m, k))).collect())
        .collect();
    let lambda = match problem.inclusion() {
        InclusionMap::Polyhedral2(_) => Some(
            (0..steps)
                .map(|k| mix(a.lambda(k).unwrap(), b.lambda(k).unwrap()))
                .collect(),
        ),
        InclusionMap::Semilinear(_) => None,
    };
    DualTrajectory::new(problem, grid, xstar, lead_in, eta, lambda).unwrap()
}
