//! On-disk JSON schema for problem instances and dual certificates.
//!
//! Parsing is strict: unknown fields are rejected and every validation
//! message starts with the path of the offending field. Serialization is
//! canonical, so parse(serialize(p)) reproduces p exactly: polytopes always
//! come back out in row form, and field order is fixed by declaration.

use std::fmt;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use mayer_core::convex::{PiecewiseMaxAffine, Polytope};
use mayer_core::dfi::{InclusionMap, MayerProblem, PolyhedralMap2, SemilinearMap};
use mayer_core::numerics::Matrix;
use mayer_core::transcription::{DualTrajectory, Grid};

use crate::error::CliError;

fn err(path: &str, msg: impl fmt::Display) -> CliError {
    CliError::Document(format!("{path}: {msg}"))
}

/// A polytope in exactly one of three forms: a box {lo, hi}, a single point,
/// or an inequality system {g, h} meaning g x <= h. Canonical output uses
/// the row form.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PolytopeDoc {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lo: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub hi: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub point: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub g: Option<Vec<Vec<f64>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub h: Option<Vec<f64>>,
}

impl PolytopeDoc {
    fn from_polytope(p: &Polytope) -> PolytopeDoc {
        let g = (0..p.matrix().rows()).map(|i| p.matrix().row(i).to_vec()).collect();
        PolytopeDoc {
            lo: None,
            hi: None,
            point: None,
            g: Some(g),
            h: Some(p.rhs().to_vec()),
        }
    }

    fn to_polytope(&self, path: &str, dim: usize) -> Result<Polytope, CliError> {
        let bounds = self.lo.is_some() || self.hi.is_some();
        let point = self.point.is_some();
        let rows = self.g.is_some() || self.h.is_some();
        match (bounds, point, rows) {
            (true, false, false) => {
                let lo = require(&self.lo, path, "lo", "paired with hi")?;
                let hi = require(&self.hi, path, "hi", "paired with lo")?;
                check_len(&format!("{path}.lo"), dim, lo.len())?;
                check_len(&format!("{path}.hi"), dim, hi.len())?;
                Polytope::from_bounds(lo, hi).map_err(|e| err(path, e))
            }
            (false, true, false) => {
                let x = self.point.as_ref().expect("matched on presence");
                check_len(&format!("{path}.point"), dim, x.len())?;
                Polytope::singleton(x).map_err(|e| err(path, e))
            }
            (false, false, true) => {
                let g = require(&self.g, path, "g", "paired with h")?;
                let h = require(&self.h, path, "h", "paired with g")?;
                let rows = g.len();
                let m = matrix_field(&format!("{path}.g"), rows, dim, g)?;
                check_len(&format!("{path}.h"), rows, h.len())?;
                Polytope::new(m, h.clone()).map_err(|e| err(path, e))
            }
            (false, false, false) => Err(err(path, "one of lo/hi, point, or g/h is required")),
            _ => Err(err(path, "give exactly one of lo/hi, point, or g/h")),
        }
    }
}

fn require<'a, T>(
    field: &'a Option<T>,
    path: &str,
    name: &str,
    note: &str,
) -> Result<&'a T, CliError> {
    field
        .as_ref()
        .ok_or_else(|| err(&format!("{path}.{name}"), format!("required, {note}")))
}

fn check_len(path: &str, want: usize, got: usize) -> Result<(), CliError> {
    if got != want {
        return Err(err(path, format!("expected {want} entries, found {got}")));
    }
    Ok(())
}

fn matrix_field(
    path: &str,
    rows: usize,
    cols: usize,
    data: &[Vec<f64>],
) -> Result<Matrix, CliError> {
    if data.len() != rows {
        return Err(err(path, format!("expected {rows} rows, found {}", data.len())));
    }
    for (i, row) in data.iter().enumerate() {
        if row.len() != cols {
            return Err(err(
                &format!("{path}[{i}]"),
                format!("expected {cols} entries, found {}", row.len()),
            ));
        }
    }
    Ok(Matrix::from_rows(data))
}

fn matrix_rows(m: &Matrix) -> Vec<Vec<f64>> {
    (0..m.rows()).map(|i| m.row(i).to_vec()).collect()
}

/// One affine piece <slope, z> + offset of the objective.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PieceDoc {
    pub slope: Vec<f64>,
    pub offset: f64,
}

/// The endpoint cost as a pointwise maximum of affine pieces.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ObjectiveDoc {
    pub pieces: Vec<PieceDoc>,
}

impl ObjectiveDoc {
    fn from_objective(phi: &PiecewiseMaxAffine) -> ObjectiveDoc {
        let pieces = phi
            .pieces()
            .iter()
            .map(|(c, b)| PieceDoc { slope: c.clone(), offset: *b })
            .collect();
        ObjectiveDoc { pieces }
    }

    fn to_objective(&self, path: &str, dim: usize) -> Result<PiecewiseMaxAffine, CliError> {
        if self.pieces.is_empty() {
            return Err(err(&format!("{path}.pieces"), "at least one piece is required"));
        }
        for (i, piece) in self.pieces.iter().enumerate() {
            check_len(&format!("{path}.pieces[{i}].slope"), dim, piece.slope.len())?;
        }
        let pieces = self.pieces.iter().map(|p| (p.slope.clone(), p.offset)).collect();
        PiecewiseMaxAffine::new(pieces).map_err(|e| err(path, e))
    }
}

/// Control-parameterized instance: x^(kappa) = sum_j A_j x^(j) + B u with
/// u constrained to the polytope U.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SemilinearDoc {
    pub kind: String,
    pub kappa: usize,
    pub n: usize,
    pub r: usize,
    pub a: Vec<Vec<Vec<f64>>>,
    pub b: Vec<Vec<f64>>,
    pub u: PolytopeDoc,
    pub q: Vec<PolytopeDoc>,
    pub phi: ObjectiveDoc,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tol: Option<f64>,
}

impl SemilinearDoc {
    fn to_problem(&self) -> Result<MayerProblem, CliError> {
        if self.kappa == 0 {
            return Err(err("kappa", "must be at least 1"));
        }
        if self.n == 0 {
            return Err(err("n", "must be at least 1"));
        }
        if self.r == 0 {
            return Err(err("r", "must be at least 1"));
        }
        if self.a.len() != self.kappa {
            return Err(err(
                "a",
                format!(
                    "expected kappa coefficient matrices ({}), found {}",
                    self.kappa,
                    self.a.len()
                ),
            ));
        }
        let mut a = Vec::with_capacity(self.kappa);
        for (j, rows) in self.a.iter().enumerate() {
            a.push(matrix_field(&format!("a[{j}]"), self.n, self.n, rows)?);
        }
        let b = matrix_field("b", self.n, self.r, &self.b)?;
        let u = self.u.to_polytope("u", self.r)?;
        if self.q.len() != self.kappa {
            return Err(err(
                "q",
                format!("must have kappa entries ({}), found {}", self.kappa, self.q.len()),
            ));
        }
        let mut q = Vec::with_capacity(self.kappa);
        for (j, set) in self.q.iter().enumerate() {
            q.push(set.to_polytope(&format!("q[{j}]"), self.n)?);
        }
        let phi = self.phi.to_objective("phi", self.kappa * self.n)?;
        let f = SemilinearMap::new(a, b, u).map_err(|e| err("problem", e))?;
        MayerProblem::new(InclusionMap::Semilinear(f), q, phi).map_err(|e| err("problem", e))
    }
}

/// Reference pair (x, x') certifying that the graph polytope is nonempty.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReferenceDoc {
    pub x: Vec<f64>,
    pub v1: Vec<f64>,
}

/// Second order graph-constrained instance: A x + B x' - C x'' <= d.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PolyhedralDoc {
    pub kind: String,
    pub kappa: usize,
    pub n: usize,
    pub a: Vec<Vec<f64>>,
    pub b: Vec<Vec<f64>>,
    pub c: Vec<Vec<f64>>,
    pub d: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reference: Option<ReferenceDoc>,
    pub q: Vec<PolytopeDoc>,
    pub phi: ObjectiveDoc,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tol: Option<f64>,
}

impl PolyhedralDoc {
    fn to_problem(&self) -> Result<(MayerProblem, (Vec<f64>, Vec<f64>)), CliError> {
        if self.kappa != 2 {
            return Err(err("kappa", "graph-constrained problems are second order; expected 2"));
        }
        if self.n == 0 {
            return Err(err("n", "must be at least 1"));
        }
        let s = self.a.len();
        if s == 0 {
            return Err(err("a", "the graph needs at least one row"));
        }
        let a = matrix_field("a", s, self.n, &self.a)?;
        let b = matrix_field("b", s, self.n, &self.b)?;
        let c = matrix_field("c", s, self.n, &self.c)?;
        if self.d.len() != s {
            return Err(err(
                "d",
                format!("expected one entry per graph row ({s}), found {}", self.d.len()),
            ));
        }
        let (x, v1) = match &self.reference {
            Some(r) => {
                check_len("reference.x", self.n, r.x.len())?;
                check_len("reference.v1", self.n, r.v1.len())?;
                (r.x.clone(), r.v1.clone())
            }
            None => (vec![0.0; self.n], vec![0.0; self.n]),
        };
        if self.q.len() != 2 {
            return Err(err("q", format!("must have kappa entries (2), found {}", self.q.len())));
        }
        let q0 = self.q[0].to_polytope("q[0]", self.n)?;
        let q1 = self.q[1].to_polytope("q[1]", self.n)?;
        let phi = self.phi.to_objective("phi", 2 * self.n)?;
        let f = PolyhedralMap2::new(a, b, c, self.d.clone(), (&x, &v1))
            .map_err(|e| err("problem", e))?;
        let problem = MayerProblem::new(InclusionMap::Polyhedral2(f), vec![q0, q1], phi)
            .map_err(|e| err("problem", e))?;
        Ok((problem, (x, v1)))
    }
}

/// A problem instance in either supported form.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(untagged)]
pub enum ProblemDocument {
    Semilinear(SemilinearDoc),
    Polyhedral(PolyhedralDoc),
}

/// A parsed instance along with the document-level solver settings.
pub struct ParsedProblem {
    pub problem: MayerProblem,
    /// Nonemptiness witness for the graph class, carried so the instance
    /// can be serialized back without guessing one.
    pub reference: Option<(Vec<f64>, Vec<f64>)>,
    pub grid: Option<usize>,
    pub tol: Option<f64>,
}

/// Parses and validates a problem document from JSON text.
pub fn parse_problem_str(src: &str) -> Result<ParsedProblem, CliError> {
    let value: serde_json::Value =
        serde_json::from_str(src).map_err(|e| CliError::Document(e.to_string()))?;
    let kind = match value.get("kind") {
        Some(serde_json::Value::String(k)) => k.clone(),
        Some(_) => return Err(err("kind", "expected a string")),
        None => return Err(err("kind", "required; one of \"semilinear\", \"polyhedral2\"")),
    };
    match kind.as_str() {
        "semilinear" => {
            let doc: SemilinearDoc =
                serde_json::from_str(src).map_err(|e| CliError::Document(e.to_string()))?;
            let problem = doc.to_problem()?;
            check_settings(doc.grid, doc.tol)?;
            Ok(ParsedProblem { problem, reference: None, grid: doc.grid, tol: doc.tol })
        }
        "polyhedral2" => {
            let doc: PolyhedralDoc =
                serde_json::from_str(src).map_err(|e| CliError::Document(e.to_string()))?;
            let (problem, reference) = doc.to_problem()?;
            check_settings(doc.grid, doc.tol)?;
            Ok(ParsedProblem {
                problem,
                reference: Some(reference),
                grid: doc.grid,
                tol: doc.tol,
            })
        }
        other => Err(err("kind", format!("unknown kind {other:?}"))),
    }
}

fn check_settings(grid: Option<usize>, tol: Option<f64>) -> Result<(), CliError> {
    if grid == Some(0) {
        return Err(err("grid", "must be at least 1"));
    }
    if let Some(t) = tol {
        if !(t > 0.0) {
            return Err(err("tol", "must be positive"));
        }
    }
    Ok(())
}

/// Reads and parses a problem document from disk.
pub fn load_problem(path: &Path) -> Result<ParsedProblem, CliError> {
    let src = fs::read_to_string(path)
        .map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    parse_problem_str(&src)
}

/// Renders a problem back into its canonical document.
pub fn document_from_problem(parsed: &ParsedProblem) -> ProblemDocument {
    let p = &parsed.problem;
    let kappa = p.kappa();
    let n = p.state_dim();
    let q = (0..kappa).map(|j| PolytopeDoc::from_polytope(p.initial_set(j))).collect();
    let phi = ObjectiveDoc::from_objective(p.objective());
    match p.inclusion() {
        InclusionMap::Semilinear(f) => ProblemDocument::Semilinear(SemilinearDoc {
            kind: "semilinear".into(),
            kappa,
            n,
            r: f.control_dim(),
            a: (0..kappa).map(|j| matrix_rows(f.coefficient(j))).collect(),
            b: matrix_rows(f.control_matrix()),
            u: PolytopeDoc::from_polytope(f.control_set()),
            q,
            phi,
            grid: parsed.grid,
            tol: parsed.tol,
        }),
        InclusionMap::Polyhedral2(f) => {
            let reference = parsed
                .reference
                .clone()
                .map(|(x, v1)| ReferenceDoc { x, v1 });
            ProblemDocument::Polyhedral(PolyhedralDoc {
                kind: "polyhedral2".into(),
                kappa,
                n,
                a: matrix_rows(f.a()),
                b: matrix_rows(f.b()),
                c: matrix_rows(f.c()),
                d: f.d().to_vec(),
                reference,
                q,
                phi,
                grid: parsed.grid,
                tol: parsed.tol,
            })
        }
    }
}

/// A discrete dual arc: adjoint node samples, the lead-in samples feeding
/// the one-sided boundary stencils, the auxiliary chain, and per-interval
/// multipliers for the graph class.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DualDocument {
    pub grid: usize,
    pub xstar: Vec<Vec<f64>>,
    pub lead_in: Vec<Vec<f64>>,
    pub eta: Vec<Vec<Vec<f64>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambda: Option<Vec<Vec<f64>>>,
}

impl DualDocument {
    pub fn from_trajectory(problem: &MayerProblem, dual: &DualTrajectory) -> DualDocument {
        let kappa = problem.kappa();
        let steps = dual.grid().steps();
        let lead_in = (1..kappa).map(|i| dual.adjoint(-(i as isize)).to_vec()).collect();
        let lambda = dual
            .lambda(0)
            .map(|_| (0..steps).map(|k| dual.lambda(k).expect("graph class").to_vec()).collect());
        DualDocument {
            grid: steps,
            xstar: dual.adjoint_samples().to_vec(),
            lead_in,
            eta: dual.eta_tracks().to_vec(),
            lambda,
        }
    }

    pub fn to_trajectory(
        &self,
        problem: &MayerProblem,
    ) -> Result<(Grid, DualTrajectory), CliError> {
        let grid = Grid::new(self.grid).map_err(|e| err("dual-in.grid", e))?;
        let dual = DualTrajectory::new(
            problem,
            grid,
            self.xstar.clone(),
            self.lead_in.clone(),
            self.eta.clone(),
            self.lambda.clone(),
        )
        .map_err(|e| err("dual-in", e))?;
        Ok((grid, dual))
    }
}

/// Reads and validates a dual document against the problem it certifies.
pub fn load_dual(
    path: &Path,
    problem: &MayerProblem,
) -> Result<(Grid, DualTrajectory), CliError> {
    let src = fs::read_to_string(path)
        .map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    let doc: DualDocument = serde_json::from_str(&src)
        .map_err(|e| err("dual-in", e))?;
    doc.to_trajectory(problem)
}
