//! Subcommand implementations. Each one parses its inputs, runs the solver
//! or checker, and renders a report plus optional plot tables; the caller
//! owns printing, file writes, and the exit code.

use std::path::{Path, PathBuf};

use serde::Serialize;

use mayer_core::certify::{certify, default_tolerance};
use mayer_core::dfi::{adjoint_system, InclusionMap, MayerProblem};
use mayer_core::numerics::{solve_lp, solve_lp_by_enumeration, LpSolution, Optimum};
use mayer_core::transcription::{
    extract_dual_trajectory, solve_dual, solve_primal, transcribe_primal, DualTrajectory, Grid,
    PrimalTrajectory,
};

use crate::doc::{self, DualDocument};
use crate::error::CliError;
use crate::report::{csv, float_cell, to_json, Ext};

/// Grids for the gap-versus-resolution table; fixed so the report bytes do
/// not depend on the flags.
const LADDER: [usize; 4] = [16, 32, 64, 128];

/// Relative value-agreement tolerance for the gap and oracle verdicts.
const VALUE_AGREEMENT_TOL: f64 = 1e-6;
const ROUTE_AGREEMENT_TOL: f64 = 1e-8;

/// What a finished subcommand hands back to main.
pub struct CommandOutput {
    /// Report JSON, already rendered, ending in a newline.
    pub report: String,
    /// False means the command ran fine but the check it performs failed.
    pub pass: bool,
    /// Side files to write, already resolved against the --out path.
    pub files: Vec<(PathBuf, String)>,
}

fn solver(e: impl std::fmt::Display) -> CliError {
    CliError::Solver(e.to_string())
}

fn resolve_grid(flag: Option<usize>, doc: Option<usize>, fallback: usize) -> Result<Grid, CliError> {
    let steps = flag.or(doc).unwrap_or(fallback);
    Grid::new(steps).map_err(|e| CliError::Document(format!("grid: {e}")))
}

/// The --out path plus its derived siblings: out itself takes the report,
/// and each table lands next to it as <stem>.<suffix>.
fn derived(out: &Path, suffix: &str) -> PathBuf {
    let stem = out.file_stem().unwrap_or(out.as_os_str()).to_string_lossy();
    out.with_file_name(format!("{stem}.{suffix}"))
}

fn solve_primal_lp(
    problem: &MayerProblem,
    grid: Grid,
) -> Result<(LpSolution, Optimum, PrimalTrajectory), CliError> {
    let t = transcribe_primal(problem, grid);
    let sol = solve_lp(&t.lp).map_err(|e| solver(format!("primal program: {e}")))?;
    let opt = match &sol {
        LpSolution::Optimal(o) => o.clone(),
        LpSolution::Infeasible => {
            return Err(solver("primal program is infeasible; check the initial sets"))
        }
        LpSolution::Unbounded { .. } => {
            return Err(solver("primal program is unbounded; the objective has no minimum"))
        }
    };
    let traj = t.unpack(problem, &opt).map_err(solver)?;
    Ok((sol, opt, traj))
}

fn nodes(grid: Grid) -> Vec<f64> {
    (0..=grid.steps()).map(|k| grid.node(k)).collect()
}

#[derive(Serialize)]
struct PrimalReport {
    command: &'static str,
    grid: usize,
    value: f64,
    nodes: Vec<f64>,
    state: Vec<Vec<f64>>,
    derivative: Vec<Vec<f64>>,
    control: Vec<Vec<f64>>,
}

fn trajectory_table(problem: &MayerProblem, traj: &PrimalTrajectory) -> String {
    let grid = traj.grid();
    let n = problem.state_dim();
    let kappa = problem.kappa();
    let r = match problem.inclusion() {
        InclusionMap::Semilinear(f) => f.control_dim(),
        InclusionMap::Polyhedral2(_) => 0,
    };
    let mut headers = vec!["t".to_string()];
    headers.extend((0..kappa * n).map(|i| format!("z{i}")));
    headers.extend((0..n).map(|i| format!("v{i}")));
    headers.extend((0..r).map(|i| format!("u{i}")));
    let mut rows = Vec::new();
    for k in 0..=grid.steps() {
        let mut row = vec![float_cell(grid.node(k))];
        row.extend(traj.state(k).iter().map(|x| float_cell(*x)));
        if k < grid.steps() {
            row.extend(traj.derivative(k).iter().map(|x| float_cell(*x)));
            row.extend(traj.control(k).iter().map(|x| float_cell(*x)));
        } else {
            row.extend(std::iter::repeat(String::new()).take(n + r));
        }
        rows.push(row);
    }
    csv(&headers, &rows)
}

pub fn run_solve_primal(
    file: &Path,
    grid_flag: Option<usize>,
    out: Option<&Path>,
) -> Result<CommandOutput, CliError> {
    let parsed = doc::load_problem(file)?;
    let grid = resolve_grid(grid_flag, parsed.grid, 32)?;
    let (_, _, traj) = solve_primal_lp(&parsed.problem, grid)?;
    let value = mayer_core::transcription::evaluate_primal_objective(&parsed.problem, &traj);
    let steps = grid.steps();
    let report = to_json(&PrimalReport {
        command: "solve-primal",
        grid: steps,
        value,
        nodes: nodes(grid),
        state: (0..=steps).map(|k| traj.state(k).to_vec()).collect(),
        derivative: (0..steps).map(|k| traj.derivative(k).to_vec()).collect(),
        control: (0..steps).map(|k| traj.control(k).to_vec()).collect(),
    })?;
    let mut files = Vec::new();
    if let Some(out) = out {
        files.push((out.to_path_buf(), report.clone()));
        files.push((derived(out, "trajectory.csv"), trajectory_table(&parsed.problem, &traj)));
    }
    Ok(CommandOutput { report, pass: true, files })
}

#[derive(Serialize)]
struct DualReport {
    command: &'static str,
    grid: usize,
    value: f64,
    nodes: Vec<f64>,
    xstar: Vec<Vec<f64>>,
    lead_in: Vec<Vec<f64>>,
    eta: Vec<Vec<Vec<f64>>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    lambda: Option<Vec<Vec<f64>>>,
}

fn adjoint_table(problem: &MayerProblem, dual: &DualTrajectory) -> String {
    let grid = dual.grid();
    let n = problem.state_dim();
    let kappa = problem.kappa();
    let s = match problem.inclusion() {
        InclusionMap::Polyhedral2(f) => f.rows(),
        InclusionMap::Semilinear(_) => 0,
    };
    let mut headers = vec!["t".to_string()];
    headers.extend((0..n).map(|i| format!("xstar{i}")));
    for m in 1..kappa {
        headers.extend((0..n).map(|i| format!("eta{m}_{i}")));
    }
    headers.extend((0..s).map(|i| format!("lambda{i}")));
    let mut rows = Vec::new();
    for k in 0..=grid.steps() {
        let mut row = vec![float_cell(grid.node(k))];
        row.extend(dual.adjoint(k as isize).iter().map(|x| float_cell(*x)));
        for m in 1..kappa {
            row.extend(dual.eta(m, k).iter().map(|x| float_cell(*x)));
        }
        if s > 0 {
            if k < grid.steps() {
                let lam = dual.lambda(k).expect("graph class carries multipliers");
                row.extend(lam.iter().map(|x| float_cell(*x)));
            } else {
                row.extend(std::iter::repeat(String::new()).take(s));
            }
        }
        rows.push(row);
    }
    csv(&headers, &rows)
}

pub fn run_solve_dual(
    file: &Path,
    grid_flag: Option<usize>,
    out: Option<&Path>,
) -> Result<CommandOutput, CliError> {
    let parsed = doc::load_problem(file)?;
    let grid = resolve_grid(grid_flag, parsed.grid, 32)?;
    let (dual, value) =
        solve_dual(&parsed.problem, grid).map_err(|e| solver(format!("dual program: {e}")))?;
    let dual_doc = DualDocument::from_trajectory(&parsed.problem, &dual);
    let report = to_json(&DualReport {
        command: "solve-dual",
        grid: grid.steps(),
        value,
        nodes: nodes(grid),
        xstar: dual_doc.xstar.clone(),
        lead_in: dual_doc.lead_in.clone(),
        eta: dual_doc.eta.clone(),
        lambda: dual_doc.lambda.clone(),
    })?;
    let mut files = Vec::new();
    if let Some(out) = out {
        files.push((out.to_path_buf(), report.clone()));
        files.push((derived(out, "dual.json"), to_json(&dual_doc)?));
        files.push((derived(out, "adjoint.csv"), adjoint_table(&parsed.problem, &dual)));
    }
    Ok(CommandOutput { report, pass: true, files })
}

#[derive(Serialize)]
struct GapRow {
    grid: usize,
    primal: f64,
    dual: f64,
    gap: f64,
}

#[derive(Serialize)]
struct GapReport {
    command: &'static str,
    grid: usize,
    primal: f64,
    dual: f64,
    gap: f64,
    tolerance: f64,
    pass: bool,
    ladder: Vec<GapRow>,
}

fn gap_row(problem: &MayerProblem, steps: usize) -> Result<GapRow, CliError> {
    let grid = Grid::new(steps).map_err(|e| CliError::Document(format!("grid: {e}")))?;
    let (_, primal) =
        solve_primal(problem, grid).map_err(|e| solver(format!("primal program: {e}")))?;
    let (_, dual) =
        solve_dual(problem, grid).map_err(|e| solver(format!("dual program: {e}")))?;
    Ok(GapRow { grid: steps, primal, dual, gap: (primal - dual).abs() })
}

pub fn run_gap(
    file: &Path,
    grid_flag: Option<usize>,
    tol_flag: Option<f64>,
    out: Option<&Path>,
) -> Result<CommandOutput, CliError> {
    let parsed = doc::load_problem(file)?;
    let grid = resolve_grid(grid_flag, parsed.grid, 32)?;
    let head = gap_row(&parsed.problem, grid.steps())?;
    let ladder = LADDER
        .iter()
        .map(|steps| gap_row(&parsed.problem, *steps))
        .collect::<Result<Vec<_>, _>>()?;
    let tolerance = tol_flag.unwrap_or(VALUE_AGREEMENT_TOL);
    let pass = head.gap <= tolerance * (1.0 + head.primal.abs());
    let table = {
        let headers: Vec<String> =
            ["grid", "primal", "dual", "gap"].iter().map(|s| s.to_string()).collect();
        let rows = ladder
            .iter()
            .map(|r| {
                vec![r.grid.to_string(), float_cell(r.primal), float_cell(r.dual), float_cell(r.gap)]
            })
            .collect::<Vec<_>>();
        csv(&headers, &rows)
    };
    let report = to_json(&GapReport {
        command: "gap",
        grid: head.grid,
        primal: head.primal,
        dual: head.dual,
        gap: head.gap,
        tolerance,
        pass,
        ladder,
    })?;
    let mut files = Vec::new();
    if let Some(out) = out {
        files.push((out.to_path_buf(), report.clone()));
        files.push((derived(out, "gap.csv"), table));
    }
    Ok(CommandOutput { report, pass, files })
}

#[derive(Serialize)]
struct EntryRow {
    name: String,
    residual: Ext,
    tolerance: f64,
    pass: bool,
    details: String,
}

#[derive(Serialize)]
struct CertifyReport {
    command: &'static str,
    grid: usize,
    tolerance: f64,
    pass: bool,
    degenerate_multipliers: bool,
    duality_gap: Ext,
    entries: Vec<EntryRow>,
}

pub fn run_certify(
    file: &Path,
    grid_flag: Option<usize>,
    tol_flag: Option<f64>,
    dual_in: Option<&Path>,
    out: Option<&Path>,
) -> Result<CommandOutput, CliError> {
    let parsed = doc::load_problem(file)?;
    let (grid, provided_dual) = match dual_in {
        Some(path) => {
            let (grid, dual) = doc::load_dual(path, &parsed.problem)?;
            if let Some(flag) = grid_flag {
                if flag != grid.steps() {
                    return Err(CliError::Document(format!(
                        "grid: --grid {flag} disagrees with the dual document grid {}",
                        grid.steps()
                    )));
                }
            }
            (grid, Some(dual))
        }
        None => (resolve_grid(grid_flag, parsed.grid, 32)?, None),
    };
    let (sol, _, traj) = solve_primal_lp(&parsed.problem, grid)?;
    let dual = match provided_dual {
        Some(d) => d,
        None => extract_dual_trajectory(&parsed.problem, grid, &sol)
            .map_err(|e| solver(format!("dual extraction: {e}")))?,
    };
    let tolerance = match tol_flag.or(parsed.tol) {
        Some(t) if t > 0.0 => t,
        Some(_) => return Err(CliError::Document("tol: must be positive".into())),
        None => default_tolerance(grid),
    };
    let cert = certify(&parsed.problem, &traj, &dual, tolerance).map_err(solver)?;
    let entries: Vec<EntryRow> = cert
        .entries
        .iter()
        .map(|e| EntryRow {
            name: e.name.clone(),
            residual: Ext(e.residual),
            tolerance: e.tolerance,
            pass: e.pass,
            details: e.details.clone(),
        })
        .collect();
    let report = to_json(&CertifyReport {
        command: "certify",
        grid: grid.steps(),
        tolerance,
        pass: cert.pass,
        degenerate_multipliers: cert.degenerate_multipliers,
        duality_gap: Ext(cert.duality_gap),
        entries,
    })?;
    let mut files = Vec::new();
    if let Some(out) = out {
        files.push((out.to_path_buf(), report.clone()));
        let headers: Vec<String> =
            ["name", "residual", "tolerance", "pass"].iter().map(|s| s.to_string()).collect();
        let rows = cert
            .entries
            .iter()
            .map(|e| {
                vec![
                    e.name.clone(),
                    float_cell(e.residual),
                    float_cell(e.tolerance),
                    e.pass.to_string(),
                ]
            })
            .collect::<Vec<_>>();
        files.push((derived(out, "certificate.csv"), csv(&headers, &rows)));
        let dual_doc = DualDocument::from_trajectory(&parsed.problem, &dual);
        files.push((derived(out, "dual.json"), to_json(&dual_doc)?));
    }
    Ok(CommandOutput { report, pass: cert.pass, files })
}

#[derive(Serialize)]
struct AdjointReport {
    command: &'static str,
    kind: &'static str,
    kappa: usize,
    n: usize,
    text: String,
}

pub fn run_adjoint(file: &Path, out: Option<&Path>) -> Result<CommandOutput, CliError> {
    let parsed = doc::load_problem(file)?;
    let (kind, text) = match parsed.problem.inclusion() {
        InclusionMap::Semilinear(f) => ("semilinear", adjoint_system(f).render()),
        InclusionMap::Polyhedral2(_) => (
            "polyhedral2",
            "Cᵀλ″ + Bᵀλ′ − Aᵀλ = 0, λ ≥ 0; x* = −Cᵀλ".to_string(),
        ),
    };
    let report = to_json(&AdjointReport {
        command: "adjoint",
        kind,
        kappa: parsed.problem.kappa(),
        n: parsed.problem.state_dim(),
        text,
    })?;
    let mut files = Vec::new();
    if let Some(out) = out {
        files.push((out.to_path_buf(), report.clone()));
    }
    Ok(CommandOutput { report, pass: true, files })
}

#[derive(Serialize)]
struct RouteReport {
    status: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    value: Option<f64>,
}

#[derive(Serialize)]
struct OracleReport {
    command: &'static str,
    grid: usize,
    simplex: RouteReport,
    enumeration: RouteReport,
    #[serde(skip_serializing_if = "Option::is_none")]
    difference: Option<f64>,
    pass: bool,
}

fn route(sol: &LpSolution) -> RouteReport {
    match sol {
        LpSolution::Optimal(o) => RouteReport { status: "optimal", value: Some(o.value) },
        LpSolution::Infeasible => RouteReport { status: "infeasible", value: None },
        LpSolution::Unbounded { .. } => RouteReport { status: "unbounded", value: None },
    }
}

pub fn run_oracle(
    file: &Path,
    grid_flag: Option<usize>,
    out: Option<&Path>,
) -> Result<CommandOutput, CliError> {
    let parsed = doc::load_problem(file)?;
    // Enumeration walks basis subsets, so the cross-check only scales to a
    // coarse grid; default small instead of borrowing the document grid.
    let grid = resolve_grid(grid_flag, None, 2)?;
    let lp = transcribe_primal(&parsed.problem, grid).lp;
    let fast = solve_lp(&lp).map_err(|e| solver(format!("pivoting route: {e}")))?;
    let slow =
        solve_lp_by_enumeration(&lp).map_err(|e| solver(format!("enumeration route: {e}")))?;
    let (difference, agree) = match (&fast, &slow) {
        (LpSolution::Optimal(a), LpSolution::Optimal(b)) => {
            let d = (a.value - b.value).abs();
            (Some(d), d <= ROUTE_AGREEMENT_TOL * (1.0 + a.value.abs()))
        }
        (LpSolution::Infeasible, LpSolution::Infeasible) => (None, true),
        (LpSolution::Unbounded { .. }, LpSolution::Unbounded { .. }) => (None, true),
        _ => (None, false),
    };
    let report = to_json(&OracleReport {
        command: "oracle",
        grid: grid.steps(),
        simplex: route(&fast),
        enumeration: route(&slow),
        difference,
        pass: agree,
    })?;
    let mut files = Vec::new();
    if let Some(out) = out {
        files.push((out.to_path_buf(), report.clone()));
    }
    Ok(CommandOutput { report, pass: agree, files })
}
