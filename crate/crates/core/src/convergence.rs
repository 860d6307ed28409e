//! Grid refinement studies: solve each level, measure L2 errors of the
//! potential and of the reconstructed gradient, and compute observed orders.

use crate::elliptic::{relaxation_time_for, DirichletPenalty, EllipticOperator};
use crate::error::{Error, Result};
use crate::field::{interpolate, l2_error, BoundaryData, GradientField, NodalField};
use crate::mesh::{geometric_boundaries, nonuniform_mesh_1d, BoundaryCondition, Mesh, Mesh1D, Mesh2D};
use crate::relax::{HistoryEntry, HyperbolicSystem, MarchConfig, RelaxState};
use crate::setups::ProblemSetup;
use crate::solvers::{solve_cg, solve_direct, SolveMethod, SolveReport, DEFAULT_TOL};

/// Largest level accepted by the pseudo-time solver, per dimension.
pub const RELAXATION_MAX_ELEMENTS: [usize; 2] = [20, 8];

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum MeshKind {
    Uniform,
    /// Element lengths grow geometrically from left to right; the value is the
    /// ratio of the largest to the smallest element, held fixed under refinement.
    Geometric(f64),
}

#[derive(Debug, Clone)]
pub struct RunOptions {
    pub degree: usize,
    pub levels: Vec<usize>,
    pub solver: SolveMethod,
    pub tol: f64,
    pub mesh: MeshKind,
    pub march: MarchConfig,
    pub penalty: DirichletPenalty,
}

impl RunOptions {
    /// Defaults: direct in 1D, CG in 2D, standard level ladders.
    pub fn for_setup(setup: &ProblemSetup, degree: usize) -> Self {
        let (levels, solver) = if setup.dim == 1 {
            (vec![10, 20, 40, 80, 160], SolveMethod::Direct)
        } else {
            (vec![4, 8, 16, 32, 64], SolveMethod::Cg)
        };
        Self {
            degree,
            levels,
            solver,
            tol: DEFAULT_TOL,
            mesh: MeshKind::Uniform,
            march: MarchConfig::default(),
            penalty: DirichletPenalty::default(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct LevelResult {
    pub n: usize,
    pub err_phi: f64,
    pub eoc_phi: Option<f64>,
    pub err_q: Vec<f64>,
    pub eoc_q: Vec<Option<f64>>,
    pub solve: SolveReport,
    /// Relaxation only: max difference between the evolved `q` and the local
    /// reconstruction from the steady `phi`.
    pub relax_q_mismatch: Option<f64>,
}

#[derive(Debug, Clone)]
pub struct ConvergenceReport {
    pub setup_id: u32,
    pub dim: usize,
    pub degree: usize,
    pub solver: SolveMethod,
    pub penalty: DirichletPenalty,
    pub levels: Vec<LevelResult>,
}

/// Observed order between two levels.
pub fn eoc(err_coarse: f64, err_fine: f64, n_coarse: usize, n_fine: usize) -> f64 {
    (err_coarse / err_fine).ln() / (n_fine as f64 / n_coarse as f64).ln()
}

/// Everything produced by solving one level.
#[derive(Debug, Clone)]
pub struct LevelSolution {
    pub mesh: Mesh,
    pub phi: NodalField,
    pub q: GradientField,
    pub report: SolveReport,
    pub relax_q_mismatch: Option<f64>,
    pub relax_history: Vec<HistoryEntry>,
}

pub fn build_mesh(setup: &ProblemSetup, degree: usize, n: usize, kind: MeshKind) -> Result<Mesh> {
    let line = |(lo, hi): (f64, f64)| -> Result<Vec<f64>> {
        match kind {
            MeshKind::Uniform => Ok((0..=n).map(|i| lo + (hi - lo) * i as f64 / n as f64).collect()),
            MeshKind::Geometric(stretch) => geometric_boundaries(lo, hi, n, stretch.powf(1.0 / (n as f64 - 1.0))),
        }
    };
    let dirs: Vec<Mesh1D> = setup
        .extents
        .iter()
        .map(|&e| nonuniform_mesh_1d(line(e)?, degree, setup.bc))
        .collect::<Result<_>>()?;
    let mut dirs = dirs.into_iter();
    Ok(match setup.dim {
        1 => Mesh::OneD(dirs.next().unwrap()),
        _ => {
            let x = dirs.next().unwrap();
            let y = dirs.next().unwrap();
            let y = Mesh1D::from_operator(y.boundaries().to_vec(), x.operator().clone(), y.bc())?;
            Mesh::TwoD(Mesh2D::new(x, y)?)
        }
    })
}

pub fn solve_level(setup: &ProblemSetup, opts: &RunOptions, n: usize) -> Result<LevelSolution> {
    let mesh = build_mesh(setup, opts.degree, n, opts.mesh)?;
    let relax = relaxation_time_for(&mesh)?;
    let boundary = match setup.bc {
        BoundaryCondition::Dirichlet => BoundaryData::from_fn(&mesh, setup.exact_phi),
        BoundaryCondition::Periodic => BoundaryData::none(&mesh),
    };
    let forcing = interpolate(&mesh, setup.forcing);
    let op = EllipticOperator::new(mesh.clone(), relax, boundary.clone(), forcing.clone())?
        .with_dirichlet_penalty(opts.penalty);
    let deflate = op.is_singular();

    let (phi, report, relax_q_mismatch, relax_history) = match opts.solver {
        SolveMethod::Direct => {
            if setup.dim != 1 {
                return Err(Error::InvalidConfig("the direct solver is only available in 1D".into()));
            }
            let (x, rep) = solve_direct(&op, op.rhs().as_slice(), deflate)?;
            (NodalField::from_vec(&mesh, x)?, rep, None, Vec::new())
        }
        SolveMethod::Cg => {
            let (x, rep) = solve_cg(&op, op.rhs().as_slice(), opts.tol, None, deflate)?;
            (NodalField::from_vec(&mesh, x)?, rep, None, Vec::new())
        }
        SolveMethod::Relaxation => {
            let cap = RELAXATION_MAX_ELEMENTS[setup.dim - 1];
            if n > cap {
                return Err(Error::InvalidConfig(format!(
                    "relaxation runs are limited to N <= {cap} in {}D",
                    setup.dim
                )));
            }
            let sys = HyperbolicSystem::new(mesh.clone(), relax, boundary, forcing)?.with_dirichlet_penalty(opts.penalty);
            let out = sys.march_to_steady(&opts.march, &RelaxState::zeros(&mesh))?;
            let local = op.gradient(&out.state.phi)?;
            let mismatch = local
                .components
                .iter()
                .zip(&out.state.q.components)
                .map(|(a, b)| a.max_abs_diff(b))
                .fold(0.0_f64, f64::max);
            let rep = SolveReport {
                method: SolveMethod::Relaxation,
                iterations: out.steps,
                final_residual: out.state.residual_norm,
                wall_time: 0.0,
                residual_history: out.history.iter().map(|h| h.residual).collect(),
                rhs_mean_removed: sys.forcing_mean_removed(),
            };
            (out.state.phi, rep, Some(mismatch), out.history)
        }
    };
    let q = op.gradient(&phi)?;
    Ok(LevelSolution {
        mesh,
        phi,
        q,
        report,
        relax_q_mismatch,
        relax_history,
    })
}

pub fn run_convergence(setup: &ProblemSetup, opts: &RunOptions) -> Result<ConvergenceReport> {
    if opts.levels.is_empty() || opts.levels.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidConfig("levels must be non-empty and strictly increasing".into()));
    }
    let mut levels: Vec<LevelResult> = Vec::with_capacity(opts.levels.len());
    for &n in &opts.levels {
        let sol = solve_level(setup, opts, n).map_err(|e| Error::Level { n, source: Box::new(e) })?;
        let err_phi = l2_error(&sol.mesh, &sol.phi, setup.exact_phi)?;
        let err_q = setup
            .exact_gradient
            .iter()
            .zip(&sol.q.components)
            .map(|(exact, q)| l2_error(&sol.mesh, q, exact))
            .collect::<Result<Vec<_>>>()?;
        let (eoc_phi, eoc_q) = match levels.last() {
            Some(prev) => (
                Some(eoc(prev.err_phi, err_phi, prev.n, n)),
                prev.err_q
                    .iter()
                    .zip(&err_q)
                    .map(|(c, f)| Some(eoc(*c, *f, prev.n, n)))
                    .collect(),
            ),
            None => (None, vec![None; err_q.len()]),
        };
        levels.push(LevelResult {
            n,
            err_phi,
            eoc_phi,
            err_q,
            eoc_q,
            solve: sol.report,
            relax_q_mismatch: sol.relax_q_mismatch,
        });
    }
    Ok(ConvergenceReport {
        setup_id: setup.id,
        dim: setup.dim,
        degree: opts.degree,
        solver: opts.solver,
        penalty: opts.penalty,
        levels,
    })
}
