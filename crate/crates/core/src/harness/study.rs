use std::collections::BTreeMap;
use std::sync::Arc;

use rayon::prelude::*;

use super::{ExperimentReport, FormEstimate, HarnessError, ReportRow, RowEntry};
use crate::fem::{solve_mesh, EigenSolution, EigenSolverOptions};
use crate::geometry::{
    apply_normal_offset, hausdorff_distance, GeometryError, PerturbationFamily, PerturbationField,
    StarDomain,
};
use crate::meshing::{
    generate_mesh, generate_rect_mesh, rect_right_side_params, resolution_for_oscillations,
    MeshError, ResolutionPolicy, TriangleMesh,
};
use crate::perturbation::{
    find_cluster, kappa_boundary, pair_predictions, tau_volume, EigenCluster, PerturbationError,
};

/// Boundary displacement applied to a star domain.
#[derive(Debug, Clone, PartialEq)]
pub enum Displacement {
    Zero,
    Family(PerturbationFamily),
}

#[derive(Debug, Clone, PartialEq)]
pub enum StudyCase {
    /// A star domain displaced along its normals by `h_ε`.
    Star { domain: StarDomain, displacement: Displacement },
    /// The rectangle `[0, width] × [0, height]` whose side `x = width` moves out by `ε`.
    RectangleSideShift { width: f64, height: f64 },
}

impl StudyCase {
    pub fn label(&self) -> String {
        match self {
            StudyCase::Star { displacement: Displacement::Zero, .. } => "zero".to_string(),
            StudyCase::Star { displacement: Displacement::Family(f), .. } => {
                format!("{} {:?}", f.class.label(), f.profile.shape).to_lowercase()
            }
            StudyCase::RectangleSideShift { width, height } => format!("rectangle {width}x{height} side shift"),
        }
    }

    /// The boundary displacement at amplitude `epsilon`.
    pub fn field(&self, epsilon: f64) -> PerturbationField {
        match self {
            StudyCase::Star { displacement: Displacement::Zero, .. } => PerturbationField::zero(),
            StudyCase::Star { displacement: Displacement::Family(f), .. } => f.field(epsilon),
            StudyCase::RectangleSideShift { width, height } => {
                let (start, end) = rect_right_side_params(*width, *height);
                PerturbationField::window(epsilon, start, end)
            }
        }
    }

    fn oscillations(&self, epsilon: f64) -> usize {
        match self {
            StudyCase::Star { displacement: Displacement::Family(f), .. } => f.oscillations(epsilon),
            _ => 0,
        }
    }

    /// Coarse mesh resolution: `(n_radial, n_angular)` for star domains,
    /// `(nx, ny)` for rectangles.
    pub fn resolution(&self, epsilon: f64, policy: &ResolutionPolicy) -> Result<(usize, usize), MeshError> {
        match self {
            StudyCase::Star { .. } => resolution_for_oscillations(self.oscillations(epsilon), policy),
            StudyCase::RectangleSideShift { width, height } => {
                // same boundary spacing as a unit disk at the angular floor
                let per_unit = policy.min_angular as f64 / std::f64::consts::TAU;
                let n = |side: f64| ((side * per_unit).ceil() as usize).max(1);
                Ok((n(*width), n(*height)))
            }
        }
    }

    fn vertex_count(&self, (a, b): (usize, usize)) -> usize {
        match self {
            StudyCase::Star { .. } => 1 + a * b,
            StudyCase::RectangleSideShift { .. } => (a + 1) * (b + 1),
        }
    }

    /// Mesh of the unperturbed domain at a resolution from [`Self::resolution`].
    pub fn reference_mesh(&self, level: (usize, usize)) -> Result<TriangleMesh, MeshError> {
        match self {
            StudyCase::Star { domain, .. } => generate_mesh(domain, level.0, level.1),
            StudyCase::RectangleSideShift { width, height } => {
                generate_rect_mesh(*width, *height, level.0, level.1)
            }
        }
    }
}

/// Which perturbation forms a study evaluates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum FormSelection {
    #[default]
    Boundary,
    Volume,
    Both,
}

impl FormSelection {
    pub fn boundary(self) -> bool {
        matches!(self, FormSelection::Boundary | FormSelection::Both)
    }

    pub fn volume(self) -> bool {
        matches!(self, FormSelection::Volume | FormSelection::Both)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StudyParams {
    pub policy: ResolutionPolicy,
    pub solver: EigenSolverOptions,
    /// Eigenvalue the studied cluster is nearest to.
    pub cluster_target: f64,
    pub cluster_rel_tol: f64,
    /// Eigenpairs computed per mesh.
    pub eig_count: usize,
    pub forms: FormSelection,
    pub workers: usize,
    /// Midpoint samples along each normal segment of the volume form.
    pub shell_steps: usize,
    /// Quadrature samples per boundary vertex of the reference mesh.
    pub samples_per_boundary_node: usize,
}

impl StudyParams {
    pub fn new(cluster_target: f64) -> Self {
        StudyParams {
            policy: ResolutionPolicy::default(),
            solver: EigenSolverOptions::default(),
            cluster_target,
            cluster_rel_tol: 0.05,
            eig_count: 8,
            forms: FormSelection::Boundary,
            workers: 1,
            shell_steps: 4,
            samples_per_boundary_node: 4,
        }
    }
}

struct Reference {
    sol: EigenSolution,
    cluster: EigenCluster,
    /// Distance from the cluster to the nearest other computed eigenvalue.
    gap: f64,
}

/// One amplitude on one mesh level, members ranked ascending.
struct LevelRow {
    lambda_m: f64,
    lambda_prime: Vec<f64>,
    boundary: Option<Vec<f64>>,
    volume: Option<Vec<f64>>,
    ambiguous: bool,
}

/// The fine level paired with a coarse one for extrapolation.
pub fn refine(level: (usize, usize)) -> (usize, usize) {
    (2 * level.0, 2 * level.1)
}

fn validate(epsilons: &[f64], params: &StudyParams) -> Result<(), HarnessError> {
    if epsilons.is_empty() {
        return Err(HarnessError::InvalidEpsilons("empty".into()));
    }
    if let Some(bad) = epsilons.iter().find(|e| !(**e > 0.0 && e.is_finite())) {
        return Err(HarnessError::InvalidEpsilons(format!("{bad} is not a positive amplitude")));
    }
    if epsilons.windows(2).any(|w| w[1] >= w[0]) {
        return Err(HarnessError::InvalidEpsilons("must be strictly decreasing".into()));
    }
    if params.workers == 0 {
        return Err(HarnessError::InvalidParams("workers must be at least 1".into()));
    }
    if !(params.cluster_rel_tol > 0.0) {
        return Err(HarnessError::InvalidParams("cluster_rel_tol must be positive".into()));
    }
    if params.shell_steps == 0 || params.samples_per_boundary_node == 0 {
        return Err(HarnessError::InvalidParams("quadrature counts must be positive".into()));
    }
    Ok(())
}

fn solve_reference(
    case: &StudyCase,
    level: (usize, usize),
    params: &StudyParams,
) -> Result<Reference, HarnessError> {
    let mesh = Arc::new(case.reference_mesh(level)?);
    let sol = solve_mesh(mesh, params.eig_count, &params.solver)?;
    let cluster = find_cluster(&sol, params.cluster_target, params.cluster_rel_tol)?;
    let values = sol.eigenvalues();
    let (lo, hi) = (cluster.members[0], *cluster.members.last().expect("non-empty cluster"));
    let below = if lo > 0 { values[lo] - values[lo - 1] } else { f64::INFINITY };
    let above = values.get(hi + 1).map_or(f64::INFINITY, |v| v - values[hi]);
    Ok(Reference {
        gap: below.min(above),
        sol,
        cluster,
    })
}

/// The perturbed domain as a star domain, refitting with more harmonics until
/// the radius series represents the offset curve.
fn perturbed_star(domain: &StarDomain, h: &PerturbationField) -> Result<StarDomain, GeometryError> {
    let mut order = 4 * h.oscillations() + domain.order() + 16;
    loop {
        match apply_normal_offset(domain, h, order) {
            Ok(off) => return Ok(off.domain),
            Err(GeometryError::FitResidualTooLarge { .. }) if order < 1 << 14 => order *= 2,
            Err(e) => return Err(e),
        }
    }
}

fn perturbed_mesh(
    case: &StudyCase,
    perturbed: Option<&StarDomain>,
    epsilon: f64,
    level: (usize, usize),
) -> Result<TriangleMesh, MeshError> {
    match (case, perturbed) {
        (StudyCase::Star { .. }, Some(d)) => generate_mesh(d, level.0, level.1),
        (StudyCase::RectangleSideShift { width, height }, _) => {
            generate_rect_mesh(width + epsilon, *height, level.0, level.1)
        }
        (StudyCase::Star { domain, .. }, None) => generate_mesh(domain, level.0, level.1),
    }
}

fn evaluate_level(
    case: &StudyCase,
    perturbed: Option<&StarDomain>,
    epsilon: f64,
    reference: &Reference,
    level: (usize, usize),
    params: &StudyParams,
) -> Result<LevelRow, HarnessError> {
    let h = case.field(epsilon);
    let mesh = Arc::new(perturbed_mesh(case, perturbed, epsilon, level)?);
    let sol = solve_mesh(mesh, params.eig_count, &params.solver)?;
    let cluster = &reference.cluster;
    let lambda_m = cluster.value;
    let shifts: Vec<f64> = cluster.members.iter().map(|&k| sol.eigenvalues()[k] - lambda_m).collect();
    // the perturbed members must stay closer to Λ_m than to any other eigenvalue
    let ambiguous = shifts.iter().any(|s| s.abs() >= 0.5 * reference.gap);

    let n_quad = params.samples_per_boundary_node * reference.sol.mesh().boundary_loop.len();
    let n_quad = n_quad.max(crate::perturbation::SAMPLES_PER_OSCILLATION * h.oscillations().max(1));
    let ranked = |kappas: &[f64]| -> Result<(Vec<f64>, Vec<f64>), PerturbationError> {
        let pairs = pair_predictions(kappas, &shifts)?;
        Ok(pairs.into_iter().unzip())
    };
    let mut measured = None;
    let boundary = if params.forms.boundary() {
        let p = kappa_boundary(cluster, &reference.sol, &h, n_quad)?;
        let (k, s) = ranked(&p.kappas)?;
        measured = Some(s);
        Some(k)
    } else {
        None
    };
    let volume = if params.forms.volume() {
        let p = tau_volume(cluster, &reference.sol, &h, params.shell_steps, n_quad)?;
        let (k, s) = ranked(&p.kappas)?;
        measured = Some(s);
        Some(k)
    } else {
        None
    };
    let sorted_shifts = measured.expect("at least one form is selected");
    Ok(LevelRow {
        lambda_m,
        lambda_prime: sorted_shifts.iter().map(|s| lambda_m + s).collect(),
        boundary,
        volume,
        ambiguous,
    })
}

fn extrapolate(x_coarse: f64, x_fine: f64) -> f64 {
    (4.0 * x_fine - x_coarse) / 3.0
}

fn combine(epsilon: f64, d: f64, level: (usize, usize), coarse: LevelRow, fine: LevelRow) -> ReportRow {
    let ambiguous = coarse.ambiguous || fine.ambiguous;
    let estimate = |c: &Option<Vec<f64>>, f: &Option<Vec<f64>>, k: usize| -> Option<FormEstimate> {
        let (c, f) = (c.as_ref()?, f.as_ref()?);
        let rc = coarse.lambda_prime[k] - coarse.lambda_m - c[k];
        let rf = fine.lambda_prime[k] - fine.lambda_m - f[k];
        Some(FormEstimate::richardson((c[k], rc), (f[k], rf), ambiguous))
    };
    let entries = (0..fine.lambda_prime.len())
        .map(|k| RowEntry {
            k,
            lambda_prime: extrapolate(coarse.lambda_prime[k], fine.lambda_prime[k]),
            boundary: estimate(&coarse.boundary, &fine.boundary, k),
            volume: estimate(&coarse.volume, &fine.volume, k),
        })
        .collect();
    ReportRow {
        epsilon,
        d,
        resolution: level,
        lambda_m: extrapolate(coarse.lambda_m, fine.lambda_m),
        multiplicity: fine.lambda_prime.len(),
        ambiguous,
        entries,
    }
}

fn study_row(
    case: &StudyCase,
    epsilon: f64,
    level: (usize, usize),
    references: &BTreeMap<(usize, usize), Reference>,
    params: &StudyParams,
) -> Result<ReportRow, HarnessError> {
    let h = case.field(epsilon);
    let (perturbed, d) = match case {
        StudyCase::Star { domain, .. } => {
            let p = perturbed_star(domain, &h)?;
            let samples = (32 * h.oscillations()).max(2048);
            let d = if h.is_zero() { 0.0 } else { hausdorff_distance(domain, &p, samples) };
            (Some(p), d)
        }
        StudyCase::RectangleSideShift { .. } => (None, epsilon),
    };
    let fine_level = refine(level);
    let (coarse, fine) = rayon::join(
        || evaluate_level(case, perturbed.as_ref(), epsilon, &references[&level], level, params),
        || evaluate_level(case, perturbed.as_ref(), epsilon, &references[&fine_level], fine_level, params),
    );
    let (coarse, fine) = (coarse?, fine?);
    if references[&level].cluster.members != references[&fine_level].cluster.members {
        return Err(PerturbationError::AmbiguousCluster {
            target: params.cluster_target,
            gap: references[&fine_level].gap,
            required: references[&fine_level].cluster.tolerance,
        }
        .into());
    }
    Ok(combine(epsilon, d, level, coarse, fine))
}

/// Measures predicted against computed eigenvalue shifts for each amplitude.
/// Rows are evaluated concurrently on `params.workers` threads; the report does
/// not depend on the worker count.
pub fn run_study(case: &StudyCase, epsilons: &[f64], params: &StudyParams) -> Result<ExperimentReport, HarnessError> {
    validate(epsilons, params)?;
    let levels: Vec<(usize, usize)> = epsilons
        .iter()
        .map(|&e| case.resolution(e, &params.policy))
        .collect::<Result<_, _>>()?;
    for &level in &levels {
        let vertices = case.vertex_count(refine(level));
        if vertices > params.policy.vertex_cap {
            return Err(MeshError::ResolutionBudgetExceeded {
                vertices,
                cap: params.policy.vertex_cap,
            }
            .into());
        }
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(params.workers)
        .build()
        .map_err(|e| HarnessError::WorkerPool(e.to_string()))?;
    pool.install(|| {
        let mut needed: Vec<(usize, usize)> = levels.iter().flat_map(|&l| [l, refine(l)]).collect();
        needed.sort_unstable();
        needed.dedup();
        let solved: Vec<Reference> = needed
            .par_iter()
            .map(|&l| solve_reference(case, l, params))
            .collect::<Result<_, _>>()?;
        let references: BTreeMap<(usize, usize), Reference> = needed.into_iter().zip(solved).collect();
        let rows: Vec<ReportRow> = epsilons
            .par_iter()
            .zip(&levels)
            .map(|(&e, &level)| study_row(case, e, level, &references, params))
            .collect::<Result<_, _>>()?;
        Ok(ExperimentReport {
            label: case.label(),
            cluster_target: params.cluster_target,
            rows,
        })
    })
}
