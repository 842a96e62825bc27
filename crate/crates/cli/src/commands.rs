//! Subcommand implementations, writing user-visible text to a single writer.

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::sync::Arc;

use hadamard_core::fem::{solve_mesh, EigenSolution};
use hadamard_core::harness::{fit_order_for, refine, run_study, FormSelection, HarnessError, StudyCase};
use hadamard_core::oracles::{disk_neumann_eigs, rect_neumann_eigs};
use hadamard_core::perturbation::{find_cluster, kappa_boundary, tau_volume, Form, SAMPLES_PER_OSCILLATION};

use crate::config::{parse_config, ConfigError, StudyConfig};
use crate::csv::write_report;
use crate::plot::render_svg;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("cannot read {path}: {source}")]
    Read { path: PathBuf, source: std::io::Error },
    #[error("cannot write {path}: {source}")]
    Write { path: PathBuf, source: std::io::Error },
    #[error(transparent)]
    Harness(#[from] HarnessError),
}

impl CliError {
    /// 2 for invalid input, 1 for failures during the computation.
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) | CliError::Read { .. } => 2,
            CliError::Harness(HarnessError::InvalidEpsilons(_) | HarnessError::InvalidParams(_)) => 2,
            CliError::Harness(_) | CliError::Write { .. } => 1,
        }
    }
}

fn numerical<E: Into<HarnessError>>(e: E) -> CliError {
    CliError::Harness(e.into())
}

fn write_err(path: &Path) -> impl FnOnce(std::io::Error) -> CliError + '_ {
    move |source| CliError::Write { path: path.to_path_buf(), source }
}

pub fn load_config(path: &Path) -> Result<StudyConfig, CliError> {
    let text = fs::read_to_string(path).map_err(|source| CliError::Read { path: path.to_path_buf(), source })?;
    Ok(parse_config(&text)?)
}

/// `{:.digits}` with trailing zeros removed.
pub fn format_value(value: f64, digits: usize) -> String {
    let s = format!("{value:.digits$}");
    let s = if s.contains('.') { s.trim_end_matches('0').trim_end_matches('.') } else { &s };
    if s == "-0" { "0".to_string() } else { s.to_string() }
}

fn reference_solution(cfg: &StudyConfig, case: &StudyCase, level: (usize, usize)) -> Result<EigenSolution, CliError> {
    let mesh = case.reference_mesh(level).map_err(numerical)?;
    solve_mesh(Arc::new(mesh), cfg.eig_count, &cfg.solver).map_err(numerical)
}

/// The configured cluster target, or the lowest nonzero eigenvalue of the
/// reference domain.
pub fn resolve_target(cfg: &StudyConfig) -> Result<f64, CliError> {
    if let Some(t) = cfg.cluster_target {
        return Ok(t);
    }
    let case = cfg.study_case();
    let level = case.resolution(cfg.epsilons[0], &cfg.policy).map_err(numerical)?;
    Ok(reference_solution(cfg, &case, level)?.eigenvalues()[1])
}

/// Prints the `count` lowest eigenvalues of the reference domain, extrapolated
/// from two nested meshes.
pub fn eig(cfg: &StudyConfig, count: Option<usize>, dump: Option<&Path>, out: &mut dyn Write) -> Result<(), CliError> {
    let count = count.unwrap_or(cfg.eig_count);
    let cfg = StudyConfig { eig_count: count.max(2), ..cfg.clone() };
    let case = cfg.study_case();
    let level = case.resolution(cfg.epsilons[0], &cfg.policy).map_err(numerical)?;
    let coarse = reference_solution(&cfg, &case, level)?;
    let fine = reference_solution(&cfg, &case, refine(level))?;
    if let Some(path) = dump.or(cfg.output.mesh_dump.as_deref()) {
        let file = File::create(path).map_err(write_err(path))?;
        coarse.mesh().write_dump(BufWriter::new(file)).map_err(write_err(path))?;
    }
    let values: Vec<String> = coarse.eigenvalues()[..count]
        .iter()
        .zip(fine.eigenvalues())
        .map(|(c, f)| format_value((4.0 * f - c) / 3.0, 6))
        .collect();
    writeln!(out, "{}", values.join(", ")).map_err(write_err(Path::new("stdout")))
}

/// Prints the predicted shifts `κ_k` of the cluster for one amplitude.
pub fn predict(
    cfg: &StudyConfig,
    epsilon: Option<f64>,
    form: Option<FormSelection>,
    out: &mut dyn Write,
) -> Result<(), CliError> {
    let epsilon = epsilon.unwrap_or(cfg.epsilons[0]);
    if !(epsilon > 0.0 && epsilon.is_finite()) {
        return Err(ConfigError::validation("epsilon", format!("must be positive, got {epsilon}")).into());
    }
    let case = cfg.study_case();
    let target = resolve_target(cfg)?;
    let level = case.resolution(epsilon, &cfg.policy).map_err(numerical)?;
    let sol = reference_solution(cfg, &case, level)?;
    let cluster = find_cluster(&sol, target, cfg.cluster_rel_tol).map_err(numerical)?;
    let h = case.field(epsilon);
    let n_quad = (cfg.samples_per_node * sol.mesh().boundary_loop.len())
        .max(SAMPLES_PER_OSCILLATION * h.oscillations().max(1));
    let stdout = Path::new("stdout");
    writeln!(out, "# epsilon={epsilon:.17e} Lambda_m={:.17e} J_m={}", cluster.value, cluster.multiplicity)
        .map_err(write_err(stdout))?;
    writeln!(out, "form,k,kappa_k").map_err(write_err(stdout))?;
    let form = form.unwrap_or(cfg.form);
    let mut predictions = Vec::new();
    if form.boundary() {
        predictions.push(("boundary", kappa_boundary(&cluster, &sol, &h, n_quad).map_err(numerical)?));
    }
    if form.volume() {
        predictions.push(("volume", tau_volume(&cluster, &sol, &h, cfg.shell_steps, n_quad).map_err(numerical)?));
    }
    for (name, p) in predictions {
        for (k, kappa) in p.kappas.iter().enumerate() {
            writeln!(out, "{name},{},{kappa:.17e}", k + 1).map_err(write_err(stdout))?;
        }
    }
    Ok(())
}

/// Overrides applied on top of the configuration by `study`.
#[derive(Debug, Clone, Default)]
pub struct StudyOverrides {
    pub form: Option<FormSelection>,
    pub workers: Option<usize>,
    pub plot: bool,
    pub out_dir: Option<PathBuf>,
}

/// Files written by a study.
#[derive(Debug, Clone, PartialEq)]
pub struct StudyOutputs {
    pub csv: Vec<PathBuf>,
    pub plot: Option<PathBuf>,
}

fn ensure_dir(dir: &Path) -> Result<(), CliError> {
    fs::create_dir_all(dir)
        .map_err(|e| ConfigError::validation("dir", format!("cannot create {}: {e}", dir.display())))?;
    let meta = fs::metadata(dir).map_err(|e| ConfigError::validation("dir", e.to_string()))?;
    if meta.permissions().readonly() {
        return Err(ConfigError::validation("dir", format!("{} is not writable", dir.display())).into());
    }
    Ok(())
}

fn write_file(path: &Path, body: impl FnOnce(&mut BufWriter<File>) -> std::io::Result<()>) -> Result<(), CliError> {
    let file = File::create(path).map_err(write_err(path))?;
    let mut w = BufWriter::new(file);
    body(&mut w).and_then(|_| w.flush()).map_err(write_err(path))
}

/// Runs the amplitude sweep and writes `report.csv` (plus `report_volume.csv`
/// when both forms are evaluated) and optionally the plot.
pub fn study(cfg: &StudyConfig, overrides: &StudyOverrides, out: &mut dyn Write) -> Result<StudyOutputs, CliError> {
    let mut cfg = cfg.clone();
    if let Some(f) = overrides.form {
        cfg.form = f;
    }
    if let Some(w) = overrides.workers {
        if w == 0 {
            return Err(ConfigError::validation("workers", "must be at least 1").into());
        }
        cfg.workers = w;
    }
    let dir = overrides.out_dir.clone().unwrap_or_else(|| cfg.output.dir.clone());
    ensure_dir(&dir)?;
    let target = resolve_target(&cfg)?;
    let case = cfg.study_case();
    let report = run_study(&case, &cfg.epsilons, &cfg.study_params(target))?;

    if let Some(path) = &cfg.output.mesh_dump {
        let level = case.resolution(cfg.epsilons[0], &cfg.policy).map_err(numerical)?;
        let mesh = case.reference_mesh(level).map_err(numerical)?;
        write_file(path, |w| mesh.write_dump(w))?;
    }

    let mut forms = Vec::new();
    if cfg.form.boundary() {
        forms.push(Form::Boundary);
    }
    if cfg.form.volume() {
        forms.push(Form::Volume);
    }
    let mut outputs = StudyOutputs { csv: Vec::new(), plot: None };
    let stdout = Path::new("stdout");
    for (i, &form) in forms.iter().enumerate() {
        let path = if i == 0 {
            dir.join(&cfg.output.csv)
        } else {
            let stem = Path::new(&cfg.output.csv).file_stem().and_then(|s| s.to_str()).unwrap_or("report");
            dir.join(format!("{stem}_volume.csv"))
        };
        write_file(&path, |w| write_report(w, &report, form))?;
        let fit = fit_order_for(&report, form).ok();
        match &fit {
            Some(f) => writeln!(
                out,
                "{:?} form: slope {:.3} ± {:.3} over {} rows; remainder/epsilon {}",
                form,
                f.slope,
                f.half_width,
                f.ratios.len(),
                f.ratios.iter().map(|r| format!("{:.3e}", r.1)).collect::<Vec<_>>().join(" ")
            ),
            None => writeln!(out, "{form:?} form: too few unmasked rows to fit an order"),
        }
        .map_err(write_err(stdout))?;
        writeln!(out, "wrote {}", path.display()).map_err(write_err(stdout))?;
        outputs.csv.push(path);
        if i == 0 && (overrides.plot || cfg.output.write_plot) {
            let path = dir.join(&cfg.output.plot);
            let svg = render_svg(&report, form, fit.as_ref());
            write_file(&path, |w| w.write_all(svg.as_bytes()))?;
            writeln!(out, "wrote {}", path.display()).map_err(write_err(stdout))?;
            outputs.plot = Some(path);
        }
    }
    Ok(outputs)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OracleShape {
    Square,
    Rectangle,
    Disk,
}

/// Prints an analytic Neumann spectrum, comma-separated to four decimals.
pub fn oracle(shape: OracleShape, count: usize, width: f64, height: f64, out: &mut dyn Write) -> Result<(), CliError> {
    if count == 0 {
        return Err(ConfigError::validation("count", "must be at least 1").into());
    }
    let values = match shape {
        OracleShape::Square => rect_neumann_eigs(1.0, 1.0, count),
        OracleShape::Rectangle => {
            if !(width > 0.0 && height > 0.0) {
                return Err(ConfigError::validation("width", "sides must be positive").into());
            }
            rect_neumann_eigs(width, height, count)
        }
        OracleShape::Disk => disk_neumann_eigs(count),
    };
    let text: Vec<String> = values.iter().map(|v| format_value(*v, 4)).collect();
    writeln!(out, "{}", text.join(", ")).map_err(write_err(Path::new("stdout")))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn value_formatting() {
        assert_eq!(format_value(0.0, 4), "0");
        assert_eq!(format_value(9.869604401, 4), "9.8696");
        assert_eq!(format_value(3.39, 4), "3.39");
        assert_eq!(format_value(-1e-9, 4), "0");
        assert_eq!(format_value(20.0, 4), "20");
    }

    #[test]
    fn square_oracle_line() {
        let mut buf = Vec::new();
        oracle(OracleShape::Square, 4, 1.0, 1.0, &mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "0, 9.8696, 9.8696, 19.7392\n");
    }

    #[test]
    fn exit_codes() {
        assert_eq!(CliError::from(ConfigError::validation("tol", "x")).exit_code(), 2);
        assert_eq!(CliError::from(HarnessError::InvalidParams("x".into())).exit_code(), 2);
        assert_eq!(CliError::from(HarnessError::WorkerPool("x".into())).exit_code(), 1);
    }
}
