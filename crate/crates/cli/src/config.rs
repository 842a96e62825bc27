//! Flat study configuration: `[section]` headers followed by `key = value`
//! lines. Lists are comma-separated and `#` starts a comment.

use std::collections::BTreeMap;
use std::path::PathBuf;

use hadamard_core::fem::EigenSolverOptions;
use hadamard_core::geometry::{
    PerturbationFamily, Profile, ProfileShape, SmoothnessClass, StarDomain, Vec2,
};
use hadamard_core::harness::{Displacement, FormSelection, StudyCase, StudyParams};
use hadamard_core::meshing::ResolutionPolicy;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ConfigError {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("invalid value for `{field}`: {message}")]
    Validation { field: String, message: String },
}

impl ConfigError {
    fn parse(line: usize, message: impl Into<String>) -> Self {
        ConfigError::Parse { line, message: message.into() }
    }

    pub fn validation(field: &str, message: impl Into<String>) -> Self {
        ConfigError::Validation { field: field.to_string(), message: message.into() }
    }

    /// Name of the offending field of a validation error.
    pub fn field(&self) -> Option<&str> {
        match self {
            ConfigError::Validation { field, .. } => Some(field),
            ConfigError::Parse { .. } => None,
        }
    }
}

const SECTIONS: &[(&str, &[&str])] = &[
    ("domain", &["shape", "center", "cos", "sin", "width", "height"]),
    ("family", &["class", "alpha", "frequency", "slope", "profile", "offset"]),
    ("epsilon", &["values", "start", "factor", "count"]),
    ("cluster", &["target", "rel_tol", "eig_count"]),
    ("mesh", &["min_angular", "per_oscillation", "vertex_cap"]),
    ("solver", &["tol", "max_iterations", "dense_threshold", "guard_vectors"]),
    ("output", &["dir", "csv", "plot", "mesh_dump"]),
    ("run", &["workers", "form", "shell_steps", "samples_per_node"]),
];

#[derive(Debug, Clone, PartialEq)]
pub enum DomainSpec {
    Star(StarDomain),
    Rectangle { width: f64, height: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct OutputSpec {
    pub dir: PathBuf,
    pub csv: String,
    /// File name of the plot inside `dir`; written when set or requested.
    pub plot: String,
    pub write_plot: bool,
    pub mesh_dump: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StudyConfig {
    pub domain: DomainSpec,
    /// Ignored for rectangles, which are always shifted on one side.
    pub displacement: Displacement,
    /// Strictly decreasing amplitudes.
    pub epsilons: Vec<f64>,
    /// Cluster to follow; the lowest nonzero eigenvalue when absent.
    pub cluster_target: Option<f64>,
    pub cluster_rel_tol: f64,
    pub eig_count: usize,
    pub policy: ResolutionPolicy,
    pub solver: EigenSolverOptions,
    pub output: OutputSpec,
    pub workers: usize,
    pub form: FormSelection,
    pub shell_steps: usize,
    pub samples_per_node: usize,
}

impl StudyConfig {
    pub fn study_case(&self) -> StudyCase {
        match &self.domain {
            DomainSpec::Star(domain) => StudyCase::Star {
                domain: domain.clone(),
                displacement: self.displacement.clone(),
            },
            DomainSpec::Rectangle { width, height } => StudyCase::RectangleSideShift {
                width: *width,
                height: *height,
            },
        }
    }

    pub fn study_params(&self, cluster_target: f64) -> StudyParams {
        StudyParams {
            policy: self.policy,
            solver: self.solver,
            cluster_target,
            cluster_rel_tol: self.cluster_rel_tol,
            eig_count: self.eig_count,
            forms: self.form,
            workers: self.workers,
            shell_steps: self.shell_steps,
            samples_per_boundary_node: self.samples_per_node,
        }
    }
}

struct Entry {
    line: usize,
    value: String,
}

struct Document {
    entries: BTreeMap<(String, String), Entry>,
}

impl Document {
    fn raw(&self, section: &str, key: &str) -> Option<&Entry> {
        self.entries.get(&(section.to_string(), key.to_string()))
    }

    fn string(&self, section: &str, key: &str) -> Option<String> {
        self.raw(section, key).map(|e| e.value.clone())
    }

    fn number<T: std::str::FromStr>(&self, section: &str, key: &str) -> Result<Option<T>, ConfigError> {
        match self.raw(section, key) {
            None => Ok(None),
            Some(e) => e
                .value
                .parse()
                .map(Some)
                .map_err(|_| ConfigError::parse(e.line, format!("`{key}` expects a number, got `{}`", e.value))),
        }
    }

    fn list(&self, section: &str, key: &str) -> Result<Option<Vec<f64>>, ConfigError> {
        match self.raw(section, key) {
            None => Ok(None),
            Some(e) => e
                .value
                .split(',')
                .map(|s| {
                    s.trim()
                        .parse()
                        .map_err(|_| ConfigError::parse(e.line, format!("`{key}` expects numbers, got `{}`", s.trim())))
                })
                .collect::<Result<Vec<f64>, _>>()
                .map(Some),
        }
    }
}

fn tokenize(text: &str) -> Result<Document, ConfigError> {
    let mut entries = BTreeMap::new();
    let mut section: Option<&str> = None;
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        if let Some(name) = content.strip_prefix('[') {
            let name = name
                .strip_suffix(']')
                .ok_or_else(|| ConfigError::parse(line, "unterminated section header"))?
                .trim();
            section = Some(
                SECTIONS
                    .iter()
                    .find(|(s, _)| *s == name)
                    .map(|(s, _)| *s)
                    .ok_or_else(|| ConfigError::parse(line, format!("unknown section `{name}`")))?,
            );
            continue;
        }
        let (key, value) = content
            .split_once('=')
            .ok_or_else(|| ConfigError::parse(line, format!("expected `key = value`, got `{content}`")))?;
        let (key, value) = (key.trim(), value.trim());
        let current = section.ok_or_else(|| ConfigError::parse(line, "key outside of any section"))?;
        let known = SECTIONS.iter().find(|(s, _)| *s == current).map(|(_, k)| *k).unwrap_or(&[]);
        if !known.contains(&key) {
            return Err(ConfigError::parse(line, format!("unknown key `{key}` in [{current}]")));
        }
        if value.is_empty() {
            return Err(ConfigError::parse(line, format!("`{key}` has no value")));
        }
        let slot = (current.to_string(), key.to_string());
        if let Some(prev) = entries.get(&slot) {
            let prev: &Entry = prev;
            return Err(ConfigError::parse(line, format!("`{key}` already set on line {}", prev.line)));
        }
        entries.insert(slot, Entry { line, value: value.to_string() });
    }
    Ok(Document { entries })
}

fn positive(field: &str, value: f64) -> Result<f64, ConfigError> {
    if value > 0.0 && value.is_finite() {
        Ok(value)
    } else {
        Err(ConfigError::validation(field, format!("must be positive, got {value}")))
    }
}

fn at_least(field: &str, value: usize, min: usize) -> Result<usize, ConfigError> {
    if value >= min {
        Ok(value)
    } else {
        Err(ConfigError::validation(field, format!("must be at least {min}, got {value}")))
    }
}

fn parse_domain(doc: &Document) -> Result<DomainSpec, ConfigError> {
    let shape = doc.string("domain", "shape").unwrap_or_else(|| "star".into());
    match shape.as_str() {
        "star" => {
            let cos = doc
                .list("domain", "cos")?
                .ok_or_else(|| ConfigError::validation("cos", "a star domain needs radius coefficients"))?;
            let sin = doc.list("domain", "sin")?.unwrap_or_default();
            let center = match doc.list("domain", "center")? {
                None => Vec2::zeros(),
                Some(c) if c.len() == 2 => Vec2::new(c[0], c[1]),
                Some(c) => {
                    return Err(ConfigError::validation("center", format!("needs 2 coordinates, got {}", c.len())))
                }
            };
            StarDomain::new(center, &cos, &sin)
                .map(DomainSpec::Star)
                .map_err(|e| ConfigError::validation("cos", e.to_string()))
        }
        "rectangle" => Ok(DomainSpec::Rectangle {
            width: positive("width", doc.number("domain", "width")?.unwrap_or(1.0))?,
            height: positive("height", doc.number("domain", "height")?.unwrap_or(1.0))?,
        }),
        other => Err(ConfigError::validation("shape", format!("expected star or rectangle, got `{other}`"))),
    }
}

fn parse_displacement(doc: &Document, domain: &DomainSpec) -> Result<Displacement, ConfigError> {
    let class = match (doc.string("family", "class"), domain) {
        (Some(c), _) => c,
        (None, DomainSpec::Rectangle { .. }) => return Ok(Displacement::Zero),
        (None, DomainSpec::Star(_)) => {
            return Err(ConfigError::validation("class", "a star domain needs a perturbation family"))
        }
    };
    let class = match class.as_str() {
        "zero" => return Ok(Displacement::Zero),
        "smooth" => SmoothnessClass::Smooth {
            frequency: doc.number("family", "frequency")?.unwrap_or(2),
        },
        "holder" => SmoothnessClass::HolderC1a {
            alpha: doc
                .number("family", "alpha")?
                .ok_or_else(|| ConfigError::validation("alpha", "holder family needs alpha"))?,
        },
        "c1" => SmoothnessClass::C1,
        "lipschitz" => SmoothnessClass::Lipschitz {
            slope: doc.number("family", "slope")?.unwrap_or(0.5),
        },
        other => {
            return Err(ConfigError::validation(
                "class",
                format!("expected zero, smooth, holder, c1 or lipschitz, got `{other}`"),
            ))
        }
    };
    let shape = match doc.string("family", "profile").as_deref().unwrap_or("cos") {
        "cos" => ProfileShape::Cos,
        "sin" => ProfileShape::Sin,
        "sawtooth" => ProfileShape::Sawtooth,
        "constant" => ProfileShape::Constant,
        other => {
            return Err(ConfigError::validation(
                "profile",
                format!("expected cos, sin, sawtooth or constant, got `{other}`"),
            ))
        }
    };
    let offset = doc.number("family", "offset")?.unwrap_or(0.0);
    let profile = Profile::with_offset(shape, offset).map_err(|e| ConfigError::validation("offset", e.to_string()))?;
    let family = PerturbationFamily::new(class, profile).map_err(|e| {
        let field = match class {
            SmoothnessClass::HolderC1a { .. } => "alpha",
            _ => "slope",
        };
        ConfigError::validation(field, e.to_string())
    })?;
    Ok(Displacement::Family(family))
}

fn parse_epsilons(doc: &Document) -> Result<Vec<f64>, ConfigError> {
    let values = match doc.list("epsilon", "values")? {
        Some(v) => {
            if doc.raw("epsilon", "start").is_some() || doc.raw("epsilon", "count").is_some() {
                return Err(ConfigError::validation("values", "give either values or start/factor/count"));
            }
            v
        }
        None => {
            let start: f64 = doc
                .number("epsilon", "start")?
                .ok_or_else(|| ConfigError::validation("start", "amplitude sequence is missing"))?;
            let factor: f64 = doc.number("epsilon", "factor")?.unwrap_or(0.5);
            let count: usize = doc.number("epsilon", "count")?.unwrap_or(1);
            positive("start", start)?;
            if !(factor > 0.0 && factor < 1.0) {
                return Err(ConfigError::validation("factor", format!("must lie in (0, 1), got {factor}")));
            }
            at_least("count", count, 1)?;
            (0..count).map(|i| start * factor.powi(i as i32)).collect()
        }
    };
    if values.is_empty() {
        return Err(ConfigError::validation("values", "empty amplitude sequence"));
    }
    for &v in &values {
        positive("values", v)?;
    }
    if values.windows(2).any(|w| w[1] >= w[0]) {
        return Err(ConfigError::validation("values", "amplitudes must be strictly decreasing"));
    }
    Ok(values)
}

/// Parses and validates a configuration, applying defaults.
pub fn parse_config(text: &str) -> Result<StudyConfig, ConfigError> {
    let doc = tokenize(text)?;
    let domain = parse_domain(&doc)?;
    let displacement = parse_displacement(&doc, &domain)?;
    let epsilons = parse_epsilons(&doc)?;

    let cluster_target = match doc.number::<f64>("cluster", "target")? {
        Some(t) if t >= 0.0 && t.is_finite() => Some(t),
        Some(t) => return Err(ConfigError::validation("target", format!("must be non-negative, got {t}"))),
        None => None,
    };
    let cluster_rel_tol = positive("rel_tol", doc.number("cluster", "rel_tol")?.unwrap_or(0.05))?;
    let eig_count = at_least("eig_count", doc.number("cluster", "eig_count")?.unwrap_or(8), 2)?;

    let defaults = ResolutionPolicy::default();
    let policy = ResolutionPolicy {
        elements_per_oscillation: at_least(
            "per_oscillation",
            doc.number("mesh", "per_oscillation")?.unwrap_or(defaults.elements_per_oscillation),
            4,
        )?,
        min_angular: at_least("min_angular", doc.number("mesh", "min_angular")?.unwrap_or(256), 4)?,
        vertex_cap: at_least("vertex_cap", doc.number("mesh", "vertex_cap")?.unwrap_or(defaults.vertex_cap), 1)?,
    };

    let sd = EigenSolverOptions::default();
    let solver = EigenSolverOptions {
        tol: positive("tol", doc.number("solver", "tol")?.unwrap_or(sd.tol))?,
        max_iterations: at_least("max_iterations", doc.number("solver", "max_iterations")?.unwrap_or(sd.max_iterations), 1)?,
        dense_threshold: doc.number("solver", "dense_threshold")?.unwrap_or(sd.dense_threshold),
        guard_vectors: doc.number("solver", "guard_vectors")?.unwrap_or(sd.guard_vectors),
    };

    let plot = doc.string("output", "plot");
    let output = OutputSpec {
        dir: PathBuf::from(doc.string("output", "dir").unwrap_or_else(|| ".".into())),
        csv: doc.string("output", "csv").unwrap_or_else(|| "report.csv".into()),
        write_plot: plot.is_some(),
        plot: plot.unwrap_or_else(|| "report.svg".into()),
        mesh_dump: doc.string("output", "mesh_dump").map(PathBuf::from),
    };

    let form = match doc.string("run", "form").as_deref().unwrap_or("boundary") {
        "boundary" => FormSelection::Boundary,
        "volume" => FormSelection::Volume,
        "both" => FormSelection::Both,
        other => {
            return Err(ConfigError::validation("form", format!("expected boundary, volume or both, got `{other}`")))
        }
    };
    Ok(StudyConfig {
        domain,
        displacement,
        epsilons,
        cluster_target,
        cluster_rel_tol,
        eig_count,
        policy,
        solver,
        output,
        workers: at_least("workers", doc.number("run", "workers")?.unwrap_or(1), 1)?,
        form,
        shell_steps: at_least("shell_steps", doc.number("run", "shell_steps")?.unwrap_or(4), 1)?,
        samples_per_node: at_least("samples_per_node", doc.number("run", "samples_per_node")?.unwrap_or(4), 1)?,
    })
}
