//! Batch-run configuration: the TOML schema, semantic validation, and
//! resolution into solver-ready objects.
//!
//! Phases and pair indices are 1-based in config files (`[1, 3, 0.25]` is
//! `m_13 = 1/4`); everything is 0-based once resolved. `epsilon` and `dt`
//! accept either absolute numbers or the symbolic forms `"c/K"` and
//! `"c/K^2"`, resolved against the (then necessarily uniform) grid size.

use std::path::{Path, PathBuf};
use std::sync::Arc;

use serde::Deserialize;
use thiserror::Error;

use crate::geometry::{GeometryError, Shape};
use crate::grid::SpectralGrid;
use crate::mobility::{
    self, DecompositionChoice, HarmonicComponent, HarmonicDecomposition, MobilitySet,
};
use crate::raster;
use crate::solver::SolverParams;
use crate::tension::{self, TensionSet};

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("config parse error: {0}")]
    Parse(#[from] toml::de::Error),
    #[error("config field {field}: {message}")]
    Invalid { field: String, message: String },
    #[error("tensions are not usable: {0}")]
    Tensions(#[from] tension::TensionError),
    #[error("mobilities are not usable: {0}")]
    Mobilities(#[from] mobility::MobilityError),
    #[error("raster input: {0}")]
    Raster(#[from] raster::RasterError),
    #[error("shape error: {0}")]
    Geometry(#[from] GeometryError),
    #[error("grid error: {0}")]
    Grid(#[from] crate::grid::GridError),
}

fn invalid(field: &str, message: impl Into<String>) -> ConfigError {
    ConfigError::Invalid {
        field: field.to_string(),
        message: message.into(),
    }
}

/// Hard caps on untrusted config input, to keep allocations bounded.
const MAX_AXIS_SIZE: usize = 8192;
const MAX_NODES: usize = 1 << 27;
const MAX_PHASES: usize = 16;

/// A number, or `"c/K"` / `"c/K^2"` resolved against the grid size.
#[derive(Debug, Clone, Deserialize, PartialEq)]
#[serde(untagged)]
pub enum ScaleSpec {
    Absolute(f64),
    Symbolic(String),
}

impl ScaleSpec {
    pub fn resolve(&self, field: &str, k: Option<usize>) -> Result<f64, ConfigError> {
        match self {
            ScaleSpec::Absolute(v) => Ok(*v),
            ScaleSpec::Symbolic(text) => {
                let (lhs, rhs) = text
                    .split_once('/')
                    .ok_or_else(|| invalid(field, format!("cannot parse {text:?}")))?;
                let c: f64 = lhs
                    .trim()
                    .parse()
                    .map_err(|_| invalid(field, format!("bad coefficient in {text:?}")))?;
                let power = match rhs.trim() {
                    "K" => 1,
                    "K^2" => 2,
                    other => {
                        return Err(invalid(
                            field,
                            format!("expected K or K^2 after the slash, got {other:?}"),
                        ))
                    }
                };
                let k = k.ok_or_else(|| {
                    invalid(field, "symbolic form needs a uniform grid size")
                })? as f64;
                Ok(c / k.powi(power))
            }
        }
    }

    pub fn describe(&self) -> Option<&str> {
        match self {
            ScaleSpec::Absolute(_) => None,
            ScaleSpec::Symbolic(s) => Some(s),
        }
    }
}

/// Pairwise coefficients: either an upper-triangular list of 1-based
/// `[i, j, value]` entries or a full symmetric matrix.
#[derive(Debug, Clone, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct PairTable {
    #[serde(default)]
    pub pairs: Option<Vec<(usize, usize, f64)>>,
    #[serde(default)]
    pub matrix: Option<Vec<Vec<f64>>>,
}

impl PairTable {
    /// Full symmetric matrix with 0-based indexing.
    fn to_matrix(&self, field: &str, n: usize) -> Result<Vec<Vec<f64>>, ConfigError> {
        match (&self.pairs, &self.matrix) {
            (Some(_), Some(_)) => Err(invalid(field, "give either pairs or matrix, not both")),
            (None, None) => Err(invalid(field, "needs a pairs list or a matrix")),
            (None, Some(m)) => {
                if m.len() != n || m.iter().any(|r| r.len() != n) {
                    return Err(invalid(field, format!("matrix must be {n}x{n}")));
                }
                Ok(m.clone())
            }
            (Some(pairs), None) => {
                let mut m = vec![vec![0.0; n]; n];
                let mut seen = vec![false; n * n];
                for (idx, &(i, j, v)) in pairs.iter().enumerate() {
                    let entry = format!("{field}.pairs[{idx}]");
                    if i == 0 || j == 0 || i > n || j > n || i == j {
                        return Err(invalid(
                            &entry,
                            format!("indices ({i},{j}) must be distinct and in 1..={n}"),
                        ));
                    }
                    if !v.is_finite() || v < 0.0 {
                        return Err(invalid(&entry, format!("value {v} must be nonnegative")));
                    }
                    let (a, b) = (i.min(j) - 1, i.max(j) - 1);
                    if seen[a * n + b] {
                        return Err(invalid(&entry, format!("pair ({i},{j}) appears twice")));
                    }
                    seen[a * n + b] = true;
                    m[a][b] = v;
                    m[b][a] = v;
                }
                Ok(m)
            }
        }
    }
}

/// One entry of the `shapes` list.
#[derive(Debug, Clone, Deserialize, PartialEq)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ShapeSpec {
    Ball {
        center: Vec<f64>,
        radius: f64,
    },
    HalfSpace {
        normal: Vec<f64>,
        offset: f64,
    },
    Union {
        shapes: Vec<ShapeSpec>,
    },
    Intersection {
        shapes: Vec<ShapeSpec>,
    },
    Complement {
        shape: Box<ShapeSpec>,
    },
    /// Region of pixels equal to `label` in an 8-bit image (PGM, or raw with
    /// sidecar dimensions).
    Raster {
        image: String,
        label: u8,
    },
}

#[derive(Debug, Clone, Deserialize, PartialEq, Default)]
#[serde(deny_unknown_fields)]
pub struct OutputSpec {
    #[serde(default)]
    pub dir: Option<String>,
    /// Grayscale composite weights `c_k`; the written value is
    /// `sum_k c_k u_k` mapped linearly onto 0..255.
    #[serde(default)]
    pub composite_weights: Option<Vec<f64>>,
    /// 3D only: also write mid-plane slices along the other two axes.
    #[serde(default)]
    pub axis_slices: bool,
}

/// The TOML schema, as written by users.
#[derive(Debug, Clone, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    /// Optional; checked against `sizes` when present.
    #[serde(default)]
    pub dim: Option<usize>,
    pub sizes: Vec<usize>,
    /// Box lengths, default 1 per axis.
    #[serde(default)]
    pub lengths: Option<Vec<f64>>,
    pub n_phases: usize,

    pub epsilon: ScaleSpec,
    pub dt: ScaleSpec,
    #[serde(default)]
    pub alpha: f64,
    /// Defaults to machine precision.
    #[serde(default)]
    pub beta: Option<f64>,

    #[serde(default)]
    pub t_end: Option<f64>,
    #[serde(default)]
    pub n_steps: Option<usize>,

    /// 0 means a snapshot of the initial state only.
    #[serde(default)]
    pub snapshot_every: usize,
    /// 0 means diagnostics for the initial and final states only.
    #[serde(default)]
    pub diagnostic_every: usize,

    /// "canonical", "sparse" or "explicit".
    #[serde(default = "default_decomposition")]
    pub decomposition: String,
    /// Per-component phase coefficients, required when explicit.
    #[serde(default)]
    pub decomposition_components: Option<Vec<Vec<f64>>>,

    pub tensions: PairTable,
    pub mobilities: PairTable,

    #[serde(default)]
    pub shapes: Option<Vec<ShapeSpec>>,
    /// Label image path; its `.json` sidecar maps pixel values to phases.
    #[serde(default)]
    pub raster: Option<String>,

    #[serde(default)]
    pub output: OutputSpec,
}

fn default_decomposition() -> String {
    "canonical".to_string()
}

impl RunConfig {
    pub fn from_toml_str(text: &str) -> Result<Self, ConfigError> {
        Ok(toml::from_str(text)?)
    }

    pub fn from_path(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::from_toml_str(&text)
    }

    /// Uniform grid size if all axes agree; symbolic specs require it.
    fn uniform_k(&self) -> Option<usize> {
        let first = *self.sizes.first()?;
        self.sizes.iter().all(|&k| k == first).then_some(first)
    }
}

/// CLI-level overrides applied on top of a config file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub output_dir: Option<PathBuf>,
    pub snapshot_every: Option<usize>,
}

/// Fully validated, solver-ready run description.
#[derive(Debug)]
pub struct ResolvedConfig {
    pub grid: SpectralGrid,
    pub n_phases: usize,
    pub tensions: TensionSet,
    pub mobility: MobilitySet,
    pub decomposition: HarmonicDecomposition,
    pub requested_mode: DecompositionChoice,
    /// True when sparse mode fell back to the canonical decomposition.
    pub sparse_fallback: bool,
    pub params: SolverParams,
    pub t_end: Option<f64>,
    pub snapshot_every: usize,
    pub diagnostic_every: usize,
    pub shapes: Vec<Shape>,
    pub output_dir: PathBuf,
    pub composite_weights: Vec<f64>,
    pub axis_slices: bool,
}

impl ResolvedConfig {
    /// Weights for the grayscale composite; the 3-phase default `[0, 2, 1]`
    /// matches the customary `2 u_2 + u_3` picture.
    fn default_weights(n: usize) -> Vec<f64> {
        if n == 3 {
            vec![0.0, 2.0, 1.0]
        } else {
            (0..n).map(|k| k as f64).collect()
        }
    }
}

fn build_shape(
    spec: &ShapeSpec,
    dim: usize,
    grid: &SpectralGrid,
    base_dir: &Path,
    field: &str,
) -> Result<Shape, ConfigError> {
    match spec {
        ShapeSpec::Ball { center, radius } => {
            if center.len() != dim {
                return Err(invalid(field, format!("center needs {dim} coordinates")));
            }
            Ok(Shape::ball(center.clone(), *radius)?)
        }
        ShapeSpec::HalfSpace { normal, offset } => {
            if normal.len() != dim {
                return Err(invalid(field, format!("normal needs {dim} coordinates")));
            }
            Ok(Shape::half_space(normal.clone(), *offset)?)
        }
        ShapeSpec::Union { shapes } => Ok(Shape::Union(
            shapes
                .iter()
                .enumerate()
                .map(|(i, s)| build_shape(s, dim, grid, base_dir, &format!("{field}[{i}]")))
                .collect::<Result<_, _>>()?,
        )),
        ShapeSpec::Intersection { shapes } => Ok(Shape::Intersection(
            shapes
                .iter()
                .enumerate()
                .map(|(i, s)| build_shape(s, dim, grid, base_dir, &format!("{field}[{i}]")))
                .collect::<Result<_, _>>()?,
        )),
        ShapeSpec::Complement { shape } => Ok(Shape::Complement(Box::new(build_shape(
            shape,
            dim,
            grid,
            base_dir,
            &format!("{field}.shape"),
        )?))),
        ShapeSpec::Raster { image, label } => {
            if dim != 2 {
                return Err(invalid(field, "raster shapes need a 2D grid"));
            }
            let (img, _) = raster::load_with_sidecar(&base_dir.join(image))?;
            raster_shape(&img, *label, grid)
        }
    }
}

fn raster_shape(
    image: &raster::LabelImage,
    label: u8,
    grid: &SpectralGrid,
) -> Result<Shape, ConfigError> {
    if image.width != grid.sizes()[0] || image.height != grid.sizes()[1] {
        return Err(GeometryError::RasterGridMismatch {
            w: image.width,
            h: image.height,
            gw: grid.sizes()[0],
            gh: grid.sizes()[1],
        }
        .into());
    }
    // image rows map to grid axis 1 (y), columns to axis 0 (x); transpose
    // into node order x slow, y fast to match signed_distance sampling
    let values = raster::signed_distance_field(image, label, grid.spacing(0), grid.spacing(1))?;
    Ok(Shape::RasterLabel(Arc::new(crate::geometry::RasterDistance {
        width: image.width,
        height: image.height,
        label,
        values,
    })))
}

/// Validates and resolves a parsed config against `base_dir` (for raster
/// paths) and optional CLI overrides.
pub fn resolve(
    config: &RunConfig,
    base_dir: &Path,
    default_output_stem: &str,
    overrides: &Overrides,
) -> Result<ResolvedConfig, ConfigError> {
    let dim = config.sizes.len();
    if dim != 2 && dim != 3 {
        return Err(invalid("sizes", format!("need 2 or 3 axes, got {dim}")));
    }
    if let Some(d) = config.dim {
        if d != dim {
            return Err(invalid(
                "dim",
                format!("dim = {d} disagrees with {dim} grid sizes"),
            ));
        }
    }
    let mut nodes = 1usize;
    for (axis, &k) in config.sizes.iter().enumerate() {
        if k == 0 || k > MAX_AXIS_SIZE {
            return Err(invalid(
                &format!("sizes[{axis}]"),
                format!("{k} is outside 1..={MAX_AXIS_SIZE}"),
            ));
        }
        nodes = nodes.saturating_mul(k);
    }
    if nodes > MAX_NODES {
        return Err(invalid(
            "sizes",
            format!("{nodes} nodes exceed the limit of {MAX_NODES}"),
        ));
    }
    let lengths = match &config.lengths {
        Some(l) => {
            if l.len() != dim {
                return Err(invalid("lengths", format!("need {dim} entries")));
            }
            l.clone()
        }
        None => vec![1.0; dim],
    };
    let grid = SpectralGrid::new(&config.sizes, &lengths)?;

    let n = config.n_phases;
    if n < 2 {
        return Err(invalid("n_phases", "need at least 2 phases"));
    }
    if n > MAX_PHASES {
        return Err(invalid(
            "n_phases",
            format!("{n} phases exceed the limit of {MAX_PHASES}"),
        ));
    }

    let tensions = tension::split_tensions(&config.tensions.to_matrix("tensions", n)?)?;
    let mobility = MobilitySet::from_matrix(&config.mobilities.to_matrix("mobilities", n)?)?;

    let requested_mode = match config.decomposition.as_str() {
        "canonical" => DecompositionChoice::Canonical,
        "sparse" => DecompositionChoice::Sparse,
        "explicit" => {
            let components = config.decomposition_components.clone().ok_or_else(|| {
                invalid(
                    "decomposition_components",
                    "explicit decomposition needs components",
                )
            })?;
            DecompositionChoice::Explicit(components)
        }
        other => {
            return Err(invalid(
                "decomposition",
                format!("unknown mode {other:?}; use canonical, sparse or explicit"),
            ))
        }
    };
    if config.decomposition_components.is_some() && config.decomposition != "explicit" {
        return Err(invalid(
            "decomposition_components",
            "only allowed with decomposition = \"explicit\"",
        ));
    }

    let mut sparse_fallback = false;
    let decomposition = match &requested_mode {
        DecompositionChoice::Canonical => mobility::canonical_decomposition(&mobility),
        DecompositionChoice::Sparse => {
            let dec = mobility::sparse_decomposition(&mobility);
            sparse_fallback = dec.p() != 1;
            dec
        }
        DecompositionChoice::Explicit(rows) => {
            for (p, row) in rows.iter().enumerate() {
                if row.len() != n {
                    return Err(invalid(
                        &format!("decomposition_components[{p}]"),
                        format!("needs {n} coefficients"),
                    ));
                }
                if let Some(v) = row.iter().find(|v| **v < 0.0 || !v.is_finite()) {
                    return Err(invalid(
                        &format!("decomposition_components[{p}]"),
                        format!("coefficient {v} must be nonnegative"),
                    ));
                }
            }
            let dec = HarmonicDecomposition::from_components(
                n,
                rows.iter()
                    .map(|r| HarmonicComponent::new(r.clone()))
                    .collect(),
            );
            let report = mobility::validate(&dec, &mobility)?;
            if !report.passes {
                return Err(invalid(
                    "decomposition_components",
                    format!(
                        "components do not rebuild the mobility matrix \
                         (max error {:.3e})",
                        report.max_reconstruction_error
                    ),
                ));
            }
            dec
        }
    };

    let uniform_k = config.uniform_k();
    let epsilon = config.epsilon.resolve("epsilon", uniform_k)?;
    let dt = config.dt.resolve("dt", uniform_k)?;
    if !(epsilon > 0.0) {
        return Err(invalid("epsilon", format!("resolved to {epsilon}")));
    }
    if !(dt > 0.0) {
        return Err(invalid("dt", format!("resolved to {dt}")));
    }

    let n_steps = match (config.t_end, config.n_steps) {
        (Some(_), Some(_)) => {
            return Err(invalid("t_end", "give either t_end or n_steps, not both"))
        }
        (None, None) => return Err(invalid("t_end", "one of t_end or n_steps is required")),
        (None, Some(steps)) => steps,
        (Some(t_end), None) => {
            if !(t_end >= 0.0) {
                return Err(invalid("t_end", format!("must be nonnegative, got {t_end}")));
            }
            // runs until the first step time reaches t_end
            (t_end / dt - 1e-9).ceil().max(0.0) as usize
        }
    };

    let mut params = SolverParams::new(epsilon, dt);
    params.alpha = config.alpha;
    if let Some(beta) = config.beta {
        params.beta = beta;
    }
    params.n_steps = n_steps;
    params.decomposition = requested_mode.clone();
    params.validate().map_err(|e| invalid("alpha/beta", e.to_string()))?;

    let shapes = match (&config.shapes, &config.raster) {
        (Some(_), Some(_)) => {
            return Err(invalid("raster", "give either shapes or raster, not both"))
        }
        (None, None) if n > 1 => {
            return Err(invalid(
                "shapes",
                format!("need {} shapes (one per non-ambient phase)", n - 1),
            ))
        }
        (None, None) => Vec::new(),
        (Some(specs), None) => {
            if specs.len() != n - 1 {
                return Err(invalid(
                    "shapes",
                    format!("need exactly {} shapes, got {}", n - 1, specs.len()),
                ));
            }
            specs
                .iter()
                .enumerate()
                .map(|(i, s)| build_shape(s, dim, &grid, base_dir, &format!("shapes[{i}]")))
                .collect::<Result<_, _>>()?
        }
        (None, Some(path)) => {
            if dim != 2 {
                return Err(invalid("raster", "raster initialization needs a 2D grid"));
            }
            let (image, sidecar) = raster::load_with_sidecar(&base_dir.join(path))?;
            let mut shapes = Vec::with_capacity(n - 1);
            for phase in 1..n {
                let label = sidecar.label_for_phase(phase).ok_or_else(|| {
                    invalid(
                        "raster",
                        format!("sidecar maps no pixel value to phase {phase}"),
                    )
                })?;
                shapes.push(raster_shape(&image, label, &grid)?);
            }
            shapes
        }
    };

    let composite_weights = match &config.output.composite_weights {
        Some(w) => {
            if w.len() != n {
                return Err(invalid(
                    "output.composite_weights",
                    format!("need {n} weights"),
                ));
            }
            if w.iter().any(|v| !v.is_finite()) {
                return Err(invalid("output.composite_weights", "weights must be finite"));
            }
            w.clone()
        }
        None => ResolvedConfig::default_weights(n),
    };

    let output_dir = overrides
        .output_dir
        .clone()
        .or_else(|| config.output.dir.as_ref().map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("out").join(default_output_stem));

    Ok(ResolvedConfig {
        grid,
        n_phases: n,
        tensions,
        mobility,
        decomposition,
        requested_mode,
        sparse_fallback,
        params,
        t_end: config.t_end,
        snapshot_every: overrides.snapshot_every.unwrap_or(config.snapshot_every),
        diagnostic_every: config.diagnostic_every,
        shapes,
        output_dir,
        composite_weights,
        axis_slices: config.output.axis_slices,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"
        sizes = [64, 64]
        n_phases = 3
        epsilon = "1.5/K"
        dt = "0.25/K^2"
        t_end = 0.001

        [tensions]
        pairs = [[1, 2, 1.0], [1, 3, 1.0], [2, 3, 1.0]]

        [mobilities]
        pairs = [[1, 2, 1.0], [1, 3, 1.0], [2, 3, 0.25]]

        [[shapes]]
        kind = "ball"
        center = [-0.25, 0.0]
        radius = 0.2

        [[shapes]]
        kind = "ball"
        center = [0.25, 0.0]
        radius = 0.2
    "#;

    fn resolve_str(text: &str) -> Result<ResolvedConfig, ConfigError> {
        let config = RunConfig::from_toml_str(text)?;
        resolve(&config, Path::new("."), "test", &Overrides::default())
    }

    #[test]
    fn minimal_config_resolves() {
        let r = resolve_str(MINIMAL).unwrap();
        assert_eq!(r.n_phases, 3);
        assert!((r.params.epsilon - 1.5 / 64.0).abs() < 1e-15);
        assert!((r.params.dt - 0.25 / 4096.0).abs() < 1e-20);
        assert_eq!(r.params.n_steps, (0.001f64 / (0.25 / 4096.0)).ceil() as usize);
        assert_eq!(r.decomposition.p(), 3);
        assert_eq!(r.tensions.phases(), &[0.5, 0.5, 0.5]);
        assert_eq!(r.composite_weights, vec![0.0, 2.0, 1.0]);
        assert_eq!(r.output_dir, PathBuf::from("out/test"));
    }

    #[test]
    fn symbolic_epsilon_resolution_example() {
        let text = MINIMAL.replace("[64, 64]", "[256, 256]");
        let r = resolve_str(&text).unwrap();
        assert_eq!(r.params.epsilon, 0.005859375);
    }

    #[test]
    fn sparse_fallback_is_reported() {
        let text = format!("decomposition = \"sparse\"\n{MINIMAL}");
        let r = resolve_str(&text).unwrap();
        assert!(r.sparse_fallback);
        assert_eq!(r.decomposition.p(), 3);

        let additive = text.replace("[2, 3, 0.25]", "[2, 3, 1.0]");
        let r = resolve_str(&additive).unwrap();
        assert!(!r.sparse_fallback);
        assert_eq!(r.decomposition.p(), 1);
    }

    #[test]
    fn negative_mobility_names_the_entry() {
        let text = MINIMAL.replace("[2, 3, 0.25]", "[2, 3, -0.25]");
        let err = resolve_str(&text).unwrap_err();
        let message = err.to_string();
        assert!(message.contains("mobilities.pairs[2]"), "{message}");
    }

    #[test]
    fn bad_pair_indices_rejected() {
        let text = MINIMAL.replace("[2, 3, 0.25]", "[2, 5, 0.25]");
        assert!(resolve_str(&text).is_err());
        let text = MINIMAL.replace("[2, 3, 0.25]", "[0, 1, 0.25]");
        assert!(resolve_str(&text).is_err());
        let text = MINIMAL.replace("[2, 3, 0.25]", "[3, 2, 0.25]\n    , [2, 3, 0.1]");
        assert!(resolve_str(&text).is_err(), "duplicate pair");
    }

    #[test]
    fn non_additive_tensions_are_a_hard_error() {
        // only the tensions list ends with [2, 3, 1.0]
        let text = MINIMAL.replace("[2, 3, 1.0]]", "[2, 3, 3.0]]");
        let err = resolve_str(&text).unwrap_err();
        assert!(matches!(err, ConfigError::Tensions(_)), "{err}");
    }

    #[test]
    fn matrix_form_is_accepted() {
        let text = MINIMAL.replace(
            "pairs = [[1, 2, 1.0], [1, 3, 1.0], [2, 3, 0.25]]",
            "matrix = [[0.0, 1.0, 1.0], [1.0, 0.0, 0.25], [1.0, 0.25, 0.0]]",
        );
        let r = resolve_str(&text).unwrap();
        assert_eq!(r.mobility.get(1, 2), 0.25);
    }

    #[test]
    fn explicit_components_validated() {
        let text = format!(
            "decomposition = \"explicit\"\n\
             decomposition_components = [[2.0, 2.0, 0.0], [2.0, 0.0, 2.0], [0.0, 2.0, 0.5]]\n\
             {MINIMAL}"
        );
        // (2,3) component rebuilds harmonic_pair(2, 0.5) = 0.4, not 0.25
        let text_bad = text.replace("[0.0, 2.0, 0.5]", "[0.0, 2.0, 2.0]");
        assert!(resolve_str(&text_bad).is_err());
        // harmonic_pair(2.0, 0.5) = 1/(0.5 + 2) = 0.4 -- still wrong
        assert!(resolve_str(&text).is_err());
        // correct third component for m_23 = 1/4: coefficients (0, 1/2, 1/2)
        let text_good = text.replace("[0.0, 2.0, 0.5]", "[0.0, 0.5, 0.5]");
        let r = resolve_str(&text_good).unwrap();
        assert_eq!(r.decomposition.p(), 3);
    }

    #[test]
    fn t_end_and_n_steps_are_exclusive() {
        let both = format!("n_steps = 5\n{MINIMAL}");
        assert!(resolve_str(&both).is_err());
        let neither = MINIMAL.replace("t_end = 0.001", "");
        assert!(resolve_str(&neither).is_err());
        let steps_only = MINIMAL.replace("t_end = 0.001", "n_steps = 7");
        assert_eq!(resolve_str(&steps_only).unwrap().params.n_steps, 7);
    }

    #[test]
    fn shape_count_must_match_phases() {
        let text = MINIMAL.replace(
            "[[shapes]]\n        kind = \"ball\"\n        center = [-0.25, 0.0]\n        radius = 0.2\n\n        ",
            "",
        );
        let err = resolve_str(&text).unwrap_err();
        assert!(err.to_string().contains("shapes"), "{err}");
    }

    #[test]
    fn symbolic_needs_uniform_grid() {
        let text = MINIMAL.replace("[64, 64]", "[64, 32]");
        assert!(resolve_str(&text).is_err());
        let absolute = text
            .replace("\"1.5/K\"", "0.02")
            .replace("\"0.25/K^2\"", "6.0e-5");
        assert!(resolve_str(&absolute).is_ok());
    }

    #[test]
    fn overrides_take_precedence() {
        let config = RunConfig::from_toml_str(MINIMAL).unwrap();
        let overrides = Overrides {
            output_dir: Some(PathBuf::from("/tmp/elsewhere")),
            snapshot_every: Some(42),
        };
        let r = resolve(&config, Path::new("."), "test", &overrides).unwrap();
        assert_eq!(r.output_dir, PathBuf::from("/tmp/elsewhere"));
        assert_eq!(r.snapshot_every, 42);
    }

    #[test]
    fn unknown_fields_rejected() {
        let text = format!("surprise = 1\n{MINIMAL}");
        assert!(RunConfig::from_toml_str(&text).is_err());
    }

    #[test]
    fn nested_shapes_parse() {
        let text = MINIMAL.replace(
            "kind = \"ball\"\n        center = [-0.25, 0.0]\n        radius = 0.2",
            "kind = \"intersection\"\n        shapes = [\n            { kind = \"ball\", center = [0.5, 0.5], radius = 0.3 },\n            { kind = \"half_space\", normal = [1.0, 0.0], offset = 0.5 },\n        ]",
        );
        let r = resolve_str(&text).unwrap();
        assert!(matches!(r.shapes[0], Shape::Intersection(_)));
    }
}
