//! Named instance families used by the CLI and the test suites: analytic
//! densities and star bodies with family-specific default boxes, node
//! counts, and polar output domains, plus seeded random families.
//!
//! Every family declares a sampling box where the neglected tail mass is
//! negligible relative to the stated verification tolerances, so box choice
//! never silently dominates a margin.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::grid::{GridBox, GridError, GridFunction};
use crate::starbody::{
    ball_body, cosine_perturbed_body, cross_polytope_body, cube_body, ellipsoid_body,
    random_star_body, AngularGrid, BodyError, StarBody,
};

#[derive(Debug, Error)]
pub enum InstanceError {
    #[error("cannot parse instance: {0}")]
    Parse(String),
    #[error("invalid instance: {0}")]
    Invalid(String),
    #[error(transparent)]
    Grid(#[from] GridError),
    #[error(transparent)]
    Body(#[from] BodyError),
}

/// Which family an instance comes from, with its parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum InstanceKind {
    Gaussian,
    ScaledGaussian { a: f64 },
    Exponential,
    IndicatorInterval { a: f64, b: f64 },
    IndicatorBox,
    LogconcaveMixture { seed: u64, components: usize },
    GridFile { path: String },
    BodyFamily { name: String, params: Vec<f64> },
    BodyFile { path: String },
}

/// Declarative description of a test function or body.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InstanceSpec {
    #[serde(flatten)]
    pub kind: InstanceKind,
    #[serde(default = "one")]
    pub dim: usize,
    /// Replaces the family sampling box (lower and upper corners).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub box_override: Option<(Vec<f64>, Vec<f64>)>,
    /// Replaces the family node counts: one entry for all axes, or one per
    /// axis (latitude and longitude for sphere grids).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub resolution: Option<Vec<usize>>,
}

fn one() -> usize {
    1
}

/// A materialized instance.
#[derive(Debug, Clone)]
pub enum Instance {
    Function(GridFunction),
    Body(StarBody),
}

impl Instance {
    pub fn as_function(&self) -> Option<&GridFunction> {
        match self {
            Instance::Function(f) => Some(f),
            Instance::Body(_) => None,
        }
    }

    pub fn as_body(&self) -> Option<&StarBody> {
        match self {
            Instance::Body(b) => Some(b),
            Instance::Function(_) => None,
        }
    }
}

/// Splits `name(a, b, ...)` into the name and raw argument strings.
fn split_call(text: &str) -> Result<(&str, Vec<&str>), InstanceError> {
    let text = text.trim();
    match text.find('(') {
        None => Ok((text, vec![])),
        Some(open) => {
            if !text.ends_with(')') {
                return Err(InstanceError::Parse(format!(
                    "unbalanced parentheses in `{text}`"
                )));
            }
            let name = text[..open].trim();
            let inner = &text[open + 1..text.len() - 1];
            let args = if inner.trim().is_empty() {
                vec![]
            } else {
                inner.split(',').map(str::trim).collect()
            };
            Ok((name, args))
        }
    }
}

fn num_args(name: &str, args: &[&str]) -> Result<Vec<f64>, InstanceError> {
    args.iter()
        .map(|a| {
            a.parse::<f64>().map_err(|_| {
                InstanceError::Parse(format!("`{name}` expects numeric arguments, got `{a}`"))
            })
        })
        .collect()
}

fn arity(name: &str, args: &[&str], allowed: &[usize]) -> Result<(), InstanceError> {
    if allowed.contains(&args.len()) {
        Ok(())
    } else {
        Err(InstanceError::Parse(format!(
            "`{name}` takes {allowed:?} arguments, got {}",
            args.len()
        )))
    }
}

impl InstanceSpec {
    pub fn new(kind: InstanceKind, dim: usize) -> Result<Self, InstanceError> {
        let spec = InstanceSpec {
            kind,
            dim,
            box_override: None,
            resolution: None,
        };
        spec.validate()?;
        Ok(spec)
    }

    /// Parses the CLI instance grammar `name` or `name(arg, ...)`.
    /// Body family names accept both hyphenated and underscored spellings.
    pub fn parse(text: &str, dim: usize) -> Result<Self, InstanceError> {
        let (name, raw) = split_call(text)?;
        let canon = name.replace('-', "_");
        let kind = match canon.as_str() {
            "gaussian" => {
                arity(name, &raw, &[0])?;
                InstanceKind::Gaussian
            }
            "scaled_gaussian" => {
                arity(name, &raw, &[1])?;
                InstanceKind::ScaledGaussian {
                    a: num_args(name, &raw)?[0],
                }
            }
            "exponential" => {
                arity(name, &raw, &[0])?;
                InstanceKind::Exponential
            }
            "indicator_interval" => {
                arity(name, &raw, &[0, 2])?;
                let v = num_args(name, &raw)?;
                let (a, b) = if v.is_empty() { (-1.0, 1.0) } else { (v[0], v[1]) };
                InstanceKind::IndicatorInterval { a, b }
            }
            "indicator_box" => {
                arity(name, &raw, &[0])?;
                InstanceKind::IndicatorBox
            }
            "logconcave_mixture" => {
                arity(name, &raw, &[1, 2])?;
                let v = num_args(name, &raw)?;
                InstanceKind::LogconcaveMixture {
                    seed: v[0] as u64,
                    components: if v.len() > 1 { v[1] as usize } else { 3 },
                }
            }
            "grid_file" => {
                arity(name, &raw, &[1])?;
                InstanceKind::GridFile {
                    path: raw[0].to_string(),
                }
            }
            "body_file" => {
                arity(name, &raw, &[1])?;
                InstanceKind::BodyFile {
                    path: raw[0].to_string(),
                }
            }
            "ball" | "cube" | "cross_polytope" | "ellipsoid" | "cosine_perturbed"
            | "random_star" => InstanceKind::BodyFamily {
                name: canon.clone(),
                params: num_args(name, &raw)?,
            },
            other => {
                return Err(InstanceError::Parse(format!(
                    "unknown instance family `{other}`"
                )))
            }
        };
        InstanceSpec::new(kind, dim)
    }

    /// Canonical `name(args)` form, also used as the generated-file stem.
    pub fn describe(&self) -> String {
        match &self.kind {
            InstanceKind::Gaussian => "gaussian".into(),
            InstanceKind::ScaledGaussian { a } => format!("scaled_gaussian({a})"),
            InstanceKind::Exponential => "exponential".into(),
            InstanceKind::IndicatorInterval { a, b } => format!("indicator_interval({a},{b})"),
            InstanceKind::IndicatorBox => "indicator_box".into(),
            InstanceKind::LogconcaveMixture { seed, components } => {
                format!("logconcave_mixture({seed},{components})")
            }
            InstanceKind::GridFile { path } => format!("grid_file({path})"),
            InstanceKind::BodyFamily { name, params } => {
                if params.is_empty() {
                    name.clone()
                } else {
                    let args: Vec<String> = params.iter().map(|p| p.to_string()).collect();
                    format!("{name}({})", args.join(","))
                }
            }
            InstanceKind::BodyFile { path } => format!("body_file({path})"),
        }
    }

    /// The seed baked into a random family, if any.
    pub fn seed(&self) -> Option<u64> {
        match &self.kind {
            InstanceKind::LogconcaveMixture { seed, .. } => Some(*seed),
            InstanceKind::BodyFamily { name, params } if name == "random_star" => {
                params.first().map(|s| *s as u64)
            }
            _ => None,
        }
    }

    pub fn is_body(&self) -> bool {
        matches!(
            self.kind,
            InstanceKind::BodyFamily { .. } | InstanceKind::BodyFile { .. }
        )
    }

    pub fn validate(&self) -> Result<(), InstanceError> {
        if !(1..=3).contains(&self.dim) {
            return Err(InstanceError::Invalid(format!(
                "dim must be 1, 2, or 3, got {}",
                self.dim
            )));
        }
        match &self.kind {
            InstanceKind::ScaledGaussian { a } => {
                if !(a.is_finite() && *a > 0.0) {
                    return Err(InstanceError::Invalid(format!(
                        "scaled_gaussian needs a > 0, got {a}"
                    )));
                }
            }
            InstanceKind::Exponential | InstanceKind::IndicatorInterval { .. } => {
                if self.dim != 1 {
                    return Err(InstanceError::Invalid(format!(
                        "{} is one-dimensional",
                        self.describe()
                    )));
                }
                if let InstanceKind::IndicatorInterval { a, b } = self.kind {
                    if !(a.is_finite() && b.is_finite() && a < b) {
                        return Err(InstanceError::Invalid(format!(
                            "indicator_interval needs a < b, got [{a}, {b}]"
                        )));
                    }
                }
            }
            InstanceKind::LogconcaveMixture { components, .. } => {
                if !(1..=16).contains(components) {
                    return Err(InstanceError::Invalid(format!(
                        "logconcave_mixture needs 1..=16 components, got {components}"
                    )));
                }
            }
            InstanceKind::BodyFamily { name, params } => {
                if self.dim < 2 {
                    return Err(InstanceError::Invalid(
                        "bodies are two- or three-dimensional".into(),
                    ));
                }
                match name.as_str() {
                    "ball" | "cube" | "cross_polytope" => arity(name, &[], &[params.len()])
                        .map_err(|_| {
                            InstanceError::Invalid(format!("`{name}` takes no parameters"))
                        })
                        .and(if params.is_empty() {
                            Ok(())
                        } else {
                            Err(InstanceError::Invalid(format!(
                                "`{name}` takes no parameters"
                            )))
                        })?,
                    "ellipsoid" => {
                        if params.len() != self.dim {
                            return Err(InstanceError::Invalid(format!(
                                "ellipsoid needs {} semi-axes, got {}",
                                self.dim,
                                params.len()
                            )));
                        }
                    }
                    "cosine_perturbed" => {
                        if params.len() != 2 {
                            return Err(InstanceError::Invalid(
                                "cosine_perturbed takes (amplitude, mode)".into(),
                            ));
                        }
                    }
                    "random_star" => {
                        if params.is_empty() || params.len() > 2 {
                            return Err(InstanceError::Invalid(
                                "random_star takes (seed) or (seed, smoothness)".into(),
                            ));
                        }
                    }
                    other => {
                        return Err(InstanceError::Invalid(format!(
                            "unknown body family `{other}`"
                        )))
                    }
                }
            }
            _ => {}
        }
        Ok(())
    }

    /// Per-axis node counts for functions, honoring the resolution override.
    fn function_counts(&self, default_counts: &[usize]) -> Result<Vec<usize>, InstanceError> {
        match &self.resolution {
            None => Ok(default_counts.to_vec()),
            Some(r) if r.len() == 1 => Ok(vec![r[0]; self.dim]),
            Some(r) if r.len() == self.dim => Ok(r.clone()),
            Some(r) => Err(InstanceError::Invalid(format!(
                "resolution override has {} entries for a {}-dimensional instance",
                r.len(),
                self.dim
            ))),
        }
    }

    fn function_box(
        &self,
        default_lower: Vec<f64>,
        default_upper: Vec<f64>,
        default_counts: &[usize],
    ) -> Result<GridBox, InstanceError> {
        let counts = self.function_counts(default_counts)?;
        let (lower, upper) = match &self.box_override {
            None => (default_lower, default_upper),
            Some((lo, hi)) => (lo.clone(), hi.clone()),
        };
        Ok(GridBox::new(lower, upper, counts)?)
    }

    fn angular_grid(&self) -> Result<AngularGrid, InstanceError> {
        match (&self.resolution, self.dim) {
            (None, 2) => Ok(AngularGrid::default_circle()),
            (None, 3) => Ok(AngularGrid::default_sphere()),
            (Some(r), 2) if r.len() == 1 => Ok(AngularGrid::circle(r[0])?),
            (Some(r), 3) if r.len() == 2 => Ok(AngularGrid::sphere(r[0], r[1])?),
            (Some(r), d) => Err(InstanceError::Invalid(format!(
                "angular resolution {r:?} does not fit a {d}-dimensional body"
            ))),
            _ => unreachable!("validate rejects other dims"),
        }
    }

    /// Materializes the instance.
    pub fn build(&self) -> Result<Instance, InstanceError> {
        self.validate()?;
        let d = self.dim;
        match &self.kind {
            InstanceKind::Gaussian => {
                let counts = default_gaussian_counts(d);
                let bx = self.function_box(vec![-8.0; d], vec![8.0; d], &counts)?;
                Ok(Instance::Function(GridFunction::from_log_fn(bx, |x| {
                    -0.5 * x.iter().map(|v| v * v).sum::<f64>()
                })))
            }
            InstanceKind::ScaledGaussian { a } => {
                let a = *a;
                let half = 8.0 / a.sqrt();
                let counts = default_gaussian_counts(d);
                let bx = self.function_box(vec![-half; d], vec![half; d], &counts)?;
                Ok(Instance::Function(GridFunction::from_log_fn(bx, move |x| {
                    -0.5 * a * x.iter().map(|v| v * v).sum::<f64>()
                })))
            }
            InstanceKind::Exponential => {
                let bx = self.function_box(vec![0.0], vec![40.0], &[1601])?;
                Ok(Instance::Function(GridFunction::from_log_fn(bx, |x| -x[0])))
            }
            InstanceKind::IndicatorInterval { a, b } => {
                let (a, b) = (*a, *b);
                let pad = 0.5 * (b - a);
                let bx = self.function_box(vec![a - pad], vec![b + pad], &[4001])?;
                Ok(Instance::Function(GridFunction::from_log_fn(bx, move |x| {
                    if (a..=b).contains(&x[0]) {
                        0.0
                    } else {
                        f64::NEG_INFINITY
                    }
                })))
            }
            InstanceKind::IndicatorBox => {
                let counts = default_indicator_box_counts(d);
                let bx = self.function_box(vec![-2.0; d], vec![2.0; d], &counts)?;
                Ok(Instance::Function(GridFunction::from_log_fn(bx, |x| {
                    if x.iter().all(|v| v.abs() <= 1.0) {
                        0.0
                    } else {
                        f64::NEG_INFINITY
                    }
                })))
            }
            InstanceKind::LogconcaveMixture { seed, components } => {
                let counts = default_mixture_counts(d);
                let bx = self.function_box(vec![-10.0; d], vec![10.0; d], &counts)?;
                Ok(Instance::Function(logconcave_mixture_fn(
                    bx,
                    d,
                    *seed,
                    *components,
                )))
            }
            InstanceKind::GridFile { path } => {
                let f = GridFunction::load_path(path)?;
                if f.dim() != d && self.dim != 1 {
                    return Err(InstanceError::Invalid(format!(
                        "grid file is {}-dimensional, spec says {d}",
                        f.dim()
                    )));
                }
                Ok(Instance::Function(f))
            }
            InstanceKind::BodyFamily { name, params } => {
                let grid = self.angular_grid()?;
                let body = match name.as_str() {
                    "ball" => ball_body(grid),
                    "cube" => cube_body(grid),
                    "cross_polytope" => cross_polytope_body(grid),
                    "ellipsoid" => ellipsoid_body(grid, params)?,
                    "cosine_perturbed" => {
                        cosine_perturbed_body(grid, params[0], params[1] as usize)?
                    }
                    "random_star" => random_star_body(grid, params[0] as u64),
                    _ => unreachable!("validate rejects other names"),
                };
                Ok(Instance::Body(body))
            }
            InstanceKind::BodyFile { path } => {
                let body = StarBody::load_json_path(path)?;
                if body.dim() != d && self.dim != 1 {
                    return Err(InstanceError::Invalid(format!(
                        "body file is {}-dimensional, spec says {d}",
                        body.dim()
                    )));
                }
                Ok(Instance::Body(body))
            }
        }
    }

    /// Family-specific polar output box, where the default mirrored box
    /// would truncate the polar support (one-sided or strongly skewed
    /// families). `None` means the mirrored default is adequate.
    pub fn polar_box(&self) -> Option<GridBox> {
        match &self.kind {
            InstanceKind::Exponential => {
                Some(GridBox::new(vec![-30.0], vec![1.0], vec![4001]).expect("valid"))
            }
            InstanceKind::IndicatorInterval { .. } => {
                Some(GridBox::symmetric(&[40.0], &[4001]).expect("valid"))
            }
            InstanceKind::IndicatorBox => {
                let d = self.dim;
                let counts = default_indicator_box_counts(d);
                Some(GridBox::symmetric(&vec![35.0; d], &counts).expect("valid"))
            }
            InstanceKind::ScaledGaussian { a } => {
                let d = self.dim;
                let half = 8.0 * a.sqrt();
                let counts = default_gaussian_counts(d);
                Some(GridBox::symmetric(&vec![half; d], &counts).expect("valid"))
            }
            _ => None,
        }
    }
}

fn default_gaussian_counts(d: usize) -> Vec<usize> {
    let c = match d {
        1 => 1601,
        2 => 401,
        _ => 101,
    };
    vec![c; d]
}

fn default_indicator_box_counts(d: usize) -> Vec<usize> {
    let c = match d {
        1 => 4001,
        2 => 401,
        _ => 101,
    };
    vec![c; d]
}

fn default_mixture_counts(d: usize) -> Vec<usize> {
    let c = match d {
        1 => 1601,
        2 => 301,
        _ => 101,
    };
    vec![c; d]
}

/// Seeded random log-concave density: `-log f` is the maximum of
/// `components` convex quadratic-plus-affine forms, which keeps the result
/// log-concave by construction.
pub fn logconcave_mixture_fn(
    box_: GridBox,
    dim: usize,
    seed: u64,
    components: usize,
) -> GridFunction {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut forms = Vec::with_capacity(components);
    for _ in 0..components {
        let q: f64 = rng.random_range(0.6..1.8);
        let m: Vec<f64> = (0..dim).map(|_| rng.random_range(-1.0..1.0)).collect();
        let aff: Vec<f64> = (0..dim).map(|_| rng.random_range(-0.5..0.5)).collect();
        let c: f64 = rng.random_range(-0.5..0.5);
        forms.push((q, m, aff, c));
    }
    GridFunction::from_log_fn(box_, move |x| {
        let mut u = f64::NEG_INFINITY;
        for (q, m, aff, c) in &forms {
            let quad: f64 = x
                .iter()
                .zip(m)
                .map(|(xi, mi)| (xi - mi) * (xi - mi))
                .sum();
            let lin: f64 = x.iter().zip(aff).map(|(xi, ai)| xi * ai).sum();
            let val = 0.5 * q * quad + lin + c;
            if val > u {
                u = val;
            }
        }
        -u
    })
}

/// Sidecar metadata written next to generated instance files.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct InstanceSidecar {
    pub family: String,
    pub seed: u64,
    pub dim: usize,
}
