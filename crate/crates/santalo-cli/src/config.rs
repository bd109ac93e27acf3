//! Run configuration: a JSON file provides defaults, command-line flags
//! override them field by field.

use std::path::{Path, PathBuf};

use serde::Deserialize;
use thiserror::Error;

use santalo::grid::GridBox;
use santalo::instances::{InstanceError, InstanceSpec};

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("config field `{field}`: {message}")]
    Field { field: String, message: String },
    #[error("cannot read config {path}: {message}")]
    Unreadable { path: String, message: String },
    #[error(transparent)]
    Instance(#[from] InstanceError),
}

fn field(name: &str, message: impl Into<String>) -> ConfigError {
    ConfigError::Field {
        field: name.into(),
        message: message.into(),
    }
}

/// Optional defaults loaded from `--config`. Instances may be spec strings
/// or full instance objects.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub instances: Option<Vec<serde_json::Value>>,
    pub dim: Option<usize>,
    pub lambda: Option<f64>,
    pub lambdas: Option<Vec<f64>>,
    pub direction: Option<Vec<f64>>,
    pub resolution: Option<Vec<usize>>,
    pub resolutions: Option<Vec<usize>>,
    #[serde(rename = "box")]
    pub box_: Option<(Vec<f64>, Vec<f64>)>,
    pub polar_box: Option<PolarBoxConfig>,
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
    pub format: Option<Vec<String>>,
}

#[derive(Debug, Deserialize)]
pub struct PolarBoxConfig {
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
    pub counts: Option<Vec<usize>>,
}

impl FileConfig {
    pub fn load(path: &Path) -> Result<FileConfig, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|e| ConfigError::Unreadable {
            path: path.display().to_string(),
            message: e.to_string(),
        })?;
        serde_json::from_str(&text).map_err(|e| field("config", e.to_string()))
    }
}

/// Raw flag values shared by the run-style subcommands, before merging.
#[derive(Debug, Default, Clone, clap::Args)]
pub struct RunOpts {
    /// Instance spec, `name` or `name(args)`; repeatable.
    #[arg(long = "instance")]
    pub instances: Vec<String>,
    /// Instance dimension (1, 2, or 3).
    #[arg(long)]
    pub dim: Option<usize>,
    /// Mass fraction in (0, 1) for split-style commands.
    #[arg(long)]
    pub lambda: Option<f64>,
    /// Sweep targets for plot-data, comma separated.
    #[arg(long, value_delimiter = ',')]
    pub lambdas: Option<Vec<f64>>,
    /// Split direction as comma-separated components, e.g. `1,0`.
    #[arg(long)]
    pub direction: Option<String>,
    /// Node counts: `801`, `101,201`, or `64x128` for sphere grids.
    #[arg(long)]
    pub resolution: Option<String>,
    /// Resolution sweep values for plot-data, comma separated.
    #[arg(long, value_delimiter = ',')]
    pub resolutions: Option<Vec<usize>>,
    /// Sampling box, `lo:hi` per axis comma separated, e.g. `-8:8,-8:8`.
    #[arg(long = "box")]
    pub box_: Option<String>,
    /// Polar output box, `lo:hi[@count]` per axis comma separated.
    #[arg(long = "polar-box")]
    pub polar_box: Option<String>,
    /// Global seed for seeded constructions.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Report output path (stdout when omitted).
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Output formats: comma-separated subset of `json,csv`.
    #[arg(long)]
    pub format: Option<String>,
}

#[derive(Debug, Clone, Copy)]
pub struct Formats {
    pub json: bool,
    pub csv: bool,
}

/// Fully merged, validated settings for one run. The global seed has no
/// field here: it is folded into seeded instance specs during resolution.
#[derive(Debug)]
pub struct Settings {
    pub instances: Vec<InstanceSpec>,
    pub lambda: f64,
    pub lambdas: Vec<f64>,
    pub direction: Option<Vec<f64>>,
    pub polar_box: Option<GridBox>,
    pub out: Option<PathBuf>,
    pub formats: Formats,
    pub resolutions: Vec<usize>,
}

fn parse_direction(text: &str) -> Result<Vec<f64>, ConfigError> {
    let v: Result<Vec<f64>, _> = text.split(',').map(|p| p.trim().parse::<f64>()).collect();
    let v = v.map_err(|_| field("direction", format!("cannot parse `{text}`")))?;
    if v.is_empty() || v.iter().all(|c| *c == 0.0) {
        return Err(field("direction", "needs a nonzero vector"));
    }
    Ok(v)
}

fn parse_resolution(text: &str) -> Result<Vec<usize>, ConfigError> {
    let pieces: Vec<&str> = if text.contains('x') {
        text.split('x').collect()
    } else {
        text.split(',').collect()
    };
    let v: Result<Vec<usize>, _> = pieces.iter().map(|p| p.trim().parse::<usize>()).collect();
    let v = v.map_err(|_| field("resolution", format!("cannot parse `{text}`")))?;
    if v.is_empty() || v.iter().any(|c| *c < 2) {
        return Err(field("resolution", "counts must be at least 2"));
    }
    Ok(v)
}

/// `lo:hi` per axis; an optional `@count` suffix per axis fixes the node
/// count (used by `--polar-box`).
fn parse_box(text: &str) -> Result<(Vec<f64>, Vec<f64>, Option<Vec<usize>>), ConfigError> {
    let mut lower = Vec::new();
    let mut upper = Vec::new();
    let mut counts = Vec::new();
    let mut any_count = false;
    for part in text.split(',') {
        let (range, count) = match part.split_once('@') {
            Some((r, c)) => {
                let c: usize = c
                    .trim()
                    .parse()
                    .map_err(|_| field("box", format!("bad count in `{part}`")))?;
                any_count = true;
                (r, Some(c))
            }
            None => (part, None),
        };
        let (lo, hi) = range
            .split_once(':')
            .ok_or_else(|| field("box", format!("expected `lo:hi`, got `{part}`")))?;
        let lo: f64 = lo
            .trim()
            .parse()
            .map_err(|_| field("box", format!("bad number in `{part}`")))?;
        let hi: f64 = hi
            .trim()
            .parse()
            .map_err(|_| field("box", format!("bad number in `{part}`")))?;
        if !(lo.is_finite() && hi.is_finite() && lo < hi) {
            return Err(field("box", format!("need finite lo < hi in `{part}`")));
        }
        lower.push(lo);
        upper.push(hi);
        counts.push(count.unwrap_or(0));
    }
    if any_count && counts.iter().any(|c| *c < 2) {
        return Err(field(
            "box",
            "when any axis carries `@count`, every axis needs one",
        ));
    }
    Ok((lower, upper, if any_count { Some(counts) } else { None }))
}

fn parse_formats(parts: &[String]) -> Result<Formats, ConfigError> {
    let mut f = Formats {
        json: false,
        csv: false,
    };
    for p in parts {
        match p.trim() {
            "json" => f.json = true,
            "csv" => f.csv = true,
            other => {
                return Err(field(
                    "format",
                    format!("`{other}` is not one of json, csv"),
                ))
            }
        }
    }
    if !(f.json || f.csv) {
        return Err(field("format", "needs at least one of json, csv"));
    }
    Ok(f)
}

fn kind_default_dim(text: &str) -> usize {
    let name = text.split('(').next().unwrap_or("").trim().replace('-', "_");
    match name.as_str() {
        "ball" | "cube" | "cross_polytope" | "ellipsoid" | "cosine_perturbed" | "random_star"
        | "body_file" => 2,
        _ => 1,
    }
}

/// Seeded families given without an argument list pick up the global seed.
fn with_default_seed(text: &str, seed: u64) -> String {
    let name = text.trim().replace('-', "_");
    match name.as_str() {
        "logconcave_mixture" => format!("logconcave_mixture({seed},3)"),
        "random_star" => format!("random_star({seed})"),
        _ => text.to_string(),
    }
}

impl Settings {
    /// Merges flags over the file config; flags win field by field.
    pub fn resolve(opts: &RunOpts, file: &FileConfig) -> Result<Settings, ConfigError> {
        let dim_flag = opts.dim.or(file.dim);
        if let Some(d) = dim_flag {
            if !(1..=3).contains(&d) {
                return Err(field("dim", format!("must be 1, 2, or 3, got {d}")));
            }
        }

        let resolution: Option<Vec<usize>> = match &opts.resolution {
            Some(text) => Some(parse_resolution(text)?),
            None => file.resolution.clone(),
        };
        let box_override = match &opts.box_ {
            Some(text) => {
                let (lo, hi, _) = parse_box(text)?;
                Some((lo, hi))
            }
            None => file.box_.clone(),
        };

        let seed = opts.seed.or(file.seed).unwrap_or(0);

        let mut instances = Vec::new();
        for text in &opts.instances {
            let text = with_default_seed(text, seed);
            let dim = dim_flag.unwrap_or_else(|| kind_default_dim(&text));
            instances.push(InstanceSpec::parse(&text, dim)?);
        }
        if instances.is_empty() {
            if let Some(raw) = &file.instances {
                for v in raw {
                    let spec = match v {
                        serde_json::Value::String(text) => {
                            let text = with_default_seed(text, seed);
                            let dim = dim_flag.unwrap_or_else(|| kind_default_dim(&text));
                            InstanceSpec::parse(&text, dim)?
                        }
                        other => serde_json::from_value::<InstanceSpec>(other.clone())
                            .map_err(|e| field("instances", e.to_string()))?,
                    };
                    instances.push(spec);
                }
            }
        }
        if instances.is_empty() {
            return Err(field("instances", "at least one instance is required"));
        }
        for spec in instances.iter_mut() {
            if spec.box_override.is_none() {
                spec.box_override = box_override.clone();
            }
            if spec.resolution.is_none() {
                spec.resolution = resolution.clone();
            }
            spec.validate()?;
        }

        let lambda = opts.lambda.or(file.lambda).unwrap_or(0.5);
        if !(lambda > 0.0 && lambda < 1.0) {
            return Err(field("lambda", format!("must lie in (0, 1), got {lambda}")));
        }
        let lambdas = opts
            .lambdas
            .clone()
            .or_else(|| file.lambdas.clone())
            .unwrap_or_else(|| (1..=9).map(|k| k as f64 / 10.0).collect());
        if lambdas.is_empty() || lambdas.iter().any(|l| !(*l > 0.0 && *l < 1.0)) {
            return Err(field("lambdas", "targets must lie in (0, 1)"));
        }

        let direction = match &opts.direction {
            Some(text) => Some(parse_direction(text)?),
            None => file.direction.clone(),
        };

        let polar_box = match &opts.polar_box {
            Some(text) => {
                let (lo, hi, counts) = parse_box(text)?;
                let counts = counts.ok_or_else(|| {
                    field("polar-box", "every axis needs `lo:hi@count` with a count")
                })?;
                Some(
                    GridBox::new(lo, hi, counts)
                        .map_err(|e| field("polar-box", e.to_string()))?,
                )
            }
            None => match &file.polar_box {
                Some(pb) => {
                    let counts = pb
                        .counts
                        .clone()
                        .ok_or_else(|| field("polar_box", "counts are required"))?;
                    Some(
                        GridBox::new(pb.lower.clone(), pb.upper.clone(), counts)
                            .map_err(|e| field("polar_box", e.to_string()))?,
                    )
                }
                None => None,
            },
        };

        let formats = match &opts.format {
            Some(text) => parse_formats(
                &text
                    .split(',')
                    .map(|s| s.trim().to_string())
                    .collect::<Vec<_>>(),
            )?,
            None => match &file.format {
                Some(parts) => parse_formats(parts)?,
                None => Formats {
                    json: true,
                    csv: false,
                },
            },
        };

        // Coarse sweep: trapezoid error on the default families is already
        // at rounding noise past a few dozen nodes, so margin-vs-resolution
        // plots only show structure in this range.
        let resolutions = opts
            .resolutions
            .clone()
            .or_else(|| file.resolutions.clone())
            .unwrap_or_else(|| vec![9, 11, 13, 17, 21, 27, 41, 65]);
        if resolutions.iter().any(|r| *r < 2) {
            return Err(field("resolutions", "counts must be at least 2"));
        }

        Ok(Settings {
            instances,
            lambda,
            lambdas,
            direction,
            polar_box,
            out: opts.out.clone().or_else(|| file.out.clone()),
            formats,
            resolutions,
        })
    }

    /// Direction for split-style commands: the flag value, or the first
    /// axis of the instance's dimension.
    pub fn direction_for(&self, dim: usize) -> Result<Vec<f64>, ConfigError> {
        match &self.direction {
            Some(d) => {
                if d.len() != dim {
                    return Err(field(
                        "direction",
                        format!("has {} components, instance is {dim}-dimensional", d.len()),
                    ));
                }
                Ok(d.clone())
            }
            None => {
                let mut d = vec![0.0; dim];
                d[0] = 1.0;
                Ok(d)
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_box_grammar() {
        let (lo, hi, counts) = parse_box("-8:8,-4:4").unwrap();
        assert_eq!(lo, vec![-8.0, -4.0]);
        assert_eq!(hi, vec![8.0, 4.0]);
        assert!(counts.is_none());
        let (_, _, counts) = parse_box("-30:1@4001").unwrap();
        assert_eq!(counts, Some(vec![4001]));
        assert!(parse_box("5:1").is_err());
        assert!(parse_box("1,2").is_err());
    }

    #[test]
    fn parses_resolution_grammar() {
        assert_eq!(parse_resolution("801").unwrap(), vec![801]);
        assert_eq!(parse_resolution("64x128").unwrap(), vec![64, 128]);
        assert_eq!(parse_resolution("101, 201").unwrap(), vec![101, 201]);
        assert!(parse_resolution("1").is_err());
    }

    #[test]
    fn flags_override_config() {
        let file: FileConfig = serde_json::from_str(
            r#"{"instances": ["gaussian"], "dim": 2, "lambda": 0.25, "seed": 9}"#,
        )
        .unwrap();
        let opts = RunOpts {
            lambda: Some(0.75),
            ..Default::default()
        };
        let s = Settings::resolve(&opts, &file).unwrap();
        assert_eq!(s.lambda, 0.75);
        assert_eq!(s.instances.len(), 1);
        assert_eq!(s.instances[0].dim, 2);
    }

    #[test]
    fn missing_instances_is_a_config_error() {
        let err = Settings::resolve(&RunOpts::default(), &FileConfig::default()).unwrap_err();
        assert!(err.to_string().contains("instances"));
    }

    #[test]
    fn bad_lambda_is_a_config_error() {
        let opts = RunOpts {
            instances: vec!["gaussian".into()],
            lambda: Some(1.5),
            ..Default::default()
        };
        let err = Settings::resolve(&opts, &FileConfig::default()).unwrap_err();
        assert!(err.to_string().contains("lambda"));
    }
}
