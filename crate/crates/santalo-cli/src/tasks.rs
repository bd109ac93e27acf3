//! Task execution: each subcommand maps instances to report rows, emits
//! them in the requested formats, and reports whether everything passed.

use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use santalo::grid::{GridBox, GridFunction, Hyperplane};
use santalo::instances::{Instance, InstanceSidecar, InstanceSpec};
use santalo::polar::{default_polar_box, duality_margin, polar_function};
use santalo::report::{
    reports_to_csv, reports_to_json, BoxMeta, ReportRow, Theorem, VerificationReport,
};
use santalo::theorems::{
    construct_split, santalo_point_search, two_pi_pow, verify_lemma_gm, verify_shift_identity,
    verify_thm2, verify_thm3_lambda, verify_thm3_median, PRODUCT_TOL,
};
use santalo::starbody::verify_lutwak;

use crate::config::{ConfigError, Settings};

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("{0}")]
    Io(#[from] io::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VerifyKind {
    Functional,
    Star,
    Split,
    Median,
    Lemma,
    Shift,
}

impl VerifyKind {
    /// Theorem tag used when an instance cannot produce a real report.
    fn failure_tag(self) -> Theorem {
        match self {
            VerifyKind::Functional => Theorem::Thm2,
            VerifyKind::Star => Theorem::Corollary,
            VerifyKind::Split => Theorem::Thm3Lambda,
            VerifyKind::Median => Theorem::Thm3Median,
            VerifyKind::Lemma => Theorem::Lemma1,
            VerifyKind::Shift => Theorem::Eq8,
        }
    }
}

fn row(spec: &InstanceSpec, report: VerificationReport) -> ReportRow {
    ReportRow {
        instance: Some(spec.describe()),
        seed: spec.seed(),
        report,
    }
}

fn write_rows(rows: &[ReportRow], s: &Settings) -> io::Result<()> {
    let json = reports_to_json(rows);
    let csv = reports_to_csv(rows);
    match &s.out {
        Some(path) => {
            if let Some(dir) = path.parent() {
                if !dir.as_os_str().is_empty() {
                    fs::create_dir_all(dir)?;
                }
            }
            if s.formats.json {
                fs::write(path, &json)?;
                if s.formats.csv {
                    fs::write(path.with_extension("csv"), &csv)?;
                }
            } else {
                fs::write(path, &csv)?;
            }
        }
        None => {
            if s.formats.json {
                print!("{json}");
            }
            if s.formats.csv {
                print!("{csv}");
            }
        }
    }
    Ok(())
}

pub fn run_verify(kind: VerifyKind, s: &Settings) -> Result<bool, CliError> {
    let rows: Vec<ReportRow> = s
        .instances
        .par_iter()
        .map(|spec| verify_one(kind, spec, s))
        .collect::<Vec<Vec<ReportRow>>>()
        .into_iter()
        .flatten()
        .collect();
    write_rows(&rows, s)?;
    Ok(rows.iter().all(|r| r.report.passed))
}

/// Runs one verifier on one instance. Failures of any kind become failed
/// reports so a batch always yields one row (two for `star`) per instance.
fn verify_one(kind: VerifyKind, spec: &InstanceSpec, s: &Settings) -> Vec<ReportRow> {
    let fail = |msg: String| vec![row(spec, VerificationReport::failed_with(kind.failure_tag(), msg))];

    let built = match spec.build() {
        Ok(b) => b,
        Err(e) => return fail(e.to_string()),
    };

    if kind == VerifyKind::Star {
        let Some(body) = built.as_body() else {
            return fail("this verifier needs a star body instance".into());
        };
        return match verify_lutwak(body) {
            Ok(mut lr) => {
                if !lr.passed && lr.functional.passed && lr.direct.passed {
                    lr.functional.passed = false;
                    lr.functional
                        .flags
                        .push("gauge duality premise violated".into());
                }
                vec![row(spec, lr.direct), row(spec, lr.functional)]
            }
            Err(e) => fail(e.to_string()),
        };
    }

    let Some(f) = built.as_function() else {
        return fail("this verifier needs a density instance".into());
    };
    let ob: Option<GridBox> = s.polar_box.clone().or_else(|| spec.polar_box());

    let result = match kind {
        VerifyKind::Functional => verify_thm2(f, ob.as_ref()),
        VerifyKind::Split => s
            .direction_for(f.dim())
            .map_err(|e| e.to_string())
            .and_then(|dir| {
                let offset = f
                    .find_quantile_offset(&dir, s.lambda)
                    .map_err(|e| e.to_string())?;
                let h = Hyperplane::new(&dir, offset).map_err(|e| e.to_string())?;
                verify_thm3_lambda(f, &h, ob.as_ref()).map_err(|e| e.to_string())
            })
            .map_err(santalo::theorems::VerifyError::PremiseViolated),
        VerifyKind::Median => s
            .direction_for(f.dim())
            .map_err(|e| e.to_string())
            .and_then(|dir| verify_thm3_median(f, &dir, ob.as_ref()).map_err(|e| e.to_string()))
            .map_err(santalo::theorems::VerifyError::PremiseViolated),
        VerifyKind::Lemma => run_lemma(f),
        VerifyKind::Shift => run_shift(f, s, ob.as_ref()),
        VerifyKind::Star => unreachable!(),
    };

    match result {
        Ok(rep) => vec![row(spec, rep)],
        Err(e) => fail(e.to_string()),
    }
}

/// Cuts a one-dimensional density down to its nodes on `[0, inf)`.
fn restrict_to_nonneg(f: &GridFunction) -> Result<GridFunction, String> {
    if f.dim() != 1 {
        return Err("the half-line bound needs a one-dimensional density".into());
    }
    let n = f.counts()[0];
    let i0 = (0..n)
        .find(|i| f.node_coord(0, *i) >= -1e-12)
        .ok_or_else(|| "no nodes on the nonnegative axis".to_string())?;
    if n - i0 < 2 {
        return Err("too few nodes on the nonnegative axis".into());
    }
    let bx = GridBox::new(
        vec![f.node_coord(0, i0)],
        vec![f.upper(0)],
        vec![n - i0],
    )
    .map_err(|e| e.to_string())?;
    GridFunction::new(bx, f.logvals()[i0..].to_vec()).map_err(|e| e.to_string())
}

/// Half-line pair bound: the instance restricted to the nonnegative axis,
/// paired with its maximal dual on the same node set.
fn run_lemma(
    f: &GridFunction,
) -> Result<VerificationReport, santalo::theorems::VerifyError> {
    let phi1 = restrict_to_nonneg(f)
        .map_err(santalo::theorems::VerifyError::PremiseViolated)?;
    let bx = GridBox::new(
        vec![phi1.lower(0)],
        vec![phi1.upper(0)],
        vec![phi1.counts()[0]],
    )
    .map_err(|e| santalo::theorems::VerifyError::PremiseViolated(e.to_string()))?;
    let phi2 = polar_function(&phi1, &bx)?.output;
    verify_lemma_gm(&phi1, &phi2)
}

/// Tilted-product identity on a constructed dual pair: the instance is
/// recentered to serve as `g`, `f` is its polar, and the shift is the
/// split point of `f` on its median hyperplane.
fn run_shift(
    raw: &GridFunction,
    s: &Settings,
    ob: Option<&GridBox>,
) -> Result<VerificationReport, santalo::theorems::VerifyError> {
    use santalo::theorems::VerifyError;
    let bary = raw.barycenter().map_err(|e| VerifyError::PremiseViolated(e.to_string()))?;
    let g = raw.translate(&bary);
    let out_box = match ob {
        Some(b) => b.clone(),
        None => default_polar_box(&g),
    };
    let f = polar_function(&g, &out_box)?.output;
    let dir = s
        .direction_for(f.dim())
        .map_err(|e| VerifyError::PremiseViolated(e.to_string()))?;
    let offset = f
        .find_quantile_offset(&dir, 0.5)
        .map_err(|e| VerifyError::PremiseViolated(e.to_string()))?;
    let h = Hyperplane::new(&dir, offset)
        .map_err(|e| VerifyError::PremiseViolated(e.to_string()))?;
    let z = construct_split(&f, &h)?.z;
    verify_shift_identity(&f, &g, &z)
}

#[derive(Debug, Serialize)]
struct TransformRow {
    instance: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    input: Option<BoxMeta>,
    #[serde(skip_serializing_if = "Option::is_none")]
    output: Option<BoxMeta>,
    #[serde(skip_serializing_if = "Option::is_none")]
    mass_in: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    mass_out: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    duality_margin: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    file: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    error: Option<String>,
    passed: bool,
}

fn sanitize(name: &str) -> String {
    let mut out: String = name
        .chars()
        .map(|c| if c.is_ascii_alphanumeric() { c } else { '_' })
        .collect();
    while out.contains("__") {
        out = out.replace("__", "_");
    }
    out.trim_matches('_').to_string()
}

/// Polar transform of each instance; grid files go to `--out` (a file for
/// one instance, a directory for several), the summary goes to stdout.
pub fn run_transform(s: &Settings) -> Result<bool, CliError> {
    let many = s.instances.len() > 1;
    if let Some(path) = &s.out {
        if many {
            fs::create_dir_all(path)?;
        } else if let Some(dir) = path.parent() {
            if !dir.as_os_str().is_empty() {
                fs::create_dir_all(dir)?;
            }
        }
    }

    let mut rows = Vec::new();
    let mut io_failure: Option<io::Error> = None;
    for spec in &s.instances {
        let name = spec.describe();
        let mut r = TransformRow {
            instance: name.clone(),
            seed: spec.seed(),
            input: None,
            output: None,
            mass_in: None,
            mass_out: None,
            duality_margin: None,
            file: None,
            error: None,
            passed: false,
        };
        match transform_one(spec, s) {
            Ok((f, g)) => {
                r.input = Some(BoxMeta::of_function(&f));
                r.output = Some(BoxMeta::of_function(&g));
                r.mass_in = Some(f.integrate());
                r.mass_out = Some(g.integrate());
                let margin = duality_margin(&f, &g).unwrap_or(f64::INFINITY);
                r.duality_margin = Some(margin);
                r.passed = margin <= 1e-9;
                if let Some(out) = &s.out {
                    let path: PathBuf = if many {
                        out.join(format!("{}.polar.gridfn", sanitize(&name)))
                    } else {
                        out.clone()
                    };
                    match g.save_path(&path) {
                        Ok(()) => r.file = Some(path.display().to_string()),
                        Err(e) => {
                            r.passed = false;
                            r.error = Some(e.to_string());
                            io_failure = Some(io::Error::other(e.to_string()));
                        }
                    }
                }
            }
            Err(msg) => {
                r.error = Some(msg);
            }
        }
        rows.push(r);
    }

    let mut text = serde_json::to_string_pretty(&rows).expect("summary serialization");
    text.push('\n');
    print!("{text}");
    if s.formats.csv {
        let mut csv = String::from("instance,mass_in,mass_out,duality_margin,passed\n");
        for r in &rows {
            csv.push_str(&format!(
                "{},{},{},{},{}\n",
                r.instance,
                r.mass_in.map(|v| v.to_string()).unwrap_or_default(),
                r.mass_out.map(|v| v.to_string()).unwrap_or_default(),
                r.duality_margin.map(|v| v.to_string()).unwrap_or_default(),
                r.passed
            ));
        }
        print!("{csv}");
    }
    if let Some(e) = io_failure {
        return Err(CliError::Io(e));
    }
    Ok(rows.iter().all(|r| r.passed))
}

fn transform_one(
    spec: &InstanceSpec,
    s: &Settings,
) -> Result<(GridFunction, GridFunction), String> {
    let built = spec.build().map_err(|e| e.to_string())?;
    let f = built
        .as_function()
        .ok_or("the polar transform needs a density instance")?
        .clone();
    let ob = s
        .polar_box
        .clone()
        .or_else(|| spec.polar_box())
        .unwrap_or_else(|| default_polar_box(&f));
    let g = polar_function(&f, &ob).map_err(|e| e.to_string())?.output;
    Ok((f, g))
}

#[derive(Debug, Serialize)]
struct SearchRow {
    instance: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    z: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    product: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    probes: Option<usize>,
    bound: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    error: Option<String>,
    passed: bool,
}

/// Coordinate search for the translation minimizing the polar product;
/// the minimum is checked against the centered product bound.
pub fn run_search(s: &Settings) -> Result<bool, CliError> {
    let rows: Vec<SearchRow> = s
        .instances
        .par_iter()
        .map(|spec| {
            let mut r = SearchRow {
                instance: spec.describe(),
                seed: spec.seed(),
                z: None,
                product: None,
                probes: None,
                bound: two_pi_pow(spec.dim),
                error: None,
                passed: false,
            };
            let run = || -> Result<santalo::theorems::SearchResult, String> {
                let built = spec.build().map_err(|e| e.to_string())?;
                let f = built
                    .as_function()
                    .ok_or("the search needs a density instance")?;
                let ob = s.polar_box.clone().or_else(|| spec.polar_box());
                santalo_point_search(f, ob.as_ref()).map_err(|e| e.to_string())
            };
            match run() {
                Ok(found) => {
                    r.passed = found.product <= r.bound * (1.0 + PRODUCT_TOL);
                    r.z = Some(found.z);
                    r.product = Some(found.product);
                    r.probes = Some(found.probes);
                }
                Err(msg) => r.error = Some(msg),
            }
            r
        })
        .collect();

    let mut text = serde_json::to_string_pretty(&rows).expect("summary serialization");
    text.push('\n');
    match &s.out {
        Some(path) => fs::write(path, text)?,
        None => print!("{text}"),
    }
    if s.formats.csv {
        let mut csv = String::from("instance,seed,product,bound,probes,passed\n");
        for r in &rows {
            csv.push_str(&format!(
                "{},{},{},{},{},{}\n",
                r.instance,
                r.seed.map(|v| v.to_string()).unwrap_or_default(),
                r.product.map(|v| v.to_string()).unwrap_or_default(),
                r.bound,
                r.probes.map(|v| v.to_string()).unwrap_or_default(),
                r.passed
            ));
        }
        match &s.out {
            Some(path) => fs::write(path.with_extension("csv"), csv)?,
            None => print!("{csv}"),
        }
    }
    Ok(rows.iter().all(|r| r.passed))
}

#[derive(Debug, clap::Args)]
pub struct GenerateOpts {
    /// Family to draw from: `logconcave-mixture` or `random-star`.
    #[arg(long, default_value = "logconcave-mixture")]
    pub family: String,
    /// How many instances to write; seeds are consecutive from `--seed`.
    #[arg(long, default_value_t = 1)]
    pub count: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Dimension (defaults to 1 for mixtures, 2 for star bodies).
    #[arg(long)]
    pub dim: Option<usize>,
    /// Mixture components per instance.
    #[arg(long, default_value_t = 3)]
    pub components: usize,
    /// Output directory.
    #[arg(long, default_value = ".")]
    pub out: PathBuf,
}

fn write_sidecar(path: &Path, sidecar: &InstanceSidecar) -> Result<(), CliError> {
    let mut text = serde_json::to_string_pretty(sidecar).expect("sidecar serialization");
    text.push('\n');
    fs::write(path, text)?;
    Ok(())
}

/// Writes seeded instances to disk; the bytes depend only on the options,
/// so a rerun reproduces the files exactly.
pub fn run_generate(g: &GenerateOpts) -> Result<bool, CliError> {
    let family = g.family.replace('-', "_");
    fs::create_dir_all(&g.out)?;
    let bad = |field: &str, msg: String| {
        CliError::Config(ConfigError::Field {
            field: field.into(),
            message: msg,
        })
    };
    if g.count == 0 {
        return Err(bad("count", "must be at least 1".into()));
    }

    let mut written = Vec::new();
    match family.as_str() {
        "logconcave_mixture" => {
            let dim = g.dim.unwrap_or(1);
            for i in 0..g.count {
                let seed = g.seed + i as u64;
                let spec = InstanceSpec::new(
                    santalo::instances::InstanceKind::LogconcaveMixture {
                        seed,
                        components: g.components,
                    },
                    dim,
                )
                .map_err(|e| bad("family", e.to_string()))?;
                let built = spec.build().map_err(|e| bad("family", e.to_string()))?;
                let Instance::Function(f) = built else {
                    unreachable!("mixtures build densities");
                };
                let base = g.out.join(format!("mixture_d{dim}_s{seed}"));
                let grid_path = base.with_extension("gridfn");
                f.save_path(&grid_path)
                    .map_err(|e| CliError::Io(io::Error::other(e.to_string())))?;
                let sidecar_path = base.with_extension("json");
                write_sidecar(
                    &sidecar_path,
                    &InstanceSidecar {
                        family: spec.describe(),
                        seed,
                        dim,
                    },
                )?;
                written.push(grid_path);
                written.push(sidecar_path);
            }
        }
        "random_star" => {
            let dim = g.dim.unwrap_or(2);
            for i in 0..g.count {
                let seed = g.seed + i as u64;
                let spec = InstanceSpec::new(
                    santalo::instances::InstanceKind::BodyFamily {
                        name: "random_star".into(),
                        params: vec![seed as f64],
                    },
                    dim,
                )
                .map_err(|e| bad("family", e.to_string()))?;
                let built = spec.build().map_err(|e| bad("family", e.to_string()))?;
                let Instance::Body(b) = built else {
                    unreachable!("star families build bodies");
                };
                let body_path = g.out.join(format!("star_d{dim}_s{seed}.body.json"));
                b.save_json_path(&body_path)
                    .map_err(|e| CliError::Io(io::Error::other(e.to_string())))?;
                let sidecar_path = g.out.join(format!("star_d{dim}_s{seed}.json"));
                write_sidecar(
                    &sidecar_path,
                    &InstanceSidecar {
                        family: spec.describe(),
                        seed,
                        dim,
                    },
                )?;
                written.push(body_path);
                written.push(sidecar_path);
            }
        }
        other => {
            return Err(bad(
                "family",
                format!("`{other}` is not one of logconcave-mixture, random-star"),
            ))
        }
    }

    for path in &written {
        println!("{}", path.display());
    }
    Ok(true)
}

/// Sweeps one knob on a single instance and emits plot-ready CSV rows.
pub fn run_plot(sweep: &str, s: &Settings) -> Result<bool, CliError> {
    if s.instances.len() != 1 {
        return Err(CliError::Config(ConfigError::Field {
            field: "instances".into(),
            message: "plot-data takes exactly one instance".into(),
        }));
    }
    let spec = &s.instances[0];

    let mut csv = String::from("x,product,bound,margin\n");
    let mut all_passed = true;
    match sweep {
        "lambda" => {
            let built = spec
                .build()
                .map_err(|e| config_field("instances", e.to_string()))?;
            let f = built
                .as_function()
                .ok_or_else(|| config_field("instances", "the lambda sweep needs a density".into()))?;
            let ob = s.polar_box.clone().or_else(|| spec.polar_box());
            let dir = s.direction_for(f.dim())?;
            for target in &s.lambdas {
                let offset = f
                    .find_quantile_offset(&dir, *target)
                    .map_err(|e| config_field("lambdas", e.to_string()))?;
                let h = Hyperplane::new(&dir, offset)
                    .map_err(|e| config_field("direction", e.to_string()))?;
                let rep = verify_thm3_lambda(f, &h, ob.as_ref())
                    .map_err(|e| config_field("lambdas", e.to_string()))?;
                let x = rep.lambda.expect("split reports carry lambda");
                all_passed &= rep.passed;
                csv.push_str(&format!("{x},{},{},{}\n", rep.product, rep.bound, rep.margin));
            }
        }
        "resolution" => {
            for res in &s.resolutions {
                let mut step = spec.clone();
                step.resolution = Some(vec![*res]);
                let built = step
                    .build()
                    .map_err(|e| config_field("resolutions", e.to_string()))?;
                let f = built.as_function().ok_or_else(|| {
                    config_field("instances", "the resolution sweep needs a density".into())
                })?;
                let ob = s.polar_box.clone().or_else(|| step.polar_box());
                let rep = verify_thm2(f, ob.as_ref())
                    .map_err(|e| config_field("resolutions", e.to_string()))?;
                all_passed &= rep.passed;
                csv.push_str(&format!(
                    "{res},{},{},{}\n",
                    rep.product, rep.bound, rep.margin
                ));
            }
        }
        other => {
            return Err(config_field(
                "sweep",
                format!("`{other}` is not one of lambda, resolution"),
            ))
        }
    }

    match &s.out {
        Some(path) => fs::write(path, csv)?,
        None => print!("{csv}"),
    }
    Ok(all_passed)
}

fn config_field(field: &str, message: String) -> CliError {
    CliError::Config(ConfigError::Field {
        field: field.into(),
        message,
    })
}
