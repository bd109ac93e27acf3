//! Star-shaped bodies described by radial functions on angular grids:
//! gauges, polar bodies, volumes, centroids, and the Gaussian-of-the-gauge
//! bridge to the functional product bounds.

use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::grid::{GridBox, GridFunction};
use crate::report::{BoxMeta, GridMeta, Theorem, VerificationReport};
use crate::theorems::two_pi_pow;

const TAU: f64 = std::f64::consts::TAU;
const PI: f64 = std::f64::consts::PI;

#[derive(Debug, Error)]
pub enum BodyError {
    #[error("invalid body: {0}")]
    InvalidBody(String),
    #[error("support function vanished; the polar body is unbounded")]
    Unbounded,
    #[error("centroid lies outside the body; cannot recenter")]
    CentroidNotInterior,
    #[error("sampling box too small: {0}")]
    BoxTooSmall(String),
    #[error(transparent)]
    Grid(#[from] crate::grid::GridError),
    #[error("body file: {0}")]
    Format(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Uniform direction grid on the circle or the sphere. Sphere latitudes sit
/// at cell midpoints (no pole nodes) and carry exactly integrated
/// cos-latitude weights, so the total weight is the sphere measure.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum AngularGrid {
    Circle { count: usize },
    Sphere { lat: usize, lon: usize },
}

impl AngularGrid {
    pub fn circle(count: usize) -> Result<Self, BodyError> {
        if !(8..=1 << 22).contains(&count) {
            return Err(BodyError::InvalidBody(format!(
                "circle grid needs between 8 and 2^22 angles, got {count}"
            )));
        }
        Ok(AngularGrid::Circle { count })
    }

    pub fn sphere(lat: usize, lon: usize) -> Result<Self, BodyError> {
        if lat < 4 || lon < 8 || lat.saturating_mul(lon) > 1 << 22 {
            return Err(BodyError::InvalidBody(format!(
                "sphere grid {lat}x{lon} outside the supported range"
            )));
        }
        Ok(AngularGrid::Sphere { lat, lon })
    }

    /// 2048 angles: keeps radial quadrature error well under the body-level
    /// tolerances for Lipschitz radial functions.
    pub fn default_circle() -> Self {
        AngularGrid::Circle { count: 2048 }
    }

    pub fn default_sphere() -> Self {
        AngularGrid::Sphere { lat: 256, lon: 512 }
    }

    pub fn dim(&self) -> usize {
        match self {
            AngularGrid::Circle { .. } => 2,
            AngularGrid::Sphere { .. } => 3,
        }
    }

    pub fn len(&self) -> usize {
        match self {
            AngularGrid::Circle { count } => *count,
            AngularGrid::Sphere { lat, lon } => lat * lon,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn counts(&self) -> Vec<usize> {
        match self {
            AngularGrid::Circle { count } => vec![*count],
            AngularGrid::Sphere { lat, lon } => vec![*lat, *lon],
        }
    }

    /// Unit direction of node `j`.
    pub fn direction(&self, j: usize, out: &mut [f64]) {
        match self {
            AngularGrid::Circle { count } => {
                let t = TAU * j as f64 / *count as f64;
                out[0] = t.cos();
                out[1] = t.sin();
            }
            AngularGrid::Sphere { lat, lon } => {
                let (la, ph) = self.sphere_angles(j, *lat, *lon);
                out[0] = la.cos() * ph.cos();
                out[1] = la.cos() * ph.sin();
                out[2] = la.sin();
            }
        }
    }

    fn sphere_angles(&self, j: usize, lat: usize, lon: usize) -> (f64, f64) {
        let i = j / lon;
        let k = j % lon;
        let la = -0.5 * PI + (i as f64 + 0.5) * PI / lat as f64;
        let ph = TAU * k as f64 / lon as f64;
        (la, ph)
    }

    /// Quadrature weight of node `j`; weights sum to the circle length or
    /// the sphere area.
    pub fn weight(&self, j: usize) -> f64 {
        match self {
            AngularGrid::Circle { count } => TAU / *count as f64,
            AngularGrid::Sphere { lat, lon } => {
                let i = j / lon;
                let dl = PI / *lat as f64;
                let la = -0.5 * PI + (i as f64 + 0.5) * dl;
                (TAU / *lon as f64) * ((la + 0.5 * dl).sin() - (la - 0.5 * dl).sin())
            }
        }
    }
}

/// Unit-ball volume and the constant linking gauge Gaussians to volumes.
#[derive(Debug, Clone, Copy)]
pub struct BallConstants {
    pub n: usize,
    pub v_n: f64,
    pub c_n: f64,
}

/// `v_n` and `c_n = (2 pi)^{n/2} / v_n` for n up to 3.
pub fn ball_constants(n: usize) -> BallConstants {
    let v_n = match n {
        1 => 2.0,
        2 => PI,
        3 => 4.0 * PI / 3.0,
        _ => panic!("ball constants available for dimensions 1 to 3"),
    };
    BallConstants {
        n,
        v_n,
        c_n: (TAU).powf(n as f64 / 2.0) / v_n,
    }
}

#[derive(Serialize, Deserialize)]
struct BodyFile {
    dim: usize,
    grid: AngularGrid,
    rho: Vec<f64>,
}

/// A body star-shaped about the origin, stored as its radial function on an
/// angular grid. `0` is interior by construction (`rho > 0` everywhere).
#[derive(Debug, Clone)]
pub struct StarBody {
    grid: AngularGrid,
    rho: Vec<f64>,
    /// Mean radial value of the ring adjacent to each pole (sphere only),
    /// used to interpolate across the polar caps.
    poles: Option<[f64; 2]>,
}

fn vec_norm(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>().sqrt()
}

impl StarBody {
    pub fn new(grid: AngularGrid, rho: Vec<f64>) -> Result<Self, BodyError> {
        if rho.len() != grid.len() {
            return Err(BodyError::InvalidBody(format!(
                "radial array length {} does not match the {} grid directions",
                rho.len(),
                grid.len()
            )));
        }
        for (j, r) in rho.iter().enumerate() {
            if !r.is_finite() || *r <= 0.0 {
                return Err(BodyError::InvalidBody(format!(
                    "radial value at node {j} is {r}; must be positive and finite"
                )));
            }
        }
        let poles = match grid {
            AngularGrid::Circle { .. } => None,
            AngularGrid::Sphere { lat, lon } => {
                let south = rho[..lon].iter().sum::<f64>() / lon as f64;
                let north = rho[(lat - 1) * lon..].iter().sum::<f64>() / lon as f64;
                Some([south, north])
            }
        };
        Ok(StarBody { grid, rho, poles })
    }

    /// Samples `rho(direction)` from a closure over unit directions.
    pub fn from_radial_fn(
        grid: AngularGrid,
        mut rho: impl FnMut(&[f64]) -> f64,
    ) -> Result<Self, BodyError> {
        let mut dir = vec![0.0; grid.dim()];
        let vals = (0..grid.len())
            .map(|j| {
                grid.direction(j, &mut dir);
                rho(&dir)
            })
            .collect();
        StarBody::new(grid, vals)
    }

    pub fn grid(&self) -> &AngularGrid {
        &self.grid
    }

    pub fn rho(&self) -> &[f64] {
        &self.rho
    }

    pub fn dim(&self) -> usize {
        self.grid.dim()
    }

    pub fn rho_max(&self) -> f64 {
        self.rho.iter().cloned().fold(0.0, f64::max)
    }

    /// Radial function at an arbitrary unit direction, by angular linear
    /// interpolation (bilinear on the sphere, with the polar caps blending
    /// into the adjacent-ring mean).
    pub fn radial(&self, dir: &[f64]) -> f64 {
        match &self.grid {
            AngularGrid::Circle { count } => {
                let m = *count;
                let mut t = dir[1].atan2(dir[0]);
                if t < 0.0 {
                    t += TAU;
                }
                let u = t / (TAU / m as f64);
                let i = (u.floor() as usize).min(m - 1);
                let frac = u - i as f64;
                let next = (i + 1) % m;
                self.rho[i] * (1.0 - frac) + self.rho[next] * frac
            }
            AngularGrid::Sphere { lat, lon } => {
                let (nlat, nlon) = (*lat, *lon);
                let la = dir[2].clamp(-1.0, 1.0).asin();
                let mut ph = dir[1].atan2(dir[0]);
                if ph < 0.0 {
                    ph += TAU;
                }
                let up = ph / (TAU / nlon as f64);
                let k = (up.floor() as usize).min(nlon - 1);
                let fp = up - k as f64;
                let k1 = (k + 1) % nlon;
                let ring = |i: usize| -> f64 {
                    self.rho[i * nlon + k] * (1.0 - fp) + self.rho[i * nlon + k1] * fp
                };
                let dl = PI / nlat as f64;
                let u = (la + 0.5 * PI) / dl - 0.5;
                let poles = self.poles.expect("sphere body carries pole means");
                if u <= 0.0 {
                    // Between the south pole and the first ring.
                    let w = (u + 1.0).clamp(0.0, 1.0);
                    poles[0] * (1.0 - w) + ring(0) * w
                } else if u >= (nlat - 1) as f64 {
                    let w = (u - (nlat - 1) as f64).clamp(0.0, 1.0);
                    ring(nlat - 1) * (1.0 - w) + poles[1] * w
                } else {
                    let i = u.floor() as usize;
                    let fl = u - i as f64;
                    ring(i) * (1.0 - fl) + ring(i + 1) * fl
                }
            }
        }
    }

    /// Gauge `inf { r > 0 : x in r S }`, i.e. `|x| / rho(x/|x|)`; zero at the
    /// origin and positively homogeneous.
    pub fn gauge(&self, x: &[f64]) -> f64 {
        let r = vec_norm(x);
        if r == 0.0 {
            return 0.0;
        }
        let dir: Vec<f64> = x.iter().map(|v| v / r).collect();
        r / self.radial(&dir)
    }

    /// Support function `max over directions of rho(theta) <theta, eta>`,
    /// evaluated as a maximum over the grid directions.
    pub fn support(&self, eta: &[f64]) -> f64 {
        let mut dir = vec![0.0; self.dim()];
        let mut best = f64::NEG_INFINITY;
        for j in 0..self.grid.len() {
            self.grid.direction(j, &mut dir);
            let d: f64 = dir.iter().zip(eta).map(|(a, b)| a * b).sum();
            if d > 0.0 {
                let v = self.rho[j] * d;
                if v > best {
                    best = v;
                }
            }
        }
        best
    }

    /// Polar body on the same angular grid: radial function `1 / support`.
    /// The discrete support maximum underestimates the true value between
    /// directions, so the polar radial function carries a small one-sided
    /// overestimate.
    pub fn polar_body(&self) -> Result<StarBody, BodyError> {
        let m = self.grid.len();
        let compute = |j: usize| -> f64 {
            let mut eta = vec![0.0; self.dim()];
            self.grid.direction(j, &mut eta);
            self.support(&eta)
        };
        let supports: Vec<f64> = if m >= 4096 {
            (0..m).into_par_iter().map(compute).collect()
        } else {
            (0..m).map(compute).collect()
        };
        if supports.iter().any(|h| *h <= 0.0) {
            return Err(BodyError::Unbounded);
        }
        StarBody::new(self.grid.clone(), supports.iter().map(|h| 1.0 / h).collect())
    }

    /// Radial volume formula `(1/n) integral of rho^n over directions`.
    pub fn volume(&self) -> f64 {
        let n = self.dim() as i32;
        let mut s = 0.0;
        for j in 0..self.grid.len() {
            s += self.grid.weight(j) * self.rho[j].powi(n);
        }
        s / n as f64
    }

    /// Center of mass via the radial moment `rho^{n+1} / (n+1)`.
    pub fn centroid(&self) -> Vec<f64> {
        let n = self.dim();
        let vol = self.volume();
        let mut dir = vec![0.0; n];
        let mut acc = vec![0.0; n];
        for j in 0..self.grid.len() {
            self.grid.direction(j, &mut dir);
            let w = self.grid.weight(j) * self.rho[j].powi(n as i32 + 1) / (n as f64 + 1.0);
            for a in 0..n {
                acc[a] += w * dir[a];
            }
        }
        for v in acc.iter_mut() {
            *v /= vol;
        }
        acc
    }

    /// Re-derives the radial function about the given interior point by
    /// bisecting each ray against the interpolated boundary.
    fn about_point(&self, c: &[f64]) -> Result<StarBody, BodyError> {
        if self.gauge(c) >= 1.0 {
            return Err(BodyError::CentroidNotInterior);
        }
        let n = self.dim();
        let hi0 = self.rho_max() + vec_norm(c) + 1.0;
        let mut dir = vec![0.0; n];
        let mut point = vec![0.0; n];
        let mut rho = Vec::with_capacity(self.grid.len());
        for j in 0..self.grid.len() {
            self.grid.direction(j, &mut dir);
            let mut lo = 0.0f64;
            let mut hi = hi0;
            for _ in 0..80 {
                if hi - lo <= 1e-12 {
                    break;
                }
                let mid = 0.5 * (lo + hi);
                for a in 0..n {
                    point[a] = c[a] + mid * dir[a];
                }
                if self.gauge(&point) < 1.0 {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            rho.push(0.5 * (lo + hi));
        }
        StarBody::new(self.grid.clone(), rho)
    }

    /// Translates the body so its centroid sits at the origin, iterating the
    /// ray reconstruction up to 5 times.
    pub fn recenter(&self) -> Result<StarBody, BodyError> {
        let mut body = self.clone();
        for _ in 0..5 {
            let c = body.centroid();
            if vec_norm(&c) <= 1e-7 {
                return Ok(body);
            }
            body = body.about_point(&c)?;
        }
        let c = body.centroid();
        if vec_norm(&c) <= 1e-6 {
            Ok(body)
        } else {
            Err(BodyError::InvalidBody(format!(
                "recentering left the centroid at norm {:.3e} after 5 iterations",
                vec_norm(&c)
            )))
        }
    }

    /// The dilate `c S`.
    pub fn scale(&self, c: f64) -> Result<StarBody, BodyError> {
        if !(c.is_finite() && c > 0.0) {
            return Err(BodyError::InvalidBody(format!(
                "scale factor must be positive and finite, got {c}"
            )));
        }
        StarBody::new(self.grid.clone(), self.rho.iter().map(|r| r * c).collect())
    }

    /// Gaussian of the gauge, `exp(-gauge(x)^2 / 2)`, sampled on the box.
    /// The box must reach gauge values of at least 5 on its boundary so the
    /// neglected tail stays under the quadrature tolerances.
    pub fn phi(&self, box_: &GridBox) -> Result<GridFunction, BodyError> {
        if box_.dim() != self.dim() {
            return Err(BodyError::InvalidBody(format!(
                "box dimension {} does not match body dimension {}",
                box_.dim(),
                self.dim()
            )));
        }
        let dim = self.dim();
        let counts = box_.counts().to_vec();
        let mut coords = vec![0.0; dim];
        let mut idx = vec![0usize; dim];
        let mut min_boundary = f64::INFINITY;
        for j in 0..box_.len() {
            let mut rem = j;
            let mut boundary = false;
            for a in (0..dim).rev() {
                idx[a] = rem % counts[a];
                rem /= counts[a];
                if idx[a] == 0 || idx[a] + 1 == counts[a] {
                    boundary = true;
                }
            }
            if boundary {
                box_.node(j, &mut coords);
                let g = self.gauge(&coords);
                if g < min_boundary {
                    min_boundary = g;
                }
            }
        }
        if min_boundary < 5.0 {
            return Err(BodyError::BoxTooSmall(format!(
                "boundary gauge reaches down to {min_boundary:.3}; need at least 5"
            )));
        }
        let mut logvals = Vec::with_capacity(box_.len());
        for j in 0..box_.len() {
            box_.node(j, &mut coords);
            let g = self.gauge(&coords);
            logvals.push(-0.5 * g * g);
        }
        Ok(GridFunction::new(box_.clone(), logvals)?)
    }

    pub fn to_json(&self) -> String {
        let file = BodyFile {
            dim: self.dim(),
            grid: self.grid.clone(),
            rho: self.rho.clone(),
        };
        let mut s = serde_json::to_string_pretty(&file).expect("body serialization cannot fail");
        s.push('\n');
        s
    }

    pub fn from_json(s: &str) -> Result<StarBody, BodyError> {
        let file: BodyFile =
            serde_json::from_str(s).map_err(|e| BodyError::Format(e.to_string()))?;
        if file.dim != file.grid.dim() {
            return Err(BodyError::Format(format!(
                "declared dimension {} does not match the grid",
                file.dim
            )));
        }
        StarBody::new(file.grid, file.rho)
    }

    pub fn save_json_path(&self, path: impl AsRef<Path>) -> Result<(), BodyError> {
        Ok(std::fs::write(path, self.to_json())?)
    }

    pub fn load_json_path(path: impl AsRef<Path>) -> Result<StarBody, BodyError> {
        StarBody::from_json(&std::fs::read_to_string(path)?)
    }
}

/// Box covering the 5-sigma level set of the gauge Gaussian, with the
/// default resolution per dimension.
pub fn default_phi_box(s: &StarBody) -> GridBox {
    let half = 6.5 * s.rho_max();
    let counts = if s.dim() == 2 { 501 } else { 161 };
    GridBox::symmetric(&vec![half; s.dim()], &vec![counts; s.dim()])
        .expect("default phi box is valid")
}

fn body_meta(s: &StarBody, phi_box: Option<&GridBox>) -> GridMeta {
    GridMeta {
        dim: s.dim(),
        input: phi_box.map(BoxMeta::of_box),
        output: None,
        angular: Some(s.grid.counts()),
    }
}

/// Checks `integral of phi_S = c_n vol(S)` to 1% relative error (two-sided;
/// this is an identity, not an inequality).
pub fn verify_cn_identity(s: &StarBody) -> Result<VerificationReport, BodyError> {
    let bx = default_phi_box(s);
    let phi = s.phi(&bx)?;
    let product = phi.integrate();
    let bc = ball_constants(s.dim());
    let bound = bc.c_n * s.volume();
    let rel = (product - bound).abs() / bound;
    let mut meta = body_meta(s, Some(&bx));
    meta.output = None;
    Ok(VerificationReport {
        theorem: Theorem::CnIdentity,
        product,
        bound,
        margin: bound - product,
        lambda: None,
        grid_meta: meta,
        passed: rel <= 1e-2,
        flags: vec![format!("relative identity error {rel:.3e}")],
    })
}

/// Volume product of a recentered body and its polar, checked along both
/// routes (set volumes against `v_n^2`, gauge Gaussians against
/// `(2 pi)^n`), with the pointwise gauge duality premise sampled on seeded
/// node pairs.
#[derive(Debug, Clone, Serialize)]
pub struct LutwakReport {
    pub direct: VerificationReport,
    pub functional: VerificationReport,
    /// Largest value of `<x, y> - gauge_S(x) gauge_polar(y)` over the
    /// sampled pairs (nonpositive when the premise holds).
    pub premise_margin: f64,
    pub passed: bool,
}

pub fn verify_lutwak(s: &StarBody) -> Result<LutwakReport, BodyError> {
    let body = s.recenter()?;
    let polar = body.polar_body()?;
    let n = body.dim();

    let bc = ball_constants(n);
    let direct_product = body.volume() * polar.volume();
    let direct = VerificationReport::one_sided(
        Theorem::Corollary,
        direct_product,
        bc.v_n * bc.v_n,
        1e-2,
        None,
        body_meta(&body, None),
        vec![],
    );

    let bx_s = default_phi_box(&body);
    let bx_p = default_phi_box(&polar);
    let phi_s = body.phi(&bx_s)?;
    let phi_p = polar.phi(&bx_p)?;
    let func_product = phi_s.integrate() * phi_p.integrate();

    // Pointwise premise on seeded pairs of node directions with random
    // radii; node directions keep the gauge evaluations exact so the
    // discrete support maximum guarantees the sign.
    let mut rng = ChaCha8Rng::seed_from_u64(0x10A4);
    let m = body.grid().len();
    let mut premise_margin = f64::NEG_INFINITY;
    let mut x = vec![0.0; n];
    let mut y = vec![0.0; n];
    let mut dx = vec![0.0; n];
    let mut dy = vec![0.0; n];
    for _ in 0..100_000 {
        let j = rng.random_range(0..m);
        let k = rng.random_range(0..m);
        let r1: f64 = rng.random_range(0.1..3.0);
        let r2: f64 = rng.random_range(0.1..3.0);
        body.grid().direction(j, &mut dx);
        polar.grid().direction(k, &mut dy);
        for a in 0..n {
            x[a] = r1 * dx[a];
            y[a] = r2 * dy[a];
        }
        let ip: f64 = x.iter().zip(&y).map(|(p, q)| p * q).sum();
        let gx = body.gauge(&x);
        let gy = polar.gauge(&y);
        let margin = ip - gx * gy;
        if margin > premise_margin {
            premise_margin = margin;
        }
        // The arithmetic-geometric step the functional route rests on.
        debug_assert!(gx * gy <= 0.5 * (gx * gx + gy * gy) + 1e-12);
    }

    let mut func_meta = body_meta(&body, Some(&bx_s));
    func_meta.output = Some(BoxMeta::of_box(&bx_p));
    let functional = VerificationReport::one_sided(
        Theorem::Thm2,
        func_product,
        two_pi_pow(n),
        3e-2,
        None,
        func_meta,
        vec![format!("gauge duality premise margin {premise_margin:.3e}")],
    );

    let passed = direct.passed && functional.passed && premise_margin <= 1e-6;
    Ok(LutwakReport {
        direct,
        functional,
        premise_margin,
        passed,
    })
}

/// Unit ball on the given grid.
pub fn ball_body(grid: AngularGrid) -> StarBody {
    let len = grid.len();
    StarBody::new(grid, vec![1.0; len]).expect("unit ball is valid")
}

/// Cube `[-1, 1]^n`: radial function of the sup norm.
pub fn cube_body(grid: AngularGrid) -> StarBody {
    StarBody::from_radial_fn(grid, |d| {
        1.0 / d.iter().map(|v| v.abs()).fold(0.0, f64::max)
    })
    .expect("cube is valid")
}

/// Cross-polytope `{ sum |x_a| <= 1 }`: radial function of the 1-norm.
pub fn cross_polytope_body(grid: AngularGrid) -> StarBody {
    StarBody::from_radial_fn(grid, |d| 1.0 / d.iter().map(|v| v.abs()).sum::<f64>())
        .expect("cross-polytope is valid")
}

/// Ellipsoid with the given semi-axes.
pub fn ellipsoid_body(grid: AngularGrid, semi_axes: &[f64]) -> Result<StarBody, BodyError> {
    if semi_axes.len() != grid.dim() {
        return Err(BodyError::InvalidBody(format!(
            "need {} semi-axes, got {}",
            grid.dim(),
            semi_axes.len()
        )));
    }
    if semi_axes.iter().any(|a| !a.is_finite() || *a <= 0.0) {
        return Err(BodyError::InvalidBody(
            "semi-axes must be positive and finite".into(),
        ));
    }
    StarBody::from_radial_fn(grid, |d| {
        1.0 / d
            .iter()
            .zip(semi_axes)
            .map(|(v, a)| (v / a) * (v / a))
            .sum::<f64>()
            .sqrt()
    })
}

/// Circle body `1 + amplitude cos(mode theta)` (two-dimensional).
pub fn cosine_perturbed_body(
    grid: AngularGrid,
    amplitude: f64,
    mode: usize,
) -> Result<StarBody, BodyError> {
    if grid.dim() != 2 {
        return Err(BodyError::InvalidBody(
            "cosine-perturbed bodies are two-dimensional".into(),
        ));
    }
    if !(0.0..1.0).contains(&amplitude.abs()) {
        return Err(BodyError::InvalidBody(
            "perturbation amplitude must stay below 1".into(),
        ));
    }
    StarBody::from_radial_fn(grid, |d| {
        let t = d[1].atan2(d[0]);
        1.0 + amplitude * (mode as f64 * t).cos()
    })
}

/// Seeded random star: `exp` of low-order angular noise with decaying
/// coefficients, bounded so recentering always converges.
pub fn random_star_body(grid: AngularGrid, seed: u64) -> StarBody {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    match grid {
        AngularGrid::Circle { .. } => {
            let coeffs: Vec<(f64, f64)> = (1..=6)
                .map(|k| {
                    let s = 0.15 / k as f64;
                    (rng.random_range(-s..s), rng.random_range(-s..s))
                })
                .collect();
            StarBody::from_radial_fn(grid, |d| {
                let t = d[1].atan2(d[0]);
                let mut u = 0.0;
                for (k, (a, b)) in coeffs.iter().enumerate() {
                    let kt = (k + 1) as f64 * t;
                    u += a * kt.cos() + b * kt.sin();
                }
                u.exp()
            })
            .expect("random circle star is valid")
        }
        AngularGrid::Sphere { .. } => {
            let alpha = rng.random_range(-0.1..0.1);
            let coeffs: Vec<(f64, f64)> = (1..=3)
                .map(|_| (rng.random_range(-0.06..0.06), rng.random_range(-0.06..0.06)))
                .collect();
            StarBody::from_radial_fn(grid, |d| {
                let la = d[2].clamp(-1.0, 1.0).asin();
                let ph = d[1].atan2(d[0]);
                let mut u = alpha * la.sin();
                let c = la.cos();
                for (k, (a, b)) in coeffs.iter().enumerate() {
                    let kp = (k + 1) as f64 * ph;
                    // Harmonic-style terms vanish at the poles, keeping the
                    // radial function continuous there.
                    u += c.powi(k as i32 + 1) * (a * kp.cos() + b * kp.sin());
                }
                u.exp()
            })
            .expect("random sphere star is valid")
        }
    }
}
