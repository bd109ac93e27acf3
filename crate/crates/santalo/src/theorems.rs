//! Theorem-level verifiers for the functional volume-product bounds.
//!
//! Every verifier instantiates the maximal admissible dual partner
//! `g = (f_z)°`, so one computable check covers the universally quantified
//! statement. Bounds of `(2 pi)^n` type are held with a one-sided relative
//! tolerance that absorbs the known upward bias of the discrete polar
//! transform.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::grid::{GridBox, GridError, GridFunction, Hyperplane};
use crate::polar::{default_polar_box, duality_margin, polar_function, PolarError};
use crate::report::{BoxMeta, GridMeta, Theorem, VerificationReport};

/// One-sided relative tolerance on `(2 pi)^n`-type bounds.
pub const PRODUCT_TOL: f64 = 3e-2;

/// Tolerance on the half-line product bound `pi / 2`.
pub const LEMMA_TOL: f64 = 1e-3;

/// `(2 pi)^n`.
pub fn two_pi_pow(n: usize) -> f64 {
    (2.0 * std::f64::consts::PI).powi(n as i32)
}

#[derive(Debug, Error)]
pub enum VerifyError {
    #[error("degenerate split: {0}")]
    DegenerateSplit(String),
    #[error("premise violated: {0}")]
    PremiseViolated(String),
    #[error("ray quadrature truncated at the sampled box: {0}")]
    InterpolationOutOfBox(String),
    #[error("input must be recentered first: {0}")]
    RecenterRequired(String),
    #[error(transparent)]
    Grid(#[from] GridError),
    #[error(transparent)]
    Polar(#[from] PolarError),
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

fn lse(terms: &[f64]) -> f64 {
    let m = terms.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if m == f64::NEG_INFINITY {
        return f64::NEG_INFINITY;
    }
    let s: f64 = terms
        .iter()
        .filter(|t| **t > f64::NEG_INFINITY)
        .map(|t| (t - m).exp())
        .sum();
    m + s.ln()
}

/// Dense square matrix in dimension 1 to 3, enough for the split frames and
/// the fiber maps.
#[derive(Debug, Clone)]
pub struct SquareMatrix {
    n: usize,
    a: [[f64; 3]; 3],
}

impl SquareMatrix {
    pub fn identity(n: usize) -> Self {
        assert!((1..=3).contains(&n));
        let mut a = [[0.0; 3]; 3];
        for i in 0..n {
            a[i][i] = 1.0;
        }
        SquareMatrix { n, a }
    }

    /// Builds the matrix whose columns are the given vectors.
    pub fn from_columns(cols: &[Vec<f64>]) -> Self {
        let n = cols.len();
        let mut m = SquareMatrix::identity(n);
        for (c, col) in cols.iter().enumerate() {
            assert_eq!(col.len(), n);
            for r in 0..n {
                m.a[r][c] = col[r];
            }
        }
        m
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn get(&self, r: usize, c: usize) -> f64 {
        self.a[r][c]
    }

    pub fn set(&mut self, r: usize, c: usize, v: f64) {
        self.a[r][c] = v;
    }

    pub fn column(&self, c: usize) -> Vec<f64> {
        (0..self.n).map(|r| self.a[r][c]).collect()
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.n);
        (0..self.n)
            .map(|r| (0..self.n).map(|c| self.a[r][c] * x[c]).sum())
            .collect()
    }

    pub fn det(&self) -> f64 {
        let a = &self.a;
        match self.n {
            1 => a[0][0],
            2 => a[0][0] * a[1][1] - a[0][1] * a[1][0],
            _ => {
                a[0][0] * (a[1][1] * a[2][2] - a[1][2] * a[2][1])
                    - a[0][1] * (a[1][0] * a[2][2] - a[1][2] * a[2][0])
                    + a[0][2] * (a[1][0] * a[2][1] - a[1][1] * a[2][0])
            }
        }
    }
}

/// Orthonormal basis with the last column equal to `u`.
fn orthonormal_frame(u: &[f64]) -> SquareMatrix {
    let n = u.len();
    match n {
        1 => SquareMatrix::from_columns(&[vec![u[0]]]),
        2 => SquareMatrix::from_columns(&[vec![u[1], -u[0]], u.to_vec()]),
        _ => {
            // Seed Gram-Schmidt with the axis least aligned with u.
            let seed = (0..3)
                .min_by(|a, b| u[*a].abs().partial_cmp(&u[*b].abs()).unwrap())
                .unwrap();
            let mut t1 = vec![0.0; 3];
            t1[seed] = 1.0;
            for a in 0..3 {
                t1[a] -= u[seed] * u[a];
            }
            let n1 = norm(&t1);
            for v in t1.iter_mut() {
                *v /= n1;
            }
            let t2 = vec![
                u[1] * t1[2] - u[2] * t1[1],
                u[2] * t1[0] - u[0] * t1[2],
                u[0] * t1[1] - u[1] * t1[0],
            ];
            SquareMatrix::from_columns(&[t1, t2, u.to_vec()])
        }
    }
}

/// Mass split of a function across a hyperplane, with the line point `z` and
/// the fiber direction `v` derived from the side barycenters.
#[derive(Debug, Clone)]
pub struct SplitData {
    pub hyperplane: Hyperplane,
    pub lambda: f64,
    pub b_plus: Vec<f64>,
    pub b_minus: Vec<f64>,
    /// Intersection of the line through the side barycenters with the
    /// hyperplane.
    pub z: Vec<f64>,
    /// `(b_plus - z)` rescaled so its component along the normal is 1.
    pub v: Vec<f64>,
    /// Orthonormal basis whose last column is the hyperplane normal.
    pub frame: SquareMatrix,
}

/// Fiber reduction of a dual pair across a hyperplane through the origin:
/// the pushed-down pair on each side plus the diagnostics collected while
/// building it.
#[derive(Debug, Clone)]
pub struct DimensionReduction {
    pub split: SplitData,
    /// Frame-coordinate map sending the last basis vector to `v`.
    pub a: SquareMatrix,
    /// Inverse transpose of `a`.
    pub b: SquareMatrix,
    pub f_plus: GridFunction,
    pub g_plus: GridFunction,
    pub f_minus: GridFunction,
    pub g_minus: GridFunction,
    pub det_a: f64,
    pub det_b: f64,
    /// Largest deviation of `<A x, B x'>` from `<x, x'>` over seeded pairs.
    pub pairing_error: f64,
    /// Largest value of `log F + log G + <y, y'> - log(pi/2)` per side.
    pub reduced_margin_plus: f64,
    pub reduced_margin_minus: f64,
    /// Boundary share of the ray quadrature, aggregated over all fibers.
    pub truncation_ratio: f64,
}

/// Outcome of the translation search: the best shift found and its product.
#[derive(Debug, Clone)]
pub struct SearchResult {
    pub z: Vec<f64>,
    pub product: f64,
    pub probes: usize,
}

fn positive_mass(f: &GridFunction) -> Result<f64, VerifyError> {
    let m = f.integrate();
    if m <= 0.0 {
        return Err(GridError::ZeroMass.into());
    }
    Ok(m)
}

fn polar_box_or_default(f: &GridFunction, polar_box: Option<&GridBox>) -> GridBox {
    match polar_box {
        Some(b) => b.clone(),
        None => default_polar_box(f),
    }
}

/// Warns when the polar output still carries non-negligible values at the
/// box boundary, i.e. the chosen output box truncates the transform.
fn truncation_flag(g: &GridFunction) -> Option<String> {
    let counts = g.counts();
    let dim = g.dim();
    let mut interior_max = f64::NEG_INFINITY;
    let mut boundary_max = f64::NEG_INFINITY;
    let mut idx = vec![0usize; dim];
    for j in 0..g.len() {
        let mut rem = j;
        let mut on_boundary = false;
        for a in (0..dim).rev() {
            idx[a] = rem % counts[a];
            rem /= counts[a];
            if idx[a] == 0 || idx[a] + 1 == counts[a] {
                on_boundary = true;
            }
        }
        let v = g.logvals()[j];
        if on_boundary {
            boundary_max = boundary_max.max(v);
        } else {
            interior_max = interior_max.max(v);
        }
    }
    if boundary_max > interior_max - 16.0 {
        Some(format!(
            "polar box truncation: boundary log value {boundary_max:.3} vs peak {interior_max:.3}"
        ))
    } else {
        None
    }
}

fn functional_meta(f: &GridFunction, out_box: &GridBox) -> GridMeta {
    GridMeta {
        dim: f.dim(),
        input: Some(BoxMeta::of_function(f)),
        output: Some(BoxMeta::of_box(out_box)),
        angular: None,
    }
}

/// `integrate(f) * integrate(f°)` with the polar computed on `out_box`
/// (mirrored input box when absent).
pub fn santalo_product(
    f: &GridFunction,
    out_box: Option<&GridBox>,
) -> Result<f64, VerifyError> {
    let mass = positive_mass(f)?;
    let ob = polar_box_or_default(f, out_box);
    let tr = polar_function(f, &ob)?;
    Ok(mass * tr.output.integrate())
}

/// Recenters `f` at its barycenter and checks the product against
/// `(2 pi)^n` with the maximal dual partner.
pub fn verify_thm2(
    f: &GridFunction,
    polar_box: Option<&GridBox>,
) -> Result<VerificationReport, VerifyError> {
    positive_mass(f)?;
    let bary = f.barycenter()?;
    let fc = f.translate(&bary);
    let ob = polar_box_or_default(&fc, polar_box);
    let g = polar_function(&fc, &ob)?.output;
    let product = fc.integrate() * g.integrate();
    let mut flags = Vec::new();
    if norm(&bary) > 1e-9 {
        flags.push(format!("recentered by shift of norm {:.3e}", norm(&bary)));
    }
    if let Some(w) = truncation_flag(&g) {
        flags.push(w);
    }
    Ok(VerificationReport::one_sided(
        Theorem::Thm2,
        product,
        two_pi_pow(f.dim()),
        PRODUCT_TOL,
        None,
        functional_meta(f, &ob),
        flags,
    ))
}

/// Side barycenters, the line point `z`, and the fiber direction for a mass
/// split of `f` across `h`.
pub fn construct_split(f: &GridFunction, h: &Hyperplane) -> Result<SplitData, VerifyError> {
    let stats = f.halfspace_stats(h)?;
    let (Some(b_plus), Some(b_minus)) = (stats.b_plus, stats.b_minus) else {
        return Err(VerifyError::DegenerateSplit(
            "one side of the hyperplane carries no mass".into(),
        ));
    };
    if stats.lambda <= 1e-9 || stats.lambda >= 1.0 - 1e-9 {
        return Err(VerifyError::DegenerateSplit(format!(
            "mass fraction {} too close to 0 or 1",
            stats.lambda
        )));
    }
    let u = h.normal();
    let c = h.offset();
    let p_plus = dot(&b_plus, u);
    let p_minus = dot(&b_minus, u);
    if p_plus <= c || p_minus >= c {
        return Err(VerifyError::DegenerateSplit(
            "side barycenters do not straddle the hyperplane".into(),
        ));
    }
    let denom = p_plus - p_minus;
    let t = (c - p_minus) / denom;
    let z: Vec<f64> = (0..f.dim())
        .map(|a| b_minus[a] + t * (b_plus[a] - b_minus[a]))
        .collect();
    let w: Vec<f64> = (0..f.dim()).map(|a| b_plus[a] - z[a]).collect();
    let s = dot(&w, u);
    if s <= 1e-12 {
        return Err(VerifyError::DegenerateSplit(
            "upper barycenter is not above the line point".into(),
        ));
    }
    let v: Vec<f64> = w.iter().map(|x| x / s).collect();
    Ok(SplitData {
        hyperplane: h.clone(),
        lambda: stats.lambda,
        b_plus,
        b_minus,
        z,
        v,
        frame: orthonormal_frame(u),
    })
}

/// Split-point bound: the product of `f` with the polar of its `z`-translate
/// against `(2 pi)^n / (4 lambda (1 - lambda))`.
pub fn verify_thm3_lambda(
    f: &GridFunction,
    h: &Hyperplane,
    polar_box: Option<&GridBox>,
) -> Result<VerificationReport, VerifyError> {
    let split = construct_split(f, h)?;
    let fz = f.translate(&split.z);
    let ob = polar_box_or_default(&fz, polar_box);
    let g = polar_function(&fz, &ob)?.output;
    let product = fz.integrate() * g.integrate();
    let lam = split.lambda;
    let bound = two_pi_pow(f.dim()) / (4.0 * lam * (1.0 - lam));
    let mut flags = Vec::new();
    if let Some(w) = truncation_flag(&g) {
        flags.push(w);
    }
    Ok(VerificationReport::one_sided(
        Theorem::Thm3Lambda,
        product,
        bound,
        PRODUCT_TOL,
        Some(lam),
        functional_meta(f, &ob),
        flags,
    ))
}

/// Median split along `direction`: the bound is exactly `(2 pi)^n`.
pub fn verify_thm3_median(
    f: &GridFunction,
    direction: &[f64],
    polar_box: Option<&GridBox>,
) -> Result<VerificationReport, VerifyError> {
    let offset = f.find_quantile_offset(direction, 0.5)?;
    let h = Hyperplane::new(direction, offset)?;
    let mut rep = verify_thm3_lambda(f, &h, polar_box)?;
    rep.theorem = Theorem::Thm3Median;
    rep.bound = two_pi_pow(f.dim());
    rep.margin = rep.bound - rep.product;
    rep.passed = rep.product <= rep.bound * (1.0 + PRODUCT_TOL);
    Ok(rep)
}

/// Precomputed view of a grid function for off-node evaluation. The log
/// values are interpolated multilinearly; any adjacent zero sample makes the
/// result zero.
struct InterpCtx<'a> {
    lower: Vec<f64>,
    upper: Vec<f64>,
    step: Vec<f64>,
    counts: Vec<usize>,
    strides: Vec<usize>,
    vals: &'a [f64],
}

impl<'a> InterpCtx<'a> {
    fn new(f: &'a GridFunction) -> Self {
        let dim = f.dim();
        let eb = f.effective_box();
        InterpCtx {
            lower: eb.lower().to_vec(),
            upper: eb.upper().to_vec(),
            step: (0..dim).map(|a| f.step(a)).collect(),
            counts: f.counts().to_vec(),
            strides: eb.strides(),
            vals: f.logvals(),
        }
    }

    fn log_at(&self, x: &[f64]) -> f64 {
        let d = self.lower.len();
        let mut base = 0usize;
        let mut frac = [0.0f64; 3];
        for a in 0..d {
            let span = (self.counts[a] - 1) as f64;
            let t = (x[a] - self.lower[a]) / self.step[a];
            if t < -1e-9 || t > span + 1e-9 {
                return f64::NEG_INFINITY;
            }
            let tc = t.clamp(0.0, span);
            let mut i = tc.floor() as usize;
            if i >= self.counts[a] - 1 {
                i = self.counts[a] - 2;
            }
            base += i * self.strides[a];
            frac[a] = tc - i as f64;
        }
        let mut acc = 0.0;
        for mask in 0..(1usize << d) {
            let mut w = 1.0;
            let mut off = 0usize;
            for a in 0..d {
                if mask & (1 << a) != 0 {
                    w *= frac[a];
                    off += self.strides[a];
                } else {
                    w *= 1.0 - frac[a];
                }
            }
            if w == 0.0 {
                continue;
            }
            let v = self.vals[base + off];
            if v == f64::NEG_INFINITY {
                return f64::NEG_INFINITY;
            }
            acc += w * v;
        }
        acc
    }
}

/// Trapezoid quadrature of the interpolated function along the ray
/// `start + s * dir`, `s >= 0`, clipped to the sampled box. Returns the log
/// integral and the log contribution of the boundary samples.
fn ray_integral(
    ctx: &InterpCtx,
    start: &[f64],
    dir: &[f64],
    delta: f64,
    terms: &mut Vec<f64>,
    point: &mut [f64],
) -> (f64, f64) {
    let d = start.len();
    let mut s_lo = 0.0f64;
    let mut s_hi = f64::INFINITY;
    for a in 0..d {
        if dir[a].abs() < 1e-14 {
            if start[a] < ctx.lower[a] - 1e-12 || start[a] > ctx.upper[a] + 1e-12 {
                return (f64::NEG_INFINITY, f64::NEG_INFINITY);
            }
        } else {
            let t0 = (ctx.lower[a] - start[a]) / dir[a];
            let t1 = (ctx.upper[a] - start[a]) / dir[a];
            let (tl, th) = if t0 <= t1 { (t0, t1) } else { (t1, t0) };
            s_lo = s_lo.max(tl);
            s_hi = s_hi.min(th);
        }
    }
    if !s_hi.is_finite() || s_hi <= s_lo {
        return (f64::NEG_INFINITY, f64::NEG_INFINITY);
    }
    let m = (((s_hi - s_lo) / delta).ceil() as usize).max(1);
    let h = (s_hi - s_lo) / m as f64;
    terms.clear();
    for i in 0..=m {
        let s = s_lo + h * i as f64;
        for a in 0..d {
            point[a] = start[a] + s * dir[a];
        }
        let v = ctx.log_at(point);
        let w = if i == 0 || i == m { 0.5 * h } else { h };
        terms.push(if v == f64::NEG_INFINITY {
            v
        } else {
            v + w.ln()
        });
    }
    let total = lse(terms);
    let mut tail = terms[m];
    if s_lo > 1e-12 {
        tail = tail.max(terms[0]);
    }
    (total, tail)
}

/// Integrates `src` along parallel rays anchored on a hyperplane grid. The
/// ray through the node `y` starts at `sum_k y_k t_k + <start_coeff, y> u`
/// and runs in direction `dir`; `log_scale` rescales every fiber.
fn fiber_family(
    src: &GridFunction,
    hgrid: &GridBox,
    tangents: &[Vec<f64>],
    u: &[f64],
    start_coeff: &[f64],
    dir: &[f64],
    log_scale: f64,
) -> Result<(GridFunction, f64), VerifyError> {
    let n = src.dim();
    let d = n - 1;
    let ctx = InterpCtx::new(src);
    let mut delta = f64::INFINITY;
    for a in 0..n {
        if dir[a].abs() > 1e-12 {
            delta = delta.min(ctx.step[a] / dir[a].abs());
        }
    }
    let delta = 0.5 * delta;
    let mut logvals = vec![f64::NEG_INFINITY; hgrid.len()];
    let mut tails = vec![f64::NEG_INFINITY; hgrid.len()];
    let mut y = vec![0.0; d];
    let mut p0 = vec![0.0; n];
    let mut terms = Vec::new();
    let mut point = vec![0.0; n];
    for j in 0..hgrid.len() {
        hgrid.node(j, &mut y);
        let s0 = dot(start_coeff, &y);
        for a in 0..n {
            p0[a] = s0 * u[a];
            for k in 0..d {
                p0[a] += y[k] * tangents[k][a];
            }
        }
        let (tot, tail) = ray_integral(&ctx, &p0, dir, delta, &mut terms, &mut point);
        if tot > f64::NEG_INFINITY {
            logvals[j] = tot + log_scale;
        }
        if tail > f64::NEG_INFINITY {
            tails[j] = tail + log_scale;
        }
    }
    let total = lse(&logvals);
    if total == f64::NEG_INFINITY {
        return Err(GridError::ZeroMass.into());
    }
    let tail_total = lse(&tails);
    let ratio = if tail_total == f64::NEG_INFINITY {
        0.0
    } else {
        (tail_total - total).exp()
    };
    Ok((GridFunction::new(hgrid.clone(), logvals)?, ratio))
}

/// Projects a box onto the frame tangents: extents from the corner range,
/// counts from the dominant axis of each tangent.
fn hyperplane_grid(
    bx: &GridBox,
    tangents: &[Vec<f64>],
    counts: &[usize],
) -> Result<GridBox, VerifyError> {
    let n = bx.dim();
    let d = tangents.len();
    let mut lo = vec![0.0; d];
    let mut up = vec![0.0; d];
    let mut cnt = vec![0usize; d];
    for (k, t) in tangents.iter().enumerate() {
        let mut l = 0.0;
        let mut h = 0.0;
        for a in 0..n {
            let c0 = bx.lower()[a] * t[a];
            let c1 = bx.upper()[a] * t[a];
            l += c0.min(c1);
            h += c0.max(c1);
        }
        lo[k] = l;
        up[k] = h;
        let dominant = (0..n)
            .max_by(|i, j| t[*i].abs().partial_cmp(&t[*j].abs()).unwrap())
            .unwrap();
        cnt[k] = counts[dominant];
    }
    Ok(GridBox::new(lo, up, cnt)?)
}

/// Pushes the dual pair `(f, g)` down to the hyperplane `h` (which must pass
/// through the origin, with the split point already translated to 0): fiber
/// integrals of the normalized `f` along `v` on each side, and of the
/// compensated `g` along the normal from the sheared anchor points. Ray
/// evaluation interpolates between nodes; everything else in the crate is
/// node-based.
pub fn reduce_dimension(
    f: &GridFunction,
    g: &GridFunction,
    h: &Hyperplane,
) -> Result<DimensionReduction, VerifyError> {
    let n = f.dim();
    if n < 2 {
        return Err(VerifyError::PremiseViolated(
            "dimension reduction needs dim >= 2".into(),
        ));
    }
    if g.dim() != n {
        return Err(VerifyError::PremiseViolated(format!(
            "dual pair dimensions differ: {} vs {}",
            n,
            g.dim()
        )));
    }
    if h.offset().abs() > 1e-9 {
        return Err(VerifyError::RecenterRequired(format!(
            "hyperplane offset {:.3e} is not 0",
            h.offset()
        )));
    }
    let split = construct_split(f, h)?;
    let zn = norm(&split.z);
    if zn > 1e-6 {
        return Err(VerifyError::RecenterRequired(format!(
            "split point has norm {zn:.3e}; translate f by z first"
        )));
    }
    let mass_f = positive_mass(f)?;
    let log_c = mass_f.ln();
    let u = h.normal().to_vec();
    let d = n - 1;
    let tangents: Vec<Vec<f64>> = (0..d).map(|k| split.frame.column(k)).collect();
    let v = split.v.clone();
    let v_prime: Vec<f64> = tangents.iter().map(|t| dot(&v, t)).collect();
    let v_n = dot(&v, &u);

    let mut a_mat = SquareMatrix::identity(n);
    for k in 0..d {
        a_mat.set(k, d, v_prime[k]);
    }
    a_mat.set(d, d, v_n);
    let mut b_mat = SquareMatrix::identity(n);
    for k in 0..d {
        b_mat.set(d, k, -v_prime[k]);
    }
    b_mat.set(d, d, 2.0 - v_n);

    let mut rng = ChaCha8Rng::seed_from_u64(0xA0B1);
    let mut pairing_error = 0.0f64;
    for _ in 0..100 {
        let x: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
        let xp: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
        let err = (dot(&a_mat.mul_vec(&x), &b_mat.mul_vec(&xp)) - dot(&x, &xp)).abs();
        pairing_error = pairing_error.max(err);
    }

    let hgrid_f = hyperplane_grid(&f.effective_box(), &tangents, f.counts())?;
    let hgrid_g = hyperplane_grid(&g.effective_box(), &tangents, g.counts())?;
    let zeros = vec![0.0; d];
    let neg_v: Vec<f64> = v.iter().map(|x| -x).collect();
    let neg_u: Vec<f64> = u.iter().map(|x| -x).collect();
    let neg_vp: Vec<f64> = v_prime.iter().map(|x| -x).collect();

    let (f_plus, r1) = fiber_family(f, &hgrid_f, &tangents, &u, &zeros, &v, -log_c)?;
    let (f_minus, r2) = fiber_family(f, &hgrid_f, &tangents, &u, &zeros, &neg_v, -log_c)?;
    let (g_plus, r3) = fiber_family(g, &hgrid_g, &tangents, &u, &neg_vp, &u, log_c)?;
    let (g_minus, r4) = fiber_family(g, &hgrid_g, &tangents, &u, &neg_vp, &neg_u, log_c)?;
    let truncation_ratio = r1.max(r2).max(r3).max(r4);
    if truncation_ratio > 1e-6 {
        return Err(VerifyError::InterpolationOutOfBox(format!(
            "boundary share of the fiber quadrature is {truncation_ratio:.3e}"
        )));
    }

    let log_half_pi = (0.5 * std::f64::consts::PI).ln();
    let reduced_margin_plus = duality_margin(&f_plus, &g_plus)? - log_half_pi;
    let reduced_margin_minus = duality_margin(&f_minus, &g_minus)? - log_half_pi;

    Ok(DimensionReduction {
        split,
        det_a: a_mat.det(),
        det_b: b_mat.det(),
        a: a_mat,
        b: b_mat,
        f_plus,
        g_plus,
        f_minus,
        g_minus,
        pairing_error,
        reduced_margin_plus,
        reduced_margin_minus,
        truncation_ratio,
    })
}

/// Convenience pipeline: median split of `f` along `direction`, translate by
/// the split point, take the polar as the dual partner, and reduce.
pub fn median_reduction(
    f: &GridFunction,
    direction: &[f64],
    polar_box: Option<&GridBox>,
) -> Result<DimensionReduction, VerifyError> {
    let offset = f.find_quantile_offset(direction, 0.5)?;
    let h = Hyperplane::new(direction, offset)?;
    let split = construct_split(f, &h)?;
    let fz = f.translate(&split.z);
    let ob = polar_box_or_default(&fz, polar_box);
    let g = polar_function(&fz, &ob)?.output;
    let h0 = Hyperplane::new(direction, 0.0)?;
    reduce_dimension(&fz, &g, &h0)
}

/// Checks the reduced products `integrate(F) * integrate(G)` on both sides
/// against `(pi/2) (2 pi)^{n-1}`, recording the equivalent per-side mass
/// bounds in the flags.
pub fn verify_induction_step(dr: &DimensionReduction) -> VerificationReport {
    let d = dr.f_plus.dim();
    let n = d + 1;
    let bound = 0.5 * std::f64::consts::PI * two_pi_pow(n - 1);
    let lam = dr.split.lambda;
    let int_f_plus = dr.f_plus.integrate();
    let int_g_plus = dr.g_plus.integrate();
    let int_f_minus = dr.f_minus.integrate();
    let int_g_minus = dr.g_minus.integrate();
    let prod_plus = int_f_plus * int_g_plus;
    let prod_minus = int_f_minus * int_g_minus;
    let product = prod_plus.max(prod_minus);
    let mut flags = vec![
        "interpolated fiber quadrature".to_string(),
        format!(
            "side bound plus: {:.6e} <= {:.6e}",
            int_g_plus,
            two_pi_pow(n) / (4.0 * lam)
        ),
        format!(
            "side bound minus: {:.6e} <= {:.6e}",
            int_g_minus,
            two_pi_pow(n) / (4.0 * (1.0 - lam))
        ),
    ];
    if prod_minus < prod_plus {
        flags.push(format!("minus side product: {prod_minus:.6e}"));
    } else {
        flags.push(format!("plus side product: {prod_plus:.6e}"));
    }
    if dr.reduced_margin_plus > 1e-2 || dr.reduced_margin_minus > 1e-2 {
        flags.push(format!(
            "reduced duality margin above 1e-2: plus {:.3e}, minus {:.3e}",
            dr.reduced_margin_plus, dr.reduced_margin_minus
        ));
    }
    VerificationReport::one_sided(
        Theorem::Eq11,
        product,
        bound,
        PRODUCT_TOL,
        Some(lam),
        GridMeta {
            dim: n,
            input: Some(BoxMeta::of_function(&dr.f_plus)),
            output: Some(BoxMeta::of_function(&dr.g_plus)),
            angular: None,
        },
        flags,
    )
}

/// Half-line pair bound: under `phi1(s) phi2(t) <= exp(-s t)` the integrals
/// multiply to at most `pi / 2`.
pub fn verify_lemma_gm(
    phi1: &GridFunction,
    phi2: &GridFunction,
) -> Result<VerificationReport, VerifyError> {
    if phi1.dim() != 1 || phi2.dim() != 1 {
        return Err(VerifyError::PremiseViolated(
            "half-line pair must be one-dimensional".into(),
        ));
    }
    if phi1.lower(0) < -1e-12 || phi2.lower(0) < -1e-12 {
        return Err(VerifyError::PremiseViolated(
            "half-line pair must live on the nonnegative axis".into(),
        ));
    }
    let premise = duality_margin(phi1, phi2)?;
    if premise > 1e-9 {
        return Err(VerifyError::PremiseViolated(format!(
            "pair product exceeds exp(-s t) by log margin {premise:.3e}"
        )));
    }
    let product = positive_mass(phi1)? * positive_mass(phi2)?;
    let bound = 0.5 * std::f64::consts::PI;
    Ok(VerificationReport::one_sided(
        Theorem::Lemma1,
        product,
        bound,
        LEMMA_TOL,
        None,
        GridMeta {
            dim: 1,
            input: Some(BoxMeta::of_function(phi1)),
            output: Some(BoxMeta::of_function(phi2)),
            angular: None,
        },
        vec![format!("premise log margin {premise:.3e}")],
    ))
}

/// Tilted-mass inequality for a dual pair with centered `g`: the tilted
/// product stays under `(2 pi)^n`, and the integrated pointwise bound
/// `1 <= exp(u) - u` makes the tilt increase the mass of `g`.
pub fn verify_shift_identity(
    f: &GridFunction,
    g: &GridFunction,
    z: &[f64],
) -> Result<VerificationReport, VerifyError> {
    let n = f.dim();
    if g.dim() != n || z.len() != n {
        return Err(VerifyError::PremiseViolated(
            "pair and shift must share one dimension".into(),
        ));
    }
    let bary_g = g.barycenter()?;
    if norm(&bary_g) > 1e-6 {
        return Err(VerifyError::PremiseViolated(format!(
            "g must be centered; barycenter norm is {:.3e}",
            norm(&bary_g)
        )));
    }
    let fz = f.translate(z);
    let gz = g.tilt(z);
    let premise = duality_margin(&fz, &gz)?;
    if premise > 1e-9 {
        return Err(VerifyError::PremiseViolated(format!(
            "shifted pair violates duality by log margin {premise:.3e}"
        )));
    }
    let int_f = positive_mass(f)?;
    let int_g = positive_mass(g)?;
    let int_gz = gz.integrate();
    let moment = g.first_moment();
    let adjusted = int_gz - dot(&moment, z);
    let pointwise_ok = int_g <= adjusted + 1e-9;
    let product = int_f * int_gz;
    let bound = two_pi_pow(n);
    let mut flags = vec![format!(
        "integrated pointwise bound: {int_g:.9e} <= {adjusted:.9e}"
    )];
    if !pointwise_ok {
        flags.push("integrated pointwise bound failed".to_string());
    }
    let mut rep = VerificationReport::one_sided(
        Theorem::Eq8,
        product,
        bound,
        PRODUCT_TOL,
        None,
        GridMeta {
            dim: n,
            input: Some(BoxMeta::of_function(f)),
            output: Some(BoxMeta::of_function(g)),
            angular: None,
        },
        flags,
    );
    rep.passed = rep.passed && pointwise_ok;
    Ok(rep)
}

struct ProductProbe<'a> {
    f: &'a GridFunction,
    polar_box: Option<&'a GridBox>,
    mass: f64,
    best_z: Vec<f64>,
    best_product: f64,
    probes: usize,
}

impl ProductProbe<'_> {
    fn eval(&mut self, z: &[f64]) -> f64 {
        self.probes += 1;
        let fz = self.f.translate(z);
        let ob = polar_box_or_default(&fz, self.polar_box);
        let p = match polar_function(&fz, &ob) {
            Ok(tr) => self.mass * tr.output.integrate(),
            Err(_) => f64::INFINITY,
        };
        if p < self.best_product {
            self.best_product = p;
            self.best_z = z.to_vec();
        }
        p
    }
}

fn golden_axis(probe: &mut ProductProbe, base: &[f64], axis: usize, mut lo: f64, mut hi: f64) {
    const R: f64 = 0.618_033_988_749_894_9;
    const STEP_TOL: f64 = 1e-4;
    let mut zb = base.to_vec();
    let mut x1 = hi - R * (hi - lo);
    let mut x2 = lo + R * (hi - lo);
    zb[axis] = x1;
    let mut f1 = probe.eval(&zb);
    zb[axis] = x2;
    let mut f2 = probe.eval(&zb);
    while hi - lo > STEP_TOL {
        if f1 <= f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - R * (hi - lo);
            zb[axis] = x1;
            f1 = probe.eval(&zb);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + R * (hi - lo);
            zb[axis] = x2;
            f2 = probe.eval(&zb);
        }
    }
}

/// Derivative-free search for the translation minimizing the product with
/// the polar of the translate: golden-section coordinate passes warm-started
/// at the per-axis median split points and the barycenter. The returned
/// product never exceeds the value at any probed point.
pub fn santalo_point_search(
    f: &GridFunction,
    polar_box: Option<&GridBox>,
) -> Result<SearchResult, VerifyError> {
    let n = f.dim();
    let mass = positive_mass(f)?;
    let bary = f.barycenter()?;
    let mut probe = ProductProbe {
        f,
        polar_box,
        mass,
        best_z: bary.clone(),
        best_product: f64::INFINITY,
        probes: 0,
    };
    for axis in 0..n {
        let mut dir = vec![0.0; n];
        dir[axis] = 1.0;
        let Ok(offset) = f.find_quantile_offset(&dir, 0.5) else {
            continue;
        };
        if n == 1 {
            probe.eval(&[offset]);
        } else if let Ok(h) = Hyperplane::new(&dir, offset) {
            if let Ok(split) = construct_split(f, &h) {
                probe.eval(&split.z);
            }
        }
    }
    probe.eval(&bary);
    let eb = f.effective_box();
    for _ in 0..8 {
        let before = probe.best_product;
        for axis in 0..n {
            let base = probe.best_z.clone();
            golden_axis(&mut probe, &base, axis, eb.lower()[axis], eb.upper()[axis]);
        }
        if before - probe.best_product <= 1e-10 * (1.0 + probe.best_product.abs()) {
            break;
        }
    }
    Ok(SearchResult {
        z: probe.best_z,
        product: probe.best_product,
        probes: probe.probes,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn grid_fn(
        lower: &[f64],
        upper: &[f64],
        counts: &[usize],
        f: impl FnMut(&[f64]) -> f64,
    ) -> GridFunction {
        let bx = GridBox::new(lower.to_vec(), upper.to_vec(), counts.to_vec()).unwrap();
        GridFunction::from_log_fn(bx, f)
    }

    fn gaussian_1d() -> GridFunction {
        grid_fn(&[-8.0], &[8.0], &[1601], |x| -0.5 * x[0] * x[0])
    }

    fn exponential_1d() -> GridFunction {
        grid_fn(&[0.0], &[40.0], &[1601], |x| -x[0])
    }

    fn indicator(lower: f64, upper: f64, a: f64, b: f64, count: usize) -> GridFunction {
        grid_fn(&[lower], &[upper], &[count], |x| {
            if x[0] >= a - 1e-12 && x[0] <= b + 1e-12 {
                0.0
            } else {
                f64::NEG_INFINITY
            }
        })
    }

    #[test]
    fn gaussian_product_saturates() {
        let p = santalo_product(&gaussian_1d(), None).unwrap();
        assert!((p - 2.0 * PI).abs() <= 0.01 * 2.0 * PI, "product {p}");
    }

    #[test]
    fn scaled_gaussian_product_scale_invariant() {
        for a in [0.25f64, 4.0] {
            let half = 8.0 / a.sqrt();
            let f = grid_fn(&[-half], &[half], &[1601], |x| -0.5 * a * x[0] * x[0]);
            let ob = GridBox::symmetric(&[8.0 * a.sqrt()], &[1601]).unwrap();
            let p = santalo_product(&f, Some(&ob)).unwrap();
            assert!((p - 2.0 * PI).abs() <= 0.01 * 2.0 * PI, "a={a} product {p}");
        }
    }

    #[test]
    fn indicator_product_matches_brute_value() {
        let f = indicator(-2.0, 2.0, -1.0, 1.0, 4001);
        let ob = GridBox::symmetric(&[40.0], &[4001]).unwrap();
        let p = santalo_product(&f, Some(&ob)).unwrap();
        assert!((p - 4.0).abs() <= 0.02 * 4.0, "product {p}");
    }

    #[test]
    fn thm2_recenters_shifted_gaussian() {
        let f = grid_fn(&[-5.0], &[11.0], &[1601], |x| {
            -0.5 * (x[0] - 3.0) * (x[0] - 3.0)
        });
        let rep = verify_thm2(&f, None).unwrap();
        assert!(rep.passed);
        assert!((rep.product - 2.0 * PI).abs() <= 0.01 * 2.0 * PI);
        assert!(rep.flags.iter().any(|f| f.contains("recentered")));
    }

    #[test]
    fn thm2_indicator_interval() {
        let f = indicator(-1.0, 3.0, 0.0, 2.0, 4001);
        let ob = GridBox::symmetric(&[40.0], &[4001]).unwrap();
        let rep = verify_thm2(&f, Some(&ob)).unwrap();
        assert!(rep.passed);
        assert!((rep.product - 4.0).abs() <= 0.02 * 4.0, "{}", rep.product);
        assert!(rep.margin > 0.0);
    }

    #[test]
    fn thm2_2d_gaussian() {
        let f = grid_fn(&[-7.0, -7.0], &[7.0, 7.0], &[201, 201], |x| {
            -0.5 * (x[0] * x[0] + x[1] * x[1])
        });
        let rep = verify_thm2(&f, None).unwrap();
        assert!(rep.passed);
        let target = two_pi_pow(2);
        assert!((rep.product - target).abs() <= 0.03 * target, "{}", rep.product);
    }

    #[test]
    fn split_symmetric_gaussian_is_at_zero() {
        let f = gaussian_1d();
        let h = Hyperplane::new(&[1.0], 0.0).unwrap();
        let s = construct_split(&f, &h).unwrap();
        assert!(s.z[0].abs() <= 1e-6);
        assert!((s.lambda - 0.5).abs() <= 5e-3);
        assert!((s.v[0] - 1.0).abs() <= 1e-9);
    }

    #[test]
    fn split_exponential_at_median() {
        let f = exponential_1d();
        let ln2 = std::f64::consts::LN_2;
        let h = Hyperplane::new(&[1.0], ln2).unwrap();
        let s = construct_split(&f, &h).unwrap();
        assert!((s.z[0] - ln2).abs() <= 1e-9);
        assert!((s.b_plus[0] - (1.0 + ln2)).abs() <= 2e-2);
        assert!((s.b_minus[0] - (1.0 - ln2)).abs() <= 2e-2);
        // invariants on the split data
        let on_plane = dot(&s.z, s.hyperplane.normal()) - s.hyperplane.offset();
        assert!(on_plane.abs() <= 1e-9);
        assert!((dot(&s.v, s.hyperplane.normal()) - 1.0).abs() <= 1e-9);
    }

    #[test]
    fn split_product_gaussian_exponential_2d() {
        let ln2 = std::f64::consts::LN_2;
        let f = grid_fn(&[-8.0, 0.0], &[8.0, 40.0], &[161, 801], |x| {
            -0.5 * x[0] * x[0] - x[1]
        });
        let h = Hyperplane::new(&[0.0, 1.0], ln2).unwrap();
        let s = construct_split(&f, &h).unwrap();
        assert!(s.z[0].abs() <= 1e-9);
        assert!((s.z[1] - ln2).abs() <= 1e-9);
        assert!(s.b_plus[0].abs() <= 1e-9);
        assert!((s.b_plus[1] - (1.0 + ln2)).abs() <= 2e-2);
        assert!((s.b_minus[1] - (1.0 - ln2)).abs() <= 2e-2);
        assert!(s.v[0].abs() <= 1e-9 && (s.v[1] - 1.0).abs() <= 1e-9);
        let med = f.find_quantile_offset(&[0.0, 1.0], 0.5).unwrap();
        assert!((med - ln2).abs() <= 1e-3);
    }

    #[test]
    fn thm3_lambda_gaussian_median_saturates() {
        let f = gaussian_1d();
        let h = Hyperplane::new(&[1.0], 0.0).unwrap();
        let rep = verify_thm3_lambda(&f, &h, None).unwrap();
        assert!(rep.passed);
        assert!((rep.product - 2.0 * PI).abs() <= 0.01 * 2.0 * PI);
        assert!((rep.lambda.unwrap() - 0.5).abs() <= 5e-3);
    }

    #[test]
    fn thm3_lambda_exponential_closed_form() {
        let ln2 = std::f64::consts::LN_2;
        let f = exponential_1d();
        let h = Hyperplane::new(&[1.0], ln2).unwrap();
        let ob = GridBox::new(vec![-30.0], vec![1.0], vec![4001]).unwrap();
        let rep = verify_thm3_lambda(&f, &h, Some(&ob)).unwrap();
        assert!(rep.passed);
        let target = 2.0 / ln2;
        assert!((rep.product - target).abs() <= 1e-3, "{}", rep.product);

        // The polar of the shifted exponential is 2^t below t = 1; check the
        // transform against the closed form node by node.
        let fz = f.translate(&[ln2]);
        let g = polar_function(&fz, &ob).unwrap().output;
        for i in 0..g.len() {
            let t = g.node_coord(0, i);
            if t <= 1.0 {
                assert!(
                    (g.logvals()[i] - t * ln2).abs() <= 1e-9,
                    "t={t} log={}",
                    g.logvals()[i]
                );
            }
        }
    }

    #[test]
    fn thm3_lambda_indicator_quarter() {
        let f = indicator(-2.0, 2.0, -1.0, 1.0, 4001);
        let h = Hyperplane::new(&[1.0], 0.5).unwrap();
        let ob = GridBox::new(vec![-15.0], vec![45.0], vec![4001]).unwrap();
        let rep = verify_thm3_lambda(&f, &h, Some(&ob)).unwrap();
        assert!(rep.passed);
        assert!((rep.lambda.unwrap() - 0.25).abs() <= 1e-3);
        let target = 2.0 * (8.0 / 3.0);
        assert!((rep.product - target).abs() <= 0.02 * target, "{}", rep.product);
        let expected_bound = 2.0 * PI / (4.0 * 0.25 * 0.75);
        assert!((rep.bound - expected_bound).abs() <= 0.01 * expected_bound);
    }

    #[test]
    fn thm3_median_exponential() {
        let f = exponential_1d();
        let ob = GridBox::new(vec![-30.0], vec![1.0], vec![4001]).unwrap();
        let rep = verify_thm3_median(&f, &[1.0], Some(&ob)).unwrap();
        assert!(rep.passed);
        assert_eq!(rep.bound, 2.0 * PI);
        let target = 2.0 / std::f64::consts::LN_2;
        assert!((rep.product - target).abs() <= 0.01 * target);
        assert!((rep.lambda.unwrap() - 0.5).abs() <= 1e-2);
    }

    #[test]
    fn median_reduction_gaussian_2d() {
        let f = grid_fn(&[-7.0, -7.0], &[7.0, 7.0], &[201, 201], |x| {
            -0.5 * (x[0] * x[0] + x[1] * x[1])
        });
        let dr = median_reduction(&f, &[0.0, 1.0], None).unwrap();
        assert!((dr.det_a - 1.0).abs() <= 1e-9);
        assert!((dr.det_b - 1.0).abs() <= 1e-9);
        assert!(dr.pairing_error <= 1e-9);
        let mass_plus = dr.f_plus.integrate();
        assert!((mass_plus - 0.5).abs() <= 5e-3, "mass {mass_plus}");
        let bary = dr.f_plus.barycenter().unwrap();
        assert!(bary[0].abs() <= 1e-6, "bary {}", bary[0]);

        // Fiber of the normalized Gaussian: sqrt(pi/2)/(2 pi) at the center.
        let mid = dr.f_plus.len() / 2;
        let expect = ((0.5 * PI).sqrt() / (2.0 * PI)).ln();
        assert!((dr.f_plus.logvals()[mid] - expect).abs() <= 1e-2);

        assert!(dr.reduced_margin_plus <= 1e-2, "{}", dr.reduced_margin_plus);
        assert!(dr.reduced_margin_minus <= 1e-2);
        assert!(dr.truncation_ratio <= 1e-6);

        let rep = verify_induction_step(&dr);
        assert!(rep.passed);
        let bound = 0.5 * PI * 2.0 * PI;
        assert_eq!(rep.bound, bound);
        // The compensated pair saturates the reduced bound at the Gaussian.
        assert!((rep.product - bound).abs() <= 0.02 * bound, "{}", rep.product);
        assert!(rep.flags.iter().any(|f| f.contains("side bound")));

        // Side bounds recombine into the full split bound.
        let lam = rep.lambda.unwrap();
        let lhs = two_pi_pow(2) / (4.0 * lam) + two_pi_pow(2) / (4.0 * (1.0 - lam));
        let rhs = two_pi_pow(2) / (4.0 * lam * (1.0 - lam));
        assert!((lhs - rhs).abs() <= 1e-12 * rhs);
    }

    #[test]
    fn median_reduction_correlated_gaussian_tilts_fiber() {
        let f = grid_fn(&[-7.0, -7.0], &[7.0, 7.0], &[201, 201], |x| {
            -0.5 * (x[0] * x[0] + x[0] * x[1] + x[1] * x[1])
        });
        let dr = median_reduction(&f, &[0.0, 1.0], None).unwrap();
        // The conditional mean above the axis leans along -x1, so the fiber
        // direction is genuinely off the normal.
        assert!(dr.split.v[0] < -0.3, "v = {:?}", dr.split.v);
        assert!((dr.det_a - 1.0).abs() <= 1e-9);
        assert!(dr.pairing_error <= 1e-9);
        assert!((dr.f_plus.integrate() - 0.5).abs() <= 5e-3);
        let bary = dr.f_plus.barycenter().unwrap();
        assert!(bary[0].abs() <= 1e-3, "bary {}", bary[0]);
        assert!(dr.reduced_margin_plus <= 1e-2);
        assert!(dr.reduced_margin_minus <= 1e-2);
        let rep = verify_induction_step(&dr);
        assert!(rep.passed, "product {} bound {}", rep.product, rep.bound);
    }

    #[test]
    fn lemma_half_gaussian_equality() {
        let phi = grid_fn(&[0.0], &[8.0], &[1601], |x| -0.5 * x[0] * x[0]);
        let rep = verify_lemma_gm(&phi, &phi).unwrap();
        assert!(rep.passed);
        assert!((rep.product - 0.5 * PI).abs() <= 1e-3 * 0.5 * PI);
    }

    #[test]
    fn lemma_indicator_exponential_pair() {
        let phi1 = indicator(0.0, 8.0, 0.0, 1.0, 1601);
        let phi2 = grid_fn(&[0.0], &[8.0], &[1601], |x| -x[0]);
        let rep = verify_lemma_gm(&phi1, &phi2).unwrap();
        assert!(rep.passed);
        assert!((rep.product - 1.0).abs() <= 5e-3, "{}", rep.product);
    }

    #[test]
    fn lemma_scaled_gaussian_pair() {
        let a: f64 = 3.0;
        let phi1 = grid_fn(&[0.0], &[8.0 / a.sqrt()], &[1601], |x| {
            -0.5 * a * x[0] * x[0]
        });
        let phi2 = grid_fn(&[0.0], &[8.0 * a.sqrt()], &[1601], |x| {
            -0.5 * x[0] * x[0] / a
        });
        let rep = verify_lemma_gm(&phi1, &phi2).unwrap();
        assert!(rep.passed);
        assert!((rep.product - 0.5 * PI).abs() <= 1e-3 * 0.5 * PI);
    }

    #[test]
    fn lemma_rejects_inflated_pair() {
        let phi = grid_fn(&[0.0], &[8.0], &[1601], |x| {
            -0.5 * x[0] * x[0] + std::f64::consts::LN_2
        });
        match verify_lemma_gm(&phi, &phi) {
            Err(VerifyError::PremiseViolated(_)) => {}
            other => panic!("expected premise violation, got {other:?}"),
        }
    }

    #[test]
    fn shift_identity_zero_shift() {
        let g = gaussian_1d();
        let f = polar_function(&g, &default_polar_box(&g)).unwrap().output;
        let rep = verify_shift_identity(&f, &g, &[0.0]).unwrap();
        assert!(rep.passed);
        assert!((rep.product - 2.0 * PI).abs() <= 0.01 * 2.0 * PI);
    }

    #[test]
    fn shift_identity_gaussian_tilt_value() {
        let g = gaussian_1d();
        let f = polar_function(&g, &default_polar_box(&g)).unwrap().output;
        let z = 0.5;
        let rep = verify_shift_identity(&f, &g, &[z]).unwrap();
        // The tilted mass follows the moment generating function.
        let sqrt_2pi = (2.0 * PI).sqrt();
        let tilted = rep.product / f.integrate();
        let expect = sqrt_2pi * (0.5 * z * z).exp();
        assert!((tilted - expect).abs() <= 1e-3 * expect, "{tilted} vs {expect}");
        // z = 0.5 is far from the constructed split point of the Gaussian,
        // so the (2 pi)^n side genuinely fails while the pointwise side holds.
        assert!(!rep.passed);
        assert!(rep.flags.iter().any(|f| f.contains("pointwise")));
        assert!(!rep.flags.iter().any(|f| f.contains("failed")));
    }

    #[test]
    fn shift_identity_median_point_passes() {
        // Skewed convex potential; center its polar, dualize back, and use
        // the median split point of f as the shift.
        let g0 = grid_fn(&[-8.0], &[8.0], &[1601], |x| {
            let y = x[0];
            -0.5 * y * y - 0.3 * y.max(0.0) * y
        });
        let b = g0.barycenter().unwrap();
        let g = g0.translate(&b);
        let f = polar_function(&g, &default_polar_box(&g)).unwrap().output;
        let offset = f.find_quantile_offset(&[1.0], 0.5).unwrap();
        assert!(offset.abs() > 1e-3, "median should be away from 0");
        let rep = verify_shift_identity(&f, &g, &[offset]).unwrap();
        assert!(rep.passed, "product {} bound {}", rep.product, rep.bound);
    }

    #[test]
    fn search_centered_gaussian() {
        let f = gaussian_1d();
        let res = santalo_point_search(&f, None).unwrap();
        assert!(res.z[0].abs() <= 5e-3, "z = {:?}", res.z);
        assert!((res.product - 2.0 * PI).abs() <= 0.01 * 2.0 * PI);
        assert!(res.probes > 10);
    }

    #[test]
    fn search_shifted_gaussian_finds_center() {
        let f = grid_fn(&[-5.0], &[11.0], &[1601], |x| {
            -0.5 * (x[0] - 3.0) * (x[0] - 3.0)
        });
        let res = santalo_point_search(&f, None).unwrap();
        assert!((res.z[0] - 3.0).abs() <= 1e-2, "z = {:?}", res.z);
        assert!((res.product - 2.0 * PI).abs() <= 0.01 * 2.0 * PI);
    }

    #[test]
    fn search_exponential_optimum() {
        let f = exponential_1d();
        let ob = GridBox::new(vec![-30.0], vec![1.0], vec![4001]).unwrap();
        let res = santalo_point_search(&f, Some(&ob)).unwrap();
        let e = std::f64::consts::E;
        assert!((res.z[0] - 1.0).abs() <= 1e-2, "z = {:?}", res.z);
        assert!((res.product - e).abs() <= 0.01 * e, "{}", res.product);
        // Better than the median split point and under the global bound.
        let ln2 = std::f64::consts::LN_2;
        assert!(res.product <= 2.0 / ln2);
        assert!(res.product <= 2.0 * PI);
    }
}
