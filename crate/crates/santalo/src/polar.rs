//! Discrete Legendre conjugates and polar functions.
//!
//! The conjugate of a sampled potential `u` is `u*(x) = max_y (<x, y> - u(y))`
//! with the max over the input nodes. Two routes are kept side by side: a
//! direct `O(N*M)` scan and a linear-time path that first takes the lower
//! convex hull of the samples and then merges hull slopes against the
//! ascending output nodes. Multi-dimensional conjugates factor into per-axis
//! sweeps.
//!
//! The polar of a function is `f°(x) = exp(-u*(x))` for `u = -log f`; on a
//! grid this means every node of the output is the exact discrete infimum
//! `min_y exp(-<x, y>) / f(y)` over the sampled support.

use thiserror::Error;

use crate::grid::{GridBox, GridError, GridFunction};

#[derive(Debug, Error)]
pub enum PolarError {
    #[error("potential has no finite sample")]
    EmptySupport,
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error(transparent)]
    Grid(#[from] GridError),
}

/// Which conjugate implementation to run.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TransformMethod {
    /// Direct max over every input node for every output node.
    BruteForce,
    /// Lower-hull construction plus a monotone slope merge.
    FastLLT,
}

/// A polar transform together with the grids it ran between.
#[derive(Debug, Clone)]
pub struct TransformResult {
    pub output: GridFunction,
    pub method: TransformMethod,
    pub input_box: GridBox,
    pub output_box: GridBox,
}

/// One-dimensional discrete Legendre conjugate.
///
/// `ys` must be ascending input nodes; `u` the potential values (`+inf`
/// entries are excluded from the max); `xs` ascending output nodes. Errors
/// when no sample is finite.
pub fn legendre_1d(
    ys: &[f64],
    u: &[f64],
    xs: &[f64],
    method: TransformMethod,
) -> Result<Vec<f64>, PolarError> {
    assert_eq!(ys.len(), u.len(), "node/value length mismatch");
    match method {
        TransformMethod::BruteForce => conjugate_1d_brute(ys, u, xs),
        TransformMethod::FastLLT => conjugate_1d_fast(ys, u, xs),
    }
}

fn conjugate_1d_brute(ys: &[f64], u: &[f64], xs: &[f64]) -> Result<Vec<f64>, PolarError> {
    if !u.iter().any(|v| v.is_finite()) {
        return Err(PolarError::EmptySupport);
    }
    let mut out = Vec::with_capacity(xs.len());
    for &x in xs {
        let mut best = f64::NEG_INFINITY;
        for (&y, &uv) in ys.iter().zip(u) {
            if uv.is_finite() {
                let v = x * y - uv;
                if v > best {
                    best = v;
                }
            }
        }
        out.push(best);
    }
    Ok(out)
}

/// Strictly-convex lower hull of the finite samples, as (y, u) pairs in
/// ascending y. Collinear middle points are dropped; they never change the
/// conjugate's value.
fn lower_hull(ys: &[f64], u: &[f64]) -> Vec<(f64, f64)> {
    let mut hull: Vec<(f64, f64)> = Vec::new();
    for (&y, &uv) in ys.iter().zip(u) {
        if !uv.is_finite() {
            continue;
        }
        while hull.len() >= 2 {
            let o = hull[hull.len() - 2];
            let a = hull[hull.len() - 1];
            let cross = (a.0 - o.0) * (uv - o.1) - (a.1 - o.1) * (y - o.0);
            if cross <= 0.0 {
                hull.pop();
            } else {
                break;
            }
        }
        hull.push((y, uv));
    }
    hull
}

fn conjugate_1d_fast(ys: &[f64], u: &[f64], xs: &[f64]) -> Result<Vec<f64>, PolarError> {
    let hull = lower_hull(ys, u);
    if hull.is_empty() {
        return Err(PolarError::EmptySupport);
    }
    let mut out = Vec::with_capacity(xs.len());
    let mut k = 0usize;
    for &x in xs {
        // Hull edge slopes increase left to right, so for ascending x the
        // maximizing vertex index never moves backwards.
        while k + 1 < hull.len() && x * hull[k + 1].0 - hull[k + 1].1 >= x * hull[k].0 - hull[k].1 {
            k += 1;
        }
        out.push(x * hull[k].0 - hull[k].1);
    }
    Ok(out)
}

/// Multi-dimensional discrete conjugate by separable per-axis sweeps,
/// innermost axis first. Agrees with the direct max over all input nodes.
pub fn legendre_nd(
    in_box: &GridBox,
    u: &[f64],
    out_box: &GridBox,
    method: TransformMethod,
) -> Result<Vec<f64>, PolarError> {
    let dim = in_box.dim();
    if out_box.dim() != dim {
        return Err(PolarError::DimensionMismatch {
            expected: dim,
            got: out_box.dim(),
        });
    }
    assert_eq!(u.len(), in_box.len(), "potential length mismatch");
    if !u.iter().any(|v| v.is_finite()) {
        return Err(PolarError::EmptySupport);
    }

    // Shape starts as the input counts and flips to the output count axis by
    // axis as each sweep completes.
    let mut shape: Vec<usize> = in_box.counts().to_vec();
    let mut buf: Vec<f64> = u.to_vec();
    for axis in (0..dim).rev() {
        let in_nodes = in_box.axis_nodes(axis);
        let out_nodes = out_box.axis_nodes(axis);
        let n_in = shape[axis];
        let n_out = out_nodes.len();
        let lines: usize = shape.iter().product::<usize>() / n_in;

        let mut new_shape = shape.clone();
        new_shape[axis] = n_out;
        let mut next = vec![0.0f64; new_shape.iter().product()];

        // Stride of the swept axis and length of one contiguous inner block.
        let inner: usize = shape[axis + 1..].iter().product();
        let inner_out = inner; // axes after `axis` already have their final size
        let mut line_in = vec![0.0f64; n_in];
        let last_sweep = axis == 0;
        for l in 0..lines {
            let outer = l / inner;
            let off = l % inner;
            let base_in = outer * n_in * inner + off;
            for i in 0..n_in {
                line_in[i] = buf[base_in + i * inner];
            }
            let base_out = outer * n_out * inner_out + off;
            match legendre_1d(&in_nodes, &line_in, &out_nodes, method) {
                Ok(conj) => {
                    for (i, v) in conj.into_iter().enumerate() {
                        // Intermediate sweeps produce the next potential, so
                        // the conjugate is negated; the final sweep yields the
                        // conjugate itself.
                        next[base_out + i * inner_out] = if last_sweep { v } else { -v };
                    }
                }
                Err(PolarError::EmptySupport) => {
                    // A line with no finite sample stays excluded: the partial
                    // sup is -inf, so the next potential is +inf there.
                    let fill = if last_sweep {
                        f64::NEG_INFINITY
                    } else {
                        f64::INFINITY
                    };
                    for i in 0..n_out {
                        next[base_out + i * inner_out] = fill;
                    }
                }
                Err(e) => return Err(e),
            }
        }
        shape = new_shape;
        buf = next;
    }
    Ok(buf)
}

/// The polar function `f°` of `f` on `out_box`, using the fast conjugate.
pub fn polar_function(f: &GridFunction, out_box: &GridBox) -> Result<TransformResult, PolarError> {
    polar_function_using(f, out_box, TransformMethod::FastLLT)
}

/// The polar function with an explicit conjugate method.
pub fn polar_function_using(
    f: &GridFunction,
    out_box: &GridBox,
    method: TransformMethod,
) -> Result<TransformResult, PolarError> {
    let input_box = f.effective_box();
    let potential: Vec<f64> = f.logvals().iter().map(|v| -v).collect();
    let conj = legendre_nd(&input_box, &potential, out_box, method)?;
    let logvals: Vec<f64> = conj.iter().map(|v| -v).collect();
    let output = GridFunction::new(out_box.clone(), logvals)?;
    Ok(TransformResult {
        output,
        method,
        input_box,
        output_box: out_box.clone(),
    })
}

/// Default polar output domain: the input box mirrored through the origin.
pub fn default_polar_box(f: &GridFunction) -> GridBox {
    f.effective_box().mirrored()
}

/// Supremum of `log f(x) + log g(y) + <x, y>` over all node pairs with
/// `f(x) > 0`, `g(y) > 0`. Nonpositive means the pair satisfies the duality
/// relation `f(x) g(y) <= exp(-<x, y>)` at every sampled pair.
///
/// Small pair sets are scanned directly. Larger ones aggregate the inner max
/// over `y` with a conjugate along `g`'s grid, which is an exact rearrangement
/// of the same maximum, not a subsample.
pub fn duality_margin(f: &GridFunction, g: &GridFunction) -> Result<f64, PolarError> {
    let dim = f.dim();
    if g.dim() != dim {
        return Err(PolarError::DimensionMismatch {
            expected: dim,
            got: g.dim(),
        });
    }
    let pairs = (f.len() as u128) * (g.len() as u128);
    if pairs <= 8_000_000 {
        return duality_margin_direct(f, g);
    }
    // max_x [log f(x) + max_y (<x, y> + log g(y))]; the inner max is the
    // conjugate of -log g evaluated on f's grid.
    let g_potential: Vec<f64> = g.logvals().iter().map(|v| -v).collect();
    let v = match legendre_nd(
        &g.effective_box(),
        &g_potential,
        &f.effective_box(),
        TransformMethod::FastLLT,
    ) {
        Ok(v) => v,
        Err(PolarError::EmptySupport) => return Ok(f64::NEG_INFINITY),
        Err(e) => return Err(e),
    };
    let mut best = f64::NEG_INFINITY;
    for (lf, vx) in f.logvals().iter().zip(&v) {
        if *lf > f64::NEG_INFINITY {
            let m = lf + vx;
            if m > best {
                best = m;
            }
        }
    }
    Ok(best)
}

fn duality_margin_direct(f: &GridFunction, g: &GridFunction) -> Result<f64, PolarError> {
    let dim = f.dim();
    let mut xf = vec![0.0; dim];
    let mut yg = vec![0.0; dim];
    let mut best = f64::NEG_INFINITY;
    for jf in 0..f.len() {
        let lf = f.logvals()[jf];
        if lf == f64::NEG_INFINITY {
            continue;
        }
        f.node(jf, &mut xf);
        for jg in 0..g.len() {
            let lg = g.logvals()[jg];
            if lg == f64::NEG_INFINITY {
                continue;
            }
            g.node(jg, &mut yg);
            let dot: f64 = xf.iter().zip(&yg).map(|(a, b)| a * b).sum();
            let m = lf + lg + dot;
            if m > best {
                best = m;
            }
        }
    }
    Ok(best)
}

/// True when `g <= f° * (1 + 1e-6)` at every node of `g`'s grid, i.e. `g` is
/// (up to tolerance) the pointwise-largest function in duality with `f`.
pub fn polar_maximality_check(f: &GridFunction, g: &GridFunction) -> Result<bool, PolarError> {
    let polar = polar_function(f, &g.effective_box())?;
    let slack = 1e-6f64.ln_1p();
    Ok(g.logvals()
        .iter()
        .zip(polar.output.logvals())
        .all(|(lg, lp)| *lg <= lp + slack))
}

/// Max violation of midpoint log-concavity along every axis; nonpositive (up
/// to rounding) for any conjugate output.
pub fn midpoint_log_concavity_excess(f: &GridFunction) -> f64 {
    let counts = f.counts().to_vec();
    let strides = f.effective_box().strides();
    let mut worst = f64::NEG_INFINITY;
    let lv = f.logvals();
    for axis in 0..f.dim() {
        let stride = strides[axis];
        let n = counts[axis];
        if n < 3 {
            continue;
        }
        let lines = f.len() / n;
        let inner: usize = counts[axis + 1..].iter().product();
        for l in 0..lines {
            let outer = l / inner;
            let off = l % inner;
            let base = outer * n * inner + off;
            for i in 1..n - 1 {
                let (a, b, c) = (
                    lv[base + (i - 1) * stride],
                    lv[base + i * stride],
                    lv[base + (i + 1) * stride],
                );
                if a == f64::NEG_INFINITY || c == f64::NEG_INFINITY {
                    continue;
                }
                let excess = a + c - 2.0 * b;
                if excess > worst {
                    worst = excess;
                }
            }
        }
    }
    worst
}
