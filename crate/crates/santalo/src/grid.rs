//! Uniform tensor grids and quadrature for nonnegative functions stored in
//! log space.
//!
//! A [`GridFunction`] samples `f >= 0` on the nodes of a [`GridBox`] and keeps
//! `log f` per node (`-inf` encodes `f = 0`). All mass computations go through
//! log-sum-exp so that widely scaled functions integrate without overflow, and
//! every reduction runs in a fixed order so results are reproducible bit for
//! bit.

use std::io::{Read, Write};
use std::path::Path;

use thiserror::Error;

/// Hard cap on the total node count of any grid (keeps everything desk scale).
pub const MAX_NODES: usize = 1 << 24;

/// Largest dimension supported by the toolkit.
pub const MAX_DIM: usize = 3;

const FILE_MAGIC: &[u8; 7] = b"GRIDFN1";

#[derive(Debug, Error)]
pub enum GridError {
    #[error("invalid box: {0}")]
    InvalidBox(String),
    #[error("invalid values: {0}")]
    InvalidValues(String),
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("function has zero mass")]
    ZeroMass,
    #[error("target mass fraction {target} not attainable within the box")]
    NotBracketed { target: f64 },
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("bad grid file: {0}")]
    Format(String),
}

/// Axis-aligned box `[lower_0, upper_0] x ... x [lower_{n-1}, upper_{n-1}]`
/// carrying a uniform node count per axis (endpoints included).
#[derive(Debug, Clone)]
pub struct GridBox {
    lower: Vec<f64>,
    upper: Vec<f64>,
    counts: Vec<usize>,
}

impl GridBox {
    pub fn new(lower: Vec<f64>, upper: Vec<f64>, counts: Vec<usize>) -> Result<Self, GridError> {
        let dim = lower.len();
        if dim == 0 || dim > MAX_DIM {
            return Err(GridError::InvalidBox(format!(
                "dimension must be 1..={MAX_DIM}, got {dim}"
            )));
        }
        if upper.len() != dim || counts.len() != dim {
            return Err(GridError::InvalidBox(
                "lower/upper/counts lengths differ".into(),
            ));
        }
        let mut total = 1usize;
        for a in 0..dim {
            if !lower[a].is_finite() || !upper[a].is_finite() || lower[a] >= upper[a] {
                return Err(GridError::InvalidBox(format!(
                    "axis {a}: need finite lower < upper, got [{}, {}]",
                    lower[a], upper[a]
                )));
            }
            if counts[a] < 2 {
                return Err(GridError::InvalidBox(format!(
                    "axis {a}: need at least 2 nodes, got {}",
                    counts[a]
                )));
            }
            total = total
                .checked_mul(counts[a])
                .ok_or_else(|| GridError::InvalidBox("node count overflow".into()))?;
        }
        if total > MAX_NODES {
            return Err(GridError::InvalidBox(format!(
                "total node count {total} exceeds cap {MAX_NODES}"
            )));
        }
        Ok(GridBox {
            lower,
            upper,
            counts,
        })
    }

    /// Symmetric box `[-h_0, h_0] x ...` with the given per-axis counts.
    pub fn symmetric(half_extents: &[f64], counts: &[usize]) -> Result<Self, GridError> {
        let lower: Vec<f64> = half_extents.iter().map(|h| -h).collect();
        let upper = half_extents.to_vec();
        GridBox::new(lower, upper, counts.to_vec())
    }

    /// The box reflected through the origin: `[-upper, -lower]` per axis,
    /// same counts. This is the default output domain for polar transforms.
    pub fn mirrored(&self) -> GridBox {
        let lower: Vec<f64> = self.upper.iter().map(|u| -u).collect();
        let upper: Vec<f64> = self.lower.iter().map(|l| -l).collect();
        GridBox {
            lower,
            upper,
            counts: self.counts.clone(),
        }
    }

    pub fn dim(&self) -> usize {
        self.lower.len()
    }

    pub fn lower(&self) -> &[f64] {
        &self.lower
    }

    pub fn upper(&self) -> &[f64] {
        &self.upper
    }

    pub fn counts(&self) -> &[usize] {
        &self.counts
    }

    pub fn len(&self) -> usize {
        self.counts.iter().product()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Node spacing along an axis.
    pub fn step(&self, axis: usize) -> f64 {
        (self.upper[axis] - self.lower[axis]) / (self.counts[axis] - 1) as f64
    }

    pub fn node_coord(&self, axis: usize, i: usize) -> f64 {
        self.lower[axis] + i as f64 * self.step(axis)
    }

    /// All node coordinates along one axis.
    pub fn axis_nodes(&self, axis: usize) -> Vec<f64> {
        (0..self.counts[axis])
            .map(|i| self.node_coord(axis, i))
            .collect()
    }

    /// Row-major strides (last axis contiguous).
    pub fn strides(&self) -> Vec<usize> {
        let dim = self.dim();
        let mut s = vec![1usize; dim];
        for a in (0..dim.saturating_sub(1)).rev() {
            s[a] = s[a + 1] * self.counts[a + 1];
        }
        s
    }

    /// Writes the coordinates of the flat node `j` into `out`.
    pub fn node(&self, j: usize, out: &mut [f64]) {
        let mut rem = j;
        for a in (0..self.dim()).rev() {
            let i = rem % self.counts[a];
            rem /= self.counts[a];
            out[a] = self.node_coord(a, i);
        }
    }
}

/// A hyperplane `{ x : <x, normal> = offset }` with a unit normal.
#[derive(Debug, Clone)]
pub struct Hyperplane {
    normal: Vec<f64>,
    offset: f64,
}

impl Hyperplane {
    /// Normalizes `normal`; errors on (near-)zero input.
    pub fn new(normal: &[f64], offset: f64) -> Result<Self, GridError> {
        let norm = normal.iter().map(|v| v * v).sum::<f64>().sqrt();
        if !norm.is_finite() || norm < 1e-150 {
            return Err(GridError::InvalidValues(
                "hyperplane normal must be nonzero".into(),
            ));
        }
        let normal: Vec<f64> = normal.iter().map(|v| v / norm).collect();
        if !offset.is_finite() {
            return Err(GridError::InvalidValues(
                "hyperplane offset must be finite".into(),
            ));
        }
        Ok(Hyperplane { normal, offset })
    }

    pub fn normal(&self) -> &[f64] {
        &self.normal
    }

    pub fn offset(&self) -> f64 {
        self.offset
    }
}

/// Half-space mass split of a function: `lambda` is the mass fraction on the
/// upper side `{<x, n> >= offset}`, with the conditional barycenters of each
/// side (absent when a side carries no mass).
#[derive(Debug, Clone)]
pub struct HalfspaceStats {
    pub lambda: f64,
    pub b_plus: Option<Vec<f64>>,
    pub b_minus: Option<Vec<f64>>,
}

/// A nonnegative function sampled on a grid, stored as `log f` per node in
/// row-major order. `-inf` entries mean `f = 0`; `NaN` and `+inf` are
/// rejected.
///
/// Translation is tracked as an accumulated shift against the base box, so
/// `translate(translate(f, z), -z)` restores the original domain bit for bit.
#[derive(Debug, Clone)]
pub struct GridFunction {
    base: GridBox,
    shift: Vec<f64>,
    logvals: Vec<f64>,
}

impl GridFunction {
    pub fn new(box_: GridBox, logvals: Vec<f64>) -> Result<Self, GridError> {
        if logvals.len() != box_.len() {
            return Err(GridError::InvalidValues(format!(
                "expected {} log-values, got {}",
                box_.len(),
                logvals.len()
            )));
        }
        if logvals.iter().any(|v| v.is_nan() || *v == f64::INFINITY) {
            return Err(GridError::InvalidValues(
                "log-values must be finite or -inf".into(),
            ));
        }
        let shift = vec![0.0; box_.dim()];
        Ok(GridFunction {
            base: box_,
            shift,
            logvals,
        })
    }

    /// Samples `log f` at every node of `box_`.
    pub fn from_log_fn(box_: GridBox, mut log_f: impl FnMut(&[f64]) -> f64) -> Self {
        let mut coords = vec![0.0; box_.dim()];
        let mut logvals = Vec::with_capacity(box_.len());
        for j in 0..box_.len() {
            box_.node(j, &mut coords);
            logvals.push(log_f(&coords));
        }
        GridFunction {
            shift: vec![0.0; box_.dim()],
            base: box_,
            logvals,
        }
    }

    pub fn dim(&self) -> usize {
        self.base.dim()
    }

    pub fn counts(&self) -> &[usize] {
        self.base.counts()
    }

    pub fn len(&self) -> usize {
        self.base.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn logvals(&self) -> &[f64] {
        &self.logvals
    }

    pub fn step(&self, axis: usize) -> f64 {
        self.base.step(axis)
    }

    pub fn lower(&self, axis: usize) -> f64 {
        self.base.lower()[axis] - self.shift[axis]
    }

    pub fn upper(&self, axis: usize) -> f64 {
        self.base.upper()[axis] - self.shift[axis]
    }

    pub fn node_coord(&self, axis: usize, i: usize) -> f64 {
        self.lower(axis) + i as f64 * self.step(axis)
    }

    /// The currently represented domain (base box minus accumulated shift).
    pub fn effective_box(&self) -> GridBox {
        let dim = self.dim();
        GridBox {
            lower: (0..dim).map(|a| self.lower(a)).collect(),
            upper: (0..dim).map(|a| self.upper(a)).collect(),
            counts: self.base.counts().to_vec(),
        }
    }

    /// Writes the coordinates of flat node `j` into `out`.
    pub fn node(&self, j: usize, out: &mut [f64]) {
        let counts = self.base.counts();
        let mut rem = j;
        for a in (0..self.dim()).rev() {
            let i = rem % counts[a];
            rem /= counts[a];
            out[a] = self.node_coord(a, i);
        }
    }

    /// Log of the trapezoid weight of node `j` (product over axes).
    fn log_weight(&self, j: usize) -> f64 {
        let counts = self.base.counts();
        let mut rem = j;
        let mut lw = 0.0;
        for a in (0..self.dim()).rev() {
            let i = rem % counts[a];
            rem /= counts[a];
            lw += self.step(a).ln();
            if i == 0 || i == counts[a] - 1 {
                lw -= std::f64::consts::LN_2;
            }
        }
        lw
    }

    /// Trapezoid-rule integral, computed by log-sum-exp in a fixed order.
    pub fn integrate(&self) -> f64 {
        let mut m = f64::NEG_INFINITY;
        for j in 0..self.len() {
            let v = self.logvals[j];
            if v > f64::NEG_INFINITY {
                let t = v + self.log_weight(j);
                if t > m {
                    m = t;
                }
            }
        }
        if m == f64::NEG_INFINITY {
            return 0.0;
        }
        let mut s = 0.0;
        for j in 0..self.len() {
            let v = self.logvals[j];
            if v > f64::NEG_INFINITY {
                s += (v + self.log_weight(j) - m).exp();
            }
        }
        m.exp() * s
    }

    /// Mass-weighted mean position. Errors when the function has no mass.
    pub fn barycenter(&self) -> Result<Vec<f64>, GridError> {
        let dim = self.dim();
        let mut m = f64::NEG_INFINITY;
        for j in 0..self.len() {
            let v = self.logvals[j];
            if v > f64::NEG_INFINITY {
                let t = v + self.log_weight(j);
                if t > m {
                    m = t;
                }
            }
        }
        if m == f64::NEG_INFINITY {
            return Err(GridError::ZeroMass);
        }
        let mut denom = 0.0;
        let mut num = vec![0.0; dim];
        let mut coords = vec![0.0; dim];
        for j in 0..self.len() {
            let v = self.logvals[j];
            if v > f64::NEG_INFINITY {
                let w = (v + self.log_weight(j) - m).exp();
                denom += w;
                self.node(j, &mut coords);
                for a in 0..dim {
                    num[a] += w * coords[a];
                }
            }
        }
        if denom == 0.0 {
            return Err(GridError::ZeroMass);
        }
        Ok(num.iter().map(|n| n / denom).collect())
    }

    /// The translate `f_z(x) = f(z + x)`, represented on the box shifted by
    /// `-z`. Values are reused without resampling, so the integral is
    /// preserved exactly and `translate(translate(f, z), -z)` is bit-identical
    /// to `f`.
    ///
    /// Panics if `z` has the wrong dimension.
    pub fn translate(&self, z: &[f64]) -> GridFunction {
        assert_eq!(z.len(), self.dim(), "translation dimension mismatch");
        let mut shift = self.shift.clone();
        for a in 0..self.dim() {
            shift[a] += z[a];
        }
        GridFunction {
            base: self.base.clone(),
            shift,
            logvals: self.logvals.clone(),
        }
    }

    /// Pointwise rescale `c * f` (`log c` added to every finite entry).
    pub fn scale_log(&self, log_c: f64) -> GridFunction {
        let logvals = self
            .logvals
            .iter()
            .map(|v| {
                if *v > f64::NEG_INFINITY {
                    v + log_c
                } else {
                    *v
                }
            })
            .collect();
        GridFunction {
            base: self.base.clone(),
            shift: self.shift.clone(),
            logvals,
        }
    }

    /// Pointwise tilt `f(y) * exp(<y, z>)`.
    pub fn tilt(&self, z: &[f64]) -> GridFunction {
        assert_eq!(z.len(), self.dim(), "tilt dimension mismatch");
        let mut coords = vec![0.0; self.dim()];
        let mut logvals = Vec::with_capacity(self.len());
        for j in 0..self.len() {
            let v = self.logvals[j];
            if v > f64::NEG_INFINITY {
                self.node(j, &mut coords);
                let dot: f64 = coords.iter().zip(z).map(|(c, zz)| c * zz).sum();
                logvals.push(v + dot);
            } else {
                logvals.push(v);
            }
        }
        GridFunction {
            base: self.base.clone(),
            shift: self.shift.clone(),
            logvals,
        }
    }

    /// Unnormalized first moment `integral of x_a f(x) dx` per axis.
    pub fn first_moment(&self) -> Vec<f64> {
        let dim = self.dim();
        let mut m = f64::NEG_INFINITY;
        for j in 0..self.len() {
            let v = self.logvals[j];
            if v > f64::NEG_INFINITY {
                let t = v + self.log_weight(j);
                if t > m {
                    m = t;
                }
            }
        }
        if m == f64::NEG_INFINITY {
            return vec![0.0; dim];
        }
        let mut num = vec![0.0; dim];
        let mut coords = vec![0.0; dim];
        for j in 0..self.len() {
            let v = self.logvals[j];
            if v > f64::NEG_INFINITY {
                let w = (v + self.log_weight(j) - m).exp();
                self.node(j, &mut coords);
                for a in 0..dim {
                    num[a] += w * coords[a];
                }
            }
        }
        num.iter().map(|n| n * m.exp()).collect()
    }

    /// Mass fraction and conditional barycenters on either side of `h`.
    /// Node cells straddling the hyperplane split their mass linearly by
    /// projected overlap, the same profile the quantile search bisects, so
    /// a found offset reproduces its target fraction here.
    pub fn halfspace_stats(&self, h: &Hyperplane) -> Result<HalfspaceStats, GridError> {
        let dim = self.dim();
        if h.normal().len() != dim {
            return Err(GridError::DimensionMismatch {
                expected: dim,
                got: h.normal().len(),
            });
        }
        let mut m = f64::NEG_INFINITY;
        for j in 0..self.len() {
            let v = self.logvals[j];
            if v > f64::NEG_INFINITY {
                let t = v + self.log_weight(j);
                if t > m {
                    m = t;
                }
            }
        }
        if m == f64::NEG_INFINITY {
            return Err(GridError::ZeroMass);
        }
        let ramp: f64 = (0..dim)
            .map(|a| h.normal()[a].abs() * self.step(a))
            .sum::<f64>()
            .max(1e-300);
        let mut s = [0.0f64; 2];
        let mut mom = vec![[0.0f64; 2]; dim];
        let mut coords = vec![0.0; dim];
        for j in 0..self.len() {
            let v = self.logvals[j];
            if v == f64::NEG_INFINITY {
                continue;
            }
            let w = (v + self.log_weight(j) - m).exp();
            self.node(j, &mut coords);
            let p: f64 = coords.iter().zip(h.normal()).map(|(c, n)| c * n).sum();
            let frac = ((p - h.offset()) / ramp + 0.5).clamp(0.0, 1.0);
            s[0] += w * frac;
            s[1] += w * (1.0 - frac);
            for a in 0..dim {
                mom[a][0] += w * frac * coords[a];
                mom[a][1] += w * (1.0 - frac) * coords[a];
            }
        }
        let total = s[0] + s[1];
        if total == 0.0 {
            return Err(GridError::ZeroMass);
        }
        let side_bary = |side: usize| -> Option<Vec<f64>> {
            if s[side] > 0.0 {
                Some((0..dim).map(|a| mom[a][side] / s[side]).collect())
            } else {
                None
            }
        };
        Ok(HalfspaceStats {
            lambda: s[0] / total,
            b_plus: side_bary(0),
            b_minus: side_bary(1),
        })
    }

    /// Continuously interpolated upper-side mass fraction used by the
    /// quantile search. Node masses within one projected cell of the
    /// hyperplane are ramped linearly, which makes the profile continuous and
    /// monotone in the offset (the raw node-assigned fraction is a step
    /// function and cannot be bisected to tight tolerances).
    fn ramped_lambda(&self, normal: &[f64], offset: f64, ramp: f64) -> f64 {
        let dim = self.dim();
        let mut m = f64::NEG_INFINITY;
        for j in 0..self.len() {
            let v = self.logvals[j];
            if v > f64::NEG_INFINITY {
                let t = v + self.log_weight(j);
                if t > m {
                    m = t;
                }
            }
        }
        let mut upper = 0.0;
        let mut total = 0.0;
        let mut coords = vec![0.0; dim];
        for j in 0..self.len() {
            let v = self.logvals[j];
            if v == f64::NEG_INFINITY {
                continue;
            }
            let w = (v + self.log_weight(j) - m).exp();
            self.node(j, &mut coords);
            let p: f64 = coords.iter().zip(normal).map(|(c, n)| c * n).sum();
            let frac = ((p - offset) / ramp + 0.5).clamp(0.0, 1.0);
            upper += w * frac;
            total += w;
        }
        upper / total
    }

    /// Finds an offset `t` whose upper half-space `{<x, normal> >= t}`
    /// carries the target mass fraction, by bisection of the interpolated
    /// mass profile over the grid's projection range.
    pub fn find_quantile_offset(
        &self,
        normal: &[f64],
        lambda_target: f64,
    ) -> Result<f64, GridError> {
        let dim = self.dim();
        if normal.len() != dim {
            return Err(GridError::DimensionMismatch {
                expected: dim,
                got: normal.len(),
            });
        }
        if !(0.0..=1.0).contains(&lambda_target) {
            return Err(GridError::InvalidValues(format!(
                "lambda target must lie in [0, 1], got {lambda_target}"
            )));
        }
        let h = Hyperplane::new(normal, 0.0)?;
        let normal = h.normal().to_vec();
        if self.integrate() == 0.0 {
            return Err(GridError::ZeroMass);
        }
        // Projection range of the box corners onto the normal.
        let mut lo = 0.0;
        let mut hi = 0.0;
        for a in 0..dim {
            let (l, u) = (self.lower(a), self.upper(a));
            let (pl, pu) = (l * normal[a], u * normal[a]);
            lo += pl.min(pu);
            hi += pl.max(pu);
        }
        let ramp: f64 = (0..dim)
            .map(|a| normal[a].abs() * self.step(a))
            .sum::<f64>()
            .max(1e-300);
        let f_lo = self.ramped_lambda(&normal, lo, ramp);
        let f_hi = self.ramped_lambda(&normal, hi, ramp);
        // The profile decreases from f_lo to f_hi as the offset grows.
        if lambda_target > f_lo || lambda_target < f_hi {
            return Err(GridError::NotBracketed {
                target: lambda_target,
            });
        }
        let (mut a, mut b) = (lo, hi);
        for _ in 0..200 {
            let mid = 0.5 * (a + b);
            let val = self.ramped_lambda(&normal, mid, ramp);
            if (val - lambda_target).abs() <= 1e-9 {
                return Ok(mid);
            }
            if val > lambda_target {
                a = mid;
            } else {
                b = mid;
            }
            if b - a <= 1e-13 * (1.0 + hi.abs().max(lo.abs())) {
                break;
            }
        }
        Ok(0.5 * (a + b))
    }

    /// Serializes to the binary grid-file layout (magic `GRIDFN1`,
    /// little-endian header, row-major f64 log-values).
    pub fn save<W: Write>(&self, w: &mut W) -> Result<(), GridError> {
        w.write_all(FILE_MAGIC)?;
        w.write_all(&(self.dim() as u32).to_le_bytes())?;
        for a in 0..self.dim() {
            w.write_all(&self.lower(a).to_le_bytes())?;
            w.write_all(&self.upper(a).to_le_bytes())?;
            w.write_all(&(self.counts()[a] as u32).to_le_bytes())?;
        }
        for v in &self.logvals {
            w.write_all(&v.to_le_bytes())?;
        }
        Ok(())
    }

    pub fn save_path(&self, path: impl AsRef<Path>) -> Result<(), GridError> {
        let mut file = std::io::BufWriter::new(std::fs::File::create(path)?);
        self.save(&mut file)
    }

    pub fn load<R: Read>(r: &mut R) -> Result<GridFunction, GridError> {
        let mut magic = [0u8; 7];
        r.read_exact(&mut magic)?;
        if &magic != FILE_MAGIC {
            return Err(GridError::Format("bad magic".into()));
        }
        let mut u32buf = [0u8; 4];
        let mut f64buf = [0u8; 8];
        r.read_exact(&mut u32buf)?;
        let dim = u32::from_le_bytes(u32buf) as usize;
        if dim == 0 || dim > MAX_DIM {
            return Err(GridError::Format(format!("unsupported dimension {dim}")));
        }
        let mut lower = Vec::with_capacity(dim);
        let mut upper = Vec::with_capacity(dim);
        let mut counts = Vec::with_capacity(dim);
        for _ in 0..dim {
            r.read_exact(&mut f64buf)?;
            lower.push(f64::from_le_bytes(f64buf));
            r.read_exact(&mut f64buf)?;
            upper.push(f64::from_le_bytes(f64buf));
            r.read_exact(&mut u32buf)?;
            counts.push(u32::from_le_bytes(u32buf) as usize);
        }
        let box_ = GridBox::new(lower, upper, counts)
            .map_err(|e| GridError::Format(format!("bad header: {e}")))?;
        let mut logvals = Vec::with_capacity(box_.len());
        for _ in 0..box_.len() {
            r.read_exact(&mut f64buf)?;
            logvals.push(f64::from_le_bytes(f64buf));
        }
        GridFunction::new(box_, logvals).map_err(|e| GridError::Format(format!("bad payload: {e}")))
    }

    pub fn load_path(path: impl AsRef<Path>) -> Result<GridFunction, GridError> {
        let mut file = std::io::BufReader::new(std::fs::File::open(path)?);
        GridFunction::load(&mut file)
    }
}

impl PartialEq for GridFunction {
    /// Bit-level equality of the represented domain and values.
    fn eq(&self, other: &Self) -> bool {
        if self.dim() != other.dim() || self.counts() != other.counts() {
            return false;
        }
        for a in 0..self.dim() {
            if self.lower(a).to_bits() != other.lower(a).to_bits()
                || self.upper(a).to_bits() != other.upper(a).to_bits()
            {
                return false;
            }
        }
        self.logvals
            .iter()
            .zip(&other.logvals)
            .all(|(x, y)| x.to_bits() == y.to_bits())
    }
}
