//! The fast conjugate against the exhaustive one on seeded potential
//! families, at the full suite scale.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use santalo::grid::GridBox;
use santalo::polar::{legendre_1d, legendre_nd, TransformMethod};

/// Convex piecewise-linear potential: max of seeded affine forms. Exercises
/// the hull path with long collinear runs and sharp slope changes.
fn max_affine_1d(seed: u64, ys: &[f64]) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let forms: Vec<(f64, f64)> = (0..6)
        .map(|_| (rng.random_range(-4.0..4.0), rng.random_range(-1.0..1.0)))
        .collect();
    ys.iter()
        .map(|y| {
            forms
                .iter()
                .map(|(s, b)| s * y + b)
                .fold(f64::NEG_INFINITY, f64::max)
        })
        .collect()
}

/// Nonconvex potential: quadratic plus a sinusoidal ripple. Exercises the
/// hull pruning on samples that are far from convex.
fn wiggly_1d(seed: u64, ys: &[f64]) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let q: f64 = rng.random_range(0.5..1.5);
    let a: f64 = rng.random_range(-1.0..1.0);
    let ph: f64 = rng.random_range(0.0..6.28);
    ys.iter()
        .map(|y| 0.5 * q * y * y + a * y + 0.3 * (3.0 * y + ph).sin())
        .collect()
}

#[test]
fn oracle_equivalence_1d_suite() {
    let count = 801usize;
    let half = 5.0f64;
    let ys: Vec<f64> = (0..count)
        .map(|i| -half + i as f64 * (2.0 * half) / (count - 1) as f64)
        .collect();
    let xs = ys.clone();
    for seed in 0..200u64 {
        let u = if seed % 2 == 0 {
            max_affine_1d(seed, &ys)
        } else {
            wiggly_1d(seed, &ys)
        };
        let fast = legendre_1d(&ys, &u, &xs, TransformMethod::FastLLT).unwrap();
        let brute = legendre_1d(&ys, &u, &xs, TransformMethod::BruteForce).unwrap();
        let sup = fast
            .iter()
            .zip(&brute)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        assert!(sup <= 1e-10, "seed {seed}: methods differ by {sup}");
    }
}

fn potential_2d(seed: u64, bx: &GridBox) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut vals = Vec::with_capacity(bx.len());
    let mut coords = [0.0f64; 2];
    if seed % 2 == 0 {
        let forms: Vec<(f64, f64, f64)> = (0..5)
            .map(|_| {
                (
                    rng.random_range(-3.0..3.0),
                    rng.random_range(-3.0..3.0),
                    rng.random_range(-1.0..1.0),
                )
            })
            .collect();
        for j in 0..bx.len() {
            bx.node(j, &mut coords);
            let v = forms
                .iter()
                .map(|(s0, s1, b)| s0 * coords[0] + s1 * coords[1] + b)
                .fold(f64::NEG_INFINITY, f64::max);
            vals.push(v);
        }
    } else {
        let q: f64 = rng.random_range(0.5..1.5);
        let ph: f64 = rng.random_range(0.0..6.28);
        for j in 0..bx.len() {
            bx.node(j, &mut coords);
            let r2 = coords[0] * coords[0] + coords[1] * coords[1];
            vals.push(0.5 * q * r2 + 0.25 * (2.0 * coords[0] + 3.0 * coords[1] + ph).sin());
        }
    }
    vals
}

#[test]
fn oracle_equivalence_2d_suite() {
    let src = GridBox::symmetric(&[4.0, 4.0], &[61, 61]).unwrap();
    let out = GridBox::symmetric(&[4.0, 4.0], &[41, 41]).unwrap();
    for seed in 0..50u64 {
        let u = potential_2d(seed, &src);
        let fast = legendre_nd(&src, &u, &out, TransformMethod::FastLLT).unwrap();
        let brute = legendre_nd(&src, &u, &out, TransformMethod::BruteForce).unwrap();
        let sup = fast
            .iter()
            .zip(&brute)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        assert!(sup <= 1e-10, "seed {seed}: methods differ by {sup}");
    }
}
