//! Seeded random-instance runs of the product verifiers, plus the
//! report-level invariants tying the split-point bounds together.

use santalo::grid::{GridBox, GridFunction, Hyperplane};
use santalo::instances::{InstanceKind, InstanceSpec};
use santalo::theorems::{
    median_reduction, two_pi_pow, verify_induction_step, verify_thm2, verify_thm3_lambda,
    verify_thm3_median,
};

fn mixture(dim: usize, seed: u64) -> GridFunction {
    let spec = InstanceSpec::new(
        InstanceKind::LogconcaveMixture {
            seed,
            components: 3,
        },
        dim,
    )
    .unwrap();
    match spec.build().unwrap() {
        santalo::instances::Instance::Function(f) => f,
        _ => unreachable!(),
    }
}

fn axis(dim: usize, a: usize) -> Vec<f64> {
    let mut v = vec![0.0; dim];
    v[a] = 1.0;
    v
}

const LAMBDAS: [f64; 5] = [0.1, 0.25, 0.5, 0.75, 0.9];

#[test]
fn random_1d_instances_pass_every_verifier() {
    for seed in 0..12u64 {
        let f = mixture(1, seed);
        let rep = verify_thm2(&f, None).unwrap();
        assert!(rep.passed, "thm2 failed on seed {seed}: {rep:?}");

        let rep = verify_thm3_median(&f, &[1.0], None).unwrap();
        assert!(rep.passed, "median failed on seed {seed}: {rep:?}");

        for lam in LAMBDAS {
            let t = f.find_quantile_offset(&[1.0], lam).unwrap();
            let h = Hyperplane::new(&[1.0], t).unwrap();
            let rep = verify_thm3_lambda(&f, &h, None).unwrap();
            assert!(
                rep.passed,
                "lambda {lam} failed on seed {seed}: product {} bound {}",
                rep.product, rep.bound
            );
        }
    }
}

#[test]
fn random_2d_instances_pass_every_verifier() {
    for seed in 0..6u64 {
        let f = mixture(2, seed);
        let rep = verify_thm2(&f, None).unwrap();
        assert!(rep.passed, "thm2 failed on seed {seed}: {rep:?}");

        for a in 0..2 {
            let rep = verify_thm3_median(&f, &axis(2, a), None).unwrap();
            assert!(rep.passed, "median axis {a} failed on seed {seed}: {rep:?}");
        }

        for lam in LAMBDAS {
            let t = f.find_quantile_offset(&axis(2, 0), lam).unwrap();
            let h = Hyperplane::new(&axis(2, 0), t).unwrap();
            let rep = verify_thm3_lambda(&f, &h, None).unwrap();
            assert!(
                rep.passed,
                "lambda {lam} failed on seed {seed}: product {} bound {}",
                rep.product, rep.bound
            );
        }
    }
}

/// The saturation margin of the centered product bound for the standard
/// Gaussian shrinks when the grid is refined.
#[test]
fn gaussian_margin_shrinks_under_refinement() {
    let mut margins = Vec::new();
    for counts in [801usize, 1601] {
        let bx = GridBox::symmetric(&[8.0], &[counts]).unwrap();
        let f = GridFunction::from_log_fn(bx, |x| -0.5 * x[0] * x[0]);
        let rep = verify_thm2(&f, None).unwrap();
        assert!(rep.passed);
        let rel = (rep.product - rep.bound).abs() / rep.bound;
        assert!(rel <= 3e-2, "relative margin {rel} at {counts} nodes");
        margins.push(rel);
    }
    assert!(
        margins[1] < margins[0],
        "refinement did not shrink the margin: {margins:?}"
    );
}

/// Moving the density and recentering reproduces the closed-form shifted
/// family: the product is translation covariant.
#[test]
fn translation_covariance_of_product() {
    let bx = GridBox::symmetric(&[8.0], &[1601]).unwrap();
    let centered = GridFunction::from_log_fn(bx, |x| -0.5 * x[0] * x[0]);
    let base = verify_thm2(&centered, None).unwrap();
    for shift in [0.5, 2.0, -3.0] {
        let bx = GridBox::new(vec![-8.0 + shift], vec![8.0 + shift], vec![1601]).unwrap();
        let moved = GridFunction::from_log_fn(bx, move |x| {
            let t = x[0] - shift;
            -0.5 * t * t
        });
        let rep = verify_thm2(&moved, None).unwrap();
        assert!(rep.passed);
        assert!(
            (rep.product - base.product).abs() <= 1e-3 * base.product,
            "shift {shift}: {} vs {}",
            rep.product,
            base.product
        );
    }
}

/// The two per-side bounds of the reduced problem add up to the lambda-split
/// bound exactly, and the split product stays below that sum.
#[test]
fn side_bounds_imply_the_split_bound() {
    for seed in [0u64, 1, 2] {
        let f = mixture(2, seed);
        let dir = axis(2, 0);
        let dr = median_reduction(&f, &dir, None).unwrap();
        let lam = dr.split.lambda;
        let tp = two_pi_pow(2);
        let b_plus = tp / (4.0 * lam);
        let b_minus = tp / (4.0 * (1.0 - lam));
        let b_lambda = tp / (4.0 * lam * (1.0 - lam));
        assert!(
            ((b_plus + b_minus) - b_lambda).abs() <= 1e-12 * b_lambda,
            "bound sum identity broke: {} vs {}",
            b_plus + b_minus,
            b_lambda
        );

        let rep = verify_induction_step(&dr);
        assert!(rep.passed, "seed {seed}: {rep:?}");

        let t = f.find_quantile_offset(&dir, 0.5).unwrap();
        let h = Hyperplane::new(&dir, t).unwrap();
        let split = verify_thm3_lambda(&f, &h, None).unwrap();
        assert!(split.passed);
        assert!(
            split.product <= (b_plus + b_minus) * 1.03,
            "seed {seed}: product {} above summed bound {}",
            split.product,
            b_plus + b_minus
        );
    }
}
