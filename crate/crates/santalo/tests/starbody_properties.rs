//! Body-level duality and identity checks across the suite shapes, in two
//! and three dimensions.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use santalo::starbody::{
    ball_body, cosine_perturbed_body, cross_polytope_body, cube_body, ellipsoid_body,
    random_star_body, verify_cn_identity, verify_lutwak, AngularGrid, StarBody,
};

fn suite_2d() -> Vec<(&'static str, StarBody)> {
    let g = || AngularGrid::circle(2048).unwrap();
    vec![
        ("ball", ball_body(g())),
        ("cube", cube_body(g())),
        ("cross-polytope", cross_polytope_body(g())),
        ("ellipsoid", ellipsoid_body(g(), &[2.0, 0.5]).unwrap()),
        (
            "cosine-perturbed",
            cosine_perturbed_body(g(), 0.3, 1).unwrap(),
        ),
        ("star-0", random_star_body(g(), 0)),
        ("star-1", random_star_body(g(), 1)),
        ("star-2", random_star_body(g(), 2)),
    ]
}

/// The polar of a polar's polar equals the first polar. Run at a fine
/// angular resolution because the discrete support maximum carries an
/// O(h^2) one-sided bias that the fixpoint comparison must beat.
#[test]
fn double_polar_fixes_polars() {
    let g = AngularGrid::circle(8192).unwrap();
    let body = ellipsoid_body(g, &[1.3, 0.8]).unwrap();
    let t = body.polar_body().unwrap();
    let tt = t.polar_body().unwrap().polar_body().unwrap();
    let sup = t
        .rho()
        .iter()
        .zip(tt.rho())
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    assert!(sup <= 1e-6, "double polar moved the body by {sup}");
}

#[test]
fn polar_reverses_inclusion() {
    let g = AngularGrid::circle(1024).unwrap();
    let small = random_star_body(g.clone(), 4);
    // Contains `small` pointwise by construction.
    let big = small.scale(1.7).unwrap();
    let ps = small.polar_body().unwrap();
    let pb = big.polar_body().unwrap();
    for (a, b) in pb.rho().iter().zip(ps.rho()) {
        assert!(*a <= b + 1e-9);
    }
}

#[test]
fn volume_scales_with_the_right_powers() {
    let g = AngularGrid::circle(1024).unwrap();
    let s = random_star_body(g, 6);
    let c = 1.6f64;
    let sc = s.scale(c).unwrap();
    let rel = |a: f64, b: f64| (a - b).abs() / b.abs();
    assert!(rel(sc.volume(), c * c * s.volume()) <= 1e-9);
    let p = s.polar_body().unwrap();
    let pc = sc.polar_body().unwrap();
    assert!(rel(pc.volume(), s.polar_body().unwrap().volume() / (c * c)) <= 1e-9);
    // The volume product is scale invariant.
    assert!(rel(sc.volume() * pc.volume(), s.volume() * p.volume()) <= 1e-9);
}

/// Polar bodies are convex: their gauge satisfies the triangle inequality.
#[test]
fn polar_gauge_is_subadditive() {
    let g = AngularGrid::circle(2048).unwrap();
    let p = random_star_body(g, 12).polar_body().unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(0xBEEF);
    for _ in 0..1000 {
        let x = [rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0)];
        let y = [rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0)];
        let s = [x[0] + y[0], x[1] + y[1]];
        assert!(p.gauge(&s) <= p.gauge(&x) + p.gauge(&y) + 1e-6);
    }
}

#[test]
fn cn_identity_across_suite() {
    for (name, body) in suite_2d() {
        let rep = verify_cn_identity(&body).unwrap();
        assert!(rep.passed, "{name}: {rep:?}");
    }
    let rep = verify_cn_identity(&ball_body(AngularGrid::sphere(64, 128).unwrap())).unwrap();
    assert!(rep.passed, "3-d ball: {rep:?}");
    let rep = verify_cn_identity(&random_star_body(AngularGrid::sphere(64, 128).unwrap(), 5))
        .unwrap();
    assert!(rep.passed, "3-d star: {rep:?}");
}

#[test]
fn volume_product_bound_across_suite() {
    for (name, body) in suite_2d() {
        let rep = verify_lutwak(&body).unwrap();
        assert!(rep.passed, "{name}: direct {:?}", rep.direct);
        assert!(
            rep.premise_margin <= 1e-6,
            "{name}: premise margin {}",
            rep.premise_margin
        );
    }
}

#[test]
fn ellipsoid_polar_3d_inverts_axes() {
    let g = AngularGrid::sphere(64, 128).unwrap();
    let p = ellipsoid_body(g.clone(), &[1.5, 1.0, 0.75])
        .unwrap()
        .polar_body()
        .unwrap();
    let expect = ellipsoid_body(g, &[1.0 / 1.5, 1.0, 1.0 / 0.75]).unwrap();
    let sup = p
        .rho()
        .iter()
        .zip(expect.rho())
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    assert!(sup <= 5e-3, "3-d polar drifted by {sup}");
}

#[test]
fn gauge_duality_premise_3d() {
    let body = random_star_body(AngularGrid::sphere(64, 128).unwrap(), 9)
        .recenter()
        .unwrap();
    let polar = body.polar_body().unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(0xD0E1);
    let m = body.grid().len();
    let mut dx = [0.0f64; 3];
    let mut dy = [0.0f64; 3];
    for _ in 0..100_000 {
        let j = rng.random_range(0..m);
        let k = rng.random_range(0..m);
        let r1: f64 = rng.random_range(0.1..3.0);
        let r2: f64 = rng.random_range(0.1..3.0);
        body.grid().direction(j, &mut dx);
        polar.grid().direction(k, &mut dy);
        let x = [r1 * dx[0], r1 * dx[1], r1 * dx[2]];
        let y = [r2 * dy[0], r2 * dy[1], r2 * dy[2]];
        let ip: f64 = x.iter().zip(&y).map(|(a, b)| a * b).sum();
        let margin = ip - body.gauge(&x) * polar.gauge(&y);
        assert!(margin <= 1e-6, "premise violated by {margin}");
    }
}
