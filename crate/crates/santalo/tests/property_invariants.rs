//! Randomized structural invariants of the conjugate machinery on
//! arbitrary sampled data, including spiky and partially vanishing
//! functions far outside the log-concave families.

use proptest::prelude::*;

use santalo::grid::{GridBox, GridFunction};
use santalo::polar::{
    default_polar_box, duality_margin, legendre_1d, legendre_nd, midpoint_log_concavity_excess,
    polar_function, TransformMethod,
};

fn arbitrary_1d() -> impl Strategy<Value = GridFunction> {
    (17usize..=64, 1.0f64..6.0).prop_flat_map(|(count, half)| {
        prop::collection::vec(
            prop_oneof![
                4 => -25.0f64..2.0,
                1 => Just(f64::NEG_INFINITY),
            ],
            count,
        )
        .prop_filter("need three finite samples", |v| {
            v.iter().filter(|x| x.is_finite()).count() >= 3
        })
        .prop_map(move |vals| {
            let bx = GridBox::symmetric(&[half], &[count]).unwrap();
            GridFunction::new(bx, vals).unwrap()
        })
    })
}

fn arbitrary_2d() -> impl Strategy<Value = GridFunction> {
    (7usize..=15, 7usize..=15, 1.0f64..4.0).prop_flat_map(|(ca, cb, half)| {
        prop::collection::vec(-20.0f64..2.0, ca * cb).prop_map(move |vals| {
            let bx = GridBox::symmetric(&[half, half], &[ca, cb]).unwrap();
            GridFunction::new(bx, vals).unwrap()
        })
    })
}

proptest! {
    #[test]
    fn fast_conjugate_matches_brute_force_1d(f in arbitrary_1d()) {
        let eb = f.effective_box();
        let out = eb.mirrored();
        let mut ys = Vec::new();
        let mut xs = Vec::new();
        for i in 0..eb.counts()[0] {
            ys.push(f.node_coord(0, i));
        }
        for i in 0..out.counts()[0] {
            xs.push(out.lower()[0] + i as f64 * (out.upper()[0] - out.lower()[0]) / (out.counts()[0] - 1) as f64);
        }
        let u: Vec<f64> = f.logvals().iter().map(|v| -v).collect();
        let fast = legendre_1d(&ys, &u, &xs, TransformMethod::FastLLT).unwrap();
        let brute = legendre_1d(&ys, &u, &xs, TransformMethod::BruteForce).unwrap();
        for (a, b) in fast.iter().zip(&brute) {
            prop_assert!((a - b).abs() <= 1e-10, "{a} vs {b}");
        }
    }

    #[test]
    fn double_polar_is_extensive(f in arbitrary_1d()) {
        let p = polar_function(&f, &default_polar_box(&f)).unwrap().output;
        let pp = polar_function(&p, &f.effective_box()).unwrap().output;
        for (back, orig) in pp.logvals().iter().zip(f.logvals()) {
            if orig.is_finite() {
                prop_assert!(back >= &(orig - 1e-9), "{back} below {orig}");
            }
        }
    }

    #[test]
    fn polar_pairs_admissibly_and_is_log_concave(f in arbitrary_1d()) {
        let p = polar_function(&f, &default_polar_box(&f)).unwrap().output;
        prop_assert!(duality_margin(&f, &p).unwrap() <= 1e-9);
        prop_assert!(midpoint_log_concavity_excess(&p) <= 1e-9);
    }

    #[test]
    fn triple_transform_is_stable(f in arbitrary_1d()) {
        let out = default_polar_box(&f);
        let p1 = polar_function(&f, &out).unwrap().output;
        let p2 = polar_function(&p1, &f.effective_box()).unwrap().output;
        let p3 = polar_function(&p2, &out).unwrap().output;
        for (a, b) in p1.logvals().iter().zip(p3.logvals()) {
            prop_assert!((a - b).abs() <= 1e-8, "{a} vs {b}");
        }
    }

    #[test]
    fn raising_a_node_lowers_the_polar(f in arbitrary_1d(), which in 0usize..64, bump in 0.1f64..3.0) {
        let mut vals = f.logvals().to_vec();
        let idx = which % vals.len();
        vals[idx] = if vals[idx].is_finite() { vals[idx] + bump } else { 0.0 };
        let raised = GridFunction::new(f.effective_box(), vals).unwrap();
        let out = default_polar_box(&f);
        let pf = polar_function(&f, &out).unwrap().output;
        let pr = polar_function(&raised, &out).unwrap().output;
        for (a, b) in pr.logvals().iter().zip(pf.logvals()) {
            prop_assert!(*a <= b + 1e-12, "{a} above {b}");
        }
    }

    #[test]
    fn translate_round_trip_is_exact(f in arbitrary_1d(), z in -2.0f64..2.0) {
        let moved = f.translate(&[z]);
        prop_assert_eq!(moved.integrate().to_bits(), f.integrate().to_bits());
        let back = moved.translate(&[-z]);
        prop_assert_eq!(back.logvals(), f.logvals());
        prop_assert_eq!(back.lower(0).to_bits(), f.lower(0).to_bits());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn fast_conjugate_matches_brute_force_2d(f in arbitrary_2d()) {
        let eb = f.effective_box();
        let out = eb.mirrored();
        let u: Vec<f64> = f.logvals().iter().map(|v| -v).collect();
        let fast = legendre_nd(&eb, &u, &out, TransformMethod::FastLLT).unwrap();
        let brute = legendre_nd(&eb, &u, &out, TransformMethod::BruteForce).unwrap();
        for (a, b) in fast.iter().zip(&brute) {
            prop_assert!((a - b).abs() <= 1e-10, "{a} vs {b}");
        }
    }

    #[test]
    fn extensiveness_2d(f in arbitrary_2d()) {
        let p = polar_function(&f, &default_polar_box(&f)).unwrap().output;
        let pp = polar_function(&p, &f.effective_box()).unwrap().output;
        for (back, orig) in pp.logvals().iter().zip(f.logvals()) {
            prop_assert!(back >= &(orig - 1e-9), "{back} below {orig}");
        }
    }
}
