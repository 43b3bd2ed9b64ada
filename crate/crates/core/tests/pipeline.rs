//! Cross-module checks: parsed expressions evaluated against concrete
//! unitaries, symbolic and numeric verification layers agreeing on the same
//! objects, and reports surviving JSON transport byte-for-byte.

use num_complex::Complex64;
use qpg_core::magic::{build_two_projection_magic, delta_rep, verify_magic_unitary, MagicUnitary};
use qpg_core::ncalg::{self, parse_expression};
use qpg_core::numerics::Tolerance;
use qpg_core::spaces::{DiscreteSpace, GluingSpec};
use qpg_core::{coaction, CheckReport};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn wedge() -> GluingSpec {
    GluingSpec::new(4, DiscreteSpace::interval(5).unwrap(), &[1]).unwrap()
}

#[test]
fn parsed_expression_evaluates_like_hand_built_matrices() {
    let theta = 0.9_f64;
    let u = build_two_projection_magic(theta).unwrap();
    let poly = parse_expression("a(1,1)*a(3,3) - 1/2 a(2,2)'", 4).unwrap();
    let evaluated = poly.evaluate(&u).unwrap();

    let direct = u
        .entry(1, 1)
        .matmul(u.entry(3, 3))
        .unwrap()
        .sub(&u.entry(2, 2).scale(Complex64::new(0.5, 0.0)))
        .unwrap();
    assert!(evaluated.max_diff(&direct).unwrap() <= 1e-15);
}

#[test]
fn normal_form_is_sound_for_parsed_input() {
    // Rewriting before evaluation must not change the value.
    let inputs = [
        "a(1,1)*a(1,1)*a(1,2) + a(2,1)*a(2,2)",
        "a(3,3)*a(3,3) - a(3,3)",
        "a(1,2)*a(1,2)*a(1,2)*a(4,2) + 2 a(2,2)",
    ];
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    for _ in 0..10 {
        let u = qpg_core::magic::generate::random_block_magic(&mut rng);
        for input in inputs {
            let poly = parse_expression(input, 4).unwrap();
            let reduced = poly.normal_form();
            let a = poly.evaluate(&u).unwrap();
            let b = reduced.evaluate(&u).unwrap();
            assert!(a.max_diff(&b).unwrap() <= 1e-12, "{input}");
        }
    }
}

#[test]
fn symbolic_and_numeric_verification_agree_on_a_grid() {
    let tol = Tolerance::default();
    let relations = ncalg::relation_suite(4).unwrap();
    assert!(relations.passed());
    for step in 0..16 {
        let theta = std::f64::consts::PI * step as f64 / 16.0;
        let u = build_two_projection_magic(theta).unwrap();
        let numeric = verify_magic_unitary(&u, &tol).unwrap();
        assert!(numeric.passed(), "theta={theta}: {numeric:?}");
    }
}

#[test]
fn degree_doubled_unitary_passes_everything() {
    let u = build_two_projection_magic(1.2).unwrap();
    let du = delta_rep(&u);
    let tol = Tolerance::new(1e-9).unwrap();
    assert!(verify_magic_unitary(&du, &tol).unwrap().passed());

    let spec = wedge();
    let invariance = coaction::check_invariance(&spec, &du, 5, 20, &tol).unwrap();
    assert!(invariance.passed(), "{invariance:?}");
    let faithful = coaction::check_faithful_slices(&spec, &du, &tol).unwrap();
    assert!(faithful.passed(), "{faithful:?}");
}

#[test]
fn magic_unitary_json_roundtrip_is_bit_exact() {
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    for _ in 0..5 {
        let u = qpg_core::magic::generate::random_block_magic(&mut rng);
        let text = serde_json::to_string(&u).unwrap();
        let back: MagicUnitary = serde_json::from_str(&text).unwrap();
        for i in 1..=u.n() {
            for j in 1..=u.n() {
                let a = u.entry(i, j);
                let b = back.entry(i, j);
                for (x, y) in a.entries().iter().zip(b.entries()) {
                    assert_eq!(x.re.to_bits(), y.re.to_bits());
                    assert_eq!(x.im.to_bits(), y.im.to_bits());
                }
            }
        }
    }
}

#[test]
fn full_check_battery_on_the_wedge_survives_json() {
    let spec = wedge();
    let u = build_two_projection_magic(std::f64::consts::FRAC_PI_4).unwrap();
    let tol = Tolerance::default();
    let reports = vec![
        verify_magic_unitary(&u, &tol).unwrap(),
        coaction::check_technical_lemma(&spec, &u, 42, 25, &tol).unwrap(),
        coaction::check_invariance(&spec, &u, 42, 25, &tol).unwrap(),
        coaction::check_faithful_slices(&spec, &u, &tol).unwrap(),
        coaction::fixed_point_space(&spec, &u, &tol).unwrap(),
        coaction::density_rank(&spec, &u, &tol).unwrap(),
        coaction::check_homomorphism(&spec, &u, 42, 25, &tol).unwrap(),
        coaction::check_rep_coassociativity(&spec, &u, 42, 10, &tol).unwrap(),
    ];
    for report in &reports {
        assert!(!report.failed(), "{}: {:?}", report.check, report);
    }

    let text = serde_json::to_string_pretty(&reports).unwrap();
    let back: Vec<CheckReport> = serde_json::from_str(&text).unwrap();
    let again = serde_json::to_string_pretty(&back).unwrap();
    assert_eq!(text, again);

    // The informational entries keep a null pass, asserted ones keep a bool.
    let js: serde_json::Value = serde_json::from_str(&text).unwrap();
    let fixed = js
        .as_array()
        .unwrap()
        .iter()
        .find(|r| r["check"] == "fixed_points")
        .unwrap();
    assert!(fixed["pass"].is_null());
    assert_eq!(fixed["metrics"]["fixed_point_dim"], 9);
}

#[test]
fn evaluate_rejects_mismatched_sizes() {
    let poly = parse_expression("a(5,5)", 5).unwrap();
    let u = build_two_projection_magic(0.4).unwrap();
    assert!(poly.evaluate(&u).is_err());
}

#[test]
fn homomorphism_also_holds_outside_the_quotient() {
    // Multiplicativity is a property of the coaction on the whole product
    // algebra, not only of quotient members; spot-check one non-quotient
    // input directly.
    let u = build_two_projection_magic(0.8).unwrap();
    let mut f = qpg_core::spaces::ProductFunction::constant(4, 5, Complex64::new(0.25, 0.0));
    f.set(2, 1, Complex64::new(-1.5, 0.5));
    let g = {
        let mut g = qpg_core::spaces::ProductFunction::constant(4, 5, Complex64::new(1.0, -1.0));
        g.set(1, 1, Complex64::new(2.0, 0.0));
        g
    };
    let lhs = coaction::apply_coaction(&f.mul(&g).unwrap(), &u).unwrap();
    let rhs = coaction::apply_coaction(&f, &u)
        .unwrap()
        .pointwise_mul(&coaction::apply_coaction(&g, &u).unwrap())
        .unwrap();
    assert!(lhs.max_diff(&rhs).unwrap() <= 1e-14);
}
