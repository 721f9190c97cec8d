mod common;

use approx::assert_abs_diff_eq;
use calibr::calibrations::{build, kaehler_power, COMASS_HIGH, COMASS_LOW};
use calibr::exterior::{ExteriorElement, SimplePlane};
use calibr::grassmann::{
    comass, constrained_extremum, random_planes, reduce_calibration, sample_grassmannian, ComassOptions, Extremum,
    ExtremumOptions, SampleOptions,
};
use calibr::hessian::symbol;
use calibr::Calibration;
use proptest::prelude::*;

use common::*;

fn quick(seed: u64) -> ComassOptions {
    ComassOptions { seed, ..ComassOptions::quick() }
}

fn frame_vectors(p: &SimplePlane) -> Vec<Vec<f64>> {
    p.vectors()
}

#[test]
fn comass_of_a_coordinate_plane() {
    let phi = ExteriorElement::basis(4, &[0, 1]).unwrap();
    let r = comass(&phi, &quick(1)).unwrap();
    assert_abs_diff_eq!(r.value, 1.0, epsilon = 1e-10);
    let f = frame_vectors(&r.maximizer);
    for v in &f {
        assert!(distance_to_span(v, &[unit(4, 0), unit(4, 1)]) < 1e-6);
    }
}

#[test]
fn comass_of_omega() {
    let r = comass(&kaehler_power(2, 1), &quick(2)).unwrap();
    assert_abs_diff_eq!(r.value, 1.0, epsilon = 1e-10);
    assert!(r.saturated);
}

#[test]
fn comass_of_two_disjoint_volume_forms() {
    let phi = ExteriorElement::from_terms(6, 3, vec![(vec![0, 1, 2], 1.0), (vec![3, 4, 5], 1.0)]).unwrap();
    let r = comass(&phi, &quick(3)).unwrap();
    // the coordinate plane e₁₂₃ attains 1; random planes never exceed it
    let mut g = rng(33);
    let best = (0..20_000)
        .map(|_| {
            let f = random_frame(&mut g, 6, 3);
            minor(&[0, 1, 2], &f) + minor(&[3, 4, 5], &f)
        })
        .fold(f64::NEG_INFINITY, f64::max);
    assert!(best <= 1.0 + 1e-12, "sampled {best}");
    assert_abs_diff_eq!(r.value, 1.0, epsilon = 1e-9);
}

#[test]
fn catalogue_forms_have_comass_one() {
    for (name, params) in [
        ("kaehler", vec![3.0, 2.0]),
        ("special_lagrangian", vec![3.0]),
        ("associative", vec![]),
        ("quaternionic", vec![2.0]),
        ("lambda", vec![0.5]),
        ("volume", vec![3.0]),
    ] {
        let cal = build(name, &params).unwrap();
        let r = comass(&cal.form, &quick(4)).unwrap();
        assert!((COMASS_LOW..=COMASS_HIGH).contains(&r.value), "{name}: {}", r.value);
    }
}

#[test]
fn lambda_grassmannian_is_one_plane() {
    let cal = build("lambda", &[0.5]).unwrap();
    let s = sample_grassmannian(&cal, &SampleOptions::new(50, 7)).unwrap();
    assert_eq!(s.len(), 1);
    let target = SimplePlane::coordinate(4, &[0, 1]);
    for p in &s.planes {
        let worst = p.principal_angles(&target).into_iter().fold(0.0, f64::max);
        assert!(worst < 1e-3);
    }
}

#[test]
fn volume_grassmannian_dedups_to_one_plane() {
    let cal = build("volume", &[3.0]).unwrap();
    let s = sample_grassmannian(&cal, &SampleOptions::new(20, 5)).unwrap();
    assert_eq!(s.len(), 1);
}

#[test]
fn kaehler_planes_are_complex_lines() {
    let cal = build("kaehler", &[2.0, 1.0]).unwrap();
    let s = sample_grassmannian(&cal, &SampleOptions { dedup_angle: 0.0, ..SampleOptions::new(100, 7) }).unwrap();
    assert_eq!(s.len(), 100);
    for p in &s.planes {
        let f = frame_vectors(p);
        for v in &f {
            assert!(distance_to_span(&j(v), &f) < 1e-3);
        }
    }
}

#[test]
fn sampling_is_deterministic() {
    let cal = build("special_lagrangian", &[3.0]).unwrap();
    let a = sample_grassmannian(&cal, &SampleOptions::new(10, 9)).unwrap();
    let b = sample_grassmannian(&cal, &SampleOptions::new(10, 9)).unwrap();
    assert_eq!(a.values, b.values);
    for (x, y) in a.planes.iter().zip(&b.planes) {
        assert_eq!(x.frame(), y.frame());
    }
    let ra = comass(&cal.form, &quick(12)).unwrap();
    let rb = comass(&cal.form, &quick(12)).unwrap();
    assert_eq!(ra.start_values, rb.start_values);
}

#[test]
fn extremum_examples_under_omega() {
    let cal = Calibration::from_selector("kaehler:2,1").unwrap();
    let s = sample_grassmannian(&cal, &SampleOptions::new(24, 7)).unwrap();
    let opts = ExtremumOptions::default();
    let r = constrained_extremum(&cal.form, &cal, &s, Extremum::Min, &opts).unwrap();
    assert_abs_diff_eq!(r.value, 1.0, epsilon = 1e-9);
    let r = constrained_extremum(&cal.form.scale(-1.0), &cal, &s, Extremum::Min, &opts).unwrap();
    assert_abs_diff_eq!(r.value, -1.0, epsilon = 1e-9);

    // dx₂∧dy₂ on the line through (z₁, z₂) is |z₂|², minimal on the z₁-axis
    let alpha = ExteriorElement::basis(4, &[2, 3]).unwrap();
    let mut oracle = f64::INFINITY;
    for a in 0..=64 {
        let t = std::f64::consts::FRAC_PI_2 * a as f64 / 64.0;
        for b in 0..16 {
            let s_ = std::f64::consts::TAU * b as f64 / 16.0;
            let u = [t.cos(), 0.0, t.sin() * s_.cos(), t.sin() * s_.sin()];
            let line = complex_line(&u);
            oracle = oracle.min(minor(&[2, 3], &line));
        }
    }
    let r = constrained_extremum(&alpha, &cal, &s, Extremum::Min, &opts).unwrap();
    assert_abs_diff_eq!(oracle, 0.0, epsilon = 1e-15);
    assert_abs_diff_eq!(r.value, oracle, epsilon = 1e-6);
    for v in frame_vectors(&r.witness) {
        assert!(distance_to_span(&v, &[unit(4, 0), unit(4, 1)]) < 1e-3);
    }
}

#[test]
fn reduction_of_the_lambda_example() {
    let cal = build("lambda", &[0.5]).unwrap();
    let s = sample_grassmannian(&cal, &SampleOptions::new(24, 7)).unwrap();
    let r = reduce_calibration(&cal, &s).unwrap();
    assert!(!r.elliptic);
    assert_eq!(r.w.ncols(), 2);
    for c in r.w.column_iter() {
        let v: Vec<f64> = c.iter().copied().collect();
        assert!(distance_to_span(&v, &[unit(4, 0), unit(4, 1)]) < 1e-8);
    }
    let psi = ExteriorElement::basis(4, &[0, 1]).unwrap();
    assert!((&r.psi - &psi).norm() < 1e-8);
    let w = r.witness.expect("witness");
    assert!(distance_to_span(&w, &[unit(4, 2), unit(4, 3)]) < 1e-8);
}

#[test]
fn elliptic_catalogue_entries() {
    for sel in ["kaehler:2,1", "special_lagrangian:3", "associative", "cayley", "volume:3"] {
        let cal = Calibration::from_selector(sel).unwrap();
        let s = sample_grassmannian(&cal, &SampleOptions::new(24, 7)).unwrap();
        let r = reduce_calibration(&cal, &s).unwrap();
        assert!(r.elliptic, "{sel}");
        assert_eq!(r.w.ncols(), cal.n());
    }
}

#[test]
fn every_unit_vector_lies_in_a_complex_line() {
    let w = kaehler_power(2, 1);
    let mut g = rng(8);
    for _ in 0..100 {
        let u = random_unit(&mut g, 4);
        let xi = SimplePlane::from_vectors(&complex_line(&u)).unwrap().pvector();
        assert_abs_diff_eq!(w.pairing(&xi).unwrap(), 1.0, epsilon = 1e-12);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn comass_is_homogeneous(c in prop_oneof![-3.0f64..-0.2, 0.2f64..3.0], seed in 0u64..100) {
        let phi = build("special_lagrangian", &[3.0]).unwrap().form;
        let a = comass(&phi, &quick(seed)).unwrap().value;
        let b = comass(&phi.scale(c), &quick(seed)).unwrap().value;
        prop_assert!((b - c.abs() * a).abs() < 1e-8);
    }

    #[test]
    fn comass_bounds_every_plane(seed in 0u64..1000) {
        let phi = build("associative", &[]).unwrap().form;
        let value = comass(&phi, &quick(1)).unwrap().value;
        for plane in random_planes(7, 3, 50, seed) {
            prop_assert!(phi.pairing(&plane.pvector()).unwrap().abs() <= value + 1e-9);
        }
    }

    #[test]
    fn symbol_pairing_is_the_projected_length(seed in 0u64..1000) {
        // ⟨e∧(e⌟φ), ξ⟩ = ‖proj_ξ e‖² on φ-planes
        let cal = build("kaehler", &[3.0, 1.0]).unwrap();
        let mut g = rng(seed);
        let e = random_unit(&mut g, 6);
        let line = complex_line(&random_unit(&mut g, 6));
        let xi = SimplePlane::from_vectors(&line).unwrap().pvector();
        let proj: f64 = line.iter().map(|q| dot(&e, q).powi(2)).sum();
        let got = symbol(&e, &cal.form).unwrap().pairing(&xi).unwrap();
        prop_assert!((got - proj).abs() < 1e-9);
    }

    #[test]
    fn first_cousin_pairing_vanishes(seed in 0u64..1000) {
        // ⟨φ, b∧(a⌟ξ)⟩ = 0 for a ∈ span ξ, b ⊥ span ξ, ξ a φ-plane
        let w = kaehler_power(3, 1);
        let mut g = rng(seed);
        let line = complex_line(&random_unit(&mut g, 6));
        let xi = SimplePlane::from_vectors(&line).unwrap().pvector();
        let coef = gaussian_vector(&mut g, 2);
        let a: Vec<f64> = (0..6).map(|i| coef[0] * line[0][i] + coef[1] * line[1][i]).collect();
        let raw = gaussian_vector(&mut g, 6);
        let b: Vec<f64> = {
            let mut b = raw.clone();
            for q in &line {
                let c = dot(&raw, q);
                for (bi, qi) in b.iter_mut().zip(q) {
                    *bi -= c * qi;
                }
            }
            b
        };
        let term = ExteriorElement::vector(&b).wedge(&xi.interior(&a).unwrap()).unwrap();
        prop_assert!(w.pairing(&term).unwrap().abs() < 1e-9);
    }
}
