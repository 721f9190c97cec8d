mod common;

use approx::assert_abs_diff_eq;
use calibr::cones::{
    cone_membership, contraction_boundary, lambda_span, lemma_2_5_check, mass_norm_estimate, positive_basis,
    positivity_classify, Certificate, ConeStatus, MassOptions, MembershipOptions,
};
use calibr::exterior::{ExteriorElement, SimplePlane};
use calibr::grassmann::{random_planes, sample_grassmannian, PlaneSampleSet, SampleOptions};
use calibr::Calibration;
use proptest::prelude::*;
use rand::Rng;

use common::*;

fn setup(sel: &str, count: usize) -> (Calibration, PlaneSampleSet) {
    let cal = Calibration::from_selector(sel).unwrap();
    let s = sample_grassmannian(&cal, &SampleOptions::new(count, 7)).unwrap();
    (cal, s)
}

fn line(u: &[f64]) -> SimplePlane {
    SimplePlane::from_vectors(&complex_line(u)).unwrap()
}

/// Rank of a family of vectors by Gram-Schmidt with a relative cutoff.
fn rank(vectors: &[Vec<f64>]) -> usize {
    let scale = vectors.iter().map(|v| dot(v, v).sqrt()).fold(0.0, f64::max);
    let mut basis: Vec<Vec<f64>> = Vec::new();
    for v in vectors {
        let mut w = v.clone();
        for _ in 0..2 {
            for q in &basis {
                let c = dot(&w, q);
                for (wi, qi) in w.iter_mut().zip(q) {
                    *wi -= c * qi;
                }
            }
        }
        let r = dot(&w, &w).sqrt();
        if r > 1e-9 * scale {
            basis.push(w.into_iter().map(|x| x / r).collect());
        }
    }
    basis.len()
}

#[test]
fn span_dimensions() {
    let (_, s) = setup("volume:3", 8);
    assert_eq!(lambda_span(&s).unwrap().dim, 1);
    let (_, s) = setup("lambda:0.5", 8);
    assert_eq!(lambda_span(&s).unwrap().dim, 1);

    // complex lines of C², written as 2-vectors through their minors
    let mut g = rng(4);
    let family: Vec<Vec<f64>> = (0..60)
        .map(|_| {
            let f = complex_line(&random_unit(&mut g, 4));
            calibr::exterior::combinatorics::combinations(4, 2).iter().map(|idx| minor(idx, &f)).collect()
        })
        .collect();
    let oracle = rank(&family);
    assert_eq!(oracle, 4);
    let (_, s) = setup("kaehler:2,1", 40);
    assert_eq!(lambda_span(&s).unwrap().dim, oracle);
}

#[test]
fn membership_examples() {
    let (cal, s) = setup("kaehler:2,1", 24);
    let opts = MembershipOptions::default();
    let xi = ExteriorElement::basis(4, &[0, 1]).unwrap();
    let r = cone_membership(&xi, &cal, &s, &opts).unwrap();
    assert!(r.is_member());
    match r.certificate {
        Some(Certificate::Weights(w)) => {
            let total: f64 = w.iter().map(|a| a.weight).sum();
            assert_abs_diff_eq!(total, 1.0, epsilon = 1e-6);
        }
        other => panic!("{other:?}"),
    }

    let a = line(&[0.6, 0.0, 0.8, 0.0]).pvector();
    let b = line(&[0.0, 0.6, 0.0, -0.8]).pvector();
    let mid = (&a + &b).scale(0.5);
    let r = cone_membership(&mid, &cal, &s, &opts).unwrap();
    assert!(r.is_member());

    let (lam, s) = setup("lambda:0.5", 24);
    let xi = ExteriorElement::basis(4, &[2, 3]).unwrap();
    let r = cone_membership(&xi, &lam, &s, &opts).unwrap();
    assert_eq!(r.status, ConeStatus::Outside);
}

#[test]
fn mass_examples() {
    let none: Vec<SimplePlane> = Vec::new();
    let opts = MassOptions::default();
    let e12 = ExteriorElement::basis(4, &[0, 1]).unwrap();
    let r = mass_norm_estimate(&e12, &none, &opts).unwrap();
    assert_abs_diff_eq!(r.upper, 1.0, epsilon = 1e-8);
    assert_abs_diff_eq!(r.lower, 1.0, epsilon = 1e-8);

    let r = mass_norm_estimate(&e12.scale(-2.5), &none, &opts).unwrap();
    assert_abs_diff_eq!(r.upper, 2.5, epsilon = 1e-7);
    assert_abs_diff_eq!(r.lower, 2.5, epsilon = 1e-7);

    // ω itself is the dual certificate: ⟨ω, e₁₂ + e₃₄⟩ = 2 and comass(ω) = 1
    let w = ExteriorElement::from_terms(4, 2, vec![(vec![0, 1], 1.0), (vec![2, 3], 1.0)]).unwrap();
    let r = mass_norm_estimate(&w, &none, &opts).unwrap();
    assert!(r.upper <= 2.0 + 2e-6 && r.lower >= 2.0 - 2e-6, "{r:?}");
    let cert = r.dual_form.scale(1.0 / r.dual_comass).pairing(&w).unwrap();
    assert!(cert >= 2.0 - 1e-4 && cert <= r.upper + 1e-9, "{cert}");
}

#[test]
fn positivity_examples() {
    let (cal, s) = setup("kaehler:2,1", 24);
    let r = positivity_classify(&cal.form, &cal, &s, 1e-6).unwrap();
    assert_eq!(r.status, ConeStatus::Interior);
    assert_abs_diff_eq!(r.margin, 1.0, epsilon = 1e-9);

    let r = positivity_classify(&ExteriorElement::basis(4, &[2, 3]).unwrap(), &cal, &s, 1e-6).unwrap();
    assert_eq!(r.status, ConeStatus::Boundary);

    let r = positivity_classify(&ExteriorElement::basis(4, &[0, 1]).unwrap().scale(-1.0), &cal, &s, 1e-6).unwrap();
    assert_eq!(r.status, ConeStatus::Outside);
    assert_abs_diff_eq!(r.margin, -1.0, epsilon = 1e-9);
    let Some(Certificate::Witness(w)) = r.certificate else { panic!() };
    for v in w.vectors() {
        assert!(distance_to_span(&v, &[unit(4, 0), unit(4, 1)]) < 1e-4);
    }
}

#[test]
fn contraction_examples() {
    let (cal, s) = setup("kaehler:2,1", 24);
    let r = contraction_boundary(&unit(4, 0), &cal, &s, 1e-6).unwrap();
    assert!((&r.phi_e - &ExteriorElement::basis(4, &[2, 3]).unwrap()).norm() < 1e-14);
    assert_eq!(r.classification.status, ConeStatus::Boundary);
    assert!(r.consistent);

    let (lam, s) = setup("lambda:0.5", 24);
    let r = contraction_boundary(&unit(4, 2), &lam, &s, 1e-6).unwrap();
    assert!((&r.phi_e - &ExteriorElement::basis(4, &[0, 1]).unwrap()).norm() < 1e-14);
    assert_eq!(r.classification.status, ConeStatus::Interior);
    assert!(r.consistent);

    let (vol, s) = setup("volume:3", 4);
    let r = contraction_boundary(&unit(3, 0), &vol, &s, 1e-6).unwrap();
    assert!(r.phi_e.is_zero());
    assert_eq!(r.classification.status, ConeStatus::Boundary);
}

#[test]
fn lemma25_examples() {
    let (cal, s) = setup("kaehler:2,1", 24);
    let xi = ExteriorElement::basis(4, &[0, 1]).unwrap();
    let r = lemma_2_5_check(&xi, &cal, &s, &s.planes, 1e-6).unwrap();
    assert!(r.in_cone && r.in_hull && r.calibrated && r.agree);

    let a = line(&[0.6, 0.0, 0.8, 0.0]);
    let b = line(&[0.0, 0.6, 0.0, -0.8]);
    let mid = (&a.pvector() + &b.pvector()).scale(0.5);
    let r = lemma_2_5_check(&mid, &cal, &s, &[a, b], 1e-6).unwrap();
    assert!(r.in_cone && r.in_hull && r.calibrated && r.agree, "{r:?}");
    assert!(r.mass_upper - r.mass_lower < 1e-4);

    let (lam, s) = setup("lambda:0.5", 24);
    let xi = ExteriorElement::basis(4, &[2, 3]).unwrap();
    let r = lemma_2_5_check(&xi, &lam, &s, &s.planes, 1e-6).unwrap();
    assert!(!r.in_cone && !r.in_hull && !r.calibrated && r.agree);
    assert_abs_diff_eq!(r.phi_value, 0.5, epsilon = 1e-12);
}

#[test]
fn positive_basis_examples() {
    let (vol, s) = setup("volume:3", 4);
    let b = positive_basis(&vol, &s, 0.1, 1e-6).unwrap();
    assert_eq!(b.forms.len(), 1);

    let (cal, s) = setup("kaehler:2,1", 24);
    let b = positive_basis(&cal, &s, 0.1, 1e-6).unwrap();
    assert_eq!((b.forms.len(), b.rank), (6, 6));
    assert!(b.margins.iter().all(|&m| m > 1e-6));

    // on the single plane every member pairs to 1 + ε·[I = {1,2}]
    let (lam, s) = setup("lambda:0.5", 8);
    let b = positive_basis(&lam, &s, 0.1, 1e-6).unwrap();
    assert_eq!(b.forms.len(), 6);
    let plane = ExteriorElement::basis(4, &[0, 1]).unwrap();
    for f in &b.forms {
        assert!(f.pairing(&plane).unwrap() >= 1.0 - 1e-12);
    }
}

#[test]
fn calibrated_planes_are_exactly_the_cone_members() {
    let (cal, s) = setup("kaehler:2,1", 24);
    let opts = MembershipOptions::default();
    let mut g = rng(21);
    for k in 0..12 {
        let plane = if k % 2 == 0 {
            line(&random_unit(&mut g, 4))
        } else {
            SimplePlane::from_vectors(&random_frame(&mut g, 4, 2)).unwrap()
        };
        let xi = plane.pvector();
        let phi = cal.form.pairing(&xi).unwrap();
        let member = cone_membership(&xi, &cal, &s, &opts).unwrap().is_member();
        assert_eq!(member, (phi - 1.0).abs() <= 1e-6, "plane {k}: φ = {phi}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn classification_scales(c in 0.1f64..10.0, idx in 0usize..6) {
        let (cal, s) = setup("kaehler:2,1", 16);
        let pairs = calibr::exterior::combinatorics::combinations(4, 2);
        let alpha = &cal.form + &ExteriorElement::basis(4, &pairs[idx]).unwrap().scale(-0.7);
        let a = positivity_classify(&alpha, &cal, &s, 1e-6).unwrap();
        let b = positivity_classify(&alpha.scale(c), &cal, &s, 1e-6).unwrap();
        prop_assert_eq!(a.status, b.status);
        prop_assert!((b.margin - c * a.margin).abs() < 1e-8 * c.max(1.0));
    }

    #[test]
    fn interior_margin_bounds_cone_members(seed in 0u64..1000) {
        let (cal, s) = setup("kaehler:2,1", 16);
        let alpha = &cal.form + &ExteriorElement::basis(4, &[0, 2]).unwrap().scale(0.3);
        let class = positivity_classify(&alpha, &cal, &s, 1e-6).unwrap();
        prop_assert_eq!(class.status, ConeStatus::Interior);
        let mut g = rng(seed);
        let weights: Vec<f64> = (0..3).map(|_| g.random_range(0.0..1.0)).collect();
        let xi = (0..3).fold(ExteriorElement::zero(4, 2), |acc, k| &acc + &line(&random_unit(&mut g, 4)).pvector().scale(weights[k]));
        let r = cone_membership(&xi, &cal, &s, &MembershipOptions::default()).unwrap();
        let Some(Certificate::Weights(atoms)) = r.certificate else { panic!("member expected") };
        let total: f64 = atoms.iter().map(|a| a.weight).sum();
        prop_assert!(alpha.pairing(&xi).unwrap() >= class.margin * total - 1e-6);
    }

    #[test]
    fn mass_bracket_is_ordered(coeffs in prop::collection::vec(-1.0f64..1.0, 10)) {
        let xi = ExteriorElement::from_dense(5, 2, &coeffs);
        prop_assume!(!xi.is_zero() && xi.norm() > 1e-3);
        let gens = random_planes(5, 2, 8, 3);
        let r = mass_norm_estimate(&xi, &gens, &MassOptions::default()).unwrap();
        prop_assert!(r.lower <= r.upper + 1e-9);
        // Euclidean norm below, coordinate decomposition above
        prop_assert!(r.upper >= xi.norm() - 1e-9);
        prop_assert!(r.upper <= coeffs.iter().map(|c| c.abs()).sum::<f64>() + 1e-9);
    }
}
