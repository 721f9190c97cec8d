mod common;

use approx::assert_abs_diff_eq;
use calibr::calibrations::build;
use calibr::duality::{
    assemble_boundary_model, boundary_alternative, jensen_alternative, lambda_sweep, min_mass,
    random_boundary_instance, random_boundary_instances, random_jensen_instances, support_check, AtomSpec,
    BoundaryData, BoundaryFunctional, Dual, FiniteDualityModel, Primal,
};
use calibr::grassmann::{sample_grassmannian, PlaneSampleSet, SampleOptions};
use calibr::polynomial::Polynomial;
use calibr::{Calibration, Error};

use common::*;

fn setup(sel: &str, count: usize) -> (Calibration, PlaneSampleSet) {
    let cal = Calibration::from_selector(sel).unwrap();
    let s = sample_grassmannian(&cal, &SampleOptions::new(count, 3)).unwrap();
    (cal, s)
}

fn atom(point: &[f64], plane: &[usize], weight: f64) -> AtomSpec {
    let n = point.len();
    AtomSpec { point: point.to_vec(), plane: plane.iter().map(|&i| unit(n, i)).collect(), weight }
}

fn eval_poly(f: &Polynomial, x: &[f64]) -> f64 {
    f.terms().map(|(e, c)| c * x.iter().zip(e).map(|(xi, &k)| xi.powi(k as i32)).product::<f64>()).sum()
}

/// `g = Σ c_r f_r`, evaluated term by term.
fn combination<'a>(family: &'a [Polynomial], c: &[f64]) -> impl Fn(&[f64]) -> f64 + 'a {
    let c = c.to_vec();
    move |x| family.iter().zip(&c).map(|(f, ci)| ci * eval_poly(f, x)).sum()
}

/// `dβ(x)(u, v)` for a 1-form `β = Σ b_i dx_i` given as coefficient functions,
/// by central differences of `β(u)` and `β(v)`.
fn d_one_form(b: &dyn Fn(&[f64]) -> Vec<f64>, x: &[f64], u: &[f64], v: &[f64]) -> f64 {
    let h = 1e-4;
    let shift = |w: &[f64], s: f64| -> Vec<f64> { x.iter().zip(w).map(|(a, c)| a + s * c).collect() };
    let along = |w: &[f64], dir: &[f64]| (dot(&b(&shift(w, h)), dir) - dot(&b(&shift(w, -h)), dir)) / (2.0 * h);
    along(u, v) - along(v, u)
}

fn one_form_coefficients(model: &FiniteDualityModel, c: &[f64]) -> impl Fn(&[f64]) -> Vec<f64> {
    let family = model.form_family().unwrap();
    let n = model.n();
    let c = c.to_vec();
    move |x| {
        let mut out = vec![0.0; n];
        for (beta, ck) in family.iter().zip(&c) {
            for (idx, q) in beta.terms() {
                out[idx[0]] += ck * eval_poly(q, x);
            }
        }
        out
    }
}

fn is_feasible(p: &Primal) -> bool {
    matches!(p, Primal::Feasible { .. })
}

#[test]
fn zero_boundary_is_feasible_with_no_weight() {
    let (cal, s) = setup("omega4", 8);
    let m = FiniteDualityModel::new(&cal, vec![vec![0.0; 4], vec![0.3, 0.0, 0.1, 0.0]], &s, 2).unwrap();
    let data = assemble_boundary_model(&m, &BoundaryFunctional::default()).unwrap();
    let r = boundary_alternative(&m, &data, None).unwrap();
    let Primal::Feasible { weights } = r.primal else { panic!("{r:?}") };
    assert!(weights.iter().all(|&w| w.abs() < 1e-12));
    assert!(r.consistent && !r.tie);
    assert_eq!(min_mass(&data).unwrap(), Some(0.0));
}

#[test]
fn assembled_rows_match_finite_differences() {
    let (cal, s) = setup("omega4", 4);
    let x = vec![0.4, -0.2, 0.1, 0.3];
    let m = FiniteDualityModel::new(&cal, vec![x.clone(), vec![0.0; 4]], &s, 2).unwrap();
    let functional = BoundaryFunctional { atoms: vec![atom(&x, &[0, 1], 1.5)] };
    let data = assemble_boundary_model(&m, &functional).unwrap();
    let family_len = m.form_family().unwrap().len();
    for k in 0..family_len {
        let mut e = vec![0.0; family_len];
        e[k] = 1.0;
        let b = one_form_coefficients(&m, &e);
        let want = 1.5 * d_one_form(&b, &x, &unit(4, 0), &unit(4, 1));
        assert!((data.rhs[k] - want).abs() < 1e-6 * (1.0 + want.abs()), "row {k}: {} vs {want}", data.rhs[k]);
    }
    let r = boundary_alternative(&m, &data, None).unwrap();
    let Primal::Feasible { weights } = &r.primal else { panic!("{r:?}") };
    assert!(weights.iter().all(|&w| w >= -1e-12));
    let fit = &data.rows * nalgebra::DVector::from_column_slice(weights) - &data.rhs;
    assert!(fit.amax() < 1e-7);
    assert!(matches!(r.dual, Dual::None));
}

/// Checks a boundary certificate `(β, t)`: `dβ + t ≥ 0` on every atom and
/// `S(β) + λt` equal to the reported negative margin.
fn verify_boundary_certificate(m: &FiniteDualityModel, data: &BoundaryData, functional: &BoundaryFunctional, lambda: Option<f64>, coefficients: &[f64], margin: f64) {
    let family_len = m.form_family().unwrap().len();
    let (c, t) = coefficients.split_at(family_len);
    let t = t.first().copied().unwrap_or(0.0);
    let b = one_form_coefficients(m, c);
    for site in &m.sites {
        for plane in &m.dictionary {
            let f = plane.vectors();
            assert!(d_one_form(&b, site, &f[0], &f[1]) + t >= -1e-6);
        }
    }
    let s_beta: f64 =
        functional.atoms.iter().map(|a| a.weight * d_one_form(&b, &a.point, &a.plane[0], &a.plane[1])).sum();
    let scale = data.rhs.amax().max(1.0);
    let value = s_beta + lambda.unwrap_or(0.0) * t;
    assert!((value + margin * scale).abs() < 1e-5, "{value} vs {}", -margin * scale);
}

#[test]
fn negated_lambda_atom_has_a_certificate() {
    let (cal, s) = setup("lambda:0.5", 4);
    let x = vec![0.2, 0.1, -0.3, 0.4];
    let m = FiniteDualityModel::new(&cal, vec![x.clone(), vec![0.0; 4]], &s, 2).unwrap();
    let functional = BoundaryFunctional { atoms: vec![atom(&x, &[0, 1], -1.0)] };
    let data = assemble_boundary_model(&m, &functional).unwrap();
    let r = boundary_alternative(&m, &data, None).unwrap();
    assert!(r.consistent && !is_feasible(&r.primal), "{r:?}");
    let Dual::Certificate { coefficients, margin } = &r.dual else { panic!("{r:?}") };
    assert!(*margin >= 1e-6);
    verify_boundary_certificate(&m, &data, &functional, None, coefficients, *margin);
}

#[test]
fn mass_bound_below_the_atom_gives_a_certificate() {
    let (cal, s) = setup("omega4", 6);
    let x = vec![0.5, 0.0, 0.0, 0.0];
    let m = FiniteDualityModel::new(&cal, vec![vec![0.0; 4], x.clone()], &s, 2).unwrap();
    let functional = BoundaryFunctional { atoms: vec![atom(&x, &[0, 1], 1.0)] };
    let data = assemble_boundary_model(&m, &functional).unwrap();
    let r = boundary_alternative(&m, &data, Some(1.5)).unwrap();
    assert!(r.consistent && is_feasible(&r.primal));
    let r = boundary_alternative(&m, &data, Some(0.5)).unwrap();
    assert!(r.consistent && !is_feasible(&r.primal), "{r:?}");
    let Dual::Certificate { coefficients, margin } = &r.dual else { panic!("{r:?}") };
    verify_boundary_certificate(&m, &data, &functional, Some(0.5), coefficients, *margin);
}

#[test]
fn feasibility_is_monotone_in_the_mass_bound() {
    let (cal, s) = setup("omega4", 6);
    for index in 0..4 {
        let (m, data) = random_boundary_instance(&cal, &s, 11, index, 2, 3, false).unwrap();
        let lambdas = [0.05, 0.2, 0.5, 1.0, 2.0, 4.0, 8.0];
        let sweep = lambda_sweep(&m, &data, &lambdas).unwrap();
        assert!(sweep.monotone, "{sweep:?}");
        assert!(sweep.threshold_matches, "{sweep:?}");
        let mm = sweep.min_mass.unwrap();
        for (l, f) in lambdas.iter().zip(&sweep.feasible) {
            if (l - mm).abs() > 1e-6 {
                assert_eq!(*f, *l > mm, "λ = {l}, min mass {mm}");
            }
        }
    }
}

#[test]
fn random_boundary_instances_are_consistent() {
    let (cal, s) = setup("omega4", 8);
    let out = random_boundary_instances(&cal, &s, 30, 7, 2, 3).unwrap();
    assert_eq!(out.len(), 30);
    assert!(out.iter().all(|o| o.consistent || o.tie));
    assert!(out.iter().any(|o| o.feasible) && out.iter().any(|o| o.certificate));
}

fn square_model(degree: u32) -> (FiniteDualityModel, Vec<usize>) {
    let (cal, s) = setup("omega4", 8);
    let mut sites: Vec<Vec<f64>> =
        [(1.0, 1.0), (-1.0, 1.0), (-1.0, -1.0), (1.0, -1.0)].iter().map(|&(a, b)| vec![a, b, 0.0, 0.0]).collect();
    sites.push(vec![0.0; 4]);
    (FiniteDualityModel::new(&cal, sites, &s, degree).unwrap(), vec![0, 1, 2, 3])
}

#[test]
fn square_centre_has_a_jensen_measure() {
    let (m, k) = square_model(2);
    let r = jensen_alternative(&m, &k, 4).unwrap();
    assert!(r.consistent && is_feasible(&r.primal), "{r:?}");
    let mu = r.mu.clone().unwrap();
    assert_abs_diff_eq!(mu.iter().sum::<f64>(), 1.0, epsilon = 1e-9);
    assert!(mu.iter().all(|&w| w >= -1e-12));
    // linear functions are pluriharmonic, so μ has barycentre x
    for i in 0..4 {
        let bary: f64 = k.iter().zip(&mu).map(|(&j, w)| w * m.sites[j][i]).sum();
        assert_abs_diff_eq!(bary, 0.0, epsilon = 1e-7);
    }
    // so does Re z₁² = x₁² − y₁², which separates the two diagonals
    let re: f64 = k.iter().zip(&mu).map(|(&j, w)| w * (m.sites[j][0].powi(2) - m.sites[j][1].powi(2))).sum();
    assert_abs_diff_eq!(re, 0.0, epsilon = 1e-7);
    assert!(support_check(&m, &k, &r, 1e-6).unwrap().holds);
}

/// Checks a Jensen certificate `g`: nonnegative traces on the atoms and
/// `g(x) − max_K g` equal to the reported margin.
fn verify_jensen_certificate(m: &FiniteDualityModel, k: &[usize], x: usize, coefficients: &[f64], margin: f64) {
    let family = m.scalar_family().unwrap();
    let g = combination(&family, coefficients);
    for site in &m.sites {
        for plane in &m.dictionary {
            assert!(frame_laplacian(&g, site, &plane.vectors(), 1e-3) >= -1e-5);
        }
    }
    let max_k = k.iter().map(|&j| g(&m.sites[j])).fold(f64::NEG_INFINITY, f64::max);
    let scale = family.iter().map(|f| eval_poly(f, &m.sites[x]).abs()).fold(1.0, f64::max);
    assert!((g(&m.sites[x]) - max_k - margin * scale).abs() < 1e-7, "{} vs {}", g(&m.sites[x]) - max_k, margin * scale);
}

#[test]
fn far_point_is_separated() {
    let (cal, s) = setup("special_lagrangian:3", 6);
    let mut sites: Vec<Vec<f64>> = (0..3).map(|i| unit(6, i)).collect();
    sites.push(vec![3.0, 3.0, 3.0, 0.0, 0.0, 0.0]);
    let m = FiniteDualityModel::new(&cal, sites, &s, 1).unwrap();
    let r = jensen_alternative(&m, &[0, 1, 2], 3).unwrap();
    assert!(r.consistent && !is_feasible(&r.primal));
    let Dual::Certificate { coefficients, margin } = &r.dual else { panic!("{r:?}") };
    verify_jensen_certificate(&m, &[0, 1, 2], 3, coefficients, *margin);
}

#[test]
fn singleton_k_is_separated() {
    let (m, _) = square_model(1);
    let r = jensen_alternative(&m, &[0], 4).unwrap();
    assert!(r.consistent && !is_feasible(&r.primal));
    let Dual::Certificate { coefficients, margin } = &r.dual else { panic!("{r:?}") };
    verify_jensen_certificate(&m, &[0], 4, coefficients, *margin);
}

#[test]
fn jensen_input_errors() {
    let (m, _) = square_model(1);
    assert!(matches!(jensen_alternative(&m, &[], 4), Err(Error::InvalidModel(_))));
    assert!(matches!(jensen_alternative(&m, &[0, 9], 4), Err(Error::InvalidModel(_))));
    let (cal, s) = setup("omega4", 4);
    assert!(FiniteDualityModel::new(&cal, vec![], &s, 1).is_err());
    let bad = vec![calibr::SimplePlane::coordinate(4, &[0, 2])];
    assert!(FiniteDualityModel::with_dictionary(&cal, vec![vec![0.0; 4]], bad, 1).is_err());
}

#[test]
fn larger_families_shrink_the_feasible_set() {
    let (cal, s) = setup("omega4", 8);
    let mut g = rng(17);
    let line = complex_line(&random_unit(&mut g, 4));
    let mut checked = 0;
    for _ in 0..12 {
        let mut sites: Vec<Vec<f64>> = (0..4)
            .map(|_| {
                let (a, b) = (gaussian_vector(&mut g, 1)[0], gaussian_vector(&mut g, 1)[0]);
                (0..4).map(|i| a * line[0][i] + b * line[1][i]).collect()
            })
            .collect();
        let off = gaussian_vector(&mut g, 4);
        sites.push(off.iter().map(|v| 0.5 * v).collect());
        let feasible: Vec<Option<bool>> = (1..=3)
            .map(|d| {
                let m = FiniteDualityModel::new(&cal, sites.clone(), &s, d).unwrap();
                let r = jensen_alternative(&m, &[0, 1, 2, 3], 4).unwrap();
                (!r.tie).then_some(is_feasible(&r.primal))
            })
            .collect();
        for w in feasible.windows(2) {
            if let (Some(small), Some(large)) = (w[0], w[1]) {
                assert!(!large || small, "{feasible:?}");
                checked += 1;
            }
        }
    }
    assert!(checked > 0);
}

#[test]
fn random_jensen_instances_are_consistent() {
    let cal = Calibration::from_selector("omega4").unwrap();
    let s = sample_grassmannian(&cal, &SampleOptions::new(12, 7)).unwrap();
    let out = random_jensen_instances(&cal, &s, 20, 7, 2, 8).unwrap();
    assert!(out.iter().all(|o| o.consistent || o.tie));
    assert!(out.iter().any(|o| o.feasible) && out.iter().any(|o| o.certificate), "{out:?}");
    let lam = build("lambda", &[0.5]).unwrap();
    let ls = sample_grassmannian(&lam, &SampleOptions::new(4, 3)).unwrap();
    let out = random_jensen_instances(&lam, &ls, 10, 7, 2, 3).unwrap();
    assert!(out.iter().all(|o| o.consistent || o.tie));
}
