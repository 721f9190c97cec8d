//! Optimization of constant forms over oriented Grassmannians.
//!
//! Every objective in this module is `β(v₁ ∧ … ∧ v_p)` for some constant
//! form `β` (penalized objectives fold the penalty into `β`). Frames are
//! orthonormal `n × p` matrices; a step is retracted by re-orthonormalizing.
//! A run is Armijo gradient ascent followed by a Newton polish in the
//! chart `Z ↦ orth(V + QZ)` with a finite-difference Hessian, which brings
//! the Riemannian gradient to roughly machine precision.

use std::io::Write;

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::Serialize;

use crate::calibrations::Calibration;
use crate::error::{Error, Result};
use crate::exterior::combinatorics::ContractionTable;
use crate::exterior::{ExteriorElement, SimplePlane};
use crate::linalg::{complement, gaussian_matrix, orthonormal_basis, stream_rng, RANK_CUTOFF};

pub const DEFAULT_SEED: u64 = 7;
pub const DEFAULT_DEDUP_ANGLE: f64 = 1e-3;

/// Dense evaluator for `β(v₁, …, v_p)` and its gradient in the frame.
#[derive(Clone, Debug)]
pub struct FormKernel {
    n: usize,
    p: usize,
    coeffs: Vec<f64>,
    scale: f64,
    // tables[j] contracts degree p - j to p - j - 1
    tables: Vec<ContractionTable>,
}

impl FormKernel {
    pub fn new(form: &ExteriorElement) -> Self {
        let (n, p) = (form.n(), form.p());
        let tables = (0..p).map(|j| ContractionTable::new(n, p - j)).collect();
        Self { n, p, coeffs: form.to_dense(), scale: form.norm().max(1e-300), tables }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn p(&self) -> usize {
        self.p
    }

    /// Contracts the stored form with the given columns in order, first slot first.
    fn contract_all(&self, v: &DMatrix<f64>, skip: Option<usize>) -> Vec<f64> {
        let mut cur = self.coeffs.clone();
        let mut level = 0;
        let mut out = Vec::new();
        for k in 0..self.p {
            if Some(k) == skip {
                continue;
            }
            let table = &self.tables[level];
            out.resize(crate::exterior::combinatorics::binomial(self.n, self.p - level - 1), 0.0);
            table.contract(v.column(k).as_slice(), &cur, &mut out);
            std::mem::swap(&mut cur, &mut out);
            level += 1;
        }
        cur
    }

    pub fn value(&self, v: &DMatrix<f64>) -> f64 {
        if self.p == 0 {
            return self.coeffs[0];
        }
        self.contract_all(v, None)[0]
    }

    /// Value and Euclidean gradient with respect to the frame entries.
    pub fn value_gradient(&self, v: &DMatrix<f64>) -> (f64, DMatrix<f64>) {
        let mut g = DMatrix::zeros(self.n, self.p);
        let mut value = 0.0;
        for k in 0..self.p {
            let one = self.contract_all(v, Some(k));
            // moving slot k to the end takes p - 1 - k transpositions
            let sign = if (self.p - 1 - k) % 2 == 0 { 1.0 } else { -1.0 };
            for i in 0..self.n {
                g[(i, k)] = sign * one[i];
            }
            if k == 0 {
                value = g.column(0).dot(&v.column(0));
            }
        }
        (value, g)
    }
}

/// Modified Gram-Schmidt, orientation preserving. Falls back to the input
/// when it is numerically singular (callers never produce that).
pub(crate) fn orthonormalize(m: &DMatrix<f64>) -> DMatrix<f64> {
    SimplePlane::from_matrix(m).map(|p| p.frame().clone()).unwrap_or_else(|_| m.clone())
}

#[derive(Clone, Copy, Debug)]
pub struct AscentOptions {
    pub max_iter: usize,
    /// Convergence threshold on the Riemannian gradient, relative to `‖β‖`.
    pub tol: f64,
    pub newton_iter: usize,
}

impl Default for AscentOptions {
    fn default() -> Self {
        Self { max_iter: 2000, tol: 1e-12, newton_iter: 40 }
    }
}

#[derive(Clone, Debug)]
pub struct AscentResult {
    pub frame: DMatrix<f64>,
    pub value: f64,
    pub grad_norm: f64,
    pub iterations: usize,
    pub converged: bool,
}

fn tangent(v: &DMatrix<f64>, g: &DMatrix<f64>) -> DMatrix<f64> {
    g - v * (v.transpose() * g)
}

/// Local maximization of `kernel` over the oriented Grassmannian from `start`.
pub fn ascend(kernel: &FormKernel, start: &DMatrix<f64>, opts: &AscentOptions) -> AscentResult {
    let (n, p) = (kernel.n, kernel.p);
    let mut v = orthonormalize(start);
    if p == n || p == 0 {
        // the oriented Grassmannian is two points (or one)
        if p > 0 && kernel.value(&v) < 0.0 {
            v.column_mut(0).neg_mut();
        }
        let value = kernel.value(&v);
        return AscentResult { frame: v, value, grad_norm: 0.0, iterations: 0, converged: true };
    }
    let tol = opts.tol * kernel.scale.max(1.0);
    let switch = 1e-5 * kernel.scale.max(1.0);
    let mut iterations = 0;
    let mut step: f64 = 1.0;
    let (mut f, mut g) = kernel.value_gradient(&v);
    let mut t = tangent(&v, &g);
    let mut gn = t.norm();
    while iterations < opts.max_iter && gn > switch {
        iterations += 1;
        step = (step * 2.0).min(1e3 / kernel.scale);
        let mut accepted = false;
        for _ in 0..60 {
            let cand = orthonormalize(&(&v + &t * step));
            let fc = kernel.value(&cand);
            if fc >= f + 1e-4 * step * gn * gn {
                v = cand;
                accepted = true;
                break;
            }
            step *= 0.5;
        }
        if !accepted {
            break;
        }
        (f, g) = kernel.value_gradient(&v);
        t = tangent(&v, &g);
        gn = t.norm();
    }
    for _ in 0..opts.newton_iter {
        if gn <= tol {
            break;
        }
        iterations += 1;
        match newton_step(kernel, &v, &g, f) {
            Some(next) => v = next,
            None => break,
        }
        (f, g) = kernel.value_gradient(&v);
        t = tangent(&v, &g);
        gn = t.norm();
    }
    AscentResult { frame: v, value: f, grad_norm: gn, iterations, converged: gn <= tol * 1e3 }
}

/// One safeguarded Newton step in the chart around `v`; `None` when no
/// improving step exists at working precision.
fn newton_step(kernel: &FormKernel, v: &DMatrix<f64>, g: &DMatrix<f64>, f0: f64) -> Option<DMatrix<f64>> {
    let (n, p) = (kernel.n, kernel.p);
    let q = complement(v);
    let m = n - p;
    let d = m * p;
    let chart = |z: &DVector<f64>| -> DMatrix<f64> {
        let zm = DMatrix::from_column_slice(m, p, z.as_slice());
        orthonormalize(&(v + &q * zm))
    };
    let h_of = |z: &DVector<f64>| kernel.value(&chart(z));
    let grad = DVector::from_column_slice((q.transpose() * g).as_slice());
    let h = 1e-4;
    let mut hess = DMatrix::zeros(d, d);
    let mut e = DVector::zeros(d);
    let mut plus = vec![0.0; d];
    let mut minus = vec![0.0; d];
    for i in 0..d {
        e[i] = h;
        plus[i] = h_of(&e);
        minus[i] = h_of(&(-&e));
        e[i] = 0.0;
        hess[(i, i)] = (plus[i] - 2.0 * f0 + minus[i]) / (h * h);
    }
    for i in 0..d {
        for j in (i + 1)..d {
            e[i] = h;
            e[j] = h;
            let fpp = h_of(&e);
            e[j] = -h;
            let fpm = h_of(&e);
            e[i] = -h;
            let fmm = h_of(&e);
            e[j] = h;
            let fmp = h_of(&e);
            e[i] = 0.0;
            e[j] = 0.0;
            let val = (fpp - fpm - fmp + fmm) / (4.0 * h * h);
            hess[(i, j)] = val;
            hess[(j, i)] = val;
        }
    }
    let eig = hess.symmetric_eigen();
    let lmax = eig.eigenvalues.iter().fold(0.0f64, |a, &b| a.max(b.abs()));
    let mu = (1e-8 * lmax).max(1e-12 * kernel.scale);
    let mut s = DVector::zeros(d);
    for i in 0..d {
        let u = eig.eigenvectors.column(i);
        let c = u.dot(&grad);
        let lam = eig.eigenvalues[i];
        let denom = if lam < -mu { -lam } else { mu.max(lam.abs()) };
        s.axpy(c / denom, &u, 1.0);
    }
    let radius = 0.5;
    let sn = s.norm();
    if sn > radius {
        s *= radius / sn;
    }
    for _ in 0..40 {
        let cand = chart(&s);
        if kernel.value(&cand) > f0 {
            return Some(cand);
        }
        s *= 0.5;
        if s.norm() < 1e-18 {
            break;
        }
    }
    None
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct ComassOptions {
    pub multistarts: usize,
    pub max_iter: usize,
    pub tol: f64,
    pub seed: u64,
}

impl Default for ComassOptions {
    fn default() -> Self {
        Self { multistarts: 64, max_iter: 2000, tol: 1e-12, seed: DEFAULT_SEED }
    }
}

impl ComassOptions {
    pub fn quick() -> Self {
        Self { multistarts: 16, ..Self::default() }
    }

    fn ascent(&self) -> AscentOptions {
        AscentOptions { max_iter: self.max_iter, tol: self.tol, ..Default::default() }
    }
}

#[derive(Clone, Debug)]
pub struct ComassReport {
    pub value: f64,
    pub maximizer: SimplePlane,
    /// Top starts agree within 1e-6.
    pub saturated: bool,
    /// At least one start reached the gradient tolerance.
    pub converged: bool,
    pub starts_converged: usize,
    pub start_values: Vec<f64>,
}

fn random_start(seed: u64, index: u64, n: usize, p: usize) -> DMatrix<f64> {
    let mut rng = stream_rng(seed, index);
    gaussian_matrix(&mut rng, n, p)
}

fn run_starts(kernel: &FormKernel, seed: u64, range: std::ops::Range<u64>, opts: &AscentOptions) -> Vec<AscentResult> {
    let (n, p) = (kernel.n, kernel.p);
    range
        .into_par_iter()
        .map(|k| ascend(kernel, &random_start(seed, k, n, p), opts))
        .collect()
}

/// Best value of `φ(ξ)` over multistart local ascent: a lower bound for the
/// comass, reported as the estimate.
pub fn comass(phi: &ExteriorElement, opts: &ComassOptions) -> Result<ComassReport> {
    if phi.p() == 0 {
        return Err(Error::InvalidParameter("comass needs degree at least 1".into()));
    }
    if phi.is_zero() {
        return Err(Error::ZeroElement);
    }
    if opts.multistarts == 0 {
        return Err(Error::InvalidParameter("multistarts must be positive".into()));
    }
    let kernel = FormKernel::new(phi);
    let runs = run_starts(&kernel, opts.seed, 0..opts.multistarts as u64, &opts.ascent());
    let mut best = 0;
    for (i, r) in runs.iter().enumerate() {
        if r.value > runs[best].value {
            best = i;
        }
    }
    let mut values: Vec<f64> = runs.iter().map(|r| r.value).collect();
    let mut sorted = values.clone();
    sorted.sort_by(|a, b| b.total_cmp(a));
    let k = sorted.len().min(5);
    let saturated = sorted[0] - sorted[k - 1] <= 1e-6 * sorted[0].abs().max(1.0);
    let starts_converged = runs.iter().filter(|r| r.converged).count();
    let maximizer = SimplePlane::from_matrix(&runs[best].frame)?;
    values.shrink_to_fit();
    Ok(ComassReport {
        value: runs[best].value,
        maximizer,
        saturated,
        converged: starts_converged > 0,
        starts_converged,
        start_values: values,
    })
}

/// Finite, deduplicated set of sampled planes with their `φ`-values.
#[derive(Clone, Debug)]
pub struct PlaneSampleSet {
    pub planes: Vec<SimplePlane>,
    pub values: Vec<f64>,
    pub tolerance: f64,
    pub seed: u64,
    pub multistart_count: usize,
    pub requested: usize,
    pub rejected: usize,
    pub dedup_angle: f64,
}

impl PlaneSampleSet {
    /// Builds a set from explicit planes, dropping those below the band and
    /// duplicates.
    pub fn from_planes(phi: &ExteriorElement, planes: Vec<SimplePlane>, tolerance: f64) -> Result<Self> {
        let mut set = Self::empty(tolerance, 0, DEFAULT_DEDUP_ANGLE);
        set.requested = planes.len();
        for plane in planes {
            let value = phi.pairing(&plane.pvector())?;
            if !set.offer(plane, value) {
                set.rejected += 1;
            }
        }
        Ok(set)
    }

    fn empty(tolerance: f64, seed: u64, dedup_angle: f64) -> Self {
        Self {
            planes: Vec::new(),
            values: Vec::new(),
            tolerance,
            seed,
            multistart_count: 0,
            requested: 0,
            rejected: 0,
            dedup_angle,
        }
    }

    /// Adds the plane if it is in the band and not a duplicate.
    fn offer(&mut self, plane: SimplePlane, value: f64) -> bool {
        if value < 1.0 - self.tolerance {
            return false;
        }
        if self.planes.iter().any(|q| q.oriented_distance(&plane) < self.dedup_angle) {
            return false;
        }
        self.planes.push(plane);
        self.values.push(value);
        true
    }

    pub fn len(&self) -> usize {
        self.planes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.planes.is_empty()
    }

    pub fn n(&self) -> usize {
        self.planes.first().map_or(0, |p| p.n())
    }

    pub fn p(&self) -> usize {
        self.planes.first().map_or(0, |p| p.p())
    }

    pub fn pvectors(&self) -> Vec<ExteriorElement> {
        self.planes.iter().map(|p| p.pvector()).collect()
    }

    /// One row per plane: frame entries column by column, then the value.
    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        let (n, p) = (self.n(), self.p());
        let mut header: Vec<String> = Vec::new();
        for k in 0..p {
            for i in 0..n {
                header.push(format!("v{}_{}", k + 1, i + 1));
            }
        }
        header.push("value".into());
        writeln!(w, "{}", header.join(","))?;
        for (plane, value) in self.planes.iter().zip(&self.values) {
            let mut row: Vec<String> = plane.frame().iter().map(|x| format!("{x:.16e}")).collect();
            row.push(format!("{value:.16e}"));
            writeln!(w, "{}", row.join(","))?;
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct SampleOptions {
    pub tol: f64,
    pub count: usize,
    pub seed: u64,
    pub dedup_angle: f64,
    /// Upper bound on ascent runs; `None` means `2·count + 16`.
    pub max_attempts: Option<usize>,
}

impl SampleOptions {
    pub fn new(count: usize, seed: u64) -> Self {
        Self { tol: 1e-6, count, seed, dedup_angle: DEFAULT_DEDUP_ANGLE, max_attempts: None }
    }
}

/// Accepted local maximizers of `φ` with `φ(ξ) ≥ 1 − tol`, deduplicated.
pub fn sample_grassmannian(cal: &Calibration, opts: &SampleOptions) -> Result<PlaneSampleSet> {
    cal.ensure_confirmed()?;
    let kernel = FormKernel::new(&cal.form);
    let budget = opts.max_attempts.unwrap_or(2 * opts.count + 16);
    let mut set = PlaneSampleSet::empty(opts.tol, opts.seed, opts.dedup_angle);
    set.requested = opts.count;
    let ascent = AscentOptions::default();
    let batch = opts.count.clamp(8, 64);
    let mut next = 0u64;
    while set.len() < opts.count && (next as usize) < budget {
        let end = (next + batch as u64).min(budget as u64);
        let runs = run_starts(&kernel, opts.seed, next..end, &ascent);
        next = end;
        for r in runs {
            set.multistart_count += 1;
            if r.value > 1.0 + 1e-6 {
                return Err(Error::ComassConfirmation { name: cal.name.clone(), value: r.value, claimed: 1.0 });
            }
            if set.len() >= opts.count {
                break;
            }
            let plane = SimplePlane::from_matrix(&r.frame)?;
            if !set.offer(plane, r.value) {
                set.rejected += 1;
            }
        }
    }
    Ok(set)
}

/// Uniformly random oriented planes (Gaussian frames), for dictionaries over
/// all of `G(p, n)`.
pub fn random_planes(n: usize, p: usize, count: usize, seed: u64) -> Vec<SimplePlane> {
    (0..count as u64)
        .map(|k| SimplePlane::from_matrix(&random_start(seed, k, n, p)).expect("gaussian frame has full rank"))
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Extremum {
    Min,
    Max,
}

#[derive(Clone, Debug)]
pub struct ExtremumReport {
    pub value: f64,
    pub witness: SimplePlane,
    /// `φ` at the witness.
    pub phi_value: f64,
    pub candidates_refined: usize,
}

#[derive(Clone, Copy, Debug)]
pub struct ExtremumOptions {
    /// Number of best-ranked samples refined by penalized local search.
    pub refine_top: usize,
    /// Refined planes must satisfy `φ ≥ 1 − feasibility_tol`.
    pub feasibility_tol: f64,
}

impl Default for ExtremumOptions {
    fn default() -> Self {
        Self { refine_top: 16, feasibility_tol: 1e-9 }
    }
}

/// Extremum of `α` over `G(φ)`, starting from the samples and refining the
/// most promising ones on `{φ = 1}` by an increasing penalty.
pub fn constrained_extremum(
    alpha: &ExteriorElement,
    cal: &Calibration,
    samples: &PlaneSampleSet,
    mode: Extremum,
    opts: &ExtremumOptions,
) -> Result<ExtremumReport> {
    if samples.is_empty() {
        return Err(Error::EmptySamples);
    }
    let phi = &cal.form;
    crate::error::check_dim(phi.n(), alpha.n())?;
    if alpha.p() != phi.p() {
        return Err(Error::DegreeMismatch { expected: phi.p(), got: alpha.p() });
    }
    let sign = match mode {
        Extremum::Min => -1.0,
        Extremum::Max => 1.0,
    };
    // maximize sign·α throughout
    let target = alpha.scale(sign);
    let raw: Vec<f64> = samples
        .planes
        .iter()
        .map(|pl| target.pairing(&pl.pvector()))
        .collect::<Result<_>>()?;
    let mut order: Vec<usize> = (0..raw.len()).collect();
    order.sort_by(|&a, &b| raw[b].total_cmp(&raw[a]).then(a.cmp(&b)));
    let chosen: Vec<usize> = order.iter().take(opts.refine_top.max(1)).copied().collect();

    let rho0 = 10.0 * alpha.norm().max(1.0);
    let stages: Vec<ExteriorElement> = (0..8)
        .map(|k| {
            let rho = rho0 * 10f64.powi(k);
            &target + &phi.scale(rho)
        })
        .collect();
    let kernels: Vec<FormKernel> = stages.iter().map(FormKernel::new).collect();
    let phi_kernel = FormKernel::new(phi);
    let target_kernel = FormKernel::new(&target);
    let ascent = AscentOptions { max_iter: 300, tol: 1e-13, newton_iter: 25 };
    let refined: Vec<Option<(f64, DMatrix<f64>, f64)>> = chosen
        .par_iter()
        .map(|&i| {
            let mut v = samples.planes[i].frame().clone();
            for k in &kernels {
                v = ascend(k, &v, &ascent).frame;
            }
            // polish back onto {φ = 1}
            let polished = ascend(&phi_kernel, &v, &AscentOptions::default());
            let phi_val = polished.value;
            if phi_val < 1.0 - opts.feasibility_tol {
                return None;
            }
            Some((target_kernel.value(&polished.frame), polished.frame, phi_val))
        })
        .collect();

    let mut best_val = raw[order[0]];
    let mut best_plane = samples.planes[order[0]].clone();
    let mut best_phi = samples.values[order[0]];
    for (val, frame, phi_val) in refined.into_iter().flatten() {
        if val > best_val {
            best_val = val;
            best_plane = SimplePlane::from_matrix(&frame)?;
            best_phi = phi_val;
        }
    }
    Ok(ExtremumReport {
        value: sign * best_val,
        witness: best_plane,
        phi_value: best_phi,
        candidates_refined: chosen.len(),
    })
}

#[derive(Clone, Debug)]
pub struct Reduction {
    /// Orthonormal basis of `W`, one column per vector.
    pub w: DMatrix<f64>,
    /// `φ` restricted to `W`, written on `R^n` as the pullback by the
    /// orthogonal projection onto `W`.
    pub psi: ExteriorElement,
    pub elliptic: bool,
    pub witness: Option<Vec<f64>>,
}

/// `W` is the span of all sampled planes; `φ` is elliptic iff `W = R^n`.
pub fn reduce_calibration(cal: &Calibration, samples: &PlaneSampleSet) -> Result<Reduction> {
    if samples.is_empty() {
        return Err(Error::EmptySamples);
    }
    let n = cal.form.n();
    let p = samples.p();
    let mut stack = DMatrix::zeros(n, p * samples.len());
    for (k, plane) in samples.planes.iter().enumerate() {
        stack.view_mut((0, k * p), (n, p)).copy_from(plane.frame());
    }
    let w = orthonormal_basis(&stack, RANK_CUTOFF);
    let proj = &w * w.transpose();
    let psi = cal.form.pullback(&proj)?;
    let elliptic = w.ncols() == n;
    let witness = if elliptic {
        None
    } else {
        let comp = complement(&w);
        Some(comp.column(0).iter().copied().collect())
    };
    Ok(Reduction { w, psi, elliptic, witness })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn omega4() -> ExteriorElement {
        ExteriorElement::from_terms(4, 2, vec![(vec![0, 1], 1.0), (vec![2, 3], 1.0)]).unwrap()
    }

    #[test]
    fn kernel_matches_evaluate_and_fd_gradient() {
        let phi = ExteriorElement::from_terms(
            5,
            3,
            vec![(vec![0, 1, 2], 1.0), (vec![0, 3, 4], -0.5), (vec![1, 2, 4], 0.25)],
        )
        .unwrap();
        let k = FormKernel::new(&phi);
        let mut rng = stream_rng(3, 0);
        let v = gaussian_matrix(&mut rng, 5, 3);
        let cols: Vec<Vec<f64>> = (0..3).map(|j| v.column(j).iter().copied().collect()).collect();
        let refs: Vec<&[f64]> = cols.iter().map(|c| c.as_slice()).collect();
        let direct = phi.evaluate(&refs).unwrap();
        let (val, g) = k.value_gradient(&v);
        assert!((val - direct).abs() < 1e-12);
        assert!((k.value(&v) - direct).abs() < 1e-12);
        let h = 1e-6;
        for i in 0..5 {
            for j in 0..3 {
                let mut vp = v.clone();
                vp[(i, j)] += h;
                let mut vm = v.clone();
                vm[(i, j)] -= h;
                let fd = (k.value(&vp) - k.value(&vm)) / (2.0 * h);
                assert!((fd - g[(i, j)]).abs() < 1e-7, "{i},{j}: {fd} vs {}", g[(i, j)]);
            }
        }
    }

    #[test]
    fn comass_of_simple_and_kaehler() {
        let e12 = ExteriorElement::basis(4, &[0, 1]).unwrap();
        let r = comass(&e12, &ComassOptions::quick()).unwrap();
        assert!((r.value - 1.0).abs() < 1e-10);
        assert!(r.saturated && r.converged);
        let q = SimplePlane::coordinate(4, &[0, 1]);
        assert!(r.maximizer.oriented_distance(&q) < 1e-6);

        let r = comass(&omega4(), &ComassOptions::quick()).unwrap();
        assert!((r.value - 1.0).abs() < 1e-10);
        let r = comass(&omega4().scale(-2.5), &ComassOptions::quick()).unwrap();
        assert!((r.value - 2.5).abs() < 1e-9);
    }

    #[test]
    fn comass_is_deterministic() {
        let a = comass(&omega4(), &ComassOptions::quick()).unwrap();
        let b = comass(&omega4(), &ComassOptions::quick()).unwrap();
        assert_eq!(a.value.to_bits(), b.value.to_bits());
        assert_eq!(a.maximizer, b.maximizer);
    }

    #[test]
    fn ascent_reaches_tight_gradient() {
        let k = FormKernel::new(&omega4());
        let mut rng = stream_rng(11, 0);
        let r = ascend(&k, &gaussian_matrix(&mut rng, 4, 2), &AscentOptions::default());
        assert!(r.converged);
        assert!(r.grad_norm < 1e-11);
        assert!((r.value - 1.0).abs() < 1e-14);
    }

    #[test]
    fn volume_form_orientation_flip() {
        let vol = ExteriorElement::volume(3);
        let r = comass(&vol, &ComassOptions::quick()).unwrap();
        assert!((r.value - 1.0).abs() < 1e-12);
    }
}
