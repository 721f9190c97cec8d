//! Second-order operators of a scalar field against a constant calibration:
//! `d^φ f = ∇f ⌟ φ`, `H^φ f = λ_φ(Hess f)`, and the tests built on them.

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::Serialize;

use crate::calibrations::Calibration;
use crate::cones::LambdaSpan;
use crate::error::{check_dim, Error, Result};
use crate::exterior::combinatorics::combinations;
use crate::exterior::{ExteriorElement, SimplePlane};
use crate::grassmann::{
    ascend, comass, constrained_extremum, AscentOptions, ComassOptions, Extremum, ExtremumOptions, FormKernel,
    PlaneSampleSet,
};
use crate::linalg::{
    complement, gaussian_matrix, least_squares, orthonormal_basis, stream_rng, subspace_mismatch, unit_vector,
    RANK_CUTOFF,
};
use crate::polynomial::{Polynomial, PolynomialSpec};

/// Default central-difference step, relative to the coordinate scale.
pub const FD_STEP: f64 = 1e-4;

/// Outer functions for compositions `χ ∘ f`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Outer {
    Exp,
    /// `t³ + t`
    CubicPlusLinear,
}

impl Outer {
    /// `(χ, χ', χ'')` at `t`.
    fn jet(self, t: f64) -> (f64, f64, f64) {
        match self {
            Outer::Exp => {
                let e = t.exp();
                (e, e, e)
            }
            Outer::CubicPlusLinear => (t * t * t + t, 3.0 * t * t + 1.0, 6.0 * t),
        }
    }
}

type FieldFn = Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>;

#[derive(Clone)]
enum Supplier {
    Poly(Polynomial),
    Composed(Outer, Box<ScalarField>),
    /// Values only; derivatives by central differences.
    Values(FieldFn),
}

/// A smooth function on `R^n` with gradient and Hessian suppliers.
#[derive(Clone)]
pub struct ScalarField {
    pub name: String,
    n: usize,
    supplier: Supplier,
    pub fd_step: f64,
}

impl std::fmt::Debug for ScalarField {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "ScalarField({}, n = {})", self.name, self.n)
    }
}

impl ScalarField {
    pub fn polynomial(name: &str, p: Polynomial) -> Self {
        Self { name: name.to_string(), n: p.n(), supplier: Supplier::Poly(p), fd_step: FD_STEP }
    }

    pub fn from_fn<F>(name: &str, n: usize, f: F) -> Self
    where
        F: Fn(&[f64]) -> f64 + Send + Sync + 'static,
    {
        Self { name: name.to_string(), n, supplier: Supplier::Values(Arc::new(f)), fd_step: FD_STEP }
    }

    pub fn compose(outer: Outer, inner: ScalarField) -> Self {
        let label = match outer {
            Outer::Exp => "exp",
            Outer::CubicPlusLinear => "cubic",
        };
        Self {
            name: format!("{label}({})", inner.name),
            n: inner.n,
            supplier: Supplier::Composed(outer, Box::new(inner)),
            fd_step: FD_STEP,
        }
    }

    pub fn from_spec(name: &str, spec: &PolynomialSpec) -> Result<Self> {
        Ok(Self::polynomial(name, Polynomial::from_spec(spec)?))
    }

    /// `f = ½ xᵀAx + bᵀx` with Gaussian `A` (symmetrized) and `b`.
    pub fn random_quadratic(n: usize, seed: u64, index: u64) -> Self {
        let mut rng = stream_rng(seed, index);
        let a = gaussian_matrix(&mut rng, n, n);
        let b = gaussian_matrix(&mut rng, n, 1);
        let mut p = Polynomial::zero(n);
        for i in 0..n {
            for j in i..n {
                let s = 0.5 * (a[(i, j)] + a[(j, i)]);
                let mut e = vec![0; n];
                e[i] += 1;
                e[j] += 1;
                let c = if i == j { 0.5 * s } else { s };
                p = p.add(&Polynomial::monomial(e, c));
            }
            p = p.add(&Polynomial::variable(n, i).scale(b[(i, 0)]));
        }
        Self::polynomial(&format!("quadratic[{seed}:{index}]"), p)
    }

    /// Named fields; complex coordinates are interleaved `(x₁, y₁, x₂, …)`.
    pub fn builtin(name: &str, n: usize) -> Result<Self> {
        let sq = |i: usize| Polynomial::monomial(unit_exp(n, i, 2), 1.0);
        let need = |k: usize| -> Result<()> {
            if n < k {
                return Err(Error::InvalidField(format!("`{name}` needs dimension ≥ {k}, got {n}")));
            }
            Ok(())
        };
        let normsq = (0..n).fold(Polynomial::zero(n), |acc, i| acc.add(&sq(i)));
        let p = match name {
            "normsq" => normsq,
            "halfnormsq" => normsq.scale(0.5),
            "negnormsq" => normsq.scale(-1.0),
            "z1sq" | "absz1sq" => {
                need(2)?;
                sq(0).add(&sq(1))
            }
            "rez1" => {
                need(2)?;
                Polynomial::variable(n, 0)
            }
            "rez1sq" => {
                need(2)?;
                sq(0).add(&sq(1).scale(-1.0))
            }
            "negx3sq" => {
                need(3)?;
                sq(2).scale(-1.0)
            }
            "zero" => Polynomial::zero(n),
            "one" => Polynomial::constant(n, 1.0),
            _ => {
                if let Some(k) = name.strip_prefix('x').and_then(|s| s.parse::<usize>().ok()) {
                    if k == 0 || k > n {
                        return Err(Error::InvalidField(format!("coordinate x{k} out of range for n = {n}")));
                    }
                    Polynomial::variable(n, k - 1)
                } else {
                    return Err(Error::InvalidField(format!("unknown builtin field `{name}`")));
                }
            }
        };
        Ok(Self::polynomial(name, p))
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn as_polynomial(&self) -> Option<&Polynomial> {
        match &self.supplier {
            Supplier::Poly(p) => Some(p),
            _ => None,
        }
    }

    pub fn has_analytic_derivatives(&self) -> bool {
        match &self.supplier {
            Supplier::Poly(_) => true,
            Supplier::Composed(_, inner) => inner.has_analytic_derivatives(),
            Supplier::Values(_) => false,
        }
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        match &self.supplier {
            Supplier::Poly(p) => p.eval(x),
            Supplier::Composed(o, inner) => o.jet(inner.eval(x)).0,
            Supplier::Values(f) => f(x),
        }
    }

    pub fn gradient(&self, x: &[f64]) -> DVector<f64> {
        match &self.supplier {
            Supplier::Poly(p) => p.gradient(x),
            Supplier::Composed(o, inner) => inner.gradient(x) * o.jet(inner.eval(x)).1,
            Supplier::Values(_) => self.fd_gradient(x),
        }
    }

    pub fn hessian(&self, x: &[f64]) -> DMatrix<f64> {
        match &self.supplier {
            Supplier::Poly(p) => p.hessian(x),
            Supplier::Composed(o, inner) => {
                let (_, d1, d2) = o.jet(inner.eval(x));
                let g = inner.gradient(x);
                inner.hessian(x) * d1 + &g * g.transpose() * d2
            }
            Supplier::Values(_) => self.fd_hessian(x),
        }
    }

    fn step(&self, x: &[f64]) -> f64 {
        self.fd_step * x.iter().fold(1.0f64, |a, b| a.max(b.abs()))
    }

    pub fn fd_gradient(&self, x: &[f64]) -> DVector<f64> {
        let h = self.step(x);
        let mut y = x.to_vec();
        DVector::from_fn(self.n, |i, _| {
            y[i] = x[i] + h;
            let fp = self.eval(&y);
            y[i] = x[i] - h;
            let fm = self.eval(&y);
            y[i] = x[i];
            (fp - fm) / (2.0 * h)
        })
    }

    pub fn fd_hessian(&self, x: &[f64]) -> DMatrix<f64> {
        let h = self.step(x);
        let n = self.n;
        let f0 = self.eval(x);
        let mut y = x.to_vec();
        let mut m = DMatrix::zeros(n, n);
        for i in 0..n {
            y[i] = x[i] + h;
            let fp = self.eval(&y);
            y[i] = x[i] - h;
            let fm = self.eval(&y);
            y[i] = x[i];
            m[(i, i)] = (fp - 2.0 * f0 + fm) / (h * h);
            for j in (i + 1)..n {
                let mut corner = |si: f64, sj: f64| {
                    y[i] = x[i] + si * h;
                    y[j] = x[j] + sj * h;
                    let v = self.eval(&y);
                    y[i] = x[i];
                    y[j] = x[j];
                    v
                };
                let v = (corner(1.0, 1.0) - corner(1.0, -1.0) - corner(-1.0, 1.0) + corner(-1.0, -1.0)) / (4.0 * h * h);
                m[(i, j)] = v;
                m[(j, i)] = v;
            }
        }
        m
    }

    /// Largest disagreement between analytic and finite-difference
    /// derivatives over the probes, relative to `1 + |analytic|`.
    pub fn validate(&self, probes: &[Vec<f64>]) -> Result<f64> {
        let mut worst = 0.0f64;
        if !self.has_analytic_derivatives() {
            return Ok(0.0);
        }
        for x in probes {
            check_dim(self.n, x.len())?;
            let g = self.gradient(x);
            let gf = self.fd_gradient(x);
            worst = worst.max((&g - &gf).amax() / (1.0 + g.amax()));
            let h = self.hessian(x);
            let hf = self.fd_hessian(x);
            worst = worst.max((&h - &hf).amax() / (1.0 + h.amax()));
        }
        if worst > 1e-5 {
            return Err(Error::InvalidField(format!(
                "analytic and finite-difference derivatives of {} differ by {worst:.3e}",
                self.name
            )));
        }
        Ok(worst)
    }
}

fn unit_exp(n: usize, i: usize, k: u32) -> Vec<u32> {
    let mut e = vec![0; n];
    e[i] = k;
    e
}

/// `d^φ f (x) = ∇f(x) ⌟ φ`.
pub fn d_phi(f: &ScalarField, x: &[f64], phi: &ExteriorElement) -> Result<ExteriorElement> {
    check_dim(phi.n(), f.n())?;
    check_dim(f.n(), x.len())?;
    phi.interior(f.gradient(x).as_slice())
}

/// `H^φ f (x) = λ_φ(Hess f(x))`.
pub fn hessian_form(f: &ScalarField, x: &[f64], phi: &ExteriorElement) -> Result<ExteriorElement> {
    check_dim(phi.n(), f.n())?;
    check_dim(f.n(), x.len())?;
    phi.derivation_extend(&f.hessian(x))
}

/// Distance between `H^φ f(x)` and a central-difference exterior derivative
/// of `y ↦ d^φ f(y)` at `x`.
pub fn factorization_gap(f: &ScalarField, x: &[f64], phi: &ExteriorElement) -> Result<f64> {
    let h_form = hessian_form(f, x, phi)?;
    let n = f.n();
    let step = f.step(x);
    let mut dd = ExteriorElement::zero(n, phi.p());
    let mut y = x.to_vec();
    for i in 0..n {
        y[i] = x[i] + step;
        let plus = d_phi(f, &y, phi)?;
        y[i] = x[i] - step;
        let minus = d_phi(f, &y, phi)?;
        y[i] = x[i];
        let deriv = (&plus - &minus).scale(1.0 / (2.0 * step));
        let mut e = vec![0.0; n];
        e[i] = 1.0;
        dd = &dd + &ExteriorElement::vector(&e).wedge(&deriv)?;
    }
    Ok((&h_form - &dd).norm())
}

/// `H^φ f(x)` after checking it against the finite-difference `d d^φ f`.
pub fn hessian_form_checked(f: &ScalarField, x: &[f64], phi: &ExteriorElement) -> Result<ExteriorElement> {
    let gap = factorization_gap(f, x, phi)?;
    let limit = 1e-3 * (1.0 + f.hessian(x).norm());
    if gap > limit {
        return Err(Error::CrossCheck { gap, limit });
    }
    hessian_form(f, x, phi)
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct TraceCheck {
    pub lhs: f64,
    pub rhs: f64,
    pub gap: f64,
}

/// `H^φ f(ξ)` against the trace of `Hess f` on the plane.
pub fn trace_check(f: &ScalarField, x: &[f64], plane: &SimplePlane, phi: &ExteriorElement) -> Result<TraceCheck> {
    let lhs = hessian_form(f, x, phi)?.pairing(&plane.pvector())?;
    let h = f.hessian(x);
    let v = plane.frame();
    let rhs = (v.transpose() * h * v).trace();
    Ok(TraceCheck { lhs, rhs, gap: (lhs - rhs).abs() })
}

#[derive(Clone, Debug, Serialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum PshStatus {
    StrictlyPsh { margin: f64 },
    Psh { margin: f64 },
    NotPsh { margin: f64, witness: SimplePlane },
}

impl PshStatus {
    pub fn margin(&self) -> f64 {
        match self {
            PshStatus::StrictlyPsh { margin } | PshStatus::Psh { margin } | PshStatus::NotPsh { margin, .. } => *margin,
        }
    }

    pub fn is_psh(&self) -> bool {
        !matches!(self, PshStatus::NotPsh { .. })
    }
}

/// Minimum of `H^φ f(x)` over the refined samples at every point.
pub fn psh_classify(
    f: &ScalarField,
    points: &[Vec<f64>],
    cal: &Calibration,
    samples: &PlaneSampleSet,
    tol: f64,
) -> Result<Vec<PshStatus>> {
    points
        .par_iter()
        .map(|x| {
            let h = hessian_form(f, x, &cal.form)?;
            let r = constrained_extremum(&h, cal, samples, Extremum::Min, &ExtremumOptions::default())?;
            Ok(if r.value > tol {
                PshStatus::StrictlyPsh { margin: r.value }
            } else if r.value >= -tol {
                PshStatus::Psh { margin: r.value }
            } else {
                PshStatus::NotPsh { margin: r.value, witness: r.witness }
            })
        })
        .collect()
}

#[derive(Clone, Debug, Serialize)]
pub struct ModDFit {
    pub residual: f64,
    pub alpha: ExteriorElement,
    pub sigma: ExteriorElement,
}

/// Least-squares split `H^φ f(x) ≈ df ∧ α + σ` with `σ ∈ Λ(φ)^⊥`.
pub fn pluriharmonic_mod_d_residual(
    f: &ScalarField,
    x: &[f64],
    phi: &ExteriorElement,
    span: &LambdaSpan,
) -> Result<ModDFit> {
    let (n, p) = (phi.n(), phi.p());
    let h = DVector::from_vec(hessian_form(f, x, phi)?.to_dense());
    let df = ExteriorElement::vector(f.gradient(x).as_slice());
    let lower = combinations(n, p - 1);
    let perp = complement(&span.basis);
    let cols = lower.len() + perp.ncols();
    let mut m = DMatrix::zeros(h.len(), cols);
    for (j, idx) in lower.iter().enumerate() {
        let col = df.wedge(&ExteriorElement::basis(n, idx)?)?.to_dense();
        m.set_column(j, &DVector::from_vec(col));
    }
    for k in 0..perp.ncols() {
        m.set_column(lower.len() + k, &perp.column(k));
    }
    let (c, residual) = least_squares(&m, &h);
    let alpha = ExteriorElement::from_dense(n, p - 1, &c.as_slice()[..lower.len()]);
    let sigma_dense = &perp * c.rows(lower.len(), perp.ncols());
    let sigma = ExteriorElement::from_dense(n, p, sigma_dense.as_slice());
    Ok(ModDFit { residual, alpha, sigma })
}

#[derive(Clone, Debug, Serialize)]
pub struct FlatReport {
    pub flat: bool,
    /// No φ-plane is tangent to the level set.
    pub vacuous: bool,
    pub worst_value: f64,
    pub worst_plane: Option<SimplePlane>,
    pub restricted_comass: f64,
    pub samples: usize,
}

#[derive(Clone, Copy, Debug)]
pub struct FlatOptions {
    pub tol: f64,
    pub samples: usize,
    pub seed: u64,
}

impl Default for FlatOptions {
    fn default() -> Self {
        Self { tol: 1e-6, samples: 24, seed: crate::grassmann::DEFAULT_SEED }
    }
}

fn restricted_calibration(cal: &Calibration, q: &DMatrix<f64>, value: f64) -> Result<Calibration> {
    Ok(Calibration {
        name: format!("{}|W", cal.name),
        form: cal.form.pullback(q)?,
        claimed_comass: 1.0,
        grassmannian_hint: None,
        normal_flag: None,
        comass_estimate: Some(value),
    })
}

/// Checks `H^φ f(ξ) = 0` on the φ-planes tangent to the level set through `x`,
/// found as the φ-planes of `φ` restricted to `∇f(x)^⊥`.
pub fn phi_flat_check(f: &ScalarField, x: &[f64], cal: &Calibration, opts: &FlatOptions) -> Result<FlatReport> {
    let g = f.gradient(x);
    let gn = g.norm();
    if gn < 1e-10 {
        return Err(Error::VanishingGradient);
    }
    let normal = DMatrix::from_column_slice(g.len(), 1, (g / gn).as_slice());
    let q = complement(&normal);
    if cal.p() > q.ncols() {
        return Ok(FlatReport {
            flat: true,
            vacuous: true,
            worst_value: 0.0,
            worst_plane: None,
            restricted_comass: 0.0,
            samples: 0,
        });
    }
    let h_w = hessian_form(f, x, &cal.form)?.pullback(&q)?;
    let phi_w = cal.form.pullback(&q)?;
    let cm = if phi_w.is_zero() { 0.0 } else { comass(&phi_w, &ComassOptions::quick())?.value };
    if cm < 1.0 - opts.tol {
        return Ok(FlatReport {
            flat: true,
            vacuous: true,
            worst_value: 0.0,
            worst_plane: None,
            restricted_comass: cm,
            samples: 0,
        });
    }
    let sub = restricted_calibration(cal, &q, cm)?;
    let samples = crate::grassmann::sample_grassmannian(
        &sub,
        &crate::grassmann::SampleOptions { tol: 1e-8, ..crate::grassmann::SampleOptions::new(opts.samples, opts.seed) },
    )?;
    let hi = constrained_extremum(&h_w, &sub, &samples, Extremum::Max, &ExtremumOptions::default())?;
    let lo = constrained_extremum(&h_w, &sub, &samples, Extremum::Min, &ExtremumOptions::default())?;
    let (worst_value, plane) = if hi.value.abs() >= lo.value.abs() { (hi.value, hi.witness) } else { (lo.value, lo.witness) };
    let lifted = SimplePlane::from_matrix(&(&q * plane.frame()))?;
    Ok(FlatReport {
        flat: worst_value.abs() <= opts.tol,
        vacuous: false,
        worst_value,
        worst_plane: Some(lifted),
        restricted_comass: cm,
        samples: samples.len(),
    })
}

/// `u ∧ (u ⌟ φ)`.
pub fn symbol(u: &[f64], phi: &ExteriorElement) -> Result<ExteriorElement> {
    ExteriorElement::vector(u).wedge(&phi.interior(u)?)
}

/// Orthogonal projection of `H^φ f(x)` onto `Λ(φ)`.
pub fn reduced_hessian(f: &ScalarField, x: &[f64], phi: &ExteriorElement, span: &LambdaSpan) -> Result<ExteriorElement> {
    Ok(span.project(&hessian_form(f, x, phi)?))
}

/// Spans of accepted local maximizers of `kernel` from random starts, grown in
/// batches until the rank stops increasing.
pub fn saturated_span(
    form: &ExteriorElement,
    seed: u64,
    stream_offset: u64,
    accept_tol: f64,
    max_runs: usize,
) -> (DMatrix<f64>, usize) {
    let kernel = FormKernel::new(form);
    let (n, p) = (form.n(), form.p());
    let batch = 8u64;
    let mut cols: Vec<Vec<f64>> = Vec::new();
    let mut basis = DMatrix::zeros(crate::exterior::combinatorics::binomial(n, p), 0);
    let mut stale = 0;
    let mut next = 0u64;
    while (next as usize) < max_runs && stale < 2 {
        let runs: Vec<_> = (next..next + batch)
            .into_par_iter()
            .map(|k| {
                let mut rng = stream_rng(seed, stream_offset + k);
                ascend(&kernel, &gaussian_matrix(&mut rng, n, p), &AscentOptions::default())
            })
            .collect();
        next += batch;
        for r in runs {
            if r.converged && r.value >= 1.0 - accept_tol {
                let plane = SimplePlane::from_matrix(&r.frame).expect("ascent keeps full rank");
                cols.push(plane.pvector().to_dense());
            }
        }
        let m = DMatrix::from_fn(basis.nrows(), cols.len(), |i, j| cols[j][i]);
        let new_basis = orthonormal_basis(&m, RANK_CUTOFF);
        if new_basis.ncols() > basis.ncols() {
            stale = 0;
        } else {
            stale += 1;
        }
        basis = new_basis;
    }
    (basis, cols.len())
}

#[derive(Clone, Debug, Serialize)]
pub struct NormalityTrial {
    pub normal_vector: Vec<f64>,
    pub degenerate: bool,
    pub restricted_comass: f64,
    pub restricted_span_dim: usize,
    pub intersection_dim: usize,
    pub mismatch: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct NormalityReport {
    pub normal: bool,
    pub span_dim: usize,
    pub trials: usize,
    pub degenerate: usize,
    pub failures: Vec<NormalityTrial>,
    pub max_mismatch: f64,
    pub all_trials: Vec<NormalityTrial>,
}

/// Compares `Λ(φ|_W)` with `Λ(φ) ∩ Λ_p W` on random hyperplanes `W`; the two
/// agree exactly when `Λ(φ|_W)^⊥ = Λ(φ)^⊥|_W` inside `Λ^p W`.
pub fn normality_check(cal: &Calibration, trials: usize, seed: u64, tol: f64) -> Result<NormalityReport> {
    let (n, p) = (cal.n(), cal.p());
    if p >= n {
        return Err(Error::Precondition("normality needs p < n".into()));
    }
    let (span, _) = saturated_span(&cal.form, seed, 0, 1e-10, 4000);
    let proj_perp = DMatrix::<f64>::identity(span.nrows(), span.nrows()) - &span * span.transpose();
    let sub_idx = combinations(n - 1, p);
    let mut rng = stream_rng(seed, u64::MAX);
    let normals: Vec<DVector<f64>> = (0..trials).map(|_| unit_vector(&mut rng, n)).collect();
    let results: Vec<NormalityTrial> = normals
        .par_iter()
        .enumerate()
        .map(|(t, u)| -> Result<NormalityTrial> {
            let umat = DMatrix::from_column_slice(n, 1, u.as_slice());
            let q = complement(&umat);
            let phi_w = cal.form.pullback(&q)?;
            let opts = ComassOptions { seed: seed ^ (t as u64 + 1), ..ComassOptions::quick() };
            let cm = if phi_w.is_zero() { 0.0 } else { comass(&phi_w, &opts)?.value };
            let mut trial = NormalityTrial {
                normal_vector: u.iter().copied().collect(),
                degenerate: cm < 1.0 - tol,
                restricted_comass: cm,
                restricted_span_dim: 0,
                intersection_dim: 0,
                mismatch: 0.0,
            };
            if trial.degenerate {
                return Ok(trial);
            }
            let (left, _) = saturated_span(&phi_w, seed ^ 0x9e37_79b9, (t as u64 + 1) << 20, 1e-10, 2000);
            // Λ_p W inside Λ_p V: columns are the p-vectors of coordinate planes of W
            let mut emb = DMatrix::zeros(span.nrows(), sub_idx.len());
            for (j, idx) in sub_idx.iter().enumerate() {
                let cols: Vec<Vec<f64>> = idx.iter().map(|&k| q.column(k).iter().copied().collect()).collect();
                let plane = SimplePlane::from_vectors(&cols)?;
                emb.set_column(j, &DVector::from_vec(plane.pvector().to_dense()));
            }
            let right = null_space(&(&proj_perp * &emb));
            trial.restricted_span_dim = left.ncols();
            trial.intersection_dim = right.ncols();
            trial.mismatch = subspace_mismatch(&left, &right);
            Ok(trial)
        })
        .collect::<Result<_>>()?;
    let degenerate = results.iter().filter(|t| t.degenerate).count();
    let failures: Vec<NormalityTrial> =
        results.iter().filter(|t| !t.degenerate && t.mismatch >= 1e-8).cloned().collect();
    let max_mismatch = results.iter().filter(|t| !t.degenerate).map(|t| t.mismatch).fold(0.0, f64::max);
    Ok(NormalityReport {
        normal: failures.is_empty(),
        span_dim: span.ncols(),
        trials,
        degenerate,
        failures,
        max_mismatch,
        all_trials: results,
    })
}

/// Orthonormal basis of `{w : M w = 0}` for a tall `M`; singular values at
/// or below `RANK_CUTOFF · max(1, σ_max)` count as zero.
fn null_space(m: &DMatrix<f64>) -> DMatrix<f64> {
    debug_assert!(m.nrows() >= m.ncols());
    let svd = m.clone().svd(false, true);
    let v_t = svd.v_t.expect("right singular vectors");
    let sv = &svd.singular_values;
    let thresh = RANK_CUTOFF * sv.iter().fold(1.0f64, |a, &b| a.max(b));
    let keep: Vec<usize> = (0..sv.len()).filter(|&i| sv[i] <= thresh).collect();
    let mut out = DMatrix::zeros(m.ncols(), keep.len());
    for (k, &i) in keep.iter().enumerate() {
        out.set_column(k, &v_t.row(i).transpose());
    }
    out
}
