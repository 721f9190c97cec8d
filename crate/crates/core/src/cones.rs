//! Cone queries over a sampled `G(φ)`: the span `Λ(φ)`, membership in the
//! convex cone `Λ₊(φ)`, positivity against it, and the mass norm.
//!
//! All answers are relative to a finite sample set enlarged by column
//! generation, so every report carries its sample count and tolerances.

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::Serialize;

use crate::calibrations::Calibration;
use crate::error::{check_dim, Error, Result};
use crate::exterior::combinatorics::{binomial, combinations};
use crate::exterior::{ExteriorElement, SimplePlane};
use crate::grassmann::{
    comass, constrained_extremum, ComassOptions, Extremum, ExtremumOptions, PlaneSampleSet,
};
use crate::linalg::{compress, orthonormal_basis, rank, RANK_CUTOFF};
use crate::lp::{LinearProgram, LpStatus, Relation};

pub const BOUNDARY_TOL: f64 = 1e-6;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum ConeStatus {
    Interior,
    Boundary,
    Outside,
}

#[derive(Clone, Debug, Serialize)]
pub struct Atom {
    pub plane: SimplePlane,
    pub weight: f64,
}

#[derive(Clone, Debug, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Certificate {
    /// Nonnegative combination of planes reproducing the query.
    Weights(Vec<Atom>),
    /// Plane attaining the reported margin.
    Witness(SimplePlane),
    /// Form nonnegative on every atom and negative on the query.
    Separator(ExteriorElement),
}

#[derive(Clone, Debug, Serialize)]
pub struct ConeReport {
    pub status: ConeStatus,
    pub margin: f64,
    pub certificate: Option<Certificate>,
    /// L1 residual of the best cone decomposition (membership queries only).
    pub residual: Option<f64>,
    pub sample_count: usize,
    pub tol: f64,
    pub boundary_tol: f64,
}

impl ConeReport {
    pub fn is_member(&self) -> bool {
        self.status != ConeStatus::Outside
    }
}

fn classify(margin: f64, tol: f64) -> ConeStatus {
    if margin.abs() <= tol {
        ConeStatus::Boundary
    } else if margin > 0.0 {
        ConeStatus::Interior
    } else {
        ConeStatus::Outside
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct LambdaSpan {
    /// Orthonormal basis in the dense `Λ^p` coordinates, one column each.
    #[serde(skip)]
    pub basis: DMatrix<f64>,
    pub dim: usize,
    pub sample_count: usize,
}

impl LambdaSpan {
    /// Orthogonal projection of `a` onto the span.
    pub fn project(&self, a: &ExteriorElement) -> ExteriorElement {
        let v = DVector::from_vec(a.to_dense());
        let pr = &self.basis * (self.basis.transpose() * v);
        ExteriorElement::from_dense(a.n(), a.p(), pr.as_slice())
    }
}

fn dense_columns(items: &[ExteriorElement]) -> DMatrix<f64> {
    let rows = items.first().map_or(0, |e| binomial(e.n(), e.p()));
    let mut m = DMatrix::zeros(rows, items.len());
    for (j, e) in items.iter().enumerate() {
        m.set_column(j, &DVector::from_vec(e.to_dense()));
    }
    m
}

/// Orthonormal basis of the span of the sampled `p`-vectors.
pub fn lambda_span(samples: &PlaneSampleSet) -> Result<LambdaSpan> {
    if samples.is_empty() {
        return Err(Error::EmptySamples);
    }
    let basis = orthonormal_basis(&dense_columns(&samples.pvectors()), RANK_CUTOFF);
    Ok(LambdaSpan { dim: basis.ncols(), basis, sample_count: samples.len() })
}

#[derive(Clone, Copy, Debug)]
pub struct MembershipOptions {
    /// Residual above which the query is declared outside.
    pub tol: f64,
    pub boundary_tol: f64,
    /// Require the weights to sum to one (convex hull instead of cone).
    pub convex: bool,
    /// Column-generation rounds.
    pub max_rounds: usize,
}

impl Default for MembershipOptions {
    fn default() -> Self {
        Self { tol: 1e-6, boundary_tol: BOUNDARY_TOL, convex: false, max_rounds: 12 }
    }
}

struct ResidualFit {
    residual: f64,
    weights: Vec<f64>,
    duals: Vec<f64>,
}

/// `min ‖ξ − Σ c_i a_i‖₁` with `c ≥ 0` (and `Σ c = 1` when convex), in an
/// orthonormal basis of the span of the atoms and `ξ`. Atoms from the ascent
/// satisfy the linear relations of `Λ(φ)` only to ~1e-9, and those nearly
/// dependent rows would otherwise be pivoted on.
fn residual_lp(atoms: &[Vec<f64>], xi: &[f64], convex: bool) -> Result<ResidualFit> {
    let a = DMatrix::from_fn(xi.len(), atoms.len(), |k, j| atoms[j][k]);
    let (q, qa, qb) = compress(&a, &DVector::from_column_slice(xi), 1e-7);
    let dim = qb.len();
    let mut lp = LinearProgram::new();
    let c: Vec<usize> = atoms.iter().map(|_| lp.add_var(0.0, 0.0, f64::INFINITY)).collect();
    let sp: Vec<usize> = (0..dim).map(|_| lp.add_var(1.0, 0.0, f64::INFINITY)).collect();
    let sm: Vec<usize> = (0..dim).map(|_| lp.add_var(1.0, 0.0, f64::INFINITY)).collect();
    for k in 0..dim {
        let mut row: Vec<(usize, f64)> = c.iter().enumerate().map(|(j, &v)| (v, qa[(k, j)])).collect();
        row.push((sp[k], 1.0));
        row.push((sm[k], -1.0));
        lp.add_row(row, Relation::Eq, qb[k]);
    }
    if convex {
        lp.add_row(c.iter().map(|&j| (j, 1.0)).collect(), Relation::Eq, 1.0);
    }
    let sol = lp.solve()?;
    if sol.status != LpStatus::Optimal {
        return Err(Error::Lp(format!("residual LP ended {:?}", sol.status)));
    }
    let duals = &q * DVector::from_column_slice(&sol.duals[..dim]);
    Ok(ResidualFit {
        residual: sol.objective,
        weights: c.iter().map(|&j| sol.x[j]).collect(),
        duals: duals.as_slice().to_vec(),
    })
}

/// Largest `t` with `ξ − t·d` a nonnegative combination of atoms, each
/// coordinate matched within `slack`.
fn radial_margin(atoms: &[Vec<f64>], xi: &[f64], d: &[f64], slack: f64, convex: bool) -> Result<Option<f64>> {
    let dim = xi.len();
    let mut lp = LinearProgram::new();
    let c: Vec<usize> = atoms.iter().map(|_| lp.add_var(0.0, 0.0, f64::INFINITY)).collect();
    let t = lp.add_var(-1.0, f64::NEG_INFINITY, 1e6);
    for k in 0..dim {
        let mut row: Vec<(usize, f64)> = atoms
            .iter()
            .zip(&c)
            .filter(|(a, _)| a[k] != 0.0)
            .map(|(a, &j)| (j, a[k]))
            .collect();
        row.push((t, d[k]));
        lp.add_row(row.clone(), Relation::Le, xi[k] + slack);
        lp.add_row(row, Relation::Ge, xi[k] - slack);
    }
    if convex {
        lp.add_row(c.iter().map(|&j| (j, 1.0)).collect(), Relation::Le, 1.0);
    }
    let sol = lp.solve()?;
    Ok(match sol.status {
        LpStatus::Optimal => Some(sol.x[t]),
        _ => None,
    })
}

/// Membership of `ξ` in the cone (or convex hull) generated by the sampled
/// planes, enlarged by column generation on the LP duals.
pub fn cone_membership(
    xi: &ExteriorElement,
    cal: &Calibration,
    samples: &PlaneSampleSet,
    opts: &MembershipOptions,
) -> Result<ConeReport> {
    if samples.is_empty() {
        return Err(Error::EmptySamples);
    }
    check_dim(cal.n(), xi.n())?;
    if xi.p() != cal.p() {
        return Err(Error::DegreeMismatch { expected: cal.p(), got: xi.p() });
    }
    let target = xi.to_dense();
    let mut planes: Vec<SimplePlane> = samples.planes.clone();
    let mut atoms: Vec<Vec<f64>> = planes.iter().map(|p| p.pvector().to_dense()).collect();
    let ext = ExtremumOptions::default();
    let mut fit = residual_lp(&atoms, &target, opts.convex)?;
    // probes: the dual form, the residual, and on the first round ξ itself
    let mut probes = vec![xi.clone()];
    for _ in 0..opts.max_rounds {
        if fit.residual <= 1e-12 {
            break;
        }
        let mut rvec = target.clone();
        for (a, &w) in atoms.iter().zip(&fit.weights) {
            for (r, x) in rvec.iter_mut().zip(a) {
                *r -= w * x;
            }
        }
        probes.push(ExteriorElement::from_dense(xi.n(), xi.p(), &fit.duals));
        probes.push(ExteriorElement::from_dense(xi.n(), xi.p(), &rvec));
        let mut added = false;
        for probe in probes.drain(..) {
            if probe.is_zero() {
                continue;
            }
            let best = constrained_extremum(&probe, cal, samples, Extremum::Max, &ext)?;
            if planes.iter().any(|q| q.oriented_distance(&best.witness) < 1e-9) {
                continue;
            }
            atoms.push(best.witness.pvector().to_dense());
            planes.push(best.witness);
            added = true;
        }
        if !added {
            break;
        }
        fit = residual_lp(&atoms, &target, opts.convex)?;
    }
    let tol = opts.tol.max(opts.boundary_tol);
    let base = |status, margin, certificate| ConeReport {
        status,
        margin,
        certificate,
        residual: Some(fit.residual),
        sample_count: planes.len(),
        tol: opts.tol,
        boundary_tol: opts.boundary_tol,
    };
    if fit.residual > tol {
        let sep = ExteriorElement::from_dense(xi.n(), xi.p(), &fit.duals).scale(-1.0);
        return Ok(base(ConeStatus::Outside, -fit.residual, Some(Certificate::Separator(sep))));
    }
    // radial margin against the unit projection of φ onto the sampled span
    let span = orthonormal_basis(&DMatrix::from_fn(target.len(), atoms.len(), |i, j| atoms[j][i]), RANK_CUTOFF);
    let phi = DVector::from_vec(cal.form.to_dense());
    let mut dir = &span * (span.transpose() * phi);
    let dn = dir.norm();
    if dn > 0.0 {
        dir /= dn;
    }
    let slack = fit.residual.max(1e-10);
    let margin = radial_margin(&atoms, &target, dir.as_slice(), slack, opts.convex)?.unwrap_or(0.0);
    let weights: Vec<Atom> = fit
        .weights
        .iter()
        .zip(&planes)
        .filter(|(w, _)| **w > 1e-12)
        .map(|(&w, p)| Atom { plane: p.clone(), weight: w })
        .collect();
    let status = match classify(margin, opts.boundary_tol) {
        ConeStatus::Outside => ConeStatus::Boundary,
        s => s,
    };
    Ok(base(status, margin.max(0.0), Some(Certificate::Weights(weights))))
}

#[derive(Clone, Copy, Debug)]
pub struct MassOptions {
    pub max_rounds: usize,
    pub comass: ComassOptions,
}

impl Default for MassOptions {
    fn default() -> Self {
        Self { max_rounds: 30, comass: ComassOptions { multistarts: 24, ..ComassOptions::default() } }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct MassBracket {
    pub upper: f64,
    pub lower: f64,
    /// Form attaining the lower bound (before division by its comass).
    pub dual_form: ExteriorElement,
    pub dual_comass: f64,
    pub atoms: usize,
    pub rounds: usize,
}

/// Brackets the mass norm: `upper` from the cheapest signed decomposition
/// into simple unit vectors, `lower` from comass-normalized pairings.
pub fn mass_norm_estimate(xi: &ExteriorElement, generators: &[SimplePlane], opts: &MassOptions) -> Result<MassBracket> {
    if xi.is_zero() {
        return Err(Error::ZeroElement);
    }
    let (n, p) = (xi.n(), xi.p());
    if generators.iter().any(|g| g.n() != n || g.p() != p) {
        return Err(Error::DimensionMismatch { expected: n, got: 0 });
    }
    let target = xi.to_dense();
    let dim = target.len();
    let mut atoms: Vec<Vec<f64>> = combinations(n, p)
        .iter()
        .map(|idx| ExteriorElement::basis(n, idx).expect("basis").to_dense())
        .collect();
    atoms.extend(generators.iter().map(|g| g.pvector().to_dense()));
    if p == 0 || xi.is_simple(1e-12)? {
        atoms.push(xi.scale(1.0 / xi.norm()).to_dense());
    }
    let solve = |atoms: &[Vec<f64>]| -> Result<(f64, Vec<f64>)> {
        let mut lp = LinearProgram::new();
        let pos: Vec<usize> = atoms.iter().map(|_| lp.add_var(1.0, 0.0, f64::INFINITY)).collect();
        let neg: Vec<usize> = atoms.iter().map(|_| lp.add_var(1.0, 0.0, f64::INFINITY)).collect();
        for k in 0..dim {
            let mut row = Vec::new();
            for (a, (&jp, &jn)) in atoms.iter().zip(pos.iter().zip(&neg)) {
                if a[k] != 0.0 {
                    row.push((jp, a[k]));
                    row.push((jn, -a[k]));
                }
            }
            lp.add_row(row, Relation::Eq, target[k]);
        }
        let sol = lp.solve()?;
        if sol.status != LpStatus::Optimal {
            return Err(Error::Lp(format!("mass LP ended {:?}", sol.status)));
        }
        Ok((sol.objective, sol.duals))
    };
    let (mut upper, mut y) = solve(&atoms)?;
    let mut rounds = 0;
    let mut y_form = ExteriorElement::from_dense(n, p, &y);
    let mut y_comass = comass_or_norm(&y_form, &opts.comass)?;
    while rounds < opts.max_rounds && y_comass.0 > 1.0 + 1e-9 {
        rounds += 1;
        atoms.push(y_comass.1.pvector().to_dense());
        (upper, y) = solve(&atoms)?;
        y_form = ExteriorElement::from_dense(n, p, &y);
        y_comass = comass_or_norm(&y_form, &opts.comass)?;
    }
    let mut lower = 0.0f64;
    if y_comass.0 > 0.0 {
        lower = lower.max(y_form.pairing(xi)? / y_comass.0);
    }
    let flat = xi.clone();
    let flat_comass = comass_or_norm(&flat, &opts.comass)?.0;
    lower = lower.max(flat.pairing(xi)? / flat_comass);
    // coordinate forms dx_I have comass one
    for (_, c) in xi.terms() {
        lower = lower.max(c.abs());
    }
    // pairings and LP values agree to rounding; keep the bracket ordered
    let lower = lower.min(upper);
    Ok(MassBracket { upper, lower, dual_form: y_form, dual_comass: y_comass.0, atoms: atoms.len(), rounds })
}

/// Comass and maximizer; degree 0 and 1 are exact norms.
fn comass_or_norm(a: &ExteriorElement, opts: &ComassOptions) -> Result<(f64, SimplePlane)> {
    if a.is_zero() {
        return Ok((0.0, SimplePlane::coordinate(a.n(), &(0..a.p()).collect::<Vec<_>>())));
    }
    if a.p() == 1 {
        let v: Vec<f64> = a.to_dense();
        return Ok((a.norm(), SimplePlane::from_vectors(&[v])?));
    }
    let r = comass(a, opts)?;
    Ok((r.value, r.maximizer))
}

/// Minimum of `α` over `G(φ)`: Interior above `tol`, Outside below `−tol`.
pub fn positivity_classify(
    alpha: &ExteriorElement,
    cal: &Calibration,
    samples: &PlaneSampleSet,
    tol: f64,
) -> Result<ConeReport> {
    let r = constrained_extremum(alpha, cal, samples, Extremum::Min, &ExtremumOptions::default())?;
    Ok(ConeReport {
        status: classify(r.value, tol),
        margin: r.value,
        certificate: Some(Certificate::Witness(r.witness)),
        residual: None,
        sample_count: samples.len(),
        tol,
        boundary_tol: tol,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct ContractionReport {
    pub phi_e: ExteriorElement,
    pub classification: ConeReport,
    /// Distance from `e` to the span of the witness plane.
    pub span_distance: f64,
    /// Largest `|φ_e(ξ) − (1 − ‖proj_ξ e‖²)|` over the samples and witness.
    pub identity_gap: f64,
    /// Boundary status agrees with the span criterion.
    pub consistent: bool,
}

/// Classifies `φ_e = e ⌟ (e ∧ φ)` and cross-checks it against the criterion
/// "boundary iff `e` lies in some φ-plane".
pub fn contraction_boundary(
    e: &[f64],
    cal: &Calibration,
    samples: &PlaneSampleSet,
    tol: f64,
) -> Result<ContractionReport> {
    check_dim(cal.n(), e.len())?;
    let norm = e.iter().map(|x| x * x).sum::<f64>().sqrt();
    if (norm - 1.0).abs() > 1e-10 {
        return Err(Error::NotUnit { norm });
    }
    // e∧φ vanishes identically in top degree
    let phi_e = if cal.p() == cal.n() {
        ExteriorElement::zero(cal.n(), cal.p())
    } else {
        ExteriorElement::vector(e).wedge(&cal.form)?.interior(e)?
    };
    let classification = positivity_classify(&phi_e, cal, samples, tol)?;
    let witness = match &classification.certificate {
        Some(Certificate::Witness(w)) => w.clone(),
        _ => unreachable!("positivity reports carry a witness"),
    };
    let dist = |pl: &SimplePlane| {
        let pr = pl.project(e);
        let d2: f64 = e.iter().zip(pr.iter()).map(|(a, b)| (a - b).powi(2)).sum();
        (d2.sqrt(), pr.norm_squared())
    };
    let span_distance = dist(&witness).0;
    let mut identity_gap = 0.0f64;
    for pl in samples.planes.iter().chain(std::iter::once(&witness)) {
        let lhs = phi_e.pairing(&pl.pvector())?;
        identity_gap = identity_gap.max((lhs - (1.0 - dist(pl).1)).abs());
    }
    let boundary = classification.status == ConeStatus::Boundary;
    let consistent = boundary == (span_distance * span_distance <= tol) && identity_gap <= 1e-8;
    Ok(ContractionReport { phi_e, classification, span_distance, identity_gap, consistent })
}

#[derive(Clone, Debug, Serialize)]
pub struct Lemma25Report {
    pub mass_upper: f64,
    pub mass_lower: f64,
    pub in_cone: bool,
    pub cone_margin: f64,
    pub in_hull: bool,
    pub hull_margin: f64,
    pub phi_value: f64,
    pub calibrated: bool,
    pub agree: bool,
}

/// Evaluates cone membership, convex-hull membership and `φ(ξ) = 1` for a
/// mass-normalized `ξ` and reports whether they agree.
pub fn lemma_2_5_check(
    xi: &ExteriorElement,
    cal: &Calibration,
    samples: &PlaneSampleSet,
    generators: &[SimplePlane],
    tol: f64,
) -> Result<Lemma25Report> {
    let mass = mass_norm_estimate(xi, generators, &MassOptions::default())?;
    let band = tol.max(2e-6);
    if mass.lower > 1.0 + band || mass.upper < 1.0 - band {
        return Err(Error::MassNormalization { lower: mass.lower, upper: mass.upper });
    }
    let cone = cone_membership(xi, cal, samples, &MembershipOptions { tol, ..Default::default() })?;
    let hull = cone_membership(xi, cal, samples, &MembershipOptions { tol, convex: true, ..Default::default() })?;
    let phi_value = cal.form.pairing(xi)?;
    let calibrated = (phi_value - 1.0).abs() <= tol;
    let (a, b) = (cone.is_member(), hull.is_member());
    Ok(Lemma25Report {
        mass_upper: mass.upper,
        mass_lower: mass.lower,
        in_cone: a,
        cone_margin: cone.margin,
        in_hull: b,
        hull_margin: hull.margin,
        phi_value,
        calibrated,
        agree: a == b && b == calibrated,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct PositiveBasis {
    pub forms: Vec<ExteriorElement>,
    pub eps: f64,
    pub margins: Vec<f64>,
    pub rank: usize,
}

/// `{φ + ε·dx_I}` over all multi-indices, halving `ε` until every member is
/// strictly positive on the samples.
pub fn positive_basis(cal: &Calibration, samples: &PlaneSampleSet, eps: f64, tol: f64) -> Result<PositiveBasis> {
    let base = positivity_classify(&cal.form, cal, samples, tol)?;
    if base.status != ConeStatus::Interior {
        return Err(Error::Precondition(format!("φ is not interior (margin {})", base.margin)));
    }
    let (n, p) = (cal.n(), cal.p());
    let basis: Vec<ExteriorElement> =
        combinations(n, p).iter().map(|idx| ExteriorElement::basis(n, idx).expect("basis")).collect();
    let mut eps = eps;
    while eps >= 1e-12 {
        let forms: Vec<ExteriorElement> = basis.iter().map(|b| &cal.form + &b.scale(eps)).collect();
        let margins: Vec<f64> = forms
            .par_iter()
            .map(|f| positivity_classify(f, cal, samples, tol).map(|r| r.margin))
            .collect::<Result<_>>()?;
        if margins.iter().all(|&m| m > tol) {
            let r = rank(&dense_columns(&forms), RANK_CUTOFF);
            if r != forms.len() {
                return Err(Error::Precondition(format!("basis has rank {r} of {}", forms.len())));
            }
            return Ok(PositiveBasis { forms, eps, margins, rank: r });
        }
        eps *= 0.5;
    }
    Err(Error::EpsilonUnderflow { eps })
}
