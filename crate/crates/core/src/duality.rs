//! Finite Farkas models of the boundary and Poisson–Jensen dualities: atoms
//! `c·δ_x·ξ` at a finite set of sites with planes from a φ-plane dictionary,
//! tested against a finite polynomial family. Each alternative is a pair of
//! LPs of which exactly one should succeed.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::calibrations::Calibration;
use crate::error::{check_dim, Error, Result};
use crate::exterior::combinatorics::combinations;
use crate::exterior::{ExteriorElement, SimplePlane};
use crate::grassmann::PlaneSampleSet;
use crate::linalg::{compress, stream_rng};
use crate::lp::{LinearProgram, LpStatus, Relation};
use crate::polynomial::{PolyForm, Polynomial};

/// Primal residual at or below which a system counts as solved.
pub const FEASIBILITY_TOL: f64 = 1e-7;
/// Smallest separation accepted from a dual certificate.
pub const MARGIN_TOL: f64 = 1e-6;
/// Dictionary planes must satisfy `φ(ξ) ≥ 1 − PLANE_TOL`.
pub const PLANE_TOL: f64 = 1e-6;

const FAMILY_SEED: u64 = 0x5eed;

#[derive(Clone, Debug)]
pub struct FiniteDualityModel {
    pub calibration: Calibration,
    pub sites: Vec<Vec<f64>>,
    /// Shared by every site.
    pub dictionary: Vec<SimplePlane>,
    pub degree: u32,
    lo: Vec<f64>,
    hi: Vec<f64>,
}

impl FiniteDualityModel {
    /// The dictionary is every coordinate plane on which `φ = ±1` (oriented to
    /// `+1`) followed by the sampled planes.
    pub fn new(cal: &Calibration, sites: Vec<Vec<f64>>, samples: &PlaneSampleSet, degree: u32) -> Result<Self> {
        let (n, p) = (cal.n(), cal.p());
        if sites.is_empty() {
            return Err(Error::InvalidModel("no sites".into()));
        }
        for s in &sites {
            check_dim(n, s.len())?;
        }
        let mut dictionary = Vec::new();
        for idx in combinations(n, p) {
            let c = cal.form.coeff(&idx);
            if (c.abs() - 1.0).abs() < 1e-12 {
                let mut vecs: Vec<Vec<f64>> = idx
                    .iter()
                    .map(|&i| {
                        let mut e = vec![0.0; n];
                        e[i] = 1.0;
                        e
                    })
                    .collect();
                if c < 0.0 {
                    for x in vecs[0].iter_mut() {
                        *x = -*x;
                    }
                }
                dictionary.push(SimplePlane::from_vectors(&vecs)?);
            }
        }
        if !samples.is_empty() {
            check_dim(n, samples.n())?;
        }
        dictionary.extend(samples.planes.iter().cloned());
        Self::with_dictionary(cal, sites, dictionary, degree)
    }

    pub fn with_dictionary(
        cal: &Calibration,
        sites: Vec<Vec<f64>>,
        dictionary: Vec<SimplePlane>,
        degree: u32,
    ) -> Result<Self> {
        let n = cal.n();
        for (j, plane) in dictionary.iter().enumerate() {
            let v = cal.form.pairing(&plane.pvector())?;
            if v < 1.0 - PLANE_TOL {
                return Err(Error::InvalidModel(format!("dictionary plane {j} has φ(ξ) = {v:.6}")));
            }
        }
        if dictionary.is_empty() {
            return Err(Error::InvalidModel("empty dictionary".into()));
        }
        let mut lo = vec![f64::INFINITY; n];
        let mut hi = vec![f64::NEG_INFINITY; n];
        for s in &sites {
            for i in 0..n {
                lo[i] = lo[i].min(s[i]);
                hi[i] = hi[i].max(s[i]);
            }
        }
        for i in 0..n {
            // widen flat directions so the box has volume
            let mid = 0.5 * (lo[i] + hi[i]);
            let half = (0.5 * (hi[i] - lo[i])).max(0.5);
            lo[i] = mid - half;
            hi[i] = mid + half;
        }
        Ok(Self { calibration: cal.clone(), sites, dictionary, degree, lo, hi })
    }

    pub fn n(&self) -> usize {
        self.calibration.n()
    }

    pub fn atom_count(&self) -> usize {
        self.sites.len() * self.dictionary.len()
    }

    /// `(site, plane)` of atom `a`.
    pub fn atom(&self, a: usize) -> (usize, usize) {
        (a / self.dictionary.len(), a % self.dictionary.len())
    }

    /// Polynomials of degree `1..=d` (or `0..=d` with `constant`), orthonormal in
    /// the discrete `L²` of seeded random points of the site box.
    fn orthonormal_polynomials(&self, constant: bool) -> Result<Vec<Polynomial>> {
        let n = self.n();
        let monomials: Vec<Vec<u32>> = Polynomial::exponents_up_to(n, self.degree)
            .into_iter()
            .filter(|e| constant || e.iter().any(|&k| k > 0))
            .collect();
        if monomials.is_empty() {
            return Err(Error::RankDeficientFamily { rank: 0, len: 0 });
        }
        let count = 4 * monomials.len() + 16;
        let mut rng = stream_rng(FAMILY_SEED, self.degree as u64);
        let points: Vec<Vec<f64>> = (0..count)
            .map(|_| (0..n).map(|i| rng.random_range(self.lo[i]..=self.hi[i])).collect())
            .collect();
        let v = DMatrix::from_fn(count, monomials.len(), |r, c| {
            points[r].iter().zip(&monomials[c]).map(|(x, &k)| x.powi(k as i32)).product::<f64>()
        }) / (count as f64).sqrt();
        let qr = v.qr();
        let r = qr.r();
        let rmax = r.diagonal().iter().fold(0.0f64, |a, b| a.max(b.abs()));
        let rank = r.diagonal().iter().filter(|d| d.abs() > 1e-10 * rmax).count();
        if rank < monomials.len() {
            return Err(Error::RankDeficientFamily { rank, len: monomials.len() });
        }
        let rinv = r.try_inverse().ok_or(Error::RankDeficientFamily { rank, len: monomials.len() })?;
        Ok((0..monomials.len())
            .map(|k| {
                (0..=k).fold(Polynomial::zero(n), |acc, j| {
                    acc.add(&Polynomial::monomial(monomials[j].clone(), rinv[(j, k)]))
                })
            })
            .collect())
    }

    /// Scalar test functions for the Jensen model (no constants).
    pub fn scalar_family(&self) -> Result<Vec<Polynomial>> {
        self.orthonormal_polynomials(false)
    }

    /// `(p−1)`-form test family `q_m dx_J` for the boundary model.
    pub fn form_family(&self) -> Result<Vec<PolyForm>> {
        let polys = self.orthonormal_polynomials(true)?;
        let mut out = Vec::new();
        for idx in combinations(self.n(), self.calibration.p() - 1) {
            for q in &polys {
                out.push(PolyForm::term(q.clone(), &idx)?);
            }
        }
        Ok(out)
    }
}

/// A weighted sum of atoms `Σ w δ_x ξ`, used to state a boundary functional
/// `S = ∂(Σ w δ_x ξ)`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct AtomSpec {
    pub point: Vec<f64>,
    /// Spanning vectors of the plane, in order.
    pub plane: Vec<Vec<f64>>,
    pub weight: f64,
}

#[derive(Clone, Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoundaryFunctional {
    pub atoms: Vec<AtomSpec>,
}

/// Assembled boundary LP: `rows[k][a] = dβ_k(x_a)(ξ_a)`, `rhs[k] = S(β_k)`.
#[derive(Clone, Debug)]
pub struct BoundaryData {
    pub rows: DMatrix<f64>,
    pub rhs: DVector<f64>,
}

fn dictionary_matrix(model: &FiniteDualityModel, family: &[PolyForm]) -> Result<(Vec<PolyForm>, DMatrix<f64>)> {
    let d: Vec<PolyForm> = family.iter().map(PolyForm::d).collect::<Result<_>>()?;
    let pv: Vec<ExteriorElement> = model.dictionary.iter().map(SimplePlane::pvector).collect();
    let cols: Vec<Vec<f64>> = (0..model.atom_count())
        .into_par_iter()
        .map(|a| {
            let (i, j) = model.atom(a);
            d.iter().map(|db| db.eval(&model.sites[i]).pairing(&pv[j]).expect("degrees agree")).collect()
        })
        .collect();
    Ok((d, DMatrix::from_fn(family.len(), cols.len(), |k, a| cols[a][k])))
}

/// Boundary LP data for `S` given by atoms.
pub fn assemble_boundary_model(model: &FiniteDualityModel, s: &BoundaryFunctional) -> Result<BoundaryData> {
    let family = model.form_family()?;
    let (d, rows) = dictionary_matrix(model, &family)?;
    let mut rhs = DVector::zeros(family.len());
    for atom in &s.atoms {
        check_dim(model.n(), atom.point.len())?;
        let xi = SimplePlane::from_vectors(&atom.plane)?.pvector();
        if xi.p() != model.calibration.p() {
            return Err(Error::DegreeMismatch { expected: model.calibration.p(), got: xi.p() });
        }
        for (k, db) in d.iter().enumerate() {
            rhs[k] += atom.weight * db.eval(&atom.point).pairing(&xi)?;
        }
    }
    Ok(BoundaryData { rows, rhs })
}

/// Boundary functional values `rhs = rows · c` for atom weights `c`.
pub fn boundary_of_weights(data: &BoundaryData, weights: &[f64]) -> BoundaryData {
    let c = DVector::from_column_slice(weights);
    BoundaryData { rows: data.rows.clone(), rhs: &data.rows * c }
}

#[derive(Clone, Debug, Serialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum Primal {
    Feasible { weights: Vec<f64> },
    Infeasible,
}

#[derive(Clone, Debug, Serialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum Dual {
    Certificate { coefficients: Vec<f64>, margin: f64 },
    None,
}

#[derive(Clone, Debug, Serialize)]
pub struct AlternativeResult {
    pub primal: Primal,
    pub dual: Dual,
    /// Exactly one side succeeded.
    pub consistent: bool,
    /// Neither side is clear of its threshold; excluded from consistency counts.
    pub tie: bool,
    /// L¹ residual of the best primal fit.
    pub residual: f64,
    /// Best dual separation (negative when none exists).
    pub margin: f64,
    pub family_size: usize,
    pub dictionary_size: usize,
    pub sites: usize,
    pub degree: u32,
    pub lambda: Option<f64>,
    /// Harmonic-measure weights on `K` for the Jensen model.
    pub mu: Option<Vec<f64>>,
}

fn lp_failure(status: LpStatus, what: &str) -> Error {
    Error::Lp(format!("{what} ended with status {status:?}"))
}

/// Columns `cols` (non-negative, with optional upper bounds), rows `A z = b`
/// plus extra linear rows; returns `(residual, z)` for `min ‖A z − b‖₁`.
fn residual_fit(
    a: &DMatrix<f64>,
    b: &DVector<f64>,
    extra: &[(Vec<(usize, f64)>, Relation, f64)],
) -> Result<(f64, Vec<f64>)> {
    let mut lp = LinearProgram::new();
    let z: Vec<usize> = (0..a.ncols()).map(|_| lp.add_var(0.0, 0.0, f64::INFINITY)).collect();
    for k in 0..a.nrows() {
        let plus = lp.add_var(1.0, 0.0, f64::INFINITY);
        let minus = lp.add_var(1.0, 0.0, f64::INFINITY);
        let mut row: Vec<(usize, f64)> =
            z.iter().enumerate().filter(|(c, _)| a[(k, *c)] != 0.0).map(|(c, &v)| (v, a[(k, c)])).collect();
        row.push((plus, 1.0));
        row.push((minus, -1.0));
        lp.add_row(row, Relation::Eq, b[k]);
    }
    for (row, rel, rhs) in extra {
        lp.add_row(row.clone(), *rel, *rhs);
    }
    let sol = lp.solve()?;
    if sol.status != LpStatus::Optimal {
        return Err(lp_failure(sol.status, "primal residual LP"));
    }
    Ok((sol.objective.max(0.0), z.iter().map(|&v| sol.x[v]).collect()))
}

fn classify(residual: f64, margin: f64, scale: f64) -> (bool, bool, bool, bool) {
    let feasible = residual <= FEASIBILITY_TOL * scale;
    let certificate = margin >= MARGIN_TOL;
    let consistent = feasible != certificate;
    let near_feasible = residual <= 1e-5 * scale;
    let near_margin = margin > -1e-9 && margin < 1e-4;
    let tie = !consistent && (near_feasible || near_margin);
    (feasible, certificate, consistent, tie)
}

/// Primal: `c ≥ 0` (and `Σ c ≤ λ`) with `rows · c = rhs`. Dual: `a` in the unit
/// box (and `t ∈ [0, 1]`) with `rowsᵀ a + t ≥ 0` on every atom and
/// `rhs · a + λ t < 0`.
pub fn boundary_alternative(model: &FiniteDualityModel, data: &BoundaryData, lambda: Option<f64>) -> Result<AlternativeResult> {
    let family_size = data.rows.nrows();
    let scale = data.rhs.amax().max(1.0);
    let (q, rows, rhs) = compress(&data.rows, &data.rhs, 1e-10);
    let (k, m) = (rows.nrows(), rows.ncols());
    let extra: Vec<(Vec<(usize, f64)>, Relation, f64)> = match lambda {
        Some(l) => vec![((0..m).map(|c| (c, 1.0)).collect(), Relation::Le, l)],
        None => vec![],
    };
    let (residual, weights) = residual_fit(&rows, &rhs, &extra)?;

    let mut lp = LinearProgram::new();
    let a: Vec<usize> = (0..k).map(|r| lp.add_var(rhs[r], -1.0, 1.0)).collect();
    let t = lambda.map(|l| lp.add_var(l, 0.0, 1.0));
    for c in 0..m {
        let mut row: Vec<(usize, f64)> =
            (0..k).filter(|&r| rows[(r, c)] != 0.0).map(|r| (a[r], rows[(r, c)])).collect();
        if let Some(t) = t {
            row.push((t, 1.0));
        }
        lp.add_row(row, Relation::Ge, 0.0);
    }
    let sol = lp.solve()?;
    if sol.status != LpStatus::Optimal {
        return Err(lp_failure(sol.status, "dual separation LP"));
    }
    let margin = -sol.objective / scale;
    let (feasible, certificate, consistent, tie) = classify(residual, margin, scale);
    let reduced = DVector::from_iterator(k, a.iter().map(|&v| sol.x[v]));
    let mut coefficients: Vec<f64> = (&q * reduced).iter().copied().collect();
    if let Some(t) = t {
        coefficients.push(sol.x[t]);
    }
    Ok(AlternativeResult {
        primal: if feasible { Primal::Feasible { weights } } else { Primal::Infeasible },
        dual: if certificate { Dual::Certificate { coefficients, margin } } else { Dual::None },
        consistent,
        tie,
        residual,
        margin,
        family_size,
        dictionary_size: model.dictionary.len(),
        sites: model.sites.len(),
        degree: model.degree,
        lambda,
        mu: None,
    })
}

/// Least total atom weight reproducing `rhs`; `None` when no non-negative
/// combination does.
pub fn min_mass(data: &BoundaryData) -> Result<Option<f64>> {
    let (_, rows, rhs) = compress(&data.rows, &data.rhs, 1e-10);
    let (residual, _) = residual_fit(&rows, &rhs, &[])?;
    if residual > FEASIBILITY_TOL * data.rhs.amax().max(1.0) {
        return Ok(None);
    }
    // the fitted residual is absorbed by heavily priced slacks
    let mut lp = LinearProgram::new();
    let m = rows.ncols();
    let z: Vec<usize> = (0..m).map(|_| lp.add_var(1.0, 0.0, f64::INFINITY)).collect();
    for r in 0..rows.nrows() {
        let mut row: Vec<(usize, f64)> = (0..m).filter(|&c| rows[(r, c)] != 0.0).map(|c| (z[c], rows[(r, c)])).collect();
        row.push((lp.add_var(1e6, 0.0, f64::INFINITY), 1.0));
        row.push((lp.add_var(1e6, 0.0, f64::INFINITY), -1.0));
        lp.add_row(row, Relation::Eq, rhs[r]);
    }
    let sol = lp.solve()?;
    if sol.status != LpStatus::Optimal {
        return Err(lp_failure(sol.status, "minimum-mass LP"));
    }
    Ok(Some(z.iter().map(|&v| sol.x[v]).sum()))
}

#[derive(Clone, Debug, Serialize)]
pub struct LambdaSweep {
    pub min_mass: Option<f64>,
    pub lambdas: Vec<f64>,
    pub feasible: Vec<bool>,
    pub monotone: bool,
    /// Feasibility switches on at the minimum mass (within `1e-7` relative).
    pub threshold_matches: bool,
}

/// Feasibility of the mass-bounded primal over `lambdas`, checked for
/// monotonicity and against the minimum mass.
pub fn lambda_sweep(model: &FiniteDualityModel, data: &BoundaryData, lambdas: &[f64]) -> Result<LambdaSweep> {
    let mm = min_mass(data)?;
    let feasible: Vec<bool> = lambdas
        .iter()
        .map(|&l| Ok(matches!(boundary_alternative(model, data, Some(l))?.primal, Primal::Feasible { .. })))
        .collect::<Result<_>>()?;
    let mut order: Vec<usize> = (0..lambdas.len()).collect();
    order.sort_by(|&a, &b| lambdas[a].total_cmp(&lambdas[b]));
    let monotone = order.windows(2).all(|w| !feasible[w[0]] || feasible[w[1]]);
    let threshold_matches = match mm {
        None => feasible.iter().all(|f| !f),
        Some(mm) => {
            let slack = 1e-7 * mm.max(1.0);
            let above = boundary_alternative(model, data, Some(mm + slack))?;
            let below_ok = mm <= slack
                || !matches!(boundary_alternative(model, data, Some(mm - 1e3 * slack))?.primal, Primal::Feasible { .. });
            matches!(above.primal, Primal::Feasible { .. }) && below_ok
        }
    };
    Ok(LambdaSweep { min_mass: mm, lambdas: lambdas.to_vec(), feasible, monotone, threshold_matches })
}

/// Poisson–Jensen alternative at site `x` against the sites `k_sites`.
/// Primal: atoms `c ≥ 0` and a probability `μ` on `K` with
/// `Σ c H^φ f_k(x_i)(ξ_ij) = Σ μ_j f_k(y_j) − f_k(x)`. Dual: `f` in the family
/// span, finite-psh on the atoms, with `f(x) > max_K f`.
pub fn jensen_alternative(model: &FiniteDualityModel, k_sites: &[usize], x: usize) -> Result<AlternativeResult> {
    if k_sites.is_empty() {
        return Err(Error::InvalidModel("K is empty".into()));
    }
    let ns = model.sites.len();
    if x >= ns || k_sites.iter().any(|&k| k >= ns) {
        return Err(Error::InvalidModel("site index out of range".into()));
    }
    let xp = &model.sites[x];
    for &k in k_sites {
        let d: f64 = model.sites[k].iter().zip(xp).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt();
        if d < 1e-12 {
            return Err(Error::InvalidModel(format!("x coincides with K site {k}")));
        }
    }
    let family = model.scalar_family()?;
    let kf = family.len();
    let m = model.atom_count();
    // trace of the Hessian on each atom plane
    let hcols: Vec<Vec<f64>> = (0..m)
        .into_par_iter()
        .map(|a| {
            let (i, j) = model.atom(a);
            let frame = model.dictionary[j].frame();
            family
                .iter()
                .map(|f| {
                    let h = f.hessian(&model.sites[i]);
                    (frame.transpose() * h * frame).trace()
                })
                .collect()
        })
        .collect();
    let nk = k_sites.len();
    let mut a = DMatrix::zeros(kf, m + nk);
    for c in 0..m {
        for r in 0..kf {
            a[(r, c)] = hcols[c][r];
        }
    }
    for (j, &k) in k_sites.iter().enumerate() {
        for r in 0..kf {
            a[(r, m + j)] = -family[r].eval(&model.sites[k]);
        }
    }
    let b = DVector::from_fn(kf, |r, _| -family[r].eval(xp));
    let scale = b.amax().max(1.0);
    let (q, a, b) = compress(&a, &b, 1e-10);
    let k = a.nrows();
    let prob_row = vec![((m..m + nk).map(|c| (c, 1.0)).collect(), Relation::Eq, 1.0)];
    let (residual, z) = residual_fit(&a, &b, &prob_row)?;

    // dual: f_a = −aᵀA on K columns; min s − f_a(x) with s ≥ f_a(y_j), H f_a ≥ 0 on atoms
    let mut lp = LinearProgram::new();
    let av: Vec<usize> = (0..k).map(|r| lp.add_var(b[r], -1.0, 1.0)).collect();
    let s = lp.add_var(1.0, f64::NEG_INFINITY, f64::INFINITY);
    for c in 0..m + nk {
        let mut row: Vec<(usize, f64)> = (0..k).filter(|&r| a[(r, c)] != 0.0).map(|r| (av[r], a[(r, c)])).collect();
        if c >= m {
            row.push((s, 1.0));
        }
        if !row.is_empty() {
            lp.add_row(row, Relation::Ge, 0.0);
        }
    }
    let sol = lp.solve()?;
    if sol.status != LpStatus::Optimal {
        return Err(lp_failure(sol.status, "Jensen separation LP"));
    }
    let reduced = DVector::from_iterator(k, av.iter().map(|&v| sol.x[v]));
    let coefficients: Vec<f64> = (&q * reduced).iter().copied().collect();
    let margin = -sol.objective / scale;
    let (feasible, certificate, consistent, tie) = classify(residual, margin, scale);
    Ok(AlternativeResult {
        primal: if feasible { Primal::Feasible { weights: z[..m].to_vec() } } else { Primal::Infeasible },
        dual: if certificate {
            Dual::Certificate { coefficients, margin }
        } else {
            Dual::None
        },
        consistent,
        tie,
        residual,
        margin,
        family_size: kf,
        dictionary_size: model.dictionary.len(),
        sites: ns,
        degree: model.degree,
        lambda: None,
        mu: if feasible { Some(z[m..].to_vec()) } else { None },
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct SupportCheck {
    pub holds: bool,
    /// `(site, largest f(site) − max_K f)` over finite-psh family members with
    /// coefficients in the unit box, for every site carrying weight.
    pub excess: Vec<(usize, f64)>,
}

/// Every weighted atom of a feasible Jensen primal sits where no finite-psh
/// family member exceeds its maximum over `K`.
pub fn support_check(
    model: &FiniteDualityModel,
    k_sites: &[usize],
    result: &AlternativeResult,
    tol: f64,
) -> Result<SupportCheck> {
    let Primal::Feasible { weights } = &result.primal else {
        return Ok(SupportCheck { holds: true, excess: vec![] });
    };
    let mut sites: Vec<usize> = weights.iter().enumerate().filter(|(_, &w)| w > 1e-9).map(|(a, _)| model.atom(a).0).collect();
    sites.sort_unstable();
    sites.dedup();
    let mut excess = Vec::new();
    for site in sites {
        if k_sites.contains(&site) {
            excess.push((site, 0.0));
            continue;
        }
        let r = jensen_alternative(model, k_sites, site)?;
        excess.push((site, r.margin.max(0.0)));
    }
    Ok(SupportCheck { holds: excess.iter().all(|e| e.1 <= tol), excess })
}

#[derive(Clone, Debug, Serialize)]
pub struct InstanceOutcome {
    pub instance: usize,
    pub feasible: bool,
    pub certificate: bool,
    pub consistent: bool,
    pub tie: bool,
    pub residual: f64,
    pub margin: f64,
}

impl InstanceOutcome {
    fn from_result(instance: usize, r: &AlternativeResult) -> Self {
        Self {
            instance,
            feasible: matches!(r.primal, Primal::Feasible { .. }),
            certificate: matches!(r.dual, Dual::Certificate { .. }),
            consistent: r.consistent,
            tie: r.tie,
            residual: r.residual,
            margin: r.margin,
        }
    }

    pub fn csv_header() -> &'static str {
        "instance,feasible,certificate,consistent,tie,residual,margin"
    }

    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{},{},{:.16e},{:.16e}",
            self.instance, self.feasible, self.certificate, self.consistent, self.tie, self.residual, self.margin
        )
    }
}

fn random_sites(rng: &mut impl Rng, count: usize, n: usize) -> Vec<Vec<f64>> {
    (0..count).map(|_| (0..n).map(|_| rng.random_range(-1.0..=1.0)).collect()).collect()
}

/// One random boundary instance: `sites` random points and `S = rows · c` for
/// sparse random `c ≥ 0`; with `flips`, about half the instances negate
/// roughly a third of the weights.
pub fn random_boundary_instance(
    cal: &Calibration,
    samples: &PlaneSampleSet,
    seed: u64,
    index: usize,
    degree: u32,
    sites: usize,
    flips: bool,
) -> Result<(FiniteDualityModel, BoundaryData)> {
    let mut rng = stream_rng(seed, index as u64);
    let model = FiniteDualityModel::new(cal, random_sites(&mut rng, sites, cal.n()), samples, degree)?;
    let base = assemble_boundary_model(&model, &BoundaryFunctional::default())?;
    let flip = flips && rng.random_bool(0.5);
    let weights: Vec<f64> = (0..model.atom_count())
        .map(|_| {
            let w: f64 = if rng.random_bool(0.2) { rng.random_range(0.0..1.0) } else { 0.0 };
            if flip && rng.random_bool(0.3) {
                -w
            } else {
                w
            }
        })
        .collect();
    let data = boundary_of_weights(&base, &weights);
    Ok((model, data))
}

/// Alternatives for `count` random boundary instances.
pub fn random_boundary_instances(
    cal: &Calibration,
    samples: &PlaneSampleSet,
    count: usize,
    seed: u64,
    degree: u32,
    sites: usize,
) -> Result<Vec<InstanceOutcome>> {
    (0..count)
        .into_par_iter()
        .map(|inst| {
            let (model, data) = random_boundary_instance(cal, samples, seed, inst, degree, sites, true)?;
            Ok(InstanceOutcome::from_result(inst, &boundary_alternative(&model, &data, None)?))
        })
        .collect()
}

/// Random Jensen instances: `K` is `k` random points of a random sampled
/// φ-plane through a random centre, and `x` a random point of the same plane
/// at a random spread, so that it lands both inside and outside the hull.
pub fn random_jensen_instances(
    cal: &Calibration,
    samples: &PlaneSampleSet,
    count: usize,
    seed: u64,
    degree: u32,
    k: usize,
) -> Result<Vec<InstanceOutcome>> {
    if samples.is_empty() {
        return Err(Error::EmptySamples);
    }
    let (n, p) = (cal.n(), cal.p());
    (0..count)
        .into_par_iter()
        .map(|inst| {
            let mut rng = stream_rng(seed ^ 0x6a09_e667, inst as u64);
            let frame = samples.planes[rng.random_range(0..samples.len())].frame().clone();
            let centre = random_sites(&mut rng, 1, n).remove(0);
            let spread: f64 = rng.random_range(0.0..1.2);
            let mut sites: Vec<Vec<f64>> = (0..=k)
                .map(|j| {
                    let scale = if j == k { spread } else { 1.0 };
                    let u: Vec<f64> = (0..p).map(|_| scale * rng.random_range(-1.0..=1.0)).collect();
                    (0..n).map(|i| centre[i] + (0..p).map(|c| frame[(i, c)] * u[c]).sum::<f64>()).collect()
                })
                .collect();
            if rng.random_bool(0.2) {
                // off the plane
                let off = random_sites(&mut rng, 1, n).remove(0);
                for (x, o) in sites[k].iter_mut().zip(off) {
                    *x += 0.3 * o;
                }
            }
            let model = FiniteDualityModel::new(cal, sites, samples, degree)?;
            let ks: Vec<usize> = (0..k).collect();
            Ok(InstanceOutcome::from_result(inst, &jensen_alternative(&model, &ks, k)?))
        })
        .collect()
}
