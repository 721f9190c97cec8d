//! Green's currents on flat triangulated discs, the maximum principle and
//! restricted subharmonicity, all through the cotangent Laplacian.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use rayon::prelude::*;
use serde::Serialize;

use super::mesh::MeshedSubmanifold;
use super::quadrature::{gauss_legendre, graded_rule, grundmann_moller};
use super::PolyhedralCurrent;
use crate::calibrations::Calibration;
use crate::cones::LambdaSpan;
use crate::error::{Error, Result};
use crate::grassmann::PlaneSampleSet;
use crate::hessian::{d_phi, hessian_form, pluriharmonic_mod_d_residual, psh_classify, ScalarField};

/// Symmetric cotangent weights `w_ij = ½ (cot α_ij + cot β_ij)` and lumped
/// vertex areas (a third of the incident triangle areas).
struct Cotan {
    weights: Vec<BTreeMap<usize, f64>>,
    areas: Vec<f64>,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn sub(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

fn cotan(t: &PolyhedralCurrent) -> Result<Cotan> {
    if t.p() != 2 {
        return Err(Error::Precondition(format!("the cotangent Laplacian needs p = 2, got {}", t.p())));
    }
    let nv = t.vertices().len();
    let mut weights = vec![BTreeMap::new(); nv];
    let mut areas = vec![0.0; nv];
    let v = t.vertices();
    for (k, s) in t.simplices().iter().enumerate() {
        let area = t.volume(k);
        for c in 0..3 {
            let (i, j, o) = (s.vertices[(c + 1) % 3], s.vertices[(c + 2) % 3], s.vertices[c]);
            let (a, b) = (sub(&v[i], &v[o]), sub(&v[j], &v[o]));
            let cross = (dot(&a, &a) * dot(&b, &b) - dot(&a, &b).powi(2)).max(0.0).sqrt();
            let w = 0.5 * dot(&a, &b) / cross;
            *weights[i].entry(j).or_insert(0.0) += w;
            *weights[j].entry(i).or_insert(0.0) += w;
            areas[s.vertices[c]] += area / 3.0;
        }
    }
    Ok(Cotan { weights, areas })
}

impl Cotan {
    /// `Σ_j w_ij (f_j − f_i)` at vertex `i`.
    fn apply(&self, i: usize, values: &[f64]) -> f64 {
        self.weights[i].iter().map(|(&j, &w)| w * (values[j] - values[i])).sum()
    }

    /// Solves `Σ_j w_ij (g_i − g_j) = δ_{i,x}` on the interior with `g = 0`
    /// on the boundary, by Jacobi-preconditioned conjugate gradients.
    fn dirichlet_dirac(&self, interior: &[usize], x: usize) -> Result<Vec<f64>> {
        let nv = self.weights.len();
        let mut slot = vec![usize::MAX; nv];
        for (k, &i) in interior.iter().enumerate() {
            slot[i] = k;
        }
        let m = interior.len();
        let diag: Vec<f64> = interior.iter().map(|&i| self.weights[i].values().sum()).collect();
        let matvec = |u: &[f64], out: &mut [f64]| {
            out.par_iter_mut().enumerate().for_each(|(k, o)| {
                let i = interior[k];
                let mut acc = diag[k] * u[k];
                for (&j, &w) in &self.weights[i] {
                    if slot[j] != usize::MAX {
                        acc -= w * u[slot[j]];
                    }
                }
                *o = acc;
            });
        };
        let mut b = vec![0.0; m];
        b[slot[x]] = 1.0;
        let mut u = vec![0.0; m];
        let mut r = b.clone();
        let mut z: Vec<f64> = r.iter().zip(&diag).map(|(a, d)| a / d).collect();
        let mut p = z.clone();
        let mut ap = vec![0.0; m];
        let mut rz = dot(&r, &z);
        let mut converged = false;
        for _ in 0..(10 * m + 100) {
            matvec(&p, &mut ap);
            let alpha = rz / dot(&p, &ap);
            for k in 0..m {
                u[k] += alpha * p[k];
                r[k] -= alpha * ap[k];
            }
            if dot(&r, &r).sqrt() <= 1e-14 {
                converged = true;
                break;
            }
            for k in 0..m {
                z[k] = r[k] / diag[k];
            }
            let rz_new = dot(&r, &z);
            let beta = rz_new / rz;
            rz = rz_new;
            for k in 0..m {
                p[k] = z[k] + beta * p[k];
            }
        }
        if !converged {
            return Err(Error::Precondition("conjugate gradients did not converge".into()));
        }
        let mut g = vec![0.0; nv];
        for (k, &i) in interior.iter().enumerate() {
            g[i] = u[k];
        }
        Ok(g)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum GreenMode {
    /// Exact kernel when the mesh is a round disc centred at `x`, otherwise discrete.
    Auto,
    Exact,
    Discrete,
}

#[derive(Clone, Debug, Serialize)]
pub struct GreenRow {
    pub field: String,
    /// `∫ G_x · H^φ f(ξ_M)` over the mesh.
    pub lhs: f64,
    /// `Σ μ_x f − f(x)`.
    pub rhs: f64,
    pub residual: f64,
    /// `f(x) ≤ Σ μ_x f`.
    pub hull_inequality: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct GreenReport {
    pub mode: GreenMode,
    pub x_index: usize,
    pub x: Vec<f64>,
    pub mesh_size: f64,
    pub vertices: usize,
    pub triangles: usize,
    /// Total of the boundary weights before normalization.
    pub mu_sum: f64,
    pub mu_min: f64,
    pub rows: Vec<GreenRow>,
}

impl GreenReport {
    pub fn max_residual(&self) -> f64 {
        self.rows.iter().map(|r| r.residual).fold(0.0, f64::max)
    }
}

fn max_edge(t: &PolyhedralCurrent) -> f64 {
    let v = t.vertices();
    let mut h = 0.0f64;
    for s in t.simplices() {
        for a in 0..s.vertices.len() {
            for b in (a + 1)..s.vertices.len() {
                let d = sub(&v[s.vertices[a]], &v[s.vertices[b]]);
                h = h.max(dot(&d, &d).sqrt());
            }
        }
    }
    h
}

/// Weak Poisson–Jensen identity `∫_M G_x Δf = ∫ f dμ_x − f(x)` on a flat
/// disc-like mesh, with `Δ_M f = H^φ f(ξ_M)` on a φ-plane. `G_x ≥ 0`
/// vanishes on the rim and `Δ G_x = μ_x − δ_x`.
pub fn green_check(
    m: &MeshedSubmanifold,
    x_index: usize,
    tests: &[ScalarField],
    cal: &Calibration,
    mode: GreenMode,
) -> Result<GreenReport> {
    let t = &m.current;
    if t.p() != 2 {
        return Err(Error::Precondition("green_check supports p = 2 meshes".into()));
    }
    let xi0 = t.tangent(0);
    for k in 1..t.len() {
        if (&t.tangent(k) - &xi0).norm() > 1e-9 {
            return Err(Error::Precondition(format!("mesh is not contained in one plane (simplex {k})")));
        }
    }
    if !m.is_interior_vertex(x_index) {
        return Err(Error::NotInterior(x_index));
    }
    if m.components() != 1 {
        return Err(Error::Disconnected);
    }
    for f in tests {
        if f.n() != t.n() {
            return Err(Error::DimensionMismatch { expected: t.n(), got: f.n() });
        }
    }
    let verts = t.vertices();
    let x = verts[x_index].clone();
    let rim = m.boundary_vertices();
    let dists: Vec<f64> = rim.iter().map(|&b| dot(&sub(&verts[b], &x), &sub(&verts[b], &x)).sqrt()).collect();
    let radius = dists.iter().sum::<f64>() / dists.len() as f64;
    let round = dists.iter().all(|d| (d - radius).abs() <= 1e-9 * radius);
    let mode = match (mode, round) {
        (GreenMode::Auto, true) => GreenMode::Exact,
        (GreenMode::Auto, false) => GreenMode::Discrete,
        (GreenMode::Exact, false) => {
            return Err(Error::Precondition("the exact kernel needs a round disc centred at x".into()))
        }
        (other, _) => other,
    };

    let nv = verts.len();
    let (mu, mu_sum, green_values) = match mode {
        GreenMode::Exact => {
            let mut mu = vec![0.0; nv];
            for s in m.boundary.simplices() {
                let (a, b) = (sub(&verts[s.vertices[0]], &x), sub(&verts[s.vertices[1]], &x));
                let cos = (dot(&a, &b) / (dot(&a, &a) * dot(&b, &b)).sqrt()).clamp(-1.0, 1.0);
                let share = cos.acos() / (4.0 * PI);
                mu[s.vertices[0]] += share;
                mu[s.vertices[1]] += share;
            }
            let sum: f64 = mu.iter().sum();
            (mu, sum, None)
        }
        _ => {
            let lap = cotan(t)?;
            let interior = m.interior_vertices();
            let g = lap.dirichlet_dirac(&interior, x_index)?;
            let mut mu = vec![0.0; nv];
            for &b in &rim {
                mu[b] = lap.weights[b].iter().filter(|(j, _)| m.is_interior_vertex(**j)).map(|(&j, &w)| w * g[j]).sum();
            }
            let sum: f64 = mu.iter().sum();
            (mu, sum, Some(g))
        }
    };
    let mu_min = rim.iter().map(|&b| mu[b]).fold(f64::INFINITY, f64::min);
    let mu: Vec<f64> = mu.iter().map(|w| w / mu_sum).collect();

    let smooth_rule = grundmann_moller(2, 5);
    let duffy_u = graded_rule(40, 8);
    let duffy_v = gauss_legendre(12);
    let kernel = |y: &[f64]| -> f64 {
        let d = sub(y, &x);
        -(dot(&d, &d).sqrt() / radius).ln() / (2.0 * PI)
    };
    let rows = tests
        .par_iter()
        .map(|f| -> Result<GreenRow> {
            let mut lhs = 0.0;
            for (k, s) in t.simplices().iter().enumerate() {
                let xi = t.tangent(k);
                let lap_f = |y: &[f64]| -> Result<f64> { hessian_form(f, y, &cal.form)?.pairing(&xi) };
                let area = t.volume(k);
                let pts: Vec<&[f64]> = s.vertices.iter().map(|&v| verts[v].as_slice()).collect();
                let at = |bary: &[f64]| -> Vec<f64> {
                    (0..t.n()).map(|i| bary.iter().zip(&pts).map(|(l, p)| l * p[i]).sum()).collect()
                };
                let mut acc = 0.0;
                match &green_values {
                    None if s.vertices.contains(&x_index) => {
                        // Duffy: apex at x, (u, v) ↦ x + u((A − x) + v(B − A)), Jacobian 2·area·u
                        let pos = s.vertices.iter().position(|&v| v == x_index).expect("contains x");
                        let a = &verts[s.vertices[(pos + 1) % 3]];
                        let b = &verts[s.vertices[(pos + 2) % 3]];
                        for &(u, wu) in &duffy_u {
                            for &(v, wv) in &duffy_v {
                                let y: Vec<f64> =
                                    (0..t.n()).map(|i| x[i] + u * ((a[i] - x[i]) + v * (b[i] - a[i]))).collect();
                                acc += wu * wv * 2.0 * area * u * kernel(&y) * lap_f(&y)?;
                            }
                        }
                    }
                    None => {
                        for (bary, w) in &smooth_rule {
                            let y = at(bary);
                            acc += w * area * kernel(&y) * lap_f(&y)?;
                        }
                    }
                    Some(g) => {
                        for (bary, w) in &smooth_rule {
                            let y = at(bary);
                            let gy: f64 = bary.iter().zip(&s.vertices).map(|(l, &v)| l * g[v]).sum();
                            acc += w * area * gy * lap_f(&y)?;
                        }
                    }
                }
                lhs += s.multiplicity * acc;
            }
            let fx = f.eval(&x);
            let mean: f64 = rim.iter().map(|&b| mu[b] * f.eval(&verts[b])).sum();
            let rhs = mean - fx;
            Ok(GreenRow {
                field: f.name.clone(),
                lhs,
                rhs,
                residual: (lhs - rhs).abs(),
                hull_inequality: fx <= mean + 1e-12,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(GreenReport {
        mode,
        x_index,
        x,
        mesh_size: max_edge(t),
        vertices: m.interior_vertices().len() + rim.len(),
        triangles: t.len(),
        mu_sum,
        mu_min,
        rows,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum MaxPrincipleMode {
    /// Interior values between the boundary extremes.
    Bounds,
    /// `d^φ f` annihilates the boundary tangents of a level mesh.
    Lemma58,
}

#[derive(Clone, Debug, Serialize)]
pub struct MaxPrincipleReport {
    pub mode: MaxPrincipleMode,
    pub holds: bool,
    /// Largest precondition residual over the mesh vertices.
    pub precondition_residual: f64,
    pub boundary_min: f64,
    pub boundary_max: f64,
    pub interior_min: f64,
    pub interior_max: f64,
    pub violations: Vec<usize>,
    pub max_boundary_pairing: Option<f64>,
}

/// Maximum-principle checks on a meshed φ-submanifold. `Bounds` requires `f`
/// pluriharmonic mod d at every mesh vertex; `Lemma58` requires `f` constant on
/// the mesh. A failed precondition is an error.
pub fn max_principle_check(
    m: &MeshedSubmanifold,
    f: &ScalarField,
    cal: &Calibration,
    span: &LambdaSpan,
    mode: MaxPrincipleMode,
    tol: f64,
) -> Result<MaxPrincipleReport> {
    let t = &m.current;
    let verts = t.vertices();
    let values: Vec<f64> = verts.iter().map(|v| f.eval(v)).collect();
    let rim = m.boundary_vertices();
    let interior = m.interior_vertices();
    let range = |idx: &[usize]| {
        idx.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &i| (lo.min(values[i]), hi.max(values[i])))
    };
    let (bmin, bmax) = range(&rim);
    let (imin, imax) = range(&interior);
    match mode {
        MaxPrincipleMode::Bounds => {
            let residuals = rim
                .iter()
                .chain(&interior)
                .collect::<Vec<_>>()
                .par_iter()
                .map(|&&i| {
                    let fit = pluriharmonic_mod_d_residual(f, &verts[i], &cal.form, span)?;
                    let scale = 1.0 + hessian_form(f, &verts[i], &cal.form)?.norm();
                    Ok((i, fit.residual / scale))
                })
                .collect::<Result<Vec<(usize, f64)>>>()?;
            let (worst_vertex, worst) = residuals.iter().fold((0, 0.0f64), |a, &b| if b.1 > a.1 { b } else { a });
            if worst > 1e-8 {
                return Err(Error::Precondition(format!(
                    "{} is not pluriharmonic mod d at vertex {worst_vertex} (relative residual {worst:.3e})",
                    f.name
                )));
            }
            let violations: Vec<usize> =
                interior.iter().copied().filter(|&i| values[i] < bmin - tol || values[i] > bmax + tol).collect();
            Ok(MaxPrincipleReport {
                mode,
                holds: violations.is_empty(),
                precondition_residual: worst,
                boundary_min: bmin,
                boundary_max: bmax,
                interior_min: imin,
                interior_max: imax,
                violations,
                max_boundary_pairing: None,
            })
        }
        MaxPrincipleMode::Lemma58 => {
            let used: Vec<f64> = rim.iter().chain(&interior).map(|&i| values[i]).collect();
            let spread = used.iter().cloned().fold(f64::NEG_INFINITY, f64::max)
                - used.iter().cloned().fold(f64::INFINITY, f64::min);
            if spread > tol {
                return Err(Error::Precondition(format!("{} is not constant on the mesh (spread {spread:.3e})", f.name)));
            }
            let b = &m.boundary;
            let mut worst = 0.0f64;
            let mut violations = Vec::new();
            for k in 0..b.len() {
                let dphi = d_phi(f, &b.centroid(k), &cal.form)?;
                let v = dphi.pairing(&b.tangent(k))?.abs();
                if v > tol {
                    violations.push(k);
                }
                worst = worst.max(v);
            }
            Ok(MaxPrincipleReport {
                mode,
                holds: violations.is_empty(),
                precondition_residual: spread,
                boundary_min: bmin,
                boundary_max: bmax,
                interior_min: imin,
                interior_max: imax,
                violations,
                max_boundary_pairing: Some(worst),
            })
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct SubharmonicityReport {
    pub holds: bool,
    pub min_laplacian: f64,
    pub max_laplacian: f64,
    pub interior_vertices: usize,
    /// Interior vertices with discrete Laplacian below `−tol`.
    pub negative: Vec<usize>,
    /// Smallest psh margin over the probe vertices.
    pub psh_margin: f64,
}

/// Discrete Laplace–Beltrami `(1/A_i) Σ_j w_ij (f_j − f_i)` of `f|_M` at the
/// interior vertices, after checking that `f` is φ-psh on a vertex sample.
pub fn restriction_subharmonicity(
    m: &MeshedSubmanifold,
    f: &ScalarField,
    cal: &Calibration,
    samples: &PlaneSampleSet,
    tol: f64,
) -> Result<SubharmonicityReport> {
    let t = &m.current;
    let lap = cotan(t)?;
    let verts = t.vertices();
    let interior = m.interior_vertices();
    let probes: Vec<Vec<f64>> = {
        let step = (interior.len() / 12).max(1);
        interior.iter().step_by(step).map(|&i| verts[i].clone()).collect()
    };
    let status = psh_classify(f, &probes, cal, samples, 1e-6)?;
    let psh_margin = status.iter().map(|s| s.margin()).fold(f64::INFINITY, f64::min);
    if status.iter().any(|s| !s.is_psh()) {
        return Err(Error::Precondition(format!("{} is not φ-plurisubharmonic (margin {psh_margin:.3e})", f.name)));
    }
    let values: Vec<f64> = verts.iter().map(|v| f.eval(v)).collect();
    let laps: Vec<f64> = interior.iter().map(|&i| lap.apply(i, &values) / lap.areas[i]).collect();
    let negative: Vec<usize> = interior.iter().zip(&laps).filter(|(_, &l)| l < -tol).map(|(&i, _)| i).collect();
    Ok(SubharmonicityReport {
        holds: negative.is_empty(),
        min_laplacian: laps.iter().cloned().fold(f64::INFINITY, f64::min),
        max_laplacian: laps.iter().cloned().fold(f64::NEG_INFINITY, f64::max),
        interior_vertices: interior.len(),
        negative,
        psh_margin,
    })
}
