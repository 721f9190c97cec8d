//! Deterministic mesh generators and meshed φ-submanifolds.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use serde::Serialize;

use super::{PolyhedralCurrent, Simplex};
use crate::calibrations::Calibration;
use crate::error::{check_dim, Error, Result};
use crate::exterior::combinatorics::sort_with_sign;

/// Ring triangulation of the closed unit disc in the plane.
#[derive(Clone, Debug)]
pub struct DiscGrid {
    /// `(x, y, radius)`; rim points have radius exactly 1.
    pub points: Vec<[f64; 3]>,
    /// Counter-clockwise triangles.
    pub triangles: Vec<[usize; 3]>,
    pub rings: usize,
}

impl DiscGrid {
    pub fn is_rim(&self, i: usize) -> bool {
        self.points[i][2] == 1.0
    }
}

/// Hexagonal rings of the regular triangular lattice with spacing `1/K`,
/// `K = ⌈1/h⌉`, pushed radially onto round circles with weight `(k/K)⁸` so
/// that the interior stays a regular lattice and the rim lies on the unit
/// circle. Ring `k` carries `6k` points.
pub fn disc_grid(h: f64) -> Result<DiscGrid> {
    if !(h > 0.0 && h <= 1.0) {
        return Err(Error::InvalidMesh(format!("mesh size must lie in (0, 1], got {h}")));
    }
    let rings = (1.0 / h).ceil() as usize;
    let corner = |m: usize| {
        let t = PI / 3.0 * (m % 6) as f64;
        [t.cos(), t.sin()]
    };
    let mut points = vec![[0.0, 0.0, 0.0]];
    let mut starts = vec![0usize];
    for k in 1..=rings {
        starts.push(points.len());
        let s = k as f64 / rings as f64;
        let blend = s.powi(8);
        for m in 0..6 {
            let (c0, c1) = (corner(m), corner(m + 1));
            for j in 0..k {
                let t = j as f64 / k as f64;
                let p = [s * (c0[0] + t * (c1[0] - c0[0])), s * (c0[1] + t * (c1[1] - c0[1]))];
                let norm = p[0].hypot(p[1]);
                if k == rings {
                    let a = p[1].atan2(p[0]);
                    points.push([a.cos(), a.sin(), 1.0]);
                } else {
                    let f = 1.0 - blend + blend * s / norm;
                    points.push([f * p[0], f * p[1], f * norm]);
                }
            }
        }
    }
    let mut triangles = Vec::with_capacity(6 * rings * rings);
    for k in 1..=rings {
        let (inner_n, outer_n) = (6 * (k - 1), 6 * k);
        let inner = |a: usize| if inner_n == 0 { 0 } else { starts[k - 1] + a % inner_n };
        let outer = |b: usize| starts[k] + b % outer_n;
        let (mut a, mut b) = (0usize, 0usize);
        while a < inner_n || b < outer_n {
            // advance the ring whose next point comes first along the turn;
            // ties go to the inner ring, which reproduces the lattice
            if b < outer_n && (a >= inner_n || (b + 1) * inner_n < (a + 1) * outer_n) {
                triangles.push([inner(a), outer(b), outer(b + 1)]);
                b += 1;
            } else {
                triangles.push([inner(a), outer(b), inner(a + 1)]);
                a += 1;
            }
        }
    }
    for t in &mut triangles {
        let [p, q, r] = [points[t[0]], points[t[1]], points[t[2]]];
        let area = (q[0] - p[0]) * (r[1] - p[1]) - (q[1] - p[1]) * (r[0] - p[0]);
        if area < 0.0 {
            t.swap(1, 2);
        }
    }
    Ok(DiscGrid { points, triangles, rings })
}

fn surface<F>(n: usize, grid: &DiscGrid, embed: F) -> Result<PolyhedralCurrent>
where
    F: Fn(f64, f64, f64, bool) -> Vec<f64>,
{
    let vertices = (0..grid.points.len())
        .map(|i| {
            let [x, y, r] = grid.points[i];
            embed(x, y, r, grid.is_rim(i))
        })
        .collect();
    let simplices =
        grid.triangles.iter().map(|t| Simplex { vertices: t.to_vec(), multiplicity: 1.0 }).collect();
    PolyhedralCurrent::new(n, 2, vertices, simplices)
}

/// Disc `{c + r·(x a + y b) : x² + y² ≤ 1}` for orthonormal `a, b`.
pub fn disc_in_plane(h: f64, center: &[f64], a: &[f64], b: &[f64], radius: f64) -> Result<PolyhedralCurrent> {
    let n = center.len();
    check_dim(n, a.len())?;
    check_dim(n, b.len())?;
    let grid = disc_grid(h)?;
    surface(n, &grid, |x, y, _, _| (0..n).map(|i| center[i] + radius * (x * a[i] + y * b[i])).collect())
}

fn axis(n: usize, i: usize) -> Vec<f64> {
    let mut e = vec![0.0; n];
    e[i] = 1.0;
    e
}

/// Unit disc in the `x₁y₁` coordinate plane of `R^n`.
pub fn disc(n: usize, h: f64) -> Result<PolyhedralCurrent> {
    if n < 2 {
        return Err(Error::InvalidMesh("a disc needs n ≥ 2".into()));
    }
    disc_in_plane(h, &vec![0.0; n], &axis(n, 0), &axis(n, 1), 1.0)
}

/// Unit disc in `span{e_{x₁}, cos θ e_{y₁} + sin θ e_{x₂}} ⊂ R⁴`.
pub fn tilted_disc(theta: f64, h: f64) -> Result<PolyhedralCurrent> {
    let b = [0.0, theta.cos(), theta.sin(), 0.0];
    disc_in_plane(h, &[0.0; 4], &[1.0, 0.0, 0.0, 0.0], &b, 1.0)
}

/// Graph of `z₂ = z₁²` over the unit disc, a holomorphic curve in `C²`.
pub fn graph_curve(h: f64) -> Result<PolyhedralCurrent> {
    let grid = disc_grid(h)?;
    surface(4, &grid, |x, y, _, _| vec![x, y, x * x - y * y, 2.0 * x * y])
}

fn cap_lift(height: f64) -> impl Fn(f64, bool) -> f64 {
    let big = (1.0 + height * height) / (2.0 * height);
    move |r, rim| if rim { 0.0 } else { (big * big - r * r).sqrt() - (big - height) }
}

fn check_height(height: f64) -> Result<()> {
    if !(height > 0.0 && height <= 1.0) {
        return Err(Error::InvalidMesh(format!("cap height must lie in (0, 1], got {height}")));
    }
    Ok(())
}

/// Spherical cap over the unit circle of the `x₁y₁` plane, bulging along
/// `x₂`, with the disc's rim; its area is `π(1 + height²)`.
pub fn cap(height: f64, h: f64) -> Result<PolyhedralCurrent> {
    check_height(height)?;
    let grid = disc_grid(h)?;
    let lift = cap_lift(height);
    surface(4, &grid, |x, y, r, rim| vec![x, y, lift(r, rim), 0.0])
}

/// The solid between [`disc`] and [`cap`], oriented so that its boundary is
/// `disc(4, h) − cap(height, h)`.
pub fn solid_region(height: f64, h: f64) -> Result<PolyhedralCurrent> {
    check_height(height)?;
    let grid = disc_grid(h)?;
    let lift = cap_lift(height);
    let mut vertices: Vec<Vec<f64>> = grid.points.iter().map(|&[x, y, _]| vec![x, y, 0.0, 0.0]).collect();
    let mut top = vec![0usize; grid.points.len()];
    for (i, &[x, y, r]) in grid.points.iter().enumerate() {
        if grid.is_rim(i) {
            top[i] = i;
        } else {
            top[i] = vertices.len();
            vertices.push(vec![x, y, lift(r, false), 0.0]);
        }
    }
    let mut simplices = Vec::new();
    for t in &grid.triangles {
        let mut s = t.to_vec();
        let eps = sort_with_sign(&mut s).expect("distinct vertices");
        let (i, j, k) = (s[0], s[1], s[2]);
        let prism = [
            ([i, j, k, top[k]], 1.0),
            ([i, j, top[j], top[k]], -1.0),
            ([i, top[i], top[j], top[k]], 1.0),
        ];
        for (tet, sign) in prism {
            let mut probe = tet.to_vec();
            if sort_with_sign(&mut probe).is_some() {
                simplices.push(Simplex { vertices: tet.to_vec(), multiplicity: -eps * sign });
            }
        }
    }
    PolyhedralCurrent::new(4, 3, vertices, simplices)
}

/// Area of the polygon spanned by the disc grid's rim points.
pub fn inscribed_area(h: f64) -> Result<f64> {
    let grid = disc_grid(h)?;
    let rim: Vec<[f64; 3]> = grid.points.iter().copied().filter(|p| p[2] == 1.0).collect();
    Ok((0..rim.len())
        .map(|i| {
            let (p, q) = (rim[i], rim[(i + 1) % rim.len()]);
            0.5 * (p[0] * q[1] - p[1] * q[0])
        })
        .sum())
}

/// A polyhedral current whose simplices are all φ-planes up to a tolerance,
/// with consistent orientations.
#[derive(Clone, Debug, Serialize)]
pub struct MeshedSubmanifold {
    pub current: PolyhedralCurrent,
    pub boundary: PolyhedralCurrent,
    pub flatness_tol: f64,
    /// Smallest `φ(ξ)` over the simplices.
    pub min_phi: f64,
    #[serde(skip)]
    on_boundary: Vec<bool>,
    #[serde(skip)]
    used: Vec<bool>,
}

impl MeshedSubmanifold {
    pub fn new(current: PolyhedralCurrent, cal: &Calibration, flatness_tol: f64) -> Result<Self> {
        check_dim(current.n(), cal.n())?;
        if current.p() != cal.p() {
            return Err(Error::DegreeMismatch { expected: cal.p(), got: current.p() });
        }
        if current.p() == 0 || current.is_empty() {
            return Err(Error::InvalidMesh("a meshed submanifold needs simplices of positive dimension".into()));
        }
        let mut min_phi = f64::INFINITY;
        for (k, s) in current.simplices().iter().enumerate() {
            if s.multiplicity <= 0.0 {
                return Err(Error::InvalidMesh(format!("simplex {k} has non-positive multiplicity")));
            }
            let phi = cal.form.pairing(&current.tangent(k))?;
            if phi < 1.0 - flatness_tol {
                return Err(Error::InvalidMesh(format!("simplex {k} has φ(ξ) = {phi:.6} below 1 − {flatness_tol:e}")));
            }
            min_phi = min_phi.min(phi);
        }
        let mut faces: BTreeMap<Vec<usize>, Vec<f64>> = BTreeMap::new();
        for s in current.simplices() {
            for m in 0..s.vertices.len() {
                let mut f = s.vertices.clone();
                f.remove(m);
                let sign = sort_with_sign(&mut f).expect("distinct vertices") * if m % 2 == 0 { 1.0 } else { -1.0 };
                faces.entry(f).or_default().push(sign);
            }
        }
        for (f, signs) in &faces {
            if signs.len() > 2 {
                return Err(Error::InvalidMesh(format!("face {f:?} is shared by {} simplices", signs.len())));
            }
            if signs.len() == 2 && signs[0] + signs[1] != 0.0 {
                return Err(Error::InvalidMesh(format!("inconsistent orientations across face {f:?}")));
            }
        }
        let boundary = current.boundary()?;
        let nv = current.vertices().len();
        let mut on_boundary = vec![false; nv];
        for s in boundary.simplices() {
            for &v in &s.vertices {
                on_boundary[v] = true;
            }
        }
        let mut used = vec![false; nv];
        for s in current.simplices() {
            for &v in &s.vertices {
                used[v] = true;
            }
        }
        Ok(Self { current, boundary, flatness_tol, min_phi, on_boundary, used })
    }

    pub fn is_boundary_vertex(&self, i: usize) -> bool {
        self.on_boundary.get(i).copied().unwrap_or(false)
    }

    pub fn is_interior_vertex(&self, i: usize) -> bool {
        self.used.get(i).copied().unwrap_or(false) && !self.is_boundary_vertex(i)
    }

    pub fn interior_vertices(&self) -> Vec<usize> {
        (0..self.used.len()).filter(|&i| self.is_interior_vertex(i)).collect()
    }

    pub fn boundary_vertices(&self) -> Vec<usize> {
        (0..self.used.len()).filter(|&i| self.used[i] && self.on_boundary[i]).collect()
    }

    /// Number of connected components of the vertex graph.
    pub fn components(&self) -> usize {
        let nv = self.used.len();
        let mut parent: Vec<usize> = (0..nv).collect();
        fn find(parent: &mut [usize], mut i: usize) -> usize {
            while parent[i] != i {
                parent[i] = parent[parent[i]];
                i = parent[i];
            }
            i
        }
        for s in self.current.simplices() {
            for w in s.vertices.windows(2) {
                let (a, b) = (find(&mut parent, w[0]), find(&mut parent, w[1]));
                parent[a] = b;
            }
        }
        (0..nv).filter(|&i| self.used[i] && find(&mut parent, i) == i).count()
    }
}
