//! Polyhedral currents: weighted oriented simplices sharing a vertex table.

mod green;
pub mod mesh;
pub mod quadrature;

use std::collections::{BTreeMap, HashMap};
use std::fmt::Write as _;
use std::io::Write;

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::Serialize;

use crate::calibrations::Calibration;
use crate::error::{check_dim, Error, Result};
use crate::exterior::combinatorics::sort_with_sign;
use crate::exterior::ExteriorElement;
use crate::polynomial::PolyForm;

pub use green::{
    green_check, max_principle_check, restriction_subharmonicity, GreenMode, GreenReport, GreenRow, MaxPrincipleMode,
    MaxPrincipleReport, SubharmonicityReport,
};
pub use mesh::MeshedSubmanifold;

/// Minimum accepted simplex volume.
pub const MIN_VOLUME: f64 = 1e-12;
/// Multiplicities at or below this after cancellation are dropped.
pub const CANCEL_TOL: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Simplex {
    pub vertices: Vec<usize>,
    pub multiplicity: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct PolyhedralCurrent {
    n: usize,
    p: usize,
    vertices: Vec<Vec<f64>>,
    simplices: Vec<Simplex>,
}

impl PolyhedralCurrent {
    pub fn new(n: usize, p: usize, vertices: Vec<Vec<f64>>, simplices: Vec<Simplex>) -> Result<Self> {
        if p > n {
            return Err(Error::InvalidCurrent(format!("dimension {p} exceeds ambient dimension {n}")));
        }
        for v in &vertices {
            check_dim(n, v.len())?;
        }
        let t = Self { n, p, vertices, simplices };
        for (k, s) in t.simplices.iter().enumerate() {
            if s.vertices.len() != p + 1 {
                return Err(Error::InvalidCurrent(format!("simplex {k} has {} vertices, expected {}", s.vertices.len(), p + 1)));
            }
            if let Some(&bad) = s.vertices.iter().find(|&&i| i >= t.vertices.len()) {
                return Err(Error::InvalidCurrent(format!("simplex {k} references missing vertex {bad}")));
            }
            if !s.multiplicity.is_finite() {
                return Err(Error::InvalidCurrent(format!("simplex {k} has a non-finite multiplicity")));
            }
            let vol = t.volume(k);
            if vol <= MIN_VOLUME {
                return Err(Error::InvalidCurrent(format!("simplex {k} is degenerate (volume {vol:.3e})")));
            }
        }
        Ok(t)
    }

    pub fn zero(n: usize, p: usize) -> Self {
        Self { n, p, vertices: Vec::new(), simplices: Vec::new() }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn p(&self) -> usize {
        self.p
    }

    pub fn vertices(&self) -> &[Vec<f64>] {
        &self.vertices
    }

    pub fn simplices(&self) -> &[Simplex] {
        &self.simplices
    }

    pub fn len(&self) -> usize {
        self.simplices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.simplices.is_empty()
    }

    /// Edge vectors `v_k − v_0` as columns.
    fn edges(&self, k: usize) -> DMatrix<f64> {
        let s = &self.simplices[k].vertices;
        let v0 = &self.vertices[s[0]];
        DMatrix::from_fn(self.n, self.p, |i, j| self.vertices[s[j + 1]][i] - v0[i])
    }

    /// `p`-dimensional volume of simplex `k`; points count as 1.
    pub fn volume(&self, k: usize) -> f64 {
        if self.p == 0 {
            return 1.0;
        }
        let e = self.edges(k);
        let gram = e.transpose() * &e;
        let fact = (1..=self.p).fold(1.0, |a, b| a * b as f64);
        gram.determinant().max(0.0).sqrt() / fact
    }

    /// Oriented unit tangent `p`-vector of simplex `k`.
    pub fn tangent(&self, k: usize) -> ExteriorElement {
        let e = self.edges(k);
        let mut xi = ExteriorElement::scalar(self.n, 1.0);
        for j in 0..self.p {
            let col: Vec<f64> = e.column(j).iter().copied().collect();
            xi = xi.wedge(&ExteriorElement::vector(&col)).expect("dimensions agree");
        }
        let norm = xi.norm();
        xi.scale(1.0 / norm)
    }

    pub fn centroid(&self, k: usize) -> Vec<f64> {
        let s = &self.simplices[k].vertices;
        (0..self.n).map(|i| s.iter().map(|&v| self.vertices[v][i]).sum::<f64>() / s.len() as f64).collect()
    }

    /// Sorted vertex tuples with the permutation sign folded into the
    /// multiplicity, repeated simplices merged, cancelled ones dropped.
    pub fn canonical(&self) -> BTreeMap<Vec<usize>, f64> {
        let mut acc: BTreeMap<Vec<usize>, f64> = BTreeMap::new();
        for s in &self.simplices {
            let mut idx = s.vertices.clone();
            if let Some(sign) = sort_with_sign(&mut idx) {
                *acc.entry(idx).or_insert(0.0) += sign * s.multiplicity;
            }
        }
        acc.retain(|_, m| m.abs() > CANCEL_TOL);
        acc
    }

    pub fn canonicalize(&self) -> Self {
        let simplices =
            self.canonical().into_iter().map(|(vertices, multiplicity)| Simplex { vertices, multiplicity }).collect();
        Self { n: self.n, p: self.p, vertices: self.vertices.clone(), simplices }
    }

    /// True when every simplex cancels.
    pub fn is_zero(&self) -> bool {
        self.canonical().is_empty()
    }

    pub fn scale(&self, c: f64) -> Self {
        let mut out = self.clone();
        for s in &mut out.simplices {
            s.multiplicity *= c;
        }
        out
    }

    /// Sum with vertices identified by exact coordinates.
    pub fn try_add(&self, other: &Self) -> Result<Self> {
        check_dim(self.n, other.n)?;
        if self.p != other.p {
            return Err(Error::DegreeMismatch { expected: self.p, got: other.p });
        }
        let mut vertices: Vec<Vec<f64>> = Vec::new();
        let mut lookup: HashMap<Vec<u64>, usize> = HashMap::new();
        let mut intern = |v: &Vec<f64>| -> usize {
            let key: Vec<u64> = v.iter().map(|x| (x + 0.0).to_bits()).collect();
            *lookup.entry(key).or_insert_with(|| {
                vertices.push(v.clone());
                vertices.len() - 1
            })
        };
        let mut simplices = Vec::with_capacity(self.len() + other.len());
        for t in [self, other] {
            let map: Vec<usize> = t.vertices.iter().map(&mut intern).collect();
            for s in &t.simplices {
                simplices.push(Simplex {
                    vertices: s.vertices.iter().map(|&i| map[i]).collect(),
                    multiplicity: s.multiplicity,
                });
            }
        }
        Ok(Self { n: self.n, p: self.p, vertices, simplices }.canonicalize())
    }

    pub fn try_sub(&self, other: &Self) -> Result<Self> {
        self.try_add(&other.scale(-1.0))
    }

    /// Alternating sum of faces, cancelled.
    pub fn boundary(&self) -> Result<Self> {
        if self.p == 0 {
            return Err(Error::InvalidCurrent("a 0-current has no boundary".into()));
        }
        let mut faces = Vec::with_capacity(self.len() * (self.p + 1));
        for s in &self.simplices {
            for m in 0..=self.p {
                let mut v = s.vertices.clone();
                v.remove(m);
                let sign = if m % 2 == 0 { 1.0 } else { -1.0 };
                faces.push(Simplex { vertices: v, multiplicity: sign * s.multiplicity });
            }
        }
        Ok(Self { n: self.n, p: self.p - 1, vertices: self.vertices.clone(), simplices: faces }.canonicalize())
    }

    /// `Σ |m| · vol`.
    pub fn mass(&self) -> f64 {
        (0..self.len()).map(|k| self.simplices[k].multiplicity.abs() * self.volume(k)).sum()
    }

    /// `T(α) = Σ m ∫ α(ξ)` with a Grundmann–Möller rule exact through
    /// coefficient degree `order`.
    pub fn evaluate(&self, alpha: &PolyForm, order: usize) -> Result<f64> {
        check_dim(self.n, alpha.n())?;
        if alpha.p() != self.p {
            return Err(Error::DegreeMismatch { expected: self.p, got: alpha.p() });
        }
        let rule = quadrature::grundmann_moller(self.p, order / 2);
        let parts: Vec<f64> = (0..self.len())
            .into_par_iter()
            .map(|k| {
                let xi = self.tangent(k);
                let s = &self.simplices[k];
                let mut acc = 0.0;
                for (bary, w) in &rule {
                    let x: Vec<f64> = (0..self.n)
                        .map(|i| bary.iter().zip(&s.vertices).map(|(l, &v)| l * self.vertices[v][i]).sum())
                        .collect();
                    acc += w * alpha.eval(&x).pairing(&xi).expect("degrees agree");
                }
                acc * self.volume(k) * s.multiplicity
            })
            .collect();
        Ok(parts.iter().sum())
    }

    /// `T(φ)` for a constant form.
    pub fn evaluate_constant(&self, phi: &ExteriorElement) -> Result<f64> {
        check_dim(self.n, phi.n())?;
        if phi.p() != self.p {
            return Err(Error::DegreeMismatch { expected: self.p, got: phi.p() });
        }
        Ok((0..self.len())
            .map(|k| self.simplices[k].multiplicity * self.volume(k) * phi.pairing(&self.tangent(k)).expect("degrees agree"))
            .sum())
    }

    /// `φ(ξ)` per simplex as CSV: `simplex,multiplicity,volume,phi`.
    pub fn write_phi_csv<W: Write>(&self, phi: &ExteriorElement, mut w: W) -> Result<()> {
        writeln!(w, "simplex,multiplicity,volume,phi")?;
        for k in 0..self.len() {
            let v = phi.pairing(&self.tangent(k))?;
            writeln!(w, "{k},{:.16e},{:.16e},{:.16e}", self.simplices[k].multiplicity, self.volume(k), v)?;
        }
        Ok(())
    }

    /// Line format: header `n p`, vertex lines `v x₁ … x_n`, simplex lines
    /// `s i₀ … i_p mult` with 0-based vertex indices; `#` starts a comment.
    pub fn parse(text: &str) -> Result<Self> {
        let parse_err = |line: usize, message: String| Error::Parse { location: format!("line {line}"), message };
        let mut header: Option<(usize, usize)> = None;
        let mut vertices = Vec::new();
        let mut simplices = Vec::new();
        for (ln, raw) in text.lines().enumerate() {
            let ln = ln + 1;
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let tokens: Vec<&str> = line.split_whitespace().collect();
            let Some((n, p)) = header else {
                if tokens.len() != 2 {
                    return Err(parse_err(ln, "expected header `n p`".into()));
                }
                let n = tokens[0].parse().map_err(|_| parse_err(ln, format!("bad dimension `{}`", tokens[0])))?;
                let p = tokens[1].parse().map_err(|_| parse_err(ln, format!("bad degree `{}`", tokens[1])))?;
                header = Some((n, p));
                continue;
            };
            match tokens[0] {
                "v" => {
                    if tokens.len() != n + 1 {
                        return Err(parse_err(ln, format!("vertex needs {n} coordinates, got {}", tokens.len() - 1)));
                    }
                    let coords = tokens[1..]
                        .iter()
                        .map(|t| t.parse::<f64>().map_err(|_| parse_err(ln, format!("bad coordinate `{t}`"))))
                        .collect::<Result<Vec<f64>>>()?;
                    vertices.push(coords);
                }
                "s" => {
                    if tokens.len() != p + 3 {
                        return Err(parse_err(ln, format!("simplex needs {} indices and a multiplicity", p + 1)));
                    }
                    let idx = tokens[1..=p + 1]
                        .iter()
                        .map(|t| t.parse::<usize>().map_err(|_| parse_err(ln, format!("bad vertex index `{t}`"))))
                        .collect::<Result<Vec<usize>>>()?;
                    let m = tokens[p + 2];
                    let multiplicity = m.parse().map_err(|_| parse_err(ln, format!("bad multiplicity `{m}`")))?;
                    simplices.push(Simplex { vertices: idx, multiplicity });
                }
                other => return Err(parse_err(ln, format!("unknown record `{other}`"))),
            }
        }
        let (n, p) = header.ok_or_else(|| parse_err(0, "empty mesh".into()))?;
        Self::new(n, p, vertices, simplices)
    }

    pub fn to_mesh_string(&self) -> String {
        let mut out = format!("{} {}\n", self.n, self.p);
        for v in &self.vertices {
            out.push('v');
            for x in v {
                let _ = write!(out, " {x:?}");
            }
            out.push('\n');
        }
        for s in &self.simplices {
            out.push('s');
            for i in &s.vertices {
                let _ = write!(out, " {i}");
            }
            let _ = writeln!(out, " {:?}", s.multiplicity);
        }
        out
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Violation {
    pub simplex: usize,
    pub multiplicity: f64,
    pub phi: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct PositivityCheck {
    pub positive: bool,
    pub violations: Vec<Violation>,
}

/// Every simplex has positive multiplicity and `φ(ξ) ≥ 1 − tol`.
pub fn phi_positive_check(t: &PolyhedralCurrent, cal: &Calibration, tol: f64) -> Result<PositivityCheck> {
    check_dim(t.n(), cal.n())?;
    let mut violations = Vec::new();
    for k in 0..t.len() {
        let m = t.simplices[k].multiplicity;
        let phi = cal.form.pairing(&t.tangent(k))?;
        if m < 0.0 || phi < 1.0 - tol {
            violations.push(Violation { simplex: k, multiplicity: m, phi });
        }
    }
    Ok(PositivityCheck { positive: violations.is_empty(), violations })
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct CalibrationGap {
    pub tphi: f64,
    pub mass: f64,
    pub gap: f64,
}

/// `M(T) − T(φ)`, non-negative when `φ` has comass one.
pub fn calibration_gap(t: &PolyhedralCurrent, cal: &Calibration) -> Result<CalibrationGap> {
    let tphi = t.evaluate_constant(&cal.form)?;
    let mass = t.mass();
    Ok(CalibrationGap { tphi, mass, gap: mass - tphi })
}
