use nalgebra::{DMatrix, DVector};
use serde::ser::{Serialize, Serializer};

use super::combinatorics::combinations;
use super::ExteriorElement;
use crate::error::{Error, Result};

/// Orthonormality tolerance for stored frames.
pub const ORTHONORMAL_TOL: f64 = 1e-10;

/// An oriented `p`-plane in `R^n`, stored as an orthonormal frame (columns).
#[derive(Clone, Debug, PartialEq)]
pub struct SimplePlane {
    frame: DMatrix<f64>,
}

impl SimplePlane {
    /// Orthonormalizes the columns of `m` by modified Gram-Schmidt (two
    /// passes), which keeps the orientation of the input frame.
    pub fn from_matrix(m: &DMatrix<f64>) -> Result<Self> {
        let (n, p) = m.shape();
        if p > n {
            return Err(Error::DegreeOverflow { p, q: 0, n });
        }
        let mut q = m.clone();
        let scale = m.iter().fold(0.0f64, |a, x| a.max(x.abs())).max(1e-300);
        for j in 0..p {
            let original = m.column(j).norm();
            for _ in 0..2 {
                for i in 0..j {
                    let d = q.column(i).dot(&q.column(j));
                    let ci = q.column(i).clone_owned();
                    q.column_mut(j).axpy(-d, &ci, 1.0);
                }
            }
            let nrm = q.column(j).norm();
            if nrm <= 1e-10 * scale || nrm <= 1e-12 * original {
                return Err(Error::RankDeficient { pivot: nrm });
            }
            q.column_mut(j).scale_mut(1.0 / nrm);
        }
        Ok(Self { frame: q })
    }

    pub fn from_vectors(frame: &[Vec<f64>]) -> Result<Self> {
        let p = frame.len();
        let n = frame.first().map_or(0, |v| v.len());
        if frame.iter().any(|v| v.len() != n) {
            return Err(Error::DimensionMismatch { expected: n, got: 0 });
        }
        let m = DMatrix::from_fn(n, p, |i, j| frame[j][i]);
        Self::from_matrix(&m)
    }

    /// Coordinate plane spanned by `e_{i_1}, …, e_{i_p}` in the given order.
    pub fn coordinate(n: usize, indices: &[usize]) -> Self {
        let m = DMatrix::from_fn(n, indices.len(), |i, j| if indices[j] == i { 1.0 } else { 0.0 });
        Self::from_matrix(&m).expect("coordinate plane")
    }

    pub fn frame(&self) -> &DMatrix<f64> {
        &self.frame
    }

    pub fn n(&self) -> usize {
        self.frame.nrows()
    }

    pub fn p(&self) -> usize {
        self.frame.ncols()
    }

    pub fn vectors(&self) -> Vec<Vec<f64>> {
        (0..self.p()).map(|j| self.frame.column(j).iter().copied().collect()).collect()
    }

    /// Plücker coordinates: the unit simple `p`-vector `v_1 ∧ … ∧ v_p`.
    pub fn pvector(&self) -> ExteriorElement {
        let (n, p) = self.frame.shape();
        let mut dense = Vec::with_capacity(super::combinatorics::binomial(n, p));
        let mut m = DMatrix::<f64>::zeros(p, p);
        for idx in combinations(n, p) {
            for (r, &i) in idx.iter().enumerate() {
                for c in 0..p {
                    m[(r, c)] = self.frame[(i, c)];
                }
            }
            dense.push(if p == 0 { 1.0 } else { m.determinant() });
        }
        ExteriorElement::from_dense(n, p, &dense)
    }

    /// Orthogonal projection of `v` onto the span.
    pub fn project(&self, v: &[f64]) -> DVector<f64> {
        let v = DVector::from_column_slice(v);
        &self.frame * (self.frame.transpose() * v)
    }

    /// Principal angles to another plane of the same dimension, ascending.
    pub fn principal_angles(&self, other: &Self) -> Vec<f64> {
        let m = self.frame.transpose() * &other.frame;
        let mut cos: Vec<f64> = m.singular_values().iter().map(|&c| c.min(1.0)).collect();
        cos.sort_by(|a, b| b.partial_cmp(a).unwrap());
        // sines from the residual are accurate for small angles where acos is not
        let resid = &other.frame - &self.frame * m;
        let mut sin: Vec<f64> = resid.singular_values().iter().map(|&s| s.min(1.0)).collect();
        sin.sort_by(|a, b| a.partial_cmp(b).unwrap());
        sin.resize(cos.len(), 0.0);
        cos.iter().zip(&sin).map(|(&c, &s)| s.atan2(c)).collect()
    }

    /// Largest principal angle if the two frames induce the same orientation,
    /// `π` otherwise. Two planes are duplicates when this is below a tolerance.
    pub fn oriented_distance(&self, other: &Self) -> f64 {
        let m = self.frame.transpose() * &other.frame;
        if m.determinant() <= 0.0 {
            return std::f64::consts::PI;
        }
        self.principal_angles(other).last().copied().unwrap_or(0.0)
    }

    /// `‖(I - P)·e‖` summed over the columns of `other`: zero iff
    /// `span other ⊂ span self`.
    pub fn containment_gap(&self, vectors: &DMatrix<f64>) -> f64 {
        let proj = &self.frame * (self.frame.transpose() * vectors);
        (vectors - proj).norm()
    }

    pub fn is_orthonormal(&self, tol: f64) -> bool {
        let g = self.frame.transpose() * &self.frame;
        (g - DMatrix::identity(self.p(), self.p())).amax() <= tol
    }
}

/// Serialized as the list of frame vectors.
impl Serialize for SimplePlane {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.vectors().serialize(s)
    }
}

/// Orthonormalizes a frame (keeping orientation) and returns the plane and
/// its unit `p`-vector.
pub fn simple_from_frame(frame: &[Vec<f64>]) -> Result<(SimplePlane, ExteriorElement)> {
    let plane = SimplePlane::from_vectors(frame)?;
    let xi = plane.pvector();
    Ok((plane, xi))
}
