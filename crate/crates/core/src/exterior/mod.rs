//! Exterior algebra over `R^n` in the lexicographic multi-index basis.
//!
//! A single type, [`ExteriorElement`], carries both constant `p`-forms and
//! `p`-vectors: the Euclidean metric identifies `Λ^p` with `Λ_p`, so the
//! pairing `α(ξ)` is the inner product of coefficient maps. Indices are
//! 0-based internally; the JSON form spec uses 1-based indices.

pub mod combinatorics;
mod json;
mod plane;

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use nalgebra::DMatrix;

use crate::error::{check_dim, Error, Result};
use combinatorics::{binomial, combinations, rank, shuffle_sign, sort_with_sign};

pub use json::{FormSpec, TermSpec};
pub use plane::{simple_from_frame, SimplePlane, ORTHONORMAL_TOL};

/// Coefficients smaller than this are dropped by [`ExteriorElement::normalize`].
pub const DROP_TOL: f64 = 1e-14;

#[derive(Clone, Debug, PartialEq)]
pub struct ExteriorElement {
    n: usize,
    p: usize,
    coeffs: BTreeMap<Vec<usize>, f64>,
}

impl ExteriorElement {
    pub fn zero(n: usize, p: usize) -> Self {
        assert!(p <= n, "degree {p} exceeds dimension {n}");
        Self { n, p, coeffs: BTreeMap::new() }
    }

    pub fn scalar(n: usize, c: f64) -> Self {
        let mut e = Self::zero(n, 0);
        e.coeffs.insert(Vec::new(), c);
        e.normalize();
        e
    }

    /// Builds an element from `(indices, coeff)` pairs; indices must be
    /// strictly increasing and below `n`. Repeated tuples are summed.
    pub fn from_terms<I>(n: usize, p: usize, terms: I) -> Result<Self>
    where
        I: IntoIterator<Item = (Vec<usize>, f64)>,
    {
        if p > n {
            return Err(Error::DegreeOverflow { p, q: 0, n });
        }
        let mut e = Self::zero(n, p);
        for (idx, c) in terms {
            let valid = idx.len() == p
                && idx.windows(2).all(|w| w[0] < w[1])
                && idx.last().map_or(true, |&last| last < n);
            if !valid {
                return Err(Error::InvalidIndex { indices: idx, n, p });
            }
            *e.coeffs.entry(idx).or_insert(0.0) += c;
        }
        e.normalize();
        Ok(e)
    }

    /// The basis element `dx_{i_1} ∧ … ∧ dx_{i_p}` for arbitrary (possibly
    /// unsorted) indices; repeated indices give zero.
    pub fn basis(n: usize, indices: &[usize]) -> Result<Self> {
        let p = indices.len();
        if p > n || indices.iter().any(|&i| i >= n) {
            return Err(Error::InvalidIndex { indices: indices.to_vec(), n, p });
        }
        let mut idx = indices.to_vec();
        let mut e = Self::zero(n, p);
        if let Some(sign) = sort_with_sign(&mut idx) {
            e.coeffs.insert(idx, sign);
        }
        Ok(e)
    }

    pub fn vector(v: &[f64]) -> Self {
        let n = v.len();
        let mut e = Self::zero(n, 1);
        for (i, &c) in v.iter().enumerate() {
            e.coeffs.insert(vec![i], c);
        }
        e.normalize();
        e
    }

    pub fn volume(n: usize) -> Self {
        let mut e = Self::zero(n, n);
        e.coeffs.insert((0..n).collect(), 1.0);
        e
    }

    /// Element from a dense coefficient array in lexicographic order.
    pub fn from_dense(n: usize, p: usize, dense: &[f64]) -> Self {
        assert_eq!(dense.len(), binomial(n, p));
        let mut e = Self::zero(n, p);
        for (idx, &c) in combinations(n, p).into_iter().zip(dense) {
            e.coeffs.insert(idx, c);
        }
        e.normalize();
        e
    }

    pub fn to_dense(&self) -> Vec<f64> {
        let mut out = vec![0.0; binomial(self.n, self.p)];
        for (idx, &c) in &self.coeffs {
            out[rank(idx, self.n)] = c;
        }
        out
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn p(&self) -> usize {
        self.p
    }

    pub fn coeff(&self, indices: &[usize]) -> f64 {
        self.coeffs.get(indices).copied().unwrap_or(0.0)
    }

    pub fn terms(&self) -> impl Iterator<Item = (&[usize], f64)> {
        self.coeffs.iter().map(|(k, &v)| (k.as_slice(), v))
    }

    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.values().all(|c| c.abs() <= DROP_TOL)
    }

    pub fn normalize(&mut self) {
        self.normalize_with(DROP_TOL);
    }

    pub fn normalize_with(&mut self, tol: f64) {
        self.coeffs.retain(|_, c| c.abs() > tol);
    }

    pub fn scale(&self, s: f64) -> Self {
        let mut e = self.clone();
        e.coeffs.values_mut().for_each(|c| *c *= s);
        e.normalize();
        e
    }

    fn combine(&self, other: &Self, s: f64) -> Result<Self> {
        check_dim(self.n, other.n)?;
        if self.p != other.p {
            return Err(Error::DegreeMismatch { expected: self.p, got: other.p });
        }
        let mut e = self.clone();
        for (idx, &c) in &other.coeffs {
            *e.coeffs.entry(idx.clone()).or_insert(0.0) += s * c;
        }
        e.normalize();
        Ok(e)
    }

    pub fn try_add(&self, other: &Self) -> Result<Self> {
        self.combine(other, 1.0)
    }

    pub fn try_sub(&self, other: &Self) -> Result<Self> {
        self.combine(other, -1.0)
    }

    /// Euclidean inner product of coefficient maps, i.e. the evaluation `α(ξ)`.
    pub fn pairing(&self, other: &Self) -> Result<f64> {
        check_dim(self.n, other.n)?;
        if self.p != other.p {
            return Err(Error::DegreeMismatch { expected: self.p, got: other.p });
        }
        let (small, large) = if self.len() <= other.len() { (self, other) } else { (other, self) };
        Ok(small
            .coeffs
            .iter()
            .map(|(idx, c)| c * large.coeff(idx))
            .sum())
    }

    pub fn norm(&self) -> f64 {
        self.coeffs.values().map(|c| c * c).sum::<f64>().sqrt()
    }

    pub fn wedge(&self, other: &Self) -> Result<Self> {
        check_dim(self.n, other.n)?;
        let q = self.p + other.p;
        if q > self.n {
            return Err(Error::DegreeOverflow { p: self.p, q: other.p, n: self.n });
        }
        let mut out = Self::zero(self.n, q);
        for (a, &ca) in &self.coeffs {
            for (b, &cb) in &other.coeffs {
                if a.iter().any(|i| b.binary_search(i).is_ok()) {
                    continue;
                }
                let sign = shuffle_sign(a, b);
                let mut idx: Vec<usize> = a.iter().chain(b.iter()).copied().collect();
                idx.sort_unstable();
                *out.coeffs.entry(idx).or_insert(0.0) += sign * ca * cb;
            }
        }
        out.normalize();
        Ok(out)
    }

    /// Interior product `v ⌟ self`, inserting `v` into the first slot.
    pub fn interior(&self, v: &[f64]) -> Result<Self> {
        check_dim(self.n, v.len())?;
        if self.p == 0 {
            return Err(Error::ContractScalar);
        }
        let mut out = Self::zero(self.n, self.p - 1);
        for (idx, &c) in &self.coeffs {
            for (slot, &i) in idx.iter().enumerate() {
                if v[i] == 0.0 {
                    continue;
                }
                let sign = if slot % 2 == 0 { 1.0 } else { -1.0 };
                let mut rest = idx.clone();
                rest.remove(slot);
                *out.coeffs.entry(rest).or_insert(0.0) += sign * v[i] * c;
            }
        }
        out.normalize();
        Ok(out)
    }

    /// Extends the endomorphism `a` to `Λ^p` as a derivation acting on the
    /// one-form slots: `dx_i ↦ Σ_j a[(i, j)] dx_j` in each slot in turn.
    pub fn derivation_extend(&self, a: &DMatrix<f64>) -> Result<Self> {
        check_dim(self.n, a.nrows())?;
        check_dim(self.n, a.ncols())?;
        let mut out = Self::zero(self.n, self.p);
        for (idx, &c) in &self.coeffs {
            for slot in 0..idx.len() {
                let i = idx[slot];
                for j in 0..self.n {
                    let aij = a[(i, j)];
                    if aij == 0.0 {
                        continue;
                    }
                    let mut new = idx.clone();
                    new[slot] = j;
                    if let Some(sign) = sort_with_sign(&mut new) {
                        *out.coeffs.entry(new).or_insert(0.0) += sign * aij * c;
                    }
                }
            }
        }
        out.normalize();
        Ok(out)
    }

    pub fn hodge_star(&self) -> Self {
        let n = self.n;
        let mut out = Self::zero(n, n - self.p);
        for (idx, &c) in &self.coeffs {
            let comp: Vec<usize> = (0..n).filter(|i| idx.binary_search(i).is_err()).collect();
            let sign = shuffle_sign(idx, &comp);
            out.coeffs.insert(comp, sign * c);
        }
        out
    }

    /// Plücker test: `max_i ‖(e_i ⌟ ξ) ∧ ξ‖ / ‖ξ‖² ≤ tol`.
    pub fn is_simple(&self, tol: f64) -> Result<bool> {
        let nrm2 = self.norm().powi(2);
        if nrm2 == 0.0 {
            return Err(Error::ZeroElement);
        }
        if self.p <= 1 || 2 * self.p - 1 > self.n {
            return Ok(true);
        }
        let mut worst: f64 = 0.0;
        let mut e = vec![0.0; self.n];
        for i in 0..self.n {
            e[i] = 1.0;
            let w = self.interior(&e)?.wedge(self)?;
            worst = worst.max(w.norm() / nrm2);
            e[i] = 0.0;
        }
        Ok(worst <= tol)
    }

    /// Evaluates the form on `p` vectors: `Σ_I c_I det(V[I, :])`.
    pub fn evaluate(&self, vectors: &[&[f64]]) -> Result<f64> {
        if vectors.len() != self.p {
            return Err(Error::DegreeMismatch { expected: self.p, got: vectors.len() });
        }
        for v in vectors {
            check_dim(self.n, v.len())?;
        }
        let p = self.p;
        let mut total = 0.0;
        let mut m = DMatrix::<f64>::zeros(p, p);
        for (idx, &c) in &self.coeffs {
            for (r, &i) in idx.iter().enumerate() {
                for (col, v) in vectors.iter().enumerate() {
                    m[(r, col)] = v[i];
                }
            }
            total += c * if p == 0 { 1.0 } else { m.determinant() };
        }
        Ok(total)
    }

    /// Pullback along the linear map whose columns are the images of the
    /// basis vectors of `R^m`: `(L^*φ)(w_1, …) = φ(L w_1, …)`.
    pub fn pullback(&self, l: &DMatrix<f64>) -> Result<Self> {
        check_dim(self.n, l.nrows())?;
        let m = l.ncols();
        if self.p > m {
            return Err(Error::DegreeOverflow { p: self.p, q: 0, n: m });
        }
        let cols: Vec<Vec<f64>> = (0..m).map(|j| l.column(j).iter().copied().collect()).collect();
        let mut out = Self::zero(m, self.p);
        for idx in combinations(m, self.p) {
            let vs: Vec<&[f64]> = idx.iter().map(|&j| cols[j].as_slice()).collect();
            let v = self.evaluate(&vs)?;
            out.coeffs.insert(idx, v);
        }
        out.normalize();
        Ok(out)
    }
}

impl fmt::Display for ExteriorElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.coeffs.is_empty() {
            return write!(f, "0");
        }
        let mut first = true;
        for (idx, c) in &self.coeffs {
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            let name: Vec<String> = idx.iter().map(|i| format!("dx{}", i + 1)).collect();
            if name.is_empty() {
                write!(f, "{c}")?;
            } else {
                write!(f, "{c}·{}", name.join("∧"))?;
            }
        }
        Ok(())
    }
}

impl Add for &ExteriorElement {
    type Output = ExteriorElement;
    fn add(self, rhs: Self) -> ExteriorElement {
        self.try_add(rhs).expect("incompatible exterior elements")
    }
}

impl Sub for &ExteriorElement {
    type Output = ExteriorElement;
    fn sub(self, rhs: Self) -> ExteriorElement {
        self.try_sub(rhs).expect("incompatible exterior elements")
    }
}

impl Neg for &ExteriorElement {
    type Output = ExteriorElement;
    fn neg(self) -> ExteriorElement {
        self.scale(-1.0)
    }
}

impl Mul<&ExteriorElement> for f64 {
    type Output = ExteriorElement;
    fn mul(self, rhs: &ExteriorElement) -> ExteriorElement {
        rhs.scale(self)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn dx(n: usize, idx: &[usize]) -> ExteriorElement {
        ExteriorElement::basis(n, idx).unwrap()
    }

    fn kahler4() -> ExteriorElement {
        &dx(4, &[0, 1]) + &dx(4, &[2, 3])
    }

    #[test]
    fn wedge_examples() {
        let w = dx(4, &[0, 1]).wedge(&dx(4, &[2, 3])).unwrap();
        assert_eq!(w.coeff(&[0, 1, 2, 3]), 1.0);
        assert!(dx(4, &[0]).wedge(&dx(4, &[0])).unwrap().is_zero());
        let om = kahler4();
        let w2 = om.wedge(&om).unwrap();
        assert_eq!(w2.len(), 1);
        assert_eq!(w2.coeff(&[0, 1, 2, 3]), 2.0);
    }

    #[test]
    fn wedge_errors() {
        assert!(matches!(
            dx(4, &[0]).wedge(&dx(3, &[0])),
            Err(Error::DimensionMismatch { .. })
        ));
        assert!(matches!(
            dx(3, &[0, 1]).wedge(&dx(3, &[1, 2])),
            Err(Error::DegreeOverflow { .. })
        ));
    }

    #[test]
    fn interior_examples() {
        let a = dx(4, &[0, 1]);
        assert_eq!(a.interior(&[1., 0., 0., 0.]).unwrap(), dx(4, &[1]));
        assert_eq!(a.interior(&[0., 1., 0., 0.]).unwrap(), dx(4, &[0]).scale(-1.0));
        assert!(a.interior(&[0., 0., 1., 0.]).unwrap().is_zero());
        assert!(matches!(
            ExteriorElement::scalar(4, 1.0).interior(&[1., 0., 0., 0.]),
            Err(Error::ContractScalar)
        ));
    }

    #[test]
    fn derivation_examples() {
        let om = kahler4();
        let id = DMatrix::<f64>::identity(4, 4);
        assert_eq!(om.derivation_extend(&id).unwrap(), om.scale(2.0));
        let a = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![1., 0., 0., 0.]));
        assert_eq!(dx(4, &[0, 1]).derivation_extend(&a).unwrap(), dx(4, &[0, 1]));
        let b = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![2., -2., 0., 0.]));
        let h = om.derivation_extend(&b).unwrap();
        assert_eq!(h.pairing(&dx(4, &[0, 1])).unwrap(), 0.0);
    }

    #[test]
    fn pairing_examples() {
        assert_eq!(dx(4, &[0, 1]).pairing(&dx(4, &[0, 1])).unwrap(), 1.0);
        assert_eq!(dx(4, &[0, 1]).pairing(&dx(4, &[0, 2])).unwrap(), 0.0);
        let theta: f64 = 0.7;
        let (_, xi) = simple_from_frame(&[
            vec![1., 0., 0., 0.],
            vec![0., theta.cos(), theta.sin(), 0.],
        ])
        .unwrap();
        assert!((kahler4().pairing(&xi).unwrap() - theta.cos()).abs() < 1e-14);
    }

    #[test]
    fn hodge_examples() {
        assert_eq!(dx(4, &[0, 1]).hodge_star(), dx(4, &[2, 3]));
        assert_eq!(ExteriorElement::scalar(5, 1.0).hodge_star(), ExteriorElement::volume(5));
        let a = &dx(5, &[0, 2]) + &dx(5, &[1, 4]).scale(3.0);
        let ss = a.hodge_star().hodge_star();
        let sign = if (2 * 3) % 2 == 0 { 1.0 } else { -1.0 };
        assert_eq!(ss, a.scale(sign));
        let b = dx(4, &[1]).scale(2.0);
        let bb = b.hodge_star().hodge_star();
        assert_eq!(bb, b.scale(-1.0));
    }

    #[test]
    fn simplicity_examples() {
        assert!(dx(4, &[0, 1]).is_simple(1e-10).unwrap());
        assert!(!kahler4().is_simple(1e-10).unwrap());
        let f = &dx(4, &[0, 1]) + &dx(4, &[0, 2]);
        assert!(f.is_simple(1e-10).unwrap());
        assert!(matches!(ExteriorElement::zero(4, 2).is_simple(1e-10), Err(Error::ZeroElement)));
    }

    #[test]
    fn from_terms_rejects_bad_indices() {
        assert!(ExteriorElement::from_terms(4, 2, vec![(vec![1, 0], 1.0)]).is_err());
        assert!(ExteriorElement::from_terms(4, 2, vec![(vec![0, 4], 1.0)]).is_err());
        assert!(ExteriorElement::from_terms(4, 2, vec![(vec![0], 1.0)]).is_err());
    }

    #[test]
    fn pullback_by_identity_and_projection() {
        let om = kahler4();
        assert_eq!(om.pullback(&DMatrix::identity(4, 4)).unwrap(), om);
        // restriction to span(e1, e2) keeps only dx1∧dx2
        let l = DMatrix::from_column_slice(4, 2, &[1., 0., 0., 0., 0., 1., 0., 0.]);
        assert_eq!(om.pullback(&l).unwrap(), dx(2, &[0, 1]));
    }

    fn arb_element(n: usize, p: usize) -> impl Strategy<Value = ExteriorElement> {
        proptest::collection::vec(-1.0f64..1.0, binomial(n, p))
            .prop_map(move |v| ExteriorElement::from_dense(n, p, &v))
    }

    proptest! {
        #[test]
        fn antiderivation(
            a in arb_element(6, 2),
            b in arb_element(6, 3),
            v in proptest::collection::vec(-1.0f64..1.0, 6),
        ) {
            let lhs = a.wedge(&b).unwrap().interior(&v).unwrap();
            let r1 = a.interior(&v).unwrap().wedge(&b).unwrap();
            let r2 = a.wedge(&b.interior(&v).unwrap()).unwrap();
            let rhs = &r1 + &r2; // (-1)^{deg a} = +1 for deg 2
            prop_assert!((&lhs - &rhs).norm() < 1e-12);
        }

        #[test]
        fn antiderivation_odd(
            a in arb_element(5, 1),
            b in arb_element(5, 2),
            v in proptest::collection::vec(-1.0f64..1.0, 5),
        ) {
            let lhs = a.wedge(&b).unwrap().interior(&v).unwrap();
            let r1 = a.interior(&v).unwrap().wedge(&b).unwrap();
            let r2 = a.wedge(&b.interior(&v).unwrap()).unwrap();
            prop_assert!((&lhs - &(&r1 - &r2)).norm() < 1e-12);
        }

        #[test]
        fn pairing_symmetric_positive(a in arb_element(5, 2), b in arb_element(5, 2)) {
            prop_assert!((a.pairing(&b).unwrap() - b.pairing(&a).unwrap()).abs() < 1e-15);
            prop_assert!(a.pairing(&a).unwrap() >= 0.0);
            if !a.is_zero() {
                prop_assert!(a.pairing(&a).unwrap() > 0.0);
            }
        }

        #[test]
        fn hodge_wedge_identity(a in arb_element(5, 2), b in arb_element(5, 2)) {
            let lhs = a.wedge(&b.hodge_star()).unwrap();
            let rhs = ExteriorElement::volume(5).scale(a.pairing(&b).unwrap());
            prop_assert!((&lhs - &rhs).norm() < 1e-12);
        }

        #[test]
        fn frames_give_simple_vectors(
            raw in proptest::collection::vec(-1.0f64..1.0, 12),
        ) {
            let frame: Vec<Vec<f64>> = raw.chunks(6).map(|c| c.to_vec()).collect();
            if let Ok((_, xi)) = simple_from_frame(&frame) {
                prop_assert!(xi.is_simple(1e-10).unwrap());
                prop_assert!((xi.norm() - 1.0).abs() < 1e-10);
            }
        }
    }
}
