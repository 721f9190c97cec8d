//! Real polynomials in `n` variables and forms with polynomial coefficients.

use std::collections::BTreeMap;
use std::fmt;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{check_dim, Error, Result};
use crate::exterior::combinatorics::{combinations, sort_with_sign};
use crate::exterior::ExteriorElement;

/// Sparse polynomial keyed by exponent vectors.
#[derive(Clone, Debug, PartialEq)]
pub struct Polynomial {
    n: usize,
    terms: BTreeMap<Vec<u32>, f64>,
}

/// JSON shape: `{"n": 4, "terms": [{"exponents": [2,0,0,0], "coeff": 1.0}]}`.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PolynomialSpec {
    pub n: usize,
    pub terms: Vec<MonomialSpec>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MonomialSpec {
    pub exponents: Vec<u32>,
    pub coeff: f64,
}

impl Polynomial {
    pub fn zero(n: usize) -> Self {
        Self { n, terms: BTreeMap::new() }
    }

    pub fn constant(n: usize, c: f64) -> Self {
        let mut p = Self::zero(n);
        p.add_term(vec![0; n], c);
        p
    }

    pub fn variable(n: usize, i: usize) -> Self {
        let mut e = vec![0; n];
        e[i] = 1;
        Self::monomial(e, 1.0)
    }

    pub fn monomial(exponents: Vec<u32>, c: f64) -> Self {
        let mut p = Self::zero(exponents.len());
        p.add_term(exponents, c);
        p
    }

    pub fn from_spec(spec: &PolynomialSpec) -> Result<Self> {
        let mut p = Self::zero(spec.n);
        for t in &spec.terms {
            check_dim(spec.n, t.exponents.len())?;
            if !t.coeff.is_finite() {
                return Err(Error::InvalidField("non-finite coefficient".into()));
            }
            p.add_term(t.exponents.clone(), t.coeff);
        }
        Ok(p)
    }

    pub fn to_spec(&self) -> PolynomialSpec {
        PolynomialSpec {
            n: self.n,
            terms: self
                .terms
                .iter()
                .map(|(e, &c)| MonomialSpec { exponents: e.clone(), coeff: c })
                .collect(),
        }
    }

    fn add_term(&mut self, exponents: Vec<u32>, c: f64) {
        if c == 0.0 {
            return;
        }
        let entry = self.terms.entry(exponents).or_insert(0.0);
        *entry += c;
        if *entry == 0.0 {
            self.terms.retain(|_, v| *v != 0.0);
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn terms(&self) -> impl Iterator<Item = (&[u32], f64)> {
        self.terms.iter().map(|(e, &c)| (e.as_slice(), c))
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn degree(&self) -> u32 {
        self.terms.keys().map(|e| e.iter().sum()).max().unwrap_or(0)
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        self.terms
            .iter()
            .map(|(e, &c)| c * e.iter().zip(x).map(|(&k, &xi)| xi.powi(k as i32)).product::<f64>())
            .sum()
    }

    pub fn derivative(&self, i: usize) -> Self {
        let mut out = Self::zero(self.n);
        for (e, &c) in &self.terms {
            if e[i] == 0 {
                continue;
            }
            let mut d = e.clone();
            d[i] -= 1;
            out.add_term(d, c * e[i] as f64);
        }
        out
    }

    pub fn gradient(&self, x: &[f64]) -> DVector<f64> {
        DVector::from_fn(self.n, |i, _| self.derivative(i).eval(x))
    }

    pub fn hessian(&self, x: &[f64]) -> DMatrix<f64> {
        let first: Vec<Polynomial> = (0..self.n).map(|i| self.derivative(i)).collect();
        let mut h = DMatrix::zeros(self.n, self.n);
        for i in 0..self.n {
            for j in i..self.n {
                let v = first[i].derivative(j).eval(x);
                h[(i, j)] = v;
                h[(j, i)] = v;
            }
        }
        h
    }

    pub fn scale(&self, s: f64) -> Self {
        let mut out = Self::zero(self.n);
        for (e, &c) in &self.terms {
            out.add_term(e.clone(), s * c);
        }
        out
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (e, &c) in &other.terms {
            out.add_term(e.clone(), c);
        }
        out
    }

    pub fn mul(&self, other: &Self) -> Self {
        let mut out = Self::zero(self.n);
        for (a, &ca) in &self.terms {
            for (b, &cb) in &other.terms {
                let e = a.iter().zip(b).map(|(x, y)| x + y).collect();
                out.add_term(e, ca * cb);
            }
        }
        out
    }

    /// Substitutes `x = base + Σ_k t_k·dirs[k]` and returns a polynomial in `t`.
    pub fn compose_affine(&self, base: &[f64], dirs: &[Vec<f64>]) -> Self {
        let m = dirs.len();
        let coords: Vec<Polynomial> = (0..self.n)
            .map(|i| {
                let mut p = Polynomial::constant(m, base[i]);
                for (k, d) in dirs.iter().enumerate() {
                    p = p.add(&Polynomial::variable(m, k).scale(d[i]));
                }
                p
            })
            .collect();
        let mut out = Polynomial::zero(m);
        for (e, &c) in &self.terms {
            let mut term = Polynomial::constant(m, c);
            for (i, &k) in e.iter().enumerate() {
                for _ in 0..k {
                    term = term.mul(&coords[i]);
                }
            }
            out = out.add(&term);
        }
        out
    }

    /// All exponent vectors of total degree at most `d`, graded then lexicographic.
    pub fn exponents_up_to(n: usize, d: u32) -> Vec<Vec<u32>> {
        let mut out = Vec::new();
        for total in 0..=d {
            let mut cur = vec![0u32; n];
            fill_exponents(&mut cur, 0, total, &mut out);
        }
        out
    }
}

fn fill_exponents(cur: &mut Vec<u32>, i: usize, left: u32, out: &mut Vec<Vec<u32>>) {
    let n = cur.len();
    if n == 0 {
        if left == 0 {
            out.push(Vec::new());
        }
        return;
    }
    if i == n - 1 {
        cur[i] = left;
        out.push(cur.clone());
        cur[i] = 0;
        return;
    }
    for k in (0..=left).rev() {
        cur[i] = k;
        fill_exponents(cur, i + 1, left - k, out);
    }
    cur[i] = 0;
}

impl fmt::Display for Polynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let mut first = true;
        for (e, &c) in &self.terms {
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            write!(f, "{c}")?;
            for (i, &k) in e.iter().enumerate() {
                match k {
                    0 => {}
                    1 => write!(f, "·x{}", i + 1)?,
                    _ => write!(f, "·x{}^{k}", i + 1)?,
                }
            }
        }
        Ok(())
    }
}

/// A `p`-form on `R^n` with polynomial coefficients, keyed by increasing
/// 0-based multi-indices.
#[derive(Clone, Debug, PartialEq)]
pub struct PolyForm {
    n: usize,
    p: usize,
    coeffs: BTreeMap<Vec<usize>, Polynomial>,
}

impl PolyForm {
    pub fn zero(n: usize, p: usize) -> Self {
        Self { n, p, coeffs: BTreeMap::new() }
    }

    /// `f · dx_I`; `indices` may be unsorted (sign applied) but not repeated.
    pub fn term(f: Polynomial, indices: &[usize]) -> Result<Self> {
        let n = f.n();
        let mut idx = indices.to_vec();
        if idx.iter().any(|&i| i >= n) {
            return Err(Error::InvalidIndex { indices: indices.to_vec(), n, p: indices.len() });
        }
        let sign = sort_with_sign(&mut idx)
            .ok_or_else(|| Error::InvalidIndex { indices: indices.to_vec(), n, p: indices.len() })?;
        let mut out = Self::zero(n, idx.len());
        if !f.is_zero() {
            out.coeffs.insert(idx, f.scale(sign));
        }
        Ok(out)
    }

    /// Constant form times a polynomial.
    pub fn from_constant(form: &ExteriorElement, f: &Polynomial) -> Result<Self> {
        check_dim(form.n(), f.n())?;
        let mut out = Self::zero(form.n(), form.p());
        for (idx, c) in form.terms() {
            out.add_coeff(idx.to_vec(), f.scale(c));
        }
        Ok(out)
    }

    fn add_coeff(&mut self, idx: Vec<usize>, f: Polynomial) {
        let sum = match self.coeffs.get(&idx) {
            Some(g) => g.add(&f),
            None => f,
        };
        if sum.is_zero() {
            self.coeffs.remove(&idx);
        } else {
            self.coeffs.insert(idx, sum);
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn p(&self) -> usize {
        self.p
    }

    pub fn terms(&self) -> impl Iterator<Item = (&[usize], &Polynomial)> {
        self.coeffs.iter().map(|(i, f)| (i.as_slice(), f))
    }

    pub fn degree(&self) -> u32 {
        self.coeffs.values().map(|f| f.degree()).max().unwrap_or(0)
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        check_dim(self.n, other.n)?;
        if self.p != other.p {
            return Err(Error::DegreeMismatch { expected: self.p, got: other.p });
        }
        let mut out = self.clone();
        for (idx, f) in &other.coeffs {
            out.add_coeff(idx.clone(), f.clone());
        }
        Ok(out)
    }

    pub fn scale(&self, s: f64) -> Self {
        let mut out = Self::zero(self.n, self.p);
        for (idx, f) in &self.coeffs {
            out.add_coeff(idx.clone(), f.scale(s));
        }
        out
    }

    /// Pointwise value as a constant form.
    pub fn eval(&self, x: &[f64]) -> ExteriorElement {
        let terms: Vec<(Vec<usize>, f64)> = self.coeffs.iter().map(|(i, f)| (i.clone(), f.eval(x))).collect();
        ExteriorElement::from_terms(self.n, self.p, terms).expect("stored indices are valid")
    }

    /// Exterior derivative `d(f dx_I) = Σ_i ∂_i f dx_i ∧ dx_I`.
    pub fn d(&self) -> Result<Self> {
        if self.p >= self.n {
            return Ok(Self::zero(self.n, self.p + 1));
        }
        let mut out = Self::zero(self.n, self.p + 1);
        for (idx, f) in &self.coeffs {
            for i in 0..self.n {
                if idx.contains(&i) {
                    continue;
                }
                let df = f.derivative(i);
                if df.is_zero() {
                    continue;
                }
                let mut new = Vec::with_capacity(idx.len() + 1);
                new.push(i);
                new.extend_from_slice(idx);
                let sign = sort_with_sign(&mut new).expect("distinct indices");
                out.add_coeff(new, df.scale(sign));
            }
        }
        Ok(out)
    }

    /// Every monomial times every basis `p`-form, for the given total degree.
    pub fn monomial_basis(n: usize, p: usize, deg: u32) -> Vec<Self> {
        let mut out = Vec::new();
        for idx in combinations(n, p) {
            for e in Polynomial::exponents_up_to(n, deg) {
                out.push(Self::term(Polynomial::monomial(e, 1.0), &idx).expect("valid basis"));
            }
        }
        out
    }
}
