//! Independent reference computations shared by the integration tests. Nothing
//! here calls into the library's numerics; the helpers work on plain vectors.
#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn unit(n: usize, i: usize) -> Vec<f64> {
    let mut e = vec![0.0; n];
    e[i] = 1.0;
    e
}

/// Determinant by Gaussian elimination with partial pivoting.
pub fn det(mut m: Vec<Vec<f64>>) -> f64 {
    let k = m.len();
    let mut d = 1.0;
    for c in 0..k {
        let piv = (c..k).max_by(|&a, &b| m[a][c].abs().total_cmp(&m[b][c].abs())).unwrap();
        if m[piv][c] == 0.0 {
            return 0.0;
        }
        if piv != c {
            m.swap(piv, c);
            d = -d;
        }
        d *= m[c][c];
        for r in c + 1..k {
            let f = m[r][c] / m[c][c];
            for j in c..k {
                m[r][j] -= f * m[c][j];
            }
        }
    }
    d
}

/// `dx_I(v_1, …, v_p)`: the minor of the vectors on the rows `I` (0-based).
pub fn minor(indices: &[usize], vectors: &[Vec<f64>]) -> f64 {
    det(indices.iter().map(|&i| vectors.iter().map(|v| v[i]).collect()).collect())
}

/// Gram determinant `det(⟨a_i, b_j⟩)`, the pairing of `a_1∧…∧a_p` with `b_1∧…∧b_p`.
pub fn gram(a: &[Vec<f64>], b: &[Vec<f64>]) -> f64 {
    det(a.iter().map(|u| b.iter().map(|v| dot(u, v)).collect()).collect())
}

pub fn gaussian_vector(rng: &mut impl Rng, n: usize) -> Vec<f64> {
    (0..n)
        .map(|_| {
            // Box-Muller
            let u: f64 = rng.random_range(1e-12..1.0);
            let v: f64 = rng.random_range(0.0..1.0);
            (-2.0 * u.ln()).sqrt() * (std::f64::consts::TAU * v).cos()
        })
        .collect()
}

pub fn random_unit(rng: &mut impl Rng, n: usize) -> Vec<f64> {
    let v = gaussian_vector(rng, n);
    let r = dot(&v, &v).sqrt();
    v.into_iter().map(|x| x / r).collect()
}

/// Modified Gram-Schmidt.
pub fn orthonormalize(vectors: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let mut out: Vec<Vec<f64>> = Vec::new();
    for v in vectors {
        let mut w = v.clone();
        for q in &out {
            let c = dot(&w, q);
            for (wi, qi) in w.iter_mut().zip(q) {
                *wi -= c * qi;
            }
        }
        let r = dot(&w, &w).sqrt();
        out.push(w.into_iter().map(|x| x / r).collect());
    }
    out
}

pub fn random_frame(rng: &mut impl Rng, n: usize, p: usize) -> Vec<Vec<f64>> {
    orthonormalize(&(0..p).map(|_| gaussian_vector(rng, n)).collect::<Vec<_>>())
}

/// Complex structure for interleaved coordinates `(x₁, y₁, x₂, y₂, …)`.
pub fn j(v: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; v.len()];
    for k in 0..v.len() / 2 {
        out[2 * k] = -v[2 * k + 1];
        out[2 * k + 1] = v[2 * k];
    }
    out
}

/// Orthonormal frame `(u, Ju)` of the complex line through `u`.
pub fn complex_line(u: &[f64]) -> Vec<Vec<f64>> {
    orthonormalize(&[u.to_vec(), j(u)])
}

/// Distance from `v` to the span of the orthonormal `frame`.
pub fn distance_to_span(v: &[f64], frame: &[Vec<f64>]) -> f64 {
    let mut w = v.to_vec();
    for q in frame {
        let c = dot(v, q);
        for (wi, qi) in w.iter_mut().zip(q) {
            *wi -= c * qi;
        }
    }
    dot(&w, &w).sqrt()
}

/// Second difference of `f` along `v` at `x`.
pub fn second_difference(f: impl Fn(&[f64]) -> f64, x: &[f64], v: &[f64], h: f64) -> f64 {
    let at = |s: f64| -> f64 {
        let y: Vec<f64> = x.iter().zip(v).map(|(a, b)| a + s * b).collect();
        f(&y)
    };
    (at(h) - 2.0 * at(0.0) + at(-h)) / (h * h)
}

/// `Σ_k D²f(x)(e_k, e_k)` over an orthonormal frame by second differences.
pub fn frame_laplacian(f: impl Fn(&[f64]) -> f64, x: &[f64], frame: &[Vec<f64>], h: f64) -> f64 {
    frame.iter().map(|v| second_difference(&f, x, v, h)).sum()
}

/// Value of the quadratic `xᵀ A x + bᵀ x` with `A` given row-major.
pub fn quadratic(a: &[Vec<f64>], b: &[f64], x: &[f64]) -> f64 {
    let ax: f64 = a.iter().zip(x).map(|(row, xi)| xi * dot(row, x)).sum();
    ax + dot(b, x)
}
