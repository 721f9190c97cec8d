//! Simplex and interval quadrature rules.

use nalgebra::DMatrix;

/// Grundmann–Möller rule of degree `2s + 1` on a `dim`-simplex, as
/// `(barycentric coordinates, weight)` with weights summing to one.
pub fn grundmann_moller(dim: usize, s: usize) -> Vec<(Vec<f64>, f64)> {
    let d = 2 * s + 1;
    let mut out = Vec::new();
    let fact = |k: usize| (1..=k).fold(1.0f64, |a, b| a * b as f64);
    let norm = fact(dim);
    for i in 0..=s {
        let denom = (d + dim - 2 * i) as f64;
        let sign = if i % 2 == 0 { 1.0 } else { -1.0 };
        let w = sign * 2f64.powi(-2 * s as i32) * denom.powi(d as i32) / (fact(i) * fact(d + dim - i)) * norm;
        for beta in compositions(s - i, dim + 1) {
            let bary = beta.iter().map(|&b| (2 * b + 1) as f64 / denom).collect();
            out.push((bary, w));
        }
    }
    out
}

/// All `parts`-tuples of non-negative integers summing to `total`.
fn compositions(total: usize, parts: usize) -> Vec<Vec<usize>> {
    if parts == 1 {
        return vec![vec![total]];
    }
    let mut out = Vec::new();
    for first in 0..=total {
        for mut rest in compositions(total - first, parts - 1) {
            rest.insert(0, first);
            out.push(rest);
        }
    }
    out
}

/// Gauss–Legendre nodes and weights on `[0, 1]` (Golub–Welsch).
pub fn gauss_legendre(m: usize) -> Vec<(f64, f64)> {
    let mut jac = DMatrix::zeros(m, m);
    for k in 1..m {
        let kf = k as f64;
        let b = kf / (4.0 * kf * kf - 1.0).sqrt();
        jac[(k, k - 1)] = b;
        jac[(k - 1, k)] = b;
    }
    let eig = jac.symmetric_eigen();
    let mut nodes: Vec<(f64, f64)> = (0..m)
        .map(|i| {
            let v0 = eig.eigenvectors[(0, i)];
            (0.5 * (eig.eigenvalues[i] + 1.0), v0 * v0)
        })
        .collect();
    nodes.sort_by(|a, b| a.0.total_cmp(&b.0));
    nodes
}

/// Rule on `[0, 1]` for integrands with an integrable singularity at `0`:
/// Gauss–Legendre on dyadic intervals `[2^{-k-1}, 2^{-k}]`.
pub fn graded_rule(levels: usize, m: usize) -> Vec<(f64, f64)> {
    let base = gauss_legendre(m);
    let mut out = Vec::with_capacity(levels * m);
    for k in 0..levels {
        let hi = 0.5f64.powi(k as i32);
        let lo = 0.5 * hi;
        for &(t, w) in &base {
            out.push((lo + (hi - lo) * t, (hi - lo) * w));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn factorial(k: u32) -> f64 {
        (1..=k).fold(1.0, |a, b| a * b as f64)
    }

    #[test]
    fn gm_integrates_monomials_on_the_reference_triangle() {
        // ∫ x^a y^b over {x, y ≥ 0, x + y ≤ 1} = a! b! / (a + b + 2)!
        for s in 0..5usize {
            let rule = grundmann_moller(2, s);
            let total: f64 = rule.iter().map(|r| r.1).sum();
            assert!((total - 1.0).abs() < 1e-12);
            for a in 0..=(2 * s as u32 + 1) {
                for b in 0..=(2 * s as u32 + 1 - a) {
                    let q: f64 = 0.5 * rule.iter().map(|(l, w)| w * l[1].powi(a as i32) * l[2].powi(b as i32)).sum::<f64>();
                    let exact = factorial(a) * factorial(b) / factorial(a + b + 2);
                    assert!((q - exact).abs() < 1e-13, "s={s} a={a} b={b}");
                }
            }
        }
    }

    #[test]
    fn gm_on_tetrahedra() {
        let rule = grundmann_moller(3, 2);
        let q: f64 = rule.iter().map(|(l, w)| w * l[1] * l[1] * l[2] * l[3]).sum::<f64>() / 6.0;
        // 2! 1! 1! / 7!
        assert!((q - 2.0 / 5040.0).abs() < 1e-15);
    }

    #[test]
    fn legendre_and_graded() {
        let r = gauss_legendre(5);
        let q: f64 = r.iter().map(|(t, w)| w * t.powi(9)).sum();
        assert!((q - 0.1).abs() < 1e-14);
        let g = graded_rule(40, 8);
        let q: f64 = g.iter().map(|(t, w)| w * t * t.ln()).sum();
        assert!((q + 0.25).abs() < 1e-13);
    }
}
