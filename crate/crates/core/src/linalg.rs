//! Dense subspace utilities shared by the span, reduction and normality code.

use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

/// Default singular-value cutoff for rank decisions.
pub const RANK_CUTOFF: f64 = 1e-8;

/// Independent RNG stream for task `index` under a run seed.
pub fn stream_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

pub fn gaussian_matrix<R: rand::Rng>(rng: &mut R, rows: usize, cols: usize) -> DMatrix<f64> {
    DMatrix::from_fn(rows, cols, |_, _| StandardNormal.sample(rng))
}

pub fn unit_vector<R: rand::Rng>(rng: &mut R, n: usize) -> DVector<f64> {
    loop {
        let v = DVector::<f64>::from_fn(n, |_, _| StandardNormal.sample(rng));
        let nrm = v.norm();
        if nrm > 1e-8 {
            return v / nrm;
        }
    }
}

/// Orthonormal basis of the column span; singular values at or below
/// `cutoff · σ_max` are treated as zero. Returns a `rows × rank` matrix.
pub fn orthonormal_basis(columns: &DMatrix<f64>, cutoff: f64) -> DMatrix<f64> {
    let rows = columns.nrows();
    if columns.ncols() == 0 || rows == 0 {
        return DMatrix::zeros(rows, 0);
    }
    // for wide inputs the left basis of C is the right basis of Cᵀ
    let (u, sv) = if columns.ncols() > rows {
        let svd = columns.transpose().svd(false, true);
        (svd.v_t.expect("right singular vectors").transpose(), svd.singular_values)
    } else {
        let svd = columns.clone().svd(true, false);
        (svd.u.expect("left singular vectors"), svd.singular_values)
    };
    let smax = sv.iter().fold(0.0f64, |a, &b| a.max(b));
    if smax == 0.0 {
        return DMatrix::zeros(rows, 0);
    }
    let thresh = cutoff * smax;
    let keep: Vec<usize> = (0..sv.len()).filter(|&i| sv[i] > thresh).collect();
    let mut out = DMatrix::zeros(rows, keep.len());
    for (k, &i) in keep.iter().enumerate() {
        out.set_column(k, &u.column(i));
    }
    out
}

/// Numerical rank under the same convention as [`orthonormal_basis`].
pub fn rank(columns: &DMatrix<f64>, cutoff: f64) -> usize {
    orthonormal_basis(columns, cutoff).ncols()
}

/// Orthonormal basis of the orthogonal complement of an orthonormal basis.
pub fn complement(basis: &DMatrix<f64>) -> DMatrix<f64> {
    let n = basis.nrows();
    let proj = DMatrix::<f64>::identity(n, n) - basis * basis.transpose();
    let eig = proj.symmetric_eigen();
    let keep: Vec<usize> = (0..n).filter(|&i| eig.eigenvalues[i] > 0.5).collect();
    let mut out = DMatrix::zeros(n, keep.len());
    for (k, &i) in keep.iter().enumerate() {
        out.set_column(k, &eig.eigenvectors.column(i));
    }
    out
}

/// Sine of the largest principal angle between two subspaces given by
/// orthonormal bases; 1 when their dimensions differ.
pub fn subspace_mismatch(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    if a.ncols() != b.ncols() {
        return 1.0;
    }
    if a.ncols() == 0 {
        return 0.0;
    }
    let diff = a * a.transpose() - b * b.transpose();
    diff.singular_values().iter().fold(0.0f64, |m, &s| m.max(s))
}

/// Orthonormal basis `Q` of the column range of `[a | b]` with `(Q, Qᵀa, Qᵀb)`,
/// dropping singular values below `cutoff` relative to the largest. Linear
/// alternatives over `a z = b` depend on the rows only through this range,
/// and the compressed system has no degenerate pivots.
pub fn compress(a: &DMatrix<f64>, b: &DVector<f64>, cutoff: f64) -> (DMatrix<f64>, DMatrix<f64>, DVector<f64>) {
    let mut ab = DMatrix::zeros(a.nrows(), a.ncols() + 1);
    ab.columns_mut(0, a.ncols()).copy_from(a);
    ab.set_column(a.ncols(), b);
    let svd = ab.svd(true, false);
    let u = svd.u.expect("requested");
    let smax = svd.singular_values.iter().fold(0.0f64, |x, y| x.max(*y));
    let keep: Vec<usize> =
        (0..svd.singular_values.len()).filter(|&i| svd.singular_values[i] > cutoff * smax.max(1e-300)).collect();
    let q = DMatrix::from_fn(a.nrows(), keep.len(), |r, c| u[(r, keep[c])]);
    let qa = q.transpose() * a;
    let qb = q.transpose() * b;
    (q, qa, qb)
}

/// Least-squares fit `min ‖M c − h‖`; returns `(c, residual norm)`.
pub fn least_squares(m: &DMatrix<f64>, h: &DVector<f64>) -> (DVector<f64>, f64) {
    if m.ncols() == 0 {
        return (DVector::zeros(0), h.norm());
    }
    let svd = m.clone().svd(true, true);
    let smax = svd.singular_values.iter().fold(0.0f64, |a, &b| a.max(b));
    let c = svd
        .solve(h, RANK_CUTOFF * smax.max(1e-300))
        .unwrap_or_else(|_| DVector::zeros(m.ncols()));
    let r = (m * &c - h).norm();
    (c, r)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn basis_and_complement() {
        let c = DMatrix::from_column_slice(3, 3, &[1., 0., 0., 2., 0., 0., 0., 1., 0.]);
        let b = orthonormal_basis(&c, RANK_CUTOFF);
        assert_eq!(b.ncols(), 2);
        let comp = complement(&b);
        assert_eq!(comp.ncols(), 1);
        assert!((comp[(2, 0)].abs() - 1.0).abs() < 1e-12);
        let wide = DMatrix::from_fn(3, 10, |i, j| if i < 2 { (i + j) as f64 } else { 0.0 });
        assert_eq!(rank(&wide, RANK_CUTOFF), 2);
    }

    #[test]
    fn mismatch_detects_equal_and_different() {
        let a = DMatrix::from_column_slice(3, 1, &[1., 0., 0.]);
        let b = DMatrix::from_column_slice(3, 1, &[-1., 0., 0.]);
        assert!(subspace_mismatch(&a, &b) < 1e-15);
        let c = DMatrix::from_column_slice(3, 1, &[0., 1., 0.]);
        assert!((subspace_mismatch(&a, &c) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn streams_are_independent_and_reproducible() {
        use rand::Rng;
        let a: f64 = stream_rng(7, 0).random();
        let b: f64 = stream_rng(7, 1).random();
        let c: f64 = stream_rng(7, 0).random();
        assert_ne!(a, b);
        assert_eq!(a, c);
    }
}
