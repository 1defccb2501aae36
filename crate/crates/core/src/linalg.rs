//! Dense SVD-backed helpers shared across the crate.

use nalgebra::{Complex, DMatrix, DVector};

/// Singular value decomposition with descending singular values and a
/// complete set of right singular vectors (`v` is `ncols × ncols`).
pub(crate) struct FullSvd {
    pub u: DMatrix<f64>,
    pub sigma: Vec<f64>,
    pub v: DMatrix<f64>,
}

/// One-sided Jacobi SVD: rotates column pairs of `M·V` until they are
/// mutually orthogonal. Wide matrices go through their transpose; the right
/// singular basis is then completed with a Householder complement so `v` is
/// always a full orthogonal matrix. For tall input, columns of `u` belonging
/// to exactly zero singular values are zero.
pub(crate) fn full_svd(m: &DMatrix<f64>) -> FullSvd {
    let (rows, cols) = m.shape();
    if rows >= cols {
        return jacobi_svd(m);
    }
    // M = V'·Σ·U'ᵀ when Mᵀ = U'·Σ·V'ᵀ.
    let t = jacobi_svd(&m.transpose());
    // Directions with numerically zero σ carry no reliable vector (their
    // rotated columns may have underflowed); the complement replaces them.
    let floor = f64::EPSILON * t.sigma.first().copied().unwrap_or(0.0) * cols as f64;
    let r = t.sigma.iter().filter(|&&s| s > floor).count();
    let mut v = DMatrix::zeros(cols, cols);
    v.columns_mut(0, r).copy_from(&t.u.columns(0, r));
    if r < cols {
        let mut q = DMatrix::identity(cols, cols);
        if r > 0 {
            t.u.columns(0, r).into_owned().qr().q_tr_mul(&mut q);
            q.transpose_mut();
        }
        v.columns_mut(r, cols - r).copy_from(&q.columns(r, cols - r));
    }
    FullSvd {
        u: t.v,
        sigma: t.sigma,
        v,
    }
}

fn jacobi_svd(m: &DMatrix<f64>) -> FullSvd {
    let (rows, cols) = m.shape();
    let mut a = m.clone();
    let mut v = DMatrix::<f64>::identity(cols, cols);
    if rows > 0 {
        for _sweep in 0..80 {
            let mut rotated = false;
            for p in 0..cols {
                for q in (p + 1)..cols {
                    let (ap, aq) = column_pair(&mut a, p, q);
                    let alpha: f64 = ap.iter().map(|x| x * x).sum();
                    let beta: f64 = aq.iter().map(|x| x * x).sum();
                    let gamma: f64 = ap.iter().zip(aq.iter()).map(|(x, y)| x * y).sum();
                    if alpha == 0.0 || beta == 0.0 || gamma.abs() <= f64::EPSILON * (alpha * beta).sqrt() {
                        continue;
                    }
                    rotated = true;
                    let zeta = (beta - alpha) / (2.0 * gamma);
                    let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                    let c = 1.0 / (1.0 + t * t).sqrt();
                    let s = c * t;
                    rotate(ap, aq, c, s);
                    let (vp, vq) = column_pair(&mut v, p, q);
                    rotate(vp, vq, c, s);
                }
            }
            if !rotated {
                break;
            }
        }
    }
    let norms: Vec<f64> = (0..cols).map(|j| a.column(j).norm()).collect();
    let mut order: Vec<usize> = (0..cols).collect();
    order.sort_by(|&x, &y| norms[y].total_cmp(&norms[x]).then(x.cmp(&y)));
    let k = rows.min(cols);
    let mut u = DMatrix::zeros(rows, k);
    let mut v_sorted = DMatrix::zeros(cols, cols);
    let mut sigma = Vec::with_capacity(k);
    for (dst, &src) in order.iter().enumerate() {
        v_sorted.set_column(dst, &v.column(src));
        if dst < k {
            let sv = norms[src];
            sigma.push(sv);
            if sv > 0.0 {
                u.set_column(dst, &(a.column(src) / sv));
            }
        }
    }
    FullSvd {
        u,
        sigma,
        v: v_sorted,
    }
}

/// Disjoint mutable views of columns `p < q` of a column-major matrix.
fn column_pair(m: &mut DMatrix<f64>, p: usize, q: usize) -> (&mut [f64], &mut [f64]) {
    let rows = m.nrows();
    let (left, right) = m.as_mut_slice().split_at_mut(q * rows);
    (&mut left[p * rows..(p + 1) * rows], &mut right[..rows])
}

fn rotate(xp: &mut [f64], xq: &mut [f64], c: f64, s: f64) {
    for (a, b) in xp.iter_mut().zip(xq.iter_mut()) {
        let (mp, mq) = (*a, *b);
        *a = c * mp - s * mq;
        *b = s * mp + c * mq;
    }
}

/// Singular values in descending order (`min(rows, cols)` of them).
pub fn singular_values(m: &DMatrix<f64>) -> Vec<f64> {
    full_svd(m).sigma
}

/// Number of singular values at or above `rel_tol · σ_max`; zero for the
/// zero matrix.
pub fn numerical_rank(m: &DMatrix<f64>, rel_tol: f64) -> usize {
    let svd = full_svd(m);
    rank_from_sigma(&svd.sigma, rel_tol)
}

pub(crate) fn rank_from_sigma(sigma: &[f64], rel_tol: f64) -> usize {
    let max = sigma.first().copied().unwrap_or(0.0);
    if max <= 0.0 {
        return 0;
    }
    sigma.iter().filter(|&&s| s >= rel_tol * max).count()
}

/// Moore–Penrose pseudoinverse, truncating singular values below
/// `rel_tol · σ_max`.
pub fn pseudo_inverse(m: &DMatrix<f64>, rel_tol: f64) -> DMatrix<f64> {
    let (rows, cols) = m.shape();
    if rows == 0 || cols == 0 {
        return DMatrix::zeros(cols, rows);
    }
    let svd = full_svd(m);
    let r = rank_from_sigma(&svd.sigma, rel_tol);
    let mut out = DMatrix::zeros(cols, rows);
    for i in 0..r {
        out += (svd.v.column(i) / svd.sigma[i]) * svd.u.column(i).transpose();
    }
    out
}

/// Orthonormal basis of the column space, dropping directions below
/// `rel_tol · σ_max`.
pub fn orthonormal_range(m: &DMatrix<f64>, rel_tol: f64) -> DMatrix<f64> {
    let svd = full_svd(m);
    let r = rank_from_sigma(&svd.sigma, rel_tol);
    svd.u.columns(0, r).into_owned()
}

/// Orthonormal basis of `{w : ‖Mw‖ ≤ threshold·‖w‖}` in the SVD sense:
/// right singular vectors whose singular value is at most `threshold`,
/// including directions beyond the row count.
pub(crate) fn kernel_below(m: &DMatrix<f64>, threshold: f64) -> DMatrix<f64> {
    let svd = full_svd(m);
    let cols = m.ncols();
    let kept: Vec<usize> = (0..cols)
        .filter(|&i| svd.sigma.get(i).is_none_or(|&s| s <= threshold))
        .collect();
    let mut out = DMatrix::zeros(cols, kept.len());
    for (dst, &src) in kept.iter().enumerate() {
        out.set_column(dst, &svd.v.column(src));
    }
    out
}

pub fn largest_singular_value(m: &DMatrix<f64>) -> f64 {
    full_svd(m).sigma.first().copied().unwrap_or(0.0)
}

/// Eigenvalues of a general real square matrix.
pub fn eigenvalues(m: &DMatrix<f64>) -> Vec<Complex<f64>> {
    if m.nrows() == 0 {
        return Vec::new();
    }
    m.clone().complex_eigenvalues().iter().copied().collect()
}

pub(crate) fn min_symmetric_eigenvalue(m: &DMatrix<f64>) -> f64 {
    if m.nrows() == 0 {
        return f64::INFINITY;
    }
    let sym = (m + m.transpose()) * 0.5;
    sym.symmetric_eigenvalues().min()
}

pub(crate) fn all_finite(m: &DMatrix<f64>) -> bool {
    m.iter().all(|v| v.is_finite())
}

pub fn matrix_power(m: &DMatrix<f64>, exponent: usize) -> DMatrix<f64> {
    let mut out = DMatrix::identity(m.nrows(), m.ncols());
    for _ in 0..exponent {
        out = m * out;
    }
    out
}

pub(crate) fn stack_columns(vectors: &[DVector<f64>], rows: usize) -> DMatrix<f64> {
    let mut out = DMatrix::zeros(rows, vectors.len());
    for (j, v) in vectors.iter().enumerate() {
        out.set_column(j, v);
    }
    out
}
