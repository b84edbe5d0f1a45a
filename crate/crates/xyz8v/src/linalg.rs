//! Small dense complex linear-algebra helpers on top of nalgebra.

use nalgebra::{DMatrix, DVector, Matrix4};
pub use num_complex::Complex64 as C64;

use crate::error::{Error, Result};

pub type CMat = DMatrix<C64>;
pub type CVec = DVector<C64>;
pub type Gate = Matrix4<C64>;

pub const I: C64 = C64::new(0.0, 1.0);

#[inline]
pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

/// i^p for any integer p.
pub fn cpow_i(p: i32) -> C64 {
    match p.rem_euclid(4) {
        0 => c(1.0, 0.0),
        1 => c(0.0, 1.0),
        2 => c(-1.0, 0.0),
        _ => c(0.0, -1.0),
    }
}

pub fn sigma_x() -> CMat {
    CMat::from_row_slice(2, 2, &[c(0.0, 0.0), c(1.0, 0.0), c(1.0, 0.0), c(0.0, 0.0)])
}

pub fn sigma_y() -> CMat {
    CMat::from_row_slice(2, 2, &[c(0.0, 0.0), c(0.0, -1.0), c(0.0, 1.0), c(0.0, 0.0)])
}

pub fn sigma_z() -> CMat {
    CMat::from_row_slice(2, 2, &[c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(-1.0, 0.0)])
}

pub fn kron(a: &CMat, b: &CMat) -> CMat {
    a.kronecker(b)
}

/// Kronecker product of a list of factors, leftmost factor most significant.
pub fn kron_all(factors: &[CMat]) -> CMat {
    let mut out = CMat::identity(1, 1);
    for f in factors {
        out = out.kronecker(f);
    }
    out
}

/// Operator `op` acting on qubit `site` of an `nq`-qubit register.
pub fn embed(op: &CMat, site: usize, nq: usize) -> CMat {
    let mut factors = vec![CMat::identity(2, 2); nq];
    factors[site] = op.clone();
    kron_all(&factors)
}

/// Max-absolute-entry norm.
pub fn max_abs(m: &CMat) -> f64 {
    m.iter().fold(0.0, |acc, z| acc.max(z.norm()))
}

pub fn max_abs_vec(v: &CVec) -> f64 {
    v.iter().fold(0.0, |acc, z| acc.max(z.norm()))
}

/// ‖a − b‖ / max(‖a‖, ‖b‖) in the max-entry norm.
pub fn rel_residual(a: &CMat, b: &CMat) -> f64 {
    let scale = max_abs(a).max(max_abs(b));
    if scale == 0.0 {
        0.0
    } else {
        max_abs(&(a - b)) / scale
    }
}

pub fn rel_residual_vec(a: &CVec, b: &CVec) -> f64 {
    let scale = max_abs_vec(a).max(max_abs_vec(b));
    if scale == 0.0 {
        0.0
    } else {
        max_abs_vec(&(a - b)) / scale
    }
}

pub fn rel_diff(a: C64, b: C64) -> f64 {
    let s = a.norm().max(b.norm());
    if s == 0.0 {
        0.0
    } else {
        (a - b).norm() / s
    }
}

/// Bit of qubit `q` in basis index `idx` of an `nq`-qubit register (qubit 0 most significant).
#[inline]
pub fn bit(idx: usize, nq: usize, q: usize) -> usize {
    (idx >> (nq - 1 - q)) & 1
}

/// σ^z eigenvalue 1 − 2h of qubit `q`.
#[inline]
pub fn spin(idx: usize, nq: usize, q: usize) -> f64 {
    1.0 - 2.0 * bit(idx, nq, q) as f64
}

/// Applies a two-qubit gate on qubits (p, q) to every column of `m`. The gate may
/// depend on the basis index with bits p and q cleared, so it can read other qubits.
pub fn apply_gate<F>(m: &mut CMat, nq: usize, p: usize, q: usize, gate: F)
where
    F: Fn(usize) -> Gate,
{
    assert!(p != q && p < nq && q < nq);
    let dim = 1usize << nq;
    assert_eq!(m.nrows(), dim);
    let mp = 1usize << (nq - 1 - p);
    let mq = 1usize << (nq - 1 - q);
    let ncols = m.ncols();
    for base in 0..dim {
        if base & mp != 0 || base & mq != 0 {
            continue;
        }
        let g = gate(base);
        let idx = [base, base | mq, base | mp, base | mp | mq];
        for col in 0..ncols {
            let v = [m[(idx[0], col)], m[(idx[1], col)], m[(idx[2], col)], m[(idx[3], col)]];
            for r in 0..4 {
                let mut acc = C64::new(0.0, 0.0);
                for s in 0..4 {
                    acc += g[(r, s)] * v[s];
                }
                m[(idx[r], col)] = acc;
            }
        }
    }
}

/// Applies a one-qubit matrix on qubit `q` to every column, the matrix possibly
/// depending on the basis index with bit q cleared.
pub fn apply_local<F>(m: &mut CMat, nq: usize, q: usize, op: F)
where
    F: Fn(usize) -> [[C64; 2]; 2],
{
    let dim = 1usize << nq;
    assert_eq!(m.nrows(), dim);
    let mq = 1usize << (nq - 1 - q);
    for base in 0..dim {
        if base & mq != 0 {
            continue;
        }
        let g = op(base);
        for col in 0..m.ncols() {
            let (v0, v1) = (m[(base, col)], m[(base | mq, col)]);
            m[(base, col)] = g[0][0] * v0 + g[0][1] * v1;
            m[(base | mq, col)] = g[1][0] * v0 + g[1][1] * v1;
        }
    }
}

pub fn gate_from(m: &CMat) -> Gate {
    assert_eq!(m.shape(), (4, 4));
    Gate::from_fn(|r, s| m[(r, s)])
}

pub fn gate_to_mat(g: &Gate) -> CMat {
    CMat::from_fn(4, 4, |r, s| g[(r, s)])
}

/// Thin SVD with singular values in descending order, computed by faer.
pub fn svd_sorted(m: &CMat, want_u: bool, want_v: bool) -> (Vec<f64>, Option<CMat>, Option<CMat>) {
    let (r, k) = m.shape();
    if r == 0 || k == 0 {
        return (Vec::new(), want_u.then(|| CMat::zeros(r, 0)), want_v.then(|| CMat::zeros(0, k)));
    }
    let fm = faer::Mat::<C64>::from_fn(r, k, |i, j| m[(i, j)]);
    let svd = fm.thin_svd().expect("SVD did not converge");
    let s: Vec<f64> = svd.S().column_vector().iter().map(|z| z.re).collect();
    let u = want_u.then(|| {
        let u = svd.U();
        CMat::from_fn(u.nrows(), u.ncols(), |i, j| u[(i, j)])
    });
    let v_t = want_v.then(|| {
        let v = svd.V();
        CMat::from_fn(v.ncols(), v.nrows(), |i, j| v[(j, i)].conj())
    });
    (s, u, v_t)
}

/// Singular values in descending order.
pub fn singular_values(m: &CMat) -> Vec<f64> {
    svd_sorted(m, false, false).0
}

/// 2-norm condition number.
pub fn condition_number(m: &CMat) -> f64 {
    let s = singular_values(m);
    match (s.first(), s.last()) {
        (Some(&hi), Some(&lo)) if lo > 0.0 => hi / lo,
        _ => f64::INFINITY,
    }
}

/// LU inverse together with the 2-norm condition number.
pub fn inverse_with_cond(m: &CMat) -> Result<(CMat, f64)> {
    let cond = condition_number(m);
    if !cond.is_finite() || cond > 1e14 {
        return Err(Error::Singular(format!("condition number {cond:.3e}")));
    }
    let inv = m.clone().lu().try_inverse().ok_or_else(|| Error::Singular("LU pivot vanished".into()))?;
    Ok((inv, cond))
}

pub fn inverse(m: &CMat) -> Result<CMat> {
    inverse_with_cond(m).map(|(inv, _)| inv)
}

pub fn det(m: &CMat) -> C64 {
    m.clone().lu().determinant()
}

/// Orthonormal basis of the `k` right-singular directions with the smallest
/// singular values, together with σ_{n−k}/σ_max and σ_{n−k+1}/σ_max (gap check).
pub fn smallest_right_singular(m: &CMat, k: usize) -> (CMat, f64, f64) {
    let n = m.ncols();
    let (s, _, v_t) = svd_sorted(m, false, true);
    let v_t = v_t.expect("v_t requested");
    let smax = s[0].max(f64::MIN_POSITIVE);
    let mut basis = CMat::zeros(n, k);
    for j in 0..k {
        let row = n - k + j;
        for i in 0..n {
            basis[(i, j)] = v_t[(row, i)].conj();
        }
    }
    let largest_dropped = if k > 0 { s[n - k] / smax } else { 0.0 };
    let smallest_kept = if k < n { s[n - k - 1] / smax } else { 1.0 };
    (basis, largest_dropped, smallest_kept)
}

/// Basis of the numerical null space (singular values below `rel_tol`·σ_max).
pub fn null_space(m: &CMat, rel_tol: f64) -> CMat {
    let n = m.ncols();
    let s = singular_values(m);
    let smax = s.first().copied().unwrap_or(0.0);
    let k = s.iter().filter(|&&x| x <= rel_tol * smax).count() + n.saturating_sub(s.len());
    smallest_right_singular(m, k).0
}

/// Bilinear pairing Σ a_i b_i (no conjugation).
pub fn bilinear(a: &CVec, b: &CVec) -> C64 {
    a.iter().zip(b.iter()).map(|(x, y)| x * y).sum()
}

/// |⟨a, b⟩| / (‖a‖‖b‖) with the Hermitian inner product.
pub fn overlap(a: &CVec, b: &CVec) -> f64 {
    let na = a.norm();
    let nb = b.norm();
    if na == 0.0 || nb == 0.0 {
        return 0.0;
    }
    a.dotc(b).norm() / (na * nb)
}

/// Scales `v` to unit 2-norm with its first non-negligible entry real-positive.
pub fn normalize_phase(v: &CVec) -> CVec {
    let n = v.norm();
    if n == 0.0 {
        return v.clone();
    }
    let mut w = v / c(n, 0.0);
    let thresh = 1e-8 * max_abs_vec(&w);
    if let Some(z) = w.iter().find(|z| z.norm() > thresh).copied() {
        w *= z.conj() / z.norm();
    }
    w
}

/// Orthonormal basis (columns) of the span of the columns of `m`.
pub fn orth(m: &CMat, rel_tol: f64) -> CMat {
    let (s, u, _) = svd_sorted(m, true, false);
    let u = u.expect("u requested");
    let smax = s.iter().copied().fold(0.0, f64::max);
    let keep: Vec<usize> = (0..s.len()).filter(|&i| s[i] > rel_tol * smax).collect();
    CMat::from_fn(m.nrows(), keep.len(), |i, j| u[(i, keep[j])])
}

/// Cosine of the largest principal angle between two column spans; 1 means
/// span(a) ⊆ span(b).
pub fn span_overlap(a: &CMat, b: &CMat) -> f64 {
    let qa = orth(a, 1e-10);
    let qb = orth(b, 1e-10);
    if qa.ncols() == 0 || qb.ncols() == 0 {
        return 0.0;
    }
    let m = qb.adjoint() * &qa;
    singular_values(&m).last().copied().unwrap_or(0.0)
}
