//! Residuals of the defining identities of the local objects.

use std::f64::consts::PI;

use crate::linalg::{
    apply_gate, apply_local, bit, kron, rel_residual, sigma_x, sigma_y, sigma_z, CMat, Gate, C64,
};
use crate::model::ModelParams;

/// Operator on an `nq`-qubit register from a (possibly state-dependent) gate on (p, q).
pub fn two_site_op<F: Fn(usize) -> Gate>(nq: usize, p: usize, q: usize, gate: F) -> CMat {
    let mut m = CMat::identity(1 << nq, 1 << nq);
    apply_gate(&mut m, nq, p, q, gate);
    m
}

/// Operator on an `nq`-qubit register from a (possibly state-dependent) 2×2 matrix on q.
pub fn one_site_op<F: Fn(usize) -> [[C64; 2]; 2]>(nq: usize, q: usize, op: F) -> CMat {
    let mut m = CMat::identity(1 << nq, 1 << nq);
    apply_local(&mut m, nq, q, op);
    m
}

/// Transpose in the first tensor factor of a 4×4 matrix.
pub fn partial_transpose_first(r: &CMat) -> CMat {
    CMat::from_fn(4, 4, |row, col| {
        let (i1, i2) = (row >> 1, row & 1);
        let (j1, j2) = (col >> 1, col & 1);
        r[((j1 << 1) | i2, (i1 << 1) | j2)]
    })
}

pub fn ybe_residual(p: &ModelParams, l1: C64, l2: C64, l3: C64) -> f64 {
    let r12 = two_site_op(3, 0, 1, |_| p.r8v_gate(l1 - l2));
    let r13 = two_site_op(3, 0, 2, |_| p.r8v_gate(l1 - l3));
    let r23 = two_site_op(3, 1, 2, |_| p.r8v_gate(l2 - l3));
    rel_residual(&(&r12 * &r13 * &r23), &(&r23 * &r13 * &r12))
}

pub fn unitarity_residual(p: &ModelParams, lambda: C64) -> f64 {
    let r12 = two_site_op(2, 0, 1, |_| p.r8v_gate(lambda));
    let r21 = two_site_op(2, 1, 0, |_| p.r8v_gate(-lambda));
    let rhs = CMat::identity(4, 4) * (p.th(-lambda + p.eta) * p.th(lambda + p.eta));
    rel_residual(&(r21 * r12), &rhs)
}

pub fn crossing_residual(p: &ModelParams, lambda: C64) -> f64 {
    let sy1 = kron(&sigma_y(), &CMat::identity(2, 2));
    let lhs = p.r8v(lambda) * &sy1 * partial_transpose_first(&p.r8v(lambda - p.eta)) * &sy1;
    let rhs = CMat::identity(4, 4) * (p.th(lambda + p.eta) * p.th(lambda - p.eta));
    rel_residual(&lhs, &rhs)
}

/// R(λ+π) = −σ_1^z R(λ) σ_1^z.
pub fn period_pi_residual(p: &ModelParams, lambda: C64) -> f64 {
    let sz1 = kron(&sigma_z(), &CMat::identity(2, 2));
    let rhs = -(&sz1 * p.r8v(lambda) * &sz1);
    rel_residual(&p.r8v(lambda + PI), &rhs)
}

/// R(λ+πω) = −e^{−i(2λ+πω+η)} σ_1^x R(λ) σ_1^x.
pub fn period_omega_residual(p: &ModelParams, lambda: C64) -> f64 {
    let w = p.omega();
    let sx1 = kron(&sigma_x(), &CMat::identity(2, 2));
    let pre = -(-crate::linalg::I * (2.0 * lambda + PI * w + p.eta)).exp();
    let rhs = (&sx1 * p.r8v(lambda) * &sx1) * pre;
    rel_residual(&p.r8v(lambda + PI * w), &rhs)
}

/// Dynamical Yang-Baxter equation on the triple tensor space.
pub fn dybe_residual(p: &ModelParams, l12: C64, l13: C64, l23: C64, t: C64) -> f64 {
    let eta = p.eta;
    let sz = |idx: usize, q: usize| 1.0 - 2.0 * bit(idx, 3, q) as f64;
    let lhs = two_site_op(3, 0, 1, |b| p.r6vd_gate(l12, t + eta * sz(b, 2)))
        * two_site_op(3, 0, 2, |_| p.r6vd_gate(l13, t))
        * two_site_op(3, 1, 2, |b| p.r6vd_gate(l23, t + eta * sz(b, 0)));
    let rhs = two_site_op(3, 1, 2, |_| p.r6vd_gate(l23, t))
        * two_site_op(3, 0, 2, |b| p.r6vd_gate(l13, t + eta * sz(b, 1)))
        * two_site_op(3, 0, 1, |_| p.r6vd_gate(l12, t));
    rel_residual(&lhs, &rhs)
}

/// R^{8V}_{12}(λ12) S_1(λ1|t) S_2(λ2|t+ησ_1^z) = S_2(λ2|t) S_1(λ1|t+ησ_2^z) R_{12}(λ12|t).
pub fn vertex_irf_residual(p: &ModelParams, l1: C64, l2: C64, t: C64) -> f64 {
    let eta = p.eta;
    let sz = |idx: usize, q: usize| 1.0 - 2.0 * bit(idx, 2, q) as f64;
    let lhs = p.r8v(l1 - l2)
        * one_site_op(2, 0, |_| p.s_gauge_arr(l1, t))
        * one_site_op(2, 1, |b| p.s_gauge_arr(l2, t + eta * sz(b, 0)));
    let rhs = one_site_op(2, 1, |_| p.s_gauge_arr(l2, t))
        * one_site_op(2, 0, |b| p.s_gauge_arr(l1, t + eta * sz(b, 1)))
        * p.r6vd(l1 - l2, t).expect("generic t");
    rel_residual(&lhs, &rhs)
}

/// S(λ|−t+xπ+yπω) = (−1)^x i^{xy} (σ^z)^x (σ^x)^y S(λ|t) σ^x.
pub fn gauge_reflection_residual(p: &ModelParams, lambda: C64, t: C64) -> f64 {
    let tw = p.twist;
    let shift = tw.xf() * PI + tw.yf() * PI * p.omega();
    let lhs = p.s_gauge(lambda, -t + shift);
    let mut k = CMat::identity(2, 2);
    if tw.x == 1 {
        k = k * sigma_z();
    }
    if tw.y == 1 {
        k = k * sigma_x();
    }
    let rhs = k * p.s_gauge(lambda, t) * sigma_x() * tw.phase_x();
    rel_residual(&lhs, &rhs)
}

/// det S(λ|t) against e^{iyt} θ(λ) θ(t).
pub fn gauge_det_residual(p: &ModelParams, lambda: C64, t: C64) -> f64 {
    let d = crate::linalg::det(&p.s_gauge(lambda, t));
    crate::linalg::rel_diff(d, p.s_gauge_det_closed(lambda, t))
}

/// Determinant of the dynamical R-matrix against the product of its quadrant determinants.
pub fn r6vd_det_residual(p: &ModelParams, lambda: C64, t: C64) -> f64 {
    let w = p.weights_6vd(lambda, t);
    let closed = w.a * w.a * (w.b_plus * w.b_minus - w.c_plus * w.c_minus);
    let d = crate::linalg::det(&crate::linalg::gate_to_mat(&p.r6vd_gate(lambda, t)));
    crate::linalg::rel_diff(d, closed)
}
