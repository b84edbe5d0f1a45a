//! Monodromy and twisted transfer matrices on the 2^N spin space, the transfer
//! identity suite, the quantum inverse problem and the XYZ Hamiltonian limit.

use std::f64::consts::PI;

use crate::claims::{worst, Claim};
use crate::error::{Error, Result};
use crate::linalg::{
    apply_gate, c, embed, inverse_with_cond, kron_all, max_abs, rel_residual, sigma_x, sigma_y, sigma_z, spin,
    CMat, C64, I,
};
use crate::model::ModelParams;
use crate::twist::Twist;

/// Monodromy matrix on aux ⊗ V_1 ⊗ … ⊗ V_N (aux most significant).
#[derive(Clone, Debug)]
pub struct Monodromy {
    pub n: usize,
    pub m: CMat,
}

impl Monodromy {
    pub fn dim(&self) -> usize {
        1 << self.n
    }

    /// Block (i, j) of the auxiliary 2×2 structure.
    pub fn block(&self, i: usize, j: usize) -> CMat {
        let d = self.dim();
        self.m.view((i * d, j * d), (d, d)).into_owned()
    }

    pub fn a(&self) -> CMat {
        self.block(0, 0)
    }

    pub fn b(&self) -> CMat {
        self.block(0, 1)
    }

    pub fn c(&self) -> CMat {
        self.block(1, 0)
    }

    pub fn d(&self) -> CMat {
        self.block(1, 1)
    }

    /// tr_0[K M].
    pub fn twisted_trace(&self, twist: Twist) -> CMat {
        let k = twist.k_matrix();
        let mut out = CMat::zeros(self.dim(), self.dim());
        for i in 0..2 {
            for j in 0..2 {
                if k[(i, j)] != c(0.0, 0.0) {
                    out += self.block(j, i) * k[(i, j)];
                }
            }
        }
        out
    }

    /// tr_0[M X_0] for a 2×2 auxiliary matrix X.
    pub fn trace_with(&self, x: &CMat) -> CMat {
        let mut out = CMat::zeros(self.dim(), self.dim());
        for i in 0..2 {
            for j in 0..2 {
                if x[(j, i)] != c(0.0, 0.0) {
                    out += self.block(i, j) * x[(j, i)];
                }
            }
        }
        out
    }

    /// σ_0^y M^{t_0} σ_0^y = [[D, −B], [−C, A]].
    pub fn crossed(&self) -> Monodromy {
        let d = self.dim();
        let mut m = CMat::zeros(2 * d, 2 * d);
        m.view_mut((0, 0), (d, d)).copy_from(&self.d());
        m.view_mut((0, d), (d, d)).copy_from(&(-self.b()));
        m.view_mut((d, 0), (d, d)).copy_from(&(-self.c()));
        m.view_mut((d, d), (d, d)).copy_from(&self.a());
        Monodromy { n: self.n, m }
    }
}

/// M_0(λ) = R_{0N}(λ−ξ_N) ⋯ R_{01}(λ−ξ_1).
pub fn monodromy_8v(p: &ModelParams, lambda: C64) -> Monodromy {
    let n = p.n();
    let nq = n + 1;
    let mut m = CMat::identity(1 << nq, 1 << nq);
    for site in 1..=n {
        let g = p.r8v_gate(lambda - p.xi[site - 1]);
        apply_gate(&mut m, nq, 0, site, |_| g);
    }
    Monodromy { n, m }
}

/// Dynamical 6-vertex monodromy M_0(λ|t), each factor reading the current σ^z of earlier sites.
pub fn monodromy_6vd(p: &ModelParams, lambda: C64, t: C64) -> Monodromy {
    let n = p.n();
    let nq = n + 1;
    let mut m = CMat::identity(1 << nq, 1 << nq);
    for site in 1..=n {
        let l = lambda - p.xi[site - 1];
        apply_gate(&mut m, nq, 0, site, |base| {
            let s: f64 = (1..site).map(|a| spin(base, nq, a)).sum();
            p.r6vd_gate(l, t + p.eta * s)
        });
    }
    Monodromy { n, m }
}

/// T_{(x,y)}(λ) for the twist stored in `p`.
pub fn transfer_8v(p: &ModelParams, lambda: C64) -> CMat {
    monodromy_8v(p, lambda).twisted_trace(p.twist)
}

pub fn transfer_8v_twist(p: &ModelParams, lambda: C64, twist: Twist) -> CMat {
    monodromy_8v(p, lambda).twisted_trace(twist)
}

/// K^{(x,y)} on every site.
pub fn global_twist(p: &ModelParams) -> CMat {
    kron_all(&vec![p.twist.k_matrix(); p.n()])
}

/// Γ_z = ⊗σ^z.
pub fn gamma_z(n: usize) -> CMat {
    kron_all(&vec![sigma_z(); n])
}

/// Γ_x = ⊗σ^x.
pub fn gamma_x(n: usize) -> CMat {
    kron_all(&vec![sigma_x(); n])
}

/// Operator form of det_q: A(λ)D(λ−η) − B(λ)C(λ−η).
pub fn quantum_det_operator(p: &ModelParams, lambda: C64) -> CMat {
    let m1 = monodromy_8v(p, lambda);
    let m2 = monodromy_8v(p, lambda - p.eta);
    m1.a() * m2.d() - m1.b() * m2.c()
}

/// Prefactor of T(λ+πω) relative to T(λ).
pub fn omega_shift_factor(p: &ModelParams, lambda: C64) -> C64 {
    let n = p.n() as f64;
    let w = p.omega();
    let sum_xi: C64 = p.xi.iter().sum();
    let base = -(-2.0 * I * lambda - I * PI * w).exp();
    base.powi(p.n() as i32) * (2.0 * I * (sum_xi - n / 2.0 * p.eta + p.twist.xf() * PI / 2.0)).exp()
}

/// Sign of T(λ+π) relative to T(λ).
pub fn pi_shift_sign(p: &ModelParams) -> f64 {
    if (p.n() + p.twist.y as usize) % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}

/// Checks the transfer-matrix identities at the sample points `lambdas`.
pub fn verify_transfer_identities(p: &ModelParams, lambdas: &[C64], tol: f64) -> Vec<Claim> {
    let mut out = Vec::new();
    let ctx = format!("N={} twist={}", p.n(), p.twist);
    let w = p.omega();

    let mut r1 = Vec::new();
    let mut r2 = Vec::new();
    for &l in lambdas {
        let t = transfer_8v(p, l);
        r1.push(rel_residual(&transfer_8v(p, l + PI), &(&t * c(pi_shift_sign(p), 0.0))));
        r2.push(rel_residual(&transfer_8v(p, l + PI * w), &(&t * omega_shift_factor(p, l))));
    }
    out.push(worst("per-transfer1", "T(λ+π) = (−1)^{N+y} T(λ)", r1, tol).with_context(ctx.clone()));
    out.push(worst("per-transfer2", "T(λ+πω) = (−e^{−2iλ−iπω})^N e^{2i[Σξ−Nη/2+xπ/2]} T(λ)", r2, tol).with_context(ctx.clone()));

    let mut rq = Vec::new();
    let mut ran = Vec::new();
    let mut rex = Vec::new();
    let sign = if (p.twist.x + p.twist.y) % 2 == 0 { 1.0 } else { -1.0 };
    let dim = p.dim();
    for &x in &p.xi {
        let m1 = monodromy_8v(p, x);
        let m2 = monodromy_8v(p, x - p.eta);
        let t1 = m1.twisted_trace(p.twist);
        let t2 = m2.twisted_trace(p.twist);
        let rhs = CMat::identity(dim, dim) * (sign * p.quantum_det(x));
        rq.push(rel_residual(&(t1 * t2), &rhs));
        let pairs = [(m1.a(), m2.a()), (m1.d(), m2.d()), (m1.b(), m2.b()), (m1.c(), m2.c())];
        for (u, v) in pairs.iter() {
            let scale = max_abs(u) * max_abs(v);
            ran.push(if scale == 0.0 { 0.0 } else { max_abs(&(u * v)) / scale });
        }
        rex.push(rel_residual(&(m1.a() * m2.d()), &(-(m1.c() * m2.b()))));
        rex.push(rel_residual(&(m1.d() * m2.a()), &(-(m1.b() * m2.c()))));
    }
    out.push(worst("q-det-ID", "T(ξ_n)T(ξ_n−η) = (−1)^{x+y} det_q M(ξ_n)", rq, tol).with_context(ctx.clone()));
    out.push(worst("annih", "A(ξ)A(ξ−η) = D(ξ)D(ξ−η) = B(ξ)B(ξ−η) = C(ξ)C(ξ−η) = 0", ran, tol).with_context(ctx.clone()));
    out.push(worst("excha", "A(ξ)D(ξ−η) = −C(ξ)B(ξ−η), D(ξ)A(ξ−η) = −B(ξ)C(ξ−η)", rex, tol).with_context(ctx.clone()));

    let mut prod = CMat::identity(dim, dim);
    let mut pa = c(1.0, 0.0);
    for &x in &p.xi {
        prod *= transfer_8v(p, x);
        pa *= p.sa(x);
    }
    let rhs = global_twist(p) * pa;
    out.push(Claim::new("global-ID", "∏ T(ξ_n) = ∏ 𝒶(ξ_n) ∏ K_n", rel_residual(&prod, &rhs), tol).with_context(ctx.clone()));

    let mut rd = Vec::new();
    for &l in lambdas {
        let op = quantum_det_operator(p, l);
        rd.push(rel_residual(&op, &(CMat::identity(dim, dim) * p.quantum_det(l))));
    }
    out.push(worst("det-q", "A(λ)D(λ−η) − B(λ)C(λ−η) = 𝒶(λ)𝒹(λ−η)", rd, tol).with_context(ctx));
    out
}

/// RTT relation on V_0 ⊗ V_0' ⊗ V_N; returns the relative residual.
pub fn rtt_residual(p: &ModelParams, l1: C64, l2: C64) -> f64 {
    let n = p.n();
    let nq = n + 2;
    let d = 1usize << nq;
    let r = p.r8v_gate(l1 - l2);
    // M_0 on qubits (0, 2..), M_0' on qubits (1, 2..)
    let build = |aux: usize, lambda: C64| {
        let mut m = CMat::identity(d, d);
        for site in 1..=n {
            let g = p.r8v_gate(lambda - p.xi[site - 1]);
            apply_gate(&mut m, nq, aux, site + 1, |_| g);
        }
        m
    };
    let m0 = build(0, l1);
    let m0p = build(1, l2);
    let mut lhs = &m0 * &m0p;
    apply_gate(&mut lhs, nq, 0, 1, |_| r);
    let mut rr = CMat::identity(d, d);
    apply_gate(&mut rr, nq, 0, 1, |_| r);
    let rhs = m0p * m0 * rr;
    rel_residual(&lhs, &rhs)
}

/// M(λ)·σ^y M(λ−η)^{t_0} σ^y against det_q M(λ)·I.
pub fn inversion_residual(p: &ModelParams, lambda: C64) -> f64 {
    let m1 = monodromy_8v(p, lambda);
    let m2 = monodromy_8v(p, lambda - p.eta).crossed();
    let lhs = &m1.m * &m2.m;
    let dd = lhs.nrows();
    rel_residual(&lhs, &(CMat::identity(dd, dd) * p.quantum_det(lambda)))
}

/// Which reconstruction formula of the quantum inverse problem to use.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum InverseVariant {
    /// Through tr_0[M(ξ_n) X_0].
    Direct,
    /// Through tr_0[σ^y M(ξ_n−η)^{t_0} σ^y X_0] / det_q M(ξ_n).
    Crossed,
}

/// Reconstructs the local operator X at site `site` (1-based) from periodic transfer matrices.
/// Returns the operator and the worst condition number among the inverted transfer matrices.
pub fn inverse_problem_reconstruct(p: &ModelParams, site: usize, x: &CMat, variant: InverseVariant) -> Result<(CMat, f64)> {
    let n = p.n();
    if site == 0 || site > n {
        return Err(Error::Parameter(format!("site {site} outside 1..={n}")));
    }
    let dim = p.dim();
    let mut ts = Vec::new();
    let mut tinv = Vec::new();
    let mut cond: f64 = 1.0;
    for k in 0..site {
        let t = transfer_8v_twist(p, p.xi[k], Twist::PERIODIC);
        let (inv, cnd) = inverse_with_cond(&t)
            .map_err(|e| Error::Singular(format!("periodic T(ξ_{}) not invertible: {e}", k + 1)))?;
        cond = cond.max(cnd);
        ts.push(t);
        tinv.push(inv);
    }
    let xi = p.xi[site - 1];
    let mut left = CMat::identity(dim, dim);
    let mut right = CMat::identity(dim, dim);
    let middle = match variant {
        InverseVariant::Direct => {
            for t in ts.iter().take(site - 1) {
                left *= t;
            }
            for ti in tinv.iter().rev() {
                right *= ti;
            }
            monodromy_8v(p, xi).trace_with(x)
        }
        InverseVariant::Crossed => {
            for t in ts.iter() {
                left *= t;
            }
            for ti in tinv.iter().take(site - 1).rev() {
                right *= ti;
            }
            monodromy_8v(p, xi - p.eta).crossed().trace_with(x) / p.quantum_det(xi)
        }
    };
    Ok((left * middle * right, cond))
}

/// XYZ couplings (J_x, J_y, J_z, J_0).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Couplings {
    pub jx: C64,
    pub jy: C64,
    pub jz: C64,
    pub j0: C64,
}

/// Couplings from R'(0)/a(0); the prefactor of J_x, J_y is θ_1'(0|2ω)/θ_4(0|2ω).
pub fn xyz_couplings(p: &ModelParams) -> Couplings {
    let e = &p.elliptic;
    let z = c(0.0, 0.0);
    let eta = p.eta;
    let lead = e.theta_deriv(1, z, 2) / e.theta(4, z, 2);
    let r = e.theta(4, eta, 2) / e.theta(1, eta, 2);
    let d1 = e.theta_deriv(1, eta, 2) / e.theta(1, eta, 2);
    let d4 = e.theta_deriv(4, eta, 2) / e.theta(4, eta, 2);
    Couplings { jx: lead * (r + 1.0 / r), jy: lead * (r - 1.0 / r), jz: d1 - d4, j0: d1 + d4 }
}

/// H = ½ Σ_n {J_x σ^xσ^x + J_y σ^yσ^y + J_z σ^zσ^z} + ½ N J_0 with σ_{N+1} = K σ_1 K^{-1}.
pub fn xyz_hamiltonian(p: &ModelParams) -> (CMat, Couplings) {
    let cp = xyz_couplings(p);
    let n = p.n();
    let dim = p.dim();
    let k = p.twist.k_matrix();
    let kinv = crate::linalg::inverse(&k).expect("K invertible");
    let mut h = CMat::identity(dim, dim) * (cp.j0 * n as f64 / 2.0);
    let paulis = [(sigma_x(), cp.jx), (sigma_y(), cp.jy), (sigma_z(), cp.jz)];
    for (s, j) in paulis.iter() {
        for site in 0..n {
            let a = embed(s, site, n);
            let b = if site + 1 < n { embed(s, site + 1, n) } else { embed(&(&k * s * &kinv), 0, n) };
            h += a * b * (*j / 2.0);
        }
    }
    (h, cp)
}

/// T'(0) T(0)^{-1} by central differences with step `h`.
pub fn log_derivative_at_zero(p: &ModelParams, h: f64) -> Result<CMat> {
    let z = c(0.0, 0.0);
    let tp = (transfer_8v(p, c(h, 0.0)) - transfer_8v(p, c(-h, 0.0))) / c(2.0 * h, 0.0);
    let (t0inv, _) = inverse_with_cond(&transfer_8v(p, z))?;
    Ok(tp * t0inv)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_site_blocks() {
        let p = ModelParams::canonical(1, Twist::PERIODIC, 5);
        let l = c(0.37, 0.08);
        let m = monodromy_8v(&p, l);
        let w = p.weights_8v(l - p.xi[0]);
        let a = m.a();
        let b = m.b();
        assert!((a[(0, 0)] - w.a).norm() < 1e-14 && (a[(1, 1)] - w.b).norm() < 1e-14);
        assert!(a[(0, 1)].norm() < 1e-15 && a[(1, 0)].norm() < 1e-15);
        assert!((b[(0, 1)] - w.d).norm() < 1e-14 && (b[(1, 0)] - w.c).norm() < 1e-14);
    }

    #[test]
    fn twisted_traces_match_block_sums() {
        let p = ModelParams::canonical(2, Twist::PERIODIC, 5);
        let m = monodromy_8v(&p, c(0.21, -0.3));
        let cases = [
            (Twist::new(0, 0).unwrap(), m.a() + m.d()),
            (Twist::new(1, 0).unwrap(), m.a() - m.d()),
            (Twist::new(0, 1).unwrap(), m.b() + m.c()),
            (Twist::new(1, 1).unwrap(), m.b() - m.c()),
        ];
        for (tw, expect) in cases {
            assert!(max_abs(&(m.twisted_trace(tw) - expect)) < 1e-14);
        }
    }
}
