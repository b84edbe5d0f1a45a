//! Dynamical-spin representation: sectors of the τ-extended space, the dynamical
//! monodromy operators, the projector onto the spin space and the vertex-IRF
//! operators S^{(r)}, Ŝ^{(0)} and S^{(±)}.
//!
//! A vector of the dynamical-spin space is stored as a map from the integer label
//! `m` (τ = t_0 + ηm) to a spin vector. Sector r holds the basis vectors
//! e_h ⊗ |t_0 + η(|h| + r)⟩, so that ηS + 2τ = 2rη + xπ + yπω on it.

use std::cell::RefCell;
use std::collections::{BTreeMap, HashMap};

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::claims::{worst, Claim};
use crate::error::{Error, Result};
use crate::lattice::{gamma_z, monodromy_6vd, monodromy_8v, transfer_8v, Monodromy};
use crate::linalg::{
    apply_local, c, condition_number, inverse, inverse_with_cond, max_abs, max_abs_vec, null_space, orth,
    rel_residual, rel_residual_vec, singular_values, sigma_x, spin, CMat, CVec, C64, I,
};
use crate::model::ModelParams;
use crate::twist::Twist;

/// Sparse dynamical-spin vector: label m ↦ spin component.
pub type DynVec = BTreeMap<i64, CVec>;

/// Number of flipped spins |h| = Σ h_k of a basis index.
pub fn weight(h: usize) -> i64 {
    h.count_ones() as i64
}

/// s_h = Σ (1 − 2h_k).
pub fn s_of(h: usize, n: usize) -> i64 {
    n as i64 - 2 * weight(h)
}

/// One invariant sector D̄^{(r)} of ηS + 2τ.
#[derive(Clone, Debug)]
pub struct DynSector {
    pub r: i64,
    pub twist: Twist,
    pub t0: C64,
    pub eta: C64,
    pub n: usize,
}

impl DynSector {
    pub fn new(p: &ModelParams, r: i64) -> Self {
        DynSector { r, twist: p.twist, t0: p.t0(), eta: p.eta, n: p.n() }
    }

    /// Integer label m of the basis vector h.
    pub fn label_index(&self, h: usize) -> i64 {
        weight(h) + self.r
    }

    /// t_{r,h} = −(η/2)s_h + xπ/2 + yπω/2 + rη.
    pub fn label_of(&self, h: usize) -> C64 {
        self.tau(self.label_index(h))
    }

    pub fn tau(&self, m: i64) -> C64 {
        self.t0 + self.eta * m as f64
    }

    /// Embeds spin coefficients c_h as Σ_h c_h e_h ⊗ |t_{r,h}⟩.
    pub fn embed(&self, coeffs: &CVec) -> DynVec {
        let dim = 1usize << self.n;
        let mut out = DynVec::new();
        for h in 0..dim {
            if coeffs[h] == c(0.0, 0.0) {
                continue;
            }
            out.entry(self.label_index(h)).or_insert_with(|| CVec::zeros(dim))[h] = coeffs[h];
        }
        out
    }

    /// Largest component lying outside this sector, relative to the largest entry.
    pub fn leak(&self, v: &DynVec) -> f64 {
        let mut inside: f64 = 0.0;
        let mut outside: f64 = 0.0;
        for (&m, comp) in v {
            for (h, z) in comp.iter().enumerate() {
                if self.label_index(h) == m {
                    inside = inside.max(z.norm());
                } else {
                    outside = outside.max(z.norm());
                }
            }
        }
        if inside == 0.0 {
            outside
        } else {
            outside / inside
        }
    }

    /// Inverse of the projector on this sector: reads the coefficient at the sector label of each h.
    pub fn restrict(&self, v: &DynVec) -> CVec {
        let dim = 1usize << self.n;
        CVec::from_fn(dim, |h, _| v.get(&self.label_index(h)).map(|x| x[h]).unwrap_or(c(0.0, 0.0)))
    }
}

/// P: drops the τ label.
pub fn project(v: &DynVec, dim: usize) -> CVec {
    let mut out = CVec::zeros(dim);
    for comp in v.values() {
        out += comp;
    }
    out
}

/// Shift T_τ^± on the label.
pub fn shift(v: &DynVec, plus: bool) -> DynVec {
    let d = if plus { -1 } else { 1 };
    v.iter().map(|(&m, x)| (m + d, x.clone())).collect()
}

/// Entry of the dynamical monodromy 𝓜(λ) = M(λ|τ) T_τ^{σ_0^z}.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DynEntry {
    A,
    B,
    C,
    D,
}

impl DynEntry {
    pub fn from_index(i: usize, j: usize) -> Self {
        match (i, j) {
            (0, 0) => DynEntry::A,
            (0, 1) => DynEntry::B,
            (1, 0) => DynEntry::C,
            _ => DynEntry::D,
        }
    }

    fn index(self) -> (usize, usize) {
        match self {
            DynEntry::A => (0, 0),
            DynEntry::B => (0, 1),
            DynEntry::C => (1, 0),
            DynEntry::D => (1, 1),
        }
    }
}

/// Dynamical monodromy operators at a fixed spectral parameter, with the spin
/// monodromies cached per τ label.
pub struct DynMonodromy<'a> {
    p: &'a ModelParams,
    pub lambda: C64,
    cache: RefCell<HashMap<i64, Monodromy>>,
}

impl<'a> DynMonodromy<'a> {
    pub fn new(p: &'a ModelParams, lambda: C64) -> Self {
        DynMonodromy { p, lambda, cache: RefCell::new(HashMap::new()) }
    }

    fn tau(&self, m: i64) -> C64 {
        self.p.t0() + self.p.eta * m as f64
    }

    /// Spin block M_{ij}(λ|t_0 + ηm).
    pub fn spin_block(&self, i: usize, j: usize, m: i64) -> CMat {
        let mut cache = self.cache.borrow_mut();
        let mono = cache.entry(m).or_insert_with(|| monodromy_6vd(self.p, self.lambda, self.tau(m)));
        mono.block(i, j)
    }

    /// Applies 𝓜_{ij}(λ) to a dynamical-spin vector.
    pub fn apply(&self, e: DynEntry, v: &DynVec) -> DynVec {
        let (i, j) = e.index();
        let d = if j == 0 { -1 } else { 1 };
        let dim = self.p.dim();
        let mut out = DynVec::new();
        for (&m, x) in v {
            let mm = m + d;
            let y = self.spin_block(i, j, mm) * x;
            *out.entry(mm).or_insert_with(|| CVec::zeros(dim)) += y;
        }
        out
    }

    /// Applies M_{ij}(λ|τ) without any shift of τ.
    pub fn apply_unshifted(&self, i: usize, j: usize, v: &DynVec) -> DynVec {
        v.iter().map(|(&m, x)| (m, self.spin_block(i, j, m) * x)).collect()
    }

    /// 𝓑(λ) in the h-indexed basis of sector r: column h is B(λ|t_{r,h}+η) e_h.
    pub fn b_matrix(&self, sector: &DynSector) -> CMat {
        self.sector_matrix(sector, 0, 1, 1)
    }

    /// 𝓒(λ) in the h-indexed basis of sector r: column h is C(λ|t_{r,h}−η) e_h.
    pub fn c_matrix(&self, sector: &DynSector) -> CMat {
        self.sector_matrix(sector, 1, 0, -1)
    }

    fn sector_matrix(&self, sector: &DynSector, i: usize, j: usize, d: i64) -> CMat {
        let dim = self.p.dim();
        let mut out = CMat::zeros(dim, dim);
        for h in 0..dim {
            let blk = self.spin_block(i, j, sector.label_index(h) + d);
            out.set_column(h, &blk.column(h));
        }
        out
    }
}

fn add_into(acc: &mut DynVec, v: &DynVec, scale: C64) {
    for (&m, x) in v {
        let dim = x.len();
        *acc.entry(m).or_insert_with(|| CVec::zeros(dim)) += x * scale;
    }
}

fn dyn_max(v: &DynVec) -> f64 {
    v.values().map(max_abs_vec).fold(0.0, f64::max)
}

fn dyn_abs_diff(a: &DynVec, b: &DynVec) -> f64 {
    let mut keys: Vec<i64> = a.keys().chain(b.keys()).copied().collect();
    keys.sort_unstable();
    keys.dedup();
    let mut d: f64 = 0.0;
    for k in keys {
        match (a.get(&k), b.get(&k)) {
            (Some(x), Some(y)) => d = d.max(max_abs_vec(&(x - y))),
            (Some(x), None) | (None, Some(x)) => d = d.max(max_abs_vec(x)),
            _ => {}
        }
    }
    d
}

fn dyn_diff(a: &DynVec, b: &DynVec) -> f64 {
    let d = dyn_abs_diff(a, b);
    let s = dyn_max(a).max(dyn_max(b));
    if s == 0.0 {
        d
    } else {
        d / s
    }
}

/// 𝓣̄(λ) = 𝓑(λ) + 𝓒(λ) on sector 0, transported to V_N (the pure-spin avatar T̄^{(6VD)}).
pub fn antiperiodic_transfer_6vd(p: &ModelParams, lambda: C64) -> CMat {
    let dm = DynMonodromy::new(p, lambda);
    let sec = DynSector::new(p, 0);
    dm.b_matrix(&sec) + dm.c_matrix(&sec)
}

/// B^{(6VD)}(λ) and C^{(6VD)}(λ) on V_N.
pub fn bc_6vd(p: &ModelParams, lambda: C64) -> (CMat, CMat) {
    let dm = DynMonodromy::new(p, lambda);
    let sec = DynSector::new(p, 0);
    (dm.b_matrix(&sec), dm.c_matrix(&sec))
}

/// S_q(t) = S_1(ξ_1|t) S_2(ξ_2|t+ησ_1^z) ⋯ S_N(ξ_N|t+ηΣ_{a<N}σ_a^z) as a 2^N matrix.
pub fn s_q(p: &ModelParams, t: C64) -> CMat {
    let n = p.n();
    let mut m = CMat::identity(1 << n, 1 << n);
    for site in (1..=n).rev() {
        let xi = p.xi[site - 1];
        apply_local(&mut m, n, site - 1, |base| {
            let s: f64 = (0..site - 1).map(|a| spin(base, n, a)).sum();
            p.s_gauge_arr(xi, t + p.eta * s)
        });
    }
    m
}

/// S^{(r)}: column h is S_q(t_{r,h}) e_h.
pub fn vertex_irf_operator(p: &ModelParams, r: i64) -> CMat {
    let sec = DynSector::new(p, r);
    let dim = p.dim();
    let mut out = CMat::zeros(dim, dim);
    let mut by_label: BTreeMap<i64, CMat> = BTreeMap::new();
    for h in 0..dim {
        let m = sec.label_index(h);
        let sq = by_label.entry(m).or_insert_with(|| s_q(p, sec.tau(m)));
        out.set_column(h, &sq.column(h));
    }
    out
}

/// t̂^{(j)}_{r,h} for site j (1-based).
pub fn t_hat(p: &ModelParams, r: i64, h: usize, j: usize) -> C64 {
    let n = p.n();
    let mut s = c(0.0, 0.0);
    for k in 1..=n {
        let hk = crate::linalg::bit(h, n, k - 1) as f64;
        if k < j {
            s += p.eta * 0.5 * (1.0 - 2.0 * hk);
        } else if k > j {
            s += p.eta * 0.5 * (2.0 * hk - 1.0);
        }
    }
    s + p.twist.xf() * std::f64::consts::FRAC_PI_2
        + p.twist.yf() * std::f64::consts::FRAC_PI_2 * p.omega()
        + p.eta * r as f64
}

/// S^{(r)} built site by site: column h = ⊗_n S(ξ_n + η/2 | t̂^{(n)}_{r,h}) e_{h_n}.
pub fn vertex_irf_quasi_tensor(p: &ModelParams, r: i64) -> CMat {
    let n = p.n();
    let dim = p.dim();
    let mut out = CMat::zeros(dim, dim);
    for h in 0..dim {
        let mut col = CVec::from_element(1, c(1.0, 0.0));
        for j in 1..=n {
            let hj = crate::linalg::bit(h, n, j - 1);
            let s = p.s_gauge_arr(p.xi[j - 1] + p.eta * 0.5, t_hat(p, r, h, j));
            let local = CVec::from_vec(vec![s[0][hj], s[1][hj]]);
            col = col.kronecker(&local);
        }
        out.set_column(h, &col);
    }
    out
}

/// Random spin coefficients with entries in the unit box.
pub fn random_coeffs(rng: &mut ChaCha8Rng, dim: usize) -> CVec {
    CVec::from_fn(dim, |_, _| c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
}

/// Residual of T^{(8V)}(λ) = (−1)^x i^{xy} S^{(0)} T̄^{(6VD)}(λ) [S^{(0)}]^{-1}, with cond(S^{(0)}).
pub fn rel_tbis_residual(p: &ModelParams, lambda: C64) -> Result<(f64, f64)> {
    let s0 = vertex_irf_operator(p, 0);
    let (s0inv, cond) = inverse_with_cond(&s0)?;
    let rhs = &s0 * antiperiodic_transfer_6vd(p, lambda) * s0inv * p.twist.phase_x();
    Ok((rel_residual(&transfer_8v(p, lambda), &rhs), cond))
}

/// Applies S_q(τ) label-wise.
fn apply_sq(p: &ModelParams, v: &DynVec) -> DynVec {
    v.iter().map(|(&m, x)| (m, s_q(p, p.t0() + p.eta * m as f64) * x)).collect()
}

fn apply_op(op: &CMat, v: &DynVec) -> DynVec {
    v.iter().map(|(&m, x)| (m, op * x)).collect()
}

/// Right action of T^{(8V)} on S_q(τ)v for v in D̄^{(0)}, against
/// (−1)^x i^{xy}[S_q(τ−η)C(λ|τ−η) + S_q(τ+η)B(λ|τ+η)]v, compared label by label.
pub fn right_act_residual(p: &ModelParams, lambda: C64, coeffs: &CVec) -> f64 {
    let sec = DynSector::new(p, 0);
    let v = sec.embed(coeffs);
    let t8 = transfer_8v(p, lambda);
    let lhs = apply_op(&t8, &apply_sq(p, &v));
    let dm = DynMonodromy::new(p, lambda);
    let mut rhs = DynVec::new();
    for (&m, x) in &v {
        let cm = dm.spin_block(1, 0, m - 1) * x;
        let bm = dm.spin_block(0, 1, m + 1) * x;
        let y = s_q(p, sec.tau(m - 1)) * cm + s_q(p, sec.tau(m + 1)) * bm;
        *rhs.entry(m).or_insert_with(|| CVec::zeros(p.dim())) += y * p.twist.phase_x();
    }
    dyn_diff(&lhs, &rhs)
}

/// Residual of T^{(8V)} S^{(0)}P v = (−1)^x i^{xy} S^{(0)}P 𝓣̄ v on V_N, and for the
/// periodic case also of T Ŝ^{(0)}P v = −Ŝ^{(0)}P 𝓣̄ v.
pub fn right_act_projected_residuals(p: &ModelParams, lambda: C64, coeffs: &CVec) -> (f64, f64) {
    let s0 = vertex_irf_operator(p, 0);
    let tb = antiperiodic_transfer_6vd(p, lambda);
    let t8 = transfer_8v(p, lambda);
    let lhs = &t8 * (&s0 * coeffs);
    let rhs = &s0 * (&tb * coeffs) * p.twist.phase_x();
    let r1 = rel_residual_vec(&lhs, &rhs);
    let sh = &s0 * gamma_z(p.n());
    let lhs3 = &t8 * (&sh * coeffs);
    let rhs3 = -(&sh * (&tb * coeffs));
    (r1, rel_residual_vec(&lhs3, &rhs3))
}

/// Largest relative leak of 𝓑, 𝓒 and A(λ|τ), D(λ|τ) out of sector r on its basis vectors.
pub fn sector_preservation(p: &ModelParams, lambda: C64, r: i64) -> f64 {
    let sec = DynSector::new(p, r);
    let dm = DynMonodromy::new(p, lambda);
    let dim = p.dim();
    let mut w: f64 = 0.0;
    for h in 0..dim {
        let mut e = CVec::zeros(dim);
        e[h] = c(1.0, 0.0);
        let v = sec.embed(&e);
        for out in [
            dm.apply(DynEntry::B, &v),
            dm.apply(DynEntry::C, &v),
            dm.apply_unshifted(0, 0, &v),
            dm.apply_unshifted(1, 1, &v),
        ] {
            w = w.max(sec.leak(&out));
        }
    }
    w
}

/// Inversion formula of the dynamical monodromy on basis vectors of several labels:
/// 𝓜(λ)σ^y𝓜(λ−η)^{t_0}σ^y = e^{−iyηS} θ(τ)/θ(τ+ηS) det_q M(λ).
pub fn inv_mon_residual(p: &ModelParams, lambda: C64, labels: &[i64]) -> f64 {
    let m1 = DynMonodromy::new(p, lambda);
    let m2 = DynMonodromy::new(p, lambda - p.eta);
    let dim = p.dim();
    let n = p.n();
    let dq = p.quantum_det(lambda);
    let y = p.twist.yf();
    let mut w: f64 = 0.0;
    use DynEntry::*;
    for &m in labels {
        let tau = p.t0() + p.eta * m as f64;
        for h in 0..dim {
            let mut e = CVec::zeros(dim);
            e[h] = c(1.0, 0.0);
            let v: DynVec = [(m, e)].into_iter().collect();
            let s = s_of(h, n) as f64;
            let expect = (-I * y * p.eta * s).exp() * p.th(tau) / p.th(tau + p.eta * s) * dq;
            let prod = |x: DynEntry, yv: DynEntry| m1.apply(x, &m2.apply(yv, &v));
            let terms = [prod(A, D), prod(B, C), prod(B, A), prod(A, B), prod(C, D), prod(D, C), prod(D, A), prod(C, B)];
            let combine = |i: usize| {
                let mut e = terms[i].clone();
                add_into(&mut e, &terms[i + 1], c(-1.0, 0.0));
                e
            };
            let (e00, e01, e10, e11) = (combine(0), combine(2), combine(4), combine(6));
            let mut target = CVec::zeros(dim);
            target[h] = expect;
            let t: DynVec = [(m, target)].into_iter().collect();
            // relative to the size of the individual products, which bounds the cancellation error
            let scale = terms.iter().map(dyn_max).fold(expect.norm(), f64::max).max(1e-300);
            w = w.max(dyn_abs_diff(&e00, &t) / scale).max(dyn_abs_diff(&e11, &t) / scale);
            w = w.max(dyn_max(&e01) / scale).max(dyn_max(&e10) / scale);
        }
    }
    w
}

/// Dynamical RTT relation R_{00'}(λ_{00'}|τ+ηS)𝓜_0(λ_0)𝓜_{0'}(λ_{0'}) = 𝓜_{0'}(λ_{0'})𝓜_0(λ_0)R_{00'}(λ_{00'}|τ).
pub fn rtt_op_residual(p: &ModelParams, l1: C64, l2: C64, labels: &[i64]) -> f64 {
    let m1 = DynMonodromy::new(p, l1);
    let m2 = DynMonodromy::new(p, l2);
    let dim = p.dim();
    let n = p.n();
    let l12 = l1 - l2;
    let mut w: f64 = 0.0;
    for &m in labels {
        for h in 0..dim {
            let mut e = CVec::zeros(dim);
            e[h] = c(1.0, 0.0);
            let v: DynVec = [(m, e)].into_iter().collect();
            let tau_in = p.t0() + p.eta * m as f64;
            let r_in = p.r6vd_gate(l12, tau_in);
            for j in 0..2 {
                for jp in 0..2 {
                    // LHS columns (jj'): products M_{kj}(λ0) M_{k'j'}(λ0') v, then R(τ+ηS) on the output.
                    let mut prods: Vec<DynVec> = Vec::with_capacity(4);
                    for k in 0..2 {
                        for kp in 0..2 {
                            prods.push(m1.apply(DynEntry::from_index(k, j), &m2.apply(DynEntry::from_index(kp, jp), &v)));
                        }
                    }
                    for i in 0..2 {
                        for ip in 0..2 {
                            let mut lhs = DynVec::new();
                            for (kk, pv) in prods.iter().enumerate() {
                                for (&mm, x) in pv {
                                    let tau_out = p.t0() + p.eta * mm as f64;
                                    let y = CVec::from_fn(dim, |hh, _| {
                                        let s = s_of(hh, n) as f64;
                                        p.r6vd_gate(l12, tau_out + p.eta * s)[(2 * i + ip, kk)] * x[hh]
                                    });
                                    *lhs.entry(mm).or_insert_with(|| CVec::zeros(dim)) += y;
                                }
                            }
                            let mut rhs = DynVec::new();
                            for k in 0..2 {
                                for kp in 0..2 {
                                    let coef = r_in[(2 * k + kp, 2 * j + jp)];
                                    if coef == c(0.0, 0.0) {
                                        continue;
                                    }
                                    let out = m2.apply(DynEntry::from_index(ip, kp), &m1.apply(DynEntry::from_index(i, k), &v));
                                    add_into(&mut rhs, &out, coef);
                                }
                            }
                            w = w.max(dyn_diff(&lhs, &rhs));
                        }
                    }
                }
            }
        }
    }
    w
}

/// Operator S_q(t + ησ_0^z) on aux ⊗ V_N.
fn s_q_aux(p: &ModelParams, t: C64) -> CMat {
    let d = p.dim();
    let mut m = CMat::zeros(2 * d, 2 * d);
    m.view_mut((0, 0), (d, d)).copy_from(&s_q(p, t + p.eta));
    m.view_mut((d, d), (d, d)).copy_from(&s_q(p, t - p.eta));
    m
}

/// S_0(λ|t + ηS) on aux ⊗ V_N, the shift reading the total spin.
fn s0_total(p: &ModelParams, lambda: C64, t: C64) -> CMat {
    let n = p.n();
    let nq = n + 1;
    let mut m = CMat::identity(1 << nq, 1 << nq);
    apply_local(&mut m, nq, 0, |base| {
        let s: f64 = (1..nq).map(|a| spin(base, nq, a)).sum();
        p.s_gauge_arr(lambda, t + p.eta * s)
    });
    m
}

fn s0_plain(p: &ModelParams, lambda: C64, t: C64) -> CMat {
    crate::linalg::kron(&p.s_gauge(lambda, t), &CMat::identity(p.dim(), p.dim()))
}

/// Monodromy form of the vertex-IRF relation:
/// M^{(8V)}(λ) S_0(λ|t) S_q(t+ησ_0^z) = S_q(t) S_0(λ|t+ηS) M(λ|t).
pub fn vertex_irf_monodromy_residual(p: &ModelParams, lambda: C64, t: C64) -> f64 {
    let lhs = monodromy_8v(p, lambda).m * s0_plain(p, lambda, t) * s_q_aux(p, t);
    let sq = crate::linalg::kron(&CMat::identity(2, 2), &s_q(p, t));
    let rhs = sq * s0_total(p, lambda, t) * monodromy_6vd(p, lambda, t).m;
    rel_residual(&lhs, &rhs)
}

/// Coefficients s_{ij}^{αβ}(λ|t) and s̃_{ij}^{αβ}(λ|t), indexed [i][j][α][β].
pub fn s_coefficients(p: &ModelParams, lambda: C64, t: C64) -> Result<([[[[C64; 2]; 2]; 2]; 2], [[[[C64; 2]; 2]; 2]; 2])> {
    let s = p.s_gauge(lambda, t);
    let si = inverse(&s)?;
    let mut sc = [[[[c(0.0, 0.0); 2]; 2]; 2]; 2];
    let mut st = sc;
    for i in 0..2 {
        for j in 0..2 {
            for a in 0..2 {
                for b in 0..2 {
                    sc[i][j][a][b] = si[(a, i)] * s[(j, b)];
                    st[i][j][a][b] = s[(a, i)] * si[(j, b)];
                }
            }
        }
    }
    Ok((sc, st))
}

/// max |Σ_{αβ} s_{ij}^{αβ} s̃_{αβ}^{kl} − δ_{ik}δ_{jl}|.
pub fn s_biorthogonality_residual(p: &ModelParams, lambda: C64, t: C64) -> Result<f64> {
    let (sc, st) = s_coefficients(p, lambda, t)?;
    let mut w: f64 = 0.0;
    for i in 0..2 {
        for j in 0..2 {
            for k in 0..2 {
                for l in 0..2 {
                    let mut acc = c(0.0, 0.0);
                    for a in 0..2 {
                        for b in 0..2 {
                            acc += sc[i][j][a][b] * st[a][b][k][l];
                        }
                    }
                    let target = if i == k && j == l { 1.0 } else { 0.0 };
                    w = w.max((acc - target).norm());
                }
            }
        }
    }
    Ok(w)
}

/// Residuals of the two matrix-element relations between the twisted inverse 8-vertex
/// monodromy M_{(x,y)} = K_0 M^{(8V)} and M̄(λ|τ) = σ_0^x M(λ|τ), on the spin coefficients
/// `coeffs` of a vector of D̄^{(0)}. Returns (first relation, second relation).
pub fn matrix_element_residuals(p: &ModelParams, lambda: C64, coeffs: &CVec) -> Result<(f64, f64)> {
    let sec = DynSector::new(p, 0);
    let d = p.dim();
    let kmat = crate::linalg::kron(&p.twist.k_matrix(), &CMat::identity(d, d));
    let mxy_inv = inverse(&(kmat * monodromy_8v(p, lambda).m))?;
    let blk = |m: &CMat, i: usize, j: usize| m.view((i * d, j * d), (d, d)).into_owned();
    let sx = crate::linalg::kron(&sigma_x(), &CMat::identity(d, d));
    let ph = p.twist.phase_x();
    let mut w1: f64 = 0.0;
    let mut w2: f64 = 0.0;
    let mut groups: BTreeMap<i64, Vec<usize>> = BTreeMap::new();
    for h in 0..d {
        groups.entry(sec.label_index(h)).or_default().push(h);
    }
    for (&m, hs) in &groups {
        let t = sec.tau(m);
        let mut v = CVec::zeros(d);
        for &h in hs {
            v[h] = coeffs[h];
        }
        let sq = s_q(p, t);
        let sq_shift = [s_q(p, t + p.eta), s_q(p, t - p.eta)];
        let mbar_inv = inverse(&(&sx * monodromy_6vd(p, lambda, t).m))?;
        let (sc, st) = s_coefficients(p, lambda, t)?;
        let sqv = &sq * &v;
        let (mut d1, mut sc1, mut d2, mut sc2) = (0.0f64, 0.0f64, 0.0f64, 0.0f64);
        for k in 0..2 {
            for j in 0..2 {
                let lhs1 = blk(&mxy_inv, k, j) * &sqv;
                let mut rhs1 = CVec::zeros(d);
                for a in 0..2 {
                    for b in 0..2 {
                        rhs1 += &sq_shift[b] * (blk(&mbar_inv, b, a) * &v) * sc[j][k][a][b];
                    }
                }
                rhs1 *= ph.inv();
                d1 = d1.max(max_abs_vec(&(&lhs1 - &rhs1)));
                sc1 = sc1.max(max_abs_vec(&lhs1)).max(max_abs_vec(&rhs1));
                let lhs2 = &sq_shift[k] * (blk(&mbar_inv, k, j) * &v);
                let mut rhs2 = CVec::zeros(d);
                for a in 0..2 {
                    for b in 0..2 {
                        rhs2 += blk(&mxy_inv, b, a) * &sqv * st[j][k][a][b];
                    }
                }
                rhs2 *= ph;
                d2 = d2.max(max_abs_vec(&(&lhs2 - &rhs2)));
                sc2 = sc2.max(max_abs_vec(&lhs2)).max(max_abs_vec(&rhs2));
            }
        }
        w1 = w1.max(d1 / sc1.max(f64::MIN_POSITIVE));
        w2 = w2.max(d2 / sc2.max(f64::MIN_POSITIVE));
    }
    Ok((w1, w2))
}

/// Kernel structure of S^{(0)} and Ŝ^{(0)} = S^{(0)}Γ_z for the periodic chain with N odd.
#[derive(Clone, Debug)]
pub struct KernelAnalysis {
    pub s0: CMat,
    pub s_hat: CMat,
    pub ker_s0: CMat,
    pub ker_s_hat: CMat,
    /// Dimension of ker S^{(0)} ∩ ker Ŝ^{(0)}.
    pub intersection_dim: usize,
    /// Ratio of the largest discarded to smallest kept singular value (gap quality).
    pub gap: f64,
}

pub const KERNEL_GAP: f64 = 1e-6;

pub fn kernel_analysis_periodic_odd(p: &ModelParams) -> Result<KernelAnalysis> {
    if !p.twist.is_periodic() || p.n() % 2 == 0 {
        return Err(Error::Parameter("kernel analysis needs the periodic chain with N odd".into()));
    }
    let s0 = vertex_irf_operator(p, 0);
    let s_hat = &s0 * gamma_z(p.n());
    let mut gap: f64 = 0.0;
    for m in [&s0, &s_hat] {
        let s = singular_values(m);
        let smax = s[0];
        let kept: Vec<f64> = s.iter().copied().filter(|&x| x > KERNEL_GAP * smax).collect();
        let dropped = s.iter().copied().filter(|&x| x <= KERNEL_GAP * smax).fold(0.0, f64::max);
        let smallest_kept = kept.last().copied().unwrap_or(smax);
        gap = gap.max(dropped / smallest_kept);
    }
    if gap > 1e-4 {
        return Err(Error::NonGeneric(format!("no clean singular-value gap in S^(0) (ratio {gap:.3e})")));
    }
    let ker_s0 = null_space(&s0, KERNEL_GAP);
    let ker_s_hat = null_space(&s_hat, KERNEL_GAP);
    let mut joint = CMat::zeros(p.dim(), ker_s0.ncols() + ker_s_hat.ncols());
    joint.view_mut((0, 0), (p.dim(), ker_s0.ncols())).copy_from(&ker_s0);
    joint.view_mut((0, ker_s0.ncols()), (p.dim(), ker_s_hat.ncols())).copy_from(&ker_s_hat);
    let rank = orth(&joint, KERNEL_GAP).ncols();
    let intersection_dim = ker_s0.ncols() + ker_s_hat.ncols() - rank;
    Ok(KernelAnalysis { s0, s_hat, ker_s0, ker_s_hat, intersection_dim, gap })
}

/// The pair S^{(±)} = S^{(0)} ± G S^{(0)} Γ_z built from the swap operator G.
#[derive(Clone, Debug)]
pub struct PseudoSimilarities {
    pub g: CMat,
    pub s_plus: CMat,
    pub s_minus: CMat,
    pub cond_plus: f64,
    pub cond_minus: f64,
}

/// G from a basis of T-eigenvectors: columns of `psi_plus` and `psi_minus` are the
/// paired ψ_t^+ and ψ_t^−, and G swaps them.
pub fn swap_operator(psi_plus: &CMat, psi_minus: &CMat) -> Result<CMat> {
    let d = psi_plus.nrows();
    let k = psi_plus.ncols();
    if psi_minus.ncols() != k || 2 * k != d {
        return Err(Error::Dependency(format!("need {} paired eigenvectors, got {k}", d / 2)));
    }
    let mut src = CMat::zeros(d, d);
    let mut dst = CMat::zeros(d, d);
    src.view_mut((0, 0), (d, k)).copy_from(psi_plus);
    src.view_mut((0, k), (d, k)).copy_from(psi_minus);
    dst.view_mut((0, 0), (d, k)).copy_from(psi_minus);
    dst.view_mut((0, k), (d, k)).copy_from(psi_plus);
    let (inv, _) = inverse_with_cond(&src)?;
    Ok(dst * inv)
}

pub fn pseudo_similarities(p: &ModelParams, g: CMat) -> Result<PseudoSimilarities> {
    let s0 = vertex_irf_operator(p, 0);
    let sbar = &g * &s0 * gamma_z(p.n());
    let s_plus = &s0 + &sbar;
    let s_minus = &s0 - &sbar;
    let cond_plus = condition_number(&s_plus);
    let cond_minus = condition_number(&s_minus);
    for (name, cnd) in [("S(+)", cond_plus), ("S(-)", cond_minus)] {
        if !cnd.is_finite() || cnd > 1e8 {
            return Err(Error::NonGeneric(format!("{name} is numerically singular (cond {cnd:.3e})")));
        }
    }
    Ok(PseudoSimilarities { g, s_plus, s_minus, cond_plus, cond_minus })
}

/// Residual of T S^{(±)} = S^{(∓)} T̄^{(6VD)}.
pub fn pseudo_similarity_residual(p: &ModelParams, ps: &PseudoSimilarities, lambda: C64) -> f64 {
    let t8 = transfer_8v(p, lambda);
    let tb = antiperiodic_transfer_6vd(p, lambda);
    let r1 = rel_residual(&(&t8 * &ps.s_plus), &(&ps.s_minus * &tb));
    let r2 = rel_residual(&(&t8 * &ps.s_minus), &(&ps.s_plus * &tb));
    r1.max(r2)
}

/// ∏_a 𝓣̄(ξ_a) against ∏𝒶(ξ_a)·∏_a{T_τ^{σ_a^z}σ_a^x} on sector 0, both as matrices on V_N.
pub fn prod_transfer_residual(p: &ModelParams) -> f64 {
    let n = p.n();
    let dim = p.dim();
    let mut lhs = CMat::identity(dim, dim);
    for a in 0..n {
        lhs = antiperiodic_transfer_6vd(p, p.xi[a]) * lhs;
    }
    // The τ shifts are absorbed by the projection, leaving Γ_x.
    let scale: C64 = p.xi.iter().map(|&x| p.sa(x)).product();
    let rhs = crate::lattice::gamma_x(n) * scale;
    rel_residual(&lhs, &rhs)
}

/// Identity suite of the dynamical representation for one parameter set.
///
/// The periodic chain with N even puts a sector-0 label on a zero of θ, so it yields no claims.
pub fn verify_dynamical(p: &ModelParams, lambdas: &[C64], rng: &mut ChaCha8Rng, tol: f64) -> Vec<Claim> {
    if p.twist.is_periodic() && p.n() % 2 == 0 {
        return Vec::new();
    }
    let ctx = format!("N={} twist={}", p.n(), p.twist);
    let mut out = Vec::new();
    let labels: Vec<i64> = (-1..=p.n() as i64 + 1).collect();
    out.push(worst(
        "sector-preservation",
        "B, C and the unshifted A, D keep the invariant sector of ηS + 2τ",
        lambdas.iter().map(|&l| sector_preservation(p, l, 0)),
        1e-12,
    ));
    out.push(worst(
        "inv-mon",
        "inversion formula of the dynamical monodromy",
        lambdas.iter().map(|&l| inv_mon_residual(p, l, &labels)),
        tol,
    ));
    if lambdas.len() >= 2 {
        out.push(worst(
            "RTT-op",
            "quadratic relation of the dynamical monodromy operators",
            lambdas.windows(2).map(|w| rtt_op_residual(p, w[0], w[1], &labels[..3])),
            tol,
        ));
    }
    out.push(worst(
        "v-IRF-mon",
        "vertex-IRF relation between the monodromy matrices",
        lambdas.iter().map(|&l| vertex_irf_monodromy_residual(p, l, c(0.37, 0.21))),
        tol,
    ));
    out.push(worst(
        "S-quasi-tensor",
        "S^(0) equals its site-by-site product form",
        std::iter::once(rel_residual(&vertex_irf_operator(p, 0), &vertex_irf_quasi_tensor(p, 0))),
        1e-10,
    ));
    let coeffs: Vec<CVec> = (0..5).map(|_| random_coeffs(rng, p.dim())).collect();
    out.push(worst(
        "right-act-T",
        "right action of the twisted transfer matrix through S_q(τ)",
        lambdas.iter().flat_map(|&l| coeffs.iter().map(move |v| (l, v))).map(|(l, v)| right_act_residual(p, l, v)),
        1e-8,
    ));
    let proj: Vec<(f64, f64)> = lambdas
        .iter()
        .flat_map(|&l| coeffs.iter().map(move |v| (l, v)))
        .map(|(l, v)| right_act_projected_residuals(p, l, v))
        .collect();
    out.push(worst(
        "right-act-T2",
        "T S^(0) P v equals the twist phase times S^(0) P applied to the antiperiodic transfer",
        proj.iter().map(|x| x.0),
        1e-8,
    ));
    if p.twist.is_periodic() {
        out.push(worst(
            "right-act-T3",
            "T Ŝ^(0) P v equals −Ŝ^(0) P applied to the antiperiodic transfer",
            proj.iter().map(|x| x.1),
            1e-8,
        ));
    }
    let zt: Vec<f64> = lambdas
        .iter()
        .map(|&l| {
            let tb = antiperiodic_transfer_6vd(p, l);
            let gz = gamma_z(p.n());
            rel_residual(&(&gz * &tb * &gz), &(-tb))
        })
        .collect();
    out.push(worst("z-Tbar", "Γ_z anticommutes with the antiperiodic dynamical transfer matrix", zt, 1e-10));
    if lambdas.len() >= 2 {
        let a = antiperiodic_transfer_6vd(p, lambdas[0]);
        let b = antiperiodic_transfer_6vd(p, lambdas[1]);
        out.push(worst(
            "Tbar-commute",
            "antiperiodic dynamical transfer matrices commute",
            std::iter::once(rel_residual(&(&a * &b), &(&b * &a))),
            1e-10,
        ));
    }
    out.push(worst(
        "prod-transfer",
        "product of the antiperiodic transfer matrices at the inhomogeneities",
        std::iter::once(prod_transfer_residual(p)),
        1e-9,
    ));
    if !p.twist.is_periodic() {
        let mut conds = Vec::new();
        let res: Vec<f64> = lambdas
            .iter()
            .map(|&l| match rel_tbis_residual(p, l) {
                Ok((r, cnd)) => {
                    conds.push(cnd);
                    r
                }
                Err(_) => f64::INFINITY,
            })
            .collect();
        let cond = conds.iter().copied().fold(0.0, f64::max);
        out.push(
            worst("rel-Tbis", "twisted transfer matrix as a conjugate of the antiperiodic dynamical one", res, 1e-8)
                .with_context(format!("{ctx} cond(S0)={cond:.3e}")),
        );
        let mut r1 = Vec::new();
        let mut r2 = Vec::new();
        for &l in lambdas {
            for v in &coeffs {
                match matrix_element_residuals(p, l, v) {
                    Ok((a, b)) => {
                        r1.push(a);
                        r2.push(b);
                    }
                    Err(_) => {
                        r1.push(f64::INFINITY);
                        r2.push(f64::INFINITY);
                    }
                }
            }
        }
        out.push(worst("act-el1", "inverse twisted monodromy entries through S_q(τ)", r1, 1e-8));
        out.push(worst("act-el2", "inverse dynamical monodromy entries through S_q(τ)", r2, 1e-8));
    }
    out.push(worst(
        "s-biorthogonality",
        "the s and s̃ conjugation coefficients are mutually inverse",
        lambdas.iter().map(|&l| s_biorthogonality_residual(p, l, c(0.41, -0.17)).unwrap_or(f64::INFINITY)),
        1e-10,
    ));
    for cl in out.iter_mut() {
        if cl.context.is_empty() || cl.context.ends_with("samples") {
            let extra = std::mem::take(&mut cl.context);
            cl.context = format!("{ctx} {extra}").trim().to_string();
        }
    }
    out
}

/// Max-entry norm of an operator, exposed for reports.
pub fn op_scale(m: &CMat) -> f64 {
    max_abs(m)
}
