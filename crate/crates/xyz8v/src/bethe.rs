//! Functional T-Q reformulations of the spectrum: the homogeneous equation with
//! θ_X-type Q-functions and the inhomogeneous one with plain θ Q-functions,
//! together with ABA-type eigenstates built from diagonal operators in the SOV basis.

use std::f64::consts::PI;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::claims::{worst, Claim};
use crate::dynamical::{vertex_irf_operator, PseudoSimilarities};
use crate::error::{Error, Result};
use crate::linalg::{bit, c, inverse, normalize_phase, orth, overlap, rel_diff, span_overlap, CMat, CVec, C64, I};
use crate::model::ModelParams;
use crate::oracle::{node_distance, OracleSpectrum};
use crate::sov::{left_separate_coeffs, right_separate_coeffs, xi_shift, NodeValues, SovBasis};
use crate::spectrum::{build_eigenstate_twisted, eigen_residual, quasi_periodicity_residual, sample_points, EigenvalueFn};
use crate::lattice::transfer_8v;

/// Functional class of a Q-function.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum QClass {
    /// ∏ θ_X(λ − λ_j) for a non-trivial twist.
    ThetaX,
    /// ∏ θ(λ − λ_j).
    Theta,
}

/// Q(λ) = ∏_j θ_•(λ − λ_j).
#[derive(Clone, Debug, Serialize)]
pub struct QFunction {
    #[serde(serialize_with = "crate::claims::ser_c64_vec")]
    pub roots: Vec<C64>,
    pub class: QClass,
}

impl QFunction {
    pub fn new(roots: Vec<C64>, class: QClass) -> Self {
        QFunction { roots, class }
    }

    fn factor(&self, p: &ModelParams, z: C64) -> C64 {
        match self.class {
            QClass::ThetaX => p.elliptic.theta_x(z, p.twist).expect("θ_X needs a twisted chain"),
            QClass::Theta => p.th(z),
        }
    }

    fn factor_deriv(&self, p: &ModelParams, z: C64) -> C64 {
        match self.class {
            QClass::ThetaX => p.elliptic.theta_x_deriv(z, p.twist).expect("θ_X needs a twisted chain"),
            QClass::Theta => p.elliptic.th_deriv(z),
        }
    }

    pub fn eval(&self, p: &ModelParams, lambda: C64) -> C64 {
        self.roots.iter().map(|&r| self.factor(p, lambda - r)).product()
    }

    /// ∂Q(λ)/∂λ_j for every root.
    pub fn root_gradient(&self, p: &ModelParams, lambda: C64) -> Vec<C64> {
        let vals: Vec<C64> = self.roots.iter().map(|&r| self.factor(p, lambda - r)).collect();
        (0..self.roots.len())
            .map(|j| {
                let mut g = -self.factor_deriv(p, lambda - self.roots[j]);
                for (k, v) in vals.iter().enumerate() {
                    if k != j {
                        g *= v;
                    }
                }
                g
            })
            .collect()
    }

    /// α_Q = Σ λ_j.
    pub fn norm(&self) -> C64 {
        self.roots.iter().sum()
    }

    /// Period lattice (real, imaginary) of the root positions.
    pub fn lattice(&self, p: &ModelParams) -> (C64, C64) {
        let w = p.omega();
        match self.class {
            QClass::Theta => (c(PI, 0.0), PI * w),
            QClass::ThetaX => match (p.twist.x, p.twist.y) {
                (0, 1) => (c(2.0 * PI, 0.0), PI * w),
                (1, 0) => (c(PI, 0.0), 2.0 * PI * w),
                _ => (c(2.0 * PI, 0.0), 2.0 * PI * w),
            },
        }
    }

    /// Roots reduced to the fundamental cell of the period lattice, sorted.
    pub fn canonical_roots(&self, p: &ModelParams) -> Vec<C64> {
        let (pr, pi) = self.lattice(p);
        let mut out: Vec<C64> = self.roots.iter().map(|&r| reduce_to_cell(r, pr, pi)).collect();
        out.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
        out
    }
}

/// Writes z = a·p_r + b·p_i with real a, b and reduces both into [0, 1).
fn reduce_to_cell(z: C64, pr: C64, pi: C64) -> C64 {
    let det = pr.re * pi.im - pr.im * pi.re;
    let a = (z.re * pi.im - z.im * pi.re) / det;
    let b = (pr.re * z.im - pr.im * z.re) / det;
    let fa = a - a.floor();
    let fb = b - b.floor();
    let fa = if fa > 1.0 - 1e-9 { 0.0 } else { fa };
    let fb = if fb > 1.0 - 1e-9 { 0.0 } else { fb };
    pr * fa + pi * fb
}

/// Distance between two root multisets modulo the lattice (greedy matching).
pub fn root_set_distance(p: &ModelParams, a: &QFunction, b: &QFunction) -> f64 {
    let (pr, pi) = a.lattice(p);
    let mut used = vec![false; b.roots.len()];
    let mut worst_d: f64 = 0.0;
    for &ra in &a.roots {
        let mut best = (f64::INFINITY, 0);
        for (k, &rb) in b.roots.iter().enumerate() {
            if used[k] {
                continue;
            }
            let d = reduce_to_cell(ra - rb + (pr + pi) * 0.5, pr, pi) - (pr + pi) * 0.5;
            if d.norm() < best.0 {
                best = (d.norm(), k);
            }
        }
        if best.0.is_finite() {
            used[best.1] = true;
        }
        worst_d = worst_d.max(best.0);
    }
    worst_d
}

/// Relative spread of Q_1(λ)/Q_2(λ) over the sample points; zero when Q_1 ∝ Q_2.
pub fn q_ratio_variation(p: &ModelParams, a: &QFunction, b: &QFunction, samples: &[C64]) -> f64 {
    let ratios: Vec<C64> = samples.iter().map(|&l| a.eval(p, l) / b.eval(p, l)).collect();
    ratios.iter().map(|r| rel_diff(*r, ratios[0])).fold(0.0, f64::max)
}

/// Constant c_X of the D_β operators.
pub fn c_x(p: &ModelParams) -> Result<C64> {
    let e = &p.elliptic;
    let w = p.omega();
    let inv = match (p.twist.x, p.twist.y) {
        (0, 1) => e.theta(4, c(0.0, 0.0), 1),
        (1, 0) => I / 2.0 * (-I * PI * w / 2.0).exp() * e.theta(2, c(0.0, 0.0), 1),
        (1, 1) => 0.5 * (-I * PI * w / 2.0).exp() * e.theta(2, c(0.0, 0.0), 1) * e.theta(3, c(0.0, 0.0), 1) * e.theta(4, c(0.0, 0.0), 1),
        _ => return Err(Error::UnsupportedTwist),
    };
    Ok(inv.inv())
}

/// max over u of |c_X e^{iδ_{y0}u} θ_X(u)θ_X(u+π_X) − θ(u)| / |θ(u)|.
pub fn c_x_identity_residual(p: &ModelParams, samples: &[C64]) -> Result<f64> {
    let cx = c_x(p)?;
    let pix = p.elliptic.pi_x(p.twist);
    let dy = if p.twist.y == 0 { 1.0 } else { 0.0 };
    let mut r: f64 = 0.0;
    for &u in samples {
        let lhs = cx * (I * dy * u).exp() * p.elliptic.theta_x(u, p.twist)? * p.elliptic.theta_x(u + pix, p.twist)?;
        r = r.max(rel_diff(lhs, p.th(u)));
    }
    Ok(r)
}

/// The diagonal operator D_β(λ) on the SOV basis.
#[derive(Clone, Debug, Serialize)]
pub struct DBeta {
    pub beta: Vec<u8>,
}

impl DBeta {
    /// Eigenvalue of D_β(λ) on |h̲⟩.
    pub fn value(&self, p: &ModelParams, lambda: C64, h: usize) -> Result<C64> {
        let n = p.n();
        let cx = c_x(p)?;
        let pix = p.elliptic.pi_x(p.twist);
        let k = (p.twist.x + p.twist.y - p.twist.x * p.twist.y) as f64;
        let dy = if p.twist.y == 0 { 1.0 } else { 0.0 };
        let mut v = c(1.0, 0.0);
        for a in 0..n {
            let ha = bit(h, n, a);
            let u = lambda - xi_shift(p, a, ha);
            if self.beta[a] == 1 {
                v *= cx * (I * PI * k * ha as f64 / n as f64 + I * dy * u).exp() * p.elliptic.theta_x(u + pix, p.twist)?;
            } else {
                v *= p.elliptic.theta_x(u, p.twist)?;
            }
        }
        Ok(v)
    }

    pub fn complement(&self) -> DBeta {
        DBeta { beta: self.beta.iter().map(|b| 1 - b).collect() }
    }
}

/// Eigenvalue ∏_n θ(λ − ξ_n^{(h_n)}) of D̄(λ) on |h̲⟩.
pub fn d_bar_value(p: &ModelParams, lambda: C64, h: usize) -> C64 {
    (0..p.n()).map(|a| p.th(lambda - xi_shift(p, a, bit(h, p.n(), a)))).product()
}

/// max over h of |e^{iπk(S−N)/(2N)} D_β D_{1−β} − D̄| relative, with S|h̲⟩ = (N − 2|h|)|h̲⟩.
pub fn d_bar_residual(p: &ModelParams, beta: &DBeta, lambda: C64) -> Result<f64> {
    let n = p.n();
    let k = (p.twist.x + p.twist.y - p.twist.x * p.twist.y) as f64;
    let comp = beta.complement();
    let mut r: f64 = 0.0;
    for h in 0..1usize << n {
        let s = n as f64 - 2.0 * h.count_ones() as f64;
        let pref = (I * PI * k * (s - n as f64) / (2.0 * n as f64)).exp();
        let lhs = pref * beta.value(p, lambda, h)? * comp.value(p, lambda, h)?;
        r = r.max(rel_diff(lhs, d_bar_value(p, lambda, h)));
    }
    Ok(r)
}

/// Lexicographically smallest β with Q(ξ_n + β_n π_X) ≠ 0 for every n.
pub fn admissible_beta(p: &ModelParams, q: &QFunction) -> Result<DBeta> {
    let pix = p.elliptic.pi_x(p.twist);
    let scale = p.xi.iter().map(|&x| q.eval(p, x).norm().max(q.eval(p, x + pix).norm())).fold(0.0, f64::max);
    let mut beta = Vec::with_capacity(p.n());
    for &x in &p.xi {
        if q.eval(p, x).norm() > 1e-8 * scale {
            beta.push(0);
        } else if q.eval(p, x + pix).norm() > 1e-8 * scale {
            beta.push(1);
        } else {
            return Err(Error::NoAdmissibleBeta(format!("Q vanishes at ξ = {x} and at ξ + π_X")));
        }
    }
    Ok(DBeta { beta })
}

/// t(λ)Q(λ) − (−1)^y(−i)^{xy}𝒶(λ)Q(λ−η) − (−1)^x i^{xy}𝒹(λ)Q(λ+η), with the relative scale
/// |tQ| + |𝒶Q(λ−η)| + |𝒹Q(λ+η)|. `h` selects the e^{±ih(1−y)η} branch.
pub fn tq_residual_homogeneous(p: &ModelParams, t: C64, q: &QFunction, lambda: C64, h: u8) -> (C64, f64) {
    let e = (I * h as f64 * (1.0 - p.twist.yf()) * p.eta).exp();
    let t1 = t * q.eval(p, lambda);
    let t2 = p.twist.phase_y_conj() * e * p.sa(lambda) * q.eval(p, lambda - p.eta);
    let t3 = p.twist.phase_x() / e * p.sd(lambda) * q.eval(p, lambda + p.eta);
    (t1 - t2 - t3, t1.norm() + t2.norm() + t3.norm())
}

/// t(λ) from the Bethe form with Q in the denominator.
pub fn bethe_eigenvalue(p: &ModelParams, q: &QFunction, lambda: C64, h: u8) -> C64 {
    let e = (I * h as f64 * (1.0 - p.twist.yf()) * p.eta).exp();
    (p.twist.phase_y_conj() * e * p.sa(lambda) * q.eval(p, lambda - p.eta) + p.twist.phase_x() / e * p.sd(lambda) * q.eval(p, lambda + p.eta)) / q.eval(p, lambda)
}

/// Gauge data of the inhomogeneous equation.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct InhomTQData {
    #[serde(serialize_with = "crate::claims::ser_c64")]
    pub beta: C64,
    #[serde(serialize_with = "crate::claims::ser_c64")]
    pub mu: C64,
}

impl InhomTQData {
    pub const FIXTURE: InhomTQData = InhomTQData { beta: C64 { re: 1.0, im: 0.5 }, mu: C64 { re: 0.93, im: 0.4 } };

    /// Rejects β ∈ ℝ and μ on the excluded lattice.
    pub fn validate(&self, p: &ModelParams) -> Result<()> {
        if self.beta.im.abs() < 1e-12 {
            return Err(Error::Parameter("β must not be real".into()));
        }
        if p.eta.im.abs() < 1e-12 {
            return Err(Error::Parameter("the inhomogeneous equation needs a non-real η".into()));
        }
        let t0 = p.t0();
        let w = p.omega();
        for &x in &p.xi {
            for z in [self.mu - x, self.mu - x - p.eta, self.mu - t0 - x, self.mu - t0 - x + p.eta] {
                if crate::model::lattice_distance(z, w) < 1e-6 {
                    return Err(Error::Parameter(format!("μ = {} lies on an excluded lattice point", self.mu)));
                }
            }
        }
        Ok(())
    }

    /// f(λ) = β^{-1} e^{−iyλ} θ(λ−μ)/θ(λ−μ+t_0).
    pub fn f(&self, p: &ModelParams, lambda: C64) -> C64 {
        (-I * p.twist.yf() * lambda).exp() * p.th(lambda - self.mu) / (p.th(lambda - self.mu + p.t0()) * self.beta)
    }

    /// The inhomogeneous term F(λ), together with ∂F/∂λ_j.
    pub fn big_f(&self, p: &ModelParams, q: &QFunction, lambda: C64) -> (C64, Vec<C64>) {
        let n = p.n() as f64;
        let y = p.twist.yf();
        let t0 = p.t0();
        let th = |z: C64| p.th(z);
        let thd = |z: C64| p.elliptic.th_deriv(z);
        let s = p.xi.iter().sum::<C64>() - p.eta * n;
        let aq = q.norm();

        let z1 = self.mu - p.eta - t0;
        let q1 = q.eval(p, z1);
        let g1 = q.root_gradient(p, z1);
        let u1 = lambda - self.mu - aq + s;
        let v1 = t0 + aq - s;
        let pre1 = p.twist.phase_y_conj() * (-I * y * lambda).exp() * th(t0) / (self.beta * p.sd(self.mu - t0));
        let f1 = pre1 * q1 * th(u1) / (th(v1) * th(lambda - self.mu + t0));
        let dlog1 = -thd(u1) / th(u1) - thd(v1) / th(v1);

        let z2 = self.mu;
        let q2 = q.eval(p, z2);
        let g2 = q.root_gradient(p, z2);
        let u2 = lambda - self.mu + p.eta + y * PI * p.omega() - t0 - aq + s;
        let v2 = y * PI * p.omega() - t0 - aq + s;
        let pre2 = p.twist.phase_x() * self.beta * (I * y * (lambda + p.eta)).exp() * th(t0) / p.sa(self.mu - p.eta);
        let f2 = pre2 * q2 * th(u2) / (th(v2) * th(lambda - self.mu + p.eta));
        let dlog2 = -thd(u2) / th(u2) + thd(v2) / th(v2);

        let grad = (0..q.roots.len())
            .map(|j| {
                let a = if q1.norm() > 0.0 { f1 * (g1[j] / q1 + dlog1) } else { pre1 * g1[j] * th(u1) / (th(v1) * th(lambda - self.mu + t0)) };
                let b = if q2.norm() > 0.0 { f2 * (g2[j] / q2 + dlog2) } else { pre2 * g2[j] * th(u2) / (th(v2) * th(lambda - self.mu + p.eta)) };
                a + b
            })
            .collect();
        (f1 + f2, grad)
    }
}

/// Residual of the inhomogeneous equation with its relative scale and root gradient.
pub fn tq_residual_inhomogeneous(p: &ModelParams, t: C64, q: &QFunction, data: &InhomTQData, lambda: C64) -> (C64, f64, Vec<C64>) {
    let f = data.f(p, lambda);
    let f_next = data.f(p, lambda + p.eta);
    let (a, d) = (p.sa(lambda), p.sd(lambda));
    let c2 = p.twist.phase_y_conj() * f * a;
    let c3 = p.twist.phase_x() * d / f_next;
    let (big_f, gf) = data.big_f(p, q, lambda);
    let t1 = t * q.eval(p, lambda);
    let t2 = c2 * q.eval(p, lambda - p.eta);
    let t3 = c3 * q.eval(p, lambda + p.eta);
    let t4 = a * d * big_f;
    let g0 = q.root_gradient(p, lambda);
    let gm = q.root_gradient(p, lambda - p.eta);
    let gp = q.root_gradient(p, lambda + p.eta);
    let grad = (0..q.roots.len()).map(|j| t * g0[j] - c2 * gm[j] - c3 * gp[j] + a * d * gf[j]).collect();
    (t1 - t2 - t3 + t4, t1.norm() + t2.norm() + t3.norm() + t4.norm(), grad)
}

/// Outcome of one damped Gauss-Newton solve.
struct LmOutcome {
    x: CVec,
    residual: f64,
}

/// Levenberg-Marquardt for holomorphic residual maps.
fn levenberg_marquardt(mut x: CVec, eval: impl Fn(&CVec) -> Option<(CVec, CMat)>, max_iter: usize) -> Option<LmOutcome> {
    let n = x.len();
    let (mut r, mut j) = eval(&x)?;
    let mut damping = 1e-3;
    for _ in 0..max_iter {
        if r.norm() < 1e-14 {
            break;
        }
        let jh = j.adjoint();
        let mut a = &jh * &j;
        let scale = (0..n).map(|k| a[(k, k)].re).fold(0.0, f64::max).max(1e-300);
        for k in 0..n {
            a[(k, k)] += c(damping * scale, 0.0);
        }
        let g = &jh * &r;
        let step = a.lu().solve(&g)?;
        let trial = &x - &step;
        match eval(&trial) {
            Some((rt, jt)) if rt.norm() < r.norm() => {
                x = trial;
                r = rt;
                j = jt;
                damping = (damping * 0.2).max(1e-15);
                if step.norm() < 1e-15 * (1.0 + x.norm()) {
                    break;
                }
            }
            _ => {
                damping *= 10.0;
                if damping > 1e12 {
                    break;
                }
            }
        }
    }
    let residual = r.norm() / (r.len() as f64).sqrt();
    residual.is_finite().then_some(LmOutcome { x, residual })
}

fn random_roots(rng: &mut ChaCha8Rng, n: usize, lattice: (C64, C64)) -> CVec {
    CVec::from_fn(n, |_, _| lattice.0 * rng.gen_range(0.0..1.0) + lattice.1 * rng.gen_range(-0.5..0.5))
}

/// One Bethe root set matched to an eigenvalue.
#[derive(Clone, Debug, Serialize)]
pub struct BetheSolution {
    pub q: QFunction,
    pub branch_h: u8,
    pub eigen_index: Option<usize>,
    pub eigenvalue: EigenvalueFn,
    #[serde(serialize_with = "crate::claims::ser_f64")]
    pub residual: f64,
    #[serde(serialize_with = "crate::claims::ser_f64")]
    pub overlap_defect: f64,
}

/// Seeded homogeneous solve: roots of Q for a known eigenvalue t, at branch h.
pub fn solve_homogeneous_seeded(p: &ModelParams, t: &EigenvalueFn, h: u8, seed: u64, starts: usize) -> Vec<QFunction> {
    let n = p.n();
    let pts = sample_points(seed ^ 0x7471, 2 * n + 3);
    let tv: Vec<C64> = pts.iter().map(|&l| t.eval(p, l)).collect();
    let lattice = QFunction::new(vec![], QClass::ThetaX).lattice(p);
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x686f_6d);
    let mut found: Vec<QFunction> = Vec::new();
    for _ in 0..starts {
        let x0 = random_roots(&mut rng, n, lattice);
        let eval = |x: &CVec| -> Option<(CVec, CMat)> {
            let q = QFunction::new(x.iter().copied().collect(), QClass::ThetaX);
            let mut r = CVec::zeros(pts.len());
            let mut jac = CMat::zeros(pts.len(), n);
            for (k, &l) in pts.iter().enumerate() {
                let (res, scale) = tq_residual_homogeneous(p, tv[k], &q, l, h);
                if !(scale > 0.0 && scale.is_finite()) {
                    return None;
                }
                r[k] = res / scale;
                let e = (I * h as f64 * (1.0 - p.twist.yf()) * p.eta).exp();
                let g0 = q.root_gradient(p, l);
                let gm = q.root_gradient(p, l - p.eta);
                let gp = q.root_gradient(p, l + p.eta);
                for j in 0..n {
                    jac[(k, j)] = (tv[k] * g0[j] - p.twist.phase_y_conj() * e * p.sa(l) * gm[j] - p.twist.phase_x() / e * p.sd(l) * gp[j]) / scale;
                }
            }
            Some((r, jac))
        };
        if let Some(out) = levenberg_marquardt(x0, eval, 200) {
            if out.residual < 1e-12 {
                let q = QFunction::new(out.x.iter().copied().collect(), QClass::ThetaX);
                if !found.iter().any(|f| root_set_distance(p, f, &q) < 1e-6) {
                    found.push(q);
                }
                if found.len() >= 2 {
                    break;
                }
            }
        }
    }
    found
}

/// Blind homogeneous solve: Bethe equations from random root starts, filtered by entireness.
pub fn solve_homogeneous_blind(p: &ModelParams, h: u8, seed: u64, starts: usize) -> Vec<(QFunction, EigenvalueFn)> {
    let n = p.n();
    let lattice = QFunction::new(vec![], QClass::ThetaX).lattice(p);
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x626c_696e_64);
    let checks = sample_points(seed ^ 0x656e_74, 6);
    let e = (I * h as f64 * (1.0 - p.twist.yf()) * p.eta).exp();
    let mut out: Vec<(QFunction, EigenvalueFn)> = Vec::new();
    for _ in 0..starts {
        let x0 = random_roots(&mut rng, n, lattice);
        let eval = |x: &CVec| -> Option<(CVec, CMat)> {
            let q = QFunction::new(x.iter().copied().collect(), QClass::ThetaX);
            let mut r = CVec::zeros(n);
            let mut jac = CMat::zeros(n, n);
            for k in 0..n {
                let l = x[k];
                let a = p.twist.phase_y_conj() * e * p.sa(l);
                let d = p.twist.phase_x() / e * p.sd(l);
                let (qm, qp) = (q.eval(p, l - p.eta), q.eval(p, l + p.eta));
                let scale = (a * qm).norm() + (d * qp).norm();
                if !(scale > 0.0 && scale.is_finite()) {
                    return None;
                }
                r[k] = (a * qm + d * qp) / scale;
                let gm = q.root_gradient(p, l - p.eta);
                let gp = q.root_gradient(p, l + p.eta);
                for j in 0..n {
                    let mut v = a * gm[j] + d * gp[j];
                    if j == k {
                        // Explicit λ_k dependence through 𝒶, 𝒹 and the shifted arguments.
                        let dl = |z: C64| -> C64 { p.xi.iter().map(|&x| p.elliptic.th_deriv(z - x + p.eta) / p.th(z - x + p.eta)).sum() };
                        let qd_m = q_derivative(p, &q, l - p.eta);
                        let qd_p = q_derivative(p, &q, l + p.eta);
                        v += a * dl(l) * qm + a * qd_m + d * dl(l - p.eta) * qp + d * qd_p;
                    }
                    jac[(k, j)] = v / scale;
                }
            }
            Some((r, jac))
        };
        let Some(sol) = levenberg_marquardt(x0, eval, 200) else { continue };
        if sol.residual > 1e-12 {
            continue;
        }
        let q = QFunction::new(sol.x.iter().copied().collect(), QClass::ThetaX);
        let distinct = (0..n).all(|i| (0..i).all(|j| root_set_distance(p, &QFunction::new(vec![q.roots[i]], QClass::ThetaX), &QFunction::new(vec![q.roots[j]], QClass::ThetaX)) > 1e-6));
        if !distinct {
            continue;
        }
        let nodes: Vec<C64> = p.xi.iter().map(|&x| bethe_eigenvalue(p, &q, x, h)).collect();
        if nodes.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            continue;
        }
        let ev = EigenvalueFn::new(nodes);
        let entire = checks.iter().map(|&l| rel_diff(bethe_eigenvalue(p, &q, l, h), ev.eval(p, l))).fold(0.0, f64::max);
        if entire > 1e-8 || quasi_periodicity_residual(p, &ev, &checks[..2]) > 1e-8 {
            continue;
        }
        if !out.iter().any(|(_, f)| node_distance(&f.nodes, &ev.nodes) < 1e-6) {
            out.push((q, ev));
        }
    }
    out
}

/// Q'(z) = −Σ_j ∂Q(z)/∂λ_j.
fn q_derivative(p: &ModelParams, q: &QFunction, z: C64) -> C64 {
    -q.root_gradient(p, z).iter().sum::<C64>()
}

/// Seeded inhomogeneous solve for a known eigenvalue.
pub fn solve_inhomogeneous_seeded(p: &ModelParams, t: &EigenvalueFn, data: &InhomTQData, seed: u64, starts: usize) -> Option<(QFunction, f64)> {
    let n = p.n();
    let pts = sample_points(seed ^ 0x696e_68, 2 * n + 3);
    let tv: Vec<C64> = pts.iter().map(|&l| t.eval(p, l)).collect();
    let lattice = QFunction::new(vec![], QClass::Theta).lattice(p);
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x71_7175);
    let mut best: Option<(QFunction, f64)> = None;
    for _ in 0..starts {
        let x0 = random_roots(&mut rng, n, lattice);
        let eval = |x: &CVec| -> Option<(CVec, CMat)> {
            let q = QFunction::new(x.iter().copied().collect(), QClass::Theta);
            let mut r = CVec::zeros(pts.len());
            let mut jac = CMat::zeros(pts.len(), n);
            for (k, &l) in pts.iter().enumerate() {
                let (res, scale, grad) = tq_residual_inhomogeneous(p, tv[k], &q, data, l);
                if !(scale > 0.0 && scale.is_finite()) {
                    return None;
                }
                r[k] = res / scale;
                for j in 0..n {
                    jac[(k, j)] = grad[j] / scale;
                }
            }
            Some((r, jac))
        };
        if let Some(out) = levenberg_marquardt(x0, eval, 200) {
            let q = QFunction::new(out.x.iter().copied().collect(), QClass::Theta);
            if best.as_ref().map(|b| out.residual < b.1).unwrap_or(true) {
                best = Some((q, out.residual));
            }
            if out.residual < 1e-12 {
                break;
            }
        }
    }
    best
}

/// max over the sample points of the relative inhomogeneous residual.
pub fn inhomogeneous_residual(p: &ModelParams, t: &EigenvalueFn, q: &QFunction, data: &InhomTQData, samples: &[C64]) -> f64 {
    samples
        .iter()
        .map(|&l| {
            let (r, s, _) = tq_residual_inhomogeneous(p, t.eval(p, l), q, data, l);
            r.norm() / s
        })
        .fold(0.0, f64::max)
}

/// max over the sample points of the relative homogeneous residual.
pub fn homogeneous_residual(p: &ModelParams, t: &EigenvalueFn, q: &QFunction, h: u8, samples: &[C64]) -> f64 {
    samples
        .iter()
        .map(|&l| {
            let (r, s) = tq_residual_homogeneous(p, t.eval(p, l), q, l, h);
            r.norm() / s
        })
        .fold(0.0, f64::max)
}

/// Right and left ABA-form states ∏_j D_β(λ_j) on the pseudo-vacua, gauged by S^{(0)}.
/// On the branch h the pseudo-vacua carry e^{ih(1−y)η} per occupied site.
pub fn aba_state_homogeneous(p: &ModelParams, basis: &SovBasis, s0: &CMat, s0_inv: &CMat, q: &QFunction, beta: &DBeta, h_branch: u8) -> Result<(CVec, CVec)> {
    let e = (I * h_branch as f64 * (1.0 - p.twist.yf()) * p.eta).exp();
    let ones = NodeValues { values: [vec![c(1.0, 0.0); p.n()], vec![e; p.n()]] };
    let mut rc = right_separate_coeffs(p, basis, &ones);
    let mut lc = left_separate_coeffs(p, basis, &ones);
    for h in 0..basis.dim() {
        let mut d = c(1.0, 0.0);
        for &l in &q.roots {
            d *= beta.value(p, l, h)?;
        }
        rc[h] *= d;
        lc[h] *= d;
    }
    let r = s0 * basis.assemble_right(&rc);
    let l = s0_inv.transpose() * basis.assemble_left(&lc);
    Ok((normalize_phase(&r), normalize_phase(&l)))
}

/// Coefficients of ∏_a D̄(λ_a) on the f-dressed pseudo-vacua, with site weight `eps`·f(ξ_a).
fn dressed_coeffs(p: &ModelParams, basis: &SovBasis, q: &QFunction, data: &InhomTQData, eps: f64) -> (CVec, CVec) {
    let n = p.n();
    let vals = NodeValues { values: [vec![c(1.0, 0.0); n], p.xi.iter().map(|&x| data.f(p, x) * eps).collect()] };
    let mut rc = right_separate_coeffs(p, basis, &vals);
    let mut lc = left_separate_coeffs(p, basis, &vals);
    for h in 0..basis.dim() {
        let d: C64 = q.roots.iter().map(|&l| d_bar_value(p, l, h)).product();
        rc[h] *= d;
        lc[h] *= d;
    }
    (rc, lc)
}

/// Twisted chain: ∏_a D̄(λ_a)|Ω_f⟩ and ⟨Ω_f|∏_a D̄(λ_a).
pub fn aba_state_inhomogeneous(p: &ModelParams, basis: &SovBasis, s0: &CMat, s0_inv: &CMat, q: &QFunction, data: &InhomTQData) -> (CVec, CVec) {
    let (rc, lc) = dressed_coeffs(p, basis, q, data, 1.0);
    (normalize_phase(&(s0 * basis.assemble_right(&rc))), normalize_phase(&(s0_inv.transpose() * basis.assemble_left(&lc))))
}

/// Periodic chain, odd N: the ε = ± states built on S^{(+)}.
pub fn aba_state_periodic(p: &ModelParams, basis: &SovBasis, sp: &PseudoSimilarities, sp_inv: &CMat, q: &QFunction, data: &InhomTQData, eps: f64) -> (CVec, CVec) {
    let (rc, lc) = dressed_coeffs(p, basis, q, data, eps);
    (normalize_phase(&(&sp.s_plus * basis.assemble_right(&rc))), normalize_phase(&(sp_inv.transpose() * basis.assemble_left(&lc))))
}

/// Report of the homogeneous T-Q analysis.
#[derive(Clone, Debug, Serialize)]
pub struct BetheReport {
    pub solutions: Vec<BetheSolution>,
    pub found: usize,
    pub expected: usize,
    pub blind_found: usize,
    #[serde(skip)]
    pub claims: Vec<Claim>,
}

/// Homogeneous equation for a twisted chain, seeded by the oracle eigenvalues.
pub fn analyze_homogeneous(p: &ModelParams, oracle: &OracleSpectrum, seed: u64) -> Result<BetheReport> {
    if p.twist.is_periodic() {
        return Err(Error::UnsupportedTwist);
    }
    let n = p.n();
    let ctx = format!("N={n} twist={}", p.twist);
    let basis = SovBasis::build(p)?;
    let s0 = vertex_irf_operator(p, 0);
    let s0_inv = inverse(&s0)?;
    let samples = sample_points(seed, 20);
    let branches: &[u8] = if p.twist.y == 1 { &[0] } else { &[0, 1] };
    let mut claims = Vec::new();
    let mut solutions = Vec::new();
    let mut residuals = Vec::new();
    let mut uniq = Vec::new();
    let mut overlaps = Vec::new();
    let mut beta_par = Vec::new();
    let mut tq_nodes = Vec::new();

    let dbar: Vec<f64> = (0..1usize << n)
        .flat_map(|b| {
            let beta = DBeta { beta: (0..n).map(|a| bit(b, n, a) as u8).collect() };
            samples.iter().take(3).map(move |&l| (beta.clone(), l)).collect::<Vec<_>>()
        })
        .map(|(beta, l)| d_bar_residual(p, &beta, l))
        .collect::<Result<_>>()?;
    claims.push(worst("bar-D", "e^{iπk(S−N)/2N} D_β D_{1−β} is β-independent and equals ∏θ(λ−ξ^(h))", dbar, 1e-12));
    claims.push(Claim::new("c-X", "c_X e^{iδu} θ_X(u) θ_X(u+π_X) = θ(u)", c_x_identity_residual(p, &samples)?, 1e-12).with_context(ctx.clone()));

    for (idx, o) in oracle.clusters.iter().enumerate() {
        let t = EigenvalueFn::new(o.nodes.clone());
        let mut hit = None;
        for &h in branches {
            let qs = solve_homogeneous_seeded(p, &t, h, seed.wrapping_add(idx as u64), 80);
            if let Some(q) = qs.first() {
                if qs.len() > 1 {
                    uniq.push(q_ratio_variation(p, &qs[0], &qs[1], &samples));
                }
                hit = Some((q.clone(), h));
                break;
            }
        }
        let Some((q, h)) = hit else { continue };
        let res = homogeneous_residual(p, &t, &q, h, &samples);
        residuals.push(res);
        let tb = EigenvalueFn::new(p.xi.iter().map(|&x| bethe_eigenvalue(p, &q, x, h)).collect());
        tq_nodes.push(node_distance(&tb.nodes, &t.nodes));
        let beta = admissible_beta(p, &q)?;
        let (r, l) = aba_state_homogeneous(p, &basis, &s0, &s0_inv, &q, &beta, h)?;
        let sov = build_eigenstate_twisted(p, &basis, &s0, &s0_inv, &t)?;
        let defect = (1.0 - overlap(&r, &sov.right)).max(1.0 - overlap(&l, &sov.left)).max(1.0 - overlap(&r, &o.right_vec(0)));
        overlaps.push(defect);
        if beta.beta[0] == 0 {
            let mut alt = beta.clone();
            alt.beta[0] = 1;
            let pix = p.elliptic.pi_x(p.twist);
            if q.eval(p, p.xi[0] + pix).norm() > 1e-8 {
                let (r2, _) = aba_state_homogeneous(p, &basis, &s0, &s0_inv, &q, &alt, h)?;
                beta_par.push(1.0 - overlap(&r, &r2));
            }
        }
        solutions.push(BetheSolution { q, branch_h: h, eigen_index: Some(idx), eigenvalue: t, residual: res, overlap_defect: defect });
    }
    let expected = oracle.len();
    let found = solutions.len();
    claims.push(worst("hom-eq", "homogeneous T-Q residual of the recovered root sets at 20 points", residuals, 1e-8));
    claims.push(worst("Bethe-fct", "eigenvalue rebuilt from Q matches the oracle at the nodes", tq_nodes, 1e-8));
    claims.push(worst("Bethe-eigen", "1 − overlap of ABA-form states with SOV and oracle eigenstates", overlaps, 1e-8));
    claims.push(worst("D-beta-choice", "ABA-form states for two admissible β are parallel", beta_par, 1e-8));
    claims.push(worst("Q-unique", "independent root sets for one eigenvalue give proportional Q-functions", uniq, 1e-8));
    let complete = Claim::check("hom-eq-complete", "every eigenvalue admits a θ_X-type Q-function", found == expected).with_context(format!("{ctx} found={found} expected={expected}"));
    let blind: Vec<(QFunction, EigenvalueFn)> = branches.iter().flat_map(|&h| solve_homogeneous_blind(p, h, seed, 40 << n)).collect();
    let blind_found = oracle.clusters.iter().filter(|o| blind.iter().any(|(_, e)| node_distance(&e.nodes, &o.nodes) < 1e-8)).count();
    if n % 2 == 0 {
        claims.push(complete);
    } else {
        // Completeness of the homogeneous ansatz is open for odd N: coverage is reported, not asserted.
        let mut info = complete;
        info.label = "hom-eq-coverage".into();
        info.passed = true;
        claims.push(info);
    }
    claims.push(Claim::check("hom-eq-blind", "Bethe-equation roots found without a seed reproduce oracle eigenvalues only", blind.iter().all(|(_, e)| oracle.match_nodes(&e.nodes).map(|m| m.1 < 1e-8).unwrap_or(false))).with_context(format!("{ctx} blind solutions={} covering {blind_found} of {expected}", blind.len())));
    for cl in claims.iter_mut() {
        if !cl.context.starts_with("N=") {
            cl.context = format!("{ctx} {}", cl.context);
        }
    }
    Ok(BetheReport { solutions, found, expected, blind_found, claims })
}

/// Report of the inhomogeneous T-Q analysis.
#[derive(Clone, Debug, Serialize)]
pub struct InhomReport {
    pub data: InhomTQData,
    pub solutions: Vec<BetheSolution>,
    pub found: usize,
    pub expected: usize,
    #[serde(skip)]
    pub claims: Vec<Claim>,
}

/// Inhomogeneous equation, twisted chains or the periodic chain with odd N.
pub fn analyze_inhomogeneous(p: &ModelParams, oracle: &OracleSpectrum, data: &InhomTQData, similarities: Option<&PseudoSimilarities>, seed: u64) -> Result<InhomReport> {
    data.validate(p)?;
    let n = p.n();
    let ctx = format!("N={n} twist={}", p.twist);
    let periodic = p.twist.is_periodic();
    if periodic && (n % 2 == 0 || similarities.is_none()) {
        return Err(Error::Parameter("the periodic inhomogeneous analysis needs odd N and S^(±)".into()));
    }
    let basis = SovBasis::build(p)?;
    let s0 = vertex_irf_operator(p, 0);
    let s0_inv = if periodic { CMat::identity(p.dim(), p.dim()) } else { inverse(&s0)? };
    let sp_inv = match similarities {
        Some(sp) if periodic => inverse(&sp.s_plus)?,
        _ => CMat::identity(p.dim(), p.dim()),
    };
    let samples = sample_points(seed, 20);
    let tmats: Vec<(C64, CMat)> = samples.iter().take(3).map(|&l| (l, transfer_8v(p, l))).collect();
    let mut solutions = Vec::new();
    let mut residuals = Vec::new();
    let mut defects = Vec::new();
    let mut eig = Vec::new();
    let mut nonzero = Vec::new();
    let mut shift = Vec::new();

    for (idx, o) in oracle.clusters.iter().enumerate() {
        let t = EigenvalueFn::new(o.nodes.clone());
        let Some((q, lm)) = solve_inhomogeneous_seeded(p, &t, data, seed.wrapping_add(idx as u64), 120) else { continue };
        if lm > 1e-10 {
            continue;
        }
        let res = inhomogeneous_residual(p, &t, &q, data, &samples);
        residuals.push(res);
        let qs = p.xi.iter().map(|&x| q.eval(p, x).norm().max(q.eval(p, x - p.eta).norm())).fold(f64::INFINITY, f64::min);
        let qscale = samples.iter().map(|&l| q.eval(p, l).norm()).fold(0.0, f64::max);
        nonzero.push(if qs > 1e-8 * qscale { 0.0 } else { 1.0 });

        // Shifting one root by π flips the sign of Q and of F.
        let mut qsh = q.clone();
        qsh.roots[0] += PI;
        let l0 = samples[0];
        let (f_a, _) = data.big_f(p, &q, l0);
        let (f_b, _) = data.big_f(p, &qsh, l0);
        shift.push(rel_diff(f_b, -f_a).max(rel_diff(qsh.eval(p, l0), -q.eval(p, l0))));

        let defect = if periodic {
            let sp = similarities.expect("checked above");
            let (rp, lp) = aba_state_periodic(p, &basis, sp, &sp_inv, &q, data, 1.0);
            let (rm, lm_) = aba_state_periodic(p, &basis, sp, &sp_inv, &q, data, -1.0);
            let pair = CMat::from_columns(&[rp.clone(), rm.clone()]);
            let lpair = CMat::from_columns(&[lp.clone(), lm_.clone()]);
            for (l, tm) in &tmats {
                let mu = t.eval(p, *l);
                for v in [&rp, &rm] {
                    eig.push(eigen_residual(tm, v, mu));
                }
                for v in [&lp, &lm_] {
                    eig.push(eigen_residual(&tm.transpose(), v, mu));
                }
            }
            let d_r = 1.0 - span_overlap(&pair, &o.right).min(span_overlap(&o.right, &pair));
            let d_l = 1.0 - span_overlap(&lpair, &o.left).min(span_overlap(&o.left, &lpair));
            let rank_defect = if orth(&pair, 1e-8).ncols() == 2 { 0.0 } else { 1.0 };
            d_r.max(d_l).max(rank_defect)
        } else {
            let (r, l) = aba_state_inhomogeneous(p, &basis, &s0, &s0_inv, &q, data);
            for (lam, tm) in &tmats {
                let mu = t.eval(p, *lam);
                eig.push(eigen_residual(tm, &r, mu));
                eig.push(eigen_residual(&tm.transpose(), &l, mu));
            }
            (1.0 - overlap(&r, &o.right_vec(0))).max(1.0 - overlap(&l, &o.left_vec(0)))
        };
        defects.push(defect);
        solutions.push(BetheSolution { q, branch_h: 0, eigen_index: Some(idx), eigenvalue: t, residual: res, overlap_defect: defect });
    }

    let expected = oracle.len();
    let found = solutions.len();
    let mut claims = vec![
        worst("inhom", "inhomogeneous T-Q residual of the recovered root sets at 20 points", residuals, 1e-8),
        worst("inhom-Q-nodes", "Q does not vanish simultaneously at ξ_j and ξ_j − η", nonzero, 0.5),
        worst("F-pi-shift", "shifting a root by π flips the sign of Q and F together", shift, 1e-10),
        worst("inhom-eigen", "ABA-form states are eigenvectors of T(λ)", eig, 1e-8),
        worst(if periodic { "inhom-eps-span" } else { "inhom-oracle" }, "1 − overlap of ABA-form states with the oracle eigenspaces", defects, 1e-8),
        Claim::check("inhom-complete", "every eigenvalue admits a θ-type Q-function", found == expected).with_context(format!("found={found} expected={expected}")),
    ];
    for cl in claims.iter_mut() {
        if !cl.context.starts_with("N=") {
            cl.context = format!("{ctx} {}", cl.context);
        }
    }
    Ok(InhomReport { data: *data, solutions, found, expected, claims })
}

/// Re-solves with β doubled and reports the worst residual of both solves.
pub fn beta_scaling_residual(p: &ModelParams, t: &EigenvalueFn, data: &InhomTQData, seed: u64) -> Option<f64> {
    let samples = sample_points(seed, 20);
    let doubled = InhomTQData { beta: data.beta * 2.0, mu: data.mu };
    let mut w: f64 = 0.0;
    for d in [data, &doubled] {
        let (q, _) = solve_inhomogeneous_seeded(p, t, d, seed, 120)?;
        w = w.max(inhomogeneous_residual(p, t, &q, d, &samples));
    }
    Some(w)
}
