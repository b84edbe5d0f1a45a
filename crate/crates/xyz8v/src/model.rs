//! Model parameters and the local objects: the 8-vertex R-matrix, the dynamical
//! 6-vertex R-matrix and the vertex-IRF gauge matrix S(λ|t).

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::linalg::{c, gate_to_mat, CMat, Gate, C64, I};
use crate::theta::EllipticParams;
use crate::twist::Twist;

/// Default margin for the lattice-avoidance conditions.
pub const GENERIC_MARGIN: f64 = 1e-3;

/// Distance from z to the lattice πZ + πωZ.
pub fn lattice_distance(z: C64, omega: C64) -> f64 {
    let b = z.im / (PI * omega.im);
    let a = (z.re - b * PI * omega.re) / PI;
    let mut best = f64::INFINITY;
    for db in [-1.0, 0.0, 1.0] {
        for da in [-1.0, 0.0, 1.0] {
            let (m, n) = (a.round() + da, b.round() + db);
            let p = PI * (c(m, 0.0) + n * omega);
            best = best.min((z - p).norm());
        }
    }
    best
}

/// 8-vertex Boltzmann weights at one spectral point.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LocalWeights8V {
    pub a: C64,
    pub b: C64,
    pub c: C64,
    pub d: C64,
}

/// Entries of the dynamical 6-vertex R-matrix at one (λ, t).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DynWeights6VD {
    pub a: C64,
    /// e^{iyη} b(λ|t)
    pub b_plus: C64,
    /// e^{−iyη} b(λ|−t)
    pub b_minus: C64,
    /// e^{iyλ} c(λ|t)
    pub c_plus: C64,
    /// e^{−iyλ} c(λ|−t)
    pub c_minus: C64,
}

/// η, ω, inhomogeneities and twist.
#[derive(Clone, Debug, PartialEq)]
pub struct ModelParams {
    pub eta: C64,
    pub elliptic: EllipticParams,
    pub xi: Vec<C64>,
    pub twist: Twist,
}

impl ModelParams {
    /// Validated constructor enforcing the genericity conditions with the default margin.
    pub fn new(omega: C64, eta: C64, xi: Vec<C64>, twist: Twist) -> Result<Self> {
        let p = Self::unchecked(omega, eta, xi, twist)?;
        p.check_generic(GENERIC_MARGIN)?;
        Ok(p)
    }

    /// Constructor that only validates ω, η and the size.
    pub fn unchecked(omega: C64, eta: C64, xi: Vec<C64>, twist: Twist) -> Result<Self> {
        let elliptic = EllipticParams::new(omega)?;
        if xi.is_empty() {
            return Err(Error::Parameter("lattice size N must be at least 1".into()));
        }
        if !(eta.re.is_finite() && eta.im.is_finite()) || xi.iter().any(|z| !(z.re.is_finite() && z.im.is_finite())) {
            return Err(Error::Parameter("non-finite eta or inhomogeneity".into()));
        }
        Ok(ModelParams { eta, elliptic, xi, twist })
    }

    /// Homogeneous point ξ_n = 0; exempt from the inhomogeneity conditions.
    pub fn homogeneous(omega: C64, eta: C64, n: usize, twist: Twist) -> Result<Self> {
        Self::unchecked(omega, eta, vec![c(0.0, 0.0); n], twist)
    }

    /// Standard fixture: ω = i, η = 0.4377+0.1155i, random generic ξ.
    pub fn canonical(n: usize, twist: Twist, seed: u64) -> Self {
        Self::generic_draw(c(0.0, 1.0), c(0.4377, 0.1155), n, twist, seed).expect("canonical fixture is generic")
    }

    /// Draws ξ_a with Re ξ_a ∈ (0.1, π−0.1), |Im ξ_a| < 0.05 until the genericity checks pass.
    pub fn generic_draw(omega: C64, eta: C64, n: usize, twist: Twist, seed: u64) -> Result<Self> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut last = Error::Parameter("lattice size N must be at least 1".into());
        for _ in 0..1000 {
            let xi: Vec<C64> = (0..n)
                .map(|_| c(rng.gen_range(0.1..PI - 0.1), rng.gen_range(-0.05..0.05)))
                .collect();
            match ModelParams::new(omega, eta, xi, twist) {
                Ok(p) => return Ok(p),
                Err(e @ Error::NonGeneric(_)) => last = e,
                Err(e) => return Err(e),
            }
        }
        Err(last)
    }

    pub fn with_twist(&self, twist: Twist) -> Self {
        let mut p = self.clone();
        p.twist = twist;
        p
    }

    pub fn n(&self) -> usize {
        self.xi.len()
    }

    pub fn dim(&self) -> usize {
        1 << self.n()
    }

    pub fn omega(&self) -> C64 {
        self.elliptic.omega()
    }

    /// Checks ξ_j + η/2 and ξ_a − ξ_b + εη off the lattice, and η incommensurability.
    pub fn check_generic(&self, margin: f64) -> Result<()> {
        let w = self.omega();
        for k in 1..=(2 * self.n() + 2) {
            let d = lattice_distance(self.eta * k as f64, w);
            if d < margin {
                return Err(Error::NonGeneric(format!("{k}·eta lies within {d:.2e} of the period lattice")));
            }
        }
        for (j, &x) in self.xi.iter().enumerate() {
            let d = lattice_distance(x + self.eta / 2.0, w);
            if d < margin {
                return Err(Error::NonGeneric(format!("xi_{} + eta/2 lies within {d:.2e} of the period lattice", j + 1)));
            }
        }
        for a in 0..self.n() {
            for b in 0..self.n() {
                if a == b {
                    continue;
                }
                for eps in [-1.0, 0.0, 1.0] {
                    let d = lattice_distance(self.xi[a] - self.xi[b] + eps * self.eta, w);
                    if d < margin {
                        return Err(Error::NonGeneric(format!(
                            "xi_{} - xi_{} {:+} eta lies within {d:.2e} of the period lattice",
                            a + 1,
                            b + 1,
                            eps
                        )));
                    }
                }
            }
        }
        Ok(())
    }

    #[inline]
    pub fn th(&self, z: C64) -> C64 {
        self.elliptic.th(z)
    }

    /// 8-vertex weights a, b, c, d at λ.
    pub fn weights_8v(&self, lambda: C64) -> LocalWeights8V {
        let e = &self.elliptic;
        let z = c(0.0, 0.0);
        let pf = 2.0 / (e.theta(2, z, 1) * e.theta(4, z, 2));
        let eta = self.eta;
        let t4e = e.theta(4, eta, 2);
        let t1e = e.theta(1, eta, 2);
        let t1l = e.theta(1, lambda, 2);
        let t4l = e.theta(4, lambda, 2);
        let t1le = e.theta(1, lambda + eta, 2);
        let t4le = e.theta(4, lambda + eta, 2);
        LocalWeights8V {
            a: pf * t4e * t1le * t4l,
            b: pf * t4e * t1l * t4le,
            c: pf * t1e * t4l * t4le,
            d: pf * t1e * t1le * t1l,
        }
    }

    pub fn r8v_gate(&self, lambda: C64) -> Gate {
        let w = self.weights_8v(lambda);
        let o = c(0.0, 0.0);
        Gate::new(
            w.a, o, o, w.d, //
            o, w.b, w.c, o, //
            o, w.c, w.b, o, //
            w.d, o, o, w.a,
        )
    }

    /// 8-vertex R-matrix in the basis (↑↑, ↑↓, ↓↑, ↓↓).
    pub fn r8v(&self, lambda: C64) -> CMat {
        gate_to_mat(&self.r8v_gate(lambda))
    }

    /// Dynamical weights, no check on θ(t).
    pub fn weights_6vd(&self, lambda: C64, t: C64) -> DynWeights6VD {
        let eta = self.eta;
        let y = self.twist.yf();
        let th_t = self.th(t);
        let th_mt = self.th(-t);
        let b = |tt: C64, th_tt: C64| self.th(lambda) * self.th(tt + eta) / th_tt;
        let cc = |tt: C64, th_tt: C64| self.th(eta) * self.th(tt + lambda) / th_tt;
        DynWeights6VD {
            a: self.th(lambda + eta),
            b_plus: (I * y * eta).exp() * b(t, th_t),
            b_minus: (-I * y * eta).exp() * b(-t, th_mt),
            c_plus: (I * y * lambda).exp() * cc(t, th_t),
            c_minus: (-I * y * lambda).exp() * cc(-t, th_mt),
        }
    }

    pub fn r6vd_gate(&self, lambda: C64, t: C64) -> Gate {
        let w = self.weights_6vd(lambda, t);
        let o = c(0.0, 0.0);
        Gate::new(
            w.a, o, o, o, //
            o, w.b_plus, w.c_plus, o, //
            o, w.c_minus, w.b_minus, o, //
            o, o, o, w.a,
        )
    }

    /// Dynamical 6-vertex R-matrix R(λ|t).
    pub fn r6vd(&self, lambda: C64, t: C64) -> Result<CMat> {
        self.check_dynamical(t)?;
        Ok(gate_to_mat(&self.r6vd_gate(lambda, t)))
    }

    pub fn check_dynamical(&self, t: C64) -> Result<()> {
        if lattice_distance(t, self.omega()) < 1e-12 {
            return Err(Error::SingularDynamicalParameter(format!("{t}")));
        }
        Ok(())
    }

    /// Gauge matrix S(λ|t) as a row-major 2×2 array.
    pub fn s_gauge_arr(&self, lambda: C64, t: C64) -> [[C64; 2]; 2] {
        let e = &self.elliptic;
        let y = self.twist.yf();
        let pre = (I * y * t / 2.0).exp();
        let em = pre * (-I * y * lambda / 2.0).exp();
        let ep = pre * (I * y * lambda / 2.0).exp();
        [
            [em * e.theta(2, t - lambda, 2), ep * e.theta(2, t + lambda, 2)],
            [em * e.theta(3, t - lambda, 2), ep * e.theta(3, t + lambda, 2)],
        ]
    }

    pub fn s_gauge(&self, lambda: C64, t: C64) -> CMat {
        let s = self.s_gauge_arr(lambda, t);
        CMat::from_row_slice(2, 2, &[s[0][0], s[0][1], s[1][0], s[1][1]])
    }

    /// Closed form e^{iyt} θ(λ) θ(t) of det S(λ|t).
    pub fn s_gauge_det_closed(&self, lambda: C64, t: C64) -> C64 {
        (I * self.twist.yf() * t).exp() * self.th(lambda) * self.th(t)
    }

    /// 𝒶(λ) = ∏ θ(λ − ξ_n + η).
    pub fn sa(&self, lambda: C64) -> C64 {
        self.xi.iter().map(|&x| self.th(lambda - x + self.eta)).product()
    }

    /// 𝒹(λ) = 𝒶(λ − η).
    pub fn sd(&self, lambda: C64) -> C64 {
        self.sa(lambda - self.eta)
    }

    /// 𝒶_{x,y}(λ) = (−1)^{x+y+xy} 𝒶(λ).
    pub fn sa_xy(&self, lambda: C64) -> C64 {
        self.twist.a_sign() * self.sa(lambda)
    }

    /// det_q M(λ) = 𝒶(λ) 𝒹(λ − η).
    pub fn quantum_det(&self, lambda: C64) -> C64 {
        self.sa(lambda) * self.sd(lambda - self.eta)
    }

    /// t_0 = −ηN/2 + xπ/2 + yπω/2.
    pub fn t0(&self) -> C64 {
        -self.eta * self.n() as f64 / 2.0 + self.twist.xf() * PI / 2.0 + self.twist.yf() * PI * self.omega() / 2.0
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::max_abs;

    #[test]
    fn lattice_distance_basic() {
        let w = c(0.1, 1.3);
        let z = PI * (c(2.0, 0.0) - 3.0 * w);
        assert!(lattice_distance(z, w) < 1e-12);
        assert!((lattice_distance(z + c(0.01, 0.0), w) - 0.01).abs() < 1e-12);
    }

    #[test]
    fn canonical_fixture_is_generic() {
        let p = ModelParams::canonical(4, Twist::new(1, 0).unwrap(), 7);
        assert!(p.check_generic(GENERIC_MARGIN).is_ok());
        assert!(p.xi.iter().all(|x| x.re >= 0.1 && x.re <= PI - 0.1 && x.im.abs() <= 0.05));
    }

    #[test]
    fn coincident_inhomogeneities_rejected() {
        let r = ModelParams::new(c(0.0, 1.0), c(0.4377, 0.1155), vec![c(0.5, 0.0), c(0.5, 0.0)], Twist::PERIODIC);
        assert!(matches!(r, Err(Error::NonGeneric(_))));
    }

    #[test]
    fn weights_at_zero() {
        let p = ModelParams::canonical(1, Twist::PERIODIC, 1);
        let w = p.weights_8v(c(0.0, 0.0));
        assert!(w.b.norm() < 1e-15 && w.d.norm() < 1e-15);
        assert!((w.a - w.c).norm() < 1e-13 * w.a.norm());
    }

    #[test]
    fn singular_dynamical_parameter() {
        let p = ModelParams::canonical(1, Twist::PERIODIC, 1);
        assert!(matches!(p.r6vd(c(0.2, 0.0), c(PI, 0.0)), Err(Error::SingularDynamicalParameter(_))));
    }

    #[test]
    fn r6vd_at_zero_is_permutation() {
        let p = ModelParams::canonical(1, Twist::new(1, 1).unwrap(), 3);
        let r = p.r6vd(c(0.0, 0.0), c(0.31, 0.22)).unwrap();
        let th = p.th(p.eta);
        let mut perm = CMat::zeros(4, 4);
        perm[(0, 0)] = th;
        perm[(1, 2)] = th;
        perm[(2, 1)] = th;
        perm[(3, 3)] = th;
        assert!(max_abs(&(r - perm)) < 1e-13);
    }
}
