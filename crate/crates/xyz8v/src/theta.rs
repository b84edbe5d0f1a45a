//! Jacobi theta functions θ_j(λ|kω), the order-N functions ϑ_j and the
//! twist-adapted θ_X, evaluated from their bilateral q-series.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::linalg::{c, C64, I};
use crate::twist::Twist;

const DEFAULT_TAIL_TOL: f64 = 1e-18;

/// Modular data shared by every theta evaluation.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EllipticParams {
    omega: C64,
    nome: C64,
    series_cutoff: usize,
    tail_tol: f64,
}

impl EllipticParams {
    pub fn new(omega: C64) -> Result<Self> {
        Self::with_tail_tol(omega, DEFAULT_TAIL_TOL)
    }

    pub fn with_tail_tol(omega: C64, tail_tol: f64) -> Result<Self> {
        if !(omega.re.is_finite() && omega.im.is_finite()) || omega.im <= 0.0 {
            return Err(Error::Parameter(format!("Im(omega) must be positive, got {omega}")));
        }
        if !(tail_tol > 0.0 && tail_tol < 1.0) {
            return Err(Error::Parameter(format!("tail_tol must lie in (0,1), got {tail_tol}")));
        }
        let nome = (I * PI * omega).exp();
        // |q|^{M^2} < tail_tol
        let m = ((-tail_tol.ln()) / (PI * omega.im)).sqrt().ceil() as usize + 1;
        Ok(EllipticParams { omega, nome, series_cutoff: m, tail_tol })
    }

    /// Same parameters with a wider summation window.
    pub fn with_cutoff(mut self, series_cutoff: usize) -> Self {
        self.series_cutoff = series_cutoff.max(1);
        self
    }

    pub fn omega(&self) -> C64 {
        self.omega
    }

    pub fn nome(&self) -> C64 {
        self.nome
    }

    pub fn series_cutoff(&self) -> usize {
        self.series_cutoff
    }

    pub fn tail_tol(&self) -> f64 {
        self.tail_tol
    }

    /// Σ_n s^n (2i(n+c))^p exp(iπτ(n+c)² + 2i(n+c)z), summed over a window
    /// centred on the largest term.
    fn gauss_sum(&self, tau: C64, z: C64, offset: f64, alternating: bool, p: u32) -> C64 {
        let scale = (self.omega.im / tau.im).sqrt();
        let half = self.series_cutoff as f64 * scale + 1.0 + p as f64;
        let centre = -z.im / (PI * tau.im);
        let lo = (centre - half - offset).floor() as i64;
        let hi = (centre + half - offset).ceil() as i64;
        let mut acc = c(0.0, 0.0);
        for n in lo..=hi {
            let m = n as f64 + offset;
            let mut term = (I * PI * tau * m * m + 2.0 * I * m * z).exp();
            if p > 0 {
                term *= (2.0 * I * m).powu(p);
            }
            if alternating && n.rem_euclid(2) == 1 {
                acc -= term;
            } else {
                acc += term;
            }
        }
        acc
    }

    fn theta_tau(&self, j: u8, z: C64, tau: C64, p: u32) -> C64 {
        match j {
            1 => -I * self.gauss_sum(tau, z, 0.5, true, p),
            2 => self.gauss_sum(tau, z, 0.5, false, p),
            3 => self.gauss_sum(tau, z, 0.0, false, p),
            4 => self.gauss_sum(tau, z, 0.0, true, p),
            _ => panic!("theta index must be 1..=4, got {j}"),
        }
    }

    /// θ_j(z|kω) for j ∈ 1..=4, k ∈ {1,2}. Unchecked fast path.
    pub fn theta(&self, j: u8, z: C64, k: u8) -> C64 {
        self.theta_tau(j, z, self.omega * k as f64, 0)
    }

    /// d/dz θ_j(z|kω) from the term-wise differentiated series.
    pub fn theta_deriv(&self, j: u8, z: C64, k: u8) -> C64 {
        self.theta_tau(j, z, self.omega * k as f64, 1)
    }

    /// Validated θ_j(λ|kω).
    pub fn theta_j(&self, j: u8, lambda: C64, k: u8) -> Result<C64> {
        if !(1..=4).contains(&j) {
            return Err(Error::Parameter(format!("theta index must be 1..=4, got {j}")));
        }
        if k != 1 && k != 2 {
            return Err(Error::Parameter(format!("period multiplier must be 1 or 2, got {k}")));
        }
        check_finite(lambda)?;
        Ok(self.theta(j, lambda, k))
    }

    /// θ(λ) ≡ θ_1(λ|ω).
    pub fn th(&self, z: C64) -> C64 {
        self.theta(1, z, 1)
    }

    pub fn th_deriv(&self, z: C64) -> C64 {
        self.theta_deriv(1, z, 1)
    }

    /// ϑ_j(λ) = Σ_n exp(iπNω(n+½−j/N)² + 2iN(n+½−j/N)(λ−π/2)).
    pub fn vartheta(&self, j: usize, n_sites: usize, lambda: C64) -> C64 {
        assert!(j < n_sites, "vartheta index {j} out of range for N = {n_sites}");
        let nf = n_sites as f64;
        let offset = 0.5 - j as f64 / nf;
        self.gauss_sum(self.omega * nf, (lambda - PI / 2.0) * nf, offset, false, 0)
    }

    pub fn vartheta_j(&self, j: usize, n_sites: usize, lambda: C64) -> Result<C64> {
        if n_sites == 0 || j >= n_sites {
            return Err(Error::Parameter(format!("vartheta index {j} out of range for N = {n_sites}")));
        }
        check_finite(lambda)?;
        Ok(self.vartheta(j, n_sites, lambda))
    }

    /// θ_X(λ) for a non-trivial twist.
    pub fn theta_x(&self, lambda: C64, twist: Twist) -> Result<C64> {
        check_finite(lambda)?;
        let w = self.omega;
        match (twist.x, twist.y) {
            (0, 1) => Ok(self.theta_tau(1, lambda / 2.0, w / 2.0, 0)),
            (1, 0) => Ok(self.theta_tau(1, lambda, w * 2.0, 0)),
            (1, 1) => {
                let u = (lambda + PI + PI * w) / 2.0;
                Ok((I * lambda / 2.0).exp() * self.th(lambda / 2.0) * self.th(u))
            }
            _ => Err(Error::UnsupportedTwist),
        }
    }

    /// d/dλ θ_X(λ).
    pub fn theta_x_deriv(&self, lambda: C64, twist: Twist) -> Result<C64> {
        check_finite(lambda)?;
        let w = self.omega;
        match (twist.x, twist.y) {
            (0, 1) => Ok(self.theta_tau(1, lambda / 2.0, w / 2.0, 1) / 2.0),
            (1, 0) => Ok(self.theta_tau(1, lambda, w * 2.0, 1)),
            (1, 1) => {
                let u = (lambda + PI + PI * w) / 2.0;
                let e = (I * lambda / 2.0).exp();
                let (f, g) = (self.th(lambda / 2.0), self.th(u));
                let (fp, gp) = (self.th_deriv(lambda / 2.0) / 2.0, self.th_deriv(u) / 2.0);
                Ok(e * (I / 2.0 * f * g + fp * g + f * gp))
            }
            _ => Err(Error::UnsupportedTwist),
        }
    }

    /// The real quasi-period π_X of θ_X: π for y = 1, πω for y = 0.
    pub fn pi_x(&self, twist: Twist) -> C64 {
        if twist.y == 1 {
            c(PI, 0.0)
        } else {
            PI * self.omega
        }
    }
}

fn check_finite(z: C64) -> Result<()> {
    if z.re.is_finite() && z.im.is_finite() {
        Ok(())
    } else {
        Err(Error::Parameter(format!("non-finite argument {z}")))
    }
}
