//! Dense diagonalization of the transfer matrix, used as ground truth by every
//! other solver.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::lattice::{gamma_z, transfer_8v};
use crate::linalg::{c, inverse, max_abs, orth, smallest_right_singular, CMat, C64};
use crate::model::ModelParams;

/// Default point at which the transfer matrix is diagonalized.
pub const LAMBDA0: C64 = C64 { re: 0.2313, im: 0.1 };

/// Relative distance below which two eigenvalues of T(λ_0) are one cluster.
pub const CLUSTER_TOL: f64 = 1e-7;

/// One eigenspace of the commuting family T(λ).
#[derive(Clone, Debug)]
pub struct OracleEigen {
    /// Eigenvalue of T(λ_0).
    pub mu: C64,
    pub mult: usize,
    /// Right eigenvectors (columns).
    pub right: CMat,
    /// Left eigenvectors (columns), biorthonormal to `right` under the bilinear pairing.
    pub left: CMat,
    /// t(ξ_a) for a = 1..N.
    pub nodes: Vec<C64>,
    /// Γ_z eigenvalue per column for the periodic chain, empty otherwise.
    pub gamma_z: Vec<f64>,
    /// Largest relative singular value discarded when extracting the eigenspace.
    pub null_quality: f64,
}

impl OracleEigen {
    /// tr(W^T T(λ) V)/k.
    pub fn eval(&self, p: &ModelParams, lambda: C64) -> C64 {
        eigen_value_on(&self.left, &self.right, &transfer_8v(p, lambda))
    }

    pub fn right_vec(&self, j: usize) -> crate::linalg::CVec {
        self.right.column(j).into_owned()
    }

    pub fn left_vec(&self, j: usize) -> crate::linalg::CVec {
        self.left.column(j).into_owned()
    }
}

fn eigen_value_on(w: &CMat, v: &CMat, t: &CMat) -> C64 {
    (w.transpose() * t * v).trace() / v.ncols() as f64
}

#[derive(Clone, Debug)]
pub struct OracleSpectrum {
    pub lambda0: C64,
    pub clusters: Vec<OracleEigen>,
    /// max |W^T V − I| over the full biorthonormal basis.
    pub biorth_residual: f64,
    /// max over clusters of ‖T(λ)V − V t(λ)‖ at a check point, relative.
    pub eigen_residual: f64,
}

impl OracleSpectrum {
    pub fn len(&self) -> usize {
        self.clusters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.clusters.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.clusters.iter().map(|e| e.mult).sum()
    }

    /// All right eigenvectors side by side, cluster order.
    pub fn right_matrix(&self) -> CMat {
        hstack(self.clusters.iter().map(|e| &e.right))
    }

    pub fn left_matrix(&self) -> CMat {
        hstack(self.clusters.iter().map(|e| &e.left))
    }

    /// Cluster whose node values are closest to `nodes`, with the relative distance.
    pub fn match_nodes(&self, nodes: &[C64]) -> Option<(usize, f64)> {
        self.clusters
            .iter()
            .enumerate()
            .map(|(i, e)| (i, node_distance(&e.nodes, nodes)))
            .min_by(|a, b| a.1.total_cmp(&b.1))
    }
}

/// max_a |x_a − y_a| / max_a max(|x_a|, |y_a|).
pub fn node_distance(x: &[C64], y: &[C64]) -> f64 {
    let mut d: f64 = 0.0;
    let mut s: f64 = 0.0;
    for (a, b) in x.iter().zip(y) {
        d = d.max((a - b).norm());
        s = s.max(a.norm()).max(b.norm());
    }
    if s == 0.0 {
        d
    } else {
        d / s
    }
}

pub fn hstack<'a>(mats: impl Iterator<Item = &'a CMat>) -> CMat {
    let mats: Vec<&CMat> = mats.collect();
    let rows = mats.first().map(|m| m.nrows()).unwrap_or(0);
    let cols: usize = mats.iter().map(|m| m.ncols()).sum();
    let mut out = CMat::zeros(rows, cols);
    let mut off = 0;
    for m in mats {
        out.view_mut((0, off), (rows, m.ncols())).copy_from(m);
        off += m.ncols();
    }
    out
}

/// Eigenvalues of a dense complex matrix.
pub fn eigenvalues(m: &CMat) -> Result<Vec<C64>> {
    let fm = faer::Mat::<C64>::from_fn(m.nrows(), m.ncols(), |i, j| m[(i, j)]);
    fm.eigenvalues().map_err(|e| Error::Singular(format!("eigenvalue iteration failed: {e:?}")))
}

/// Groups eigenvalues closer than `tol`·max|μ|, returning (mean, multiplicity).
pub fn cluster(values: &[C64], tol: f64) -> Vec<(C64, usize)> {
    let scale = values.iter().map(|z| z.norm()).fold(0.0, f64::max).max(f64::MIN_POSITIVE);
    let mut sorted: Vec<C64> = values.to_vec();
    sorted.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
    let mut groups: Vec<Vec<C64>> = Vec::new();
    for z in sorted {
        match groups.iter_mut().find(|g| g.iter().any(|w| (w - z).norm() < tol * scale)) {
            Some(g) => g.push(z),
            None => groups.push(vec![z]),
        }
    }
    groups
        .into_iter()
        .map(|g| (g.iter().sum::<C64>() / g.len() as f64, g.len()))
        .collect()
}

/// Full spectral decomposition of T(λ), redrawing λ_0 when an eigenvalue
/// coincidence at λ_0 merges eigenspaces of the commuting family.
pub fn dense_spectrum(p: &ModelParams, seed: u64) -> Result<OracleSpectrum> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x6f72_6163_6c65);
    let mut lambda0 = LAMBDA0;
    for _ in 0..12 {
        match spectrum_at(p, lambda0) {
            Ok(s) => return Ok(s),
            Err(Error::Ambiguous(_)) => {
                lambda0 = LAMBDA0 + c(rng.gen_range(-0.3..0.3), rng.gen_range(-0.1..0.1));
            }
            Err(e) => return Err(e),
        }
    }
    Err(Error::Ambiguous("could not find a spectral parameter separating the eigenspaces".into()))
}

/// Spectral decomposition at a fixed λ_0.
pub fn spectrum_at(p: &ModelParams, lambda0: C64) -> Result<OracleSpectrum> {
    let dim = p.dim();
    let t0 = transfer_8v(p, lambda0);
    let probe = transfer_8v(p, lambda0 + c(0.417, -0.063));
    let groups = cluster(&eigenvalues(&t0)?, CLUSTER_TOL);
    let gz = if p.twist.is_periodic() { Some(gamma_z(p.n())) } else { None };
    let mut clusters = Vec::with_capacity(groups.len());
    let mut eig_res: f64 = 0.0;
    let tscale = max_abs(&t0).max(f64::MIN_POSITIVE);
    let id = CMat::identity(dim, dim);
    for (mu, k) in groups {
        let (v, dropped, kept) = smallest_right_singular(&(&t0 - &id * mu), k);
        let (w, _, _) = smallest_right_singular(&(t0.transpose() - &id * mu), k);
        if kept < 1e3 * dropped.max(1e-16) && k < dim {
            return Err(Error::Ambiguous(format!("eigenvalue {mu} has no clean null space")));
        }
        // The eigenspace must be invariant under T at another spectral parameter.
        let pv = &probe * &v;
        let coeffs = v.adjoint() * &pv;
        let leak = max_abs(&(&pv - &v * coeffs)) / max_abs(&probe).max(f64::MIN_POSITIVE);
        if leak > 1e-7 {
            return Err(Error::Ambiguous(format!("eigenvalue {mu} merges distinct eigenspaces (leak {leak:.2e})")));
        }
        let (v, w, gamma) = match &gz {
            Some(g) if k > 1 => split_gamma_z(g, &v, &w)?,
            Some(g) => {
                let s = (v.adjoint() * g * &v)[(0, 0)].re.signum();
                (v, w, vec![s])
            }
            None => (v, w, Vec::new()),
        };
        let (v, w) = biorthonormalize(v, w)?;
        let mu_refined = eigen_value_on(&w, &v, &t0);
        eig_res = eig_res.max(max_abs(&(&t0 * &v - &v * mu_refined)) / tscale);
        let nodes = p.xi.iter().map(|&x| eigen_value_on(&w, &v, &transfer_8v(p, x))).collect();
        clusters.push(OracleEigen { mu: mu_refined, mult: k, right: v, left: w, nodes, gamma_z: gamma, null_quality: dropped });
    }
    let total: usize = clusters.iter().map(|e| e.mult).sum();
    if total != dim {
        return Err(Error::Inconsistent(format!("eigenspaces cover {total} of {dim} dimensions")));
    }
    let vall = hstack(clusters.iter().map(|e| &e.right));
    let wall = hstack(clusters.iter().map(|e| &e.left));
    let biorth_residual = max_abs(&(wall.transpose() * vall - CMat::identity(dim, dim)));
    Ok(OracleSpectrum { lambda0, clusters, biorth_residual, eigen_residual: eig_res })
}

/// Splits a Γ_z-invariant eigenspace into Γ_z = ±1 parts.
fn split_gamma_z(g: &CMat, v: &CMat, w: &CMat) -> Result<(CMat, CMat, Vec<f64>)> {
    let dim = g.nrows();
    let id = CMat::identity(dim, dim);
    let vp = orth(&((&id + g) * v), 1e-8);
    let vm = orth(&((&id - g) * v), 1e-8);
    let wp = orth(&((&id + g) * w), 1e-8);
    let wm = orth(&((&id - g) * w), 1e-8);
    if vp.ncols() + vm.ncols() != v.ncols() || vp.ncols() != wp.ncols() || vm.ncols() != wm.ncols() {
        return Err(Error::Inconsistent("eigenspace is not Γ_z-invariant".into()));
    }
    let mut gamma = vec![1.0; vp.ncols()];
    gamma.extend(std::iter::repeat(-1.0).take(vm.ncols()));
    Ok((hstack([&vp, &vm].into_iter()), hstack([&wp, &wm].into_iter()), gamma))
}

/// Unit-norm right vectors and left vectors rescaled so that W^T V = I.
fn biorthonormalize(v: CMat, w: CMat) -> Result<(CMat, CMat)> {
    let mut v = v;
    for mut col in v.column_iter_mut() {
        let n = col.norm();
        col /= c(n, 0.0);
    }
    let m = v.transpose() * &w;
    let w = w * inverse(&m)?;
    Ok((v, w))
}
