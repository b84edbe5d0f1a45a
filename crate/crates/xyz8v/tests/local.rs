use std::f64::consts::PI;

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;
use proptest::prelude::*;
use xyz8v::local::*;
use xyz8v::{ModelParams, Twist};

type M = DMatrix<C64>;

fn cc(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

// θ_j(z|τ) from the triple product, as an independent reference.
fn theta(j: u8, z: C64, tau: C64) -> C64 {
    let i = cc(0.0, 1.0);
    let q = (i * PI * tau).exp();
    let cos2z = (2.0 * z).cos();
    let mut acc = match j {
        1 => 2.0 * (i * PI * tau / 4.0).exp() * z.sin(),
        2 => 2.0 * (i * PI * tau / 4.0).exp() * z.cos(),
        _ => cc(1.0, 0.0),
    };
    let mut q2n = cc(1.0, 0.0);
    for _ in 1..120 {
        let q2n1 = q2n * q;
        q2n = q2n1 * q;
        acc *= match j {
            1 => (1.0 - q2n) * (1.0 - 2.0 * q2n * cos2z + q2n * q2n),
            2 => (1.0 - q2n) * (1.0 + 2.0 * q2n * cos2z + q2n * q2n),
            _ => (1.0 - q2n) * (1.0 - 2.0 * q2n1 * cos2z + q2n1 * q2n1),
        };
    }
    acc
}

fn fixture() -> ModelParams {
    ModelParams::canonical(2, Twist::new(1, 0).unwrap(), 1)
}

fn max_abs(m: &M) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

fn rel(a: &M, b: &M) -> f64 {
    max_abs(&(a - b)) / max_abs(a).max(max_abs(b))
}

fn sz1() -> M {
    M::from_diagonal(&nalgebra::DVector::from_vec(vec![cc(1.0, 0.0), cc(1.0, 0.0), cc(-1.0, 0.0), cc(-1.0, 0.0)]))
}

#[test]
fn weights_match_reference_thetas() {
    let p = fixture();
    let w = p.omega();
    let eta = p.eta;
    let z = cc(0.0, 0.0);
    for l in [cc(0.3, 0.0), cc(-0.71, 0.22), cc(1.9, -0.4)] {
        let pf = 2.0 / (theta(2, z, w) * theta(4, z, 2.0 * w));
        let t1 = |x: C64| theta(1, x, 2.0 * w);
        let t4 = |x: C64| theta(4, x, 2.0 * w);
        let a = pf * t4(eta) * t1(l + eta) * t4(l);
        let b = pf * t4(eta) * t1(l) * t4(l + eta);
        let c = pf * t1(eta) * t4(l) * t4(l + eta);
        let d = pf * t1(eta) * t1(l + eta) * t1(l);
        let wt = p.weights_8v(l);
        for (x, y) in [(wt.a, a), (wt.b, b), (wt.c, c), (wt.d, d)] {
            assert!((x - y).norm() < 1e-12 * y.norm().max(1e-3), "{x} vs {y}");
        }
        // symmetric 8-vertex pattern
        let r = p.r8v(l);
        assert_eq!(r[(0, 0)], r[(3, 3)]);
        assert_eq!(r[(1, 2)], r[(2, 1)]);
    }
}

#[test]
fn period_pi_at_fixed_point() {
    let p = fixture();
    let l = cc(0.3, 0.0);
    let expect = -(sz1() * p.r8v(l) * sz1());
    assert!(rel(&p.r8v(l + PI), &expect) < 1e-12);
    assert!(period_pi_residual(&p, l) < 1e-12);
}

#[test]
fn unitarity_at_fixed_point() {
    let p = fixture();
    let l = cc(0.5, 0.2);
    let w = p.omega();
    let swap = M::from_fn(4, 4, |i, j| {
        let (a, b) = (i >> 1, i & 1);
        if j == (b << 1 | a) {
            cc(1.0, 0.0)
        } else {
            cc(0.0, 0.0)
        }
    });
    let r21 = &swap * p.r8v(-l) * &swap;
    let lhs = r21 * p.r8v(l);
    let scalar = theta(1, -l + p.eta, w) * theta(1, l + p.eta, w);
    assert!(rel(&lhs, &(M::identity(4, 4) * scalar)) < 1e-12);
}

#[test]
fn regularity_at_zero_gives_permutation() {
    let p = fixture();
    let r = p.r8v(cc(0.0, 0.0));
    let s = r[(0, 0)];
    assert!(r[(1, 1)].norm() < 1e-14 * s.norm() && r[(0, 3)].norm() < 1e-14 * s.norm());
    assert!((r[(1, 2)] - s).norm() < 1e-13 * s.norm());
}

#[test]
fn gauge_reflection_each_twist() {
    for tw in Twist::ALL {
        let p = fixture().with_twist(tw);
        for (l, t) in [(cc(0.2, 0.1), cc(0.7, -0.1)), (cc(-1.1, 0.3), cc(1.4, 0.2))] {
            assert!(gauge_reflection_residual(&p, l, t) < 1e-12, "twist {tw}");
        }
    }
}

fn omega() -> impl Strategy<Value = C64> {
    (-0.3f64..0.3, 0.8f64..1.4).prop_map(|(a, b)| cc(a, b))
}

fn eta() -> impl Strategy<Value = C64> {
    (0.2f64..0.7, -0.2f64..0.2).prop_map(|(a, b)| cc(a, b))
}

fn point() -> impl Strategy<Value = C64> {
    (-1.5f64..1.5, -0.4f64..0.4).prop_map(|(a, b)| cc(a, b))
}

fn params(w: C64, e: C64) -> Option<ModelParams> {
    let p = ModelParams::new(w, e, vec![cc(0.9, 0.01), cc(2.1, -0.02)], Twist::PERIODIC).ok()?;
    p.check_generic(0.05).ok()?;
    Some(p)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn yang_baxter(w in omega(), e in eta(), l1 in point(), l2 in point(), l3 in point()) {
        let Some(p) = params(w, e) else { return Ok(()) };
        prop_assert!(ybe_residual(&p, l1, l2, l3) < 1e-10);
    }

    #[test]
    fn unitarity_and_crossing(w in omega(), e in eta(), l in point()) {
        let Some(p) = params(w, e) else { return Ok(()) };
        prop_assert!(unitarity_residual(&p, l) < 1e-10);
        prop_assert!(crossing_residual(&p, l) < 1e-10);
    }

    #[test]
    fn quasi_periods(w in omega(), e in eta(), l in point()) {
        let Some(p) = params(w, e) else { return Ok(()) };
        prop_assert!(period_pi_residual(&p, l) < 1e-10);
        prop_assert!(period_omega_residual(&p, l) < 1e-10);
    }

    #[test]
    fn dynamical_yang_baxter(w in omega(), e in eta(), l1 in point(), l2 in point(), l3 in point(), t in (0.2f64..2.8, -0.3f64..0.3)) {
        let Some(p) = params(w, e) else { return Ok(()) };
        let t = cc(t.0, t.1);
        prop_assert!(dybe_residual(&p, l1 - l2, l1 - l3, l2 - l3, t) < 1e-10);
    }

    #[test]
    fn vertex_irf(w in omega(), e in eta(), l1 in point(), l2 in point(), t in (0.2f64..2.8, -0.3f64..0.3), x in 0u8..2, y in 0u8..2) {
        let Some(p) = params(w, e) else { return Ok(()) };
        let p = p.with_twist(Twist::new(x, y).unwrap());
        let t = cc(t.0, t.1);
        prop_assert!(vertex_irf_residual(&p, l1, l2, t) < 1e-10);
        prop_assert!(gauge_det_residual(&p, l1, t) < 1e-10);
        prop_assert!(r6vd_det_residual(&p, l1, t) < 1e-10);
        prop_assert!(gauge_reflection_residual(&p, l1, t) < 1e-10);
    }
}
