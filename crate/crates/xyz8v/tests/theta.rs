use std::f64::consts::PI;

use num_complex::Complex64 as C64;
use proptest::prelude::*;
use xyz8v::{EllipticParams, Twist};

// Jacobi triple-product forms, independent of the q-series in the library.
fn product(j: u8, z: C64, tau: C64) -> C64 {
    let i = C64::new(0.0, 1.0);
    let q = (i * PI * tau).exp();
    let q4 = (i * PI * tau / 4.0).exp();
    let cos2z = (2.0 * z).cos();
    let mut acc = match j {
        1 => 2.0 * q4 * z.sin(),
        2 => 2.0 * q4 * z.cos(),
        _ => C64::new(1.0, 0.0),
    };
    let mut q2n = C64::new(1.0, 0.0);
    for _ in 1..200 {
        let q2n1 = q2n * q;
        q2n = q2n1 * q;
        let f = match j {
            1 => (1.0 - q2n) * (1.0 - 2.0 * q2n * cos2z + q2n * q2n),
            2 => (1.0 - q2n) * (1.0 + 2.0 * q2n * cos2z + q2n * q2n),
            3 => (1.0 - q2n) * (1.0 + 2.0 * q2n1 * cos2z + q2n1 * q2n1),
            _ => (1.0 - q2n) * (1.0 - 2.0 * q2n1 * cos2z + q2n1 * q2n1),
        };
        acc *= f;
        if q2n1.norm() < 1e-18 {
            break;
        }
    }
    acc
}

fn rel(a: C64, b: C64) -> f64 {
    (a - b).norm() / a.norm().max(b.norm()).max(1e-300)
}

fn omega_strategy() -> impl Strategy<Value = C64> {
    (-0.4f64..0.4, 0.6f64..1.6).prop_map(|(re, im)| C64::new(re, im))
}

fn point() -> impl Strategy<Value = C64> {
    (-2.0f64..2.0, -0.5f64..0.5).prop_map(|(re, im)| C64::new(re, im))
}

#[test]
fn fixed_point_against_triple_product() {
    let e = EllipticParams::new(C64::new(0.0, 1.0)).unwrap();
    let z = C64::new(0.4377, 0.1155);
    for j in 1..=4 {
        for k in [1u8, 2] {
            let tau = C64::new(0.0, k as f64);
            assert!(rel(e.theta(j, z, k), product(j, z, tau)) < 1e-13, "j={j} k={k}");
        }
    }
}

#[test]
fn jacobi_quartic_identity() {
    let e = EllipticParams::new(C64::new(0.17, 0.9)).unwrap();
    let z = C64::new(0.0, 0.0);
    let t2 = e.theta(2, z, 1).powu(4);
    let t3 = e.theta(3, z, 1).powu(4);
    let t4 = e.theta(4, z, 1).powu(4);
    assert!(rel(t3, t2 + t4) < 1e-13);
}

#[test]
fn theta_x_matches_product_forms() {
    let w = C64::new(0.1, 1.1);
    let e = EllipticParams::new(w).unwrap();
    let l = C64::new(0.63, -0.21);
    let i = C64::new(0.0, 1.0);
    let expect_01 = product(1, l / 2.0, w / 2.0);
    let expect_10 = product(1, l, w * 2.0);
    let u = (l + PI + PI * w) / 2.0;
    let expect_11 = (i * l / 2.0).exp() * product(1, l / 2.0, w) * product(1, u, w);
    assert!(rel(e.theta_x(l, Twist::new(0, 1).unwrap()).unwrap(), expect_01) < 1e-12);
    assert!(rel(e.theta_x(l, Twist::new(1, 0).unwrap()).unwrap(), expect_10) < 1e-12);
    assert!(rel(e.theta_x(l, Twist::new(1, 1).unwrap()).unwrap(), expect_11) < 1e-12);
    assert!(e.theta_x(l, Twist::PERIODIC).is_err());
}

#[test]
fn invalid_inputs_are_rejected() {
    let e = EllipticParams::new(C64::new(0.0, 1.0)).unwrap();
    assert!(e.theta_j(5, C64::new(0.1, 0.0), 1).is_err());
    assert!(e.theta_j(1, C64::new(0.1, 0.0), 3).is_err());
    assert!(e.theta_j(1, C64::new(f64::NAN, 0.0), 1).is_err());
    assert!(e.vartheta_j(3, 3, C64::new(0.1, 0.0)).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn series_matches_triple_product(w in omega_strategy(), z in point(), j in 1u8..=4, k in 1u8..=2) {
        let e = EllipticParams::new(w).unwrap();
        let tau = w * k as f64;
        let a = e.theta(j, z, k);
        let b = product(j, z, tau);
        prop_assert!((a - b).norm() < 1e-12 * b.norm().max(1.0), "{a} vs {b}");
    }

    #[test]
    fn quasi_periodicity(w in omega_strategy(), z in point()) {
        let e = EllipticParams::new(w).unwrap();
        let i = C64::new(0.0, 1.0);
        let t = e.th(z);
        prop_assert!(rel(e.th(z + PI), -t) < 1e-12);
        let shifted = e.th(z + PI * w);
        let factor = -(-i * (2.0 * z + PI * w)).exp();
        prop_assert!(rel(shifted, factor * t) < 1e-11);
    }

    #[test]
    fn parity(w in omega_strategy(), z in point()) {
        let e = EllipticParams::new(w).unwrap();
        prop_assert!(rel(e.theta(1, -z, 1), -e.theta(1, z, 1)) < 1e-12);
        for j in 2..=4 {
            prop_assert!(rel(e.theta(j, -z, 1), e.theta(j, z, 1)) < 1e-12);
        }
    }

    #[test]
    fn derivative_matches_central_difference(w in omega_strategy(), z in point(), j in 1u8..=4) {
        let e = EllipticParams::new(w).unwrap();
        let h = 1e-5;
        let fd = (product(j, z + h, w) - product(j, z - h, w)) / (2.0 * h);
        let d = e.theta_deriv(j, z, 1);
        prop_assert!((d - fd).norm() < 1e-8 * d.norm().max(1.0));
    }
}
