use nalgebra::DMatrix;
use num_complex::Complex64 as C64;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use xyz8v::dynamical::*;
use xyz8v::lattice::transfer_8v;
use xyz8v::{ModelParams, Twist};

type M = DMatrix<C64>;

fn cc(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

fn max_abs(m: &M) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

fn rel(a: &M, b: &M) -> f64 {
    max_abs(&(a - b)) / max_abs(a).max(max_abs(b))
}

fn twisted() -> Vec<Twist> {
    Twist::ALL.into_iter().filter(|t| !t.is_periodic()).collect()
}

// σ^z on every site, built from the diagonal directly.
fn all_sz(n: usize) -> M {
    let d = 1usize << n;
    M::from_fn(d, d, |i, j| if i == j { cc(if i.count_ones() % 2 == 0 { 1.0 } else { -1.0 }, 0.0) } else { cc(0.0, 0.0) })
}

// Power sums tr(M^k), k = 1..dim, determine the spectrum with multiplicities.
fn power_traces(m: &M) -> Vec<C64> {
    let mut acc = M::identity(m.nrows(), m.ncols());
    (0..m.nrows())
        .map(|_| {
            acc = &acc * m;
            acc.trace()
        })
        .collect()
}

#[test]
fn rel_tbis_for_every_twisted_chain() {
    for n in [2, 3] {
        for tw in twisted() {
            let p = ModelParams::canonical(n, tw, 5);
            for l in [cc(0.41, 0.13), cc(-1.05, -0.2)] {
                let (r, cond) = rel_tbis_residual(&p, l).unwrap();
                assert!(r < 1e-8, "N={n} twist={tw}: {r:e} (cond {cond:e})");
                assert!(cond.is_finite() && cond >= 1.0);
            }
        }
    }
}

#[test]
fn similar_transfer_matrices_share_power_traces() {
    for tw in twisted() {
        let p = ModelParams::canonical(3, tw, 8);
        let l = cc(0.27, -0.09);
        let t8 = transfer_8v(&p, l);
        let tb = antiperiodic_transfer_6vd(&p, l) * tw.phase_x();
        for (k, (a, b)) in power_traces(&t8).iter().zip(power_traces(&tb)).enumerate() {
            assert!((a - b).norm() < 1e-9 * a.norm().max(b.norm()).max(1.0), "twist={tw} k={}: {a} vs {b}", k + 1);
        }
    }
}

#[test]
fn vertex_irf_operator_has_product_form() {
    for tw in Twist::ALL {
        let p = ModelParams::canonical(3, tw, 2);
        let s0 = vertex_irf_operator(&p, 0);
        assert!(rel(&s0, &vertex_irf_quasi_tensor(&p, 0)) < 1e-12, "twist {tw}");
    }
}

#[test]
fn antiperiodic_transfer_anticommutes_with_global_sz() {
    for n in [1, 3] {
        let p = ModelParams::canonical(n, Twist::PERIODIC, 3);
        let gz = all_sz(n);
        let tb = antiperiodic_transfer_6vd(&p, cc(0.52, 0.17));
        assert!(max_abs(&(&gz * &tb + &tb * &gz)) < 1e-12 * max_abs(&tb));
    }
}

#[test]
fn periodic_odd_kernels_split_evenly() {
    let p = ModelParams::canonical(3, Twist::PERIODIC, 11);
    let k = kernel_analysis_periodic_odd(&p).unwrap();
    assert_eq!(k.ker_s0.ncols(), 4);
    assert_eq!(k.ker_s_hat.ncols(), 4);
    assert_eq!(k.intersection_dim, 0);
    assert!(k.gap < 1e-4);
    let fro = |m: &M| m.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    assert!(fro(&(&k.s0 * &k.ker_s0)) < 1e-8 * fro(&k.s0));
    assert!(kernel_analysis_periodic_odd(&p.with_twist(Twist::new(1, 0).unwrap())).is_err());
    assert!(kernel_analysis_periodic_odd(&ModelParams::canonical(2, Twist::PERIODIC, 11)).is_err());
}

#[test]
fn twisted_s0_is_invertible() {
    for tw in twisted() {
        let p = ModelParams::canonical(3, tw, 4);
        let s = vertex_irf_operator(&p, 0);
        let inv = s.clone().try_inverse().expect("S0 invertible");
        assert!(rel(&(&s * inv), &M::identity(8, 8)) < 1e-9, "twist {tw}");
    }
}

#[test]
fn dynamical_suite_passes() {
    let cases = [(2, Twist::new(0, 1).unwrap()), (3, Twist::new(1, 1).unwrap()), (3, Twist::PERIODIC), (1, Twist::PERIODIC)];
    let lambdas = [cc(0.33, 0.1), cc(-0.8, -0.25)];
    for (n, tw) in cases {
        let p = ModelParams::canonical(n, tw, 6);
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let claims = verify_dynamical(&p, &lambdas, &mut rng, 1e-9);
        assert!(!claims.is_empty());
        for cl in claims {
            assert!(cl.passed, "{} N={n} twist={tw}: {:e}", cl.label, cl.residual);
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    assert!(verify_dynamical(&ModelParams::canonical(2, Twist::PERIODIC, 6), &lambdas, &mut rng, 1e-9).is_empty());
}

#[test]
fn matrix_elements_through_gauge_n2() {
    let p = ModelParams::canonical(2, Twist::new(0, 1).unwrap(), 9);
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let v = random_coeffs(&mut rng, 4);
    let (r1, r2) = matrix_element_residuals(&p, cc(0.44, 0.06), &v).unwrap();
    assert!(r1 < 1e-8 && r2 < 1e-8, "{r1:e} {r2:e}");
}

#[test]
fn periodic_pseudo_similarities_from_swapped_eigenvectors() {
    let p = ModelParams::canonical(3, Twist::PERIODIC, 11);
    let o = xyz8v::oracle::dense_spectrum(&p, 11).unwrap();
    let mut plus = Vec::new();
    let mut minus = Vec::new();
    for e in &o.clusters {
        assert_eq!(e.mult, 2);
        let psi = e.right_vec(0);
        let partner = xyz8v::spectrum::partner_state(3, &psi).unwrap();
        plus.push(psi);
        minus.push(partner);
    }
    let g = swap_operator(&M::from_columns(&plus), &M::from_columns(&minus)).unwrap();
    let ps = pseudo_similarities(&p, g).unwrap();
    assert!(ps.cond_plus < 1e8 && ps.cond_minus < 1e8);
    assert!(pseudo_similarity_residual(&p, &ps, cc(0.3, 0.2)) < 1e-8);
    assert!(prod_transfer_residual(&p) < 1e-9);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn rel_tbis_random(seed in 0u64..10_000, x in 0u8..2, l in (-1.4f64..1.4, -0.4f64..0.4)) {
        let tw = Twist::new(x, 1 - x).unwrap();
        let p = ModelParams::canonical(2, tw, seed);
        let (r, _) = rel_tbis_residual(&p, cc(l.0, l.1)).unwrap();
        prop_assert!(r < 1e-8, "{r:e}");
    }

    #[test]
    fn antiperiodic_transfer_commutes(seed in 0u64..10_000, a in (-1.4f64..1.4, -0.4f64..0.4), b in (-1.4f64..1.4, -0.4f64..0.4)) {
        let p = ModelParams::canonical(3, Twist::new(1, 1).unwrap(), seed);
        let ta = antiperiodic_transfer_6vd(&p, cc(a.0, a.1));
        let tb = antiperiodic_transfer_6vd(&p, cc(b.0, b.1));
        prop_assert!(rel(&(&ta * &tb), &(&tb * &ta)) < 1e-11);
    }

    #[test]
    fn product_at_nodes(seed in 0u64..10_000, x in 0u8..2, y in 0u8..2) {
        let p = ModelParams::canonical(3, Twist::new(x, y).unwrap(), seed);
        prop_assert!(prod_transfer_residual(&p) < 1e-9);
    }
}
