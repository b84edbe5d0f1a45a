use num_complex::Complex64 as C64;
use proptest::prelude::*;
use xyz8v::lattice::transfer_8v;
use xyz8v::oracle::dense_spectrum;
use xyz8v::spectrum::*;
use xyz8v::{ModelParams, Twist};

fn cc(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

fn close(a: C64, b: C64, tol: f64) -> bool {
    (a - b).norm() < tol * a.norm().max(b.norm()).max(1.0)
}

// Σ mult·t(λ)^k against tr T(λ)^k for k = 1, 2.
fn assert_trace_sums(p: &ModelParams, evs: &[(EigenvalueFn, usize)], lambdas: &[C64]) {
    for &l in lambdas {
        let t = transfer_8v(p, l);
        let s1: C64 = evs.iter().map(|(e, m)| e.eval(p, l) * *m as f64).sum();
        let s2: C64 = evs.iter().map(|(e, m)| e.eval(p, l).powu(2) * *m as f64).sum();
        assert!(close(s1, t.trace(), 1e-9), "tr T at {l}: {s1} vs {}", t.trace());
        assert!(close(s2, (&t * &t).trace(), 1e-9), "tr T² at {l}");
    }
}

#[test]
fn twisted_three_sites() {
    let lambdas = [cc(0.37, 0.21), cc(-0.93, -0.12)];
    for tw in Twist::ALL.into_iter().filter(|t| !t.is_periodic()) {
        let p = ModelParams::canonical(3, tw, 14);
        let o = dense_spectrum(&p, 14).unwrap();
        assert!(o.biorth_residual < 1e-8 && o.eigen_residual < 1e-8);
        let a = analyze_twisted(&p, &o, 14).unwrap();
        for cl in &a.claims {
            assert!(cl.passed, "{} twist={tw}: {:e}", cl.label, cl.residual);
        }
        assert_eq!(a.rows.len(), 8, "twist {tw}");
        assert!(a.rows.iter().all(|r| r.multiplicity == 1 && r.oracle_match));
        let evs: Vec<_> = a.rows.iter().map(|r| (r.eigenvalue.clone(), r.multiplicity)).collect();
        assert_trace_sums(&p, &evs, &lambdas);
    }
}

#[test]
fn twisted_discrete_solutions_match_oracle_without_seeding() {
    let p = ModelParams::canonical(2, Twist::new(1, 0).unwrap(), 5);
    let kind = SystemKind::Transfer8V;
    let sols = solve_discrete(&p, kind, 5);
    let o = dense_spectrum(&p, 5).unwrap();
    assert_eq!(sols.solutions.len(), 4);
    for s in &sols.solutions {
        assert!(discrete_residual(&p, s, kind) < 1e-8);
        assert!(o.match_nodes(&s.nodes).is_some());
    }
}

#[test]
fn periodic_odd_chains_are_doubly_degenerate() {
    for n in [1, 3] {
        let p = ModelParams::canonical(n, Twist::PERIODIC, 19);
        let o = dense_spectrum(&p, 19).unwrap();
        let a = analyze_periodic_odd(&p, &o, 19).unwrap();
        for cl in &a.claims {
            assert!(cl.passed, "{} N={n}: {:e}", cl.label, cl.residual);
        }
        assert_eq!(a.eigenvalues.len(), 1 << (n - 1));
        assert!(a.rows.iter().all(|r| r.multiplicity == 2));
        assert!(o.clusters.iter().all(|c| c.mult == 2));
        // every eigenvalue sits in the + sector of the node-product condition
        for e in &a.eigenvalues {
            assert!((e.product_ratio(&p) - 1.0).norm() < 1e-8, "N={n}");
        }
        for c in &o.clusters {
            assert!((EigenvalueFn::new(c.nodes.clone()).product_ratio(&p) + 1.0).norm() > 0.5);
        }
        let evs: Vec<_> = a.eigenvalues.iter().map(|e| (e.clone(), 2)).collect();
        assert_trace_sums(&p, &evs, &[cc(0.12, 0.3), cc(1.2, -0.2)]);
    }
}

#[test]
fn partner_state_rejects_ambiguous_vectors() {
    let n = 1;
    let up = nalgebra::DVector::from_vec(vec![cc(1.0, 0.0), cc(0.0, 0.0)]);
    let partner = partner_state(n, &up).unwrap();
    assert!((partner[1] - 1.0).norm() < 1e-14);
    let mixed = nalgebra::DVector::from_vec(vec![cc(1.0, 0.0), cc(1e-5, 0.0)]);
    assert!(partner_state(n, &mixed).is_err());
}

#[test]
fn sample_points_are_reproducible() {
    assert_eq!(sample_points(4, 10), sample_points(4, 10));
    assert_ne!(sample_points(4, 10), sample_points(5, 10));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn oracle_eigenvalues_solve_the_discrete_system(seed in 0u64..10_000, x in 0u8..2) {
        let tw = Twist::new(x, 1 - x).unwrap();
        let p = ModelParams::canonical(2, tw, seed);
        let o = dense_spectrum(&p, seed).unwrap();
        let kind = SystemKind::Transfer8V;
        for c in &o.clusters {
            let e = EigenvalueFn::new(c.nodes.clone());
            prop_assert!(discrete_residual(&p, &e, kind) < 1e-8);
            prop_assert!(product_sign_residual(&p, &e) < 1e-8);
            prop_assert!(quasi_periodicity_residual(&p, &e, &sample_points(seed, 3)) < 1e-8);
        }
    }
}
