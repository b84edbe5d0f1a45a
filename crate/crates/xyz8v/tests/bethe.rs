use num_complex::Complex64 as C64;
use xyz8v::bethe::*;
use xyz8v::lattice::transfer_8v;
use xyz8v::oracle::dense_spectrum;
use xyz8v::spectrum::{analyze_periodic_odd, sample_points, EigenvalueFn};
use xyz8v::{ModelParams, Twist};

fn cc(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

fn close(a: C64, b: C64, tol: f64) -> bool {
    (a - b).norm() < tol * a.norm().max(b.norm()).max(1.0)
}

fn twisted() -> Vec<Twist> {
    Twist::ALL.into_iter().filter(|t| !t.is_periodic()).collect()
}

#[test]
fn homogeneous_equation_two_sites_every_twist() {
    for tw in twisted() {
        let p = ModelParams::canonical(2, tw, 3);
        let o = dense_spectrum(&p, 3).unwrap();
        let r = analyze_homogeneous(&p, &o, 3).unwrap();
        for cl in &r.claims {
            assert!(cl.passed, "{} twist={tw}: {:e}", cl.label, cl.residual);
        }
        assert_eq!((r.found, r.expected), (4, 4), "twist {tw}");
        // Bethe eigenvalues rebuilt from Q alone sum to the trace
        for l in [cc(0.31, 0.17), cc(-0.77, -0.05)] {
            let sum: C64 = r.solutions.iter().map(|s| bethe_eigenvalue(&p, &s.q, l, s.branch_h)).sum();
            let tr = transfer_8v(&p, l).trace();
            assert!(close(sum, tr, 1e-8), "twist={tw} λ={l}: {sum} vs {tr}");
        }
        let mut idx: Vec<_> = r.solutions.iter().map(|s| s.eigen_index.unwrap()).collect();
        idx.sort();
        assert_eq!(idx, vec![0, 1, 2, 3]);
    }
}

#[test]
fn homogeneous_equation_is_rejected_for_the_periodic_chain() {
    let p = ModelParams::canonical(3, Twist::PERIODIC, 1);
    let o = dense_spectrum(&p, 1).unwrap();
    assert!(analyze_homogeneous(&p, &o, 1).is_err());
}

#[test]
fn inhomogeneous_two_sites_twisted() {
    for tw in twisted() {
        let p = ModelParams::canonical(2, tw, 7);
        let o = dense_spectrum(&p, 7).unwrap();
        let r = analyze_inhomogeneous(&p, &o, &InhomTQData::FIXTURE, None, 7).unwrap();
        for cl in &r.claims {
            assert!(cl.passed, "{} twist={tw}: {:e}", cl.label, cl.residual);
        }
        assert_eq!((r.found, r.expected), (4, 4), "twist {tw}");
        // the equation holds with t taken from the oracle eigenspace directly
        for s in &r.solutions {
            let e = &o.clusters[s.eigen_index.unwrap()];
            for l in sample_points(70, 4) {
                let (res, scale, _) = tq_residual_inhomogeneous(&p, e.eval(&p, l), &s.q, &InhomTQData::FIXTURE, l);
                assert!(res.norm() < 1e-8 * scale, "twist={tw}");
            }
        }
    }
}

#[test]
fn inhomogeneous_periodic_odd() {
    for n in [1, 3] {
        let p = ModelParams::canonical(n, Twist::PERIODIC, 12);
        let o = dense_spectrum(&p, 12).unwrap();
        let a = analyze_periodic_odd(&p, &o, 12).unwrap();
        let r = analyze_inhomogeneous(&p, &o, &InhomTQData::FIXTURE, Some(&a.similarities), 12).unwrap();
        for cl in &r.claims {
            assert!(cl.passed, "{} N={n}: {:e}", cl.label, cl.residual);
        }
        assert!(r.claims.iter().any(|c| c.label == "inhom-eps-span"));
        assert_eq!(r.expected, 1 << (n - 1));
        assert_eq!(r.found, r.expected, "N={n}");
        let l = cc(0.25, -0.14);
        let sum: C64 = r.solutions.iter().map(|s| s.eigenvalue.eval(&p, l) * 2.0).sum();
        assert!(close(sum, transfer_8v(&p, l).trace(), 1e-8), "N={n}");
    }
}

#[test]
fn periodic_inhomogeneous_needs_similarities() {
    let p = ModelParams::canonical(3, Twist::PERIODIC, 12);
    let o = dense_spectrum(&p, 12).unwrap();
    assert!(analyze_inhomogeneous(&p, &o, &InhomTQData::FIXTURE, None, 12).is_err());
}

#[test]
fn gauge_data_validation() {
    let p = ModelParams::canonical(2, Twist::new(1, 0).unwrap(), 7);
    assert!(InhomTQData { beta: cc(1.0, 0.0), mu: cc(0.93, 0.4) }.validate(&p).is_err());
    assert!(InhomTQData { beta: cc(1.0, 0.5), mu: p.xi[0] }.validate(&p).is_err());
    assert!(InhomTQData::FIXTURE.validate(&p).is_ok());
}

#[test]
fn beta_rescaling_keeps_solutions() {
    let p = ModelParams::canonical(2, Twist::new(0, 1).unwrap(), 7);
    let o = dense_spectrum(&p, 7).unwrap();
    let t = EigenvalueFn::new(o.clusters[0].nodes.clone());
    let r = beta_scaling_residual(&p, &t, &InhomTQData::FIXTURE, 7).expect("both gauges solve");
    assert!(r < 1e-8, "{r:e}");
}

#[test]
fn theta_x_normalization_constant() {
    for tw in twisted() {
        let p = ModelParams::canonical(2, tw, 1);
        assert!(c_x_identity_residual(&p, &sample_points(1, 6)).unwrap() < 1e-12);
    }
    assert!(c_x(&ModelParams::canonical(1, Twist::PERIODIC, 1)).is_err());
}
