use std::f64::consts::FRAC_PI_2;

use riemopt::manifolds::{Euclidean, Hyperbolic, Spd, Sphere};
use riemopt::verify::{isometry_suite, roundtrip_suite, triangle_comparison_suite};
use riemopt::Manifold;

fn all_suites(m: &dyn Manifold, diam: f64, n: usize) -> f64 {
    let t = triangle_comparison_suite(m, n, diam, 11).unwrap();
    let r = roundtrip_suite(m, n, diam, 12).unwrap();
    let i = isometry_suite(m, n, diam, 13).unwrap();
    assert_eq!(t.samples + r.samples + i.samples, 3 * n);
    eprintln!(
        "{}: triangles {:.2e} roundtrip {:.2e} isometry {:.2e}",
        m.name(),
        t.max_violation,
        r.max_violation,
        i.max_violation
    );
    t.max_violation.max(r.max_violation).max(i.max_violation)
}

#[test]
fn euclidean_suites() {
    assert!(all_suites(&Euclidean::new(5), 4.0, 300) < 1e-10);
}

#[test]
fn sphere_suites() {
    assert!(all_suites(&Sphere::new(4), FRAC_PI_2 - 0.1, 300) <= 1e-8);
}

#[test]
fn hyperbolic_suites() {
    assert!(all_suites(&Hyperbolic::new(5), 2.0, 300) <= 1e-8);
}

#[test]
fn spd_suites() {
    assert!(all_suites(&Spd::new(3), 2.0, 300) <= 1e-8);
}
