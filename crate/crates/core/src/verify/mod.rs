//! Numerical oracles that check the library against itself: finite
//! differences, comparison inequalities, round trips, holonomy and the
//! distortion recursion of the corrected optimistic method.

use nalgebra::DVector;
use serde::Serialize;
use serde_json::{json, Value};

use crate::geometry::{sigma_constant, zeta_constant, GeomError, Manifold, Point, Result};
use crate::manifolds::sample_in_ball;
use crate::rng::SeedTree;

/// Maximum of a violation measure over `samples` evaluations, with the
/// inputs that produced it.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProbeReport {
    pub max_violation: f64,
    pub samples: usize,
    pub worst_case: Value,
}

impl ProbeReport {
    fn empty() -> Self {
        ProbeReport {
            max_violation: 0.0,
            samples: 0,
            worst_case: Value::Null,
        }
    }

    fn record(&mut self, violation: f64, case: impl FnOnce() -> Value) {
        self.samples += 1;
        let v = if violation.is_nan() {
            f64::INFINITY
        } else {
            violation
        };
        if v > self.max_violation || self.worst_case.is_null() {
            self.max_violation = self.max_violation.max(v);
            self.worst_case = case();
        }
    }

    /// Combines two reports taken over disjoint samples.
    pub fn merge(mut self, other: ProbeReport) -> ProbeReport {
        self.samples += other.samples;
        if other.max_violation > self.max_violation || self.worst_case.is_null() {
            self.max_violation = other.max_violation;
            self.worst_case = other.worst_case;
        }
        self
    }
}

fn vec_json(v: &DVector<f64>) -> Value {
    json!(v.as_slice())
}

/// Compares `<grad, v>` with the central difference
/// `(f(exp_x(h v)) - f(exp_x(-h v))) / (2h)` along `n_dirs` random unit
/// tangents.
///
/// The error is relative to `max(|grad|, |fd|)`, so directions nearly
/// orthogonal to the gradient are not amplified.
pub fn fd_gradient_check<M, F>(
    m: &M,
    f: F,
    grad: &DVector<f64>,
    x: &Point,
    n_dirs: usize,
    h: f64,
    seed: u64,
) -> Result<ProbeReport>
where
    M: Manifold + ?Sized,
    F: Fn(&Point) -> f64,
{
    if !(h > 0.0) {
        return Err(GeomError::InvalidParameter(format!(
            "step {h} must be positive"
        )));
    }
    let gnorm = m.norm(x, grad);
    let mut report = ProbeReport::empty();
    for i in 0..n_dirs {
        let mut rng = SeedTree::new(seed).named("fd").child(i as u64).rng();
        let v = m.sample_unit_tangent(x, &mut rng);
        let analytic = m.inner(x, grad, &v);
        let numeric = (f(&m.exp(x, &(&v * h))) - f(&m.exp(x, &(&v * -h)))) / (2.0 * h);
        let scale = gnorm.max(numeric.abs()).max(f64::MIN_POSITIVE);
        let err = (analytic - numeric).abs() / scale;
        report.record(
            err,
            || json!({ "direction": vec_json(&v), "analytic": analytic, "numeric": numeric }),
        );
    }
    Ok(report)
}

fn triangle<M: Manifold + ?Sized>(m: &M, max_diam: f64, seed: SeedTree) -> (Point, Point, Point) {
    let mut rng = seed.rng();
    let center = m.sample_point(&mut rng);
    let r = max_diam / 2.0;
    let a = sample_in_ball(m, &center, r, &mut rng);
    let b = sample_in_ball(m, &center, r, &mut rng);
    let c = sample_in_ball(m, &center, r, &mut rng);
    (a, b, c)
}

fn check_diameter<M: Manifold + ?Sized>(m: &M, max_diam: f64) -> Result<()> {
    if !(max_diam > 0.0) {
        return Err(GeomError::InvalidParameter(format!(
            "diameter {max_diam} must be positive"
        )));
    }
    let cap = m.curvature().diameter_cap();
    if max_diam >= cap {
        return Err(GeomError::Domain(format!(
            "diameter {max_diam} is not below the curvature cap {cap}"
        )));
    }
    Ok(())
}

/// Checks, on random triangles of diameter below `max_diam`,
///
/// ```text
/// 2<log_A C, log_A B> <= d(A,B)^2 + zeta(kappa, d(A,B)) d(A,C)^2 - d(B,C)^2
/// 2<log_A C, log_A B> >= d(A,B)^2 + sigma(K, D) d(A,C)^2 - d(B,C)^2
/// ```
///
/// with `D` the longest side of the triangle.
/// The violation is the amount by which either side fails, relative to
/// `max(1, d(A,B)^2 + d(A,C)^2)`.
pub fn triangle_comparison_suite<M: Manifold + ?Sized>(
    m: &M,
    n_triangles: usize,
    max_diam: f64,
    seed: u64,
) -> Result<ProbeReport> {
    check_diameter(m, max_diam)?;
    let curv = m.curvature();
    let root = SeedTree::new(seed).named("triangles");
    let mut report = ProbeReport::empty();
    for i in 0..n_triangles {
        let (a, b, c) = triangle(m, max_diam, root.child(i as u64));
        let lb = m.log(&a, &b)?;
        let lc = m.log(&a, &c)?;
        let ab = m.dist(&a, &b);
        let ac = m.dist(&a, &c);
        let bc = m.dist(&b, &c);
        let lhs = 2.0 * m.inner(&a, &lc, &lb);
        let zeta = zeta_constant(curv.kappa, ab);
        let sigma = sigma_constant(curv.upper, ab.max(ac).max(bc))?;
        let upper = ab * ab + zeta * ac * ac - bc * bc;
        let lower = ab * ab + sigma * ac * ac - bc * bc;
        let scale = (ab * ab + ac * ac).max(1.0);
        let v = ((lhs - upper).max(lower - lhs)).max(0.0) / scale;
        report.record(v, || {
            json!({ "a": vec_json(&a), "b": vec_json(&b), "c": vec_json(&c),
                    "lhs": lhs, "zeta_side": upper, "sigma_side": lower })
        });
    }
    Ok(report)
}

/// `exp_x(log_x y) = y` and `log_x(exp_x v) = v` on random pairs within
/// `max_diam`, measured by geodesic distance and tangent norm.
pub fn roundtrip_suite<M: Manifold + ?Sized>(
    m: &M,
    n: usize,
    max_diam: f64,
    seed: u64,
) -> Result<ProbeReport> {
    check_diameter(m, max_diam)?;
    let root = SeedTree::new(seed).named("roundtrip");
    let mut report = ProbeReport::empty();
    for i in 0..n {
        let (x, y, _) = triangle(m, max_diam, root.child(i as u64));
        let v = m.log(&x, &y)?;
        let back = m.exp(&x, &v);
        let e1 = m.dist(&back, &y) / m.dist(&x, &y).max(1.0);
        let w = m.log(&x, &m.exp(&x, &v))?;
        let e2 = m.norm(&x, &(&w - &v)) / m.norm(&x, &v).max(1.0);
        let pr = m.point_residual(&back);
        report.record(
            e1.max(e2).max(pr),
            || json!({ "x": vec_json(&x), "y": vec_json(&y) }),
        );
    }
    Ok(report)
}

/// Parallel transport preserves inner products and `|log_x y| = d(x, y)`.
pub fn isometry_suite<M: Manifold + ?Sized>(
    m: &M,
    n: usize,
    max_diam: f64,
    seed: u64,
) -> Result<ProbeReport> {
    check_diameter(m, max_diam)?;
    let root = SeedTree::new(seed).named("isometry");
    let mut report = ProbeReport::empty();
    for i in 0..n {
        let s = root.child(i as u64);
        let (x, y, _) = triangle(m, max_diam, s);
        let mut rng = s.named("tangents").rng();
        let u = m.sample_unit_tangent(&x, &mut rng);
        let v = m.sample_unit_tangent(&x, &mut rng);
        let tu = m.transport(&x, &y, &u)?;
        let tv = m.transport(&x, &y, &v)?;
        let e_inner = (m.inner(&y, &tu, &tv) - m.inner(&x, &u, &v)).abs();
        let e_norm = (m.norm(&y, &tu) - 1.0).abs();
        let e_tan = m.tangent_residual(&y, &tu);
        let d = m.dist(&x, &y);
        let e_dist = (m.norm(&x, &m.log(&x, &y)?) - d).abs() / d.max(1.0);
        report.record(e_inner.max(e_norm).max(e_tan).max(e_dist), || {
            json!({ "x": vec_json(&x), "y": vec_json(&y), "u": vec_json(&u), "v": vec_json(&v) })
        });
    }
    Ok(report)
}

/// Corners `c0, c1 = exp(c0, a e1), c2 = exp(c1, b Gamma e2), c3 = exp(c0, b e2)`
/// of a geodesic quadrilateral spanned by orthonormal `e1, e2` at `c0`.
pub fn geodesic_rectangle<M: Manifold + ?Sized>(
    m: &M,
    c0: &Point,
    e1: &DVector<f64>,
    e2: &DVector<f64>,
    a: f64,
    b: f64,
) -> Result<[Point; 4]> {
    let c1 = m.exp(c0, &(e1 * a));
    let moved = m.transport(c0, &c1, e2)?;
    let c2 = m.exp(&c1, &(moved * b));
    let c3 = m.exp(c0, &(e2 * b));
    Ok([c0.clone(), c1, c2, c3])
}

/// Transports `z` around `c0 -> c1 -> c2 -> c3 -> c0` along geodesic edges.
///
/// Returns `(defect, bound)` where `defect = |loop(z) - z|` and
/// `bound = 12 K_m |z| l_1 l_2` with `l_1, l_2` the mean lengths of the two
/// pairs of opposite edges.
pub fn holonomy_probe<M: Manifold + ?Sized>(
    m: &M,
    corners: &[Point; 4],
    z: &DVector<f64>,
) -> Result<(f64, f64)> {
    let mut v = z.clone();
    for i in 0..4 {
        v = m.transport(&corners[i], &corners[(i + 1) % 4], &v)?;
    }
    let c0 = &corners[0];
    let defect = m.norm(c0, &(&v - z));
    let len = |i: usize| m.dist(&corners[i], &corners[(i + 1) % 4]);
    let l1 = 0.5 * (len(0) + len(2));
    let l2 = 0.5 * (len(1) + len(3));
    let bound = 12.0 * m.curvature().max_abs() * m.norm(c0, z) * l1 * l2;
    Ok((defect, bound))
}

/// The recursion overflowed.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
#[error("distortion recursion diverged at round {round}")]
pub struct Divergence {
    /// First round whose value is not finite.
    pub round: usize,
    /// `A_1 .. A_{round-1}`.
    pub trace: Vec<f64>,
}

/// Iterates `A_t = K_m (5 eta G + 2 A_{t-1})^2 (3 eta G + A_{t-1})` from
/// `A_0 = 0` and returns `A_1 .. A_T`.
pub fn correction_blowup_trace(
    eta_g: f64,
    k_m: f64,
    t: usize,
) -> std::result::Result<Vec<f64>, Divergence> {
    let mut out = Vec::with_capacity(t);
    let mut a = 0.0;
    for round in 1..=t {
        let s = 5.0 * eta_g + 2.0 * a;
        a = k_m * s * s * (3.0 * eta_g + a);
        if !a.is_finite() {
            return Err(Divergence { round, trace: out });
        }
        out.push(a);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::manifolds::{Euclidean, Hyperbolic, Sphere};
    use nalgebra::dvector;

    #[test]
    fn fd_linear_and_constant() {
        let m = Euclidean::new(3);
        let c = dvector![1.0, -2.0, 0.5];
        let x = dvector![0.3, 0.1, -0.7];
        let r = fd_gradient_check(&m, |p| c.dot(p), &c, &x, 10, 1e-4, 1).unwrap();
        assert!(r.max_violation < 1e-10);
        assert_eq!(r.samples, 10);
        let r = fd_gradient_check(&m, |_| 3.0, &DVector::zeros(3), &x, 10, 1e-4, 1).unwrap();
        assert_eq!(r.max_violation, 0.0);
    }

    #[test]
    fn fd_hyperbolic_half_squared_distance() {
        let m = Hyperbolic::new(4);
        let a = Hyperbolic::lift(&[0.5, -0.2, 0.1, 0.9]);
        let x = Hyperbolic::lift(&[-0.3, 0.4, 0.0, 0.2]);
        let g = -m.log(&x, &a).unwrap();
        let r =
            fd_gradient_check(&m, |p| 0.5 * m.dist(p, &a).powi(2), &g, &x, 20, 1e-4, 2).unwrap();
        assert!(r.max_violation < 1e-5, "{}", r.max_violation);
    }

    #[test]
    fn euclidean_triangles_are_equalities() {
        let r = triangle_comparison_suite(&Euclidean::new(3), 200, 4.0, 3).unwrap();
        assert!(r.max_violation < 1e-10);
        assert_eq!(r.samples, 200);
    }

    #[test]
    fn suites_are_deterministic() {
        let m = Sphere::new(3);
        let a = triangle_comparison_suite(&m, 50, 1.0, 9).unwrap();
        let b = triangle_comparison_suite(&m, 50, 1.0, 9).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn sphere_diameter_cap_enforced() {
        let m = Sphere::new(2);
        assert!(triangle_comparison_suite(&m, 1, 2.0, 0).is_err());
    }

    #[test]
    fn flat_holonomy_vanishes() {
        let m = Euclidean::new(2);
        let c0 = dvector![0.0, 0.0];
        let rect = geodesic_rectangle(&m, &c0, &dvector![1.0, 0.0], &dvector![0.0, 1.0], 0.5, 0.3)
            .unwrap();
        let (d, b) = holonomy_probe(&m, &rect, &dvector![1.0, 2.0]).unwrap();
        assert_eq!(d, 0.0);
        assert_eq!(b, 0.0);
    }

    #[test]
    fn sphere_square_holonomy_is_area() {
        let m = Sphere::new(2);
        let c0 = dvector![1.0, 0.0, 0.0];
        let e1 = dvector![0.0, 1.0, 0.0];
        let e2 = dvector![0.0, 0.0, 1.0];
        let eps = 0.01;
        let rect = geodesic_rectangle(&m, &c0, &e1, &e2, eps, eps).unwrap();
        let (d, b) = holonomy_probe(&m, &rect, &e1).unwrap();
        assert!((d / (eps * eps) - 1.0).abs() < 0.1, "{}", d / (eps * eps));
        assert!(d <= b);
    }

    #[test]
    fn degenerate_rectangle() {
        let m = Sphere::new(2);
        let c0 = dvector![1.0, 0.0, 0.0];
        let rect = geodesic_rectangle(
            &m,
            &c0,
            &dvector![0.0, 1.0, 0.0],
            &dvector![0.0, 0.0, 1.0],
            0.3,
            0.0,
        )
        .unwrap();
        let (d, _) = holonomy_probe(&m, &rect, &dvector![0.0, 0.6, 0.8]).unwrap();
        assert!(d < 1e-10);
    }

    #[test]
    fn blowup_reference_values() {
        let t = correction_blowup_trace(0.1, 1.0, 3).unwrap();
        assert!((t[0] - 0.075).abs() < 1e-15);
        assert!((t[2] - 0.306).abs() < 1e-3);
        let err = correction_blowup_trace(0.1, 1.0, 20).unwrap_err();
        assert!(err.round < 20);
        assert!(err.trace.windows(2).all(|w| w[1] > w[0]));
        assert!(correction_blowup_trace(0.1, 0.0, 30)
            .unwrap()
            .iter()
            .all(|&a| a == 0.0));
    }
}
