use nalgebra::DVector;
use rand::RngCore;
use rand_distr::{Distribution, StandardNormal};

use crate::geometry::{CurvatureBounds, GeomError, Manifold, Point, Result};

/// Points with `<x, y>` at or below this value are treated as antipodal.
const ANTIPODAL_GUARD: f64 = -1.0 + 1e-10;

/// Unit sphere `S^n` embedded in `R^(n+1)` with the induced metric.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Sphere {
    n: usize,
}

impl Sphere {
    pub fn new(n: usize) -> Self {
        Sphere { n }
    }

    pub fn dim(&self) -> usize {
        self.n
    }
}

impl Manifold for Sphere {
    fn name(&self) -> String {
        format!("sphere({})", self.n)
    }

    fn ambient_dim(&self) -> usize {
        self.n + 1
    }

    fn intrinsic_dim(&self) -> usize {
        self.n
    }

    fn curvature(&self) -> CurvatureBounds {
        CurvatureBounds {
            kappa: 1.0,
            upper: 1.0,
        }
    }

    fn inner(&self, _x: &Point, u: &DVector<f64>, v: &DVector<f64>) -> f64 {
        u.dot(v)
    }

    fn exp(&self, x: &Point, v: &DVector<f64>) -> Point {
        let t = v.norm();
        if t < 1e-300 {
            return x.clone();
        }
        let y = x * t.cos() + v * (t.sin() / t);
        self.project_point(&y)
    }

    fn log(&self, x: &Point, y: &Point) -> Result<DVector<f64>> {
        let c = x.dot(y);
        if c <= ANTIPODAL_GUARD {
            return Err(GeomError::Domain(
                "points are antipodal on the sphere; log is undefined".into(),
            ));
        }
        let u = y - x * c;
        let s = u.norm();
        if s < 1e-300 {
            return Ok(DVector::zeros(x.len()));
        }
        let theta = s.atan2(c);
        Ok(u * (theta / s))
    }

    fn dist(&self, x: &Point, y: &Point) -> f64 {
        let c = x.dot(y);
        (y - x * c).norm().atan2(c)
    }

    fn transport(&self, x: &Point, y: &Point, v: &DVector<f64>) -> Result<DVector<f64>> {
        let c = x.dot(y);
        if c <= ANTIPODAL_GUARD {
            return Err(GeomError::Domain(
                "points are antipodal on the sphere; transport is undefined".into(),
            ));
        }
        let w = v - (x + y) * (y.dot(v) / (1.0 + c));
        Ok(self.project_tangent(y, &w))
    }

    fn project_point(&self, x: &Point) -> Point {
        x / x.norm()
    }

    fn project_tangent(&self, x: &Point, v: &DVector<f64>) -> DVector<f64> {
        v - x * x.dot(v)
    }

    fn point_residual(&self, x: &Point) -> f64 {
        (x.norm() - 1.0).abs()
    }

    fn tangent_residual(&self, x: &Point, v: &DVector<f64>) -> f64 {
        x.dot(v).abs()
    }

    fn origin(&self) -> Point {
        let mut e = DVector::zeros(self.n + 1);
        e[0] = 1.0;
        e
    }

    fn sample_point(&self, rng: &mut dyn RngCore) -> Point {
        loop {
            let g: DVector<f64> =
                DVector::from_fn(self.n + 1, |_, _| StandardNormal.sample(&mut *rng));
            let n = g.norm();
            if n > 1e-8 {
                return g / n;
            }
        }
    }
}
