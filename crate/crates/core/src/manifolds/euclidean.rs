use nalgebra::DVector;
use rand::RngCore;
use rand_distr::{Distribution, StandardNormal};

use crate::geometry::{CurvatureBounds, Manifold, Point, Result};

/// Flat space `R^n` with the standard inner product.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Euclidean {
    n: usize,
}

impl Euclidean {
    pub fn new(n: usize) -> Self {
        Euclidean { n }
    }

    pub fn dim(&self) -> usize {
        self.n
    }
}

impl Manifold for Euclidean {
    fn name(&self) -> String {
        format!("euclidean({})", self.n)
    }

    fn ambient_dim(&self) -> usize {
        self.n
    }

    fn intrinsic_dim(&self) -> usize {
        self.n
    }

    fn curvature(&self) -> CurvatureBounds {
        CurvatureBounds::flat()
    }

    fn inner(&self, _x: &Point, u: &DVector<f64>, v: &DVector<f64>) -> f64 {
        u.dot(v)
    }

    fn exp(&self, x: &Point, v: &DVector<f64>) -> Point {
        x + v
    }

    fn log(&self, x: &Point, y: &Point) -> Result<DVector<f64>> {
        Ok(y - x)
    }

    fn dist(&self, x: &Point, y: &Point) -> f64 {
        (y - x).norm()
    }

    fn transport(&self, _x: &Point, _y: &Point, v: &DVector<f64>) -> Result<DVector<f64>> {
        Ok(v.clone())
    }

    fn project_point(&self, x: &Point) -> Point {
        x.clone()
    }

    fn project_tangent(&self, _x: &Point, v: &DVector<f64>) -> DVector<f64> {
        v.clone()
    }

    fn point_residual(&self, _x: &Point) -> f64 {
        0.0
    }

    fn tangent_residual(&self, _x: &Point, _v: &DVector<f64>) -> f64 {
        0.0
    }

    fn origin(&self) -> Point {
        DVector::zeros(self.n)
    }

    fn sample_point(&self, rng: &mut dyn RngCore) -> Point {
        DVector::from_fn(self.n, |_, _| StandardNormal.sample(&mut *rng))
    }
}
