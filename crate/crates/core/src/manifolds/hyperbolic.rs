use nalgebra::DVector;
use rand::RngCore;
use rand_distr::{Distribution, StandardNormal};

use crate::geometry::{CurvatureBounds, Manifold, Point, Result};

/// Hyperbolic space `H^n` in the Lorentz (hyperboloid) model.
///
/// Points live on `{x in R^(n+1) : <x, x>_M = -1, x_n > 0}` where the last
/// coordinate is the time-like one and
/// `<x, y>_M = sum_{i<n} x_i y_i - x_n y_n`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Hyperbolic {
    n: usize,
}

impl Hyperbolic {
    pub fn new(n: usize) -> Self {
        Hyperbolic { n }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    /// The Minkowski bilinear form.
    pub fn minkowski(u: &DVector<f64>, v: &DVector<f64>) -> f64 {
        let n = u.len() - 1;
        u.rows(0, n).dot(&v.rows(0, n)) - u[n] * v[n]
    }

    /// Lift spatial coordinates onto the upper sheet.
    pub fn lift(spatial: &[f64]) -> Point {
        let s2: f64 = spatial.iter().map(|s| s * s).sum();
        let mut x = DVector::zeros(spatial.len() + 1);
        x.rows_mut(0, spatial.len()).copy_from_slice(spatial);
        x[spatial.len()] = (1.0 + s2).sqrt();
        x
    }
}

impl Manifold for Hyperbolic {
    fn name(&self) -> String {
        format!("hyperbolic({})", self.n)
    }

    fn ambient_dim(&self) -> usize {
        self.n + 1
    }

    fn intrinsic_dim(&self) -> usize {
        self.n
    }

    fn curvature(&self) -> CurvatureBounds {
        CurvatureBounds {
            kappa: -1.0,
            upper: -1.0,
        }
    }

    fn inner(&self, _x: &Point, u: &DVector<f64>, v: &DVector<f64>) -> f64 {
        Self::minkowski(u, v)
    }

    fn exp(&self, x: &Point, v: &DVector<f64>) -> Point {
        let t = Self::minkowski(v, v).max(0.0).sqrt();
        if t < 1e-300 {
            return x.clone();
        }
        let y = x * t.cosh() + v * (t.sinh() / t);
        self.project_point(&y)
    }

    fn log(&self, x: &Point, y: &Point) -> Result<DVector<f64>> {
        let alpha = (-Self::minkowski(x, y)).max(1.0);
        let u = y - x * alpha;
        let s = Self::minkowski(&u, &u).max(0.0).sqrt();
        if s < 1e-300 {
            return Ok(DVector::zeros(x.len()));
        }
        Ok(u * (self.dist(x, y) / s))
    }

    fn dist(&self, x: &Point, y: &Point) -> f64 {
        // 2 asinh(|x - y|_M / 2) avoids the cancellation in arccosh near 1.
        let diff = x - y;
        let q = Self::minkowski(&diff, &diff).max(0.0);
        2.0 * (q.sqrt() / 2.0).asinh()
    }

    fn transport(&self, x: &Point, y: &Point, v: &DVector<f64>) -> Result<DVector<f64>> {
        let alpha = -Self::minkowski(x, y);
        let w = v + (x + y) * (Self::minkowski(y, v) / (1.0 + alpha));
        Ok(self.project_tangent(y, &w))
    }

    fn project_point(&self, x: &Point) -> Point {
        Self::lift(&x.as_slice()[..self.n])
    }

    fn project_tangent(&self, x: &Point, v: &DVector<f64>) -> DVector<f64> {
        v + x * Self::minkowski(x, v)
    }

    fn point_residual(&self, x: &Point) -> f64 {
        let r = (Self::minkowski(x, x) + 1.0).abs();
        if x[self.n] > 0.0 {
            r
        } else {
            f64::INFINITY
        }
    }

    fn tangent_residual(&self, x: &Point, v: &DVector<f64>) -> f64 {
        Self::minkowski(x, v).abs()
    }

    fn origin(&self) -> Point {
        let mut e = DVector::zeros(self.n + 1);
        e[self.n] = 1.0;
        e
    }

    fn sample_point(&self, rng: &mut dyn RngCore) -> Point {
        let spatial: Vec<f64> = (0..self.n)
            .map(|_| StandardNormal.sample(&mut *rng))
            .collect();
        let v = DVector::from_fn(self.n + 1, |i, _| if i < self.n { spatial[i] } else { 0.0 });
        self.exp(&self.origin(), &v)
    }
}
