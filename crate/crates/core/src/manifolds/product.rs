use std::sync::Arc;

use nalgebra::DVector;
use rand::RngCore;

use crate::geometry::{CurvatureBounds, Manifold, Point, Result};

/// Cartesian product `M_1 x ... x M_k` with the sum metric.
///
/// Coordinates are the concatenation of the factor coordinates in order.
#[derive(Debug, Clone)]
pub struct Product {
    factors: Vec<Arc<dyn Manifold>>,
    offsets: Vec<usize>,
    total: usize,
}

impl Product {
    pub fn new(factors: Vec<Arc<dyn Manifold>>) -> Self {
        let mut offsets = Vec::with_capacity(factors.len());
        let mut total = 0;
        for f in &factors {
            offsets.push(total);
            total += f.ambient_dim();
        }
        Product {
            factors,
            offsets,
            total,
        }
    }

    pub fn factors(&self) -> &[Arc<dyn Manifold>] {
        &self.factors
    }

    pub fn num_factors(&self) -> usize {
        self.factors.len()
    }

    /// Coordinates of factor `i`.
    pub fn part(&self, i: usize, v: &DVector<f64>) -> DVector<f64> {
        v.rows(self.offsets[i], self.factors[i].ambient_dim())
            .into_owned()
    }

    /// Inverse of [`Product::part`] over all factors.
    pub fn join(&self, parts: &[DVector<f64>]) -> DVector<f64> {
        assert_eq!(parts.len(), self.factors.len(), "one part per factor");
        let mut out = DVector::zeros(self.total);
        for (i, p) in parts.iter().enumerate() {
            out.rows_mut(self.offsets[i], p.len()).copy_from(p);
        }
        out
    }

    pub fn split(&self, v: &DVector<f64>) -> Vec<DVector<f64>> {
        (0..self.factors.len()).map(|i| self.part(i, v)).collect()
    }

    fn map_pairs(
        &self,
        a: &DVector<f64>,
        b: &DVector<f64>,
        f: impl Fn(&dyn Manifold, &DVector<f64>, &DVector<f64>) -> DVector<f64>,
    ) -> DVector<f64> {
        let parts: Vec<_> = (0..self.factors.len())
            .map(|i| f(self.factors[i].as_ref(), &self.part(i, a), &self.part(i, b)))
            .collect();
        self.join(&parts)
    }
}

impl Manifold for Product {
    fn name(&self) -> String {
        let names: Vec<_> = self.factors.iter().map(|f| f.name()).collect();
        format!("product({})", names.join(", "))
    }

    fn ambient_dim(&self) -> usize {
        self.total
    }

    fn intrinsic_dim(&self) -> usize {
        self.factors.iter().map(|f| f.intrinsic_dim()).sum()
    }

    /// Mixed planes spanned by vectors from two different factors are flat, so
    /// with more than one factor the bounds always include zero.
    fn curvature(&self) -> CurvatureBounds {
        let mut kappa = f64::INFINITY;
        let mut upper = f64::NEG_INFINITY;
        for f in &self.factors {
            let c = f.curvature();
            kappa = kappa.min(c.kappa);
            upper = upper.max(c.upper);
        }
        if self.factors.len() > 1 {
            kappa = kappa.min(0.0);
            upper = upper.max(0.0);
        }
        CurvatureBounds { kappa, upper }
    }

    fn inner(&self, x: &Point, u: &DVector<f64>, v: &DVector<f64>) -> f64 {
        (0..self.factors.len())
            .map(|i| self.factors[i].inner(&self.part(i, x), &self.part(i, u), &self.part(i, v)))
            .sum()
    }

    fn exp(&self, x: &Point, v: &DVector<f64>) -> Point {
        self.map_pairs(x, v, |m, a, b| m.exp(a, b))
    }

    fn log(&self, x: &Point, y: &Point) -> Result<DVector<f64>> {
        let parts = (0..self.factors.len())
            .map(|i| self.factors[i].log(&self.part(i, x), &self.part(i, y)))
            .collect::<Result<Vec<_>>>()?;
        Ok(self.join(&parts))
    }

    fn dist(&self, x: &Point, y: &Point) -> f64 {
        (0..self.factors.len())
            .map(|i| {
                self.factors[i]
                    .dist(&self.part(i, x), &self.part(i, y))
                    .powi(2)
            })
            .sum::<f64>()
            .sqrt()
    }

    fn transport(&self, x: &Point, y: &Point, v: &DVector<f64>) -> Result<DVector<f64>> {
        let parts = (0..self.factors.len())
            .map(|i| {
                self.factors[i].transport(&self.part(i, x), &self.part(i, y), &self.part(i, v))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(self.join(&parts))
    }

    fn project_point(&self, x: &Point) -> Point {
        let parts: Vec<_> = (0..self.factors.len())
            .map(|i| self.factors[i].project_point(&self.part(i, x)))
            .collect();
        self.join(&parts)
    }

    fn project_tangent(&self, x: &Point, v: &DVector<f64>) -> DVector<f64> {
        self.map_pairs(x, v, |m, a, b| m.project_tangent(a, b))
    }

    fn point_residual(&self, x: &Point) -> f64 {
        (0..self.factors.len())
            .map(|i| self.factors[i].point_residual(&self.part(i, x)))
            .fold(0.0, f64::max)
    }

    fn tangent_residual(&self, x: &Point, v: &DVector<f64>) -> f64 {
        (0..self.factors.len())
            .map(|i| self.factors[i].tangent_residual(&self.part(i, x), &self.part(i, v)))
            .fold(0.0, f64::max)
    }

    fn origin(&self) -> Point {
        let parts: Vec<_> = self.factors.iter().map(|f| f.origin()).collect();
        self.join(&parts)
    }

    fn sample_point(&self, rng: &mut dyn RngCore) -> Point {
        let parts: Vec<_> = self.factors.iter().map(|f| f.sample_point(rng)).collect();
        self.join(&parts)
    }
}
