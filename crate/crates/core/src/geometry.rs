//! Manifold interface, curvature-distortion constants and the weighted
//! Fréchet mean.
//!
//! Every manifold in this crate represents points and tangent vectors as flat
//! coordinate vectors in an ambient space (matrices are stored column-major).
//! The [`Manifold`] trait exposes the closed-form geometry on those raw
//! coordinates; the free functions [`exp_map`], [`log_map`],
//! [`parallel_transport`], [`distance`] and [`inner_product`] wrap it with the
//! base-point and finiteness checks that callers outside the hot loops want.

use std::f64::consts::FRAC_PI_2;
use std::fmt;

use nalgebra::DVector;
use rand::RngCore;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Coordinates of a point in the ambient representation of its manifold.
pub type Point = DVector<f64>;

/// Below this argument the distortion constants switch to their Taylor series.
const SERIES_CUTOFF: f64 = 1e-6;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GeomError {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("non-finite coordinates in {0}")]
    NonFinite(&'static str),
    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },
    #[error("tangent vector is based at a different point")]
    BaseMismatch,
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("Fréchet mean did not converge after {iterations} iterations (residual {residual:e})")]
    NoConvergence {
        iterate: Point,
        residual: f64,
        iterations: usize,
    },
}

pub type Result<T> = std::result::Result<T, GeomError>;

/// A tangent vector together with the point it is attached to.
#[derive(Debug, Clone, PartialEq)]
pub struct TangentVector {
    pub base: Point,
    pub coords: DVector<f64>,
}

impl TangentVector {
    pub fn new(base: Point, coords: DVector<f64>) -> Self {
        TangentVector { base, coords }
    }

    pub fn zero(base: &Point) -> Self {
        TangentVector {
            coords: DVector::zeros(base.len()),
            base: base.clone(),
        }
    }

    pub fn norm<M: Manifold + ?Sized>(&self, m: &M) -> f64 {
        m.norm(&self.base, &self.coords)
    }

    pub fn scaled(&self, s: f64) -> Self {
        TangentVector {
            base: self.base.clone(),
            coords: &self.coords * s,
        }
    }

    pub fn is_finite(&self) -> bool {
        self.coords.iter().all(|c| c.is_finite())
    }

    /// Whether this vector is attached at `x` (coordinate-wise, relative 1e-12).
    pub fn is_based_at(&self, x: &Point) -> bool {
        same_point(&self.base, x)
    }
}

pub(crate) fn same_point(a: &Point, b: &Point) -> bool {
    a.len() == b.len()
        && a.iter()
            .zip(b.iter())
            .all(|(p, q)| (p - q).abs() <= 1e-12 * (1.0 + p.abs().max(q.abs())))
}

/// Sectional-curvature bounds `kappa <= K`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CurvatureBounds {
    pub kappa: f64,
    pub upper: f64,
}

impl CurvatureBounds {
    pub fn new(kappa: f64, upper: f64) -> Result<Self> {
        if !(kappa <= upper) {
            return Err(GeomError::InvalidParameter(format!(
                "curvature lower bound {kappa} exceeds upper bound {upper}"
            )));
        }
        Ok(CurvatureBounds { kappa, upper })
    }

    pub fn flat() -> Self {
        CurvatureBounds {
            kappa: 0.0,
            upper: 0.0,
        }
    }

    /// `max(|kappa|, |K|)`.
    pub fn max_abs(&self) -> f64 {
        self.kappa.abs().max(self.upper.abs())
    }

    /// Largest diameter for which the comparison constants stay finite.
    pub fn diameter_cap(&self) -> f64 {
        if self.upper > 0.0 {
            FRAC_PI_2 / self.upper.sqrt()
        } else {
            f64::INFINITY
        }
    }
}

/// Diameter bound together with the distortion constants it induces.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GeometryParams {
    pub diameter: f64,
    pub sigma: f64,
    pub zeta: f64,
}

impl GeometryParams {
    pub fn new(curv: CurvatureBounds, diameter: f64) -> Result<Self> {
        if !(diameter >= 0.0) {
            return Err(GeomError::InvalidParameter(format!(
                "diameter must be non-negative, got {diameter}"
            )));
        }
        Ok(GeometryParams {
            diameter,
            sigma: sigma_constant(curv.upper, diameter)?,
            zeta: zeta_constant(curv.kappa, diameter),
        })
    }
}

/// Minimum distortion rate `sqrt(K) D / tan(sqrt(K) D)` for `K > 0`, else 1.
pub fn sigma_constant(upper: f64, diameter: f64) -> Result<f64> {
    if upper <= 0.0 {
        return Ok(1.0);
    }
    let x = upper.sqrt() * diameter;
    if x >= FRAC_PI_2 {
        return Err(GeomError::Domain(format!(
            "sqrt(K)*D = {x} must stay below pi/2"
        )));
    }
    if x < SERIES_CUTOFF {
        let x2 = x * x;
        return Ok(1.0 - x2 / 3.0 - x2 * x2 / 45.0);
    }
    Ok(x / x.tan())
}

/// Maximum distortion rate `sqrt(-kappa) D / tanh(sqrt(-kappa) D)` for
/// `kappa < 0`, else 1.
pub fn zeta_constant(kappa: f64, diameter: f64) -> f64 {
    if kappa >= 0.0 {
        return 1.0;
    }
    let x = (-kappa).sqrt() * diameter.abs();
    if x < SERIES_CUTOFF {
        let x2 = x * x;
        return 1.0 + x2 / 3.0 - x2 * x2 / 45.0;
    }
    x / x.tanh()
}

/// Closed-form Riemannian geometry on ambient coordinates.
///
/// Implementations assume their inputs already satisfy the membership
/// constraints; `exp` and `transport` re-project their outputs so long runs do
/// not drift off the manifold.
pub trait Manifold: Send + Sync + fmt::Debug {
    fn name(&self) -> String;

    /// Length of the coordinate vectors used for points and tangents.
    fn ambient_dim(&self) -> usize;

    /// Dimension of the manifold itself.
    fn intrinsic_dim(&self) -> usize;

    fn curvature(&self) -> CurvatureBounds;

    fn inner(&self, x: &Point, u: &DVector<f64>, v: &DVector<f64>) -> f64;

    fn norm(&self, x: &Point, v: &DVector<f64>) -> f64 {
        self.inner(x, v, v).max(0.0).sqrt()
    }

    fn exp(&self, x: &Point, v: &DVector<f64>) -> Point;

    fn log(&self, x: &Point, y: &Point) -> Result<DVector<f64>>;

    fn dist(&self, x: &Point, y: &Point) -> f64;

    /// Parallel transport of `v` from `x` to `y` along the minimizing geodesic.
    fn transport(&self, x: &Point, y: &Point, v: &DVector<f64>) -> Result<DVector<f64>>;

    fn project_point(&self, x: &Point) -> Point;

    fn project_tangent(&self, x: &Point, v: &DVector<f64>) -> DVector<f64>;

    /// Residual of the membership equation; zero on the manifold.
    fn point_residual(&self, x: &Point) -> f64;

    /// Residual of the tangent-space equation at `x`.
    fn tangent_residual(&self, x: &Point, v: &DVector<f64>) -> f64;

    /// A canonical base point (identity, north pole, hyperboloid apex, ...).
    fn origin(&self) -> Point;

    /// A point drawn from the manifold's default sampling distribution.
    fn sample_point(&self, rng: &mut dyn RngCore) -> Point;

    /// A tangent vector at `x` of unit metric norm, uniformly oriented.
    fn sample_unit_tangent(&self, x: &Point, rng: &mut dyn RngCore) -> DVector<f64> {
        loop {
            let raw = DVector::from_fn(self.ambient_dim(), |_, _| StandardNormal.sample(&mut *rng));
            let v = self.project_tangent(x, &raw);
            let n = self.norm(x, &v);
            if n > 1e-8 {
                return v / n;
            }
        }
    }
}

fn check_len<M: Manifold + ?Sized>(m: &M, v: &DVector<f64>) -> Result<()> {
    if v.len() != m.ambient_dim() {
        return Err(GeomError::Dimension {
            expected: m.ambient_dim(),
            got: v.len(),
        });
    }
    Ok(())
}

fn check_finite(v: &DVector<f64>, what: &'static str) -> Result<()> {
    if v.iter().all(|c| c.is_finite()) {
        Ok(())
    } else {
        Err(GeomError::NonFinite(what))
    }
}

/// Endpoint of the geodesic leaving `x` with velocity `v`.
pub fn exp_map<M: Manifold + ?Sized>(m: &M, x: &Point, v: &TangentVector) -> Result<Point> {
    check_len(m, x)?;
    check_len(m, &v.coords)?;
    if !v.is_based_at(x) {
        return Err(GeomError::BaseMismatch);
    }
    check_finite(&v.coords, "tangent vector")?;
    Ok(m.exp(x, &v.coords))
}

/// Inverse of [`exp_map`] within the injectivity domain of `x`.
pub fn log_map<M: Manifold + ?Sized>(m: &M, x: &Point, y: &Point) -> Result<TangentVector> {
    check_len(m, x)?;
    check_len(m, y)?;
    check_finite(y, "point")?;
    Ok(TangentVector::new(x.clone(), m.log(x, y)?))
}

pub fn parallel_transport<M: Manifold + ?Sized>(
    m: &M,
    x: &Point,
    y: &Point,
    v: &TangentVector,
) -> Result<TangentVector> {
    check_len(m, x)?;
    check_len(m, y)?;
    if !v.is_based_at(x) {
        return Err(GeomError::BaseMismatch);
    }
    check_finite(&v.coords, "tangent vector")?;
    Ok(TangentVector::new(y.clone(), m.transport(x, y, &v.coords)?))
}

pub fn distance<M: Manifold + ?Sized>(m: &M, x: &Point, y: &Point) -> f64 {
    m.dist(x, y)
}

pub fn inner_product<M: Manifold + ?Sized>(
    m: &M,
    x: &Point,
    u: &TangentVector,
    v: &TangentVector,
) -> Result<f64> {
    if !u.is_based_at(x) || !v.is_based_at(x) {
        return Err(GeomError::BaseMismatch);
    }
    Ok(m.inner(x, &u.coords, &v.coords))
}

/// Stopping rule for [`weighted_frechet_mean`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FrechetOptions {
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for FrechetOptions {
    fn default() -> Self {
        FrechetOptions {
            tol: 1e-9,
            max_iter: 200,
        }
    }
}

/// Minimizer of `sum_i w_i d^2(x, p_i)` by the Karcher fixed-point iteration
/// `x <- exp_x(sum_i w_i log_x(p_i))`.
///
/// Converged when the metric norm of `sum_i w_i log_x(p_i)` is at most `tol`.
pub fn weighted_frechet_mean<M: Manifold + ?Sized>(
    m: &M,
    points: &[Point],
    weights: &[f64],
    opts: FrechetOptions,
) -> Result<Point> {
    if points.is_empty() {
        return Err(GeomError::InvalidParameter("no points to average".into()));
    }
    if points.len() != weights.len() {
        return Err(GeomError::InvalidParameter(format!(
            "{} points but {} weights",
            points.len(),
            weights.len()
        )));
    }
    if weights.iter().any(|w| !(*w >= 0.0)) {
        return Err(GeomError::InvalidParameter(
            "weights must be non-negative".into(),
        ));
    }
    let total: f64 = weights.iter().sum();
    if (total - 1.0).abs() > 1e-9 {
        return Err(GeomError::InvalidParameter(format!(
            "weights sum to {total}, expected 1"
        )));
    }

    let start = weights
        .iter()
        .enumerate()
        .fold(0, |best, (i, w)| if *w > weights[best] { i } else { best });
    let mut x = points[start].clone();
    let mut residual = f64::INFINITY;
    for iter in 0..=opts.max_iter {
        let mut step = DVector::zeros(x.len());
        for (p, &w) in points.iter().zip(weights) {
            if w > 0.0 {
                step += m.log(&x, p)? * w;
            }
        }
        residual = m.norm(&x, &step);
        if residual <= opts.tol {
            return Ok(x);
        }
        if iter == opts.max_iter {
            break;
        }
        x = m.exp(&x, &step);
    }
    Err(GeomError::NoConvergence {
        iterate: x,
        residual,
        iterations: opts.max_iter,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use std::f64::consts::PI;

    #[test]
    fn sigma_examples() {
        assert_eq!(sigma_constant(0.0, 5.0).unwrap(), 1.0);
        assert_eq!(sigma_constant(-1.0, 5.0).unwrap(), 1.0);
        assert_relative_eq!(
            sigma_constant(1.0, PI / 4.0).unwrap(),
            PI / 4.0,
            epsilon = 1e-15
        );
        // 2*0.5 / tan(1)
        assert_relative_eq!(
            sigma_constant(4.0, 0.5).unwrap(),
            0.642_092_615_934_330_7,
            epsilon = 1e-12
        );
    }

    #[test]
    fn sigma_rejects_large_diameter() {
        assert!(matches!(
            sigma_constant(1.0, FRAC_PI_2),
            Err(GeomError::Domain(_))
        ));
        assert!(sigma_constant(4.0, 1.0).is_err());
    }

    #[test]
    fn zeta_examples() {
        assert_eq!(zeta_constant(0.5, 2.0), 1.0);
        assert_eq!(zeta_constant(0.0, 2.0), 1.0);
        assert_relative_eq!(zeta_constant(-1.0, 1e-9), 1.0, epsilon = 1e-15);
        assert_relative_eq!(zeta_constant(-1.0, 0.0), 1.0);
        assert_relative_eq!(
            zeta_constant(-1.0, 1.0),
            1.313_035_285_499_331_3,
            epsilon = 1e-12
        );
    }

    #[test]
    fn constants_continuous_across_series_cutoff() {
        for &x in &[0.999e-6, 1.001e-6] {
            let s = sigma_constant(1.0, x).unwrap();
            let z = zeta_constant(-1.0, x);
            assert_relative_eq!(s, 1.0 - x * x / 3.0, epsilon = 1e-15);
            assert_relative_eq!(z, 1.0 + x * x / 3.0, epsilon = 1e-15);
        }
        // continuity in K at 0
        assert_relative_eq!(sigma_constant(1e-14, 1.0).unwrap(), 1.0, epsilon = 1e-13);
        assert_relative_eq!(zeta_constant(-1e-14, 1.0), 1.0, epsilon = 1e-13);
    }

    #[test]
    fn curvature_bounds_validate() {
        assert!(CurvatureBounds::new(1.0, 0.0).is_err());
        let c = CurvatureBounds::new(-0.5, 0.0).unwrap();
        assert_eq!(c.max_abs(), 0.5);
        assert!(c.diameter_cap().is_infinite());
        let p = GeometryParams::new(CurvatureBounds::new(-1.0, -1.0).unwrap(), 1.0).unwrap();
        assert_eq!(p.sigma, 1.0);
        assert!(p.zeta > 1.0);
    }
}
