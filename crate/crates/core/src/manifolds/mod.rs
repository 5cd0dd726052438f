//! Concrete manifolds with closed-form geometry.

mod euclidean;
mod hyperbolic;
mod product;
mod spd;
mod sphere;

use std::sync::Arc;

use rand::Rng;
use serde::{Deserialize, Serialize};

pub use euclidean::Euclidean;
pub use hyperbolic::Hyperbolic;
pub use product::Product;
pub use spd::Spd;
pub use sphere::Sphere;

use crate::geometry::{GeomError, Manifold, Point, Result, TangentVector};
use crate::rng::SeedTree;

/// Serializable description of a manifold.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ManifoldSpec {
    Euclidean { n: usize },
    Sphere { n: usize },
    Hyperbolic { n: usize },
    Spd { d: usize },
    Product { factors: Vec<ManifoldSpec> },
}

pub fn make_manifold(spec: &ManifoldSpec) -> Result<Arc<dyn Manifold>> {
    let positive = |n: usize, what: &str| {
        if n == 0 {
            Err(GeomError::InvalidParameter(format!(
                "{what} must be at least 1"
            )))
        } else {
            Ok(n)
        }
    };
    Ok(match spec {
        ManifoldSpec::Euclidean { n } => Arc::new(Euclidean::new(positive(*n, "dimension")?)),
        ManifoldSpec::Sphere { n } => Arc::new(Sphere::new(positive(*n, "dimension")?)),
        ManifoldSpec::Hyperbolic { n } => Arc::new(Hyperbolic::new(positive(*n, "dimension")?)),
        ManifoldSpec::Spd { d } => Arc::new(Spd::new(positive(*d, "matrix size")?)),
        ManifoldSpec::Product { factors } => {
            if factors.is_empty() {
                return Err(GeomError::InvalidParameter(
                    "product needs at least one factor".into(),
                ));
            }
            let fs = factors
                .iter()
                .map(make_manifold)
                .collect::<Result<Vec<_>>>()?;
            Arc::new(Product::new(fs))
        }
    })
}

/// Draws a point inside the geodesic ball `B(center, radius)`.
///
/// The direction is uniform and the radius is `radius * U^(1/n)` with `n`
/// the intrinsic dimension.
pub fn sample_in_ball<M: Manifold + ?Sized, R: Rng>(
    m: &M,
    center: &Point,
    radius: f64,
    rng: &mut R,
) -> Point {
    let dir = m.sample_unit_tangent(center, rng);
    let u: f64 = rng.random();
    let r = radius * u.powf(1.0 / m.intrinsic_dim().max(1) as f64);
    m.exp(center, &(dir * r))
}

/// Deterministic point for `seed`; inside `B(center, radius)` when both are
/// given, otherwise from the manifold's default distribution.
pub fn random_point<M: Manifold + ?Sized>(
    m: &M,
    seed: u64,
    center: Option<&Point>,
    radius: Option<f64>,
) -> Result<Point> {
    let mut rng = SeedTree::new(seed).rng();
    match (center, radius) {
        (Some(c), Some(r)) => {
            if !(r >= 0.0) {
                return Err(GeomError::InvalidParameter(format!(
                    "radius {r} is negative"
                )));
            }
            if r >= injectivity_limit(m) {
                return Err(GeomError::Domain(format!(
                    "radius {r} exceeds the injectivity limit"
                )));
            }
            Ok(sample_in_ball(m, c, r, &mut rng))
        }
        (None, None) => Ok(m.sample_point(&mut rng)),
        _ => Err(GeomError::InvalidParameter(
            "center and radius must be given together".into(),
        )),
    }
}

/// A tangent vector at `x` with metric norm exactly `norm`.
pub fn random_tangent<M: Manifold + ?Sized>(
    m: &M,
    x: &Point,
    seed: u64,
    norm: f64,
) -> Result<TangentVector> {
    if !(norm >= 0.0) {
        return Err(GeomError::InvalidParameter(format!(
            "norm {norm} is negative"
        )));
    }
    let mut rng = SeedTree::new(seed).rng();
    let dir = m.sample_unit_tangent(x, &mut rng);
    Ok(TangentVector::new(x.clone(), dir * norm))
}

/// Radius below which `exp` is a diffeomorphism (pi / sqrt(K) when K > 0).
pub fn injectivity_limit<M: Manifold + ?Sized>(m: &M) -> f64 {
    let k = m.curvature().upper;
    if k > 0.0 {
        std::f64::consts::PI / k.sqrt()
    } else {
        f64::INFINITY
    }
}
