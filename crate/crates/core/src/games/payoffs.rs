use std::sync::Arc;

use nalgebra::{DMatrix, DVector};

use super::ZeroSumGame;
use crate::geometry::{GeomError, Manifold, Point, Result};
use crate::manifolds::{Euclidean, Product, Spd, Sphere};

/// `f(x, y) = x^T B y` on `R^m x R^n`.
#[derive(Debug, Clone)]
pub struct BilinearGame {
    b: DMatrix<f64>,
    space: Product,
}

pub fn bilinear_game(b: DMatrix<f64>) -> BilinearGame {
    let space = Product::new(vec![
        Arc::new(Euclidean::new(b.nrows())),
        Arc::new(Euclidean::new(b.ncols())),
    ]);
    BilinearGame { b, space }
}

impl BilinearGame {
    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.b
    }
}

impl ZeroSumGame for BilinearGame {
    fn space(&self) -> &Product {
        &self.space
    }

    fn payoff(&self, x: &Point, y: &Point) -> f64 {
        x.dot(&(&self.b * y))
    }

    fn grad_x(&self, _x: &Point, y: &Point) -> DVector<f64> {
        &self.b * y
    }

    fn grad_y(&self, x: &Point, _y: &Point) -> DVector<f64> {
        self.b.tr_mul(x)
    }

    fn mu(&self) -> f64 {
        0.0
    }

    fn smoothness(&self) -> f64 {
        self.b.norm().max(f64::MIN_POSITIVE)
    }

    fn ne_residual(&self, z: &Point) -> Vec<f64> {
        vec![z.norm()]
    }
}

/// `f(X, Y) = c1 u^2 + c2 u v - c1 v^2` with `u = logdet X`, `v = logdet Y`,
/// on `SPD(d) x SPD(d)`.
///
/// `logdet` is geodesically linear with gradient `X`, so the game reduces to
/// a quadratic in `(u, v)`; every `(X, Y)` with `det X = det Y = 1` is an
/// equilibrium unless `c1 = c2 = 0`.
#[derive(Debug, Clone)]
pub struct QuadLogdetGame {
    d: usize,
    c1: f64,
    c2: f64,
    spd: Spd,
    space: Product,
}

pub fn quad_logdet_game(d: usize, c1: f64, c2: f64) -> Result<QuadLogdetGame> {
    if d == 0 {
        return Err(GeomError::InvalidParameter(
            "matrix size must be at least 1".into(),
        ));
    }
    if !(c1 >= 0.0) || !c2.is_finite() {
        return Err(GeomError::InvalidParameter(format!(
            "need c1 >= 0 and finite c2 (got {c1}, {c2})"
        )));
    }
    let spd = Spd::new(d);
    let space = Product::new(vec![Arc::new(spd), Arc::new(spd)]);
    Ok(QuadLogdetGame {
        d,
        c1,
        c2,
        spd,
        space,
    })
}

impl QuadLogdetGame {
    pub fn spd(&self) -> &Spd {
        &self.spd
    }

    pub fn coefficients(&self) -> (f64, f64) {
        (self.c1, self.c2)
    }

    pub fn size(&self) -> usize {
        self.d
    }

    /// `(logdet X, logdet Y)` of a joint point.
    pub fn logdets(&self, z: &Point) -> (f64, f64) {
        let (x, y) = self.split(z);
        (self.spd.logdet(&x), self.spd.logdet(&y))
    }

    /// Joint point `(e^{u/d} I, e^{v/d} I)` with the given log-determinants.
    pub fn scalar_point(&self, u: f64, v: f64) -> Point {
        let id = DMatrix::<f64>::identity(self.d, self.d);
        let k = self.d as f64;
        self.space.join(&[
            self.spd.from_matrix(&(&id * (u / k).exp())),
            self.spd.from_matrix(&(&id * (v / k).exp())),
        ])
    }
}

impl ZeroSumGame for QuadLogdetGame {
    fn space(&self) -> &Product {
        &self.space
    }

    fn payoff(&self, x: &Point, y: &Point) -> f64 {
        let (u, v) = (self.spd.logdet(x), self.spd.logdet(y));
        self.c1 * u * u + self.c2 * u * v - self.c1 * v * v
    }

    fn grad_x(&self, x: &Point, y: &Point) -> DVector<f64> {
        let (u, v) = (self.spd.logdet(x), self.spd.logdet(y));
        x * (2.0 * self.c1 * u + self.c2 * v)
    }

    fn grad_y(&self, x: &Point, y: &Point) -> DVector<f64> {
        let (u, v) = (self.spd.logdet(x), self.spd.logdet(y));
        y * (self.c2 * u - 2.0 * self.c1 * v)
    }

    /// `2 c1 d`, used only to configure step sizes.
    fn mu(&self) -> f64 {
        2.0 * self.c1 * self.d as f64
    }

    fn smoothness(&self) -> f64 {
        let l = self.d as f64 * (4.0 * self.c1 * self.c1 + self.c2 * self.c2).sqrt();
        l.max(f64::MIN_POSITIVE)
    }

    fn ne_residual(&self, z: &Point) -> Vec<f64> {
        let (u, v) = self.logdets(z);
        vec![u, v]
    }

    /// `sqrt((u^2 + v^2) / d)`: moving along `X^{t}` changes `logdet` at
    /// rate `sqrt(d)` per unit length.
    fn ne_distance(&self, z: &Point) -> Option<f64> {
        if self.c1 == 0.0 && self.c2 == 0.0 {
            return Some(0.0);
        }
        let (u, v) = self.logdets(z);
        Some(((u * u + v * v) / self.d as f64).sqrt())
    }
}

/// `max_y f(x_bar, y) - min_x f(x, y_bar)` for `c1 > 0`.
///
/// Both inner problems are scalar quadratics in `logdet`, which gives
/// `(c1 + c2^2 / (4 c1)) (u^2 + v^2)`.
pub fn quad_duality_gap(g: &QuadLogdetGame, x_bar: &Point, y_bar: &Point) -> Result<f64> {
    let (c1, c2) = g.coefficients();
    if !(c1 > 0.0) {
        return Err(GeomError::InvalidParameter(
            "duality gap is unbounded when c1 = 0".into(),
        ));
    }
    let u = g.spd.logdet(x_bar);
    let v = g.spd.logdet(y_bar);
    Ok((c1 + c2 * c2 / (4.0 * c1)) * (u * u + v * v))
}

/// `min_A max_X X^T A X + (alpha / n) sum_i d(A, A_i)` over `SPD(d) x S^{d-1}`.
#[derive(Debug, Clone)]
pub struct RobustPcaGame {
    data: Vec<Point>,
    alpha: f64,
    spd: Spd,
    space: Product,
    smoothness: f64,
}

pub fn robust_pca_game(data: Vec<Point>, alpha: f64) -> Result<RobustPcaGame> {
    let first = data
        .first()
        .ok_or_else(|| GeomError::InvalidParameter("robust PCA needs data".into()))?;
    let d = (first.len() as f64).sqrt().round() as usize;
    if d == 0 || d * d != first.len() {
        return Err(GeomError::InvalidParameter(format!(
            "data point of length {} is not a square matrix",
            first.len()
        )));
    }
    if !(alpha >= 0.0) {
        return Err(GeomError::InvalidParameter(format!(
            "alpha {alpha} is negative"
        )));
    }
    let spd = Spd::new(d);
    let mut top: f64 = 0.0;
    for a in &data {
        if a.len() != d * d {
            return Err(GeomError::Dimension {
                expected: d * d,
                got: a.len(),
            });
        }
        let m = spd.to_matrix(a);
        if (&m - m.transpose()).amax() > 1e-10 * m.amax().max(1.0) {
            return Err(GeomError::Domain("data matrix is not symmetric".into()));
        }
        let eig = spd.eigenvalues(a);
        if eig.min() <= 0.0 {
            return Err(GeomError::Domain(
                "data matrix is not positive definite".into(),
            ));
        }
        top = top.max(eig.max());
    }
    let space = Product::new(vec![Arc::new(spd), Arc::new(Sphere::new(d - 1))]);
    Ok(RobustPcaGame {
        data,
        alpha,
        spd,
        space,
        smoothness: 2.0 * top + alpha,
    })
}

impl RobustPcaGame {
    pub fn spd(&self) -> &Spd {
        &self.spd
    }

    pub fn data(&self) -> &[Point] {
        &self.data
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    fn quad(&self, a: &Point, x: &Point) -> f64 {
        x.dot(&(self.spd.to_matrix(a) * x))
    }
}

impl ZeroSumGame for RobustPcaGame {
    fn space(&self) -> &Product {
        &self.space
    }

    fn payoff(&self, a: &Point, x: &Point) -> f64 {
        let spread: f64 = self.data.iter().map(|ai| self.spd.dist(a, ai)).sum();
        self.quad(a, x) + self.alpha / self.data.len() as f64 * spread
    }

    /// `A x x^T A` plus `-(alpha / n) log_A(A_i) / d(A, A_i)` per summand,
    /// with the summand dropped when `A` and `A_i` coincide.
    fn grad_x(&self, a: &Point, x: &Point) -> DVector<f64> {
        let am = self.spd.to_matrix(a);
        let ax = &am * x;
        let mut g = self.spd.from_matrix(&(&ax * ax.transpose()));
        let w = self.alpha / self.data.len() as f64;
        for ai in &self.data {
            let d = self.spd.dist(a, ai);
            // Rounding leaves d ~ 1e-15 at A = A_i; the direction is noise there.
            if d > 1e-10 {
                if let Ok(l) = self.spd.log(a, ai) {
                    g -= l * (w / d);
                }
            }
        }
        g
    }

    fn grad_y(&self, a: &Point, x: &Point) -> DVector<f64> {
        let ax = self.spd.to_matrix(a) * x;
        let q = x.dot(&ax);
        (ax - x * q) * 2.0
    }

    fn mu(&self) -> f64 {
        0.0
    }

    /// Heuristic scale `2 lambda_max + alpha`; no global constant exists.
    fn smoothness(&self) -> f64 {
        self.smoothness
    }

    /// Sphere-gradient norm and the Rayleigh quotient `x^T A x`.
    fn ne_residual(&self, z: &Point) -> Vec<f64> {
        let (a, x) = self.split(z);
        vec![self.grad_y(&a, &x).norm(), self.quad(&a, &x)]
    }
}
