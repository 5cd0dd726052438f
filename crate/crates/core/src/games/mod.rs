//! Zero-sum games `min_x max_y f(x, y)` on product manifolds and their
//! first-order solvers.
//!
//! A joint point `z = (x, y)` is stored in the coordinates of the product
//! [`Product`] returned by [`ZeroSumGame::space`]. The field
//! `F(z) = [grad_x f, -grad_y f]` drives every solver: each one descends
//! along `F`, which is descent in `x` and ascent in `y`.

mod payoffs;

pub use payoffs::{
    bilinear_game, quad_duality_gap, quad_logdet_game, robust_pca_game, BilinearGame,
    QuadLogdetGame, RobustPcaGame,
};

use std::fmt;

use nalgebra::DVector;

use crate::geometry::{GeomError, Manifold, Point, Result, TangentVector};
use crate::manifolds::Product;

pub trait ZeroSumGame: Send + Sync + fmt::Debug {
    /// Two-factor product `M x N`.
    fn space(&self) -> &Product;

    fn payoff(&self, x: &Point, y: &Point) -> f64;

    /// Riemannian gradient in `x`, in factor-0 coordinates.
    fn grad_x(&self, x: &Point, y: &Point) -> DVector<f64>;

    /// Riemannian gradient in `y`, in factor-1 coordinates.
    fn grad_y(&self, x: &Point, y: &Point) -> DVector<f64>;

    /// Strong convexity-concavity modulus, 0 when merely convex-concave.
    fn mu(&self) -> f64;

    fn smoothness(&self) -> f64;

    /// Payoff-specific distance-from-equilibrium summary.
    fn ne_residual(&self, z: &Point) -> Vec<f64>;

    /// Distance to the nearest equilibrium when it is known in closed form.
    fn ne_distance(&self, _z: &Point) -> Option<f64> {
        None
    }

    fn split(&self, z: &Point) -> (Point, Point) {
        let s = self.space();
        (s.part(0, z), s.part(1, z))
    }

    fn joint_payoff(&self, z: &Point) -> f64 {
        let (x, y) = self.split(z);
        self.payoff(&x, &y)
    }

    /// `F(z) = [grad_x f, -grad_y f]`.
    fn field(&self, z: &Point) -> DVector<f64> {
        let (x, y) = self.split(z);
        self.space()
            .join(&[self.grad_x(&x, &y), -self.grad_y(&x, &y)])
    }
}

fn checked_field<G: ZeroSumGame + ?Sized>(g: &G, z: &Point) -> Result<DVector<f64>> {
    let f = g.field(z);
    if f.iter().all(|v| v.is_finite()) {
        Ok(f)
    } else {
        Err(GeomError::NonFinite("game field"))
    }
}

fn check_eta(eta: f64) -> Result<()> {
    if eta > 0.0 && eta.is_finite() {
        Ok(())
    } else {
        Err(GeomError::InvalidParameter(format!(
            "step size must be positive, got {eta}"
        )))
    }
}

/// Solver memory for optimistic descent-ascent.
#[derive(Debug, Clone, PartialEq)]
pub struct GameState {
    pub z_prev: Point,
    pub z_cur: Point,
    /// `F(z_prev)`.
    pub grad_prev: TangentVector,
    /// Geodesic running average of `z_1..z_round`.
    pub z_bar: Point,
    pub round: usize,
    /// Smallest `|F(z_t)|` over the iterates visited before `z_cur`.
    pub best_grad_norm: f64,
    primed: bool,
}

impl GameState {
    pub fn new<G: ZeroSumGame + ?Sized>(g: &G, z0: &Point) -> Result<Self> {
        let m = g.space();
        if z0.len() != m.ambient_dim() {
            return Err(GeomError::Dimension {
                expected: m.ambient_dim(),
                got: z0.len(),
            });
        }
        Ok(GameState {
            z_prev: z0.clone(),
            z_cur: z0.clone(),
            grad_prev: TangentVector::zero(z0),
            z_bar: z0.clone(),
            round: 0,
            best_grad_norm: f64::INFINITY,
            primed: false,
        })
    }

    pub fn x(&self, g: &dyn ZeroSumGame) -> Point {
        g.space().part(0, &self.z_cur)
    }

    pub fn y(&self, g: &dyn ZeroSumGame) -> Point {
        g.space().part(1, &self.z_cur)
    }
}

/// One optimistic descent-ascent step
/// `z+ = exp_z(-2 eta F(z) + eta Gamma_{z_prev -> z} F(z_prev))`.
///
/// The first step uses `F(z_0)` as its own memory, which makes it a plain
/// step `exp_z(-eta F(z_0))`.
pub fn rogda_step<G: ZeroSumGame + ?Sized>(g: &G, s: &GameState, eta: f64) -> Result<GameState> {
    check_eta(eta)?;
    let m = g.space();
    let f_cur = checked_field(g, &s.z_cur)?;
    let memory = if s.primed {
        m.transport(&s.z_prev, &s.z_cur, &s.grad_prev.coords)?
    } else {
        f_cur.clone()
    };
    let dir = m.project_tangent(&s.z_cur, &(&f_cur * (-2.0 * eta) + memory * eta));
    let next = m.exp(&s.z_cur, &dir);
    if next.iter().any(|v| !v.is_finite()) {
        return Err(GeomError::NonFinite("iterate"));
    }
    let round = s.round + 1;
    let z_bar = if round == 1 {
        next.clone()
    } else {
        geodesic_average(m, &s.z_bar, &next, round - 1)?
    };
    let norm = m.norm(&s.z_cur, &f_cur);
    Ok(GameState {
        z_prev: s.z_cur.clone(),
        z_cur: next,
        grad_prev: TangentVector::new(s.z_cur.clone(), f_cur),
        z_bar,
        round,
        best_grad_norm: s.best_grad_norm.min(norm),
        primed: true,
    })
}

/// `exp_{z_bar}(log_{z_bar}(z_new) / (t + 1))`.
pub fn geodesic_average<M: Manifold + ?Sized>(
    m: &M,
    z_bar: &Point,
    z_new: &Point,
    t: usize,
) -> Result<Point> {
    if t == 0 {
        return Err(GeomError::InvalidParameter(
            "averaging index starts at 1".into(),
        ));
    }
    let v = m.log(z_bar, z_new)?;
    Ok(m.exp(z_bar, &(v / (t as f64 + 1.0))))
}

/// Simultaneous descent-ascent `exp_z(-eta F(z))`.
pub fn rgda_step<G: ZeroSumGame + ?Sized>(g: &G, z: &Point, eta: f64) -> Result<Point> {
    check_eta(eta)?;
    let m = g.space();
    let f = checked_field(g, z)?;
    Ok(m.exp(z, &m.project_tangent(z, &(f * -eta))))
}

/// Corrected extragradient: `w = exp_z(-eta F(z))`, then
/// `z+ = exp_w(-eta F(w) + log_w z)`.
pub fn rceg_step<G: ZeroSumGame + ?Sized>(g: &G, z: &Point, eta: f64) -> Result<Point> {
    let w = rgda_step(g, z, eta)?;
    let m = g.space();
    let fw = checked_field(g, &w)?;
    let back = m.log(&w, z)?;
    Ok(m.exp(&w, &m.project_tangent(&w, &(fw * -eta + back))))
}

#[derive(Debug, Clone, PartialEq)]
pub struct NEDiagnostics {
    pub grad_norm: f64,
    pub best_grad_norm: f64,
    pub ne_residual: Vec<f64>,
}

pub fn ne_diagnostics<G: ZeroSumGame + ?Sized>(g: &G, s: &GameState) -> NEDiagnostics {
    let m = g.space();
    let grad_norm = m.norm(&s.z_cur, &g.field(&s.z_cur));
    NEDiagnostics {
        grad_norm,
        best_grad_norm: s.best_grad_norm.min(grad_norm),
        ne_residual: g.ne_residual(&s.z_cur),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::{dvector, DMatrix};

    fn xy() -> BilinearGame {
        bilinear_game(DMatrix::from_element(1, 1, 1.0))
    }

    #[test]
    fn bilinear_first_step() {
        let g = xy();
        let s = GameState::new(&g, &dvector![1.0, 0.0]).unwrap();
        let s = rogda_step(&g, &s, 0.1).unwrap();
        assert!((s.z_cur[0] - 1.0).abs() < 1e-15);
        assert!((s.z_cur[1] - 0.1).abs() < 1e-15);
        assert_eq!(s.z_bar, s.z_cur);
    }

    #[test]
    fn fixed_point_at_equilibrium() {
        let g = xy();
        let z = dvector![0.0, 0.0];
        let mut s = GameState::new(&g, &z).unwrap();
        for _ in 0..5 {
            s = rogda_step(&g, &s, 0.3).unwrap();
        }
        assert_eq!(s.z_cur, z);
        assert_eq!(rgda_step(&g, &z, 0.3).unwrap(), z);
        assert_eq!(rceg_step(&g, &z, 0.3).unwrap(), z);
    }

    #[test]
    fn quad_logdet_identity_is_fixed() {
        let g = quad_logdet_game(3, 1.0, 1.0).unwrap();
        let z = g.space().join(&[g.spd().identity(), g.spd().identity()]);
        let s = rogda_step(&g, &GameState::new(&g, &z).unwrap(), 0.2).unwrap();
        assert!(g.space().dist(&s.z_cur, &z) < 1e-12);
        let d = ne_diagnostics(&g, &s);
        assert!(d.grad_norm < 1e-12);
        assert!(d.ne_residual.iter().all(|r| r.abs() < 1e-12));
    }

    #[test]
    fn gda_spirals_out_while_ogda_converges() {
        let g = xy();
        let mut z = dvector![1.0, 0.0];
        let mut s = GameState::new(&g, &z).unwrap();
        for t in 1..=1500 {
            let next = rgda_step(&g, &z, 0.1).unwrap();
            assert!(next.norm() > z.norm());
            z = next;
            s = rogda_step(&g, &s, 0.1).unwrap();
            if t == 500 {
                assert!(s.z_cur.norm() < 0.1);
            }
        }
        assert!(s.z_cur.norm() < 1e-3);
    }

    #[test]
    fn gda_equals_ogda_with_memory_equal_to_field() {
        let g = xy();
        let z = dvector![0.7, -0.2];
        let mut s = GameState::new(&g, &z).unwrap();
        s.primed = true;
        s.grad_prev = TangentVector::new(z.clone(), g.field(&z));
        let a = rogda_step(&g, &s, 0.1).unwrap().z_cur;
        let b = rgda_step(&g, &z, 0.1).unwrap();
        assert!((a - b).norm() < 1e-15);
    }

    #[test]
    fn extragradient_flat_form() {
        let g = xy();
        let z = dvector![0.4, 0.9];
        let eta = 0.2;
        let w = &z - g.field(&z) * eta;
        let expect = &z - g.field(&w) * eta;
        assert!((rceg_step(&g, &z, eta).unwrap() - expect).norm() < 1e-15);
    }

    #[test]
    fn average_is_arithmetic_mean_in_flat_space() {
        let g = xy();
        let mut s = GameState::new(&g, &dvector![1.0, 0.5]).unwrap();
        let mut sum = DVector::zeros(2);
        for t in 1..=50 {
            s = rogda_step(&g, &s, 0.1).unwrap();
            sum += &s.z_cur;
            assert!((&s.z_bar - &sum / t as f64).norm() < 1e-12);
        }
    }

    #[test]
    fn geodesic_average_midpoint() {
        let m = crate::manifolds::Sphere::new(2);
        let a = dvector![1.0, 0.0, 0.0];
        let b = dvector![0.0, 1.0, 0.0];
        let mid = geodesic_average(&m, &a, &b, 1).unwrap();
        let h = std::f64::consts::FRAC_1_SQRT_2;
        assert!((mid - dvector![h, h, 0.0]).norm() < 1e-12);
        assert_eq!(geodesic_average(&m, &a, &a, 7).unwrap(), a);
    }

    #[test]
    fn best_grad_norm_is_monotone() {
        let g = quad_logdet_game(2, 0.0, 1.0).unwrap();
        let spd = g.spd();
        let x = spd.from_matrix(&(DMatrix::identity(2, 2) * 1.5));
        let y = spd.from_matrix(&(DMatrix::identity(2, 2) * 0.8));
        let mut s = GameState::new(&g, &g.space().join(&[x, y])).unwrap();
        let mut last = f64::INFINITY;
        let mut at10 = 0.0;
        for t in 1..=100 {
            s = rogda_step(&g, &s, 0.05).unwrap();
            let d = ne_diagnostics(&g, &s);
            assert!(d.best_grad_norm <= last);
            last = d.best_grad_norm;
            if t == 10 {
                at10 = last;
            }
        }
        assert!(last <= at10);
    }
}
